mod oracles;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlp_core::validity::{cdi, dbi, evaluate, ground_truth_agreement, mdi, mia};
use rlp_core::Partition64;

fn random_partition(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
    let n = rng.random_range(4..=100);
    let dim = rng.random_range(1..=8);
    let k = rng.random_range(2..=n.min(12));
    let data: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    // First k points seed the clusters so none is empty.
    let mut labels: Vec<usize> = (0..n)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    labels.shuffle(rng);
    (data, labels)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn indices_match_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let (data, labels) = random_partition(&mut rng);
        let p = Partition64::from_labels(&data, labels.clone(), "rand", 0).unwrap();
        let got = evaluate(&data, &p).unwrap();
        let want = oracles::validity::indices(&data, &labels);
        assert!(close(got.cdi, want.cdi), "cdi {} vs {}", got.cdi, want.cdi);
        assert!(close(got.mdi, want.mdi), "mdi {} vs {}", got.mdi, want.mdi);
        assert!(close(got.dbi, want.dbi), "dbi {} vs {}", got.dbi, want.dbi);
        assert!(close(got.mia, want.mia), "mia {} vs {}", got.mia, want.mia);
    }
}

#[test]
fn two_square_clusters() {
    let data = vec![
        vec![0.0, 0.0],
        vec![0.0, 2.0],
        vec![4.0, 0.0],
        vec![4.0, 2.0],
    ];
    let p = Partition64::from_labels(&data, vec![0, 0, 1, 1], "hand", 0).unwrap();
    assert!((mia(&data, &p).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((cdi(&data, &p).unwrap() - 0.5).abs() < 1e-12);
    assert!((mdi(&data, &p).unwrap() - 0.25).abs() < 1e-12);
    assert!((dbi(&data, &p).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn shuffled_labels_agree_by_chance_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let partition: Vec<usize> = (0..200).map(|i| i % 5).collect();
    let mut total = 0.0;
    for _ in 0..1000 {
        let mut labels = partition.clone();
        labels.shuffle(&mut rng);
        total += ground_truth_agreement(&partition, &labels).unwrap();
    }
    assert!((total / 1000.0).abs() < 0.05);
    assert_eq!(ground_truth_agreement(&partition, &partition).unwrap(), 1.0);
    assert_eq!(
        ground_truth_agreement(&vec![0; 200], &partition).unwrap(),
        0.0
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn indices_ignore_cluster_names_and_point_order(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (data, labels) = random_partition(&mut rng);
        let k = labels.iter().max().unwrap() + 1;
        let mut rename: Vec<usize> = (0..k).collect();
        rename.shuffle(&mut rng);
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng);
        let data2: Vec<Vec<f64>> = order.iter().map(|&i| data[i].clone()).collect();
        let labels2: Vec<usize> = order.iter().map(|&i| rename[labels[i]]).collect();

        let a = evaluate(&data, &Partition64::from_labels(&data, labels, "a", 0).unwrap()).unwrap();
        let b = evaluate(&data2, &Partition64::from_labels(&data2, labels2, "b", 0).unwrap()).unwrap();
        prop_assert!(close(a.cdi, b.cdi) && close(a.mdi, b.mdi) && close(a.dbi, b.dbi) && close(a.mia, b.mia));
    }

    #[test]
    fn agreement_is_invariant_to_renaming(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, labels) = random_partition(&mut rng);
        let truth: Vec<usize> = (0..labels.len()).map(|_| rng.random_range(0..4)).collect();
        let k = labels.iter().max().unwrap() + 1;
        let mut rename: Vec<usize> = (0..k).collect();
        rename.shuffle(&mut rng);
        let renamed: Vec<usize> = labels.iter().map(|&l| rename[l]).collect();
        let a = ground_truth_agreement(&labels, &truth).unwrap();
        let b = ground_truth_agreement(&renamed, &truth).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&a));
    }
}
