use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rlp_core::kmeans::KmeansConfig;
use rlp_core::som::{bmu, som_kmeans, train_som_traced, SomGrid};
use rlp_core::validity::ground_truth_agreement;
use rlp_core::TrainSchedule64;

/// Four tight blobs at the corners of a square, 25 points each.
fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let corners = [[0.0, 0.0], [0.0, 5.0], [5.0, 0.0], [5.0, 5.0]];
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (c, corner) in corners.iter().enumerate() {
        for _ in 0..25 {
            data.push(corner.iter().map(|v| v + noise.sample(&mut rng)).collect());
            labels.push(c);
        }
    }
    (data, labels)
}

#[test]
fn recovers_four_blobs() {
    let grid = SomGrid::new(10, 10).unwrap();
    let schedule = TrainSchedule64::for_grid(&grid);
    let mut exact = 0;
    for seed in 0..10 {
        let (data, labels) = blobs(seed);
        let fit = som_kmeans(&data, grid, 4, seed, &schedule, &KmeansConfig::new(4, seed)).unwrap();
        if fit.partition.k() == 4
            && ground_truth_agreement(fit.partition.assignment(), &labels).unwrap() == 1.0
        {
            exact += 1;
        }
    }
    assert!(exact >= 8, "{exact}/10");
}

#[test]
fn rough_phase_error_mostly_falls() {
    let grid = SomGrid::new(10, 10).unwrap();
    let schedule = TrainSchedule64::for_grid(&grid);
    let (data, _) = blobs(3);
    let (model, qe) = train_som_traced(&data, grid, &schedule, 3).unwrap();
    let rough = &qe[..schedule.rough_epochs];
    let falls = rough.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(
        falls * 5 >= (rough.len() - 1) * 4,
        "{falls} of {}",
        rough.len() - 1
    );

    // Projection agrees with a direct scan.
    for x in &data {
        let d: Vec<f64> = model
            .weights()
            .iter()
            .map(|w| w.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum())
            .collect();
        let best = (0..d.len()).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        assert_eq!(bmu(&model, x).unwrap(), best);
    }
}
