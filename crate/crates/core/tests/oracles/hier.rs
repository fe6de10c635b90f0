//! Agglomerative clustering that recomputes every linkage from the member
//! sets at each step, and a minimum-spanning-tree single-linkage cut.

use super::geometry::{first_appearance, mean, Dist};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    Single,
    Average,
    Ward,
}

#[derive(Clone, Copy, Debug)]
pub struct NaiveMerge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub id: usize,
}

fn linkage(data: &[Vec<f64>], a: &[usize], b: &[usize], link: Link, dist: Dist) -> f64 {
    match link {
        Link::Single => a
            .iter()
            .flat_map(|&i| b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| dist.eval(&data[i], &data[j]))
            .fold(f64::INFINITY, f64::min),
        Link::Average => {
            let s: f64 = a
                .iter()
                .flat_map(|&i| b.iter().map(move |&j| (i, j)))
                .map(|(i, j)| dist.eval(&data[i], &data[j]))
                .sum();
            s / (a.len() * b.len()) as f64
        }
        Link::Ward => {
            // Growth of the within-cluster sum of squares, doubled, rooted.
            let pa: Vec<&[f64]> = a.iter().map(|&i| data[i].as_slice()).collect();
            let pb: Vec<&[f64]> = b.iter().map(|&i| data[i].as_slice()).collect();
            let (na, nb) = (a.len() as f64, b.len() as f64);
            (2.0 * na * nb / (na + nb)).sqrt() * Dist::Euclidean.eval(&mean(&pa), &mean(&pb))
        }
    }
}

pub fn naive_merges(data: &[Vec<f64>], link: Link, dist: Dist) -> Vec<NaiveMerge> {
    let n = data.len();
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..active.len() {
            for y in x + 1..active.len() {
                let v = linkage(data, &active[x].1, &active[y].1, link, dist);
                let (lo, hi) = (active[x].0.min(active[y].0), active[x].0.max(active[y].0));
                let better = match best {
                    None => true,
                    Some((bv, blo, bhi, _, _)) => (v, lo, hi) < (bv, blo, bhi),
                };
                if better {
                    best = Some((v, lo, hi, x, y));
                }
            }
        }
        let (v, lo, hi, x, y) = best.unwrap();
        let (_, mut members) = active.remove(y);
        members.extend(active.remove(x).1);
        active.push((n + step, members));
        out.push(NaiveMerge {
            left: lo,
            right: hi,
            height: v,
            id: n + step,
        });
    }
    out
}

/// Components left after deleting the `k − 1` heaviest edges of the minimum
/// spanning tree, numbered by smallest member.
pub fn mst_cut(data: &[Vec<f64>], dist: Dist, k: usize) -> Vec<usize> {
    let n = data.len();
    // Prim on the complete graph.
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, usize::MAX); n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if !in_tree[j] {
                let d = dist.eval(&data[cur], &data[j]);
                if d < best[j].0 {
                    best[j] = (d, cur);
                }
            }
        }
        let next = (0..n)
            .filter(|&j| !in_tree[j])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0))
            .unwrap();
        edges.push((best[next].0, best[next].1, next));
        in_tree[next] = true;
        cur = next;
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    edges.truncate(n - k);

    let mut comp: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(_, a, b) in &edges {
            let m = comp[a].min(comp[b]);
            if comp[a] != m || comp[b] != m {
                comp[a] = m;
                comp[b] = m;
                changed = true;
            }
        }
    }
    first_appearance(&comp)
}
