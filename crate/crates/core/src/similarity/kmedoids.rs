use rand::Rng as _;

use super::item::DeltaMatrix;
use crate::error::{Error, Result};
use crate::model::NNModel;
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct ItemClustering {
    pub k: usize,
    /// Cluster index of each item.
    pub assignment: Vec<usize>,
    /// Item index of each cluster's medoid.
    pub medoids: Vec<usize>,
    pub total_cost: f64,
    /// Total cost after seeding and after every round.
    pub cost_history: Vec<f64>,
}

impl ItemClustering {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == cluster)
            .collect()
    }
}

/// Clusters the items of `model` under [`item_delta`](super::item_delta).
/// Binary items are expanded to two-outcome systems first.
pub fn kmedoids_items(model: &NNModel, k: usize, seed: u64, max_rounds: usize) -> Result<ItemClustering> {
    let items = (0..model.num_items())
        .map(|i| model.item_outcomes(i))
        .collect::<Result<Vec<_>>>()?;
    let delta = DeltaMatrix::from_items(&items)?;
    kmedoids(&delta, k, seed, max_rounds)
}

fn assign(delta: &DeltaMatrix, medoids: &[usize]) -> Vec<usize> {
    let mut own = vec![None; delta.len()];
    for (c, &m) in medoids.iter().enumerate() {
        own[m] = Some(c);
    }
    (0..delta.len())
        .map(|i| {
            own[i].unwrap_or_else(|| {
                let mut best = 0;
                for c in 1..medoids.len() {
                    let (d, bd) = (delta.get(i, medoids[c]), delta.get(i, medoids[best]));
                    if d < bd || (d == bd && medoids[c] < medoids[best]) {
                        best = c;
                    }
                }
                best
            })
        })
        .collect()
}

fn cost(delta: &DeltaMatrix, medoids: &[usize], assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| delta.get(i, medoids[c]))
        .sum()
}

/// Best single medoid swap `(cluster, replacement, new cost)`, if any lowers
/// the total cost.
fn best_swap(delta: &DeltaMatrix, medoids: &[usize], total: f64) -> Option<(usize, usize, f64)> {
    let n = delta.len();
    let mut first = vec![f64::INFINITY; n];
    let mut first_c = vec![0; n];
    let mut second = vec![f64::INFINITY; n];
    for i in 0..n {
        for (c, &m) in medoids.iter().enumerate() {
            let d = delta.get(i, m);
            if d < first[i] {
                second[i] = first[i];
                first[i] = d;
                first_c[i] = c;
            } else if d < second[i] {
                second[i] = d;
            }
        }
    }
    let mut best: Option<(usize, usize, f64)> = None;
    let threshold = total - 1e-12 * (1.0 + total);
    for c in 0..medoids.len() {
        for h in (0..n).filter(|h| !medoids.contains(h)) {
            let swapped: f64 = (0..n)
                .map(|i| {
                    let dh = delta.get(i, h);
                    let rest = if first_c[i] == c { second[i] } else { first[i] };
                    dh.min(rest)
                })
                .sum();
            if swapped < threshold && best.is_none_or(|(_, _, b)| swapped < b) {
                best = Some((c, h, swapped));
            }
        }
    }
    best
}

/// PAM-style k-medoids on a precomputed distance matrix.
///
/// Seeding is greedy farthest-point from a random first medoid. Each round
/// moves every medoid to the member of its cluster with the smallest
/// within-cluster cost (keeping the current medoid on ties), then reassigns
/// items. When a round changes nothing, the best single medoid swap that
/// lowers the total cost is applied instead; the search stops when there is
/// none, or after `max_rounds`.
pub fn kmedoids(delta: &DeltaMatrix, k: usize, seed: u64, max_rounds: usize) -> Result<ItemClustering> {
    let n = delta.len();
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds the number of items ({n})")));
    }

    let mut rng = rng::seeded(seed);
    let mut medoids = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| delta.get(i, medoids[0])).collect();
    while medoids.len() < k {
        let mut far = None;
        for i in 0..n {
            if medoids.contains(&i) {
                continue;
            }
            match far {
                Some(f) if nearest[i] <= nearest[f] => {}
                _ => far = Some(i),
            }
        }
        let next = far.expect("k <= n leaves a candidate");
        medoids.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(delta.get(i, next));
        }
    }

    let mut assignment = assign(delta, &medoids);
    let mut total = cost(delta, &medoids, &assignment);
    let mut cost_history = vec![total];
    for _ in 0..max_rounds {
        let mut changed = false;
        for c in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
            let within = |m: usize| members.iter().map(|&i| delta.get(i, m)).sum::<f64>();
            let mut best = medoids[c];
            let mut best_cost = within(best);
            for &cand in &members {
                let w = within(cand);
                if w < best_cost {
                    best = cand;
                    best_cost = w;
                }
            }
            if best != medoids[c] {
                medoids[c] = best;
                changed = true;
            }
        }
        if !changed {
            match best_swap(delta, &medoids, total) {
                Some((c, h, _)) => medoids[c] = h,
                None => break,
            }
        }
        assignment = assign(delta, &medoids);
        total = cost(delta, &medoids, &assignment);
        cost_history.push(total);
    }

    Ok(ItemClustering {
        k,
        assignment,
        medoids,
        total_cost: total,
        cost_history,
    })
}

/// Up to `m` items per cluster: the medoid, then the most popular members
/// (ties by lowest index).
pub fn cluster_representatives(clustering: &ItemClustering, popularity: &[usize], m: usize) -> Result<Vec<Vec<usize>>> {
    if popularity.len() != clustering.assignment.len() {
        return Err(Error::DimensionMismatch {
            expected: clustering.assignment.len(),
            found: popularity.len(),
        });
    }
    Ok((0..clustering.k)
        .map(|c| {
            let medoid = clustering.medoids[c];
            let mut rest: Vec<usize> = clustering.members(c).into_iter().filter(|&i| i != medoid).collect();
            rest.sort_by(|&a, &b| popularity[b].cmp(&popularity[a]).then(a.cmp(&b)));
            std::iter::once(medoid).chain(rest).take(m).collect()
        })
        .collect())
}
