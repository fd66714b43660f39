//! Seeded synthetic rating data.

use rand::seq::index;
use rand::Rng as _;

use crate::dataset::{Rating, RatingDataset};
use crate::error::{Error, Result};
use crate::model::{dot, Items, LikeVector, NNModel, StateVector};
use crate::rng;

fn check_density(density: f64) -> Result<()> {
    if density > 0.0 && density <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("density must lie in (0, 1], got {density}")))
    }
}

fn observed_pairs(users: usize, items: usize, density: f64, r: &mut rng::Rng) -> Vec<(usize, usize)> {
    let total = users * items;
    let n = ((density * total as f64).round() as usize).clamp(1, total);
    let mut cells = index::sample(r, total, n).into_vec();
    cells.sort_unstable();
    cells.into_iter().map(|c| (c / items, c % items)).collect()
}

/// Uniform ratings on a uniformly chosen `density` share of all pairs.
pub fn random_dataset(users: usize, items: usize, levels: usize, density: f64, seed: u64) -> Result<RatingDataset> {
    check_density(density)?;
    if users == 0 || items == 0 || levels == 0 || levels > u8::MAX as usize {
        return Err(Error::invalid("random dataset needs users, items and 1..=255 levels"));
    }
    let mut r = rng::seeded(seed);
    let ratings = observed_pairs(users, items, density, &mut r)
        .into_iter()
        .map(|(user, item)| Rating {
            user,
            item,
            value: r.random_range(1..=levels as u8),
        })
        .collect();
    RatingDataset::new(users, items, levels, ratings)
}

/// Ratings drawn from a random binary-mode model with `dim` tastes.
///
/// Each user leans towards one taste; rating `1 + Binomial(Z - 1, q)` where
/// `q` is the model's like-probability. Returns the planted model too.
pub fn planted_dataset(
    users: usize,
    items: usize,
    dim: usize,
    levels: usize,
    density: f64,
    seed: u64,
) -> Result<(RatingDataset, NNModel)> {
    check_density(density)?;
    if users == 0 || items == 0 || dim == 0 || !(2..=u8::MAX as usize).contains(&levels) {
        return Err(Error::invalid("planted dataset needs users, items, dim and 2..=255 levels"));
    }
    let mut r = rng::seeded(seed);
    let states: Vec<StateVector> = (0..users)
        .map(|_| {
            let mut w: Vec<f64> = (0..dim).map(|_| 0.1 * r.random::<f64>()).collect();
            w[r.random_range(0..dim)] += 1.0;
            let s: f64 = w.iter().sum();
            StateVector::new_unchecked(w.iter().map(|x| x / s).collect())
        })
        .collect();
    let likes: Vec<LikeVector> = (0..items)
        .map(|_| LikeVector::new_unchecked((0..dim).map(|_| r.random::<f64>().powi(2)).collect()))
        .collect();
    let mut ratings = Vec::new();
    for (user, item) in observed_pairs(users, items, density, &mut r) {
        let q = dot(states[user].as_slice(), likes[item].as_slice()).clamp(0.0, 1.0);
        let ups = (1..levels).filter(|_| r.random_bool(q)).count();
        ratings.push(Rating {
            user,
            item,
            value: 1 + ups as u8,
        });
    }
    let model = NNModel::new(dim, levels, states, Items::Binary(likes))?;
    Ok((RatingDataset::new(users, items, levels, ratings)?, model))
}
