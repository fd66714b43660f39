use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::{OutcomeSystem, StateVector};
use crate::rng;

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

/// Total variational distance `||p - q||_1 / 2`.
pub fn tvd(p: &StateVector, q: &StateVector) -> Result<f64> {
    same_dim(p.dim(), q.dim())?;
    Ok(0.5
        * p.as_slice()
            .iter()
            .zip(q.as_slice())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// The event `{ j : p_j > q_j }`, on which the probabilities of `p` and `q`
/// differ the most.
pub fn distinguishing_event(p: &StateVector, q: &StateVector) -> Result<Vec<usize>> {
    same_dim(p.dim(), q.dim())?;
    Ok(p.as_slice()
        .iter()
        .zip(q.as_slice())
        .enumerate()
        .filter(|(_, (a, b))| a > b)
        .map(|(j, _)| j)
        .collect())
}

/// Best possible probability of telling `p` from `q` from one rating of
/// any item: `(1 + tvd(p, q)) / 2`.
pub fn user_success_bound(p: &StateVector, q: &StateVector) -> Result<f64> {
    Ok(0.5 * (1.0 + tvd(p, q)?))
}

/// Lower bound on the probability that two users rate any item differently.
///
/// For independent ratings, `P[R1 != R2] = 1 - sum_z P1[z] P2[z]`, and
/// `P1[z] P2[z] <= min(P1[z], P2[z])` with `sum_z min(P1[z], P2[z]) = 1 - tvd`
/// on the rating distributions, which is at least `1 - tvd(p1, p2)` on the
/// states. Hence the bound holds for every item.
pub fn disagreement_lower_bound(p1: &StateVector, p2: &StateVector) -> Result<f64> {
    tvd(p1, p2)
}

/// Two-outcome item whose first outcome is exactly the distinguishing event
/// of `(p, q)`. Playing the guessing game on it attains the success bound.
pub fn witness_item(p: &StateVector, q: &StateVector) -> Result<OutcomeSystem> {
    let event = distinguishing_event(p, q)?;
    let mut assignment = vec![1; p.dim()];
    for j in event {
        assignment[j] = 0;
    }
    OutcomeSystem::deterministic(&assignment, 2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameResult {
    pub trials: u64,
    pub wins: u64,
    pub empirical_success: f64,
    /// Success probability of the optimal strategy for this item.
    pub theoretical_bound: f64,
}

/// Simulates the referee game: a fair coin picks one of two users, that
/// user rates `item`, and the player guesses the user from the rating alone.
///
/// The player uses the optimal rule: guess the first user iff the rating
/// lies in `{ z : P1[z] > P2[z] }` (ties go to the second user).
pub fn play_guess_game(
    p: &StateVector,
    q: &StateVector,
    item: &OutcomeSystem,
    trials: u64,
    seed: u64,
) -> Result<GameResult> {
    same_dim(p.dim(), q.dim())?;
    same_dim(p.dim(), item.dim())?;
    if trials == 0 {
        return Err(Error::invalid("guessing game needs at least one trial"));
    }
    let clamp = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| x.max(0.0)).collect() };
    let first = clamp(item.distribution(p.as_slice())?);
    let second = clamp(item.distribution(q.as_slice())?);
    let guess_first: Vec<bool> = first.iter().zip(&second).map(|(a, b)| a > b).collect();
    let theoretical_bound = 0.5
        * guess_first
            .iter()
            .zip(first.iter().zip(&second))
            .map(|(&g, (a, b))| if g { a } else { b })
            .sum::<f64>();

    let sampler = |w: &[f64]| {
        WeightedIndex::new(w).map_err(|e| Error::invalid(format!("item gives no rating distribution: {e}")))
    };
    let first_dist = sampler(&first)?;
    let second_dist = sampler(&second)?;

    let mut rng = rng::seeded(seed);
    let mut wins = 0u64;
    for _ in 0..trials {
        let picked_first = rng.random_bool(0.5);
        let rating = if picked_first {
            first_dist.sample(&mut rng)
        } else {
            second_dist.sample(&mut rng)
        };
        if guess_first[rating] == picked_first {
            wins += 1;
        }
    }
    Ok(GameResult {
        trials,
        wins,
        empirical_success: wins as f64 / trials as f64,
        theoretical_bound,
    })
}
