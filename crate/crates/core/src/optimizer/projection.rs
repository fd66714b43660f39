use crate::error::{Error, Result};
use crate::model::{LikeVector, StateVector};

/// Euclidean projection onto the probability simplex.
///
/// Sort-based threshold method: with `u` sorted descending, the largest `k`
/// such that `u_k > (sum_{j<=k} u_j - 1) / k` fixes the shift `theta`, and the
/// projection is `max(x - theta, 0)`. The result is renormalized so its sum is
/// one to rounding.
pub fn project_simplex(x: &[f64]) -> Result<StateVector> {
    if x.is_empty() {
        return Err(Error::invalid("cannot project an empty vector"));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("projection input"));
    }
    let mut y = x.to_vec();
    simplex_in_place(&mut y);
    Ok(StateVector::new_unchecked(y))
}

pub(crate) fn simplex_in_place(x: &mut [f64]) {
    let mut sorted = x.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
    let sum: f64 = x.iter().sum();
    if sum > 0.0 {
        for v in x.iter_mut() {
            *v /= sum;
        }
    } else {
        // unreachable for finite input; keep the output on the simplex anyway
        let d = x.len() as f64;
        x.iter_mut().for_each(|v| *v = 1.0 / d);
    }
}

/// Componentwise clamp to `[0, 1]`, the Euclidean projection onto the unit box.
pub fn project_box(x: &[f64]) -> Result<LikeVector> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("projection input"));
    }
    let mut y = x.to_vec();
    box_in_place(&mut y);
    Ok(LikeVector::new_unchecked(y))
}

pub(crate) fn box_in_place(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}
