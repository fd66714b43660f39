use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::OutcomeSystem;

/// Worst-case distinguishability of two items over all user states:
/// half the largest L1 norm of a row of `E1 - E2` (items as `D x Z`
/// matrices).
///
/// Maximizing `||q - q'||_1` over the simplex is a convex maximization, so
/// the optimum sits at a vertex, i.e. a deterministic user.
pub fn item_delta(e1: &OutcomeSystem, e2: &OutcomeSystem) -> Result<f64> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            found: e2.dim(),
        });
    }
    if e1.levels() != e2.levels() {
        return Err(Error::DimensionMismatch {
            expected: e1.levels(),
            found: e2.levels(),
        });
    }
    let worst = (0..e1.dim())
        .map(|j| {
            (0..e1.levels())
                .map(|z| (e1.entry(j, z) - e2.entry(j, z)).abs())
                .sum::<f64>()
        })
        .fold(0.0f64, f64::max);
    Ok(0.5 * worst)
}

/// Symmetric pairwise item-delta matrix in condensed (upper triangle) form.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl DeltaMatrix {
    pub fn from_items(items: &[OutcomeSystem]) -> Result<Self> {
        let n = items.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                ((i + 1)..n)
                    .map(|j| item_delta(&items[i], &items[j]))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(DeltaMatrix {
            n,
            upper: rows.concat(),
        })
    }

    /// Builds from a full square matrix given as a closure.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                upper.push(f(i, j));
            }
        }
        DeltaMatrix { n, upper }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // offset of row a in the condensed layout
        let row = a * (2 * self.n - a - 1) / 2;
        self.upper[row + (b - a - 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LikeVector;

    #[test]
    fn identical_items_have_zero_delta() {
        let e = OutcomeSystem::new(vec![vec![0.2, 0.5], vec![0.8, 0.5]]).unwrap();
        assert_eq!(item_delta(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn opposite_like_vectors() {
        let a = LikeVector::new(vec![1.0, 0.0]).unwrap().to_outcome_system();
        let b = LikeVector::new(vec![0.0, 1.0]).unwrap().to_outcome_system();
        assert_eq!(item_delta(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = OutcomeSystem::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let b = OutcomeSystem::new(vec![vec![1.0], vec![0.0], vec![0.0]]).unwrap();
        assert!(item_delta(&a, &b).is_err());
    }

    #[test]
    fn condensed_indexing() {
        let m = DeltaMatrix::from_fn(5, |i, j| (10 * i + j) as f64);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 0.0 } else { (10 * i.min(j) + i.max(j)) as f64 };
                assert_eq!(m.get(i, j), want);
            }
        }
    }
}
