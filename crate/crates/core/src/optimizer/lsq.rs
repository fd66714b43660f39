//! Constrained least squares in normal-equations form.
//!
//! Each subproblem minimizes `q(x) = x'Gx - 2c'x + k` over either the
//! probability simplex or the unit box. The Gram matrix `G` is shared by
//! all subproblems of a half-sweep, so it lives in its own type together
//! with its largest eigenvalue.

use nalgebra::{DMatrix, SymmetricEigen};

use super::projection::{box_in_place, simplex_in_place};
use crate::error::{Error, Result};

const POWER_ITERS: usize = 100;
const POWER_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    Simplex,
    Box,
}

impl Constraint {
    fn project(self, x: &mut [f64]) {
        match self {
            Constraint::Simplex => simplex_in_place(x),
            Constraint::Box => box_in_place(x),
        }
    }

    fn is_feasible(self, x: &[f64], tol: f64) -> bool {
        match self {
            Constraint::Simplex => {
                x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            Constraint::Box => x.iter().all(|&v| v >= -tol && v <= 1.0 + tol),
        }
    }
}

/// Symmetric positive semidefinite `D x D` matrix, row-major.
#[derive(Clone, Debug)]
pub struct Gram {
    dim: usize,
    data: Vec<f64>,
    lambda_max: f64,
}

impl Gram {
    /// Checked constructor: symmetric within `1e-12` (relative to the largest
    /// entry) and eigenvalues no lower than `-1e-10`.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("Gram matrix"));
        }
        let scale = data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for j in 0..dim {
            for k in 0..j {
                if (data[j * dim + k] - data[k * dim + j]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!("Gram matrix not symmetric at ({j}, {k})")));
                }
            }
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(dim, dim, &data));
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if dim > 0 && min < -1e-10 {
            return Err(Error::invalid(format!("Gram matrix has negative eigenvalue {min}")));
        }
        Ok(Self::trusted(dim, data))
    }

    /// `X'X` for the rows of a row-major `n x dim` factor matrix, summed in
    /// row order.
    pub fn from_factor_rows(dim: usize, rows: &[f64]) -> Self {
        let mut data = vec![0.0; dim * dim];
        for row in rows.chunks_exact(dim) {
            for j in 0..dim {
                let rj = row[j];
                if rj == 0.0 {
                    continue;
                }
                for k in j..dim {
                    data[j * dim + k] += rj * row[k];
                }
            }
        }
        for j in 0..dim {
            for k in 0..j {
                data[j * dim + k] = data[k * dim + j];
            }
        }
        Self::trusted(dim, data)
    }

    fn trusted(dim: usize, data: Vec<f64>) -> Self {
        let lambda_max = power_iteration(dim, &data);
        Gram {
            dim,
            data,
            lambda_max,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.dim + k]
    }

    /// Largest eigenvalue estimate from power iteration.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let row = &self.data[j * self.dim..(j + 1) * self.dim];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

fn power_iteration(dim: usize, g: &[f64]) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    // fixed start with a small ramp so it is not orthogonal to the top
    // eigenvector of typical nonnegative Grams
    let mut v: Vec<f64> = (0..dim).map(|j| 1.0 + 0.01 * j as f64).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    let mut w = vec![0.0; dim];
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERS {
        for j in 0..dim {
            w[j] = g[j * dim..(j + 1) * dim].iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / norm);
        let done = (next - lambda).abs() <= POWER_TOL * next.max(1.0);
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}

/// One subproblem: `q(x) = x'Gx - 2 linear'x + constant`.
#[derive(Clone, Debug)]
pub struct GramSystem<'a> {
    pub gram: &'a Gram,
    pub linear: Vec<f64>,
    pub constant: f64,
}

impl GramSystem<'_> {
    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut gx = vec![0.0; x.len()];
        self.gram.mul_into(x, &mut gx);
        quad(x, &gx, &self.linear) + self.constant
    }
}

fn quad(x: &[f64], gx: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(gx)
        .zip(c)
        .map(|((xi, gi), ci)| xi * gi - 2.0 * ci * xi)
        .sum()
}

/// `q(xn) - q(x)` as `(xn - x)'(G xn + G x - 2c)`, free of the cancellation
/// in subtracting two objective values.
fn change(x: &[f64], gx: &[f64], xn: &[f64], gxn: &[f64], c: &[f64]) -> f64 {
    (0..x.len())
        .map(|j| (xn[j] - x[j]) * (gxn[j] + gx[j] - 2.0 * c[j]))
        .sum()
}

#[derive(Clone, Debug)]
pub struct LsSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Accelerated projected gradient for `min q(x)` over `constraint`.
///
/// Uses the fixed step `1/L` with `L = 2 lambda_max(G)`, the Lipschitz
/// constant of `grad q = 2(Gx - c)`. An accelerated step that raises the
/// objective is replaced by a plain projected-gradient step from the current
/// iterate (and momentum is reset), so the returned point never has a larger
/// objective than `x0`. Stops once the projected-gradient residual
/// `||x - P(x - grad q(x)/L)||_inf` is at most `tol * max(1, ||x||_inf)`.
pub fn solve_constrained_ls(
    system: &GramSystem<'_>,
    x0: &[f64],
    constraint: Constraint,
    tol: f64,
    max_iters: usize,
) -> Result<LsSolution> {
    let d = system.gram.dim();
    if x0.len() != d || system.linear.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if x0.len() != d { x0.len() } else { system.linear.len() },
        });
    }
    if !system.linear.iter().all(|v| v.is_finite()) || !system.constant.is_finite() {
        return Err(Error::NonFinite("least-squares system"));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("starting point"));
    }
    if !constraint.is_feasible(x0, 1e-9) {
        return Err(Error::Infeasible(format!("{x0:?} violates the {constraint:?} constraint")));
    }

    let g = system.gram;
    let c = &system.linear;
    let mut lam = g.lambda_max();
    if !(lam > 1e-14) {
        lam = 1.0;
    }

    let mut x = x0.to_vec();
    constraint.project(&mut x);
    let mut gx = vec![0.0; d];
    g.mul_into(&x, &mut gx);

    let mut y = x.clone();
    let mut gy = gx.clone();
    let mut t = 1.0f64;
    let mut z = vec![0.0; d];
    let mut xn = vec![0.0; d];
    let mut gxn = vec![0.0; d];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        // projected gradient step from x doubles as the stationarity test
        for j in 0..d {
            z[j] = x[j] - (gx[j] - c[j]) / lam;
        }
        constraint.project(&mut z);
        let residual = x.iter().zip(&z).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if residual <= tol * scale {
            converged = true;
            break;
        }
        iterations += 1;

        for j in 0..d {
            xn[j] = y[j] - (gy[j] - c[j]) / lam;
        }
        constraint.project(&mut xn);
        g.mul_into(&xn, &mut gxn);
        let mut restarted = false;
        if change(&x, &gx, &xn, &gxn, c) > 0.0 {
            xn.copy_from_slice(&z);
            g.mul_into(&xn, &mut gxn);
            restarted = true;
            if change(&x, &gx, &xn, &gxn, c) > 0.0 {
                // the eigenvalue estimate was too small
                lam *= 2.0;
                y.copy_from_slice(&x);
                gy.copy_from_slice(&gx);
                t = 1.0;
                continue;
            }
        }

        let t_next = if restarted {
            1.0
        } else {
            0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
        };
        let beta = if restarted { 0.0 } else { (t - 1.0) / t_next };
        for j in 0..d {
            y[j] = xn[j] + beta * (xn[j] - x[j]);
            gy[j] = gxn[j] + beta * (gxn[j] - gx[j]);
        }
        t = t_next;
        std::mem::swap(&mut x, &mut xn);
        std::mem::swap(&mut gx, &mut gxn);
    }

    Ok(LsSolution {
        objective: quad(&x, &gx, c) + system.constant,
        x,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn identity(d: usize) -> Gram {
        let mut data = vec![0.0; d * d];
        for j in 0..d {
            data[j * d + j] = 1.0;
        }
        Gram::new(d, data).unwrap()
    }

    #[test]
    fn unconstrained_optimum_feasible() {
        let g = identity(2);
        let sys = GramSystem { gram: &g, linear: vec![0.5, 0.5], constant: 0.0 };
        let sol = solve_constrained_ls(&sys, &[1.0, 0.0], Constraint::Simplex, 1e-10, 500).unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-9 && (sol.x[1] - 0.5).abs() < 1e-9);
        assert!(sol.converged);
    }

    #[test]
    fn box_clamps_unconstrained_optimum() {
        let g = identity(2);
        let sys = GramSystem { gram: &g, linear: vec![2.0, 0.0], constant: 0.0 };
        let sol = solve_constrained_ls(&sys, &[0.0, 0.0], Constraint::Box, 1e-10, 500).unwrap();
        assert_eq!(sol.x, vec![1.0, 0.0]);
    }

    #[test]
    fn infeasible_start_rejected() {
        let g = identity(2);
        let sys = GramSystem { gram: &g, linear: vec![0.0, 0.0], constant: 0.0 };
        assert!(matches!(
            solve_constrained_ls(&sys, &[0.7, 0.7], Constraint::Simplex, 1e-8, 10),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            solve_constrained_ls(&sys, &[1.5, 0.0], Constraint::Box, 1e-8, 10),
            Err(Error::Infeasible(_))
        ));
        let bad = GramSystem { gram: &g, linear: vec![f64::NAN, 0.0], constant: 0.0 };
        assert!(solve_constrained_ls(&bad, &[0.5, 0.5], Constraint::Simplex, 1e-8, 10).is_err());
    }

    #[test]
    fn gram_validation() {
        assert!(Gram::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(Gram::new(2, vec![1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(Gram::new(2, vec![2.0, 1.0, 1.0, 2.0]).is_ok());
        let g = Gram::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((g.lambda_max() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn gram_from_rows_matches_dense() {
        let rows = [1.0, 2.0, 0.5, 0.0, 3.0, 1.0];
        let g = Gram::from_factor_rows(2, &rows);
        assert_eq!(g.as_slice(), &[1.0 + 0.25 + 9.0, 2.0 + 0.0 + 3.0, 5.0, 4.0 + 0.0 + 1.0]);
    }

    #[test]
    fn zero_gram_linear_objective() {
        let g = Gram::new(3, vec![0.0; 9]).unwrap();
        let sys = GramSystem { gram: &g, linear: vec![0.1, 0.3, 0.2], constant: 0.0 };
        let sol = solve_constrained_ls(&sys, &[1.0 / 3.0; 3], Constraint::Simplex, 1e-12, 1000).unwrap();
        assert!((sol.x[1] - 1.0).abs() < 1e-9, "{:?}", sol.x);
    }

    #[test]
    fn never_worse_than_start_and_monotone_when_truncated() {
        let mut rng = crate::rng::seeded(3);
        for _ in 0..200 {
            let d = rng.random_range(1..6);
            let rows: Vec<f64> = (0..d * (d + 2)).map(|_| rng.random::<f64>()).collect();
            let g = Gram::from_factor_rows(d, &rows);
            let c: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
            let sys = GramSystem { gram: &g, linear: c, constant: 0.0 };
            let x0 = crate::optimizer::project_simplex(
                &(0..d).map(|_| rng.random::<f64>()).collect::<Vec<_>>(),
            )
            .unwrap()
            .into_inner();
            let q0 = sys.objective(&x0);
            let mut prev = q0;
            for iters in [1, 2, 5, 20, 200] {
                let sol = solve_constrained_ls(&sys, &x0, Constraint::Simplex, 1e-12, iters).unwrap();
                assert!(sol.objective <= q0 + 1e-12);
                assert!((sol.x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(sol.x.iter().all(|&v| v >= 0.0));
                assert!((sys.objective(&sol.x) - sol.objective).abs() < 1e-9);
                assert!(sol.objective <= prev + 1e-12);
                prev = sol.objective;
            }
        }
    }
}
