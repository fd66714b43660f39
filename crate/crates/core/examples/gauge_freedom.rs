//! An unconstrained factorization `X'Y` can be reparametrized by any
//! invertible `A` without changing its products. A diagonal gauge turns two
//! nearly parallel user vectors almost orthogonal.

use nalgebra::DMatrix;
use nnm::bridge::apply_gauge;

fn angle(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (dot / (nu * nv)).clamp(-1.0, 1.0).acos()
}

fn main() -> nnm::Result<()> {
    let eps = 0.01;
    let lambda = 1000.0;
    let x = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, eps]);
    let y = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.2, 0.9]);
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0 / lambda]);
    let (x2, y2) = apply_gauge(&x, &y, &a)?;

    println!("products before:\n{}", x.transpose() * &y);
    println!("products after:\n{}", x2.transpose() * &y2);
    let cols = |m: &DMatrix<f64>, j: usize| m.column(j).iter().copied().collect::<Vec<_>>();
    println!(
        "angle between user vectors: {:.4} -> {:.4} rad (right angle {:.4})",
        angle(&cols(&x, 0), &cols(&x, 1)),
        angle(&cols(&x2, 0), &cols(&x2, 1)),
        std::f64::consts::FRAC_PI_2
    );
    Ok(())
}
