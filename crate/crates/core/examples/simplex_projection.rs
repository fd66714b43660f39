//! Euclidean projections onto the two constraint sets the optimizer uses:
//! the probability simplex for user states and the unit box for like
//! vectors.

use nnm::optimizer::{project_box, project_simplex};

fn main() -> nnm::Result<()> {
    for x in [vec![0.2, 0.3, 0.5], vec![1.0, 1.0, -3.0], vec![2.0, -1.0, 0.5], vec![-1.0, -1.0, -1.0]] {
        let p = project_simplex(&x)?;
        println!("simplex({x:?}) = {:?}", p.as_slice());
    }
    let b = project_box(&[-0.5, 0.25, 1.5])?;
    println!("box([-0.5, 0.25, 1.5]) = {:?}", b.as_slice());
    Ok(())
}
