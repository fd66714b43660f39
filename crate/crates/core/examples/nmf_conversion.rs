//! Turns a nonnegative factorization whose products are rating distributions
//! into a normalized model with the same predictions.

use nalgebra::DMatrix;
use nnm::bridge::{nmf_to_nnm, table_from_model, NonnegFactorization, DEFAULT_BRIDGE_TOL};

fn main() -> nnm::Result<()> {
    // two users, one item with three rating levels, inner dimension 2
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
    let b = DMatrix::from_row_slice(2, 3, &[0.25, 0.25, 0.0, 0.0, 0.0, 0.5]);
    let fact = NonnegFactorization::new(a, b, 3)?;
    println!("products A'B =\n{}", fact.products());

    let model = nmf_to_nnm(&fact, DEFAULT_BRIDGE_TOL)?;
    for (u, p) in model.users().iter().enumerate() {
        println!("user {u}: state {:?}", p.as_slice());
    }
    let table = table_from_model(&model)?;
    for u in 0..table.num_users() {
        println!("user {u} rates item 0 with {:?}", table.row(u, 0));
    }

    // rescaling the inner dimension changes A and B but not the model
    let scaled = fact.rescaled(&[4.0, 0.5])?;
    let again = nmf_to_nnm(&scaled, DEFAULT_BRIDGE_TOL)?;
    println!("same model after rescaling: {}", again == model);
    Ok(())
}
