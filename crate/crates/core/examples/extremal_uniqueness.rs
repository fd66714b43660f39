//! When every rating outcome is certain for some user and `D = Z`, the model
//! fitting the table is unique up to relabeling the basis. This example
//! certifies a planted instance and shows a refusal.

use nnm::bridge::{certify_extremal_uniqueness, planted_extremal_instance, Certificate};
use nnm::model::{Items, NNModel, OutcomeSystem, StateVector};

fn main() -> nnm::Result<()> {
    let planted = planted_extremal_instance(3, 8, 4, 5)?;
    match certify_extremal_uniqueness(&planted.table, &planted.model, 1e-9)? {
        Certificate::Certified { permutations } => {
            println!("certified; recovered permutations {permutations:?}");
            println!("planted permutations           {:?}", planted.permutations);
        }
        Certificate::Refused { reason } => println!("refused: {reason}"),
    }

    // a smeared item: no user is certain of any outcome
    let users = (0..2).map(|j| StateVector::basis(2, j)).collect();
    let item = OutcomeSystem::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]])?;
    let model = NNModel::new(2, 2, users, Items::Categorical(vec![item]))?;
    let table = nnm::bridge::table_from_model(&model)?;
    if let Certificate::Refused { reason } = certify_extremal_uniqueness(&table, &model, 1e-9)? {
        println!("smeared item refused: {reason}");
    }
    Ok(())
}
