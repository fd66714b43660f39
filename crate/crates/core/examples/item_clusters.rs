//! Clusters the items of a trained model by worst-case distinguishability and
//! lists a few representatives per cluster.

use nnm::optimizer::{train, TrainConfig};
use nnm::similarity::{cluster_representatives, item_delta, kmedoids_items};
use nnm::synthetic::planted_dataset;

fn main() -> nnm::Result<()> {
    let (data, _) = planted_dataset(200, 120, 4, 5, 0.15, 11)?;
    let model = train(&data, &TrainConfig::new(4).with_seed(1))?.model;

    let e0 = model.item_outcomes(0)?;
    let e1 = model.item_outcomes(1)?;
    println!("delta(item 0, item 1) = {:.4}", item_delta(&e0, &e1)?);

    let clusters = kmedoids_items(&model, 5, 3, 100)?;
    println!("total cost {:.4} after {} rounds", clusters.total_cost, clusters.cost_history.len());
    let reps = cluster_representatives(&clusters, &data.item_popularity(), 3)?;
    for (c, items) in reps.iter().enumerate() {
        println!(
            "cluster {c}: {} items, medoid {}, representatives {items:?}",
            clusters.members(c).len(),
            clusters.medoids[c]
        );
    }
    Ok(())
}
