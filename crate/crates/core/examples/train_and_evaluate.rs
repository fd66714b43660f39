//! Trains a 20-dimensional model on MovieLens 100K and compares top-N recall
//! with the popularity and random baselines. Falls back to a planted
//! synthetic dataset when the path does not exist.
//!
//! ```text
//! cargo run --release --example train_and_evaluate -- data/ml-100k
//! ```

use std::time::Instant;

use nnm::eval::{evaluate_topn, random_scores, split_dataset, toppop_scores, EvalConfig, EvalMode, Scorer};
use nnm::ingest::ingest;
use nnm::optimizer::{train, TrainConfig};
use nnm::rng::derive_seed;
use nnm::synthetic::planted_dataset;

fn main() -> nnm::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/ml-100k".into());
    let seed = 42;
    let ratings = if std::path::Path::new(&path).exists() {
        let (ratings, manifest) = ingest(&path, None, 5)?;
        println!("{}", manifest.source.display());
        ratings
    } else {
        println!("{path} not found, using planted synthetic data");
        planted_dataset(400, 600, 8, 5, 0.05, seed)?.0
    };
    println!(
        "{} users, {} items, {} ratings",
        ratings.num_users(),
        ratings.num_items(),
        ratings.ratings().len()
    );

    let eval = EvalConfig {
        seed: derive_seed(seed, "eval"),
        ..EvalConfig::default()
    };
    let data = split_dataset(ratings, eval.test_fraction, derive_seed(seed, "split"))?;

    let start = Instant::now();
    let out = train(&data, &TrainConfig::new(20).with_seed(derive_seed(seed, "init")).with_sweeps(10))?;
    println!(
        "trained in {:.1?}: objective {:.1} -> {:.1}",
        start.elapsed(),
        out.initial_objective,
        out.final_objective()
    );

    let toppop = toppop_scores(&data);
    let random = random_scores(derive_seed(seed, "random-baseline"));
    let scorers: [&dyn Scorer; 3] = [&out.model, &toppop, &random];
    for mode in [EvalMode::AllItems, EvalMode::LongTail] {
        let config = EvalConfig { mode, ..eval.clone() };
        for s in scorers {
            let r = evaluate_topn(s, &data, &config)?;
            println!(
                "{mode:?} {:>7}: recall@20 {:.4}  recall@5 {:.4}  ({} cases)",
                r.scorer,
                r.recall[19],
                r.recall[4],
                r.eligible_test_cases
            );
        }
    }
    Ok(())
}
