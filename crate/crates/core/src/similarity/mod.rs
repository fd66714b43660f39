//! Similarity between users and between items, read off a trained model.
//!
//! User similarity is the total variational distance of their states: it
//! bounds how well any single rating can tell the two apart. Item similarity
//! is the worst case of the same quantity over all user states.

mod game;
mod item;
mod kmedoids;

pub use game::{
    disagreement_lower_bound, distinguishing_event, play_guess_game, tvd, user_success_bound,
    witness_item, GameResult,
};
pub use item::{item_delta, DeltaMatrix};
pub use kmedoids::{cluster_representatives, kmedoids, kmedoids_items, ItemClustering};
