//! Two users, the distance between their states, and the guessing game that
//! distance controls.
//!
//! A referee flips a coin, picks one of the two users, and shows the player
//! that user's rating of some item. No item lets the player beat
//! `(1 + tvd) / 2`; the witness item reaches it.

use nnm::model::StateVector;
use nnm::similarity::{distinguishing_event, play_guess_game, tvd, user_success_bound, witness_item};

fn main() -> nnm::Result<()> {
    let p = StateVector::new(vec![0.5, 0.3, 0.2, 0.0])?;
    let q = StateVector::new(vec![0.1, 0.3, 0.2, 0.4])?;

    let d = tvd(&p, &q)?;
    println!("tvd(p, q)            = {d:.4}");
    println!("distinguishing event = {:?}", distinguishing_event(&p, &q)?);
    println!("success bound        = {:.4}", user_success_bound(&p, &q)?);

    let item = witness_item(&p, &q)?;
    let game = play_guess_game(&p, &q, &item, 200_000, 7)?;
    println!(
        "witness item: {} / {} wins, empirical {:.4} vs theoretical {:.4}",
        game.wins, game.trials, game.empirical_success, game.theoretical_bound
    );

    // an item blind to the difference: every event gives the same rating
    let flat = nnm::model::OutcomeSystem::deterministic(&[0, 0, 0, 0], 2)?;
    let game = play_guess_game(&p, &q, &flat, 200_000, 8)?;
    println!("constant item: empirical {:.4}", game.empirical_success);
    Ok(())
}
