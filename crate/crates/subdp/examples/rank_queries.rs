//! Adaptive rank queries against a private sketch session.
//!
//! The session answers up to `k` queries chosen adaptively; asking for
//! more fails loudly because the noise was calibrated for exactly `k`.
//!
//! Run with: cargo run --release --example rank_queries

use subdp::exact::exact_rank;
use subdp::sketch::private_rank_session;
use subdp::{PrivacyBudget, RandomSource};

fn main() -> subdp::Result<()> {
    let mut rng = RandomSource::new(23, 0);
    let n = 100_000;
    let data: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7919).sin()).collect();

    let budget = PrivacyBudget::new(1.0)?;
    let k = 3;
    let mut session = private_rank_session(&data, 0.01, &budget, 0.1, k, &mut rng)?;
    println!("per-query mechanism: {}", serde_json::to_string(session.mechanism()).unwrap());

    // Binary search for the median, each probe placed adaptively.
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..k {
        let mid = 0.5 * (lo + hi);
        let answer = session.query(&mid)?;
        println!(
            "rank({mid:+.4}) ~ {answer:10.1}   (exact {})",
            exact_rank(&data, mid)
        );
        if answer < n as f64 / 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    match session.query(&0.0) {
        Err(e) => println!("query {} refused: {e}", k + 1),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
