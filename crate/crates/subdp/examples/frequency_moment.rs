//! Private second frequency moment of a turnstile stream.
//!
//! Run with: cargo run --release --example frequency_moment

use subdp::exact::exact_f2;
use subdp::sketch::{private_f2, StreamUpdate};
use subdp::{PrivacyBudget, RandomSource};

fn main() -> subdp::Result<()> {
    let mut rng = RandomSource::new(11, 0);
    let universe = 256u64;

    // A skewed stream with inserts and deletes; a few heavy items carry
    // most of the weight.
    let mut stream = Vec::new();
    for round in 0..5_000u64 {
        let index = (round * round) % universe;
        stream.push(StreamUpdate { index, delta: 1.0 });
        if round % 3 == 0 {
            stream.push(StreamUpdate { index: round % universe, delta: -1.0 });
        }
    }

    let exact = exact_f2(universe, &stream);
    let rho = 0.1;
    let budget = PrivacyBudget::new(1.0)?;
    let est = private_f2(&stream, universe, rho, &budget, 1.0 / 3.0, &mut rng)?;

    println!("exact F2        = {exact}");
    println!("private F2      = {:.1}", est.value);
    println!("absolute error  = {:.1}", (est.value - exact).abs());
    println!("error target    = {} (rho * universe^2)", rho * (universe * universe) as f64);
    println!("noise mechanism = {}", serde_json::to_string(&est.mechanism).unwrap());
    println!("epsilon spent   = {}", est.epsilon_spent);
    Ok(())
}
