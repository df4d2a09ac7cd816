//! Private connected-component count of a sparse random graph.
//!
//! Run with: cargo run --release --example connected_components

use subdp::exact::connected_components;
use subdp::graph::private_cc;
use subdp::{Graph, PrivacyBudget, RandomSource};

fn main() -> subdp::Result<()> {
    let mut rng = RandomSource::new(5, 0);
    let n = 2_000u32;

    // Sparse G(n, p) below the connectivity threshold, so it has many
    // components of varied sizes.
    let p = 0.5 / n as f64;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.open01() < p {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::from_edges(n as usize, &edges).unwrap();

    let rho = 0.1;
    let budget = PrivacyBudget::new(1.0)?;
    let est = private_cc(&g, rho, &budget, 1.0 / 3.0, &mut rng)?;

    println!("n = {n}, m = {}", g.m());
    println!("exact components   = {}", connected_components(&g));
    println!("private estimate   = {:.1}", est.value);
    println!("error target       = {} (rho * n)", rho * n as f64);
    println!("runs medianed      = {}", est.runs);
    println!("noise mechanism    = {}", serde_json::to_string(&est.mechanism).unwrap());
    Ok(())
}
