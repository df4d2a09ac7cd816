//! Private average degree by advice-removal search.
//!
//! The estimator needs a public edge-count promise to anchor its geometric
//! search; without a useful one the regime check refuses rather than
//! return an answer dominated by noise.
//!
//! Run with: cargo run --release --example average_degree

use subdp::exact::average_degree;
use subdp::graph::{private_avg_degree, private_avg_degree_opts, AvgDegreeOptions};
use subdp::{Graph, PrivacyBudget, RandomSource};

fn main() -> subdp::Result<()> {
    let mut rng = RandomSource::new(31, 0);

    // A ring with chords: every vertex has degree 3.
    let n = 5_000u32;
    let mut edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    edges.extend((0..n / 2).map(|i| (i, i + n / 2)));
    edges.sort_unstable();
    let g = Graph::from_edges(n as usize, &edges).unwrap();

    let (rho, beta) = (0.25, 1.0 / 3.0);
    let budget = PrivacyBudget::new(1.0)?;

    // With the trivial promise of one edge the search would have to
    // protect absurdly sparse graphs, and the regime check refuses.
    match private_avg_degree(&g, rho, &budget, beta, &mut rng) {
        Err(e) => println!("default promise refused: {e}"),
        Ok(_) => unreachable!(),
    }

    // A public promise of at least n/2 edges anchors the search.
    let opts = AvgDegreeOptions {
        min_edges: n as usize / 2,
        ..AvgDegreeOptions::default()
    };
    let est = private_avg_degree_opts(&g, rho, &budget, beta, &opts, &mut rng)?;
    println!("exact average degree = {}", average_degree(&g));
    println!("private estimate     = {:.3}", est.value);
    println!("relative target      = 1 +- {rho}");
    println!("noise mechanism      = {}", serde_json::to_string(&est.mechanism).unwrap());
    Ok(())
}
