//! Private maximal-matching size via local exploration.
//!
//! Run with: cargo run --release --example matching_size

use subdp::exact::maximum_matching;
use subdp::graph::{matching_coverage_bound, private_matching};
use subdp::{Graph, PrivacyBudget, RandomSource};

fn main() -> subdp::Result<()> {
    let mut rng = RandomSource::new(17, 0);

    // Disjoint paths of length 3: every maximal matching has between one
    // and two edges per path, so the greedy target sits in a known band.
    let paths = 10_000u32;
    let mut edges = Vec::new();
    for i in 0..paths {
        let base = 4 * i;
        edges.extend([(base, base + 1), (base + 1, base + 2), (base + 2, base + 3)]);
    }
    let g = Graph::from_edges(4 * paths as usize, &edges).unwrap();

    let (rho, epsilon, beta) = (0.02, 1.0, 1.0 / 3.0);
    let budget = PrivacyBudget::new(epsilon)?;
    let est = private_matching(&g, rho, &budget, beta, &mut rng)?;
    let coverage = matching_coverage_bound(g.n(), rho, epsilon, beta);

    println!("n = {}, m = {}", g.n(), g.m());
    println!("maximum matching   = {}", maximum_matching(&g));
    println!("private estimate   = {:.1}", est.value);
    println!(
        "coverage           = {:.2} * rho * n = {:.1} around a maximal matching",
        coverage,
        coverage * rho * g.n() as f64
    );
    println!("noise mechanism    = {}", serde_json::to_string(&est.mechanism).unwrap());
    Ok(())
}
