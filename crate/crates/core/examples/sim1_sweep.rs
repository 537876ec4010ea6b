//! Risk of averaged k-medians across descent constants on Simulation 1,
//! next to the one-pass k-means baseline.
//!
//! `cargo run --release --example sim1_sweep -- [replications]`

use online_kmedians::bench::{run_sweep, ExperimentSpec};
use online_kmedians::Algorithm;

fn main() -> online_kmedians::Result<()> {
    let replications = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let mut spec = ExperimentSpec::preset("fig3")?;
    spec.replications = replications;
    spec.algorithms = vec![Algorithm::KMeans, Algorithm::KMedians];
    spec.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    let summary = run_sweep(&spec)?.summary(&spec.name);
    let kmeans = summary.group("kmeans", None).and_then(|g| g.l1_risk.clone()).expect("k-means cells");
    println!("{replications} replications, n = 250, epsilon = 0.05");
    println!("k-means        mean L1 risk {:.4}", kmeans.mean);
    for &c in &spec.c_grid {
        let risk = summary.group("kmedians", Some(c)).and_then(|g| g.l1_risk.clone()).expect("k-medians cells");
        println!("k-medians c={c:<5} mean L1 risk {:.4} (q1 {:.4}, q3 {:.4})", risk.mean, risk.q1, risk.q3);
    }
    Ok(())
}
