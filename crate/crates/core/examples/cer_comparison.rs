//! Classification error rate of k-means, PAM and data-driven k-medians on
//! contaminated Simulation 1 samples, with outliers left out of the pairs.
//!
//! `cargo run --release --example cer_comparison -- [epsilon] [replications]`

use online_kmedians::bench::{run_cer_experiment, ExperimentSpec};
use online_kmedians::datagen::{GeneratorConfig, Sim1Config};

fn main() -> online_kmedians::Result<()> {
    let mut args = std::env::args().skip(1);
    let epsilon: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let replications = args.next().and_then(|s| s.parse().ok()).unwrap_or(30);

    let mut spec = ExperimentSpec::preset("fig7")?;
    spec.generator = GeneratorConfig::Sim1(Sim1Config { n: 500, epsilon, seed: 0 });
    spec.replications = replications;
    spec.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    let table = run_cer_experiment(&spec)?;
    let summary = table.summary(&spec.name);
    println!("epsilon {epsilon}, {replications} replications");
    for g in &summary.groups {
        match &g.cer {
            Some(s) => println!("{:<15} median CER {:.4}  (q1 {:.4}, q3 {:.4})", g.algorithm, s.median, s.q1, s.q3),
            None => println!("{:<15} not implemented", g.algorithm),
        }
    }
    Ok(())
}
