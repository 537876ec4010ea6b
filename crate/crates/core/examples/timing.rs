//! Median wall time of PAM, k-medians and k-means over a grid of sample
//! sizes and cluster counts, single restart each.

use online_kmedians::bench::{run_timing, ExperimentSpec, TimingGrid};

fn main() -> online_kmedians::Result<()> {
    let mut spec = ExperimentSpec::preset("table1")?;
    spec.timing = Some(TimingGrid { sizes: vec![250, 500, 1000], ks: vec![2, 5], warmup: 1, repeats: 3 });
    let table = run_timing(&spec)?;
    println!("{:<10} {:>6} {:>3} {:>12}", "algorithm", "n", "k", "seconds");
    for row in table.rows.iter().filter(|r| r.is_ok()) {
        println!("{:<10} {:>6} {:>3} {:>12.6}", row.algorithm, row.n, row.k, row.wall_time.unwrap_or(f64::NAN));
    }
    Ok(())
}
