//! Data-driven k-medians on a large sample of daily load-curve profiles
//! (5422 curves, 1440 points each), timed against the k-means pass.

use std::time::Instant;

use online_kmedians::datagen::{profiles_sample, ProfilesConfig};
use online_kmedians::DataDrivenKMedians;

fn main() -> online_kmedians::Result<()> {
    let data = profiles_sample(&ProfilesConfig { n: 5422, d: 1440, seed: 7 })?;
    let start = Instant::now();
    let (fit, kmeans) = DataDrivenKMedians::new(5).with_restarts(10).with_seed(7).fit_with_kmeans(&data)?;
    println!("total {:.2} s", start.elapsed().as_secs_f64());
    println!("k-means   risk {:.4} in {:.2} s", kmeans.risk, kmeans.elapsed.as_secs_f64());
    println!("k-medians risk {:.4}, c_gamma {:.4}", fit.risk, fit.c_gamma.unwrap());
    println!("cluster sizes by updates {:?}", fit.update_counts);
    Ok(())
}
