//! The data-driven k-medians fit: k-means restarts first, their best L1
//! risk becomes the descent constant, then k-medians restarts.

use online_kmedians::datagen::{sim2_sample, Sim2Config};
use online_kmedians::metrics::assign;
use online_kmedians::{cer, DataDrivenKMedians, Partition};

fn main() -> online_kmedians::Result<()> {
    let data = sim2_sample(&Sim2Config { n: 500, d: 50, epsilon: 0.05, scale: 1.0, seed: 3 })?;
    let (fit, kmeans) = DataDrivenKMedians::new(3).with_restarts(25).with_seed(11).fit_with_kmeans(&data)?;

    println!("k-means risk        {:.4}", kmeans.risk);
    println!("chosen c_gamma      {:.4}", fit.c_gamma.unwrap());
    println!("k-medians risk      {:.4} (restart {} of {})", fit.risk, fit.restart, fit.restarts);
    println!("update counts       {:?}, skipped {}", fit.update_counts, fit.skipped);

    let truth = Partition::from_labels(data.labels().unwrap());
    for (name, centers) in [("k-means", &kmeans.centers), ("k-medians", &fit.centers)] {
        let err = cer(&Partition::new(assign(&data, centers)?), &truth, data.outlier_flags())?;
        println!("{name:<10} CER {err:.4}");
    }
    Ok(())
}
