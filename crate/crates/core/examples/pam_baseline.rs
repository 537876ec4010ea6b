//! PAM against averaged k-medians on the same sample: risk, medoid rows,
//! and the distance counters that separate O(kn^2) from O(kn).

use online_kmedians::datagen::{sim2_sample, Sim2Config};
use online_kmedians::pam::Pam;
use online_kmedians::{GainConfig, Init, KMedians};

fn main() -> online_kmedians::Result<()> {
    let data = sim2_sample(&Sim2Config { n: 500, d: 50, epsilon: 0.05, scale: 1.0, seed: 8 })?;

    let (medoids, pam, counters) = Pam::new(3).fit(&data)?;
    println!("PAM       risk {:.4}, medoid rows {:?}", pam.risk, medoids.indices);
    println!("          BUILD distances {}, SWAP distances {}, swaps {}", counters.build, counters.swap, counters.swaps_accepted);

    let kmedians = KMedians::new(3, GainConfig::with_defaults(1.0)?)
        .with_restarts(25)
        .with_seed(8)
        .with_init(Init::KMeans)
        .fit(&data)?;
    println!("k-medians risk {:.4}, distances {}", kmedians.risk, kmedians.distance_evals);
    Ok(())
}
