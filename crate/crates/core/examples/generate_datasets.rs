//! Writes the three synthetic datasets as CSV with JSON sidecars, then reads
//! one back.

use std::path::PathBuf;

use online_kmedians::datagen::{write_generated, GeneratorConfig, ProfilesConfig, Sim1Config, Sim2Config};
use online_kmedians::Dataset;

fn main() -> online_kmedians::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("kmedians-data"));
    std::fs::create_dir_all(&dir)?;
    let configs = [
        ("sim1.csv", GeneratorConfig::Sim1(Sim1Config { n: 450, epsilon: 0.05, seed: 7 })),
        ("sim2.csv", GeneratorConfig::Sim2(Sim2Config { n: 36, d: 50, epsilon: 0.0, scale: 1.0, seed: 1 })),
        ("profiles.csv", GeneratorConfig::Profiles(ProfilesConfig { n: 100, d: 1440, seed: 2 })),
    ];
    for (file, config) in &configs {
        let data = config.sample()?;
        let path = dir.join(file);
        let sidecar = write_generated(&path, config, &data)?;
        println!("{}: {} x {} -> {} (+ {})", config.name(), data.n(), data.d(), path.display(), sidecar.display());
    }
    let back = Dataset::read_csv(dir.join("sim1.csv"))?;
    let outliers = back.outlier_flags().map_or(0, |f| f.iter().filter(|&&o| o).count());
    println!("sim1 read back: {} rows, {} outliers", back.n(), outliers);
    Ok(())
}
