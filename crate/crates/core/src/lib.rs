//! Online clustering with recursive stochastic-gradient k-medians.
//!
//! The crate provides
//!
//! * [`kmedians`]: the averaged stochastic-gradient k-medians recursion, its
//!   step schedule, and the data-driven variant that picks the descent
//!   constant from a preliminary k-means fit;
//! * [`kmeans`]: MacQueen's sequential k-means;
//! * [`pam`]: a PAM (BUILD + SWAP) baseline;
//! * [`metrics`]: empirical L1 risk and the pairwise classification error rate;
//! * [`datagen`]: seeded generators for the simulation benchmarks;
//! * [`bench`]: the replication harness behind the `kmedians bench` command.
//!
//! All distances use the dimension-normalized norm
//! `||z|| = sqrt(d^-1 * sum z_j^2)`.
//!
//! ```
//! use online_kmedians::datagen::{sim1_sample, Sim1Config};
//! use online_kmedians::kmedians::DataDrivenKMedians;
//!
//! let data = sim1_sample(&Sim1Config { n: 250, epsilon: 0.05, seed: 1 }).unwrap();
//! let fit = DataDrivenKMedians::new(3).with_restarts(5).with_seed(7).fit(&data).unwrap();
//! assert_eq!(fit.centers.k(), 3);
//! assert!(fit.c_gamma.unwrap() > 0.0);
//! ```

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod kmeans;
pub mod kmedians;
pub mod metrics;
pub mod model;
pub mod pam;
pub mod report;
pub mod rng;

pub use dataset::{CenterSet, Dataset};
pub use error::{Error, Result};
pub use kmeans::{kmeans_fit, KMeans, KMeansState};
pub use kmedians::{kmedians_fit, kmedians_fit_data_driven, mc_gradient, DataDrivenKMedians, GainConfig, Init, KMedians, KMediansState};
pub use model::{KMediansSnapshot, ModelFile};
pub use metrics::{cer, empirical_l1_risk, Partition};
pub use pam::{pam_fit, MedoidSet, Pam};
pub use report::{Algorithm, FitReport};
