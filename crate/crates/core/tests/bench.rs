use online_kmedians::bench::{quantile, run, ExperimentKind, ExperimentSpec, Stats, TimingGrid, NOT_IMPLEMENTED, TRIMMED_KMEANS};
use online_kmedians::datagen::{sim1_sample, GeneratorConfig, Sim1Config};
use online_kmedians::pam::Pam;
use online_kmedians::rng::{draw_seeds, rng_from_seed};
use online_kmedians::*;

fn kmedians_evals(n: usize, k: usize) -> u64 {
    let data = sim1_sample(&Sim1Config { n, epsilon: 0.05, seed: n as u64 }).unwrap();
    let seeds = draw_seeds(&data, k, &mut rng_from_seed(1)).unwrap();
    kmedians_fit(&data, &GainConfig::with_defaults(1.0).unwrap(), &seeds).unwrap().distance_evals
}

fn pam_build(n: usize, k: usize) -> u64 {
    let data = sim1_sample(&Sim1Config { n, epsilon: 0.05, seed: n as u64 }).unwrap();
    Pam::new(k).fit(&data).unwrap().2.build
}

#[test]
fn kmedians_counter_grows_linearly() {
    let ratio = kmedians_evals(1000, 5) as f64 / kmedians_evals(250, 5) as f64;
    assert!((ratio - 4.0).abs() <= 0.4, "{ratio}");
}

#[test]
fn pam_build_counter_grows_quadratically() {
    let ratio = pam_build(400, 5) as f64 / pam_build(100, 5) as f64;
    assert!((ratio - 16.0).abs() <= 4.0, "{ratio}");
}

#[test]
fn separable_data_gives_zero_cer() {
    let rows: Vec<Vec<f64>> = (0..60)
        .map(|i| {
            let c = (i % 3) as f64 * 100.0;
            vec![c + (i % 5) as f64 * 0.1, -c + (i % 7) as f64 * 0.1]
        })
        .collect();
    let labels: Vec<u32> = (0..60).map(|i| (i % 3) as u32 + 1).collect();
    let data = Dataset::from_rows(rows).unwrap().with_labels(labels.clone()).unwrap();
    for report in [
        kmedians_fit_data_driven(&data, 3, 5, 2).unwrap(),
        pam_fit(&data, 3).unwrap().1,
        KMeans::new(3).with_restarts(5).with_seed(2).fit(&data).unwrap(),
    ] {
        let (a, _) = metrics::assign_with_risk(&data, &report.centers).unwrap();
        let got = cer(&Partition::new(a), &Partition::from_labels(&labels), None).unwrap();
        assert_eq!(got, 0.0, "{}", report.algorithm);
    }
}

#[test]
fn quantiles_match_sorted_interpolation() {
    let v = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
    let s = Stats::of(v).unwrap();
    assert_eq!(s.count, 8);
    assert_eq!(s.min, 1.0);
    assert_eq!(s.max, 9.0);
    assert_eq!(s.median, 3.5);
    assert_eq!(s.mean, 31.0 / 8.0);
    assert_eq!(quantile(&[1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 9.0], 0.25), 1.75);
    assert!(Stats::of(std::iter::empty()).is_none());
}

#[test]
fn cer_experiment_rows_and_placeholders() {
    let mut spec = ExperimentSpec::preset("fig7").unwrap();
    spec.replications = 4;
    spec.generator = GeneratorConfig::Sim1(Sim1Config { n: 200, epsilon: 0.05, seed: 0 });
    let table = run(&spec).unwrap();
    assert_eq!(table.len(), 4 * 4);
    assert_eq!(table.failures().count(), 0);
    let placeholders: Vec<_> = table.rows.iter().filter(|r| r.is_placeholder()).collect();
    assert_eq!(placeholders.len(), 4);
    assert!(placeholders.iter().all(|r| r.algorithm == TRIMMED_KMEANS && r.status == NOT_IMPLEMENTED && r.cer.is_none()));
    for r in table.rows.iter().filter(|r| r.is_ok()) {
        let c = r.cer.unwrap();
        assert!((0.0..=1.0).contains(&c));
        assert!(r.wall_time.is_none());
    }
    for r in table.select("kmedians-auto", None) {
        assert!(r.c.unwrap() > 0.0);
    }
    let summary = table.summary(&spec.name);
    assert_eq!(summary.group("kmeans", None).unwrap().ok, 4);
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let mut spec = ExperimentSpec::preset("fig3").unwrap();
    spec.replications = 4;
    spec.c_grid = vec![1.0, 2.0];
    let a = run(&spec).unwrap();
    spec.jobs = 3;
    let b = run(&spec).unwrap();
    assert_eq!(a.rows, b.rows);
    let mut buf_a = Vec::new();
    let mut buf_b = Vec::new();
    a.to_csv_writer(&mut buf_a).unwrap();
    b.to_csv_writer(&mut buf_b).unwrap();
    assert_eq!(buf_a, buf_b);
}

#[test]
fn timing_experiment_covers_grid() {
    let mut spec = ExperimentSpec::preset("table1").unwrap();
    spec.timing = Some(TimingGrid { sizes: vec![60, 120], ks: vec![2, 3], warmup: 0, repeats: 1 });
    assert_eq!(spec.kind, ExperimentKind::Timing);
    let table = run(&spec).unwrap();
    let ok: Vec<_> = table.rows.iter().filter(|r| r.is_ok()).collect();
    assert_eq!(ok.len(), 3 * 4);
    assert!(ok.iter().all(|r| r.wall_time.is_some()));
}

#[test]
fn spec_validation() {
    let mut spec = ExperimentSpec::preset("fig4").unwrap();
    assert!(spec.validate().is_ok());
    spec.c_grid.clear();
    assert!(spec.validate().is_err());
    let mut spec = ExperimentSpec::preset("fig4").unwrap();
    spec.restarts = 0;
    assert!(spec.validate().is_err());
    let text = serde_json::to_string(&ExperimentSpec::preset("fig9").unwrap()).unwrap();
    assert_eq!(ExperimentSpec::from_json(&text).unwrap(), ExperimentSpec::preset("fig9").unwrap());
}
