//! Qualitative trends of the full-size sweeps that are not pinned to a
//! tolerance.

use ndsort::experiments::{run, ExperimentSpec, Metric, Scenario};

#[test]
fn kmeans_needs_more_iterations_at_higher_deviation() {
    let mut spec = ExperimentSpec::new(Scenario::KmeansRealistic);
    let report = run(&spec).unwrap();
    let at_eight: Vec<f64> = (1..=8)
        .map(|dev| report.mean(8, dev, Metric::Iterations).unwrap())
        .collect();
    assert!(at_eight.windows(2).all(|w| w[1] > w[0]), "{at_eight:?}");
    for n in 4..=12 {
        let low = report.mean(n, 1, Metric::Iterations).unwrap();
        let high = report.mean(n, 8, Metric::Iterations).unwrap();
        assert!(high > 1.5 * low, "N={n}: {low} -> {high}");
        assert!(low >= 1.0 && high <= spec.kmeans.max_iters as f64);
    }
}

#[test]
fn nd_accuracy_falls_with_deviation() {
    let mut spec = ExperimentSpec::new(Scenario::NdBaseline);
    spec.neurons = vec![4, 8, 12];
    spec.devs = vec![1, 8];
    let report = run(&spec).unwrap();
    for n in [4, 8, 12] {
        let low = report.mean(n, 1, Metric::Accuracy).unwrap();
        let high = report.mean(n, 8, Metric::Accuracy).unwrap();
        assert!(low > 0.9 && high < low - 0.1, "N={n}: {low} -> {high}");
    }
}
