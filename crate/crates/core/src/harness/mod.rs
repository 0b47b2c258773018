//! Configuration, deterministic experiment orchestration and persistence.
//!
//! Trial `t` at size `n` uses seed `derive_seed(base, [t, n])`; its `U` and
//! `V` use `derive_seed(seed, [0])` and `derive_seed(seed, [1])`. Each trial
//! is single-threaded and results are gathered in `(n, t)` order, so
//! reports do not depend on the thread count.

mod config;
mod experiments;
pub mod output;

pub use config::{ExperimentConfig, GridSpec, Probe, ThetaSpec};
pub use experiments::{
    default_r_grid, radial_histogram, run_law_comparison, run_ring_density, run_sticking_experiment,
    run_support_experiment, run_trials, with_threads, HistogramBin, HistogramReport, LawRow, LawTable,
    ModulusRow, ProbeRow, StickingTable, SupportReport, TrialFailure, TrialRecord,
};

/// `T_n` by quantile coupling: entry `i` is the quantile of `Θ` at
/// `(i + 1/2)/n`.
pub fn quantile_diagonal(theta: &ThetaSpec, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| theta.quantile((i as f64 + 0.5) / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{ring_radii, DiscreteMeasure};

    fn two_atom() -> ThetaSpec {
        ThetaSpec::TwoAtom {
            low: 0.5,
            high: 2.0,
            weight_low: 0.5,
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(quantile_diagonal(&two_atom(), 4), vec![0.5, 0.5, 2.0, 2.0]);
        let u = quantile_diagonal(&ThetaSpec::UniformInterval { low: 0.5, high: 2.0 }, 3);
        for (x, y) in u.iter().zip([0.75, 1.25, 1.75]) {
            assert!((x - y).abs() < 1e-15);
        }
        let t = quantile_diagonal(&two_atom(), 1000);
        let r = ring_radii(&DiscreteMeasure::uniform(&t).unwrap()).unwrap();
        // independent oracle: the two moment formulas on the exact halves
        let m2 = (0.25 + 4.0) / 2.0;
        let mm2 = (4.0 + 0.25) / 2.0;
        assert!((r.b - f64::sqrt(m2)).abs() < 1e-12);
        assert!((r.a - 1.0 / f64::sqrt(mm2)).abs() < 1e-12);
        assert!((r.a - 0.685994).abs() < 1e-6 && (r.b - 1.457738).abs() < 1e-6);
    }

    #[test]
    fn unit_circle_support_probe() {
        let mut cfg = ExperimentConfig::new(
            ThetaSpec::Custom {
                atoms: vec![(1.0, 1.0)],
            },
            vec![60],
        );
        cfg.trials = 4;
        cfg.probes = vec![Probe {
            re: 1.5,
            im: 0.0,
            eps: Some(0.2),
        }];
        let rep = run_support_experiment(&cfg).unwrap();
        assert_eq!(rep.probes[0].hits, 0);
        assert_eq!(rep.probes[0].fraction, 0.0);
        assert!((rep.moduli[0].max_mean - 1.0).abs() < 1e-8);
        assert!((rep.moduli[0].min_mean - 1.0).abs() < 1e-8);
        // A is normal, so σ_min(z - A) is the distance from z to the spectrum
        for r in &rep.records {
            assert!((r.sigma_min[0] - r.probe_distance[0]).abs() < 1e-8);
            assert!(r.sigma_min[0] >= 0.5 - 1e-8);
        }
    }

    #[test]
    fn hole_radius_not_applicable_for_zero_atom() {
        let mut cfg = ExperimentConfig::new(
            ThetaSpec::Custom {
                atoms: vec![(0.0, 0.5), (1.0, 0.5)],
            },
            vec![20],
        );
        cfg.trials = 2;
        let t = run_sticking_experiment(&cfg).unwrap();
        assert!(!t.a_defined);
        let csv = output::sticking_csv(&t);
        let row = csv.lines().nth(1).unwrap();
        assert!(row.ends_with("NA,NA"), "{row}");
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut cfg = ExperimentConfig::new(two_atom(), vec![16, 32]);
        cfg.trials = 5;
        cfg.seed = 9;
        cfg.write_eigenvalues = true;
        cfg.probes = vec![Probe {
            re: 0.3,
            im: 0.2,
            eps: None,
        }];
        cfg.threads = 1;
        let serial = run_support_experiment(&cfg).unwrap();
        cfg.threads = 4;
        let parallel = run_support_experiment(&cfg).unwrap();
        assert_eq!(output::eigenvalues_csv(&serial.records), output::eigenvalues_csv(&parallel.records));
        assert_eq!(output::support_csv(&serial), output::support_csv(&parallel));
        assert_eq!(
            output::sigma_min_csv(&serial.records, &cfg.probes),
            output::sigma_min_csv(&parallel.records, &cfg.probes)
        );
    }
}
