use faer::c64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::quantile_diagonal;
use crate::ensemble::{spectrum, EnsembleDraw};
use crate::error::{Error, Result};
use crate::freeconv::{density_with, LawConfig, SolverConfig};
use crate::measures::{ring_radii, symmetrize, DiscreteMeasure, RingRadii, SymmetricMeasure};
use crate::ringlaw::{boundary_check, radial_density_with, BoundaryReport, RingDensity};
use crate::stats::{cumulative_trapezoid, mean_se};

/// Runs `f` on a pool of `threads` workers, or on the global pool for 0.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFailure {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub error: String,
}

/// What one trial contributes to the experiment tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub max_modulus: f64,
    pub min_modulus: f64,
    /// `min_i |λ_i - z|` per probe.
    pub probe_distance: Vec<f64>,
    /// `σ_min(zI - A)` per probe; empty unless requested.
    pub sigma_min: Vec<f64>,
    /// Empty unless requested.
    pub eigenvalues: Vec<c64>,
}

fn run_trial(cfg: &ExperimentConfig, t: &[f64], n: usize, trial: usize, probes: bool) -> Result<TrialRecord> {
    let seed = cfg.trial_seed(trial, n);
    let draw = EnsembleDraw::sample(t, seed)?;
    let spec = spectrum(&draw)?;
    let (mut probe_distance, mut sigma_min) = (Vec::new(), Vec::new());
    if probes {
        for p in &cfg.probes {
            probe_distance.push(spec.distance_to(p.z()));
            if cfg.log_sigma_min {
                sigma_min.push(draw.sigma_min(p.z())?);
            }
        }
    }
    Ok(TrialRecord {
        n,
        trial,
        seed,
        max_modulus: spec.max_modulus(),
        min_modulus: spec.min_modulus(),
        probe_distance,
        sigma_min,
        eigenvalues: if cfg.write_eigenvalues { spec.eigenvalues } else { Vec::new() },
    })
}

/// All `(n, trial)` runs, ordered by `n` then trial index regardless of
/// scheduling.
pub fn run_trials(cfg: &ExperimentConfig, probes: bool) -> Result<Vec<std::result::Result<TrialRecord, TrialFailure>>> {
    cfg.validate()?;
    let diagonals: Vec<Vec<f64>> = cfg.n_list.iter().map(|&n| quantile_diagonal(&cfg.theta, n)).collect();
    let jobs: Vec<(usize, usize)> = (0..cfg.n_list.len())
        .flat_map(|k| (0..cfg.trials).map(move |t| (k, t)))
        .collect();
    with_threads(cfg.threads, || {
        jobs.par_iter()
            .map(|&(k, trial)| {
                let n = cfg.n_list[k];
                run_trial(cfg, &diagonals[k], n, trial, probes).map_err(|e| TrialFailure {
                    n,
                    trial,
                    seed: cfg.trial_seed(trial, n),
                    error: e.to_string(),
                })
            })
            .collect()
    })
}

fn realized_radii(cfg: &ExperimentConfig, n: usize) -> Result<RingRadii> {
    ring_radii(&DiscreteMeasure::uniform(&quantile_diagonal(&cfg.theta, n))?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusRow {
    pub n: usize,
    pub trials_ok: usize,
    /// Radii of the realized `T_n`.
    pub a_n: f64,
    pub b_n: f64,
    pub a_n_defined: bool,
    pub max_mean: f64,
    pub max_se: f64,
    pub min_mean: f64,
    pub min_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub n: usize,
    pub z_re: f64,
    pub z_im: f64,
    pub eps: f64,
    pub hits: usize,
    pub trials: usize,
    pub fraction: f64,
    /// Mean of `σ_min(zI - A)` and of its squared logarithm.
    pub sigma_min_mean: Option<f64>,
    pub log_sigma_min_sq_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport {
    pub theta: String,
    pub a: f64,
    pub b: f64,
    pub a_defined: bool,
    pub moduli: Vec<ModulusRow>,
    pub probes: Vec<ProbeRow>,
    pub failures: Vec<TrialFailure>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

fn modulus_rows(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<Vec<ModulusRow>> {
    cfg.n_list
        .iter()
        .map(|&n| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
            let (max_mean, max_se) = mean_se(&rs.iter().map(|r| r.max_modulus).collect::<Vec<_>>());
            let (min_mean, min_se) = mean_se(&rs.iter().map(|r| r.min_modulus).collect::<Vec<_>>());
            let radii = realized_radii(cfg, n)?;
            Ok(ModulusRow {
                n,
                trials_ok: rs.len(),
                a_n: radii.a,
                b_n: radii.b,
                a_n_defined: radii.a_defined,
                max_mean,
                max_se,
                min_mean,
                min_se,
            })
        })
        .collect()
}

/// Probe hit fractions `P(A_n has an eigenvalue in B(z, ε))` and modulus
/// extremes per `n`.
pub fn run_support_experiment(cfg: &ExperimentConfig) -> Result<SupportReport> {
    let reference = cfg.theta.reference_radii()?;
    let radii: Vec<f64> = cfg.probes.iter().map(|p| p.radius(&reference)).collect::<Result<_>>()?;
    let (records, failures) = split(run_trials(cfg, true)?);
    let mut probes = Vec::new();
    for &n in &cfg.n_list {
        let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
        for (k, p) in cfg.probes.iter().enumerate() {
            let hits = rs.iter().filter(|r| r.probe_distance[k] < radii[k]).count();
            let sig: Vec<f64> = rs.iter().filter_map(|r| r.sigma_min.get(k).copied()).collect();
            let (sigma_min_mean, log_sigma_min_sq_mean) = if sig.is_empty() {
                (None, None)
            } else {
                let m = sig.len() as f64;
                (
                    Some(sig.iter().sum::<f64>() / m),
                    Some(sig.iter().map(|s| s.ln().powi(2)).sum::<f64>() / m),
                )
            };
            probes.push(ProbeRow {
                n,
                z_re: p.re,
                z_im: p.im,
                eps: radii[k],
                hits,
                trials: rs.len(),
                fraction: if rs.is_empty() { f64::NAN } else { hits as f64 / rs.len() as f64 },
                sigma_min_mean,
                log_sigma_min_sq_mean,
            });
        }
    }
    Ok(SupportReport {
        theta: cfg.theta.label(),
        a: reference.a,
        b: reference.b,
        a_defined: reference.a_defined,
        moduli: modulus_rows(cfg, &records)?,
        probes,
        failures,
        records,
    })
}

fn split(
    outcomes: Vec<std::result::Result<TrialRecord, TrialFailure>>,
) -> (Vec<TrialRecord>, Vec<TrialFailure>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => ok.push(r),
            Err(f) => bad.push(f),
        }
    }
    (ok, bad)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StickingTable {
    pub theta: String,
    pub a: f64,
    pub b: f64,
    /// False when `Θ` has an atom at 0; the `a` columns are then n/a.
    pub a_defined: bool,
    pub rows: Vec<ModulusRow>,
    pub failures: Vec<TrialFailure>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Mean extreme eigenvalue moduli per `n`, paired against `(b, a)`.
pub fn run_sticking_experiment(cfg: &ExperimentConfig) -> Result<StickingTable> {
    let reference = cfg.theta.reference_radii()?;
    let (records, failures) = split(run_trials(cfg, false)?);
    Ok(StickingTable {
        theta: cfg.theta.label(),
        a: reference.a,
        b: reference.b,
        a_defined: reference.a_defined,
        rows: modulus_rows(cfg, &records)?,
        failures,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawRow {
    pub rho: f64,
    pub n: usize,
    pub trials: usize,
    /// `sup_x |F_solver(x) - F_empirical(x)|`, both laws smoothed by the
    /// Cauchy kernel of height `smoothing`.
    pub ks: f64,
    pub smoothing: f64,
    pub mass_solver: f64,
    pub mass_empirical: f64,
    pub off_principal: usize,
    pub interpolated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawTable {
    pub theta: String,
    pub rows: Vec<LawRow>,
    pub failures: Vec<TrialFailure>,
}

/// Symmetric grid with step `smoothing/4` wide enough for both laws.
fn law_grid(reach: f64, smoothing: f64) -> Vec<f64> {
    let half = reach + 40.0 * smoothing;
    let step = smoothing / 4.0;
    let k = (half / step).ceil() as i64;
    (-k..=k).map(|j| j as f64 * step).collect()
}

/// Kolmogorov distance between the solver law `Θ̃_n ⊞ λ_|z|` and the
/// trial-averaged `ν_n^z` for each probe `z` and each `n`.
pub fn run_law_comparison(cfg: &ExperimentConfig) -> Result<LawTable> {
    cfg.validate()?;
    let eps = cfg.ks_smoothing;
    let law_cfg = LawConfig {
        solver: SolverConfig::continued(),
        tol: cfg.solver_tol,
        ..LawConfig::default()
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in &cfg.n_list {
        let t = quantile_diagonal(&cfg.theta, n);
        let theta_n = symmetrize(&DiscreteMeasure::uniform(&t)?);
        let t_max = t.iter().copied().fold(0.0, f64::max);
        for p in &cfg.probes {
            let z = p.z();
            let rho = z.norm();
            let outcomes: Vec<std::result::Result<Vec<f64>, TrialFailure>> = with_threads(cfg.threads, || {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|trial| {
                        let seed = cfg.trial_seed(trial, n);
                        EnsembleDraw::sample(&t, seed)
                            .and_then(|d| d.singular_values(z))
                            .map_err(|e| TrialFailure {
                                n,
                                trial,
                                seed,
                                error: e.to_string(),
                            })
                    })
                    .collect()
            })?;
            let mut svals = Vec::new();
            let mut ok = 0;
            for o in outcomes {
                match o {
                    Ok(s) => {
                        ok += 1;
                        svals.extend(s);
                    }
                    Err(f) => failures.push(f),
                }
            }
            if ok == 0 {
                continue;
            }
            let w = 1.0 / svals.len() as f64;
            let empirical = SymmetricMeasure::from_magnitudes(svals.iter().map(|&s| (s, w)))?;
            let grid = law_grid(rho + t_max, eps);
            let law = with_threads(cfg.threads, || density_with(&theta_n, rho, &grid, eps, &law_cfg))??;
            let emp_density: Vec<f64> = grid
                .iter()
                .map(|&x| -empirical.stieltjes_unchecked(num_complex::Complex64::new(x, eps)).im / std::f64::consts::PI)
                .collect();
            let f_solver = law.cdf();
            let f_emp = cumulative_trapezoid(&grid, &emp_density);
            let ks = f_solver
                .iter()
                .zip(&f_emp)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            rows.push(LawRow {
                rho,
                n,
                trials: ok,
                ks,
                smoothing: eps,
                mass_solver: *f_solver.last().unwrap_or(&0.0),
                mass_empirical: *f_emp.last().unwrap_or(&0.0),
                off_principal: law.off_principal,
                interpolated: law.interpolated.len(),
            });
        }
    }
    Ok(LawTable {
        theta: cfg.theta.label(),
        rows,
        failures,
    })
}

/// Radial grid used by [`run_ring_density`] when the config gives none.
pub fn default_r_grid(a: f64, b: f64) -> Vec<f64> {
    let lo = if a > 0.0 { 0.75 * a } else { 0.02 * b };
    crate::stats::linspace(lo, 1.25 * b, 161)
}

/// Ring density of the quantile discretization at the largest `n`.
pub fn run_ring_density(cfg: &ExperimentConfig) -> Result<(RingDensity, BoundaryReport)> {
    cfg.validate()?;
    let n = *cfg.n_list.last().expect("validated n_list");
    let theta = symmetrize(&DiscreteMeasure::uniform(&quantile_diagonal(&cfg.theta, n))?);
    let (a, b) = crate::ringlaw::ring_support_symmetric(&theta);
    let grid = cfg.r_grid.map(|g| g.values()).unwrap_or_else(|| default_r_grid(a, b));
    let law_cfg = LawConfig {
        tol: cfg.solver_tol,
        ..LawConfig::default()
    };
    let rd = with_threads(cfg.threads, || radial_density_with(&theta, &grid, &law_cfg))??;
    let rep = boundary_check(&rd);
    Ok((rd, rep))
}

/// One bin of [`radial_histogram`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    /// `f64::INFINITY` for the outermost bin.
    pub hi: f64,
    pub observed: f64,
    pub expected: f64,
    pub se: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramReport {
    pub samples: usize,
    pub bins: Vec<HistogramBin>,
    pub fraction_within: f64,
}

/// Compares pooled eigenvalue moduli with the limit-law mass of `bins`
/// equal annuli covering `[a, b]`. The first and last bins are extended
/// to 0 and to infinity so that finite-`n` spill-over past the edges is
/// counted with its edge bin. Standard errors are binomial at the expected
/// bin mass; a bin agrees when it is within `k_se` of them.
pub fn radial_histogram(moduli: &[f64], rd: &RingDensity, bins: usize, k_se: f64) -> HistogramReport {
    let (a, b) = (rd.a, rd.b);
    let h = (b - a) / bins as f64;
    let total = moduli.len() as f64;
    let mut out = Vec::with_capacity(bins);
    for k in 0..bins {
        let lo = if k == 0 { 0.0 } else { a + k as f64 * h };
        let hi = if k + 1 == bins { f64::INFINITY } else { a + (k + 1) as f64 * h };
        let count = moduli.iter().filter(|&&m| m > lo && m <= hi).count() as f64;
        let observed = count / total;
        let expected = rd.radial_mass(lo, hi.min(1e300));
        let se = (expected * (1.0 - expected) / total).sqrt();
        out.push(HistogramBin {
            lo,
            hi,
            observed,
            expected,
            se,
            within: (observed - expected).abs() <= k_se * se,
        });
    }
    let fraction_within = out.iter().filter(|b| b.within).count() as f64 / bins as f64;
    HistogramReport {
        samples: moduli.len(),
        bins: out,
        fraction_within,
    }
}
