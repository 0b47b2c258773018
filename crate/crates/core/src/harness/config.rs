use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{ring_radii, DiscreteMeasure, RingRadii};

/// Law `Θ` of the singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThetaSpec {
    /// `w·δ_low + (1-w)·δ_high`.
    TwoAtom {
        low: f64,
        high: f64,
        #[serde(default = "half")]
        weight_low: f64,
    },
    /// Uniform law on `[low, high]`.
    UniformInterval { low: f64, high: f64 },
    /// Explicit atoms `[[x, w], ...]`.
    Custom { atoms: Vec<(f64, f64)> },
}

fn half() -> f64 {
    0.5
}

impl ThetaSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThetaSpec::TwoAtom { low, high, weight_low } => {
                if !(low >= 0.0 && high > low && high.is_finite()) {
                    return Err(Error::Config(format!("two-atom needs 0 <= low < high, got {low}, {high}")));
                }
                if !(weight_low > 0.0 && weight_low < 1.0) {
                    return Err(Error::Config(format!("two-atom weight_low must lie in (0, 1), got {weight_low}")));
                }
            }
            ThetaSpec::UniformInterval { low, high } => {
                if !(low >= 0.0 && high > low && high.is_finite()) {
                    return Err(Error::Config(format!("uniform-interval needs 0 <= low < high, got {low}, {high}")));
                }
            }
            ThetaSpec::Custom { ref atoms } => {
                let mu = DiscreteMeasure::new(atoms.iter().copied()).map_err(|e| Error::Config(e.to_string()))?;
                if mu.min_location() < 0.0 {
                    return Err(Error::Config("custom theta must live on [0, inf)".into()));
                }
            }
        }
        Ok(())
    }

    /// Quantile function of `Θ` (left-continuous).
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            ThetaSpec::UniformInterval { low, high } => low + (high - low) * p,
            _ => self.discrete().expect("validated theta").quantile(p),
        }
    }

    fn discrete(&self) -> Option<DiscreteMeasure> {
        match *self {
            ThetaSpec::TwoAtom { low, high, weight_low } => {
                DiscreteMeasure::new([(low, weight_low), (high, 1.0 - weight_low)]).ok()
            }
            ThetaSpec::Custom { ref atoms } => DiscreteMeasure::new(atoms.iter().copied()).ok(),
            ThetaSpec::UniformInterval { .. } => None,
        }
    }

    /// Radii `(a, b)` of `Θ` itself, the `n → ∞` reference.
    pub fn reference_radii(&self) -> Result<RingRadii> {
        match *self {
            ThetaSpec::UniformInterval { low, high } => Ok(RingRadii {
                a: if low > 0.0 { (low * high).sqrt() } else { 0.0 },
                b: ((low * low + low * high + high * high) / 3.0).sqrt(),
                a_defined: low > 0.0,
            }),
            _ => ring_radii(&self.discrete().ok_or_else(|| Error::Config("invalid theta".into()))?),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ThetaSpec::TwoAtom { low, high, weight_low } => format!("two-atom({low}, {high}; {weight_low})"),
            ThetaSpec::UniformInterval { low, high } => format!("uniform[{low}, {high}]"),
            ThetaSpec::Custom { atoms } => format!("custom({} atoms)", atoms.len()),
        }
    }
}

/// A probe disc `B(z, ε)`; `ε` defaults to a tenth of the distance from
/// `|z|` to the nearer ring edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default)]
    pub eps: Option<f64>,
}

impl Probe {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn radius(&self, ring: &RingRadii) -> Result<f64> {
        if let Some(e) = self.eps {
            return Ok(e);
        }
        let r = self.z().norm();
        let d = if r < ring.a {
            ring.a - r
        } else if r > ring.b {
            r - ring.b
        } else {
            (r - ring.a).min(ring.b - r)
        };
        if !(d > 0.0) {
            return Err(Error::Config(format!(
                "probe {} sits on a ring edge; give eps explicitly",
                self.z()
            )));
        }
        Ok(0.1 * d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        crate::stats::linspace(self.lo, self.hi, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theta: ThetaSpec,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub probes: Vec<Probe>,
    /// Radial grid for `ring-density`; defaults around `[0.75a, 1.25b]`.
    #[serde(default)]
    pub r_grid: Option<GridSpec>,
    /// Real grid for `sd-solve`.
    #[serde(default)]
    pub x_grid: Option<GridSpec>,
    /// Smoothing height of both CDFs in `law-compare`.
    #[serde(default = "ks_smoothing")]
    pub ks_smoothing: f64,
    #[serde(default = "solver_tol")]
    pub solver_tol: f64,
    /// Record `σ_min(zI - A)` at every probe and trial.
    #[serde(default = "yes")]
    pub log_sigma_min: bool,
    /// Write every eigenvalue to `eigenvalues.csv`.
    #[serde(default)]
    pub write_eigenvalues: bool,
    #[serde(default = "output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; 0 picks the machine default.
    #[serde(default)]
    pub threads: usize,
}

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn ks_smoothing() -> f64 {
    1e-2
}
fn solver_tol() -> f64 {
    1e-8
}
fn output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn new(theta: ThetaSpec, n_list: Vec<usize>) -> Self {
        Self {
            theta,
            n_list,
            seed: 0,
            trials: 1,
            probes: Vec::new(),
            r_grid: None,
            x_grid: None,
            ks_smoothing: ks_smoothing(),
            solver_tol: solver_tol(),
            log_sigma_min: true,
            write_eigenvalues: false,
            output_dir: output_dir(),
            threads: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.validate()?;
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return Err(Error::Config("n_list must be non-empty with n >= 1".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_list must be strictly ascending".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        for p in &self.probes {
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(Error::Config("probe centers must be finite".into()));
            }
            if let Some(e) = p.eps {
                if !(e > 0.0) {
                    return Err(Error::Config(format!("probe eps must be > 0, got {e}")));
                }
            }
        }
        if !(self.ks_smoothing > 0.0) || !(self.solver_tol > 0.0) {
            return Err(Error::Config("ks_smoothing and solver_tol must be > 0".into()));
        }
        for g in [self.r_grid, self.x_grid].into_iter().flatten() {
            if !(g.hi > g.lo) || g.points < 2 {
                return Err(Error::Config("grids need hi > lo and at least 2 points".into()));
            }
        }
        Ok(())
    }

    /// Seed of trial `trial` at size `n`.
    pub fn trial_seed(&self, trial: usize, n: usize) -> u64 {
        crate::ensemble::derive_seed(self.seed, &[trial as u64, n as u64])
    }
}
