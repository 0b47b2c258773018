//! The limiting annular law of `A`.
//!
//! With `U(r) = ∫ log|x| dν^r(x)` the log-potential of the hermitized law at
//! `|z| = r`, the eigenvalue law is `(1/2π) Δ U(|z|)`, which for a radial
//! function is `(1/2πr) d/dr (r U'(r))`. `r U'(r)` is the radial
//! distribution function `μ_A(|z| ≤ r)`; it is evaluated through the
//! analytic slope `U'(r) = -2 Re G_U(i0⁺)` and differentiated once on the
//! grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freeconv::{log_potential_slope, log_potential_with, LawConfig};
use crate::measures::{ring_radii, DiscreteMeasure, SymmetricMeasure};

/// Points required inside `[0.8a, 1.2b]`.
pub const MIN_RING_POINTS: usize = 80;
/// Largest tolerated deviation of the total mass from 1.
pub const MASS_SLACK: f64 = 5e-2;

/// `(a, b)` of the ring generated by `theta`.
pub fn ring_support(theta: &DiscreteMeasure) -> Result<(f64, f64)> {
    let r = ring_radii(theta)?;
    Ok((r.a, r.b))
}

/// `(a, b)` from the symmetrization `Θ̃`; `a = 0` when `Θ̃` has an atom at 0.
pub fn ring_support_symmetric(theta: &SymmetricMeasure) -> (f64, f64) {
    let b = theta.second_moment().sqrt();
    if theta.zero_weight() > 0.0 {
        return (0.0, b);
    }
    let inv2: f64 = theta.halves().iter().map(|&(m, h)| 2.0 * h / (m * m)).sum();
    (1.0 / inv2.sqrt(), b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingDensity {
    pub radii: Vec<f64>,
    /// `U(r_j)`.
    pub potential: Vec<f64>,
    pub potential_err: Vec<f64>,
    /// Grid indices whose quadrature missed its tolerance.
    pub flagged: Vec<usize>,
    /// `r U'(r) = μ_A(|z| ≤ r)`.
    pub radial_cdf: Vec<f64>,
    /// `ρ_A(r_j)`, density with respect to area.
    pub density: Vec<f64>,
    pub a: f64,
    pub b: f64,
    /// `∫ ρ_A 2πr dr` over the interior rows of the grid.
    pub mass: f64,
}

impl RingDensity {
    /// CSV with header `r,U,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,U,density\n");
        for ((r, u), d) in self.radii.iter().zip(&self.potential).zip(&self.density) {
            out.push_str(&format!("{r},{u},{d}\n"));
        }
        out
    }

    /// Limit-law mass of the annulus `r1 < |z| ≤ r2`, interpolating the
    /// radial distribution function linearly; clamped to `[0, 1]` outside
    /// the grid.
    pub fn radial_mass(&self, r1: f64, r2: f64) -> f64 {
        self.cdf_at(r2) - self.cdf_at(r1)
    }

    fn cdf_at(&self, r: f64) -> f64 {
        let xs = &self.radii;
        if r <= xs[0] {
            return if r < self.a { 0.0 } else { self.radial_cdf[0].clamp(0.0, 1.0) };
        }
        if r >= xs[xs.len() - 1] {
            return if r > self.b { 1.0 } else { self.radial_cdf[xs.len() - 1].clamp(0.0, 1.0) };
        }
        let j = xs.partition_point(|&x| x <= r);
        let t = (r - xs[j - 1]) / (xs[j] - xs[j - 1]);
        (self.radial_cdf[j - 1] + t * (self.radial_cdf[j] - self.radial_cdf[j - 1])).clamp(0.0, 1.0)
    }
}

/// Builds [`RingDensity`] on `r_grid` with the default [`LawConfig`].
pub fn radial_density(theta_sym: &SymmetricMeasure, r_grid: &[f64]) -> Result<RingDensity> {
    radial_density_with(theta_sym, r_grid, &LawConfig::default())
}

pub fn radial_density_with(theta_sym: &SymmetricMeasure, r_grid: &[f64], cfg: &LawConfig) -> Result<RingDensity> {
    let (a, b) = ring_support_symmetric(theta_sym);
    validate_grid(r_grid, a, b)?;

    let solve = |&r: &f64| -> Result<(f64, f64, bool, f64)> {
        let lp = log_potential_with(theta_sym, r, cfg)?;
        let slope = log_potential_slope(theta_sym, r, cfg.eps_log, &cfg.solver)?;
        Ok((lp.value, lp.err_estimate, lp.flagged, slope))
    };
    let rows: Vec<Result<_>> = if cfg.parallel {
        r_grid.par_iter().map(solve).collect()
    } else {
        r_grid.iter().map(solve).collect()
    };
    let mut potential = Vec::with_capacity(r_grid.len());
    let mut potential_err = Vec::with_capacity(r_grid.len());
    let mut flagged = Vec::new();
    let mut radial_cdf = Vec::with_capacity(r_grid.len());
    for (j, row) in rows.into_iter().enumerate() {
        let (u, e, f, slope) = row?;
        potential.push(u);
        potential_err.push(e);
        if f {
            flagged.push(j);
        }
        radial_cdf.push(r_grid[j] * slope);
    }

    let dcdf = derivative(r_grid, &radial_cdf);
    let density: Vec<f64> = dcdf
        .iter()
        .zip(r_grid)
        .map(|(d, r)| d / (2.0 * std::f64::consts::PI * r))
        .collect();
    // interior rows only: the end rows carry one-sided stencils
    let last = r_grid.len() - 1;
    let mass = crate::stats::trapezoid(&r_grid[1..last], &dcdf[1..last]);
    if (mass - 1.0).abs() > MASS_SLACK {
        return Err(Error::Resolution(format!(
            "ring mass {mass:.4} deviates from 1 by more than {MASS_SLACK}"
        )));
    }
    Ok(RingDensity {
        radii: r_grid.to_vec(),
        potential,
        potential_err,
        flagged,
        radial_cdf,
        density,
        a,
        b,
        mass,
    })
}

fn validate_grid(r: &[f64], a: f64, b: f64) -> Result<()> {
    if r.len() < 3 || r.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("radial grid needs at least 3 positive finite radii".into()));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("radial grid must be strictly ascending".into()));
    }
    let (lo, hi) = (0.8 * a, 1.2 * b);
    if r[0] > lo || r[r.len() - 1] < hi {
        return Err(Error::Resolution(format!(
            "radial grid [{}, {}] does not cover [{lo}, {hi}]",
            r[0],
            r[r.len() - 1]
        )));
    }
    let inside = r.iter().filter(|&&x| x >= lo && x <= hi).count();
    if inside < MIN_RING_POINTS {
        return Err(Error::Resolution(format!(
            "{inside} radii in [{lo}, {hi}], need {MIN_RING_POINTS}"
        )));
    }
    Ok(())
}

/// Second-order finite differences on a possibly non-uniform grid:
/// three-point central in the interior, one-sided at the ends.
fn derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        let (h0, h1) = (x[j] - x[j - 1], x[j + 1] - x[j]);
        d[j] = (-h1 / (h0 * (h0 + h1))) * y[j - 1] + ((h1 - h0) / (h0 * h1)) * y[j]
            + (h0 / (h1 * (h0 + h1))) * y[j + 1];
    }
    d[0] = (y[1] - y[0]) / (x[1] - x[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    d
}

/// One-sided edge limits of the density against `1/(πa²)` and `1/(πb²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    /// False for a degenerate ring `a = b`; the limits are then absent.
    pub applicable: bool,
    pub a: f64,
    pub b: f64,
    pub limit_a: Option<f64>,
    pub limit_b: Option<f64>,
    pub expected_a: Option<f64>,
    pub expected_b: Option<f64>,
    pub dev_a: Option<f64>,
    pub dev_b: Option<f64>,
    pub mass: f64,
}

impl BoundaryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Extrapolates `ρ_A` to `a⁺` and `b⁻` by a least-squares line through the
/// three grid points nearest each edge whose difference stencils lie inside
/// `(a, b)`.
pub fn boundary_check(rd: &RingDensity) -> BoundaryReport {
    let (a, b) = (rd.a, rd.b);
    let mut rep = BoundaryReport {
        applicable: false,
        a,
        b,
        limit_a: None,
        limit_b: None,
        expected_a: None,
        expected_b: None,
        dev_a: None,
        dev_b: None,
        mass: rd.mass,
    };
    if !(b - a > 1e-12 * b) {
        return rep;
    }
    rep.applicable = true;
    let r = &rd.radii;
    let n = r.len();
    let inner: Vec<usize> = (1..n - 1).filter(|&j| r[j - 1] > a && r[j + 1] < b).collect();
    if inner.len() < 3 {
        return rep;
    }
    let fit = |idx: &[usize], at: f64| -> f64 {
        let xs: Vec<f64> = idx.iter().map(|&j| r[j]).collect();
        let ys: Vec<f64> = idx.iter().map(|&j| rd.density[j]).collect();
        let mx = xs.iter().sum::<f64>() / 3.0;
        let my = ys.iter().sum::<f64>() / 3.0;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        my + sxy / sxx * (at - mx)
    };
    if a > 0.0 {
        let limit = fit(&inner[..3], a);
        let expected = 1.0 / (std::f64::consts::PI * a * a);
        rep.limit_a = Some(limit);
        rep.expected_a = Some(expected);
        rep.dev_a = Some((limit - expected).abs() / expected);
    }
    let limit = fit(&inner[inner.len() - 3..], b);
    let expected = 1.0 / (std::f64::consts::PI * b * b);
    rep.limit_b = Some(limit);
    rep.expected_b = Some(expected);
    rep.dev_b = Some((limit - expected).abs() / expected);
    rep
}
