//! Spectral-radius calculus for R-diagonal perturbations.
//!
//! For R-diagonal `A` with `‖A‖₂ = s`, `‖A^p‖ ≤ (1+p)·C·s^{p-1}`. Summing
//! these bounds against `γ^p` gives the majorant
//! `F(γ) = Σ_{p≥1} γ^p (1+p) s^{p-1}`, and a perturbation `ηB` with
//! `‖B‖ ≤ c0` keeps `r(A + ηB) ≤ s + ε` as soon as
//! `C·c0·η·γ·(1 + F(γ)) < 1/2` at `γ = 1/(s + ε)`.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};

/// Power iterations per operator-norm estimate.
pub const POWER_STEPS: usize = 30;
/// Relative tolerance on the Rayleigh quotient.
pub const POWER_TOL: f64 = 1e-8;

/// `(1 + p)·C·s^{p-1}`.
pub fn power_norm_bound(p: u32, s: f64, c: f64) -> Result<f64> {
    if p == 0 || !(s > 0.0) {
        return Err(Error::Domain(format!("power_norm_bound needs p >= 1 and s > 0, got p = {p}, s = {s}")));
    }
    Ok((1.0 + p as f64) * c * s.powi(p as i32 - 1))
}

/// Closed form `γ·(1/(1-γs)² + 1/(1-γs))` of `Σ_{n≥1} γⁿ(1+n)s^{n-1}`.
pub fn f_gamma(gamma: f64, s: f64) -> Result<f64> {
    if !(gamma > 0.0) || !(s > 0.0) {
        return Err(Error::Domain(format!("f_gamma needs gamma, s > 0, got {gamma}, {s}")));
    }
    let q = gamma * s;
    if q >= 1.0 {
        return Err(Error::Divergence(q));
    }
    let r = 1.0 / (1.0 - q);
    Ok(gamma * (r * r + r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RDiagonalBoundParams {
    pub c0: f64,
    pub s: f64,
    pub eps: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub eta: f64,
}

impl RDiagonalBoundParams {
    /// `C·c0·η·γ·(1 + F)`; equals 1/4 for the output of [`eta_bound`].
    pub fn margin(&self) -> f64 {
        self.c * self.c0 * self.eta * self.gamma * (1.0 + self.f)
    }

    pub fn csv_header() -> &'static str {
        "eps,c0,s,C,eta"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.eps, self.c0, self.s, self.c, self.eta)
    }
}

/// `η = 1/(4·C·c0·γ·(1 + F(γ)))` at `γ = 1/(s + eps)`.
pub fn eta_bound(eps: f64, c0: f64, s: f64, c: f64) -> Result<RDiagonalBoundParams> {
    for (name, v) in [("eps", eps), ("c0", c0), ("s", s), ("C", c)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("eta_bound needs {name} > 0, got {v}")));
        }
    }
    let gamma = 1.0 / (s + eps);
    let f = f_gamma(gamma, s)?;
    Ok(RDiagonalBoundParams {
        c0,
        s,
        eps,
        c,
        gamma,
        f,
        eta: 1.0 / (4.0 * c * c0 * gamma * (1.0 + f)),
    })
}

/// Exact spectral norm via the SVD.
pub fn operator_norm(a: MatRef<'_, c64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let s = a
        .singular_values()
        .map_err(|e| Error::NumericFailure(format!("SVD did not converge: {e:?}")))?;
    Ok(s[0])
}

/// Spectral norm by power iteration on `A*A` from a fixed start vector.
pub fn power_norm(a: MatRef<'_, c64>) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // deterministic start with no special alignment to coordinate axes
    let mut v = Mat::<c64>::from_fn(n, 1, |j, _| {
        let t = 0.618_033_988_749_895 * (j as f64 + 1.0);
        c64::new((t * 6.283).cos() + 1.5, (t * 6.283).sin())
    });
    let mut est = 0.0;
    for _ in 0..POWER_STEPS {
        let nv = v.norm_l2();
        if nv == 0.0 {
            return 0.0;
        }
        v = v * faer::Scale(c64::new(1.0 / nv, 0.0));
        let w = a * &v;
        let next = w.norm_l2();
        let done = (next - est).abs() <= POWER_TOL * next;
        est = next;
        if done || next == 0.0 {
            break;
        }
        v = a.adjoint() * &w;
    }
    est
}

/// `min_{k ∈ [k_max/2, k_max]} ‖A^k‖^{1/k}`, norms by [`power_norm`].
///
/// Powers are carried with unit Frobenius norm and the scale is kept in
/// `log` form, so neither overflow nor underflow occurs.
pub fn spectral_radius_estimate(a: MatRef<'_, c64>, k_max: usize) -> Result<f64> {
    if k_max < 8 {
        return Err(Error::Domain(format!("spectral_radius_estimate needs k_max >= 8, got {k_max}")));
    }
    if a.nrows() != a.ncols() {
        return Err(Error::Domain("spectral radius of a non-square matrix".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let k_lo = k_max / 2;
    let mut p = Mat::<c64>::identity(n, n);
    let mut log_scale = 0.0;
    let mut best = f64::INFINITY;
    for k in 1..=k_max {
        p = &p * a;
        let fro = p.norm_l2();
        if fro == 0.0 {
            // nilpotent: every later power vanishes as well
            return Ok(0.0);
        }
        if !fro.is_finite() {
            return Err(Error::NumericFailure(format!("non-finite power at k = {k}")));
        }
        p = p * faer::Scale(c64::new(1.0 / fro, 0.0));
        log_scale += fro.ln();
        if k >= k_lo {
            let nk = power_norm(p.as_ref());
            if nk == 0.0 {
                return Ok(0.0);
            }
            best = best.min(((log_scale + nk.ln()) / k as f64).exp());
        }
    }
    Ok(best)
}

/// Both sides of the sub-additive recursion
/// `‖(A+ηB)^k‖ ≤ ‖A^k‖ + Σ_{j<k} ‖A^j‖·‖ηB‖·‖(A+ηB)^{k-1-j}‖`, exact norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Majorization {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn recursion_majorization(a: MatRef<'_, c64>, b: MatRef<'_, c64>, eta: f64, k: usize) -> Result<Majorization> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::Domain("recursion_majorization needs square matrices of equal size".into()));
    }
    let x = a + b * faer::Scale(c64::new(eta, 0.0));
    let eta_b = eta.abs() * operator_norm(b)?;
    let (mut pa, mut px) = (Mat::<c64>::identity(n, n), Mat::<c64>::identity(n, n));
    let mut norms_a = Vec::with_capacity(k + 1);
    let mut norms_x = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            pa = &pa * a;
            px = &px * &x;
        }
        norms_a.push(operator_norm(pa.as_ref())?);
        norms_x.push(operator_norm(px.as_ref())?);
    }
    let tail: f64 = (0..k).map(|j| norms_a[j] * eta_b * norms_x[k - 1 - j]).sum();
    Ok(Majorization {
        k,
        lhs: norms_x[k],
        rhs: norms_a[k] + tail,
    })
}
