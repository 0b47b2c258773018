//! The limiting Schwinger–Dyson system for `ν^ρ = Θ̃ ⊞ λ_ρ`.
//!
//! For `Im z1 > 0` the unknowns are the Stieltjes transform `G(z1)` of
//! `ν^ρ`, the off-diagonal transform `G_U(z1)` and the subordination point
//! `ψ(z1)`, tied together by
//!
//! ```text
//! G_U = (-1 + sqrt(1 + 4ρ²G²)) / (4ρ)
//! ψ   = z1 - ρ²G / (1 + 2ρ G_U)
//! G   = G_Θ̃(ψ)
//! ```
//!
//! Eliminating `G_U` gives a scalar equation in `ψ` alone,
//! `ψ = z1 - ρ² / (z1 + 1/G_Θ̃(ψ) - ψ)`, in which the square root is
//! carried implicitly as `sqrt(1 + 4ρ²G²) = 1 + 2G(z1 - ψ)`. The solver
//! follows that root by continuation from `z1 + iH` down to the target,
//! which is the analytic choice of branch. Whether it agrees with the
//! principal branch is certified at every step by `Re(1 + 4ρ²G²) > 0`
//! together with `Re s > 0` for the continued root `s`; under [`BranchPolicy::Principal`] a violation aborts the solve.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::SymmetricMeasure;

/// What to do when `Re(1 + 4ρ²G²) <= 0` is met on the continuation path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchPolicy {
    /// Abort with [`Error::Branch`] carrying the last certified state.
    Principal,
    /// Keep following the analytically continued root; `branch_ok` is
    /// reported false.
    Continue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Imaginary part at which continuation starts.
    pub start_height: f64,
    /// Geometric ratio between successive continuation heights.
    pub descent_ratio: f64,
    /// Initial weight of the damped fixed-point fallback.
    pub damping: f64,
    /// Iteration cap per continuation level.
    pub max_iter: usize,
    /// Maximum number of times a failed continuation step is halved.
    pub max_refinements: usize,
    pub branch: BranchPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            start_height: 16.0,
            descent_ratio: 0.7,
            damping: 0.5,
            max_iter: 200,
            max_refinements: 12,
            branch: BranchPolicy::Principal,
        }
    }
}

impl SolverConfig {
    pub fn continued() -> Self {
        Self {
            branch: BranchPolicy::Continue,
            ..Self::default()
        }
    }
}

/// One solved point of the Schwinger–Dyson system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SDState {
    pub z1: Complex64,
    pub rho: f64,
    pub g: Complex64,
    pub g_u: Complex64,
    pub psi: Complex64,
    /// The principal-branch certificate held at every continuation step.
    pub branch_ok: bool,
    /// Smallest `min(Re(1 + 4ρ²G²), Re s)` seen along the path.
    pub certificate: f64,
    /// Larger of the relative defects of `G = G_Θ̃(ψ)` and
    /// `s² = 1 + 4ρ²G²`, with `s = 1 + 4ρG_U` and `ψ` recomputed from `G`.
    pub residual: f64,
    /// Number of continuation levels solved.
    pub levels: usize,
}

/// `min(Re(1 + 4ρ²G²), Re s)` for the continued root `s`. Positive iff the
/// discriminant has positive real part and `s` is its principal root.
fn branch_certificate(rho: f64, g: Complex64, s: Complex64) -> f64 {
    (1.0 + 4.0 * rho * rho * g * g).re.min(s.re)
}

/// Solves the system at `z1` with the default configuration
/// ([`BranchPolicy::Principal`]).
pub fn solve_sd(theta: &SymmetricMeasure, rho: f64, z1: Complex64, tol: f64) -> Result<SDState> {
    solve_sd_with(theta, rho, z1, tol, &SolverConfig::default())
}

pub fn solve_sd_with(
    theta: &SymmetricMeasure,
    rho: f64,
    z1: Complex64,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<SDState> {
    if !(z1.im > 0.0) || !z1.re.is_finite() || !z1.im.is_finite() {
        return Err(Error::Domain(format!("solve_sd needs Im z1 > 0, got {z1}")));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("solve_sd needs rho >= 0, got {rho}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("solve_sd needs tol > 0, got {tol}")));
    }
    if rho == 0.0 {
        let g = theta.stieltjes_unchecked(z1);
        return Ok(SDState {
            z1,
            rho,
            g,
            g_u: Complex64::new(0.0, 0.0),
            psi: z1,
            branch_ok: true,
            certificate: 1.0,
            residual: 0.0,
            levels: 1,
        });
    }
    let heights = continuation_heights(z1.im, cfg);
    Solver {
        theta,
        rho,
        tol,
        cfg,
    }
    .run(z1, &heights)
}

fn continuation_heights(target: f64, cfg: &SolverConfig) -> Vec<f64> {
    let mut hs = Vec::new();
    let mut h = cfg.start_height;
    while h > target {
        hs.push(h);
        h *= cfg.descent_ratio;
    }
    hs.push(target);
    hs
}

fn branch_error(at: Complex64, certificate: f64, last: Option<SDState>) -> Error {
    Error::Branch {
        at,
        certificate,
        last_good: Box::new(last.unwrap_or(SDState {
            z1: at,
            rho: f64::NAN,
            g: Complex64::new(f64::NAN, f64::NAN),
            g_u: Complex64::new(f64::NAN, f64::NAN),
            psi: Complex64::new(f64::NAN, f64::NAN),
            branch_ok: false,
            certificate,
            residual: f64::NAN,
            levels: 0,
        })),
    }
}

struct Solver<'a> {
    theta: &'a SymmetricMeasure,
    rho: f64,
    tol: f64,
    cfg: &'a SolverConfig,
}

/// Residual of the subordination equation and the quantities it needs.
struct Eval {
    f: Complex64,
    dw2: Complex64,
    w2: Complex64,
}

impl Solver<'_> {
    fn eval(&self, z: Complex64, psi: Complex64) -> Option<Eval> {
        let [g, dg, k, dk] = self.theta.transform_terms(psi);
        // w2 = z + 1/G - ψ = z + K/G
        let w2 = z + k / g;
        if !(w2.im > 0.0) || !w2.re.is_finite() || !w2.im.is_finite() {
            return None;
        }
        Some(Eval {
            f: psi - z + self.rho * self.rho / w2,
            dw2: (dk * g - k * dg) / (g * g),
            w2,
        })
    }

    fn admissible(z: Complex64, psi: Complex64) -> bool {
        psi.im >= z.im * (1.0 - 1e-12) && psi.re.is_finite() && psi.im.is_finite()
    }

    /// Newton on `ψ` with backtracking; damped fixed-point steps of
    /// `ψ ↦ z - ρ²/(z + 1/G_Θ̃(ψ) - ψ)` when Newton stalls.
    fn solve_level(&self, z: Complex64, start: Complex64) -> Option<Complex64> {
        let rho2 = self.rho * self.rho;
        let mut psi = start;
        if !Self::admissible(z, psi) {
            psi = Complex64::new(psi.re, z.im.max(psi.im));
        }
        let mut cur = self.eval(z, psi)?;
        let mut omega = self.cfg.damping;
        let stop = 1e-14 * (1.0 + psi.norm());
        for _ in 0..self.cfg.max_iter {
            if cur.f.norm() <= stop {
                return Some(psi);
            }
            let df = 1.0 - rho2 * cur.dw2 / (cur.w2 * cur.w2);
            let step = cur.f / df;
            if step.norm() <= 1e-14 * (1.0 + psi.norm()) {
                return Some(psi - step);
            }
            let mut lam = 1.0;
            let mut accepted = None;
            if step.re.is_finite() && step.im.is_finite() {
                while lam >= 1.0 / 64.0 {
                    let cand = psi - lam * step;
                    if Self::admissible(z, cand) {
                        if let Some(e) = self.eval(z, cand) {
                            if e.f.norm() < (1.0 - 1e-4 * lam) * cur.f.norm() {
                                accepted = Some((cand, e));
                                break;
                            }
                        }
                    }
                    lam *= 0.5;
                }
            }
            let (next, e) = match accepted {
                Some(x) => x,
                None => {
                    // damped fixed point, halving the weight while it fails to descend
                    let image = z - rho2 / cur.w2;
                    let mut found = None;
                    while omega > 1e-6 {
                        let cand = (1.0 - omega) * psi + omega * image;
                        if let Some(e) = self.eval(z, cand) {
                            if Self::admissible(z, cand) && e.f.norm() < cur.f.norm() {
                                found = Some((cand, e));
                                break;
                            }
                        }
                        omega *= 0.5;
                    }
                    match found {
                        Some(x) => x,
                        // no descent left: accept if Newton's correction is at rounding level
                        None => return (step.norm() <= 1e-9 * (1.0 + psi.norm())).then_some(psi),
                    }
                }
            };
            if (next - psi).norm() <= 1e-16 * (1.0 + psi.norm()) {
                psi = next;
                cur = e;
                return (cur.f.norm() <= 1e-10 * (1.0 + psi.norm())).then_some(psi);
            }
            psi = next;
            cur = e;
        }
        (cur.f.norm() <= 1e-12 * (1.0 + psi.norm())).then_some(psi)
    }

    fn state(&self, z: Complex64, psi: Complex64) -> SDState {
        let rho = self.rho;
        let g = self.theta.stieltjes_unchecked(psi);
        // continued square root s = sqrt(1 + 4ρ²G²)
        let s = 1.0 + 2.0 * g * (z - psi);
        let g_u = (s - 1.0) / (4.0 * rho);
        let psi_formula = z - rho * rho * g / (1.0 + 2.0 * rho * g_u);
        let disc = 1.0 + 4.0 * rho * rho * g * g;
        let residual = ((g - self.theta.stieltjes_unchecked(psi_formula)).norm() / (1.0 + g.norm()))
            .max((s * s - disc).norm() / (1.0 + disc.norm()));
        let certificate = branch_certificate(rho, g, s);
        SDState {
            z1: z,
            rho,
            g,
            g_u,
            psi,
            branch_ok: certificate > 0.0,
            certificate,
            residual,
            levels: 1,
        }
    }

    fn run(&self, z1: Complex64, heights: &[f64]) -> Result<SDState> {
        let rho2 = self.rho * self.rho;
        let first = Complex64::new(z1.re, heights[0]);
        // large |z1|: G ≈ 1/z1, so ψ ≈ z1 - ρ²/z1
        let mut psi = first - rho2 / first;
        let mut prev_h: Option<f64> = None;
        let mut last: Option<SDState> = None;
        let mut min_cert = f64::INFINITY;
        let mut levels = 0;
        for &h in heights {
            let mut queue = vec![h];
            let mut refinements = 0;
            while let Some(target_h) = queue.pop() {
                let z = Complex64::new(z1.re, target_h);
                match self.solve_level(z, psi) {
                    Some(p) => {
                        psi = p;
                        levels += 1;
                        let mut st = self.state(z, psi);
                        if st.certificate <= 0.0 && self.cfg.branch == BranchPolicy::Principal {
                            return Err(branch_error(z, st.certificate, last));
                        }
                        min_cert = min_cert.min(st.certificate);
                        st.certificate = min_cert;
                        st.branch_ok = min_cert > 0.0;
                        st.levels = levels;
                        last = Some(st);
                        prev_h = Some(target_h);
                    }
                    None => {
                        refinements += 1;
                        let from = prev_h.unwrap_or(self.cfg.start_height.max(target_h) * 2.0);
                        if refinements > self.cfg.max_refinements {
                            let residual = self
                                .eval(z, psi)
                                .map(|e| e.f.norm())
                                .unwrap_or(f64::INFINITY);
                            return Err(Error::Convergence { at: z, residual });
                        }
                        queue.push(target_h);
                        queue.push((from * target_h).sqrt());
                    }
                }
            }
        }
        let mut st = last.expect("at least one level");
        if !(st.residual <= self.tol) {
            return Err(Error::Convergence {
                at: z1,
                residual: st.residual,
            });
        }
        st.z1 = z1;
        Ok(st)
    }
}

/// Configuration shared by the Stieltjes-inversion routines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawConfig {
    pub solver: SolverConfig,
    pub tol: f64,
    /// Distance from the real axis used by [`gap_probe`].
    pub eps_probe: f64,
    /// Density level separating support from gaps.
    pub gap_threshold: f64,
    /// Number of probe points across `[-halfwidth, halfwidth]`.
    pub probe_points: usize,
    /// Distance from the real axis used by [`log_potential`].
    pub eps_log: f64,
    /// Absolute accuracy target of the log-potential quadrature.
    pub log_abs_tol: f64,
    pub parallel: bool,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::continued(),
            tol: 1e-8,
            eps_probe: 1e-4,
            gap_threshold: 1e-2,
            probe_points: 201,
            eps_log: 1e-5,
            log_abs_tol: 2e-5,
            parallel: true,
        }
    }
}

/// Sampled density of `ν^ρ` with its detected support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitLaw {
    pub rho: f64,
    pub eps: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Maximal runs of grid points with density above the gap threshold.
    pub components: Vec<(f64, f64)>,
    /// Grid indices whose solve failed and were filled by interpolation.
    pub interpolated: Vec<usize>,
    /// Number of grid points solved off the principal branch.
    pub off_principal: usize,
}

impl LimitLaw {
    pub fn mass(&self) -> f64 {
        crate::stats::trapezoid(&self.grid, &self.density)
    }

    pub fn second_moment(&self) -> f64 {
        let f: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(x, p)| x * x * p)
            .collect();
        crate::stats::trapezoid(&self.grid, &f)
    }

    /// Distribution function by cumulative trapezoid on the grid.
    pub fn cdf(&self) -> Vec<f64> {
        crate::stats::cumulative_trapezoid(&self.grid, &self.density)
    }

    /// CSV with header `x,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,density\n");
        for (x, p) in self.grid.iter().zip(&self.density) {
            out.push_str(&format!("{x},{p}\n"));
        }
        out
    }
}

fn map_points<T: Send>(parallel: bool, xs: &[f64], f: impl Fn(f64) -> T + Sync + Send) -> Vec<T> {
    if parallel {
        xs.par_iter().map(|&x| f(x)).collect()
    } else {
        xs.iter().map(|&x| f(x)).collect()
    }
}

/// Stieltjes inversion `-Im G(x + iε)/π` on a grid symmetric about 0.
pub fn density(theta: &SymmetricMeasure, rho: f64, grid: &[f64], eps: f64) -> Result<LimitLaw> {
    density_with(theta, rho, grid, eps, &LawConfig::default())
}

pub fn density_with(
    theta: &SymmetricMeasure,
    rho: f64,
    grid: &[f64],
    eps: f64,
    cfg: &LawConfig,
) -> Result<LimitLaw> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("density needs eps > 0, got {eps}")));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("density grid must be strictly ascending".into()));
    }
    let scale = grid[grid.len() - 1].abs().max(grid[0].abs());
    let n = grid.len();
    if (0..n).any(|j| (grid[j] + grid[n - 1 - j]).abs() > 1e-9 * scale.max(1.0)) {
        return Err(Error::Domain("density grid must be symmetric about 0".into()));
    }
    let solved = map_points(cfg.parallel, grid, |x| {
        solve_sd_with(theta, rho, Complex64::new(x, eps), cfg.tol, &cfg.solver)
    });
    let mut density = vec![0.0; n];
    let mut failed = Vec::new();
    let mut first_err = None;
    let mut off_principal = 0;
    for (j, r) in solved.into_iter().enumerate() {
        match r {
            Ok(st) => {
                density[j] = (-st.g.im / std::f64::consts::PI).max(0.0);
                if !st.branch_ok {
                    off_principal += 1;
                }
            }
            Err(e) => {
                failed.push(j);
                first_err.get_or_insert(e);
            }
        }
    }
    for &j in &failed {
        let isolated = j > 0
            && j + 1 < n
            && !failed.contains(&(j - 1))
            && !failed.contains(&(j + 1));
        if !isolated {
            return Err(first_err.expect("a failure was recorded"));
        }
        let t = (grid[j] - grid[j - 1]) / (grid[j + 1] - grid[j - 1]);
        density[j] = (1.0 - t) * density[j - 1] + t * density[j + 1];
    }
    let components = support_components(grid, &density, cfg.gap_threshold);
    Ok(LimitLaw {
        rho,
        eps,
        grid: grid.to_vec(),
        density,
        components,
        interpolated: failed,
        off_principal,
    })
}

fn support_components(grid: &[f64], density: &[f64], threshold: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for j in 0..grid.len() {
        match (density[j] > threshold, start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                out.push((grid[s], grid[j - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((grid[s], grid[grid.len() - 1]));
    }
    out
}

/// True iff the density of `ν^ρ` stays below the gap threshold on
/// `[-halfwidth, halfwidth]`.
pub fn gap_probe(theta: &SymmetricMeasure, rho: f64, halfwidth: f64) -> Result<bool> {
    gap_probe_with(theta, rho, halfwidth, &LawConfig::default())
}

pub fn gap_probe_with(
    theta: &SymmetricMeasure,
    rho: f64,
    halfwidth: f64,
    cfg: &LawConfig,
) -> Result<bool> {
    if !(halfwidth > 0.0) {
        return Err(Error::Domain(format!("gap_probe needs halfwidth > 0, got {halfwidth}")));
    }
    let pts = cfg.probe_points.max(3) | 1;
    let grid = crate::stats::linspace(-halfwidth, halfwidth, pts);
    let law = density_with(theta, rho, &grid, cfg.eps_probe, cfg)?;
    Ok(law.density.iter().all(|&p| p < cfg.gap_threshold))
}

/// `U(ρ) = ∫ log|x| dν^ρ(x)` with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogPotential {
    pub rho: f64,
    pub value: f64,
    pub err_estimate: f64,
    /// Set when the quadrature could not meet its tolerance.
    pub flagged: bool,
}

/// `∫ log|x| dν^ρ` by adaptive Gauss–Kronrod quadrature of the inverted
/// density on `[0, R]`, `R` past the norm bound `ρ + max|x|` of the
/// support. `Θ̃ = δ_0` and `ρ = 0` use their closed forms.
pub fn log_potential(theta: &SymmetricMeasure, rho: f64) -> Result<LogPotential> {
    log_potential_with(theta, rho, &LawConfig::default())
}

pub fn log_potential_with(theta: &SymmetricMeasure, rho: f64, cfg: &LawConfig) -> Result<LogPotential> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("log_potential needs rho >= 0, got {rho}")));
    }
    if rho == 0.0 || theta.is_zero_dirac() {
        let value = if rho == 0.0 {
            if theta.zero_weight() > 0.0 {
                f64::NEG_INFINITY
            } else {
                theta.halves().iter().map(|&(m, h)| 2.0 * h * m.ln()).sum()
            }
        } else {
            rho.ln()
        };
        return Ok(LogPotential {
            rho,
            value,
            err_estimate: 0.0,
            flagged: false,
        });
    }
    let eps = cfg.eps_log;
    let reach = rho + theta.max_abs();
    let upper = reach * 1.05 + 50.0 * eps;
    let mut breaks = vec![0.0, rho, upper];
    if theta.halves().len() <= 16 {
        for &(m, _) in theta.halves() {
            breaks.push((rho - m).abs());
            breaks.push(rho + m);
        }
    }
    breaks.retain(|&b| (0.0..=upper).contains(&b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut first_err: Option<Error> = None;
    let mut integrand = |x: f64| -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match solve_sd_with(theta, rho, Complex64::new(x, eps), cfg.tol, &cfg.solver) {
            Ok(st) => x.ln() * (-st.g.im / std::f64::consts::PI).max(0.0),
            Err(e) => {
                first_err.get_or_insert(e);
                0.0
            }
        }
    };
    let mut value = 0.0;
    let mut err = 0.0;
    let mut flagged = false;
    let per_piece = cfg.log_abs_tol / (2.0 * (breaks.len() - 1) as f64);
    for w in breaks.windows(2) {
        let q = crate::quadrature::adaptive_gk15(&mut integrand, w[0], w[1], per_piece, 400);
        value += q.value;
        err += q.error;
        flagged |= !q.converged;
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    // Poisson tails beyond R carry mass ≈ 2ε/(πR) at log-level ≈ log R.
    let tail = 2.0 * eps / (std::f64::consts::PI * upper);
    value = 2.0 * value;
    err = 2.0 * err + tail * upper.ln().abs();
    Ok(LogPotential {
        rho,
        value,
        err_estimate: if flagged { err.max(10.0 * cfg.log_abs_tol) } else { err },
        flagged,
    })
}

/// `dU/dρ = -2 Re G_U(i0⁺)`, the radial derivative of the log-potential.
///
/// `U(ρ) = (1/n) log|det(ρW + T)|` differentiates to
/// `Re (1/n) tr((ρW + T)⁻¹ W)`, which is `-2 G_U` evaluated at `z1 = 0`;
/// the limit is taken at `z1 = iε`.
pub fn log_potential_slope(theta: &SymmetricMeasure, rho: f64, eps: f64, cfg: &SolverConfig) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("log_potential_slope needs rho > 0, got {rho}")));
    }
    let st = solve_sd_with(theta, rho, Complex64::new(0.0, eps), 1e-8, cfg)?;
    Ok(-2.0 * st.g_u.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{symmetrize, DiscreteMeasure};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sym_dirac(x: f64) -> SymmetricMeasure {
        symmetrize(&DiscreteMeasure::dirac(x).unwrap())
    }

    #[test]
    fn identity_measure_gives_bernoulli() {
        let st = solve_sd(&sym_dirac(0.0), 1.0, c(0.0, 2.0), 1e-10).unwrap();
        assert!((st.g - c(0.0, -0.4)).norm() < 1e-15);
        // the closed form satisfies the system written with G_U
        assert!((st.psi - (st.z1 - st.g / (1.0 + 2.0 * st.g_u))).norm() < 1e-14);
        assert!((1.0 / st.psi - st.g).norm() < 1e-14);
    }

    #[test]
    fn zero_radius_reduces_to_stieltjes() {
        let st = solve_sd(&sym_dirac(1.0), 0.0, c(2.0, 1e-12), 1e-10).unwrap();
        assert!((st.g.re - 2.0 / 3.0).abs() < 1e-10);
        assert_eq!(st.g_u, c(0.0, 0.0));
    }

    #[test]
    fn arcsine_outside_support() {
        let st = solve_sd(&sym_dirac(1.0), 1.0, c(3.0, 1e-6), 1e-10).unwrap();
        assert!((st.g.re - 1.0 / 5f64.sqrt()).abs() < 1e-6, "{:?}", st.g);
        assert!(st.g.im.abs() <= 1e-3);
        assert!(st.branch_ok);
    }

    #[test]
    fn solver_matches_sd_formulas() {
        let theta = symmetrize(&DiscreteMeasure::new([(0.5, 0.3), (1.2, 0.3), (2.0, 0.4)]).unwrap());
        let cfg = SolverConfig::continued();
        for &(rho, z) in &[(0.7, c(0.3, 0.05)), (1.5, c(-1.1, 0.2)), (2.5, c(2.0, 1e-3))] {
            let st = solve_sd_with(&theta, rho, z, 1e-9, &cfg).unwrap();
            let psi = z - rho * rho * st.g / (1.0 + 2.0 * rho * st.g_u);
            assert!((psi - st.psi).norm() < 1e-9 * (1.0 + psi.norm()));
            assert!((theta.stieltjes_unchecked(psi) - st.g).norm() < 1e-9);
            let s = 1.0 + 4.0 * rho * st.g_u;
            assert!((s * s - (1.0 + 4.0 * rho * rho * st.g * st.g)).norm() < 1e-9);
            assert!(st.g.im < 0.0);
            if st.branch_ok {
                let principal = (1.0 + 4.0 * rho * rho * st.g * st.g).sqrt();
                assert!((principal - s).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn principal_policy_reports_branch_violation() {
        // λ_1 ⊞ λ_1 at x = 1: Re(1 + 4G²) turns negative near the real axis.
        let err = solve_sd(&sym_dirac(1.0), 1.0, c(1.0, 1e-4), 1e-8).unwrap_err();
        match err {
            Error::Branch { certificate, last_good, .. } => {
                assert!(certificate <= 0.0);
                assert!(last_good.certificate > 0.0 && last_good.branch_ok);
                assert!(last_good.z1.im > 1e-4);
            }
            other => panic!("expected branch error, got {other:?}"),
        }
        let st = solve_sd_with(&sym_dirac(1.0), 1.0, c(1.0, 1e-4), 1e-8, &SolverConfig::continued()).unwrap();
        assert!(!st.branch_ok);
        // arcsine density 1/(π√3) at x = 1
        let p = -st.g.im / std::f64::consts::PI;
        assert!((p - 1.0 / (std::f64::consts::PI * 3f64.sqrt())).abs() < 1e-3);
    }

    #[test]
    fn bernoulli_branch_violation_on_axis() {
        // G(iη) = -iη/(η² + ρ²): 1 + 4ρ²G² vanishes at η = ρ.
        let err = solve_sd(&sym_dirac(0.0), 2.0, c(0.0, 0.5), 1e-8).unwrap_err();
        assert!(matches!(err, Error::Branch { .. }));
    }

    #[test]
    fn domain_errors() {
        let t = sym_dirac(1.0);
        assert!(matches!(solve_sd(&t, 1.0, c(0.0, 0.0), 1e-8), Err(Error::Domain(_))));
        assert!(matches!(solve_sd(&t, -1.0, c(0.0, 1.0), 1e-8), Err(Error::Domain(_))));
        assert!(matches!(solve_sd(&t, 1.0, c(0.0, 1.0), 0.0), Err(Error::Domain(_))));
        assert!(density(&t, 1.0, &[0.0, 1.0], 1e-3).is_err());
        assert!(gap_probe(&t, 1.0, 0.0).is_err());
    }

    #[test]
    fn bernoulli_density_mass() {
        let grid = crate::stats::linspace(-3.0, 3.0, 60001);
        let law = density(&sym_dirac(0.0), 1.0, &grid, 1e-4).unwrap();
        assert!(law.interpolated.is_empty());
        assert!((law.mass() - 1.0).abs() <= 0.02);
        let peak = law
            .grid
            .iter()
            .zip(&law.density)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((peak.0.abs() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn arcsine_density_at_origin() {
        let law = density(&sym_dirac(1.0), 1.0, &[-0.5, 0.0, 0.5], 1e-5).unwrap();
        assert!((law.density[1] - 1.0 / (2.0 * std::f64::consts::PI)).abs() <= 2e-3);
    }

    #[test]
    fn split_support_for_large_radius() {
        let grid = crate::stats::linspace(-5.0, 5.0, 2001);
        let law = density(&sym_dirac(1.0), 3.0, &grid, 1e-5).unwrap();
        assert_eq!(law.components.len(), 2, "{:?}", law.components);
        let (l, r) = (law.components[0], law.components[1]);
        for (got, want) in [(l.0, -4.0), (l.1, -2.0), (r.0, 2.0), (r.1, 4.0)] {
            assert!((got - want).abs() <= 0.05, "{:?}", law.components);
        }
        for (x, p) in law.grid.iter().zip(&law.density) {
            if x.abs() <= 1.0 {
                assert!(*p < 1e-6);
            }
        }
    }

    #[test]
    fn gap_probe_examples() {
        assert!(gap_probe(&sym_dirac(1.0), 3.0, 0.5).unwrap());
        assert!(!gap_probe(&sym_dirac(1.0), 1.0, 0.5).unwrap());
        let pts: Vec<f64> = (0..40).map(|i| 0.5 + 1.5 * (i as f64 + 0.5) / 40.0).collect();
        let theta = symmetrize(&DiscreteMeasure::uniform(&pts).unwrap());
        assert!(gap_probe(&theta, 0.5, 0.1).unwrap());
    }

    #[test]
    fn log_potential_examples() {
        let u = log_potential(&sym_dirac(1.0), 2.0).unwrap();
        assert!((u.value - 2f64.ln()).abs() <= 2e-3, "{u:?}");
        assert!(!u.flagged);
        let u = log_potential(&sym_dirac(1.0), 0.2).unwrap();
        assert!(u.value.abs() <= 5e-3, "{u:?}");
        let u = log_potential(&sym_dirac(0.0), 2.0).unwrap();
        assert!((u.value - 2f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn slope_is_zero_inside_and_inverse_radius_outside() {
        let cfg = SolverConfig::continued();
        let t = sym_dirac(1.0);
        assert!(log_potential_slope(&t, 0.5, 1e-7, &cfg).unwrap().abs() < 1e-6);
        assert!((log_potential_slope(&t, 1.5, 1e-7, &cfg).unwrap() - 1.0 / 1.5).abs() < 1e-6);
        assert!((log_potential_slope(&sym_dirac(0.0), 2.0, 1e-7, &cfg).unwrap() - 0.5).abs() < 1e-6);
    }
}
