//! Finite atomic probability measures on the real line.
//!
//! [`DiscreteMeasure`] carries the singular-value laws (`Θ`, `L_{T_n}`) and
//! empirical spectra; [`SymmetricMeasure`] is the `x ↦ -x` invariant
//! subclass used by the hermitized problem. Both evaluate their Cauchy
//! (Stieltjes) transform exactly as a finite sum.

use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Locations closer than this are merged into one atom.
pub const MERGE_TOL: f64 = 1e-12;

/// Tolerance on the total mass when reading user-supplied weights.
pub const MASS_TOL: f64 = 1e-9;

/// A probability measure with finitely many atoms, locations strictly
/// increasing and weights strictly positive summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDoc", into = "MeasureDoc")]
pub struct DiscreteMeasure {
    locs: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureDoc {
    atoms: Vec<[f64; 2]>,
}

impl TryFrom<MeasureDoc> for DiscreteMeasure {
    type Error = Error;

    fn try_from(doc: MeasureDoc) -> Result<Self> {
        if doc.atoms.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::InvalidMeasure(
                "atom locations must be strictly ascending".into(),
            ));
        }
        DiscreteMeasure::new(doc.atoms.iter().map(|a| (a[0], a[1])))
    }
}

impl From<DiscreteMeasure> for MeasureDoc {
    fn from(mu: DiscreteMeasure) -> Self {
        MeasureDoc {
            atoms: mu.atoms().map(|(x, w)| [x, w]).collect(),
        }
    }
}

impl DiscreteMeasure {
    /// Builds a measure from `(location, weight)` pairs in any order.
    ///
    /// Weights must be positive and sum to one within [`MASS_TOL`]; they are
    /// renormalized exactly afterwards. Locations within [`MERGE_TOL`] of
    /// each other are merged.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite location {x}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "weight {w} at {x} is not strictly positive"
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        for a in &mut atoms {
            a.1 /= total;
        }
        Ok(Self::from_sorted_merge(atoms))
    }

    /// Uniform weights `1/len` on the given points (an empirical measure).
    pub fn uniform(points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if let Some(x) = points.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite location {x}")));
        }
        let w = 1.0 / points.len() as f64;
        Ok(Self::from_sorted_merge(
            points.iter().map(|&x| (x, w)).collect(),
        ))
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new([(x, 1.0)])
    }

    fn from_sorted_merge(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locs: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut anchor = f64::NAN;
        // weighted offset from the cluster anchor; exact when all offsets vanish
        let mut offset = 0.0;
        for (x, w) in atoms {
            if !locs.is_empty() && x - anchor <= MERGE_TOL {
                let last = weights.len() - 1;
                weights[last] += w;
                offset += w * (x - anchor);
                locs[last] = anchor + offset / weights[last];
            } else {
                anchor = x;
                offset = 0.0;
                locs.push(x);
                weights.push(w);
            }
        }
        for x in &mut locs {
            if x.abs() <= MERGE_TOL {
                *x = 0.0;
            }
        }
        Self { locs, weights }
    }

    pub fn len(&self) -> usize {
        self.locs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locs.is_empty()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locs.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn min_location(&self) -> f64 {
        self.locs[0]
    }

    pub fn max_location(&self) -> f64 {
        self.locs[self.locs.len() - 1]
    }

    /// `max |x|` over the atoms.
    pub fn max_abs(&self) -> f64 {
        self.min_location().abs().max(self.max_location().abs())
    }

    /// `∫ x^k dμ`; negative `k` at an atom at zero gives `+inf`.
    pub fn moment(&self, k: i32) -> f64 {
        self.atoms().map(|(x, w)| w * x.powi(k)).sum()
    }

    /// Right-continuous distribution function `μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.locs.partition_point(|&l| l <= x);
        self.weights[..idx].iter().sum::<f64>().min(1.0)
    }

    /// Left-continuous quantile: the smallest atom with `cdf >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for (x, w) in self.atoms() {
            acc += w;
            if acc >= p - 1e-12 {
                return x;
            }
        }
        self.max_location()
    }

    /// Exact `Σ w_i / (y - x_i)`. Real `y` must lie strictly outside the
    /// convex hull of the atoms.
    pub fn stieltjes(&self, y: Complex64) -> Result<Complex64> {
        check_stieltjes_domain(y, self.min_location(), self.max_location(), &self.locs)?;
        Ok(self.stieltjes_unchecked(y))
    }

    pub fn stieltjes_unchecked(&self, y: Complex64) -> Complex64 {
        self.atoms().map(|(x, w)| w / (y - x)).sum()
    }
}

fn check_stieltjes_domain(y: Complex64, lo: f64, hi: f64, locs: &[f64]) -> Result<()> {
    if !(y.re.is_finite() && y.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {y}")));
    }
    if y.im != 0.0 {
        return Ok(());
    }
    if locs.iter().any(|&x| (x - y.re).abs() <= MERGE_TOL) {
        return Err(Error::Domain(format!(
            "Stieltjes transform evaluated at atom {}",
            y.re
        )));
    }
    if y.re > lo && y.re < hi {
        return Err(Error::Domain(format!(
            "real argument {} inside the convex hull [{lo}, {hi}]",
            y.re
        )));
    }
    Ok(())
}

/// A [`DiscreteMeasure`] invariant under `x ↦ -x`.
///
/// Stored as its magnitude profile so that symmetry is exact: every
/// positive magnitude `m` carries half-weight atoms at `±m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "DiscreteMeasure")]
pub struct SymmetricMeasure {
    measure: DiscreteMeasure,
    /// Positive magnitudes, ascending, with the weight of each single side.
    halves: Vec<(f64, f64)>,
    zero_weight: f64,
}

impl From<SymmetricMeasure> for DiscreteMeasure {
    fn from(s: SymmetricMeasure) -> Self {
        s.measure
    }
}

impl<'de> Deserialize<'de> for SymmetricMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mu = DiscreteMeasure::deserialize(d)?;
        SymmetricMeasure::try_from_measure(&mu).map_err(serde::de::Error::custom)
    }
}

impl Deref for SymmetricMeasure {
    type Target = DiscreteMeasure;

    fn deref(&self) -> &DiscreteMeasure {
        &self.measure
    }
}

impl SymmetricMeasure {
    /// Builds `Σ w_i (δ_{m_i} + δ_{-m_i}) / 2` from magnitudes `m_i` and
    /// weights `w_i`, which must sum to one.
    pub fn from_magnitudes(mags: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let folded = DiscreteMeasure::new(mags.into_iter().map(|(m, w)| (m.abs(), w)))?;
        Ok(Self::from_folded(&folded))
    }

    fn from_folded(folded: &DiscreteMeasure) -> Self {
        let mut zero_weight = 0.0;
        let mut halves = Vec::with_capacity(folded.len());
        for (m, w) in folded.atoms() {
            if m == 0.0 {
                zero_weight += w;
            } else {
                halves.push((m, w / 2.0));
            }
        }
        let mut locs = Vec::with_capacity(2 * halves.len() + 1);
        let mut weights = Vec::with_capacity(2 * halves.len() + 1);
        for &(m, h) in halves.iter().rev() {
            locs.push(-m);
            weights.push(h);
        }
        if zero_weight > 0.0 {
            locs.push(0.0);
            weights.push(zero_weight);
        }
        for &(m, h) in &halves {
            locs.push(m);
            weights.push(h);
        }
        Self {
            measure: DiscreteMeasure { locs, weights },
            halves,
            zero_weight,
        }
    }

    /// Accepts `mu` if it is symmetric within [`MERGE_TOL`] in location and
    /// `1e-12` in weight.
    pub fn try_from_measure(mu: &DiscreteMeasure) -> Result<Self> {
        let n = mu.len();
        for i in 0..n {
            let (x, w) = (mu.locs[i], mu.weights[i]);
            let (y, v) = (mu.locs[n - 1 - i], mu.weights[n - 1 - i]);
            if (x + y).abs() > MERGE_TOL || (w - v).abs() > 1e-12 {
                return Err(Error::InvalidMeasure(format!(
                    "not symmetric: atom ({x}, {w}) has mirror ({y}, {v})"
                )));
            }
        }
        Ok(symmetrize(mu))
    }

    pub fn as_measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    /// Positive magnitudes with their one-sided weights.
    pub fn halves(&self) -> &[(f64, f64)] {
        &self.halves
    }

    pub fn zero_weight(&self) -> f64 {
        self.zero_weight
    }

    /// True when the measure is `δ_0`.
    pub fn is_zero_dirac(&self) -> bool {
        self.halves.is_empty()
    }

    /// Paired-atom evaluation `w_0/y + Σ 2h·y/(y² - m²)`, which is purely
    /// imaginary for purely imaginary `y`.
    pub fn stieltjes(&self, y: Complex64) -> Result<Complex64> {
        check_stieltjes_domain(
            y,
            self.measure.min_location(),
            self.measure.max_location(),
            &self.measure.locs,
        )?;
        Ok(self.stieltjes_unchecked(y))
    }

    pub fn stieltjes_unchecked(&self, y: Complex64) -> Complex64 {
        self.stieltjes_and_derivative(y).0
    }

    /// `(G(y), G'(y))`.
    pub fn stieltjes_and_derivative(&self, y: Complex64) -> (Complex64, Complex64) {
        let y2 = y * y;
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        for &(m, h) in &self.halves {
            let m2 = m * m;
            let inv = 1.0 / (y2 - m2);
            g += 2.0 * h * y * inv;
            dg -= 2.0 * h * (y2 + m2) * inv * inv;
        }
        if self.zero_weight > 0.0 {
            let inv = 1.0 / y;
            g += self.zero_weight * inv;
            dg -= self.zero_weight * inv * inv;
        }
        (g, dg)
    }

    /// `(G(y), G'(y), K(y), K'(y))` with `K = 1 - y·G(y)`, evaluated as
    /// `-Σ 2h·m²/(y² - m²)` so that it keeps full relative accuracy when
    /// `|y|` is large.
    pub fn transform_terms(&self, y: Complex64) -> [Complex64; 4] {
        let y2 = y * y;
        let zero = Complex64::new(0.0, 0.0);
        let (mut g, mut dg, mut k, mut dk) = (zero, zero, zero, zero);
        for &(m, h) in &self.halves {
            let m2 = m * m;
            let inv = 1.0 / (y2 - m2);
            g += 2.0 * h * y * inv;
            dg -= 2.0 * h * (y2 + m2) * inv * inv;
            k -= 2.0 * h * m2 * inv;
            dk += 4.0 * h * m2 * y * inv * inv;
        }
        if self.zero_weight > 0.0 {
            let inv = 1.0 / y;
            g += self.zero_weight * inv;
            dg -= self.zero_weight * inv * inv;
        }
        [g, dg, k, dk]
    }

    /// `∫ x² dμ`.
    pub fn second_moment(&self) -> f64 {
        self.halves.iter().map(|&(m, h)| 2.0 * h * m * m).sum()
    }
}

/// `(μ(A) + μ(-A)) / 2`: half-weight atoms at `±x` for each atom `x`.
pub fn symmetrize(mu: &DiscreteMeasure) -> SymmetricMeasure {
    let folded = DiscreteMeasure::from_sorted_merge(mu.atoms().map(|(x, w)| (x.abs(), w)).collect());
    SymmetricMeasure::from_folded(&folded)
}

/// Free-function form of [`DiscreteMeasure::stieltjes`].
pub fn stieltjes(mu: &DiscreteMeasure, y: Complex64) -> Result<Complex64> {
    mu.stieltjes(y)
}

/// Inner and outer radii of the single ring generated by a law on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingRadii {
    pub a: f64,
    pub b: f64,
    /// False when `∫ x⁻² dμ` diverges (an atom at zero); `a` is then 0.
    pub a_defined: bool,
}

/// `b = (∫x² dμ)^{1/2}`, `a = (∫x⁻² dμ)^{-1/2}`.
pub fn ring_radii(mu: &DiscreteMeasure) -> Result<RingRadii> {
    if mu.min_location() < 0.0 {
        return Err(Error::Domain(format!(
            "ring radii need a law on [0, inf), found atom at {}",
            mu.min_location()
        )));
    }
    let b = mu.moment(2).sqrt();
    if mu.min_location() == 0.0 {
        return Ok(RingRadii {
            a: 0.0,
            b,
            a_defined: false,
        });
    }
    Ok(RingRadii {
        a: 1.0 / mu.moment(-2).sqrt(),
        b,
        a_defined: true,
    })
}

/// Outcome of [`regularity_diagnostics`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub max_atom: f64,
    pub norm_bound: f64,
    pub norm_ok: bool,
    /// Distance `n^{-κ}` of the evaluation line from the real axis.
    pub eps: f64,
    pub im_g_sup: f64,
    pub argmax: f64,
    pub grid_points: usize,
}

/// Checks the operator-norm bound `max x ≤ M` and reports
/// `sup |Im G_{μ̃}(x + i n^{-κ})|` over `x ∈ [-M, M]`.
///
/// The grid has step at most `n^{-κ}` and additionally contains every atom
/// of the symmetrized measure inside `[-M, M]`, where the Cauchy kernel
/// peaks.
pub fn regularity_diagnostics(
    mu: &DiscreteMeasure,
    n: usize,
    kappa: f64,
    norm_bound: f64,
) -> Result<RegularityReport> {
    if n == 0 || !(kappa > 0.0) || !(norm_bound > 0.0) {
        return Err(Error::Domain(format!(
            "need n >= 1, kappa > 0, M > 0 (got n={n}, kappa={kappa}, M={norm_bound})"
        )));
    }
    let eps = (n as f64).powf(-kappa);
    let sym = symmetrize(mu);
    let steps = ((2.0 * norm_bound) / eps).ceil().max(1.0) as usize;
    let h = 2.0 * norm_bound / steps as f64;
    let mut grid: Vec<f64> = (0..=steps).map(|j| -norm_bound + j as f64 * h).collect();
    grid.extend(
        sym.locations()
            .iter()
            .filter(|x| x.abs() <= norm_bound),
    );
    let mut im_g_sup = 0.0;
    let mut argmax = 0.0;
    for &x in &grid {
        let v = sym.stieltjes_unchecked(Complex64::new(x, eps)).im.abs();
        if v > im_g_sup {
            im_g_sup = v;
            argmax = x;
        }
    }
    let max_atom = mu.max_abs();
    Ok(RegularityReport {
        max_atom,
        norm_bound,
        norm_ok: max_atom <= norm_bound,
        eps,
        im_g_sup,
        argmax,
        grid_points: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_atom() -> DiscreteMeasure {
        DiscreteMeasure::new([(0.5, 0.5), (2.0, 0.5)]).unwrap()
    }

    #[test]
    fn symmetrize_single_atom() {
        let s = symmetrize(&DiscreteMeasure::dirac(2.0).unwrap());
        assert_eq!(s.locations(), &[-2.0, 2.0]);
        assert_eq!(s.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn symmetrize_zero_is_self_paired() {
        let s = symmetrize(&DiscreteMeasure::dirac(0.0).unwrap());
        assert_eq!(s.locations(), &[0.0]);
        assert_eq!(s.weights(), &[1.0]);
        assert!(s.is_zero_dirac());
    }

    #[test]
    fn symmetrize_two_atoms() {
        let s = symmetrize(&two_atom());
        assert_eq!(s.locations(), &[-2.0, -0.5, 0.5, 2.0]);
        assert!(s.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn stieltjes_examples() {
        let g = stieltjes(&DiscreteMeasure::dirac(1.0).unwrap(), c(0.0, 1.0)).unwrap();
        assert!(close(g.re, -0.5, 1e-15) && close(g.im, -0.5, 1e-15));

        let s = symmetrize(&DiscreteMeasure::dirac(1.0).unwrap());
        let g = s.stieltjes(c(2.0, 0.0)).unwrap();
        assert!(close(g.re, 2.0 / 3.0, 1e-15) && g.im == 0.0);

        let g = s.stieltjes(c(0.0, 2.0)).unwrap();
        assert_eq!(g.re, 0.0);
        assert!(close(g.im, -0.4, 1e-15));
    }

    #[test]
    fn stieltjes_domain_errors() {
        let s = symmetrize(&DiscreteMeasure::dirac(1.0).unwrap());
        assert!(matches!(s.stieltjes(c(1.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(s.stieltjes(c(0.3, 0.0)), Err(Error::Domain(_))));
        assert!(s.stieltjes(c(-3.0, 0.0)).is_ok());
    }

    #[test]
    fn ring_radii_examples() {
        let r = ring_radii(&DiscreteMeasure::dirac(1.0).unwrap()).unwrap();
        assert_eq!((r.a, r.b, r.a_defined), (1.0, 1.0, true));

        let r = ring_radii(&two_atom()).unwrap();
        assert!(close(r.a, 1.0 / 2.125f64.sqrt(), 1e-15));
        assert!(close(r.b, 2.125f64.sqrt(), 1e-15));
        assert!(close(r.a, 0.685994, 1e-6) && close(r.b, 1.457738, 1e-6));

        let r = ring_radii(&DiscreteMeasure::new([(0.0, 0.5), (1.0, 0.5)]).unwrap()).unwrap();
        assert!(!r.a_defined);
        assert_eq!(r.a, 0.0);
        assert!(close(r.b, 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn ring_radii_rejects_negative_atoms() {
        let mu = DiscreteMeasure::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!(matches!(ring_radii(&mu), Err(Error::Domain(_))));
    }

    #[test]
    fn regularity_dirac_one() {
        let rep = regularity_diagnostics(&DiscreteMeasure::dirac(1.0).unwrap(), 100, 0.5, 2.0).unwrap();
        assert!(rep.norm_ok);
        assert!(close(rep.eps, 0.1, 1e-15));
        // Peak at x = ±1: 0.5 / 0.1 from the near atom plus 0.5·0.1/4.01 from the far one.
        assert!(close(rep.im_g_sup, 5.0 + 0.05 / 4.01, 1e-12));
        assert!(close(rep.argmax.abs(), 1.0, 1e-12));
    }

    #[test]
    fn regularity_norm_violation() {
        let rep = regularity_diagnostics(&DiscreteMeasure::dirac(3.0).unwrap(), 100, 0.5, 2.0).unwrap();
        assert!(!rep.norm_ok);
        assert_eq!(rep.max_atom, 3.0);
    }

    #[test]
    fn regularity_uniform_quantiles_baseline() {
        let pts: Vec<f64> = (0..100).map(|i| 0.5 + 1.5 * (i as f64 + 0.5) / 100.0).collect();
        let mu = DiscreteMeasure::uniform(&pts).unwrap();
        let rep = regularity_diagnostics(&mu, 100, 0.25, 2.0).unwrap();
        assert!(rep.norm_ok);
        assert!(rep.im_g_sup.is_finite());
        // Regression value from the first verified run.
        assert!(close(rep.im_g_sup, REGULARITY_UNIFORM_BASELINE, 1e-9), "{}", rep.im_g_sup);
    }

    const REGULARITY_UNIFORM_BASELINE: f64 = 0.8088445711864942;

    #[test]
    fn construction_merges_and_validates() {
        let mu = DiscreteMeasure::new([(1.0, 0.25), (1.0 + 1e-14, 0.25), (0.0, 0.5)]).unwrap();
        assert_eq!(mu.len(), 2);
        assert!(close(mu.weights()[1], 0.5, 1e-15));
        assert!(DiscreteMeasure::new([(1.0, 0.6)]).is_err());
        assert!(DiscreteMeasure::new([(1.0, 0.0), (2.0, 1.0)]).is_err());
        assert!(DiscreteMeasure::new([(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mu = two_atom();
        let text = serde_json::to_string(&mu).unwrap();
        assert_eq!(text, r#"{"atoms":[[0.5,0.5],[2.0,0.5]]}"#);
        let back: DiscreteMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mu);
        assert!(serde_json::from_str::<DiscreteMeasure>(r#"{"atoms":[[2.0,0.5],[0.5,0.5]]}"#).is_err());
        assert!(serde_json::from_str::<DiscreteMeasure>(r#"{"atoms":[[0.5,0.5],[2.0,0.4]]}"#).is_err());
        assert!(serde_json::from_str::<DiscreteMeasure>(r#"{"atoms":[[0.5,0.5],[2.0,0.5000000001]]}"#).is_ok());
        let sym: SymmetricMeasure = serde_json::from_str(r#"{"atoms":[[-1.0,0.5],[1.0,0.5]]}"#).unwrap();
        assert_eq!(sym.halves(), &[(1.0, 0.5)]);
        assert!(serde_json::from_str::<SymmetricMeasure>(r#"{"atoms":[[-1.0,0.4],[1.0,0.6]]}"#).is_err());
    }

    #[test]
    fn quantiles_of_two_atom_law() {
        let mu = two_atom();
        let q: Vec<f64> = (0..4).map(|i| mu.quantile((i as f64 + 0.5) / 4.0)).collect();
        assert_eq!(q, vec![0.5, 0.5, 2.0, 2.0]);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn measure_on(lo: f64, hi: f64) -> impl Strategy<Value = DiscreteMeasure> {
        prop::collection::vec((lo..hi, 0.01f64..1.0), 1..12).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            DiscreteMeasure::new(atoms.into_iter().map(|(x, w)| (x, w / total))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn invariants_hold(mu in measure_on(-5.0, 5.0)) {
            let total: f64 = mu.weights().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(mu.locations().windows(2).all(|w| w[1] > w[0]));
            prop_assert!(mu.weights().iter().all(|&w| w > 0.0));
        }

        #[test]
        fn symmetrize_is_idempotent(mu in measure_on(-5.0, 5.0)) {
            let s = symmetrize(&mu);
            let ss = symmetrize(s.as_measure());
            prop_assert_eq!(&s, &ss);
            prop_assert_eq!(SymmetricMeasure::try_from_measure(s.as_measure()).unwrap(), s);
        }

        #[test]
        fn symmetric_transform_is_imaginary_on_axis(mu in measure_on(-5.0, 5.0), eta in 1e-4f64..50.0) {
            let g = symmetrize(&mu).stieltjes(Complex64::new(0.0, eta)).unwrap();
            prop_assert_eq!(g.re, 0.0);
            prop_assert!(g.im < 0.0);
        }

        #[test]
        fn dirac_radii(s in 1e-3f64..100.0) {
            let r = ring_radii(&DiscreteMeasure::dirac(s).unwrap()).unwrap();
            prop_assert!((r.a - s).abs() <= 1e-12 * s && (r.b - s).abs() <= 1e-12 * s);
        }

        #[test]
        fn radii_within_support(mu in measure_on(0.1, 3.0)) {
            let r = ring_radii(&mu).unwrap();
            let (m, big_m) = (mu.min_location(), mu.max_location());
            prop_assert!(m <= r.a * (1.0 + 1e-12));
            prop_assert!(r.a <= r.b * (1.0 + 1e-12));
            prop_assert!(r.b <= big_m * (1.0 + 1e-12));
            prop_assert!((r.b * r.b - mu.moment(2)).abs() <= 1e-12 * mu.moment(2).max(1.0));
        }

        #[test]
        fn stieltjes_decay(mu in measure_on(-3.0, 3.0), mag in 2.0f64..100.0, arg in 0.0f64..std::f64::consts::TAU) {
            let xmax = mu.max_abs().max(1e-3);
            let y = Complex64::from_polar(2.0 * xmax * mag, arg);
            prop_assume!(y.im.abs() > 1e-9);
            let g = mu.stieltjes(y).unwrap();
            let lhs = (y * g - 1.0).norm();
            prop_assert!(lhs <= xmax / (y.norm() - xmax) + 1e-12);
        }

        #[test]
        fn symmetric_and_plain_sums_agree(mu in measure_on(-3.0, 3.0), re in -4.0f64..4.0, im in 1e-3f64..4.0) {
            let s = symmetrize(&mu);
            let y = Complex64::new(re, im);
            let a = s.stieltjes(y).unwrap();
            let b = s.as_measure().stieltjes(y).unwrap();
            prop_assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()));
        }
    }
}
