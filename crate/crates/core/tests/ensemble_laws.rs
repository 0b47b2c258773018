//! Statistical checks of the sampled ensemble against closed-form facts.

use single_ring::ensemble::{derive_seed, empirical_nu, haar_unitary, spectrum, EnsembleDraw};
use single_ring::measures::{ring_radii, DiscreteMeasure};
use single_ring::stats::{ks_two_sample, linspace, mean_se};
use single_ring::Complex64;

fn two_atom(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i < n / 2 { 0.5 } else { 2.0 }).collect()
}

fn uniform_quantiles(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

#[test]
fn haar_trace_second_moment_is_one() {
    // E|Tr U|² = 1 for every n under Haar measure.
    let vals: Vec<f64> = (0..2000u64)
        .map(|s| {
            let u = haar_unitary(50, derive_seed(77, &[s])).unwrap();
            let tr: Complex64 = (0..50).map(|i| u[(i, i)]).sum();
            tr.norm_sqr()
        })
        .collect();
    let (m, se) = mean_se(&vals);
    assert!((0.85..=1.15).contains(&m), "mean {m} (se {se})");
}

#[test]
fn haar_trace_is_rotation_invariant() {
    // Tr U and e^{iφ} Tr U share a law, so E Tr U = 0 and E (Tr U)² = 0.
    let traces: Vec<Complex64> = (0..1000u64)
        .map(|s| {
            let u = haar_unitary(20, derive_seed(3, &[s])).unwrap();
            (0..20).map(|i| u[(i, i)]).sum()
        })
        .collect();
    let n = traces.len() as f64;
    let m1: Complex64 = traces.iter().sum::<Complex64>() / n;
    let m2: Complex64 = traces.iter().map(|t| t * t).sum::<Complex64>() / n;
    assert!(m1.norm() < 0.15, "{m1}");
    assert!(m2.norm() < 0.2, "{m2}");
}

#[test]
fn two_atom_outer_edge() {
    let t = two_atom(200);
    let b = ring_radii(&DiscreteMeasure::uniform(&t).unwrap()).unwrap().b;
    for s in 0..4 {
        let sp = spectrum(&EnsembleDraw::sample(&t, derive_seed(11, &[s])).unwrap()).unwrap();
        let r = sp.max_modulus();
        assert!(r < b + 0.1 && r > b - 0.25, "seed {s}: max |λ| = {r}, b = {b}");
    }
}

#[test]
fn uniform_inner_edge() {
    let t = uniform_quantiles(200, 0.5, 2.0);
    let a = ring_radii(&DiscreteMeasure::uniform(&t).unwrap()).unwrap().a;
    for s in 0..4 {
        let sp = spectrum(&EnsembleDraw::sample(&t, derive_seed(12, &[s])).unwrap()).unwrap();
        let r = sp.min_modulus();
        assert!(r > a - 0.1 && r < a + 0.25, "seed {s}: min |λ| = {r}, a = {a}");
    }
}

#[test]
fn eigenvalue_arguments_are_uniform() {
    let t = two_atom(100);
    let mut phases = Vec::new();
    for s in 0..10 {
        let sp = spectrum(&EnsembleDraw::sample(&t, derive_seed(13, &[s])).unwrap()).unwrap();
        phases.extend(sp.eigenvalues.iter().map(|l| l.arg()));
    }
    let reference = linspace(-std::f64::consts::PI, std::f64::consts::PI, 4001);
    let d = ks_two_sample(&phases, &reference);
    assert!(d < 0.1, "KS {d}");
}

#[test]
fn rotated_ensemble_has_same_moduli() {
    // |λ| of A and of e^{iφ}A agree in law; compare independent samples.
    let t = uniform_quantiles(80, 0.5, 2.0);
    let phase = Complex64::from_polar(1.0, 1.0);
    let (mut plain, mut rotated) = (Vec::new(), Vec::new());
    for s in 0..8 {
        let d = EnsembleDraw::sample(&t, derive_seed(14, &[s])).unwrap();
        plain.extend(spectrum(&d).unwrap().moduli());
        let mut r = EnsembleDraw::sample(&t, derive_seed(15, &[s])).unwrap();
        for j in 0..r.n {
            for i in 0..r.n {
                r.a[(i, j)] *= phase;
            }
        }
        rotated.extend(spectrum(&r).unwrap().moduli());
    }
    let d = ks_two_sample(&plain, &rotated);
    assert!(d < 0.1, "KS {d}");
}

#[test]
fn empirical_nu_second_moment_identity() {
    // ∫x² dν_n^z = (1/n) ‖zI - A‖_F² = |z|² + (1/n)Σt² - 2 Re(z̄ Tr A)/n.
    let t = two_atom(60);
    let d = EnsembleDraw::sample(&t, 99).unwrap();
    let z = Complex64::new(0.7, -0.4);
    let nu = empirical_nu(&d, z).unwrap();
    let n = d.n as f64;
    let tr: Complex64 = (0..d.n).map(|i| d.a[(i, i)]).sum();
    let expected = z.norm_sqr() + t.iter().map(|x| x * x).sum::<f64>() / n - 2.0 * (z.conj() * tr).re / n;
    assert!((nu.second_moment() - expected).abs() < 1e-10 * (1.0 + expected));
}
