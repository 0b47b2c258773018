//! CSV and JSON writers. Floats use Rust's shortest round-trip formatting,
//! so equal values always produce equal bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiments::{LawTable, ModulusRow, StickingTable, SupportReport, TrialRecord};
use crate::error::Result;
use crate::rdiagonal::RDiagonalBoundParams;
use crate::ringlaw::RingDensity;

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "NA".into())
}

/// `seed,n,re,im`.
pub fn eigenvalues_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("seed,n,re,im\n");
    for r in records {
        for l in &r.eigenvalues {
            let _ = writeln!(out, "{},{},{},{}", r.seed, r.n, l.re, l.im);
        }
    }
    out
}

/// `seed,n,z_re,z_im,sigma_min`.
pub fn sigma_min_csv(records: &[TrialRecord], probes: &[super::Probe]) -> String {
    let mut out = String::from("seed,n,z_re,z_im,sigma_min\n");
    for r in records {
        for (p, s) in probes.iter().zip(&r.sigma_min) {
            let _ = writeln!(out, "{},{},{},{},{}", r.seed, r.n, p.re, p.im, s);
        }
    }
    out
}

/// `n,z_re,z_im,eps,hits,trials,fraction`.
pub fn support_csv(rep: &SupportReport) -> String {
    let mut out = String::from("n,z_re,z_im,eps,hits,trials,fraction\n");
    for p in &rep.probes {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", p.n, p.z_re, p.z_im, p.eps, p.hits, p.trials, p.fraction);
    }
    out
}

/// `n,trials,max_mean,max_se,b_n,b,min_mean,min_se,a_n,a`; the `a`
/// columns read `NA` when the hole radius is undefined.
pub fn moduli_csv(rows: &[ModulusRow], a: f64, b: f64, a_defined: bool) -> String {
    let mut out = String::from("n,trials,max_mean,max_se,b_n,b,min_mean,min_se,a_n,a\n");
    for r in rows {
        let a_ok = a_defined && r.a_n_defined;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.trials_ok,
            r.max_mean,
            r.max_se,
            r.b_n,
            b,
            r.min_mean,
            r.min_se,
            opt(a_ok.then_some(r.a_n)),
            opt(a_ok.then_some(a)),
        );
    }
    out
}

pub fn support_moduli_csv(rep: &SupportReport) -> String {
    moduli_csv(&rep.moduli, rep.a, rep.b, rep.a_defined)
}

pub fn sticking_csv(t: &StickingTable) -> String {
    moduli_csv(&t.rows, t.a, t.b, t.a_defined)
}

/// `rho,n,trials,ks,smoothing,mass_solver,mass_empirical,off_principal`.
pub fn law_csv(t: &LawTable) -> String {
    let mut out = String::from("rho,n,trials,ks,smoothing,mass_solver,mass_empirical,off_principal\n");
    for r in &t.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.rho, r.n, r.trials, r.ks, r.smoothing, r.mass_solver, r.mass_empirical, r.off_principal
        );
    }
    out
}

/// `rho,U,err_estimate` from a ring-density run.
pub fn ring_potential_csv(rd: &RingDensity) -> String {
    let mut out = String::from("rho,U,err_estimate\n");
    for ((r, u), e) in rd.radii.iter().zip(&rd.potential).zip(&rd.potential_err) {
        let _ = writeln!(out, "{r},{u},{e}");
    }
    out
}

/// `eps,c0,s,C,eta`.
pub fn eta_csv(rows: &[RDiagonalBoundParams]) -> String {
    let mut out = format!("{}\n", RDiagonalBoundParams::csv_header());
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
