//! Numerics for the ring-shaped eigenvalue law of bi-unitarily invariant matrices.
//!
//! `A = U·diag(T)·V` with `U`, `V` Haar unitary has eigenvalues filling the
//! annulus `a ≤ |z| ≤ b`, `a = (∫x⁻²dΘ)^{-1/2}`, `b = (∫x²dΘ)^{1/2}`,
//! where `Θ` is the limit law of `T`. The crate samples the ensemble
//! ([`ensemble`]), solves the limiting Schwinger–Dyson equations for the
//! hermitized spectral law `Θ̃ ⊞ λ_|z|` ([`freeconv`]), derives the annular
//! law ([`ringlaw`]), evaluates the spectral-radius calculus for
//! R-diagonal perturbations ([`rdiagonal`]) and runs reproducible
//! Monte Carlo experiments ([`harness`]).

pub mod ensemble;
pub mod error;
pub mod freeconv;
pub mod harness;
pub mod measures;
pub mod quadrature;
pub mod rdiagonal;
pub mod ringlaw;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
