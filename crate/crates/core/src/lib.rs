//! Numerics for weighted rotationally symmetric model manifolds.
//!
//! A model is the warped product `dr² + f(r)² g_{S^{n-1}}` carrying a radial
//! potential `φ`, with the weighted Laplacian `L = Δ − ⟨∇φ, ∇·⟩` and an
//! effective dimension parameter `m ≤ 1`. This crate provides:
//!
//! - [`jacobi`]: the Jacobi / Riccati comparison ODEs (`𝔰_κ`, `cot_κ`, `m_κ`, `δ_κ`);
//! - [`model`]: model manifolds and their radial geometry (re-parametrized
//!   distance, weighted Laplacian of `r`, m-Bakry-Émery Ricci, balls);
//! - [`verify`]: grid checks of the Laplacian, Riccati, volume element,
//!   Bishop-Gromov, volume growth and Myers comparisons, and condition (A);
//! - [`criteria`]: divergence criteria for conservativeness, recurrence and
//!   the Feller property, with a three-valued verdict;
//! - [`diffusion`]: Monte Carlo simulation of the radial diffusion plus a 1D
//!   boundary classification oracle.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotic;
pub mod criteria;
pub mod diffusion;
mod error;
pub mod jacobi;
pub mod model;
mod ode;
pub mod profile;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
pub use jacobi::{solve_jacobi, Delta, JacobiSolution};
pub use model::{Completeness, Potential, RadialProfileCache, Warp, WeightedModel};
pub use profile::{CurvatureProfile, TailClass};
