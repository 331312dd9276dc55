//! Exact samplers, the characteristic function and high-dimensional
//! asymptotics for `MAz`, where `A ~ W_k(n, Σ)` is a singular Wishart matrix
//! and `z ~ N_k(μ, κΣ)` an independent singular Gaussian vector
//! (`rank Σ = r < k`).
//!
//! The headline piece is [`product::StochRepSampler`], which draws `MAz`
//! from a χ² scalar, one singular normal vector and `p` standard normals,
//! never forming the `k × k` matrix `A`. [`product::sample_product_naive`]
//! is the brute-force reference.
//!
//! Module map:
//! - [`spectral`]: rank-revealing factorization `Σ = RΛRᵀ`, symmetric roots,
//!   pseudo-inverse forms, the rank-one downdate square root.
//! - [`samplers`]: χ², singular normal, singular Wishart, `MAMᵀ`, `wᵀAw/wᵀΣw`.
//! - [`product`]: the `MAz` / `mᵀAz` samplers.
//! - [`charfn`]: `φ(u) = E exp(i uᵀAz)` by quadrature, plus the empirical CF.
//! - [`asymptotics`]: σ², Ω, standardization, assumption report.
//! - [`harness`]: population generation, replication loop, KDE, benchmark.
//! - [`cli`]: the `wishart-product` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod charfn;
pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod product;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use rng::RngStream;
