//! Numerical harmonic analysis on Heisenberg motion groups ℍM = ℍⁿ ⋉ K.
//!
//! This crate implements, at desk scale, the explicit machinery of the
//! twisted (special Hermite) calculus on the Heisenberg group and its
//! semidirect products with a torus K ⊆ U(n): twisted convolution and the
//! twisted heat semigroup, the heat-kernel (Segal-Bargmann) transform onto
//! weighted Bergman spaces, Gutzmer orbit-norm formulas, Poisson semigroup
//! norm identities, and the group Fourier transform with its Plancherel and
//! Paley-Wiener norm identities.
//!
//! Every identity is an exact theorem; the crate's job is to *verify* each
//! one numerically, under explicit truncation and quadrature parameters,
//! with two genuinely independent computational routes per identity
//! (quadrature of the defining integral on one side, closed coefficient
//! form on the other). The [`harness`] module packages these checks into
//! reproducible suites behind the `hmh` command line tool.
//!
//! Module map:
//!
//! * [`numerics`] — quadrature rules, multi-indices, verification reports.
//! * [`special`] — Hermite, Laguerre and special Hermite functions with
//!   entire continuation to complex arguments.
//! * [`groups`] — group laws of ℍⁿ and ℍM, the torus model of K
//!   (characters, Peter-Weyl, metaplectic phases, heat kernel on K).
//! * [`twisted`] — λ-slices, twisted convolution, heat multipliers, the
//!   Segal-Bargmann transform and weighted Bergman norms.
//! * [`spectral`] — Gutzmer, Poisson, Plancherel and Paley-Wiener checks.
//! * [`golden`] — pinned constants measured once by oracles and frozen.
//! * [`harness`] — configuration, test-function generation, suites, JSON
//!   reporting.

pub mod error;
pub mod golden;
pub mod groups;
pub mod harness;
pub mod numerics;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod twisted;

pub use error::{Error, Result};
pub use numerics::{MultiIndex, QuadratureRule, VerificationReport};
pub use special::TwistedParameter;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

// The book chapters double as doc-tests so their code snippets stay in
// sync with the crate (mdbook itself cannot run them).
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/special-hermite.md")]
    mod special_hermite {}
    #[doc = include_str!("../../../book/src/group-model.md")]
    mod group_model {}
    #[doc = include_str!("../../../book/src/twisted-heat.md")]
    mod twisted_heat {}
    #[doc = include_str!("../../../book/src/segal-bargmann.md")]
    mod segal_bargmann {}
    #[doc = include_str!("../../../book/src/gutzmer-poisson.md")]
    mod gutzmer_poisson {}
    #[doc = include_str!("../../../book/src/plancherel-paley-wiener.md")]
    mod plancherel_paley_wiener {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
