//! Group law of ℍⁿ and ℍM = ℍⁿ ⋉ K, and the torus model of K.
//!
//! K is a torus subgroup of U(n) acting on ℝ²ⁿ ≅ ℂⁿ by coordinate
//! rotations. The torus instance supplies everything the identity checks
//! need from the compact factor: characters and their holomorphic
//! continuation, Casimir eigenvalues λ_m = |m|², Peter-Weyl (Fourier)
//! coefficients, the diagonal metaplectic phases, the decomposition of
//! each Hermite layer 𝒫_m into one-dimensional K-irreducible blocks, the
//! heat kernel q_t on K, and the bi-invariant measure ν on the
//! complexification G used by the Bergman spaces.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::golden;
use crate::numerics::{indices_of_degree, MultiIndex, QuadratureRule};
use crate::special::TwistedParameter;
use crate::C64;

/// Element (x, u, t) of the Heisenberg group ℍⁿ with group law
/// (x,y,t)(u,v,s) = (x+u, y+v, t+s+½(u·y − v·x)).
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergElement {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl HeisenbergElement {
    pub fn new(x: Vec<f64>, u: Vec<f64>, t: f64) -> Result<Self> {
        if x.len() != u.len() {
            return Err(Error::DimensionMismatch(
                "heisenberg element: x and u must have equal length".into(),
            ));
        }
        Ok(HeisenbergElement { x, u, t })
    }

    pub fn identity(n: usize) -> Self {
        HeisenbergElement {
            x: vec![0.0; n],
            u: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(
                "heisenberg multiply: dimensions disagree".into(),
            ));
        }
        let n = self.dim();
        let mut twist = 0.0;
        for j in 0..n {
            twist += other.x[j] * self.u[j] - other.u[j] * self.x[j];
        }
        Ok(HeisenbergElement {
            x: (0..n).map(|j| self.x[j] + other.x[j]).collect(),
            u: (0..n).map(|j| self.u[j] + other.u[j]).collect(),
            t: self.t + other.t + 0.5 * twist,
        })
    }

    pub fn inverse(&self) -> Self {
        HeisenbergElement {
            x: self.x.iter().map(|v| -v).collect(),
            u: self.u.iter().map(|v| -v).collect(),
            t: -self.t,
        }
    }
}

/// Torus element k = e^{iθ} acting on ℝ²ⁿ by coordinate rotations
/// (x_j, u_j) → (x_j cos θ_j − u_j sin θ_j, x_j sin θ_j + u_j cos θ_j).
///
/// The angle vector may be shorter than n; trailing coordinates are
/// fixed. The required instance everywhere is the full torus d = n.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusElement {
    pub theta: Vec<f64>,
}

impl TorusElement {
    pub fn new(theta: Vec<f64>) -> Self {
        TorusElement { theta }
    }

    pub fn identity(d: usize) -> Self {
        TorusElement { theta: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(
                "torus multiply: dimensions disagree".into(),
            ));
        }
        Ok(TorusElement {
            theta: self
                .theta
                .iter()
                .zip(&other.theta)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        TorusElement {
            theta: self.theta.iter().map(|v| -v).collect(),
        }
    }

    /// Rotate a real point of ℝ²ⁿ.
    pub fn act(&self, x: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.dim() > x.len() || x.len() != u.len() {
            return Err(Error::DimensionMismatch(
                "torus action: angle vector longer than point".into(),
            ));
        }
        let mut xr = x.to_vec();
        let mut ur = u.to_vec();
        for j in 0..self.dim() {
            let (s, c) = self.theta[j].sin_cos();
            xr[j] = c * x[j] - s * u[j];
            ur[j] = s * x[j] + c * u[j];
        }
        Ok((xr, ur))
    }

    /// Complex-linear extension of the rotation to ℂ²ⁿ, with optional
    /// imaginary angle part H (the action of g = k e^{iH} ∈ G).
    pub fn act_complex(&self, z: &[C64], w: &[C64], h: &[f64]) -> Result<(Vec<C64>, Vec<C64>)> {
        if self.dim() > z.len() || z.len() != w.len() || h.len() != self.dim() {
            return Err(Error::DimensionMismatch(
                "torus complex action: dimensions disagree".into(),
            ));
        }
        let mut zr = z.to_vec();
        let mut wr = w.to_vec();
        for j in 0..self.dim() {
            let angle = C64::new(self.theta[j], h[j]);
            let c = angle.cos();
            let s = angle.sin();
            zr[j] = c * z[j] - s * w[j];
            wr[j] = s * z[j] + c * w[j];
        }
        Ok((zr, wr))
    }
}

/// Irreducible unitary representation of the torus: a weight m ∈ ℤᵈ.
/// Degree 1, Casimir eigenvalue λ_m = |m|².
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TorusIrrep {
    pub weight: Vec<i64>,
}

impl TorusIrrep {
    pub fn new(weight: Vec<i64>) -> Self {
        TorusIrrep { weight }
    }

    pub fn degree(&self) -> usize {
        1
    }

    pub fn casimir(&self) -> f64 {
        self.weight.iter().map(|&m| (m * m) as f64).sum()
    }

    /// χ_m(e^{iθ}) = e^{im·θ}.
    pub fn character(&self, k: &TorusElement) -> C64 {
        let phase: f64 = self
            .weight
            .iter()
            .zip(&k.theta)
            .map(|(&m, &t)| m as f64 * t)
            .sum();
        C64::new(0.0, phase).exp()
    }

    /// Holomorphic continuation χ_m(k e^{iH}) = e^{im·θ} e^{−m·H}.
    pub fn character_complexified(&self, k: &TorusElement, h: &[f64]) -> C64 {
        let phase: f64 = self
            .weight
            .iter()
            .zip(&k.theta)
            .map(|(&m, &t)| m as f64 * t)
            .sum();
        let decay: f64 = self
            .weight
            .iter()
            .zip(h)
            .map(|(&m, &hh)| m as f64 * hh)
            .sum();
        C64::new(0.0, phase).exp() * (-decay).exp()
    }
}

/// Element of ℍM = ℍⁿ ⋉ K.
#[derive(Debug, Clone, PartialEq)]
pub struct HMElement {
    pub h: HeisenbergElement,
    pub k: TorusElement,
}

impl HMElement {
    pub fn identity(n: usize, d: usize) -> Self {
        HMElement {
            h: HeisenbergElement::identity(n),
            k: TorusElement::identity(d),
        }
    }
}

/// Product (X, k)(Y, h) = (X · (k·Y), kh): the rotation acts on the
/// incoming Heisenberg part before the ℍⁿ product.
pub fn hm_multiply(a: &HMElement, b: &HMElement) -> Result<HMElement> {
    let (bx, bu) = a.k.act(&b.h.x, &b.h.u)?;
    let rotated = HeisenbergElement::new(bx, bu, b.h.t)?;
    Ok(HMElement {
        h: a.h.multiply(&rotated)?,
        k: a.k.multiply(&b.k)?,
    })
}

/// Inverse (X, k)⁻¹ = (k⁻¹ · X⁻¹, k⁻¹).
pub fn hm_inverse(a: &HMElement) -> Result<HMElement> {
    let kinv = a.k.inverse();
    let hinv = a.h.inverse();
    let (x, u) = kinv.act(&hinv.x, &hinv.u)?;
    Ok(HMElement {
        h: HeisenbergElement::new(x, u, hinv.t)?,
        k: kinv,
    })
}

/// Fourier (Peter-Weyl) coefficients of a function on the torus, sampled
/// on the N-point trapezoid grid per angle: f̂(m) = ∫_K f(θ) e^{−im·θ} dθ
/// with normalized Haar measure. Weights up to `max_weight` in each
/// coordinate are returned; an aliasing error is signalled when the grid
/// cannot resolve them (N ≤ 2·max_weight).
pub fn peter_weyl_coefficients<F: Fn(&[f64]) -> C64>(
    f: F,
    d: usize,
    grid_points: usize,
    max_weight: i64,
) -> Result<BTreeMap<Vec<i64>, C64>> {
    if max_weight < 0 {
        return Err(Error::Domain("peter_weyl: max_weight must be ≥ 0".into()));
    }
    if grid_points as i64 <= 2 * max_weight {
        return Err(Error::Aliasing {
            weight: max_weight,
            grid: grid_points,
        });
    }
    let h = 2.0 * std::f64::consts::PI / grid_points as f64;
    // enumerate the d-dimensional grid and weight cube
    let mut coeffs: BTreeMap<Vec<i64>, C64> = BTreeMap::new();
    let weights: Vec<Vec<i64>> = weight_cube(d, max_weight);
    let mut idx = vec![0usize; d];
    let total = grid_points.pow(d as u32);
    let norm = 1.0 / total as f64;
    for flat in 0..total {
        let mut rem = flat;
        for j in 0..d {
            idx[j] = rem % grid_points;
            rem /= grid_points;
        }
        let theta: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
        let val = f(&theta) * norm;
        for m in &weights {
            let phase: f64 = m
                .iter()
                .zip(&theta)
                .map(|(&mm, &tt)| mm as f64 * tt)
                .sum();
            *coeffs.entry(m.clone()).or_insert(C64::new(0.0, 0.0)) +=
                val * C64::new(0.0, -phase).exp();
        }
    }
    Ok(coeffs)
}

/// All m ∈ ℤᵈ with |m_j| ≤ band.
pub fn weight_cube(d: usize, band: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for prefix in &out {
            for m in -band..=band {
                let mut v = prefix.clone();
                v.push(m);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Diagonal metaplectic phase η_α(e^{iθ}) on the Hermite basis:
/// η_α = exp(i·s·sgn(λ)·α·θ) with the sign s frozen in [`golden`]
/// (measured by the intertwining oracle, which this phase must satisfy:
/// π_λ(k·(x,u)) = μ_λ(k) π_λ(x,u) μ_λ(k)*).
pub fn metaplectic_phase(k: &TorusElement, alpha: &MultiIndex, lambda: TwistedParameter) -> C64 {
    let phase: f64 = k
        .theta
        .iter()
        .zip(alpha.entries())
        .map(|(&t, &a)| t * a as f64)
        .sum();
    C64::new(0.0, golden::METAPLECTIC_SIGN * lambda.sign() * phase).exp()
}

/// Continuation of the metaplectic phase to g = k e^{iH}:
/// the angle θ is replaced by θ + iH.
pub fn metaplectic_phase_complexified(
    k: &TorusElement,
    h: &[f64],
    alpha: &MultiIndex,
    lambda: TwistedParameter,
) -> C64 {
    let s = golden::METAPLECTIC_SIGN * lambda.sign();
    let phase: f64 = k
        .theta
        .iter()
        .zip(alpha.entries())
        .map(|(&t, &a)| t * a as f64)
        .sum();
    let decay: f64 = h
        .iter()
        .zip(alpha.entries())
        .map(|(&hh, &a)| hh * a as f64)
        .sum();
    C64::new(0.0, s * phase).exp() * (-s * decay).exp()
}

/// Decomposition 𝒫_m = ⊕_a 𝒫_{ma} of the m-th Hermite layer into
/// K-irreducible subspaces, for the full torus d = n: every block is the
/// span of a single φ_α with |α| = m (weights distinct, multiplicity one).
pub fn pm_decomposition(m: usize, n: usize, d: usize) -> Result<Vec<(usize, Vec<MultiIndex>)>> {
    if d != n {
        return Err(Error::Domain(format!(
            "pm_decomposition: d={d} < n={n}; multiplicity-one is only guaranteed for the full torus (Gelfand-pair caveat)"
        )));
    }
    Ok(indices_of_degree(n, m)
        .into_iter()
        .enumerate()
        .map(|(a, alpha)| (a, vec![alpha]))
        .collect())
}

/// Heat kernel on K at g = k e^{iH}:
/// q_t(g) = Σ_{m∈ℤᵈ} e^{−|m|²t/2} χ_m(g), truncated once the tail bound
/// Σ_{|m|>M} e^{−m²t/2} e^{2|m||H|} < 1e-12 holds (per coordinate).
pub fn heat_kernel_k(t: f64, k: &TorusElement, h: &[f64]) -> Result<C64> {
    if t <= 0.0 {
        return Err(Error::Domain("heat_kernel_k: t must be positive".into()));
    }
    let d = k.dim();
    if h.len() != d {
        return Err(Error::DimensionMismatch(
            "heat_kernel_k: H must have the torus dimension".into(),
        ));
    }
    let mut acc = C64::new(1.0, 0.0);
    for j in 0..d {
        let m_max = heat_series_cutoff(t, h[j].abs())?;
        let mut series = C64::new(1.0, 0.0); // m = 0 term
        for m in 1..=m_max {
            let decay = (-(m * m) as f64 * t / 2.0).exp();
            let zeta = C64::new(k.theta[j], h[j]);
            series += decay
                * ((C64::new(0.0, m as f64) * zeta).exp() + (C64::new(0.0, -(m as f64)) * zeta).exp());
        }
        acc *= series;
    }
    Ok(acc)
}

fn heat_series_cutoff(t: f64, h_abs: f64) -> Result<i64> {
    for m in 1..=10_000i64 {
        // bound the tail by a geometric-type estimate: terms at |m| > M
        let next = m + 1;
        let lead = (-(next * next) as f64 * t / 2.0 + 2.0 * next as f64 * h_abs).exp();
        // ratio of consecutive bounds ≤ e^{−(2M+3)t/2 + 2|H|}
        let ratio = (-(2.0 * next as f64 + 1.0) * t / 2.0 + 2.0 * h_abs).exp();
        if ratio < 1.0 && 2.0 * lead / (1.0 - ratio) < 1e-12 {
            return Ok(m);
        }
    }
    Err(Error::Truncation(format!(
        "heat_kernel_k: no cutoff ≤ 10⁴ meets the 1e-12 tail bound (t={t}, |H|={h_abs})"
    )))
}

/// Density ρ_t(H) = (πt)^{−d/2} e^{−|H|²/t} of the measure ν on G in the
/// imaginary directions, normalized Haar in the compact directions.
/// Defined by the moment property ∫ e^{−2m·H} ρ_t(H) dH = e^{|m|²t},
/// which is what makes f ↦ f ∗ q_t isometric onto 𝒪(G) ∩ L²(ν).
pub fn g_measure_density(t: f64, h: &[f64]) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Domain("g_measure_density: t must be positive".into()));
    }
    let d = h.len() as f64;
    let h2: f64 = h.iter().map(|v| v * v).sum();
    Ok((std::f64::consts::PI * t).powf(-d / 2.0) * (-h2 / t).exp())
}

/// Exact H-moments of ν against the heat multipliers, as a quadrature
/// matrix: entry (m, m') = ∫ χ_m χ̄_{m'} dν over G computed by
/// trapezoid × Gauss-Hermite. Haar in θ makes this diagonal; the
/// diagonal is ∫ e^{−2mH} ρ_t(H) dH = e^{m²t} up to quadrature error.
pub fn g_mode_moment(t: f64, m: i64, rule: &QuadratureRule) -> f64 {
    // substitute H = √t · s so that ρ_t dH becomes π^{−1/2} e^{−s²} ds
    let root = t.sqrt();
    rule.integrate(|s| (-2.0 * m as f64 * root * s).exp()) / std::f64::consts::PI.sqrt()
}
