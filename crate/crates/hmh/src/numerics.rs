//! Quadrature rules, multi-index enumeration, and verification reports.
//!
//! Node/weight computation uses Newton iteration on the orthonormal
//! three-term recurrences with a 1e-15 convergence tolerance. No
//! randomness anywhere, so golden values are reproducible bit for bit.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::C64;

/// Hard cap on the size of a Gaussian rule.
pub const MAX_RULE_SIZE: usize = 512;

/// Floor in the denominator of relative errors, so identically-zero
/// identities report rel_err = abs_err instead of NaN.
pub const REL_ERR_FLOOR: f64 = 1e-300;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Which classical family a rule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    /// Weight e^{−x²} on ℝ.
    GaussHermite,
    /// Weight 1 on a finite interval.
    GaussLegendre,
    /// Equispaced nodes on a period; exact for band-limited integrands.
    PeriodicTrapezoid,
}

/// Integration domain descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    RealLine,
    Interval(f64, f64),
    Period(f64),
}

/// A one-dimensional quadrature rule: Σ wᵢ f(xᵢ) ≈ ∫ f.
///
/// For [`RuleKind::GaussHermite`] the weight e^{−x²} is part of the
/// measure, i.e. the rule approximates ∫ f(x) e^{−x²} dx.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub domain: Domain,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ wᵢ f(xᵢ) for a real integrand.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Σ wᵢ f(xᵢ) for a complex integrand.
    pub fn integrate_complex<F: FnMut(f64) -> C64>(&self, mut f: F) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(C64::new(0.0, 0.0), |acc, (&x, &w)| acc + w * f(x))
    }
}

/// Normalized Hermite *function* values h_0..h_max at x (orthonormal for
/// plain Lebesgue measure, h_k = p_k e^{−x²/2} with p_k the orthonormal
/// polynomials for e^{−x²}). The functions stay O(1) at every node of
/// every admissible rule, so node search and Christoffel weights never
/// overflow even at n = 512.
fn hermite_function_all(max: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(max + 1);
    h.push(std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp());
    if max >= 1 {
        h.push(x * std::f64::consts::SQRT_2 * h[0]);
    }
    for k in 1..max {
        let next = x * (2.0 / (k as f64 + 1.0)).sqrt() * h[k]
            - (k as f64 / (k as f64 + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// Gauss-Hermite rule for ∫ f(x) e^{−x²} dx on ℝ.
///
/// Nodes are the roots of H_n, found by Newton iteration on the Hermite
/// functions (same zeros, overflow-free); weights are Christoffel
/// numbers wᵢ = e^{−xᵢ²} / Σ_{k<n} h_k(xᵢ)². For the largest rules the
/// extreme weights fall below the subnormal range; they are clamped to
/// the smallest positive f64, which is exact to within their own size.
pub fn gauss_hermite_rule(n_points: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_RULE_SIZE).contains(&n_points) {
        return Err(Error::Domain(format!(
            "gauss_hermite_rule: n_points must be in 1..={MAX_RULE_SIZE}, got {n_points}"
        )));
    }
    let n = n_points;
    let mut nodes = vec![0.0f64; n];

    // Work down from the largest root; initial guesses follow the classic
    // Stroud/Secrest scheme, then Newton with h_n' = √(2n) h_{n−1} − x h_n.
    let nf = n as f64;
    let mut x = 0.0f64;
    for i in 0..(n / 2) {
        x = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => x - 1.14 * nf.powf(0.426) / x,
            2 => 1.86 * x - 0.86 * nodes[0],
            3 => 1.91 * x - 0.91 * nodes[1],
            _ => 2.0 * x - nodes[i - 2],
        };
        let mut settled = 0;
        for _ in 0..NEWTON_MAX_ITER {
            let h = hermite_function_all(n, x);
            let dh = (2.0 * nf).sqrt() * h[n - 1] - x * h[n];
            let dx = h[n] / dh;
            x -= dx;
            if dx.abs() < NEWTON_TOL * (1.0 + x.abs()) {
                // one extra corrector pass after reaching tolerance
                settled += 1;
                if settled >= 2 {
                    break;
                }
            }
        }
        nodes[i] = x;
    }

    // Assemble symmetric node list in ascending order.
    let mut all = Vec::with_capacity(n);
    for i in 0..(n / 2) {
        all.push(-nodes[i]);
    }
    if n % 2 == 1 {
        all.push(0.0);
    }
    for i in (0..(n / 2)).rev() {
        all.push(nodes[i]);
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let weights: Vec<f64> = all
        .iter()
        .map(|&x| {
            let h = hermite_function_all(n - 1, x);
            let inv_sum = 1.0 / h.iter().map(|v| v * v).sum::<f64>();
            let half = (-x * x / 2.0).exp();
            (inv_sum * half * half).max(f64::MIN_POSITIVE)
        })
        .collect();

    Ok(QuadratureRule {
        kind: RuleKind::GaussHermite,
        domain: Domain::RealLine,
        nodes: all,
        weights,
    })
}

/// Legendre polynomial value and derivative at x (degree n).
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule on [a, b], exact for polynomials of degree ≤ 2n−1.
pub fn gauss_legendre_rule(n_points: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if !(1..=MAX_RULE_SIZE).contains(&n_points) {
        return Err(Error::Domain(format!(
            "gauss_legendre_rule: n_points must be in 1..={MAX_RULE_SIZE}, got {n_points}"
        )));
    }
    if !(a < b) {
        return Err(Error::Domain(format!(
            "gauss_legendre_rule: need a < b, got a={a}, b={b}"
        )));
    }
    let n = n_points;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        if n == 1 {
            nodes.push(0.0);
            weights.push(2.0);
            break;
        }
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    // Map from [−1,1] to [a,b]; sort ascending.
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut pairs: Vec<(f64, f64)> = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| (mid + half * x, half * w))
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    Ok(QuadratureRule {
        kind: RuleKind::GaussLegendre,
        domain: Domain::Interval(a, b),
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Equispaced rule on [0, 2π): nodes 2πj/N, weights 2π/N.
///
/// Integrates e^{imθ} exactly for |m| < N.
pub fn periodic_trapezoid_rule(n_points: usize) -> Result<QuadratureRule> {
    if n_points < 1 {
        return Err(Error::Domain(
            "periodic_trapezoid_rule: n_points must be ≥ 1".into(),
        ));
    }
    let period = 2.0 * std::f64::consts::PI;
    let h = period / n_points as f64;
    Ok(QuadratureRule {
        kind: RuleKind::PeriodicTrapezoid,
        domain: Domain::Period(period),
        nodes: (0..n_points).map(|j| j as f64 * h).collect(),
        weights: vec![h; n_points],
    })
}

/// Multi-index α ∈ ℕⁿ labelling Hermite/Laguerre tensor bases.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree |α| = Σ αⱼ.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

fn append_compositions(out: &mut Vec<MultiIndex>, prefix: &mut Vec<usize>, parts: usize, total: usize) {
    if parts == 1 {
        prefix.push(total);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        append_compositions(out, prefix, parts - 1, total - first);
        prefix.pop();
    }
}

/// All α ∈ ℕⁿ with |α| ≤ max_total_degree, in graded lexicographic order.
///
/// The count is C(max_total_degree + n, n).
pub fn enumerate_indices(n: usize, max_total_degree: usize) -> Vec<MultiIndex> {
    assert!(n >= 1, "enumerate_indices: dimension must be ≥ 1");
    let mut out = Vec::new();
    for degree in 0..=max_total_degree {
        append_compositions(&mut out, &mut Vec::with_capacity(n), n, degree);
    }
    out
}

/// All α ∈ ℕⁿ with |α| = degree, graded-lex order within the layer.
pub fn indices_of_degree(n: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    append_compositions(&mut out, &mut Vec::with_capacity(n), n, degree);
    out
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Outcome of one numerical identity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub params: BTreeMap<String, String>,
    pub passed: bool,
}

impl VerificationReport {
    /// Build a report comparing lhs against rhs at the given relative
    /// tolerance. rel_err = |lhs−rhs| / max(|lhs|, |rhs|, floor).
    pub fn compare(identity: &str, lhs: C64, rhs: C64, rel_tol: f64) -> Self {
        let abs_err = (lhs - rhs).norm();
        let denom = lhs.norm().max(rhs.norm()).max(REL_ERR_FLOOR);
        let rel_err = abs_err / denom;
        VerificationReport {
            identity: identity.to_string(),
            lhs_re: lhs.re,
            lhs_im: lhs.im,
            rhs_re: rhs.re,
            rhs_im: rhs.im,
            abs_err,
            rel_err,
            params: BTreeMap::new(),
            passed: rel_err <= rel_tol,
        }
    }

    /// Build a report for a check whose natural statement is
    /// "measured deviation ≤ tolerance" (Gram defects, intertwining
    /// residuals, …). The deviation is already scale-normalized by the
    /// check itself, so it is recorded as both abs_err and rel_err with
    /// rhs = 0.
    pub fn deviation(identity: &str, deviation: f64, tol: f64) -> Self {
        VerificationReport {
            identity: identity.to_string(),
            lhs_re: deviation,
            lhs_im: 0.0,
            rhs_re: 0.0,
            rhs_im: 0.0,
            abs_err: deviation,
            rel_err: deviation,
            params: BTreeMap::new(),
            passed: deviation <= tol,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn lhs(&self) -> C64 {
        C64::new(self.lhs_re, self.lhs_im)
    }

    pub fn rhs(&self) -> C64 {
        C64::new(self.rhs_re, self.rhs_im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Odd moments vanish; even: ∫ x^{2m} e^{−x²} dx = √π (2m−1)!! / 2^m.
    fn hermite_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let m = k / 2;
        let mut v = std::f64::consts::PI.sqrt();
        for j in 0..m {
            v *= (2 * j + 1) as f64 / 2.0;
        }
        v
    }

    #[test]
    fn gauss_hermite_one_point() {
        let rule = gauss_hermite_rule(1).unwrap();
        assert_eq!(rule.nodes, vec![0.0]);
        assert!((rule.weights[0] - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gauss_hermite_two_points() {
        // Roots of H_2(x) = 4x² − 2 are ±1/√2; weights √π/2 each.
        let rule = gauss_hermite_rule(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((rule.nodes[0] + r).abs() < 1e-14);
        assert!((rule.nodes[1] - r).abs() < 1e-14);
        for w in &rule.weights {
            assert!((w - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_hermite_exactness() {
        // Summing mirrored nodes pairwise makes odd integrands cancel at
        // the rule level instead of drowning in partial-sum rounding.
        fn integrate_paired(rule: &QuadratureRule, f: impl Fn(f64) -> f64) -> f64 {
            let n = rule.len();
            let mut acc = 0.0;
            for i in 0..n / 2 {
                let j = n - 1 - i;
                acc += rule.weights[i] * f(rule.nodes[i]) + rule.weights[j] * f(rule.nodes[j]);
            }
            if n % 2 == 1 {
                acc += rule.weights[n / 2] * f(rule.nodes[n / 2]);
            }
            acc
        }
        for &n in &[4usize, 8, 16, 32, 64] {
            let rule = gauss_hermite_rule(n).unwrap();
            let sum_w: f64 = rule.weights.iter().sum();
            assert!(
                (sum_w - std::f64::consts::PI.sqrt()).abs() < 1e-13,
                "weight sum off for n={n}"
            );
            for k in 0..=20usize.min(2 * n - 1) {
                let got = integrate_paired(&rule, |x| x.powi(k as i32));
                let want = hermite_moment(k);
                assert!(
                    (got - want).abs() <= 1e-12 * (1.0 + want.abs()),
                    "moment {k} at n={n}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn gauss_hermite_nodes_symmetric_weights_positive() {
        for &n in &[3usize, 7, 20, 65, 129, 512] {
            let rule = gauss_hermite_rule(n).unwrap();
            assert_eq!(rule.len(), n);
            for i in 0..n {
                assert!(rule.weights[i] > 0.0);
                let mirror = rule.nodes[n - 1 - i];
                assert!((rule.nodes[i] + mirror).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauss_hermite_rejects_out_of_range() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_hermite_rule(513).is_err());
    }

    #[test]
    fn gauss_legendre_small_rules() {
        let r1 = gauss_legendre_rule(1, -1.0, 1.0).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert_eq!(r1.weights, vec![2.0]);

        // Classical 2-point rule: nodes ±1/√3, unit weights.
        let r2 = gauss_legendre_rule(2, -1.0, 1.0).unwrap();
        let x = (1.0f64 / 3.0).sqrt();
        assert!((r2.nodes[0] + x).abs() < 1e-14);
        assert!((r2.nodes[1] - x).abs() < 1e-14);
        assert!((r2.weights[0] - 1.0).abs() < 1e-14);
        assert!((r2.weights[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        let rule = gauss_legendre_rule(8, 0.5, 2.25).unwrap();
        // degree ≤ 15 is exact; check a few.
        for k in 0..=15 {
            let got = rule.integrate(|x| x.powi(k));
            let want = (2.25f64.powi(k + 1) - 0.5f64.powi(k + 1)) / (k as f64 + 1.0);
            assert!((got - want).abs() < 1e-12 * (1.0 + want.abs()), "degree {k}");
        }
    }

    #[test]
    fn gauss_legendre_rejects_bad_interval() {
        assert!(gauss_legendre_rule(4, 1.0, 1.0).is_err());
        assert!(gauss_legendre_rule(4, 2.0, 1.0).is_err());
    }

    #[test]
    fn trapezoid_character_orthogonality() {
        let rule = periodic_trapezoid_rule(4).unwrap();
        let c1 = rule.integrate_complex(|t| C64::new(0.0, t).exp());
        assert!(c1.norm() < 1e-13);
        let c0 = rule.integrate(|_| 1.0);
        assert!((c0 - 2.0 * std::f64::consts::PI).abs() < 1e-13);

        let r8 = periodic_trapezoid_rule(8).unwrap();
        let cos2 = r8.integrate(|t| t.cos() * t.cos());
        assert!((cos2 - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_annihilates_all_resolved_modes() {
        let n = 9;
        let rule = periodic_trapezoid_rule(n).unwrap();
        for m in 1..n as i64 {
            for sign in [-1i64, 1] {
                let v = rule.integrate_complex(|t| C64::new(0.0, (sign * m) as f64 * t).exp());
                assert!(v.norm() < 1e-13, "mode {}", sign * m);
            }
        }
    }

    #[test]
    fn enumerate_indices_examples() {
        let one_d = enumerate_indices(1, 3);
        let want: Vec<MultiIndex> = (0..=3).map(|k| MultiIndex::new(vec![k])).collect();
        assert_eq!(one_d, want);

        let two_d = enumerate_indices(2, 1);
        assert_eq!(
            two_d,
            vec![
                MultiIndex::new(vec![0, 0]),
                MultiIndex::new(vec![1, 0]),
                MultiIndex::new(vec![0, 1]),
            ]
        );

        assert_eq!(enumerate_indices(2, 2).len(), 6); // C(4,2)
    }

    #[test]
    fn report_relative_error_floor() {
        let r = VerificationReport::compare("zero", C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1e-10);
        assert!(r.passed);
        assert_eq!(r.rel_err, 0.0);
    }

    proptest! {
        #[test]
        fn enumerate_indices_graded_and_complete(n in 1usize..4, m in 0usize..6) {
            let list = enumerate_indices(n, m);
            // count = C(m+n, n)
            prop_assert_eq!(list.len() as f64, binomial(m + n, n));
            // duplicate-free
            let set: std::collections::HashSet<_> = list.iter().cloned().collect();
            prop_assert_eq!(set.len(), list.len());
            // graded: degrees non-decreasing, every degree ≤ m fully present
            for w in list.windows(2) {
                prop_assert!(w[0].degree() <= w[1].degree());
            }
            for d in 0..=m {
                let layer = list.iter().filter(|a| a.degree() == d).count() as f64;
                prop_assert_eq!(layer, binomial(d + n - 1, n - 1));
            }
        }

        #[test]
        fn legendre_rule_integrates_constants(n in 1usize..40, a in -3.0f64..0.0, len in 0.1f64..5.0) {
            let rule = gauss_legendre_rule(n, a, a + len).unwrap();
            let got = rule.integrate(|_| 1.0);
            prop_assert!((got - len).abs() < 1e-13 * (1.0 + len));
        }
    }
}
