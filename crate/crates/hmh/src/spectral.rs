//! Gutzmer's formula, the Poisson semigroup norm identity, the group
//! Fourier transform with its Plancherel theorem, and the complexified
//! Paley-Wiener norm identity.
//!
//! Each check computes its two sides through genuinely different routes:
//! the left-hand sides are orbit integrals evaluated by quadrature over
//! continued basis functions, the right-hand sides are finite sums over
//! slice coefficients with continued Laguerre/character factors. The
//! normalization constants connecting the two bookkeepings are the
//! pinned values in [`crate::golden`].

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::golden;
use crate::groups::{metaplectic_phase_complexified, TorusElement, TorusIrrep};
use crate::numerics::{
    gauss_hermite_rule, periodic_trapezoid_rule, MultiIndex, VerificationReport,
};
use crate::special::{
    block_diagonal_continued, matrix_coefficient_normalization, special_hermite_closed,
    special_hermite_gaussian_exponent, TwistedParameter,
};
use crate::twisted::{BandLimitedFunction, TwistedSlice};
use crate::C64;

/// A point (z, w, τ, g) of the complexified group, g = k e^{iH}.
#[derive(Debug, Clone)]
pub struct ComplexGroupPoint {
    pub z: Vec<C64>,
    pub w: Vec<C64>,
    pub tau: C64,
    pub k: TorusElement,
    pub h: Vec<f64>,
}

impl ComplexGroupPoint {
    pub fn identity(n: usize, d: usize) -> Self {
        ComplexGroupPoint {
            z: vec![C64::new(0.0, 0.0); n],
            w: vec![C64::new(0.0, 0.0); n],
            tau: C64::new(0.0, 0.0),
            k: TorusElement::identity(d),
            h: vec![0.0; d],
        }
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.z.len() != n || self.w.len() != n || self.k.dim() != d || self.h.len() != d {
            return Err(Error::DimensionMismatch(
                "complex group point has wrong dimensions".into(),
            ));
        }
        Ok(())
    }

    /// Imaginary part s = Im τ.
    pub fn s(&self) -> f64 {
        self.tau.im
    }
}

/// Gutzmer right-hand side for a d = 0 slice at fixed λ:
/// Σ_β [continued diagonal factor of the block containing β] · Σ_α |c_{αβ}|².
///
/// For the full torus every block 𝒫_{ma} is the span of a single φ_β with
/// |β| = m and dim 𝒫_{ma} = 1; the squared convolution norms
/// ‖F ∗_λ φ_{ma}^λ‖² reduce to the coefficient sums over the second
/// index, in the normalization pinned by the twisted-convolution oracle.
pub fn gutzmer_rhs(slice: &TwistedSlice, y: &[f64], v: &[f64]) -> Result<f64> {
    if slice.d != 0 {
        return Err(Error::Domain("gutzmer_rhs: expected a d = 0 slice".into()));
    }
    let mut by_beta: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    for (key, c) in slice.coeffs() {
        *by_beta.entry(key.beta.clone()).or_insert(0.0) += c.norm_sqr();
    }
    let mut acc = 0.0;
    for (beta, mass) in by_beta {
        acc += block_diagonal_continued(&beta, slice.lambda, y, v)? * mass;
    }
    Ok(acc)
}

/// Gutzmer left-hand side by quadrature:
/// ∫_K ∫_{ℝ²ⁿ} |F(k·((x,u)+i(y,v)))|² e^{λ(u·y − v·x)} dx du dk.
///
/// Rotating the real integration variables (the Lebesgue measure and the
/// symplectic pairing are K-invariant) turns the integrand into the fixed
/// function |F((x,u)+i·k(y,v))|² e^{λω((x,u), k(y,v))}, so the K-average
/// runs over rotated imaginary parts. For each of them the (x,u)-integral
/// is a polynomial against a shifted Gaussian: completing the square in
/// the exponent
///   −L(|x|²+|u|²)/2 + λ(u·y′ − v′·x) = L(|y′|²+|v′|²) − (L/2)(|x+εv′|²+|u−εy′|²)
/// makes tensor Gauss-Hermite exact once 2N−1 covers the degree.
pub fn gutzmer_lhs(
    slice: &TwistedSlice,
    y: &[f64],
    v: &[f64],
    k_points: usize,
    gh_points: usize,
) -> Result<f64> {
    if slice.d != 0 {
        return Err(Error::Domain("gutzmer_lhs: expected a d = 0 slice".into()));
    }
    let n = slice.n;
    if y.len() != n || v.len() != n {
        return Err(Error::DimensionMismatch(
            "gutzmer_lhs: imaginary parts must have length n".into(),
        ));
    }
    let coarse = gutzmer_lhs_impl(slice, y, v, k_points, gh_points)?;
    let fine = gutzmer_lhs_impl(slice, y, v, k_points, gh_points + 8)?;
    let deviation = (coarse - fine).abs() / coarse.abs().max(fine.abs()).max(1e-300);
    if deviation > 1e-6 {
        return Err(Error::QuadratureInconsistency {
            context: "gutzmer_lhs",
            deviation,
            tolerance: 1e-6,
        });
    }
    Ok(fine)
}

fn gutzmer_lhs_impl(
    slice: &TwistedSlice,
    y: &[f64],
    v: &[f64],
    k_points: usize,
    gh_points: usize,
) -> Result<f64> {
    let n = slice.n;
    let lambda = slice.lambda;
    let l = lambda.abs();
    let eps = lambda.sign();
    let ktrap = periodic_trapezoid_rule(k_points)?;
    let rule = gauss_hermite_rule(gh_points)?;
    let cw: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&s, &w)| w * (s * s).exp())
        .collect();
    let terms: Vec<(MultiIndex, MultiIndex, C64)> = slice
        .coeffs()
        .map(|(k, &c)| (k.alpha.clone(), k.beta.clone(), c))
        .collect();
    let scale = 1.0 / (l / 2.0).sqrt();
    let haar = (2.0 * std::f64::consts::PI).powi(n as i32);

    // tensor loop over the n rotation angles
    let mut kidx = vec![0usize; n];
    let k_total = k_points.pow(n as u32);
    let mut acc = 0.0;
    let mut zs = vec![C64::new(0.0, 0.0); n];
    let mut ws = vec![C64::new(0.0, 0.0); n];
    for kflat in 0..k_total {
        let mut rem = kflat;
        let mut kw = 1.0;
        for j in 0..n {
            kidx[j] = rem % k_points;
            rem /= k_points;
            kw *= ktrap.weights[kidx[j]];
        }
        // rotated imaginary parts
        let mut yr = vec![0.0; n];
        let mut vr = vec![0.0; n];
        for j in 0..n {
            let (s, c) = ktrap.nodes[kidx[j]].sin_cos();
            yr[j] = c * y[j] - s * v[j];
            vr[j] = s * y[j] + c * v[j];
        }
        let r2: f64 = yr.iter().map(|t| t * t).sum::<f64>() + vr.iter().map(|t| t * t).sum::<f64>();
        // inner (x,u)-integral: GH centred at (−εv′, +εy′), rate L/2
        let mut idx = vec![0usize; 2 * n];
        let total = rule.len().pow(2 * n as u32);
        let mut inner = 0.0;
        for flat in 0..total {
            let mut rem2 = flat;
            let mut wprod = 1.0;
            for jdim in 0..2 * n {
                idx[jdim] = rem2 % rule.len();
                rem2 /= rule.len();
                wprod *= cw[idx[jdim]];
            }
            let mut s2 = 0.0;
            for j in 0..n {
                let sx = rule.nodes[idx[j]];
                let su = rule.nodes[idx[n + j]];
                s2 += sx * sx + su * su;
                let x = -eps * vr[j] + scale * sx;
                let u = eps * yr[j] + scale * su;
                zs[j] = C64::new(x, yr[j]);
                ws[j] = C64::new(u, vr[j]);
            }
            let poly = slice.mode_poly_sum(&terms, &zs, &ws)?;
            inner += wprod * poly.norm_sqr() * (-s2).exp();
        }
        acc += kw * inner * scale.powi(2 * n as i32) * (l * r2).exp();
    }
    Ok(acc / haar)
}

/// Two-sided Gutzmer check as a report.
pub fn gutzmer_check(
    slice: &TwistedSlice,
    y: &[f64],
    v: &[f64],
    k_points: usize,
    gh_points: usize,
    rel_tol: f64,
) -> Result<VerificationReport> {
    let lhs = gutzmer_lhs(slice, y, v, k_points, gh_points)?;
    let rhs = gutzmer_rhs(slice, y, v)?;
    Ok(
        VerificationReport::compare("gutzmer", C64::new(lhs, 0.0), C64::new(rhs, 0.0), rel_tol)
            .with_param("lambda", slice.lambda.value())
            .with_param("imag_radius", format!("{:.4}", radius(y, v))),
    )
}

fn radius(y: &[f64], v: &[f64]) -> f64 {
    (y.iter().map(|t| t * t).sum::<f64>() + v.iter().map(|t| t * t).sum::<f64>()).sqrt()
}

/// Poisson semigroup e^{−qΔ^{1/2}} on a band-limited function:
/// the (α, β, m) coefficient at node λ is multiplied by
/// e^{−q √((2|β|+n)|λ| + λ² + |m|²)} (same acted index as the heat
/// multiplier; |m|² is the torus Casimir).
pub fn poisson_apply(f: &BandLimitedFunction, q: f64) -> BandLimitedFunction {
    let n = f.n as f64;
    f.map_slices(|slice, key| {
        let l = slice.lambda.abs();
        let lam = slice.lambda.value();
        let casimir: f64 = key.k_weight.iter().map(|&m| (m * m) as f64).sum();
        let energy = (2.0 * key.beta.degree() as f64 + n) * l + lam * lam + casimir;
        C64::new((-q * energy.sqrt()).exp(), 0.0)
    })
}

/// Forward Poisson norm identity at desk scale (n = 1, d = 1).
///
/// LHS: the orbit integral of h = e^{−qΔ^{1/2}} f over
/// ℍⁿ × {|Im(z,w)| = r} × K × K at the complexified point
/// (z, w, τ, k₁e^{iH}k₂), with the ℝ²-integral by Gauss-Hermite, the
/// circle and K by trapezoid (the two K-integrals collapse to one for
/// the abelian torus), and the t′-integral through the λ-grid Parseval
/// bridge, which contributes the weight e^{2λ(s + ½(u′y − v x′))}.
///
/// RHS: the coefficient-side series
/// Σ_m χ_m(exp 2iH) Σ_β L_β⁰(−2|λ|r²) e^{|λ|r²} e^{2λs}
///   e^{−2q√((2β+1)|λ|+λ²+m²)} Σ_α |c_{αβm}|²,
/// integrated over the same λ-grid with the same (2π)^{−1} constant.
#[allow(clippy::too_many_arguments)]
pub fn poisson_identity_check(
    f: &BandLimitedFunction,
    q: f64,
    r: f64,
    big_h: &[f64],
    s: f64,
    circle_points: usize,
    k_points: usize,
    gh_points: usize,
    rel_tol: f64,
) -> Result<VerificationReport> {
    if f.n != 1 || f.d != 1 {
        return Err(Error::Domain(
            "poisson_identity_check: implemented for n = 1, d = 1".into(),
        ));
    }
    if big_h.len() != 1 {
        return Err(Error::DimensionMismatch("poisson H must have length 1".into()));
    }
    if q <= 0.0 || r < 0.0 {
        return Err(Error::Domain("poisson: need q > 0 and r ≥ 0".into()));
    }
    let h = poisson_apply(f, q);
    let circle = periodic_trapezoid_rule(circle_points)?;
    let ktrap = periodic_trapezoid_rule(k_points)?;
    let rule = gauss_hermite_rule(gh_points)?;
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut lhs = 0.0;
    for (i, slice) in h.slices.iter().enumerate() {
        if slice.is_empty() {
            continue;
        }
        let lam = slice.lambda.value();
        let l = slice.lambda.abs();
        let eps = slice.lambda.sign();
        let weight = h.grid.weights[i];
        let modes = slice.mode_partition();
        let scale = 1.0 / (l / 2.0).sqrt();
        let cw: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * (t * t).exp())
            .collect();

        // circle average over (y, v) = r(cos φ, sin φ)
        let mut circle_acc = 0.0;
        for (&phi, &cwgt) in circle.nodes.iter().zip(&circle.weights) {
            let (yv, vv) = (r * phi.cos(), r * phi.sin());
            // (x′,u′)-integral with the Parseval weight e^{λ(u′y − v x′)}:
            // complete the square exactly as in the Gutzmer LHS.
            let mut inner = 0.0;
            for (ix, &sx) in rule.nodes.iter().enumerate() {
                for (iu, &su) in rule.nodes.iter().enumerate() {
                    let x = -eps * vv + scale * sx;
                    let u = eps * yv + scale * su;
                    let z = [C64::new(x, yv)];
                    let w = [C64::new(u, vv)];
                    // per-mode amplitudes once per point, then the K-average
                    let mut amps: Vec<(i64, C64)> = Vec::with_capacity(modes.len());
                    for (mode, terms) in &modes {
                        amps.push((mode[0], slice.mode_poly_sum(terms, &z, &w)?));
                    }
                    let kavg = ktrap.integrate(|th| {
                        let mut val = C64::new(0.0, 0.0);
                        for &(m, a) in &amps {
                            let zeta = C64::new(th, big_h[0]);
                            val += a * (C64::new(0.0, m as f64) * zeta).exp();
                        }
                        val.norm_sqr()
                    }) / two_pi;
                    inner += cw[ix] * cw[iu] * (-(sx * sx + su * su)).exp() * kavg;
                }
            }
            circle_acc += cwgt / two_pi * inner * scale * scale * (l * r * r).exp();
        }
        lhs += weight * (2.0 * lam * s).exp() * circle_acc;
    }
    lhs *= golden::t_parseval_constant();

    // coefficient-side series from the pre-Poisson coefficients of f
    let mut rhs = 0.0;
    for (i, slice) in f.slices.iter().enumerate() {
        if slice.is_empty() {
            continue;
        }
        let lam = slice.lambda.value();
        let l = slice.lambda.abs();
        let weight = f.grid.weights[i];
        let mut per_lambda = 0.0;
        for (key, c) in slice.coeffs() {
            let m = key.k_weight[0];
            let beta = key.beta.degree();
            let lval = crate::special::laguerre_function_imag(beta, slice.lambda, &[r], &[0.0])?;
            let energy = (2.0 * beta as f64 + 1.0) * l + lam * lam + (m * m) as f64;
            per_lambda += (-2.0 * m as f64 * big_h[0]).exp()
                * lval
                * (-2.0 * q * energy.sqrt()).exp()
                * c.norm_sqr();
        }
        rhs += weight * (2.0 * lam * s).exp() * per_lambda;
    }
    rhs *= golden::t_parseval_constant();

    Ok(VerificationReport::compare(
        "poisson_forward",
        C64::new(lhs, 0.0),
        C64::new(rhs, 0.0),
        rel_tol,
    )
    .with_param("q", q)
    .with_param("r", r)
    .with_param("H", big_h[0])
    .with_param("s", s))
}

/// Matrix of the group Fourier transform f̂(λ, σ) in the basis
/// φ_γ^λ ⊗ e_σ, assembled in closed coefficient form.
#[derive(Debug, Clone)]
pub struct FourierMatrix {
    pub lambda: TwistedParameter,
    pub sigma: TorusIrrep,
    /// entry (γ, β) = ⟨f̂(λ,σ)(φ_γ ⊗ e), φ_β ⊗ e⟩
    pub entries: BTreeMap<(MultiIndex, MultiIndex), C64>,
}

impl FourierMatrix {
    pub fn hs_norm_sq(&self) -> f64 {
        self.entries.values().map(|v| v.norm_sqr()).sum()
    }
}

/// Parity pairing sign: ∫ φ_{αβ'} φ_{γβ} dx du = (−1)^{Σ|βⱼ−γⱼ|} δ_{αβ} δ_{β'γ}
/// (the non-conjugated pairing of two special Hermite functions).
fn pairing_sign(a: &MultiIndex, b: &MultiIndex) -> f64 {
    let mut s: i64 = 0;
    for j in 0..a.dim() {
        s += (a[j] as i64 - b[j] as i64).abs();
    }
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All σ-weights coupled to a band-limited function's support: the
/// K-integral in f̂ enforces w_σ = −m − sgn(λ)·β′ per coefficient.
pub fn fourier_sigma_band(f: &BandLimitedFunction) -> BTreeSet<Vec<i64>> {
    let mut set = BTreeSet::new();
    let s_met = golden::METAPLECTIC_SIGN;
    for slice in &f.slices {
        let eps = slice.lambda.sign();
        for (key, _) in slice.coeffs() {
            let w: Vec<i64> = key
                .k_weight
                .iter()
                .zip(key.beta.entries())
                .map(|(&m, &b)| -m - (s_met * eps) as i64 * b as i64)
                .collect();
            set.insert(w);
        }
    }
    set
}

/// Group Fourier transform at one λ-node and one σ ∈ K̂, in closed
/// coefficient form: the slice coefficient (α′, β′, m) contributes
/// (2π)^{n/2}|λ|^{−n/2} (−1)^{Σ|α′−β′|} c to entry (γ, β) = (β′, α′) when
/// the K-integral condition σ = −m − sgn(λ)·β′ holds, and nothing
/// otherwise.
pub fn fourier_transform_hm(
    f: &BandLimitedFunction,
    node_index: usize,
    sigma: &TorusIrrep,
) -> Result<FourierMatrix> {
    fourier_transform_with_twist(f, node_index, sigma, &vec![0i64; f.d])
}

fn fourier_transform_with_twist(
    f: &BandLimitedFunction,
    node_index: usize,
    sigma: &TorusIrrep,
    twist: &[i64],
) -> Result<FourierMatrix> {
    if node_index >= f.slices.len() {
        return Err(Error::Domain("fourier_transform: node index out of range".into()));
    }
    let slice = &f.slices[node_index];
    let lambda = slice.lambda;
    if sigma.weight.len() != f.d {
        return Err(Error::DimensionMismatch(
            "fourier_transform: σ-weight has wrong dimension".into(),
        ));
    }
    let s_met = golden::METAPLECTIC_SIGN * lambda.sign();
    let norm = 1.0 / matrix_coefficient_normalization(f.n, lambda);
    let mut entries: BTreeMap<(MultiIndex, MultiIndex), C64> = BTreeMap::new();
    for (key, &c) in slice.coeffs() {
        // K-integral selection: σ + m + s·β′ + twist = 0 coordinatewise
        let coupled = (0..f.d).all(|j| {
            sigma.weight[j] + key.k_weight[j] + (s_met as i64) * key.beta[j] as i64 + twist[j] == 0
        });
        if !coupled {
            continue;
        }
        let sign = pairing_sign(&key.alpha, &key.beta);
        let entry = entries
            .entry((key.beta.clone(), key.alpha.clone()))
            .or_insert(C64::new(0.0, 0.0));
        *entry += c * sign * norm;
    }
    Ok(FourierMatrix {
        lambda,
        sigma: sigma.clone(),
        entries,
    })
}

/// Plancherel check:
/// ‖f‖² = pinned · (2π)^{−n} Σ_σ d_σ Σ_i w_i |λ_i|ⁿ ‖f̂(λ_i,σ)‖²_HS,
/// the pinned constant being the Fourier-in-t Parseval factor (2π)^{−1}.
pub fn plancherel_check(f: &BandLimitedFunction, rel_tol: f64) -> Result<VerificationReport> {
    let lhs = f.norm_sq();
    let rhs = plancherel_rhs_with_twist(f, &vec![0i64; f.d])?;
    Ok(VerificationReport::compare(
        "plancherel",
        C64::new(lhs, 0.0),
        C64::new(rhs, 0.0),
        rel_tol,
    )
    .with_param("pinned_constant", "1/(2π)")
    .with_param("sigma_count", fourier_sigma_band(f).len()))
}

fn plancherel_rhs_with_twist(f: &BandLimitedFunction, twist: &[i64]) -> Result<f64> {
    let mut sigmas = BTreeSet::new();
    let s_met = golden::METAPLECTIC_SIGN;
    for slice in &f.slices {
        let eps = slice.lambda.sign();
        for (key, _) in slice.coeffs() {
            let w: Vec<i64> = (0..f.d)
                .map(|j| -key.k_weight[j] - (s_met * eps) as i64 * key.beta[j] as i64 - twist[j])
                .collect();
            sigmas.insert(w);
        }
    }
    let mut rhs = 0.0;
    for sigma_w in sigmas {
        let sigma = TorusIrrep::new(sigma_w);
        for i in 0..f.grid.len() {
            let mat = fourier_transform_with_twist(f, i, &sigma, twist)?;
            rhs += f.grid.weights[i]
                * f.grid.nodes[i].abs().powi(f.n as i32)
                * mat.hs_norm_sq();
        }
    }
    Ok(golden::t_parseval_constant() * (2.0 * std::f64::consts::PI).powi(-(f.n as i32)) * rhs)
}

/// Polarization probe: the verified Plancherel identity is a quadratic
/// form, so ⟨f, g⟩ computed from coefficients must match the HS pairing
/// of the Fourier transforms.
pub fn plancherel_polarization_check(
    f: &BandLimitedFunction,
    g: &BandLimitedFunction,
    rel_tol: f64,
) -> Result<VerificationReport> {
    // coefficient side
    let mut lhs = C64::new(0.0, 0.0);
    for i in 0..f.grid.len() {
        let sf = &f.slices[i];
        let sg = &g.slices[i];
        let mut inner = C64::new(0.0, 0.0);
        let gmap: BTreeMap<_, _> = sg.coeffs().map(|(k, v)| (k.clone(), *v)).collect();
        for (k, v) in sf.coeffs() {
            if let Some(gv) = gmap.get(k) {
                inner += v * gv.conj();
            }
        }
        lhs += f.grid.weights[i] * inner;
    }
    lhs *= golden::t_parseval_constant();

    // Fourier side
    let mut sigmas = fourier_sigma_band(f);
    sigmas.extend(fourier_sigma_band(g));
    let mut rhs = C64::new(0.0, 0.0);
    for sigma_w in sigmas {
        let sigma = TorusIrrep::new(sigma_w);
        for i in 0..f.grid.len() {
            let mf = fourier_transform_hm(f, i, &sigma)?;
            let mg = fourier_transform_hm(g, i, &sigma)?;
            let mut pair = C64::new(0.0, 0.0);
            for (key, v) in &mf.entries {
                if let Some(gv) = mg.entries.get(key) {
                    pair += v * gv.conj();
                }
            }
            rhs += f.grid.weights[i] * f.grid.nodes[i].abs().powi(f.n as i32) * pair;
        }
    }
    rhs *= golden::t_parseval_constant() * (2.0 * std::f64::consts::PI).powi(-(f.n as i32));
    Ok(VerificationReport::compare("plancherel_polarization", lhs, rhs, rel_tol))
}

/// Complexified-representation norm: the Paley-Wiener right-hand side
/// (2π)^{−2n} Σ_σ d_σ Σ_i w_i |λ_i|ⁿ ‖ρ_σ^λ(z,w,τ,g) f̂(λ_i,σ)‖²_HS.
///
/// The HS norm is assembled from the Gram identity
/// ⟨π_λ(z,w)φ_δ, π_λ(z,w)φ_δ'⟩ = e^{λ(u·y−v·x)}(2π)^{n/2}|λ|^{−n/2} φ_{δδ'}^λ(2iy,2iv),
/// with continued metaplectic and character factors for g = k e^{iH} and
/// the central factor |e^{iλτ}|² = e^{−2λ Im τ}.
pub fn complexified_rep_norm(f: &BandLimitedFunction, p: &ComplexGroupPoint) -> Result<f64> {
    complexified_rep_norm_with_twist(f, p, &vec![0i64; f.d])
}

fn complexified_rep_norm_with_twist(
    f: &BandLimitedFunction,
    p: &ComplexGroupPoint,
    twist: &[i64],
) -> Result<f64> {
    p.validate(f.n, f.d)?;
    let n = f.n;
    let s = p.s();
    let y: Vec<f64> = p.z.iter().map(|z| z.im).collect();
    let v: Vec<f64> = p.w.iter().map(|w| w.im).collect();
    let x: Vec<f64> = p.z.iter().map(|z| z.re).collect();
    let u: Vec<f64> = p.w.iter().map(|w| w.re).collect();
    let sym: f64 = (0..n).map(|j| u[j] * y[j] - v[j] * x[j]).sum();

    // overflow guard on the continued factors
    let band = f.slices.iter().map(|sl| sl.max_k_band()).max().unwrap_or(0) as f64;
    let maxdeg = f
        .slices
        .iter()
        .map(|sl| sl.max_second_degree())
        .max()
        .unwrap_or(0) as f64;
    let lam_max = f.grid.nodes.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let h_max = p.h.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let guard =
        2.0 * lam_max * s.abs() + 2.0 * (2.0 * band + 2.0 * maxdeg) * h_max + lam_max * sym.abs();
    if guard > 700.0 {
        return Err(Error::Overflow(format!(
            "complexified_rep_norm: continued factors reach e^{guard:.1}"
        )));
    }

    let twopi = 2.0 * std::f64::consts::PI;
    let mut total = 0.0;
    let mut sigmas = BTreeSet::new();
    let s_met = golden::METAPLECTIC_SIGN;
    for slice in &f.slices {
        let eps = slice.lambda.sign();
        for (key, _) in slice.coeffs() {
            let wt: Vec<i64> = (0..f.d)
                .map(|j| -key.k_weight[j] - (s_met * eps) as i64 * key.beta[j] as i64 - twist[j])
                .collect();
            sigmas.insert(wt);
        }
    }
    for sigma_w in sigmas {
        let sigma = TorusIrrep::new(sigma_w);
        // |σ^c(g)|² = e^{−2 w_σ·H}
        let sig_decay: f64 = sigma
            .weight
            .iter()
            .zip(&p.h)
            .map(|(&m, &hh)| m as f64 * hh)
            .sum();
        for i in 0..f.grid.len() {
            let lambda = f.slices[i].lambda;
            let mat = fourier_transform_with_twist(f, i, &sigma, twist)?;
            if mat.entries.is_empty() {
                continue;
            }
            // group entries by the column index γ
            let mut by_gamma: BTreeMap<MultiIndex, Vec<(MultiIndex, C64)>> = BTreeMap::new();
            for ((gamma, beta), &val) in &mat.entries {
                by_gamma
                    .entry(gamma.clone())
                    .or_default()
                    .push((beta.clone(), val));
            }
            let zim: Vec<C64> = y.iter().map(|&t| C64::new(0.0, 2.0 * t)).collect();
            let wim: Vec<C64> = v.iter().map(|&t| C64::new(0.0, 2.0 * t)).collect();
            let gram_scale = 1.0 / matrix_coefficient_normalization(n, lambda);
            let mut hs = C64::new(0.0, 0.0);
            for cols in by_gamma.values() {
                for (delta, a) in cols {
                    let eta_d = metaplectic_twisted(&p.k, &p.h, delta, lambda, twist);
                    for (delta2, b) in cols {
                        let eta_d2 = metaplectic_twisted(&p.k, &p.h, delta2, lambda, twist);
                        let gram =
                            special_hermite_closed(delta, delta2, lambda, &zim, &wim)? * gram_scale;
                        hs += a * b.conj() * eta_d * eta_d2.conj() * gram;
                    }
                }
            }
            let lam = lambda.value();
            let factor = (-2.0 * lam * s - 2.0 * sig_decay + lam * sym).exp();
            total += f.grid.weights[i] * f.grid.nodes[i].abs().powi(n as i32) * factor * hs.re;
        }
    }
    Ok(total * twopi.powi(-2 * (n as i32)))
}

fn metaplectic_twisted(
    k: &TorusElement,
    h: &[f64],
    alpha: &MultiIndex,
    lambda: TwistedParameter,
    twist: &[i64],
) -> C64 {
    let base = metaplectic_phase_complexified(k, h, alpha, lambda);
    if twist.iter().all(|&m| m == 0) {
        return base;
    }
    // global character χ_{m₀} continued to k e^{iH}
    let phase: f64 = twist
        .iter()
        .zip(&k.theta)
        .map(|(&m, &t)| m as f64 * t)
        .sum();
    let decay: f64 = twist.iter().zip(h).map(|(&m, &hh)| m as f64 * hh).sum();
    base * C64::new(0.0, phase).exp() * (-decay).exp()
}

/// Paley-Wiener left-hand side at desk scale (n = 1):
/// ∫_{ℍⁿ×K} |f((z,w,τ,g)^{−1} X)|² dX dk′. The t-argument of f is
/// t′ − τ − ½(w·x′ − z·u′), so the t′-integral through the λ-grid
/// Parseval bridge carries the weight e^{−2λ Im(τ + ½(w·x′ − z·u′))};
/// the slice argument g^{−1}·((x′,u′) − (z,w)) is continued through the
/// complex-linear torus action, and the K-modes through g^{−1}k′.
pub fn paley_wiener_lhs(
    f: &BandLimitedFunction,
    p: &ComplexGroupPoint,
    k_points: usize,
    gh_points: usize,
) -> Result<f64> {
    if f.n != 1 {
        return Err(Error::Domain("paley_wiener: implemented for n = 1".into()));
    }
    p.validate(f.n, f.d)?;
    let ktrap = periodic_trapezoid_rule(k_points)?;
    let rule = gauss_hermite_rule(gh_points)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let s = p.s();
    let (x0, y0) = (p.z[0].re, p.z[0].im);
    let (u0, v0) = (p.w[0].re, p.w[0].im);
    let kinv = p.k.inverse();
    let hneg: Vec<f64> = p.h.iter().map(|t| -t).collect();

    let mut acc = 0.0;
    for (i, slice) in f.slices.iter().enumerate() {
        if slice.is_empty() {
            continue;
        }
        let lam = slice.lambda.value();
        let l = slice.lambda.abs();
        let weight = f.grid.weights[i];
        let modes = slice.mode_partition();
        let scale = 1.0 / (l / 2.0).sqrt();
        let cw: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * (t * t).exp())
            .collect();
        let mut inner_total = 0.0;
        for (ix, &sx) in rule.nodes.iter().enumerate() {
            for (iu, &su) in rule.nodes.iter().enumerate() {
                // Gauss-Hermite centred at the real parts; the envelope
                // e^{−L((x′−x)²+(u′−u)²)/2} is rotation invariant.
                let xp = x0 + scale * sx;
                let up = u0 + scale * su;
                let zarg = [C64::new(xp - x0, -y0)];
                let warg = [C64::new(up - u0, -v0)];
                let (zr, wr) = kinv.act_complex(&zarg, &warg, &hneg)?;
                let mut amps: Vec<(i64, C64)> = Vec::with_capacity(modes.len());
                for (mode, terms) in &modes {
                    let poly = slice.mode_poly_sum(terms, &zr, &wr)?;
                    let gauss = special_hermite_gaussian_exponent(slice.lambda, &zr, &wr).exp();
                    amps.push((mode[0], poly * gauss));
                }
                // K-integral over k′: modes continue through g^{−1}k′
                let kavg = ktrap.integrate(|thp| {
                    let mut val = C64::new(0.0, 0.0);
                    for &(m, a) in &amps {
                        let zeta = C64::new(thp - p.k.theta[0], -p.h[0]);
                        val += a * (C64::new(0.0, m as f64) * zeta).exp();
                    }
                    val.norm_sqr()
                }) / two_pi;
                // Parseval weight e^{−2λ Im(τ + ½(w x′ − z u′))}. The
                // amplitudes carry their own Gaussian decay; the
                // compensated weights make the rule a plain ∫…dx′du′.
                let im_c = 0.5 * (v0 * xp - y0 * up);
                inner_total += cw[ix] * cw[iu] * kavg * (-2.0 * lam * (s + im_c)).exp();
            }
        }
        acc += weight * inner_total * scale * scale;
    }
    Ok(acc * golden::t_parseval_constant())
}

/// Two-sided Paley-Wiener check.
pub fn paley_wiener_check(
    f: &BandLimitedFunction,
    p: &ComplexGroupPoint,
    k_points: usize,
    gh_points: usize,
    rel_tol: f64,
) -> Result<VerificationReport> {
    let lhs = paley_wiener_lhs(f, p, k_points, gh_points)?;
    let rhs = complexified_rep_norm(f, p)?;
    Ok(VerificationReport::compare(
        "paley_wiener",
        C64::new(lhs, 0.0),
        C64::new(rhs, 0.0),
        rel_tol,
    )
    .with_param("H", format!("{:?}", p.h))
    .with_param("s", p.s())
    .with_param(
        "im_zw",
        format!("{:.4}", radius(&[p.z[0].im], &[p.w[0].im])),
    ))
}

/// Deviation of ρ_σ^λ(X) from unitarity at a real group element, on the
/// truncated basis: builds the matrix M_{δβ} = ⟨ρ(X)(φ_δ⊗e), φ_β⊗e⟩
/// through quadrature special Hermite values and returns max |M*M − I|
/// over columns |δ| ≤ band (rows run far enough that the truncation tail
/// is below the target accuracy). The metaplectic phase, σ(k) and the
/// central character are unimodular scalars that drop out of M*M.
pub fn rho_unitarity_deviation(
    lambda: TwistedParameter,
    x: f64,
    u: f64,
    band: usize,
    quad: &crate::numerics::QuadratureRule,
) -> Result<f64> {
    let rows = band + 18;
    let cols: Vec<usize> = (0..=band).collect();
    let mut matrix = vec![vec![C64::new(0.0, 0.0); cols.len()]; rows + 1];
    let norm = matrix_coefficient_normalization(1, lambda);
    for (ci, &dc) in cols.iter().enumerate() {
        for (rb, row) in matrix.iter_mut().enumerate() {
            let val = crate::special::special_hermite(
                &MultiIndex::new(vec![dc]),
                &MultiIndex::new(vec![rb]),
                lambda,
                &[C64::new(x, 0.0)],
                &[C64::new(u, 0.0)],
                quad,
            )? / norm;
            row[ci] = val;
        }
    }
    let mut worst = 0.0f64;
    for a in 0..cols.len() {
        for b in 0..cols.len() {
            let mut dot = C64::new(0.0, 0.0);
            for row in &matrix {
                dot += row[a].conj() * row[b];
            }
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - C64::new(want, 0.0)).norm());
        }
    }
    Ok(worst)
}
