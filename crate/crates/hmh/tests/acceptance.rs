//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line with the measured error and its pinned tolerance.
//!
//! Every identity checked here is an exact theorem; the assertions run
//! the two independent computational routes at the stated truncation and
//! quadrature parameters and require agreement at the stated tolerance,
//! inside the stated wall-time budget.

use std::time::Instant;

use hmh::harness::{
    self, gram_deviation, heat_multiplier_deviation, laguerre_series_deviation,
    make_test_function_seeded, metaplectic_intertwining_deviation, RunConfig, Suite,
    TestFunctionKind,
};
use hmh::numerics::{gauss_hermite_rule, MultiIndex};
use hmh::rng::SplitMix64;
use hmh::special::TwistedParameter;
use hmh::spectral::{
    gutzmer_check, paley_wiener_check, paley_wiener_lhs, plancherel_check,
    plancherel_polarization_check, poisson_identity_check, rho_unitarity_deviation,
    ComplexGroupPoint,
};
use hmh::twisted::{
    bergman_norm, direct_integral_norm, heat_multiplier_apply, segal_bargmann, TwistedSlice,
};
use hmh::C64;

fn report(criterion: u32, name: &str, pass: bool, detail: String, elapsed: f64, budget: f64) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion:>2} [{status}] {name}: {detail} ({elapsed:.1}s / budget {budget:.0}s)");
    assert!(pass, "criterion {criterion} failed: {detail}");
    assert!(
        elapsed < budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.1}s ≥ {budget:.0}s"
    );
}

#[test]
fn criterion_01_special_function_layer() {
    let start = Instant::now();
    let mut worst_gram = 0.0f64;
    for n in [1usize, 2] {
        for lv in [0.5f64, 1.0, 3.0, -2.0] {
            worst_gram = worst_gram.max(gram_deviation(n, lv).unwrap());
        }
    }
    let worst_laguerre = laguerre_series_deviation().unwrap();
    let pass = worst_gram <= 1e-10 && worst_laguerre <= 1e-12;
    report(
        1,
        "special-function layer",
        pass,
        format!("gram deviation {worst_gram:.2e} (tol 1e-10), laguerre {worst_laguerre:.2e} (tol 1e-12)"),
        start.elapsed().as_secs_f64(),
        5.0,
    );
}

#[test]
fn criterion_02_twisted_heat_identity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for lv in [1.5f64, -1.5] {
        for t in [0.2f64, 1.0] {
            worst = worst.max(heat_multiplier_deviation(lv, t, 40).unwrap());
        }
    }
    report(
        2,
        "twisted heat identity e^{-tL_λ}f = f ∗_λ p_t^λ",
        worst <= 1e-8,
        format!("worst pointwise rel deviation {worst:.2e} (tol 1e-8)"),
        start.elapsed().as_secs_f64(),
        30.0,
    );
}

#[test]
fn criterion_03_twisted_heat_kernel_transform_isometry() {
    let start = Instant::now();
    let t = 0.4;
    let lambda = TwistedParameter::new(1.0).unwrap();
    let mut worst = 0.0f64;
    for rep in 0..5u64 {
        let mut rng = SplitMix64::new(3100 + rep);
        let mut slice = TwistedSlice::new(lambda, 1, 0);
        for a in 0..=3usize {
            for b in 0..=3usize {
                slice
                    .insert(
                        MultiIndex::new(vec![a]),
                        MultiIndex::new(vec![b]),
                        vec![],
                        C64::new(rng.next_symmetric(), rng.next_symmetric()),
                    )
                    .unwrap();
            }
        }
        let image = heat_multiplier_apply(&slice, t);
        let norm = bergman_norm(&image, t, 9).unwrap();
        worst = worst.max((norm / slice.norm_sq() - 1.0).abs());
    }
    report(
        3,
        "twisted heat kernel transform is an isometry onto ℬ_t^λ",
        worst <= 1e-5,
        format!("worst |ratio−1| over 5 random slices: {worst:.2e} (tol 1e-5)"),
        start.elapsed().as_secs_f64(),
        60.0,
    );
}

#[test]
fn criterion_04_direct_integral_isometry() {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let g_rule = gauss_hermite_rule(24).unwrap();
    let mut worst = 0.0f64;
    for rep in 0..10u64 {
        let f = make_test_function_seeded(&cfg, TestFunctionKind::RandomBand, 4000 + rep).unwrap();
        let img = segal_bargmann(&f, cfg.t).unwrap();
        let lhs = direct_integral_norm(&img, cfg.t, 2 * cfg.m_trunc + 3, &g_rule).unwrap();
        worst = worst.max((lhs / f.norm_sq() - 1.0).abs());
    }
    report(
        4,
        "Segal-Bargmann direct-integral isometry (full pipeline)",
        worst <= 1e-4,
        format!("worst |ratio−1| over 10 band-limited functions: {worst:.2e} (tol 1e-4)"),
        start.elapsed().as_secs_f64(),
        180.0,
    );
}

#[test]
fn criterion_05_gutzmer_two_sided() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for rep in 0..10u64 {
        let mut rng = SplitMix64::new(5000 + rep);
        let lv = if rep % 2 == 0 { 1.0 } else { -1.5 };
        let lambda = TwistedParameter::new(lv).unwrap();
        let mut slice = TwistedSlice::new(lambda, 1, 0);
        for a in 0..=3usize {
            for b in 0..=3usize {
                slice
                    .insert(
                        MultiIndex::new(vec![a]),
                        MultiIndex::new(vec![b]),
                        vec![],
                        C64::new(rng.next_symmetric(), rng.next_symmetric()),
                    )
                    .unwrap();
            }
        }
        let radius = 0.1 + 0.5 * rng.next_f64();
        let angle = 2.0 * std::f64::consts::PI * rng.next_f64();
        let rep_check = gutzmer_check(
            &slice,
            &[radius * angle.cos()],
            &[radius * angle.sin()],
            16,
            9,
            1e-5,
        )
        .unwrap();
        worst = worst.max(rep_check.rel_err);
    }
    report(
        5,
        "Gutzmer two-sided equality",
        worst <= 1e-5,
        format!("worst rel error over 10 random slices, |Im| ≤ 0.6: {worst:.2e} (tol 1e-5)"),
        start.elapsed().as_secs_f64(),
        120.0,
    );
}

#[test]
fn criterion_06_poisson_forward_identity() {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let mut worst = 0.0f64;
    for (rep, kind) in [
        (0u64, TestFunctionKind::SingleCoeff),
        (1, TestFunctionKind::RandomBand),
        (2, TestFunctionKind::LemmaBlock),
    ] {
        let f = make_test_function_seeded(&cfg, kind, 6000 + rep).unwrap();
        let check = poisson_identity_check(
            &f,
            1.0,
            0.3,
            &[0.2],
            0.1,
            cfg.circle_points,
            cfg.k_points,
            2 * cfg.m_trunc + 4,
            1e-4,
        )
        .unwrap();
        worst = worst.max(check.rel_err);
    }
    report(
        6,
        "Poisson forward norm identity (orbit integral vs series)",
        worst <= 1e-4,
        format!("worst rel error, q=1, r=0.3, H=0.2: {worst:.2e} (tol 1e-4)"),
        start.elapsed().as_secs_f64(),
        180.0,
    );
}

#[test]
fn criterion_07_plancherel() {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let mut worst = 0.0f64;
    for rep in 0..10u64 {
        let f = make_test_function_seeded(&cfg, TestFunctionKind::RandomBand, 7000 + rep).unwrap();
        let check = plancherel_check(&f, 1e-6).unwrap();
        worst = worst.max(check.rel_err);
    }
    let f = make_test_function_seeded(&cfg, TestFunctionKind::RandomBand, 7100).unwrap();
    let g = make_test_function_seeded(&cfg, TestFunctionKind::RandomBand, 7101).unwrap();
    let polar = plancherel_polarization_check(&f, &g, 1e-6).unwrap();
    let pass = worst <= 1e-6 && polar.passed;
    report(
        7,
        "Plancherel theorem with pinned Fourier constant",
        pass,
        format!(
            "worst rel error {worst:.2e} (tol 1e-6), polarization rel {:.2e}",
            polar.rel_err
        ),
        start.elapsed().as_secs_f64(),
        60.0,
    );
}

#[test]
fn criterion_08_paley_wiener() {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let p = ComplexGroupPoint {
        z: vec![C64::new(0.0, 0.2)],
        w: vec![C64::new(0.0, 0.0)],
        tau: C64::new(0.0, 0.1),
        k: hmh::groups::TorusElement::new(vec![0.4]),
        h: vec![0.25],
    };
    let gh = 2 * (2 * cfg.m_trunc) + 8;
    // lemma-form blocks
    let mut worst = 0.0f64;
    for rep in 0..2u64 {
        let f = make_test_function_seeded(&cfg, TestFunctionKind::LemmaBlock, 8000 + rep).unwrap();
        let check = paley_wiener_check(&f, &p, cfg.k_points, gh, 1e-4).unwrap();
        worst = worst.max(check.rel_err);
    }
    // two-block sum with distinct K-weights and its cross term
    let f1 = make_test_function_seeded(&cfg, TestFunctionKind::LemmaBlock, 8010).unwrap();
    let mut f2 = make_test_function_seeded(&cfg, TestFunctionKind::LemmaBlock, 8017).unwrap();
    let weight_of = |f: &hmh::twisted::BandLimitedFunction| {
        harness::block_support(f).iter().next().map(|(m, _)| m.clone())
    };
    if weight_of(&f1) == weight_of(&f2) {
        // shift every K-weight of f2 by one to land in a different block
        f2 = {
            let mut slices = Vec::new();
            for sf in &f2.slices {
                let mut s = TwistedSlice::new(sf.lambda, sf.n, sf.d);
                for (key, &c) in sf.coeffs() {
                    let m: Vec<i64> = key.k_weight.iter().map(|&w| w + 1).collect();
                    s.insert(key.alpha.clone(), key.beta.clone(), m, c).unwrap();
                }
                slices.push(s);
            }
            hmh::twisted::BandLimitedFunction::new(f2.grid.clone(), slices, f2.n, f2.d).unwrap()
        };
    }
    let sum = harness::add_functions(&f1, &f2).unwrap();
    let l1 = paley_wiener_lhs(&f1, &p, cfg.k_points, gh).unwrap();
    let l2 = paley_wiener_lhs(&f2, &p, cfg.k_points, gh).unwrap();
    let l12 = paley_wiener_lhs(&sum, &p, cfg.k_points, gh).unwrap();
    let cross = (l12 - l1 - l2).abs() / (l1 + l2);
    let sum_check = paley_wiener_check(&sum, &p, cfg.k_points, gh, 1e-4).unwrap();
    worst = worst.max(sum_check.rel_err);
    let pass = worst <= 1e-4 && cross <= 1e-6;
    report(
        8,
        "Paley-Wiener norm identity at complexified points",
        pass,
        format!("worst rel error {worst:.2e} (tol 1e-4), block cross-term {cross:.2e} (tol 1e-6)"),
        start.elapsed().as_secs_f64(),
        180.0,
    );
}

#[test]
fn criterion_09_metaplectic_and_unitarity() {
    let start = Instant::now();
    let met = metaplectic_intertwining_deviation(9001).unwrap();
    let quad = gauss_hermite_rule(48).unwrap();
    let mut rho = 0.0f64;
    let mut rng = SplitMix64::new(9002);
    for &lv in &[1.0, -2.0] {
        let lambda = TwistedParameter::new(lv).unwrap();
        for _ in 0..2 {
            let x = rng.next_symmetric();
            let u = rng.next_symmetric();
            rho = rho.max(rho_unitarity_deviation(lambda, x, u, 4, &quad).unwrap());
        }
    }
    let pass = met <= 1e-9 && rho <= 1e-10;
    report(
        9,
        "metaplectic intertwining and ρ_σ^λ unitarity",
        pass,
        format!("intertwining deviation {met:.2e} (tol 1e-9), unitarity {rho:.2e} (tol 1e-10)"),
        start.elapsed().as_secs_f64(),
        60.0,
    );
}

#[test]
fn criterion_10_deterministic_reports() {
    let start = Instant::now();
    // in-process run twice
    let cfg = RunConfig::default();
    let r1 = harness::run_suite(&cfg, Suite::All).unwrap();
    let r2 = harness::run_suite(&cfg, Suite::All).unwrap();
    let json1 = r1.to_json(false);
    let json2 = r2.to_json(false);
    let in_process = json1 == json2 && r1.overall_pass;

    // and through the CLI binary, as shipped
    let exe = env!("CARGO_BIN_EXE_hmh");
    let tmp = std::env::temp_dir();
    let out1 = tmp.join("hmh_acceptance_run1.json");
    let out2 = tmp.join("hmh_acceptance_run2.json");
    let mut cli_ok = true;
    for out in [&out1, &out2] {
        let status = std::process::Command::new(exe)
            .args(["verify", "all", "--seed", "42", "--json"])
            .arg(out)
            .stdout(std::process::Stdio::null())
            .status()
            .expect("run hmh binary");
        cli_ok &= status.success();
    }
    let b1 = std::fs::read(&out1).unwrap();
    let b2 = std::fs::read(&out2).unwrap();
    let pass = in_process && cli_ok && b1 == b2;
    report(
        10,
        "byte-identical JSON across repeated seeded runs",
        pass,
        format!(
            "in-process identical: {in_process}, cli identical: {}, cli exit ok: {cli_ok}",
            b1 == b2
        ),
        start.elapsed().as_secs_f64(),
        300.0,
    );
}
