#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::process::Command;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weierdiv::dcseq::{DCSequence, LogGrid};
use weierdiv::examples;
use weierdiv::lojafit::{check_assumptions, derivative_growth, estimate_sigma, FailureReason, SigmaSpec};
use weierdiv::parampoly::ParamPoly;
use weierdiv::rootgeom::{calibrate_domain, dist_to_gamma, fiber, sample_gamma, CloudSpec};
use weierdiv::series::PowerSeries2;
use weierdiv::wdiv::{extremal_series, formal_divide, gevrey_fit_ln, ln_derivatives, optimality_probe};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sigma_of(p: &ParamPoly) -> f64 {
    let dom = calibrate_domain(p, 0.5).unwrap();
    estimate_sigma(p, &dom, &SigmaSpec::default()).map_or(f64::NAN, |e| e.sigma_hat)
}

fn sigma_recovery() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for pw in 1..=3u32 {
        let s = sigma_of(&examples::x2_plus_t2p(pw));
        pass &= (0.95..=1.05).contains(&s);
        lines.push(format!("x²+t^{}: {s:.4}", 2 * pw));
    }
    for d in 2..=5usize {
        let s = sigma_of(&examples::xd_minus_t2(d));
        let want = d as f64 / 2.0;
        pass &= (s - want).abs() <= 0.05 * want;
        lines.push(format!("x^{d}−t²: {s:.4}"));
    }
    let s = sigma_of(&examples::hyperbolic_2d());
    pass &= (0.9..=1.1).contains(&s);
    lines.push(format!("x²−(t₁²+t₂²): {s:.4}"));
    outcome(pass, lines.join(", "))
}

fn closed_form_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_rho = 0.0f64;
    let mut worst_dist = 0.0f64;
    for d in 2..=5usize {
        let p = examples::xd_minus_t2(d);
        let dom = calibrate_domain(&p, 0.5).unwrap();
        for _ in 0..1000 {
            let r = dom.delta * 10f64.powf(rng.gen_range(-5.0..0.0));
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let want = r.powf(d as f64 / 2.0) * (d as f64 * theta / 2.0).sin().abs();
            let got = fiber(&p, &dom, Complex64::from_polar(r, theta)).unwrap().rho;
            worst_rho = worst_rho.max((got - want).abs() / want);
        }
        let cloud = sample_gamma(&p, &dom, &CloudSpec::default()).unwrap();
        let angle = std::f64::consts::PI / d as f64;
        for k in 0..12 {
            let r = dom.delta * 10f64.powf(-0.4 * k as f64);
            let want = r * angle.sin();
            let got = dist_to_gamma(&cloud, Complex64::from_polar(r, angle));
            worst_dist = worst_dist.max((got - want).abs() / want);
        }
    }
    outcome(
        worst_rho <= 1e-9 && worst_dist <= 1e-6,
        format!("max rel err ρ {worst_rho:.2e}, d(·,Γ) {worst_dist:.2e}"),
    )
}

fn classifier() -> Outcome {
    let report = |p: &ParamPoly| check_assumptions(p, &calibrate_domain(p, 0.5).unwrap()).unwrap();
    let mut pass = true;
    for d in 2..=5 {
        pass &= report(&examples::xd_minus_t2(d)).passes;
    }
    for pw in 1..=3 {
        pass &= report(&examples::x2_plus_t2p(pw)).passes;
    }
    let overlap = report(&examples::overlap_2d());
    pass &= !overlap.passes && overlap.failure_reason == FailureReason::Overlap2d;
    let tang = report(&examples::tangential());
    let mu = tang.pairwise_mu.iter().flatten().flatten().fold(0.0f64, |a, &b| a.max(b));
    pass &= !tang.passes && tang.failure_reason == FailureReason::TangentialContact && (mu - 2.0).abs() <= 0.1;
    outcome(
        pass,
        format!(
            "overlap → {:?}, tangential → {:?} with μ̂ = {mu:.4}",
            overlap.failure_reason, tang.failure_reason
        ),
    )
}

fn random_series(rng: &mut ChaCha8Rng, n: u32) -> PowerSeries2 {
    let mut s = PowerSeries2::zero(1, n as usize).unwrap();
    for _ in 0..rng.gen_range(1..14) {
        let k = rng.gen_range(0..=n);
        let l = rng.gen_range(0..=n - k);
        let c = BigRational::new(BigInt::from(rng.gen_range(-30..=30)), BigInt::from(rng.gen_range(1..=17)));
        s.add_term(k, &[l], c).unwrap();
    }
    s
}

fn division_correctness() -> Outcome {
    let divisors = [
        examples::x2_plus_t2p(1),
        examples::x2_plus_t2p(2),
        examples::xd_minus_t2(3),
        examples::xd_minus_t2(4),
        examples::tangential(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nonzero = 0;
    let mut mismatches = 0;
    let inputs = 60;
    for i in 0..inputs {
        let p = &divisors[i % divisors.len()];
        let f = random_series(&mut rng, 24);
        let res = formal_divide(&f, p, 24).unwrap();
        if res.residual_max != 0.0 || !weierdiv::wdiv::residual(&f, p, &res.q, &res.r, 24).unwrap().is_empty() {
            nonzero += 1;
        }
        let small = random_series(&mut rng, 12);
        let res = formal_divide(&small, p, 12).unwrap();
        let (q, r) = oracle::linear_solve_oracle(&small, p, 12);
        if res.q != q || res.r != r {
            mismatches += 1;
        }
    }
    outcome(
        nonzero == 0 && mismatches == 0,
        format!("{inputs} inputs: {nonzero} nonzero residuals at N=24, {mismatches} oracle mismatches at N=12"),
    )
}

fn regularity_loss() -> Outcome {
    let seq = DCSequence::gevrey(1.0, 96).unwrap();
    let f = extremal_series(&seq, 1, 96).unwrap();
    let res = formal_divide(&f, &examples::xd_minus_t2(4), 96).unwrap();
    // even-degree stream of r_0 only
    let stream: Vec<f64> = ln_derivatives(&res.r[0].t_stream(0, 0))
        .into_iter()
        .enumerate()
        .map(|(l, v)| if l % 2 == 0 { v } else { f64::NEG_INFINITY })
        .collect();
    let alpha = gevrey_fit_ln(&stream).map_or(f64::NAN, |f| f.alpha_hat);
    let probe = optimality_probe(&DCSequence::gevrey(1.0, 48).unwrap(), 4, 10).unwrap();
    let lb = probe.lower_bound.unwrap_or(f64::NAN);
    outcome(
        (alpha - 2.0).abs() <= 0.15 && lb > 0.0 && probe.rows.len() == 11,
        format!("α̂ = {alpha:.4}, lower-bound constant {lb:.4}"),
    )
}

fn sequence_toolkit() -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let seq = DCSequence::gevrey(alpha, 48).unwrap();
        for j in 0..=12 {
            let rec = seq.legendre_recover(j, &LogGrid::covering(&seq, j, 20_000)).unwrap();
            worst = worst.max((rec.value - seq.value(j).unwrap()).abs() / seq.value(j).unwrap());
        }
    }
    let mut certs = true;
    for seq in [
        DCSequence::gevrey(0.5, 48).unwrap(),
        DCSequence::gevrey(1.0, 48).unwrap(),
        DCSequence::gevrey(2.0, 48).unwrap(),
        DCSequence::gevrey_log(1.0, 1.0, 48).unwrap(),
    ] {
        let r = seq.check_regularity();
        certs &= r.log_convex && r.moderate_growth_a.is_finite() && r.moderate_growth_a >= 1.0;
    }
    let rejected = !DCSequence::explicit(vec![1.0, 1.0, 3.0, 4.0]).unwrap().check_regularity().log_convex;
    outcome(
        worst <= 1e-3 && certs && rejected,
        format!("Legendre max rel err {worst:.2e}, certificates {certs}, counterexample rejected {rejected}"),
    )
}

fn derivative_bound() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (p, sigma) in [(examples::x2_plus_t2p(1), 1.0), (examples::xd_minus_t2(4), 2.0)] {
        let dom = calibrate_domain(&p, 0.5).unwrap();
        let cloud = sample_gamma(&p, &dom, &CloudSpec::default()).unwrap();
        let g = derivative_growth(&cloud, &dom, 6).unwrap();
        pass &= g.slope <= sigma + 0.15;
        lines.push(format!("{p}: slope {:.4} (σ = {sigma})", g.slope));
    }
    outcome(pass, lines.join(", "))
}

fn verify_json(seed: &str) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_weierdiv"))
        .args(["--seed", seed, "verify", "--format", "json"])
        .env("WEIERDIV_THREADS", "2")
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn determinism() -> Outcome {
    let (a, code_a) = verify_json("11");
    let (b, code_b) = verify_json("11");
    outcome(
        a == b && !a.is_empty() && code_a == 0 && code_b == 0,
        format!("{} bytes, exit codes {code_a}/{code_b}", a.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("σ recovery", sigma_recovery),
        ("closed-form ρ and d(·,Γ)", closed_form_geometry),
        ("assumption classifier", classifier),
        ("division correctness", division_correctness),
        ("optimality / regularity loss", regularity_loss),
        ("sequence toolkit", sequence_toolkit),
        ("1/P derivative bound", derivative_bound),
        ("verify determinism", determinism),
    ];
    let mut failures = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let res = run();
        println!("{} criterion {}: {name}: {}", if res.pass { "PASS" } else { "FAIL" }, i + 1, res.detail);
        if !res.pass {
            failures.push(i + 1);
        }
    }
    if !failures.is_empty() {
        eprintln!("failing criteria: {failures:?}");
        std::process::exit(1);
    }
}
