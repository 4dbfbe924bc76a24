//! The worked-example verification matrix behind `weierdiv verify`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use weierdiv::dcseq::{DCSequence, LogGrid};
use weierdiv::examples;
use weierdiv::io::{parse_poly, parse_sequence, parse_series, AnySeries};
use weierdiv::lojafit::{check_assumptions, derivative_growth, estimate_sigma, FailureReason, SigmaSpec};
use weierdiv::parampoly::ParamPoly;
use weierdiv::rootgeom::{calibrate_domain, dist_to_gamma, fiber, sample_gamma, CloudSpec};
use weierdiv::series::PowerSeries2;
use weierdiv::wdiv::{anisotropy_probe, extremal_series, formal_divide, gevrey_fit_ln, ln_derivatives, optimality_probe, substitute_check};

use crate::data;

pub const ETA: f64 = 0.5;
pub const FIBER_POINTS: usize = 250;
pub const DIVISION_INPUTS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub value: Option<f64>,
    pub expected: String,
    pub passes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub eta: f64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

fn check(id: impl Into<String>, value: f64, expected: impl Into<String>, passes: bool) -> Check {
    Check {
        id: id.into(),
        value: Some(value),
        expected: expected.into(),
        passes: passes && value.is_finite(),
        detail: None,
    }
}

fn flag(id: impl Into<String>, expected: impl Into<String>, passes: bool, detail: Option<String>) -> Check {
    Check {
        id: id.into(),
        value: None,
        expected: expected.into(),
        passes,
        detail,
    }
}

fn failed(id: impl Into<String>, expected: impl Into<String>, err: impl std::fmt::Display) -> Check {
    flag(id, expected, false, Some(err.to_string()))
}

type Job = Box<dyn Fn(u64) -> Vec<Check> + Send + Sync>;

fn sigma_job(name: &'static str, p: ParamPoly, lo: f64, hi: f64) -> Job {
    Box::new(move |_| {
        let id = format!("sigma/{name}");
        let expected = format!("[{lo:.3}, {hi:.3}]");
        let est = calibrate_domain(&p, ETA).and_then(|dom| estimate_sigma(&p, &dom, &SigmaSpec::default()));
        vec![match est {
            Ok(e) => check(id, e.sigma_hat, expected, (lo..=hi).contains(&e.sigma_hat)),
            Err(e) => failed(id, expected, e),
        }]
    })
}

fn assumption_job(name: &'static str, p: ParamPoly, want: FailureReason) -> Job {
    Box::new(move |_| {
        let id = format!("assumptions/{name}");
        let expected = format!("{want:?}");
        let rep = calibrate_domain(&p, ETA).and_then(|dom| check_assumptions(&p, &dom));
        let rep = match rep {
            Ok(r) => r,
            Err(e) => return vec![failed(id, expected, e)],
        };
        let worst_mu = rep.pairwise_mu.iter().flatten().flatten().fold(0.0f64, |a, &b| a.max(b));
        let mut out = vec![flag(
            id.clone(),
            expected,
            rep.failure_reason == want && rep.passes == (want == FailureReason::None),
            Some(format!("{:?}", rep.failure_reason)),
        )];
        if want == FailureReason::TangentialContact {
            out.push(check(format!("{id}/mu"), worst_mu, "2 ± 0.1", (worst_mu - 2.0).abs() <= 0.1));
        }
        out
    })
}

fn fiber_job(d: usize) -> Job {
    Box::new(move |seed| {
        let p = examples::xd_minus_t2(d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((d as u64) << 32));
        let id = format!("fiber/xd_minus_t2_d{d}");
        let dom = match calibrate_domain(&p, ETA) {
            Ok(dom) => dom,
            Err(e) => return vec![failed(id, "rel err ≤ 1e-9", e)],
        };
        let mut worst = 0.0f64;
        for _ in 0..FIBER_POINTS {
            let r = dom.delta * 10f64.powf(rng.gen_range(-4.0..0.0));
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let want = r.powf(d as f64 / 2.0) * (d as f64 * theta / 2.0).sin().abs();
            let err = match fiber(&p, &dom, Complex64::from_polar(r, theta)) {
                Ok(f) => (f.rho - want).abs() / want.max(f64::MIN_POSITIVE),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(err);
        }
        let mut out = vec![check(id, worst, "rel err ≤ 1e-9", worst <= 1e-9)];

        let id = format!("distance/xd_minus_t2_d{d}");
        let cloud = match sample_gamma(&p, &dom, &CloudSpec::default()) {
            Ok(c) => c,
            Err(e) => {
                out.push(failed(id, "rel err ≤ 1e-6", e));
                return out;
            }
        };
        let mut worst = 0.0f64;
        for k in 0..8 {
            let r = dom.delta * 10f64.powf(-(k as f64) * 0.5);
            let angle = std::f64::consts::PI / d as f64;
            let want = r * angle.sin();
            let got = dist_to_gamma(&cloud, Complex64::from_polar(r, angle));
            worst = worst.max((got - want).abs() / want);
        }
        out.push(check(id, worst, "rel err ≤ 1e-6", worst <= 1e-6));
        out
    })
}

fn growth_job(name: &'static str, p: ParamPoly, sigma: f64) -> Job {
    Box::new(move |_| {
        let id = format!("inverse_derivatives/{name}");
        let expected = format!("slope ≤ {:.2}", sigma + 0.15);
        let res = calibrate_domain(&p, ETA).and_then(|dom| {
            let cloud = sample_gamma(&p, &dom, &CloudSpec::default())?;
            derivative_growth(&cloud, &dom, 6)
        });
        vec![match res {
            Ok(g) => check(id, g.slope, expected, g.slope <= sigma + 0.15),
            Err(e) => failed(id, expected, e),
        }]
    })
}

/// Random exact series in `x, t` with small rational coefficients.
pub fn random_series(rng: &mut impl Rng, n: usize) -> PowerSeries2 {
    let mut s = PowerSeries2::zero(1, n).expect("valid order");
    for _ in 0..rng.gen_range(1..12) {
        let k = rng.gen_range(0..=n as u32);
        let l = rng.gen_range(0..=(n as u32 - k));
        let c = BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=9)));
        s.add_term(k, &[l], c).expect("within order");
    }
    s
}

pub fn division_divisors() -> Vec<(&'static str, ParamPoly)> {
    vec![
        ("x2_plus_t2", examples::x2_plus_t2p(1)),
        ("x2_plus_t4", examples::x2_plus_t2p(2)),
        ("xd_minus_t2_d3", examples::xd_minus_t2(3)),
        ("xd_minus_t2_d4", examples::xd_minus_t2(4)),
        ("tangential", examples::tangential()),
    ]
}

fn division_job() -> Job {
    Box::new(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
        let divisors = division_divisors();
        let mut bad = 0usize;
        let mut detail = None;
        for i in 0..DIVISION_INPUTS {
            let (name, p) = &divisors[i % divisors.len()];
            let f = random_series(&mut rng, 24);
            match formal_divide(&f, p, 24) {
                Ok(res) if res.residual_max == 0.0 => {}
                Ok(res) => {
                    bad += 1;
                    detail = Some(format!("{name}: residual {:e}", res.residual_max));
                }
                Err(e) => {
                    bad += 1;
                    detail = Some(format!("{name}: {e}"));
                }
            }
        }
        let mut out = vec![Check {
            detail,
            ..check("division/exact_residual_n24", bad as f64, "0 nonzero residuals", bad == 0)
        }];

        let sub = |id: &str, f: PowerSeries2, d: usize, n: usize| match formal_divide(&f, &examples::xd_minus_t2(d), n)
            .and_then(|res| substitute_check(&f, &res, d))
        {
            Ok(c) => flag(id, "identity holds", c.passes, Some(format!("max defect {:e}", c.max_defect))),
            Err(e) => failed(id, "identity holds", e),
        };
        let ones = vec![BigRational::from_integer(1.into()); 11];
        out.push(sub(
            "division/substitution_d3",
            PowerSeries2::from_x_coeffs(1, 12, &ones).expect("valid"),
            3,
            12,
        ));
        let g1 = DCSequence::gevrey(1.0, 16).expect("valid");
        let facts: Vec<BigRational> = (0..=16).map(|k| g1.exact_value(k).expect("in range")).collect();
        out.push(sub(
            "division/substitution_d4_factorial",
            PowerSeries2::from_x_coeffs(1, 16, &facts).expect("valid"),
            4,
            16,
        ));
        out
    })
}

fn optimality_job() -> Job {
    Box::new(|_| {
        let mut out = Vec::new();
        let id = "optimality/gevrey1_d4_alpha";
        let fit = DCSequence::gevrey(1.0, 96)
            .and_then(|seq| extremal_series(&seq, 1, 96))
            .and_then(|f| formal_divide(&f, &examples::xd_minus_t2(4), 96))
            .and_then(|res| gevrey_fit_ln(&ln_derivatives(&res.r[0].t_stream(0, 0))));
        out.push(match fit {
            Ok(f) => check(id, f.alpha_hat, "2 ± 0.15", (f.alpha_hat - 2.0).abs() <= 0.15),
            Err(e) => failed(id, "2 ± 0.15", e),
        });
        for d in [2usize, 4] {
            let id = format!("optimality/gevrey1_d{d}_lower_bound");
            let rep = DCSequence::gevrey(1.0, 48).and_then(|seq| optimality_probe(&seq, d, 10));
            out.push(match rep {
                Ok(r) => {
                    let lb = r.lower_bound.unwrap_or(f64::NAN);
                    check(id, lb, "> 0", lb > 0.0)
                }
                Err(e) => failed(id, "> 0", e),
            });
        }
        let id = "anisotropy/x2_plus_t2";
        let rep = DCSequence::gevrey(1.0, 24)
            .and_then(|seq| extremal_series(&seq, 1, 24))
            .and_then(|f| anisotropy_probe(&examples::x2_plus_t2p(1), &f, 24));
        out.push(match rep {
            Ok(r) => {
                let gap = r.alpha_gap.unwrap_or(f64::NAN);
                check(id, gap, "gap ≤ 0.2", gap <= 0.2)
            }
            Err(e) => failed(id, "gap ≤ 0.2", e),
        });
        out
    })
}

fn sequence_job() -> Job {
    Box::new(|_| {
        let mut out = Vec::new();
        for alpha in [0.5, 1.0, 2.0] {
            let id = format!("sequence/legendre_gevrey_{alpha}");
            let worst = DCSequence::gevrey(alpha, 48).and_then(|seq| {
                let mut worst = 0.0f64;
                for j in 0..=12 {
                    let grid = LogGrid::covering(&seq, j, 20_000);
                    let rec = seq.legendre_recover(j, &grid)?;
                    worst = worst.max((rec.ln_value - seq.ln_value(j)?).exp_m1().abs());
                }
                Ok(worst)
            });
            out.push(match worst {
                Ok(w) => check(id, w, "rel err ≤ 1e-3", w <= 1e-3),
                Err(e) => failed(id, "rel err ≤ 1e-3", e),
            });
        }
        for (name, text) in [("gevrey_1", data::SEQ_GEVREY_1), ("gevrey_log_1_1", data::SEQ_GEVREY_LOG_1_1)] {
            let id = format!("sequence/regularity_{name}");
            out.push(match parse_sequence(text) {
                Ok(seq) => {
                    let r = seq.check_regularity();
                    flag(
                        id,
                        "log-convex, moderate growth",
                        r.log_convex && r.moderate_growth_a.is_finite(),
                        Some(format!("A = {:.4}", r.moderate_growth_a)),
                    )
                }
                Err(e) => failed(id, "log-convex, moderate growth", e),
            });
        }
        let id = "sequence/not_log_convex_rejected";
        out.push(match parse_sequence(data::SEQ_NOT_LOG_CONVEX) {
            Ok(seq) => flag(id, "rejected", !seq.check_regularity().log_convex, None),
            Err(e) => failed(id, "rejected", e),
        });
        out
    })
}

fn bundled_job() -> Job {
    Box::new(|_| {
        let mut out: Vec<Check> = data::polynomials()
            .into_iter()
            .map(|b| {
                let id = format!("bundled/{}", b.file);
                match parse_poly(b.text) {
                    Ok(p) => flag(id, "matches example", p == (b.expected)(), None),
                    Err(e) => failed(id, "matches example", e),
                }
            })
            .collect();
        out.push(match parse_series(data::SERIES_X_ONLY) {
            Ok(AnySeries::Exact(s)) => flag("bundled/series_x_only_n12.json", "x-only exact series", s.is_x_only(), None),
            Ok(_) => flag("bundled/series_x_only_n12.json", "x-only exact series", false, Some("float mode".into())),
            Err(e) => failed("bundled/series_x_only_n12.json", "x-only exact series", e),
        });
        out
    })
}

fn jobs() -> Vec<Job> {
    let mut jobs = vec![bundled_job(), sequence_job()];
    for (pw, name) in [(1, "x2_plus_t2"), (2, "x2_plus_t4"), (3, "x2_plus_t6")] {
        jobs.push(sigma_job(name, examples::x2_plus_t2p(pw), 0.95, 1.05));
    }
    for (d, name) in [(2, "xd_minus_t2_d2"), (3, "xd_minus_t2_d3"), (4, "xd_minus_t2_d4"), (5, "xd_minus_t2_d5")] {
        let s = d as f64 / 2.0;
        jobs.push(sigma_job(name, examples::xd_minus_t2(d), 0.95 * s, 1.05 * s));
    }
    jobs.push(sigma_job("x2_minus_t1sq_minus_t2sq", examples::hyperbolic_2d(), 0.9, 1.1));
    for (d, name) in [(2, "xd_minus_t2_d2"), (3, "xd_minus_t2_d3"), (4, "xd_minus_t2_d4"), (5, "xd_minus_t2_d5")] {
        jobs.push(assumption_job(name, examples::xd_minus_t2(d), FailureReason::None));
    }
    for (pw, name) in [(1, "x2_plus_t2"), (2, "x2_plus_t4"), (3, "x2_plus_t6")] {
        jobs.push(assumption_job(name, examples::x2_plus_t2p(pw), FailureReason::None));
    }
    jobs.push(assumption_job("overlap_2d", examples::overlap_2d(), FailureReason::Overlap2d));
    jobs.push(assumption_job("tangential", examples::tangential(), FailureReason::TangentialContact));
    for d in 2..=5 {
        jobs.push(fiber_job(d));
    }
    jobs.push(growth_job("x2_plus_t2", examples::x2_plus_t2p(1), 1.0));
    jobs.push(growth_job("xd_minus_t2_d4", examples::xd_minus_t2(4), 2.0));
    jobs.push(division_job());
    jobs.push(optimality_job());
    jobs
}

/// Runs every check; the report depends only on `seed`.
pub fn run(seed: u64) -> VerifyReport {
    let checks: Vec<Check> = jobs().par_iter().map(|job| job(seed)).collect::<Vec<_>>().into_iter().flatten().collect();
    let passed = checks.iter().filter(|c| c.passes).count();
    let failed = checks.len() - passed;
    VerifyReport {
        seed,
        eta: ETA,
        checks,
        passed,
        failed,
        all_pass: failed == 0,
    }
}

/// Fixed-width pass/fail table.
pub fn table(report: &VerifyReport) -> String {
    let width = report.checks.iter().map(|c| c.id.len()).max().unwrap_or(10);
    let mut out = String::new();
    for c in &report.checks {
        let value = c.value.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        out.push_str(&format!(
            "{:<4}  {:<width$}  {:>14}  {}\n",
            if c.passes { "PASS" } else { "FAIL" },
            c.id,
            value,
            c.expected
        ));
    }
    out.push_str(&format!("{} passed, {} failed\n", report.passed, report.failed));
    out
}
