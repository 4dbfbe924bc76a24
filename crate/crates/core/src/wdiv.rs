//! Formal Weierstrass division `f = P·q + Σ_j r_j(t) x^j` on truncated
//! power series, plus growth fits of the resulting coefficient streams.

use std::ops::{Add, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dcseq::DCSequence;
use crate::error::{Error, Result};
use crate::examples;
use crate::fit::least_squares;
use crate::parampoly::ParamPoly;
use crate::series::{Coefficient, PowerSeries2};

pub const DEFAULT_ORDER: usize = 24;
pub const MIN_FIT_POINTS: usize = 6;
pub const MIN_STREAM_LEN: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct DivisionResult<C: Coefficient = BigRational>
where
    for<'a> C: Add<&'a C, Output = C> + Sub<&'a C, Output = C>,
{
    pub q: PowerSeries2<C>,
    /// `r[j]` multiplies `x^j`; each contains no `x`.
    pub r: Vec<PowerSeries2<C>>,
    pub n: usize,
    pub residual_max: f64,
    pub iterations: usize,
    pub divisor: ParamPoly,
}

/// `f − P·q − Σ_j r_j x^j`, truncated at `n`.
pub fn residual<C: Coefficient>(
    f: &PowerSeries2<C>,
    p: &ParamPoly,
    q: &PowerSeries2<C>,
    r: &[PowerSeries2<C>],
    n: usize,
) -> Result<PowerSeries2<C>>
where
    for<'a> C: Add<&'a C, Output = C> + Sub<&'a C, Output = C>,
{
    let ps = PowerSeries2::<C>::from_param_poly(p, n, false)?;
    let mut out = f.with_order(n).sub(&ps.mul(&q.with_order(n)));
    for (j, rj) in r.iter().enumerate() {
        out = out.sub(&rj.with_order(n).shift_x(j as u32));
    }
    Ok(out)
}

/// Fixed-point division `(q, r) ← split(f − (P − x^d)·q)` at truncation `n`.
pub fn formal_divide<C: Coefficient>(f: &PowerSeries2<C>, p: &ParamPoly, n: usize) -> Result<DivisionResult<C>>
where
    for<'a> C: Add<&'a C, Output = C> + Sub<&'a C, Output = C>,
{
    if f.param_dim() != p.param_dim() {
        return Err(Error::Misuse(format!(
            "series has {} parameters, divisor has {}",
            f.param_dim(),
            p.param_dim()
        )));
    }
    if f.order() < n {
        return Err(Error::Misuse(format!(
            "series truncated at {} below requested order {n}",
            f.order()
        )));
    }
    for (j, a) in p.coeffs().iter().enumerate() {
        if !a.constant_term().is_zero() {
            return Err(Error::InvalidPoly {
                field: format!("coeffs[{j}]"),
                reason: "coefficient does not vanish at t = 0".into(),
            });
        }
    }
    let d = p.degree();
    let f = f.with_order(n);
    let (mut q, mut r) = f.split_x(d);
    let mut iterations = 0;
    if !p.is_trivial() {
        let tail = PowerSeries2::<C>::from_param_poly(p, n, true)?;
        loop {
            if iterations > n + 1 {
                return Err(Error::DivisionNonConvergence(iterations));
            }
            iterations += 1;
            let g = f.sub(&tail.mul(&q.with_order(n)));
            let (q_next, r_next) = g.split_x(d);
            if q_next == q && r_next == r {
                break;
            }
            q = q_next;
            r = r_next;
        }
    }
    let res = residual(&f, p, &q, &r, n)?;
    Ok(DivisionResult {
        q,
        r,
        n,
        residual_max: res.max_abs(),
        iterations,
        divisor: p.clone(),
    })
}

/// Outcome of checking `f(y²) = Σ_j r_j(y^d) y^{2j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubstituteCheck {
    pub passes: bool,
    pub max_defect: f64,
    pub checked_order: usize,
}

/// Verifies the substitution identity for a division by `x^d − t²`.
pub fn substitute_check<C: Coefficient>(
    f: &PowerSeries2<C>,
    result: &DivisionResult<C>,
    d: usize,
) -> Result<SubstituteCheck>
where
    for<'a> C: Add<&'a C, Output = C> + Sub<&'a C, Output = C>,
{
    if result.divisor != examples::xd_minus_t2(d) {
        return Err(Error::Misuse(format!("division was not by x^{d} - t^2")));
    }
    if f.param_dim() != 1 || !f.is_x_only() {
        return Err(Error::Misuse("substitution check needs a series in x only".into()));
    }
    let top = 2 * (result.n / d) * d;
    let mut lhs = vec![C::zero(); top + 1];
    for (k, c) in f.x_stream().into_iter().enumerate() {
        if 2 * k <= top {
            lhs[2 * k] = c;
        }
    }
    let mut rhs = vec![C::zero(); top + 1];
    for (j, rj) in result.r.iter().enumerate() {
        for (key, c) in rj.terms() {
            let e = d * key[1] as usize + 2 * j;
            if e <= top {
                rhs[e] = rhs[e].clone() + c;
            }
        }
    }
    let mut passes = true;
    let mut max_defect = 0.0f64;
    for (a, b) in lhs.iter().zip(&rhs) {
        if a != b {
            let diff = a.clone() - b;
            let defect = diff.to_f64().abs();
            max_defect = max_defect.max(defect);
            if C::MODE == crate::series::CoefficientMode::Exact || defect > 1e-9 * a.to_f64().abs().max(1.0) {
                passes = false;
            }
        }
    }
    Ok(SubstituteCheck {
        passes,
        max_defect,
        checked_order: top,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GevreyFit {
    pub alpha_hat: f64,
    /// Geometric term `c` of the model.
    pub slope: f64,
    pub intercept: f64,
    pub fit_window: (usize, usize),
    pub n_points: usize,
    pub r2: f64,
    /// Zero coefficients were skipped or the window was widened.
    pub window_adjusted: bool,
}

fn ln_factorial(l: usize) -> f64 {
    (1..=l).map(|i| (i as f64).ln()).sum()
}

/// Fits `ln(|b_l| / l!) ≈ α·l·ln l + c·l + c_0` over the top half of the
/// stream, given `ln |b_l|` (`-∞` for zeros).
pub fn gevrey_fit_ln(ln_b: &[f64]) -> Result<GevreyFit> {
    let last = match ln_b.iter().rposition(|v| v.is_finite()) {
        Some(i) => i,
        None => return Err(Error::Fit("coefficient stream is identically zero".into())),
    };
    if last < MIN_STREAM_LEN {
        return Err(Error::Fit(format!(
            "stream has last nonzero index {last}, need at least {MIN_STREAM_LEN}"
        )));
    }
    let mut lo = last.div_ceil(2);
    let count = |lo: usize| (lo..=last).filter(|&l| ln_b[l].is_finite()).count();
    let mut adjusted = (lo..=last).any(|l| !ln_b[l].is_finite()) || last + 1 < ln_b.len();
    while count(lo) < MIN_FIT_POINTS && lo > 1 {
        lo -= 1;
        adjusted = true;
    }
    let pts: Vec<usize> = (lo..=last).filter(|&l| ln_b[l].is_finite() && l >= 1).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "only {} nonzero coefficients available, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let design: Vec<Vec<f64>> = pts
        .iter()
        .map(|&l| {
            let lf = l as f64;
            vec![lf * lf.ln(), lf, 1.0]
        })
        .collect();
    let y: Vec<f64> = pts.iter().map(|&l| ln_b[l] - ln_factorial(l)).collect();
    let fit = least_squares(&design, &y).ok_or_else(|| Error::Fit("degenerate design".into()))?;
    let alpha_hat = fit.coefficients[0];
    if !alpha_hat.is_finite() {
        return Err(Error::Fit("non-finite exponent".into()));
    }
    Ok(GevreyFit {
        alpha_hat,
        slope: fit.coefficients[1],
        intercept: fit.coefficients[2],
        fit_window: (lo, last),
        n_points: pts.len(),
        r2: fit.r2,
        window_adjusted: adjusted,
    })
}

/// [`gevrey_fit_ln`] on plain values `b_0..b_L`.
pub fn gevrey_fit(b: &[f64]) -> Result<GevreyFit> {
    let ln_b: Vec<f64> = b
        .iter()
        .map(|v| if *v == 0.0 { f64::NEG_INFINITY } else { v.abs().ln() })
        .collect();
    gevrey_fit_ln(&ln_b)
}

/// `ln |l!·c_l|` for a stream of Taylor coefficients `c_l`.
pub fn ln_derivatives<C: Coefficient>(taylor: &[C]) -> Vec<f64> {
    taylor
        .iter()
        .enumerate()
        .map(|(l, c)| {
            if c.is_zero() {
                f64::NEG_INFINITY
            } else {
                c.ln_abs() + ln_factorial(l)
            }
        })
        .collect()
}

/// `f(x) = Σ_{k ≤ n} M_k x^k`, i.e. `f^{(k)}(0) = k!·M_k`.
pub fn extremal_series(seq: &DCSequence, m: usize, n: usize) -> Result<PowerSeries2> {
    if seq.j_max() < n {
        return Err(Error::Misuse(format!(
            "sequence known up to {} but order {n} requested",
            seq.j_max()
        )));
    }
    let coeffs = (0..=n).map(|k| seq.exact_value(k)).collect::<Result<Vec<_>>>()?;
    PowerSeries2::from_x_coeffs(m, n, &coeffs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityRow {
    pub k: usize,
    /// `ln N_{2k}` with `N_{2k} = |∂_t^{2k} r_0(0)| / (2k)!`.
    pub ln_n2k: f64,
    /// `ln M_k^{d/2}`.
    pub ln_mk_pow: f64,
    /// `(N_{2k} / M_k^{d/2})^{1/(k+1)}`.
    pub ratio_root: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub d: usize,
    pub order: usize,
    pub rows: Vec<OptimalityRow>,
    /// Minimum of `ratio_root` over the rows.
    pub lower_bound: Option<f64>,
    /// Growth exponent of `ln N_{2k}` against `k ln k`.
    pub exponent_fit: Option<f64>,
}

/// Divides the extremal series by `x^d − t²` and compares the `r_0` stream
/// against `M^{d/2}`.
pub fn optimality_probe(seq: &DCSequence, d: usize, k_max: usize) -> Result<OptimalityReport> {
    if d < 2 {
        return Err(Error::Misuse("degree must be at least 2".into()));
    }
    if k_max == 0 {
        return Ok(OptimalityReport {
            d,
            order: 0,
            rows: Vec::new(),
            lower_bound: None,
            exponent_fit: None,
        });
    }
    if k_max > seq.j_max() / d {
        return Err(Error::Misuse(format!(
            "K = {k_max} exceeds j_max / d = {}",
            seq.j_max() / d
        )));
    }
    let n = d * k_max;
    let f = extremal_series(seq, 1, n)?;
    let div = formal_divide(&f, &examples::xd_minus_t2(d), n)?;
    let stream = div.r[0].t_stream(0, 0);
    let mut rows = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let c = &stream[2 * k];
        let ln_n2k = if c.is_zero() { f64::NEG_INFINITY } else { c.ln_abs() };
        let ln_mk_pow = d as f64 / 2.0 * seq.ln_value(k)?;
        rows.push(OptimalityRow {
            k,
            ln_n2k,
            ln_mk_pow,
            ratio_root: ((ln_n2k - ln_mk_pow) / (k as f64 + 1.0)).exp(),
        });
    }
    let lower_bound = rows.iter().map(|r| r.ratio_root).reduce(f64::min);
    let pts: Vec<&OptimalityRow> = rows.iter().filter(|r| r.k >= 2 && r.ln_n2k.is_finite()).collect();
    let exponent_fit = if pts.len() >= 3 {
        let design: Vec<Vec<f64>> = pts
            .iter()
            .map(|r| {
                let k = r.k as f64;
                vec![k * k.ln(), k, 1.0]
            })
            .collect();
        let y: Vec<f64> = pts.iter().map(|r| r.ln_n2k).collect();
        least_squares(&design, &y).map(|fit| fit.coefficients[0])
    } else {
        None
    };
    Ok(OptimalityReport {
        d,
        order: n,
        rows,
        lower_bound,
        exponent_fit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnisotropyReport {
    pub order: usize,
    /// Fit of `q(x, 0)`.
    pub x_fit: Option<GevreyFit>,
    /// Fit of `q(0, t)` along the first parameter.
    pub t_fit: Option<GevreyFit>,
    /// Fit of `r_0(t)` along the first parameter.
    pub r0_fit: Option<GevreyFit>,
    pub alpha_gap: Option<f64>,
    pub q_is_zero: bool,
}

/// Compares the Gevrey growth of the quotient in `x` and in `t`.
pub fn anisotropy_probe(p: &ParamPoly, f: &PowerSeries2, n: usize) -> Result<AnisotropyReport> {
    let div = formal_divide(f, p, n)?;
    let fit = |taylor: &[BigRational]| gevrey_fit_ln(&ln_derivatives(taylor)).ok();
    let x_fit = fit(&div.q.x_stream());
    let t_fit = fit(&div.q.t_stream(0, 0));
    let r0_fit = fit(&div.r[0].t_stream(0, 0));
    let alpha_gap = match (&x_fit, &t_fit) {
        (Some(a), Some(b)) => Some((a.alpha_hat - b.alpha_hat).abs()),
        _ => None,
    };
    Ok(AnisotropyReport {
        order: n,
        x_fit,
        t_fit,
        r0_fit,
        alpha_gap,
        q_is_zero: div.q.is_empty(),
    })
}

/// `1` as a series of order `n`.
pub fn one(m: usize, n: usize) -> Result<PowerSeries2> {
    let mut s = PowerSeries2::zero(m, n)?;
    s.add_term(0, &vec![0; m], BigRational::one())?;
    Ok(s)
}
