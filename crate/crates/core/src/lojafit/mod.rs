//! Empirical Łojasiewicz exponent `σ` in `ρ(z) ≥ c·d(z,Γ)^σ`, the growth of
//! `t`-derivatives of `1/P`, and the geometric assumptions on Γ.

mod branches;

pub use branches::{
    check_assumptions, check_assumptions_with_cloud, decompose_branches, is_hyperbolic, separation_exponent, AssumptionReport, BranchSummary,
    FailureReason, MU_TOL,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{least_squares, line, log_space};
use crate::parampoly::ParamPoly;
use crate::rootgeom::{dist_to_gamma, fiber, inv_p_derivative, sample_gamma, CloudSpec, Domain, GammaCloud};

/// Allowed overshoot of `σ̂` past the theoretical range `[1, d]`.
pub const FIT_SLACK: f64 = 0.2;
pub const MIN_BINS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaSpec {
    pub n_radii: usize,
    pub n_angles: usize,
    /// Radii span `[lo·δ, hi·δ]`.
    pub radius_lo: f64,
    pub radius_hi: f64,
    pub bins: usize,
    pub window: usize,
}

impl Default for SigmaSpec {
    fn default() -> Self {
        Self {
            n_radii: 24,
            n_angles: 96,
            radius_lo: 1e-6,
            radius_hi: 1.0,
            bins: 32,
            window: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinStat {
    pub x_lo: f64,
    pub x_hi: f64,
    pub count: usize,
    /// Lowest `log ρ` in the bin and the `log d` where it occurs.
    pub min_y: Option<f64>,
    pub x_at_min: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub z: Complex64,
    pub dist: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaEstimate {
    pub sigma_hat: f64,
    pub intercept_log_c: f64,
    pub nu_hat: Option<f64>,
    pub n_samples: usize,
    pub bin_stats: Vec<BinStat>,
    pub residual_rms: f64,
    /// Two-standard-error band on the slope.
    pub ci: (f64, f64),
    /// `σ̂ ∈ [1 − FIT_SLACK, d + FIT_SLACK]`.
    pub valid: bool,
    /// `ρ` came from the grid-seeded minimization and is an upper bound.
    pub one_sided: bool,
    pub spec: SigmaSpec,
}

/// Sample points in `D_δ`: a polar grid with half-step angular offset, plus
/// points approaching Γ at geometrically shrinking angles from sampled Γ points.
pub fn sigma_sample_points(cloud: &GammaCloud, dom: &Domain, spec: &SigmaSpec) -> Vec<Complex64> {
    let radii = log_space(spec.radius_lo * dom.delta, spec.radius_hi * dom.delta, spec.n_radii);
    let mut pts = Vec::new();
    for &r in &radii {
        for k in 0..spec.n_angles {
            let theta = std::f64::consts::TAU * (k as f64 + 0.5) / spec.n_angles as f64;
            pts.push(Complex64::from_polar(r, theta));
        }
    }

    let ratio = if radii.len() > 1 { (radii[1] / radii[0]).sqrt() } else { 2.0 };
    let eps_min = 0.5 * spec.radius_lo / spec.radius_hi;
    let mut eps = Vec::new();
    let mut e = std::f64::consts::PI / spec.n_angles as f64;
    while e >= eps_min {
        eps.push(e);
        e /= std::f64::consts::SQRT_2;
    }
    for &r in &radii {
        let mut anchors: Vec<Complex64> = Vec::new();
        for q in cloud.points() {
            let n = q.z.norm();
            if n < r / ratio || n >= r * ratio || n > dom.delta {
                continue;
            }
            match anchors.iter_mut().find(|a| (q.z / **a).arg().abs() < 1e-3) {
                Some(a) if (a.norm() - r).abs() <= (n - r).abs() => {}
                Some(a) => *a = q.z,
                None => anchors.push(q.z),
            }
        }
        anchors.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        for a in anchors {
            for &e in &eps {
                pts.push(a * Complex64::from_polar(1.0, e));
                pts.push(a * Complex64::from_polar(1.0, -e));
            }
        }
    }
    pts
}

fn sample_all(cloud: &GammaCloud, dom: &Domain, points: &[Complex64]) -> Vec<Option<Sample>> {
    let p = cloud.poly();
    points
        .par_iter()
        .map(|&z| {
            let rho = fiber(p, dom, z).ok()?.rho;
            Some(Sample {
                z,
                dist: dist_to_gamma(cloud, z),
                rho,
            })
        })
        .collect()
}

/// `(d(z,Γ), ρ(z))` for every point; points whose fiber fails are dropped.
pub fn sigma_samples(cloud: &GammaCloud, dom: &Domain, points: &[Complex64]) -> Vec<Sample> {
    sample_all(cloud, dom, points).into_iter().flatten().collect()
}

/// Lower-envelope fit: bin `log d` into `spec.bins`, keep the lowest `log ρ`
/// per bin and fit a line through the `spec.window` smallest-`d` bins.
pub fn fit_envelope(samples: &[Sample], d_floor: f64, degree: usize, spec: &SigmaSpec) -> Result<SigmaEstimate> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.dist >= d_floor && s.dist > 0.0 && s.rho > 0.0 && s.rho.is_finite())
        .map(|s| (s.dist.ln(), s.rho.ln()))
        .collect();
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    if pts.is_empty() || !(hi > lo) || spec.bins == 0 {
        return Err(Error::InsufficientSampling {
            usable: 0,
            needed: MIN_BINS,
        });
    }
    let width = (hi - lo) / spec.bins as f64;
    let mut bins: Vec<BinStat> = (0..spec.bins)
        .map(|b| BinStat {
            x_lo: lo + b as f64 * width,
            x_hi: lo + (b + 1) as f64 * width,
            count: 0,
            min_y: None,
            x_at_min: None,
        })
        .collect();
    for &(x, y) in &pts {
        let b = (((x - lo) / width) as usize).min(spec.bins - 1);
        let bin = &mut bins[b];
        bin.count += 1;
        if bin.min_y.map_or(true, |m| y < m) {
            bin.min_y = Some(y);
            bin.x_at_min = Some(x);
        }
    }
    let filled: Vec<(f64, f64)> = bins
        .iter()
        .filter_map(|b| Some((b.x_at_min?, b.min_y?)))
        .take(spec.window)
        .collect();
    if filled.len() < MIN_BINS {
        return Err(Error::InsufficientSampling {
            usable: filled.len(),
            needed: MIN_BINS,
        });
    }
    let xs: Vec<f64> = filled.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = filled.iter().map(|p| p.1).collect();
    let (slope, intercept, rms) = line(&xs, &ys).ok_or_else(|| Error::Fit("degenerate envelope".into()))?;
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    let se = rms * (n / (n - 2.0)).sqrt() / sxx.sqrt();
    Ok(SigmaEstimate {
        sigma_hat: slope,
        intercept_log_c: intercept,
        nu_hat: None,
        n_samples: pts.len(),
        bin_stats: bins,
        residual_rms: rms,
        ci: (slope - 2.0 * se, slope + 2.0 * se),
        valid: (1.0 - FIT_SLACK..=degree as f64 + FIT_SLACK).contains(&slope),
        one_sided: false,
        spec: *spec,
    })
}

const RADIAL_SUBSTEPS: usize = 8;

/// Extra radii between consecutive grid circles along the polar-grid
/// directions that are locally farthest from Γ.
fn radial_refinement(polar: &[Option<Sample>], dom: &Domain, spec: &SigmaSpec) -> Vec<Complex64> {
    let radii = log_space(spec.radius_lo * dom.delta, spec.radius_hi * dom.delta, spec.n_radii);
    let n = spec.n_angles;
    let ratio = |s: &Option<Sample>| s.map_or(f64::NEG_INFINITY, |s| s.dist / s.z.norm());
    let mut out = Vec::new();
    for i in 0..radii.len().saturating_sub(1) {
        let ring = &polar[i * n..(i + 1) * n];
        for k in 0..n {
            let here = ratio(&ring[k]);
            if here > ratio(&ring[(k + n - 1) % n]) && here >= ratio(&ring[(k + 1) % n]) {
                let theta = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                for j in 1..RADIAL_SUBSTEPS {
                    let r = radii[i] * (radii[i + 1] / radii[i]).powf(j as f64 / RADIAL_SUBSTEPS as f64);
                    out.push(Complex64::from_polar(r, theta));
                }
            }
        }
    }
    out
}

/// Every sample used by the σ fit: polar grid, Γ approaches and radial refinement.
pub fn collect_sigma_samples(cloud: &GammaCloud, dom: &Domain, spec: &SigmaSpec) -> Vec<Sample> {
    let points = sigma_sample_points(cloud, dom, spec);
    let polar_len = spec.n_radii * spec.n_angles;
    let first: Vec<Option<Sample>> = sample_all(cloud, dom, &points);
    let extra = radial_refinement(&first[..polar_len], dom, spec);
    let mut samples: Vec<Sample> = first.into_iter().flatten().collect();
    samples.extend(sample_all(cloud, dom, &extra).into_iter().flatten());
    samples
}

pub fn estimate_sigma_with_cloud(cloud: &GammaCloud, dom: &Domain, spec: &SigmaSpec) -> Result<SigmaEstimate> {
    let samples = collect_sigma_samples(cloud, dom, spec);
    fit_collected(cloud, dom, spec, &samples)
}

/// [`fit_envelope`] with the domain's distance floor and the divisor's degree.
pub fn fit_collected(cloud: &GammaCloud, dom: &Domain, spec: &SigmaSpec, samples: &[Sample]) -> Result<SigmaEstimate> {
    let d_floor = spec.radius_lo * dom.delta;
    let mut est = fit_envelope(samples, d_floor, cloud.poly().degree(), spec)?;
    est.one_sided = cloud.poly().param_dim() > 1;
    Ok(est)
}

pub fn estimate_sigma(p: &ParamPoly, dom: &Domain, spec: &SigmaSpec) -> Result<SigmaEstimate> {
    if dom.trivial {
        return Err(Error::Unsupported("σ is undefined for P = x^d".into()));
    }
    let cloud = sample_gamma(p, dom, &CloudSpec::default())?;
    estimate_sigma_with_cloud(&cloud, dom, spec)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeGrowth {
    /// Coefficient of `l·log(1/d(z,Γ))` in the fit of `log(|D_t^l(1/P)| / l!)`.
    pub slope: f64,
    /// Coefficient of `log(1/d(z,Γ))`.
    pub nu_hat: f64,
    pub ray_angle: f64,
    pub max_order: u32,
    pub n_points: usize,
    pub residual_rms: f64,
}

/// Fits `log(|D_t^l(1/P)(z,t)| / l!) ≈ (s·l + ν)·log(1/d(z,Γ)) + a·l + b` over
/// `l ≤ max_order`, `t = 0`, and `z` on the ray through `D_δ` farthest from Γ.
/// For `m = 2` the larger of the two pure derivatives is used.
pub fn derivative_growth(cloud: &GammaCloud, dom: &Domain, max_order: u32) -> Result<DerivativeGrowth> {
    let p = cloud.poly();
    let m = p.param_dim();
    let probe = 0.1 * dom.delta;
    let ray_angle = (0..64)
        .map(|k| std::f64::consts::TAU * k as f64 / 64.0)
        .map(|a| (dist_to_gamma(cloud, Complex64::from_polar(probe, a)), a))
        .fold((f64::NEG_INFINITY, 0.0), |best, c| if c.0 > best.0 { c } else { best })
        .1;
    let t0 = vec![0.0; m];
    let mut design = Vec::new();
    let mut ys = Vec::new();
    for r in log_space(10f64.powf(-2.5) * dom.delta, 10f64.powf(-0.5) * dom.delta, 12) {
        let z = Complex64::from_polar(r, ray_angle);
        let d = dist_to_gamma(cloud, z);
        if !(d > 0.0) {
            continue;
        }
        let x = (1.0 / d).ln();
        for l in 0..=max_order {
            let mut best = 0.0f64;
            for var in 0..m {
                let mut mi = vec![0u32; m];
                mi[var] = l;
                if let Ok(v) = inv_p_derivative(p, z, &t0, &mi) {
                    best = best.max(v.norm());
                }
            }
            if best > 0.0 && best.is_finite() {
                let lf = l as f64;
                design.push(vec![lf * x, x, lf, 1.0]);
                ys.push(best.ln() - ln_factorial(l));
            }
        }
    }
    let fit = least_squares(&design, &ys).ok_or_else(|| Error::Fit("derivative growth design is singular".into()))?;
    Ok(DerivativeGrowth {
        slope: fit.coefficients[0],
        nu_hat: fit.coefficients[1],
        ray_angle,
        max_order,
        n_points: ys.len(),
        residual_rms: fit.residual_rms,
    })
}

fn ln_factorial(l: u32) -> f64 {
    (1..=l).map(|k| (k as f64).ln()).sum()
}
