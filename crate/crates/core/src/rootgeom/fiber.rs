use num_complex::Complex64;
use serde::Serialize;

use super::{in_box, slice_roots, Domain, POLISH_TOL};
use crate::error::{Error, Result};
use crate::fit::log_space;
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::parampoly::ParamPoly;
use crate::roots::RootOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberMethod {
    ExactPoly,
    GridPolish,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberResult {
    pub roots_in_box: Vec<Vec<Complex64>>,
    /// Distance of the fiber to the real parameter space; an upper bound for
    /// `GridPolish`.
    pub rho: f64,
    pub method: FiberMethod,
    /// Seeds per lead coordinate on the `GridPolish` path.
    pub grid_density: Option<usize>,
}

const SEED_MAGNITUDES: usize = 24;
const SEED_ANGLES: usize = 16;
const POLISHED_SEEDS: usize = 3;

fn im_dist2(tau: &[Complex64]) -> f64 {
    tau.iter().map(|c| c.im * c.im).sum()
}

/// The fiber `{τ : |τ_i| ≤ η, P(z, τ) = 0}` and its distance `ρ(z)` to `ℝ^m`.
pub fn fiber(p: &ParamPoly, dom: &Domain, z: Complex64) -> Result<FiberResult> {
    if p.param_dim() == 1 {
        fiber_exact(p, dom, z)
    } else {
        fiber_grid(p, dom, z)
    }
}

fn fiber_exact(p: &ParamPoly, dom: &Domain, z: Complex64) -> Result<FiberResult> {
    let roots = match p.roots_in_tau(z, &RootOptions::default()) {
        Ok(r) => r,
        Err(Error::DegenerateFiber { .. }) => {
            // every τ is a root; the real ones lie in the box
            return Ok(FiberResult {
                roots_in_box: vec![vec![Complex64::new(0.0, 0.0)]],
                rho: 0.0,
                method: FiberMethod::ExactPoly,
                grid_density: None,
            });
        }
        Err(e) => return Err(e),
    };
    let inside: Vec<Vec<Complex64>> = roots
        .into_iter()
        .filter(|&t| in_box(t, dom.eta))
        .map(|t| vec![t])
        .collect();
    if inside.is_empty() {
        return Err(Error::EmptyFiber { z });
    }
    let rho = inside.iter().map(|t| t[0].im.abs()).fold(f64::INFINITY, f64::min);
    Ok(FiberResult {
        roots_in_box: inside,
        rho,
        method: FiberMethod::ExactPoly,
        grid_density: None,
    })
}

/// In-box fiber points whose `lead` coordinate is `w`.
fn complete(p: &ParamPoly, z: Complex64, lead: usize, w: Complex64, eta: f64) -> Vec<Vec<Complex64>> {
    let other = 1 - lead;
    let mut fixed = [Complex64::new(0.0, 0.0); 2];
    fixed[lead] = w;
    let assemble = |v: Complex64| {
        let mut tau = vec![Complex64::new(0.0, 0.0); 2];
        tau[lead] = w;
        tau[other] = v;
        tau
    };
    match slice_roots(p, z, other, &fixed) {
        None => vec![assemble(Complex64::new(0.0, 0.0))],
        Some(rs) => rs.into_iter().filter(|&v| in_box(v, eta)).map(assemble).collect(),
    }
}

fn fiber_grid(p: &ParamPoly, dom: &Domain, z: Complex64) -> Result<FiberResult> {
    let eta = dom.eta;
    let mut seeds = vec![Complex64::new(0.0, 0.0)];
    for r in log_space(1e-10 * eta, eta, SEED_MAGNITUDES) {
        for k in 0..SEED_ANGLES {
            seeds.push(Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / SEED_ANGLES as f64));
        }
    }
    let mut found: Vec<(f64, usize, Vec<Complex64>)> = Vec::new();
    for lead in 0..2 {
        for &w in &seeds {
            for tau in complete(p, z, lead, w, eta) {
                found.push((im_dist2(&tau), lead, tau));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::EmptyFiber { z });
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = found[0].clone();
    for (_, lead, tau) in found.iter().take(POLISHED_SEEDS) {
        let lead = *lead;
        let objective = |x: &[f64]| -> f64 {
            let mut w = Complex64::new(x[0], x[1]);
            if w.norm() > eta {
                w *= eta / w.norm();
            }
            complete(p, z, lead, w, eta)
                .iter()
                .map(|t| im_dist2(t))
                .fold(f64::INFINITY, f64::min)
        };
        let start = [tau[lead].re, tau[lead].im];
        let step = 0.05 * tau[lead].norm().max(1e-3 * eta);
        let (x, _) = nelder_mead(
            objective,
            &start,
            step,
            &NelderMeadOptions {
                max_evals: 400,
                x_tol: POLISH_TOL * eta,
                f_rel_tol: 1e-14,
            },
        );
        let mut w = Complex64::new(x[0], x[1]);
        if w.norm() > eta {
            w *= eta / w.norm();
        }
        for cand in complete(p, z, lead, w, eta) {
            let v = im_dist2(&cand);
            if v < best.0 {
                best = (v, lead, cand);
            }
        }
    }

    let mut roots_in_box = vec![best.2.clone()];
    roots_in_box.extend(found.into_iter().map(|(_, _, t)| t));
    Ok(FiberResult {
        roots_in_box,
        rho: best.0.sqrt(),
        method: FiberMethod::GridPolish,
        grid_density: Some(seeds.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use std::f64::consts::PI;

    #[test]
    fn xd_minus_t2_closed_form() {
        for d in 2..=5usize {
            let p = examples::xd_minus_t2(d);
            let dom = Domain::assumed(0.5, 0.25);
            for &r in &[0.2, 0.01, 1e-4] {
                for k in 0..7 {
                    let theta = 0.3 + k as f64 * 0.8;
                    let z = Complex64::from_polar(r, theta);
                    let got = fiber(&p, &dom, z).unwrap();
                    let want = r.powf(d as f64 / 2.0) * (d as f64 * theta / 2.0).sin().abs();
                    assert!((got.rho - want).abs() <= 1e-9 * (1.0 + want), "d={d} r={r} θ={theta}");
                    assert_eq!(got.method, FiberMethod::ExactPoly);
                }
            }
        }
    }

    #[test]
    fn x2_plus_t2p_closed_form() {
        for pw in 1..=3u32 {
            let p = examples::x2_plus_t2p(pw);
            let dom = Domain::assumed(0.5, 0.5f64.powi(pw as i32));
            let r = 0.5 * dom.delta;
            for k in 0..9 {
                let theta = 0.1 + k as f64 * 0.7;
                let z = Complex64::from_polar(r, theta);
                let pf = pw as f64;
                let want = (0..pw)
                    .map(|j| (theta / pf + PI / (2.0 * pf) + j as f64 * PI / pf).sin().abs())
                    .fold(f64::INFINITY, f64::min)
                    * r.powf(1.0 / pf);
                let got = fiber(&p, &dom, z).unwrap().rho;
                assert!((got - want).abs() <= 1e-9, "p={pw} θ={theta} got={got} want={want}");
            }
        }
    }

    #[test]
    fn tau_roots_satisfy_vieta() {
        let p = examples::tangential();
        let z = Complex64::new(0.01, 0.02);
        let coeffs = p.tau_coeffs(z);
        let roots = p.roots_in_tau(z, &RootOptions::default()).unwrap();
        let n = coeffs.len() - 1;
        let sum: Complex64 = roots.iter().sum();
        let prod: Complex64 = roots.iter().product();
        assert!((sum + coeffs[n - 1] / coeffs[n]).norm() < 1e-10);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!((prod - sign * coeffs[0] / coeffs[n]).norm() < 1e-10);
    }

    #[test]
    fn origin_fiber_is_degenerate() {
        let p = examples::xd_minus_t2(3);
        let res = fiber(&p, &Domain::assumed(0.5, 0.5), Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(res.rho, 0.0);
    }

    #[test]
    fn empty_fiber_is_reported() {
        let p = examples::xd_minus_t2(2);
        let err = fiber(&p, &Domain::assumed(0.01, 0.5), Complex64::new(0.0, 0.4)).unwrap_err();
        assert!(matches!(err, Error::EmptyFiber { .. }));
    }

    #[test]
    fn hyperbolic_grid_polish() {
        let p = examples::hyperbolic_2d();
        let dom = Domain::assumed(0.5, 0.5);
        let res = fiber(&p, &dom, Complex64::new(0.0, 0.1)).unwrap();
        assert_eq!(res.method, FiberMethod::GridPolish);
        assert!((res.rho - 0.1).abs() <= 0.002, "rho = {}", res.rho);
        // τ = a + ib: |a|² − |b|² = Re(z²) and a·b = Re z·Im z force |b| ≥ |Im z|
        for z in [Complex64::new(0.05, 0.03), Complex64::new(-0.2, 0.01)] {
            let res = fiber(&p, &dom, z).unwrap();
            assert!((res.rho - z.im.abs()).abs() <= 0.02 * z.im.abs(), "z={z} rho={}", res.rho);
        }
        let real = fiber(&p, &dom, Complex64::new(0.3, 0.0)).unwrap();
        assert!(real.rho < 1e-6);
    }
}
