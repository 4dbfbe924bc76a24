//! Root-locus geometry: the parameter box and disc, the sampled locus Γ,
//! distance queries, fibers `𝒩_z` with their distance `ρ(z)` to the real
//! parameter space, and exact `t`-derivatives of `1/P`.

mod cloud;
mod fiber;
mod index;
mod invp;

pub use cloud::{dist_to_gamma, sample_gamma, CloudSpec, GammaCloud, GammaPoint};
pub use fiber::{fiber, FiberMethod, FiberResult};
pub use index::KdTree;
pub use invp::{inv_p_derivative, CPoly};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parampoly::ParamPoly;
use crate::roots::{poly_roots, RootFailure, RootOptions};

/// Relative slack when testing `|τ| ≤ η`.
pub(crate) const BOX_SLACK: f64 = 1e-9;
pub const NEAR_POLE: f64 = 1e-14;
pub const POLISH_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Domain {
    pub delta: f64,
    pub eta: f64,
    pub admissible: bool,
    /// `P = x^d`; geometry is short-circuited and division uses the Taylor split.
    pub trivial: bool,
}

impl Domain {
    /// A domain taken on trust, e.g. from CLI overrides.
    pub fn assumed(eta: f64, delta: f64) -> Self {
        Self {
            delta,
            eta,
            admissible: true,
            trivial: false,
        }
    }
}

const PROBE_POINTS: usize = 64;

/// Halving search for the largest `δ ∈ {η, η/2, …}` such that every probe
/// point on the circles `|z| ∈ {δ, δ/2, δ/4}` has a fiber root in the η-box.
pub fn calibrate_domain(p: &ParamPoly, eta: f64) -> Result<Domain> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Unsupported(format!("eta = {eta} must be positive")));
    }
    if p.is_trivial() {
        return Ok(Domain {
            delta: eta,
            eta,
            admissible: false,
            trivial: true,
        });
    }
    let floor = 1e-6 * eta;
    let mut delta = eta;
    while delta >= floor {
        let ok = [delta, delta / 2.0, delta / 4.0].iter().all(|&r| {
            (0..PROBE_POINTS).all(|k| {
                let z = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / PROBE_POINTS as f64);
                has_fiber_root(p, z, eta)
            })
        });
        if ok {
            return Ok(Domain {
                delta,
                eta,
                admissible: true,
                trivial: false,
            });
        }
        delta /= 2.0;
    }
    Err(Error::Calibration { eta, floor })
}

pub(crate) fn in_box(tau: Complex64, eta: f64) -> bool {
    tau.norm() <= eta * (1.0 + BOX_SLACK)
}

/// Roots of the slice `τ_free ↦ P(z, τ)`; `None` when the slice vanishes identically.
pub(crate) fn slice_roots(p: &ParamPoly, z: Complex64, free: usize, fixed: &[Complex64]) -> Option<Vec<Complex64>> {
    let coeffs = p.slice_coeffs(z, free, fixed);
    let opts = RootOptions {
        tol_root: 1e-8,
        ..RootOptions::default()
    };
    match poly_roots(&coeffs, &opts) {
        Ok(rs) => Some(rs.roots),
        Err(RootFailure::ZeroPolynomial) => None,
        // an unconverged slice contributes no usable roots
        Err(RootFailure::NoConvergence { .. }) => Some(Vec::new()),
    }
}

fn has_fiber_root(p: &ParamPoly, z: Complex64, eta: f64) -> bool {
    match p.param_dim() {
        1 => match p.roots_in_tau(z, &RootOptions { tol_root: 1e-8, ..RootOptions::default() }) {
            Ok(roots) => roots.iter().any(|&t| in_box(t, eta)),
            Err(Error::DegenerateFiber { .. }) => true,
            Err(_) => false,
        },
        _ => {
            let mut seeds = vec![Complex64::new(0.0, 0.0)];
            for frac in [0.25, 0.5, 0.75, 1.0] {
                for k in 0..8 {
                    seeds.push(Complex64::from_polar(eta * frac, std::f64::consts::TAU * k as f64 / 8.0));
                }
            }
            (0..2).any(|free| {
                seeds.iter().any(|&w| {
                    let mut fixed = [Complex64::new(0.0, 0.0); 2];
                    fixed[1 - free] = w;
                    match slice_roots(p, z, free, &fixed) {
                        None => true,
                        Some(rs) => rs.iter().any(|&t| in_box(t, eta)),
                    }
                })
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn calibrate_x2_plus_t2() {
        let dom = calibrate_domain(&examples::x2_plus_t2p(1), 0.5).unwrap();
        assert!(dom.admissible && dom.delta >= 0.25);
    }

    #[test]
    fn calibrate_xd_minus_t2() {
        for d in 2..=5 {
            let dom = calibrate_domain(&examples::xd_minus_t2(d), 0.5).unwrap();
            assert!(dom.admissible);
            assert!(dom.delta <= 0.5f64.powf(2.0 / d as f64) * (1.0 + 1e-9));
            // closed-form fiber: |τ| = |z|^{d/2} ≤ η on the accepted disc
            assert!(dom.delta.powf(d as f64 / 2.0) <= 0.5 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn calibrate_trivial_bypassed() {
        let dom = calibrate_domain(&examples::trivial(3), 0.5).unwrap();
        assert!(dom.trivial && !dom.admissible);
    }

    #[test]
    fn calibrate_two_parameters() {
        let dom = calibrate_domain(&examples::hyperbolic_2d(), 0.5).unwrap();
        assert!(dom.admissible && dom.delta == 0.5);
    }

    #[test]
    fn calibrate_rejects_bad_eta() {
        assert!(calibrate_domain(&examples::xd_minus_t2(2), -1.0).is_err());
    }
}
