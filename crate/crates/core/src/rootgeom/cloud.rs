use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::KdTree;
use super::{Domain, POLISH_TOL};
use crate::error::Result;
use crate::fit::log_space;
use crate::optim::{golden_section, nelder_mead, NelderMeadOptions};
use crate::parampoly::ParamPoly;
use crate::roots::{horner_with_derivative, RootOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudSpec {
    /// Log-spaced radii of `|t|` (an equal number of uniform radii is added).
    pub n_radial: usize,
    /// Parameter directions for `m = 2`; `m = 1` always uses `t > 0` and `t < 0`.
    pub n_angular: usize,
    /// Smallest log radius as a fraction of η.
    pub floor_ratio: f64,
}

impl Default for CloudSpec {
    fn default() -> Self {
        Self {
            n_radial: 64,
            n_angular: 96,
            floor_ratio: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaPoint {
    pub z: Complex64,
    pub t_source: Vec<f64>,
    pub branch_id: Option<usize>,
    /// `(direction, radius)` grid indices; `None` for the origin.
    pub sample: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct GammaCloud {
    poly: ParamPoly,
    eta: f64,
    spec: CloudSpec,
    radii: Vec<f64>,
    directions: Vec<Vec<f64>>,
    points: Vec<GammaPoint>,
    index: KdTree,
}

impl GammaCloud {
    pub fn points(&self) -> &[GammaPoint] {
        &self.points
    }

    pub fn points_mut(&mut self) -> &mut [GammaPoint] {
        &mut self.points
    }

    pub fn poly(&self) -> &ParamPoly {
        &self.poly
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn spec(&self) -> &CloudSpec {
        &self.spec
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nearest(&self, z: Complex64, k: usize) -> Vec<(f64, usize)> {
        self.index.nearest(z, k)
    }

    /// Parameter for direction `dir` at radius `s`.
    pub fn param(&self, dir: usize, s: f64) -> Vec<f64> {
        self.directions[dir].iter().map(|c| c * s).collect()
    }

    /// All cloud points are real up to a relative tolerance.
    pub fn is_real(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.z.im.abs() <= 1e-9 * p.z.norm().max(1e-300))
    }
}

/// Samples Γ by solving `P(·, t) = 0` over the radial × direction grid of the
/// parameter box. The origin is always included.
pub fn sample_gamma(p: &ParamPoly, dom: &Domain, spec: &CloudSpec) -> Result<GammaCloud> {
    let eta = dom.eta;
    let mut radii = log_space(spec.floor_ratio * eta, eta, spec.n_radial);
    radii.extend((1..=spec.n_radial).map(|k| eta * k as f64 / spec.n_radial as f64));
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());

    let directions: Vec<Vec<f64>> = match p.param_dim() {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => (0..spec.n_angular)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / spec.n_angular as f64;
                // unit sup-norm: the ray reaches the boundary of the square box
                let scale = phi.cos().abs().max(phi.sin().abs());
                vec![phi.cos() / scale, phi.sin() / scale]
            })
            .collect(),
    };

    let jobs: Vec<(usize, usize)> = (0..directions.len())
        .flat_map(|d| (0..radii.len()).map(move |r| (d, r)))
        .collect();
    let opts = RootOptions::default();
    let solved: Vec<Result<Vec<GammaPoint>>> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let t: Vec<f64> = directions[d].iter().map(|c| c * radii[r]).collect();
            let roots = p.roots_in_x(&t, &opts)?;
            Ok(roots
                .roots
                .into_iter()
                .map(|z| GammaPoint {
                    z,
                    t_source: t.clone(),
                    branch_id: None,
                    sample: Some((d, r)),
                })
                .collect())
        })
        .collect();

    let mut points = vec![GammaPoint {
        z: Complex64::new(0.0, 0.0),
        t_source: vec![0.0; p.param_dim()],
        branch_id: None,
        sample: None,
    }];
    for batch in solved {
        points.extend(batch?);
    }
    let index = KdTree::build(points.iter().map(|p| p.z));
    Ok(GammaCloud {
        poly: p.clone(),
        eta,
        spec: *spec,
        radii,
        directions,
        points,
        index,
    })
}

const POLISH_CANDIDATES: usize = 4;

/// Newton continuation of the root of `P(·, t)` starting from `start`.
fn continue_root(p: &ParamPoly, t: &[f64], start: Complex64) -> Option<Complex64> {
    let tc: Vec<Complex64> = t.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let coeffs = p.x_coeffs_at(&tc);
    let mut x = start;
    for _ in 0..60 {
        let (v, dv) = horner_with_derivative(&coeffs, x);
        if v == Complex64::new(0.0, 0.0) {
            return Some(x);
        }
        let step = v / dv;
        if !step.is_finite() {
            return None;
        }
        x -= step;
        if step.norm() <= 1e-14 * x.norm() {
            return Some(x);
        }
    }
    None
}

/// `d(z, Γ)`: nearest sample, then a local polish of `|z − μ(t)|` around the
/// best samples' parameters.
pub fn dist_to_gamma(cloud: &GammaCloud, z: Complex64) -> f64 {
    let near = cloud.nearest(z, POLISH_CANDIDATES);
    let Some(&(raw, _)) = near.first() else {
        return f64::INFINITY;
    };
    if raw == 0.0 {
        return 0.0;
    }
    let p = &cloud.poly;
    let opts = RootOptions {
        tol_root: 1e-8,
        ..RootOptions::default()
    };
    let mut best = raw;
    let mut seen: Vec<(usize, usize)> = Vec::new();
    for &(_, idx) in &near {
        let Some((dir, r)) = cloud.points[idx].sample else {
            continue;
        };
        if seen.contains(&(dir, r)) {
            continue;
        }
        seen.push((dir, r));
        let start = cloud.points[idx].z;
        let gap = |t: &[f64]| -> f64 {
            if let Some(mu) = continue_root(p, t, start) {
                return (z - mu).norm();
            }
            match p.roots_in_x(t, &opts) {
                Ok(rs) => rs.roots.iter().map(|mu| (z - mu).norm()).fold(f64::INFINITY, f64::min),
                Err(_) => f64::INFINITY,
            }
        };
        let lo = if r == 0 { 0.0 } else { cloud.radii[r - 1] };
        let hi = cloud.radii[(r + 1).min(cloud.radii.len() - 1)];
        let polished = match p.param_dim() {
            1 => {
                let sign = cloud.directions[dir][0];
                golden_section(|s| gap(&[sign * s]), lo, hi, POLISH_TOL).1
            }
            _ => {
                let eta = cloud.eta;
                let start = cloud.points[idx].t_source.clone();
                let step = 0.5 * (hi - lo).max(1e-12 * eta);
                let clamp = |t: &[f64]| -> Vec<f64> { t.iter().map(|v| v.clamp(-eta, eta)).collect() };
                nelder_mead(
                    |t| gap(&clamp(t)),
                    &start,
                    step,
                    &NelderMeadOptions {
                        max_evals: 300,
                        x_tol: POLISH_TOL * step,
                        f_rel_tol: 1e-12,
                    },
                )
                .1
            }
        };
        best = best.min(polished);
    }
    best
}
