use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{line, log_space};
use crate::parampoly::ParamPoly;
use crate::rootgeom::{sample_gamma, CloudSpec, Domain, GammaCloud};

/// Allowed excess of a separation exponent over 1.
pub const MU_TOL: f64 = 0.15;
/// Fraction of occupied grid cells in `D_δ` above which Γ counts as 2-dimensional.
pub const AREA_THRESHOLD: f64 = 0.25;
const AREA_GRID: usize = 24;
const REAL_TOL: f64 = 1e-9;
const COINCIDENT: f64 = 1e-6;
const AMBIGUITY_RATIO: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchSummary {
    pub branch_id: usize,
    pub is_real: bool,
    /// The branch reaches the origin with a converging tangent direction.
    pub endpoint_ok: bool,
    /// Limit direction at the origin (radians).
    pub tangent: Option<f64>,
    pub n_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    None,
    Overlap2d,
    TangentialContact,
    /// Two branches come together away from the origin.
    BranchCrossing,
    /// Branch decomposition is only available for `m = 1` or real Γ.
    Unsupported,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub branches: Vec<BranchSummary>,
    /// `pairwise_mu[i][j]`: separation exponent of branch `j` from branch `i`.
    pub pairwise_mu: Vec<Vec<Option<f64>>>,
    pub area_fraction: f64,
    pub hyperbolic: bool,
    pub passes: bool,
    pub failure_reason: FailureReason,
}

/// Every sampled root is real.
pub fn is_hyperbolic(cloud: &GammaCloud) -> bool {
    cloud.is_real()
}

fn is_real(z: Complex64) -> bool {
    z.im.abs() <= REAL_TOL * z.norm()
}

/// Quadratic extrapolation in `|t|` from the last (up to) three track points.
fn predict(history: &[(f64, Complex64)], s: f64) -> Complex64 {
    let n = history.len();
    let pts = &history[n.saturating_sub(3)..];
    let mut out = Complex64::new(0.0, 0.0);
    for (i, &(si, zi)) in pts.iter().enumerate() {
        let w: f64 = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(sj, _))| (s - sj) / (si - sj))
            .product();
        out += zi * w;
    }
    out
}

/// Follows the roots along one parameter direction from the outermost radius
/// inwards; returns tracks of cloud point indices.
fn track_direction(cloud: &GammaCloud, groups: &BTreeMap<usize, Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    let pts = cloud.points();
    let mut levels = groups.iter().rev();
    let Some((_, top)) = levels.next() else {
        return Ok(Vec::new());
    };
    let mut tracks: Vec<Vec<usize>> = top.iter().map(|&i| vec![i]).collect();
    for (&r, cands) in levels {
        let s = cloud.radii()[r];
        let preds: Vec<Complex64> = tracks
            .iter()
            .map(|tr| {
                let hist: Vec<(f64, Complex64)> = tr
                    .iter()
                    .map(|&i| (cloud.radii()[pts[i].sample.expect("sampled").1], pts[i].z))
                    .collect();
                predict(&hist, s)
            })
            .collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, &pz) in preds.iter().enumerate() {
            for (ci, &c) in cands.iter().enumerate() {
                pairs.push(((pts[c].z - pz).norm(), ti, ci));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_done = vec![false; tracks.len()];
        let mut cand_done = vec![false; cands.len()];
        for &(e1, ti, ci) in &pairs {
            if track_done[ti] || cand_done[ci] {
                continue;
            }
            let c1 = pts[cands[ci]].z;
            let rival = pairs.iter().find(|&&(_, tj, cj)| {
                tj == ti && cj != ci && !cand_done[cj] && {
                    let c2 = pts[cands[cj]].z;
                    (c2 - c1).norm() > COINCIDENT * c1.norm().max(c2.norm())
                }
            });
            if let Some(&(e2, _, _)) = rival {
                if e2 < AMBIGUITY_RATIO * e1 {
                    return Err(Error::BranchTracking { radius: s });
                }
            }
            track_done[ti] = true;
            cand_done[ci] = true;
            tracks[ti].push(cands[ci]);
        }
    }
    Ok(tracks)
}

fn same_track(cloud: &GammaCloud, a: &[usize], b: &[usize]) -> bool {
    let pts = cloud.points();
    a.len() == b.len()
        && a.iter().zip(b).all(|(&i, &j)| {
            let (x, y) = (pts[i].z, pts[j].z);
            (x - y).norm() <= REAL_TOL * x.norm().max(y.norm()) + 1e-300
        })
}

fn summarize(id: usize, zs: &[Complex64]) -> BranchSummary {
    let mut by_mod: Vec<Complex64> = zs.iter().copied().filter(|z| z.norm() > 0.0).collect();
    by_mod.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let max = by_mod.last().map_or(0.0, |z| z.norm());
    let tangent = by_mod.first().map(|z| z.arg());
    let inner = &by_mod[..by_mod.len().min(5)];
    let converged = inner.len() >= 2
        && inner.iter().all(|z| (z / inner[0]).arg().abs() < 0.05)
        && inner[0].norm() <= 1e-3 * max;
    BranchSummary {
        branch_id: id,
        is_real: zs.iter().all(|&z| is_real(z)),
        endpoint_ok: converged,
        tangent,
        n_points: zs.len(),
    }
}

/// Labels every cloud point with a branch: real roots (and the origin) go to
/// branch 0, the rest follow root continuation in `|t|`.
pub fn decompose_branches(cloud: &GammaCloud) -> Result<(GammaCloud, Vec<BranchSummary>)> {
    let mut out = cloud.clone();
    let zero_summary = |n| BranchSummary {
        branch_id: 0,
        is_real: true,
        endpoint_ok: true,
        tangent: None,
        n_points: n,
    };
    if cloud.poly().param_dim() > 1 {
        if !cloud.is_real() {
            return Err(Error::Unsupported(
                "branch decomposition for two parameters needs a real root locus".into(),
            ));
        }
        for p in out.points_mut() {
            p.branch_id = Some(0);
        }
        return Ok((out, vec![zero_summary(cloud.len())]));
    }

    let mut tracks: Vec<Vec<usize>> = Vec::new();
    for dir in 0..cloud.directions().len() {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, p) in cloud.points().iter().enumerate() {
            if let Some((d, r)) = p.sample {
                if d == dir {
                    groups.entry(r).or_default().push(i);
                }
            }
        }
        for tr in track_direction(cloud, &groups)? {
            if !tracks.iter().any(|t| same_track(cloud, t, &tr)) {
                tracks.push(tr);
            }
        }
    }

    let pts = cloud.points();
    let mut complex_tracks: Vec<&Vec<usize>> = tracks
        .iter()
        .filter(|t| t.iter().any(|&i| !is_real(pts[i].z)))
        .collect();
    complex_tracks.sort_by(|a, b| pts[a[0]].z.arg().total_cmp(&pts[b[0]].z.arg()));

    for p in out.points_mut() {
        if p.sample.is_none() || is_real(p.z) {
            p.branch_id = Some(0);
        }
    }
    let mut summaries = Vec::new();
    for (k, tr) in complex_tracks.iter().enumerate() {
        let id = k + 1;
        let mut zs = Vec::new();
        for &i in tr.iter() {
            if !is_real(pts[i].z) {
                out.points_mut()[i].branch_id = Some(id);
                zs.push(pts[i].z);
            }
        }
        summaries.push(summarize(id, &zs));
    }
    // duplicates of merged tracks carry the label of their twin
    for dup in 0..pts.len() {
        if out.points()[dup].branch_id.is_some() {
            continue;
        }
        let z = pts[dup].z;
        let twin = pts
            .iter()
            .enumerate()
            .filter(|(j, _)| out.points()[*j].branch_id.is_some())
            .find(|(_, q)| (q.z - z).norm() <= REAL_TOL * z.norm())
            .and_then(|(j, _)| out.points()[j].branch_id);
        out.points_mut()[dup].branch_id = twin;
    }
    let n0 = out.points().iter().filter(|p| p.branch_id == Some(0)).count();
    summaries.insert(0, zero_summary(n0));
    Ok((out, summaries))
}

/// Segments of the graph joining every point of `set` (plus the origin) to
/// its nearest point of smaller modulus.
fn skeleton(set: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    let mut pts: Vec<Complex64> = set.to_vec();
    pts.push(Complex64::new(0.0, 0.0));
    pts.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut segs = Vec::with_capacity(pts.len());
    for i in 1..pts.len() {
        let j = (0..i)
            .min_by(|&a, &b| (pts[a] - pts[i]).norm().total_cmp(&(pts[b] - pts[i]).norm()))
            .expect("non-empty prefix");
        segs.push((pts[j], pts[i]));
    }
    if segs.is_empty() {
        segs.push((pts[0], pts[0]));
    }
    segs
}

fn dist_to_segment(x: Complex64, (a, b): (Complex64, Complex64)) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (x - a).norm();
    }
    let s = ((x - a) * ab.conj()).re / len2;
    (x - (a + ab * s.clamp(0.0, 1.0))).norm()
}

const SEP_BINS: usize = 16;

/// Separation exponent `μ̂` of `b` from `a`, both accumulating at the origin:
/// lower-envelope slope of `log d(x, a)` against `log |x|` for `x ∈ b`.
pub fn separation_exponent(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::Fit("separation needs points away from the origin".into()));
    }
    let segs = skeleton(a);
    let (lo, hi) = (1e-4 * scale, 0.1 * scale);
    let mut pairs = Vec::new();
    for &x in b {
        let r = x.norm();
        if r < lo || r > hi {
            continue;
        }
        let d = segs.iter().map(|&s| dist_to_segment(x, s)).fold(f64::INFINITY, f64::min);
        if d < 1e-9 * scale {
            if r >= 1e-2 * scale {
                return Err(Error::Overlap { distance: d, modulus: r });
            }
            continue;
        }
        pairs.push((r.ln(), d.ln()));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let width = (lhi - llo) / SEP_BINS as f64;
    let mut mins: Vec<Option<(f64, f64)>> = vec![None; SEP_BINS];
    for &(x, y) in &pairs {
        let k = (((x - llo) / width) as usize).min(SEP_BINS - 1);
        if mins[k].map_or(true, |(_, m)| y < m) {
            mins[k] = Some((x, y));
        }
    }
    let env: Vec<(f64, f64)> = mins.into_iter().flatten().collect();
    if env.len() < 4 {
        return Err(Error::Fit(format!("{} occupied bins for the separation fit", env.len())));
    }
    let xs: Vec<f64> = env.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = env.iter().map(|p| p.1).collect();
    line(&xs, &ys)
        .map(|(slope, _, _)| slope)
        .ok_or_else(|| Error::Fit("degenerate separation envelope".into()))
}

fn area_fraction(cloud: &GammaCloud, delta: f64) -> f64 {
    let n = AREA_GRID;
    let cell = 2.0 * delta / n as f64;
    let mut occupied = vec![false; n * n];
    for p in cloud.points() {
        if p.z.norm() > delta {
            continue;
        }
        let i = (((p.z.re + delta) / cell) as usize).min(n - 1);
        let j = (((p.z.im + delta) / cell) as usize).min(n - 1);
        occupied[i * n + j] = true;
    }
    let mut inside = 0usize;
    let mut hit = 0usize;
    for i in 0..n {
        for j in 0..n {
            let c = Complex64::new(-delta + (i as f64 + 0.5) * cell, -delta + (j as f64 + 0.5) * cell);
            if c.norm() <= delta {
                inside += 1;
                hit += occupied[i * n + j] as usize;
            }
        }
    }
    hit as f64 / inside.max(1) as f64
}

/// Checks that Γ ∩ D_δ is a finite union of arcs from the origin that are
/// pairwise 1-regularly separated. Failures are reported, not raised.
pub fn check_assumptions(p: &ParamPoly, dom: &Domain) -> Result<AssumptionReport> {
    if dom.trivial || p.is_trivial() {
        return Ok(AssumptionReport {
            branches: Vec::new(),
            pairwise_mu: Vec::new(),
            area_fraction: 0.0,
            hyperbolic: true,
            passes: true,
            failure_reason: FailureReason::None,
        });
    }
    let cloud = sample_gamma(p, dom, &CloudSpec::default())?;
    check_assumptions_with_cloud(&cloud, dom)
}

pub fn check_assumptions_with_cloud(cloud: &GammaCloud, dom: &Domain) -> Result<AssumptionReport> {
    let area = area_fraction(cloud, dom.delta);
    let hyperbolic = is_hyperbolic(cloud);
    let mut report = AssumptionReport {
        branches: Vec::new(),
        pairwise_mu: Vec::new(),
        area_fraction: area,
        hyperbolic,
        passes: false,
        failure_reason: FailureReason::Overlap2d,
    };
    if area > AREA_THRESHOLD {
        return Ok(report);
    }
    let (labeled, branches) = match decompose_branches(cloud) {
        Ok(v) => v,
        Err(Error::Unsupported(_)) => {
            report.failure_reason = FailureReason::Unsupported;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let n = branches.len();
    let mut sets: Vec<Vec<Complex64>> = vec![Vec::new(); n];
    for pt in labeled.points() {
        if let Some(id) = pt.branch_id {
            if pt.z.norm() <= dom.delta && pt.z.norm() > 0.0 {
                sets[id].push(pt.z);
            }
        }
    }
    // branch 0 also contains the real interval I_δ
    let mut radii = log_space(1e-8 * dom.delta, dom.delta, 64);
    radii.extend((1..=64).map(|k| dom.delta * k as f64 / 64.0));
    for r in radii {
        sets[0].push(Complex64::new(r, 0.0));
        sets[0].push(Complex64::new(-r, 0.0));
    }

    let mut mu = vec![vec![None; n]; n];
    let mut crossing = false;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            match separation_exponent(&sets[i], &sets[j]) {
                Ok(v) => mu[i][j] = Some(v),
                Err(Error::Overlap { .. }) => crossing = true,
                Err(_) => {}
            }
        }
    }
    let tangential = mu.iter().flatten().flatten().any(|&v| v > 1.0 + MU_TOL);
    report.failure_reason = if crossing {
        FailureReason::BranchCrossing
    } else if tangential {
        FailureReason::TangentialContact
    } else {
        FailureReason::None
    };
    report.passes = report.failure_reason == FailureReason::None;
    report.branches = branches;
    report.pairwise_mu = mu;
    Ok(report)
}
