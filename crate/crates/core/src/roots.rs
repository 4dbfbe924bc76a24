//! Univariate complex root finding: companion-matrix eigenvalues polished by
//! Aberth-Ehrlich iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions {
    pub tol_root: f64,
    pub cluster_radius: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol_root: 1e-12,
            cluster_radius: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cluster {
    pub center: Complex64,
    pub multiplicity: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    /// All roots, repeated according to multiplicity.
    pub roots: Vec<Complex64>,
    pub clusters: Vec<Cluster>,
    /// Largest scaled residual `|p(r)| / (scale·(1+|r|)^n)`.
    pub max_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootFailure {
    /// Every coefficient is zero.
    ZeroPolynomial,
    NoConvergence { residual: f64 },
}

pub fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::zero(), |acc, &c| acc * x + c)
}

pub(crate) fn horner_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Roots of `Σ coeffs[k] x^k`. Exactly-zero leading coefficients are dropped,
/// exactly-zero trailing coefficients become exact roots at the origin.
pub fn poly_roots(coeffs: &[Complex64], opts: &RootOptions) -> Result<RootSet, RootFailure> {
    let Some(top) = coeffs.iter().rposition(|c| !c.is_zero()) else {
        return Err(RootFailure::ZeroPolynomial);
    };
    let coeffs = &coeffs[..=top];
    let zeros = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
    let reduced: Vec<Complex64> = coeffs[zeros..].iter().map(|c| c / coeffs[top]).collect();
    let n = reduced.len() - 1;

    let mut roots = vec![Complex64::zero(); zeros];
    if n > 0 {
        let found = match n {
            1 => vec![-reduced[0]],
            2 => quadratic(reduced[1], reduced[0]).to_vec(),
            _ => {
                // x = s·y with s the Fujiwara-type root scale, so the y-roots are O(1)
                let s = (0..n)
                    .map(|k| reduced[k].norm().powf(1.0 / (n - k) as f64))
                    .fold(0.0, f64::max);
                let scaled: Vec<Complex64> = (0..=n).map(|k| reduced[k] / s.powi((n - k) as i32)).collect();
                solve_monic(&scaled, opts).into_iter().map(|y| y * s).collect()
            }
        };
        roots.extend(found);
    }

    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / coeffs[top]).collect();
    let scale = monic.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let deg = monic.len() - 1;
    let max_residual = roots
        .iter()
        .map(|&r| horner(&monic, r).norm() / (scale * (1.0 + r.norm()).powi(deg as i32)))
        .fold(0.0, f64::max);
    if !(max_residual <= opts.tol_root) {
        return Err(RootFailure::NoConvergence {
            residual: max_residual,
        });
    }
    let clusters = cluster(&roots, opts.cluster_radius);
    Ok(RootSet {
        roots,
        clusters,
        max_residual,
    })
}

/// Roots of `x² + b x + c` without cancellation.
fn quadratic(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - c * 4.0).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { b + disc } else { b - disc };
    if s.is_zero() {
        return [Complex64::zero(), Complex64::zero()];
    }
    let q = -s / 2.0;
    [q, c / q]
}

fn solve_monic(monic: &[Complex64], opts: &RootOptions) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -monic[n - 1 - j]
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::zero()
        }
    });
    let initial = match companion.try_schur(1e-15, 10_000) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
        None => circle_guesses(monic),
    };
    let refined = aberth(monic, initial.clone(), opts.max_iter);
    let worst = |rs: &[Complex64]| {
        rs.iter()
            .map(|&r| horner(monic, r).norm() / (1.0 + r.norm()).powi(n as i32))
            .fold(0.0, f64::max)
    };
    if refined.iter().all(|r| r.is_finite()) && worst(&refined) <= worst(&initial) {
        refined
    } else {
        initial
    }
}

fn circle_guesses(monic: &[Complex64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let radius = monic[..n]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1e-3);
    (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}

fn aberth(monic: &[Complex64], mut z: Vec<Complex64>, max_iter: usize) -> Vec<Complex64> {
    let n = z.len();
    for _ in 0..max_iter {
        let mut biggest = 0.0f64;
        for k in 0..n {
            let (p, dp) = horner_with_derivative(monic, z[k]);
            if p.is_zero() {
                continue;
            }
            let w = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k && z[j] != z[k])
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = w / (Complex64::new(1.0, 0.0) - w * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[k] -= step;
            biggest = biggest.max(step.norm() / (1.0 + z[k].norm()));
        }
        if biggest <= 1e-16 {
            break;
        }
    }
    z
}

fn cluster(roots: &[Complex64], radius: f64) -> Vec<Cluster> {
    let scale = roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let eps = radius * scale.max(f64::MIN_POSITIVE);
    let mut label: Vec<usize> = (0..roots.len()).collect();
    for i in 0..roots.len() {
        for j in 0..i {
            if (roots[i] - roots[j]).norm() <= eps {
                let (a, b) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == a {
                        *l = b;
                    }
                }
            }
        }
    }
    let mut ids: Vec<usize> = label.clone();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let members: Vec<Complex64> = roots
                .iter()
                .zip(&label)
                .filter(|(_, &l)| l == id)
                .map(|(r, _)| *r)
                .collect();
            let center = members.iter().sum::<Complex64>() / members.len() as f64;
            let radius = members
                .iter()
                .map(|r| (r - center).norm())
                .fold(0.0, f64::max);
            Cluster {
                center,
                multiplicity: members.len(),
                radius,
            }
        })
        .collect()
}
