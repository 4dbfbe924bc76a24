//! Weierstrass polynomials `P(x,t) = x^d + a_1(t) x^{d-1} + … + a_d(t)` with
//! exact rational coefficients `a_j ∈ ℚ[t_1..t_m]`, `a_j(0) = 0`.

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::mpoly::{rat, MPoly};
use crate::roots::{poly_roots, RootFailure, RootOptions, RootSet};

pub const MAX_DEGREE: usize = 64;
pub const MAX_EXPONENT: u32 = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct ParamPoly {
    d: usize,
    m: usize,
    coeffs: Vec<MPoly>,
    /// `f64` copies of the terms of each `a_j` for the numeric hot paths.
    numeric: Vec<Vec<(Vec<u32>, f64)>>,
}

fn eval_terms(terms: &[(Vec<u32>, f64)], t: &[Complex64]) -> Complex64 {
    terms
        .iter()
        .map(|(e, c)| {
            e.iter()
                .zip(t)
                .filter(|(&k, _)| k > 0)
                .fold(Complex64::new(*c, 0.0), |acc, (&k, x)| acc * x.powu(k))
        })
        .sum()
}

impl ParamPoly {
    /// `coeffs[j-1]` is `a_j`, a polynomial in `m` variables.
    pub fn new(m: usize, coeffs: Vec<MPoly>) -> Result<Self> {
        if !(1..=2).contains(&m) {
            return Err(Error::InvalidPoly {
                field: "m".into(),
                reason: format!("parameter dimension {m} not in {{1, 2}}"),
            });
        }
        let d = coeffs.len();
        if d == 0 || d > MAX_DEGREE {
            return Err(Error::InvalidPoly {
                field: "coeffs".into(),
                reason: format!("degree {d} not in 1..={MAX_DEGREE}"),
            });
        }
        for (j, a) in coeffs.iter().enumerate() {
            if a.nvars() != m {
                return Err(Error::InvalidPoly {
                    field: format!("coeffs[{j}]"),
                    reason: format!("expected {m} parameter variables, got {}", a.nvars()),
                });
            }
            if !a.constant_term().is_zero() {
                return Err(Error::InvalidPoly {
                    field: format!("coeffs[{j}]"),
                    reason: format!("a_{}(0) = {} must vanish", j + 1, a.constant_term()),
                });
            }
            if a.terms().any(|(e, _)| e.iter().any(|&k| k > MAX_EXPONENT)) {
                return Err(Error::InvalidPoly {
                    field: format!("coeffs[{j}]"),
                    reason: format!("exponent above {MAX_EXPONENT}"),
                });
            }
        }
        let numeric = coeffs
            .iter()
            .map(|a| a.terms().map(|(e, c)| (e.clone(), crate::mpoly::rat_to_f64(c))).collect())
            .collect();
        Ok(Self {
            d,
            m,
            coeffs,
            numeric,
        })
    }

    /// Builds from `(j, exponents, num, den)` tuples describing terms of `a_j`.
    pub fn from_terms(d: usize, m: usize, terms: &[(usize, &[u32], i64, i64)]) -> Result<Self> {
        let mut coeffs = vec![MPoly::zero(m); d];
        for &(j, e, num, den) in terms {
            if j == 0 || j > d {
                return Err(Error::InvalidPoly {
                    field: "coeffs".into(),
                    reason: format!("coefficient index {j} outside 1..={d}"),
                });
            }
            if e.len() != m || den == 0 {
                return Err(Error::InvalidPoly {
                    field: format!("coeffs[{}]", j - 1),
                    reason: "bad exponent length or zero denominator".into(),
                });
            }
            coeffs[j - 1].add_term(e.to_vec(), rat(num, den));
        }
        Self::new(m, coeffs)
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn param_dim(&self) -> usize {
        self.m
    }

    /// `a_1..a_d`.
    pub fn coeffs(&self) -> &[MPoly] {
        &self.coeffs
    }

    /// Pure `x^d`: every `a_j` vanishes identically.
    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(MPoly::is_zero)
    }

    /// Coefficients in `x`, low degree first: `[a_d(t), …, a_1(t), 1]`.
    pub fn x_coeffs_at(&self, t: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.numeric.iter().rev().map(|a| eval_terms(a, t)).collect();
        out.push(Complex64::one());
        out
    }

    pub fn eval(&self, x: Complex64, t: &[Complex64]) -> Complex64 {
        self.numeric
            .iter()
            .fold(Complex64::one(), |acc, a| acc * x + eval_terms(a, t))
    }

    pub fn eval_real_t(&self, x: Complex64, t: &[f64]) -> Complex64 {
        let tc: Vec<Complex64> = t.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(x, &tc)
    }

    pub fn eval_exact(&self, x: &BigRational, t: &[BigRational]) -> BigRational {
        self.coeffs
            .iter()
            .fold(BigRational::one(), |acc, a| acc * x + a.eval_exact(t))
    }

    /// The `d` roots of `P(·, t)` for a real parameter.
    pub fn roots_in_x(&self, t: &[f64], opts: &RootOptions) -> Result<RootSet> {
        assert_eq!(t.len(), self.m);
        let tc: Vec<Complex64> = t.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        poly_roots(&self.x_coeffs_at(&tc), opts).map_err(|e| match e {
            RootFailure::NoConvergence { residual } => Error::Solver {
                t: t.to_vec(),
                residual,
            },
            RootFailure::ZeroPolynomial => unreachable!("monic polynomial"),
        })
    }

    /// Coefficients of `τ ↦ P(z, τ)` (m = 1), low degree first.
    pub fn tau_coeffs(&self, z: Complex64) -> Vec<Complex64> {
        assert_eq!(self.m, 1, "tau polynomial needs m = 1");
        self.slice_coeffs(z, 0, &[Complex64::zero()])
    }

    /// Coefficients of `τ_free ↦ P(z, τ)` with the other parameter
    /// coordinates taken from `fixed` (its `free` entry is ignored).
    pub fn slice_coeffs(&self, z: Complex64, free: usize, fixed: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(fixed.len(), self.m);
        let deg = self
            .coeffs
            .iter()
            .filter_map(|a| a.degree_in(free))
            .max()
            .unwrap_or(0) as usize;
        let mut out = vec![Complex64::zero(); deg + 1];
        out[0] = z.powu(self.d as u32);
        for (j, a) in self.numeric.iter().enumerate() {
            let zpow = z.powu((self.d - j - 1) as u32);
            for (e, c) in a {
                let mut w = zpow * *c;
                for (v, &k) in e.iter().enumerate() {
                    if v != free && k > 0 {
                        w *= fixed[v].powu(k);
                    }
                }
                out[e[free] as usize] += w;
            }
        }
        out
    }

    /// All complex roots of `τ ↦ P(z, τ)`; the caller filters to the box.
    pub fn roots_in_tau(&self, z: Complex64, opts: &RootOptions) -> Result<Vec<Complex64>> {
        if self.m != 1 {
            return Err(Error::Unsupported("roots_in_tau requires m = 1".into()));
        }
        let coeffs = self.tau_coeffs(z);
        match poly_roots(&coeffs, opts) {
            Ok(rs) => Ok(rs.roots),
            Err(RootFailure::ZeroPolynomial) => Err(Error::DegenerateFiber { z }),
            Err(RootFailure::NoConvergence { residual }) => Err(Error::Solver {
                t: vec![z.re, z.im],
                residual,
            }),
        }
    }

    /// The polynomial as an element of `ℚ[x, t_1..t_m]` (x is variable 0).
    pub fn as_mpoly(&self) -> MPoly {
        let n = 1 + self.m;
        let map: Vec<usize> = (1..=self.m).collect();
        let mut out = MPoly::var(n, 0).pow(self.d as u32);
        for (j, a) in self.coeffs.iter().enumerate() {
            let xp = MPoly::var(n, 0).pow((self.d - j - 1) as u32);
            out = &out + &(&a.embed(n, &map) * &xp);
        }
        out
    }

    pub fn cofactors(&self) -> CofactorSet {
        CofactorSet::new(self)
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{}", self.d)?;
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let p = self.d - j - 1;
            let xs = match p {
                0 => String::new(),
                1 => "*x".to_string(),
                _ => format!("*x^{p}"),
            };
            let single = a.terms().count() == 1;
            match a.terms().next() {
                Some((_, c)) if single && c.is_negative() => write!(f, " - {}{xs}", -a)?,
                _ if single => write!(f, " + {a}{xs}")?,
                _ => write!(f, " + ({a}){xs}")?,
            }
        }
        Ok(())
    }
}

/// Telescoping cofactors: `P(x,t) − P(z,t) = (x − z) Σ_j S_j(z,t) x^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CofactorSet {
    m: usize,
    /// `S_0..S_{d-1}` in variables `(z, t_1..t_m)`.
    s: Vec<MPoly>,
}

impl CofactorSet {
    fn new(p: &ParamPoly) -> Self {
        let m = p.m;
        let n = 1 + m;
        let d = p.d;
        let tmap: Vec<usize> = (1..=m).collect();
        // b_i = coefficient of x^i: b_d = 1, b_i = a_{d-i}
        let b: Vec<MPoly> = (0..=d)
            .map(|i| {
                if i == d {
                    MPoly::one(n)
                } else {
                    p.coeffs[d - i - 1].embed(n, &tmap)
                }
            })
            .collect();
        let z = MPoly::var(n, 0);
        let s: Vec<MPoly> = (0..d)
            .map(|k| {
                (k + 1..=d).fold(MPoly::zero(n), |acc, i| {
                    &acc + &(&b[i] * &z.pow((i - 1 - k) as u32))
                })
            })
            .collect();
        let set = Self { m, s };
        assert!(set.identity_holds(p), "telescoping identity failed");
        set
    }

    pub fn get(&self, j: usize) -> &MPoly {
        &self.s[j]
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Expands both sides in `ℚ[x, z, t]` and compares.
    pub fn identity_holds(&self, p: &ParamPoly) -> bool {
        let n = 2 + self.m;
        let pm = p.as_mpoly();
        let xt: Vec<usize> = std::iter::once(0).chain(2..n).collect();
        let zt: Vec<usize> = (1..n).collect();
        let lhs = &pm.embed(n, &xt) - &pm.embed(n, &zt);
        let x = MPoly::var(n, 0);
        let sum = self.s.iter().enumerate().fold(MPoly::zero(n), |acc, (j, sj)| {
            &acc + &(&sj.embed(n, &zt) * &x.pow(j as u32))
        });
        let rhs = &(&x - &MPoly::var(n, 1)) * &sum;
        lhs == rhs
    }

    /// Evaluates both sides at one exact point.
    pub fn identity_at(&self, p: &ParamPoly, x: &BigRational, z: &BigRational, t: &[BigRational]) -> (BigRational, BigRational) {
        let lhs = p.eval_exact(x, t) - p.eval_exact(z, t);
        let mut zt = vec![z.clone()];
        zt.extend_from_slice(t);
        let mut sum = BigRational::zero();
        let mut xp = BigRational::one();
        for sj in &self.s {
            sum += sj.eval_exact(&zt) * &xp;
            xp *= x;
        }
        (lhs, (x - z) * sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_nonvanishing_constant() {
        let err = ParamPoly::from_terms(2, 1, &[(2, &[0], 1, 1)]).unwrap_err();
        assert!(err.to_string().contains("coeffs[1]"));
        assert!(ParamPoly::new(3, vec![MPoly::zero(3)]).is_err());
    }

    #[test]
    fn eval_examples() {
        let p = examples::x2_plus_t2p(1);
        assert!((p.eval(c(0.0, 1.0), &[c(0.0, 0.0)]) - c(-1.0, 0.0)).norm() < 1e-15);
        let q = examples::xd_minus_t2(3);
        assert!((q.eval(c(0.0, 0.0), &[c(2.0, 0.0)]) - c(-4.0, 0.0)).norm() < 1e-15);
        let r = examples::tangential();
        assert!((r.eval(c(1.0, 0.0), &[c(1.0, 0.0)]) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn roots_in_x_examples() {
        let opts = RootOptions::default();
        let mut r = examples::x2_plus_t2p(1).roots_in_x(&[1.0], &opts).unwrap().roots;
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[0] - c(0.0, -1.0)).norm() < 1e-12 && (r[1] - c(0.0, 1.0)).norm() < 1e-12);
        for d in 2..=5 {
            let rs = examples::xd_minus_t2(d).roots_in_x(&[0.0], &opts).unwrap();
            assert_eq!(rs.roots.len(), d);
            assert!(rs.roots.iter().all(|z| z.norm() == 0.0));
            assert_eq!(rs.clusters[0].multiplicity, d);
        }
        let r4 = examples::xd_minus_t2(4).roots_in_x(&[1.0], &opts).unwrap().roots;
        for want in [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)] {
            assert!(r4.iter().any(|z| (z - want).norm() < 1e-12));
        }
    }

    #[test]
    fn roots_in_tau_examples() {
        let opts = RootOptions::default();
        let r = examples::x2_plus_t2p(1).roots_in_tau(c(1.0, 0.0), &opts).unwrap();
        for want in [c(0.0, 1.0), c(0.0, -1.0)] {
            assert!(r.iter().any(|z| (z - want).norm() < 1e-12));
        }
        let r0 = examples::xd_minus_t2(3).roots_in_tau(c(0.0, 0.0), &opts).unwrap();
        assert_eq!(r0, vec![Complex64::zero(); 2]);
        let r4 = examples::x2_plus_t2p(2).roots_in_tau(c(1.0, 0.0), &opts).unwrap();
        assert_eq!(r4.len(), 4);
        for z in &r4 {
            assert!((z.powu(4) + 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_fiber() {
        // x^2 - t x vanishes identically in t at z = 0
        let p = ParamPoly::from_terms(2, 1, &[(1, &[1], -1, 1)]).unwrap();
        assert!(matches!(
            p.roots_in_tau(Complex64::zero(), &RootOptions::default()),
            Err(Error::DegenerateFiber { .. })
        ));
    }

    #[test]
    fn vieta_on_examples() {
        let opts = RootOptions::default();
        for p in [examples::xd_minus_t2(5), examples::tangential(), examples::x2_plus_t2p(3)] {
            for &t in &[0.3, -0.17, 0.05] {
                let roots = p.roots_in_x(&[t], &opts).unwrap().roots;
                let sum: Complex64 = roots.iter().sum();
                let prod: Complex64 = roots.iter().product();
                let a1 = p.coeffs()[0].eval_real(&[t]);
                let ad = p.coeffs()[p.degree() - 1].eval_real(&[t]);
                let sign = if p.degree() % 2 == 0 { 1.0 } else { -1.0 };
                assert!((sum + a1).norm() < 1e-10);
                assert!((prod - sign * ad).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn tau_and_x_roots_consistent() {
        let opts = RootOptions::default();
        let p = examples::tangential();
        for z in [c(0.1, 0.01), c(0.2, -0.04), c(-0.3, 0.09)] {
            for tau in p.roots_in_tau(z, &opts).unwrap() {
                if tau.im.abs() < 1e-9 {
                    let xs = p.roots_in_x(&[tau.re], &opts).unwrap().roots;
                    assert!(xs.iter().any(|x| (x - z).norm() < 1e-8));
                }
            }
        }
    }

    #[test]
    fn cofactor_examples() {
        let p = examples::x2_plus_t2p(1);
        let s = p.cofactors();
        assert_eq!(s.get(1), &MPoly::one(2));
        assert_eq!(s.get(0), &MPoly::var(2, 0));
        let q = examples::tangential();
        let sq = q.cofactors();
        let want = &MPoly::var(2, 0) - &MPoly::var(2, 1).scale(&rat(2, 1));
        assert_eq!(sq.get(0), &want);
        assert_eq!(sq.get(1), &MPoly::one(2));
    }

    #[test]
    fn cofactor_identity_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut r = || rat(rng.gen_range(-50..50), rng.gen_range(1..20));
        for p in [examples::xd_minus_t2(4), examples::tangential(), examples::overlap_2d(), examples::hyperbolic_2d()] {
            let s = p.cofactors();
            assert_eq!(s.get(p.degree() - 1), &MPoly::one(1 + p.param_dim()));
            for _ in 0..20 {
                let (x, z) = (r(), r());
                let t: Vec<BigRational> = (0..p.param_dim()).map(|_| r()).collect();
                let (lhs, rhs) = s.identity_at(&p, &x, &z, &t);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn display() {
        assert_eq!(examples::xd_minus_t2(4).to_string(), "x^4 - t^2");
        assert_eq!(examples::tangential().to_string(), "x^2 - 2t*x + (t^4 + t^2)");
    }
}
