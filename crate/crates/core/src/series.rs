//! Truncated power series in `(x, t_1..t_m)`, keyed by `(k, L)` for the
//! monomial `x^k t^L`, truncated at total degree `k + |L| ≤ N`.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpoly::rat_to_f64;
use crate::parampoly::ParamPoly;

pub const MAX_ORDER: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    Exact,
    Float,
}

/// Scalar type of series coefficients.
pub trait Coefficient:
    Clone + Debug + PartialEq + Zero + Send + Sync + Neg<Output = Self> + for<'a> Mul<&'a Self, Output = Self>
where
    for<'a> Self: Add<&'a Self, Output = Self> + Sub<&'a Self, Output = Self>,
{
    const MODE: CoefficientMode;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    /// `ln |c|`, finite even when `c` itself overflows an `f64`.
    fn ln_abs(&self) -> f64;
}

impl Coefficient for BigRational {
    const MODE: CoefficientMode = CoefficientMode::Exact;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }

    fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_abs_int(self.numer()) - ln_abs_int(self.denom())
    }
}

impl Coefficient for f64 {
    const MODE: CoefficientMode = CoefficientMode::Float;

    fn from_rational(r: &BigRational) -> Self {
        rat_to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn ln_abs(&self) -> f64 {
        self.abs().ln()
    }
}

fn ln_abs_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(60);
    let top: BigInt = n.abs() >> shift;
    let mant: f64 = num_traits::ToPrimitive::to_f64(&top).unwrap_or(f64::NAN);
    mant.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Key layout: `[k, l_1, .., l_m]`.
pub type SeriesKey = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries2<C: Coefficient = BigRational>
where
    for<'a> C: Add<&'a C, Output = C> + Sub<&'a C, Output = C>,
{
    m: usize,
    n: usize,
    terms: BTreeMap<SeriesKey, C>,
}

fn degree(key: &[u32]) -> usize {
    key.iter().map(|&e| e as usize).sum()
}

impl<C: Coefficient> PowerSeries2<C>
where
    for<'a> C: Add<&'a C, Output = C> + Sub<&'a C, Output = C>,
{
    pub fn zero(m: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&m) {
            return Err(Error::InvalidSeries {
                field: "m".into(),
                reason: format!("parameter dimension {m} not in {{1, 2}}"),
            });
        }
        if n > MAX_ORDER {
            return Err(Error::InvalidSeries {
                field: "N".into(),
                reason: format!("truncation order {n} exceeds {MAX_ORDER}"),
            });
        }
        Ok(Self {
            m,
            n,
            terms: BTreeMap::new(),
        })
    }

    pub fn param_dim(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> CoefficientMode {
        C::MODE
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SeriesKey, &C)> {
        self.terms.iter()
    }

    /// Coefficient of `x^k t^L` (zero when absent).
    pub fn get(&self, k: u32, l: &[u32]) -> C {
        let mut key = vec![k];
        key.extend_from_slice(l);
        self.terms.get(&key).cloned().unwrap_or_else(C::zero)
    }

    /// Adds `c` to the coefficient of `x^k t^L`.
    pub fn add_term(&mut self, k: u32, l: &[u32], c: C) -> Result<()> {
        if l.len() != self.m {
            return Err(Error::InvalidSeries {
                field: "L".into(),
                reason: format!("expected {} parameter exponents, got {}", self.m, l.len()),
            });
        }
        let mut key = vec![k];
        key.extend_from_slice(l);
        if degree(&key) > self.n {
            return Err(Error::InvalidSeries {
                field: "terms".into(),
                reason: format!("term x^{k} t^{l:?} exceeds truncation order {}", self.n),
            });
        }
        self.accumulate(key, c);
        Ok(())
    }

    fn accumulate(&mut self, key: SeriesKey, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_insert_with(C::zero);
        *entry = entry.clone() + &c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Same terms under truncation order `n` (terms above `n` dropped).
    pub fn with_order(&self, n: usize) -> Self {
        let mut out = self.truncate(n);
        out.n = n;
        out
    }

    /// Drops every term above total degree `n`.
    pub fn truncate(&self, n: usize) -> Self {
        Self {
            m: self.m,
            n: n.min(self.n),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| degree(k) <= n)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.m, other.m, "series in different parameter dimensions");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let n = self.n.min(other.n);
        let mut out = self.truncate(n);
        for (k, v) in &other.terms {
            if degree(k) <= n {
                out.accumulate(k.clone(), v.clone());
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            m: self.m,
            n: self.n,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self {
            m: self.m,
            n: self.n,
            terms: BTreeMap::new(),
        };
        for (k, v) in &self.terms {
            out.accumulate(k.clone(), v.clone() * c);
        }
        out
    }

    /// Product truncated at the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let n = self.n.min(other.n);
        let mut out = Self {
            m: self.m,
            n,
            terms: BTreeMap::new(),
        };
        for (ka, va) in &self.terms {
            let da = degree(ka);
            if da > n {
                continue;
            }
            for (kb, vb) in &other.terms {
                if da + degree(kb) > n {
                    continue;
                }
                let key = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                out.accumulate(key, va.clone() * vb);
            }
        }
        out
    }

    /// Multiplication by `x^s`, truncated.
    pub fn shift_x(&self, s: u32) -> Self {
        let mut out = Self {
            m: self.m,
            n: self.n,
            terms: BTreeMap::new(),
        };
        for (k, v) in &self.terms {
            let mut key = k.clone();
            key[0] += s;
            if degree(&key) <= self.n {
                out.terms.insert(key, v.clone());
            }
        }
        out
    }

    /// Taylor split in `x`: `(⌊g / x^d⌋, [g_0(t), …, g_{d-1}(t)])` with
    /// `g = x^d·q + Σ_j g_j(t) x^j`. The quotient keeps order `N − d`.
    pub fn split_x(&self, d: usize) -> (Self, Vec<Self>) {
        let mut q = Self {
            m: self.m,
            n: self.n.saturating_sub(d),
            terms: BTreeMap::new(),
        };
        let mut r: Vec<Self> = (0..d)
            .map(|_| Self {
                m: self.m,
                n: self.n,
                terms: BTreeMap::new(),
            })
            .collect();
        for (k, v) in &self.terms {
            let x = k[0] as usize;
            if x >= d {
                let mut key = k.clone();
                key[0] -= d as u32;
                q.terms.insert(key, v.clone());
            } else {
                let mut key = k.clone();
                key[0] = 0;
                r[x].terms.insert(key, v.clone());
            }
        }
        (q, r)
    }

    /// `P(x, t)` as a series (or `P − x^d` with `drop_leading`).
    pub fn from_param_poly(p: &ParamPoly, n: usize, drop_leading: bool) -> Result<Self> {
        let mut out = Self::zero(p.param_dim(), n)?;
        let d = p.degree();
        if !drop_leading && d <= n {
            out.terms.insert(
                std::iter::once(d as u32).chain(std::iter::repeat(0).take(p.param_dim())).collect(),
                C::from_rational(&BigRational::from_integer(1.into())),
            );
        }
        for (j, a) in p.coeffs().iter().enumerate() {
            let xp = (d - j - 1) as u32;
            for (e, c) in a.terms() {
                let key: SeriesKey = std::iter::once(xp).chain(e.iter().copied()).collect();
                if degree(&key) <= n {
                    out.accumulate(key, C::from_rational(c));
                }
            }
        }
        Ok(out)
    }

    /// Coefficients of `t^L` for the pure-`t` part along parameter `var`
    /// (other parameter exponents zero), indexed by degree `0..=N`.
    pub fn t_stream(&self, k: u32, var: usize) -> Vec<C> {
        (0..=self.n.saturating_sub(k as usize))
            .map(|l| {
                let mut exps = vec![0u32; self.m];
                exps[var] = l as u32;
                self.get(k, &exps)
            })
            .collect()
    }

    /// Coefficients of `x^k` with `L = 0`, indexed by `k ∈ 0..=N`.
    pub fn x_stream(&self) -> Vec<C> {
        let zero = vec![0u32; self.m];
        (0..=self.n as u32).map(|k| self.get(k, &zero)).collect()
    }

    /// The series depends on `x` only.
    pub fn is_x_only(&self) -> bool {
        self.terms.keys().all(|k| k[1..].iter().all(|&e| e == 0))
    }

    /// Largest `|c|` over all coefficients, as `f64`.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn to_float(&self) -> PowerSeries2<f64> {
        PowerSeries2 {
            m: self.m,
            n: self.n,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect(),
        }
    }
}

impl PowerSeries2<BigRational> {
    /// `Σ_k c_k x^k` truncated at `n`.
    pub fn from_x_coeffs(m: usize, n: usize, coeffs: &[BigRational]) -> Result<Self> {
        let mut out = Self::zero(m, n)?;
        let zero = vec![0u32; m];
        for (k, c) in coeffs.iter().enumerate().take(n + 1) {
            out.add_term(k as u32, &zero, c.clone())?;
        }
        Ok(out)
    }

    /// Largest absolute value, `0` exactly when the series vanishes.
    pub fn max_abs_exact(&self) -> BigRational {
        self.terms
            .values()
            .map(|v| v.abs())
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
    }
}
