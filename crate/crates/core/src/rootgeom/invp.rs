use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;

use super::NEAR_POLE;
use crate::error::{Error, Result};
use crate::mpoly::rat_to_f64;
use crate::parampoly::ParamPoly;

/// Polynomial in `t_1..t_m` with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl CPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut out = Self::zero(nvars);
        out.add_term(vec![0; nvars], c);
        out
    }

    /// `t ↦ P(z, t)`.
    pub fn from_param_poly(p: &ParamPoly, z: Complex64) -> Self {
        let m = p.param_dim();
        let d = p.degree();
        let mut out = Self::constant(m, z.powu(d as u32));
        for (j, a) in p.coeffs().iter().enumerate() {
            let zp = z.powu((d - j - 1) as u32);
            for (e, c) in a.terms() {
                out.add_term(e.clone(), zp * rat_to_f64(c));
            }
        }
        out
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Complex64) {
        let entry = self.terms.entry(exps).or_insert_with(Complex64::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut f = e.clone();
                f[var] -= 1;
                out.add_term(f, c * e[var] as f64);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn eval(&self, t: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(t).fold(*c, |acc, (&k, &x)| acc * x.powi(k as i32)))
            .sum()
    }
}

/// `D_t^L (1/P(z, ·))` at `t`, by repeated quotient rule on `N / P^k`.
pub fn inv_p_derivative(p: &ParamPoly, z: Complex64, t: &[f64], multi_index: &[u32]) -> Result<Complex64> {
    let m = p.param_dim();
    if t.len() != m || multi_index.len() != m {
        return Err(Error::Misuse(format!(
            "parameter point and multi-index must have {m} coordinates"
        )));
    }
    let base = CPoly::from_param_poly(p, z);
    let pv = base.eval(t);
    if pv.norm() < NEAR_POLE {
        return Err(Error::NearPole { z, value: pv.norm() });
    }
    let dp: Vec<CPoly> = (0..m).map(|v| base.derivative(v)).collect();
    let mut num = CPoly::constant(m, Complex64::new(1.0, 0.0));
    let mut k = 1u32;
    for (var, &times) in multi_index.iter().enumerate() {
        for _ in 0..times {
            num = num.derivative(var).mul(&base).sub(&num.mul(&dp[var]).scale(k as f64));
            k += 1;
        }
    }
    Ok(num.eval(t) / pv.powu(k))
}
