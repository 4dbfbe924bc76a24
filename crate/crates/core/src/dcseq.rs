//! Denjoy-Carleman weight sequences.
//!
//! A [`DCSequence`] caches `M_0..=M_{j_max}` in the log domain so Gevrey
//! factorial powers stay finite far past the `f64` range. Every axiom check
//! in this module is a certificate over the cached indices only; reported
//! constants are lower bounds on the true (infinite-range) constants.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::log_space;

pub const DEFAULT_J_MAX: usize = 48;
pub const MIN_GENERATED_J_MAX: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Generator {
    Gevrey { alpha: f64 },
    GevreyLog { alpha: f64, beta: f64 },
    Explicit { values: Vec<f64> },
}

/// On-disk form: the generator plus an optional cache length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(flatten)]
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DCSequence {
    generator: Generator,
    j_max: usize,
    ln_values: Vec<f64>,
    values: Vec<f64>,
}

impl DCSequence {
    pub fn gevrey(alpha: f64, j_max: usize) -> Result<Self> {
        Self::new(Generator::Gevrey { alpha }, j_max)
    }

    pub fn gevrey_log(alpha: f64, beta: f64, j_max: usize) -> Result<Self> {
        Self::new(Generator::GevreyLog { alpha, beta }, j_max)
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let j_max = values.len().saturating_sub(1);
        Self::new(Generator::Explicit { values }, j_max)
    }

    pub fn from_spec(spec: &SequenceSpec) -> Result<Self> {
        match &spec.generator {
            Generator::Explicit { values } => {
                if let Some(j) = spec.j_max {
                    if j + 1 != values.len() {
                        return Err(Error::InvalidSequence(format!(
                            "j_max {j} does not match {} explicit values",
                            values.len()
                        )));
                    }
                }
                Self::explicit(values.clone())
            }
            g => Self::new(g.clone(), spec.j_max.unwrap_or(DEFAULT_J_MAX)),
        }
    }

    pub fn spec(&self) -> SequenceSpec {
        SequenceSpec {
            generator: self.generator.clone(),
            j_max: match self.generator {
                Generator::Explicit { .. } => None,
                _ => Some(self.j_max),
            },
        }
    }

    pub fn new(generator: Generator, j_max: usize) -> Result<Self> {
        let ln_values: Vec<f64> = match &generator {
            Generator::Gevrey { alpha } => {
                check_alpha(*alpha)?;
                check_generated_len(j_max)?;
                ln_factorials(j_max).into_iter().map(|l| alpha * l).collect()
            }
            Generator::GevreyLog { alpha, beta } => {
                check_alpha(*alpha)?;
                if !beta.is_finite() {
                    return Err(Error::InvalidSequence("beta must be finite".into()));
                }
                check_generated_len(j_max)?;
                ln_factorials(j_max)
                    .into_iter()
                    .enumerate()
                    .map(|(j, l)| {
                        let j = j as f64;
                        alpha * l + beta * j * (j + std::f64::consts::E).ln().ln()
                    })
                    .collect()
            }
            Generator::Explicit { values } => {
                if values.len() < 2 {
                    return Err(Error::InvalidSequence(
                        "explicit sequence needs at least two values".into(),
                    ));
                }
                if let Some((j, v)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !(v.is_finite() && **v > 0.0))
                {
                    return Err(Error::InvalidSequence(format!(
                        "M_{j} = {v} is not a positive finite number"
                    )));
                }
                if values[0] != 1.0 {
                    return Err(Error::InvalidSequence(format!(
                        "M_0 = {} but must equal 1",
                        values[0]
                    )));
                }
                values.iter().map(|v| v.ln()).collect()
            }
        };
        if let Some(j) = (1..ln_values.len()).find(|&j| ln_values[j] < ln_values[j - 1] - 1e-12) {
            return Err(Error::InvalidSequence(format!(
                "sequence decreases at index {j}"
            )));
        }
        let values = match &generator {
            Generator::Explicit { values } => values.clone(),
            Generator::Gevrey { alpha } if alpha.fract() == 0.0 && *alpha <= 64.0 => {
                exact_gevrey(*alpha as u32, j_max)
            }
            _ => ln_values.iter().map(|l| l.exp()).collect(),
        };
        Ok(Self {
            generator,
            j_max,
            ln_values,
            values,
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// `M_j`; may be `+inf` when the value exceeds `f64`, see [`Self::ln_value`].
    pub fn value(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.values[j])
    }

    pub fn ln_value(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.ln_values[j])
    }

    /// `M_j` as an exact rational: exact for integer-α Gevrey sequences,
    /// otherwise the binary value of the cached float.
    pub fn exact_value(&self, j: usize) -> Result<BigRational> {
        self.check_index(j)?;
        if let Generator::Gevrey { alpha } = self.generator {
            if alpha.fract() == 0.0 && alpha <= 64.0 {
                let fact: BigUint = (1..=j as u64).map(BigUint::from).product();
                return Ok(BigRational::from_integer(BigInt::from(fact.pow(alpha as u32))));
            }
        }
        BigRational::from_float(self.values[j])
            .ok_or_else(|| Error::InvalidSequence(format!("M_{j} is not representable exactly")))
    }

    pub fn ln_values(&self) -> &[f64] {
        &self.ln_values
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j > self.j_max {
            Err(Error::Range {
                index: j,
                j_max: self.j_max,
            })
        } else {
            Ok(())
        }
    }

    pub fn check_regularity(&self) -> RegularityReport {
        let l = &self.ln_values;
        let n = self.j_max;
        let scale = 1e-12 * (1.0 + l[n].abs());
        let log_convex = (1..n).all(|j| (l[j + 1] - l[j]) - (l[j] - l[j - 1]) >= -scale);

        let mut moderate = 0.0f64;
        for s in 1..=n {
            for j in 0..=s {
                let k = s - j;
                moderate = moderate.max((l[s] - l[j] - l[k]) / s as f64);
            }
        }

        // term_j = M_j / ((j+1) M_{j+1}), summed from k to j_max - 1
        let terms: Vec<f64> = (0..n)
            .map(|j| (l[j] - l[j + 1] - ((j + 1) as f64).ln()).exp())
            .collect();
        let mut snqa = 0.0f64;
        let mut tail = 0.0;
        for k in (0..n).rev() {
            tail += terms[k];
            let ratio = (l[k] - l[k + 1]).exp();
            snqa = snqa.max(tail / ratio);
        }

        let derivation = (0..n)
            .map(|j| (l[j + 1] - l[j]) / (j + 1) as f64)
            .fold(0.0f64, f64::max);

        RegularityReport {
            j_max: n,
            log_convex,
            moderate_growth_a: moderate.exp().max(1.0),
            snqa_a: snqa,
            snqa_truncated: true,
            snqa_tail_term: terms[n - 1],
            derivation_a: derivation.exp().max(1.0),
        }
    }

    /// `h_M(t) = inf_j t^j M_j` over the cached range.
    pub fn h_function(&self, t: f64) -> HValue {
        if t <= 0.0 {
            return HValue {
                value: 0.0,
                argmin: None,
                saturated: false,
            };
        }
        let lt = t.ln();
        let (argmin, best) = self
            .ln_values
            .iter()
            .enumerate()
            .map(|(j, lm)| (j, j as f64 * lt + lm))
            .fold((0, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
        HValue {
            value: best.exp(),
            argmin: Some(argmin),
            saturated: argmin == self.j_max,
        }
    }

    fn ln_h(&self, t: f64) -> f64 {
        let lt = t.ln();
        self.ln_values
            .iter()
            .enumerate()
            .map(|(j, lm)| j as f64 * lt + lm)
            .fold(f64::INFINITY, f64::min)
    }

    /// Recovers `M_j` as `sup_t t^{-j} h_M(t)` over a log-spaced grid.
    pub fn legendre_recover(&self, j: usize, grid: &LogGrid) -> Result<Legendre> {
        self.check_index(j)?;
        let ts = grid.points();
        let (idx, best) = ts
            .iter()
            .map(|&t| self.ln_h(t) - j as f64 * t.ln())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        // a flat supremum reaching the first/last node is still interior
        let interior = |i: usize| {
            let v = self.ln_h(ts[i]) - j as f64 * ts[i].ln();
            (v - best).abs() <= 1e-12 * (1.0 + best.abs())
        };
        let at_endpoint = (idx == 0 && !(ts.len() > 1 && interior(1)))
            || (idx + 1 == ts.len() && !(ts.len() > 1 && interior(ts.len() - 2)));
        Ok(Legendre {
            value: best.exp(),
            ln_value: best,
            at_endpoint,
        })
    }

    /// `((M_j)^s)_j` with empirical constants for `A_1^{j+1} M_j^s ≤ M_{⌊sj⌋} ≤ A_2^{j+1} M_j^s`.
    pub fn power_sequence(&self, s: f64) -> Result<PowerSequence> {
        if !(s >= 1.0 && s.is_finite()) {
            return Err(Error::InvalidSequence(format!(
                "power exponent {s} must be a finite real >= 1"
            )));
        }
        let generator = match &self.generator {
            Generator::Gevrey { alpha } => Generator::Gevrey { alpha: alpha * s },
            Generator::GevreyLog { alpha, beta } => Generator::GevreyLog {
                alpha: alpha * s,
                beta: beta * s,
            },
            Generator::Explicit { values } => Generator::Explicit {
                values: values.iter().map(|v| v.powf(s)).collect(),
            },
        };
        let seq = Self::new(generator, self.j_max)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut checked_through = 0;
        for j in 0..=self.j_max {
            let sj = (s * j as f64).floor() as usize;
            if sj > self.j_max {
                break;
            }
            checked_through = j;
            let v = (self.ln_values[sj] - s * self.ln_values[j]) / (j + 1) as f64;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(PowerSequence {
            seq,
            a1: lo.exp(),
            a2: hi.exp(),
            checked_through,
            limited: (s * self.j_max as f64).floor() as usize > self.j_max,
        })
    }

    /// Smallest `κ` on a geometric candidate ladder with `h(t) ≤ h(κt)^s`
    /// at every grid point; `None` when no candidate up to `kappa_max` works.
    pub fn kappa_s(&self, s: f64, grid: &LogGrid, kappa_max: f64) -> Option<f64> {
        let ts = grid.points();
        let holds = |kappa: f64| {
            ts.iter()
                .all(|&t| self.ln_h(t) <= s * self.ln_h(kappa * t) + 1e-12)
        };
        let mut kappa = 1.0;
        while kappa <= kappa_max {
            if holds(kappa) {
                return Some(kappa);
            }
            kappa *= 1.01;
        }
        None
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSequence(format!("alpha = {alpha} must be positive")))
    }
}

fn check_generated_len(j_max: usize) -> Result<()> {
    if j_max < MIN_GENERATED_J_MAX {
        return Err(Error::InvalidSequence(format!(
            "j_max = {j_max} below the minimum {MIN_GENERATED_J_MAX}"
        )));
    }
    if j_max > 4096 {
        return Err(Error::InvalidSequence(format!("j_max = {j_max} too large")));
    }
    Ok(())
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

fn exact_gevrey(alpha: u32, j_max: usize) -> Vec<f64> {
    let mut fact = BigUint::one();
    let mut out = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        if j > 0 {
            fact *= j;
        }
        out.push(fact.pow(alpha).to_f64().unwrap_or(f64::INFINITY));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    pub j_max: usize,
    pub log_convex: bool,
    pub moderate_growth_a: f64,
    pub snqa_a: f64,
    pub snqa_truncated: bool,
    pub snqa_tail_term: f64,
    pub derivation_a: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HValue {
    pub value: f64,
    pub argmin: Option<usize>,
    pub saturated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Legendre {
    pub value: f64,
    pub ln_value: f64,
    pub at_endpoint: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSequence {
    pub seq: DCSequence,
    pub a1: f64,
    pub a2: f64,
    pub checked_through: usize,
    pub limited: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Self {
        Self { t_min, t_max, n }
    }

    /// Grid over `[t_min, 1/M_1]` wide enough that the supremum for index
    /// `j` is interior.
    pub fn covering(seq: &DCSequence, j: usize, n: usize) -> Self {
        let l = seq.ln_values();
        let t_max = (-l[1]).exp();
        let jj = j.min(seq.j_max() - 1);
        let t_min = (0.1 * (l[jj] - l[jj + 1]).exp()).min(1e-4 * t_max);
        Self { t_min, t_max, n }
    }

    pub fn points(&self) -> Vec<f64> {
        log_space(self.t_min, self.t_max, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gevrey_values() {
        let g = DCSequence::gevrey(1.0, DEFAULT_J_MAX).unwrap();
        assert_eq!(g.value(0).unwrap(), 1.0);
        assert_eq!(g.value(3).unwrap(), 6.0);
        let gl = DCSequence::gevrey_log(1.0, 0.0, DEFAULT_J_MAX).unwrap();
        assert!((gl.value(4).unwrap() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range() {
        let g = DCSequence::gevrey(1.0, 10).unwrap();
        assert!(matches!(g.value(11), Err(Error::Range { index: 11, j_max: 10 })));
    }

    #[test]
    fn gevrey_log_formula() {
        let g = DCSequence::gevrey_log(1.5, 2.0, 20).unwrap();
        let j = 7usize;
        let expect = (5040f64).powf(1.5) * ((j as f64 + std::f64::consts::E).ln()).powf(2.0 * j as f64);
        assert!((g.value(j).unwrap() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_validation() {
        assert!(DCSequence::explicit(vec![1.0, -1.0]).is_err());
        assert!(DCSequence::explicit(vec![2.0, 3.0]).is_err());
        assert!(DCSequence::explicit(vec![1.0, 3.0, 2.0]).is_err());
        assert!(DCSequence::explicit(vec![1.0]).is_err());
        assert!(DCSequence::gevrey(1.0, 4).is_err());
    }

    #[test]
    fn regularity_examples() {
        let r = DCSequence::gevrey(1.0, DEFAULT_J_MAX).unwrap().check_regularity();
        assert!(r.log_convex);
        let r2 = DCSequence::gevrey(2.0, DEFAULT_J_MAX).unwrap().check_regularity();
        assert!(r2.moderate_growth_a >= 1.0 && r2.moderate_growth_a <= 4.0);
        let bad = DCSequence::explicit(vec![1.0, 1.0, 3.0, 4.0]).unwrap().check_regularity();
        assert!(!bad.log_convex);
    }

    #[test]
    fn moderate_growth_matches_binomial_scan() {
        // oracle: max over j+k<=48 of binom(j+k,j)^{2/(j+k)} computed with exact integers
        let mut best = 1.0f64;
        for s in 1..=48u32 {
            let mut c = BigUint::one();
            for j in 0..=s {
                if j > 0 {
                    c = c * (s - j + 1) / j;
                }
                best = best.max(c.to_f64().unwrap().powf(2.0 / s as f64));
            }
        }
        let r = DCSequence::gevrey(2.0, 48).unwrap().check_regularity();
        assert!((r.moderate_growth_a / best - 1.0).abs() < 1e-9);
    }

    #[test]
    fn h_examples() {
        let g = DCSequence::gevrey(1.0, 50).unwrap();
        assert_eq!(g.h_function(2.0).value, 1.0);
        assert_eq!(g.h_function(0.0).value, 0.0);
        // brute-force oracle: min over j<=50 of 0.5^j j!
        let mut best = f64::INFINITY;
        let mut f = 1.0;
        for j in 0..=50 {
            if j > 0 {
                f *= j as f64;
            }
            best = best.min(0.5f64.powi(j) * f);
        }
        assert!((g.h_function(0.5).value - best).abs() < 1e-15);
        assert!((best - 0.5).abs() < 1e-15);
    }

    #[test]
    fn h_saturation_flag() {
        let g = DCSequence::gevrey(1.0, 10).unwrap();
        assert!(g.h_function(1e-6).saturated);
        assert!(!g.h_function(0.3).saturated);
    }

    #[test]
    fn legendre_examples() {
        let g1 = DCSequence::gevrey(1.0, DEFAULT_J_MAX).unwrap();
        let grid = LogGrid::new(1e-4, 1.0, 10_000);
        let m0 = g1.legendre_recover(0, &grid).unwrap();
        assert!((m0.value - 1.0).abs() < 1e-12);
        let m2 = g1.legendre_recover(2, &grid).unwrap();
        assert!((m2.value / 2.0 - 1.0).abs() < 1e-3);
        let g2 = DCSequence::gevrey(2.0, DEFAULT_J_MAX).unwrap();
        let m3 = g2.legendre_recover(3, &grid).unwrap();
        assert!((m3.value / 36.0 - 1.0).abs() < 1e-3);
        assert!(!m3.at_endpoint);
    }

    #[test]
    fn legendre_endpoint_warning() {
        let g = DCSequence::gevrey(1.0, DEFAULT_J_MAX).unwrap();
        let narrow = LogGrid::new(0.5, 1.0, 100);
        assert!(g.legendre_recover(10, &narrow).unwrap().at_endpoint);
    }

    #[test]
    fn power_sequence_examples() {
        let g = DCSequence::gevrey(1.0, 40).unwrap();
        let p = g.power_sequence(2.0).unwrap();
        for j in 0..=12 {
            let f = g.value(j).unwrap();
            assert!((p.seq.value(j).unwrap() / (f * f) - 1.0).abs() < 1e-12);
        }
        assert!(p.limited && p.checked_through == 20);
        // (j!)^2 <= (2j)! for j <= 20, so A_1 = 1 is admissible
        assert!(p.a1 >= 1.0 - 1e-12);
        let id = g.power_sequence(1.0).unwrap();
        assert!((id.a1 - 1.0).abs() < 1e-12 && (id.a2 - 1.0).abs() < 1e-12 && !id.limited);
        assert!(g.power_sequence(0.5).is_err());
    }

    #[test]
    fn kappa_exists_for_gevrey() {
        let g = DCSequence::gevrey(1.0, DEFAULT_J_MAX).unwrap();
        let k = g.kappa_s(2.0, &LogGrid::new(0.03, 1.0, 200), 100.0).unwrap();
        assert!(k >= 1.0);
    }

    #[test]
    fn spec_json() {
        let s: SequenceSpec =
            serde_json::from_str(r#"{"generator": "gevrey", "alpha": 1.0, "j_max": 48}"#).unwrap();
        let seq = DCSequence::from_spec(&s).unwrap();
        assert_eq!(seq.j_max(), 48);
        let e: SequenceSpec =
            serde_json::from_str(r#"{"generator": "explicit", "values": [1, 2, 6]}"#).unwrap();
        assert_eq!(DCSequence::from_spec(&e).unwrap().j_max(), 2);
        assert_eq!(seq.spec(), s);
    }
}
