//! JSON forms of polynomials, series and sequences.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dcseq::{DCSequence, SequenceSpec};
use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::parampoly::ParamPoly;
use crate::series::{CoefficientMode, PowerSeries2};

/// Largest accepted JSON document, in bytes.
pub const MAX_INPUT_BYTES: usize = 4 << 20;
pub const MAX_TERMS: usize = 100_000;
pub const MAX_DIGITS: usize = 4096;

/// Integer carried either as a JSON number or as a decimal string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BigIntJson {
    Small(i64),
    Big(String),
}

impl BigIntJson {
    pub fn from_bigint(n: &BigInt) -> Self {
        match n.to_i64() {
            Some(v) => Self::Small(v),
            None => Self::Big(n.to_string()),
        }
    }

    fn to_bigint(&self) -> std::result::Result<BigInt, String> {
        match self {
            Self::Small(v) => Ok(BigInt::from(*v)),
            Self::Big(s) => {
                if s.len() > MAX_DIGITS {
                    return Err(format!("integer longer than {MAX_DIGITS} digits"));
                }
                BigInt::from_str(s).map_err(|_| format!("{s:?} is not a decimal integer"))
            }
        }
    }
}

fn ratio(num: &BigIntJson, den: &BigIntJson) -> std::result::Result<BigRational, String> {
    let n = num.to_bigint()?;
    let d = den.to_bigint()?;
    if d.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(n, d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialJson {
    pub t_exponents: Vec<u32>,
    pub num: BigIntJson,
    #[serde(default = "one")]
    pub den: BigIntJson,
}

fn one() -> BigIntJson {
    BigIntJson::Small(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub d: usize,
    pub m: usize,
    pub coeffs: Vec<Vec<MonomialJson>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesTermJson {
    pub k: u32,
    #[serde(rename = "L")]
    pub l: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<BigIntJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<BigIntJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mode: CoefficientMode,
    pub terms: Vec<SeriesTermJson>,
}

fn check_size(text: &str, field: &str) -> Result<()> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(Error::InvalidPoly {
            field: field.into(),
            reason: format!("document larger than {MAX_INPUT_BYTES} bytes"),
        });
    }
    Ok(())
}

fn decode<T: for<'de> Deserialize<'de>>(text: &str) -> std::result::Result<T, (String, String)> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.into_inner().to_string();
        let named = ["missing field `", "unknown field `"]
            .iter()
            .find_map(|p| msg.strip_prefix(p))
            .and_then(|rest| rest.split('`').next());
        let path = match (path.as_str(), named) {
            (".", Some(name)) => name.to_string(),
            (".", None) => "<root>".to_string(),
            (_, Some(name)) => format!("{path}.{name}"),
            (_, None) => path,
        };
        (path, msg)
    })
}

impl PolyJson {
    pub fn from_poly(p: &ParamPoly) -> Self {
        Self {
            d: p.degree(),
            m: p.param_dim(),
            coeffs: p
                .coeffs()
                .iter()
                .map(|a| {
                    a.terms()
                        .map(|(e, c)| MonomialJson {
                            t_exponents: e.clone(),
                            num: BigIntJson::from_bigint(c.numer()),
                            den: BigIntJson::from_bigint(c.denom()),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_poly(&self) -> Result<ParamPoly> {
        let bad = |field: String, reason: String| Error::InvalidPoly { field, reason };
        if !(1..=2).contains(&self.m) {
            return Err(bad("m".into(), format!("parameter dimension {} not in {{1, 2}}", self.m)));
        }
        if self.coeffs.len() != self.d {
            return Err(bad(
                "coeffs".into(),
                format!("{} coefficient lists for degree d = {}", self.coeffs.len(), self.d),
            ));
        }
        let total: usize = self.coeffs.iter().map(Vec::len).sum();
        if total > MAX_TERMS {
            return Err(bad("coeffs".into(), format!("more than {MAX_TERMS} monomials")));
        }
        let mut out = Vec::with_capacity(self.d);
        for (j, list) in self.coeffs.iter().enumerate() {
            let mut a = MPoly::zero(self.m);
            for (i, mono) in list.iter().enumerate() {
                if mono.t_exponents.len() != self.m {
                    return Err(bad(
                        format!("coeffs[{j}][{i}].t_exponents"),
                        format!("expected {} exponents, got {}", self.m, mono.t_exponents.len()),
                    ));
                }
                let c = ratio(&mono.num, &mono.den).map_err(|r| bad(format!("coeffs[{j}][{i}]"), r))?;
                a.add_term(mono.t_exponents.clone(), c);
            }
            out.push(a);
        }
        ParamPoly::new(self.m, out)
    }
}

pub fn parse_poly(text: &str) -> Result<ParamPoly> {
    check_size(text, "<root>")?;
    let raw: PolyJson = decode(text).map_err(|(field, reason)| Error::InvalidPoly { field, reason })?;
    raw.to_poly()
}

pub fn poly_to_json(p: &ParamPoly) -> String {
    serde_json::to_string_pretty(&PolyJson::from_poly(p)).expect("polynomial serializes")
}

/// Series read from JSON, in whichever coefficient mode it declares.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySeries {
    Exact(PowerSeries2<BigRational>),
    Float(PowerSeries2<f64>),
}

impl SeriesJson {
    pub fn from_exact(s: &PowerSeries2<BigRational>) -> Self {
        Self {
            m: s.param_dim(),
            n: s.order(),
            mode: CoefficientMode::Exact,
            terms: s
                .terms()
                .map(|(key, c)| SeriesTermJson {
                    k: key[0],
                    l: key[1..].to_vec(),
                    num: Some(BigIntJson::from_bigint(c.numer())),
                    den: Some(BigIntJson::from_bigint(c.denom())),
                    value: None,
                })
                .collect(),
        }
    }

    pub fn from_float(s: &PowerSeries2<f64>) -> Self {
        Self {
            m: s.param_dim(),
            n: s.order(),
            mode: CoefficientMode::Float,
            terms: s
                .terms()
                .map(|(key, c)| SeriesTermJson {
                    k: key[0],
                    l: key[1..].to_vec(),
                    num: None,
                    den: None,
                    value: Some(*c),
                })
                .collect(),
        }
    }

    pub fn to_series(&self) -> Result<AnySeries> {
        let bad = |field: String, reason: String| Error::InvalidSeries { field, reason };
        if self.terms.len() > MAX_TERMS {
            return Err(bad("terms".into(), format!("more than {MAX_TERMS} terms")));
        }
        let relabel = |i: usize, e: Error| match e {
            Error::InvalidSeries { reason, .. } => bad(format!("terms[{i}]"), reason),
            other => other,
        };
        match self.mode {
            CoefficientMode::Exact => {
                let mut s = PowerSeries2::<BigRational>::zero(self.m, self.n)?;
                for (i, t) in self.terms.iter().enumerate() {
                    let (Some(num), den) = (&t.num, &t.den) else {
                        return Err(bad(format!("terms[{i}].num"), "missing in exact mode".into()));
                    };
                    let c = ratio(num, den.as_ref().unwrap_or(&one())).map_err(|r| bad(format!("terms[{i}]"), r))?;
                    s.add_term(t.k, &t.l, c).map_err(|e| relabel(i, e))?;
                }
                Ok(AnySeries::Exact(s))
            }
            CoefficientMode::Float => {
                let mut s = PowerSeries2::<f64>::zero(self.m, self.n)?;
                for (i, t) in self.terms.iter().enumerate() {
                    let c = match (t.value, &t.num) {
                        (Some(v), _) if v.is_finite() => v,
                        (Some(_), _) => return Err(bad(format!("terms[{i}].value"), "not finite".into())),
                        (None, Some(num)) => {
                            let r = ratio(num, t.den.as_ref().unwrap_or(&one()))
                                .map_err(|r| bad(format!("terms[{i}]"), r))?;
                            crate::mpoly::rat_to_f64(&r)
                        }
                        (None, None) => return Err(bad(format!("terms[{i}].value"), "missing in float mode".into())),
                    };
                    s.add_term(t.k, &t.l, c).map_err(|e| relabel(i, e))?;
                }
                Ok(AnySeries::Float(s))
            }
        }
    }
}

pub fn parse_series(text: &str) -> Result<AnySeries> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(Error::InvalidSeries {
            field: "<root>".into(),
            reason: format!("document larger than {MAX_INPUT_BYTES} bytes"),
        });
    }
    let raw: SeriesJson = decode(text).map_err(|(field, reason)| Error::InvalidSeries { field, reason })?;
    raw.to_series()
}

pub fn parse_sequence(text: &str) -> Result<DCSequence> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(Error::InvalidSequence(format!("document larger than {MAX_INPUT_BYTES} bytes")));
    }
    let spec: SequenceSpec =
        decode(text).map_err(|(field, reason)| Error::InvalidSequence(format!("{field}: {reason}")))?;
    DCSequence::from_spec(&spec)
}

pub fn sequence_to_json(seq: &DCSequence) -> String {
    serde_json::to_string(&seq.spec()).expect("sequence serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::mpoly::rat;

    #[test]
    fn polynomial_round_trip() {
        for p in [
            examples::xd_minus_t2(4),
            examples::tangential(),
            examples::hyperbolic_2d(),
            examples::overlap_2d(),
            examples::trivial(3),
        ] {
            assert_eq!(parse_poly(&poly_to_json(&p)).unwrap(), p);
        }
    }

    #[test]
    fn documented_polynomial_form() {
        let text = r#"{"d": 4, "m": 1, "coeffs": [[], [], [],
            [{"t_exponents": [2], "num": -1, "den": 1}]]}"#;
        assert_eq!(parse_poly(text).unwrap(), examples::xd_minus_t2(4));
    }

    #[test]
    fn poly_errors_name_the_field() {
        let cases = [
            (r#"{"d": 2, "m": 1}"#, "coeffs"),
            (r#"{"d": 2, "m": 3, "coeffs": [[], []]}"#, "m"),
            (r#"{"d": 2, "m": 1, "coeffs": [[]]}"#, "coeffs"),
            (r#"{"d": 1, "m": 1, "coeffs": [[{"t_exponents": [1, 2], "num": 1, "den": 1}]]}"#, "coeffs[0][0].t_exponents"),
            (r#"{"d": 1, "m": 1, "coeffs": [[{"t_exponents": [1], "num": 1, "den": 0}]]}"#, "coeffs[0][0]"),
            (r#"{"d": 1, "m": 1, "coeffs": [[{"t_exponents": [0], "num": 1, "den": 1}]]}"#, "coeffs[0]"),
            (r#"{"d": 1, "m": 1, "coeffs": [[{"t_exponents": [1], "num": "x1", "den": 1}]]}"#, "coeffs[0][0]"),
            (r#"{"d": "two", "m": 1, "coeffs": []}"#, "d"),
        ];
        for (text, field) in cases {
            match parse_poly(text) {
                Err(Error::InvalidPoly { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn series_round_trip_and_big_integers() {
        let mut s = PowerSeries2::zero(1, 24).unwrap();
        s.add_term(3, &[2], rat(1, 6)).unwrap();
        let huge: BigInt = (1..=40u32).map(BigInt::from).product();
        s.add_term(0, &[0], BigRational::from_integer(huge)).unwrap();
        let text = serde_json::to_string(&SeriesJson::from_exact(&s)).unwrap();
        assert_eq!(parse_series(&text).unwrap(), AnySeries::Exact(s.clone()));
        let ftext = serde_json::to_string(&SeriesJson::from_float(&s.to_float())).unwrap();
        assert_eq!(parse_series(&ftext).unwrap(), AnySeries::Float(s.to_float()));
    }

    #[test]
    fn documented_series_form() {
        let text = r#"{"m":1, "N":24, "mode":"exact", "terms":[{"k":3,"L":[2],"num":1,"den":6}]}"#;
        let AnySeries::Exact(s) = parse_series(text).unwrap() else { panic!() };
        assert_eq!(s.get(3, &[2]), rat(1, 6));
    }

    #[test]
    fn series_errors_name_the_field() {
        let cases = [
            (r#"{"m":1, "N":2, "mode":"exact", "terms":[{"k":3,"L":[0],"num":1}]}"#, "terms[0]"),
            (r#"{"m":1, "N":4, "mode":"exact", "terms":[{"k":1,"L":[0]}]}"#, "terms[0].num"),
            (r#"{"m":1, "N":4, "mode":"float", "terms":[{"k":1,"L":[0]}]}"#, "terms[0].value"),
            (r#"{"m":1, "N":4, "mode":"weird", "terms":[]}"#, "mode"),
            (r#"{"m":1, "N":100000, "mode":"exact", "terms":[]}"#, "N"),
            (r#"{"m":1, "N":4, "mode":"exact", "terms":[{"k":1,"L":[0,1],"num":1}]}"#, "terms[0]"),
        ];
        for (text, field) in cases {
            match parse_series(text) {
                Err(Error::InvalidSeries { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn sequences() {
        let g = parse_sequence(r#"{"generator": "gevrey", "alpha": 1.0, "j_max": 48}"#).unwrap();
        assert_eq!(g, DCSequence::gevrey(1.0, 48).unwrap());
        let e = parse_sequence(r#"{"generator": "explicit", "values": [1, 1, 2, 6, 24, 120, 720, 5040, 40320]}"#).unwrap();
        assert_eq!(parse_sequence(&sequence_to_json(&e)).unwrap(), e);
        match parse_sequence(r#"{"generator": "gevrey"}"#) {
            Err(Error::InvalidSequence(msg)) => assert!(msg.contains("alpha"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
