//! The worked example polynomials, by name.

use crate::parampoly::ParamPoly;

/// `x² + t^{2p}` (σ = 1).
pub fn x2_plus_t2p(p: u32) -> ParamPoly {
    ParamPoly::from_terms(2, 1, &[(2, &[2 * p], 1, 1)]).expect("valid")
}

/// `x^d − t²` (σ = d/2).
pub fn xd_minus_t2(d: usize) -> ParamPoly {
    ParamPoly::from_terms(d, 1, &[(d, &[2], -1, 1)]).expect("valid")
}

/// `x² − (t₁² + t₂²)`, hyperbolic with σ = 1.
pub fn hyperbolic_2d() -> ParamPoly {
    ParamPoly::from_terms(2, 2, &[(2, &[2, 0], -1, 1), (2, &[0, 2], -1, 1)]).expect("valid")
}

/// `x² − 2t₁x + t₁² + t₂²`: roots `t₁ ± i t₂` fill a neighborhood of 0.
pub fn overlap_2d() -> ParamPoly {
    ParamPoly::from_terms(
        2,
        2,
        &[(1, &[1, 0], -2, 1), (2, &[2, 0], 1, 1), (2, &[0, 2], 1, 1)],
    )
    .expect("valid")
}

/// `x² − 2tx + t² + t⁴`: two parabolas tangent to the real axis.
pub fn tangential() -> ParamPoly {
    ParamPoly::from_terms(2, 1, &[(1, &[1], -2, 1), (2, &[2], 1, 1), (2, &[4], 1, 1)]).expect("valid")
}

/// Pure `x^d`.
pub fn trivial(d: usize) -> ParamPoly {
    ParamPoly::from_terms(d, 1, &[]).expect("valid")
}
