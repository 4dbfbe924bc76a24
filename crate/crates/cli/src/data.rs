//! Example inputs shipped with the binary, each named after the worked
//! example it encodes.

use weierdiv::examples;
use weierdiv::parampoly::ParamPoly;

pub struct BundledPoly {
    pub file: &'static str,
    pub text: &'static str,
    pub expected: fn() -> ParamPoly,
}

macro_rules! bundled {
    ($file:literal, $expected:expr) => {
        BundledPoly {
            file: $file,
            text: include_str!(concat!("../data/", $file)),
            expected: $expected,
        }
    };
}

pub fn polynomials() -> Vec<BundledPoly> {
    vec![
        bundled!("x2_plus_t2.json", || examples::x2_plus_t2p(1)),
        bundled!("x2_plus_t4.json", || examples::x2_plus_t2p(2)),
        bundled!("x2_plus_t6.json", || examples::x2_plus_t2p(3)),
        bundled!("xd_minus_t2_d2.json", || examples::xd_minus_t2(2)),
        bundled!("xd_minus_t2_d3.json", || examples::xd_minus_t2(3)),
        bundled!("xd_minus_t2_d4.json", || examples::xd_minus_t2(4)),
        bundled!("xd_minus_t2_d5.json", || examples::xd_minus_t2(5)),
        bundled!("x2_minus_t1sq_minus_t2sq.json", examples::hyperbolic_2d),
        bundled!("overlap_x2_minus_2t1x_plus_t1sq_plus_t2sq.json", examples::overlap_2d),
        bundled!("tangential_x2_minus_2tx_plus_t2_plus_t4.json", examples::tangential),
    ]
}

pub const SEQ_GEVREY_1: &str = include_str!("../data/seq_gevrey_1.json");
pub const SEQ_GEVREY_LOG_1_1: &str = include_str!("../data/seq_gevrey_log_1_1.json");
pub const SEQ_NOT_LOG_CONVEX: &str = include_str!("../data/seq_not_log_convex.json");
pub const SERIES_X_ONLY: &str = include_str!("../data/series_x_only_n12.json");
