use num_rational::BigRational;
use proptest::prelude::*;
use weierdiv::io::{parse_poly, parse_series, poly_to_json, AnySeries, SeriesJson};
use weierdiv::mpoly::MPoly;
use weierdiv::parampoly::ParamPoly;
use weierdiv::series::PowerSeries2;

proptest! {
    #[test]
    fn polynomials_survive_json(
        m in 1usize..=2,
        raw in proptest::collection::vec(
            proptest::collection::vec((1u32..6, 0u32..6, -50i64..50, 1i64..20), 0..4), 1..6),
    ) {
        let coeffs: Vec<MPoly> = raw
            .iter()
            .map(|list| {
                let mut a = MPoly::zero(m);
                for &(e1, e2, num, den) in list {
                    let e = if m == 1 { vec![e1] } else { vec![e1, e2] };
                    a.add_term(e, BigRational::new(num.into(), den.into()));
                }
                a
            })
            .collect();
        let p = ParamPoly::new(m, coeffs).unwrap();
        prop_assert_eq!(parse_poly(&poly_to_json(&p)).unwrap(), p);
    }

    #[test]
    fn series_survive_json(
        terms in proptest::collection::vec((0u32..10, 0u32..10, any::<i64>(), 1i64..1000), 0..20),
    ) {
        let mut s = PowerSeries2::zero(1, 20).unwrap();
        for (k, l, num, den) in terms {
            s.add_term(k, &[l], BigRational::new(num.into(), den.into())).unwrap();
        }
        let text = serde_json::to_string(&SeriesJson::from_exact(&s)).unwrap();
        prop_assert_eq!(parse_series(&text).unwrap(), AnySeries::Exact(s));
    }

    #[test]
    fn arbitrary_text_never_panics(text in ".{0,200}") {
        let _ = parse_poly(&text);
        let _ = parse_series(&text);
        let _ = weierdiv::io::parse_sequence(&text);
    }
}
