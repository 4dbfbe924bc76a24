mod common;

use common::oracle::linear_solve_oracle;
use num_rational::BigRational;
use proptest::prelude::*;
use weierdiv::examples;
use weierdiv::parampoly::ParamPoly;
use weierdiv::series::PowerSeries2;
use weierdiv::wdiv::formal_divide;

fn divisors() -> Vec<ParamPoly> {
    vec![
        examples::x2_plus_t2p(1),
        examples::x2_plus_t2p(2),
        examples::xd_minus_t2(3),
        examples::xd_minus_t2(4),
        examples::tangential(),
    ]
}

fn build(m: usize, n: usize, terms: &[(u32, u32, u32, i64, i64)]) -> PowerSeries2 {
    let mut s = PowerSeries2::zero(m, n).unwrap();
    for &(k, l1, l2, num, den) in terms {
        let l = if m == 1 { vec![l1] } else { vec![l1, l2] };
        if (k + l.iter().sum::<u32>()) as usize <= n {
            s.add_term(k, &l, BigRational::new(num.into(), den.into())).unwrap();
        }
    }
    s
}

fn terms(n: u32) -> impl Strategy<Value = Vec<(u32, u32, u32, i64, i64)>> {
    proptest::collection::vec((0..=n, 0..=n, 0..=n, -20i64..=20, 1i64..=12), 1..10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn iteration_equals_linear_solve(t in terms(12), which in 0usize..5, n in 6usize..=12) {
        let p = &divisors()[which];
        let f = build(1, n, &t);
        let res = formal_divide(&f, p, n).unwrap();
        let (q, r) = linear_solve_oracle(&f, p, n);
        prop_assert_eq!(res.q, q);
        prop_assert_eq!(res.r, r);
    }

    #[test]
    fn two_parameter_division_equals_linear_solve(t in terms(8)) {
        for p in [examples::hyperbolic_2d(), examples::overlap_2d()] {
            let f = build(2, 8, &t);
            let res = formal_divide(&f, &p, 8).unwrap();
            prop_assert_eq!(res.residual_max, 0.0);
            let (q, r) = linear_solve_oracle(&f, &p, 8);
            prop_assert_eq!(res.q, q);
            prop_assert_eq!(res.r, r);
        }
    }
}

#[test]
fn iteration_count_is_bounded_by_order() {
    let f = build(1, 24, &[(23, 1, 0, 1, 1), (0, 24, 0, 3, 2), (12, 0, 0, -1, 5)]);
    for p in divisors() {
        let res = formal_divide(&f, &p, 24).unwrap();
        assert!(res.iterations <= 25, "{p}: {}", res.iterations);
    }
}
