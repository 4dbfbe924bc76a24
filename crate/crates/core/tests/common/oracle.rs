//! Independent reference for formal division: the truncated coefficient
//! system solved by exact Gaussian elimination.

use num_rational::BigRational;
use num_traits::{One, Zero};
use weierdiv::parampoly::ParamPoly;
use weierdiv::series::PowerSeries2;

/// Solves the truncated coefficient system directly by exact Gaussian
/// elimination over the unknowns of `q` and the `r_j`.
pub fn linear_solve_oracle(f: &PowerSeries2, p: &ParamPoly, n: usize) -> (PowerSeries2, Vec<PowerSeries2>) {
    let m = p.param_dim();
    let d = p.degree();
    let monos = |max: usize| -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for k in 0..=max as u32 {
            if m == 1 {
                for l in 0..=(max as u32 - k) {
                    out.push(vec![k, l]);
                }
            } else {
                for l1 in 0..=(max as u32 - k) {
                    for l2 in 0..=(max as u32 - k - l1) {
                        out.push(vec![k, l1, l2]);
                    }
                }
            }
        }
        out
    };
    let all = monos(n);
    let q_unknowns = monos(n - d);
    let r_unknowns: Vec<Vec<u32>> = all.iter().filter(|k| (k[0] as usize) < d).cloned().collect();
    let nu = q_unknowns.len() + r_unknowns.len();
    assert_eq!(nu, all.len());
    let row_of = |key: &Vec<u32>| all.iter().position(|k| k == key);
    let ps: PowerSeries2 = PowerSeries2::from_param_poly(p, n, false).unwrap();
    let mut a = vec![vec![BigRational::zero(); nu + 1]; all.len()];
    for (col, qk) in q_unknowns.iter().enumerate() {
        for (pk, pc) in ps.terms() {
            let key: Vec<u32> = pk.iter().zip(qk).map(|(x, y)| x + y).collect();
            if let Some(row) = row_of(&key) {
                a[row][col] += pc;
            }
        }
    }
    for (i, rk) in r_unknowns.iter().enumerate() {
        let row = row_of(rk).unwrap();
        a[row][q_unknowns.len() + i] += BigRational::one();
    }
    for (row, key) in all.iter().enumerate() {
        a[row][nu] = f.get(key[0], &key[1..]);
    }
    for col in 0..nu {
        let piv = (col..a.len()).find(|&r| !a[r][col].is_zero()).expect("singular system");
        a.swap(col, piv);
        let inv = BigRational::one() / a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() * &inv;
        }
        for r in 0..a.len() {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=nu {
                    let delta = a[col][c].clone() * &factor;
                    a[r][c] -= delta;
                }
            }
        }
    }
    let mut q = PowerSeries2::zero(m, n - d).unwrap();
    for (col, qk) in q_unknowns.iter().enumerate() {
        q.add_term(qk[0], &qk[1..], a[col][nu].clone()).unwrap();
    }
    let mut r: Vec<PowerSeries2> = (0..d).map(|_| PowerSeries2::zero(m, n).unwrap()).collect();
    for (i, rk) in r_unknowns.iter().enumerate() {
        r[rk[0] as usize].add_term(0, &rk[1..], a[q_unknowns.len() + i][nu].clone()).unwrap();
    }
    (q, r)
}

