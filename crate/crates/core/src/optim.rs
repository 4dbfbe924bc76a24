//! Derivative-free local minimizers used by the distance and fiber polish.

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let tol = rel_tol * (hi - lo).abs().max(f64::MIN_POSITIVE);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > tol.max(4.0 * f64::EPSILON * a.abs().max(b.abs())) && iters < 200 {
        iters += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (fa, fb) = (f(lo), f(hi));
    [(c, fc), (d, fd), (lo, fa), (hi, fb)]
        .into_iter()
        .fold((c, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best })
}

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    /// Stop when the spread of values falls below `f_rel_tol · |f_best|`.
    pub f_rel_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 600,
            x_tol: 1e-14,
            f_rel_tol: 1e-12,
        }
    }
}

/// Nelder-Mead simplex minimization from `start` with initial edge `step`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    opts: &NelderMeadOptions,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    let mut evals = n + 1;
    let cmp = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.total_cmp(&b.1);
    while evals < opts.max_evals {
        simplex.sort_by(cmp);
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < opts.x_tol || (worst.is_finite() && (worst - best).abs() <= opts.f_rel_tol * best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(p, _)| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < simplex[n].1 { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for (p, v) in simplex[1..].iter_mut() {
                    for (pk, bk) in p.iter_mut().zip(&x0) {
                        *pk = bk + 0.5 * (*pk - bk);
                    }
                    *v = f(p);
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(cmp);
    simplex.swap_remove(0)
}
