//! Static 2-d tree over complex points for nearest-neighbor queries.

use num_complex::Complex64;

#[derive(Clone, Debug, Default)]
pub struct KdTree {
    pts: Vec<(Complex64, usize)>,
}

impl KdTree {
    pub fn build(points: impl IntoIterator<Item = Complex64>) -> Self {
        let mut pts: Vec<(Complex64, usize)> = points.into_iter().enumerate().map(|(i, z)| (z, i)).collect();
        let n = pts.len();
        build_rec(&mut pts[..n], 0);
        Self { pts }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Up to `k` nearest points as `(distance, original index)`, closest first.
    pub fn nearest(&self, q: Complex64, k: usize) -> Vec<(f64, usize)> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 {
            self.search(&self.pts[..], 0, q, k, &mut best);
        }
        best
    }

    fn search(&self, slice: &[(Complex64, usize)], depth: usize, q: Complex64, k: usize, best: &mut Vec<(f64, usize)>) {
        if slice.is_empty() {
            return;
        }
        let mid = slice.len() / 2;
        let (p, idx) = slice[mid];
        let dist = (p - q).norm();
        if best.len() < k || dist < best[best.len() - 1].0 {
            let pos = best.partition_point(|&(d, i)| (d, i) < (dist, idx));
            best.insert(pos, (dist, idx));
            best.truncate(k);
        }
        let diff = if depth % 2 == 0 { q.re - p.re } else { q.im - p.im };
        let (near, far) = if diff < 0.0 {
            (&slice[..mid], &slice[mid + 1..])
        } else {
            (&slice[mid + 1..], &slice[..mid])
        };
        self.search(near, depth + 1, q, k, best);
        if best.len() < k || diff.abs() < best[best.len() - 1].0 {
            self.search(far, depth + 1, q, k, best);
        }
    }
}

fn build_rec(pts: &mut [(Complex64, usize)], depth: usize) {
    if pts.len() <= 1 {
        return;
    }
    let mid = pts.len() / 2;
    let key = |z: &(Complex64, usize)| if depth % 2 == 0 { (z.0.re, z.1) } else { (z.0.im, z.1) };
    pts.select_nth_unstable_by(mid, |a, b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal));
    let (left, right) = pts.split_at_mut(mid);
    build_rec(left, depth + 1);
    build_rec(&mut right[1..], depth + 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Complex64> = (0..500).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
        let tree = KdTree::build(pts.clone());
        for _ in 0..100 {
            let q = Complex64::new(rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2));
            let mut brute: Vec<(f64, usize)> = pts.iter().enumerate().map(|(i, p)| ((p - q).norm(), i)).collect();
            brute.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(tree.nearest(q, 4), brute[..4].to_vec());
        }
    }
}
