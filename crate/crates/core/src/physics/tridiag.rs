//! Lowest eigenpairs of a real symmetric tridiagonal matrix by Sturm-sequence
//! bisection followed by inverse iteration.

use serde::Serialize;

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal, `off[i]` at (i, i+1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal must be one shorter than the diagonal"
        );
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin bounds on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + self.norm());
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let b2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            d = self.diag[i] - x - b2 / d;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    fn bisect(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        let tol = f64::EPSILON * self.norm().max(f64::MIN_POSITIVE);
        while hi - lo > 2.0 * tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T − shift) x = b` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, shift: f64, b: &mut [f64]) {
        let n = self.len();
        let floor = f64::EPSILON * self.norm().max(f64::MIN_POSITIVE);
        // rows of U have up to three nonzeros: u0 (diag), u1, u2
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut cur = [self.diag[0] - shift, if n > 1 { self.off[0] } else { 0.0 }, 0.0];
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if cur[0].abs() < floor { floor } else { cur[0] };
                break;
            }
            let below = [
                self.off[i],
                self.diag[i + 1] - shift,
                if i + 2 < n { self.off[i + 1] } else { 0.0 },
            ];
            let (pivot, other) = if below[0].abs() > cur[0].abs() {
                b.swap(i, i + 1);
                (below, cur)
            } else {
                (cur, below)
            };
            let p = if pivot[0].abs() < floor { floor } else { pivot[0] };
            let m = other[0] / p;
            u0[i] = p;
            u1[i] = pivot[1];
            u2[i] = pivot[2];
            b[i + 1] -= m * b[i];
            cur = [other[1] - m * pivot[1], other[2] - m * pivot[2], 0.0];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * b[i + 2];
            }
            b[i] = s / u0[i];
        }
    }

    /// Lowest `k` eigenpairs, ascending. Eigenvectors have unit Euclidean norm.
    pub fn lowest_eigenpairs(&self, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.len();
        let k = k.min(n);
        let (glo, ghi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm().max(1.0) * 4.0;
        let values: Vec<f64> = (0..k).map(|i| self.bisect(i, glo - pad, ghi + pad)).collect();

        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        for (idx, &lambda) in values.iter().enumerate() {
            // deterministic, non-symmetric start vector
            let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + idx * 13) % 17) as f64 / 17.0).collect();
            normalize(&mut v);
            for _ in 0..4 {
                self.shifted_solve(lambda, &mut v);
                for prev in &vectors {
                    let d = dot(prev, &v);
                    for (x, p) in v.iter_mut().zip(prev) {
                        *x -= d * p;
                    }
                }
                normalize(&mut v);
            }
            // fix the sign so the largest component is positive
            let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if big < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            vectors.push(v);
        }
        (values, vectors)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
