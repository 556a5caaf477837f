/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e` (`e[i]` couples `i`, `i+1`).
#[derive(Clone, Debug)]
pub struct SymTridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiag {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        assert_eq!(e.len() + 1, d.len());
        SymTridiag { d, e }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.d.len() {
            let qq = if q == 0.0 { f64::EPSILON * (1.0 + x.abs()) } else { q };
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / qq;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let width = (hi - lo).max(1.0);
        lo -= 1e-9 * width;
        hi += 1e-9 * width;
        for _ in 0..200 {
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

    pub fn lowest(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.len())).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        (0..n)
            .map(|i| {
                let mut s = self.d[i] * x[i];
                if i > 0 {
                    s += self.e[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.e[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Eigenvector for an (accurate) eigenvalue `lambda` by inverse iteration,
    /// normalized to unit Euclidean length.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.d.len();
        let (lo, hi) = self.gershgorin();
        let shift = lambda - 1e-10 * (hi - lo).max(1.0);
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..4 {
            x = self.solve_shifted(shift, &x);
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        x
    }

    /// Solves `(T - s I) x = b` with partial pivoting.
    fn solve_shifted(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        // LU with pivoting on a tridiagonal produces up to two superdiagonals.
        let mut dg: Vec<f64> = self.d.iter().map(|v| v - s).collect();
        let mut up: Vec<f64> = self.e.clone();
        up.push(0.0);
        let mut up2 = vec![0.0; n];
        let mut lo: Vec<f64> = self.e.clone();
        let mut rhs = b.to_vec();
        let tiny = 1e-300;
        for k in 0..n.saturating_sub(1) {
            if lo[k].abs() > dg[k].abs() {
                // swap rows k and k+1
                std::mem::swap(&mut dg[k], &mut lo[k]);
                let a = up[k];
                up[k] = dg[k + 1];
                dg[k + 1] = a;
                let c = up2[k];
                up2[k] = up[k + 1];
                up[k + 1] = c;
                rhs.swap(k, k + 1);
            }
            let piv = if dg[k].abs() < tiny { tiny } else { dg[k] };
            let l = lo[k] / piv;
            dg[k + 1] -= l * up[k];
            up[k + 1] -= l * up2[k];
            rhs[k + 1] -= l * rhs[k];
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut v = rhs[k];
            if k + 1 < n {
                v -= up[k] * x[k + 1];
            }
            if k + 2 < n {
                v -= up2[k] * x[k + 2];
            }
            let piv = if dg[k].abs() < tiny { tiny } else { dg[k] };
            x[k] = v / piv;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let t = SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]);
        for k in 0..5 {
            let exact = 2.0 - 2.0 * (PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-12);
            let v = t.eigenvector(exact);
            let r = t.apply(&v);
            let res = r.iter().zip(&v).map(|(a, b)| (a - exact * b).abs()).fold(0.0, f64::max);
            assert!(res < 1e-10, "residual {res}");
        }
    }

    #[test]
    fn sturm_count_is_monotone() {
        let t = SymTridiag::new(vec![1.0, -2.0, 3.0, 0.5], vec![0.3, -0.7, 1.1]);
        let mut prev = 0;
        for k in 0..100 {
            let c = t.count_below(-5.0 + 0.1 * k as f64);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(prev, 4);
    }
}
