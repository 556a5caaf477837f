use super::Csr;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting of a band matrix.
///
/// Storage follows the LINPACK band layout: entry `(i, j)` lives in column `j`
/// at offset `kl + ku + i - j`, leaving `kl` extra superdiagonals for fill-in.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * self.ld + self.kl + self.ku + i - j
    }

    /// Builds the band copy of `a` without factoring.
    fn from_csr(a: &Csr) -> Self {
        let (kl, ku) = a.bandwidths();
        let ld = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            n: a.n,
            kl,
            ku,
            ld,
            ab: vec![0.0; ld * a.n],
            piv: vec![0; a.n],
        };
        for i in 0..a.n {
            for (j, v) in a.row(i) {
                let k = lu.at(i, j);
                lu.ab[k] += v;
            }
        }
        lu
    }

    /// Factors `a`; a zero pivot is reported as a singular-matrix error.
    pub fn factor(a: &Csr) -> Result<Self> {
        let mut lu = Self::from_csr(a);
        let n = lu.n;
        let (kl, ku) = (lu.kl, lu.ku);
        let scale = lu.ab.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.ab[lu.at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.ab[lu.at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.piv[k] = p;
            if best <= 1e-14 * scale {
                return Err(Error::NearBifurcation(format!(
                    "pivot {best:.3e} at row {k} of {n}"
                )));
            }
            let last_col = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (lu.at(k, j), lu.at(p, j));
                    lu.ab.swap(a, b);
                }
            }
            let pivot = lu.ab[lu.at(k, k)];
            for i in k + 1..=last_row {
                let idx = lu.at(i, k);
                let l = lu.ab[idx] / pivot;
                lu.ab[idx] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let src = lu.ab[lu.at(k, j)];
                        let dst = lu.at(i, j);
                        lu.ab[dst] -= l * src;
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                x[i] -= self.ab[self.at(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + self.ku + self.kl).min(n - 1) {
                s -= self.ab[self.at(k, j)] * x[j];
            }
            x[k] = s / self.ab[self.at(k, k)];
        }
        x
    }

    /// Number of negative pivots; equals the number of negative eigenvalues
    /// when the matrix is symmetric and no row interchanges were made.
    pub fn negative_pivots(&self) -> Option<usize> {
        if self.piv.iter().enumerate().any(|(k, &p)| p != k) {
            return None;
        }
        Some((0..self.n).filter(|&k| self.ab[self.at(k, k)] < 0.0).count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_banded_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let (kl, ku) = (3, 2);
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                b.add(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let a = b.build();
        let xs: Vec<f64> = (0..n).map(|i| i as f64 - 7.5).collect();
        let rhs = a.apply(&xs);
        let x = BandedLu::factor(&a).unwrap().solve(&rhs);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-8, "{u} vs {v}");
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut b = TripletBuilder::new(3);
        b.add(0, 0, 1.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 1.0);
        b.add(1, 1, 1.0);
        b.add(2, 2, 1.0);
        assert!(matches!(
            BandedLu::factor(&b.build()),
            Err(Error::NearBifurcation(_))
        ));
    }
}
