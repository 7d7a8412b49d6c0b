use super::csr::Triplets;

/// LU factorization with partial pivoting for banded matrices.
///
/// Storage follows the LAPACK general-band layout: `ab[r][j]` holds entry
/// A(i,j) at r = ku + kl + i - j, with kl extra super-diagonal rows for the
/// fill-in caused by row swaps. Space-time slab systems are banded with a
/// bandwidth of a few element blocks when degrees of freedom are numbered
/// along the mesh, which keeps factorization linear in the system size.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major band storage, (2*kl + ku + 1) x n.
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    ldab: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BandedError {
    #[error("singular banded system at column {col}")]
    Singular { col: usize },
}

impl BandedLu {
    /// Factor a matrix given as triplets. The bandwidth is taken from the
    /// entries themselves.
    pub fn factor(triplets: &Triplets) -> Result<Self, BandedError> {
        let n = triplets.nrows();
        let band = triplets.max_band();
        let (kl, ku) = (band, band);
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        for &(r, c, v) in triplets.entries() {
            let (i, j) = (r as usize, c as usize);
            ab[(ku + kl + i - j) * n + j] += v;
        }
        let mut ipiv = vec![0usize; n];

        // Right-looking elimination with partial pivoting inside the band.
        for k in 0..n {
            let pmax = (k + kl).min(n - 1);
            let mut piv_row = k;
            let mut piv_val = ab[(ku + kl + k - k) * n + k].abs();
            for i in (k + 1)..=pmax {
                let v = ab[(ku + kl + i - k) * n + k].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = i;
                }
            }
            if piv_val == 0.0 {
                return Err(BandedError::Singular { col: k });
            }
            ipiv[k] = piv_row;
            let jmax = (k + ku + kl).min(n - 1);
            if piv_row != k {
                for j in k..=jmax {
                    let ra = ku + kl + k - j;
                    let rb = ku + kl + piv_row - j;
                    // Both rows stay inside the widened band.
                    ab.swap(ra * n + j, rb * n + j);
                }
            }
            let pivot = ab[(ku + kl) * n + k];
            for i in (k + 1)..=pmax {
                let li = ab[(ku + kl + i - k) * n + k] / pivot;
                ab[(ku + kl + i - k) * n + k] = li;
                if li != 0.0 {
                    for j in (k + 1)..=jmax {
                        let a_kj = ab[(ku + kl + k - j) * n + j];
                        if a_kj != 0.0 {
                            ab[(ku + kl + i - j) * n + j] -= li * a_kj;
                        }
                    }
                }
            }
        }
        Ok(Self { n, kl, ku, ab, ipiv, ldab })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let _ = self.ldab;
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                b.swap(k, p);
            }
            let imax = (k + kl).min(n - 1);
            for i in (k + 1)..=imax {
                b[i] -= self.ab[(ku + kl + i - k) * n + k] * b[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + ku + kl).min(n - 1);
            let mut acc = b[k];
            for j in (k + 1)..=jmax {
                acc -= self.ab[(ku + kl + k - j) * n + j] * b[j];
            }
            b[k] = acc / self.ab[(ku + kl) * n + k];
        }
    }

    /// Cheap conditioning proxy from the factored diagonal.
    pub fn diagonal_ratio(&self) -> f64 {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut dmax: f64 = 0.0;
        let mut dmin = f64::INFINITY;
        for k in 0..n {
            let d = self.ab[(ku + kl) * n + k].abs();
            dmax = dmax.max(d);
            dmin = dmin.min(d);
        }
        dmax / dmin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn solves_random_banded_systems() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &(n, band) in &[(1usize, 0usize), (5, 1), (40, 3), (120, 7)] {
            let mut t = Triplets::new(n, n);
            for i in 0..n {
                for j in i.saturating_sub(band)..=(i + band).min(n - 1) {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    t.push(i, j, if i == j { v + 4.0 } else { v });
                }
            }
            let dense = t.clone().into_csr().to_dense();
            let lu = BandedLu::factor(&t).unwrap();
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut b = (dense * nalgebra::DVector::from_vec(x_true.clone()))
                .iter()
                .cloned()
                .collect::<Vec<_>>();
            lu.solve_in_place(&mut b);
            for i in 0..n {
                assert!((b[i] - x_true[i]).abs() < 1e-10, "n={n} band={band} i={i}");
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_diagonal() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 0.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        let lu = BandedLu::factor(&t).unwrap();
        let mut b = vec![2.0, 3.0];
        lu.solve_in_place(&mut b);
        // x solves [0 1; 1 1] x = [2,3] -> x = [1,2]
        assert!((b[0] - 1.0).abs() < 1e-14);
        assert!((b[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reports_singularity() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 0, 1.0);
        assert!(BandedLu::factor(&t).is_err());
    }
}
