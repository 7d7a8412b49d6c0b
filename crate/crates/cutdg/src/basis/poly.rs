/// Univariate polynomial in a local variable, dense coefficient form
/// (coeffs[k] multiplies t^k).
#[derive(Clone, Debug)]
pub struct Poly1 {
    pub coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1 { coeffs: vec![0.0] };
        }
        Poly1 {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        }
    }

    pub fn derivative_n(&self, n: usize) -> Poly1 {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.derivative();
        }
        p
    }
}

/// Legendre polynomials P_0..P_max on [-1, 1] in coefficient form, built from
/// the three-term recurrence (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}.
pub fn legendre(max_degree: usize) -> Vec<Poly1> {
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(Poly1 { coeffs: vec![1.0] });
    if max_degree == 0 {
        return out;
    }
    out.push(Poly1 { coeffs: vec![0.0, 1.0] });
    for k in 1..max_degree {
        let pk = &out[k];
        let pkm1 = &out[k - 1];
        let mut coeffs = vec![0.0; k + 2];
        for (i, &c) in pk.coeffs.iter().enumerate() {
            coeffs[i + 1] += (2 * k + 1) as f64 * c;
        }
        for (i, &c) in pkm1.coeffs.iter().enumerate() {
            coeffs[i] -= k as f64 * c;
        }
        for c in coeffs.iter_mut() {
            *c /= (k + 1) as f64;
        }
        out.push(Poly1 { coeffs });
    }
    out
}

/// Bivariate polynomial in local variables, coefficient grid
/// coeffs[i][j] multiplies ξ^i η^j.
#[derive(Clone, Debug)]
pub struct Poly2 {
    pub deg: usize,
    coeffs: Vec<f64>,
}

impl Poly2 {
    pub fn zero(deg: usize) -> Self {
        Self { deg, coeffs: vec![0.0; (deg + 1) * (deg + 1)] }
    }

    pub fn monomial(deg: usize, i: usize, j: usize) -> Self {
        let mut p = Self::zero(deg);
        p.set(i, j, 1.0);
        p
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.deg + 1) + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.coeffs[k] = v;
    }

    pub fn scaled_add(&mut self, other: &Poly2, s: f64) {
        assert_eq!(self.deg, other.deg);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn eval(&self, xi: f64, eta: f64) -> f64 {
        let mut acc = 0.0;
        for i in (0..=self.deg).rev() {
            let mut row = 0.0;
            for j in (0..=self.deg).rev() {
                row = row * eta + self.get(i, j);
            }
            acc = acc * xi + row;
        }
        acc
    }

    pub fn d_xi(&self) -> Poly2 {
        let mut p = Poly2::zero(self.deg);
        for i in 1..=self.deg {
            for j in 0..=self.deg {
                let v = self.get(i, j);
                if v != 0.0 {
                    p.set(i - 1, j, i as f64 * v);
                }
            }
        }
        p
    }

    pub fn d_eta(&self) -> Poly2 {
        let mut p = Poly2::zero(self.deg);
        for i in 0..=self.deg {
            for j in 1..=self.deg {
                let v = self.get(i, j);
                if v != 0.0 {
                    p.set(i, j - 1, j as f64 * v);
                }
            }
        }
        p
    }

    /// Mixed partial ∂^a_ξ ∂^b_η.
    pub fn partial(&self, a: usize, b: usize) -> Poly2 {
        let mut p = self.clone();
        for _ in 0..a {
            p = p.d_xi();
        }
        for _ in 0..b {
            p = p.d_eta();
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_values_match_known() {
        let ps = legendre(4);
        // P2(t) = (3t^2 - 1)/2, P3(t) = (5t^3 - 3t)/2
        assert!((ps[2].eval(0.5) - (3.0 * 0.25 - 1.0) / 2.0).abs() < 1e-15);
        assert!((ps[3].eval(-0.3) - (5.0 * (-0.027) + 0.9) / 2.0).abs() < 1e-15);
        // endpoint normalization P_k(1) = 1
        for p in &ps {
            assert!((p.eval(1.0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn poly1_derivative() {
        let p = Poly1 { coeffs: vec![1.0, 2.0, 3.0] }; // 1 + 2t + 3t^2
        let d = p.derivative();
        assert!((d.eval(2.0) - (2.0 + 12.0)).abs() < 1e-15);
        assert_eq!(p.derivative_n(3).coeffs, vec![0.0]);
    }

    #[test]
    fn poly2_eval_and_partials() {
        // p = xi^2 eta + 3 eta^2
        let mut p = Poly2::zero(3);
        p.set(2, 1, 1.0);
        p.set(0, 2, 3.0);
        assert!((p.eval(2.0, -1.0) - (4.0 * -1.0 + 3.0)).abs() < 1e-15);
        let dx = p.d_xi();
        assert!((dx.eval(2.0, -1.0) - (2.0 * 2.0 * -1.0)).abs() < 1e-15);
        let dxy = p.partial(1, 1);
        assert!((dxy.eval(2.0, 5.0) - 2.0 * 2.0).abs() < 1e-15);
    }
}
