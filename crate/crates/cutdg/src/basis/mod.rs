//! Polynomial element bases and quadrature rules.
//!
//! Interval elements carry an orthonormal Legendre basis scaled to the
//! element, so uncut mass blocks are identity blocks and the conditioning of
//! stabilized cut-cell mass matrices is directly visible. Triangles carry a
//! per-element orthonormalized monomial basis in translated/scaled local
//! coordinates. Basis functions are polynomials on the *full* background
//! element and are routinely evaluated outside the physical subdomain; this
//! extension is what ghost-penalty stabilization acts on.

mod poly;
mod quadrature;

pub use poly::{legendre, Poly1, Poly2};
pub use quadrature::{
    cut_cell_rule_interval, cut_cell_rule_polygon, gauss_rule, polygon_area, triangle_rule,
    QuadratureRule, QuadratureRule2D,
};

use nalgebra::DMatrix;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BasisError {
    #[error("derivative order {order} exceeds polynomial degree {degree}")]
    DerivativeOrderExceedsDegree { order: usize, degree: usize },
    #[error("unsupported quadrature point count {n} (must be 1..=20)")]
    UnsupportedPointCount { n: usize },
    #[error("sub-extent has zero measure")]
    EmptySubExtent,
}

/// Orthonormal Legendre basis of degree `r` on interval elements:
/// phi_k(x) = sqrt((2k+1)/h) P_k(2 (x - x_c) / h) so that the element mass
/// matrix on the full element is the identity.
#[derive(Clone, Debug)]
pub struct IntervalBasis {
    degree: usize,
    /// Legendre coefficient tables and all derivatives up to the degree,
    /// indexed [k][deriv].
    derivs: Vec<Vec<Poly1>>,
}

impl IntervalBasis {
    pub fn new(degree: usize) -> Self {
        let ps = legendre(degree);
        // One extra order so degree-0 advection blocks see the zero derivative.
        let derivs = ps
            .into_iter()
            .map(|p| (0..=degree + 1).map(|d| p.derivative_n(d)).collect())
            .collect();
        Self { degree, derivs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dof_count(&self) -> usize {
        self.degree + 1
    }

    /// Values of the `deriv`-th derivative of every basis function at `x`
    /// on the element [extent[0], extent[1]].
    pub fn eval(&self, extent: [f64; 2], x: f64, deriv: usize) -> Result<Vec<f64>, BasisError> {
        if deriv > self.degree {
            return Err(BasisError::DerivativeOrderExceedsDegree { order: deriv, degree: self.degree });
        }
        let h = extent[1] - extent[0];
        let t = 2.0 * (x - 0.5 * (extent[0] + extent[1])) / h;
        let chain = (2.0 / h).powi(deriv as i32);
        Ok((0..=self.degree)
            .map(|k| ((2 * k + 1) as f64 / h).sqrt() * chain * self.derivs[k][deriv].eval(t))
            .collect())
    }

    /// Same as [`eval`](Self::eval) but writing into a slice.
    pub fn eval_into(&self, extent: [f64; 2], x: f64, deriv: usize, out: &mut [f64]) {
        let h = extent[1] - extent[0];
        let t = 2.0 * (x - 0.5 * (extent[0] + extent[1])) / h;
        let chain = (2.0 / h).powi(deriv as i32);
        for k in 0..=self.degree {
            out[k] = ((2 * k + 1) as f64 / h).sqrt() * chain * self.derivs[k][deriv].eval(t);
        }
    }

    /// Element mass matrix restricted to the sub-interval [a, b] of the
    /// element, exact.
    pub fn sub_mass(&self, extent: [f64; 2], sub: [f64; 2]) -> DMatrix<f64> {
        let n = self.dof_count();
        let rule = gauss_rule(self.degree + 1, sub).expect("point count in range");
        let mut m = DMatrix::zeros(n, n);
        let mut vals = vec![0.0; n];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            self.eval_into(extent, x, 0, &mut vals);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += w * vals[i] * vals[j];
                }
            }
        }
        m
    }

    /// Advection blocks B[i][j] = ∫_sub phi_j phi_i' dx, exact.
    pub fn sub_advection(&self, extent: [f64; 2], sub: [f64; 2]) -> DMatrix<f64> {
        let n = self.dof_count();
        let rule = gauss_rule(self.degree + 1, sub).expect("point count in range");
        let mut m = DMatrix::zeros(n, n);
        let mut vals = vec![0.0; n];
        let mut dvals = vec![0.0; n];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            self.eval_into(extent, x, 0, &mut vals);
            self.eval_into(extent, x, 1, &mut dvals);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += w * dvals[i] * vals[j];
                }
            }
        }
        m
    }
}

/// Orthonormal basis on a physical triangle: monomials in local coordinates
/// ((x,y) - centroid) / scale, orthonormalized against the L2 inner product
/// of the full triangle.
#[derive(Clone, Debug)]
pub struct TriangleBasis {
    degree: usize,
    centroid: [f64; 2],
    scale: f64,
    /// Each basis function as a local-coordinate polynomial.
    polys: Vec<Poly2>,
}

/// Number of polynomial modes of total degree <= r in two variables.
pub fn tri_dof_count(r: usize) -> usize {
    (r + 1) * (r + 2) / 2
}

impl TriangleBasis {
    pub fn new(degree: usize, tri: [[f64; 2]; 3]) -> Self {
        let centroid = [
            (tri[0][0] + tri[1][0] + tri[2][0]) / 3.0,
            (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0,
        ];
        let area = polygon_area(&tri).abs();
        let scale = area.sqrt();
        let n = tri_dof_count(degree);
        // Raw monomials by total degree.
        let mut raw = Vec::with_capacity(n);
        for total in 0..=degree {
            for i in (0..=total).rev() {
                raw.push(Poly2::monomial(degree, i, total - i));
            }
        }
        // Gram matrix in physical L2 over the triangle.
        let rule = triangle_rule(degree + 2, tri).expect("point count in range");
        let local = |p: &[f64; 2]| {
            ((p[0] - centroid[0]) / scale, (p[1] - centroid[1]) / scale)
        };
        let mut vals = DMatrix::zeros(rule.nodes.len(), n);
        for (q, p) in rule.nodes.iter().enumerate() {
            let (xi, eta) = local(p);
            for j in 0..n {
                vals[(q, j)] = raw[j].eval(xi, eta);
            }
        }
        let mut gram = DMatrix::<f64>::zeros(n, n);
        for q in 0..rule.nodes.len() {
            let w = rule.weights[q];
            for i in 0..n {
                for j in 0..n {
                    gram[(i, j)] += w * vals[(q, i)] * vals[(q, j)];
                }
            }
        }
        let chol = gram.cholesky().expect("triangle Gram matrix is SPD");
        // phi = L^{-1} m  =>  Gram(phi) = I.
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("lower triangular solve");
        let mut polys = Vec::with_capacity(n);
        for i in 0..n {
            let mut p = Poly2::zero(degree);
            for j in 0..n {
                let c = l_inv[(i, j)];
                if c != 0.0 {
                    p.scaled_add(&raw[j], c);
                }
            }
            polys.push(p);
        }
        Self { degree, centroid, scale, polys }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dof_count(&self) -> usize {
        self.polys.len()
    }

    /// Values of ∂_x^dx ∂_y^dy of every basis function at the physical point.
    pub fn eval(&self, point: [f64; 2], dx: usize, dy: usize) -> Vec<f64> {
        let xi = (point[0] - self.centroid[0]) / self.scale;
        let eta = (point[1] - self.centroid[1]) / self.scale;
        let chain = self.scale.powi(-((dx + dy) as i32));
        self.polys
            .iter()
            .map(|p| chain * p.partial(dx, dy).eval(xi, eta))
            .collect()
    }

    /// Values of the k-th directional derivative (n · ∇)^k at the point.
    pub fn eval_directional(&self, point: [f64; 2], normal: [f64; 2], k: usize) -> Vec<f64> {
        let xi = (point[0] - self.centroid[0]) / self.scale;
        let eta = (point[1] - self.centroid[1]) / self.scale;
        let chain = self.scale.powi(-(k as i32));
        self.polys
            .iter()
            .map(|p| {
                // (n·∇)^k expands binomially because partials commute.
                let mut acc = 0.0;
                for a in 0..=k {
                    let b = k - a;
                    let binom = binomial(k, a);
                    let c = normal[0].powi(a as i32) * normal[1].powi(b as i32);
                    if c != 0.0 {
                        acc += binom * c * p.partial(a, b).eval(xi, eta);
                    }
                }
                chain * acc
            })
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_basis_values_at_midpoint() {
        let b = IntervalBasis::new(1);
        let v = b.eval([0.0, 1.0], 0.5, 0).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!(v[1].abs() < 1e-15);
    }

    #[test]
    fn derivative_order_above_degree_rejected() {
        let b = IntervalBasis::new(2);
        assert_eq!(
            b.eval([0.0, 1.0], 0.3, 3).unwrap_err(),
            BasisError::DerivativeOrderExceedsDegree { order: 3, degree: 2 }
        );
    }

    #[test]
    fn second_derivative_of_quadratic_mode_is_constant() {
        // Symbolic oracle: phi_2 = sqrt(5/h) P_2(t), P_2'' = 3, chain (2/h)^2.
        let b = IntervalBasis::new(2);
        let h: f64 = 0.1;
        let expect = (5.0 / h).sqrt() * 3.0 * (2.0 / h).powi(2);
        for &x in &[0.0, 0.033, 0.1] {
            let v = b.eval([0.0, h], x, 2).unwrap();
            assert!((v[2] - expect).abs() < 1e-9 * expect.abs());
            assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormal_on_full_element() {
        for r in 0..=4 {
            let b = IntervalBasis::new(r);
            let m = b.sub_mass([-0.3, 0.4], [-0.3, 0.4]);
            let defect = (&m - DMatrix::identity(r + 1, r + 1)).abs().max();
            assert!(defect < 1e-13, "r={r} defect={defect}");
        }
    }

    #[test]
    fn basis_reproduces_polynomials() {
        // L2 projection of a degree-r polynomial onto the element basis
        // reproduces it pointwise.
        let r = 3;
        let b = IntervalBasis::new(r);
        let extent = [0.2, 0.45];
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let rule = gauss_rule(r + 2, extent).unwrap();
        let mut coeffs = vec![0.0; r + 1];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = b.eval(extent, x, 0).unwrap();
            for k in 0..=r {
                coeffs[k] += w * f(x) * v[k];
            }
        }
        for s in 0..50 {
            let x = extent[0] + (extent[1] - extent[0]) * (s as f64 + 0.5) / 50.0;
            let v = b.eval(extent, x, 0).unwrap();
            let fh: f64 = coeffs.iter().zip(&v).map(|(c, p)| c * p).sum();
            assert!((fh - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_consistency_with_finite_differences() {
        let b = IntervalBasis::new(3);
        let extent = [0.0, 0.7];
        let eps = 1e-6;
        for k in 1..=3usize {
            for &x in &[0.1, 0.35, 0.62] {
                let up = b.eval(extent, x + eps, k - 1).unwrap();
                let dn = b.eval(extent, x - eps, k - 1).unwrap();
                let dk = b.eval(extent, x, k).unwrap();
                for j in 0..4 {
                    let fd = (up[j] - dn[j]) / (2.0 * eps);
                    let scale = dk[j].abs().max(1.0);
                    assert!((fd - dk[j]).abs() < 1e-5 * scale, "k={k} j={j}");
                }
            }
        }
    }

    #[test]
    fn triangle_basis_is_orthonormal_and_reproduces() {
        let tri = [[0.0, 0.0], [0.13, 0.01], [0.05, 0.11]];
        for r in 0..=3usize {
            let b = TriangleBasis::new(r, tri);
            let n = b.dof_count();
            assert_eq!(n, tri_dof_count(r));
            let rule = triangle_rule(r + 2, tri).unwrap();
            let mut gram = DMatrix::<f64>::zeros(n, n);
            for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                let v = b.eval(*p, 0, 0);
                for i in 0..n {
                    for j in 0..n {
                        gram[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            let defect = (&gram - DMatrix::<f64>::identity(n, n)).abs().max();
            assert!(defect < 1e-12, "r={r} defect={defect}");
        }
        // Projection of x^2 y reproduced pointwise for r = 3.
        let b = TriangleBasis::new(3, tri);
        let rule = triangle_rule(5, tri).unwrap();
        let f = |x: f64, y: f64| x * x * y - 0.3 * x + 0.2;
        let n = b.dof_count();
        let mut coeffs = vec![0.0; n];
        for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = b.eval(*p, 0, 0);
            for k in 0..n {
                coeffs[k] += w * f(p[0], p[1]) * v[k];
            }
        }
        for p in &rule.nodes {
            let v = b.eval(*p, 0, 0);
            let fh: f64 = coeffs.iter().zip(&v).map(|(c, q)| c * q).sum();
            assert!((fh - f(p[0], p[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn directional_derivative_matches_partials() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let b = TriangleBasis::new(2, tri);
        let nrm = [3.0f64 / 5.0, 4.0 / 5.0];
        let p = [0.3, 0.2];
        let d1 = b.eval_directional(p, nrm, 1);
        let dx = b.eval(p, 1, 0);
        let dy = b.eval(p, 0, 1);
        for j in 0..b.dof_count() {
            assert!((d1[j] - (nrm[0] * dx[j] + nrm[1] * dy[j])).abs() < 1e-13);
        }
        let d2 = b.eval_directional(p, nrm, 2);
        let dxx = b.eval(p, 2, 0);
        let dxy = b.eval(p, 1, 1);
        let dyy = b.eval(p, 0, 2);
        for j in 0..b.dof_count() {
            let expect = nrm[0] * nrm[0] * dxx[j] + 2.0 * nrm[0] * nrm[1] * dxy[j] + nrm[1] * nrm[1] * dyy[j];
            assert!((d2[j] - expect).abs() < 1e-12);
        }
    }
}
