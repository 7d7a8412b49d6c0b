use super::BasisError;

/// Quadrature rule on an interval.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Largest polynomial degree integrated exactly.
    pub exact_degree: usize,
}

/// Quadrature rule on a planar region.
#[derive(Clone, Debug)]
pub struct QuadratureRule2D {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl QuadratureRule2D {
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, &w)| w * f(p[0], p[1])).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
fn gauss_legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            if n == 1 {
                p1 = x;
            }
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let dpn = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 1..n {
            let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
            p0 = p1;
            p1 = p2;
        }
        let dpn = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dpn * dpn);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Gauss-Legendre rule with `n_points` nodes mapped to [a, b].
/// Exact for polynomials of degree 2 n_points - 1.
pub fn gauss_rule(n_points: usize, extent: [f64; 2]) -> Result<QuadratureRule, BasisError> {
    if n_points == 0 || n_points > 20 {
        return Err(BasisError::UnsupportedPointCount { n: n_points });
    }
    let (ref_nodes, ref_weights) = gauss_legendre_reference(n_points);
    let mid = 0.5 * (extent[0] + extent[1]);
    let half = 0.5 * (extent[1] - extent[0]);
    Ok(QuadratureRule {
        nodes: ref_nodes.iter().map(|&t| mid + half * t).collect(),
        weights: ref_weights.iter().map(|&w| w * half).collect(),
        exact_degree: 2 * n_points - 1,
    })
}

/// Quadrature on a sub-interval of a background element, exact for the
/// integrands of a degree-r scheme (declared degree 2r + 3).
pub fn cut_cell_rule_interval(basis_degree: usize, sub_extent: [f64; 2]) -> Result<QuadratureRule, BasisError> {
    if !(sub_extent[1] > sub_extent[0]) {
        return Err(BasisError::EmptySubExtent);
    }
    gauss_rule(basis_degree + 2, sub_extent)
}

/// Tensor Gauss rule collapsed onto a triangle (Duffy transform).
/// With n points per direction the rule is exact for total degree 2n - 2.
pub fn triangle_rule(n_per_dir: usize, tri: [[f64; 2]; 3]) -> Result<QuadratureRule2D, BasisError> {
    if n_per_dir == 0 || n_per_dir > 20 {
        return Err(BasisError::UnsupportedPointCount { n: n_per_dir });
    }
    let (gn, gw) = gauss_legendre_reference(n_per_dir);
    // Shift to [0,1].
    let n01: Vec<f64> = gn.iter().map(|&t| 0.5 * (t + 1.0)).collect();
    let w01: Vec<f64> = gw.iter().map(|&w| 0.5 * w).collect();
    let [a, b, c] = tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let area2 = det.abs();
    if area2 == 0.0 {
        return Err(BasisError::EmptySubExtent);
    }
    let mut nodes = Vec::with_capacity(n_per_dir * n_per_dir);
    let mut weights = Vec::with_capacity(n_per_dir * n_per_dir);
    for (iu, &u) in n01.iter().enumerate() {
        for (iv, &v) in n01.iter().enumerate() {
            let (xi, eta) = (u * (1.0 - v), u * v);
            let x = a[0] + xi * (b[0] - a[0]) + eta * (c[0] - a[0]);
            let y = a[1] + xi * (b[1] - a[1]) + eta * (c[1] - a[1]);
            nodes.push([x, y]);
            weights.push(w01[iu] * w01[iv] * u * area2);
        }
    }
    Ok(QuadratureRule2D { nodes, weights, exact_degree: 2 * n_per_dir - 2 })
}

/// Quadrature over a convex polygon, fan-triangulated from its centroid.
/// Exact for total degree 2 (basis_degree + 2) - 2 = 2 basis_degree + 2.
pub fn cut_cell_rule_polygon(basis_degree: usize, vertices: &[[f64; 2]]) -> Result<QuadratureRule2D, BasisError> {
    if vertices.len() < 3 || polygon_area(vertices) <= 0.0 {
        return Err(BasisError::EmptySubExtent);
    }
    let n = vertices.len();
    let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n as f64;
    let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n as f64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut exact = usize::MAX;
    for k in 0..n {
        let tri = [[cx, cy], vertices[k], vertices[(k + 1) % n]];
        let det = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
            - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
        if det.abs() < 1e-300 {
            continue;
        }
        let rule = triangle_rule(basis_degree + 2, tri)?;
        exact = exact.min(rule.exact_degree);
        nodes.extend(rule.nodes);
        weights.extend(rule.weights);
    }
    if nodes.is_empty() {
        return Err(BasisError::EmptySubExtent);
    }
    Ok(QuadratureRule2D { nodes, weights, exact_degree: exact })
}

/// Signed area of a polygon (positive when counter-clockwise), by shoelace.
pub fn polygon_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        acc += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_is_standard() {
        let r = gauss_rule(2, [-1.0, 1.0]).unwrap();
        assert!((r.nodes[0] + 1.0 / 3.0_f64.sqrt()).abs() < 1e-14);
        assert!((r.nodes[1] - 1.0 / 3.0_f64.sqrt()).abs() < 1e-14);
        assert!((r.weights[0] - 1.0).abs() < 1e-14);
        assert!((r.weights[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn midpoint_rule_on_scaled_interval() {
        let h = 0.137;
        let r = gauss_rule(1, [0.0, h]).unwrap();
        assert!((r.nodes[0] - h / 2.0).abs() < 1e-16);
        assert!((r.weights[0] - h).abs() < 1e-16);
    }

    #[test]
    fn monomial_exactness_interval() {
        for n in 1..=20 {
            let r = gauss_rule(n, [0.3, 1.7]).unwrap();
            for p in 0..=r.exact_degree {
                let num = r.integrate(|x| x.powi(p as i32));
                let exact = (1.7f64.powi(p as i32 + 1) - 0.3f64.powi(p as i32 + 1)) / (p as f64 + 1.0);
                assert!((num - exact).abs() <= 1e-13 * exact.abs().max(1.0), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn cut_interval_three_point_integrates_x5() {
        let r = gauss_rule(3, [0.0, 0.3]).unwrap();
        let num = r.integrate(|x| x.powi(5));
        let exact = 0.3f64.powi(6) / 6.0;
        assert!((num - exact).abs() < 1e-15);
    }

    #[test]
    fn tiny_cut_measure() {
        let h = 0.1;
        let alpha = 1e-6;
        let r = cut_cell_rule_interval(1, [0.0, alpha * h]).unwrap();
        assert!((r.measure() - alpha * h).abs() < 1e-20);
    }

    #[test]
    fn empty_sub_extent_rejected() {
        assert!(cut_cell_rule_interval(1, [0.2, 0.2]).is_err());
        assert!(cut_cell_rule_polygon(1, &[[0.0, 0.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn triangle_rule_monomial_exactness() {
        // Integrals of x^p y^q over the unit triangle: p! q! / (p+q+2)!
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        fn fact(n: usize) -> f64 {
            (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
        }
        for n in 2..=6usize {
            let r = triangle_rule(n, tri).unwrap();
            for p in 0..=r.exact_degree {
                for q in 0..=(r.exact_degree - p) {
                    let num = r.integrate(|x, y| x.powi(p as i32) * y.powi(q as i32));
                    let exact = fact(p) * fact(q) / fact(p + q + 2);
                    assert!(
                        (num - exact).abs() <= 1e-13 * exact.max(1.0),
                        "n={n} p={p} q={q}: {num} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn quadrilateral_cut_rule_matches_analytic() {
        // Unit triangle cut by the line x = c: the left part is a
        // quadrilateral; the reference value is the full-triangle integral
        // minus the cut-off corner triangle on the right.
        let c: f64 = 0.55;
        let poly = [[0.0, 0.0], [c, 0.0], [c, 1.0 - c], [0.0, 1.0]];
        let full = triangle_rule(6, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let corner = triangle_rule(6, [[c, 0.0], [1.0, 0.0], [c, 1.0 - c]]).unwrap();
        let f = |x: f64, y: f64| x * x * y;
        let exact = full.integrate(f) - corner.integrate(f);
        let r = cut_cell_rule_polygon(2, &poly).unwrap();
        assert!((r.integrate(f) - exact).abs() < 1e-13);
        assert!((r.measure() - (0.5 - 0.5 * (1.0 - c) * (1.0 - c))).abs() < 1e-14);
    }
}
