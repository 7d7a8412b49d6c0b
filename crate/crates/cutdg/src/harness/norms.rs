//! Error norms over the physical subdomains.
//!
//! L1/L2 use a (r+3)-point rule per physical sub-element; the max norm is
//! sampled at those quadrature points, the element end points and the
//! interface point.

use crate::acoustic::{to_primitive, AcousticSystem};
use crate::assembly1d::{eval_field, DofMap};
use crate::basis::{gauss_rule, IntervalBasis};
use crate::geometry1d::{ActiveTopology, BackgroundMesh1D, Side};

#[derive(Clone, Debug)]
pub struct NormSet {
    pub label: &'static str,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Norms of (u_h - exact) for a scalar stationary-topology solution.
pub fn scalar_norms(
    mesh: &BackgroundMesh1D,
    topos: (&ActiveTopology, &ActiveTopology),
    dof_map: &DofMap,
    basis: &IntervalBasis,
    u: &[f64],
    exact: &dyn Fn(Side, f64) -> f64,
) -> NormSet {
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    let mut val = [0.0];
    for topo in [topos.0, topos.1] {
        for elem in topo.elements.clone() {
            let sub = topo.physical_extent(mesh, elem);
            if sub[1] - sub[0] <= 0.0 {
                continue;
            }
            let rule = gauss_rule(basis.degree() + 3, sub).unwrap();
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                eval_field(mesh, dof_map, basis, u, topo.side, x, &mut val);
                let d = val[0] - exact(topo.side, x);
                l1 += w * d.abs();
                l2 += w * d * d;
                linf = linf.max(d.abs());
            }
            for x in sub {
                eval_field(mesh, dof_map, basis, u, topo.side, x, &mut val);
                linf = linf.max((val[0] - exact(topo.side, x)).abs());
            }
        }
    }
    NormSet { label: "u", l1, l2: l2.sqrt(), linf }
}

/// Norms of the primitive-variable errors of an acoustic solution; the exact
/// closure returns (velocity, pressure) per side.
pub fn acoustic_norms(
    mesh: &BackgroundMesh1D,
    topos: (&ActiveTopology, &ActiveTopology),
    dof_map: &DofMap,
    basis: &IntervalBasis,
    system: &AcousticSystem,
    dofs: &[f64],
    exact: &dyn Fn(Side, f64) -> (f64, f64),
) -> (NormSet, NormSet) {
    let mut p = NormSet { label: "p", l1: 0.0, l2: 0.0, linf: 0.0 };
    let mut u = NormSet { label: "u", l1: 0.0, l2: 0.0, linf: 0.0 };
    let mut val = [0.0, 0.0];
    let mut add = |side: Side, x: f64, w: f64, val: &[f64], sample_only: bool| {
        let mat = system.material(side);
        let (uh, ph) = to_primitive(mat, val[0], val[1]);
        let (ue, pe) = exact(side, x);
        let (du, dp) = (uh - ue, ph - pe);
        if !sample_only {
            u.l1 += w * du.abs();
            u.l2 += w * du * du;
            p.l1 += w * dp.abs();
            p.l2 += w * dp * dp;
        }
        u.linf = u.linf.max(du.abs());
        p.linf = p.linf.max(dp.abs());
    };
    for topo in [topos.0, topos.1] {
        for elem in topo.elements.clone() {
            let sub = topo.physical_extent(mesh, elem);
            if sub[1] - sub[0] <= 0.0 {
                continue;
            }
            let rule = gauss_rule(basis.degree() + 3, sub).unwrap();
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                eval_field(mesh, dof_map, basis, dofs, topo.side, x, &mut val);
                add(topo.side, x, w, &val, false);
            }
            for x in sub {
                eval_field(mesh, dof_map, basis, dofs, topo.side, x, &mut val);
                add(topo.side, x, 0.0, &val, true);
            }
        }
    }
    p.l2 = p.l2.sqrt();
    u.l2 = u.l2.sqrt();
    (p, u)
}

/// Norms of a space-time trace against an exact per-side solution.
pub fn trace_norms(
    mesh: &BackgroundMesh1D,
    basis: &IntervalBasis,
    trace: &crate::spacetime::TraceField,
    x_gamma: f64,
    exact: &dyn Fn(Side, f64) -> f64,
) -> NormSet {
    let (t1, t2) = crate::geometry1d::classify(mesh, x_gamma).expect("interface inside domain");
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    for topo in [&t1, &t2] {
        for elem in topo.elements.clone() {
            if !trace.range(topo.side).contains(&elem) {
                continue;
            }
            let sub = topo.physical_extent(mesh, elem);
            if sub[1] - sub[0] <= 0.0 {
                continue;
            }
            let rule = gauss_rule(basis.degree() + 3, sub).unwrap();
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let d = trace.eval(mesh, basis, topo.side, x) - exact(topo.side, x);
                l1 += w * d.abs();
                l2 += w * d * d;
                linf = linf.max(d.abs());
            }
            for x in sub {
                let d = trace.eval(mesh, basis, topo.side, x) - exact(topo.side, x);
                linf = linf.max(d.abs());
            }
        }
    }
    NormSet { label: "u", l1, l2: l2.sqrt(), linf }
}

/// Norms of a 2D solution over the physical regions.
pub fn twod_norms(
    mesh: &crate::geometry2d::TriMesh,
    topos: (&crate::geometry2d::ActiveTopology2D, &crate::geometry2d::ActiveTopology2D),
    ops: &crate::assembly2d::DgOperators2D,
    u: &[f64],
    degree: usize,
    exact: &dyn Fn(usize, f64, f64) -> f64,
) -> NormSet {
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    for topo in [topos.0, topos.1] {
        for &t in &topo.tris {
            let eval_at = |p: [f64; 2], w: f64, l1: &mut f64, l2: &mut f64, linf: &mut f64| {
                let d = ops.eval(u, topo.side, t, p) - exact(topo.side, p[0], p[1]);
                *l1 += w * d.abs();
                *l2 += w * d * d;
                *linf = linf.max(d.abs());
            };
            match &topo.cut[t] {
                None => {
                    let rule = crate::basis::triangle_rule(degree + 3, mesh.tri_vertices(t)).unwrap();
                    for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                        eval_at(*p, w, &mut l1, &mut l2, &mut linf);
                    }
                }
                Some(cut) => {
                    let rule = crate::basis::cut_cell_rule_polygon(degree + 1, &cut.polygon).unwrap();
                    for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                        eval_at(*p, w, &mut l1, &mut l2, &mut linf);
                    }
                }
            }
        }
    }
    NormSet { label: "u", l1, l2: l2.sqrt(), linf }
}
