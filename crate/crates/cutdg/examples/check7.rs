use cutdg::assembly1d::*;
use cutdg::basis::{gauss_rule, IntervalBasis};
use cutdg::geometry1d::*;
use std::f64::consts::PI;

fn main() {
    let tpi = 2.0 * PI;
    let (n, r) = (40usize, 2usize);
    let xg = 1e-4;
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let (t1, t2) = classify(&mesh, xg).unwrap();
    let basis = IntervalBasis::new(r);
    let pen = PenaltyConfig::new(r, 0.1, -0.9, 0.25, 0.75);
    let flux = FluxModel::scalar(2.0, 1.0);
    let ops = DgOperators::assemble(&mesh, (&t1, &t2), &basis, &pen, &flux, [BcKind::Inflow, BcKind::Outflow]).unwrap();
    let exact = move |s: Side, x: f64| match s {
        Side::One => (tpi * x).sin(),
        Side::Two => 2.0 * (2.0 * tpi * (x - xg / 2.0)).sin(),
    };
    let u0 = ops.project_initial(&mesh, (&t1, &t2), &basis, &|s, x, out| out[0] = exact(s, x));
    let mut val = [0.0];
    for topo in [&t1, &t2] {
        for elem in topo.elements.clone() {
            let sub = topo.physical_extent(&mesh, elem);
            if sub[1] - sub[0] <= 0.0 { continue; }
            let rule = gauss_rule(r + 3, sub).unwrap();
            let mut e2 = 0.0;
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                eval_field(&mesh, &ops.dof_map, &basis, &u0, topo.side, x, &mut val);
                let d = val[0] - exact(topo.side, x);
                e2 += w * d * d;
            }
            if e2 > 1e-9 {
                println!("side {:?} elem {elem} [{:.4},{:.4}]: err2 = {:.3e}", topo.side, sub[0], sub[1], e2);
            }
        }
    }
}
