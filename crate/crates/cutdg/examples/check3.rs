use cutdg::assembly1d::*;
use cutdg::basis::IntervalBasis;
use cutdg::geometry1d::*;
use cutdg::harness::norms::scalar_norms;
use cutdg::timestepper::*;
use std::f64::consts::PI;

// Two-speed accuracy problem with interface at xg (0 => fitted on node).
fn run(n: usize, r: usize, xg: f64) -> f64 {
    let tpi = 2.0 * PI;
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let (t1, t2) = classify(&mesh, if xg == 0.0 { 0.0 } else { xg }).unwrap();
    let basis = IntervalBasis::new(r);
    let pen = PenaltyConfig::new(r, 0.1, -0.9, 0.25, 0.75);
    let flux = FluxModel::scalar(2.0, 1.0);
    let ops = DgOperators::assemble(&mesh, (&t1, &t2), &basis, &pen, &flux, [BcKind::Inflow, BcKind::Outflow]).unwrap();
    let exact = move |s: Side, x: f64, t: f64| match s {
        Side::One => (tpi * (x - 2.0 * t)).sin(),
        Side::Two => 2.0 * (2.0 * tpi * (x - t - xg / 2.0)).sin(),
    };
    let u0 = ops.project_initial(&mesh, (&t1, &t2), &basis, &|s, x, out| out[0] = exact(s, x, 0.0));
    let lad = BoundaryDataLadder::scalar(
        move |t| (tpi * (-1.0 - 2.0 * t)).sin(),
        move |t| -2.0 * tpi * (tpi * (-1.0 - 2.0 * t)).cos(),
        move |t| -4.0 * tpi * tpi * (tpi * (-1.0 - 2.0 * t)).sin(),
    );
    let sys = StationarySystem { ops: &ops, data_left: lad, data_right: BoundaryDataLadder::zero(1) };
    let dt = cfl_dt(mesh.h(), &flux, r);
    let u = integrate(RkScheme::for_degree(r), &sys, u0, 0.0, 1.0, dt, &mut |_,_,_,_|{});
    scalar_norms(&mesh, (&t1, &t2), &ops.dof_map, &basis, &u, &|s, x| exact(s, x, 1.0)).l2
}

fn main() {
    for r in [1usize, 2, 3] {
        for n in [20usize, 40] {
            println!("two-speed r={r} N={n}: cut={:.3e} fitted={:.3e}", run(n, r, 1e-4), run(n, r, 0.0));
        }
    }
}
