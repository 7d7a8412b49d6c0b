use cutdg::assembly1d::*;
use cutdg::basis::IntervalBasis;
use cutdg::geometry1d::*;
use cutdg::harness::norms::scalar_norms;
use cutdg::timestepper::*;
use std::f64::consts::PI;

fn run(n: usize, r: usize, xg: f64, a: (f64, f64)) -> f64 {
    let tpi = 2.0 * PI;
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let (t1, t2) = classify(&mesh, xg).unwrap();
    let basis = IntervalBasis::new(r);
    let pen = PenaltyConfig::new(r, 0.1, -0.9, 0.25, 0.75);
    let flux = FluxModel::scalar(a.0, a.1);
    let ops = DgOperators::assemble(&mesh, (&t1, &t2), &basis, &pen, &flux, [BcKind::Inflow, BcKind::Outflow]).unwrap();
    // single-speed problem: exact u = sin(2pi(x - a t)) both sides when a1 == a2
    let exact = move |_s: Side, x: f64, t: f64| (tpi * (x - a.0 * t)).sin();
    let u0 = ops.project_initial(&mesh, (&t1, &t2), &basis, &|s, x, out| out[0] = exact(s, x, 0.0));
    let lad = BoundaryDataLadder::scalar(
        move |t| (tpi * (-1.0 - a.0 * t)).sin(),
        move |t| -a.0 * tpi * (tpi * (-1.0 - a.0 * t)).cos(),
        move |t| -a.0 * a.0 * tpi * tpi * (tpi * (-1.0 - a.0 * t)).sin(),
    );
    let sys = StationarySystem { ops: &ops, data_left: lad, data_right: BoundaryDataLadder::zero(1) };
    let dt = cfl_dt(mesh.h(), &flux, r);
    let scheme = RkScheme::for_degree(r);
    let u = integrate(scheme, &sys, u0, 0.0, 1.0, dt, &mut |_,_,_,_|{});
    scalar_norms(&mesh, (&t1, &t2), &ops.dof_map, &basis, &u, &|s, x| exact(s, x, 1.0)).l2
}

fn main() {
    // same-speed problem: interface terms with [F]=0; classic DG accuracy expected
    for r in [1usize, 2, 3] {
        for n in [20usize, 40] {
            let e_cut = run(n, r, 1e-4, (2.0, 2.0));
            let e_fit = run(n, r, 0.0, (2.0, 2.0));
            println!("same-speed r={r} N={n}: cut={:.3e} fitted={:.3e}", e_cut, e_fit);
        }
    }
}
