use cutdg::assembly1d::*;
use cutdg::basis::IntervalBasis;
use cutdg::geometry1d::*;
use cutdg::harness::norms::scalar_norms;
use cutdg::timestepper::*;
use std::f64::consts::PI;

fn run(n: usize, r: usize, xg: f64, t_end: f64) -> (f64, f64) {
    let tpi = 2.0 * PI;
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let (t1, t2) = classify(&mesh, xg).unwrap();
    let basis = IntervalBasis::new(r);
    let pen = PenaltyConfig::new(r, 0.1, -0.9, 0.25, 0.75);
    let flux = FluxModel::scalar(2.0, 1.0);
    let ops = DgOperators::assemble(&mesh, (&t1, &t2), &basis, &pen, &flux, [BcKind::Inflow, BcKind::Outflow]).unwrap();
    let exact = move |s: Side, x: f64, t: f64| match s {
        Side::One => (tpi * (x - 2.0 * t)).sin(),
        Side::Two => 2.0 * (2.0 * tpi * (x - t - xg / 2.0)).sin(),
    };
    let u0 = ops.project_initial(&mesh, (&t1, &t2), &basis, &|s, x, out| out[0] = exact(s, x, 0.0));
    let e0 = scalar_norms(&mesh, (&t1, &t2), &ops.dof_map, &basis, &u0, &|s, x| exact(s, x, 0.0)).l2;
    let lad = BoundaryDataLadder::scalar(
        move |t| (tpi * (-1.0 - 2.0 * t)).sin(),
        move |t| -2.0 * tpi * (tpi * (-1.0 - 2.0 * t)).cos(),
        move |t| -4.0 * tpi * tpi * (tpi * (-1.0 - 2.0 * t)).sin(),
    );
    let sys = StationarySystem { ops: &ops, data_left: lad, data_right: BoundaryDataLadder::zero(1) };
    let dt = cfl_dt(mesh.h(), &flux, r);
    let u = integrate(RkScheme::for_degree(r), &sys, u0, 0.0, t_end, dt, &mut |_,_,_,_|{});
    (e0, scalar_norms(&mesh, (&t1, &t2), &ops.dof_map, &basis, &u, &|s, x| exact(s, x, t_end)).l2)
}

fn main() {
    let (n, r) = (40usize, 2usize);
    for t in [0.05, 0.2, 0.5, 1.0] {
        let (e0c, ec) = run(n, r, 1e-4, t);
        let (e0f, ef) = run(n, r, 0.0, t);
        println!("t={t:.2}: cut e0={e0c:.3e} e={ec:.3e} | fitted e0={e0f:.3e} e={ef:.3e}");
    }
}
