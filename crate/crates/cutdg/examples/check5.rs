use cutdg::assembly1d::*;
use cutdg::basis::IntervalBasis;
use cutdg::geometry1d::*;
use cutdg::harness::norms::scalar_norms;
use cutdg::timestepper::*;
use std::f64::consts::PI;

fn run(n: usize, r: usize, xg: f64, gm: f64, ga: f64) -> f64 {
    let tpi = 2.0 * PI;
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let (t1, t2) = classify(&mesh, xg).unwrap();
    let basis = IntervalBasis::new(r);
    let pen = PenaltyConfig::new(r, 0.1, -0.9, gm, ga);
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
    let (n, r) = (40usize, 2usize);
    let xg = 1e-4;
    println!("baseline gm=.25 ga=.75 : {:.4e}", run(n, r, xg, 0.25, 0.75));
    println!("gm=.25 ga=0           : {:.4e}", run(n, r, xg, 0.25, 0.0));
    println!("gm=0   ga=.75         : {:.4e}", run(n, r, xg, 0.0, 0.75));
    println!("gm=0.025 ga=.75       : {:.4e}", run(n, r, xg, 0.025, 0.75));
    println!("gm=.25 ga=.075        : {:.4e}", run(n, r, xg, 0.25, 0.075));
    println!("gm=2.5 ga=.75         : {:.4e}", run(n, r, xg, 2.5, 0.75));
    println!("gm=.25 ga=7.5         : {:.4e}", run(n, r, xg, 0.25, 7.5));
}
