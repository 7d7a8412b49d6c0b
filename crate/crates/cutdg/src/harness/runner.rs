//! Experiment drivers: full solver runs per preset, convergence tables,
//! cut-fraction sweeps and stability region maps.

use super::norms::{acoustic_norms, scalar_norms, trace_norms, twod_norms, NormSet};
use super::presets::*;
use crate::acoustic::acoustic_energy;
use crate::analysis::{feasible_eta, weighted_energy};
use crate::assembly1d::{assemble_mass, BcKind, DgOperators, FluxModel, PenaltyConfig};
use crate::assembly2d::{BoundaryField2D, BoundarySpec2D, DgOperators2D, System2D};
use crate::basis::IntervalBasis;
use crate::coupled::coupled_advance;
use crate::geometry1d::{build_mesh, classify, slab_topology, BackgroundMesh1D, InterfacePath, Side};
use crate::geometry2d::{classify_2d, structured_tri_mesh, LineInterface};
use crate::linalg::block_condition_number;
use crate::spacetime::{
    advance, project_trace, trace_total_mass, Formulation, TimeQuadrature, TraceField,
};
use crate::timestepper::{cfl_dt, cfl_dt_custom, integrate, BoundaryDataLadder, RkScheme, StationarySystem};
use std::sync::Arc;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct RunReport {
    pub n: usize,
    pub h: f64,
    pub degree: usize,
    pub norms: Vec<NormSet>,
    /// Conservation error trace: (t, e per component).
    pub conservation: Vec<(f64, Vec<f64>)>,
    /// Discrete energy trace.
    pub energy: Vec<(f64, f64)>,
    pub mass_condition: Option<f64>,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn max_conservation_error(&self, comp: usize) -> f64 {
        self.conservation.iter().map(|(_, e)| e[comp].abs()).fold(0.0, f64::max)
    }

    pub fn final_conservation_error(&self, comp: usize) -> f64 {
        self.conservation.last().map(|(_, e)| e[comp].abs()).unwrap_or(0.0)
    }
}

/// Parallel map with the worker count capped by CUTDG_THREADS.
pub fn parallel_map<T: Send + Sync, U: Send>(items: Vec<T>, f: impl Fn(&T) -> U + Send + Sync) -> Vec<U> {
    use rayon::prelude::*;
    let threads = std::env::var("CUTDG_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&k| k >= 1);
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("thread pool")
            .install(|| items.par_iter().map(&f).collect()),
        None => items.par_iter().map(&f).collect(),
    }
}

fn scalar_ladder(
    g: fn(f64) -> f64,
    dg: fn(f64) -> f64,
    d2g: fn(f64) -> f64,
) -> BoundaryDataLadder {
    BoundaryDataLadder::scalar(g, dg, d2g)
}

/// Shared driver for the stationary scalar problems.
#[allow(clippy::too_many_arguments)]
fn run_scalar_stationary(
    n: usize,
    r: usize,
    lambda: (f64, f64),
    gamma: (f64, f64),
    cfl: Option<f64>,
    t_end: f64,
    initial: &dyn Fn(Side, f64) -> f64,
    ladder: BoundaryDataLadder,
    exact_at_end: Option<&dyn Fn(Side, f64) -> f64>,
    x_gamma: f64,
) -> RunReport {
    let start = Instant::now();
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let (t1, t2) = classify(&mesh, x_gamma).unwrap();
    let basis = IntervalBasis::new(r);
    let pen = PenaltyConfig::new(r, lambda.0, lambda.1, gamma.0, gamma.1);
    let flux = FluxModel::scalar(StationaryAccuracy::A.0, StationaryAccuracy::A.1);
    let ops = DgOperators::assemble(&mesh, (&t1, &t2), &basis, &pen, &flux, [BcKind::Inflow, BcKind::Outflow])
        .unwrap();
    let u0 = ops.project_initial(&mesh, (&t1, &t2), &basis, &|side, x, out| out[0] = initial(side, x));
    let sys = StationarySystem { ops: &ops, data_left: ladder, data_right: BoundaryDataLadder::zero(1) };
    let dt = match cfl {
        Some(c) => cfl_dt_custom(mesh.h(), &flux, c),
        None => cfl_dt(mesh.h(), &flux, r),
    };
    let scheme = RkScheme::for_degree(r);
    let mass0 = ops.total_mass(&u0)[0];
    let mut cumulative = 0.0;
    let mut conservation = vec![(0.0, vec![0.0])];
    let mut energy = vec![(0.0, weighted_energy(&ops, &u0, 1.0))];
    let u = integrate(scheme, &sys, u0, 0.0, t_end, dt, &mut |_k, t, u, record| {
        cumulative += record[0];
        conservation.push((t, vec![cumulative - (ops.total_mass(u)[0] - mass0)]));
        energy.push((t, weighted_energy(&ops, u, 1.0)));
    });
    let norms = match exact_at_end {
        Some(exact) => vec![scalar_norms(&mesh, (&t1, &t2), &ops.dof_map, &basis, &u, exact)],
        None => Vec::new(),
    };
    RunReport {
        n,
        h: mesh.h(),
        degree: r,
        norms,
        conservation,
        energy,
        mass_condition: Some(ops.mass_condition()),
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_stationary_accuracy(n: usize, r: usize, lambda: (f64, f64)) -> RunReport {
    run_scalar_stationary(
        n,
        r,
        lambda,
        (0.25, 0.75),
        None,
        1.0,
        &StationaryAccuracy::initial,
        scalar_ladder(
            StationaryAccuracy::inflow,
            StationaryAccuracy::inflow_dt,
            StationaryAccuracy::inflow_dtt,
        ),
        Some(&|side, x| StationaryAccuracy::exact(side, x, 1.0)),
        StationaryAccuracy::X_GAMMA,
    )
}

pub fn run_stationary_conservation(n: usize, r: usize, lambda: (f64, f64), t_end: f64) -> RunReport {
    run_scalar_stationary(
        n,
        r,
        lambda,
        (0.25, 0.75),
        None,
        t_end,
        &|_side, _x| 0.0,
        scalar_ladder(
            StationaryConservation::inflow,
            StationaryConservation::inflow_dt,
            StationaryConservation::inflow_dtt,
        ),
        Some(&move |side, x| StationaryConservation::exact(side, x, t_end)),
        StationaryConservation::X_GAMMA,
    )
}

/// Same conservation problem with the interface at x_Γ = α h.
pub fn run_cut_fraction(n: usize, r: usize, alpha: f64) -> RunReport {
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let xg = alpha * mesh.h();
    let t_end = 1.0;
    run_scalar_stationary(
        n,
        r,
        (0.1, -0.9),
        (0.25, 0.75),
        None,
        t_end,
        &|_side, _x| 0.0,
        scalar_ladder(
            StationaryConservation::inflow,
            StationaryConservation::inflow_dt,
            StationaryConservation::inflow_dtt,
        ),
        Some(&move |side, x| {
            // Characteristic solution with the interface at x_Γ = α h.
            let g = StationaryConservation::inflow;
            match side {
                Side::One => {
                    let tau = t_end - (x + 1.0) / 2.0;
                    if tau >= 0.0 {
                        g(tau)
                    } else {
                        0.0
                    }
                }
                Side::Two => {
                    let tau = t_end - x + (xg - 1.0) / 2.0;
                    if tau >= 0.0 {
                        2.0 * g(tau)
                    } else {
                        0.0
                    }
                }
            }
        }),
        xg,
    )
}

/// Stabilized mass condition number at cut fraction α.
pub fn mass_condition_at(n: usize, r: usize, alpha: f64, gamma_mass: f64) -> f64 {
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let xg = alpha * mesh.h();
    let (t1, t2) = classify(&mesh, xg).unwrap();
    let basis = IntervalBasis::new(r);
    let pen = PenaltyConfig::new(r, 0.1, -0.9, gamma_mass, 0.75);
    let mass = assemble_mass(&mesh, (&t1, &t2), &basis, &pen, 1).unwrap();
    block_condition_number(&mass)
}

pub fn run_acoustic(n: usize, r: usize) -> RunReport {
    let start = Instant::now();
    let sys_def = AcousticPreset::system();
    let mesh = build_mesh(AcousticPreset::DOMAIN.0, AcousticPreset::DOMAIN.1, n).unwrap();
    let (t1, t2) = classify(&mesh, AcousticPreset::X_GAMMA).unwrap();
    let basis = IntervalBasis::new(r);
    let pen = PenaltyConfig::acoustic_default(r);
    let flux = sys_def.flux_model();
    let ops = DgOperators::assemble(&mesh, (&t1, &t2), &basis, &pen, &flux, [BcKind::Inflow, BcKind::Inflow])
        .unwrap();
    let u0 = ops.project_initial(&mesh, (&t1, &t2), &basis, &|_side, x, out| {
        let (m, q) = AcousticPreset::initial_conservative(x);
        out[0] = m;
        out[1] = q;
    });
    let sys = StationarySystem {
        ops: &ops,
        data_left: BoundaryDataLadder::zero(2),
        data_right: BoundaryDataLadder::zero(2),
    };
    let dt = cfl_dt(mesh.h(), &flux, r);
    let scheme = RkScheme::for_degree(r);
    let mass0 = ops.total_mass(&u0);
    let mut cumulative = vec![0.0; 2];
    let mut conservation = vec![(0.0, vec![0.0, 0.0])];
    let mut energy = vec![(0.0, acoustic_energy(&sys_def, &ops, &u0))];
    let u = integrate(scheme, &sys, u0, 0.0, AcousticPreset::T_END, dt, &mut |_k, t, u, record| {
        let mass = ops.total_mass(u);
        let e: Vec<f64> = (0..2)
            .map(|c| {
                cumulative[c] += record[c];
                cumulative[c] - (mass[c] - mass0[c])
            })
            .collect();
        conservation.push((t, e));
        energy.push((t, acoustic_energy(&sys_def, &ops, u)));
    });
    let (p_norms, u_norms) = acoustic_norms(&mesh, (&t1, &t2), &ops.dof_map, &basis, &sys_def, &u, &|side, x| {
        AcousticPreset::exact_primitive(side, x, AcousticPreset::T_END)
    });
    RunReport {
        n,
        h: mesh.h(),
        degree: r,
        norms: vec![p_norms, u_norms],
        conservation,
        energy,
        mass_condition: Some(ops.mass_condition()),
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Space-time run for the constant-velocity accuracy problem.
pub fn run_moving_accuracy(n: usize, r_s: usize) -> RunReport {
    let start = Instant::now();
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let basis_s = IntervalBasis::new(r_s);
    let basis_t = IntervalBasis::new(1);
    let flux = FluxModel::scalar(MovingAccuracy::A.0, MovingAccuracy::A.1);
    let pen = PenaltyConfig::new(r_s, 0.0, -1.0, 0.25, 0.75);
    let path = InterfacePath::Linear { x0: MovingAccuracy::X_GAMMA0, velocity: MovingAccuracy::VELOCITY };
    let dt = if r_s == 1 { mesh.h() / 12.0 } else { 0.005 * mesh.h() };
    let t_end = MovingAccuracy::T_END;
    let initial = |side: Side, x: f64| MovingAccuracy::exact(side, x, 0.0);
    let first = slab_topology(&mesh, &path, 0.0, dt, &[]).unwrap();
    let init_trace = project_trace(&mesh, &basis_s, first.active_1.clone(), first.active_2.clone(), &initial);
    let mass0 = trace_total_mass(&mesh, &basis_s, &init_trace, path.position(0.0));
    let mut cumulative = 0.0;
    let mut conservation = vec![(0.0, vec![0.0])];
    let trace = advance(
        &mesh,
        &basis_s,
        &basis_t,
        TimeQuadrature::Simpson,
        Formulation::IntegratedByParts,
        &flux,
        &pen,
        &path,
        &initial,
        &MovingAccuracy::inflow,
        t_end,
        dt,
        &mut |_sol, diag| {
            cumulative += diag.influx;
            conservation.push((diag.t_end, vec![cumulative - (diag.mass_end - mass0)]));
        },
    )
    .unwrap();
    let xg = path.position(t_end);
    let norms = vec![trace_norms(&mesh, &basis_s, &trace, xg, &|side, x| {
        MovingAccuracy::exact(side, x, t_end)
    })];
    RunReport {
        n,
        h: mesh.h(),
        degree: r_s,
        norms,
        conservation,
        energy: Vec::new(),
        mass_condition: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Space-time run for the oscillating-interface conservation problem.
pub fn run_moving_conservation(n: usize, formulation: Formulation, t_end: f64) -> RunReport {
    let start = Instant::now();
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let basis_s = IntervalBasis::new(1);
    let basis_t = IntervalBasis::new(1);
    let flux = FluxModel::scalar(MovingConservation::A.0, MovingConservation::A.1);
    let pen = PenaltyConfig::new(1, 0.0, -1.0, 0.25, 0.75);
    let path = InterfacePath::Sinusoidal {
        x0: MovingConservation::X_GAMMA0,
        amplitude: MovingConservation::amplitude(),
    };
    // Courant number 1/6: dt = h / (6 max|a|) = h / 12.
    let dt = cfl_dt_custom(mesh.h(), &flux, 1.0 / 6.0);
    let mut cumulative = 0.0;
    let mut conservation = vec![(0.0, vec![0.0])];
    let _ = advance(
        &mesh,
        &basis_s,
        &basis_t,
        TimeQuadrature::Simpson,
        formulation,
        &flux,
        &pen,
        &path,
        &|_s, _x| 0.0,
        &MovingConservation::inflow,
        t_end,
        dt,
        &mut |_sol, diag| {
            cumulative += diag.influx;
            conservation.push((diag.t_end, vec![cumulative - diag.mass_end]));
        },
    )
    .unwrap();
    RunReport {
        n,
        h: mesh.h(),
        degree: 1,
        norms: Vec::new(),
        conservation,
        energy: Vec::new(),
        mass_condition: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Locally implicit run for the constant-velocity accuracy problem.
pub fn run_coupled_accuracy(n: usize) -> RunReport {
    let start = Instant::now();
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let basis_s = IntervalBasis::new(1);
    let flux = FluxModel::scalar(MovingAccuracy::A.0, MovingAccuracy::A.1);
    let pen = PenaltyConfig::new(1, 0.0, -1.0, 0.25, 0.75);
    let path = InterfacePath::Linear { x0: MovingAccuracy::X_GAMMA0, velocity: MovingAccuracy::VELOCITY };
    let dt = mesh.h() / 12.0;
    let t_end = MovingAccuracy::T_END;
    let initial = |side: Side, x: f64| MovingAccuracy::exact(side, x, 0.0);
    let first = slab_topology(&mesh, &path, 0.0, dt, &[]).unwrap();
    let init_trace = project_trace(&mesh, &basis_s, first.active_1.clone(), first.active_2.clone(), &initial);
    let mass0 = trace_total_mass(&mesh, &basis_s, &init_trace, path.position(0.0));
    let mut cumulative = 0.0;
    let mut conservation = vec![(0.0, vec![0.0])];
    let trace = coupled_advance(&mesh, &flux, &pen, &path, &initial, &MovingAccuracy::inflow, t_end, dt, 0, &mut |rec| {
        cumulative += rec.influx;
        conservation.push((rec.t_end, vec![cumulative - (rec.total_mass - mass0)]));
    })
    .unwrap();
    let xg = path.position(t_end);
    let norms = vec![trace_norms(&mesh, &basis_s, &trace, xg, &|side, x| {
        MovingAccuracy::exact(side, x, t_end)
    })];
    RunReport {
        n,
        h: mesh.h(),
        degree: 1,
        norms,
        conservation,
        energy: Vec::new(),
        mass_condition: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Locally implicit run for the oscillating-interface conservation problem.
pub fn run_coupled_conservation(n: usize, t_end: f64) -> RunReport {
    let start = Instant::now();
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let flux = FluxModel::scalar(MovingConservation::A.0, MovingConservation::A.1);
    let pen = PenaltyConfig::new(1, 0.0, -1.0, 0.25, 0.75);
    let path = InterfacePath::Sinusoidal {
        x0: MovingConservation::X_GAMMA0,
        amplitude: MovingConservation::amplitude(),
    };
    let dt = mesh.h() / 12.0;
    let mut cumulative = 0.0;
    let mut conservation = vec![(0.0, vec![0.0])];
    let _ = coupled_advance(
        &mesh,
        &flux,
        &pen,
        &path,
        &|_s, _x| 0.0,
        &MovingConservation::inflow,
        t_end,
        dt,
        0,
        &mut |rec| {
            cumulative += rec.influx;
            conservation.push((rec.t_end, vec![cumulative - rec.total_mass]));
        },
    )
    .unwrap();
    RunReport {
        n,
        h: mesh.h(),
        degree: 1,
        norms: Vec::new(),
        conservation,
        energy: Vec::new(),
        mass_condition: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// 2D convergence run against the plane-wave solution.
pub fn run_twod_convergence(nx: usize, r: usize, lambda: (f64, f64)) -> RunReport {
    let start = Instant::now();
    let mesh = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], nx, nx).unwrap();
    let line = LineInterface::diagonal(TwodConvergence::C0);
    let (t1, t2) = classify_2d(&mesh, &line).unwrap();
    let pen = PenaltyConfig::new(r, lambda.0, lambda.1, 0.25, 0.75);
    let velocities = [TwodConvergence::A1, TwodConvergence::A2];
    let ops = DgOperators2D::assemble(&mesh, (&t1, &t2), r, &pen, velocities, &line, BoundarySpec2D::standard())
        .unwrap();
    let u0 = project_initial_2d(&mesh, (&t1, &t2), &ops, r, &|side, x, y| {
        TwodConvergence::exact(side, x, y, 0.0)
    });
    let sys = System2D {
        ops: &ops,
        boundary_data: BoundaryField2D {
            g: Arc::new(|x, y, t| TwodConvergence::exact(0, x, y, t)),
            gt: Some(Arc::new(|x, y, t| TwodConvergence::exact_dt(0, x, y, t))),
            gtt: Some(Arc::new(|x, y, t| TwodConvergence::exact_dtt(0, x, y, t))),
        },
    };
    let cell = 2.0 / nx as f64;
    let max_speed = velocities
        .iter()
        .map(|a| (a[0] * a[0] + a[1] * a[1]).sqrt())
        .fold(0.0, f64::max);
    let dt = 0.5 * cell / ((2 * r + 1) as f64 * max_speed);
    let t_end = 1.0;
    let mass0 = ops.total_mass(&u0);
    let mut cumulative = 0.0;
    let mut conservation = vec![(0.0, vec![0.0])];
    let u = integrate(RkScheme::TvdRk3, &sys, u0, 0.0, t_end, dt, &mut |_k, t, u, record| {
        cumulative += record[0];
        conservation.push((t, vec![cumulative - (ops.total_mass(u) - mass0)]));
    });
    let norms = vec![twod_norms(&mesh, (&t1, &t2), &ops, &u, r, &|side, x, y| {
        TwodConvergence::exact(side, x, y, t_end)
    })];
    RunReport {
        n: nx,
        h: mesh.h,
        degree: r,
        norms,
        conservation,
        energy: Vec::new(),
        mass_condition: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// 2D conservation run with the circular indicator crossing the interface.
pub fn run_twod_conservation(nx: usize, lambda: (f64, f64)) -> RunReport {
    let start = Instant::now();
    let r = 1;
    let mesh = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], nx, nx).unwrap();
    let line = LineInterface::diagonal(TwodConservation::C0);
    let (t1, t2) = classify_2d(&mesh, &line).unwrap();
    let pen = PenaltyConfig::new(r, lambda.0, lambda.1, 0.25, 0.75);
    let velocities = [TwodConservation::A1, TwodConservation::A2];
    let ops = DgOperators2D::assemble(&mesh, (&t1, &t2), r, &pen, velocities, &line, BoundarySpec2D::standard())
        .unwrap();
    let u0 = project_initial_2d(&mesh, (&t1, &t2), &ops, r, &|_side, x, y| TwodConservation::initial(x, y));
    let sys = System2D { ops: &ops, boundary_data: BoundaryField2D::zero() };
    let cell = 2.0 / nx as f64;
    let max_speed = velocities
        .iter()
        .map(|a| (a[0] * a[0] + a[1] * a[1]).sqrt())
        .fold(0.0, f64::max);
    let dt = 0.5 * cell / ((2 * r + 1) as f64 * max_speed);
    let mass0 = ops.total_mass(&u0);
    let mut cumulative = 0.0;
    let mut conservation = vec![(0.0, vec![0.0])];
    let _u = integrate(RkScheme::TvdRk3, &sys, u0, 0.0, TwodConservation::T_END, dt, &mut |_k, t, u, record| {
        cumulative += record[0];
        conservation.push((t, vec![cumulative - (ops.total_mass(u) - mass0)]));
    });
    RunReport {
        n: nx,
        h: mesh.h,
        degree: r,
        norms: Vec::new(),
        conservation,
        energy: Vec::new(),
        mass_condition: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Stabilized 2D projection of initial data.
pub fn project_initial_2d(
    mesh: &crate::geometry2d::TriMesh,
    topos: (&crate::geometry2d::ActiveTopology2D, &crate::geometry2d::ActiveTopology2D),
    ops: &DgOperators2D,
    degree: usize,
    f: &dyn Fn(usize, f64, f64) -> f64,
) -> Vec<f64> {
    let mut rhs = vec![0.0; ops.n_dofs()];
    for topo in [topos.0, topos.1] {
        for &t in &topo.tris {
            match &topo.cut[t] {
                None => {
                    let rule = crate::basis::triangle_rule(degree + 3, mesh.tri_vertices(t)).unwrap();
                    for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                        let v = f(topo.side, p[0], p[1]);
                        if v != 0.0 {
                            let phi = ops.basis_eval(t, *p);
                            for (m, ph) in phi.iter().enumerate() {
                                rhs[ops.dof_map.global(topo.side, t, m)] += w * v * ph;
                            }
                        }
                    }
                }
                Some(cut) => {
                    let rule = crate::basis::cut_cell_rule_polygon(degree + 1, &cut.polygon).unwrap();
                    for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                        let v = f(topo.side, p[0], p[1]);
                        if v != 0.0 {
                            let phi = ops.basis_eval(t, *p);
                            for (m, ph) in phi.iter().enumerate() {
                                rhs[ops.dof_map.global(topo.side, t, m)] += w * v * ph;
                            }
                        }
                    }
                }
            }
        }
    }
    ops.mass_solve(&mut rhs);
    rhs
}

/// Convergence table rows: observed order from consecutive L2 errors.
#[derive(Clone, Debug)]
pub struct ConvRow {
    pub report: RunReport,
    pub order_l2: Option<f64>,
}

pub fn convergence_table(reports: Vec<RunReport>) -> Vec<ConvRow> {
    let mut rows: Vec<ConvRow> = Vec::with_capacity(reports.len());
    for (k, report) in reports.into_iter().enumerate() {
        let order = if k > 0 {
            let prev: &RunReport = &rows[k - 1].report;
            let (e0, e1) = (prev.norms[0].l2, report.norms[0].l2);
            Some((e0 / e1).log2() / ((report.n as f64) / (prev.n as f64)).log2())
        } else {
            None
        };
        rows.push(ConvRow { report, order_l2: order });
    }
    rows
}

/// Least-squares slope of log2(error) against log2(1/N) over the last rows.
pub fn ls_order(rows: &[ConvRow], last: usize) -> f64 {
    let take = rows.len().min(last);
    let pts: Vec<(f64, f64)> = rows[rows.len() - take..]
        .iter()
        .map(|r| ((r.report.n as f64).log2(), (r.report.norms[0].l2).log2()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    -(n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// One row of the cut-fraction sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub alpha: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub cond: f64,
}

/// Errors and mass conditioning across cut fractions (parallel over α).
pub fn sweep_alpha(n: usize, r: usize, samples: usize) -> Vec<SweepRow> {
    let alphas: Vec<f64> = (0..samples).map(|k| k as f64 / (samples - 1).max(1) as f64).collect();
    parallel_map(alphas, |&alpha| {
        let rep = run_cut_fraction(n, r, alpha);
        SweepRow {
            alpha,
            l1: rep.norms[0].l1,
            l2: rep.norms[0].l2,
            linf: rep.norms[0].linf,
            cond: rep.mass_condition.unwrap(),
        }
    })
}

/// Conditioning-only sweep (no time stepping).
pub fn sweep_alpha_condition(n: usize, r: usize, samples: usize, gamma_mass: f64) -> Vec<(f64, f64)> {
    let alphas: Vec<f64> = (0..samples).map(|k| k as f64 / (samples - 1).max(1) as f64).collect();
    parallel_map(alphas, |&alpha| (alpha, mass_condition_at(n, r, alpha, gamma_mass)))
}

/// One row of the stability region map.
#[derive(Clone, Debug)]
pub struct RegionRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub feasible: bool,
    pub eta_lo: f64,
    pub eta_hi: f64,
}

/// Feasible-η map over a (λ1, λ2) grid for fixed speeds.
pub fn region_map(a1: f64, a2: f64, grid: usize) -> Vec<RegionRow> {
    let mut rows = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let l1 = -1.0 + 2.0 * i as f64 / (grid - 1) as f64;
        for j in 0..grid {
            let l2 = -2.0 + 2.5 * j as f64 / (grid - 1) as f64;
            let conservative = (l2 - l1 + 1.0).abs() < 1e-14;
            let iv = feasible_eta(a1, a2, l1, l2, conservative);
            rows.push(RegionRow {
                lambda1: l1,
                lambda2: l2,
                feasible: iv.is_some(),
                eta_lo: iv.map(|v| v.lo).unwrap_or(0.0),
                eta_hi: iv.map(|v| v.hi).unwrap_or(0.0),
            });
        }
    }
    rows
}

/// Initial trace mass of the moving-interface problems (used by callers to
/// complete the conservation ledger).
pub fn initial_trace_mass(
    mesh: &BackgroundMesh1D,
    basis: &IntervalBasis,
    path: &InterfacePath,
    dt: f64,
    f: &dyn Fn(Side, f64) -> f64,
) -> (TraceField, f64) {
    let first = slab_topology(mesh, path, 0.0, dt, &[]).unwrap();
    let trace = project_trace(mesh, basis, first.active_1.clone(), first.active_2.clone(), f);
    let m = trace_total_mass(mesh, basis, &trace, path.position(0.0));
    (trace, m)
}
