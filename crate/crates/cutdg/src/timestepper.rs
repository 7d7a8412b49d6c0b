//! Explicit SSP Runge-Kutta integrators with staged inflow data and exact
//! per-step boundary-flux bookkeeping.
//!
//! Each stage evaluation also records the net boundary influx at that stage;
//! records are combined with the same coefficients as the stage states, so
//! the accumulated record equals the discrete change of total mass whenever
//! the interface treatment is conservative. This is what the conservation
//! error diagnostics difference against.

use crate::assembly1d::{BcKind, DgOperators, End, FluxModel};
use std::sync::Arc;

/// How ghost data is evaluated at a Runge-Kutta stage.
#[derive(Clone, Copy, Debug)]
pub enum GhostStage {
    /// g(t0) + c1 g'(t0) + c2 g''(t0).
    Taylor { t0: f64, c1: f64, c2: f64 },
    /// g at the stage abscissa.
    Exact { t: f64 },
}

type DataFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Boundary datum with its time derivatives; closed forms when available,
/// central differences otherwise.
#[derive(Clone)]
pub struct BoundaryDataLadder {
    g: DataFn,
    dg: Option<DataFn>,
    d2g: Option<DataFn>,
    n_comp: usize,
}

const FD_STEP: f64 = 1e-5;

impl BoundaryDataLadder {
    pub fn new(n_comp: usize, g: DataFn, dg: Option<DataFn>, d2g: Option<DataFn>) -> Self {
        Self { g, dg, d2g, n_comp }
    }

    pub fn zero(n_comp: usize) -> Self {
        Self {
            g: Arc::new(move |_| vec![0.0; n_comp]),
            dg: None,
            d2g: None,
            n_comp,
        }
    }

    pub fn scalar(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dg: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            g: Arc::new(move |t| vec![g(t)]),
            dg: Some(Arc::new(move |t| vec![dg(t)])),
            d2g: Some(Arc::new(move |t| vec![d2g(t)])),
            n_comp: 1,
        }
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        (self.g)(t)
    }

    fn d1(&self, t: f64) -> Vec<f64> {
        match &self.dg {
            Some(f) => f(t),
            None => {
                let up = (self.g)(t + FD_STEP);
                let dn = (self.g)(t - FD_STEP);
                up.iter().zip(&dn).map(|(a, b)| (a - b) / (2.0 * FD_STEP)).collect()
            }
        }
    }

    fn d2(&self, t: f64) -> Vec<f64> {
        match &self.d2g {
            Some(f) => f(t),
            None => {
                let up = (self.g)(t + FD_STEP);
                let mid = (self.g)(t);
                let dn = (self.g)(t - FD_STEP);
                up.iter()
                    .zip(&mid)
                    .zip(&dn)
                    .map(|((a, b), c)| (a - 2.0 * b + c) / (FD_STEP * FD_STEP))
                    .collect()
            }
        }
    }

    pub fn eval(&self, stage: &GhostStage) -> Vec<f64> {
        match *stage {
            GhostStage::Exact { t } => self.value(t),
            GhostStage::Taylor { t0, c1, c2 } => {
                let mut v = self.value(t0);
                if c1 != 0.0 {
                    for (a, b) in v.iter_mut().zip(self.d1(t0)) {
                        *a += c1 * b;
                    }
                }
                if c2 != 0.0 {
                    for (a, b) in v.iter_mut().zip(self.d2(t0)) {
                        *a += c2 * b;
                    }
                }
                v
            }
        }
    }

    pub fn n_comp(&self) -> usize {
        self.n_comp
    }
}

/// Problem seen by the integrators: mass-solved right-hand side plus the
/// boundary influx snapshot used for conservation records.
pub trait SemiDiscreteSystem {
    fn n_dofs(&self) -> usize;
    fn n_comp(&self) -> usize;
    /// out = -spatial u + inflow(stage), before the mass solve.
    fn rhs(&self, u: &[f64], stage: &GhostStage, out: &mut [f64]);
    fn mass_solve_in_place(&self, v: &mut [f64]);
    /// Net boundary influx (left flux minus right flux) per component.
    fn boundary_influx(&self, u: &[f64], stage: &GhostStage) -> Vec<f64>;
}

/// Stationary-topology 1D system.
pub struct StationarySystem<'a> {
    pub ops: &'a DgOperators,
    pub data_left: BoundaryDataLadder,
    pub data_right: BoundaryDataLadder,
}

impl SemiDiscreteSystem for StationarySystem<'_> {
    fn n_dofs(&self) -> usize {
        self.ops.n_dofs()
    }

    fn n_comp(&self) -> usize {
        self.ops.dof_map.n_comp
    }

    fn rhs(&self, u: &[f64], stage: &GhostStage, out: &mut [f64]) {
        self.ops.spatial.mul_vec_into(u, out);
        for v in out.iter_mut() {
            *v = -*v;
        }
        if let Some(b) = &self.ops.inflow_left {
            let g = self.data_left.eval(stage);
            for (i, o) in out.iter_mut().enumerate() {
                for (c, gc) in g.iter().enumerate() {
                    *o += b[(i, c)] * gc;
                }
            }
        }
        if let Some(b) = &self.ops.inflow_right {
            let g = self.data_right.eval(stage);
            for (i, o) in out.iter_mut().enumerate() {
                for (c, gc) in g.iter().enumerate() {
                    *o += b[(i, c)] * gc;
                }
            }
        }
    }

    fn mass_solve_in_place(&self, v: &mut [f64]) {
        self.ops.mass_solve_in_place(v);
    }

    fn boundary_influx(&self, u: &[f64], stage: &GhostStage) -> Vec<f64> {
        let gl = (self.ops.bc[0] == BcKind::Inflow).then(|| self.data_left.eval(stage));
        let gr = (self.ops.bc[1] == BcKind::Inflow).then(|| self.data_right.eval(stage));
        let fl = self.ops.boundary_flux(End::Left, u, gl.as_deref());
        let fr = self.ops.boundary_flux(End::Right, u, gr.as_deref());
        fl.iter().zip(&fr).map(|(l, r)| l - r).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkScheme {
    /// Three-stage third-order TVD scheme with Taylor-expanded inflow data.
    TvdRk3,
    /// Five-stage fourth-order SSP scheme; inflow data evaluated at the
    /// stage abscissae.
    SspRk54,
    /// Two-stage second-order (Heun) scheme.
    Rk2,
}

impl RkScheme {
    pub fn stage_count(self) -> usize {
        match self {
            RkScheme::TvdRk3 => 3,
            RkScheme::SspRk54 => 5,
            RkScheme::Rk2 => 2,
        }
    }

    /// Scheme used at spatial degree r in the bundled experiments.
    pub fn for_degree(r: usize) -> Self {
        if r >= 3 {
            RkScheme::SspRk54
        } else {
            RkScheme::TvdRk3
        }
    }
}

/// Tabulated Courant numbers per polynomial degree.
pub fn courant_number(r: usize) -> Option<f64> {
    match r {
        1 => Some(0.3),
        2 => Some(0.2),
        3 => Some(0.1),
        _ => None,
    }
}

/// Time step Δt = C h / max|F'|, with the tabulated Courant number.
pub fn cfl_dt(h: f64, flux: &FluxModel, r: usize) -> f64 {
    let c = courant_number(r).expect("tabulated Courant numbers cover r = 1..=3");
    cfl_dt_custom(h, flux, c)
}

pub fn cfl_dt_custom(h: f64, flux: &FluxModel, c: f64) -> f64 {
    c * h / flux.max_speed()
}

struct Stage {
    u: Vec<f64>,
    /// Accumulated boundary-influx record per component.
    record: Vec<f64>,
}

fn eval<S: SemiDiscreteSystem>(sys: &S, st: &Stage, stage: &GhostStage) -> (Vec<f64>, Vec<f64>) {
    let mut l = vec![0.0; st.u.len()];
    sys.rhs(&st.u, stage, &mut l);
    sys.mass_solve_in_place(&mut l);
    let f = sys.boundary_influx(&st.u, stage);
    (l, f)
}

fn combine(parts: &[(f64, &Stage)], l_parts: &[(f64, &Vec<f64>, &Vec<f64>)], n: usize, m: usize) -> Stage {
    let mut u = vec![0.0; n];
    let mut record = vec![0.0; m];
    for (c, s) in parts {
        for i in 0..n {
            u[i] += c * s.u[i];
        }
        for k in 0..m {
            record[k] += c * s.record[k];
        }
    }
    for (c, l, f) in l_parts {
        for i in 0..n {
            u[i] += c * l[i];
        }
        for k in 0..m {
            record[k] += c * f[k];
        }
    }
    Stage { u, record }
}

/// One step of the chosen scheme. Returns the state at t + dt and the
/// accumulated boundary-influx record of the step (already scaled by dt).
pub fn step<S: SemiDiscreteSystem>(
    scheme: RkScheme,
    sys: &S,
    u: &[f64],
    t: f64,
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = sys.n_dofs();
    let m = sys.n_comp();
    let y0 = Stage { u: u.to_vec(), record: vec![0.0; m] };
    match scheme {
        RkScheme::TvdRk3 => {
            let s0 = GhostStage::Taylor { t0: t, c1: 0.0, c2: 0.0 };
            let s1 = GhostStage::Taylor { t0: t, c1: dt, c2: 0.0 };
            let s2 = GhostStage::Taylor { t0: t, c1: 0.5 * dt, c2: 0.25 * dt * dt };
            let (l0, f0) = eval(sys, &y0, &s0);
            let y1 = combine(&[(1.0, &y0)], &[(dt, &l0, &f0)], n, m);
            let (l1, f1) = eval(sys, &y1, &s1);
            let y2 = combine(&[(0.75, &y0), (0.25, &y1)], &[(0.25 * dt, &l1, &f1)], n, m);
            let (l2, f2) = eval(sys, &y2, &s2);
            let y3 = combine(
                &[(1.0 / 3.0, &y0), (2.0 / 3.0, &y2)],
                &[(2.0 / 3.0 * dt, &l2, &f2)],
                n,
                m,
            );
            (y3.u, y3.record)
        }
        RkScheme::Rk2 => {
            let s0 = GhostStage::Exact { t };
            let s1 = GhostStage::Exact { t: t + dt };
            let (l0, f0) = eval(sys, &y0, &s0);
            let y1 = combine(&[(1.0, &y0)], &[(dt, &l0, &f0)], n, m);
            let (l1, f1) = eval(sys, &y1, &s1);
            let y2 = combine(&[(0.5, &y0), (0.5, &y1)], &[(0.5 * dt, &l1, &f1)], n, m);
            (y2.u, y2.record)
        }
        RkScheme::SspRk54 => {
            // Standard five-stage fourth-order SSP coefficient set.
            const B1: f64 = 0.391752226571890;
            const A31: f64 = 0.444370493651235;
            const A32: f64 = 0.555629506348765;
            const B2: f64 = 0.368410593050371;
            const A41: f64 = 0.620101851488403;
            const A43: f64 = 0.379898148511597;
            const B3: f64 = 0.251891774271694;
            const A51: f64 = 0.178079954393132;
            const A54: f64 = 0.821920045606868;
            const B4: f64 = 0.544974750228521;
            const W3: f64 = 0.517231671970585;
            const W4: f64 = 0.096059710526147;
            const WB4: f64 = 0.063692468666290;
            const W5: f64 = 0.386708617503269;
            const WB5: f64 = 0.226007483236906;
            let c2 = B1;
            let c3 = A32 * c2 + B2;
            let c4 = A43 * c3 + B3;
            let c5 = A54 * c4 + B4;
            let st = |c: f64| GhostStage::Exact { t: t + c * dt };

            let (l1, f1) = eval(sys, &y0, &st(0.0));
            let y2 = combine(&[(1.0, &y0)], &[(B1 * dt, &l1, &f1)], n, m);
            let (l2, f2) = eval(sys, &y2, &st(c2));
            let y3 = combine(&[(A31, &y0), (A32, &y2)], &[(B2 * dt, &l2, &f2)], n, m);
            let (l3, f3) = eval(sys, &y3, &st(c3));
            let y4 = combine(&[(A41, &y0), (A43, &y3)], &[(B3 * dt, &l3, &f3)], n, m);
            let (l4, f4) = eval(sys, &y4, &st(c4));
            let y5 = combine(&[(A51, &y0), (A54, &y4)], &[(B4 * dt, &l4, &f4)], n, m);
            let (l5, f5) = eval(sys, &y5, &st(c5));
            let out = combine(
                &[(W3, &y3), (W4, &y4), (W5, &y5)],
                &[(WB4 * dt, &l4, &f4), (WB5 * dt, &l5, &f5)],
                n,
                m,
            );
            (out.u, out.record)
        }
    }
}

/// Integrate from t0 to t_end with a uniform step no larger than dt_target.
/// The observer sees (step index, time after step, state, step influx record).
pub fn integrate<S: SemiDiscreteSystem>(
    scheme: RkScheme,
    sys: &S,
    u0: Vec<f64>,
    t0: f64,
    t_end: f64,
    dt_target: f64,
    observer: &mut dyn FnMut(usize, f64, &[f64], &[f64]),
) -> Vec<f64> {
    let n_steps = ((t_end - t0) / dt_target - 1e-12).ceil().max(1.0) as usize;
    let dt = (t_end - t0) / n_steps as f64;
    let mut u = u0;
    for k in 0..n_steps {
        let t = t0 + k as f64 * dt;
        let (next, record) = step(scheme, sys, &u, t, dt);
        u = next;
        observer(k, t + dt, &u, &record);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    /// u' = -a u (identity mass, no boundary terms).
    struct Decay {
        a: f64,
    }

    impl SemiDiscreteSystem for Decay {
        fn n_dofs(&self) -> usize {
            1
        }
        fn n_comp(&self) -> usize {
            1
        }
        fn rhs(&self, u: &[f64], _stage: &GhostStage, out: &mut [f64]) {
            out[0] = -self.a * u[0];
        }
        fn mass_solve_in_place(&self, _v: &mut [f64]) {}
        fn boundary_influx(&self, _u: &[f64], _stage: &GhostStage) -> Vec<f64> {
            vec![0.0]
        }
    }

    #[test]
    fn tvd_rk3_is_truncated_exponential_on_linear_problems() {
        let sys = Decay { a: 1.0 };
        let dt = 0.1;
        let (u, _) = step(RkScheme::TvdRk3, &sys, &[1.0], 0.0, dt);
        let z: f64 = -dt;
        let expect = 1.0 + z + z * z / 2.0 + z * z * z / 6.0;
        assert!((u[0] - expect).abs() < 1e-15, "{} vs {expect}", u[0]);
    }

    #[test]
    fn rk2_is_second_order_truncation() {
        let sys = Decay { a: 2.0 };
        let dt = 0.05;
        let (u, _) = step(RkScheme::Rk2, &sys, &[1.0], 0.0, dt);
        let z: f64 = -2.0 * dt;
        assert!((u[0] - (1.0 + z + z * z / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn ssp_rk54_matches_exponential_to_fourth_order() {
        let sys = Decay { a: 1.0 };
        for &dt in &[0.2, 0.1, 0.05] {
            let (u, _) = step(RkScheme::SspRk54, &sys, &[1.0], 0.0, dt);
            let z: f64 = -dt;
            let taylor4 = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
            assert!((u[0] - taylor4).abs() < 0.03 * dt.powi(5), "dt={dt}");
        }
    }

    #[test]
    fn zero_operator_keeps_state() {
        struct Zero;
        impl SemiDiscreteSystem for Zero {
            fn n_dofs(&self) -> usize {
                3
            }
            fn n_comp(&self) -> usize {
                1
            }
            fn rhs(&self, _u: &[f64], _s: &GhostStage, out: &mut [f64]) {
                out.fill(0.0);
            }
            fn mass_solve_in_place(&self, _v: &mut [f64]) {}
            fn boundary_influx(&self, _u: &[f64], _s: &GhostStage) -> Vec<f64> {
                vec![0.0]
            }
        }
        let u0 = vec![1.0, -2.0, 0.5];
        for scheme in [RkScheme::TvdRk3, RkScheme::Rk2, RkScheme::SspRk54] {
            let (u, _) = step(scheme, &Zero, &u0, 0.0, 0.3);
            // The five-stage coefficients sum to one only within rounding.
            for i in 0..3 {
                assert!((u[i] - u0[i]).abs() <= 4.0 * f64::EPSILON * u0[i].abs());
            }
        }
    }

    #[test]
    fn courant_table() {
        let flux = FluxModel::scalar(2.0, 1.0);
        assert!((cfl_dt(0.1, &flux, 1) - 0.015).abs() < 1e-16);
        assert!((cfl_dt(0.01, &flux, 3) - 5e-4).abs() < 1e-18);
        assert_eq!(courant_number(4), None);
    }

    #[test]
    fn ladder_staged_values() {
        let ladder = BoundaryDataLadder::scalar(
            |t| (2.0 * t).sin(),
            |t| 2.0 * (2.0 * t).cos(),
            |t| -4.0 * (2.0 * t).sin(),
        );
        let (t, dt) = (0.37, 0.01);
        let g = (2.0f64 * t).sin();
        let dg = 2.0 * (2.0f64 * t).cos();
        let d2g = -4.0 * (2.0f64 * t).sin();
        let v1 = ladder.eval(&GhostStage::Taylor { t0: t, c1: dt, c2: 0.0 })[0];
        assert!((v1 - (g + dt * dg)).abs() < 1e-15);
        let v2 = ladder.eval(&GhostStage::Taylor { t0: t, c1: 0.5 * dt, c2: 0.25 * dt * dt })[0];
        assert!((v2 - (g + 0.5 * dt * dg + 0.25 * dt * dt * d2g)).abs() < 1e-15);
    }

    #[test]
    fn ladder_finite_difference_fallback() {
        let ladder = BoundaryDataLadder::new(1, Arc::new(|t: f64| vec![(3.0 * t).sin()]), None, None);
        let v = ladder.eval(&GhostStage::Taylor { t0: 0.2, c1: 1.0, c2: 0.0 })[0];
        let exact = (0.6f64).sin() + 3.0 * (0.6f64).cos();
        assert!((v - exact).abs() < 1e-6);
    }

    #[test]
    fn local_error_order_tvd_rk3() {
        // Against a dense reference with dt/64 substeps, the one-step error of
        // the third-order scheme scales like dt^4.
        let sys = Decay { a: 1.3 };
        let err = |dt: f64| {
            let (coarse, _) = step(RkScheme::TvdRk3, &sys, &[1.0], 0.0, dt);
            let mut fine = vec![1.0];
            for k in 0..64 {
                let (f, _) = step(RkScheme::TvdRk3, &sys, &fine, k as f64 * dt / 64.0, dt / 64.0);
                fine = f;
            }
            (coarse[0] - fine[0]).abs()
        };
        let e1 = err(0.2);
        let e2 = err(0.1);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "observed one-step order {order}");
    }
}
