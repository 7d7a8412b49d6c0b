//! Locally implicit scheme: space-time slabs confined to the interface
//! neighbourhood, explicit second-order Runge-Kutta DG in the uncut regions,
//! and conservative flux matching at the two internal coupling edges.
//!
//! Per slab the update order is Ω_{1,E} (explicit), then the slab on Ω_l with
//! its left influx frozen to the trapezoid of the explicit stage fluxes, then
//! Ω_{2,E} (explicit) fed by the slab traces at the right coupling edge. The
//! trapezoid pairing makes the edge transfers cancel exactly in the global
//! mass balance.

use crate::assembly1d::{FluxModel, PenaltyConfig, UniformElementKernels};
use crate::basis::IntervalBasis;
use crate::geometry1d::{
    classify, slab_topology, BackgroundMesh1D, InterfacePath, Side, SlabTopology,
};
use crate::linalg::{CsrMatrix, Triplets};
use crate::spacetime::{
    assemble_slab, solve_slab, project_trace, SlabBc, SpaceTimeError, TimeQuadrature, TraceField,
    Formulation,
};
use std::ops::Range;

#[derive(Debug, thiserror::Error)]
pub enum CoupledError {
    #[error(transparent)]
    SpaceTime(#[from] SpaceTimeError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry1d::GeometryError),
    #[error("sign condition violated: a_i - x_Γ' must stay positive (t = {t})")]
    SignCondition { t: f64 },
    #[error("interface region touches the domain boundary")]
    RegionAtBoundary,
}

/// Partition of the background elements into the interface region and the
/// two explicit far-field regions.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainPartition {
    pub omega_l: Range<usize>,
    pub omega_1e: Range<usize>,
    pub omega_2e: Range<usize>,
    /// Edge between Ω_{1,E} and Ω_l.
    pub e1: usize,
    /// Edge between Ω_l and Ω_{2,E}.
    pub e2: usize,
}

impl DomainPartition {
    /// Minimal region: elements having an edge in the slab face sets; padding
    /// widens it symmetrically by whole elements.
    pub fn from_slab(topo: &SlabTopology, n_elements: usize, pad: usize) -> Result<Self, CoupledError> {
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        for &f in topo.stabilized_faces_1.iter().chain(&topo.stabilized_faces_2) {
            lo = lo.min(f - 1);
            hi = hi.max(f + 1);
        }
        if lo == usize::MAX {
            // No stabilized faces (interface on a node for the whole slab):
            // fall back to the swept neighbourhood.
            lo = topo.swept_elements.start.saturating_sub(1);
            hi = (topo.swept_elements.end + 1).min(n_elements);
        }
        let lo = lo.saturating_sub(pad);
        let hi = (hi + pad).min(n_elements);
        if lo == 0 || hi == n_elements {
            return Err(CoupledError::RegionAtBoundary);
        }
        Ok(Self {
            omega_l: lo..hi,
            omega_1e: 0..lo,
            omega_2e: hi..n_elements,
            e1: lo,
            e2: hi,
        })
    }
}

/// Boundary treatment of one end of an explicit region.
#[derive(Clone, Copy, Debug)]
pub enum RegionBc {
    /// Upwind insertion of ghost data (physical inflow boundary).
    InflowGhost,
    /// Flux from the region's own trace (outflow or downstream coupling edge).
    OwnTrace,
    /// Single-valued flux value injected per stage (upstream coupling edge).
    PrescribedFlux,
}

/// Standard uncut DG operator on a contiguous element range: identity mass
/// (orthonormal basis), Lax-Friedrichs interior fluxes, configurable ends.
pub struct RegionOps {
    pub range: Range<usize>,
    pub n_modes: usize,
    pub a: f64,
    spatial: CsrMatrix,
    /// rhs += ghost_col * g at the left end (InflowGhost).
    ghost_col: Vec<f64>,
    /// rhs += inj_left * F̂ at the left end (PrescribedFlux).
    inj_left: Vec<f64>,
    pub bc: [RegionBc; 2],
    trace_left: Vec<f64>,
    trace_right: Vec<f64>,
    h: f64,
}

impl RegionOps {
    pub fn assemble(
        mesh: &BackgroundMesh1D,
        basis: &IntervalBasis,
        a: f64,
        lam: f64,
        range: Range<usize>,
        bc: [RegionBc; 2],
    ) -> Self {
        assert!(!range.is_empty());
        let kernels = UniformElementKernels::new(basis, mesh.h());
        let nm = basis.dof_count();
        let n = range.len() * nm;
        let dof = |elem: usize, mode: usize| (elem - range.start) * nm + mode;
        let mut t = Triplets::new(n, n);
        // Volume transport.
        for elem in range.clone() {
            for mv in 0..nm {
                for mu in 0..nm {
                    let w = kernels.adv_full[(mv, mu)];
                    if w != 0.0 {
                        t.push(dof(elem, mv), dof(elem, mu), -a * w);
                    }
                }
            }
        }
        // Interior edges: F̂ = p u^- + q u^+.
        let p = 0.5 * (a + lam);
        let q = 0.5 * (a - lam);
        let tau_l = &kernels.at_left[0];
        let tau_r = &kernels.at_right[0];
        for e in range.start + 1..range.end {
            let (el, er) = (e - 1, e);
            for mv in 0..nm {
                for mu in 0..nm {
                    t.push(dof(er, mv), dof(el, mu), -p * tau_l[mv] * tau_r[mu]);
                    t.push(dof(er, mv), dof(er, mu), -q * tau_l[mv] * tau_l[mu]);
                    t.push(dof(el, mv), dof(el, mu), p * tau_r[mv] * tau_r[mu]);
                    t.push(dof(el, mv), dof(er, mu), q * tau_r[mv] * tau_l[mu]);
                }
            }
        }
        // Left end.
        let mut ghost_col = vec![0.0; n];
        let mut inj_left = vec![0.0; n];
        match bc[0] {
            RegionBc::InflowGhost => {
                for mv in 0..nm {
                    for mu in 0..nm {
                        t.push(dof(range.start, mv), dof(range.start, mu), -q * tau_l[mv] * tau_l[mu]);
                    }
                    // a_h ghost coefficient -p τ; rhs of u̇ gets +p τ g.
                    ghost_col[dof(range.start, mv)] = p * tau_l[mv];
                }
            }
            RegionBc::PrescribedFlux => {
                for mv in 0..nm {
                    inj_left[dof(range.start, mv)] = tau_l[mv];
                }
            }
            RegionBc::OwnTrace => {
                for mv in 0..nm {
                    for mu in 0..nm {
                        t.push(dof(range.start, mv), dof(range.start, mu), -a * tau_l[mv] * tau_l[mu]);
                    }
                }
            }
        }
        // Right end: own-trace flux (+F̂ v^-).
        match bc[1] {
            RegionBc::OwnTrace => {
                let last = range.end - 1;
                for mv in 0..nm {
                    for mu in 0..nm {
                        t.push(dof(last, mv), dof(last, mu), a * tau_r[mv] * tau_r[mu]);
                    }
                }
            }
            _ => unreachable!("right region end is always an own-trace flux here"),
        }
        Self {
            range,
            n_modes: nm,
            a,
            spatial: t.into_csr(),
            ghost_col,
            inj_left,
            bc,
            trace_left: tau_l.clone(),
            trace_right: tau_r.clone(),
            h: mesh.h(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.range.len() * self.n_modes
    }

    pub fn trace(&self, u: &[f64], end: crate::assembly1d::End) -> f64 {
        match end {
            crate::assembly1d::End::Left => self
                .trace_left
                .iter()
                .enumerate()
                .map(|(m, t)| t * u[m])
                .sum(),
            crate::assembly1d::End::Right => {
                let base = (self.range.len() - 1) * self.n_modes;
                self.trace_right.iter().enumerate().map(|(m, t)| t * u[base + m]).sum()
            }
        }
    }

    /// L(u) = -A u + boundary data, identity mass.
    fn rate(&self, u: &[f64], left_data: f64, out: &mut [f64]) {
        self.spatial.mul_vec_into(u, out);
        for v in out.iter_mut() {
            *v = -*v;
        }
        match self.bc[0] {
            RegionBc::InflowGhost => {
                for (o, c) in out.iter_mut().zip(&self.ghost_col) {
                    *o += c * left_data;
                }
            }
            RegionBc::PrescribedFlux => {
                for (o, c) in out.iter_mut().zip(&self.inj_left) {
                    *o += c * left_data;
                }
            }
            RegionBc::OwnTrace => {}
        }
    }

    /// Total physical mass: orthonormal basis integrates the constant mode.
    pub fn total_mass(&self, u: &[f64]) -> f64 {
        let sqrt_h = self.h.sqrt();
        (0..self.range.len()).map(|k| sqrt_h * u[k * self.n_modes]).sum()
    }
}

/// Result of the two-stage explicit step with both stages retained for flux
/// matching.
pub struct Rk2Stages {
    pub u_stage1: Vec<f64>,
    pub u_next: Vec<f64>,
}

/// Two-stage second-order update; `left_data` carries the per-stage boundary
/// datum (ghost value or prescribed flux depending on the region's left bc).
pub fn rk2_explicit_step(region: &RegionOps, u: &[f64], dt: f64, left_data: [f64; 2]) -> Rk2Stages {
    let n = region.n_dofs();
    let mut l0 = vec![0.0; n];
    region.rate(u, left_data[0], &mut l0);
    let u1: Vec<f64> = u.iter().zip(&l0).map(|(a, b)| a + dt * b).collect();
    let mut l1 = vec![0.0; n];
    region.rate(&u1, left_data[1], &mut l1);
    let u_next: Vec<f64> = (0..n)
        .map(|i| 0.5 * (u[i] + u1[i]) + 0.5 * dt * l1[i])
        .collect();
    Rk2Stages { u_stage1: u1, u_next }
}

/// Per-step record of the coupled march.
#[derive(Clone, Debug)]
pub struct CoupledStepRecord {
    pub t_end: f64,
    /// Trapezoid of the physical-boundary fluxes (influx at x_L minus
    /// outflux at x_R).
    pub influx: f64,
    pub total_mass: f64,
    pub partition: DomainPartition,
}

/// March the locally implicit scheme with r = (1,1) and trapezoid coupling.
#[allow(clippy::too_many_arguments)]
pub fn coupled_advance(
    mesh: &BackgroundMesh1D,
    flux: &FluxModel,
    penalties: &PenaltyConfig,
    path: &InterfacePath,
    initial: &dyn Fn(Side, f64) -> f64,
    inflow: &dyn Fn(f64) -> f64,
    t_end: f64,
    dt_target: f64,
    pad: usize,
    observer: &mut dyn FnMut(&CoupledStepRecord),
) -> Result<TraceField, CoupledError> {
    assert_eq!(flux.n_comp(), 1);
    let a1 = flux.matrix(Side::One)[(0, 0)];
    let a2 = flux.matrix(Side::Two)[(0, 0)];
    let basis_s = IntervalBasis::new(1);
    let basis_t = IntervalBasis::new(1);
    let n_slabs = (t_end / dt_target - 1e-12).ceil().max(1.0) as usize;
    let dt = t_end / n_slabs as f64;
    let n = mesh.n_elements;
    let nm = basis_s.dof_count();

    let first = slab_topology(mesh, path, 0.0, dt, &[])?;
    let mut state = project_trace(mesh, &basis_s, first.active_1.clone(), first.active_2.clone(), initial);

    for k in 0..n_slabs {
        let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
        for &tq in &[t0, t1] {
            if a1 - path.velocity(tq) <= 0.0 || a2 - path.velocity(tq) <= 0.0 {
                return Err(CoupledError::SignCondition { t: tq });
            }
        }
        let topo = slab_topology(mesh, path, t0, t1, &[])?;
        let part = DomainPartition::from_slab(&topo, n, pad)?;

        // Region 1: explicit step with exact stage data at the inflow.
        let r1 = RegionOps::assemble(
            mesh,
            &basis_s,
            a1,
            flux.speed(Side::One),
            part.omega_1e.clone(),
            [RegionBc::InflowGhost, RegionBc::OwnTrace],
        );
        let u1_old: Vec<f64> = part
            .omega_1e
            .clone()
            .flat_map(|e| state.coeffs(Side::One, e).to_vec())
            .collect();
        let stages1 = rk2_explicit_step(&r1, &u1_old, dt, [inflow(t0), inflow(t1)]);
        let f_e1 = [
            a1 * r1.trace(&u1_old, crate::assembly1d::End::Right),
            a1 * r1.trace(&stages1.u_stage1, crate::assembly1d::End::Right),
        ];

        // Implicit slab on Ω_l with the left influx frozen.
        let slab_topo = SlabTopology {
            t_start: t0,
            t_end: t1,
            active_1: part.omega_l.start..topo.active_1.end.min(part.omega_l.end),
            active_2: topo.active_2.start.max(part.omega_l.start)..part.omega_l.end,
            swept_elements: topo.swept_elements.clone(),
            stabilized_faces_1: topo.stabilized_faces_1.clone(),
            stabilized_faces_2: topo.stabilized_faces_2.clone(),
        };
        let system = assemble_slab(
            mesh,
            &basis_s,
            &basis_t,
            &slab_topo,
            TimeQuadrature::Trapezoid,
            Formulation::IntegratedByParts,
            flux,
            penalties,
            path,
            &state,
            &SlabBc::PrescribedFlux(&f_e1),
            &SlabBc::Outflow,
        )?;
        let sol = solve_slab(&system)?;
        let x_e2 = mesh.nodes[part.e2];
        let f_e2 = [
            a2 * sol.eval(mesh, &basis_s, &basis_t, Side::Two, x_e2, t0),
            a2 * sol.eval(mesh, &basis_s, &basis_t, Side::Two, x_e2, t1),
        ];

        // Region 2: explicit step fed by the slab traces at e2.
        let r2 = RegionOps::assemble(
            mesh,
            &basis_s,
            a2,
            flux.speed(Side::Two),
            part.omega_2e.clone(),
            [RegionBc::PrescribedFlux, RegionBc::OwnTrace],
        );
        let u2_old: Vec<f64> = part
            .omega_2e
            .clone()
            .flat_map(|e| state.coeffs(Side::Two, e).to_vec())
            .collect();
        let stages2 = rk2_explicit_step(&r2, &u2_old, dt, f_e2);
        let f_out = [
            a2 * r2.trace(&u2_old, crate::assembly1d::End::Right),
            a2 * r2.trace(&stages2.u_stage1, crate::assembly1d::End::Right),
        ];

        // Merge the three pieces into the new global state.
        let slab_trace = sol.end_trace(&basis_t);
        let mut new_state = TraceField::zero(nm, 0..slab_trace.range1.end, slab_trace.range2.start..n);
        for e in part.omega_1e.clone() {
            new_state
                .coeffs_mut(Side::One, e)
                .copy_from_slice(&stages1.u_next[(e - part.omega_1e.start) * nm..][..nm]);
        }
        for e in slab_trace.range1.clone() {
            new_state.coeffs_mut(Side::One, e).copy_from_slice(slab_trace.coeffs(Side::One, e));
        }
        for e in slab_trace.range2.clone() {
            new_state.coeffs_mut(Side::Two, e).copy_from_slice(slab_trace.coeffs(Side::Two, e));
        }
        for e in part.omega_2e.clone() {
            new_state
                .coeffs_mut(Side::Two, e)
                .copy_from_slice(&stages2.u_next[(e - part.omega_2e.start) * nm..][..nm]);
        }

        // Global bookkeeping: physical-boundary trapezoid and total mass.
        let influx = 0.5 * dt * (a1 * inflow(t0) + a1 * inflow(t1)) - 0.5 * dt * (f_out[0] + f_out[1]);
        let mut total = r1.total_mass(&stages1.u_next) + r2.total_mass(&stages2.u_next);
        {
            let (i1, i2) = classify(mesh, path.position(t1))?;
            for inst in [&i1, &i2] {
                for elem in inst.elements.clone() {
                    if !part.omega_l.contains(&elem) {
                        continue;
                    }
                    let sub = inst.physical_extent(mesh, elem);
                    if sub[1] - sub[0] <= 0.0 {
                        continue;
                    }
                    let rule = crate::basis::gauss_rule(nm, sub).unwrap();
                    let full = mesh.element_extent(elem);
                    let coeffs = new_state.coeffs(inst.side, elem);
                    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                        let phi = basis_s.eval(full, x, 0).unwrap();
                        total += w * coeffs.iter().zip(&phi).map(|(c, p)| c * p).sum::<f64>();
                    }
                }
            }
        }
        observer(&CoupledStepRecord { t_end: t1, influx, total_mass: total, partition: part });
        state = new_state;
    }
    Ok(state)
}
