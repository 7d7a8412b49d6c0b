//! Assembly of the 2D stabilized scheme on cut triangle meshes: weighted
//! mass, spatial operator with Lax-Friedrichs edge fluxes along per-side
//! edge sub-segments, interface-line coupling and normal-derivative ghost
//! penalties.

use crate::assembly1d::PenaltyConfig;
use crate::basis::{cut_cell_rule_polygon, gauss_rule, triangle_rule, TriangleBasis};
use crate::geometry2d::{ActiveTopology2D, BoundaryTag, LineInterface, TriMesh};
use crate::linalg::{BandedLu, CsrMatrix, Triplets};
use crate::timestepper::{GhostStage, SemiDiscreteSystem};
use nalgebra::DMatrix;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum Assembly2DError {
    #[error("normal speed vanishes on side {side}")]
    ZeroNormalSpeed { side: usize },
    #[error("normal speeds have mixed signs across the interface")]
    MixedSigns,
    #[error("stabilized mass is singular")]
    SingularMass,
}

/// Inflow/outflow assignment per boundary tag.
#[derive(Clone, Copy, Debug)]
pub struct BoundarySpec2D {
    pub inflow: [BoundaryTag; 2],
}

impl BoundarySpec2D {
    pub fn standard() -> Self {
        Self { inflow: [BoundaryTag::XMin, BoundaryTag::YMin] }
    }

    pub fn is_inflow(&self, tag: BoundaryTag) -> bool {
        self.inflow.contains(&tag)
    }
}

/// Time-dependent boundary field with closed-form time derivatives.
#[derive(Clone)]
pub struct BoundaryField2D {
    pub g: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    pub gt: Option<Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>>,
    pub gtt: Option<Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>>,
}

impl BoundaryField2D {
    pub fn zero() -> Self {
        Self { g: Arc::new(|_, _, _| 0.0), gt: None, gtt: None }
    }

    fn eval_stage(&self, p: [f64; 2], stage: &GhostStage) -> f64 {
        const FD: f64 = 1e-5;
        match *stage {
            GhostStage::Exact { t } => (self.g)(p[0], p[1], t),
            GhostStage::Taylor { t0, c1, c2 } => {
                let mut v = (self.g)(p[0], p[1], t0);
                if c1 != 0.0 {
                    let d = match &self.gt {
                        Some(f) => f(p[0], p[1], t0),
                        None => ((self.g)(p[0], p[1], t0 + FD) - (self.g)(p[0], p[1], t0 - FD)) / (2.0 * FD),
                    };
                    v += c1 * d;
                }
                if c2 != 0.0 {
                    let d2 = match &self.gtt {
                        Some(f) => f(p[0], p[1], t0),
                        None => {
                            ((self.g)(p[0], p[1], t0 + FD) - 2.0 * (self.g)(p[0], p[1], t0)
                                + (self.g)(p[0], p[1], t0 - FD))
                                / (FD * FD)
                        }
                    };
                    v += c2 * d2;
                }
                v
            }
        }
    }
}

/// Global dof layout: side-1 active triangles then side 2.
#[derive(Clone, Debug)]
pub struct DofMap2D {
    pub n_modes: usize,
    /// Per side: triangle -> slot (dense maps).
    slots: [Vec<Option<u32>>; 2],
    counts: [usize; 2],
    /// Per side, slot -> triangle.
    pub tris: [Vec<usize>; 2],
}

impl DofMap2D {
    pub fn new(n_modes: usize, t1: &ActiveTopology2D, t2: &ActiveTopology2D, n_tris: usize) -> Self {
        let mut slots = [vec![None; n_tris], vec![None; n_tris]];
        for (side, topo) in [(0usize, t1), (1, t2)] {
            for (k, &t) in topo.tris.iter().enumerate() {
                slots[side][t] = Some(k as u32);
            }
        }
        Self {
            n_modes,
            counts: [t1.tris.len(), t2.tris.len()],
            slots,
            tris: [t1.tris.clone(), t2.tris.clone()],
        }
    }

    pub fn n_dofs(&self) -> usize {
        (self.counts[0] + self.counts[1]) * self.n_modes
    }

    #[inline]
    pub fn base(&self, side: usize, tri: usize) -> usize {
        let slot = self.slots[side][tri].expect("triangle active on this side") as usize;
        (if side == 0 { 0 } else { self.counts[0] } + slot) * self.n_modes
    }

    #[inline]
    pub fn global(&self, side: usize, tri: usize, mode: usize) -> usize {
        self.base(side, tri) + mode
    }

    pub fn side_of(&self, dof: usize) -> usize {
        if dof < self.counts[0] * self.n_modes {
            0
        } else {
            1
        }
    }

    pub fn tri_of(&self, dof: usize) -> usize {
        let slot = dof / self.n_modes;
        if slot < self.counts[0] {
            self.tris[0][slot]
        } else {
            self.tris[1][slot - self.counts[0]]
        }
    }
}

/// Block solver for the 2D stabilized mass: identity blocks away from the
/// interface strip and a band-reordered factorization of the strip
/// components (ordered along the interface tangent).
pub struct MassSolver2D {
    components: Vec<MassComponent>,
}

enum MassComponent {
    Identity,
    Banded { idx: Vec<usize>, lu: BandedLu },
}

impl MassSolver2D {
    fn new(mass: &CsrMatrix, dof_map: &DofMap2D, mesh: &TriMesh, line: &LineInterface) -> Result<Self, Assembly2DError> {
        let comps = mass.connected_components();
        let tangent = [line.normal[1], -line.normal[0]];
        let mut components = Vec::with_capacity(comps.len());
        for mut idx in comps {
            // Identity singleton blocks need no factorization.
            if idx.len() == 1 {
                let (cols, vals) = mass.row(idx[0]);
                if cols.len() == 1 && cols[0] == idx[0] && (vals[0] - 1.0).abs() < 1e-12 {
                    components.push(MassComponent::Identity);
                    continue;
                }
            }
            // Order the component along the interface tangent so that the
            // gathered block is banded.
            idx.sort_by(|&a, &b| {
                let key = |d: usize| {
                    let t = dof_map.tri_of(d);
                    let verts = mesh.tri_vertices(t);
                    let cx = (verts[0][0] + verts[1][0] + verts[2][0]) / 3.0;
                    let cy = (verts[0][1] + verts[1][1] + verts[2][1]) / 3.0;
                    (tangent[0] * cx + tangent[1] * cy, dof_map.side_of(d), t, d)
                };
                let (ka, kb) = (key(a), key(b));
                ka.partial_cmp(&kb).unwrap()
            });
            let pos: std::collections::HashMap<usize, usize> =
                idx.iter().enumerate().map(|(k, &d)| (d, k)).collect();
            let mut trip = Triplets::new(idx.len(), idx.len());
            for (k, &d) in idx.iter().enumerate() {
                let (cols, vals) = mass.row(d);
                for (c, v) in cols.iter().zip(vals) {
                    if let Some(&kc) = pos.get(c) {
                        trip.push(k, kc, *v);
                    }
                }
            }
            let lu = BandedLu::factor(&trip).map_err(|_| Assembly2DError::SingularMass)?;
            components.push(MassComponent::Banded { idx, lu });
        }
        Ok(Self { components })
    }

    pub fn solve_in_place(&self, v: &mut [f64]) {
        for comp in &self.components {
            if let MassComponent::Banded { idx, lu } = comp {
                let mut local: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
                lu.solve_in_place(&mut local);
                for (k, &i) in idx.iter().enumerate() {
                    v[i] = local[k];
                }
            }
        }
    }
}

struct InflowPoint {
    point: [f64; 2],
    /// rhs rows and weights: rhs[row] += w * g(point, stage).
    rows: Vec<(usize, f64)>,
}

struct BoundaryQuadPoint {
    side: usize,
    tri: usize,
    point: [f64; 2],
    /// Arc weight.
    w: f64,
    a_n: f64,
    lam: f64,
    inflow: bool,
}

/// Assembled 2D operators with solvers and conservation bookkeeping.
pub struct DgOperators2D {
    pub mass: CsrMatrix,
    pub spatial: CsrMatrix,
    pub dof_map: DofMap2D,
    /// Physical-region integral of every dof's basis function.
    pub phys_integral: Vec<f64>,
    bases: Vec<TriangleBasis>,
    mass_solver: MassSolver2D,
    inflow_points: Vec<InflowPoint>,
    boundary_points: Vec<BoundaryQuadPoint>,
    pub velocities: [[f64; 2]; 2],
    pub line: LineInterface,
}

#[allow(clippy::too_many_arguments)]
impl DgOperators2D {
    pub fn assemble(
        mesh: &TriMesh,
        topos: (&ActiveTopology2D, &ActiveTopology2D),
        degree: usize,
        penalties: &PenaltyConfig,
        velocities: [[f64; 2]; 2],
        line: &LineInterface,
        bc: BoundarySpec2D,
    ) -> Result<Self, Assembly2DError> {
        let a_n = [
            velocities[0][0] * line.normal[0] + velocities[0][1] * line.normal[1],
            velocities[1][0] * line.normal[0] + velocities[1][1] * line.normal[1],
        ];
        for side in 0..2 {
            if a_n[side] == 0.0 {
                return Err(Assembly2DError::ZeroNormalSpeed { side });
            }
        }
        if a_n[0] * a_n[1] < 0.0 {
            return Err(Assembly2DError::MixedSigns);
        }
        let (t1, t2) = topos;
        let bases: Vec<TriangleBasis> =
            (0..mesh.n_tris()).map(|t| TriangleBasis::new(degree, mesh.tri_vertices(t))).collect();
        let nm = bases[0].dof_count();
        let dof_map = DofMap2D::new(nm, t1, t2, mesh.n_tris());
        let n = dof_map.n_dofs();
        let edge_rule_n = degree + 1;

        // ---- Mass: physical-region Gram + γ_M J1.
        let mut mt = Triplets::new(n, n);
        for topo in [t1, t2] {
            for &t in &topo.tris {
                match &topo.cut[t] {
                    None => {
                        // Orthonormal basis: exact identity block.
                        for m in 0..nm {
                            mt.push(dof_map.global(topo.side, t, m), dof_map.global(topo.side, t, m), 1.0);
                        }
                    }
                    Some(cut) => {
                        let rule = cut_cell_rule_polygon(degree, &cut.polygon).expect("cut polygon");
                        let mut block = DMatrix::<f64>::zeros(nm, nm);
                        for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                            let phi = bases[t].eval(*p, 0, 0);
                            for i in 0..nm {
                                for j in 0..nm {
                                    block[(i, j)] += w * phi[i] * phi[j];
                                }
                            }
                        }
                        for i in 0..nm {
                            for j in 0..nm {
                                let v = block[(i, j)];
                                if v != 0.0 {
                                    mt.push(dof_map.global(topo.side, t, i), dof_map.global(topo.side, t, j), v);
                                }
                            }
                        }
                    }
                }
            }
            emit_penalty_2d(mesh, topo, &bases, penalties, 1, penalties.gamma_mass, &dof_map, &mut mt);
        }
        let mass = mt.into_csr();
        let mass_solver = MassSolver2D::new(&mass, &dof_map, mesh, line)?;

        // ---- Spatial operator.
        let mut st = Triplets::new(n, n);
        let mut inflow_points = Vec::new();
        let mut boundary_points = Vec::new();
        for topo in [t1, t2] {
            let a = velocities[topo.side];
            // Volume transport: -(F(u), ∇v) = -∫ u (a·∇φ_v) φ_u.
            for &t in &topo.tris {
                let mut block = DMatrix::<f64>::zeros(nm, nm);
                match &topo.cut[t] {
                    None => {
                        let rule = triangle_rule(degree + 2, mesh.tri_vertices(t)).unwrap();
                        for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                            let phi = bases[t].eval(*p, 0, 0);
                            let dx = bases[t].eval(*p, 1, 0);
                            let dy = bases[t].eval(*p, 0, 1);
                            for i in 0..nm {
                                let adv = a[0] * dx[i] + a[1] * dy[i];
                                for j in 0..nm {
                                    block[(i, j)] -= w * adv * phi[j];
                                }
                            }
                        }
                    }
                    Some(cut) => {
                        let rule = cut_cell_rule_polygon(degree, &cut.polygon).unwrap();
                        for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                            let phi = bases[t].eval(*p, 0, 0);
                            let dx = bases[t].eval(*p, 1, 0);
                            let dy = bases[t].eval(*p, 0, 1);
                            for i in 0..nm {
                                let adv = a[0] * dx[i] + a[1] * dy[i];
                                for j in 0..nm {
                                    block[(i, j)] -= w * adv * phi[j];
                                }
                            }
                        }
                    }
                }
                for i in 0..nm {
                    for j in 0..nm {
                        let v = block[(i, j)];
                        if v != 0.0 {
                            st.push(dof_map.global(topo.side, t, i), dof_map.global(topo.side, t, j), v);
                        }
                    }
                }
            }

            // Interior edge fluxes over per-side sub-segments.
            for fe in &topo.flux_edges {
                let edge = &mesh.edges[fe.edge];
                let (tm, tp) = (edge.tris[0].unwrap(), edge.tris[1].unwrap());
                let nrm = edge.normal;
                let an = a[0] * nrm[0] + a[1] * nrm[1];
                let lam = an.abs();
                let p_c = 0.5 * (an + lam);
                let q_c = 0.5 * (an - lam);
                let rule = segment_rule(&fe.seg, edge_rule_n);
                for (p, w) in rule {
                    let taum = bases[tm].eval(p, 0, 0);
                    let taup = bases[tp].eval(p, 0, 0);
                    for i in 0..nm {
                        for j in 0..nm {
                            // -F̂ (v+ - v-), F̂ = p u- + q u+.
                            st.push(dof_map.global(topo.side, tp, i), dof_map.global(topo.side, tm, j), -w * p_c * taup[i] * taum[j]);
                            st.push(dof_map.global(topo.side, tp, i), dof_map.global(topo.side, tp, j), -w * q_c * taup[i] * taup[j]);
                            st.push(dof_map.global(topo.side, tm, i), dof_map.global(topo.side, tm, j), w * p_c * taum[i] * taum[j]);
                            st.push(dof_map.global(topo.side, tm, i), dof_map.global(topo.side, tp, j), w * q_c * taum[i] * taup[j]);
                        }
                    }
                }
            }

            // Domain boundary: upwind ghost data.
            for (fe, tag) in &topo.boundary_edges {
                let edge = &mesh.edges[fe.edge];
                let t = edge.tris[0].unwrap();
                let nrm = edge.normal;
                let an = a[0] * nrm[0] + a[1] * nrm[1];
                let lam = an.abs();
                let inflow = bc.is_inflow(*tag);
                let p_int = 0.5 * (an + lam);
                let q_ghost = 0.5 * (an - lam);
                let rule = segment_rule(&fe.seg, edge_rule_n);
                for (p, w) in rule {
                    let tau = bases[t].eval(p, 0, 0);
                    let coeff_int = if inflow { p_int } else { an };
                    for i in 0..nm {
                        for j in 0..nm {
                            let v = w * coeff_int * tau[i] * tau[j];
                            if v != 0.0 {
                                st.push(dof_map.global(topo.side, t, i), dof_map.global(topo.side, t, j), v);
                            }
                        }
                    }
                    if inflow && q_ghost != 0.0 {
                        // a_h ghost coefficient +q τ; rhs of u̇ = -a_h gets -q τ g.
                        let rows: Vec<(usize, f64)> = (0..nm)
                            .map(|i| (dof_map.global(topo.side, t, i), -w * q_ghost * tau[i]))
                            .collect();
                        inflow_points.push(InflowPoint { point: p, rows });
                    }
                    boundary_points.push(BoundaryQuadPoint {
                        side: topo.side,
                        tri: t,
                        point: p,
                        w,
                        a_n: an,
                        lam,
                        inflow,
                    });
                }
            }

            // γ_A J0.
            emit_penalty_2d(mesh, topo, &bases, penalties, 0, penalties.gamma_spatial, &dof_map, &mut st);
        }

        // Interface coupling along the cut segments; in the fitted degenerate
        // case the segments are whole mesh edges with the two sides' traces
        // coming from the two adjacent triangles.
        {
            let (l1, l2) = (penalties.lambda_1, penalties.lambda_2);
            // (v1,u1): +(1-λ1) a_n1; (v2,u2): -(1+λ2) a_n2;
            // (v1,u2): +λ1 a_n2;    (v2,u1): +λ2 a_n1.
            let blocks = [
                (0usize, 0usize, (1.0 - l1) * a_n[0]),
                (1, 1, -(1.0 + l2) * a_n[1]),
                (0, 1, l1 * a_n[1]),
                (1, 0, l2 * a_n[0]),
            ];
            let couple = |seg: &[[f64; 2]; 2], tri_1: usize, tri_2: usize, st: &mut Triplets| {
                for (p, w) in segment_rule(seg, edge_rule_n) {
                    let tau1 = bases[tri_1].eval(p, 0, 0);
                    let tau2 = bases[tri_2].eval(p, 0, 0);
                    for (vs, us, c) in blocks {
                        if c == 0.0 {
                            continue;
                        }
                        let (tv, tauv) = if vs == 0 { (tri_1, &tau1) } else { (tri_2, &tau2) };
                        let (tu, tauu) = if us == 0 { (tri_1, &tau1) } else { (tri_2, &tau2) };
                        for i in 0..nm {
                            for j in 0..nm {
                                st.push(
                                    dof_map.global(vs, tv, i),
                                    dof_map.global(us, tu, j),
                                    w * c * tauv[i] * tauu[j],
                                );
                            }
                        }
                    }
                }
            };
            for cut in t1.cut.iter().flatten() {
                let t = cut.tri;
                if t2.cut[t].is_none() {
                    continue;
                }
                couple(&cut.segment, t, t, &mut st);
            }
            for &(e, tri_1, tri_2) in &t1.fitted_interface {
                let edge = &mesh.edges[e];
                let seg = [mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]]];
                couple(&seg, tri_1, tri_2, &mut st);
            }
        }
        let spatial = st.into_csr();

        // Physical integrals for total-mass bookkeeping.
        let mut q = vec![0.0; n];
        for topo in [t1, t2] {
            for &t in &topo.tris {
                match &topo.cut[t] {
                    None => {
                        // Orthonormal basis: only the constant mode integrates
                        // to a nonzero value, sqrt(area).
                        q[dof_map.global(topo.side, t, 0)] += mesh.areas[t].sqrt();
                    }
                    Some(cut) => {
                        let rule = cut_cell_rule_polygon(degree, &cut.polygon).unwrap();
                        for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
                            let phi = bases[t].eval(*p, 0, 0);
                            for (m, v) in phi.iter().enumerate() {
                                q[dof_map.global(topo.side, t, m)] += w * v;
                            }
                        }
                    }
                }
            }
        }

        Ok(Self {
            mass,
            spatial,
            dof_map,
            phys_integral: q,
            bases,
            mass_solver,
            inflow_points,
            boundary_points,
            velocities,
            line: *line,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_map.n_dofs()
    }

    pub fn total_mass(&self, u: &[f64]) -> f64 {
        self.phys_integral.iter().zip(u).map(|(q, v)| q * v).sum()
    }

    pub fn eval(&self, u: &[f64], side: usize, tri: usize, p: [f64; 2]) -> f64 {
        let phi = self.bases[tri].eval(p, 0, 0);
        let base = self.dof_map.base(side, tri);
        phi.iter().enumerate().map(|(m, v)| v * u[base + m]).sum()
    }

    pub fn basis_eval(&self, tri: usize, p: [f64; 2]) -> Vec<f64> {
        self.bases[tri].eval(p, 0, 0)
    }

    pub fn mass_solve(&self, v: &mut [f64]) {
        self.mass_solver.solve_in_place(v);
    }

    /// Dof vector representing per-side constant states.
    pub fn constant_state(&self, mesh: &TriMesh, values: [f64; 2]) -> Vec<f64> {
        let mut u = vec![0.0; self.n_dofs()];
        for side in 0..2 {
            for &t in &self.dof_map.tris[side] {
                u[self.dof_map.global(side, t, 0)] = values[side] * mesh.areas[t].sqrt();
            }
        }
        u
    }
}

/// Normal-derivative ghost penalty over the stabilized faces.
#[allow(clippy::too_many_arguments)]
fn emit_penalty_2d(
    mesh: &TriMesh,
    topo: &ActiveTopology2D,
    bases: &[TriangleBasis],
    penalties: &PenaltyConfig,
    s: usize,
    gamma: f64,
    dof_map: &DofMap2D,
    out: &mut Triplets,
) {
    if gamma == 0.0 {
        return;
    }
    let nm = dof_map.n_modes;
    let r = penalties.omega.len() - 1;
    let h = mesh.h;
    for &e in &topo.stabilized_faces {
        let edge = &mesh.edges[e];
        let (tm, tp) = (edge.tris[0].unwrap(), edge.tris[1].unwrap());
        let rule = segment_rule(
            &[mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]]],
            r + 1,
        );
        for (p, w) in rule {
            for k in 0..=r {
                let wk = gamma * penalties.omega[k] * h.powi((2 * k + s) as i32) * w;
                let dm = bases[tm].eval_directional(p, edge.normal, k);
                let dp = bases[tp].eval_directional(p, edge.normal, k);
                // Jump functional: +∂ⁿ on tp, -∂ⁿ on tm.
                for i in 0..nm {
                    for j in 0..nm {
                        out.push(dof_map.global(topo.side, tp, i), dof_map.global(topo.side, tp, j), wk * dp[i] * dp[j]);
                        out.push(dof_map.global(topo.side, tp, i), dof_map.global(topo.side, tm, j), -wk * dp[i] * dm[j]);
                        out.push(dof_map.global(topo.side, tm, i), dof_map.global(topo.side, tp, j), -wk * dm[i] * dp[j]);
                        out.push(dof_map.global(topo.side, tm, i), dof_map.global(topo.side, tm, j), wk * dm[i] * dm[j]);
                    }
                }
            }
        }
    }
}

/// Gauss rule along a segment (points and arc weights).
fn segment_rule(seg: &[[f64; 2]; 2], n: usize) -> Vec<([f64; 2], f64)> {
    let len = ((seg[1][0] - seg[0][0]).powi(2) + (seg[1][1] - seg[0][1]).powi(2)).sqrt();
    let rule = gauss_rule(n, [0.0, 1.0]).unwrap();
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&s, &w)| {
            (
                [
                    seg[0][0] + s * (seg[1][0] - seg[0][0]),
                    seg[0][1] + s * (seg[1][1] - seg[0][1]),
                ],
                w * len,
            )
        })
        .collect()
}

/// The 2D semi-discrete system driven by the shared Runge-Kutta steppers.
pub struct System2D<'a> {
    pub ops: &'a DgOperators2D,
    pub boundary_data: BoundaryField2D,
}

impl SemiDiscreteSystem for System2D<'_> {
    fn n_dofs(&self) -> usize {
        self.ops.n_dofs()
    }

    fn n_comp(&self) -> usize {
        1
    }

    fn rhs(&self, u: &[f64], stage: &GhostStage, out: &mut [f64]) {
        self.ops.spatial.mul_vec_into(u, out);
        for v in out.iter_mut() {
            *v = -*v;
        }
        for ip in &self.ops.inflow_points {
            let g = self.boundary_data.eval_stage(ip.point, stage);
            if g != 0.0 {
                for &(row, w) in &ip.rows {
                    // w already carries the right-hand-side sign.
                    out[row] += w * g;
                }
            }
        }
    }

    fn mass_solve_in_place(&self, v: &mut [f64]) {
        self.ops.mass_solver.solve_in_place(v);
    }

    fn boundary_influx(&self, u: &[f64], stage: &GhostStage) -> Vec<f64> {
        let mut influx = 0.0;
        for bp in &self.ops.boundary_points {
            let tr = self.ops.eval(u, bp.side, bp.tri, bp.point);
            let ghost = if bp.inflow { self.boundary_data.eval_stage(bp.point, stage) } else { tr };
            let fhat = 0.5 * bp.a_n * (tr + ghost) - 0.5 * bp.lam * (ghost - tr);
            influx -= bp.w * fhat;
        }
        vec![influx]
    }
}
