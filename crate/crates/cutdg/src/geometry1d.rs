//! Background meshes, interface paths and active-topology classification in
//! one space dimension.
//!
//! The background mesh never changes; an interface position splits it into
//! two overlapping active meshes. The element containing the interface (the
//! cut element) belongs to both sides with complementary sub-intervals, and
//! the faces adjacent to it form the stabilized face sets. An interface that
//! lands exactly on a node yields a fitted decomposition with no cut element
//! and empty face sets.

use std::ops::Range;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid extent: left bound {left} must be below right bound {right}")]
    InvalidExtent { left: f64, right: f64 },
    #[error("invalid element count {n} (need at least 2)")]
    InvalidCount { n: usize },
    #[error("interface at {x} lies outside the open domain")]
    InterfaceOutsideDomain { x: f64 },
    #[error("interface path exits the domain at t = {t}")]
    InterfaceExitsDomain { t: f64 },
}

/// Relative tolerance (in units of h) below which an interface position is
/// treated as coinciding with a mesh node.
pub const NODE_SNAP_REL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn both() -> [Side; 2] {
        [Side::One, Side::Two]
    }
}

/// Uniform partition of [x_left, x_right] into n elements.
#[derive(Clone, Debug)]
pub struct BackgroundMesh1D {
    pub x_left: f64,
    pub x_right: f64,
    pub n_elements: usize,
    pub nodes: Vec<f64>,
}

/// Build a uniform background mesh.
pub fn build_mesh(x_left: f64, x_right: f64, n: usize) -> Result<BackgroundMesh1D, GeometryError> {
    if !(x_left < x_right) {
        return Err(GeometryError::InvalidExtent { left: x_left, right: x_right });
    }
    if n < 2 {
        return Err(GeometryError::InvalidCount { n });
    }
    let h = (x_right - x_left) / n as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|j| x_left + j as f64 * h).collect();
    nodes[n] = x_right;
    Ok(BackgroundMesh1D { x_left, x_right, n_elements: n, nodes })
}

impl BackgroundMesh1D {
    pub fn h(&self) -> f64 {
        (self.x_right - self.x_left) / self.n_elements as f64
    }

    pub fn element_extent(&self, j: usize) -> [f64; 2] {
        [self.nodes[j], self.nodes[j + 1]]
    }

    /// Element containing x (boundary points resolve to the adjacent element).
    pub fn locate(&self, x: f64) -> usize {
        let j = ((x - self.x_left) / self.h()).floor() as isize;
        (j.max(0) as usize).min(self.n_elements - 1)
    }
}

/// Prescribed interface motion with exact velocity.
#[derive(Clone, Debug)]
pub enum InterfacePath {
    Constant { x0: f64 },
    Linear { x0: f64, velocity: f64 },
    /// x(t) = x0 + amplitude * sin(t)
    Sinusoidal { x0: f64, amplitude: f64 },
}

impl InterfacePath {
    pub fn position(&self, t: f64) -> f64 {
        match self {
            InterfacePath::Constant { x0 } => *x0,
            InterfacePath::Linear { x0, velocity } => x0 + velocity * t,
            InterfacePath::Sinusoidal { x0, amplitude } => x0 + amplitude * t.sin(),
        }
    }

    pub fn velocity(&self, t: f64) -> f64 {
        match self {
            InterfacePath::Constant { .. } => 0.0,
            InterfacePath::Linear { velocity, .. } => *velocity,
            InterfacePath::Sinusoidal { amplitude, .. } => amplitude * t.cos(),
        }
    }
}

/// Interface fragment of a cut element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutElement1D {
    pub index: usize,
    /// Sub-interval of the element covered by this side's subdomain.
    pub sub: [f64; 2],
}

/// Per-side active mesh, edge sets and stabilized faces.
///
/// Edges are identified with node indices 0..=n; element j spans nodes j and
/// j+1. `elements` is contiguous by construction.
#[derive(Clone, Debug)]
pub struct ActiveTopology {
    pub side: Side,
    pub elements: Range<usize>,
    /// Edges interior to the active mesh (both neighbours active).
    pub interior_edges: Vec<usize>,
    /// Faces carrying ghost-penalty stabilization.
    pub stabilized_faces: Vec<usize>,
    pub cut_element: Option<CutElement1D>,
}

impl ActiveTopology {
    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Physical sub-extent of element j on this side.
    pub fn physical_extent(&self, mesh: &BackgroundMesh1D, j: usize) -> [f64; 2] {
        match &self.cut_element {
            Some(cut) if cut.index == j => cut.sub,
            _ => mesh.element_extent(j),
        }
    }

    /// Measure of the physical subdomain covered by this side.
    pub fn measure(&self, mesh: &BackgroundMesh1D) -> f64 {
        self.elements
            .clone()
            .map(|j| {
                let e = self.physical_extent(mesh, j);
                e[1] - e[0]
            })
            .sum()
    }
}

/// Split the background mesh at a (stationary) interface position.
pub fn classify(
    mesh: &BackgroundMesh1D,
    x_gamma: f64,
) -> Result<(ActiveTopology, ActiveTopology), GeometryError> {
    let h = mesh.h();
    if !(x_gamma > mesh.x_left && x_gamma < mesh.x_right) {
        return Err(GeometryError::InterfaceOutsideDomain { x: x_gamma });
    }
    let n = mesh.n_elements;
    let tol = NODE_SNAP_REL * h;

    // Snap to the nearest node when the intersection would have zero measure.
    let nearest = ((x_gamma - mesh.x_left) / h).round() as usize;
    if nearest >= 1 && nearest <= n - 1 && (x_gamma - mesh.nodes[nearest]).abs() <= tol {
        let k = nearest;
        return Ok((
            ActiveTopology {
                side: Side::One,
                elements: 0..k,
                interior_edges: (1..k).collect(),
                stabilized_faces: Vec::new(),
                cut_element: None,
            },
            ActiveTopology {
                side: Side::Two,
                elements: k..n,
                interior_edges: (k + 1..n).collect(),
                stabilized_faces: Vec::new(),
                cut_element: None,
            },
        ));
    }

    let j = mesh.locate(x_gamma);
    let ext = mesh.element_extent(j);
    let t1 = ActiveTopology {
        side: Side::One,
        elements: 0..j + 1,
        interior_edges: (1..=j).collect(),
        stabilized_faces: if j >= 1 { vec![j] } else { Vec::new() },
        cut_element: Some(CutElement1D { index: j, sub: [ext[0], x_gamma] }),
    };
    let t2 = ActiveTopology {
        side: Side::Two,
        elements: j..n,
        interior_edges: (j + 1..n).collect(),
        stabilized_faces: if j + 1 <= n - 1 { vec![j + 1] } else { Vec::new() },
        cut_element: Some(CutElement1D { index: j, sub: [x_gamma, ext[1]] }),
    };
    Ok((t1, t2))
}

/// Space-time slab topology: unions of the instantaneous active meshes over
/// one time interval, the swept element set and the per-slab face sets.
#[derive(Clone, Debug)]
pub struct SlabTopology {
    pub t_start: f64,
    pub t_end: f64,
    pub active_1: Range<usize>,
    pub active_2: Range<usize>,
    /// Elements cut by the interface at some time in the slab.
    pub swept_elements: Range<usize>,
    pub stabilized_faces_1: Vec<usize>,
    pub stabilized_faces_2: Vec<usize>,
}

/// Number of uniform time samples used to construct the slab active meshes
/// (endpoints included). Exact for monotone and for the slowly varying
/// sinusoidal paths used under the one-element-sweep restriction.
pub const SLAB_TIME_SAMPLES: usize = 64;

pub fn slab_topology(
    mesh: &BackgroundMesh1D,
    path: &InterfacePath,
    t_start: f64,
    t_end: f64,
    extra_times: &[f64],
) -> Result<SlabTopology, GeometryError> {
    assert!(t_start < t_end);
    let n = mesh.n_elements;
    let mut hi1 = 0usize;
    let mut lo2 = usize::MAX;
    let mut swept_lo = usize::MAX;
    let mut swept_hi = 0usize;
    let mut visit = |t: f64| -> Result<(), GeometryError> {
        let x = path.position(t);
        if !(x > mesh.x_left && x < mesh.x_right) {
            return Err(GeometryError::InterfaceExitsDomain { t });
        }
        let (a1, a2) = classify(mesh, x)?;
        hi1 = hi1.max(a1.elements.end);
        lo2 = lo2.min(a2.elements.start);
        if let Some(cut) = a1.cut_element {
            swept_lo = swept_lo.min(cut.index);
            swept_hi = swept_hi.max(cut.index + 1);
        }
        Ok(())
    };
    for s in 0..=SLAB_TIME_SAMPLES {
        let t = t_start + (t_end - t_start) * s as f64 / SLAB_TIME_SAMPLES as f64;
        visit(t)?;
    }
    for &t in extra_times {
        visit(t)?;
    }
    let swept = if swept_lo == usize::MAX { 0..0 } else { swept_lo..swept_hi };

    // Faces: edges of swept elements that are interior to each active mesh.
    let mut faces_1 = Vec::new();
    let mut faces_2 = Vec::new();
    if !swept.is_empty() {
        for e in swept.start..=swept.end {
            if e >= 1 && e <= hi1 - 1 {
                faces_1.push(e);
            }
            if e >= lo2 + 1 && e <= n - 1 {
                faces_2.push(e);
            }
        }
    }
    Ok(SlabTopology {
        t_start,
        t_end,
        active_1: 0..hi1,
        active_2: lo2..n,
        swept_elements: swept,
        stabilized_faces_1: faces_1,
        stabilized_faces_2: faces_2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mesh_spacing() {
        let m = build_mesh(-1.0, 1.0, 20).unwrap();
        assert!((m.h() - 0.1).abs() < 1e-15);
        assert_eq!(m.nodes.len(), 21);
        assert!((m.nodes[0] + 1.0).abs() < 1e-15);
        assert!((m.nodes[20] - 1.0).abs() < 1e-15);
        for j in 0..20 {
            assert!((m.nodes[j + 1] - m.nodes[j] - 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn paper_acoustic_mesh_size() {
        let m = build_mesh(0.0, 300.0, 200).unwrap();
        assert!((m.h() - 1.5).abs() < 1e-13);
    }

    #[test]
    fn degenerate_mesh_rejected() {
        assert_eq!(build_mesh(-1.0, 1.0, 1).unwrap_err(), GeometryError::InvalidCount { n: 1 });
        assert!(matches!(build_mesh(1.0, -1.0, 4), Err(GeometryError::InvalidExtent { .. })));
    }

    #[test]
    fn classify_small_offset_interface() {
        let m = build_mesh(-1.0, 1.0, 20).unwrap();
        let (t1, t2) = classify(&m, 1e-4).unwrap();
        let cut = t1.cut_element.unwrap();
        assert_eq!(cut.index, 10);
        assert!((cut.sub[0] - 0.0).abs() < 1e-15 && (cut.sub[1] - 1e-4).abs() < 1e-18);
        assert_eq!(t1.elements, 0..11);
        assert_eq!(t2.elements, 10..20);
        assert_eq!(t1.stabilized_faces, vec![10]); // edge at x = 0
        assert_eq!(t2.stabilized_faces, vec![11]); // edge at x = 0.1
        assert!((m.nodes[10] - 0.0).abs() < 1e-15);
        assert!((m.nodes[11] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn interface_on_node_degenerates_to_fitted() {
        let m = build_mesh(-1.0, 1.0, 20).unwrap();
        let (t1, t2) = classify(&m, 0.0).unwrap();
        assert!(t1.cut_element.is_none() && t2.cut_element.is_none());
        assert!(t1.stabilized_faces.is_empty() && t2.stabilized_faces.is_empty());
        assert_eq!(t1.elements, 0..10);
        assert_eq!(t2.elements, 10..20);
    }

    #[test]
    fn cut_fraction_half() {
        let m = build_mesh(-1.0, 1.0, 400).unwrap();
        let h = m.h();
        let (t1, t2) = classify(&m, 0.5 * h).unwrap();
        let c1 = t1.cut_element.unwrap();
        let c2 = t2.cut_element.unwrap();
        assert!(((c1.sub[1] - c1.sub[0]) / h - 0.5).abs() < 1e-12);
        assert!(((c2.sub[1] - c2.sub[0]) / h - 0.5).abs() < 1e-12);
    }

    #[test]
    fn partition_measure_is_exact() {
        let m = build_mesh(-1.0, 1.0, 37).unwrap();
        for &x in &[-0.93, -0.5, 1e-7, 0.21, 0.999, m.h() * 0.5 - 1.0] {
            let (t1, t2) = classify(&m, x).unwrap();
            let total = t1.measure(&m) + t2.measure(&m);
            assert!((total - 2.0).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn stabilized_faces_touch_cut_elements() {
        let m = build_mesh(-1.0, 1.0, 50).unwrap();
        for &x in &[-0.77, 0.013, 0.5 + 1e-9] {
            let (t1, t2) = classify(&m, x).unwrap();
            for t in [&t1, &t2] {
                let cut = t.cut_element.as_ref().unwrap();
                for &f in &t.stabilized_faces {
                    assert!(f == cut.index || f == cut.index + 1);
                    assert!(t.interior_edges.contains(&f));
                }
            }
        }
    }

    #[test]
    fn interface_outside_domain_rejected() {
        let m = build_mesh(-1.0, 1.0, 10).unwrap();
        assert!(classify(&m, -1.0).is_err());
        assert!(classify(&m, 1.5).is_err());
    }

    #[test]
    fn slab_sweep_within_one_element() {
        let m = build_mesh(0.0, 1.0, 10).unwrap();
        let path = InterfacePath::Linear { x0: 0.05, velocity: 0.16 };
        let slab = slab_topology(&m, &path, 0.0, 0.25, &[]).unwrap();
        assert_eq!(slab.swept_elements, 0..1);
        assert_eq!(slab.active_1, 0..1);
        assert_eq!(slab.active_2, 0..10);
    }

    #[test]
    fn constant_path_matches_stationary() {
        let m = build_mesh(-1.0, 1.0, 20).unwrap();
        let x0 = 0.043;
        let path = InterfacePath::Constant { x0 };
        let slab = slab_topology(&m, &path, 0.0, 0.1, &[]).unwrap();
        let (t1, t2) = classify(&m, x0).unwrap();
        assert_eq!(slab.active_1, t1.elements);
        assert_eq!(slab.active_2, t2.elements);
        assert_eq!(slab.stabilized_faces_1, t1.stabilized_faces);
        assert_eq!(slab.stabilized_faces_2, t2.stabilized_faces);
        assert_eq!(slab.swept_elements, t1.cut_element.unwrap().index..t1.cut_element.unwrap().index + 1);
    }

    #[test]
    fn sinusoidal_path_dense_sampling_oracle() {
        // Dense-sampling oracle with 1000 points per slab confirms the swept
        // set and the nesting of instantaneous active meshes.
        let n = 400;
        let m = build_mesh(-1.0, 1.0, n).unwrap();
        let amp = 0.4 * (-0.499 - (-1.0)) * (1.0 - (-0.499));
        let path = InterfacePath::Sinusoidal { x0: -0.499, amplitude: amp };
        let dt = 2.0 / n as f64 / 12.0;
        for slab_idx in [0usize, 37, 120, 511] {
            let t0 = slab_idx as f64 * dt;
            let slab = slab_topology(&m, &path, t0, t0 + dt, &[]).unwrap();
            assert!(!slab.swept_elements.is_empty());
            for s in 0..=1000 {
                let t = t0 + dt * s as f64 / 1000.0;
                let (a1, a2) = classify(&m, path.position(t)).unwrap();
                assert!(a1.elements.end <= slab.active_1.end);
                assert!(a2.elements.start >= slab.active_2.start);
                if let Some(cut) = a1.cut_element {
                    assert!(slab.swept_elements.contains(&cut.index));
                }
            }
        }
    }

    #[test]
    fn path_velocity_matches_central_differences() {
        let amp = 0.3;
        let paths = [
            InterfacePath::Constant { x0: 0.2 },
            InterfacePath::Linear { x0: 0.0, velocity: 0.111 },
            InterfacePath::Sinusoidal { x0: -0.499, amplitude: amp },
        ];
        let eps = 1e-6;
        for p in &paths {
            for s in 0..50 {
                let t = 0.07 * s as f64;
                let fd = (p.position(t + eps) - p.position(t - eps)) / (2.0 * eps);
                assert!((fd - p.velocity(t)).abs() < 1e-8);
            }
        }
    }
}
