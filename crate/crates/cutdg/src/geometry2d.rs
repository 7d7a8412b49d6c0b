//! Triangular background meshes cut by a straight-line interface.
//!
//! The mesh is a structured split of a uniform quad grid (two triangles per
//! cell). A line n·x = c divides the domain; triangles are classified by the
//! signs of the vertex level-set values, cut triangles carry per-side convex
//! polygons and the interface segment, and edge sets store the sub-segments
//! that lie inside each subdomain.

use crate::basis::polygon_area;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum Geometry2DError {
    #[error("line misses the domain interior")]
    LineMissesDomain,
    #[error("invalid grid size {nx} x {ny}")]
    InvalidGrid { nx: usize, ny: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    XMin,
    XMax,
    YMin,
    YMax,
}

#[derive(Clone, Debug)]
pub struct Edge {
    /// Vertex indices in the CCW order of the first adjacent triangle.
    pub v: [usize; 2],
    /// Adjacent triangles; the unit normal points out of `tris[0]`.
    pub tris: [Option<usize>; 2],
    pub boundary: Option<BoundaryTag>,
    /// Unit normal out of tris[0] (outward for boundary edges).
    pub normal: [f64; 2],
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    pub tris: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    pub tri_edges: Vec<[usize; 3]>,
    /// Max edge length.
    pub h: f64,
    pub areas: Vec<f64>,
}

impl TriMesh {
    pub fn tri_vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.tris[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn n_tris(&self) -> usize {
        self.tris.len()
    }
}

/// Structured triangulation of [x0,x1] x [y0,y1]: each grid cell is split
/// into a lower and an upper triangle along the cell diagonal.
pub fn structured_tri_mesh(
    bounds: [[f64; 2]; 2],
    nx: usize,
    ny: usize,
) -> Result<TriMesh, Geometry2DError> {
    if nx < 1 || ny < 1 {
        return Err(Geometry2DError::InvalidGrid { nx, ny });
    }
    let [x0, y0] = bounds[0];
    let [x1, y1] = bounds[1];
    let dx = (x1 - x0) / nx as f64;
    let dy = (y1 - y0) / ny as f64;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([x0 + i as f64 * dx, y0 + j as f64 * dy]);
        }
    }
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            tris.push([v00, v10, v11]);
            tris.push([v00, v11, v01]);
        }
    }

    // Unique edges with adjacency; normals point out of the first triangle.
    let mut edge_map: std::collections::HashMap<(usize, usize), usize> = Default::default();
    let mut edges: Vec<Edge> = Vec::new();
    let mut tri_edges = vec![[usize::MAX; 3]; tris.len()];
    for (t, tri) in tris.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            match edge_map.get(&key) {
                Some(&e) => {
                    edges[e].tris[1] = Some(t);
                    tri_edges[t][k] = e;
                }
                None => {
                    let pa = vertices[a];
                    let pb = vertices[b];
                    let d = [pb[0] - pa[0], pb[1] - pa[1]];
                    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
                    let normal = [d[1] / len, -d[0] / len];
                    let e = edges.len();
                    edges.push(Edge { v: [a, b], tris: [Some(t), None], boundary: None, normal, length: len });
                    edge_map.insert(key, e);
                    tri_edges[t][k] = e;
                }
            }
        }
    }
    let tol = 1e-12 * dx.max(dy);
    for e in edges.iter_mut() {
        if e.tris[1].is_none() {
            let pa = vertices[e.v[0]];
            let pb = vertices[e.v[1]];
            e.boundary = Some(if (pa[0] - x0).abs() < tol && (pb[0] - x0).abs() < tol {
                BoundaryTag::XMin
            } else if (pa[0] - x1).abs() < tol && (pb[0] - x1).abs() < tol {
                BoundaryTag::XMax
            } else if (pa[1] - y0).abs() < tol && (pb[1] - y0).abs() < tol {
                BoundaryTag::YMin
            } else {
                BoundaryTag::YMax
            });
        }
    }
    let h = edges.iter().map(|e| e.length).fold(0.0, f64::max);
    let areas = (0..tris.len())
        .map(|t| {
            let [a, b, c] = [vertices[tris[t][0]], vertices[tris[t][1]], vertices[tris[t][2]]];
            polygon_area(&[a, b, c]).abs()
        })
        .collect();
    Ok(TriMesh { vertices, tris, edges, tri_edges, h, areas })
}

/// Straight-line interface n·x = offset with ‖n‖ = 1; side 1 is n·x < offset.
#[derive(Clone, Copy, Debug)]
pub struct LineInterface {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl LineInterface {
    pub fn new(normal: [f64; 2], offset: f64) -> Self {
        let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        assert!(len > 0.0);
        Self { normal: [normal[0] / len, normal[1] / len], offset: offset / len }
    }

    /// Interface x + y = c0 as used by the bundled experiments.
    pub fn diagonal(c0: f64) -> Self {
        let s = 1.0 / 2.0_f64.sqrt();
        Self { normal: [s, s], offset: c0 * s }
    }

    /// Signed distance-like level set (positive on side 2).
    pub fn level(&self, p: [f64; 2]) -> f64 {
        self.normal[0] * p[0] + self.normal[1] * p[1] - self.offset
    }
}

/// Cut data of one triangle on one side.
#[derive(Clone, Debug)]
pub struct CutRegion2D {
    pub tri: usize,
    /// Convex polygon tri ∩ Ω_side with positive area.
    pub polygon: Vec<[f64; 2]>,
    /// Interface segment Γ ∩ tri.
    pub segment: [[f64; 2]; 2],
}

/// Sub-segment of an edge used for flux integration on one side.
#[derive(Clone, Debug)]
pub struct FluxEdge2D {
    pub edge: usize,
    pub seg: [[f64; 2]; 2],
}

#[derive(Clone, Debug)]
pub struct ActiveTopology2D {
    /// 0 for side 1, 1 for side 2.
    pub side: usize,
    /// Sorted active triangle indices.
    pub tris: Vec<usize>,
    pub active: Vec<bool>,
    /// Cut regions indexed by triangle (dense Option map).
    pub cut: Vec<Option<CutRegion2D>>,
    /// Interior edges with positive-length intersection with this side.
    pub flux_edges: Vec<FluxEdge2D>,
    /// Boundary edges with positive-length intersection with this side.
    pub boundary_edges: Vec<(FluxEdge2D, BoundaryTag)>,
    /// Ghost-penalty faces: interior edges of the active mesh adjacent to a
    /// cut triangle.
    pub stabilized_faces: Vec<usize>,
    /// Interface edges of the fitted degenerate case (the line lies along
    /// mesh edges): (edge, side-1 triangle, side-2 triangle). Present on both
    /// topologies identically.
    pub fitted_interface: Vec<(usize, usize, usize)>,
}

impl ActiveTopology2D {
    pub fn measure(&self, mesh: &TriMesh) -> f64 {
        self.tris
            .iter()
            .map(|&t| match &self.cut[t] {
                Some(c) => polygon_area(&c.polygon).abs(),
                None => mesh.areas[t],
            })
            .sum()
    }
}

/// Clip the segment [p, q] with level values (sp, sq) to the requested side.
/// Returns None when the remaining part has (near) zero length.
fn clip_segment(
    p: [f64; 2],
    q: [f64; 2],
    sp: f64,
    sq: f64,
    keep_negative: bool,
    tol: f64,
) -> Option<[[f64; 2]; 2]> {
    let (sp, sq) = if keep_negative { (sp, sq) } else { (-sp, -sq) };
    let inside = |s: f64| s <= tol;
    match (inside(sp), inside(sq)) {
        (true, true) => Some([p, q]),
        (false, false) => None,
        (true, false) => {
            let t = sp / (sp - sq);
            let m = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            Some([p, m])
        }
        (false, true) => {
            let t = sp / (sp - sq);
            let m = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            Some([m, q])
        }
    }
}

fn seg_len(s: &[[f64; 2]; 2]) -> f64 {
    ((s[1][0] - s[0][0]).powi(2) + (s[1][1] - s[0][1]).powi(2)).sqrt()
}

/// Clip a triangle against the half plane of one side (Sutherland-Hodgman).
fn clip_triangle(verts: &[[f64; 2]; 3], levels: &[f64; 3], keep_negative: bool, tol: f64) -> Vec<[f64; 2]> {
    let sgn: Vec<f64> = levels.iter().map(|&s| if keep_negative { s } else { -s }).collect();
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(4);
    for k in 0..3 {
        let (a, b) = (verts[k], verts[(k + 1) % 3]);
        let (sa, sb) = (sgn[k], sgn[(k + 1) % 3]);
        let a_in = sa <= tol;
        let b_in = sb <= tol;
        if a_in {
            out.push(a);
        }
        if (a_in && !b_in && sb > tol && sa < -tol) || (!a_in && b_in && sa > tol && sb < -tol) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Classify every triangle against the line and build per-side topologies.
pub fn classify_2d(
    mesh: &TriMesh,
    line: &LineInterface,
) -> Result<(ActiveTopology2D, ActiveTopology2D), Geometry2DError> {
    let tol = 1e-12 * mesh.h;
    let n_tris = mesh.n_tris();
    let mut topos = [
        ActiveTopology2D {
            side: 0,
            tris: Vec::new(),
            active: vec![false; n_tris],
            cut: vec![None; n_tris],
            flux_edges: Vec::new(),
            boundary_edges: Vec::new(),
            stabilized_faces: Vec::new(),
            fitted_interface: Vec::new(),
        },
        ActiveTopology2D {
            side: 1,
            tris: Vec::new(),
            active: vec![false; n_tris],
            cut: vec![None; n_tris],
            flux_edges: Vec::new(),
            boundary_edges: Vec::new(),
            stabilized_faces: Vec::new(),
            fitted_interface: Vec::new(),
        },
    ];
    let mut any_cut = false;
    let mut is_cut = vec![false; n_tris];
    for t in 0..n_tris {
        let verts = mesh.tri_vertices(t);
        let levels = [line.level(verts[0]), line.level(verts[1]), line.level(verts[2])];
        let pos = levels.iter().any(|&s| s > tol);
        let neg = levels.iter().any(|&s| s < -tol);
        if neg {
            topos[0].active[t] = true;
            topos[0].tris.push(t);
        }
        if pos {
            topos[1].active[t] = true;
            topos[1].tris.push(t);
        }
        if pos && neg {
            is_cut[t] = true;
            any_cut = true;
            // Interface segment: intersections of the line with the edges.
            let mut pts: Vec<[f64; 2]> = Vec::new();
            for k in 0..3 {
                let (a, b) = (verts[k], verts[(k + 1) % 3]);
                let (sa, sb) = (levels[k], levels[(k + 1) % 3]);
                if sa.abs() <= tol {
                    pts.push(a);
                } else if sa * sb < 0.0 && sb.abs() > tol {
                    let s = sa / (sa - sb);
                    pts.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                }
            }
            pts.dedup_by(|a, b| (a[0] - b[0]).abs() < tol && (a[1] - b[1]).abs() < tol);
            if pts.len() >= 2 {
                let segment = [pts[0], pts[1]];
                for side in 0..2 {
                    let poly = clip_triangle(&verts, &levels, side == 0, tol);
                    if polygon_area(&poly).abs() > tol * mesh.h {
                        topos[side].cut[t] = Some(CutRegion2D { tri: t, polygon: poly, segment });
                    }
                }
            }
        }
    }
    if topos[0].tris.is_empty() || topos[1].tris.is_empty() {
        return Err(Geometry2DError::LineMissesDomain);
    }

    // Edge sets: interior flux edges (positive-length part in the side),
    // boundary edges, and the stabilized faces.
    for (e, edge) in mesh.edges.iter().enumerate() {
        let pa = mesh.vertices[edge.v[0]];
        let pb = mesh.vertices[edge.v[1]];
        let (sa, sb) = (line.level(pa), line.level(pb));
        for side in 0..2 {
            let seg = clip_segment(pa, pb, sa, sb, side == 0, tol);
            let seg = match seg {
                Some(s) if seg_len(&s) > tol => s,
                _ => continue,
            };
            match (edge.tris[0], edge.tris[1]) {
                (Some(t0), Some(t1)) => {
                    if topos[side].active[t0] && topos[side].active[t1] {
                        topos[side].flux_edges.push(FluxEdge2D { edge: e, seg });
                    }
                }
                (Some(t0), None) => {
                    if topos[side].active[t0] {
                        topos[side]
                            .boundary_edges
                            .push((FluxEdge2D { edge: e, seg }, edge.boundary.unwrap()));
                    }
                }
                _ => unreachable!("first adjacent triangle always set"),
            }
        }
        // Interface edges of the fitted case: the whole edge lies on the
        // line with the two subdomains on its two sides.
        if sa.abs() <= tol && sb.abs() <= tol {
            if let (Some(t0), Some(t1)) = (edge.tris[0], edge.tris[1]) {
                let n_dot = edge.normal[0] * line.normal[0] + edge.normal[1] * line.normal[1];
                let (tri_1, tri_2) = if n_dot > 0.0 { (t0, t1) } else { (t1, t0) };
                if topos[0].active[tri_1] && topos[1].active[tri_2] {
                    topos[0].fitted_interface.push((e, tri_1, tri_2));
                    topos[1].fitted_interface.push((e, tri_1, tri_2));
                }
            }
        }
        // Stabilized faces: interior edges of the active mesh with a cut
        // neighbour (full edge, no clipping).
        if let (Some(t0), Some(t1)) = (edge.tris[0], edge.tris[1]) {
            if is_cut[t0] || is_cut[t1] {
                for side in 0..2 {
                    if topos[side].active[t0] && topos[side].active[t1] {
                        topos[side].stabilized_faces.push(e);
                    }
                }
            }
        }
    }
    let _ = any_cut;
    let [t1, t2] = topos;
    Ok((t1, t2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_mesh_counts() {
        let m = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], 4, 4).unwrap();
        assert_eq!(m.n_tris(), 32);
        assert_eq!(m.vertices.len(), 25);
        // Euler-ish check: interior + boundary edges.
        let boundary = m.edges.iter().filter(|e| e.boundary.is_some()).count();
        assert_eq!(boundary, 16);
        assert!((m.h - 2.0_f64.sqrt() * 0.5).abs() < 1e-14);
        let total_area: f64 = m.areas.iter().sum();
        assert!((total_area - 4.0).abs() < 1e-13);
    }

    #[test]
    fn normals_unit_and_outward_on_boundary() {
        let m = structured_tri_mesh([[0.0, 0.0], [1.0, 1.0]], 2, 2).unwrap();
        for e in &m.edges {
            let n = e.normal;
            assert!((n[0] * n[0] + n[1] * n[1] - 1.0).abs() < 1e-14);
            if let Some(tag) = e.boundary {
                let expect = match tag {
                    BoundaryTag::XMin => [-1.0, 0.0],
                    BoundaryTag::XMax => [1.0, 0.0],
                    BoundaryTag::YMin => [0.0, -1.0],
                    BoundaryTag::YMax => [0.0, 1.0],
                };
                assert!((n[0] - expect[0]).abs() < 1e-14 && (n[1] - expect[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn classification_matches_vertex_sign_oracle() {
        let m = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], 4, 4).unwrap();
        let line = LineInterface::diagonal(0.25);
        let (t1, t2) = classify_2d(&m, &line).unwrap();
        for t in 0..m.n_tris() {
            let verts = m.tri_vertices(t);
            let mut pos = 0;
            let mut neg = 0;
            for v in verts {
                let s = v[0] + v[1] - 0.25;
                if s > 1e-9 {
                    pos += 1;
                }
                if s < -1e-9 {
                    neg += 1;
                }
            }
            assert_eq!(t1.active[t], neg > 0, "tri {t}");
            assert_eq!(t2.active[t], pos > 0, "tri {t}");
            assert_eq!(t1.cut[t].is_some(), pos > 0 && neg > 0, "tri {t}");
        }
    }

    #[test]
    fn partition_area_is_exact() {
        let m = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], 7, 5).unwrap();
        for c0 in [0.25, 0.5, -0.37, 1e-7] {
            let line = LineInterface::diagonal(c0);
            let (t1, t2) = classify_2d(&m, &line).unwrap();
            let total = t1.measure(&m) + t2.measure(&m);
            assert!((total - 4.0).abs() < 1e-13, "c0={c0}");
        }
    }

    #[test]
    fn line_along_mesh_edges_degenerates_to_fitted() {
        let m = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], 4, 4).unwrap();
        // The vertical line x = 0 runs along mesh edges: measure-zero
        // intersections leave every triangle uncut and the interface
        // coupling degenerates to the fitted edge list.
        let line = LineInterface::new([1.0, 0.0], 0.0);
        let (t1, t2) = classify_2d(&m, &line).unwrap();
        for t in 0..m.n_tris() {
            assert!(t1.cut[t].is_none() && t2.cut[t].is_none(), "tri {t} marked cut");
        }
        assert!(t1.stabilized_faces.is_empty() && t2.stabilized_faces.is_empty());
        assert!((t1.measure(&m) - 2.0).abs() < 1e-13);
        assert_eq!(t1.fitted_interface.len(), 4);
        assert_eq!(t1.fitted_interface, t2.fitted_interface);
        for &(e, a, b) in &t1.fitted_interface {
            assert!(m.edges[e].boundary.is_none());
            assert!(t1.active[a] && t2.active[b]);
        }
        // A line only touching vertices of otherwise uncut triangles: the
        // diagonal through a corner cell vertex.
        let corner = LineInterface::diagonal(-1.5);
        let (s1, s2) = classify_2d(&m, &corner).unwrap();
        let cut_total =
            s1.cut.iter().flatten().count() + s2.cut.iter().flatten().count();
        assert!(cut_total > 0);
        for c in s1.cut.iter().flatten() {
            // Every reported cut has positive area on both sides; vertex-only
            // touches are filtered out.
            assert!(polygon_area(&c.polygon).abs() > 0.0);
        }
    }

    #[test]
    fn cut_polygons_are_convex_with_positive_area() {
        let m = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], 8, 8).unwrap();
        let line = LineInterface::diagonal(0.23);
        let (t1, t2) = classify_2d(&m, &line).unwrap();
        let mut cut_count = 0;
        for topo in [&t1, &t2] {
            for c in topo.cut.iter().flatten() {
                cut_count += 1;
                assert!(polygon_area(&c.polygon).abs() > 0.0);
                assert!(seg_len(&c.segment) > 0.0);
                assert!(c.polygon.len() >= 3 && c.polygon.len() <= 4);
            }
        }
        assert!(cut_count > 0);
    }

    #[test]
    fn stabilized_faces_touch_cut_triangles() {
        let m = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], 8, 8).unwrap();
        let line = LineInterface::diagonal(0.23);
        let (t1, t2) = classify_2d(&m, &line).unwrap();
        for topo in [&t1, &t2] {
            assert!(!topo.stabilized_faces.is_empty());
            for &e in &topo.stabilized_faces {
                let edge = &m.edges[e];
                let (a, b) = (edge.tris[0].unwrap(), edge.tris[1].unwrap());
                assert!(topo.active[a] && topo.active[b]);
                let a_cut = t1.cut[a].is_some() || t2.cut[a].is_some();
                let b_cut = t1.cut[b].is_some() || t2.cut[b].is_some();
                assert!(a_cut || b_cut);
            }
        }
    }

    #[test]
    fn line_outside_domain_rejected() {
        let m = structured_tri_mesh([[-1.0, -1.0], [1.0, 1.0]], 4, 4).unwrap();
        let line = LineInterface::diagonal(5.0);
        assert_eq!(classify_2d(&m, &line).unwrap_err(), Geometry2DError::LineMissesDomain);
    }
}
