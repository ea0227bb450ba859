//! Conforming triangulations of convex domains.
//!
//! The boundary is sampled at arclength-equidistributed points of the analytic
//! curve; the interior is filled by constrained Delaunay refinement with a
//! 25° minimum-angle bound. Boundary edges are never split, so every boundary
//! vertex lies exactly on the analytic curve.

use spade::handles::FixedVertexHandle;
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point};

/// Minimum interior angle requested from the refinement.
pub const MIN_ANGLE_DEG: f64 = 25.0;

/// Max edge length is guaranteed to stay below `MESH_QUALITY_CONSTANT · target_h`.
pub const MESH_QUALITY_CONSTANT: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub normal: Point,
}

/// Triangle mesh with counter-clockwise triangles and an outward-oriented
/// boundary loop.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary loop in counter-clockwise order.
    pub boundary_edges: Vec<BoundaryEdge>,
    pub target_h: f64,
}

impl TriMesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut best: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let a = self.vertices[tri[k]];
                let b = self.vertices[tri[(k + 1) % 3]];
                best = best.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        best
    }

    pub fn min_angle_deg(&self) -> f64 {
        let mut best: f64 = 180.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let a = self.vertices[tri[k]];
                let b = self.vertices[tri[(k + 1) % 3]];
                let c = self.vertices[tri[(k + 2) % 3]];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                best = best.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        best
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        let sx: f64 = self.vertices.iter().map(|p| p[0]).sum();
        let sy: f64 = self.vertices.iter().map(|p| p[1]).sum();
        [sx / n, sy / n]
    }

    /// Checks positive orientation, a single closed boundary loop and outward
    /// normals.
    pub fn check_invariants(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::Meshing(format!("triangle {t} has non-positive area")));
            }
        }
        let n = self.boundary_edges.len();
        if n < 3 {
            return Err(Error::Meshing("boundary loop has fewer than 3 edges".into()));
        }
        for k in 0..n {
            if self.boundary_edges[k].vertices[1] != self.boundary_edges[(k + 1) % n].vertices[0] {
                return Err(Error::Meshing("boundary edges do not form a closed loop".into()));
            }
        }
        let mut seen = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            if std::mem::replace(&mut seen[e.vertices[0]], true) {
                return Err(Error::Meshing("boundary loop visits a vertex twice".into()));
            }
        }
        let c = self.centroid();
        for e in &self.boundary_edges {
            let a = self.vertices[e.vertices[0]];
            let d = [a[0] - c[0], a[1] - c[1]];
            if e.normal[0] * d[0] + e.normal[1] * d[1] <= 0.0 {
                return Err(Error::Meshing("boundary normal points inward".into()));
            }
        }
        Ok(())
    }
}

/// Triangulates `spec` with requested maximum edge size `target_h`.
pub fn triangulate(spec: &DomainSpec, target_h: f64) -> Result<TriMesh> {
    let boundary = spec.boundary()?;
    if !(target_h.is_finite() && target_h > 0.0) {
        return Err(Error::Meshing(format!("target_h must be positive, got {target_h}")));
    }
    let inradius = boundary.inradius_about_center();
    if target_h >= inradius {
        return Err(Error::Meshing(format!(
            "target_h = {target_h} does not resolve a domain of in-radius {inradius:.4}"
        )));
    }
    let perimeter = boundary.perimeter();
    let n_boundary = ((perimeter / target_h).ceil() as usize).max(8);
    let ring = boundary.sample_arclength(n_boundary);

    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let handles: Vec<FixedVertexHandle> = ring
        .iter()
        .map(|p| cdt.insert(Point2::new(p[0], p[1])))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Meshing(format!("boundary insertion failed: {e:?}")))?;
    for k in 0..n_boundary {
        let (a, b) = (handles[k], handles[(k + 1) % n_boundary]);
        if a == b || !cdt.can_add_constraint(a, b) {
            return Err(Error::Meshing("boundary samples collide or cross".into()));
        }
        cdt.add_constraint(a, b);
    }
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(MIN_ANGLE_DEG))
        .with_max_allowed_area(0.25 * 3f64.sqrt() * target_h * target_h)
        .with_max_additional_vertices(50_000_000)
        .keep_constraint_edges()
        .exclude_outer_faces(true);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::Meshing("Delaunay refinement did not complete".into()));
    }

    // compact vertex numbering: boundary ring first, in loop order
    let mut index = vec![usize::MAX; cdt.num_vertices()];
    let mut vertices = Vec::with_capacity(cdt.num_vertices());
    for (k, h) in handles.iter().enumerate() {
        index[h.index()] = k;
        vertices.push(ring[k]);
    }
    let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
    for face in cdt.inner_faces() {
        if result.excluded_faces.contains(&face.fix()) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (slot, v) in face.vertices().iter().enumerate() {
            let id = v.fix().index();
            if index[id] == usize::MAX {
                index[id] = vertices.len();
                let p = v.position();
                vertices.push([p.x, p.y]);
            }
            tri[slot] = index[id];
        }
        triangles.push(tri);
    }

    let boundary_edges = (0..n_boundary)
        .map(|k| {
            let (i, j) = (k, (k + 1) % n_boundary);
            let (a, b) = (vertices[i], vertices[j]);
            let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
            let len = tx.hypot(ty);
            BoundaryEdge { vertices: [i, j], normal: [ty / len, -tx / len] }
        })
        .collect();

    let mesh = TriMesh { vertices, triangles, boundary_edges, target_h };
    mesh.check_invariants()?;
    let max_edge = mesh.max_edge_length();
    if max_edge > MESH_QUALITY_CONSTANT * target_h {
        return Err(Error::Meshing(format!(
            "max edge {max_edge:.4} exceeds {MESH_QUALITY_CONSTANT}·h"
        )));
    }
    Ok(mesh)
}
