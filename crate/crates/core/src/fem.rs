//! Quadratic (6-node) Lagrange elements on a [`TriMesh`].
//!
//! Local node order: the three vertices, then the midpoints of edges
//! (0,1), (1,2), (2,0). Elements are straight-sided.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::TriMesh;

const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

/// Per-element affine data.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_bary: [[f64; 2]; 3],
}

/// Degrees of freedom of the P2 space over a mesh.
#[derive(Clone, Debug)]
pub struct P2Space {
    pub mesh: TriMesh,
    /// Vertices first, then one midpoint per edge.
    pub nodes: Vec<Point>,
    pub elements: Vec<[usize; 6]>,
    pub geometry: Vec<ElementGeometry>,
    pub on_boundary: Vec<bool>,
    /// Vertex pair of each edge; the midpoint node of edge `e` is
    /// `mesh.vertices.len() + e`.
    pub edges: Vec<[usize; 2]>,
    fingerprint: u64,
}

impl P2Space {
    pub fn new(mesh: TriMesh) -> Self {
        let nv = mesh.vertices.len();
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut elements = Vec::with_capacity(mesh.triangles.len());
        let mut geometry = Vec::with_capacity(mesh.triangles.len());
        for tri in &mesh.triangles {
            let mut nodes6 = [tri[0], tri[1], tri[2], 0, 0, 0];
            for (k, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let (i, j) = (tri[*a], tri[*b]);
                let key = (i.min(j), i.max(j));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                nodes6[3 + k] = nv + e;
            }
            elements.push(nodes6);
            geometry.push(element_geometry(tri.map(|i| mesh.vertices[i])));
        }
        let mut nodes = mesh.vertices.clone();
        nodes.extend(edges.iter().map(|&[i, j]| {
            let (a, b) = (mesh.vertices[i], mesh.vertices[j]);
            [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
        }));
        let mut on_boundary = vec![false; nodes.len()];
        for be in &mesh.boundary_edges {
            let [i, j] = be.vertices;
            on_boundary[i] = true;
            on_boundary[j] = true;
            if let Some(&e) = edge_index.get(&(i.min(j), i.max(j))) {
                on_boundary[nv + e] = true;
            }
        }
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        nodes.len().hash(&mut hasher);
        elements.len().hash(&mut hasher);
        for p in &nodes {
            p[0].to_bits().hash(&mut hasher);
            p[1].to_bits().hash(&mut hasher);
        }
        let fingerprint = hasher.finish();
        Self { mesh, nodes, elements, geometry, on_boundary, edges, fingerprint }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Identifies the mesh: equal fingerprints mean identical node layouts.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn h(&self) -> f64 {
        self.mesh.target_h
    }

    /// Physical coordinates of a barycentric point in element `e`.
    pub fn point_at(&self, e: usize, bary: [f64; 3]) -> Point {
        let v = &self.elements[e];
        let (a, b, c) = (self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]]);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// Barycentric coordinates of `p` with respect to element `e`.
    pub fn bary_of(&self, e: usize, p: Point) -> [f64; 3] {
        let v = &self.elements[e];
        let a = self.nodes[v[0]];
        let g = &self.geometry[e].grad_bary;
        let l1 = g[1][0] * (p[0] - a[0]) + g[1][1] * (p[1] - a[1]);
        let l2 = g[2][0] * (p[0] - a[0]) + g[2][1] * (p[1] - a[1]);
        [1.0 - l1 - l2, l1, l2]
    }

    /// Element containing `p` (linear scan), with its barycentric coordinates.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let tol = -1e-12;
        (0..self.num_elements()).find_map(|e| {
            let l = self.bary_of(e, p);
            (l.iter().all(|&x| x >= tol)).then_some((e, l))
        })
    }

    pub fn local_values<T: Copy>(&self, e: usize, values: &[T]) -> [T; 6] {
        self.elements[e].map(|i| values[i])
    }
}

fn element_geometry([a, b, c]: [Point; 3]) -> ElementGeometry {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    // ∇λ_i is the inward edge normal of the opposite edge over 2·area
    let g1 = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
    let g2 = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
    let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
    ElementGeometry { area: 0.5 * det, grad_bary: [g0, g1, g2] }
}

/// P2 shape functions at barycentric point `l`.
pub fn shape(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Physical gradients of the P2 shape functions.
pub fn shape_gradients(g: &ElementGeometry, l: [f64; 3]) -> [[f64; 2]; 6] {
    let gb = &g.grad_bary;
    let comb = |i: usize, j: usize| {
        [4.0 * (l[i] * gb[j][0] + l[j] * gb[i][0]), 4.0 * (l[i] * gb[j][1] + l[j] * gb[i][1])]
    };
    let vert = |i: usize| [(4.0 * l[i] - 1.0) * gb[i][0], (4.0 * l[i] - 1.0) * gb[i][1]];
    [vert(0), vert(1), vert(2), comb(0, 1), comb(1, 2), comb(2, 0)]
}

/// Constant Hessians of the P2 shape functions.
pub fn shape_hessians(g: &ElementGeometry) -> [[[f64; 2]; 2]; 6] {
    let gb = &g.grad_bary;
    let outer = |i: usize, j: usize, s: f64| {
        let mut h = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                h[a][b] = s * (gb[i][a] * gb[j][b] + gb[j][a] * gb[i][b]);
            }
        }
        h
    };
    [outer(0, 0, 2.0), outer(1, 1, 2.0), outer(2, 2, 2.0), outer(0, 1, 4.0), outer(1, 2, 4.0), outer(2, 0, 4.0)]
}

/// Value of a P2 function with local nodal values `v` at barycentric `l`.
pub fn eval_local(v: &[f64; 6], l: [f64; 3]) -> f64 {
    shape(l).iter().zip(v).map(|(s, x)| s * x).sum()
}

pub fn grad_local(g: &ElementGeometry, v: &[f64; 6], l: [f64; 3]) -> [f64; 2] {
    let grads = shape_gradients(g, l);
    let mut out = [0.0; 2];
    for (gr, x) in grads.iter().zip(v) {
        out[0] += gr[0] * x;
        out[1] += gr[1] * x;
    }
    out
}

pub fn hessian_local(g: &ElementGeometry, v: &[f64; 6]) -> [[f64; 2]; 2] {
    let hs = shape_hessians(g);
    let mut out = [[0.0; 2]; 2];
    for (h, x) in hs.iter().zip(v) {
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] += h[a][b] * x;
            }
        }
    }
    out
}

/// Scalars that can be assembled into a Hermitian sparse matrix.
pub trait HermitianScalar: Copy + Default + std::ops::AddAssign + faer::traits::ComplexField {
    fn conjugate(self) -> Self;
}

impl HermitianScalar for f64 {
    fn conjugate(self) -> Self {
        self
    }
}

impl HermitianScalar for c64 {
    fn conjugate(self) -> Self {
        self.conj()
    }
}

/// Accumulates upper-triangle entries and emits an exactly Hermitian
/// matrix: each off-diagonal pair is stored once and mirrored.
#[derive(Debug)]
pub struct HermitianAssembler<T> {
    n: usize,
    upper: Vec<(usize, usize, T)>,
}

impl<T: HermitianScalar> HermitianAssembler<T> {
    pub fn new(n: usize, capacity: usize) -> Self {
        Self { n, upper: Vec::with_capacity(capacity) }
    }

    /// Adds `value` at `(i, j)`; the `(j, i)` entry is implied.
    pub fn add(&mut self, i: usize, j: usize, value: T) {
        if i <= j {
            self.upper.push((i, j, value));
        } else {
            self.upper.push((j, i, value.conjugate()));
        }
    }

    pub fn build(mut self) -> Result<SparseColMat<usize, T>> {
        // stable sort keeps the summation order of duplicates deterministic
        self.upper.sort_by_key(|&(i, j, _)| (j, i));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(self.upper.len() / 4);
        for (i, j, v) in self.upper {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        let mut triplets = Vec::with_capacity(2 * merged.len());
        for (i, j, v) in merged {
            triplets.push(Triplet::new(i, j, v));
            if i != j {
                triplets.push(Triplet::new(j, i, v.conjugate()));
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &triplets)
            .map_err(|e| Error::Internal(format!("sparse matrix creation failed: {e:?}")))
    }
}

/// True when `a` equals its conjugate transpose entry by entry.
pub fn is_exactly_hermitian<T: HermitianScalar + PartialEq>(a: &SparseColMat<usize, T>) -> bool {
    let a = a.as_ref();
    let n = a.ncols();
    if a.nrows() != n {
        return false;
    }
    let col_ptr = a.symbolic().col_ptr();
    let row_idx = a.symbolic().row_idx();
    let vals = a.val();
    let lookup = |i: usize, j: usize| -> Option<T> {
        let rows = &row_idx[col_ptr[j]..col_ptr[j + 1]];
        rows.binary_search(&i).ok().map(|k| vals[col_ptr[j] + k])
    };
    for j in 0..n {
        for k in col_ptr[j]..col_ptr[j + 1] {
            let i = row_idx[k];
            match lookup(j, i) {
                Some(t) if t.conjugate() == vals[k] => {}
                _ => return false,
            }
        }
    }
    true
}

/// `‖A‖₁`; equal to `‖A‖∞` for Hermitian matrices.
pub fn max_abs_column_sum<T: Copy>(a: &SparseColMat<usize, T>, abs: impl Fn(T) -> f64) -> f64 {
    let a = a.as_ref();
    let col_ptr = a.symbolic().col_ptr();
    let vals = a.val();
    (0..a.ncols())
        .map(|j| vals[col_ptr[j]..col_ptr[j + 1]].iter().map(|&v| abs(v)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense column vector from a slice.
pub fn column<T: faer::traits::ComplexField + Copy>(v: &[T]) -> Mat<T> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}
