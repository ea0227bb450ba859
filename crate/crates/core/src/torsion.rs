//! Torsion function `−Δv = 1` in Ω, `v = 0` on ∂Ω, its maximum and Hessian,
//! and the pointwise inequalities it satisfies on convex domains.

use std::sync::Arc;

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::Mat;
use faer::Side;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{self, column, grad_local, max_abs_column_sum, shape, shape_gradients, HermitianAssembler, P2Space};
use crate::geometry::Point;
use crate::mesh::TriMesh;
use crate::quadrature::{triangle_degree4, triangle_degree6};

/// Nodal field over a P2 space.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub space: Arc<P2Space>,
    pub values: Vec<f64>,
    /// Relative algebraic residual of the solve that produced the field.
    pub residual: f64,
}

impl ScalarField {
    pub fn value_at(&self, p: Point) -> Option<f64> {
        let (e, l) = self.space.locate(p)?;
        Some(fem::eval_local(&self.space.local_values(e, &self.values), l))
    }

    pub fn max_nodal(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    /// `(x, y, v)` rows for every P2 node.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "v"])?;
        for (p, v) in self.space.nodes.iter().zip(&self.values) {
            w.serialize((p[0], p[1], v))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Galerkin P2 solution of the torsion problem on `mesh`.
pub fn solve_torsion(mesh: &TriMesh) -> Result<ScalarField> {
    solve_torsion_on(Arc::new(P2Space::new(mesh.clone())))
}

pub fn solve_torsion_on(space: Arc<P2Space>) -> Result<ScalarField> {
    let n = space.num_nodes();
    let mut free_index = vec![usize::MAX; n];
    let mut n_free = 0;
    for i in 0..n {
        if !space.on_boundary[i] {
            free_index[i] = n_free;
            n_free += 1;
        }
    }
    if n_free == 0 {
        return Err(Error::Solver("mesh has no interior nodes".into()));
    }
    let quad = triangle_degree4();
    let mut asm = HermitianAssembler::<f64>::new(n_free, 21 * space.num_elements());
    let mut load = vec![0.0; n_free];
    for (e, nodes) in space.elements.iter().enumerate() {
        let g = &space.geometry[e];
        let mut ke = [[0.0; 6]; 6];
        let mut fe = [0.0; 6];
        for q in &quad {
            let w = q.weight * g.area;
            let grads = shape_gradients(g, q.bary);
            let phi = shape(q.bary);
            for a in 0..6 {
                fe[a] += w * phi[a];
                for b in a..6 {
                    ke[a][b] += w * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                }
            }
        }
        for a in 0..6 {
            let ia = free_index[nodes[a]];
            if ia == usize::MAX {
                continue;
            }
            load[ia] += fe[a];
            for b in a..6 {
                let ib = free_index[nodes[b]];
                if ib != usize::MAX {
                    asm.add(ia, ib, ke[a][b]);
                }
            }
        }
    }
    let stiffness = asm.build()?;
    let llt = stiffness
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Solver(format!("torsion stiffness factorization failed: {e:?}")))?;
    let rhs = column(&load);
    let mut x = llt.solve(&rhs);
    let k_norm = max_abs_column_sum(&stiffness, |v| v.abs());
    let f_norm = rhs.norm_max();
    let mut residual = f64::INFINITY;
    // iterative refinement pushes the residual to round-off level
    for _ in 0..4 {
        let res = &rhs - &stiffness * &x;
        // normwise backward error: the residual relative to ‖K‖‖x‖ + ‖f‖
        residual = res.norm_max() / (k_norm * x.norm_max() + f_norm);
        if residual < 1e-15 {
            break;
        }
        x += llt.solve(&res);
    }
    if !residual.is_finite() || residual > 1e-12 {
        return Err(Error::Solver(format!("torsion residual {residual:.3e} too large")));
    }
    let mut values = vec![0.0; n];
    for i in 0..n {
        if free_index[i] != usize::MAX {
            values[i] = x[(free_index[i], 0)];
        }
    }
    Ok(ScalarField { space, values, residual })
}

/// Maximum of the torsion function with the Hessian there.
#[derive(Clone, Debug, Serialize)]
pub struct MaxPoint {
    pub location: Point,
    pub value: f64,
    pub hessian: [[f64; 2]; 2],
    pub hessian_det: f64,
    pub hessian_trace: f64,
    /// |∇v| of the fitted quadratic at the best node.
    pub gradient_at_best_node: f64,
    pub fit_nodes: usize,
    pub fit_radius: f64,
}

impl MaxPoint {
    /// `ξ ∈ (0, 1/2]`: magnitude of the eigenvalue of H⋆ closest to zero.
    pub fn xi(&self) -> f64 {
        let (l1, l2) = sym_eigenvalues(self.hessian);
        l1.abs().min(l2.abs())
    }
}

fn sym_eigenvalues(h: [[f64; 2]; 2]) -> (f64, f64) {
    let m = 0.5 * (h[0][0] + h[1][1]);
    let d = (0.25 * (h[0][0] - h[1][1]).powi(2) + h[0][1] * h[1][0]).max(0.0).sqrt();
    (m - d, m + d)
}

const FIT_DEGREE: usize = 4;
const FIT_TERMS: usize = (FIT_DEGREE + 1) * (FIT_DEGREE + 2) / 2;
const FIT_MIN_NODES: usize = 3 * FIT_TERMS;

/// Monomial exponents `(i, j)` of `dxⁱ dyʲ` up to the fit degree.
fn fit_exponents() -> Vec<(i32, i32)> {
    (0..=FIT_DEGREE as i32).flat_map(|k| (0..=k).map(move |j| (k - j, j))).collect()
}

/// Value, gradient and Hessian of the fitted polynomial at `d`.
fn fit_eval(coef: &[f64], exps: &[(i32, i32)], d: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let pw = |x: f64, k: i32| if k < 0 { 0.0 } else { x.powi(k) };
    let (mut v, mut g, mut h) = (0.0, [0.0; 2], [[0.0; 2]; 2]);
    for (&c, &(i, j)) in coef.iter().zip(exps) {
        let (fi, fj) = (i as f64, j as f64);
        v += c * pw(d[0], i) * pw(d[1], j);
        g[0] += c * fi * pw(d[0], i - 1) * pw(d[1], j);
        g[1] += c * fj * pw(d[0], i) * pw(d[1], j - 1);
        h[0][0] += c * fi * (fi - 1.0) * pw(d[0], i - 2) * pw(d[1], j);
        h[0][1] += c * fi * fj * pw(d[0], i - 1) * pw(d[1], j - 1);
        h[1][1] += c * fj * (fj - 1.0) * pw(d[0], i) * pw(d[1], j - 2);
    }
    h[1][0] = h[0][1];
    (v, g, h)
}

/// Locates the maximum: best node, then a least-squares quartic over the
/// nodes within `5h` (at least three per coefficient); Newton steps on the
/// fit give location, value and Hessian.
pub fn locate_max(field: &ScalarField) -> Result<MaxPoint> {
    let space = &field.space;
    let (best, _) = field.max_nodal();
    let center = space.nodes[best];
    let h = space.h();
    let mut radius = 5.0 * h;
    let mut near: Vec<usize>;
    loop {
        near = (0..space.num_nodes())
            .filter(|&i| {
                let p = space.nodes[i];
                (p[0] - center[0]).hypot(p[1] - center[1]) <= radius
            })
            .collect();
        if near.len() >= FIT_MIN_NODES || radius > 1e3 * h {
            break;
        }
        radius *= 1.25;
    }
    if near.len() < FIT_MIN_NODES {
        return Err(Error::Discretization("too few nodes for the Hessian fit".into()));
    }
    // polynomial in scaled coordinates s = (x − x₀)/radius
    let exps = fit_exponents();
    let a = Mat::<f64>::from_fn(near.len(), FIT_TERMS, |row, col| {
        let p = space.nodes[near[row]];
        let (sx, sy) = ((p[0] - center[0]) / radius, (p[1] - center[1]) / radius);
        let (i, j) = exps[col];
        sx.powi(i) * sy.powi(j)
    });
    let rhs = Mat::<f64>::from_fn(near.len(), 1, |row, _| field.values[near[row]]);
    let sol = a.qr().solve_lstsq(&rhs);
    let coef: Vec<f64> = (0..FIT_TERMS).map(|k| sol[(k, 0)]).collect();
    let (_, g0, _) = fit_eval(&coef, &exps, [0.0, 0.0]);
    let mut s = [0.0, 0.0];
    let mut converged = false;
    for _ in 0..50 {
        let (_, g, hs) = fit_eval(&coef, &exps, s);
        let det = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
        if !(det > 0.0 && hs[0][0] + hs[1][1] < 0.0) {
            break;
        }
        let step = [(hs[1][1] * g[0] - hs[0][1] * g[1]) / det, (hs[0][0] * g[1] - hs[1][0] * g[0]) / det];
        s = [s[0] - step[0], s[1] - step[1]];
        if s[0].hypot(s[1]) > 1.0 {
            return Err(Error::Discretization("fitted maximum lies outside the fit neighbourhood".into()));
        }
        if step[0].hypot(step[1]) < 1e-15 {
            converged = true;
            break;
        }
    }
    let (value, _, hs) = fit_eval(&coef, &exps, s);
    let r2 = radius * radius;
    let hess = [[hs[0][0] / r2, hs[0][1] / r2], [hs[1][0] / r2, hs[1][1] / r2]];
    let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    let trace = hess[0][0] + hess[1][1];
    if !(det > 0.0 && trace < 0.0) {
        return Err(Error::Discretization(format!(
            "fitted Hessian is not negative definite (det {det:.3e}, trace {trace:.3e})"
        )));
    }
    if !converged {
        return Err(Error::Discretization("Newton iteration on the fitted maximum did not converge".into()));
    }
    Ok(MaxPoint {
        location: [center[0] + s[0] * radius, center[1] + s[1] * radius],
        value,
        hessian: hess,
        hessian_det: det,
        hessian_trace: trace,
        gradient_at_best_node: g0[0].hypot(g0[1]) / radius,
        fit_nodes: near.len(),
        fit_radius: radius,
    })
}

/// `ψ = √(1 − v/max v)` sampled at the nodes.
#[derive(Clone, Debug)]
pub struct TrialField {
    pub space: Arc<P2Space>,
    pub values: Vec<f64>,
}

pub fn trial_field(field: &ScalarField, max_point: &MaxPoint) -> TrialField {
    let m = max_point.value;
    let values = field.values.iter().map(|&v| (1.0 - v / m).clamp(0.0, 1.0).sqrt()).collect();
    TrialField { space: field.space.clone(), values }
}

impl TrialField {
    /// Largest `|∇ψ|·√(2 max v)` over quadrature points, with ∇ψ from the
    /// chain rule on the torsion field. At most 1 on convex domains.
    pub fn max_scaled_gradient(&self, field: &ScalarField, max_point: &MaxPoint) -> f64 {
        let m = max_point.value;
        let quad = triangle_degree6();
        let mut worst: f64 = 0.0;
        for e in 0..self.space.num_elements() {
            let g = &self.space.geometry[e];
            let v = self.space.local_values(e, &field.values);
            for q in &quad {
                let val = fem::eval_local(&v, q.bary);
                let gap = m - val;
                if gap <= 1e-6 * m {
                    continue;
                }
                let gr = grad_local(g, &v, q.bary);
                let dpsi = gr[0].hypot(gr[1]) / (2.0 * m.sqrt() * gap.sqrt());
                worst = worst.max(dpsi * (2.0 * m).sqrt());
            }
        }
        worst
    }
}

/// Measured margins of the pointwise torsion inequalities.
#[derive(Clone, Debug, Serialize)]
pub struct TorsionProperties {
    /// max over quadrature points of |∇v|² / (2(max v − v)); at most 1.
    pub gradient_ratio: f64,
    /// max over nodes of (max v − v) / (½|x − x⋆|²); at most 1.
    pub distance_ratio: f64,
    /// max v / (R²/4) with πR² = |Ω_h|; at most 1, equality for disks.
    pub talenti_ratio: f64,
    /// min nodal value over interior nodes (positivity).
    pub min_interior_value: f64,
    /// max |v| over boundary nodes.
    pub max_boundary_value: f64,
}

pub fn torsion_properties(field: &ScalarField, max_point: &MaxPoint) -> TorsionProperties {
    let space = &field.space;
    let m = max_point.value;
    let quad = triangle_degree6();
    let mut gradient_ratio: f64 = 0.0;
    for e in 0..space.num_elements() {
        let g = &space.geometry[e];
        let v = space.local_values(e, &field.values);
        for q in &quad {
            let gap = m - fem::eval_local(&v, q.bary);
            // the ratio is 0/0 at x⋆; skip the round-off core
            if gap <= 1e-4 * m {
                continue;
            }
            let gr = grad_local(g, &v, q.bary);
            gradient_ratio = gradient_ratio.max((gr[0] * gr[0] + gr[1] * gr[1]) / (2.0 * gap));
        }
    }
    let xs = max_point.location;
    let mut distance_ratio: f64 = 0.0;
    let mut min_interior_value = f64::INFINITY;
    let mut max_boundary_value: f64 = 0.0;
    for (i, p) in space.nodes.iter().enumerate() {
        let v = field.values[i];
        if space.on_boundary[i] {
            max_boundary_value = max_boundary_value.max(v.abs());
        } else {
            min_interior_value = min_interior_value.min(v);
        }
        let d2 = (p[0] - xs[0]).powi(2) + (p[1] - xs[1]).powi(2);
        if d2 > (0.5 * space.h()).powi(2) {
            distance_ratio = distance_ratio.max((m - v) / (0.5 * d2));
        }
    }
    let r2 = space.mesh.total_area() / std::f64::consts::PI;
    TorsionProperties {
        gradient_ratio,
        distance_ratio,
        talenti_ratio: m / (0.25 * r2),
        min_interior_value,
        max_boundary_value,
    }
}
