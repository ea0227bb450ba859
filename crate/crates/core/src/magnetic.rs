//! Magnetic Neumann Laplacian `(−i∇ − A)²` on a triangulated domain with
//! complex quadratic elements, and the real trial quotient built from the
//! torsion function.

use std::collections::HashMap;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::disk::{fiber_mu1, FiberProblem, RadialProfile};
use crate::error::{Error, Result};
use crate::fem::{self, column, grad_local, max_abs_column_sum, shape, shape_gradients, HermitianAssembler, P2Space};
use crate::geometry::{DomainSpec, Point};
use crate::quadrature::{gauss_legendre_unit, triangle_degree6, TriPoint};
use crate::torsion::{MaxPoint, ScalarField};

/// Target backward error `‖Kx − μMx‖ / ((‖K‖ + |μ|‖M‖)‖x‖)` of the eigenpair.
pub const EIGEN_TOLERANCE: f64 = 1e-14;
/// Accepted once the residual stagnates below this level.
pub const EIGEN_TOLERANCE_FLOOR: f64 = 1e-10;
const MAX_EIGEN_ITERATIONS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeKind {
    /// `A = b(∂₂v, −∂₁v)` from the torsion function `v`.
    ScalarPotential,
    /// `A = (b/2)(−(x₂ − c₂), x₁ − c₁)` about the domain centre `c`.
    Symmetric,
}

/// Measured deviations from `curl A = b`, `div A = 0` and `ν·A = 0`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GaugeDiagnostics {
    /// max |curl A − b| / b over elements.
    pub curl_error: f64,
    /// Area-weighted RMS of (curl A − b) / b.
    pub curl_error_rms: f64,
    /// Relative error of `∫ A·∇⊥φ = b ∫ φ` over interior test functions, which
    /// the Galerkin torsion solve makes exact up to its algebraic residual.
    pub curl_weak_error: f64,
    /// max |div A| / b over elements.
    pub div_error: f64,
    /// max |ν·A| over boundary quadrature points, relative to max |A|.
    pub normal_component: f64,
}

/// Vector potential sampled at the quadrature points of every element.
#[derive(Clone, Debug)]
pub struct GaugeField {
    pub kind: GaugeKind,
    pub b: f64,
    pub space: Arc<P2Space>,
    /// `values[e * q + k]` is `A` at quadrature point `k` of element `e`.
    pub values: Vec<Point>,
    pub diagnostics: GaugeDiagnostics,
}

fn quadrature() -> Vec<TriPoint> {
    triangle_degree6()
}

/// Builds the gauge on the torsion field's mesh. The scalar-potential gauge
/// needs the torsion field; the symmetric gauge ignores it.
pub fn build_gauge(
    spec: &DomainSpec,
    space: &Arc<P2Space>,
    b: f64,
    kind: GaugeKind,
    torsion: Option<&ScalarField>,
) -> Result<GaugeField> {
    if !b.is_finite() {
        return Err(Error::Parameter(format!("field intensity must be finite, got {b}")));
    }
    let quad = quadrature();
    let nq = quad.len();
    let mut values = Vec::with_capacity(space.num_elements() * nq);
    let mut diagnostics = GaugeDiagnostics::default();
    match kind {
        GaugeKind::ScalarPotential => {
            let torsion = torsion.ok_or_else(|| {
                Error::Argument("the scalar-potential gauge needs a torsion field".into())
            })?;
            if torsion.space.fingerprint() != space.fingerprint() {
                return Err(Error::Argument("torsion field was solved on a different mesh".into()));
            }
            for e in 0..space.num_elements() {
                let g = &space.geometry[e];
                let v = space.local_values(e, &torsion.values);
                for q in &quad {
                    let gr = grad_local(g, &v, q.bary);
                    values.push([b * gr[1], -b * gr[0]]);
                }
                let hs = fem::hessian_local(g, &v);
                if b != 0.0 {
                    let curl = -b * (hs[0][0] + hs[1][1]);
                    let div = b * (hs[0][1] - hs[1][0]);
                    let rel = (curl - b).abs() / b.abs();
                    diagnostics.curl_error = diagnostics.curl_error.max(rel);
                    diagnostics.curl_error_rms += g.area * rel * rel;
                    diagnostics.div_error = diagnostics.div_error.max(div.abs() / b.abs());
                }
            }
            diagnostics.curl_error_rms = (diagnostics.curl_error_rms / space.mesh.total_area()).sqrt();
            diagnostics.curl_weak_error = torsion.residual;
            diagnostics.normal_component = normal_component(space, &torsion.values, b);
        }
        GaugeKind::Symmetric => {
            let c = spec.center;
            for e in 0..space.num_elements() {
                for q in &quad {
                    let p = space.point_at(e, q.bary);
                    values.push(symmetric_gauge(b, c, p));
                }
            }
            // curl and div are exact; ν·A is reported for completeness
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for be in &space.mesh.boundary_edges {
                let [i, j] = be.vertices;
                for &(s, _) in &gauss_legendre_unit(3) {
                    let (a, bb) = (space.nodes[i], space.nodes[j]);
                    let p = [a[0] + s * (bb[0] - a[0]), a[1] + s * (bb[1] - a[1])];
                    let av = symmetric_gauge(b, c, p);
                    worst = worst.max((be.normal[0] * av[0] + be.normal[1] * av[1]).abs());
                    scale = scale.max(av[0].hypot(av[1]));
                }
            }
            diagnostics.normal_component = if scale > 0.0 { worst / scale } else { 0.0 };
        }
    }
    Ok(GaugeField { kind, b, space: space.clone(), values, diagnostics })
}

fn symmetric_gauge(b: f64, c: Point, p: Point) -> Point {
    [-0.5 * b * (p[1] - c[1]), 0.5 * b * (p[0] - c[0])]
}

/// `max |ν·A| / max |A|` on boundary edges for `A = b∇⊥v`.
fn normal_component(space: &P2Space, v: &[f64], b: f64) -> f64 {
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, el) in space.elements.iter().enumerate() {
        for (a, c) in [(0, 1), (1, 2), (2, 0)] {
            let (i, j) = (el[a], el[c]);
            owner.insert((i.min(j), i.max(j)), e);
        }
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for be in &space.mesh.boundary_edges {
        let [i, j] = be.vertices;
        let Some(&e) = owner.get(&(i.min(j), i.max(j))) else { continue };
        let local = space.local_values(e, v);
        for &(s, _) in &gauss_legendre_unit(3) {
            let (a, c) = (space.nodes[i], space.nodes[j]);
            let p = [a[0] + s * (c[0] - a[0]), a[1] + s * (c[1] - a[1])];
            let gr = grad_local(&space.geometry[e], &local, space.bary_of(e, p));
            let av = [b * gr[1], -b * gr[0]];
            worst = worst.max((be.normal[0] * av[0] + be.normal[1] * av[1]).abs());
            scale = scale.max(av[0].hypot(av[1]));
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        0.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenResult {
    pub mu1: f64,
    /// Nodal values, unit L² norm, largest-modulus entry real positive.
    #[serde(skip)]
    pub eigenvector: Vec<c64>,
    /// `‖Kx − μMx‖ / ‖Kx‖`.
    pub residual: f64,
    pub iterations: usize,
    pub mesh_h: f64,
}

impl EigenResult {
    /// `(x, y, Re u, Im u, |u|)` rows for every P2 node.
    pub fn write_csv<W: std::io::Write>(&self, space: &P2Space, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "re", "im", "abs"])?;
        for (p, u) in space.nodes.iter().zip(&self.eigenvector) {
            w.serialize((p[0], p[1], u.re, u.im, u.norm()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Form and mass matrices of the magnetic Neumann problem.
pub struct MagneticSystem {
    pub form: faer::sparse::SparseColMat<usize, c64>,
    pub mass: faer::sparse::SparseColMat<usize, c64>,
}

/// Assembles `K_ij = ∫ ∇φi·∇φj + |A|²φiφj + i(φi A·∇φj − φj A·∇φi)` and the
/// mass matrix; both are exactly Hermitian by construction.
pub fn assemble(gauge: &GaugeField) -> Result<MagneticSystem> {
    let space = &*gauge.space;
    let n = space.num_nodes();
    let quad = quadrature();
    let nq = quad.len();
    let mut form = HermitianAssembler::<c64>::new(n, 21 * space.num_elements());
    let mut mass = HermitianAssembler::<c64>::new(n, 21 * space.num_elements());
    for (e, nodes) in space.elements.iter().enumerate() {
        let g = &space.geometry[e];
        let mut ke = [[c64::new(0.0, 0.0); 6]; 6];
        let mut me = [[0.0f64; 6]; 6];
        for (k, q) in quad.iter().enumerate() {
            let w = q.weight * g.area;
            let a = gauge.values[e * nq + k];
            let a2 = a[0] * a[0] + a[1] * a[1];
            let phi = shape(q.bary);
            let grads = shape_gradients(g, q.bary);
            let adg: Vec<f64> = grads.iter().map(|gr| a[0] * gr[0] + a[1] * gr[1]).collect();
            for i in 0..6 {
                for j in i..6 {
                    let re = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1] + a2 * phi[i] * phi[j];
                    let im = phi[i] * adg[j] - phi[j] * adg[i];
                    ke[i][j] += c64::new(w * re, w * im);
                    me[i][j] += w * phi[i] * phi[j];
                }
            }
        }
        for i in 0..6 {
            for j in i..6 {
                form.add(nodes[i], nodes[j], ke[i][j]);
                mass.add(nodes[i], nodes[j], c64::new(me[i][j], 0.0));
            }
        }
    }
    let system = MagneticSystem { form: form.build()?, mass: mass.build()? };
    if !fem::is_exactly_hermitian(&system.form) || !fem::is_exactly_hermitian(&system.mass) {
        return Err(Error::Internal("assembled magnetic form is not Hermitian".into()));
    }
    Ok(system)
}

fn dot(a: &Mat<c64>, b: &Mat<c64>) -> c64 {
    let mut s = c64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        s += a[(i, 0)].conj() * b[(i, 0)];
    }
    s
}

/// Smallest eigenvalue of the magnetic Neumann problem by inverse iteration
/// with zero shift, started from the constant vector.
pub fn solve_mu1(gauge: &GaugeField) -> Result<EigenResult> {
    let space = &*gauge.space;
    let n = space.num_nodes();
    let system = assemble(gauge)?;
    let ones = Mat::<c64>::from_fn(n, 1, |_, _| c64::new(1.0, 0.0));
    if gauge.b == 0.0 {
        let norm2 = dot(&ones, &(&system.mass * &ones)).re;
        let scale = 1.0 / norm2.sqrt();
        return Ok(EigenResult {
            mu1: 0.0,
            eigenvector: vec![c64::new(scale, 0.0); n],
            residual: 0.0,
            iterations: 0,
            mesh_h: space.h(),
        });
    }
    let llt = system
        .form
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Solver(format!("magnetic form factorization failed: {e:?}")))?;
    let k_norm = max_abs_column_sum(&system.form, |z| z.norm());
    let m_norm = max_abs_column_sum(&system.mass, |z| z.norm());
    let mut x = ones;
    let mut mu = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_EIGEN_ITERATIONS {
        let mx = &system.mass * &x;
        let mut y = mx;
        llt.solve_in_place(y.as_mut());
        let my = &system.mass * &y;
        let norm = dot(&y, &my).re.sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Solver("inverse iteration lost the iterate".into()));
        }
        x = y * faer::Scale(c64::new(1.0 / norm, 0.0));
        let kx = &system.form * &x;
        let mx = &system.mass * &x;
        mu = dot(&x, &kx).re;
        let r = &kx - &mx * faer::Scale(c64::new(mu, 0.0));
        let previous = residual;
        residual = r.norm_max() / ((k_norm + mu.abs() * m_norm) * x.norm_max());
        let stagnated = residual < EIGEN_TOLERANCE_FLOOR && residual > 0.5 * previous;
        if residual < EIGEN_TOLERANCE || stagnated {
            let eigenvector = fix_phase((0..n).map(|i| x[(i, 0)]).collect());
            return Ok(EigenResult { mu1: mu, eigenvector, residual, iterations: it, mesh_h: space.h() });
        }
    }
    Err(Error::Solver(format!(
        "inverse iteration did not converge (μ ≈ {mu:.6e}, residual {residual:.2e})"
    )))
}

fn fix_phase(mut v: Vec<c64>) -> Vec<c64> {
    let (mut best, mut big) = (0, -1.0);
    for (i, z) in v.iter().enumerate() {
        if z.norm() > big {
            big = z.norm();
            best = i;
        }
    }
    if big > 0.0 {
        let phase = v[best].conj() / big;
        v.iter_mut().for_each(|z| *z *= phase);
        v[best] = c64::new(v[best].re, 0.0);
    }
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeComparison {
    pub mu_scalar_potential: f64,
    pub mu_symmetric: f64,
    /// `|μ(scalar potential) − μ(symmetric)| / μ(symmetric)`.
    pub discrepancy: f64,
}

/// Solves in both gauges on the torsion field's mesh.
pub fn gauge_invariance_check(spec: &DomainSpec, torsion: &ScalarField, b: f64) -> Result<GaugeComparison> {
    let space = &torsion.space;
    let scalar = solve_mu1(&build_gauge(spec, space, b, GaugeKind::ScalarPotential, Some(torsion))?)?;
    let symmetric = solve_mu1(&build_gauge(spec, space, b, GaugeKind::Symmetric, None)?)?;
    let discrepancy = if symmetric.mu1 == 0.0 {
        scalar.mu1.abs()
    } else {
        (scalar.mu1 - symmetric.mu1).abs() / symmetric.mu1
    };
    Ok(GaugeComparison { mu_scalar_potential: scalar.mu1, mu_symmetric: symmetric.mu1, discrepancy })
}

/// The optimal radial profile for the trial quotient: the `m = 0` ground
/// state of the unit disk at field `4b·max v`.
pub fn optimal_trial_profile(b: f64, max_point: &MaxPoint, n_points: usize) -> Result<RadialProfile> {
    Ok(fiber_mu1(&FiberProblem::new(4.0 * b * max_point.value, 0, 1.0).with_points(n_points))?.profile)
}

/// `(∫|∇u|² + b²∫|∇v|²u²) / ∫u²` for the real trial function
/// `u(x) = f(ψ(x))`, `ψ = √(1 − v/max v)`; `ψ ∈ [0, 1]` is mapped onto the
/// profile's interval `[0, R_f]`.
pub fn trial_rayleigh(torsion: &ScalarField, max_point: &MaxPoint, b: f64, profile: &RadialProfile) -> Result<f64> {
    if profile.values.iter().all(|&f| f == 0.0) {
        return Err(Error::Argument("trial profile vanishes identically".into()));
    }
    let space = &*torsion.space;
    let m = max_point.value;
    let scale = profile.radius;
    let quad = triangle_degree6();
    let (mut num, mut den) = (0.0, 0.0);
    for e in 0..space.num_elements() {
        let g = &space.geometry[e];
        let v = space.local_values(e, &torsion.values);
        for q in &quad {
            let w = q.weight * g.area;
            let val = fem::eval_local(&v, q.bary);
            let psi = (1.0 - val / m).clamp(0.0, 1.0).sqrt();
            let gr = grad_local(g, &v, q.bary);
            let grad2 = gr[0] * gr[0] + gr[1] * gr[1];
            let u = profile.eval(scale * psi);
            // ∇u = f′(ψ)∇ψ with ∇ψ = −∇v / (2 max v ψ)
            let du2 = if psi > 0.0 {
                let fp = scale * profile.derivative(scale * psi);
                fp * fp * grad2 / (4.0 * m * m * psi * psi)
            } else {
                0.0
            };
            num += w * (du2 + b * b * grad2 * u * u);
            den += w * u * u;
        }
    }
    Ok(num / den)
}

/// `ScalarField` of a closed-form function sampled at the P2 nodes.
pub fn interpolate(space: &Arc<P2Space>, f: impl Fn(Point) -> f64) -> ScalarField {
    let values = space.nodes.iter().map(|&p| f(p)).collect();
    ScalarField { space: space.clone(), values, residual: 0.0 }
}

/// Residual of `x` as an eigenvector, for checks outside the solver.
pub fn eigen_residual(system: &MagneticSystem, x: &[c64], mu: f64) -> f64 {
    let x = column(x);
    let kx = &system.form * &x;
    let r = &kx - &system.mass * &x * faer::Scale(c64::new(mu, 0.0));
    let k_norm = max_abs_column_sum(&system.form, |z| z.norm());
    let m_norm = max_abs_column_sum(&system.mass, |z| z.norm());
    r.norm_max() / ((k_norm + mu.abs() * m_norm) * x.norm_max())
}
