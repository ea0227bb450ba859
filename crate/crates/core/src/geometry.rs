//! Analytic description of bounded convex planar domains.
//!
//! Every supported family is star-shaped about its center, so the boundary is
//! handled uniformly as a polar curve `θ ↦ center + r(θ)(cos θ, sin θ)`.

use std::f64::consts::{PI, TAU};

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;

pub type Point = [f64; 2];

/// Relative tolerance of the cross-product convexity test.
pub const CONVEXITY_REL_TOL: f64 = 1e-12;

/// Domain family plus parameters. Lengths are dimensionless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainKind {
    Disk {
        radius: f64,
    },
    Ellipse {
        alpha: f64,
        beta: f64,
    },
    /// `|x|^p + |y|^p < a^p` with even `p ≥ 4`.
    Superellipse {
        power: u32,
        half_width: f64,
    },
    /// Closed convex curve through `(angle, radius)` samples, interpolated by
    /// a periodic cubic spline in the angle.
    #[serde(rename = "radial")]
    RadialCurve {
        samples: Vec<[f64; 2]>,
    },
}

/// A domain: family, parameters and center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    #[serde(default)]
    pub center: Point,
}

impl DomainSpec {
    pub fn disk(radius: f64) -> Self {
        Self { kind: DomainKind::Disk { radius }, center: [0.0; 2] }
    }

    pub fn ellipse(alpha: f64, beta: f64) -> Self {
        Self { kind: DomainKind::Ellipse { alpha, beta }, center: [0.0; 2] }
    }

    pub fn superellipse(power: u32, half_width: f64) -> Self {
        Self { kind: DomainKind::Superellipse { power, half_width }, center: [0.0; 2] }
    }

    pub fn radial(samples: Vec<[f64; 2]>) -> Self {
        Self { kind: DomainKind::RadialCurve { samples }, center: [0.0; 2] }
    }

    pub fn with_center(mut self, center: Point) -> Self {
        self.center = center;
        self
    }

    /// The builtin validation set: unit disk, two ellipses and the quartic
    /// superellipse.
    pub fn builtin_set() -> Vec<(&'static str, DomainSpec)> {
        vec![
            ("disk(1)", DomainSpec::disk(1.0)),
            ("ellipse(2,1)", DomainSpec::ellipse(2.0, 1.0)),
            ("ellipse(1.2,1/1.2)", DomainSpec::ellipse(1.2, 1.0 / 1.2)),
            ("superellipse(4,1)", DomainSpec::superellipse(4, 1.0)),
        ]
    }

    /// Reads a domain from its JSON description.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DomainSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Uniformly dilated copy (lengths multiplied by `factor`, center fixed).
    pub fn scaled(&self, factor: f64) -> Self {
        let kind = match &self.kind {
            DomainKind::Disk { radius } => DomainKind::Disk { radius: radius * factor },
            DomainKind::Ellipse { alpha, beta } => {
                DomainKind::Ellipse { alpha: alpha * factor, beta: beta * factor }
            }
            DomainKind::Superellipse { power, half_width } => {
                DomainKind::Superellipse { power: *power, half_width: half_width * factor }
            }
            DomainKind::RadialCurve { samples } => DomainKind::RadialCurve {
                samples: samples.iter().map(|&[a, r]| [a, r * factor]).collect(),
            },
        };
        Self { kind, center: self.center }
    }

    /// Copy dilated so that its area equals `target`.
    pub fn scaled_to_area(&self, target: f64) -> Result<Self> {
        let a = area(self)?;
        Ok(self.scaled((target / a).sqrt()))
    }

    /// Checks parameters and builds the boundary curve.
    pub fn validate(&self) -> Result<()> {
        self.boundary().map(|_| ())
    }

    pub fn boundary(&self) -> Result<Boundary> {
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::Parameter("center must be finite".into()));
        }
        let curve = match &self.kind {
            DomainKind::Disk { radius } => {
                positive("radius", *radius)?;
                Curve::Disk { radius: *radius }
            }
            DomainKind::Ellipse { alpha, beta } => {
                positive("alpha", *alpha)?;
                positive("beta", *beta)?;
                Curve::Ellipse { alpha: *alpha, beta: *beta }
            }
            DomainKind::Superellipse { power, half_width } => {
                positive("half_width", *half_width)?;
                if *power < 4 || power % 2 != 0 {
                    return Err(Error::Parameter(format!(
                        "superellipse power must be an even integer >= 4, got {power}"
                    )));
                }
                Curve::Superellipse { power: *power as i32, half_width: *half_width }
            }
            DomainKind::RadialCurve { samples } => {
                Curve::Radial(PeriodicSpline::from_samples(samples)?)
            }
        };
        let boundary = Boundary { curve, center: self.center };
        if let Curve::Radial(spline) = &boundary.curve {
            // sampled polygon and the interpolated curve must both be strictly convex
            let pts: Vec<Point> = spline
                .knots
                .iter()
                .zip(&spline.values)
                .map(|(&t, &r)| [r * t.cos(), r * t.sin()])
                .collect();
            if !is_convex_polygon(&pts, CONVEXITY_REL_TOL) {
                return Err(Error::Parameter("radial samples do not form a convex polygon".into()));
            }
            let fine = boundary.sample_uniform_angle(4 * pts.len().max(512));
            if !is_convex_polygon(&fine, CONVEXITY_REL_TOL) {
                return Err(Error::Parameter(
                    "interpolated radial curve is not strictly convex".into(),
                ));
            }
        }
        Ok(boundary)
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite and positive, got {x}")))
    }
}

#[derive(Clone, Debug)]
enum Curve {
    Disk { radius: f64 },
    Ellipse { alpha: f64, beta: f64 },
    Superellipse { power: i32, half_width: f64 },
    Radial(PeriodicSpline),
}

/// Validated boundary curve in polar form about the domain center.
#[derive(Clone, Debug)]
pub struct Boundary {
    curve: Curve,
    center: Point,
}

impl Boundary {
    pub fn center(&self) -> Point {
        self.center
    }

    /// Polar radius `r(θ)` and its derivative `r'(θ)`.
    pub fn radius_with_derivative(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        match &self.curve {
            Curve::Disk { radius } => (*radius, 0.0),
            Curve::Ellipse { alpha, beta } => {
                let q = beta * beta * c * c + alpha * alpha * s * s;
                let r = alpha * beta / q.sqrt();
                let dq = 2.0 * (alpha * alpha - beta * beta) * s * c;
                (r, -0.5 * r * dq / q)
            }
            Curve::Superellipse { power, half_width } => {
                let p = *power;
                let q = c.powi(p) + s.powi(p);
                let r = half_width * q.powf(-1.0 / p as f64);
                let dq = p as f64 * (s.powi(p - 1) * c - c.powi(p - 1) * s);
                (r, -r * dq / (p as f64 * q))
            }
            Curve::Radial(spline) => spline.eval(theta),
        }
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.radius_with_derivative(theta).0
    }

    pub fn point(&self, theta: f64) -> Point {
        let r = self.radius(theta);
        [self.center[0] + r * theta.cos(), self.center[1] + r * theta.sin()]
    }

    fn speed(&self, theta: f64) -> f64 {
        let (r, dr) = self.radius_with_derivative(theta);
        r.hypot(dr)
    }

    /// Boundary points at equally spaced angles, counter-clockwise.
    pub fn sample_uniform_angle(&self, n: usize) -> Vec<Point> {
        (0..n).map(|k| self.point(TAU * k as f64 / n as f64)).collect()
    }

    fn arclength_table(&self, panels: usize) -> Vec<f64> {
        let gl = gauss_legendre_unit(5);
        let dt = TAU / panels as f64;
        let mut cum = Vec::with_capacity(panels + 1);
        cum.push(0.0);
        let mut s = 0.0;
        for k in 0..panels {
            let t0 = k as f64 * dt;
            s += gl.iter().map(|&(x, w)| w * self.speed(t0 + x * dt)).sum::<f64>() * dt;
            cum.push(s);
        }
        cum
    }

    pub fn perimeter(&self) -> f64 {
        *self.arclength_table(4096).last().unwrap()
    }

    /// `n` boundary points equidistributed in arclength, counter-clockwise,
    /// starting at angle 0. Each point lies on the analytic curve.
    pub fn sample_arclength(&self, n: usize) -> Vec<Point> {
        let panels = (8 * n).max(4096);
        let cum = self.arclength_table(panels);
        let total = cum[panels];
        let dt = TAU / panels as f64;
        let mut out = Vec::with_capacity(n);
        let mut panel = 0;
        for k in 0..n {
            let target = total * k as f64 / n as f64;
            while panel + 1 < panels && cum[panel + 1] < target {
                panel += 1;
            }
            let (s0, s1) = (cum[panel], cum[panel + 1]);
            let mut theta = (panel as f64 + (target - s0) / (s1 - s0)) * dt;
            // Newton on s(θ) = target within the panel
            for _ in 0..3 {
                let t0 = panel as f64 * dt;
                let gl = gauss_legendre_unit(5);
                let s_theta = s0
                    + gl.iter().map(|&(x, w)| w * self.speed(t0 + x * (theta - t0))).sum::<f64>()
                        * (theta - t0);
                theta -= (s_theta - target) / self.speed(theta);
            }
            out.push(self.point(theta));
        }
        out
    }

    /// Radius of the largest disk about the center contained in the domain.
    pub fn inradius_about_center(&self) -> f64 {
        let n = 2048;
        let pts = self.sample_uniform_angle(n);
        let mut best = f64::INFINITY;
        for k in 0..n {
            let a = pts[k];
            let b = pts[(k + 1) % n];
            best = best.min(segment_distance(self.center, a, b));
        }
        best
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Strict convexity test for a closed polygon: all cross products of
/// consecutive edge vectors share one sign and exceed `rel_tol·|e₁||e₂|`.
pub fn is_convex_polygon(points: &[Point], rel_tol: f64) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0;
    for k in 0..n {
        let a = points[k];
        let b = points[(k + 1) % n];
        let c = points[(k + 2) % n];
        let e1 = [b[0] - a[0], b[1] - a[1]];
        let e2 = [c[0] - b[0], c[1] - b[1]];
        let cross = e1[0] * e2[1] - e1[1] * e2[0];
        let scale = e1[0].hypot(e1[1]) * e2[0].hypot(e2[1]);
        if cross.abs() <= rel_tol * scale {
            return false;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}

/// Exact area for disks and ellipses, high-order boundary quadrature otherwise.
pub fn area(spec: &DomainSpec) -> Result<f64> {
    let boundary = spec.boundary()?;
    Ok(match &boundary.curve {
        Curve::Disk { radius } => PI * radius * radius,
        Curve::Ellipse { alpha, beta } => PI * alpha * beta,
        // r² is smooth and periodic: the trapezoid rule converges spectrally
        Curve::Superellipse { .. } => {
            let n = 4096;
            let h = TAU / n as f64;
            0.5 * h * (0..n).map(|k| boundary.radius(k as f64 * h).powi(2)).sum::<f64>()
        }
        Curve::Radial(spline) => spline.integrate_square() * 0.5,
    })
}

/// Invariance under `(x, y) ↦ (−x, y)` and `(x, y) ↦ (y, x)` about the center.
pub fn has_dihedral_symmetry(spec: &DomainSpec) -> bool {
    match &spec.kind {
        DomainKind::Disk { .. } => true,
        DomainKind::Ellipse { alpha, beta } => alpha == beta,
        DomainKind::Superellipse { .. } => true,
        DomainKind::RadialCurve { .. } => {
            let Ok(boundary) = spec.boundary() else { return false };
            let n = 720;
            let tol = 1e-9
                * (0..n).map(|k| boundary.radius(TAU * k as f64 / n as f64)).fold(0.0, f64::max);
            (0..n).all(|k| {
                let t = TAU * k as f64 / n as f64;
                let r = boundary.radius(t);
                // reflections act on polar angle as θ ↦ π − θ and θ ↦ π/2 − θ
                (r - boundary.radius(PI - t)).abs() <= tol
                    && (r - boundary.radius(0.5 * PI - t)).abs() <= tol
            })
        }
    }
}

/// Periodic cubic spline `r(θ)` with period 2π.
#[derive(Clone, Debug)]
struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl PeriodicSpline {
    fn from_samples(samples: &[[f64; 2]]) -> Result<Self> {
        if samples.len() < 6 {
            return Err(Error::Parameter(format!(
                "radial curve needs at least 6 samples, got {}",
                samples.len()
            )));
        }
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
        for &[a, r] in samples {
            if !a.is_finite() {
                return Err(Error::Parameter("radial sample angle must be finite".into()));
            }
            positive("radial sample radius", r)?;
            pts.push((a.rem_euclid(TAU), r));
        }
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        for k in 0..pts.len() {
            let next = if k + 1 < pts.len() { pts[k + 1].0 } else { pts[0].0 + TAU };
            if next - pts[k].0 <= 1e-12 {
                return Err(Error::Parameter("radial sample angles must be distinct".into()));
            }
        }
        let n = pts.len();
        let knots: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let values: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let gap = |k: usize| if k + 1 < n { knots[k + 1] - knots[k] } else { knots[0] + TAU - knots[k] };
        // cyclic tridiagonal system for the second derivatives
        let mut a = Mat::<f64>::zeros(n, n);
        let mut rhs = Mat::<f64>::zeros(n, 1);
        for k in 0..n {
            let prev = (k + n - 1) % n;
            let next = (k + 1) % n;
            let (hp, hn) = (gap(prev), gap(k));
            a[(k, prev)] += hp / 6.0;
            a[(k, k)] += (hp + hn) / 3.0;
            a[(k, next)] += hn / 6.0;
            rhs[(k, 0)] = (values[next] - values[k]) / hn - (values[k] - values[prev]) / hp;
        }
        let sol = a.partial_piv_lu().solve(&rhs);
        let second = (0..n).map(|k| sol[(k, 0)]).collect();
        Ok(Self { knots, values, second })
    }

    fn segment(&self, theta: f64) -> (usize, f64, f64) {
        let n = self.knots.len();
        let t = theta.rem_euclid(TAU);
        // segment k spans [knots[k], knots[k+1]) with wrap-around
        let k = match self.knots.partition_point(|&x| x <= t) {
            0 => n - 1,
            p => p - 1,
        };
        let start = self.knots[k];
        let len = if k + 1 < n { self.knots[k + 1] - start } else { self.knots[0] + TAU - start };
        let offset = (t - start).rem_euclid(TAU);
        (k, offset, len)
    }

    fn eval(&self, theta: f64) -> (f64, f64) {
        let n = self.knots.len();
        let (k, x, h) = self.segment(theta);
        let j = (k + 1) % n;
        let (y0, y1) = (self.values[k], self.values[j]);
        let (m0, m1) = (self.second[k], self.second[j]);
        let a = (h - x) / h;
        let b = x / h;
        let val = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let der = (y1 - y0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (val, der)
    }

    /// `∫₀^{2π} r(θ)² dθ`, exact for the piecewise cubic.
    fn integrate_square(&self) -> f64 {
        let gl = gauss_legendre_unit(4);
        let n = self.knots.len();
        (0..n)
            .map(|k| {
                let start = self.knots[k];
                let h = if k + 1 < n { self.knots[k + 1] - start } else { self.knots[0] + TAU - start };
                gl.iter().map(|&(x, w)| w * self.eval(start + x * h).0.powi(2)).sum::<f64>() * h
            })
            .sum()
    }
}
