//! Lowest magnetic Neumann eigenvalue of a disk through its angular fibers.
//!
//! For mode `m` the radial problem is
//! `−(r f′)′/r + (m/r − br/2)² f = μ f` on `(0, R)` with weight `r dr`,
//! `f′(R) = 0` and regularity at the origin. Each fiber is discretized by
//! vertex-centred finite volumes on a uniform grid, with the potential
//! integrated exactly over every cell, and the eigenvalue is extrapolated from
//! `n` and `2n` cells.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_RADIAL_POINTS: usize = 4096;
pub const MIN_RADIAL_POINTS: usize = 64;
/// Largest |m| the adaptive mode window may reach.
pub const MAX_MODE: i32 = 64;

const MAX_INVERSE_ITERATIONS: usize = 2000;

/// One angular fiber `(b, m)` on the disk of radius `radius`.
///
/// Negative `b` is accepted so that the reflection `(b, m) ↦ (−b, −m)` can be
/// checked directly; `disk_mu1` itself only takes `b ≥ 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FiberProblem {
    pub b: f64,
    pub m: i32,
    pub radius: f64,
    pub n_points: usize,
}

impl FiberProblem {
    pub fn new(b: f64, m: i32, radius: f64) -> Self {
        FiberProblem { b, m, radius, n_points: DEFAULT_RADIAL_POINTS }
    }

    pub fn with_points(mut self, n_points: usize) -> Self {
        self.n_points = n_points;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.b.is_finite() {
            return Err(Error::Parameter(format!("field intensity must be finite, got {}", self.b)));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::Parameter(format!("disk radius must be positive, got {}", self.radius)));
        }
        if self.n_points < MIN_RADIAL_POINTS {
            return Err(Error::Parameter(format!(
                "radial grid needs at least {MIN_RADIAL_POINTS} points, got {}",
                self.n_points
            )));
        }
        Ok(())
    }
}

/// Radial eigenfunction samples on a uniform grid over `[0, radius]`,
/// normalized so that `∫ f² r dr = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialProfile {
    pub radius: f64,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn constant(radius: f64, n: usize) -> Self {
        let c = (2.0f64).sqrt() / radius;
        RadialProfile { radius, values: vec![c; n + 1] }
    }

    fn spacing(&self) -> f64 {
        self.radius / (self.values.len() - 1) as f64
    }

    /// Four-point stencil `(first index, local coordinate)` around `r`.
    fn stencil(&self, r: f64) -> (usize, f64) {
        let n = self.values.len() - 1;
        let s = (r / self.spacing()).clamp(0.0, n as f64);
        let first = (s.floor() as isize - 1).clamp(0, n as isize - 3) as usize;
        (first, s - first as f64)
    }

    /// Cubic Lagrange interpolation; `r` is clamped to `[0, radius]`.
    pub fn eval(&self, r: f64) -> f64 {
        let (i, t) = self.stencil(r);
        let f = &self.values[i..i + 4];
        let l = [
            -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
            t * (t - 2.0) * (t - 3.0) / 2.0,
            -t * (t - 1.0) * (t - 3.0) / 2.0,
            t * (t - 1.0) * (t - 2.0) / 6.0,
        ];
        (0..4).map(|k| l[k] * f[k]).sum()
    }

    /// Derivative of the cubic interpolant.
    pub fn derivative(&self, r: f64) -> f64 {
        let (i, t) = self.stencil(r);
        let f = &self.values[i..i + 4];
        let d = [
            -(3.0 * t * t - 12.0 * t + 11.0) / 6.0,
            (3.0 * t * t - 10.0 * t + 6.0) / 2.0,
            -(3.0 * t * t - 8.0 * t + 3.0) / 2.0,
            (3.0 * t * t - 6.0 * t + 2.0) / 6.0,
        ];
        (0..4).map(|k| d[k] * f[k]).sum::<f64>() / self.spacing()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberSolution {
    pub problem: FiberProblem,
    /// Extrapolated eigenvalue.
    pub mu: f64,
    pub mu_coarse: f64,
    pub mu_fine: f64,
    pub profile: RadialProfile,
}

/// Lumped `∫_{ra}^{rb} (m/r − br/2)² f² r dr / f(r_i)²` for the cell around
/// node `ri`. The centrifugal term is taken at the node, which keeps the error
/// expansion in even powers of the spacing (an exact cell integral of `m²/r`
/// against a lumped `f²` leaves an `h² log h` term); the field terms are
/// smooth and integrated exactly.
fn cell_potential(m: f64, b: f64, ri: f64, ra: f64, rb: f64) -> f64 {
    let w = 0.5 * (rb * rb - ra * ra);
    let centrifugal = if m == 0.0 { 0.0 } else { m * m / (ri * ri) * w };
    centrifugal - m * b * w + b * b * (rb.powi(4) - ra.powi(4)) / 16.0
}

/// Lowest eigenpair of one fiber on `n` cells: `(μ, f on r_0..r_n)`.
fn solve_grid(b: f64, m: i32, radius: f64, n: usize) -> Result<(f64, Vec<f64>)> {
    let dr = radius / n as f64;
    let r = |i: usize| i as f64 * dr;
    if b == 0.0 && m == 0 {
        return Ok((0.0, vec![1.0; n + 1]));
    }
    let mf = m as f64;
    // for m ≠ 0 the regularity condition pins f(0) = 0
    let first = usize::from(m != 0);
    let size = n + 1 - first;
    let face = |i: usize| (r(i) + 0.5 * dr) / dr; // between i and i + 1
    let mut diag = vec![0.0; size];
    let mut off = vec![0.0; size.saturating_sub(1)];
    let mut weight = vec![0.0; size];
    for k in 0..size {
        let i = k + first;
        let (ra, rb) = (if i == 0 { 0.0 } else { r(i) - 0.5 * dr }, (r(i) + 0.5 * dr).min(radius));
        weight[k] = 0.5 * (rb * rb - ra * ra);
        diag[k] = cell_potential(mf, b, r(i), ra, rb);
        if i > 0 {
            diag[k] += face(i - 1);
        }
        if i < n {
            diag[k] += face(i);
            if k + 1 < size {
                off[k] = -face(i);
            }
        }
    }
    // symmetric form W^{-1/2} A W^{-1/2} and its LDLᵀ factorization
    let sq: Vec<f64> = weight.iter().map(|w| w.sqrt()).collect();
    let sd: Vec<f64> = (0..size).map(|k| diag[k] / weight[k]).collect();
    let so: Vec<f64> = (0..size - 1).map(|k| off[k] / (sq[k] * sq[k + 1])).collect();
    let mut d = vec![0.0; size];
    let mut l = vec![0.0; size.saturating_sub(1)];
    d[0] = sd[0];
    for k in 1..size {
        l[k - 1] = so[k - 1] / d[k - 1];
        d[k] = sd[k] - l[k - 1] * so[k - 1];
    }
    if d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Solver(format!("fiber (b = {b}, m = {m}) operator is not positive definite")));
    }
    let energy = |f: &[f64]| -> f64 {
        let mut e = 0.0;
        for k in 0..size {
            let i = k + first;
            let ra = if i == 0 { 0.0 } else { r(i) - 0.5 * dr };
            e += cell_potential(mf, b, r(i), ra, (r(i) + 0.5 * dr).min(radius)) * f[k] * f[k];
            if i < n {
                e += face(i) * (f[k + 1] - f[k]).powi(2);
            }
        }
        if first == 1 {
            e += face(0) * f[0] * f[0];
        }
        e
    };
    let rayleigh = |x: &[f64]| -> f64 {
        let f: Vec<f64> = x.iter().zip(&sq).map(|(a, s)| a / s).collect();
        let norm: f64 = x.iter().map(|a| a * a).sum();
        energy(&f) / norm
    };

    let mut x = vec![1.0; size];
    let mut mu = rayleigh(&x);
    let mut converged = false;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        // forward and back substitution with L D Lᵀ
        for k in 1..size {
            x[k] -= l[k - 1] * x[k - 1];
        }
        for k in 0..size {
            x[k] /= d[k];
        }
        for k in (0..size - 1).rev() {
            x[k] -= l[k] * x[k + 1];
        }
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        x.iter_mut().for_each(|a| *a /= norm);
        let next = rayleigh(&x);
        let done = (next - mu).abs() <= 1e-14 * next.abs();
        mu = next;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Solver(format!("inverse iteration for fiber (b = {b}, m = {m}) did not converge")));
    }
    let mut f = vec![0.0; n + 1];
    for k in 0..size {
        f[k + first] = x[k] / sq[k];
    }
    let (_, weights) = cell_weights(radius, n);
    let norm = f.iter().zip(&weights).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
    let sign = if f.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    f.iter_mut().for_each(|v| *v *= sign / norm);
    Ok((mu, f))
}

fn cell_weights(radius: f64, n: usize) -> (f64, Vec<f64>) {
    let dr = radius / n as f64;
    let w = (0..=n)
        .map(|i| {
            let ra = if i == 0 { 0.0 } else { (i as f64 - 0.5) * dr };
            let rb = ((i as f64 + 0.5) * dr).min(radius);
            0.5 * (rb * rb - ra * ra)
        })
        .collect();
    (dr, w)
}

/// Lowest eigenvalue of one fiber, extrapolated from `n` and `2n` cells.
pub fn fiber_mu1(problem: &FiberProblem) -> Result<FiberSolution> {
    problem.validate()?;
    let n = problem.n_points;
    let (mu_coarse, _) = solve_grid(problem.b, problem.m, problem.radius, n)?;
    let (mu_fine, values) = solve_grid(problem.b, problem.m, problem.radius, 2 * n)?;
    let mu = (4.0 * mu_fine - mu_coarse) / 3.0;
    let profile = if problem.b == 0.0 && problem.m == 0 {
        RadialProfile::constant(problem.radius, 2 * n)
    } else {
        RadialProfile { radius: problem.radius, values }
    };
    Ok(FiberSolution { problem: *problem, mu, mu_coarse, mu_fine, profile })
}

/// Unextrapolated eigenvalue on exactly `n` cells, for convergence studies.
pub fn fiber_mu1_on_grid(problem: &FiberProblem) -> Result<f64> {
    problem.validate()?;
    Ok(solve_grid(problem.b, problem.m, problem.radius, problem.n_points)?.0)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModeValue {
    pub m: i32,
    pub mu: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiskSpectrum {
    pub b: f64,
    pub radius: f64,
    pub mu1: f64,
    pub minimizing_mode: i32,
    /// Scanned window, ordered by m.
    pub per_mode: Vec<ModeValue>,
    #[serde(skip)]
    pub ground_radial_profile: RadialProfile,
}

impl DiskSpectrum {
    pub fn mode(&self, m: i32) -> Option<f64> {
        self.per_mode.iter().find(|v| v.m == m).map(|v| v.mu)
    }

    pub fn write_modes_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "mu"])?;
        for v in &self.per_mode {
            w.serialize((v.m, v.mu))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    pub n_points: usize,
    /// The scanned window is at least `|m| ≤ min_window`.
    pub min_window: i32,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { n_points: DEFAULT_RADIAL_POINTS, min_window: 0 }
    }
}

/// `μ₁ᵇ(B_R) = min over m of μ₁^{b,m}(R)` with default options.
pub fn disk_mu1(b: f64, radius: f64) -> Result<DiskSpectrum> {
    disk_mu1_with(b, radius, &SpectrumOptions::default())
}

pub fn disk_mu1_with(b: f64, radius: f64, opts: &SpectrumOptions) -> Result<DiskSpectrum> {
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::Parameter(format!("field intensity must be non-negative, got {b}")));
    }
    FiberProblem::new(b, 0, radius).with_points(opts.n_points).validate()?;
    let mut window = ((b * radius * radius / 2.0).ceil() as i32 + 4).max(opts.min_window);
    let mut solved: Vec<FiberSolution> = Vec::new();
    loop {
        if window > MAX_MODE {
            return Err(Error::ModeScan(format!(
                "minimizing mode not interior to |m| ≤ {MAX_MODE} (b = {b}, R = {radius})"
            )));
        }
        let missing: Vec<i32> =
            (-window..=window).filter(|m| !solved.iter().any(|s| s.problem.m == *m)).collect();
        let fresh = missing
            .par_iter()
            .map(|&m| fiber_mu1(&FiberProblem::new(b, m, radius).with_points(opts.n_points)))
            .collect::<Result<Vec<_>>>()?;
        solved.extend(fresh);
        solved.sort_by_key(|s| s.problem.m);
        // ties resolve to the smallest |m|, then the smallest m
        let best = solved
            .iter()
            .min_by(|a, c| {
                a.mu.total_cmp(&c.mu)
                    .then(a.problem.m.abs().cmp(&c.problem.m.abs()))
                    .then(a.problem.m.cmp(&c.problem.m))
            })
            .expect("window is non-empty");
        if best.problem.m.abs() < window {
            return Ok(DiskSpectrum {
                b,
                radius,
                mu1: best.mu,
                minimizing_mode: best.problem.m,
                per_mode: solved.iter().map(|s| ModeValue { m: s.problem.m, mu: s.mu }).collect(),
                ground_radial_profile: best.profile.clone(),
            });
        }
        window += 4;
    }
}

/// `|μ₁ᵇ(B₁) − t²·μ₁^{b/t²}(B_t)| / μ₁ᵇ(B₁)`.
pub fn scaling_check(b: f64, t: f64) -> Result<f64> {
    if !(b > 0.0 && t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("scaling check needs b > 0 and t > 0, got ({b}, {t})")));
    }
    let unit = disk_mu1(b, 1.0)?.mu1;
    let scaled = t * t * disk_mu1(b / (t * t), t)?.mu1;
    Ok((unit - scaled).abs() / unit)
}

/// `μ₁ᵇ(B_R)` along `radii`; every radius must satisfy `bR² < 1`.
pub fn monotonicity_scan_radius(b: f64, radii: &[f64]) -> Result<Vec<f64>> {
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && b * r * r < 1.0)) {
        return Err(Error::Precondition(format!("radius {r} violates bR² < 1 at b = {b}")));
    }
    radii.par_iter().map(|&r| Ok(disk_mu1(b, r)?.mu1)).collect()
}

/// `u(b) = μ₁ᵇ(B_R)/b²` along an increasing grid of small intensities.
pub fn monotonicity_scan_field(radius: f64, fields: &[f64]) -> Result<Vec<f64>> {
    if fields.is_empty() || fields.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::Precondition("field grid must be non-empty and positive".into()));
    }
    if fields.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("field grid must be strictly increasing".into()));
    }
    let top = fields[fields.len() - 1];
    if top * radius * radius >= 1.0 {
        return Err(Error::Precondition(format!("max field {top} violates bR² < 1 at R = {radius}")));
    }
    fields.par_iter().map(|&b| Ok(disk_mu1(b, radius)?.mu1 / (b * b))).collect()
}

/// Extrapolates `u(b)` to `b = 0` by Neville's scheme in the variable `b²`
/// (`u` is even in `b`).
pub fn extrapolate_to_zero_field(fields: &[f64], u: &[f64]) -> f64 {
    assert_eq!(fields.len(), u.len());
    let x: Vec<f64> = fields.iter().map(|b| b * b).collect();
    let mut p = u.to_vec();
    for level in 1..p.len() {
        for i in 0..p.len() - level {
            let j = i + level;
            p[i] = (x[j] * p[i] - x[i] * p[i + 1]) / (x[j] - x[i]);
        }
    }
    p[0]
}

pub fn write_radius_scan_csv<W: std::io::Write>(out: W, radii: &[f64], mu: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["R", "mu1"])?;
    for (r, m) in radii.iter().zip(mu) {
        w.serialize((r, m))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field_scan_csv<W: std::io::Write>(out: W, fields: &[f64], mu: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["b", "mu1", "mu1_over_b2"])?;
    for (b, m) in fields.iter().zip(mu) {
        w.serialize((b, m, m / (b * b)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_ground_state_is_constant() {
        let s = fiber_mu1(&FiberProblem::new(0.0, 0, 1.0)).unwrap();
        assert_eq!(s.mu, 0.0);
        let v0 = s.profile.values[0];
        assert!(s.profile.values.iter().all(|&v| v == v0));
        assert_eq!(disk_mu1(0.0, 2.0).unwrap().mu1, 0.0);
    }

    #[test]
    fn zero_field_first_neumann_mode() {
        // m = 1 at b = 0: the first zero of J₁′ squared
        let s = fiber_mu1(&FiberProblem::new(0.0, 1, 1.0)).unwrap();
        assert!((s.mu - 1.841_183_781_340_659_f64.powi(2)).abs() < 1e-9, "{}", s.mu);
    }

    #[test]
    fn small_field_is_below_quadratic_bound() {
        let s = fiber_mu1(&FiberProblem::new(0.5, 0, 1.0)).unwrap();
        assert!(s.mu > 0.0 && s.mu < 0.03125);
        let m1 = fiber_mu1(&FiberProblem::new(0.5, 1, 1.0)).unwrap();
        assert!(m1.mu > s.mu);
        let d = disk_mu1(0.1, 1.0).unwrap();
        assert!(d.mu1 < 1.25e-3 && d.mu1 > 0.99 * 1.25e-3);
    }

    #[test]
    fn second_order_convergence() {
        let p = FiberProblem::new(0.7, 1, 1.3);
        let mu: Vec<f64> = [200, 400, 800]
            .iter()
            .map(|&n| fiber_mu1_on_grid(&p.with_points(n)).unwrap())
            .collect();
        let ratio = (mu[0] - mu[1]) / (mu[1] - mu[2]);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn reflected_fiber_has_the_same_eigenvalue() {
        for m in -3..=3 {
            let a = fiber_mu1(&FiberProblem::new(0.8, m, 1.0)).unwrap().mu;
            let c = fiber_mu1(&FiberProblem::new(-0.8, -m, 1.0)).unwrap().mu;
            assert!((a - c).abs() <= 1e-12 * a, "m = {m}");
        }
    }

    #[test]
    fn profile_is_normalized_and_interpolates() {
        let s = fiber_mu1(&FiberProblem::new(0.5, 0, 2.0)).unwrap();
        let p = &s.profile;
        let n = p.values.len() - 1;
        let h = p.radius / n as f64;
        let norm: f64 =
            (0..n).map(|i| 0.5 * h * (p.values[i].powi(2) * i as f64 * h + p.values[i + 1].powi(2) * (i + 1) as f64 * h)).sum();
        assert!((norm - 1.0).abs() < 1e-5);
        assert!(p.values.iter().all(|&v| v > 0.0));
        assert!(p.derivative(p.radius).abs() < 1e-3);
        let mid = 0.5 * (p.values[10] + p.values[11]);
        assert!((p.eval(10.5 * h) - mid).abs() < 1e-8);
        assert_eq!(p.eval(0.0), p.values[0]);
    }

    #[test]
    fn strong_field_minimizing_mode_moves_out() {
        let d = disk_mu1(20.0, 1.0).unwrap();
        assert!(d.minimizing_mode > 0);
        assert!(d.minimizing_mode.abs() < d.per_mode.last().unwrap().m);
        assert!(d.mu1 < 20.0);
    }

    #[test]
    fn scans_and_preconditions() {
        assert!(matches!(monotonicity_scan_radius(1.0, &[0.5, 1.2]), Err(Error::Precondition(_))));
        assert!(matches!(monotonicity_scan_field(1.0, &[0.2, 0.1]), Err(Error::Precondition(_))));
        assert_eq!(monotonicity_scan_radius(1.0, &[0.5]).unwrap().len(), 1);
        assert_eq!(scaling_check(0.5, 1.0).unwrap(), 0.0);
        assert!(matches!(disk_mu1(-1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(fiber_mu1(&FiberProblem::new(1.0, 0, 1.0).with_points(10)), Err(Error::Parameter(_))));
    }

    #[test]
    fn neville_recovers_even_polynomial() {
        let b = [0.1, 0.2, 0.4];
        let u: Vec<f64> = b.iter().map(|x: &f64| 0.125 - 0.3 * x * x + 0.05 * x.powi(4)).collect();
        assert!((extrapolate_to_zero_field(&b, &u) - 0.125).abs() < 1e-14);
    }
}
