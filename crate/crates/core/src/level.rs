//! Level curves `A_r = {v = max v·(1 − r²)}` of the quadratic torsion
//! interpolant, the enclosed areas `|Ω_r|`, and the line integrals that give
//! the functionals `F` and `G`.
//!
//! Each element cut by the level is split into `K²` similar sub-triangles.
//! Crossings on sub-edges are exact roots of the quadratic restricted to the
//! edge; crossings on element edges are computed from the shared edge trace in
//! a canonical orientation, so neighbouring elements produce bitwise identical
//! points and the closure check is exact. Between two crossings the curve is a
//! graph over the chord, and the offset is recovered pointwise by solving the
//! element quadratic along the chord normal.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{eval_local, grad_local, hessian_local, P2Space};
use crate::geometry::Point;
use crate::quadrature::gauss_legendre_unit;
use crate::torsion::{MaxPoint, ScalarField};

/// Uniform grid of `n` radii on `[lo, hi] ⊂ (0, 1)`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct RadiusGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for RadiusGrid {
    fn default() -> Self {
        RadiusGrid { lo: 0.02, hi: 0.995, n: 400 }
    }
}

impl RadiusGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi < 1.0) {
            return Err(Error::Parameter(format!(
                "radius grid needs 0 < lo < hi < 1, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.n < 3 {
            return Err(Error::Parameter(format!("radius grid needs at least 3 points, got {}", self.n)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.hi } else { self.lo + i as f64 * step }).collect()
    }
}

/// Measurements of one level curve.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LevelCurve {
    pub length: f64,
    /// Area of the superlevel set enclosed by the curve.
    pub area: f64,
    /// ∫ 1/|∇v| over the curve.
    pub inv_grad: f64,
    /// ∫ |∇v| over the curve.
    pub grad: f64,
    pub segments: usize,
    pub components: usize,
    /// Segments whose quadrature met |∇v| below the cut-off.
    pub excluded: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum LatticeKey {
    Vertex(usize),
    /// Lattice point `step` of `K` along the edge from the lower vertex id.
    Edge(usize, usize, usize),
    /// Interior lattice point `(i, j)` of an element.
    Interior(usize, usize, usize),
}

type CrossingKey = (LatticeKey, LatticeKey);

#[derive(Clone, Copy, Debug)]
struct LatticePoint {
    key: LatticeKey,
    value: f64,
    pos: Point,
    /// Barycentric lattice coordinates, summing to `K`.
    coords: [usize; 3],
}

/// Value of the edge quadratic with end values `va`, `vb` and midpoint value
/// `vm` at parameter `t ∈ [0, 1]`.
fn edge_trace(va: f64, vm: f64, vb: f64, t: f64) -> f64 {
    va * (1.0 - t) * (1.0 - 2.0 * t) + vm * 4.0 * t * (1.0 - t) + vb * t * (2.0 * t - 1.0)
}

/// Root of `edge_trace(va, vm, vb, t) = c` in `[t0, t1]`, given a sign change.
fn edge_root(va: f64, vm: f64, vb: f64, c: f64, t0: f64, t1: f64) -> f64 {
    let a2 = 2.0 * (va - 2.0 * vm + vb);
    let a1 = -3.0 * va + 4.0 * vm - vb;
    let a0 = va - c;
    let slack = 1e-12;
    let inside = |t: f64| t >= t0 - slack && t <= t1 + slack;
    let candidates: [f64; 2] = if a2.abs() <= 1e-14 * (a1.abs() + a0.abs()) {
        [-a0 / a1, f64::NAN]
    } else {
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc < 0.0 {
            [f64::NAN, f64::NAN]
        } else {
            let q = -0.5 * (a1 + a1.signum() * disc.sqrt());
            [q / a2, if q != 0.0 { a0 / q } else { f64::NAN }]
        }
    };
    if let Some(t) = candidates.iter().copied().find(|&t| t.is_finite() && inside(t)) {
        return t.clamp(t0, t1);
    }
    // round-off fallback: bisection on the sign change
    let f = |t: f64| edge_trace(va, vm, vb, t) - c;
    let (mut lo, mut hi) = (t0, t1);
    let flo = f(lo) >= 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Crossing {
    key: CrossingKey,
    pos: Point,
}

struct Segment {
    element: usize,
    start: Crossing,
    end: Crossing,
}

struct ElementCutter<'a> {
    space: &'a P2Space,
    values: &'a [f64],
    element: usize,
    local: [f64; 6],
    k: usize,
}

impl ElementCutter<'_> {
    fn global_vertex(&self, local: usize) -> usize {
        self.space.elements[self.element][local]
    }

    /// Midpoint node of the element edge between local vertices `a` and `b`.
    fn midpoint_node(&self, a: usize, b: usize) -> usize {
        let slot = match (a.min(b), a.max(b)) {
            (0, 1) => 3,
            (1, 2) => 4,
            _ => 5,
        };
        self.space.elements[self.element][slot]
    }

    fn lattice(&self, i: usize, j: usize) -> LatticePoint {
        let k = self.k;
        let coords = [k - i - j, i, j];
        let nonzero: Vec<usize> = (0..3).filter(|&s| coords[s] > 0).collect();
        match nonzero.len() {
            1 => {
                let g = self.global_vertex(nonzero[0]);
                LatticePoint {
                    key: LatticeKey::Vertex(g),
                    value: self.values[g],
                    pos: self.space.nodes[g],
                    coords,
                }
            }
            2 => {
                let (p, q) = (nonzero[0], nonzero[1]);
                let (gp, gq) = (self.global_vertex(p), self.global_vertex(q));
                let (lo, hi, hi_local) = if gp < gq { (gp, gq, q) } else { (gq, gp, p) };
                let step = coords[hi_local];
                let t = step as f64 / k as f64;
                let vm = self.values[self.midpoint_node(p, q)];
                let (a, b) = (self.space.nodes[lo], self.space.nodes[hi]);
                LatticePoint {
                    key: LatticeKey::Edge(lo, hi, step),
                    value: edge_trace(self.values[lo], vm, self.values[hi], t),
                    pos: [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
                    coords,
                }
            }
            _ => {
                let l = coords.map(|c| c as f64 / k as f64);
                LatticePoint {
                    key: LatticeKey::Interior(self.element, i, j),
                    value: eval_local(&self.local, l),
                    pos: self.space.point_at(self.element, l),
                    coords,
                }
            }
        }
    }

    /// Crossing of level `c` on the sub-edge `p–q`, where exactly one end is
    /// inside.
    fn crossing(&self, p: &LatticePoint, q: &LatticePoint, c: f64) -> Crossing {
        let key = if p.key < q.key { (p.key, q.key) } else { (q.key, p.key) };
        // a shared zero coordinate means the sub-edge lies on an element edge
        if let Some(zero) = (0..3).find(|&s| p.coords[s] == 0 && q.coords[s] == 0) {
            let (a, b) = match zero {
                0 => (1, 2),
                1 => (2, 0),
                _ => (0, 1),
            };
            let (ga, gb) = (self.global_vertex(a), self.global_vertex(b));
            let (lo, hi, hi_local) = if ga < gb { (ga, gb, b) } else { (gb, ga, a) };
            let kf = self.k as f64;
            let (tp, tq) = (p.coords[hi_local] as f64 / kf, q.coords[hi_local] as f64 / kf);
            let vm = self.values[self.midpoint_node(a, b)];
            let t = edge_root(self.values[lo], vm, self.values[hi], c, tp.min(tq), tp.max(tq));
            let (x0, x1) = (self.space.nodes[lo], self.space.nodes[hi]);
            return Crossing { key, pos: [x0[0] + t * (x1[0] - x0[0]), x0[1] + t * (x1[1] - x0[1])] };
        }
        let (a, b) = if p.key < q.key { (p, q) } else { (q, p) };
        let kf = self.k as f64;
        let mid = [0, 1, 2].map(|s| 0.5 * (a.coords[s] + b.coords[s]) as f64 / kf);
        let vm = eval_local(&self.local, mid);
        let t = edge_root(a.value, vm, b.value, c, 0.0, 1.0);
        Crossing { key, pos: [a.pos[0] + t * (b.pos[0] - a.pos[0]), a.pos[1] + t * (b.pos[1] - a.pos[1])] }
    }

    fn cut(&self, c: f64, out: &mut Vec<Segment>) {
        let k = self.k;
        let mut grid: Vec<Vec<LatticePoint>> = Vec::with_capacity(k + 1);
        for i in 0..=k {
            grid.push((0..=k - i).map(|j| self.lattice(i, j)).collect());
        }
        let mut emit = |tri: [&LatticePoint; 3]| {
            let inside = tri.map(|p| p.value >= c);
            if inside.iter().all(|&x| x) || inside.iter().all(|&x| !x) {
                return;
            }
            let mut exit = None;
            let mut entry = None;
            for s in 0..3 {
                let (p, q) = (tri[s], tri[(s + 1) % 3]);
                match (inside[s], inside[(s + 1) % 3]) {
                    (true, false) => exit = Some(self.crossing(p, q, c)),
                    (false, true) => entry = Some(self.crossing(p, q, c)),
                    _ => {}
                }
            }
            out.push(Segment {
                element: self.element,
                start: exit.expect("sign change implies an exit edge"),
                end: entry.expect("sign change implies an entry edge"),
            });
        };
        for i in 0..k {
            for j in 0..k - i {
                emit([&grid[i][j], &grid[i + 1][j], &grid[i][j + 1]]);
                if i + j + 2 <= k {
                    emit([&grid[i + 1][j], &grid[i + 1][j + 1], &grid[i][j + 1]]);
                }
            }
        }
    }
}

/// Range of nodal values per element, widened to cover the overshoot of the
/// quadratic between nodes.
fn element_ranges(space: &P2Space, values: &[f64]) -> Vec<(f64, f64)> {
    (0..space.num_elements())
        .map(|e| {
            let v = space.local_values(e, values);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = 0.5 * (hi - lo);
            (lo - pad, hi + pad)
        })
        .collect()
}

/// Extracts and measures the level curve `{v = c}` with `k × k` subdivision of
/// every cut element.
pub fn level_curve(field: &ScalarField, c: f64, k: usize, grad_cutoff: f64) -> Result<LevelCurve> {
    let ranges = element_ranges(&field.space, &field.values);
    level_curve_with(field, &ranges, c, k, grad_cutoff)
}

fn level_curve_with(
    field: &ScalarField,
    ranges: &[(f64, f64)],
    c: f64,
    k: usize,
    grad_cutoff: f64,
) -> Result<LevelCurve> {
    let space = &*field.space;
    let mut segments = Vec::new();
    for (e, &(lo, hi)) in ranges.iter().enumerate() {
        if c < lo || c > hi {
            continue;
        }
        let cutter = ElementCutter {
            space,
            values: &field.values,
            element: e,
            local: space.local_values(e, &field.values),
            k,
        };
        cutter.cut(c, &mut segments);
    }
    if segments.is_empty() {
        return Err(Error::LevelSet(format!("level {c:.6e} does not meet the interpolant")));
    }
    let components = check_closure(&segments)?;

    let gauss = gauss_legendre_unit(4);
    let mut curve = LevelCurve { segments: segments.len(), components, ..Default::default() };
    for seg in &segments {
        let (p0, p1) = (seg.start.pos, seg.end.pos);
        curve.area += 0.5 * (p0[0] * p1[1] - p1[0] * p0[1]);
        let chord = [p1[0] - p0[0], p1[1] - p0[1]];
        let len = chord[0].hypot(chord[1]);
        if len == 0.0 {
            continue;
        }
        let t = [chord[0] / len, chord[1] / len];
        // outward: the superlevel set lies to the left of the segment
        let n = [t[1], -t[0]];
        let geom = &space.geometry[seg.element];
        let local = space.local_values(seg.element, &field.values);
        let hess = hessian_local(geom, &local);
        let nhn = n[0] * (hess[0][0] * n[0] + hess[0][1] * n[1]) + n[1] * (hess[1][0] * n[0] + hess[1][1] * n[1]);
        let mut excluded = false;
        for &(s, w) in &gauss {
            let x = [p0[0] + s * chord[0], p0[1] + s * chord[1]];
            let q0 = eval_local(&local, space.bary_of(seg.element, x)) - c;
            let g0 = grad_local(geom, &local, space.bary_of(seg.element, x));
            let q1 = g0[0] * n[0] + g0[1] * n[1];
            let delta = smallest_root(0.5 * nhn, q1, q0);
            let y = [x[0] + delta * n[0], x[1] + delta * n[1]];
            let g = grad_local(geom, &local, space.bary_of(seg.element, y));
            let gn = g[0] * n[0] + g[1] * n[1];
            let gt = g[0] * t[0] + g[1] * t[1];
            let slope = if gn != 0.0 { -gt / gn } else { 0.0 };
            let dl = w * len * (1.0 + slope * slope).sqrt();
            let grad_norm = g[0].hypot(g[1]);
            curve.length += dl;
            curve.area += w * len * delta;
            curve.grad += dl * grad_norm;
            if grad_norm < grad_cutoff {
                excluded = true;
            } else {
                curve.inv_grad += dl / grad_norm;
            }
        }
        curve.excluded += usize::from(excluded);
    }
    Ok(curve)
}

/// Root of `a t² + b t + c = 0` closest to zero; falls back to the linear
/// root when the quadratic has none.
fn smallest_root(a: f64, b: f64, c: f64) -> f64 {
    let linear = if b != 0.0 { -c / b } else { 0.0 };
    if a == 0.0 {
        return linear;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return linear;
    }
    let q = -0.5 * (b + if b >= 0.0 { 1.0 } else { -1.0 } * disc.sqrt());
    let r1 = if q != 0.0 { c / q } else { f64::INFINITY };
    let r2 = q / a;
    if r1.abs() <= r2.abs() {
        r1
    } else {
        r2
    }
}

/// Every crossing must start exactly one segment and end exactly one.
/// Returns the number of closed loops.
fn check_closure(segments: &[Segment]) -> Result<usize> {
    let mut next: HashMap<CrossingKey, usize> = HashMap::with_capacity(segments.len());
    for (i, s) in segments.iter().enumerate() {
        if next.insert(s.start.key, i).is_some() {
            return Err(Error::LevelSet("a level-curve point starts two segments".into()));
        }
    }
    let mut ends: HashMap<CrossingKey, ()> = HashMap::with_capacity(segments.len());
    for s in segments {
        if ends.insert(s.end.key, ()).is_some() || !next.contains_key(&s.end.key) {
            return Err(Error::LevelSet("level curve does not close".into()));
        }
    }
    let mut seen = vec![false; segments.len()];
    let mut loops = 0;
    for i in 0..segments.len() {
        if seen[i] {
            continue;
        }
        loops += 1;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = next[&segments[j].end.key];
        }
    }
    Ok(loops)
}

/// Subdivision level for contours at radius `r`: sub-triangles a fraction of
/// the contour size, between 2 and 16 per element side.
fn subdivision(h: f64, r: f64, max_v: f64) -> usize {
    ((4.0 * h / (r * (2.0 * max_v).sqrt())).ceil() as usize).clamp(2, 16)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelProfile {
    pub r_grid: Vec<f64>,
    pub superlevel_area: Vec<f64>,
    pub level_length: Vec<f64>,
    pub inv_grad_integral: Vec<f64>,
    pub grad_over_r2_integral: Vec<f64>,
    pub components: Vec<usize>,
    pub f_value: f64,
    pub g_value: f64,
    /// `r → 0` limit of the F-integrand, `2π/√det H⋆`.
    pub f_limit: f64,
    /// `r → 0` limit of `|Ω_r|/r²`, `2π·max v/√det H⋆`.
    pub g_limit: f64,
    /// `r → 1` limit of `|Ω_r|/r²`, the domain area.
    pub domain_area: f64,
    pub max_value: f64,
    pub hessian_det: f64,
    pub excluded_segments: usize,
}

/// Level profile of `field` over `grid`, with the meshed area as the `r → 1`
/// candidate.
pub fn level_profile(field: &ScalarField, max_point: &MaxPoint, grid: &RadiusGrid) -> Result<LevelProfile> {
    level_profile_with_area(field, max_point, grid, field.space.mesh.total_area())
}

/// Level profile with `domain_area` as the `r → 1` candidate; pass the exact
/// area when it is known, since the mesh only covers an inscribed polygon.
pub fn level_profile_with_area(
    field: &ScalarField,
    max_point: &MaxPoint,
    grid: &RadiusGrid,
    domain_area: f64,
) -> Result<LevelProfile> {
    grid.validate()?;
    if !(domain_area.is_finite() && domain_area > 0.0) {
        return Err(Error::Parameter(format!("domain area must be positive, got {domain_area}")));
    }
    let max_v = max_point.value;
    let h = field.space.h();
    let cutoff = 1e-8 * max_v.sqrt();
    let ranges = element_ranges(&field.space, &field.values);
    let radii = grid.values();
    let curves = radii
        .par_iter()
        .map(|&r| {
            let c = max_v * (1.0 - r * r);
            level_curve_with(field, &ranges, c, subdivision(h, r, max_v), cutoff)
        })
        .collect::<Result<Vec<_>>>()?;

    let sqrt_det = max_point.hessian_det.sqrt();
    let f_limit = 2.0 * PI / sqrt_det;
    let g_limit = 2.0 * PI * max_v / sqrt_det;
    let inv_grad: Vec<f64> = curves.iter().map(|c| c.inv_grad).collect();
    let grad_r2: Vec<f64> = curves.iter().zip(&radii).map(|(c, r)| c.grad / (r * r)).collect();
    let f_value = inv_grad.iter().copied().fold(f_limit, f64::min);
    let g_value = grad_r2.iter().copied().fold(g_limit.max(domain_area), f64::max);
    Ok(LevelProfile {
        superlevel_area: curves.iter().map(|c| c.area).collect(),
        level_length: curves.iter().map(|c| c.length).collect(),
        components: curves.iter().map(|c| c.components).collect(),
        excluded_segments: curves.iter().map(|c| c.excluded).sum(),
        r_grid: radii,
        inv_grad_integral: inv_grad,
        grad_over_r2_integral: grad_r2,
        f_value,
        g_value,
        f_limit,
        g_limit,
        domain_area,
        max_value: max_v,
        hessian_det: max_point.hessian_det,
    })
}

/// `F` and `G` recomputed from the areas `|Ω_r|` alone.
#[derive(Clone, Debug, Serialize)]
pub struct AreaFormulas {
    pub f_alt: f64,
    pub g_alt: f64,
    /// `|F_alt − F| / F`.
    pub f_discrepancy: f64,
    /// `|G_alt − G| / G`.
    pub g_discrepancy: f64,
}

/// `G = sup |Ω_r|/r²` and `F = inf (d|Ω_r|/dr)/(2 max v · r)` with centred
/// differences, using the same `r → 0` and `r → 1` candidates as the
/// line-integral values.
pub fn level_profile_via_areas(profile: &LevelProfile, max_point: &MaxPoint) -> AreaFormulas {
    let r = &profile.r_grid;
    let a = &profile.superlevel_area;
    let g_alt = r
        .iter()
        .zip(a)
        .map(|(r, a)| a / (r * r))
        .fold(profile.g_limit.max(profile.domain_area), f64::max);
    let mut f_alt = profile.f_limit;
    for i in 1..r.len() - 1 {
        let slope = (a[i + 1] - a[i - 1]) / (r[i + 1] - r[i - 1]);
        f_alt = f_alt.min(slope / (2.0 * max_point.value * r[i]));
    }
    AreaFormulas {
        f_alt,
        g_alt,
        f_discrepancy: (f_alt - profile.f_value).abs() / profile.f_value,
        g_discrepancy: (g_alt - profile.g_value).abs() / profile.g_value,
    }
}

impl LevelProfile {
    /// `(min, max)` of `|A_r|/r` over the grid.
    pub fn length_ratio_range(&self) -> (f64, f64) {
        self.level_length.iter().zip(&self.r_grid).map(|(l, r)| l / r).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), x| (lo.min(x), hi.max(x)),
        )
    }

    /// `|Ω|` as `∫₀¹ d|Ω_r|/dr dr` with `d|Ω_r|/dr = 2 max v · r · ∫_{A_r} 1/|∇v|`:
    /// trapezoid over the grid, the `r → 0` limit on `[0, r_min]` and a linear
    /// extrapolation on `[r_max, 1]`.
    pub fn coarea_area(&self) -> f64 {
        let m = self.max_value;
        let r = &self.r_grid;
        let rate: Vec<f64> = r.iter().zip(&self.inv_grad_integral).map(|(r, i)| 2.0 * m * r * i).collect();
        let mut total = m * self.f_limit * r[0] * r[0];
        for i in 0..r.len() - 1 {
            total += 0.5 * (rate[i] + rate[i + 1]) * (r[i + 1] - r[i]);
        }
        let n = r.len();
        let slope = (rate[n - 1] - rate[n - 2]) / (r[n - 1] - r[n - 2]);
        let tail = 1.0 - r[n - 1];
        total += rate[n - 1] * tail + 0.5 * slope * tail * tail;
        total
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "area", "length", "inv_grad_integral", "grad_over_r2_integral"])?;
        for i in 0..self.r_grid.len() {
            w.serialize((
                self.r_grid[i],
                self.superlevel_area[i],
                self.level_length[i],
                self.inv_grad_integral[i],
                self.grad_over_r2_integral[i],
            ))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::mesh::triangulate;
    use crate::torsion::{locate_max, solve_torsion};

    fn profile(spec: DomainSpec, h: f64, grid: RadiusGrid) -> (LevelProfile, MaxPoint) {
        let field = solve_torsion(&triangulate(&spec, h).unwrap()).unwrap();
        let mp = locate_max(&field).unwrap();
        (level_profile(&field, &mp, &grid).unwrap(), mp)
    }

    #[test]
    fn edge_root_solves_the_trace() {
        let (va, vm, vb) = (0.1, 0.7, 0.3);
        let t = edge_root(va, vm, vb, 0.5, 0.0, 0.5);
        assert!((edge_trace(va, vm, vb, t) - 0.5).abs() < 1e-14);
        assert!((0.0..=0.5).contains(&t));
        let t = edge_root(va, vm, vb, 0.5, 0.5, 1.0);
        assert!((edge_trace(va, vm, vb, t) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn smallest_root_picks_the_near_root() {
        // (t − 0.1)(t − 5) = t² − 5.1 t + 0.5
        assert!((smallest_root(1.0, -5.1, 0.5) - 0.1).abs() < 1e-14);
        assert!((smallest_root(0.0, 2.0, -1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn disk_levels_are_circles() {
        let grid = RadiusGrid { lo: 0.05, hi: 0.95, n: 19 };
        let (p, _) = profile(DomainSpec::disk(1.0), 0.04, grid);
        for i in 0..p.r_grid.len() {
            let r = p.r_grid[i];
            assert_eq!(p.components[i], 1);
            assert!((p.superlevel_area[i] - PI * r * r).abs() < 2e-3 * PI * r * r, "r = {r}");
            assert!((p.level_length[i] - 2.0 * PI * r).abs() < 2e-3 * 2.0 * PI * r);
            assert!((p.inv_grad_integral[i] - 4.0 * PI).abs() < 1e-2 * 4.0 * PI, "r = {r}");
            assert!((p.grad_over_r2_integral[i] - PI).abs() < 1e-2 * PI);
        }
        assert!((p.f_value - 4.0 * PI).abs() < 1e-2 * 4.0 * PI);
        assert!((p.g_value - PI).abs() < 1e-2 * PI);
    }

    #[test]
    fn area_formulas_agree_with_line_integrals_on_the_disk() {
        let grid = RadiusGrid { lo: 0.02, hi: 0.995, n: 100 };
        let (p, mp) = profile(DomainSpec::disk(1.0), 0.04, grid);
        let alt = level_profile_via_areas(&p, &mp);
        assert!((alt.g_alt - PI).abs() < 1e-2 * PI);
        assert!((alt.f_alt - 4.0 * PI).abs() < 1e-2 * 4.0 * PI);
        assert!(alt.f_discrepancy < 1e-2);
        assert!((p.coarea_area() - p.domain_area).abs() < 5e-3 * p.domain_area);
        let (lo, hi) = p.length_ratio_range();
        assert!(hi / lo < 1.05);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(RadiusGrid { lo: 0.0, hi: 0.5, n: 10 }.validate().is_err());
        assert!(RadiusGrid { lo: 0.2, hi: 1.0, n: 10 }.validate().is_err());
        assert!(RadiusGrid { lo: 0.2, hi: 0.5, n: 2 }.validate().is_err());
        let v = RadiusGrid::default().values();
        assert_eq!(v.len(), 400);
        assert_eq!(v[0], 0.02);
        assert_eq!(v[399], 0.995);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn level_above_the_maximum_is_an_error() {
        let field = solve_torsion(&triangulate(&DomainSpec::disk(1.0), 0.2).unwrap()).unwrap();
        assert!(matches!(level_curve(&field, 1.0, 2, 0.0), Err(Error::LevelSet(_))));
    }
}
