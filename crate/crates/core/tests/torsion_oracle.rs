//! Maximum of the torsion function on `x⁴ + y⁴ < 1` from two oracles that
//! share nothing with the finite element path: a harmonic series fitted on
//! the boundary, and finite differences on a uniform grid.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use magbound_core::geometry::DomainSpec;
use magbound_core::mesh::triangulate;
use magbound_core::torsion::{locate_max, solve_torsion};

/// `v = c₀ − r²/4 + Σ c_k (r/r₁)^{4k} cos 4kθ`, the general solution of
/// `−Δv = 1` with the square's symmetries; `v = 0` is imposed at boundary
/// points by least squares and `v(0) = c₀` is returned.
fn harmonic_series_max(terms: usize, samples: usize) -> f64 {
    let r1 = 2f64.powf(0.25);
    let points: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let theta = std::f64::consts::FRAC_PI_4 * (i as f64 + 0.5) / samples as f64;
            let (s, c) = theta.sin_cos();
            (theta, (c.powi(4) + s.powi(4)).powf(-0.25))
        })
        .collect();
    let a = Mat::<f64>::from_fn(samples, terms + 1, |i, k| {
        let (theta, r) = points[i];
        if k == 0 { 1.0 } else { (r / r1).powi(4 * k as i32) * (4.0 * k as f64 * theta).cos() }
    });
    let rhs = Mat::<f64>::from_fn(samples, 1, |i, _| 0.25 * points[i].1 * points[i].1);
    let coef = a.qr().solve_lstsq(&rhs);
    coef[(0, 0)]
}

/// Five-point finite differences with Shortley–Weller boundary stencils on a
/// full `n × n` grid over `[−1, 1]²`, solved on the quarter `[0, 1]²` with
/// mirror conditions by SOR; returns the value at the origin.
fn finite_difference_max(n: usize) -> f64 {
    let q = n / 2;
    let h = 2.0 / n as f64;
    let inside = |x: f64, y: f64| x.powi(4) + y.powi(4) < 1.0;
    // distance to the boundary from (x, y) along +x, found by bisection
    let gap_x = |x: f64, y: f64| {
        let (mut lo, mut hi) = (0.0, h);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if inside(x + mid, y) { lo = mid } else { hi = mid }
        }
        0.5 * (lo + hi)
    };
    let idx = |i: usize, j: usize| i * (q + 1) + j;
    let mut u = vec![0.0; (q + 1) * (q + 1)];
    // per point: neighbour indices (None on the boundary) and stencil weights
    let mut stencils: Vec<(usize, [Option<usize>; 4], [f64; 4])> = Vec::new();
    for i in 0..=q {
        for j in 0..=q {
            let (x, y) = (i as f64 * h, j as f64 * h);
            if !inside(x, y) {
                continue;
            }
            let mut nb = [None; 4];
            let mut arm = [h; 4];
            // +x, −x, +y, −y; the mirror maps −x at i = 0 onto +x
            if inside(x + h, y) { nb[0] = Some(idx(i + 1, j)) } else { arm[0] = gap_x(x, y) }
            nb[1] = Some(if i == 0 { idx(1, j) } else { idx(i - 1, j) });
            if inside(x, y + h) { nb[2] = Some(idx(i, j + 1)) } else { arm[2] = gap_x(y, x) }
            nb[3] = Some(if j == 0 { idx(i, 1) } else { idx(i, j - 1) });
            if i == 0 && nb[0].is_none() { nb[1] = None; arm[1] = arm[0] }
            if j == 0 && nb[2].is_none() { nb[3] = None; arm[3] = arm[2] }
            let wx = 2.0 / (arm[0] + arm[1]);
            let wy = 2.0 / (arm[2] + arm[3]);
            let w = [wx / arm[0], wx / arm[1], wy / arm[2], wy / arm[3]];
            stencils.push((idx(i, j), nb, w));
        }
    }
    let omega = 2.0 / (1.0 + std::f64::consts::PI * h / 2.0);
    for _ in 0..200 * n {
        let mut change: f64 = 0.0;
        for &(k, nb, w) in &stencils {
            let mut acc = 1.0;
            for d in 0..4 {
                if let Some(m) = nb[d] {
                    acc += w[d] * u[m];
                }
            }
            let new = acc / w.iter().sum::<f64>();
            let step = omega * (new - u[k]);
            u[k] += step;
            change = change.max(step.abs());
        }
        if change < 1e-13 {
            break;
        }
    }
    u[idx(0, 0)]
}

fn fem_max(h: f64) -> f64 {
    let field = solve_torsion(&triangulate(&DomainSpec::superellipse(4, 1.0), h).unwrap()).unwrap();
    locate_max(&field).unwrap().value
}

#[test]
fn harmonic_series_oracle_converges() {
    let a = harmonic_series_max(20, 400);
    let b = harmonic_series_max(30, 600);
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn superellipse_max_matches_harmonic_series_oracle() {
    let oracle = harmonic_series_max(30, 600);
    let coarse = fem_max(0.04);
    let fine = fem_max(0.02);
    let (e_coarse, e_fine) = ((coarse - oracle).abs(), (fine - oracle).abs());
    println!("oracle {oracle:.12}, h=0.04 {coarse:.10} ({e_coarse:.2e}), h=0.02 {fine:.10} ({e_fine:.2e})");
    assert!(e_fine < 5e-5 * oracle);
    assert!(e_fine < 0.5 * e_coarse);
}

#[test]
fn finite_difference_oracle_agrees_on_a_coarse_grid() {
    let fd = finite_difference_max(256);
    let series = harmonic_series_max(30, 600);
    println!("fd 256^2 {fd:.10}, series {series:.12}");
    assert!((fd - series).abs() < 2e-4 * series);
}

#[test]
#[ignore = "2048² finite-difference solve takes minutes"]
fn superellipse_max_matches_fine_finite_difference_oracle() {
    let fd = finite_difference_max(2048);
    let fine = fem_max(0.02);
    let series = harmonic_series_max(30, 600);
    println!("fd 2048^2 {fd:.12}, series {series:.12}, fem h=0.02 {fine:.10}");
    assert!((fd - series).abs() < 1e-6 * series);
    assert!((fine - fd).abs() < 5e-5 * fd);
}

