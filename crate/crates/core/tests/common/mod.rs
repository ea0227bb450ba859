//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Lowest eigenvalue of the radial fiber
/// `f″ + f′/r − (m/r − br/2)² f + μ f = 0`, `f′(R) = 0`, by shooting.
///
/// The solution is started from its regular power series at `r₀ = R/100` and
/// integrated with classical RK4 over `steps` steps; the first sign change of
/// `f′(R; μ)` on a geometric μ-scan is refined by bisection.
pub fn shooting_fiber_mu1(b: f64, m: i32, radius: f64, steps: usize) -> f64 {
    let mut lo = 1e-6;
    let g_lo = shoot(b, m, radius, lo, steps);
    let mut hi = lo;
    loop {
        hi *= 1.25;
        assert!(hi < 1e4, "no eigenvalue bracket found");
        if shoot(b, m, radius, hi, steps).signum() != g_lo.signum() {
            break;
        }
        lo = hi;
    }
    let mut g_lo = shoot(b, m, radius, lo, steps);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = shoot(b, m, radius, mid, steps);
        if g.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `f′(R)` for the regular solution normalized by its leading coefficient.
fn shoot(b: f64, m: i32, radius: f64, mu: f64, steps: usize) -> f64 {
    let am = m.unsigned_abs() as f64;
    let mf = m as f64;
    let r0 = radius / 100.0;
    // f = Σ a_k r^{|m|+2k}, [(|m|+2k)² − m²] a_k = −(μ + mb) a_{k−1} + (b²/4) a_{k−2}
    let mut a = vec![1.0f64];
    for k in 1..60 {
        let kk = k as f64;
        let denom = (am + 2.0 * kk).powi(2) - am * am;
        let prev2 = if k >= 2 { a[k - 2] } else { 0.0 };
        a.push((-(mu + mf * b) * a[k - 1] + 0.25 * b * b * prev2) / denom);
    }
    let mut f = 0.0;
    let mut df = 0.0;
    for (k, ak) in a.iter().enumerate() {
        let p = am + 2.0 * k as f64;
        f += ak * r0.powf(p);
        if p > 0.0 {
            df += ak * p * r0.powf(p - 1.0);
        }
    }
    let rhs = |r: f64, y: [f64; 2]| -> [f64; 2] {
        let q = (mf / r - 0.5 * b * r).powi(2) - mu;
        [y[1], -y[1] / r + q * y[0]]
    };
    let h = (radius - r0) / steps as f64;
    let mut y = [f, df];
    for i in 0..steps {
        let r = r0 + i as f64 * h;
        let k1 = rhs(r, y);
        let k2 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    y[1]
}

/// Area of the superellipse `|x|^p + |y|^p < a^p` from the inscribed polygon
/// with `n` vertices on the curve (error `O(n⁻²)`), Richardson-corrected.
pub fn superellipse_area_polygon(p: u32, a: f64, n: usize) -> f64 {
    let poly = |n: usize| -> f64 {
        let pt = |k: usize| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let (s, c) = t.sin_cos();
            let r = a / (c.abs().powi(p as i32) + s.abs().powi(p as i32)).powf(1.0 / p as f64);
            (r * c, r * s)
        };
        (0..n)
            .map(|k| {
                let (x0, y0) = pt(k);
                let (x1, y1) = pt(k + 1);
                0.5 * (x0 * y1 - x1 * y0)
            })
            .sum()
    };
    (4.0 * poly(2 * n) - poly(n)) / 3.0
}
