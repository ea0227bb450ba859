//! Acceptance suite at default resolutions: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use magbound_core::bound::{
    assemble_bound, ellipse_closed_form, ellipse_scaling_crosscheck, BoundOptions, TorsionAnalysis,
};
use magbound_core::disk::{
    disk_mu1, disk_mu1_with, extrapolate_to_zero_field, fiber_mu1, monotonicity_scan_field, monotonicity_scan_radius,
    scaling_check, FiberProblem, SpectrumOptions,
};
use magbound_core::fem::P2Space;
use magbound_core::geometry::{area, DomainSpec};
use magbound_core::level::{level_profile_via_areas, RadiusGrid};
use magbound_core::magnetic::{
    build_gauge, gauge_invariance_check, interpolate, optimal_trial_profile, solve_mu1, trial_rayleigh, GaugeKind,
    EIGEN_TOLERANCE_FLOOR,
};
use magbound_core::mesh::triangulate;
use magbound_core::torsion::torsion_properties;

const H: f64 = 0.02;
const TOL: f64 = 0.02;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.lines.push(format!("    [{}] {what}", if ok { "ok" } else { "FAIL" }));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn builtins() -> Vec<(&'static str, DomainSpec, TorsionAnalysis)> {
    DomainSpec::builtin_set()
        .into_iter()
        .map(|(name, spec)| {
            let a = TorsionAnalysis::run(&spec, H, &RadiusGrid::default()).unwrap();
            (name, spec, a)
        })
        .collect()
}

fn find<'a>(all: &'a [(&'static str, DomainSpec, TorsionAnalysis)], name: &str) -> &'a TorsionAnalysis {
    &all.iter().find(|(n, _, _)| *n == name).unwrap().2
}

fn ellipse_values(all: &[(&'static str, DomainSpec, TorsionAnalysis)]) -> Outcome {
    let mut o = Outcome::new();
    for (name, alpha, beta) in [("ellipse(2,1)", 2.0, 1.0), ("ellipse(1.2,1/1.2)", 1.2, 1.0 / 1.2)] {
        let a = find(all, name);
        let gamma = 2.0 / (alpha * alpha) + 2.0 / (beta * beta);
        let f_exact = PI * gamma * alpha * beta;
        let g_exact = PI * alpha * beta;
        let rho_exact = 2f64.sqrt() * alpha * beta / (alpha * alpha + beta * beta).sqrt();
        let (f, g, m, rho) = (a.profile.f_value, a.profile.g_value, a.max_point.value, a.rho());
        o.check(rel(f, f_exact) < 0.01, format!("{name}: F {f:.6} vs {f_exact:.6}, rel {:.2e} < 1e-2", rel(f, f_exact)));
        o.check(rel(g, g_exact) < 0.01, format!("{name}: G {g:.6} vs {g_exact:.6}, rel {:.2e} < 1e-2", rel(g, g_exact)));
        o.check(
            rel(m, 1.0 / gamma) < 0.005,
            format!("{name}: max v {m:.6} vs {:.6}, rel {:.2e} < 5e-3", 1.0 / gamma, rel(m, 1.0 / gamma)),
        );
        o.check(
            rel(rho, rho_exact) < 0.005,
            format!("{name}: rho {rho:.6} vs {rho_exact:.6}, rel {:.2e} < 5e-3", rel(rho, rho_exact)),
        );
    }
    o
}

fn disk_sharpness(all: &[(&'static str, DomainSpec, TorsionAnalysis)]) -> Outcome {
    let mut o = Outcome::new();
    let a = find(all, "disk(1)");
    let (c, rho) = (a.c_factor(), a.rho());
    o.check((0.99..=1.02).contains(&c), format!("C = {c:.6} in [0.99, 1.02]"));
    o.check((0.99..=1.01).contains(&rho), format!("rho = {rho:.6} in [0.99, 1.01]"));
    o
}

fn bound_validity(all: &[(&'static str, DomainSpec, TorsionAnalysis)]) -> Outcome {
    let mut o = Outcome::new();
    let opts = BoundOptions { with_direct: true, ..Default::default() };
    for (name, spec, a) in all {
        let omega = area(spec).unwrap();
        for b in [0.2, 0.5, 0.8 * PI / omega] {
            if b * omega >= PI {
                continue;
            }
            let r = assemble_bound(a, b, &opts).unwrap();
            let direct = r.mu_direct.unwrap();
            o.check(
                direct <= r.bound_value * (1.0 + TOL),
                format!(
                    "{name} b={b:.4}: direct {direct:.8} <= bound {:.8} x 1.02 (ratio {:.5})",
                    r.bound_value,
                    direct / r.bound_value
                ),
            );
        }
    }
    o
}

fn trial_chain(all: &[(&'static str, DomainSpec, TorsionAnalysis)]) -> Outcome {
    let mut o = Outcome::new();
    let a = find(all, "ellipse(2,1)");
    let b = 0.4;
    let r = assemble_bound(a, b, &BoundOptions { with_direct: true, ..Default::default() }).unwrap();
    let profile = optimal_trial_profile(b, &a.max_point, 4096).unwrap();
    let q = trial_rayleigh(&a.field, &a.max_point, b, &profile).unwrap();
    let direct = r.mu_direct.unwrap();
    o.check(direct <= q, format!("direct {direct:.8} <= trial quotient {q:.8}"));
    o.check(
        q <= r.bound_value * (1.0 + TOL),
        format!("trial quotient {q:.8} <= bound {:.8} x 1.02 (ratio {:.5})", r.bound_value, q / r.bound_value),
    );
    o
}

fn ellipse_conjecture_case(all: &[(&'static str, DomainSpec, TorsionAnalysis)]) -> Outcome {
    let mut o = Outcome::new();
    let (alpha, beta) = (1.2, 1.0 / 1.2);
    let a = find(all, "ellipse(1.2,1/1.2)");
    for b in [0.3, 0.6, 0.9] {
        let cf = ellipse_closed_form(alpha, beta, b, 4096).unwrap();
        let r = assemble_bound(a, b, &BoundOptions { with_direct: true, ..Default::default() }).unwrap();
        let direct = r.mu_direct.unwrap();
        o.check(
            direct <= cf.mu_disk_rho * (1.0 + TOL),
            format!("b={b}: mu(E) {direct:.8} <= mu(B_rho) {:.8} x 1.02", cf.mu_disk_rho),
        );
        // solver tolerance: the Richardson correction of the m = 0 fiber at radius 1
        let fiber = fiber_mu1(&FiberProblem::new(b, 0, 1.0)).unwrap();
        let solver_tol = (fiber.mu_fine - fiber.mu_coarse).abs() / 3.0 + 1e-14 * fiber.mu;
        let gap = cf.mu_disk_same_area - cf.mu_disk_rho;
        o.check(
            gap > 10.0 * solver_tol,
            format!(
                "b={b}: mu(B_1) - mu(B_rho) = {gap:.3e} > 10 x solver tol {solver_tol:.1e}"
            ),
        );
    }
    o
}

fn fiber_reduction() -> Outcome {
    let mut o = Outcome::new();
    for br2 in [0.25, 0.5, 0.9] {
        for radius in [1.0, 0.5] {
            let b = br2 / (radius * radius);
            let s = disk_mu1_with(b, radius, &SpectrumOptions { min_window: 6, ..Default::default() }).unwrap();
            let second = s.per_mode.iter().filter(|m| m.m != 0 && m.m.abs() <= 6).map(|m| m.mu).fold(f64::INFINITY, f64::min);
            o.check(
                s.minimizing_mode == 0 && s.per_mode.iter().filter(|m| m.m.abs() <= 6).count() == 13,
                format!(
                    "bR^2={br2} R={radius}: minimizing mode {} over |m| <= 6, mu0 {:.6e} < next {second:.6e}",
                    s.minimizing_mode, s.mu1
                ),
            );
        }
    }
    o
}

fn radius_monotonicity() -> Outcome {
    let mut o = Outcome::new();
    for b in [0.5, 1.0] {
        let r_max = 0.9 / f64::sqrt(b);
        let radii: Vec<f64> = (1..).map(|k| 0.2 * k as f64).take_while(|&r| r <= r_max + 1e-12).collect();
        let mu = monotonicity_scan_radius(b, &radii).unwrap();
        let min_step = mu.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        o.check(
            min_step > 1e-8,
            format!("b={b}: {} radii up to {:.3}, min consecutive increase {min_step:.3e} > 1e-8", radii.len(), radii.last().unwrap()),
        );
    }
    o
}

fn field_monotonicity() -> Outcome {
    let mut o = Outcome::new();
    let fields = [0.05, 0.1, 0.2, 0.4];
    let u = monotonicity_scan_field(1.0, &fields).unwrap();
    let decreasing = u.windows(2).all(|w| w[1] < w[0]);
    o.check(decreasing, format!("u(b) = {u:.8?} strictly decreasing"));
    let u0 = extrapolate_to_zero_field(&fields, &u);
    o.check(rel(u0, 0.125) < 0.01, format!("extrapolated u(0) = {u0:.8}, rel to 1/8 {:.2e} < 1e-2", rel(u0, 0.125)));
    let strict = fields.iter().zip(&u).all(|(b, u)| u * b * b < b * b / 8.0);
    o.check(strict, "mu(B_1) < b^2/8 at every b".into());
    o
}

fn scaling_identity() -> Outcome {
    let mut o = Outcome::new();
    for (b, t) in [(0.5, 2.0), (0.8, 0.5)] {
        let d = scaling_check(b, t).unwrap();
        o.check(d < 1e-6, format!("scaling (b={b}, t={t}): {d:.2e} < 1e-6"));
    }
    let d = ellipse_scaling_crosscheck(2.0, 1.0, 0.4).unwrap();
    o.check(d < 1e-6, format!("ellipse cross-check (2, 1, 0.4): {d:.2e} < 1e-6"));
    o
}

fn sandwiches(all: &[(&'static str, DomainSpec, TorsionAnalysis)]) -> Outcome {
    let mut o = Outcome::new();
    for (name, spec, a) in all {
        let p = &a.profile;
        let omega = area(spec).unwrap();
        let upper = 2.0 * PI / a.max_point.hessian_det.sqrt();
        o.check(
            p.f_value >= 4.0 * PI * 0.99 && p.f_value <= upper * 1.01,
            format!("{name}: F {:.6} in [{:.6}, {:.6}]", p.f_value, 4.0 * PI * 0.99, upper * 1.01),
        );
        let g_floor = 0.99 * p.g_limit.max(omega);
        o.check(p.g_value >= g_floor, format!("{name}: G {:.6} >= {g_floor:.6}", p.g_value));
        o.check(a.c_factor() >= 0.99, format!("{name}: C {:.6} >= 0.99", a.c_factor()));
        let min_level = p.inv_grad_integral.iter().copied().fold(f64::INFINITY, f64::min);
        o.check(min_level >= 4.0 * PI * 0.99, format!("{name}: min per-level integral {min_level:.6} >= {:.6}", 4.0 * PI * 0.99));
    }
    o
}

fn symmetric_domain() -> Outcome {
    let mut o = Outcome::new();
    let spec = DomainSpec::superellipse(4, 1.0);
    let a = TorsionAnalysis::run(&spec, H, &RadiusGrid::default()).unwrap();
    let det = a.max_point.hessian_det;
    o.check(rel(det, 0.25) < 0.02, format!("det H = {det:.8}, rel to 1/4 {:.2e} < 2e-2", rel(det, 0.25)));
    let f = a.profile.f_value;
    o.check(rel(f, 4.0 * PI) < 0.02, format!("F = {f:.6}, rel to 4pi {:.2e} < 2e-2", rel(f, 4.0 * PI)));
    let c = a.c_factor();
    o.check(c > 1.02, format!("C = {c:.6} > 1.02"));
    let scaled = spec.scaled_to_area(PI).unwrap();
    let a = TorsionAnalysis::run(&scaled, H, &RadiusGrid::default()).unwrap();
    let r = assemble_bound(&a, 0.05, &BoundOptions::default()).unwrap();
    let mu1 = disk_mu1(0.05, 1.0).unwrap().mu1;
    o.check(
        r.bound_value > mu1,
        format!("area pi, b=0.05: bound {:.12} > mu(B_1) {mu1:.12} (margin {:.2e})", r.bound_value, r.bound_value - mu1),
    );
    o
}

fn property_suite(all: &[(&'static str, DomainSpec, TorsionAnalysis)]) -> Outcome {
    let mut o = Outcome::new();
    for (name, spec, a) in all {
        let props = torsion_properties(&a.field, &a.max_point);
        o.check(props.gradient_ratio <= 1.0, format!("{name}: gradient ratio {:.4} <= 1", props.gradient_ratio));
        o.check(props.distance_ratio <= 1.0, format!("{name}: distance ratio {:.4} <= 1", props.distance_ratio));
        let is_disk = *name == "disk(1)";
        let talenti_ok = if is_disk { props.talenti_ratio <= 1.0 + 1e-3 } else { props.talenti_ratio < 1.0 - 1e-3 };
        o.check(
            talenti_ok,
            format!("{name}: Talenti ratio {:.6} {}", props.talenti_ratio, if is_disk { "<= 1 + 1e-3" } else { "< 1 - 1e-3" }),
        );
        let (lo, hi) = a.profile.length_ratio_range();
        o.check(hi / lo < 10.0, format!("{name}: |A_r|/r in [{lo:.4}, {hi:.4}], ratio {:.4} < 10", hi / lo));
        let alt = level_profile_via_areas(&a.profile, &a.max_point);
        o.check(
            alt.f_discrepancy < 0.01 && alt.g_discrepancy < 0.01,
            format!("{name}: cross-method F {:.2e}, G {:.2e} < 1e-2", alt.f_discrepancy, alt.g_discrepancy),
        );
        let omega = area(spec).unwrap();
        let closure = rel(a.profile.coarea_area(), omega);
        o.check(closure < 0.005, format!("{name}: co-area closure {closure:.2e} < 5e-3"));
    }
    o
}

fn gauge_invariance(all: &[(&'static str, DomainSpec, TorsionAnalysis)]) -> Outcome {
    let mut o = Outcome::new();
    let e = find(all, "ellipse(2,1)");
    let g = gauge_invariance_check(&e.spec, &e.field, 0.4).unwrap();
    o.check(g.discrepancy < 0.005, format!("ellipse(2,1) b=0.4: {:.2e} < 5e-3", g.discrepancy));
    let s = find(all, "superellipse(4,1)");
    let g = gauge_invariance_check(&s.spec, &s.field, 0.3).unwrap();
    o.check(g.discrepancy < 0.005, format!("superellipse(4,1) b=0.3: {:.2e} < 5e-3", g.discrepancy));
    // on the disk both gauges are the same field when v is the exact torsion function
    let d = find(all, "disk(1)");
    let exact = interpolate(&d.field.space, |p| 0.25 * (1.0 - p[0] * p[0] - p[1] * p[1]));
    let g = gauge_invariance_check(&d.spec, &exact, 0.5).unwrap();
    o.check(
        g.discrepancy < EIGEN_TOLERANCE_FLOOR,
        format!("disk(1) b=0.5 with exact torsion: {:.2e} < {:.0e}", g.discrepancy, EIGEN_TOLERANCE_FLOOR),
    );
    o
}

fn oracle_equivalence() -> Outcome {
    let mut o = Outcome::new();
    for (b, m, radius) in [(0.5, 0, 1.0), (0.9, 0, 1.0), (1.0, 1, 1.0), (0.5, -1, 1.5), (2.0, 2, 1.0)] {
        let ours = fiber_mu1(&FiberProblem::new(b, m, radius)).unwrap().mu;
        let oracle = common::shooting_fiber_mu1(b, m, radius, 1_000_000);
        let d = rel(ours, oracle);
        o.check(d < 1e-8, format!("fiber (b={b}, m={m}, R={radius}): {ours:.12} vs shooting {oracle:.12}, rel {d:.1e} < 1e-8"));
    }
    let disk = DomainSpec::disk(1.0);
    let coarse = Arc::new(P2Space::new(triangulate(&disk, H).unwrap()));
    let fine = Arc::new(P2Space::new(triangulate(&disk, H / 2.0).unwrap()));
    for b in [0.25, 0.5, 0.9] {
        let exact = disk_mu1(b, 1.0).unwrap().mu1;
        let gap_coarse = rel(solve_mu1(&build_gauge(&disk, &coarse, b, GaugeKind::Symmetric, None).unwrap()).unwrap().mu1, exact);
        let gap_fine = rel(solve_mu1(&build_gauge(&disk, &fine, b, GaugeKind::Symmetric, None).unwrap()).unwrap().mu1, exact);
        o.check(gap_coarse < 0.01, format!("disk b={b}: FEM gap at h=0.02 {gap_coarse:.2e} < 1e-2"));
        o.check(
            gap_fine * 3.0 <= gap_coarse,
            format!("disk b={b}: gap at h=0.01 {gap_fine:.2e}, reduction {:.2}x >= 3x", gap_coarse / gap_fine),
        );
    }
    o
}

#[test]
fn acceptance_criteria() {
    let all = builtins();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 ellipse closed forms", ellipse_values(&all)),
        ("2 disk sharpness", disk_sharpness(&all)),
        ("3 bound validity", bound_validity(&all)),
        ("4 trial chain", trial_chain(&all)),
        ("5 ellipse conjecture case", ellipse_conjecture_case(&all)),
        ("6 fiber reduction", fiber_reduction()),
        ("7 radius monotonicity", radius_monotonicity()),
        ("8 field monotonicity", field_monotonicity()),
        ("9 scaling identity", scaling_identity()),
        ("10 geometric sandwiches", sandwiches(&all)),
        ("11 symmetric domain", symmetric_domain()),
        ("12 torsion property suite", property_suite(&all)),
        ("13 gauge invariance", gauge_invariance(&all)),
        ("14 oracle equivalence", oracle_equivalence()),
    ];
    let mut failed = Vec::new();
    for (name, outcome) in &results {
        println!("{} criterion {name}", if outcome.pass { "PASS" } else { "FAIL" });
        for line in &outcome.lines {
            println!("{line}");
        }
        if !outcome.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
