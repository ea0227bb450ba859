//! The invariant suite on the builtin domains, with a measured margin for
//! every check.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{assemble_bound, ellipse_closed_form, ellipse_scaling_crosscheck, BoundOptions, TorsionAnalysis};
use crate::disk::{
    disk_mu1_with, extrapolate_to_zero_field, monotonicity_scan_field, monotonicity_scan_radius, scaling_check,
    SpectrumOptions, DEFAULT_RADIAL_POINTS,
};
use crate::error::Result;
use crate::geometry::{area, DomainSpec};
use crate::level::{level_profile_via_areas, RadiusGrid};
use crate::magnetic::{gauge_invariance_check, optimal_trial_profile, trial_rayleigh};
use crate::torsion::{torsion_properties, trial_field};

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One check: `measured relation limit`, where the limit already includes
/// the tolerance. The margin is positive when the check passes.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub domain: String,
    pub property: String,
    pub measured: f64,
    pub relation: Relation,
    pub limit: f64,
    pub tolerance: f64,
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    fn new(domain: &str, property: &str, measured: f64, relation: Relation, limit: f64, tolerance: f64) -> Self {
        let margin = match relation {
            Relation::AtMost => limit - measured,
            Relation::AtLeast => measured - limit,
        };
        Check {
            domain: domain.to_string(),
            property: property.to_string(),
            measured,
            relation,
            limit,
            tolerance,
            margin,
            pass: margin >= 0.0 && measured.is_finite(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ValidationOptions {
    pub mesh_h: f64,
    pub grid: RadiusGrid,
    pub radial_points: usize,
    /// Relative tolerance of inequalities between discretized quantities.
    pub tolerance: f64,
    /// Include the 2-D eigenvalue solves (bound validity, trial chain, gauges).
    pub with_direct: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            mesh_h: 0.02,
            grid: RadiusGrid::default(),
            radial_points: DEFAULT_RADIAL_POINTS,
            tolerance: 0.02,
            with_direct: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub options: ValidationOptions,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

use Relation::{AtLeast, AtMost};

fn domain_checks(name: &str, spec: &DomainSpec, opts: &ValidationOptions) -> Result<Vec<Check>> {
    let tol = opts.tolerance;
    let mut out = Vec::new();
    let a = TorsionAnalysis::run(spec, opts.mesh_h, &opts.grid)?;
    let mp = &a.max_point;
    let p = &a.profile;
    let omega = area(spec)?;
    let same_area_radius = (omega / PI).sqrt();
    let is_disk = matches!(spec.kind, crate::geometry::DomainKind::Disk { .. });

    out.push(Check::new(name, "hessian trace + 1", (mp.hessian_trace + 1.0).abs(), AtMost, 1e-3, 1e-3));
    out.push(Check::new(name, "hessian det", mp.hessian_det, AtMost, 0.25 * (1.0 + 1e-4), 1e-4));
    out.push(Check::new(name, "hessian det positive", mp.hessian_det, AtLeast, 0.0, 0.0));

    let props = torsion_properties(&a.field, mp);
    out.push(Check::new(name, "gradient bound ratio", props.gradient_ratio, AtMost, 1.0 + 1e-3, 1e-3));
    out.push(Check::new(name, "distance bound ratio", props.distance_ratio, AtMost, 1.0 + 1e-3, 1e-3));
    if is_disk {
        out.push(Check::new(name, "Talenti ratio", props.talenti_ratio, AtMost, 1.0 + 1e-3, 1e-3));
    } else {
        out.push(Check::new(name, "Talenti ratio (strict)", props.talenti_ratio, AtMost, 1.0 - 1e-3, 1e-3));
    }
    let trial = trial_field(&a.field, mp);
    out.push(Check::new(name, "trial gradient ratio", trial.max_scaled_gradient(&a.field, mp), AtMost, 1.05, 0.05));

    let (lo, hi) = p.length_ratio_range();
    out.push(Check::new(name, "level length ratio spread", hi / lo, AtMost, 10.0, 0.0));
    let min_level = p.inv_grad_integral.iter().copied().fold(f64::INFINITY, f64::min);
    out.push(Check::new(name, "per-level co-area integral", min_level, AtLeast, 4.0 * PI * 0.99, 0.01));
    out.push(Check::new(name, "F lower", p.f_value, AtLeast, 4.0 * PI * 0.99, 0.01));
    out.push(Check::new(name, "F upper", p.f_value, AtMost, p.f_limit * 1.01, 0.01));
    out.push(Check::new(name, "G lower", p.g_value, AtLeast, 0.99 * p.g_limit.max(omega), 0.01));
    out.push(Check::new(name, "C factor", a.c_factor(), AtLeast, 0.99, 0.01));
    out.push(Check::new(name, "rho / R", a.rho() / same_area_radius, AtMost, 1.0 + 1e-3, 1e-3));
    let alt = level_profile_via_areas(p, mp);
    out.push(Check::new(name, "F cross-method discrepancy", alt.f_discrepancy, AtMost, 0.01, 0.01));
    out.push(Check::new(name, "G cross-method discrepancy", alt.g_discrepancy, AtMost, 0.01, 0.01));
    let closure = (p.coarea_area() - omega).abs() / omega;
    out.push(Check::new(name, "co-area closure", closure, AtMost, 0.005, 0.005));

    let bopts = BoundOptions { radial_points: opts.radial_points, with_direct: opts.with_direct, tolerance: tol };
    for b in [0.2, 0.5, 0.8 * PI / omega] {
        if b * omega >= PI {
            continue;
        }
        let r = assemble_bound(&a, b, &bopts)?;
        let label = format!("b={b:.4}");
        out.push(Check::new(
            name,
            &format!("bound <= simplified ({label})"),
            r.bound_value,
            AtMost,
            r.simplified_bound * (1.0 + tol),
            tol,
        ));
        if let Some(direct) = r.mu_direct {
            out.push(Check::new(name, &format!("direct <= bound ({label})"), direct, AtMost, r.bound_value * (1.0 + tol), tol));
            if b == 0.5 {
                let profile = optimal_trial_profile(b, mp, opts.radial_points)?;
                let q = trial_rayleigh(&a.field, mp, b, &profile)?;
                out.push(Check::new(name, &format!("direct <= trial quotient ({label})"), direct, AtMost, q, 0.0));
                out.push(Check::new(
                    name,
                    &format!("trial quotient <= bound ({label})"),
                    q,
                    AtMost,
                    r.bound_value * (1.0 + tol),
                    tol,
                ));
            }
        }
    }
    if opts.with_direct && !is_disk {
        let g = gauge_invariance_check(spec, &a.field, 0.4)?;
        out.push(Check::new(name, "gauge discrepancy (b=0.4)", g.discrepancy, AtMost, 0.005, 0.005));
    }
    Ok(out)
}

fn spectrum_checks(radial_points: usize) -> Result<Vec<Check>> {
    let name = "disk spectrum";
    let mut out = Vec::new();
    let sopts = SpectrumOptions { n_points: radial_points, min_window: 6 };
    for br2 in [0.25, 0.5, 0.9] {
        let s = disk_mu1_with(br2, 1.0, &sopts)?;
        let next = s.per_mode.iter().filter(|m| m.m != 0).map(|m| m.mu).fold(f64::INFINITY, f64::min);
        out.push(Check::new(name, &format!("mode 0 minimizes (bR^2={br2})"), s.mu1, AtMost, next, 0.0));
    }
    for b in [0.5, 1.0] {
        let radii: Vec<f64> = (1..).map(|k| 0.2 * k as f64).take_while(|&r| r <= 0.9 / f64::sqrt(b) + 1e-12).collect();
        let mu = monotonicity_scan_radius(b, &radii)?;
        let step = mu.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        out.push(Check::new(name, &format!("increasing in R (b={b})"), step, AtLeast, 1e-8, 0.0));
    }
    let fields = [0.05, 0.1, 0.2, 0.4];
    let u = monotonicity_scan_field(1.0, &fields)?;
    let drop = u.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    out.push(Check::new(name, "mu/b^2 decreasing in b", drop, AtLeast, 0.0, 0.0));
    let u0 = extrapolate_to_zero_field(&fields, &u);
    out.push(Check::new(name, "extrapolated mu/b^2 at b=0 vs 1/8", (u0 - 0.125).abs() / 0.125, AtMost, 0.01, 0.01));
    let worst = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::new(name, "mu/b^2 below 1/8", worst, AtMost, 0.125 * (1.0 - 1e-12), 0.0));
    for (b, t) in [(0.5, 2.0), (0.8, 0.5)] {
        out.push(Check::new(name, &format!("scaling identity (b={b}, t={t})"), scaling_check(b, t)?, AtMost, 1e-6, 1e-6));
    }
    out.push(Check::new(name, "ellipse scaling cross-check (2,1,0.4)", ellipse_scaling_crosscheck(2.0, 1.0, 0.4)?, AtMost, 1e-6, 1e-6));
    for b in [0.3, 0.6, 0.9] {
        let r = ellipse_closed_form(1.2, 1.0 / 1.2, b, radial_points)?;
        out.push(Check::new(
            "ellipse(1.2,1/1.2) closed form",
            &format!("mu(B_rho) < mu(B_R) (b={b})"),
            r.mu_disk_rho,
            AtMost,
            r.mu_disk_same_area * (1.0 - 1e-9),
            1e-9,
        ));
    }
    Ok(out)
}

/// Runs every check on the builtin set; domains are processed concurrently
/// and reported in builtin order.
pub fn validate_builtins(opts: &ValidationOptions) -> Result<ValidationReport> {
    opts.grid.validate()?;
    let per_domain = DomainSpec::builtin_set()
        .par_iter()
        .map(|(name, spec)| domain_checks(name, spec, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut checks: Vec<Check> = per_domain.into_iter().flatten().collect();
    checks.extend(spectrum_checks(opts.radial_points)?);
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(ValidationReport { options: *opts, failed: checks.len() - passed, passed, checks })
}
