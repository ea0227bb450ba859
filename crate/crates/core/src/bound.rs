//! The torsion-function upper bound `C(Ω)·μ₁ᵇ(B_ρ)` on the lowest magnetic
//! Neumann eigenvalue, its closed form for ellipses, and the comparison with
//! the same-area disk.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::disk::{disk_mu1_with, SpectrumOptions, DEFAULT_RADIAL_POINTS};
use crate::error::{Error, Result};
use crate::fem::P2Space;
use crate::geometry::{area, DomainSpec};
use crate::level::{level_profile_with_area, LevelProfile, RadiusGrid};
use crate::magnetic::{build_gauge, solve_mu1, GaugeKind, EIGEN_TOLERANCE};
use crate::mesh::triangulate;
use crate::torsion::{locate_max, solve_torsion_on, MaxPoint, ScalarField};

/// Relative tolerance for inequalities between two discretized quantities.
pub const DEFAULT_TOLERANCE: f64 = 0.02;

pub const UNITS: &str = "lengths dimensionless; areas length^2; max_v length^2; eigenvalues 1/length^2";

pub const GUARANTEED: &str = "GUARANTEED";
pub const NOT_GUARANTEED: &str = "NOT-GUARANTEED";

/// Torsion function of a domain with everything the bound reads from it.
#[derive(Clone, Debug)]
pub struct TorsionAnalysis {
    pub spec: DomainSpec,
    pub field: ScalarField,
    pub max_point: MaxPoint,
    pub profile: LevelProfile,
    pub grid: RadiusGrid,
}

impl TorsionAnalysis {
    pub fn run(spec: &DomainSpec, mesh_h: f64, grid: &RadiusGrid) -> Result<Self> {
        grid.validate()?;
        let space = Arc::new(P2Space::new(triangulate(spec, mesh_h)?));
        let field = solve_torsion_on(space)?;
        let max_point = locate_max(&field)?;
        let profile = level_profile_with_area(&field, &max_point, grid, area(spec)?)?;
        Ok(TorsionAnalysis { spec: spec.clone(), field, max_point, profile, grid: *grid })
    }

    pub fn mesh_h(&self) -> f64 {
        self.field.space.h()
    }

    pub fn c_factor(&self) -> f64 {
        self.profile.g_value / (self.profile.f_value * self.max_point.value)
    }

    pub fn rho(&self) -> f64 {
        2.0 * self.max_point.value.sqrt()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BoundOptions {
    pub radial_points: usize,
    /// Solve the 2-D eigenproblem for `mu_direct`.
    pub with_direct: bool,
    pub tolerance: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions { radial_points: DEFAULT_RADIAL_POINTS, with_direct: false, tolerance: DEFAULT_TOLERANCE }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub source: &'static str,
    pub package: &'static str,
    pub version: &'static str,
    pub mesh_h: Option<f64>,
    pub triangles: Option<usize>,
    pub r_grid: Option<RadiusGrid>,
    pub radial_points: usize,
    pub torsion_residual: Option<f64>,
    pub eigen_tolerance: f64,
    pub direct_gauge: Option<GaugeKind>,
    pub direct_residual: Option<f64>,
    pub tolerance: f64,
}

/// Pass/fail of the report's own invariants at the configured tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct BoundChecks {
    pub rho_le_same_area_radius: bool,
    pub c_factor_ge_one: bool,
    pub bound_le_simplified: bool,
    pub direct_le_bound: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub domain: DomainSpec,
    pub b: f64,
    pub area: f64,
    pub admissible: bool,
    pub guarantee: &'static str,
    pub max_v: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "C_factor")]
    pub c_factor: f64,
    pub rho: f64,
    #[serde(rename = "same_area_radius_R")]
    pub same_area_radius: f64,
    pub hessian_det: f64,
    pub mu_disk_rho: f64,
    #[serde(rename = "mu_disk_R")]
    pub mu_disk_same_area: f64,
    pub bound_value: f64,
    pub simplified_bound: f64,
    pub mu_direct: Option<f64>,
    pub conjecture_margin: Option<f64>,
    /// `bound_value − mu_disk_R`: positive when the bound is weaker than the
    /// same-area disk value.
    pub bound_slack_vs_disk: f64,
    pub checks: BoundChecks,
    pub units: &'static str,
    pub provenance: Provenance,
}

fn check_field(b: f64) -> Result<()> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Parameter(format!("field intensity must be positive, got {b}")));
    }
    Ok(())
}

/// Bound report from a finished torsion analysis.
pub fn assemble_bound(analysis: &TorsionAnalysis, b: f64, opts: &BoundOptions) -> Result<BoundReport> {
    check_field(b)?;
    let mp = &analysis.max_point;
    let profile = &analysis.profile;
    if profile.max_value != mp.value || profile.r_grid.is_empty() {
        return Err(Error::Argument("level profile does not belong to this torsion maximum".into()));
    }
    let spec = &analysis.spec;
    let omega = area(spec)?;
    let c_factor = analysis.c_factor();
    let rho = analysis.rho();
    let same_area_radius = (omega / PI).sqrt();
    let disk_opts = SpectrumOptions { n_points: opts.radial_points, min_window: 0 };
    let mu_disk_rho = disk_mu1_with(b, rho, &disk_opts)?.mu1;
    let mu_disk_same_area = disk_mu1_with(b, same_area_radius, &disk_opts)?.mu1;
    let bound_value = c_factor * mu_disk_rho;
    let simplified_bound = c_factor * mu_disk_same_area;

    let (mu_direct, direct_residual) = if opts.with_direct {
        let gauge = build_gauge(spec, &analysis.field.space, b, GaugeKind::Symmetric, None)?;
        let eig = solve_mu1(&gauge)?;
        (Some(eig.mu1), Some(eig.residual))
    } else {
        (None, None)
    };
    let admissible = b * omega < PI;
    let tol = opts.tolerance;
    Ok(BoundReport {
        domain: spec.clone(),
        b,
        area: omega,
        admissible,
        guarantee: if admissible { GUARANTEED } else { NOT_GUARANTEED },
        max_v: mp.value,
        f: profile.f_value,
        g: profile.g_value,
        c_factor,
        rho,
        same_area_radius,
        hessian_det: mp.hessian_det,
        mu_disk_rho,
        mu_disk_same_area,
        bound_value,
        simplified_bound,
        mu_direct,
        conjecture_margin: mu_direct.map(|m| mu_disk_same_area - m),
        bound_slack_vs_disk: bound_value - mu_disk_same_area,
        checks: BoundChecks {
            rho_le_same_area_radius: rho <= same_area_radius * (1.0 + tol),
            c_factor_ge_one: c_factor >= 1.0 - tol,
            bound_le_simplified: bound_value <= simplified_bound * (1.0 + tol),
            direct_le_bound: mu_direct.map(|m| m <= bound_value * (1.0 + tol)),
        },
        units: UNITS,
        provenance: Provenance {
            source: "fem",
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            mesh_h: Some(analysis.mesh_h()),
            triangles: Some(analysis.field.space.num_elements()),
            r_grid: Some(analysis.grid),
            radial_points: opts.radial_points,
            torsion_residual: Some(analysis.field.residual),
            eigen_tolerance: EIGEN_TOLERANCE,
            direct_gauge: opts.with_direct.then_some(GaugeKind::Symmetric),
            direct_residual,
            tolerance: tol,
        },
    })
}

/// Closed-form report for the ellipse `x²/α² + y²/β² < 1`: `max v = 1/γ`,
/// `F = πγαβ`, `G = παβ`, `C = 1`, `ρ = 2/√γ`, with `γ = 2/α² + 2/β²`.
pub fn ellipse_closed_form(alpha: f64, beta: f64, b: f64, radial_points: usize) -> Result<BoundReport> {
    check_field(b)?;
    let spec = DomainSpec::ellipse(alpha, beta);
    spec.validate()?;
    let gamma = 2.0 / (alpha * alpha) + 2.0 / (beta * beta);
    let max_v = 1.0 / gamma;
    let rho = 2.0 / gamma.sqrt();
    let same_area_radius = (alpha * beta).sqrt();
    let disk_opts = SpectrumOptions { n_points: radial_points, min_window: 0 };
    let mu_disk_rho = disk_mu1_with(b, rho, &disk_opts)?.mu1;
    let mu_disk_same_area = disk_mu1_with(b, same_area_radius, &disk_opts)?.mu1;
    let admissible = b * alpha * beta < 1.0;
    if admissible && alpha != beta && mu_disk_rho >= mu_disk_same_area {
        return Err(Error::Internal(format!(
            "disk eigenvalue at ρ = {rho} is not below the value at √(αβ) = {same_area_radius}"
        )));
    }
    let omega = PI * alpha * beta;
    Ok(BoundReport {
        domain: spec,
        b,
        area: omega,
        admissible,
        guarantee: if admissible { GUARANTEED } else { NOT_GUARANTEED },
        max_v,
        f: PI * gamma * alpha * beta,
        g: omega,
        c_factor: 1.0,
        rho,
        same_area_radius,
        hessian_det: 4.0 / (gamma * gamma * alpha * alpha * beta * beta),
        mu_disk_rho,
        mu_disk_same_area,
        bound_value: mu_disk_rho,
        simplified_bound: mu_disk_same_area,
        mu_direct: None,
        conjecture_margin: None,
        bound_slack_vs_disk: mu_disk_rho - mu_disk_same_area,
        checks: BoundChecks {
            rho_le_same_area_radius: rho <= same_area_radius,
            c_factor_ge_one: true,
            bound_le_simplified: mu_disk_rho <= mu_disk_same_area,
            direct_le_bound: None,
        },
        units: UNITS,
        provenance: Provenance {
            source: "closed_form",
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            mesh_h: None,
            triangles: None,
            r_grid: None,
            radial_points,
            torsion_residual: None,
            eigen_tolerance: EIGEN_TOLERANCE,
            direct_gauge: None,
            direct_residual: None,
            tolerance: 0.0,
        },
    })
}

/// Relative difference between the rescaled value
/// `(α²+β²)/(2αβ)·μ₁^{b̂}(B_√(αβ))`, `b̂ = 2αβ b/(α²+β²)`, and `μ₁ᵇ(B_{2/√γ})`.
pub fn ellipse_scaling_crosscheck(alpha: f64, beta: f64, b: f64) -> Result<f64> {
    check_field(b)?;
    DomainSpec::ellipse(alpha, beta).validate()?;
    let s = alpha * alpha + beta * beta;
    let b_hat = 2.0 * alpha * beta / s * b;
    let scaled = s / (2.0 * alpha * beta) * disk_mu1_with(b_hat, (alpha * beta).sqrt(), &Default::default())?.mu1;
    let gamma = 2.0 / (alpha * alpha) + 2.0 / (beta * beta);
    let direct = disk_mu1_with(b, 2.0 / gamma.sqrt(), &Default::default())?.mu1;
    Ok((scaled - direct).abs() / direct)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureReport {
    pub b: f64,
    #[serde(rename = "same_area_radius_R")]
    pub same_area_radius: f64,
    #[serde(rename = "mu_disk_R")]
    pub mu_disk_same_area: f64,
    pub mu_direct: f64,
    /// `μ₁ᵇ(B_R) − μ₁ᵇ(Ω)`; the open conjecture says this is non-negative.
    pub conjecture_margin: f64,
    pub bound_value: Option<f64>,
    /// `bound_value − μ₁ᵇ(B_R)`.
    pub bound_slack: Option<f64>,
}

/// Measures the conjecture margin and the bound's slack against the
/// same-area disk. Nothing is asserted.
pub fn conjecture_compare(spec: &DomainSpec, b: f64, mu_direct: f64, bound_value: Option<f64>) -> Result<ConjectureReport> {
    check_field(b)?;
    let same_area_radius = (area(spec)? / PI).sqrt();
    let mu_disk = disk_mu1_with(b, same_area_radius, &Default::default())?.mu1;
    Ok(ConjectureReport {
        b,
        same_area_radius,
        mu_disk_same_area: mu_disk,
        mu_direct,
        conjecture_margin: mu_disk - mu_direct,
        bound_value,
        bound_slack: bound_value.map(|v| v - mu_disk),
    })
}
