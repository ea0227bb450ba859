//! Command dispatch.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use magbound_core::bound::{
    assemble_bound, conjecture_compare, BoundOptions, BoundReport, ConjectureReport, TorsionAnalysis, UNITS,
};
use magbound_core::disk::{disk_mu1_with, DiskSpectrum, SpectrumOptions};
use magbound_core::geometry::{area, DomainSpec};
use magbound_core::level::{level_profile_via_areas, AreaFormulas, LevelProfile, RadiusGrid};
use magbound_core::torsion::{torsion_properties, MaxPoint, TorsionProperties};
use magbound_core::validation::{validate_builtins, ValidationOptions, ValidationReport};
use magbound_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{BoundArgs, Common, DomainArgs, Format, SpectrumArgs, SweepArgs, ValidateArgs};

/// A failure with the module it came from; usage failures get their own
/// exit code.
#[derive(Debug)]
pub struct Failure {
    pub module: &'static str,
    pub error: Error,
    pub usage: bool,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { module: "cli_reporting", error: Error::Argument(message.into()), usage: true }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

trait InModule<T> {
    fn in_module(self, module: &'static str) -> Outcome<T>;
}

impl<T> InModule<T> for magbound_core::Result<T> {
    fn in_module(self, module: &'static str) -> Outcome<T> {
        self.map_err(|error| Failure { module, error, usage: false })
    }
}

/// What a command produced: the stdout text and whether every check passed.
pub struct Emitted {
    pub stdout: String,
    pub all_passed: bool,
}

impl Emitted {
    fn ok(stdout: String) -> Self {
        Emitted { stdout, all_passed: true }
    }
}

fn to_json<T: Serialize>(value: &T) -> Outcome<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Failure { module: "cli_reporting", error: Error::Serialization(e.to_string()), usage: false })?;
    s.push('\n');
    Ok(s)
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure { module: "cli_reporting", error: Error::Io(e), usage: false }
}

/// Writes `name` inside `dir` through a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Outcome<()> {
    fs::create_dir_all(dir).map_err(io_failure)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io_failure)?;
    f.write_all(contents).map_err(io_failure)?;
    f.sync_all().map_err(io_failure)?;
    fs::rename(&tmp, dir.join(name)).map_err(io_failure)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> magbound_core::Result<()>) -> Outcome<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf).in_module("cli_reporting")?;
    Ok(buf)
}

fn grid(common: &Common) -> Outcome<RadiusGrid> {
    let g = RadiusGrid { lo: common.r_grid.lo, hi: common.r_grid.hi, n: common.r_grid.n };
    g.validate().map_err(|e| Failure { module: "cli_reporting", error: e, usage: true })?;
    Ok(g)
}

fn radial_points(common: &Common) -> Outcome<usize> {
    if common.radial_n < magbound_core::disk::MIN_RADIAL_POINTS {
        return Err(Failure::usage(format!(
            "--radial-n must be at least {}",
            magbound_core::disk::MIN_RADIAL_POINTS
        )));
    }
    Ok(common.radial_n)
}

pub fn resolve_domain(path: Option<&PathBuf>, builtin: Option<&str>) -> Outcome<DomainSpec> {
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        return DomainSpec::from_json(&text)
            .map_err(|e| Failure::usage(format!("malformed domain file {}: {e}", path.display())));
    }
    let name = builtin.ok_or_else(|| Failure::usage("a domain is required (--domain or --builtin)"))?;
    DomainSpec::builtin_set()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
        .ok_or_else(|| {
            let names: Vec<&str> = DomainSpec::builtin_set().iter().map(|(n, _)| *n).collect();
            Failure::usage(format!("unknown builtin '{name}'; expected one of {names:?}"))
        })
}

fn analyze(spec: &DomainSpec, common: &Common) -> Outcome<TorsionAnalysis> {
    let g = grid(common)?;
    spec.validate().in_module("domain_geometry")?;
    if !(common.mesh_h < 1.0) {
        return Err(Failure::usage("--mesh-h must be below 1"));
    }
    let module = "torsion_solver";
    TorsionAnalysis::run(spec, common.mesh_h, &g).in_module(module)
}

#[derive(Serialize)]
struct TorsionSummary<'a> {
    domain: &'a DomainSpec,
    area: f64,
    mesh_h: f64,
    triangles: usize,
    nodes: usize,
    residual: f64,
    max_point: &'a MaxPoint,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "C_factor")]
    c_factor: f64,
    rho: f64,
    #[serde(rename = "same_area_radius_R")]
    same_area_radius: f64,
    f_limit: f64,
    g_limit: f64,
    area_formulas: AreaFormulas,
    coarea_area: f64,
    properties: TorsionProperties,
    r_grid: RadiusGrid,
    units: &'static str,
    version: &'static str,
}

pub fn torsion(args: &DomainArgs) -> Outcome<Emitted> {
    let spec = resolve_domain(args.domain.as_ref(), args.builtin.as_deref())?;
    let a = analyze(&spec, &args.common)?;
    let omega = area(&spec).in_module("domain_geometry")?;
    let p: &LevelProfile = &a.profile;
    let summary = TorsionSummary {
        domain: &spec,
        area: omega,
        mesh_h: a.mesh_h(),
        triangles: a.field.space.num_elements(),
        nodes: a.field.space.num_nodes(),
        residual: a.field.residual,
        max_point: &a.max_point,
        f: p.f_value,
        g: p.g_value,
        c_factor: a.c_factor(),
        rho: a.rho(),
        same_area_radius: (omega / PI).sqrt(),
        f_limit: p.f_limit,
        g_limit: p.g_limit,
        area_formulas: level_profile_via_areas(p, &a.max_point),
        coarea_area: p.coarea_area(),
        properties: torsion_properties(&a.field, &a.max_point),
        r_grid: a.grid,
        units: UNITS,
        version: env!("CARGO_PKG_VERSION"),
    };
    let json = to_json(&summary)?;
    let profile_csv = csv_bytes(|w| p.write_csv(w))?;
    if let Some(dir) = &args.common.out {
        write_atomic(dir, "torsion.json", json.as_bytes())?;
        write_atomic(dir, "level_profile.csv", &profile_csv)?;
        write_atomic(dir, "torsion_field.csv", &csv_bytes(|w| a.field.write_csv(w))?)?;
    }
    Ok(Emitted::ok(match args.common.format.unwrap_or(Format::Json) {
        Format::Json => json,
        Format::Csv => String::from_utf8(profile_csv).expect("csv output is UTF-8"),
    }))
}

pub fn spectrum(args: &SpectrumArgs) -> Outcome<Emitted> {
    let opts = SpectrumOptions { n_points: radial_points(&args.common)?, min_window: 0 };
    let fields = args.field.values();
    let spectra: Vec<DiskSpectrum> = fields
        .par_iter()
        .map(|&b| disk_mu1_with(b, args.radius, &opts))
        .collect::<magbound_core::Result<_>>()
        .in_module("disk_spectrum")?;
    let table = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["b", "R", "mu1", "minimizing_mode"]).map_err(csv_failure)?;
        for s in &spectra {
            w.serialize((s.b, s.radius, s.mu1, s.minimizing_mode)).map_err(csv_failure)?;
        }
        w.into_inner().map_err(|e| io_failure(e.into_error()))?
    };
    let modes = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["b", "m", "mu"]).map_err(csv_failure)?;
        for s in &spectra {
            for m in &s.per_mode {
                w.serialize((s.b, m.m, m.mu)).map_err(csv_failure)?;
            }
        }
        w.into_inner().map_err(|e| io_failure(e.into_error()))?
    };
    #[derive(Serialize)]
    struct Report<'a> {
        units: &'static str,
        radial_points: usize,
        spectra: &'a [DiskSpectrum],
    }
    let json = to_json(&Report { units: UNITS, radial_points: opts.n_points, spectra: &spectra })?;
    if let Some(dir) = &args.common.out {
        write_atomic(dir, "spectrum.json", json.as_bytes())?;
        write_atomic(dir, "spectrum.csv", &table)?;
        write_atomic(dir, "modes.csv", &modes)?;
    }
    Ok(Emitted::ok(match args.common.format.unwrap_or(Format::Json) {
        Format::Json => json,
        Format::Csv => String::from_utf8(table).expect("csv output is UTF-8"),
    }))
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure { module: "cli_reporting", error: Error::Serialization(e.to_string()), usage: false }
}

#[derive(Clone, Serialize)]
struct Comparison {
    parameter: Option<f64>,
    bound: BoundReport,
    conjecture: Option<ConjectureReport>,
}

const TABLE_HEADER: [&str; 15] = [
    "parameter",
    "b",
    "area",
    "admissible",
    "guarantee",
    "max_v",
    "F",
    "G",
    "C_factor",
    "rho",
    "mu_disk_rho",
    "mu_disk_R",
    "bound_value",
    "mu_direct",
    "conjecture_margin",
];

fn table(rows: &[Comparison]) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER).map_err(csv_failure)?;
    for c in rows {
        let r = &c.bound;
        w.serialize((
            c.parameter,
            r.b,
            r.area,
            r.admissible,
            r.guarantee,
            r.max_v,
            r.f,
            r.g,
            r.c_factor,
            r.rho,
            r.mu_disk_rho,
            r.mu_disk_same_area,
            r.bound_value,
            r.mu_direct,
            r.conjecture_margin,
        ))
        .map_err(csv_failure)?;
    }
    w.into_inner().map_err(|e| io_failure(e.into_error()))
}

fn compare_one(a: &TorsionAnalysis, b: f64, opts: &BoundOptions, parameter: Option<f64>, conjecture: bool) -> Outcome<Comparison> {
    if !(b > 0.0) {
        return Err(Failure::usage("field intensity must be positive for bounds"));
    }
    let bound = assemble_bound(a, b, opts).in_module("bound_engine")?;
    let conjecture = match (conjecture, bound.mu_direct) {
        (true, Some(mu)) => Some(conjecture_compare(&a.spec, b, mu, Some(bound.bound_value)).in_module("bound_engine")?),
        _ => None,
    };
    Ok(Comparison { parameter, bound, conjecture })
}

fn bound_options(common: &Common, direct: bool) -> Outcome<BoundOptions> {
    Ok(BoundOptions { radial_points: radial_points(common)?, with_direct: direct, tolerance: common.tol })
}

fn emit_comparisons(rows: &[Comparison], common: &Common, stem: &str, with_conjecture: bool) -> Outcome<Emitted> {
    let json = if with_conjecture {
        to_json(&rows)?
    } else {
        let reports: Vec<&BoundReport> = rows.iter().map(|c| &c.bound).collect();
        if reports.len() == 1 { to_json(reports[0])? } else { to_json(&reports)? }
    };
    let csv = table(rows)?;
    if let Some(dir) = &common.out {
        write_atomic(dir, &format!("{stem}.json"), json.as_bytes())?;
        write_atomic(dir, &format!("{stem}.csv"), &csv)?;
    }
    Ok(Emitted::ok(match common.format.unwrap_or(Format::Json) {
        Format::Json => json,
        Format::Csv => String::from_utf8(csv).expect("csv output is UTF-8"),
    }))
}

pub fn bound(args: &BoundArgs, compare: bool) -> Outcome<Emitted> {
    let common = &args.domain.common;
    let spec = resolve_domain(args.domain.domain.as_ref(), args.domain.builtin.as_deref())?;
    let opts = bound_options(common, args.direct || compare)?;
    let a = analyze(&spec, common)?;
    let rows = args
        .field
        .values()
        .par_iter()
        .map(|&b| compare_one(&a, b, &opts, None, compare))
        .collect::<Outcome<Vec<_>>>()?;
    emit_comparisons(&rows, common, if compare { "compare" } else { "bound" }, compare)
}

/// Members of a one-parameter family, each scaled to area π.
fn family_members(text: &str) -> Outcome<Vec<(f64, DomainSpec)>> {
    let (name, range) = text
        .split_once(':')
        .ok_or_else(|| Failure::usage(format!("--family expects name:lo:hi:n, got '{text}'")))?;
    let range: crate::args::Range = range.parse().map_err(Failure::usage)?;
    let mut out = Vec::new();
    for s in range.values() {
        let spec = match name {
            "ellipse" if s > 0.0 => DomainSpec::ellipse(s, 1.0),
            "superellipse" => {
                let p = s.round();
                if p < 4.0 || p % 2.0 != 0.0 {
                    return Err(Failure::usage(format!("superellipse powers must be even and ≥ 4, got {s}")));
                }
                DomainSpec::superellipse(p as u32, 1.0)
            }
            _ => return Err(Failure::usage(format!("unknown family '{name}' or bad parameter {s}"))),
        };
        out.push((s, spec.scaled_to_area(PI).in_module("domain_geometry")?));
    }
    Ok(out)
}

pub fn sweep(args: &SweepArgs) -> Outcome<Emitted> {
    let common = &args.common;
    let opts = bound_options(common, args.direct)?;
    let fields = args.field.values();
    let points_dir = common.out.as_ref().map(|d| d.join("points"));
    let rows: Vec<Comparison> = if let Some(family) = &args.family {
        if fields.len() != 1 {
            return Err(Failure::usage("a family sweep takes a single --b"));
        }
        let members = family_members(family)?;
        members
            .par_iter()
            .enumerate()
            .map(|(i, (s, spec))| {
                let a = analyze(spec, common)?;
                let row = compare_one(&a, fields[0], &opts, Some(*s), args.direct)?;
                if let Some(dir) = &points_dir {
                    write_atomic(dir, &format!("{i:04}.json"), to_json(&row)?.as_bytes())?;
                }
                Ok(row)
            })
            .collect::<Outcome<_>>()?
    } else {
        let spec = resolve_domain(args.domain.as_ref(), args.builtin.as_deref())?;
        let a = analyze(&spec, common)?;
        fields
            .par_iter()
            .enumerate()
            .map(|(i, &b)| {
                let row = compare_one(&a, b, &opts, Some(b), args.direct)?;
                if let Some(dir) = &points_dir {
                    write_atomic(dir, &format!("{i:04}.json"), to_json(&row)?.as_bytes())?;
                }
                Ok(row)
            })
            .collect::<Outcome<_>>()?
    };
    emit_comparisons(&rows, common, "sweep", true)
}

fn validation_text(report: &ValidationReport) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let relation = match c.relation {
            magbound_core::validation::Relation::AtMost => "<=",
            magbound_core::validation::Relation::AtLeast => ">=",
        };
        s.push_str(&format!(
            "{} {} | {}: {:.6e} {relation} {:.6e} (tol {:.1e}, margin {:.3e})\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.domain,
            c.property,
            c.measured,
            c.limit,
            c.tolerance,
            c.margin
        ));
    }
    s.push_str(&format!("{} passed, {} failed\n", report.passed, report.failed));
    s
}

pub fn validate(args: &ValidateArgs) -> Outcome<Emitted> {
    let common = &args.common;
    let opts = ValidationOptions {
        mesh_h: common.mesh_h,
        grid: grid(common)?,
        radial_points: radial_points(common)?,
        tolerance: common.tol,
        with_direct: !args.skip_direct,
    };
    let report = validate_builtins(&opts).in_module("validation")?;
    let json = to_json(&report)?;
    let csv = {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &report.checks {
            w.serialize(c).map_err(csv_failure)?;
        }
        w.into_inner().map_err(|e| io_failure(e.into_error()))?
    };
    if let Some(dir) = &common.out {
        write_atomic(dir, "validate.json", json.as_bytes())?;
        write_atomic(dir, "validate.csv", &csv)?;
    }
    Ok(Emitted {
        stdout: match common.format {
            None => validation_text(&report),
            Some(Format::Json) => json,
            Some(Format::Csv) => String::from_utf8(csv).expect("csv output is UTF-8"),
        },
        all_passed: report.all_passed(),
    })
}
