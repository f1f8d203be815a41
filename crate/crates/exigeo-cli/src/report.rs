//! Deterministic report emission: RFC 4180 CSV with 17-significant-digit
//! '.'-decimal numbers, and JSON summaries embedding the resolved
//! configuration and the toolkit version.

use std::io::Write;
use std::path::Path;

use exigeo::error::ExigeoError;
use exigeo::residue::{MaximizerKind, Obstacle, ResidueResult};
use exigeo::solvers::ExpansionStudy;
use exigeo::varifold::{ExteriorSurface, MesoscaleReport, MesoscaleVerdict};
use serde::Serialize;

pub fn fmt(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

pub fn write_csv<P, R>(path: P, header: &[&str], rows: R) -> Result<(), ExigeoError>
where
    P: AsRef<Path>,
    R: Iterator<Item = Vec<f64>>,
{
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "{}\r\n", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        write!(out, "{}\r\n", cells.join(","))?;
    }
    Ok(())
}

fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[derive(Serialize)]
pub struct UnduloidRow {
    pub eps: f64,
    pub outer_radius: f64,
    pub argmin_gradient: f64,
    pub min_gradient: f64,
    pub total_height: f64,
}

#[derive(Serialize)]
pub struct SlopeSummary {
    pub flatness: f64,
    pub argmin: f64,
    pub outer: f64,
    pub target_flatness: f64,
    pub target_argmin: f64,
    pub target_outer: f64,
}

#[derive(Serialize)]
struct UnduloidSummary<'a> {
    version: &'static str,
    config: UnduloidConfig<'a>,
    family: &'a [UnduloidRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    slopes: Option<SlopeSummary>,
}

#[derive(Serialize)]
struct UnduloidConfig<'a> {
    n: usize,
    eps: &'a [f64],
}

pub fn write_unduloid_summary(
    path: &Path,
    n: usize,
    eps: &[f64],
    family: &[UnduloidRow],
    slopes: Option<SlopeSummary>,
) -> Result<(), ExigeoError> {
    let doc = UnduloidSummary { version: version(), config: UnduloidConfig { n, eps }, family, slopes };
    write_json(path, &doc)
}

#[derive(Serialize)]
struct MesoscaleJson {
    version: &'static str,
    config: MesoscaleConfigJson,
    gamma_boundary_ok: bool,
    gamma_mass_ok: bool,
    s_window: (f64, f64),
    s_used: Option<f64>,
    deficit_at_s8: Option<f64>,
    r_star: String,
    s_star: String,
    hypotheses_met: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateJson>,
}

#[derive(Serialize)]
struct MesoscaleConfigJson {
    n: usize,
    hole_radius: f64,
    lambda: f64,
    gamma: f64,
    eps0: f64,
    m0: f64,
    sigma: f64,
}

#[derive(Serialize)]
struct CertificateJson {
    normal: Vec<f64>,
    annulus: (f64, f64),
    sup_c0: f64,
    sup_c1: f64,
    sup_radial: f64,
}

pub fn write_mesoscale_report(
    path: &Path,
    surface: &ExteriorSurface,
    rep: &MesoscaleReport,
) -> Result<(), ExigeoError> {
    let (met, failure) = match &rep.verdict {
        MesoscaleVerdict::HypothesesMet => (true, None),
        MesoscaleVerdict::HypothesesFailed(why) => (false, Some(why.clone())),
    };
    let doc = MesoscaleJson {
        version: version(),
        config: MesoscaleConfigJson {
            n: surface.n(),
            hole_radius: surface.hole_radius(),
            lambda: surface.lambda(),
            gamma: rep.thresholds.gamma,
            eps0: rep.thresholds.eps0,
            m0: rep.thresholds.m0,
            sigma: rep.thresholds.sigma,
        },
        gamma_boundary_ok: rep.gamma_boundary_ok,
        gamma_mass_ok: rep.gamma_mass_ok,
        s_window: rep.s_window,
        s_used: rep.s_used,
        deficit_at_s8: rep.deficit_at_s8,
        r_star: fmt(rep.r_star),
        s_star: fmt(rep.s_star),
        hypotheses_met: met,
        failure,
        certificate: rep.certificate.as_ref().map(|c| CertificateJson {
            normal: c.plane.normal().as_slice().to_vec(),
            annulus: c.annulus,
            sup_c0: c.sup_c0,
            sup_c1: c.sup_c1,
            sup_radial: c.sup_radial,
        }),
    };
    write_json(path, &doc)
}

#[derive(Serialize)]
struct ResidueJson {
    version: &'static str,
    config: ResidueConfigJson,
    lower: f64,
    upper: f64,
    exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    maximizer: String,
}

#[derive(Serialize)]
struct ResidueConfigJson {
    n: usize,
    diameter: f64,
}

pub fn residue_json(w: &Obstacle, r: &ResidueResult) -> Result<String, ExigeoError> {
    let maximizer = match &r.maximizer {
        MaximizerKind::Plane { height, .. } => format!("plane at height {}", fmt(*height)),
        MaximizerKind::HalfLines { .. } => "two half-lines through a farthest pair".to_string(),
        MaximizerKind::Attached(g) => {
            format!("attached catenoid-type profile (c = {})", fmt(g.c))
        }
        MaximizerKind::Trivial => "empty obstacle".to_string(),
    };
    let doc = ResidueJson {
        version: version(),
        config: ResidueConfigJson { n: w.n(), diameter: w.diameter() },
        lower: r.lower,
        upper: r.upper,
        exact: r.exact,
        value: if r.exact { Some(r.lower) } else { None },
        maximizer,
    };
    serde_json::to_string_pretty(&doc)
        .map_err(|e| ExigeoError::validation(format!("json encoding failed: {e}")))
}

#[derive(Serialize)]
struct ExpansionJson {
    version: &'static str,
    config: ExpansionConfigJson,
    intercept: f64,
    rate_coefficient: f64,
    fit_residual: f64,
    target: f64,
}

#[derive(Serialize)]
struct ExpansionConfigJson {
    n: usize,
    volumes: Vec<f64>,
}

pub fn write_expansion_summary(
    path: &Path,
    w: &Obstacle,
    study: &ExpansionStudy,
) -> Result<(), ExigeoError> {
    let doc = ExpansionJson {
        version: version(),
        config: ExpansionConfigJson {
            n: w.n(),
            volumes: study.rows.iter().map(|r| r.volume).collect(),
        },
        intercept: study.intercept,
        rate_coefficient: study.rate_coefficient,
        fit_residual: study.fit_residual,
        target: study.target,
    };
    write_json(path, &doc)
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<(), ExigeoError> {
    let text = serde_json::to_string_pretty(doc)
        .map_err(|e| ExigeoError::validation(format!("json encoding failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct SolveJson {
    version: &'static str,
    config: ExpansionConfigJson,
    rows: Vec<SolveRowJson>,
}

#[derive(Serialize)]
struct SolveRowJson {
    volume: f64,
    energy: f64,
    ball_perimeter: f64,
    gap: f64,
}

pub fn write_solve_summary(
    path: &Path,
    n: usize,
    rows: &[(f64, f64, f64)],
) -> Result<(), ExigeoError> {
    let doc = SolveJson {
        version: version(),
        config: ExpansionConfigJson { n, volumes: rows.iter().map(|r| r.0).collect() },
        rows: rows
            .iter()
            .map(|&(v, e, p)| SolveRowJson { volume: v, energy: e, ball_perimeter: p, gap: e - p })
            .collect(),
    };
    write_json(path, &doc)
}
