//! exigeo: command-line studies of exterior isoperimetric geometry.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exigeo::error::ExigeoError;
use exigeo::residue::{maximize_residue, Obstacle};
use exigeo::solvers::{
    ball_perimeter, expansion_study, solve_axisym, solve_polygon, PolygonParams, SolverKind,
};
use exigeo::unduloid::{mesoscale_exponents, UnduloidProfile};
use exigeo::varifold::{
    mesoscale_evaluate, ExteriorSurface, MesoscaleThresholds, MesoscaleVerdict, TriangleMesh,
};

#[derive(Parser)]
#[command(name = "exigeo", version, about = "Exterior isoperimetric geometry toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ThresholdArgs {
    /// mass/boundary bound of the flatness criterion
    #[arg(long)]
    gamma: Option<f64>,
    /// deficit tolerance of the flatness criterion
    #[arg(long)]
    eps0: Option<f64>,
    /// mesoscale window factor
    #[arg(long)]
    m0: Option<f64>,
    /// graphicality norm target
    #[arg(long)]
    sigma: Option<f64>,
}

impl ThresholdArgs {
    fn resolve(&self, n: usize) -> Result<MesoscaleThresholds, ExigeoError> {
        let mut t = MesoscaleThresholds::defaults(n);
        for (name, v, slot) in [
            ("gamma", self.gamma, &mut t.gamma),
            ("eps0", self.eps0, &mut t.eps0),
            ("m0", self.m0, &mut t.m0),
            ("sigma", self.sigma, &mut t.sigma),
        ] {
            if let Some(x) = v {
                if x <= 0.0 {
                    return Err(ExigeoError::validation(format!("--{name} must be positive")));
                }
                *slot = x;
            }
        }
        Ok(t)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate and certify unduloid half-period profiles
    Unduloid {
        /// surface dimension (ambient is n+1)
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// waist size(s), comma separated
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// profile sample count per waist
        #[arg(long, default_value_t = 512)]
        samples: usize,
        /// also export each half-period as a triangle mesh (.off or .obj)
        #[arg(long)]
        mesh_out: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Density, deficit, and mesoscale-criterion diagnostics of a surface
    Diagnose {
        /// mesh file (.off or .obj)
        #[arg(long)]
        mesh: PathBuf,
        /// mean-curvature bound of the surface
        #[arg(long = "Lambda", default_value_t = 0.0)]
        lambda: f64,
        /// radii for the density table, comma separated (default: 64
        /// log-spaced radii inside the surface extent)
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Bracket or compute the isoperimetric residue of an obstacle
    Residue {
        /// obstacle spec file (line-oriented key = value)
        #[arg(long)]
        obstacle: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the exterior isoperimetric problem at given volumes
    Solve {
        #[arg(long)]
        obstacle: PathBuf,
        #[arg(long, value_delimiter = ',')]
        volumes: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Energy-expansion study: gaps, extrapolated intercept, residue target
    Expansion {
        #[arg(long)]
        obstacle: PathBuf,
        #[arg(long, value_delimiter = ',')]
        volumes: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a triangle mesh between OFF and OBJ
    Convert {
        #[arg(long)]
        mesh: PathBuf,
        /// output path; the extension selects the format
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

/// EXIGEO_THREADS caps the worker count of the data-parallel sweeps.
fn init_threads() {
    if let Ok(v) = std::env::var("EXIGEO_THREADS") {
        if v.parse::<usize>().is_ok() {
            std::env::set_var("RAYON_NUM_THREADS", v);
        }
    }
}

fn run(cli: Cli) -> Result<(), ExigeoError> {
    match cli.command {
        Command::Unduloid { n, eps, samples, mesh_out, out, format } => {
            cmd_unduloid(n, &eps, samples, mesh_out, &out, &format)
        }
        Command::Diagnose { mesh, lambda, radii, thresholds, out, format } => {
            cmd_diagnose(&mesh, lambda, &radii, &thresholds, &out, &format)
        }
        Command::Residue { obstacle, out } => cmd_residue(&obstacle, out.as_deref()),
        Command::Solve { obstacle, volumes, out } => cmd_solve(&obstacle, &volumes, &out),
        Command::Expansion { obstacle, volumes, out } => cmd_expansion(&obstacle, &volumes, &out),
        Command::Convert { mesh, out } => cmd_convert(&mesh, &out),
    }
}

fn validate_grid(name: &str, grid: &[f64]) -> Result<(), ExigeoError> {
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(ExigeoError::validation(format!("{name} must be strictly increasing")));
        }
    }
    if grid.iter().any(|&v| v <= 0.0) {
        return Err(ExigeoError::validation(format!("{name} must be positive")));
    }
    Ok(())
}

fn cmd_unduloid(
    n: usize,
    eps: &[f64],
    samples: usize,
    mesh_out: bool,
    out: &std::path::Path,
    format: &str,
) -> Result<(), ExigeoError> {
    if eps.is_empty() {
        return Err(ExigeoError::validation("--eps needs at least one waist size"));
    }
    if format != "csv" && format != "json" {
        return Err(ExigeoError::validation("--format must be csv or json"));
    }
    std::fs::create_dir_all(out)?;
    let mut family = Vec::new();
    for &e in eps {
        let p = UnduloidProfile::new(n, e)?;
        let mut rows = Vec::with_capacity(samples);
        for k in 0..samples {
            let r = p.waist()
                + (p.outer_radius() - p.waist()) * k as f64 / (samples.max(2) - 1) as f64;
            rows.push((r, p.profile(r)?));
        }
        let path = out.join(format!("profile_n{n}_eps{e:e}.csv"));
        report::write_csv(&path, &["r", "f_eps"], rows.iter().map(|&(a, b)| vec![a, b]))?;
        if mesh_out && n == 2 {
            let surf = ExteriorSurface::from_unduloid(&p, 2048)?;
            if let exigeo::varifold::SurfaceGeometry::Revolution(rev) = surf.geometry() {
                let mesh = rev.tessellate(128, 128)?;
                let mut file =
                    std::fs::File::create(out.join(format!("unduloid_n{n}_eps{e:e}.off")))?;
                mesh.write_off(&mut file)?;
            }
        }
        let (argmin, gmin) = p.min_gradient()?;
        family.push(report::UnduloidRow {
            eps: e,
            outer_radius: p.outer_radius(),
            argmin_gradient: argmin,
            min_gradient: gmin,
            total_height: p.total_height(),
        });
    }
    let lo = eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps.iter().cloned().fold(0.0f64, f64::max);
    let slopes = if eps.len() >= 4 && hi / lo >= 100.0 {
        let m = mesoscale_exponents(n, eps)?;
        Some(report::SlopeSummary {
            flatness: m.slope_flatness,
            argmin: m.slope_argmin,
            outer: m.slope_outer,
            target_flatness: 2.0 * (n as f64 - 1.0) / n as f64,
            target_argmin: (n as f64 - 1.0) / n as f64,
            target_outer: n as f64 - 1.0,
        })
    } else {
        None
    };
    report::write_unduloid_summary(&out.join("unduloid_summary.json"), n, eps, &family, slopes)?;
    println!("unduloid: {} profiles written", eps.len());
    Ok(())
}

fn cmd_diagnose(
    mesh: &std::path::Path,
    lambda: f64,
    radii: &[f64],
    thresholds: &ThresholdArgs,
    out: &std::path::Path,
    format: &str,
) -> Result<(), ExigeoError> {
    if lambda < 0.0 {
        return Err(ExigeoError::validation("--Lambda must be nonnegative"));
    }
    if format != "csv" && format != "json" {
        return Err(ExigeoError::validation("--format must be csv or json"));
    }
    let tri = TriangleMesh::read_auto(mesh)?;
    let surface = ExteriorSurface::from_mesh(tri, lambda)?;
    let grid: Vec<f64> = if radii.is_empty() {
        let lo = surface.hole_radius() * 1.05;
        let hi = surface.upper_radius() * 0.95;
        (0..64).map(|k| lo * (hi / lo).powf(k as f64 / 63.0)).collect()
    } else {
        validate_grid("--radii", radii)?;
        radii.to_vec()
    };
    let profile = surface.deficit_profile(&grid)?;
    std::fs::create_dir_all(out)?;
    report::write_csv(
        &out.join("theta_table.csv"),
        &["r", "theta", "delta", "quad_error"],
        profile.samples.iter().map(|s| vec![s.r, s.theta, s.deficit, s.quad_error]),
    )?;
    let th = thresholds.resolve(surface.n())?;
    let rep = mesoscale_evaluate(&surface, th)?;
    report::write_mesoscale_report(&out.join("mesoscale_report.json"), &surface, &rep)?;
    let ok = matches!(rep.verdict, MesoscaleVerdict::HypothesesMet);
    let max_delta = profile.max_abs_deficit();
    println!(
        "diagnose: {} radii, max |delta| = {max_delta:.3e}, hypotheses_met = {ok}",
        grid.len()
    );
    Ok(())
}

fn cmd_residue(
    obstacle: &std::path::Path,
    out: Option<&std::path::Path>,
) -> Result<(), ExigeoError> {
    let text = std::fs::read_to_string(obstacle)?;
    let w = Obstacle::from_spec_str(&text)?;
    let r = maximize_residue(&w)?;
    let json = report::residue_json(&w, &r)?;
    match out {
        Some(p) => {
            if let Some(dir) = p.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, &json)?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn solver_for(w: &Obstacle) -> Result<SolverKind, ExigeoError> {
    match w.n() {
        1 => Ok(SolverKind::Polygon),
        2 => Ok(SolverKind::Axisym),
        n => Err(ExigeoError::validation(format!("no solver for n = {n}"))),
    }
}

fn cmd_solve(
    obstacle: &std::path::Path,
    volumes: &[f64],
    out: &std::path::Path,
) -> Result<(), ExigeoError> {
    if volumes.is_empty() {
        return Err(ExigeoError::validation("--volumes needs at least one value"));
    }
    validate_grid("--volumes", volumes)?;
    let text = std::fs::read_to_string(obstacle)?;
    let w = Obstacle::from_spec_str(&text)?;
    let kind = solver_for(&w)?;
    let mut rows = Vec::new();
    for &v in volumes {
        let energy = match kind {
            SolverKind::Polygon => solve_polygon(&w, v, &PolygonParams::default())?.energy,
            SolverKind::Axisym => {
                let r = match w.shape() {
                    exigeo::residue::ObstacleShape::Ball { radius, .. } => *radius,
                    exigeo::residue::ObstacleShape::Empty => 0.0,
                    _ => {
                        return Err(ExigeoError::validation(
                            "the n = 2 solver supports ball obstacles",
                        ))
                    }
                };
                solve_axisym(r, v)?.energy
            }
        };
        let n = if kind == SolverKind::Polygon { 1 } else { 2 };
        rows.push((v, energy, ball_perimeter(n, v)));
    }
    std::fs::create_dir_all(out)?;
    report::write_csv(
        &out.join("solve.csv"),
        &["v", "psi", "ball_perimeter", "gap"],
        rows.iter().map(|&(v, e, p)| vec![v, e, p, e - p]),
    )?;
    let n = if kind == SolverKind::Polygon { 1 } else { 2 };
    report::write_solve_summary(&out.join("solve_summary.json"), n, &rows)?;
    println!("solve: {} volumes written", rows.len());
    Ok(())
}

fn cmd_expansion(
    obstacle: &std::path::Path,
    volumes: &[f64],
    out: &std::path::Path,
) -> Result<(), ExigeoError> {
    validate_grid("--volumes", volumes)?;
    let text = std::fs::read_to_string(obstacle)?;
    let w = Obstacle::from_spec_str(&text)?;
    let kind = solver_for(&w)?;
    let study = expansion_study(&w, volumes, kind)?;
    std::fs::create_dir_all(out)?;
    report::write_csv(
        &out.join("expansion.csv"),
        &["v", "psi", "ball_perimeter", "gap"],
        study.rows.iter().map(|r| vec![r.volume, r.energy, r.ball_perimeter, r.gap]),
    )?;
    report::write_expansion_summary(&out.join("expansion_summary.json"), &w, &study)?;
    println!(
        "expansion: intercept {:.6} target {:.6} residual {:.3e}",
        study.intercept, study.target, study.fit_residual
    );
    Ok(())
}

fn cmd_convert(mesh: &std::path::Path, out: &std::path::Path) -> Result<(), ExigeoError> {
    let tri = TriangleMesh::read_auto(mesh)?;
    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut file = std::fs::File::create(out)?;
    match out.extension().and_then(|e| e.to_str()).map(|s| s.to_ascii_lowercase()) {
        Some(ref e) if e == "off" => tri.write_off(&mut file)?,
        Some(ref e) if e == "obj" => tri.write_obj(&mut file)?,
        _ => return Err(ExigeoError::validation("output extension must be .off or .obj")),
    }
    println!("convert: {} vertices, {} triangles", tri.vertices.len(), tri.triangles.len());
    Ok(())
}
