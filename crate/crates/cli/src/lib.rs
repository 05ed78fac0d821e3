//! `mxr` command line: catalog sampling and mesh export, compatibility
//! checks, associate immersions, conjugate pairs and Hopf rotation laws.
//!
//! Reports are tab-separated tables on stdout. Exit codes: 0 success, 1 a
//! check ran and failed, 2 bad input or a violated precondition.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mxr_core::associate::{associate_immersion, RotationAngle};
use mxr_core::catalog::{
    conjugate_pair_check, conjugate_partner, parse_parameter, surface, Catalog, CatalogSpec, CatalogSurface,
    SurfaceKind,
};
use mxr_core::frames::{compare_up_to_isometry, connection_from_data, reconstruct_from_data_with_gate, SampledChart};
use mxr_core::fundamental::check_compatibility;
use mxr_core::grid::{Node, ParameterGrid};
use mxr_core::hopf::{hopf_differential, rotation_law_check};
use mxr_core::io::{DataDocument, MeshDocument, ProjectionRegistry};
use mxr_core::ambient::{AmbientVector, Signature};
use mxr_core::Error;

/// Parameters within this distance of a pair relation are snapped onto it.
const SNAP_TOL: f64 = 1e-6;
const DEFAULT_GRID: &str = "0.02";

#[derive(Debug, Parser)]
#[command(name = "mxr", version, about = "Minimal and general surfaces in S^2 x R and H^2 x R")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the catalog families.
    Catalog,
    /// Sample a catalog chart and write a mesh (and optionally its data).
    Sample {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Mesh output (OBJ).
        #[arg(long)]
        out: PathBuf,
        /// Also write the fundamental data as JSON.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Check the compatibility equations.
    Verify {
        /// Fundamental-data document.
        #[arg(long = "in", conflicts_with = "spec", required_unless_present = "spec")]
        input: Option<PathBuf>,
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, default_value = DEFAULT_GRID)]
        grid: String,
        /// Max residual allowed; defaults to 1e-8 for closed forms and 10 h^2 otherwise.
        #[arg(long)]
        tol: Option<f64>,
        /// Derive the data from the chart by finite differences instead of the closed form.
        #[arg(long)]
        from_chart: bool,
    },
    /// Build the associate immersion x_theta and write its mesh.
    Associate {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Rotation angle, e.g. `pi/2` or `0.3`.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long)]
        out: PathBuf,
        /// Base node `i,j`; the grid center by default.
        #[arg(long)]
        base: Option<String>,
        /// Tolerance for the comparison with a known conjugate.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Check a conjugate pair through its closed forms.
    ConjugateCheck {
        /// Two members, e.g. `u:1.4142135,h:1` (u unduloid, h helicoid, c catenoid, g generalized catenoid).
        #[arg(long)]
        pair: String,
        /// Ambient space for one-letter members: `s2` or `h2`.
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value = DEFAULT_GRID)]
        grid: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Reconstruct an immersion from a fundamental-data document.
    Reconstruct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        base: Option<String>,
        /// Height of the base point.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        /// Flatness gate; 10 h^2 by default.
        #[arg(long)]
        gate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Check the height and Hopf-differential rotation laws.
    Hopf {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Comma-separated angles.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    /// Catalog surface, e.g. `s2-helicoid:1` or `s2-unduloid:sqrt(2)`.
    #[arg(long)]
    spec: String,
    /// Grid spacing on the default domain (`0.01`) or a node count (`60x60`).
    #[arg(long, default_value = DEFAULT_GRID)]
    grid: String,
}

#[derive(Debug, Args)]
struct MeshArgs {
    /// Mesh projection model; stereographic or poincare-disk by default.
    #[arg(long)]
    model: Option<String>,
}

/// A failure tied to the flag or input that caused it.
#[derive(Debug)]
struct Failure {
    context: String,
    error: Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.context, self.error)
    }
}

trait Context<T> {
    fn context(self, context: impl Into<String>) -> Result<T, Failure>;
}

impl<T> Context<T> for mxr_core::Result<T> {
    fn context(self, context: impl Into<String>) -> Result<T, Failure> {
        self.map_err(|error| Failure { context: context.into(), error })
    }
}

enum Outcome {
    Pass,
    Fail(String),
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail(reason)) => {
            let _ = writeln!(err, "check failed: {reason}");
            1
        }
        Err(failure) => {
            let _ = writeln!(err, "error: {failure}");
            2
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<Outcome, Failure> {
    match command {
        Command::Catalog => catalog(out),
        Command::Sample { surface, out: path, data, mesh } => sample(&surface, &path, data.as_deref(), &mesh, out),
        Command::Verify { input, spec, grid, tol, from_chart } => {
            verify(input.as_deref(), spec.as_deref(), &grid, tol, from_chart, out)
        }
        Command::Associate { surface, theta, out: path, base, tol, mesh } => {
            associate(&surface, &theta, &path, base.as_deref(), tol, &mesh, out)
        }
        Command::ConjugateCheck { pair, space, grid, tol } => conjugate_check(&pair, space.as_deref(), &grid, tol, out),
        Command::Reconstruct { input, base, t0, gate, out: path, mesh } => {
            reconstruct(&input, base.as_deref(), t0, gate, path.as_deref(), &mesh, out)
        }
        Command::Hopf { surface, theta, tol } => hopf(&surface, &theta, tol, out),
    }
}

fn emit(out: &mut dyn Write, text: impl fmt::Display) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure { context: "stdout".into(), error: e.into() })
}

fn parse_spec(text: &str) -> Result<CatalogSpec, Failure> {
    Catalog::standard().parse(text).context("--spec")
}

fn build_surface(args: &SurfaceArgs) -> Result<(Box<dyn CatalogSurface>, ParameterGrid), Failure> {
    let spec = parse_spec(&args.spec)?;
    let s = surface(&spec).context("--spec")?;
    let grid = parse_grid(s.as_ref(), &args.grid)?;
    Ok((s, grid))
}

/// `h` for a spacing on the default domain or `NxM` for node counts.
fn parse_grid(s: &dyn CatalogSurface, text: &str) -> Result<ParameterGrid, Failure> {
    let invalid = || Failure {
        context: "--grid".into(),
        error: Error::Validation(format!("expected a spacing like 0.01 or node counts like 60x60, got '{text}'")),
    };
    if let Some((a, b)) = text.split_once(['x', 'X']) {
        let nu: usize = a.trim().parse().map_err(|_| invalid())?;
        let nv: usize = b.trim().parse().map_err(|_| invalid())?;
        let d = s.default_grid(0.1).context("--grid")?;
        ParameterGrid::new(d.u_min, d.u_max, d.v_min, d.v_max, nu, nv).context("--grid")
    } else {
        let h: f64 = text.trim().parse().map_err(|_| invalid())?;
        s.default_grid(h).context("--grid")
    }
}

fn parse_node(text: Option<&str>, grid: &ParameterGrid) -> Result<Node, Failure> {
    let Some(text) = text else { return Ok(grid.center()) };
    let invalid = || Failure {
        context: "--base".into(),
        error: Error::Validation(format!("expected a node 'i,j', got '{text}'")),
    };
    let (i, j) = text.split_once(',').ok_or_else(invalid)?;
    let node = Node::new(i.trim().parse().map_err(|_| invalid())?, j.trim().parse().map_err(|_| invalid())?);
    grid.check_node(node).context("--base")?;
    Ok(node)
}

/// Angles such as `0.3`, `pi`, `-pi/2`, `2pi/3` or `2*pi/3`.
fn parse_angle(text: &str) -> Result<f64, Failure> {
    let invalid = || Failure {
        context: "--theta".into(),
        error: Error::Validation(format!("cannot read angle '{text}'")),
    };
    let t = text.trim().to_ascii_lowercase().replace(' ', "");
    let Some((coef, rest)) = t.split_once("pi") else {
        return t.parse().map_err(|_| invalid());
    };
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        _ => coef.parse().map_err(|_| invalid())?,
    };
    let d = match rest {
        "" => 1.0,
        _ => rest.strip_prefix('/').and_then(|r| r.parse::<f64>().ok()).ok_or_else(invalid)?,
    };
    Ok(c * PI / d)
}

fn projection<'r>(
    registry: &'r ProjectionRegistry,
    args: &MeshArgs,
    sig: &Signature,
) -> Result<&'r dyn mxr_core::io::MeshProjection, Failure> {
    let tag = args.model.as_deref().unwrap_or_else(|| registry.default_for(sig));
    registry.get(tag).context("--model")
}

fn export_mesh(
    points: &[AmbientVector],
    grid: &ParameterGrid,
    sig: &Signature,
    args: &MeshArgs,
    path: &Path,
) -> Result<MeshDocument, Failure> {
    let registry = ProjectionRegistry::standard();
    let model = projection(&registry, args, sig)?;
    let doc = MeshDocument::from_samples(points, grid, sig, model).context("--model")?;
    doc.write(path).context(format!("--out {}", path.display()))?;
    Ok(doc)
}

fn catalog(out: &mut dyn Write) -> Result<Outcome, Failure> {
    emit(out, "name\tspace\tparameter\tdefault\tdescription")?;
    for family in Catalog::standard().families() {
        let (name, default) = match family.parameter() {
            Some((p, x)) => (p.to_string(), format!("{x}")),
            None => ("-".into(), "-".into()),
        };
        let space = family.kind().signature();
        emit(out, format_args!("{}\t{space}\t{name}\t{default}\t{}", family.name(), family.description()))?;
    }
    Ok(Outcome::Pass)
}

fn sample(
    args: &SurfaceArgs,
    path: &Path,
    data_path: Option<&Path>,
    mesh: &MeshArgs,
    out: &mut dyn Write,
) -> Result<Outcome, Failure> {
    let (s, grid) = build_surface(args)?;
    let points = grid
        .nodes()
        .map(|n| {
            let (u, v) = grid.coords(n);
            s.eval(u, v).map(|p| AmbientVector::from_slice(p.as_slice())).context(format!("node {n}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let doc = export_mesh(&points, &grid, &s.signature(), mesh, path)?;
    emit(out, "key\tvalue")?;
    emit(out, format_args!("spec\t{}", s.spec()))?;
    emit(out, format_args!("grid\t{}x{}", grid.nu, grid.nv))?;
    emit(out, format_args!("model\t{}", doc.model))?;
    emit(out, format_args!("vertices\t{}", doc.vertices.len()))?;
    emit(out, format_args!("faces\t{}", doc.faces.len()))?;
    emit(out, format_args!("mesh\t{}", path.display()))?;
    if let Some(dp) = data_path {
        let data = s.fundamental_closed_form(&grid).context("--spec")?;
        DataDocument::from_data(&data).write(dp).context(format!("--data {}", dp.display()))?;
        emit(out, format_args!("data\t{}", dp.display()))?;
    }
    Ok(Outcome::Pass)
}

fn verify(
    input: Option<&Path>,
    spec: Option<&str>,
    grid_text: &str,
    tol: Option<f64>,
    from_chart: bool,
    out: &mut dyn Write,
) -> Result<Outcome, Failure> {
    let data = match (input, spec) {
        (Some(path), _) => {
            let ctx = format!("--in {}", path.display());
            DataDocument::read(path).context(ctx.as_str())?.to_data().context(ctx.as_str())?
        }
        (None, Some(text)) => {
            let s = surface(&parse_spec(text)?).context("--spec")?;
            let grid = parse_grid(s.as_ref(), grid_text)?;
            if from_chart {
                mxr_core::fundamental::fundamental_from_chart(s.as_chart(), &grid).context("--spec")?
            } else {
                s.fundamental_closed_form(&grid).context("--spec")?
            }
        }
        (None, None) => unreachable!("clap requires --in or --spec"),
    };
    let tol = tol.unwrap_or_else(|| data.default_tolerance());
    if !(tol > 0.0) {
        return Err(Failure { context: "--tol".into(), error: Error::Validation(format!("tolerance must be positive, got {tol}")) });
    }
    let report = check_compatibility(&data, tol);
    emit(out, &report)?;
    if report.pass {
        return Ok(Outcome::Pass);
    }
    let failing: Vec<String> = report
        .failing()
        .iter()
        .map(|e| match e.worst {
            Some(n) => format!("{} = {:.3e} at node {n}", e.name, e.max),
            None => format!("{} = {:.3e}", e.name, e.max),
        })
        .collect();
    Ok(Outcome::Fail(failing.join("; ")))
}

/// Angle reduced to `(-π, π]`.
fn reduce(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// The catalog chart `x_θ` should match up to isometry, if one is known.
fn known_conjugate(spec: &CatalogSpec, theta: f64) -> Option<CatalogSpec> {
    let partner = conjugate_partner(spec)?;
    let helicoid = matches!(spec.kind, SurfaceKind::S2Helicoid | SurfaceKind::H2Helicoid);
    let expected = if helicoid { -PI / 2.0 } else { PI / 2.0 };
    ((reduce(theta) - expected).abs() < 1e-12).then_some(partner)
}

fn associate(
    args: &SurfaceArgs,
    theta_text: &str,
    path: &Path,
    base: Option<&str>,
    tol: f64,
    mesh: &MeshArgs,
    out: &mut dyn Write,
) -> Result<Outcome, Failure> {
    let (s, grid) = build_surface(args)?;
    let theta = parse_angle(theta_text)?;
    let base = parse_node(base, &grid)?;
    let rotated = associate_immersion(s.as_chart(), RotationAngle(theta), base, &grid).context("--spec")?;
    let doc = export_mesh(rotated.points(), &grid, &s.signature(), mesh, path)?;
    emit(out, "key\tvalue")?;
    emit(out, format_args!("spec\t{}", s.spec()))?;
    emit(out, format_args!("theta\t{theta}"))?;
    emit(out, format_args!("grid\t{}x{}", grid.nu, grid.nv))?;
    emit(out, format_args!("projection_displacement\t{:.3e}", rotated.projection_displacement()))?;
    emit(out, format_args!("mesh\t{}\t{}", path.display(), doc.model))?;
    let Some(conjugate) = known_conjugate(&s.spec(), theta) else {
        return Ok(Outcome::Pass);
    };
    let target = surface(&conjugate).context("conjugate")?;
    let samples = SampledChart::new(target.as_chart(), &grid).context(format!("conjugate {conjugate}"))?;
    let d = compare_up_to_isometry(&samples, &rotated, base).context("comparison")?;
    let status = if d <= tol { "ok" } else { "FAIL" };
    emit(out, format_args!("conjugate\t{conjugate}"))?;
    emit(out, format_args!("max_deviation\t{d:.3e}\t{status}"))?;
    Ok(if d <= tol {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("x_theta deviates from {conjugate} by {d:.3e} > {tol:.1e}"))
    })
}

fn pair_member(text: &str, space: Option<&str>) -> Result<CatalogSpec, Failure> {
    let text = text.trim();
    let (tag, value) = text.split_once(':').unwrap_or((text, ""));
    if tag.len() > 1 {
        return Catalog::standard().parse(text).context("--pair");
    }
    let space = space.ok_or_else(|| Failure {
        context: "--space".into(),
        error: Error::Validation(format!("one-letter member '{text}' needs --space s2 or h2")),
    })?;
    let kind = match (space, tag) {
        ("s2", "u") => SurfaceKind::S2Unduloid,
        ("s2", "h") => SurfaceKind::S2Helicoid,
        ("h2", "h") => SurfaceKind::H2Helicoid,
        ("h2", "c") => SurfaceKind::H2Catenoid,
        ("h2", "g") => SurfaceKind::H2GenCatenoid,
        ("s2" | "h2", _) => {
            return Err(Failure {
                context: "--pair".into(),
                error: Error::Validation(format!("no family '{tag}' in {space}")),
            })
        }
        _ => {
            return Err(Failure {
                context: "--space".into(),
                error: Error::Validation(format!("expected s2 or h2, got '{space}'")),
            })
        }
    };
    let x = parse_parameter(value).context("--pair")?;
    let spec = if kind == SurfaceKind::H2Catenoid && x == 0.0 {
        CatalogSpec::default_for(SurfaceKind::H2Horocycle)
    } else {
        CatalogSpec::new(kind, x)
    };
    spec.validate().context("--pair")?;
    Ok(spec)
}

/// Moves the non-helicoid member onto the pair relation when it is within
/// [`SNAP_TOL`]; for the horocycle the helicoid moves to `β = 1`.
fn snap(a: CatalogSpec, b: CatalogSpec) -> (CatalogSpec, CatalogSpec, bool) {
    let is_helicoid = |s: &CatalogSpec| matches!(s.kind, SurfaceKind::S2Helicoid | SurfaceKind::H2Helicoid);
    let (other, helicoid, swapped) = match (is_helicoid(&a), is_helicoid(&b)) {
        (false, true) => (a, b, false),
        (true, false) => (b, a, true),
        _ => return (a, b, false),
    };
    let order = |o, h| if swapped { (h, o) } else { (o, h) };
    if other.kind == SurfaceKind::H2Horocycle {
        if helicoid.parameter != 1.0 && (helicoid.parameter - 1.0).abs() <= SNAP_TOL {
            let (x, y) = order(other, CatalogSpec::new(helicoid.kind, 1.0));
            return (x, y, true);
        }
        let (x, y) = order(other, helicoid);
        return (x, y, false);
    }
    match conjugate_partner(&helicoid) {
        Some(p) if p.kind == other.kind && p != other && (p.parameter - other.parameter).abs() <= SNAP_TOL => {
            let (x, y) = order(p, helicoid);
            (x, y, true)
        }
        _ => {
            let (x, y) = order(other, helicoid);
            (x, y, false)
        }
    }
}

fn conjugate_check(pair: &str, space: Option<&str>, grid_text: &str, tol: f64, out: &mut dyn Write) -> Result<Outcome, Failure> {
    let (a, b) = pair.split_once(',').ok_or_else(|| Failure {
        context: "--pair".into(),
        error: Error::Validation(format!("expected two comma-separated members, got '{pair}'")),
    })?;
    let (a, b) = (pair_member(a, space)?, pair_member(b, space)?);
    let (a, b, snapped) = snap(a, b);
    let first = surface(&a).context("--pair")?;
    let grid = parse_grid(first.as_ref(), grid_text)?;
    let report = conjugate_pair_check(&a, &b, &grid).context("--pair")?;
    if snapped {
        emit(out, format_args!("snapped\t{a}\t{b}"))?;
    }
    emit(out, &report)?;
    let d = report.max_deviation();
    Ok(if d <= tol { Outcome::Pass } else { Outcome::Fail(format!("max deviation {d:.3e} > {tol:.1e}")) })
}

fn reconstruct(
    input: &Path,
    base: Option<&str>,
    t0: f64,
    gate: Option<f64>,
    path: Option<&Path>,
    mesh: &MeshArgs,
    out: &mut dyn Write,
) -> Result<Outcome, Failure> {
    let ctx = format!("--in {}", input.display());
    let data = DataDocument::read(input).context(ctx.as_str())?.to_data().context(ctx.as_str())?;
    let grid = *data.grid();
    let base = parse_node(base, &grid)?;
    let (flatness, worst) = connection_from_data(&data).context(ctx.as_str())?.max_flatness();
    let gate = gate.unwrap_or(10.0 * grid.h().powi(2));
    if !(gate > 0.0) {
        return Err(Failure { context: "--gate".into(), error: Error::Validation(format!("gate must be positive, got {gate}")) });
    }
    let rec = reconstruct_from_data_with_gate(&data, base, None, t0, gate).context(ctx.as_str())?;
    emit(out, "key\tvalue")?;
    emit(out, format_args!("grid\t{}x{}", grid.nu, grid.nv))?;
    emit(out, format_args!("base\t{},{}", base.i, base.j))?;
    emit(out, format_args!("flatness\t{flatness:.3e}\t{},{}", worst.i, worst.j))?;
    emit(out, format_args!("gate\t{gate:.3e}"))?;
    emit(out, format_args!("projection_displacement\t{:.3e}", rec.projection_displacement()))?;
    if let Some(p) = path {
        let doc = export_mesh(rec.points(), &grid, &data.signature(), mesh, p)?;
        emit(out, format_args!("mesh\t{}\t{}", p.display(), doc.model))?;
    }
    Ok(Outcome::Pass)
}

fn hopf(args: &SurfaceArgs, thetas: &str, tol: f64, out: &mut dyn Write) -> Result<Outcome, Failure> {
    let (s, grid) = build_surface(args)?;
    let angles = thetas.split(',').map(parse_angle).collect::<Result<Vec<_>, _>>()?;
    let q = hopf_differential(s.as_chart(), &grid).context("--spec")?;
    let n = q.field.values().len() as f64;
    let re = q.field.values().iter().map(|z| z.re).sum::<f64>() / n;
    let im = q.field.values().iter().map(|z| z.im).sum::<f64>() / n;
    emit(out, format_args!("qphi_mean\t{re:.12}\t{im:.12}"))?;
    emit(out, format_args!("cross_route\t{:.3e}", q.cross_route))?;
    emit(out, format_args!("holomorphy\t{:.3e}", q.field.holomorphy_residual()))?;
    emit(out, "theta\theight_law\thopf_law\tmodulus\tstatus")?;
    let mut failed = Vec::new();
    for theta in angles {
        let r = rotation_law_check(s.as_chart(), RotationAngle(theta), &grid, grid.center()).context("--spec")?;
        let ok = r.max_deviation() <= tol;
        if !ok {
            failed.push(format!("theta {theta}: {:.3e}", r.max_deviation()));
        }
        let status = if ok { "ok" } else { "FAIL" };
        emit(out, format_args!("{theta}\t{:.3e}\t{:.3e}\t{:.3e}\t{status}", r.height_law, r.hopf_law, r.modulus))?;
    }
    Ok(if failed.is_empty() { Outcome::Pass } else { Outcome::Fail(failed.join("; ")) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle(" 0.25 ").unwrap(), 0.25);
        assert!(parse_angle("pi/").is_err());
        assert!(parse_angle("half").is_err());
    }

    #[test]
    fn reduction_and_known_conjugates() {
        assert!((reduce(5.0 * PI / 2.0) - PI / 2.0).abs() < 1e-12);
        assert_eq!(reduce(PI), PI);
        let und = CatalogSpec::new(SurfaceKind::S2Unduloid, 2f64.sqrt());
        assert_eq!(known_conjugate(&und, PI / 2.0).unwrap().kind, SurfaceKind::S2Helicoid);
        assert!(known_conjugate(&und, -PI / 2.0).is_none());
        let hel = CatalogSpec::new(SurfaceKind::H2Helicoid, 1.0);
        assert_eq!(known_conjugate(&hel, -PI / 2.0).unwrap().kind, SurfaceKind::H2Horocycle);
    }

    #[test]
    fn members_snap_onto_the_pair_relation() {
        let u = pair_member("u:1.4142135", Some("s2")).unwrap();
        let h = pair_member("h:1", Some("s2")).unwrap();
        let (a, b, snapped) = snap(h, u);
        assert!(snapped);
        assert_eq!(a, h);
        assert_eq!(b.parameter, 2f64.sqrt());
        let far = pair_member("u:1.5", Some("s2")).unwrap();
        assert!(!snap(far, h).2);
        let c0 = pair_member("c:0", Some("h2")).unwrap();
        assert_eq!(c0.kind, SurfaceKind::H2Horocycle);
        let (_, b, snapped) = snap(c0, pair_member("h:1.0000004", Some("h2")).unwrap());
        assert!(snapped && b.parameter == 1.0);
        assert!(pair_member("u:2", None).is_err());
        assert!(pair_member("c:1", Some("s2")).is_err());
        assert_eq!(pair_member("h2-catenoid:1", None).unwrap().kind, SurfaceKind::H2Catenoid);
    }
}
