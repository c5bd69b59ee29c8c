//! `elastica`: energies of curves, images and level families from the
//! command line. Prints the headline number on stdout and writes the full
//! report (JSON, or CSV for `.csv` paths) to `--output`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 computational failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastica::curve::{elastica_energy, energy_parts, Curve, ElasticaParams};
use elastica::functional::{coarea_energy, default_grad_floor, divergence_energy};
use elastica::gallery::{self, savare, FIXTURE_NAMES};
use elastica::geom::BBox;
use elastica::grid::GridFunction;
use elastica::io::{read_json, read_pgm, write_pgm, PgmGeometry};
use elastica::nesting::{check_membership, compare_candidates, LevelFamily, NestingOptions};
use elastica::relaxed::{clip_energy, relaxed_energy_cusped, CuspedSet, Polygon};
use elastica::report::fmt_sig;
use elastica::smoothing::{build_smooth_indicator, offset_curve, offset_energy_transform, CutoffProfile};
use elastica::system::CurveSystem;
use elastica::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "elastica", version, about = "p-elastica energies of curves, images and level families")]
struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the sampled long-range pairs of the nesting audit.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report path; `.csv` writes the per-level table, anything else JSON.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct EnergyArgs {
    /// Curvature exponent (> 1).
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Length weight (> 0).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Curvature weight (>= 0).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
}

#[derive(Args, Clone, Copy)]
struct ImageArgs {
    /// Node spacing; overrides the image's `# spacing` comment.
    #[arg(long)]
    spacing: Option<f64>,
    /// Position of the bottom-left node, `x,y`; overrides `# origin`.
    #[arg(long, value_parser = parse_pair)]
    origin: Option<(f64, f64)>,
    /// Value of a full-scale pixel; overrides `# scale`.
    #[arg(long)]
    scale: Option<f64>,
}

#[derive(Args, Clone, Copy)]
struct AuditArgs {
    /// Proximity tolerance (default: twice the median vertex spacing).
    #[arg(long)]
    dist_tol: Option<f64>,
    /// Largest angle (radians) between tangents counted as tangential.
    #[arg(long, default_value_t = 0.15)]
    angle_tol: f64,
    /// Raster cells along the longer side of the audited box.
    #[arg(long, default_value_t = 256)]
    area_res: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Energy of a closed curve or a curve system.
    EnergyCurve {
        input: PathBuf,
        #[command(flatten)]
        energy: EnergyArgs,
    },
    /// Coarea and divergence-form energies of a PGM image.
    EnergyImage {
        input: PathBuf,
        #[command(flatten)]
        energy: EnergyArgs,
        #[command(flatten)]
        image: ImageArgs,
        /// Number of equal level slabs.
        #[arg(long, default_value_t = 64)]
        n_levels: usize,
    },
    /// Nesting conditions and membership of a level family for an image.
    CheckFamily {
        family: PathBuf,
        image: PathBuf,
        #[command(flatten)]
        image_args: ImageArgs,
        #[command(flatten)]
        audit: AuditArgs,
    },
    /// Ranks admissible level families for an image by energy.
    Compare {
        /// Family files followed by the image.
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        energy: EnergyArgs,
        #[command(flatten)]
        image: ImageArgs,
        #[command(flatten)]
        audit: AuditArgs,
    },
    /// Smoothed indicator of the region bounded by a curve, and its energy.
    Smooth {
        input: PathBuf,
        /// Collar width.
        #[arg(long)]
        collar: f64,
        /// Plateau value.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Grid nodes per side.
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        n_levels: usize,
        /// Also write the smoothed image here.
        #[arg(long)]
        image: Option<PathBuf>,
        #[command(flatten)]
        energy: EnergyArgs,
    },
    /// Outer parallel curve at distance `delta`.
    Offset {
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[command(flatten)]
        energy: EnergyArgs,
    },
    /// Relaxed energy of a set with cusps (arcs plus bridged cusp pairs).
    RelaxedCusped {
        input: PathBuf,
        #[command(flatten)]
        energy: EnergyArgs,
    },
    /// Energy of the parts of a curve, system or family inside a polygon.
    Clip {
        input: PathBuf,
        omega: PathBuf,
        #[command(flatten)]
        energy: EnergyArgs,
    },
    /// Level counts, energy and weak-convergence table of the oscillating profile.
    Savare {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[command(flatten)]
        energy: EnergyArgs,
    },
    /// Writes a named fixture (or `all`) to `$ELASTICA_FIXTURES` or `--output`.
    Gallery { name: String },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

enum Failure {
    Usage(String),
    Lib(Error),
    /// A library error while reading the named file.
    File(PathBuf, Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Run = Result<(), Failure>;

fn load<T>(path: &Path, r: Result<T, Error>) -> Result<T, Failure> {
    r.map_err(|e| Failure::File(path.to_path_buf(), e))
}

impl EnergyArgs {
    fn params(self) -> Result<ElasticaParams<f64>, Failure> {
        Ok(ElasticaParams::new(self.p, self.alpha, self.beta)?)
    }
}

impl ImageArgs {
    fn read(self, path: &Path) -> Result<GridFunction<f64>, Failure> {
        load(path, read_pgm(path, PgmGeometry { spacing: self.spacing, origin: self.origin, scale: self.scale }))
    }
}

impl AuditArgs {
    fn options(self, seed: u64) -> NestingOptions<f64> {
        NestingOptions { dist_tol: self.dist_tol, angle_tol: self.angle_tol, area_res: self.area_res, seed, ..Default::default() }
    }
}

fn params_json(p: &ElasticaParams<f64>) -> Value {
    json!({"p": p.p, "alpha": p.alpha, "beta": p.beta})
}

struct Out<'a> {
    path: Option<&'a Path>,
    command: &'static str,
}

impl Out<'_> {
    /// Writes `body` (plus `format` and `command`) as JSON, or `csv` when the
    /// output path ends in `.csv` and a table exists.
    fn write(&self, mut body: Value, csv: Option<String>) -> Run {
        let Some(path) = self.path else { return Ok(()) };
        let text = match csv {
            Some(csv) if path.extension().is_some_and(|e| e == "csv") => csv,
            _ => {
                let obj = body.as_object_mut().expect("report object");
                obj.insert("format".into(), json!(1));
                obj.insert("command".into(), json!(self.command));
                let mut s = serde_json::to_string_pretty(&body).map_err(Error::from)?;
                s.push('\n');
                s
            }
        };
        fs::write(path, text).map_err(Error::from)?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    fmt_sig(x, 9)
}

/// A curve file or a system file.
fn read_system(path: &Path) -> Result<CurveSystem<f64>, Failure> {
    let v: Value = load(path, read_json(path))?;
    if v.get("curves").is_some() {
        load(path, serde_json::from_value(v).map_err(Error::from))
    } else {
        Ok(CurveSystem::single(load(path, serde_json::from_value(v).map_err(Error::from))?))
    }
}

fn read_curve(path: &Path) -> Result<Curve<f64>, Failure> {
    let sys = read_system(path)?;
    match sys.curves() {
        [c] => Ok(c.clone()),
        cs => Err(Failure::Usage(format!("{}: expected a single curve, found {}", path.display(), cs.len()))),
    }
}

fn energy_curve(out: &Out, input: &Path, params: ElasticaParams<f64>) -> Run {
    let sys = read_system(input)?;
    let total = sys.energy(&params)?;
    let curves = sys
        .iter()
        .map(|(c, m)| {
            let parts = energy_parts(c, params.p)?;
            Ok(json!({"multiplicity": m, "samples": c.len(), "length": parts.length, "curvature_term": parts.curvature, "energy": elastica_energy(c, &params)?}))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    println!("{}", num(total));
    out.write(json!({"params": params_json(&params), "total": total, "curves": curves}), None)
}

fn energy_image(out: &Out, input: &Path, params: ElasticaParams<f64>, image: ImageArgs, n_levels: usize) -> Run {
    let u = image.read(input)?;
    let report = coarea_energy(&u, &params, n_levels)?;
    let div = divergence_energy(&u, &params, default_grad_floor(&u));
    println!("coarea {}", num(report.total));
    println!("divergence {}", num(div));
    let csv = report.to_csv();
    out.write(json!({"params": params_json(&params), "n_levels": n_levels, "coarea": report, "divergence": div}), Some(csv))
}

fn check_family(out: &Out, family: &Path, image: &Path, image_args: ImageArgs, opts: NestingOptions<f64>) -> Run {
    let phi: LevelFamily<f64> = load(family, read_json(family))?;
    let u = image_args.read(image)?;
    let verdict = check_membership(&phi, &u, &opts)?;
    let failures = verdict.failures();
    let summary = json!({
        "condition_i": if verdict.condition_i.pass { "pass" } else { "fail" },
        "condition_ii": if verdict.condition_ii.pass { "pass" } else { "fail" },
        "condition_iii": if verdict.condition_iii.pass { "pass" } else { "fail" },
        "is_member": verdict.is_member,
        "failures": failures,
    });
    println!("{}", serde_json::to_string(&summary).map_err(Error::from)?);
    out.write(json!({"summary": summary, "verdict": verdict}), None)
}

fn compare(out: &Out, inputs: &[PathBuf], params: ElasticaParams<f64>, image: ImageArgs, opts: NestingOptions<f64>) -> Run {
    let (families, img) = inputs.split_at(inputs.len() - 1);
    let cands = families.iter().map(|f| load(f, read_json(f))).collect::<Result<Vec<LevelFamily<f64>>, _>>()?;
    let u = image.read(&img[0])?;
    let ranking = compare_candidates(&cands, &u, &params, &opts)?;
    let best = ranking.best();
    println!("{} {}", families[best.index].display(), num(best.energy));
    let mut csv = String::from("file,member,energy\n");
    for c in ranking.ranked.iter().chain(&ranking.rejected) {
        csv.push_str(&format!("{},{},{}\n", families[c.index].display(), c.verdict.is_member, num(c.energy)));
    }
    let files: Vec<String> = families.iter().map(|f| f.display().to_string()).collect();
    out.write(json!({"params": params_json(&params), "files": files, "ranking": ranking}), Some(csv))
}

#[allow(clippy::too_many_arguments)]
fn smooth(out: &Out, input: &Path, collar: f64, c: f64, n: usize, n_levels: usize, image: Option<&Path>, params: ElasticaParams<f64>) -> Run {
    let boundary = read_curve(input)?;
    let b = boundary.bbox();
    let half = 0.5 * b.width().max(b.height()) + collar * 1.5 + 0.05 * b.width().max(b.height());
    let center = b.min.midpoint(b.max);
    let grid = GridFunction::template(BBox::square(center, half), n)?;
    let u = build_smooth_indicator(&boundary, &CutoffProfile::new(collar, c)?, &grid)?;
    let report = coarea_energy(&u, &params, n_levels)?;
    let target = c * elastica_energy(&boundary, &params)?;
    if let Some(path) = image {
        write_pgm(path, &u)?;
    }
    println!("{}", num(report.total));
    let csv = report.to_csv();
    out.write(
        json!({"params": params_json(&params), "collar": collar, "c": c, "grid_nodes": n, "spacing": grid.spacing(),
               "f_coarea": report.total, "target": target, "relative_error": (report.total - target).abs() / target, "report": report}),
        Some(csv),
    )
}

fn offset(out: &Out, input: &Path, delta: f64, params: ElasticaParams<f64>) -> Run {
    let base = read_curve(input)?;
    let off = offset_curve(&base, delta)?;
    let predicted = offset_energy_transform(&base, delta, &params)?;
    let measured = elastica_energy(&off.result, &params)?;
    println!("{}", num(predicted));
    out.write(
        json!({"params": params_json(&params), "delta": delta, "predicted_energy": predicted, "measured_energy": measured,
               "predicted_curvature": off.predicted_curvature, "curve": off.result}),
        None,
    )
}

fn relaxed(out: &Out, input: &Path, params: ElasticaParams<f64>) -> Run {
    let set: CuspedSet<f64> = load(input, read_json(input))?;
    let r = relaxed_energy_cusped(&set, &params)?;
    println!("{}", num(r.report.total));
    let csv = r.report.to_csv();
    out.write(json!({"params": params_json(&params), "finite": r.report.total.is_finite(), "total": r.report.total, "relaxed": r}), Some(csv))
}

fn clip(out: &Out, input: &Path, omega: &Path, params: ElasticaParams<f64>) -> Run {
    let v: Value = load(input, read_json(input))?;
    let poly: Polygon<f64> = load(omega, read_json(omega))?;
    let poly = load(omega, Polygon::new(poly.vertices))?;
    // A family integrates the clipped energies of its slabs.
    let systems: Vec<(f64, CurveSystem<f64>)> = if v.get("slabs").is_some() {
        let phi: LevelFamily<f64> = load(input, serde_json::from_value(v).map_err(Error::from))?;
        (0..phi.len()).map(|j| (phi.slab(j).1 - phi.slab(j).0, phi.systems()[j].clone())).collect()
    } else {
        vec![(1.0, read_system(input)?)]
    };
    let mut total = 0.0;
    let mut parts = Vec::new();
    for (w, s) in &systems {
        let r = clip_energy(s, &poly, &params)?;
        total += w * r.report.total;
        parts.push(json!({"weight": w, "result": r}));
    }
    println!("{}", num(total));
    out.write(json!({"params": params_json(&params), "total": total, "parts": parts}), None)
}

fn savare_cmd(out: &Out, n: u32, params: ElasticaParams<f64>) -> Run {
    if n > 16 {
        return Err(Failure::Usage(format!("savare: n = {n} exceeds 16")));
    }
    let r = savare::report(n, &params)?;
    let counts = savare::level_counts(n)?;
    println!("{}", num(r.energy));
    let mut csv = String::from("t,count\n");
    for (t, c) in &counts {
        csv.push_str(&format!("{},{c}\n", num(*t)));
    }
    out.write(json!({"params": params_json(&params), "report": r, "level_counts": counts}), Some(csv))
}

fn gallery_cmd(out: Option<&Path>, name: &str) -> Run {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(gallery::fixtures_dir);
    let files = if name == "all" {
        gallery::write_all(&dir)?.fixtures.into_iter().flat_map(|e| e.files).chain(["manifest.json".to_string()]).collect()
    } else if FIXTURE_NAMES.contains(&name) {
        gallery::write_fixture(name, &dir)?.files
    } else {
        return Err(Failure::Usage(format!("gallery: unknown fixture {name:?}; available: all, {}", FIXTURE_NAMES.join(", "))));
    };
    for f in files {
        println!("{}", dir.join(f).display());
    }
    Ok(())
}

fn run(cli: Cli) -> Run {
    let out = |command| Out { path: cli.output.as_deref(), command };
    let seed = cli.seed;
    match &cli.command {
        Command::EnergyCurve { input, energy } => energy_curve(&out("energy-curve"), input, energy.params()?),
        Command::EnergyImage { input, energy, image, n_levels } => energy_image(&out("energy-image"), input, energy.params()?, *image, *n_levels),
        Command::CheckFamily { family, image, image_args, audit } => check_family(&out("check-family"), family, image, *image_args, audit.options(seed)),
        Command::Compare { inputs, energy, image, audit } => compare(&out("compare"), inputs, energy.params()?, *image, audit.options(seed)),
        Command::Smooth { input, collar, c, n, n_levels, image, energy } => {
            smooth(&out("smooth"), input, *collar, *c, *n, *n_levels, image.as_deref(), energy.params()?)
        }
        Command::Offset { input, delta, energy } => offset(&out("offset"), input, *delta, energy.params()?),
        Command::RelaxedCusped { input, energy } => relaxed(&out("relaxed-cusped"), input, energy.params()?),
        Command::Clip { input, omega, energy } => clip(&out("clip"), input, omega, energy.params()?),
        Command::Savare { n, energy } => savare_cmd(&out("savare"), *n, energy.params()?),
        Command::Gallery { name } => gallery_cmd(cli.output.as_deref(), name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().expect("global thread pool is set once");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_computational() { 3 } else { 2 })
        }
        Err(Failure::File(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(if e.is_computational() { 3 } else { 2 })
        }
    }
}
