use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use inkblend::biometric::{evaluate_embeddings, evaluate_scores_file, BiometricReport};
use inkblend::blending::{landmark_depth_fallback, BlendConfig, DepthMap};
use inkblend::dataset::{
    config_hash, generate_dataset, generate_pair_in, load_templates, regenerate_record, DatasetConfig,
    DatasetManifest, FaceContext, DEFAULT_SEED,
};
use inkblend::exec::{self, Mode};
use inkblend::geometry::{extend_forehead, Landmarks68, Point};
use inkblend::imaging::{load_image, save_png, write_bytes};
use inkblend::placement::GenerationStrategy;
use inkblend::quality::{evaluate_removal, QualityReport, SsimConfig};
use inkblend::VERSION;
use serde::Serialize;

const SEED_ENV: &str = "INKBLEND_SEED";

#[derive(Parser, Debug)]
#[command(name = "inkblend", version, about = "Synthetic facial tattoo datasets and their evaluation")]
struct Cli {
    /// More log output (-v debug, -vv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a paired bona fide / tattooed dataset from a config file.
    Generate(GenerateArgs),
    /// Blend tattoos into a single face.
    BlendOne(BlendOneArgs),
    /// Score tattoo removal against ground truth (MSSIM, PSNR, VIF).
    Quality(QualityArgs),
    /// Verification performance from scores or embeddings.
    Bioeval(BioevalArgs),
    /// Write the landmark-derived depth map for a face.
    DepthFallback(DepthFallbackArgs),
    /// Re-derive manifest records, or check landmark and depth files.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    landmark_dir: Option<PathBuf>,
    #[arg(long)]
    depth_dir: Option<PathBuf>,
    #[arg(long)]
    template_dir: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    tattooed_per_bona_fide: Option<u32>,
}

#[derive(Args, Debug)]
struct BlendOneArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    landmarks: PathBuf,
    /// Raw depth estimate; the landmark fallback is used without it.
    #[arg(long)]
    depth: Option<PathBuf>,
    /// e.g. `coverage:0.15`, `region:forehead,chin`, `full-face`, `portrait`.
    #[arg(long)]
    strategy: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Blend parameters as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    template_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct QualityArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    candidate: PathBuf,
    #[arg(long)]
    landmarks: PathBuf,
    /// Row label; defaults to the candidate directory's name.
    #[arg(long)]
    scenario: Option<String>,
    /// SSIM options as JSON.
    #[arg(long, conflicts_with = "rounded_constants")]
    config: Option<PathBuf>,
    /// Use C1 = 6.55, C2 = 58.98.
    #[arg(long)]
    rounded_constants: bool,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["scores", "embeddings"])))]
struct BioevalArgs {
    /// `condition,label,score` rows.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// `subject,probe,v0,v1,...` rows after a header.
    #[arg(long, requires = "pairs")]
    embeddings: Option<PathBuf>,
    /// `condition,probe_a,probe_b[,label]` rows.
    #[arg(long, requires = "embeddings")]
    pairs: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DepthFallbackArgs {
    #[arg(long)]
    landmarks: PathBuf,
    /// `WIDTHxHEIGHT`; defaults to the size recorded in the landmark file.
    #[arg(long, value_parser = parse_size)]
    size: Option<(u32, u32)>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("target").required(true).multiple(true).args(["manifest", "landmarks", "depth"])))]
struct ValidateArgs {
    #[arg(long, conflicts_with_all = ["landmarks", "depth"])]
    manifest: Option<PathBuf>,
    /// Re-derive only this many evenly spaced records.
    #[arg(long, requires = "manifest")]
    sample: Option<usize>,
    /// Landmark JSON files or directories of them.
    #[arg(long, num_args = 1..)]
    landmarks: Vec<PathBuf>,
    /// Depth PNG files or directories of them.
    #[arg(long, num_args = 1..)]
    depth: Vec<PathBuf>,
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let dim = |v: &str| v.trim().parse::<u32>().ok().filter(|&n| n > 0);
    match (dim(w), dim(h)) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(format!("expected WIDTHxHEIGHT, got {s:?}")),
    }
}

enum Outcome {
    Done,
    Partial(usize),
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn banner<T: Serialize>(command: &str, seed: Option<u64>, settings: &T) -> anyhow::Result<String> {
    let hash = config_hash(settings)?;
    match seed {
        Some(s) => log::info!("inkblend {VERSION} {command}: seed {s}, config {hash}"),
        None => log::info!("inkblend {VERSION} {command}: config {hash}"),
    }
    Ok(hash)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    write_bytes(path, text.as_bytes())?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn generate(args: GenerateArgs, mode: Mode) -> anyhow::Result<Outcome> {
    let mut cfg = DatasetConfig::load(&args.config)?;
    if let Some(d) = args.input_dir {
        cfg.input_dir = d;
    }
    if let Some(d) = args.landmark_dir {
        cfg.landmark_dir = d;
    }
    if let Some(d) = args.depth_dir {
        cfg.depth_dir = Some(d);
    }
    if let Some(d) = args.template_dir {
        cfg.template_dir = Some(d);
    }
    if let Some(d) = args.output_dir {
        cfg.output_dir = d;
    }
    if let Some(n) = args.tattooed_per_bona_fide {
        cfg.tattooed_per_bona_fide = n;
    }
    let seed = args.seed.or(cfg.seed).or(env_seed()?).unwrap_or(DEFAULT_SEED);
    cfg.seed = Some(seed);
    cfg.validate()?;
    banner("generate", Some(seed), &cfg)?;

    let run = generate_dataset(&cfg, mode)?;
    let m = &run.manifest;
    log::info!(
        "{} tattooed images from {} subjects in {}",
        m.tattooed_count(),
        m.bona_fide_count(),
        cfg.output_dir.display()
    );
    if m.skips.is_empty() {
        Ok(Outcome::Done)
    } else {
        log::warn!("{} skipped, see skips.jsonl", m.skips.len());
        Ok(Outcome::Partial(m.skips.len()))
    }
}

fn blend_one(args: BlendOneArgs, mode: Mode) -> anyhow::Result<Outcome> {
    let blend: BlendConfig = match &args.config {
        Some(p) => load_json(p)?,
        None => BlendConfig::default(),
    };
    blend.validate()?;
    let strategy: GenerationStrategy = args.strategy.parse()?;
    let seed = args.seed.or(env_seed()?).unwrap_or(DEFAULT_SEED);
    let settings = serde_json::json!({
        "image": args.image,
        "landmarks": args.landmarks,
        "depth": args.depth,
        "strategy": strategy,
        "template_dir": args.template_dir,
        "blend": blend,
        "seed": seed,
    });
    banner("blend-one", Some(seed), &settings)?;

    let face = load_image(&args.image)?;
    let lm = Landmarks68::load(&args.landmarks)?;
    let depth = args.depth.as_ref().map(DepthMap::load).transpose()?;
    let catalog = load_templates(args.template_dir.as_deref())?;
    let ctx = FaceContext::new(face, lm, depth.as_ref(), &blend)?;
    let pair = generate_pair_in(&ctx, &strategy, seed, &catalog, &blend, mode)?;

    let stem = args
        .image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "face".into());
    let bona_fide = args.out.join(format!("{stem}_bonafide.png"));
    let tattooed = args.out.join(format!("{stem}_tattooed.png"));
    let plan = args.out.join(format!("{stem}_plan.json"));
    save_png(&pair.bona_fide, &bona_fide)?;
    save_png(&pair.tattooed, &tattooed)?;
    write_bytes(&plan, serde_json::to_string_pretty(&pair.plan)?.as_bytes())?;
    log::info!("coverage {:.4}", pair.plan.achieved_coverage);
    for p in [&bona_fide, &tattooed, &plan] {
        println!("{}", p.display());
    }
    Ok(Outcome::Done)
}

fn quality(args: QualityArgs, mode: Mode) -> anyhow::Result<Outcome> {
    let ssim = match (&args.config, args.rounded_constants) {
        (Some(p), _) => load_json(p)?,
        (None, true) => SsimConfig::rounded_constants(),
        (None, false) => SsimConfig::default(),
    };
    ssim.validate()?;
    banner("quality", None, &ssim)?;

    let mut report: QualityReport = evaluate_removal(&args.truth, &args.candidate, &args.landmarks, &ssim, mode)?;
    if let Some(s) = args.scenario {
        report.scenario = s;
    }
    if let Some(p) = &args.json {
        write_text(p, &serde_json::to_string_pretty(&report)?)?;
    }
    if let Some(p) = &args.csv {
        write_text(p, &report.to_csv()?)?;
    }
    println!("{}", QualityReport::table_header());
    println!("{}", report.table_row());
    log::info!("{} pairs scored", report.pairs.len());
    for u in &report.unmatched {
        log::warn!("unmatched: {u}");
    }
    for f in &report.failed {
        log::warn!("failed: {}: {}", f.file, f.reason);
    }
    let partial = report.unmatched.len() + report.failed.len();
    if report.pairs.is_empty() {
        bail!("no pair could be scored");
    }
    Ok(if partial == 0 { Outcome::Done } else { Outcome::Partial(partial) })
}

fn bioeval(args: BioevalArgs, mode: Mode) -> anyhow::Result<Outcome> {
    banner(
        "bioeval",
        None,
        &serde_json::json!({ "scores": args.scores, "embeddings": args.embeddings, "pairs": args.pairs }),
    )?;
    let report: BiometricReport = match (&args.scores, &args.embeddings, &args.pairs) {
        (Some(s), _, _) => evaluate_scores_file(s)?,
        (None, Some(e), Some(p)) => evaluate_embeddings(e, p, mode)?,
        _ => bail!("either --scores or --embeddings with --pairs is required"),
    };
    if let Some(p) = &args.json {
        write_text(p, &serde_json::to_string_pretty(&report)?)?;
    }
    if let Some(p) = &args.csv {
        write_text(p, &report.to_csv()?)?;
    }
    println!("{}", report.table());
    for m in &report.missing {
        log::warn!("missing embedding: {m:?}");
    }
    Ok(if report.missing.is_empty() {
        Outcome::Done
    } else {
        Outcome::Partial(report.missing.len())
    })
}

fn depth_fallback(args: DepthFallbackArgs) -> anyhow::Result<Outcome> {
    let lm = Landmarks68::load(&args.landmarks)?;
    let (w, h) = args.size.unwrap_or((lm.width(), lm.height()));
    banner("depth-fallback", None, &serde_json::json!({ "landmarks": args.landmarks, "size": [w, h] }))?;
    let lm = if (w, h) == (lm.width(), lm.height()) {
        lm
    } else {
        let (sx, sy) = (w as f64 / lm.width() as f64, h as f64 / lm.height() as f64);
        let pts: Vec<Point> = lm.points().iter().map(|p| Point::new(p.x * sx, p.y * sy)).collect();
        Landmarks68::new(&pts, w, h)?
    };
    let depth = landmark_depth_fallback(&extend_forehead(&lm)?, w, h);
    depth.save(&args.out)?;
    println!("{}", args.out.display());
    Ok(Outcome::Done)
}

fn files_with_ext(paths: &[PathBuf], ext: &str) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x.eq_ignore_ascii_case(ext)))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn validate_manifest(path: &Path, sample: Option<usize>) -> anyhow::Result<usize> {
    let manifest = DatasetManifest::load(path)?;
    let root = path.parent().unwrap_or(Path::new("."));
    let n = manifest.records.len();
    let picked: Vec<usize> = match sample {
        Some(k) if k < n => (0..k).map(|i| i * n / k).collect(),
        _ => (0..n).collect(),
    };
    let mut bad = 0;
    for i in picked.iter().copied() {
        let rec = &manifest.records[i];
        let ok = match regenerate_record(rec, root) {
            Ok(check) => {
                println!("{}", serde_json::to_string(&check)?);
                check.ok()
            }
            Err(e) => {
                println!(
                    "{}",
                    serde_json::json!({ "subject": rec.subject, "variant": rec.variant, "error": e.to_string() })
                );
                false
            }
        };
        if !ok {
            log::error!("{} #{} does not regenerate", rec.subject, rec.variant);
            bad += 1;
        }
    }
    log::info!("{} of {} records re-derived, {bad} mismatched", picked.len(), n);
    Ok(bad)
}

fn validate_files(landmarks: &[PathBuf], depth: &[PathBuf]) -> anyhow::Result<usize> {
    let mut bad = 0;
    let mut sizes = std::collections::HashMap::new();
    let mut report = |kind: &str, path: &Path, problem: Option<String>| {
        let line = serde_json::json!({ "kind": kind, "file": path, "ok": problem.is_none(), "problem": problem });
        println!("{line}");
        if let Some(p) = problem {
            log::error!("{}: {p}", path.display());
            bad += 1;
        }
    };
    for p in files_with_ext(landmarks, "json")? {
        let problem = match Landmarks68::load(&p) {
            Ok(lm) if !lm.in_bounds() => Some(format!("points fall outside {}x{}", lm.width(), lm.height())),
            Ok(lm) => {
                sizes.insert(stem(&p), (lm.width(), lm.height()));
                None
            }
            Err(e) => Some(e.to_string()),
        };
        report("landmarks", &p, problem);
    }
    for p in files_with_ext(depth, "png")? {
        let problem = match load_image(&p) {
            Ok(img) if img.channels() != 1 => Some(format!("{} channels, expected 8-bit grayscale", img.channels())),
            Ok(img) => match sizes.get(&stem(&p)) {
                Some(&(w, h)) if (w, h) != (img.width(), img.height()) => Some(format!(
                    "depth is {}x{}, landmarks are for {w}x{h}",
                    img.width(),
                    img.height()
                )),
                _ => None,
            },
            Err(e) => Some(e.to_string()),
        };
        report("depth", &p, problem);
    }
    Ok(bad)
}

fn validate(args: ValidateArgs) -> anyhow::Result<Outcome> {
    banner("validate", None, &serde_json::json!({ "manifest": args.manifest, "landmarks": args.landmarks, "depth": args.depth }))?;
    let bad = match &args.manifest {
        Some(m) => validate_manifest(m, args.sample)?,
        None => validate_files(&args.landmarks, &args.depth)?,
    };
    if bad > 0 {
        bail!("{bad} item(s) failed validation");
    }
    Ok(Outcome::Done)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let workers = cli.workers.unwrap_or_else(exec::default_workers).max(1);
    log::debug!("{workers} worker(s)");
    exec::with_workers(workers, move |mode| match cli.command {
        Command::Generate(a) => generate(a, mode),
        Command::BlendOne(a) => blend_one(a, mode),
        Command::Quality(a) => quality(a, mode),
        Command::Bioeval(a) => bioeval(a, mode),
        Command::DepthFallback(a) => depth_fallback(a),
        Command::Validate(a) => validate(a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "warn",
        (false, 0) => "info",
        (false, 1) => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(n)) => {
            log::warn!("finished with {n} skipped item(s)");
            ExitCode::from(2)
        }
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(1)
        }
    }
}
