use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gmcantor::{
    build_atlas, build_extension, build_tower_from_words, conjugacy_check, disjointness_check,
    growth_check, lrs_sample_check, odometer_tower, per_level_quotients, quotient_exact,
    random_simple_tower, sample_pairs, validate_gm, verify_extension, AtlasJson, AtlasMode,
    CoverTower, Error, ExactScalar, ExtensionJson, IntervalAtlas, QuotientReport, TowerJson, Word,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "gmcantor", version, about = "Graph-cover towers, exact interval embeddings and their certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or validate cover towers.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Build interval atlases.
    #[command(subcommand)]
    Atlas(AtlasCmd),
    /// Certify atlas properties.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Build the spiral extension.
    #[command(subcommand)]
    Extend(ExtendCmd),
    /// Export approximate data for plotting.
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Subcommand)]
enum TowerCmd {
    Build(TowerBuild),
    /// Print diagnostics; exit 0 iff there are none.
    Validate { file: PathBuf },
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["bases", "words", "random"]))]
struct TowerBuild {
    /// Odometer bases, e.g. 2,9,73.
    #[arg(long, value_delimiter = ',')]
    bases: Option<Vec<usize>>,
    /// JSON file holding one list of words per level.
    #[arg(long)]
    words: Option<PathBuf>,
    /// Random simple tower.
    #[arg(long, requires_all = ["levels", "seed"])]
    random: bool,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Words per level for --random (default 2 at every level).
    #[arg(long, value_delimiter = ',')]
    cycles: Option<Vec<usize>>,
    /// Maximum word length for --random.
    #[arg(long, default_value_t = 6)]
    budget: usize,
    /// Warn when the vertex-count growth condition fails.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AtlasCmd {
    Build {
        tower: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value = "strict")]
        mode: AtlasMode,
        #[arg(long)]
        out: PathBuf,
        /// Store exact interval endpoints (large for deep atlases).
        #[arg(long)]
        materialize: bool,
        /// Also write a compact log-scale summary.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Thread depth (defaults to the atlas depth).
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Sampled derivative-quotient bounds at every level.
    Quotients {
        atlas: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled local radial shrinking below the contraction floor.
    Lrs {
        atlas: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive conjugacy of the interval map with the successor.
    Conjugacy {
        atlas: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nesting and disjointness of all intervals.
    Disjointness {
        atlas: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExtendCmd {
    Build {
        atlas: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Verification report (printed when absent).
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExportCmd {
    /// CSV tables: intervals per vertex, quotient curve, spiral heights.
    Plotdata {
        atlas: PathBuf,
        #[arg(long)]
        extension: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Exit status 1: a certificate or validation failed.
#[derive(Debug)]
struct Failed(String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<Failed>() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Certification { .. } | Error::SearchFailure { .. } | Error::Invalid(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(Error::Invalid(diags)) = err.downcast_ref::<Error>() {
                for d in diags {
                    eprintln!("{d}");
                }
            }
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(Error::from)
        .with_context(|| format!("parsing {}", path.display()))
}

fn load_tower(path: &Path) -> anyhow::Result<CoverTower> {
    let json: TowerJson = read_json(path)?;
    Ok(CoverTower::from_json(&json)?)
}

fn load_atlas(path: &Path) -> anyhow::Result<Arc<IntervalAtlas>> {
    let json: AtlasJson = read_json(path)?;
    Ok(Arc::new(IntervalAtlas::from_json(&json)?))
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Tower(TowerCmd::Build(args)) => tower_build(args),
        Command::Tower(TowerCmd::Validate { file }) => {
            let json: TowerJson = read_json(&file)?;
            let diags = match CoverTower::from_json(&json) {
                Ok(t) => validate_gm(&t)?,
                Err(Error::Invalid(d)) => d,
                Err(e) => return Err(e.into()),
            };
            for d in &diags {
                println!("{d}");
            }
            if diags.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(Failed(format!("{} diagnostic(s)", diags.len())).into())
            }
        }
        Command::Atlas(AtlasCmd::Build { tower, depth, mode, out, materialize, summary }) => {
            let t = Arc::new(load_tower(&tower)?);
            let atlas = build_atlas(t, depth, mode)?;
            for c in atlas.certificates() {
                eprintln!(
                    "level {}: margin dominance {}, hole sizes {}, bracket bound {}",
                    c.level,
                    c.margin_dominance,
                    c.hole_size.map_or("n/a".to_string(), |b| b.to_string()),
                    c.bracket_bound
                );
            }
            write_json(&out, &atlas.to_json(materialize)?)?;
            if let Some(p) = summary {
                write_json(&p, &atlas.summary())?;
            }
            Ok(())
        }
        Command::Verify(v) => verify(v),
        Command::Extend(ExtendCmd::Build { atlas, levels, horizon, samples, seed, out, report }) => {
            let atlas = load_atlas(&atlas)?;
            let ext = build_extension(atlas, levels, horizon)?;
            write_json(&out, &ext.to_json())?;
            let rep = verify_extension(&ext, samples, seed)?;
            emit(report.as_deref(), &rep)?;
            let periods: Vec<String> = ext.periods().iter().map(usize::to_string).collect();
            eprintln!("periods: {}", periods.join(", "));
            if rep.passed() {
                Ok(())
            } else {
                Err(Failed("extension certificates failed".into()).into())
            }
        }
        Command::Export(ExportCmd::Plotdata { atlas, extension, samples, seed, out_dir }) => {
            plotdata(&atlas, extension.as_deref(), samples, seed, &out_dir)
        }
    }
}

fn tower_build(args: TowerBuild) -> anyhow::Result<()> {
    let tower = if let Some(bases) = &args.bases {
        odometer_tower(bases)?
    } else if let Some(path) = &args.words {
        let words: Vec<Vec<Word>> = read_json(path)?;
        build_tower_from_words(&words)?
    } else {
        let levels = args.levels.expect("required by clap");
        let cycles = args.cycles.clone().unwrap_or_else(|| vec![2; levels]);
        random_simple_tower(args.seed.expect("required by clap"), levels, &cycles, args.budget)?
    };
    if args.strict && !growth_check(&tower) {
        eprintln!("warning: vertex counts do not satisfy the growth condition");
    }
    write_json(&args.out, &tower.to_json())
}

#[derive(Serialize)]
struct QuotientFile {
    depth: usize,
    seed: u64,
    samples: usize,
    violations: usize,
    per_level: Vec<gmcantor::LevelQuotients>,
    pairs: Vec<QuotientReport>,
}

fn quotient_file(atlas: &IntervalAtlas, depth: usize, samples: usize, seed: u64) -> anyhow::Result<QuotientFile> {
    let pairs = sample_pairs(atlas, depth, 1..=depth, samples, seed)?;
    let reports = pairs
        .iter()
        .map(|(x, y)| quotient_exact(atlas, x, y))
        .collect::<gmcantor::Result<Vec<_>>>()?;
    let violations = reports.iter().filter(|r| r.within_theoretical == Some(false)).count();
    Ok(QuotientFile {
        depth,
        seed,
        samples,
        violations,
        per_level: per_level_quotients(atlas, &reports, 1..=depth),
        pairs: reports,
    })
}

#[derive(Serialize)]
struct CheckFile {
    check: &'static str,
    depth: usize,
    passed: bool,
}

fn verify(cmd: VerifyCmd) -> anyhow::Result<()> {
    let passed = match cmd {
        VerifyCmd::Quotients { atlas, sampling, out } => {
            let atlas = load_atlas(&atlas)?;
            let depth = sampling.depth.unwrap_or(atlas.depth());
            let file = quotient_file(&atlas, depth, sampling.samples, sampling.seed)?;
            for l in &file.per_level {
                eprintln!(
                    "level {}: {} pairs, {} crossing, max bound log2 {}",
                    l.level,
                    l.pairs,
                    l.crossing,
                    l.max_bound_log2.map_or("n/a".into(), |v| format!("{v:.3}"))
                );
            }
            emit(out.as_deref(), &file)?;
            file.violations == 0
        }
        VerifyCmd::Lrs { atlas, sampling, out } => {
            let atlas = load_atlas(&atlas)?;
            let depth = sampling.depth.unwrap_or(atlas.depth());
            let rep = lrs_sample_check(&atlas, depth, sampling.samples, sampling.seed)?;
            emit(out.as_deref(), &rep)?;
            rep.passed()
        }
        VerifyCmd::Conjugacy { atlas, depth, out } => {
            let atlas = load_atlas(&atlas)?;
            let depth = depth.unwrap_or(atlas.depth());
            let passed = conjugacy_check(&atlas, depth)?;
            emit(out.as_deref(), &CheckFile { check: "conjugacy", depth, passed })?;
            passed
        }
        VerifyCmd::Disjointness { atlas, out } => {
            let atlas = load_atlas(&atlas)?;
            let passed = disjointness_check(&atlas)?;
            emit(out.as_deref(), &CheckFile { check: "disjointness", depth: atlas.depth(), passed })?;
            passed
        }
    };
    if passed {
        Ok(())
    } else {
        Err(Failed("verification found violations".into()).into())
    }
}

/// `log2(h + 1)` for a height `h > -1`, readable where `f64` rounds to `-1`.
fn offset_log2(h: &ExactScalar) -> f64 {
    (h + &ExactScalar::one()).log2_abs()
}

fn plotdata(atlas_path: &Path, extension: Option<&Path>, samples: usize, seed: u64, out_dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out_dir)?;
    let atlas = load_atlas(atlas_path)?;

    let mut w = csv::Writer::from_path(out_dir.join("intervals.csv"))?;
    w.write_record(["level", "vertex", "index", "in_w", "a_lo_approx", "a_hi_approx", "psi_log2", "slot_diam_log2"])?;
    for m in 1..=atlas.depth() {
        let ix = atlas.indexing(m)?;
        for (i, &v) in ix.order().iter().enumerate() {
            let a = atlas.interval_a(m, v)?;
            w.write_record([
                m.to_string(),
                v.to_string(),
                (i + 1).to_string(),
                ix.in_w(v).to_string(),
                a.lo.to_f64().to_string(),
                a.hi.to_f64().to_string(),
                atlas.psi(m, v)?.log2_abs().to_string(),
                atlas.slot_diam(m, v)?.log2_abs().to_string(),
            ])?;
        }
    }
    w.flush()?;

    let file = quotient_file(&atlas, atlas.depth(), samples, seed)?;
    let mut w = csv::Writer::from_path(out_dir.join("quotients.csv"))?;
    w.write_record(["level", "pairs", "crossing", "max_bound_log2", "theoretical_log2"])?;
    for l in &file.per_level {
        w.write_record([
            l.level.to_string(),
            l.pairs.to_string(),
            l.crossing.to_string(),
            l.max_bound_log2.map_or(String::new(), |v| v.to_string()),
            l.theoretical.log2_abs().to_string(),
        ])?;
    }
    w.flush()?;

    if let Some(p) = extension {
        let ext: ExtensionJson = read_json(p)?;
        let mut w = csv::Writer::from_path(out_dir.join("spirals.csv"))?;
        w.write_record(["n", "j", "back", "height_offset_log2"])?;
        for s in &ext.spirals {
            for pt in &s.points {
                w.write_record([
                    s.n.to_string(),
                    pt.j.to_string(),
                    pt.back.to_string(),
                    offset_log2(&pt.height).to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}
