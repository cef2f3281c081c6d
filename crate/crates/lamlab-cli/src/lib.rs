//! Command-line front end: sampling, rendering and experiment verification.

pub mod config;
pub mod render;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use lamlab::experiments::{self, ExperimentReport};
use lamlab::fragmentation::sample_tree_cut_process;
use lamlab::gw_sampler::{compute_bn, ConditionedSampler, OffspringDistribution};
use lamlab::lamination::{Lamination, LaminationJson};
use lamlab::levy::{density_q_many, ExponentParams};
use lamlab::minimal_factorization::{sample_uniform_factorization, MinimalFactorization};
use lamlab::plane_tree::{PlaneTree, TreeJson};
use lamlab::rng::stream;

use config::ConfigFile;
use render::{render_lamination, render_tree, RenderSpec};

/// Exit code for a failed experiment verdict.
pub const EXIT_VERDICT: i32 = 1;
/// Exit code for invalid flags, configuration or input files.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lamlab", version, about = "Random laminations, fragmentations and factorizations")]
pub struct Cli {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Svg,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Chords shorter than this are not drawn.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub stroke: Option<f64>,
    #[arg(long)]
    pub labels: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditioned Galton-Watson tree (Poisson(1) for alpha = 2, stable otherwise).
    SampleTree {
        #[command(flatten)]
        common: Common,
    },
    /// Uniform minimal factorization of the n-cycle.
    SampleFacto {
        #[command(flatten)]
        common: Common,
    },
    /// Poisson cuts on a tree at rate B_n / n per edge, up to time c.
    CutProcess {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Comma-separated times for the mass trace.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
    },
    /// Lamination of a tree or of the first k transpositions of a factorization.
    Lamination {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        facto: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        /// Lukasiewicz instead of contour coding for trees.
        #[arg(long)]
        luka: bool,
        /// Last k transpositions instead of the first k.
        #[arg(long)]
        suffix: bool,
    },
    /// Noncrossing partition of the first k transpositions.
    Partition {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        facto: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Density of the marginal at time u on a grid.
    LevyDensity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xmax: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run experiment suites; exits 1 when any verdict fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Draw the seed from the operating system instead of --seed.
        #[arg(long)]
        fresh_seed: bool,
    },
    /// Frames of the growing cut lamination of one conditioned tree.
    Animate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        frames: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Mass,
    Factorization,
    Levy,
    LocalLimit,
    Reduced,
    Luka,
    Partition,
}

/// Flags merged with the configuration file.
struct Resolved<'a> {
    file: &'a ConfigFile,
    common: &'a Common,
}

impl Resolved<'_> {
    fn seed(&self) -> Result<u64> {
        self.file
            .pick(self.common.seed, "seed")
            .map_err(|e| anyhow!(e))?
            .ok_or_else(|| anyhow!(ConfigError("--seed is required for this command".into())))
    }
    fn alpha(&self) -> Result<f64> {
        let a = self.file.pick(self.common.alpha, "alpha").map_err(cfg)?.unwrap_or(2.0);
        if !(a > 1.0 && a <= 2.0) {
            bail!(ConfigError(format!("--alpha {a} outside (1, 2]")));
        }
        Ok(a)
    }
    fn c(&self, default: f64) -> Result<f64> {
        Ok(self.file.pick(self.common.c, "c").map_err(cfg)?.unwrap_or(default))
    }
    fn n(&self, default: u64) -> Result<u64> {
        Ok(self.file.pick(self.common.n, "n").map_err(cfg)?.unwrap_or(default))
    }
    fn out(&self) -> Result<Option<PathBuf>> {
        self.file.pick(self.common.out.clone(), "out").map_err(cfg)
    }
    fn format(&self, default: Format) -> Result<Format> {
        Ok(self.file.pick(self.common.format, "format").map_err(cfg)?.unwrap_or(default))
    }
    fn render(&self, default_delta: f64) -> Result<RenderSpec> {
        let spec = RenderSpec {
            width: self.file.pick(self.common.width, "width").map_err(cfg)?.unwrap_or(512),
            stroke_width: self.file.pick(self.common.stroke, "stroke").map_err(cfg)?.unwrap_or(1.0),
            min_extent: self.file.pick(self.common.delta, "delta").map_err(cfg)?.unwrap_or(default_delta),
            labels: self.file.flag(self.common.labels, "labels").map_err(cfg)?,
        };
        spec.validate().map_err(|e| anyhow!(ConfigError(e.to_string())))?;
        Ok(spec)
    }
}

#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn cfg(e: String) -> anyhow::Error {
    anyhow!(ConfigError(e))
}

/// Verdict failure, carried through `anyhow` to select the exit code.
#[derive(Debug)]
struct VerdictFailed(usize);

impl std::fmt::Display for VerdictFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} experiment(s) failed", self.0)
    }
}

impl std::error::Error for VerdictFailed {}

fn host_law(alpha: f64) -> Result<OffspringDistribution> {
    if alpha == 2.0 {
        Ok(OffspringDistribution::poisson1())
    } else {
        Ok(OffspringDistribution::stable(alpha)?)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Result<T> {
    let text = fs::read_to_string(p).map_err(|e| cfg(format!("cannot read {}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| cfg(format!("{}: {e}", p.display())))
}

fn read_tree(p: &Path) -> Result<PlaneTree> {
    let j: TreeJson = read_json(p)?;
    PlaneTree::from_json(&j).map_err(|e| cfg(format!("{}: {e}", p.display())))
}

fn read_facto(p: &Path) -> Result<MinimalFactorization> {
    let f: MinimalFactorization = read_json(p)?;
    MinimalFactorization::new(f.n, f.transpositions)
        .map_err(|e| cfg(format!("{}: {e}", p.display())))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn sample_tree(r: &Resolved) -> Result<String> {
    let seed = r.seed()?;
    let alpha = r.alpha()?;
    let n = r.n(100)? as usize;
    if n == 0 {
        bail!(ConfigError("--n must be positive".into()));
    }
    let law = host_law(alpha)?;
    let t = ConditionedSampler::new(&law, n)?.sample(&mut stream(seed, "sample-tree"));
    Ok(match r.format(Format::Json)? {
        Format::Json => json(&t.to_json()),
        Format::Svg => render_tree(&t, &r.render(0.0)?),
        Format::Csv => {
            let mut s = String::from("vertex,parent\n");
            for v in 0..t.n() {
                let p = t.parent(v).map(|p| p.to_string()).unwrap_or_default();
                s.push_str(&format!("{v},{p}\n"));
            }
            s
        }
    })
}

fn sample_facto(r: &Resolved) -> Result<String> {
    let seed = r.seed()?;
    let n = r.n(10)? as usize;
    if n < 2 {
        bail!(ConfigError("--n must be at least 2".into()));
    }
    let f = sample_uniform_factorization(n, &mut stream(seed, "sample-facto"));
    Ok(match r.format(Format::Json)? {
        Format::Json => json(&f),
        Format::Svg => render_lamination(&f.prefix_lamination(f.len(), false), &r.render(0.0)?),
        Format::Csv => {
            let mut s = String::from("index,a,b\n");
            for (i, (a, b)) in f.transpositions.iter().enumerate() {
                s.push_str(&format!("{},{a},{b}\n", i + 1));
            }
            s
        }
    })
}

fn cut_process(r: &Resolved, tree: Option<&Path>, times: &[f64]) -> Result<String> {
    let seed = r.seed()?;
    let alpha = r.alpha()?;
    let t = match tree {
        Some(p) => read_tree(p)?,
        None => {
            let n = r.n(100)? as usize;
            ConditionedSampler::new(&host_law(alpha)?, n)?.sample(&mut stream(seed, "cut-process/tree"))
        }
    };
    let c = r.c(1.0)?;
    if !(c > 0.0) {
        bail!(ConfigError("--c must be positive".into()));
    }
    if t.n() < 2 {
        bail!(ConfigError("the tree needs at least two vertices".into()));
    }
    let b_n = compute_bn(&host_law(alpha)?, t.n() as u64)?.b_n;
    let rate = b_n / t.n() as f64;
    let cp = sample_tree_cut_process(&t, rate, c, &mut stream(seed, "cut-process"))?;
    Ok(match r.format(Format::Csv)? {
        Format::Csv => {
            let times = if times.is_empty() { vec![c] } else { times.to_vec() };
            cp.fragmentation_masses(&t, &times)?.to_csv()
        }
        Format::Json => json(&cp),
        Format::Svg => render_lamination(&cp.lamination_at(c), &r.render(0.0)?),
    })
}

fn lamination_cmd(
    r: &Resolved,
    tree: Option<&Path>,
    facto: Option<&Path>,
    k: Option<usize>,
    luka: bool,
    suffix: bool,
) -> Result<String> {
    let l = match (tree, facto) {
        (Some(p), None) => {
            let t = read_tree(p)?;
            if luka {
                Lamination::from_lukasiewicz(&t.lukasiewicz())?
            } else {
                Lamination::from_tree_contour(&t)
            }
        }
        (None, Some(p)) => {
            let f = read_facto(p)?;
            f.prefix_lamination(k.unwrap_or(f.len()), suffix)
        }
        _ => bail!(ConfigError("give exactly one of --tree and --facto".into())),
    };
    Ok(match r.format(Format::Svg)? {
        Format::Svg => render_lamination(&l, &r.render(0.0)?),
        Format::Json => json(&l.to_json()),
        Format::Csv => {
            let mut s = String::from("a,b,den,label\n");
            for ch in l.chords() {
                let label = ch.label.map(|x| x.to_string()).unwrap_or_default();
                s.push_str(&format!("{},{},{},{label}\n", ch.a, ch.b, l.den()));
            }
            s
        }
    })
}

#[derive(serde::Serialize)]
struct PartitionOut {
    n: usize,
    k: usize,
    blocks: Vec<Vec<usize>>,
    largest_block_mass: f64,
    lamination: LaminationJson,
}

fn partition_cmd(r: &Resolved, facto: &Path, k: Option<usize>) -> Result<String> {
    let f = read_facto(facto)?;
    let k = k.unwrap_or(f.len());
    let p = f.partition_process(k);
    Ok(match r.format(Format::Svg)? {
        Format::Svg => render_lamination(&p.lamination, &r.render(0.0)?),
        Format::Json => json(&PartitionOut {
            n: p.n,
            k,
            largest_block_mass: p.largest_block_mass(),
            blocks: p.blocks.clone(),
            lamination: p.lamination.to_json(),
        }),
        Format::Csv => {
            let mut s = String::from("block,elements\n");
            for (i, b) in p.blocks.iter().enumerate() {
                let e: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!("{i},{}\n", e.join(" ")));
            }
            s
        }
    })
}

#[derive(serde::Serialize)]
struct DensityOut {
    alpha: f64,
    c: f64,
    u: f64,
    x: Vec<f64>,
    density: Vec<f64>,
    error_estimate: Vec<f64>,
}

fn levy_density(
    r: &Resolved,
    u: Option<f64>,
    xmin: Option<f64>,
    xmax: Option<f64>,
    points: Option<usize>,
) -> Result<String> {
    let alpha = r.alpha()?;
    let c = r.c(1.0)?;
    let u = r.file.pick(u, "u").map_err(cfg)?.unwrap_or(1.0);
    let xmin = r.file.pick(xmin, "xmin").map_err(cfg)?.unwrap_or(-c * u);
    let xmax = r.file.pick(xmax, "xmax").map_err(cfg)?.unwrap_or(5.0);
    let points = r.file.pick(points, "points").map_err(cfg)?.unwrap_or(201);
    if !(xmax > xmin) || points < 2 {
        bail!(ConfigError("need xmax > xmin and at least two points".into()));
    }
    let p = ExponentParams::new(alpha, c).map_err(|e| cfg(e.to_string()))?;
    let xs: Vec<f64> =
        (0..points).map(|i| xmin + (xmax - xmin) * i as f64 / (points - 1) as f64).collect();
    let q = density_q_many(u, &xs, &p, 1e-6)?;
    Ok(match r.format(Format::Csv)? {
        Format::Csv => {
            let mut s = String::from("x,density,error_estimate\n");
            for (x, v) in xs.iter().zip(&q) {
                s.push_str(&format!("{x},{},{}\n", v.value, v.error_estimate));
            }
            s
        }
        Format::Json => json(&DensityOut {
            alpha,
            c,
            u,
            x: xs,
            density: q.iter().map(|v| v.value).collect(),
            error_estimate: q.iter().map(|v| v.error_estimate).collect(),
        }),
        Format::Svg => {
            let path = lamlab::plane_tree::LatticePath::linear(
                q.iter().map(|v| v.value).collect(),
                (xmax - xmin) / (points - 1) as f64,
            );
            render::render_path(&path, &r.render(0.0)?)
        }
    })
}

/// Runs the experiments of a suite in a fixed order.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<ExperimentReport>> {
    use experiments::*;
    let pick = |s: Suite| suite == Suite::All || suite == s;
    let mut out = Vec::new();
    if pick(Suite::Mass) {
        out.push(exp_mass_identity(&Default::default(), seed)?);
    }
    if pick(Suite::Factorization) {
        out.push(exp_factorization_vs_fragmentation(&BridgeConfig::default(), seed)?);
    }
    if pick(Suite::Levy) {
        out.push(exp_levy_marginal(&BridgeConfig::levy(2.0), seed)?);
        out.push(exp_levy_marginal(&BridgeConfig::levy(1.5), seed)?);
    }
    if pick(Suite::LocalLimit) {
        out.push(exp_local_limit(&Default::default(), seed)?);
    }
    if pick(Suite::Reduced) {
        for size in 3..=5 {
            out.push(exp_reduced_tree_law(&ReducedTreeConfig { size, ..Default::default() }, seed)?);
        }
    }
    if pick(Suite::Luka) {
        out.push(exp_luka_vs_contour(&Default::default(), seed)?);
    }
    if pick(Suite::Partition) {
        out.push(exp_partition_process(&Default::default(), seed)?);
    }
    Ok(out)
}

fn verify(r: &Resolved, suite: Suite, fresh: bool) -> Result<String> {
    let fresh = r.file.flag(fresh, "fresh-seed").map_err(cfg)?;
    let seed = if fresh { rand::random::<u64>() } else { r.seed()? };
    let reports = run_suite(suite, seed)?;
    let mut summary = String::new();
    if let Some(dir) = r.out()? {
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (i, rep) in reports.iter().enumerate() {
            let stem = dir.join(format!("{i:02}_{}", rep.name));
            fs::write(stem.with_extension("json"), rep.to_json() + "\n")?;
            fs::write(stem.with_extension("csv"), rep.to_csv())?;
        }
    }
    let mut failed = 0;
    for rep in &reports {
        let tag = if rep.passed() { "PASS" } else { "FAIL" };
        if !rep.passed() {
            failed += 1;
        }
        summary.push_str(&format!("{tag} {} seed={}\n", rep.name, rep.seed));
    }
    print!("{summary}");
    if failed > 0 {
        return Err(anyhow!(VerdictFailed(failed)));
    }
    Ok(String::new())
}

/// Frame times: `0`, then `s / (1 - s)` for `s = i / (frames - 1)`, and
/// finally every vertex cut.
pub fn animation_times(frames: usize) -> Vec<f64> {
    (0..frames)
        .map(|i| {
            let s = i as f64 / (frames - 1) as f64;
            if i + 1 == frames {
                f64::INFINITY
            } else {
                s / (1.0 - s)
            }
        })
        .collect()
}

/// SVG documents of the animation frames, in order.
pub fn animate_frames(
    alpha: f64,
    n: usize,
    frames: usize,
    seed: u64,
    spec: &RenderSpec,
) -> Result<Vec<String>> {
    if frames < 2 {
        bail!(ConfigError("--frames must be at least 2".into()));
    }
    if n < 2 {
        bail!(ConfigError("--n must be at least 2".into()));
    }
    let law = host_law(alpha)?;
    let t = ConditionedSampler::new(&law, n)?.sample(&mut stream(seed, "animate/tree"));
    let times = animation_times(frames);
    let horizon = times[frames - 2].max(1.0);
    let rate = compute_bn(&law, n as u64)?.b_n / n as f64;
    let cp = sample_tree_cut_process(&t, rate, horizon, &mut stream(seed, "animate/cuts"))?;
    let full = Lamination::from_tree_contour(&t);
    Ok(times
        .par_iter()
        .map(|&c| {
            let l = if c.is_finite() { cp.lamination_at(c) } else { full.clone() };
            render_lamination(&l, spec)
        })
        .collect())
}

fn animate(r: &Resolved, frames: Option<usize>) -> Result<String> {
    let seed = r.seed()?;
    let alpha = r.alpha()?;
    let n = r.n(20_000)? as usize;
    let frames = r.file.pick(frames, "frames").map_err(cfg)?.unwrap_or(51);
    let spec = r.render(0.01)?;
    let dir = r.out()?.ok_or_else(|| cfg("--out <directory> is required".into()))?;
    let docs = animate_frames(alpha, n, frames, seed, &spec)?;
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for (i, doc) in docs.iter().enumerate() {
        fs::write(dir.join(format!("frame_{i:03}.svg")), doc)?;
    }
    Ok(String::new())
}

fn dispatch(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p).map_err(cfg)?,
        None => ConfigFile::default(),
    };
    let common = match &cli.command {
        Command::SampleTree { common }
        | Command::SampleFacto { common }
        | Command::CutProcess { common, .. }
        | Command::Lamination { common, .. }
        | Command::Partition { common, .. }
        | Command::LevyDensity { common, .. }
        | Command::Verify { common, .. }
        | Command::Animate { common, .. } => common,
    };
    let writes_files = matches!(cli.command, Command::Verify { .. } | Command::Animate { .. });
    let r = Resolved { file: &file, common };
    let output = match &cli.command {
        Command::SampleTree { .. } => sample_tree(&r)?,
        Command::SampleFacto { .. } => sample_facto(&r)?,
        Command::CutProcess { tree, times, .. } => cut_process(&r, tree.as_deref(), times)?,
        Command::Lamination { tree, facto, k, luka, suffix, .. } => {
            lamination_cmd(&r, tree.as_deref(), facto.as_deref(), *k, *luka, *suffix)?
        }
        Command::Partition { facto, k, .. } => partition_cmd(&r, facto, *k)?,
        Command::LevyDensity { u, xmin, xmax, points, .. } => {
            levy_density(&r, *u, *xmin, *xmax, *points)?
        }
        Command::Verify { suite, fresh_seed, .. } => verify(&r, *suite, *fresh_seed)?,
        Command::Animate { frames, .. } => animate(&r, *frames)?,
    };
    if !writes_files {
        emit(r.out()?.as_deref(), &output)?;
    }
    Ok(())
}

fn init_threads() {
    if let Some(k) = std::env::var("LAMLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_threads();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<VerdictFailed>().is_some() {
                EXIT_VERDICT
            } else {
                EXIT_CONFIG
            }
        }
    }
}
