//! The `ap3` command line.
//!
//! Exit codes: 0 on success, 1 on domain or I/O errors, 2 on usage errors.
//! Every run writes `<subcommand>.manifest.json` into the output directory.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, LevelFilter};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::apcount::{self, SubgroupSampling};
use crate::error::{Error, Result};
use crate::fourier;
use crate::gfspace::{DensityFunction, GroupParams, PointSet};
use crate::improve::{construct_g, ImprovePipelineConfig};
use crate::rounding::round_to_indicator;
use crate::search;
use crate::selfcheck;
use crate::subspace::{average_over_cosets, parse_generators, Subspace};

#[derive(Debug, Parser)]
#[command(name = "ap3", version, about = "Three-term progressions in F_p^n")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory receiving reports, outputs and the manifest.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: LevelFilter,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print Λ₃, T₃ and T₃′ of a density (.apf) or set (.aps).
    Count(InputArgs),
    /// List Fourier coefficients above a cutoff.
    Spectrum(SpectrumArgs),
    /// Average a density over the cosets of a subspace.
    Average(AverageArgs),
    /// Build the Λ₃-decreasing function g.
    Improve(ImproveArgs),
    /// Round a density to an indicator with the same mean.
    Round(RoundArgs),
    /// Minimize Λ₃ over sets of density at least α.
    Search(SearchArgs),
    /// Closest union of cosets to a set.
    Structure(StructureArgs),
    /// Coset-sampling lower bound for T₃′.
    Varnavides(VarnavidesArgs),
    /// Run the built-in identity suite.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Only coefficients with |f̂(a)| > cutoff are listed.
    #[arg(long, default_value_t = 0.0)]
    pub cutoff: f64,
}

#[derive(Debug, Args)]
pub struct AverageArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Generators such as "1,0;0,1", or "full" / "zero".
    #[arg(long)]
    pub subspace: String,
}

#[derive(Debug, Args)]
pub struct ImproveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_epsilon)]
    pub epsilon: f64,
    #[arg(long, value_parser = parse_positive)]
    pub delta: Option<f64>,
    #[arg(long = "c-p", value_parser = parse_positive)]
    pub c_p: Option<f64>,
    #[arg(long)]
    pub ell: Option<usize>,
    /// Also round g to an indicator, monitoring W.
    #[arg(long)]
    pub indicator: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RoundArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Subspace whose coset averages are tracked; repeatable.
    #[arg(long)]
    pub monitor: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub n: u32,
    /// Density floor, decimal or fraction such as 4/9.
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,
    #[arg(long, conflicts_with_all = ["restarts", "iters"])]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
}

#[derive(Debug, Args)]
pub struct StructureArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub max_codim: usize,
}

#[derive(Debug, Args)]
pub struct VarnavidesArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub m_dim: usize,
    #[arg(long, conflicts_with = "exhaustive")]
    pub samples: Option<usize>,
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Print the pass/fail list as JSON.
    #[arg(long)]
    pub json: bool,
}

fn parse_epsilon(s: &str) -> std::result::Result<f64, String> {
    let e: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if e > 0.0 && e <= 1.0 {
        Ok(e)
    } else {
        Err(format!("epsilon must lie in (0, 1], got {s}"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|e| format!("{e}"))?;
            let den: f64 = den.trim().parse().map_err(|e| format!("{e}"))?;
            num / den
        }
        None => s.parse().map_err(|e| format!("{e}"))?,
    };
    if a > 0.0 && a <= 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1], got {s}"))
    }
}

#[derive(Serialize)]
struct InputRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    args: Vec<String>,
    seed: u64,
    threads: Option<usize>,
    inputs: Vec<InputRecord>,
    outputs: Vec<String>,
}

struct Run {
    output_dir: PathBuf,
    inputs: Vec<InputRecord>,
    outputs: Vec<String>,
}

impl Run {
    fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push(InputRecord {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    fn density(&mut self, path: &Path) -> Result<DensityFunction> {
        let text = self.text(path)?;
        if path.extension().is_some_and(|e| e == "aps") {
            Ok(DensityFunction::indicator(&parse_at(path, &text)?))
        } else {
            parse_at(path, &text)
        }
    }

    fn set(&mut self, path: &Path) -> Result<PointSet> {
        let text = self.text(path)?;
        parse_at(path, &text)
    }

    fn text(&mut self, path: &Path) -> Result<String> {
        let bytes = self.read_input(path)?;
        String::from_utf8(bytes).map_err(|_| Error::InvalidArgument(format!("{}: not UTF-8", path.display())))
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        fs::write(path, contents).map_err(|e| Error::io(path, e))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(path, &text)
    }
}

fn parse_at<T>(path: &Path, text: &str) -> Result<T>
where
    T: std::str::FromStr<Err = Error>,
{
    text.parse().map_err(|e: Error| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => Error::InvalidArgument(format!("{}: {other}", path.display())),
    })
}

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Count(_) => "count",
        Command::Spectrum(_) => "spectrum",
        Command::Average(_) => "average",
        Command::Improve(_) => "improve",
        Command::Round(_) => "round",
        Command::Search(_) => "search",
        Command::Structure(_) => "structure",
        Command::Varnavides(_) => "varnavides",
        Command::Selfcheck(_) => "selfcheck",
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let _ = env_logger::Builder::new().filter_level(cli.log_level).try_init();

    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    let mut run = Run {
        output_dir: cli.output_dir.clone(),
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    let outcome = fs::create_dir_all(&cli.output_dir)
        .map_err(|e| Error::io(&cli.output_dir, e))
        .and_then(|_| pool.install(|| dispatch(&cli, &mut run)));
    let code = match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };

    let name = subcommand_name(&cli.command);
    let manifest = Manifest {
        tool: "ap3",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name,
        args: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        seed: cli.seed,
        threads: cli.threads,
        inputs: std::mem::take(&mut run.inputs),
        outputs: std::mem::take(&mut run.outputs),
    };
    let path = run.out_path(&format!("{name}.manifest.json"));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    if let Err(e) = fs::write(&path, text) {
        eprintln!("error: {}", Error::io(&path, e));
        return 1;
    }
    code
}

fn dispatch(cli: &Cli, run: &mut Run) -> Result<i32> {
    match &cli.command {
        Command::Count(a) => count(run, a),
        Command::Spectrum(a) => spectrum(run, a),
        Command::Average(a) => average(run, a),
        Command::Improve(a) => improve(run, a, cli.seed),
        Command::Round(a) => round(run, a, cli.seed),
        Command::Search(a) => search_cmd(run, a, cli.seed),
        Command::Structure(a) => structure(run, a),
        Command::Varnavides(a) => varnavides(run, a, cli.seed),
        Command::Selfcheck(a) => selfcheck_cmd(run, a),
    }
}

#[derive(Serialize)]
struct CountReport {
    p: u32,
    n: u32,
    mean: f64,
    #[serde(flatten)]
    counts: apcount::TripleCount,
}

fn count(run: &mut Run, a: &InputArgs) -> Result<i32> {
    let f = run.density(&a.input)?;
    let counts = apcount::count(&f);
    println!("lambda3={}", counts.lambda3);
    match counts.exact {
        Some(exact) => {
            println!("t3_raw={}", exact.raw);
            println!("t3_nontrivial={}", exact.nontrivial);
        }
        None => {
            println!("t3_raw={}", counts.raw);
            println!("t3_nontrivial={}", counts.nontrivial);
        }
    }
    let report = CountReport {
        p: f.params().p(),
        n: f.params().n(),
        mean: f.expectation(),
        counts,
    };
    run.write_json(&run.out_path("count.json"), &report)?;
    Ok(0)
}

#[derive(Serialize)]
struct SpectrumReport {
    p: u32,
    n: u32,
    cutoff: f64,
    parseval_sum: f64,
    lambda3_spectral: f64,
    listed: usize,
}

fn spectrum(run: &mut Run, a: &SpectrumArgs) -> Result<i32> {
    if !(a.cutoff >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff must be non-negative, got {}",
            a.cutoff
        )));
    }
    let f = run.density(&a.input)?;
    let spec = fourier::dft_forward(&f);
    let lines = spec.export_lines(a.cutoff);
    let mut text = String::new();
    for line in &lines {
        println!("{line}");
        text.push_str(line);
        text.push('\n');
    }
    run.write(&run.out_path("spectrum.txt"), &text)?;
    let report = SpectrumReport {
        p: f.params().p(),
        n: f.params().n(),
        cutoff: a.cutoff,
        parseval_sum: spec.parseval_sum(),
        lambda3_spectral: fourier::lambda3_from_spectrum(&spec).re,
        listed: lines.len(),
    };
    run.write_json(&run.out_path("spectrum.json"), &report)?;
    Ok(0)
}

#[derive(Serialize)]
struct AverageReport {
    subspace: Subspace,
    cosets: usize,
    mean_before: f64,
    mean_after: f64,
    lambda3_before: f64,
    lambda3_after: f64,
    mean_abs_deviation: f64,
}

fn average(run: &mut Run, a: &AverageArgs) -> Result<i32> {
    let f = run.density(&a.input)?;
    let w = parse_generators(f.params(), &a.subspace)?;
    let fw = average_over_cosets(&f, &w)?;
    let report = AverageReport {
        cosets: w.params().size() / w.size(),
        mean_before: f.expectation(),
        mean_after: fw.expectation(),
        lambda3_before: apcount::lambda3_direct(&f),
        lambda3_after: apcount::lambda3_direct(&fw),
        mean_abs_deviation: f.mean_abs_diff(&fw)?,
        subspace: w,
    };
    let out = run.out_path("f_W.apf");
    run.write(&out, &fw.to_string())?;
    run.write_json(&run.out_path("average.json"), &report)?;
    Ok(0)
}

fn improve(run: &mut Run, a: &ImproveArgs, seed: u64) -> Result<i32> {
    let f = run.density(&a.input)?;
    let mut config = ImprovePipelineConfig::new(a.epsilon);
    if let Some(d) = a.delta {
        config = config.with_delta(d);
    }
    if let Some(c) = a.c_p {
        config = config.with_c_p(c);
    }
    if let Some(ell) = a.ell {
        config = config.with_ell(ell);
    }
    let (g, report) = construct_g(&f, &config)?;
    info!(
        "dim W = {}, |V'| = {}, lambda3 {} -> {}",
        report.w.dim(),
        report.v_prime.len(),
        report.lambda3_f,
        report.lambda3_g
    );
    run.write(&run.out_path("g.apf"), &g.to_string())?;
    let report_path = a.report.clone().unwrap_or_else(|| run.out_path("improve.json"));
    run.write_json(&report_path, &report)?;
    if a.indicator {
        let (g2, rounding) = round_to_indicator(&g, seed, std::slice::from_ref(&report.w))?;
        let support = g2.support().expect("rounding yields an indicator");
        run.write(&run.out_path("g_indicator.aps"), &support.to_string())?;
        run.write_json(&run.out_path("round.json"), &rounding)?;
    }
    if !report.all_passed() {
        eprintln!("error: inequality checks failed; see {}", report_path.display());
        return Ok(1);
    }
    Ok(0)
}

fn round(run: &mut Run, a: &RoundArgs, seed: u64) -> Result<i32> {
    let j = run.density(&a.input)?;
    let monitored = a
        .monitor
        .iter()
        .map(|spec| parse_generators(j.params(), spec))
        .collect::<Result<Vec<_>>>()?;
    let (j2, report) = round_to_indicator(&j, seed, &monitored)?;
    run.write(&run.out_path("j2.apf"), &j2.to_string())?;
    run.write_json(&run.out_path("round.json"), &report)?;
    Ok(0)
}

fn search_cmd(run: &mut Run, a: &SearchArgs, seed: u64) -> Result<i32> {
    let params = GroupParams::new(a.p, a.n)?;
    let result = if a.exhaustive {
        search::exhaustive_min(params, a.alpha)?
    } else {
        search::local_min(params, a.alpha, a.restarts, a.iters, seed)?
    };
    println!("lambda3={}", result.lambda3);
    println!("t3_raw={}", result.raw_count);
    println!("size={}", result.best_set.len());
    run.write(&run.out_path("witness.aps"), &result.witness.to_string())?;
    run.write_json(&run.out_path("search.json"), &result)?;
    Ok(0)
}

fn structure(run: &mut Run, a: &StructureArgs) -> Result<i32> {
    let set = run.set(&a.input)?;
    let report = search::structure_report(&set, a.max_codim)?;
    run.write_json(&run.out_path("structure.json"), &report)?;
    Ok(0)
}

fn varnavides(run: &mut Run, a: &VarnavidesArgs, seed: u64) -> Result<i32> {
    let set = run.set(&a.input)?;
    let sampling = match a.samples {
        Some(samples) if !a.exhaustive => SubgroupSampling::Random { samples, seed },
        _ => SubgroupSampling::Exhaustive,
    };
    let report = apcount::varnavides_estimate(&set, a.m_dim, sampling)?;
    println!("certified_lower_bound={}", report.certified_lower_bound);
    run.write_json(&run.out_path("varnavides.json"), &report)?;
    Ok(0)
}

fn selfcheck_cmd(run: &mut Run, a: &SelfcheckArgs) -> Result<i32> {
    let report = selfcheck::run();
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        for c in &report.checks {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    run.write_json(&run.out_path("selfcheck.json"), &report)?;
    if report.passed {
        Ok(0)
    } else {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("failed: {}: {}", c.name, c.detail);
        }
        Ok(1)
    }
}
