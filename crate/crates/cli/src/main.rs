use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use matroid_walks::complex_spectra::{
    check_strong_log_concavity, check_zero_local_expander, eigenvalue_count_check, eigenvalue_count_table, loewner_domination_check,
    lower_walk, shared_spectrum_check, spectral_gap_check, spectrum, upper_walk, CheckReport, WeightedComplex,
};
use matroid_walks::counting::{self, EstimateConfig, EstimateReport};
use matroid_walks::distributions::{parse_distribution, HomogeneousDistribution};
use matroid_walks::error::Error;
use matroid_walks::exact_oracle::{conductance_vs_cheeger, exact_count_check, expansion_check, transition_bound_check};
use matroid_walks::matroids::{parse_matroid, Matroid};
use matroid_walks::sampler::{sample_tagged, BurnIn, SamplerConfig, Steps};
use matroid_walks::suite::{run_criterion, SuiteOptions, CRITERIA};

#[derive(Parser)]
#[command(name = "matroid-walks", version, about = "Sample matroid bases, estimate partition functions, certify walk spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples from a distribution with the down-up chain.
    Sample(SampleArgs),
    /// Estimate the number of bases.
    CountBases(MatroidEstimate),
    /// Estimate the number of independent sets of size k.
    CountIndep {
        #[command(flatten)]
        common: MatroidEstimate,
        #[arg(long)]
        k: usize,
    },
    /// Estimate the reliability polynomial at p.
    Reliability {
        #[command(flatten)]
        common: MatroidEstimate,
        #[arg(long)]
        p: f64,
    },
    /// Estimate the random-cluster partition function Z(p, q), 0 < q <= 1.
    Cluster {
        #[command(flatten)]
        common: MatroidEstimate,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Estimate the Tutte polynomial at (x, y) with x > 1, y > 1, (x-1)(y-1) <= 1.
    Tutte {
        #[command(flatten)]
        common: MatroidEstimate,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// Estimate the partition function of a distribution (typically dpp_alpha).
    DppZ {
        #[arg(long)]
        dist: PathBuf,
        #[command(flatten)]
        est: EstimateArgs,
    },
    /// Run one structural check and report it as JSON.
    Verify(VerifyArgs),
    /// Eigenvalues of the upper and lower walks at one level.
    Spectrum(SpectrumArgs),
    /// Run the acceptance suite.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Print one line per telescoping level to stderr.
    #[arg(long)]
    verbose: bool,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct MatroidEstimate {
    #[arg(long)]
    matroid: PathBuf,
    #[command(flatten)]
    est: EstimateArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    count: usize,
    /// Target ℓ1 distance from the distribution for each sample.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long)]
    seed: u64,
    /// Chain length per sample: a number or `auto`.
    #[arg(long, default_value = "auto")]
    steps: String,
    /// Take every sample from one chain, this many steps apart.
    #[arg(long)]
    thin: Option<u64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Sle,
    Expander,
    EigenCount,
    Loewner,
    SharedSpectrum,
    SpectralGap,
    Expansion,
    #[value(name = "fact-2r")]
    Fact2r,
    Cheeger,
    ExactCount,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    property: Property,
    #[arg(long)]
    dist: Option<PathBuf>,
    #[arg(long)]
    matroid: Option<PathBuf>,
    /// Level for eigen-count, loewner and shared-spectrum.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    k: usize,
    /// Write the upper walk as CSV (row face, column face, value).
    #[arg(long)]
    upper_csv: Option<PathBuf>,
    #[arg(long)]
    lower_csv: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    /// 200 seeded runs per estimator.
    Desk,
    /// 20 seeded runs per estimator.
    Quick,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, value_enum, default_value = "desk")]
    level: Level,
    /// Comma-separated criterion ids; all by default.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
    /// Base seed of the statistical runs; the suite is a fixed protocol, so it has a default.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Where to write the JSON outcome list; the per-criterion lines go to stderr.
    #[arg(long)]
    out: Option<String>,
}

enum Failure {
    Error(Error),
    Io(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))
}

/// Names the file in input errors, keeping the field path as is.
fn in_file(path: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Input { path: field, message } => Error::Input { path: field, message: format!("{message} (in {})", path.display()) },
        other => other,
    }
}

fn load_matroid(path: &Path) -> Result<Matroid, Error> {
    parse_matroid(&read(path)?).map_err(in_file(path))
}

fn load_dist(path: &Path) -> Result<HomogeneousDistribution, Error> {
    parse_distribution(&read(path)?).map_err(in_file(path))
}

fn open_out(out: &str) -> Result<Box<dyn Write>, Failure> {
    if out == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(out).map_err(|e| Failure::Io(format!("cannot write {out}: {e}")))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn write_json(out: &str, value: &impl Serialize) -> Outcome {
    let mut w = open_out(out)?;
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|e| Failure::Io(e.to_string()))
}

fn estimate_config(a: &EstimateArgs) -> EstimateConfig {
    EstimateConfig { workers: a.workers, verbose: a.verbose, ..EstimateConfig::new(a.eps, a.delta, a.seed) }
}

fn estimate(a: &EstimateArgs, run: impl FnOnce(&EstimateConfig) -> Result<EstimateReport, Error>) -> Outcome {
    let report = run(&estimate_config(a))?;
    write_json(&a.out, &report)
}

fn sample(a: &SampleArgs) -> Outcome {
    let mu = load_dist(&a.dist)?;
    let steps = match a.steps.as_str() {
        "auto" => Steps::Auto,
        t => Steps::Fixed(t.parse().map_err(|_| Error::input_at("steps", format!("expected a number or `auto`, got `{t}`")))?),
    };
    let burn_in = a.thin.map_or(BurnIn::FreshChain, BurnIn::Thinning);
    let cfg = SamplerConfig { seed: a.seed, epsilon: a.eps, steps, burn_in, workers: a.workers };
    let start = Instant::now();
    let run = sample_tagged(&mu, a.count, &cfg, &[])?;
    let wall_ms = start.elapsed().as_millis() as u64;
    let mut w = open_out(&a.out)?;
    let io = |e: io::Error| Failure::Io(e.to_string());
    for s in &run.samples {
        writeln!(w, "{}", serde_json::to_string(s).expect("sets serialize")).map_err(io)?;
    }
    let meta = json!({ "seed": a.seed, "steps_used": run.steps_used, "oracle_calls": run.oracle_calls, "wall_ms": wall_ms });
    writeln!(w, "{meta}").and_then(|_| w.flush()).map_err(io)
}

fn complex_of(mu: &HomogeneousDistribution) -> Result<(matroid_walks::distributions::ExplicitPolynomial, WeightedComplex), Error> {
    let (p, _) = mu.materialize_scaled(matroid_walks::dense_cap())?;
    let x = WeightedComplex::from_polynomial(&p)?;
    Ok((p, x))
}

fn verify(a: &VerifyArgs) -> Outcome {
    let need_k = || a.k.ok_or_else(|| Error::input_at("k", "this property needs --k"));
    let (report, calls): (CheckReport, u64) = match a.property {
        Property::Expansion | Property::Fact2r | Property::Cheeger | Property::ExactCount => {
            let path = a.matroid.as_ref().ok_or_else(|| Error::input_at("matroid", "this property needs --matroid"))?;
            let m = load_matroid(path)?;
            let report = match a.property {
                Property::Expansion => expansion_check(&m)?,
                Property::Fact2r => transition_bound_check(&m)?,
                Property::Cheeger => conductance_vs_cheeger(&m)?,
                _ => exact_count_check(&m)?,
            };
            (report, m.oracle_calls())
        }
        _ => {
            let path = a.dist.as_ref().ok_or_else(|| Error::input_at("dist", "this property needs --dist"))?;
            let mu = load_dist(path)?;
            let workers = a.workers;
            let property = a.property;
            let k = match property {
                Property::EigenCount | Property::Loewner | Property::SharedSpectrum => need_k()?,
                _ => 0,
            };
            let report = matroid_walks::sampler::with_workers(workers, || -> Result<CheckReport, Error> {
                let (p, x) = complex_of(&mu)?;
                match property {
                    Property::Sle => check_strong_log_concavity(&p),
                    Property::Expander => check_zero_local_expander(&x),
                    Property::EigenCount => eigenvalue_count_check(&x, k),
                    Property::Loewner => loewner_domination_check(&x, k),
                    Property::SharedSpectrum => shared_spectrum_check(&x, k),
                    _ => spectral_gap_check(&x),
                }
            })??;
            (report, mu.oracle_calls())
        }
    };
    let mut value = serde_json::to_value(&report).expect("reports serialize");
    value["oracle_calls"] = json!(calls);
    write_json(&a.out, &value)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn write_csv(path: &Path, walk: &matroid_walks::complex_spectra::WalkMatrix) -> Outcome {
    let f = File::create(path).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    walk.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| Failure::Io(e.to_string()))
}

fn spectrum_command(a: &SpectrumArgs) -> Outcome {
    let mu = load_dist(&a.dist)?;
    let (_, x) = complex_of(&mu)?;
    if a.k == 0 || a.k > x.d() {
        return Err(Error::input_at("k", format!("need 1 <= k <= {}, got {}", x.d(), a.k)).into());
    }
    let mut out = json!({ "k": a.k, "d": x.d(), "faces": x.level(a.k).len() });
    let low = lower_walk(&x, a.k)?;
    out["lower_eigenvalues"] = json!(spectrum(&low)?.eigenvalues);
    if let Some(path) = &a.lower_csv {
        write_csv(path, &low)?;
    }
    if a.k < x.d() {
        let up = upper_walk(&x, a.k)?;
        let (eig, rows) = eigenvalue_count_table(&x, a.k)?;
        out["upper_eigenvalues"] = json!(eig);
        out["count_table"] = json!(rows);
        out["count_table_pass"] = json!(rows.iter().all(|r| r.observed <= r.bound));
        if let Some(path) = &a.upper_csv {
            write_csv(path, &up)?;
        }
    } else if a.upper_csv.is_some() {
        return Err(Error::input_at("upper-csv", "the upper walk needs k < d").into());
    }
    out["oracle_calls"] = json!(mu.oracle_calls());
    write_json(&a.out, &out)
}

fn suite(a: &SuiteArgs) -> Outcome {
    let runs = match a.level {
        Level::Desk => 200,
        Level::Quick => 20,
    };
    let opts = SuiteOptions { runs, seed: a.seed, workers: a.workers };
    let ids: Vec<u32> = if a.only.is_empty() { CRITERIA.to_vec() } else { a.only.clone() };
    let mut outcomes = Vec::new();
    for id in ids {
        let o = run_criterion(id, &opts);
        eprintln!("{}", o.line());
        outcomes.push(o);
    }
    if let Some(out) = &a.out {
        write_json(out, &outcomes)?;
    }
    if outcomes.iter().all(|o| o.pass) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Sample(a) => sample(&a),
        Command::CountBases(a) => {
            let m = load_matroid(&a.matroid)?;
            estimate(&a.est, |c| counting::count_bases(&m, c))
        }
        Command::CountIndep { common, k } => {
            let m = load_matroid(&common.matroid)?;
            estimate(&common.est, |c| counting::count_independent_sets(&m, k, c))
        }
        Command::Reliability { common, p } => {
            let m = load_matroid(&common.matroid)?;
            estimate(&common.est, |c| counting::reliability(&m, p, c))
        }
        Command::Cluster { common, p, q } => {
            let m = load_matroid(&common.matroid)?;
            estimate(&common.est, |c| counting::cluster_partition(&m, p, q, c))
        }
        Command::Tutte { common, x, y } => {
            let m = load_matroid(&common.matroid)?;
            estimate(&common.est, |c| counting::tutte_eval(&m, x, y, c))
        }
        Command::DppZ { dist, est } => {
            let mu = load_dist(&dist)?;
            match &mu {
                HomogeneousDistribution::DppAlpha { kernel, k, alpha } => {
                    estimate(&est, |c| counting::dpp_partition(kernel, *k, *alpha, c))
                }
                _ => estimate(&est, |c| counting::estimate_partition(&mu, c)),
            }
        }
        Command::Verify(a) => verify(&a),
        Command::Spectrum(a) => spectrum_command(&a),
        Command::Suite(a) => suite(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Input { .. } | Error::State(_) => 2,
                Error::Resource(_) => 3,
                Error::Numeric(_) => 1,
            })
        }
    }
}
