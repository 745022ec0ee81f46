use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use panelrel::ingest::{
    adjudicate_answer, build_matrix, parse_questions, parse_raw_responses, parse_responses, parse_severity,
    write_questions, write_responses,
};
use panelrel::model::{AnalysisConfig, ResponseRecord, TokenizerMode, ValidationReport};
use panelrel::pipeline::run_analysis;
use panelrel::report::{emit_all_svg, emit_analysis, emit_svg, read_analysis, Chart};
use panelrel::simulator::{simulate_panel, SimConfig};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (prng: splitmix64)");

#[derive(Parser)]
#[command(name = "panelrel", version = VERSION, about = "Collective reliability analysis of multi-model answer panels")]
struct Cli {
    /// Worker threads for per-question and bootstrap work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis and write analysis.json, CSV tables and charts.
    Analyze(AnalyzeArgs),
    /// Extract the final stated option from free-text responses.
    Adjudicate(AdjudicateArgs),
    /// Generate a synthetic panel dataset.
    Simulate(SimulateArgs),
    /// Re-render charts from an existing analysis.json.
    Report(ReportArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    questions: PathBuf,
    #[arg(long)]
    responses: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Severity ratings CSV.
    #[arg(long)]
    severity: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    /// Robustness bin edges as LOW,HIGH.
    #[arg(long, default_value = "0.4,0.8", value_parser = parse_bins)]
    bins: (f64, f64),
    #[arg(long, default_value_t = 0.8)]
    anomaly_m: f64,
    #[arg(long, default_value_t = 0.4)]
    anomaly_r: f64,
    /// Largest non-zero pair count for the exact Wilcoxon distribution.
    #[arg(long, default_value_t = 25)]
    exact_cutoff: usize,
    #[arg(long, value_enum, default_value_t = Tokenizer::ExternalCounts)]
    tokenizer: Tokenizer,
    /// Treat completeness warnings as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tokenizer {
    ExternalCounts,
    WhitespaceDefault,
}

#[derive(Args)]
struct AdjudicateArgs {
    #[arg(long)]
    questions: PathBuf,
    /// Raw responses JSON Lines file.
    #[arg(long)]
    raw: PathBuf,
    /// Responses file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulator configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for questions.jsonl and responses.jsonl.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    analysis: PathBuf,
    /// Output directory for the charts.
    #[arg(long)]
    out: PathBuf,
    /// Render only these charts.
    #[arg(long = "chart")]
    charts: Vec<Chart>,
}

fn parse_bins(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LOW,HIGH")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(lo)?, num(hi)?))
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<panelrel::Error> for Failure {
    fn from(e: panelrel::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.jobs {
        Some(0) => Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Data(e.to_string())),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Analyze(args) => analyze(args),
        Command::Adjudicate(args) => adjudicate(args),
        Command::Simulate(args) => simulate(args),
        Command::Report(args) => report(args),
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))
}

fn print_violations(report: &ValidationReport) {
    for v in &report.violations {
        let kind = format!("{:?}", v.kind).to_lowercase();
        eprintln!("{kind}: {}: {}", v.location, v.message);
    }
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let config = AnalysisConfig {
        bootstrap_reps: args.bootstrap,
        rng_seed: args.seed,
        robustness_bin_edges: args.bins,
        anomaly_thresholds: (args.anomaly_m, args.anomaly_r),
        wilcoxon_exact_cutoff: args.exact_cutoff,
        tokenizer_mode: match args.tokenizer {
            Tokenizer::ExternalCounts => TokenizerMode::ExternalCounts,
            Tokenizer::WhitespaceDefault => TokenizerMode::WhitespaceDefault,
        },
        ..AnalysisConfig::default()
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let questions = parse_questions(&args.questions)?;
    let responses = parse_responses(&args.responses, &questions)?;
    let severity = args
        .severity
        .as_ref()
        .map(|p| parse_severity(p, &questions))
        .transpose()?;
    let (dataset, validation) = build_matrix(questions, responses, None)?;
    print_violations(&validation);
    let (errors, warnings) = (validation.error_count(), validation.warning_count());
    if errors > 0 {
        return Err(Failure::Data(format!("{errors} validation error(s)")));
    }
    if args.strict && warnings > 0 {
        return Err(Failure::Data(format!(
            "{warnings} completeness warning(s) under --strict"
        )));
    }

    let bundle = run_analysis(&dataset, &validation, severity.as_deref(), &config)?;
    create_dir(&args.out)?;
    let written = emit_analysis(&bundle, &args.out)?;
    let (charts, skipped) = emit_all_svg(&bundle, args.out.join("charts"))?;
    for name in skipped {
        eprintln!("note: chart {name} skipped, nothing to plot");
    }
    println!(
        "analyzed {} questions x {} models; {} anomalies; wrote {} files to {}",
        dataset.questions().len(),
        dataset.models().len(),
        bundle.anomalies.len(),
        written.len() + charts.len(),
        args.out.display()
    );
    Ok(())
}

fn adjudicate(args: AdjudicateArgs) -> Result<(), Failure> {
    let questions = parse_questions(&args.questions)?;
    let raw = parse_raw_responses(&args.raw)?;
    if raw.is_empty() {
        return Err(panelrel::Error::EmptyInput.into());
    }
    let mut records = Vec::with_capacity(raw.len());
    for r in raw {
        let spec = questions
            .get(&r.question_id)
            .ok_or_else(|| panelrel::Error::UnknownQuestion(r.question_id.clone()))?;
        let answer = adjudicate_answer(&r, spec);
        let mut rec = ResponseRecord::new(r.question_id, r.model_id, r.condition, answer);
        rec.raw_text = Some(r.raw_text);
        records.push(rec);
    }
    let abstain = records.iter().filter(|r| r.answer.is_abstain()).count();
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_responses(&args.out, &records)?;
    println!("adjudicated {} responses, {} ABSTAIN", records.len(), abstain);
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut config = SimConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let dataset = simulate_panel(&config)?;
    create_dir(&args.out)?;
    write_questions(args.out.join("questions.jsonl"), dataset.questions().values())?;
    write_responses(args.out.join("responses.jsonl"), dataset.responses())?;
    println!(
        "simulated {} questions x {} models x 2 conditions into {}",
        dataset.questions().len(),
        dataset.models().len(),
        args.out.display()
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<(), Failure> {
    let bundle = read_analysis(&args.analysis)?;
    create_dir(&args.out)?;
    if args.charts.is_empty() {
        let (written, skipped) = emit_all_svg(&bundle, &args.out)?;
        for name in skipped {
            eprintln!("note: chart {name} skipped, nothing to plot");
        }
        println!("wrote {} charts to {}", written.len(), args.out.display());
    } else {
        for chart in &args.charts {
            emit_svg(&bundle, *chart, args.out.join(format!("{}.svg", chart.as_str())))?;
        }
        println!("wrote {} charts to {}", args.charts.len(), args.out.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn version_names_prng() {
        assert!(VERSION.ends_with(&format!("(prng: {})", panelrel::stats::rng::PRNG_ID)));
    }

    #[test]
    fn bins_parse() {
        assert_eq!(parse_bins("0.3, 0.7"), Ok((0.3, 0.7)));
        assert!(parse_bins("0.3").is_err());
        assert!(parse_bins("a,b").is_err());
    }
}
