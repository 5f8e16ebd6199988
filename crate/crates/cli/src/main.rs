//! `fss`: rank researcher productivity over publication windows and measure
//! how sensitive the rankings are to the window length.
//!
//! Subcommands: `validate` (schema and cross-reference checks), `generate`
//! (seeded synthetic corpus), `rank` (per-sector ranking tables over a
//! scenario chain), `analyze` (adjacent-scenario comparisons, half-window
//! transitions, contiguous-window deltas, trajectory exports) and `report`
//! (human-readable rendering of an analysis report).
//!
//! Exit codes: 0 success, 2 data error, 64 usage error.

mod config;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use fss_core::corpus::{Corpus, ResearcherId, Year};
use fss_core::error::DataError;
use fss_core::io::{
    load_corpus, load_reference_publications, read_baselines_csv, save_corpus, write_baselines_csv,
    write_latent_csv, write_ranking_csv, CorpusPaths, FileFormat,
};
use fss_core::normalize::{BaselineTable, CategoryWeighting};
use fss_core::pipeline::{analyze, rank_scenarios, AnalyzeOptions, RankOptions, ScenarioRankings};
use fss_core::report::{
    build_analysis_report, ranking_file_name, write_analysis_report, write_comparisons_csv,
    write_rank_summary, write_trajectories_csv, Provenance, RankSummary, SectorSummary,
    TrajectorySelection, PERCENTILE_CONVENTION,
};
use fss_core::syngen::{generate, GeneratorConfig};
use fss_core::windows::Window;

use config::{resolve, resolve_opt, FileConfig};

const EXIT_DATA: i32 = 2;
const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(name = "fss", version, about = "Field-normalized productivity rankings and window-sensitivity analysis")]
struct Cli {
    /// Config file (JSON object or key=value lines) supplying any option;
    /// explicit flags override it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check input files and print a machine-readable validation report
    Validate(ValidateArgs),
    /// Generate a seeded synthetic corpus with a latent-truth sidecar
    Generate(GenerateArgs),
    /// Rank every eligible sector across the scenario chain
    Rank(RankArgs),
    /// Run the window-sensitivity analyses and emit reports and plot data
    Analyze(AnalyzeArgs),
    /// Render an analysis report as text tables
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Directory with researchers/publications/authorship/taxonomy files
    /// under their standard names
    #[arg(long, value_name = "DIR")]
    data_dir: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    researchers: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    publications: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    authorship: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    taxonomy: Option<PathBuf>,
    /// Input encoding: csv or json
    #[arg(long)]
    format: Option<String>,
    /// Citation-snapshot label recorded verbatim in reports
    #[arg(long, value_name = "TEXT")]
    observation_label: Option<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    inputs: InputArgs,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Output directory for the corpus files and the latent sidecar
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Output encoding: csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_sds: Option<usize>,
    #[arg(long)]
    n_udas: Option<usize>,
    #[arg(long)]
    n_universities: Option<usize>,
    #[arg(long)]
    staff_min: Option<usize>,
    #[arg(long)]
    staff_max: Option<usize>,
    #[arg(long)]
    start_year: Option<Year>,
    #[arg(long)]
    end_year: Option<Year>,
    #[arg(long)]
    latent_log_sigma: Option<f64>,
    #[arg(long)]
    pubs_per_year: Option<f64>,
    #[arg(long)]
    citation_mean: Option<f64>,
    #[arg(long)]
    citation_dispersion: Option<f64>,
    #[arg(long)]
    coauthors_mean: Option<f64>,
    #[arg(long)]
    roster_coauthor_share: Option<f64>,
    #[arg(long)]
    positional_sds_fraction: Option<f64>,
    #[arg(long)]
    multi_category_share: Option<f64>,
    #[arg(long)]
    partial_career_fraction: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Final year of every scenario window (default: latest publication year)
    #[arg(long)]
    anchor: Option<Year>,
    /// Length of the longest scenario window, in years
    #[arg(long)]
    max_length: Option<usize>,
    /// Minimum stable-staff headcount for a sector to be ranked
    #[arg(long)]
    min_members: Option<usize>,
    /// Minimum share of stable staff with a publication in the full window
    #[arg(long)]
    min_active_share: Option<f64>,
    /// Multi-category averaging: "equal" or comma-separated position weights
    #[arg(long)]
    category_weights: Option<String>,
    /// Reference publication list (publications schema) for the baselines;
    /// default is the corpus itself
    #[arg(long, value_name = "FILE")]
    reference_pubs: Option<PathBuf>,
    /// Import a previously exported baseline table instead of computing one
    #[arg(long, value_name = "FILE")]
    baselines: Option<PathBuf>,
    /// Also export the baseline table that was used
    #[arg(long)]
    export_baselines: bool,
    /// Worker threads (default: one per core)
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Label recorded for the percentile convention
    #[arg(long)]
    percentile_label: Option<String>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    rank: RankArgs,
    /// Sub-window lengths for the contiguous-delta statistics
    #[arg(long, value_name = "LIST")]
    delta_lengths: Option<String>,
    /// Class-trajectory export: "all", "none", or comma-separated ids
    #[arg(long, value_name = "SELECTION")]
    trend_researchers: Option<String>,
    /// Also write the per-(sector, window) ranking tables
    #[arg(long)]
    emit_rankings: bool,
    /// Which report families to write: "json", "csv" or "json,csv"
    #[arg(long, value_name = "LIST")]
    report_formats: Option<String>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// An analysis_report.json produced by `fss analyze`
    input: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
    /// Already reported on stdout/stderr; only the exit code remains.
    Reported(i32),
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let file_config = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(cfg) => cfg,
            Err(msg) => {
                eprintln!("error: {msg}");
                return EXIT_USAGE;
            }
        },
        None => FileConfig::empty(),
    };
    let result = match &cli.command {
        Command::Validate(args) => cmd_validate(args, &file_config),
        Command::Generate(args) => cmd_generate(args, &file_config),
        Command::Rank(args) => cmd_rank(args, &file_config),
        Command::Analyze(args) => cmd_analyze(args, &file_config),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
        Err(CliError::Reported(code)) => code,
    }
}

// ---------------------------------------------------------------------------
// Shared resolution
// ---------------------------------------------------------------------------

struct ResolvedInputs {
    paths: CorpusPaths,
    format: FileFormat,
    observation_label: String,
}

fn resolve_inputs(args: &InputArgs, cfg: &FileConfig) -> Result<ResolvedInputs, CliError> {
    let format: FileFormat = resolve(args.format.clone(), cfg, "format", "csv".to_string())
        .map_err(CliError::Usage)?
        .parse()
        .map_err(CliError::Usage)?;
    let data_dir = args
        .data_dir
        .clone()
        .or_else(|| cfg.get_string("data_dir").map(PathBuf::from));
    let defaults = data_dir.as_deref().map(|dir| CorpusPaths::in_dir(dir, format));
    let pick = |flag: &Option<PathBuf>, key: &str, default: Option<&PathBuf>| -> Option<PathBuf> {
        flag.clone()
            .or_else(|| cfg.get_string(key).map(PathBuf::from))
            .or_else(|| default.cloned())
    };
    let researchers = pick(&args.researchers, "researchers", defaults.as_ref().map(|d| &d.researchers));
    let publications = pick(&args.publications, "publications", defaults.as_ref().map(|d| &d.publications));
    let authorship = pick(&args.authorship, "authorship", defaults.as_ref().map(|d| &d.authorship));
    let taxonomy = pick(&args.taxonomy, "taxonomy", defaults.as_ref().map(|d| &d.taxonomy));
    let paths = match (researchers, publications, authorship, taxonomy) {
        (Some(researchers), Some(publications), Some(authorship), Some(taxonomy)) => {
            CorpusPaths { researchers, publications, authorship, taxonomy }
        }
        _ => {
            return Err(CliError::Usage(
                "no input files: pass --data-dir or all of --researchers, --publications, \
                 --authorship and --taxonomy"
                    .into(),
            ))
        }
    };
    let observation_label = resolve(
        args.observation_label.clone(),
        cfg,
        "observation_label",
        "unspecified".to_string(),
    )
    .map_err(CliError::Usage)?;
    Ok(ResolvedInputs { paths, format, observation_label })
}

fn digest_files(paths: &[&Path]) -> Result<String, CliError> {
    let mut hasher = Sha256::new();
    for path in paths {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn parse_category_weights(spec: &str) -> Result<CategoryWeighting<f64>, CliError> {
    if spec.trim().eq_ignore_ascii_case("equal") {
        return Ok(CategoryWeighting::Equal);
    }
    let weights: Result<Vec<f64>, _> = spec.split(',').map(|w| w.trim().parse::<f64>()).collect();
    match weights {
        Ok(weights) if !weights.is_empty() && weights.iter().all(|w| *w > 0.0) => {
            Ok(CategoryWeighting::ByPosition(weights))
        }
        _ => Err(CliError::Usage(format!(
            "--category-weights must be \"equal\" or a comma-separated list of positive numbers, got \"{spec}\""
        ))),
    }
}

fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build a {n}-thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(args: &ValidateArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let inputs = resolve_inputs(&args.inputs, cfg)?;
    match load_corpus(&inputs.paths, inputs.format, &inputs.observation_label) {
        Ok(corpus) => {
            let report = serde_json::json!({
                "status": "ok",
                "counts": {
                    "researchers": corpus.researchers().len(),
                    "publications": corpus.publications().len(),
                    "authorship": corpus.authorship().len(),
                    "sds": corpus.taxonomy().len(),
                },
                "observation_date_label": corpus.observation_date_label(),
                "issues": [],
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
            Ok(())
        }
        Err(DataError::Validation(issues)) => {
            let report = serde_json::json!({
                "status": "error",
                "issues": issues,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
            Err(CliError::Reported(EXIT_DATA))
        }
        Err(e @ DataError::Io { .. }) => Err(CliError::Data(e.to_string())),
    }
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn cmd_generate(args: &GenerateArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let defaults = GeneratorConfig::default();
    let gen_config = GeneratorConfig {
        seed: resolve(args.seed, cfg, "seed", defaults.seed).map_err(CliError::Usage)?,
        n_sds: resolve(args.n_sds, cfg, "n_sds", defaults.n_sds).map_err(CliError::Usage)?,
        n_udas: resolve(args.n_udas, cfg, "n_udas", defaults.n_udas).map_err(CliError::Usage)?,
        n_universities: resolve(args.n_universities, cfg, "n_universities", defaults.n_universities)
            .map_err(CliError::Usage)?,
        staff_per_sds: (
            resolve(args.staff_min, cfg, "staff_min", defaults.staff_per_sds.0).map_err(CliError::Usage)?,
            resolve(args.staff_max, cfg, "staff_max", defaults.staff_per_sds.1).map_err(CliError::Usage)?,
        ),
        years: {
            let start = resolve(args.start_year, cfg, "start_year", defaults.years.start())
                .map_err(CliError::Usage)?;
            let end =
                resolve(args.end_year, cfg, "end_year", defaults.years.end()).map_err(CliError::Usage)?;
            Window::new(start, end)
                .map_err(|e| CliError::Usage(format!("invalid year range: {e}")))?
        },
        latent_log_sigma: resolve(args.latent_log_sigma, cfg, "latent_log_sigma", defaults.latent_log_sigma)
            .map_err(CliError::Usage)?,
        pubs_per_year: resolve(args.pubs_per_year, cfg, "pubs_per_year", defaults.pubs_per_year)
            .map_err(CliError::Usage)?,
        citation_mean: resolve(args.citation_mean, cfg, "citation_mean", defaults.citation_mean)
            .map_err(CliError::Usage)?,
        citation_dispersion: resolve(
            args.citation_dispersion,
            cfg,
            "citation_dispersion",
            defaults.citation_dispersion,
        )
        .map_err(CliError::Usage)?,
        coauthors_mean: resolve(args.coauthors_mean, cfg, "coauthors_mean", defaults.coauthors_mean)
            .map_err(CliError::Usage)?,
        roster_coauthor_share: resolve(
            args.roster_coauthor_share,
            cfg,
            "roster_coauthor_share",
            defaults.roster_coauthor_share,
        )
        .map_err(CliError::Usage)?,
        positional_sds_fraction: resolve(
            args.positional_sds_fraction,
            cfg,
            "positional_sds_fraction",
            defaults.positional_sds_fraction,
        )
        .map_err(CliError::Usage)?,
        multi_category_share: resolve(
            args.multi_category_share,
            cfg,
            "multi_category_share",
            defaults.multi_category_share,
        )
        .map_err(CliError::Usage)?,
        partial_career_fraction: resolve(
            args.partial_career_fraction,
            cfg,
            "partial_career_fraction",
            defaults.partial_career_fraction,
        )
        .map_err(CliError::Usage)?,
        noise: resolve(args.noise, cfg, "noise", defaults.noise).map_err(CliError::Usage)?,
    };
    let format: FileFormat = resolve(args.format.clone(), cfg, "format", "csv".to_string())
        .map_err(CliError::Usage)?
        .parse()
        .map_err(CliError::Usage)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.get_string("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("synthetic_corpus"));

    let generated = generate(&gen_config).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
    save_corpus(&generated.corpus, &out, format)?;
    write_latent_csv(&generated.latent_rates, &out.join("latent_rates.csv"))?;
    let manifest = serde_json::json!({
        "generator_config": gen_config,
        "format": format,
        "counts": {
            "researchers": generated.corpus.researchers().len(),
            "publications": generated.corpus.publications().len(),
            "authorship": generated.corpus.authorship().len(),
        },
    });
    fss_core::io::write_json_report(&manifest, &out.join("generation_manifest.json"))?;
    println!(
        "generated {} researchers, {} publications into {}",
        generated.corpus.researchers().len(),
        generated.corpus.publications().len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// rank / analyze
// ---------------------------------------------------------------------------

struct PreparedRun {
    corpus: Corpus,
    baselines: BaselineTable<f64>,
    baseline_mode: String,
    rank_options: RankOptions,
    weighting: CategoryWeighting<f64>,
    threads: Option<usize>,
    out: PathBuf,
    provenance_config: serde_json::Value,
    input_digest: String,
    observation_label: String,
    percentile_label: String,
    export_baselines: bool,
}

fn prepare_run(args: &RankArgs, cfg: &FileConfig, command: &str) -> Result<PreparedRun, CliError> {
    let inputs = resolve_inputs(&args.inputs, cfg)?;
    let corpus = load_corpus(&inputs.paths, inputs.format, &inputs.observation_label)?;

    let anchor = match resolve_opt(args.anchor, cfg, "anchor").map_err(CliError::Usage)? {
        Some(anchor) => anchor,
        None => corpus
            .publications()
            .iter()
            .map(|p| p.year)
            .max()
            .ok_or_else(|| CliError::Data("corpus has no publications to anchor a window on".into()))?,
    };
    let max_length = resolve(args.max_length, cfg, "max_length", 6).map_err(CliError::Usage)?;
    if max_length == 0 {
        return Err(CliError::Usage("--max-length must be at least 1".into()));
    }
    let min_members = resolve(args.min_members, cfg, "min_members", 10).map_err(CliError::Usage)?;
    let min_active_share =
        resolve(args.min_active_share, cfg, "min_active_share", 0.5).map_err(CliError::Usage)?;
    if !(0.0..=1.0).contains(&min_active_share) {
        return Err(CliError::Usage("--min-active-share must lie in [0, 1]".into()));
    }
    let weights_spec =
        resolve(args.category_weights.clone(), cfg, "category_weights", "equal".to_string())
            .map_err(CliError::Usage)?;
    let weighting = parse_category_weights(&weights_spec)?;
    let threads = resolve_opt(args.threads, cfg, "threads").map_err(CliError::Usage)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.get_string("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fss-out"));
    let percentile_label =
        resolve(args.percentile_label.clone(), cfg, "percentile_label", PERCENTILE_CONVENTION.to_string())
            .map_err(CliError::Usage)?;
    let reference_pubs = args
        .reference_pubs
        .clone()
        .or_else(|| cfg.get_string("reference_pubs").map(PathBuf::from));
    let baseline_import =
        args.baselines.clone().or_else(|| cfg.get_string("baselines").map(PathBuf::from));
    let export_baselines = args.export_baselines || cfg.get_string("export_baselines").as_deref() == Some("true");

    let (baselines, baseline_mode) = match (&baseline_import, &reference_pubs) {
        (Some(path), _) => (read_baselines_csv(path)?, format!("imported:{}", path.display())),
        (None, Some(path)) => {
            let reference = load_reference_publications(path, inputs.format)?;
            (BaselineTable::build(&reference), format!("reference-file:{}", path.display()))
        }
        (None, None) => (BaselineTable::from_corpus(&corpus), "corpus".to_string()),
    };

    let mut digest_paths: Vec<&Path> = inputs.paths.all().to_vec();
    if let Some(p) = &reference_pubs {
        digest_paths.push(p);
    }
    if let Some(p) = &baseline_import {
        digest_paths.push(p);
    }
    let input_digest = digest_files(&digest_paths)?;

    let provenance_config = serde_json::json!({
        "command": command,
        "inputs": inputs.paths,
        "format": inputs.format,
        "anchor": anchor,
        "max_length": max_length,
        "min_members": min_members,
        "min_active_share": min_active_share,
        "category_weights": weights_spec,
        "reference_pubs": reference_pubs.as_ref().map(|p| p.display().to_string()),
        "baselines_import": baseline_import.as_ref().map(|p| p.display().to_string()),
        "out": out.display().to_string(),
        "observation_label": inputs.observation_label,
        "percentile_convention": percentile_label,
    });

    Ok(PreparedRun {
        corpus,
        baselines,
        baseline_mode,
        rank_options: RankOptions {
            anchor_end: anchor,
            max_length,
            min_members,
            min_active_share,
            category_weighting: weighting.clone(),
        },
        weighting,
        threads,
        out,
        provenance_config,
        input_digest,
        observation_label: inputs.observation_label,
        percentile_label,
        export_baselines,
    })
}

impl PreparedRun {
    fn provenance(&self) -> Provenance {
        Provenance {
            run_config: self.provenance_config.clone(),
            input_digest: Some(self.input_digest.clone()),
            observation_date_label: self.observation_label.clone(),
            baseline_mode: self.baseline_mode.clone(),
            percentile_convention: self.percentile_label.clone(),
        }
    }
}

fn write_rankings(rankings: &ScenarioRankings, out: &Path) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    for tables in &rankings.tables {
        for (sds, table) in tables {
            let name = ranking_file_name(sds, table.window);
            write_ranking_csv(table, &out.join(&name))?;
            files.push(name);
        }
    }
    files.sort();
    Ok(files)
}

fn cmd_rank(args: &RankArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let run = prepare_run(args, cfg, "rank")?;
    std::fs::create_dir_all(&run.out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", run.out.display())))?;

    let rankings = with_pool(run.threads, || {
        rank_scenarios(&run.corpus, &run.baselines, &run.rank_options)
    })?
    .map_err(|e| CliError::Data(e.to_string()))?;

    let mut files = write_rankings(&rankings, &run.out)?;
    if run.export_baselines {
        write_baselines_csv(&run.baselines, &run.out.join("baselines.csv"))?;
        files.push("baselines.csv".into());
        files.sort();
    }
    let summary = RankSummary {
        provenance: run.provenance(),
        full_window: rankings.full_window,
        scenarios: rankings.scenarios.clone(),
        eligible_sds: rankings
            .populations
            .iter()
            .map(|(sds, members)| SectorSummary { sds_id: sds.clone(), population: members.len() })
            .collect(),
        undefined_baseline_pubs: rankings.undefined_baseline_pubs,
        files,
        diagnostics: rankings.diagnostics.clone(),
    };
    write_rank_summary(&summary, &run.out.join("rank_summary.json"))?;
    if rankings.eligible_sds.is_empty() {
        eprintln!("warning: no eligible sector; see rank_summary.json");
    }
    println!(
        "ranked {} sector(s) over {} scenario(s) into {}",
        rankings.eligible_sds.len(),
        rankings.scenarios.len(),
        run.out.display()
    );
    Ok(())
}

fn parse_trajectory_selection(spec: &str) -> Result<TrajectorySelection, CliError> {
    match spec.trim() {
        "all" => Ok(TrajectorySelection::All),
        "none" => Ok(TrajectorySelection::None),
        ids => {
            let set: BTreeSet<ResearcherId> =
                ids.split(',').map(str::trim).filter(|s| !s.is_empty()).map(ResearcherId::from).collect();
            if set.is_empty() {
                return Err(CliError::Usage(
                    "--trend-researchers must be \"all\", \"none\" or a comma-separated id list".into(),
                ));
            }
            Ok(TrajectorySelection::Researchers(set))
        }
    }
}

fn cmd_analyze(args: &AnalyzeArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let run = prepare_run(&args.rank, cfg, "analyze")?;
    let delta_spec = resolve(args.delta_lengths.clone(), cfg, "delta_lengths", "1,2,3".to_string())
        .map_err(CliError::Usage)?;
    let delta_lengths: Vec<usize> = delta_spec
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--delta-lengths: cannot parse \"{delta_spec}\"")))?;
    let trend_spec = resolve(args.trend_researchers.clone(), cfg, "trend_researchers", "all".to_string())
        .map_err(CliError::Usage)?;
    let selection = parse_trajectory_selection(&trend_spec)?;
    let formats_spec = resolve(args.report_formats.clone(), cfg, "report_formats", "json,csv".to_string())
        .map_err(CliError::Usage)?;
    let formats: BTreeSet<String> =
        formats_spec.split(',').map(|s| s.trim().to_ascii_lowercase()).collect();
    for format in &formats {
        if format != "json" && format != "csv" {
            return Err(CliError::Usage(format!("--report-formats: unknown format \"{format}\"")));
        }
    }
    let emit_rankings =
        args.emit_rankings || cfg.get_string("emit_rankings").as_deref() == Some("true");

    std::fs::create_dir_all(&run.out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", run.out.display())))?;

    let analyze_options = AnalyzeOptions { delta_lengths: delta_lengths.clone() };
    let (rankings, outputs) = with_pool(run.threads, || {
        rank_scenarios(&run.corpus, &run.baselines, &run.rank_options).and_then(|rankings| {
            analyze(&run.corpus, &run.baselines, &rankings, &analyze_options, &run.weighting)
                .map(|outputs| (rankings, outputs))
        })
    })?
    .map_err(|e| CliError::Data(e.to_string()))?;

    let mut provenance_config = run.provenance_config.clone();
    if let serde_json::Value::Object(map) = &mut provenance_config {
        map.insert("delta_lengths".into(), serde_json::json!(delta_lengths));
        map.insert("trend_researchers".into(), serde_json::json!(trend_spec));
        map.insert("report_formats".into(), serde_json::json!(formats_spec));
    }
    let provenance = Provenance { run_config: provenance_config, ..run.provenance() };

    if formats.contains("json") {
        let report = build_analysis_report(provenance, &rankings, &outputs);
        write_analysis_report(&report, &run.out.join("analysis_report.json"))?;
    }
    if formats.contains("csv") {
        write_comparisons_csv(&outputs.comparisons, &run.out.join("adjacent_comparisons.csv"))?;
        write_trajectories_csv(
            &run.corpus,
            &rankings,
            &outputs,
            &selection,
            &run.out.join("class_trajectories.csv"),
        )?;
    }
    if emit_rankings {
        write_rankings(&rankings, &run.out)?;
    }
    if run.export_baselines {
        write_baselines_csv(&run.baselines, &run.out.join("baselines.csv"))?;
    }
    if rankings.eligible_sds.is_empty() {
        eprintln!("warning: no eligible sector; the report sections are empty");
    }
    println!(
        "analyzed {} scenario(s) over {} sector(s) into {}",
        rankings.scenarios.len(),
        rankings.eligible_sds.len(),
        run.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn opt_num(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::Null => "undefined".into(),
        serde_json::Value::Number(n) => format!("{:.3}", n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

fn window_label(value: &serde_json::Value) -> String {
    let start = value.get("start").and_then(|v| v.as_i64()).unwrap_or(0);
    let end = value.get("end").and_then(|v| v.as_i64()).unwrap_or(0);
    if start == end {
        format!("{start}")
    } else {
        format!("{start}-{end}")
    }
}

fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", args.input.display())))?;
    let report: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{} is not a valid report: {e}", args.input.display())))?;

    println!("full window : {}", report.get("full_window").map(window_label).unwrap_or_default());
    if let Some(scenarios) = report.get("scenarios").and_then(|v| v.as_array()) {
        let labels: Vec<String> = scenarios.iter().map(window_label).collect();
        println!("scenarios   : {}", labels.join(", "));
    }
    if let Some(provenance) = report.get("provenance") {
        if let Some(label) = provenance.get("observation_date_label").and_then(|v| v.as_str()) {
            println!("observation : {label}");
        }
        if let Some(mode) = provenance.get("baseline_mode").and_then(|v| v.as_str()) {
            println!("baselines   : {mode}");
        }
        if let Some(digest) = provenance.get("input_digest").and_then(|v| v.as_str()) {
            println!("inputs      : sha256:{digest}");
        }
    }

    println!("\n== adjacent-scenario comparisons ==");
    let chain = report.get("comparison_chain");
    match chain.and_then(|c| c.get("applicable")).and_then(|v| v.as_bool()) {
        Some(true) => {
            let excluded = chain
                .and_then(|c| c.get("excluded_always_inactive"))
                .and_then(|v| v.as_u64())
                .unwrap_or(0);
            println!("(excluding {excluded} researcher(s) inactive in every scenario)");
            println!("{:<25}{:<12}{:>8}{:>14}{:>12}", "pair", "group", "n", "mean|dClass|", "spearman");
            if let Some(pairs) = chain.and_then(|c| c.get("pairs")).and_then(|v| v.as_array()) {
                for pair in pairs {
                    let label = format!(
                        "{} vs {}",
                        pair.get("window_a").map(window_label).unwrap_or_default(),
                        pair.get("window_b").map(window_label).unwrap_or_default()
                    );
                    let mut groups: Vec<(String, &serde_json::Value)> = Vec::new();
                    if let Some(per_uda) = pair.get("per_uda").and_then(|v| v.as_object()) {
                        for (uda, stats) in per_uda {
                            groups.push((uda.clone(), stats));
                        }
                    }
                    if let Some(overall) = pair.get("overall") {
                        groups.push(("ALL".into(), overall));
                    }
                    for (group, stats) in groups {
                        println!(
                            "{label:<25}{group:<12}{:>8}{:>14}{:>12}",
                            stats.get("n_compared").and_then(|v| v.as_u64()).unwrap_or(0),
                            stats.get("mean_abs_class_diff").map(opt_num).unwrap_or_default(),
                            stats.get("spearman_rho").map(opt_num).unwrap_or_default(),
                        );
                    }
                }
            }
        }
        _ => println!(
            "{}",
            chain
                .and_then(|c| c.get("reason"))
                .and_then(|v| v.as_str())
                .unwrap_or("not applicable")
        ),
    }

    println!("\n== half-window transitions ==");
    let transitions = report.get("transitions");
    match transitions.and_then(|t| t.get("report")).filter(|v| !v.is_null()) {
        Some(body) => {
            println!(
                "{} vs {} against {}",
                body.get("window_first").map(window_label).unwrap_or_default(),
                body.get("window_second").map(window_label).unwrap_or_default(),
                body.get("window_full").map(window_label).unwrap_or_default()
            );
            println!("{:<12}{:>8}{:>14}{:>14}{:>10}", "group", "n", "decreasing%", "increasing%", "total%");
            let mut groups: Vec<(String, &serde_json::Value)> = Vec::new();
            if let Some(per_uda) = body.get("per_uda").and_then(|v| v.as_object()) {
                for (uda, stats) in per_uda {
                    groups.push((uda.clone(), stats));
                }
            }
            if let Some(overall) = body.get("overall") {
                groups.push(("ALL".into(), overall));
            }
            for (group, stats) in groups {
                println!(
                    "{group:<12}{:>8}{:>14}{:>14}{:>10}",
                    stats.get("n_compared").and_then(|v| v.as_u64()).unwrap_or(0),
                    stats.get("decreasing_pct").map(opt_num).unwrap_or_default(),
                    stats.get("increasing_pct").map(opt_num).unwrap_or_default(),
                    stats.get("total_pct").map(opt_num).unwrap_or_default(),
                );
            }
        }
        None => println!(
            "{}",
            transitions
                .and_then(|t| t.get("reason"))
                .and_then(|v| v.as_str())
                .unwrap_or("not applicable")
        ),
    }

    println!("\n== contiguous-window deltas ==");
    if let Some(body) = report.get("deltas").and_then(|d| d.get("report")) {
        let lengths: Vec<u64> = body
            .get("lengths")
            .and_then(|v| v.as_array())
            .map(|a| a.iter().filter_map(|v| v.as_u64()).collect())
            .unwrap_or_default();
        let header: Vec<String> = lengths.iter().map(|l| format!("delta_{l}")).collect();
        println!("{:<12}{}", "group", header.iter().map(|h| format!("{h:>12}")).collect::<String>());
        let mut groups: Vec<(String, &serde_json::Value)> = Vec::new();
        if let Some(per_uda) = body.get("per_uda").and_then(|v| v.as_object()) {
            for (uda, stats) in per_uda {
                groups.push((uda.clone(), stats));
            }
        }
        if let Some(overall) = body.get("overall") {
            groups.push(("ALL".into(), overall));
        }
        for (group, stats) in groups {
            let cells: String = stats
                .as_array()
                .map(|entries| {
                    entries
                        .iter()
                        .map(|e| {
                            format!(
                                "{:>12}",
                                e.get("mean_abs_class_change").map(opt_num).unwrap_or_default()
                            )
                        })
                        .collect()
                })
                .unwrap_or_default();
            println!("{group:<12}{cells}");
        }
    }
    Ok(())
}
