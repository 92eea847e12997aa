use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use grainflow::core::evaluation::{
    paired_t_test, Approach, AttributeRef, ComparisonConfig, ComparisonPlan,
};
use grainflow::core::logistic::SolverConfig;
use grainflow::core::metrics::{auc_via_ks_area, max_ks2, roc_auc, ScoredSample};
use grainflow::core::synthgen::{self, SynthConfig};
use grainflow::core::transforms::RgtOutput;
use grainflow::pipeline::{self, Inputs};
use grainflow::{io, report, synth_config, Error, Result};

/// Granularity transforms for categorical child-table attributes, with a
/// cross-validated comparison harness.
#[derive(Debug, Parser)]
#[command(name = "grainflow", version)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "GRAINFLOW_SEED", default_value_t = 42)]
    seed: u64,
    /// Treat child rows without a decision entity as an error.
    #[arg(long, global = true)]
    strict: bool,
    /// Output style for reports printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic hierarchical dataset with known signal.
    Generate(GenerateArgs),
    /// Fit one transform and write decision-grain features.
    Transform(TransformArgs),
    /// Cross-validate a single approach.
    Evaluate(EvaluateArgs),
    /// Cross-validate several approaches and compare them with paired t-tests.
    Compare(CompareArgs),
    /// AUC_ROC and Max_KS2 of a `score,label` file.
    Metrics(MetricsArgs),
    /// Paired t-test of two numeric columns.
    Ttest(TtestArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// key=value generator config; `--seed` overrides its seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_entities: Option<usize>,
    /// Signal strength applied to every attribute.
    #[arg(long)]
    signal: Option<f64>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Decision table CSV (`entity_id,target`).
    #[arg(long)]
    decision: PathBuf,
    /// Child table as `name=path`; repeatable.
    #[arg(long = "grain", value_name = "NAME=CSV", required = true, value_parser = parse_grain)]
    grains: Vec<(String, PathBuf)>,
    /// Attribute to transform, `name` or `table.name`; repeatable.
    #[arg(long = "attr", value_name = "ATTR", required = true)]
    attrs: Vec<String>,
    /// Expert weights CSV (`attribute,category,weight`), needed for wgt.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug, Args)]
struct Tuning {
    /// Fraction of each class held out to fit RGT.
    #[arg(long, default_value_t = 0.2)]
    rgt_sample_frac: f64,
    #[arg(long, value_enum, default_value_t = OutputKind::Prob)]
    rgt_output: OutputKind,
    /// Categories seen fewer times in training fold into OTHER.
    #[arg(long, default_value_t = 1)]
    min_category_count: u64,
    /// L2 penalty of every logistic fit.
    #[arg(long, default_value_t = 1e-6)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputKind {
    Prob,
    Logit,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_parser = parse_approach)]
    approach: Approach,
    /// Features CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write `entity_id,attribute,category,frequency` here.
    #[arg(long)]
    dump_histograms: Option<PathBuf>,
    /// Directory for `<attribute>.model.csv` files of fitted RGT models.
    #[arg(long)]
    dump_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for folds; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_parser = parse_approach)]
    approach: Approach,
    #[command(flatten)]
    cv: CvArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated subset of mode,wgt,rgt.
    #[arg(long, value_delimiter = ',', value_parser = parse_approach, default_value = "rgt,wgt,mode")]
    approaches: Vec<Approach>,
    #[command(flatten)]
    cv: CvArgs,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// CSV with `score,label` header.
    #[arg(long)]
    scores: PathBuf,
}

#[derive(Debug, Args)]
struct TtestArgs {
    /// CSV with a header; the first two columns are compared unless `--columns` is given.
    #[arg(long)]
    input: PathBuf,
    /// Two column names, `a,b`, testing a - b.
    #[arg(long, value_name = "A,B", value_parser = parse_columns)]
    columns: Option<(String, String)>,
}

fn parse_grain(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), PathBuf::from(path)))
        }
        _ => Err(format!("expected NAME=CSV, got `{s}`")),
    }
}

fn parse_columns(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains(',') => {
            Ok((a.to_string(), b.to_string()))
        }
        _ => Err(format!("expected two column names `A,B`, got `{s}`")),
    }
}

fn parse_approach(s: &str) -> std::result::Result<Approach, String> {
    s.parse().map_err(|e: grainflow::core::Error| e.to_string())
}

fn config(data: &DataArgs, needs_weights: bool) -> Result<ComparisonConfig> {
    let t = &data.tuning;
    let weights = match (&data.weights, needs_weights) {
        (Some(path), _) => io::load_weights(path)?,
        (None, true) => return Err(Error::Usage("approach wgt needs --weights <csv>".into())),
        (None, false) => Default::default(),
    };
    let cfg = ComparisonConfig {
        solver: SolverConfig {
            lambda: t.lambda,
            tol: t.tol,
            max_iter: t.max_iter,
        },
        rgt_sample_frac: t.rgt_sample_frac,
        rgt_output: match t.rgt_output {
            OutputKind::Prob => RgtOutput::Probability,
            OutputKind::Logit => RgtOutput::Logit,
        },
        min_category_count: t.min_category_count,
        weights,
    };
    cfg.solver.validate()?;
    if !(cfg.rgt_sample_frac > 0.0 && cfg.rgt_sample_frac < 1.0) {
        return Err(Error::Usage(format!(
            "--rgt-sample-frac must lie in (0, 1), got {}",
            cfg.rgt_sample_frac
        )));
    }
    Ok(cfg)
}

fn load(data: &DataArgs, strict: bool) -> Result<(Inputs, Vec<AttributeRef>)> {
    let inputs = pipeline::load_inputs(&data.decision, &data.grains, strict)?;
    if let Some(first) = inputs.links.orphans.first() {
        eprintln!(
            "warning: {} child row(s) reference unknown entities (first: `{}` in `{}`); ignored",
            inputs.links.orphans.len(),
            first.entity_id,
            first.table
        );
    }
    let attrs = data
        .attrs
        .iter()
        .map(|a| pipeline::resolve_attribute(&inputs.grains, a))
        .collect::<Result<Vec<_>>>()?;
    Ok((inputs, attrs))
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => synth_config::load(path)?,
        None => SynthConfig::default(),
    };
    cfg.seed = cli.seed;
    if let Some(n) = args.n_entities {
        cfg.n_entities = n;
    }
    if let Some(s) = args.signal {
        cfg = cfg.with_signal(s);
    }
    let data = synthgen::generate(&cfg).map_err(|e| Error::Usage(e.to_string()))?;
    io::write_synth_dataset(&args.out, &data)?;
    eprintln!(
        "wrote {} entities ({} positive) and {} child table(s) to {}",
        data.decision.len(),
        data.decision.positives(),
        data.grains.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_transform(cli: &Cli, args: &TransformArgs) -> Result<()> {
    let cfg = config(&args.data, args.approach == Approach::Wgt)?;
    let (inputs, attrs) = load(&args.data, cli.strict)?;
    let out = pipeline::transform(&inputs, &attrs, args.approach, &cfg, cli.seed)?;
    for a in &out.not_regressed {
        eprintln!("note: `{a}` has two or fewer categories; encoded as mode columns");
    }
    if out.childless > 0 {
        eprintln!(
            "note: {} entity/attribute histogram(s) had no child rows; used uniform",
            out.childless
        );
    }
    if !out.discarded.is_empty() {
        eprintln!(
            "note: {} entities used to fit RGT were discarded",
            out.discarded.len()
        );
    }
    if let Some(path) = &args.dump_histograms {
        let ids: Vec<String> = inputs
            .decision
            .entities()
            .iter()
            .map(|e| e.id.clone())
            .collect();
        report::write_histograms(path, &out, &ids)?;
    }
    if let Some(dir) = &args.dump_model {
        io::create_dir(dir)?;
        for (a, t) in &out.transforms {
            report::write_model(&dir.join(format!("{}.model.csv", a.attribute)), t)?;
        }
    }
    match &args.out {
        Some(path) => report::write_features(path, &out),
        None => io::print(&report::features_csv(&out)),
    }
}

fn cross_validate(cli: &Cli, data: &DataArgs, approaches: &[Approach], cv: &CvArgs) -> Result<()> {
    let cfg = config(data, approaches.contains(&Approach::Wgt))?;
    let (inputs, attrs) = load(data, cli.strict)?;
    let plan = ComparisonPlan::new(
        &inputs.decision,
        &inputs.grains,
        &attrs,
        approaches,
        cv.folds,
        cli.seed,
        cfg,
    )?;
    if plan.childless() > 0 {
        eprintln!(
            "note: {} entity/attribute histogram(s) had no child rows; used uniform",
            plan.childless()
        );
    }
    let result = pipeline::run_comparison_parallel(&plan, cv.jobs)?;
    report::write_report(&cv.out, &result)?;
    if cli.format == Format::Table {
        io::print(&report::render_tables(&result))?;
    }
    Ok(())
}

fn cmd_metrics(cli: &Cli, args: &MetricsArgs) -> Result<()> {
    let (scores, labels) = io::load_scores(&args.scores)?;
    let sample = ScoredSample::new(scores, labels).map_err(|source| Error::Data {
        path: args.scores.clone(),
        source,
    })?;
    let rows = [
        ("auc_roc", roc_auc(&sample)),
        ("max_ks2", max_ks2(&sample)),
        ("auc_ks_area", auc_via_ks_area(&sample)),
    ];
    let text: String = match cli.format {
        Format::Csv => std::iter::once("metric,value\n".to_string())
            .chain(rows.iter().map(|(m, v)| format!("{m},{v}\n")))
            .collect(),
        Format::Table => rows
            .iter()
            .map(|(m, v)| format!("{m:<12}{v:.3}\n"))
            .collect(),
    };
    io::print(&text)
}

fn cmd_ttest(cli: &Cli, args: &TtestArgs) -> Result<()> {
    let columns = args.columns.as_ref().map(|(a, b)| (a.as_str(), b.as_str()));
    let (a_name, b_name, a, b) = io::load_paired_columns(&args.input, columns)?;
    let t = paired_t_test(&a, &b).map_err(|source| Error::Data {
        path: args.input.clone(),
        source,
    })?;
    let text = match cli.format {
        Format::Csv => format!(
            "pair,mean,sd,lim_inf,lim_sup,t,df,p\n{a_name}-{b_name},{},{},{},{},{},{},{}\n",
            t.mean, t.sd, t.lim_inf, t.lim_sup, t.t, t.df, t.p
        ),
        Format::Table => {
            let mut s = format!(
                "{:<10}{:<12}{:>9}{:>10}{:>9}{:>9}{:>8}\n",
                "", "Pair", "Mean", "Std.Dev.", "LimInf", "LimSup", "p-Val."
            );
            s.push_str(&report::ttest_row("", &format!("{a_name}-{b_name}"), &t));
            s
        }
    };
    io::print(&text)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(cli, a),
        Command::Transform(a) => cmd_transform(cli, a),
        Command::Evaluate(a) => cross_validate(cli, &a.data, &[a.approach], &a.cv),
        Command::Compare(a) => cross_validate(cli, &a.data, &a.approaches, &a.cv),
        Command::Metrics(a) => cmd_metrics(cli, a),
        Command::Ttest(a) => cmd_ttest(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("grainflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
