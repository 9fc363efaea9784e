//! Command-line front end: dataset synthesis, fitting, and evaluation.
//!
//! Three subcommands cover the full pipeline: `synth` generates (and
//! optionally censors) datasets, `fit` estimates a model or model set,
//! `eval` scores a model against a labeled test set and can emit plot
//! data. Runs are deterministic: the seed is explicit, every output file
//! embeds `{tool version, seed, input digests}`, and rerunning a command
//! with identical inputs reproduces identical bytes.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::dataset::{CensorMode, CollapseStrategy, CsvSchema, Dataset, LabelColumn};
use crate::envelope::{
    fit_imprecise, fit_imprecise_bruteforce, predict_interval, BruteForceLimits, ImpreciseOptions,
    ModelSet,
};
use crate::error::{Error, Result};
use crate::eval::{
    classify, interval_confusion, prediction_only_auc, roc, roc3d, roc_band, ternary_confusion,
    uncertainty_stats,DecisionRule,
};
use crate::interval::{Interval, UncertainLabel};
use crate::logistic::{fit_mle, Coefficients, FitOptions};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "ilr",
    version,
    about = "Logistic regression under interval features and unknown labels",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset, optionally intervalized and
    /// label-censored.
    Synth(SynthArgs),
    /// Fit a model (or model set) to a dataset CSV.
    Fit(FitArgs),
    /// Evaluate a fitted model against a labeled test CSV.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of rows to generate.
    #[arg(long)]
    n: usize,
    /// RNG seed; the run is a pure function of the flags and this seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ground-truth coefficients, comma-separated, intercept first.
    #[arg(long, allow_hyphen_values = true)]
    truth_beta: String,
    /// Feature sampling range as "lo,hi".
    #[arg(long, default_value = "0,10", allow_hyphen_values = true)]
    x_range: String,
    /// Interval-censoring pattern applied to the features.
    #[arg(long, value_enum, default_value_t = IntervalizeArg::None)]
    intervalize: IntervalizeArg,
    /// Censoring half-width; required by every mode except `none`.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Boundary for the `split` mode: censoring flips direction there.
    #[arg(long, allow_hyphen_values = true)]
    split_point: Option<f64>,
    /// Replace the labels of the K rows nearest the ground-truth decision
    /// boundary with "?".
    #[arg(long, value_name = "K", default_value_t = 0)]
    censor_labels: usize,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Read key=value defaults for these flags from a file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV to fit.
    #[arg(long)]
    data: PathBuf,
    /// How to treat uncertainty in the data.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Seed echoed into the output (fitting itself is deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ridge penalty on non-intercept coefficients.
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Hard cap on Newton iterations per fit.
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Refinement budget per coefficient extremization (imprecise mode).
    #[arg(long, default_value_t = 500)]
    refine_budget: usize,
    /// Name of the label column in the CSV.
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Read key=value defaults for these flags from a file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model JSON produced by `fit` (single model or model set).
    #[arg(long)]
    model: PathBuf,
    /// Labeled test CSV with precise features.
    #[arg(long)]
    test: PathBuf,
    /// Decision threshold C, strictly inside (0, 1).
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    threshold: f64,
    /// Decision rule applied to interval probabilities.
    #[arg(long, value_enum, default_value_t = RuleArg::Abstain)]
    rule: RuleArg,
    /// Seed for the scatter-plot jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Name of the label column in the test CSV.
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Output report JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Directory for plot CSVs (roc, roc_band, roc3d, scatter).
    #[arg(long)]
    plot_data: Option<PathBuf>,
    /// Read key=value defaults for these flags from a file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IntervalizeArg {
    None,
    Symmetric,
    Left,
    Right,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Precise,
    Midpoint,
    DropUncertain,
    Imprecise,
    BruteForce,
}

impl ModeArg {
    fn as_str(self) -> &'static str {
        match self {
            ModeArg::Precise => "precise",
            ModeArg::Midpoint => "midpoint",
            ModeArg::DropUncertain => "drop-uncertain",
            ModeArg::Imprecise => "imprecise",
            ModeArg::BruteForce => "brute-force",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Abstain,
    UpperBound,
    LowerBound,
}

impl RuleArg {
    fn as_str(self) -> &'static str {
        match self {
            RuleArg::Abstain => "abstain",
            RuleArg::UpperBound => "upper-bound",
            RuleArg::LowerBound => "lower-bound",
        }
    }
}

impl From<RuleArg> for DecisionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Abstain => DecisionRule::Abstain,
            RuleArg::UpperBound => DecisionRule::UpperBound,
            RuleArg::LowerBound => DecisionRule::LowerBound,
        }
    }
}

/// Parse argv and execute; returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Cmd::Synth(args) => cmd_synth(&args),
        Cmd::Fit(args) => cmd_fit(&args),
        Cmd::Eval(args) => cmd_eval(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Splice `key = value` lines from a `--config` file into argv as
/// `--key value` pairs, right after the subcommand so explicit flags take
/// precedence (the parser lets later occurrences override earlier ones).
fn expand_config(mut argv: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (i, tok) in argv.iter().enumerate() {
        if tok == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
            break;
        }
        if let Some(v) = tok.strip_prefix("--config=") {
            path = Some(PathBuf::from(v));
            break;
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path)?;
    let mut extra = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidArgument(format!(
                "config line {}: expected key=value, got {line:?}",
                lineno + 1
            )));
        };
        extra.push(format!("--{}", key.trim()));
        extra.push(value.trim().to_string());
    }
    let at = argv
        .iter()
        .position(|t| matches!(t.as_str(), "synth" | "fit" | "eval"))
        .map(|p| p + 1)
        .unwrap_or(argv.len());
    argv.splice(at..at, extra);
    Ok(argv)
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("cannot parse {t:?} as a number")))
        })
        .collect()
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let truth = Coefficients::new(parse_floats(&args.truth_beta)?)?;
    let range = parse_floats(&args.x_range)?;
    if range.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "--x-range expects \"lo,hi\", got {:?}",
            args.x_range
        )));
    }
    let x_range = Interval::new(range[0], range[1])?;

    match args.intervalize {
        IntervalizeArg::None => {
            if args.epsilon.is_some() {
                return Err(Error::InvalidArgument(
                    "--epsilon requires an --intervalize mode".to_string(),
                ));
            }
            if args.split_point.is_some() {
                return Err(Error::InvalidArgument(
                    "--split-point requires --intervalize split".to_string(),
                ));
            }
        }
        IntervalizeArg::Split => {
            if args.epsilon.is_none() {
                return Err(Error::InvalidArgument(
                    "--intervalize requires --epsilon".to_string(),
                ));
            }
            if args.split_point.is_none() {
                return Err(Error::MissingSplitPoint);
            }
        }
        _ => {
            if args.epsilon.is_none() {
                return Err(Error::InvalidArgument(
                    "--intervalize requires --epsilon".to_string(),
                ));
            }
            if args.split_point.is_some() {
                return Err(Error::InvalidArgument(
                    "--split-point requires --intervalize split".to_string(),
                ));
            }
        }
    }

    let mut data = Dataset::synthesize(args.n, args.seed, &truth, x_range);

    if args.censor_labels > 0 {
        if args.censor_labels > data.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot censor {} labels out of {} rows",
                args.censor_labels,
                data.len()
            )));
        }
        let xs = data.precise_features()?;
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&i, &j| {
            truth
                .score(&xs[i])
                .abs()
                .total_cmp(&truth.score(&xs[j]).abs())
                .then(i.cmp(&j))
        });
        data = data.censor_labels(&order[..args.censor_labels])?;
    }

    let mode = match args.intervalize {
        IntervalizeArg::None => None,
        IntervalizeArg::Symmetric => Some(CensorMode::Symmetric),
        IntervalizeArg::Left => Some(CensorMode::LeftBiased),
        IntervalizeArg::Right => Some(CensorMode::RightBiased),
        IntervalizeArg::Split => Some(CensorMode::SplitBiased {
            split: args.split_point.unwrap(),
        }),
    };
    if let Some(mode) = mode {
        // A fresh generator from the same seed would replay the draws that
        // produced the features; offset it so the streams are distinct.
        data = data.intervalize(mode, args.epsilon.unwrap(), args.seed.wrapping_add(1))?;
    }

    let mut meta = vec![
        kv("tool_version", TOOL_VERSION),
        kv("command", "synth"),
        kv("seed", args.seed),
        kv("n", args.n),
        kv("truth_beta", parse_floats(&args.truth_beta)?.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
        kv("x_range", format!("{},{}", x_range.lo(), x_range.hi())),
    ];
    if let Some(mode) = args.intervalize.to_possible_value() {
        if args.intervalize != IntervalizeArg::None {
            meta.push(kv("intervalize", mode.get_name()));
            meta.push(kv("epsilon", args.epsilon.unwrap()));
        }
    }
    if let Some(split) = args.split_point {
        meta.push(kv("split_point", split));
    }
    if args.censor_labels > 0 {
        meta.push(kv("censor_labels", args.censor_labels));
    }

    let file = fs::File::create(&args.out)?;
    data.save_csv(file, &meta)?;
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let schema = CsvSchema {
        label: LabelColumn::Name(args.label_column.clone()),
    };
    let data = Dataset::load_csv(fs::File::open(&args.data)?, &schema)?;
    let data_digest = file_digest(&args.data)?;
    let fit_opts = FitOptions {
        ridge: args.ridge,
        max_iterations: args.max_iterations,
        ..FitOptions::default()
    };

    let mut out = serde_json::json!({
        "tool_version": TOOL_VERSION,
        "command": "fit",
        "mode": args.mode.as_str(),
        "seed": args.seed,
        "data_digest": data_digest,
        "feature_names": data.feature_names(),
    });

    match args.mode {
        ModeArg::Precise | ModeArg::Midpoint | ModeArg::DropUncertain => {
            let train = match args.mode {
                ModeArg::Precise => {
                    let mut rows = data.uncertain_feature_rows();
                    rows.extend(data.unknown_label_rows());
                    rows.sort_unstable();
                    rows.dedup();
                    if !rows.is_empty() {
                        return Err(Error::UncertainInput {
                            rows,
                            context: "mode 'precise' requires a fully certain dataset"
                                .to_string(),
                        });
                    }
                    data
                }
                ModeArg::Midpoint => data.collapse(CollapseStrategy::Midpoint)?,
                _ => data.collapse(CollapseStrategy::DropUncertain)?,
            };
            let model = fit_mle(&train, &fit_opts)?;
            if !model.report.converged && !model.report.separation_detected {
                return Err(Error::NotConverged {
                    iterations: model.report.iterations,
                    gradient_norm: model.report.gradient_norm,
                });
            }
            out["beta"] = serde_json::to_value(model.coefficients.as_slice())?;
            out["report"] = serde_json::to_value(&model.report)?;
        }
        ModeArg::Imprecise => {
            let opts = ImpreciseOptions {
                refine_budget: args.refine_budget,
                fit: fit_opts,
                ..ImpreciseOptions::default()
            };
            let ms = fit_imprecise(&data, &opts)?;
            out["model_set"] = serde_json::to_value(&ms)?;
        }
        ModeArg::BruteForce => {
            if args.ridge != 0.0 {
                return Err(Error::InvalidArgument(
                    "--ridge is not supported in brute-force mode".to_string(),
                ));
            }
            let ms = fit_imprecise_bruteforce(&data, &BruteForceLimits::default())?;
            out["model_set"] = serde_json::to_value(&ms)?;
        }
    }

    fs::write(&args.out, format!("{out:#}\n"))?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let model_text = fs::read_to_string(&args.model)?;
    let model_value: serde_json::Value = serde_json::from_str(&model_text)?;
    let model_digest = file_digest(&args.model)?;
    let ms: ModelSet = if let Some(sub) = model_value.get("model_set") {
        serde_json::from_value(sub.clone())?
    } else if model_value.get("models").is_some() {
        serde_json::from_value(model_value.clone())?
    } else if let Some(beta) = model_value.get("beta") {
        let beta: Vec<f64> = serde_json::from_value(beta.clone())?;
        ModelSet::single(Coefficients::new(beta)?, model_digest.clone())
    } else {
        return Err(Error::InvalidArgument(
            "model file has neither \"beta\" nor \"models\"/\"model_set\"".to_string(),
        ));
    };

    let schema = CsvSchema {
        label: LabelColumn::Name(args.label_column.clone()),
    };
    let test = Dataset::load_csv(fs::File::open(&args.test)?, &schema)?;
    let test_digest = file_digest(&args.test)?;
    if ms.dimension() != test.dimension() {
        return Err(Error::DimensionMismatch {
            expected: ms.dimension(),
            got: test.dimension(),
        });
    }
    let feature_rows = test.uncertain_feature_rows();
    if !feature_rows.is_empty() {
        return Err(Error::UncertainInput {
            rows: feature_rows,
            context: "evaluation requires precise test features".to_string(),
        });
    }

    let rule: DecisionRule = args.rule.into();
    let predictions: Vec<Interval> = test
        .points()
        .iter()
        .map(|p| predict_interval(&ms, &p.features))
        .collect::<Result<_>>()?;
    let decisions = predictions
        .iter()
        .map(|&p| classify(p, args.threshold, rule))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<UncertainLabel> = test.points().iter().map(|p| p.label).collect();
    let ternary = ternary_confusion(&decisions, &truth)?;
    let stats = uncertainty_stats(&ternary);
    let ic = interval_confusion(&ms, &test, args.threshold)?;

    let band = roc_band(&ms, &test)?;
    let trace = roc3d(&ms, &test)?;
    let mid_scores: Vec<f64> = predictions.iter().map(|p| p.midpoint()).collect();
    let truth_bools: Vec<bool> = test.known_labels()?.iter().map(|&y| y == 1.0).collect();
    let mid_curve = roc(&mid_scores, &truth_bools)?;

    let mut report = serde_json::json!({
        "tool_version": TOOL_VERSION,
        "command": "eval",
        "seed": args.seed,
        "model_digest": model_digest,
        "test_digest": test_digest,
        "threshold": args.threshold,
        "rule": args.rule.as_str(),
        "n_models": ms.len(),
        "confusion_ternary": ternary,
        "confusion_interval": ic,
        "stats": stats,
    });
    if ms.len() == 1 {
        report["auc"] = serde_json::to_value(crate::eval::auc(&mid_curve))?;
    } else {
        report["auc_interval"] = serde_json::to_value([band.auc.lo(), band.auc.hi()])?;
        report["auc_prediction_only"] = serde_json::to_value(prediction_only_auc(&trace))?;
    }
    fs::write(&args.out, format!("{report:#}\n"))?;

    if let Some(dir) = &args.plot_data {
        fs::create_dir_all(dir)?;
        let meta = [
            format!("# tool_version: {TOOL_VERSION}"),
            format!("# seed: {}", args.seed),
            format!("# model_digest: {model_digest}"),
            format!("# test_digest: {test_digest}"),
        ];

        let rows = mid_curve
            .points
            .iter()
            .map(|p| format!("{},{},{}", p.threshold, p.fpr, p.sensitivity))
            .collect::<Vec<_>>();
        write_plot_csv(&dir.join("roc.csv"), &meta, "C,fpr,s", &rows)?;

        let rows = band
            .points
            .iter()
            .map(|p| format!("{},{},{}", p.fpr, p.s_lo, p.s_hi))
            .collect::<Vec<_>>();
        write_plot_csv(&dir.join("roc_band.csv"), &meta, "fpr,s_lo,s_hi", &rows)?;

        let rows = trace
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{},{}",
                    p.threshold,
                    fmt_opt(p.s_prime),
                    fmt_opt(p.fpr_prime),
                    fmt_opt(p.sigma),
                    fmt_opt(p.tau)
                )
            })
            .collect::<Vec<_>>();
        write_plot_csv(
            &dir.join("roc3d.csv"),
            &meta,
            "C,s_prime,fpr_prime,sigma,tau",
            &rows,
        )?;

        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let rows = predictions
            .iter()
            .zip(&truth_bools)
            .map(|(p, &y)| {
                let jitter = rng.gen::<f64>() * 0.1 - 0.05;
                let y = if y { 1.0 } else { 0.0 };
                format!("{},{},{},{}", p.lo(), p.hi(), y, y + jitter)
            })
            .collect::<Vec<_>>();
        write_plot_csv(&dir.join("scatter.csv"), &meta, "p_lo,p_hi,y,y_jittered", &rows)?;
    }
    Ok(())
}

/// `NA` marks an undefined statistic; it must never collapse to 0 or 1.
fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => "NA".to_string(),
    }
}

fn write_plot_csv(path: &Path, meta: &[String], header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::new();
    for line in meta {
        text.push_str(line);
        text.push('\n');
    }
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}
