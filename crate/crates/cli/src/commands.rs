//! Subcommand definitions and their implementations.

use crate::model_file::{Expansion, ModelFile, Training, FORMAT_VERSION};
use crate::table::{
    format_value, load_curves, render_csv, write_atomic, CurveTable, TableResponse,
};
use crate::usage;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use funcboost::{
    cross_validate, expand_curves, kfold, Algorithm, BasisSystem, BoostConfig, BoostedModel,
    FunctionalDataSet, LearnerSpec, OutputKind, ResampleMode, Response,
};
use nalgebra::DVector;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "funcboost", version, about = "Boosting for functional data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand sampled curves into basis coefficients.
    Expand(ExpandArgs),
    /// Train a boosted model and save it as JSON.
    Fit(FitArgs),
    /// Evaluate a saved model on sampled curves.
    Predict(PredictArgs),
    /// Cross-validated error curve over boosting iterations.
    Cv(CvArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisChoice {
    Fourier,
    Bspline,
    Poly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoChoice {
    Adaboost,
    L2boost,
    Logitboost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerChoice {
    Stump,
    Componentwise,
    Penalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Reweight,
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputChoice {
    Score,
    Label,
    Prob,
}

#[derive(Debug, Clone, Args)]
pub struct BasisArgs {
    /// Basis family for the curve expansion.
    #[arg(long, value_enum, default_value = "fourier")]
    pub basis: BasisChoice,
    /// Number of basis functions.
    #[arg(long, default_value_t = 100)]
    pub nbasis: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub basis: BasisArgs,
    /// Roughness penalty weight for the expansion.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Derivative order of the roughness penalty.
    #[arg(long, default_value_t = 2)]
    pub penalty_order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub basis: BasisArgs,
    #[arg(long, value_enum, default_value = "logitboost")]
    pub algo: AlgoChoice,
    #[arg(long, value_enum, default_value = "stump")]
    pub learner: LearnerChoice,
    /// Penalty weight of the penalized learner.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Derivative order of the penalized learner's penalty.
    #[arg(long, default_value_t = 2)]
    pub penalty_order: usize,
    /// Degrees of freedom for the penalized learner; chooses its lambda.
    #[arg(long)]
    pub df_target: Option<f64>,
    /// AdaBoost sampling mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    /// L2Boost step length in (0, 1].
    #[arg(long)]
    pub shrinkage: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Roughness penalty weight used when expanding the input curves.
    #[arg(long, default_value_t = 0.0)]
    pub expand_lambda: f64,
    /// Derivative order of the expansion penalty.
    #[arg(long, default_value_t = 2)]
    pub expand_penalty_order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of boosting iterations.
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Use only the first m stages.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value = "score")]
    pub output_kind: OutputChoice,
}

#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Error curve CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Largest number of boosting iterations evaluated.
    #[arg(long, default_value_t = 200)]
    pub mmax: usize,
    #[command(flatten)]
    pub train: TrainArgs,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Expand(args) => expand(&args),
        Command::Fit(args) => fit(&args),
        Command::Predict(args) => predict(&args),
        Command::Cv(args) => cv(&args),
    }
}

fn build_basis(args: &BasisArgs, grid: &[f64]) -> Result<BasisSystem<f64>> {
    let (a, b) = (grid[0], grid[grid.len() - 1]);
    let basis = match args.basis {
        BasisChoice::Fourier => BasisSystem::fourier(args.nbasis, a, b),
        BasisChoice::Bspline => BasisSystem::bspline_uniform(args.nbasis, 3, a, b),
        BasisChoice::Poly => BasisSystem::polynomial(args.nbasis, a, b),
    };
    basis.with_context(|| {
        format!(
            "cannot build a {}-function basis on [{a}, {b}]",
            args.nbasis
        )
    })
}

fn expand_table(
    table: &CurveTable,
    basis: &BasisSystem<f64>,
    lambda: f64,
    order: usize,
) -> Result<nalgebra::DMatrix<f64>> {
    expand_curves(&table.grid, &table.values, basis, lambda, order).with_context(|| {
        format!(
            "cannot expand {} curves sampled at {} points in {} basis functions",
            table.len(),
            table.grid.len(),
            basis.len()
        )
    })
}

fn expand(args: &ExpandArgs) -> Result<()> {
    if args.lambda < 0.0 {
        return Err(usage("--lambda must be non-negative"));
    }
    let table = load_curves(&args.input)?;
    let basis = build_basis(&args.basis, &table.grid)?;
    let coefs = expand_table(&table, &basis, args.lambda, args.penalty_order)?;
    let mut header: Vec<String> = (1..=basis.len()).map(|l| format!("c{l}")).collect();
    let responses = match &table.response {
        Some(TableResponse::Labels(v)) => {
            header.push("label".into());
            Some(v)
        }
        Some(TableResponse::Scalar(v)) => {
            header.push("y".into());
            Some(v)
        }
        None => None,
    };
    let rows = (0..coefs.nrows()).map(|i| {
        let mut row: Vec<String> = coefs.row(i).iter().map(|&v| format_value(v)).collect();
        if let Some(r) = responses {
            row.push(format_value(r[i]));
        }
        row
    });
    write_atomic(&args.out, &render_csv(&header, rows)?)?;
    println!(
        "expanded {} curves into {} coefficients each",
        coefs.nrows(),
        coefs.ncols()
    );
    Ok(())
}

impl AlgoChoice {
    fn algorithm(self) -> Algorithm {
        match self {
            AlgoChoice::Adaboost => Algorithm::AdaBoost,
            AlgoChoice::L2boost => Algorithm::L2Boost,
            AlgoChoice::Logitboost => Algorithm::LogitBoost,
        }
    }
}

/// Turns training flags into a configuration, rejecting flag combinations
/// that would be silently ignored.
fn config(args: &TrainArgs, iterations: usize) -> Result<BoostConfig<f64>> {
    let algorithm = args.algo.algorithm();
    let learner = match args.learner {
        LearnerChoice::Stump => LearnerSpec::stump(),
        LearnerChoice::Componentwise => LearnerSpec::Componentwise,
        LearnerChoice::Penalized => {
            if args.lambda.is_some() && args.df_target.is_some() {
                return Err(usage("--lambda and --df-target are mutually exclusive"));
            }
            LearnerSpec::Penalized {
                lambda: args.lambda.unwrap_or(1.0),
                penalty_order: args.penalty_order,
                df_target: args.df_target,
            }
        }
    };
    if args.learner != LearnerChoice::Penalized
        && (args.lambda.is_some() || args.df_target.is_some())
    {
        return Err(usage(
            "--lambda and --df-target apply only to --learner penalized",
        ));
    }
    if args.mode.is_some() && algorithm != Algorithm::AdaBoost {
        return Err(usage("--mode applies only to --algo adaboost"));
    }
    if args.shrinkage.is_some() && algorithm != Algorithm::L2Boost {
        return Err(usage("--shrinkage applies only to --algo l2boost"));
    }
    if iterations == 0 {
        return Err(usage("the number of iterations must be at least 1"));
    }
    let shrinkage = args.shrinkage.unwrap_or(1.0);
    if !(shrinkage > 0.0 && shrinkage <= 1.0) {
        return Err(usage("--shrinkage must lie in (0, 1]"));
    }
    if args.expand_lambda < 0.0 {
        return Err(usage("--expand-lambda must be non-negative"));
    }
    learner.validate().map_err(|e| usage(e.to_string()))?;
    let mode = match args.mode {
        Some(ModeChoice::Resample) => ResampleMode::Resample,
        _ => ResampleMode::Reweight,
    };
    Ok(BoostConfig::new(algorithm, learner, iterations)
        .with_shrinkage(shrinkage)
        .with_mode(mode)
        .with_seed(args.seed))
}

fn training_set(
    args: &TrainArgs,
    table: &CurveTable,
    algorithm: Algorithm,
) -> Result<(Expansion, FunctionalDataSet<f64>)> {
    let response = match (&table.response, algorithm.is_classifier()) {
        (Some(TableResponse::Labels(y)), true) => Response::Labels(DVector::from_vec(y.clone())),
        (Some(TableResponse::Scalar(y)), false) => Response::Scalar(DVector::from_vec(y.clone())),
        (_, true) => bail!("{:?} needs a `label` column with -1/+1 values", algorithm),
        (_, false) => bail!("{:?} needs a `y` response column", algorithm),
    };
    let basis = build_basis(&args.basis, &table.grid)?;
    let coefs = expand_table(table, &basis, args.expand_lambda, args.expand_penalty_order)?;
    let dataset = FunctionalDataSet::new(basis.clone(), coefs, response)?;
    let expansion = Expansion {
        basis,
        lambda: args.expand_lambda,
        penalty_order: args.expand_penalty_order,
    };
    Ok((expansion, dataset))
}

fn fit(args: &FitArgs) -> Result<()> {
    let cfg = config(&args.train, args.m)?;
    let table = load_curves(&args.input)?;
    let (expansion, dataset) = training_set(&args.train, &table, cfg.algorithm)?;
    let model = BoostedModel::fit(&dataset, &cfg).context("training failed")?;
    let file = ModelFile {
        version: FORMAT_VERSION,
        expansion,
        training: Training {
            algorithm: cfg.algorithm,
            learner: cfg.learner.clone(),
            iterations: cfg.iterations,
            shrinkage: cfg.shrinkage,
            mode: cfg.mode,
            seed: cfg.seed,
            samples: dataset.len(),
        },
        model,
    };
    write_atomic(&args.out, file.to_json()?.as_bytes())?;
    println!(
        "trained {:?} with {} of {} stages on {} curves",
        cfg.algorithm,
        file.model.len(),
        cfg.iterations,
        dataset.len()
    );
    Ok(())
}

fn predict(args: &PredictArgs) -> Result<()> {
    let file = ModelFile::load(&args.model)?;
    let (output, column) = match args.output_kind {
        OutputChoice::Score => (OutputKind::Score, "score"),
        OutputChoice::Label => (OutputKind::Label, "label"),
        OutputChoice::Prob => (OutputKind::Probability, "probability"),
    };
    if output == OutputKind::Probability && file.model.algorithm() != Algorithm::LogitBoost {
        return Err(usage("--output-kind prob needs a LogitBoost model"));
    }
    if output == OutputKind::Label && !file.model.algorithm().is_classifier() {
        return Err(usage("--output-kind label needs a classification model"));
    }
    if let Some(m) = args.m {
        if m == 0 || m > file.model.len() {
            return Err(usage(format!(
                "--m must lie in 1..={} for this model",
                file.model.len()
            )));
        }
    }
    let table = load_curves(&args.input)?;
    let e = &file.expansion;
    let coefs = expand_table(&table, &e.basis, e.lambda, e.penalty_order)
        .context("model/data basis mismatch")?;
    let values = file.model.predict_coefs(&coefs, args.m, output)?;
    let rows = values.iter().map(|&v| {
        vec![match output {
            OutputKind::Label => format!("{}", v as i64),
            _ => format_value(v),
        }]
    });
    write_atomic(&args.out, &render_csv(&[column.to_string()], rows)?)?;
    println!("wrote {} predictions", values.len());
    Ok(())
}

fn cv(args: &CvArgs) -> Result<()> {
    let cfg = config(&args.train, args.mmax)?;
    let table = load_curves(&args.input)?;
    if args.folds < 2 || args.folds > table.len() {
        return Err(usage(format!(
            "--folds must lie in 2..={} for this data set",
            table.len()
        )));
    }
    let (_, dataset) = training_set(&args.train, &table, cfg.algorithm)?;
    let labels = match dataset.response() {
        Response::Labels(y) => Some(y.as_slice()),
        _ => None,
    };
    let folds = kfold(dataset.len(), args.folds, args.train.seed, labels)?;
    let curve = cross_validate(&cfg, &dataset, &folds, args.mmax)?;
    let rows = curve
        .values()
        .iter()
        .enumerate()
        .map(|(m, &e)| vec![(m + 1).to_string(), format_value(e)]);
    write_atomic(
        &args.out,
        &render_csv(&["m".to_string(), "error".to_string()], rows)?,
    )?;
    println!(
        "m_opt={} error={}",
        curve.m_opt(),
        format_value(curve.min_value())
    );
    Ok(())
}
