//! Command-line arguments. Everything except `--threads` is echoed into the
//! output JSON, so the echo never depends on the worker count.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "panelbounds",
    version,
    about = "Bounds, identified sets and set inference for marginal effects in discrete panels"
)]
pub struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Within estimator, Chamberlain's average slope and optionally the FE-MLE limit.
    Estimate(EstimateArgs),
    /// Nonparametric bounds on the average marginal effect.
    Bounds(BoundsArgs),
    /// Minimum-distance identified set and LP effect bounds.
    Setid(SetidArgs),
    /// Confidence regions and intervals.
    Infer(InferArgs),
    /// Draw a seeded panel (or exact cells) from a built-in design.
    Simulate(SimulateArgs),
    /// Plot-ready CSV tables.
    Figures(FiguresArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logit,
    Probit,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QueryArgs {
    /// Regressor value after the change (comma separated for vectors).
    #[arg(long, default_value = "1", value_parser = parse_ints)]
    pub x_tilde: IntList,
    /// Regressor value before the change.
    #[arg(long, default_value = "0", value_parser = parse_ints)]
    pub x_bar: IntList,
    /// Normalizing distance; required for vector regressors, |x~ - x_| otherwise.
    #[arg(long)]
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub beta_max: f64,
    /// Slope grid step; its reciprocal must be an integer.
    #[arg(long, default_value_t = 0.01)]
    pub beta_step: f64,
    /// Ridge penalty (default 1/(n ln n)).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Membership slack (default ln n / n).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Weighting passes of the minimum-distance step.
    #[arg(long, default_value_t = 3)]
    pub passes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsModelArg {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutcomeArgs {
    #[arg(long, value_enum, default_value_t = BoundsModelArg::Static)]
    pub model: BoundsModelArg,
    /// Lower end of the outcome support.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub blower: f64,
    /// Upper end of the outcome support.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub bupper: f64,
    /// Impose a monotone conditional mean (static model only).
    #[arg(long)]
    pub monotone: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub query: QueryArgs,
    /// Also report the FE-MLE limit under this link.
    #[arg(long, value_enum)]
    pub link: Option<Link>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CiArg {
    Normal,
    Boot,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub outcome: OutcomeArgs,
    /// Add confidence intervals for the two bounds.
    #[arg(long, value_enum)]
    pub ci: Option<CiArg>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SetidArgs {
    /// Panel CSV.
    #[arg(long, conflicts_with = "cells", required_unless_present = "cells")]
    pub data: Option<PathBuf>,
    /// Cell table JSON (as written by `simulate --exact`).
    #[arg(long)]
    pub cells: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub link: Link,
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also write `<prefix>_objective.csv` and `<prefix>_bounds.csv`.
    #[arg(long)]
    pub emit_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Modified projection.
    Mp,
    /// Perturbed bootstrap.
    Pb,
    /// Normal intervals for the nonparametric bounds.
    Normal,
    /// Bootstrap intervals for the nonparametric bounds.
    Boot,
    /// Canonical projection.
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalArg {
    EffectUpper,
    EffectLower,
    SlopeUpper,
    SlopeLower,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InferArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Link::Logit)]
    pub link: Link,
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub outcome: OutcomeArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0.01)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.02)]
    pub alpha1: f64,
    #[arg(long, default_value_t = 0.02)]
    pub alpha2: f64,
    /// Stage-one candidates for the projection methods.
    #[arg(long, default_value_t = 50_000)]
    pub draws: usize,
    /// Accepted candidate DGPs for the perturbed bootstrap.
    #[arg(long = "R", default_value_t = 100)]
    pub r: usize,
    /// Simulations per candidate DGP.
    #[arg(long, default_value_t = 200)]
    pub inner: usize,
    /// Bootstrap repetitions for `--method boot`.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = FunctionalArg::EffectUpper)]
    pub functional: FunctionalArg,
    /// Regressor history the effect functional refers to (default all x_).
    #[arg(long, value_parser = parse_ints)]
    pub history: Option<IntList>,
    /// Coefficients of the slope functional (default all ones).
    #[arg(long, value_parser = parse_floats)]
    pub coef: Option<FloatList>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dgp {
    /// Effects equal to the standardized regressor mean.
    Static,
    /// Discretized normal effects plus the standardized regressor mean.
    Ht,
    /// Stationary Markov regressor.
    Markov,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MarkovArgs {
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Effect atoms as `value:weight` pairs.
    #[arg(long, default_value = "0:1", value_parser = parse_atoms)]
    pub alpha: Atoms,
    /// Pr(X_t = 0 | previous `order` values all 0).
    #[arg(long, default_value_t = 0.7)]
    pub stay_zero: f64,
    /// Pr(X_t = 1 | previous `order` values all 1).
    #[arg(long, default_value_t = 0.7)]
    pub stay_one: f64,
    /// Pr(X_t = 1 | mixed previous values).
    #[arg(long, default_value_t = 0.5)]
    pub mixed_one: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Dgp::Ht)]
    pub dgp: Dgp,
    #[arg(long = "T", default_value_t = 2)]
    pub periods: usize,
    #[arg(long = "pX", default_value_t = 0.5)]
    pub p_x: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = Link::Logit)]
    pub link: Link,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write population cells as JSON instead of a sampled panel.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub markov: MarkovArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Relative biases of the linear estimators.
    Table1,
    /// Minimum-distance objective curves on exact cells.
    Idsets,
    /// Bound widths against panel length for a Markov regressor.
    Markov,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FiguresArgs {
    #[arg(long, value_enum)]
    pub which: Figure,
    #[arg(long = "T-list", default_value = "2,3,4,5,6", value_parser = parse_ints)]
    pub periods: IntList,
    #[arg(long = "pX-list", default_value = "0.1,0.2,0.3,0.4,0.5", value_parser = parse_floats)]
    pub p_list: FloatList,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Links for `idsets` (both when omitted).
    #[arg(long, value_enum)]
    pub link: Option<Link>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub markov: MarkovArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<i64>);

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Atoms(pub Vec<(f64, f64)>);

fn parse_ints(s: &str) -> Result<IntList, String> {
    s.split(',')
        .map(|v| v.trim().parse::<i64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()
        .map(IntList)
}

fn parse_floats(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()
        .map(FloatList)
}

fn parse_atoms(s: &str) -> Result<Atoms, String> {
    s.split(',')
        .map(|pair| {
            let (a, w) = pair.split_once(':').ok_or_else(|| format!("`{pair}` is not value:weight"))?;
            let a = a.trim().parse::<f64>().map_err(|e| format!("`{a}`: {e}"))?;
            let w = w.trim().parse::<f64>().map_err(|e| format!("`{w}`: {e}"))?;
            Ok((a, w))
        })
        .collect::<Result<_, _>>()
        .map(Atoms)
}
