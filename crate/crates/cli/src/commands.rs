//! Subcommand implementations. Each returns the `result` object of the
//! output JSON; [`run`] wraps it with the format version and config echo.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use panelbounds_core::choice::{LikelihoodKernel, LinkFunction};
use panelbounds_core::inference::{
    modified_projection, np_bounds_ci, perturbed_bootstrap, BootstrapPlan, CiMethod, Functional, ProjectionConfig,
};
use panelbounds_core::linear_fe::{chamberlain_estimator, within_estimator};
use panelbounds_core::npbounds::{
    dynamic_bounds, static_bounds_from_data, BoundsEstimate, BoundsMasses, BoundsModel, OutcomeBounds, Sign,
};
use panelbounds_core::panel::{
    cell_frequencies, enumerate_support, CellProbabilities, EffectQuery, PanelDataset, SupportIndex,
};
use panelbounds_core::setid::{
    effect_bounds, estimate_identified_set, femle, scalar_beta_grid, GridConfig, MixingDistribution,
};
use panelbounds_core::simlab::{markov_bound_decay, table1_surface, AlphaSpec, MarkovDgp, StaticDgp};
use panelbounds_core::Error;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::io::{read_panel, write_panel, CellsFile, CsvError};

pub const FORMAT_VERSION: &str = "1";
pub const SEED_ENV: &str = "PANELBOUNDS_SEED";

/// Largest slope grid the CLI will build.
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: CsvError },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Model(#[from] Error),
}

impl CliError {
    /// 3 for solver failures, 2 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_solver_failure() => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// Output document for one command.
pub fn run(command: &Command) -> Result<Value> {
    let seed = resolve_seed(match command {
        Command::Bounds(a) => a.seed,
        Command::Infer(a) => a.seed,
        Command::Simulate(a) => a.seed,
        _ => None,
    })?;
    let (name, result) = match command {
        Command::Estimate(a) => ("estimate", estimate(a)?),
        Command::Bounds(a) => ("bounds", bounds(a, seed)?),
        Command::Setid(a) => ("setid", setid(a)?),
        Command::Infer(a) => ("infer", infer(a, seed)?),
        Command::Simulate(a) => ("simulate", simulate(a, seed)?),
        Command::Figures(a) => ("figures", figures(a)?),
    };
    let mut config = match serde_json::to_value(command).expect("arguments serialize") {
        Value::Object(mut m) => m.remove(name).unwrap_or(Value::Null),
        other => other,
    };
    if let Value::Object(m) = &mut config {
        if m.contains_key("seed") {
            m.insert("seed".into(), json!(seed));
        }
    }
    Ok(json!({
        "format_version": FORMAT_VERSION,
        "command": name,
        "config": config,
        "result": result,
    }))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| invalid(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn load_panel(path: &Path) -> Result<PanelDataset> {
    let file = File::open(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    read_panel(file).map_err(|source| CliError::Csv { path: path.into(), source })
}

fn load_cells(path: &Path) -> Result<(SupportIndex, CellProbabilities)> {
    let file = File::open(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let parsed: CellsFile = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|source| CliError::Json { path: path.into(), source })?;
    Ok(parsed.into_parts()?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.into(), source })
}

fn link_of(l: Link) -> LinkFunction {
    match l {
        Link::Logit => LinkFunction::Logit,
        Link::Probit => LinkFunction::Probit,
    }
}

fn query_of(a: &QueryArgs, dim: usize) -> Result<EffectQuery> {
    if a.x_tilde.0.len() != dim || a.x_bar.0.len() != dim {
        return Err(invalid(format!("--x-tilde and --x-bar need {dim} value(s) each")));
    }
    let distance = match a.distance {
        Some(d) => d,
        None if dim == 1 => (a.x_tilde.0[0] - a.x_bar.0[0]).abs() as f64,
        None => return Err(invalid("--distance is required for vector regressors")),
    };
    Ok(EffectQuery::new(a.x_tilde.0.clone(), a.x_bar.0.clone(), distance)?)
}

fn grid_of(a: &GridArgs, dim: usize) -> Result<GridConfig> {
    if !(a.beta_step > 0.0) || !(a.beta_min <= a.beta_max) {
        return Err(invalid("slope grid needs --beta-step > 0 and --beta-min <= --beta-max"));
    }
    let denom = (1.0 / a.beta_step).round();
    if (denom * a.beta_step - 1.0).abs() > 1e-9 {
        return Err(invalid("--beta-step must be the reciprocal of an integer"));
    }
    let lo = (a.beta_min * denom).round() as i64;
    let hi = (a.beta_max * denom).round() as i64;
    let axis = scalar_beta_grid(lo, hi, denom);
    let points = axis.len().checked_pow(dim as u32).filter(|&p| p <= MAX_GRID_POINTS);
    if points.is_none() {
        return Err(invalid("slope grid too large"));
    }
    let mut beta_grid = vec![Vec::new()];
    for _ in 0..dim {
        beta_grid =
            beta_grid.into_iter().flat_map(|b| axis.iter().map(move |v| [b.clone(), v.clone()].concat())).collect();
    }
    let grid = GridConfig {
        beta_grid,
        lambda: a.lambda,
        epsilon: a.epsilon,
        weight_iterations: a.passes,
        ..GridConfig::default()
    };
    grid.validate()?;
    Ok(grid)
}

fn outcome_bounds(a: &OutcomeArgs) -> Result<(OutcomeBounds, BoundsModel)> {
    let b = OutcomeBounds::new(a.blower, a.bupper)?;
    let model = match a.model {
        BoundsModelArg::Static => BoundsModel::Static { monotone: a.monotone },
        BoundsModelArg::Dynamic if a.monotone => return Err(invalid("--monotone applies to the static model only")),
        BoundsModelArg::Dynamic => BoundsModel::Dynamic,
    };
    Ok((b, model))
}

fn beta_json(b: &[f64]) -> Value {
    if b.len() == 1 {
        json!(b[0])
    } else {
        json!(b)
    }
}

fn interval_json(v: Option<(f64, f64)>) -> Value {
    match v {
        Some((l, u)) => json!([l, u]),
        None => Value::Null,
    }
}

fn error_json(e: Error) -> Value {
    json!({ "error": e.to_string() })
}

fn estimate(a: &EstimateArgs) -> Result<Value> {
    let data = load_panel(&a.data)?;
    let q = query_of(&a.query, data.dim())?;
    let within = match within_estimator(&data) {
        Ok(v) => json!(v),
        Err(e) => error_json(e),
    };
    let slope = match chamberlain_estimator(&data, &q) {
        Ok(s) => json!({
            "estimate": s.estimate,
            "identified_units": s.identified_units,
            "identified_share": s.identified_share,
        }),
        Err(e) => error_json(e),
    };
    let mut out = Map::new();
    out.insert("n".into(), json!(data.n()));
    out.insert("periods".into(), json!(data.periods()));
    out.insert("within".into(), within);
    out.insert("average_slope".into(), slope);
    if let Some(link) = a.link {
        let index = enumerate_support(&data, true)?;
        let cells = cell_frequencies(&data, &index)?;
        let kernel = LikelihoodKernel::new(link_of(link), index.clone())?;
        let grid = grid_of(&a.grid, data.dim())?;
        let f = femle(&kernel, &cells, &grid.beta_grid, &q)?;
        let effects: Vec<Value> = (0..index.k())
            .filter(|&k| cells.present[k])
            .map(|k| json!({ "history": index.history(k), "mass": cells.p_x[k], "effect": f.effects[k] }))
            .collect();
        out.insert(
            "femle".into(),
            json!({
                "beta": beta_json(&f.beta_tilde),
                "mu_identified": f.mu_identified,
                "log_likelihood": f.objective,
                "effects": effects,
            }),
        );
    }
    Ok(Value::Object(out))
}

fn bounds_json(index: Option<&SupportIndex>, est: &BoundsEstimate) -> Value {
    let masses = match est.masses {
        BoundsMasses::Static { p0, only_tilde, only_bar } => {
            json!({ "p0": p0, "only_tilde": only_tilde, "only_bar": only_bar })
        }
        BoundsMasses::Dynamic { never_tilde, never_bar } => {
            json!({ "never_tilde": never_tilde, "never_bar": never_bar })
        }
    };
    let sign = est.monotone_sign.map(|s| match s {
        Sign::Positive => "positive",
        Sign::Negative => "negative",
    });
    let per_history: Vec<Value> = match index {
        Some(idx) => est
            .per_history
            .iter()
            .enumerate()
            .filter_map(|(k, b)| b.map(|(l, u)| json!({ "history": idx.history(k), "lower": l, "upper": u })))
            .collect(),
        None => Vec::new(),
    };
    json!({
        "mu_lower": est.mu_lower,
        "mu_upper": est.mu_upper,
        "width": est.width(),
        "identified_component": est.identified_component,
        "masses": masses,
        "monotone_sign": sign,
        "per_history": per_history,
    })
}

fn bounds(a: &BoundsArgs, seed: u64) -> Result<Value> {
    let data = load_panel(&a.data)?;
    let q = query_of(&a.query, data.dim())?;
    let (b, model) = outcome_bounds(&a.outcome)?;
    let index = enumerate_support(&data, false)?;
    let est = match model {
        BoundsModel::Static { monotone } => static_bounds_from_data(&data, &index, &q, b, monotone)?,
        BoundsModel::Dynamic => dynamic_bounds(&data, &q, b)?,
    };
    let mut out = bounds_json(matches!(model, BoundsModel::Static { .. }).then_some(&index), &est);
    if let Some(ci) = a.ci {
        let method = match ci {
            CiArg::Normal => CiMethod::Normal,
            CiArg::Boot => CiMethod::Bootstrap { reps: a.reps, seed },
        };
        let c = np_bounds_ci(&data, &index, &q, b, model, a.level, method)?;
        out["ci"] = ci_json(&c);
    }
    Ok(out)
}

fn ci_json(c: &panelbounds_core::inference::BoundsCi) -> Value {
    json!({
        "lower": [c.lower.0, c.lower.1],
        "upper": [c.upper.0, c.upper.1],
        "outer": [c.outer().0, c.outer().1],
        "se": c.se.map(|(l, u)| json!([l, u])),
    })
}

fn cells_for(data: Option<&PathBuf>, cells: Option<&PathBuf>) -> Result<(SupportIndex, CellProbabilities)> {
    match (data, cells) {
        (Some(d), None) => {
            let data = load_panel(d)?;
            let index = enumerate_support(&data, true)?;
            let cells = cell_frequencies(&data, &index)?;
            Ok((index, cells))
        }
        (None, Some(c)) => load_cells(c),
        _ => Err(invalid("give exactly one of --data and --cells")),
    }
}

fn setid(a: &SetidArgs) -> Result<Value> {
    let (index, cells) = cells_for(a.data.as_ref(), a.cells.as_ref())?;
    let q = query_of(&a.query, index.dim())?;
    let grid = grid_of(&a.grid, index.dim())?;
    let kernel = LikelihoodKernel::new(link_of(a.link), index.clone())?;
    let set = estimate_identified_set(&kernel, &cells, &grid)?;
    let eb = effect_bounds(&kernel, &cells, &set, &q, &grid)?;
    let projected = set.projected(&cells, set.argmin);
    let per_history: Vec<Value> = (0..index.k())
        .map(|k| {
            json!({
                "history": index.history(k),
                "mass": cells.p_x[k],
                "bounds": interval_json(eb.per_history[k]),
            })
        })
        .collect();
    if let Some(prefix) = &a.emit_csv {
        write_setid_csv(prefix, &index, &set, &eb.per_history)?;
    }
    Ok(json!({
        "link": link_of(a.link).name(),
        "n": if cells.is_population() { Value::Null } else { json!(cells.n_eff) },
        "lambda": set.lambda,
        "epsilon": set.epsilon,
        "beta_grid": set.beta_grid.iter().map(|b| beta_json(b)).collect::<Vec<_>>(),
        "objective": set.objective,
        "members": set.member_betas().map(beta_json).collect::<Vec<_>>(),
        "argmin": beta_json(&set.beta_grid[set.argmin]),
        "min_objective": set.min_objective(),
        "near_tie": set.near_tie,
        "contiguous": set.is_contiguous(),
        "effect_bounds": {
            "aggregate": [eb.aggregate.0, eb.aggregate.1],
            "per_history": per_history,
        },
        "projected": projected.p_y,
        "outcomes": index.outcomes(),
    }))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Csv { path: path.into(), source: e.into() }
}

fn write_setid_csv(
    prefix: &Path,
    index: &SupportIndex,
    set: &panelbounds_core::setid::IdentifiedSet,
    per_history: &[Option<(f64, f64)>],
) -> Result<()> {
    let path = with_suffix(prefix, "_objective.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    let dim = set.beta_grid[0].len();
    let mut header: Vec<String> =
        if dim == 1 { vec!["beta".into()] } else { (1..=dim).map(|d| format!("beta{d}")).collect() };
    header.extend(["objective".into(), "member".into()]);
    w.write_record(&header).map_err(csv_err(&path))?;
    for (b, beta) in set.beta_grid.iter().enumerate() {
        let mut rec: Vec<String> = beta.iter().map(|v| v.to_string()).collect();
        rec.push(set.objective[b].to_string());
        rec.push((set.members.contains(&b) as u8).to_string());
        w.write_record(&rec).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;

    let path = with_suffix(prefix, "_bounds.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["k", "history", "lower", "upper"]).map_err(csv_err(&path))?;
    for (k, b) in per_history.iter().enumerate() {
        if let Some((l, u)) = b {
            let h: Vec<String> = index.history(k).iter().map(|v| v.to_string()).collect();
            w.write_record([k.to_string(), h.join(" "), l.to_string(), u.to_string()]).map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(|source| CliError::Io { path, source })?;
    Ok(())
}

fn infer(a: &InferArgs, seed: u64) -> Result<Value> {
    let data = load_panel(&a.data)?;
    let q = query_of(&a.query, data.dim())?;
    match a.method {
        Method::Normal | Method::Boot => {
            let (b, model) = outcome_bounds(&a.outcome)?;
            let index = enumerate_support(&data, false)?;
            let method =
                if a.method == Method::Normal { CiMethod::Normal } else { CiMethod::Bootstrap { reps: a.reps, seed } };
            let c = np_bounds_ci(&data, &index, &q, b, model, a.level, method)?;
            let mut out = ci_json(&c);
            out["mu_lower"] = json!(c.mu_lower);
            out["mu_upper"] = json!(c.mu_upper);
            Ok(out)
        }
        Method::Mp | Method::Canonical => {
            let index = enumerate_support(&data, true)?;
            let cells = cell_frequencies(&data, &index)?;
            let kernel = LikelihoodKernel::new(link_of(a.link), index.clone())?;
            let grid = grid_of(&a.grid, data.dim())?;
            let config = ProjectionConfig {
                level: a.level,
                draws: a.draws,
                seed,
                histories: None,
                canonical: a.method == Method::Canonical,
            };
            match modified_projection(&kernel, &cells, data.n() as f64, &q, &grid, &config) {
                Ok(r) => {
                    let per_history: Vec<Value> = (0..index.k())
                        .map(|k| json!({ "history": index.history(k), "interval": interval_json(r.per_history[k]) }))
                        .collect();
                    Ok(json!({
                        "empty": false,
                        "beta_region": r.beta_members.iter().map(|&b| beta_json(&grid.beta_grid[b])).collect::<Vec<_>>(),
                        "aggregate": [r.aggregate.0, r.aggregate.1],
                        "per_history": per_history,
                        "accepted": r.accepted,
                        "draws": r.draws,
                        "critical": r.critical,
                        "min_statistic": r.min_statistic,
                    }))
                }
                Err(Error::EmptyRegion { min_statistic }) => Ok(json!({
                    "empty": true,
                    "accepted": 0,
                    "draws": a.draws,
                    "min_statistic": min_statistic,
                })),
                Err(e) => Err(e.into()),
            }
        }
        Method::Pb => {
            let index = enumerate_support(&data, true)?;
            let cells = cell_frequencies(&data, &index)?;
            let kernel = LikelihoodKernel::new(link_of(a.link), index.clone())?;
            let grid = grid_of(&a.grid, data.dim())?;
            let functional = match a.functional {
                FunctionalArg::EffectUpper | FunctionalArg::EffectLower => {
                    let h = match &a.history {
                        Some(h) => h.0.clone(),
                        None => q.x_bar.repeat(data.periods()),
                    };
                    let k = index.find_history(&h).ok_or_else(|| invalid(format!("history {h:?} is not observed")))?;
                    if a.functional == FunctionalArg::EffectUpper {
                        Functional::EffectUpper(k)
                    } else {
                        Functional::EffectLower(k)
                    }
                }
                FunctionalArg::SlopeUpper | FunctionalArg::SlopeLower => {
                    let c = a.coef.as_ref().map_or_else(|| vec![1.0; data.dim()], |c| c.0.clone());
                    if c.len() != data.dim() {
                        return Err(invalid(format!("--coef needs {} value(s)", data.dim())));
                    }
                    if a.functional == FunctionalArg::SlopeUpper {
                        Functional::SlopeUpper(c)
                    } else {
                        Functional::SlopeLower(c)
                    }
                }
            };
            let plan = BootstrapPlan::new(a.r, a.gamma, a.alpha1, a.alpha2, a.inner, seed);
            let r = perturbed_bootstrap(&kernel, &cells, data.n() as f64, &q, &functional, &plan, &grid)?;
            Ok(json!({
                "interval": [r.lower, r.upper],
                "estimate": r.estimate,
                "upper_quantile": r.upper_quantile,
                "lower_quantile": r.lower_quantile,
                "quantile_spread": [r.quantile_spread.0, r.quantile_spread.1],
                "accepted": r.accepted,
                "draws": r.draws,
            }))
        }
    }
}

fn markov_of(a: &MarkovArgs, link: LinkFunction, beta: f64) -> Result<MarkovDgp> {
    let support: Vec<f64> = a.alpha.0.iter().map(|p| p.0).collect();
    let weights: Vec<f64> = a.alpha.0.iter().map(|p| p.1).collect();
    let m = support.len();
    Ok(MarkovDgp {
        order: a.order,
        alpha: MixingDistribution::new(support, weights)?,
        stay_zero: vec![a.stay_zero; m],
        stay_one: vec![a.stay_one; m],
        mixed_one: vec![a.mixed_one; m],
        link,
        beta,
    })
}

fn simulate(a: &SimulateArgs, seed: u64) -> Result<Value> {
    let link = link_of(a.link);
    let q = EffectQuery::binary();
    let (mu0, exact) = match a.dgp {
        Dgp::Static | Dgp::Ht => {
            let spec = if a.dgp == Dgp::Static { AlphaSpec::Correlated } else { AlphaSpec::HonoreTamerPlusCorrelated };
            let dgp = StaticDgp::new(a.periods, a.p_x, a.beta, link, spec)?;
            if a.exact {
                let (index, cells) = dgp.exact_cells()?;
                let file = CellsFile::new(&index, &cells);
                let w = create(&a.out)?;
                serde_json::to_writer_pretty(w, &file)
                    .map_err(|source| CliError::Json { path: a.out.clone(), source })?;
            } else {
                let data = dgp.generate(a.n, seed)?;
                write_panel(create(&a.out)?, &data).map_err(|source| CliError::Csv { path: a.out.clone(), source })?;
            }
            (dgp.mu0(&q), a.exact)
        }
        Dgp::Markov => {
            if a.exact {
                return Err(invalid("--exact is available for the static and ht designs only"));
            }
            let dgp = markov_of(&a.markov, link, a.beta)?;
            let data = dgp.generate(a.periods, a.n, seed)?;
            write_panel(create(&a.out)?, &data).map_err(|source| CliError::Csv { path: a.out.clone(), source })?;
            (dgp.mu0(), false)
        }
    };
    Ok(json!({
        "out": a.out.display().to_string(),
        "exact": exact,
        "n": if exact { Value::Null } else { json!(a.n) },
        "periods": a.periods,
        "mu0": mu0,
    }))
}

fn periods_of(list: &IntList) -> Result<Vec<usize>> {
    list.0
        .iter()
        .map(|&t| {
            usize::try_from(t)
                .ok()
                .filter(|&t| t >= 2)
                .ok_or_else(|| invalid(format!("panel length {t} must be at least 2")))
        })
        .collect()
}

fn figures(a: &FiguresArgs) -> Result<Value> {
    let periods = periods_of(&a.periods)?;
    let path = &a.out;
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut rows = 0usize;
    let mut put = |w: &mut csv::Writer<BufWriter<File>>, rec: Vec<String>| -> Result<()> {
        rows += 1;
        w.write_record(&rec).map_err(csv_err(path))
    };
    match a.which {
        Figure::Table1 => {
            w.write_record([
                "T",
                "p_x",
                "mu0",
                "within_plim",
                "average_slope_plim",
                "within_bias",
                "average_slope_bias",
            ])
            .map_err(csv_err(path))?;
            for r in table1_surface(&periods, &a.p_list.0)? {
                put(
                    &mut w,
                    vec![
                        r.periods.to_string(),
                        r.p_x.to_string(),
                        r.mu0.to_string(),
                        r.within_plim.to_string(),
                        r.average_slope_plim.to_string(),
                        r.within_bias.to_string(),
                        r.average_slope_bias.to_string(),
                    ],
                )?;
            }
        }
        Figure::Idsets => {
            w.write_record(["link", "T", "p_x", "beta", "objective", "member"]).map_err(csv_err(path))?;
            let links = match a.link {
                Some(l) => vec![link_of(l)],
                None => vec![LinkFunction::Logit, LinkFunction::Probit],
            };
            let grid = grid_of(&a.grid, 1)?;
            for link in links {
                for &t in &periods {
                    for &p in &a.p_list.0 {
                        let dgp = StaticDgp::new(t, p, a.beta, link, AlphaSpec::HonoreTamerPlusCorrelated)?;
                        let (index, cells) = dgp.exact_cells()?;
                        let kernel = LikelihoodKernel::new(link, index)?;
                        let set = estimate_identified_set(&kernel, &cells, &grid)?;
                        for (b, beta) in set.beta_grid.iter().enumerate() {
                            put(
                                &mut w,
                                vec![
                                    link.name().into(),
                                    t.to_string(),
                                    p.to_string(),
                                    beta[0].to_string(),
                                    set.objective[b].to_string(),
                                    (set.members.contains(&b) as u8).to_string(),
                                ],
                            )?;
                        }
                    }
                }
            }
        }
        Figure::Markov => {
            w.write_record(["T", "lower", "upper", "width", "mu0", "envelope"]).map_err(csv_err(path))?;
            let link = link_of(a.link.unwrap_or(Link::Logit));
            let dgp = markov_of(&a.markov, link, a.beta)?;
            for r in markov_bound_decay(&dgp, &periods)? {
                put(
                    &mut w,
                    vec![
                        r.periods.to_string(),
                        r.lower.to_string(),
                        r.upper.to_string(),
                        r.width.to_string(),
                        r.mu0.to_string(),
                        r.envelope.to_string(),
                    ],
                )?;
            }
        }
    }
    w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(json!({ "out": path.display().to_string(), "rows": rows }))
}
