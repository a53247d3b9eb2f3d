//! Set-valid inference: chi-square goodness-of-fit regions for cell
//! probabilities, modified projection, perturbed bootstrap and intervals
//! for the nonparametric bounds.

use alloc::vec;
use alloc::vec::Vec;

use crate::choice::LikelihoodKernel;
use crate::npbounds::{dynamic_bounds, static_bounds_from_data, unit_contributions, BoundsModel, OutcomeBounds};
use crate::panel::{CellProbabilities, EffectQuery, PanelDataset, SupportIndex};
use crate::par::map_indexed;
use crate::rng::{multinomial, task_rng, Rng};
use crate::setid::{effect_bounds_for, estimate_identified_set, GridConfig, IdentifiedSet};
use crate::solvers::{chisq_quantile, normal_quantile};
use crate::{Error, Result};

pub const CANDIDATE_STREAM: u64 = 2;
pub const INNER_STREAM: u64 = 3;
pub const BOOTSTRAP_STREAM: u64 = 4;

/// `n sum_k P_k sum_j (P_jk - Pi_jk)^2 / Pi_jk` over histories with `P_k > 0`.
///
/// Infinite when `Pi_jk = 0` for a cell with `P_jk > 0`.
pub fn gof_statistic(pi: &CellProbabilities, p: &CellProbabilities, n: f64) -> f64 {
    let mut w = 0.0;
    for k in 0..p.k() {
        if p.p_x[k] <= 0.0 || !p.present[k] {
            continue;
        }
        let mut row = 0.0;
        for (&pj, &qj) in p.p_y[k].iter().zip(&pi.p_y[k]) {
            if qj <= 0.0 {
                if pj > 0.0 {
                    return f64::INFINITY;
                }
                continue;
            }
            row += (pj - qj) * (pj - qj) / qj;
        }
        w += p.p_x[k] * row;
    }
    n * w
}

/// `{Pi : W(Pi, P) <= c}` with `c` the chi-square quantile on `K (J - 1)` degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct GofRegion {
    pub center: CellProbabilities,
    pub n: f64,
    pub level: f64,
    pub critical: f64,
    pub df: u32,
}

impl GofRegion {
    pub fn new(center: CellProbabilities, n: f64, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidProbability(level));
        }
        if !(n > 0.0) {
            return Err(Error::InvalidConfig("sample size must be positive".into()));
        }
        let df = (center.k() * center.j().saturating_sub(1)) as u32;
        let critical = chisq_quantile(df, level)?;
        Ok(Self { center, n, level, critical, df })
    }

    pub fn statistic(&self, pi: &CellProbabilities) -> f64 {
        gof_statistic(pi, &self.center, self.n)
    }

    pub fn contains(&self, pi: &CellProbabilities) -> bool {
        self.statistic(pi) <= self.critical
    }
}

/// Rows drawn as `Mult(round(n P_k), P_k.) / round(n P_k)`; history masses are kept.
///
/// Rows with no trials are copied from `P`.
pub fn sample_dgp_candidate(p: &CellProbabilities, n: f64, rng: &mut Rng) -> CellProbabilities {
    let p_y = p
        .p_y
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let trials = libm::round(n * p.p_x[k]) as u64;
            if !p.present[k] || trials == 0 {
                return row.clone();
            }
            multinomial(rng, trials, row).into_iter().map(|c| c as f64 / trials as f64).collect()
        })
        .collect();
    CellProbabilities { p_x: p.p_x.clone(), p_y, counts: p.counts.clone(), present: p.present.clone(), n_eff: n as u64 }
}

/// Candidate `d` of a seeded stream; candidate 0 is `P` itself.
pub fn candidate(p: &CellProbabilities, n: f64, seed: u64, d: usize) -> CellProbabilities {
    if d == 0 {
        let mut c = p.clone();
        c.n_eff = n as u64;
        return c;
    }
    sample_dgp_candidate(p, n, &mut task_rng(seed, CANDIDATE_STREAM, d as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    pub level: f64,
    /// Stage-one candidates, including `P` itself.
    pub draws: usize,
    pub seed: u64,
    /// Histories to bound; all when `None`.
    pub histories: Option<Vec<usize>>,
    /// Keep candidates whose model projection, rather than the candidate, passes the test.
    pub canonical: bool,
}

impl ProjectionConfig {
    pub fn new(level: f64, draws: usize, seed: u64) -> Self {
        Self { level, draws, seed, histories: None, canonical: false }
    }
}

/// Unions over accepted candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRegion {
    /// Slope grid indices in any accepted identified set, in grid order.
    pub beta_members: Vec<usize>,
    /// Per history `[min lower, max upper]`; `None` when unbounded or without mass.
    pub per_history: Vec<Option<(f64, f64)>>,
    pub aggregate: (f64, f64),
    pub accepted: usize,
    pub draws: usize,
    pub critical: f64,
    pub min_statistic: f64,
}

/// Slope members, per-history bounds and aggregate bounds of one accepted draw.
type Accepted = (Vec<usize>, Vec<Option<(f64, f64)>>, (f64, f64));

struct DrawOutcome {
    statistic: f64,
    set: Option<Accepted>,
}

/// Modified projection: candidates in the goodness-of-fit region are
/// projected onto the model and their identified sets and effect bounds are
/// unioned. The canonical variant tests the projections instead.
pub fn modified_projection(
    kernel: &LikelihoodKernel,
    p: &CellProbabilities,
    n: f64,
    query: &EffectQuery,
    grid: &GridConfig,
    config: &ProjectionConfig,
) -> Result<ProjectionRegion> {
    if config.draws == 0 {
        return Err(Error::InvalidConfig("need at least one draw".into()));
    }
    let region = GofRegion::new(p.clone(), n, config.level)?;
    let ks = config.histories.as_deref();
    let outcomes = map_indexed(config.draws, |d| -> Result<DrawOutcome> {
        let pi = candidate(p, n, config.seed, d);
        if !config.canonical {
            let statistic = region.statistic(&pi);
            if statistic > region.critical {
                return Ok(DrawOutcome { statistic, set: None });
            }
            let set = estimate_identified_set(kernel, &pi, grid)?;
            let eb = effect_bounds_for(kernel, &pi, &set, query, grid, ks)?;
            Ok(DrawOutcome { statistic, set: Some((set.members, eb.per_history, eb.aggregate)) })
        } else {
            let set = estimate_identified_set(kernel, &pi, grid)?;
            let proj = set.projected(&pi, set.argmin);
            let statistic = region.statistic(&proj);
            if statistic > region.critical {
                return Ok(DrawOutcome { statistic, set: None });
            }
            let eb = effect_bounds_for(kernel, &pi, &set, query, grid, ks)?;
            Ok(DrawOutcome { statistic, set: Some((set.members, eb.per_history, eb.aggregate)) })
        }
    });
    let kk = p.k();
    let mut in_set = vec![false; grid.beta_grid.len()];
    let mut per_history: Vec<Option<(f64, f64)>> = vec![None; kk];
    let mut aggregate = (f64::INFINITY, f64::NEG_INFINITY);
    let mut accepted = 0;
    let mut min_statistic = f64::INFINITY;
    for out in outcomes {
        let out = out?;
        min_statistic = min_statistic.min(out.statistic);
        let Some((members, rows, agg)) = out.set else { continue };
        accepted += 1;
        for b in members {
            in_set[b] = true;
        }
        for (acc, row) in per_history.iter_mut().zip(rows) {
            if let Some((l, u)) = row {
                *acc = Some(match *acc {
                    None => (l, u),
                    Some((a, b)) => (a.min(l), b.max(u)),
                });
            }
        }
        aggregate = (aggregate.0.min(agg.0), aggregate.1.max(agg.1));
    }
    if accepted == 0 {
        return Err(Error::EmptyRegion { min_statistic });
    }
    Ok(ProjectionRegion {
        beta_members: (0..in_set.len()).filter(|&b| in_set[b]).collect(),
        per_history,
        aggregate,
        accepted,
        draws: config.draws,
        critical: region.critical,
        min_statistic,
    })
}

/// Scalar target of the perturbed bootstrap.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// Upper bound on the effect for history `k`.
    EffectUpper(usize),
    /// Lower bound on the effect for history `k`.
    EffectLower(usize),
    /// `max c'b` over the identified set.
    SlopeUpper(Vec<f64>),
    /// `min c'b` over the identified set.
    SlopeLower(Vec<f64>),
}

impl Functional {
    /// Value of the functional on the identified set of `cells`.
    pub fn evaluate(
        &self,
        kernel: &LikelihoodKernel,
        cells: &CellProbabilities,
        query: &EffectQuery,
        grid: &GridConfig,
    ) -> Result<f64> {
        let set = estimate_identified_set(kernel, cells, grid)?;
        self.on_set(kernel, cells, &set, query, grid)
    }

    fn on_set(
        &self,
        kernel: &LikelihoodKernel,
        cells: &CellProbabilities,
        set: &IdentifiedSet,
        query: &EffectQuery,
        grid: &GridConfig,
    ) -> Result<f64> {
        let slope =
            |c: &[f64]| -> Vec<f64> { set.member_betas().map(|b| b.iter().zip(c).map(|(x, y)| x * y).sum()).collect() };
        match self {
            Functional::EffectUpper(k) | Functional::EffectLower(k) => {
                if *k >= cells.k() {
                    return Err(Error::IndexOutOfRange { index: *k, len: cells.k() });
                }
                let eb = effect_bounds_for(kernel, cells, set, query, grid, Some(&[*k]))?;
                let (l, u) = eb.per_history[*k].ok_or(Error::InvalidConfig("history carries no mass".into()))?;
                Ok(if matches!(self, Functional::EffectUpper(_)) { u } else { l })
            }
            Functional::SlopeUpper(c) => Ok(slope(c).into_iter().fold(f64::NEG_INFINITY, f64::max)),
            Functional::SlopeLower(c) => Ok(slope(c).into_iter().fold(f64::INFINITY, f64::min)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapPlan {
    /// Accepted candidate DGPs.
    pub r: usize,
    /// Level of the candidate region is `1 - gamma`.
    pub gamma: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub inner_reps: usize,
    pub seed: u64,
    /// Candidates tried before giving up.
    pub max_draws: usize,
}

impl BootstrapPlan {
    pub fn new(r: usize, gamma: f64, alpha1: f64, alpha2: f64, inner_reps: usize, seed: u64) -> Self {
        Self { r, gamma, alpha1, alpha2, inner_reps, seed, max_draws: 20 * r.max(1) + 100 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.inner_reps == 0 {
            return Err(Error::InvalidConfig("bootstrap needs R >= 1 and at least one inner simulation".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidProbability(self.gamma));
        }
        if !(self.alpha1 >= 0.0 && self.alpha2 >= 0.0 && self.alpha1 + self.alpha2 < 1.0) {
            return Err(Error::InvalidConfig("tail splits must be nonnegative and sum below 1".into()));
        }
        if self.max_draws < self.r {
            return Err(Error::InvalidConfig("draw budget smaller than R".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapInterval {
    pub lower: f64,
    pub upper: f64,
    /// Plug-in estimate with zero slack.
    pub estimate: f64,
    /// `max_r` of the upper-tail quantiles of `S`.
    pub upper_quantile: f64,
    /// `min_r` of the lower-tail quantiles of `S`.
    pub lower_quantile: f64,
    /// Spread of per-candidate quantiles (max minus min) for each tail.
    pub quantile_spread: (f64, f64),
    pub accepted: usize,
    pub draws: usize,
}

/// Empirical quantile: the `ceil(a N)`-th order statistic of sorted values.
pub fn order_quantile(sorted: &[f64], a: f64) -> f64 {
    let n = sorted.len();
    let idx = libm::ceil(a * n as f64) as usize;
    sorted[idx.clamp(1, n) - 1]
}

/// Sample of size `n` from cells `pi`: history counts from `pi`'s masses,
/// outcome counts from its rows, returned as frequencies.
pub fn simulate_cells(pi: &CellProbabilities, n: u64, rng: &mut Rng) -> CellProbabilities {
    let counts = multinomial(rng, n, &pi.p_x);
    let p_x: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let p_y = counts
        .iter()
        .zip(&pi.p_y)
        .map(|(&c, row)| {
            if c == 0 {
                vec![0.0; row.len()]
            } else {
                multinomial(rng, c, row).into_iter().map(|v| v as f64 / c as f64).collect()
            }
        })
        .collect();
    CellProbabilities { p_x, p_y, present: counts.iter().map(|&c| c > 0).collect(), counts, n_eff: n }
}

fn with_zero_slack(grid: &GridConfig) -> GridConfig {
    GridConfig { epsilon: Some(0.0), ..grid.clone() }
}

/// Perturbed bootstrap interval for a scalar functional of the identified set.
pub fn perturbed_bootstrap(
    kernel: &LikelihoodKernel,
    p: &CellProbabilities,
    n: f64,
    query: &EffectQuery,
    functional: &Functional,
    plan: &BootstrapPlan,
    grid: &GridConfig,
) -> Result<BootstrapInterval> {
    plan.validate()?;
    let zero = with_zero_slack(grid);
    let mut at_p = p.clone();
    at_p.n_eff = n as u64;
    let estimate = functional.evaluate(kernel, &at_p, query, &zero)?;

    // step 1: candidates passing the (1 - gamma) goodness-of-fit test
    let region = GofRegion::new(p.clone(), n, 1.0 - plan.gamma)?;
    let mut accepted = Vec::with_capacity(plan.r);
    let mut draws = 0;
    while accepted.len() < plan.r && draws < plan.max_draws {
        let pi = candidate(p, n, plan.seed, draws);
        draws += 1;
        if region.contains(&pi) {
            accepted.push(pi);
        }
    }
    if accepted.len() < plan.r {
        return Err(Error::BudgetExceeded { accepted: accepted.len(), wanted: plan.r, draws });
    }

    // steps 2-3: distribution of S = theta_hat(sim) - theta*(Pi_r) under each candidate
    let n_units = libm::round(n) as u64;
    let tails = map_indexed(plan.r, |r| -> Result<(f64, f64)> {
        let pi = &accepted[r];
        let set = estimate_identified_set(kernel, pi, grid)?;
        let mut truth = set.projected(pi, set.argmin);
        truth.n_eff = 0;
        truth.counts = Vec::new();
        let theta_star = functional.evaluate(kernel, &truth, query, grid)?;
        let mut s = Vec::with_capacity(plan.inner_reps);
        for i in 0..plan.inner_reps {
            let mut rng = task_rng(plan.seed, INNER_STREAM, ((r as u64) << 32) | i as u64);
            let sim = simulate_cells(pi, n_units, &mut rng);
            s.push(functional.evaluate(kernel, &sim, query, &zero)? - theta_star);
        }
        s.sort_by(f64::total_cmp);
        Ok((order_quantile(&s, 1.0 - plan.alpha1), order_quantile(&s, plan.alpha2)))
    });
    let tails = tails.into_iter().collect::<Result<Vec<_>>>()?;

    // steps 4-5: conservative envelopes
    let hi: Vec<f64> = tails.iter().map(|t| t.0).collect();
    let lo: Vec<f64> = tails.iter().map(|t| t.1).collect();
    let upper_quantile = hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower_quantile = lo.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = |v: &[f64]| {
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
    };
    Ok(BootstrapInterval {
        lower: estimate - upper_quantile,
        upper: estimate - lower_quantile,
        estimate,
        upper_quantile,
        lower_quantile,
        quantile_spread: (spread(&hi), spread(&lo)),
        accepted: plan.r,
        draws,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiMethod {
    Normal,
    Bootstrap { reps: usize, seed: u64 },
}

/// Two-sided intervals for each estimated bound, and the outer interval
/// `[lower.0, upper.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsCi {
    pub mu_lower: f64,
    pub mu_upper: f64,
    pub lower: (f64, f64),
    pub upper: (f64, f64),
    pub se: Option<(f64, f64)>,
}

impl BoundsCi {
    pub fn outer(&self) -> (f64, f64) {
        (self.lower.0, self.upper.1)
    }
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, libm::sqrt(var / n))
}

fn bounds_of(
    data: &PanelDataset,
    index: &SupportIndex,
    query: &EffectQuery,
    bounds: OutcomeBounds,
    model: BoundsModel,
) -> Result<(f64, f64)> {
    let est = match model {
        BoundsModel::Static { monotone } => static_bounds_from_data(data, index, query, bounds, monotone)?,
        BoundsModel::Dynamic => dynamic_bounds(data, query, bounds)?,
    };
    Ok((est.mu_lower, est.mu_upper))
}

/// Confidence intervals for the estimated bounds, from per-unit influence
/// terms (normal) or from resampling units (bootstrap percentiles).
pub fn np_bounds_ci(
    data: &PanelDataset,
    index: &SupportIndex,
    query: &EffectQuery,
    bounds: OutcomeBounds,
    model: BoundsModel,
    level: f64,
    method: CiMethod,
) -> Result<BoundsCi> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidProbability(level));
    }
    let (mu_lower, mu_upper) = bounds_of(data, index, query, bounds, model)?;
    match method {
        CiMethod::Normal => {
            let (lo, hi) = unit_contributions(data, index, query, bounds, model)?;
            let z = normal_quantile(0.5 + level / 2.0)?;
            let (_, se_l) = mean_and_se(&lo);
            let (_, se_u) = mean_and_se(&hi);
            Ok(BoundsCi {
                mu_lower,
                mu_upper,
                lower: (mu_lower - z * se_l, mu_lower + z * se_l),
                upper: (mu_upper - z * se_u, mu_upper + z * se_u),
                se: Some((se_l, se_u)),
            })
        }
        CiMethod::Bootstrap { reps, seed } => {
            if reps == 0 {
                return Err(Error::InvalidConfig("bootstrap needs at least one repetition".into()));
            }
            let n = data.n();
            let draws = map_indexed(reps, |b| -> Result<(f64, f64)> {
                let mut rng = task_rng(seed, BOOTSTRAP_STREAM, b as u64);
                let rows: Vec<usize> =
                    (0..n).map(|_| (rand_core::RngCore::next_u64(&mut rng) % n as u64) as usize).collect();
                let sample = data.resample(&rows)?;
                bounds_of(&sample, index, query, bounds, model)
            });
            let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
            let mut l: Vec<f64> = draws.iter().map(|d| d.0).collect();
            let mut u: Vec<f64> = draws.iter().map(|d| d.1).collect();
            l.sort_by(f64::total_cmp);
            u.sort_by(f64::total_cmp);
            let a = (1.0 - level) / 2.0;
            Ok(BoundsCi {
                mu_lower,
                mu_upper,
                lower: (order_quantile(&l, a), order_quantile(&l, 1.0 - a)),
                upper: (order_quantile(&u, a), order_quantile(&u, 1.0 - a)),
                se: None,
            })
        }
    }
}
