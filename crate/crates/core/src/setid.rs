//! Identified sets for the slope in semiparametric binary choice panels,
//! projections of cell tables onto the model, LP bounds on marginal effects
//! and the limits of fixed-effects maximum likelihood.
//!
//! Mixing distributions live on fixed grids of individual effects. The
//! minimum-distance step fits, for every candidate slope and every history,
//! a penalized weighted least-squares mixture on the coarse grid; effect
//! bounds are then LPs on the fine grid with the fitted probabilities as
//! equality constraints. The coarse grid is a subset of the fine one, so
//! those LPs are feasible by construction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::choice::{effect_integrand, index_value, LikelihoodKernel, LinkFunction};
use crate::linear_fe::partition_support;
use crate::panel::{CellProbabilities, EffectQuery};
use crate::par::map_indexed;
use crate::solvers::{solve_lp, LinearProgram, LpStatus, QpBlock, Sense, FEAS_TOL, OPT_TOL};
use crate::{Error, Result};

/// Floor on fitted probabilities when they are turned into weights.
const WEIGHT_FLOOR: f64 = 1e-8;
/// Objective gap under which two grid points count as tied.
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MixingDistribution {
    pub support: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MixingDistribution {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: support.len(), got: weights.len() });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidConfig("mixing weights must be nonnegative".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!("mixing weights sum to {s}")));
        }
        Ok(Self { support, weights })
    }

    /// Atoms with positive weight.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied()).filter(|(_, w)| *w > 0.0)
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms().map(|(a, w)| w * f(a)).sum()
    }
}

/// `{-∞} ∪ {i / denom : lo <= i <= hi} ∪ {+∞}`, built from integers so that
/// grids sharing a denominator share points exactly.
pub fn extended_grid(lo: i64, hi: i64, step: i64, denom: f64) -> Vec<f64> {
    let mut g = vec![f64::NEG_INFINITY];
    let mut i = lo;
    while i <= hi {
        g.push(i as f64 / denom);
        i += step;
    }
    g.push(f64::INFINITY);
    g
}

/// Scalar slope grid `{i / denom : lo <= i <= hi}`.
pub fn scalar_beta_grid(lo: i64, hi: i64, denom: f64) -> Vec<Vec<f64>> {
    (lo..=hi).map(|i| vec![i as f64 / denom]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub beta_grid: Vec<Vec<f64>>,
    /// Support for the quadratic step; `{-∞, -4, -3.6, ..., 4, ∞}` by default.
    pub alpha_qp: Vec<f64>,
    /// Support for the LP step; `{-∞, -8, -7.9, ..., 8, ∞}` by default.
    pub alpha_lp: Vec<f64>,
    /// Ridge penalty; `1 / (n ln n)` when unset.
    pub lambda: Option<f64>,
    /// Membership slack; `ln n / n` when unset.
    pub epsilon: Option<f64>,
    pub weight_iterations: usize,
    /// Sample size assumed for population cells.
    pub population_n: f64,
    pub qp_tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            beta_grid: scalar_beta_grid(-300, 300, 100.0),
            alpha_qp: extended_grid(-40, 40, 4, 10.0),
            alpha_lp: extended_grid(-80, 80, 1, 10.0),
            lambda: None,
            epsilon: None,
            weight_iterations: 3,
            population_n: 1e6,
            qp_tol: 1e-10,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta_grid.is_empty() {
            return Err(Error::InvalidConfig("empty slope grid".into()));
        }
        let dim = self.beta_grid[0].len();
        if dim == 0 || self.beta_grid.iter().any(|b| b.len() != dim || b.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidConfig("slope grid points must be finite vectors of equal length".into()));
        }
        for (name, g) in [("quadratic", &self.alpha_qp), ("linear", &self.alpha_lp)] {
            if g.len() < 2 || g.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidConfig(format!("{name} effect grid must be strictly increasing")));
            }
        }
        if matches!(self.lambda, Some(l) if !(l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidConfig("penalty must be nonnegative".into()));
        }
        if matches!(self.epsilon, Some(e) if !(e >= 0.0 && e.is_finite())) {
            return Err(Error::InvalidConfig("membership slack must be nonnegative".into()));
        }
        if self.weight_iterations == 0 {
            return Err(Error::InvalidConfig("at least one weighting pass is required".into()));
        }
        Ok(())
    }

    pub fn lambda_for(&self, n: f64) -> f64 {
        self.lambda.unwrap_or_else(|| 1.0 / (n * libm::log(n)))
    }

    pub fn epsilon_for(&self, n: f64) -> f64 {
        self.epsilon.unwrap_or_else(|| libm::log(n) / n)
    }
}

/// Penalized fit of one slope value.
#[derive(Debug, Clone, PartialEq)]
pub struct MdFit {
    pub value: f64,
    /// Per history; `None` where the history carries no mass.
    pub mixtures: Vec<Option<MixingDistribution>>,
    /// Model-implied outcome probabilities, `K x J`.
    pub predicted: Vec<Vec<f64>>,
}

fn columns(kernel: &LikelihoodKernel, k: usize, grid: &[f64], beta: &[f64]) -> Result<Vec<Vec<f64>>> {
    grid.iter().map(|&a| kernel.likelihood_column(k, a, beta)).collect()
}

/// Initial weights `n P_k` for every outcome.
pub fn initial_weights(cells: &CellProbabilities, n: f64) -> Vec<Vec<f64>> {
    cells.p_x.iter().map(|&p| vec![n * p; cells.j()]).collect()
}

/// Weights `n P_k / P*_jk` from fitted probabilities, floored at `WEIGHT_FLOOR`.
pub fn refit_weights(cells: &CellProbabilities, predicted: &[Vec<f64>], n: f64) -> Vec<Vec<f64>> {
    cells
        .p_x
        .iter()
        .zip(predicted)
        .map(|(&p, row)| row.iter().map(|&q| n * p / q.max(WEIGHT_FLOOR)).collect())
        .collect()
}

fn active(cells: &CellProbabilities, k: usize) -> bool {
    cells.present[k] && cells.p_x[k] > 0.0
}

/// Penalized minimum-distance objective at one slope value.
///
/// Histories without mass are skipped; their penalty-only term does not
/// depend on the slope.
pub fn md_objective(
    kernel: &LikelihoodKernel,
    cells: &CellProbabilities,
    beta: &[f64],
    grid: &GridConfig,
    weights: &[Vec<f64>],
    lambda: f64,
) -> Result<MdFit> {
    md_objective_from(kernel, cells, beta, grid, weights, lambda, None)
}

/// As [`md_objective`], warm-starting each block from an earlier fit at the same slope.
fn md_objective_from(
    kernel: &LikelihoodKernel,
    cells: &CellProbabilities,
    beta: &[f64],
    grid: &GridConfig,
    weights: &[Vec<f64>],
    lambda: f64,
    warm: Option<&MdFit>,
) -> Result<MdFit> {
    let kk = cells.k();
    if kernel.index.k() != kk || kernel.index.j() != cells.j() {
        return Err(Error::DimensionMismatch { expected: kernel.index.k(), got: kk });
    }
    let mut value = 0.0;
    let mut mixtures = Vec::with_capacity(kk);
    let mut predicted = Vec::with_capacity(kk);
    for k in 0..kk {
        if !active(cells, k) {
            mixtures.push(None);
            predicted.push(vec![0.0; cells.j()]);
            continue;
        }
        let block = QpBlock {
            columns: columns(kernel, k, &grid.alpha_qp, beta)?,
            weights: weights[k].clone(),
            target: cells.p_y[k].clone(),
        };
        let start = warm.and_then(|f| f.mixtures[k].as_ref()).map(|m| m.weights.as_slice());
        let sol = block.solve(lambda, grid.qp_tol, start)?;
        let mut row = vec![0.0; cells.j()];
        for (col, &w) in block.columns.iter().zip(&sol.weights) {
            if w > 0.0 {
                for (r, c) in row.iter_mut().zip(col) {
                    *r += w * c;
                }
            }
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|r| *r /= s);
        value += sol.value;
        predicted.push(row);
        mixtures.push(Some(MixingDistribution { support: grid.alpha_qp.clone(), weights: sol.weights }));
    }
    Ok(MdFit { value, mixtures, predicted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiedSet {
    pub beta_grid: Vec<Vec<f64>>,
    /// Final-pass objective per grid point.
    pub objective: Vec<f64>,
    /// Grid indices within `epsilon` of the minimum, in grid order.
    pub members: Vec<usize>,
    pub argmin: usize,
    pub fits: Vec<MdFit>,
    pub lambda: f64,
    pub epsilon: f64,
    /// Another grid point attains the minimum within `1e-10`.
    pub near_tie: bool,
    /// Weights used in the final pass.
    pub weights: Vec<Vec<f64>>,
}

impl IdentifiedSet {
    pub fn member_betas(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.members.iter().map(|&b| self.beta_grid[b].as_slice())
    }

    pub fn min_objective(&self) -> f64 {
        self.objective[self.argmin]
    }

    /// Fitted probabilities at grid point `b` as a cell table.
    pub fn projected(&self, cells: &CellProbabilities, b: usize) -> CellProbabilities {
        CellProbabilities {
            p_x: cells.p_x.clone(),
            p_y: self.fits[b].predicted.clone(),
            counts: cells.counts.clone(),
            present: (0..cells.k()).map(|k| active(cells, k)).collect(),
            n_eff: cells.n_eff,
        }
    }

    /// Members whose slopes form one contiguous run of the grid.
    pub fn is_contiguous(&self) -> bool {
        self.members.windows(2).all(|w| w[1] == w[0] + 1)
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Minimum-distance identified set with iterated chi-square weighting.
pub fn estimate_identified_set(
    kernel: &LikelihoodKernel,
    cells: &CellProbabilities,
    grid: &GridConfig,
) -> Result<IdentifiedSet> {
    grid.validate()?;
    let n = cells.effective_n(grid.population_n);
    let lambda = grid.lambda_for(n);
    let epsilon = grid.epsilon_for(n);
    let mut weights = initial_weights(cells, n);
    let nb = grid.beta_grid.len();
    let mut fits = Vec::new();
    for pass in 0..grid.weight_iterations {
        let prev = &fits;
        let out = map_indexed(nb, |b| {
            md_objective_from(kernel, cells, &grid.beta_grid[b], grid, &weights, lambda, prev.get(b))
        });
        fits = out.into_iter().collect::<Result<Vec<_>>>()?;
        if pass + 1 < grid.weight_iterations {
            let values: Vec<f64> = fits.iter().map(|f| f.value).collect();
            weights = refit_weights(cells, &fits[argmin(&values)].predicted, n);
        }
    }
    let objective: Vec<f64> = fits.iter().map(|f| f.value).collect();
    let best = argmin(&objective);
    let min = objective[best];
    let members = (0..nb).filter(|&b| objective[b] <= min + epsilon).collect();
    let near_tie = (0..nb).any(|b| b != best && objective[b] - min <= TIE_TOL);
    Ok(IdentifiedSet {
        beta_grid: grid.beta_grid.clone(),
        objective,
        members,
        argmin: best,
        fits,
        lambda,
        epsilon,
        near_tie,
        weights,
    })
}

/// Projection of the cells onto the model: fitted probabilities at the
/// overall minimizer, rows renormalized.
pub fn project_probabilities(
    kernel: &LikelihoodKernel,
    cells: &CellProbabilities,
    grid: &GridConfig,
) -> Result<CellProbabilities> {
    let set = estimate_identified_set(kernel, cells, grid)?;
    Ok(set.projected(cells, set.argmin))
}

/// Sharp bounds on one history's effect at a fixed slope, with the optimal mixtures.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_mixture: MixingDistribution,
    pub upper_mixture: MixingDistribution,
}

/// LP bounds on the effect for history `k` given fitted probabilities.
pub fn effect_bounds_lp(
    kernel: &LikelihoodKernel,
    projected: &CellProbabilities,
    beta: &[f64],
    k: usize,
    query: &EffectQuery,
    grid: &GridConfig,
) -> Result<EffectInterval> {
    if k >= projected.k() {
        return Err(Error::IndexOutOfRange { index: k, len: projected.k() });
    }
    let cols = columns(kernel, k, &grid.alpha_lp, beta)?;
    let j = projected.j();
    let mut a_eq: Vec<Vec<f64>> = (0..j).map(|jj| cols.iter().map(|c| c[jj]).collect()).collect();
    a_eq.push(vec![1.0; cols.len()]);
    let mut b_eq = projected.p_y[k].clone();
    b_eq.push(1.0);
    let objective: Vec<f64> = grid.alpha_lp.iter().map(|&a| effect_integrand(kernel.link, a, beta, query)).collect();
    let solve = |sense| -> Result<(f64, MixingDistribution)> {
        let prog = LinearProgram { objective: objective.clone(), a_eq: a_eq.clone(), b_eq: b_eq.clone(), sense };
        let sol = solve_lp(&prog, FEAS_TOL, OPT_TOL)?;
        match sol.status {
            LpStatus::Optimal => {
                let s: f64 = sol.point.iter().sum();
                let w = sol.point.iter().map(|p| p / s).collect();
                Ok((sol.value, MixingDistribution { support: grid.alpha_lp.clone(), weights: w }))
            }
            LpStatus::Infeasible => Err(Error::Infeasible { residual: sol.phase_one_residual }),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    };
    let (lower, lower_mixture) = solve(Sense::Min)?;
    let (upper, upper_mixture) = solve(Sense::Max)?;
    Ok(EffectInterval { lower, upper, lower_mixture, upper_mixture })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectBounds {
    /// Per history, min/max over members; `None` without mass.
    pub per_history: Vec<Option<(f64, f64)>>,
    /// Bounds on the mass-weighted average effect, slope held common across histories.
    pub aggregate: (f64, f64),
    /// Per member (grid index) and history, the LP bounds.
    pub per_member: Vec<(usize, Vec<Option<(f64, f64)>>)>,
}

/// Effect bounds over the members of an identified set.
pub fn effect_bounds(
    kernel: &LikelihoodKernel,
    cells: &CellProbabilities,
    set: &IdentifiedSet,
    query: &EffectQuery,
    grid: &GridConfig,
) -> Result<EffectBounds> {
    effect_bounds_for(kernel, cells, set, query, grid, None)
}

/// As [`effect_bounds`], restricted to the listed histories when `only` is set.
pub fn effect_bounds_for(
    kernel: &LikelihoodKernel,
    cells: &CellProbabilities,
    set: &IdentifiedSet,
    query: &EffectQuery,
    grid: &GridConfig,
    only: Option<&[usize]>,
) -> Result<EffectBounds> {
    let kk = cells.k();
    let wanted: Vec<usize> = match only {
        Some(ks) => ks.to_vec(),
        None => (0..kk).collect(),
    };
    let rows = map_indexed(set.members.len(), |m| -> Result<Vec<Option<(f64, f64)>>> {
        let b = set.members[m];
        let proj = set.projected(cells, b);
        let mut row = vec![None; kk];
        for &k in &wanted {
            if active(cells, k) {
                let e = effect_bounds_lp(kernel, &proj, &set.beta_grid[b], k, query, grid)?;
                row[k] = Some((e.lower, e.upper));
            }
        }
        Ok(row)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut per_history: Vec<Option<(f64, f64)>> = vec![None; kk];
    let mut aggregate = (f64::INFINITY, f64::NEG_INFINITY);
    for row in &rows {
        let (mut lo, mut hi) = (0.0, 0.0);
        for k in 0..kk {
            if let Some((l, u)) = row[k] {
                lo += cells.p_x[k] * l;
                hi += cells.p_x[k] * u;
                per_history[k] = Some(match per_history[k] {
                    None => (l, u),
                    Some((a, b)) => (a.min(l), b.max(u)),
                });
            }
        }
        aggregate = (aggregate.0.min(lo), aggregate.1.max(hi));
    }
    let per_member = set.members.iter().copied().zip(rows).collect();
    Ok(EffectBounds { per_history, aggregate, per_member })
}

/// Limits of the fixed-effects maximum likelihood estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct FemleResult {
    pub beta_tilde: Vec<f64>,
    /// Profiled effects per history and outcome pattern (extended reals).
    pub alpha_hat: Vec<Vec<f64>>,
    /// Implied effect distribution per history; `None` without mass.
    pub q_tilde: Vec<Option<MixingDistribution>>,
    pub effects: Vec<f64>,
    /// Average effect over histories containing both query values.
    pub mu_identified: f64,
    pub objective: f64,
}

fn score_terms(link: LinkFunction, z: f64, y: i64) -> (f64, f64) {
    // d/dz log F(z) = f/F; d/dz log(1 - F(z)) = -f(-z)/F(-z) for symmetric F
    let (s, zz) = if y == 1 { (1.0, z) } else { (-1.0, -z) };
    let f = link.pdf(zz);
    let cdf = link.cdf(zz);
    let h = f / cdf;
    let fprime = match link {
        LinkFunction::Logit => f * (1.0 - 2.0 * cdf),
        LinkFunction::Probit => -zz * f,
    };
    let dh = fprime / cdf - h * h;
    (s * h, dh)
}

fn log_lik(link: LinkFunction, offsets: &[f64], y: &[i64], alpha: f64) -> f64 {
    offsets
        .iter()
        .zip(y)
        .map(|(&c, &yt)| {
            let p = if yt == 1 { link.cdf(c + alpha) } else { link.cdf(-(c + alpha)) };
            libm::log(p)
        })
        .sum()
}

/// `argmax_a log L(y | c + a)`; `±∞` for constant patterns.
pub fn profile_alpha(link: LinkFunction, offsets: &[f64], y: &[i64]) -> f64 {
    if y.iter().all(|&v| v == 0) {
        return f64::NEG_INFINITY;
    }
    if y.iter().all(|&v| v == 1) {
        return f64::INFINITY;
    }
    let score = |a: f64| -> (f64, f64) {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&c, &yt) in offsets.iter().zip(y) {
            let (g, h) = score_terms(link, c + a, yt);
            s += g;
            ds += h;
        }
        (s, ds)
    };
    let cmax = offsets.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let cmin = offsets.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut lo = -cmax - 1.0;
    let mut hi = -cmin + 1.0;
    while score(lo).0 < 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    while score(hi).0 > 0.0 {
        hi += 2.0 * (hi - lo);
    }
    let mut a = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (s, ds) = score(a);
        if s == 0.0 {
            return a;
        }
        if s > 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let newton = a - s / ds;
        let next = if ds < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - a).abs() <= 1e-15 * (1.0 + a.abs()) || hi - lo <= 1e-15 * (1.0 + a.abs()) {
            return next;
        }
        a = next;
    }
    a
}

struct Profile {
    objective: f64,
    alpha: Vec<Vec<f64>>,
}

fn profile(kernel: &LikelihoodKernel, cells: &CellProbabilities, beta: &[f64]) -> Profile {
    let idx = &kernel.index;
    let mut objective = 0.0;
    let mut alpha = Vec::with_capacity(idx.k());
    for k in 0..idx.k() {
        let offsets: Vec<f64> = (0..idx.periods()).map(|t| index_value(idx.regressor(k, t), beta)).collect();
        let row: Vec<f64> = idx.outcomes().iter().map(|y| profile_alpha(kernel.link, &offsets, y)).collect();
        if active(cells, k) {
            for (j, &a) in row.iter().enumerate() {
                let p = cells.p_y[k][j];
                if p > 0.0 && a.is_finite() {
                    objective += cells.p_x[k] * p * log_lik(kernel.link, &offsets, idx.outcome(j), a);
                }
            }
        }
        alpha.push(row);
    }
    Profile { objective, alpha }
}

/// Fixed-effects MLE limit: grid search over `beta_grid`, then golden-section
/// polish between the neighbours of the best grid point (scalar slopes).
pub fn femle(
    kernel: &LikelihoodKernel,
    cells: &CellProbabilities,
    beta_grid: &[Vec<f64>],
    query: &EffectQuery,
) -> Result<FemleResult> {
    if beta_grid.is_empty() {
        return Err(Error::InvalidConfig("empty slope grid".into()));
    }
    let values = map_indexed(beta_grid.len(), |b| profile(kernel, cells, &beta_grid[b]).objective);
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let mut beta = beta_grid[best].clone();
    if beta.len() == 1 && beta_grid.len() > 1 {
        let lo = beta_grid[best.saturating_sub(1)][0];
        let hi = beta_grid[(best + 1).min(beta_grid.len() - 1)][0];
        let f = |b: f64| profile(kernel, cells, &[b]).objective;
        beta = vec![golden_max(f, lo, hi, 1e-12)];
    }
    let prof = profile(kernel, cells, &beta);
    let part = partition_support(&kernel.index, cells, query);
    let mut q_tilde = Vec::with_capacity(cells.k());
    let mut effects = Vec::with_capacity(cells.k());
    for k in 0..cells.k() {
        if !active(cells, k) {
            q_tilde.push(None);
            effects.push(0.0);
            continue;
        }
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for (j, &a) in prof.alpha[k].iter().enumerate() {
            let p = cells.p_y[k][j];
            if p <= 0.0 {
                continue;
            }
            match atoms.iter_mut().find(|(x, _)| *x == a) {
                Some(slot) => slot.1 += p,
                None => atoms.push((a, p)),
            }
        }
        atoms.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));
        let dist = MixingDistribution {
            support: atoms.iter().map(|x| x.0).collect(),
            weights: atoms.iter().map(|x| x.1).collect(),
        };
        effects.push(dist.expect(|a| effect_integrand(kernel.link, a, &beta, query)));
        q_tilde.push(Some(dist));
    }
    let mass: f64 = part.both.iter().map(|&k| cells.p_x[k]).sum();
    let mu_identified =
        if mass > 0.0 { part.both.iter().map(|&k| cells.p_x[k] * effects[k]).sum::<f64>() / mass } else { f64::NAN };
    Ok(FemleResult {
        beta_tilde: beta,
        alpha_hat: prof.alpha,
        q_tilde,
        effects,
        mu_identified,
        objective: prof.objective,
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
