//! Data generating processes with exact population cells: binary choice
//! panels with effects correlated with the regressor, stationary Markov
//! regressors, and the normal-threshold regressor design.

use alloc::vec;
use alloc::vec::Vec;

use crate::choice::{effect_integrand, LinkFunction};
use crate::linear_fe::within_plim;
use crate::npbounds::{static_bounds_from_cells, OutcomeBounds};
use crate::panel::{
    full_binary_outcomes, full_binary_support, CellProbabilities, EffectQuery, PanelDataset, SupportIndex,
};
use crate::par::map_indexed;
use crate::rng::{categorical, standard_logistic, standard_normal, task_rng, uniform};
use crate::setid::MixingDistribution;
use crate::solvers::linalg::solve_square;
use crate::solvers::probit_cdf;
use crate::{Error, Result};

/// Largest panel length for which outcome patterns are enumerated.
pub const MAX_ENUMERATED_PERIODS: usize = 8;

/// Random stream used by [`StaticDgp::generate`].
pub const GENERATE_STREAM: u64 = 0x5eed_0001;

/// 31 atoms at `-3, -2.8, ..., 3` carrying the normal mass of the
/// surrounding midpoint cells; the last atom takes the complement.
pub fn honore_tamer_alpha() -> MixingDistribution {
    let support: Vec<f64> = (-15..=15).map(|m| m as f64 / 5.0).collect();
    let mut weights = Vec::with_capacity(support.len());
    let mut prev = 0.0;
    for i in 0..support.len() - 1 {
        let cut = probit_cdf(0.5 * (support[i] + support[i + 1]));
        weights.push(cut - prev);
        prev = cut;
    }
    weights.push(1.0 - weights.iter().sum::<f64>());
    MixingDistribution { support, weights }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSpec {
    /// `a = sqrt(T) (mean(X) - p) / sqrt(p (1 - p))`.
    Correlated,
    /// The discretized normal of [`honore_tamer_alpha`] plus the correlated part.
    HonoreTamerPlusCorrelated,
}

/// `Y_t = 1{X_t b + a + e_t >= 0}` with i.i.d. Bernoulli(`p_x`) regressors
/// and standard logistic or normal errors matching the link.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticDgp {
    pub periods: usize,
    pub p_x: f64,
    pub beta_star: f64,
    pub link: LinkFunction,
    pub alpha_spec: AlphaSpec,
}

impl StaticDgp {
    pub fn new(periods: usize, p_x: f64, beta_star: f64, link: LinkFunction, alpha_spec: AlphaSpec) -> Result<Self> {
        if periods < 2 {
            return Err(Error::InvalidConfig("need at least 2 periods".into()));
        }
        if !(p_x > 0.0 && p_x < 1.0) {
            return Err(Error::InvalidProbability(p_x));
        }
        if !beta_star.is_finite() {
            return Err(Error::InvalidConfig("slope must be finite".into()));
        }
        Ok(Self { periods, p_x, beta_star, link, alpha_spec })
    }

    fn correlated(&self, ones: usize) -> f64 {
        let t = self.periods as f64;
        let xbar = ones as f64 / t;
        libm::sqrt(t) * (xbar - self.p_x) / libm::sqrt(self.p_x * (1.0 - self.p_x))
    }

    /// Distribution of the effect given a history with `ones` ones.
    pub fn alpha_given(&self, ones: usize) -> MixingDistribution {
        let shift = self.correlated(ones);
        match self.alpha_spec {
            AlphaSpec::Correlated => MixingDistribution { support: vec![shift], weights: vec![1.0] },
            AlphaSpec::HonoreTamerPlusCorrelated => {
                let base = honore_tamer_alpha();
                MixingDistribution { support: base.support.iter().map(|a| a + shift).collect(), weights: base.weights }
            }
        }
    }

    fn history_mass(&self, ones: usize) -> f64 {
        libm::pow(self.p_x, ones as f64) * libm::pow(1.0 - self.p_x, (self.periods - ones) as f64)
    }

    /// Exact cells over every binary history and outcome pattern.
    pub fn exact_cells(&self) -> Result<(SupportIndex, CellProbabilities)> {
        if self.periods > MAX_ENUMERATED_PERIODS {
            return Err(Error::TooManyPeriods { max: MAX_ENUMERATED_PERIODS, got: self.periods });
        }
        let index = full_binary_support(self.periods);
        let outcomes = full_binary_outcomes(self.periods);
        let mut p_x = Vec::with_capacity(index.k());
        let mut p_y = Vec::with_capacity(index.k());
        for h in index.histories() {
            let ones = h.iter().filter(|&&v| v == 1).count();
            p_x.push(self.history_mass(ones));
            let alpha = self.alpha_given(ones);
            let mut row = vec![0.0; outcomes.len()];
            for (a, w) in alpha.atoms() {
                let f: Vec<f64> = h.iter().map(|&x| self.link.cdf(x as f64 * self.beta_star + a)).collect();
                let g: Vec<f64> = h.iter().map(|&x| self.link.cdf(-(x as f64 * self.beta_star + a))).collect();
                for (r, y) in row.iter_mut().zip(&outcomes) {
                    let l: f64 = y.iter().enumerate().map(|(t, &yt)| if yt == 1 { f[t] } else { g[t] }).product();
                    *r += w * l;
                }
            }
            p_y.push(row);
        }
        let cells = CellProbabilities::population(p_x, p_y)?;
        Ok((index, cells))
    }

    /// True effect per history for the binary query, indexed like [`full_binary_support`].
    pub fn history_effects(&self, index: &SupportIndex, query: &EffectQuery) -> Vec<f64> {
        index
            .histories()
            .iter()
            .map(|h| {
                let ones = h.iter().filter(|&&v| v == 1).count();
                self.alpha_given(ones).expect(|a| effect_integrand(self.link, a, &[self.beta_star], query))
            })
            .collect()
    }

    /// Population average effect.
    pub fn mu0(&self, query: &EffectQuery) -> f64 {
        (0..=self.periods)
            .map(|s| {
                binomial(self.periods, s) as f64
                    * self.history_mass(s)
                    * self.alpha_given(s).expect(|a| effect_integrand(self.link, a, &[self.beta_star], query))
            })
            .sum()
    }

    /// Seeded sample of `n` units; unit `i` draws from its own stream.
    pub fn generate(&self, n: usize, seed: u64) -> Result<PanelDataset> {
        if n == 0 {
            return Err(Error::InvalidConfig("sample size must be positive".into()));
        }
        let t = self.periods;
        let base = honore_tamer_alpha();
        let units = map_indexed(n, |i| {
            let mut rng = task_rng(seed, GENERATE_STREAM, i as u64);
            let x: Vec<i64> = (0..t).map(|_| (uniform(&mut rng) < self.p_x) as i64).collect();
            let ones = x.iter().filter(|&&v| v == 1).count();
            let mut alpha = self.correlated(ones);
            if self.alpha_spec == AlphaSpec::HonoreTamerPlusCorrelated {
                alpha += base.support[categorical(&mut rng, &base.weights)];
            }
            let y: Vec<i64> = x
                .iter()
                .map(|&xt| {
                    let e = match self.link {
                        LinkFunction::Logit => standard_logistic(&mut rng),
                        LinkFunction::Probit => standard_normal(&mut rng),
                    };
                    (xt as f64 * self.beta_star + alpha + e >= 0.0) as i64
                })
                .collect();
            (y, x)
        });
        PanelDataset::from_units(t, 1, &units)
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for i in 0..k {
        c = c * (n - i) as u64 / (i + 1) as u64;
    }
    c
}

/// One cell of the linear-estimator bias surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub periods: usize,
    pub p_x: f64,
    pub mu0: f64,
    pub within_plim: f64,
    pub average_slope_plim: f64,
    /// `(within - mu0) / mu0`, reported as 0 when `mu0 = 0`.
    pub within_bias: f64,
    pub average_slope_bias: f64,
}

fn relative(x: f64, mu0: f64) -> f64 {
    if mu0 == 0.0 {
        if x == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(x)
        }
    } else {
        (x - mu0) / mu0
    }
}

/// Limits of the within and average-slope estimators against the average
/// effect in the probit design with slope `beta_star` and correlated effects.
pub fn table1_cell(periods: usize, p_x: f64, beta_star: f64) -> Result<Table1Row> {
    let dgp = StaticDgp::new(periods, p_x, beta_star, LinkFunction::Probit, AlphaSpec::Correlated)?;
    let q = EffectQuery::binary();
    // histories with equal counts of ones share mass per history and effect
    let t = periods;
    let mass: Vec<f64> = (0..=t).map(|s| binomial(t, s) as f64 * dgp.history_mass(s)).collect();
    let effect: Vec<f64> = (0..=t)
        .map(|s| dgp.alpha_given(s).expect(|a| effect_integrand(LinkFunction::Probit, a, &[beta_star], &q)))
        .collect();
    let mu0: f64 = mass.iter().zip(&effect).map(|(m, e)| m * e).sum();
    // grouped histories: one representative per count of ones
    let reps: Vec<Vec<i64>> = (0..=t).map(|s| (0..t).map(|i| (i >= t - s) as i64).collect()).collect();
    let index = SupportIndex::new(t, 1, reps, Vec::new())?;
    let cells = CellProbabilities {
        p_x: mass.clone(),
        p_y: vec![Vec::new(); t + 1],
        counts: Vec::new(),
        present: mass.iter().map(|&m| m > 0.0).collect(),
        n_eff: 0,
    };
    let within = within_plim(&index, &cells, &effect)?.plim;
    let inner: f64 = mass[1..t].iter().sum();
    let avg = mass[1..t].iter().zip(&effect[1..t]).map(|(m, e)| m * e).sum::<f64>() / inner;
    Ok(Table1Row {
        periods,
        p_x,
        mu0,
        within_plim: within,
        average_slope_plim: avg,
        within_bias: relative(within, mu0),
        average_slope_bias: relative(avg, mu0),
    })
}

/// Bias surface over a grid of panel lengths and regressor frequencies (slope 1).
pub fn table1_surface(periods: &[usize], p_list: &[f64]) -> Result<Vec<Table1Row>> {
    let cells: Vec<(usize, f64)> = periods.iter().flat_map(|&t| p_list.iter().map(move |&p| (t, p))).collect();
    map_indexed(cells.len(), |i| table1_cell(cells[i].0, cells[i].1, 1.0)).into_iter().collect()
}

/// Binary regressor that is stationary Markov of order `order` given a
/// discrete effect, with outcome means `F(x b + a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovDgp {
    pub order: usize,
    pub alpha: MixingDistribution,
    /// `Pr(X_t = 0 | previous `order` values all 0, a)` per atom.
    pub stay_zero: Vec<f64>,
    /// `Pr(X_t = 1 | previous values all 1, a)` per atom.
    pub stay_one: Vec<f64>,
    /// `Pr(X_t = 1 | mixed previous values, a)` per atom.
    pub mixed_one: Vec<f64>,
    pub link: LinkFunction,
    pub beta: f64,
}

/// Bound width against the exponential envelope at one panel length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovBoundRow {
    pub periods: usize,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub mu0: f64,
    pub max_deviation: f64,
    /// `2 (B_u - B_l) (1 - eps)^(T - order)`.
    pub envelope: f64,
}

impl MarkovDgp {
    /// I.i.d. Bernoulli(`p`) regressor (order 0) with a point-mass effect.
    pub fn iid(p: f64, link: LinkFunction, beta: f64) -> Self {
        Self {
            order: 0,
            alpha: MixingDistribution { support: vec![0.0], weights: vec![1.0] },
            stay_zero: vec![1.0 - p],
            stay_one: vec![p],
            mixed_one: vec![p],
            link,
            beta,
        }
    }

    fn validate(&self) -> Result<()> {
        let m = self.alpha.support.len();
        for v in [&self.stay_zero, &self.stay_one, &self.mixed_one] {
            if v.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: v.len() });
            }
            if let Some(&p) = v.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
                return Err(Error::InvalidProbability(p));
            }
        }
        if self.order == 0 && self.stay_zero.iter().zip(&self.stay_one).any(|(a, b)| (a + b - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidConfig("order-0 chains need stay_zero = 1 - stay_one".into()));
        }
        Ok(())
    }

    /// `max(max p^1, max p^K)` over atoms with mass, i.e. `1 - eps`.
    pub fn persistence(&self) -> f64 {
        self.alpha
            .atoms()
            .map(|(a, _)| self.alpha.support.iter().position(|&s| s == a).unwrap())
            .map(|i| self.stay_zero[i].max(self.stay_one[i]))
            .fold(0.0, f64::max)
    }

    fn prob_one(&self, atom: usize, prev: &[i64]) -> f64 {
        if self.order == 0 {
            return self.stay_one[atom];
        }
        let last = &prev[prev.len() - self.order..];
        if last.iter().all(|&v| v == 0) {
            1.0 - self.stay_zero[atom]
        } else if last.iter().all(|&v| v == 1) {
            self.stay_one[atom]
        } else {
            self.mixed_one[atom]
        }
    }

    /// Stationary law of the first `order` values given atom `atom`.
    fn initial(&self, atom: usize) -> Vec<f64> {
        let j = self.order;
        let s = 1usize << j;
        if j == 0 {
            return vec![1.0];
        }
        let states = full_binary_outcomes(j);
        // rows: pi P = pi, with the last equation replaced by sum(pi) = 1
        let mut a = vec![vec![0.0; s]; s];
        for (from, st) in states.iter().enumerate() {
            let p1 = self.prob_one(atom, st);
            for (x, p) in [(0i64, 1.0 - p1), (1, p1)] {
                let mut next = st[1..].to_vec();
                next.push(x);
                let to = states.iter().position(|v| *v == next).unwrap();
                a[to][from] += p;
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] -= 1.0;
        }
        a[s - 1] = vec![1.0; s];
        let mut b = vec![0.0; s];
        b[s - 1] = 1.0;
        match solve_square(a, b) {
            Some(pi) => pi.into_iter().map(|v| v.max(0.0)).collect(),
            // reducible chain: fall back to uniform starting states
            None => vec![1.0 / s as f64; s],
        }
    }

    fn path_prob(&self, atom: usize, init: &[f64], h: &[i64]) -> f64 {
        let j = self.order;
        let start = if j == 0 {
            1.0
        } else {
            let code = h[..j].iter().fold(0usize, |c, &v| (c << 1) | v as usize);
            init[code]
        };
        let mut p = start;
        for t in j..h.len() {
            let p1 = self.prob_one(atom, &h[..t]);
            p *= if h[t] == 1 { p1 } else { 1.0 - p1 };
            if p == 0.0 {
                break;
            }
        }
        p
    }

    /// Exact history masses and outcome means `E[F(X_t b + a) | X = X^k]`.
    pub fn exact_means(&self, periods: usize) -> Result<(SupportIndex, CellProbabilities, crate::panel::CellMeans)> {
        self.validate()?;
        if periods < self.order.max(2) {
            return Err(Error::InvalidConfig("panel shorter than the Markov order".into()));
        }
        let histories = full_binary_outcomes(periods);
        let inits: Vec<Vec<f64>> = (0..self.alpha.support.len()).map(|m| self.initial(m)).collect();
        let mut p_x = Vec::with_capacity(histories.len());
        let mut m = Vec::with_capacity(histories.len());
        for h in &histories {
            let mut mass = 0.0;
            let mut num = vec![0.0; periods];
            for (atom, (&a, &w)) in self.alpha.support.iter().zip(&self.alpha.weights).enumerate() {
                if w == 0.0 {
                    continue;
                }
                let p = w * self.path_prob(atom, &inits[atom], h);
                mass += p;
                for (t, v) in num.iter_mut().enumerate() {
                    *v += p * self.link.cdf(h[t] as f64 * self.beta + a);
                }
            }
            p_x.push(mass);
            m.push(if mass > 0.0 { num.iter().map(|v| v / mass).collect() } else { Vec::new() });
        }
        let total: f64 = p_x.iter().sum();
        p_x.iter_mut().for_each(|p| *p /= total);
        let present: Vec<bool> = p_x.iter().map(|&p| p > 0.0).collect();
        let index = SupportIndex::new(periods, 1, histories, Vec::new())?;
        let cells = CellProbabilities {
            p_x,
            p_y: vec![Vec::new(); index.k()],
            counts: Vec::new(),
            present: present.clone(),
            n_eff: 0,
        };
        Ok((index, cells, crate::panel::CellMeans { m, present }))
    }

    /// Seeded sample of `n` units with `Y_t = 1{X_t b + a + e_t >= 0}`, the
    /// chain started from its stationary law given the effect.
    pub fn generate(&self, periods: usize, n: usize, seed: u64) -> Result<PanelDataset> {
        self.validate()?;
        if n == 0 || periods < self.order.max(2) {
            return Err(Error::InvalidConfig("need n >= 1 and a panel at least as long as the Markov order".into()));
        }
        let inits: Vec<Vec<f64>> = (0..self.alpha.support.len()).map(|m| self.initial(m)).collect();
        let states = full_binary_outcomes(self.order);
        let units = map_indexed(n, |i| {
            let mut rng = task_rng(seed, GENERATE_STREAM, i as u64);
            let atom = categorical(&mut rng, &self.alpha.weights);
            let a = self.alpha.support[atom];
            let mut x: Vec<i64> =
                if self.order == 0 { Vec::new() } else { states[categorical(&mut rng, &inits[atom])].clone() };
            while x.len() < periods {
                let p1 = self.prob_one(atom, &x);
                x.push((uniform(&mut rng) < p1) as i64);
            }
            let y = x
                .iter()
                .map(|&xt| {
                    let e = match self.link {
                        LinkFunction::Logit => standard_logistic(&mut rng),
                        LinkFunction::Probit => standard_normal(&mut rng),
                    };
                    (xt as f64 * self.beta + a + e >= 0.0) as i64
                })
                .collect();
            (y, x)
        });
        PanelDataset::from_units(periods, 1, &units)
    }

    pub fn mu0(&self) -> f64 {
        self.alpha.expect(|a| effect_integrand(self.link, a, &[self.beta], &EffectQuery::binary()))
    }
}

/// Static bounds on exact Markov cells for each panel length, with the
/// exponential envelope for `F`-valued outcomes (`B = [0, 1]`).
pub fn markov_bound_decay(dgp: &MarkovDgp, periods: &[usize]) -> Result<Vec<MarkovBoundRow>> {
    let q = EffectQuery::binary();
    let b = OutcomeBounds::unit();
    let rho = dgp.persistence();
    let mu0 = dgp.mu0();
    periods
        .iter()
        .map(|&t| {
            let (index, cells, means) = dgp.exact_means(t)?;
            let part = crate::linear_fe::partition_support(&index, &cells, &q);
            let est = crate::npbounds::static_bounds(&means, &cells, &index, &part, &q, b, false)?;
            let exponent = t.saturating_sub(dgp.order) as f64;
            Ok(MarkovBoundRow {
                periods: t,
                lower: est.mu_lower,
                upper: est.mu_upper,
                width: est.width(),
                mu0,
                max_deviation: (est.mu_lower - mu0).abs().max((est.mu_upper - mu0).abs()),
                envelope: 2.0 * b.width() * libm::pow(rho, exponent),
            })
        })
        .collect()
}

/// `Pr(X_1 = ... = X_T = 1)` when `X_t = 1(a - e_t > 0)` with `a, e_t` standard
/// normal, by composite Simpson quadrature of `∫ Φ(a)^T φ(a) da`.
pub fn normal_threshold_all_ones(periods: usize) -> f64 {
    let (lo, hi, n) = (-12.0, 12.0, 4800usize);
    let h = (hi - lo) / n as f64;
    let f = |a: f64| libm::pow(probit_cdf(a), periods as f64) * crate::solvers::special::probit_pdf(a);
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Static bound width under the normal-threshold regressor design (`B = [0, 1]`):
/// the masses of the two constant histories.
pub fn normal_threshold_width(periods: usize) -> f64 {
    // by symmetry Pr(all zeros) = Pr(all ones)
    2.0 * normal_threshold_all_ones(periods)
}

/// Conditional-mean bounds on exact static cells, with the true average effect.
pub fn static_sandwich(dgp: &StaticDgp, monotone: bool) -> Result<(f64, f64, f64)> {
    let q = EffectQuery::binary();
    let (index, cells) = dgp.exact_cells()?;
    let est = static_bounds_from_cells(&index, &cells, &q, OutcomeBounds::unit(), monotone)?;
    Ok((est.mu_lower, dgp.mu0(&q), est.mu_upper))
}
