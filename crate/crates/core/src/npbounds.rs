//! Nonparametric bounds on the average marginal effect in the conditional
//! mean model, for strictly exogenous and for predetermined regressors.

use alloc::vec;
use alloc::vec::Vec;

use crate::linear_fe::{partition_support, SupportPartition};
use crate::panel::{
    cell_frequencies, cell_means, CellMeans, CellProbabilities, EffectQuery, PanelDataset, SupportIndex,
};
use crate::{Error, Result};

/// Tolerance below which an identified effect carries no sign information.
const SIGN_TOL: f64 = 1e-9;

/// Bounds on `m(x, a) / D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeBounds {
    pub lower: f64,
    pub upper: f64,
}

impl OutcomeBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::InvalidConfig(alloc::format!("outcome bounds [{lower}, {upper}] are not an interval")));
        }
        Ok(Self { lower, upper })
    }

    pub fn unit() -> Self {
        Self { lower: 0.0, upper: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

/// What is known about the effect for one history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistoryEffect {
    Point(f64),
    Interval(f64, f64),
}

impl HistoryEffect {
    pub fn lower(&self) -> f64 {
        match *self {
            HistoryEffect::Point(v) => v,
            HistoryEffect::Interval(l, _) => l,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            HistoryEffect::Point(v) => v,
            HistoryEffect::Interval(_, u) => u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundsMasses {
    Static {
        p0: f64,
        only_tilde: f64,
        only_bar: f64,
    },
    /// Masses of histories in which `x~` (resp. `x_`) never occurs.
    Dynamic {
        never_tilde: f64,
        never_bar: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsEstimate {
    pub mu_lower: f64,
    pub mu_upper: f64,
    /// Mass-weighted identified effects (static) or the first-occurrence contrast (dynamic).
    pub identified_component: f64,
    pub masses: BoundsMasses,
    pub monotone_sign: Option<Sign>,
    /// Per-history effect bounds (static case); `None` for absent histories.
    pub per_history: Vec<Option<(f64, f64)>>,
}

impl BoundsEstimate {
    pub fn width(&self) -> f64 {
        self.mu_upper - self.mu_lower
    }
}

/// Effect for history `k` from its conditional means.
///
/// When a value occurs in several periods the means are averaged over them.
pub fn identify_mu_k(
    means: &CellMeans,
    index: &SupportIndex,
    k: usize,
    query: &EffectQuery,
    bounds: OutcomeBounds,
) -> Result<HistoryEffect> {
    if k >= index.k() {
        return Err(Error::IndexOutOfRange { index: k, len: index.k() });
    }
    let hi = index.periods_with(k, &query.x_tilde);
    let lo = index.periods_with(k, &query.x_bar);
    let (bl, bu) = (bounds.lower, bounds.upper);
    let absent = !means.present[k];
    Ok(match (hi.is_empty() || absent, lo.is_empty() || absent) {
        (false, false) => HistoryEffect::Point(means.average(k, &hi) - means.average(k, &lo)),
        (false, true) => {
            let m = means.average(k, &hi);
            HistoryEffect::Interval(m - bu, m - bl)
        }
        (true, false) => {
            let m = means.average(k, &lo);
            HistoryEffect::Interval(bl - m, bu - m)
        }
        (true, true) => HistoryEffect::Interval(bl - bu, bu - bl),
    })
}

fn identified_sign(effects: &[(usize, f64)]) -> Result<Sign> {
    if effects.is_empty() {
        return Err(Error::SignNotIdentified);
    }
    let mut sign = None;
    for &(_, v) in effects {
        if v.abs() <= SIGN_TOL {
            continue;
        }
        let s = if v > 0.0 { Sign::Positive } else { Sign::Negative };
        match sign {
            None => sign = Some(s),
            Some(prev) if prev != s => return Err(Error::SignConflict),
            _ => {}
        }
    }
    sign.ok_or(Error::SignNotIdentified)
}

fn clamp_piece(lower: f64, upper: f64, sign: Option<Sign>) -> (f64, f64) {
    match sign {
        Some(Sign::Positive) => (lower.max(0.0), upper),
        Some(Sign::Negative) => (lower, upper.min(0.0)),
        None => (lower, upper),
    }
}

/// Bounds for strictly exogenous regressors from cell means and masses.
pub fn static_bounds(
    means: &CellMeans,
    cells: &CellProbabilities,
    index: &SupportIndex,
    partition: &SupportPartition,
    query: &EffectQuery,
    bounds: OutcomeBounds,
    monotone: bool,
) -> Result<BoundsEstimate> {
    let mut per_history = vec![None; index.k()];
    let mut identified = Vec::new();
    for &k in &partition.both {
        if cells.present[k] {
            let v = identify_mu_k(means, index, k, query, bounds)?.lower();
            identified.push((k, v));
        }
    }
    let sign = if monotone { Some(identified_sign(&identified)?) } else { None };
    let identified_component: f64 = identified.iter().map(|&(k, v)| cells.p_x[k] * v).sum();
    for &(k, v) in &identified {
        per_history[k] = Some((v, v));
    }
    let mut lower = identified_component;
    let mut upper = identified_component;
    for &k in partition.only_tilde.iter().chain(&partition.only_bar) {
        if !cells.present[k] {
            continue;
        }
        let e = identify_mu_k(means, index, k, query, bounds)?;
        let (l, u) = clamp_piece(e.lower(), e.upper(), sign);
        per_history[k] = Some((l, u));
        lower += cells.p_x[k] * l;
        upper += cells.p_x[k] * u;
    }
    let (l0, u0) = clamp_piece(bounds.lower - bounds.upper, bounds.upper - bounds.lower, sign);
    for &k in &partition.neither {
        if cells.present[k] {
            per_history[k] = Some((l0, u0));
        }
    }
    lower += partition.p0 * l0;
    upper += partition.p0 * u0;
    Ok(BoundsEstimate {
        mu_lower: lower,
        mu_upper: upper,
        identified_component,
        masses: BoundsMasses::Static {
            p0: partition.p0,
            only_tilde: partition.mass(cells, &partition.only_tilde),
            only_bar: partition.mass(cells, &partition.only_bar),
        },
        monotone_sign: sign,
        per_history,
    })
}

/// Static bounds on a cell table (population or empirical).
pub fn static_bounds_from_cells(
    index: &SupportIndex,
    cells: &CellProbabilities,
    query: &EffectQuery,
    bounds: OutcomeBounds,
    monotone: bool,
) -> Result<BoundsEstimate> {
    let means = CellMeans::from_cells(index, cells, query.distance);
    let part = partition_support(index, cells, query);
    static_bounds(&means, cells, index, &part, query, bounds, monotone)
}

/// Static bounds estimated from a panel.
pub fn static_bounds_from_data(
    data: &PanelDataset,
    index: &SupportIndex,
    query: &EffectQuery,
    bounds: OutcomeBounds,
    monotone: bool,
) -> Result<BoundsEstimate> {
    let cells = cell_frequencies(data, index)?;
    let means = cell_means(data, index, query)?;
    let part = partition_support(index, &cells, query);
    static_bounds(&means, &cells, index, &part, query, bounds, monotone)
}

/// First period at which `x` occurs in a history of `T` regressor vectors.
fn first_occurrence(history: &[i64], dim: usize, x: &[i64]) -> Option<usize> {
    history.chunks(dim).position(|v| v == x)
}

/// Bounds for predetermined regressors, built on first-occurrence partitions.
pub fn dynamic_bounds(data: &PanelDataset, query: &EffectQuery, bounds: OutcomeBounds) -> Result<BoundsEstimate> {
    if query.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: query.dim() });
    }
    let n = data.n() as f64;
    let contrib = dynamic_unit_terms(data, query);
    let delta = contrib.iter().map(|c| c.0).sum::<f64>() / n / query.distance;
    let never_tilde = contrib.iter().filter(|c| c.1).count() as f64 / n;
    let never_bar = contrib.iter().filter(|c| c.2).count() as f64 / n;
    Ok(dynamic_estimate(delta, never_tilde, never_bar, bounds))
}

/// Population version of [`dynamic_bounds`] on a cell table.
pub fn dynamic_bounds_from_cells(
    index: &SupportIndex,
    cells: &CellProbabilities,
    query: &EffectQuery,
    bounds: OutcomeBounds,
) -> Result<BoundsEstimate> {
    let means = CellMeans::from_cells(index, cells, query.distance);
    let mut delta = 0.0;
    let (mut never_tilde, mut never_bar) = (0.0, 0.0);
    for k in 0..index.k() {
        if !cells.present[k] {
            continue;
        }
        let h = index.history(k);
        match first_occurrence(h, index.dim(), &query.x_tilde) {
            Some(t) => delta += cells.p_x[k] * means.m[k][t],
            None => never_tilde += cells.p_x[k],
        }
        match first_occurrence(h, index.dim(), &query.x_bar) {
            Some(t) => delta -= cells.p_x[k] * means.m[k][t],
            None => never_bar += cells.p_x[k],
        }
    }
    // unobserved histories contain neither value
    let missing = 1.0 - cells.p_x.iter().zip(&cells.present).filter(|(_, &p)| p).map(|(m, _)| m).sum::<f64>();
    never_tilde += missing.max(0.0);
    never_bar += missing.max(0.0);
    Ok(dynamic_estimate(delta, never_tilde, never_bar, bounds))
}

fn dynamic_estimate(delta: f64, never_tilde: f64, never_bar: f64, b: OutcomeBounds) -> BoundsEstimate {
    BoundsEstimate {
        mu_lower: delta + b.lower * never_tilde - b.upper * never_bar,
        mu_upper: delta + b.upper * never_tilde - b.lower * never_bar,
        identified_component: delta,
        masses: BoundsMasses::Dynamic { never_tilde, never_bar },
        monotone_sign: None,
        per_history: Vec::new(),
    }
}

/// Per unit: outcome contrast at first occurrences (not yet divided by `D`),
/// and whether `x~` / `x_` never occur.
fn dynamic_unit_terms(data: &PanelDataset, query: &EffectQuery) -> Vec<(f64, bool, bool)> {
    (0..data.n())
        .map(|i| {
            let h = data.history(i);
            let y = data.outcomes(i);
            let ft = first_occurrence(h, data.dim(), &query.x_tilde);
            let fb = first_occurrence(h, data.dim(), &query.x_bar);
            let mut c = 0.0;
            if let Some(t) = ft {
                c += y[t] as f64;
            }
            if let Some(t) = fb {
                c -= y[t] as f64;
            }
            (c, ft.is_none(), fb.is_none())
        })
        .collect()
}

/// Which bound estimator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsModel {
    Static { monotone: bool },
    Dynamic,
}

/// Per-unit terms whose sample means are the lower and upper bound estimates
/// (up to the monotone clamp, which is held fixed at its estimated pattern).
pub fn unit_contributions(
    data: &PanelDataset,
    index: &SupportIndex,
    query: &EffectQuery,
    bounds: OutcomeBounds,
    model: BoundsModel,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = query.distance;
    match model {
        BoundsModel::Dynamic => {
            let terms = dynamic_unit_terms(data, query);
            Ok(terms
                .iter()
                .map(|&(c, nt, nb)| {
                    let (nt, nb) = (nt as u8 as f64, nb as u8 as f64);
                    (c / d + bounds.lower * nt - bounds.upper * nb, c / d + bounds.upper * nt - bounds.lower * nb)
                })
                .unzip())
        }
        BoundsModel::Static { monotone } => {
            let est = static_bounds_from_data(data, index, query, bounds, monotone)?;
            let means = cell_means(data, index, query)?;
            let (bl, bu) = (bounds.lower, bounds.upper);
            let mut lo = Vec::with_capacity(data.n());
            let mut hi = Vec::with_capacity(data.n());
            for i in 0..data.n() {
                let k = index.find_history(data.history(i)).ok_or(Error::UnknownHistory { unit: i })?;
                let y = data.outcomes(i);
                let t_hi = index.periods_with(k, &query.x_tilde);
                let t_lo = index.periods_with(k, &query.x_bar);
                let avg = |ts: &[usize]| ts.iter().map(|&t| y[t] as f64).sum::<f64>() / ts.len() as f64 / d;
                let raw = match (t_hi.is_empty(), t_lo.is_empty()) {
                    (false, false) => {
                        let v = avg(&t_hi) - avg(&t_lo);
                        (v, v)
                    }
                    (false, true) => (avg(&t_hi) - bu, avg(&t_hi) - bl),
                    (true, false) => (bl - avg(&t_lo), bu - avg(&t_lo)),
                    (true, true) => (bl - bu, bu - bl),
                };
                // a clamped history contributes the constant it was clamped to
                let (group_l, group_u) = est.per_history[k].expect("observed history");
                let e = identify_mu_k(&means, index, k, query, bounds)?;
                let (l_raw, u_raw) = (e.lower(), e.upper());
                lo.push(if group_l != l_raw { group_l } else { raw.0 });
                hi.push(if group_u != u_raw { group_u } else { raw.1 });
            }
            Ok((lo, hi))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{enumerate_support, full_binary_support};

    #[test]
    fn mu_k_point_and_intervals() {
        let idx = full_binary_support(2);
        let means = CellMeans {
            m: vec![vec![0.3, 0.3], vec![0.2, 0.7], vec![0.5, 0.5], vec![0.6, 0.6]],
            present: vec![true; 4],
        };
        let q = EffectQuery::binary();
        let b = OutcomeBounds::unit();
        assert!(
            matches!(identify_mu_k(&means, &idx, 1, &q, b).unwrap(), HistoryEffect::Point(v) if (v - 0.5).abs() < 1e-15)
        );
        let e = identify_mu_k(&means, &idx, 3, &q, b).unwrap();
        assert!((e.lower() + 0.4).abs() < 1e-15 && (e.upper() - 0.6).abs() < 1e-15);
        let e = identify_mu_k(&means, &idx, 0, &q, b).unwrap();
        assert!((e.lower() + 0.3).abs() < 1e-15 && (e.upper() - 0.7).abs() < 1e-15);
        let degenerate = OutcomeBounds::new(0.4, 0.4).unwrap();
        let e = identify_mu_k(&means, &idx, 3, &q, degenerate).unwrap();
        assert_eq!(e.lower(), e.upper());
        assert!(identify_mu_k(&means, &idx, 9, &q, b).is_err());
    }

    fn binary_instance() -> (SupportIndex, CellProbabilities, CellMeans) {
        // masses (0.25, 0.25) at the constant histories, switchers carry 0.2 of effect
        let idx = full_binary_support(2);
        let cells = CellProbabilities::population(vec![0.25, 0.25, 0.25, 0.25], vec![vec![0.25; 4]; 4]).unwrap();
        let means = CellMeans {
            m: vec![vec![0.1, 0.1], vec![0.1, 0.5], vec![0.5, 0.1], vec![0.9, 0.9]],
            present: vec![true; 4],
        };
        (idx, cells, means)
    }

    #[test]
    fn binary_bounds_arithmetic() {
        let (idx, cells, means) = binary_instance();
        let q = EffectQuery::binary();
        let part = partition_support(&idx, &cells, &q);
        let b = static_bounds(&means, &cells, &idx, &part, &q, OutcomeBounds::unit(), false).unwrap();
        assert!((b.identified_component - 0.2).abs() < 1e-15);
        assert!((b.mu_lower - 0.15).abs() < 1e-15);
        assert!((b.mu_upper - 0.65).abs() < 1e-15);
        let m = static_bounds(&means, &cells, &idx, &part, &q, OutcomeBounds::unit(), true).unwrap();
        assert_eq!(m.monotone_sign, Some(Sign::Positive));
        assert!((m.mu_lower - 0.2).abs() < 1e-15);
        assert!((m.mu_upper - 0.65).abs() < 1e-15);
    }

    #[test]
    fn point_identification_when_everyone_switches() {
        let idx = full_binary_support(2);
        let cells = CellProbabilities::population(vec![0.0, 0.5, 0.5, 0.0], vec![vec![0.25; 4]; 4]).unwrap();
        let b = static_bounds_from_cells(&idx, &cells, &EffectQuery::binary(), OutcomeBounds::unit(), false).unwrap();
        assert_eq!(b.mu_lower, b.mu_upper);
    }

    #[test]
    fn sign_rules() {
        let idx = full_binary_support(2);
        let cells = CellProbabilities::population(vec![0.5, 0.0, 0.0, 0.5], vec![vec![0.25; 4]; 4]).unwrap();
        let r = static_bounds_from_cells(&idx, &cells, &EffectQuery::binary(), OutcomeBounds::unit(), true);
        assert_eq!(r, Err(Error::SignNotIdentified));
        let (idx, cells, mut means) = binary_instance();
        means.m[2] = vec![0.1, 0.5];
        let q = EffectQuery::binary();
        let part = partition_support(&idx, &cells, &q);
        let r = static_bounds(&means, &cells, &idx, &part, &q, OutcomeBounds::unit(), true);
        assert_eq!(r, Err(Error::SignConflict));
    }

    #[test]
    fn lagged_outcome_example() {
        // X_t = Y_{t-1}; bounds are delta - P(never 0) and delta + P(never 1)
        let units = [
            (vec![1, 1, 0], vec![0, 1, 1]),
            (vec![0, 0, 1], vec![1, 0, 0]),
            (vec![1, 1, 1], vec![1, 1, 1]),
            (vec![0, 1, 0], vec![0, 0, 1]),
        ];
        let d = PanelDataset::from_units(3, 1, &units).unwrap();
        let q = EffectQuery::binary();
        let b = dynamic_bounds(&d, &q, OutcomeBounds::unit()).unwrap();
        // brute force over units: first x~ period outcome minus first x_ period outcome
        let delta = ((1.0 - 1.0) + (0.0 - 0.0) + 1.0 + (0.0 - 0.0)) / 4.0;
        let never0 = 0.25;
        let never1 = 0.0;
        assert!((b.identified_component - delta).abs() < 1e-15);
        assert!((b.mu_lower - (delta - never0)).abs() < 1e-15);
        assert!((b.mu_upper - (delta + never1)).abs() < 1e-15);
        assert!((b.width() - (never0 + never1)).abs() < 1e-15);
    }

    #[test]
    fn dynamic_cells_match_data() {
        let units = [
            (vec![1, 1, 0], vec![0, 1, 1]),
            (vec![0, 0, 1], vec![1, 0, 0]),
            (vec![1, 1, 1], vec![1, 1, 1]),
            (vec![0, 1, 0], vec![0, 0, 1]),
            (vec![0, 1, 1], vec![0, 0, 1]),
        ];
        let d = PanelDataset::from_units(3, 1, &units).unwrap();
        let idx = enumerate_support(&d, true).unwrap();
        let c = cell_frequencies(&d, &idx).unwrap();
        let q = EffectQuery::binary();
        let a = dynamic_bounds(&d, &q, OutcomeBounds::unit()).unwrap();
        let b = dynamic_bounds_from_cells(&idx, &c, &q, OutcomeBounds::unit()).unwrap();
        assert!((a.mu_lower - b.mu_lower).abs() < 1e-15 && (a.mu_upper - b.mu_upper).abs() < 1e-15);
    }

    #[test]
    fn unit_contributions_average_to_estimates() {
        let units = [
            (vec![1, 1, 0], vec![0, 1, 1]),
            (vec![0, 0, 1], vec![1, 0, 0]),
            (vec![1, 1, 1], vec![1, 1, 1]),
            (vec![0, 1, 0], vec![0, 0, 1]),
            (vec![0, 1, 1], vec![0, 0, 0]),
            (vec![1, 0, 1], vec![0, 1, 0]),
        ];
        let d = PanelDataset::from_units(3, 1, &units).unwrap();
        let idx = enumerate_support(&d, true).unwrap();
        let q = EffectQuery::binary();
        let b = OutcomeBounds::unit();
        for model in
            [BoundsModel::Static { monotone: false }, BoundsModel::Static { monotone: true }, BoundsModel::Dynamic]
        {
            let (lo, hi) = unit_contributions(&d, &idx, &q, b, model).unwrap();
            let est = match model {
                BoundsModel::Static { monotone } => static_bounds_from_data(&d, &idx, &q, b, monotone).unwrap(),
                BoundsModel::Dynamic => dynamic_bounds(&d, &q, b).unwrap(),
            };
            let n = d.n() as f64;
            assert!((lo.iter().sum::<f64>() / n - est.mu_lower).abs() < 1e-14, "{model:?}");
            assert!((hi.iter().sum::<f64>() / n - est.mu_upper).abs() < 1e-14, "{model:?}");
        }
    }
}
