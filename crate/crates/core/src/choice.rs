//! Binary choice likelihoods `prod_t F(x_t'b + a)^y_t (1 - F(x_t'b + a))^(1 - y_t)`.
//!
//! The individual effect `a` ranges over the extended reals; at `a = ±∞`
//! every factor is exactly 0 or 1.

use alloc::vec::Vec;

use crate::panel::{EffectQuery, SupportIndex};
use crate::solvers::special::{logit_cdf, logit_pdf, probit_cdf, probit_pdf};
use crate::{Error, Result};

/// Periods above which products are accumulated in logs.
const LOG_DOMAIN_PERIODS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkFunction {
    Logit,
    Probit,
}

impl LinkFunction {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            LinkFunction::Logit => logit_cdf(x),
            LinkFunction::Probit => probit_cdf(x),
        }
    }

    pub fn pdf(self, x: f64) -> f64 {
        match self {
            LinkFunction::Logit => logit_pdf(x),
            LinkFunction::Probit => probit_pdf(x),
        }
    }

    /// `1 - F(x)` computed as `F(-x)`, which keeps relative accuracy.
    pub fn survival(self, x: f64) -> f64 {
        self.cdf(-x)
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkFunction::Logit => "logit",
            LinkFunction::Probit => "probit",
        }
    }
}

impl core::str::FromStr for LinkFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logit" => Ok(LinkFunction::Logit),
            "probit" => Ok(LinkFunction::Probit),
            other => Err(Error::InvalidConfig(alloc::format!("unknown link `{other}`"))),
        }
    }
}

pub(crate) fn index_value(x: &[i64], beta: &[f64]) -> f64 {
    x.iter().zip(beta).map(|(&v, b)| v as f64 * b).sum()
}

/// Likelihood of outcome patterns given regressor histories.
#[derive(Debug, Clone)]
pub struct LikelihoodKernel {
    pub link: LinkFunction,
    pub index: SupportIndex,
}

impl LikelihoodKernel {
    pub fn new(link: LinkFunction, index: SupportIndex) -> Result<Self> {
        if !index.has_binary_outcomes() {
            return Err(Error::UnsupportedOutcomeAlphabet);
        }
        Ok(Self { link, index })
    }

    fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.index.dim() {
            return Err(Error::DimensionMismatch { expected: self.index.dim(), got: beta.len() });
        }
        Ok(())
    }

    /// Per-period success probabilities `F(x_t'b + a)` and their complements.
    fn period_probs(&self, k: usize, alpha: f64, beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let t = self.index.periods();
        let mut f = Vec::with_capacity(t);
        let mut g = Vec::with_capacity(t);
        for s in 0..t {
            let z = index_value(self.index.regressor(k, s), beta) + alpha;
            f.push(self.link.cdf(z));
            g.push(self.link.survival(z));
        }
        (f, g)
    }

    fn pattern_prob(&self, y: &[i64], f: &[f64], g: &[f64]) -> f64 {
        if y.len() >= LOG_DOMAIN_PERIODS {
            let mut acc = 0.0;
            for ((&yt, &ft), &gt) in y.iter().zip(f).zip(g) {
                let p = if yt == 1 { ft } else { gt };
                if p == 0.0 {
                    return 0.0;
                }
                acc += libm::log(p);
            }
            libm::exp(acc)
        } else {
            y.iter().zip(f).zip(g).map(|((&yt, &ft), &gt)| if yt == 1 { ft } else { gt }).product()
        }
    }

    pub fn likelihood(&self, j: usize, k: usize, alpha: f64, beta: &[f64]) -> Result<f64> {
        self.check_beta(beta)?;
        if k >= self.index.k() {
            return Err(Error::IndexOutOfRange { index: k, len: self.index.k() });
        }
        if j >= self.index.j() {
            return Err(Error::IndexOutOfRange { index: j, len: self.index.j() });
        }
        let (f, g) = self.period_probs(k, alpha, beta);
        Ok(self.pattern_prob(self.index.outcome(j), &f, &g))
    }

    /// Likelihood of every outcome pattern for history `k`.
    pub fn likelihood_column(&self, k: usize, alpha: f64, beta: &[f64]) -> Result<Vec<f64>> {
        self.check_beta(beta)?;
        if k >= self.index.k() {
            return Err(Error::IndexOutOfRange { index: k, len: self.index.k() });
        }
        let (f, g) = self.period_probs(k, alpha, beta);
        Ok(self.index.outcomes().iter().map(|y| self.pattern_prob(y, &f, &g)).collect())
    }

    pub fn effect_integrand(&self, alpha: f64, beta: &[f64], query: &EffectQuery) -> f64 {
        effect_integrand(self.link, alpha, beta, query)
    }
}

/// `[F(x~'b + a) - F(x_'b + a)] / D`.
pub fn effect_integrand(link: LinkFunction, alpha: f64, beta: &[f64], query: &EffectQuery) -> f64 {
    if alpha.is_infinite() {
        return 0.0;
    }
    let hi = link.cdf(index_value(&query.x_tilde, beta) + alpha);
    let lo = link.cdf(index_value(&query.x_bar, beta) + alpha);
    (hi - lo) / query.distance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{full_binary_outcomes, full_binary_support};
    use alloc::vec;

    fn kernel(link: LinkFunction, t: usize) -> LikelihoodKernel {
        LikelihoodKernel::new(link, full_binary_support(t)).unwrap()
    }

    #[test]
    fn single_period_half() {
        let idx = SupportIndex::new(2, 1, vec![vec![0, 0]], full_binary_outcomes(2)).unwrap();
        let k = LikelihoodKernel::new(LinkFunction::Logit, idx).unwrap();
        // P(Y=(1,1)) = 1/4 with both periods at F(0)
        assert_eq!(k.likelihood(3, 0, 0.0, &[0.0]).unwrap(), 0.25);
    }

    #[test]
    fn boundary_effects_are_exact() {
        let k = kernel(LinkFunction::Probit, 3);
        let col = k.likelihood_column(5, f64::INFINITY, &[1.3]).unwrap();
        assert_eq!(col[7], 1.0);
        assert!(col[..7].iter().all(|&v| v == 0.0));
        let col = k.likelihood_column(2, f64::NEG_INFINITY, &[1.3]).unwrap();
        assert_eq!(col[0], 1.0);
        assert!(col[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_period_product_oracle() {
        let k = kernel(LinkFunction::Logit, 2);
        // X = (0,1) is k = 1, Y = (1,0) is j = 2
        let got = k.likelihood(2, 1, 0.0, &[1.0]).unwrap();
        let e = core::f64::consts::E;
        let oracle = 0.5 * (1.0 - e / (1.0 + e));
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn columns_sum_to_one() {
        for link in [LinkFunction::Logit, LinkFunction::Probit] {
            let k = kernel(link, 4);
            for kk in 0..16 {
                for &a in &[f64::NEG_INFINITY, -3.0, -0.4, 0.0, 2.2, f64::INFINITY] {
                    let s: f64 = k.likelihood_column(kk, a, &[-0.7]).unwrap().iter().sum();
                    assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn log_domain_matches_product() {
        let t = 22;
        let idx = SupportIndex::new(t, 1, vec![vec![1; t]], vec![vec![1; t], vec![0; t]]).unwrap();
        let k = LikelihoodKernel::new(LinkFunction::Logit, idx).unwrap();
        let got = k.likelihood(1, 0, 0.5, &[0.5]).unwrap();
        let direct = libm::pow(logit_cdf(1.0), t as f64);
        assert!((got - direct).abs() < 1e-14);
    }

    #[test]
    fn effect_integrand_values() {
        let q = EffectQuery::binary();
        let e = core::f64::consts::E;
        let v = effect_integrand(LinkFunction::Logit, 0.0, &[1.0], &q);
        assert!((v - (e / (1.0 + e) - 0.5)).abs() < 1e-15);
        assert_eq!(effect_integrand(LinkFunction::Probit, 0.3, &[0.0], &q), 0.0);
        assert_eq!(effect_integrand(LinkFunction::Probit, f64::INFINITY, &[2.0], &q), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let k = kernel(LinkFunction::Logit, 2);
        assert!(matches!(k.likelihood(0, 0, 0.0, &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }
}
