//! SU preference lists, proposal utilities, and the PU-side utility.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Result, Scalar};

/// What an SU sorts its bands by before proposing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalOrder {
    /// Ascending detection statistic: most confidently vacant band first.
    #[default]
    Detection,
    /// Descending proposal utility.
    Utility,
}

/// Whether bands with non-positive utility stay in an SU's list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListPolicy {
    /// Keep only bands with `v > 0`.
    #[default]
    PositiveOnly,
    /// Keep every band, as plain deferred acceptance does.
    Full,
}

/// `v = -alpha * delta + (1 - alpha) * eta`.
pub fn su_utility<T: Scalar>(delta: T, eta: T, alpha: T) -> T {
    -alpha * delta + (T::one() - alpha) * eta
}

/// Per-SU proposal lists together with the utility each proposal carries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalTable<T> {
    utilities: Matrix<T>,
    lists: Vec<Vec<usize>>,
    /// `rank[m][n]`: position of band `n` in SU `m`'s list.
    rank: Vec<Vec<Option<usize>>>,
}

impl<T: Scalar> ProposalTable<T> {
    /// Builds a table from explicit lists. Rejects out-of-range or repeated bands.
    pub fn from_lists(utilities: Matrix<T>, lists: Vec<Vec<usize>>) -> Result<Self> {
        if lists.len() != utilities.rows() {
            return Err(Error::Config(format!(
                "{} preference lists for {} SUs",
                lists.len(),
                utilities.rows()
            )));
        }
        let num_pus = utilities.cols();
        let mut rank = vec![vec![None; num_pus]; lists.len()];
        for (m, list) in lists.iter().enumerate() {
            for (pos, &n) in list.iter().enumerate() {
                if n >= num_pus {
                    return Err(Error::Config(format!("SU {m} lists band {n}, only {num_pus} bands")));
                }
                if rank[m][n].replace(pos).is_some() {
                    return Err(Error::Config(format!("SU {m} lists band {n} twice")));
                }
            }
        }
        Ok(Self { utilities, lists, rank })
    }

    pub fn num_sus(&self) -> usize {
        self.utilities.rows()
    }

    pub fn num_pus(&self) -> usize {
        self.utilities.cols()
    }

    pub fn utility(&self, m: usize, n: usize) -> T {
        self.utilities[(m, n)]
    }

    pub fn utilities(&self) -> &Matrix<T> {
        &self.utilities
    }

    pub fn list(&self, m: usize) -> &[usize] {
        &self.lists[m]
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.lists
    }

    /// Position of band `n` in SU `m`'s list, `None` if it is not listed.
    pub fn rank(&self, m: usize, n: usize) -> Option<usize> {
        self.rank[m][n]
    }

    /// Whether SU `m` would rather hold `n` than `current` (`None` = unmatched).
    pub fn su_prefers(&self, m: usize, n: usize, current: Option<usize>) -> bool {
        match (self.rank(m, n), current) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(a), Some(c)) => self.rank(m, c).is_none_or(|b| a < b),
        }
    }

    /// Same table with every `v <= 0` entry dropped; survivors keep their order.
    pub fn truncated(&self) -> Self {
        let lists = self
            .lists
            .iter()
            .enumerate()
            .map(|(m, list)| list.iter().copied().filter(|&n| self.utility(m, n) > T::zero()).collect())
            .collect();
        Self::from_lists(self.utilities.clone(), lists).expect("subset of a valid table")
    }
}

/// Ranks bands by the detection statistic and drops non-positive proposals.
pub fn build_preferences<T: Scalar>(delta: &Matrix<T>, eta: &Matrix<T>, alpha: &[T]) -> ProposalTable<T> {
    build_preferences_with(delta, eta, alpha, ProposalOrder::Detection, ListPolicy::PositiveOnly)
}

pub fn build_preferences_with<T: Scalar>(
    delta: &Matrix<T>,
    eta: &Matrix<T>,
    alpha: &[T],
    order: ProposalOrder,
    policy: ListPolicy,
) -> ProposalTable<T> {
    assert_eq!((delta.rows(), delta.cols()), (eta.rows(), eta.cols()), "delta and eta must be conformable");
    assert_eq!(alpha.len(), delta.rows(), "one alpha per SU");
    let utilities = Matrix::from_fn(delta.rows(), delta.cols(), |m, n| {
        su_utility(delta[(m, n)], eta[(m, n)], alpha[m])
    });
    let lists = (0..delta.rows())
        .map(|m| {
            let mut bands: Vec<usize> = (0..delta.cols()).collect();
            // Stable sort, so equal keys keep ascending band index.
            match order {
                ProposalOrder::Detection => {
                    bands.sort_by(|&a, &b| delta[(m, a)].partial_cmp(&delta[(m, b)]).expect("finite delta"))
                }
                ProposalOrder::Utility => bands
                    .sort_by(|&a, &b| utilities[(m, b)].partial_cmp(&utilities[(m, a)]).expect("finite utility")),
            }
            if policy == ListPolicy::PositiveOnly {
                bands.retain(|&n| utilities[(m, n)] > T::zero());
            }
            bands
        })
        .collect();
    ProposalTable::from_lists(utilities, lists).expect("lists built from band indices")
}

/// Strictly increasing map from an SU's offered utility to the PU's utility.
#[derive(Clone)]
pub enum PuUtilityFn<T> {
    /// `1 - e^{-v}`.
    SaturatingExp,
    Identity,
    Custom { name: String, f: Arc<dyn Fn(T) -> T + Send + Sync> },
}

impl<T> fmt::Debug for PuUtilityFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl<T> Default for PuUtilityFn<T> {
    fn default() -> Self {
        Self::SaturatingExp
    }
}

impl<T> PuUtilityFn<T> {
    pub fn name(&self) -> &str {
        match self {
            Self::SaturatingExp => "saturating_exp",
            Self::Identity => "identity",
            Self::Custom { name, .. } => name,
        }
    }
}

impl<T: Scalar> PuUtilityFn<T> {
    /// Wraps `f` after checking it increases strictly on a grid over [-20, 20].
    pub fn custom(name: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        let grid: Vec<T> = (-200..=200).map(|i| T::lit(f64::from(i) * 0.1)).collect();
        for w in grid.windows(2) {
            if !(f(w[1]) > f(w[0])) {
                return Err(Error::NotIncreasing { lo: w[0].as_f64(), hi: w[1].as_f64() });
            }
        }
        Ok(Self::Custom { name: name.into(), f: Arc::new(f) })
    }

    pub fn eval(&self, v: T) -> T {
        match self {
            Self::SaturatingExp => -(-v).exp_m1(),
            Self::Identity => v,
            Self::Custom { f, .. } => f(v),
        }
    }
}

/// Whether an inactive PU would swap its incumbent for the new proposal.
/// Equal utilities keep the incumbent.
pub fn pu_prefers<T: Scalar>(u: &PuUtilityFn<T>, v_new: T, v_incumbent: T) -> bool {
    match u {
        // `1 - e^{-v}` rounds to 1.0 for v above ~37; the map is strictly
        // increasing, so compare the arguments instead.
        PuUtilityFn::SaturatingExp | PuUtilityFn::Identity => v_new > v_incumbent,
        PuUtilityFn::Custom { f, .. } => f(v_new) > f(v_incumbent),
    }
}

/// Utility PU `n` draws from a proposal worth `v`; an active PU values none.
pub fn pu_utility<T: Scalar>(u: &PuUtilityFn<T>, v: T, active: bool) -> T {
    if active {
        T::zero()
    } else {
        u.eval(v)
    }
}
