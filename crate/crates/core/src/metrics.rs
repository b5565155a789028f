//! Per-trial figures of merit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::matching::Matching;
use crate::matrix::Matrix;
use crate::scenario::{NetworkInstance, ScenarioConfig};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Proposed,
    DeferredAcceptance,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Proposed, Algorithm::DeferredAcceptance, Algorithm::Random];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Proposed => "proposed",
            Algorithm::DeferredAcceptance => "deferred_acceptance",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "proposed" => Ok(Algorithm::Proposed),
            "deferred_acceptance" | "da" => Ok(Algorithm::DeferredAcceptance),
            "random" => Ok(Algorithm::Random),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Rates are in bits/s/Hz. For the matching algorithms `min_rate` is taken
/// over matched SUs only; for random allocation over every SU.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics<T> {
    pub algorithm: Algorithm,
    pub sum_rate: T,
    pub min_rate: T,
    pub num_matched: usize,
    pub proposal_count: usize,
    pub rounds: usize,
}

impl<T: Scalar> TrialMetrics<T> {
    pub fn from_matching(algorithm: Algorithm, matching: &Matching, eta: &Matrix<T>) -> Self {
        let (sum_rate, min_rate, num_matched) = matched_sum_and_min(matching, eta);
        Self {
            algorithm,
            sum_rate,
            min_rate,
            num_matched,
            proposal_count: matching.proposal_count,
            rounds: matching.rounds,
        }
    }
}

/// `(sum, min, count)` of the interference-free rates of matched SUs.
/// An empty matching gives `(0, 0, 0)`.
pub fn matched_sum_and_min<T: Scalar>(matching: &Matching, eta: &Matrix<T>) -> (T, T, usize) {
    let rates: Vec<T> = matching.pairs().into_iter().map(|(m, n)| eta[(m, n)]).collect();
    if rates.is_empty() {
        return (T::zero(), T::zero(), 0);
    }
    let sum = rates.iter().fold(T::zero(), |a, r| a + *r);
    let min = rates.iter().copied().fold(T::infinity(), T::min);
    (sum, min, rates.len())
}

/// Rate of every SU when each transmits at twice the configured power on its
/// chosen band, with co-channel SUs as interference.
pub fn random_allocation_sinr_rates<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    inst: &NetworkInstance<T>,
    choices: &[usize],
) -> Vec<T> {
    let p = T::lit(2.0) * cfg.su_power_mw();
    let noise = cfg.noise_mw();
    (0..choices.len())
        .map(|m| {
            let n = choices[m];
            let g = inst.link_gain(cfg, m, n);
            let interference = (0..choices.len())
                .filter(|&i| i != m && choices[i] == n)
                .fold(T::zero(), |acc, i| {
                    let gi = inst.cross_gain(cfg, i, m, n);
                    acc + p * gi * gi
                });
            (T::one() + p * g * g / (noise + interference)).log2()
        })
        .collect()
}

/// `(sum, min)` over all SUs of [`random_allocation_sinr_rates`].
pub fn random_allocation_rates<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    inst: &NetworkInstance<T>,
    choices: &[usize],
) -> (T, T) {
    let rates = random_allocation_sinr_rates(cfg, inst, choices);
    if rates.is_empty() {
        return (T::zero(), T::zero());
    }
    let sum = rates.iter().fold(T::zero(), |a, r| a + *r);
    let min = rates.iter().copied().fold(T::infinity(), T::min);
    (sum, min)
}

/// Relative improvement of `a` over `b`, in percent.
pub fn improvement_pct<T: Scalar>(a: T, b: T) -> Result<T> {
    if !(b > T::zero()) {
        return Err(Error::NonPositiveBaseline(b.as_f64()));
    }
    Ok(T::lit(100.0) * (a - b) / b)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::scenario::{achievable_rate, sample_instance, Point};

    #[test]
    fn matched_examples() {
        let eta = Matrix::from_rows(vec![vec![5.0, 1.0], vec![3.0, 3.0]]).unwrap();
        assert_eq!(matched_sum_and_min(&Matching::from_pairs(2, 2, &[(0, 0)]), &eta), (5.0, 5.0, 1));
        assert_eq!(matched_sum_and_min(&Matching::empty(2, 2), &eta), (0.0, 0.0, 0));

        let eta = Matrix::from_rows(vec![vec![2.0, 0.0, 0.0], vec![0.0, 7.0, 0.0], vec![0.0, 0.0, 4.0]]).unwrap();
        let m = Matching::from_pairs(3, 3, &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(matched_sum_and_min(&m, &eta), (13.0, 2.0, 3));
    }

    #[test]
    fn improvement_examples() {
        assert_relative_eq!(improvement_pct(1.2, 1.0).unwrap(), 20.0, max_relative = 1e-12);
        assert_eq!(improvement_pct(3.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(improvement_pct(1.6, 1.0).unwrap(), 60.0, max_relative = 1e-12);
        assert!(matches!(improvement_pct(1.0, 0.0), Err(Error::NonPositiveBaseline(_))));
    }

    #[test]
    fn no_collisions_means_no_interference() {
        let cfg = ScenarioConfig::<f64>::new(3, 3);
        let inst = sample_instance(&cfg, 12);
        let rates = random_allocation_sinr_rates(&cfg, &inst, &[0, 1, 2]);
        for (m, r) in rates.iter().enumerate() {
            let expected = achievable_rate(2.0 * cfg.su_power_mw(), inst.link_gain(&cfg, m, m), cfg.noise_mw());
            assert_eq!(*r, expected);
        }
    }

    #[test]
    fn single_su_gets_double_power_rate() {
        let cfg = ScenarioConfig::<f64>::new(1, 2);
        let inst = sample_instance(&cfg, 2);
        let (sum, min) = random_allocation_rates(&cfg, &inst, &[1]);
        let expected = achievable_rate(2.0 * cfg.su_power_mw(), inst.link_gain(&cfg, 0, 1), cfg.noise_mw());
        assert_eq!((sum, min), (expected, expected));
    }

    fn two_su_instance(tx: [(f64, f64); 2], rx: [(f64, f64); 2]) -> NetworkInstance<f64> {
        let p = |(x, y)| Point::new(x, y);
        NetworkInstance::from_positions(
            tx.map(p).to_vec(),
            rx.map(p).to_vec(),
            vec![Point::new(0.0, 0.0)],
            vec![1.0],
            vec![1.0],
            vec![false],
        )
    }

    #[test]
    fn symmetric_collision_high_snr() {
        let mut cfg = ScenarioConfig::<f64>::new(2, 1);
        cfg.noise_dbm = -300.0;
        // Both transmitters share a spot, both receivers share a spot, so the
        // wanted and interfering paths have the same gain.
        let inst = two_su_instance([(10.0, 10.0); 2], [(12.0, 10.0); 2]);
        let rates = random_allocation_sinr_rates(&cfg, &inst, &[0, 0]);
        for r in rates {
            assert!((r - 1.0).abs() < 1e-9, "rate {r}");
        }
    }

    #[test]
    fn two_colliding_sus_hand_computed() {
        let cfg = ScenarioConfig::<f64>::new(2, 1);
        let inst = two_su_instance([(0.0, 0.0), (30.0, 40.0)], [(3.0, 4.0), (30.0, 46.0)]);
        let rates = random_allocation_sinr_rates(&cfg, &inst, &[0, 0]);
        let p = 2.0 * 10f64.powf(1.3);
        let noise = 1e-9;
        let g2 = |d: f64| 1.0 / (1.0 + d.powi(3));
        // SU0: link 5 m; interferer at (30,40) to receiver (3,4) is 45 m away.
        let r0 = (1.0 + p * g2(5.0) / (noise + p * g2(45.0))).log2();
        // SU1: link 6 m; interferer at (0,0) to receiver (30,46): sqrt(900 + 2116).
        let r1 = (1.0 + p * g2(6.0) / (noise + p * g2(3016f64.sqrt()))).log2();
        assert!((rates[0] - r0).abs() < 1e-12);
        assert!((rates[1] - r1).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn extra_interferer_never_helps(seed in any::<u64>(), m in 2usize..8) {
            let cfg = ScenarioConfig::<f64>::new(m, 2);
            let inst = sample_instance(&cfg, seed);
            let mut choices = vec![1usize; m];
            choices[0] = 0;
            let before = random_allocation_sinr_rates(&cfg, &inst, &choices);
            choices[1] = 0;
            let after = random_allocation_sinr_rates(&cfg, &inst, &choices);
            prop_assert!(after[0] <= before[0]);
            for i in 2..m {
                prop_assert!(after[i] >= before[i]);
            }
        }
    }
}
