//! SU-proposing deferred acceptance, the random baseline, and stability checks.

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::preferences::{pu_prefers, ProposalTable, PuUtilityFn};
use crate::scenario::{NetworkInstance, ScenarioConfig};
use crate::{Error, Result, Scalar};

/// Partial one-to-one association between SUs and bands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    pub su_of_pu: Vec<Option<usize>>,
    pub pu_of_su: Vec<Option<usize>>,
    /// Proposals sent before the rounds settled.
    pub proposal_count: usize,
    /// Rounds in which at least one proposal was sent.
    pub rounds: usize,
}

impl Matching {
    pub fn empty(num_sus: usize, num_pus: usize) -> Self {
        Self { su_of_pu: vec![None; num_pus], pu_of_su: vec![None; num_sus], proposal_count: 0, rounds: 0 }
    }

    pub fn from_pairs(num_sus: usize, num_pus: usize, pairs: &[(usize, usize)]) -> Self {
        let mut out = Self::empty(num_sus, num_pus);
        for &(m, n) in pairs {
            out.pu_of_su[m] = Some(n);
            out.su_of_pu[n] = Some(m);
        }
        out
    }

    /// `(su, band)` pairs in ascending SU order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.pu_of_su.iter().enumerate().filter_map(|(m, n)| n.map(|n| (m, n))).collect()
    }

    pub fn len(&self) -> usize {
        self.pu_of_su.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same pairs, regardless of the counters.
    pub fn same_pairs(&self, other: &Self) -> bool {
        self.pu_of_su == other.pu_of_su && self.su_of_pu == other.su_of_pu
    }

    /// Checks the structural invariants: both directions agree, nothing is
    /// matched twice, and no active PU holds an SU.
    pub fn check_consistency(&self, pu_active: &[bool]) -> Result<()> {
        let inconsistent = |msg: String| Err(Error::InconsistentMatching(msg));
        if self.su_of_pu.len() != pu_active.len() {
            return inconsistent(format!("{} band slots for {} PUs", self.su_of_pu.len(), pu_active.len()));
        }
        for (m, slot) in self.pu_of_su.iter().enumerate() {
            if let Some(n) = *slot {
                if self.su_of_pu.get(n).copied().flatten() != Some(m) {
                    return inconsistent(format!("SU {m} holds band {n} but band {n} does not hold SU {m}"));
                }
                if pu_active[n] {
                    return inconsistent(format!("active PU {n} is matched to SU {m}"));
                }
            }
        }
        for (n, slot) in self.su_of_pu.iter().enumerate() {
            if let Some(m) = *slot {
                if self.pu_of_su.get(m).copied().flatten() != Some(n) {
                    return inconsistent(format!("band {n} holds SU {m} but SU {m} does not hold band {n}"));
                }
            }
        }
        Ok(())
    }
}

/// What happened to one proposal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Response {
    /// The PU is active and refuses every SU.
    RejectedActive,
    /// The PU kept the SU it already held.
    RejectedKeptIncumbent { incumbent: usize },
    /// The PU was free and took the proposal.
    Accepted,
    /// The PU dropped its incumbent for the proposer.
    AcceptedDisplacing { displaced: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposalEvent {
    pub round: usize,
    pub su: usize,
    pub pu: usize,
    pub response: Response,
}

/// Deferred acceptance with SUs proposing, configurable for the variants the
/// crate needs.
///
/// Every round, each unmatched SU that still has untried bands proposes to
/// the next one on its list, in `order`. Each proposal is resolved on the
/// spot, so an SU displaced earlier in the round proposes again next round.
pub struct Proposer<'a, T: Scalar> {
    table: &'a ProposalTable<T>,
    utility: &'a PuUtilityFn<T>,
    pu_active: &'a [bool],
    skip_non_positive: bool,
    order: Option<Vec<usize>>,
}

impl<'a, T: Scalar> Proposer<'a, T> {
    pub fn new(table: &'a ProposalTable<T>, utility: &'a PuUtilityFn<T>, pu_active: &'a [bool]) -> Self {
        assert_eq!(table.num_pus(), pu_active.len(), "one activity flag per band");
        Self { table, utility, pu_active, skip_non_positive: false, order: None }
    }

    /// Skip listed bands whose utility is not strictly positive.
    pub fn skip_non_positive(mut self, yes: bool) -> Self {
        self.skip_non_positive = yes;
        self
    }

    /// Order in which SUs act within a round; defaults to ascending index.
    pub fn order(mut self, order: Vec<usize>) -> Self {
        assert_eq!(order.len(), self.table.num_sus(), "order must list every SU");
        self.order = Some(order);
        self
    }

    pub fn run(&self) -> Matching {
        self.run_traced(|_| {})
    }

    pub fn run_traced(&self, mut observe: impl FnMut(ProposalEvent)) -> Matching {
        let table = self.table;
        let num_sus = table.num_sus();
        let mut out = Matching::empty(num_sus, table.num_pus());
        let order: Vec<usize> = self.order.clone().unwrap_or_else(|| (0..num_sus).collect());
        let mut next = vec![0usize; num_sus];

        loop {
            let mut sent = false;
            for &m in &order {
                if out.pu_of_su[m].is_some() {
                    continue;
                }
                let list = table.list(m);
                if self.skip_non_positive {
                    while next[m] < list.len() && !(table.utility(m, list[next[m]]) > T::zero()) {
                        next[m] += 1;
                    }
                }
                let Some(&n) = list.get(next[m]) else { continue };
                next[m] += 1;
                out.proposal_count += 1;
                sent = true;

                let response = if self.pu_active[n] {
                    Response::RejectedActive
                } else {
                    match out.su_of_pu[n] {
                        None => Response::Accepted,
                        Some(inc) if pu_prefers(self.utility, table.utility(m, n), table.utility(inc, n)) => {
                            Response::AcceptedDisplacing { displaced: inc }
                        }
                        Some(inc) => Response::RejectedKeptIncumbent { incumbent: inc },
                    }
                };
                match response {
                    Response::Accepted => {
                        out.su_of_pu[n] = Some(m);
                        out.pu_of_su[m] = Some(n);
                    }
                    Response::AcceptedDisplacing { displaced } => {
                        out.pu_of_su[displaced] = None;
                        out.su_of_pu[n] = Some(m);
                        out.pu_of_su[m] = Some(n);
                    }
                    Response::RejectedActive | Response::RejectedKeptIncumbent { .. } => {}
                }
                observe(ProposalEvent { round: out.rounds + 1, su: m, pu: n, response });
            }
            if !sent {
                break;
            }
            out.rounds += 1;
        }
        out
    }
}

/// Deferred acceptance on lists with every non-positive proposal removed.
pub fn run_algorithm1<T: Scalar>(
    proposals: &ProposalTable<T>,
    utility: &PuUtilityFn<T>,
    pu_active: &[bool],
) -> Matching {
    Proposer::new(proposals, utility, pu_active).skip_non_positive(true).run()
}

/// Plain deferred acceptance: every listed band is proposed to.
pub fn run_deferred_acceptance<T: Scalar>(
    full_table: &ProposalTable<T>,
    utility: &PuUtilityFn<T>,
    pu_active: &[bool],
) -> Matching {
    Proposer::new(full_table, utility, pu_active).run()
}

/// Each SU picks a band uniformly at random; collisions are allowed.
pub fn run_random_allocation<T: Scalar>(
    cfg: &ScenarioConfig<T>,
    inst: &NetworkInstance<T>,
    seed: u64,
) -> Vec<usize> {
    debug_assert_eq!(cfg.num_pus, inst.num_pus());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..inst.num_sus()).map(|_| rng.random_range(0..inst.num_pus())).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StabilityReport {
    /// `(su, band)` pairs that would both rather be together.
    pub blocking_pairs: Vec<(usize, usize)>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.blocking_pairs.is_empty()
    }
}

/// Exhaustive blocking-pair scan.
///
/// A pair `(m, n)` blocks when `n` is inactive and on `m`'s list, `m` is
/// unmatched or ranks `n` above its band, and `n` is free or values `m`'s
/// offer strictly above its incumbent's. A matched pair that is not on the
/// SU's list is reported as an inconsistency.
pub fn is_stable<T: Scalar>(
    matching: &Matching,
    proposals: &ProposalTable<T>,
    utility: &PuUtilityFn<T>,
    pu_active: &[bool],
) -> Result<StabilityReport> {
    if matching.pu_of_su.len() != proposals.num_sus() {
        return Err(Error::InconsistentMatching(format!(
            "{} SU slots for {} SUs",
            matching.pu_of_su.len(),
            proposals.num_sus()
        )));
    }
    matching.check_consistency(pu_active)?;
    for (m, n) in matching.pairs() {
        if proposals.rank(m, n).is_none() {
            return Err(Error::InconsistentMatching(format!("SU {m} is matched to unlisted band {n}")));
        }
    }

    let mut blocking_pairs = Vec::new();
    for m in 0..proposals.num_sus() {
        let current = matching.pu_of_su[m];
        for &n in proposals.list(m) {
            if pu_active[n] || !proposals.su_prefers(m, n, current) {
                continue;
            }
            let pu_wants = match matching.su_of_pu[n] {
                None => true,
                Some(inc) => pu_prefers(utility, proposals.utility(m, n), proposals.utility(inc, n)),
            };
            if pu_wants {
                blocking_pairs.push((m, n));
            }
        }
    }
    Ok(StabilityReport { blocking_pairs })
}
