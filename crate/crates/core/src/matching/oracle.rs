//! Exhaustive enumeration of stable matchings for small games.

use crate::preferences::{ProposalTable, PuUtilityFn};
use crate::{Error, Result, Scalar};

use super::{is_stable, Matching};

pub const MAX_SIDE: usize = 6;

/// Every stable matching of the game. Only pairs on the SU's list with an
/// inactive PU are considered.
pub fn brute_force_stable_matchings<T: Scalar>(
    proposals: &ProposalTable<T>,
    utility: &PuUtilityFn<T>,
    pu_active: &[bool],
) -> Result<Vec<Matching>> {
    let (m, n) = (proposals.num_sus(), proposals.num_pus());
    if m > MAX_SIDE || n > MAX_SIDE {
        return Err(Error::TooLarge { m, n, limit: MAX_SIDE });
    }
    let mut found = Vec::new();
    let mut current = Matching::empty(m, n);
    enumerate(0, proposals, pu_active, &mut current, &mut |candidate| {
        let report = is_stable(candidate, proposals, utility, pu_active)?;
        if report.is_stable() {
            found.push(candidate.clone());
        }
        Ok(())
    })?;
    Ok(found)
}

fn enumerate<T: Scalar>(
    su: usize,
    proposals: &ProposalTable<T>,
    pu_active: &[bool],
    current: &mut Matching,
    visit: &mut dyn FnMut(&Matching) -> Result<()>,
) -> Result<()> {
    if su == proposals.num_sus() {
        return visit(current);
    }
    enumerate(su + 1, proposals, pu_active, current, visit)?;
    for &n in proposals.list(su) {
        if pu_active[n] || current.su_of_pu[n].is_some() {
            continue;
        }
        current.su_of_pu[n] = Some(su);
        current.pu_of_su[su] = Some(n);
        enumerate(su + 1, proposals, pu_active, current, visit)?;
        current.su_of_pu[n] = None;
        current.pu_of_su[su] = None;
    }
    Ok(())
}

/// The matching every SU weakly prefers to all others in `matchings`, if one exists.
pub fn su_optimal<'a, T: Scalar>(matchings: &'a [Matching], proposals: &ProposalTable<T>) -> Option<&'a Matching> {
    let weakly_better = |a: &Matching, b: &Matching| {
        (0..proposals.num_sus()).all(|m| match (a.pu_of_su[m], b.pu_of_su[m]) {
            (x, y) if x == y => true,
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => proposals.rank(m, x) < proposals.rank(m, y),
        })
    };
    matchings.iter().find(|a| matchings.iter().all(|b| weakly_better(a, b)))
}
