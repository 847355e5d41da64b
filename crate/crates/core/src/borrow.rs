//! Donor selection and threshold-capped channel borrowing for the reference cell.
//!
//! A request is served from the group-A member with the most lendable
//! channels first; whatever is still missing comes from the best group-B
//! member. A donor never drops below the cluster's lending floor.

use serde::Serialize;

use crate::cluster::{
    BorrowedChannel, ChannelRef, ChannelState, Cluster, ClusterError, CellId, Group, Loan,
};

/// One donor's contribution to a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grant {
    pub donor: CellId,
    pub count: u32,
}

/// Outcome of planning a borrow: who lends how much, and what is left unmet.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct BorrowPlan {
    pub requested: u32,
    pub grants: Vec<Grant>,
    pub shortfall: u32,
}

impl BorrowPlan {
    pub fn granted(&self) -> u32 {
        self.grants.iter().map(|g| g.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.grants.is_empty()
    }

    /// Channels granted by the member of `group`, zero when the group lends nothing.
    pub fn granted_by(&self, group: Group) -> u32 {
        self.grants
            .iter()
            .filter(|g| g.donor.group() == group)
            .map(|g| g.count)
            .sum()
    }
}

/// Group member with the most lendable channels. Ties go to the lowest cell
/// id; `None` when no member can lend anything.
pub fn select_donor(cluster: &Cluster, group: Group) -> Option<CellId> {
    let mut best: Option<(CellId, u32)> = None;
    for &id in group.members() {
        let lendable = cluster.lendable(id).unwrap_or(0);
        if lendable > best.map_or(0, |(_, l)| l) {
            best = Some((id, lendable));
        }
    }
    best.map(|(id, _)| id)
}

/// Plans a borrow of `n_req` channels for the reference cell. Does not
/// mutate the cluster.
pub fn plan_borrow(cluster: &Cluster, n_req: u32) -> BorrowPlan {
    let mut plan = BorrowPlan {
        requested: n_req,
        grants: Vec::with_capacity(2),
        shortfall: n_req,
    };
    for group in [Group::A, Group::B] {
        if plan.shortfall == 0 {
            break;
        }
        if let Some(donor) = select_donor(cluster, group) {
            let lendable = cluster.lendable(donor).unwrap_or(0);
            let count = plan.shortfall.min(lendable);
            plan.grants.push(Grant { donor, count });
            plan.shortfall -= count;
        }
    }
    plan
}

/// Commits `plan`: donor channels (taken from the top of the donor's band)
/// become `Lent`, the reference cell gains them as `Free` borrowed channels,
/// and the ledger grows. Fails without side effects if any grant no longer
/// fits the donor's lendable count.
pub fn execute_plan(cluster: &mut Cluster, plan: &BorrowPlan) -> Result<(), ClusterError> {
    let mut seen: Vec<CellId> = Vec::with_capacity(plan.grants.len());
    for grant in &plan.grants {
        if grant.donor.is_reference() {
            return Err(ClusterError::ReferenceCellLends);
        }
        if seen.contains(&grant.donor) {
            return Err(ClusterError::MalformedPlan(grant.donor));
        }
        seen.push(grant.donor);
        let lendable = cluster.lendable(grant.donor)?;
        if grant.count > lendable {
            return Err(ClusterError::StalePlan {
                donor: grant.donor,
                requested: grant.count,
                lendable,
            });
        }
    }
    for grant in plan.grants.iter().filter(|g| g.count > 0) {
        lend(cluster, grant.donor, grant.count);
    }
    Ok(())
}

fn lend(cluster: &mut Cluster, donor: CellId, count: u32) {
    for _ in 0..count {
        let cell = cluster.cell_mut(donor);
        let slot = cell
            .highest_free_own()
            .expect("lendable count guarantees a free slot");
        cell.transition(ChannelRef::Own(slot), ChannelState::Lent)
            .expect("free slot can be lent");
        cluster.cells[CellId::REFERENCE.index()].push_borrowed(BorrowedChannel {
                donor,
                slot,
                state: ChannelState::Free,
            });
    }
    match cluster.ledger.iter_mut().find(|l| l.donor == donor) {
        Some(loan) => loan.count += count,
        None => cluster.ledger.push(Loan {
            donor,
            borrower: CellId::REFERENCE,
            count,
        }),
    }
}

fn settle_ledger(cluster: &mut Cluster, donor: CellId, count: u32) {
    if let Some(pos) = cluster.ledger.iter().position(|l| l.donor == donor) {
        cluster.ledger[pos].count -= count;
        if cluster.ledger[pos].count == 0 {
            cluster.ledger.remove(pos);
        }
    }
}

/// Returns `count` idle borrowed channels to `donor`. The most recently
/// borrowed idle channels go back first.
pub fn release_loaned(cluster: &mut Cluster, donor: CellId, count: u32) -> Result<(), ClusterError> {
    let on_loan = cluster.on_loan(donor);
    if count > on_loan {
        return Err(ClusterError::OverRelease {
            donor,
            requested: count,
            on_loan,
        });
    }
    let reference = cluster.cell(CellId::REFERENCE);
    let idle: Vec<u32> = reference
        .borrowed()
        .iter()
        .rev()
        .filter(|b| b.donor == donor && b.state == ChannelState::Free)
        .map(|b| b.slot)
        .take(count as usize)
        .collect();
    if (idle.len() as u32) < count {
        return Err(ClusterError::LoanInUse {
            donor,
            requested: count,
            free: idle.len() as u32,
        });
    }
    for slot in idle {
        return_channel(cluster, donor, slot);
    }
    settle_ledger(cluster, donor, count);
    Ok(())
}

/// Returns one specific idle borrowed channel to its donor; used when the
/// call that held it ends.
pub fn release_borrowed_channel(
    cluster: &mut Cluster,
    donor: CellId,
    slot: u32,
) -> Result<(), ClusterError> {
    let reference = cluster.cell(CellId::REFERENCE);
    let held = reference
        .borrowed()
        .iter()
        .find(|b| b.donor == donor && b.slot == slot)
        .ok_or(ClusterError::NotBorrowed {
            cell: CellId::REFERENCE,
            donor,
            slot,
        })?;
    if held.state != ChannelState::Free {
        return Err(ClusterError::LoanInUse {
            donor,
            requested: 1,
            free: 0,
        });
    }
    return_channel(cluster, donor, slot);
    settle_ledger(cluster, donor, 1);
    Ok(())
}

/// Ends a call carried on a borrowed channel and hands the channel straight
/// back to its donor.
pub fn finish_borrowed_call(
    cluster: &mut Cluster,
    donor: CellId,
    slot: u32,
) -> Result<(), ClusterError> {
    let reference = &mut cluster.cells[CellId::REFERENCE.index()];
    let pos = reference
        .borrowed_position(donor, slot)
        .ok_or(ClusterError::NotBorrowed {
            cell: CellId::REFERENCE,
            donor,
            slot,
        })?;
    let state = reference.borrowed()[pos].state;
    if !matches!(state, ChannelState::Busy | ChannelState::InnerOnly) {
        return Err(ClusterError::IllegalTransition {
            cell: CellId::REFERENCE,
            slot,
            from: state,
            to: ChannelState::Free,
        });
    }
    reference.remove_borrowed(pos);
    cluster
        .cell_mut(donor)
        .transition(ChannelRef::Own(slot), ChannelState::Free)
        .expect("lent slot returns to free");
    settle_ledger(cluster, donor, 1);
    Ok(())
}

fn return_channel(cluster: &mut Cluster, donor: CellId, slot: u32) {
    let reference = &mut cluster.cells[CellId::REFERENCE.index()];
    let pos = reference
        .borrowed_position(donor, slot)
        .expect("channel is held by the reference cell");
    reference.remove_borrowed(pos);
    cluster
        .cell_mut(donor)
        .transition(ChannelRef::Own(slot), ChannelState::Free)
        .expect("lent slot returns to free");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: u8) -> CellId {
        CellId::new(n).unwrap()
    }

    /// Fresh 100/70 cluster with cell `n` holding `busy` calls.
    fn load(cluster: &mut Cluster, n: u8, busy: u32) {
        for _ in 0..busy {
            cluster.cell_mut(id(n)).occupy().unwrap();
        }
    }

    #[test]
    fn select_donor_prefers_most_lendable() {
        let mut c = Cluster::new(100, 70).unwrap();
        // lendable 30 / 10 / 5
        load(&mut c, 2, 0);
        load(&mut c, 4, 90);
        load(&mut c, 6, 95);
        assert_eq!(select_donor(&c, Group::A), Some(id(2)));
    }

    #[test]
    fn select_donor_none_when_nothing_lendable() {
        let c = Cluster::new(100, 100).unwrap();
        assert_eq!(select_donor(&c, Group::A), None);
        assert_eq!(select_donor(&c, Group::B), None);
    }

    #[test]
    fn select_donor_ties_go_to_lowest_id() {
        let mut c = Cluster::new(100, 70).unwrap();
        load(&mut c, 2, 90);
        load(&mut c, 4, 90);
        load(&mut c, 6, 95);
        assert_eq!(select_donor(&c, Group::A), Some(id(2)));
        let mut c = Cluster::new(100, 70).unwrap();
        load(&mut c, 2, 95);
        load(&mut c, 4, 90);
        load(&mut c, 6, 90);
        assert_eq!(select_donor(&c, Group::A), Some(id(4)));
    }

    #[test]
    fn plan_within_group_a() {
        let mut c = Cluster::new(100, 70).unwrap();
        for n in 3..=7 {
            load(&mut c, n, 100);
        }
        let plan = plan_borrow(&c, 20);
        assert_eq!(plan.grants, vec![Grant { donor: id(2), count: 20 }]);
        assert_eq!(plan.shortfall, 0);
    }

    #[test]
    fn plan_for_nothing() {
        let c = Cluster::new(100, 70).unwrap();
        let plan = plan_borrow(&c, 0);
        assert!(plan.grants.is_empty());
        assert_eq!(plan.shortfall, 0);
    }

    #[test]
    fn plan_spills_into_group_b() {
        let mut c = Cluster::new(100, 70).unwrap();
        load(&mut c, 3, 75);
        for n in [4, 5, 6, 7] {
            load(&mut c, n, 100);
        }
        let plan = plan_borrow(&c, 50);
        assert_eq!(
            plan.grants,
            vec![
                Grant { donor: id(2), count: 30 },
                Grant { donor: id(3), count: 20 }
            ]
        );
        assert_eq!(plan.shortfall, 0);
    }

    #[test]
    fn plan_reports_shortfall() {
        let mut c = Cluster::new(100, 70).unwrap();
        load(&mut c, 3, 90);
        for n in [4, 5, 6, 7] {
            load(&mut c, n, 100);
        }
        let plan = plan_borrow(&c, 50);
        assert_eq!(
            plan.grants,
            vec![
                Grant { donor: id(2), count: 30 },
                Grant { donor: id(3), count: 10 }
            ]
        );
        assert_eq!(plan.shortfall, 10);
    }

    #[test]
    fn execute_moves_channels() {
        let mut c = Cluster::new(100, 70).unwrap();
        let plan = BorrowPlan {
            requested: 20,
            grants: vec![Grant { donor: id(2), count: 20 }],
            shortfall: 0,
        };
        execute_plan(&mut c, &plan).unwrap();
        assert_eq!(c.cell(CellId::REFERENCE).channel_count(), 120);
        assert_eq!(c.cell(id(2)).channel_count(), 80);
        assert_eq!(c.on_loan(id(2)), 20);
        assert_eq!(c.cell(id(2)).count(ChannelState::Lent), 20);
        // lent slots are the top of the band
        assert!(c.cell(id(2)).channels()[80..]
            .iter()
            .all(|s| *s == ChannelState::Lent));
        c.check_invariants().unwrap();
    }

    #[test]
    fn empty_plan_is_identity() {
        let mut c = Cluster::new(100, 70).unwrap();
        let before = c.snapshot();
        execute_plan(&mut c, &BorrowPlan::default()).unwrap();
        assert_eq!(c.snapshot(), before);
        assert!(c.ledger().is_empty());
    }

    #[test]
    fn stale_plan_is_rejected_untouched() {
        let mut c = Cluster::new(100, 70).unwrap();
        let before = c.snapshot();
        let plan = BorrowPlan {
            requested: 31,
            grants: vec![Grant { donor: id(2), count: 31 }],
            shortfall: 0,
        };
        assert_eq!(
            execute_plan(&mut c, &plan).unwrap_err(),
            ClusterError::StalePlan {
                donor: id(2),
                requested: 31,
                lendable: 30
            }
        );
        assert_eq!(c.snapshot(), before);
    }

    #[test]
    fn release_round_trip_and_partial() {
        let mut c = Cluster::new(100, 70).unwrap();
        let before = c.snapshot();
        let plan = plan_borrow(&c, 20);
        execute_plan(&mut c, &plan).unwrap();
        release_loaned(&mut c, id(2), 5).unwrap();
        assert_eq!(c.on_loan(id(2)), 15);
        assert_eq!(c.cell(id(2)).channel_count(), 85);
        release_loaned(&mut c, id(2), 15).unwrap();
        assert_eq!(c.snapshot(), before);
        assert!(c.ledger().is_empty());
    }

    #[test]
    fn releasing_unknown_loan_fails() {
        let mut c = Cluster::new(100, 70).unwrap();
        let plan = plan_borrow(&c, 20);
        execute_plan(&mut c, &plan).unwrap();
        assert_eq!(
            release_loaned(&mut c, id(3), 1).unwrap_err(),
            ClusterError::OverRelease {
                donor: id(3),
                requested: 1,
                on_loan: 0
            }
        );
        assert!(release_loaned(&mut c, id(2), 21).is_err());
    }

    #[test]
    fn busy_borrowed_channel_cannot_be_returned() {
        let mut c = Cluster::new(10, 7).unwrap();
        load(&mut c, 1, 10);
        let plan = plan_borrow(&c, 1);
        execute_plan(&mut c, &plan).unwrap();
        let channel = c.cell_mut(CellId::REFERENCE).occupy().unwrap();
        let ChannelRef::Borrowed { donor, slot } = channel else {
            panic!("expected a borrowed channel, got {channel:?}");
        };
        assert!(release_borrowed_channel(&mut c, donor, slot).is_err());
        assert!(release_loaned(&mut c, donor, 1).is_err());
        c.cell_mut(CellId::REFERENCE)
            .transition(channel, ChannelState::Free)
            .unwrap();
        release_borrowed_channel(&mut c, donor, slot).unwrap();
        c.check_invariants().unwrap();
        assert!(c.ledger().is_empty());
    }

    #[test]
    fn finished_call_returns_channel_to_donor() {
        let mut c = Cluster::new(10, 7).unwrap();
        load(&mut c, 1, 10);
        let before_donor = c.cell(id(2)).channel_count();
        let plan = plan_borrow(&c, 1);
        execute_plan(&mut c, &plan).unwrap();
        let channel = c.cell_mut(CellId::REFERENCE).occupy().unwrap();
        let ChannelRef::Borrowed { donor, slot } = channel else {
            panic!("expected a borrowed channel, got {channel:?}");
        };
        assert_eq!((donor, slot), (id(2), 9));
        finish_borrowed_call(&mut c, donor, slot).unwrap();
        assert_eq!(c.cell(id(2)).channel_count(), before_donor);
        assert_eq!(c.cell(id(2)).state(9), Some(ChannelState::Free));
        assert!(c.cell(CellId::REFERENCE).borrowed().is_empty());
        assert!(c.ledger().is_empty());
        c.check_invariants().unwrap();
        assert!(matches!(
            finish_borrowed_call(&mut c, donor, slot),
            Err(ClusterError::NotBorrowed { .. })
        ));
    }

    #[test]
    fn idle_borrowed_channel_has_no_call_to_finish() {
        let mut c = Cluster::new(10, 7).unwrap();
        let plan = plan_borrow(&c, 1);
        execute_plan(&mut c, &plan).unwrap();
        assert!(matches!(
            finish_borrowed_call(&mut c, id(2), 9),
            Err(ClusterError::IllegalTransition { .. })
        ));
    }
}
