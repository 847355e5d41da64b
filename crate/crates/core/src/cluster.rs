//! Seven-cell, three-band cluster model.
//!
//! Cell 1 sits at the center and owns band X. The six surrounding cells
//! alternate between band Y (cells 2, 4, 6, group A) and band Z (cells 3, 5,
//! 7, group B), so that no two neighbours share a band. Every cell starts
//! with the same number of channels; channels are tracked individually by
//! their slot index inside the cell's band, which is also what makes two
//! channels of the same band co-channel across cells.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of cells in a cluster.
pub const CELLS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrequencyBand {
    X,
    Y,
    Z,
}

impl fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FrequencyBand::X => "X",
            FrequencyBand::Y => "Y",
            FrequencyBand::Z => "Z",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Reference,
    A,
    B,
}

impl Group {
    /// Donor cells of the group, in ascending id order. Empty for the reference group.
    pub fn members(self) -> &'static [CellId] {
        const A: [CellId; 3] = [CellId(2), CellId(4), CellId(6)];
        const B: [CellId; 3] = [CellId(3), CellId(5), CellId(7)];
        match self {
            Group::Reference => &[],
            Group::A => &A,
            Group::B => &B,
        }
    }

    pub fn band(self) -> FrequencyBand {
        match self {
            Group::Reference => FrequencyBand::X,
            Group::A => FrequencyBand::Y,
            Group::B => FrequencyBand::Z,
        }
    }
}

/// Cell identifier, 1 through 7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId(u8);

impl CellId {
    pub const REFERENCE: CellId = CellId(1);

    pub fn new(id: u8) -> Result<Self, ClusterError> {
        if (1..=CELLS as u8).contains(&id) {
            Ok(CellId(id))
        } else {
            Err(ClusterError::UnknownCell(id))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position, handy for per-cell arrays.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < CELLS, "cell index {index} out of range");
        CellId(index as u8 + 1)
    }

    pub fn all() -> impl Iterator<Item = CellId> {
        (1..=CELLS as u8).map(CellId)
    }

    pub fn group(self) -> Group {
        match self.0 {
            1 => Group::Reference,
            n if n % 2 == 0 => Group::A,
            _ => Group::B,
        }
    }

    pub fn band(self) -> FrequencyBand {
        self.group().band()
    }

    pub fn is_reference(self) -> bool {
        self.0 == 1
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cell {}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelState {
    Free,
    Busy,
    /// Handed to the reference cell; only ever seen in donor cells.
    Lent,
    /// Switched off so it cannot interfere with a borrowed channel.
    Inactivated,
    /// Carrying a call restricted to the inner part of the cell.
    InnerOnly,
}

impl ChannelState {
    fn slot(self) -> usize {
        match self {
            ChannelState::Free => 0,
            ChannelState::Busy => 1,
            ChannelState::Lent => 2,
            ChannelState::Inactivated => 3,
            ChannelState::InnerOnly => 4,
        }
    }

    /// Every legal transition goes through `Free`.
    pub fn can_become(self, to: ChannelState) -> bool {
        self != to && (self == ChannelState::Free || to == ChannelState::Free)
    }
}

/// Addresses one channel a cell can carry a call on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelRef {
    Own(u32),
    Borrowed { donor: CellId, slot: u32 },
}

/// A donor channel currently held by the reference cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BorrowedChannel {
    pub donor: CellId,
    pub slot: u32,
    pub state: ChannelState,
}

/// Outstanding loan between a donor and the borrowing cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Loan {
    pub donor: CellId,
    pub borrower: CellId,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("lending floor {n_th} exceeds the {n} channels of a cell")]
    ThresholdExceedsCapacity { n_th: u32, n: u32 },
    #[error("no cell with id {0} in a 7-cell cluster")]
    UnknownCell(u8),
    #[error("the reference cell never lends channels")]
    ReferenceCellLends,
    #[error("{cell} slot {slot} does not exist")]
    SlotOutOfRange { cell: CellId, slot: u32 },
    #[error("{cell} slot {slot}: illegal transition {from:?} -> {to:?}")]
    IllegalTransition {
        cell: CellId,
        slot: u32,
        from: ChannelState,
        to: ChannelState,
    },
    #[error("{cell} has no borrowed channel {slot} from {donor}")]
    NotBorrowed {
        cell: CellId,
        donor: CellId,
        slot: u32,
    },
    #[error("stale plan: {donor} asked for {requested} channels but can lend {lendable}")]
    StalePlan {
        donor: CellId,
        requested: u32,
        lendable: u32,
    },
    #[error("over-release: {requested} channels returned to {donor}, ledger holds {on_loan}")]
    OverRelease {
        donor: CellId,
        requested: u32,
        on_loan: u32,
    },
    #[error("cannot return {requested} channels to {donor}: only {free} of its loaned channels are idle")]
    LoanInUse {
        donor: CellId,
        requested: u32,
        free: u32,
    },
    #[error("plan lists {0} twice or out of group order")]
    MalformedPlan(CellId),
}

/// A broken structural invariant, reported by [`Cluster::check_invariants`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("channel conservation broken: cluster holds {found} channels, expected {expected}")]
    Conservation { expected: u64, found: u64 },
    #[error("{cell} holds {channels} channels, below the lending floor {floor}")]
    DonorFloor {
        cell: CellId,
        channels: u32,
        floor: u32,
    },
    #[error("reference cell holds {channels} channels, fewer than its original {original}")]
    ReferenceShrunk { channels: u32, original: u32 },
}

/// Fixed-size bitset of free slot indices.
#[derive(Debug, Clone)]
struct FreeSlots {
    words: Vec<u64>,
}

impl FreeSlots {
    fn full(len: u32) -> Self {
        let n_words = (len as usize).div_ceil(64);
        let mut words = vec![u64::MAX; n_words];
        let tail = len as usize % 64;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
        FreeSlots { words }
    }

    fn insert(&mut self, slot: u32) {
        self.words[slot as usize / 64] |= 1 << (slot % 64);
    }

    fn remove(&mut self, slot: u32) {
        self.words[slot as usize / 64] &= !(1 << (slot % 64));
    }

    fn lowest(&self) -> Option<u32> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i as u32 * 64 + w.trailing_zeros())
    }

    fn highest(&self) -> Option<u32> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i as u32 * 64 + 63 - w.leading_zeros())
    }
}

/// Channel inventory of one cell.
#[derive(Debug, Clone)]
pub struct Cell {
    id: CellId,
    n_original: u32,
    channels: Vec<ChannelState>,
    free: FreeSlots,
    /// Own-channel counts indexed by `ChannelState::slot`.
    counts: [u32; 5],
    borrowed: Vec<BorrowedChannel>,
    /// Borrowed-channel counts indexed by `ChannelState::slot`.
    borrowed_counts: [u32; 5],
}

impl Cell {
    fn new(id: CellId, n: u32) -> Self {
        Cell {
            id,
            n_original: n,
            channels: vec![ChannelState::Free; n as usize],
            free: FreeSlots::full(n),
            counts: [n, 0, 0, 0, 0],
            borrowed: Vec::new(),
            borrowed_counts: [0; 5],
        }
    }

    pub fn id(&self) -> CellId {
        self.id
    }

    pub fn band(&self) -> FrequencyBand {
        self.id.band()
    }

    pub fn group(&self) -> Group {
        self.id.group()
    }

    /// Channels owned before any borrowing (N_m).
    pub fn n_original(&self) -> u32 {
        self.n_original
    }

    /// Own channels, indexed by slot.
    pub fn channels(&self) -> &[ChannelState] {
        &self.channels
    }

    /// Donor channels currently held by this cell.
    pub fn borrowed(&self) -> &[BorrowedChannel] {
        &self.borrowed
    }

    pub fn state(&self, slot: u32) -> Option<ChannelState> {
        self.channels.get(slot as usize).copied()
    }

    /// Number of channels in `state`, own and borrowed together.
    pub fn count(&self, state: ChannelState) -> u32 {
        self.counts[state.slot()] + self.borrowed_counts[state.slot()]
    }

    /// Unused channels the cell can hand to an arriving call (N_av,m).
    pub fn available(&self) -> u32 {
        self.count(ChannelState::Free)
    }

    pub fn busy(&self) -> u32 {
        self.count(ChannelState::Busy) + self.count(ChannelState::InnerOnly)
    }

    pub fn lent(&self) -> u32 {
        self.counts[ChannelState::Lent.slot()]
    }

    /// Channels the cell currently controls (N'_m): own minus lent plus borrowed.
    pub fn channel_count(&self) -> u32 {
        self.n_original - self.lent() + self.borrowed.len() as u32
    }

    fn set_own(&mut self, slot: u32, to: ChannelState) -> Result<(), ClusterError> {
        let from = self.state(slot).ok_or(ClusterError::SlotOutOfRange {
            cell: self.id,
            slot,
        })?;
        if !from.can_become(to) {
            return Err(ClusterError::IllegalTransition {
                cell: self.id,
                slot,
                from,
                to,
            });
        }
        self.channels[slot as usize] = to;
        self.counts[from.slot()] -= 1;
        self.counts[to.slot()] += 1;
        if from == ChannelState::Free {
            self.free.remove(slot);
        }
        if to == ChannelState::Free {
            self.free.insert(slot);
        }
        Ok(())
    }

    fn set_borrowed(
        &mut self,
        donor: CellId,
        slot: u32,
        to: ChannelState,
    ) -> Result<(), ClusterError> {
        let id = self.id;
        let b = self
            .borrowed
            .iter_mut()
            .find(|b| b.donor == donor && b.slot == slot)
            .ok_or(ClusterError::NotBorrowed {
                cell: id,
                donor,
                slot,
            })?;
        if !b.state.can_become(to) || to == ChannelState::Lent {
            return Err(ClusterError::IllegalTransition {
                cell: id,
                slot,
                from: b.state,
                to,
            });
        }
        self.borrowed_counts[b.state.slot()] -= 1;
        self.borrowed_counts[to.slot()] += 1;
        b.state = to;
        Ok(())
    }

    pub(crate) fn push_borrowed(&mut self, channel: BorrowedChannel) {
        self.borrowed_counts[channel.state.slot()] += 1;
        self.borrowed.push(channel);
    }

    /// Removes the borrowed channel at `pos`, keeping the order of the rest.
    pub(crate) fn remove_borrowed(&mut self, pos: usize) -> BorrowedChannel {
        let b = self.borrowed.remove(pos);
        self.borrowed_counts[b.state.slot()] -= 1;
        b
    }

    pub(crate) fn borrowed_position(&self, donor: CellId, slot: u32) -> Option<usize> {
        self.borrowed
            .iter()
            .position(|b| b.donor == donor && b.slot == slot)
    }

    /// Changes one channel's state, enforcing the `Free`-hub state machine.
    pub fn transition(&mut self, channel: ChannelRef, to: ChannelState) -> Result<(), ClusterError> {
        match channel {
            ChannelRef::Own(slot) => self.set_own(slot, to),
            ChannelRef::Borrowed { donor, slot } => self.set_borrowed(donor, slot, to),
        }
    }

    /// Lowest free own slot, falling back to the first idle borrowed channel.
    pub fn first_free(&self) -> Option<ChannelRef> {
        if let Some(slot) = self.free.lowest() {
            return Some(ChannelRef::Own(slot));
        }
        if self.borrowed_counts[ChannelState::Free.slot()] == 0 {
            return None;
        }
        self.borrowed
            .iter()
            .find(|b| b.state == ChannelState::Free)
            .map(|b| ChannelRef::Borrowed {
                donor: b.donor,
                slot: b.slot,
            })
    }

    /// Puts a call on the first free channel; `None` when the cell is full.
    pub fn occupy(&mut self) -> Option<ChannelRef> {
        let channel = self.first_free()?;
        self.transition(channel, ChannelState::Busy)
            .expect("free channel must accept a call");
        Some(channel)
    }

    pub(crate) fn highest_free_own(&self) -> Option<u32> {
        self.free.highest()
    }

    /// True when none of the top `width` own slots is carrying a call.
    pub fn top_slots_idle(&self, width: u32) -> bool {
        let start = self.n_original.saturating_sub(width) as usize;
        self.channels[start..]
            .iter()
            .all(|s| !matches!(s, ChannelState::Busy | ChannelState::InnerOnly))
    }
}

/// The seven cells plus the loan ledger.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub(crate) cells: Vec<Cell>,
    n_per_cell: u32,
    pub(crate) n_th: u32,
    pub(crate) ledger: Vec<Loan>,
}

impl Cluster {
    /// Builds a cluster with `n_per_cell` free channels in every cell and a
    /// per-donor lending floor of `n_th` channels.
    pub fn new(n_per_cell: u32, n_th: u32) -> Result<Self, ClusterError> {
        if n_th > n_per_cell {
            return Err(ClusterError::ThresholdExceedsCapacity {
                n_th,
                n: n_per_cell,
            });
        }
        Ok(Cluster {
            cells: CellId::all().map(|id| Cell::new(id, n_per_cell)).collect(),
            n_per_cell,
            n_th,
            ledger: Vec::new(),
        })
    }

    pub fn n_per_cell(&self) -> u32 {
        self.n_per_cell
    }

    /// Lending floor N_Th.
    pub fn n_th(&self) -> u32 {
        self.n_th
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.index()]
    }

    pub fn cell_mut(&mut self, id: CellId) -> &mut Cell {
        &mut self.cells[id.index()]
    }

    pub fn ledger(&self) -> &[Loan] {
        &self.ledger
    }

    /// Channels currently on loan from `donor`.
    pub fn on_loan(&self, donor: CellId) -> u32 {
        self.ledger
            .iter()
            .filter(|l| l.donor == donor)
            .map(|l| l.count)
            .sum()
    }

    pub fn available(&self, id: CellId) -> u32 {
        self.cell(id).available()
    }

    /// How many more channels `donor` may lend right now:
    /// `min(available, N_m - N_Th - already_lent)`.
    pub fn lendable(&self, donor: CellId) -> Result<u32, ClusterError> {
        if donor.is_reference() {
            return Err(ClusterError::ReferenceCellLends);
        }
        let cell = self.cell(donor);
        let headroom = cell
            .n_original()
            .saturating_sub(self.n_th)
            .saturating_sub(cell.lent());
        Ok(cell.available().min(headroom))
    }

    pub fn total_channels(&self) -> u64 {
        self.cells.iter().map(|c| c.channel_count() as u64).sum()
    }

    /// Conservation and lending-floor check against the cluster's own N_Th.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        self.check_invariants_with_floor(self.n_th)
    }

    /// Same as [`Cluster::check_invariants`] with an externally pinned floor.
    pub fn check_invariants_with_floor(&self, floor: u32) -> Result<(), InvariantViolation> {
        let expected = CELLS as u64 * self.n_per_cell as u64;
        let found = self.total_channels();
        if found != expected {
            return Err(InvariantViolation::Conservation { expected, found });
        }
        for cell in &self.cells {
            let channels = cell.channel_count();
            if cell.id().is_reference() {
                if channels < cell.n_original() {
                    return Err(InvariantViolation::ReferenceShrunk {
                        channels,
                        original: cell.n_original(),
                    });
                }
            } else if channels < floor {
                return Err(InvariantViolation::DonorFloor {
                    cell: cell.id(),
                    channels,
                    floor,
                });
            }
        }
        Ok(())
    }

    /// Per-cell, per-slot state vector; borrowed channels are listed after
    /// the own channels of their holder, sorted by donor and slot.
    pub fn snapshot(&self) -> Vec<Vec<(ChannelRef, ChannelState)>> {
        self.cells
            .iter()
            .map(|c| {
                let mut v: Vec<_> = c
                    .channels
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (ChannelRef::Own(i as u32), *s))
                    .collect();
                let mut b: Vec<_> = c
                    .borrowed
                    .iter()
                    .map(|b| {
                        (
                            ChannelRef::Borrowed {
                                donor: b.donor,
                                slot: b.slot,
                            },
                            b.state,
                        )
                    })
                    .collect();
                b.sort_by_key(|(r, _)| match r {
                    ChannelRef::Borrowed { donor, slot } => (donor.get(), *slot),
                    ChannelRef::Own(s) => (0, *s),
                });
                v.extend(b);
                v
            })
            .collect()
    }

    /// Lowers the lending floor without touching loans. Only used to inject
    /// faults when exercising invariant checks.
    #[doc(hidden)]
    pub fn corrupt_threshold(&mut self, n_th: u32) {
        self.n_th = n_th;
    }

    /// Drops one borrowed channel without returning it. Fault injection only.
    #[doc(hidden)]
    pub fn leak_borrowed_channel(&mut self) -> bool {
        let reference = &mut self.cells[CellId::REFERENCE.index()];
        match reference.borrowed.len() {
            0 => false,
            n => {
                reference.remove_borrowed(n - 1);
                true
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: u8) -> CellId {
        CellId::new(n).unwrap()
    }

    fn make_busy(cluster: &mut Cluster, cell: u8, n: u32) {
        for _ in 0..n {
            cluster.cell_mut(id(cell)).occupy().unwrap();
        }
    }

    #[test]
    fn table_three_cluster_layout() {
        let c = Cluster::new(100, 70).unwrap();
        assert_eq!(c.total_channels(), 700);
        assert_eq!(c.cell(id(1)).band(), FrequencyBand::X);
        for n in [2, 4, 6] {
            assert_eq!(c.cell(id(n)).band(), FrequencyBand::Y);
            assert_eq!(c.cell(id(n)).group(), Group::A);
        }
        for n in [3, 5, 7] {
            assert_eq!(c.cell(id(n)).band(), FrequencyBand::Z);
            assert_eq!(c.cell(id(n)).group(), Group::B);
        }
        assert!(c.ledger().is_empty());
        assert!(c
            .cells()
            .iter()
            .all(|cell| cell.channels().iter().all(|s| *s == ChannelState::Free)));
    }

    #[test]
    fn minimal_and_saturated_thresholds() {
        let c = Cluster::new(1, 0).unwrap();
        assert_eq!(c.total_channels(), 7);
        let c = Cluster::new(100, 100).unwrap();
        for n in 2..=7 {
            assert_eq!(c.lendable(id(n)).unwrap(), 0);
        }
    }

    #[test]
    fn threshold_above_capacity_is_rejected() {
        assert_eq!(
            Cluster::new(100, 120).unwrap_err(),
            ClusterError::ThresholdExceedsCapacity { n_th: 120, n: 100 }
        );
    }

    #[test]
    fn available_counts_free_channels() {
        let mut c = Cluster::new(100, 70).unwrap();
        assert_eq!(c.available(id(3)), 100);
        make_busy(&mut c, 3, 60);
        assert_eq!(c.available(id(3)), 40);
        make_busy(&mut c, 3, 40);
        assert_eq!(c.available(id(3)), 0);
        assert!(c.cell_mut(id(3)).occupy().is_none());
    }

    #[test]
    fn lendable_is_capped_by_floor_and_prior_loans() {
        let mut c = Cluster::new(100, 70).unwrap();
        make_busy(&mut c, 2, 60);
        assert_eq!(c.lendable(id(2)).unwrap(), 30);

        let mut c = Cluster::new(100, 70).unwrap();
        make_busy(&mut c, 2, 80);
        assert_eq!(c.lendable(id(2)).unwrap(), 20);

        // 30 lent, 40 of the remaining 70 free
        let mut c = Cluster::new(100, 70).unwrap();
        for _ in 0..30 {
            let slot = c.cell(id(2)).highest_free_own().unwrap();
            c.cell_mut(id(2))
                .transition(ChannelRef::Own(slot), ChannelState::Lent)
                .unwrap();
        }
        c.ledger.push(Loan {
            donor: id(2),
            borrower: CellId::REFERENCE,
            count: 30,
        });
        make_busy(&mut c, 2, 30);
        assert_eq!(c.available(id(2)), 40);
        assert_eq!(c.lendable(id(2)).unwrap(), 0);
    }

    #[test]
    fn reference_cell_cannot_lend() {
        let c = Cluster::new(100, 70).unwrap();
        assert_eq!(
            c.lendable(CellId::REFERENCE).unwrap_err(),
            ClusterError::ReferenceCellLends
        );
    }

    #[test]
    fn state_machine_only_moves_through_free() {
        let mut c = Cluster::new(4, 0).unwrap();
        let cell = c.cell_mut(id(5));
        let slot = ChannelRef::Own(0);
        cell.transition(slot, ChannelState::Inactivated).unwrap();
        let err = cell.transition(slot, ChannelState::Busy).unwrap_err();
        assert!(matches!(err, ClusterError::IllegalTransition { .. }));
        cell.transition(slot, ChannelState::Free).unwrap();
        cell.transition(slot, ChannelState::InnerOnly).unwrap();
        assert_eq!(cell.available(), 3);
        assert_eq!(cell.busy(), 1);
        assert!(cell.transition(slot, ChannelState::InnerOnly).is_err());
        assert!(cell.transition(ChannelRef::Own(9), ChannelState::Busy).is_err());
    }

    #[test]
    fn occupy_packs_low_slots() {
        let mut c = Cluster::new(130, 70).unwrap();
        let cell = c.cell_mut(id(4));
        for expected in 0..70 {
            assert_eq!(cell.occupy(), Some(ChannelRef::Own(expected)));
        }
        cell.transition(ChannelRef::Own(3), ChannelState::Free).unwrap();
        assert_eq!(cell.occupy(), Some(ChannelRef::Own(3)));
        assert_eq!(cell.highest_free_own(), Some(129));
        assert!(cell.top_slots_idle(60));
        assert!(!cell.top_slots_idle(61));
    }

    #[test]
    fn invariant_check_catches_leaks_and_floor_breaches() {
        let mut c = Cluster::new(10, 7).unwrap();
        assert!(c.check_invariants().is_ok());
        c.cells[1].set_own(9, ChannelState::Lent).unwrap();
        c.cells[1].set_own(8, ChannelState::Lent).unwrap();
        c.cells[1].set_own(7, ChannelState::Lent).unwrap();
        c.cells[1].set_own(6, ChannelState::Lent).unwrap();
        // four channels vanished from cell 2 without reaching cell 1
        let err = c.check_invariants().unwrap_err();
        assert_eq!(
            err,
            InvariantViolation::Conservation {
                expected: 70,
                found: 66
            }
        );
        for slot in 6..10 {
            c.cells[0].push_borrowed(BorrowedChannel {
                donor: id(2),
                slot,
                state: ChannelState::Free,
            });
        }
        assert_eq!(
            c.check_invariants().unwrap_err(),
            InvariantViolation::DonorFloor {
                cell: id(2),
                channels: 6,
                floor: 7
            }
        );
    }
}
