//! Rule sets and phase interning.
//!
//! A phase is the set of rules currently enabled in a self-modifying
//! pushdown system. Phases are stored as bitsets over rule ids and interned
//! in a [`PhaseTable`] so that each distinct set gets exactly one
//! [`PhaseId`].

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::model::RuleId;

/// A set of rule ids, backed by a bitset sized to the rule universe.
///
/// Equality, ordering and hashing ignore the bitset width, so two sets with
/// the same members compare equal even if they were built over different
/// universes.
#[derive(Clone, Default)]
pub struct RuleSet(FixedBitSet);

impl RuleSet {
    fn blocks(&self) -> &[usize] {
        let raw = self.0.as_slice();
        let used = raw.iter().rposition(|&b| b != 0).map_or(0, |i| i + 1);
        &raw[..used]
    }
}

impl PartialEq for RuleSet {
    fn eq(&self, other: &Self) -> bool {
        self.blocks() == other.blocks()
    }
}

impl Eq for RuleSet {}

impl std::hash::Hash for RuleSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.blocks().hash(state);
    }
}

impl Ord for RuleSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for RuleSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl RuleSet {
    pub fn empty(universe: usize) -> Self {
        RuleSet(FixedBitSet::with_capacity(universe))
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        RuleSet(bits)
    }

    pub fn from_ids<I: IntoIterator<Item = RuleId>>(universe: usize, ids: I) -> Self {
        let mut set = Self::empty(universe);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    /// Grows the universe; existing members are kept.
    pub fn grow(&mut self, universe: usize) {
        self.0.grow(universe);
    }

    pub fn insert(&mut self, id: RuleId) {
        if id.index() >= self.0.len() {
            self.0.grow(id.index() + 1);
        }
        self.0.insert(id.index());
    }

    pub fn remove(&mut self, id: RuleId) {
        if id.index() < self.0.len() {
            self.0.set(id.index(), false);
        }
    }

    pub fn contains(&self, id: RuleId) -> bool {
        self.0.contains(id.index())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn intersects(&self, other: &RuleSet) -> bool {
        !self.0.is_disjoint(&other.0)
    }

    pub fn is_subset(&self, other: &RuleSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union_with(&mut self, other: &RuleSet) {
        self.0.union_with(&other.0);
    }

    /// `(self \ remove) ∪ add`, the phase update of a modifying rule.
    pub fn rewrite(&self, remove: &RuleSet, add: &RuleSet) -> RuleSet {
        let mut out = self.0.clone();
        out.grow(add.universe());
        out.difference_with(&remove.0);
        out.union_with(&add.0);
        RuleSet(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.0.ones().map(|i| RuleId(i as u32))
    }
}

impl fmt::Debug for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|r| r.0)).finish()
    }
}

/// Interned identity of a phase within one [`PhaseTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseId(pub u32);

impl PhaseId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interner for phases. Identity equality coincides with set equality.
#[derive(Clone, Debug, Default)]
pub struct PhaseTable {
    sets: Vec<RuleSet>,
    index: HashMap<RuleSet, PhaseId>,
}

impl PhaseTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `set`, allocating one if it is new.
    pub fn intern(&mut self, set: &RuleSet) -> PhaseId {
        let key = set.clone();
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = PhaseId(self.sets.len() as u32);
        self.sets.push(key.clone());
        self.index.insert(key, id);
        id
    }

    pub fn lookup(&self, set: &RuleSet) -> Option<PhaseId> {
        self.index.get(set).copied()
    }

    pub fn get(&self, id: PhaseId) -> &RuleSet {
        &self.sets[id.index()]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = PhaseId> {
        (0..self.sets.len() as u32).map(PhaseId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PhaseId, &RuleSet)> {
        self.sets
            .iter()
            .enumerate()
            .map(|(i, s)| (PhaseId(i as u32), s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<RuleId> {
        v.iter().map(|&i| RuleId(i)).collect()
    }

    #[test]
    fn interning_is_set_equality() {
        let mut table = PhaseTable::new();
        let a = RuleSet::from_ids(8, ids(&[1, 3]));
        let b = RuleSet::from_ids(4, ids(&[3, 1]));
        let c = RuleSet::from_ids(8, ids(&[1]));
        let ia = table.intern(&a);
        assert_eq!(ia, table.intern(&b));
        assert_ne!(ia, table.intern(&c));
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn rewrite_removes_then_adds() {
        let theta = RuleSet::from_ids(6, ids(&[0, 1, 2]));
        let remove = RuleSet::from_ids(6, ids(&[1, 2]));
        let add = RuleSet::from_ids(6, ids(&[2, 5]));
        let out = theta.rewrite(&remove, &add);
        assert_eq!(out.iter().collect::<Vec<_>>(), ids(&[0, 2, 5]));
    }
}
