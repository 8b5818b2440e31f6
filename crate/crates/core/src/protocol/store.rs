use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::{BellLabel, PureState};

/// Which particle of a pair's system a handle refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    /// The half Alice keeps.
    Alice,
    /// Whatever arrives at Bob's end of the channel.
    Bob,
    /// Eve's ancilla entangled with the pair.
    EveAncilla,
    /// The genuine particle Eve intercepted.
    EveIntercepted,
    /// Eve's half of the counterfeit pair she sent to Bob.
    EvePartner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticleId {
    pub seq: usize,
    pub slot: Slot,
}

impl ParticleId {
    pub fn new(seq: usize, slot: Slot) -> Self {
        ParticleId { seq, slot }
    }
}

/// Bookkeeping for one EPR pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRecord {
    pub seq: usize,
    pub initial: BellLabel,
    /// True until the channel has delivered Bob's half.
    pub in_transit: bool,
    pub alice_consumed: bool,
    pub bob_consumed: bool,
}

#[derive(Debug, Clone)]
struct System {
    state: PureState,
    particles: Vec<ParticleId>,
}

/// All particles of a session. Pairs stay in separate state vectors until a
/// Bell measurement joins two of them; measured particles are projected out
/// immediately so no system grows past two attacked pairs.
#[derive(Debug, Clone)]
pub struct PairStore {
    records: Vec<PairRecord>,
    systems: Vec<Option<System>>,
    location: BTreeMap<ParticleId, usize>,
}

impl PairStore {
    /// Builds one pair per entry of `initials`, Bob's half in transit.
    pub fn new(initials: &[BellLabel]) -> Result<Self> {
        if initials.len() < 2 {
            return Err(Error::arg(format!(
                "need at least 2 pairs, got {}",
                initials.len()
            )));
        }
        let mut store = PairStore {
            records: Vec::new(),
            systems: Vec::new(),
            location: BTreeMap::new(),
        };
        for (seq, &initial) in initials.iter().enumerate() {
            store.records.push(PairRecord {
                seq,
                initial,
                in_transit: true,
                alice_consumed: false,
                bob_consumed: false,
            });
            store.push_system(
                PureState::bell(initial),
                vec![
                    ParticleId::new(seq, Slot::Alice),
                    ParticleId::new(seq, Slot::Bob),
                ],
            );
        }
        Ok(store)
    }

    fn push_system(&mut self, state: PureState, particles: Vec<ParticleId>) -> usize {
        let id = self.systems.len();
        for p in &particles {
            self.location.insert(*p, id);
        }
        self.systems.push(Some(System { state, particles }));
        id
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[PairRecord] {
        &self.records
    }

    pub fn record(&self, seq: usize) -> Result<&PairRecord> {
        self.records
            .get(seq)
            .ok_or_else(|| Error::Index(format!("no pair with sequence number {seq}")))
    }

    pub fn initials(&self) -> Vec<BellLabel> {
        self.records.iter().map(|r| r.initial).collect()
    }

    pub fn contains(&self, p: ParticleId) -> bool {
        self.location.contains_key(&p)
    }

    /// Joint state of the system holding `p`, with the particle order.
    pub fn system_of(&self, p: ParticleId) -> Result<(&PureState, &[ParticleId])> {
        let id = *self
            .location
            .get(&p)
            .ok_or_else(|| Error::arg(format!("particle {p:?} is not available")))?;
        let sys = self.systems[id].as_ref().expect("located systems exist");
        Ok((&sys.state, &sys.particles))
    }

    /// Replaces the state of pair `seq`'s system, which must still hold
    /// exactly Alice's and Bob's particles.
    pub(crate) fn replace_pair_system(
        &mut self,
        seq: usize,
        state: PureState,
        particles: Vec<ParticleId>,
    ) -> Result<()> {
        let alice = ParticleId::new(seq, Slot::Alice);
        let id = *self
            .location
            .get(&alice)
            .ok_or_else(|| Error::arg(format!("pair {seq} already measured")))?;
        let sys = self.systems[id].as_ref().expect("located systems exist");
        if sys.particles != [alice, ParticleId::new(seq, Slot::Bob)] {
            return Err(Error::arg(format!(
                "pair {seq} is no longer an isolated pair"
            )));
        }
        for p in &sys.particles {
            self.location.remove(p);
        }
        for p in &particles {
            self.location.insert(*p, id);
        }
        self.systems[id] = Some(System { state, particles });
        Ok(())
    }

    /// Adds a fresh system, e.g. an adversary's counterfeit pair.
    pub(crate) fn add_system(&mut self, state: PureState, particles: Vec<ParticleId>) {
        self.push_system(state, particles);
    }

    pub(crate) fn relabel(&mut self, from: ParticleId, to: ParticleId) -> Result<()> {
        let id = self
            .location
            .remove(&from)
            .ok_or_else(|| Error::arg(format!("particle {from:?} is not available")))?;
        let sys = self.systems[id].as_mut().expect("located systems exist");
        let pos = sys
            .particles
            .iter()
            .position(|p| *p == from)
            .expect("location map is consistent");
        sys.particles[pos] = to;
        self.location.insert(to, id);
        Ok(())
    }

    pub fn deliver_all(&mut self) {
        self.records.iter_mut().for_each(|r| r.in_transit = false);
    }

    fn merge(&mut self, keep: usize, other: usize) {
        let b = self.systems[other].take().expect("merge source exists");
        let a = self.systems[keep].as_mut().expect("merge target exists");
        a.state = a.state.tensor(&b.state);
        a.particles.extend(b.particles.iter().copied());
        for p in b.particles {
            self.location.insert(p, keep);
        }
    }

    /// Bell-measures particles `first` and `second` (in that order) and
    /// removes them from the store.
    pub fn bell_measure(
        &mut self,
        first: ParticleId,
        second: ParticleId,
        rng: &mut impl Rng,
    ) -> Result<BellLabel> {
        if first == second {
            return Err(Error::arg("cannot pair a particle with itself"));
        }
        for p in [first, second] {
            if !self.location.contains_key(&p) {
                return Err(Error::arg(format!(
                    "particle {p:?} was already measured or never existed"
                )));
            }
            if p.slot == Slot::Bob && self.record(p.seq)?.in_transit {
                return Err(Error::arg(format!("particle {p:?} has not been delivered")));
            }
        }
        let (s1, s2) = (self.location[&first], self.location[&second]);
        if s1 != s2 {
            self.merge(s1, s2);
        }
        let sys = self.systems[s1].as_mut().expect("merged system exists");
        let i = sys
            .particles
            .iter()
            .position(|p| *p == first)
            .expect("consistent");
        let j = sys
            .particles
            .iter()
            .position(|p| *p == second)
            .expect("consistent");
        let (label, rest) = sys.state.bell_measure_discard((i, j), rng)?;
        sys.particles.retain(|p| *p != first && *p != second);
        sys.state = rest;
        if sys.particles.is_empty() {
            self.systems[s1] = None;
        }
        for p in [first, second] {
            self.location.remove(&p);
            match p.slot {
                Slot::Alice => self.records[p.seq].alice_consumed = true,
                Slot::Bob => self.records[p.seq].bob_consumed = true,
                _ => {}
            }
        }
        Ok(label)
    }

    /// Largest composite dimension currently held.
    pub fn max_system_dim(&self) -> usize {
        self.systems
            .iter()
            .flatten()
            .map(|s| s.state.dim())
            .max()
            .unwrap_or(1)
    }
}

/// Step 1: prepares one pair per initial label, Bob's halves in transit.
pub fn generate_pairs(initials: &[BellLabel]) -> Result<PairStore> {
    PairStore::new(initials)
}
