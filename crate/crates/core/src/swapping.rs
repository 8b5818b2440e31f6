//! Entanglement swapping on two Bell pairs, and the exact table of correlated
//! outcomes for any pair of initial Bell states.
//!
//! Qubit layout of the swap composite is `(1, 2, 3, 4)` for pairs `1-2` and
//! `3-4`. Alice holds 1 and 3, Bob holds 2 and 4. Alice measures first.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{tensor, BellLabel, PureState};
use crate::rng::{Phase, SeedTree};

/// `table[x][y]` = P(Alice gets label x, Bob gets label y).
pub type OutcomeTable = [[f64; 4]; 4];

/// Count matrix indexed like [`OutcomeTable`].
pub type Histogram = [[u64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapOutcome {
    pub alice: BellLabel,
    pub bob: BellLabel,
}

/// Probabilities of every joint Bell outcome when qubit pair `alice` and then
/// qubit pair `bob` of `state` are Bell-measured. All remaining subsystems are
/// traced out.
pub fn joint_bell_table(
    state: &PureState,
    alice: (usize, usize),
    bob: (usize, usize),
) -> Result<OutcomeTable> {
    let shift = |k: usize| k - [alice.0, alice.1].iter().filter(|&&a| a < k).count();
    if [bob.0, bob.1]
        .iter()
        .any(|b| *b == alice.0 || *b == alice.1)
    {
        return Err(Error::arg("Alice and Bob qubit pairs overlap"));
    }
    let bob_shifted = (shift(bob.0), shift(bob.1));
    let mut table = [[0.0; 4]; 4];
    for x in BellLabel::ALL {
        let (_, rest) = state.bell_project(alice, x)?;
        let Some(rest) = rest else { continue };
        let px = state.bell_probabilities(alice)?[x.index()];
        let py = rest.bell_probabilities(bob_shifted)?;
        for y in BellLabel::ALL {
            table[x.index()][y.index()] = px * py[y.index()];
        }
    }
    Ok(table)
}

fn check_pair(s: &PureState, name: &str) -> Result<()> {
    if s.dims() != [2, 2] {
        return Err(Error::arg(format!(
            "{name} has dims {:?}, expected [2, 2]",
            s.dims()
        )));
    }
    Ok(())
}

/// Bell-measures particles (1,3) for Alice, then (2,4) for Bob. Returns both
/// outcomes and the final four-qubit state in the original layout.
pub fn entanglement_swap(
    pair12: &PureState,
    pair34: &PureState,
    rng: &mut impl Rng,
) -> Result<(SwapOutcome, PureState)> {
    check_pair(pair12, "pair 1-2")?;
    check_pair(pair34, "pair 3-4")?;
    let joint = tensor(pair12, pair34);
    let (alice, after_alice) = joint.bell_measure((0, 2), rng)?;
    let (bob, after_bob) = after_alice.bell_measure((1, 3), rng)?;
    Ok((SwapOutcome { alice, bob }, after_bob))
}

/// Exact joint outcome table for pairs prepared in `init1` and `init2`.
pub fn swap_table(init1: BellLabel, init2: BellLabel) -> OutcomeTable {
    let joint = tensor(&PureState::bell(init1), &PureState::bell(init2));
    joint_bell_table(&joint, (0, 2), (1, 3)).expect("fixed four-qubit layout")
}

/// Monte Carlo histogram of `trials` swaps, seeded from `seed`.
pub fn swap_histogram(
    init1: BellLabel,
    init2: BellLabel,
    trials: u64,
    seed: u64,
) -> Result<Histogram> {
    if trials == 0 {
        return Err(Error::arg("trials must be at least 1"));
    }
    let mut rng = SeedTree::new(seed).stream(Phase::Sampling);
    let (a, b) = (PureState::bell(init1), PureState::bell(init2));
    let mut hist = [[0u64; 4]; 4];
    for _ in 0..trials {
        let (out, _) = entanglement_swap(&a, &b, &mut rng)?;
        hist[out.alice.index()][out.bob.index()] += 1;
    }
    Ok(hist)
}

/// Bob's outcome implied by Alice's, for the given initial states.
pub fn expected_partner(init1: BellLabel, init2: BellLabel, alice: BellLabel) -> BellLabel {
    partner_map()[init1.index()][init2.index()][alice.index()]
}

type PartnerMap = [[[BellLabel; 4]; 4]; 4];

fn partner_map() -> &'static PartnerMap {
    static MAP: OnceLock<PartnerMap> = OnceLock::new();
    MAP.get_or_init(|| {
        let mut map = [[[BellLabel::PhiPlus; 4]; 4]; 4];
        for i in BellLabel::ALL {
            for j in BellLabel::ALL {
                let table = swap_table(i, j);
                for x in BellLabel::ALL {
                    let row = &table[x.index()];
                    let nonzero: Vec<usize> = (0..4).filter(|&y| row[y] > 1e-12).collect();
                    assert_eq!(
                        nonzero.len(),
                        1,
                        "swap correlations must be deterministic for Bell inputs"
                    );
                    map[i.index()][j.index()][x.index()] = BellLabel::ALL[nonzero[0]];
                }
            }
        }
        map
    })
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use BellLabel::*;

    #[test]
    fn phi_phi_table_is_diagonal_quarter() {
        let t = swap_table(PhiPlus, PhiPlus);
        for x in 0..4 {
            for y in 0..4 {
                let want = if x == y { 0.25 } else { 0.0 };
                assert!((t[x][y] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn every_table_is_a_quarter_weighted_permutation() {
        for i in BellLabel::ALL {
            for j in BellLabel::ALL {
                let t = swap_table(i, j);
                let mut cols = [0; 4];
                for (x, row) in t.iter().enumerate() {
                    let marginal: f64 = row.iter().sum();
                    assert!((marginal - 0.25).abs() < 1e-12);
                    for (y, &p) in row.iter().enumerate() {
                        assert!(p.abs() < 1e-12 || (p - 0.25).abs() < 1e-12);
                        if p > 1e-12 {
                            cols[y] += 1;
                            assert_eq!(expected_partner(i, j, BellLabel::ALL[x]).index(), y);
                        }
                    }
                }
                assert_eq!(cols, [1, 1, 1, 1]);
            }
        }
    }

    #[test]
    fn partner_examples() {
        for x in BellLabel::ALL {
            assert_eq!(expected_partner(PhiPlus, PhiPlus, x), x);
        }
        assert_eq!(expected_partner(PhiPlus, PsiPlus, PhiPlus), PsiPlus);
        assert_eq!(expected_partner(PsiMinus, PsiMinus, PhiMinus), PhiMinus);
    }

    #[test]
    fn swap_leaves_untouched_particles_in_partner_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let (out, state) = entanglement_swap(
                &PureState::bell(PhiPlus),
                &PureState::bell(PhiPlus),
                &mut rng,
            )
            .unwrap();
            assert_eq!(out.alice, out.bob);
            let p = state.bell_probabilities((1, 3)).unwrap();
            assert!((p[out.bob.index()] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_rejects_wrong_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = PureState::basis(vec![2], 0).unwrap();
        assert!(entanglement_swap(&q, &PureState::bell(PhiPlus), &mut rng).is_err());
    }

    #[test]
    fn histogram_edge_cases() {
        assert!(swap_histogram(PhiPlus, PhiPlus, 0, 1).is_err());
        let h = swap_histogram(PhiPlus, PsiPlus, 1, 1).unwrap();
        assert_eq!(h.iter().flatten().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.iter().flatten().sum::<u64>(), 1);
    }

    #[test]
    fn histogram_is_seed_deterministic() {
        assert_eq!(
            swap_histogram(PsiMinus, PhiMinus, 500, 3).unwrap(),
            swap_histogram(PsiMinus, PhiMinus, 500, 3).unwrap()
        );
    }

    #[test]
    fn measurement_order_does_not_change_the_joint_table() {
        for i in BellLabel::ALL {
            for j in BellLabel::ALL {
                let joint = tensor(&PureState::bell(i), &PureState::bell(j));
                let alice_first = joint_bell_table(&joint, (0, 2), (1, 3)).unwrap();
                let bob_first = joint_bell_table(&joint, (1, 3), (0, 2)).unwrap();
                for x in 0..4 {
                    for y in 0..4 {
                        assert!((alice_first[x][y] - bob_first[y][x]).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
