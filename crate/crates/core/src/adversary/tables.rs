//! Joint statistics of an entanglement swap across two identically attacked
//! pairs. Layout of the composite is `(A1, B1, E1, A2, B2, E2)`.

use num_complex::Complex64;

use super::attack::{AncillaAttack, CouplingVectors};
use crate::error::Result;
use crate::quantum::{fidelity_sq, holevo_quantity, BellLabel, DensityMatrix, Ensemble, PureState};
use crate::swapping::{expected_partner, joint_bell_table, OutcomeTable};

const ALICE: (usize, usize) = (0, 3);
const BOB: (usize, usize) = (1, 4);

fn two_pairs(att: &AncillaAttack) -> PureState {
    let s = att.state();
    s.tensor(&s)
}

/// P(Alice gets X, Bob gets Y) by explicit tensor algebra on the 256-dim
/// composite.
pub fn joint_outcome_table(att: &AncillaAttack) -> OutcomeTable {
    joint_bell_table(&two_pairs(att), ALICE, BOB).expect("fixed layout")
}

/// Bell-state coefficients times √2, indexed `[label][2·first + second]`.
const BELL_SIGNS: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0, -1.0],
    [0.0, 1.0, 1.0, 0.0],
    [0.0, 1.0, -1.0, 0.0],
];

/// The same table from the coupling vectors alone:
/// `P(X, Y) = ¼ Σ_{r,s} |Σ_{l,m} σ^X_{a(l)a(m)} σ^Y_{b(l)b(m)} v_l[r] v_m[s]|²`,
/// where `l = 2a(l) + b(l)` splits an AB basis index into Alice's and Bob's
/// bits.
pub fn closed_form_table(v: &CouplingVectors) -> OutcomeTable {
    let mut table = [[0.0; 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            let mut p = 0.0;
            for r in 0..4 {
                for s in 0..4 {
                    let mut amp = Complex64::new(0.0, 0.0);
                    for l in 0..4 {
                        for m in 0..4 {
                            let k = BELL_SIGNS[x][2 * (l >> 1) + (m >> 1)]
                                * BELL_SIGNS[y][2 * (l & 1) + (m & 1)];
                            if k != 0.0 {
                                amp += v.0[l][r] * v.0[m][s] * k;
                            }
                        }
                    }
                    p += amp.norm_sqr();
                }
            }
            table[x][y] = p / 4.0;
        }
    }
    table
}

/// Total probability of the twelve outcome pairs that cannot occur without
/// interference.
pub fn forbidden_mass(att: &AncillaAttack) -> f64 {
    off_diagonal_mass(&joint_outcome_table(att))
}

pub fn off_diagonal_mass(table: &OutcomeTable) -> f64 {
    let mut m = 0.0;
    for (x, row) in table.iter().enumerate() {
        for (y, p) in row.iter().enumerate() {
            if x != y {
                m += p;
            }
        }
    }
    m
}

/// Detection probability `d`: Alice measures first, Bob's pair is left in
/// `ρ_X` (Eve traced out), and `d = Σ_X p(X) (1 − ⟨ξ_X|ρ_X|ξ_X⟩)` with `ξ_X`
/// the correlated Bell state.
pub fn disturbance_d(att: &AncillaAttack) -> f64 {
    let joint = two_pairs(att);
    let mut d = 0.0;
    for x in BellLabel::ALL {
        let (p, rest) = joint.bell_project(ALICE, x).expect("fixed layout");
        let Some(rest) = rest else { continue };
        // rest = (B1, E1, B2, E2)
        let rho_b = rest.reduced(&[0, 2]).expect("fixed layout");
        let xi = PureState::bell(expected_partner(BellLabel::PhiPlus, BellLabel::PhiPlus, x));
        d += p * (1.0 - fidelity_sq(&xi, &rho_b).expect("matching dims"));
    }
    d.clamp(0.0, 1.0)
}

/// `d` read off the joint table: one minus the probability of correlated
/// outcomes.
pub fn disturbance_from_table(table: &OutcomeTable) -> f64 {
    let hit: f64 = BellLabel::ALL
        .iter()
        .map(|&x| {
            table[x.index()][expected_partner(BellLabel::PhiPlus, BellLabel::PhiPlus, x).index()]
        })
        .sum();
    (1.0 - hit).clamp(0.0, 1.0)
}

/// Eve's ensemble about Bob's outcome: `{p(Y), ρ_E|Y}` over her two ancillas.
pub fn eve_ensemble(att: &AncillaAttack) -> Result<Ensemble> {
    let joint = two_pairs(att);
    let mut items: Vec<(f64, DensityMatrix)> = Vec::with_capacity(4);
    for y in BellLabel::ALL {
        let (p, rest) = joint.bell_project(BOB, y)?;
        if let Some(rest) = rest {
            // rest = (A1, E1, A2, E2)
            items.push((p, rest.reduced(&[1, 3])?));
        }
    }
    let total: f64 = items.iter().map(|(p, _)| p).sum();
    items.iter_mut().for_each(|(p, _)| *p /= total);
    Ensemble::new(items)
}

/// Holevo quantity of Eve's ensemble about Bob's key symbol, in bits.
pub fn eve_holevo(att: &AncillaAttack) -> f64 {
    holevo_quantity(&eve_ensemble(att).expect("attack states are valid")).clamp(0.0, 2.0)
}

/// Entanglement across `AB : E` of one attacked pair, in bits.
pub fn ab_e_entropy(att: &AncillaAttack) -> f64 {
    crate::quantum::von_neumann_entropy(&att.state().reduced(&[0, 1]).expect("fixed layout"))
}
