//! Eavesdropping models: intercept-and-resend, and the general per-pair
//! ancilla attack in Schmidt form together with its outcome statistics.

mod attack;
mod channel;
mod tables;

pub use attack::{
    attack_to_json, intercept_resend_attack, intercept_resend_unitary, load_attack, parse_attack,
    partial_swap_attack, partial_swap_unitary, product_attack, random_attack, random_weak_attack,
    schmidt_form, AncillaAttack, AttackFile, CouplingVectors, SchmidtForm, ANCILLA_DIM,
};
pub use channel::Channel;
pub use tables::{
    ab_e_entropy, closed_form_table, disturbance_d, disturbance_from_table, eve_ensemble,
    eve_holevo, forbidden_mass, joint_outcome_table, off_diagonal_mass,
};

/// The attack state `|φ⟩_ABE`.
pub fn attack_state(att: &AncillaAttack) -> crate::quantum::PureState {
    att.state()
}

pub fn coupling_vectors(att: &AncillaAttack) -> CouplingVectors {
    att.coupling_vectors()
}
