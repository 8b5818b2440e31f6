use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::attack::AncillaAttack;
use crate::error::Result;
use crate::protocol::{PairStore, ParticleId, Slot};
use crate::quantum::{BellLabel, PureState};

/// What happens to Bob's halves in transit.
// built once per session, so the inline attack is not worth boxing
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum Channel {
    Clean,
    /// Eve keeps every genuine particle and forwards half of a fresh `|Φ+⟩`
    /// of her own, keeping the partner to mirror Bob's measurements later.
    InterceptResend,
    /// The same ancilla interaction on every pair. For a pair prepared in a
    /// Bell state other than `|Φ+⟩` the state is `(P ⊗ I ⊗ I)|φ⟩_ABE` with
    /// `P` Alice's local Pauli taking `|Φ+⟩` to that Bell state; Eve's
    /// channel touches only B and E, so it commutes with `P`.
    Ancilla(AncillaAttack),
}

fn alice_pauli(label: BellLabel) -> DMatrix<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let m = |e: [f64; 4]| DMatrix::from_row_slice(2, 2, &e.map(c));
    match label {
        BellLabel::PhiPlus => m([1., 0., 0., 1.]),
        BellLabel::PhiMinus => m([1., 0., 0., -1.]),
        BellLabel::PsiPlus => m([0., 1., 1., 0.]),
        // Z·X
        BellLabel::PsiMinus => m([0., 1., -1., 0.]),
    }
}

impl Channel {
    pub fn name(&self) -> &'static str {
        match self {
            Channel::Clean => "none",
            Channel::InterceptResend => "intercept-resend",
            Channel::Ancilla(_) => "ancilla",
        }
    }

    /// Delivers every in-transit particle to Bob.
    pub fn transmit(&self, store: &mut PairStore, _rng: &mut impl Rng) -> Result<()> {
        match self {
            Channel::Clean => {}
            Channel::InterceptResend => intercept_resend_channel(store)?,
            Channel::Ancilla(att) => {
                let base = att.state();
                for seq in 0..store.len() {
                    let init = store.record(seq)?.initial;
                    let state = base.apply(&alice_pauli(init), &[0])?;
                    store.replace_pair_system(
                        seq,
                        state,
                        vec![
                            ParticleId::new(seq, Slot::Alice),
                            ParticleId::new(seq, Slot::Bob),
                            ParticleId::new(seq, Slot::EveAncilla),
                        ],
                    )?;
                }
            }
        }
        store.deliver_all();
        Ok(())
    }
}

/// Replaces every transmitted particle with half of a fresh `|Φ+⟩` held by
/// Eve.
pub fn intercept_resend_channel(store: &mut PairStore) -> Result<()> {
    for seq in 0..store.len() {
        store.relabel(
            ParticleId::new(seq, Slot::Bob),
            ParticleId::new(seq, Slot::EveIntercepted),
        )?;
        store.add_system(
            PureState::bell(BellLabel::PhiPlus),
            vec![
                ParticleId::new(seq, Slot::EvePartner),
                ParticleId::new(seq, Slot::Bob),
            ],
        );
    }
    Ok(())
}
