use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One of the four Bell states. Doubles as the protocol's measurement
/// alphabet and its 2-bit key symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<BellLabel> {
        Self::ALL.get(i).copied()
    }

    /// Key symbol: Φ+ → 00, Φ− → 01, Ψ+ → 10, Ψ− → 11.
    pub fn bits(self) -> [u8; 2] {
        let i = self.index() as u8;
        [i >> 1, i & 1]
    }

    pub fn from_bits(hi: u8, lo: u8) -> Option<BellLabel> {
        if hi > 1 || lo > 1 {
            return None;
        }
        Self::from_index(((hi << 1) | lo) as usize)
    }

    /// Amplitudes over |00⟩, |01⟩, |10⟩, |11⟩.
    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (z, p, m) = (
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
        );
        match self {
            BellLabel::PhiPlus => [p, z, z, p],
            BellLabel::PhiMinus => [p, z, z, m],
            BellLabel::PsiPlus => [z, p, p, z],
            BellLabel::PsiMinus => [z, p, m, z],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi+" | "phiplus" | "phi_plus" => Ok(BellLabel::PhiPlus),
            "phi-" | "phiminus" | "phi_minus" => Ok(BellLabel::PhiMinus),
            "psi+" | "psiplus" | "psi_plus" => Ok(BellLabel::PsiPlus),
            "psi-" | "psiminus" | "psi_minus" => Ok(BellLabel::PsiMinus),
            other => Err(Error::Parse(format!("unknown Bell label `{other}`"))),
        }
    }
}

/// Encode a label stream into a bit string, two characters per label.
pub fn encode_key(labels: &[BellLabel]) -> String {
    labels
        .iter()
        .flat_map(|l| l.bits())
        .map(|b| if b == 1 { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_bits_bijection() {
        for (i, l) in BellLabel::ALL.iter().enumerate() {
            assert_eq!(l.index(), i);
            let [hi, lo] = l.bits();
            assert_eq!(BellLabel::from_bits(hi, lo), Some(*l));
        }
        assert_eq!(BellLabel::PhiMinus.bits(), [0, 1]);
        assert_eq!(BellLabel::PsiPlus.bits(), [1, 0]);
        assert_eq!(BellLabel::from_bits(2, 0), None);
    }

    #[test]
    fn parse_roundtrip() {
        for l in BellLabel::ALL {
            assert_eq!(l.name().parse::<BellLabel>().unwrap(), l);
        }
        assert!("bell".parse::<BellLabel>().is_err());
    }

    #[test]
    fn key_encoding() {
        use BellLabel::*;
        assert_eq!(
            encode_key(&[PhiPlus, PhiMinus, PsiPlus, PsiMinus]),
            "00011011"
        );
    }
}
