use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::bell::BellLabel;
use super::density::DensityMatrix;
use super::layout::IndexSplit;
use crate::error::{Error, Result};

/// Branches at or below this probability are treated as impossible when
/// sampling measurement outcomes.
pub const ZERO_BRANCH: f64 = 1e-14;

const NORM_SLACK: f64 = 1e-9;

/// Dense pure state over an ordered list of subsystems. Index convention is
/// big-endian: subsystem 0 is the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Builds a state, renormalising away rounding error. Inputs whose squared
    /// norm is further than 1e-9 from one are rejected.
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::arg("subsystem dimension 0"));
        }
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(Error::arg(format!(
                "{} amplitudes for composite dimension {total}",
                amps.len()
            )));
        }
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_SLACK {
            return Err(Error::invariant(format!("squared norm {n2} is not 1")));
        }
        Ok(Self::from_unnormalized(dims, amps, n2))
    }

    /// Normalises an arbitrary nonzero vector.
    pub fn normalized(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(Error::arg(format!(
                "{} amplitudes for composite dimension {total}",
                amps.len()
            )));
        }
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if n2 <= f64::MIN_POSITIVE {
            return Err(Error::arg("zero vector cannot be normalised"));
        }
        Ok(Self::from_unnormalized(dims, amps, n2))
    }

    fn from_unnormalized(dims: Vec<usize>, mut amps: Vec<Complex64>, n2: f64) -> Self {
        let s = n2.sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= s);
        PureState { dims, amps }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::Index(format!("basis index {index} >= {total}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); total];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { dims, amps })
    }

    pub fn bell(label: BellLabel) -> Self {
        PureState {
            dims: vec![2, 2],
            amps: label.amplitudes().to_vec(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        PureState { dims, amps }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::arg(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`, the phase-insensitive comparison.
    pub fn overlap_sq(&self, other: &PureState) -> Result<f64> {
        self.inner(other).map(|c| c.norm_sqr())
    }

    fn check_qubit_pair(&self, qubits: (usize, usize)) -> Result<IndexSplit> {
        let (i, j) = qubits;
        let split = IndexSplit::new(&self.dims, &[i, j])?;
        if self.dims[i] != 2 || self.dims[j] != 2 {
            return Err(Error::arg(format!(
                "subsystems {i},{j} are not both qubits"
            )));
        }
        Ok(split)
    }

    /// Unnormalised residual `(⟨label|_{ij} ⊗ I)|ψ⟩` on the other subsystems.
    fn bell_residual(&self, split: &IndexSplit, label: BellLabel) -> Vec<Complex64> {
        let bell = label.amplitudes();
        (0..split.rest_dim)
            .map(|r| {
                (0..4)
                    .map(|p| bell[p].conj() * self.amps[split.at(r, p)])
                    .sum()
            })
            .collect()
    }

    /// Born probabilities of the four Bell outcomes on qubits `(i, j)`, with
    /// `i` as the first qubit of the Bell pair.
    pub fn bell_probabilities(&self, qubits: (usize, usize)) -> Result<[f64; 4]> {
        let split = self.check_qubit_pair(qubits)?;
        let mut out = [0.0; 4];
        for l in BellLabel::ALL {
            out[l.index()] = self
                .bell_residual(&split, l)
                .iter()
                .map(|a| a.norm_sqr())
                .sum();
        }
        Ok(out)
    }

    /// Projects qubits `(i, j)` onto `label` and returns the branch probability
    /// and the normalised state of the remaining subsystems (`None` for a
    /// zero-probability branch).
    pub fn bell_project(
        &self,
        qubits: (usize, usize),
        label: BellLabel,
    ) -> Result<(f64, Option<PureState>)> {
        let split = self.check_qubit_pair(qubits)?;
        let res = self.bell_residual(&split, label);
        let p: f64 = res.iter().map(|a| a.norm_sqr()).sum();
        if p <= ZERO_BRANCH {
            return Ok((p, None));
        }
        Ok((
            p,
            Some(Self::from_unnormalized(split.rest_dims.clone(), res, p)),
        ))
    }

    fn sample_bell(
        &self,
        split: &IndexSplit,
        rng: &mut impl Rng,
    ) -> (BellLabel, Vec<Complex64>, f64) {
        let residuals: Vec<Vec<Complex64>> = BellLabel::ALL
            .iter()
            .map(|&l| self.bell_residual(split, l))
            .collect();
        let probs: Vec<f64> = residuals
            .iter()
            .map(|r| r.iter().map(|a| a.norm_sqr()).sum::<f64>())
            .map(|p| if p <= ZERO_BRANCH { 0.0 } else { p })
            .collect();
        let total: f64 = probs.iter().sum();
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = probs
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("normalised state has a branch");
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if p > 0.0 && u < acc {
                pick = k;
                break;
            }
        }
        let label = BellLabel::ALL[pick];
        (label, residuals.into_iter().nth(pick).unwrap(), probs[pick])
    }

    /// Bell measurement on qubits `(i, j)`. The returned state keeps the full
    /// subsystem layout: the measured pair is exactly the outcome Bell state.
    pub fn bell_measure(
        &self,
        qubits: (usize, usize),
        rng: &mut impl Rng,
    ) -> Result<(BellLabel, PureState)> {
        let split = self.check_qubit_pair(qubits)?;
        let (label, res, p) = self.sample_bell(&split, rng);
        let s = p.sqrt().recip();
        let bell = label.amplitudes();
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (r, a) in res.iter().enumerate() {
            for (q, b) in bell.iter().enumerate() {
                amps[split.at(r, q)] = b * a * s;
            }
        }
        Ok((
            label,
            PureState {
                dims: self.dims.clone(),
                amps,
            },
        ))
    }

    /// Bell measurement that discards the measured pair, returning the
    /// post-measurement state of the other subsystems only.
    pub fn bell_measure_discard(
        &self,
        qubits: (usize, usize),
        rng: &mut impl Rng,
    ) -> Result<(BellLabel, PureState)> {
        let split = self.check_qubit_pair(qubits)?;
        let (label, res, p) = self.sample_bell(&split, rng);
        Ok((label, Self::from_unnormalized(split.rest_dims, res, p)))
    }

    /// Applies a unitary acting on `targets` (in the order given).
    pub fn apply(&self, unitary: &DMatrix<Complex64>, targets: &[usize]) -> Result<PureState> {
        let split = IndexSplit::new(&self.dims, targets)?;
        let d = split.picked_dim;
        if unitary.nrows() != d || unitary.ncols() != d {
            return Err(Error::arg(format!(
                "{}x{} operator on a {d}-dimensional target",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for r in 0..split.rest_dim {
            for p in 0..d {
                amps[split.at(r, p)] = (0..d)
                    .map(|q| unitary[(p, q)] * self.amps[split.at(r, q)])
                    .sum();
            }
        }
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_SLACK {
            return Err(Error::arg("operator is not norm preserving"));
        }
        Ok(Self::from_unnormalized(self.dims.clone(), amps, n2))
    }

    /// Reorders subsystems: subsystem `order[k]` of `self` becomes subsystem `k`.
    pub fn permute(&self, order: &[usize]) -> Result<PureState> {
        if order.len() != self.dims.len() {
            return Err(Error::arg("permutation length mismatch"));
        }
        let split = IndexSplit::new(&self.dims, order)?;
        let dims: Vec<usize> = order.iter().map(|&i| self.dims[i]).collect();
        let amps = (0..split.picked_dim)
            .map(|p| self.amps[split.at(0, p)])
            .collect();
        Ok(PureState { dims, amps })
    }

    pub fn density(&self) -> DensityMatrix {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |r, c| self.amps[r] * self.amps[c].conj());
        DensityMatrix::from_parts(self.dims.clone(), m)
    }

    /// Reduced state on `keep` (kept subsystems stay in their original order),
    /// computed directly from the amplitudes.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::arg("partial trace must keep at least one subsystem"));
        }
        let split = IndexSplit::new(&self.dims, &keep)?;
        let d = split.picked_dim;
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for r in 0..split.rest_dim {
            for p in 0..d {
                let a = self.amps[split.at(r, p)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for q in 0..d {
                    m[(p, q)] += a * self.amps[split.at(r, q)].conj();
                }
            }
        }
        let dims = keep.iter().map(|&i| self.dims[i]).collect();
        Ok(DensityMatrix::from_parts(dims, m))
    }
}

/// Composite `a ⊗ b`.
pub fn tensor(a: &PureState, b: &PureState) -> PureState {
    a.tensor(b)
}

pub fn bell_state(label: BellLabel) -> PureState {
    PureState::bell(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn basis_product() {
        let z = PureState::basis(vec![2], 0).unwrap();
        let s = tensor(&z, &z);
        assert_eq!(s.dims(), &[2, 2]);
        assert_eq!(s.amps(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn phi_plus_squared_amplitude_table() {
        // Composite order 1,2,3,4: support on |0000⟩,|0011⟩,|1100⟩,|1111⟩.
        let s = tensor(
            &bell_state(BellLabel::PhiPlus),
            &bell_state(BellLabel::PhiPlus),
        );
        for (i, a) in s.amps().iter().enumerate() {
            let want = if [0, 3, 12, 15].contains(&i) {
                0.5
            } else {
                0.0
            };
            assert!((a - c(want)).norm() < 1e-15, "index {i}");
        }
        // Regrouped as 1,3,2,4: support on |0000⟩,|0101⟩,|1010⟩,|1111⟩.
        let regrouped = s.permute(&[0, 2, 1, 3]).unwrap();
        for (i, a) in regrouped.amps().iter().enumerate() {
            let want = if [0, 5, 10, 15].contains(&i) {
                0.5
            } else {
                0.0
            };
            assert!((a - c(want)).norm() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn bell_constructors_are_exact() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(
            bell_state(BellLabel::PhiPlus).amps(),
            &[c(h), c(0.0), c(0.0), c(h)]
        );
        assert_eq!(
            bell_state(BellLabel::PsiMinus).amps(),
            &[c(0.0), c(h), c(-h), c(0.0)]
        );
        for a in BellLabel::ALL {
            for b in BellLabel::ALL {
                let o = bell_state(a).overlap_sq(&bell_state(b)).unwrap();
                assert!((o - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bell_probabilities_on_eigenstate() {
        let p = bell_state(BellLabel::PhiPlus)
            .bell_probabilities((0, 1))
            .unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert_eq!(&p[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn bell_probabilities_rejects_bad_indices() {
        let s = bell_state(BellLabel::PhiPlus);
        assert!(matches!(s.bell_probabilities((0, 2)), Err(Error::Index(_))));
        assert!(s.bell_probabilities((1, 1)).is_err());
        let q = PureState::basis(vec![2, 3], 0).unwrap();
        assert!(matches!(
            q.bell_probabilities((0, 1)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn measuring_an_eigenstate_leaves_it_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l in BellLabel::ALL {
            let s = bell_state(l);
            for _ in 0..20 {
                let (out, post) = s.bell_measure((0, 1), &mut rng).unwrap();
                assert_eq!(out, l);
                assert!((post.overlap_sq(&s).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swapped_qubit_order_flips_psi_minus_sign_only() {
        // Ψ− is antisymmetric, so measuring (1,0) still yields Ψ− with certainty.
        let s = bell_state(BellLabel::PsiMinus);
        let p = s.bell_probabilities((1, 0)).unwrap();
        assert!((p[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_and_permute() {
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let s = PureState::basis(vec![2, 3], 1).unwrap();
        let t = s.apply(&x, &[0]).unwrap();
        assert_eq!(t.amps()[4], c(1.0));
        let p = t.permute(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        // |1⟩|1⟩ in (3,2) layout is index 1*2 + 1
        assert_eq!(p.amps()[3], c(1.0));
        let bad = DMatrix::from_element(2, 2, c(1.0));
        assert!(s.apply(&bad, &[0]).is_err());
    }

    #[test]
    fn new_validates() {
        assert!(PureState::new(vec![2], vec![c(1.0)]).is_err());
        assert!(PureState::new(vec![2], vec![c(1.0), c(1.0)]).is_err());
        assert!(PureState::normalized(vec![2], vec![c(0.0), c(0.0)]).is_err());
        let s = PureState::normalized(vec![2], vec![c(3.0), c(4.0)]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }
}
