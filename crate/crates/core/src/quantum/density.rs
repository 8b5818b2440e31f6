use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::IndexSplit;
use super::state::PureState;
use crate::error::{Error, Result};

/// Slack for the Hermitian, trace and positivity checks.
pub const DENSITY_TOL: f64 = 1e-10;

/// Dense density matrix over an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: DMatrix<Complex64>,
}

/// Eigenvalues of a density matrix after clamping numerical negatives to 0.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Largest magnitude removed by clamping.
    pub clamped: f64,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian, unit trace and positive
    /// semidefinite, each within [`DENSITY_TOL`].
    pub fn new(dims: Vec<usize>, mat: DMatrix<Complex64>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::arg(format!(
                "{}x{} matrix for composite dimension {d}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        for r in 0..d {
            for c in r..d {
                if (mat[(r, c)] - mat[(c, r)].conj()).norm() > DENSITY_TOL {
                    return Err(Error::invariant(format!("not Hermitian at ({r},{c})")));
                }
            }
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::invariant(format!("trace {tr} is not 1")));
        }
        let rho = DensityMatrix { dims, mat };
        let min = rho
            .raw_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -DENSITY_TOL {
            return Err(Error::invariant(format!("negative eigenvalue {min}")));
        }
        Ok(rho)
    }

    /// Unchecked constructor for matrices produced by the kernel itself.
    pub(crate) fn from_parts(dims: Vec<usize>, mat: DMatrix<Complex64>) -> Self {
        DensityMatrix { dims, mat }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.density()
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let mat = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        DensityMatrix { dims, mat }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(dims: Vec<usize>, probs: &[f64]) -> Result<Self> {
        let d = probs.len();
        let mat = DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(probs[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(dims, mat)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Reduced state on `keep`; kept subsystems stay in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::arg("partial trace must keep at least one subsystem"));
        }
        let split = IndexSplit::new(&self.dims, &keep)?;
        let d = split.picked_dim;
        let mat = DMatrix::from_fn(d, d, |p, q| {
            (0..split.rest_dim)
                .map(|t| self.mat[(split.at(t, p), split.at(t, q))])
                .sum()
        });
        let dims = keep.iter().map(|&i| self.dims[i]).collect();
        Ok(DensityMatrix { dims, mat })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            dims,
            mat: self.mat.kronecker(&other.mat),
        }
    }

    fn raw_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut clamped = 0.0f64;
        let eigenvalues = self
            .raw_eigenvalues()
            .into_iter()
            .map(|l| {
                if l < 0.0 {
                    clamped = clamped.max(-l);
                    0.0
                } else {
                    l
                }
            })
            .collect();
        Spectrum {
            eigenvalues,
            clamped,
        }
    }

    /// Convex mixture `Σ w_i ρ_i`; weights are not renormalised.
    pub(crate) fn mix(items: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
        let first = items.first().ok_or_else(|| Error::arg("empty mixture"))?;
        let mut mat = DMatrix::<Complex64>::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in items {
            if rho.dims != first.1.dims {
                return Err(Error::arg("mixture members have different dims"));
            }
            mat += &rho.mat * Complex64::new(*w, 0.0);
        }
        Ok(DensityMatrix {
            dims: first.1.dims.clone(),
            mat,
        })
    }
}

/// `⟨ξ|ρ|ξ⟩`.
pub fn fidelity_sq(xi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if xi.dims() != rho.dims() {
        return Err(Error::arg(format!(
            "dims {:?} vs {:?}",
            xi.dims(),
            rho.dims()
        )));
    }
    let a = xi.amps();
    let m = rho.matrix();
    let mut f = Complex64::new(0.0, 0.0);
    for r in 0..a.len() {
        for c in 0..a.len() {
            f += a[r].conj() * m[(r, c)] * a[c];
        }
    }
    Ok(f.re)
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn shannon_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_bits(rho.spectrum().eigenvalues).max(0.0)
}

/// A finite ensemble `{p_i, ρ_i}`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    items: Vec<(f64, DensityMatrix)>,
}

impl Ensemble {
    pub fn new(items: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let first = items.first().ok_or_else(|| Error::arg("empty ensemble"))?;
        let dims = first.1.dims().to_vec();
        let mut total = 0.0;
        for (p, rho) in &items {
            if p.is_nan() || *p < 0.0 {
                return Err(Error::invariant(format!("probability {p} is negative")));
            }
            if rho.dims() != dims.as_slice() {
                return Err(Error::invariant("ensemble members have different dims"));
            }
            total += p;
        }
        if (total - 1.0).abs() > DENSITY_TOL {
            return Err(Error::invariant(format!("probabilities sum to {total}")));
        }
        Ok(Ensemble { items })
    }

    pub fn items(&self) -> &[(f64, DensityMatrix)] {
        &self.items
    }

    pub fn average(&self) -> DensityMatrix {
        DensityMatrix::mix(&self.items).expect("validated ensemble")
    }
}

/// Holevo quantity `S(Σ p_i ρ_i) − Σ p_i S(ρ_i)` in bits.
pub fn holevo_quantity(e: &Ensemble) -> f64 {
    let avg = von_neumann_entropy(&e.average());
    let cond: f64 = e
        .items
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, rho)| p * von_neumann_entropy(rho))
        .sum();
    avg - cond
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_state, BellLabel};

    fn ket(v: &[f64]) -> PureState {
        PureState::normalized(
            vec![v.len()],
            v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn traced_bell_pair_is_maximally_mixed() {
        let rho = bell_state(BellLabel::PhiPlus).density();
        let a = rho.partial_trace(&[0]).unwrap();
        let want = DensityMatrix::maximally_mixed(vec![2]);
        assert!((a.matrix() - want.matrix()).norm() < 1e-15);
        let same = rho.partial_trace(&[0, 1]).unwrap();
        assert_eq!(same, rho);
        assert!(rho.partial_trace(&[]).is_err());
    }

    #[test]
    fn trace_out_product_factor() {
        let sigma = bell_state(BellLabel::PsiPlus).density();
        let tau = DensityMatrix::diagonal(vec![3], &[0.2, 0.3, 0.5]).unwrap();
        let prod = sigma.tensor(&tau);
        let back = prod.partial_trace(&[0, 1]).unwrap();
        assert!((back.matrix() - sigma.matrix()).norm() < 1e-12);
        let back_tau = prod.partial_trace(&[2]).unwrap();
        assert!((back_tau.matrix() - tau.matrix()).norm() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let phi = bell_state(BellLabel::PhiPlus);
        assert!((fidelity_sq(&phi, &phi.density()).unwrap() - 1.0).abs() < 1e-15);
        assert!(
            (fidelity_sq(&phi, &DensityMatrix::maximally_mixed(vec![2, 2])).unwrap() - 0.25).abs()
                < 1e-15
        );
        let psi = bell_state(BellLabel::PsiMinus);
        assert!(fidelity_sq(&phi, &psi.density()).unwrap().abs() < 1e-15);
        assert!(fidelity_sq(&ket(&[1.0, 0.0]), &phi.density()).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(
            (von_neumann_entropy(&DensityMatrix::maximally_mixed(vec![2, 2])) - 2.0).abs() < 1e-12
        );
        assert!(von_neumann_entropy(&bell_state(BellLabel::PsiPlus).density()) < 1e-12);
        let g = 0.75;
        let rho_max =
            DensityMatrix::diagonal(vec![2, 2], &[1.0 - g, g / 3.0, g / 3.0, g / 3.0]).unwrap();
        assert!((von_neumann_entropy(&rho_max) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn holevo_examples() {
        let z0 = ket(&[1.0, 0.0]).density();
        let z1 = ket(&[0.0, 1.0]).density();
        let plus = ket(&[1.0, 1.0]).density();
        let e = Ensemble::new(vec![(0.5, z0.clone()), (0.5, z1)]).unwrap();
        assert!((holevo_quantity(&e) - 1.0).abs() < 1e-12);
        let same = Ensemble::new(vec![(0.3, plus.clone()), (0.7, plus.clone())]).unwrap();
        assert!(holevo_quantity(&same).abs() < 1e-12);
        // Average state [[3/4,1/4],[1/4,1/4]] has eigenvalues (1 ± 1/√2)/2.
        let l: f64 = (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0;
        let oracle = -l * l.log2() - (1.0 - l) * (1.0 - l).log2();
        let mixed = Ensemble::new(vec![(0.5, z0), (0.5, plus)]).unwrap();
        assert!((holevo_quantity(&mixed) - oracle).abs() < 1e-12);
        assert!((oracle - 0.6009).abs() < 1e-4);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let not_herm = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(vec![2], not_herm).is_err());
        let bad_trace = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.6)]);
        assert!(DensityMatrix::new(vec![2], bad_trace).is_err());
        let negative = DMatrix::from_row_slice(2, 2, &[c(1.2), c(0.0), c(0.0), c(-0.2)]);
        assert!(DensityMatrix::new(vec![2], negative).is_err());
        assert!(Ensemble::new(vec![(0.4, DensityMatrix::maximally_mixed(vec![2]))]).is_err());
        assert!(Ensemble::new(vec![
            (-0.1, DensityMatrix::maximally_mixed(vec![2])),
            (1.1, DensityMatrix::maximally_mixed(vec![2]))
        ])
        .is_err());
    }
}
