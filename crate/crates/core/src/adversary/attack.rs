use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{BellLabel, PureState};

/// Ancilla dimension of the canonical Schmidt form.
pub const ANCILLA_DIM: usize = 4;

const SCHMIDT_NORM_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Per-pair attack in Schmidt form:
/// `|φ⟩_ABE = Σ_k a_k |ψ_k⟩_AB |k⟩_E`, where row `k` of `b` holds the
/// coefficients of `|ψ_k⟩` over `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaAttack {
    a: [f64; 4],
    b: [[Complex64; 4]; 4],
}

/// The four vectors `v_l = (a_1 b_1l, …, a_4 b_4l)`. Component `k` of `v_l` is
/// the amplitude of `|l⟩_AB |k⟩_E` in the attack state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingVectors(pub [[Complex64; 4]; 4]);

impl CouplingVectors {
    pub fn v(&self, l: usize) -> &[Complex64; 4] {
        &self.0[l]
    }

    /// `Σ_l ‖v_l‖²`, which is the squared norm of the attack state.
    pub fn total_norm_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Bilinear (unconjugated) product `v_lᵀ v_m`.
    pub fn bilinear(&self, l: usize, m: usize) -> Complex64 {
        self.0[l].iter().zip(&self.0[m]).map(|(x, y)| x * y).sum()
    }
}

impl AncillaAttack {
    pub fn new(a: [f64; 4], b: [[Complex64; 4]; 4]) -> Result<Self> {
        if let Some(k) = a.iter().position(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::invariant(format!(
                "Schmidt coefficient a_{} = {} is negative",
                k + 1,
                a[k]
            )));
        }
        let n2: f64 = a.iter().map(|x| x * x).sum();
        if (n2 - 1.0).abs() > SCHMIDT_NORM_TOL {
            return Err(Error::invariant(format!(
                "sum of a_k^2 is {n2}, expected 1"
            )));
        }
        for p in 0..4 {
            for q in p..4 {
                let ip: Complex64 = (0..4).map(|r| b[p][r].conj() * b[q][r]).sum();
                let want = if p == q { 1.0 } else { 0.0 };
                if (ip - c(want)).norm() > ORTHO_TOL {
                    return Err(Error::invariant(format!(
                        "rows of b are not orthonormal: <psi_{}|psi_{}> = {ip}",
                        p + 1,
                        q + 1
                    )));
                }
            }
        }
        Ok(AncillaAttack { a, b })
    }

    /// No attack: `|Φ+⟩_AB |0⟩_E`, with the Bell basis completing `b`.
    pub fn trivial() -> Self {
        AncillaAttack {
            a: [1.0, 0.0, 0.0, 0.0],
            b: BellLabel::ALL.map(|l| l.amplitudes()),
        }
    }

    pub fn a(&self) -> &[f64; 4] {
        &self.a
    }

    pub fn b(&self) -> &[[Complex64; 4]; 4] {
        &self.b
    }

    pub fn coupling_vectors(&self) -> CouplingVectors {
        let mut v = [[c(0.0); 4]; 4];
        for (l, vl) in v.iter_mut().enumerate() {
            for (k, slot) in vl.iter_mut().enumerate() {
                *slot = self.b[k][l] * self.a[k];
            }
        }
        CouplingVectors(v)
    }

    /// The `(2, 2, 4)`-dimensional state `|φ⟩_ABE`.
    pub fn state(&self) -> PureState {
        let v = self.coupling_vectors();
        let amps = v.0.iter().flatten().copied().collect();
        PureState::normalized(vec![2, 2, ANCILLA_DIM], amps)
            .expect("validated attack is normalised")
    }

    /// Builds an attack from a unitary acting on Bob's particle and an
    /// ancilla of dimension `k ≤ 4` that starts in `|0⟩`. `unitary` is
    /// `2k × 2k` with Bob's qubit as the most significant factor.
    pub fn from_channel_unitary(unitary: &DMatrix<Complex64>) -> Result<Self> {
        Ok(Self::channel_schmidt_form(unitary)?.attack)
    }

    /// As [`Self::from_channel_unitary`], also returning Eve's Schmidt basis.
    pub fn channel_schmidt_form(unitary: &DMatrix<Complex64>) -> Result<SchmidtForm> {
        let n = unitary.nrows();
        if unitary.ncols() != n || !n.is_multiple_of(2) || !(2..=2 * ANCILLA_DIM).contains(&n) {
            return Err(Error::arg(format!(
                "{}x{} operator; expected 2k x 2k with 1 <= k <= {ANCILLA_DIM}",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        let defect = (unitary.adjoint() * unitary - DMatrix::<Complex64>::identity(n, n)).norm();
        if defect > UNITARY_TOL {
            return Err(Error::arg(format!(
                "operator is not unitary (|U†U - I|_F = {defect:e})"
            )));
        }
        let k = n / 2;
        let start = PureState::bell(BellLabel::PhiPlus).tensor(&PureState::basis(vec![k], 0)?);
        schmidt_form(&start.apply(unitary, &[1, 2])?)
    }

    /// Canonicalises any `(2, 2, k)` state into Schmidt form.
    pub fn from_state(state: &PureState) -> Result<Self> {
        Ok(schmidt_form(state)?.attack)
    }
}

/// Schmidt decomposition of an `AB : E` state, with Eve's (pre-canonical)
/// basis vectors kept so the original state can be rebuilt.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub attack: AncillaAttack,
    /// `eve_basis[i]` is the ancilla vector paired with `|ψ_i⟩`; zero-weight
    /// terms may carry any vector.
    pub eve_basis: Vec<Vec<Complex64>>,
    pub ancilla_dim: usize,
}

impl SchmidtForm {
    /// Rebuilds `Σ_i a_i |ψ_i⟩ |e_i⟩` in the original ancilla space.
    pub fn reconstruct(&self) -> PureState {
        let k = self.ancilla_dim;
        let mut amps = vec![c(0.0); 4 * k];
        for (i, e) in self.eve_basis.iter().enumerate() {
            let w = self.attack.a[i];
            if w == 0.0 {
                continue;
            }
            for l in 0..4 {
                for (j, ej) in e.iter().enumerate() {
                    amps[l * k + j] += self.attack.b[i][l] * ej * w;
                }
            }
        }
        PureState::normalized(vec![2, 2, k], amps).expect("nonzero Schmidt form")
    }
}

pub fn schmidt_form(state: &PureState) -> Result<SchmidtForm> {
    let dims = state.dims();
    if dims.len() != 3 || dims[0] != 2 || dims[1] != 2 {
        return Err(Error::arg(format!(
            "expected (2, 2, k) state, got dims {dims:?}"
        )));
    }
    let k = dims[2];
    let m = DMatrix::from_fn(4, k, |l, e| state.amps()[l * k + e]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut a = [0.0; 4];
    let mut rows: Vec<[Complex64; 4]> = Vec::with_capacity(4);
    let mut eve_basis = Vec::with_capacity(4);
    for (slot, &i) in order.iter().take(4).enumerate() {
        a[slot] = svd.singular_values[i];
        rows.push([u[(0, i)], u[(1, i)], u[(2, i)], u[(3, i)]]);
        eve_basis.push((0..k).map(|e| v_t[(i, e)]).collect::<Vec<_>>());
    }
    complete_orthonormal(&mut rows);
    while eve_basis.len() < 4 {
        eve_basis.push(vec![c(0.0); k]);
    }
    let n2: f64 = a.iter().map(|x| x * x).sum();
    a.iter_mut().for_each(|x| *x /= n2.sqrt());
    let b = [rows[0], rows[1], rows[2], rows[3]];
    Ok(SchmidtForm {
        attack: AncillaAttack::new(a, b)?,
        eve_basis,
        ancilla_dim: k,
    })
}

/// Extends orthonormal rows to a full basis of C^4 by Gram–Schmidt on the
/// computational basis.
fn complete_orthonormal(rows: &mut Vec<[Complex64; 4]>) {
    for e in 0..4 {
        if rows.len() == 4 {
            break;
        }
        let mut cand = [c(0.0); 4];
        cand[e] = c(1.0);
        for r in rows.iter() {
            let ip: Complex64 = (0..4).map(|j| r[j].conj() * cand[j]).sum();
            for j in 0..4 {
                cand[j] -= r[j] * ip;
            }
        }
        let n: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            cand.iter_mut().for_each(|z| *z /= n);
            rows.push(cand);
        }
    }
}

fn gate(n: usize, entries: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_row_iterator(n, n, entries.iter().map(|&x| c(x)))
}

fn swap_gate() -> DMatrix<Complex64> {
    gate(
        4,
        &[
            1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.,
        ],
    )
}

/// Prepares `|Φ+⟩` on the two ancilla qubits from `|00⟩`, on `(B, E1, E2)`.
fn prepare_ancilla_pair() -> DMatrix<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let had = gate(2, &[h, h, h, -h]);
    let cnot = gate(
        4,
        &[
            1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.,
        ],
    );
    id2.kronecker(&cnot) * id2.kronecker(&had).kronecker(&id2)
}

/// Channel unitary on `(B, E1, E2)` that swaps Bob's particle with half of a
/// fresh `|Φ+⟩` pair held by Eve by a fraction `t ∈ [0, 1]`:
/// `cos(πt/2) I + i sin(πt/2) SWAP` on `(B, E1)`.
pub fn partial_swap_unitary(t: f64) -> DMatrix<Complex64> {
    let theta = std::f64::consts::FRAC_PI_2 * t;
    let ps = DMatrix::<Complex64>::identity(4, 4) * c(theta.cos())
        + swap_gate() * Complex64::new(0.0, theta.sin());
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    ps.kronecker(&id2) * prepare_ancilla_pair()
}

/// Intercept-and-resend written as a coherent channel: Eve keeps the
/// intercepted particle and sends half of her own `|Φ+⟩` pair.
pub fn intercept_resend_unitary() -> DMatrix<Complex64> {
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    swap_gate().kronecker(&id2) * prepare_ancilla_pair()
}

pub fn intercept_resend_attack() -> AncillaAttack {
    AncillaAttack::from_channel_unitary(&intercept_resend_unitary()).expect("fixed unitary")
}

pub fn partial_swap_attack(t: f64) -> Result<AncillaAttack> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::arg(format!("swap fraction {t} outside [0, 1]")));
    }
    AncillaAttack::from_channel_unitary(&partial_swap_unitary(t))
}

fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn random_ancilla_vector(rng: &mut impl Rng) -> Vec<Complex64> {
    (0..ANCILLA_DIM).map(|_| random_complex(rng)).collect()
}

/// Attack whose AB part is the fixed Bell state `label` (a product with a
/// random ancilla vector). `Ψ±` realises `v1 = v4 = 0, v2 = ±v3`; `Φ±`
/// realises `v2 = v3 = 0, v1 = ±v4`.
pub fn product_attack(label: BellLabel, rng: &mut impl Rng) -> AncillaAttack {
    let e = PureState::normalized(vec![ANCILLA_DIM], random_ancilla_vector(rng)).expect("nonzero");
    let phase = Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
    let ab = PureState::normalized(
        vec![2, 2],
        label.amplitudes().iter().map(|z| z * phase).collect(),
    )
    .expect("Bell");
    AncillaAttack::from_state(&ab.tensor(&e)).expect("valid product state")
}

/// Generic random attack: Haar-distributed `b` rows and `a²` drawn from a
/// flat Dirichlet distribution over the simplex.
pub fn random_attack(rng: &mut impl Rng) -> AncillaAttack {
    let w: [f64; 4] = std::array::from_fn(|_| Exp1.sample(rng));
    let total: f64 = w.iter().sum();
    let a = w.map(|x| (x / total).sqrt());
    let b = haar_unitary_rows(rng);
    let n2: f64 = a.iter().map(|x| x * x).sum();
    AncillaAttack::new(a.map(|x| x / n2.sqrt()), b).expect("Haar rows are orthonormal")
}

/// Small random perturbation of the trivial attack:
/// `|Φ+⟩|0⟩ + strength · g` for a complex Gaussian `g`, renormalised.
pub fn random_weak_attack(rng: &mut impl Rng, strength: f64) -> AncillaAttack {
    let base = AncillaAttack::trivial().state();
    let amps = base
        .amps()
        .iter()
        .map(|z| z + random_complex(rng) * strength)
        .collect();
    let s = PureState::normalized(vec![2, 2, ANCILLA_DIM], amps).expect("nonzero");
    AncillaAttack::from_state(&s).expect("valid state")
}

fn haar_unitary_rows(rng: &mut impl Rng) -> [[Complex64; 4]; 4] {
    let z = DMatrix::from_fn(4, 4, |_, _| random_complex(rng));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut rows = [[c(0.0); 4]; 4];
    for j in 0..4 {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for i in 0..4 {
            // Columns of Q·diag(phase) are Haar; use them as rows.
            rows[j][i] = q[(i, j)] * phase;
        }
    }
    // Re-orthonormalise away QR rounding.
    let mut clean: Vec<[Complex64; 4]> = Vec::with_capacity(4);
    for mut row in rows {
        for prev in &clean {
            let ip: Complex64 = (0..4).map(|j| prev[j].conj() * row[j]).sum();
            for j in 0..4 {
                row[j] -= prev[j] * ip;
            }
        }
        let n: f64 = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        row.iter_mut().for_each(|z| *z /= n);
        clean.push(row);
    }
    [clean[0], clean[1], clean[2], clean[3]]
}

/// On-disk attack description: `a` as four reals, `b` as a 4×4 array of
/// `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackFile {
    pub a: Vec<f64>,
    pub b: Vec<Vec<[f64; 2]>>,
}

impl AttackFile {
    pub fn from_attack(att: &AncillaAttack) -> Self {
        AttackFile {
            a: att.a.to_vec(),
            b: att
                .b
                .iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn to_attack(&self) -> Result<AncillaAttack> {
        if self.a.len() != 4 {
            return Err(Error::invariant(format!(
                "a must have 4 entries, found {}",
                self.a.len()
            )));
        }
        if self.b.len() != 4 || self.b.iter().any(|r| r.len() != 4) {
            return Err(Error::invariant("b must be a 4x4 matrix"));
        }
        let a = [self.a[0], self.a[1], self.a[2], self.a[3]];
        let mut b = [[c(0.0); 4]; 4];
        for (p, row) in self.b.iter().enumerate() {
            for (q, z) in row.iter().enumerate() {
                b[p][q] = Complex64::new(z[0], z[1]);
            }
        }
        AncillaAttack::new(a, b)
    }
}

pub fn parse_attack(text: &str) -> Result<AncillaAttack> {
    let file: AttackFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("attack file: {e}")))?;
    file.to_attack()
}

pub fn load_attack(path: &std::path::Path) -> Result<AncillaAttack> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_attack(&text)
}

pub fn attack_to_json(att: &AncillaAttack) -> String {
    serde_json::to_string_pretty(&AttackFile::from_attack(att)).expect("plain data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_attack_state_is_phi_plus_times_ancilla_zero() {
        let s = AncillaAttack::trivial().state();
        let want =
            PureState::bell(BellLabel::PhiPlus).tensor(&PureState::basis(vec![4], 0).unwrap());
        assert!((s.overlap_sq(&want).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_coupling_vectors() {
        let v = AncillaAttack::trivial().coupling_vectors();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(v.0[0], [c(h), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(v.0[1], [c(0.0); 4]);
        assert_eq!(v.0[2], [c(0.0); 4]);
        assert_eq!(v.0[3], [c(h), c(0.0), c(0.0), c(0.0)]);
        assert!((v.total_norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invariants_are_enforced() {
        let b = AncillaAttack::trivial().b;
        assert!(AncillaAttack::new([0.5, 0.5, 0.5, 0.6], b).is_err());
        assert!(AncillaAttack::new([-0.5, 0.5, 0.5, 0.5], b).is_err());
        let mut bad = b;
        bad[1] = bad[0];
        let err = AncillaAttack::new([0.5; 4], bad).unwrap_err();
        assert!(err.to_string().contains("orthonormal"), "{err}");
    }

    #[test]
    fn identity_channel_is_trivial_coupling() {
        for k in 1..=4 {
            let att =
                AncillaAttack::from_channel_unitary(&DMatrix::identity(2 * k, 2 * k)).unwrap();
            assert!((att.a[0] - 1.0).abs() < 1e-12);
            let ab = att.state().reduced(&[0, 1]).unwrap();
            let f = crate::quantum::fidelity_sq(&PureState::bell(BellLabel::PhiPlus), &ab).unwrap();
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn intercept_resend_has_flat_schmidt_spectrum() {
        let att = intercept_resend_attack();
        for &x in att.a() {
            assert!((x - 0.5).abs() < 1e-12);
        }
        let ab = att.state().reduced(&[0, 1]).unwrap();
        let mixed = crate::quantum::DensityMatrix::maximally_mixed(vec![2, 2]);
        assert!((ab.matrix() - mixed.matrix()).norm() < 1e-12);
    }

    #[test]
    fn channel_rejects_non_unitary_and_bad_shapes() {
        assert!(AncillaAttack::from_channel_unitary(&DMatrix::from_element(4, 4, c(0.5))).is_err());
        assert!(AncillaAttack::from_channel_unitary(&DMatrix::identity(3, 3)).is_err());
        assert!(AncillaAttack::from_channel_unitary(&DMatrix::identity(10, 10)).is_err());
    }

    #[test]
    fn schmidt_form_reconstructs_channel_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in [0.0, 0.3, 0.7, 1.0] {
            let u = partial_swap_unitary(t);
            let form = AncillaAttack::channel_schmidt_form(&u).unwrap();
            let direct = PureState::bell(BellLabel::PhiPlus)
                .tensor(&PureState::basis(vec![4], 0).unwrap())
                .apply(&u, &[1, 2])
                .unwrap();
            assert!(
                (direct.overlap_sq(&form.reconstruct()).unwrap() - 1.0).abs() < 1e-10,
                "t = {t}"
            );
        }
        let att = random_attack(&mut rng);
        let again = AncillaAttack::from_state(&att.state()).unwrap();
        let (r1, r2) = (
            att.state().reduced(&[0, 1]).unwrap(),
            again.state().reduced(&[0, 1]).unwrap(),
        );
        assert!((r1.matrix() - r2.matrix()).norm() < 1e-10);
    }

    #[test]
    fn product_attacks_hit_the_constraint_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for label in BellLabel::ALL {
            let v = product_attack(label, &mut rng).coupling_vectors();
            let n = |l: usize| v.0[l].iter().map(|z| z.norm_sqr()).sum::<f64>();
            let diff = |l: usize, m: usize, s: f64| -> f64 {
                v.0[l]
                    .iter()
                    .zip(&v.0[m])
                    .map(|(x, y)| (x - y * s).norm_sqr())
                    .sum()
            };
            match label {
                BellLabel::PsiPlus => {
                    assert!(n(0) < 1e-24 && n(3) < 1e-24 && diff(1, 2, 1.0) < 1e-24)
                }
                BellLabel::PsiMinus => {
                    assert!(n(0) < 1e-24 && n(3) < 1e-24 && diff(1, 2, -1.0) < 1e-24)
                }
                BellLabel::PhiPlus => {
                    assert!(n(1) < 1e-24 && n(2) < 1e-24 && diff(0, 3, 1.0) < 1e-24)
                }
                BellLabel::PhiMinus => {
                    assert!(n(1) < 1e-24 && n(2) < 1e-24 && diff(0, 3, -1.0) < 1e-24)
                }
            }
        }
    }

    #[test]
    fn attack_file_roundtrip_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let att = random_attack(&mut rng);
        let back = parse_attack(&attack_to_json(&att)).unwrap();
        assert_eq!(back, att);
        let err = parse_attack(r#"{"a":[1,0,0],"b":[]}"#).unwrap_err();
        assert!(err.to_string().contains("a must have 4"));
        let err = parse_attack(r#"{"a":[1,1,0,0],"b":[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[1,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]]}"#).unwrap_err();
        assert!(err.to_string().contains("a_k^2"), "{err}");
        assert!(matches!(parse_attack("not json"), Err(Error::Parse(_))));
    }
}
