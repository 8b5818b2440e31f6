//! Information–disturbance bound and sweeps of attack families against it.

use serde::Serialize;

use crate::adversary::{
    ab_e_entropy, disturbance_d, eve_holevo, partial_swap_attack, AncillaAttack,
};
use crate::error::{Error, Result};

/// Upper bound on Eve's information (bits) at detection probability `d`:
/// `−(1−d) log2(1−d) − d log2(d/3)`, with `0 log 0 = 0`.
pub fn information_bound(d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::arg(format!(
            "detection probability {d} outside [0, 1]"
        )));
    }
    let xlog = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * y.log2() };
    // `+ 0.0` folds a negative zero at d = 0
    Ok(-xlog(1.0 - d, 1.0 - d) - xlog(d, d / 3.0) + 0.0)
}

/// True when the pair and Eve's ancilla are unentangled: the entropy of the
/// AB-reduced attack state is below `tol` bits.
pub fn is_product_attack(att: &AncillaAttack, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::arg(format!("tolerance must be positive, got {tol}")));
    }
    Ok(ab_e_entropy(att) < tol)
}

/// One evaluated attack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPoint {
    pub attack_id: String,
    pub t: f64,
    pub d: f64,
    pub chi_eve: f64,
    pub bound: f64,
    pub margin: f64,
}

impl BoundPoint {
    pub fn evaluate(attack_id: impl Into<String>, t: f64, att: &AncillaAttack) -> Self {
        let d = disturbance_d(att);
        let chi_eve = eve_holevo(att);
        let bound = information_bound(d).expect("d is clamped to [0, 1]");
        BoundPoint {
            attack_id: attack_id.into(),
            t,
            d,
            chi_eve,
            bound,
            margin: bound - chi_eve,
        }
    }
}

/// A one-parameter attack family on `t ∈ [0, 1]` with `t = 0` the trivial
/// coupling.
pub trait AttackFamily {
    fn name(&self) -> &str;
    fn attack(&self, t: f64) -> Result<AncillaAttack>;
}

/// Partial swap of Bob's particle with half of a fresh `|Φ+⟩` held by Eve:
/// identity at `t = 0`, full intercept-and-resend at `t = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PartialSwapFamily;

impl AttackFamily for PartialSwapFamily {
    fn name(&self) -> &str {
        "partial-swap"
    }

    fn attack(&self, t: f64) -> Result<AncillaAttack> {
        partial_swap_attack(t)
    }
}

/// Margin below which a point is reported as violating the bound.
pub const MARGIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ScanError {
    pub t: f64,
    pub message: String,
}

/// Result of a sweep: points sorted by `t`, failed points, and bound
/// violations.
#[derive(Debug, Clone, Default)]
pub struct BoundScan {
    pub points: Vec<BoundPoint>,
    pub errors: Vec<ScanError>,
    pub findings: Vec<String>,
}

impl BoundScan {
    pub fn min_margin(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `attack_id,t,d,chi_eve,bound,margin`; reals in
    /// scientific notation with 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attack_id,t,d,chi_eve,bound,margin\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e}\n",
                p.attack_id, p.t, p.d, p.chi_eve, p.bound, p.margin
            ));
        }
        out
    }
}

/// Evaluates `family` at `steps` evenly spaced values of `t` in `[0, 1]`.
pub fn bound_scan(family: &dyn AttackFamily, steps: usize) -> Result<BoundScan> {
    if steps < 2 {
        return Err(Error::arg(format!("steps must be at least 2, got {steps}")));
    }
    let mut scan = BoundScan::default();
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        match family.attack(t) {
            Ok(att) => {
                let point = BoundPoint::evaluate(format!("{}-{i:03}", family.name()), t, &att);
                if point.margin < -MARGIN_TOL {
                    scan.findings.push(format!(
                        "bound violated at {} (t = {t}): chi_eve = {} > bound = {} (d = {})",
                        point.attack_id, point.chi_eve, point.bound, point.d
                    ));
                }
                scan.points.push(point);
            }
            Err(e) => scan.errors.push(ScanError {
                t,
                message: e.to_string(),
            }),
        }
    }
    Ok(scan)
}
