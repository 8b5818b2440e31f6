use std::io::Write;

use rand::Rng;
use serde::Serialize;

use esqkd_core::adversary::{
    ab_e_entropy, disturbance_d, eve_holevo, forbidden_mass, intercept_resend_attack,
    joint_outcome_table, load_attack, AncillaAttack,
};
use esqkd_core::analysis::{bound_scan, information_bound, PartialSwapFamily, MARGIN_TOL};
use esqkd_core::protocol::{
    cabello_efficiency, run_session, AttackChoice, InitialChoice, SessionTranscript, TOOL_NAME,
    TOOL_VERSION,
};
use esqkd_core::swapping::{
    entanglement_swap, expected_partner, swap_histogram, swap_table, Histogram, OutcomeTable,
};
use esqkd_core::{BellLabel, Phase, PureState, Result, SeedTree};

use crate::config::RunConfig;

/// What a command produced: the artifact text, a one-line summary and
/// whether the protocol aborted.
pub struct Outcome {
    pub artifact: String,
    pub summary: String,
    pub aborted: bool,
}

fn json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report is plain data");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct EsDemoReport {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    trials: u64,
    initial: String,
    counts: Histogram,
    frequencies: OutcomeTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<OutcomeTable>,
    /// Fraction of trials where Bob's label is the partner of Alice's.
    agreement: f64,
}

pub fn es_demo(cfg: &RunConfig) -> Result<Outcome> {
    let seed = cfg.session.seed;
    let (counts, agree, exact) = match cfg.es_initial() {
        InitialChoice::All(l) => {
            let h = swap_histogram(l, l, cfg.trials, seed)?;
            let agree: u64 = BellLabel::ALL
                .iter()
                .map(|&x| h[x.index()][expected_partner(l, l, x).index()])
                .sum();
            (h, agree, Some(swap_table(l, l)))
        }
        InitialChoice::Random => {
            let tree = SeedTree::new(seed);
            let (mut prep, mut nature) =
                (tree.stream(Phase::Prepare), tree.stream(Phase::Sampling));
            let mut h = [[0u64; 4]; 4];
            let mut agree = 0;
            for _ in 0..cfg.trials {
                let i = BellLabel::ALL[prep.random_range(0..4)];
                let j = BellLabel::ALL[prep.random_range(0..4)];
                let (out, _) =
                    entanglement_swap(&PureState::bell(i), &PureState::bell(j), &mut nature)?;
                h[out.alice.index()][out.bob.index()] += 1;
                agree += u64::from(expected_partner(i, j, out.alice) == out.bob);
            }
            (h, agree, None)
        }
    };
    let frequencies = counts.map(|row| row.map(|c| c as f64 / cfg.trials as f64));
    let report = EsDemoReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        seed,
        trials: cfg.trials,
        initial: cfg.es_initial().to_string(),
        counts,
        frequencies,
        exact,
        agreement: agree as f64 / cfg.trials as f64,
    };
    let mut summary = format!(
        "{} trials, seed {seed}, agreement {}\n",
        cfg.trials, report.agreement
    );
    summary.push_str("alice\\bob  phi+      phi-      psi+      psi-\n");
    for x in BellLabel::ALL {
        let row: Vec<String> = frequencies[x.index()]
            .iter()
            .map(|f| format!("{f:<9.6}"))
            .collect();
        summary.push_str(&format!("{:<10} {}\n", x.name(), row.join(" ").trim_end()));
    }
    Ok(Outcome {
        artifact: json(&report),
        summary,
        aborted: false,
    })
}

pub fn session(cfg: &RunConfig) -> Result<Outcome> {
    let t = run_session(&cfg.session)?;
    Ok(Outcome {
        summary: session_summary(&t),
        aborted: t.aborted,
        artifact: t.to_json(),
    })
}

fn session_summary(t: &SessionTranscript) -> String {
    let rate = |r: Option<f64>| r.map_or("n/a".to_string(), |r| format!("{r}"));
    match &t.abort {
        Some(a) => format!("session aborted ({:?}): {}\n", a.phase, a.reason),
        None => format!(
            "key bits {}, detection error rate {}, key error rate {}\n",
            t.counts.key_bits,
            rate(t.detection_error_rate),
            rate(t.key_error_rate)
        ),
    }
}

#[derive(Serialize)]
struct AttackReport {
    tool: &'static str,
    version: &'static str,
    attack: String,
    schmidt: [f64; 4],
    table: OutcomeTable,
    forbidden_mass: f64,
    d: f64,
    chi_eve: f64,
    bound: f64,
    margin: f64,
    ab_e_entropy: f64,
}

fn resolve_attack(choice: &AttackChoice) -> Result<AncillaAttack> {
    Ok(match choice {
        AttackChoice::None => AncillaAttack::trivial(),
        AttackChoice::InterceptResend => intercept_resend_attack(),
        AttackChoice::Ancilla(path) => load_attack(std::path::Path::new(path))?,
    })
}

pub fn attack_analyze(cfg: &RunConfig) -> Result<Outcome> {
    let att = resolve_attack(&cfg.session.attack)?;
    let d = disturbance_d(&att);
    let chi_eve = eve_holevo(&att);
    let bound = information_bound(d)?;
    let report = AttackReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        attack: cfg.session.attack.to_string(),
        schmidt: *att.a(),
        table: joint_outcome_table(&att),
        forbidden_mass: forbidden_mass(&att),
        d,
        chi_eve,
        bound,
        margin: bound - chi_eve,
        ab_e_entropy: ab_e_entropy(&att),
    };
    let summary = format!(
        "d {d}, chi_eve {chi_eve}, bound {bound}, forbidden mass {}\n",
        report.forbidden_mass
    );
    Ok(Outcome {
        artifact: json(&report),
        summary,
        aborted: false,
    })
}

pub fn bound_scan_cmd(cfg: &RunConfig, err: &mut dyn Write) -> Result<Outcome> {
    let scan = bound_scan(&PartialSwapFamily, cfg.steps)?;
    for e in &scan.errors {
        let _ = writeln!(err, "warning: t = {}: {}", e.t, e.message);
    }
    for f in &scan.findings {
        let _ = writeln!(err, "finding: {f} (tolerance {MARGIN_TOL})");
    }
    let summary = format!(
        "{} points, minimum margin {}, findings {}\n",
        scan.points.len(),
        scan.min_margin(),
        scan.findings.len()
    );
    Ok(Outcome {
        artifact: scan.to_csv(),
        summary,
        aborted: false,
    })
}

#[derive(Serialize)]
struct EfficiencyReport {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    key_bits: u64,
    qubits: u64,
    cbits: u64,
    /// `session` when the announced bits were used, `override` otherwise.
    cbits_source: &'static str,
    efficiency: Option<f64>,
    transcript: SessionTranscript,
}

pub fn efficiency(cfg: &RunConfig) -> Result<Outcome> {
    let t = run_session(&cfg.session)?;
    if t.aborted {
        return Ok(Outcome {
            summary: session_summary(&t),
            aborted: true,
            artifact: t.to_json(),
        });
    }
    let qubits = t.counts.qubits_transmitted - t.counts.detection_qubits;
    let (cbits, source) = match cfg.cbits {
        Some(c) => (c, "override"),
        None => (t.counts.cbits_transmitted, "session"),
    };
    let eff = cabello_efficiency(t.counts.key_bits, qubits, cbits)?;
    let report = EfficiencyReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        seed: t.seed,
        key_bits: t.counts.key_bits,
        qubits,
        cbits,
        cbits_source: source,
        efficiency: Some(eff),
        transcript: t,
    };
    Ok(Outcome {
        artifact: json(&report),
        summary: format!("{eff}\n"),
        aborted: false,
    })
}
