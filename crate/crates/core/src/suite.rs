//! The full verification suite behind `fwlab report-all`.
//!
//! Each criterion returns a pass flag plus the numbers it was decided on.
//! Nothing here depends on wall-clock time, so two runs with the same seed
//! serialize identically.

use serde::Serialize;
use serde_json::{json, Value};

use crate::conditions::{
    check_agreement, check_bell_locality, check_jarrett, check_outcome_independence, check_parameter_independence,
    check_spin, check_twin,
};
use crate::exactgeom::{BasisKind, Catalogue, Family, Q2, Ray};
use crate::models::random::{deterministic_corpus, stochastic_corpus};
use crate::models::{builtin_model, qm_joint, ChoiceA, ChoiceB, OutcomeA, QM_DATA, TOY_MINIMAL};
use crate::montecarlo::{compare, estimate, estimate_converted, GENERATOR};
use crate::theorems::{
    convert_given_in_advance, export_cnf, ks_feasible, min_violation_witness, reduce_to_coloring, uncovered_pairs,
    verify_unsat_certificate, SearchStatus,
};
use crate::Verdict;

/// Number of random stochastic models in the Jarrett corpus.
pub const CORPUS_STOCHASTIC: usize = 1000;
/// Number of random deterministic models checked for OI.
pub const CORPUS_DETERMINISTIC: usize = 200;
pub const CONVERSION_DRAWS: u64 = 1000;
pub const MIN_FRACTION: f64 = 0.99;
pub const MC_TRIALS: u64 = 100_000;
pub const MC_TOLERANCE: f64 = 0.01;

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub details: Value,
}

impl Criterion {
    fn new(id: u8, name: &str, pass: bool, details: Value) -> Criterion {
        Criterion { id, name: name.to_string(), pass, details }
    }

    pub fn line(&self) -> String {
        format!("{} criterion {} {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.name)
    }
}

fn verdict_value(v: &Verdict) -> Value {
    serde_json::to_value(v).expect("serializable verdict")
}

pub fn geometry() -> Criterion {
    let cat = Catalogue::peres();
    let family_sizes: Vec<usize> = Family::ALL.iter().map(|f| f.rays().len()).collect();
    let distinct = (0..cat.rays.len()).all(|i| (i + 1..cat.rays.len()).all(|j| cat.rays[i] != cat.rays[j]));
    let internal = cat.bases.iter().filter(|b| b.kind == BasisKind::Internal).count();
    let completed = cat.bases.iter().filter(|b| b.kind == BasisKind::Completed).count();
    let orthogonal = cat.bases.iter().all(|b| b.is_orthogonal());
    let one = Q2::one();
    let mut overlap_pairs = 0;
    let mut overlap_failures = 0;
    for bi in 0..cat.bases.len() {
        for ri in 0..cat.rays.len() {
            overlap_pairs += 1;
            let s: Q2 = cat.overlaps(bi, ri).iter().sum();
            if s != one {
                overlap_failures += 1;
            }
        }
    }
    let pass = family_sizes == [3, 6, 12, 12]
        && cat.rays.len() == 33
        && distinct
        && cat.bases.len() == 40
        && internal == 16
        && completed == 24
        && orthogonal
        && overlap_pairs == 1320
        && overlap_failures == 0;
    Criterion::new(
        1,
        "geometry",
        pass,
        json!({
            "rays": cat.rays.len(),
            "family_sizes": family_sizes,
            "distinct": distinct,
            "bases": cat.bases.len(),
            "internal": internal,
            "completed": completed,
            "orthogonal": orthogonal,
            "overlap_pairs": overlap_pairs,
            "overlap_failures": overlap_failures,
        }),
    )
}

pub fn table() -> Criterion {
    let third = Q2::from_ratios(1, 3, 0, 1);
    let two_thirds = Q2::from_ratios(2, 3, 0, 1);
    let mut pairs = 0;
    let mut failures = Vec::new();
    for a in 0..40 {
        for b in 0..33 {
            pairs += 1;
            let d = qm_joint(ChoiceA(a), ChoiceB(b)).expect("catalogue choices");
            let ma = d.marginal_a();
            let mb = d.marginal_b();
            let ok = d.total() == Q2::one()
                && d.defect().is_none()
                && OutcomeA::all().all(|oa| ma[oa.bits() as usize] == if oa.is_spin() { third.clone() } else { Q2::zero() })
                && mb == [third.clone(), two_thirds.clone()];
            if !ok {
                failures.push(json!([a, b]));
            }
        }
    }
    let pass = pairs == 1320 && failures.is_empty();
    Criterion::new(2, "table", pass, json!({"pairs": pairs, "failures": failures}))
}

pub fn counterexample() -> Criterion {
    let qm = builtin_model(QM_DATA).expect("builtin");
    let toy = builtin_model(TOY_MINIMAL).expect("builtin");
    let mut pass = true;
    let mut per_model = serde_json::Map::new();
    for m in [&qm, &toy] {
        let spin = check_spin(m);
        let twin = check_twin(m);
        let pi = check_parameter_independence(m);
        pass &= spin.pass && twin.pass && twin.checked == 96 && pi.pass;
        per_model.insert(
            m.name.clone(),
            json!({"spin": verdict_value(&spin), "twin": verdict_value(&twin), "pi": verdict_value(&pi)}),
        );
    }
    let toy_agreement = check_agreement(&toy);
    let qm_agreement = check_agreement(&qm);
    pass &= !toy_agreement.pass
        && toy_agreement.witness.as_ref().is_some_and(|w| w.cell.is_some())
        && qm_agreement.pass;
    Criterion::new(
        3,
        "counterexample",
        pass,
        json!({
            "models": per_model,
            "agreement": {QM_DATA: verdict_value(&qm_agreement), TOY_MINIMAL: verdict_value(&toy_agreement)},
        }),
    )
}

pub fn jarrett(seed: u64) -> Criterion {
    let qm = builtin_model(QM_DATA).expect("builtin");
    let toy = builtin_model(TOY_MINIMAL).expect("builtin");
    let corpus = stochastic_corpus(seed, CORPUS_STOCHASTIC);
    let jarrett_failures: Vec<String> = [&qm, &toy]
        .into_iter()
        .chain(corpus.iter())
        .filter(|m| !check_jarrett(m).pass)
        .map(|m| m.name.clone())
        .collect();
    let oi = check_outcome_independence(&qm);
    let locality = check_bell_locality(&qm);
    let witness_ok = oi.witness.as_ref().is_some_and(|w| {
        w.a == Some(0)
            && w.b == Some(0)
            && w.values.get("P(O_B=0|O_A=011)").map(String::as_str) == Some("1")
            && w.values.get("P(O_B=0)").map(String::as_str) == Some("1/3")
    });
    let det = deterministic_corpus(seed, CORPUS_DETERMINISTIC);
    let det_oi_failures: Vec<String> =
        det.iter().filter(|d| !check_outcome_independence(&d.to_stochastic()).pass).map(|d| d.name.clone()).collect();
    let pass = jarrett_failures.is_empty() && !oi.pass && witness_ok && !locality.pass && det_oi_failures.is_empty();
    Criterion::new(
        4,
        "jarrett",
        pass,
        json!({
            "models_checked": 2 + corpus.len(),
            "jarrett_failures": jarrett_failures,
            "qm_oi": verdict_value(&oi),
            "qm_locality": verdict_value(&locality),
            "deterministic_checked": det.len(),
            "deterministic_oi_failures": det_oi_failures,
        }),
    )
}

pub fn impossibility() -> Criterion {
    let problem = reduce_to_coloring();
    let uncovered = uncovered_pairs(Catalogue::peres(), &problem);
    let full = ks_feasible(&problem);
    let verified = full.status == SearchStatus::Unsat && verify_unsat_certificate(&problem, &full.certificate);
    let ablation = ks_feasible(&problem.pairs_only());
    let all_ones = ablation.coloring.as_ref().is_some_and(|c| c.values.iter().all(|&v| v == 1));
    let cnf = export_cnf(&problem);
    let header = cnf.lines().find(|l| l.starts_with("p ")).unwrap_or("").to_string();
    let pass = uncovered.is_empty()
        && full.status == SearchStatus::Unsat
        && verified
        && ablation.status == SearchStatus::Sat
        && all_ones
        && header.split_whitespace().nth(2) == Some("33");
    Criterion::new(
        5,
        "impossibility",
        pass,
        json!({
            "status": full.status,
            "nodes_explored": full.nodes_explored,
            "certificate_steps": full.certificate.len(),
            "certificate_verified": verified,
            "uncovered_pairs": uncovered.len(),
            "ablation_status": ablation.status,
            "ablation_all_ones": all_ones,
            "cnf_header": header,
        }),
    )
}

pub fn conversion(seed: u64, threads: usize) -> Criterion {
    let qm = builtin_model(QM_DATA).expect("builtin");
    let cm = convert_given_in_advance(&qm, seed);
    let (report, _) = min_violation_witness(&cm, CONVERSION_DRAWS, threads);
    let pass = report.spin_violations == 0
        && report.twin_violations == 0
        && report.twin_checked == 96 * CONVERSION_DRAWS
        && report.min_violation_fraction >= MIN_FRACTION;
    let details = serde_json::to_value(&report).expect("serializable report");
    Criterion::new(6, "conversion", pass, json!({"generator": GENERATOR, "report": details}))
}

/// Catalogue index of the ray `(0, 1, 1)`.
pub fn ray_011() -> usize {
    Catalogue::peres().ray_index(&Ray::from_parts([(0, 0), (1, 0), (1, 0)])).expect("catalogue ray")
}

pub fn monte_carlo(seed: u64, threads: usize) -> Criterion {
    let qm = builtin_model(QM_DATA).expect("builtin");
    let (a, b) = (ChoiceA(0), ChoiceB(ray_011()));
    let exact = qm_joint(a, b).expect("catalogue choices");
    let emp = estimate(&qm, a, b, MC_TRIALS, seed, threads).expect("choices in domain");
    let direct = compare(&emp, &exact, MC_TOLERANCE);
    let cm = convert_given_in_advance(&qm, seed);
    let ia = qm.domain.pos_a(a).expect("full domain");
    let ib = qm.domain.pos_b(b).expect("full domain");
    let emp_conv = estimate_converted(&cm, ia, ib, MC_TRIALS, threads);
    let converted = compare(&emp_conv, &exact, MC_TOLERANCE);
    Criterion::new(
        7,
        "monte-carlo",
        direct.pass && converted.pass,
        json!({
            "generator": GENERATOR,
            "a": a.0,
            "b": b.0,
            "n": MC_TRIALS,
            "tolerance": MC_TOLERANCE,
            "direct": {"empirical": emp, "verdict": verdict_value(&direct)},
            "converted": {"empirical": emp_conv, "verdict": verdict_value(&converted)},
        }),
    )
}

/// Criteria 1 to 7 in order.
pub fn run(seed: u64, threads: usize) -> Vec<Criterion> {
    vec![
        geometry(),
        table(),
        counterexample(),
        jarrett(seed),
        impossibility(),
        conversion(seed, threads),
        monte_carlo(seed, threads),
    ]
}

/// Runs the suite twice and compares the serialized results byte for byte.
pub fn run_with_determinism(seed: u64, threads: usize) -> Vec<Criterion> {
    let mut first = run(seed, threads);
    let second = run(seed, threads);
    let a = serde_json::to_string(&first).expect("serializable");
    let b = serde_json::to_string(&second).expect("serializable");
    first.push(Criterion::new(8, "determinism", a == b, json!({"bytes": a.len(), "identical": a == b})));
    first
}
