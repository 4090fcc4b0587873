//! Exact checkers for SPIN, TWIN, parameter independence, deterministic MIN,
//! outcome independence, Bell locality, agreement with the quantum data, and
//! the Jarrett decomposition `locality ⟺ PI ∧ OI`.
//!
//! Every checker scans `(λ, a, b)` in domain order (then cells in
//! [`Cell`] order) and reports the first violation, so witnesses are
//! reproducible. All comparisons are exact equalities in ℚ(√2).
//!
//! Parameter independence and locality need the λ-local marginals
//! `P_a(O_A|λ)` and `P_b(O_B|λ)`. These are read off the table at the first
//! remote choice of the domain: PI holds at `(λ, a, b)` when the marginals
//! there equal those references, and locality holds at `(λ, a, b)` when the
//! joint factorizes into the references. With that reading the Jarrett
//! equivalence holds triple by triple, not just globally.

use crate::exactgeom::{Catalogue, Q2};
use crate::models::builtin::{matching_member, qm_joint_in};
use crate::models::{Cell, ChoiceA, ChoiceB, DeterministicModel, JointDist, OutcomeA, OutcomeB, StochasticModel};
use crate::verdict::{Verdict, Witness};

/// The checkable conditions, by their command-line names.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Condition {
    Spin,
    Twin,
    ParameterIndependence,
    OutcomeIndependence,
    Locality,
    MinDeterministic,
    Jarrett,
    Agreement,
}

impl Condition {
    pub const ALL: [Condition; 8] = [
        Condition::Spin,
        Condition::Twin,
        Condition::ParameterIndependence,
        Condition::OutcomeIndependence,
        Condition::Locality,
        Condition::MinDeterministic,
        Condition::Jarrett,
        Condition::Agreement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Spin => "spin",
            Condition::Twin => "twin",
            Condition::ParameterIndependence => "pi",
            Condition::OutcomeIndependence => "oi",
            Condition::Locality => "locality",
            Condition::MinDeterministic => "mind",
            Condition::Jarrett => "jarrett",
            Condition::Agreement => "agreement",
        }
    }

    pub fn from_name(name: &str) -> Option<Condition> {
        Condition::ALL.into_iter().find(|c| c.name() == name)
    }
}

fn ids(m: &StochasticModel, ia: usize, ib: usize) -> (usize, usize) {
    (m.domain.a[ia].0, m.domain.b[ib].0)
}

/// SPIN at one triple: no mass outside `{011, 101, 110} × {0, 1}`.
pub fn spin_at(m: &StochasticModel, l: usize, ia: usize, ib: usize) -> Option<Witness> {
    let (a, b) = ids(m, ia, ib);
    let d = m.at(l, ia, ib);
    d.support()
        .find(|(c, _)| !c.oa.is_spin())
        .map(|(c, p)| Witness::at(l, a, b, "probability on an outcome outside SPIN").cell(c).value("p", p))
}

pub fn check_spin(m: &StochasticModel) -> Verdict {
    let mut checked = 0;
    for (l, ia, ib) in m.triples() {
        checked += 1;
        if let Some(w) = spin_at(m, l, ia, ib) {
            return Verdict::fail("spin", checked, w);
        }
    }
    Verdict::pass("spin", checked)
}

/// TWIN at one triple. `Ok(None)` means `w` is not a member of the basis, so
/// TWIN says nothing here.
pub fn twin_at(cat: &Catalogue, m: &StochasticModel, l: usize, ia: usize, ib: usize) -> Option<Option<Witness>> {
    let (a, b) = ids(m, ia, ib);
    let pos = matching_member(cat, ChoiceA(a), ChoiceB(b))?;
    let d = m.at(l, ia, ib);
    let mismatched: Vec<(Cell, &Q2)> = d.support().filter(|(c, _)| c.oa.digit(pos) != c.ob.bit()).collect();
    if mismatched.is_empty() {
        return Some(None);
    }
    let mass: Q2 = mismatched.iter().map(|(_, p)| *p).sum();
    let member = ["x", "y", "z"][pos];
    let w = Witness::at(l, a, b, format!("O_B differs from digit {} of O_A although w = {member}", pos + 1))
        .cell(mismatched[0].0)
        .value("mismatch_probability", mass);
    Some(Some(w))
}

pub fn check_twin_in(cat: &Catalogue, m: &StochasticModel) -> Verdict {
    let mut checked = 0;
    for (l, ia, ib) in m.triples() {
        match twin_at(cat, m, l, ia, ib) {
            None => {}
            Some(None) => checked += 1,
            Some(Some(w)) => return Verdict::fail("twin", checked + 1, w),
        }
    }
    Verdict::pass("twin", checked)
}

pub fn check_twin(m: &StochasticModel) -> Verdict {
    check_twin_in(Catalogue::peres(), m)
}

fn first_difference<const N: usize>(lhs: &[Q2; N], rhs: &[Q2; N]) -> Option<usize> {
    (0..N).find(|&i| lhs[i] != rhs[i])
}

/// PI at one triple: the marginal of `O_A` equals the one at the first `b`
/// of the domain, and the marginal of `O_B` equals the one at the first `a`.
pub fn pi_at(m: &StochasticModel, l: usize, ia: usize, ib: usize) -> Option<Witness> {
    let (a, b) = ids(m, ia, ib);
    let d = m.at(l, ia, ib);
    let ma = d.marginal_a();
    let ma_ref = m.at(l, ia, 0).marginal_a();
    if let Some(i) = first_difference(&ma, &ma_ref) {
        let oa = OutcomeA::from_bits(i as u8).expect("3 bits");
        let mut w = Witness::at(l, a, b, "distribution of O_A depends on B's choice")
            .value(&format!("P(O_A={oa}) at b"), &ma[i])
            .value(&format!("P(O_A={oa}) at b'"), &ma_ref[i]);
        w.b_alt = Some(m.domain.b[0].0);
        return Some(w);
    }
    let mb = d.marginal_b();
    let mb_ref = m.at(l, 0, ib).marginal_b();
    if let Some(i) = first_difference(&mb, &mb_ref) {
        let mut w = Witness::at(l, a, b, "distribution of O_B depends on A's choice")
            .value(&format!("P(O_B={i}) at a"), &mb[i])
            .value(&format!("P(O_B={i}) at a'"), &mb_ref[i]);
        w.a_alt = Some(m.domain.a[0].0);
        return Some(w);
    }
    None
}

pub fn check_parameter_independence(m: &StochasticModel) -> Verdict {
    let mut checked = 0;
    for (l, ia, ib) in m.triples() {
        checked += 1;
        if let Some(w) = pi_at(m, l, ia, ib) {
            return Verdict::fail("pi", checked, w);
        }
    }
    Verdict::pass("pi", checked)
}

/// OI at one triple. Conditioning events of probability zero are skipped.
pub fn oi_at(m: &StochasticModel, l: usize, ia: usize, ib: usize) -> Option<Witness> {
    let (a, b) = ids(m, ia, ib);
    let d = m.at(l, ia, ib);
    let ma = d.marginal_a();
    let mb = d.marginal_b();
    for oa in OutcomeA::all() {
        let pa = &ma[oa.bits() as usize];
        if pa.is_zero() {
            continue;
        }
        for ob in OutcomeB::ALL {
            let cond = d.p(oa, ob).checked_div(pa).expect("nonzero");
            let uncond = &mb[ob.bit() as usize];
            if cond != *uncond {
                let w = Witness::at(l, a, b, "distribution of O_B changes when conditioned on O_A")
                    .cell(Cell::new(oa, ob))
                    .value(&format!("P(O_B={ob}|O_A={oa})"), cond)
                    .value(&format!("P(O_B={ob})"), uncond);
                return Some(w);
            }
        }
    }
    for ob in OutcomeB::ALL {
        let pb = &mb[ob.bit() as usize];
        if pb.is_zero() {
            continue;
        }
        for oa in OutcomeA::all() {
            let cond = d.p(oa, ob).checked_div(pb).expect("nonzero");
            let uncond = &ma[oa.bits() as usize];
            if cond != *uncond {
                let w = Witness::at(l, a, b, "distribution of O_A changes when conditioned on O_B")
                    .cell(Cell::new(oa, ob))
                    .value(&format!("P(O_A={oa}|O_B={ob})"), cond)
                    .value(&format!("P(O_A={oa})"), uncond);
                return Some(w);
            }
        }
    }
    None
}

pub fn check_outcome_independence(m: &StochasticModel) -> Verdict {
    let mut checked = 0;
    for (l, ia, ib) in m.triples() {
        checked += 1;
        if let Some(w) = oi_at(m, l, ia, ib) {
            return Verdict::fail("oi", checked, w);
        }
    }
    Verdict::pass("oi", checked)
}

/// Bell locality at one triple: `P_ab(oa, ob|λ) = P_a(oa|λ) · P_b(ob|λ)`.
pub fn locality_at(m: &StochasticModel, l: usize, ia: usize, ib: usize) -> Option<Witness> {
    let (a, b) = ids(m, ia, ib);
    let local_a = m.at(l, ia, 0).marginal_a();
    let local_b = m.at(l, 0, ib).marginal_b();
    let product = JointDist::product(&local_a, &local_b);
    let d = m.at(l, ia, ib);
    Cell::all().find(|&c| d.get(c) != product.get(c)).map(|c| {
        Witness::at(l, a, b, "joint distribution does not factorize into local marginals")
            .cell(c)
            .value("P(O_A,O_B)", d.get(c))
            .value("P(O_A)*P(O_B)", product.get(c))
    })
}

pub fn check_bell_locality(m: &StochasticModel) -> Verdict {
    let mut checked = 0;
    for (l, ia, ib) in m.triples() {
        checked += 1;
        if let Some(w) = locality_at(m, l, ia, ib) {
            return Verdict::fail("locality", checked, w);
        }
    }
    Verdict::pass("locality", checked)
}

/// Whether locality and `PI ∧ OI` disagree at one triple.
pub fn jarrett_at(m: &StochasticModel, l: usize, ia: usize, ib: usize) -> Option<Witness> {
    let local = locality_at(m, l, ia, ib).is_none();
    let pi = pi_at(m, l, ia, ib).is_none();
    let oi = oi_at(m, l, ia, ib).is_none();
    (local != (pi && oi)).then(|| {
        let (a, b) = ids(m, ia, ib);
        Witness::at(l, a, b, "locality disagrees with PI and OI")
            .value("locality", local)
            .value("pi", pi)
            .value("oi", oi)
    })
}

pub fn check_jarrett(m: &StochasticModel) -> Verdict {
    let mut checked = 0;
    for (l, ia, ib) in m.triples() {
        checked += 1;
        if let Some(w) = jarrett_at(m, l, ia, ib) {
            return Verdict::fail("jarrett", checked, w);
        }
    }
    Verdict::pass("jarrett", checked)
}

/// MIN for response functions at one triple: `θ_A(a, b, λ) = θ_A(a, b₀, λ)`
/// and `θ_B(a, b, λ) = θ_B(a₀, b, λ)` for the first domain choices `a₀, b₀`.
pub fn min_det_at(d: &DeterministicModel, l: usize, ia: usize, ib: usize) -> Option<Witness> {
    let (a, b) = (d.domain.a[ia].0, d.domain.b[ib].0);
    let (oa, ob) = d.theta_at(l, ia, ib);
    let (oa_ref, _) = d.theta_at(l, ia, 0);
    if oa != oa_ref {
        let mut w = Witness::at(l, a, b, "theta_A depends on B's choice").value("theta_A at b", oa).value("theta_A at b'", oa_ref);
        w.b_alt = Some(d.domain.b[0].0);
        return Some(w);
    }
    let (_, ob_ref) = d.theta_at(l, 0, ib);
    if ob != ob_ref {
        let mut w = Witness::at(l, a, b, "theta_B depends on A's choice").value("theta_B at a", ob).value("theta_B at a'", ob_ref);
        w.a_alt = Some(d.domain.a[0].0);
        return Some(w);
    }
    None
}

pub fn check_min_deterministic(d: &DeterministicModel) -> Verdict {
    let mut checked = 0;
    for l in 0..d.num_lambdas() {
        for ia in 0..d.domain.a.len() {
            for ib in 0..d.domain.b.len() {
                checked += 1;
                if let Some(w) = min_det_at(d, l, ia, ib) {
                    return Verdict::fail("mind", checked, w);
                }
            }
        }
    }
    Verdict::pass("mind", checked)
}

/// Agreement of the λ-average with the quantum data at one pair.
pub fn agreement_at(cat: &Catalogue, m: &StochasticModel, ia: usize, ib: usize) -> Option<Witness> {
    let (a, b) = ids(m, ia, ib);
    let agg = m.aggregate_at(ia, ib);
    let qm = qm_joint_in(cat, ChoiceA(a), ChoiceB(b)).expect("domain indices are catalogue indices");
    Cell::all().find(|&c| agg.get(c) != qm.get(c)).map(|c| {
        Witness { a: Some(a), b: Some(b), detail: "aggregate differs from the quantum prediction".into(), ..Witness::default() }
            .cell(c)
            .value("model", agg.get(c))
            .value("quantum", qm.get(c))
    })
}

pub fn check_agreement_in(cat: &Catalogue, m: &StochasticModel) -> Verdict {
    let mut checked = 0;
    for ia in 0..m.domain.a.len() {
        for ib in 0..m.domain.b.len() {
            checked += 1;
            if let Some(w) = agreement_at(cat, m, ia, ib) {
                return Verdict::fail("agreement", checked, w);
            }
        }
    }
    Verdict::pass("agreement", checked)
}

pub fn check_agreement(m: &StochasticModel) -> Verdict {
    check_agreement_in(Catalogue::peres(), m)
}

/// Runs a condition on a stochastic model. `mind` requires every conditional
/// to be a point mass and fails with a witness otherwise.
pub fn check(cond: Condition, m: &StochasticModel) -> Verdict {
    match cond {
        Condition::Spin => check_spin(m),
        Condition::Twin => check_twin(m),
        Condition::ParameterIndependence => check_parameter_independence(m),
        Condition::OutcomeIndependence => check_outcome_independence(m),
        Condition::Locality => check_bell_locality(m),
        Condition::Jarrett => check_jarrett(m),
        Condition::Agreement => check_agreement(m),
        Condition::MinDeterministic => match DeterministicModel::from_stochastic(m) {
            Ok(d) => check_min_deterministic(&d),
            Err(e) => Verdict::fail("mind", 0, Witness { detail: e.to_string(), ..Witness::default() }),
        },
    }
}

/// Re-evaluates a failing verdict's witness location from scratch and
/// confirms the same violation is reported there.
pub fn reconfirm(cond: Condition, m: &StochasticModel, witness: &Witness) -> bool {
    let pos = || -> Option<(usize, usize, usize)> {
        let ia = m.domain.pos_a(ChoiceA(witness.a?))?;
        let ib = m.domain.pos_b(ChoiceB(witness.b?))?;
        Some((witness.lambda.unwrap_or(0), ia, ib))
    };
    let Some((l, ia, ib)) = pos() else { return false };
    if l >= m.num_lambdas() {
        return false;
    }
    let again = match cond {
        Condition::Spin => spin_at(m, l, ia, ib),
        Condition::Twin => twin_at(Catalogue::peres(), m, l, ia, ib).flatten(),
        Condition::ParameterIndependence => pi_at(m, l, ia, ib),
        Condition::OutcomeIndependence => oi_at(m, l, ia, ib),
        Condition::Locality => locality_at(m, l, ia, ib),
        Condition::Jarrett => jarrett_at(m, l, ia, ib),
        Condition::Agreement => agreement_at(Catalogue::peres(), m, ia, ib),
        Condition::MinDeterministic => match DeterministicModel::from_stochastic(m) {
            Ok(d) => min_det_at(&d, l, ia, ib),
            Err(_) => None,
        },
    };
    again.as_ref() == Some(witness)
}
