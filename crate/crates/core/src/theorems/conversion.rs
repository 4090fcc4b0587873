//! Turning a stochastic model into a deterministic one by sampling all of its
//! randomness in advance.
//!
//! A converted hidden state `λ′` consists of a base atom `λ ~ P^Λ` and one
//! pre-sampled outcome pair `X_k ~ P_ab(·|λ)` for every field index
//! `k = k(a, b)`. Given `λ′` the response is `θ(a, b, λ′) = X_{k(a,b)}`: no
//! randomness remains, but the response at A now reads `k`, which depends on
//! B's choice. SPIN and TWIN hold draw by draw; MIN does not.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::exactgeom::Catalogue;
use crate::models::builtin::matching_member;
use crate::models::{ChoiceA, ChoiceB, OutcomeA, OutcomeB, StochasticModel};
use crate::montecarlo::{stream_rng, CdfSampler};
use crate::verdict::Witness;

/// Position of a choice pair among the `|A| · |B|` fields, row-major.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct FieldIndex(pub usize);

pub const NUM_BASES: usize = 40;
pub const NUM_RAYS: usize = 33;

/// `k = 33·a + b` over the full catalogue.
pub fn field_index(a: ChoiceA, b: ChoiceB) -> FieldIndex {
    assert!(a.0 < NUM_BASES && b.0 < NUM_RAYS, "choice out of range");
    FieldIndex(NUM_RAYS * a.0 + b.0)
}

pub fn field_choices(k: FieldIndex) -> (ChoiceA, ChoiceB) {
    assert!(k.0 < NUM_BASES * NUM_RAYS, "field index out of range");
    (ChoiceA(k.0 / NUM_RAYS), ChoiceB(k.0 % NUM_RAYS))
}

/// A sampled converted hidden state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LambdaPrime {
    /// Which draw of the converted model this is.
    pub draw: u64,
    /// The base model's atom.
    pub lambda: usize,
    /// `X_k` for each field, indexed by domain position `ia·|B| + ib`.
    pub outcomes: Vec<(OutcomeA, OutcomeB)>,
}

/// A stochastic model with its randomness moved into the hidden state.
///
/// Draw `i` of `λ′` reads stream `i` of a ChaCha20 generator keyed by the
/// seed: the first 64-bit word picks `λ`, word `1 + k` picks `X_k`. Any
/// single `X_k` can therefore be produced without the others, and always
/// agrees with the materialized table.
pub struct ConvertedModel<'m> {
    pub base: &'m StochasticModel,
    pub seed: u64,
    lambda_sampler: CdfSampler<usize>,
    /// Per `(λ, field)` samplers, row-major.
    samplers: Vec<CdfSampler<(OutcomeA, OutcomeB)>>,
}

impl<'m> ConvertedModel<'m> {
    pub fn num_fields(&self) -> usize {
        self.base.domain.num_pairs()
    }

    /// Domain-position field index of `(ia, ib)`.
    pub fn field_of(&self, ia: usize, ib: usize) -> usize {
        ia * self.base.domain.b.len() + ib
    }

    /// The base atom picked by draw `draw`.
    pub fn draw_lambda(&self, draw: u64) -> usize {
        let mut rng = stream_rng(self.seed, draw, 0);
        *self.lambda_sampler.sample(rng.next_u64())
    }

    fn draw_field(&self, draw: u64, lambda: usize, field: usize) -> (OutcomeA, OutcomeB) {
        let mut rng = stream_rng(self.seed, draw, 1 + field as u64);
        *self.samplers[lambda * self.num_fields() + field].sample(rng.next_u64())
    }

    /// Materializes draw `draw` of `λ′` with all of its pre-sampled outcomes.
    pub fn sample_lambda_prime(&self, draw: u64) -> LambdaPrime {
        let lambda = self.draw_lambda(draw);
        let outcomes = (0..self.num_fields()).map(|k| self.draw_field(draw, lambda, k)).collect();
        LambdaPrime { draw, lambda, outcomes }
    }

    /// `θ(a, b, λ′)` for draw `draw`, computing only the needed `X_k`.
    pub fn theta_lazy(&self, draw: u64, ia: usize, ib: usize) -> (OutcomeA, OutcomeB) {
        let lambda = self.draw_lambda(draw);
        self.draw_field(draw, lambda, self.field_of(ia, ib))
    }

    /// `θ(a, b, λ′)` read from a materialized `λ′`.
    pub fn theta(&self, lp: &LambdaPrime, ia: usize, ib: usize) -> (OutcomeA, OutcomeB) {
        lp.outcomes[self.field_of(ia, ib)]
    }
}

/// Builds the converted model; the base must already be validated.
pub fn convert_given_in_advance(model: &StochasticModel, seed: u64) -> ConvertedModel<'_> {
    let lambda_sampler = CdfSampler::new(model.lambdas.iter().enumerate().map(|(i, l)| (i, &l.weight)));
    let samplers = model
        .triples()
        .map(|(l, ia, ib)| CdfSampler::new(model.at(l, ia, ib).support().map(|(c, p)| ((c.oa, c.ob), p))))
        .collect();
    ConvertedModel { base: model, seed, lambda_sampler, samplers }
}

/// MIN witness within one `λ′`: a field whose A-response differs from the
/// one at the first `b` of the same row, or whose B-response differs from
/// the one at the first `a` of the same column.
pub fn min_witness_in(cm: &ConvertedModel<'_>, lp: &LambdaPrime) -> Option<Witness> {
    let dom = &cm.base.domain;
    for ia in 0..dom.a.len() {
        let (oa_ref, _) = cm.theta(lp, ia, 0);
        for ib in 1..dom.b.len() {
            let (oa, _) = cm.theta(lp, ia, ib);
            if oa != oa_ref {
                let mut w = Witness::at(lp.lambda, dom.a[ia].0, dom.b[ib].0, "theta_A reads B's choice through k(a,b)")
                    .value("theta_A at b", oa)
                    .value("theta_A at b'", oa_ref)
                    .value("draw", lp.draw);
                w.b_alt = Some(dom.b[0].0);
                return Some(w);
            }
        }
    }
    for ib in 0..dom.b.len() {
        let (_, ob_ref) = cm.theta(lp, 0, ib);
        for ia in 1..dom.a.len() {
            let (_, ob) = cm.theta(lp, ia, ib);
            if ob != ob_ref {
                let mut w = Witness::at(lp.lambda, dom.a[ia].0, dom.b[ib].0, "theta_B reads A's choice through k(a,b)")
                    .value("theta_B at a", ob)
                    .value("theta_B at a'", ob_ref)
                    .value("draw", lp.draw);
                w.a_alt = Some(dom.a[0].0);
                return Some(w);
            }
        }
    }
    None
}

/// Re-evaluates a MIN witness against a fresh materialization of its draw.
pub fn reconfirm_min_witness(cm: &ConvertedModel<'_>, w: &Witness) -> bool {
    let dom = &cm.base.domain;
    let (Some(a), Some(b)) = (w.a, w.b) else { return false };
    let Some(draw) = w.values.get("draw").and_then(|d| d.parse::<u64>().ok()) else { return false };
    let (Some(ia), Some(ib)) = (dom.pos_a(ChoiceA(a)), dom.pos_b(ChoiceB(b))) else { return false };
    let lp = cm.sample_lambda_prime(draw);
    if let Some(b_alt) = w.b_alt {
        let Some(jb) = dom.pos_b(ChoiceB(b_alt)) else { return false };
        cm.theta(&lp, ia, ib).0 != cm.theta(&lp, ia, jb).0
    } else if let Some(a_alt) = w.a_alt {
        let Some(ja) = dom.pos_a(ChoiceA(a_alt)) else { return false };
        cm.theta(&lp, ia, ib).1 != cm.theta(&lp, ja, ib).1
    } else {
        false
    }
}

/// Per-draw audit of a converted model.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct DrawAudit {
    pub draw: u64,
    pub lambda: usize,
    pub spin_violations: u64,
    pub twin_checked: u64,
    pub twin_violations: u64,
    pub min_witness: Option<Witness>,
}

pub fn audit_draw(cat: &Catalogue, cm: &ConvertedModel<'_>, draw: u64) -> DrawAudit {
    let lp = cm.sample_lambda_prime(draw);
    let dom = &cm.base.domain;
    let (mut spin_violations, mut twin_checked, mut twin_violations) = (0, 0, 0);
    for (ia, &a) in dom.a.iter().enumerate() {
        for (ib, &b) in dom.b.iter().enumerate() {
            let (oa, ob) = cm.theta(&lp, ia, ib);
            if !oa.is_spin() {
                spin_violations += 1;
            }
            if let Some(pos) = matching_member(cat, a, b) {
                twin_checked += 1;
                if oa.digit(pos) != ob.bit() {
                    twin_violations += 1;
                }
            }
        }
    }
    let min_witness = min_witness_in(cm, &lp);
    DrawAudit { draw, lambda: lp.lambda, spin_violations, twin_checked, twin_violations, min_witness }
}

/// SPIN/TWIN preservation and MIN-violation statistics over many draws.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ConversionReport {
    pub seed: u64,
    pub num_lambda: u64,
    pub spin_violations: u64,
    pub twin_checked: u64,
    pub twin_violations: u64,
    pub min_violating: u64,
    pub min_violation_fraction: f64,
    /// The first draw's witness, if any.
    pub first_witness: Option<Witness>,
    /// Draws in which no MIN witness exists.
    pub draws_without_witness: Vec<u64>,
}

/// Audits draws `0..num_lambda`. Draws are independent streams, so the
/// result does not depend on `threads`.
pub fn min_violation_witness(cm: &ConvertedModel<'_>, num_lambda: u64, threads: usize) -> (ConversionReport, Vec<DrawAudit>) {
    assert!(num_lambda >= 1, "need at least one draw");
    let cat = Catalogue::peres();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool");
    let audits: Vec<DrawAudit> = pool.install(|| (0..num_lambda).into_par_iter().map(|d| audit_draw(cat, cm, d)).collect());
    let min_violating = audits.iter().filter(|a| a.min_witness.is_some()).count() as u64;
    let report = ConversionReport {
        seed: cm.seed,
        num_lambda,
        spin_violations: audits.iter().map(|a| a.spin_violations).sum(),
        twin_checked: audits.iter().map(|a| a.twin_checked).sum(),
        twin_violations: audits.iter().map(|a| a.twin_violations).sum(),
        min_violating,
        min_violation_fraction: min_violating as f64 / num_lambda as f64,
        first_witness: audits.iter().find_map(|a| a.min_witness.clone()),
        draws_without_witness: audits.iter().filter(|a| a.min_witness.is_none()).map(|a| a.draw).collect(),
    };
    (report, audits)
}
