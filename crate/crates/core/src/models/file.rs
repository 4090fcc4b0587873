//! Reading models from structured text.
//!
//! ```json
//! { "name": "m",
//!   "lambda": [{"label": "l0", "weight": "1"}],
//!   "dists": [{"lambda": 0, "a": 0, "b": 0, "p": {"011,0": "1/3", "101,1": "1/3", "110,1": "1/3"}}] }
//! ```
//!
//! Deterministic models replace `dists` with
//! `"theta": [{"lambda": 0, "a": 0, "b": 0, "oa": "011", "ob": 0}]`.
//! Omitted cells are zero. The domain is the set of `a` and `b` indices that
//! occur, and every `(λ, a, b)` combination must be listed exactly once.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exactgeom::{Catalogue, Q2};
use crate::models::dist::JointDist;
use crate::models::model::{DeterministicModel, Domain, LambdaAtom, StochasticModel};
use crate::models::outcome::{Cell, ChoiceA, ChoiceB, OutcomeA, OutcomeB};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    #[serde(default)]
    description: String,
    lambda: Vec<RawLambda>,
    dists: Option<Vec<RawDist>>,
    theta: Option<Vec<RawTheta>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLambda {
    label: String,
    weight: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDist {
    lambda: usize,
    a: usize,
    b: usize,
    #[serde(default)]
    p: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTheta {
    lambda: usize,
    a: usize,
    b: usize,
    oa: String,
    ob: u8,
}

/// A model as read from a file.
#[derive(Clone, Debug)]
pub enum LoadedModel {
    Stochastic(StochasticModel),
    Deterministic(DeterministicModel),
}

impl LoadedModel {
    pub fn name(&self) -> &str {
        match self {
            LoadedModel::Stochastic(m) => &m.name,
            LoadedModel::Deterministic(m) => &m.name,
        }
    }

    pub fn to_stochastic(&self) -> StochasticModel {
        match self {
            LoadedModel::Stochastic(m) => m.clone(),
            LoadedModel::Deterministic(m) => m.to_stochastic(),
        }
    }

    /// The deterministic form, recovered from point masses if needed.
    pub fn to_deterministic(&self) -> Result<DeterministicModel> {
        match self {
            LoadedModel::Stochastic(m) => DeterministicModel::from_stochastic(m),
            LoadedModel::Deterministic(m) => Ok(m.clone()),
        }
    }
}

pub fn load_model_file(path: &Path) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Ingest { path: path.display().to_string(), message: e.to_string() })?;
    parse_model(&text, &path.display().to_string(), Catalogue::peres())
}

/// Parses model text; `origin` names the source in error messages.
pub fn parse_model(text: &str, origin: &str, cat: &Catalogue) -> Result<LoadedModel> {
    let err = |message: String| Error::Ingest { path: origin.to_string(), message };
    let raw: RawModel = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;

    let mut lambdas = Vec::with_capacity(raw.lambda.len());
    for (i, l) in raw.lambda.iter().enumerate() {
        let weight: Q2 = l.weight.parse().map_err(|e: Error| err(format!("lambda[{i}].weight: {e}")))?;
        lambdas.push(LambdaAtom { label: l.label.clone(), weight });
    }
    if lambdas.is_empty() {
        return Err(err("`lambda` must list at least one atom".into()));
    }

    let keys: Vec<(usize, usize, usize, String)> = match (&raw.dists, &raw.theta) {
        (Some(d), None) => d.iter().enumerate().map(|(i, e)| (e.lambda, e.a, e.b, format!("dists[{i}]"))).collect(),
        (None, Some(t)) => t.iter().enumerate().map(|(i, e)| (e.lambda, e.a, e.b, format!("theta[{i}]"))).collect(),
        _ => return Err(err("exactly one of `dists` or `theta` is required".into())),
    };
    let mut a_set = BTreeSet::new();
    let mut b_set = BTreeSet::new();
    for (l, a, b, at) in &keys {
        if *l >= lambdas.len() {
            return Err(err(format!("{at}: lambda index {l} out of range")));
        }
        if *a >= cat.num_bases() {
            return Err(err(format!("{at}: basis index {a} out of range (0..{})", cat.num_bases())));
        }
        if *b >= cat.num_rays() {
            return Err(err(format!("{at}: ray index {b} out of range (0..{})", cat.num_rays())));
        }
        a_set.insert(*a);
        b_set.insert(*b);
    }
    let domain = Domain { a: a_set.into_iter().map(ChoiceA).collect(), b: b_set.into_iter().map(ChoiceB).collect() };

    // Map each (λ, a, b) to the entry that defines it.
    let mut slots: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for (i, (l, a, b, at)) in keys.iter().enumerate() {
        if slots.insert((*l, *a, *b), i).is_some() {
            return Err(err(format!("{at}: duplicate entry for lambda={l} a={a} b={b}")));
        }
    }
    let mut order = Vec::with_capacity(lambdas.len() * domain.num_pairs());
    for l in 0..lambdas.len() {
        for a in &domain.a {
            for b in &domain.b {
                let i = slots
                    .get(&(l, a.0, b.0))
                    .ok_or_else(|| err(format!("missing entry for lambda={l} a={} b={}", a.0, b.0)))?;
                order.push(*i);
            }
        }
    }

    if let Some(dists) = raw.dists {
        let mut parsed = Vec::with_capacity(dists.len());
        for (i, d) in dists.iter().enumerate() {
            let mut jd = JointDist::zero();
            for (k, v) in &d.p {
                let cell: Cell = k.parse().map_err(|e: Error| err(format!("dists[{i}].p: {e}")))?;
                let p: Q2 = v.parse().map_err(|e: Error| err(format!("dists[{i}].p[{k:?}]: {e}")))?;
                jd.set(cell, p);
            }
            parsed.push(jd);
        }
        let table = order.into_iter().map(|i| parsed[i].clone()).collect();
        let m = StochasticModel::new(&raw.name, &raw.description, lambdas, domain, table).map_err(|e| err(e.to_string()))?;
        Ok(LoadedModel::Stochastic(m))
    } else {
        let theta_raw = raw.theta.expect("checked above");
        let mut parsed = Vec::with_capacity(theta_raw.len());
        for (i, t) in theta_raw.iter().enumerate() {
            let oa: OutcomeA = t.oa.parse().map_err(|e: Error| err(format!("theta[{i}].oa: {e}")))?;
            let ob = OutcomeB::from_bit(t.ob).ok_or_else(|| err(format!("theta[{i}].ob: must be 0 or 1")))?;
            parsed.push((oa, ob));
        }
        let theta = order.into_iter().map(|i| parsed[i]).collect();
        let m = DeterministicModel::new(&raw.name, lambdas, domain, theta).map_err(|e| err(e.to_string()))?;
        Ok(LoadedModel::Deterministic(m))
    }
}
