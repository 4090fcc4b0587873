use crate::error::{Error, Result};
use crate::exactgeom::Q2;
use crate::models::dist::JointDist;
use crate::models::outcome::{Cell, ChoiceA, ChoiceB, OutcomeA, OutcomeB};
use crate::verdict::{Verdict, Witness};

/// One atom of the finite hidden-variable space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LambdaAtom {
    pub label: String,
    pub weight: Q2,
}

/// The finite set of choices a model is defined on.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Domain {
    pub a: Vec<ChoiceA>,
    pub b: Vec<ChoiceB>,
}

impl Domain {
    /// All 40 bases against all 33 directions.
    pub fn full(num_bases: usize, num_rays: usize) -> Domain {
        Domain { a: (0..num_bases).map(ChoiceA).collect(), b: (0..num_rays).map(ChoiceB).collect() }
    }

    pub fn pos_a(&self, a: ChoiceA) -> Option<usize> {
        self.a.iter().position(|&x| x == a)
    }

    pub fn pos_b(&self, b: ChoiceB) -> Option<usize> {
        self.b.iter().position(|&x| x == b)
    }

    pub fn num_pairs(&self) -> usize {
        self.a.len() * self.b.len()
    }
}

/// A finite stochastic model: weights on Λ and a conditional joint
/// distribution for every `(λ, a, b)` in the domain.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StochasticModel {
    pub name: String,
    pub description: String,
    pub lambdas: Vec<LambdaAtom>,
    pub domain: Domain,
    /// Row-major over (λ, a-position, b-position).
    table: Vec<JointDist>,
}

impl StochasticModel {
    /// Builds a model from a table laid out as `table[(l * na + ia) * nb + ib]`.
    pub fn new(name: &str, description: &str, lambdas: Vec<LambdaAtom>, domain: Domain, table: Vec<JointDist>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidModel("empty hidden-variable space".into()));
        }
        if domain.a.is_empty() || domain.b.is_empty() {
            return Err(Error::InvalidModel("empty choice domain".into()));
        }
        let expected = lambdas.len() * domain.num_pairs();
        if table.len() != expected {
            return Err(Error::InvalidModel(format!("table has {} entries, expected {expected}", table.len())));
        }
        Ok(StochasticModel { name: name.into(), description: description.into(), lambdas, domain, table })
    }

    /// Builds the table by evaluating `f(λ, a, b)` across the domain.
    pub fn from_fn<F>(name: &str, description: &str, lambdas: Vec<LambdaAtom>, domain: Domain, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, ChoiceA, ChoiceB) -> JointDist,
    {
        let mut table = Vec::with_capacity(lambdas.len() * domain.num_pairs());
        for l in 0..lambdas.len() {
            for &a in &domain.a {
                for &b in &domain.b {
                    table.push(f(l, a, b));
                }
            }
        }
        StochasticModel::new(name, description, lambdas, domain, table)
    }

    pub fn num_lambdas(&self) -> usize {
        self.lambdas.len()
    }

    fn slot(&self, l: usize, ia: usize, ib: usize) -> usize {
        (l * self.domain.a.len() + ia) * self.domain.b.len() + ib
    }

    /// Conditional distribution at domain positions.
    pub fn at(&self, l: usize, ia: usize, ib: usize) -> &JointDist {
        &self.table[self.slot(l, ia, ib)]
    }

    pub fn at_mut(&mut self, l: usize, ia: usize, ib: usize) -> &mut JointDist {
        let s = self.slot(l, ia, ib);
        &mut self.table[s]
    }

    /// Conditional distribution `P_ab(·|λ)`, or `None` outside the domain.
    pub fn conditional(&self, l: usize, a: ChoiceA, b: ChoiceB) -> Option<&JointDist> {
        let ia = self.domain.pos_a(a)?;
        let ib = self.domain.pos_b(b)?;
        (l < self.lambdas.len()).then(|| self.at(l, ia, ib))
    }

    /// Every `(λ, a-position, b-position)` in scan order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (na, nb) = (self.domain.a.len(), self.domain.b.len());
        (0..self.lambdas.len()).flat_map(move |l| (0..na).flat_map(move |ia| (0..nb).map(move |ib| (l, ia, ib))))
    }

    /// Trivial Λ: a single atom of weight one.
    pub fn single_atom() -> Vec<LambdaAtom> {
        vec![LambdaAtom { label: "λ0".into(), weight: Q2::one() }]
    }

    /// The λ-average `Σ_λ P^Λ(λ) · P_ab(·|λ)` at domain positions.
    pub fn aggregate_at(&self, ia: usize, ib: usize) -> JointDist {
        let mut out = JointDist::zero();
        for (l, atom) in self.lambdas.iter().enumerate() {
            out.add_assign(&self.at(l, ia, ib).scaled(&atom.weight));
        }
        out
    }

    /// Structured export in the model file format.
    pub fn to_json(&self) -> serde_json::Value {
        let dists: Vec<serde_json::Value> = self
            .triples()
            .map(|(l, ia, ib)| {
                serde_json::json!({
                    "lambda": l,
                    "a": self.domain.a[ia].0,
                    "b": self.domain.b[ib].0,
                    "p": self.at(l, ia, ib).to_json(),
                })
            })
            .collect();
        serde_json::json!({
            "name": self.name,
            "description": self.description,
            "lambda": lambda_json(&self.lambdas),
            "dists": dists,
        })
    }
}

fn lambda_json(lambdas: &[LambdaAtom]) -> serde_json::Value {
    lambdas.iter().map(|l| serde_json::json!({"label": l.label, "weight": l.weight.to_string()})).collect()
}

/// `aggregate(model, a, b)`: the λ-mixture of the conditionals at `(a, b)`.
pub fn aggregate(model: &StochasticModel, a: ChoiceA, b: ChoiceB) -> Result<JointDist> {
    let ia = model.domain.pos_a(a).ok_or_else(|| Error::ChoiceOutOfRange(format!("a={}", a.0)))?;
    let ib = model.domain.pos_b(b).ok_or_else(|| Error::ChoiceOutOfRange(format!("b={}", b.0)))?;
    Ok(model.aggregate_at(ia, ib))
}

/// Checks that weights and every conditional are probability distributions.
///
/// A failing verdict points at the first offending λ weight or `(λ, a, b)`.
pub fn validate_model(model: &StochasticModel) -> Verdict {
    const NAME: &str = "valid";
    let mut checked = 0u64;
    for (l, atom) in model.lambdas.iter().enumerate() {
        checked += 1;
        if atom.weight.is_negative() {
            let w = Witness { lambda: Some(l), detail: "negative λ weight".into(), ..Witness::default() }
                .value("weight", &atom.weight);
            return Verdict::fail(NAME, checked, w);
        }
    }
    let total: Q2 = model.lambdas.iter().map(|l| &l.weight).sum();
    if total != Q2::one() {
        let w = Witness { detail: "λ weights do not sum to 1".into(), ..Witness::default() }.value("total", total);
        return Verdict::fail(NAME, checked, w);
    }
    for (l, ia, ib) in model.triples() {
        checked += 1;
        if let Some(defect) = model.at(l, ia, ib).defect() {
            let w = Witness::at(l, model.domain.a[ia].0, model.domain.b[ib].0, defect.to_string());
            return Verdict::fail(NAME, checked, w);
        }
    }
    Verdict::pass(NAME, checked)
}

/// A model whose conditionals are point masses, given by the response
/// functions `θ(a, b, λ) = (θ_A, θ_B)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DeterministicModel {
    pub name: String,
    pub lambdas: Vec<LambdaAtom>,
    pub domain: Domain,
    /// Row-major over (λ, a-position, b-position), as in [`StochasticModel`].
    theta: Vec<(OutcomeA, OutcomeB)>,
}

impl DeterministicModel {
    pub fn new(name: &str, lambdas: Vec<LambdaAtom>, domain: Domain, theta: Vec<(OutcomeA, OutcomeB)>) -> Result<Self> {
        if lambdas.is_empty() || domain.a.is_empty() || domain.b.is_empty() {
            return Err(Error::InvalidModel("empty hidden-variable space or choice domain".into()));
        }
        let expected = lambdas.len() * domain.num_pairs();
        if theta.len() != expected {
            return Err(Error::InvalidModel(format!("theta has {} entries, expected {expected}", theta.len())));
        }
        Ok(DeterministicModel { name: name.into(), lambdas, domain, theta })
    }

    pub fn from_fn<F>(name: &str, lambdas: Vec<LambdaAtom>, domain: Domain, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, ChoiceA, ChoiceB) -> (OutcomeA, OutcomeB),
    {
        let mut theta = Vec::with_capacity(lambdas.len() * domain.num_pairs());
        for l in 0..lambdas.len() {
            for &a in &domain.a {
                for &b in &domain.b {
                    theta.push(f(l, a, b));
                }
            }
        }
        DeterministicModel::new(name, lambdas, domain, theta)
    }

    pub fn num_lambdas(&self) -> usize {
        self.lambdas.len()
    }

    /// `θ` at domain positions.
    pub fn theta_at(&self, l: usize, ia: usize, ib: usize) -> (OutcomeA, OutcomeB) {
        self.theta[(l * self.domain.a.len() + ia) * self.domain.b.len() + ib]
    }

    pub fn theta(&self, l: usize, a: ChoiceA, b: ChoiceB) -> Option<(OutcomeA, OutcomeB)> {
        let ia = self.domain.pos_a(a)?;
        let ib = self.domain.pos_b(b)?;
        (l < self.lambdas.len()).then(|| self.theta_at(l, ia, ib))
    }

    /// The point-mass embedding as a stochastic model.
    pub fn to_stochastic(&self) -> StochasticModel {
        let table = self.theta.iter().map(|&(oa, ob)| JointDist::point_mass(Cell::new(oa, ob))).collect();
        StochasticModel::new(&self.name, "point-mass embedding of a deterministic model", self.lambdas.clone(), self.domain.clone(), table)
            .expect("shape already validated")
    }

    /// Recovers `θ` from a stochastic model whose conditionals are all point
    /// masses.
    pub fn from_stochastic(model: &StochasticModel) -> Result<DeterministicModel> {
        let mut theta = Vec::new();
        for (l, ia, ib) in model.triples() {
            match model.at(l, ia, ib).as_point_mass() {
                Some(c) => theta.push((c.oa, c.ob)),
                None => {
                    return Err(Error::NotDeterministic(format!(
                        "conditional at lambda={l} a={} b={} is not a point mass",
                        model.domain.a[ia].0, model.domain.b[ib].0
                    )))
                }
            }
        }
        DeterministicModel::new(&model.name, model.lambdas.clone(), model.domain.clone(), theta)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut theta = Vec::new();
        for l in 0..self.lambdas.len() {
            for (ia, a) in self.domain.a.iter().enumerate() {
                for (ib, b) in self.domain.b.iter().enumerate() {
                    let (oa, ob) = self.theta_at(l, ia, ib);
                    theta.push(serde_json::json!({"lambda": l, "a": a.0, "b": b.0, "oa": oa.to_string(), "ob": ob.bit()}));
                }
            }
        }
        serde_json::json!({"name": self.name, "lambda": lambda_json(&self.lambdas), "theta": theta})
    }
}
