//! The quantum prediction for the joint outcome distribution and the two
//! self-contained stochastic models built from it.

use crate::error::{Error, Result};
use crate::exactgeom::{Catalogue, Q2};
use crate::models::dist::JointDist;
use crate::models::model::{Domain, StochasticModel};
use crate::models::outcome::{Cell, ChoiceA, ChoiceB, OutcomeA, OutcomeB};

pub const QM_DATA: &str = "qm-data";
pub const TOY_MINIMAL: &str = "toy-minimal";
pub const BUILTIN_NAMES: [&str; 2] = [QM_DATA, TOY_MINIMAL];

fn third() -> Q2 {
    Q2::from_ratios(1, 3, 0, 1)
}

/// Quantum prediction at `(a, b)`: with the squared overlaps `o_x, o_y, o_z`
/// of `w` against the basis members, the outcome whose zero sits at member
/// `m` gets `o_m/3` with `O_B = 0` and `(1 − o_m)/3` with `O_B = 1`.
pub fn qm_joint_in(cat: &Catalogue, a: ChoiceA, b: ChoiceB) -> Result<JointDist> {
    if a.0 >= cat.num_bases() {
        return Err(Error::ChoiceOutOfRange(format!("a={} (have {} bases)", a.0, cat.num_bases())));
    }
    if b.0 >= cat.num_rays() {
        return Err(Error::ChoiceOutOfRange(format!("b={} (have {} rays)", b.0, cat.num_rays())));
    }
    let third = third();
    let mut d = JointDist::zero();
    for (m, overlap) in cat.overlaps(a.0, b.0).iter().enumerate() {
        let oa = OutcomeA::zero_at(m);
        d.set(Cell::new(oa, OutcomeB::ZERO), overlap * &third);
        d.set(Cell::new(oa, OutcomeB::ONE), &(&Q2::one() - overlap) * &third);
    }
    Ok(d)
}

pub fn qm_joint(a: ChoiceA, b: ChoiceB) -> Result<JointDist> {
    qm_joint_in(Catalogue::peres(), a, b)
}

/// Position of `w` among the ordered members of basis `a`, by exact ray
/// equality.
pub fn matching_member(cat: &Catalogue, a: ChoiceA, b: ChoiceB) -> Option<usize> {
    cat.matching_position(a.0, b.0)
}

/// The minimal SPIN/TWIN/PI model that ignores agreement with the quantum
/// data.
pub fn toy_minimal_joint(cat: &Catalogue, a: ChoiceA, b: ChoiceB) -> JointDist {
    let c = |s: &str| s.parse::<Cell>().expect("literal cell");
    match matching_member(cat, a, b) {
        Some(0) => JointDist::from_cells(["110,1", "101,1", "011,0"].map(|s| (c(s), third()))),
        Some(1) => JointDist::from_cells(["110,1", "101,0", "011,1"].map(|s| (c(s), third()))),
        Some(2) => JointDist::from_cells(["110,0", "101,1", "011,1"].map(|s| (c(s), third()))),
        _ => {
            let ninth = Q2::from_ratios(1, 9, 0, 1);
            let two_ninths = Q2::from_ratios(2, 9, 0, 1);
            JointDist::from_cells(OutcomeA::SPIN.into_iter().flat_map(|oa| {
                [(Cell::new(oa, OutcomeB::ZERO), ninth.clone()), (Cell::new(oa, OutcomeB::ONE), two_ninths.clone())]
            }))
        }
    }
}

pub fn builtin_model_in(cat: &Catalogue, name: &str) -> Result<StochasticModel> {
    let domain = Domain::full(cat.num_bases(), cat.num_rays());
    let lambdas = StochasticModel::single_atom();
    match name {
        QM_DATA => StochasticModel::from_fn(
            QM_DATA,
            "trivial hidden-variable space; conditionals equal the quantum prediction",
            lambdas,
            domain,
            |_, a, b| qm_joint_in(cat, a, b).expect("in range"),
        ),
        TOY_MINIMAL => StochasticModel::from_fn(
            TOY_MINIMAL,
            "trivial hidden-variable space; 1/3 on each TWIN-consistent outcome when w is in the basis, else 1/9 and 2/9",
            lambdas,
            domain,
            |_, a, b| toy_minimal_joint(cat, a, b),
        ),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

pub fn builtin_model(name: &str) -> Result<StochasticModel> {
    builtin_model_in(Catalogue::peres(), name)
}
