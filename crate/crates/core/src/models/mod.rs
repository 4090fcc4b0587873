//! Outcome spaces, exact joint distributions, hidden-variable models, and
//! the λ-average that turns a model into observable data.
//!
//! Digit `i` of A's outcome belongs to member `i` of the ordered basis
//! `(x, y, z)`.

pub mod builtin;
pub mod dist;
pub mod file;
pub mod model;
pub mod outcome;
pub mod random;

pub use builtin::{builtin_model, qm_joint, QM_DATA, TOY_MINIMAL};
pub use dist::{marginal_a, marginal_b, JointDist, MarginalA, MarginalB};
pub use file::{load_model_file, parse_model, LoadedModel};
pub use model::{aggregate, validate_model, DeterministicModel, Domain, LambdaAtom, StochasticModel};
pub use outcome::{Cell, ChoiceA, ChoiceB, OutcomeA, OutcomeB};
