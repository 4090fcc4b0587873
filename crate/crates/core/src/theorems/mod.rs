//! The two structural results: the given-in-advance conversion (which keeps
//! SPIN and TWIN but breaks MIN) and the impossibility of deterministic
//! models with SPIN, TWIN and MIN via 101-colorings of the Peres rays.

pub mod coloring;
pub mod conversion;

pub use coloring::{
    export_cnf, ks_feasible, reduce_to_coloring, uncovered_pairs, verify_unsat_certificate, CertStep, Coloring,
    ColoringProblem, ConstraintId, SearchResult, SearchStatus,
};
pub use conversion::{
    convert_given_in_advance, field_choices, field_index, min_violation_witness, reconfirm_min_witness, ConversionReport,
    ConvertedModel, DrawAudit, FieldIndex, LambdaPrime,
};
