//! Impossibility of deterministic models with SPIN, TWIN and MIN, reduced to
//! 101-colorings of the Peres rays.
//!
//! Fix λ in a deterministic model satisfying all three conditions. By MIN,
//! `θ_B(a, b, λ)` depends only on `w = b`, so it defines a coloring
//! `c(w) ∈ {0, 1}` of the 33 rays, and `θ_A(a, b, λ)` depends only on `a`.
//! For an internal basis `(x, y, z)`, choosing `b = x` makes TWIN force
//! digit 1 of `θ_A(a, λ)` to equal `c(x)`, and likewise for `y` and `z`; SPIN
//! says `θ_A` has exactly one zero, so exactly one of `c(x), c(y), c(z)` is
//! 0. For a completed basis only two members are catalogue rays; the same
//! argument shows their colors are two digits of a SPIN outcome, so at most
//! one of them is 0. Every orthogonal catalogue pair lies in some basis, so
//! the constraints below are necessary conditions on `c`. If they are
//! unsatisfiable, no such λ exists.

use std::fmt;

use serde::Serialize;

use crate::exactgeom::{BasisKind, Catalogue};

/// Reference to a constraint: `T<i>` for triples, `P<i>` for pairs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConstraintId {
    Triple(usize),
    Pair(usize),
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintId::Triple(i) => write!(f, "T{i}"),
            ConstraintId::Pair(i) => write!(f, "P{i}"),
        }
    }
}

/// Exactly one 0 on every triple; at most one 0 on every pair.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ColoringProblem {
    pub num_rays: usize,
    /// Human-readable ray names, for the CNF header.
    pub ray_labels: Vec<String>,
    pub triples: Vec<[usize; 3]>,
    pub pairs: Vec<[usize; 2]>,
}

/// A {0,1} value per ray.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Coloring {
    pub values: Vec<u8>,
}

impl ColoringProblem {
    /// First constraint violated by a (partial) assignment, if any.
    pub fn violated(&self, assign: &[Option<u8>]) -> Option<ConstraintId> {
        for (i, t) in self.triples.iter().enumerate() {
            let vals: Vec<Option<u8>> = t.iter().map(|&r| assign[r]).collect();
            let zeros = vals.iter().filter(|v| **v == Some(0)).count();
            let ones = vals.iter().filter(|v| **v == Some(1)).count();
            if zeros >= 2 || ones == 3 {
                return Some(ConstraintId::Triple(i));
            }
        }
        for (i, p) in self.pairs.iter().enumerate() {
            if assign[p[0]] == Some(0) && assign[p[1]] == Some(0) {
                return Some(ConstraintId::Pair(i));
            }
        }
        None
    }

    pub fn satisfied_by(&self, coloring: &Coloring) -> bool {
        coloring.values.len() == self.num_rays
            && coloring.values.iter().all(|&v| v <= 1)
            && self.violated(&coloring.values.iter().map(|&v| Some(v)).collect::<Vec<_>>()).is_none()
    }

    /// The same problem with every triple constraint dropped.
    pub fn pairs_only(&self) -> ColoringProblem {
        ColoringProblem { triples: Vec::new(), ..self.clone() }
    }
}

/// Builds the coloring problem from the catalogue: internal bases give
/// triples; orthogonal pairs not inside any internal triple give pairs.
pub fn reduce_to_coloring_in(cat: &Catalogue) -> ColoringProblem {
    let triples: Vec<[usize; 3]> = cat
        .bases
        .iter()
        .filter(|b| b.kind == BasisKind::Internal)
        .map(|b| {
            let m = b.catalogue_members();
            [m[0], m[1], m[2]]
        })
        .collect();
    let in_triple = |i: usize, j: usize| triples.iter().any(|t| t.contains(&i) && t.contains(&j));
    let pairs = crate::exactgeom::orthogonal_pairs(&cat.rays)
        .into_iter()
        .filter(|&(i, j)| !in_triple(i, j))
        .map(|(i, j)| [i, j])
        .collect();
    ColoringProblem {
        num_rays: cat.num_rays(),
        ray_labels: cat.rays.iter().map(|r| r.to_string()).collect(),
        triples,
        pairs,
    }
}

pub fn reduce_to_coloring() -> ColoringProblem {
    reduce_to_coloring_in(Catalogue::peres())
}

/// Orthogonal catalogue pairs covered by neither a triple nor a pair
/// constraint; empty for a sound reduction.
pub fn uncovered_pairs(cat: &Catalogue, problem: &ColoringProblem) -> Vec<(usize, usize)> {
    crate::exactgeom::orthogonal_pairs(&cat.rays)
        .into_iter()
        .filter(|&(i, j)| {
            let in_t = problem.triples.iter().any(|t| t.contains(&i) && t.contains(&j));
            let in_p = problem.pairs.iter().any(|p| p.contains(&i) && p.contains(&j));
            !in_t && !in_p
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CertStep {
    Branch { ray: usize, val: u8 },
    Propagate { ray: usize, val: u8, reason: ConstraintId },
    Backtrack,
}

impl fmt::Display for CertStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertStep::Branch { ray, val } => write!(f, "BRANCH ray={ray} val={val}"),
            CertStep::Propagate { ray, val, reason } => write!(f, "PROPAGATE ray={ray} val={val} reason={reason}"),
            CertStep::Backtrack => write!(f, "BACKTRACK"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SearchStatus {
    Sat,
    Unsat,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub coloring: Option<Coloring>,
    /// Number of branch decisions.
    pub nodes_explored: u64,
    pub certificate: Vec<CertStep>,
}

impl SearchResult {
    pub fn certificate_text(&self) -> String {
        let mut out = String::new();
        for step in &self.certificate {
            out.push_str(&step.to_string());
            out.push('\n');
        }
        out
    }
}

struct Search<'p> {
    problem: &'p ColoringProblem,
    assign: Vec<Option<u8>>,
    trail: Vec<usize>,
    log: Vec<CertStep>,
    nodes: u64,
}

impl Search<'_> {
    fn set(&mut self, ray: usize, val: u8) {
        self.assign[ray] = Some(val);
        self.trail.push(ray);
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let r = self.trail.pop().expect("nonempty trail");
            self.assign[r] = None;
        }
    }

    /// Unit propagation to a fixpoint. Returns `false` on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            if self.problem.violated(&self.assign).is_some() {
                return false;
            }
            let mut changed = false;
            for i in 0..self.problem.triples.len() {
                let t = self.problem.triples[i];
                let zeros = t.iter().filter(|&&r| self.assign[r] == Some(0)).count();
                let ones = t.iter().filter(|&&r| self.assign[r] == Some(1)).count();
                let free: Vec<usize> = t.iter().copied().filter(|&r| self.assign[r].is_none()).collect();
                if free.is_empty() {
                    continue;
                }
                let forced = if zeros == 1 {
                    Some(1)
                } else if zeros == 0 && ones == 2 {
                    Some(0)
                } else {
                    None
                };
                if let Some(val) = forced {
                    for r in free {
                        self.set(r, val);
                        self.log.push(CertStep::Propagate { ray: r, val, reason: ConstraintId::Triple(i) });
                    }
                    changed = true;
                    break;
                }
            }
            if !changed {
                for i in 0..self.problem.pairs.len() {
                    let [p, q] = self.problem.pairs[i];
                    let other = match (self.assign[p], self.assign[q]) {
                        (Some(0), None) => Some(q),
                        (None, Some(0)) => Some(p),
                        _ => None,
                    };
                    if let Some(r) = other {
                        self.set(r, 1);
                        self.log.push(CertStep::Propagate { ray: r, val: 1, reason: ConstraintId::Pair(i) });
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn solve(&mut self) -> bool {
        if !self.propagate() {
            return false;
        }
        let Some(ray) = self.assign.iter().position(Option::is_none) else {
            return true;
        };
        for val in [1u8, 0] {
            let mark = self.trail.len();
            self.nodes += 1;
            self.log.push(CertStep::Branch { ray, val });
            self.set(ray, val);
            if self.solve() {
                return true;
            }
            self.undo_to(mark);
            self.log.push(CertStep::Backtrack);
        }
        false
    }
}

/// Complete backtracking search with unit propagation. Branches on the
/// lowest-index uncolored ray, trying 1 before 0.
pub fn ks_feasible(problem: &ColoringProblem) -> SearchResult {
    let mut s = Search { problem, assign: vec![None; problem.num_rays], trail: Vec::new(), log: Vec::new(), nodes: 0 };
    let sat = s.solve();
    let coloring = sat.then(|| Coloring { values: s.assign.iter().map(|v| v.expect("complete assignment")).collect() });
    SearchResult {
        status: if sat { SearchStatus::Sat } else { SearchStatus::Unsat },
        coloring,
        nodes_explored: s.nodes,
        certificate: s.log,
    }
}

/// Replays an UNSAT certificate: every propagation must be forced by its
/// stated constraint, every leaf must violate a constraint, and every branch
/// must refute both colors of its ray. Returns `false` for anything else.
pub fn verify_unsat_certificate(problem: &ColoringProblem, cert: &[CertStep]) -> bool {
    fn forces(problem: &ColoringProblem, assign: &[Option<u8>], ray: usize, val: u8, reason: ConstraintId) -> bool {
        match reason {
            ConstraintId::Triple(i) => {
                let Some(t) = problem.triples.get(i) else { return false };
                if !t.contains(&ray) {
                    return false;
                }
                let others: Vec<Option<u8>> = t.iter().filter(|&&r| r != ray).map(|&r| assign[r]).collect();
                let zeros = others.iter().filter(|v| **v == Some(0)).count();
                let ones = others.iter().filter(|v| **v == Some(1)).count();
                (val == 1 && zeros == 1) || (val == 0 && ones == 2)
            }
            ConstraintId::Pair(i) => {
                let Some(p) = problem.pairs.get(i) else { return false };
                let other = if p[0] == ray { p[1] } else if p[1] == ray { p[0] } else { return false };
                val == 1 && assign[other] == Some(0)
            }
        }
    }

    fn closed(problem: &ColoringProblem, cert: &[CertStep], pos: &mut usize, assign: &mut Vec<Option<u8>>) -> bool {
        let mut set_here = Vec::new();
        let result = (|| {
            while let Some(CertStep::Propagate { ray, val, reason }) = cert.get(*pos).copied() {
                if assign[ray].is_some() || !forces(problem, assign, ray, val, reason) {
                    return false;
                }
                assign[ray] = Some(val);
                set_here.push(ray);
                *pos += 1;
            }
            if problem.violated(assign).is_some() {
                return true;
            }
            let Some(CertStep::Branch { ray, val: 1 }) = cert.get(*pos).copied() else { return false };
            if assign[ray].is_some() {
                return false;
            }
            for val in [1u8, 0] {
                if cert.get(*pos) != Some(&CertStep::Branch { ray, val }) {
                    return false;
                }
                *pos += 1;
                assign[ray] = Some(val);
                if !closed(problem, cert, pos, assign) {
                    return false;
                }
                assign[ray] = None;
                if cert.get(*pos) != Some(&CertStep::Backtrack) {
                    return false;
                }
                *pos += 1;
            }
            true
        })();
        for r in set_here {
            assign[r] = None;
        }
        result
    }

    let mut assign = vec![None; problem.num_rays];
    let mut pos = 0;
    closed(problem, cert, &mut pos, &mut assign) && pos == cert.len()
}

/// DIMACS CNF: variable `i + 1` is true when ray `i` has color 1. Each triple
/// contributes `(¬x ∨ ¬y ∨ ¬z)` and the three clauses `(x ∨ y)`, `(x ∨ z)`,
/// `(y ∨ z)`; each pair contributes `(x ∨ y)`.
pub fn export_cnf(problem: &ColoringProblem) -> String {
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    for t in &problem.triples {
        let v = t.map(|r| r as i64 + 1);
        clauses.push(vec![-v[0], -v[1], -v[2]]);
        clauses.push(vec![v[0], v[1]]);
        clauses.push(vec![v[0], v[2]]);
        clauses.push(vec![v[1], v[2]]);
    }
    for p in &problem.pairs {
        clauses.push(vec![p[0] as i64 + 1, p[1] as i64 + 1]);
    }
    let mut out = String::new();
    out.push_str("c 101-coloring of the Peres rays; variable true = color 1\n");
    for (i, label) in problem.ray_labels.iter().enumerate() {
        out.push_str(&format!("c var {} = ray {} {}\n", i + 1, i, label));
    }
    out.push_str(&format!("p cnf {} {}\n", problem.num_rays, clauses.len()));
    for c in clauses {
        let lits: Vec<String> = c.iter().map(i64::to_string).collect();
        out.push_str(&lits.join(" "));
        out.push_str(" 0\n");
    }
    out
}
