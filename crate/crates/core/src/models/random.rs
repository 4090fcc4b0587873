//! Seeded generators of small exact models, used to cross-check the
//! condition checkers on many shapes: local, signalling, correlated, and
//! deterministic.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::exactgeom::Q2;
use crate::models::dist::{JointDist, MarginalA, MarginalB};
use crate::models::model::{DeterministicModel, Domain, LambdaAtom, StochasticModel};
use crate::models::outcome::{Cell, ChoiceA, ChoiceB, OutcomeA, OutcomeB};

const NUM_BASES: usize = 40;
const NUM_RAYS: usize = 33;

/// Shape of a generated model.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Shape {
    /// Product of local marginals: Bell-local.
    Local,
    /// Product of marginals that depend on both choices: violates PI only.
    Signalling,
    /// Local marginals with a marginal-preserving correlation: violates OI only.
    CorrelatedLocal,
    /// Unstructured random joint distributions.
    Arbitrary,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Local, Shape::Signalling, Shape::CorrelatedLocal, Shape::Arbitrary];
}

/// `k` nonnegative rationals with small numerators summing to one.
fn random_simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<Q2> {
    let mut raw: Vec<i64> = (0..k).map(|_| rng.gen_range(0..5)).collect();
    if raw.iter().all(|&x| x == 0) {
        raw[rng.gen_range(0..k)] = 1;
    }
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|x| Q2::from_ratios(x, total, 0, 1)).collect()
}

fn random_marginal_a<R: Rng>(rng: &mut R) -> MarginalA {
    let mut m: MarginalA = Default::default();
    // Mostly SPIN outcomes, occasionally the whole 3-bit range.
    let support: Vec<OutcomeA> = if rng.gen_bool(0.8) { OutcomeA::SPIN.to_vec() } else { OutcomeA::all().collect() };
    for (oa, p) in support.iter().zip(random_simplex(rng, support.len())) {
        m[oa.bits() as usize] = p;
    }
    m
}

fn random_marginal_b<R: Rng>(rng: &mut R) -> MarginalB {
    let p = random_simplex(rng, 2);
    [p[0].clone(), p[1].clone()]
}

fn random_lambdas<R: Rng>(rng: &mut R) -> Vec<LambdaAtom> {
    let n = rng.gen_range(1..=3);
    random_simplex(rng, n)
        .into_iter()
        .enumerate()
        .map(|(i, w)| LambdaAtom { label: format!("l{i}"), weight: w })
        .collect()
}

/// Nonempty subset of `0..n` of size at most `max`, in ascending order.
fn random_subset<R: Rng>(rng: &mut R, n: usize, max: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=max);
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let mut pick = all[..k].to_vec();
    pick.sort_unstable();
    pick
}

fn random_domain<R: Rng>(rng: &mut R) -> Domain {
    let mut a = random_subset(rng, NUM_BASES, 3);
    // Bias toward bases that contain the chosen rays so TWIN is exercised.
    if rng.gen_bool(0.5) && !a.contains(&0) {
        a.insert(0, 0);
        a.truncate(3);
    }
    let mut b = random_subset(rng, NUM_RAYS, 4);
    if rng.gen_bool(0.5) && !b.contains(&0) {
        b.insert(0, 0);
        b.truncate(4);
    }
    Domain { a: a.into_iter().map(ChoiceA).collect(), b: b.into_iter().map(ChoiceB).collect() }
}

/// Adds `+e` on (o1,0),(o2,1) and `-e` on (o1,1),(o2,0), which leaves both
/// marginals unchanged; `e` is the largest value keeping cells nonnegative,
/// halved.
fn correlate(d: &mut JointDist, o1: OutcomeA, o2: OutcomeA) {
    let (z, one) = (OutcomeB::ZERO, OutcomeB::ONE);
    let lo = [d.p(o1, one).clone(), d.p(o2, z).clone()];
    let e = if lo[0].cmp_value(&lo[1]).is_le() { lo[0].clone() } else { lo[1].clone() };
    let e = &e * &Q2::from_ratios(1, 2, 0, 1);
    if e.is_zero() {
        return;
    }
    d.set(Cell::new(o1, z), d.p(o1, z) + &e);
    d.set(Cell::new(o2, one), d.p(o2, one) + &e);
    d.set(Cell::new(o1, one), d.p(o1, one) - &e);
    d.set(Cell::new(o2, z), d.p(o2, z) - &e);
}

#[allow(clippy::needless_range_loop)]
pub fn random_stochastic<R: Rng>(rng: &mut R, shape: Shape, name: &str) -> StochasticModel {
    let lambdas = random_lambdas(rng);
    let domain = random_domain(rng);
    let nl = lambdas.len();
    let local_a: Vec<Vec<MarginalA>> = (0..nl).map(|_| domain.a.iter().map(|_| random_marginal_a(rng)).collect()).collect();
    let local_b: Vec<Vec<MarginalB>> = (0..nl).map(|_| domain.b.iter().map(|_| random_marginal_b(rng)).collect()).collect();
    let mut table = Vec::with_capacity(nl * domain.num_pairs());
    for l in 0..nl {
        for ia in 0..domain.a.len() {
            for ib in 0..domain.b.len() {
                let d = match shape {
                    Shape::Local => JointDist::product(&local_a[l][ia], &local_b[l][ib]),
                    Shape::Signalling => {
                        // Keep the first b (and first a) on the local marginal
                        // so that only some triples signal.
                        let ma = if ib == 0 || rng.gen_bool(0.3) { local_a[l][ia].clone() } else { random_marginal_a(rng) };
                        let mb = if ia == 0 || rng.gen_bool(0.3) { local_b[l][ib].clone() } else { random_marginal_b(rng) };
                        JointDist::product(&ma, &mb)
                    }
                    Shape::CorrelatedLocal => {
                        let mut d = JointDist::product(&local_a[l][ia], &local_b[l][ib]);
                        if rng.gen_bool(0.7) {
                            let mut pair = OutcomeA::SPIN.to_vec();
                            pair.shuffle(rng);
                            correlate(&mut d, pair[0], pair[1]);
                        }
                        d
                    }
                    Shape::Arbitrary => {
                        let cells: Vec<Cell> = Cell::spin().collect();
                        JointDist::from_cells(cells.iter().copied().zip(random_simplex(rng, cells.len())))
                    }
                };
                table.push(d);
            }
        }
    }
    StochasticModel::new(name, &format!("random {shape:?} model"), lambdas, domain, table).expect("consistent shape")
}

/// Random response functions; with `local` set, `θ_A` ignores `b` and `θ_B`
/// ignores `a`.
#[allow(clippy::needless_range_loop)]
pub fn random_deterministic<R: Rng>(rng: &mut R, local: bool, name: &str) -> DeterministicModel {
    let lambdas = random_lambdas(rng);
    let domain = random_domain(rng);
    let nl = lambdas.len();
    let pick_a = |rng: &mut R| {
        if rng.gen_bool(0.9) {
            OutcomeA::SPIN[rng.gen_range(0..3)]
        } else {
            OutcomeA::from_bits(rng.gen_range(0..8)).expect("3 bits")
        }
    };
    let theta_a: Vec<Vec<OutcomeA>> = (0..nl).map(|_| domain.a.iter().map(|_| pick_a(rng)).collect()).collect();
    let theta_b: Vec<Vec<OutcomeB>> =
        (0..nl).map(|_| domain.b.iter().map(|_| OutcomeB::from_bit(rng.gen_range(0..2)).expect("bit")).collect()).collect();
    let mut theta = Vec::with_capacity(nl * domain.num_pairs());
    for l in 0..nl {
        for ia in 0..domain.a.len() {
            for ib in 0..domain.b.len() {
                let oa = if local || ib == 0 || rng.gen_bool(0.5) { theta_a[l][ia] } else { pick_a(rng) };
                let ob = if local || ia == 0 || rng.gen_bool(0.5) {
                    theta_b[l][ib]
                } else {
                    OutcomeB::from_bit(rng.gen_range(0..2)).expect("bit")
                };
                theta.push((oa, ob));
            }
        }
    }
    DeterministicModel::new(name, lambdas, domain, theta).expect("consistent shape")
}

/// `n` stochastic models cycling through every [`Shape`].
pub fn stochastic_corpus(seed: u64, n: usize) -> Vec<StochasticModel> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let shape = Shape::ALL[i % Shape::ALL.len()];
            random_stochastic(&mut rng, shape, &format!("random-{i}"))
        })
        .collect()
}

/// `n` deterministic models, alternately local and not.
pub fn deterministic_corpus(seed: u64, n: usize) -> Vec<DeterministicModel> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|i| random_deterministic(&mut rng, i % 2 == 0, &format!("random-det-{i}"))).collect()
}
