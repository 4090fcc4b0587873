//! Seeded sampling of model outcomes and comparison of empirical frequencies
//! with exact distributions.
//!
//! All randomness comes from ChaCha20 (`rand_chacha` 0.3) keyed by
//! `seed_from_u64(seed)`. Independent tasks use distinct stream numbers and
//! may jump to any 64-bit word of their stream, so results never depend on
//! how work is split across threads.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::exactgeom::Q2;
use crate::models::{Cell, ChoiceA, ChoiceB, JointDist, OutcomeA, OutcomeB, StochasticModel};
use crate::verdict::{Verdict, Witness};

/// Pinned in every report that depends on sampled values.
pub const GENERATOR: &str = "ChaCha20Rng (rand_chacha 0.3), key=seed_from_u64(seed), stream-per-task, 64-bit word addressing";

/// Trials per independent stream in [`estimate`].
pub const CHUNK: u64 = 8192;

/// Generator positioned at 64-bit word `word` of stream `stream`.
pub fn stream_rng(seed: u64, stream: u64, word: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * word as u128);
    rng
}

/// Inverse-CDF sampler over exact probabilities.
///
/// Thresholds are `⌊F_i · 2^64⌋` for the exact cumulative sums `F_i`, so a
/// uniform 64-bit draw selects item `i` with probability within `2^-64` of
/// its exact value. Zero-probability items are dropped before the cumulative
/// sums are formed and can never be drawn.
#[derive(Clone, Debug)]
pub struct CdfSampler<T> {
    items: Vec<(T, u128)>,
}

impl<T> CdfSampler<T> {
    pub fn new<'a, I: IntoIterator<Item = (T, &'a Q2)>>(entries: I) -> CdfSampler<T> {
        let mut cum = Q2::zero();
        let mut items = Vec::new();
        for (item, p) in entries {
            if p.is_zero() {
                continue;
            }
            cum = &cum + p;
            let t: BigInt = cum.floor_scaled(64);
            items.push((item, t.to_u128().unwrap_or(u128::MAX)));
        }
        assert!(!items.is_empty(), "sampler needs positive mass");
        CdfSampler { items }
    }

    pub fn sample(&self, u: u64) -> &T {
        let u = u as u128;
        let i = self.items.iter().position(|(_, t)| u < *t).unwrap_or(self.items.len() - 1);
        &self.items[i].0
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// One run of the experiment.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TrialRecord {
    pub a: usize,
    pub b: usize,
    pub lambda_label: String,
    pub oa: String,
    pub ob: u8,
}

/// Precomputed samplers for one `(a, b)` of a model.
pub struct ModelSampler<'m> {
    model: &'m StochasticModel,
    a: ChoiceA,
    b: ChoiceB,
    lambda: CdfSampler<usize>,
    per_lambda: Vec<CdfSampler<Cell>>,
}

impl<'m> ModelSampler<'m> {
    pub fn new(model: &'m StochasticModel, a: ChoiceA, b: ChoiceB) -> crate::Result<Self> {
        let ia = model.domain.pos_a(a).ok_or_else(|| crate::Error::ChoiceOutOfRange(format!("a={}", a.0)))?;
        let ib = model.domain.pos_b(b).ok_or_else(|| crate::Error::ChoiceOutOfRange(format!("b={}", b.0)))?;
        let lambda = CdfSampler::new(model.lambdas.iter().enumerate().map(|(i, l)| (i, &l.weight)));
        let per_lambda = (0..model.num_lambdas()).map(|l| CdfSampler::new(model.at(l, ia, ib).support())).collect();
        Ok(ModelSampler { model, a, b, lambda, per_lambda })
    }

    /// Draws `λ` from the prior, then the outcome pair from its conditional.
    pub fn draw<R: RngCore>(&self, rng: &mut R) -> (usize, Cell) {
        let l = *self.lambda.sample(rng.next_u64());
        (l, *self.per_lambda[l].sample(rng.next_u64()))
    }

    pub fn trial<R: RngCore>(&self, rng: &mut R) -> TrialRecord {
        let (l, c) = self.draw(rng);
        TrialRecord {
            a: self.a.0,
            b: self.b.0,
            lambda_label: self.model.lambdas[l].label.clone(),
            oa: c.oa.to_string(),
            ob: c.ob.bit(),
        }
    }
}

pub fn sample_trial<R: RngCore>(model: &StochasticModel, a: ChoiceA, b: ChoiceB, rng: &mut R) -> crate::Result<TrialRecord> {
    Ok(ModelSampler::new(model, a, b)?.trial(rng))
}

/// Outcome counts over `n` trials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EmpiricalDist {
    pub counts: [u64; 16],
    pub n: u64,
}

impl EmpiricalDist {
    pub fn empty() -> EmpiricalDist {
        EmpiricalDist { counts: [0; 16], n: 0 }
    }

    pub fn record(&mut self, cell: Cell) {
        self.counts[cell.index()] += 1;
        self.n += 1;
    }

    pub fn merge(&mut self, other: &EmpiricalDist) {
        for (l, r) in self.counts.iter_mut().zip(other.counts.iter()) {
            *l += r;
        }
        self.n += other.n;
    }

    pub fn count(&self, cell: Cell) -> u64 {
        self.counts[cell.index()]
    }

    pub fn frequency(&self, cell: Cell) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.count(cell) as f64 / self.n as f64
        }
    }

    /// Empirical marginal of `O_B`.
    pub fn frequency_b(&self, ob: OutcomeB) -> f64 {
        let c: u64 = OutcomeA::all().map(|oa| self.count(Cell::new(oa, ob))).sum();
        c as f64 / self.n.max(1) as f64
    }
}

impl Serialize for EmpiricalDist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let counts: std::collections::BTreeMap<String, u64> =
            Cell::all().filter(|&c| self.count(c) > 0).map(|c| (c.to_string(), self.count(c))).collect();
        let mut st = s.serialize_struct("EmpiricalDist", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("counts", &counts)?;
        st.end()
    }
}

fn run_chunks<F>(n: u64, threads: usize, f: F) -> EmpiricalDist
where
    F: Fn(u64, u64) -> EmpiricalDist + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool");
    let parts: Vec<EmpiricalDist> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                f(c, (n - start).min(CHUNK))
            })
            .collect()
    });
    let mut out = EmpiricalDist::empty();
    for p in &parts {
        out.merge(p);
    }
    out
}

/// `n` trials at `(a, b)`; chunk `c` of [`CHUNK`] trials reads stream `c`.
pub fn estimate(model: &StochasticModel, a: ChoiceA, b: ChoiceB, n: u64, seed: u64, threads: usize) -> crate::Result<EmpiricalDist> {
    assert!(n >= 1, "need at least one trial");
    let sampler = ModelSampler::new(model, a, b)?;
    Ok(run_chunks(n, threads, |chunk, len| {
        let mut rng = stream_rng(seed, chunk, 0);
        let mut e = EmpiricalDist::empty();
        for _ in 0..len {
            e.record(sampler.draw(&mut rng).1);
        }
        e
    }))
}

/// `n` trials of a converted model at domain positions `(ia, ib)`, each
/// with a fresh `λ′` (trial `t` uses draw `t`).
pub fn estimate_converted(
    cm: &crate::theorems::ConvertedModel<'_>,
    ia: usize,
    ib: usize,
    n: u64,
    threads: usize,
) -> EmpiricalDist {
    assert!(n >= 1, "need at least one trial");
    run_chunks(n, threads, |chunk, len| {
        let mut e = EmpiricalDist::empty();
        for t in chunk * CHUNK..chunk * CHUNK + len {
            let (oa, ob) = cm.theta_lazy(t, ia, ib);
            e.record(Cell::new(oa, ob));
        }
        e
    })
}

/// Writes the trials behind [`estimate`] as JSON lines, in trial order.
pub fn write_trial_log<W: Write>(
    model: &StochasticModel,
    a: ChoiceA,
    b: ChoiceB,
    n: u64,
    seed: u64,
    out: &mut W,
) -> crate::Result<()> {
    let sampler = ModelSampler::new(model, a, b)?;
    let mut chunk = 0;
    let mut left = n;
    while left > 0 {
        let mut rng = stream_rng(seed, chunk, 0);
        for _ in 0..left.min(CHUNK) {
            writeln!(out, "{}", serde_json::to_string(&sampler.trial(&mut rng))?)?;
        }
        left -= left.min(CHUNK);
        chunk += 1;
    }
    Ok(())
}

/// Trial log for [`estimate_converted`]; the label names the draw and its
/// base atom.
pub fn write_converted_trial_log<W: Write>(
    cm: &crate::theorems::ConvertedModel<'_>,
    ia: usize,
    ib: usize,
    n: u64,
    out: &mut W,
) -> crate::Result<()> {
    let (a, b) = (cm.base.domain.a[ia], cm.base.domain.b[ib]);
    for t in 0..n {
        let (oa, ob) = cm.theta_lazy(t, ia, ib);
        let rec = TrialRecord {
            a: a.0,
            b: b.0,
            lambda_label: format!("{}#{}", cm.base.lambdas[cm.draw_lambda(t)].label, t),
            oa: oa.to_string(),
            ob: ob.bit(),
        };
        writeln!(out, "{}", serde_json::to_string(&rec)?)?;
    }
    Ok(())
}

/// Passes when every cell's frequency is within `tolerance` of the exact
/// probability; the witness names the worst cell.
pub fn compare(emp: &EmpiricalDist, exact: &JointDist, tolerance: f64) -> Verdict {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let (worst, dev) = Cell::all()
        .map(|c| (c, (emp.frequency(c) - exact.get(c).to_f64()).abs()))
        .fold((Cell::from_index(0), -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let checked = 16;
    if dev <= tolerance {
        return Verdict::pass("empirical", checked);
    }
    let w = Witness { detail: format!("frequency deviates by more than {tolerance}"), ..Witness::default() }
        .cell(worst)
        .value("empirical", format!("{:.6}", emp.frequency(worst)))
        .value("exact", exact.get(worst))
        .value("deviation", format!("{dev:.6}"));
    Verdict::fail("empirical", checked, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{builtin_model, qm_joint, Domain, QM_DATA};
    use crate::theorems::convert_given_in_advance;

    fn q(s: &str) -> Q2 {
        s.parse().unwrap()
    }

    fn cell(s: &str) -> Cell {
        s.parse().unwrap()
    }

    #[test]
    fn sampler_thresholds_split_the_unit_interval() {
        let (a, b, c) = (q("1/3"), q("0"), q("2/3"));
        let s = CdfSampler::new([(0, &a), (1, &b), (2, &c)]);
        assert_eq!(s.len(), 2);
        assert_eq!(*s.sample(0), 0);
        // ⌊2^64 / 3⌋ = (2^64 − 1) / 3 is the first draw past the cut.
        assert_eq!(*s.sample(u64::MAX / 3 - 1), 0);
        assert_eq!(*s.sample(u64::MAX / 3), 2);
        assert_eq!(*s.sample(u64::MAX), 2);
        // An irrational split: 1/2 − √2/4 ≈ 0.1464.
        let (p, r) = (q("1/2-1/4*sqrt2"), q("1/2+1/4*sqrt2"));
        let s = CdfSampler::new([(0, &p), (1, &r)]);
        let cut = (0.5 - 2f64.sqrt() / 4.0) * 2f64.powi(64);
        assert_eq!(*s.sample((cut * 0.999) as u64), 0);
        assert_eq!(*s.sample((cut * 1.001) as u64), 1);
    }

    #[test]
    fn point_mass_always_returns_its_outcome() {
        let d = crate::models::DeterministicModel::from_fn(
            "pm",
            StochasticModel::single_atom(),
            Domain { a: vec![ChoiceA(0)], b: vec![ChoiceB(0)] },
            |_, _, _| (OutcomeA::zero_at(1), OutcomeB::ZERO),
        )
        .unwrap()
        .to_stochastic();
        for seed in 0..20 {
            let mut rng = stream_rng(seed, 0, 0);
            let t = sample_trial(&d, ChoiceA(0), ChoiceB(0), &mut rng).unwrap();
            assert_eq!((t.oa.as_str(), t.ob), ("101", 0));
        }
    }

    #[test]
    fn zero_cells_never_sampled_at_w_equal_x() {
        let m = builtin_model(QM_DATA).unwrap();
        let exact = qm_joint(ChoiceA(0), ChoiceB(0)).unwrap();
        let sampler = ModelSampler::new(&m, ChoiceA(0), ChoiceB(0)).unwrap();
        let mut rng = stream_rng(3, 0, 0);
        for _ in 0..20_000 {
            let (_, c) = sampler.draw(&mut rng);
            assert!(!exact.get(c).is_zero(), "sampled impossible cell {c}");
            assert!([cell("011,0"), cell("101,1"), cell("110,1")].contains(&c));
        }
    }

    #[test]
    fn same_seed_same_trial() {
        let m = builtin_model(QM_DATA).unwrap();
        let t1 = sample_trial(&m, ChoiceA(2), ChoiceB(9), &mut stream_rng(42, 0, 0)).unwrap();
        let t2 = sample_trial(&m, ChoiceA(2), ChoiceB(9), &mut stream_rng(42, 0, 0)).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn estimate_is_deterministic_across_thread_counts() {
        let m = builtin_model(QM_DATA).unwrap();
        let e1 = estimate(&m, ChoiceA(5), ChoiceB(20), 20_000, 42, 1).unwrap();
        let e4 = estimate(&m, ChoiceA(5), ChoiceB(20), 20_000, 42, 4).unwrap();
        assert_eq!(e1, e4);
        assert_eq!(e1.n, 20_000);
        assert_eq!(e1.counts.iter().sum::<u64>(), 20_000);
        let single = estimate(&m, ChoiceA(5), ChoiceB(20), 1, 42, 1).unwrap();
        assert_eq!(single.n, 1);
        assert_eq!(single.counts.iter().filter(|&&c| c == 1).count(), 1);
    }

    #[test]
    fn compare_examples() {
        let exact = qm_joint(ChoiceA(0), ChoiceB(3)).unwrap();
        // Counts that are exactly n·p.
        let mut emp = EmpiricalDist::empty();
        for (c, p) in exact.support() {
            let k = (p.to_f64() * 6000.0).round() as u64;
            emp.counts[c.index()] = k;
            emp.n += k;
        }
        assert!(compare(&emp, &exact, 1e-9).pass);
        let zero = EmpiricalDist { counts: [0; 16], n: 10 };
        let at_x = qm_joint(ChoiceA(0), ChoiceB(0)).unwrap();
        let v = compare(&zero, &at_x, 0.01);
        assert!(!v.pass);
        assert_eq!(v.witness.unwrap().values["exact"], "1/3");
    }

    #[test]
    fn converted_estimate_matches_table() {
        let m = builtin_model(QM_DATA).unwrap();
        let cm = convert_given_in_advance(&m, 42);
        let e = estimate_converted(&cm, 0, 4, 20_000, 2);
        assert_eq!(e, estimate_converted(&cm, 0, 4, 20_000, 1));
        let exact = qm_joint(ChoiceA(0), ChoiceB(4)).unwrap();
        assert!(compare(&e, &exact, 0.02).pass);
    }
}
