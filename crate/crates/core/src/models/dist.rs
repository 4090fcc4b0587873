use std::fmt;

use crate::exactgeom::Q2;
use crate::models::outcome::{Cell, OutcomeA, OutcomeB, NUM_CELLS};

/// Exact probabilities on the 16 outcome pairs `{000..111} × {0,1}`.
///
/// Construction does not enforce normalization; see [`JointDist::defect`].
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct JointDist {
    cells: [Q2; NUM_CELLS],
}

/// Marginal of A's outcome, indexed by [`OutcomeA::bits`].
pub type MarginalA = [Q2; 8];
/// Marginal of B's outcome, indexed by [`OutcomeB::bit`].
pub type MarginalB = [Q2; 2];

impl JointDist {
    pub fn zero() -> JointDist {
        JointDist::default()
    }

    pub fn point_mass(cell: Cell) -> JointDist {
        let mut d = JointDist::zero();
        d.set(cell, Q2::one());
        d
    }

    pub fn from_cells<I: IntoIterator<Item = (Cell, Q2)>>(entries: I) -> JointDist {
        let mut d = JointDist::zero();
        for (c, p) in entries {
            d.set(c, p);
        }
        d
    }

    /// Product of the two marginals.
    pub fn product(ma: &MarginalA, mb: &MarginalB) -> JointDist {
        JointDist::from_cells(Cell::all().map(|c| (c, &ma[c.oa.bits() as usize] * &mb[c.ob.bit() as usize])))
    }

    pub fn get(&self, cell: Cell) -> &Q2 {
        &self.cells[cell.index()]
    }

    pub fn p(&self, oa: OutcomeA, ob: OutcomeB) -> &Q2 {
        self.get(Cell::new(oa, ob))
    }

    pub fn set(&mut self, cell: Cell, p: Q2) {
        self.cells[cell.index()] = p;
    }

    /// Nonzero cells in cell order.
    pub fn support(&self) -> impl Iterator<Item = (Cell, &Q2)> {
        Cell::all().map(move |c| (c, self.get(c))).filter(|(_, p)| !p.is_zero())
    }

    pub fn total(&self) -> Q2 {
        self.cells.iter().sum()
    }

    pub fn marginal_a(&self) -> MarginalA {
        std::array::from_fn(|oa| &self.cells[2 * oa] + &self.cells[2 * oa + 1])
    }

    pub fn marginal_b(&self) -> MarginalB {
        std::array::from_fn(|ob| (0..8).map(|oa| &self.cells[2 * oa + ob]).sum())
    }

    /// The single supporting cell, if this is a point mass.
    pub fn as_point_mass(&self) -> Option<Cell> {
        let mut support = self.support();
        let (cell, p) = support.next()?;
        (support.next().is_none() && *p == Q2::one()).then_some(cell)
    }

    /// First reason this is not a probability distribution: a negative cell
    /// (in cell order) or a total different from one.
    pub fn defect(&self) -> Option<DistDefect> {
        if let Some(c) = Cell::all().find(|&c| self.get(c).is_negative()) {
            return Some(DistDefect::Negative(c, self.get(c).clone()));
        }
        let total = self.total();
        (total != Q2::one()).then_some(DistDefect::Total(total))
    }

    pub fn scaled(&self, w: &Q2) -> JointDist {
        JointDist { cells: self.cells.clone().map(|p| &p * w) }
    }

    pub fn add_assign(&mut self, other: &JointDist) {
        for (l, r) in self.cells.iter_mut().zip(other.cells.iter()) {
            *l = &*l + r;
        }
    }

    /// Cells in `"011,0"` notation with nonzero probability, as model files
    /// write them.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> =
            self.support().map(|(c, p)| (c.to_string(), serde_json::Value::String(p.to_string()))).collect();
        serde_json::Value::Object(map)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DistDefect {
    Negative(Cell, Q2),
    Total(Q2),
}

impl fmt::Display for DistDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistDefect::Negative(c, p) => write!(f, "negative probability {p} at cell {c}"),
            DistDefect::Total(t) => write!(f, "probabilities sum to {t}, not 1"),
        }
    }
}

pub fn marginal_a(d: &JointDist) -> MarginalA {
    d.marginal_a()
}

pub fn marginal_b(d: &JointDist) -> MarginalB {
    d.marginal_b()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(s: &str) -> Cell {
        s.parse().unwrap()
    }

    #[test]
    fn point_mass_marginals() {
        let d = JointDist::point_mass(cell("011,0"));
        assert_eq!(d.marginal_b(), [Q2::one(), Q2::zero()]);
        let ma = d.marginal_a();
        assert_eq!(ma[0b011], Q2::one());
        assert_eq!(ma.iter().filter(|p| p.is_zero()).count(), 7);
        assert_eq!(d.as_point_mass(), Some(cell("011,0")));
        assert!(d.defect().is_none());
    }

    #[test]
    fn defects_are_reported() {
        let third = Q2::from_ratios(1, 3, 0, 1);
        let half = Q2::from_ratios(1, 2, 0, 1);
        let short = JointDist::from_cells([(cell("011,0"), third.clone()), (cell("101,1"), half.clone())]);
        assert_eq!(short.defect(), Some(DistDefect::Total(Q2::from_ratios(5, 6, 0, 1))));
        let neg = JointDist::from_cells([
            (cell("011,0"), Q2::from_ratios(-1, 6, 0, 1)),
            (cell("101,1"), Q2::from_ratios(7, 6, 0, 1)),
        ]);
        assert!(matches!(neg.defect(), Some(DistDefect::Negative(c, _)) if c == cell("011,0")));
    }

    #[test]
    fn product_factorizes() {
        let mut ma: MarginalA = Default::default();
        ma[0b011] = Q2::from_ratios(1, 2, 0, 1);
        ma[0b110] = Q2::from_ratios(1, 2, 0, 1);
        let mb = [Q2::from_ratios(1, 3, 0, 1), Q2::from_ratios(2, 3, 0, 1)];
        let d = JointDist::product(&ma, &mb);
        assert_eq!(d.marginal_a(), ma);
        assert_eq!(d.marginal_b(), mb);
        assert_eq!(*d.get(cell("110,1")), Q2::from_ratios(1, 3, 0, 1));
    }
}
