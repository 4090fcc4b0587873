use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Index of one of A's bases in the catalogue.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ChoiceA(pub usize);

/// Index of one of B's directions in the catalogue.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ChoiceB(pub usize);

/// A's three-digit outcome. Digit 1 is the most significant bit.
///
/// Any 3-bit string is representable so that models violating SPIN can be
/// ingested and rejected by the checker.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct OutcomeA(u8);

impl OutcomeA {
    /// The outcomes allowed by SPIN, in ascending bit order: 011, 101, 110.
    pub const SPIN: [OutcomeA; 3] = [OutcomeA(0b011), OutcomeA(0b101), OutcomeA(0b110)];

    pub fn from_bits(bits: u8) -> Option<OutcomeA> {
        (bits < 8).then_some(OutcomeA(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Digit at `position` (0 = first digit, paired with basis member x).
    pub fn digit(self, position: usize) -> u8 {
        assert!(position < 3);
        (self.0 >> (2 - position)) & 1
    }

    /// Exactly one zero among the three digits.
    pub fn is_spin(self) -> bool {
        self.0.count_ones() == 2
    }

    /// The SPIN outcome whose single zero sits at `position`.
    pub fn zero_at(position: usize) -> OutcomeA {
        assert!(position < 3);
        OutcomeA(0b111 ^ (1 << (2 - position)))
    }

    pub fn all() -> impl Iterator<Item = OutcomeA> {
        (0..8).map(OutcomeA)
    }
}

impl fmt::Display for OutcomeA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03b}", self.0)
    }
}

impl FromStr for OutcomeA {
    type Err = Error;
    fn from_str(s: &str) -> Result<OutcomeA, Error> {
        if s.len() != 3 || !s.bytes().all(|c| c == b'0' || c == b'1') {
            return Err(Error::InvalidOutcome(s.to_string()));
        }
        Ok(OutcomeA(u8::from_str_radix(s, 2).expect("binary digits")))
    }
}

/// B's single-bit outcome.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct OutcomeB(u8);

impl OutcomeB {
    pub const ZERO: OutcomeB = OutcomeB(0);
    pub const ONE: OutcomeB = OutcomeB(1);
    pub const ALL: [OutcomeB; 2] = [OutcomeB::ZERO, OutcomeB::ONE];

    pub fn from_bit(bit: u8) -> Option<OutcomeB> {
        (bit < 2).then_some(OutcomeB(bit))
    }

    pub fn bit(self) -> u8 {
        self.0
    }
}

impl fmt::Display for OutcomeB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An outcome pair, formatted `"011,0"` as in model files.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Cell {
    pub oa: OutcomeA,
    pub ob: OutcomeB,
}

pub const NUM_CELLS: usize = 16;

impl Cell {
    pub fn new(oa: OutcomeA, ob: OutcomeB) -> Cell {
        Cell { oa, ob }
    }

    pub fn index(self) -> usize {
        (self.oa.0 as usize) * 2 + self.ob.0 as usize
    }

    pub fn from_index(i: usize) -> Cell {
        assert!(i < NUM_CELLS);
        Cell { oa: OutcomeA((i / 2) as u8), ob: OutcomeB((i % 2) as u8) }
    }

    /// All 16 cells, ordered by A's outcome and then B's.
    pub fn all() -> impl Iterator<Item = Cell> {
        (0..NUM_CELLS).map(Cell::from_index)
    }

    /// The six cells of the SPIN outcome space.
    pub fn spin() -> impl Iterator<Item = Cell> {
        OutcomeA::SPIN.into_iter().flat_map(|oa| OutcomeB::ALL.into_iter().map(move |ob| Cell { oa, ob }))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.oa, self.ob)
    }
}

impl FromStr for Cell {
    type Err = Error;
    fn from_str(s: &str) -> Result<Cell, Error> {
        let bad = || Error::InvalidOutcome(s.to_string());
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let oa: OutcomeA = a.trim().parse().map_err(|_| bad())?;
        let ob = match b.trim() {
            "0" => OutcomeB::ZERO,
            "1" => OutcomeB::ONE,
            _ => return Err(bad()),
        };
        Ok(Cell { oa, ob })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_follow_string_order() {
        let o: OutcomeA = "011".parse().unwrap();
        assert_eq!([o.digit(0), o.digit(1), o.digit(2)], [0, 1, 1]);
        assert_eq!(OutcomeA::zero_at(0).to_string(), "011");
        assert_eq!(OutcomeA::zero_at(1).to_string(), "101");
        assert_eq!(OutcomeA::zero_at(2).to_string(), "110");
        assert!(!"111".parse::<OutcomeA>().unwrap().is_spin());
        assert!("0110".parse::<OutcomeA>().is_err());
        assert!("012".parse::<OutcomeA>().is_err());
    }

    #[test]
    fn cell_indexing() {
        for (i, c) in Cell::all().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(c.to_string().parse::<Cell>().unwrap(), c);
        }
        assert_eq!(Cell::spin().count(), 6);
        assert!("110,2".parse::<Cell>().is_err());
    }
}
