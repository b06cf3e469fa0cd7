//! Wolfram-numbered truth tables for the 3-cell neighborhood.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neighborhood code `n = 4·left + 2·center + right`.
#[inline]
pub fn neighborhood(left: bool, center: bool, right: bool) -> usize {
    (left as usize) << 2 | (center as usize) << 1 | right as usize
}

/// Cell triple `(left, center, right)` for a neighborhood code.
#[inline]
pub fn neighborhood_cells(n: usize) -> (bool, bool, bool) {
    (n & 4 != 0, n & 2 != 0, n & 1 != 0)
}

/// An elementary CA rule: `outputs[n]` is bit `n` of the Wolfram number.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct RuleTable {
    outputs: [bool; 8],
}

impl RuleTable {
    pub fn from_number(n: i64) -> Result<Self> {
        let n = u8::try_from(n).map_err(|_| Error::RuleOutOfRange(n))?;
        Ok(Self::new(n))
    }

    pub const fn new(n: u8) -> Self {
        let mut outputs = [false; 8];
        let mut k = 0;
        while k < 8 {
            outputs[k] = (n >> k) & 1 == 1;
            k += 1;
        }
        Self { outputs }
    }

    pub fn from_outputs(outputs: [bool; 8]) -> Self {
        Self { outputs }
    }

    pub fn number(&self) -> u8 {
        self.outputs
            .iter()
            .enumerate()
            .fold(0u8, |acc, (k, &o)| acc | (o as u8) << k)
    }

    pub fn outputs(&self) -> &[bool; 8] {
        &self.outputs
    }

    #[inline]
    pub fn output(&self, n: usize) -> bool {
        self.outputs[n]
    }

    #[inline]
    pub fn apply(&self, left: bool, center: bool, right: bool) -> bool {
        self.outputs[neighborhood(left, center, right)]
    }

    /// Left-right mirror image (swaps the roles of the two neighbors).
    pub fn mirrored(&self) -> Self {
        let mut outputs = [false; 8];
        for (n, out) in outputs.iter_mut().enumerate() {
            let (l, c, r) = neighborhood_cells(n);
            *out = self.apply(r, c, l);
        }
        Self { outputs }
    }

    /// Outputs listed from neighborhood 111 down to 000, the order truth tables are usually drawn in.
    pub fn outputs_descending(&self) -> [u8; 8] {
        let mut out = [0u8; 8];
        for (slot, n) in out.iter_mut().zip((0..8).rev()) {
            *slot = self.outputs[n] as u8;
        }
        out
    }
}

impl fmt::Debug for RuleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rule({})", self.number())
    }
}

impl fmt::Display for RuleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}", self.number())
    }
}

impl TryFrom<i64> for RuleTable {
    type Error = Error;

    fn try_from(n: i64) -> Result<Self> {
        Self::from_number(n)
    }
}

impl From<RuleTable> for u8 {
    fn from(r: RuleTable) -> u8 {
        r.number()
    }
}

/// Shorthand for [`RuleTable::from_number`].
pub fn rule_from_number(n: i64) -> Result<RuleTable> {
    RuleTable::from_number(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_tables_of_demonstrated_rules() {
        assert_eq!(RuleTable::new(90).outputs_descending(), [0, 1, 0, 1, 1, 0, 1, 0]);
        assert_eq!(RuleTable::new(30).outputs_descending(), [0, 0, 0, 1, 1, 1, 1, 0]);
        assert_eq!(RuleTable::new(54).outputs_descending(), [0, 0, 1, 1, 0, 1, 1, 0]);
        assert_eq!(RuleTable::new(0).outputs_descending(), [0; 8]);
    }

    #[test]
    fn round_trip_all_rules() {
        for n in 0..=255u8 {
            let r = RuleTable::new(n);
            assert_eq!(r.number(), n);
            for k in 0..8 {
                assert_eq!(r.output(k), (n >> k) & 1 == 1);
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(rule_from_number(256), Err(Error::RuleOutOfRange(256))));
        assert!(matches!(rule_from_number(-1), Err(Error::RuleOutOfRange(-1))));
        assert_eq!(rule_from_number(255).unwrap().number(), 255);
    }

    #[test]
    fn mirror() {
        // 30 and 86 are mirror images; 90 and 54 are symmetric
        assert_eq!(RuleTable::new(30).mirrored().number(), 86);
        assert_eq!(RuleTable::new(90).mirrored().number(), 90);
        assert_eq!(RuleTable::new(54).mirrored().number(), 54);
        assert_eq!(RuleTable::new(110).mirrored().number(), 124);
        for n in 0..=255u8 {
            assert_eq!(RuleTable::new(n).mirrored().mirrored().number(), n);
        }
    }
}
