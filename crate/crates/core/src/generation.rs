//! Bit-packed lattice rows.
//!
//! Cell `i` lives in word `i / 64` at bit `i % 64` (little-endian within a
//! word). Bits past `width` in the last word are kept at zero.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WORD_BITS: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// The row is a ring: cell `width-1` neighbors cell `0`.
    Periodic,
    /// Cells outside the row read as dead.
    #[default]
    #[serde(rename = "dead", alias = "fixeddead")]
    FixedDead,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "dead" | "fixeddead" | "fixed-dead" | "fixed_dead" => Ok(Boundary::FixedDead),
            other => Err(Error::InvalidArgument(format!(
                "unknown boundary {other:?} (expected `periodic` or `dead`)"
            ))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::FixedDead => "dead",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Generation {
    width: usize,
    words: Vec<u64>,
    boundary: Boundary,
}

#[inline]
pub(crate) fn words_for(width: usize) -> usize {
    width.div_ceil(WORD_BITS)
}

/// Mask of valid bits in the last word of a row of `width` cells.
#[inline]
pub(crate) fn tail_mask(width: usize) -> u64 {
    match width % WORD_BITS {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

impl Generation {
    /// All-dead row. Panics if `width == 0`.
    pub fn dead(width: usize, boundary: Boundary) -> Self {
        assert!(width >= 1, "generation width must be positive");
        Self {
            width,
            words: vec![0; words_for(width)],
            boundary,
        }
    }

    pub fn try_dead(width: usize, boundary: Boundary) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidArgument("width must be at least 1".into()));
        }
        Ok(Self::dead(width, boundary))
    }

    pub fn live(width: usize, boundary: Boundary) -> Self {
        let mut g = Self::dead(width, boundary);
        g.words.iter_mut().for_each(|w| *w = !0);
        g.clear_padding();
        g
    }

    pub fn from_bits(bits: &[bool], boundary: Boundary) -> Result<Self> {
        let mut g = Self::try_dead(bits.len(), boundary)?;
        for (i, &b) in bits.iter().enumerate() {
            g.set(i, b);
        }
        Ok(g)
    }

    /// Parses a string of `0`/`1` characters; `.`/`#` are accepted as dead/live.
    pub fn parse(s: &str, boundary: Boundary) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' | '.' => Ok(false),
                '1' | '#' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "invalid cell character {other:?} at offset {i}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits, boundary)
    }

    /// Builds a row directly from packed words. Padding bits are cleared.
    pub fn from_words(width: usize, mut words: Vec<u64>, boundary: Boundary) -> Result<Self> {
        if width == 0 || words.len() != words_for(width) {
            return Err(Error::InvalidArgument(format!(
                "{} words cannot hold a row of width {width}",
                words.len()
            )));
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(width);
        }
        Ok(Self {
            width,
            words,
            boundary,
        })
    }

    pub(crate) fn from_words_unchecked(width: usize, words: Vec<u64>, boundary: Boundary) -> Self {
        let mut g = Self {
            width,
            words,
            boundary,
        };
        g.clear_padding();
        g
    }

    /// Uniformly random row.
    pub fn random<R: Rng + ?Sized>(width: usize, boundary: Boundary, rng: &mut R) -> Self {
        let mut g = Self::dead(width, boundary);
        g.words.iter_mut().for_each(|w| *w = rng.random());
        g.clear_padding();
        g
    }

    fn clear_padding(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.width);
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width, "cell {i} out of range for width {}", self.width);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// Neighbor lookup with boundary semantics; `offset` is -1, 0 or +1.
    #[inline]
    pub fn neighbor(&self, i: usize, offset: isize) -> bool {
        let j = i as isize + offset;
        if j >= 0 && (j as usize) < self.width {
            return self.get(j as usize);
        }
        match self.boundary {
            Boundary::FixedDead => false,
            Boundary::Periodic => self.get(j.rem_euclid(self.width as isize) as usize),
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, live: bool) {
        assert!(i < self.width, "cell {i} out of range for width {}", self.width);
        let (w, b) = (i / WORD_BITS, i % WORD_BITS);
        if live {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn toggle(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn count_live(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_dead(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.width).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn live_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * WORD_BITS + b)
            })
        })
    }

    /// Cellwise XOR. Widths must match; the result keeps `self`'s boundary.
    pub fn xor(&self, other: &Generation) -> Generation {
        assert_eq!(self.width, other.width, "xor of rows with different widths");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Generation {
            width: self.width,
            words,
            boundary: self.boundary,
        }
    }

    /// Amplitude encoding of the row: 1.0 for live cells, 0.0 for dead.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.iter().map(|b| if b { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Display for Generation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Generation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Generation[{}, {}]({self})", self.width, self.boundary)
    }
}

/// A row of `width` dead cells with only the center cell `width / 2` live.
pub fn single_seed(width: usize, boundary: Boundary) -> Generation {
    let mut g = Generation::dead(width, boundary);
    g.set(width / 2, true);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_seed_positions() {
        assert_eq!(single_seed(5, Boundary::FixedDead).to_string(), "00100");
        assert_eq!(single_seed(1, Boundary::FixedDead).to_string(), "1");
        let g = single_seed(2001, Boundary::FixedDead);
        assert_eq!(g.count_live(), 1);
        assert!(g.get(1000));
    }

    #[test]
    fn padding_stays_clear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for width in [1, 5, 63, 64, 65, 130] {
            let g = Generation::random(width, Boundary::Periodic, &mut rng);
            assert_eq!(g.words().last().unwrap() & !tail_mask(width), 0);
            let g = Generation::live(width, Boundary::Periodic);
            assert_eq!(g.count_live(), width);
            let g = Generation::from_words(width, vec![!0; words_for(width)], Boundary::Periodic).unwrap();
            assert_eq!(g.count_live(), width);
        }
    }

    #[test]
    fn parse_and_display() {
        let g = Generation::parse("0110#.", Boundary::FixedDead).unwrap();
        assert_eq!(g.to_string(), "011010");
        assert!(Generation::parse("01x", Boundary::FixedDead).is_err());
        assert!(Generation::parse("", Boundary::FixedDead).is_err());
        assert_eq!(g.live_indices().collect::<Vec<_>>(), vec![1, 2, 4]);
    }

    #[test]
    fn neighbors_follow_boundary() {
        let g = Generation::parse("100", Boundary::Periodic).unwrap();
        assert!(g.neighbor(2, 1));
        assert!(!g.neighbor(0, -1));
        let g = g.with_boundary(Boundary::FixedDead);
        assert!(!g.neighbor(2, 1));
        let one = Generation::parse("1", Boundary::Periodic).unwrap();
        assert!(one.neighbor(0, -1) && one.neighbor(0, 1));
    }

    #[test]
    fn boundary_names() {
        assert_eq!("periodic".parse::<Boundary>().unwrap(), Boundary::Periodic);
        assert_eq!("dead".parse::<Boundary>().unwrap(), Boundary::FixedDead);
        assert!("open".parse::<Boundary>().is_err());
    }
}
