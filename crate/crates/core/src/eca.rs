//! Synchronous nearest-neighbor update, scalar and word-parallel.

use crate::diagram::SpaceTimeDiagram;
use crate::generation::{tail_mask, Boundary, Generation, WORD_BITS};
use crate::rule::{neighborhood_cells, RuleTable};

/// Reference update: one truth-table lookup per cell.
pub fn step(g: &Generation, rule: &RuleTable) -> Generation {
    let mut next = Generation::dead(g.width(), g.boundary());
    for i in 0..g.width() {
        if rule.apply(g.neighbor(i, -1), g.get(i), g.neighbor(i, 1)) {
            next.set(i, true);
        }
    }
    next
}

/// Word-level Boolean program equivalent to a rule's truth table.
///
/// Affine rules (XOR of a subset of the neighborhood, optionally inverted)
/// compile to XORs; everything else to a sum of products over whichever of
/// the on-set or off-set is smaller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordProgram {
    Affine {
        left: bool,
        center: bool,
        right: bool,
        invert: bool,
    },
    SumOfProducts {
        minterms: Vec<u8>,
        invert: bool,
    },
}

impl WordProgram {
    pub fn synthesize(rule: &RuleTable) -> Self {
        let f = |n: usize| rule.output(n);
        let invert = f(0);
        let (left, center, right) = (f(4) != invert, f(2) != invert, f(1) != invert);
        let affine = (0..8).all(|n| {
            let (l, c, r) = neighborhood_cells(n);
            f(n) == invert ^ (left & l) ^ (center & c) ^ (right & r)
        });
        if affine {
            return WordProgram::Affine {
                left,
                center,
                right,
                invert,
            };
        }
        let ones = (0..8u8).filter(|&n| f(n as usize)).collect::<Vec<_>>();
        if ones.len() <= 4 {
            WordProgram::SumOfProducts {
                minterms: ones,
                invert: false,
            }
        } else {
            WordProgram::SumOfProducts {
                minterms: (0..8u8).filter(|&n| !f(n as usize)).collect(),
                invert: true,
            }
        }
    }

    #[inline]
    pub fn eval(&self, l: u64, c: u64, r: u64) -> u64 {
        match *self {
            WordProgram::Affine {
                left,
                center,
                right,
                invert,
            } => {
                let mut acc = if invert { !0 } else { 0 };
                if left {
                    acc ^= l;
                }
                if center {
                    acc ^= c;
                }
                if right {
                    acc ^= r;
                }
                acc
            }
            WordProgram::SumOfProducts { ref minterms, invert } => {
                let mut acc = 0;
                for &n in minterms {
                    let pick = |bit: u8, x: u64| if n & bit != 0 { x } else { !x };
                    acc |= pick(4, l) & pick(2, c) & pick(1, r);
                }
                if invert {
                    !acc
                } else {
                    acc
                }
            }
        }
    }
}

/// Word vectors `(L, R)` with `L[i] = x[i-1]` and `R[i] = x[i+1]` under the row's boundary.
fn neighbor_words(g: &Generation) -> (Vec<u64>, Vec<u64>) {
    let x = g.words();
    let n = x.len();
    let width = g.width();
    let mut left = vec![0u64; n];
    let mut right = vec![0u64; n];
    for k in 0..n {
        let carry_in = if k > 0 { x[k - 1] >> (WORD_BITS - 1) } else { 0 };
        left[k] = x[k] << 1 | carry_in;
        let carry_hi = if k + 1 < n { x[k + 1] << (WORD_BITS - 1) } else { 0 };
        right[k] = x[k] >> 1 | carry_hi;
    }
    if g.boundary() == Boundary::Periodic {
        let last = width - 1;
        left[0] |= g.get(last) as u64;
        if g.get(0) {
            right[last / WORD_BITS] |= 1 << (last % WORD_BITS);
        }
    }
    // `left` may have picked up the bit shifted out past `width`.
    left[n - 1] &= tail_mask(width);
    (left, right)
}

/// Word-parallel update; bit-identical to [`step`].
pub fn step_packed(g: &Generation, rule: &RuleTable) -> Generation {
    step_program(g, &WordProgram::synthesize(rule))
}

pub fn step_program(g: &Generation, program: &WordProgram) -> Generation {
    let (left, right) = neighbor_words(g);
    let words = g
        .words()
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(&c, (&l, &r))| program.eval(l, c, r))
        .collect();
    Generation::from_words_unchecked(g.width(), words, g.boundary())
}

/// Runs `steps` updates with the packed stepper; row 0 is `init`.
pub fn evolve(init: &Generation, rule: &RuleTable, steps: usize) -> SpaceTimeDiagram {
    let program = WordProgram::synthesize(rule);
    evolve_with(init, steps, |g| step_program(g, &program))
}

pub fn evolve_with<F>(init: &Generation, steps: usize, mut step: F) -> SpaceTimeDiagram
where
    F: FnMut(&Generation) -> Generation,
{
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(init.clone());
    for _ in 0..steps {
        let next = step(rows.last().unwrap());
        rows.push(next);
    }
    SpaceTimeDiagram::new(rows).expect("rows share the initial width")
}

/// Advances `steps` updates without keeping the history.
pub fn advance(init: &Generation, rule: &RuleTable, steps: usize) -> Generation {
    let program = WordProgram::synthesize(rule);
    (0..steps).fold(init.clone(), |g, _| step_program(&g, &program))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::single_seed;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lookup_oracle(g: &Generation, rule: &RuleTable) -> Vec<bool> {
        let w = g.width() as isize;
        (0..w)
            .map(|i| {
                let at = |j: isize| -> bool {
                    if (0..w).contains(&j) {
                        g.get(j as usize)
                    } else if g.boundary() == Boundary::Periodic {
                        g.get(j.rem_euclid(w) as usize)
                    } else {
                        false
                    }
                };
                let n = 4 * at(i - 1) as usize + 2 * at(i) as usize + at(i + 1) as usize;
                (rule.number() >> n) & 1 == 1
            })
            .collect()
    }

    #[test]
    fn rule90_small_row() {
        let g = Generation::parse("00100", Boundary::FixedDead).unwrap();
        assert_eq!(step(&g, &RuleTable::new(90)).to_string(), "01010");
        assert_eq!(step_packed(&g, &RuleTable::new(90)).to_string(), "01010");
    }

    #[test]
    fn rule90_synthesizes_to_xor() {
        let p = WordProgram::synthesize(&RuleTable::new(90));
        assert_eq!(
            p,
            WordProgram::Affine {
                left: true,
                center: false,
                right: true,
                invert: false
            }
        );
        assert_eq!(p.eval(0b1100, 0xffff, 0b1010), 0b0110);
    }

    #[test]
    fn rule30_matches_lookup_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let rule = RuleTable::new(30);
        for _ in 0..50 {
            let g = Generation::random(8, Boundary::Periodic, &mut rng);
            assert_eq!(step(&g, &rule).to_bits(), lookup_oracle(&g, &rule));
        }
    }

    #[test]
    fn width_one_wraps_onto_itself() {
        let g = Generation::parse("1", Boundary::Periodic).unwrap();
        assert_eq!(step_packed(&g, &RuleTable::new(30)).to_string(), "0");
        assert_eq!(step(&g, &RuleTable::new(30)).to_string(), "0");
        // under dead edges the neighborhood is 010, which rule 30 maps to 1
        let g = g.with_boundary(Boundary::FixedDead);
        assert_eq!(step_packed(&g, &RuleTable::new(30)).to_string(), "1");
    }

    #[test]
    fn zero_rule_kills_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = Generation::random(200, Boundary::Periodic, &mut rng);
        assert!(step_packed(&g, &RuleTable::new(0)).is_dead());
    }

    #[test]
    fn packed_matches_scalar_exhaustively_for_small_widths() {
        for n in 0..=255u8 {
            let rule = RuleTable::new(n);
            for width in 1..=12usize {
                for boundary in [Boundary::Periodic, Boundary::FixedDead] {
                    for state in 0u64..(1 << width) {
                        let g = Generation::from_words(width, vec![state], boundary).unwrap();
                        assert_eq!(step_packed(&g, &rule), step(&g, &rule), "rule {n} width {width} state {state:b}");
                    }
                }
            }
        }
    }

    #[test]
    fn packed_matches_scalar_on_word_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for n in 0..=255u8 {
            let rule = RuleTable::new(n);
            for width in [1, 63, 64, 65, 1000] {
                for boundary in [Boundary::Periodic, Boundary::FixedDead] {
                    for _ in 0..100 {
                        let g = Generation::random(width, boundary, &mut rng);
                        assert_eq!(step_packed(&g, &rule), step(&g, &rule), "rule {n} width {width}");
                    }
                }
            }
        }
    }

    #[test]
    fn evolve_rule90_seed() {
        let d = evolve(&single_seed(5, Boundary::FixedDead), &RuleTable::new(90), 2);
        let rows: Vec<String> = d.rows().iter().map(|r| r.to_string()).collect();
        assert_eq!(rows, ["00100", "01010", "10001"]);
        assert!(d.intensities().is_none());

        let d0 = evolve(&single_seed(5, Boundary::FixedDead), &RuleTable::new(90), 0);
        assert_eq!(d0.steps(), 0);
        assert_eq!(d0.row(0).to_string(), "00100");
    }

    fn binomial_parity(t: usize, k: usize) -> bool {
        // C(t, k) is odd iff k's bits are a subset of t's bits (Lucas)
        k <= t && (k & !t) == 0
    }

    #[test]
    fn rule90_is_pascal_mod_2() {
        let steps = 256;
        let width = 2 * steps + 3;
        let center = width / 2;
        let d = evolve(&single_seed(width, Boundary::FixedDead), &RuleTable::new(90), steps);
        for t in 0..=steps {
            for i in 0..width {
                let off = i as isize - center as isize + t as isize;
                let expect = off >= 0 && off % 2 == 0 && binomial_parity(t, off as usize / 2);
                assert_eq!(d.get(t, i), expect, "t={t} i={i}");
            }
        }
        assert_eq!(d.replay(|g| step(g, &RuleTable::new(90))), Ok(()));
    }

    #[test]
    fn quiescent_rules_fix_the_dead_row() {
        for n in (0..=255u8).filter(|n| n & 1 == 0) {
            let g = Generation::dead(77, Boundary::Periodic);
            assert!(step_packed(&g, &RuleTable::new(n)).is_dead());
        }
    }

    proptest! {
        #[test]
        fn rule90_is_neighbor_xor(bits in proptest::collection::vec(any::<bool>(), 1..300), periodic in any::<bool>()) {
            let boundary = if periodic { Boundary::Periodic } else { Boundary::FixedDead };
            let g = Generation::from_bits(&bits, boundary).unwrap();
            let next = step_packed(&g, &RuleTable::new(90));
            for i in 0..g.width() {
                prop_assert_eq!(next.get(i), g.neighbor(i, -1) ^ g.neighbor(i, 1));
            }
        }

        #[test]
        fn packed_equals_scalar(rule in any::<u8>(), bits in proptest::collection::vec(any::<bool>(), 1..400), periodic in any::<bool>()) {
            let boundary = if periodic { Boundary::Periodic } else { Boundary::FixedDead };
            let g = Generation::from_bits(&bits, boundary).unwrap();
            let rule = RuleTable::new(rule);
            prop_assert_eq!(step_packed(&g, &rule), step(&g, &rule));
        }

        #[test]
        fn evolution_is_deterministic(rule in any::<u8>(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = Generation::random(150, Boundary::Periodic, &mut rng);
            let rule = RuleTable::new(rule);
            prop_assert_eq!(evolve(&g, &rule, 20), evolve(&g, &rule, 20));
        }
    }
}
