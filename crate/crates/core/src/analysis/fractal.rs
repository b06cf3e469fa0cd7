use serde::{Deserialize, Serialize};

use super::least_squares;
use crate::diagram::SpaceTimeDiagram;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractalReport {
    pub box_sizes: Vec<usize>,
    pub counts: Vec<usize>,
    /// Slope of `ln count` against `ln(1/size)`.
    pub dimension: f64,
    pub fit_r2: f64,
}

/// `1, 2, 4, …` up to and including `max` (rounded down to a power of two).
pub fn power_of_two_sizes(max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |s| s.checked_mul(2))
        .take_while(|&s| s <= max.max(1))
        .collect()
}

/// Box-counting estimate over the live cells of the whole diagram
/// (initial row included). Boxes are `size × size`, anchored at `(0, 0)`.
pub fn box_counting_dimension(d: &SpaceTimeDiagram, sizes: &[usize]) -> Result<FractalReport> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no box sizes given".into()));
    }
    if let Some(s) = sizes.iter().find(|s| !s.is_power_of_two()) {
        return Err(Error::InvalidArgument(format!("box size {s} is not a power of two")));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("box sizes must be strictly increasing".into()));
    }
    if d.count_live() == 0 {
        return Err(Error::Precondition("diagram has no live cells".into()));
    }

    let cols = d.width();
    let counts: Vec<usize> = sizes
        .iter()
        .map(|&s| {
            let box_cols = cols.div_ceil(s);
            let mut occupied = vec![false; box_cols];
            let mut total = 0;
            for band in d.rows().chunks(s) {
                occupied.iter_mut().for_each(|o| *o = false);
                for row in band {
                    for i in row.live_indices() {
                        occupied[i / s] = true;
                    }
                }
                total += occupied.iter().filter(|&&o| o).count();
            }
            total
        })
        .collect();

    let x: Vec<f64> = sizes.iter().map(|&s| -(s as f64).ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (dimension, _, fit_r2) = least_squares(&x, &y);
    Ok(FractalReport {
        box_sizes: sizes.to_vec(),
        counts,
        dimension,
        fit_r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eca::evolve;
    use crate::generation::{single_seed, Boundary, Generation};
    use crate::rule::RuleTable;

    fn sierpinski(steps: usize) -> SpaceTimeDiagram {
        evolve(&single_seed(2 * steps + 1, Boundary::FixedDead), &RuleTable::new(90), steps)
    }

    #[test]
    fn point_and_plane() {
        let point = evolve(&single_seed(9, Boundary::FixedDead), &RuleTable::new(90), 0);
        let r = box_counting_dimension(&point, &[1, 2, 4, 8]).unwrap();
        assert_eq!(r.counts, vec![1; 4]);
        assert!(r.dimension.abs() < 1e-12);

        let plane = evolve(&Generation::live(64, Boundary::Periodic), &RuleTable::new(255), 63);
        let r = box_counting_dimension(&plane, &power_of_two_sizes(32)).unwrap();
        assert!((r.dimension - 2.0).abs() < 1e-9, "{}", r.dimension);
        assert!(r.counts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rule90_counts_triple_per_doubling() {
        let r = box_counting_dimension(&sierpinski(256), &power_of_two_sizes(128)).unwrap();
        assert!(r.counts.windows(2).all(|w| w[0] >= w[1]));
        // rows 0..255 of Pascal's triangle mod 2 hold 3^8 odd entries, row 256 adds two
        assert_eq!(r.counts[0], 6561 + 2);
        // away from the lattice scale and the diagram size, each halving of resolution divides the count by 3
        for w in r.counts[2..6].windows(2) {
            let ratio = w[0] as f64 / w[1] as f64;
            assert!((ratio - 3.0).abs() < 0.15, "{r:?}");
        }
        assert!(r.fit_r2 > 0.99);
    }

    #[test]
    fn converges_toward_log3_log2() {
        let target = 3f64.ln() / 2f64.ln();
        let small = box_counting_dimension(&sierpinski(64), &power_of_two_sizes(32)).unwrap();
        let large = box_counting_dimension(&sierpinski(512), &power_of_two_sizes(256)).unwrap();
        assert!((large.dimension - target).abs() < (small.dimension - target).abs(), "{small:?} {large:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let d = sierpinski(8);
        assert!(box_counting_dimension(&d, &[1, 3]).is_err());
        assert!(box_counting_dimension(&d, &[2, 1]).is_err());
        assert!(box_counting_dimension(&d, &[]).is_err());
        let empty = evolve(&Generation::dead(8, Boundary::FixedDead), &RuleTable::new(90), 4);
        assert!(matches!(box_counting_dimension(&empty, &[1, 2]), Err(Error::Precondition(_))));
    }
}
