use serde::Serialize;

use super::least_squares;
use crate::diagram::SpaceTimeDiagram;
use crate::eca::evolve;
use crate::error::{Error, Result};
use crate::generation::Generation;
use crate::rule::RuleTable;

#[derive(Clone, Debug, Serialize)]
pub struct DamageReport {
    pub flip_index: usize,
    #[serde(skip)]
    pub difference: SpaceTimeDiagram,
    /// Leftmost differing cell per row, `None` where the twins agree.
    pub left_frontier: Vec<Option<usize>>,
    pub right_frontier: Vec<Option<usize>>,
    /// Leftward spreading speed (cells per step), fitted over the last half of the rows.
    pub lambda_left: f64,
    /// Rightward spreading speed, fitted over all rows.
    pub lambda_right: f64,
}

/// Evolves `init` and a copy with cell `flip_index` inverted, and measures
/// how fast the region where they differ grows on each side.
pub fn damage_spreading(rule: &RuleTable, init: &Generation, flip_index: usize, steps: usize) -> Result<DamageReport> {
    if flip_index >= init.width() {
        return Err(Error::InvalidArgument(format!(
            "flip index {flip_index} outside a row of width {}",
            init.width()
        )));
    }
    let mut twin = init.clone();
    twin.toggle(flip_index);
    let (a, b) = rayon::join(|| evolve(init, rule, steps), || evolve(&twin, rule, steps));
    let difference = a.difference(&b)?;

    let width = init.width();
    let mut left_frontier = Vec::with_capacity(steps + 1);
    let mut right_frontier = Vec::with_capacity(steps + 1);
    for (t, row) in difference.rows().iter().enumerate() {
        let mut live = row.live_indices();
        let lo = live.next();
        let hi = live.last().or(lo);
        if t > 0 && (lo == Some(0) || hi == Some(width - 1)) {
            return Err(Error::LatticeTooNarrow(format!(
                "damage reached the lattice edge at step {t}; use a width above {}",
                2 * steps + 1
            )));
        }
        left_frontier.push(lo);
        right_frontier.push(hi);
    }

    let fit = |frontier: &[Option<usize>], from: usize, sign: f64| -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = frontier
            .iter()
            .enumerate()
            .skip(from)
            .filter_map(|(t, p)| p.map(|p| (t as f64, sign * (p as f64 - flip_index as f64))))
            .unzip();
        least_squares(&x, &y).0
    };
    let lambda_right = fit(&right_frontier, 0, 1.0);
    let lambda_left = fit(&left_frontier, steps.div_ceil(2), -1.0);

    Ok(DamageReport {
        flip_index,
        difference,
        left_frontier,
        right_frontier,
        lambda_left,
        lambda_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::{single_seed, Boundary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_row(width: usize, seed: u64) -> Generation {
        Generation::random(width, Boundary::FixedDead, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn rule30_spreads_right_at_light_speed() {
        let init = random_row(1001, 17);
        let r = damage_spreading(&RuleTable::new(30), &init, 500, 400).unwrap();
        assert!((r.lambda_right - 1.0).abs() < 0.05, "{}", r.lambda_right);
        assert!((r.lambda_left - 0.24).abs() < 0.06, "{}", r.lambda_left);
        assert_eq!(r.difference.row(0).count_live(), 1);
        assert!(r.difference.row(0).get(500));
    }

    #[test]
    fn identity_rule_does_not_spread() {
        let init = random_row(101, 4);
        let r = damage_spreading(&RuleTable::new(204), &init, 50, 40).unwrap();
        assert!(r.difference.rows().iter().all(|row| row.count_live() == 1 && row.get(50)));
        assert_eq!(r.lambda_left, 0.0);
        assert_eq!(r.lambda_right, 0.0);
    }

    #[test]
    fn rule90_damage_is_a_shifted_sierpinski_cone() {
        let width = 301;
        let steps = 120;
        let flip = 140;
        let init = random_row(width, 99);
        let r = damage_spreading(&RuleTable::new(90), &init, flip, steps).unwrap();
        let cone = evolve(&single_seed(width, Boundary::FixedDead), &RuleTable::new(90), steps);
        let shift = width / 2 - flip;
        for t in 0..=steps {
            for i in 0..width {
                let expected = i + shift < width && cone.get(t, i + shift);
                assert_eq!(r.difference.get(t, i), expected, "t={t} i={i}");
            }
        }
    }

    #[test]
    fn frontier_at_edge_is_an_error() {
        let init = random_row(101, 1);
        assert!(matches!(
            damage_spreading(&RuleTable::new(30), &init, 50, 80),
            Err(Error::LatticeTooNarrow(_))
        ));
        assert!(damage_spreading(&RuleTable::new(30), &init, 101, 10).is_err());
    }

    #[test]
    fn frontiers_absent_when_damage_heals() {
        // rule 0 wipes out the difference after one step
        let init = random_row(51, 2);
        let r = damage_spreading(&RuleTable::new(0), &init, 25, 5).unwrap();
        assert_eq!(r.left_frontier[0], Some(25));
        assert!(r.left_frontier[1..].iter().all(Option::is_none));
        assert_eq!(r.lambda_right, 0.0);
    }
}
