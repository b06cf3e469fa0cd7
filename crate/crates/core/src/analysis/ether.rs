//! Periodic background ("ether") detection and removal.

use serde::{Deserialize, Serialize};

use crate::diagram::SpaceTimeDiagram;
use crate::error::{Error, Result};
use crate::generation::{Boundary, Generation};

pub const DEFAULT_MAX_PERIOD: usize = 8;
pub const REQUIRED_COVERAGE: f64 = 0.9;

/// A rectangular space-time tile of the background.
///
/// `tile[r][c]` is the background state at `(anchor_t + r + k·p_t, anchor_x + c + m·p_x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtherTiling {
    pub spatial_period: usize,
    pub temporal_period: usize,
    pub tile: Vec<Vec<bool>>,
    pub anchor_t: usize,
    pub anchor_x: usize,
    /// Fraction of the scored region that agrees with the tiling.
    pub coverage: f64,
}

impl EtherTiling {
    /// The uniform dead background.
    pub fn quiescent() -> Self {
        Self {
            spatial_period: 1,
            temporal_period: 1,
            tile: vec![vec![false]],
            anchor_t: 0,
            anchor_x: 0,
            coverage: 1.0,
        }
    }

    /// Background state at absolute position `(t, x)` under the stored anchor.
    pub fn at(&self, t: usize, x: usize) -> bool {
        let r = (t + self.temporal_period - self.anchor_t % self.temporal_period) % self.temporal_period;
        let c = (x + self.spatial_period - self.anchor_x % self.spatial_period) % self.spatial_period;
        self.tile[r][c]
    }

    /// Background row `t` over `width` cells, tiled from the anchor.
    pub fn row(&self, t: usize, width: usize, boundary: Boundary) -> Generation {
        let bits: Vec<bool> = (0..width).map(|x| self.at(t, x)).collect();
        Generation::from_bits(&bits, boundary).expect("width is positive")
    }

    /// Every distinct way a background row can look: each tile row at each horizontal phase.
    fn row_phases(&self) -> Vec<Vec<bool>> {
        let mut phases: Vec<Vec<bool>> = Vec::new();
        for row in &self.tile {
            for shift in 0..self.spatial_period {
                let p: Vec<bool> = (0..self.spatial_period).map(|c| row[(c + shift) % self.spatial_period]).collect();
                if !phases.contains(&p) {
                    phases.push(p);
                }
            }
        }
        phases
    }
}

/// Scored sub-window: rows from a quarter of the way down, the middle half of the columns.
fn central_region(d: &SpaceTimeDiagram) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let rows = d.steps() + 1;
    let cols = d.width();
    let t = if rows >= 8 { rows / 4..rows } else { 0..rows };
    let x = if cols >= 8 { cols / 4..cols - cols / 4 } else { 0..cols };
    (t, x)
}

/// Exhaustive search over rectangular tilings up to `max_period` in each
/// direction. Each candidate tile is the majority state per residue class;
/// the smallest-area tiling that explains more than 90% of the central
/// region wins (ties: higher coverage, then shorter temporal period).
pub fn detect_ether(d: &SpaceTimeDiagram, max_period: usize) -> Result<EtherTiling> {
    if max_period == 0 {
        return Err(Error::InvalidArgument("max_period must be at least 1".into()));
    }
    let (trange, xrange) = central_region(d);
    let total = (trange.len() * xrange.len()) as f64;
    let mut best: Option<EtherTiling> = None;
    let mut best_coverage = 0.0f64;
    for pt in 1..=max_period {
        for px in 1..=max_period {
            let mut ones = vec![vec![0usize; px]; pt];
            let mut seen = vec![vec![0usize; px]; pt];
            for t in trange.clone() {
                let row = d.row(t);
                let r = (t - trange.start) % pt;
                for x in xrange.clone() {
                    let c = (x - xrange.start) % px;
                    seen[r][c] += 1;
                    ones[r][c] += row.get(x) as usize;
                }
            }
            let mut agree = 0usize;
            let tile: Vec<Vec<bool>> = (0..pt)
                .map(|r| {
                    (0..px)
                        .map(|c| {
                            let live = ones[r][c] * 2 > seen[r][c];
                            agree += if live { ones[r][c] } else { seen[r][c] - ones[r][c] };
                            live
                        })
                        .collect()
                })
                .collect();
            let coverage = agree as f64 / total;
            best_coverage = best_coverage.max(coverage);
            if coverage <= REQUIRED_COVERAGE {
                continue;
            }
            let candidate = EtherTiling {
                spatial_period: px,
                temporal_period: pt,
                tile,
                anchor_t: trange.start,
                anchor_x: xrange.start,
                coverage,
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    let (area, best_area) = (px * pt, b.spatial_period * b.temporal_period);
                    area < best_area
                        || (area == best_area && coverage > b.coverage + 1e-12)
                        || (area == best_area && (coverage - b.coverage).abs() <= 1e-12 && pt < b.temporal_period)
                }
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best.ok_or(Error::NoEther {
        best_coverage,
        required: REQUIRED_COVERAGE,
    })
}

/// Marks every cell that is not explained by the background.
///
/// Alignment is local: a cell counts as background when it lies inside a run
/// of at least two spatial periods that matches one phase of one tile row.
/// This lets the background phase jump across a localized structure; run
/// ends are trimmed by half a period so out-of-phase domains stay separated.
pub fn filter_ether(d: &SpaceTimeDiagram, ether: &EtherTiling) -> SpaceTimeDiagram {
    let phases = ether.row_phases();
    let period = ether.spatial_period;
    let min_run = 2 * period;
    let trim = period / 2;
    let width = d.width();
    let periodic = d.boundary() == Boundary::Periodic;
    let rows = d
        .rows()
        .iter()
        .map(|row| {
            let cells = row.to_bits();
            let mut covered = vec![false; width];
            for phase in &phases {
                for shift in 0..period {
                    mark_matching_runs(&cells, |x| phase[(x + shift) % period], min_run, trim, periodic, &mut covered);
                }
            }
            let defects: Vec<bool> = covered.iter().map(|&c| !c).collect();
            Generation::from_bits(&defects, row.boundary()).expect("width is positive")
        })
        .collect();
    SpaceTimeDiagram::new(rows).expect("shape preserved")
}

/// Sets `covered[x]` for every `x` in a run of agreement between `cells` and
/// `pattern` of length at least `min_run` (runs may wrap on periodic rows).
/// Ends of a run that stop at a mismatch are trimmed by `erode` cells, so two
/// background domains that meet out of phase leave a visible wall.
fn mark_matching_runs<P>(cells: &[bool], pattern: P, min_run: usize, erode: usize, periodic: bool, covered: &mut [bool])
where
    P: Fn(usize) -> bool,
{
    let n = cells.len();
    let matches: Vec<bool> = (0..n).map(|x| cells[x] == pattern(x)).collect();
    if matches.iter().all(|&m| m) {
        covered.iter_mut().for_each(|c| *c = true);
        return;
    }
    // on a ring, start scanning just after a mismatch so no run is split
    let start = if periodic {
        (matches.iter().position(|&m| !m).unwrap() + 1) % n
    } else {
        0
    };
    let mut flush = |run: &[usize], open_start: bool, open_end: bool| {
        let needed = if open_start || open_end { min_run / 2 } else { min_run };
        if run.len() < needed.max(1) {
            return;
        }
        let lo = if open_start { 0 } else { erode };
        let hi = if open_end { run.len() } else { run.len().saturating_sub(erode) };
        for &x in run.iter().take(hi).skip(lo) {
            covered[x] = true;
        }
    };
    let mut run: Vec<usize> = Vec::new();
    let mut run_at_edge = false;
    for k in 0..n {
        let x = (start + k) % n;
        if matches[x] {
            if run.is_empty() {
                run_at_edge = !periodic && x == 0;
            }
            run.push(x);
        } else {
            flush(&run, run_at_edge, false);
            run.clear();
        }
    }
    flush(&run, run_at_edge, !periodic);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eca::evolve;
    use crate::rule::RuleTable;

    fn diagram(rows: &[&str], boundary: Boundary) -> SpaceTimeDiagram {
        SpaceTimeDiagram::new(rows.iter().map(|r| Generation::parse(r, boundary).unwrap()).collect()).unwrap()
    }

    fn rule54_ether_run(width: usize, steps: usize) -> SpaceTimeDiagram {
        let seed = Generation::parse(&".###".repeat(width / 4), Boundary::Periodic).unwrap();
        evolve(&seed, &RuleTable::new(54), steps)
    }

    #[test]
    fn all_dead_background() {
        let d = evolve(&Generation::dead(40, Boundary::Periodic), &RuleTable::new(54), 20);
        let e = detect_ether(&d, DEFAULT_MAX_PERIOD).unwrap();
        assert_eq!((e.spatial_period, e.temporal_period), (1, 1));
        assert_eq!(e.tile, vec![vec![false]]);
        assert!(filter_ether(&d, &e).count_live() == 0);
        assert!(filter_ether(&d, &EtherTiling::quiescent()).count_live() == 0);
    }

    #[test]
    fn vertical_stripes() {
        let rows = vec!["0101010101010101"; 12];
        let d = diagram(&rows, Boundary::Periodic);
        let e = detect_ether(&d, 8).unwrap();
        assert_eq!((e.spatial_period, e.temporal_period), (2, 1));
    }

    #[test]
    fn rule54_background_is_four_by_four() {
        let d = rule54_ether_run(96, 64);
        let e = detect_ether(&d, DEFAULT_MAX_PERIOD).unwrap();
        assert_eq!((e.spatial_period, e.temporal_period), (4, 4));
        assert!(e.coverage > 0.999);
        assert_eq!(filter_ether(&d, &e).count_live(), 0);
    }

    #[test]
    fn random_noise_has_no_ether() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Generation> = (0..40).map(|_| Generation::random(80, Boundary::Periodic, &mut rng)).collect();
        let d = SpaceTimeDiagram::new(rows).unwrap();
        assert!(matches!(detect_ether(&d, 4), Err(Error::NoEther { .. })));
    }

    #[test]
    fn defect_is_isolated() {
        let d = rule54_ether_run(96, 8);
        let e = detect_ether(&d, DEFAULT_MAX_PERIOD).unwrap();
        let mut rows: Vec<Generation> = d.rows().to_vec();
        rows[5].toggle(50);
        let broken = SpaceTimeDiagram::new(rows).unwrap();
        let f = filter_ether(&broken, &e);
        assert!(f.row(5).get(50));
        assert_eq!(f.count_live(), f.row(5).count_live());
        assert!(f.row(5).count_live() <= 2 * 4 * 2);
    }
}
