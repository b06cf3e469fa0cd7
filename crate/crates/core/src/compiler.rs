//! Search for weight/threshold settings that make the photonic model
//! compute a given rule.
//!
//! For fixed weights the eight neighborhood intensities are fixed, so a
//! rule is realizable iff every output-0 intensity lies strictly below every
//! output-1 intensity. The threshold then goes to the middle of that gap and
//! the gap width is the noise margin. Weights are found by a uniform grid
//! over `[-1, 1]³` followed by local refinement around the best grid cells.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photonic::{PhotonicConfig, Weights};
use crate::rule::{neighborhood_cells, RuleTable};

pub const DEFAULT_GRID_STEPS: usize = 41;

const REFINE_ROUNDS: usize = 4;
const REFINE_POINTS: usize = 9;
const TIE_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompilationResult {
    pub rule_number: u8,
    pub config: Option<PhotonicConfig>,
    pub margin: f64,
    pub feasible: bool,
}

impl CompilationResult {
    fn infeasible(rule_number: u8) -> Self {
        Self {
            rule_number,
            config: None,
            margin: 0.0,
            feasible: false,
        }
    }
}

/// Intensities `|a₋₁·l + a₀·c + a₁·r|²`, indexed by neighborhood code.
pub fn neighborhood_intensities(w: &Weights) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (n, slot) in out.iter_mut().enumerate() {
        let (l, c, r) = neighborhood_cells(n);
        let y = w.amplitude(l as u8 as f64, c as u8 as f64, r as u8 as f64);
        *slot = y * y;
    }
    out
}

/// True iff the zero-noise threshold decision reproduces `rule` on all eight neighborhoods.
pub fn verify_config(cfg: &PhotonicConfig, rule: &RuleTable) -> bool {
    neighborhood_intensities(&cfg.weights)
        .iter()
        .enumerate()
        .all(|(n, &i)| (i > cfg.threshold) == rule.output(n))
}

/// Separation of `rule` under fixed intensities: `(margin, threshold)`, or
/// `None` if some output-0 neighborhood is at least as bright as some output-1 one.
fn separation(intensities: &[f64; 8], rule: &RuleTable) -> Option<(f64, f64)> {
    let mut max_dead = f64::NEG_INFINITY;
    let mut min_live = f64::INFINITY;
    for (n, &v) in intensities.iter().enumerate() {
        if rule.output(n) {
            min_live = min_live.min(v);
        } else {
            max_dead = max_dead.max(v);
        }
    }
    if min_live == f64::INFINITY {
        // nothing may light up: park the threshold above everything
        return Some((1.0, max_dead + 1.0));
    }
    // neighborhood 000 always has zero intensity, so an output-1 at 000 can
    // never clear a non-negative threshold
    if max_dead == f64::NEG_INFINITY || min_live <= max_dead {
        return None;
    }
    Some((min_live - max_dead, 0.5 * (min_live + max_dead)))
}

fn grid_value(k: usize, grid_steps: usize) -> f64 {
    -1.0 + (2 * k) as f64 / (grid_steps - 1) as f64
}

/// Neighborhood intensities for every point of a uniform weight grid, shared across rules.
pub struct IntensityGrid {
    grid_steps: usize,
    points: Vec<(Weights, [f64; 8])>,
}

impl IntensityGrid {
    pub fn new(grid_steps: usize) -> Result<Self> {
        if grid_steps < 3 {
            return Err(Error::InvalidArgument(format!("grid_steps must be at least 3, got {grid_steps}")));
        }
        let values: Vec<f64> = (0..grid_steps).map(|k| grid_value(k, grid_steps)).collect();
        let mut points = Vec::with_capacity(grid_steps.pow(3));
        for &l in &values {
            for &c in &values {
                for &r in &values {
                    let w = Weights::new(l, c, r);
                    points.push((w, neighborhood_intensities(&w)));
                }
            }
        }
        Ok(Self { grid_steps, points })
    }

    pub fn grid_steps(&self) -> usize {
        self.grid_steps
    }

    fn spacing(&self) -> f64 {
        2.0 / (self.grid_steps - 1) as f64
    }

    /// Best realization of `rule` on this grid, refined locally.
    pub fn compile(&self, rule: &RuleTable) -> CompilationResult {
        let number = rule.number();
        let mut best_margin = f64::NEG_INFINITY;
        let mut seeds: Vec<(Weights, f64)> = Vec::new();
        for (w, intensities) in &self.points {
            if let Some((margin, b)) = separation(intensities, rule) {
                if margin > best_margin + TIE_EPS {
                    best_margin = margin;
                    seeds.clear();
                }
                if margin >= best_margin - TIE_EPS {
                    seeds.push((*w, b));
                }
            }
        }
        let Some(&(first, first_b)) = seeds.first() else {
            return CompilationResult::infeasible(number);
        };
        let mut best = (first, first_b, best_margin);

        // output-1 set empty: every setting is equally good
        let degenerate = (0..8).all(|n| !rule.output(n));
        if !degenerate {
            for &(w, _) in &seeds {
                let candidate = refine(w, self.spacing(), rule);
                if candidate.2 > best.2 + TIE_EPS {
                    best = candidate;
                }
            }
        }
        let (weights, threshold, margin) = best;
        let config = PhotonicConfig::new(weights, threshold).expect("search stays inside the weight box");
        debug_assert!(verify_config(&config, rule));
        CompilationResult {
            rule_number: number,
            config: Some(config),
            margin,
            feasible: true,
        }
    }
}

/// Shrinking local grid search around `start`; returns `(weights, threshold, margin)`.
fn refine(start: Weights, spacing: f64, rule: &RuleTable) -> (Weights, f64, f64) {
    let (start_margin, start_b) = separation(&neighborhood_intensities(&start), rule).expect("seed is feasible");
    let mut best = (start, start_b, start_margin);
    let mut radius = spacing;
    let half = (REFINE_POINTS / 2) as f64;
    for _ in 0..REFINE_ROUNDS {
        let center = best.0;
        let axis = |c: f64| -> Vec<f64> {
            (0..REFINE_POINTS)
                .map(|k| (c + radius * (k as f64 - half) / half).clamp(-1.0, 1.0))
                .collect()
        };
        let (ls, cs, rs) = (axis(center.left), axis(center.center), axis(center.right));
        for &l in &ls {
            for &c in &cs {
                for &r in &rs {
                    let w = Weights::new(l, c, r);
                    if let Some((margin, b)) = separation(&neighborhood_intensities(&w), rule) {
                        if margin > best.2 + TIE_EPS {
                            best = (w, b, margin);
                        }
                    }
                }
            }
        }
        radius /= 2.0;
    }
    best
}

/// Finds the widest-margin realization of rule `n` on a `grid_steps`³ weight grid.
pub fn compile_rule(n: i64, grid_steps: usize) -> Result<CompilationResult> {
    let rule = RuleTable::from_number(n)?;
    Ok(IntensityGrid::new(grid_steps)?.compile(&rule))
}

/// Compilation results for all 256 rules, ordered by rule number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub grid_steps: usize,
    pub results: Vec<CompilationResult>,
}

pub const CENSUS_HEADER: &str = "rule_number,feasible,a_m1,a_0,a_1,b,margin";

impl Census {
    pub fn feasible_rules(&self) -> Vec<u8> {
        self.results.iter().filter(|r| r.feasible).map(|r| r.rule_number).collect()
    }

    pub fn feasible_count(&self) -> usize {
        self.results.iter().filter(|r| r.feasible).count()
    }

    pub fn get(&self, rule: u8) -> &CompilationResult {
        &self.results[rule as usize]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CENSUS_HEADER);
        out.push('\n');
        for r in &self.results {
            match &r.config {
                Some(c) => writeln!(
                    out,
                    "{},true,{},{},{},{},{}",
                    r.rule_number, c.weights.left, c.weights.center, c.weights.right, c.threshold, r.margin
                ),
                None => writeln!(out, "{},false,,,,,0", r.rule_number),
            }
            .expect("writing to a String");
        }
        out
    }

    pub fn from_csv(text: &str, grid_steps: usize) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CENSUS_HEADER => {}
            _ => return Err(Error::parse(1, format!("expected header `{CENSUS_HEADER}`"))),
        }
        let mut results = Vec::with_capacity(256);
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(Error::parse(line_no, format!("expected 7 fields, found {}", fields.len())));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::parse(line_no, format!("bad number {s:?}: {e}")))
            };
            let rule_number: u8 = fields[0]
                .parse()
                .map_err(|e| Error::parse(line_no, format!("bad rule number: {e}")))?;
            let feasible: bool = fields[1]
                .parse()
                .map_err(|e| Error::parse(line_no, format!("bad feasibility flag: {e}")))?;
            let result = if feasible {
                let weights = Weights::new(num(fields[2])?, num(fields[3])?, num(fields[4])?);
                let config = PhotonicConfig::new(weights, num(fields[5])?)
                    .map_err(|e| Error::parse(line_no, e.to_string()))?;
                CompilationResult {
                    rule_number,
                    config: Some(config),
                    margin: num(fields[6])?,
                    feasible,
                }
            } else {
                CompilationResult::infeasible(rule_number)
            };
            results.push(result);
        }
        if results.len() != 256 || results.iter().enumerate().any(|(k, r)| r.rule_number as usize != k) {
            return Err(Error::parse(0, "census must list rules 0..=255 in order"));
        }
        Ok(Self { grid_steps, results })
    }
}

/// Compiles every rule; rules are searched in parallel and merged by rule number.
pub fn feasibility_census(grid_steps: usize) -> Result<Census> {
    let grid = IntensityGrid::new(grid_steps)?;
    let results = (0..=255u8)
        .into_par_iter()
        .map(|n| grid.compile(&RuleTable::new(n)))
        .collect();
    Ok(Census { grid_steps, results })
}
