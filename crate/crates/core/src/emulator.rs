//! Event-level model of the time-multiplexed loop.
//!
//! Each iteration the modulator writes one pulse per cell into consecutive
//! time slots `T_R` apart. The train is split into three delay lines
//! (delays `0`, `T_R` and `2·T_R`, carrying weights `a₁`, `a₀` and `a₋₁`),
//! recombined, detected slot by slot and thresholded; the decided bits are
//! fed back to the modulator. Slot `i` of the recombined train is read out
//! at time `(i + 1)·T_R`, where the three copies of pulses `i+1`, `i` and
//! `i-1` coincide.
//!
//! Time is kept as an integer number of picoseconds, so latencies are exact.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::diagram::SpaceTimeDiagram;
use crate::error::{Error, Result};
use crate::generation::{Boundary, Generation};
use crate::photonic::{detect_with, NoiseSource, PhotonicConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Picoseconds(pub u64);

impl Picoseconds {
    pub const fn from_ns(ns: u64) -> Self {
        Picoseconds(ns * 1000)
    }

    pub fn as_seconds(self) -> f64 {
        self.0 as f64 * 1e-12
    }

    pub fn as_ns(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn times(self, k: u64) -> Self {
        Picoseconds(self.0 * k)
    }
}

impl fmt::Display for Picoseconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 >= 1_000_000 {
            write!(f, "{} us", self.0 as f64 / 1e6)
        } else {
            write!(f, "{} ns", self.as_ns())
        }
    }
}

pub const DEFAULT_REPETITION_PERIOD: Picoseconds = Picoseconds::from_ns(4);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseTrainConfig {
    pub repetition_period: Picoseconds,
    /// Pulses per iteration, one per lattice site.
    pub num_pulses: usize,
    pub photonic: PhotonicConfig,
    pub boundary: Boundary,
}

impl PulseTrainConfig {
    pub fn new(num_pulses: usize, photonic: PhotonicConfig, boundary: Boundary) -> Result<Self> {
        Self::with_period(DEFAULT_REPETITION_PERIOD, num_pulses, photonic, boundary)
    }

    pub fn with_period(
        repetition_period: Picoseconds,
        num_pulses: usize,
        photonic: PhotonicConfig,
        boundary: Boundary,
    ) -> Result<Self> {
        if repetition_period.0 == 0 {
            return Err(Error::InvalidArgument("repetition period must be positive".into()));
        }
        if num_pulses == 0 {
            return Err(Error::InvalidArgument("the pulse train needs at least one pulse".into()));
        }
        photonic.validate()?;
        Ok(Self {
            repetition_period,
            num_pulses,
            photonic,
            boundary,
        })
    }

    /// Time for one full pass of the train: `num_pulses · T_R`.
    pub fn iteration_latency(&self) -> Picoseconds {
        self.repetition_period.times(self.num_pulses as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Amplitudes written by the modulator.
    pub encoded: Vec<f64>,
    /// Recombined amplitude per slot.
    pub recombined: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Thresholded bits handed back to the modulator.
    pub feedback: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct LoopTrace {
    pub config: PulseTrainConfig,
    /// Modulator drive for the initial condition.
    pub initial_encoding: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    /// Real time spent emulating.
    pub emulator_elapsed: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Arrival {
    time: Picoseconds,
    /// Delay in units of `T_R`; larger delays carry the left neighbor and are summed first.
    order: u8,
    pulse: usize,
}

/// Delay-line index (delay in `T_R` units) → weight applied on that line.
fn line_weight(cfg: &PhotonicConfig, delay: u64) -> f64 {
    match delay {
        0 => cfg.weights.right,
        1 => cfg.weights.center,
        2 => cfg.weights.left,
        _ => unreachable!("three delay lines"),
    }
}

/// Propagates one encoded train through the three delay lines and returns
/// the recombined amplitude in each readout slot.
fn recombine(encoded: &[f64], cfg: &PulseTrainConfig) -> Vec<f64> {
    let n = encoded.len() as u64;
    let period = cfg.repetition_period;
    let frame = period.times(n);

    let mut queue = BinaryHeap::with_capacity(3 * encoded.len());
    for pulse in 0..encoded.len() {
        let emitted = period.times(pulse as u64);
        for delay in 0..3u64 {
            let mut time = Picoseconds(emitted.0 + period.0 * delay);
            if cfg.boundary == Boundary::Periodic {
                // cyclic train: readout window is (0, frame], arrivals wrap into it
                time = Picoseconds((time.0 + frame.0 - period.0) % frame.0 + period.0);
            }
            queue.push(Reverse(Arrival {
                time,
                order: 2 - delay as u8,
                pulse,
            }));
        }
    }

    let mut slots = vec![0.0f64; encoded.len()];
    while let Some(Reverse(arrival)) = queue.pop() {
        let slot_time = arrival.time.0 / period.0;
        // slot i is read at (i + 1)·T_R; arrivals outside the window miss the detector
        if slot_time == 0 || slot_time > n {
            continue;
        }
        let slot = (slot_time - 1) as usize;
        let delay = 2 - arrival.order as u64;
        slots[slot] += line_weight(&cfg.photonic, delay) * encoded[arrival.pulse];
    }
    slots
}

/// Runs the loop for `iterations` passes starting from `init`.
pub fn run_loop(init: &Generation, cfg: &PulseTrainConfig, iterations: usize) -> Result<LoopTrace> {
    if init.width() != cfg.num_pulses {
        return Err(Error::InvalidArgument(format!(
            "initial row has {} cells but the train carries {} pulses",
            init.width(),
            cfg.num_pulses
        )));
    }
    let started = Instant::now();
    let mut noise = NoiseSource::new(&cfg.photonic.noise);
    let initial_encoding = init.amplitudes();
    let mut encoded = initial_encoding.clone();
    let mut records = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let recombined = recombine(&encoded, cfg);
        let (feedback, intensities) = detect_with(&recombined, cfg.photonic.threshold, &mut noise);
        let next: Vec<f64> = feedback.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        records.push(IterationRecord {
            encoded: std::mem::replace(&mut encoded, next),
            recombined,
            intensities,
            feedback,
        });
    }
    Ok(LoopTrace {
        config: cfg.clone(),
        initial_encoding,
        iterations: records,
        emulator_elapsed: started.elapsed(),
    })
}

#[derive(Serialize)]
struct TraceLine<'a> {
    iteration: usize,
    start_ps: u64,
    encoded: &'a [f64],
    recombined: &'a [f64],
    intensities: &'a [f64],
    bits: String,
}

impl LoopTrace {
    pub fn modeled_duration(&self) -> Picoseconds {
        self.config.iteration_latency().times(self.iterations.len() as u64)
    }

    /// Initial row followed by every thresholded row.
    pub fn thresholded_rows(&self) -> Vec<Generation> {
        let bits = |amps: &[f64]| amps.iter().map(|&a| a != 0.0).collect::<Vec<_>>();
        std::iter::once(bits(&self.initial_encoding))
            .chain(self.iterations.iter().map(|r| r.feedback.clone()))
            .map(|b| Generation::from_bits(&b, self.config.boundary).expect("train is non-empty"))
            .collect()
    }

    pub fn to_diagram(&self) -> SpaceTimeDiagram {
        let field = self.iterations.iter().map(|r| r.intensities.clone()).collect();
        SpaceTimeDiagram::with_intensities(self.thresholded_rows(), field).expect("trace shape is consistent")
    }

    /// One JSON object per iteration.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let latency = self.config.iteration_latency();
        for (k, r) in self.iterations.iter().enumerate() {
            let line = TraceLine {
                iteration: k,
                start_ps: latency.times(k as u64).0,
                encoded: &r.encoded,
                recombined: &r.recombined,
                intensities: &r.intensities,
                bits: r.feedback.iter().map(|&b| if b { '1' } else { '0' }).collect(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n").map_err(|e| Error::io("<trace>", e))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub cell_updates: u64,
    pub modeled_seconds: f64,
    /// Updates per modeled second; equals `1 / T_R` since one slot is one cell.
    pub modeled_cells_per_second: f64,
    pub emulator_seconds: f64,
    pub emulator_cells_per_second: f64,
}

pub fn throughput_report(trace: &LoopTrace) -> Result<ThroughputReport> {
    if trace.iterations.is_empty() {
        return Err(Error::Precondition("trace has no completed iterations".into()));
    }
    let cell_updates = (trace.iterations.len() * trace.config.num_pulses) as u64;
    let modeled_seconds = trace.modeled_duration().as_seconds();
    let emulator_seconds = trace.emulator_elapsed.as_secs_f64();
    Ok(ThroughputReport {
        cell_updates,
        modeled_seconds,
        modeled_cells_per_second: cell_updates as f64 / modeled_seconds,
        emulator_seconds,
        emulator_cells_per_second: if emulator_seconds > 0.0 {
            cell_updates as f64 / emulator_seconds
        } else {
            f64::INFINITY
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eca::evolve;
    use crate::generation::single_seed;
    use crate::photonic::{photonic_evolve, NoiseSpec, Weights};
    use crate::rule::RuleTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rule90() -> PhotonicConfig {
        PhotonicConfig::new(Weights::new(1.0, 0.0, -1.0), 0.5).unwrap()
    }

    #[test]
    fn rule90_loop_draws_sierpinski() {
        let init = single_seed(257, Boundary::FixedDead);
        let cfg = PulseTrainConfig::new(257, rule90(), Boundary::FixedDead).unwrap();
        let trace = run_loop(&init, &cfg, 128).unwrap();
        assert_eq!(trace.thresholded_rows(), evolve(&init, &RuleTable::new(90), 128).rows());
    }

    #[test]
    fn zero_iterations_keep_only_the_encoding() {
        let init = single_seed(9, Boundary::FixedDead);
        let cfg = PulseTrainConfig::new(9, rule90(), Boundary::FixedDead).unwrap();
        let trace = run_loop(&init, &cfg, 0).unwrap();
        assert!(trace.iterations.is_empty());
        assert_eq!(trace.initial_encoding, init.amplitudes());
        assert!(throughput_report(&trace).is_err());
    }

    #[test]
    fn latency_and_rate() {
        let cfg = PulseTrainConfig::new(2001, rule90(), Boundary::FixedDead).unwrap();
        assert_eq!(cfg.iteration_latency(), Picoseconds(8_004_000));
        assert_eq!(cfg.iteration_latency().to_string(), "8.004 us");

        let init = single_seed(2001, Boundary::FixedDead);
        let report = throughput_report(&run_loop(&init, &cfg, 3).unwrap()).unwrap();
        assert!((report.modeled_cells_per_second - 2.5e8).abs() < 1e-3);
        assert_eq!(report.cell_updates, 6003);

        let cfg2 = PulseTrainConfig::new(4002, rule90(), Boundary::FixedDead).unwrap();
        let init2 = single_seed(4002, Boundary::FixedDead);
        let report2 = throughput_report(&run_loop(&init2, &cfg2, 3).unwrap()).unwrap();
        assert!((report2.modeled_cells_per_second - report.modeled_cells_per_second).abs() < 1e-3);
    }

    #[test]
    fn slot_shifts_hit_the_right_neighbors() {
        // single distinct weight per line exposes which pulse lands in which slot
        let cfg = PhotonicConfig::new(Weights::new(0.25, 0.5, 1.0), 0.0).unwrap();
        for boundary in [Boundary::FixedDead, Boundary::Periodic] {
            let g = Generation::parse("0100001", boundary).unwrap();
            let train = PulseTrainConfig::new(7, cfg, boundary).unwrap();
            let slots = recombine(&g.amplitudes(), &train);
            assert_eq!(slots, crate::photonic::interfere(&g, &cfg.weights), "{boundary}");
        }
        let one = PulseTrainConfig::new(1, cfg, Boundary::Periodic).unwrap();
        assert_eq!(recombine(&[1.0], &one), vec![1.75]);
        let one = PulseTrainConfig::new(1, cfg, Boundary::FixedDead).unwrap();
        assert_eq!(recombine(&[1.0], &one), vec![0.5]);
    }

    #[test]
    fn matches_photonic_evolution_with_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = PhotonicConfig::new(Weights::new(1.0, -0.6, -0.6), 0.25)
            .unwrap()
            .noisy(NoiseSpec::gaussian(0.15, 8));
        for boundary in [Boundary::FixedDead, Boundary::Periodic] {
            let init = Generation::random(100, boundary, &mut rng);
            let train = PulseTrainConfig::new(100, cfg, boundary).unwrap();
            let trace = run_loop(&init, &train, 60).unwrap();
            assert_eq!(trace.to_diagram(), photonic_evolve(&init, &cfg, 60));
        }
    }

    #[test]
    fn feedback_reenters_as_next_encoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let init = Generation::random(50, Boundary::Periodic, &mut rng);
        let train = PulseTrainConfig::new(50, rule90(), Boundary::Periodic).unwrap();
        let trace = run_loop(&init, &train, 20).unwrap();
        for pair in trace.iterations.windows(2) {
            let bits: Vec<bool> = pair[1].encoded.iter().map(|&a| a == 1.0).collect();
            assert_eq!(bits, pair[0].feedback);
        }
    }

    #[test]
    fn jsonl_has_one_record_per_iteration() {
        let init = single_seed(11, Boundary::FixedDead);
        let cfg = PulseTrainConfig::new(11, rule90(), Boundary::FixedDead).unwrap();
        let trace = run_loop(&init, &cfg, 4).unwrap();
        let mut buf = Vec::new();
        trace.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1]["start_ps"], 44_000);
        assert_eq!(lines[0]["bits"], "00001010000");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(PulseTrainConfig::new(0, rule90(), Boundary::FixedDead).is_err());
        assert!(PulseTrainConfig::with_period(Picoseconds(0), 3, rule90(), Boundary::FixedDead).is_err());
        let cfg = PulseTrainConfig::new(5, rule90(), Boundary::FixedDead).unwrap();
        assert!(run_loop(&single_seed(6, Boundary::FixedDead), &cfg, 1).is_err());
    }
}
