//! Analog model of one loop iteration: a signed three-tap interference of
//! pulse amplitudes, square-law detection and a strict intensity threshold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::diagram::SpaceTimeDiagram;
use crate::error::{Error, Result};
use crate::generation::Generation;

/// Delay-line weights `(a₋₁, a₀, a₁)`: magnitude is the attenuator
/// transmission, sign the relative phase (0 or π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    /// Weight on the left neighbor `x[i-1]`.
    pub left: f64,
    pub center: f64,
    /// Weight on the right neighbor `x[i+1]`.
    pub right: f64,
}

impl Weights {
    pub const fn new(left: f64, center: f64, right: f64) -> Self {
        Self { left, center, right }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("a-1", self.left), ("a0", self.center), ("a1", self.right)] {
            if !a.is_finite() || a.abs() > 1.0 {
                return Err(Error::InvalidArgument(format!("weight {name} = {a} is outside [-1, 1]")));
            }
        }
        Ok(())
    }

    pub fn negated(&self) -> Self {
        Self::new(-self.left, -self.center, -self.right)
    }

    /// Swaps the two neighbor taps.
    pub fn mirrored(&self) -> Self {
        Self::new(self.right, self.center, self.left)
    }

    #[inline]
    pub fn amplitude(&self, left: f64, center: f64, right: f64) -> f64 {
        self.left * left + self.center * center + self.right * right
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation of the Gaussian added to each amplitude before detection.
    pub amplitude_sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec {
        amplitude_sigma: 0.0,
        seed: 0,
    };

    pub fn gaussian(amplitude_sigma: f64, seed: u64) -> Self {
        Self { amplitude_sigma, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_sigma >= 0.0) || !self.amplitude_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise sigma {} must be finite and non-negative",
                self.amplitude_sigma
            )));
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.amplitude_sigma == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonicConfig {
    pub weights: Weights,
    /// Intensity threshold `b`; a cell is live iff its intensity is strictly above it.
    pub threshold: f64,
    #[serde(default)]
    pub noise: NoiseSpec,
}

impl PhotonicConfig {
    pub fn new(weights: Weights, threshold: f64) -> Result<Self> {
        Self::with_noise(weights, threshold, NoiseSpec::NONE)
    }

    pub fn with_noise(weights: Weights, threshold: f64, noise: NoiseSpec) -> Result<Self> {
        let cfg = Self {
            weights,
            threshold,
            noise,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.noise.validate()?;
        if !(self.threshold >= 0.0) || !self.threshold.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "threshold {} must be finite and non-negative",
                self.threshold
            )));
        }
        Ok(())
    }

    pub fn noiseless(mut self) -> Self {
        self.noise = NoiseSpec::NONE;
        self
    }

    pub fn noisy(mut self, noise: NoiseSpec) -> Self {
        self.noise = noise;
        self
    }
}

/// Per-run source of amplitude perturbations. Silent specs draw nothing.
#[derive(Clone, Debug)]
pub struct NoiseSource {
    inner: Option<(ChaCha8Rng, Normal<f64>)>,
}

impl NoiseSource {
    pub fn new(spec: &NoiseSpec) -> Self {
        let inner = (!spec.is_silent()).then(|| {
            (
                ChaCha8Rng::seed_from_u64(spec.seed),
                Normal::new(0.0, spec.amplitude_sigma).expect("sigma validated"),
            )
        });
        Self { inner }
    }

    pub fn silent() -> Self {
        Self { inner: None }
    }

    #[inline]
    pub fn sample(&mut self) -> f64 {
        match &mut self.inner {
            Some((rng, normal)) => normal.sample(rng),
            None => 0.0,
        }
    }
}

/// Recombined amplitudes `y[i] = a₋₁·x[i-1] + a₀·x[i] + a₁·x[i+1]`.
pub fn interfere(g: &Generation, w: &Weights) -> Vec<f64> {
    (0..g.width())
        .map(|i| {
            let cell = |off| if g.neighbor(i, off) { 1.0 } else { 0.0 };
            w.amplitude(cell(-1), cell(0), cell(1))
        })
        .collect()
}

/// [`interfere`] on an arbitrary real amplitude vector (no binarization).
pub fn interfere_amplitudes(x: &[f64], periodic: bool, w: &Weights) -> Vec<f64> {
    let n = x.len() as isize;
    let at = |j: isize| -> f64 {
        if (0..n).contains(&j) {
            x[j as usize]
        } else if periodic && n > 0 {
            x[j.rem_euclid(n) as usize]
        } else {
            0.0
        }
    };
    (0..n).map(|i| w.amplitude(at(i - 1), at(i), at(i + 1))).collect()
}

/// Square-law detection followed by the threshold decision, drawing noise
/// from `noise`. Returns the decided bits and the detected intensities.
pub fn detect_with(y: &[f64], threshold: f64, noise: &mut NoiseSource) -> (Vec<bool>, Vec<f64>) {
    y.iter()
        .map(|&amp| {
            let perturbed = amp.abs() + noise.sample();
            let intensity = perturbed * perturbed;
            (intensity > threshold, intensity)
        })
        .unzip()
}

/// Threshold detection of a single amplitude row: cell `i` is live iff
/// `(|y[i]| + ε)² > b`, with `ε` drawn from `noise` (zero when silent).
pub fn detect_threshold(
    y: &[f64],
    threshold: f64,
    noise: &NoiseSpec,
    boundary: crate::generation::Boundary,
) -> Result<Generation> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} must be non-negative")));
    }
    noise.validate()?;
    let (bits, _) = detect_with(y, threshold, &mut NoiseSource::new(noise));
    Generation::from_bits(&bits, boundary)
}

/// One photonic iteration. Returns the next row and the detected intensities.
pub fn photonic_step(g: &Generation, cfg: &PhotonicConfig) -> (Generation, Vec<f64>) {
    photonic_step_with(g, cfg, &mut NoiseSource::new(&cfg.noise))
}

pub fn photonic_step_with(g: &Generation, cfg: &PhotonicConfig, noise: &mut NoiseSource) -> (Generation, Vec<f64>) {
    let y = interfere(g, &cfg.weights);
    let (bits, intensities) = detect_with(&y, cfg.threshold, noise);
    let next = Generation::from_bits(&bits, g.boundary()).expect("width preserved");
    (next, intensities)
}

/// Iterates [`photonic_step`] with one noise stream for the whole run.
pub fn photonic_evolve(init: &Generation, cfg: &PhotonicConfig, steps: usize) -> SpaceTimeDiagram {
    let mut noise = NoiseSource::new(&cfg.noise);
    let mut rows = Vec::with_capacity(steps + 1);
    let mut field = Vec::with_capacity(steps);
    rows.push(init.clone());
    for _ in 0..steps {
        let (next, intensities) = photonic_step_with(rows.last().unwrap(), cfg, &mut noise);
        rows.push(next);
        field.push(intensities);
    }
    SpaceTimeDiagram::with_intensities(rows, field).expect("shape is consistent by construction")
}

/// Smallest live-cell intensity over the largest dead-cell intensity.
/// Infinite when every dead cell detected zero light.
pub fn extinction_ratio(d: &SpaceTimeDiagram) -> Result<f64> {
    let field = d
        .intensities()
        .ok_or_else(|| Error::Precondition("diagram carries no intensity field".into()))?;
    let mut min_live = f64::INFINITY;
    let mut max_dead = f64::NEG_INFINITY;
    for (t, row) in field.iter().enumerate() {
        let decided = d.row(t + 1);
        for (i, &v) in row.iter().enumerate() {
            if decided.get(i) {
                min_live = min_live.min(v);
            } else {
                max_dead = max_dead.max(v);
            }
        }
    }
    if min_live == f64::INFINITY || max_dead == f64::NEG_INFINITY {
        return Err(Error::Precondition(
            "extinction ratio needs both live and dead detected cells".into(),
        ));
    }
    Ok(if max_dead == 0.0 { f64::INFINITY } else { min_live / max_dead })
}
