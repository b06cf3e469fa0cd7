//! Experiment specs and the runner that turns one into a bundle of files.
//!
//! Specs are line-oriented `key = value` text; `#` starts a comment.
//!
//! | key           | values                                             | default        |
//! |---------------|----------------------------------------------------|----------------|
//! | `name`        | file stem for the outputs                          | `experiment`   |
//! | `mode`        | `table`, `photonic`, `emulator`                    | `table`        |
//! | `rule`        | `0..=255`                                          | required*      |
//! | `weights`     | `a-1, a0, a1` (replaces compilation)               |                |
//! | `threshold`   | `b`, required with `weights`                       |                |
//! | `width`       | cells                                              | 257 / fixture  |
//! | `steps`       | steps                                              | 128 / fixture  |
//! | `boundary`    | `periodic`, `dead`                                 | dead / fixture |
//! | `initial`     | `single`, `random:SEED`, `bits:0101..`, `fixture:NAME` | `single`   |
//! | `noise_sigma` | amplitude noise standard deviation                 | 0              |
//! | `noise_seed`  | noise stream seed                                  | 0              |
//! | `grid_steps`  | compiler grid resolution                           | 41             |
//! | `analyses`    | comma list of `fractal`, `damage`, `randomness`, `ether`, `gliders`, `extinction`, `throughput` | none |
//! | `ether`       | fixture whose run defines the background for `gliders` | own diagram |
//! | `formats`     | comma list of `pgm`, `csv`, `json`                 | `csv`          |
//!
//! *`rule` may be omitted when `weights`/`threshold` are given; the realized
//! rule is then read off the configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    box_counting_dimension, damage_spreading, detect_ether, extract_glider_events, filter_ether, middle_column_bits,
    power_of_two_sizes, randomness_battery, DamageReport, EtherTiling, FractalReport, GliderEvent, RandomnessReport,
};
use crate::analysis::ether::DEFAULT_MAX_PERIOD;
use crate::compiler::{compile_rule, neighborhood_intensities, DEFAULT_GRID_STEPS};
use crate::diagram::SpaceTimeDiagram;
use crate::eca::evolve;
use crate::emulator::{run_loop, throughput_report, PulseTrainConfig};
use crate::error::{Error, Result};
use crate::fixtures::{load_fixture, Fixture};
use crate::generation::{single_seed, Boundary, Generation};
use crate::io::{export_diagram, Format};
use crate::photonic::{extinction_ratio, photonic_evolve, NoiseSpec, PhotonicConfig, Weights};
use crate::rule::RuleTable;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Table,
    Photonic,
    Emulator,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table" => Ok(Mode::Table),
            "photonic" => Ok(Mode::Photonic),
            "emulator" => Ok(Mode::Emulator),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected table, photonic or emulator)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Table => "table",
            Mode::Photonic => "photonic",
            Mode::Emulator => "emulator",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Initial {
    SingleSeed,
    RandomWithSeed(u64),
    ExplicitBits(String),
    Fixture(String),
}

impl FromStr for Initial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').map_or((s, None), |(k, a)| (k, Some(a.trim())));
        match (kind.to_ascii_lowercase().as_str(), arg) {
            ("single", None) => Ok(Initial::SingleSeed),
            ("random", Some(seed)) => seed
                .parse()
                .map(Initial::RandomWithSeed)
                .map_err(|_| Error::InvalidArgument(format!("bad random seed {seed:?}"))),
            ("bits", Some(bits)) if !bits.is_empty() => Ok(Initial::ExplicitBits(bits.to_string())),
            ("fixture", Some(name)) if !name.is_empty() => Ok(Initial::Fixture(name.to_string())),
            _ => Err(Error::InvalidArgument(format!(
                "bad initial condition {s:?} (expected single, random:SEED, bits:0101.. or fixture:NAME)"
            ))),
        }
    }
}

impl fmt::Display for Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Initial::SingleSeed => f.write_str("single"),
            Initial::RandomWithSeed(s) => write!(f, "random:{s}"),
            Initial::ExplicitBits(b) => write!(f, "bits:{b}"),
            Initial::Fixture(n) => write!(f, "fixture:{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Fractal,
    Damage,
    Randomness,
    Ether,
    Gliders,
    Extinction,
    Throughput,
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "fractal" => Analysis::Fractal,
            "damage" => Analysis::Damage,
            "randomness" => Analysis::Randomness,
            "ether" => Analysis::Ether,
            "gliders" => Analysis::Gliders,
            "extinction" => Analysis::Extinction,
            "throughput" => Analysis::Throughput,
            other => return Err(Error::InvalidArgument(format!("unknown analysis {other:?}"))),
        })
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Analysis::Fractal => "fractal",
            Analysis::Damage => "damage",
            Analysis::Randomness => "randomness",
            Analysis::Ether => "ether",
            Analysis::Gliders => "gliders",
            Analysis::Extinction => "extinction",
            Analysis::Throughput => "throughput",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub mode: Mode,
    pub rule: Option<u8>,
    /// Explicit realization; skips compilation.
    pub config: Option<(Weights, f64)>,
    pub width: Option<usize>,
    pub steps: Option<usize>,
    pub boundary: Option<Boundary>,
    pub initial: Initial,
    pub noise: NoiseSpec,
    pub grid_steps: usize,
    pub analyses: Vec<Analysis>,
    pub ether_fixture: Option<String>,
    pub formats: Vec<Format>,
}

pub const DEFAULT_WIDTH: usize = 257;
pub const DEFAULT_STEPS: usize = 128;

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            mode: Mode::Table,
            rule: None,
            config: None,
            width: None,
            steps: None,
            boundary: None,
            initial: Initial::SingleSeed,
            noise: NoiseSpec::NONE,
            grid_steps: DEFAULT_GRID_STEPS,
            analyses: Vec::new(),
            ether_fixture: None,
            formats: vec![Format::Csv],
        }
    }
}

fn list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(T::from_str)
        .collect()
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value for `{key}`: {value:?}")))
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(i + 1, format!("expected `key = value`, got {line:?}")));
            };
            spec.set(k.trim(), v.trim()).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Sets one key; used both by the parser and for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.to_ascii_lowercase().as_str() {
            "name" => {
                if value.is_empty() || value.contains(['/', '\\']) {
                    return Err(Error::InvalidArgument(format!("bad name {value:?}")));
                }
                self.name = value.to_string();
            }
            "mode" => self.mode = value.parse()?,
            "rule" => self.rule = Some(RuleTable::from_number(number("rule", value)?)?.number()),
            "weights" => {
                let w: Vec<f64> = value
                    .split(',')
                    .map(|a| number("weights", a))
                    .collect::<Result<_>>()?;
                let [l, c, r] = w[..] else {
                    return Err(Error::InvalidArgument(format!("`weights` needs three values, got {}", w.len())));
                };
                let b = self.config.map_or(f64::NAN, |(_, b)| b);
                self.config = Some((Weights::new(l, c, r), b));
            }
            "threshold" => {
                let b = number("threshold", value)?;
                let w = self.config.map_or(Weights::new(f64::NAN, f64::NAN, f64::NAN), |(w, _)| w);
                self.config = Some((w, b));
            }
            "width" => self.width = Some(number("width", value)?),
            "steps" => self.steps = Some(number("steps", value)?),
            "boundary" => self.boundary = Some(value.parse()?),
            "initial" => self.initial = value.parse()?,
            "seed" => self.initial = Initial::RandomWithSeed(number("seed", value)?),
            "noise_sigma" => self.noise.amplitude_sigma = number("noise_sigma", value)?,
            "noise_seed" => self.noise.seed = number("noise_seed", value)?,
            "grid_steps" => self.grid_steps = number("grid_steps", value)?,
            "analyses" => self.analyses = list(value)?,
            "ether" => self.ether_fixture = Some(value.to_string()),
            "formats" | "format" => self.formats = list(value)?,
            other => return Err(Error::InvalidArgument(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Checks cross-field constraints and loads any referenced fixture.
    pub fn validate(&self) -> Result<Option<Fixture>> {
        if self.rule.is_none() && self.config.is_none() {
            return Err(Error::InvalidArgument("spec needs `rule` or `weights` + `threshold`".into()));
        }
        if let Some((w, b)) = self.config {
            PhotonicConfig::new(w, b)
                .map_err(|e| Error::InvalidArgument(format!("`weights`/`threshold` incomplete or invalid: {e}")))?;
        }
        self.noise.validate()?;
        if self.width == Some(0) {
            return Err(Error::InvalidArgument("width must be positive".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::InvalidArgument("no output formats".into()));
        }
        if let Some(e) = &self.ether_fixture {
            load_fixture(e)?;
        }
        let fixture = match &self.initial {
            Initial::Fixture(name) => Some(load_fixture(name)?),
            _ => None,
        };
        if let Some(f) = &fixture {
            if self.width.is_some_and(|w| w != f.width()) {
                return Err(Error::InvalidArgument(format!(
                    "width {} conflicts with fixture {} (width {})",
                    self.width.unwrap(),
                    f.name,
                    f.width()
                )));
            }
        }
        Ok(fixture)
    }
}

impl fmt::Display for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(", ");
        writeln!(f, "name = {}", self.name)?;
        writeln!(f, "mode = {}", self.mode)?;
        if let Some(r) = self.rule {
            writeln!(f, "rule = {r}")?;
        }
        if let Some((w, b)) = self.config {
            writeln!(f, "weights = {}, {}, {}", w.left, w.center, w.right)?;
            writeln!(f, "threshold = {b}")?;
        }
        if let Some(w) = self.width {
            writeln!(f, "width = {w}")?;
        }
        if let Some(s) = self.steps {
            writeln!(f, "steps = {s}")?;
        }
        if let Some(b) = self.boundary {
            writeln!(f, "boundary = {b}")?;
        }
        writeln!(f, "initial = {}", self.initial)?;
        writeln!(f, "noise_sigma = {}", self.noise.amplitude_sigma)?;
        writeln!(f, "noise_seed = {}", self.noise.seed)?;
        writeln!(f, "grid_steps = {}", self.grid_steps)?;
        writeln!(f, "analyses = {}", join(self.analyses.iter().map(|a| a.to_string()).collect()))?;
        if let Some(e) = &self.ether_fixture {
            writeln!(f, "ether = {e}")?;
        }
        writeln!(f, "formats = {}", join(self.formats.iter().map(|x| x.to_string()).collect()))
    }
}

/// The rule a configuration implements at zero noise.
pub fn realized_rule(cfg: &PhotonicConfig) -> RuleTable {
    let i = neighborhood_intensities(&cfg.weights);
    RuleTable::from_outputs(std::array::from_fn(|n| i[n] > cfg.threshold))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AnalysisReports {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractal: Option<FractalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damage: Option<DamageReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub randomness: Option<RandomnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ether: Option<EtherTiling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gliders: Option<Vec<GliderEvent>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extinction_ratio: Option<f64>,
    /// Modeled loop rate, one cell per `T_R`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modeled_cells_per_second: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub mode: Mode,
    pub rule: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<PhotonicConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub width: usize,
    pub steps: usize,
    pub boundary: Boundary,
    pub initial: String,
    pub final_live_cells: usize,
    pub analyses: AnalysisReports,
}

#[derive(Clone, Debug)]
pub struct Bundle {
    pub diagram: SpaceTimeDiagram,
    pub report: ExperimentReport,
    pub files: Vec<PathBuf>,
}

fn initial_row(spec: &ExperimentSpec, fixture: Option<&Fixture>, width: usize, boundary: Boundary) -> Result<Generation> {
    Ok(match &spec.initial {
        Initial::SingleSeed => single_seed(width, boundary),
        Initial::RandomWithSeed(seed) => Generation::random(width, boundary, &mut ChaCha8Rng::seed_from_u64(*seed)),
        Initial::ExplicitBits(bits) => {
            let g = Generation::parse(bits, boundary)?;
            if spec.width.is_some_and(|w| w != g.width()) {
                return Err(Error::InvalidArgument(format!(
                    "width {width} conflicts with {} explicit bits",
                    g.width()
                )));
            }
            g
        }
        Initial::Fixture(_) => fixture.expect("validated").initial.clone().with_boundary(boundary),
    })
}

/// Runs `spec` without writing anything.
pub fn simulate(spec: &ExperimentSpec) -> Result<(SpaceTimeDiagram, ExperimentReport)> {
    let fixture = spec.validate()?;
    let fixture = fixture.as_ref();
    let boundary = spec.boundary.or(fixture.map(Fixture::boundary)).unwrap_or_default();
    let steps = spec.steps.or(fixture.map(|f| f.steps)).unwrap_or(DEFAULT_STEPS);
    let mut width = spec.width.or(fixture.map(Fixture::width)).unwrap_or(DEFAULT_WIDTH);
    let init = initial_row(spec, fixture, width, boundary)?;
    width = init.width();

    let mut margin = None;
    let config = match spec.config {
        Some((w, b)) => Some(PhotonicConfig::with_noise(w, b, spec.noise)?),
        None if spec.mode != Mode::Table => {
            let rule = spec.rule.expect("validated");
            let compiled = compile_rule(rule as i64, spec.grid_steps)?;
            let cfg = compiled.config.filter(|_| compiled.feasible).ok_or(Error::Infeasible {
                rule,
                grid_steps: spec.grid_steps,
            })?;
            margin = Some(compiled.margin);
            Some(cfg.noisy(spec.noise))
        }
        None => None,
    };
    let rule = match (spec.rule, &config) {
        (Some(r), Some(cfg)) if spec.config.is_some() && realized_rule(cfg).number() != r => {
            return Err(Error::InvalidArgument(format!(
                "weights/threshold realize rule {}, not rule {r}",
                realized_rule(cfg).number()
            )));
        }
        (Some(r), _) => RuleTable::new(r),
        (None, Some(cfg)) => realized_rule(cfg),
        (None, None) => unreachable!("validated"),
    };

    let mut analyses = AnalysisReports::default();
    let diagram = match spec.mode {
        Mode::Table => evolve(&init, &rule, steps),
        Mode::Photonic => photonic_evolve(&init, config.as_ref().expect("photonic mode has a config"), steps),
        Mode::Emulator => {
            let cfg = PulseTrainConfig::new(width, config.expect("emulator mode has a config"), boundary)?;
            let trace = run_loop(&init, &cfg, steps)?;
            if spec.analyses.contains(&Analysis::Throughput) && steps > 0 {
                analyses.modeled_cells_per_second = Some(throughput_report(&trace)?.modeled_cells_per_second);
            }
            trace.to_diagram()
        }
    };

    for a in &spec.analyses {
        match a {
            Analysis::Fractal => {
                let sizes = power_of_two_sizes(width.min(steps + 1) / 2);
                analyses.fractal = Some(box_counting_dimension(&diagram, &sizes)?);
            }
            Analysis::Damage => analyses.damage = Some(damage_spreading(&rule, &init, width / 2, steps)?),
            Analysis::Randomness => {
                let bits = middle_column_bits(&rule, &init, steps)?;
                analyses.randomness = Some(randomness_battery(&bits)?);
            }
            Analysis::Ether | Analysis::Gliders => {
                if analyses.ether.is_none() {
                    let reference = match &spec.ether_fixture {
                        Some(name) => load_fixture(name)?.run(),
                        None => diagram.clone(),
                    };
                    analyses.ether = Some(detect_ether(&reference, DEFAULT_MAX_PERIOD)?);
                }
                if *a == Analysis::Gliders {
                    let filtered = filter_ether(&diagram, analyses.ether.as_ref().expect("set above"));
                    analyses.gliders = Some(extract_glider_events(&filtered));
                }
            }
            Analysis::Extinction => analyses.extinction_ratio = Some(extinction_ratio(&diagram)?),
            Analysis::Throughput => {
                if spec.mode != Mode::Emulator {
                    return Err(Error::InvalidArgument("the throughput analysis needs emulator mode".into()));
                }
            }
        }
    }

    let report = ExperimentReport {
        name: spec.name.clone(),
        mode: spec.mode,
        rule: rule.number(),
        config: config.filter(|_| spec.mode != Mode::Table),
        margin,
        width,
        steps,
        boundary,
        initial: spec.initial.to_string(),
        final_live_cells: diagram.last().count_live(),
        analyses,
    };
    Ok((diagram, report))
}

/// Runs `spec` and writes `<name>.<ext>` per format, `<name>.report.json`
/// and `<name>.log` into `out_dir`. Identical specs give identical files.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<Bundle> {
    let (diagram, report) = simulate(spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    let mut log = format!("# spec\n{spec}\n# outputs\n");
    for format in &spec.formats {
        let path = out_dir.join(format!("{}.{}", spec.name, format.extension()));
        export_diagram(&diagram, *format, &path)?;
        log.push_str(&format!("diagram {format} {}\n", file_name(&path)));
        files.push(path);
    }
    let report_path = out_dir.join(format!("{}.report.json", spec.name));
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    std::fs::write(&report_path, json).map_err(|e| Error::io(&report_path, e))?;
    log.push_str(&format!("report {}\n", file_name(&report_path)));
    files.push(report_path);
    log.push_str(&format!(
        "rule {} mode {} width {} steps {} final live cells {}\n",
        report.rule, report.mode, report.width, report.steps, report.final_live_cells
    ));
    let log_path = out_dir.join(format!("{}.log", spec.name));
    std::fs::write(&log_path, log).map_err(|e| Error::io(&log_path, e))?;
    files.push(log_path);
    Ok(Bundle { diagram, report, files })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
