//! Frozen initial conditions.
//!
//! A fixture is a small `key = value` text file:
//!
//! ```text
//! # comment
//! rule = 54
//! boundary = periodic
//! steps = 160
//! bits = 0111011101110111...
//! ```
//!
//! `width` is optional and, when present, must match the length of `bits`.
//! Fixtures are looked up as `<dir>/<name>.fixture`, where `<dir>` is
//! `$PECA_FIXTURE_DIR` if set and the crate's `fixtures/` directory otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::compiler::Census;
use crate::diagram::SpaceTimeDiagram;
use crate::eca::evolve;
use crate::error::{Error, Result};
use crate::generation::{Boundary, Generation};
use crate::rule::RuleTable;

pub const FIXTURE_DIR_ENV: &str = "PECA_FIXTURE_DIR";
pub const EXTENSION: &str = "fixture";

#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub rule: u8,
    pub steps: usize,
    pub initial: Generation,
    pub description: Option<String>,
}

impl Fixture {
    pub fn width(&self) -> usize {
        self.initial.width()
    }

    pub fn boundary(&self) -> Boundary {
        self.initial.boundary()
    }

    /// Evolves the initial row under the exact rule table for `steps` steps.
    pub fn run(&self) -> SpaceTimeDiagram {
        evolve(&self.initial, &RuleTable::new(self.rule), self.steps)
    }

    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(i + 1, format!("expected `key = value`, got {line:?}")));
            };
            let key = k.trim().to_ascii_lowercase();
            if fields.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::parse(i + 1, format!("duplicate key `{key}`")));
            }
        }
        let take = |key: &str| -> Result<(usize, String)> {
            fields
                .get(key)
                .cloned()
                .ok_or_else(|| Error::parse(0, format!("missing key `{key}`")))
        };
        let (line, rule) = take("rule")?;
        let rule: u8 = rule.parse().map_err(|_| Error::parse(line, format!("bad rule {rule:?}")))?;
        let (line, steps) = take("steps")?;
        let steps: usize = steps.parse().map_err(|_| Error::parse(line, format!("bad steps {steps:?}")))?;
        let (line, boundary) = take("boundary")?;
        let boundary: Boundary = boundary.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?;
        let (line, bits) = take("bits")?;
        let initial = Generation::parse(&bits, boundary).map_err(|e| Error::parse(line, e.to_string()))?;
        if let Some((line, width)) = fields.get("width") {
            let w: usize = width.parse().map_err(|_| Error::parse(*line, format!("bad width {width:?}")))?;
            if w != initial.width() {
                return Err(Error::parse(*line, format!("width {w} but bits has {} cells", initial.width())));
            }
        }
        for (key, (line, _)) in &fields {
            if !matches!(key.as_str(), "rule" | "steps" | "boundary" | "bits" | "width" | "description") {
                return Err(Error::parse(*line, format!("unknown key `{key}`")));
            }
        }
        Ok(Fixture {
            name: name.to_string(),
            rule,
            steps,
            initial,
            description: fields.get("description").map(|(_, d)| d.clone()),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("fixture");
        Self::parse(name, &text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(d) = &self.description {
            writeln!(f, "description = {d}")?;
        }
        writeln!(f, "rule = {}", self.rule)?;
        writeln!(f, "width = {}", self.width())?;
        writeln!(f, "boundary = {}", self.boundary())?;
        writeln!(f, "steps = {}", self.steps)?;
        writeln!(f, "bits = {}", self.initial)
    }
}

pub fn fixture_dir() -> PathBuf {
    match std::env::var_os(FIXTURE_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
    }
}

/// Loads `<fixture_dir>/<name>.fixture`.
pub fn load_fixture(name: &str) -> Result<Fixture> {
    if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
        return Err(Error::InvalidArgument(format!("bad fixture name {name:?}")));
    }
    Fixture::from_path(&fixture_dir().join(format!("{name}.{EXTENSION}")))
}

/// Path of the frozen census for `grid_steps`.
pub fn census_path(grid_steps: usize) -> PathBuf {
    fixture_dir().join(format!("census_g{grid_steps}.csv"))
}

/// The frozen census for `grid_steps`, as `(census, file text)`.
pub fn golden_census(grid_steps: usize) -> Result<(Census, String)> {
    let path = census_path(grid_steps);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok((Census::from_csv(&text, grid_steps)?, text))
}

/// Names of all fixtures in the fixture directory, sorted.
pub fn list_fixtures() -> Result<Vec<String>> {
    let dir = fixture_dir();
    let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == EXTENSION))
        .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_string))
        .collect();
    names.sort();
    Ok(names)
}
