use crate::error::{Error, Result};
use crate::generation::{Boundary, Generation};

/// Stacked generations; row 0 is the initial condition.
///
/// Photonic runs additionally carry the detected intensity field:
/// `intensities[t][i]` is the intensity that decided `row(t + 1)[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeDiagram {
    rows: Vec<Generation>,
    intensities: Option<Vec<Vec<f64>>>,
}

impl SpaceTimeDiagram {
    pub fn new(rows: Vec<Generation>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidArgument("a diagram needs at least one row".into()));
        };
        let width = first.width();
        if let Some((t, r)) = rows.iter().enumerate().find(|(_, r)| r.width() != width) {
            return Err(Error::InvalidArgument(format!(
                "row {t} has width {} but row 0 has width {width}",
                r.width()
            )));
        }
        Ok(Self {
            rows,
            intensities: None,
        })
    }

    pub fn with_intensities(rows: Vec<Generation>, intensities: Vec<Vec<f64>>) -> Result<Self> {
        let mut d = Self::new(rows)?;
        if intensities.len() != d.steps() {
            return Err(Error::InvalidArgument(format!(
                "{} intensity rows for a diagram of {} steps",
                intensities.len(),
                d.steps()
            )));
        }
        let width = d.width();
        if let Some(t) = intensities.iter().position(|r| r.len() != width) {
            return Err(Error::InvalidArgument(format!("intensity row {t} has wrong width")));
        }
        if intensities.iter().flatten().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("intensities must be finite and non-negative".into()));
        }
        d.intensities = Some(intensities);
        Ok(d)
    }

    /// Number of update steps (rows minus one).
    pub fn steps(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn width(&self) -> usize {
        self.rows[0].width()
    }

    pub fn boundary(&self) -> Boundary {
        self.rows[0].boundary()
    }

    pub fn rows(&self) -> &[Generation] {
        &self.rows
    }

    pub fn row(&self, t: usize) -> &Generation {
        &self.rows[t]
    }

    pub fn last(&self) -> &Generation {
        self.rows.last().expect("diagram is never empty")
    }

    #[inline]
    pub fn get(&self, t: usize, i: usize) -> bool {
        self.rows[t].get(i)
    }

    pub fn intensities(&self) -> Option<&[Vec<f64>]> {
        self.intensities.as_deref()
    }

    pub fn into_parts(self) -> (Vec<Generation>, Option<Vec<Vec<f64>>>) {
        (self.rows, self.intensities)
    }

    pub fn count_live(&self) -> usize {
        self.rows.iter().map(Generation::count_live).sum()
    }

    /// Checks that each row follows from the previous one under `step`.
    /// Returns the first offending row index `t + 1`.
    pub fn replay<F>(&self, mut step: F) -> std::result::Result<(), usize>
    where
        F: FnMut(&Generation) -> Generation,
    {
        for (t, pair) in self.rows.windows(2).enumerate() {
            if step(&pair[0]) != pair[1] {
                return Err(t + 1);
            }
        }
        Ok(())
    }

    /// Cellwise XOR of two diagrams of identical shape (the damage pattern of twin runs).
    pub fn difference(&self, other: &SpaceTimeDiagram) -> Result<SpaceTimeDiagram> {
        if self.rows.len() != other.rows.len() || self.width() != other.width() {
            return Err(Error::InvalidArgument("diagrams differ in shape".into()));
        }
        Self::new(self.rows.iter().zip(&other.rows).map(|(a, b)| a.xor(b)).collect())
    }
}
