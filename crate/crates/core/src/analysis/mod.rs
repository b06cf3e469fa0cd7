//! Quantitative characterization of space-time diagrams.

pub mod damage;
pub mod ether;
pub mod fractal;
pub mod gliders;
pub mod randomness;

pub use damage::{damage_spreading, DamageReport};

pub use ether::{detect_ether, filter_ether, EtherTiling};
pub use fractal::{box_counting_dimension, power_of_two_sizes, FractalReport};
pub use gliders::{extract_glider_events, same_velocities, EventKind, GliderEvent, Track};

pub use randomness::{middle_column_bits, randomness_battery, RandomnessReport};

/// Ordinary least-squares line through `(x, y)`: returns `(slope, intercept, r²)`.
///
/// `r²` is reported as 1 when `y` has no variance (the line is exact).
pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        return (0.0, y.first().copied().unwrap_or(0.0), 1.0);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 1.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::least_squares;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (m, c, r2) = least_squares(&x, &y);
        assert!((m - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert_eq!(least_squares(&x, &[4.0; 4]), (0.0, 4.0, 1.0));
    }
}
