use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Embedded element power pattern `|F(u)|²`, shared by every slot.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementPattern {
    #[default]
    Isotropic,
    /// Tabulated samples, linearly interpolated and clamped at the ends.
    Tabulated { u: Vec<f64>, power: Vec<f64> },
}

impl ElementPattern {
    pub fn tabulated(u: Vec<f64>, power: Vec<f64>) -> Result<Self> {
        if u.len() != power.len() || u.len() < 2 {
            return Err(Error::InvalidElementPattern(
                "need at least two (u, power) pairs of equal length".into(),
            ));
        }
        if u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidElementPattern(
                "u grid must be strictly increasing".into(),
            ));
        }
        if power.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidElementPattern(
                "power values must be finite and non-negative".into(),
            ));
        }
        let pattern = Self::Tabulated { u, power };
        if pattern.power(0.0) <= 0.0 {
            return Err(Error::InvalidElementPattern(
                "pattern must be positive at broadside".into(),
            ));
        }
        Ok(pattern)
    }

    /// `cos^q`-type element, `|F(u)|² = (1 - u²)^{q/2}` tabulated on `n` points.
    pub fn cosine_power(q: f64, n: usize) -> Result<Self> {
        let u: Vec<f64> = (0..n)
            .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
            .collect();
        let power = u.iter().map(|x: &f64| (1.0 - x * x).max(0.0).powf(q / 2.0)).collect();
        Self::tabulated(u, power)
    }

    pub fn power(&self, u: f64) -> f64 {
        match self {
            Self::Isotropic => 1.0,
            Self::Tabulated { u: grid, power } => {
                let n = grid.len();
                if u <= grid[0] {
                    return power[0];
                }
                if u >= grid[n - 1] {
                    return power[n - 1];
                }
                let i = grid.partition_point(|&x| x <= u) - 1;
                let t = (u - grid[i]) / (grid[i + 1] - grid[i]);
                power[i] + t * (power[i + 1] - power[i])
            }
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self, Self::Isotropic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation() {
        let e = ElementPattern::tabulated(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.5]).unwrap();
        assert_eq!(e.power(0.0), 1.0);
        assert_eq!(e.power(-0.5), 0.5);
        assert_eq!(e.power(0.5), 0.75);
        assert_eq!(e.power(2.0), 0.5);
        assert_eq!(ElementPattern::Isotropic.power(0.3), 1.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ElementPattern::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(ElementPattern::tabulated(vec![-1.0, 1.0], vec![1.0]).is_err());
        assert!(ElementPattern::tabulated(vec![-1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]).is_err());
        assert!(ElementPattern::tabulated(vec![-1.0, 1.0], vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn cosine_element() {
        let e = ElementPattern::cosine_power(1.0, 201).unwrap();
        assert!((e.power(0.0) - 1.0).abs() < 1e-12);
        assert!(e.power(0.99) < 0.2);
    }
}
