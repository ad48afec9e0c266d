//! Two-dimensional analytic test surfaces.

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::types::{GradientSample, ParamVector};

/// Axis-aligned box in the plane, used for plotting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl DomainBox {
    pub const fn square(half: f64) -> Self {
        DomainBox {
            x_min: -half,
            x_max: half,
            y_min: -half,
            y_max: half,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

/// A plane objective with a canonical start and a plotting box.
pub trait AnalyticSurface: Objective {
    fn canonical_start(&self) -> ParamVector;

    /// Global minimizer and its value, when there is one.
    fn known_minimum(&self) -> Option<(ParamVector, f64)>;

    fn domain(&self) -> DomainBox;

    /// Whether contour levels should be log-spaced.
    fn log_levels(&self) -> bool;

    /// Points outside the plotting box are still evaluated but reported as
    /// off-chart.
    fn off_chart(&self, theta: &[f64]) -> bool {
        !self.domain().contains(theta[0], theta[1])
    }
}

fn xy(theta: &[f64]) -> (f64, f64) {
    assert_eq!(theta.len(), 2, "surface objectives are two-dimensional");
    (theta[0], theta[1])
}

fn point(x: f64, y: f64) -> ParamVector {
    ParamVector::new(vec![x, y]).expect("finite constant")
}

/// `f(x, y) = (1.5 - x + xy)² + (2.25 - x + xy²)² + (2.625 - x + xy³)²`,
/// minimum 0 at (3, 0.5).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beale {
    pub start: (f64, f64),
}

impl Beale {
    pub const CANONICAL_START: (f64, f64) = (3.0, 0.75);

    pub fn residuals(x: f64, y: f64) -> [f64; 3] {
        [
            1.5 - x + x * y,
            2.25 - x + x * y * y,
            2.625 - x + x * y * y * y,
        ]
    }

    pub fn with_start(x: f64, y: f64) -> Self {
        Beale { start: (x, y) }
    }
}

impl Default for Beale {
    fn default() -> Self {
        Beale {
            start: Self::CANONICAL_START,
        }
    }
}

impl Objective for Beale {
    fn name(&self) -> &str {
        "beale"
    }

    fn dim(&self) -> usize {
        2
    }

    fn initial_point(&self) -> ParamVector {
        self.canonical_start()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let (x, y) = xy(theta);
        Self::residuals(x, y).iter().map(|r| r * r).sum()
    }

    fn grad(&self, theta: &[f64]) -> GradientSample {
        let (x, y) = xy(theta);
        let [r1, r2, r3] = Self::residuals(x, y);
        let y2 = y * y;
        let y3 = y2 * y;
        let gx = 2.0 * (r1 * (y - 1.0) + r2 * (y2 - 1.0) + r3 * (y3 - 1.0));
        let gy = 2.0 * x * (r1 + 2.0 * r2 * y + 3.0 * r3 * y2);
        GradientSample::Dense(vec![gx, gy])
    }
}

impl AnalyticSurface for Beale {
    fn canonical_start(&self) -> ParamVector {
        point(self.start.0, self.start.1)
    }

    fn known_minimum(&self) -> Option<(ParamVector, f64)> {
        Some((point(3.0, 0.5), 0.0))
    }

    fn domain(&self) -> DomainBox {
        DomainBox::square(4.5)
    }

    fn log_levels(&self) -> bool {
        true
    }
}

/// `f(x, y) = x² - y²`, saddle at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saddle {
    pub start: (f64, f64),
}

impl Saddle {
    /// Slightly off the saddle so that symmetry can break.
    pub const CANONICAL_START: (f64, f64) = (-0.001, 0.0001);
}

impl Default for Saddle {
    fn default() -> Self {
        Saddle {
            start: Self::CANONICAL_START,
        }
    }
}

impl Objective for Saddle {
    fn name(&self) -> &str {
        "saddle"
    }

    fn dim(&self) -> usize {
        2
    }

    fn initial_point(&self) -> ParamVector {
        self.canonical_start()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let (x, y) = xy(theta);
        x * x - y * y
    }

    fn grad(&self, theta: &[f64]) -> GradientSample {
        let (x, y) = xy(theta);
        GradientSample::Dense(vec![2.0 * x, -2.0 * y])
    }
}

impl AnalyticSurface for Saddle {
    fn canonical_start(&self) -> ParamVector {
        point(self.start.0, self.start.1)
    }

    fn known_minimum(&self) -> Option<(ParamVector, f64)> {
        None
    }

    fn domain(&self) -> DomainBox {
        DomainBox::square(1.5)
    }

    fn log_levels(&self) -> bool {
        false
    }
}

/// Ill-conditioned quadratic `f(x, y) = ½(x² + a y²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ravine {
    pub curvature: f64,
    pub start: (f64, f64),
}

impl Ravine {
    pub const DEFAULT_CURVATURE: f64 = 100.0;
    pub const CANONICAL_START: (f64, f64) = (-5.0, 1.0);

    pub fn new(curvature: f64) -> Result<Self> {
        if !(curvature >= 1.0 && curvature.is_finite()) {
            return Err(Error::config(format!(
                "ravine curvature must be at least 1, got {curvature}"
            )));
        }
        Ok(Ravine {
            curvature,
            start: Self::CANONICAL_START,
        })
    }
}

impl Default for Ravine {
    fn default() -> Self {
        Ravine {
            curvature: Self::DEFAULT_CURVATURE,
            start: Self::CANONICAL_START,
        }
    }
}

impl Objective for Ravine {
    fn name(&self) -> &str {
        "ravine"
    }

    fn dim(&self) -> usize {
        2
    }

    fn initial_point(&self) -> ParamVector {
        self.canonical_start()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let (x, y) = xy(theta);
        0.5 * (x * x + self.curvature * y * y)
    }

    fn grad(&self, theta: &[f64]) -> GradientSample {
        let (x, y) = xy(theta);
        GradientSample::Dense(vec![x, self.curvature * y])
    }
}

impl AnalyticSurface for Ravine {
    fn canonical_start(&self) -> ParamVector {
        point(self.start.0, self.start.1)
    }

    fn known_minimum(&self) -> Option<(ParamVector, f64)> {
        Some((point(0.0, 0.0), 0.0))
    }

    fn domain(&self) -> DomainBox {
        DomainBox {
            x_min: -6.0,
            x_max: 6.0,
            y_min: -2.0,
            y_max: 2.0,
        }
    }

    fn log_levels(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beale_minimum_and_origin() {
        let b = Beale::default();
        assert_eq!(b.value(&[3.0, 0.5]), 0.0);
        assert_eq!(b.grad(&[3.0, 0.5]).to_dense(), vec![0.0, 0.0]);
        assert_eq!(b.value(&[0.0, 0.0]), 14.203125);
    }

    #[test]
    fn saddle_examples() {
        let s = Saddle::default();
        assert_eq!(s.value(&[0.0, 0.0]), 0.0);
        assert_eq!(s.grad(&[0.0, 0.0]).to_dense(), vec![0.0, 0.0]);
        assert_eq!(s.value(&[1.0, 2.0]), -3.0);
        assert_eq!(s.grad(&[1.0, 2.0]).to_dense(), vec![2.0, -4.0]);
        for (x, y) in [(0.3, -1.7), (2.0, 5.0), (-4.0, 0.25)] {
            assert_eq!(s.value(&[x, y]), -s.value(&[y, x]));
        }
    }

    #[test]
    fn ravine_examples() {
        let r = Ravine::default();
        assert_eq!(r.value(&[0.0, 0.0]), 0.0);
        assert_eq!(r.grad(&[1.0, 1.0]).to_dense(), vec![1.0, 100.0]);
        assert!(Ravine::new(0.5).is_err());
    }

    #[test]
    fn off_chart_flag() {
        let b = Beale::default();
        assert!(!b.off_chart(&[0.0, 0.0]));
        assert!(b.off_chart(&[5.0, 0.0]));
        assert!(b.value(&[5.0, 0.0]).is_finite());
    }
}
