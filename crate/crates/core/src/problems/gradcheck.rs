//! Central-difference gradient checking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::types::ParamVector;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Coordinate where `max_rel_error` occurred.
    pub worst_coordinate: usize,
    /// Index into the checked points where `max_rel_error` occurred.
    pub worst_point: usize,
    pub points_checked: usize,
    /// Points dropped because a probe evaluated to a non-finite value.
    pub points_skipped: usize,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.points_checked > 0 && self.max_rel_error < tolerance
    }
}

/// `|a - n| / max(1e-12, |a| + |n|)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-12)
}

/// Compares the analytic gradient of `objective` against central
/// differences `(f(θ + h eᵢ) - f(θ - h eᵢ)) / 2h` at every point and
/// coordinate.
pub fn gradcheck(
    objective: &dyn Objective,
    points: &[ParamVector],
    h: f64,
) -> Result<GradCheckReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("finite-difference step must be positive, got {h}")));
    }
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_coordinate: 0,
        worst_point: 0,
        points_checked: 0,
        points_skipped: 0,
    };
    'points: for (p, theta) in points.iter().enumerate() {
        if theta.dim() != objective.dim() {
            return Err(Error::Dimension {
                expected: objective.dim(),
                found: theta.dim(),
            });
        }
        let analytic = objective.grad(theta).to_dense();
        let mut probe = theta.to_vec();
        let mut errors = Vec::with_capacity(theta.dim());
        for i in 0..theta.dim() {
            let x = probe[i];
            probe[i] = x + h;
            let plus = objective.value(&probe);
            probe[i] = x - h;
            let minus = objective.value(&probe);
            probe[i] = x;
            if !plus.is_finite() || !minus.is_finite() || !analytic[i].is_finite() {
                report.points_skipped += 1;
                continue 'points;
            }
            let numeric = (plus - minus) / (2.0 * h);
            errors.push(relative_error(analytic[i], numeric));
        }
        report.points_checked += 1;
        for (i, e) in errors.into_iter().enumerate() {
            if e > report.max_rel_error {
                report.max_rel_error = e;
                report.worst_coordinate = i;
                report.worst_point = p;
            }
        }
    }
    Ok(report)
}

/// `count` points drawn uniformly from `[lo, hi]^dim`.
pub fn sample_points(dim: usize, lo: f64, hi: f64, count: usize, seed: u64) -> Vec<ParamVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = (0..dim).map(|_| rng.random_range(lo..=hi)).collect();
            ParamVector::new(v).expect("finite sample")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::GradientSample;

    struct HalfNormSq {
        dim: usize,
        grad_scale: f64,
    }

    impl Objective for HalfNormSq {
        fn name(&self) -> &str {
            "half-norm-sq"
        }
        fn dim(&self) -> usize {
            self.dim
        }
        fn value(&self, theta: &[f64]) -> f64 {
            0.5 * theta.iter().map(|x| x * x).sum::<f64>()
        }
        fn grad(&self, theta: &[f64]) -> GradientSample {
            GradientSample::Dense(theta.iter().map(|x| self.grad_scale * x).collect())
        }
    }

    struct Zero;

    impl Objective for Zero {
        fn name(&self) -> &str {
            "zero"
        }
        fn dim(&self) -> usize {
            3
        }
        fn value(&self, _: &[f64]) -> f64 {
            0.0
        }
        fn grad(&self, _: &[f64]) -> GradientSample {
            GradientSample::zeros(3)
        }
    }

    struct BlowsUp;

    impl Objective for BlowsUp {
        fn name(&self) -> &str {
            "blows-up"
        }
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, theta: &[f64]) -> f64 {
            if theta[0] > 1.0 {
                f64::NAN
            } else {
                theta[0]
            }
        }
        fn grad(&self, _: &[f64]) -> GradientSample {
            GradientSample::Dense(vec![1.0])
        }
    }

    #[test]
    fn quadratic_is_exact_up_to_roundoff() {
        let f = HalfNormSq {
            dim: 1,
            grad_scale: 1.0,
        };
        let pts = sample_points(1, -4.0, 4.0, 100, 5);
        let r = gradcheck(&f, &pts, 1e-5).unwrap();
        assert_eq!(r.points_checked, 100);
        assert!(r.max_rel_error < 1e-10, "{}", r.max_rel_error);
    }

    #[test]
    fn quadratic_error_is_bounded_by_evaluation_roundoff() {
        // In several dimensions the probe values carry an absolute error of
        // about ulp(f), so the difference quotient is off by ~ulp(f)/h.
        let h = 1e-5;
        let f = HalfNormSq {
            dim: 3,
            grad_scale: 1.0,
        };
        for theta in sample_points(3, -4.0, 4.0, 100, 5) {
            let bound = 4.0 * f64::EPSILON * f.value(&theta) / h;
            let r = gradcheck(&f, std::slice::from_ref(&theta), h).unwrap();
            let a = theta[r.worst_coordinate];
            let abs_err = r.max_rel_error * 2.0 * a.abs();
            assert!(abs_err <= bound, "{abs_err} > {bound}");
        }
    }

    #[test]
    fn detects_scaled_gradient() {
        let f = HalfNormSq {
            dim: 3,
            grad_scale: 1.01,
        };
        let r = gradcheck(&f, &sample_points(3, -4.0, 4.0, 20, 5), 1e-5).unwrap();
        assert!(r.max_rel_error > 1e-3);
    }

    #[test]
    fn zero_function_has_no_error() {
        let r = gradcheck(&Zero, &sample_points(3, -1.0, 1.0, 10, 1), 1e-5).unwrap();
        assert_eq!(r.max_rel_error, 0.0);
    }

    #[test]
    fn non_finite_probe_skips_point() {
        let pts = vec![
            ParamVector::new(vec![0.0]).unwrap(),
            ParamVector::new(vec![1.0]).unwrap(),
        ];
        let r = gradcheck(&BlowsUp, &pts, 1e-3).unwrap();
        assert_eq!(r.points_checked, 1);
        assert_eq!(r.points_skipped, 1);
    }

    #[test]
    fn rejects_bad_step() {
        assert!(gradcheck(&Zero, &[], 0.0).is_err());
    }
}
