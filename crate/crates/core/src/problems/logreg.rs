//! Synthetic sparse logistic regression.
//!
//! Labels come from a planted hyperplane with a handful of nonzero
//! coefficients, flipped with a small probability. Every row carries one
//! feature from the planted support plus uniformly drawn extras, so each
//! example has a nonzero margin against the generating hyperplane.

use std::io::Write;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::types::GradientSample;

/// Fraction of labels flipped after generation.
pub const LABEL_NOISE: f64 = 0.05;
/// Nonzero coefficients in the planted hyperplane.
pub const PLANTED_NONZEROS: usize = 10;

/// One example: sorted feature indices, their values and a ±1 label.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub label: f64,
}

impl SparseRow {
    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| theta[i] * v)
            .sum()
    }

    /// `ln(1 + exp(-y⟨x, θ⟩))`
    pub fn loss(&self, theta: &[f64]) -> f64 {
        softplus(-self.label * self.dot(theta))
    }

    /// Scalar `c` such that the per-example gradient is `c · x`.
    pub fn grad_scale(&self, theta: &[f64]) -> f64 {
        let margin = self.label * self.dot(theta);
        -self.label * sigmoid(-margin)
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic regression over sparse rows with a held-out validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLogReg {
    pub dim: usize,
    pub density: f64,
    pub seed: u64,
    pub rows: Vec<SparseRow>,
    /// Held-out rows generated from the same stream, one quarter the size
    /// of the training set (20% of everything generated).
    pub validation: Vec<SparseRow>,
    /// Planted hyperplane as sorted `(index, coefficient)` pairs.
    pub planted: Vec<(usize, f64)>,
}

impl SparseLogReg {
    /// Generates `n` training rows in dimension `d`, each with
    /// `round(density · d)` (at least one) nonzero features.
    pub fn generate(n: usize, d: usize, density: f64, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::config("logreg needs n ≥ 1 and d ≥ 1"));
        }
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::config(format!(
                "logreg density must lie in (0, 1], got {density}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let support_len = PLANTED_NONZEROS.min(d);
        let mut support = index::sample(&mut rng, d, support_len).into_vec();
        support.sort_unstable();
        let planted: Vec<(usize, f64)> = support
            .iter()
            .map(|&i| {
                let magnitude: f64 = rng.random_range(1.0..2.0);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (i, sign * magnitude)
            })
            .collect();

        let nnz = ((density * d as f64).round() as usize).clamp(1, d);
        let n_val = (n / 4).max(1);
        let make_row = |rng: &mut ChaCha8Rng| {
            let anchor = support[rng.random_range(0..support_len)];
            let mut indices = vec![anchor];
            if nnz > 1 {
                // Draw the extras from the d - 1 other coordinates.
                for j in index::sample(rng, d - 1, nnz - 1) {
                    indices.push(if j >= anchor { j + 1 } else { j });
                }
            }
            indices.sort_unstable();
            let values: Vec<f64> = indices.iter().map(|_| rng.sample(StandardNormal)).collect();
            let margin: f64 = indices
                .iter()
                .zip(&values)
                .filter_map(|(i, v)| {
                    planted
                        .binary_search_by_key(i, |p| p.0)
                        .ok()
                        .map(|k| planted[k].1 * v)
                })
                .sum();
            let mut label = if margin >= 0.0 { 1.0 } else { -1.0 };
            if rng.random_bool(LABEL_NOISE) {
                label = -label;
            }
            SparseRow {
                indices,
                values,
                label,
            }
        };
        let rows: Vec<SparseRow> = (0..n).map(|_| make_row(&mut rng)).collect();
        let validation: Vec<SparseRow> = (0..n_val).map(|_| make_row(&mut rng)).collect();
        Ok(SparseLogReg {
            dim: d,
            density,
            seed,
            rows,
            validation,
            planted,
        })
    }

    /// Observed fraction of nonzero features over all training rows.
    pub fn observed_density(&self) -> f64 {
        let nnz: usize = self.rows.iter().map(SparseRow::nnz).sum();
        nnz as f64 / (self.rows.len() * self.dim) as f64
    }

    /// Signed distance of row `i` from the generating hyperplane.
    pub fn planted_margin(&self, i: usize) -> f64 {
        let row = &self.rows[i];
        let norm = self.planted.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt();
        let dot: f64 = self
            .planted
            .iter()
            .filter_map(|&(j, w)| {
                row.indices
                    .binary_search(&j)
                    .ok()
                    .map(|k| w * row.values[k])
            })
            .sum();
        dot / norm
    }

    fn check_indices(&self, examples: &[usize]) -> Result<()> {
        if examples.is_empty() {
            return Err(Error::config("empty example index set"));
        }
        if let Some(&bad) = examples.iter().find(|&&i| i >= self.rows.len()) {
            return Err(Error::config(format!(
                "example index {bad} out of range for {} examples",
                self.rows.len()
            )));
        }
        Ok(())
    }

    /// Gradient of one example, supported exactly on its features.
    pub fn example_grad(&self, theta: &[f64], example: usize) -> GradientSample {
        let row = &self.rows[example];
        let c = row.grad_scale(theta);
        GradientSample::Sparse {
            dim: self.dim,
            entries: row.indices.iter().zip(&row.values).map(|(&i, v)| (i, c * v)).collect(),
        }
    }

    /// Writes one line per training example:
    /// `label idx:val idx:val ...` with zero-based indices.
    pub fn write_dataset<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in &self.rows {
            write!(out, "{}", if row.label > 0.0 { "+1" } else { "-1" })?;
            for (i, v) in row.indices.iter().zip(&row.values) {
                write!(out, " {i}:{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Mean gradient over `examples` as a sparse sample.
pub fn sparse_logreg_grad_on(
    problem: &SparseLogReg,
    theta: &[f64],
    examples: &[usize],
) -> Result<GradientSample> {
    problem.check_indices(examples)?;
    let mut pairs: Vec<(usize, f64)> = Vec::with_capacity(examples.len() * 16);
    for &e in examples {
        let row = &problem.rows[e];
        let c = row.grad_scale(theta);
        pairs.extend(row.indices.iter().zip(&row.values).map(|(&i, v)| (i, c * v)));
    }
    pairs.sort_by_key(|p| p.0);
    let scale = 1.0 / examples.len() as f64;
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
    for (i, v) in pairs {
        match entries.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => entries.push((i, v)),
        }
    }
    for e in &mut entries {
        e.1 *= scale;
    }
    Ok(GradientSample::Sparse {
        dim: problem.dim,
        entries,
    })
}

impl Objective for SparseLogReg {
    fn name(&self) -> &str {
        "logreg"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.loss(theta)).sum::<f64>() / self.rows.len() as f64
    }

    fn grad(&self, theta: &[f64]) -> GradientSample {
        let mut g = vec![0.0; self.dim];
        for row in &self.rows {
            let c = row.grad_scale(theta);
            for (&i, v) in row.indices.iter().zip(&row.values) {
                g[i] += c * v;
            }
        }
        let n = self.rows.len() as f64;
        g.iter_mut().for_each(|x| *x /= n);
        GradientSample::Dense(g)
    }

    fn n_examples(&self) -> usize {
        self.rows.len()
    }

    fn value_on(&self, theta: &[f64], examples: &[usize]) -> Result<f64> {
        self.check_indices(examples)?;
        Ok(examples.iter().map(|&e| self.rows[e].loss(theta)).sum::<f64>() / examples.len() as f64)
    }

    fn grad_on(&self, theta: &[f64], examples: &[usize]) -> Result<GradientSample> {
        sparse_logreg_grad_on(self, theta, examples)
    }

    fn validation_value(&self, theta: &[f64]) -> f64 {
        self.validation.iter().map(|r| r.loss(theta)).sum::<f64>() / self.validation.len() as f64
    }

    /// Closer to the generating hyperplane is harder.
    fn difficulty(&self, example: usize) -> Option<f64> {
        Some(-self.planted_margin(example).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseLogReg {
        SparseLogReg::generate(300, 80, 0.05, 11).unwrap()
    }

    #[test]
    fn zero_weights_give_ln2_per_example() {
        let p = small();
        let theta = vec![0.0; p.dim];
        for i in 0..p.rows.len() {
            let l = p.value_on(&theta, &[i]).unwrap();
            assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn rows_are_sorted_and_dense_enough() {
        let p = small();
        for row in &p.rows {
            assert!(row.indices.windows(2).all(|w| w[0] < w[1]));
            assert!(row.indices.iter().all(|&i| i < p.dim));
            assert!(row.label == 1.0 || row.label == -1.0);
        }
        let ratio = p.observed_density() / p.density;
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");
        assert_eq!(p.validation.len(), 75);
    }

    #[test]
    fn generation_is_reproducible() {
        let a = small();
        let b = small();
        assert_eq!(a, b);
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        a.write_dataset(&mut ba).unwrap();
        b.write_dataset(&mut bb).unwrap();
        assert_eq!(ba, bb);
        assert_ne!(a, SparseLogReg::generate(300, 80, 0.05, 12).unwrap());
    }

    #[test]
    fn example_gradient_support_matches_features() {
        let p = small();
        let theta: Vec<f64> = (0..p.dim).map(|i| (i as f64 * 0.37).sin()).collect();
        for i in 0..p.rows.len() {
            let g = p.grad_on(&theta, &[i]).unwrap();
            let GradientSample::Sparse { entries, .. } = g else {
                panic!("expected sparse gradient");
            };
            let support: Vec<usize> = entries.iter().map(|e| e.0).collect();
            assert!(support.iter().all(|j| p.rows[i].indices.contains(j)));
        }
    }

    #[test]
    fn empty_batch_is_rejected() {
        let p = small();
        assert!(p.grad_on(&vec![0.0; p.dim], &[]).is_err());
        assert!(p.value_on(&vec![0.0; p.dim], &[1_000_000]).is_err());
    }

    #[test]
    fn export_format() {
        let p = SparseLogReg::generate(3, 10, 0.2, 1).unwrap();
        let mut buf = Vec::new();
        p.write_dataset(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        for line in text.lines() {
            let mut parts = line.split(' ');
            assert!(matches!(parts.next(), Some("+1") | Some("-1")));
            let feats: Vec<&str> = parts.collect();
            assert_eq!(feats.len(), 2);
            for f in feats {
                let (i, v) = f.split_once(':').unwrap();
                assert!(i.parse::<usize>().unwrap() < 10);
                v.parse::<f64>().unwrap();
            }
        }
    }

    #[test]
    fn stable_loss_for_large_margins() {
        let row = SparseRow {
            indices: vec![0],
            values: vec![1.0],
            label: 1.0,
        };
        assert!(row.loss(&[800.0]) >= 0.0);
        assert!((row.loss(&[-800.0]) - 800.0).abs() < 1e-9);
        assert!(row.grad_scale(&[-800.0]).is_finite());
    }
}
