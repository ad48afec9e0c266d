//! Example ordering and batching.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Batch size used when none is configured.
pub const DEFAULT_BATCH_SIZE: usize = 50;

/// How examples are ordered within an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpochPolicy {
    InOrder,
    #[default]
    Shuffle,
    /// Ascending difficulty.
    Sorted,
    /// Difficulty-sorted blocks, each shuffled internally. `None` uses
    /// blocks of 10% of the examples.
    Mixed { block: Option<usize> },
}

impl EpochPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            EpochPolicy::InOrder => "in_order",
            EpochPolicy::Shuffle => "shuffle",
            EpochPolicy::Sorted => "sorted",
            EpochPolicy::Mixed { .. } => "mixed",
        }
    }
}

impl fmt::Display for EpochPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EpochPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in_order" => Ok(EpochPolicy::InOrder),
            "shuffle" => Ok(EpochPolicy::Shuffle),
            "sorted" => Ok(EpochPolicy::Sorted),
            "mixed" => Ok(EpochPolicy::Mixed { block: None }),
            other => Err(Error::config(format!(
                "unknown data.policy `{other}`; valid: in_order, shuffle, sorted, mixed"
            ))),
        }
    }
}

/// The visiting order for one epoch. Always a permutation of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochPlan {
    pub order: Vec<usize>,
    pub policy: EpochPolicy,
}

/// Slices of an epoch plan, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    pub batches: Vec<Vec<usize>>,
    pub batch_size: usize,
}

impl BatchPlan {
    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    rng
}

fn sort_by_difficulty(order: &mut [usize], difficulty: &dyn Fn(usize) -> f64) {
    let keys: Vec<f64> = (0..order.len()).map(difficulty).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
}

/// Builds the ordering for epoch `epoch`. The plan is fully determined by
/// `(n_examples, policy, difficulty, seed, epoch)`.
pub fn make_epoch_plan(
    n_examples: usize,
    policy: EpochPolicy,
    difficulty: Option<&dyn Fn(usize) -> f64>,
    seed: u64,
    epoch: usize,
) -> Result<EpochPlan> {
    if n_examples == 0 {
        return Err(Error::config("epoch plan needs at least one example"));
    }
    let mut order: Vec<usize> = (0..n_examples).collect();
    match policy {
        EpochPolicy::InOrder => {}
        EpochPolicy::Shuffle => order.shuffle(&mut epoch_rng(seed, epoch)),
        EpochPolicy::Sorted | EpochPolicy::Mixed { .. } => {
            let difficulty = difficulty.ok_or_else(|| {
                Error::config(format!(
                    "data.policy `{policy}` needs a difficulty function"
                ))
            })?;
            sort_by_difficulty(&mut order, difficulty);
            if let EpochPolicy::Mixed { block } = policy {
                let block = match block {
                    Some(0) => return Err(Error::config("data.block must be positive")),
                    Some(b) => b,
                    None => (n_examples / 10).max(1),
                };
                let mut rng = epoch_rng(seed, epoch);
                for chunk in order.chunks_mut(block) {
                    chunk.shuffle(&mut rng);
                }
            }
        }
    }
    Ok(EpochPlan { order, policy })
}

/// Cuts `plan` into consecutive batches of `batch_size`; the last batch may
/// be shorter.
pub fn make_batches(plan: &EpochPlan, batch_size: usize) -> Result<BatchPlan> {
    if batch_size == 0 {
        return Err(Error::config("batch size must be positive"));
    }
    Ok(BatchPlan {
        batches: plan.order.chunks(batch_size).map(<[usize]>::to_vec).collect(),
        batch_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_permutation(order: &[usize]) -> bool {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        sorted.iter().copied().eq(0..order.len())
    }

    #[test]
    fn in_order_is_identity() {
        let p = make_epoch_plan(5, EpochPolicy::InOrder, None, 0, 0).unwrap();
        assert_eq!(p.order, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn sorted_by_negative_index_reverses() {
        let diff = |i: usize| -(i as f64);
        let p = make_epoch_plan(4, EpochPolicy::Sorted, Some(&diff), 0, 0).unwrap();
        assert_eq!(p.order, vec![3, 2, 1, 0]);
    }

    #[test]
    fn shuffle_is_a_nontrivial_permutation() {
        let p = make_epoch_plan(1000, EpochPolicy::Shuffle, None, 7, 0).unwrap();
        assert!(is_permutation(&p.order));
        assert!(p.order.iter().copied().ne(0..1000));
    }

    #[test]
    fn shuffle_changes_between_epochs_and_repeats_per_seed() {
        let a = make_epoch_plan(200, EpochPolicy::Shuffle, None, 7, 0).unwrap();
        let b = make_epoch_plan(200, EpochPolicy::Shuffle, None, 7, 1).unwrap();
        let again = make_epoch_plan(200, EpochPolicy::Shuffle, None, 7, 0).unwrap();
        assert_ne!(a.order, b.order);
        assert_eq!(a, again);
    }

    #[test]
    fn curriculum_requires_difficulty() {
        assert!(make_epoch_plan(5, EpochPolicy::Sorted, None, 0, 0).is_err());
        assert!(make_epoch_plan(5, EpochPolicy::Mixed { block: None }, None, 0, 0).is_err());
        assert!(make_epoch_plan(0, EpochPolicy::InOrder, None, 0, 0).is_err());
    }

    #[test]
    fn mixed_keeps_blocks_sorted_relative_to_each_other() {
        let diff = |i: usize| ((i * 37) % 100) as f64;
        let p = make_epoch_plan(100, EpochPolicy::Mixed { block: Some(10) }, Some(&diff), 3, 0)
            .unwrap();
        assert!(is_permutation(&p.order));
        for pair in p.order.chunks(10).collect::<Vec<_>>().windows(2) {
            let max_prev = pair[0].iter().map(|&i| diff(i)).fold(f64::MIN, f64::max);
            let min_next = pair[1].iter().map(|&i| diff(i)).fold(f64::MAX, f64::min);
            assert!(max_prev <= min_next);
        }
    }

    #[test]
    fn batch_sizes() {
        let p = make_epoch_plan(10, EpochPolicy::InOrder, None, 0, 0).unwrap();
        let sizes: Vec<usize> = make_batches(&p, 3).unwrap().batches.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
        assert_eq!(make_batches(&p, 10).unwrap().len(), 1);
        assert_eq!(make_batches(&p, 50).unwrap().len(), 1);
        let singles = make_batches(&p, 1).unwrap();
        assert_eq!(singles.len(), 10);
        assert!(make_batches(&p, 0).is_err());
    }

    #[test]
    fn policy_names_parse() {
        for name in ["in_order", "shuffle", "sorted", "mixed"] {
            assert_eq!(name.parse::<EpochPolicy>().unwrap().name(), name);
        }
        assert!("random".parse::<EpochPolicy>().is_err());
    }
}
