use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_alpha, ActionParams, Decimal};
use crate::error::ConfigError;

/// Candidate values for each of the eight α, in grid order.
pub type AlphaValues = [Vec<Decimal>; 8];

/// The reference discretisation: 3·3·5·5·5·5·4·2 = 45,000 actions.
pub fn reference_alpha_values() -> AlphaValues {
    let d = Decimal::from_milli;
    [
        vec![d(400), d(600), d(800)],
        vec![d(200), d(400), d(600)],
        vec![d(0), d(300), d(600), d(900), d(1200)],
        vec![d(0), d(300), d(600), d(900), d(1200)],
        vec![d(200), d(400), d(600), d(800), d(1000)],
        vec![d(200), d(400), d(600), d(800), d(1000)],
        vec![d(-40_000), d(-30_000), d(-20_000), d(-10_000)],
        vec![d(30_000), d(45_000)],
    ]
}

/// Full Cartesian product of the per-α value lists.
///
/// Order is lexicographic with α1 varying slowest and α8 fastest.
pub fn build_parameter_grid(values: &[Vec<Decimal>]) -> Result<Vec<ActionParams>, ConfigError> {
    if values.len() != 8 {
        return Err(ConfigError::AlphaListCount(values.len()));
    }
    for (i, list) in values.iter().enumerate() {
        if list.is_empty() {
            return Err(ConfigError::EmptyAlphaList(i + 1));
        }
        for (j, v) in list.iter().enumerate() {
            check_alpha(i + 1, *v)?;
            if list[..j].contains(v) {
                return Err(ConfigError::invalid(format!("alpha{}", i + 1), format!("duplicate value {v}")));
            }
        }
    }

    let total: usize = values.iter().map(Vec::len).product();
    let mut grid = Vec::with_capacity(total);
    let mut digits = [0usize; 8];
    for _ in 0..total {
        let mut alpha = [Decimal::ZERO; 8];
        for k in 0..8 {
            alpha[k] = values[k][digits[k]];
        }
        grid.push(ActionParams { alpha });
        // mixed-radix increment, least significant digit last
        for k in (0..8).rev() {
            digits[k] += 1;
            if digits[k] < values[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(grid)
}

/// Deterministic random subset of `grid` (without replacement), kept in grid order.
pub fn subsample_grid(grid: &[ActionParams], count: usize, seed: u64) -> Vec<ActionParams> {
    if count >= grid.len() {
        return grid.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, grid.len(), count).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| grid[i]).collect()
}
