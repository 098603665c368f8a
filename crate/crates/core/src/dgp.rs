//! Synthetic series generators: pure random walks and a multiple-bubble
//! process with ground-truth episode labels, for power and recovery testing.
//!
//! The bubble process follows a random walk outside episodes and an
//! explosive autoregression `x_t = delta * x_{t-1} + eps_t` inside them.
//! After an episode the level re-initializes: by default it collapses back
//! to the level at the episode's origination plus one fresh innovation.
//! The post-collapse level distribution is genuinely a modeling choice;
//! both provided policies are approximations and are labeled as such.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::series::Series;

/// Post-episode re-initialization policy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Reinit {
    /// Resume at the level the episode originated from, plus one fresh
    /// innovation.
    #[default]
    PreBubbleLevel,
    /// Resume at a fixed level, plus one fresh innovation.
    Fixed(f64),
}

/// Specification of a multiple-bubble generating process.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub t_len: usize,
    /// Episode intervals as sample fractions in (0, 1), ordered and
    /// pairwise disjoint.
    pub episodes: Vec<(f64, f64)>,
    /// Explosive root, > 1.
    pub delta: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub reinit: Reinit,
}

/// A synthetic series together with its true episode index ranges
/// (inclusive observation indices).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub series: Series,
    pub true_episodes: Vec<(usize, usize)>,
}

/// Base level of all synthetic series.
pub const BASE_LEVEL: f64 = 100.0;

/// Pure random walk: x_0 = 100, x_t = x_{t-1} + eps_t, eps ~ N(0, sd^2),
/// on a synthetic monthly calendar starting 2000-01.
pub fn gen_random_walk(t_len: usize, noise_sd: f64, seed: u64) -> Result<Series> {
    if t_len < 1 {
        return Err(Error::InvalidSpec("t must be at least 1".into()));
    }
    if !(noise_sd > 0.0) || !noise_sd.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "noise_sd must be a positive finite number, got {noise_sd}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sd).expect("validated sd");
    let mut values = Vec::with_capacity(t_len);
    let mut level = BASE_LEVEL;
    values.push(level);
    for _ in 1..t_len {
        level += normal.sample(&mut rng);
        values.push(level);
    }
    Series::synthetic_monthly("random-walk", values)
}

fn resolve_episodes(spec: &DgpSpec) -> Result<Vec<(usize, usize)>> {
    let t = spec.t_len as f64;
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(spec.episodes.len());
    for &(a, b) in &spec.episodes {
        if !(a > 0.0 && b < 1.0 && a < b) {
            return Err(Error::InvalidSpec(format!(
                "episode fractions must satisfy 0 < start < end < 1, got ({a}, {b})"
            )));
        }
        let start = (a * t).round() as usize;
        let end = (b * t).round() as usize;
        if start < 1 || end >= spec.t_len || start > end {
            return Err(Error::InvalidSpec(format!(
                "episode ({a}, {b}) maps to unusable indices ({start}, {end}) at T={}",
                spec.t_len
            )));
        }
        if let Some(&(_, prev_end)) = out.last() {
            // Need the collapse observation between episodes.
            if start <= prev_end + 1 {
                return Err(Error::InvalidSpec(format!(
                    "episodes overlap after rounding: previous ends at {prev_end}, next starts at {start}"
                )));
            }
        }
        out.push((start, end));
    }
    Ok(out)
}

/// Generate a multiple-bubble series with ground-truth labels.
///
/// One innovation is consumed per observation regardless of regime, so a
/// spec with no episodes reproduces [`gen_random_walk`] exactly.
pub fn gen_multi_bubble(spec: &DgpSpec) -> Result<LabeledSeries> {
    if spec.t_len < 20 {
        return Err(Error::InvalidSpec(format!(
            "t must be at least 20, got {}",
            spec.t_len
        )));
    }
    if !(spec.delta > 1.0) || !spec.delta.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "delta must be a finite number > 1, got {}",
            spec.delta
        )));
    }
    if !(spec.noise_sd > 0.0) || !spec.noise_sd.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "noise_sd must be a positive finite number, got {}",
            spec.noise_sd
        )));
    }
    let episodes = resolve_episodes(spec)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.noise_sd).expect("validated sd");
    let mut values = Vec::with_capacity(spec.t_len);
    let mut level = BASE_LEVEL;
    values.push(level);

    let mut ep_iter = 0usize;
    for t in 1..spec.t_len {
        let eps: f64 = normal.sample(&mut rng);
        // Advance past episodes that ended before the collapse point.
        while ep_iter < episodes.len() && t > episodes[ep_iter].1 + 1 {
            ep_iter += 1;
        }
        let in_episode = ep_iter < episodes.len()
            && t >= episodes[ep_iter].0
            && t <= episodes[ep_iter].1;
        let collapse_of = (ep_iter < episodes.len() && t == episodes[ep_iter].1 + 1)
            .then(|| episodes[ep_iter]);

        level = if in_episode {
            spec.delta * level + eps
        } else if let Some((start, _)) = collapse_of {
            match spec.reinit {
                Reinit::PreBubbleLevel => values[start] + eps,
                Reinit::Fixed(v) => v + eps,
            }
        } else {
            level + eps
        };
        values.push(level);
    }

    let series = Series::synthetic_monthly("multi-bubble", values)?;
    Ok(LabeledSeries {
        series,
        true_episodes: episodes,
    })
}
