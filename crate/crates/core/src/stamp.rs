//! Date-stamping: convert a BSADF sequence and a critical-value sequence
//! into dated exuberance episodes.
//!
//! An episode is a maximal run of consecutive endpoints whose statistic
//! strictly exceeds the critical value; runs shorter than the minimum
//! duration are discarded. Separate runs are never bridged: distinct spikes
//! are distinct events.

use chrono::NaiveDate;
use serde::Serialize;

use crate::critical::CvSequence;
use crate::detect::BsadfSequence;
use crate::error::{Error, Result};
use crate::series::Series;

/// A dated exuberance episode. Indices are positions in the BSADF sequence;
/// endpoint `k` describes the window ending at series observation
/// `k + min_window - 1`, which is the date attached here.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Episode {
    pub start_index: usize,
    pub end_index: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub peak_index: usize,
    pub peak_stat: f64,
    pub peak_date: NaiveDate,
}

impl Episode {
    pub fn duration(&self) -> usize {
        self.end_index - self.start_index + 1
    }
}

/// Stamping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StampConfig {
    /// Minimum run length in observations.
    pub min_duration: usize,
    /// Quantile level the critical-value sequence was computed at.
    pub level: f64,
}

/// Standard minimum duration rule: `ceil(ln T)` observations.
pub fn default_min_duration(t: usize) -> usize {
    debug_assert!(t >= 2);
    (t as f64).ln().ceil() as usize
}

/// Extract episodes from the exceedance pattern `stat > cv`.
pub fn stamp(
    bsadf: &BsadfSequence,
    cv: &CvSequence,
    cfg: &StampConfig,
    series: &Series,
) -> Result<Vec<Episode>> {
    if bsadf.stats.len() != cv.values.len() {
        return Err(Error::LengthMismatch {
            left: bsadf.stats.len(),
            right: cv.values.len(),
        });
    }
    if cfg.min_duration < 1 {
        return Err(Error::InvalidConfig("min_duration must be >= 1".into()));
    }
    match bsadf.endpoints.last() {
        Some(&last) if last == series.len() - 1 => {}
        _ => {
            return Err(Error::LengthMismatch {
                left: bsadf.endpoints.last().map_or(0, |e| e + 1),
                right: series.len(),
            });
        }
    }

    let exceeds: Vec<bool> = bsadf
        .stats
        .iter()
        .zip(&cv.values)
        .map(|(stat, cv)| stat.is_some_and(|s| s > *cv))
        .collect();

    let mut episodes = Vec::new();
    let mut run_start: Option<usize> = None;
    for k in 0..=exceeds.len() {
        let on = k < exceeds.len() && exceeds[k];
        match (run_start, on) {
            (None, true) => run_start = Some(k),
            (Some(start), false) => {
                let end = k - 1;
                if end - start + 1 >= cfg.min_duration {
                    episodes.push(build_episode(bsadf, series, start, end));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    Ok(episodes)
}

fn build_episode(bsadf: &BsadfSequence, series: &Series, start: usize, end: usize) -> Episode {
    let mut peak_index = start;
    let mut peak_stat = f64::NEG_INFINITY;
    for k in start..=end {
        let s = bsadf.stats[k].expect("exceeding endpoint has a statistic");
        if s > peak_stat {
            peak_stat = s;
            peak_index = k;
        }
    }
    let date_at = |k: usize| series.timestamps()[bsadf.endpoints[k]];
    Episode {
        start_index: start,
        end_index: end,
        start_date: date_at(start),
        end_date: date_at(end),
        peak_index,
        peak_stat,
        peak_date: date_at(peak_index),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fake_sequences(stats: Vec<Option<f64>>, cv: Vec<f64>, w0: usize) -> (BsadfSequence, CvSequence, Series) {
        let n = stats.len();
        let t_len = n + w0 - 1;
        let series =
            Series::synthetic_monthly("fake", (0..t_len).map(|i| 100.0 + i as f64).collect())
                .unwrap();
        let bsadf = BsadfSequence {
            min_window: w0,
            endpoints: (w0 - 1..t_len).collect(),
            stats,
            argmax_start: vec![Some(0); n],
            skipped_windows: 0,
        };
        let cv = CvSequence {
            level: 0.95,
            values: cv,
        };
        (bsadf, cv, series)
    }

    #[test]
    fn min_duration_rule_examples() {
        assert_eq!(default_min_duration(200), 6);
        assert_eq!(default_min_duration(20), 3);
        assert_eq!(default_min_duration(2), 1);
    }

    #[test]
    fn short_crossings_are_discarded() {
        let stats = vec![-1.0, 0.5, 2.0, 2.5, 1.8, 0.4, 2.2, 0.1]
            .into_iter()
            .map(Some)
            .collect();
        let (bsadf, cv, series) = fake_sequences(stats, vec![1.0; 8], 5);
        let cfg = StampConfig {
            min_duration: 2,
            level: 0.95,
        };
        let episodes = stamp(&bsadf, &cv, &cfg, &series).unwrap();
        assert_eq!(episodes.len(), 1);
        let ep = &episodes[0];
        assert_eq!((ep.start_index, ep.end_index), (2, 4));
        assert_eq!(ep.peak_index, 3);
        assert_eq!(ep.peak_stat, 2.5);
        // Endpoint k maps to series observation k + w0 - 1.
        assert_eq!(ep.start_date, series.timestamps()[2 + 5 - 1]);
    }

    #[test]
    fn all_below_threshold_yields_no_episodes() {
        let stats = vec![Some(0.1), Some(-0.3), Some(0.6)];
        let (bsadf, cv, series) = fake_sequences(stats, vec![1.0; 3], 4);
        let cfg = StampConfig {
            min_duration: 1,
            level: 0.95,
        };
        assert!(stamp(&bsadf, &cv, &cfg, &series).unwrap().is_empty());
    }

    #[test]
    fn runs_separated_by_a_dip_stay_distinct() {
        let stats = vec![2.0, 2.0, 0.5, 2.0, 2.0].into_iter().map(Some).collect();
        let (bsadf, cv, series) = fake_sequences(stats, vec![1.0; 5], 4);
        let cfg = StampConfig {
            min_duration: 2,
            level: 0.95,
        };
        let episodes = stamp(&bsadf, &cv, &cfg, &series).unwrap();
        assert_eq!(episodes.len(), 2);
        assert_eq!((episodes[0].start_index, episodes[0].end_index), (0, 1));
        assert_eq!((episodes[1].start_index, episodes[1].end_index), (3, 4));
    }

    #[test]
    fn equality_with_the_threshold_is_not_exceedance() {
        let stats = vec![Some(1.0), Some(1.0), Some(1.0)];
        let (bsadf, cv, series) = fake_sequences(stats, vec![1.0; 3], 4);
        let cfg = StampConfig {
            min_duration: 1,
            level: 0.95,
        };
        assert!(stamp(&bsadf, &cv, &cfg, &series).unwrap().is_empty());
    }

    #[test]
    fn flagged_endpoints_break_runs() {
        let stats = vec![Some(2.0), None, Some(2.0), Some(2.0)];
        let (bsadf, cv, series) = fake_sequences(stats, vec![1.0; 4], 4);
        let cfg = StampConfig {
            min_duration: 2,
            level: 0.95,
        };
        let episodes = stamp(&bsadf, &cv, &cfg, &series).unwrap();
        assert_eq!(episodes.len(), 1);
        assert_eq!((episodes[0].start_index, episodes[0].end_index), (2, 3));
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let stats = vec![Some(2.0), Some(2.0)];
        let (bsadf, _, series) = fake_sequences(stats, vec![1.0; 2], 4);
        let cv = CvSequence {
            level: 0.95,
            values: vec![1.0; 3],
        };
        let cfg = StampConfig {
            min_duration: 1,
            level: 0.95,
        };
        assert!(matches!(
            stamp(&bsadf, &cv, &cfg, &series),
            Err(Error::LengthMismatch { .. })
        ));
    }

    proptest! {
        // Raising the level never enlarges an episode: every index stamped
        // at the higher threshold is stamped at the lower one too, and
        // episodes remain disjoint, ordered, and within the exceedance set.
        #[test]
        fn higher_thresholds_only_shrink_episodes(
            stats in proptest::collection::vec(-2.0f64..4.0, 10..60),
            base in 0.0f64..2.0,
            bump in 0.01f64..1.5,
            min_duration in 1usize..4,
        ) {
            let w0 = 4;
            let wrapped: Vec<Option<f64>> = stats.iter().copied().map(Some).collect();
            let (bsadf, _, series) = fake_sequences(wrapped, vec![0.0; stats.len()], w0);
            let lo = CvSequence { level: 0.95, values: vec![base; stats.len()] };
            let hi = CvSequence { level: 0.99, values: vec![base + bump; stats.len()] };
            let cfg = StampConfig { min_duration, level: 0.95 };
            let cfg_hi = StampConfig { min_duration, level: 0.99 };
            let eps_lo = stamp(&bsadf, &lo, &cfg, &series).unwrap();
            let eps_hi = stamp(&bsadf, &hi, &cfg_hi, &series).unwrap();

            let cover = |eps: &[Episode]| {
                let mut s = std::collections::BTreeSet::new();
                for e in eps {
                    for k in e.start_index..=e.end_index {
                        s.insert(k);
                    }
                }
                s
            };
            let lo_set = cover(&eps_lo);
            let hi_set = cover(&eps_hi);
            prop_assert!(hi_set.is_subset(&lo_set));

            // Disjoint and ordered, and inside the exceedance set.
            for w in eps_lo.windows(2) {
                prop_assert!(w[0].end_index < w[1].start_index);
            }
            for k in &lo_set {
                prop_assert!(stats[*k] > base);
            }
        }
    }
}
