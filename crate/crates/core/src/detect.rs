//! SADF, BSADF, and GSADF: suprema of Dickey-Fuller statistics over the
//! recursive window families of Phillips, Shi & Yu (2015).
//!
//! SADF expands the window forward from the first observation. BSADF fixes
//! each endpoint and takes the sup over all admissible start points. GSADF
//! is the sup of BSADF over endpoints, the double-sup that stays consistent
//! under multiple bubbles.
//!
//! Degenerate windows are excluded from each sup and counted, never folded
//! in as sentinel values: one pathological window must not poison the test,
//! but the exclusion is reported.

use rayon::prelude::*;
use serde::Serialize;

use crate::adf::{build_moments, AdfConfig, MomentTable, Window};
use crate::error::{Error, Result};

/// Choice of smallest admissible window length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowPolicy {
    /// `w0 = ceil(T * (0.01 + 1.8 / sqrt(T)))`, the standard fractional rule.
    #[default]
    Fractional,
    /// Explicit observation count, for reproducing a known configuration.
    Explicit(usize),
}

impl WindowPolicy {
    /// Resolve to a concrete observation count, clamped so every admissible
    /// window is feasible for the configured lag.
    pub fn resolve(&self, t: usize, config: AdfConfig) -> Result<usize> {
        match *self {
            WindowPolicy::Fractional => min_window(t, config),
            WindowPolicy::Explicit(w0) => {
                let required = config.min_feasible_window();
                if w0 < required || w0 > t {
                    return Err(Error::InvalidMinWindow {
                        given: w0,
                        required,
                        max: t,
                    });
                }
                Ok(w0)
            }
        }
    }
}

/// Fractional minimum-window rule: `ceil(T * (0.01 + 1.8 / sqrt(T)))`,
/// clamped up to the smallest feasible window for the lag.
pub fn min_window(t: usize, config: AdfConfig) -> Result<usize> {
    if t < 20 {
        return Err(Error::SeriesTooShort {
            len: t,
            required: 20,
        });
    }
    let tf = t as f64;
    let raw = tf * (0.01 + 1.8 / tf.sqrt());
    // Nudge below exact integers so e.g. T=100 -> 19, not 20, when the
    // product lands a rounding error above the true value.
    let w0 = (raw - 1e-9).ceil() as usize;
    Ok(w0.max(config.min_feasible_window()).min(t))
}

/// Forward-expanding sup ADF result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SadfResult {
    pub stat: f64,
    /// One entry per endpoint `min_window-1 ..= T-1`; `None` marks a
    /// degenerate
    /// window excluded from the sup.
    pub sequence: Vec<Option<f64>>,
    pub skipped_windows: u64,
}

/// Backward-sup ADF statistics per endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsadfSequence {
    pub min_window: usize,
    /// Series indices of the window endpoints: `min_window-1 ..= T-1`.
    pub endpoints: Vec<usize>,
    /// Sup statistic per endpoint; `None` when every window at that endpoint
    /// was degenerate (the endpoint is flagged, not fatal).
    pub stats: Vec<Option<f64>>,
    /// Start index attaining each sup, smallest index on ties.
    pub argmax_start: Vec<Option<usize>>,
    /// Number of degenerate windows excluded across all endpoints.
    pub skipped_windows: u64,
}

impl BsadfSequence {
    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }
}

/// Combined SADF + GSADF outcome for one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub t_len: usize,
    pub lag: usize,
    pub min_window: usize,
    pub sadf: f64,
    pub gsadf: f64,
    pub sadf_sequence: Vec<Option<f64>>,
    pub sadf_skipped: u64,
    pub bsadf: BsadfSequence,
}

fn max_over(seq: &[Option<f64>]) -> Option<f64> {
    seq.iter()
        .flatten()
        .copied()
        .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

fn sadf_from(table: &MomentTable, w0: usize) -> Result<SadfResult> {
    let t = table.len();
    let mut sequence = Vec::with_capacity(t - w0 + 1);
    let mut skipped = 0u64;
    for end in w0 - 1..t {
        match table.df_stat(Window::new(0, end)) {
            Ok(stat) => sequence.push(Some(stat.value)),
            Err(Error::DegenerateRegression { .. }) => {
                skipped += 1;
                sequence.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let stat = max_over(&sequence).ok_or(Error::AllWindowsDegenerate)?;
    Ok(SadfResult {
        stat,
        sequence,
        skipped_windows: skipped,
    })
}

fn bsadf_from(table: &MomentTable, w0: usize) -> Result<BsadfSequence> {
    let t = table.len();
    let endpoints: Vec<usize> = (w0 - 1..t).collect();

    // Endpoints are independent; evaluate them in parallel and reassemble in
    // endpoint order so the output is identical for any worker count.
    let per_endpoint: Vec<(Option<f64>, Option<usize>, u64)> = endpoints
        .par_iter()
        .map(|&end| {
            let mut best: Option<(f64, usize)> = None;
            let mut skipped = 0u64;
            for start in 0..=(end + 1 - w0) {
                match table.df_stat(Window::new(start, end)) {
                    Ok(stat) => {
                        // Strict improvement keeps the smallest start on ties.
                        if best.is_none_or(|(b, _)| stat.value > b) {
                            best = Some((stat.value, start));
                        }
                    }
                    Err(Error::DegenerateRegression { .. }) => skipped += 1,
                    Err(_) => skipped += 1,
                }
            }
            (best.map(|(v, _)| v), best.map(|(_, s)| s), skipped)
        })
        .collect();

    let mut stats = Vec::with_capacity(per_endpoint.len());
    let mut argmax_start = Vec::with_capacity(per_endpoint.len());
    let mut skipped_windows = 0u64;
    for (stat, arg, skipped) in per_endpoint {
        stats.push(stat);
        argmax_start.push(arg);
        skipped_windows += skipped;
    }
    if stats.iter().all(|s| s.is_none()) {
        return Err(Error::AllWindowsDegenerate);
    }
    Ok(BsadfSequence {
        min_window: w0,
        endpoints,
        stats,
        argmax_start,
        skipped_windows,
    })
}

/// Sup ADF over forward-expanding windows anchored at the first observation.
pub fn run_sadf(values: &[f64], config: AdfConfig, policy: WindowPolicy) -> Result<SadfResult> {
    let w0 = policy.resolve(values.len(), config)?;
    let table = build_moments(values, config)?;
    sadf_from(&table, w0)
}

/// Backward-sup ADF sequence over all endpoints.
pub fn run_bsadf(values: &[f64], config: AdfConfig, policy: WindowPolicy) -> Result<BsadfSequence> {
    let w0 = policy.resolve(values.len(), config)?;
    let table = build_moments(values, config)?;
    bsadf_from(&table, w0)
}

/// Full detector suite: SADF, the BSADF sequence, and GSADF.
pub fn run_gsadf(values: &[f64], config: AdfConfig, policy: WindowPolicy) -> Result<TestResult> {
    let w0 = policy.resolve(values.len(), config)?;
    let table = build_moments(values, config)?;
    let sadf = sadf_from(&table, w0)?;
    let bsadf = bsadf_from(&table, w0)?;
    let gsadf = max_over(&bsadf.stats).ok_or(Error::AllWindowsDegenerate)?;
    Ok(TestResult {
        t_len: values.len(),
        lag: config.lag,
        min_window: w0,
        sadf: sadf.stat,
        gsadf,
        sadf_sequence: sadf.sequence,
        sadf_skipped: sadf.skipped_windows,
        bsadf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bubble_testkit::random_walk;

    const LAG0: AdfConfig = AdfConfig { lag: 0 };

    #[test]
    fn fractional_rule_matches_hand_computation() {
        assert_eq!(min_window(100, LAG0).unwrap(), 19);
        assert_eq!(min_window(200, LAG0).unwrap(), 28);
        assert!(matches!(
            min_window(10, LAG0),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn explicit_policy_is_validated() {
        assert_eq!(WindowPolicy::Explicit(15).resolve(60, LAG0).unwrap(), 15);
        assert!(matches!(
            WindowPolicy::Explicit(3).resolve(60, LAG0),
            Err(Error::InvalidMinWindow { required: 4, .. })
        ));
        assert!(matches!(
            WindowPolicy::Explicit(61).resolve(60, LAG0),
            Err(Error::InvalidMinWindow { .. })
        ));
    }

    #[test]
    fn sadf_is_the_maximum_of_its_sequence() {
        let x = random_walk(60, 7);
        let r = run_sadf(&x, LAG0, WindowPolicy::Fractional).unwrap();
        let max = r.sequence.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.stat, max);
    }

    #[test]
    fn full_sample_statistic_never_exceeds_sadf() {
        for seed in 0..10u64 {
            let x = random_walk(60, seed);
            let r = run_sadf(&x, LAG0, WindowPolicy::Fractional).unwrap();
            let full = r.sequence.last().unwrap().unwrap();
            assert!(full <= r.stat);
        }
    }

    #[test]
    fn first_bsadf_endpoint_is_the_singleton_window() {
        let x = random_walk(60, 21);
        let w0 = min_window(60, LAG0).unwrap();
        let b = run_bsadf(&x, LAG0, WindowPolicy::Fractional).unwrap();
        let table = build_moments(&x, LAG0).unwrap();
        let only = table.df_stat(Window::new(0, w0 - 1)).unwrap().value;
        assert_eq!(b.stats[0], Some(only));
        assert_eq!(b.argmax_start[0], Some(0));
        assert_eq!(b.endpoints[0], w0 - 1);
    }

    #[test]
    fn bsadf_dominates_the_anchored_sequence() {
        let x = random_walk(80, 2);
        let r = run_gsadf(&x, LAG0, WindowPolicy::Fractional).unwrap();
        for (b, s) in r.bsadf.stats.iter().zip(&r.sadf_sequence) {
            if let (Some(b), Some(s)) = (b, s) {
                assert!(b >= s);
            }
        }
    }

    #[test]
    fn gsadf_is_the_maximum_of_the_bsadf_sequence() {
        for seed in 0..20u64 {
            let x = random_walk(60, seed);
            let r = run_gsadf(&x, LAG0, WindowPolicy::Fractional).unwrap();
            let max = r.bsadf.stats.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(r.gsadf, max);
            assert!(r.sadf <= r.gsadf);
        }
    }

    #[test]
    fn shrinking_the_minimum_window_never_decreases_the_sups() {
        let x = random_walk(90, 13);
        let wide = run_gsadf(&x, LAG0, WindowPolicy::Explicit(30)).unwrap();
        let narrow = run_gsadf(&x, LAG0, WindowPolicy::Explicit(12)).unwrap();
        assert!(narrow.sadf >= wide.sadf);
        assert!(narrow.gsadf >= wide.gsadf);
    }

    #[test]
    fn statistics_are_scale_invariant() {
        let x = random_walk(70, 4);
        let scaled: Vec<f64> = x.iter().map(|v| v * 3.7).collect();
        let a = run_gsadf(&x, LAG0, WindowPolicy::Fractional).unwrap();
        let b = run_gsadf(&scaled, LAG0, WindowPolicy::Fractional).unwrap();
        assert!((a.sadf - b.sadf).abs() <= 1e-9);
        assert!((a.gsadf - b.gsadf).abs() <= 1e-9);
        for (u, v) in a.bsadf.stats.iter().zip(&b.bsadf.stats) {
            let (u, v) = (u.unwrap(), v.unwrap());
            assert!((u - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn all_degenerate_windows_is_an_error() {
        // Perfectly linear: every window has zero residual variance.
        let x: Vec<f64> = (0..40).map(|t| 2.0 + 0.5 * t as f64).collect();
        assert!(matches!(
            run_sadf(&x, LAG0, WindowPolicy::Fractional),
            Err(Error::AllWindowsDegenerate)
        ));
        assert!(matches!(
            run_bsadf(&x, LAG0, WindowPolicy::Fractional),
            Err(Error::AllWindowsDegenerate)
        ));
    }
}
