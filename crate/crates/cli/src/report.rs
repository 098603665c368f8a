//! The structured run report and its text rendering.
//!
//! One JSON document per run is the single source of truth; the text report
//! and the SVG plot are renderings of it. Field names are documented in the
//! repository README and kept stable. Rendering is deterministic: a report
//! serializes to identical bytes every time.

use serde::Serialize;

use bubble_core::{Episode, Series, Significance, TestResult};

pub const TOOL_NAME: &str = "bubble";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
    pub generator: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: TOOL_NAME,
            version: TOOL_VERSION,
            generator: bubble_core::critical::GENERATOR_VERSION,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesInfo {
    pub name: String,
    pub frequency: String,
    pub observations: usize,
    pub start: String,
    pub end: String,
}

impl SeriesInfo {
    pub fn from_series(series: &Series) -> Self {
        Self {
            name: series.name().to_string(),
            frequency: series.frequency().to_string(),
            observations: series.len(),
            start: series.date_label(0),
            end: series.date_label(series.len() - 1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub input: String,
    pub lag: usize,
    pub min_window: usize,
    pub reps: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stamp_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_duration: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Statistics {
    /// DF statistic on the full sample (the last forward-expanding window).
    pub df_full: Option<f64>,
    pub sadf: f64,
    pub gsadf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PValues {
    pub sadf: f64,
    pub gsadf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub sadf: Significance,
    pub gsadf: Significance,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalValuesOut {
    pub levels: Vec<f64>,
    pub sadf: Vec<f64>,
    pub gsadf: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sequences {
    /// Series index of each window endpoint.
    pub endpoints: Vec<usize>,
    pub endpoint_dates: Vec<String>,
    /// Forward-expanding DF statistics; null marks a degenerate window.
    pub sadf: Vec<Option<f64>>,
    /// Backward-sup statistics; null marks a flagged endpoint.
    pub bsadf: Vec<Option<f64>>,
    /// Start index attaining each backward sup.
    pub argmax_start: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CvSequenceOut {
    pub level: f64,
    pub threshold: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpisodeOut {
    pub start_index: usize,
    pub end_index: usize,
    pub start_date: String,
    pub end_date: String,
    pub duration: usize,
    pub peak_stat: f64,
    pub peak_date: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub sadf_windows_skipped: u64,
    pub bsadf_windows_skipped: u64,
    pub null_redraws: usize,
}

/// Everything a run produced. Every number in the rendered text report is
/// traceable to a field here.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub command: String,
    pub series: SeriesInfo,
    pub config: ConfigEcho,
    pub statistics: Statistics,
    pub p_values: PValues,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    pub critical_values: CriticalValuesOut,
    pub sequences: Sequences,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_sequence: Option<CvSequenceOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes: Option<Vec<EpisodeOut>>,
    pub diagnostics: Diagnostics,
    pub notes: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn sequences_from(result: &TestResult, series: &Series) -> Sequences {
    Sequences {
        endpoints: result.bsadf.endpoints.clone(),
        endpoint_dates: result
            .bsadf
            .endpoints
            .iter()
            .map(|&i| series.date_label(i))
            .collect(),
        sadf: result.sadf_sequence.clone(),
        bsadf: result.bsadf.stats.clone(),
        argmax_start: result.bsadf.argmax_start.clone(),
    }
}

pub fn episode_out(ep: &Episode, series: &Series) -> EpisodeOut {
    let label = |d: chrono::NaiveDate| match series.frequency() {
        bubble_core::Frequency::Monthly => format!("{}", d.format("%Y-%m")),
        bubble_core::Frequency::Daily => format!("{}", d.format("%Y-%m-%d")),
    };
    EpisodeOut {
        start_index: ep.start_index,
        end_index: ep.end_index,
        start_date: label(ep.start_date),
        end_date: label(ep.end_date),
        duration: ep.duration(),
        peak_stat: ep.peak_stat,
        peak_date: label(ep.peak_date),
    }
}

/// Significance mark, following the usual table convention for these tests:
/// `**` rejects at 1%, `***` at 5%, `*` at 10%.
pub fn significance_mark(sig: Significance) -> &'static str {
    match sig {
        Significance::At1Pct => "**",
        Significance::At5Pct => "***",
        Significance::At10Pct => "*",
        Significance::NotSignificant => "",
    }
}

fn stat_block(
    out: &mut String,
    label: &str,
    value: f64,
    mark: &str,
    p: f64,
    levels: &[f64],
    cvs: &[f64],
) {
    out.push_str(&format!(
        "{label:<18}{:>12.6}{mark:<4}p-value {p:>8.4}\n",
        value
    ));
    // Highest level first, matching the conventional table layout.
    for (l, cv) in levels.iter().zip(cvs).rev() {
        out.push_str(&format!("  {:>2.0}% level       {cv:>12.6}\n", l * 100.0));
    }
}

/// Render the human-readable report.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    out.push_str("SADF/GSADF right-tailed unit-root test\n");
    out.push_str(&format!(
        "series: {} ({}, T={}, {}..{})\n",
        report.series.name,
        report.series.frequency,
        report.series.observations,
        report.series.start,
        report.series.end
    ));
    out.push_str(&format!(
        "lag: {}   min window: {}   reps: {}   seed: {}\n\n",
        report.config.lag, report.config.min_window, report.config.reps, report.config.seed
    ));

    let marks = report.classification.as_ref();
    stat_block(
        &mut out,
        "GSADF",
        report.statistics.gsadf,
        marks.map_or("", |c| significance_mark(c.gsadf)),
        report.p_values.gsadf,
        &report.critical_values.levels,
        &report.critical_values.gsadf,
    );
    stat_block(
        &mut out,
        "SADF",
        report.statistics.sadf,
        marks.map_or("", |c| significance_mark(c.sadf)),
        report.p_values.sadf,
        &report.critical_values.levels,
        &report.critical_values.sadf,
    );
    if let Some(df_full) = report.statistics.df_full {
        out.push_str(&format!("{:<18}{df_full:>12.6}\n", "DF (full sample)"));
    }

    out.push_str(&format!(
        "\ncritical values from Monte Carlo simulation ({} replications)\n",
        report.config.reps
    ));
    out.push_str("** 1% significance   *** 5% significance   * 10% significance\n");

    if let (Some(level), Some(episodes)) = (
        report.config.stamp_level,
        report.episodes.as_ref(),
    ) {
        out.push_str(&format!(
            "\ndate-stamping at the {:.0}% level, min duration {} observations\n",
            level * 100.0,
            report.config.min_duration.unwrap_or(1)
        ));
        if episodes.is_empty() {
            out.push_str("episodes: none detected\n");
        } else {
            out.push_str("episodes:\n");
            out.push_str("  #   start       end         obs   peak stat    peak date\n");
            for (i, ep) in episodes.iter().enumerate() {
                out.push_str(&format!(
                    "  {:<4}{:<12}{:<12}{:<6}{:>9.6}    {}\n",
                    i + 1,
                    ep.start_date,
                    ep.end_date,
                    ep.duration,
                    ep.peak_stat,
                    ep.peak_date
                ));
            }
        }
    }

    if report.diagnostics.sadf_windows_skipped > 0 || report.diagnostics.bsadf_windows_skipped > 0
    {
        out.push_str(&format!(
            "\ndegenerate windows excluded: {} (SADF), {} (BSADF)\n",
            report.diagnostics.sadf_windows_skipped, report.diagnostics.bsadf_windows_skipped
        ));
    }
    for note in &report.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> Report {
        Report {
            tool: ToolInfo::default(),
            command: "test".into(),
            series: SeriesInfo {
                name: "sample".into(),
                frequency: "monthly".into(),
                observations: 24,
                start: "1999-01".into(),
                end: "2000-12".into(),
            },
            config: ConfigEcho {
                input: "sample.csv".into(),
                lag: 0,
                min_window: 8,
                reps: 1000,
                seed: 42,
                levels: vec![0.90, 0.95, 0.99],
                stamp_level: None,
                threshold: None,
                min_duration: None,
            },
            statistics: Statistics {
                df_full: Some(-1.128701),
                sadf: 1.968328,
                gsadf: 3.728618,
            },
            p_values: PValues {
                sadf: 0.0870,
                gsadf: 0.0,
            },
            classification: Some(Classification {
                sadf: Significance::At10Pct,
                gsadf: Significance::At1Pct,
            }),
            critical_values: CriticalValuesOut {
                levels: vec![0.90, 0.95, 0.99],
                sadf: vec![1.161121, 1.419215, 1.968328],
                gsadf: vec![1.924111, 2.165766, 2.773104],
            },
            sequences: Sequences {
                endpoints: vec![7, 8],
                endpoint_dates: vec!["1999-08".into(), "1999-09".into()],
                sadf: vec![Some(0.1), Some(0.2)],
                bsadf: vec![Some(0.3), Some(0.4)],
                argmax_start: vec![Some(0), Some(1)],
            },
            cv_sequence: None,
            episodes: None,
            diagnostics: Diagnostics {
                sadf_windows_skipped: 0,
                bsadf_windows_skipped: 0,
                null_redraws: 0,
            },
            notes: vec![],
        }
    }

    #[test]
    fn renders_value_cv_rows_and_mark() {
        let text = render_text(&sample_report());
        // Statistic with its 1% mark and four-decimal p-value.
        assert!(text.contains("3.728618**"), "{text}");
        assert!(text.contains("0.0000"), "{text}");
        // Three critical-value rows, highest level first.
        let gsadf_at = text.find("\nGSADF").unwrap();
        let block = &text[gsadf_at..text.find("\nSADF").unwrap()];
        let p99 = block.find("99% level").unwrap();
        let p95 = block.find("95% level").unwrap();
        let p90 = block.find("90% level").unwrap();
        assert!(p99 < p95 && p95 < p90);
        assert!(block.contains("2.773104") && block.contains("2.165766") && block.contains("1.924111"));
    }

    #[test]
    fn columns_align_across_signs_and_magnitudes() {
        let text = render_text(&sample_report());
        let pos = text.lines().find(|l| l.contains("3.728618")).unwrap();
        let neg = text.lines().find(|l| l.contains("-1.128701")).unwrap();
        assert_eq!(
            pos.find('.').unwrap(),
            neg.find('.').unwrap(),
            "decimal points should align:\n{pos}\n{neg}"
        );
    }

    #[test]
    fn json_rendering_is_deterministic() {
        let report = sample_report();
        assert_eq!(report.to_json(), report.to_json());
        assert!(report.to_json().contains("\"gsadf\": 3.728618"));
    }

    #[test]
    fn empty_episode_list_renders_explicitly() {
        let mut report = sample_report();
        report.config.stamp_level = Some(0.95);
        report.config.min_duration = Some(3);
        report.episodes = Some(vec![]);
        let text = render_text(&report);
        assert!(text.contains("episodes: none detected"));
        assert!(text.contains("95% level"), "{text}");
    }
}
