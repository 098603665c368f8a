//! Detection and date-stamping of explosive "bubble" episodes in valuation
//! ratio time series, using the right-tailed recursive unit-root tests of
//! Phillips, Shi & Yu (2015): SADF, the BSADF sequence, and GSADF, with
//! finite-sample Monte Carlo critical values.
//!
//! The pipeline: load a series ([`series`]), compute the recursive sup
//! statistics on top of an O(1)-per-window rolling regression ([`adf`],
//! [`detect`]), simulate the null distribution for critical values and
//! p-values ([`critical`]), and convert exceedances of the critical-value
//! sequence into dated episodes ([`stamp`]). [`dgp`] generates synthetic
//! multiple-bubble series with ground-truth labels for validation.

// Validation guards are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adf;
pub mod critical;
pub mod detect;
pub mod dgp;
pub mod error;
pub mod series;
pub mod stamp;

pub use adf::{build_moments, AdfConfig, DfFit, DfStat, MomentTable, Window};
pub use critical::{
    bsadf_cv_sequence, classify, load_draws, p_value, quantile_table, sadf_cv_sequence,
    save_draws, simulate_null, CriticalValueTable, CvSequence, NullDraws, ScalarCvs,
    Significance, StatKind,
};
pub use detect::{
    min_window, run_bsadf, run_gsadf, run_sadf, BsadfSequence, SadfResult, TestResult,
    WindowPolicy,
};
pub use dgp::{gen_multi_bubble, gen_random_walk, DgpSpec, LabeledSeries, Reinit};
pub use error::{Error, Result};
pub use series::{load_series, read_series, write_series, CsvSchema, DateFormat, Frequency, Series};
pub use stamp::{default_min_duration, stamp, Episode, StampConfig};
