//! Dickey-Fuller regression on index windows, with a prefix-moment engine
//! that makes per-window evaluation O(1) for a fixed lag.
//!
//! The regression is estimated in the first-difference parameterization
//! `dx_t = intercept + beta * x_{t-1} + sum_i theta_i * dx_{t-i} + e_t`,
//! which is algebraically equivalent to the levels form with
//! `delta = 1 + beta` and much better conditioned on trending data. The test
//! statistic is the t-ratio on `beta`, i.e. `(delta_hat - 1) / se(delta_hat)`,
//! right-tailed: large positive values indicate an explosive root.
//!
//! [`MomentTable`] stores running cross-products of every regressor/response
//! pair in compensated (double-double) form, so the normal equations for any
//! window are a difference of two prefix entries. Repeated subtraction of
//! nearby prefix sums is exactly where naive accumulation loses digits; the
//! compensated carry keeps window moments accurate even after T^2 window
//! evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lag configuration for the augmented regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AdfConfig {
    /// Number of lagged difference terms (`p`). Zero reproduces the plain
    /// Dickey-Fuller regression.
    pub lag: usize,
}

impl AdfConfig {
    pub fn new(lag: usize) -> Self {
        Self { lag }
    }

    /// Smallest window length that leaves at least one residual degree of
    /// freedom: `p + 3` effective observations against `p + 2` regressors.
    pub fn min_feasible_window(&self) -> usize {
        2 * self.lag + 4
    }
}

/// Inclusive index window `[start, end]` into a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false // start <= end by construction; windows hold at least two points
    }
}

/// Full OLS fit of the window regression.
#[derive(Debug, Clone, PartialEq)]
pub struct DfFit {
    pub intercept: f64,
    /// Autoregressive root estimate in levels form (`1 + beta`).
    pub rho: f64,
    pub lag_coeffs: Vec<f64>,
    pub residual_variance: f64,
    pub se_rho: f64,
    pub n_obs: usize,
}

/// Right-tailed Dickey-Fuller t-statistic for one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfStat {
    pub value: f64,
}

const RCOND_FLOOR: f64 = 1e-12;
const VARIANCE_FLOOR: f64 = 1e-300;

/// Prefix cross-products of `[1, x_{t-1}, dx_{t-1}..dx_{t-p}, dx_t]`,
/// immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct MomentTable {
    lag: usize,
    len: usize,
    dim: usize,
    tri: usize,
    hi: Vec<f64>,
    lo: Vec<f64>,
}

/// Build the prefix-moment table for a value sequence.
///
/// Time and space are O(T * (p+3)^2). Any window's regression moments are
/// then a difference of two rows.
pub fn build_moments(values: &[f64], config: AdfConfig) -> Result<MomentTable> {
    let p = config.lag;
    let len = values.len();
    if len < p + 4 {
        return Err(Error::SeriesTooShort {
            len,
            required: p + 4,
        });
    }
    let dim = p + 3;
    let tri = dim * (dim + 1) / 2;

    let mut hi = vec![0.0f64; len * tri];
    let mut lo = vec![0.0f64; len * tri];
    let mut acc_hi = vec![0.0f64; tri];
    let mut acc_lo = vec![0.0f64; tri];
    let mut row = vec![0.0f64; dim];

    for t in 0..len {
        if t > p {
            row[0] = 1.0;
            row[1] = values[t - 1];
            for i in 1..=p {
                row[1 + i] = values[t - i] - values[t - i - 1];
            }
            row[dim - 1] = values[t] - values[t - 1];

            let mut e = 0;
            for i in 0..dim {
                for j in i..dim {
                    // Neumaier compensated accumulation.
                    let term = row[i] * row[j];
                    let s = acc_hi[e] + term;
                    if acc_hi[e].abs() >= term.abs() {
                        acc_lo[e] += (acc_hi[e] - s) + term;
                    } else {
                        acc_lo[e] += (term - s) + acc_hi[e];
                    }
                    acc_hi[e] = s;
                    e += 1;
                }
            }
        }
        hi[t * tri..(t + 1) * tri].copy_from_slice(&acc_hi);
        lo[t * tri..(t + 1) * tri].copy_from_slice(&acc_lo);
    }

    Ok(MomentTable {
        lag: p,
        len,
        dim,
        tri,
        hi,
        lo,
    })
}

impl MomentTable {
    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn tri_idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.dim);
        i * (2 * self.dim - i + 1) / 2 + (j - i)
    }

    /// Cross-product sums over the window's regression rows
    /// (`t = start+lag+1 ..= end`), recovered from two prefix entries.
    fn window_sums(&self, window: Window) -> Vec<f64> {
        let a = (window.start + self.lag) * self.tri;
        let b = window.end * self.tri;
        (0..self.tri)
            .map(|e| {
                let d = self.hi[b + e] - self.hi[a + e];
                let c = self.lo[b + e] - self.lo[a + e];
                d + c
            })
            .collect()
    }

    fn check_window(&self, window: Window) -> Result<usize> {
        if window.start >= window.end || window.end >= self.len {
            return Err(Error::InvalidConfig(format!(
                "window [{}, {}] out of bounds for length {}",
                window.start, window.end, self.len
            )));
        }
        let p = self.lag;
        let rows = window.len() - 1 - p;
        if window.len() < 2 * p + 4 {
            return Err(Error::WindowTooSmall {
                len: window.len(),
                required: 2 * p + 4,
                lag: p,
            });
        }
        Ok(rows)
    }

    fn solve_window(&self, window: Window) -> Result<WindowFit> {
        let rows = self.check_window(window)?;
        let p = self.lag;
        let dim = self.dim;
        let sums = self.window_sums(window);
        let at = |i: usize, j: usize| {
            if i <= j {
                sums[self.tri_idx(i, j)]
            } else {
                sums[self.tri_idx(j, i)]
            }
        };
        let n = rows as f64;
        let degenerate = |reason: &'static str| Error::DegenerateRegression {
            start: window.start,
            end: window.end,
            reason,
        };

        // Conditioning gate on the correlation-scaled regressor Gram
        // (constant + slopes). A reciprocal condition estimate below the
        // floor means the normal equations carry no usable information, so
        // fail loudly instead of returning noise.
        let kreg = p + 2;
        let mut scale = vec![0.0f64; kreg];
        for (i, s) in scale.iter_mut().enumerate() {
            let d = at(i, i);
            if !(d > 0.0) {
                return Err(degenerate("zero diagonal in normal equations"));
            }
            *s = d.sqrt();
        }
        let mut corr = vec![0.0f64; kreg * kreg];
        for i in 0..kreg {
            for j in 0..kreg {
                corr[i * kreg + j] = at(i, j) / (scale[i] * scale[j]);
            }
        }
        let diag = cholesky_in_place(&mut corr, kreg)
            .ok_or_else(|| degenerate("singular normal equations"))?;
        let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
        for d in diag {
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        let rcond = (dmin / dmax) * (dmin / dmax);
        if !(rcond >= RCOND_FLOOR) {
            return Err(degenerate("ill-conditioned normal equations"));
        }

        // Centered system: slopes are x_{t-1} and the lagged differences,
        // response is dx_t; the intercept is recovered from the means.
        let m = dim - 1;
        let k = p + 1;
        let mut mean = vec![0.0f64; m];
        for (a, mu) in mean.iter_mut().enumerate() {
            *mu = at(0, a + 1) / n;
        }
        let mut czz = vec![0.0f64; k * k];
        for a in 0..k {
            for b in 0..k {
                czz[a * k + b] = at(a + 1, b + 1) - n * mean[a] * mean[b];
            }
        }
        let mut czy = vec![0.0f64; k];
        for a in 0..k {
            czy[a] = at(a + 1, m) - n * mean[a] * mean[m - 1];
        }
        let cyy = at(m, m) - n * mean[m - 1] * mean[m - 1];

        let mut chol = czz.clone();
        let _ = cholesky_in_place(&mut chol, k)
            .ok_or_else(|| degenerate("singular centered normal equations"))?;
        let theta = cholesky_solve(&chol, k, &czy);

        let mut sse = cyy;
        for a in 0..k {
            sse -= theta[a] * czy[a];
        }
        if sse < 0.0 {
            sse = 0.0;
        }
        let dof = rows - (p + 2);
        let sigma2 = sse / dof as f64;
        if !(sigma2 > VARIANCE_FLOOR) {
            return Err(degenerate("zero residual variance"));
        }

        let mut unit = vec![0.0f64; k];
        unit[0] = 1.0;
        let inv_col = cholesky_solve(&chol, k, &unit);
        let var_beta = sigma2 * inv_col[0];
        if !(var_beta > 0.0) || !var_beta.is_finite() {
            return Err(degenerate("non-positive coefficient variance"));
        }
        let se = var_beta.sqrt();
        let t_stat = theta[0] / se;
        if !t_stat.is_finite() {
            return Err(degenerate("non-finite statistic"));
        }

        Ok(WindowFit {
            theta,
            mean,
            sigma2,
            se,
            t_stat,
            rows,
        })
    }

    /// Right-tailed DF t-statistic on a window. Pure: repeated calls are
    /// bit-identical.
    pub fn df_stat(&self, window: Window) -> Result<DfStat> {
        Ok(DfStat {
            value: self.solve_window(window)?.t_stat,
        })
    }

    /// Full coefficient fit on a window.
    pub fn df_fit(&self, window: Window) -> Result<DfFit> {
        let fit = self.solve_window(window)?;
        let k = fit.theta.len();
        let mean_y = fit.mean[fit.mean.len() - 1];
        let mut intercept = mean_y;
        for a in 0..k {
            intercept -= fit.theta[a] * fit.mean[a];
        }
        Ok(DfFit {
            intercept,
            rho: 1.0 + fit.theta[0],
            lag_coeffs: fit.theta[1..].to_vec(),
            residual_variance: fit.sigma2,
            se_rho: fit.se,
            n_obs: fit.rows,
        })
    }
}

struct WindowFit {
    theta: Vec<f64>,
    mean: Vec<f64>,
    sigma2: f64,
    se: f64,
    t_stat: f64,
    rows: usize,
}

/// In-place lower Cholesky of a dense symmetric matrix stored row-major.
/// Returns the diagonal of the factor, or `None` on a non-positive pivot.
fn cholesky_in_place(a: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let mut diag = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                let d = s.sqrt();
                a[i * n + i] = d;
                diag[i] = d;
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
    }
    Some(diag)
}

/// Solve `L L' x = b` given the factor from [`cholesky_in_place`].
fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}
