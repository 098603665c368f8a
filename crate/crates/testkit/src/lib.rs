//! Naive reference implementations used as test oracles.
//!
//! Everything in this crate favors transparency over speed: explicit design
//! matrices, textbook normal equations solved by Gaussian elimination, and
//! brute-force double loops over window families. Production code must never
//! call into this crate; tests compare against it.

// Validation guards are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// Right-tailed Dickey-Fuller t-statistic computed the slow, obvious way.
///
/// Fits `dx_t = a + b*x_{t-1} + sum_i c_i*dx_{t-i} + e_t` on the full slice
/// by building the design matrix row by row and solving the normal equations
/// with Gaussian elimination. Returns the t-ratio on `b`, which equals
/// `(delta_hat - 1) / se(delta_hat)` in the levels parameterization.
///
/// Returns `None` when the regression is degenerate (singular system, zero
/// residual variance, or not enough observations).
pub fn naive_df_stat(x: &[f64], lag: usize) -> Option<f64> {
    let n = x.len();
    let k = lag + 2; // intercept, x_{t-1}, lagged differences
    if n < lag + 2 {
        return None;
    }
    let rows = n - 1 - lag;
    if rows < k + 1 {
        return None;
    }

    let mut design = vec![vec![0.0f64; k]; rows];
    let mut resp = vec![0.0f64; rows];
    for (r, t) in (lag + 1..n).enumerate() {
        design[r][0] = 1.0;
        design[r][1] = x[t - 1];
        for i in 1..=lag {
            design[r][1 + i] = x[t - i] - x[t - i - 1];
        }
        resp[r] = x[t] - x[t - 1];
    }

    // Normal equations X'X b = X'y.
    let mut gram = vec![vec![0.0f64; k]; k];
    let mut xty = vec![0.0f64; k];
    for r in 0..rows {
        for i in 0..k {
            xty[i] += design[r][i] * resp[r];
            for j in 0..k {
                gram[i][j] += design[r][i] * design[r][j];
            }
        }
    }

    let coef = gauss_solve(&gram, &xty)?;

    let mut sse = 0.0;
    for r in 0..rows {
        let fitted: f64 = (0..k).map(|i| design[r][i] * coef[i]).sum();
        let e = resp[r] - fitted;
        sse += e * e;
    }
    let dof = rows - k;
    if dof == 0 {
        return None;
    }
    let sigma2 = sse / dof as f64;
    if !(sigma2 > 1e-300) {
        return None;
    }

    // (X'X)^{-1}[1][1] via solving against the unit vector.
    let mut e1 = vec![0.0f64; k];
    e1[1] = 1.0;
    let z = gauss_solve(&gram, &e1)?;
    let var_b = sigma2 * z[1];
    if !(var_b > 0.0) {
        return None;
    }
    Some(coef[1] / var_b.sqrt())
}

/// Gaussian elimination with partial pivoting. `None` on a (near-)zero pivot.
/// Plain indexed loops on purpose: this is the textbook form the engine is
/// checked against.
#[allow(clippy::needless_range_loop)]
fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-280 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut out = vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut s = rhs[col];
        for c in col + 1..n {
            s -= m[col][c] * out[c];
        }
        out[col] = s / m[col][col];
    }
    Some(out)
}

/// Forward-expanding DF statistics anchored at index 0, one per endpoint
/// `min_window-1 ..= len-1`, brute force.
pub fn brute_sadf_sequence(x: &[f64], lag: usize, min_window: usize) -> Vec<Option<f64>> {
    (min_window - 1..x.len())
        .map(|end| naive_df_stat(&x[0..=end], lag))
        .collect()
}

/// SADF = max over the forward-expanding sequence.
pub fn brute_sadf(x: &[f64], lag: usize, min_window: usize) -> Option<f64> {
    max_opt(&brute_sadf_sequence(x, lag, min_window))
}

/// Backward-sup DF statistics: for each endpoint, the sup over all start
/// points admitting at least `min_window` observations. Double loop, no
/// shared state.
pub fn brute_bsadf(x: &[f64], lag: usize, min_window: usize) -> Vec<Option<f64>> {
    (min_window - 1..x.len())
        .map(|end| {
            let mut best: Option<f64> = None;
            for start in 0..=(end + 1 - min_window) {
                if let Some(stat) = naive_df_stat(&x[start..=end], lag) {
                    if best.is_none_or(|b| stat > b) {
                        best = Some(stat);
                    }
                }
            }
            best
        })
        .collect()
}

/// GSADF = sup over endpoints of the backward-sup sequence.
pub fn brute_gsadf(x: &[f64], lag: usize, min_window: usize) -> Option<f64> {
    max_opt(&brute_bsadf(x, lag, min_window))
}

fn max_opt(seq: &[Option<f64>]) -> Option<f64> {
    seq.iter()
        .flatten()
        .copied()
        .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

/// Seeded standard random walk starting at zero, for oracle-vs-engine tests.
///
/// Deliberately uses a different generator (SplitMix64 + Box-Muller) than the
/// production Monte Carlo path so agreement tests exercise the engine on
/// streams it did not produce itself.
pub fn random_walk(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed;
    let mut out = Vec::with_capacity(len);
    let mut level = 0.0f64;
    out.push(level);
    let mut cached: Option<f64> = None;
    for _ in 1..len {
        let z = match cached.take() {
            Some(z) => z,
            None => {
                let u1 = unit_open(&mut state);
                let u2 = unit_open(&mut state);
                let r = (-2.0 * u1.ln()).sqrt();
                let theta = 2.0 * std::f64::consts::PI * u2;
                cached = Some(r * theta.sin());
                r * theta.cos()
            }
        };
        level += z;
        out.push(level);
    }
    out
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_open(state: &mut u64) -> f64 {
    // (0, 1): never returns 0, so ln() is safe.
    ((splitmix64(state) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
