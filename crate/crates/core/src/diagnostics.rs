//! Power-law fits near the origin and the boundary, weighted growth bounds
//! and Harnack ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::GridFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub stderr: f64,
    pub n_points: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Least squares `y = a + b x`; returns `(b, a, r², stderr(b))`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a - b * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let stderr = if n > 2.0 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    (b, a, r2, stderr)
}

/// `(distance, value)` pairs with distance inside `[lo, hi]`.
fn fit_pairs(pairs: &[(f64, f64)], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let inside: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|(r, _)| *r >= window.0 && *r <= window.1)
        .collect();
    if inside.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            found: inside.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    if inside.iter().any(|(_, v)| !(*v > 0.0)) {
        return Err(Error::NonPositiveInWindow);
    }
    Ok(inside.iter().map(|(r, v)| (r.ln(), v.ln())).unzip())
}

/// Default window: starts at the fourth node away from the reference point
/// and spans a decade, widened to hold at least `MIN_FIT_POINTS` nodes and
/// capped at `cap`.
fn default_window(distances: &[f64], cap: f64) -> (f64, f64) {
    let mut d: Vec<f64> = distances.iter().copied().filter(|r| *r > 0.0).collect();
    d.sort_by(f64::total_cmp);
    let lo = d.get(3).copied().unwrap_or(cap);
    let enough = d.get(3 + MIN_FIT_POINTS - 1).copied().unwrap_or(cap);
    (lo, (10.0 * lo).max(enough).min(cap))
}

/// Fits `u ~ C |x|^{-exponent}` on nodes `x > 0` with `|x|` in the window.
pub fn fit_origin_exponent(u: &GridFunction, window: Option<(f64, f64)>) -> Result<ExponentFit> {
    let r = u.mesh.radius;
    let pairs: Vec<(f64, f64)> = u
        .nodes()
        .iter()
        .zip(&u.values)
        .filter(|(x, _)| **x > 0.0 && **x < r)
        .map(|(x, v)| (*x, *v))
        .collect();
    let window = window
        .unwrap_or_else(|| default_window(&pairs.iter().map(|p| p.0).collect::<Vec<_>>(), 0.5 * r));
    if !(window.0 < window.1) {
        return Err(Error::InvalidParameter("empty fit window".into()));
    }
    let (xs, ys) = fit_pairs(&pairs, window)?;
    let (b, a, r2, se) = linear_fit(&xs, &ys);
    Ok(ExponentFit {
        exponent: -b,
        intercept: a,
        window,
        r_squared: r2,
        stderr: se,
        n_points: xs.len(),
    })
}

/// Fits `u ~ C delta^{exponent}` with `delta = R - x` near `+R`.
///
/// With `log_corrected` (meant for `gamma = 1`) it fits
/// `log u - s log delta` against `log log(r / delta^s)` with `r = 3R` and
/// returns the power of the logarithmic factor (`1/2` in theory).
pub fn fit_boundary_exponent(
    u: &GridFunction,
    s: f64,
    log_corrected: bool,
    window: Option<(f64, f64)>,
) -> Result<ExponentFit> {
    let r = u.mesh.radius;
    let pairs: Vec<(f64, f64)> = u
        .nodes()
        .iter()
        .zip(&u.values)
        .filter(|(x, _)| **x > 0.0 && **x < r)
        .map(|(x, v)| (r - x, *v))
        .collect();
    let window = window.unwrap_or_else(|| {
        default_window(&pairs.iter().map(|p| p.0).collect::<Vec<_>>(), 0.25 * r)
    });
    if !(window.0 < window.1) {
        return Err(Error::InvalidParameter("empty fit window".into()));
    }
    let (mut xs, mut ys) = fit_pairs(&pairs, window)?;
    if log_corrected {
        let big_r = 3.0 * r;
        for (x, y) in xs.iter_mut().zip(ys.iter_mut()) {
            // x holds ln(delta)
            let ds = (s * *x).exp();
            *y -= s * *x;
            *x = (big_r / ds).ln().ln();
        }
    }
    let (b, a, r2, se) = linear_fit(&xs, &ys);
    Ok(ExponentFit {
        exponent: b,
        intercept: a,
        window,
        r_squared: r2,
        stderr: se,
        n_points: xs.len(),
    })
}

/// Theoretical boundary exponent: `s` for `gamma <= 1` (with a log factor at
/// `gamma = 1`), `2s/(gamma+1)` for `gamma > 1`.
pub fn boundary_rate(s: f64, gamma: f64) -> f64 {
    if gamma > 1.0 {
        2.0 * s / (gamma + 1.0)
    } else {
        s
    }
}

/// `max |x|^beta u(x)` over interior nodes.
pub fn weighted_sup(u: &GridFunction, beta: f64) -> f64 {
    u.nodes()
        .iter()
        .zip(&u.values)
        .map(|(x, v)| x.abs().powf(beta) * v)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperGrowth {
    pub sup_coarse: f64,
    pub sup_fine: f64,
    /// Growth under refinement below 10%.
    pub bounded: bool,
}

/// Compares `sup |x|^beta u` on a mesh and its refinement.
pub fn check_upper_growth(coarse: &GridFunction, fine: &GridFunction, beta: f64) -> UpperGrowth {
    let a = weighted_sup(coarse, beta);
    let b = weighted_sup(fine, beta);
    UpperGrowth {
        sup_coarse: a,
        sup_fine: b,
        bounded: b < 1.1 * a,
    }
}

/// `(∫_{-r}^{r} v^q)^{1/q} / inf_{|x| <= 3r/2} v` with trapezoidal
/// integration of `v^q` on the nodes clipped to `[-r, r]`.
pub fn harnack_ratio(v: &GridFunction, r: f64, q: f64) -> Result<f64> {
    if !(r > 0.0) || 2.0 * r > v.mesh.radius {
        return Err(Error::InvalidParameter(format!(
            "ball of radius 2r = {} not inside",
            2.0 * r
        )));
    }
    if !(q > 0.0) {
        return Err(Error::InvalidParameter("q must be positive".into()));
    }
    let mut pts: Vec<f64> = vec![-r];
    pts.extend(v.nodes().iter().copied().filter(|x| x.abs() < r));
    pts.push(r);
    let vals: Vec<f64> = pts.iter().map(|x| v.eval(*x).max(0.0).powf(q)).collect();
    let integral: f64 = pts
        .windows(2)
        .zip(vals.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum();
    let outer = 1.5 * r;
    let inf = v
        .nodes()
        .iter()
        .zip(&v.values)
        .filter(|(x, _)| x.abs() <= outer)
        .map(|(_, y)| *y)
        .chain([v.eval(-outer), v.eval(outer)])
        .fold(f64::INFINITY, f64::min);
    if !(inf > 0.0) {
        return Err(Error::InfIsZero);
    }
    Ok(integral.powf(1.0 / q) / inf)
}

/// A Harnack ratio counts as stable if it moves by less than 20% under one
/// refinement.
pub fn harnack_stable(coarse: f64, fine: f64) -> bool {
    ((fine - coarse) / coarse).abs() < 0.2
}

/// Spearman rank correlation.
pub fn rank_correlation(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|i, j| v[*i].total_cmp(&v[*j]));
        let mut r = vec![0.0; v.len()];
        for (k, i) in idx.into_iter().enumerate() {
            r[i] = k as f64;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let (_, _, r2, _) = linear_fit(&ra, &rb);
    let sign: f64 = {
        let m = (a.len() as f64 - 1.0) / 2.0;
        ra.iter()
            .zip(&rb)
            .map(|(x, y)| (x - m) * (y - m))
            .sum::<f64>()
            .signum()
    };
    sign * r2.sqrt()
}
