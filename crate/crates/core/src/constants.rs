//! Gamma-function constants of the fractional Hardy problem and the
//! correspondence between the shift `alpha`, the coupling `lambda` and the
//! interior growth exponent `beta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the Lanczos approximation with g = 607/128.
const LANCZOS_G_HALF: f64 = 5.242_187_5;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// `sin(pi x)` with exact argument reduction, accurate near the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    let (sign, r) = if r < 0.0 { (-1.0, -r) } else { (1.0, r) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

/// The Gamma function for real arguments away from the poles.
///
/// Lanczos series for `x >= 1/2`, reflection formula below.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    let mut ser = LANCZOS[0];
    for (j, c) in LANCZOS.iter().enumerate().skip(1) {
        ser += c / (x + j as f64);
    }
    let t = x + LANCZOS_G_HALF;
    // split the power to stay finite for large arguments
    let p = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * ser / x * p * (p * (-t).exp())
}

/// Digamma for positive arguments.
pub fn digamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 16.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    let tail = x2
        * (1.0 / 12.0
            - x2 * (1.0 / 120.0 - x2 * (1.0 / 252.0 - x2 * (1.0 / 240.0 - x2 * (1.0 / 132.0)))));
    acc + x.ln() - 0.5 / x - tail
}

/// Dial settings of the problem: dimension, fractional order, Hardy coupling
/// and singularity exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyParams {
    pub dim: u32,
    pub s: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl HardyParams {
    pub fn new(dim: u32, s: f64, lambda: f64, gamma: f64) -> Result<Self> {
        let p = HardyParams {
            dim,
            s,
            lambda,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `lambda` given as a multiple of the sharp Hardy constant.
    pub fn with_lambda_fraction(dim: u32, s: f64, fraction: f64, gamma: f64) -> Result<Self> {
        let mut p = HardyParams::new(dim, s, 0.0, gamma)?;
        p.lambda = fraction * hardy_constant(&p)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "s = {} outside (0, 1)",
                self.s
            )));
        }
        if f64::from(self.dim) <= 2.0 * self.s {
            return Err(Error::InvalidParameter(format!(
                "N>2s violated (N = {}, s = {})",
                self.dim, self.s
            )));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma = {} must be positive",
                self.gamma
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda = {} must be nonnegative",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> f64 {
        f64::from(self.dim)
    }

    /// Upper end `(N - 2s)/2` of the admissible `alpha` range.
    pub fn alpha_max(&self) -> f64 {
        0.5 * (self.n() - 2.0 * self.s)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// `lambda / Lambda_{N,s}`.
    pub fn lambda_fraction(&self) -> Result<f64> {
        Ok(self.lambda / hardy_constant(self)?)
    }
}

/// A consistent `(alpha, lambda, beta)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTriple {
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
}

fn check_order(p: &HardyParams) -> Result<()> {
    if !(p.s > 0.0 && p.s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "s = {} outside (0, 1)",
            p.s
        )));
    }
    if p.n() <= 2.0 * p.s {
        return Err(Error::InvalidParameter(format!(
            "N>2s violated (N = {}, s = {})",
            p.dim, p.s
        )));
    }
    Ok(())
}

/// `C_{N,s} = 4^s Gamma(N/2 + s) / (pi^{N/2} |Gamma(-s)|)`.
pub fn normalization_constant(p: &HardyParams) -> Result<f64> {
    if !(p.s > 0.0 && p.s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "s = {} outside (0, 1)",
            p.s
        )));
    }
    let n = p.n();
    Ok(4f64.powf(p.s) * gamma(0.5 * n + p.s) / (PI.powf(0.5 * n) * gamma(-p.s).abs()))
}

/// Sharp constant of the fractional Hardy inequality,
/// `4^s Gamma^2((N+2s)/4) / Gamma^2((N-2s)/4)`.
pub fn hardy_constant(p: &HardyParams) -> Result<f64> {
    check_order(p)?;
    let n = p.n();
    let ratio = gamma((n + 2.0 * p.s) / 4.0) / gamma((n - 2.0 * p.s) / 4.0);
    Ok(4f64.powf(p.s) * ratio * ratio)
}

fn lambda_of_alpha_unchecked(p: &HardyParams, alpha: f64) -> f64 {
    let n = p.n();
    let s2 = 2.0 * p.s;
    let a2 = 2.0 * alpha;
    4f64.powf(p.s) * gamma((n + s2 + a2) / 4.0) * gamma((n + s2 - a2) / 4.0)
        / (gamma((n - s2 + a2) / 4.0) * gamma((n - s2 - a2) / 4.0))
}

/// d lambda / d alpha through the digamma function.
fn dlambda_dalpha(p: &HardyParams, alpha: f64) -> f64 {
    let n = p.n();
    let s2 = 2.0 * p.s;
    let a2 = 2.0 * alpha;
    let psi =
        digamma((n + s2 + a2) / 4.0) - digamma((n + s2 - a2) / 4.0) - digamma((n - s2 + a2) / 4.0)
            + digamma((n - s2 - a2) / 4.0);
    0.5 * lambda_of_alpha_unchecked(p, alpha) * psi
}

/// The Gamma identity relating the shift `alpha` to the coupling `lambda`.
pub fn lambda_of_alpha(p: &HardyParams, alpha: f64) -> Result<f64> {
    check_order(p)?;
    let amax = p.alpha_max();
    if !(alpha >= 0.0 && alpha < amax) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} outside [0, {amax})"
        )));
    }
    Ok(lambda_of_alpha_unchecked(p, alpha))
}

/// Solves the Gamma identity for `alpha` given `p.lambda` and returns the
/// matching growth exponent `beta = (N - 2s)/2 - alpha`.
pub fn triple_of_lambda(p: &HardyParams) -> Result<SpectralTriple> {
    let hardy = hardy_constant(p)?;
    let lambda = p.lambda;
    if !(lambda > 0.0) || lambda > hardy * (1.0 + 1e-12) {
        return Err(Error::Supercritical { lambda, hardy });
    }
    let amax = p.alpha_max();
    if lambda >= hardy {
        return Ok(SpectralTriple {
            alpha: 0.0,
            lambda,
            beta: amax,
        });
    }
    // lambda_of_alpha decreases from hardy at 0 to 0 at amax
    let (mut lo, mut hi) = (0.0, amax);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if lambda_of_alpha_unchecked(p, mid) > lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut alpha = 0.5 * (lo + hi);
    let slope = dlambda_dalpha(p, alpha);
    if slope.is_finite() && slope < 0.0 {
        let polished = alpha - (lambda_of_alpha_unchecked(p, alpha) - lambda) / slope;
        if polished >= lo && polished <= hi {
            alpha = polished;
        }
    }
    Ok(SpectralTriple {
        alpha,
        lambda,
        beta: amax - alpha,
    })
}

/// Growth exponent `beta(lambda)`; zero for `lambda = 0`.
pub fn beta_of_lambda(p: &HardyParams) -> Result<f64> {
    if p.lambda == 0.0 {
        check_order(p)?;
        return Ok(0.0);
    }
    Ok(triple_of_lambda(p)?.beta)
}

/// Threshold below which the parabolic flow stabilizes: the supremum of the
/// couplings whose growth exponent stays below `2s`.
///
/// This is `Lambda_{N,s}` when `N < 6s` and `lambda(alpha_*)` with
/// `alpha_* = (N - 6s)/2` otherwise.
pub fn lambda_star(p: &HardyParams) -> Result<f64> {
    check_order(p)?;
    let alpha_star = 0.5 * (p.n() - 6.0 * p.s);
    if alpha_star <= 0.0 {
        hardy_constant(p)
    } else {
        lambda_of_alpha(p, alpha_star)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim: u32, s: f64) -> HardyParams {
        HardyParams {
            dim,
            s,
            lambda: 0.0,
            gamma: 1.0,
        }
    }

    #[test]
    fn gamma_small_integers_and_half() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-15);
        assert!((gamma(5.0) - 24.0).abs() < 24.0 * 1e-14);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn digamma_one_is_minus_euler() {
        assert!((digamma(1.0) + 0.577_215_664_901_532_9).abs() < 1e-14);
    }

    #[test]
    fn normalization_at_half_is_inverse_pi() {
        let c = normalization_constant(&params(1, 0.5)).unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_orders() {
        let p = HardyParams {
            dim: 1,
            s: 0.5,
            lambda: 0.0,
            gamma: 1.0,
        };
        assert!(hardy_constant(&p).is_err());
        let q = HardyParams { s: 1.2, ..p };
        assert!(normalization_constant(&q).is_err());
        assert!(HardyParams::new(1, 0.6, 0.0, 1.0).is_err());
    }

    #[test]
    fn alpha_zero_reproduces_hardy() {
        for (dim, s) in [(1, 0.25), (2, 0.5), (3, 0.9), (4, 0.3)] {
            let p = params(dim, s);
            let h = hardy_constant(&p).unwrap();
            let l = lambda_of_alpha(&p, 0.0).unwrap();
            assert!((l - h).abs() <= 1e-14 * h);
        }
    }

    #[test]
    fn lambda_vanishes_at_alpha_max() {
        let p = params(1, 0.25);
        let l = lambda_of_alpha(&p, p.alpha_max() * (1.0 - 1e-9)).unwrap();
        assert!(l > 0.0 && l < 1e-8);
        assert!(lambda_of_alpha(&p, p.alpha_max()).is_err());
        assert!(lambda_of_alpha(&p, -0.1).is_err());
    }

    #[test]
    fn critical_coupling_gives_maximal_beta() {
        let p = params(3, 0.5);
        let h = hardy_constant(&p).unwrap();
        let t = triple_of_lambda(&p.with_lambda(h)).unwrap();
        assert_eq!(t.alpha, 0.0);
        assert_eq!(t.beta, 1.0);
    }

    #[test]
    fn supercritical_coupling_is_rejected() {
        let p = params(1, 0.25);
        let h = hardy_constant(&p).unwrap();
        assert!(matches!(
            triple_of_lambda(&p.with_lambda(1.01 * h)),
            Err(Error::Supercritical { .. })
        ));
        assert!(triple_of_lambda(&p.with_lambda(0.0)).is_err());
    }

    #[test]
    fn lambda_star_regimes() {
        let p = params(1, 0.25);
        assert_eq!(lambda_star(&p).unwrap(), hardy_constant(&p).unwrap());
        let q = params(4, 0.5);
        let ls = lambda_star(&q).unwrap();
        assert!(ls < hardy_constant(&q).unwrap());
        assert!((ls - lambda_of_alpha(&q, 0.5).unwrap()).abs() < 1e-15);
    }
}
