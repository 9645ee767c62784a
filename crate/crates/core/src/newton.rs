//! Damped Newton for the semilinear systems shared by the elliptic and the
//! parabolic solvers:
//!
//! `F(w) = S w - c ⊙ (w + eps)^{-gamma} - r = 0`
//!
//! with `S` symmetric, `c >= 0` and `r` given. For `S` positive definite the
//! map is the gradient of a strictly convex energy.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, lu_solve, mat_vec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Relative tolerance on the sup-norm residual.
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 50,
            tol: 1e-10,
            max_halvings: 40,
        }
    }
}

pub struct SemilinearSystem<'a> {
    pub matrix: &'a Mat<f64>,
    /// Nonnegative coefficients of the singular term.
    pub weight: Vec<f64>,
    pub rhs: Vec<f64>,
    pub eps: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual_inf: f64,
    /// Scale the residual was measured against.
    pub scale: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl SemilinearSystem<'_> {
    fn singular(&self, w: &[f64]) -> Vec<f64> {
        self.weight
            .iter()
            .zip(w)
            .map(|(c, x)| {
                if *c == 0.0 {
                    0.0
                } else {
                    c * (x + self.eps).powf(-self.gamma)
                }
            })
            .collect()
    }

    pub fn residual(&self, w: &[f64]) -> Vec<f64> {
        let sw = mat_vec(self.matrix, w);
        let g = self.singular(w);
        sw.iter()
            .zip(&g)
            .zip(&self.rhs)
            .map(|((a, b), r)| a - b - r)
            .collect()
    }

    /// Magnitude of the individual terms, used to make the tolerance relative.
    fn scale(&self, w: &[f64]) -> f64 {
        let diag_w = (0..w.len())
            .map(|i| (self.matrix[(i, i)] * w[i]).abs())
            .fold(0.0, f64::max);
        1.0 + sup(&self.rhs) + sup(&self.singular(w)) + diag_w
    }

    fn jacobian(&self, w: &[f64]) -> Mat<f64> {
        let mut j = self.matrix.clone();
        for (i, (c, x)) in self.weight.iter().zip(w).enumerate() {
            if *c != 0.0 {
                j[(i, i)] += self.gamma * c * (x + self.eps).powf(-self.gamma - 1.0);
            }
        }
        j
    }

    /// Energy whose gradient is the residual.
    pub fn energy(&self, w: &[f64]) -> f64 {
        let sw = mat_vec(self.matrix, w);
        let quad: f64 = 0.5 * sw.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        let lin: f64 = self.rhs.iter().zip(w).map(|(a, b)| a * b).sum();
        let sing: f64 = self
            .weight
            .iter()
            .zip(w)
            .map(|(c, x)| {
                if *c == 0.0 {
                    0.0
                } else {
                    c * primitive(x + self.eps, self.gamma)
                }
            })
            .sum();
        quad - sing - lin
    }

    /// Longest step along `d` keeping `w + eps` above a tenth of its value.
    fn max_step(&self, w: &[f64], d: &[f64]) -> f64 {
        let mut t = 1.0f64;
        for ((c, x), dx) in self.weight.iter().zip(w).zip(d) {
            if *c != 0.0 && *dx < 0.0 {
                t = t.min(0.9 * (x + self.eps) / -dx);
            }
        }
        t
    }

    pub fn solve(&self, init: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome> {
        let n = init.len();
        let mut w: Vec<f64> = init.to_vec();
        let has_singular = self.weight.iter().any(|c| *c != 0.0);
        if has_singular {
            for (i, x) in w.iter_mut().enumerate() {
                if !(*x + self.eps > 0.0) {
                    if self.eps > 0.0 {
                        *x = 0.0;
                    } else {
                        return Err(Error::PositivityLost { node: i, value: *x });
                    }
                }
            }
        }
        let mut f = self.residual(&w);
        let mut fnorm = norm2(&f);
        for iter in 0..=opts.max_iter {
            let scale = self.scale(&w);
            let finf = sup(&f);
            if finf <= opts.tol * scale {
                return Ok(NewtonOutcome {
                    solution: w,
                    iterations: iter,
                    residual_inf: finf,
                    scale,
                });
            }
            if iter == opts.max_iter {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    residual: finf,
                });
            }
            let jac = self.jacobian(&w);
            let neg: Vec<f64> = f.iter().map(|x| -x).collect();
            let d = match cholesky_solve(&jac, &neg) {
                Ok(d) => d,
                Err(_) => lu_solve(&jac, &neg),
            };
            let slope: f64 = f.iter().zip(&d).map(|(a, b)| a * b).sum();
            let e0 = if has_singular { self.energy(&w) } else { 0.0 };
            let mut t = if has_singular {
                self.max_step(&w, &d)
            } else {
                1.0
            };
            let mut accepted = false;
            for _ in 0..=opts.max_halvings {
                let trial: Vec<f64> = (0..n).map(|i| w[i] + t * d[i]).collect();
                let ft = self.residual(&trial);
                let nt = norm2(&ft);
                // Armijo on the energy (convex case) or plain residual decrease
                let energy_ok = slope < 0.0 && {
                    let et = self.energy(&trial);
                    et.is_finite() && et <= e0 + 1e-4 * t * slope
                };
                if nt.is_finite() && (nt < fnorm || energy_ok) {
                    w = trial;
                    f = ft;
                    fnorm = nt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // rounding floor: accept if already within a modest factor
                if finf <= 1e3 * opts.tol * scale {
                    return Ok(NewtonOutcome {
                        solution: w,
                        iterations: iter,
                        residual_inf: finf,
                        scale,
                    });
                }
                return Err(Error::NonConvergence {
                    iterations: iter,
                    residual: finf,
                });
            }
        }
        unreachable!()
    }
}

/// Antiderivative of `u^{-gamma}`: `u^{1-gamma}/(1-gamma)`, or `ln u` at
/// `gamma = 1`.
pub fn primitive(u: f64, gamma: f64) -> f64 {
    if (gamma - 1.0).abs() < 1e-14 {
        u.ln()
    } else {
        u.powf(1.0 - gamma) / (1.0 - gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_equation_converges() {
        // 2w - w^{-1} = 1  ->  w = 1
        let m = Mat::from_fn(1, 1, |_, _| 2.0);
        let sys = SemilinearSystem {
            matrix: &m,
            weight: vec![1.0],
            rhs: vec![1.0],
            eps: 0.0,
            gamma: 1.0,
        };
        let out = sys.solve(&[10.0], &NewtonOptions::default()).unwrap();
        assert!((out.solution[0] - 1.0).abs() < 1e-10);
        let out = sys.solve(&[1e-6], &NewtonOptions::default()).unwrap();
        assert!((out.solution[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linear_system_without_singular_term() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { 2.0 } else { -1.0 });
        let sys = SemilinearSystem {
            matrix: &m,
            weight: vec![0.0, 0.0],
            rhs: vec![1.0, 0.0],
            eps: 0.5,
            gamma: 1.0,
        };
        let out = sys.solve(&[0.3, 0.3], &NewtonOptions::default()).unwrap();
        assert!((out.solution[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((out.solution[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn primitive_derivative() {
        for g in [0.5, 1.0, 2.0] {
            let u = 0.7;
            let h = 1e-6;
            let d = (primitive(u + h, g) - primitive(u - h, g)) / (2.0 * h);
            assert!((d - u.powf(-g)).abs() < 1e-8);
        }
    }
}
