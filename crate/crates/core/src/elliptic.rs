//! Regularized elliptic problems, the monotone ladder in the regularization
//! level, blow-up detection above the Hardy threshold and the analytic
//! integrability test.

use std::fmt;

use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{beta_of_lambda, hardy_constant, HardyParams};
use crate::data::DataSpec;
use crate::error::{Error, Result};
use crate::linalg::is_positive_definite;
use crate::mesh::GridFunction;
use crate::newton::{NewtonOptions, SemilinearSystem};
use crate::operators::OperatorSet;

/// Regularization level: `Finite(n)` truncates the Hardy weight to
/// `1/(|x|^{2s} + 1/n)`, shifts the singular term to `(w + 1/n)^{-gamma}` and
/// clamps the data at `n`. `Limit` is the untruncated problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Finite(u64),
    Limit,
}

impl Level {
    pub fn eps(self) -> f64 {
        match self {
            Level::Finite(n) => 1.0 / n as f64,
            Level::Limit => 0.0,
        }
    }

    fn cap(self) -> f64 {
        match self {
            Level::Finite(n) => n as f64,
            Level::Limit => f64::INFINITY,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(n) => write!(f, "{n}"),
            Level::Limit => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticProblem {
    pub params: HardyParams,
    pub mu: DataSpec,
    pub f: DataSpec,
    pub level: Level,
}

impl EllipticProblem {
    pub fn new(params: HardyParams, mu: DataSpec, f: DataSpec) -> Self {
        EllipticProblem {
            params,
            mu,
            f,
            level: Level::Finite(1),
        }
    }

    pub fn at(&self, level: Level) -> Self {
        EllipticProblem {
            level,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.mu.is_nonnegative() || !self.f.is_nonnegative() {
            return Err(Error::InvalidParameter(
                "mu and f must be nonnegative".into(),
            ));
        }
        if let Level::Finite(0) = self.level {
            return Err(Error::InvalidParameter(
                "regularization level must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub level: Level,
    pub solution: GridFunction,
    pub newton_iters: usize,
    pub residual_norm: f64,
    /// Minimum over the compact `R/8 <= |x| <= R/2`.
    pub min_interior: f64,
    pub energy: f64,
    /// Whether the solution dominates the initial guess nodewise.
    pub monotone_wrt_previous: bool,
}

/// Slack for nodewise orderings, relative to the sup norm.
pub const ORDER_SLACK: f64 = 1e-10;

pub fn dominates(upper: &[f64], lower: &[f64]) -> bool {
    let scale = upper
        .iter()
        .chain(lower)
        .fold(1.0f64, |m, v| m.max(v.abs()));
    upper
        .iter()
        .zip(lower)
        .all(|(u, l)| *u >= *l - ORDER_SLACK * scale)
}

/// `A - lambda H_level` on interior nodes.
pub fn shifted_operator(ops: &OperatorSet, lambda: f64, level: Level) -> Mat<f64> {
    let mut k = ops.stiffness.clone();
    if lambda != 0.0 {
        let h = match level {
            Level::Finite(n) => ops.hardy_regularized(n),
            Level::Limit => ops.hardy.clone(),
        };
        h.interior().add_to(&mut k, -lambda);
    }
    k
}

fn truncated_interior(spec: &DataSpec, ops: &OperatorSet, cap: f64) -> Vec<f64> {
    let v = spec.nodal(&ops.mesh);
    v[1..v.len() - 1].iter().map(|x| x.min(cap)).collect()
}

/// Solves `A w - lambda H_n w - M_L mu_n (w + 1/n)^{-gamma} - M_L f_n = 0`.
pub fn solve_regularized(
    ops: &OperatorSet,
    prob: &EllipticProblem,
    init: &GridFunction,
    opts: &NewtonOptions,
) -> Result<SolveReport> {
    prob.validate()?;
    let k = shifted_operator(ops, prob.params.lambda, prob.level);
    solve_with_operator(ops, &k, prob, init, opts)
}

fn solve_with_operator(
    ops: &OperatorSet,
    k: &Mat<f64>,
    prob: &EllipticProblem,
    init: &GridFunction,
    opts: &NewtonOptions,
) -> Result<SolveReport> {
    let cap = prob.level.cap();
    let ml = ops.lumped_interior();
    let mu = truncated_interior(&prob.mu, ops, cap);
    let f = truncated_interior(&prob.f, ops, cap);
    let sys = SemilinearSystem {
        matrix: k,
        weight: mu.iter().zip(ml).map(|(a, m)| a * m).collect(),
        rhs: f.iter().zip(ml).map(|(a, m)| a * m).collect(),
        eps: prob.level.eps(),
        gamma: prob.params.gamma,
    };
    let out = sys.solve(init.interior(), opts)?;
    let trivial = prob.mu.is_zero() && prob.f.is_zero();
    if !trivial {
        if let Some((i, v)) = out.solution.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::PositivityLost {
                node: i + 1,
                value: *v,
            });
        }
    }
    let energy = sys.energy(&out.solution);
    let solution = GridFunction::from_interior(ops.mesh.clone(), &out.solution);
    let r = ops.mesh.radius;
    Ok(SolveReport {
        level: prob.level,
        min_interior: solution.min_on_annulus(r / 8.0, r / 2.0),
        monotone_wrt_previous: dominates(solution.interior(), init.interior()),
        solution,
        newton_iters: out.iterations,
        residual_norm: out.residual_inf,
        energy,
    })
}

/// Default ladder `2, 4, ..., 1024`.
pub fn default_schedule() -> Vec<u64> {
    (1..=10).map(|k| 1u64 << k).collect()
}

#[derive(Debug, Clone)]
pub struct Ladder {
    pub reports: Vec<SolveReport>,
    /// Last L1 increment fell below the stopping tolerance.
    pub converged: bool,
    /// The L1 norm doubled across three consecutive steps.
    pub diverging: bool,
    pub increments: Vec<f64>,
}

impl Ladder {
    pub fn last(&self) -> &SolveReport {
        self.reports.last().expect("ladder has at least one level")
    }

    /// Every consecutive pair is nodewise ordered.
    pub fn monotone(&self) -> bool {
        self.reports
            .windows(2)
            .all(|w| dominates(w[1].solution.interior(), w[0].solution.interior()))
    }
}

/// Positive constant start used when no initial guess is given.
pub fn default_init(ops: &OperatorSet) -> GridFunction {
    GridFunction::constant(ops.mesh.clone(), 1.0)
}

/// Runs the regularization ladder with warm starts.
pub fn solve_ladder(
    ops: &OperatorSet,
    prob0: &EllipticProblem,
    schedule: &[u64],
    stop_tol: f64,
    init: Option<&GridFunction>,
    opts: &NewtonOptions,
) -> Result<Ladder> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "schedule must be nonempty and strictly increasing".into(),
        ));
    }
    let mut current = init.cloned().unwrap_or_else(|| default_init(ops));
    let mut reports: Vec<SolveReport> = Vec::new();
    let mut increments = Vec::new();
    let mut converged = false;
    let mut diverging = false;
    for &n in schedule {
        let rep = solve_regularized(ops, &prob0.at(Level::Finite(n)), &current, opts)?;
        let norm = rep.solution.l1_norm();
        if let Some(prev) = reports.last() {
            let inc = rep.solution.l1_distance(&prev.solution);
            increments.push(inc);
            converged = inc < stop_tol;
        }
        if reports.len() >= 3 {
            let back = reports[reports.len() - 3].solution.l1_norm();
            if norm >= 2.0 * back && back > 0.0 {
                diverging = true;
            }
        }
        current = rep.solution.clone();
        reports.push(rep);
        if converged {
            break;
        }
    }
    Ok(Ladder {
        reports,
        converged,
        diverging,
        increments,
    })
}

/// Solves the untruncated problem starting from a ladder member.
pub fn solve_limit(
    ops: &OperatorSet,
    prob: &EllipticProblem,
    init: &GridFunction,
    opts: &NewtonOptions,
) -> Result<SolveReport> {
    solve_regularized(ops, &prob.at(Level::Limit), init, opts)
}

/// Ladder followed by the untruncated polish: the discrete stationary solution.
pub fn stationary_solution(
    ops: &OperatorSet,
    prob: &EllipticProblem,
    opts: &NewtonOptions,
) -> Result<SolveReport> {
    let ladder = solve_ladder(ops, prob, &default_schedule(), 0.0, None, opts)?;
    solve_limit(ops, prob, &ladder.last().solution, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlowupVerdict {
    Blowup,
    Bounded,
    Inconclusive,
}

impl fmt::Display for BlowupVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BlowupVerdict::Blowup => "blowup",
            BlowupVerdict::Bounded => "bounded",
            BlowupVerdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub levels: Vec<u64>,
    /// `min_K u_n`; `+inf` once `A - lambda H_n` stops being positive
    /// definite, where no positive discrete solution exists.
    pub min_on_k: Vec<f64>,
    pub threshold: f64,
    pub verdict: BlowupVerdict,
    /// First level at which `A - lambda H_n` is indefinite.
    pub indefinite_at: Option<u64>,
    /// Inner solver failure, with the data gathered before it.
    pub error: Option<String>,
}

/// Relative change below which the ladder counts as stabilized.
pub const STABILIZED_REL: f64 = 1e-3;

impl BlowupReport {
    pub fn verdict_at(&self, threshold: f64) -> BlowupVerdict {
        classify(&self.min_on_k, threshold)
    }
}

fn classify(values: &[f64], threshold: f64) -> BlowupVerdict {
    if values.is_empty() {
        return BlowupVerdict::Inconclusive;
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let last = values[values.len() - 1];
    if increasing && last > threshold {
        return BlowupVerdict::Blowup;
    }
    if values.len() >= 2 && last.is_finite() {
        let prev = values[values.len() - 2];
        if ((last - prev) / last.abs().max(f64::MIN_POSITIVE)).abs() < STABILIZED_REL {
            return BlowupVerdict::Bounded;
        }
    }
    BlowupVerdict::Inconclusive
}

/// Follows `min_K u_n` along the schedule. `k` is the interval `[a, b]`.
pub fn detect_blowup(
    ops: &OperatorSet,
    prob: &EllipticProblem,
    schedule: &[u64],
    k: (f64, f64),
    threshold: f64,
    opts: &NewtonOptions,
) -> BlowupReport {
    let mut levels = Vec::new();
    let mut min_on_k = Vec::new();
    let mut indefinite_at = None;
    let mut error = None;
    let mut current = default_init(ops);
    for &n in schedule {
        let level = Level::Finite(n);
        let op = shifted_operator(ops, prob.params.lambda, level);
        levels.push(n);
        if !is_positive_definite(&op) {
            indefinite_at = Some(n);
            min_on_k.push(f64::INFINITY);
            break;
        }
        match solve_with_operator(ops, &op, &prob.at(level), &current, opts) {
            Ok(rep) => {
                min_on_k.push(rep.solution.min_on_interval(k.0, k.1));
                current = rep.solution;
            }
            Err(e) => {
                levels.pop();
                error = Some(format!("level {n}: {e}"));
                break;
            }
        }
    }
    BlowupReport {
        verdict: classify(&min_on_k, threshold),
        levels,
        min_on_k,
        threshold,
        indefinite_at,
        error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrability {
    Finite,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub f_condition: Integrability,
    pub mu_condition: Integrability,
    pub theta_critical: f64,
    pub beta: f64,
}

/// Power counting for `f = |x|^{-theta}` and `mu = delta^{p}`:
/// `∫ f |x|^{-beta}` is finite iff `theta + beta < N`, and
/// `∫ mu delta^{-s(gamma-1)}` is finite iff `p - s(gamma-1) > -1`.
pub fn integrability_check(
    theta: f64,
    mu_power: f64,
    p: &HardyParams,
) -> Result<IntegrabilityReport> {
    p.validate()?;
    let hardy = hardy_constant(p)?;
    if p.lambda > hardy * (1.0 + 1e-12) {
        return Err(Error::Supercritical {
            lambda: p.lambda,
            hardy,
        });
    }
    let beta = beta_of_lambda(p)?;
    let n = p.n();
    let verdict = |ok: bool| {
        if ok {
            Integrability::Finite
        } else {
            Integrability::Divergent
        }
    };
    Ok(IntegrabilityReport {
        f_condition: verdict(theta + beta < n),
        mu_condition: verdict(mu_power - p.s * (p.gamma - 1.0) > -1.0),
        theta_critical: n - beta,
        beta,
    })
}

/// Smallest margin of
/// `(a-b)(a^g - b^g) - 4g/(g+1)^2 (a^{(g+1)/2} - b^{(g+1)/2})^2`
/// over random pairs of positive nodal values (relative to the left side).
pub fn elementary_inequality_margin(
    u: &GridFunction,
    gamma: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> f64 {
    let vals: Vec<f64> = u.interior().iter().copied().filter(|v| *v > 0.0).collect();
    if vals.len() < 2 {
        return 0.0;
    }
    let c = 4.0 * gamma / (gamma + 1.0).powi(2);
    let q = 0.5 * (gamma + 1.0);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let a = vals[rng.random_range(0..vals.len())];
        let b = vals[rng.random_range(0..vals.len())];
        let lhs = (a - b) * (a.powf(gamma) - b.powf(gamma));
        let rhs = c * (a.powf(q) - b.powf(q)).powi(2);
        let scale = lhs.abs().max(f64::MIN_POSITIVE);
        worst = worst.min((lhs - rhs) / scale);
    }
    worst
}

/// `vᵀ A v` for `v = u^{power}`.
pub fn power_energy(ops: &OperatorSet, u: &GridFunction, power: f64) -> f64 {
    let v: Vec<f64> = u
        .interior()
        .iter()
        .map(|x| x.max(0.0).powf(power))
        .collect();
    ops.energy_form(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky_solve;
    use crate::mesh::build_mesh;
    use crate::operators::assemble;
    use std::sync::Arc;

    fn ops(cells: usize) -> OperatorSet {
        let mesh = Arc::new(build_mesh(1.0, cells, 2.0, 2.0).unwrap());
        assemble(mesh, 0.25, &[]).unwrap()
    }

    fn params(frac: f64, gamma: f64) -> HardyParams {
        HardyParams::with_lambda_fraction(1, 0.25, frac, gamma).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let o = ops(32);
        let prob =
            EllipticProblem::new(params(0.5, 1.0), DataSpec::Const(0.0), DataSpec::Const(0.0))
                .at(Level::Finite(8));
        let rep =
            solve_regularized(&o, &prob, &default_init(&o), &NewtonOptions::default()).unwrap();
        assert!(rep.solution.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn matches_damped_picard_oracle() {
        let o = ops(48);
        let n = 64;
        let eps = 1.0 / n as f64;
        let prob =
            EllipticProblem::new(params(0.0, 1.0), DataSpec::Const(1.0), DataSpec::Const(0.0))
                .at(Level::Finite(n));
        let rep =
            solve_regularized(&o, &prob, &default_init(&o), &NewtonOptions::default()).unwrap();
        let ml = o.lumped_interior();
        let mut u = vec![0.5; ml.len()];
        for _ in 0..400 {
            let rhs: Vec<f64> = u.iter().zip(ml).map(|(v, m)| m / (v + eps)).collect();
            let t = cholesky_solve(&o.stiffness, &rhs).unwrap();
            for (a, b) in u.iter_mut().zip(&t) {
                *a = 0.5 * (*a + b);
            }
        }
        let diff = u
            .iter()
            .zip(rep.solution.interior())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn level_increase_is_monotone() {
        let o = ops(64);
        let prob =
            EllipticProblem::new(params(0.5, 1.0), DataSpec::Const(1.0), DataSpec::Const(1.0));
        let opts = NewtonOptions::default();
        let r32 =
            solve_regularized(&o, &prob.at(Level::Finite(32)), &default_init(&o), &opts).unwrap();
        let r64 = solve_regularized(&o, &prob.at(Level::Finite(64)), &r32.solution, &opts).unwrap();
        assert!(r64.monotone_wrt_previous);
        assert!(r64.min_interior > 0.0);
    }

    #[test]
    fn integrability_power_counting() {
        let p = params(1.0, 1.0);
        let r = integrability_check(0.0, 0.0, &p).unwrap();
        assert_eq!(r.f_condition, Integrability::Finite);
        assert!((r.beta - 0.25).abs() < 1e-9);
        let over = integrability_check(r.theta_critical + 0.1, 0.0, &p).unwrap();
        assert_eq!(over.f_condition, Integrability::Divergent);
        let g = params(0.5, 0.5);
        assert_eq!(
            integrability_check(0.0, 0.0, &g).unwrap().mu_condition,
            Integrability::Finite
        );
        let steep = params(0.5, 9.0);
        assert_eq!(
            integrability_check(0.0, 0.0, &steep).unwrap().mu_condition,
            Integrability::Divergent
        );
        assert!(integrability_check(0.0, 0.0, &p.with_lambda(p.lambda * 1.1)).is_err());
    }

    #[test]
    fn classify_verdicts() {
        assert_eq!(classify(&[1.0, 10.0, 2e3], 1e3), BlowupVerdict::Blowup);
        assert_eq!(classify(&[1.0, 2.0, 2.0001], 1e3), BlowupVerdict::Bounded);
        assert_eq!(
            classify(&[1.0, 5.0, f64::INFINITY], 1e3),
            BlowupVerdict::Blowup
        );
        assert_eq!(classify(&[1.0, 2.0, 3.0], 1e3), BlowupVerdict::Inconclusive);
    }
}
