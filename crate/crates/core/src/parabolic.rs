//! Implicit Euler for `u_t + (-Δ)^s u - λ u/|x|^{2s} - u^{-γ} = f`, with the
//! resolvent step, the discrete energy identity, contraction and
//! stabilization monitors.

use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::constants::{beta_of_lambda, hardy_constant, HardyParams};
use crate::data::DataSpec;
use crate::elliptic::{default_schedule, dominates, solve_ladder, solve_limit, EllipticProblem};
use crate::error::{Error, Result};
use crate::linalg::mat_vec;
use crate::mesh::GridFunction;
use crate::newton::{primitive, NewtonOptions, SemilinearSystem};
use crate::operators::OperatorSet;
use crate::quadrature::gauss;

/// The map `g ↦ u` solving `M_L u + θ((A - λH) u - M_L u^{-γ}) = M_L g`.
pub struct Resolvent<'a> {
    ops: &'a OperatorSet,
    params: HardyParams,
    theta: f64,
    matrix: Mat<f64>,
    singular: bool,
    pub newton: NewtonOptions,
}

/// L∞ change between ε stages below which the ε-ladder stops.
pub const EPS_LADDER_TOL: f64 = 1e-11;

impl<'a> Resolvent<'a> {
    pub fn new(ops: &'a OperatorSet, p: &HardyParams, theta: f64) -> Result<Self> {
        p.validate()?;
        let hardy = hardy_constant(p)?;
        if p.lambda >= hardy {
            return Err(Error::Supercritical {
                lambda: p.lambda,
                hardy,
            });
        }
        if !(theta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "theta = {theta} must be positive"
            )));
        }
        let mut matrix = ops.stiffness.clone();
        for v in matrix.col_iter_mut() {
            for x in v.iter_mut() {
                *x *= theta;
            }
        }
        ops.hardy.interior().add_to(&mut matrix, -theta * p.lambda);
        for (i, m) in ops.lumped_interior().iter().enumerate() {
            matrix[(i, i)] += m;
        }
        Ok(Resolvent {
            ops,
            params: *p,
            theta,
            matrix,
            singular: true,
            newton: NewtonOptions::default(),
        })
    }

    /// Drops the `u^{-γ}` term, leaving the linear resolvent.
    pub fn without_singular_term(mut self) -> Self {
        self.singular = false;
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn system(&self, g: &[f64], eps: f64) -> SemilinearSystem<'_> {
        let ml = self.ops.lumped_interior();
        let c = if self.singular { self.theta } else { 0.0 };
        SemilinearSystem {
            matrix: &self.matrix,
            weight: ml.iter().map(|m| c * m).collect(),
            rhs: ml.iter().zip(g).map(|(m, v)| m * v).collect(),
            eps,
            gamma: self.params.gamma,
        }
    }

    /// Solves for interior values `g`; `init` seeds the first ε stage.
    pub fn solve_interior(&self, g: &[f64], init: Option<&[f64]>) -> Result<Vec<f64>> {
        if !self.singular {
            let out = self.system(g, 0.0).solve(init.unwrap_or(g), &self.newton)?;
            return Ok(out.solution);
        }
        let mut u: Vec<f64> = match init {
            Some(v) => v.iter().map(|x| x.max(0.0)).collect(),
            None => g.iter().map(|x| x.max(0.0)).collect(),
        };
        let mut eps = 0.5;
        loop {
            let next = self.system(g, eps).solve(&u, &self.newton)?.solution;
            let change = next
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            u = next;
            if change < EPS_LADDER_TOL || eps < 1e-300 {
                break;
            }
            eps *= 0.5;
        }
        let out = self.system(g, 0.0).solve(&u, &self.newton)?;
        if let Some((i, v)) = out.solution.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::PositivityLost {
                node: i + 1,
                value: *v,
            });
        }
        Ok(out.solution)
    }

    /// `M_L^{-1}` times the residual of the stationary operator at `u`:
    /// `(A - λH) u / M_L - u^{-γ}`, interior values.
    pub fn stationary_operator(&self, u: &[f64]) -> Vec<f64> {
        stationary_operator(self.ops, &self.params, u, self.singular)
    }
}

pub fn stationary_operator(
    ops: &OperatorSet,
    p: &HardyParams,
    u: &[f64],
    singular: bool,
) -> Vec<f64> {
    let au = mat_vec(&ops.stiffness, u);
    let hu = ops.hardy.interior().mul_vec(u);
    ops.lumped_interior()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let sing = if singular { u[i].powf(-p.gamma) } else { 0.0 };
            (au[i] - p.lambda * hu[i]) / m - sing
        })
        .collect()
}

/// One resolvent solve with a fresh ε-ladder.
pub fn resolvent_solve(
    ops: &OperatorSet,
    theta: f64,
    p: &HardyParams,
    g: &GridFunction,
) -> Result<GridFunction> {
    let r = Resolvent::new(ops, p, theta)?;
    let u = r.solve_interior(g.interior(), None)?;
    Ok(GridFunction::from_interior(ops.mesh.clone(), &u))
}

/// Source term `f(x, t)` evaluated at interior nodes.
#[derive(Clone)]
pub enum Source {
    Steady(DataSpec),
    Function(Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>),
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Steady(d) => write!(f, "Steady({d})"),
            Source::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Source {
    pub fn zero() -> Self {
        Source::Steady(DataSpec::Const(0.0))
    }

    /// From a pointwise `f(x, t)`.
    pub fn from_xt(ops: &OperatorSet, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        let nodes: Vec<f64> = ops.mesh.nodes[1..ops.mesh.node_count() - 1].to_vec();
        Source::Function(Arc::new(move |t| nodes.iter().map(|&x| f(x, t)).collect()))
    }

    /// Mean over `[a, b]` at interior nodes (5-point Gauss in time).
    pub fn average(&self, ops: &OperatorSet, a: f64, b: f64) -> Vec<f64> {
        match self {
            Source::Steady(d) => {
                let v = d.nodal(&ops.mesh);
                v[1..v.len() - 1].to_vec()
            }
            Source::Function(f) => {
                let rule = gauss(5);
                let mut acc = vec![0.0; ops.interior_count()];
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = a + 0.5 * (b - a) * (x + 1.0);
                    for (s, v) in acc.iter_mut().zip(f(t)) {
                        *s += 0.5 * w * v;
                    }
                }
                acc
            }
        }
    }
}

/// Sub/supersolution pair `m w <= u <= M w` built on the pure problem.
#[derive(Debug, Clone)]
pub struct ConeBracket {
    pub w: GridFunction,
    pub m: f64,
    pub big_m: f64,
}

impl ConeBracket {
    /// `w` solves `(-Δ)^s w = λ w/|x|^{2s} + w^{-γ}`; `m = 1/2` gives a
    /// subsolution and `M` the smallest value with `(M - M^{-γ}) w^{-γ} >= f`
    /// (at least 2).
    pub fn build(
        ops: &OperatorSet,
        p: &HardyParams,
        f: &[f64],
        opts: &NewtonOptions,
    ) -> Result<Self> {
        let prob = EllipticProblem::new(*p, DataSpec::Const(1.0), DataSpec::Const(0.0));
        let ladder = solve_ladder(ops, &prob, &default_schedule(), 0.0, None, opts)?;
        let w = solve_limit(ops, &prob, &ladder.last().solution, opts)?.solution;
        let need = f
            .iter()
            .zip(w.interior())
            .map(|(fi, wi)| fi.max(0.0) * wi.powf(p.gamma))
            .fold(0.0, f64::max);
        // M - M^{-γ} is increasing; bisect on [1, 2 + need]
        let (mut lo, mut hi) = (1.0f64, 2.0 + need);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - mid.powf(-p.gamma) >= need {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(ConeBracket {
            w,
            m: 0.5,
            big_m: hi.max(2.0),
        })
    }

    pub fn lower(&self) -> GridFunction {
        self.w.scaled(self.m)
    }

    pub fn upper(&self) -> GridFunction {
        self.w.scaled(self.big_m)
    }

    pub fn contains(&self, u: &[f64], slack: f64) -> bool {
        u.iter()
            .zip(self.w.interior())
            .all(|(v, w)| *v >= self.m * w - slack && *v <= self.big_m * w + slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// `Σ_j Δu_jᵀ M_L Δu_j / η`.
    pub kinetic_cum: f64,
    /// `½ uᵀ A u`.
    pub form: f64,
    /// `½ λ uᵀ H u`.
    pub hardy: f64,
    /// `Σ M_L G(u)` with `G` the primitive of `u^{-γ}`.
    pub singular: f64,
    /// `Σ_j f_jᵀ M_L Δu_j`.
    pub work: f64,
}

impl EnergyRecord {
    /// `½‖u‖² - ½λ‖u‖²_H - ∫G(u)`.
    pub fn energy(&self) -> f64 {
        self.form - self.hardy - self.singular
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Clip `f_k` into `[0, |x|^{γβ}]`.
    pub clip: bool,
    pub newton: NewtonOptions,
    /// Maximum number of stored snapshots.
    pub max_snapshots: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            clip: true,
            newton: NewtonOptions::default(),
            max_snapshots: 512,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParabolicRun {
    pub params: HardyParams,
    pub eta_t: f64,
    pub horizon: f64,
    pub steps: usize,
    pub snapshots: Vec<(f64, GridFunction)>,
    pub energy_trace: Vec<EnergyRecord>,
    /// Steps that left the cone bracket.
    pub cone_violations: usize,
    /// Nodal values of `f_k` changed by clipping.
    pub clipped: usize,
    /// Solver failure that ended the run early.
    pub failure: Option<String>,
}

impl ParabolicRun {
    pub fn last(&self) -> &GridFunction {
        &self
            .snapshots
            .last()
            .expect("run has the initial snapshot")
            .1
    }

    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

fn energy_terms(ops: &OperatorSet, p: &HardyParams, u: &[f64]) -> (f64, f64, f64) {
    let form = 0.5 * ops.energy_form(u);
    let hardy = 0.5 * p.lambda * ops.hardy.interior().quad_form(u);
    let singular = ops
        .lumped_interior()
        .iter()
        .zip(u)
        .map(|(m, v)| m * primitive(*v, p.gamma))
        .sum();
    (form, hardy, singular)
}

/// Runs `(u_k - u_{k-1})/η + L u_k = f_k` for `round(T/η)` steps.
#[allow(clippy::too_many_arguments)]
pub fn implicit_euler_run(
    ops: &OperatorSet,
    p: &HardyParams,
    source: &Source,
    u0: &GridFunction,
    eta_t: f64,
    horizon: f64,
    cone: Option<&ConeBracket>,
    opts: &RunOptions,
) -> Result<ParabolicRun> {
    if !(eta_t > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidParameter(
            "eta_t and T must be positive".into(),
        ));
    }
    let steps = (horizon / eta_t).round() as usize;
    if steps == 0 {
        return Err(Error::InvalidParameter(
            "T/eta_t rounds to zero steps".into(),
        ));
    }
    if u0.interior().iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter(
            "initial datum must be positive inside".into(),
        ));
    }
    let mut res = Resolvent::new(ops, p, eta_t)?;
    res.newton = opts.newton;
    let cap: Vec<f64> = if opts.clip {
        let beta = beta_of_lambda(p)?;
        ops.mesh.nodes[1..ops.mesh.node_count() - 1]
            .iter()
            .map(|x| x.abs().powf(p.gamma * beta))
            .collect()
    } else {
        Vec::new()
    };
    let stride = steps.div_ceil(opts.max_snapshots.max(1)).max(1);
    let ml = ops.lumped_interior();

    let mut u: Vec<f64> = u0.interior().to_vec();
    let (form, hardy, singular) = energy_terms(ops, p, &u);
    let mut run = ParabolicRun {
        params: *p,
        eta_t,
        horizon,
        steps,
        snapshots: vec![(0.0, u0.clone())],
        energy_trace: vec![EnergyRecord {
            t: 0.0,
            kinetic_cum: 0.0,
            form,
            hardy,
            singular,
            work: 0.0,
        }],
        cone_violations: 0,
        clipped: 0,
        failure: None,
    };
    if let Some(c) = cone {
        if !c.contains(&u, 1e-10) {
            log::warn!("initial datum outside the cone bracket");
            run.cone_violations += 1;
        }
    }
    let (mut kinetic, mut work) = (0.0, 0.0);
    for k in 1..=steps {
        let (a, b) = ((k - 1) as f64 * eta_t, k as f64 * eta_t);
        let mut f = source.average(ops, a, b);
        if opts.clip {
            for (v, c) in f.iter_mut().zip(&cap) {
                let clipped = v.clamp(0.0, *c);
                if clipped != *v {
                    run.clipped += 1;
                    *v = clipped;
                }
            }
        }
        let g: Vec<f64> = u.iter().zip(&f).map(|(a, b)| a + eta_t * b).collect();
        let next = match res.solve_interior(&g, Some(&u)) {
            Ok(v) => v,
            Err(e) => {
                run.failure = Some(format!("step {k}: {e}"));
                break;
            }
        };
        let du: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        kinetic += du.iter().zip(ml).map(|(d, m)| m * d * d).sum::<f64>() / eta_t;
        work += du
            .iter()
            .zip(ml)
            .zip(&f)
            .map(|((d, m), fv)| m * d * fv)
            .sum::<f64>();
        u = next;
        let (form, hardy, singular) = energy_terms(ops, p, &u);
        run.energy_trace.push(EnergyRecord {
            t: b,
            kinetic_cum: kinetic,
            form,
            hardy,
            singular,
            work,
        });
        if let Some(c) = cone {
            if !c.contains(&u, 1e-10) {
                run.cone_violations += 1;
            }
        }
        if k % stride == 0 || k == steps {
            run.snapshots
                .push((b, GridFunction::from_interior(ops.mesh.clone(), &u)));
        }
    }
    if run.cone_violations > 0 {
        log::warn!("{} steps left the cone bracket", run.cone_violations);
    }
    if run.clipped > 0 {
        log::warn!("source clipped at {} nodal values", run.clipped);
    }
    Ok(run)
}

/// Relative residual of the discrete energy identity at every step:
/// `kinetic + E(u_k) - E(u_0) - work`.
pub fn energy_identity_residual(run: &ParabolicRun) -> Vec<f64> {
    let e0 = run.energy_trace[0].energy();
    run.energy_trace
        .iter()
        .map(|r| {
            let lhs = r.kinetic_cum + r.energy();
            let rhs = e0 + r.work;
            let scale = [r.kinetic_cum, r.form, r.hardy, r.singular, r.work, e0]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(f64::MIN_POSITIVE);
            (lhs - rhs).abs() / scale
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionTrace {
    pub times: Vec<f64>,
    /// `½ Σ M_L (u_a - u_b)²`.
    pub distance: Vec<f64>,
    /// Nonincreasing within `1e-10` per step.
    pub nonincreasing: bool,
    /// `u_a <= u_b` nodewise at every stored time.
    pub ordered: bool,
}

pub fn half_mass_distance(ops: &OperatorSet, a: &[f64], b: &[f64]) -> f64 {
    0.5 * ops
        .lumped_interior()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(m, (x, y))| m * (x - y) * (x - y))
        .sum::<f64>()
}

/// Runs both initial data and compares the trajectories step by step.
#[allow(clippy::too_many_arguments)]
pub fn contraction_check(
    ops: &OperatorSet,
    p: &HardyParams,
    source: &Source,
    u0_a: &GridFunction,
    u0_b: &GridFunction,
    eta_t: f64,
    horizon: f64,
    opts: &RunOptions,
) -> Result<ContractionTrace> {
    // keep every step so the comparison is per step
    let full = RunOptions {
        max_snapshots: usize::MAX,
        ..*opts
    };
    let (ra, rb) = rayon::join(
        || implicit_euler_run(ops, p, source, u0_a, eta_t, horizon, None, &full),
        || implicit_euler_run(ops, p, source, u0_b, eta_t, horizon, None, &full),
    );
    let (ra, rb) = (ra?, rb?);
    if let Some(e) = ra.failure.or(rb.failure) {
        return Err(Error::InvalidParameter(format!(
            "contraction run failed: {e}"
        )));
    }
    let mut times = Vec::new();
    let mut distance = Vec::new();
    let mut ordered = true;
    for ((t, a), (_, b)) in ra.snapshots.iter().zip(&rb.snapshots) {
        times.push(*t);
        distance.push(half_mass_distance(ops, a.interior(), b.interior()));
        ordered &= dominates(b.interior(), a.interior());
    }
    let nonincreasing = distance.windows(2).all(|w| w[1] <= w[0] + 1e-10);
    Ok(ContractionTrace {
        times,
        distance,
        nonincreasing,
        ordered,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilizationTrace {
    pub times: Vec<f64>,
    /// `max |x|^β |u(x, t) - û(x)|` over interior nodes.
    pub distance: Vec<f64>,
    pub stabilized: bool,
    /// Index from which the distance never increases.
    pub monotone_from: usize,
}

pub fn weighted_sup_distance(u: &GridFunction, v: &GridFunction, beta: f64) -> f64 {
    u.nodes()
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(x, (a, b))| x.abs().powf(beta) * (a - b).abs())
        .fold(0.0, f64::max)
}

/// `stabilized` when the final distance is at most `rel_tol` times the
/// initial one.
pub fn stabilization_check(
    run: &ParabolicRun,
    u_hat: &GridFunction,
    beta: f64,
    rel_tol: f64,
) -> StabilizationTrace {
    let times: Vec<f64> = run.snapshots.iter().map(|(t, _)| *t).collect();
    let distance: Vec<f64> = run
        .snapshots
        .iter()
        .map(|(_, u)| weighted_sup_distance(u, u_hat, beta))
        .collect();
    let mut monotone_from = distance.len().saturating_sub(1);
    while monotone_from > 0 && distance[monotone_from] <= distance[monotone_from - 1] {
        monotone_from -= 1;
    }
    let d0 = distance[0];
    let last = *distance.last().unwrap_or(&0.0);
    StabilizationTrace {
        stabilized: last <= rel_tol * d0 || d0 == 0.0,
        times,
        distance,
        monotone_from,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky_solve;
    use crate::mesh::build_mesh;
    use crate::operators::assemble;

    fn setup(cells: usize) -> OperatorSet {
        let mesh = Arc::new(build_mesh(1.0, cells, 2.0, 2.0).unwrap());
        assemble(mesh, 0.25, &[]).unwrap()
    }

    #[test]
    fn linear_resolvent_matches_direct_solve() {
        let ops = setup(32);
        let p = HardyParams::new(1, 0.25, 0.0, 0.5).unwrap();
        let theta = 0.1;
        let r = Resolvent::new(&ops, &p, theta)
            .unwrap()
            .without_singular_term();
        let g: Vec<f64> = (0..ops.interior_count())
            .map(|i| 1.0 + (i % 3) as f64)
            .collect();
        let u = r.solve_interior(&g, None).unwrap();
        let mut m = ops.stiffness.clone();
        for c in m.col_iter_mut() {
            for x in c.iter_mut() {
                *x *= theta;
            }
        }
        let ml = ops.lumped_interior();
        for i in 0..ml.len() {
            m[(i, i)] += ml[i];
        }
        let rhs: Vec<f64> = g.iter().zip(ml).map(|(a, b)| a * b).collect();
        let d = cholesky_solve(&m, &rhs).unwrap();
        for (a, b) in u.iter().zip(&d) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn manufactured_resolvent_is_recovered() {
        let ops = setup(32);
        let p = HardyParams::with_lambda_fraction(1, 0.25, 0.3, 0.5).unwrap();
        let theta = 0.05;
        let star: Vec<f64> = ops.mesh.nodes[1..ops.mesh.node_count() - 1]
            .iter()
            .map(|x| (1.0 - x * x).powf(0.25) + 0.1)
            .collect();
        let l = stationary_operator(&ops, &p, &star, true);
        let g: Vec<f64> = star.iter().zip(&l).map(|(u, v)| u + theta * v).collect();
        let r = Resolvent::new(&ops, &p, theta).unwrap();
        let u = r.solve_interior(&g, None).unwrap();
        for (a, b) in u.iter().zip(&star) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_supercritical() {
        let ops = setup(16);
        let p = HardyParams::with_lambda_fraction(1, 0.25, 1.2, 0.5).unwrap();
        assert!(matches!(
            Resolvent::new(&ops, &p, 0.1),
            Err(Error::Supercritical { .. })
        ));
    }

    #[test]
    fn identical_data_do_not_separate() {
        let ops = setup(32);
        let p = HardyParams::with_lambda_fraction(1, 0.25, 0.3, 0.5).unwrap();
        let u0 = GridFunction::from_fn(ops.mesh.clone(), |x| 1.0 - x * x);
        let tr = contraction_check(
            &ops,
            &p,
            &Source::zero(),
            &u0,
            &u0,
            0.1,
            0.5,
            &RunOptions::default(),
        )
        .unwrap();
        assert!(tr.distance.iter().all(|d| *d == 0.0));
    }
}
