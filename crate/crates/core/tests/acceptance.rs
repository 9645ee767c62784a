//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.
#![allow(clippy::excessive_precision)]

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use hardylab::constants::{
    beta_of_lambda, gamma, hardy_constant, lambda_of_alpha, triple_of_lambda, HardyParams,
};
use hardylab::data::DataSpec;
use hardylab::diagnostics::{
    boundary_rate, check_upper_growth, fit_boundary_exponent, fit_origin_exponent, rank_correlation,
};
use hardylab::elliptic::{
    default_init, detect_blowup, dominates, solve_ladder, solve_limit, solve_regularized,
    stationary_solution, BlowupVerdict, EllipticProblem, Level,
};
use hardylab::mesh::{build_mesh, GridFunction};
use hardylab::newton::NewtonOptions;
use hardylab::operators::{assemble, rayleigh_hardy_min, OperatorSet};
use hardylab::parabolic::{
    contraction_check, energy_identity_residual, implicit_euler_run, stabilization_check,
    stationary_operator, ConeBracket, RunOptions, Source,
};

const S: f64 = 0.25;

/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Verdict, u64);

struct Verdict {
    passed: bool,
    detail: String,
}

fn ops(cells: usize, g_origin: f64, g_boundary: f64) -> OperatorSet {
    assemble(
        Arc::new(build_mesh(1.0, cells, g_origin, g_boundary).unwrap()),
        S,
        &[],
    )
    .unwrap()
}

fn params(frac: f64, gamma: f64) -> HardyParams {
    HardyParams::with_lambda_fraction(1, S, frac, gamma).unwrap()
}

fn levels(max_exp: u32) -> Vec<u64> {
    (1..=max_exp).map(|k| 1u64 << k).collect()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn constants_layer() -> Verdict {
    let mut worst_identity = 0.0f64;
    let mut worst_trip = 0.0f64;
    for dim in 1..=5u32 {
        for s in [0.05, 0.15, 0.25, 0.35, 0.45] {
            let p = HardyParams {
                dim,
                s,
                lambda: 0.0,
                gamma: 1.0,
            };
            let h = hardy_constant(&p).unwrap();
            worst_identity = worst_identity.max(rel(lambda_of_alpha(&p, 0.0).unwrap(), h));
            for k in 0..20 {
                let alpha = p.alpha_max() * (k as f64 + 0.5) / 20.0;
                let l = lambda_of_alpha(&p, alpha).unwrap();
                let back = triple_of_lambda(&p.with_lambda(l)).unwrap().alpha;
                worst_trip = worst_trip.max((back - alpha).abs());
            }
        }
    }
    let gaps: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&s| {
            (hardy_constant(&HardyParams {
                dim: 4,
                s,
                lambda: 0.0,
                gamma: 1.0,
            })
            .unwrap()
                - 1.0)
                .abs()
        })
        .collect();
    let classical = gaps.windows(2).all(|w| w[1] < w[0]) && gaps[2] < 1e-2;
    let worst_gamma = common::GAMMA
        .iter()
        .map(|&(x, g)| rel(gamma(x), g))
        .fold(0.0, f64::max);
    let worst_constant = common::CONSTANTS
        .iter()
        .filter(|c| !c.3.is_nan())
        .map(|&(dim, s, _, l)| {
            rel(
                hardy_constant(&HardyParams {
                    dim,
                    s,
                    lambda: 0.0,
                    gamma: 1.0,
                })
                .unwrap(),
                l,
            )
        })
        .fold(0.0, f64::max);
    Verdict {
        passed: worst_identity <= 1e-12
            && worst_trip <= 1e-9
            && classical
            && worst_gamma <= 1e-12
            && worst_constant <= 1e-12,
        detail: format!(
            "identity {worst_identity:.1e}, round trip {worst_trip:.1e}, |Lambda_4,s - 1| {}, Gamma {worst_gamma:.1e}, Lambda {worst_constant:.1e}",
            sci(&gaps)
        ),
    }
}

fn hardy_optimality() -> Verdict {
    let hardy = hardy_constant(&params(0.0, 1.0)).unwrap();
    let q: Vec<f64> = [256, 512, 1024]
        .par_iter()
        .map(|&n| rayleigh_hardy_min(&ops(n, 2.0, 2.0)).unwrap())
        .collect();
    let bound = q.iter().all(|v| *v >= 0.99 * hardy);
    let monotone = q.windows(2).all(|w| w[1] <= w[0]);
    let shrink: Vec<f64> = q
        .windows(2)
        .map(|w| 1.0 - (w[1] - hardy) / (w[0] - hardy))
        .collect();
    let fast = shrink.iter().all(|s| *s >= 0.25);
    Verdict {
        passed: bound && monotone && fast,
        detail: format!(
            "ratios {:.4?}, >=0.99 {bound}, nonincreasing {monotone}, gap shrink per refinement {shrink:.3?} (need 0.25)",
            q.iter().map(|v| v / hardy).collect::<Vec<_>>()
        ),
    }
}

fn existence() -> Verdict {
    let o = ops(256, 2.0, 2.0);
    let prob = EllipticProblem::new(params(0.5, 1.0), DataSpec::Const(1.0), DataSpec::Const(1.0));
    let ladder = solve_ladder(
        &o,
        &prob,
        &levels(40),
        1e-8,
        None,
        &NewtonOptions::default(),
    )
    .unwrap();
    let mins: Vec<f64> = ladder.reports.iter().map(|r| r.min_interior).collect();
    let positive = mins.iter().all(|m| *m > 0.0) && mins.windows(2).all(|w| w[1] >= w[0]);
    let last = ladder.increments.last().copied().unwrap_or(f64::NAN);
    Verdict {
        passed: ladder.converged && last < 1e-8 && ladder.monotone() && positive,
        detail: format!(
            "{} levels, last L1 increment {last:.2e}, monotone {}, min_K {:.6} -> {:.6}",
            ladder.reports.len(),
            ladder.monotone(),
            mins[0],
            mins[mins.len() - 1]
        ),
    }
}

fn blowup() -> Verdict {
    let o = ops(1024, 12.0, 2.0);
    let schedule = levels(62);
    let reports: Vec<_> = [0.5, 0.9, 1.1, 2.0]
        .par_iter()
        .map(|&frac| {
            let prob = EllipticProblem::new(
                params(frac, 1.0),
                DataSpec::Const(1.0),
                DataSpec::Const(1.0),
            );
            (
                frac,
                detect_blowup(
                    &o,
                    &prob,
                    &schedule,
                    (-0.5, 0.5),
                    1e3,
                    &NewtonOptions::default(),
                ),
            )
        })
        .collect();
    let by = |f: f64| &reports.iter().find(|r| r.0 == f).unwrap().1;
    let big = by(2.0);
    let increasing = big.min_on_k.windows(2).all(|w| w[1] > w[0]);
    let exceeds = big.min_on_k.last().is_some_and(|m| *m > 1e3);
    let expected = |f: f64| {
        if f < 1.0 {
            BlowupVerdict::Bounded
        } else {
            BlowupVerdict::Blowup
        }
    };
    let insensitive = reports.iter().all(|(f, r)| {
        [1e2, 1e3, 1e4]
            .iter()
            .all(|t| r.verdict_at(*t) == expected(*f))
    });
    let bracket =
        by(0.9).verdict == BlowupVerdict::Bounded && by(1.1).verdict == BlowupVerdict::Blowup;
    Verdict {
        passed: increasing && exceeds && by(0.5).verdict == BlowupVerdict::Bounded && bracket && insensitive,
        detail: format!(
            "verdicts {}, 2*Lambda indefinite at n={:?}, 1.1*Lambda at n={:?}, thresholds 1e2..1e4 agree {insensitive}",
            reports.iter().map(|(f, r)| format!("{f}:{}", r.verdict)).collect::<Vec<_>>().join(" "),
            big.indefinite_at,
            by(1.1).indefinite_at
        ),
    }
}

fn untruncated(o: &OperatorSet, p: HardyParams) -> GridFunction {
    let prob = EllipticProblem::new(p, DataSpec::Const(0.0), DataSpec::Const(1.0)).at(Level::Limit);
    solve_regularized(o, &prob, &default_init(o), &NewtonOptions::default())
        .unwrap()
        .solution
}

fn interior_growth() -> Verdict {
    let (coarse, fine) = (ops(512, 2.0, 3.0), ops(1024, 2.0, 3.0));
    let fractions = [0.2, 0.4, 0.6, 0.8, 1.0];
    let rows: Vec<_> = fractions
        .par_iter()
        .map(|&frac| {
            let p = params(frac, 1.0);
            let beta = beta_of_lambda(&p).unwrap();
            let u = untruncated(&fine, p);
            let fit = fit_origin_exponent(&u, None).unwrap();
            let growth = check_upper_growth(&untruncated(&coarse, p), &u, beta);
            (beta, fit, growth)
        })
        .collect();
    let within: Vec<bool> = rows
        .iter()
        .map(|(b, f, _)| (f.exponent - b).abs() <= (0.1 * b).max(3.0 * f.stderr))
        .collect();
    let theory: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let fitted: Vec<f64> = rows.iter().map(|r| r.1.exponent).collect();
    let rho = rank_correlation(&theory, &fitted);
    let stable = rows.iter().all(|r| r.2.bounded);
    Verdict {
        passed: within.iter().all(|w| *w) && (rho - 1.0).abs() < 1e-12 && stable,
        detail: format!(
            "beta vs fit {}, rank correlation {rho}, sup |x|^beta u stable {stable}",
            rows.iter()
                .map(|(b, f, _)| format!(
                    "{b:.4}/{:.4}({:+.1}%)",
                    f.exponent,
                    100.0 * (f.exponent / b - 1.0)
                ))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    }
}

fn boundary() -> Verdict {
    let o = ops(1024, 2.0, 3.0);
    let fits: Vec<(f64, f64, f64)> = [2.0, 0.5]
        .par_iter()
        .map(|&g| {
            let prob =
                EllipticProblem::new(params(0.2, g), DataSpec::Const(1.0), DataSpec::Const(0.0));
            let u = stationary_solution(&o, &prob, &NewtonOptions::default())
                .unwrap()
                .solution;
            (
                g,
                boundary_rate(S, g),
                fit_boundary_exponent(&u, S, false, None).unwrap().exponent,
            )
        })
        .collect();
    let ok = fits.iter().all(|(_, t, f)| rel(*f, *t) <= 0.2);
    // synthetic profiles on the same mesh
    let mesh = o.mesh.clone();
    let bnd = GridFunction::from_fn(mesh.clone(), |x| 3.0 * (1.0 - x.abs()).powf(0.37));
    let org = GridFunction::from_fn(mesh, |x| 2.0 * x.abs().powf(-0.21));
    let synth = (fit_boundary_exponent(&bnd, S, false, None)
        .unwrap()
        .exponent
        - 0.37)
        .abs()
        .max((fit_origin_exponent(&org, None).unwrap().exponent - 0.21).abs());
    Verdict {
        passed: ok && synth <= 1e-10,
        detail: format!(
            "{}, synthetic power-law error {synth:.1e}",
            fits.iter()
                .map(|(g, t, f)| format!(
                    "gamma={g}: {f:.4} vs {t:.4} ({:+.1}%)",
                    100.0 * (f / t - 1.0)
                ))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

fn parabolic_consistency() -> Verdict {
    let o = Arc::new(ops(128, 2.0, 2.0));
    let p = params(0.3, 0.5);
    let zero = vec![0.0; o.interior_count()];
    let cone = ConeBracket::build(&o, &p, &zero, &NewtonOptions::default()).unwrap();
    let w = cone.w.clone();
    let horizon = 1.0;
    // U(t) = (1 + t/2) w solves u_t + L u = f for the f below.
    let src = {
        let (o, wi) = (o.clone(), w.interior().to_vec());
        Source::Function(Arc::new(move |t: f64| {
            let u: Vec<f64> = wi.iter().map(|v| (1.0 + 0.5 * t) * v).collect();
            let l = stationary_operator(&o, &p, &u, true);
            l.iter().zip(&wi).map(|(a, v)| a + 0.5 * v).collect()
        }))
    };
    let exact = w.scaled(1.0 + 0.5 * horizon);
    let unclipped = RunOptions {
        clip: false,
        ..RunOptions::default()
    };
    let steps = [50usize, 100, 200];
    let errors: Vec<f64> = steps
        .par_iter()
        .map(|&k| {
            let run = implicit_euler_run(
                &o,
                &p,
                &src,
                &w,
                horizon / k as f64,
                horizon,
                None,
                &unclipped,
            )
            .unwrap();
            run.last().linf_distance(&exact)
        })
        .collect();
    let residuals: Vec<f64> = steps
        .par_iter()
        .map(|&k| {
            let run = implicit_euler_run(
                &o,
                &p,
                &Source::zero(),
                &cone.lower(),
                horizon / k as f64,
                horizon,
                Some(&cone),
                &RunOptions::default(),
            )
            .unwrap();
            energy_identity_residual(&run)
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect();
    let fixed = implicit_euler_run(
        &o,
        &p,
        &Source::zero(),
        &w,
        0.01,
        0.5,
        None,
        &RunOptions::default(),
    )
    .unwrap();
    let drift = fixed
        .snapshots
        .iter()
        .map(|(_, u)| u.linf_distance(&w))
        .fold(0.0, f64::max);
    let err_ratio: Vec<f64> = errors.windows(2).map(|e| e[0] / e[1]).collect();
    let res_ratio: Vec<f64> = residuals.windows(2).map(|e| e[0] / e[1]).collect();
    let in_range = |r: &Vec<f64>| r.iter().all(|v| (1.5..=3.0).contains(v));
    Verdict {
        passed: in_range(&err_ratio) && residuals[2] <= 1e-2 && in_range(&res_ratio) && drift <= 1e-8,
        detail: format!(
            "error ratios {err_ratio:.3?}, energy residuals {} (ratios {res_ratio:.3?}), fixed-point drift {drift:.1e}",
            sci(&residuals)
        ),
    }
}

fn contraction_and_stabilization() -> Verdict {
    let o = ops(128, 2.0, 2.0);
    let p = params(0.2, 0.5);
    let opts = NewtonOptions::default();
    let zero = vec![0.0; o.interior_count()];
    let cone = ConeBracket::build(&o, &p, &zero, &opts).unwrap();
    let (eta, horizon) = (5.0 / 200.0, 5.0);
    let trace = contraction_check(
        &o,
        &p,
        &Source::zero(),
        &cone.lower(),
        &cone.upper(),
        eta,
        horizon,
        &RunOptions::default(),
    )
    .unwrap();
    let prob = EllipticProblem::new(p, DataSpec::Const(1.0), DataSpec::Const(0.0));
    let u_hat = stationary_solution(&o, &prob, &opts).unwrap().solution;
    let run = implicit_euler_run(
        &o,
        &p,
        &Source::zero(),
        &cone.lower(),
        eta,
        horizon,
        Some(&cone),
        &RunOptions::default(),
    )
    .unwrap();
    let st = stabilization_check(&run, &u_hat, beta_of_lambda(&p).unwrap(), 1e-2);
    let factor = st.distance[0] / st.distance.last().unwrap();
    Verdict {
        passed: trace.nonincreasing && trace.ordered && st.stabilized,
        detail: format!(
            "E nonincreasing {}, ordered {}, E {:.2e} -> {:.2e}, weighted sup distance decays by {factor:.0}x",
            trace.nonincreasing,
            trace.ordered,
            trace.distance[0],
            trace.distance.last().unwrap()
        ),
    }
}

fn uniqueness() -> Verdict {
    let o = ops(256, 2.0, 2.0);
    let opts = NewtonOptions::default();
    let cases = [(0.5, 0.5), (2.0, 0.3)];
    let mut details = Vec::new();
    let mut passed = true;
    for (g, frac) in cases {
        assert!(2.0 * S * (g - 1.0) < g + 1.0);
        let prob =
            EllipticProblem::new(params(frac, g), DataSpec::Const(1.0), DataSpec::Const(1.0));
        let low = GridFunction::constant(o.mesh.clone(), 1e-3);
        let high = GridFunction::constant(o.mesh.clone(), 1e3);
        let a = solve_ladder(&o, &prob, &levels(40), 1e-10, Some(&low), &opts).unwrap();
        let b = solve_ladder(&o, &prob, &levels(40), 1e-10, Some(&high), &opts).unwrap();
        let d = a.last().solution.linf_distance(&b.last().solution);
        // the untruncated problem straight from a large guess
        let direct = solve_limit(&o, &prob, &high, &opts).unwrap().solution;
        let polished = solve_limit(&o, &prob, &a.last().solution, &opts)
            .unwrap()
            .solution;
        let d_limit = direct.linf_distance(&polished);
        let ordered = dominates(b.last().solution.interior(), a.last().solution.interior());
        passed &= d <= 1e-6 && d_limit <= 1e-6;
        details.push(format!(
            "gamma={g}, {frac}*Lambda: ladders {d:.1e}, limit {d_limit:.1e}, ordered {ordered}"
        ));
    }
    Verdict {
        passed,
        detail: details.join("; "),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("constants layer", constants_layer, 1),
        ("discrete Hardy optimality", hardy_optimality, 120),
        ("existence below the threshold", existence, 60),
        ("complete blow-up above the threshold", blowup, 180),
        ("interior growth exponent", interior_growth, 240),
        ("boundary rate", boundary, 120),
        (
            "parabolic consistency and energy",
            parabolic_consistency,
            180,
        ),
        (
            "contraction and stabilization",
            contraction_and_stabilization,
            180,
        ),
        ("uniqueness from extreme initializations", uniqueness, 60),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let on_time = elapsed <= Duration::from_secs(*budget);
        let passed = v.passed && on_time;
        failed += usize::from(!passed);
        println!(
            "{} {}. {name}: {} [{:.2}s of {budget}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
