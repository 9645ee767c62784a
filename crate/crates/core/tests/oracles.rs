//! Cross-checks against values computed independently in arbitrary precision
//! (Gamma function, constants, Gagliardo double integrals) and a Jacobi
//! polynomial spectral method.
#![allow(clippy::excessive_precision)]

mod common;

use std::sync::Arc;

use common::{BETA_QUARTER, CONSTANTS, GAMMA};

use hardylab::constants::{gamma, hardy_constant, normalization_constant, HardyParams};
use hardylab::linalg::generalized_eigenvalues_tridiag;
use hardylab::mesh::{build_mesh, GridFunction};
use hardylab::operators::assemble;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn gamma_matches_high_precision_values() {
    for (x, g) in GAMMA {
        assert!(
            rel(gamma(x), g) <= 1e-12,
            "Gamma({x}) = {} vs {g}",
            gamma(x)
        );
    }
}

#[test]
fn constants_match_high_precision_grid() {
    for (dim, s, c, l) in CONSTANTS {
        let p = HardyParams {
            dim,
            s,
            lambda: 0.0,
            gamma: 1.0,
        };
        let cn = normalization_constant(&p).unwrap();
        assert!(rel(cn, c) <= 1e-12, "C_({dim},{s}) = {cn} vs {c}");
        if l.is_nan() {
            assert!(hardy_constant(&p).is_err());
        } else {
            let h = hardy_constant(&p).unwrap();
            assert!(rel(h, l) <= 1e-12, "Lambda_({dim},{s}) = {h} vs {l}");
        }
    }
}

#[test]
fn first_dirichlet_eigenvalue_matches_spectral_method() {
    // s = 1/4 on (-1, 1), Jacobi-Galerkin with 60 modes.
    let lambda1 = 0.97016542;
    let lambda2 = 1.60153774;
    let ops = assemble(Arc::new(build_mesh(1.0, 512, 2.0, 2.0).unwrap()), 0.25, &[]).unwrap();
    let ev = generalized_eigenvalues_tridiag(&ops.stiffness, &ops.mass.interior()).unwrap();
    assert!(rel(ev[0], lambda1) <= 0.02, "lambda_1 = {}", ev[0]);
    assert!(rel(ev[1], lambda2) <= 0.02, "lambda_2 = {}", ev[1]);
    // Galerkin eigenvalues sit above the exact ones.
    assert!(ev[0] >= lambda1 && ev[1] >= lambda2);
}

#[test]
fn energy_form_matches_gagliardo_integral() {
    use std::f64::consts::PI;
    type Profile = (&'static str, fn(f64) -> f64, f64);
    let profiles: [Profile; 5] = [
        ("bump", |x| 1.0 - x * x, 1.06987061769056),
        ("bump2", |x| (1.0 - x * x).powi(2), 0.885219386324445),
        ("cos", |x| (PI * x / 2.0).cos(), 1.0144761363817),
        ("odd", |x| x * (1.0 - x * x), 0.246893219467052),
        ("exp", |x| (1.0 - x * x) * x.exp(), 1.49778536031498),
    ];
    let mesh = Arc::new(build_mesh(1.0, 512, 2.0, 2.0).unwrap());
    let ops = assemble(mesh.clone(), 0.25, &[]).unwrap();
    for (name, f, exact) in profiles {
        let u = GridFunction::from_fn(mesh.clone(), f);
        let e = ops.energy_form(u.interior());
        assert!(rel(e, exact) <= 0.01, "{name}: {e} vs {exact}");
    }
}

#[test]
fn growth_exponent_matches_high_precision_root() {
    use hardylab::constants::beta_of_lambda;
    for (frac, beta) in BETA_QUARTER {
        let p = HardyParams::with_lambda_fraction(1, 0.25, frac, 1.0).unwrap();
        let b = beta_of_lambda(&p).unwrap();
        assert!((b - beta).abs() <= 1e-9, "beta({frac}) = {b} vs {beta}");
    }
}
