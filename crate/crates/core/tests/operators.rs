use std::sync::Arc;

use hardylab::constants::{hardy_constant, HardyParams};
use hardylab::linalg::is_positive_definite;
use hardylab::mesh::build_mesh;
use hardylab::operators::{assemble, rayleigh_hardy_min, OperatorSet};
use proptest::prelude::*;

fn ops(cells: usize, s: f64, levels: &[u64]) -> OperatorSet {
    assemble(
        Arc::new(build_mesh(1.0, cells, 2.0, 2.0).unwrap()),
        s,
        levels,
    )
    .unwrap()
}

#[test]
fn stiffness_is_symmetric_positive_definite() {
    for s in [0.1, 0.25, 0.4] {
        let o = ops(64, s, &[]);
        let a = &o.stiffness;
        for i in 0..a.nrows() {
            for j in 0..i {
                assert!((a[(i, j)] - a[(j, i)]).abs() <= 1e-13 * a[(i, i)].abs());
            }
        }
        assert!(is_positive_definite(a));
    }
}

#[test]
fn regularized_hardy_increases_to_the_limit() {
    let o = ops(64, 0.25, &[2, 64, 4096]);
    let h: Vec<_> = [2u64, 64, 4096]
        .iter()
        .map(|n| o.hardy_regularized(*n))
        .collect();
    for w in h
        .windows(2)
        .chain(std::iter::once(&[h[2].clone(), o.hardy.clone()][..]))
    {
        for i in 0..w[0].dim() {
            assert!(w[0].diag[i] <= w[1].diag[i]);
        }
    }
}

#[test]
fn discrete_hardy_quotient_stays_above_sharp_constant() {
    let hardy = hardy_constant(&HardyParams::new(1, 0.25, 0.0, 1.0).unwrap()).unwrap();
    let q: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|n| rayleigh_hardy_min(&ops(*n, 0.25, &[])).unwrap())
        .collect();
    assert!(q.iter().all(|v| *v > hardy));
    assert!(q.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn coordinate_export_has_one_triple_per_line() {
    let o = ops(16, 0.25, &[]);
    let dir = std::env::temp_dir().join(format!("hardylab-export-{}", std::process::id()));
    let paths = o.export_coordinate(&dir).unwrap();
    assert_eq!(paths.len(), 3);
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    let n = o.interior_count();
    assert_eq!(text.lines().count(), n * n);
    for line in text.lines() {
        let parts: Vec<&str> = line.split(' ').collect();
        assert_eq!(parts.len(), 3);
        let (i, j): (usize, usize) = (parts[0].parse().unwrap(), parts[1].parse().unwrap());
        let v: f64 = parts[2].parse().unwrap();
        assert_eq!(v, o.stiffness[(i, j)], "17 significant digits round-trip");
    }
    std::fs::remove_dir_all(dir).ok();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn energy_is_nonnegative_and_quadratic(
        values in proptest::collection::vec(-1.0f64..1.0, 15),
        c in -3.0f64..3.0,
    ) {
        let o = ops(16, 0.25, &[]);
        let e = o.energy_form(&values);
        prop_assert!(e >= 0.0);
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        prop_assert!((o.energy_form(&scaled) - c * c * e).abs() <= 1e-12 * (1.0 + e));
    }
}
