//! Property tests against independent closed forms.

use std::f64::consts::PI;

use gaussent::{
    apply_oneside_channel, apply_symplectic, beamsplitter_channel, geof, geof_detailed,
    log_negativity, symplectic_eigenvalues, tensor, tmss_state, EulerAngles, GaussianState,
    GeofOptions, SymplecticOp,
};
use nalgebra::{DMatrix, DVector, Matrix2};
use proptest::prelude::*;

fn euler() -> impl Strategy<Value = SymplecticOp<f64>> {
    (-PI..PI, -0.7..0.7f64, -PI..PI).prop_map(|(theta_out, r, theta_in)| {
        SymplecticOp::from_euler(EulerAngles {
            theta_out,
            r,
            theta_in,
        })
    })
}

fn local_pair() -> impl Strategy<Value = SymplecticOp<f64>> {
    (euler(), euler()).prop_map(|(a, b)| a.direct_sum(&b))
}

/// Squeezed vacuum with the same (possibly anisotropic) noise on both modes:
/// a symmetric state.
fn symmetric_state(q: f64, n1: f64, n2: f64) -> GaussianState<f64> {
    let base = tmss_state(q).unwrap();
    let noise = DMatrix::from_diagonal(&DVector::from_vec(vec![n1, n2, n1, n2]));
    GaussianState::new(DVector::zeros(4), base.cov() + noise).unwrap()
}

/// Smallest symplectic eigenvalue of the partial transpose.
fn nu_pt(state: &GaussianState<f64>) -> f64 {
    let mut pt = state.cov().clone();
    for i in 0..4 {
        pt[(3, i)] = -pt[(3, i)];
        pt[(i, 3)] = -pt[(i, 3)];
    }
    symplectic_eigenvalues(&pt).unwrap()[0]
}

/// For symmetric states the optimal pure state is a squeezed vacuum with
/// `e^{-2r} = 2 nu_pt`, so the characteristic value is `tanh^2 r`.
fn symmetric_closed_form(state: &GaussianState<f64>) -> f64 {
    let t = 2.0 * nu_pt(state);
    if t >= 1.0 {
        0.0
    } else {
        ((1.0 - t) / (1.0 + t)).powi(2)
    }
}

fn single_mode(cov: Matrix2<f64>) -> GaussianState<f64> {
    let c = DMatrix::from_fn(2, 2, |i, j| cov[(i, j)]);
    GaussianState::new(DVector::zeros(2), c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_negativity_ignores_local_symplectics(q in 0.0..0.95f64, n in 0.0..0.4f64, local in local_pair()) {
        let state = symmetric_state(q, n, 0.5 * n);
        let moved = apply_symplectic(&state, &local).unwrap();
        let (a, b) = (log_negativity(&state).unwrap(), log_negativity(&moved).unwrap());
        prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn geof_matches_symmetric_closed_form(
        q in 0.05..0.95f64,
        n1 in 0.0..0.3f64,
        n2 in 0.0..0.3f64,
        local in local_pair(),
    ) {
        let state = symmetric_state(q, n1, n2);
        let expected = symmetric_closed_form(&state);
        let moved = apply_symplectic(&state, &local).unwrap();
        let got = geof(&moved, &GeofOptions::default()).unwrap();
        prop_assert!((got - expected).abs() < 1e-8, "geof {got} vs closed form {expected}");
    }

    #[test]
    fn geof_vanishes_on_product_states(
        a in 0.5..3.0f64,
        b in 0.5..3.0f64,
        la in euler(),
        lb in euler(),
    ) {
        let m1 = la.single_mode_matrix().unwrap();
        let m2 = lb.single_mode_matrix().unwrap();
        let s1 = single_mode(m1 * Matrix2::identity() * a * m1.transpose());
        let s2 = single_mode(m2 * Matrix2::identity() * b * m2.transpose());
        let sol = geof_detailed(&tensor(&s1, &s2), &GeofOptions::default()).unwrap();
        prop_assert!(sol.value < 1e-8, "{}", sol.value);
    }

    #[test]
    fn geof_vanishes_when_partial_transpose_is_physical(q in 0.1..0.9f64, extra in 0.0..0.5f64) {
        // Enough symmetric noise to push nu_pt above 1/2.
        let base = symmetric_state(q, 0.0, 0.0);
        let needed = 0.5 - nu_pt(&base);
        let state = symmetric_state(q, needed + extra, needed + extra);
        prop_assume!(nu_pt(&state) >= 0.5);
        prop_assert!(geof(&state, &GeofOptions::default()).unwrap() < 1e-8);
    }

    #[test]
    fn geof_decomposition_is_pure_and_fits_under(
        q in 0.05..0.95f64,
        theta in 0.05..1.5f64,
        u3 in 0.4..2.5f64,
        b3 in 1.0..2.0f64,
        local in local_pair(),
    ) {
        let ch = beamsplitter_channel(theta, u3, b3).unwrap();
        let out = apply_oneside_channel(&tmss_state(q).unwrap(), &ch, 1).unwrap();
        let state = apply_symplectic(&out, &local).unwrap();
        let sol = geof_detailed(&state, &GeofOptions::default()).unwrap();
        let pure = DMatrix::from_column_slice(4, 4, sol.pure_cov.as_slice());
        let nu = symplectic_eigenvalues(&pure).unwrap();
        prop_assert!(nu.iter().all(|v| (v - 0.5).abs() < 1e-9), "{nu:?}");
        prop_assert!(sol.feasibility > -1e-9, "{}", sol.feasibility);
        prop_assert!(sol.spread <= 1e-8);
        let direct = geof(&out, &GeofOptions::default()).unwrap();
        prop_assert!((direct - sol.value).abs() < 1e-8, "local invariance: {direct} vs {}", sol.value);
    }

    #[test]
    fn geof_never_exceeds_input(q in 0.05..0.95f64, theta in 0.05..1.5f64, u3 in 0.4..2.5f64, b3 in 1.0..2.0f64) {
        let ch = beamsplitter_channel(theta, u3, b3).unwrap();
        let out = apply_oneside_channel(&tmss_state(q).unwrap(), &ch, 1).unwrap();
        prop_assert!(geof(&out, &GeofOptions::default()).unwrap() <= q * q + 1e-9);
    }
}

#[test]
fn geof_does_not_grow_with_channel_noise() {
    let opts = GeofOptions::default();
    let values: Vec<f64> = [1.0, 1.25, 1.5, 1.75, 2.0]
        .iter()
        .map(|&b3| {
            let ch = beamsplitter_channel(PI / 6.0, 3.0, b3).unwrap();
            let out = apply_oneside_channel(&tmss_state(0.8).unwrap(), &ch, 1).unwrap();
            geof(&out, &opts).unwrap()
        })
        .collect();
    assert!(
        values.windows(2).all(|w| w[1] <= w[0] + 1e-12),
        "{values:?}"
    );
    assert!(values[4] < values[0]);
}

#[test]
fn geof_frozen_symmetric_values() {
    // Squeezed vacuum q = 0.5 with isotropic noise 0.1 on both modes:
    // nu_pt = (a - c) with a = 5/6 + 0.1, c = 2/3, so 2 nu_pt = 8/15 and
    // the characteristic value is (7/23)^2.
    let state = symmetric_state(0.5, 0.1, 0.1);
    let got = geof(&state, &GeofOptions::default()).unwrap();
    assert!((got - (7.0f64 / 23.0).powi(2)).abs() < 1e-10, "{got}");
}

#[test]
fn single_precision_tracks_double() {
    let s32 = gaussent::tmss_state::<f32>(0.6).unwrap();
    let s64 = tmss_state(0.6).unwrap();
    let a = gaussent::log_negativity(&s32).unwrap() as f64;
    let b = log_negativity(&s64).unwrap();
    assert!((a - b).abs() < 1e-5, "{a} vs {b}");
    let g = gaussent::geof(
        &s32,
        &GeofOptions::<f32> {
            tolerance: 1e-5,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((g as f64 - 0.36).abs() < 1e-4, "{g}");
}
