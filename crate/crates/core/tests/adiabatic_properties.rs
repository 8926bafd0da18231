mod common;

use common::{entries, matrix_from, state_from};
use proptest::prelude::*;
use spinchain_core::adiabatic::{
    build_a, classical_rate_matrix, first_order_direct, multi_pulse_map, multi_pulse_map_full, SuperOperator,
};
use spinchain_core::exact::{rotate_frame, FrameDirection};
use spinchain_core::linalg::CMatrix;
use spinchain_core::model::{mixture_to_density, ClassicalMixture};
use spinchain_core::{ClassicalConfig, PulseProfile, SpinChainModel};

fn model_params() -> impl Strategy<Value = (usize, f64, f64)> {
    (2usize..=3, prop::sample::select(vec![0.0, 1.0]), prop::sample::select(vec![0.0, 3.0, 5.0]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_is_trace_annihilating_and_hermiticity_preserving(
        (n, delta, v0) in model_params(),
        values in entries(8),
        s in 0.0..=1.0f64,
    ) {
        let dim = 1 << n;
        let model = SpinChainModel::new(n, delta, v0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(300.0).unwrap();
        let a = build_a(&model, &pulse, s);
        let rho = matrix_from(&values[..dim * dim], dim);
        let out = a.apply(&rho);
        let scale = out.max_abs().max(1.0);
        prop_assert!(out.trace().norm() <= 1e-12 * scale);
        let herm = a.apply(&rho.adjoint());
        prop_assert!(herm.max_abs_diff(&out.adjoint()) <= 1e-12 * scale);
    }

    #[test]
    fn generator_is_linear(values in entries(4), other in entries(4), a_re in -2.0..2.0f64, s in 0.0..=1.0f64) {
        let model = SpinChainModel::new(2, 0.5, 3.0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(300.0).unwrap();
        let gen = build_a(&model, &pulse, s);
        let (x, y) = (matrix_from(&values, 4), matrix_from(&other, 4));
        let combined = gen.apply(&(&(&x * a_re) + &y));
        let separate = &(&gen.apply(&x) * a_re) + &gen.apply(&y);
        prop_assert!(combined.max_abs_diff(&separate) <= 1e-12 * combined.max_abs().max(1.0));
    }

    #[test]
    fn coherences_only_between_single_flips(
        (n, delta, v0) in model_params(),
        weights in prop::collection::vec(0.01..1.0f64, 8),
        s in 0.0..=1.0f64,
    ) {
        let dim = 1 << n;
        let model = SpinChainModel::new(n, delta, v0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(300.0).unwrap();
        let total: f64 = weights[..dim].iter().sum();
        let rho = CMatrix::from_real_diag(&weights[..dim].iter().map(|w| w / total).collect::<Vec<_>>());
        let out = build_a(&model, &pulse, s).apply(&rho);
        for a in 0..dim {
            for b in 0..dim {
                if (a ^ b).count_ones() != 1 && a != b {
                    prop_assert!(out[(a, b)].norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn end_of_pulse_generator_keeps_states_diagonal(
        (n, delta, v0) in model_params(),
        weights in prop::collection::vec(0.01..1.0f64, 8),
    ) {
        let dim = 1 << n;
        let model = SpinChainModel::new(n, delta, v0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(300.0).unwrap();
        let rho = CMatrix::from_real_diag(&weights[..dim]);
        let out = build_a(&model, &pulse, 1.0).apply(&rho);
        prop_assert!(out.is_diagonal(1e-10 * out.max_abs().max(1.0)));
    }

    #[test]
    fn classical_propagator_is_stochastic(
        n in 1usize..=4,
        v0 in 0.0..6.0f64,
        m in 0usize..50,
        t in prop::sample::select(vec![100.0, 1e3, 1e4]),
    ) {
        let model = SpinChainModel::new(n, 0.0, v0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(t).unwrap();
        let w = classical_rate_matrix(&model, &pulse);
        let dim = w.dim();
        for from in 0..dim {
            let column: f64 = (0..dim).map(|to| w.rate(from, to)).sum();
            prop_assert!(column.abs() <= 1e-10 * w.escape_rate(from).max(1.0));
            for to in 0..dim {
                prop_assert!(to == from || w.rate(from, to) >= 0.0);
                prop_assert_eq!(w.rate(from, to), w.rate(to, from));
                if (from ^ to).count_ones() > 1 {
                    prop_assert_eq!(w.rate(from, to), 0.0);
                }
            }
        }
        let prop = w.propagator(m as f64 / t).unwrap();
        for c in 0..dim {
            let sum: f64 = (0..dim).map(|r| prop[r * dim + c]).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            for r in 0..dim {
                prop_assert!(prop[r * dim + c] >= -1e-12);
            }
        }
        let uniform = vec![1.0 / dim as f64; dim];
        let image = w.propagate(&uniform, 1.0).unwrap();
        prop_assert!(image.iter().all(|p| (p - 1.0 / dim as f64).abs() <= 1e-12));
    }

    #[test]
    fn classical_and_full_multi_pulse_agree(
        weights in prop::collection::vec(0.01..1.0f64, 4),
        m in 0usize..12,
    ) {
        let model = SpinChainModel::new(2, 0.0, 3.0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(1000.0).unwrap();
        let mix = ClassicalMixture::new(
            ClassicalConfig::all(2).zip(weights.iter().map(|w| w / weights.iter().sum::<f64>())),
        ).unwrap();
        let rho0 = mixture_to_density(&mix);
        let fast = multi_pulse_map(&model, &pulse, &rho0, m).unwrap();
        let full = multi_pulse_map_full(&model, &pulse, &rho0, m).unwrap();
        prop_assert!(fast.matrix().max_abs_diff(full.matrix()) <= 1e-12);
    }

    #[test]
    fn population_transfer_rates_are_nonnegative(
        (n, delta, v0) in model_params(),
        s in 0.0..=1.0f64,
        p_raw in 0usize..8,
    ) {
        // Diagonal of 𝒜[P_p] at a flipped neighbour is γ G₂ Λ ≥ 0.
        let dim = 1 << n;
        let model = SpinChainModel::new(n, delta, v0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(300.0).unwrap();
        let p = p_raw % dim;
        let out = build_a(&model, &pulse, s).apply(&CMatrix::outer_basis(dim, p, p));
        for k in 0..n {
            prop_assert!(out[(p ^ (1 << k), p ^ (1 << k))].re >= 0.0);
        }
    }
}

#[test]
fn oracle_equivalence_full_grid() {
    for n in [2usize, 3] {
        for delta in [0.0, 1.0] {
            for v0 in [0.0, 3.0] {
                let model = SpinChainModel::new(n, delta, v0, 3.0, 1.0).unwrap();
                let pulse = PulseProfile::default_shape(250.0).unwrap();
                for p in ClassicalConfig::all(n) {
                    for i in 0..10 {
                        let s = (i as f64 + 0.5) / 10.0;
                        let direct = first_order_direct(&model, &pulse, s, p).unwrap();
                        let lab = rotate_frame(&pulse, s, direct.matrix(), FrameDirection::ToLab);
                        let rho0 = CMatrix::outer_basis(1 << n, p.index(), p.index());
                        let built = &rho0 + &(&build_a(&model, &pulse, s).apply(&rho0) * (1.0 / pulse.duration()));
                        assert!(lab.max_abs_diff(&built) <= 1e-10, "N={n} Δ={delta} V₀={v0} p={p} s={s}");
                    }
                }
            }
        }
    }
}

#[test]
fn direct_sum_is_hermitian_and_normalized() {
    let model = SpinChainModel::new(3, 1.0, 3.0, 3.0, 1.0).unwrap();
    let pulse = PulseProfile::default_shape(500.0).unwrap();
    let p: ClassicalConfig = "010".parse().unwrap();
    let rho = first_order_direct(&model, &pulse, 0.61, p).unwrap();
    assert!(rho.matrix().is_hermitian(1e-13));
    assert!((rho.matrix().trace().re - 1.0).abs() < 1e-13);
}

#[test]
fn random_state_materialization_matches_action() {
    let model = SpinChainModel::new(2, 0.2, 3.0, 3.0, 1.0).unwrap();
    let pulse = PulseProfile::default_shape(300.0).unwrap();
    let a = build_a(&model, &pulse, 0.45);
    let big = a.materialize().unwrap();
    let rho = state_from(&(0..16).map(|i| ((i as f64).sin(), (i as f64).cos())).collect::<Vec<_>>(), 4);
    let via_matrix = CMatrix::unvec_columns(&big.matvec(&rho.matrix().vec_columns()), 4, 4).unwrap();
    assert!(via_matrix.max_abs_diff(&a.apply(rho.matrix())) < 1e-12);
}
