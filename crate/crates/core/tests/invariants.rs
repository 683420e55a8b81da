use dosim::integrator::{integrate, numeric_propagator, Sampling, StateVector, Tolerances};
use dosim::linalg::{complexify, identity, matmul, max_abs_diff, orthogonality_defect, unitarity_defect};
use dosim::model::{ModelParams, TimeBound};
use dosim::probabilities::{do_exact_table, finite_avg_table, p31_full};
use dosim::propagator::{
    analytic_adiabatic_propagator, closed_form_product, crossing_phases, diabatic_propagator, five_factor_product,
};
use dosim::spectral::{eigenvalues, frame_at};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams<f64>> {
    (0.05f64..4.0, 0.05f64..4.0, 0.1f64..4.0, 0.2f64..3.0).prop_map(|(a, b, d, be)| ModelParams::new(a, b, d, be))
}

fn symmetric() -> impl Strategy<Value = ModelParams<f64>> {
    (0.05f64..4.0, 0.1f64..4.0, 0.2f64..3.0).prop_map(|(o, d, be)| ModelParams::symmetric(o, d, be))
}

proptest! {
    #[test]
    fn spectrum_is_sorted_with_the_right_trace(p in params(), t in -30.0f64..30.0) {
        let l = eigenvalues(&p, t);
        prop_assert!(l[0] >= l[1] && l[1] >= l[2]);
        prop_assert!((l.iter().sum::<f64>() - p.beta * t).abs() <= 1e-10 * (1.0 + (p.beta * t).abs()));
        let fr = frame_at(&p, t).unwrap();
        prop_assert!(orthogonality_defect(&fr.f) <= 1e-12);
        prop_assert!(fr.eigen_residual(&p.hamiltonian_at(t)) <= 1e-10 * (1.0 + l[0].abs().max(l[2].abs())));
    }

    #[test]
    fn analytic_propagators_are_unitary(p in params(), before in 0.1f64..15.0, after in 0.1f64..15.0) {
        let (t_i, t_f) = (-p.tau() - before, p.tau() + after);
        prop_assert!(unitarity_defect(&analytic_adiabatic_propagator(&p, t_i, t_f).unwrap().u) <= 1e-10);
        prop_assert!(unitarity_defect(&diabatic_propagator(&p, t_i, t_f).unwrap().u) <= 1e-10);
        let ph = crossing_phases(&p, TimeBound::Finite(t_i), TimeBound::Finite(t_f)).unwrap();
        prop_assert!(max_abs_diff(&five_factor_product(&p, &ph), &closed_form_product(&p, &ph)) <= 1e-12);
    }

    #[test]
    fn infinite_window_table_rows_sum_to_one(p in params()) {
        for s in do_exact_table(&p).row_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn full_counterintuitive_probability_is_a_probability(p in symmetric(), extra in 0.1f64..40.0) {
        let t = p.tau() + extra;
        let s = p31_full(&p, t).unwrap();
        prop_assert!(s.total >= -1e-14 && s.total <= 1.0 + 1e-12);
        prop_assert!((s.total - s.average - s.oscillating).abs() <= 1e-15);
    }

    #[test]
    fn average_table_pairings(p in symmetric(), extra in 0.5f64..40.0) {
        let t = finite_avg_table(&p, p.tau() + extra).unwrap().p;
        prop_assert_eq!(t[0][0], t[2][2]);
        prop_assert_eq!(t[0][1], t[1][2]);
        prop_assert_eq!(t[1][0], t[2][1]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn numeric_evolution_reverses(p in params(), a in -8.0f64..0.0, b in 0.5f64..8.0) {
        let tols = Tolerances::default();
        let forward = numeric_propagator(&p, a, b, &tols).unwrap().u;
        let back = numeric_propagator(&p, b, a, &tols).unwrap().u;
        prop_assert!(max_abs_diff(&matmul(&back, &forward), &complexify(&identity())) <= 1e-8);
        prop_assert!(unitarity_defect(&forward) <= 1e-8);
    }
}

#[test]
fn tighter_tolerances_move_results_by_little() {
    let p = ModelParams::<f64>::new(0.9, 1.3, 0.8, 1.1);
    let start = StateVector::diabatic(3, -12.0).unwrap();
    let run = |rtol: f64, atol: f64| {
        let tols = Tolerances::new(rtol, atol).unwrap();
        integrate(&p, &start, 12.0, &tols, &Sampling::EndOnly).unwrap().0
    };
    let coarse = run(1e-10, 1e-12);
    let fine = run(5e-11, 5e-13);
    for (a, b) in coarse.populations().iter().zip(fine.populations()) {
        assert!((a - b).abs() <= 10.0 * 1e-10, "{a} vs {b}");
    }
}

#[test]
fn norm_is_conserved_on_long_runs_at_tight_tolerances() {
    let p = ModelParams::<f64>::symmetric(1.0, 1.0, 1.0);
    let tols = Tolerances::new(1e-12, 1e-14).unwrap();
    for k in 1..=3 {
        let start = StateVector::diabatic(k, -40.0).unwrap();
        let (end, _) = integrate(&p, &start, 40.0, &tols, &Sampling::EndOnly).unwrap();
        assert!((end.norm_sqr() - 1.0).abs() <= 1e-9, "{}", end.norm_sqr());
    }
}
