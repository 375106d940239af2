use proptest::prelude::*;

use qre_core::bounds::{
    bracket_formula, bracket_limit, chain_checks, log_divided_difference_formula,
    log_divided_difference_limit, power_divided_difference_formula, power_divided_difference_limit,
    sandwich, tsallis_bounds,
};
use qre_core::conjecture::{
    conjecture_ratio, functional_value, functional_value_explicit, lemma32_check, lemma32_instance,
    modular_weight_matrix, LemmaCase, WeightedOverlapFunctional,
};
use qre_core::divergence::{quasi_entropy_spectral, swapped_entropy};
use qre_core::linalg::{left_multiplication, mat_func, right_multiplication, CMatrix};
use qre_core::omd::{builtins, dual_function};
use qre_core::rng::rng_from_seed;
use qre_core::states::{random_pair, random_unitary, StatePair};
use qre_core::OmdFunction;

fn pair(dim: usize, seed: u64) -> StatePair {
    random_pair(dim, &mut rng_from_seed(seed)).unwrap()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn divergence_is_nonnegative(dim in 2usize..6, seed in any::<u64>()) {
        let p = pair(dim, seed);
        for f in builtins() {
            let s = quasi_entropy_spectral(&p, &f).unwrap().value;
            prop_assert!(s >= -1e-12, "{} = {s}", f.name());
        }
    }

    #[test]
    fn divergence_is_unitarily_invariant(dim in 2usize..6, seed in any::<u64>()) {
        let p = pair(dim, seed);
        let u = random_unitary(dim, &mut rng_from_seed(seed ^ 0xABCD));
        let q = p.conjugate_by(&u).unwrap();
        for f in builtins() {
            let a = quasi_entropy_spectral(&p, &f).unwrap().value;
            let b = quasi_entropy_spectral(&q, &f).unwrap().value;
            prop_assert!(close(a, b, 1e-9), "{}: {a} vs {b}", f.name());
        }
    }

    #[test]
    fn dual_function_swaps_arguments(dim in 2usize..6, seed in any::<u64>()) {
        let p = pair(dim, seed);
        for f in builtins() {
            let g = dual_function(f.clone());
            let a = quasi_entropy_spectral(&p, &g).unwrap().value;
            let b = swapped_entropy(&p, &f).unwrap().value;
            prop_assert!(close(a, b, 1e-9), "{}: {a} vs {b}", f.name());
        }
    }

    #[test]
    fn multiplication_operators_commute_and_lift_functions(dim in 2usize..5, seed in any::<u64>()) {
        let p = pair(dim, seed);
        let a = p.rho.matrix();
        let b = p.sigma.matrix();
        let l = left_multiplication(a.matrix());
        let r = right_multiplication(b.matrix());
        prop_assert!(max_abs(&(&l * &r - &r * &l)) < 1e-14);
        let ln_a = mat_func(a, f64::ln).unwrap();
        let l_ln = left_multiplication(ln_a.matrix());
        // ln(L_A) computed on the d²×d² operator itself.
        let big = qre_core::HermitianMatrix::new(l.clone()).unwrap();
        let ln_l = mat_func(&big, f64::ln).unwrap();
        prop_assert!(max_abs(&(ln_l.matrix() - l_ln)) < 1e-10);
    }

    #[test]
    fn sandwich_holds_on_random_pairs(dim in 2usize..6, seed in any::<u64>()) {
        let p = pair(dim, seed);
        for f in builtins() {
            let rep = sandwich(&p, &f).unwrap();
            prop_assert!(rep.is_clean(), "{}: {:?}", f.name(), rep.violations().collect::<Vec<_>>());
        }
    }

    #[test]
    fn improved_tsallis_bound_is_prior_times_q_minus_one(dim in 2usize..6, seed in any::<u64>(), q in 1.01f64..2.0) {
        let p = pair(dim, seed);
        let reports = tsallis_bounds(p.summary(), q);
        let get = |n: &str| reports.iter().find(|r| r.bound_name == n).unwrap().value;
        let (new, old) = (get("tsallis-above1"), get("prior-tsallis-above1"));
        prop_assert!(close(new, (q - 1.0) * old, 1e-12), "{new} vs {old}");
        prop_assert!(chain_checks(&reports).iter().all(|c| !c.is_violation()));
    }

    #[test]
    fn functional_routes_agree(dim in 2usize..6, seed in any::<u64>(), t in 1e-3f64..1e3) {
        let p = pair(dim, seed);
        let w = modular_weight_matrix(&p, t).unwrap();
        let a = functional_value(&w, &p).unwrap();
        let b = functional_value_explicit(&w, &p);
        prop_assert!((a - b.re).abs() < 1e-12 && b.im.abs() < 1e-12);
        let c = nalgebra::DMatrix::from_element(dim, dim, 0.0);
        let zero = WeightedOverlapFunctional::for_pair(&p, c, 1.0).unwrap();
        prop_assert_eq!(conjecture_ratio(&zero, &p).unwrap(), 0.0);
    }

    #[test]
    fn proven_cases_hold(dim in 2usize..7, seed in any::<u64>()) {
        let (w, x) = lemma32_instance(LemmaCase::Diagonal, dim, seed).unwrap();
        prop_assert!(lemma32_check(&w, &x, LemmaCase::Diagonal).unwrap().holds);
        let (w, x) = lemma32_instance(LemmaCase::QubitTraceless, 2, seed).unwrap();
        prop_assert!(lemma32_check(&w, &x, LemmaCase::QubitTraceless).unwrap().holds);
    }

    #[test]
    fn qubit_ratio_stays_below_one(seed in any::<u64>(), t in 1e-3f64..1e3) {
        let p = pair(2, seed);
        let w = modular_weight_matrix(&p, t).unwrap();
        prop_assert!(conjecture_ratio(&w, &p).unwrap() <= 1.0 + 1e-10);
    }

    #[test]
    fn divided_difference_branches_meet(x in 1e-3f64..1.0, rel_gap in 1e-6f64..1e-5, q in 0.1f64..0.9) {
        let y = x * (1.0 + rel_gap);
        prop_assert!(close(log_divided_difference_formula(x, y), log_divided_difference_limit(x, y), 1e-5));
        prop_assert!(close(power_divided_difference_formula(x, y, q), power_divided_difference_limit(x, y, q), 1e-5));
        let f = OmdFunction::tsallis(q).unwrap();
        let lambda = 1.0;
        let alpha = 1.0 - rel_gap;
        prop_assert!(close(bracket_formula(&f, lambda, alpha), bracket_limit(&f), 1e-5));
    }

    #[test]
    fn pair_documents_round_trip(dim in 1usize..6, seed in any::<u64>()) {
        let p = pair(dim, seed).with_seed(seed);
        let back = StatePair::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), p.to_json());
    }
}
