#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use collectibility::basis::{bloch_basis, haar_basis, BlochAngles, DetectorSet, LocalBasis};
use collectibility::collect::{bound_max, bound_separable, two_qubit_extremes};
use collectibility::experiment::{hom_forward, sample_experiment, swap_forward, Frequencies};
use collectibility::json::format_g17;
use collectibility::optimize::{maximize_collectibility, OptimizerConfig};
use collectibility::state::{random_product_state, random_state};
use collectibility::{
    collectibility_gram, evaluate, gram_matrix, named_state, project_conditional,
    projection_product, schmidt_angle, two_qubit_y, StateVector,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=3)
}

fn full_haar(dims: &[usize], n: usize, r: &mut ChaCha8Rng) -> DetectorSet {
    let bases = dims.iter().map(|&d| haar_basis(d, r).unwrap().truncated(n)).collect();
    DetectorSet::new((0..dims.len()).collect(), bases).unwrap()
}

fn angles() -> impl Strategy<Value = BlochAngles> {
    (0.0..=PI, 0.0..2.0 * PI).prop_map(|(t, p)| BlochAngles::new(t, p).unwrap())
}

fn apply_haar(state: &StateVector, party: usize, r: &mut ChaCha8Rng) -> StateVector {
    let u = haar_basis(state.dims()[party], r).unwrap();
    state.apply_local(party, &u).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detector_product_states_are_orthonormal(dims in dims_strategy(), seed: u64) {
        let n = *dims.iter().min().unwrap();
        let det = full_haar(&dims, n, &mut rng(seed));
        let chis: Vec<Vec<Complex64>> = (0..n)
            .map(|j| {
                det.bases().iter().fold(vec![Complex64::new(1.0, 0.0)], |acc, b| {
                    acc.iter().flat_map(|x| b.vectors()[j].iter().map(move |y| x * y)).collect()
                })
            })
            .collect();
        for j in 0..n {
            for k in 0..n {
                let o: Complex64 = chis[j].iter().zip(&chis[k]).map(|(a, b)| a.conj() * b).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                prop_assert!((o - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conditional_norms_sum_to_at_most_one(dims in dims_strategy(), seed: u64) {
        let mut r = rng(seed);
        let s = random_state(&dims, &mut r).unwrap();
        let n = dims[1..].iter().copied().min().unwrap();
        let bases = dims[1..].iter().map(|&d| haar_basis(d, &mut r).unwrap().truncated(n)).collect();
        let det = DetectorSet::new((1..dims.len()).collect(), bases).unwrap();
        let total: f64 = (0..n)
            .map(|j| project_conditional(&s, &det, j).unwrap().iter().map(|x| x.norm_sqr()).sum::<f64>())
            .sum();
        if dims.len() == 2 {
            prop_assert!((total - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(total <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn haar_bases_from_distinct_seeds_differ(a: u64, b: u64) {
        prop_assume!(a != b);
        let u = haar_basis(2, &mut rng(a)).unwrap();
        let v = haar_basis(2, &mut rng(b)).unwrap();
        let o: Complex64 = u.vectors()[0].iter().zip(&v.vectors()[0]).map(|(x, y)| x.conj() * y).sum();
        prop_assert!((o.norm() - 1.0).abs() > 1e-9);
    }

    #[test]
    fn schmidt_angle_is_local_unitary_invariant(seed: u64) {
        let mut r = rng(seed);
        let s = random_state(&[2, 2], &mut r).unwrap();
        let psi = schmidt_angle(&s).unwrap();
        let t = apply_haar(&apply_haar(&s, 0, &mut r), 1, &mut r);
        prop_assert!((schmidt_angle(&t).unwrap() - psi).abs() < 1e-9);
    }

    #[test]
    fn projection_product_respects_the_bounds(dims in dims_strategy(), seed: u64) {
        let mut r = rng(seed);
        let n = *dims.iter().min().unwrap();
        let s = random_state(&dims, &mut r).unwrap();
        let det = full_haar(&dims, n, &mut r);
        prop_assert!(projection_product(&s, &det).unwrap() <= bound_max(n) + 1e-12);
        let p = random_product_state(&dims, &mut r).unwrap();
        let det = full_haar(&dims, n, &mut r);
        let y = projection_product(&p, &det).unwrap();
        prop_assert!(y <= bound_separable(dims.len(), n) + 1e-12);
    }

    #[test]
    fn gram_path_dominates_any_party_a_basis(k in 2usize..=3, seed: u64) {
        let mut r = rng(seed);
        let dims = vec![2; k];
        let s = random_state(&dims, &mut r).unwrap();
        let full = full_haar(&dims, 2, &mut r);
        let rest = DetectorSet::new(full.parties()[1..].to_vec(), full.bases()[1..].to_vec()).unwrap();
        let y = evaluate(&s, &rest).unwrap().value;
        prop_assert!(projection_product(&s, &full).unwrap() <= y + 1e-12);
        prop_assert!(y <= 0.25 + 1e-12);
    }

    #[test]
    fn two_qubit_closed_form_is_azimuth_independent(psi in 0.0..=PI, a in angles()) {
        let s = named_state("schmidt", &[psi]).unwrap();
        let det = DetectorSet::new(vec![1], vec![bloch_basis(a).unwrap()]).unwrap();
        let y = evaluate(&s, &det).unwrap().value;
        prop_assert!((y - two_qubit_y(psi, a.theta).unwrap()).abs() < 1e-12);
        let (lo, hi) = two_qubit_extremes(psi).unwrap();
        prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
    }

    #[test]
    fn gram_collectibility_ignores_unitaries_on_party_a(seed: u64, a in angles()) {
        let mut r = rng(seed);
        let s = random_state(&[2, 2], &mut r).unwrap();
        let det = DetectorSet::new(vec![1], vec![bloch_basis(a).unwrap()]).unwrap();
        let before = collectibility_gram(&gram_matrix(&s, &det).unwrap(), 2).unwrap().value;
        let t = apply_haar(&s, 0, &mut r);
        let after = collectibility_gram(&gram_matrix(&t, &det).unwrap(), 2).unwrap().value;
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn unitary_on_party_b_is_absorbed_by_the_detectors(seed: u64, a in angles()) {
        // rotating B and counter-rotating its detectors leaves Y unchanged
        let mut r = rng(seed);
        let s = random_state(&[2, 2], &mut r).unwrap();
        let u = haar_basis(2, &mut r).unwrap();
        let t = s.apply_local(1, &u).unwrap();
        let d = bloch_basis(a).unwrap();
        let rotated: Vec<Vec<Complex64>> = d
            .vectors()
            .iter()
            .map(|v| {
                (0..2)
                    .map(|i| u.vectors()[0][i] * v[0] + u.vectors()[1][i] * v[1])
                    .collect()
            })
            .collect();
        let rotated = LocalBasis::new(rotated, 1e-12).unwrap();
        let y_s = evaluate(&s, &DetectorSet::new(vec![1], vec![d]).unwrap()).unwrap().value;
        let y_t = evaluate(&t, &DetectorSet::new(vec![1], vec![rotated]).unwrap()).unwrap().value;
        prop_assert!((y_s - y_t).abs() < 1e-12);
    }

    #[test]
    fn scheme_probabilities_stay_in_range(seed: u64, a in angles()) {
        let s = random_state(&[2, 2], &mut rng(seed)).unwrap();
        let hom = hom_forward(&s, a).unwrap();
        let swap = swap_forward(&s, a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let p = hom.coincidence[i][j].unwrap();
                prop_assert!((0.0..=0.5).contains(&p));
                let z = swap.coincidence[i][j].unwrap();
                prop_assert!((0.0..=1.0).contains(&z));
                prop_assert!((hom.g2()[i][j] - swap.g2()[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_estimates_are_marginal_products(seed: u64, shots in 1u64..5000, a in angles()) {
        let s = random_state(&[2, 2], &mut rng(seed)).unwrap();
        let counts = sample_experiment(&hom_forward(&s, a).unwrap(), shots, seed).unwrap();
        let f = Frequencies::from_counts(&counts).unwrap();
        let (g2, _) = f.plug_in();
        for i in 0..2 {
            if counts.coincidence[i][i].is_some() {
                prop_assert!((g2[i][i] - f.copy1[i] * f.copy2[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn g17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = format_g17(x);
        prop_assert_eq!(text.parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn optimum_is_local_unitary_invariant(seed: u64) {
        let mut r = rng(seed);
        let s = random_state(&[2, 2, 2], &mut r).unwrap();
        let cfg = OptimizerConfig::default();
        let before = maximize_collectibility(&s, &cfg).unwrap();
        let t = apply_haar(&apply_haar(&apply_haar(&s, 0, &mut r), 1, &mut r), 2, &mut r);
        let after = maximize_collectibility(&t, &cfg).unwrap();
        prop_assert!((before.value - after.value).abs() < 1e-6);
        prop_assert!(before.value <= 0.25 + 1e-9);
        prop_assert_eq!(before, maximize_collectibility(&s, &cfg).unwrap());
    }

    #[test]
    fn two_qubit_optimum_is_the_closed_form_maximum(seed: u64) {
        let s = random_state(&[2, 2], &mut rng(seed)).unwrap();
        let psi = schmidt_angle(&s).unwrap();
        let best = maximize_collectibility(&s, &OptimizerConfig::default()).unwrap().value;
        prop_assert!((best - two_qubit_extremes(psi).unwrap().1).abs() < 1e-8);
    }
}
