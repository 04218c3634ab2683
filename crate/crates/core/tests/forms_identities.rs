use casimir_lab::forms3::io::{read_records, write_records, FieldRecord};
use casimir_lab::forms3::random::{random_form, random_vector_field};
use casimir_lab::forms3::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn d_squared_vanishes_on_200_random_forms() {
    let g = Grid::new(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let f = random_form(g, k % 2, 4, 1.0, &mut rng);
        worst = worst.max(d(&d(&f).unwrap()).unwrap().l2_norm());
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn contraction_identity_on_random_data() {
    let g = Grid::new(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let a = random_form(g, 1, 4, 1.0, &mut rng);
        let v = random_vector_field(g, 4, 1.0, &mut rng);
        let lhs = interior(&v, &a).unwrap().comp(0).clone();
        let rhs = wedge(&a, &v.to_two_form()).unwrap().comp(0).clone();
        assert!((&lhs - &rhs).max_abs() <= 1e-12);
    }
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sign(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn leibniz_rule(seed in any::<u64>(), j in 0usize..3, k in 0usize..3) {
        prop_assume!(j + k <= 2);
        // bandwidth 3 + 3 fits the alias-free budget at n = 16
        let g = Grid::new(16).unwrap();
        let mut rng = seeded(seed);
        let a = random_form(g, j, 3, 1.0, &mut rng);
        let b = random_form(g, k, 3, 1.0, &mut rng);
        let lhs = d(&wedge(&a, &b).unwrap()).unwrap();
        let rhs = &wedge(&d(&a).unwrap(), &b).unwrap() + &wedge(&a, &d(&b).unwrap()).unwrap().scale(sign(j));
        prop_assert!((&lhs - &rhs).l2_norm() <= 1e-11);
    }

    #[test]
    fn cartan_commutation(seed in any::<u64>(), rank in 0usize..3) {
        let g = Grid::new(16).unwrap();
        let mut rng = seeded(seed);
        let a = random_form(g, rank, 3, 1.0, &mut rng);
        let v = random_vector_field(g, 3, 1.0, &mut rng);
        let lhs = lie_derivative(&v, &d(&a).unwrap()).unwrap();
        let rhs = d(&lie_derivative(&v, &a).unwrap()).unwrap();
        prop_assert!((&lhs - &rhs).l2_norm() <= 1e-11);
    }

    #[test]
    fn integration_by_parts(seed in any::<u64>(), j in 0usize..2) {
        let g = Grid::new(16).unwrap();
        let mut rng = seeded(seed);
        let a = random_form(g, j, 3, 1.0, &mut rng);
        let b = random_form(g, 2 - j, 3, 1.0, &mut rng);
        let lhs = integrate3(&wedge(&d(&a).unwrap(), &b).unwrap()).unwrap();
        let rhs = integrate3(&wedge(&a, &d(&b).unwrap()).unwrap()).unwrap();
        prop_assert!((lhs - sign(j + 1) * rhs).abs() <= 1e-12);
    }

    #[test]
    fn bracket_matches_lie_derivative_of_fields(seed in any::<u64>()) {
        // ι_[u,v] α = L_u ι_v α − ι_v L_u α
        let g = Grid::new(16).unwrap();
        let mut rng = seeded(seed);
        let u = random_vector_field(g, 2, 1.0, &mut rng);
        let v = random_vector_field(g, 2, 1.0, &mut rng);
        let a = random_form(g, 1, 2, 1.0, &mut rng);
        let lhs = interior(&u.bracket(&v), &a).unwrap();
        let rhs = &lie_derivative(&u, &interior(&v, &a).unwrap()).unwrap()
            - &interior(&v, &lie_derivative(&u, &a).unwrap()).unwrap();
        prop_assert!((&lhs - &rhs).l2_norm() <= 1e-11);
    }

    #[test]
    fn container_roundtrip_is_bitwise(seed in any::<u64>(), rank in 0usize..5) {
        let g = Grid::new(4).unwrap();
        let mut rng = seeded(seed);
        let rec = if rank == 4 {
            FieldRecord::Vector(random_vector_field(g, 1, 1.0, &mut rng))
        } else {
            FieldRecord::Form(random_form(g, rank, 1, 1.0, &mut rng))
        };
        let mut bytes = Vec::new();
        write_records(&mut bytes, &[rec.clone(), rec.clone()]).unwrap();
        let back = read_records(&bytes[..]).unwrap();
        prop_assert_eq!(back, vec![rec.clone(), rec]);
    }

    #[test]
    fn interpolant_is_exact_for_band_limited_data(seed in any::<u64>(), x in 0.0..1.0f64, y in 0.0..1.0f64, z in 0.0..1.0f64) {
        let g = Grid::new(16).unwrap();
        let mut rng = seeded(seed);
        let f = random_form(g, 0, 3, 1.0, &mut rng).comp(0).clone();
        let fine = Grid::new(32).unwrap();
        // upsample spectrally and compare at a fine node
        let up = ScalarField::from_fn(fine, |a, b, c| f.eval_at([a, b, c]));
        let idx = fine.index((x * 32.0) as usize % 32, (y * 32.0) as usize % 32, (z * 32.0) as usize % 32);
        prop_assert!((up.values()[idx] - f.eval_at(fine.point(idx))).abs() <= 1e-13);
        // and the upsampled field reproduces the original nodes
        prop_assert!((up.eval_at([0.25, 0.5, 0.125]) - f.eval_at([0.25, 0.5, 0.125])).abs() <= 1e-12);
    }
}
