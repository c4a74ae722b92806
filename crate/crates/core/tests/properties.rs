use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use paraunit::genseed::{construction5_cosets, random_permutation, sample_s_prime};
use paraunit::recursive::{adb_functions, compose_adb, functions_on, random_desired_pu};
use paraunit::seedpu::{function_matrix_from_general, in_linear_span, seed_function_matrix, sq_from_catalog};
use paraunit::{build_generalized_seed, build_seed, is_cas, GenSeedSpec, GeneralForm, PolyMatrix, QArray, SeedSpec};

const CASES: [(usize, usize); 6] = [(2, 2), (4, 2), (6, 2), (3, 3), (2, 4), (4, 4)];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seed_is_desired_pu(seed in any::<u64>(), case in 0..CASES.len(), m in 0usize..3) {
        let (q, n) = CASES[case];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = SeedSpec::random(q, n, m, &mut rng).unwrap();
        let matrix: PolyMatrix<i64> = build_seed(&spec).unwrap();
        prop_assert_eq!(matrix.is_paraunitary().and_then(|c| c.as_integer()), Some((n as i64).pow(m as u32 + 1)));
        let fm = matrix.extract_function_matrix(n).unwrap();
        prop_assert_eq!(&fm, &seed_function_matrix(&spec));
    }

    #[test]
    fn seed_functions_reduce_mod_linear_span(seed in any::<u64>(), case in 0..CASES.len()) {
        let (q, n) = CASES[case];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = SeedSpec::random(q, n, 2, &mut rng).unwrap();
        let sq = sq_from_catalog(q, n).unwrap();
        let h1 = paraunit::QuadraticTerm::new(q, spec.hs[1].phases.clone()).unwrap().canonicalize();
        prop_assert!(sq.contains(&h1));
        let chain = GeneralForm::quadratic_only(q, n, vec![h1]).unwrap().assemble();
        let ends = |k: usize| paraunit::QuadraticTerm::new(q, spec.hs[k].phases.clone()).unwrap();
        let grid = function_matrix_from_general(&chain, &ends(0), &ends(2)).unwrap();
        let fm = seed_function_matrix(&spec);
        for i in 0..n {
            for j in 0..n {
                let diff = fm.get(i, j).add(&grid.get(i, j).scale(-1)).unwrap();
                prop_assert!(in_linear_span(&diff));
            }
        }
    }

    #[test]
    fn width_one_generalized_seed_is_plain_seed(seed in any::<u64>(), q in prop::sample::select(vec![2usize, 4, 6]), m in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = SeedSpec::random(q, 2, m, &mut rng).unwrap();
        let gen = GenSeedSpec::new(1, spec.hs.clone()).unwrap();
        prop_assert_eq!(build_generalized_seed::<i64>(&gen).unwrap(), build_seed::<i64>(&spec).unwrap());
    }

    #[test]
    fn construction5_sets_are_complementary(seed in any::<u64>(), q in prop::sample::select(vec![2usize, 4]), m in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = random_permutation(2 * m, &mut rng);
        let f = sample_s_prime(q, 2, m, &pi, &mut rng).unwrap();
        prop_assert!(is_cas(&construction5_cosets(&f, &pi).unwrap()).unwrap());
    }

    #[test]
    fn adb_closed_form_matches_product(seed in any::<u64>(), q in prop::sample::select(vec![2usize, 4]), n in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0: Vec<usize> = (0..n).collect();
        let za: Vec<usize> = (n..2 * n).collect();
        let zb: Vec<usize> = (2 * n..3 * n).collect();
        let total = 3 * n;
        let a: PolyMatrix<i64> = random_desired_pu(q, n, &za, total, &mut rng).unwrap();
        let b: PolyMatrix<i64> = random_desired_pu(q, n, &zb, total, &mut rng).unwrap();
        let c = compose_adb(&a, &b, &x0).unwrap();
        prop_assert!(c.is_paraunitary().is_some());
        let closed = adb_functions(&functions_on(&a, &za).unwrap(), &functions_on(&b, &zb).unwrap(), &x0).unwrap();
        prop_assert_eq!(c.extract_function_matrix(2).unwrap(), closed);
    }

    #[test]
    fn variable_permutations_keep_ccc(seed in any::<u64>(), case in 0..CASES.len()) {
        let (q, n) = CASES[case];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = SeedSpec::random(q, n, 2, &mut rng).unwrap();
        let fm = seed_function_matrix(&spec);
        let pi = random_permutation(2, &mut rng);
        prop_assert!(fm.permute_vars(&pi).unwrap().is_ccc().unwrap());
        let rows: Vec<Vec<QArray>> = fm.entries.clone();
        prop_assert!(rows.iter().all(|r| is_cas(r).unwrap()));
    }
}
