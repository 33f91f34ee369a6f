use mpdo_core::correspondence::{diag_embed, diag_extract};
use mpdo_core::decomp::{mpo_train_form, operator_schmidt_rank};
use mpdo_core::linalg::{kron_chain, CMat, RMat};
use mpdo_core::nonneg::{minimal_factorization, symmetric_factorization};
use mpdo_core::sampling;
use mpdo_core::tensor::{contract_train, matricize, unmatricize};
use mpdo_core::{NonnegMatrix, Operator, SiteSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

fn site_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 2..=3)
}

fn nonneg_matrix() -> impl Strategy<Value = NonnegMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(p, q)| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..10.0], p * q)
            .prop_map(move |v| NonnegMatrix::new(RMat::from_row_slice(p, q, &v)).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matricize_round_trips(dims in site_dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = SiteSpec::new(dims.clone()).unwrap();
        let n = sites.total_dim();
        let op = Operator::square(&sites, sampling::random_complex(&mut rng, n, n)).unwrap();
        for cut in 1..dims.len() {
            let m = matricize(&op, cut).unwrap();
            let back = unmatricize(&m, op.out_dims(), op.in_dims(), cut).unwrap();
            prop_assert_eq!(back.data(), op.data());
        }
    }

    #[test]
    fn train_form_reproduces_operator(dims in site_dims(), rank in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = SiteSpec::new(dims).unwrap();
        let rho = sampling::random_psd(&mut rng, &sites, rank);
        let (train, osr) = mpo_train_form(rho.operator(), TOL).unwrap();
        prop_assert!(contract_train(&train).unwrap().relative_distance(rho.operator()) < 1e-9);
        prop_assert_eq!(osr, train.max_bond());
    }

    #[test]
    fn osr_is_invariant_under_local_unitaries(seed in any::<u64>(), rank in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = SiteSpec::uniform(2, 3).unwrap();
        let rho = sampling::random_psd(&mut rng, &sites, rank);
        let us: Vec<CMat> = (0..3).map(|_| sampling::random_unitary(&mut rng, 2)).collect();
        let u = kron_chain(&us).unwrap();
        let rotated = Operator::square(&sites, &u * rho.data() * u.adjoint()).unwrap();
        prop_assert_eq!(
            operator_schmidt_rank(rho.operator(), TOL).unwrap(),
            operator_schmidt_rank(&rotated, TOL).unwrap()
        );
    }

    #[test]
    fn embedding_is_lossless(m in nonneg_matrix()) {
        prop_assert_eq!(diag_extract(&diag_embed(&m)).unwrap(), m);
    }

    #[test]
    fn osr_of_embedding_is_rank(m in nonneg_matrix()) {
        let osr = operator_schmidt_rank(diag_embed(&m).operator(), TOL).unwrap();
        prop_assert_eq!(osr, minimal_factorization(&m, TOL).inner_dim);
    }

    #[test]
    fn symmetric_factor_reproduces(seed in any::<u64>(), side in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = sampling::random_symmetric_nonneg(&mut rng, side);
        let cert = symmetric_factorization(&m, TOL).unwrap();
        prop_assert!(cert.residual <= 1e-8 * m.max_abs().max(1.0));
        prop_assert_eq!(cert.inner_dim, minimal_factorization(&m, TOL).inner_dim);
    }
}
