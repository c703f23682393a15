//! Randomized invariants of the core building blocks.

use fbasis_core::dwpf::{evaluate_routes, DwpfInstance, DwpfKind};
use fbasis_core::f_matrix::FMatrixBundle;
use fbasis_core::monodromy::{build_monodromy, twist};
use fbasis_core::relation_checks::check_unitarity_weights;
use fbasis_core::tensor_algebra::{minimal_decomposition, Dims, MultiIndex, Permutation};
use fbasis_core::weights::{build_del_pezzo, DelPezzoParams, ModelRank, RapiditySet, WeightTable};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table(seed: u64, sites: usize, aux: usize) -> WeightTable {
    let set = RapiditySet::generic(sites, aux);
    let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
    let p = DelPezzoParams::sample(&mut ChaCha8Rng::seed_from_u64(seed), &labels);
    build_del_pezzo(&p, &set).unwrap()
}

fn images() -> impl Strategy<Value = Vec<usize>> {
    (1usize..=7).prop_flat_map(|l| Just((1..=l).collect::<Vec<_>>()).prop_shuffle())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reduced_words_recompose(im in images()) {
        let s = minimal_decomposition(&im).unwrap();
        prop_assert_eq!(Permutation::recompose(im.len(), s.factors()).unwrap(), im.clone());
        prop_assert_eq!(s.factors().len(), s.inversions());
        let id = s.compose(&s.inverse()).unwrap();
        prop_assert_eq!(id.images().to_vec(), (1..=im.len()).collect::<Vec<_>>());
    }

    #[test]
    fn multi_index_roundtrip(n in 2usize..=4, sites in 1usize..=5, raw in any::<u64>()) {
        let dims = Dims::new(n, sites).unwrap();
        let idx = (raw % dims.dim() as u64) as usize;
        let m = MultiIndex::from_linear(idx, dims);
        prop_assert_eq!(m.linear(dims), idx);
        prop_assert_eq!(MultiIndex::new(m.digits().to_vec(), dims).unwrap(), m);
    }

    #[test]
    fn weight_documents_roundtrip(seed in any::<u64>()) {
        let t = table(seed, 2, 1);
        let back = WeightTable::from_json(ModelRank::new(3).unwrap(), &t.to_json()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn sampled_tables_are_unitary(seed in any::<u64>()) {
        let t = table(seed, 2, 0);
        for r in check_unitarity_weights(&t, 0, 1, 1e-9).unwrap() {
            prop_assert!(r.pass, "{} {:e}", r.relation, r.relative);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn twisting_is_multiplicative(seed in any::<u64>()) {
        let t = table(seed, 2, 2);
        let b = FMatrixBundle::build(&t, &[0, 1]).unwrap();
        let m1 = build_monodromy(&t, 2, &[0, 1]).unwrap();
        let m2 = build_monodromy(&t, 3, &[0, 1]).unwrap();
        let (x, y) = (m1.block(3, 2).unwrap(), m2.block(1, 3).unwrap());
        let lhs = twist(&x.mul(y).unwrap(), &b).unwrap();
        let rhs = twist(x, &b).unwrap().mul(&twist(y, &b).unwrap()).unwrap();
        prop_assert!(lhs.rel_diff(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn dwpf_routes_agree(seed in any::<u64>()) {
        let t = table(seed, 2, 2);
        for kind in DwpfKind::SINGLE {
            let inst = DwpfInstance::new(kind, vec![2, 3], vec![0, 1], vec![]).unwrap();
            for r in evaluate_routes(&inst, &t, 1e-8).unwrap().1 {
                prop_assert!(r.pass, "{} {:e}", r.relation, r.relative);
            }
        }
    }
}
