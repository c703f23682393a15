//! End-to-end checks on one sampled three-state model with three sites.

use fbasis_core::dwpf::{commute_check, evaluate_routes, CommuteKind, DwpfInstance, DwpfKind};
use fbasis_core::f_matrix::{
    verify_curly_r_unitarity, verify_exchange_relations, verify_factorization, FMatrixBundle, SigmaScope,
};
use fbasis_core::monodromy::{build_monodromy, conjectured_twisted, twist, BlockKind};
use fbasis_core::relation_checks::{check_all_weights, check_invariants, check_matrix_relations, ResidualReport};
use fbasis_core::weights::{build_del_pezzo, build_perk_schultz, DelPezzoParams, RapiditySet, WeightKind, WeightTable};
use fbasis_core::{Complex64, Error};
use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SITES: usize = 3;
const AUX: usize = 3;

fn table(seed: u64) -> WeightTable {
    let set = RapiditySet::generic(SITES, AUX);
    let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
    let p = DelPezzoParams::sample(&mut ChaCha8Rng::seed_from_u64(seed), &labels);
    build_del_pezzo(&p, &set).unwrap()
}

fn assert_all(reports: &[ResidualReport]) {
    assert!(!reports.is_empty());
    for r in reports {
        assert!(r.pass, "{} failed with relative residual {:e}", r.relation, r.relative);
    }
}

#[test]
fn weight_relations_and_invariants() {
    let t = table(11);
    assert_all(&check_all_weights(&t, 1e-9).unwrap());
    assert_all(&check_invariants(&t, 1e-9).unwrap());
}

#[test]
fn corrupted_weight_is_detected() {
    let t = table(12);
    let bad = t
        .with_weight(
            "xi1",
            "xi2",
            WeightKind::B(1, 2),
            t.weight("xi1", "xi2", WeightKind::B(1, 2)).unwrap() * 2.0,
        )
        .unwrap();
    let failing: Vec<_> = check_all_weights(&bad, 1e-9)
        .unwrap()
        .into_iter()
        .filter(|r| !r.pass)
        .collect();
    assert!(!failing.is_empty());
    assert!(failing
        .iter()
        .all(|r| r.arguments.iter().any(|a| a == "xi1" || a == "xi2")));
}

#[test]
fn matrix_relations_and_factorization() {
    let t = table(13);
    let xi: Vec<usize> = (0..SITES).collect();
    assert_all(&check_matrix_relations(&t, &xi, Some((3, 4)), 1e-9).unwrap());
    assert_all(&verify_factorization(&t, &xi, SigmaScope::All, 1e-9).unwrap());
    assert_all(&verify_exchange_relations(&t, &xi, SigmaScope::All, 1e-9).unwrap());
    assert!(verify_curly_r_unitarity(&t, &xi, 1e-9).unwrap().pass);
}

#[test]
fn twisted_blocks_match_closed_forms() {
    let t = table(14);
    let xi: Vec<usize> = (0..SITES).collect();
    let bundle = FMatrixBundle::build(&t, &xi).unwrap();
    let blocks = build_monodromy(&t, 3, &xi).unwrap();
    for kind in BlockKind::ALL {
        let (i, j) = kind.indices();
        let twisted = twist(blocks.block(i, j).unwrap(), &bundle).unwrap();
        let closed = conjectured_twisted(kind, &t, 3, &xi).unwrap();
        assert!(twisted.rel_diff(&closed).unwrap() < 1e-9, "{kind}");
    }
}

#[test]
fn partition_functions_agree() {
    let t = table(15);
    let xi: Vec<usize> = (0..SITES).collect();
    let aux: Vec<usize> = (SITES..SITES + AUX).collect();
    for kind in DwpfKind::SINGLE {
        let inst = DwpfInstance::new(kind, aux.clone(), xi.clone(), vec![]).unwrap();
        assert_all(&evaluate_routes(&inst, &t, 1e-8).unwrap().1);
    }
    for kind in [DwpfKind::MixedC, DwpfKind::MixedB] {
        for m in 0..=SITES {
            for q in (1..=SITES).combinations(m) {
                let inst = DwpfInstance::new(kind, aux.clone(), xi.clone(), q).unwrap();
                assert_all(&evaluate_routes(&inst, &t, 1e-8).unwrap().1);
            }
        }
    }
    for kind in [CommuteKind::CC, CommuteKind::BB] {
        assert!(commute_check(kind, &t, 3, 4, &xi, 1e-9).unwrap().pass);
    }
}

#[test]
fn perk_schultz_pipeline() {
    let vals = [0.9, 1.2, 0.7, 1.4, 1.1, 0.8];
    let set = RapiditySet::new(
        (0..SITES)
            .map(|k| (format!("x{k}"), Complex64::new(vals[k], 0.1 * k as f64)))
            .collect(),
        (0..AUX)
            .map(|k| (format!("m{k}"), Complex64::new(vals[SITES + k], -0.2)))
            .collect(),
    )
    .unwrap();
    let t = build_perk_schultz(Complex64::new(0.6, 0.5), &set).unwrap();
    assert_all(&check_all_weights(&t, 1e-9).unwrap());
    let xi: Vec<usize> = (0..SITES).collect();
    assert_all(&verify_factorization(&t, &xi, SigmaScope::All, 1e-9).unwrap());
    let inst = DwpfInstance::new(DwpfKind::C2, vec![3, 4, 5], xi, vec![]).unwrap();
    assert_all(&evaluate_routes(&inst, &t, 1e-8).unwrap().1);
}

#[test]
fn rank_is_enforced() {
    let set = RapiditySet::generic(3, 0);
    let t = fbasis_core::weights::build_six_vertex(Complex64::new(0.4, 0.2), Complex64::new(0.1, 0.0), &set).unwrap();
    assert!(matches!(check_invariants(&t, 1e-9), Err(Error::RankMismatch { .. })));
    assert!(matches!(
        conjectured_twisted(BlockKind::D, &t, 0, &[1, 2]),
        Err(Error::RankMismatch { .. })
    ));
}
