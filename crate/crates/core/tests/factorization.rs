mod common;

use nmrl::mdp::{product_kernel, value_iteration, FactorizedModel, QTable, ViStop};
use proptest::prelude::*;

#[test]
fn factorized_vi_matches_flat_vi() {
    for seed in 0..50 {
        let gap = common::factorized_vs_flat(seed);
        assert!(gap <= 1e-9, "seed {seed}: gap {gap}");
    }
}

#[test]
fn product_rows_are_distributions() {
    for seed in 0..50 {
        let model = common::random_model(seed);
        let flat = product_kernel(&model).unwrap();
        for row in flat.rows.iter().flatten() {
            let total: f64 = row.iter().map(|e| e.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

fn hide_some(model: &FactorizedModel, mask: &[bool]) -> FactorizedModel {
    let (ns, nq, na) = (model.n_states(), model.n_q(), model.n_actions());
    let mut out = FactorizedModel::empty(ns, na, nq);
    let mut bits = mask.iter().cycle();
    for s in 0..ns {
        for a in 0..na {
            if *bits.next().unwrap() {
                out.set_env(s, a, model.env(s, a).unwrap().clone());
            }
        }
        for q in 0..nq {
            if *bits.next().unwrap() {
                out.set_aut(q, s, model.aut(q, s).unwrap().clone());
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn ineligible_entries_stay_optimistic(seed in 0u64..10_000, mask in prop::collection::vec(any::<bool>(), 1..40)) {
        let model = hide_some(&common::random_model(seed), &mask);
        let (ns, nq, na) = (model.n_states(), model.n_q(), model.n_actions());
        let mut qt = QTable::optimistic(ns, nq, na, 0.9, 1.0);
        value_iteration(&mut qt, &model, ViStop::Iterations(60), &vec![false; ns * nq]);
        for s in 0..ns {
            for q in 0..nq {
                for a in 0..na {
                    let v = qt.get(s, q, a);
                    if model.eligible(s, q, a) {
                        prop_assert!(v <= qt.optimistic_value() + 1e-9);
                    } else {
                        prop_assert_eq!(v, qt.optimistic_value());
                    }
                }
            }
        }
    }
}
