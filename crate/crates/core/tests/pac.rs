mod common;

use nmrl::pac::{self, PacParams};

#[test]
fn grid_matches_high_precision_oracle() {
    assert_eq!(common::check_pac_grid(), Ok(200));
}

#[test]
fn reference_horizon() {
    assert_eq!(pac::vi_horizon(0.9, 0.1, 1.0).unwrap(), 60);
}

#[test]
fn reference_environment_threshold() {
    // ceil(1,280,000 * ln(16,000)) evaluated with mpmath.
    let p = PacParams::new(0.1, 0.05, 0.9, 1.0).sizes(100, 4, 1);
    assert_eq!(pac::thresholds(&p).unwrap().m_e, 12_390_841);
}

#[test]
fn flat_bound_exceeds_factorized_bound() {
    for s in [2, 36, 108, 225] {
        for q in [2, 4, 8] {
            let p = PacParams::new(0.1, 0.05, 0.9, 1.0).sizes(s, 4, q);
            let t = pac::thresholds(&p).unwrap();
            assert!(pac::flat_sample_bound(&p, t.m_e).unwrap() > pac::sample_bound(&p, t.m_e, t.m_q).unwrap());
        }
    }
}
