//! Values frozen from an independent floating-point oracle.

use tangent_primes::asymptotics::{compare_report, main_term};
use tangent_primes::repcount::{count_classical, count_ternary_mitm, scan_band};
use tangent_primes::seqeval::ValueTable;
use tangent_primes::window::window_from_index;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn target_counts() {
    for (k, count, weighted) in [(3, 1854, 2_010_269.275_956_823), (4, 449_352, 1_084_829_280.449_621_2)] {
        let w = window_from_index(k, 1.02, 1.5, 0.05).unwrap();
        let t = ValueTable::for_window(&w).unwrap();
        let r = count_ternary_mitm(&t.entries, &t.logs, w.n_star).unwrap();
        assert_eq!(r.count, count, "k = {k}");
        assert!(close(r.weighted, weighted, 1e-12), "k = {k}: {}", r.weighted);
    }
}

#[test]
fn band_mean_ratio() {
    for (k, mean) in [(3, 0.024_685_611_734_296_887), (4, 0.025_696_770_520_346_107)] {
        let w = window_from_index(k, 1.02, 1.5, 0.05).unwrap();
        let t = ValueTable::for_window(&w).unwrap();
        let reports = scan_band(&t.entries, &t.logs, w.n_star - 100, w.n_star + 100).unwrap();
        let rep = compare_report(&reports, &w).unwrap();
        assert!(close(rep.mean_ratio, mean, 1e-10), "k = {k}: {}", rep.mean_ratio);
        assert!(main_term(&w) > 0.0);
    }
}

#[test]
fn classical_count() {
    let r = count_classical(1.02, 2000).unwrap();
    assert_eq!(r.count, 5811);
    assert!(close(r.weighted, 1_126_392.563_721_699_9, 1e-12), "{}", r.weighted);
}
