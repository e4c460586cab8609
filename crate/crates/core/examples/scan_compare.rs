use tangent_primes::asymptotics::{compare_report, main_term};
use tangent_primes::repcount::scan_band;
use tangent_primes::seqeval::ValueTable;
use tangent_primes::window::window_from_index;

fn main() -> tangent_primes::Result<()> {
    for k in [3, 4] {
        let w = window_from_index(k, 1.02, 1.5, 0.05)?;
        let t = ValueTable::for_window(&w)?;
        let reports = scan_band(&t.entries, &t.logs, w.n_star - 100, w.n_star + 100)?;
        let rep = compare_report(&reports, &w)?;
        println!(
            "k = {k}: main term {:.6e}, mean ratio {:.6}, median {:.6}, positive {:.3}",
            main_term(&w),
            rep.mean_ratio,
            rep.median_ratio,
            rep.positive_fraction()
        );
    }
    Ok(())
}
