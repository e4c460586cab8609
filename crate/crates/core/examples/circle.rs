use tangent_primes::circle::{arc_split, circle_integral, sample_sum, SumKind};
use tangent_primes::repcount::count_ternary_mitm;
use tangent_primes::seqeval::ValueTable;
use tangent_primes::window::window_from_index;

fn main() -> tangent_primes::Result<()> {
    let w = window_from_index(2, 1.05, 2.0, 0.05)?;
    let t = ValueTable::for_window(&w)?;
    let m = 3 * t.max_f().unwrap() as usize + 1;
    let direct = count_ternary_mitm(&t.entries, &t.logs, w.n_star)?.weighted;
    let ci = circle_integral(&t.entries, &t.logs, w.n_star, (0.0, 1.0), m)?;
    println!("direct {direct:.9}, circle {:.9} {:+.3e}i", ci.value.re, ci.value.im);
    let arcs = arc_split(&t.entries, &t.logs, w.n_star, w.tau, m)?;
    println!("major {:.6}, minor {:.6}", arcs.major.re, arcs.minor.re);
    for kind in [SumKind::S, SumKind::A] {
        let rep = sample_sum(&w, kind, 64)?;
        let peak = rep.samples.iter().skip(1).map(|s| s.value.norm()).fold(0.0, f64::max);
        println!("{kind:?}: F(0) = {:.3}, max off zero {peak:.3}", rep.samples[0].value.re);
    }
    Ok(())
}
