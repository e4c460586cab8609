use tangent_primes::seqeval::{Sequence, AMBIGUITY_GUARD};
use tangent_primes::window::window_from_index;

fn main() -> tangent_primes::Result<()> {
    let w = window_from_index(3, 1.05, 2.0, 0.05)?;
    let seq = Sequence::tangent(w.c, w.theta);
    let mut escalated = 0;
    let mut closest = (0, 1.0f64);
    for n in w.integer_range() {
        let e = seq.floor_value(n)?;
        if e.certified {
            escalated += 1;
        }
        if e.frac_norm() < closest.1 {
            closest = (n, e.frac_norm());
        }
    }
    println!("escalated to extended precision: {escalated}");
    let (n, d) = closest;
    let (f, frac) = seq.eval_extended(n)?;
    println!("closest to an integer: n = {n}, floor = {f}, frac = {frac:.9}, distance = {d:.3e}");
    println!("ambiguity guard: {AMBIGUITY_GUARD:.3e}");
    Ok(())
}
