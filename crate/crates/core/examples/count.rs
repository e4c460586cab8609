use tangent_primes::repcount::{count_ternary_mitm, count_ternary_naive};
use tangent_primes::seqeval::ValueTable;
use tangent_primes::window::window_from_index;

fn main() -> tangent_primes::Result<()> {
    let w = window_from_index(2, 1.05, 2.0, 0.05)?;
    let t = ValueTable::for_window(&w)?;
    println!("window k = 2: {} primes, values in [{}, {}]", t.len(), t.min_f().unwrap(), t.max_f().unwrap());
    let fast = count_ternary_mitm(&t.entries, &t.logs, w.n_star)?;
    let slow = count_ternary_naive(&t.entries, &t.logs, w.n_star)?;
    println!("N* = {}: r = {}, weighted = {:.6}", w.n_star, fast.count, fast.weighted);
    println!("triple loop agrees: {}", fast.count == slow.count);
    Ok(())
}
