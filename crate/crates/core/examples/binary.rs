use tangent_primes::repcount::find_binary;
use tangent_primes::seqeval::ValueTable;
use tangent_primes::window::window_from_index;

fn main() -> tangent_primes::Result<()> {
    let w = window_from_index(2, 1.05, 2.0, 0.05)?;
    let t = ValueTable::for_window(&w)?;
    let (lo, hi) = (2 * t.min_f().unwrap() as i64, 2 * t.max_f().unwrap() as i64);
    let mut hits = 0;
    for n in (lo..=hi).step_by(2) {
        if find_binary(&t.entries, &t.logs, n)?.is_some() {
            hits += 1;
        }
    }
    println!("even N in [{lo}, {hi}] with two window values: {hits} of {}", (hi - lo) / 2 + 1);
    println!("N = {}: {:?}", w.n_star, find_binary(&t.entries, &t.logs, w.n_star)?);
    Ok(())
}
