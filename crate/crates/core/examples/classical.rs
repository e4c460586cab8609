use tangent_primes::asymptotics::classical_main_term;
use tangent_primes::repcount::count_classical;

fn main() -> tangent_primes::Result<()> {
    for n in [500, 1000, 2000, 4000] {
        let r = count_classical(1.02, n)?;
        let main = classical_main_term(1.02, n)?;
        println!("N = {n}: r = {}, weighted = {:.3}, ratio = {:.6}", r.count, r.weighted, r.weighted / main);
    }
    Ok(())
}
