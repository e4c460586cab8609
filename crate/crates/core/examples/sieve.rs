use tangent_primes::primesieve::Sieve;

fn main() -> tangent_primes::Result<()> {
    let sieve = Sieve::default();
    let small = sieve.segment(0.0, 100.0)?;
    println!("primes up to 100: {:?}", small.primes);
    let block = sieve.segment(1e12, 1e12 + 1e6)?;
    println!(
        "primes in (1e12, 1e12 + 1e6]: {} from {} to {}",
        block.len(),
        block.primes[0],
        block.primes[block.len() - 1]
    );
    Ok(())
}
