use tangent_primes::exponents::{admissible_c, exponent_chain, ordered_bounds};

fn main() -> tangent_primes::Result<()> {
    let chain = exponent_chain();
    for [name, expr, value] in chain.table() {
        println!("{name:>12}  {expr:<28} {value}");
    }
    println!("admissible c < {} ({:.6})", admissible_c(), admissible_c().to_f64());
    let bounds: Vec<String> = ordered_bounds().iter().map(|b| b.to_string()).collect();
    println!("bounds in order: {}", bounds.join(" < "));
    Ok(())
}
