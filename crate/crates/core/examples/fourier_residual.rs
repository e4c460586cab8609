use tangent_primes::circle::buriev_residual;

fn main() -> tangent_primes::Result<()> {
    let ys: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
    for h in [10, 100, 1000] {
        let s = buriev_residual(&ys, 0.37, h)?;
        println!("H = {h}: max {:.3e}, mean {:.3e}, max scaled {:.3}", s.max, s.mean, s.max_ratio);
    }
    Ok(())
}
