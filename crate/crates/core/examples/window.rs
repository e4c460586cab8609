use tangent_primes::window::{solve_for_target, window_from_index};

fn main() -> tangent_primes::Result<()> {
    for k in 2..=4 {
        let w = window_from_index(k, 1.02, 1.5, 0.05)?;
        println!(
            "k = {k}: X = {:.6}, N* = {}, N1 = {:.3}, tau = {:.4e}{}",
            w.x,
            w.n_star,
            w.n1,
            w.tau,
            if w.tau_clipped { " (clipped)" } else { "" }
        );
        let (lo, hi) = w.t_domain();
        let mid = 0.5 * (lo + hi);
        let y = w.invert_y(mid)?;
        println!("  t({y:.6}) = {:.6}, w({mid:.3}) = {:.6}", w.forward_t(y)?, w.weight_w(mid)?);
    }
    let w = solve_for_target(130_913, 1.02, 1.5, 0.05, 1e-6)?;
    println!("target 130913 lies in window k = {}", w.k);
    Ok(())
}
