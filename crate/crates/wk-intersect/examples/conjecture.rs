//! C_g(lambda) vanishes when lambda has more than g parts (all >= 2).
use wk_intersect::coefficients::check_conjecture;
use wk_intersect::engine::Engine;

fn main() -> wk_intersect::error::Result<()> {
    let e = Engine::new();
    for g in 1..=5 {
        let r = check_conjecture(&e, g)?;
        println!("g = {g}, n = {}: {} violations", r.checked_n, r.violations.len());
    }
    Ok(())
}
