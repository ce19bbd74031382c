//! The amplitude A_{g,n} written in elementary symmetric polynomials.
use wk_intersect::amplitude::amplitude;
use wk_intersect::engine::Engine;

fn main() -> wk_intersect::error::Result<()> {
    let e = Engine::new();
    for n in 1..=4 {
        println!("A~(1,{n}) = {}", amplitude(&e, 1, n, true)?.to_epoly());
    }
    let a = amplitude(&e, 2, 3, true)?;
    println!("A~(2,3) = {}", a.to_epoly());
    // C coefficients: the ones stripped from each partition
    for (lam, c) in a.c_coeffs() {
        println!("  C_2{} = {c}", lam.tuple_string());
    }
    Ok(())
}
