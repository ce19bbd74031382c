//! Closed forms for n = 1, 2, 3 checked against the recursion.
use wk_intersect::amplitude::amplitude;
use wk_intersect::engine::Engine;
use wk_intersect::oracles::{one_point, three_point, two_point, zagier_three_point};

fn main() -> wk_intersect::error::Result<()> {
    let e = Engine::new();
    for g in 1..=4 {
        let same = |n, p: wk_intersect::symmetric::EPolynomial| -> wk_intersect::error::Result<bool> {
            Ok(p.truncate_vars(n) == amplitude(&e, g, n, false)?.to_epoly())
        };
        println!(
            "g = {g}: one-point {}, two-point {}, three-point {}",
            same(1, one_point(g)?)?,
            same(2, two_point(g)?)?,
            same(3, three_point(g)?)?
        );
    }
    println!("T_2 = {}", zagier_three_point(2)?);
    println!("A(2,2) = {}", two_point(2)?);
    Ok(())
}
