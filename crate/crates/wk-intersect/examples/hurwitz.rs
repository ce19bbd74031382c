//! One-part double Hurwitz polynomials from the sinh generating function.
use wk_intersect::oracles::gjv_onepart_poly;

fn main() {
    for (g, n) in [(0, 3), (1, 1), (1, 2), (2, 2)] {
        let h = gjv_onepart_poly(g, n);
        println!("P({g},{n}):");
        for (rho, c) in &h.terms {
            println!("  p{} : {c}", rho.tuple_string());
        }
    }
}
