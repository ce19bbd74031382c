//! Fits C_g(k, mu) = (k + shift)! Q(k) for every mu and evaluates far past the
//! seed range without touching the recursion.
use std::time::Instant;

use wk_intersect::coefficients::{closed_form_amplitude, fit_closed_form_engine, formula_text};
use wk_intersect::engine::Engine;

fn main() -> wk_intersect::error::Result<()> {
    let g = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let e = Engine::new();
    let t = Instant::now();
    let set = fit_closed_form_engine(&e, g, None)?;
    println!("genus {g}: {} families in {:.2?}\n", set.families.len(), t.elapsed());
    println!("{}\n", formula_text(&set));

    let t = Instant::now();
    let a = closed_form_amplitude(&set, 40)?;
    println!("A~({g},40) has {} terms, assembled in {:.2?}", a.dcoeffs.len(), t.elapsed());
    Ok(())
}
