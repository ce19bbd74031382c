//! Weil-Petersson volumes by two routes: kappa_1 expansion and Bessel residues.
use wk_intersect::coefficients::fit_closed_form_engine;
use wk_intersect::engine::Engine;
use wk_intersect::residue::build_b_minus;
use wk_intersect::wp::{wp_volume_kappa, wp_volume_residue};

fn main() -> wk_intersect::error::Result<()> {
    let e = Engine::new();
    for (g, n) in [(0, 4), (1, 1), (1, 2), (2, 1), (0, 5)] {
        let k = wp_volume_kappa(&e, g, n)?;
        let set = fit_closed_form_engine(&e, g, None)?;
        let r = wp_volume_residue(&build_b_minus(&set, n, false)?)?;
        println!("V({g},{n}) = {k}\n  residue route agrees: {}", k == r);
    }
    Ok(())
}
