//! Correlators recovered from the residue pairing with the kernel B-_{g,n},
//! with and without nonzero times.
use wk_intersect::coefficients::fit_closed_form_engine;
use wk_intersect::combinatorics::rat;
use wk_intersect::engine::Engine;
use wk_intersect::residue::{build_b_minus, correlator_from_residue, residue_times_correlator, times_correlator, TimesVector};

fn main() -> wk_intersect::error::Result<()> {
    let e = Engine::new();
    let set = fit_closed_form_engine(&e, 2, None)?;
    let b = build_b_minus(&set, 2, true)?;
    println!("normalized B-(2,2) has {} terms", b.terms.len());
    let raw = b.to_raw();
    for d in [[4, 1], [3, 2], [5, 0]] {
        println!("<{d:?}>_2: residue {}, recursion {}", correlator_from_residue(&raw, &d)?, e.correlator(2, &d)?);
    }

    // a deformation with t_1 = 1/3, t_2 = -1/5
    let t = TimesVector::zero().with_time(1, rat(1, 3)).with_time(2, rat(-1, 5));
    let b = build_b_minus(&set, 1, false)?;
    println!(
        "<tau_2 exp(t.tau)>_2: residue {}, expansion {}",
        residue_times_correlator(&b, &[2], &t, 0)?,
        times_correlator(&e, 2, &[2], &t)?
    );
    Ok(())
}
