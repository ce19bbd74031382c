//! Single intersection numbers from the Virasoro recursion.
use wk_intersect::engine::Engine;

fn main() -> wk_intersect::error::Result<()> {
    let e = Engine::new();
    for (g, d) in [(0, vec![0, 0, 0]), (1, vec![1]), (2, vec![4]), (2, vec![3, 2]), (3, vec![4, 3, 2])] {
        println!("<{d:?}>_{g} = {}", e.correlator(g, &d)?);
    }
    println!("memo holds {} values", e.cache().len());
    Ok(())
}
