//! Persisting the correlator memo and replaying it without recursion.
use wk_intersect::amplitude::amplitude;
use wk_intersect::cache::{flush, load_into};
use wk_intersect::engine::Engine;

fn main() -> wk_intersect::error::Result<()> {
    let path = std::env::temp_dir().join("wk-example.cache");
    let cold = Engine::new();
    let a = amplitude(&cold, 3, 3, false)?;
    println!("wrote {} records to {}", flush(&cold, &path)?, path.display());

    let warm = Engine::new();
    println!("loaded {}", load_into(&warm, &path)?);
    warm.cache().reset_counters();
    assert_eq!(amplitude(&warm, 3, 3, false)?, a);
    println!("replay: {} hits, {} misses", warm.cache().hits(), warm.cache().misses());
    std::fs::remove_file(&path)?;
    Ok(())
}
