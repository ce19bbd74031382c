pub mod amplitude;
pub mod cache;
pub mod cli;
pub mod coefficients;
pub mod combinatorics;
pub mod engine;
pub mod error;
pub mod oracles;
pub mod poly;
pub mod printed;
pub mod residue;
pub mod scalar;
pub mod wp;
pub mod symmetric;
