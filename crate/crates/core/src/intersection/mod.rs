//! Intersection numbers of psi and kappa_1 classes on moduli spaces of curves.

mod engine;
mod key;

pub use engine::{multisets, signatures_within, BracketCache, BracketEngine, WarmStats, CACHE_HEADER};
pub use key::{check_stable, dimension, is_stable, BracketKey};
