pub mod arith;
pub mod error;
pub mod geometry;
pub mod intersection;
pub mod lab;
pub mod random_model;
pub mod topology;
pub mod volumes;

pub use error::{Error, Result};
