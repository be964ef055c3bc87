pub mod cost;
pub mod simulate;
pub mod sweep;
pub mod validate;
