pub mod poly;
pub mod problems;
pub mod skew;
pub mod stepper;
pub mod tower;
