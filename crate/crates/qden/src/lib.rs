pub mod linalg;
pub mod quantum;
pub mod seed;
