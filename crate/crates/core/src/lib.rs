pub mod cases;
pub mod cli;
pub mod cyclotomic;
pub mod jsonint;
pub mod matrix;
pub mod model;
pub mod modp;
pub mod realization;
pub mod traces;
