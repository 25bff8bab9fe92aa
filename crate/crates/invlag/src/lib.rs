pub mod expr;
pub mod tensor;
pub mod geometry;
pub mod conditions;
pub mod reconstruct;
pub mod solver;
pub mod crosscheck;
pub mod cli;
