pub mod arith;
pub mod catalog;
pub mod constructor;
pub mod design;
pub mod generators;
pub mod io;
pub mod scalar;
pub mod solver;
pub mod subsets;
