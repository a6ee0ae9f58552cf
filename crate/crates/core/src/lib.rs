pub mod dsl;
pub mod forms;
pub mod normalizer;
pub mod quasihom;
pub mod ring;
pub mod solver;
