//! Solver-in-the-loop generation of ASP encodings for logic grid puzzles.

pub mod datagen;
pub mod fixtures;
pub mod generator;
pub mod matching;
pub mod metrics;
pub mod puzzle;
pub mod reward;
pub mod search;
pub mod solver;
pub mod trajectory;
