//! Polynomial-delay enumeration kernels for Enum Vertex Cover and Enum
//! Independent Set, with the flashlight enumerator, the kernel framework and
//! a brute-force harness.

pub mod graph;
pub mod io;
pub mod matching;
pub mod mis;
pub mod decomp;
pub mod flashlight;
pub mod framework;
pub mod harness;
pub mod kernels;
