//! Graded-commutative dgas over truncated p-adic integers `Z/p^N`: exact
//! homology, Massey products, and synthesis of quasi-isomorphisms from the
//! Massey-product structure of the homology.

pub mod dga;
pub mod homology;
pub mod massey;
pub mod matrix;
pub mod padic;
pub mod rigidity;
pub mod cli;
