//! Level subgroups of the universal ordinary distribution of an imaginary
//! quadratic field, computed exactly.

pub mod zlinalg;
pub mod quadfield;
pub mod rayclass;
pub mod groupring;
pub mod distribution;
pub mod cohomology;
