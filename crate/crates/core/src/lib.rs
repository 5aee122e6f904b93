//! Symbolic and numeric verification of contact metric structures on
//! three-dimensional charts.

pub mod charts;
pub mod curvature;
pub mod dhomothety;
pub mod expr;
pub mod fdcheck;
pub mod fields;
pub mod nullity;
pub mod report;
pub mod sampling;
pub mod specfile;
pub mod structure;
pub mod sweep;
