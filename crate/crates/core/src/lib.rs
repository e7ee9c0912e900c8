//! Limsup sets generated by resonant systems.
//!
//! The crate evaluates measure laws for sets of points lying infinitely often near
//! resonant sets (rationals, restricted rationals, algebraic numbers, rational points on
//! the circle, rational lines in the square), checks the ubiquity hypotheses those laws
//! rest on, and builds Cantor subsets with audited mass distributions.

pub mod cantor;
pub mod funcs;
pub mod geometry;
pub mod laws;
pub mod systems;
pub mod ubiquity;
