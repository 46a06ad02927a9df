//! Linear graph modeling of multi-domain dynamic systems, and genetic
//! programming synthesis of passive filter circuits evaluated through those
//! models.
//!
//! - [`lg`]: graph construction, normal trees, state-space derivation.
//! - [`dynamics`]: frequency response and fixed-step time simulation.
//! - [`gp`]: constructor trees and the generational evolution loop.
//! - [`filter`]: embryo circuit, tree compilation, parameter ranges, fitness.

pub mod dynamics;
pub mod filter;
pub mod gp;
pub mod lg;
