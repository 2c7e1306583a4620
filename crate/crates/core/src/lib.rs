//! Simulation of continuum AB percolation and AB random geometric graphs,
//! together with explicit upper bounds on the critical B-intensity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod connectivity;
pub mod error;
pub mod geomgraph;
pub mod harness;
pub mod latticecoupling;
pub mod percolation;
pub mod pointprocess;
pub mod rng;

pub use error::{Error, Result};
pub use pointprocess::{sample_poisson, CoupledSampler, PointPattern, Region, RegionKind, Stream};
