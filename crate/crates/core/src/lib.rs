//! Structure-preserving spatial discretization of one-dimensional
//! port-Hamiltonian systems.
//!
//! Each mesh cell `[a, b]` gets an interior midpoint `m`, which gives the
//! element enough freedom to carry both an exact discrete Dirac structure
//! and a Hamiltonian that matches the distributed energy on the element.
//! Elements are joined by power-neutral interconnection into a sparse
//! lumped model of order `4N`.
//!
//! The crate is `no_std` (with `alloc`). File formats, configuration and
//! the command-line front end live in the companion `phdisc` crate.
//!
//! Module map:
//! - [`mesh`]: domain, partition and elements
//! - [`shape`]: the ten closed-form shape functions of an element
//! - [`element`]: element matrices, Dirac pair and element state space
//! - [`hamiltonian`]: energy densities and element energy/gradients
//! - [`assembly`]: composition of the element chain into an aggregate model
//! - [`simulate`]: time integration and power diagnostics

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod assembly;
pub mod banded;
pub mod element;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod shape;
pub mod simulate;
pub mod sparse;

pub use assembly::{compose_chain, sparsity_report, AggregateModel, IoMap, SparsityReport};
pub use element::{build_dirac_pair, compute_matrices, element_state_space, DiracPair, ElementMatrices, ElementModel};
pub use error::{Error, Result};
pub use hamiltonian::{quadratic_density, quartic_density, ElementState, EnergyDensity, Hamiltonian};
pub use mesh::{build_mesh, build_uniform_mesh, Domain, Element, Mesh};
pub use shape::{build_shape_set, Node, Segment, ShapeKind, ShapeSet};
pub use simulate::{Integrator, Scenario, Signal, SimulationResult};
