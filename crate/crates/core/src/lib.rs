//! Function-lattice machinery on finite atomic measure spaces.
//!
//! The crate evaluates lattice quasi-norms (weighted Lebesgue, Lorentz
//! `Λ`/`Γ`/`L_{p,r}`, Wiener amalgams), computes and searches for upper and
//! lower p-estimate constants, builds the disjoint-partition renormings, and
//! checks Christ–Kiselev type bounds for maximal operators over filtrations.
//!
//! Everything lives on a finite, purely atomic measure space. Searches only
//! ever certify lower bounds; exact values come from closed forms or from
//! exhaustive enumeration.

pub mod acceptance;
pub mod conditions;
pub mod constants;
pub mod doc;
pub mod dual;
pub mod error;
pub mod estimates;
pub mod fourier;
pub mod index;
pub mod norm;
pub mod operators;
pub mod partition;
mod quadrature;
pub mod rearrangement;
pub mod renorm;
pub mod search;
pub mod space;
pub mod weight;

pub use error::{Error, Result};
pub use index::Index;
pub use norm::{BlockPartition, LatticeFunctional, NormFamily, QuasiNorm};
pub use rearrangement::StepFunction;
pub use search::SearchConfig;
pub use space::{AtomicSpace, LatticeVector};
pub use weight::WeightFunction;
