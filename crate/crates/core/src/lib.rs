//! Almost flat unitary bundles over finite simplicial complexes.
//!
//! Bundles are stored as sampled transition cocycles on a barycentric
//! lattice of every simplex. On top of that the crate provides simplicial
//! transport with certified loop bounds, constructive trivialization and
//! skeleton extension, conversion to and from almost representations of
//! the fundamental group, and Chern-number detection on surfaces.

pub mod bundle;
pub mod chern_karea;
pub mod error;
pub mod fixtures;
pub mod matrixcore;
pub mod quasirep;
pub mod sampled;
pub mod simplicial;
pub mod transport;
pub mod trivialize;

pub use error::{Error, Result};
pub use bundle::CocycleBundle;
pub use matrixcore::CMatrix;
