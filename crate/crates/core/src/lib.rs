pub mod algebra;
pub mod dual_pair;
pub mod error;
pub mod limit;
pub mod linalg;
pub mod measure;
pub mod orbit;
pub mod quad;
pub mod report;
pub mod slice;
pub mod weil;

pub use algebra::{herm_skew_dims, Algebra, DMatrix, DScalar};
pub use dual_pair::{catalog, catalog_pair, DualPairSpec, LieAlgebraBasis, PairDescriptor};
pub use error::{Error, Result};
