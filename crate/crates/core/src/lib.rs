pub mod algebra;
pub mod context;
pub mod error;
pub mod experiments;
pub mod field;
pub mod hmf;
pub mod homalg;
pub mod knoerrer;
pub mod linalg;
pub mod matfac;
pub(crate) mod poly;
pub mod radical;
pub mod report;
pub mod rings;
pub mod series;
pub mod smatrix;

pub use context::{Context, Precision};
pub use error::{MflabError, Result};
pub use field::{Field, FieldElem};
pub use matfac::MatrixFactorization;
pub use rings::{HypersurfaceRing, MonomialCurveRing, QuotientElem};
pub use series::{SeriesRing, TruncSeries};
