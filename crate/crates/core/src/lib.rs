//! CMV operators on finite coefficient windows: construction, Weyl-Titchmarsh
//! and Green's function data, and reconstruction of Verblunsky coefficients
//! from that data.

pub mod cmv;
pub mod coeffs;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod laurent;
pub mod series;
pub mod spectral;

pub use cmv::{FiniteCmv, GreenSeriesPair};
pub use coeffs::{VerblunskyWindow, C64};
pub use error::{CmvError, Result};
pub use forward::{forward, ForwardData};
pub use inverse::{ReconstructionReport, Route, UniquenessKind, UniquenessReport};
pub use laurent::{LaurentPoly, Side, SolutionFamily, TransferMatrix};
pub use series::TaylorSeries;
pub use spectral::{MomentSequence, WTFunctions};
