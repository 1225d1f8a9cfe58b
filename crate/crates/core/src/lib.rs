pub mod cli;
pub mod coeff;
pub mod descent;
pub mod error;
pub mod exponent;
pub mod isocrystal;
pub mod pipeline;
pub mod series;
pub mod seriesalg;

pub use coeff::{Coeff, Ring};
pub use error::{Error, Result};
pub use exponent::{Monoid, Rational};
pub use series::{Prec, Series};
pub use seriesalg::SeriesMatrix;
