pub mod cohomology;
pub mod correspondence;
pub mod error;
pub mod pt_algebra;
pub mod series_data;
pub mod exactmath;
pub mod gw_algebra;
pub mod hilbert_surface;
pub mod vertex;

pub use error::{Error, MathError, Result};
