//! Circuit-level analysis and synthesis of CSR-loaded metamaterial band-pass filters.
//!
//! The unit cell is a lumped two-port (series interdigital capacitor, shunt line
//! capacitance feeding a parallel resonator tank). The crate cascades cells as
//! chain matrices, converts to S-parameters, locates Bloch pass-bands and the
//! transmission zero, extracts filter figures of merit, fits element values to a
//! requirement mask and reads/writes Touchstone files.

pub mod circuit;
pub mod dispersion;
pub mod error;
pub mod export;
pub mod grid;
pub mod metrics;
pub mod optim;
pub mod roots;
pub mod sweep;
pub mod synthesis;
pub mod touchstone;
pub mod twoport;

pub use circuit::{Topology, UnitCellParams};
pub use error::{BandSide, Error, Result};
pub use grid::{FrequencyGrid, Spacing};
pub use sweep::{SParameterPoint, SweepTable};
pub use twoport::{cascade, Abcd};
