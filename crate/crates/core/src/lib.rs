//! Desk-scale analysis toolkit for single emitters coupled to open
//! Fabry-Perot microcavities.
//!
//! The crate is organised by subsystem:
//!
//! * [`optics`]: Gaussian-beam mode dispersion, cavity figures of merit,
//!   double-resonance design, finesse and drift extraction from raw traces.
//! * [`photophysics`]: emitter-side models (three-level g², saturation,
//!   lifetime fits, level bookkeeping).
//! * [`cqed`]: Purcell budget and coupling-regime classification.
//! * [`fitkit`]: bounded Levenberg-Marquardt engine and the model registry.
//! * [`dataio`]: trace records, CSV schemas and canonical JSON reports.
//! * [`synthlab`]: seeded synthetic data generators and brute-force oracles.
//!
//! Internal units are nm (wavelength), µm (cavity lengths), THz (optical
//! frequencies), GHz (linewidths and rates), ns (time), mW and kC/s.

pub mod cqed;
pub mod dataio;
pub mod error;
pub mod fitkit;
pub mod optics;
pub mod photophysics;
pub mod signal;
pub mod synthlab;
pub mod units;

pub use cqed::{CouplingRates, PurcellBudget, Regime};
pub use dataio::{ScanTrace, SpectralMap, Spectrum, SweepDirection, TimeHistogram, TraceSet};
pub use error::{Error, Result};
pub use fitkit::{FitOptions, FitProblem, FitResult, ModelId};
pub use optics::{CavityFigures, CavityGeometry, Mirror, ModeModel, ModeResonance};
pub use photophysics::{EmitterSpec, G2Params, SaturationParams};
