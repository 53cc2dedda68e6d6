//! Small-signal models of digitally controlled buck converters whose ADC is
//! synchronized to the DPWM carrier, together with a cycle-accurate switching
//! simulator and a software frequency-response analyzer used to check them.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: polynomials, rational transfer functions, partial
//!   fractions, the 2×2 matrix exponential and single-bin Fourier extraction.
//! - [`plant`]: the buck power stage (duty-to-current transfer function,
//!   operating point, switched state-space matrices).
//! - [`model`]: the analytic loop gains (modified z-transform lifting,
//!   synchronization feedthrough, digital and analog loop gains, sideband series).
//! - [`sim`]: event-driven piecewise-LTI simulation of the closed loop.
//! - [`sfra`]: sinusoidal-injection loop-gain measurement on top of [`sim`].
//! - [`bode`]: frequency-response curves and their CSV representation.

pub mod bode;
pub mod error;
pub mod model;
pub mod numerics;
pub mod plant;
pub mod sfra;
pub mod sim;

pub use bode::{BodeCurve, BodePoint, Quantity};
pub use error::{Error, Result};
pub use model::{DelayDecomposition, LoopGainSet, LoopModel, SymDelays};
pub use num_complex::Complex64;
pub use numerics::{PartialFractionForm, Polynomial, RationalTF};
pub use sfra::{InjectionSpec, Measurement, MeasuredPoint};
pub use sim::{Injection, InjectionPoint, Probes, SimState, Simulator, SteadyState, Waveform};
pub use plant::{
    model_operating_point, operating_point, steady_operating_point, ConverterConfig, Modulation, OperatingPoint,
    SamplingPosition, StateSpacePair,
};


