//! Self-contained numerical kernel used by the model and the simulator.

mod expm;
mod fourier;
mod partial_fraction;
mod poly;
mod rational;

pub use expm::{expm2, Mat2};
pub use fourier::fourier_coeff;
pub use partial_fraction::{partial_fractions, PartialFractionForm, PfTerm, POLE_MERGE_TOL};
pub use poly::Polynomial;
pub use rational::{eval_rational, Domain, RationalTF};
