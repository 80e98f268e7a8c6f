//! Circuit simulation and measuring-cell physics for an ultra-low dissipation
//! cryogenic HEMT amplifier.
//!
//! The crate is organised around a small SPICE-like netlist format:
//!
//! * [`netlist`] parses and validates circuit decks.
//! * [`device`] holds the Statz GaAs FET model and its parameter fitter.
//! * [`dc`] solves nonlinear operating points with Newton iteration on the
//!   modified-nodal-analysis equations and sweeps the supply voltage.
//! * [`ac`] linearises a circuit around its operating point, sweeps it in
//!   frequency and synthesises L-section matching networks.
//! * [`physics`] covers the flux-qubit spectrum, the thermal photon budget of
//!   the shield cavity and the amplifier input brightness temperature.
//! * [`amplifier`] derives the shipped two-stage amplifier netlist.
//! * [`cli`] wires everything into the `cryoamp` executable.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod ac;
pub mod amplifier;
pub mod cli;
pub mod constants;
pub mod dc;
pub mod device;
mod linalg;
pub mod netlist;
pub mod output;
pub mod par;
pub mod physics;
pub mod svg;
pub mod units;

pub use device::StatzParams;
pub use netlist::Netlist;
pub use par::Execution;
