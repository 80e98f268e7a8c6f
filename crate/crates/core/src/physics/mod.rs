//! Measuring-cell physics: qubit spectrum, thermal photons and brightness temperature.

mod brightness;
mod photons;
pub mod qubit;
pub mod tridiag;

pub use brightness::brightness_temperature;
pub use photons::{
    photon_rate, radiance_reduction, rayleigh_jeans, spectral_radiance, PhotonBudget, PhotonError, Reduction,
};
pub use qubit::{
    build_hamiltonian, eigensolve, spectrum, transition_scan, well_flux_separation, Grid, Hamiltonian, Level,
    QubitError, QubitParams, ScanParameter, ScanPoint, SpectrumResult, WellAssignment,
};
