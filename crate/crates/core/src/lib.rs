//! Simulation and inverse design of frequency-modulated two-level emitters.
//!
//! A two-level system whose transition frequency is modulated periodically,
//! `ω₀ + Δ(t)`, emits and scatters light into a comb of Floquet sidebands at
//! `ω₀ + mΩ`. This crate computes
//!
//! * the phase-factor spectrum `α_m` of a modulation ([`waveform`]),
//! * single-photon scattering amplitudes, transmission and emission spectra
//!   ([`scattering`]),
//! * time-dependent master-equation dynamics ([`dynamics`]) and two-time
//!   photon correlations built on them ([`correlations`]),
//! * waveform inverse design for a target sideband distribution ([`optimizer`]),
//! * pulsed single-photon generation figures of merit ([`pulsed`]),
//! * Ramsey fringes under modulation ([`ramsey`]).
//!
//! All frequencies are angular (rad/s) and all times are in seconds. Ordinary
//! frequencies only appear in file formats, converted with [`units`].

pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod optimizer;
pub mod par;
pub mod pulsed;
pub mod ramsey;
pub mod scattering;
pub mod special;
pub mod units;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
