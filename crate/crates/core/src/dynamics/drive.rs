use std::f64::consts::{LN_2, PI};

use crate::error::{invalid, Result};
use crate::waveform::ModulationWaveform;

/// Gaussian optical pulse, truncated at ±5·FWHM from its centre with the
/// area renormalised to `area`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPulse {
    pub center: f64,
    pub fwhm: f64,
    /// `∫ Ω_R dt` in radians.
    pub area: f64,
    /// Carrier detuning from ω₀ (rad/s).
    pub detuning: f64,
}

impl GaussianPulse {
    pub const TRUNCATION: f64 = 5.0;

    pub fn new(center: f64, fwhm: f64, area: f64, detuning: f64) -> Result<Self> {
        if !(fwhm.is_finite() && fwhm > 0.0) {
            return invalid(format!("pulse FWHM must be positive, got {fwhm}"));
        }
        if !(area.is_finite() && area >= 0.0) {
            return invalid(format!("pulse area must be non-negative, got {area}"));
        }
        Ok(Self { center, fwhm, area, detuning })
    }

    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * LN_2).sqrt())
    }

    pub fn support(&self) -> (f64, f64) {
        let half = Self::TRUNCATION * self.fwhm;
        (self.center - half, self.center + half)
    }

    pub fn rabi(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return 0.0;
        }
        let s = self.sigma();
        let kept = libm::erf(Self::TRUNCATION * self.fwhm / (s * std::f64::consts::SQRT_2));
        let x = (t - self.center) / s;
        self.area / (s * (2.0 * PI).sqrt() * kept) * (-0.5 * x * x).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RabiEnvelope {
    Off,
    /// Continuous-wave Rabi frequency Ω_R (rad/s).
    Constant(f64),
    Pulse(GaussianPulse),
}

/// Everything that drives the emitter: the modulation `Δ(t)` and a coherent
/// laser field described in the frame rotating at the laser frequency.
///
/// The rotating-frame Hamiltonian is
/// `H(t) = (Δ(t − t_ref + φ/Ω) − δ_L) σ†σ + (Ω_R(t)/2)(σ + σ†)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSpec {
    pub waveform: ModulationWaveform,
    /// Modulation phase φ at `phase_reference_time`.
    pub modulation_phase: f64,
    pub phase_reference_time: f64,
    /// Laser detuning δ_L from ω₀ (rad/s).
    pub laser_detuning: f64,
    pub envelope: RabiEnvelope,
}

impl DriveSpec {
    pub fn cw(waveform: ModulationWaveform, laser_detuning: f64, rabi: f64) -> Self {
        Self {
            waveform,
            modulation_phase: 0.0,
            phase_reference_time: 0.0,
            laser_detuning,
            envelope: RabiEnvelope::Constant(rabi),
        }
    }

    /// Weak CW drive with coupling `ε(σ + σ†)`, i.e. `Ω_R = 2ε`.
    pub fn weak_cw(waveform: ModulationWaveform, laser_detuning: f64, epsilon: f64) -> Self {
        Self::cw(waveform, laser_detuning, 2.0 * epsilon)
    }

    /// Pulsed drive with the modulation phase `phase` taken at the pulse centre.
    pub fn pulsed(waveform: ModulationWaveform, pulse: GaussianPulse, phase: f64) -> Self {
        Self {
            waveform,
            modulation_phase: phase,
            phase_reference_time: pulse.center,
            laser_detuning: pulse.detuning,
            envelope: RabiEnvelope::Pulse(pulse),
        }
    }

    pub fn free(waveform: ModulationWaveform) -> Self {
        Self {
            waveform,
            modulation_phase: 0.0,
            phase_reference_time: 0.0,
            laser_detuning: 0.0,
            envelope: RabiEnvelope::Off,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.modulation_phase = phase;
        self
    }

    /// Rotating-frame detuning `Δ(t − t_ref + φ/Ω) − δ_L`.
    pub fn detuning_at(&self, t: f64) -> f64 {
        let omega = self.waveform.fundamental();
        let shift = self.modulation_phase.rem_euclid(std::f64::consts::TAU) / omega;
        self.waveform.eval_delta(t - self.phase_reference_time + shift) - self.laser_detuning
    }

    pub fn rabi_at(&self, t: f64) -> f64 {
        match self.envelope {
            RabiEnvelope::Off => 0.0,
            RabiEnvelope::Constant(r) => r,
            RabiEnvelope::Pulse(p) => p.rabi(t),
        }
    }

    pub fn is_cw(&self) -> bool {
        matches!(self.envelope, RabiEnvelope::Constant(_) | RabiEnvelope::Off)
    }

    pub fn pulse(&self) -> Option<&GaussianPulse> {
        match &self.envelope {
            RabiEnvelope::Pulse(p) => Some(p),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::make_sine;

    #[test]
    fn pulse_area_is_exact() {
        let p = GaussianPulse::new(1.0, 0.1, 3.0, 0.0).unwrap();
        let (lo, hi) = p.support();
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let mut s = p.rabi(lo) + p.rabi(hi);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * p.rabi(lo + i as f64 * h);
        }
        assert!((s * h / 3.0 - 3.0).abs() < 1e-7);
        assert_eq!(p.rabi(hi + 1e-9), 0.0);
        // FWHM of the envelope
        let half = p.rabi(1.0) * 0.5;
        assert!((p.rabi(1.05) - half).abs() < 1e-12 * p.rabi(1.0));
    }

    #[test]
    fn phase_is_taken_at_reference_time() {
        let w = make_sine(2.0, 3.0, 0.0).unwrap();
        let p = GaussianPulse::new(0.7, 0.1, 1.0, 0.5).unwrap();
        let d = DriveSpec::pulsed(w, p, 1.1);
        assert!((d.detuning_at(0.7) - (2.0 * 1.1f64.sin() - 0.5)).abs() < 1e-14);
        let shifted = d.clone().with_phase(1.1 + std::f64::consts::TAU);
        assert!((shifted.detuning_at(0.9) - d.detuning_at(0.9)).abs() < 1e-12);
    }
}
