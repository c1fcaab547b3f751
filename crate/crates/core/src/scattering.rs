//! Single-photon scattering off a modulated two-level system.
//!
//! An input photon at `ν` leaves the emitter in a superposition of sidebands
//! `ν + pΩ` with amplitudes
//!
//! ```text
//! S_p(ν) = −Σ_m √(γ_i γ_o) · α_m* · α_{m+p} / (γ/2 + i(ω₀ + mΩ − ν))
//! ```
//!
//! Everything in this module is a pure function of its inputs.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::par;
use crate::waveform::{phase_factor_spectrum, Harmonic, ModulationWaveform, PhaseFactorSpectrum};

/// Sideband transmission below this level is treated as negligible.
pub const WINDOW_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmitterParams {
    /// Transition frequency ω₀ (rad/s).
    pub omega0: f64,
    /// Total decay rate γ = γ_i + γ_o (1/s).
    pub gamma: f64,
    pub gamma_in: f64,
    pub gamma_out: f64,
}

impl EmitterParams {
    pub fn new(omega0: f64, gamma_in: f64, gamma_out: f64) -> Result<Self> {
        if !(gamma_in.is_finite() && gamma_in > 0.0) || !(gamma_out.is_finite() && gamma_out > 0.0) {
            return invalid(format!(
                "channel couplings must be positive, got γ_i={gamma_in}, γ_o={gamma_out}"
            ));
        }
        if !omega0.is_finite() {
            return invalid("ω₀ must be finite");
        }
        Ok(Self { omega0, gamma: gamma_in + gamma_out, gamma_in, gamma_out })
    }

    /// Equal coupling to the input and output channels.
    pub fn symmetric(omega0: f64, gamma: f64) -> Result<Self> {
        Self::new(omega0, 0.5 * gamma, 0.5 * gamma)
    }

    fn coupling(&self) -> f64 {
        (self.gamma_in * self.gamma_out).sqrt()
    }

    /// Lorentzian response `1/(γ/2 + i(ω₀ + mΩ − ν))` of sideband `m`.
    fn resonance(&self, a: &PhaseFactorSpectrum, m: i64, nu: f64) -> Complex64 {
        let detuning = self.omega0 + m as f64 * a.fundamental() - nu;
        Complex64::new(0.5 * self.gamma, detuning).inv()
    }
}

/// `S_p(ν)` for one sideband.
pub fn sideband_amplitude(e: &EmitterParams, a: &PhaseFactorSpectrum, p: i64, nu: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, alpha_m) in a.iter() {
        let partner = a.alpha(m + p);
        if partner.re == 0.0 && partner.im == 0.0 {
            continue;
        }
        acc += alpha_m.conj() * partner * e.resonance(a, m, nu);
    }
    -e.coupling() * acc
}

/// `S_p(ν)` for every `p` that can be non-zero, `p ∈ [−2M, 2M]`.
pub fn sideband_amplitudes(e: &EmitterParams, a: &PhaseFactorSpectrum, nu: f64) -> Vec<(i64, Complex64)> {
    let m_max = a.m_max() as i64;
    let weighted: Vec<Complex64> = a
        .iter()
        .map(|(m, alpha)| alpha.conj() * e.resonance(a, m, nu))
        .collect();
    let coupling = e.coupling();
    (-2 * m_max..=2 * m_max)
        .map(|p| {
            let lo = (-m_max).max(-m_max - p);
            let hi = m_max.min(m_max - p);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in lo..=hi {
                acc += weighted[(m + m_max) as usize] * a.alpha(m + p);
            }
            (p, -coupling * acc)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transmission {
    /// `T(ν) = Σ_{|p| ≤ window} |S_p(ν)|²`.
    pub value: f64,
    /// Sideband window actually summed (never smaller than requested).
    pub effective_window: u32,
}

/// Total transmission into the output channel.
///
/// The requested `p_window` is widened until the sidebands left out carry
/// less than [`WINDOW_TOLERANCE`].
pub fn transmission(e: &EmitterParams, a: &PhaseFactorSpectrum, nu: f64, p_window: u32) -> Transmission {
    let amps = sideband_amplitudes(e, a, nu);
    let full_window = 2 * a.m_max() as i64;
    let mut window = (p_window as i64).min(full_window);
    let mass_outside = |w: i64| -> f64 {
        amps.iter().filter(|(p, _)| p.abs() > w).map(|(_, s)| s.norm_sqr()).sum()
    };
    while window < full_window && mass_outside(window) >= WINDOW_TOLERANCE {
        window += 1;
    }
    let value = amps.iter().filter(|(p, _)| p.abs() <= window).map(|(_, s)| s.norm_sqr()).sum();
    Transmission { value, effective_window: window.max(p_window as i64) as u32 }
}

/// Sideband amplitudes and transmission on a grid of input frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct SidebandScattering {
    pub nu_grid: Vec<f64>,
    /// Sideband indices, the column labels of `amplitudes`.
    pub p_range: Vec<i64>,
    /// `amplitudes[i][j] = S_{p_range[j]}(nu_grid[i])`.
    pub amplitudes: Vec<Vec<Complex64>>,
    pub transmission: Vec<f64>,
}

pub fn scattering_sweep(e: &EmitterParams, a: &PhaseFactorSpectrum, nu_grid: &[f64]) -> SidebandScattering {
    let rows = par::map_indexed(nu_grid.len(), |i| sideband_amplitudes(e, a, nu_grid[i]));
    let p_range = rows.first().map(|r| r.iter().map(|(p, _)| *p).collect()).unwrap_or_default();
    let amplitudes: Vec<Vec<Complex64>> =
        rows.iter().map(|r| r.iter().map(|(_, s)| *s).collect()).collect();
    let transmission = amplitudes.iter().map(|r| r.iter().map(|s| s.norm_sqr()).sum()).collect();
    SidebandScattering { nu_grid: nu_grid.to_vec(), p_range, amplitudes, transmission }
}

/// Single-photon spectral amplitude on a uniform frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WavepacketSpectrum {
    pub omega_start: f64,
    pub spacing: f64,
    pub amplitude: Vec<Complex64>,
}

impl WavepacketSpectrum {
    pub fn new(omega_start: f64, spacing: f64, amplitude: Vec<Complex64>) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return invalid(format!("grid spacing must be positive, got {spacing}"));
        }
        Ok(Self { omega_start, spacing, amplitude })
    }

    /// Gaussian wavepacket whose intensity `|ψ(ω)|²` has the given FWHM,
    /// normalised to unit norm on the grid.
    pub fn gaussian(center: f64, fwhm: f64, omega_start: f64, spacing: f64, points: usize) -> Result<Self> {
        if !(fwhm.is_finite() && fwhm > 0.0) {
            return invalid(format!("wavepacket FWHM must be positive, got {fwhm}"));
        }
        // |ψ|² ∝ exp(−(ω−c)²/(2s²)) with FWHM = 2√(2 ln 2)·s
        let s = fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        let amplitude = (0..points)
            .map(|j| {
                let x = omega_start + j as f64 * spacing - center;
                Complex64::new((-x * x / (4.0 * s * s)).exp(), 0.0)
            })
            .collect();
        let mut packet = Self::new(omega_start, spacing, amplitude)?;
        let norm = packet.norm();
        if norm == 0.0 {
            return invalid("wavepacket has no weight on the grid");
        }
        let scale = 1.0 / norm.sqrt();
        packet.amplitude.iter_mut().for_each(|c| *c *= scale);
        Ok(packet)
    }

    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.omega_start + j as f64 * self.spacing
    }

    pub fn omega_grid(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.omega(j)).collect()
    }

    /// `Σ |ψ|² · dω`.
    pub fn norm(&self) -> f64 {
        self.amplitude.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.spacing
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitude.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Linear interpolation, zero outside the grid.
    pub fn sample(&self, omega: f64) -> Complex64 {
        let x = (omega - self.omega_start) / self.spacing;
        if x < 0.0 || x > (self.len() - 1) as f64 || self.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let i = x.floor() as usize;
        if i + 1 >= self.len() {
            return self.amplitude[self.len() - 1];
        }
        let f = x - i as f64;
        self.amplitude[i] * (1.0 - f) + self.amplitude[i + 1] * f
    }
}

/// Output wavepacket `ψ_out(ω) = Σ_p S_p(ω − pΩ)·ψ_in(ω − pΩ)` on the input grid.
pub fn scatter_wavepacket(
    e: &EmitterParams,
    a: &PhaseFactorSpectrum,
    input: &WavepacketSpectrum,
) -> Result<WavepacketSpectrum> {
    let required = e.gamma / 20.0;
    if input.spacing > required * (1.0 + 1e-9) {
        return Err(Error::Resolution { spacing: input.spacing, required });
    }
    let omega = a.fundamental();
    let m_max = a.m_max() as i64;
    let amplitude = par::map_indexed(input.len(), |j| {
        let w = input.omega(j);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in -2 * m_max..=2 * m_max {
            let nu = w - p as f64 * omega;
            let psi = input.sample(nu);
            if psi.re == 0.0 && psi.im == 0.0 {
                continue;
            }
            acc += sideband_amplitude(e, a, p, nu) * psi;
        }
        acc
    });
    WavepacketSpectrum::new(input.omega_start, input.spacing, amplitude)
}

/// Output intensity `|ψ_out(ω)|²` for a family of Gaussian inputs centred at
/// each of `centers` (rows).
pub fn scatter_map(
    e: &EmitterParams,
    a: &PhaseFactorSpectrum,
    centers: &[f64],
    fwhm: f64,
    omega_start: f64,
    spacing: f64,
    points: usize,
) -> Result<Vec<Vec<f64>>> {
    par::try_map_indexed(centers.len(), |i| {
        let input = WavepacketSpectrum::gaussian(centers[i], fwhm, omega_start, spacing, points)?;
        Ok(scatter_wavepacket(e, a, &input)?.intensity())
    })
}

/// Spontaneous-emission intensity spectrum, `Σ_m |α_m|² · L(ω − ω₀ − mΩ)`
/// with `L` a unit-area Lorentzian of FWHM γ.
#[derive(Clone, Debug, PartialEq)]
pub struct EmissionSpectrum {
    pub omega_grid: Vec<f64>,
    pub intensity: Vec<f64>,
    /// Integral over the whole real line, `Σ_m |α_m|²`.
    pub area: f64,
    lines: Vec<(f64, f64)>,
    gamma: f64,
}

impl EmissionSpectrum {
    /// `(center, weight)` of each sideband line.
    pub fn lines(&self) -> &[(f64, f64)] {
        &self.lines
    }

    /// Exact area inside `[lo, hi]`.
    pub fn window_area(&self, lo: f64, hi: f64) -> f64 {
        let half = 0.5 * self.gamma;
        self.lines
            .iter()
            .map(|&(c, w)| w * (((hi - c) / half).atan() - ((lo - c) / half).atan()) / PI)
            .sum()
    }
}

pub fn lorentzian(x: f64, fwhm: f64) -> f64 {
    let half = 0.5 * fwhm;
    half / PI / (x * x + half * half)
}

pub fn floquet_emission_spectrum(e: &EmitterParams, a: &PhaseFactorSpectrum, omega_grid: &[f64]) -> EmissionSpectrum {
    let lines: Vec<(f64, f64)> = a
        .iter()
        .map(|(m, alpha)| (e.omega0 + m as f64 * a.fundamental(), alpha.norm_sqr()))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let intensity = omega_grid
        .iter()
        .map(|&w| lines.iter().map(|&(c, weight)| weight * lorentzian(w - c, e.gamma)).sum())
        .collect();
    EmissionSpectrum {
        omega_grid: omega_grid.to_vec(),
        intensity,
        area: a.total_weight(),
        lines,
        gamma: e.gamma,
    }
}

/// A one-parameter family of modulation shapes,
/// `Δ(t) = A · Σ_k 2·Re(s_k e^{−ikΩt})` with dimensionless `s_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveFamily {
    shape: Vec<(u32, Complex64)>,
}

impl DriveFamily {
    /// `Δ(t) = A sin(Ωt)`.
    pub fn sine() -> Self {
        Self { shape: vec![(1, Complex64::new(0.0, 0.5))] }
    }

    /// The shape of `w`, normalised so that `A` is its amplitude bound
    /// `Σ 2|c_k|` (the peak amplitude for a single harmonic).
    pub fn from_waveform(w: &ModulationWaveform) -> Result<Self> {
        let bound = w.amplitude_bound();
        if bound == 0.0 {
            return invalid("cannot derive a drive family from an unmodulated waveform");
        }
        Ok(Self { shape: w.harmonics().iter().map(|h| (h.k, h.amplitude / bound)).collect() })
    }

    pub fn waveform(&self, amplitude: f64, omega: f64) -> Result<ModulationWaveform> {
        let harmonics = self
            .shape
            .iter()
            .map(|&(k, s)| Harmonic { k, amplitude: s * amplitude })
            .collect();
        ModulationWaveform::new(omega, harmonics)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepAxis {
    /// Sweep Ω with the amplitude held fixed.
    OmegaAtFixedAmplitude { amplitude: f64 },
    /// Sweep A with Ω held fixed.
    AmplitudeAtFixedOmega { omega: f64 },
    /// Sweep Ω with A/Ω held fixed.
    OmegaAtFixedRatio { ratio: f64 },
}

impl SweepAxis {
    /// `(A, Ω)` at sweep coordinate `value`.
    pub fn point(&self, value: f64) -> (f64, f64) {
        match *self {
            SweepAxis::OmegaAtFixedAmplitude { amplitude } => (amplitude, value),
            SweepAxis::AmplitudeAtFixedOmega { omega } => (value, omega),
            SweepAxis::OmegaAtFixedRatio { ratio } => (ratio * value, value),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumMap {
    pub sweep_values: Vec<f64>,
    /// Frequencies relative to ω₀ (rad/s).
    pub detuning_grid: Vec<f64>,
    pub raw: Vec<Vec<f64>>,
    /// Rows scaled to unit maximum, for display.
    pub normalized: Vec<Vec<f64>>,
}

/// Emission spectra across a sweep of the drive. Each row is independent.
pub fn spectrum_map(
    e: &EmitterParams,
    family: &DriveFamily,
    axis: SweepAxis,
    sweep_values: &[f64],
    detuning_grid: &[f64],
) -> Result<SpectrumMap> {
    if sweep_values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return invalid("sweep values must be non-negative");
    }
    let omega_grid: Vec<f64> = detuning_grid.iter().map(|d| e.omega0 + d).collect();
    let raw = par::try_map_indexed(sweep_values.len(), |i| {
        let (amplitude, omega) = axis.point(sweep_values[i]);
        let a = if amplitude == 0.0 {
            PhaseFactorSpectrum::unmodulated(omega.max(f64::MIN_POSITIVE))
        } else {
            phase_factor_spectrum(&family.waveform(amplitude, omega)?)?
        };
        Ok(floquet_emission_spectrum(e, &a, &omega_grid).intensity)
    })?;
    let normalized = raw
        .iter()
        .map(|row| {
            let peak = row.iter().cloned().fold(0.0, f64::max);
            row.iter().map(|v| if peak > 0.0 { v / peak } else { 0.0 }).collect()
        })
        .collect();
    Ok(SpectrumMap { sweep_values: sweep_values.to_vec(), detuning_grid: detuning_grid.to_vec(), raw, normalized })
}
