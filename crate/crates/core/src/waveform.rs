//! Periodic frequency modulations `Δ(t)` and their phase-factor spectra.
//!
//! A waveform is stored as a truncated harmonic series
//! `Δ(t) = Σ_k 2·Re(c_k·e^{−ikΩt})`, `k ≥ 1`, which is real and zero-mean by
//! construction. The excited state accumulates the phase
//! `Φ(t) = ∫₀ᵗ Δ(t′) dt′`, and the Fourier coefficients of `e^{−iΦ(t)}` on the
//! harmonics `e^{−imΩt}` are the sideband amplitudes `α_m`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::units::{hz_to_rad, rad_to_hz};

/// Tail mass below which the sideband series is truncated.
pub const TAIL_THRESHOLD: f64 = 1e-10;
/// Maximum change of any coefficient between successive grid doublings.
pub const STABILITY_THRESHOLD: f64 = 1e-10;
/// Largest DFT grid tried before giving up.
pub const MAX_SAMPLES: usize = 1 << 22;
/// Coefficients above this magnitude are always retained, even when the
/// tail-mass criterion alone would drop them.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    /// Complex amplitude `c_k` in rad/s.
    pub amplitude: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulationWaveform {
    fundamental: f64,
    harmonics: Vec<Harmonic>,
}

impl ModulationWaveform {
    pub fn new(fundamental: f64, mut harmonics: Vec<Harmonic>) -> Result<Self> {
        if !(fundamental.is_finite() && fundamental > 0.0) {
            return invalid(format!("fundamental must be positive, got {fundamental}"));
        }
        harmonics.sort_by_key(|h| h.k);
        for pair in harmonics.windows(2) {
            if pair[0].k == pair[1].k {
                return invalid(format!("harmonic index {} repeated", pair[0].k));
            }
        }
        for h in &harmonics {
            if h.k == 0 {
                return invalid("harmonic index 0 (DC offset) is not representable");
            }
            if !(h.amplitude.re.is_finite() && h.amplitude.im.is_finite()) {
                return invalid(format!("harmonic {} has a non-finite amplitude", h.k));
            }
        }
        Ok(Self { fundamental, harmonics })
    }

    /// No modulation at all, with a nominal fundamental.
    pub fn unmodulated(fundamental: f64) -> Result<Self> {
        Self::new(fundamental, Vec::new())
    }

    pub fn fundamental(&self) -> f64 {
        self.fundamental
    }

    pub fn period(&self) -> f64 {
        TAU / self.fundamental
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.last().map_or(0, |h| h.k)
    }

    /// True when every harmonic amplitude is exactly zero.
    pub fn is_unmodulated(&self) -> bool {
        self.harmonics.iter().all(|h| h.amplitude == Complex64::new(0.0, 0.0))
    }

    /// Upper bound on `|Δ(t)|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.harmonics.iter().map(|h| 2.0 * h.amplitude.norm()).sum()
    }

    /// `Δ(t)` in rad/s.
    pub fn eval_delta(&self, t: f64) -> f64 {
        let theta = self.fundamental * t;
        self.harmonics
            .iter()
            .map(|h| {
                let (s, c) = (h.k as f64 * theta).sin_cos();
                2.0 * (h.amplitude.re * c + h.amplitude.im * s)
            })
            .sum()
    }

    /// `Φ(t) = ∫₀ᵗ Δ`, exact per harmonic.
    pub fn accumulated_phase(&self, t: f64) -> f64 {
        self.phase_at_angle(self.fundamental * t)
    }

    /// `Φ` as a function of the modulation angle `θ = Ωt`. Depends only on
    /// the ratios `c_k/Ω`.
    pub fn phase_at_angle(&self, theta: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| {
                let k = h.k as f64;
                let (s, c) = (k * theta).sin_cos();
                let a = h.amplitude.re / self.fundamental;
                let b = h.amplitude.im / self.fundamental;
                (2.0 / k) * (a * s + b * (1.0 - c))
            })
            .sum()
    }

    /// The waveform `κ·Δ(κt)`: fundamental and amplitudes scaled by `κ`.
    /// Its phase-factor spectrum is unchanged.
    pub fn scaled(&self, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return invalid(format!("scale factor must be positive, got {kappa}"));
        }
        let harmonics = self
            .harmonics
            .iter()
            .map(|h| Harmonic { k: h.k, amplitude: h.amplitude * kappa })
            .collect();
        Self::new(self.fundamental * kappa, harmonics)
    }

    /// The time-reversed modulation `Δ(−t)`.
    pub fn time_reversed(&self) -> Self {
        let harmonics = self
            .harmonics
            .iter()
            .map(|h| Harmonic { k: h.k, amplitude: h.amplitude.conj() })
            .collect();
        Self { fundamental: self.fundamental, harmonics }
    }

    pub fn to_file_repr(&self) -> WaveformFile {
        WaveformFile {
            omega_hz: rad_to_hz(self.fundamental),
            harmonics: self
                .harmonics
                .iter()
                .map(|h| HarmonicFile {
                    k: h.k,
                    re_hz: rad_to_hz(h.amplitude.re),
                    im_hz: rad_to_hz(h.amplitude.im),
                })
                .collect(),
        }
    }

    pub fn from_file_repr(file: &WaveformFile) -> Result<Self> {
        let harmonics = file
            .harmonics
            .iter()
            .map(|h| Harmonic {
                k: h.k,
                amplitude: Complex64::new(hz_to_rad(h.re_hz), hz_to_rad(h.im_hz)),
            })
            .collect();
        Self::new(hz_to_rad(file.omega_hz), harmonics)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_repr()).expect("waveform serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WaveformFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("waveform JSON: {e}")))?;
        Self::from_file_repr(&file)
    }
}

/// On-disk waveform representation in ordinary-frequency units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformFile {
    pub omega_hz: f64,
    pub harmonics: Vec<HarmonicFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicFile {
    pub k: u32,
    pub re_hz: f64,
    pub im_hz: f64,
}

/// `Δ(t) = A·sin(Ωt + φ₀)`.
pub fn make_sine(amplitude: f64, fundamental: f64, phase: f64) -> Result<ModulationWaveform> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return invalid(format!("sine amplitude must be non-negative, got {amplitude}"));
    }
    // A sin(θ + φ) = 2·Re(c·e^{−iθ}) with c = (A/2)(sin φ + i cos φ)
    let (s, c) = phase.sin_cos();
    let h = Harmonic { k: 1, amplitude: Complex64::new(0.5 * amplitude * s, 0.5 * amplitude * c) };
    ModulationWaveform::new(fundamental, vec![h])
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFactorSpectrum {
    fundamental: f64,
    m_max: usize,
    coefficients: Vec<Complex64>,
    truncation_tail: f64,
    samples: usize,
}

impl PhaseFactorSpectrum {
    /// Spectrum of an unmodulated emitter: `α₀ = 1`.
    pub fn unmodulated(fundamental: f64) -> Self {
        Self {
            fundamental,
            m_max: 0,
            coefficients: vec![Complex64::new(1.0, 0.0)],
            truncation_tail: 0.0,
            samples: 1,
        }
    }

    /// Build from explicit coefficients for `m ∈ [−M, M]` (length `2M+1`).
    pub fn from_coefficients(fundamental: f64, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() % 2 == 0 {
            return invalid("coefficient vector must have odd length 2M+1");
        }
        let m_max = coefficients.len() / 2;
        let mass: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        Ok(Self { fundamental, m_max, coefficients, truncation_tail: 1.0 - mass, samples: 0 })
    }

    pub fn fundamental(&self) -> f64 {
        self.fundamental
    }

    /// Largest retained sideband index `M`.
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    /// DFT grid size that met the convergence criteria.
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `α_m`, zero outside the retained range.
    pub fn alpha(&self, m: i64) -> Complex64 {
        let m_max = self.m_max as i64;
        if m.abs() > m_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(m + m_max) as usize]
        }
    }

    pub fn weight(&self, m: i64) -> f64 {
        self.alpha(m).norm_sqr()
    }

    /// `(m, α_m)` for every retained index, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m_max = self.m_max as i64;
        self.coefficients.iter().enumerate().map(move |(i, &a)| (i as i64 - m_max, a))
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        -(self.m_max as i64)..=(self.m_max as i64)
    }

    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn dft_coefficients(w: &ModulationWaveform, n: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| {
            let theta = TAU * j as f64 / n as f64;
            Complex64::from_polar(1.0, -w.phase_at_angle(theta))
        })
        .collect();
    // α_m = (1/N) Σ_j f_j e^{+2πi m j/N}
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

fn bin(coeffs: &[Complex64], m: i64) -> Complex64 {
    let n = coeffs.len() as i64;
    coeffs[m.rem_euclid(n) as usize]
}

/// Smallest `M` with `1 − Σ_{|m|≤M} |α_m|² < threshold`, searched up to `limit`.
fn tail_index(coeffs: &[Complex64], limit: usize, threshold: f64) -> Option<(usize, f64)> {
    let mut mass = bin(coeffs, 0).norm_sqr();
    if 1.0 - mass < threshold {
        return Some((0, 1.0 - mass));
    }
    for m in 1..=limit as i64 {
        mass += bin(coeffs, m).norm_sqr() + bin(coeffs, -m).norm_sqr();
        if 1.0 - mass < threshold {
            return Some((m as usize, 1.0 - mass));
        }
    }
    None
}

/// Fourier coefficients `α_m` of `e^{−iΦ(t)}`.
///
/// Uses uniform sampling over one period and an FFT. The grid is doubled
/// until the retained coefficients are stable to [`STABILITY_THRESHOLD`] and
/// the discarded tail mass is below [`TAIL_THRESHOLD`]; coefficients larger
/// than [`AMPLITUDE_FLOOR`] are never discarded.
pub fn phase_factor_spectrum(w: &ModulationWaveform) -> Result<PhaseFactorSpectrum> {
    if w.is_unmodulated() {
        return Ok(PhaseFactorSpectrum::unmodulated(w.fundamental));
    }
    // Carson-like estimate of the occupied band, in units of Ω.
    let reach = w.amplitude_bound() / w.fundamental + w.max_harmonic() as f64;
    let mut n = (8.0 * (reach + 4.0)).max(64.0).min(MAX_SAMPLES as f64) as usize;
    n = n.next_power_of_two();

    let mut planner = FftPlanner::new();
    let mut previous: Option<Vec<Complex64>> = None;
    let mut last_tail = f64::INFINITY;
    while n <= MAX_SAMPLES {
        let coeffs = dft_coefficients(w, n, &mut planner);
        if let Some((m_tail, _)) = tail_index(&coeffs, n / 4, TAIL_THRESHOLD) {
            let m_amp = (1..=(n / 4) as i64)
                .rev()
                .find(|&m| bin(&coeffs, m).norm().max(bin(&coeffs, -m).norm()) > AMPLITUDE_FLOOR)
                .unwrap_or(0) as usize;
            let m_max = m_tail.max(m_amp);
            let tail = 1.0 - (-(m_max as i64)..=m_max as i64).map(|k| bin(&coeffs, k).norm_sqr()).sum::<f64>();
            last_tail = tail;
            if let Some(prev) = &previous {
                let m = m_max as i64;
                let drift = (-m..=m)
                    .map(|k| (bin(&coeffs, k) - bin(prev, k)).norm())
                    .fold(0.0, f64::max);
                if drift < STABILITY_THRESHOLD {
                    let kept = (-m..=m).map(|k| bin(&coeffs, k)).collect();
                    return Ok(PhaseFactorSpectrum {
                        fundamental: w.fundamental,
                        m_max,
                        coefficients: kept,
                        truncation_tail: tail,
                        samples: n,
                    });
                }
            }
        }
        previous = Some(coeffs);
        n *= 2;
    }
    Err(Error::Convergence { what: "phase-factor spectrum", residual: last_tail })
}

/// `α_m` for `|m| ≤ n/4` from a single FFT of `n` samples, without the
/// adaptive refinement. Smooth in the waveform parameters, which makes it
/// the right tool inside finite-difference optimisation loops.
pub fn phase_factor_spectrum_fixed(w: &ModulationWaveform, n: usize) -> Result<PhaseFactorSpectrum> {
    if !n.is_power_of_two() || n < 8 || n > MAX_SAMPLES {
        return invalid(format!("fixed sample count must be a power of two in [8, {MAX_SAMPLES}], got {n}"));
    }
    let coeffs = dft_coefficients(w, n, &mut FftPlanner::new());
    let m = (n / 4) as i64;
    let kept: Vec<Complex64> = (-m..=m).map(|k| bin(&coeffs, k)).collect();
    let tail = 1.0 - kept.iter().map(|c| c.norm_sqr()).sum::<f64>();
    Ok(PhaseFactorSpectrum { fundamental: w.fundamental, m_max: n / 4, coefficients: kept, truncation_tail: tail, samples: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bessel_integral(n: i64, x: f64) -> f64 {
        let panels = 1 << 15;
        let h = PI / panels as f64;
        let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
        let mut s = f(0.0) + f(PI);
        for i in 1..panels {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0 / PI
    }

    fn multi() -> ModulationWaveform {
        let om = 2.0;
        ModulationWaveform::new(
            om,
            vec![
                Harmonic { k: 1, amplitude: Complex64::new(0.3, -0.2) * om },
                Harmonic { k: 2, amplitude: Complex64::new(-0.1, 0.25) * om },
                Harmonic { k: 3, amplitude: Complex64::new(0.05, 0.02) * om },
            ],
        )
        .unwrap()
    }

    #[test]
    fn sine_construction() {
        let w = make_sine(3.0, 2.0, 0.7).unwrap();
        for i in 0..50 {
            let t = 0.13 * i as f64;
            assert!((w.eval_delta(t) - 3.0 * (2.0 * t + 0.7).sin()).abs() < 1e-13);
        }
        let fig1 = make_sine(5.0, 2.5, 0.0).unwrap();
        assert!((2.0 * fig1.harmonics()[0].amplitude.norm() - 5.0).abs() < 1e-15);
        assert!(make_sine(1.0, 0.0, 0.0).is_err());
        assert!(make_sine(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let w = make_sine(0.0, TAU * 1e9, 0.0).unwrap();
        for i in 0..20 {
            let t = i as f64 * 1.7e-11;
            assert_eq!(w.eval_delta(t), 0.0);
            assert_eq!(w.accumulated_phase(t), 0.0);
        }
        let s = phase_factor_spectrum(&w).unwrap();
        assert_eq!(s.alpha(0), Complex64::new(1.0, 0.0));
        assert_eq!(s.alpha(3), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn figure_five_drive_peak() {
        // 16 GHz · sin(2π · 10 GHz · 25 ps) = 16 GHz
        let w = make_sine(hz_to_rad(16e9), hz_to_rad(10e9), 0.0).unwrap();
        assert!((rad_to_hz(w.eval_delta(25e-12)) - 16e9).abs() < 1e-3);
        assert_eq!(w.eval_delta(0.0), 0.0);
    }

    #[test]
    fn periodicity() {
        let w = multi();
        for i in 0..30 {
            let t = 0.37 * i as f64;
            let a = w.eval_delta(t);
            let b = w.eval_delta(t + w.period());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn sine_phase_closed_form() {
        let (a, om) = (3.0, 1.5);
        let w = make_sine(a, om, 0.0).unwrap();
        for i in 0..40 {
            let t = 0.21 * i as f64;
            let exact = a / om * (1.0 - (om * t).cos());
            assert!((w.accumulated_phase(t) - exact).abs() < 1e-13);
        }
        assert_eq!(w.accumulated_phase(0.0), 0.0);
    }

    #[test]
    fn accumulated_phase_vs_cumulative_trapezoid() {
        // Cumulative trapezoid at 2^16 samples per period, Richardson-combined
        // with the same rule on every other sample.
        let w = multi();
        let n = 1usize << 16;
        let h = w.period() / n as f64;
        let d: Vec<f64> = (0..=n).map(|j| w.eval_delta(j as f64 * h)).collect();
        let (mut fine, mut coarse) = (0.0, 0.0);
        let mut worst: f64 = 0.0;
        for j in 1..=n {
            fine += 0.5 * h * (d[j - 1] + d[j]);
            if j % 2 == 0 {
                coarse += h * (d[j - 2] + d[j]);
            }
            if j % 64 == 0 {
                let oracle = (4.0 * fine - coarse) / 3.0;
                worst = worst.max((oracle - w.accumulated_phase(j as f64 * h)).abs());
            }
        }
        assert!(worst < 1e-9, "worst {worst:e}");
    }

    #[test]
    fn bessel_law_for_sine() {
        for &ratio in &[0.5, 1.0, 2.0, 5.0] {
            let om = 1.3;
            let s = phase_factor_spectrum(&make_sine(ratio * om, om, 0.0).unwrap()).unwrap();
            for m in -12..=12 {
                let d = (s.alpha(m).norm() - bessel_integral(m, ratio).abs()).abs();
                assert!(d < 1e-8, "A/Ω={ratio} m={m} diff={d:e}");
            }
        }
        // |α₀|² = J₀(2)² ≈ 0.0501
        let s = phase_factor_spectrum(&make_sine(2.0, 1.0, 0.0).unwrap()).unwrap();
        assert!((s.weight(0) - bessel_integral(0, 2.0).powi(2)).abs() < 1e-12);
        assert!((s.weight(0) - 0.0501).abs() < 1e-4);
    }

    #[test]
    fn parseval_and_tail() {
        let s = phase_factor_spectrum(&multi()).unwrap();
        assert!((s.total_weight() - 1.0).abs() < 1e-9);
        assert!(s.truncation_tail() <= TAIL_THRESHOLD);
    }

    #[test]
    fn cosine_drive_is_symmetric() {
        let s = phase_factor_spectrum(&make_sine(3.0, 1.0, PI / 2.0).unwrap()).unwrap();
        for m in 1..=10 {
            assert!((s.alpha(m).norm() - s.alpha(-m).norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_preserves_spectrum() {
        let w = multi();
        let a = phase_factor_spectrum(&w).unwrap();
        for &kappa in &[0.5, 1.0, 2.0, 7.3] {
            let b = phase_factor_spectrum(&w.scaled(kappa).unwrap()).unwrap();
            for m in -15..=15 {
                assert!((a.alpha(m) - b.alpha(m)).norm() < 1e-9);
            }
        }
        assert_eq!(w.scaled(1.0).unwrap(), w);
        assert!(w.scaled(0.0).is_err());
    }

    #[test]
    fn rejects_bad_harmonics() {
        let h = |k| Harmonic { k, amplitude: Complex64::new(1.0, 0.0) };
        assert!(ModulationWaveform::new(1.0, vec![h(0)]).is_err());
        assert!(ModulationWaveform::new(1.0, vec![h(2), h(2)]).is_err());
        assert!(ModulationWaveform::new(f64::NAN, vec![h(1)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = multi();
        let back = ModulationWaveform::from_json(&w.to_json()).unwrap();
        assert_eq!(back.harmonics().len(), 3);
        for (a, b) in w.harmonics().iter().zip(back.harmonics()) {
            assert!((a.amplitude - b.amplitude).norm() < 1e-12);
        }
        let parsed: serde_json::Value = serde_json::from_str(&w.to_json()).unwrap();
        assert!(parsed["omega_hz"].is_number());
        assert!(parsed["harmonics"][0]["re_hz"].is_number());
    }
}
