//! Ramsey interference under sinusoidal modulation.
//!
//! Two instantaneous π/2 pulses separated by `t_d` with the free precession
//! phase `ω_ref t_d + Φ(t_c + t_d) − Φ(t_c)`. The modulation phase at the
//! first pulse is free-running, so fringes are averaged over it, giving
//! `P_e = ½ + ½ cos(ω_ref t_d) J₀(2(A/Ω) sin(Ωt_d/2))`. Decay during the delay
//! is neglected.

use serde::{Deserialize, Serialize};

use std::f64::consts::TAU;

use crate::error::{invalid, Result};
use crate::par;
use crate::special::bessel_j0;
use crate::waveform::{make_sine, ModulationWaveform};
use crate::Complex64;

/// Smallest phase grid accepted by [`ramsey_simulated`].
pub const MIN_PHASES: usize = 256;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Argument `2(A/Ω) sin(Ωt_d/2)` of the contrast envelope, continuous at Ω = 0.
pub fn envelope_argument(amplitude: f64, omega: f64, t_delay: f64) -> f64 {
    amplitude * t_delay * sinc(0.5 * omega * t_delay)
}

/// Fringe contrast `|J₀(2(A/Ω) sin(Ωt_d/2))|`.
pub fn contrast(amplitude: f64, omega: f64, t_delay: f64) -> f64 {
    bessel_j0(envelope_argument(amplitude, omega, t_delay)).abs()
}

/// Phase-averaged excited population.
pub fn ramsey_analytic(omega_ref: f64, amplitude: f64, omega: f64, t_delay: f64) -> f64 {
    0.5 + 0.5 * (omega_ref * t_delay).cos() * bessel_j0(envelope_argument(amplitude, omega, t_delay))
}

/// Excited population after `π/2 – precess(θ) – π/2` for a single shot.
fn single_shot(theta: f64) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let minus_i = Complex64::new(0.0, -1.0);
    // R_x(π/2) = [[1, −i], [−i, 1]]/√2 applied to |g⟩.
    let (g, e) = (Complex64::new(h, 0.0), minus_i * h);
    let e = e * Complex64::from_polar(1.0, -theta);
    let e_out = (minus_i * g + e) * h;
    e_out.norm_sqr()
}

/// Deterministic average over `n_phases` uniformly spaced modulation phases,
/// each simulated as explicit rotations with the exact accumulated phase.
pub fn ramsey_simulated(w: &ModulationWaveform, omega_ref: f64, t_delay: f64, n_phases: usize) -> Result<f64> {
    if n_phases < MIN_PHASES {
        return invalid(format!("need at least {MIN_PHASES} modulation phases, got {n_phases}"));
    }
    let period = w.period();
    let sum: f64 = (0..n_phases)
        .map(|j| {
            let tc = period * j as f64 / n_phases as f64;
            let theta = omega_ref * t_delay + w.accumulated_phase(tc + t_delay) - w.accumulated_phase(tc);
            single_shot(theta)
        })
        .sum();
    Ok(sum / n_phases as f64)
}

/// [`ramsey_simulated`] for `Δ(t) = A sin(Ωt)`. At Ω = 0 the modulation is
/// frozen for the whole delay, `Δ = A sin ψ`, and ψ is averaged instead.
pub fn ramsey_simulated_sine(omega_ref: f64, amplitude: f64, omega: f64, t_delay: f64, n_phases: usize) -> Result<f64> {
    if omega == 0.0 {
        if n_phases < MIN_PHASES {
            return invalid(format!("need at least {MIN_PHASES} modulation phases, got {n_phases}"));
        }
        let sum: f64 = (0..n_phases)
            .map(|j| single_shot(omega_ref * t_delay + amplitude * t_delay * (TAU * j as f64 / n_phases as f64).sin()))
            .sum();
        return Ok(sum / n_phases as f64);
    }
    ramsey_simulated(&make_sine(amplitude, omega, 0.0)?, omega_ref, t_delay, n_phases)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseySweepConfig {
    /// Fringe frequency ω_ref (rad/s).
    pub omega_ref: f64,
    /// Points per fine-delay window of one fringe period around `t_delay`.
    pub fringe_samples: usize,
    pub n_phases: usize,
    /// Grid points that also get a simulated cross-check.
    pub cross_checks: usize,
}

impl Default for RamseySweepConfig {
    fn default() -> Self {
        Self { omega_ref: 2.0 * std::f64::consts::PI * 50e9, fringe_samples: 64, n_phases: 4096, cross_checks: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub omega: f64,
    pub analytic: f64,
    pub simulated: f64,
}

/// Contrast versus modulation frequency at fixed amplitude and delay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyResult {
    pub amplitude: f64,
    pub t_delay: f64,
    pub omega_grid: Vec<f64>,
    pub contrast: Vec<f64>,
    /// Extremes of the fine-delay fringe window around `t_delay`.
    pub p_e_min: Vec<f64>,
    pub p_e_max: Vec<f64>,
    pub cross_checks: Vec<CrossCheck>,
}

/// Sweep Ω over `omega_grid` (non-negative; 0 means unmodulated).
pub fn contrast_sweep(amplitude: f64, t_delay: f64, omega_grid: &[f64], cfg: &RamseySweepConfig) -> Result<RamseyResult> {
    if omega_grid.iter().any(|&o| !(o >= 0.0)) {
        return invalid("modulation frequencies must be non-negative");
    }
    if !(t_delay > 0.0) || cfg.fringe_samples < 2 || !(cfg.omega_ref > 0.0) {
        return invalid("Ramsey sweep needs positive delay, fringe frequency and at least two fringe samples");
    }
    let fringe_period = std::f64::consts::TAU / cfg.omega_ref;
    let window: Vec<(f64, f64)> = par::map_indexed(omega_grid.len(), |i| {
        let om = omega_grid[i];
        (0..cfg.fringe_samples)
            .map(|j| {
                let t = t_delay + fringe_period * (j as f64 / cfg.fringe_samples as f64 - 0.5);
                ramsey_analytic(cfg.omega_ref, amplitude, om, t)
            })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)))
    });
    let n = omega_grid.len();
    let picks: Vec<usize> = match (cfg.cross_checks, n) {
        (0, _) | (_, 0) => Vec::new(),
        (1, _) | (_, 1) => vec![0],
        (k, _) => {
            let mut v: Vec<usize> = (0..k).map(|j| j * (n - 1) / (k - 1)).collect();
            v.dedup();
            v
        }
    };
    let cross_checks = par::try_map_indexed(picks.len(), |j| {
        let om = omega_grid[picks[j]];
        let simulated = ramsey_simulated_sine(cfg.omega_ref, amplitude, om, t_delay, cfg.n_phases)?;
        Ok(CrossCheck { omega: om, analytic: ramsey_analytic(cfg.omega_ref, amplitude, om, t_delay), simulated })
    })?;
    Ok(RamseyResult {
        amplitude,
        t_delay,
        omega_grid: omega_grid.to_vec(),
        contrast: omega_grid.iter().map(|&om| contrast(amplitude, om, t_delay)).collect(),
        p_e_min: window.iter().map(|w| w.0).collect(),
        p_e_max: window.iter().map(|w| w.1).collect(),
        cross_checks,
    })
}
