//! Two-time intensity correlations under weak CW excitation.
//!
//! `G(t, τ) = ⟨σ†(t)σ†(t+τ)σ(t+τ)σ(t)⟩` follows from the quantum regression
//! theorem: after a photon is detected at `t` the emitter is in its ground
//! state, so `G(t, τ) = ρ_ee(t) · P_e(t + τ | ground at t)` with `ρ(t)` the
//! periodic steady state.

use serde::{Deserialize, Serialize};

use crate::dynamics::{periodic_steady_state, DensityMatrix2, DriveSpec, PeriodicSteadyState, PropagationOptions, Propagator, RabiEnvelope};
use crate::error::{invalid, Error, Result};
use crate::par;
use crate::scattering::{transmission, EmitterParams};
use crate::waveform::phase_factor_spectrum;

/// Largest CW drive `ε = Ω_R/2` accepted, in units of γ.
pub const WEAK_DRIVE_LIMIT: f64 = 1e-2;
/// Default weak drive `ε/γ`.
pub const DEFAULT_WEAK_DRIVE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationOptions {
    /// Uniform `t` samples over one modulation period.
    pub t_samples: usize,
    /// Recompute at `ε/2` and require agreement within `weak_drive_tolerance`.
    pub verify_weak_drive: bool,
    pub weak_drive_tolerance: f64,
    pub propagation: PropagationOptions,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self { t_samples: 64, verify_weak_drive: true, weak_drive_tolerance: 1e-3, propagation: PropagationOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub t_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// `values[i][j] = G(t_i, τ_j)`.
    pub values: Vec<Vec<f64>>,
    /// `ρ_ee(t_i)` of the periodic steady state.
    pub population: Vec<f64>,
}

impl CorrelationMap {
    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, &v| m.max(v))
    }

    pub fn mean_population(&self) -> f64 {
        self.population.iter().sum::<f64>() / self.population.len() as f64
    }

    /// `⟨G(t, τ)⟩_t` for every τ.
    pub fn t_average(&self) -> Vec<f64> {
        let n = self.t_grid.len() as f64;
        (0..self.tau_grid.len()).map(|j| self.values.iter().map(|row| row[j]).sum::<f64>() / n).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Curve {
    pub tau_grid: Vec<f64>,
    /// `⟨G⟩_t / ⟨ρ_ee⟩_t²`.
    pub g2: Vec<f64>,
    /// `⟨G⟩_t (γ_iγ_o/ε²)² / T(ω₀ + δ_L)²` with `T` from the scattering
    /// amplitudes. Equal to `g2` in the weak-drive limit.
    pub g2_transmission_normalized: Vec<f64>,
    pub mean_population: f64,
    pub transmission: f64,
    pub epsilon: f64,
    /// Largest relative change of `g2` when the drive is halved, if checked.
    pub weak_drive_deviation: Option<f64>,
}

fn weak_epsilon(drive: &DriveSpec, gamma: f64) -> Result<f64> {
    let eps = match drive.envelope {
        RabiEnvelope::Constant(r) if r > 0.0 => 0.5 * r,
        _ => return invalid("correlations need a CW drive with positive Rabi frequency"),
    };
    let limit = WEAK_DRIVE_LIMIT * gamma;
    if eps > limit {
        return Err(Error::WeakDrive { epsilon: eps, limit });
    }
    Ok(eps)
}

/// Absolute tolerance scaled to the excited population `~4ε²/γ²`, so the
/// tiny weak-drive populations are resolved to the requested relative error.
fn scaled_options(opts: &PropagationOptions, eps: f64, gamma: f64) -> PropagationOptions {
    let scale = (4.0 * eps * eps / (gamma * gamma)).min(1.0);
    opts.with_atol(opts.atol * scale)
}

fn check_tau_grid(tau_grid: &[f64]) -> Result<()> {
    if tau_grid.is_empty() {
        return invalid("tau grid is empty");
    }
    if tau_grid[0] < 0.0 || tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return invalid("tau grid must be non-negative and sorted");
    }
    Ok(())
}

fn regression_rows(
    drive: &DriveSpec,
    gamma: f64,
    ss: &PeriodicSteadyState,
    tau_grid: &[f64],
    opts: &PropagationOptions,
) -> Result<Vec<Vec<f64>>> {
    let prop = Propagator::new(drive, gamma, *opts)?;
    let tau_max = tau_grid[tau_grid.len() - 1];
    par::try_map_indexed(ss.samples.len(), |i| {
        let t = ss.samples.times[i];
        let rho_ee = ss.samples.states[i].rho_ee;
        let times: Vec<f64> = tau_grid.iter().map(|tau| t + tau).collect();
        let cond = if tau_max > 0.0 {
            prop.sample(&DensityMatrix2::ground(), t, t + tau_max, &times)?
        } else {
            let mut tr = crate::dynamics::Trajectory::default();
            tr.times = times.clone();
            tr.states = vec![DensityMatrix2::ground(); times.len()];
            tr.emitted = vec![0.0; times.len()];
            tr
        };
        Ok(tau_grid
            .iter()
            .zip(&cond.states)
            .map(|(&tau, s)| if tau == 0.0 { 0.0 } else { rho_ee * s.rho_ee })
            .collect())
    })
}

fn map_at(drive: &DriveSpec, gamma: f64, tau_grid: &[f64], opts: &CorrelationOptions) -> Result<CorrelationMap> {
    let eps = weak_epsilon(drive, gamma)?;
    check_tau_grid(tau_grid)?;
    let popts = scaled_options(&opts.propagation, eps, gamma);
    let ss = periodic_steady_state(drive, gamma, opts.t_samples, &popts)?;
    let values = regression_rows(drive, gamma, &ss, tau_grid, &popts)?;
    Ok(CorrelationMap {
        t_grid: ss.samples.times.clone(),
        tau_grid: tau_grid.to_vec(),
        values,
        population: ss.samples.populations(),
    })
}

/// `G(t, τ)` over one modulation period of `t` (`opts.t_samples` uniform
/// points) and the given `τ` grid.
///
/// `drive` must be CW with `ε = Ω_R/2 ≤ 10⁻²γ`.
pub fn correlation_map(drive: &DriveSpec, gamma: f64, tau_grid: &[f64], opts: &CorrelationOptions) -> Result<CorrelationMap> {
    map_at(drive, gamma, tau_grid, opts)
}

fn g2_from_map(map: &CorrelationMap) -> Vec<f64> {
    let norm = map.mean_population().powi(2);
    map.t_average().into_iter().map(|g| g / norm).collect()
}

/// Period-averaged `g²(τ)`.
///
/// With `opts.verify_weak_drive` the curve is recomputed at half the drive;
/// a relative change above `opts.weak_drive_tolerance` (measured against
/// `max(g², 1)`) is reported as [`Error::WeakDriveSensitivity`].
pub fn g2_curve(e: &EmitterParams, drive: &DriveSpec, tau_grid: &[f64], opts: &CorrelationOptions) -> Result<G2Curve> {
    if (e.gamma - (e.gamma_in + e.gamma_out)).abs() > 1e-12 * e.gamma {
        return invalid("emitter couplings do not add up to the decay rate");
    }
    let gamma = e.gamma;
    let map = map_at(drive, gamma, tau_grid, opts)?;
    let eps = weak_epsilon(drive, gamma)?;
    let g2 = g2_from_map(&map);

    let mut deviation = None;
    if opts.verify_weak_drive {
        let mut half = drive.clone();
        half.envelope = RabiEnvelope::Constant(eps);
        let g2_half = g2_from_map(&map_at(&half, gamma, tau_grid, opts)?);
        let dev = g2.iter().zip(&g2_half).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max);
        if dev > opts.weak_drive_tolerance {
            return Err(Error::WeakDriveSensitivity { deviation: dev });
        }
        deviation = Some(dev);
    }

    let alpha = phase_factor_spectrum(&drive.waveform)?;
    let t = transmission(e, &alpha, e.omega0 + drive.laser_detuning, 0).value;
    let scale = (e.gamma_in * e.gamma_out / (eps * eps)).powi(2) / (t * t);
    let g2_t = map.t_average().into_iter().map(|g| g * scale).collect();

    Ok(G2Curve {
        tau_grid: tau_grid.to_vec(),
        g2,
        g2_transmission_normalized: g2_t,
        mean_population: map.mean_population(),
        transmission: t,
        epsilon: eps,
        weak_drive_deviation: deviation,
    })
}

/// `g²` folded modulo one modulation period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldedG2 {
    pub period: f64,
    /// Bin centres `kT/bins`.
    pub tau_mod: Vec<f64>,
    pub g2_folded: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Average `g²(τ)` over all periods after `settle_time`, binning `τ mod T`
/// to the nearest of `bins` uniformly spaced phases.
///
/// Requires at least 20 periods of data past `settle_time` and every bin hit.
pub fn g2_period_average(curve: &G2Curve, omega: f64, settle_time: f64, bins: usize) -> Result<FoldedG2> {
    if !(omega > 0.0) || bins == 0 {
        return invalid("folding needs a positive frequency and at least one bin");
    }
    let period = std::f64::consts::TAU / omega;
    let last = curve.tau_grid.last().copied().unwrap_or(0.0);
    if last - settle_time < 20.0 * period {
        return Err(Error::InsufficientSpan(format!(
            "tau grid covers {:.3} periods after the settle time, need 20",
            (last - settle_time) / period
        )));
    }
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for (&tau, &g) in curve.tau_grid.iter().zip(&curve.g2) {
        if tau < settle_time {
            continue;
        }
        let phase = (tau / period).rem_euclid(1.0) * bins as f64;
        let b = (phase.round() as usize) % bins;
        sums[b] += g;
        counts[b] += 1;
    }
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InsufficientSpan(format!("fold bin {k} received no samples")));
    }
    Ok(FoldedG2 {
        period,
        tau_mod: (0..bins).map(|k| period * k as f64 / bins as f64).collect(),
        g2_folded: sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect(),
        counts,
    })
}

/// `max |g²(τ + T) − g²(τ)|` over grid points with `τ ≥ from`, for a grid
/// with exactly `samples_per_period` uniform points per period `T`.
pub fn period_residual(curve: &G2Curve, samples_per_period: usize, from: f64) -> f64 {
    let g = &curve.g2;
    (0..g.len().saturating_sub(samples_per_period))
        .filter(|&j| curve.tau_grid[j] >= from)
        .map(|j| (g[j + samples_per_period] - g[j]).abs())
        .fold(0.0, f64::max)
}

/// Weak-drive resonance-fluorescence result `(1 − e^{−γτ/2})²`.
pub fn unmodulated_g2(gamma: f64, tau: f64) -> f64 {
    let x = 1.0 - (-0.5 * gamma * tau).exp();
    x * x
}
