//! Inverse design of the modulation for a target sideband distribution.
//!
//! The free parameters are the real and imaginary parts of `c_k/Ω` for
//! `k = 1..=K`. The cost compares `|α_p|` with the target magnitudes over
//! the target support and penalises the weight that leaks outside it.

pub mod bfgs;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::par;
use crate::units::{hz_to_rad, rad_to_hz};
use crate::waveform::{
    phase_factor_spectrum, phase_factor_spectrum_fixed, Harmonic, ModulationWaveform, PhaseFactorSpectrum, WaveformFile,
};
use crate::Complex64;
use bfgs::{minimize, BfgsOptions};

/// Default hardware bandwidth cap, 6 GHz.
pub const DEFAULT_BANDWIDTH_CAP: f64 = std::f64::consts::TAU * 6e9;

/// How target weights are compared with `|α_p|²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// Weights fix the shape inside the support: the target for `|α_p|` is
    /// `√(ŵ_p η)` with `ŵ` the normalised weights and `η` the achieved
    /// in-support weight.
    #[default]
    Relative,
    /// Weights are absolute values of `|α_p|²`.
    Absolute,
}

/// Desired sideband weights and optional phases `arg α_p`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpectralTarget {
    pub weights: BTreeMap<i64, f64>,
    pub phases: BTreeMap<i64, f64>,
}

/// On-disk target: `{"omega_hz": f, "weights": {"p": w}, "phases": {"p": rad}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub omega_hz: f64,
    pub weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<BTreeMap<String, f64>>,
}

fn parse_index_map(map: &BTreeMap<String, f64>, what: &str) -> Result<BTreeMap<i64, f64>> {
    map.iter()
        .map(|(k, v)| match k.trim().parse::<i64>() {
            Ok(p) => Ok((p, *v)),
            Err(_) => invalid(format!("{what} key {k:?} is not an integer sideband index")),
        })
        .collect()
}

impl SpectralTarget {
    pub fn new(weights: BTreeMap<i64, f64>) -> Result<Self> {
        let t = Self { weights, phases: BTreeMap::new() };
        t.validate()?;
        Ok(t)
    }

    /// Equal weights `1/n` on the given sidebands.
    pub fn equal(indices: &[i64]) -> Result<Self> {
        let w = 1.0 / indices.len().max(1) as f64;
        Self::new(indices.iter().map(|&p| (p, w)).collect())
    }

    pub fn with_phases(mut self, phases: BTreeMap<i64, f64>) -> Result<Self> {
        self.phases = phases;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return invalid("target has no sidebands");
        }
        if self.weights.values().any(|&w| !(w.is_finite() && w >= 0.0)) {
            return invalid("target weights must be finite and non-negative");
        }
        let total: f64 = self.weights.values().sum();
        if !(total > 0.0) || total > 1.0 + 1e-9 {
            return invalid(format!("target weights must sum to a value in (0, 1], got {total}"));
        }
        if let Some(p) = self.phases.keys().find(|p| !self.weights.contains_key(p)) {
            return invalid(format!("phase given for sideband {p} outside the target support"));
        }
        Ok(())
    }

    pub fn max_index(&self) -> i64 {
        self.weights.keys().map(|p| p.abs()).max().unwrap_or(0)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Parse a target file, returning the target and its fundamental (rad/s).
    pub fn from_file_repr(file: &TargetFile) -> Result<(Self, f64)> {
        let weights = parse_index_map(&file.weights, "weight")?;
        let phases = match &file.phases {
            Some(p) => parse_index_map(p, "phase")?,
            None => BTreeMap::new(),
        };
        let t = Self { weights, phases };
        t.validate()?;
        if !(file.omega_hz > 0.0) {
            return invalid("target omega_hz must be positive");
        }
        Ok((t, hz_to_rad(file.omega_hz)))
    }

    pub fn to_file_repr(&self, fundamental: f64) -> TargetFile {
        let m = |x: &BTreeMap<i64, f64>| x.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        TargetFile {
            omega_hz: rad_to_hz(fundamental),
            weights: m(&self.weights),
            phases: if self.phases.is_empty() { None } else { Some(m(&self.phases)) },
        }
    }

    pub fn from_json(text: &str) -> Result<(Self, f64)> {
        let file: TargetFile = serde_json::from_str(text)
            .map_err(|e| crate::Error::InvalidParameter(format!("target JSON: {e}")))?;
        Self::from_file_repr(&file)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Ω (rad/s).
    pub fundamental: f64,
    /// Number of harmonics K; the drive bandwidth is `KΩ`.
    pub max_harmonic: u32,
    pub restarts: usize,
    pub seed: u64,
    /// Relative central-difference step.
    pub gradient_step: f64,
    /// Per-iteration cost decrease below which a restart counts as converged.
    pub cost_tolerance: f64,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// Weight λ of the leakage term `1 − Σ_{p∈S} |α_p|²`.
    pub leakage_weight: f64,
    pub mode: TargetMode,
    /// Upper bound on `KΩ` and on `|p|Ω` for target sidebands (rad/s).
    pub bandwidth_cap: f64,
    /// FFT size used inside the optimisation loop.
    pub samples: usize,
}

impl OptimizerConfig {
    pub fn new(fundamental: f64, max_harmonic: u32) -> Self {
        Self {
            fundamental,
            max_harmonic,
            restarts: 20,
            seed: 0,
            gradient_step: 1e-6,
            cost_tolerance: 1e-14,
            gradient_tolerance: 1e-9,
            max_iterations: 1000,
            leakage_weight: 1e-3,
            mode: TargetMode::Relative,
            bandwidth_cap: DEFAULT_BANDWIDTH_CAP,
            samples: 512,
        }
    }

    /// Largest K that fits the bandwidth cap at this fundamental.
    pub fn max_harmonics_within_cap(fundamental: f64, cap: f64) -> u32 {
        ((cap / fundamental) * (1.0 + 1e-12)).floor() as u32
    }

    pub fn validate(&self, target: &SpectralTarget) -> Result<()> {
        if !(self.fundamental > 0.0) {
            return invalid("optimizer fundamental must be positive");
        }
        if self.max_harmonic == 0 {
            return invalid("optimizer needs at least one harmonic");
        }
        let slack = 1.0 + 1e-12;
        if self.max_harmonic as f64 * self.fundamental > self.bandwidth_cap * slack {
            return invalid(format!(
                "{} harmonics of {:.4e} Hz exceed the bandwidth cap of {:.4e} Hz",
                self.max_harmonic,
                rad_to_hz(self.fundamental),
                rad_to_hz(self.bandwidth_cap)
            ));
        }
        if target.max_index() as f64 * self.fundamental > self.bandwidth_cap * slack {
            return invalid("target sidebands lie outside the bandwidth cap");
        }
        if self.restarts == 0 {
            return invalid("need at least one restart");
        }
        if !self.samples.is_power_of_two() || self.samples < 16 {
            return invalid("optimizer sample count must be a power of two ≥ 16");
        }
        if !(self.leakage_weight >= 0.0 && self.gradient_step > 0.0) {
            return invalid("leakage weight must be non-negative and gradient step positive");
        }
        target.validate()
    }
}

/// Waveform with `c_k = Ω(x_{2k−2} + i x_{2k−1})`.
pub fn waveform_from_params(fundamental: f64, params: &[f64]) -> Result<ModulationWaveform> {
    if params.len() % 2 != 0 {
        return invalid("parameter vector must hold (re, im) pairs");
    }
    let harmonics = params
        .chunks(2)
        .enumerate()
        .map(|(i, c)| Harmonic { k: i as u32 + 1, amplitude: Complex64::new(c[0], c[1]) * fundamental })
        .collect();
    ModulationWaveform::new(fundamental, harmonics)
}

/// Inverse of [`waveform_from_params`] for harmonics `1..=k_max`.
pub fn params_from_waveform(w: &ModulationWaveform, k_max: u32) -> Vec<f64> {
    let mut x = vec![0.0; 2 * k_max as usize];
    for h in w.harmonics() {
        if h.k <= k_max {
            let i = 2 * (h.k as usize - 1);
            x[i] = h.amplitude.re / w.fundamental();
            x[i + 1] = h.amplitude.im / w.fundamental();
        }
    }
    x
}

/// Cost of a given spectrum against the target.
pub fn spectrum_cost(a: &PhaseFactorSpectrum, target: &SpectralTarget, mode: TargetMode, leakage_weight: f64) -> f64 {
    let eta: f64 = target.weights.keys().map(|&p| a.weight(p)).sum();
    let total = target.total_weight();
    let mut mse = 0.0;
    for (&p, &w) in &target.weights {
        let goal = match mode {
            TargetMode::Relative => (w / total * eta).sqrt(),
            TargetMode::Absolute => w.sqrt(),
        };
        let alpha = a.alpha(p);
        mse += match target.phases.get(&p) {
            Some(&phi) => (alpha - Complex64::from_polar(goal, phi)).norm_sqr(),
            None => (alpha.norm() - goal).powi(2),
        };
    }
    mse / target.weights.len() as f64 + leakage_weight * (1.0 - eta).max(0.0)
}

/// Cost of the parameter vector (fixed-size FFT, as used by the optimiser).
pub fn cost(params: &[f64], target: &SpectralTarget, cfg: &OptimizerConfig) -> f64 {
    match waveform_from_params(cfg.fundamental, params).and_then(|w| phase_factor_spectrum_fixed(&w, cfg.samples)) {
        Ok(a) => spectrum_cost(&a, target, cfg.mode, cfg.leakage_weight),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub waveform: ModulationWaveform,
    /// Adaptive spectrum of the returned waveform.
    pub spectrum: PhaseFactorSpectrum,
    /// Best restart cost; the minimum over `restarts`.
    pub cost: f64,
    pub converged: bool,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
}

impl OptimizationResult {
    /// Achieved `|α_p|²` on the target support.
    pub fn achieved_weights(&self, target: &SpectralTarget) -> BTreeMap<i64, f64> {
        target.weights.keys().map(|&p| (p, self.spectrum.weight(p))).collect()
    }

    /// Weight outside the target support.
    pub fn leakage(&self, target: &SpectralTarget) -> f64 {
        1.0 - target.weights.keys().map(|&p| self.spectrum.weight(p)).sum::<f64>()
    }

    pub fn report(&self, target: &SpectralTarget) -> OptimizationReport {
        OptimizationReport {
            waveform: self.waveform.to_file_repr(),
            cost: self.cost,
            converged: self.converged,
            best_restart: self.best_restart,
            leakage: self.leakage(target),
            achieved: self
                .spectrum
                .iter()
                .filter(|(_, a)| a.norm_sqr() > 1e-12)
                .map(|(p, a)| SidebandEntry { p, weight: a.norm_sqr(), re: a.re, im: a.im })
                .collect(),
            restart_costs: self.restarts.iter().map(|r| r.cost).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandEntry {
    pub p: i64,
    pub weight: f64,
    pub re: f64,
    pub im: f64,
}

/// Serialisable summary of an optimisation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub waveform: WaveformFile,
    pub cost: f64,
    pub converged: bool,
    pub best_restart: usize,
    pub leakage: f64,
    pub achieved: Vec<SidebandEntry>,
    pub restart_costs: Vec<f64>,
}

/// Initial point of restart `index`: each `c_k` uniform in the disk
/// `|c_k| ≤ Ω`, from a ChaCha stream keyed by `(seed, index)`.
pub fn initial_params(cfg: &OptimizerConfig, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let mut x = Vec::with_capacity(2 * cfg.max_harmonic as usize);
    for _ in 0..cfg.max_harmonic {
        let r = rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        x.push(r * theta.cos());
        x.push(r * theta.sin());
    }
    x
}

/// Multi-start BFGS over the harmonic coefficients.
///
/// Restarts run independently (in parallel when enabled); the best one is
/// selected by `(cost, restart index)`, so the result does not depend on
/// scheduling.
pub fn optimize_waveform(target: &SpectralTarget, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate(target)?;
    let opts = BfgsOptions {
        max_iterations: cfg.max_iterations,
        gradient_tolerance: cfg.gradient_tolerance,
        cost_tolerance: cfg.cost_tolerance,
        gradient_step: cfg.gradient_step,
        ..Default::default()
    };
    let f = |x: &[f64]| cost(x, target, cfg);
    let restarts: Vec<RestartSummary> = par::map_indexed(cfg.restarts, |i| {
        let r = minimize(&f, &initial_params(cfg, i), &opts);
        RestartSummary { index: i, cost: r.f, iterations: r.iterations, converged: r.converged, params: r.x }
    });
    let best = restarts
        .iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost).then(a.index.cmp(&b.index)))
        .expect("at least one restart");
    let waveform = waveform_from_params(cfg.fundamental, &best.params)?;
    let spectrum = phase_factor_spectrum(&waveform)?;
    Ok(OptimizationResult {
        waveform,
        spectrum,
        cost: best.cost,
        converged: best.converged,
        best_restart: best.index,
        restarts,
    })
}

/// `Ω → κΩ`, `c_k → κc_k`; leaves `α_m` unchanged.
pub fn scale_waveform(w: &ModulationWaveform, kappa: f64) -> Result<ModulationWaveform> {
    w.scaled(kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: u32) -> OptimizerConfig {
        OptimizerConfig { restarts: 4, ..OptimizerConfig::new(std::f64::consts::TAU * 1.5e9, k) }
    }

    #[test]
    fn single_color_costs_nothing_unmodulated() {
        let t = SpectralTarget::new([(0, 1.0)].into()).unwrap();
        for mode in [TargetMode::Relative, TargetMode::Absolute] {
            let c = OptimizerConfig { mode, ..cfg(2) };
            assert_eq!(cost(&[0.0; 4], &t, &c), 0.0);
        }
    }

    #[test]
    fn two_color_target_penalises_flat_drive() {
        let t = SpectralTarget::equal(&[0, 1]).unwrap();
        // |α₀| = 1, |α₁| = 0 against √0.5 each
        let expected = ((1.0 - 0.5f64.sqrt()).powi(2) + 0.5) / 2.0;
        let c = OptimizerConfig { mode: TargetMode::Absolute, ..cfg(2) };
        assert!((cost(&[0.0; 4], &t, &c) - expected).abs() < 1e-12);
        assert!(cost(&[0.0; 4], &t, &cfg(2)) > 0.0);
    }

    #[test]
    fn single_color_optimum_is_flat() {
        let t = SpectralTarget::new([(0, 1.0)].into()).unwrap();
        let r = optimize_waveform(&t, &cfg(2)).unwrap();
        assert!(r.cost < 1e-12, "{}", r.cost);
        assert!(r.waveform.amplitude_bound() / r.waveform.fundamental() < 1e-5);
    }

    #[test]
    fn reported_cost_is_min_over_restarts() {
        let t = SpectralTarget::equal(&[0, 1]).unwrap();
        let r = optimize_waveform(&t, &OptimizerConfig { max_iterations: 30, ..cfg(2) }).unwrap();
        for s in &r.restarts {
            assert!(r.cost <= s.cost);
            assert_eq!(s.cost, cost(&s.params, &t, &cfg(2)));
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let t = SpectralTarget::equal(&[-1, 1]).unwrap();
        let c = OptimizerConfig { max_iterations: 40, ..cfg(2) };
        let a = optimize_waveform(&t, &c).unwrap();
        let b = optimize_waveform(&t, &c).unwrap();
        assert_eq!(a.restarts, b.restarts);
        assert_ne!(initial_params(&c, 0), initial_params(&c, 1));
        assert!(initial_params(&c, 3).chunks(2).all(|p| p[0].hypot(p[1]) <= 1.0));
    }

    #[test]
    fn bandwidth_cap_enforced() {
        let t = SpectralTarget::equal(&[0, 1]).unwrap();
        assert!(optimize_waveform(&t, &cfg(5)).is_err());
        assert_eq!(OptimizerConfig::max_harmonics_within_cap(std::f64::consts::TAU * 1.5e9, DEFAULT_BANDWIDTH_CAP), 4);
        let far = SpectralTarget::equal(&[0, 5]).unwrap();
        assert!(optimize_waveform(&far, &cfg(2)).is_err());
    }

    #[test]
    fn target_validation_and_json() {
        assert!(SpectralTarget::new([(0, 0.7), (1, 0.7)].into()).is_err());
        assert!(SpectralTarget::new(BTreeMap::new()).is_err());
        let (t, om) = SpectralTarget::from_json(r#"{"omega_hz": 1.5e9, "weights": {"0": 0.5, "-1": 0.5}, "phases": {"0": 0.3}}"#).unwrap();
        assert_eq!(t.weights[&-1], 0.5);
        assert_eq!(t.phases[&0], 0.3);
        assert!((om - std::f64::consts::TAU * 1.5e9).abs() < 1e-3);
        let back = serde_json::to_string(&t.to_file_repr(om)).unwrap();
        assert_eq!(SpectralTarget::from_json(&back).unwrap().0, t);
        assert!(SpectralTarget::from_json(r#"{"omega_hz": 1e9, "weights": {"x": 1.0}}"#).is_err());
    }

    #[test]
    fn phase_targets_enter_cost() {
        let t = SpectralTarget::new([(0, 1.0)].into()).unwrap().with_phases([(0, std::f64::consts::PI)].into()).unwrap();
        // α₀ = 1 against e^{iπ}: |1 − (−1)|² = 4
        assert!((cost(&[0.0; 2], &t, &cfg(1)) - 4.0).abs() < 1e-12);
    }
}
