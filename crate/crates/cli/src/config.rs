//! Run configuration.
//!
//! Configs are TOML. Every physical quantity carries its unit in the field
//! name: `_hz` for ordinary frequency, `_s` for time, `_rad` for angles and
//! `_per_s` for the decay rate. Frequencies may instead be written in units of
//! the emitter linewidth with `_gamma` (a multiple of γ, angular) and times
//! with `_per_gamma` (a multiple of 1/γ). Exactly one of the two spellings
//! may be given for a quantity.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use floquet_core::units::hz_to_rad;
use floquet_core::waveform::HarmonicFile;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Spectrum,
    Transmission,
    Map,
    G2,
    Optimize,
    Pulsed,
    Ramsey,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Transmission => "transmission",
            Task::Map => "map",
            Task::G2 => "g2",
            Task::Optimize => "optimize",
            Task::Pulsed => "pulsed",
            Task::Ramsey => "ramsey",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub emitter: EmitterSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveform: Option<WaveformSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmission: Option<TransmissionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<G2Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulsed: Option<PulsedSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramsey: Option<RamseySection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    /// Total decay rate γ.
    pub gamma_per_s: f64,
    /// Share of γ coupled to the input channel; the rest goes to the output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0_hz: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformKind {
    None,
    Sine,
    Harmonics,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSection {
    pub kind: WaveformKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<Vec<HarmonicFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// Evenly spaced frequency grid, endpoints included.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_gamma: Option<f64>,
    pub points: usize,
}

/// Evenly spaced time grid, endpoints included.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_per_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_per_gamma: Option<f64>,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Relative to ω₀.
    pub detuning: FrequencyGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionSection {
    /// Input frequency relative to ω₀.
    pub nu: FrequencyGrid,
    #[serde(default = "yes")]
    pub write_amplitudes: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Emission,
    Scatter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Omega,
    Amplitude,
    OmegaRatio,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub name: String,
    pub axis: Axis,
    /// Amplitude for `omega`, Ω for `amplitude`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_gamma: Option<f64>,
    /// A/Ω for `omega_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub values: FrequencyGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub kind: MapKind,
    /// Output frequency grid relative to ω₀.
    pub detuning: FrequencyGrid,
    #[serde(default = "yes")]
    pub normalized: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepSection>,
    /// Wavepacket centres relative to ω₀ (scatter maps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<FrequencyGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavepacket_fwhm_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavepacket_fwhm_gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Section {
    pub tau: TimeGrid,
    /// Laser detuning from ω₀ is `laser_sideband·Ω + laser_detuning`.
    #[serde(default)]
    pub laser_sideband: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laser_detuning_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laser_detuning_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_gamma: Option<f64>,
    #[serde(default = "default_t_samples")]
    pub t_samples: usize,
    #[serde(default = "yes")]
    pub verify_weak_drive: bool,
    #[serde(default)]
    pub write_map: bool,
    /// Fold g² over the modulation period into this many bins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold_bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle_per_gamma: Option<f64>,
    /// Run one case per Ω, keeping the waveform shape and amplitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_cases_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_cases_gamma: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Relative,
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_hz: Option<f64>,
    /// Sideband index → weight.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases_rad: Option<BTreeMap<String, f64>>,
    /// JSON target file; replaces `omega_hz`, `weights` and `phases_rad`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_harmonic: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_cap_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage_weight: Option<f64>,
    /// Emission map of the optimised shape with A/Ω held fixed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_omega: Option<FrequencyGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_detuning: Option<FrequencyGrid>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulsedMode {
    Optimize,
    Trajectory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulsedSection {
    pub mode: PulsedMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fwhm_s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fwhm_per_gamma: Option<Vec<f64>>,
    /// Pulse carrier detuning from ω₀ is `sideband·Ω + detuning`.
    #[serde(default)]
    pub sideband: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_area_pi: Option<f64>,
    /// Trajectory mode: pulse area in units of π.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases_rad: Option<Vec<f64>>,
    /// Trajectory mode: sample times relative to the pulse centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimeGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringeSection {
    pub omegas_hz: Vec<f64>,
    pub delay: TimeGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseySection {
    pub amplitude_hz: f64,
    pub t_delay_s: f64,
    pub omega: FrequencyGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ref_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_phases: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fringe_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_checks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fringes: Option<FringeSection>,
}

fn yes() -> bool {
    true
}

fn default_t_samples() -> usize {
    64
}

/// A config problem, tied to a field path and, when it can be located, a
/// line of the source.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), line: None, message: message.into() }
}

/// Best-effort line lookup for a dotted field path such as `g2.tau.points`.
/// Falls back to the closest enclosing key or section that appears in the
/// source.
pub fn locate(src: &str, field: &str) -> Option<usize> {
    let parts: Vec<&str> = field.split('.').filter(|p| p.parse::<usize>().is_err()).collect();
    for cut in (1..=parts.len()).rev() {
        let path = parts[..cut].join(".");
        let section = parts[..cut - 1].join(".");
        let key = parts[cut - 1];
        let mut current = String::new();
        for (i, line) in src.lines().enumerate() {
            let t = line.trim();
            if t.starts_with('[') {
                current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
                if current == path {
                    return Some(i + 1);
                }
                continue;
            }
            let k = t.split('=').next().unwrap_or("").trim();
            if current == section && t.contains('=') && k == key {
                return Some(i + 1);
            }
        }
    }
    None
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1);
            ConfigError { field: "config".into(), line, message: e.message().to_string() }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Canonical text: parse and re-serialise.
    pub fn normalize(src: &str) -> Result<String, ConfigError> {
        Ok(Self::parse(src)?.to_toml())
    }

    /// Read, parse and validate a config file; relative input paths are
    /// resolved against the config's directory.
    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| err("config", format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&src)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate(&base).map_err(|mut e| {
            e.line = locate(&src, &e.field);
            e
        })?;
        Ok((cfg, src))
    }

    pub fn gamma(&self) -> f64 {
        self.emitter.gamma_per_s
    }

    pub fn units(&self) -> Units {
        Units { gamma: self.emitter.gamma_per_s }
    }

    /// Input files referenced by the config, resolved against `base`.
    pub fn input_files(&self, base: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        if let Some(p) = self.waveform.as_ref().and_then(|w| w.path.as_ref()) {
            out.push(base.join(p));
        }
        if let Some(p) = self.optimize.as_ref().and_then(|o| o.target_path.as_ref()) {
            out.push(base.join(p));
        }
        out
    }

    fn present_sections(&self) -> Vec<Task> {
        let mut v = Vec::new();
        if self.spectrum.is_some() {
            v.push(Task::Spectrum);
        }
        if self.transmission.is_some() {
            v.push(Task::Transmission);
        }
        if self.map.is_some() {
            v.push(Task::Map);
        }
        if self.g2.is_some() {
            v.push(Task::G2);
        }
        if self.optimize.is_some() {
            v.push(Task::Optimize);
        }
        if self.pulsed.is_some() {
            v.push(Task::Pulsed);
        }
        if self.ramsey.is_some() {
            v.push(Task::Ramsey);
        }
        v
    }

    pub fn validate(&self, base: &Path) -> Result<(), ConfigError> {
        let sections = self.present_sections();
        if !sections.contains(&self.task) {
            return Err(err(self.task.name(), format!("task is `{}` but the [{}] section is missing", self.task.name(), self.task.name())));
        }
        if let Some(other) = sections.iter().find(|&&t| t != self.task) {
            return Err(err(other.name(), format!("exactly one task per config; found [{}] alongside task `{}`", other.name(), self.task.name())));
        }
        let g = self.emitter.gamma_per_s;
        if !(g.is_finite() && g > 0.0) {
            return Err(err("emitter.gamma_per_s", "must be positive"));
        }
        if let Some(f) = self.emitter.input_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(err("emitter.input_fraction", "must lie in (0, 1)"));
            }
        }
        for p in self.input_files(base) {
            if !p.is_file() {
                return Err(err(
                    if self.task == Task::Optimize { "optimize.target_path" } else { "waveform.path" },
                    format!("file not found: {}", p.display()),
                ));
            }
        }
        let u = self.units();
        if let Some(w) = &self.waveform {
            w.check(&u)?;
        }
        let needs_waveform = matches!(self.task, Task::Spectrum | Task::Transmission | Task::G2 | Task::Pulsed)
            || (self.task == Task::Map && self.map.as_ref().is_some_and(|m| m.kind == MapKind::Scatter));
        if needs_waveform && self.waveform.is_none() {
            return Err(err("waveform", format!("task `{}` needs a [waveform] section", self.task.name())));
        }
        match self.task {
            Task::Spectrum => u.freq_grid(&self.spectrum.as_ref().unwrap().detuning, "spectrum.detuning").map(drop),
            Task::Transmission => u.freq_grid(&self.transmission.as_ref().unwrap().nu, "transmission.nu").map(drop),
            Task::Map => self.map.as_ref().unwrap().check(&u, self.waveform.as_ref()),
            Task::G2 => self.g2.as_ref().unwrap().check(&u),
            Task::Optimize => self.optimize.as_ref().unwrap().check(),
            Task::Pulsed => self.pulsed.as_ref().unwrap().check(&u),
            Task::Ramsey => self.ramsey.as_ref().unwrap().check(),
        }
    }
}

/// Converts config quantities to internal angular units.
#[derive(Clone, Copy, Debug)]
pub struct Units {
    pub gamma: f64,
}

impl Units {
    pub fn freq(&self, hz: Option<f64>, in_gamma: Option<f64>, field: &str) -> Result<Option<f64>, ConfigError> {
        let v = match (hz, in_gamma) {
            (Some(_), Some(_)) => return Err(err(format!("{field}_hz"), format!("give only one of `{field}_hz` and `{field}_gamma`"))),
            (Some(h), None) => Some(hz_to_rad(h)),
            (None, Some(x)) => Some(x * self.gamma),
            (None, None) => None,
        };
        match v {
            Some(x) if !x.is_finite() => Err(err(format!("{field}_hz"), "must be finite")),
            _ => Ok(v),
        }
    }

    pub fn required_freq(&self, hz: Option<f64>, in_gamma: Option<f64>, field: &str) -> Result<f64, ConfigError> {
        self.freq(hz, in_gamma, field)?
            .ok_or_else(|| err(format!("{field}_hz"), format!("one of `{field}_hz` or `{field}_gamma` is required")))
    }

    pub fn time(&self, s: Option<f64>, per_gamma: Option<f64>, field: &str) -> Result<Option<f64>, ConfigError> {
        match (s, per_gamma) {
            (Some(_), Some(_)) => Err(err(format!("{field}_s"), format!("give only one of `{field}_s` and `{field}_per_gamma`"))),
            (Some(t), None) => Ok(Some(t)),
            (None, Some(x)) => Ok(Some(x / self.gamma)),
            (None, None) => Ok(None),
        }
    }

    pub fn freq_list(&self, hz: &Option<Vec<f64>>, in_gamma: &Option<Vec<f64>>, field: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match (hz, in_gamma) {
            (Some(_), Some(_)) => Err(err(format!("{field}_hz"), format!("give only one of `{field}_hz` and `{field}_gamma`"))),
            (Some(v), None) => Ok(Some(v.iter().map(|&h| hz_to_rad(h)).collect())),
            (None, Some(v)) => Ok(Some(v.iter().map(|&x| x * self.gamma).collect())),
            (None, None) => Ok(None),
        }
    }

    pub fn freq_grid(&self, g: &FrequencyGrid, field: &str) -> Result<Vec<f64>, ConfigError> {
        let a = self.required_freq(g.start_hz, g.start_gamma, &format!("{field}.start"))?;
        let b = self.required_freq(g.stop_hz, g.stop_gamma, &format!("{field}.stop"))?;
        linspace(a, b, g.points, field)
    }

    pub fn time_grid(&self, g: &TimeGrid, field: &str) -> Result<Vec<f64>, ConfigError> {
        let a = self.time(g.start_s, g.start_per_gamma, &format!("{field}.start"))?.unwrap_or(0.0);
        let b = self
            .time(g.stop_s, g.stop_per_gamma, &format!("{field}.stop"))?
            .ok_or_else(|| err(format!("{field}.stop_s"), "one of `stop_s` or `stop_per_gamma` is required"))?;
        linspace(a, b, g.points, field)
    }
}

fn linspace(a: f64, b: f64, n: usize, field: &str) -> Result<Vec<f64>, ConfigError> {
    if n == 0 {
        return Err(err(format!("{field}.points"), "must be at least 1"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    if !(b > a) {
        return Err(err(format!("{field}.stop"), "must exceed start"));
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

impl WaveformSection {
    fn check(&self, u: &Units) -> Result<(), ConfigError> {
        let omega = u.freq(self.omega_hz, self.omega_gamma, "waveform.omega")?;
        let amp = u.freq(self.amplitude_hz, self.amplitude_gamma, "waveform.amplitude")?;
        match self.kind {
            WaveformKind::File => {
                if self.path.is_none() {
                    return Err(err("waveform.path", "required for kind = \"file\""));
                }
            }
            WaveformKind::Harmonics => {
                if omega.is_none() || self.harmonics.as_ref().is_none_or(|h| h.is_empty()) {
                    return Err(err("waveform.harmonics", "kind = \"harmonics\" needs `omega_hz` and a non-empty `harmonics` list"));
                }
            }
            WaveformKind::Sine => {
                if omega.is_none() || amp.is_none() {
                    return Err(err("waveform.amplitude_hz", "kind = \"sine\" needs an amplitude and `omega`"));
                }
                if amp.is_some_and(|a| a < 0.0) {
                    return Err(err("waveform.amplitude_hz", "must be non-negative"));
                }
            }
            WaveformKind::None => {
                if omega.is_none() {
                    return Err(err("waveform.omega_hz", "required, it sets the sideband spacing"));
                }
            }
        }
        if omega.is_some_and(|o| o <= 0.0) {
            return Err(err("waveform.omega_hz", "must be positive"));
        }
        Ok(())
    }
}

impl MapSection {
    fn check(&self, u: &Units, w: Option<&WaveformSection>) -> Result<(), ConfigError> {
        u.freq_grid(&self.detuning, "map.detuning")?;
        match self.kind {
            MapKind::Emission => {
                if self.sweeps.is_empty() {
                    return Err(err("map.sweeps", "an emission map needs at least one [[map.sweeps]] entry"));
                }
                for (i, s) in self.sweeps.iter().enumerate() {
                    let f = format!("map.sweeps.{i}");
                    u.freq_grid(&s.values, &format!("{f}.values"))?;
                    let fixed = u.freq(s.fixed_hz, s.fixed_gamma, &format!("{f}.fixed"))?;
                    match s.axis {
                        Axis::OmegaRatio if s.ratio.is_none() => {
                            return Err(err(format!("{f}.ratio"), "required for axis = \"omega_ratio\""))
                        }
                        Axis::Omega | Axis::Amplitude if fixed.is_none() => {
                            return Err(err(format!("{f}.fixed_hz"), "required for this axis"))
                        }
                        _ => {}
                    }
                }
                if w.is_some_and(|w| w.kind == WaveformKind::None) {
                    return Err(err("waveform.kind", "an emission map sweeps the modulation; `none` has no shape"));
                }
            }
            MapKind::Scatter => {
                let c = self.centers.as_ref().ok_or_else(|| err("map.centers", "required for kind = \"scatter\""))?;
                u.freq_grid(c, "map.centers")?;
                let fwhm = u.required_freq(self.wavepacket_fwhm_hz, self.wavepacket_fwhm_gamma, "map.wavepacket_fwhm")?;
                if fwhm <= 0.0 {
                    return Err(err("map.wavepacket_fwhm_hz", "must be positive"));
                }
            }
        }
        Ok(())
    }
}

impl G2Section {
    fn check(&self, u: &Units) -> Result<(), ConfigError> {
        u.time_grid(&self.tau, "g2.tau")?;
        u.freq(self.laser_detuning_hz, self.laser_detuning_gamma, "g2.laser_detuning")?;
        if let Some(e) = u.freq(self.epsilon_hz, self.epsilon_gamma, "g2.epsilon")? {
            if !(e > 0.0) {
                return Err(err("g2.epsilon_hz", "must be positive"));
            }
        }
        if self.t_samples < 2 {
            return Err(err("g2.t_samples", "must be at least 2"));
        }
        u.time(self.settle_s, self.settle_per_gamma, "g2.settle")?;
        if let Some(list) = u.freq_list(&self.omega_cases_hz, &self.omega_cases_gamma, "g2.omega_cases")? {
            if list.is_empty() || list.iter().any(|&o| !(o > 0.0)) {
                return Err(err("g2.omega_cases_hz", "must be a non-empty list of positive frequencies"));
            }
        }
        if self.fold_bins == Some(0) {
            return Err(err("g2.fold_bins", "must be positive"));
        }
        Ok(())
    }
}

impl OptimizeSection {
    fn check(&self) -> Result<(), ConfigError> {
        if self.target_path.is_some() {
            if !self.weights.is_empty() || self.omega_hz.is_some() || self.phases_rad.is_some() {
                return Err(err("optimize.target_path", "give either `target_path` or inline `omega_hz`/`weights`, not both"));
            }
        } else {
            if self.omega_hz.is_none_or(|o| !(o > 0.0)) {
                return Err(err("optimize.omega_hz", "a positive fundamental is required"));
            }
            if self.weights.is_empty() {
                return Err(err("optimize.weights", "at least one target sideband is required"));
            }
        }
        for k in self.weights.keys().chain(self.phases_rad.iter().flat_map(|p| p.keys())) {
            if k.parse::<i64>().is_err() {
                return Err(err("optimize.weights", format!("sideband key `{k}` is not an integer")));
            }
        }
        if self.restarts == Some(0) {
            return Err(err("optimize.restarts", "must be positive"));
        }
        if self.scan_omega.is_some() != self.scan_detuning.is_some() {
            return Err(err("optimize.scan_omega", "`scan_omega` and `scan_detuning` go together"));
        }
        Ok(())
    }
}

impl PulsedSection {
    fn check(&self, u: &Units) -> Result<(), ConfigError> {
        let fwhm = self.fwhms(u)?;
        if fwhm.is_empty() || fwhm.iter().any(|&f| !(f > 0.0)) {
            return Err(err("pulsed.fwhm_s", "a non-empty list of positive durations is required"));
        }
        if self.mode == PulsedMode::Trajectory {
            if self.area_pi.is_none() {
                return Err(err("pulsed.area_pi", "required in trajectory mode"));
            }
            if self.phases_rad.as_ref().is_none_or(|p| p.is_empty()) {
                return Err(err("pulsed.phases_rad", "required in trajectory mode"));
            }
            let t = self.times.as_ref().ok_or_else(|| err("pulsed.times", "required in trajectory mode"))?;
            u.time_grid(t, "pulsed.times")?;
        }
        Ok(())
    }

    pub fn fwhms(&self, u: &Units) -> Result<Vec<f64>, ConfigError> {
        match (&self.fwhm_s, &self.fwhm_per_gamma) {
            (Some(_), Some(_)) => Err(err("pulsed.fwhm_s", "give only one of `fwhm_s` and `fwhm_per_gamma`")),
            (Some(v), None) => Ok(v.clone()),
            (None, Some(v)) => Ok(v.iter().map(|x| x / u.gamma).collect()),
            (None, None) => Err(err("pulsed.fwhm_s", "one of `fwhm_s` or `fwhm_per_gamma` is required")),
        }
    }
}

impl RamseySection {
    fn check(&self) -> Result<(), ConfigError> {
        if !(self.amplitude_hz >= 0.0) {
            return Err(err("ramsey.amplitude_hz", "must be non-negative"));
        }
        if !(self.t_delay_s >= 0.0) {
            return Err(err("ramsey.t_delay_s", "must be non-negative"));
        }
        let u = Units { gamma: 1.0 };
        u.freq_grid(&self.omega, "ramsey.omega")?;
        if let Some(f) = &self.fringes {
            u.time_grid(&f.delay, "ramsey.fringes.delay")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
task = "spectrum"

[emitter]
gamma_per_s = 1.0

[waveform]
kind = "none"
omega_gamma = 2.5

[spectrum]
detuning = { start_gamma = -5.0, stop_gamma = 5.0, points = 11 }
"#;

    #[test]
    fn minimal_config_validates() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        c.validate(Path::new(".")).unwrap();
        assert_eq!(c.units().freq_grid(&c.spectrum.unwrap().detuning, "d").unwrap()[0], -5.0);
    }

    #[test]
    fn second_task_section_is_rejected() {
        let src = format!("{MINIMAL}\n[ramsey]\namplitude_hz = 1.0\nt_delay_s = 1e-10\nomega = {{ start_hz = 0.0, stop_hz = 1e9, points = 3 }}\n");
        let c = RunConfig::parse(&src).unwrap();
        let e = c.validate(Path::new(".")).unwrap_err();
        assert_eq!(e.field, "ramsey");
        assert_eq!(locate(&src, &e.field), src.lines().position(|l| l == "[ramsey]").map(|i| i + 1));
    }

    #[test]
    fn both_spellings_conflict() {
        let src = MINIMAL.replace("omega_gamma = 2.5", "omega_gamma = 2.5\nomega_hz = 1e9");
        let e = RunConfig::parse(&src).unwrap().validate(Path::new(".")).unwrap_err();
        assert_eq!(e.field, "waveform.omega_hz");
        assert_eq!(locate(&src, &e.field), Some(10));
    }

    #[test]
    fn unknown_field_reports_line() {
        let src = MINIMAL.replace("kind = \"none\"", "kind = \"none\"\nomega = 3");
        let e = RunConfig::parse(&src).unwrap_err();
        assert_eq!(e.line, Some(9));
        assert!(e.message.contains("unknown field"));
    }

    #[test]
    fn normalization_is_idempotent() {
        let once = RunConfig::normalize(MINIMAL).unwrap();
        assert_eq!(RunConfig::normalize(&once).unwrap(), once);
        assert_eq!(RunConfig::parse(&once).unwrap(), RunConfig::parse(MINIMAL).unwrap());
    }
}
