//! Task execution. Each task returns its artifacts in memory; writing them
//! out is left to the caller.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use floquet_core::correlations::{
    correlation_map, g2_curve, g2_period_average, CorrelationOptions, DEFAULT_WEAK_DRIVE,
};
use floquet_core::dynamics::{propagate, DensityMatrix2, DriveSpec, GaussianPulse};
use floquet_core::export;
use floquet_core::optimizer::{optimize_waveform, OptimizerConfig, SpectralTarget, TargetMode, DEFAULT_BANDWIDTH_CAP};
use floquet_core::pulsed::{expected_photon_number, optimize_pulse, PulseSearch, PulsedOptions};
use floquet_core::ramsey::{contrast_sweep, ramsey_analytic, ramsey_simulated_sine, RamseySweepConfig};
use floquet_core::scattering::{
    floquet_emission_spectrum, scatter_map, scattering_sweep, spectrum_map, DriveFamily, EmitterParams, SweepAxis,
};
use floquet_core::units::{hz_to_rad, rad_to_hz};
use floquet_core::waveform::{make_sine, phase_factor_spectrum, Harmonic, ModulationWaveform};
use floquet_core::{par, Complex64};
use serde_json::json;

use crate::config::{Axis, ConfigError, MapKind, Mode, PulsedMode, RunConfig, Task, Units, WaveformKind};

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn text(name: impl Into<String>, s: String) -> Self {
        Self { name: name.into(), bytes: s.into_bytes() }
    }

    fn json(name: impl Into<String>, v: &impl serde::Serialize) -> Self {
        let mut s = serde_json::to_string_pretty(v).expect("serialisable");
        s.push('\n');
        Self::text(name, s)
    }
}

#[derive(Debug)]
pub enum TaskError {
    Config(ConfigError),
    Numerical { context: String, source: floquet_core::Error },
    Io(String),
}

impl std::fmt::Display for TaskError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskError::Config(e) => write!(f, "config error: {e}"),
            TaskError::Numerical { context, source } => write!(f, "{context}: {source}"),
            TaskError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for TaskError {
    fn from(e: ConfigError) -> Self {
        TaskError::Config(e)
    }
}

type Result<T> = std::result::Result<T, TaskError>;

trait Context<T> {
    fn ctx(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for floquet_core::Result<T> {
    fn ctx(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| TaskError::Numerical { context: what(), source })
    }
}

fn suffix(i: usize, n: usize) -> String {
    if n == 1 {
        String::new()
    } else {
        format!("_{i}")
    }
}

pub fn run(cfg: &RunConfig, base: &Path) -> Result<Vec<Artifact>> {
    let u = cfg.units();
    let e = emitter(cfg).ctx(|| "emitter".into())?;
    let w = match &cfg.waveform {
        Some(_) => Some(waveform(cfg, base, &u)?),
        None => None,
    };
    match cfg.task {
        Task::Spectrum => spectrum(cfg, &u, &e, w.as_ref().unwrap()),
        Task::Transmission => transmission(cfg, &u, &e, w.as_ref().unwrap()),
        Task::Map => map(cfg, &u, &e, w.as_ref()),
        Task::G2 => g2(cfg, &u, &e, w.as_ref().unwrap()),
        Task::Optimize => optimize(cfg, base, &u, &e),
        Task::Pulsed => pulsed(cfg, &u, w.as_ref().unwrap()),
        Task::Ramsey => ramsey(cfg),
    }
}

fn emitter(cfg: &RunConfig) -> floquet_core::Result<EmitterParams> {
    let g = cfg.gamma();
    let f = cfg.emitter.input_fraction.unwrap_or(0.5);
    EmitterParams::new(hz_to_rad(cfg.emitter.omega0_hz.unwrap_or(0.0)), f * g, (1.0 - f) * g)
}

pub fn waveform(cfg: &RunConfig, base: &Path, u: &Units) -> Result<ModulationWaveform> {
    let s = cfg.waveform.as_ref().expect("waveform section");
    let omega = u.freq(s.omega_hz, s.omega_gamma, "waveform.omega")?;
    let w = match s.kind {
        WaveformKind::None => ModulationWaveform::unmodulated(omega.unwrap_or(0.0)),
        WaveformKind::Sine => make_sine(
            u.required_freq(s.amplitude_hz, s.amplitude_gamma, "waveform.amplitude")?,
            omega.unwrap_or(0.0),
            s.phase_rad.unwrap_or(0.0),
        ),
        WaveformKind::Harmonics => {
            let hs = s
                .harmonics
                .iter()
                .flatten()
                .map(|h| Harmonic { k: h.k, amplitude: Complex64::new(hz_to_rad(h.re_hz), hz_to_rad(h.im_hz)) })
                .collect();
            ModulationWaveform::new(omega.unwrap_or(0.0), hs)
        }
        WaveformKind::File => {
            let p = base.join(s.path.as_ref().expect("validated"));
            let text = std::fs::read_to_string(&p).map_err(|e| TaskError::Io(format!("{}: {e}", p.display())))?;
            return ModulationWaveform::from_json(&text).map_err(|e| {
                TaskError::Config(ConfigError { field: "waveform.path".into(), line: None, message: e.to_string() })
            });
        }
    };
    w.ctx(|| "waveform".into())
}

fn spectrum(cfg: &RunConfig, u: &Units, e: &EmitterParams, w: &ModulationWaveform) -> Result<Vec<Artifact>> {
    let det = u.freq_grid(&cfg.spectrum.as_ref().unwrap().detuning, "spectrum.detuning")?;
    let a = phase_factor_spectrum(w).ctx(|| "phase-factor spectrum".into())?;
    let grid: Vec<f64> = det.iter().map(|d| e.omega0 + d).collect();
    let s = floquet_emission_spectrum(e, &a, &grid);
    let rows = a.iter().map(|(m, al)| {
        vec![m as f64, rad_to_hz(e.omega0 + m as f64 * a.fundamental()), al.re, al.im, al.norm_sqr()]
    });
    Ok(vec![
        Artifact::text("spectrum.csv", export::spectrum_csv(&s)),
        Artifact::text("sidebands.csv", export::table(&["m", "omega_hz", "re_alpha", "im_alpha", "weight"], rows)),
    ])
}

fn transmission(cfg: &RunConfig, u: &Units, e: &EmitterParams, w: &ModulationWaveform) -> Result<Vec<Artifact>> {
    let sec = cfg.transmission.as_ref().unwrap();
    let nu: Vec<f64> = u.freq_grid(&sec.nu, "transmission.nu")?.iter().map(|d| e.omega0 + d).collect();
    let a = phase_factor_spectrum(w).ctx(|| "phase-factor spectrum".into())?;
    let s = scattering_sweep(e, &a, &nu);
    let mut out = vec![Artifact::text("transmission.csv", export::transmission_csv(&s))];
    if sec.write_amplitudes {
        out.push(Artifact::text("scattering.csv", export::scattering_csv(&s)));
    }
    Ok(out)
}

fn map(cfg: &RunConfig, u: &Units, e: &EmitterParams, w: Option<&ModulationWaveform>) -> Result<Vec<Artifact>> {
    let sec = cfg.map.as_ref().unwrap();
    let det = u.freq_grid(&sec.detuning, "map.detuning")?;
    match sec.kind {
        MapKind::Emission => {
            let family = match w {
                Some(w) => DriveFamily::from_waveform(w).ctx(|| "drive family".into())?,
                None => DriveFamily::sine(),
            };
            let mut out = Vec::new();
            for (i, s) in sec.sweeps.iter().enumerate() {
                let f = format!("map.sweeps.{i}");
                let values = u.freq_grid(&s.values, &format!("{f}.values"))?;
                let fixed = u.freq(s.fixed_hz, s.fixed_gamma, &format!("{f}.fixed"))?.unwrap_or(0.0);
                let axis = match s.axis {
                    Axis::Omega => SweepAxis::OmegaAtFixedAmplitude { amplitude: fixed },
                    Axis::Amplitude => SweepAxis::AmplitudeAtFixedOmega { omega: fixed },
                    Axis::OmegaRatio => SweepAxis::OmegaAtFixedRatio { ratio: s.ratio.unwrap_or(0.0) },
                };
                let m = spectrum_map(e, &family, axis, &values, &det).ctx(|| format!("map sweep `{}`", s.name))?;
                out.push(Artifact::text(format!("map_{}.csv", s.name), export::map_csv(&m, e.omega0, sec.normalized)));
            }
            Ok(out)
        }
        MapKind::Scatter => {
            let w = w.expect("validated");
            let centers: Vec<f64> =
                u.freq_grid(sec.centers.as_ref().unwrap(), "map.centers")?.iter().map(|c| e.omega0 + c).collect();
            let fwhm = u.required_freq(sec.wavepacket_fwhm_hz, sec.wavepacket_fwhm_gamma, "map.wavepacket_fwhm")?;
            let spacing = if det.len() > 1 { det[1] - det[0] } else { e.gamma };
            let a = phase_factor_spectrum(w).ctx(|| "phase-factor spectrum".into())?;
            let mut rows = scatter_map(e, &a, &centers, fwhm, e.omega0 + det[0], spacing, det.len())
                .ctx(|| "scatter map".into())?;
            if sec.normalized {
                for r in &mut rows {
                    let peak = r.iter().cloned().fold(0.0, f64::max);
                    if peak > 0.0 {
                        r.iter_mut().for_each(|x| *x /= peak);
                    }
                }
            }
            let grid: Vec<f64> = det.iter().map(|d| e.omega0 + d).collect();
            Ok(vec![Artifact::text("map.csv", export::scatter_map_csv(&centers, &grid, &rows))])
        }
    }
}

fn g2(cfg: &RunConfig, u: &Units, e: &EmitterParams, w: &ModulationWaveform) -> Result<Vec<Artifact>> {
    let sec = cfg.g2.as_ref().unwrap();
    let taus = u.time_grid(&sec.tau, "g2.tau")?;
    let gamma = e.gamma;
    let eps = u.freq(sec.epsilon_hz, sec.epsilon_gamma, "g2.epsilon")?.unwrap_or(DEFAULT_WEAK_DRIVE * gamma);
    let offset = u.freq(sec.laser_detuning_hz, sec.laser_detuning_gamma, "g2.laser_detuning")?.unwrap_or(0.0);
    let settle = u.time(sec.settle_s, sec.settle_per_gamma, "g2.settle")?.unwrap_or(10.0 / gamma);
    let cases: Vec<ModulationWaveform> = match u.freq_list(&sec.omega_cases_hz, &sec.omega_cases_gamma, "g2.omega_cases")? {
        None => vec![w.clone()],
        Some(list) => list
            .iter()
            .map(|&om| {
                if w.is_unmodulated() {
                    ModulationWaveform::unmodulated(om)
                } else {
                    DriveFamily::from_waveform(w)?.waveform(w.amplitude_bound(), om)
                }
            })
            .collect::<floquet_core::Result<_>>()
            .ctx(|| "g2 cases".into())?,
    };
    let opts = CorrelationOptions { t_samples: sec.t_samples, verify_weak_drive: sec.verify_weak_drive, ..Default::default() };
    let mut out = Vec::new();
    let mut summary = Vec::new();
    for (i, wc) in cases.iter().enumerate() {
        let om = wc.fundamental();
        let laser = sec.laser_sideband as f64 * om + offset;
        let d = DriveSpec::weak_cw(wc.clone(), laser, eps);
        let what = || format!("g2 case {i} (omega {:e} Hz)", rad_to_hz(om));
        let curve = g2_curve(e, &d, &taus, &opts).ctx(what)?;
        let sfx = suffix(i, cases.len());
        out.push(Artifact::text(format!("g2{sfx}.csv"), export::g2_csv(&curve)));
        if sec.write_map {
            let m = correlation_map(&d, gamma, &taus, &opts).ctx(what)?;
            out.push(Artifact::text(format!("correlation_map{sfx}.csv"), export::correlation_map_csv(&m)));
        }
        if let Some(bins) = sec.fold_bins {
            let f = g2_period_average(&curve, om, settle, bins).ctx(what)?;
            out.push(Artifact::text(format!("g2_folded{sfx}.csv"), export::folded_g2_csv(&f)));
        }
        summary.push(json!({
            "omega_hz": rad_to_hz(om),
            "laser_detuning_hz": rad_to_hz(laser),
            "epsilon_rad_per_s": curve.epsilon,
            "mean_population": curve.mean_population,
            "transmission": curve.transmission,
            "g2_zero": curve.g2.first(),
            "weak_drive_deviation": curve.weak_drive_deviation,
        }));
    }
    out.push(Artifact::json("summary.json", &summary));
    Ok(out)
}

fn optimize(cfg: &RunConfig, base: &Path, u: &Units, e: &EmitterParams) -> Result<Vec<Artifact>> {
    let sec = cfg.optimize.as_ref().unwrap();
    let (target, omega) = match &sec.target_path {
        Some(p) => {
            let p = base.join(p);
            let text = std::fs::read_to_string(&p).map_err(|e| TaskError::Io(format!("{}: {e}", p.display())))?;
            SpectralTarget::from_json(&text).map_err(|e| {
                TaskError::Config(ConfigError { field: "optimize.target_path".into(), line: None, message: e.to_string() })
            })?
        }
        None => {
            let parse = |m: &BTreeMap<String, f64>| -> BTreeMap<i64, f64> {
                m.iter().map(|(k, v)| (k.parse().expect("validated"), *v)).collect()
            };
            let mut t = SpectralTarget::new(parse(&sec.weights)).map_err(|e| {
                TaskError::Config(ConfigError { field: "optimize.weights".into(), line: None, message: e.to_string() })
            })?;
            if let Some(ph) = &sec.phases_rad {
                t = t.with_phases(parse(ph)).map_err(|e| {
                    TaskError::Config(ConfigError { field: "optimize.phases_rad".into(), line: None, message: e.to_string() })
                })?;
            }
            (t, hz_to_rad(sec.omega_hz.expect("validated")))
        }
    };
    let cap = sec.bandwidth_cap_hz.map(hz_to_rad).unwrap_or(DEFAULT_BANDWIDTH_CAP);
    let k = sec.max_harmonic.unwrap_or_else(|| OptimizerConfig::max_harmonics_within_cap(omega, cap));
    let mut oc = OptimizerConfig::new(omega, k);
    oc.bandwidth_cap = cap;
    oc.seed = cfg.seed;
    if let Some(r) = sec.restarts {
        oc.restarts = r;
    }
    if let Some(m) = sec.max_iterations {
        oc.max_iterations = m;
    }
    if let Some(l) = sec.leakage_weight {
        oc.leakage_weight = l;
    }
    oc.mode = match sec.mode {
        Some(Mode::Absolute) => TargetMode::Absolute,
        _ => TargetMode::Relative,
    };
    oc.validate(&target).map_err(|e| {
        TaskError::Config(ConfigError { field: "optimize".into(), line: None, message: e.to_string() })
    })?;
    let r = optimize_waveform(&target, &oc).ctx(|| "waveform optimisation".into())?;
    let m = r.spectrum.m_max() as i64;
    let reach = m.max(target.max_index());
    let rows = (-reach..=reach).map(|p| {
        vec![p as f64, r.spectrum.weight(p), target.weights.get(&p).copied().unwrap_or(0.0)]
    });
    let mut out = vec![
        Artifact::text("waveform.json", r.waveform.to_json() + "\n"),
        Artifact::json("report.json", &r.report(&target)),
        Artifact::text("achieved.csv", export::table(&["p", "weight", "target"], rows)),
        Artifact::text("waveform.csv", export::waveform_csv(&r.waveform, 64.0 * rad_to_hz(omega), 2)),
    ];
    if let (Some(so), Some(sd)) = (&sec.scan_omega, &sec.scan_detuning) {
        let values = u.freq_grid(so, "optimize.scan_omega")?;
        let det = u.freq_grid(sd, "optimize.scan_detuning")?;
        let family = DriveFamily::from_waveform(&r.waveform).ctx(|| "drive family".into())?;
        let ratio = r.waveform.amplitude_bound() / omega;
        let map = spectrum_map(e, &family, SweepAxis::OmegaAtFixedRatio { ratio }, &values, &det)
            .ctx(|| "scan of the optimised waveform".into())?;
        out.push(Artifact::text("map.csv", export::map_csv(&map, e.omega0, true)));
    }
    Ok(out)
}

fn pulsed(cfg: &RunConfig, u: &Units, w: &ModulationWaveform) -> Result<Vec<Artifact>> {
    let sec = cfg.pulsed.as_ref().unwrap();
    let gamma = cfg.gamma();
    let fwhms = sec.fwhms(u)?;
    let detuning = sec.sideband as f64 * w.fundamental() + sec.detuning_hz.map(hz_to_rad).unwrap_or(0.0);
    let mut out = Vec::new();
    match sec.mode {
        PulsedMode::Optimize => {
            let d = PulseSearch::default();
            let search = PulseSearch {
                detuning,
                phase_points: sec.phase_points.unwrap_or(d.phase_points),
                area_points: sec.area_points.unwrap_or(d.area_points),
                max_area: sec.max_area_pi.map(|a| a * PI).unwrap_or(d.max_area),
                ..d
            };
            let mut results = Vec::new();
            for (i, &f) in fwhms.iter().enumerate() {
                let r = optimize_pulse(gamma, w, f, &search).ctx(|| format!("pulse search at fwhm {f:e} s"))?;
                let sfx = suffix(i, fwhms.len());
                out.push(Artifact::text(format!("trajectory{sfx}.csv"), export::trajectory_csv(&r.trajectory)));
                let rows = r.grid_photons.iter().enumerate().flat_map(|(pi, row)| {
                    let phase = std::f64::consts::TAU * pi as f64 / search.phase_points as f64;
                    row.iter().enumerate().map(move |(aj, &e)| {
                        vec![phase, search.max_area * aj as f64 / (search.area_points - 1) as f64, e]
                    })
                });
                out.push(Artifact::text(format!("grid{sfx}.csv"), export::table(&["phase_rad", "area_rad", "e_n"], rows)));
                results.push(r);
            }
            out.insert(0, Artifact::text("pulsed.csv", export::pulsed_csv(&results)));
        }
        PulsedMode::Trajectory => {
            let area = sec.area_pi.expect("validated") * PI;
            let phases = sec.phases_rad.clone().expect("validated");
            let times = u.time_grid(sec.times.as_ref().unwrap(), "pulsed.times")?;
            let opts = PulsedOptions::default();
            let mut rows = Vec::new();
            for (i, &f) in fwhms.iter().enumerate() {
                let pulse = GaussianPulse::new(0.0, f, area, detuning).ctx(|| "pulse".into())?;
                for (j, &phi) in phases.iter().enumerate() {
                    let what = || format!("trajectory at fwhm {f:e} s, phase {phi} rad");
                    let d = DriveSpec::pulsed(w.clone(), pulse, phi);
                    let tr = propagate(&DensityMatrix2::ground(), &d, gamma, times[0], *times.last().unwrap(), &times, &opts.propagation)
                        .ctx(what)?;
                    let n = expected_photon_number(gamma, &pulse, w, phi, &opts).ctx(what)?;
                    out.push(Artifact::text(format!("trajectory_f{i}_p{j}.csv"), export::trajectory_csv(&tr)));
                    rows.push(vec![f, phi, area, n.value]);
                }
            }
            out.insert(0, Artifact::text("photons.csv", export::table(&["fwhm_s", "phase_rad", "area_rad", "e_n"], rows)));
        }
    }
    Ok(out)
}

fn ramsey(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let sec = cfg.ramsey.as_ref().unwrap();
    let u = Units { gamma: 1.0 };
    let omegas = u.freq_grid(&sec.omega, "ramsey.omega")?;
    let d = RamseySweepConfig::default();
    let rc = RamseySweepConfig {
        omega_ref: sec.omega_ref_hz.map(hz_to_rad).unwrap_or(d.omega_ref),
        fringe_samples: sec.fringe_samples.unwrap_or(d.fringe_samples),
        n_phases: sec.n_phases.unwrap_or(d.n_phases),
        cross_checks: sec.cross_checks.unwrap_or(d.cross_checks),
    };
    let amp = hz_to_rad(sec.amplitude_hz);
    let r = contrast_sweep(amp, sec.t_delay_s, &omegas, &rc).ctx(|| "contrast sweep".into())?;
    let checks = r.cross_checks.iter().map(|c| vec![rad_to_hz(c.omega), c.analytic, c.simulated]);
    let mut out = vec![
        Artifact::text("ramsey.csv", export::ramsey_csv(&r)),
        Artifact::text("cross_checks.csv", export::table(&["omega_hz", "p_e_analytic", "p_e_simulated"], checks)),
    ];
    if let Some(f) = &sec.fringes {
        let delays = u.time_grid(&f.delay, "ramsey.fringes.delay")?;
        let n = delays.len();
        let mut rows = Vec::new();
        for &om_hz in &f.omegas_hz {
            let om = hz_to_rad(om_hz);
            let sim = par::try_map_indexed(n, |j| ramsey_simulated_sine(rc.omega_ref, amp, om, delays[j], rc.n_phases))
                .ctx(|| format!("fringes at {om_hz:e} Hz"))?;
            for (j, &t) in delays.iter().enumerate() {
                rows.push(vec![om_hz, t, ramsey_analytic(rc.omega_ref, amp, om, t), sim[j]]);
            }
        }
        out.push(Artifact::text(
            "fringes.csv",
            export::table(&["omega_hz", "t_delay_s", "p_e_analytic", "p_e_simulated"], rows),
        ));
    }
    Ok(out)
}
