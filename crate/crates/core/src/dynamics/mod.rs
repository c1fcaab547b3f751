//! Time-dependent two-level master equation.
//!
//! `dρ/dt = −i[H(t), ρ] + γ(σρσ† − ½{σ†σ, ρ})` with the rotating-frame
//! Hamiltonian described in [`DriveSpec`]. The state is integrated together
//! with the running integral `∫ρ_ee dt`, which callers use for photon counts
//! and correlation integrals.

mod density;
mod drive;
pub mod integrator;

pub use density::DensityMatrix2;
pub use drive::{DriveSpec, GaussianPulse, RabiEnvelope};

use nalgebra::{Matrix4, Vector4};

use crate::error::{invalid, Error, Result};
use integrator::{integrate, DenseStep, Tolerances};

/// Steps per modulation period, per lifetime and per pulse FWHM.
pub const STEPS_PER_SCALE: f64 = 200.0;
/// Largest tolerated trace or positivity violation.
pub const INVARIANT_TOLERANCE: f64 = 1e-7;
/// Period-to-period convergence threshold of the periodic steady state.
pub const STEADY_STATE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions {
    /// Caller cap on the step size, applied on top of the built-in caps.
    pub dt_max: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { dt_max: f64::INFINITY, rtol: 1e-10, atol: 1e-13 }
    }
}

impl PropagationOptions {
    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }
}

/// Sampled solution. `emitted[i]` is `∫_{t₀}^{tᵢ} ρ_ee dt`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix2>,
    pub emitted: Vec<f64>,
}

impl Trajectory {
    fn push(&mut self, t: f64, y: &[f64; 5]) {
        self.times.push(t);
        self.states.push(DensityMatrix2::from_slice(y));
        self.emitted.push(y[4]);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix2> {
        self.states.last()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.rho_ee).collect()
    }
}

pub(crate) struct Propagator<'a> {
    drive: &'a DriveSpec,
    gamma: f64,
    opts: PropagationOptions,
}

impl<'a> Propagator<'a> {
    pub(crate) fn new(drive: &'a DriveSpec, gamma: f64, opts: PropagationOptions) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return invalid(format!("decay rate must be non-negative, got {gamma}"));
        }
        Ok(Self { drive, gamma, opts })
    }

    fn base_cap(&self) -> f64 {
        let mut cap = self.opts.dt_max;
        if !self.drive.waveform.is_unmodulated() {
            cap = cap.min(self.drive.waveform.period() / STEPS_PER_SCALE);
        }
        if self.gamma > 0.0 {
            cap = cap.min(1.0 / (STEPS_PER_SCALE * self.gamma));
        }
        cap
    }

    fn rhs(&self, t: f64, y: &[f64; 5], dy: &mut [f64; 5]) {
        let d = self.drive.detuning_at(t);
        let r = self.drive.rabi_at(t);
        let g = self.gamma;
        let [gg, ee, x, yi, _] = *y;
        dy[0] = r * yi + g * ee;
        dy[1] = -r * yi - g * ee;
        dy[2] = -0.5 * g * x + d * yi;
        dy[3] = -d * x - 0.5 * g * yi - 0.5 * r * (gg - ee);
        dy[4] = ee;
    }

    /// Integrate over `[t0, t1]`, splitting at the pulse support so the
    /// FWHM-based step cap only applies while the pulse is on.
    pub(crate) fn run<O>(&self, y0: [f64; 5], t0: f64, t1: f64, check: bool, mut observer: O) -> Result<[f64; 5]>
    where
        O: FnMut(&DenseStep<5>) -> Result<()>,
    {
        let base = self.base_cap();
        let mut segments: Vec<(f64, f64, f64)> = Vec::new();
        match self.drive.pulse() {
            Some(p) => {
                let (lo, hi) = p.support();
                let pulse_cap = base.min(p.fwhm / STEPS_PER_SCALE);
                let cuts = [t0, lo.clamp(t0, t1), hi.clamp(t0, t1), t1];
                for (i, w) in cuts.windows(2).enumerate() {
                    if w[1] > w[0] {
                        segments.push((w[0], w[1], if i == 1 { pulse_cap } else { base }));
                    }
                }
            }
            None => segments.push((t0, t1, base)),
        }
        let trace0 = y0[0] + y0[1];
        let mut y = y0;
        for (a, b, cap) in segments {
            let tol = Tolerances { rtol: self.opts.rtol, atol: self.opts.atol, max_step: cap, ..Default::default() };
            y = integrate(
                |t, y: &[f64; 5], dy: &mut [f64; 5]| self.rhs(t, y, dy),
                a,
                y,
                b,
                &tol,
                |step| {
                    if check {
                        let rho = DensityMatrix2::from_slice(&step.y_end);
                        let trace_err = (rho.trace() - trace0).abs();
                        let neg = -rho.min_eigenvalue();
                        let scale = trace0.abs().max(f64::MIN_POSITIVE);
                        if trace_err > INVARIANT_TOLERANCE * scale || neg > INVARIANT_TOLERANCE * scale {
                            return Err(Error::IntegratorFailure {
                                t: step.t_end,
                                reason: format!(
                                    "density matrix invariants violated (trace error {trace_err:e}, min eigenvalue {:e})",
                                    -neg
                                ),
                            });
                        }
                    }
                    observer(step)
                },
            )?;
        }
        Ok(y)
    }

    /// Integrate and sample at the sorted `times` (or at every step if empty).
    pub(crate) fn sample(&self, rho0: &DensityMatrix2, t0: f64, t1: f64, times: &[f64]) -> Result<Trajectory> {
        let mut y0 = [0.0; 5];
        y0[..4].copy_from_slice(&rho0.to_array());
        let mut traj = Trajectory::default();
        if times.is_empty() {
            traj.push(t0, &y0);
            self.run(y0, t0, t1, true, |step| {
                traj.push(step.t_end, &step.y_end);
                Ok(())
            })?;
            return Ok(traj);
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return invalid("sample times must be sorted");
        }
        if times[0] < t0 || times[times.len() - 1] > t1 {
            return invalid("sample times must lie inside the propagation span");
        }
        let mut next = 0;
        while next < times.len() && times[next] <= t0 {
            traj.push(times[next], &y0);
            next += 1;
        }
        self.run(y0, t0, t1, true, |step| {
            while next < times.len() && times[next] <= step.t_end {
                traj.push(times[next], &step.eval(times[next]));
                next += 1;
            }
            Ok(())
        })?;
        Ok(traj)
    }
}

/// Evolve `rho0` from `t0` to `t1`.
///
/// With empty `sample_times` every accepted step is returned; otherwise the
/// dense output is evaluated at the requested (sorted) times. Fails when the
/// trace or positivity drifts by more than [`INVARIANT_TOLERANCE`].
pub fn propagate(
    rho0: &DensityMatrix2,
    drive: &DriveSpec,
    gamma: f64,
    t0: f64,
    t1: f64,
    sample_times: &[f64],
    opts: &PropagationOptions,
) -> Result<Trajectory> {
    if !(t1 > t0) {
        return invalid(format!("propagation needs t1 > t0, got [{t0}, {t1}]"));
    }
    if rho0.invariant_violation() > INVARIANT_TOLERANCE {
        return invalid("initial state is not a valid density matrix");
    }
    Propagator::new(drive, gamma, *opts)?.sample(rho0, t0, t1, sample_times)
}

/// One period of the long-time periodic state under CW excitation.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSteadyState {
    pub period: f64,
    /// Start of the sampled period; the state there is `rho_start`.
    pub t_start: f64,
    pub rho_start: DensityMatrix2,
    /// Uniform samples over `[t_start, t_start + period)`.
    pub samples: Trajectory,
    /// Max-norm change of ρ over the final period.
    pub residual: f64,
}

impl PeriodicSteadyState {
    pub fn mean_population(&self) -> f64 {
        let p = self.samples.populations();
        p.iter().sum::<f64>() / p.len() as f64
    }
}

/// Periodic steady state of a CW-driven, modulated emitter.
///
/// The one-period propagator is assembled from four linearly independent
/// initial states and its trace-one fixed point is solved for directly; the
/// result is then confirmed by propagating one more period. If that residual
/// is above [`STEADY_STATE_TOLERANCE`], plain period-by-period evolution
/// continues, up to `max(10⁴ periods, 100/γ)`.
pub fn periodic_steady_state(
    drive: &DriveSpec,
    gamma: f64,
    samples_per_period: usize,
    opts: &PropagationOptions,
) -> Result<PeriodicSteadyState> {
    if !drive.is_cw() {
        return invalid("periodic steady state requires a CW envelope");
    }
    if !(gamma > 0.0) {
        return invalid("periodic steady state requires a positive decay rate");
    }
    if samples_per_period == 0 {
        return invalid("need at least one sample per period");
    }
    let prop = Propagator::new(drive, gamma, *opts)?;
    let period = drive.waveform.period();
    let t_start = 0.0;
    let one_period = |rho: [f64; 4]| -> Result<[f64; 4]> {
        let y = prop.run([rho[0], rho[1], rho[2], rho[3], 0.0], t_start, t_start + period, false, |_| Ok(()))?;
        Ok([y[0], y[1], y[2], y[3]])
    };

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let basis = [
        DensityMatrix2::ground(),
        DensityMatrix2::excited(),
        DensityMatrix2::pure(h.into(), h.into()),
        DensityMatrix2::pure(h.into(), num_complex::Complex64::new(0.0, h)),
    ];
    let mut initial = Matrix4::zeros();
    let mut image = Matrix4::zeros();
    for (j, b) in basis.iter().enumerate() {
        let x = b.to_array();
        let y = one_period(x)?;
        initial.set_column(j, &Vector4::from(x));
        image.set_column(j, &Vector4::from(y));
    }
    let monodromy = image * initial.try_inverse().expect("basis states are independent");
    let mut system = monodromy - Matrix4::identity();
    system.set_row(0, &nalgebra::RowVector4::new(1.0, 1.0, 0.0, 0.0));
    let rhs = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let mut rho = match system.lu().solve(&rhs) {
        Some(x) => DensityMatrix2::from_slice(x.as_slice()),
        None => DensityMatrix2::ground(),
    };

    let cap = 1e4f64.max((100.0 / (gamma * period)).ceil()) as usize;
    let times: Vec<f64> = (0..samples_per_period)
        .map(|j| t_start + period * j as f64 / samples_per_period as f64)
        .collect();
    for _ in 0..cap {
        let samples = prop.sample(&rho, t_start, t_start + period, &times)?;
        let mut y0 = [0.0; 5];
        y0[..4].copy_from_slice(&rho.to_array());
        let end = prop.run(y0, t_start, t_start + period, false, |_| Ok(()))?;
        let end = DensityMatrix2::from_slice(&end);
        let residual = end.max_abs_diff(&rho);
        if residual < STEADY_STATE_TOLERANCE {
            return Ok(PeriodicSteadyState { period, t_start, rho_start: rho, samples, residual });
        }
        rho = end;
    }
    Err(Error::Convergence { what: "periodic steady state", residual: f64::NAN })
}
