//! CSV serialisation of results.
//!
//! Frequencies are written in Hz (ordinary frequency), times in seconds.
//! Numbers use the shortest representation that round-trips, so identical
//! results give byte-identical files.

use std::fmt::Write as _;

use crate::correlations::{CorrelationMap, FoldedG2, G2Curve};
use crate::dynamics::Trajectory;
use crate::pulsed::PulsedFidelityResult;
use crate::ramsey::RamseyResult;
use crate::scattering::{EmissionSpectrum, SidebandScattering, SpectrumMap, WavepacketSpectrum};
use crate::units::rad_to_hz;
use crate::waveform::ModulationWaveform;

/// Render a header and rows of numbers as CSV.
pub fn table<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

/// `nu_hz, p, re_S, im_S`
pub fn scattering_csv(s: &SidebandScattering) -> String {
    let rows = s.nu_grid.iter().zip(&s.amplitudes).flat_map(|(&nu, amps)| {
        s.p_range.iter().zip(amps).map(move |(&p, a)| vec![rad_to_hz(nu), p as f64, a.re, a.im])
    });
    table(&["nu_hz", "p", "re_S", "im_S"], rows)
}

/// `nu_hz, transmission`
pub fn transmission_csv(s: &SidebandScattering) -> String {
    table(&["nu_hz", "transmission"], s.nu_grid.iter().zip(&s.transmission).map(|(&nu, &t)| vec![rad_to_hz(nu), t]))
}

/// `omega_hz, intensity`, the intensity per unit angular frequency.
pub fn spectrum_csv(s: &EmissionSpectrum) -> String {
    table(&["omega_hz", "intensity"], s.omega_grid.iter().zip(&s.intensity).map(|(&w, &i)| vec![rad_to_hz(w), i]))
}

/// `omega_hz, intensity` with `|ψ(ω)|²`.
pub fn wavepacket_csv(s: &WavepacketSpectrum) -> String {
    table(&["omega_hz", "intensity"], (0..s.len()).map(|j| vec![rad_to_hz(s.omega(j)), s.amplitude[j].norm_sqr()]))
}

/// Long format `sweep_value, omega_hz, intensity`. Sweep values are
/// converted to Hz; `omega0` is added back to the detuning grid.
pub fn map_csv(m: &SpectrumMap, omega0: f64, normalized: bool) -> String {
    let data = if normalized { &m.normalized } else { &m.raw };
    let rows = m.sweep_values.iter().zip(data).flat_map(|(&v, row)| {
        m.detuning_grid.iter().zip(row).map(move |(&d, &i)| vec![rad_to_hz(v), rad_to_hz(omega0 + d), i])
    });
    table(&["sweep_value", "omega_hz", "intensity"], rows)
}

/// Long format `sweep_value, omega_hz, intensity` for output spectra of
/// wavepackets centred at `centers` on the grid `omega_grid`.
pub fn scatter_map_csv(centers: &[f64], omega_grid: &[f64], rows: &[Vec<f64>]) -> String {
    let it = centers.iter().zip(rows).flat_map(|(&c, row)| {
        omega_grid.iter().zip(row).map(move |(&w, &i)| vec![rad_to_hz(c), rad_to_hz(w), i])
    });
    table(&["sweep_value", "omega_hz", "intensity"], it)
}

/// `t_s, rho_ee, re_rho_ge, im_rho_ge`
pub fn trajectory_csv(t: &Trajectory) -> String {
    let rows = t.times.iter().zip(&t.states).map(|(&t, s)| {
        let ge = s.rho_ge();
        vec![t, s.rho_ee, ge.re, ge.im]
    });
    table(&["t_s", "rho_ee", "re_rho_ge", "im_rho_ge"], rows)
}

/// `t_s, tau_s, G`
pub fn correlation_map_csv(m: &CorrelationMap) -> String {
    let rows = m
        .t_grid
        .iter()
        .zip(&m.values)
        .flat_map(|(&t, row)| m.tau_grid.iter().zip(row).map(move |(&tau, &g)| vec![t, tau, g]));
    table(&["t_s", "tau_s", "G"], rows)
}

/// `tau_s, g2, g2_transmission_normalized`
pub fn g2_csv(c: &G2Curve) -> String {
    let rows = (0..c.tau_grid.len()).map(|j| vec![c.tau_grid[j], c.g2[j], c.g2_transmission_normalized[j]]);
    table(&["tau_s", "g2", "g2_transmission_normalized"], rows)
}

/// `tau_mod_s, g2_folded`
pub fn folded_g2_csv(f: &FoldedG2) -> String {
    table(&["tau_mod_s", "g2_folded"], f.tau_mod.iter().zip(&f.g2_folded).map(|(&t, &g)| vec![t, g]))
}

/// `fwhm_s, phase_rad, area_rad, e_n, g2_pulse`
pub fn pulsed_csv(results: &[PulsedFidelityResult]) -> String {
    let rows = results.iter().map(|r| vec![r.fwhm, r.phase, r.area, r.expected_photons, r.g2_pulse]);
    table(&["fwhm_s", "phase_rad", "area_rad", "e_n", "g2_pulse"], rows)
}

/// `omega_hz, t_delay_s, contrast, p_e_min, p_e_max`
pub fn ramsey_csv(r: &RamseyResult) -> String {
    let rows = (0..r.omega_grid.len())
        .map(|i| vec![rad_to_hz(r.omega_grid[i]), r.t_delay, r.contrast[i], r.p_e_min[i], r.p_e_max[i]]);
    table(&["omega_hz", "t_delay_s", "contrast", "p_e_min", "p_e_max"], rows)
}

/// `t_s, delta_hz` sampled at `sample_rate_hz` over `periods` periods.
pub fn waveform_csv(w: &ModulationWaveform, sample_rate_hz: f64, periods: usize) -> String {
    let n = (w.period() * periods as f64 * sample_rate_hz).round() as usize;
    let dt = 1.0 / sample_rate_hz;
    let rows = (0..n).map(|j| {
        let t = j as f64 * dt;
        vec![t, rad_to_hz(w.eval_delta(t))]
    });
    table(&["t_s", "delta_hz"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::make_sine;

    #[test]
    fn table_layout() {
        let s = table(&["a", "b"], vec![vec![1.0, -0.5], vec![2.5e-12, 3.0]]);
        assert_eq!(s, "a,b\n1,-0.5\n0.0000000000025,3\n");
    }

    #[test]
    fn waveform_series() {
        let w = make_sine(std::f64::consts::TAU * 2e9, std::f64::consts::TAU * 1e9, 0.0).unwrap();
        let csv = waveform_csv(&w, 8e9, 1);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t_s,delta_hz");
        assert_eq!(lines.len(), 9);
        let third: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
        // t = 2/8 ns → quarter period → peak 2 GHz
        assert!((third[1] - 2e9).abs() < 1e-3);
    }
}
