//! Conversions between ordinary frequency (Hz, used in files) and angular
//! frequency (rad/s, used everywhere else).

use std::f64::consts::TAU;

#[inline]
pub fn hz_to_rad(f_hz: f64) -> f64 {
    TAU * f_hz
}

#[inline]
pub fn rad_to_hz(omega: f64) -> f64 {
    omega / TAU
}
