use num_complex::Complex64;

/// Two-level density operator in the `{|g⟩, |e⟩}` basis.
///
/// Stored in Hermitian form: `ρ_ge = ρ_eg*` always holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix2 {
    pub rho_gg: f64,
    pub rho_ee: f64,
    /// `⟨e|ρ|g⟩`
    pub rho_eg: Complex64,
}

impl DensityMatrix2 {
    pub fn ground() -> Self {
        Self { rho_gg: 1.0, rho_ee: 0.0, rho_eg: Complex64::new(0.0, 0.0) }
    }

    pub fn excited() -> Self {
        Self { rho_gg: 0.0, rho_ee: 1.0, rho_eg: Complex64::new(0.0, 0.0) }
    }

    /// Pure state `c_g|g⟩ + c_e|e⟩` (normalised internally).
    pub fn pure(c_g: Complex64, c_e: Complex64) -> Self {
        let n = c_g.norm_sqr() + c_e.norm_sqr();
        Self { rho_gg: c_g.norm_sqr() / n, rho_ee: c_e.norm_sqr() / n, rho_eg: c_e * c_g.conj() / n }
    }

    pub fn rho_ge(&self) -> Complex64 {
        self.rho_eg.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho_gg + self.rho_ee
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        let half_gap = 0.5 * (self.rho_gg - self.rho_ee);
        0.5 * self.trace() - (half_gap * half_gap + self.rho_eg.norm_sqr()).sqrt()
    }

    /// Largest violation of unit trace and positivity.
    pub fn invariant_violation(&self) -> f64 {
        (self.trace() - 1.0).abs().max((-self.min_eigenvalue()).max(0.0))
    }

    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.rho_gg, self.rho_ee, self.rho_eg.re, self.rho_eg.im]
    }

    pub(crate) fn from_slice(y: &[f64]) -> Self {
        Self { rho_gg: y[0], rho_ee: y[1], rho_eg: Complex64::new(y[2], y[3]) }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.rho_gg - other.rho_gg)
            .abs()
            .max((self.rho_ee - other.rho_ee).abs())
            .max((self.rho_eg - other.rho_eg).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_states_are_valid() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix2::pure(Complex64::new(s, 0.0), Complex64::new(0.0, s));
        assert!(plus.invariant_violation() < 1e-15);
        assert!(plus.min_eigenvalue().abs() < 1e-15);
        assert!((plus.rho_eg - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert_eq!(DensityMatrix2::ground().min_eigenvalue(), 0.0);
    }

    #[test]
    fn detects_negative_eigenvalue() {
        let bad = DensityMatrix2 { rho_gg: 0.5, rho_ee: 0.5, rho_eg: Complex64::new(0.6, 0.0) };
        assert!(bad.invariant_violation() > 0.09);
    }
}
