//! Physical parameters shared by every model.
//!
//! All energies are in units of the Rabi frequency and all times in units of
//! its inverse, so `rabi` is normally 1.

use crate::error::{Error, Result};

/// Parameters of the facilitated chain.
///
/// The nearest-neighbour interaction is stored explicitly so that a violated
/// facilitation condition can be reported, but [`ModelParams::new`] always
/// sets it to `-detuning`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Number of sites, odd and at least 3.
    pub n_sites: usize,
    pub rabi: f64,
    pub detuning: f64,
    pub trap_freq: f64,
    /// Spin-phonon coupling κ.
    pub coupling: f64,
    /// Power-law exponent of the interaction potential.
    pub exponent: u32,
    pub nn_interaction: f64,
    /// Largest phonon number per site (position-space phonon schemes).
    pub site_cutoff: usize,
    /// Largest total phonon number (momentum-mode schemes).
    pub total_cutoff: usize,
}

impl ModelParams {
    pub fn new(n_sites: usize, detuning: f64, trap_freq: f64, coupling: f64) -> Self {
        Self {
            n_sites,
            rabi: 1.0,
            detuning,
            trap_freq,
            coupling,
            exponent: 6,
            nn_interaction: -detuning,
            site_cutoff: 0,
            total_cutoff: 0,
        }
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    pub fn with_site_cutoff(mut self, cutoff: usize) -> Self {
        self.site_cutoff = cutoff;
        self
    }

    pub fn with_total_cutoff(mut self, cutoff: usize) -> Self {
        self.total_cutoff = cutoff;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    /// Returns the parameters unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        let n = self.n_sites;
        if n < 3 {
            return Err(invalid("n_sites", format!("N must be at least 3, got {n}")));
        }
        if n.is_multiple_of(2) {
            return Err(invalid("n_sites", format!("N must be odd, got {n}")));
        }
        if n > 63 {
            return Err(invalid("n_sites", format!("N must fit a 64-bit spin string, got {n}")));
        }
        for (name, v) in [
            ("rabi", self.rabi),
            ("detuning", self.detuning),
            ("trap_freq", self.trap_freq),
            ("coupling", self.coupling),
            ("nn_interaction", self.nn_interaction),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.rabi <= 0.0 {
            return Err(invalid("rabi", format!("must be positive, got {}", self.rabi)));
        }
        if self.trap_freq <= 0.0 {
            return Err(invalid("trap_freq", format!("must be positive, got {}", self.trap_freq)));
        }
        if self.detuning + self.nn_interaction != 0.0 {
            return Err(Error::FacilitationViolation {
                detuning: self.detuning,
                nn_interaction: self.nn_interaction,
            });
        }
        Ok(self)
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

/// Microscopic quantities behind the coupling constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MicroscopicParams {
    /// Interaction coefficient C_γ of `V(r) = C_γ / r^γ`.
    pub c_gamma: f64,
    pub lattice_spacing: f64,
    pub mass: f64,
}

impl MicroscopicParams {
    /// Harmonic oscillator length `(m ω)^(-1/2)`.
    pub fn osc_length(&self, trap_freq: f64) -> f64 {
        (self.mass * trap_freq).sqrt().recip()
    }

    /// Nearest-neighbour interaction `C_γ / a₀^γ`.
    pub fn nn_interaction(&self, gamma: u32) -> f64 {
        self.c_gamma / self.lattice_spacing.powi(gamma as i32)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_gamma", self.c_gamma),
            ("lattice_spacing", self.lattice_spacing),
            ("mass", self.mass),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Spin-phonon coupling `κ = γ C_γ / (a₀^(γ+1) √(2 m ω))`.
///
/// This is the gradient of the pair potential at the lattice spacing times the
/// zero-point displacement scale `1/√(2mω)`.
pub fn kappa_from_microscopic(micro: &MicroscopicParams, gamma: u32, trap_freq: f64) -> Result<f64> {
    micro.validate()?;
    if !(trap_freq > 0.0 && trap_freq.is_finite()) {
        return Err(invalid("trap_freq", format!("must be positive and finite, got {trap_freq}")));
    }
    let g = f64::from(gamma);
    Ok(g * micro.c_gamma
        / (micro.lattice_spacing.powi(gamma as i32 + 1) * (2.0 * micro.mass * trap_freq).sqrt()))
}
