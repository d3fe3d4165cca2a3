//! Equations of state: ideal gas and the hybrid polytropic + thermal model
//! used for the core-collapse toy problem.

use crate::error::{invalid_arg, invalid_state, Result};

/// `p = (γ - 1) ρ e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGas {
    pub gamma: f64,
}

impl IdealGas {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return invalid_arg(format!("ideal gas needs gamma > 1, got {gamma}"));
        }
        Ok(IdealGas { gamma })
    }
}

/// Piecewise polytrope stiffening at `rho_nuc`, plus a thermal ideal-gas part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridEos {
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_th: f64,
    pub rho_nuc: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl HybridEos {
    pub fn new(kappa: f64, gamma1: f64, gamma2: f64, gamma_th: f64, rho_nuc: f64) -> Result<Self> {
        if !(kappa > 0.0) || !(rho_nuc > 0.0) {
            return invalid_arg("hybrid EoS needs kappa > 0 and rho_nuc > 0");
        }
        if !(gamma1 > 1.0 && gamma2 > 1.0 && gamma_th > 1.0) {
            return invalid_arg("hybrid EoS indices must exceed 1");
        }
        let e1 = kappa / (gamma1 - 1.0);
        let e2 = kappa / (gamma2 - 1.0) * rho_nuc.powf(gamma1 - gamma2);
        let e3 = (gamma2 - gamma1) / (gamma2 - 1.0) * e1 * rho_nuc.powf(gamma1 - 1.0);
        Ok(HybridEos {
            kappa,
            gamma1,
            gamma2,
            gamma_th,
            rho_nuc,
            e1,
            e2,
            e3,
            kappa1: kappa,
            kappa2: (gamma2 - 1.0) * e2,
        })
    }

    /// Toy-collapse defaults apart from `kappa`.
    pub fn toy(kappa: f64) -> Self {
        HybridEos::new(kappa, 1.325, 2.5, 1.5, 2e14).expect("valid toy parameters")
    }

    /// `(p_p, (ρe)_p)` on the active branch.
    pub fn polytropic_parts(&self, rho: f64) -> (f64, f64) {
        if rho < self.rho_nuc {
            let r = rho.powf(self.gamma1);
            (self.kappa1 * r, self.e1 * r)
        } else {
            let r = rho.powf(self.gamma2);
            (self.kappa2 * r, self.e2 * r + self.e3 * rho)
        }
    }

    /// Index of the active polytropic branch.
    pub fn branch_gamma(&self, rho: f64) -> f64 {
        if rho < self.rho_nuc {
            self.gamma1
        } else {
            self.gamma2
        }
    }

    /// Closed form of the complete EoS, branch by branch.
    pub fn pressure_closed_form(&self, rho: f64, rho_e: f64) -> f64 {
        let gth = self.gamma_th;
        if rho < self.rho_nuc {
            (gth - 1.0) * rho_e
                + (self.gamma1 - gth) / (self.gamma1 - 1.0) * self.kappa * rho.powf(self.gamma1)
        } else {
            (gth - 1.0) * rho_e
                + (self.gamma2 - gth) / (self.gamma2 - 1.0)
                    * self.kappa
                    * self.rho_nuc.powf(self.gamma1 - self.gamma2)
                    * rho.powf(self.gamma2)
                - (gth - 1.0) * (self.gamma2 - self.gamma1)
                    / ((self.gamma2 - 1.0) * (self.gamma1 - 1.0))
                    * self.kappa
                    * self.rho_nuc.powf(self.gamma1 - 1.0)
                    * rho
        }
    }
}

/// The two supported equations of state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eos {
    Ideal(IdealGas),
    Hybrid(HybridEos),
}

impl Eos {
    pub fn ideal(gamma: f64) -> Result<Self> {
        Ok(Eos::Ideal(IdealGas::new(gamma)?))
    }

    /// Pressure from density and internal energy density `ρe`. No positivity checks.
    #[inline]
    pub fn pressure_rho_e(&self, rho: f64, rho_e: f64) -> f64 {
        match self {
            Eos::Ideal(g) => (g.gamma - 1.0) * rho_e,
            Eos::Hybrid(h) => {
                let (pp, ep) = h.polytropic_parts(rho);
                pp + (h.gamma_th - 1.0) * (rho_e - ep)
            }
        }
    }

    /// Pressure from density and specific internal energy.
    pub fn pressure(&self, rho: f64, e: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return invalid_state(format!("pressure requested at non-positive density {rho}"));
        }
        Ok(self.pressure_rho_e(rho, rho * e))
    }

    /// Pressure from conserved variables `(ρ, ρu, E)`.
    #[inline]
    pub fn pressure_cons(&self, rho: f64, mom: f64, ene: f64) -> f64 {
        self.pressure_rho_e(rho, ene - 0.5 * mom * mom / rho)
    }

    /// Squared sound speed from density and `ρe`. May be negative for unphysical states.
    #[inline]
    pub fn sound_speed_sq(&self, rho: f64, rho_e: f64) -> f64 {
        match self {
            Eos::Ideal(g) => g.gamma * (g.gamma - 1.0) * rho_e / rho,
            Eos::Hybrid(h) => {
                let (pp, ep) = h.polytropic_parts(rho);
                let pth = (h.gamma_th - 1.0) * (rho_e - ep);
                (h.branch_gamma(rho) * pp + h.gamma_th * pth) / rho
            }
        }
    }

    /// Sound speed from density and specific internal energy.
    pub fn sound_speed(&self, rho: f64, e: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return invalid_state(format!(
                "sound speed requested at non-positive density {rho}"
            ));
        }
        let c2 = self.sound_speed_sq(rho, rho * e);
        if !(c2 >= 0.0) {
            return invalid_state(format!("negative squared sound speed {c2} at rho = {rho}"));
        }
        Ok(c2.sqrt())
    }

    /// Internal energy density `ρe` that gives pressure `p` at density `rho`.
    #[inline]
    pub fn rho_e_from_pressure(&self, rho: f64, p: f64) -> f64 {
        match self {
            Eos::Ideal(g) => p / (g.gamma - 1.0),
            Eos::Hybrid(h) => {
                let (pp, ep) = h.polytropic_parts(rho);
                ep + (p - pp) / (h.gamma_th - 1.0)
            }
        }
    }

    /// Adiabatic index used to pick the Lane–Emden polytrope at central density `rho0`.
    pub fn equilibrium_gamma(&self, rho0: f64) -> f64 {
        match self {
            Eos::Ideal(g) => g.gamma,
            Eos::Hybrid(h) => h.branch_gamma(rho0),
        }
    }
}
