//! Physical flux of the radial Euler equations and the HLLC approximate Riemann solver.

use crate::eos::Eos;

/// Flux triple `(mass, momentum, energy)`.
pub type FluxVector = [f64; 3];

/// Face-side state with derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
    /// Total energy density.
    pub ene: f64,
}

impl PrimState {
    /// From conserved variables `(ρ, ρu, E)`.
    pub fn from_conserved(cons: [f64; 3], eos: &Eos) -> Self {
        let [rho, mom, ene] = cons;
        let u = mom / rho;
        PrimState {
            rho,
            u,
            p: eos.pressure_cons(rho, mom, ene),
            ene,
        }
    }

    pub fn conserved(&self) -> [f64; 3] {
        [self.rho, self.rho * self.u, self.ene]
    }

    /// Sound speed from the active equation of state.
    pub fn sound_speed(&self, eos: &Eos) -> f64 {
        let rho_e = self.ene - 0.5 * self.rho * self.u * self.u;
        eos.sound_speed_sq(self.rho, rho_e).max(0.0).sqrt()
    }
}

/// `f(u) = (ρu, ρu² + p, (E + p)u)`.
#[inline]
pub fn physical_flux(s: &PrimState) -> FluxVector {
    let m = s.rho * s.u;
    [m, m * s.u + s.p, (s.ene + s.p) * s.u]
}

/// HLLC intermediate state on one side.
#[inline]
fn star_state(s: &PrimState, big_s: f64, s_star: f64) -> [f64; 3] {
    let fac = s.rho * (big_s - s.u) / (big_s - s_star);
    [
        fac,
        fac * s_star,
        fac * (s.ene / s.rho + (s_star - s.u) * (s_star + s.p / (s.rho * (big_s - s.u)))),
    ]
}

fn hll(
    fl: FluxVector,
    fr: FluxVector,
    l: &PrimState,
    r: &PrimState,
    sl: f64,
    sr: f64,
) -> FluxVector {
    if sr - sl <= 0.0 {
        return [
            0.5 * (fl[0] + fr[0]),
            0.5 * (fl[1] + fr[1]),
            0.5 * (fl[2] + fr[2]),
        ];
    }
    let ul = l.conserved();
    let ur = r.conserved();
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (sr * fl[i] - sl * fr[i] + sl * sr * (ur[i] - ul[i])) / (sr - sl);
    }
    out
}

/// Signal speeds `(S⁻, S*, S⁺)`; `S*` is `None` when its denominator degenerates.
pub fn signal_speeds(l: &PrimState, r: &PrimState, eos: &Eos) -> (f64, Option<f64>, f64) {
    let cl = l.sound_speed(eos);
    let cr = r.sound_speed(eos);
    let sl = (l.u - cl).min(r.u - cr);
    let sr = (l.u + cl).max(r.u + cr);
    let den = l.rho * (sl - l.u) - r.rho * (sr - r.u);
    if den.abs() < 1e-300 {
        return (sl, None, sr);
    }
    let num = r.p - l.p + l.rho * l.u * (sl - l.u) - r.rho * r.u * (sr - r.u);
    (sl, Some(num / den), sr)
}

/// HLLC numerical flux `f̂(u⁻, u⁺)`.
pub fn hllc(l: &PrimState, r: &PrimState, eos: &Eos) -> FluxVector {
    let fl = physical_flux(l);
    if l == r {
        return fl;
    }
    let (sl, s_star, sr) = signal_speeds(l, r, eos);
    if 0.0 <= sl {
        return fl;
    }
    let fr = physical_flux(r);
    if sr <= 0.0 {
        return fr;
    }
    let Some(ss) = s_star else {
        return hll(fl, fr, l, r, sl, sr);
    };
    if ss >= 0.0 {
        let us = star_state(l, sl, ss);
        let ul = l.conserved();
        [
            fl[0] + sl * (us[0] - ul[0]),
            fl[1] + sl * (us[1] - ul[1]),
            fl[2] + sl * (us[2] - ul[2]),
        ]
    } else {
        let us = star_state(r, sr, ss);
        let ur = r.conserved();
        [
            fr[0] + sr * (us[0] - ur[0]),
            fr[1] + sr * (us[1] - ur[1]),
            fr[2] + sr * (us[2] - ur[2]),
        ]
    }
}
