//! Energy budget, central density and L¹ error measurements.

use std::f64::consts::PI;

use crate::dg::{DgSpace, StateField};
use crate::eos::Eos;
use crate::poisson::GravityField;
use crate::quadrature::Quadrature;
use crate::stepper::StepRecord;

/// Energy components, each `factor · ∫ (·) r² dr`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Energies {
    pub e_int: f64,
    pub e_kin: f64,
    pub e_grav: f64,
    pub e_tot: f64,
}

/// `E_int = ∫(E - ½ρu²)`, `E_kin = ∫½ρu²`, `E_grav = ∫½ρΦ`, all with the `r²` weight times `factor`.
pub fn energies(space: &DgSpace, u: &StateField, grav: &GravityField, factor: f64) -> Energies {
    let q = space.nq();
    let rho = space.at_nodes(&u.rho);
    let mom = space.at_nodes(&u.mom);
    let ene = space.at_nodes(&u.ene);
    let mut out = Energies::default();
    let mut e_all = 0.0;
    for j in 0..space.n_cells() {
        let w = space.weights_r2(j);
        for iq in 0..q {
            let i = j * q + iq;
            let kin = if rho[i] != 0.0 {
                0.5 * mom[i] * mom[i] / rho[i]
            } else {
                0.0
            };
            out.e_kin += w[iq] * kin;
            out.e_grav += w[iq] * 0.5 * rho[i] * grav.phi_nodes[i];
            e_all += w[iq] * ene[i];
        }
    }
    out.e_int = factor * (e_all - out.e_kin);
    out.e_kin *= factor;
    out.e_grav *= factor;
    out.e_tot = factor * e_all + out.e_grav;
    out
}

/// `∫ (E + ½ρΦ) r² dr` without any prefactor.
pub fn total_energy(space: &DgSpace, u: &StateField, grav: &GravityField) -> f64 {
    energies(space, u, grav, 1.0).e_tot
}

/// Boundary contribution at one face to the step budget.
fn face_budget(
    r: f64,
    flux: [f64; 3],
    phi_avg: f64,
    old: (f64, f64),
    new: (f64, f64),
    dt: f64,
    g: f64,
) -> f64 {
    let mut b = dt * r * r * (flux[2] + flux[0] * phi_avg);
    if g != 0.0 {
        // old/new are (Φ, r² ∂Φ/∂r).
        b -= (old.1 * new.0 - new.1 * old.0) / (8.0 * PI * g);
    }
    b
}

/// Energy defect of one step: `E_new - E_old` plus the energy that left through the
/// boundaries, including the potential-work terms. Zero for an exactly conservative step.
pub fn delta_e_step(
    e_old: f64,
    e_new: f64,
    rec: &StepRecord,
    faces: &[f64],
    g: f64,
    factor: f64,
) -> f64 {
    let n = faces.len() - 1;
    let outer = face_budget(
        faces[n],
        rec.flux_outer,
        rec.phi_avg_outer,
        rec.grav_old[1],
        rec.grav_new[1],
        rec.dt,
        g,
    );
    let inner = face_budget(
        faces[0],
        rec.flux_inner,
        rec.phi_avg_inner,
        rec.grav_old[0],
        rec.grav_new[0],
        rec.dt,
        g,
    );
    e_new - e_old + factor * (outer - inner)
}

/// Running energy ledger.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub energies: Energies,
    pub de_step: f64,
    pub de_cum: f64,
    pub rho_c: f64,
}

impl EnergyLedger {
    pub fn start(t: f64, e: Energies, rho_c: f64) -> Self {
        EnergyLedger {
            rows: vec![LedgerRow {
                t,
                energies: e,
                de_step: 0.0,
                de_cum: 0.0,
                rho_c,
            }],
            cumulative: 0.0,
        }
    }

    pub fn last(&self) -> Option<&LedgerRow> {
        self.rows.last()
    }

    pub fn push(&mut self, t: f64, e: Energies, de_step: f64, rho_c: f64) {
        self.cumulative += de_step;
        self.rows.push(LedgerRow {
            t,
            energies: e,
            de_step,
            de_cum: self.cumulative,
            rho_c,
        });
    }

    pub const HEADER: &'static str = "t,E_int,E_kin,E_grav,E_tot,dE_step,dE_cum,rho_c";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format_row(r));
            s.push('\n');
        }
        s
    }

    /// Largest `|ΔE|` accumulated at any time.
    pub fn max_abs_cumulative(&self) -> f64 {
        self.rows.iter().map(|r| r.de_cum.abs()).fold(0.0, f64::max)
    }
}

pub fn format_row(r: &LedgerRow) -> String {
    let e = &r.energies;
    format!(
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        r.t, e.e_int, e.e_kin, e.e_grav, e.e_tot, r.de_step, r.de_cum, r.rho_c
    )
}

/// Volume-weighted mean density over `r < window`; the first cell when the window is smaller.
pub fn central_density(space: &DgSpace, u: &StateField, window: f64) -> f64 {
    let mesh = space.mesh();
    if !(window > mesh.right(0)) {
        return space.weighted_average(&u.rho, 0);
    }
    let quad = Quadrature::gauss_legendre(space.nq());
    let (mut m, mut v) = (0.0, 0.0);
    for j in 0..space.n_cells() {
        let (a, b) = (mesh.left(j), mesh.right(j).min(window));
        if b <= a {
            break;
        }
        let h = mesh.width(j);
        let c = u.rho.cell(j);
        m += quad.integrate(a, b, |r| {
            let xi = 2.0 * (r - mesh.left(j)) / h - 1.0;
            let p = crate::quadrature::legendre_all(c.len() - 1, xi);
            c.iter().zip(&p).map(|(x, y)| x * y).sum::<f64>() * r * r
        });
        v += (b.powi(3) - a.powi(3)) / 3.0;
    }
    m / v
}

/// `∫|f| dr` over `[a, b]` split at `breaks`, with `q` Gauss points per piece.
pub fn integrate_abs_piecewise(breaks: &[f64], q: usize, f: impl Fn(f64) -> f64) -> f64 {
    let quad = Quadrature::gauss_legendre(q);
    breaks
        .windows(2)
        .map(|w| quad.integrate(w[0], w[1], |r| f(r).abs()))
        .sum()
}

/// Sorted union of two face lists.
pub fn merged_faces(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).expect("finite faces"));
    all.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * x.abs().max(1.0));
    all
}

/// Conserved variables at `r`.
pub fn sample(space: &DgSpace, u: &StateField, r: f64) -> [f64; 3] {
    let e = |f| space.eval(f, r).unwrap_or(f64::NAN);
    [e(&u.rho), e(&u.mom), e(&u.ene)]
}

/// `(ρ, u, p)` at `r`.
pub fn sample_primitive(space: &DgSpace, u: &StateField, eos: &Eos, r: f64) -> [f64; 3] {
    let [rho, mom, ene] = sample(space, u, r);
    [rho, mom / rho, eos.pressure_cons(rho, mom, ene)]
}

/// Per-variable `∫|u_h - u_ref| dr` with plain `dr` weighting.
pub fn l1_error(space: &DgSpace, u: &StateField, reference: impl Fn(f64) -> [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    let vals = [
        space.at_nodes(&u.rho),
        space.at_nodes(&u.mom),
        space.at_nodes(&u.ene),
    ];
    let q = space.nq();
    for j in 0..space.n_cells() {
        let w = space.weights_dr(j);
        for (iq, &r) in space.nodes(j).iter().enumerate() {
            let ex = reference(r);
            for c in 0..3 {
                out[c] += w[iq] * (vals[c][j * q + iq] - ex[c]).abs();
            }
        }
    }
    out
}

/// Per-variable L¹ distance between two solutions on possibly different meshes.
pub fn l1_distance(sa: &DgSpace, ua: &StateField, sb: &DgSpace, ub: &StateField) -> [f64; 3] {
    let breaks = merged_faces(sa.mesh().faces(), sb.mesh().faces());
    let q = sa.nq().max(sb.nq());
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        *o = integrate_abs_piecewise(&breaks, q, |r| {
            sa.eval(ua.component(c), r).unwrap_or(f64::NAN)
                - sb.eval(ub.component(c), r).unwrap_or(f64::NAN)
        });
    }
    out
}
