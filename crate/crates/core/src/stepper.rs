//! Time integration: forward Euler, RK2 and SSP-RK3 with the stage-wise
//! gravity-work terms that make the total energy telescope.

use crate::dg::StateField;
use crate::error::{invalid_arg, Error, Result};
use crate::limiter;
use crate::operator::{Solver, Stage, StageEval};
use crate::riemann::FluxVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    ForwardEuler,
    Rk2,
    Rk3,
}

impl TimeScheme {
    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            1 => Ok(TimeScheme::ForwardEuler),
            2 => Ok(TimeScheme::Rk2),
            3 => Ok(TimeScheme::Rk3),
            _ => invalid_arg(format!("unsupported Runge-Kutta order {order}")),
        }
    }

    pub fn order(self) -> usize {
        match self {
            TimeScheme::ForwardEuler => 1,
            TimeScheme::Rk2 => 2,
            TimeScheme::Rk3 => 3,
        }
    }
}

/// Boundary data of a completed step, enough to close the energy budget.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub dt: f64,
    /// Stage-weighted flux at the inner and outer face.
    pub flux_inner: FluxVector,
    pub flux_outer: FluxVector,
    /// `½(Φⁿ + Φⁿ⁺¹)` at the inner and outer face, with the unlimited `Φⁿ⁺¹`.
    pub phi_avg_inner: f64,
    pub phi_avg_outer: f64,
    /// `(Φ, r²∂Φ/∂r)` at the inner and outer face before and after the step
    /// (the latter from the unlimited density).
    pub grav_old: [(f64, f64); 2],
    pub grav_new: [(f64, f64); 2],
    /// Number of troubled cells in the final stage.
    pub troubled: usize,
}

/// Scalar inputs of one stage update `u = base + dt Σ wᵢ Lᵢ`.
pub struct StageUpdate<'a> {
    pub evals: &'a [(&'a StageEval, f64)],
    pub dt: f64,
    pub t_new: f64,
}

impl Solver {
    /// `cfl · min Δr / max(|u| + c)`.
    pub fn cfl_dt(&self, u: &StateField, cfl: f64) -> Result<f64> {
        if !(cfl > 0.0) {
            return invalid_arg(format!("CFL number must be positive, got {cfl}"));
        }
        let s = self.max_wave_speed(u)?;
        if !(s > 0.0) {
            return Err(Error::InvalidState("zero wave speed".into()));
        }
        Ok(cfl * self.space.mesh().min_width() / s)
    }

    fn combine(&self, evals: &[(&StageEval, f64)], comp: usize) -> Vec<f64> {
        let mut out = vec![0.0; evals[0].0.rhs[comp].len()];
        for (e, w) in evals {
            for (o, v) in out.iter_mut().zip(&e.rhs[comp]) {
                *o += w * v;
            }
        }
        out
    }

    /// Runs one stage: density, gravity, momentum, energy, limiter, energy fix.
    pub fn advance(&self, base: &Stage, upd: &StageUpdate) -> Result<(Stage, StepRecord)> {
        let space = &self.space;
        let n = space.n_cells();
        let nb = space.nb();
        let nq = space.nq();
        let mesh = space.mesh();
        let faces = mesh.faces();
        let dt = upd.dt;
        let tec = self.physics.scheme.tec();

        let mut u = base.u.clone();
        for comp in 0..2 {
            let mut r = self.combine(upd.evals, comp);
            space.apply_inverse_mass(&mut r, self.parallel);
            u.component_mut(comp)
                .coeffs
                .iter_mut()
                .zip(&r)
                .for_each(|(c, d)| *c += dt * d);
        }
        let grav_new = self.gravity(&u.rho, upd.t_new)?;

        let mut flux_comb = vec![[0.0; 3]; n + 1];
        for (e, w) in upd.evals {
            for (fc, f) in flux_comb.iter_mut().zip(&e.flux) {
                for c in 0..3 {
                    fc[c] += w * f[c];
                }
            }
        }
        let phi_face_avg: Vec<f64> = base
            .grav
            .phi_face
            .iter()
            .zip(&grav_new.phi_face)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();

        let mut re = self.combine(upd.evals, 2);
        if tec {
            let mut mom_comb = vec![0.0; n * nq];
            for (e, w) in upd.evals {
                for (m, v) in mom_comb.iter_mut().zip(&e.mom_nodes) {
                    *m += w * v;
                }
            }
            let rho_old = space.at_nodes(&base.u.rho);
            let rho_new = space.at_nodes(&u.rho);
            let lv = space.left_values();
            for j in 0..n {
                let (rl, rr, h) = (mesh.left(j), mesh.right(j), mesh.width(j));
                let jac = 2.0 / h;
                let wr2 = space.weights_r2(j);
                let cell = &mut re[j * nb..(j + 1) * nb];
                let fr = rr * rr * flux_comb[j + 1][0] * phi_face_avg[j + 1];
                let fl = rl * rl * flux_comb[j][0] * phi_face_avg[j];
                for (a, v) in cell.iter_mut().enumerate() {
                    *v -= fr - fl * lv[a];
                }
                for iq in 0..nq {
                    let i = j * nq + iq;
                    let phi_avg = 0.5 * (base.grav.phi_nodes[i] + grav_new.phi_nodes[i]);
                    let window = wr2[iq] * (rho_new[i] - rho_old[i]) / dt * phi_avg;
                    let vol = wr2[iq] * mom_comb[i] * phi_avg * jac;
                    let (b, db) = (space.basis_at(iq), space.dbasis_at(iq));
                    for a in 0..nb {
                        cell[a] += vol * db[a] - window * b[a];
                    }
                }
            }
        }
        space.apply_inverse_mass(&mut re, self.parallel);
        u.ene
            .coeffs
            .iter_mut()
            .zip(&re)
            .for_each(|(c, d)| *c += dt * d);

        let mut troubled = 0;
        let mut grav_final = None;
        if self.physics.limiter.enabled {
            let indicator = if self.physics.scheme.well_balanced() {
                let d = self.decomposition(&u)?;
                d.fluctuation(&u)
            } else {
                u.clone()
            };
            let pre_rho = u.rho.clone();
            let mask = limiter::apply(space, &mut u, &indicator, &self.physics.limiter);
            troubled = mask.iter().filter(|&&t| t).count();
            if troubled > 0 {
                let g = self.gravity(&u.rho, upd.t_new)?;
                if tec {
                    limiter::energy_correction(
                        space,
                        &mut u.ene,
                        &pre_rho,
                        &grav_new.phi_nodes,
                        &u.rho,
                        &g.phi_nodes,
                    );
                }
                grav_final = Some(g);
            }
        }

        let record = StepRecord {
            dt,
            flux_inner: flux_comb[0],
            flux_outer: flux_comb[n],
            phi_avg_inner: phi_face_avg[0],
            phi_avg_outer: phi_face_avg[n],
            grav_old: [
                (
                    base.grav.phi_face[0],
                    faces[0] * faces[0] * base.grav.dphi_face[0],
                ),
                (
                    base.grav.phi_face[n],
                    faces[n] * faces[n] * base.grav.dphi_face[n],
                ),
            ],
            grav_new: [
                (
                    grav_new.phi_face[0],
                    faces[0] * faces[0] * grav_new.dphi_face[0],
                ),
                (
                    grav_new.phi_face[n],
                    faces[n] * faces[n] * grav_new.dphi_face[n],
                ),
            ],
            troubled,
        };
        let grav = grav_final.unwrap_or(grav_new);
        Ok((
            Stage {
                u,
                grav,
                t: upd.t_new,
            },
            record,
        ))
    }

    fn checked(&self, stage: Stage) -> Result<Stage> {
        let rho = self.space.at_nodes(&stage.u.rho);
        if !stage.u.is_finite() {
            return Err(Error::InvalidState("non-finite coefficients".into()));
        }
        if let Some((i, v)) = rho.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::InvalidState(format!(
                "non-positive density {v} at r = {}",
                self.space.all_nodes()[i]
            )));
        }
        Ok(stage)
    }

    /// One full time step of size `dt`.
    pub fn step(&self, base: &Stage, dt: f64, scheme: TimeScheme) -> Result<(Stage, StepRecord)> {
        let t = base.t;
        let e0 = self.evaluate(base)?;
        match scheme {
            TimeScheme::ForwardEuler => {
                let (s, rec) = self.advance(
                    base,
                    &StageUpdate {
                        evals: &[(&e0, 1.0)],
                        dt,
                        t_new: t + dt,
                    },
                )?;
                Ok((self.checked(s)?, rec))
            }
            TimeScheme::Rk2 => {
                let (s1, _) = self.advance(
                    base,
                    &StageUpdate {
                        evals: &[(&e0, 1.0)],
                        dt,
                        t_new: t + dt,
                    },
                )?;
                let s1 = self.checked(s1)?;
                let e1 = self.evaluate(&s1)?;
                let (s, rec) = self.advance(
                    base,
                    &StageUpdate {
                        evals: &[(&e0, 0.5), (&e1, 0.5)],
                        dt,
                        t_new: t + dt,
                    },
                )?;
                Ok((self.checked(s)?, rec))
            }
            TimeScheme::Rk3 => {
                let (s1, _) = self.advance(
                    base,
                    &StageUpdate {
                        evals: &[(&e0, 1.0)],
                        dt,
                        t_new: t + dt,
                    },
                )?;
                let s1 = self.checked(s1)?;
                let e1 = self.evaluate(&s1)?;
                let (s2, _) = self.advance(
                    base,
                    &StageUpdate {
                        evals: &[(&e0, 0.5), (&e1, 0.5)],
                        dt: 0.5 * dt,
                        t_new: t + 0.5 * dt,
                    },
                )?;
                let s2 = self.checked(s2)?;
                let e2 = self.evaluate(&s2)?;
                let w = 1.0 / 6.0;
                let (s, rec) = self.advance(
                    base,
                    &StageUpdate {
                        evals: &[(&e0, w), (&e1, w), (&e2, 4.0 * w)],
                        dt,
                        t_new: t + dt,
                    },
                )?;
                Ok((self.checked(s)?, rec))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::DgSpace;
    use crate::diagnostics::{delta_e_step, total_energy};
    use crate::eos::Eos;
    use crate::limiter::LimiterConfig;
    use crate::mesh::Mesh;
    use crate::operator::{Boundary, Physics, Scheme};
    use crate::poisson::{GravityBc, PhiAnchor};
    use crate::well_balanced::EquilibriumMode;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn physics(scheme: Scheme, limiter: bool) -> Physics {
        Physics {
            eos: Eos::ideal(2.0).unwrap(),
            g: 1.0,
            scheme,
            equilibrium: EquilibriumMode::Recover,
            inner: Boundary::Reflecting,
            outer: Boundary::Extrapolate,
            gravity_bc: Arc::new(|_| GravityBc {
                dphi_inner: None,
                anchor: PhiAnchor::Outer(0.0),
            }),
            exact: None,
            source: None,
            limiter: if limiter {
                LimiterConfig::enabled()
            } else {
                LimiterConfig::default()
            },
        }
    }

    fn bumpy(space: &DgSpace) -> StateField {
        StateField::project(space, |r| {
            let rho = 1.0 + 0.3 * (-(r - 0.3f64).powi(2) * 40.0).exp();
            let p = if r < 0.15 { 2.0 } else { 0.8 };
            [rho, 0.2 * r, p + 0.5 * (0.2 * r).powi(2) / rho]
        })
        .unwrap()
    }

    #[test]
    fn telescoping_on_four_cells() {
        for scheme in [TimeScheme::ForwardEuler, TimeScheme::Rk2, TimeScheme::Rk3] {
            for limiter in [false, true] {
                let space = DgSpace::new(Mesh::uniform(0.0, 1.0, 4).unwrap(), 2).unwrap();
                let solver = Solver::new(space.clone(), physics(Scheme::WellBalanced, limiter));
                let s0 = solver.stage(bumpy(&space), 0.0).unwrap();
                let dt = solver.cfl_dt(&s0.u, 0.16).unwrap();
                let (s1, rec) = solver.step(&s0, dt, scheme).unwrap();
                let e0 = total_energy(&space, &s0.u, &s0.grav);
                let e1 = total_energy(&space, &s1.u, &s1.grav);
                let de = delta_e_step(e0, e1, &rec, space.mesh().faces(), 1.0, 1.0);
                assert!(
                    (de / e0).abs() < 1e-12,
                    "{scheme:?} limiter={limiter}: {de} vs {e0}"
                );
                assert!(
                    (e1 - e0).abs() > 1e-10,
                    "the test should move energy through the boundary"
                );
            }
        }
    }

    #[test]
    fn rk3_preserves_equilibrium() {
        for lim in [false, true] {
            let space = DgSpace::new(Mesh::uniform(0.0, 1.0, 40).unwrap(), 2).unwrap();
            let mut ph = physics(Scheme::WellBalanced, lim);
            ph.g = 1.0 / (4.0 * PI);
            let solver = Solver::new(space.clone(), ph);
            let u = StateField::project(&space, |r| {
                let x = r / 2f64.sqrt();
                let rho = if r == 0.0 {
                    1.0
                } else {
                    2f64.sqrt() * x.sin() / r
                };
                [rho, 0.0, rho * rho]
            })
            .unwrap();
            let s0 = solver.stage(u.clone(), 0.0).unwrap();
            let dt = solver.cfl_dt(&u, 0.16).unwrap();
            for scheme in [TimeScheme::ForwardEuler, TimeScheme::Rk2, TimeScheme::Rk3] {
                let (s1, rec) = solver.step(&s0, dt, scheme).unwrap();
                assert_eq!(rec.troubled, 0);
                for c in 0..3 {
                    for (a, b) in s1.u.component(c).coeffs.iter().zip(&u.component(c).coeffs) {
                        assert!(
                            (a - b).abs() <= 1e-13 * (1.0 + b.abs()),
                            "{scheme:?} lim={lim} c={c}: {a} vs {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cfl_scaling() {
        let mk = |n| {
            let space = DgSpace::new(Mesh::uniform(0.0, 1.0, n).unwrap(), 1).unwrap();
            let solver = Solver::new(space.clone(), physics(Scheme::Standard, false));
            // c = 1: p = 0.5, γ = 2, ρ = 1.
            let u = StateField::project(&space, |_| [1.0, 0.0, 0.5]).unwrap();
            solver.cfl_dt(&u, 0.16).unwrap()
        };
        assert!((mk(100) - 0.0016).abs() < 1e-15);
        assert!((mk(200) - 0.0008).abs() < 1e-15);
    }

    #[test]
    fn gravity_free_tec_matches_standard() {
        let space = DgSpace::new(Mesh::uniform(0.0, 1.0, 8).unwrap(), 2).unwrap();
        let mut a = physics(Scheme::Standard, false);
        a.g = 0.0;
        let mut b = a.clone();
        b.scheme = Scheme::StandardTec;
        let (sa, sb) = (Solver::new(space.clone(), a), Solver::new(space.clone(), b));
        let u = bumpy(&space);
        let s0 = sa.stage(u, 0.0).unwrap();
        let (x, _) = sa.step(&s0, 1e-3, TimeScheme::Rk3).unwrap();
        let (y, _) = sb.step(&s0, 1e-3, TimeScheme::Rk3).unwrap();
        assert_eq!(x.u, y.u);
    }

    #[test]
    fn order_ratio_selection() {
        assert_eq!(TimeScheme::from_order(3).unwrap(), TimeScheme::Rk3);
        assert!(TimeScheme::from_order(4).is_err());
    }
}
