//! Recovery of the target polytropic equilibrium and the split `u = u^e + u^f`.

use std::f64::consts::PI;

use crate::dg::{DgSpace, StateField};
use crate::eos::Eos;
use crate::error::{invalid_arg, Result};
use crate::lane_emden::Polytrope;
use crate::poisson::{solve_gravity, GravityBc, PhiAnchor};
use crate::quadrature::Quadrature;

/// How the target equilibrium is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquilibriumMode {
    /// From the central traces of the current state, at every stage.
    Recover,
    /// A fixed polytrope with the given central density and `κ`.
    Fixed { rho0: f64, kappa: f64 },
    /// No equilibrium: the scheme reduces to standard DG.
    Disabled,
}

/// The continuous polytrope `ρ^d = ρ₀ θ^n(r/α)`, `p^d = p₀ θ^{n+1}(r/α)`.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub rho0: f64,
    pub p0: f64,
    pub gamma: f64,
    pub kappa: f64,
    /// Length scale; infinite without gravity.
    pub alpha: f64,
    poly: Polytrope,
}

impl Equilibrium {
    pub fn new(rho0: f64, p0: f64, gamma: f64, g: f64) -> Result<Self> {
        if !(rho0 > 0.0 && p0 > 0.0) {
            return invalid_arg(format!("equilibrium needs rho0, p0 > 0, got {rho0}, {p0}"));
        }
        if !(gamma > 1.0) {
            return invalid_arg(format!("equilibrium needs gamma > 1, got {gamma}"));
        }
        let kappa = p0 / rho0.powf(gamma);
        let alpha = if g > 0.0 {
            (gamma / (gamma - 1.0) * kappa * rho0.powf(gamma - 2.0) / (4.0 * PI * g)).sqrt()
        } else {
            f64::INFINITY
        };
        let poly = Polytrope::for_index(1.0 / (gamma - 1.0))?;
        Ok(Equilibrium {
            rho0,
            p0,
            gamma,
            kappa,
            alpha,
            poly,
        })
    }

    pub fn index(&self) -> f64 {
        self.poly.index()
    }

    /// `(ρ^d, p^d)` at `r`, or `None` where θ leaves its admissible range.
    #[inline]
    pub fn eval(&self, r: f64) -> Option<(f64, f64)> {
        let xi = if self.alpha.is_finite() {
            r / self.alpha
        } else {
            0.0
        };
        let th = if xi == 0.0 {
            1.0
        } else {
            self.poly.theta_admissible(xi)?
        };
        let n = 1.0 / (self.gamma - 1.0);
        let rho_th = th.powf(n);
        Some((self.rho0 * rho_th, self.p0 * rho_th * th))
    }

    /// `∂Φ^d/∂r` at `r` by quadrature of the enclosed mass.
    pub fn enclosed_dphi(&self, r: f64, g: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let q = Quadrature::gauss_legendre(48);
        let m = q.integrate(0.0, r, |t| self.eval(t).map_or(0.0, |(rho, _)| rho) * t * t);
        4.0 * PI * g * m / (r * r)
    }
}

/// Equilibrium part of the current state and everything derived from it.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub equilibrium: Option<Equilibrium>,
    /// Cells where `u^d` is switched off.
    pub masked: Vec<bool>,
    /// Gauss–Radau projection of `u^d`.
    pub ue: StateField,
    /// `u^d` (conserved, zero momentum) at the left and right face of every cell.
    pub ud_left: Vec<[f64; 3]>,
    pub ud_right: Vec<[f64; 3]>,
    pub pd_left: Vec<f64>,
    pub pd_right: Vec<f64>,
    /// `p^e`, `ρ^e` and `r² ∂Φ^e/∂r` at the quadrature nodes.
    pub pe_nodes: Vec<f64>,
    pub rhoe_nodes: Vec<f64>,
    pub qe_nodes: Vec<f64>,
}

impl Decomposition {
    /// Everything zero, every cell masked.
    pub fn disabled(space: &DgSpace) -> Self {
        let n = space.n_cells();
        let nn = n * space.nq();
        Decomposition {
            equilibrium: None,
            masked: vec![true; n],
            ue: StateField::zeros(space),
            ud_left: vec![[0.0; 3]; n],
            ud_right: vec![[0.0; 3]; n],
            pd_left: vec![0.0; n],
            pd_right: vec![0.0; n],
            pe_nodes: vec![0.0; nn],
            rhoe_nodes: vec![0.0; nn],
            qe_nodes: vec![0.0; nn],
        }
    }

    pub fn is_active(&self) -> bool {
        self.masked.iter().any(|m| !m)
    }

    /// Fluctuation `u^f = u - u^e`.
    pub fn fluctuation(&self, state: &StateField) -> StateField {
        state.sub(&self.ue)
    }

    /// Modified state `u^{*,+}` at the left face of cell `j`.
    #[inline]
    pub fn star_left(&self, space: &DgSpace, state: &StateField, j: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let uh = space.trace_left(state.component(c), j);
            *o = if self.masked[j] {
                uh
            } else {
                self.ud_left[j][c] + (uh - space.trace_left(self.ue.component(c), j))
            };
        }
        out
    }

    /// Cell average of `u` in cell `j`, shifted to `u^d` at face `face` when `u^d` is active:
    /// `u^d(r_face) + avg(u - u^e)`.
    pub fn star_mean(
        &self,
        space: &DgSpace,
        state: &StateField,
        j: usize,
        face: usize,
    ) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let m = space.weighted_average(state.component(c), j);
            *o = if self.masked[j] {
                m
            } else {
                let ud = if face == j {
                    self.ud_left[j][c]
                } else {
                    self.ud_right[j][c]
                };
                ud + m - space.weighted_average(self.ue.component(c), j)
            };
        }
        out
    }

    /// Modified state `u^{*,-}` at the right face of cell `j`.
    #[inline]
    pub fn star_right(&self, space: &DgSpace, state: &StateField, j: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let uh = space.trace_right(state.component(c), j);
            *o = if self.masked[j] {
                uh
            } else {
                self.ud_right[j][c] + (uh - space.trace_right(self.ue.component(c), j))
            };
        }
        out
    }
}

/// Builds the decomposition of `state`.
///
/// In `Recover` mode the central density and pressure are the right traces of the first
/// cell; a non-positive value switches the equilibrium off for this call.
pub fn decompose(
    space: &DgSpace,
    state: &StateField,
    eos: &Eos,
    g: f64,
    mode: EquilibriumMode,
) -> Result<Decomposition> {
    let mesh = space.mesh();
    let (eq, recovering) = match mode {
        EquilibriumMode::Disabled => return Ok(Decomposition::disabled(space)),
        EquilibriumMode::Recover => {
            if mesh.r_min() != 0.0 {
                return invalid_arg("equilibrium recovery needs a mesh starting at the origin");
            }
            let rho0 = space.trace_left(&state.rho, 0);
            let p0 = eos.pressure_cons(
                rho0,
                space.trace_left(&state.mom, 0),
                space.trace_left(&state.ene, 0),
            );
            if !(rho0 > 0.0 && p0 > 0.0) || !rho0.is_finite() || !p0.is_finite() {
                return Ok(Decomposition::disabled(space));
            }
            let gamma = eos.equilibrium_gamma(rho0);
            (Equilibrium::new(rho0, p0, gamma, g)?, true)
        }
        EquilibriumMode::Fixed { rho0, kappa } => {
            let gamma = eos.equilibrium_gamma(rho0);
            (
                Equilibrium::new(rho0, kappa * rho0.powf(gamma), gamma, g)?,
                false,
            )
        }
    };

    let n = space.n_cells();
    let nq = space.nq();
    let nb = space.nb();
    let mut d = Decomposition::disabled(space);
    let mut node_rho = vec![0.0; nq];
    let mut node_ene = vec![0.0; nq];
    let lv = space.left_values();

    'cells: for j in 0..n {
        let (rl, rr) = (mesh.left(j), mesh.right(j));
        let Some((rho_l, p_l)) = eq.eval(rl) else {
            continue;
        };
        let Some((rho_r, p_r)) = eq.eval(rr) else {
            continue;
        };
        if recovering {
            let rho_h = space.trace_left(&state.rho, j);
            let p_h = eos.pressure_cons(
                rho_h,
                space.trace_left(&state.mom, j),
                space.trace_left(&state.ene, j),
            );
            if rho_l > 2.0 * rho_h || p_l > 2.0 * p_h {
                continue;
            }
        }
        for (iq, &r) in space.nodes(j).iter().enumerate() {
            let Some((rho, p)) = eq.eval(r) else {
                continue 'cells;
            };
            node_rho[iq] = rho;
            node_ene[iq] = eos.rho_e_from_pressure(rho, p);
        }
        let e_l = eos.rho_e_from_pressure(rho_l, p_l);
        let mut c_rho = vec![0.0; nb];
        let mut c_ene = vec![0.0; nb];
        space.radau_cell(&node_rho, rho_l, &mut c_rho);
        space.radau_cell(&node_ene, e_l, &mut c_ene);

        // Projected values must stay positive at every node and both faces.
        let eval_at =
            |c: &[f64], basis: &[f64]| c.iter().zip(basis).map(|(a, b)| a * b).sum::<f64>();
        let right_trace = |c: &[f64]| c.iter().sum::<f64>();
        let mut rhoe = vec![0.0; nq];
        let mut pe = vec![0.0; nq];
        for iq in 0..nq {
            let b = space.basis_at(iq);
            let (re, ee) = (eval_at(&c_rho, b), eval_at(&c_ene, b));
            if !(re > 0.0 && ee > 0.0) {
                continue 'cells;
            }
            rhoe[iq] = re;
            pe[iq] = eos.pressure_rho_e(re, ee);
        }
        for c in [&c_rho, &c_ene] {
            if !(eval_at(c, lv) > 0.0 && right_trace(c) > 0.0) {
                continue 'cells;
            }
        }

        d.masked[j] = false;
        d.ue.rho.cell_mut(j).copy_from_slice(&c_rho);
        d.ue.ene.cell_mut(j).copy_from_slice(&c_ene);
        d.ud_left[j] = [rho_l, 0.0, e_l];
        d.ud_right[j] = [rho_r, 0.0, eos.rho_e_from_pressure(rho_r, p_r)];
        d.pd_left[j] = p_l;
        d.pd_right[j] = p_r;
        d.pe_nodes[j * nq..(j + 1) * nq].copy_from_slice(&pe);
        d.rhoe_nodes[j * nq..(j + 1) * nq].copy_from_slice(&rhoe);
    }

    if d.is_active() {
        let r0 = mesh.r_min();
        let dphi_inner = if r0 == 0.0 {
            None
        } else {
            Some(eq.enclosed_dphi(r0, g))
        };
        let grav = solve_gravity(
            space,
            &d.ue.rho,
            g,
            GravityBc {
                dphi_inner,
                anchor: PhiAnchor::Outer(0.0),
            },
        )?;
        d.qe_nodes.copy_from_slice(&grav.q_nodes);
    }
    d.equilibrium = Some(eq);
    Ok(d)
}
