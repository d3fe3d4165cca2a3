//! Semi-discrete right-hand side: numerical fluxes, volume terms and sources.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dg::{DGField, DgSpace, StateField};
use crate::eos::Eos;
use crate::error::{invalid_state, Error, Result};
use crate::limiter::LimiterConfig;
use crate::poisson::{solve_gravity, GravityBc, GravityField};
use crate::riemann::{hllc, FluxVector, PrimState};
use crate::well_balanced::{decompose, Decomposition, EquilibriumMode};

/// Which terms of the scheme are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Well-balanced flux and momentum source, energy-conserving gravity work.
    WellBalanced,
    /// Plain DG with the pointwise gravity source.
    Standard,
    /// Plain flux and momentum source, energy-conserving gravity work.
    StandardTec,
}

impl Scheme {
    pub fn well_balanced(self) -> bool {
        matches!(self, Scheme::WellBalanced)
    }
    pub fn tec(self) -> bool {
        !matches!(self, Scheme::Standard)
    }
    pub fn name(self) -> &'static str {
        match self {
            Scheme::WellBalanced => "wb",
            Scheme::Standard => "standard",
            Scheme::StandardTec => "standard_tec",
        }
    }
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wb" | "well_balanced" => Some(Scheme::WellBalanced),
            "standard" => Some(Scheme::Standard),
            "standard_tec" | "standard+correction" => Some(Scheme::StandardTec),
            _ => None,
        }
    }
}

/// Boundary policy for the Euler equations at one end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Mirror density and energy, negate momentum.
    Reflecting,
    /// Zeroth-order extrapolation: the ghost is the average of the boundary cell (taken on
    /// the fluctuation when the well-balanced decomposition is active).
    Extrapolate,
    /// Copy the interior trace.
    Copy,
    /// Exact solution at the current time.
    Dirichlet,
}

impl Boundary {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reflecting" => Some(Boundary::Reflecting),
            "extrapolate" => Some(Boundary::Extrapolate),
            "copy" | "symmetric_copy" => Some(Boundary::Copy),
            "dirichlet" => Some(Boundary::Dirichlet),
            _ => None,
        }
    }
}

/// Exterior state at a boundary face given the interior value (the trace, or the cell
/// average for `Extrapolate`).
pub fn ghost_state(
    policy: Boundary,
    interior: [f64; 3],
    r: f64,
    t: f64,
    exact: Option<&FieldFn>,
) -> Result<[f64; 3]> {
    match policy {
        Boundary::Reflecting => Ok([interior[0], -interior[1], interior[2]]),
        Boundary::Extrapolate | Boundary::Copy => Ok(interior),
        Boundary::Dirichlet => match exact {
            Some(f) => Ok(f(r, t)),
            None => invalid_state("Dirichlet boundary without an exact solution"),
        },
    }
}

/// `(r, t) -> (ρ, ρu, E)`-shaped function.
pub type FieldFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;
/// Time-dependent gravity boundary data.
pub type GravityBcFn = Arc<dyn Fn(f64) -> GravityBc + Send + Sync>;

/// Everything that defines the discrete operator apart from the state.
#[derive(Clone)]
pub struct Physics {
    pub eos: Eos,
    pub g: f64,
    pub scheme: Scheme,
    pub equilibrium: EquilibriumMode,
    pub inner: Boundary,
    pub outer: Boundary,
    pub gravity_bc: GravityBcFn,
    /// Exact conserved solution, needed by Dirichlet boundaries.
    pub exact: Option<FieldFn>,
    /// Extra volume source added to every equation.
    pub source: Option<FieldFn>,
    pub limiter: LimiterConfig,
}

impl fmt::Debug for Physics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Physics")
            .field("eos", &self.eos)
            .field("g", &self.g)
            .field("scheme", &self.scheme)
            .field("equilibrium", &self.equilibrium)
            .field("inner", &self.inner)
            .field("outer", &self.outer)
            .field("exact", &self.exact.is_some())
            .field("source", &self.source.is_some())
            .field("limiter", &self.limiter)
            .finish()
    }
}

/// A state together with its potential.
#[derive(Debug, Clone)]
pub struct Stage {
    pub u: StateField,
    pub grav: GravityField,
    pub t: f64,
}

/// One evaluation of the spatial operator.
#[derive(Debug, Clone)]
pub struct StageEval {
    /// Residuals of `(ρ, ρu, E)` before the mass-matrix solve. The energy residual
    /// excludes the gravity work when the scheme uses the energy-conserving form.
    pub rhs: [Vec<f64>; 3],
    /// Numerical flux at every face.
    pub flux: Vec<FluxVector>,
    /// `ρu` at the quadrature nodes.
    pub mom_nodes: Vec<f64>,
}

/// Discrete operator on a fixed space.
#[derive(Debug, Clone)]
pub struct Solver {
    pub space: DgSpace,
    pub physics: Physics,
    pub parallel: bool,
}

fn abort(msg: String) -> Error {
    Error::InvalidState(msg)
}

impl Solver {
    pub fn new(space: DgSpace, physics: Physics) -> Self {
        Solver {
            space,
            physics,
            parallel: true,
        }
    }

    pub fn gravity(&self, rho: &DGField, t: f64) -> Result<GravityField> {
        solve_gravity(
            &self.space,
            rho,
            self.physics.g,
            (self.physics.gravity_bc)(t),
        )
    }

    pub fn stage(&self, u: StateField, t: f64) -> Result<Stage> {
        let grav = self.gravity(&u.rho, t)?;
        Ok(Stage { u, grav, t })
    }

    /// Equilibrium split of `u` for the active scheme.
    pub fn decomposition(&self, u: &StateField) -> Result<Decomposition> {
        if self.physics.scheme.well_balanced() {
            decompose(
                &self.space,
                u,
                &self.physics.eos,
                self.physics.g,
                self.physics.equilibrium,
            )
        } else {
            Ok(Decomposition::disabled(&self.space))
        }
    }

    fn ghost(&self, policy: Boundary, interior: [f64; 3], r: f64, t: f64) -> Result<[f64; 3]> {
        ghost_state(policy, interior, r, t, self.physics.exact.as_ref())
    }

    fn prim(&self, cons: [f64; 3], r: f64) -> Result<PrimState> {
        if !(cons[0] > 0.0) || !cons.iter().all(|v| v.is_finite()) {
            return Err(abort(format!("invalid face state {cons:?} at r = {r}")));
        }
        Ok(PrimState::from_conserved(cons, &self.physics.eos))
    }

    /// Numerical fluxes at all faces, using the modified states of `decomp`.
    pub fn face_fluxes(
        &self,
        u: &StateField,
        decomp: &Decomposition,
        t: f64,
    ) -> Result<Vec<FluxVector>> {
        let space = &self.space;
        let n = space.n_cells();
        let faces = space.mesh().faces();
        let eos = &self.physics.eos;
        let one = |i: usize| -> Result<FluxVector> {
            let minus = if i == 0 {
                let inner = match self.physics.inner {
                    Boundary::Extrapolate => decomp.star_mean(space, u, 0, 0),
                    _ => decomp.star_left(space, u, 0),
                };
                self.ghost(self.physics.inner, inner, faces[0], t)?
            } else {
                decomp.star_right(space, u, i - 1)
            };
            let plus = if i == n {
                let outer = match self.physics.outer {
                    Boundary::Extrapolate => decomp.star_mean(space, u, n - 1, n),
                    _ => decomp.star_right(space, u, n - 1),
                };
                self.ghost(self.physics.outer, outer, faces[n], t)?
            } else {
                decomp.star_left(space, u, i)
            };
            let f = hllc(
                &self.prim(minus, faces[i])?,
                &self.prim(plus, faces[i])?,
                eos,
            );
            if !f.iter().all(|v| v.is_finite()) {
                return Err(abort(format!(
                    "non-finite flux at face {i} (r = {})",
                    faces[i]
                )));
            }
            Ok(f)
        };
        if self.parallel {
            (0..=n).into_par_iter().map(one).collect()
        } else {
            (0..=n).map(one).collect()
        }
    }

    /// Evaluates the spatial operator at `stage`.
    pub fn evaluate(&self, stage: &Stage) -> Result<StageEval> {
        let decomp = self.decomposition(&stage.u)?;
        self.evaluate_with(stage, &decomp)
    }

    pub fn evaluate_with(&self, stage: &Stage, decomp: &Decomposition) -> Result<StageEval> {
        let space = &self.space;
        let u = &stage.u;
        let t = stage.t;
        let n = space.n_cells();
        let nb = space.nb();
        let nq = space.nq();
        let mesh = space.mesh();
        let eos = &self.physics.eos;
        let scheme = self.physics.scheme;
        let flux = self.face_fluxes(u, decomp, t)?;

        let rho_n = space.at_nodes(&u.rho);
        let mom_n = space.at_nodes(&u.mom);
        let ene_n = space.at_nodes(&u.ene);
        let lv = space.left_values();

        let cell = |j: usize| -> Result<[[f64; 16]; 3]> {
            let mut out = [[0.0f64; 16]; 3];
            let (rl, rr, h) = (mesh.left(j), mesh.right(j), mesh.width(j));
            let jac = 2.0 / h;
            let wr2 = space.weights_r2(j);
            let wdr = space.weights_dr(j);
            let nodes = space.nodes(j);
            let (fl, fr) = (flux[j], flux[j + 1]);
            for iq in 0..nq {
                let i = j * nq + iq;
                let (rho, mom, ene) = (rho_n[i], mom_n[i], ene_n[i]);
                if !(rho > 0.0) || !mom.is_finite() || !ene.is_finite() {
                    return Err(abort(format!(
                        "invalid state rho = {rho} at r = {}",
                        nodes[iq]
                    )));
                }
                let vel = mom / rho;
                let p = eos.pressure_cons(rho, mom, ene);
                let f = [mom, mom * vel + p, (ene + p) * vel];
                let r = nodes[iq];
                let q = stage.grav.q_nodes[i];
                let phi = space.basis_at(iq);
                let dphi = space.dbasis_at(iq);
                let s2 = wdr[iq] * (2.0 * p * r - rho * q);
                let s3 = if scheme.tec() {
                    0.0
                } else {
                    -wdr[iq] * mom * q
                };
                let w = self.physics.source.as_ref().map(|src| src(r, t));
                for a in 0..nb {
                    for c in 0..3 {
                        out[c][a] += wr2[iq] * f[c] * dphi[a] * jac;
                    }
                    out[1][a] += s2 * phi[a];
                    out[2][a] += s3 * phi[a];
                    if let Some(w) = w {
                        for c in 0..3 {
                            out[c][a] += wr2[iq] * w[c] * phi[a];
                        }
                    }
                }
            }
            for a in 0..nb {
                for c in 0..3 {
                    out[c][a] += -rr * rr * fr[c] + rl * rl * fl[c] * lv[a];
                }
            }
            if scheme.well_balanced() && !decomp.masked[j] {
                let (pl, pr) = (decomp.pd_left[j], decomp.pd_right[j]);
                for a in 0..nb {
                    out[1][a] += rr * rr * pr - rl * rl * pl * lv[a];
                }
                for iq in 0..nq {
                    let i = j * nq + iq;
                    let r = nodes[iq];
                    let pe = decomp.pe_nodes[i];
                    let src = wdr[iq] * (2.0 * pe * r - decomp.rhoe_nodes[i] * decomp.qe_nodes[i]);
                    let vol = wr2[iq] * pe * jac;
                    let (phi, dphi) = (space.basis_at(iq), space.dbasis_at(iq));
                    for a in 0..nb {
                        out[1][a] -= vol * dphi[a] + src * phi[a];
                    }
                }
            }
            Ok(out)
        };

        let cells: Vec<[[f64; 16]; 3]> = if self.parallel {
            (0..n).into_par_iter().map(cell).collect::<Result<_>>()?
        } else {
            (0..n).map(cell).collect::<Result<_>>()?
        };
        let mut rhs = [vec![0.0; n * nb], vec![0.0; n * nb], vec![0.0; n * nb]];
        for (j, c) in cells.iter().enumerate() {
            for comp in 0..3 {
                rhs[comp][j * nb..(j + 1) * nb].copy_from_slice(&c[comp][..nb]);
            }
        }
        Ok(StageEval {
            rhs,
            flux,
            mom_nodes: mom_n,
        })
    }

    /// Largest `|u| + c` over all quadrature nodes.
    pub fn max_wave_speed(&self, u: &StateField) -> Result<f64> {
        let eos = &self.physics.eos;
        let rho = self.space.at_nodes(&u.rho);
        let mom = self.space.at_nodes(&u.mom);
        let ene = self.space.at_nodes(&u.ene);
        let mut smax = 0.0f64;
        for i in 0..rho.len() {
            if !(rho[i] > 0.0) {
                return invalid_state(format!("non-positive density {} at node {i}", rho[i]));
            }
            let vel = mom[i] / rho[i];
            let c2 = eos.sound_speed_sq(rho[i], ene[i] - 0.5 * mom[i] * vel);
            let s = vel.abs() + c2.max(0.0).sqrt();
            if !s.is_finite() {
                return invalid_state(format!("non-finite wave speed at node {i}"));
            }
            smax = smax.max(s);
        }
        Ok(smax)
    }
}
