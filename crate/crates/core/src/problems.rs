//! Scenario library: the test problems with their default parameters, initial data,
//! boundary policies and the extra source of the manufactured solution.

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::dg::{DgSpace, StateField};
use crate::eos::{Eos, HybridEos};
use crate::error::{invalid_arg, Error, Result};
use crate::lane_emden::Polytrope;
use crate::limiter::LimiterConfig;
use crate::mesh::Mesh;
use crate::operator::{ghost_state, Boundary, FieldFn, Physics, Scheme};
use crate::poisson::{GravityBc, PhiAnchor};
use crate::well_balanced::EquilibriumMode;

/// Gravitational constant in cgs units.
pub const G_CGS: f64 = 6.6743e-8;

pub const SCENARIOS: [&str; 7] = [
    "wb_gamma2",
    "wb_gamma12",
    "perturbation",
    "manufactured",
    "explosion",
    "toy_collapse",
    "yahil",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    WbGamma2,
    WbGamma12,
    Perturbation,
    Manufactured,
    Explosion,
    ToyCollapse,
    Yahil,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshRecipe {
    Uniform {
        r_min: f64,
        r_max: f64,
        n: usize,
    },
    /// `Δr_j = a^{j-1} Δr_1` starting at `r_min`.
    Geometric {
        r_min: f64,
        dr1: f64,
        a: f64,
        n: usize,
    },
}

impl MeshRecipe {
    pub fn build(&self) -> Result<Mesh> {
        match *self {
            MeshRecipe::Uniform { r_min, r_max, n } => Mesh::uniform(r_min, r_max, n),
            MeshRecipe::Geometric { r_min, dr1, a, n } => Mesh::geometric(r_min, dr1, a, n),
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            MeshRecipe::Uniform { n, .. } | MeshRecipe::Geometric { n, .. } => n,
        }
    }

    pub fn with_n(self, n: usize) -> Self {
        match self {
            MeshRecipe::Uniform { r_min, r_max, .. } => MeshRecipe::Uniform { r_min, r_max, n },
            MeshRecipe::Geometric { r_min, dr1, a, .. } => {
                MeshRecipe::Geometric { r_min, dr1, a, n }
            }
        }
    }
}

/// Which end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Inner,
    Outer,
}

/// Tabulated radial profile `(r, ρ, u)`, linearly interpolated and clamped at the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
}

impl RadialProfile {
    /// Whitespace-separated columns `r ρ [u]`; lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = RadialProfile {
            r: vec![],
            rho: vec![],
            u: vec![],
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("profile line {}: {e}", i + 1)))?;
            if cols.len() < 2 {
                return invalid_arg(format!(
                    "profile line {}: expected at least r and rho",
                    i + 1
                ));
            }
            if let Some(&last) = p.r.last() {
                if !(cols[0] > last) {
                    return invalid_arg(format!("profile line {}: radii must increase", i + 1));
                }
            }
            if !(cols[1] > 0.0) {
                return invalid_arg(format!("profile line {}: density must be positive", i + 1));
            }
            p.r.push(cols[0]);
            p.rho.push(cols[1]);
            p.u.push(cols.get(2).copied().unwrap_or(0.0));
        }
        if p.r.len() < 2 {
            return invalid_arg("profile needs at least two rows");
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn eval(&self, r: f64) -> (f64, f64) {
        let n = self.r.len();
        if r <= self.r[0] {
            return (self.rho[0], self.u[0]);
        }
        if r >= self.r[n - 1] {
            return (self.rho[n - 1], self.u[n - 1]);
        }
        let i = self.r.partition_point(|&x| x <= r) - 1;
        let w = (r - self.r[i]) / (self.r[i + 1] - self.r[i]);
        (
            self.rho[i] + w * (self.rho[i + 1] - self.rho[i]),
            self.u[i] + w * (self.u[i + 1] - self.u[i]),
        )
    }
}

/// A fully specified test problem.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub mesh: MeshRecipe,
    pub k: usize,
    pub rk_order: usize,
    pub gamma: f64,
    pub g: f64,
    pub kappa: f64,
    pub inner: Boundary,
    pub outer: Boundary,
    pub equilibrium: EquilibriumMode,
    pub t_end: f64,
    pub cfl: f64,
    /// Profile snapshot spacing in time; zero writes only the final state.
    pub snapshot_dt: f64,
    /// Multiplies every ledger energy (4π in the astrophysical runs).
    pub energy_factor: f64,
    /// Radius of the sphere averaged for the central density.
    pub central_window: f64,
    /// Stop early once the central density exceeds this value.
    pub stop_rho_c: Option<f64>,
    pub limiter: bool,
    /// Pressure bump amplitude of the perturbation test.
    pub amplitude: f64,
    /// Pressure factor and radius of the explosion test.
    pub alpha: f64,
    pub r1: f64,
    /// Central density of the collapse problems.
    pub rho_c: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_th: f64,
    pub rho_nuc: f64,
    /// Initial profile of the Yahil collapse; a built-in profile is used without it.
    pub profile: Option<PathBuf>,
}

pub const OVERRIDE_KEYS: [&str; 28] = [
    "n",
    "r_min",
    "r_max",
    "dr1",
    "a",
    "k",
    "rk",
    "gamma",
    "g",
    "kappa",
    "inner",
    "outer",
    "equilibrium",
    "t_end",
    "cfl",
    "snapshot_dt",
    "energy_factor",
    "central_window",
    "stop_rho_c",
    "limiter",
    "amplitude",
    "alpha",
    "r1",
    "rho_c",
    "gamma1",
    "gamma2",
    "gamma_th",
    "profile",
];

fn base(name: &str, kind: Kind, mesh: MeshRecipe) -> Scenario {
    Scenario {
        name: name.to_string(),
        kind,
        mesh,
        k: 2,
        rk_order: 3,
        gamma: 2.0,
        g: 1.0 / (4.0 * PI),
        kappa: 1.0,
        inner: Boundary::Reflecting,
        outer: Boundary::Extrapolate,
        equilibrium: EquilibriumMode::Recover,
        t_end: 1.0,
        cfl: 0.16,
        snapshot_dt: 0.0,
        energy_factor: 1.0,
        central_window: 0.0,
        stop_rho_c: None,
        limiter: false,
        amplitude: 0.0,
        alpha: 1.0,
        r1: 0.0,
        rho_c: 1.0,
        gamma1: 1.325,
        gamma2: 2.5,
        gamma_th: 1.5,
        rho_nuc: 2e14,
        profile: None,
    }
}

/// Mesh of the collapse problem: tabulated values for the usual resolutions, otherwise
/// `Δr_1 = 256 km / N` with the rate that places the outer face at 1500 km.
pub fn toy_mesh(n: usize) -> Result<MeshRecipe> {
    let (dr1, a) = match n {
        128 => (2e5, 1.02292),
        256 => (1e5, 1.01136),
        512 => (5e4, 1.005659),
        1024 => (2.5e4, 1.002823),
        2048 => (1.25e4, 1.001410),
        0 => return invalid_arg("cell count must be positive"),
        _ => {
            let dr1 = 2.56e7 / n as f64;
            (dr1, growth_rate_for_extent(dr1, n, 1.5e8)?)
        }
    };
    Ok(MeshRecipe::Geometric {
        r_min: 0.0,
        dr1,
        a,
        n,
    })
}

/// Rate `a ≥ 1` with `Δr₁ (aⁿ - 1)/(a - 1) = extent`, by bisection.
pub fn growth_rate_for_extent(dr1: f64, n: usize, extent: f64) -> Result<f64> {
    let total = |a: f64| {
        if (a - 1.0).abs() < 1e-14 {
            dr1 * n as f64
        } else {
            dr1 * (a.powi(n as i32) - 1.0) / (a - 1.0)
        }
    };
    if total(1.0) > extent {
        return invalid_arg(format!(
            "{n} cells of width {dr1} exceed the extent {extent}"
        ));
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while total(hi) < extent {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < extent {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value {v:?} for {key}")))
}

fn parse_boundary(key: &str, v: &str) -> Result<Boundary> {
    Boundary::parse(v.trim()).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "bad value {v:?} for {key}; expected reflecting, extrapolate, copy or dirichlet"
        ))
    })
}

impl Scenario {
    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => {
                let n: usize = parse_num(key, value)?;
                self.mesh = if self.kind == Kind::ToyCollapse {
                    toy_mesh(n)?
                } else {
                    self.mesh.with_n(n)
                };
            }
            "r_min" | "r_max" | "dr1" | "a" => {
                let x: f64 = parse_num(key, value)?;
                self.mesh = match (self.mesh, key) {
                    (MeshRecipe::Uniform { r_max, n, .. }, "r_min") => {
                        MeshRecipe::Uniform { r_min: x, r_max, n }
                    }
                    (MeshRecipe::Uniform { r_min, n, .. }, "r_max") => {
                        MeshRecipe::Uniform { r_min, r_max: x, n }
                    }
                    (MeshRecipe::Geometric { dr1, a, n, .. }, "r_min") => MeshRecipe::Geometric {
                        r_min: x,
                        dr1,
                        a,
                        n,
                    },
                    (MeshRecipe::Geometric { r_min, a, n, .. }, "dr1") => MeshRecipe::Geometric {
                        r_min,
                        dr1: x,
                        a,
                        n,
                    },
                    (MeshRecipe::Geometric { r_min, dr1, n, .. }, "a") => MeshRecipe::Geometric {
                        r_min,
                        dr1,
                        a: x,
                        n,
                    },
                    _ => {
                        return invalid_arg(format!(
                            "{key} does not apply to the mesh of {}",
                            self.name
                        ))
                    }
                };
            }
            "k" => self.k = parse_num(key, value)?,
            "rk" => self.rk_order = parse_num(key, value)?,
            "gamma" => self.gamma = parse_num(key, value)?,
            "g" => self.g = parse_num(key, value)?,
            "kappa" => self.kappa = parse_num(key, value)?,
            "inner" => self.inner = parse_boundary(key, value)?,
            "outer" => self.outer = parse_boundary(key, value)?,
            "equilibrium" => {
                self.equilibrium = match value.trim() {
                    "recover" => EquilibriumMode::Recover,
                    "disabled" => EquilibriumMode::Disabled,
                    "fixed" => EquilibriumMode::Fixed {
                        rho0: self.rho_c,
                        kappa: self.kappa,
                    },
                    v => return invalid_arg(format!("bad value {v:?} for equilibrium")),
                }
            }
            "t_end" => self.t_end = parse_num(key, value)?,
            "cfl" => self.cfl = parse_num(key, value)?,
            "snapshot_dt" => self.snapshot_dt = parse_num(key, value)?,
            "energy_factor" => self.energy_factor = parse_num(key, value)?,
            "central_window" => self.central_window = parse_num(key, value)?,
            "stop_rho_c" => {
                let x: f64 = parse_num(key, value)?;
                self.stop_rho_c = (x > 0.0).then_some(x);
            }
            "limiter" => self.limiter = parse_num(key, value)?,
            "amplitude" => self.amplitude = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "r1" => self.r1 = parse_num(key, value)?,
            "rho_c" => self.rho_c = parse_num(key, value)?,
            "gamma1" => self.gamma1 = parse_num(key, value)?,
            "gamma2" => self.gamma2 = parse_num(key, value)?,
            "gamma_th" => self.gamma_th = parse_num(key, value)?,
            "profile" => self.profile = Some(PathBuf::from(value.trim())),
            _ => {
                return invalid_arg(format!(
                    "unknown scenario parameter {key:?}; known: {}",
                    OVERRIDE_KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) {
            return invalid_arg(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.cfl > 0.0) {
            return invalid_arg(format!("cfl must be positive, got {}", self.cfl));
        }
        if !(1..=3).contains(&self.rk_order) {
            return invalid_arg(format!("rk must be 1, 2 or 3, got {}", self.rk_order));
        }
        if self.k > 6 {
            return invalid_arg(format!("polynomial degree {} is not supported", self.k));
        }
        if self.g < 0.0 {
            return invalid_arg("gravitational constant must be non-negative");
        }
        self.eos()?;
        self.mesh.build()?;
        Ok(())
    }

    pub fn eos(&self) -> Result<Eos> {
        match self.kind {
            Kind::ToyCollapse => Ok(Eos::Hybrid(HybridEos::new(
                self.kappa,
                self.gamma1,
                self.gamma2,
                self.gamma_th,
                self.rho_nuc,
            )?)),
            _ => Eos::ideal(self.gamma),
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        self.mesh.build()
    }

    pub fn space(&self) -> Result<DgSpace> {
        DgSpace::new(self.build_mesh()?, self.k)
    }

    /// Exact conserved solution, where one is known.
    pub fn exact(&self) -> Option<FieldFn> {
        match self.kind {
            Kind::Manufactured => {
                let gamma = self.gamma;
                Some(Arc::new(move |r: f64, t: f64| {
                    let rho = (t - r).exp() / (r * r);
                    let p = 1.0 / (r * r);
                    [rho, rho, p / (gamma - 1.0) + 0.5 * rho]
                }))
            }
            Kind::WbGamma2 | Kind::WbGamma12 => {
                let this = self.clone();
                Some(Arc::new(move |r: f64, _t: f64| {
                    let [rho, _, p] = this.equilibrium_primitive(r).unwrap_or([f64::NAN; 3]);
                    [rho, 0.0, p / (this.gamma - 1.0)]
                }))
            }
            _ => None,
        }
    }

    /// Closed-form equilibrium `(ρ, u, p)` of the polytropic test problems.
    pub fn equilibrium_primitive(&self, r: f64) -> Option<[f64; 3]> {
        match self.kind {
            Kind::WbGamma2 | Kind::Perturbation => {
                let x = r / SQRT_2;
                let rho = if r == 0.0 { 1.0 } else { x.sin() / x };
                Some([rho, 0.0, rho * rho])
            }
            Kind::WbGamma12 => {
                let b = 1.0 + r * r / 18.0;
                Some([b.powf(-2.5), 0.0, b.powi(-3)])
            }
            Kind::Explosion => {
                let x =
                    (4.0 * PI * self.g * (self.gamma - 1.0) / (self.gamma * self.kappa)).sqrt() * r;
                let rho = if x == 0.0 { 1.0 } else { x.sin() / x };
                Some([rho, 0.0, self.kappa * rho * rho])
            }
            _ => None,
        }
    }

    /// Extra volume source of the manufactured problem; zero elsewhere.
    pub fn extra_source(&self, r: f64, t: f64) -> [f64; 3] {
        match self.kind {
            Kind::Manufactured => {
                let e2 = (2.0 * (t - r)).exp();
                let r4 = r.powi(4);
                [0.0, -(e2 + 2.0 * r) / r4, -e2 / r4]
            }
            _ => [0.0; 3],
        }
    }

    pub fn gravity_bc(&self) -> Arc<dyn Fn(f64) -> GravityBc + Send + Sync> {
        match self.kind {
            Kind::Manufactured => {
                let r0 = self.mesh.build().map(|m| m.r_min()).unwrap_or(0.5);
                Arc::new(move |t: f64| GravityBc {
                    dphi_inner: Some(-(t - r0).exp() / (r0 * r0)),
                    anchor: PhiAnchor::Inner(0.0),
                })
            }
            _ => Arc::new(|_| GravityBc {
                dphi_inner: None,
                anchor: PhiAnchor::Outer(0.0),
            }),
        }
    }

    /// Operator configuration for the chosen scheme variant.
    pub fn physics(&self, scheme: Scheme, limiter: LimiterConfig) -> Result<Physics> {
        let source: Option<FieldFn> = match self.kind {
            Kind::Manufactured => {
                let this = self.clone();
                Some(Arc::new(move |r, t| this.extra_source(r, t)))
            }
            _ => None,
        };
        Ok(Physics {
            eos: self.eos()?,
            g: self.g,
            scheme,
            equilibrium: self.equilibrium,
            inner: self.inner,
            outer: self.outer,
            gravity_bc: self.gravity_bc(),
            exact: self.exact(),
            source,
            limiter,
        })
    }

    /// Default limiter settings of the problem.
    pub fn limiter_config(&self) -> LimiterConfig {
        LimiterConfig {
            enabled: self.limiter,
            ..LimiterConfig::default()
        }
    }

    /// Boundary state at `end` for the trace `interior` of the scheme's boundary face.
    pub fn ghost_states(&self, interior: [f64; 3], end: End, t: f64) -> Result<[f64; 3]> {
        let mesh = self.build_mesh()?;
        let (policy, r) = match end {
            End::Inner => (self.inner, mesh.r_min()),
            End::Outer => (self.outer, mesh.r_max()),
        };
        ghost_state(policy, interior, r, t, self.exact().as_ref())
    }
}

/// Scenario `name` with its default parameters, then `overrides` applied in order.
pub fn make_scenario(name: &str, overrides: &[(&str, &str)]) -> Result<Scenario> {
    let uniform = |r_min, r_max, n| MeshRecipe::Uniform { r_min, r_max, n };
    let mut s = match name {
        "wb_gamma2" => Scenario {
            t_end: 4.0,
            ..base(name, Kind::WbGamma2, uniform(0.0, 1.0, 200))
        },
        "wb_gamma12" => Scenario {
            t_end: 4.0,
            gamma: 1.2,
            ..base(name, Kind::WbGamma12, uniform(0.0, 1.0, 200))
        },
        "perturbation" => Scenario {
            t_end: 0.2,
            amplitude: 1e-6,
            outer: Boundary::Copy,
            ..base(name, Kind::Perturbation, uniform(0.0, 0.5, 100))
        },
        "manufactured" => Scenario {
            t_end: 0.1,
            inner: Boundary::Dirichlet,
            outer: Boundary::Dirichlet,
            equilibrium: EquilibriumMode::Fixed {
                rho0: 1.0,
                kappa: 1.0,
            },
            ..base(name, Kind::Manufactured, uniform(0.5, 1.0, 25))
        },
        "explosion" => Scenario {
            t_end: 0.15,
            g: 1.0,
            alpha: 10.0,
            r1: 0.1,
            outer: Boundary::Reflecting,
            limiter: true,
            ..base(name, Kind::Explosion, uniform(0.0, 0.5, 200))
        },
        "toy_collapse" => Scenario {
            t_end: 0.11,
            gamma: 4.0 / 3.0,
            g: G_CGS,
            kappa: 4.897e14,
            rho_c: 1e10,
            energy_factor: 4.0 * PI,
            central_window: 2e5,
            limiter: true,
            ..base(name, Kind::ToyCollapse, toy_mesh(128)?)
        },
        "yahil" => Scenario {
            t_end: 0.1495,
            gamma: 1.3,
            g: G_CGS,
            kappa: 9.54e14,
            rho_c: 1e9,
            energy_factor: 4.0 * PI,
            central_window: 2e5,
            stop_rho_c: Some(1e14),
            limiter: true,
            ..base(
                name,
                Kind::Yahil,
                MeshRecipe::Geometric {
                    r_min: 0.0,
                    dr1: 1e5,
                    a: 1.03203,
                    n: 256,
                },
            )
        },
        _ => {
            return invalid_arg(format!(
                "unknown scenario {name:?}; available: {}",
                SCENARIOS.join(", ")
            ))
        }
    };
    for (k, v) in overrides {
        s.set(k, v)?;
    }
    s.validate()?;
    Ok(s)
}

/// Length scale `α` of the `γ` polytrope with central density `rho_c`.
fn polytrope_scale(gamma: f64, kappa: f64, rho_c: f64, g: f64) -> f64 {
    (gamma / (gamma - 1.0) * kappa * rho_c.powf(gamma - 2.0) / (4.0 * PI * g)).sqrt()
}

/// Built-in Yahil initial data: a core of radius `r_c` matched to the `γ` polytrope with
/// the self-similar power-law tails `ρ ∝ r^{-2/(2-γ)}` and `u ∝ r^{(1-γ)/(2-γ)}`.
pub fn yahil_fallback(s: &Scenario) -> impl Fn(f64) -> (f64, f64) {
    let gamma = s.gamma;
    let n = 1.0 / (gamma - 1.0);
    let alpha = polytrope_scale(gamma, s.kappa, s.rho_c, s.g);
    // Same curvature at the centre as θⁿ(r/α).
    let rc = alpha * (6.0 / (n * (2.0 - gamma))).sqrt();
    let rho_c = s.rho_c;
    let v_c = YAHIL_INFALL * (s.kappa * rho_c.powf(gamma - 1.0)).sqrt();
    move |r: f64| {
        let x = r / rc;
        let b = 1.0 + x * x;
        let rho = rho_c * b.powf(-1.0 / (2.0 - gamma));
        let u = -v_c * x * b.powf(-0.5 - 0.5 * (gamma - 1.0) / (2.0 - gamma));
        (rho, u)
    }
}

/// Infall speed of the built-in Yahil profile in units of the central sound speed scale.
const YAHIL_INFALL: f64 = 0.5;

/// Pointwise initial conserved fields `r -> (ρ, ρu, E)` of `s`.
pub type InitialFn<'a> = Box<dyn Fn(f64) -> [f64; 3] + 'a>;

pub fn initial_fields(s: &Scenario) -> Result<InitialFn<'_>> {
    let eos = s.eos()?;
    let f: InitialFn<'_> = match s.kind {
        Kind::WbGamma2 | Kind::WbGamma12 => Box::new(move |r| {
            let [rho, _, p] = s.equilibrium_primitive(r).expect("closed form");
            [rho, 0.0, p / (s.gamma - 1.0)]
        }),
        Kind::Perturbation => Box::new(move |r| {
            let [rho, _, p] = s.equilibrium_primitive(r).expect("closed form");
            let p = p + s.amplitude * (-100.0 * r * r).exp();
            [rho, 0.0, p / (s.gamma - 1.0)]
        }),
        Kind::Manufactured => {
            let f = s.exact().expect("manufactured exact solution");
            Box::new(move |r| f(r, 0.0))
        }
        Kind::Explosion => Box::new(move |r| {
            let [rho, _, p] = s.equilibrium_primitive(r).expect("closed form");
            let p = if r <= s.r1 { s.alpha * p } else { p };
            [rho, 0.0, p / (s.gamma - 1.0)]
        }),
        Kind::ToyCollapse => {
            let poly = Polytrope::for_index(1.0 / (s.gamma - 1.0))?;
            let alpha = polytrope_scale(s.gamma, s.kappa, s.rho_c, s.g);
            let n = poly.index();
            Box::new(move |r| {
                let th = poly.theta_admissible(r / alpha).unwrap_or(0.0);
                let rho = s.rho_c * th.powf(n);
                [rho, 0.0, s.kappa * rho.powf(s.gamma1) / (s.gamma1 - 1.0)]
            })
        }
        Kind::Yahil => {
            let prof: Box<dyn Fn(f64) -> (f64, f64)> = match &s.profile {
                Some(path) => {
                    let p = RadialProfile::load(path)?;
                    Box::new(move |r| p.eval(r))
                }
                None => Box::new(yahil_fallback(s)),
            };
            Box::new(move |r| {
                let (rho, u) = prof(r);
                let p = s.kappa * rho.powf(s.gamma);
                [
                    rho,
                    rho * u,
                    eos.rho_e_from_pressure(rho, p) + 0.5 * rho * u * u,
                ]
            })
        }
    };
    Ok(f)
}

/// Projected initial state of `s` on `space`.
pub fn initial_state(s: &Scenario, space: &DgSpace) -> Result<StateField> {
    let state = StateField::project(space, initial_fields(s)?)?;
    let rho = space.at_nodes(&state.rho);
    let mut traces = (0..space.n_cells()).flat_map(|j| {
        [
            space.trace_left(&state.rho, j),
            space.trace_right(&state.rho, j),
        ]
    });
    if !state.is_finite() || rho.iter().any(|v| !(*v > 0.0)) || traces.any(|v| !(v > 0.0)) {
        return Err(Error::InvalidState(format!(
            "initial data of {} has a non-positive density",
            s.name
        )));
    }
    Ok(state)
}

/// Time and value of the maximum of `rho_c`, when it is attained before the last sample.
pub fn bounce(times: &[f64], rho_c: &[f64]) -> Option<(f64, f64)> {
    let (i, &m) = rho_c
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite densities"))?;
    (i + 1 < rho_c.len()).then(|| (times[i], m))
}
