//! Minmod slope limiter in spherical geometry: troubled cells are rebuilt as linear
//! polynomials that keep their `r²`-weighted averages.

use crate::dg::{DGField, DgSpace, StateField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterConfig {
    pub enabled: bool,
    /// Factor applied to the neighbour slopes.
    pub beta: f64,
    /// TVB threshold: slopes with `|Δu| <= M Δr²` are left alone.
    pub m: f64,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        LimiterConfig {
            enabled: false,
            beta: 1.75,
            m: 0.0,
        }
    }
}

impl LimiterConfig {
    pub fn enabled() -> Self {
        LimiterConfig {
            enabled: true,
            ..Default::default()
        }
    }
}

pub fn minmod(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Plain and `r²`-weighted averages of `field` on cell `j`.
pub fn averages(space: &DgSpace, field: &DGField, j: usize) -> (f64, f64) {
    (space.average(field, j), space.weighted_average(field, j))
}

/// `(Δu_j, minmod(Δu_j, βΔu^F, βΔu^B))` for cell `j`. Past the outer face the ghost
/// average equals the cell's own (zero forward slope); at the inner face the missing
/// slope is replaced by the interior one.
fn slopes(space: &DgSpace, field: &DGField, j: usize, cfg: &LimiterConfig) -> (f64, f64) {
    let mesh = space.mesh();
    let n = mesh.n_cells();
    let h = mesh.width(j);
    let interior = (space.trace_right(field, j) - space.trace_left(field, j)) / h;
    if cfg.m > 0.0 && interior.abs() <= cfg.m * h * h {
        return (interior, interior);
    }
    let avg = |i: usize| space.average(field, i);
    let fwd = if j + 1 < n {
        (avg(j + 1) - avg(j)) / (mesh.center(j + 1) - mesh.center(j))
    } else {
        0.0
    };
    let bwd = if j > 0 {
        (avg(j) - avg(j - 1)) / (mesh.center(j) - mesh.center(j - 1))
    } else {
        interior
    };
    (interior, minmod(interior, cfg.beta * fwd, cfg.beta * bwd))
}

/// Relative size below which a slope change is treated as round-off.
const NOISE: f64 = 1e-11;

/// Cells where any component of `indicator` has its slope modified by minmod by more
/// than `NOISE · scale[c] / Δr`.
pub fn detect(
    space: &DgSpace,
    indicator: &StateField,
    scale: [f64; 3],
    cfg: &LimiterConfig,
) -> Vec<bool> {
    let mesh = space.mesh();
    (0..space.n_cells())
        .map(|j| {
            (0..3).any(|c| {
                let (a, m) = slopes(space, indicator.component(c), j, cfg);
                (a - m).abs() * mesh.width(j) > NOISE * scale[c]
            })
        })
        .collect()
}

/// Largest `|cell average|` of each component. The momentum scale is at least
/// `√(ρE)`, of the order of `ρc`, so a fluid at rest still has a meaningful floor.
pub fn magnitudes(space: &DgSpace, state: &StateField) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        *o = (0..space.n_cells())
            .map(|j| space.average(state.component(c), j).abs())
            .fold(0.0, f64::max);
    }
    out[1] = out[1].max((out[0] * out[2]).sqrt());
    out
}

/// Replaces cell `j` of `field` by the linear polynomial with slope `slope` about the
/// midpoint and the same weighted average.
pub fn rebuild_linear(space: &DgSpace, field: &mut DGField, j: usize, slope: f64) {
    let mesh = space.mesh();
    let h = mesh.width(j);
    let rc = mesh.center(j);
    let wavg = space.weighted_average(field, j);
    let offset: f64 = space
        .nodes(j)
        .iter()
        .zip(space.weights_r2(j))
        .map(|(r, w)| w * (r - rc))
        .sum::<f64>()
        / space.r2_integral(j);
    let c = field.cell_mut(j);
    c.iter_mut().for_each(|v| *v = 0.0);
    c[0] = wavg - slope * offset;
    if c.len() > 1 {
        c[1] = slope * 0.5 * h;
    }
}

/// Limits `state` in place using `indicator` (for instance `u - u^e`) to flag cells.
/// Returns the troubled-cell mask.
pub fn apply(
    space: &DgSpace,
    state: &mut StateField,
    indicator: &StateField,
    cfg: &LimiterConfig,
) -> Vec<bool> {
    if !cfg.enabled || space.degree() == 0 {
        return vec![false; space.n_cells()];
    }
    let troubled = detect(space, indicator, magnitudes(space, state), cfg);
    if !troubled.iter().any(|&t| t) {
        return troubled;
    }
    for c in 0..3 {
        let snapshot = state.component(c).clone();
        let new_slopes: Vec<(usize, f64)> = troubled
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(j, _)| (j, slopes(space, &snapshot, j, cfg).1))
            .collect();
        let field = state.component_mut(c);
        for (j, s) in new_slopes {
            rebuild_linear(space, field, j, s);
        }
    }
    troubled
}

/// Adds `½∫(ρΦ - ρ̃Φ̃) r² dr / ∫ r² dr` to every cell of `ene`. Potentials are node values.
pub fn energy_correction(
    space: &DgSpace,
    ene: &mut DGField,
    rho_pre: &DGField,
    phi_pre: &[f64],
    rho_post: &DGField,
    phi_post: &[f64],
) {
    let q = space.nq();
    let pre = space.at_nodes(rho_pre);
    let post = space.at_nodes(rho_post);
    for j in 0..space.n_cells() {
        let w = space.weights_r2(j);
        let mut acc = 0.0;
        for iq in 0..q {
            let i = j * q + iq;
            acc += w[iq] * 0.5 * (pre[i] * phi_pre[i] - post[i] * phi_post[i]);
        }
        ene.cell_mut(j)[0] += acc / space.r2_integral(j);
    }
}
