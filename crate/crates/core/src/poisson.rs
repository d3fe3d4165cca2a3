//! Exact cell-by-cell integration of the spherical Poisson equation for a
//! piecewise-polynomial density.
//!
//! In cell `j` with left face `a` and local offset `s = r - a`:
//!
//! ```text
//! Q(s)   = r² ∂Φ/∂r = 4πG M(s) + a² ∂Φ/∂r(a),   M(s) = ∫₀ˢ ρ (a+σ)² dσ
//! Φ(r)   = C_j + 4πG N(s) - Q(s) / r,            N(s) = ∫₀ˢ ρ (a+σ) dσ
//! ```
//!
//! Both polynomials are stored in `s` to keep round-off under control at
//! large radii.

use std::f64::consts::PI;

use crate::dg::{DGField, DgSpace};
use crate::error::{invalid_arg, Error, Result};

/// Which face pins the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiAnchor {
    /// `Φ(R)` given; the potential is integrated inward.
    Outer(f64),
    /// `Φ(r_min)` given; the potential is integrated outward.
    Inner(f64),
    /// `Φ(R) = -G M(R) / R`, the potential of the enclosed mass seen from outside.
    Isolated,
}

/// Boundary data for the gravity solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityBc {
    /// `∂Φ/∂r` at the inner face. Must be zero (or absent) when the mesh starts at the origin.
    pub dphi_inner: Option<f64>,
    pub anchor: PhiAnchor,
}

impl Default for GravityBc {
    fn default() -> Self {
        GravityBc {
            dphi_inner: None,
            anchor: PhiAnchor::Outer(0.0),
        }
    }
}

/// Closed-form `∂Φ/∂r` and `Φ` for one density field.
#[derive(Debug, Clone)]
pub struct GravityField {
    g: f64,
    /// Left face of each cell.
    a: Vec<f64>,
    width: Vec<f64>,
    /// Coefficients of `Q(s)`, `deg = k + 3`, per cell.
    qpoly: Vec<f64>,
    /// Coefficients of `N(s)`, `deg = k + 2`, per cell.
    npoly: Vec<f64>,
    /// Integration constant per cell.
    cst: Vec<f64>,
    deg_q: usize,
    faces: Vec<f64>,
    /// `∂Φ/∂r` at every face.
    pub dphi_face: Vec<f64>,
    /// `Φ` at every face.
    pub phi_face: Vec<f64>,
    /// `Φ` at the quadrature nodes, cell-major.
    pub phi_nodes: Vec<f64>,
    /// `r² ∂Φ/∂r` at the quadrature nodes, cell-major.
    pub q_nodes: Vec<f64>,
}

#[inline]
fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Builds `M(s)` and `N(s)` coefficients from the shifted density coefficients `b`.
fn moment_polys(b: &[f64], a: f64, m: &mut [f64], n: &mut [f64]) {
    m.iter_mut().for_each(|v| *v = 0.0);
    n.iter_mut().for_each(|v| *v = 0.0);
    for (i, &bi) in b.iter().enumerate() {
        let f = i as f64;
        m[i + 1] += bi * a * a / (f + 1.0);
        m[i + 2] += bi * 2.0 * a / (f + 2.0);
        m[i + 3] += bi / (f + 3.0);
        n[i + 1] += bi * a / (f + 1.0);
        n[i + 2] += bi / (f + 2.0);
    }
}

/// Solves for the potential of `rho`.
pub fn solve_gravity(
    space: &DgSpace,
    rho: &DGField,
    g: f64,
    bc: GravityBc,
) -> Result<GravityField> {
    let mesh = space.mesh();
    let n = mesh.n_cells();
    let k = space.degree();
    let deg_q = k + 3;
    let r0 = mesh.r_min();
    let dphi0 = match bc.dphi_inner {
        Some(v) => {
            if r0 == 0.0 && v != 0.0 {
                return invalid_arg("dPhi/dr must vanish at the origin");
            }
            v
        }
        None if r0 == 0.0 => 0.0,
        None => {
            return invalid_arg(format!(
                "mesh starts at r = {r0} > 0: an inner boundary value of dPhi/dr is required"
            ))
        }
    };
    let fpg = 4.0 * PI * g;

    let mut gf = GravityField {
        g,
        a: mesh.faces()[..n].to_vec(),
        width: (0..n).map(|j| mesh.width(j)).collect(),
        qpoly: vec![0.0; n * (deg_q + 1)],
        npoly: vec![0.0; n * (deg_q + 1)],
        cst: vec![0.0; n],
        deg_q,
        faces: mesh.faces().to_vec(),
        dphi_face: vec![0.0; n + 1],
        phi_face: vec![0.0; n + 1],
        phi_nodes: vec![0.0; n * space.nq()],
        q_nodes: vec![0.0; n * space.nq()],
    };

    // Outward sweep for r² ∂Φ/∂r.
    gf.dphi_face[0] = dphi0;
    let mut m = vec![0.0; deg_q + 1];
    let mut np = vec![0.0; deg_q + 1];
    for j in 0..n {
        let a = gf.a[j];
        let b = space.to_monomial_shifted(rho, j);
        moment_polys(&b, a, &mut m, &mut np);
        let qp = &mut gf.qpoly[j * (deg_q + 1)..(j + 1) * (deg_q + 1)];
        for (qi, mi) in qp.iter_mut().zip(&m) {
            *qi = fpg * mi;
        }
        qp[0] += a * a * gf.dphi_face[j];
        for (ni, v) in gf.npoly[j * (deg_q + 1)..(j + 1) * (deg_q + 1)]
            .iter_mut()
            .zip(&np)
        {
            *ni = fpg * v;
        }
        let h = gf.width[j];
        let rr = a + h;
        gf.dphi_face[j + 1] = horner(qp, h) / (rr * rr);
    }

    // Potential sweep.
    let anchor = match bc.anchor {
        PhiAnchor::Isolated => PhiAnchor::Outer(-mesh.r_max() * gf.dphi_face[n]),
        a => a,
    };
    match anchor {
        PhiAnchor::Outer(phi_r) => {
            gf.phi_face[n] = phi_r;
            for j in (0..n).rev() {
                let h = gf.width[j];
                let rr = gf.a[j] + h;
                let c = gf.phi_face[j + 1] + rr * gf.dphi_face[j + 1] - horner(gf.npoly_cell(j), h);
                gf.cst[j] = c;
                gf.phi_face[j] = c - gf.q_over_r(j, 0.0);
            }
        }
        PhiAnchor::Inner(phi_l) => {
            gf.phi_face[0] = phi_l;
            for j in 0..n {
                let c = gf.phi_face[j] + gf.a[j] * gf.dphi_face[j];
                gf.cst[j] = c;
                let h = gf.width[j];
                gf.phi_face[j + 1] = c + horner(gf.npoly_cell(j), h) - gf.q_over_r(j, h);
            }
        }
        PhiAnchor::Isolated => unreachable!(),
    }

    let q = space.nq();
    for j in 0..n {
        for (iq, &s) in space.offsets(j).iter().enumerate() {
            gf.phi_nodes[j * q + iq] = gf.phi_local(j, s);
            gf.q_nodes[j * q + iq] = horner(gf.qpoly_cell(j), s);
        }
    }
    Ok(gf)
}

impl GravityField {
    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn n_cells(&self) -> usize {
        self.a.len()
    }

    #[inline]
    fn qpoly_cell(&self, j: usize) -> &[f64] {
        &self.qpoly[j * (self.deg_q + 1)..(j + 1) * (self.deg_q + 1)]
    }

    #[inline]
    fn npoly_cell(&self, j: usize) -> &[f64] {
        &self.npoly[j * (self.deg_q + 1)..(j + 1) * (self.deg_q + 1)]
    }

    /// `Q(s) / r`; divides the polynomial by `s` in a cell touching the origin.
    #[inline]
    fn q_over_r(&self, j: usize, s: f64) -> f64 {
        let a = self.a[j];
        let qp = self.qpoly_cell(j);
        if a == 0.0 {
            debug_assert!(qp[0] == 0.0 && qp[1] == 0.0 && qp[2] == 0.0);
            horner(&qp[1..], s)
        } else {
            horner(qp, s) / (a + s)
        }
    }

    /// `∂Φ/∂r` at offset `s` in cell `j`.
    #[inline]
    pub fn dphi_local(&self, j: usize, s: f64) -> f64 {
        let a = self.a[j];
        let qp = self.qpoly_cell(j);
        if a == 0.0 {
            horner(&qp[2..], s)
        } else {
            let r = a + s;
            horner(qp, s) / (r * r)
        }
    }

    /// `Φ` at offset `s` in cell `j`.
    #[inline]
    pub fn phi_local(&self, j: usize, s: f64) -> f64 {
        self.cst[j] + horner(self.npoly_cell(j), s) - self.q_over_r(j, s)
    }

    /// `r² ∂Φ/∂r` at offset `s` in cell `j`.
    #[inline]
    pub fn r2_dphi_local(&self, j: usize, s: f64) -> f64 {
        horner(self.qpoly_cell(j), s)
    }

    fn locate(&self, r: f64) -> Result<(usize, f64)> {
        let n = self.n_cells();
        if !(r >= self.faces[0] && r <= self.faces[n]) {
            return Err(Error::OutOfRange(format!(
                "r = {r} outside [{}, {}]",
                self.faces[0], self.faces[n]
            )));
        }
        let j = self
            .faces
            .partition_point(|&f| f <= r)
            .saturating_sub(1)
            .min(n - 1);
        Ok((j, r - self.a[j]))
    }

    pub fn eval_dphi(&self, r: f64) -> Result<f64> {
        let (j, s) = self.locate(r)?;
        if s == 0.0 {
            return Ok(self.dphi_face[j]);
        }
        Ok(self.dphi_local(j, s))
    }

    pub fn eval_phi(&self, r: f64) -> Result<f64> {
        let (j, s) = self.locate(r)?;
        if s == 0.0 {
            return Ok(self.phi_face[j]);
        }
        Ok(self.phi_local(j, s))
    }
}
