//! Modal discontinuous Galerkin space on a radial mesh.
//!
//! Each cell carries `k + 1` coefficients in the Legendre basis `P_a(ξ)`,
//! `ξ ∈ [-1, 1]`, with `r = r_j + ξ Δr_j / 2`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid_arg, Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::{
    legendre_all, legendre_derivatives_all, legendre_monomial_table, Quadrature,
};

/// Default number of quadrature points for degree `k`.
///
/// Every energy-bookkeeping integrand (density times potential times a test
/// function, all times `r²`) is a polynomial of degree at most `3k + 5`, so
/// this count integrates them exactly.
pub fn default_quadrature_points(k: usize) -> usize {
    (k + 4).max((3 * k + 7) / 2)
}

/// Geometry, basis tables and factorized mass matrices for one mesh and degree.
#[derive(Debug, Clone)]
pub struct DgSpace {
    mesh: Mesh,
    k: usize,
    nb: usize,
    quad: Quadrature,
    basis: Vec<f64>,
    dbasis: Vec<f64>,
    left_vals: Vec<f64>,
    nodes: Vec<f64>,
    snodes: Vec<f64>,
    w_dr: Vec<f64>,
    w_r2: Vec<f64>,
    r2_int: Vec<f64>,
    minv: Vec<f64>,
    mono: Vec<Vec<f64>>,
}

impl DgSpace {
    pub fn new(mesh: Mesh, k: usize) -> Result<Self> {
        Self::with_quadrature(mesh, k, default_quadrature_points(k))
    }

    pub fn with_quadrature(mesh: Mesh, k: usize, q: usize) -> Result<Self> {
        if k > 15 {
            return invalid_arg(format!("degree {k} exceeds the supported maximum of 15"));
        }
        if q < k + 1 {
            return invalid_arg(format!(
                "{q} quadrature points cannot integrate the degree-{k} mass matrix"
            ));
        }
        let nb = k + 1;
        let quad = Quadrature::gauss_legendre(q);
        let mut basis = Vec::with_capacity(q * nb);
        let mut dbasis = Vec::with_capacity(q * nb);
        for &x in &quad.points {
            basis.extend(legendre_all(k, x));
            dbasis.extend(legendre_derivatives_all(k, x));
        }
        let left_vals: Vec<f64> = (0..nb)
            .map(|a| if a % 2 == 0 { 1.0 } else { -1.0 })
            .collect();

        let n = mesh.n_cells();
        let mut nodes = Vec::with_capacity(n * q);
        let mut snodes = Vec::with_capacity(n * q);
        let mut w_dr = Vec::with_capacity(n * q);
        let mut w_r2 = Vec::with_capacity(n * q);
        let mut r2_int = Vec::with_capacity(n);
        let mut minv = Vec::with_capacity(n * nb * nb);
        for j in 0..n {
            let (rl, h) = (mesh.left(j), mesh.width(j));
            let mut acc = 0.0;
            for (iq, &x) in quad.points.iter().enumerate() {
                let s = 0.5 * (x + 1.0) * h;
                let r = rl + s;
                let w = quad.weights[iq] * 0.5 * h;
                nodes.push(r);
                snodes.push(s);
                w_dr.push(w);
                w_r2.push(w * r * r);
                acc += w * r * r;
            }
            r2_int.push(acc);
            let wr2 = &w_r2[j * q..(j + 1) * q];
            let m = DMatrix::from_fn(nb, nb, |a, b| {
                (0..q)
                    .map(|iq| wr2[iq] * basis[iq * nb + a] * basis[iq * nb + b])
                    .sum::<f64>()
            });
            let inv = m
                .cholesky()
                .ok_or_else(|| {
                    Error::InvalidState(format!("mass matrix of cell {j} is not positive definite"))
                })?
                .inverse();
            for a in 0..nb {
                for b in 0..nb {
                    minv.push(inv[(a, b)]);
                }
            }
        }
        Ok(DgSpace {
            mesh,
            k,
            nb,
            quad,
            basis,
            dbasis,
            left_vals,
            nodes,
            snodes,
            w_dr,
            w_r2,
            r2_int,
            minv,
            mono: legendre_monomial_table(k),
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }
    pub fn degree(&self) -> usize {
        self.k
    }
    /// Basis functions per cell (`k + 1`).
    pub fn nb(&self) -> usize {
        self.nb
    }
    /// Quadrature points per cell.
    pub fn nq(&self) -> usize {
        self.quad.len()
    }
    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }
    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }
    /// `P_a` at quadrature point `iq`.
    #[inline]
    pub fn basis_at(&self, iq: usize) -> &[f64] {
        &self.basis[iq * self.nb..(iq + 1) * self.nb]
    }
    /// `dP_a/dξ` at quadrature point `iq`.
    #[inline]
    pub fn dbasis_at(&self, iq: usize) -> &[f64] {
        &self.dbasis[iq * self.nb..(iq + 1) * self.nb]
    }
    /// `P_a(-1)`.
    #[inline]
    pub fn left_values(&self) -> &[f64] {
        &self.left_vals
    }
    /// Radii of the quadrature nodes of cell `j`.
    #[inline]
    pub fn nodes(&self, j: usize) -> &[f64] {
        let q = self.nq();
        &self.nodes[j * q..(j + 1) * q]
    }
    pub fn all_nodes(&self) -> &[f64] {
        &self.nodes
    }
    /// Node offsets from the left face of cell `j`.
    #[inline]
    pub fn offsets(&self, j: usize) -> &[f64] {
        let q = self.nq();
        &self.snodes[j * q..(j + 1) * q]
    }
    /// Quadrature weights for `∫ · dr` on cell `j`.
    #[inline]
    pub fn weights_dr(&self, j: usize) -> &[f64] {
        let q = self.nq();
        &self.w_dr[j * q..(j + 1) * q]
    }
    /// Quadrature weights for `∫ · r² dr` on cell `j`.
    #[inline]
    pub fn weights_r2(&self, j: usize) -> &[f64] {
        let q = self.nq();
        &self.w_r2[j * q..(j + 1) * q]
    }
    /// `∫_{K_j} r² dr`.
    #[inline]
    pub fn r2_integral(&self, j: usize) -> f64 {
        self.r2_int[j]
    }
    /// Row-major inverse of the `r²`-weighted mass matrix of cell `j`.
    #[inline]
    pub fn inv_mass(&self, j: usize) -> &[f64] {
        let s = self.nb * self.nb;
        &self.minv[j * s..(j + 1) * s]
    }

    /// Dense `r²`-weighted mass matrix of cell `j`.
    pub fn mass_matrix(&self, j: usize) -> Vec<f64> {
        let (nb, q) = (self.nb, self.nq());
        let w = self.weights_r2(j);
        let mut m = vec![0.0; nb * nb];
        for iq in 0..q {
            let b = self.basis_at(iq);
            for a in 0..nb {
                for c in 0..nb {
                    m[a * nb + c] += w[iq] * b[a] * b[c];
                }
            }
        }
        m
    }

    pub fn zeros(&self) -> DGField {
        DGField {
            nb: self.nb,
            coeffs: vec![0.0; self.n_cells() * self.nb],
        }
    }

    /// Field from raw coefficients (`N (k+1)` entries, cell-major).
    pub fn field_from_coeffs(&self, coeffs: Vec<f64>) -> Result<DGField> {
        if coeffs.len() != self.n_cells() * self.nb {
            return invalid_arg(format!(
                "expected {} coefficients, got {}",
                self.n_cells() * self.nb,
                coeffs.len()
            ));
        }
        Ok(DGField {
            nb: self.nb,
            coeffs,
        })
    }

    /// Value of cell `j`'s polynomial at reference coordinate `xi`.
    pub fn eval_ref(&self, field: &DGField, j: usize, xi: f64) -> f64 {
        let p = legendre_all(self.k, xi);
        field.cell(j).iter().zip(&p).map(|(c, b)| c * b).sum()
    }

    /// Point evaluation. Faces belong to the cell on their right.
    pub fn eval(&self, field: &DGField, r: f64) -> Result<f64> {
        let j = self.mesh.locate(r)?;
        let xi = 2.0 * (r - self.mesh.center(j)) / self.mesh.width(j);
        Ok(self.eval_ref(field, j, xi.clamp(-1.0, 1.0)))
    }

    /// Value at the left face of cell `j` seen from inside the cell.
    #[inline]
    pub fn trace_left(&self, field: &DGField, j: usize) -> f64 {
        field
            .cell(j)
            .iter()
            .zip(&self.left_vals)
            .map(|(c, s)| c * s)
            .sum()
    }

    /// Value at the right face of cell `j` seen from inside the cell.
    #[inline]
    pub fn trace_right(&self, field: &DGField, j: usize) -> f64 {
        field.cell(j).iter().sum()
    }

    /// Values at every quadrature node, cell-major.
    pub fn at_nodes(&self, field: &DGField) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cells() * self.nq()];
        self.at_nodes_into(field, &mut out);
        out
    }

    pub fn at_nodes_into(&self, field: &DGField, out: &mut [f64]) {
        let q = self.nq();
        for j in 0..self.n_cells() {
            let c = field.cell(j);
            for iq in 0..q {
                out[j * q + iq] = c.iter().zip(self.basis_at(iq)).map(|(a, b)| a * b).sum();
            }
        }
    }

    /// Gauss–Radau projection: unweighted moments against `P^{k-1}` plus the left-face value.
    pub fn project_gauss_radau(&self, f: impl Fn(f64) -> f64) -> Result<DGField> {
        if self.k == 0 {
            return Err(Error::Unsupported(
                "Gauss-Radau projection needs k >= 1".into(),
            ));
        }
        let mut out = self.zeros();
        for j in 0..self.n_cells() {
            let vals: Vec<f64> = self.nodes(j).iter().map(|&r| f(r)).collect();
            let left = f(self.mesh.left(j));
            self.radau_cell(&vals, left, out.cell_mut(j));
        }
        Ok(out)
    }

    /// Radau coefficients of one cell from node values and the left-face value.
    pub fn radau_cell(&self, node_vals: &[f64], left: f64, out: &mut [f64]) {
        let k = self.k;
        for (m, o) in out.iter_mut().enumerate().take(k) {
            let mut acc = 0.0;
            for (iq, v) in node_vals.iter().enumerate() {
                acc += self.quad.weights[iq] * v * self.basis_at(iq)[m];
            }
            *o = 0.5 * (2 * m + 1) as f64 * acc;
        }
        let partial: f64 = (0..k).map(|a| out[a] * self.left_vals[a]).sum();
        out[k] = self.left_vals[k] * (left - partial);
    }

    /// Unweighted L² projection onto the cell polynomials.
    pub fn project_l2(&self, f: impl Fn(f64) -> f64) -> DGField {
        let mut out = self.zeros();
        for j in 0..self.n_cells() {
            let nodes = self.nodes(j);
            for a in 0..self.nb {
                let mut acc = 0.0;
                for (iq, &r) in nodes.iter().enumerate() {
                    acc += self.quad.weights[iq] * f(r) * self.basis_at(iq)[a];
                }
                out.cell_mut(j)[a] = 0.5 * (2 * a + 1) as f64 * acc;
            }
        }
        out
    }

    /// Coefficients `b_i` with `u(r) = Σ b_i (r - r_{j-1/2})^i` on cell `j`.
    pub fn to_monomial_shifted(&self, field: &DGField, j: usize) -> Vec<f64> {
        let k = self.k;
        // Polynomial in ξ first.
        let mut xi_coef = vec![0.0; k + 1];
        for (a, c) in field.cell(j).iter().enumerate() {
            for i in 0..=k {
                xi_coef[i] += c * self.mono[a][i];
            }
        }
        // ξ = σ s - 1 with σ = 2/h.
        let sigma = 2.0 / self.mesh.width(j);
        let mut out = vec![0.0; k + 1];
        for (i, ci) in xi_coef.iter().enumerate() {
            // (σ s - 1)^i = Σ_m C(i,m) σ^m s^m (-1)^(i-m)
            let mut binom = 1.0;
            for m in 0..=i {
                let sign = if (i - m) % 2 == 0 { 1.0 } else { -1.0 };
                out[m] += ci * binom * sigma.powi(m as i32) * sign;
                binom = binom * (i - m) as f64 / (m + 1) as f64;
            }
        }
        out
    }

    /// Coefficients `ρ_{j,i}` with `u(r) = Σ ρ_{j,i} r^i` on cell `j`.
    ///
    /// Ill-conditioned far from the origin; the gravity solver uses the shifted form.
    pub fn to_monomial(&self, field: &DGField, j: usize) -> Vec<f64> {
        let b = self.to_monomial_shifted(field, j);
        shift_polynomial(&b, -self.mesh.left(j))
    }

    /// Modal coefficients of cell `j` for the absolute-power polynomial `Σ c_i r^i`.
    pub fn from_monomial(&self, j: usize, coeffs: &[f64]) -> Vec<f64> {
        let nodes = self.nodes(j);
        (0..self.nb)
            .map(|a| {
                let mut acc = 0.0;
                for (iq, &r) in nodes.iter().enumerate() {
                    let v = coeffs.iter().rev().fold(0.0, |s, c| s * r + c);
                    acc += self.quad.weights[iq] * v * self.basis_at(iq)[a];
                }
                0.5 * (2 * a + 1) as f64 * acc
            })
            .collect()
    }

    /// `∫_{K_j} v r² dr` from values at the nodes of cell `j`.
    #[inline]
    pub fn integrate_r2(&self, j: usize, node_vals: &[f64]) -> f64 {
        self.weights_r2(j)
            .iter()
            .zip(node_vals)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// `∫_{K_j} f(r) r² dr` by the cell quadrature.
    pub fn integrate_r2_fn(&self, j: usize, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes(j)
            .iter()
            .zip(self.weights_r2(j))
            .map(|(&r, w)| w * f(r))
            .sum()
    }

    /// `∫_Ω u r² dr` for a whole field.
    pub fn total_r2(&self, field: &DGField) -> f64 {
        let q = self.nq();
        let vals = self.at_nodes(field);
        (0..self.n_cells())
            .map(|j| self.integrate_r2(j, &vals[j * q..(j + 1) * q]))
            .sum()
    }

    /// Plain cell average `∫u dr / Δr`.
    pub fn average(&self, field: &DGField, j: usize) -> f64 {
        field.cell(j)[0]
    }

    /// `r²`-weighted cell average.
    pub fn weighted_average(&self, field: &DGField, j: usize) -> f64 {
        let c = field.cell(j);
        let mut acc = 0.0;
        for (iq, w) in self.weights_r2(j).iter().enumerate() {
            acc += w * c
                .iter()
                .zip(self.basis_at(iq))
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        acc / self.r2_int[j]
    }

    /// Solves `M_j x = rhs_j` in every cell, overwriting `rhs`.
    pub fn apply_inverse_mass(&self, rhs: &mut [f64], parallel: bool) {
        let nb = self.nb;
        let solve = |(j, chunk): (usize, &mut [f64])| {
            let minv = self.inv_mass(j);
            let mut tmp = [0.0f64; 16];
            for a in 0..nb {
                tmp[a] = (0..nb).map(|b| minv[a * nb + b] * chunk[b]).sum();
            }
            chunk.copy_from_slice(&tmp[..nb]);
        };
        if parallel {
            rhs.par_chunks_mut(nb).enumerate().for_each(solve);
        } else {
            rhs.chunks_mut(nb).enumerate().for_each(solve);
        }
    }
}

/// Coefficients of `p(x + d)` given those of `p(x)`.
pub fn shift_polynomial(c: &[f64], d: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    for (i, ci) in c.iter().enumerate() {
        let mut binom = 1.0;
        for m in 0..=i {
            out[m] += ci * binom * d.powi((i - m) as i32);
            binom = binom * (i - m) as f64 / (m + 1) as f64;
        }
    }
    out
}

/// One scalar unknown: `k + 1` modal coefficients per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DGField {
    nb: usize,
    pub coeffs: Vec<f64>,
}

impl DGField {
    pub fn nb(&self) -> usize {
        self.nb
    }
    pub fn n_cells(&self) -> usize {
        self.coeffs.len() / self.nb
    }
    #[inline]
    pub fn cell(&self, j: usize) -> &[f64] {
        &self.coeffs[j * self.nb..(j + 1) * self.nb]
    }
    #[inline]
    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.coeffs[j * self.nb..(j + 1) * self.nb]
    }
    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &DGField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }
    pub fn scaled(&self, alpha: f64) -> DGField {
        DGField {
            nb: self.nb,
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }
    pub fn sub(&self, other: &DGField) -> DGField {
        DGField {
            nb: self.nb,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// The conserved triple `(ρ, ρu, E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub rho: DGField,
    pub mom: DGField,
    pub ene: DGField,
}

impl StateField {
    pub fn zeros(space: &DgSpace) -> Self {
        StateField {
            rho: space.zeros(),
            mom: space.zeros(),
            ene: space.zeros(),
        }
    }

    pub fn component(&self, i: usize) -> &DGField {
        match i {
            0 => &self.rho,
            1 => &self.mom,
            _ => &self.ene,
        }
    }

    pub fn component_mut(&mut self, i: usize) -> &mut DGField {
        match i {
            0 => &mut self.rho,
            1 => &mut self.mom,
            _ => &mut self.ene,
        }
    }

    pub fn sub(&self, other: &StateField) -> StateField {
        StateField {
            rho: self.rho.sub(&other.rho),
            mom: self.mom.sub(&other.mom),
            ene: self.ene.sub(&other.ene),
        }
    }

    /// Gauss–Radau projection of a conserved-variable profile `r -> (ρ, ρu, E)`.
    pub fn project(space: &DgSpace, f: impl Fn(f64) -> [f64; 3]) -> Result<Self> {
        Ok(StateField {
            rho: space.project_gauss_radau(|r| f(r)[0])?,
            mom: space.project_gauss_radau(|r| f(r)[1])?,
            ene: space.project_gauss_radau(|r| f(r)[2])?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.rho
            .coeffs
            .iter()
            .chain(&self.mom.coeffs)
            .chain(&self.ene.coeffs)
            .all(|c| c.is_finite())
    }
}
