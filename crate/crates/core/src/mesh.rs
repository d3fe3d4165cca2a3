//! One-dimensional radial meshes over `[r_min, R]`.

use crate::error::{invalid_arg, Error, Result};

/// A radial mesh stored as an explicit, strictly increasing face list.
///
/// Cells are indexed `1..=N` in the public API (cell `j` spans
/// `faces[j-1]..faces[j]`); internal loops use zero-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    faces: Vec<f64>,
}

impl Mesh {
    /// Builds a mesh from an explicit face list.
    pub fn from_faces(faces: Vec<f64>) -> Result<Self> {
        if faces.len() < 2 {
            return invalid_arg("a mesh needs at least two faces");
        }
        if !(faces[0] >= 0.0) {
            return invalid_arg(format!("r_min must be >= 0, got {}", faces[0]));
        }
        for w in faces.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return invalid_arg(format!(
                    "faces not strictly increasing at {} -> {}",
                    w[0], w[1]
                ));
            }
        }
        Ok(Mesh { faces })
    }

    /// Uniform mesh with `n` cells on `[r_min, r_max]`.
    pub fn uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid_arg("cell count must be positive");
        }
        if !(r_max > r_min) || !(r_min >= 0.0) {
            return invalid_arg(format!("need R > r_min >= 0, got r_min={r_min}, R={r_max}"));
        }
        let dr = (r_max - r_min) / n as f64;
        let mut faces: Vec<f64> = (0..=n).map(|i| r_min + i as f64 * dr).collect();
        faces[n] = r_max;
        Mesh::from_faces(faces)
    }

    /// Geometrically stretched mesh: `dr_j = a^(j-1) * dr1`.
    pub fn geometric(r_min: f64, dr1: f64, a: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid_arg("cell count must be positive");
        }
        if !(dr1 > 0.0) {
            return invalid_arg(format!("first cell width must be positive, got {dr1}"));
        }
        if !(a >= 1.0) {
            return invalid_arg(format!("growth rate must be >= 1, got {a}"));
        }
        let mut faces = Vec::with_capacity(n + 1);
        faces.push(r_min);
        if a == 1.0 {
            for i in 1..=n {
                faces.push(r_min + i as f64 * dr1);
            }
        } else {
            // Closed-form partial sums avoid accumulating rounding over many cells.
            for i in 1..=n {
                faces.push(r_min + dr1 * (a.powi(i as i32) - 1.0) / (a - 1.0));
            }
        }
        Mesh::from_faces(faces)
    }

    pub fn n_cells(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn r_min(&self) -> f64 {
        self.faces[0]
    }

    pub fn r_max(&self) -> f64 {
        self.faces[self.faces.len() - 1]
    }

    /// Left face of zero-based cell `j`.
    #[inline]
    pub fn left(&self, j: usize) -> f64 {
        self.faces[j]
    }

    /// Right face of zero-based cell `j`.
    #[inline]
    pub fn right(&self, j: usize) -> f64 {
        self.faces[j + 1]
    }

    /// Width of zero-based cell `j`.
    #[inline]
    pub fn width(&self, j: usize) -> f64 {
        self.faces[j + 1] - self.faces[j]
    }

    #[inline]
    pub fn center(&self, j: usize) -> f64 {
        0.5 * (self.faces[j] + self.faces[j + 1])
    }

    /// Midpoint of the one-based cell `j` (`1 <= j <= N`).
    pub fn cell_midpoint(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.n_cells() {
            return Err(Error::OutOfRange(format!(
                "cell index {j} outside 1..={}",
                self.n_cells()
            )));
        }
        Ok(self.center(j - 1))
    }

    pub fn min_width(&self) -> f64 {
        (0..self.n_cells())
            .map(|j| self.width(j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Zero-based index of the cell containing `r`; faces belong to the cell on their right,
    /// except the outermost face.
    pub fn locate(&self, r: f64) -> Result<usize> {
        let n = self.n_cells();
        if !(r >= self.faces[0] && r <= self.faces[n]) {
            return Err(Error::OutOfRange(format!(
                "r = {r} outside [{}, {}]",
                self.faces[0], self.faces[n]
            )));
        }
        let idx = self.faces.partition_point(|&f| f <= r);
        Ok(idx.saturating_sub(1).min(n - 1))
    }
}
