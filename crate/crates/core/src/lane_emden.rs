//! Lane–Emden polytropes: closed forms for n = 0, 1, 5 and a fixed-step
//! Runge–Kutta–Fehlberg integration for everything else.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{invalid_arg, invalid_state, Error, Result};

/// Default integration step in the scaled radius.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Default integration range in the scaled radius.
pub const DEFAULT_XI_MAX: f64 = 50.0;

const INDEX_MATCH_TOL: f64 = 1e-9;

/// The polytropic indices with a closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticIndex {
    Zero,
    One,
    Five,
}

impl AnalyticIndex {
    pub fn from_index(n: f64) -> Option<Self> {
        if (n - 0.0).abs() < INDEX_MATCH_TOL {
            Some(AnalyticIndex::Zero)
        } else if (n - 1.0).abs() < INDEX_MATCH_TOL {
            Some(AnalyticIndex::One)
        } else if (n - 5.0).abs() < INDEX_MATCH_TOL {
            Some(AnalyticIndex::Five)
        } else {
            None
        }
    }

    pub fn index(self) -> f64 {
        match self {
            AnalyticIndex::Zero => 0.0,
            AnalyticIndex::One => 1.0,
            AnalyticIndex::Five => 5.0,
        }
    }

    /// First zero of θ, or infinity.
    pub fn surface(self) -> f64 {
        match self {
            AnalyticIndex::Zero => 6f64.sqrt(),
            AnalyticIndex::One => std::f64::consts::PI,
            AnalyticIndex::Five => f64::INFINITY,
        }
    }

    pub fn theta(self, xi: f64) -> f64 {
        match self {
            AnalyticIndex::Zero => 1.0 - xi * xi / 6.0,
            AnalyticIndex::One => {
                if xi == 0.0 {
                    1.0
                } else {
                    xi.sin() / xi
                }
            }
            AnalyticIndex::Five => 1.0 / (1.0 + xi * xi / 3.0).sqrt(),
        }
    }

    pub fn dtheta(self, xi: f64) -> f64 {
        match self {
            AnalyticIndex::Zero => -xi / 3.0,
            AnalyticIndex::One => {
                if xi.abs() < 1e-3 {
                    let x2 = xi * xi;
                    -xi / 3.0 + xi * x2 / 30.0 - xi * x2 * x2 / 840.0
                } else {
                    (xi * xi.cos() - xi.sin()) / (xi * xi)
                }
            }
            AnalyticIndex::Five => -(xi / 3.0) * (1.0 + xi * xi / 3.0).powf(-1.5),
        }
    }
}

/// Closed-form θ for n ∈ {0, 1, 5}.
pub fn analytic_theta(n: f64, xi: f64) -> Result<f64> {
    if !(xi >= 0.0) {
        return invalid_arg(format!("scaled radius must be >= 0, got {xi}"));
    }
    match AnalyticIndex::from_index(n) {
        Some(idx) => Ok(idx.theta(xi)),
        None => invalid_arg(format!("no closed-form Lane–Emden solution for n = {n}")),
    }
}

/// Tabulated Lane–Emden solution on a uniform grid in ξ.
#[derive(Debug, Clone)]
pub struct PolytropeProfile {
    pub n: f64,
    pub step: f64,
    pub xi: Vec<f64>,
    pub theta: Vec<f64>,
    pub dtheta: Vec<f64>,
    /// First ξ with θ = 0, or infinity if θ stays positive over the table.
    pub xi_surface: f64,
}

// Fehlberg tableau. The c-column is implied by the row sums.
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [
        -8.0 / 27.0,
        2.0,
        -3544.0 / 2565.0,
        1859.0 / 4104.0,
        -11.0 / 40.0,
    ],
];
const C: [f64; 6] = [0.0, 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0];
const B: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

#[inline]
fn theta_pow(theta: f64, n: f64) -> f64 {
    if theta <= 0.0 {
        0.0
    } else if n == 0.0 {
        1.0
    } else {
        theta.powf(n)
    }
}

/// Right-hand side of the first-order system in (θ, φ) with φ = -ξ² θ'.
#[inline]
fn rhs(n: f64, xi: f64, y: [f64; 2]) -> [f64; 2] {
    if xi == 0.0 {
        return [0.0, 0.0];
    }
    [-y[1] / (xi * xi), theta_pow(y[0], n) * xi * xi]
}

/// Integrates the Lane–Emden equation from the centre with a fixed step `h`.
pub fn solve_lane_emden(n: f64, h: f64, xi_max: f64) -> Result<PolytropeProfile> {
    if !(h > 0.0) || !h.is_finite() {
        return invalid_arg(format!("step must be positive, got {h}"));
    }
    if !(n >= 0.0) || !n.is_finite() {
        return invalid_arg(format!("polytropic index must be >= 0, got {n}"));
    }
    if !(xi_max > h) {
        return invalid_arg(format!("xi_max = {xi_max} must exceed the step"));
    }
    let steps = (xi_max / h).ceil() as usize;
    let mut xi = Vec::with_capacity(steps + 1);
    let mut theta = Vec::with_capacity(steps + 1);
    let mut dtheta = Vec::with_capacity(steps + 1);
    xi.push(0.0);
    theta.push(1.0);
    dtheta.push(0.0);
    let mut y = [1.0, 0.0];
    let mut xi_surface = f64::INFINITY;

    for i in 0..steps {
        let x0 = i as f64 * h;
        let mut k = [[0.0; 2]; 6];
        for s in 0..6 {
            let mut ys = y;
            for (m, km) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][m] * km[0];
                ys[1] += h * A[s][m] * km[1];
            }
            k[s] = rhs(n, x0 + C[s] * h, ys);
        }
        for s in 0..6 {
            y[0] += h * B[s] * k[s][0];
            y[1] += h * B[s] * k[s][1];
        }
        let x1 = (i + 1) as f64 * h;
        xi.push(x1);
        theta.push(y[0]);
        dtheta.push(-y[1] / (x1 * x1));
        if y[0] <= 0.0 {
            xi_surface = hermite_root(x0, x1, theta[i], theta[i + 1], dtheta[i], dtheta[i + 1]);
            break;
        }
    }

    Ok(PolytropeProfile {
        n,
        step: h,
        xi,
        theta,
        dtheta,
        xi_surface,
    })
}

/// Root of the cubic Hermite interpolant on `[x0, x1]`, given a sign change.
fn hermite_root(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    let h = x1 - x0;
    let eval = |t: f64| -> (f64, f64) {
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
        let dv = ((6.0 * t2 - 6.0 * t) * f0
            + (3.0 * t2 - 4.0 * t + 1.0) * h * d0
            + (-6.0 * t2 + 6.0 * t) * f1
            + (3.0 * t2 - 2.0 * t) * h * d1)
            / h;
        (v, dv)
    };
    // Linear guess, then safeguarded Newton.
    let mut t = if f0 != f1 { f0 / (f0 - f1) } else { 0.5 };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let (v, dv) = eval(t);
        if v > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = if dv != 0.0 {
            t - v / (dv * h)
        } else {
            0.5 * (lo + hi)
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() < 1e-15 {
            t = next;
            break;
        }
        t = next;
    }
    x0 + t * h
}

impl PolytropeProfile {
    /// Largest ξ covered by the table.
    pub fn xi_end(&self) -> f64 {
        *self.xi.last().unwrap_or(&0.0)
    }

    /// `(θ, dθ/dξ)` by cubic Hermite interpolation; `(0, 0)` at and beyond the surface.
    pub fn eval_theta(&self, xi: f64) -> Result<(f64, f64)> {
        if self.xi.is_empty() {
            return invalid_state("empty Lane–Emden profile");
        }
        if !(xi >= 0.0) {
            return invalid_arg(format!("scaled radius must be >= 0, got {xi}"));
        }
        if xi >= self.xi_surface {
            return Ok((0.0, 0.0));
        }
        let last = self.xi.len() - 1;
        if xi > self.xi[last] {
            return Err(Error::OutOfRange(format!(
                "xi = {xi} beyond tabulated range {}",
                self.xi[last]
            )));
        }
        let i = ((xi / self.step).floor() as usize).min(last.saturating_sub(1));
        if last == 0 {
            return Ok((self.theta[0], self.dtheta[0]));
        }
        let x0 = self.xi[i];
        if xi == x0 {
            return Ok((self.theta[i], self.dtheta[i]));
        }
        let h = self.xi[i + 1] - x0;
        let t = (xi - x0) / h;
        let (f0, f1, d0, d1) = (
            self.theta[i],
            self.theta[i + 1],
            self.dtheta[i],
            self.dtheta[i + 1],
        );
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * h * d1;
        let dv = ((6.0 * t2 - 6.0 * t) * f0
            + (3.0 * t2 - 4.0 * t + 1.0) * h * d0
            + (-6.0 * t2 + 6.0 * t) * f1
            + (3.0 * t2 - 2.0 * t) * h * d1)
            / h;
        Ok((v, dv))
    }

    /// Two-column `(ξ, θ)` text dump for debugging.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# Lane-Emden n = {}", self.n)?;
        for (x, t) in self.xi.iter().zip(&self.theta) {
            writeln!(out, "{x:.17e} {t:.17e}")?;
        }
        Ok(())
    }
}

/// θ source used by the equilibrium recovery: closed form where one exists.
#[derive(Debug, Clone)]
pub enum Polytrope {
    Analytic(AnalyticIndex),
    Tabulated(Arc<PolytropeProfile>),
}

impl Polytrope {
    /// Closed form for n ∈ {0, 1, 5}, otherwise the cached numerical profile.
    pub fn for_index(n: f64) -> Result<Self> {
        match AnalyticIndex::from_index(n) {
            Some(idx) => Ok(Polytrope::Analytic(idx)),
            None => Ok(Polytrope::Tabulated(cached_profile(n)?)),
        }
    }

    pub fn index(&self) -> f64 {
        match self {
            Polytrope::Analytic(a) => a.index(),
            Polytrope::Tabulated(p) => p.n,
        }
    }

    /// θ(ξ) inside the admissible range, `None` outside it.
    pub fn theta_admissible(&self, xi: f64) -> Option<f64> {
        let th = match self {
            Polytrope::Analytic(a) => {
                if xi >= a.surface() {
                    return None;
                }
                a.theta(xi)
            }
            Polytrope::Tabulated(p) => {
                if xi >= p.xi_surface {
                    return None;
                }
                p.eval_theta(xi).ok()?.0
            }
        };
        (th > 0.0).then_some(th)
    }

    /// θ(ξ) and θ'(ξ), without range checks beyond those of the table.
    pub fn eval(&self, xi: f64) -> Result<(f64, f64)> {
        match self {
            Polytrope::Analytic(a) => Ok((a.theta(xi), a.dtheta(xi))),
            Polytrope::Tabulated(p) => p.eval_theta(xi),
        }
    }
}

static PROFILE_CACHE: OnceLock<Mutex<HashMap<u64, Arc<PolytropeProfile>>>> = OnceLock::new();

/// Profile for index `n` with the default step and range, computed once per process.
pub fn cached_profile(n: f64) -> Result<Arc<PolytropeProfile>> {
    let cache = PROFILE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = n.to_bits();
    if let Some(p) = cache.lock().expect("profile cache poisoned").get(&key) {
        return Ok(p.clone());
    }
    let profile = Arc::new(solve_lane_emden(n, DEFAULT_STEP, DEFAULT_XI_MAX)?);
    cache
        .lock()
        .expect("profile cache poisoned")
        .entry(key)
        .or_insert_with(|| profile.clone());
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sup_error(p: &PolytropeProfile, idx: AnalyticIndex, upto: f64) -> f64 {
        p.xi.iter()
            .zip(&p.theta)
            .filter(|(x, _)| **x <= upto)
            .map(|(x, t)| (t - idx.theta(*x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn analytic_examples() {
        assert!(analytic_theta(0.0, 6f64.sqrt()).unwrap().abs() < 1e-15);
        assert!(analytic_theta(1.0, std::f64::consts::PI).unwrap().abs() < 1e-15);
        assert_eq!(analytic_theta(5.0, 0.0).unwrap(), 1.0);
        assert!(analytic_theta(2.0, 1.0).is_err());
        assert!(analytic_theta(1.0, -1.0).is_err());
    }

    #[test]
    fn rkf_matches_analytic_n1() {
        let p = solve_lane_emden(1.0, 1e-4, 3.0).unwrap();
        assert!(sup_error(&p, AnalyticIndex::One, 3.0) <= 1e-10);
    }

    #[test]
    fn rkf_matches_analytic_all_closed_forms() {
        for idx in [AnalyticIndex::Zero, AnalyticIndex::One, AnalyticIndex::Five] {
            let p = solve_lane_emden(idx.index(), 1e-4, 3.0).unwrap();
            let upto = p.xi_surface.min(3.0);
            let err = sup_error(&p, idx, upto);
            assert!(err <= 1e-9, "n = {}: {err}", idx.index());
        }
    }

    #[test]
    fn n0_surface() {
        let p = solve_lane_emden(0.0, 1e-4, 5.0).unwrap();
        assert!(
            (p.xi_surface - 6f64.sqrt()).abs() < 1e-8,
            "{}",
            p.xi_surface
        );
    }

    #[test]
    fn n1_surface() {
        let p = solve_lane_emden(1.0, 1e-4, 5.0).unwrap();
        assert!((p.xi_surface - std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn n3_monotone_with_finite_surface() {
        let p = solve_lane_emden(3.0, 1e-4, 10.0).unwrap();
        assert!(p.xi_surface.is_finite());
        // Classic value of the first zero for n = 3.
        assert!(
            (p.xi_surface - 6.896_848_619).abs() < 1e-6,
            "{}",
            p.xi_surface
        );
        assert!(p.theta.windows(2).all(|w| w[1] < w[0]));
        assert!(p.dtheta.iter().all(|d| *d <= 0.0));
    }

    #[test]
    fn n3_agrees_with_fine_step_oracle() {
        let coarse = solve_lane_emden(3.0, 1e-3, 6.0).unwrap();
        let fine = solve_lane_emden(3.0, 1e-5, 6.0).unwrap();
        for (i, x) in coarse.xi.iter().enumerate().step_by(97) {
            let (t, _) = fine.eval_theta(*x).unwrap();
            assert!((t - coarse.theta[i]).abs() < 1e-10, "xi = {x}");
        }
    }

    #[test]
    fn observed_order() {
        let err = |h: f64| {
            let p = solve_lane_emden(1.0, h, 3.0).unwrap();
            sup_error(&p, AnalyticIndex::One, 3.0)
        };
        let e1 = err(0.1);
        let e2 = err(0.05);
        // Fourth-order propagation: log2 of the ratio approaches 4.
        assert!((e1 / e2).log2() >= 3.7, "ratio {}", e1 / e2);
    }

    #[test]
    fn fractional_index_does_not_nan() {
        let p = solve_lane_emden(1.5, 1e-3, 10.0).unwrap();
        assert!(p.xi_surface.is_finite());
        assert!(p.theta.iter().all(|t| t.is_finite()));
    }

    #[test]
    fn interpolation_reproduces_nodes_and_centre() {
        let p = solve_lane_emden(1.0, 1e-3, 3.0).unwrap();
        for i in [0usize, 17, 1000, 2500] {
            let (t, d) = p.eval_theta(p.xi[i]).unwrap();
            assert_eq!(t, p.theta[i]);
            assert_eq!(d, p.dtheta[i]);
        }
        assert_eq!(p.eval_theta(0.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn interpolation_between_nodes() {
        let p = solve_lane_emden(1.0, 1e-4, 3.0).unwrap();
        for &x in &[0.123_45, 1.000_05, 2.718_281] {
            let (t, d) = p.eval_theta(x).unwrap();
            assert!((t - AnalyticIndex::One.theta(x)).abs() < 1e-9);
            assert!((d - AnalyticIndex::One.dtheta(x)).abs() < 1e-8);
        }
        assert!(matches!(p.eval_theta(3.5), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn beyond_surface_is_zero() {
        let p = solve_lane_emden(1.0, 1e-3, 5.0).unwrap();
        assert_eq!(p.eval_theta(3.2).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn polytrope_admissibility() {
        let one = Polytrope::for_index(1.0).unwrap();
        assert!(one.theta_admissible(3.0).is_some());
        assert!(one.theta_admissible(3.2).is_none());
        let five = Polytrope::for_index(1.0 / 0.2).unwrap();
        assert!(matches!(five, Polytrope::Analytic(AnalyticIndex::Five)));
        assert!(five.theta_admissible(40.0).is_some());
    }
}
