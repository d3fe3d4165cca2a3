//! Run orchestration: time loop, energy ledger, profile snapshots and convergence sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use crate::config::RunConfig;
use crate::dg::{DgSpace, StateField};
use crate::diagnostics::{
    central_density, delta_e_step, energies, l1_distance, l1_error, EnergyLedger,
};
use crate::error::{invalid_arg, Error, Result};
use crate::limiter::LimiterConfig;
use crate::operator::{Scheme, Solver, Stage};
use crate::problems::{bounce, initial_state, Kind, Scenario};
use crate::stepper::TimeScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EndTime,
    CentralDensity,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub scheme: Scheme,
    pub n_cells: usize,
    pub k: usize,
    pub rk_order: usize,
    pub steps: usize,
    pub t_final: f64,
    pub wall_time: f64,
    pub ledger: EnergyLedger,
    /// Time and central density after every step, starting at `t = 0`.
    pub times: Vec<f64>,
    pub rho_c: Vec<f64>,
    /// `∫|u_h - u_ref| dr` per variable when the scenario has a reference.
    pub l1_errors: Option<[f64; 3]>,
    pub bounce: Option<(f64, f64)>,
    pub max_troubled: usize,
    pub stop: StopReason,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "scheme = {}", self.scheme.name());
        let _ = writeln!(s, "cells = {}", self.n_cells);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "rk = {}", self.rk_order);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "t_final = {:.16e}", self.t_final);
        let _ = writeln!(s, "stop = {:?}", self.stop);
        let _ = writeln!(s, "wall_time_s = {:.3}", self.wall_time);
        if let Some(r) = self.ledger.last() {
            let e = &r.energies;
            let _ = writeln!(s, "E_int = {:.16e}", e.e_int);
            let _ = writeln!(s, "E_kin = {:.16e}", e.e_kin);
            let _ = writeln!(s, "E_grav = {:.16e}", e.e_grav);
            let _ = writeln!(s, "E_tot = {:.16e}", e.e_tot);
        }
        let _ = writeln!(s, "dE_cum = {:.16e}", self.ledger.cumulative);
        let _ = writeln!(
            s,
            "max_abs_dE_cum = {:.16e}",
            self.ledger.max_abs_cumulative()
        );
        if let Some(e) = self.l1_errors {
            let _ = writeln!(
                s,
                "l1_rho = {:.16e}\nl1_mom = {:.16e}\nl1_ene = {:.16e}",
                e[0], e[1], e[2]
            );
        }
        if let Some((t, r)) = self.bounce {
            let _ = writeln!(s, "bounce_time = {t:.16e}\nbounce_rho_c = {r:.16e}");
        }
        s
    }
}

/// Final state of a run together with its report.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub scenario: Scenario,
    pub space: DgSpace,
    pub stage: Stage,
}

/// Limiter settings of `cfg` on top of the scenario defaults.
pub fn limiter_config(cfg: &RunConfig, s: &Scenario) -> LimiterConfig {
    LimiterConfig {
        enabled: cfg.limiter.enabled.unwrap_or(s.limiter),
        beta: cfg.limiter.beta,
        m: cfg.limiter.m,
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Profile sample `(r, ρ, u, p, Φ)` at every quadrature node.
pub fn profile_csv(space: &DgSpace, stage: &Stage, s: &Scenario) -> Result<String> {
    let eos = s.eos()?;
    let rho = space.at_nodes(&stage.u.rho);
    let mom = space.at_nodes(&stage.u.mom);
    let ene = space.at_nodes(&stage.u.ene);
    let mut out = String::from("r,rho,u,p,phi\n");
    for (i, &r) in space.all_nodes().iter().enumerate() {
        let p = eos.pressure_cons(rho[i], mom[i], ene[i]);
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r,
            rho[i],
            mom[i] / rho[i],
            p,
            stage.grav.phi_nodes[i]
        );
    }
    Ok(out)
}

/// Runs `cfg`, calling `on_snapshot(index, stage)` at `t = 0`, every `snapshot_dt` and at
/// the end.
pub fn simulate_with(
    cfg: &RunConfig,
    on_snapshot: &mut (dyn FnMut(usize, &Scenario, &DgSpace, &Stage) -> Result<()> + Send),
) -> Result<RunOutput> {
    let s = cfg.scenario()?;
    let space = s.space()?;
    let scheme = TimeScheme::from_order(s.rk_order)?;
    let mut solver = Solver::new(
        space.clone(),
        s.physics(cfg.scheme, limiter_config(cfg, &s))?,
    );
    solver.parallel = cfg.threads != 1;
    let u0 = initial_state(&s, &space)?;
    let threads = cfg.threads;
    let max_steps = cfg.max_steps;
    let ledger_every = cfg.ledger_every.max(1);
    let warnings = cfg.warnings();
    let space_c = space.clone();
    let s_c = s.clone();

    let body = move || -> Result<(RunReport, Stage)> {
        let space = space_c;
        let s = s_c;
        let clock = Instant::now();
        let faces = space.mesh().faces().to_vec();
        let abort = |step: usize, time: f64, e: Error| match e {
            Error::SolverAbort { .. } => e,
            other => Error::SolverAbort {
                step,
                time,
                reason: other.to_string(),
            },
        };
        let mut stage = solver
            .stage(u0.clone(), 0.0)
            .map_err(|e| abort(0, 0.0, e))?;
        let mut e_now = energies(&space, &stage.u, &stage.grav, s.energy_factor);
        let rc0 = central_density(&space, &stage.u, s.central_window);
        let mut ledger = EnergyLedger::start(0.0, e_now, rc0);
        let (mut times, mut rho_c) = (vec![0.0], vec![rc0]);
        on_snapshot(0, &s, &space, &stage)?;
        let mut snap_idx = 1;
        let mut next_snap = if s.snapshot_dt > 0.0 {
            s.snapshot_dt
        } else {
            f64::INFINITY
        };
        let (mut steps, mut pending_de, mut max_troubled) = (0usize, 0.0, 0usize);
        let mut stop = StopReason::EndTime;
        let t_end = s.t_end;
        while stage.t < t_end * (1.0 - 4.0 * f64::EPSILON) {
            if max_steps.is_some_and(|m| steps >= m) {
                stop = StopReason::MaxSteps;
                break;
            }
            let t = stage.t;
            let mut dt = solver
                .cfl_dt(&stage.u, s.cfl)
                .map_err(|e| abort(steps, t, e))?;
            dt = dt.min(t_end - t).min(next_snap - t);
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::SolverAbort {
                    step: steps,
                    time: t,
                    reason: format!("time step {dt}"),
                });
            }
            let (new, rec) = solver
                .step(&stage, dt, scheme)
                .map_err(|e| abort(steps, t, e))?;
            steps += 1;
            max_troubled = max_troubled.max(rec.troubled);
            let e_new = energies(&space, &new.u, &new.grav, s.energy_factor);
            pending_de +=
                delta_e_step(e_now.e_tot, e_new.e_tot, &rec, &faces, s.g, s.energy_factor);
            e_now = e_new;
            // Land exactly on the end and snapshot times.
            let t_new = if (t_end - new.t).abs() <= 4.0 * f64::EPSILON * t_end {
                t_end
            } else {
                new.t
            };
            stage = Stage { t: t_new, ..new };
            let rc = central_density(&space, &stage.u, s.central_window);
            times.push(stage.t);
            rho_c.push(rc);
            let done = stage.t >= t_end * (1.0 - 4.0 * f64::EPSILON);
            let stop_dens = s.stop_rho_c.is_some_and(|lim| rc >= lim);
            if steps % ledger_every == 0 || done || stop_dens {
                ledger.push(stage.t, e_now, pending_de, rc);
                pending_de = 0.0;
            }
            if stage.t >= next_snap * (1.0 - 4.0 * f64::EPSILON) && !done {
                on_snapshot(snap_idx, &s, &space, &stage)?;
                snap_idx += 1;
                next_snap += s.snapshot_dt;
            }
            if stop_dens {
                stop = StopReason::CentralDensity;
                break;
            }
        }
        if pending_de != 0.0 {
            let rc = *rho_c.last().expect("at least the initial sample");
            ledger.push(stage.t, e_now, pending_de, rc);
        }
        on_snapshot(snap_idx, &s, &space, &stage)?;

        let l1_errors = reference_error(&s, &space, &stage, &u0);
        let bounce = if s.kind == Kind::ToyCollapse {
            bounce(&times, &rho_c)
        } else {
            None
        };
        let report = RunReport {
            scenario: s.name.clone(),
            scheme: solver.physics.scheme,
            n_cells: space.n_cells(),
            k: space.degree(),
            rk_order: scheme.order(),
            steps,
            t_final: stage.t,
            wall_time: clock.elapsed().as_secs_f64(),
            ledger,
            times,
            rho_c,
            l1_errors,
            bounce,
            max_troubled,
            stop,
            warnings,
        };
        Ok((report, stage))
    };
    let (report, stage) = in_pool(threads, body)??;
    Ok(RunOutput {
        report,
        scenario: s,
        space,
        stage,
    })
}

/// L¹ error against the exact solution (manufactured) or the initial projection (steady
/// states).
fn reference_error(
    s: &Scenario,
    space: &DgSpace,
    stage: &Stage,
    u0: &StateField,
) -> Option<[f64; 3]> {
    match s.kind {
        Kind::WbGamma2 | Kind::WbGamma12 => Some(l1_error(space, &stage.u.sub(u0), |_| [0.0; 3])),
        Kind::Manufactured => {
            let f = s.exact()?;
            let t = stage.t;
            Some(l1_error(space, &stage.u, |r| f(r, t)))
        }
        _ => None,
    }
}

/// Runs without writing any files.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutput> {
    simulate_with(cfg, &mut |_, _, _, _| Ok(()))
}

/// Runs `cfg`, writing `ledger.csv`, `profile_NNNN.csv`, `snapshots.csv` and
/// `summary.txt` to the output directory when one is configured.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let Some(dir) = cfg.output_dir.clone() else {
        return Ok(simulate(cfg)?.report);
    };
    fs::create_dir_all(&dir)?;
    let mut index = String::from("index,t,file\n");
    let out = {
        let index = &mut index;
        let dir = dir.clone();
        simulate_with(cfg, &mut move |i, s, space, stage| {
            let name = format!("profile_{i:04}.csv");
            fs::write(dir.join(&name), profile_csv(space, stage, s)?)?;
            let _ = writeln!(index, "{i},{:.16e},{name}", stage.t);
            Ok(())
        })?
    };
    write_outputs(&dir, &out.report, &index)?;
    Ok(out.report)
}

fn write_outputs(dir: &Path, report: &RunReport, index: &str) -> Result<()> {
    fs::write(dir.join("ledger.csv"), report.ledger.to_csv())?;
    fs::write(dir.join("snapshots.csv"), index)?;
    let mut series = String::from("t,rho_c\n");
    for (t, r) in report.times.iter().zip(&report.rho_c) {
        let _ = writeln!(series, "{t:.16e},{r:.16e}");
    }
    fs::write(dir.join("central_density.csv"), series)?;
    fs::write(dir.join("summary.txt"), report.summary())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub errors: [f64; 3],
    /// `log₂(e_prev / e)` scaled by the mesh ratio, absent on the first row.
    pub rates: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub scenario: String,
    pub scheme: Scheme,
    /// `"exact"` or the cell count of the self-reference.
    pub reference: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,err_rho,err_mom,err_ene,rate_rho,rate_mom,rate_ene\n");
        for r in &self.rows {
            let e = r.errors;
            let _ = write!(s, "{},{:.16e},{:.16e},{:.16e}", r.n, e[0], e[1], e[2]);
            match r.rates {
                Some(q) => {
                    let _ = writeln!(s, ",{:.6},{:.6},{:.6}", q[0], q[1], q[2]);
                }
                None => s.push_str(",,,\n"),
            }
        }
        s
    }
}

/// Errors and observed orders on the meshes `ns`, against the exact solution when the
/// scenario has one and a self-reference run otherwise.
pub fn convergence_sweep(cfg: &RunConfig, ns: &[usize]) -> Result<ConvergenceTable> {
    if ns.len() < 2 {
        return invalid_arg("a convergence sweep needs at least two meshes");
    }
    let base = cfg.scenario()?;
    let exact = matches!(
        base.kind,
        Kind::Manufactured | Kind::WbGamma2 | Kind::WbGamma12
    );
    let with_n = |n: usize| {
        let mut c = cfg.clone();
        c.set("n", n);
        c.output_dir = None;
        c
    };
    let reference = if exact {
        None
    } else {
        let n_ref = cfg
            .reference_n
            .unwrap_or(8 * ns.iter().copied().max().unwrap_or(1));
        Some(simulate(&with_n(n_ref))?)
    };
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut prev: Option<(usize, [f64; 3])> = None;
    for &n in ns {
        let out = simulate(&with_n(n))?;
        let errors = match &reference {
            None => out
                .report
                .l1_errors
                .ok_or_else(|| Error::InvalidState("no exact solution".into()))?,
            Some(r) => l1_distance(&out.space, &out.stage.u, &r.space, &r.stage.u),
        };
        let rates = prev.map(|(pn, pe)| {
            let ratio = (n as f64 / pn as f64).log2();
            [0, 1, 2].map(|c| (pe[c] / errors[c]).log2() / ratio)
        });
        rows.push(ConvergenceRow { n, errors, rates });
        prev = Some((n, errors));
    }
    Ok(ConvergenceTable {
        scenario: base.name,
        scheme: cfg.scheme,
        reference: match &reference {
            None => "exact".into(),
            Some(r) => r.report.n_cells.to_string(),
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run_is_deterministic() {
        let mut c = RunConfig::new("explosion");
        c.set("n", 20).set("t_end", 0.01);
        let a = simulate(&c).unwrap();
        c.threads = 1;
        let b = simulate(&c).unwrap();
        assert_eq!(a.report.ledger.to_csv(), b.report.ledger.to_csv());
        assert_eq!(a.stage.u, b.stage.u);
        assert!((a.report.t_final - 0.01).abs() < 1e-15);
        assert!(a.report.steps > 0);
    }

    #[test]
    fn ledger_cadence_keeps_cumulative() {
        let mut c = RunConfig::new("explosion");
        c.set("n", 20).set("t_end", 0.01);
        c.scheme = Scheme::Standard;
        let a = simulate(&c).unwrap().report;
        c.ledger_every = 3;
        let b = simulate(&c).unwrap().report;
        assert!(b.ledger.rows.len() < a.ledger.rows.len());
        let (x, y) = (a.ledger.cumulative, b.ledger.cumulative);
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{x} vs {y}");
        assert_eq!(a.ledger.last().unwrap().t, b.ledger.last().unwrap().t);
    }

    #[test]
    fn max_steps_and_snapshots() {
        let mut c = RunConfig::new("explosion");
        c.set("n", 16).set("snapshot_dt", 0.002).set("t_end", 0.005);
        let mut seen = Vec::new();
        let out = simulate_with(&c, &mut |i, _, _, st| {
            seen.push((i, st.t));
            Ok(())
        })
        .unwrap();
        assert_eq!(
            seen.iter().map(|x| x.0).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
        assert!((seen[1].1 - 0.002).abs() < 1e-15 && (seen[2].1 - 0.004).abs() < 1e-15);
        assert_eq!(out.report.stop, StopReason::EndTime);
        c.max_steps = Some(2);
        let out = simulate(&c).unwrap();
        assert_eq!(
            (out.report.steps, out.report.stop),
            (2, StopReason::MaxSteps)
        );
    }

    #[test]
    fn sweep_needs_two_meshes() {
        let c = RunConfig::new("manufactured");
        assert!(matches!(
            convergence_sweep(&c, &[25]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn profile_has_header_and_rows() {
        let mut c = RunConfig::new("wb_gamma2");
        c.set("n", 4).set("t_end", 1e-3);
        let out = simulate(&c).unwrap();
        let csv = profile_csv(&out.space, &out.stage, &out.scenario).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,rho,u,p,phi");
        assert_eq!(lines.len(), 1 + out.space.all_nodes().len());
    }
}
