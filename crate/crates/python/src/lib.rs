//! Python bindings: `run`, `run_config` and `sweep`.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use sphdg::driver::ConvergenceTable;
use sphdg::{convergence_sweep, parse_config, run as run_sim, Error, RunConfig, RunReport, Scheme};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::SolverAbort { .. } => PyRuntimeError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn build_config(
    scenario: &str,
    scheme: &str,
    overrides: Option<HashMap<String, String>>,
    threads: usize,
) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::new(scenario);
    cfg.scheme = Scheme::parse(scheme).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown scheme {scheme:?}; expected wb, standard or standard_tec"
        ))
    })?;
    cfg.threads = threads;
    let mut keys: Vec<_> = overrides.unwrap_or_default().into_iter().collect();
    keys.sort();
    for (k, v) in keys {
        cfg.set(&k, v);
    }
    cfg.scenario().map_err(to_py)?;
    Ok(cfg)
}

fn report_dict<'py>(py: Python<'py>, r: &RunReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("scenario", &r.scenario)?;
    d.set_item("scheme", r.scheme.name())?;
    d.set_item("cells", r.n_cells)?;
    d.set_item("k", r.k)?;
    d.set_item("rk", r.rk_order)?;
    d.set_item("steps", r.steps)?;
    d.set_item("t_final", r.t_final)?;
    d.set_item("wall_time", r.wall_time)?;
    d.set_item("dE_cum", r.ledger.cumulative)?;
    d.set_item("max_abs_dE_cum", r.ledger.max_abs_cumulative())?;
    d.set_item("l1_errors", r.l1_errors.map(|e| e.to_vec()))?;
    d.set_item("bounce", r.bounce)?;
    d.set_item("times", r.times.clone())?;
    d.set_item("rho_c", r.rho_c.clone())?;
    let rows = &r.ledger.rows;
    let ledger = PyDict::new(py);
    ledger.set_item("t", rows.iter().map(|x| x.t).collect::<Vec<_>>())?;
    ledger.set_item(
        "E_int",
        rows.iter().map(|x| x.energies.e_int).collect::<Vec<_>>(),
    )?;
    ledger.set_item(
        "E_kin",
        rows.iter().map(|x| x.energies.e_kin).collect::<Vec<_>>(),
    )?;
    ledger.set_item(
        "E_grav",
        rows.iter().map(|x| x.energies.e_grav).collect::<Vec<_>>(),
    )?;
    ledger.set_item(
        "E_tot",
        rows.iter().map(|x| x.energies.e_tot).collect::<Vec<_>>(),
    )?;
    ledger.set_item("dE_cum", rows.iter().map(|x| x.de_cum).collect::<Vec<_>>())?;
    d.set_item("ledger", ledger)?;
    Ok(d)
}

fn table_rows<'py>(py: Python<'py>, t: &ConvergenceTable) -> PyResult<Vec<Bound<'py, PyDict>>> {
    t.rows
        .iter()
        .map(|row| {
            let d = PyDict::new(py);
            d.set_item("n", row.n)?;
            d.set_item("errors", row.errors.to_vec())?;
            d.set_item("rates", row.rates.map(|q| q.to_vec()))?;
            Ok(d)
        })
        .collect()
}

/// Runs a named scenario and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (scenario, scheme = "wb", overrides = None, out = None, threads = 0))]
fn run<'py>(
    py: Python<'py>,
    scenario: &str,
    scheme: &str,
    overrides: Option<HashMap<String, String>>,
    out: Option<PathBuf>,
    threads: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = build_config(scenario, scheme, overrides, threads)?;
    cfg.output_dir = out;
    let report = py.detach(|| run_sim(&cfg)).map_err(to_py)?;
    report_dict(py, &report)
}

/// Runs a configuration given as `key = value` text.
#[pyfunction]
#[pyo3(signature = (text, out = None))]
fn run_config<'py>(
    py: Python<'py>,
    text: &str,
    out: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = parse_config(text).map_err(to_py)?;
    if out.is_some() {
        cfg.output_dir = out;
    }
    let report = py.detach(|| run_sim(&cfg)).map_err(to_py)?;
    report_dict(py, &report)
}

/// Convergence sweep over `meshes`; one dict per mesh with errors and rates.
#[pyfunction]
#[pyo3(signature = (scenario, meshes, scheme = "wb", overrides = None, reference_n = None, threads = 0))]
fn sweep<'py>(
    py: Python<'py>,
    scenario: &str,
    meshes: Vec<usize>,
    scheme: &str,
    overrides: Option<HashMap<String, String>>,
    reference_n: Option<usize>,
    threads: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = build_config(scenario, scheme, overrides, threads)?;
    cfg.reference_n = reference_n;
    let table = py
        .detach(|| convergence_sweep(&cfg, &meshes))
        .map_err(to_py)?;
    table_rows(py, &table)
}

/// Adds the module functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}

#[pymodule]
fn sphdg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
