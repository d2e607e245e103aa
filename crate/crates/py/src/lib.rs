//! Python bindings. Laws, points and reports cross the boundary as JSON text
//! in the same formats the command-line tool reads and writes.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use padic_linear::cli::json::{self, LawFile, Overrides, PointsFile};
use padic_linear::discriminate::{discriminate_with, PipelineOptions};
use padic_linear::fgl::FormalGroupLaw;
use padic_linear::lazard::{uniform_embedding, RepStrategy};
use padic_linear::{selftest, Error};

fn value_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn law_from(text: &str) -> PyResult<FormalGroupLaw> {
    let file: LawFile = json::parse(text, "law").map_err(value_err)?;
    file.to_law(Overrides::default()).map_err(value_err)
}

/// Axiom checks of a law as a JSON report.
#[pyfunction]
fn validate(law: &str) -> PyResult<String> {
    let law = law_from(law)?;
    Ok(json::validation(&law.validate()).to_string())
}

/// Product of the points of a points file, as the JSON of a point.
#[pyfunction]
fn multiply(law: &str, points: &str) -> PyResult<String> {
    let law = law_from(law)?;
    let file: PointsFile = json::parse(points, "points").map_err(value_err)?;
    let pts = json::points_from(&law, &file.points).map_err(value_err)?;
    let mut acc = law.identity();
    for p in &pts {
        acc = law.gmul(&acc, p).map_err(runtime_err)?;
    }
    Ok(json::point(&acc).to_string())
}

/// Embedding certificate for a law over Zp.
#[pyfunction]
#[pyo3(signature = (law, pairs = 100, seed = 0))]
fn represent(law: &str, pairs: usize, seed: u64) -> PyResult<String> {
    let law = law_from(law)?;
    let emb = uniform_embedding(&law, RepStrategy::auto()).map_err(runtime_err)?;
    let cert = emb.certify(&[], pairs, seed).map_err(runtime_err)?;
    Ok(json::embedding_certificate(&cert).to_string())
}

/// Discrimination certificate for a finite point set.
#[pyfunction]
#[pyo3(signature = (law, points, budget = 8))]
fn discriminate(law: &str, points: &str, budget: u64) -> PyResult<String> {
    let law = law_from(law)?;
    let file: PointsFile = json::parse(points, "points").map_err(value_err)?;
    let pts = json::points_from(&law, &file.points).map_err(value_err)?;
    let options = PipelineOptions {
        budget,
        ..PipelineOptions::default()
    };
    let cert = discriminate_with(&law, &pts, &options).map_err(runtime_err)?;
    Ok(json::discrimination_certificate(&cert).to_string())
}

/// Runs the command-line tool on `args` and returns (exit code, stdout, stderr).
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let full = std::iter::once("padic-linear".to_string()).chain(args);
    let code = padic_linear::cli::run_with(full, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

/// Built-in acceptance suite as (number, title, passed, detail) tuples.
#[pyfunction]
fn run_selftest() -> Vec<(u32, String, bool, String)> {
    selftest::run_all()
        .into_iter()
        .map(|o| (o.number, o.title.to_string(), o.passed, o.detail))
        .collect()
}

#[pymodule]
pub fn padic_linear_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(multiply, m)?)?;
    m.add_function(wrap_pyfunction!(represent, m)?)?;
    m.add_function(wrap_pyfunction!(discriminate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
