//! Python bindings: tile systems, agent models, mesh networks and the
//! coloring checker. Reports cross the boundary as plain dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use nucleate::agent::{AgentId, AgentModel as CoreModel};
use nucleate::assembly;
use nucleate::format::render_ascii;
use nucleate::harness;
use nucleate::lcl::{self, CoverageMode};
use nucleate::mesh::{ExecMode, MeshNetwork as CoreNetwork};
use nucleate::tam::TileAssemblySystem;
use nucleate::tilesets;

fn err(e: nucleate::Error) -> PyErr {
    match e {
        nucleate::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn coverage_mode(induced: bool) -> CoverageMode {
    if induced {
        CoverageMode::Induced
    } else {
        CoverageMode::FullSurface
    }
}

#[pyclass(name = "Mesh", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct Mesh(nucleate::Mesh);

#[pymethods]
impl Mesh {
    #[new]
    #[pyo3(signature = (side, dim = 2))]
    fn new(side: usize, dim: usize) -> PyResult<Self> {
        nucleate::Mesh::new(dim, side).map(Mesh).map_err(err)
    }

    #[getter]
    fn side(&self) -> usize {
        self.0.side()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.vertex_count()
    }

    fn neighbors(&self, point: Vec<i64>) -> PyResult<Vec<Vec<i64>>> {
        let p = point_from(&point)?;
        let ns = self.0.neighbors(p).map_err(err)?;
        Ok(ns.into_iter().map(|q| point_to(q, self.0.dim())).collect())
    }

    fn __repr__(&self) -> String {
        format!("Mesh(side={}, dim={})", self.0.side(), self.0.dim())
    }
}

fn point_from(c: &[i64]) -> PyResult<nucleate::Point> {
    match *c {
        [x, y] => Ok(nucleate::Point::xy(x, y)),
        [x, y, z] => Ok(nucleate::Point::new(x, y, z)),
        _ => Err(PyValueError::new_err("points have 2 or 3 coordinates")),
    }
}

fn point_to(p: nucleate::Point, dim: usize) -> Vec<i64> {
    [p.x, p.y, p.z][..dim].to_vec()
}

#[pyclass(name = "AssemblyResult", frozen)]
struct AssemblyResult {
    inner: assembly::AssemblyResult,
    coloring: lcl::Coloring,
}

#[pymethods]
impl AssemblyResult {
    #[getter]
    fn terminal(&self) -> bool {
        self.inner.terminal
    }

    #[getter]
    fn stages(&self) -> usize {
        self.inner.stages
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Colors in mesh order; None for empty cells.
    fn colors(&self) -> Vec<Option<u32>> {
        self.coloring.colors().to_vec()
    }

    fn ascii(&self) -> String {
        render_ascii(&self.coloring)
    }

    #[pyo3(signature = (induced = false))]
    fn check_coloring<'py>(&self, py: Python<'py>, induced: bool) -> PyResult<Bound<'py, PyAny>> {
        let report = lcl::check_weak_coloring(&self.coloring, coverage_mode(induced)).map_err(err)?;
        json_to_py(py, &report.to_json())
    }
}

#[pyclass(name = "TileSystem", frozen)]
struct TileSystem(TileAssemblySystem);

#[pymethods]
impl TileSystem {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        TileAssemblySystem::from_json(text).map(TileSystem).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        TileAssemblySystem::load(path).map(TileSystem).map_err(err)
    }

    #[staticmethod]
    fn tstar() -> Self {
        TileSystem(tilesets::tileset_t_star().tiles().expect("T* is a tile system").clone())
    }

    #[getter]
    fn temperature(&self) -> u32 {
        self.0.temperature
    }

    #[getter]
    fn tile_types(&self) -> usize {
        self.0.tiles.len()
    }

    fn content_hash(&self) -> String {
        self.0.content_hash()
    }

    fn to_json(&self) -> String {
        self.0.to_json_pretty()
    }

    #[pyo3(signature = (mesh, seed = 0, max_stages = None))]
    fn assemble(&self, py: Python<'_>, mesh: Mesh, seed: u64, max_stages: Option<usize>) -> PyResult<AssemblyResult> {
        let inner = py.detach(|| assembly::run(&self.0, mesh.0, seed, max_stages)).map_err(err)?;
        let coloring = lcl::Coloring::from_configuration(&inner.configuration, &self.0.tiles, mesh.0);
        Ok(AssemblyResult { inner, coloring })
    }

    /// Embed as an agent model with irreversible attachment.
    fn embed(&self) -> AgentModel {
        AgentModel(nucleate::agent::embed_tile_system(&self.0))
    }
}

#[pyclass(name = "AgentModel", frozen)]
struct AgentModel(CoreModel);

#[pymethods]
impl AgentModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreModel::from_json(text).map(AgentModel).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        CoreModel::load(path).map(AgentModel).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, pi_nu, rule_id = "checkerboard-local"))]
    fn nucleation_family(n: usize, pi_nu: f64, rule_id: &str) -> PyResult<Self> {
        let named = tilesets::nucleation_family(n, pi_nu, rule_id).map_err(err)?;
        Ok(AgentModel(named.model().expect("families are agent models").clone()))
    }

    #[staticmethod]
    fn fidelity() -> Self {
        AgentModel(tilesets::fidelity_model())
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.0.name.clone()
    }

    #[getter]
    fn agents(&self) -> Vec<String> {
        self.0.agents.iter().map(|a| a.name.clone()).collect()
    }

    #[getter]
    fn pi_nu(&self) -> f64 {
        self.0.pi_nu
    }

    fn content_hash(&self) -> String {
        self.0.content_hash()
    }

    fn to_json(&self) -> String {
        self.0.to_json_pretty()
    }
}

#[pyclass(name = "MeshNetwork")]
struct MeshNetwork(CoreNetwork);

#[pymethods]
impl MeshNetwork {
    #[new]
    #[pyo3(signature = (model, mesh, seed = 0, parallel = false))]
    fn new(model: &AgentModel, mesh: Mesh, seed: u64, parallel: bool) -> PyResult<Self> {
        let mode = if parallel { ExecMode::Parallel } else { ExecMode::Sequential };
        let mut net = CoreNetwork::new(&model.0, mesh.0, seed).map_err(err)?.with_mode(mode);
        net.init_round0().map_err(err)?;
        Ok(MeshNetwork(net))
    }

    #[getter]
    fn round(&self) -> u64 {
        self.0.round()
    }

    /// Run `rounds` more rounds; returns the number of state changes.
    fn run(&mut self, py: Python<'_>, rounds: u64) -> PyResult<usize> {
        let net = &mut self.0;
        py.detach(|| net.run(rounds)).map(|events| events.len()).map_err(err)
    }

    /// Agent names in mesh order; None for idle processors.
    fn snapshot(&self) -> Vec<Option<String>> {
        let model = self.0.model();
        self.0.snapshot().into_iter().map(|s| s.map(|AgentId(a)| model.agents[a].name.clone())).collect()
    }

    fn colors(&self) -> Vec<Option<u32>> {
        self.0.coloring().colors().to_vec()
    }

    fn ascii(&self) -> String {
        render_ascii(&self.0.coloring())
    }

    #[pyo3(signature = (induced = false))]
    fn check_coloring<'py>(&self, py: Python<'py>, induced: bool) -> PyResult<Bound<'py, PyAny>> {
        let report = lcl::check_weak_coloring(&self.0.coloring(), coverage_mode(induced)).map_err(err)?;
        json_to_py(py, &report.to_json())
    }

    fn locality_violations(&self) -> u64 {
        self.0.locality().violations
    }
}

/// Check a weak coloring given colors in mesh order (None = uncolored).
#[pyfunction]
#[pyo3(signature = (mesh, colors, c, induced = false))]
fn check_weak_coloring<'py>(py: Python<'py>, mesh: Mesh, colors: Vec<Option<u32>>, c: u32, induced: bool) -> PyResult<Bound<'py, PyAny>> {
    let col = lcl::Coloring::from_colors(mesh.0, c, colors).map_err(err)?;
    let report = lcl::check_weak_coloring(&col, coverage_mode(induced)).map_err(err)?;
    json_to_py(py, &report.to_json())
}

#[pyfunction]
#[pyo3(signature = (model, sizes, rounds, trials, seed = 0))]
fn experiment<'py>(py: Python<'py>, model: &AgentModel, sizes: Vec<usize>, rounds: u64, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let spec = harness::ExperimentSpec { model_ref: model.0.name.clone().unwrap_or_else(|| model.0.content_hash()), model: model.0.clone(), sizes, rounds, trials, master_seed: seed };
    let result = py.detach(|| harness::run_experiment(&spec)).map_err(err)?;
    json_to_py(py, &result.to_json())
}

#[pyfunction]
#[pyo3(signature = (model, side = 3, samples = 10_000, seed = 0))]
fn fidelity<'py>(py: Python<'py>, model: &AgentModel, side: usize, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| harness::run_fidelity(&model.0, side, samples, seed)).map_err(err)?;
    let text = serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

#[pymodule]
fn pynucleate(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mesh>()?;
    m.add_class::<TileSystem>()?;
    m.add_class::<AssemblyResult>()?;
    m.add_class::<AgentModel>()?;
    m.add_class::<MeshNetwork>()?;
    m.add_function(wrap_pyfunction!(check_weak_coloring, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add("TSTAR_HASH", tilesets::TSTAR_HASH)?;
    Ok(())
}
