//! Python bindings for `flowcert`.
//!
//! Elements are passed as integer codes, flows as lists of codes and
//! multisets as lists of flows. Reports come back as plain dicts with the
//! same layout as the CLI's JSON output.

use std::collections::BTreeSet;

use flowcert::{CertifyOptions, FlowError, PathOutcome};
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyList;

pyo3::create_exception!(
    flowcert,
    FlowcertError,
    PyException,
    "Raised for any error reported by flowcert."
);

fn err(e: FlowError) -> PyErr {
    FlowcertError::new_err(format!("{}: {e}", e.kind()))
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A finite abelian group `Z_{m1} x ... x Z_{mk}`.
#[pyclass(name = "Group", module = "flowcert", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyGroup(pub flowcert::Group);

#[pymethods]
impl PyGroup {
    #[new]
    fn new(factors: Vec<u32>) -> PyResult<Self> {
        flowcert::Group::new(&factors).map(PyGroup).map_err(err)
    }

    #[staticmethod]
    fn cyclic(m: u32) -> PyResult<Self> {
        flowcert::Group::cyclic(m).map(PyGroup).map_err(err)
    }

    #[getter]
    fn factors(&self) -> Vec<u32> {
        self.0.factors().to_vec()
    }

    #[getter]
    fn order(&self) -> u32 {
        self.0.order()
    }

    fn elements(&self) -> Vec<u32> {
        self.0.elements().iter().map(|e| e.code()).collect()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        let (a, b) = (self.0.elem(a).map_err(err)?, self.0.elem(b).map_err(err)?);
        self.0.add(a, b).map(|e| e.code()).map_err(err)
    }

    fn neg(&self, a: u32) -> PyResult<u32> {
        let a = self.0.elem(a).map_err(err)?;
        self.0.neg(a).map(|e| e.code()).map_err(err)
    }

    /// Each automorphism as its list of images of `0, 1, ..., |G| - 1`.
    fn automorphisms(&self) -> PyResult<Vec<Vec<u32>>> {
        let auts = self.0.automorphisms().map_err(err)?;
        Ok(auts
            .iter()
            .map(|a| a.images().iter().map(|e| e.code()).collect())
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Group({:?})", self.0.factors())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// A tuple of group elements summing to zero.
#[pyclass(name = "Flow", module = "flowcert", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyFlow {
    group: flowcert::Group,
    inner: flowcert::Flow,
}

impl PyFlow {
    fn wrap(group: &flowcert::Group, inner: flowcert::Flow) -> Self {
        PyFlow {
            group: group.clone(),
            inner,
        }
    }
}

#[pymethods]
impl PyFlow {
    #[new]
    fn new(group: &PyGroup, codes: Vec<u32>) -> PyResult<Self> {
        let inner = flowcert::Flow::from_codes(&group.0, &codes).map_err(err)?;
        Ok(PyFlow::wrap(&group.0, inner))
    }

    #[getter]
    fn codes(&self) -> Vec<u32> {
        self.inner.codes()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn group(&self) -> PyGroup {
        PyGroup(self.group.clone())
    }

    fn support(&self) -> Vec<usize> {
        self.inner.support()
    }

    /// The 0/1 point of the flow polytope (one block of length `|G|` per index).
    fn vertex_embedding(&self) -> Vec<u32> {
        flowcert::vertex_embedding(&self.group, &self.inner).coords().to_vec()
    }

    fn translate(&self, other: &PyFlow) -> PyResult<PyFlow> {
        let t = flowcert::translate(&self.group, &self.inner, &other.inner).map_err(err)?;
        Ok(PyFlow::wrap(&self.group, t))
    }

    fn permute(&self, sigma: Vec<usize>) -> PyResult<PyFlow> {
        let p = flowcert::permute(&self.inner, &sigma).map_err(err)?;
        Ok(PyFlow::wrap(&self.group, p))
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Flow({:?})", self.inner.codes())
    }
}

/// A sorted multiset of flows with a common group and length.
#[pyclass(name = "FlowMultiset", module = "flowcert", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyMultiset(pub flowcert::FlowMultiset);

#[pymethods]
impl PyMultiset {
    #[new]
    fn new(group: &PyGroup, n: usize, rows: Vec<Vec<u32>>) -> PyResult<Self> {
        flowcert::FlowMultiset::from_codes(&group.0, n, &rows)
            .map(PyMultiset)
            .map_err(err)
    }

    #[getter]
    fn codes(&self) -> Vec<Vec<u32>> {
        self.0.codes()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn group(&self) -> PyGroup {
        PyGroup(self.0.group().clone())
    }

    fn flows(&self) -> Vec<PyFlow> {
        self.0
            .flows()
            .iter()
            .map(|f| PyFlow::wrap(self.0.group(), f.clone()))
            .collect()
    }

    /// The `n x |G|` matrix of per-index element counts.
    fn signature(&self) -> Vec<Vec<u32>> {
        flowcert::signature(&self.0).rows()
    }

    fn compatible(&self, other: &PyMultiset) -> PyResult<bool> {
        flowcert::compatible(&self.0, &other.0).map_err(err)
    }

    /// Every multiset compatible with this one, in canonical order.
    fn fiber(&self) -> PyResult<Vec<PyMultiset>> {
        let sig = flowcert::signature(&self.0);
        let members = flowcert::enumerate_fiber(&sig, self.0.group(), self.0.n()).map_err(err)?;
        Ok(members.into_iter().map(PyMultiset).collect())
    }

    /// Replaces the sub-multiset `removed` by the compatible `inserted`.
    fn apply_move(&self, removed: &PyMultiset, inserted: &PyMultiset) -> PyResult<PyMultiset> {
        let mv = flowcert::Move::new(removed.0.clone(), inserted.0.clone()).map_err(err)?;
        flowcert::apply_move(&self.0, &mv).map(PyMultiset).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.degree()
    }

    fn __repr__(&self) -> String {
        format!("FlowMultiset({:?})", self.0.codes())
    }
}

#[pyfunction]
fn enumerate_flows(group: &PyGroup, n: usize) -> PyResult<Vec<PyFlow>> {
    let flows = flowcert::enumerate_flows(&group.0, n).map_err(err)?;
    Ok(flows.into_iter().map(|f| PyFlow::wrap(&group.0, f)).collect())
}

#[pyfunction]
fn compatible(a: &PyMultiset, b: &PyMultiset) -> PyResult<bool> {
    flowcert::compatible(&a.0, &b.0).map_err(err)
}

/// Swaps the entries of `f` and `g` on `indices` (0-based).
#[pyfunction]
fn exchange_pair(f: &PyFlow, g: &PyFlow, indices: BTreeSet<usize>) -> PyResult<(PyFlow, PyFlow)> {
    let (a, b) = flowcert::exchange_pair(&f.group, &f.inner, &g.inner, &indices).map_err(err)?;
    Ok((PyFlow::wrap(&f.group, a), PyFlow::wrap(&f.group, b)))
}

/// A non-empty subset `J` of `indices` such that `f` and `g` have equal
/// partial sums over `J` together with `extra`.
#[pyfunction]
#[pyo3(signature = (f, g, indices, extra = BTreeSet::new()))]
fn find_exchange_subset(
    f: &PyFlow,
    g: &PyFlow,
    indices: BTreeSet<usize>,
    extra: BTreeSet<usize>,
) -> PyResult<Vec<usize>> {
    flowcert::find_exchange_subset(&f.group, &f.inner, &g.inner, &indices, &extra)
        .map(|s| s.into_iter().collect())
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (group, n, d_max, m, threads = None, all_witnesses = false))]
fn certify<'py>(
    py: Python<'py>,
    group: &PyGroup,
    n: usize,
    d_max: usize,
    m: usize,
    threads: Option<usize>,
    all_witnesses: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = CertifyOptions {
        threads,
        all_witnesses,
        ..Default::default()
    };
    let report = py
        .detach(|| flowcert::certify_degree_with(&group.0, n, d_max, m, &opts))
        .map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn find_indispensable<'py>(
    py: Python<'py>,
    group: &PyGroup,
    n: usize,
    m: usize,
    max_degree: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let search = py
        .detach(|| flowcert::find_indispensable(&group.0, n, m, max_degree))
        .map_err(err)?;
    to_py(py, &search)
}

/// The multisets along a shortest path of moves of degree at most `m`, or
/// `None` when `a` and `b` lie in different components.
#[pyfunction]
fn find_move_path<'py>(
    py: Python<'py>,
    a: &PyMultiset,
    b: &PyMultiset,
    m: usize,
) -> PyResult<Option<Bound<'py, PyList>>> {
    match flowcert::find_move_path(&a.0, &b.0, m).map_err(err)? {
        PathOutcome::Connected(path) => {
            let steps: Vec<PyMultiset> = path.steps.into_iter().map(PyMultiset).collect();
            Ok(Some(PyList::new(py, steps)?))
        }
        PathOutcome::NotConnected { .. } => Ok(None),
    }
}

#[pymodule]
#[pyo3(name = "flowcert")]
pub fn flowcert_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FlowcertError", m.py().get_type::<FlowcertError>())?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PyFlow>()?;
    m.add_class::<PyMultiset>()?;
    m.add_function(wrap_pyfunction!(enumerate_flows, m)?)?;
    m.add_function(wrap_pyfunction!(compatible, m)?)?;
    m.add_function(wrap_pyfunction!(exchange_pair, m)?)?;
    m.add_function(wrap_pyfunction!(find_exchange_subset, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(find_indispensable, m)?)?;
    m.add_function(wrap_pyfunction!(find_move_path, m)?)?;
    Ok(())
}
