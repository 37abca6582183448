//! Python bindings for the `spacefill` crate.
//!
//! Exact rationals are returned as `fractions.Fraction`, coordinates as
//! Python integers (they may exceed 64 bits at large depths).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use spacefill::analysis;
use spacefill::generators;
use spacefill::geometry::{Coord, Cube as RsCube, SpaceParams};
use spacefill::metrics;
use spacefill::partition::{self, Partition as RsPartition};
use spacefill::sfc::{CurveOrder, CurveSpec};
use spacefill::spacetree::{self, Grid as RsGrid};

use num_rational::BigRational;

fn err(e: spacefill::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn space(k: u32, d: u32) -> PyResult<SpaceParams> {
    SpaceParams::new(k, d).map_err(err)
}

fn fraction<'py>(py: Python<'py>, r: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((metrics::fmt_rational(r),))
}

fn py_int<'py>(py: Python<'py>, text: String) -> PyResult<Bound<'py, PyAny>> {
    py.import("builtins")?.getattr("int")?.call1((text,))
}

fn unwrap_cells(cells: &[Cube]) -> Vec<RsCube> {
    cells.iter().map(|c| c.0.clone()).collect()
}

fn wrap_cells(cells: &[RsCube]) -> Vec<Cube> {
    cells.iter().cloned().map(Cube).collect()
}

/// A box of the `k^d` spacetree: depth and integer coordinates.
#[pyclass(frozen, eq, hash, ord, from_py_object, module = "spacefill_py")]
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Cube(RsCube);

#[pymethods]
impl Cube {
    #[new]
    fn new(k: u32, d: u32, depth: u32, coords: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let coords = coords
            .iter()
            .map(|c| {
                c.str()?
                    .to_str()?
                    .parse::<Coord>()
                    .map_err(|_| PyValueError::new_err("coordinates must be non-negative integers"))
            })
            .collect::<PyResult<Vec<_>>>()?;
        RsCube::new(space(k, d)?, depth, coords).map(Cube).map_err(err)
    }

    /// The unit box.
    #[staticmethod]
    fn root(k: u32, d: u32) -> PyResult<Self> {
        Ok(Cube(RsCube::root(space(k, d)?)))
    }

    #[getter]
    fn k(&self) -> u32 {
        self.0.params().k()
    }

    #[getter]
    fn d(&self) -> u32 {
        self.0.params().d()
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.0.depth()
    }

    #[getter]
    fn coords<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.0.coords().iter().map(|x| py_int(py, x.to_string())).collect()
    }

    fn volume<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.volume())
    }

    fn parent(&self) -> PyResult<Self> {
        self.0.parent().map(Cube).map_err(err)
    }

    fn children(&self) -> PyResult<Vec<Self>> {
        self.0.children().map(|c| wrap_cells(&c)).map_err(err)
    }

    fn contains(&self, other: &Cube) -> PyResult<bool> {
        self.0.contains(&other.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Cube({})", self.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// A grid: a finite antichain of boxes covering the unit cube.
#[pyclass(frozen, eq, skip_from_py_object, module = "spacefill_py")]
#[derive(Clone, PartialEq)]
struct Grid(RsGrid);

#[pymethods]
impl Grid {
    #[staticmethod]
    fn unit(k: u32, d: u32) -> PyResult<Self> {
        Ok(Grid(RsGrid::unit(space(k, d)?)))
    }

    #[staticmethod]
    fn regular(k: u32, d: u32, m: u32) -> PyResult<Self> {
        RsGrid::regular(space(k, d)?, m).map(Grid).map_err(err)
    }

    /// Seeded random grid of `t` subdivisions below `max_depth`.
    #[staticmethod]
    fn random(k: u32, d: u32, seed: u64, t: usize, max_depth: u32) -> PyResult<Self> {
        RsGrid::random(space(k, d)?, seed, t, max_depth).map(Grid).map_err(err)
    }

    #[staticmethod]
    fn from_cells(k: u32, d: u32, cells: Vec<Cube>) -> PyResult<Self> {
        RsGrid::from_cells(space(k, d)?, unwrap_cells(&cells)).map(Grid).map_err(err)
    }

    /// The coarsest grid containing every given box as a cell.
    #[staticmethod]
    fn minimal(k: u32, d: u32, boxes: Vec<Cube>) -> PyResult<Self> {
        spacetree::minimal_grid(space(k, d)?, &unwrap_cells(&boxes)).map(Grid).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        RsGrid::from_json(text).map(Grid).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn cells(&self) -> Vec<Cube> {
        wrap_cells(self.0.cells())
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.0.depth()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, cell: &Cube) -> bool {
        self.0.has_cell(&cell.0)
    }

    fn subdivide(&self, cell: &Cube) -> PyResult<Self> {
        self.0.subdivide(&cell.0).map(Grid).map_err(err)
    }

    fn refines(&self, coarse: &Grid) -> PyResult<bool> {
        self.0.refines(&coarse.0).map_err(err)
    }

    fn meet(&self, other: &Grid) -> PyResult<Self> {
        self.0.meet(&other.0).map(Grid).map_err(err)
    }

    fn __repr__(&self) -> String {
        let p = self.0.params();
        format!("Grid(k={}, d={}, cells={})", p.k(), p.d(), self.0.len())
    }
}

/// A discrete space-filling curve family bound to `(k, d)`.
#[pyclass(frozen, skip_from_py_object, module = "spacefill_py")]
#[derive(Clone)]
struct Curve(CurveSpec);

#[pymethods]
impl Curve {
    #[new]
    fn new(name: &str, k: u32, d: u32) -> PyResult<Self> {
        CurveSpec::from_name(name, space(k, d)?).map(Curve).map_err(err)
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.0.family().name()
    }

    #[getter]
    fn is_continuous(&self) -> bool {
        self.0.is_continuous()
    }

    /// Cells of `grid` in curve order.
    fn order(&self, grid: &Grid) -> PyResult<Vec<Cube>> {
        self.0
            .order_cells(&grid.0)
            .map(|s| wrap_cells(s.sequence()))
            .map_err(err)
    }

    /// `"before"`, `"after"` or `"nested"`.
    fn compare(&self, u: &Cube, v: &Cube) -> PyResult<&'static str> {
        Ok(match self.0.compare(&u.0, &v.0).map_err(err)? {
            CurveOrder::Before => "before",
            CurveOrder::After => "after",
            CurveOrder::Nested => "nested",
        })
    }

    /// Whether consecutive cells of `grid` are adjacent.
    fn is_continuous_on(&self, grid: &Grid) -> PyResult<bool> {
        Ok(self.0.order_cells(&grid.0).map_err(err)?.check_continuity())
    }

    fn __repr__(&self) -> String {
        let p = self.0.params();
        format!("Curve({:?}, k={}, d={})", self.0.family().name(), p.k(), p.d())
    }
}

/// A set of cells of a grid, usually an interval along a curve.
#[pyclass(frozen, skip_from_py_object, module = "spacefill_py")]
#[derive(Clone)]
struct Partition(RsPartition);

#[pymethods]
impl Partition {
    /// Cells `i..=j` (1-based) of `grid` along `curve`.
    #[staticmethod]
    fn from_range(grid: &Grid, curve: &Curve, i: usize, j: usize) -> PyResult<Self> {
        RsPartition::from_range(grid.0.clone(), curve.0.clone(), i, j)
            .map(Partition)
            .map_err(err)
    }

    /// Explicit cells of `grid`; with a curve they must be consecutive.
    #[staticmethod]
    #[pyo3(signature = (grid, cells, curve=None))]
    fn from_cells(grid: &Grid, cells: Vec<Cube>, curve: Option<&Curve>) -> PyResult<Self> {
        RsPartition::from_cells(grid.0.clone(), curve.map(|c| c.0.clone()), unwrap_cells(&cells))
            .map(Partition)
            .map_err(err)
    }

    /// Seeded random interval of a seeded random grid.
    #[staticmethod]
    fn random(curve: &Curve, seed: u64, t: usize, max_depth: u32) -> PyResult<Self> {
        generators::random_partition(&curve.0, seed, t, max_depth)
            .map(Partition)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        RsPartition::from_json(text).map(Partition).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn grid(&self) -> Grid {
        Grid(self.0.grid().clone())
    }

    #[getter]
    fn cells(&self) -> Vec<Cube> {
        wrap_cells(self.0.cells())
    }

    fn __len__(&self) -> usize {
        self.0.cells().len()
    }

    /// Maximal boxes inside the content.
    fn shape(&self) -> Vec<Cube> {
        wrap_cells(&self.0.shape())
    }

    /// Dict with `preclassified`, `classified`, `classes` (cell → class)
    /// and `histogram`.
    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let view = self.0.classify().map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("preclassified", wrap_cells(view.preclassified()))?;
        out.set_item("classified", wrap_cells(view.classified()))?;
        let classes = PyDict::new(py);
        for (cell, class) in view.classes() {
            classes.set_item(Cube(cell.clone()), *class)?;
        }
        out.set_item("classes", classes)?;
        out.set_item("histogram", view.histogram())?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("Partition(cells={}, grid={})", self.0.cells().len(), self.0.grid().len())
    }
}

/// `dv`, `ds`, `cv`, `cs`, `dr` and `diameter` of a cell set, against `grid`
/// or the minimal grid of the cells; `c` selects the boundary codimension.
#[pyfunction]
#[pyo3(signature = (cells, grid=None, c=1))]
fn measure<'py>(
    py: Python<'py>,
    cells: Vec<Cube>,
    grid: Option<&Grid>,
    c: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let r = metrics::measure_codim(&unwrap_cells(&cells), grid.map(|g| &g.0), c).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("dv", r.dv)?;
    out.set_item("ds", r.ds)?;
    out.set_item("cv", fraction(py, &r.cv)?)?;
    out.set_item("cs", fraction(py, &r.cs)?)?;
    out.set_item("dr", fraction(py, &r.dr)?)?;
    out.set_item("diameter", fraction(py, &r.diameter)?)?;
    Ok(out)
}

/// Number of codimension-`c` boundary faces w.r.t. the minimal grid.
#[pyfunction]
fn boundary_size(cells: Vec<Cube>, c: u32) -> PyResult<usize> {
    partition::boundary_intrinsic(&unwrap_cells(&cells), c)
        .map(|f| f.len())
        .map_err(err)
}

/// The class-regular grid `K(c, r, M)`.
#[pyfunction]
fn class_regular(k: u32, d: u32, c: u32, r: u32, m: u32) -> PyResult<Grid> {
    let spec = generators::ClassRegularSpec::new(space(k, d)?, c, r, m).map_err(err)?;
    generators::class_regular(spec).map(Grid).map_err(err)
}

/// The Cantor grid of depth `M`.
#[pyfunction]
#[pyo3(signature = (m, k=3, d=2))]
fn cantor_grid(m: u32, k: u32, d: u32) -> PyResult<Grid> {
    generators::cantor_grid(space(k, d)?, m).map(Grid).map_err(err)
}

/// Depth-`M` boxes of class at least `c` in the shape, as a partition.
#[pyfunction]
fn shape_class_regular(shape: Vec<Cube>, m: u32, c: u32) -> PyResult<Vec<Cube>> {
    generators::shape_class_regular(&unwrap_cells(&shape), m, c)
        .map(|v| wrap_cells(&v))
        .map_err(err)
}

/// The befilled partition of volume exactly `v`.
#[pyfunction]
fn befill(shape: Vec<Cube>, v: u64, m: u32, curve: &Curve) -> PyResult<Vec<Cube>> {
    generators::befill(&unwrap_cells(&shape), v, m, &curve.0)
        .map(|v| wrap_cells(&v))
        .map_err(err)
}

/// The staircase shape `Q_N`.
#[pyfunction]
fn mu2_shape(n: u32, curve: &Curve) -> PyResult<Vec<Cube>> {
    generators::mu2_shape(n, &curve.0).map(|v| wrap_cells(&v)).map_err(err)
}

/// `ρ(k, d) = (k^{d−1} − 1) / (k^d − 1)`.
#[pyfunction]
fn rho(py: Python<'_>, k: u32, d: u32) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &analysis::rho(space(k, d)?))
}

/// Weighted vertex-cell count of the classified shape.
#[pyfunction]
fn gamma(shape: Vec<Cube>, m: u32) -> PyResult<u64> {
    analysis::gamma(&unwrap_cells(&shape), m).map_err(err)
}

/// Exact `V_c`, `S_c`, `R_c` with their leading-order predictions.
#[pyfunction]
fn vcsc<'py>(py: Python<'py>, shape: Vec<Cube>, m: u32, c: u32) -> PyResult<Bound<'py, PyDict>> {
    let r = analysis::vcsc(&unwrap_cells(&shape), m, c).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("V", py_int(py, r.v.to_string())?)?;
    out.set_item("S", py_int(py, r.s.to_string())?)?;
    out.set_item("R", fraction(py, &r.r)?)?;
    out.set_item("V_pred", fraction(py, &r.v_pred)?)?;
    out.set_item("S_pred", fraction(py, &r.s_pred)?)?;
    out.set_item("R_limit", fraction(py, &r.r_limit)?)?;
    Ok(out)
}

/// Measured table rows for `M = 1..=max_m`, each with its closed form.
#[pyfunction]
fn reproduce_table(py: Python<'_>, max_m: u32) -> PyResult<Bound<'_, PyList>> {
    let rows = analysis::reproduce_table(max_m).map_err(err)?;
    let out = PyList::empty(py);
    for row in rows {
        let d = PyDict::new(py);
        d.set_item("grid", &row.grid)?;
        d.set_item("k", row.params.k())?;
        d.set_item("d", row.params.d())?;
        d.set_item("M", row.m)?;
        d.set_item("dv", row.dv)?;
        d.set_item("ds", row.ds)?;
        d.set_item("dr", fraction(py, &row.dr)?)?;
        d.set_item("expected", row.expected)?;
        d.set_item("matches", row.matches())?;
        out.append(d)?;
    }
    Ok(out)
}

#[pymodule]
fn spacefill_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Cube>()?;
    m.add_class::<Grid>()?;
    m.add_class::<Curve>()?;
    m.add_class::<Partition>()?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_size, m)?)?;
    m.add_function(wrap_pyfunction!(class_regular, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_grid, m)?)?;
    m.add_function(wrap_pyfunction!(shape_class_regular, m)?)?;
    m.add_function(wrap_pyfunction!(befill, m)?)?;
    m.add_function(wrap_pyfunction!(mu2_shape, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(vcsc, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_table, m)?)?;
    Ok(())
}
