//! Python module `rankmetric`: finite fields, matrices with the normalized
//! rank distance, special linear group data, concentration experiments and
//! Folner representations.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyFloat, PyString};
use serde::Serialize;

use rankmetric_core::concentration::{self as conc, FunctionalCover, LipschitzFn};
use rankmetric_core::embed::{self, LevelledElement};
use rankmetric_core::field::{self as fld, Tower};
use rankmetric_core::folner::{self, Elem, DEFAULT_SET_CAP};
use rankmetric_core::groups::{self, GroupData, DEFAULT_GROUP_CAP};
use rankmetric_core::matgf::{self, sample_sl};
use rankmetric_core::{
    AmenableGroup, Error, Field, FolnerSpec, Fq, GroupRingElement, MatF, PrimePower, Rational, SlElement,
};

create_exception!(rankmetric, ResourceCapError, PyRuntimeError, "A size cap was exceeded.");
create_exception!(rankmetric, NumericError, PyArithmeticError, "A floating-point computation failed its check.");

fn err(e: Error) -> PyErr {
    match e {
        Error::Resource { .. } => ResourceCapError::new_err(e.to_string()),
        Error::Numeric(_) => NumericError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for rankmetric_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

/// Round-trips a serializable report through `json.loads`.
fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn fraction<'py>(py: Python<'py>, r: Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((*r.numer(), *r.denom()))
}

/// Accepts an int, `Fraction`, string such as `"1/4"`, or float (which is
/// rounded to the nearest fraction with denominator at most 10^6).
fn rational_arg(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let py = obj.py();
    let mut f = py.import("fractions")?.getattr("Fraction")?.call1((obj,))?;
    if obj.is_instance_of::<PyFloat>() {
        f = f.call_method1("limit_denominator", (1_000_000u64,))?;
    }
    let num: i64 = f.getattr("numerator")?.extract()?;
    let den: u64 = f.getattr("denominator")?.extract()?;
    if num < 0 {
        return Err(PyValueError::new_err("expected a non-negative number"));
    }
    Ok(Rational::new(num as u64, den))
}

/// A finite field GF(q); elements are integer codes in `[0, q)` whose
/// base-p digits are the polynomial coefficients, constant term first.
#[pyclass(name = "Field", module = "rankmetric", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyField(Field);

impl PyField {
    fn elem(&self, a: u32) -> PyResult<Fq> {
        if self.0.contains(Fq(a)) {
            Ok(Fq(a))
        } else {
            Err(PyValueError::new_err(format!("{a} is not an element of GF({})", self.0.order())))
        }
    }
}

#[pymethods]
impl PyField {
    #[new]
    fn new(q: u64) -> PyResult<Self> {
        Field::of_order(q).py_err().map(PyField)
    }

    #[getter]
    fn order(&self) -> u64 {
        self.0.order()
    }

    #[getter]
    fn characteristic(&self) -> u32 {
        self.0.characteristic()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree()
    }

    fn elements(&self) -> Vec<u32> {
        self.0.elements().map(|x| x.0).collect()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.0.add(self.elem(a)?, self.elem(b)?).0)
    }

    fn sub(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.0.sub(self.elem(a)?, self.elem(b)?).0)
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.0.mul(self.elem(a)?, self.elem(b)?).0)
    }

    fn div(&self, a: u32, b: u32) -> PyResult<u32> {
        Ok(self.0.div(self.elem(a)?, self.elem(b)?).py_err()?.0)
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        Ok(self.0.inv(self.elem(a)?).py_err()?.0)
    }

    fn pow(&self, a: u32, e: u64) -> PyResult<u32> {
        Ok(self.0.pow(self.elem(a)?, e).0)
    }

    /// Text form: a bare integer over a prime field, `(c0,c1,...)` otherwise.
    fn format(&self, a: u32) -> PyResult<String> {
        Ok(self.0.format_elem(self.elem(a)?))
    }

    fn parse(&self, text: &str) -> PyResult<u32> {
        Ok(self.0.parse_elem(text).py_err()?.0)
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.0.order())
    }
}

/// Quadratic tower GF(q) ⊂ GF(q^2) ⊂ ... ⊂ GF(q^(2^depth)).
#[pyclass(name = "Tower", module = "rankmetric", frozen)]
pub struct PyTower(Tower);

#[pymethods]
impl PyTower {
    #[new]
    fn new(q: u64, depth: usize) -> PyResult<Self> {
        let pp = PrimePower::from_order(q).py_err()?;
        fld::build_tower(pp, depth).py_err().map(PyTower)
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    /// The field at level `k`, of order q^(2^k).
    fn field(&self, k: usize) -> PyResult<PyField> {
        if k > self.0.depth() {
            return Err(PyValueError::new_err(format!("tower depth is {}", self.0.depth())));
        }
        Ok(PyField(self.0.field(k).clone()))
    }

    /// Parameters `(alpha, beta)` of the step from level `k` to `k + 1`.
    fn step(&self, k: usize) -> PyResult<(u32, u32)> {
        let s = self.0.steps().get(k).ok_or_else(|| PyValueError::new_err("no such step"))?;
        Ok((s.alpha().0, s.beta().0))
    }

    /// Takes a matrix over level `m` down to the base field, doubling the
    /// dimension at each step.
    fn embed(&self, g: &PyMatrix, m: usize) -> PyResult<PyMatrix> {
        embed::chain_embed_mat(&g.0, &self.0, m).py_err().map(PyMatrix)
    }
}

/// A matrix over a finite field.
#[pyclass(name = "Matrix", module = "rankmetric", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyMatrix(MatF);

#[pymethods]
impl PyMatrix {
    /// Builds from rows of element codes.
    #[new]
    fn new(field: &PyField, rows: Vec<Vec<u32>>) -> PyResult<Self> {
        let rows: Vec<Vec<Fq>> = rows.into_iter().map(|r| r.into_iter().map(Fq).collect()).collect();
        MatF::from_rows(&field.0, &rows).py_err().map(PyMatrix)
    }

    #[staticmethod]
    fn identity(n: usize, field: &PyField) -> Self {
        PyMatrix(MatF::identity(n, &field.0))
    }

    /// Parses the text written by `to_text`. Pass `field` when the entries
    /// belong to a non-default model of GF(q), such as a tower level.
    #[staticmethod]
    #[pyo3(signature = (text, field=None))]
    fn parse(text: &str, field: Option<&PyField>) -> PyResult<Self> {
        MatF::parse_text(text, field.map(|f| &f.0)).py_err().map(PyMatrix)
    }

    #[getter]
    fn rows(&self) -> usize {
        self.0.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.0.cols()
    }

    #[getter]
    fn field(&self) -> PyField {
        PyField(self.0.field().clone())
    }

    fn entries(&self) -> Vec<Vec<u32>> {
        (0..self.0.rows()).map(|r| (0..self.0.cols()).map(|c| self.0.get(r, c).0).collect()).collect()
    }

    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn det(&self) -> PyResult<u32> {
        Ok(self.0.det().py_err()?.0)
    }

    fn inverse(&self) -> Option<PyMatrix> {
        self.0.inverse().map(PyMatrix)
    }

    fn transpose(&self) -> PyMatrix {
        PyMatrix(self.0.transpose())
    }

    fn __matmul__(&self, other: &PyMatrix) -> PyResult<PyMatrix> {
        self.0.try_mul(&other.0).py_err().map(PyMatrix)
    }

    fn __add__(&self, other: &PyMatrix) -> PyResult<PyMatrix> {
        self.0.try_add(&other.0).py_err().map(PyMatrix)
    }

    fn __sub__(&self, other: &PyMatrix) -> PyResult<PyMatrix> {
        self.0.try_sub(&other.0).py_err().map(PyMatrix)
    }

    /// `rank(self - other) / n` as a `Fraction`.
    fn distance<'py>(&self, py: Python<'py>, other: &PyMatrix) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, matgf::rank_distance(&self.0, &other.0).py_err()?)
    }

    /// Distance to the nearest scalar matrix and that scalar.
    fn central_distance<'py>(&self, py: Python<'py>) -> PyResult<(Bound<'py, PyAny>, u32)> {
        let (d, z) = matgf::central_distance(&self.0).py_err()?;
        Ok((fraction(py, d)?, z.0))
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Matrix({}x{} over GF({}))", self.0.rows(), self.0.cols(), self.0.field().order())
    }
}

/// Uniform element of SL_n(field).
#[pyfunction]
#[pyo3(signature = (n, field, seed=0))]
fn random_sl(n: usize, field: &PyField, seed: u64) -> PyMatrix {
    PyMatrix(sample_sl(n, &field.0, &mut conc::stream_rng(seed, 0)).into_mat())
}

/// Distance between elements of SL_{2^a} and SL_{2^b} in the dyadic limit,
/// after diagonally promoting the smaller one.
#[pyfunction]
fn limit_distance<'py>(py: Python<'py>, g: &PyMatrix, h: &PyMatrix) -> PyResult<Bound<'py, PyAny>> {
    let lift = |m: &MatF| -> PyResult<LevelledElement> {
        if !m.rows().is_power_of_two() {
            return Err(PyValueError::new_err("dimension must be a power of two"));
        }
        let level = m.rows().trailing_zeros();
        LevelledElement::new(level, SlElement::new(m.clone()).py_err()?).py_err()
    };
    fraction(py, embed::limit_distance(&lift(&g.0)?, &lift(&h.0)?).py_err()?)
}

/// Field axioms, inverses and tower checks over GF(q), as a dict.
#[pyfunction]
#[pyo3(signature = (q, depth=1, seed=0))]
fn field_check<'py>(py: Python<'py>, q: u64, depth: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| fld::field_check(q, depth, &mut conc::stream_rng(seed, 0))).py_err()?;
    to_python(py, &report)
}

/// Random products checked through the tower embedding, as a dict.
#[pyfunction]
#[pyo3(signature = (q, n, m, trials=1000, seed=0))]
fn verify_embedding<'py>(
    py: Python<'py>,
    q: u64,
    n: u32,
    m: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| embed::verify_embedding(q, n, m, trials, seed)).py_err()?;
    to_python(py, &report)
}

/// SL_n(q) enumerated, with its conjugacy classes and class coefficients.
#[pyclass(name = "SpecialLinearGroup", module = "rankmetric", frozen)]
pub struct PyGroup {
    data: GroupData,
    q: u64,
}

#[pymethods]
impl PyGroup {
    #[new]
    #[pyo3(signature = (n, q, cap=DEFAULT_GROUP_CAP))]
    fn new(py: Python<'_>, n: usize, q: u64, cap: u64) -> PyResult<Self> {
        let data = py.detach(|| GroupData::new(n, q, cap)).py_err()?;
        Ok(PyGroup { data, q })
    }

    #[getter]
    fn order(&self) -> usize {
        self.data.group.order()
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.data.classes.count()
    }

    fn class_sizes(&self) -> Vec<usize> {
        self.data.classes.sizes()
    }

    fn class_reps(&self) -> Vec<PyMatrix> {
        (0..self.data.classes.count())
            .map(|k| PyMatrix(self.data.group.element(self.data.classes.rep(k)).clone()))
            .collect()
    }

    fn center(&self) -> Vec<PyMatrix> {
        groups::group_center(&self.data.group).into_iter().map(|i| PyMatrix(self.data.group.element(i).clone())).collect()
    }

    /// Smallest m with C^m = G for each class, or None for central classes.
    fn covering_numbers(&self) -> Vec<Option<usize>> {
        (0..self.data.classes.count()).map(|k| groups::covering_number(&self.data.constants, k)).collect()
    }

    /// Character table as a dict with real and imaginary parts.
    #[pyo3(signature = (seed=0))]
    fn character_table<'py>(&self, py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let table = py.detach(|| self.data.character_table(seed)).py_err()?;
        let reps: Vec<String> =
            (0..self.data.classes.count()).map(|k| self.data.group.element(self.data.classes.rep(k)).to_text()).collect();
        let mut v = table.to_json(&reps);
        if let serde_json::Value::Object(o) = &mut v {
            o.insert("orthogonality_error".into(), table.orthogonality_error().into());
        }
        to_python(py, &v)
    }

    /// Largest normalized character value per non-central class against
    /// the bound, as a dict.
    #[pyo3(signature = (seed=0))]
    fn gluck<'py>(&self, py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let table = py.detach(|| self.data.character_table(seed)).py_err()?;
        to_python(py, &groups::gluck_check(&table, &self.data.classes, self.q))
    }

    fn __repr__(&self) -> String {
        format!("SpecialLinearGroup(n={}, q={}, order={})", self.data.group.n(), self.q, self.data.group.order())
    }
}

/// The tail bound 2·exp(-r²n/64), not clipped to 1.
#[pyfunction]
fn levy_bound(r: f64, n: usize) -> f64 {
    conc::levy_bound(r, n)
}

/// Stabilizer-chain witnesses for the diameter profile of SL_n(q), as a dict.
#[pyfunction]
#[pyo3(signature = (n, q, samples=10_000, seed=0))]
fn chain_profile<'py>(py: Python<'py>, n: usize, q: u64, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| conc::chain_profile(n, q, samples, seed)).py_err()?;
    to_python(py, &report)
}

/// Empirical tails of `x ↦ d(x, target)` (target defaults to the identity)
/// at each radius, as a dict.
#[pyfunction]
#[pyo3(signature = (n, q, radii=None, target=None, samples=100_000, certificate_pairs=10_000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn concentration<'py>(
    py: Python<'py>,
    n: usize,
    q: u64,
    radii: Option<Vec<Bound<'py, PyAny>>>,
    target: Option<&PyMatrix>,
    samples: usize,
    certificate_pairs: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let rs: Vec<Rational> = match radii {
        Some(v) => v.iter().map(rational_arg).collect::<PyResult<_>>()?,
        None => (1..=20).map(|k| Rational::new(k, 20)).collect(),
    };
    let field = Field::of_order(q).py_err()?;
    let f = match target {
        Some(t) => LipschitzFn::DistanceTo(t.0.clone()),
        None => LipschitzFn::distance_to_identity(n, &field),
    };
    let report =
        py.detach(|| conc::lipschitz_concentration(n, q, &f, &rs, samples, certificate_pairs, seed)).py_err()?;
    to_python(py, &report)
}

/// Searches for translates `gF` inside one element of an `m`-interval cover
/// of `d(·, id)` with Lebesgue number `eps`, as a dict.
#[pyfunction]
#[pyo3(signature = (n, q, eps, points, m=2, trials=100, max_draws=50, seed=0))]
#[allow(clippy::too_many_arguments)]
fn ramsey<'py>(
    py: Python<'py>,
    n: usize,
    q: u64,
    eps: &Bound<'py, PyAny>,
    points: Vec<PyRef<'py, PyMatrix>>,
    m: usize,
    trials: usize,
    max_draws: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let eps = rational_arg(eps)?;
    let field = Field::of_order(q).py_err()?;
    let cover = FunctionalCover::uniform(LipschitzFn::distance_to_identity(n, &field), m, eps).py_err()?;
    let set: Vec<MatF> = points.iter().map(|p| p.0.clone()).collect();
    let report = py.detach(|| conc::ramsey_search(n, q, &cover, &set, trials, max_draws, seed)).py_err()?;
    to_python(py, &report)
}

/// Folner sets of Z^d (`"z:d"`) or the Heisenberg group (`"heisenberg"`).
#[pyclass(name = "FolnerSets", module = "rankmetric", frozen)]
pub struct PyFolner(FolnerSpec);

impl PyFolner {
    fn elem(&self, obj: &Bound<'_, PyAny>) -> PyResult<Elem> {
        let group = self.0.group();
        if let Ok(s) = obj.cast::<PyString>() {
            return group.parse_elem(s.to_str()?).py_err();
        }
        let x: Vec<i64> = obj.extract()?;
        group.check(&x).py_err()?;
        Ok(x)
    }
}

#[pymethods]
impl PyFolner {
    #[new]
    #[pyo3(signature = (group, cap=DEFAULT_SET_CAP))]
    fn new(group: &str, cap: usize) -> PyResult<Self> {
        let g: AmenableGroup = group.parse().py_err()?;
        Ok(PyFolner(FolnerSpec::with_cap(g, cap)))
    }

    fn size(&self, n: u32) -> u128 {
        self.0.size(n)
    }

    fn elements(&self, n: u32) -> PyResult<Vec<Elem>> {
        self.0.elements(n).py_err()
    }

    /// Matrix of the partial permutation x ↦ xh on F_n.
    fn representation(&self, h: &Bound<'_, PyAny>, n: u32, field: &PyField) -> PyResult<PyMatrix> {
        folner::folner_rep(&self.elem(h)?, &self.0, n, &field.0).py_err().map(PyMatrix)
    }

    /// Matrix of a group-ring element such as `"(0)+2*(1)"`.
    fn ring_representation(&self, ring: &str, n: u32, field: &PyField) -> PyResult<PyMatrix> {
        let a = GroupRingElement::parse(ring, self.0.group(), &field.0).py_err()?;
        folner::ring_rep(&a, &self.0, n).py_err().map(PyMatrix)
    }

    fn normalized_rank<'py>(
        &self,
        py: Python<'py>,
        ring: &str,
        n: u32,
        field: &PyField,
    ) -> PyResult<Bound<'py, PyAny>> {
        let a = GroupRingElement::parse(ring, self.0.group(), &field.0).py_err()?;
        fraction(py, folner::normalized_rank(&a, &self.0, n).py_err()?)
    }

    /// |{x in F_n : xs in F_n for every s in support}|.
    fn domain_size(&self, n: u32, support: Vec<Bound<'_, PyAny>>) -> PyResult<usize> {
        let s: Vec<Elem> = support.iter().map(|x| self.elem(x)).collect::<PyResult<_>>()?;
        folner::domain_size(&self.0, n, &s).py_err()
    }

    /// `rank(rep(g) - rep(h)) / |F_n|` for each level.
    fn discreteness_profile<'py>(
        &self,
        py: Python<'py>,
        g: &Bound<'py, PyAny>,
        h: &Bound<'py, PyAny>,
        levels: Vec<u32>,
        field: &PyField,
    ) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let (g, h) = (self.elem(g)?, self.elem(h)?);
        let profile = folner::discreteness_profile(&g, &h, &self.0, &levels, &field.0).py_err()?;
        profile.into_iter().map(|r| fraction(py, r)).collect()
    }

    fn __repr__(&self) -> String {
        format!("FolnerSets({})", self.0.group())
    }
}

#[pymodule]
fn rankmetric(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ResourceCapError", m.py().get_type::<ResourceCapError>())?;
    m.add("NumericError", m.py().get_type::<NumericError>())?;
    m.add_class::<PyField>()?;
    m.add_class::<PyTower>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PyFolner>()?;
    m.add_function(wrap_pyfunction!(random_sl, m)?)?;
    m.add_function(wrap_pyfunction!(limit_distance, m)?)?;
    m.add_function(wrap_pyfunction!(field_check, m)?)?;
    m.add_function(wrap_pyfunction!(verify_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(levy_bound, m)?)?;
    m.add_function(wrap_pyfunction!(chain_profile, m)?)?;
    m.add_function(wrap_pyfunction!(concentration, m)?)?;
    m.add_function(wrap_pyfunction!(ramsey, m)?)?;
    Ok(())
}
