use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use cils::assembler::objective_rows;
use cils::harness::{generate_instance as gen_instance, GenSpec};
use cils::instance_file::{instance_to_json, load_instance, parse_instance};
use cils::oracle::{oracle_solve as oracle, OracleBudget};
use cils::{
    Alphabet, CandidateSets, CilsError, IlsMode, IntMatrix, RealMatrix, RealVector, SolveOptions,
};

create_exception!(cils_py, SolverError, PyException);
create_exception!(cils_py, InfeasibleError, SolverError);
create_exception!(cils_py, BudgetExceededError, SolverError);

fn err(e: CilsError) -> PyErr {
    match e {
        CilsError::Infeasible { .. } | CilsError::EmptyTree { .. } => {
            InfeasibleError::new_err(e.to_string())
        }
        CilsError::BudgetExceeded { .. } => BudgetExceededError::new_err(e.to_string()),
        CilsError::DimensionMismatch(_)
        | CilsError::InvalidArgument(_)
        | CilsError::InstanceFile(_) => PyValueError::new_err(e.to_string()),
        _ => SolverError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<i64>>;

fn real(rows: &[Vec<f64>]) -> PyResult<RealMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err(
            "expected a nonempty rectangular list of rows",
        ));
    }
    Ok(RealMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn real_rows(m: &RealMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn int(rows: &[Vec<i64>]) -> PyResult<IntMatrix> {
    IntMatrix::from_rows(rows).map_err(err)
}

fn int_rows(m: &IntMatrix) -> PyResult<Vec<Vec<i64>>> {
    m.to_i64_rows().map_err(err)
}

fn alphabet(values: Vec<i64>) -> PyResult<Alphabet> {
    Alphabet::new(values).map_err(err)
}

/// Problem data: minimize ||Y - G X||^2 subject to the alphabet, A X^T = 0,
/// at most K nonzeros per row and rank(X) = N.
#[pyclass(name = "ProblemInstance", module = "cils_py", skip_from_py_object)]
#[derive(Clone)]
struct PyProblemInstance {
    inner: cils::ProblemInstance,
}

#[pymethods]
impl PyProblemInstance {
    #[new]
    #[pyo3(signature = (y, g, a, s, k, n, d0=None))]
    fn new(
        y: Vec<Vec<f64>>,
        g: Vec<Vec<f64>>,
        a: Vec<Vec<i64>>,
        s: Vec<i64>,
        k: usize,
        n: usize,
        d0: Option<f64>,
    ) -> PyResult<Self> {
        let inner =
            cils::ProblemInstance::new(real(&y)?, real(&g)?, int(&a)?, alphabet(s)?, k, n, d0)
                .map_err(err)?;
        Ok(PyProblemInstance { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyProblemInstance {
            inner: parse_instance(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyProblemInstance {
            inner: load_instance(&path).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        instance_to_json(&self.inner).map_err(err)
    }

    #[getter]
    fn y(&self) -> Vec<Vec<f64>> {
        real_rows(&self.inner.y)
    }

    #[getter]
    fn g(&self) -> Vec<Vec<f64>> {
        real_rows(&self.inner.g)
    }

    #[getter]
    fn a(&self) -> PyResult<Vec<Vec<i64>>> {
        int_rows(&self.inner.a)
    }

    #[getter]
    fn s(&self) -> Vec<i64> {
        self.inner.alphabet.values().to_vec()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.rank
    }

    #[getter]
    fn d0(&self) -> Option<f64> {
        self.inner.d0
    }

    fn __repr__(&self) -> String {
        format!(
            "ProblemInstance(M={}, L={}, N={}, P={}, K={}, S={:?})",
            self.inner.m(),
            self.inner.l(),
            self.inner.rank,
            self.inner.a.rows(),
            self.inner.k,
            self.inner.alphabet.values()
        )
    }
}

#[pyclass(name = "SolveResult", module = "cils_py", get_all)]
struct PySolveResult {
    x: Vec<Vec<i64>>,
    objective: f64,
    dioph_nodes: u64,
    f_size: u64,
    sphere_calls: u64,
    radius_expansions: u64,
    backtracks: u64,
    final_radius: f64,
    wall_time: f64,
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!("SolveResult(x={:?}, objective={})", self.x, self.objective)
    }
}

fn result(res: cils::SolveResult) -> PyResult<PySolveResult> {
    let s = res.stats;
    Ok(PySolveResult {
        x: int_rows(&res.x)?,
        objective: res.objective,
        dioph_nodes: s.dioph_nodes,
        f_size: s.f_size,
        sphere_calls: s.sphere_calls,
        radius_expansions: s.radius_expansions,
        backtracks: s.backtracks,
        final_radius: s.final_radius,
        wall_time: s.wall_time,
    })
}

/// Returns (H, U) with U A = H in Hermite normal form.
#[pyfunction]
fn hermite_normal_form(a: Vec<Vec<i64>>) -> PyResult<(Rows, Rows)> {
    let res = cils::hermite_normal_form(&int(&a)?);
    Ok((int_rows(&res.h)?, int_rows(&res.u)?))
}

#[pyfunction]
fn int_rank(a: Vec<Vec<i64>>) -> PyResult<usize> {
    Ok(cils::int_rank(&int(&a)?))
}

/// Returns (rows, node_count): every x over the alphabet with A x = 0 and at most k nonzeros.
#[pyfunction]
fn solve_diophantine_sparse(
    a: Vec<Vec<i64>>,
    s: Vec<i64>,
    k: usize,
) -> PyResult<(Vec<Vec<i64>>, u64)> {
    let (tree, stats) = cils::solve_diophantine_sparse(&int(&a)?, &alphabet(s)?, k).map_err(err)?;
    Ok((tree.leaves(), stats.nodes_visited))
}

/// Points with ||y - G x||^2 <= d^2, x[i] drawn from sets[i], sorted by distance.
#[pyfunction]
fn sphere_decode(
    y: Vec<f64>,
    g: Vec<Vec<f64>>,
    d: f64,
    sets: Vec<Vec<i64>>,
) -> PyResult<Vec<(Vec<i64>, f64)>> {
    let sets = CandidateSets::new(sets.into_iter().map(alphabet).collect::<PyResult<_>>()?)
        .map_err(err)?;
    let out = cils::sphere_decode(&RealVector::from_vec(y), &real(&g)?, d, &sets).map_err(err)?;
    Ok(out.into_iter().map(|c| (c.x, c.dist2)).collect())
}

#[pyfunction]
fn objective(y: Vec<Vec<f64>>, g: Vec<Vec<f64>>, x: Vec<Vec<i64>>) -> PyResult<f64> {
    objective_rows(&real(&y)?, &real(&g)?, &x).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (instance, radius=None))]
fn solve(
    py: Python<'_>,
    instance: &PyProblemInstance,
    radius: Option<f64>,
) -> PyResult<PySolveResult> {
    let opts = SolveOptions {
        radius,
        ..SolveOptions::default()
    };
    let inst = instance.inner.clone();
    let res = py
        .detach(move || cils::solve_with(&inst, &opts))
        .map_err(err)?;
    result(res)
}

/// Exhaustive reference solve; `budget` defaults to CILS_ORACLE_BUDGET or 10^7.
#[pyfunction]
#[pyo3(signature = (instance, budget=None))]
fn oracle_solve(
    py: Python<'_>,
    instance: &PyProblemInstance,
    budget: Option<u64>,
) -> PyResult<PySolveResult> {
    let budget = match budget {
        Some(b) => OracleBudget::new(b),
        None => OracleBudget::from_env(),
    }
    .map_err(err)?;
    let inst = instance.inner.clone();
    let res = py.detach(move || oracle(&inst, budget)).map_err(err)?;
    result(res)
}

/// Single-vector solve: min ||y - G x||^2 with A x = 0 and at most k nonzeros.
/// `mode` is "exact" or "paper-heuristic".
#[pyfunction]
#[pyo3(signature = (y, g, a, s, k, mode="exact"))]
fn solve_ils_eq(
    y: Vec<f64>,
    g: Vec<Vec<f64>>,
    a: Vec<Vec<i64>>,
    s: Vec<i64>,
    k: usize,
    mode: &str,
) -> PyResult<Vec<i64>> {
    let mode = match mode {
        "exact" => IlsMode::Exact,
        "paper-heuristic" => IlsMode::PaperHeuristic,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    cils::solve_ils_eq(
        &RealVector::from_vec(y),
        &real(&g)?,
        &int(&a)?,
        &alphabet(s)?,
        k,
        mode,
    )
    .map_err(err)
}

/// Seeded random instance; returns (instance, planted X).
#[pyfunction]
#[pyo3(signature = (n_rows, l, m, s, seed, p=7, k=4, sigma=0.2))]
#[allow(clippy::too_many_arguments)]
fn generate_instance(
    n_rows: usize,
    l: usize,
    m: usize,
    s: Vec<i64>,
    seed: u64,
    p: usize,
    k: usize,
    sigma: f64,
) -> PyResult<(PyProblemInstance, Vec<Vec<i64>>)> {
    let mut spec = GenSpec::new(n_rows, l, m, alphabet(s)?, seed);
    spec.p = p;
    spec.k = k;
    spec.sigma = sigma;
    let (inst, x) = gen_instance(&spec).map_err(err)?;
    Ok((PyProblemInstance { inner: inst }, int_rows(&x)?))
}

#[pymodule]
fn cils_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("SolverError", py.get_type::<SolverError>())?;
    m.add("InfeasibleError", py.get_type::<InfeasibleError>())?;
    m.add("BudgetExceededError", py.get_type::<BudgetExceededError>())?;
    m.add_class::<PyProblemInstance>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(hermite_normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(int_rank, m)?)?;
    m.add_function(wrap_pyfunction!(solve_diophantine_sparse, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_decode, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ils_eq, m)?)?;
    m.add_function(wrap_pyfunction!(generate_instance, m)?)?;
    Ok(())
}
