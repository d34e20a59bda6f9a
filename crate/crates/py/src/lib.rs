//! Python bindings for the quadrix core library.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use quadrix_core::densities::{sigma_finite, sigma_infinity_parametric};
use quadrix_core::discrepancy::{
    congruence_index, count_in_window, haar_ball_volume, mean_square_discrepancy,
    metric_distance_from_identity, spectral_gap_bound,
};
use quadrix_core::error::Error;
use quadrix_core::exponents::{norm_lower_exponent, volume_exponent, volume_lattice_sum, RootDatum};
use quadrix_core::expsums::{s_k_direct, s_k_multiplicative};
use quadrix_core::forms::{CongruenceClass, QuaternaryForm};
use quadrix_core::quadric::{count_representations, enumerate_solutions, weighted_count};
use quadrix_core::spectral::{ball_volume, operator_norm_complementary, weak_lower_average};
use quadrix_core::window::Window;
use quadrix_core::{default_work_bound, Rat};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat_str(r: &Rat) -> String {
    r.to_string()
}

/// An integral quaternary quadratic form, identified by key
/// ("det4", "sq4", "indef_2_3").
#[pyclass(name = "Form", from_py_object)]
#[derive(Clone)]
struct PyForm {
    inner: QuaternaryForm,
}

#[pymethods]
impl PyForm {
    #[new]
    fn new(key: &str) -> PyResult<Self> {
        Ok(Self { inner: QuaternaryForm::by_key(key).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn coeffs(&self) -> [i64; 10] {
        *self.inner.coeffs()
    }

    #[getter]
    fn det_two_gram(&self) -> i64 {
        self.inner.det_two_gram()
    }

    fn evaluate(&self, x: [i64; 4]) -> i64 {
        self.inner.evaluate(&x)
    }

    fn __repr__(&self) -> String {
        format!("Form({:?})", self.inner.name())
    }
}

fn congruence(modulus: i64, residue: [i64; 4]) -> PyResult<CongruenceClass> {
    CongruenceClass::new(modulus, residue).map_err(err)
}

/// Integer solutions of N(x) = h^2, x = residue mod modulus, inside a box.
#[pyfunction]
#[pyo3(signature = (form, h, half_width, modulus=1, residue=[0, 0, 0, 0], work_bound=None))]
fn solve(
    form: &PyForm,
    h: i64,
    half_width: f64,
    modulus: i64,
    residue: [i64; 4],
    work_bound: Option<u64>,
) -> PyResult<Vec<[i64; 4]>> {
    let cc = congruence(modulus, residue)?;
    let bounds = [(-half_width, half_width); 4];
    let set = enumerate_solutions(
        &form.inner,
        h,
        &cc,
        &bounds,
        work_bound.unwrap_or_else(default_work_bound),
    )
    .map_err(err)?;
    Ok(set.solutions)
}

/// Number of representations of m by the form inside a symmetric box.
#[pyfunction]
#[pyo3(signature = (form, m, half_width, work_bound=None))]
fn representation_count(
    form: &PyForm,
    m: i64,
    half_width: f64,
    work_bound: Option<u64>,
) -> PyResult<u64> {
    let bounds = [(-half_width, half_width); 4];
    count_representations(&form.inner, m, &bounds, work_bound.unwrap_or_else(default_work_bound))
        .map_err(err)
}

/// Bump-weighted lattice count sum_{N(x)=h^2} w(x/h).
#[pyfunction]
#[pyo3(signature = (form, h, r, modulus=1, residue=[0, 0, 0, 0], work_bound=None))]
fn bump_weighted_count(
    form: &PyForm,
    h: i64,
    r: f64,
    modulus: i64,
    residue: [i64; 4],
    work_bound: Option<u64>,
) -> PyResult<f64> {
    let cc = congruence(modulus, residue)?;
    let w = Window::radial_bump(r).map_err(err)?;
    weighted_count(&form.inner, h, &cc, &w, work_bound.unwrap_or_else(default_work_bound))
        .map_err(err)
}

/// Complete exponential sum S_k(c; xi) as (real, imag).
#[pyfunction]
#[pyo3(signature = (form, k, c, h=1, modulus=1, residue=[0, 0, 0, 0], method="multiplicative", work_bound=None))]
#[allow(clippy::too_many_arguments)]
fn exp_sum(
    form: &PyForm,
    k: i64,
    c: [i64; 4],
    h: i64,
    modulus: i64,
    residue: [i64; 4],
    method: &str,
    work_bound: Option<u64>,
) -> PyResult<(f64, f64)> {
    let cc = congruence(modulus, residue)?;
    let wb = work_bound.unwrap_or_else(default_work_bound);
    let v = match method {
        "multiplicative" => s_k_multiplicative(&form.inner, k, &cc, &c, h, wb),
        "direct" => s_k_direct(&form.inner, k, &cc, &c, h, wb),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(err)?;
    Ok((v.float.re, v.float.im))
}

/// Finite singular series sigma_f as (value, [(q, "sigma_q"), ...]).
#[pyfunction]
#[pyo3(signature = (form, h, q_max, e_max=6, modulus=1, residue=[0, 0, 0, 0], work_bound=None))]
#[allow(clippy::too_many_arguments)]
fn sigma_f(
    form: &PyForm,
    h: i64,
    q_max: i64,
    e_max: u32,
    modulus: i64,
    residue: [i64; 4],
    work_bound: Option<u64>,
) -> PyResult<(f64, Vec<(i64, String)>)> {
    let cc = congruence(modulus, residue)?;
    let sf = sigma_finite(
        &form.inner,
        &cc,
        h,
        q_max,
        e_max,
        work_bound.unwrap_or_else(default_work_bound),
    )
    .map_err(err)?;
    let factors = sf.factors.iter().map(|(q, v)| (*q, rat_str(v))).collect();
    Ok((sf.value, factors))
}

/// Archimedean density for the radial bump window of radius r.
#[pyfunction]
#[pyo3(signature = (r, nodes=120))]
fn sigma_inf(r: f64, nodes: usize) -> PyResult<f64> {
    let w = Window::radial_bump(r).map_err(err)?;
    sigma_infinity_parametric(&w, nodes).map_err(err)
}

/// Tree-ball volume profile: (shell volumes as strings, total as string).
#[pyfunction]
fn tree_ball(p: u64, s: u32) -> (Vec<String>, String) {
    let prof = ball_volume(p, s);
    (prof.shells.iter().map(rat_str).collect(), rat_str(&prof.total))
}

/// Operator norm of the ball-averaging operator at complementary parameter s.
#[pyfunction]
fn operator_norm(p: u64, s: f64, s_height: u32) -> PyResult<f64> {
    operator_norm_complementary(p, s, s_height).map_err(err)
}

/// Exact weak lower bound m(B)^{-1} sum_j vol_j p^{-j}, as a string.
#[pyfunction]
fn weak_average(p: u64, s_height: u32) -> String {
    rat_str(&weak_lower_average(p, s_height))
}

/// Volume growth exponent alpha for a classical family ("sl", "sp", "so").
#[pyfunction]
fn alpha(family: &str, n: usize) -> PyResult<String> {
    let rd = RootDatum::by_family(family, n).map_err(err)?;
    Ok(rat_str(&volume_exponent(&rd).map_err(err)?))
}

/// Norm lower-bound exponent alpha_L/alpha_G - 1 for L of rank one less.
#[pyfunction]
fn norm_exponent(family: &str, n: usize) -> PyResult<String> {
    let g = RootDatum::by_family(family, n).map_err(err)?;
    let l = RootDatum::by_family(family, n - 1).map_err(err)?;
    Ok(rat_str(&norm_lower_exponent(&g, &l).map_err(err)?.exponent))
}

/// Exact lattice volume sum V(h) at scale s, as a decimal string.
#[pyfunction]
#[pyo3(signature = (family, n, q, s, work_bound=None))]
fn lattice_volume(
    family: &str,
    n: usize,
    q: u64,
    s: u32,
    work_bound: Option<u64>,
) -> PyResult<String> {
    let rd = RootDatum::by_family(family, n).map_err(err)?;
    let v = volume_lattice_sum(&rd, q, s, work_bound.unwrap_or_else(default_work_bound))
        .map_err(err)?;
    Ok(v.to_string())
}

/// Left-invariant metric distance from the identity, or None off SL_2(R).
#[pyfunction]
fn metric_distance(x: [f64; 4]) -> Option<f64> {
    metric_distance_from_identity(&x)
}

/// Haar volume of the metric ball of radius r, normalized to m(K) = 1.
#[pyfunction]
fn haar_volume(r: f64) -> PyResult<f64> {
    haar_ball_volume(r).map_err(err)
}

/// Index of the principal congruence subgroup of level l.
#[pyfunction]
fn principal_index(l: u64) -> u64 {
    congruence_index(l)
}

/// Lattice count at scale h = p^s in the metric ball of radius r around x.
#[pyfunction]
#[pyo3(signature = (p, s, l, r, x=[1.0, 0.0, 0.0, 1.0], work_bound=None))]
fn ball_count(
    p: u64,
    s: u32,
    l: i64,
    r: f64,
    x: [f64; 4],
    work_bound: Option<u64>,
) -> PyResult<(u64, u64)> {
    let out = count_in_window(p, s, l, &x, r, work_bound.unwrap_or_else(default_work_bound))
        .map_err(err)?;
    Ok((out.count, out.boundary))
}

/// Mean-square discrepancy over sampled centers: (E, ci_lo, ci_hi).
#[pyfunction]
#[pyo3(signature = (p, s, l, r, samples, seed=7, work_bound=None))]
fn mean_square(
    p: u64,
    s: u32,
    l: i64,
    r: f64,
    samples: usize,
    seed: u64,
    work_bound: Option<u64>,
) -> PyResult<(f64, f64, f64)> {
    let rep = mean_square_discrepancy(
        p,
        s,
        l,
        r,
        samples,
        seed,
        work_bound.unwrap_or_else(default_work_bound),
    )
    .map_err(err)?;
    Ok((rep.e, rep.ci_lo, rep.ci_hi))
}

/// Spectral gap lower bound from a discrepancy estimate.
#[pyfunction]
fn gap_bound(l: i64, r: f64, e: f64) -> PyResult<f64> {
    spectral_gap_bound(l, r, e).map_err(err)
}

#[pymodule]
fn quadrix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyForm>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(representation_count, m)?)?;
    m.add_function(wrap_pyfunction!(bump_weighted_count, m)?)?;
    m.add_function(wrap_pyfunction!(exp_sum, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_f, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_inf, m)?)?;
    m.add_function(wrap_pyfunction!(tree_ball, m)?)?;
    m.add_function(wrap_pyfunction!(operator_norm, m)?)?;
    m.add_function(wrap_pyfunction!(weak_average, m)?)?;
    m.add_function(wrap_pyfunction!(alpha, m)?)?;
    m.add_function(wrap_pyfunction!(norm_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_volume, m)?)?;
    m.add_function(wrap_pyfunction!(metric_distance, m)?)?;
    m.add_function(wrap_pyfunction!(haar_volume, m)?)?;
    m.add_function(wrap_pyfunction!(principal_index, m)?)?;
    m.add_function(wrap_pyfunction!(ball_count, m)?)?;
    m.add_function(wrap_pyfunction!(mean_square, m)?)?;
    m.add_function(wrap_pyfunction!(gap_bound, m)?)?;
    Ok(())
}
