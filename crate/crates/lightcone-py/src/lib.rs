//! Python bindings. Complex arguments are Python `complex` (or anything
//! convertible); library errors become ValueError, PoleError or
//! RuntimeError.

use lightcone::counting::{self, Bump};
use lightcone::eisenstein::{self as eis, TruncationConfig};
use lightcone::{arith, lfunc, Complex64, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(lightcone_py, PoleError, PyArithmeticError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::NoCharacter(_) | Error::Divergent(_) => PyValueError::new_err(e.to_string()),
        Error::Pole { .. } | Error::GammaPole(_) | Error::ZetaPole | Error::LocalPole { .. } => {
            PoleError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq, Hash)]
struct FormParams {
    inner: eis::FormParams,
}

#[pymethods]
impl FormParams {
    #[new]
    #[pyo3(signature = (n, d = 1))]
    fn new(n: usize, d: u64) -> PyResult<Self> {
        Ok(FormParams {
            inner: eis::FormParams::new(n, d).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn d(&self) -> u64 {
        self.inner.d
    }

    fn __repr__(&self) -> String {
        format!("FormParams(n={}, d={})", self.inner.n, self.inner.d)
    }

    /// Residue of E at s = n.
    fn omega(&self) -> PyResult<f64> {
        eis::omega(&self.inner).map_err(to_py)
    }

    /// The constant-term coefficient Φ(s).
    fn phi(&self, s: Complex64) -> PyResult<Complex64> {
        eis::phi_const(&self.inner, s).map_err(to_py)
    }

    /// E(s, z) by the Fourier expansion, z = (x, y).
    #[pyo3(signature = (s, x, y, lambda_bound = None))]
    fn eisenstein(&self, s: Complex64, x: Vec<f64>, y: f64, lambda_bound: Option<f64>) -> PyResult<Complex64> {
        let z = eis::HalfSpacePoint::new(x, y).map_err(to_py)?;
        let mut cfg = TruncationConfig::default();
        if let Some(b) = lambda_bound {
            cfg.lambda_norm_bound = b;
        }
        eis::eisenstein_fourier(&self.inner, s, &z, &cfg).map_err(to_py)
    }

    /// E(s, z) by the direct lattice sum (Re s > n).
    #[pyo3(signature = (s, x, y, height = None))]
    fn eisenstein_direct(&self, s: Complex64, x: Vec<f64>, y: f64, height: Option<u64>) -> PyResult<Complex64> {
        let z = eis::HalfSpacePoint::new(x, y).map_err(to_py)?;
        let cfg = TruncationConfig {
            direct_height_bound: height.unwrap_or(0),
            ..TruncationConfig::default()
        };
        Ok(eis::eisenstein_direct(&self.inner, s, &z, &cfg).map_err(to_py)?.value)
    }

    /// Residual of the functional equation at (s, z); d must be 1.
    fn functional_eq_residual(&self, s: Complex64, x: Vec<f64>, y: f64) -> PyResult<f64> {
        let z = eis::HalfSpacePoint::new(x, y).map_err(to_py)?;
        eis::functional_eq_residual(&self.inner, s, &z, &TruncationConfig::default()).map_err(to_py)
    }

    /// Real poles of Φ on [lo, hi] as (location, residue) pairs.
    fn pole_scan(&self, lo: f64, hi: f64) -> PyResult<Vec<(Complex64, Complex64)>> {
        let poles = eis::pole_scan(&self.inner, lo, hi, &TruncationConfig::default()).map_err(to_py)?;
        Ok(poles.into_iter().map(|p| (p.location, p.residue)).collect())
    }

    /// Sharp count of primitive points with height ≤ T.
    fn count(&self, t: f64) -> PyResult<CountResult> {
        let r = counting::count_sharp(&self.inner, t).map_err(to_py)?;
        Ok(CountResult {
            t: r.T,
            count: r.count,
            main_term: r.main_term,
            relative_error: r.relative_error,
        })
    }

    /// Smoothed count with a bump supported on [a, b]: (value, main term).
    #[pyo3(signature = (t, a = 0.5, b = 1.0))]
    fn count_smoothed(&self, t: f64, a: f64, b: f64) -> PyResult<(f64, f64)> {
        let h = Bump::new(a, b).map_err(to_py)?;
        counting::count_smoothed(&self.inner, &h, t).map_err(to_py)
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct CountResult {
    t: f64,
    count: u64,
    main_term: f64,
    relative_error: f64,
}

#[pymethods]
impl CountResult {
    fn __repr__(&self) -> String {
        format!(
            "CountResult(t={}, count={}, main_term={}, relative_error={})",
            self.t, self.count, self.main_term, self.relative_error
        )
    }
}

#[pyfunction]
fn cusp_volume_vp1(n: usize) -> (u128, u128) {
    eis::cusp_volume_vp1(n)
}

#[pyfunction]
fn volume(n: usize) -> Option<f64> {
    eis::volume_closed(n)
}

#[pyfunction]
fn r_closed(k: usize, s: Complex64) -> PyResult<Complex64> {
    eis::r_closed(k, s).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (k, s, qmax = 2000))]
fn r_series(k: usize, s: Complex64, qmax: usize) -> PyResult<Complex64> {
    Ok(eis::r_series(k, s, qmax).map_err(to_py)?.value)
}

#[pyfunction]
fn zeta(s: Complex64) -> PyResult<Complex64> {
    lfunc::zeta(s).map_err(to_py)
}

#[pyfunction]
fn gamma(s: Complex64) -> PyResult<Complex64> {
    lfunc::gamma(s).map_err(to_py)
}

/// L(s, χ_D) for the primitive character attached to the discriminant D.
#[pyfunction]
fn dirichlet_l(s: Complex64, disc: i64) -> PyResult<Complex64> {
    let chi = arith::char_from_d(disc).map_err(to_py)?;
    lfunc::dirichlet_l(s, &chi).map_err(to_py)
}

#[pyfunction]
fn bessel_k(nu: Complex64, x: f64) -> PyResult<Complex64> {
    lfunc::bessel_k(nu, x).map_err(to_py)
}

#[pymodule]
fn lightcone_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<FormParams>()?;
    m.add_class::<CountResult>()?;
    m.add("PoleError", m.py().get_type::<PoleError>())?;
    m.add_function(wrap_pyfunction!(cusp_volume_vp1, m)?)?;
    m.add_function(wrap_pyfunction!(volume, m)?)?;
    m.add_function(wrap_pyfunction!(r_closed, m)?)?;
    m.add_function(wrap_pyfunction!(r_series, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_l, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    Ok(())
}
