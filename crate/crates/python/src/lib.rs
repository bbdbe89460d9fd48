//! Python bindings: analytic solutions, charge data, the solver and its
//! diagnostics. Configurations are passed as the same text the CLI reads.

use exotic_vortex::charge::{self, ChargeData};
use exotic_vortex::config::RunConfig;
use exotic_vortex::diagnostics::{locate_zeros, magnetic_flux};
use exotic_vortex::holomorphic::{HoloMap, Poly};
use exotic_vortex::integrable::{kls_from_minors as kls, SingleFieldSolution, TodaSolution};
use exotic_vortex::io::{sample_analytic, write_csv, FieldGrid};
use exotic_vortex::solver::{newton_solve, FieldSet, ProblemSpec};
use exotic_vortex::surface::Surface;
use exotic_vortex::{Complex64, VortexError as CoreError};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(exotic_vortex_py, VortexError, PyValueError);

fn py_err(e: CoreError) -> PyErr {
    VortexError::new_err(e.to_string())
}

fn poly(coeffs: Vec<Complex64>) -> HoloMap {
    HoloMap::polynomial(Poly::new(coeffs))
}

/// Canonical form of a configuration text.
#[pyfunction]
fn normalize_config(text: &str) -> PyResult<String> {
    RunConfig::parse(text).map(|c| c.serialize()).map_err(py_err)
}

/// `(Q, r)` of the Toda charge family at `d` with the two sign choices.
#[pyfunction]
fn toda_charge_family(d: f64, sign: i8, sign_prime: i8) -> PyResult<([[f64; 2]; 2], [f64; 2])> {
    let cd = charge::toda_charge_family(d, sign, sign_prime).map_err(py_err)?;
    Ok((*cd.q(), *cd.r()))
}

#[pyfunction]
#[pyo3(signature = (q, r, lambda0, lam))]
fn vacuum_moduli(q: [[f64; 2]; 2], r: [f64; 2], lambda0: f64, lam: f64) -> PyResult<[f64; 2]> {
    let cd = ChargeData::new(q, r).map_err(py_err)?;
    charge::vacuum_moduli(&cd, lambda0, lam).map_err(py_err)
}

/// `(g, h, |φ|²)` of the single-field solution generated by the polynomial
/// with coefficients `coeffs` (constant term first).
#[pyfunction]
#[pyo3(signature = (lambda0, lam, coeffs, z))]
fn single_field_eval(lambda0: i8, lam: i8, coeffs: Vec<Complex64>, z: Complex64) -> PyResult<(f64, f64, f64)> {
    let surface = Surface::new(lambda0).map_err(py_err)?;
    let sol = SingleFieldSolution::new(surface, lam, poly(coeffs)).map_err(py_err)?;
    let p = sol.eval(z).map_err(py_err)?;
    Ok((p.g, p.h, p.phi_norm_sq))
}

/// `(e^{2g₁}, e^{2g₂})` of the Toda solution built from two polynomials.
#[pyfunction]
#[pyo3(signature = (f1, f2, lam, z))]
fn toda_eval(f1: Vec<Complex64>, f2: Vec<Complex64>, lam: i8, z: Complex64) -> PyResult<(f64, f64)> {
    let sol = TodaSolution::new(&poly(f1), &poly(f2), lam).map_err(py_err)?;
    let p = sol.eval(z).map_err(py_err)?;
    Ok((p.e2g[0], p.e2g[1]))
}

/// The same quantity through the weighted sum of squared minors.
#[pyfunction]
#[pyo3(signature = (f1, f2, lam, z))]
fn kls_from_minors(f1: Vec<Complex64>, f2: Vec<Complex64>, lam: i8, z: Complex64) -> (f64, f64) {
    let [a, b] = kls(&Poly::new(f1), &Poly::new(f2), lam, z);
    (a, b)
}

/// CSV of the analytic family named in the configuration.
#[pyfunction]
fn analytic_csv(config: &str) -> PyResult<String> {
    let c = RunConfig::parse(config).map_err(py_err)?;
    sample_analytic(&c).map(|f| write_csv(&f)).map_err(py_err)
}

/// A converged numerical solution.
#[pyclass(frozen, module = "exotic_vortex_py")]
struct Solution {
    spec: ProblemSpec,
    fields: FieldSet,
}

#[pymethods]
impl Solution {
    #[getter]
    fn iterations(&self) -> usize {
        self.fields.iterations
    }

    #[getter]
    fn final_residual(&self) -> f64 {
        self.fields.final_residual
    }

    #[getter]
    fn residual_history(&self) -> Vec<f64> {
        self.fields.residual_history.clone()
    }

    #[getter]
    fn flavours(&self) -> usize {
        self.fields.flavours()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.fields.grid().spacing()
    }

    /// Node coordinates in row-major order, excluded nodes included.
    fn points(&self) -> Vec<Complex64> {
        let g = self.fields.grid();
        (0..g.len()).map(|k| g.point(k)).collect()
    }

    fn h(&self, flavour: usize) -> PyResult<Vec<f64>> {
        self.check(flavour)?;
        Ok(self.fields.h(flavour))
    }

    fn phi_sq(&self, flavour: usize) -> PyResult<Vec<f64>> {
        self.check(flavour)?;
        Ok(self.fields.phi_sq(flavour))
    }

    fn zeros(&self, flavour: usize) -> PyResult<Vec<Complex64>> {
        self.check(flavour)?;
        Ok(locate_zeros(&self.fields, flavour))
    }

    /// Flux report as a dict.
    fn flux<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = magnetic_flux(&self.spec, &self.fields).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("k", r.k)?;
        d.set_item("k_raw", r.k_raw)?;
        d.set_item("tail_correction", r.tail_correction)?;
        d.set_item("decay_exponent", r.decay_exponent)?;
        d.set_item("contracted", r.contracted)?;
        d.set_item("contracted_abs", r.contracted_abs)?;
        d.set_item("n_inferred", r.n_inferred)?;
        d.set_item("v_bps", r.v_bps)?;
        Ok(d)
    }

    fn to_csv(&self) -> PyResult<String> {
        let h = (0..self.fields.flavours()).map(|a| self.fields.h(a)).collect();
        let grid = FieldGrid::new(self.fields.grid().clone(), h).map_err(py_err)?;
        Ok(write_csv(&grid))
    }
}

impl Solution {
    fn check(&self, flavour: usize) -> PyResult<()> {
        if flavour < self.fields.flavours() {
            Ok(())
        } else {
            Err(VortexError::new_err(format!("no flavour {flavour}")))
        }
    }
}

/// Solves the problem described by a configuration text.
#[pyfunction]
fn solve(py: Python<'_>, config: &str) -> PyResult<Solution> {
    let c = RunConfig::parse(config).map_err(py_err)?;
    let spec = c.problem().map_err(py_err)?;
    let newton = c.newton();
    let fields = py
        .detach(|| newton_solve(&spec, &newton))
        .map_err(py_err)?;
    Ok(Solution { spec, fields })
}

#[pymodule]
fn exotic_vortex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("VortexError", m.py().get_type::<VortexError>())?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(normalize_config, m)?)?;
    m.add_function(wrap_pyfunction!(toda_charge_family, m)?)?;
    m.add_function(wrap_pyfunction!(vacuum_moduli, m)?)?;
    m.add_function(wrap_pyfunction!(single_field_eval, m)?)?;
    m.add_function(wrap_pyfunction!(toda_eval, m)?)?;
    m.add_function(wrap_pyfunction!(kls_from_minors, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_csv, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_become_vortex_errors() {
        Python::initialize();
        Python::attach(|py| {
            let err = py_err(CoreError::NoVacuum("none".into()));
            assert!(err.is_instance_of::<VortexError>(py));
            assert!(err.is_instance_of::<PyValueError>(py));
        });
    }

    #[test]
    fn toda_origin_value() {
        let c = |re: f64| Complex64::new(re, 0.0);
        let (a, b) = toda_eval(vec![c(0.0), c(1.0)], vec![c(0.0), c(0.0), c(0.5)], -1, c(0.0)).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        let (x, y) = kls_from_minors(vec![c(0.0), c(1.0)], vec![c(0.0), c(0.0), c(0.5)], -1, c(0.3));
        let (p, q) = toda_eval(vec![c(0.0), c(1.0)], vec![c(0.0), c(0.0), c(0.5)], -1, c(0.3)).unwrap();
        assert!((x - p).abs() < 1e-12 && (y - q).abs() < 1e-12);
    }

    #[test]
    fn normalizes_config() {
        let text = normalize_config("[grid]\nn = 32\n").unwrap();
        assert_eq!(normalize_config(&text).unwrap(), text);
        assert!(normalize_config("[grid]\nn = x\n").is_err());
    }
}
