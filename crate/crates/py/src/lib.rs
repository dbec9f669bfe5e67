//! Python bindings: the main design-pipeline types and operations.
//!
//! ```python
//! import mfcforge_py as mfc
//! params = mfc.VehicleParams(1372.0, 9.72, 1990.0, 37022.5, 35900.0, 0.98, 1.48)
//! plant = mfc.lateral_plant(params, 0.05)
//! s = mfc.stabilizing_set(plant, "pid", 4.0, 0.0, 0.28, 200)
//! ```

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mfcforge::analysis;
use mfcforge::bridge;
use mfcforge::plant;
use mfcforge::sim;
use mfcforge::stabset;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Bicycle-model parameters (SI units).
#[pyclass(name = "VehicleParams", from_py_object)]
#[derive(Clone)]
struct PyVehicleParams {
    inner: plant::VehicleParams,
}

#[pymethods]
impl PyVehicleParams {
    #[new]
    fn new(m: f64, vx: f64, iz: f64, cf: f64, cr: f64, lf: f64, lr: f64) -> Self {
        PyVehicleParams {
            inner: plant::VehicleParams {
                m,
                vx,
                iz,
                cf,
                cr,
                lf,
                lr,
            },
        }
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Discretized plant: state-space model plus the design transfer function.
#[pyclass(name = "Plant", from_py_object)]
#[derive(Clone)]
struct PyPlant {
    ss: plant::StateSpace,
    tf: plant::DiscreteTF,
}

#[pymethods]
impl PyPlant {
    /// Ascending numerator coefficients of the design transfer function.
    #[getter]
    fn num(&self) -> Vec<f64> {
        self.tf.num().coeffs().to_vec()
    }

    /// Ascending (monic) denominator coefficients.
    #[getter]
    fn den(&self) -> Vec<f64> {
        self.tf.den().coeffs().to_vec()
    }

    #[getter]
    fn ts(&self) -> f64 {
        self.tf.ts()
    }

    fn __repr__(&self) -> String {
        format!(
            "Plant(ts={}, deg_den={}, deg_num={})",
            self.tf.ts(),
            self.tf.den().degree().unwrap_or(0),
            self.tf.num().degree().unwrap_or(0)
        )
    }
}

/// Derivative-filter configuration D(z) = (1/Ts)(z-1)/(Cz+1-C).
#[pyclass(name = "FilterConfig", from_py_object)]
#[derive(Clone)]
struct PyFilterConfig {
    inner: bridge::FilterConfig,
}

#[pymethods]
impl PyFilterConfig {
    #[new]
    fn new(c: f64, ts: f64) -> PyResult<Self> {
        Ok(PyFilterConfig {
            inner: bridge::FilterConfig::new(c, ts).map_err(err)?,
        })
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn ts(&self) -> f64 {
        self.inner.ts
    }
}

/// iPD gains (Kp, Kd, alpha) with the ultra-local model order n in {1, 2}.
#[pyclass(name = "IpdGains", from_py_object)]
#[derive(Clone)]
struct PyIpdGains {
    inner: bridge::IpdGains,
}

#[pymethods]
impl PyIpdGains {
    #[new]
    #[pyo3(signature = (kp, kd, alpha, n = 2))]
    fn new(kp: f64, kd: f64, alpha: f64, n: usize) -> PyResult<Self> {
        let order = bridge::UltraLocalOrder::from_n(n).map_err(err)?;
        Ok(PyIpdGains {
            inner: bridge::IpdGains::new(kp, kd, alpha, order).map_err(err)?,
        })
    }

    #[getter]
    fn kp(&self) -> f64 {
        self.inner.kp
    }

    #[getter]
    fn kd(&self) -> f64 {
        self.inner.kd
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.order.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "IpdGains(kp={}, kd={}, alpha={}, n={})",
            self.inner.kp,
            self.inner.kd,
            self.inner.alpha,
            self.inner.order.n()
        )
    }
}

/// Three Term (PID) gains.
#[pyclass(name = "PidGains", from_py_object)]
#[derive(Clone)]
struct PyPidGains {
    inner: bridge::PidGains,
}

#[pymethods]
impl PyPidGains {
    #[new]
    fn new(k2: f64, k1: f64, k0: f64) -> Self {
        PyPidGains {
            inner: bridge::PidGains { k2, k1, k0 },
        }
    }

    #[getter]
    fn k2(&self) -> f64 {
        self.inner.k2
    }

    #[getter]
    fn k1(&self) -> f64 {
        self.inner.k1
    }

    #[getter]
    fn k0(&self) -> f64 {
        self.inner.k0
    }

    /// Gate parameter K3 = K2 - K0.
    #[getter]
    fn k3(&self) -> f64 {
        self.inner.k3()
    }

    fn __repr__(&self) -> String {
        format!(
            "PidGains(k2={}, k1={}, k0={})",
            self.inner.k2, self.inner.k1, self.inner.k0
        )
    }
}

/// Computed stabilizing set: gate slices with convex feasible regions.
#[pyclass(name = "StabilizingSet")]
struct PyStabilizingSet {
    inner: stabset::StabilizingSet,
}

#[pymethods]
impl PyStabilizingSet {
    fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    fn num_slices(&self) -> usize {
        self.inner.slices.len()
    }

    /// Slices as `(gate, regions)` with polygon regions as vertex lists and
    /// interval regions as `[lo, hi]` pairs.
    fn slices(&self) -> Vec<(f64, Vec<Vec<Vec<f64>>>)> {
        self.inner
            .slices
            .iter()
            .map(|s| {
                let regions = s
                    .regions
                    .iter()
                    .map(|r| match r {
                        stabset::Region::Interval { lo, hi } => vec![vec![*lo, *hi]],
                        stabset::Region::Polygon { vertices } => {
                            vertices.iter().map(|v| v.to_vec()).collect()
                        }
                    })
                    .collect();
                (s.gate, regions)
            })
            .collect()
    }

    /// Distance from `(k1, k2)` to the regions of the slice nearest `gate`
    /// (0 inside; infinity when the set is empty).
    fn distance(&self, gate: f64, k1: f64, k2: f64) -> f64 {
        self.inner
            .nearest_slice(gate)
            .map(|s| {
                s.regions
                    .iter()
                    .map(|r| r.distance([k1, k2]))
                    .fold(f64::INFINITY, f64::min)
            })
            .unwrap_or(f64::INFINITY)
    }

    /// Gate spacing of the sweep (the membership tolerance scale).
    #[getter]
    fn gate_spacing(&self) -> f64 {
        self.inner.sweep.gate_spacing()
    }

    fn __repr__(&self) -> String {
        format!(
            "StabilizingSet(kind={:?}, slices={}, sigma={})",
            self.inner.kind,
            self.inner.slices.len(),
            self.inner.signature.sigma
        )
    }
}

/// Build the lateral bicycle-model plant and discretize it with a zero-order
/// hold at the given sample time.
#[pyfunction]
fn lateral_plant(params: PyVehicleParams, ts: f64) -> PyResult<PyPlant> {
    let continuous = plant::build_lateral_ss(&params.inner).map_err(err)?;
    let ss = plant::zoh_discretize(&continuous, ts).map_err(err)?;
    let tf = plant::ss_to_tf(&ss, 0, 0).map_err(err)?;
    Ok(PyPlant { ss, tf })
}

/// Complete stabilizing set of the filter-augmented plant.
#[pyfunction]
#[pyo3(signature = (plant, kind, filter_c, gate_lo, gate_hi, steps, param_lo = -50.0, param_hi = 50.0))]
#[allow(clippy::too_many_arguments)]
fn stabilizing_set(
    plant: PyPlant,
    kind: &str,
    filter_c: f64,
    gate_lo: f64,
    gate_hi: f64,
    steps: usize,
    param_lo: f64,
    param_hi: f64,
) -> PyResult<PyStabilizingSet> {
    let (kind, order) = match kind {
        "pi" => (stabset::ControllerKind::Pi, 1),
        "pid" => (stabset::ControllerKind::Pid, 2),
        other => return Err(PyValueError::new_err(format!("unknown kind `{other}`"))),
    };
    let g_aug = plant::augment_with_filter_poles(&plant.tf, filter_c, order).map_err(err)?;
    let sweep =
        stabset::SweepConfig::new(gate_lo, gate_hi, steps).with_param_box(param_lo, param_hi);
    let set = stabset::stabilizing_set(&g_aug, kind, &sweep).map_err(err)?;
    Ok(PyStabilizingSet { inner: set })
}

/// Forward map: order-2 iPD gains to the equivalent Three Term gains.
#[pyfunction]
fn ipd2_to_pid(gains: PyIpdGains, filt: PyFilterConfig) -> PyResult<PyPidGains> {
    Ok(PyPidGains {
        inner: bridge::ipd2_to_pid(&gains.inner, &filt.inner).map_err(err)?,
    })
}

/// Inverse map: Three Term gains back to iPD parameters.
#[pyfunction]
#[pyo3(signature = (gains, filt, method = "nonlinear"))]
fn pid_to_ipd2(gains: PyPidGains, filt: PyFilterConfig, method: &str) -> PyResult<PyIpdGains> {
    let out = match method {
        "nonlinear" => bridge::pid_to_ipd2_nonlinear(&gains.inner, &filt.inner),
        "semilinear" => bridge::pid_to_ipd2_semilinear(&gains.inner, &filt.inner),
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    Ok(PyIpdGains {
        inner: out.map_err(err)?,
    })
}

/// Gain/phase margins of the open loop C_iPD(z) G(z) as a dict.
#[pyfunction]
fn margins<'py>(
    py: Python<'py>,
    plant: PyPlant,
    gains: PyIpdGains,
    filt: PyFilterConfig,
) -> PyResult<Bound<'py, PyDict>> {
    let ctf = bridge::controller_tf(&bridge::ControllerGains::Ipd(gains.inner), &filt.inner)
        .map_err(err)?;
    let open = plant::DiscreteTF::new(
        ctf.num().mul(plant.tf.num()),
        ctf.den().mul(plant.tf.den()),
        plant.tf.ts(),
    )
    .map_err(err)?;
    let m = analysis::margins(&open).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("gain_margin_db", m.gain_margin_db)?;
    d.set_item("phase_crossover_rad_s", m.phase_crossover_rad_s)?;
    d.set_item("phase_margin_deg", m.phase_margin_deg)?;
    d.set_item("gain_crossover_rad_s", m.gain_crossover_rad_s)?;
    Ok(d)
}

/// Closed-loop iPD tracking simulation; returns the trace channels and the
/// step metrics as a dict.
#[pyfunction]
#[pyo3(signature = (plant, gains, filt, reference = "step", amplitude = 1.0, tau = 0.25, n = 1200, band = 0.05))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    plant: PyPlant,
    gains: PyIpdGains,
    filt: PyFilterConfig,
    reference: &str,
    amplitude: f64,
    tau: f64,
    n: usize,
    band: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let reference = match reference {
        "step" => sim::ReferenceSignal::step(amplitude),
        "smoothstep" => sim::ReferenceSignal::smoothed_step(amplitude, tau).map_err(err)?,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown reference `{other}`"
            )))
        }
    };
    let trace =
        sim::simulate_tracking(&plant.ss, &gains.inner, &filt.inner, &reference, n).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("t", trace.time.clone())?;
    d.set_item("ref", trace.reference.clone())?;
    d.set_item("y", trace.output.clone())?;
    d.set_item("e", trace.error.clone())?;
    d.set_item("u", trace.control.clone())?;
    d.set_item("diverged", trace.diverged)?;
    match analysis::step_metrics(&trace, band) {
        Ok(m) => {
            d.set_item("os_pct", m.overshoot_pct)?;
            d.set_item("st_s", m.settling_time_s)?;
            d.set_item("settled", m.settled)?;
            d.set_item("final_value", m.final_value)?;
        }
        Err(_) => {
            d.set_item("os_pct", py.None())?;
            d.set_item("st_s", py.None())?;
        }
    }
    Ok(d)
}

#[pymodule]
fn mfcforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyVehicleParams>()?;
    m.add_class::<PyPlant>()?;
    m.add_class::<PyFilterConfig>()?;
    m.add_class::<PyIpdGains>()?;
    m.add_class::<PyPidGains>()?;
    m.add_class::<PyStabilizingSet>()?;
    m.add_function(wrap_pyfunction!(lateral_plant, m)?)?;
    m.add_function(wrap_pyfunction!(stabilizing_set, m)?)?;
    m.add_function(wrap_pyfunction!(ipd2_to_pid, m)?)?;
    m.add_function(wrap_pyfunction!(pid_to_ipd2, m)?)?;
    m.add_function(wrap_pyfunction!(margins, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
