//! Time-domain model-free control runtime: ultra-local model, online
//! disturbance estimate, filtered derivatives, and closed-loop tracking
//! simulation against a discrete plant.
//!
//! The loop implements `u = (1/alpha)(-F_hat + y_r^(n) + Kp e + Kd e_dot)`
//! with `F_hat(t_k) = y_hat^(n)(t_k) - alpha u(t_{k-1})`. Derivatives are
//! produced by the filtered-difference operator
//! `D(z) = (1/Ts)(z-1)/(C z + 1 - C)`; the error channel is filtered (order 2
//! cascades two identical stages), and `y_hat^(n) = y_r^(n) - e_hat^(n)`.
//! That choice makes the runtime agree exactly with the rational iPD
//! controller transfer function for constant references.

use serde::{Deserialize, Serialize};

use crate::bridge::{FilterConfig, IpdGains, UltraLocalOrder};
use crate::plant::StateSpace;
use crate::{Error, Result};

/// Output magnitude beyond which a tracking run is aborted as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// One stage of the filtered-difference operator, as the recursion
/// `C y_k + (1-C) y_{k-1} = (u_k - u_{k-1})/Ts`. States start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivFilter {
    c: f64,
    ts: f64,
    prev_in: f64,
    prev_out: f64,
}

impl DerivFilter {
    pub fn new(f: &FilterConfig) -> Self {
        DerivFilter {
            c: f.c,
            ts: f.ts,
            prev_in: 0.0,
            prev_out: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.prev_in = 0.0;
        self.prev_out = 0.0;
    }
}

/// Advance one filter stage by one sample and return the filtered derivative.
pub fn filtered_derivative_step(state: &mut DerivFilter, sample: f64) -> f64 {
    let out = ((sample - state.prev_in) / state.ts + (state.c - 1.0) * state.prev_out) / state.c;
    state.prev_in = sample;
    state.prev_out = out;
    out
}

/// Runtime state of the ultra-local controller: one derivative-filter stage
/// per model order, the previous control action, and the latest disturbance
/// estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltraLocalState {
    pub order: UltraLocalOrder,
    filters: Vec<DerivFilter>,
    u_prev: f64,
    f_hat: f64,
}

impl UltraLocalState {
    pub fn new(order: UltraLocalOrder, f: &FilterConfig) -> Self {
        UltraLocalState {
            order,
            filters: vec![DerivFilter::new(f); order.n()],
            u_prev: 0.0,
            f_hat: 0.0,
        }
    }

    /// Latest disturbance estimate.
    pub fn f_hat(&self) -> f64 {
        self.f_hat
    }

    /// Control action applied at the previous sample (0 at startup).
    pub fn u_prev(&self) -> f64 {
        self.u_prev
    }
}

/// Disturbance estimate `F_hat = y_hat^(n) - alpha * u_{k-1}`.
pub fn f_estimate(state: &UltraLocalState, y_deriv_n: f64, alpha: f64) -> f64 {
    y_deriv_n - alpha * state.u_prev
}

/// One control update: filter the error derivatives, estimate `F`, and apply
/// the iPD law (the integral term is fixed at zero; only iPD structures are
/// supported).
pub fn ipd_control_step(
    state: &mut UltraLocalState,
    e: f64,
    gains: &IpdGains,
    yr_deriv_n: f64,
) -> Result<f64> {
    if gains.alpha == 0.0 {
        return Err(Error::AlphaZero);
    }
    if gains.order != state.order {
        return Err(Error::KindMismatch(
            "gain order does not match runtime state".into(),
        ));
    }
    // Cascade of identical stages on the error channel; the first stage is
    // the filtered error rate used by the Kd term.
    let mut deriv = e;
    let mut e_dot = 0.0;
    for (i, filt) in state.filters.iter_mut().enumerate() {
        deriv = filtered_derivative_step(filt, deriv);
        if i == 0 {
            e_dot = deriv;
        }
    }
    let e_deriv_n = deriv;
    let y_deriv_n = yr_deriv_n - e_deriv_n;
    let f_hat = f_estimate(state, y_deriv_n, gains.alpha);
    state.f_hat = f_hat;
    let u = (-f_hat + yr_deriv_n + gains.kp * e + gains.kd * e_dot) / gains.alpha;
    state.u_prev = u;
    Ok(u)
}

/// Reference trajectory shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RefKind {
    /// Ideal step.
    Step,
    /// Step shaped by a critically damped second-order filter
    /// `1/(tau s + 1)^2`.
    SmoothedStep { tau: f64 },
    /// Arbitrary sampled sequence (held at its last value).
    Sampled { samples: Vec<f64> },
}

/// Reference signal: shape, amplitude, and onset time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSignal {
    pub kind: RefKind,
    pub amplitude: f64,
    pub start_time: f64,
}

impl ReferenceSignal {
    pub fn step(amplitude: f64) -> Self {
        ReferenceSignal {
            kind: RefKind::Step,
            amplitude,
            start_time: 0.0,
        }
    }

    pub fn smoothed_step(amplitude: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::domain("smoothed step requires tau > 0"));
        }
        Ok(ReferenceSignal {
            kind: RefKind::SmoothedStep { tau },
            amplitude,
            start_time: 0.0,
        })
    }

    pub fn with_start_time(mut self, t0: f64) -> Self {
        self.start_time = t0;
        self
    }

    /// Reference value at time `t` (seconds); `ts` resolves sampled indices.
    pub fn sample(&self, t: f64, ts: f64) -> f64 {
        let tau_t = t - self.start_time;
        match &self.kind {
            RefKind::Step => {
                if tau_t >= 0.0 {
                    self.amplitude
                } else {
                    0.0
                }
            }
            RefKind::SmoothedStep { tau } => {
                if tau_t < 0.0 {
                    0.0
                } else {
                    let x = tau_t / tau;
                    self.amplitude * (1.0 - (1.0 + x) * (-x).exp())
                }
            }
            RefKind::Sampled { samples } => {
                if tau_t < 0.0 || samples.is_empty() {
                    0.0
                } else {
                    let idx = ((tau_t / ts).round() as usize).min(samples.len() - 1);
                    samples[idx]
                }
            }
        }
    }

    /// Analytic nth derivative of the reference at time `t`.
    ///
    /// Step references use 0 (ideal derivatives of a constant after onset);
    /// smoothed steps differentiate the shaping filter. Sampled references
    /// fall back to 0, matching the step convention.
    pub fn deriv_n(&self, t: f64, n: usize) -> f64 {
        let tau_t = t - self.start_time;
        match &self.kind {
            RefKind::Step | RefKind::Sampled { .. } => 0.0,
            RefKind::SmoothedStep { tau } => {
                if tau_t < 0.0 {
                    return 0.0;
                }
                let x = tau_t / tau;
                let e = (-x).exp();
                match n {
                    0 => self.amplitude * (1.0 - (1.0 + x) * e),
                    1 => self.amplitude * tau_t / (tau * tau) * e,
                    2 => self.amplitude * (tau - tau_t) / tau.powi(3) * e,
                    _ => 0.0,
                }
            }
        }
    }
}

/// Time-indexed closed-loop record at uniform sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub ts: f64,
    pub time: Vec<f64>,
    pub reference: Vec<f64>,
    pub output: Vec<f64>,
    pub error: Vec<f64>,
    pub control: Vec<f64>,
    /// Set when the run was aborted on `DIVERGENCE_LIMIT`; the trace holds
    /// the samples recorded up to the abort.
    pub diverged: bool,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// CSV export with header `t,ref,y,e,u`, one row per sample, full double
    /// precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,ref,y,e,u\n");
        for k in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.time[k], self.reference[k], self.output[k], self.error[k], self.control[k]
            ));
        }
        out
    }
}

/// Closed-loop tracking simulation of an iPD controller against a discrete
/// plant (input column 0; output row 0). Divergence aborts with a partial
/// trace and the `diverged` flag set.
pub fn simulate_tracking(
    plant: &StateSpace,
    gains: &IpdGains,
    f: &FilterConfig,
    reference: &ReferenceSignal,
    n_steps: usize,
) -> Result<SimTrace> {
    let ts = plant
        .ts()
        .ok_or_else(|| Error::domain("simulate_tracking expects a discrete plant"))?;
    if (ts - f.ts).abs() > 1e-12 * ts.max(f.ts) {
        return Err(Error::TsMismatch(ts, f.ts));
    }
    let n = plant.order();
    let mut x = vec![0.0; n];
    let mut state = UltraLocalState::new(gains.order, f);
    let mut trace = SimTrace {
        ts,
        time: Vec::with_capacity(n_steps),
        reference: Vec::with_capacity(n_steps),
        output: Vec::with_capacity(n_steps),
        error: Vec::with_capacity(n_steps),
        control: Vec::with_capacity(n_steps),
        diverged: false,
    };
    let order_n = gains.order.n();
    for k in 0..n_steps {
        let t = k as f64 * ts;
        let y: f64 = (0..n).map(|j| plant.c[(0, j)] * x[j]).sum();
        if !y.is_finite() || y.abs() > DIVERGENCE_LIMIT {
            trace.diverged = true;
            break;
        }
        let r = reference.sample(t, ts);
        let e = r - y;
        let u = ipd_control_step(&mut state, e, gains, reference.deriv_n(t, order_n))?;
        trace.time.push(t);
        trace.reference.push(r);
        trace.output.push(y);
        trace.error.push(e);
        trace.control.push(u);
        // x <- A x + B u (steering input only; the disturbance column is
        // driven by zero here).
        let mut xn = vec![0.0; n];
        for i in 0..n {
            let mut acc = plant.b[(i, 0)] * u;
            for j in 0..n {
                acc += plant.a[(i, j)] * x[j];
            }
            xn[i] = acc;
        }
        x = xn;
    }
    Ok(trace)
}
