//! Bicycle-model lateral-error dynamics, zero-order-hold discretization, and
//! discrete transfer-function extraction.
//!
//! The model has four states (lateral error, its rate, heading error, its
//! rate), a steering input, and a desired-yaw-rate disturbance input. The
//! disturbance column is retained for simulation but excluded from the design
//! transfer function.

use serde::{Deserialize, Serialize};

use crate::poly::Poly;
use crate::{Error, Result};

/// Bicycle-model parameters (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Vehicle mass (kg).
    pub m: f64,
    /// Longitudinal speed (m/s).
    pub vx: f64,
    /// Yaw inertia (kg m^2).
    pub iz: f64,
    /// Front cornering stiffness (N/rad).
    pub cf: f64,
    /// Rear cornering stiffness (N/rad).
    pub cr: f64,
    /// CoG-to-front-axle distance (m).
    pub lf: f64,
    /// CoG-to-rear-axle distance (m).
    pub lr: f64,
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        if self.vx <= 0.0 {
            return Err(Error::SingularModel);
        }
        for (name, v) in [
            ("m", self.m),
            ("iz", self.iz),
            ("cf", self.cf),
            ("cr", self.cr),
            ("lf", self.lf),
            ("lr", self.lr),
        ] {
            if !(v > 0.0) {
                return Err(Error::domain(format!(
                    "vehicle parameter {name} must be > 0"
                )));
            }
        }
        Ok(())
    }
}

/// Minimal dense row-major matrix; the toolkit never works above 6x6.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Column as an n x 1 matrix.
    pub fn column(&self, j: usize) -> Mat {
        let mut out = Mat::zeros(self.rows, 1);
        for i in 0..self.rows {
            out[(i, 0)] = self[(i, j)];
        }
        out
    }

    fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Matrix exponential by scaling-and-squaring with a truncated Taylor series.
///
/// Sized for the desk-scale matrices here (<= 6x6): scale to norm <= 0.25,
/// sum 24 terms, square back.
pub fn expm(a: &Mat) -> Mat {
    assert_eq!(a.rows, a.cols, "expm requires a square matrix");
    let norm = a.inf_norm();
    let mut squarings = 0u32;
    let mut scaled = a.clone();
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
        scaled = a.scale(0.5f64.powi(squarings as i32));
    }
    let n = a.rows;
    let mut sum = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=24 {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        sum = sum.add(&term);
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Time-domain tag for a state-space model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Continuous,
    Discrete { ts: f64 },
}

/// State-space model `x' = A x + B u, y = C x + D u` (continuous or discrete).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub domain: Domain,
}

impl StateSpace {
    pub fn order(&self) -> usize {
        self.a.rows
    }

    pub fn ts(&self) -> Option<f64> {
        match self.domain {
            Domain::Discrete { ts } => Some(ts),
            Domain::Continuous => None,
        }
    }
}

/// Discrete rational transfer function `N(z)/D(z)` with its sample time.
///
/// Invariants: `deg N <= deg D`, denominator monic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTF {
    num: Poly,
    den: Poly,
    ts: f64,
}

impl DiscreteTF {
    pub fn new(num: Poly, den: Poly, ts: f64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::domain("transfer function denominator is zero"));
        }
        if num.degree().unwrap_or(0) > den.degree().unwrap() {
            return Err(Error::domain(
                "transfer function must be proper (deg N <= deg D)",
            ));
        }
        if !(ts > 0.0) {
            return Err(Error::domain("sample time must be > 0"));
        }
        let lead = den.leading();
        Ok(DiscreteTF {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
            ts,
        })
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn eval(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        self.num.eval_complex(z) / self.den.eval_complex(z)
    }
}

/// Continuous lateral-error dynamics of the bicycle model.
///
/// `B` has two columns: steering (column 0) and the desired-yaw-rate
/// disturbance (column 1); the output row selects the lateral error.
pub fn build_lateral_ss(params: &VehicleParams) -> Result<StateSpace> {
    params.validate()?;
    let VehicleParams {
        m,
        vx,
        iz,
        cf,
        cr,
        lf,
        lr,
    } = *params;
    let a = Mat::from_rows(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[
            0.0,
            -(2.0 * cf + 2.0 * cr) / (m * vx),
            (2.0 * cf + 2.0 * cr) / m,
            (-2.0 * cf * lf + 2.0 * cr * lr) / (m * vx),
        ],
        &[0.0, 0.0, 0.0, 1.0],
        &[
            0.0,
            (2.0 * cr * lr - 2.0 * cf * lf) / (iz * vx),
            (2.0 * cf * lf - 2.0 * cr * lr) / iz,
            (-2.0 * cf * lf * lf - 2.0 * cr * lr * lr) / (iz * vx),
        ],
    ]);
    let b = Mat::from_rows(&[
        &[0.0, 0.0],
        &[
            2.0 * cf / m,
            -(2.0 * cf * lf - 2.0 * cr * lr) / (m * vx) - vx,
        ],
        &[0.0, 0.0],
        &[
            2.0 * cf * lf / iz,
            -(2.0 * cf * lf * lf + 2.0 * cr * lr * lr) / (iz * vx),
        ],
    ]);
    let c = Mat::from_rows(&[&[1.0, 0.0, 0.0, 0.0]]);
    let d = Mat::zeros(1, 2);
    Ok(StateSpace {
        a,
        b,
        c,
        d,
        domain: Domain::Continuous,
    })
}

/// Zero-order-hold discretization via the augmented-matrix exponential:
/// `exp([[A, B], [0, 0]] Ts)` yields `A_d` and `B_d` in its top blocks.
pub fn zoh_discretize(ss: &StateSpace, ts: f64) -> Result<StateSpace> {
    if ss.domain != Domain::Continuous {
        return Err(Error::domain("zoh_discretize expects a continuous model"));
    }
    if !(ts > 0.0) {
        return Err(Error::domain("sample time must be > 0"));
    }
    let n = ss.order();
    let m = ss.b.cols;
    let mut aug = Mat::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = ss.a[(i, j)] * ts;
        }
        for j in 0..m {
            aug[(i, n + j)] = ss.b[(i, j)] * ts;
        }
    }
    let e = expm(&aug);
    let mut ad = Mat::zeros(n, n);
    let mut bd = Mat::zeros(n, m);
    for i in 0..n {
        for j in 0..n {
            ad[(i, j)] = e[(i, j)];
        }
        for j in 0..m {
            bd[(i, j)] = e[(i, n + j)];
        }
    }
    Ok(StateSpace {
        a: ad,
        b: bd,
        c: ss.c.clone(),
        d: ss.d.clone(),
        domain: Domain::Discrete { ts },
    })
}

/// Discrete transfer function of one input/output pair via the
/// Leverrier-Faddeev resolvent recursion: `D(z) = det(zI - A_d)`,
/// `N(z) = C adj(zI - A_d) B_d + D(z) d`.
///
/// Coefficients below 1e-12 of the largest magnitude are zeroed before the
/// degree is computed.
pub fn ss_to_tf(ss: &StateSpace, input: usize, output: usize) -> Result<DiscreteTF> {
    let ts = ss
        .ts()
        .ok_or_else(|| Error::domain("ss_to_tf expects a discrete model"))?;
    if input >= ss.b.cols || output >= ss.c.rows {
        return Err(Error::domain("input/output index out of range"));
    }
    let n = ss.order();
    let b = ss.b.column(input);
    // c_out: 1 x n row.
    let mut c = Mat::zeros(1, n);
    for j in 0..n {
        c[(0, j)] = ss.c[(output, j)];
    }
    let d = ss.d[(output, input)];

    // den(z) = z^n + den[n-1] z^{n-1} + ... ; adj(zI - A) = sum z^{n-1-k} B_k.
    let mut den_desc = vec![1.0];
    let mut bk = Mat::identity(n);
    let mut num_desc = vec![0.0; n + 1];
    for k in 1..=n {
        // Numerator picks up C B_{k-1} B at power z^{n-k}.
        num_desc[k] = c.matmul(&bk).matmul(&b)[(0, 0)];
        let ak = ss.a.matmul(&bk);
        let ck = -ak.trace() / k as f64;
        den_desc.push(ck);
        bk = ak.add(&Mat::identity(n).scale(ck));
    }
    // Feedthrough adds d * den.
    for (nk, dk) in num_desc.iter_mut().zip(den_desc.iter()) {
        *nk += d * dk;
    }
    let num = Poly::new(num_desc.into_iter().rev().collect::<Vec<_>>()).cleanup(1e-12);
    let den = Poly::new(den_desc.into_iter().rev().collect::<Vec<_>>()).cleanup(1e-12);
    DiscreteTF::new(num, den, ts)
}

/// Augment `G(z)` with `m` derivative-filter poles:
/// returns `G(z) * z^m / (C z + 1 - C)^m`, with any common `z` factors
/// between numerator and denominator cancelled (exact zeros only, so the
/// `C = 1` case reduces back to `G`).
pub fn augment_with_filter_poles(g: &DiscreteTF, c: f64, m: usize) -> Result<DiscreteTF> {
    if c < 1.0 {
        return Err(Error::UnstableFilter);
    }
    let stage = Poly::new(vec![1.0 - c, c]);
    let mut num = g.num().clone();
    let mut den = g.den().clone();
    for _ in 0..m {
        num = num.mul(&Poly::monomial(1.0, 1));
        den = den.mul(&stage);
    }
    // Cancel exact common z^k factors.
    let num_c = num.coeffs();
    let den_c = den.coeffs();
    let mut shift = 0;
    while shift < num_c.len().saturating_sub(1)
        && shift < den_c.len().saturating_sub(1)
        && num_c[shift] == 0.0
        && den_c[shift] == 0.0
    {
        shift += 1;
    }
    if shift > 0 {
        num = Poly::new(num_c[shift..].to_vec());
        den = Poly::new(den_c[shift..].to_vec());
    }
    DiscreteTF::new(num, den, g.ts())
}
