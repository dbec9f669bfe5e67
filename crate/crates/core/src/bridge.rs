//! Exact algebraic bridge between PI/PID parameter space and iPD parameter
//! space, plus controller transfer-function construction.
//!
//! The iPD controller of order `n` closes the loop around the ultra-local
//! model `y^(n) = F + alpha u` with a filtered derivative
//! `D(z) = (1/Ts)(z-1)/(C z + 1 - C)`. With that filter, the order-1 (order-2)
//! iPD controller is algebraically a Two Term (Three Term) controller acting
//! on the filter-augmented plant, and the gain maps below are exact.

use serde::{Deserialize, Serialize};

use crate::plant::DiscreteTF;
use crate::poly::Poly;
use crate::stabset::{ControllerKind, StabilizingSet};
use crate::{Error, Result};

/// Relative determinant threshold below which the inverse transforms are
/// reported singular rather than returning huge gains.
const SINGULAR_REL_TOL: f64 = 1e-12;

/// Derivative-filter configuration of Eq-style operator
/// `D(z) = (1/Ts)(z-1)/(C z + 1 - C)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Filter constant; the filter pole is `(C-1)/C`.
    pub c: f64,
    /// Sample time (s).
    pub ts: f64,
}

impl FilterConfig {
    pub fn new(c: f64, ts: f64) -> Result<Self> {
        if c < 1.0 {
            return Err(Error::UnstableFilter);
        }
        if !(ts > 0.0) {
            return Err(Error::domain("filter sample time must be > 0"));
        }
        Ok(FilterConfig { c, ts })
    }
}

/// Two Term (PI-like) gains: `C_PI(z) = K1 (z - K2)/(z - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiGains {
    pub k1: f64,
    pub k2: f64,
}

/// Three Term (PID-like) gains:
/// `C_PID(z) = (K2 z^2 + K1 z + K0) / (z (z - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub k2: f64,
    pub k1: f64,
    pub k0: f64,
}

impl PidGains {
    /// The gate parameter `K3 = K2 - K0`.
    pub fn k3(&self) -> f64 {
        self.k2 - self.k0
    }

    /// Rebuild gains from a stabilizing-set point `(K3, K1, K2)`.
    pub fn from_gate_point(k3: f64, k1: f64, k2: f64) -> Self {
        PidGains {
            k2,
            k1,
            k0: k2 - k3,
        }
    }
}

/// Ultra-local model order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UltraLocalOrder {
    First,
    Second,
}

impl UltraLocalOrder {
    pub fn n(&self) -> usize {
        match self {
            UltraLocalOrder::First => 1,
            UltraLocalOrder::Second => 2,
        }
    }

    pub fn from_n(n: usize) -> Result<Self> {
        match n {
            1 => Ok(UltraLocalOrder::First),
            2 => Ok(UltraLocalOrder::Second),
            _ => Err(Error::domain("ultra-local model order must be 1 or 2")),
        }
    }
}

/// iPD gains: proportional, derivative, plant-gain scaling, and model order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpdGains {
    pub kp: f64,
    pub kd: f64,
    pub alpha: f64,
    pub order: UltraLocalOrder,
}

impl IpdGains {
    pub fn new(kp: f64, kd: f64, alpha: f64, order: UltraLocalOrder) -> Result<Self> {
        if alpha == 0.0 {
            return Err(Error::AlphaZero);
        }
        Ok(IpdGains {
            kp,
            kd,
            alpha,
            order,
        })
    }
}

/// One controller record: gains of any supported structure plus the filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ControllerGains {
    Pi(PiGains),
    Pid(PidGains),
    Ipd(IpdGains),
}

/// Gains plus the filter configuration they were designed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainsRecord {
    pub gains: ControllerGains,
    pub filter: FilterConfig,
}

/// The filtered-difference operator `D(z) = (1/Ts)(z-1)/(C z + 1 - C)` as a
/// transfer function.
pub fn derivative_filter_tf(f: &FilterConfig) -> DiscreteTF {
    let num = Poly::new(vec![-1.0 / f.ts, 1.0 / f.ts]);
    let den = Poly::new(vec![1.0 - f.c, f.c]);
    DiscreteTF::new(num, den, f.ts).expect("filter TF is always proper")
}

/// Forward map, order 1: `K1 = (Kp Ts C + Kd + 1)/(alpha Ts)` and
/// `K2 = (Kp Ts (C-1) + Kd + 1)/(Kp Ts C + Kd + 1)`, so that
/// `C_iPD1 = C_PI(z) * z/(C z + 1 - C)` holds as a polynomial identity.
pub fn ipd1_to_pi(g: &IpdGains, f: &FilterConfig) -> Result<PiGains> {
    if g.alpha == 0.0 {
        return Err(Error::AlphaZero);
    }
    if g.order != UltraLocalOrder::First {
        return Err(Error::KindMismatch(
            "ipd1_to_pi expects an order-1 iPD".into(),
        ));
    }
    let hi = g.kp * f.ts * f.c + g.kd + 1.0;
    let lo = g.kp * f.ts * (f.c - 1.0) + g.kd + 1.0;
    if hi == 0.0 {
        return Err(Error::TransformSingular);
    }
    Ok(PiGains {
        k1: hi / (g.alpha * f.ts),
        k2: lo / hi,
    })
}

/// Inverse map, order 1: `Kp = alpha K1 (1 - K2)`,
/// `Kd = alpha Ts K1 (1 - C + K2 C) - 1`. One iPD parameter (alpha) is
/// undetermined and must be supplied by the caller.
pub fn pi_to_ipd1(pi: &PiGains, f: &FilterConfig, alpha: f64) -> Result<IpdGains> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero);
    }
    let kp = alpha * pi.k1 * (1.0 - pi.k2);
    let kd = alpha * f.ts * pi.k1 * (1.0 - f.c + pi.k2 * f.c) - 1.0;
    Ok(IpdGains {
        kp,
        kd,
        alpha,
        order: UltraLocalOrder::First,
    })
}

/// Forward map, order 2:
///
/// ```text
/// K2 = (Kp Ts^2 C^2        + Kd Ts C       + 1) / (alpha Ts^2)
/// K1 = (2 Kp Ts^2 C (1-C)  + Kd Ts (1-2C)  - 2) / (alpha Ts^2)
/// K0 = (Kp Ts^2 (C-1)^2    + Kd Ts (C-1)   + 1) / (alpha Ts^2)
/// ```
pub fn ipd2_to_pid(g: &IpdGains, f: &FilterConfig) -> Result<PidGains> {
    if g.alpha == 0.0 {
        return Err(Error::AlphaZero);
    }
    if g.order != UltraLocalOrder::Second {
        return Err(Error::KindMismatch(
            "ipd2_to_pid expects an order-2 iPD".into(),
        ));
    }
    let ts2 = f.ts * f.ts;
    let den = g.alpha * ts2;
    Ok(PidGains {
        k2: (g.kp * ts2 * f.c * f.c + g.kd * f.ts * f.c + 1.0) / den,
        k1: (2.0 * g.kp * ts2 * f.c * (1.0 - f.c) + g.kd * f.ts * (1.0 - 2.0 * f.c) - 2.0) / den,
        k0: (g.kp * ts2 * (f.c - 1.0).powi(2) + g.kd * f.ts * (f.c - 1.0) + 1.0) / den,
    })
}

/// Semi-linear inverse, order 2: the matrix product
///
/// ```text
/// [Kp/alpha]   [ 1              1             1        ] [K2]
/// [Kd/alpha] = [ 2Ts(1-C)       Ts(1-2C)     -2TsC     ] [K1]
/// [ 1/alpha]   [ Ts^2 (C-1)^2   Ts^2 (C^2-C)  Ts^2 C^2 ] [K0]
/// ```
///
/// then `alpha = 1/(third entry)`.
pub fn pid_to_ipd2_semilinear(pid: &PidGains, f: &FilterConfig) -> Result<IpdGains> {
    let ts = f.ts;
    let c = f.c;
    let ts2 = ts * ts;
    let kp_over = pid.k2 + pid.k1 + pid.k0;
    let kd_over =
        2.0 * ts * (1.0 - c) * pid.k2 + ts * (1.0 - 2.0 * c) * pid.k1 - 2.0 * ts * c * pid.k0;
    let inv_alpha = ts2 * ((c - 1.0).powi(2) * pid.k2 + (c * c - c) * pid.k1 + c * c * pid.k0);
    let row_norm = ts2
        * (((c - 1.0).powi(4) + (c * c - c).powi(2) + c.powi(4)).sqrt())
        * (pid.k2.powi(2) + pid.k1.powi(2) + pid.k0.powi(2))
            .sqrt()
            .max(1.0);
    if inv_alpha.abs() <= SINGULAR_REL_TOL * row_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::TransformSingular);
    }
    let alpha = 1.0 / inv_alpha;
    Ok(IpdGains {
        kp: kp_over * alpha,
        kd: kd_over * alpha,
        alpha,
        order: UltraLocalOrder::Second,
    })
}

/// Non-linear inverse, order 2: solve
///
/// ```text
/// [ Ts^2 C^2       Ts C       -Ts^2 K2 ] [Kp   ]   [-1]
/// [ 2 Ts^2 C(1-C)  Ts(1-2C)   -Ts^2 K1 ] [Kd   ] = [ 2]
/// [ Ts^2 (C-1)^2   Ts(C-1)    -Ts^2 K0 ] [alpha]   [-1]
/// ```
pub fn pid_to_ipd2_nonlinear(pid: &PidGains, f: &FilterConfig) -> Result<IpdGains> {
    let ts = f.ts;
    let c = f.c;
    let ts2 = ts * ts;
    let m = [
        [ts2 * c * c, ts * c, -ts2 * pid.k2],
        [
            2.0 * ts2 * c * (1.0 - c),
            ts * (1.0 - 2.0 * c),
            -ts2 * pid.k1,
        ],
        [ts2 * (c - 1.0).powi(2), ts * (c - 1.0), -ts2 * pid.k0],
    ];
    let rhs = [-1.0, 2.0, -1.0];
    let x = solve3(m, rhs)?;
    if x[2] == 0.0 {
        return Err(Error::TransformSingular);
    }
    Ok(IpdGains {
        kp: x[0],
        kd: x[1],
        alpha: x[2],
        order: UltraLocalOrder::Second,
    })
}

/// Solve a 3x3 system by Gaussian elimination with partial pivoting; errors
/// when the determinant is negligible against the row norms.
fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Result<[f64; 3]> {
    let row_norm_product: f64 = m
        .iter()
        .map(|r| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt())
        .product();
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() <= SINGULAR_REL_TOL * row_norm_product.max(f64::MIN_POSITIVE) {
        return Err(Error::TransformSingular);
    }
    let mut a = [[0.0f64; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = rhs[i];
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        for row in (col + 1)..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = a[row][3];
        for k in (row + 1)..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Exact controller transfer function for any gains record.
///
/// PI and PID use the bare Two/Three Term rational forms; iPD forms include
/// the filter denominator powers:
///
/// ```text
/// C_iPD1 = C_PI(z)  *  z   / (C z + 1 - C)
/// C_iPD2 = C_PID(z) *  z^2 / (C z + 1 - C)^2
/// ```
pub fn controller_tf(gains: &ControllerGains, f: &FilterConfig) -> Result<DiscreteTF> {
    let stage = Poly::new(vec![1.0 - f.c, f.c]);
    let z = Poly::monomial(1.0, 1);
    let z_minus_1 = Poly::new(vec![-1.0, 1.0]);
    match gains {
        ControllerGains::Pi(pi) => {
            let num = Poly::new(vec![-pi.k2, 1.0]).scale(pi.k1);
            DiscreteTF::new(num, z_minus_1, f.ts)
        }
        ControllerGains::Pid(pid) => {
            let num = Poly::new(vec![pid.k0, pid.k1, pid.k2]);
            let den = z.mul(&z_minus_1);
            DiscreteTF::new(num, den, f.ts)
        }
        ControllerGains::Ipd(g) => {
            if g.alpha == 0.0 {
                return Err(Error::AlphaZero);
            }
            match g.order {
                UltraLocalOrder::First => {
                    let pi = ipd1_to_pi(g, f)?;
                    let num = Poly::new(vec![-pi.k2, 1.0]).scale(pi.k1).mul(&z);
                    let den = z_minus_1.mul(&stage);
                    DiscreteTF::new(num, den, f.ts)
                }
                UltraLocalOrder::Second => {
                    let pid = ipd2_to_pid(g, f)?;
                    let num = Poly::new(vec![pid.k0, pid.k1, pid.k2]).mul(&z).mul(&z);
                    let den = z.mul(&z_minus_1).mul(&stage).mul(&stage);
                    DiscreteTF::new(num, den, f.ts)
                }
            }
        }
    }
}

/// Which order-2 inverse to apply when mapping a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InverseMethod {
    Semilinear,
    Nonlinear,
}

/// A stabilizing-set sample mapped into iPD space, keeping its source
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappedPoint {
    pub k3: f64,
    pub k1: f64,
    pub k2: f64,
    pub ipd: IpdGains,
}

/// Result of mapping a PID stabilizing set into iPD space.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedSet {
    pub points: Vec<MappedPoint>,
    /// Samples whose inverse transform was singular, logged and skipped.
    pub singular_skipped: usize,
}

/// Sample each region of a PID stabilizing set on an interior lattice whose
/// density matches a `grid x grid` bounding-box grid, and map every sample
/// into iPD space. Singular points are skipped and counted.
pub fn map_set(
    set: &StabilizingSet,
    f: &FilterConfig,
    grid: usize,
    method: InverseMethod,
) -> Result<MappedSet> {
    if set.kind != ControllerKind::Pid {
        return Err(Error::KindMismatch(
            "map_set expects a PID stabilizing set".into(),
        ));
    }
    if grid < 1 {
        return Err(Error::domain("map_set grid must be >= 1"));
    }
    let mut points = Vec::new();
    let mut singular = 0usize;
    for slice in &set.slices {
        for region in &slice.regions {
            for p in region.sample_lattice(grid) {
                let pid = PidGains::from_gate_point(slice.gate, p[0], p[1]);
                let inverse = match method {
                    InverseMethod::Semilinear => pid_to_ipd2_semilinear(&pid, f),
                    InverseMethod::Nonlinear => pid_to_ipd2_nonlinear(&pid, f),
                };
                match inverse {
                    Ok(ipd) => points.push(MappedPoint {
                        k3: slice.gate,
                        k1: p[0],
                        k2: p[1],
                        ipd,
                    }),
                    Err(Error::TransformSingular) => singular += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(MappedSet {
        points,
        singular_skipped: singular,
    })
}
