//! Complete stabilizing sets of discrete-time Two Term (PI) and Three Term
//! (PID) controllers via the Tchebychev signature procedure.
//!
//! For a plant `G(z) = N(z)/D(z)` the closed-loop characteristic polynomials
//! are
//!
//! ```text
//! delta_PI  = (z-1) D(z) + K1 (z - K2) N(z)
//! delta_PID = z (z-1) D(z) + (K2 z^2 + K1 z + K0) N(z)
//! ```
//!
//! The procedure fixes one gate parameter per slice (`K1` for PI, `K3 = K2 -
//! K0` for PID), counts the real odd-multiplicity zeros of the imaginary part
//! `T(u; gate)`, enumerates the admissible sign strings for the required
//! signature, and intersects the resulting strict linear inequalities on the
//! remaining gains. The union over admissible strings is exactly the stable
//! region at that gate; sweeping the gate discretizes the full set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plant::DiscreteTF;
use crate::poly::{count_in_unit_disc, odd_zeros_in_open_interval, tcheby_form, Poly};
use crate::{Error, Result};

/// Circle-classification tolerance shared by the signature computations.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;
/// Regions with area (or interval length) below this are numerically empty.
const MIN_REGION_MEASURE: f64 = 1e-12;
/// Endpoint inequalities are treated as violated within this of zero.
const ENDPOINT_TOL: f64 = 1e-10;

/// Which controller template the set is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Pi,
    Pid,
}

/// The three products of the numerator/denominator Tchebychev forms:
/// `P1 = R_D R_N + (1-u^2) T_D T_N`, `P2 = R_N T_D - R_D T_N`,
/// `P3 = R_N^2 + (1-u^2) T_N^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PTriple {
    pub p1: Poly,
    pub p2: Poly,
    pub p3: Poly,
}

/// Compute the `P` triple from the plant numerator and denominator.
pub fn p_triple(num: &Poly, den: &Poly) -> Result<PTriple> {
    if num.is_zero() || den.is_zero() {
        return Err(Error::domain("p_triple requires nonzero N and D"));
    }
    let fnum = tcheby_form(num)?;
    let fden = tcheby_form(den)?;
    let one_minus_u2 = Poly::new(vec![1.0, 0.0, -1.0]);
    let p1 = fden
        .r
        .mul(&fnum.r)
        .add(&one_minus_u2.mul(&fden.t).mul(&fnum.t));
    let p2 = fnum.r.mul(&fden.t).sub(&fden.r.mul(&fnum.t));
    let p3 = fnum
        .r
        .mul(&fnum.r)
        .add(&one_minus_u2.mul(&fnum.t).mul(&fnum.t));
    Ok(PTriple { p1, p2, p3 })
}

/// Parametric real/imaginary forms of `nu(z)` on the unit circle.
///
/// `T(u; gate) = gate * P3 + P1 - (u+1) P2` for both kinds. `R` is affine in
/// the free gains once the gate is fixed:
///
/// - PI:  `R = -(u+1)P1 - (1-u^2)P2 - K1 u P3 - K2 * (K1 P3)`, gate = K1
/// - PID: `R = -(u+1)P1 - (1-u^2)P2 + K3 u P3 + K1 P3 - K2 * (2 u P3)`, gate = K3
#[derive(Debug, Clone)]
pub struct RtForms {
    kind: ControllerKind,
    /// `P1 - (u+1) P2`, the gate-independent part of `T`.
    t_base: Poly,
    /// `-(u+1)P1 - (1-u^2)P2`, the gain-independent part of `R`.
    r_base: Poly,
    p3: Poly,
    u_p3: Poly,
}

/// Affine coefficients of `R(t)` in the free gains at one evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct RAffine {
    /// Constant term.
    pub c0: f64,
    /// Coefficient of K2 (PI) or K1 (PID).
    pub c1: f64,
    /// Coefficient of K2 (PID only; 0 for PI).
    pub c2: f64,
}

impl RtForms {
    pub fn new(kind: ControllerKind, p: &PTriple) -> Self {
        let u_plus_1 = Poly::new(vec![1.0, 1.0]);
        let one_minus_u2 = Poly::new(vec![1.0, 0.0, -1.0]);
        let u = Poly::new(vec![0.0, 1.0]);
        RtForms {
            kind,
            t_base: p.p1.sub(&u_plus_1.mul(&p.p2)),
            r_base: u_plus_1
                .mul(&p.p1)
                .scale(-1.0)
                .sub(&one_minus_u2.mul(&p.p2)),
            p3: p.p3.clone(),
            u_p3: u.mul(&p.p3),
        }
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    /// `T(u; gate)` as a polynomial in `u`.
    pub fn t_at(&self, gate: f64) -> Poly {
        self.p3.scale(gate).add(&self.t_base)
    }

    /// Affine coefficients of `R` at evaluation point `u` for a fixed gate.
    pub fn r_affine(&self, gate: f64, u: f64) -> RAffine {
        let base = self.r_base.eval(u);
        let p3 = self.p3.eval(u);
        let up3 = self.u_p3.eval(u);
        match self.kind {
            ControllerKind::Pi => RAffine {
                c0: base - gate * up3,
                c1: -gate * p3,
                c2: 0.0,
            },
            ControllerKind::Pid => RAffine {
                c0: base + gate * up3,
                c1: p3,
                c2: -2.0 * up3,
            },
        }
    }
}

/// Signature bookkeeping for the root-counting requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureInfo {
    /// Required net phase change of `nu(z)` in units of pi.
    pub sigma: i64,
    /// Required root count of the characteristic polynomial (its degree).
    pub i_delta: usize,
    /// Roots of the reversed numerator inside the unit circle.
    pub i_nr: usize,
    /// Numerator degree.
    pub l1: usize,
}

/// Compute the signature `sigma = i_delta + i_Nr - l1` (PI) or
/// `i_delta + i_Nr - l1 - 1` (PID), with `i_delta = deg D + 1` (PI) or
/// `deg D + 2` (PID) and `i_Nr` the unit-disc root count of the
/// coefficient-reversed numerator.
pub fn signature(num: &Poly, den: &Poly, kind: ControllerKind) -> Result<SignatureInfo> {
    if num.is_zero() || den.is_zero() {
        return Err(Error::domain("signature requires nonzero N and D"));
    }
    let l1 = num.degree().unwrap();
    let n1 = den.degree().unwrap();
    // Guard: the procedure is inapplicable when N has unit-circle roots.
    if l1 >= 1 {
        count_in_unit_disc(num, UNIT_CIRCLE_TOL)?;
    }
    let i_nr = if l1 == 0 {
        0
    } else {
        let nr = num.reversed();
        if nr.degree().map_or(true, |d| d == 0) {
            0
        } else {
            count_in_unit_disc(&nr, UNIT_CIRCLE_TOL)?
        }
    };
    let (i_delta, extra) = match kind {
        ControllerKind::Pi => (n1 + 1, 0i64),
        ControllerKind::Pid => (n1 + 2, 1),
    };
    Ok(SignatureInfo {
        sigma: i_delta as i64 + i_nr as i64 - l1 as i64 - extra,
        i_delta,
        i_nr,
        l1,
    })
}

/// A sign string `(i_0, ..., i_{k+1})` over the evaluation points
/// `-1 < t_1 < ... < t_k < +1` bracketed by the interval endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignString(pub Vec<i8>);

/// Enumerate all strings in `{-1,+1}^{k+2}` satisfying
/// `sigma = (sgn[T^(p)](-1)]/2) (i_0 + 2 sum_j (-1)^j i_j + (-1)^{k+1} i_{k+1})`.
///
/// Exhaustive enumeration in exact integer arithmetic; `k` is capped at 20.
pub fn admissible_strings(k: usize, sigma: i64, sign_t_at_minus1: i8) -> Result<Vec<SignString>> {
    if k > 20 {
        return Err(Error::ResourceLimit(format!(
            "string enumeration over {} zeros exceeds the cap",
            k
        )));
    }
    debug_assert!(sign_t_at_minus1 == 1 || sign_t_at_minus1 == -1);
    let len = k + 2;
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << len) {
        let bits: Vec<i8> = (0..len)
            .map(|j| if mask & (1 << j) != 0 { 1 } else { -1 })
            .collect();
        let mut acc: i64 = bits[0] as i64;
        for (j, &b) in bits.iter().enumerate().take(k + 1).skip(1) {
            let s = if j % 2 == 0 { 2 } else { -2 };
            acc += s * b as i64;
        }
        let last_sign = if (k + 1) % 2 == 0 { 1 } else { -1 };
        acc += last_sign * bits[k + 1] as i64;
        if sign_t_at_minus1 as i64 * acc == 2 * sigma {
            out.push(SignString(bits));
        }
    }
    Ok(out)
}

/// A feasible region in the free gains: an interval in `K2` for PI, or a
/// convex CCW polygon in the `(K1, K2)` plane for PID.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Region {
    Interval { lo: f64, hi: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Region {
    /// Membership test; polygons use the even-odd rule on the boundary-closed
    /// polygon, intervals are closed.
    pub fn contains(&self, point: [f64; 2]) -> bool {
        match self {
            Region::Interval { lo, hi } => point[0] >= *lo && point[0] <= *hi,
            Region::Polygon { vertices } => point_in_polygon(point, vertices),
        }
    }

    /// Membership with a positive clearance from the boundary.
    pub fn contains_strictly(&self, point: [f64; 2], margin: f64) -> bool {
        match self {
            Region::Interval { lo, hi } => point[0] >= lo + margin && point[0] <= hi - margin,
            Region::Polygon { vertices } => {
                if !point_in_polygon(point, vertices) {
                    return false;
                }
                let n = vertices.len();
                (0..n)
                    .all(|i| segment_distance(point, vertices[i], vertices[(i + 1) % n]) >= margin)
            }
        }
    }

    /// Euclidean distance from a point to the region (0 inside).
    ///
    /// Interval regions measure along the `K2` axis only.
    pub fn distance(&self, point: [f64; 2]) -> f64 {
        match self {
            Region::Interval { lo, hi } => {
                if point[0] < *lo {
                    lo - point[0]
                } else if point[0] > *hi {
                    point[0] - hi
                } else {
                    0.0
                }
            }
            Region::Polygon { vertices } => {
                if point_in_polygon(point, vertices) {
                    return 0.0;
                }
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let d = segment_distance(point, vertices[i], vertices[(i + 1) % n]);
                    best = best.min(d);
                }
                best
            }
        }
    }

    /// Interval length or polygon area.
    pub fn measure(&self) -> f64 {
        match self {
            Region::Interval { lo, hi } => hi - lo,
            Region::Polygon { vertices } => polygon_area(vertices),
        }
    }

    /// Deterministic interior sample set.
    ///
    /// Two families are combined: a uniform interior lattice whose count
    /// matches what a `grid x grid` bounding-box lattice clipped to the
    /// region would yield on average (`grid^2 * area / bbox_area`, floor 1),
    /// placed through a centroid fan so thin sliver regions still produce
    /// interior samples; and near-boundary points (vertices and vertex-pair
    /// interpolants pulled slightly toward the centroid) that cover the
    /// faces, where tightly constrained designs concentrate. A plain clipped
    /// bounding-box grid returns nothing for regions that run
    /// corner-to-corner through their own bounding box.
    pub fn sample_lattice(&self, grid: usize) -> Vec<[f64; 2]> {
        match self {
            Region::Interval { lo, hi } => (0..grid.max(1))
                .map(|i| [lo + (hi - lo) * (i as f64 + 0.5) / grid.max(1) as f64, 0.0])
                .collect(),
            Region::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Vec::new();
                }
                let area = polygon_area(vertices).abs();
                let (lo, hi) = self.bounding_box();
                let bbox_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
                let diag = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
                let margin = 1e-9 * diag.max(1e-300);
                if area <= 0.0 || bbox_area <= 0.0 {
                    return Vec::new();
                }
                let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n as f64;
                let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n as f64;
                let mut out = Vec::new();
                // Near-boundary family: vertices and pairwise interpolants,
                // pulled inward (the regions are convex, so any convex
                // combination moved toward the centroid stays interior).
                let lam = 1e-4;
                let mut near_boundary = Vec::new();
                for v in vertices {
                    near_boundary.push(*v);
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        for t in [0.25, 0.5, 0.75] {
                            near_boundary.push([
                                t * vertices[i][0] + (1.0 - t) * vertices[j][0],
                                t * vertices[i][1] + (1.0 - t) * vertices[j][1],
                            ]);
                        }
                    }
                }
                for p in near_boundary {
                    let pulled = [(1.0 - lam) * p[0] + lam * cx, (1.0 - lam) * p[1] + lam * cy];
                    if self.contains_strictly(pulled, margin) {
                        out.push(pulled);
                    }
                }
                // Uniform interior lattice via the centroid fan.
                let target = ((grid * grid) as f64 * area / bbox_area).round().max(1.0) as usize;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let tri_area =
                        0.5 * ((a[0] - cx) * (b[1] - cy) - (b[0] - cx) * (a[1] - cy)).abs();
                    let nt = ((target as f64 * tri_area / area).round() as usize).max(1);
                    let gt = (nt as f64).sqrt().ceil() as usize;
                    for ii in 0..gt {
                        for jj in 0..gt {
                            // Area-preserving square-to-triangle map; cell
                            // centers stay strictly inside the triangle.
                            let u = (ii as f64 + 0.5) / gt as f64;
                            let v = (jj as f64 + 0.5) / gt as f64;
                            let su = u.sqrt();
                            let x = 1.0 - su;
                            let y = v * su;
                            let p = [
                                cx + x * (a[0] - cx) + y * (b[0] - cx),
                                cy + x * (a[1] - cy) + y * (b[1] - cy),
                            ];
                            if self.contains_strictly(p, margin) {
                                out.push(p);
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Axis-aligned bounding box `[min, max]` per coordinate.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Region::Interval { lo, hi } => ([*lo, 0.0], [*hi, 0.0]),
            Region::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for d in 0..2 {
                        lo[d] = lo[d].min(v[d]);
                        hi[d] = hi[d].max(v[d]);
                    }
                }
                (lo, hi)
            }
        }
    }
}

/// One gate slice of the stabilizing set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabRegionSlice {
    /// Gate value: `K1` for PI, `K3` for PID.
    pub gate: f64,
    pub regions: Vec<Region>,
}

/// Gate sweep and free-gain box configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub gate_lo: f64,
    pub gate_hi: f64,
    pub gate_steps: usize,
    /// Lower bound of the free-gain clipping box (both axes for PID).
    pub param_lo: f64,
    /// Upper bound of the free-gain clipping box.
    pub param_hi: f64,
}

impl SweepConfig {
    /// Uniform sweep with the default free-gain box of +-50.
    pub fn new(gate_lo: f64, gate_hi: f64, gate_steps: usize) -> Self {
        SweepConfig {
            gate_lo,
            gate_hi,
            gate_steps,
            param_lo: -50.0,
            param_hi: 50.0,
        }
    }

    pub fn with_param_box(mut self, lo: f64, hi: f64) -> Self {
        self.param_lo = lo;
        self.param_hi = hi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.gate_steps < 2 {
            return Err(Error::domain("sweep requires at least 2 steps"));
        }
        if !(self.gate_lo < self.gate_hi) {
            return Err(Error::domain("sweep requires gate_lo < gate_hi"));
        }
        if !(self.param_lo < self.param_hi) {
            return Err(Error::domain("sweep requires param_lo < param_hi"));
        }
        Ok(())
    }

    pub fn gates(&self) -> Vec<f64> {
        let n = self.gate_steps;
        (0..n)
            .map(|i| self.gate_lo + (self.gate_hi - self.gate_lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn gate_spacing(&self) -> f64 {
        (self.gate_hi - self.gate_lo) / (self.gate_steps - 1) as f64
    }
}

/// The complete stabilizing set at the sweep resolution: slices sorted by
/// strictly increasing gate, empty slices omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizingSet {
    pub kind: ControllerKind,
    pub ts: f64,
    pub sweep: SweepConfig,
    pub signature: SignatureInfo,
    pub slices: Vec<StabRegionSlice>,
}

impl StabilizingSet {
    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// The slice whose gate is nearest to `gate`.
    pub fn nearest_slice(&self, gate: f64) -> Option<&StabRegionSlice> {
        self.slices.iter().min_by(|a, b| {
            (a.gate - gate)
                .abs()
                .partial_cmp(&(b.gate - gate).abs())
                .unwrap()
        })
    }
}

/// Zeros of `T(u; gate)` retained by the sweep (step 4): gates whose `T` has
/// at least `sigma - 1` real distinct odd-multiplicity zeros in `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateZeros {
    pub gate: f64,
    pub zeros: Vec<f64>,
}

/// Sweep the gate and keep values with enough odd zeros. An empty result is
/// not an error: it signals that no stabilizing set exists on this range.
pub fn gate_sweep(forms: &RtForms, sigma: i64, sweep: &SweepConfig) -> Result<Vec<GateZeros>> {
    sweep.validate()?;
    let need = (sigma - 1).max(0) as usize;
    let mut out = Vec::new();
    for gate in sweep.gates() {
        let t = forms.t_at(gate);
        if t.is_zero() || t.degree() == Some(0) {
            continue;
        }
        let zeros = odd_zeros_in_open_interval(&t, -1.0, 1.0)?;
        if zeros.len() >= need {
            out.push(GateZeros { gate, zeros });
        }
    }
    Ok(out)
}

/// Build the feasible region of one admissible string (step 9): intersect
/// the strict inequalities `R(t_j) * i_j > 0` at `t_0 = -1`, the zeros, and
/// `t_{k+1} = +1`. Returns `None` when the intersection is empty.
pub fn region_for_string(
    string: &SignString,
    zeros: &[f64],
    forms: &RtForms,
    gate: f64,
    sweep: &SweepConfig,
) -> Option<Region> {
    let mut points = Vec::with_capacity(zeros.len() + 2);
    points.push(-1.0);
    points.extend_from_slice(zeros);
    points.push(1.0);
    debug_assert_eq!(string.0.len(), points.len());

    match forms.kind {
        ControllerKind::Pi => {
            let mut lo = sweep.param_lo;
            let mut hi = sweep.param_hi;
            for (&sign, &t) in string.0.iter().zip(&points) {
                let a = forms.r_affine(gate, t);
                let c0 = sign as f64 * a.c0;
                let c1 = sign as f64 * a.c1;
                // Constraint: c0 + c1 * K2 > 0.
                if c1.abs() <= ENDPOINT_TOL * (1.0 + a.c0.abs()) {
                    if c0 <= ENDPOINT_TOL * (1.0 + a.c0.abs()) {
                        return None;
                    }
                    continue;
                }
                let bound = -c0 / c1;
                if c1 > 0.0 {
                    lo = lo.max(bound);
                } else {
                    hi = hi.min(bound);
                }
            }
            (hi - lo > MIN_REGION_MEASURE).then_some(Region::Interval { lo, hi })
        }
        ControllerKind::Pid => {
            let mut poly = vec![
                [sweep.param_lo, sweep.param_lo],
                [sweep.param_hi, sweep.param_lo],
                [sweep.param_hi, sweep.param_hi],
                [sweep.param_lo, sweep.param_hi],
            ];
            for (&sign, &t) in string.0.iter().zip(&points) {
                let a = forms.r_affine(gate, t);
                let s = sign as f64;
                poly = clip_halfplane(&poly, s * a.c1, s * a.c2, s * a.c0);
                if poly.len() < 3 {
                    return None;
                }
            }
            (polygon_area(&poly) > MIN_REGION_MEASURE).then_some(Region::Polygon { vertices: poly })
        }
    }
}

/// Compute the slice at a single gate value, or `None` when no admissible
/// region exists there.
pub fn slice_at_gate(
    forms: &RtForms,
    sigma: i64,
    gate: f64,
    sweep: &SweepConfig,
) -> Result<Option<StabRegionSlice>> {
    let t = forms.t_at(gate);
    if t.is_zero() || t.degree() == Some(0) {
        return Ok(None);
    }
    let zeros = odd_zeros_in_open_interval(&t, -1.0, 1.0)?;
    if (zeros.len() as i64) < sigma - 1 {
        return Ok(None);
    }
    // Sign of the first nonvanishing derivative of T at u = -1. The
    // tolerance must sit near the rounding floor: an interior zero of T
    // close to the endpoint makes |T(-1)| legitimately tiny, and mistaking
    // that for a zero at -1 admits the wrong sign strings.
    let (_, v) = t.multiplicity_at(-1.0, 1e-12);
    if v == 0.0 {
        return Ok(None);
    }
    let sign = if v > 0.0 { 1i8 } else { -1 };
    let strings = admissible_strings(zeros.len(), sigma, sign)?;
    let regions: Vec<Region> = strings
        .iter()
        .filter_map(|s| region_for_string(s, &zeros, forms, gate, sweep))
        .collect();
    Ok((!regions.is_empty()).then_some(StabRegionSlice { gate, regions }))
}

/// Orchestrate the full procedure for a plant transfer function over a gate
/// sweep. The plant must already carry any derivative-filter augmentation.
///
/// Gate slices are independent and evaluated in parallel; results merge in
/// ascending gate order, so the output is deterministic for a fixed sweep.
pub fn stabilizing_set(
    g: &DiscreteTF,
    kind: ControllerKind,
    sweep: &SweepConfig,
) -> Result<StabilizingSet> {
    sweep.validate()?;
    let info = signature(g.num(), g.den(), kind)?;
    let p = p_triple(g.num(), g.den())?;
    let forms = RtForms::new(kind, &p);
    let slices: Result<Vec<Option<StabRegionSlice>>> = sweep
        .gates()
        .par_iter()
        .map(|&gate| slice_at_gate(&forms, info.sigma, gate, sweep))
        .collect();
    let slices: Vec<StabRegionSlice> = slices?.into_iter().flatten().collect();
    Ok(StabilizingSet {
        kind,
        ts: g.ts(),
        sweep: *sweep,
        signature: info,
        slices,
    })
}

// ---- convex geometry helpers ----------------------------------------------

/// Clip a CCW polygon by the half-plane `a*x + b*y + c >= 0`
/// (Sutherland-Hodgman, one edge).
pub fn clip_halfplane(poly: &[[f64; 2]], a: f64, b: f64, c: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    if n == 0 {
        return Vec::new();
    }
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(n + 2);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let vp = a * p[0] + b * p[1] + c;
        let vq = a * q[0] + b * q[1] + c;
        if vp >= 0.0 {
            push_dedup(&mut out, p);
        }
        if (vp > 0.0) != (vq > 0.0) && vp != vq {
            let t = vp / (vp - vq);
            push_dedup(
                &mut out,
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])],
            );
        }
    }
    if out.len() > 1 {
        let first = out[0];
        let last = *out.last().unwrap();
        if (first[0] - last[0]).abs() + (first[1] - last[1]).abs() < 1e-12 {
            out.pop();
        }
    }
    out
}

fn push_dedup(out: &mut Vec<[f64; 2]>, p: [f64; 2]) {
    if let Some(last) = out.last() {
        if (p[0] - last[0]).abs() + (p[1] - last[1]).abs() < 1e-12 {
            return;
        }
    }
    out.push(p);
}

/// Signed area of a CCW polygon (positive when CCW).
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    s / 2.0
}

/// Even-odd point-in-polygon test (boundary points may land either way).
pub fn point_in_polygon(pt: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        if (p[1] > pt[1]) != (q[1] > pt[1]) {
            let xi = p[0] + (pt[1] - p[1]) / (q[1] - p[1]) * (q[0] - p[0]);
            if pt[0] < xi {
                inside = !inside;
            }
        }
    }
    inside
}

fn segment_distance(pt: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((pt[0] - a[0]) * dx + (pt[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let px = a[0] + t * dx;
    let py = a[1] + t * dy;
    ((pt[0] - px).powi(2) + (pt[1] - py).powi(2)).sqrt()
}
