//! Real-coefficient polynomial arithmetic, complex evaluation, root location,
//! and the Tchebychev (unit-circle) decomposition used by the stabilizing-set
//! procedure.
//!
//! Coefficients are stored in ascending powers: index `k` holds the
//! coefficient of `z^k` (or `u^k`). The zero polynomial is the empty sequence
//! with degree `None`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Real polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Build from ascending coefficients, trimming trailing (highest-power) zeros.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    /// The constant polynomial `c`.
    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// Monomial `c * x^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Ascending coefficients (trailing zeros trimmed).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Leading (highest-power) coefficient; 0 for the zero polynomial.
    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Largest coefficient magnitude; 0 for the zero polynomial.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation at a real point.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Horner evaluation at a complex point.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(k) + other.coeff(k);
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i + 1) as f64)
                .collect::<Vec<_>>(),
        )
    }

    /// Coefficient reversal: `p_r(z) = z^deg * p(1/z)`.
    pub fn reversed(&self) -> Poly {
        let mut c = self.coeffs.clone();
        c.reverse();
        Poly::new(c)
    }

    /// Zero out coefficients below `rel_tol * max|coeff|` and re-trim.
    pub fn cleanup(&self, rel_tol: f64) -> Poly {
        let cut = rel_tol * self.max_coeff();
        Poly::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() < cut { 0.0 } else { c })
                .collect::<Vec<_>>(),
        )
    }

    /// Multiplicity of `x` as a zero, by successive derivative evaluation.
    ///
    /// A derivative value is treated as zero when its magnitude is below
    /// `tol * max|coeff|`. Returns `(multiplicity, first nonvanishing value)`;
    /// the value is 0.0 if every derivative vanishes (identically zero case).
    pub fn multiplicity_at(&self, x: f64, tol: f64) -> (usize, f64) {
        let scale = self.max_coeff().max(1.0);
        let mut q = self.clone();
        let mut mult = 0;
        while !q.is_zero() {
            let v = q.eval(x);
            if v.abs() > tol * scale {
                return (mult, v);
            }
            q = q.derivative();
            mult += 1;
        }
        (mult, 0.0)
    }
}

/// Tchebychev representation of a polynomial on the unit circle:
/// `p(e^{j\theta}) = R(u) + j sqrt(1-u^2) T(u)` with `u = -cos(theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TchebyForm {
    pub r: Poly,
    pub t: Poly,
}

/// Generalized Tchebychev polynomial pair `(c_k, s_k)` with `c_1 = -u`,
/// `s_1 = 1` and the recurrence
/// `c_{k+1} = -u c_k - (1-u^2) s_k`, `s_{k+1} = -u s_k + c_k`.
///
/// Coefficients are exact integers (exact in f64 for the degrees used here).
pub fn cheb_pair(k: usize) -> Result<(Poly, Poly)> {
    if k == 0 {
        return Err(Error::domain("cheb_pair requires k >= 1"));
    }
    let mut c = Poly::new(vec![0.0, -1.0]);
    let mut s = Poly::constant(1.0);
    let minus_u = Poly::new(vec![0.0, -1.0]);
    let one_minus_u2 = Poly::new(vec![1.0, 0.0, -1.0]);
    for _ in 1..k {
        let cn = minus_u.mul(&c).sub(&one_minus_u2.mul(&s));
        let sn = minus_u.mul(&s).add(&c);
        c = cn;
        s = sn;
    }
    Ok((c, s))
}

/// Tchebychev decomposition: `R(u) = sum_k p_k c_k(u) + p_0`,
/// `T(u) = sum_k p_k s_k(u)`.
pub fn tcheby_form(p: &Poly) -> Result<TchebyForm> {
    if p.is_zero() {
        return Err(Error::domain("tcheby_form requires a nonzero polynomial"));
    }
    let deg = p.degree().unwrap();
    let mut r = Poly::constant(p.coeff(0));
    let mut t = Poly::zero();
    if deg >= 1 {
        // Run the recurrence once up to deg instead of calling cheb_pair per k.
        let mut c = Poly::new(vec![0.0, -1.0]);
        let mut s = Poly::constant(1.0);
        let minus_u = Poly::new(vec![0.0, -1.0]);
        let one_minus_u2 = Poly::new(vec![1.0, 0.0, -1.0]);
        for k in 1..=deg {
            r = r.add(&c.scale(p.coeff(k)));
            t = t.add(&s.scale(p.coeff(k)));
            if k < deg {
                let cn = minus_u.mul(&c).sub(&one_minus_u2.mul(&s));
                let sn = minus_u.mul(&s).add(&c);
                c = cn;
                s = sn;
            }
        }
    }
    Ok(TchebyForm { r, t })
}

/// All complex roots of `p` via the companion matrix and a shifted QR
/// iteration. Requires degree >= 1.
pub fn roots(p: &Poly) -> Result<Vec<Complex64>> {
    let p = p.clone();
    match p.degree() {
        None | Some(0) => {
            return Err(Error::domain("roots requires degree >= 1"));
        }
        _ => {}
    }
    let mut out = Vec::with_capacity(p.degree().unwrap());
    // Strip exact zero roots (zero constant coefficients).
    let mut coeffs = p.coeffs().to_vec();
    let mut nz = 0;
    while coeffs.first() == Some(&0.0) && coeffs.len() > 1 {
        coeffs.remove(0);
        nz += 1;
    }
    for _ in 0..nz {
        out.push(Complex64::new(0.0, 0.0));
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(out);
    }
    // Monic normalization.
    let lead = coeffs[n];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    match n {
        1 => out.push(Complex64::new(-monic[0], 0.0)),
        2 => out.extend(quadratic_roots(monic[1], monic[0])),
        _ => {
            let mut h = companion(&monic);
            balance(&mut h);
            out.extend(hqr_eigenvalues(&mut h)?);
        }
    }
    Ok(out)
}

/// Count roots strictly inside the unit disc.
///
/// Errors with `MarginalRoot` when any root lies within `tol` of the unit
/// circle, because the design procedure assumes no unit-circle roots.
pub fn count_in_unit_disc(p: &Poly, tol: f64) -> Result<usize> {
    let rs = roots(p)?;
    let mut count = 0;
    for r in rs {
        let m = r.norm();
        if (m - 1.0).abs() < tol {
            return Err(Error::MarginalRoot);
        }
        if m < 1.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// Real zeros of odd multiplicity in the open interval `(lo, hi)`, strictly
/// increasing. Even-multiplicity zeros are excluded.
///
/// Candidates come from the companion-matrix roots; nearby candidates are
/// merged (tolerance 1e-9) and parity is decided by a sign change of `p`
/// across the cluster, with bisection refinement to 1e-12.
pub fn odd_zeros_in_open_interval(p: &Poly, lo: f64, hi: f64) -> Result<Vec<f64>> {
    const MERGE: f64 = 1e-9;
    const REFINE: f64 = 1e-12;
    if lo >= hi {
        return Err(Error::domain("odd_zeros requires lo < hi"));
    }
    if p.degree().map_or(true, |d| d == 0) {
        return Ok(Vec::new());
    }
    let rs = roots(p)?;
    let scale = p.max_coeff().max(1.0);
    let mut cand: Vec<f64> = rs
        .iter()
        .filter(|r| r.im.abs() < 1e-7 * r.norm().max(1.0))
        .map(|r| r.re)
        .filter(|&x| x > lo + MERGE && x < hi - MERGE)
        .collect();
    cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Cluster nearby candidates.
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for x in cand {
        match clusters.last_mut() {
            Some(c) if x - *c.last().unwrap() < MERGE => c.push(x),
            _ => clusters.push(vec![x]),
        }
    }
    let reps: Vec<f64> = clusters
        .iter()
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    // Parity by sign change across each cluster, sampled at midpoints to the
    // neighbouring clusters (or the interval endpoints).
    let mut bounds = Vec::with_capacity(reps.len() + 2);
    bounds.push(lo);
    bounds.extend(&reps);
    bounds.push(hi);
    let mut out = Vec::new();
    for (i, &rep) in reps.iter().enumerate() {
        let a = 0.5 * (bounds[i] + rep);
        let b = 0.5 * (rep + bounds[i + 2]);
        let fa = p.eval(a);
        let fb = p.eval(b);
        if fa == 0.0 || fb == 0.0 {
            // Midpoint landed on another zero; treat as no sign information.
            continue;
        }
        if fa.signum() != fb.signum() {
            out.push(bisect(p, a, b, fa, REFINE));
        } else if fa.abs() < f64::EPSILON * scale && fb.abs() < f64::EPSILON * scale {
            continue;
        }
    }
    Ok(out)
}

fn bisect(p: &Poly, mut a: f64, mut b: f64, fa: f64, tol: f64) -> f64 {
    let mut sa = fa.signum();
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if b - a < tol {
            return m;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
            sa = fm.signum();
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn quadratic_roots(b: f64, c: f64) -> Vec<Complex64> {
    // z^2 + b z + c
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // Stable form: avoid cancellation in the smaller root.
        let q = -0.5 * (b + b.signum() * sq);
        let r1 = if b == 0.0 { sq * 0.5 } else { q };
        let r2 = if r1 != 0.0 { c / r1 } else { -b - r1 };
        vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        vec![Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Companion matrix of a monic polynomial (row-major `n x n`), already in
/// upper Hessenberg form: ones on the subdiagonal, `-c_i` in the last column.
fn companion(monic: &[f64]) -> Vec<Vec<f64>> {
    let n = monic.len() - 1;
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        h[i][n - 1] = -monic[i];
    }
    for i in 1..n {
        h[i][i - 1] = 1.0;
    }
    h
}

/// Diagonal-similarity balancing (norm equalization) to improve conditioning.
fn balance(h: &mut [Vec<f64>]) {
    let n = h.len();
    const RADIX: f64 = 2.0;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[j][i].abs();
                    r += h[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                let mut cc = c;
                while cc < g {
                    f *= RADIX;
                    cc *= RADIX * RADIX;
                }
                g = r * RADIX;
                while cc > g {
                    f /= RADIX;
                    cc /= RADIX * RADIX;
                }
                if (cc + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        h[i][j] *= ginv;
                    }
                    for j in 0..n {
                        h[j][i] *= f;
                    }
                }
            }
        }
    }
}

/// Francis double-shift QR iteration on an upper Hessenberg matrix,
/// returning all eigenvalues. Destroys `h`.
fn hqr_eigenvalues(h: &mut [Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = h.len();
    let mut out = Vec::with_capacity(n);
    let mut anorm = 0.0f64;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            // Look for a single small subdiagonal element.
            let mut l = nn;
            while l >= 1 {
                let s =
                    h[(l - 1) as usize][(l - 1) as usize].abs() + h[l as usize][l as usize].abs();
                let s = if s == 0.0 { anorm } else { s };
                if h[l as usize][(l - 1) as usize].abs() <= f64::EPSILON * s {
                    h[l as usize][(l - 1) as usize] = 0.0;
                    break;
                }
                l -= 1;
            }
            let x = h[nn as usize][nn as usize];
            if l == nn {
                out.push(Complex64::new(x + t, 0.0));
                nn -= 1;
                break;
            }
            let y = h[(nn - 1) as usize][(nn - 1) as usize];
            let w = h[nn as usize][(nn - 1) as usize] * h[(nn - 1) as usize][nn as usize];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    let r1 = x + z;
                    let r2 = if z != 0.0 { x - w / z } else { r1 };
                    out.push(Complex64::new(r1, 0.0));
                    out.push(Complex64::new(r2, 0.0));
                } else {
                    out.push(Complex64::new(x + p, z));
                    out.push(Complex64::new(x + p, -z));
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return Err(Error::domain("root iteration failed to converge"));
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..=nn as usize {
                    h[i][i] -= x;
                }
                let s = h[nn as usize][(nn - 1) as usize].abs()
                    + h[(nn - 1) as usize][(nn - 2) as usize].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // Form shift and look for two consecutive small subdiagonals.
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
            while m >= l {
                let z = h[m as usize][m as usize];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(m + 1) as usize][m as usize]
                    + h[m as usize][(m + 1) as usize];
                q = h[(m + 1) as usize][(m + 1) as usize] - z - rr - ss;
                r = h[(m + 2) as usize][(m + 1) as usize];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[m as usize][(m - 1) as usize].abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (h[(m - 1) as usize][(m - 1) as usize].abs()
                        + h[m as usize][m as usize].abs()
                        + h[(m + 1) as usize][(m + 1) as usize].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                h[i as usize][(i - 2) as usize] = 0.0;
                if i != m + 2 {
                    h[i as usize][(i - 3) as usize] = 0.0;
                }
            }
            // Double QR step on rows l..nn and columns m..nn.
            let mut k = m;
            while k <= nn - 1 {
                if k != m {
                    p = h[k as usize][(k - 1) as usize];
                    q = h[(k + 1) as usize][(k - 1) as usize];
                    r = if k != nn - 1 {
                        h[(k + 2) as usize][(k - 1) as usize]
                    } else {
                        0.0
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            h[k as usize][(k - 1) as usize] = -h[k as usize][(k - 1) as usize];
                        }
                    } else {
                        h[k as usize][(k - 1) as usize] = -s * x;
                    }
                    p += s;
                    let px = p / s;
                    let py = q / s;
                    let pz = r / s;
                    let qq = q / p;
                    let rr = r / p;
                    for j in (k as usize)..=(nn as usize) {
                        let mut pp = h[k as usize][j] + qq * h[(k + 1) as usize][j];
                        if k != nn - 1 {
                            pp += rr * h[(k + 2) as usize][j];
                            h[(k + 2) as usize][j] -= pp * pz;
                        }
                        h[(k + 1) as usize][j] -= pp * py;
                        h[k as usize][j] -= pp * px;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in (l as usize)..=(mmin as usize) {
                        let mut pp = px * h[i][k as usize] + py * h[i][(k + 1) as usize];
                        if k != nn - 1 {
                            pp += pz * h[i][(k + 2) as usize];
                            h[i][(k + 2) as usize] -= pp * rr;
                        }
                        h[i][(k + 1) as usize] -= pp * qq;
                        h[i][k as usize] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_poly_near(p: &Poly, expect: &[f64], tol: f64) {
        let q = Poly::new(expect.to_vec());
        assert_eq!(p.degree(), q.degree(), "{p:?} vs {expect:?}");
        for k in 0..p.coeffs().len() {
            assert!(
                (p.coeff(k) - q.coeff(k)).abs() <= tol,
                "coeff {k}: {} vs {}",
                p.coeff(k),
                q.coeff(k)
            );
        }
    }

    #[test]
    fn cheb_pair_matches_table() {
        // k = 1..5 rows of the generalized Tchebychev table, exact.
        let (c1, s1) = cheb_pair(1).unwrap();
        assert_poly_near(&c1, &[0.0, -1.0], 0.0);
        assert_poly_near(&s1, &[1.0], 0.0);
        let (c2, s2) = cheb_pair(2).unwrap();
        assert_poly_near(&c2, &[-1.0, 0.0, 2.0], 0.0);
        assert_poly_near(&s2, &[0.0, -2.0], 0.0);
        let (c5, s5) = cheb_pair(5).unwrap();
        assert_poly_near(&c5, &[0.0, -5.0, 0.0, 20.0, 0.0, -16.0], 0.0);
        assert_poly_near(&s5, &[1.0, 0.0, -12.0, 0.0, 16.0], 0.0);
    }

    #[test]
    fn cheb_pair_rejects_zero() {
        assert!(cheb_pair(0).is_err());
    }

    #[test]
    fn tcheby_form_z_squared() {
        let f = tcheby_form(&Poly::new(vec![0.0, 0.0, 1.0])).unwrap();
        assert_poly_near(&f.r, &[-1.0, 0.0, 2.0], 0.0);
        assert_poly_near(&f.t, &[0.0, -2.0], 0.0);
    }

    #[test]
    fn tcheby_form_constant() {
        let f = tcheby_form(&Poly::constant(1.0)).unwrap();
        assert_poly_near(&f.r, &[1.0], 0.0);
        assert!(f.t.is_zero());
        assert!(tcheby_form(&Poly::zero()).is_err());
    }

    #[test]
    fn tcheby_evaluation_identity() {
        // p(e^{j theta}) = R(-cos t) + j sin t * T(-cos t)
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let deg = 1 + (next() * 8.0) as usize;
            let coeffs: Vec<f64> = (0..=deg).map(|_| next() * 4.0 - 2.0).collect();
            let p = Poly::new(coeffs);
            if p.is_zero() {
                continue;
            }
            let f = tcheby_form(&p).unwrap();
            for _ in 0..5 {
                let th = 0.05 + next() * (std::f64::consts::PI - 0.1);
                let u = -th.cos();
                let lhs = p.eval_complex(Complex64::from_polar(1.0, th));
                let rhs = Complex64::new(f.r.eval(u), th.sin() * f.t.eval(u));
                let scale = lhs.norm().max(1.0);
                assert!((lhs - rhs).norm() < 1e-10 * scale, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn unit_modulus_identity() {
        // c_k^2 + (1-u^2) s_k^2 = 1 on [-1,1]
        for k in 1..=12 {
            let (c, s) = cheb_pair(k).unwrap();
            for i in 0..200 {
                let u = -1.0 + 2.0 * (i as f64 + 0.5) / 200.0;
                let v = c.eval(u).powi(2) + (1.0 - u * u) * s.eval(u).powi(2);
                assert!((v - 1.0).abs() < 1e-10, "k={k} u={u} v={v}");
            }
        }
    }

    #[test]
    fn roots_simple() {
        let r = roots(&Poly::new(vec![-0.25, 0.0, 1.0])).unwrap();
        let mut mags: Vec<f64> = r.iter().map(|z| z.re).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mags[0] + 0.5).abs() < 1e-12);
        assert!((mags[1] - 0.5).abs() < 1e-12);

        let r = roots(&Poly::new(vec![1.0, 0.0, 1.0])).unwrap();
        assert!(r
            .iter()
            .all(|z| z.re.abs() < 1e-12 && (z.im.abs() - 1.0).abs() < 1e-12));

        assert!(roots(&Poly::constant(3.0)).is_err());
    }

    #[test]
    fn roots_reconstruct_random_degree_6() {
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..50 {
            let mut coeffs: Vec<f64> = (0..7).map(|_| next()).collect();
            if coeffs[6].abs() < 0.1 {
                coeffs[6] = 1.0;
            }
            let p = Poly::new(coeffs);
            let rs = roots(&p).unwrap();
            assert_eq!(rs.len(), 6);
            // Reconstruct lead * prod (z - r_i) and compare.
            let mut rec = vec![Complex64::new(1.0, 0.0)];
            for r in &rs {
                let mut nxt = vec![Complex64::new(0.0, 0.0); rec.len() + 1];
                for (i, &c) in rec.iter().enumerate() {
                    nxt[i + 1] += c;
                    nxt[i] -= c * r;
                }
                rec = nxt;
            }
            let lead = p.leading();
            let scale = p.max_coeff();
            for (k, c) in rec.iter().enumerate() {
                assert!(c.im.abs() < 1e-7 * scale.max(1.0));
                assert!(
                    (c.re * lead - p.coeff(k)).abs() < 1e-7 * scale,
                    "coeff {k}: {} vs {}",
                    c.re * lead,
                    p.coeff(k)
                );
            }
        }
    }

    #[test]
    fn roots_residual_contract() {
        let p = Poly::new(vec![2.0, -3.0, 0.5, 1.0, -0.7, 0.2, 1.3]);
        let deg = p.degree().unwrap() as i32;
        for r in roots(&p).unwrap() {
            let bound = 1e-8 * p.max_coeff() * r.norm().max(1.0).powi(deg);
            assert!(p.eval_complex(r).norm() <= bound);
        }
    }

    #[test]
    fn roots_with_zero_roots() {
        // z^2 (z - 2)
        let p = Poly::new(vec![0.0, 0.0, -2.0, 1.0]);
        let rs = roots(&p).unwrap();
        let zeros = rs.iter().filter(|z| z.norm() == 0.0).count();
        assert_eq!(zeros, 2);
        assert!(rs.iter().any(|z| (z.re - 2.0).abs() < 1e-10));
    }

    #[test]
    fn count_in_unit_disc_cases() {
        assert_eq!(
            count_in_unit_disc(&Poly::new(vec![-0.25, 0.0, 1.0]), 1e-9).unwrap(),
            2
        );
        assert_eq!(
            count_in_unit_disc(&Poly::new(vec![-2.0, 1.0]), 1e-9).unwrap(),
            0
        );
        // (z-0.5)(z-2) = z^2 - 2.5 z + 1
        assert_eq!(
            count_in_unit_disc(&Poly::new(vec![1.0, -2.5, 1.0]), 1e-9).unwrap(),
            1
        );
        // marginal root at 1
        assert!(count_in_unit_disc(&Poly::new(vec![-1.0, 1.0]), 1e-9).is_err());
    }

    #[test]
    fn count_is_multiplicative_over_products() {
        let p = Poly::new(vec![0.06, -0.5, 1.0]); // roots 0.15.., well inside
        let q = Poly::new(vec![6.0, -5.0, 1.0]); // roots 2, 3 outside
        let cp = count_in_unit_disc(&p, 1e-9).unwrap();
        let cq = count_in_unit_disc(&q, 1e-9).unwrap();
        let cpq = count_in_unit_disc(&p.mul(&q), 1e-9).unwrap();
        assert_eq!(cp + cq, cpq);
    }

    #[test]
    fn odd_zeros_excludes_even_multiplicity() {
        // u (u - 0.5)^2
        let p = Poly::new(vec![0.0, 1.0])
            .mul(&Poly::new(vec![0.5, -1.0]).mul(&Poly::new(vec![0.5, -1.0])));
        let z = odd_zeros_in_open_interval(&p, -1.0, 1.0).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].abs() < 1e-10);
    }

    #[test]
    fn odd_zeros_of_t_for_z_squared() {
        let z = odd_zeros_in_open_interval(&Poly::new(vec![0.0, -2.0]), -1.0, 1.0).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].abs() < 1e-12);
    }

    #[test]
    fn odd_zeros_matches_dense_sign_scan() {
        // Random polynomials with known factorizations vs a dense scan oracle.
        let mut state = 0xDEADBEEFCAFEF00Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..100 {
            let k = 1 + (next().abs() * 4.0) as usize;
            let mut p = Poly::constant(1.0);
            for _ in 0..k {
                let r = next() * 0.9;
                p = p.mul(&Poly::new(vec![-r, 1.0]));
            }
            let got = odd_zeros_in_open_interval(&p, -1.0, 1.0).unwrap();
            // Dense sign-change scan.
            let m = 100_000;
            let mut expect = 0usize;
            let mut prev = p.eval(-1.0 + 2.0 / m as f64 * 0.5);
            for i in 1..m {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / m as f64;
                let v = p.eval(x);
                if prev.signum() != v.signum() && prev != 0.0 && v != 0.0 {
                    expect += 1;
                }
                prev = v;
            }
            assert_eq!(got.len(), expect, "p = {:?}", p);
            for w in got.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn multiplicity_detection() {
        // (u+1)^2 (u-0.3)
        let p = Poly::new(vec![1.0, 1.0])
            .mul(&Poly::new(vec![1.0, 1.0]))
            .mul(&Poly::new(vec![-0.3, 1.0]));
        let (m, v) = p.multiplicity_at(-1.0, 1e-9);
        assert_eq!(m, 2);
        assert!(v != 0.0);
        let (m0, v0) = p.multiplicity_at(0.5, 1e-9);
        assert_eq!(m0, 0);
        assert!(v0 != 0.0);
    }
}
