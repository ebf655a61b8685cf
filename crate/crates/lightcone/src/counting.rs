//! Primitive rational points on the sphere of radius d, sharp and smoothed
//! height counts, and the bump-function Mellin transform.

use crate::arith::{divisors, gcd, isqrt};
use crate::eisenstein::{omega, FormParams};
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;

type C = Complex64;

/// Upper bound on the number of shell candidates visited by an enumeration.
pub const ENUM_BUDGET: f64 = 4e10;

/// Primitive light-cone points (p, q), p ∈ Z^{n+1}, ‖p‖ = dq, q ≥ 1, stored flat.
#[derive(Debug, Clone, Default)]
pub struct PointSet {
    pub dim: usize,
    pub coords: Vec<i32>,
    pub q: Vec<i32>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i32], i32)> + '_ {
        self.coords.chunks_exact(self.dim).zip(self.q.iter().copied())
    }

    fn push(&mut self, p: &[i64], q: i64) {
        self.coords.extend(p.iter().map(|&x| x as i32));
        self.q.push(q as i32);
    }
}

/// Nonincreasing tuples a₁ ≥ … ≥ a_k ≥ 0 with Σ aᵢ² = rem.
fn sorted_reps(rem: u64, k: usize, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if k == 1 {
        let a = isqrt(rem);
        if a * a == rem && a <= max {
            cur.push(a);
            out.push(cur.clone());
            cur.pop();
        }
        return;
    }
    let mut a = isqrt(rem).min(max);
    loop {
        if a * a * (k as u64) < rem {
            break;
        }
        cur.push(a);
        sorted_reps(rem - a * a, k - 1, a, cur, out);
        cur.pop();
        if a == 0 {
            break;
        }
        a -= 1;
    }
}

/// Every distinct signed permutation of a sorted nonnegative tuple.
fn signed_perms(rep: &[u64], mut f: impl FnMut(&[i64])) {
    let mut vals: Vec<i64> = rep.iter().map(|&x| x as i64).collect();
    vals.sort_unstable();
    let k = vals.len();
    let mut perm = vals.clone();
    loop {
        let nz: Vec<usize> = (0..k).filter(|&i| perm[i] != 0).collect();
        let mut buf = perm.clone();
        for mask in 0u32..(1 << nz.len()) {
            for (b, &i) in nz.iter().enumerate() {
                buf[i] = if mask >> b & 1 == 1 { -perm[i] } else { perm[i] };
            }
            f(&buf);
        }
        // next lexicographic permutation of the multiset
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

/// n = 1: primitive Pythagorean triples generated directly, then lifted to
/// radius d q.
fn enumerate_circle(d: u64, qmax: u64, f: &mut impl FnMut(&[i64], i64)) {
    let cmax = d * qmax;
    let mut emit = |a0: i64, b0: i64, c0: u64| {
        // g c0 = d q with gcd(g, q) = 1 forces g | d
        for g in divisors(d) {
            if g * c0 <= cmax && (g * c0) % d == 0 {
                let q = g * c0 / d;
                if q >= 1 && gcd(g as i64, q as i64) == 1 {
                    let (a, b) = (a0 * g as i64, b0 * g as i64);
                    let rep = [a.unsigned_abs(), b.unsigned_abs()];
                    signed_perms(&rep, |p| f(p, q as i64));
                }
            }
        }
    };
    emit(1, 0, 1);
    let mut u = 2u64;
    while u * u < cmax + 1 {
        for v in 1..u {
            if (u - v) % 2 == 0 || gcd(u as i64, v as i64) != 1 {
                continue;
            }
            let c0 = u * u + v * v;
            if c0 > cmax {
                break;
            }
            emit((u * u - v * v) as i64, (2 * u * v) as i64, c0);
        }
        u += 1;
    }
}

/// Calls f(p, q) for every primitive (p, q) with ‖p‖ = dq and 1 ≤ q ≤ qmax.
pub fn for_each_point(params: &FormParams, qmax: u64, mut f: impl FnMut(&[i64], i64)) -> Result<()> {
    let k = params.n + 1;
    let d = params.d;
    let r = (d * qmax) as f64;
    let work = if k == 2 { r } else { r.powi(k as i32 - 2) * qmax as f64 };
    if work > ENUM_BUDGET {
        return Err(Error::Budget(format!("enumeration up to q = {qmax} for n = {}", params.n)));
    }
    if (d * qmax) > i32::MAX as u64 / 2 {
        return Err(Error::Budget("coordinates exceed i32".into()));
    }
    if k == 2 {
        enumerate_circle(d, qmax, &mut f);
        return Ok(());
    }
    let mut reps = Vec::new();
    for q in 1..=qmax {
        reps.clear();
        let r = d * q;
        sorted_reps(r * r, k, r, &mut Vec::with_capacity(k), &mut reps);
        for rep in &reps {
            let mut g = q as i64;
            for &a in rep {
                g = gcd(g, a as i64);
            }
            if g == 1 {
                signed_perms(rep, |p| f(p, q as i64));
            }
        }
    }
    Ok(())
}

/// All primitive (p, q) with ‖p‖ = dq and 1 ≤ q ≤ qmax.
pub fn enumerate_upto(params: &FormParams, qmax: u64) -> Result<PointSet> {
    let mut out = PointSet {
        dim: params.n + 1,
        ..Default::default()
    };
    for_each_point(params, qmax, |p, q| out.push(p, q))?;
    Ok(out)
}

/// Primitive points of height q ≤ T.
pub fn enumerate_points(params: &FormParams, t: f64) -> Result<PointSet> {
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("T = {t} must be finite and nonnegative"));
    }
    enumerate_upto(params, t.floor() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[allow(non_snake_case)]
pub struct CountResult {
    pub T: f64,
    pub count: u64,
    pub main_term: f64,
    pub relative_error: f64,
}

/// N(T) = #{primitive points with q ≤ T} against ω T^n / n.
pub fn count_sharp(params: &FormParams, t: f64) -> Result<CountResult> {
    let pts = enumerate_points(params, t)?;
    let count = pts.len() as u64;
    let main_term = omega(params)? * t.powi(params.n as i32) / params.n as f64;
    let relative_error = if main_term > 0.0 {
        (count as f64 - main_term).abs() / main_term
    } else {
        0.0
    };
    Ok(CountResult {
        T: t,
        count,
        main_term,
        relative_error,
    })
}

/// The smooth bump exp(-1/(1-u²)) on [a, b], with u the log-centred
/// coordinate, scaled by `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub a: f64,
    pub b: f64,
    pub scale: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Bump {
            a: 0.5,
            b: 1.0,
            scale: 1.0,
        }
    }
}

impl Bump {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return invalid(format!("bump support [{a}, {b}] must satisfy 0 < a < b"));
        }
        Ok(Bump { a, b, scale: 1.0 })
    }

    fn u_of(&self, y: f64) -> f64 {
        (2.0 * y.ln() - (self.a * self.b).ln()) / (self.b / self.a).ln()
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y <= self.a || y >= self.b {
            return 0.0;
        }
        let u = self.u_of(y);
        self.scale * (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Trapezoid rule on [lo, hi] with doubling until two levels agree to `tol`.
/// For integrands vanishing to all orders at both ends the rule converges
/// faster than any power of the step.
pub(crate) fn trapezoid(f: impl Fn(f64) -> C, lo: f64, hi: f64, tol: f64) -> C {
    let mut m = 32usize;
    let mut h = (hi - lo) / m as f64;
    let mut sum: C = (1..m).map(|k| f(lo + k as f64 * h)).sum::<C>() + (f(lo) + f(hi)) * 0.5;
    let mut prev = sum * h;
    for _ in 0..16 {
        let mid: C = (0..m).map(|k| f(lo + (k as f64 + 0.5) * h)).sum();
        sum += mid;
        m *= 2;
        h /= 2.0;
        let cur = sum * h;
        if (cur - prev).norm() <= tol * cur.norm().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// ĥ(s) = ∫₀^∞ h(y) y^{-(s+1)} dy, integrated in u = log-coordinate.
pub fn mellin(h: &Bump, s: C) -> C {
    // y = sqrt(ab) (b/a)^{u/2}, dy/y = ln(b/a)/2 du
    let l = (h.b / h.a).ln();
    let c0 = (h.a * h.b).sqrt().ln();
    let f = |u: f64| {
        let lny = c0 + l * u / 2.0;
        let w = (-s * lny).exp();
        w * (h.scale * (-1.0 / (1.0 - u * u)).exp() * l / 2.0)
    };
    trapezoid(f, -1.0, 1.0, 1e-13)
}

/// N_h(T) = Σ h(q/T) over primitive points at g = identity, and the main
/// term ω ĥ(-n) T^n.
pub fn count_smoothed(params: &FormParams, h: &Bump, t: f64) -> Result<(f64, f64)> {
    let main = omega(params)? * mellin(h, C::new(-(params.n as f64), 0.0)).re * t.powi(params.n as i32);
    if t * h.b < 1.0 {
        return Ok((0.0, main));
    }
    let mut value = 0.0;
    for_each_point(params, (t * h.b).floor() as u64, |_, q| value += h.eval(q as f64 / t))?;
    Ok((value, main))
}

/// ∫₀^∞ N_h(T) T^{-s-1} dT, integrated in log T up to `tmax` with the
/// main-term tail ω ĥ(-n) tmax^{n-s}/(s-n) added. By unfolding this equals
/// ĥ(-s) E(s) at g = identity.
pub fn mellin_of_count(params: &FormParams, h: &Bump, s: C, tmax: f64) -> Result<C> {
    let n = params.n as f64;
    if s.re <= n {
        return Err(Error::Divergent(s.re));
    }
    let pts = enumerate_points(params, tmax * h.b)?;
    let mut qs: Vec<f64> = pts.q.iter().map(|&q| q as f64).collect();
    qs.sort_by(|a, b| a.total_cmp(b));
    let lo = (1.0 / h.b).ln();
    let hi = tmax.ln();
    let f = |tau: f64| {
        let t = tau.exp();
        let start = qs.partition_point(|&q| q <= t * h.a);
        let nh: f64 = qs[start..]
            .iter()
            .take_while(|&&q| q < t * h.b)
            .map(|&q| h.eval(q / t))
            .sum();
        (-s * tau).exp() * nh
    };
    let body = trapezoid(f, lo, hi, 1e-9);
    let tail = omega(params)? * mellin(h, C::new(-n, 0.0)).re * ((n - s) * hi).exp() / (s - n);
    Ok(body + tail)
}
