//! E_{Q_{n,d}}(s, z): constant term, Fourier coefficients, the truncated
//! Fourier series, the direct lattice sum, residues and the R_k identities.
//!
//! Points of the upper half-space are z = (x, y), acting through
//! g = u_x a_y on row vectors. Light-cone vectors are (v₁, w, v_{n+2}) with
//! v₁² + ‖w‖² = d² v_{n+2}², and e₀ = (-d, 0, …, 0, 1).

use crate::arith::{char_from_d, chi_m4, divisors, euler_phi, gcd_slice, is_squarefree, prime_divisors, CharSpec, ModChar};
use crate::counting::{for_each_point, trapezoid, PointSet};
use crate::error::{invalid, Error, Result};
use crate::expsums::DualVector;
use crate::lfunc::{bessel_k, dirichlet_l, dirichlet_l_periodic, gamma, lstar, rgamma, xi, zeta};
use crate::localzeta::{eps_const, eps_lambda, eps_lambda_char, epsp_const, z_const_closed, zc_const_closed};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormParams {
    pub n: usize,
    pub d: u64,
}

impl FormParams {
    pub fn new(n: usize, d: u64) -> Result<Self> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        if d == 0 || d % 2 == 0 || !is_squarefree(d) {
            return invalid(format!("d = {d} must be odd and squarefree"));
        }
        Ok(FormParams { n, d })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePoint {
    pub x: Vec<f64>,
    pub y: f64,
}

impl HalfSpacePoint {
    pub fn new(x: Vec<f64>, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return invalid("need finite x and y > 0");
        }
        Ok(HalfSpacePoint { x, y })
    }

    /// z₀ = (0, 1).
    pub fn base(n: usize) -> Self {
        HalfSpacePoint { x: vec![0.0; n], y: 1.0 }
    }

    fn check(&self, params: &FormParams) -> Result<()> {
        if self.x.len() != params.n {
            return invalid(format!("x has length {}, expected {}", self.x.len(), params.n));
        }
        if !(self.y > 0.0) {
            return invalid("y must be positive");
        }
        Ok(())
    }
}

/// Truncation knobs. `lambda_norm_bound` caps the automatic λ cutoff;
/// `direct_height_bound` is the largest v_{n+2} in the direct sum (0 picks
/// a size per n); `zeta_terms` is the default qmax of `r_series`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    pub lambda_norm_bound: f64,
    pub zeta_terms: usize,
    pub direct_height_bound: u64,
    pub pole_guard: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            lambda_norm_bound: f64::INFINITY,
            zeta_terms: 2000,
            direct_height_bound: 0,
            pole_guard: 1e-8,
        }
    }
}

/// Height bound used by the direct sum when the config leaves it at 0.
pub fn default_height(params: &FormParams) -> u64 {
    let base: u64 = match params.n {
        1 => 1_000_000,
        2 => 1200,
        3 => 220,
        4 => 90,
        5 => 45,
        _ => 25,
    };
    (base / params.d).max(8)
}

// ---------------------------------------------------------------------------
// Residues

/// Residue of f at s0 from the mean of f(s0 + ρe^{iθ}) ρe^{iθ} over 32
/// equally spaced angles; also returns the mean of f (the regular part).
pub fn residue_circle(f: impl Fn(C) -> Result<C>, s0: C, rho: f64) -> Result<(C, C)> {
    let m = 32;
    let mut res = c(0.0);
    let mut mean = c(0.0);
    for k in 0..m {
        let w = C::from_polar(rho, 2.0 * PI * (k as f64 + 0.5) / m as f64);
        let v = f(s0 + w)?;
        res += v * w;
        mean += v;
    }
    Ok((res / m as f64, mean / m as f64))
}

/// Residue of a simple pole at s0 from the symmetric differences
/// h(f(s0+h) - f(s0-h))/2 at h = ε and ε/2, Richardson-combined.
pub fn residue_richardson(f: impl Fn(C) -> Result<C>, s0: C, eps: f64) -> Result<C> {
    let r = |h: f64| -> Result<C> { Ok((f(s0 + h)? - f(s0 - h)?) * (h / 2.0)) };
    let (a, b) = (r(eps)?, r(eps / 2.0)?);
    Ok((b * 4.0 - a) / 3.0)
}

fn is_singular(e: &Error) -> bool {
    matches!(e, Error::GammaPole(_) | Error::ZetaPole | Error::LocalPole { .. })
}

/// Evaluate f at s; at an exact singularity decide between a pole
/// (error with residue) and a removable point (return the regular part).
fn eval_or_pole(f: impl Fn(C) -> Result<C>, s: C) -> Result<C> {
    match f(s) {
        Ok(v) if v.re.is_finite() && v.im.is_finite() => Ok(v),
        Ok(_) => pole_report(f, s),
        Err(e) if is_singular(&e) => pole_report(f, s),
        Err(e) => Err(e),
    }
}

fn pole_report(f: impl Fn(C) -> Result<C>, s: C) -> Result<C> {
    let (res, mean) = residue_circle(&f, s, 1e-4)?;
    if res.norm() > 1e-6 * (1.0 + mean.norm() * 1e-4) {
        Err(Error::Pole {
            re: s.re,
            im: s.im,
            residue_re: res.re,
            residue_im: res.im,
        })
    } else {
        Ok(mean)
    }
}

// ---------------------------------------------------------------------------
// Constant term

fn phi_const_raw(params: &FormParams, s: C) -> Result<C> {
    let n = params.n;
    let nf = n as f64;
    let eps = eps_const(n, params.d, s)?;
    let den_gamma = rgamma((s + 1.0) / 2.0) * rgamma((s - nf + 1.0) / 2.0);
    let body = match n % 4 {
        0 => {
            let g = gamma((s * 2.0 - nf + 2.0) / 4.0)?;
            g * g * xi(s - nf + 1.0)? * xi(s - nf / 2.0)? / (xi(s)? * xi(s - nf / 2.0 + 1.0)?)
        }
        2 => {
            let chi = CharSpec::chi_m4();
            gamma((s * 2.0 - nf) / 4.0)?
                * gamma((s * 2.0 - nf + 4.0) / 4.0)?
                * xi(s - nf + 1.0)?
                * lstar(s - nf / 2.0, &chi)?
                / (xi(s)? * lstar(s - nf / 2.0 + 1.0, &chi)?)
        }
        _ => {
            gamma((s * 2.0 - nf + 1.0) / 4.0)?
                * gamma((s * 2.0 - nf + 3.0) / 4.0)?
                * xi(s - nf + 1.0)?
                * xi(s * 2.0 - nf)?
                / (xi(s)? * xi(s * 2.0 - nf + 1.0)?)
        }
    };
    Ok(eps * den_gamma * body)
}

/// Φ_{n,d}(s), the coefficient of y^{n-s} in the constant term, from the
/// completed ζ and L-functions.
pub fn phi_const(params: &FormParams, s: C) -> Result<C> {
    eval_or_pole(|w| phi_const_raw(params, w), s)
}

/// Φ_{n,d}(s) from the Euler product of the λ = 0 local factors:
/// 2^{s-n} d^{s-n} π^{n/2} Γ(s-n/2) / (ζ(s)Γ(s)) · Π_{p|2d} Zc_p Π_{p∤2d} Z_p,
/// with the odd unramified product written as a ratio of ζ/L values.
pub fn phi_const_euler(params: &FormParams, s: C) -> Result<C> {
    let n = params.n;
    let nf = n as f64;
    let one = c(1.0);
    let p2 = |a: f64, b: f64| crate::localzeta::ppow(2, a, b, s);
    let (global, two_factor) = match n % 4 {
        0 => (
            zeta(s - nf + 1.0)? * zeta(s - nf / 2.0)? / zeta(s - nf / 2.0 + 1.0)?,
            (one - p2(nf / 2.0 - 1.0, 1.0)) / ((one - p2(nf - 1.0, 1.0)) * (one - p2(nf / 2.0, 1.0))),
        ),
        2 => {
            let chi = CharSpec::chi_m4();
            (
                zeta(s - nf + 1.0)? * dirichlet_l(s - nf / 2.0, &chi)? / dirichlet_l(s - nf / 2.0 + 1.0, &chi)?,
                one / (one - p2(nf - 1.0, 1.0)),
            )
        }
        _ => (
            zeta(s - nf + 1.0)? * zeta(s * 2.0 - nf)? / zeta(s * 2.0 - nf + 1.0)?,
            (one - p2(nf - 1.0, 2.0)) / ((one - p2(nf - 1.0, 1.0)) * (one - p2(nf, 2.0))),
        ),
    };
    let mut z = zc_const_closed(n, 2, s)? / two_factor * global;
    for p in prime_divisors(params.d) {
        z *= zc_const_closed(n, p, s)? / z_const_closed(n, p, s)?;
    }
    let scale = (((s - nf) * (2.0 * params.d as f64).ln()).exp()) * PI.powf(nf / 2.0) * gamma(s - nf / 2.0)? * rgamma(s)
        / zeta(s)?;
    Ok(scale * z)
}

// ---------------------------------------------------------------------------
// Non-constant coefficients

/// Factor between Φ_{n,d}(s; λ) = ε · (L-ratio) and the Dirichlet series
/// Σ_t φ_{n,d}(t; λ) t^{-s} that actually multiplies the Bessel term: ε is
/// built from Σ_t 2^{1-n} φ_{n,d}(t; λ) t^{-s}. Fixed against the direct
/// lattice sum.
pub fn coefficient_scale(n: usize) -> f64 {
    2f64.powi(n as i32 - 1)
}

/// The global L-ratio for d = 1.
pub fn l_ratio(n: usize, s: C, lam: &DualVector) -> Result<C> {
    if lam.n() != n {
        return invalid("dimension of λ differs from n");
    }
    let nf = n as f64;
    match n % 4 {
        0 => Ok(c(1.0) / zeta(s - nf / 2.0 + 1.0)?),
        2 => Ok(c(1.0) / dirichlet_l(s - nf / 2.0 + 1.0, &CharSpec::chi_m4())?),
        _ => {
            let chi = char_from_d(lam.disc())?;
            Ok(dirichlet_l(s - (nf - 1.0) / 2.0, &chi)? / zeta(s * 2.0 - nf + 1.0)?)
        }
    }
}

/// Φ_{n,d}(s; λ): the Euler product of the twisted exponential sums.
pub fn phi_lambda(params: &FormParams, s: C, lam: &DualVector) -> Result<C> {
    Ok(eps_lambda(params.n, params.d, s, lam)? * l_ratio(params.n, s, lam)?)
}

/// Φ_{n,d}(s; λ) as the character sum over d₁ | d and χ mod d₁ with
/// imprimitive L-functions, each term built from `eps_lambda_char`.
pub fn phi_lambda_charsum(params: &FormParams, s: C, lam: &DualVector) -> Result<C> {
    let n = params.n;
    let nf = n as f64;
    let mut total = c(0.0);
    for d1 in divisors(params.d) {
        let mut inner = c(0.0);
        for chi in ModChar::all(d1)? {
            let eps = eps_lambda_char(n, params.d, s, lam, &chi)?;
            let ratio = match n % 4 {
                0 => c(1.0) / dirichlet_l_periodic(s - nf / 2.0 + 1.0, &chi.table())?,
                2 => {
                    let t = chi.product_table(4, |k| c(chi_m4(k) as f64));
                    c(1.0) / dirichlet_l_periodic(s - nf / 2.0 + 1.0, &t)?
                }
                _ => {
                    let chd = char_from_d(lam.disc())?;
                    let num = chi.product_table(chd.q, |k| c(chd.eval(k) as f64));
                    let sq: Vec<C> = chi.table().iter().map(|v| v * v).collect();
                    dirichlet_l_periodic(s - (nf - 1.0) / 2.0, &num)? / dirichlet_l_periodic(s * 2.0 - nf + 1.0, &sq)?
                }
            };
            inner += eps * ratio;
        }
        total += inner / euler_phi(d1) as f64;
    }
    Ok(total)
}

fn coefficient_prefactor(params: &FormParams, s: C, lam_norm: f64) -> Result<C> {
    let nf = params.n as f64;
    let z = zeta(s)?;
    Ok(((s - nf + 1.0) * 2f64.ln() + s * PI.ln() + (s - nf / 2.0) * lam_norm.ln()).exp()
        * (params.d as f64).powf(-nf / 2.0)
        * rgamma(s)
        / z)
}

/// a(s, a_y; λ): y^s + Φ y^{n-s} for λ = None, otherwise the Bessel term.
pub fn fourier_coefficient(params: &FormParams, s: C, y: f64, lam: Option<&DualVector>) -> Result<C> {
    if !(y > 0.0) {
        return invalid("y must be positive");
    }
    let nf = params.n as f64;
    let ly = y.ln();
    match lam {
        None => Ok((s * ly).exp() + phi_const(params, s)? * ((c(nf) - s) * ly).exp()),
        Some(lam) => {
            let ln = lam.lambda_norm();
            let k = bessel_k(s - nf / 2.0, 2.0 * PI * ln * y / params.d as f64)?;
            Ok(coefficient_prefactor(params, s, ln)?
                * phi_lambda(params, s, lam)?
                * coefficient_scale(params.n)
                * y.powf(nf / 2.0)
                * k)
        }
    }
}

// ---------------------------------------------------------------------------
// The dual lattice

/// Calls f(m) for m = 2λ, λ ∈ Λ* \ {0} with ‖λ‖ ≤ bound: first 2·Z^n, then (odd)^n.
pub fn for_each_dual(n: usize, bound: f64, mut f: impl FnMut(&[i64])) {
    fn rec(n: usize, parity: i64, left: f64, cur: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
        if cur.len() == n {
            if cur.iter().any(|&x| x != 0) {
                f(cur);
            }
            return;
        }
        let lim = left.max(0.0).sqrt().floor() as i64;
        for a in -lim..=lim {
            if a.rem_euclid(2) == parity {
                cur.push(a);
                rec(n, parity, left - (a * a) as f64, cur, f);
                cur.pop();
            }
        }
    }
    let r2 = 4.0 * bound * bound + 1e-9;
    let mut cur = Vec::with_capacity(n);
    rec(n, 0, r2, &mut cur, &mut f);
    rec(n, 1, r2, &mut cur, &mut f);
}

pub fn dual_vectors(n: usize, bound: f64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for_each_dual(n, bound, |m| out.push(m.to_vec()));
    out
}

/// λ is primitive in Λ* iff λ/k ∉ Λ* for every k ≥ 2.
pub fn is_primitive_dual(m: &[i64]) -> bool {
    let g = gcd_slice(m);
    if g == 0 {
        return false;
    }
    if g % 2 == 1 {
        return g == 1;
    }
    if g != 2 {
        return false;
    }
    let half: Vec<i64> = m.iter().map(|x| x / 2).collect();
    let par = half[0].rem_euclid(2);
    half.iter().any(|x| x.rem_euclid(2) != par)
}

/// Automatic λ cutoff: 2π‖λ‖y/d ≤ max(30, 3|Im(s - n/2)|) + 25, where
/// K_ν(x) has decayed like e^{-x} far below double precision.
pub fn lambda_bound(params: &FormParams, s: C, y: f64, cfg: &TruncationConfig) -> f64 {
    let b = 30f64.max(3.0 * s.im.abs()) + 25.0;
    (b * params.d as f64 / (2.0 * PI * y)).min(cfg.lambda_norm_bound)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierEval {
    pub value: C,
    pub lambda_bound: f64,
    pub terms: usize,
    pub classes: usize,
    /// Largest |term| among λ in the outer tenth of the cutoff ball.
    pub tail_estimate: f64,
}

/// Σ_{λ ∈ Λ*} a(s, a_y; λ) e(λ·x), grouping λ by the data that
/// determine the coefficient (‖2λ‖², gcd, δ, parity of 2λ).
pub fn fourier_eval(params: &FormParams, s: C, z: &HalfSpacePoint, cfg: &TruncationConfig) -> Result<FourierEval> {
    z.check(params)?;
    let constant = fourier_coefficient(params, s, z.y, None)?;
    let bound = lambda_bound(params, s, z.y, cfg);
    let mut classes: HashMap<(i64, i64, bool, i64), (Vec<i64>, C)> = HashMap::new();
    let mut terms = 0;
    for_each_dual(params.n, bound, |m| {
        terms += 1;
        let phase: f64 = m.iter().zip(&z.x).map(|(&a, &b)| a as f64 * b).sum();
        let e = C::from_polar(1.0, PI * phase);
        let g = gcd_slice(m);
        let ell = g.trailing_zeros();
        let delta = m.iter().all(|&x| (x >> ell) & 1 == 1);
        let key = (m.iter().map(|x| x * x).sum(), g, delta, m[0] & 1);
        classes.entry(key).or_insert_with(|| (m.to_vec(), c(0.0))).1 += e;
    });
    let mut value = constant;
    let mut tail: f64 = 0.0;
    for (m, phase) in classes.values() {
        let lam = DualVector::new(m.clone())?;
        let a = fourier_coefficient(params, s, z.y, Some(&lam))?;
        let term = a * phase;
        if lam.lambda_norm() > 0.9 * bound {
            tail = tail.max(a.norm());
        }
        value += term;
    }
    Ok(FourierEval {
        value,
        lambda_bound: bound,
        terms,
        classes: classes.len(),
        tail_estimate: tail,
    })
}

pub fn eisenstein_fourier(params: &FormParams, s: C, z: &HalfSpacePoint, cfg: &TruncationConfig) -> Result<C> {
    Ok(fourier_eval(params, s, z, cfg)?.value)
}

// ---------------------------------------------------------------------------
// The direct lattice sum

/// Coefficients (a₁, a_w, b) with ‖vg‖/‖e₀‖ = a₁v₁ + a_w·w + b v_{n+2} for
/// light-cone v; this is the last coordinate of v u_x a_y.
fn height_form(params: &FormParams, z: &HalfSpacePoint) -> (f64, Vec<f64>, f64) {
    let d = params.d as f64;
    let y = z.y;
    let xx: f64 = z.x.iter().map(|t| t * t).sum();
    let sh = (y - 1.0 / y) / 2.0;
    let ch = (y + 1.0 / y) / 2.0;
    let a1 = sh / d + d * xx / (2.0 * y);
    let aw = z.x.iter().map(|t| t / y).collect();
    let b = ch + d * d * xx / (2.0 * y);
    (a1, aw, b)
}

/// ‖vg‖ for a light-cone v = (p, q), through the explicit matrices.
pub fn cone_norm(params: &FormParams, p: &[i64], q: i64, z: &HalfSpacePoint) -> f64 {
    let d = params.d as f64;
    let xx: f64 = z.x.iter().map(|t| t * t).sum();
    let v1 = p[0] as f64;
    let qf = q as f64;
    let wx: f64 = p[1..].iter().zip(&z.x).map(|(&a, b)| a as f64 * b).sum();
    let u0 = v1 * (1.0 - d * d * xx / 2.0) - d * wx - qf * d * d * d * xx / 2.0;
    let uw: Vec<f64> = p[1..].iter().zip(&z.x).map(|(&a, b)| v1 * d * b + a as f64 + qf * d * d * b).collect();
    let un = v1 * d * xx / 2.0 + wx + qf * (1.0 + d * d * xx / 2.0);
    let (y, yi) = (z.y, 1.0 / z.y);
    let f0 = u0 * (y + yi) / 2.0 + un * d * (y - yi) / 2.0;
    let fl = u0 * (y - yi) / (2.0 * d) + un * (y + yi) / 2.0;
    (f0 * f0 + uw.iter().map(|t| t * t).sum::<f64>() + fl * fl).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectSum {
    pub value: C,
    /// The smoothed tail ω M(n-s) X^{n-s} already included in `value`.
    pub tail_correction: C,
    /// Size of the neglected remainder, ω X^{n/2 - Re s}.
    pub tail_estimate: f64,
    pub cutoff: f64,
    pub points: usize,
}

/// Smooth cutoff: 1 on [0, U0], 0 from 1 on.
const U0: f64 = 0.3;

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

fn weight(u: f64) -> f64 {
    1.0 - smooth_step((u - U0) / (1.0 - U0))
}

fn weight_deriv(u: f64) -> f64 {
    let t = (u - U0) / (1.0 - U0);
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    let da = a / (t * t);
    let db = -b / ((1.0 - t) * (1.0 - t));
    -(da * (a + b) - a * (da + db)) / ((a + b) * (a + b)) / (1.0 - U0)
}

/// M(w) = ∫₀^∞ (1 - W(u)) u^{w-1} du = (1/w) ∫ W'(u) u^w du.
fn weight_mellin(w: C) -> C {
    let f = |u: f64| (w * u.ln()).exp() * weight_deriv(u);
    trapezoid(f, U0, 1.0, 1e-14) / w
}

/// Running smoothed sum of (‖vg‖/‖e₀‖)^{-s} with cutoff at height X.
struct DirectAccumulator {
    a1: f64,
    aw: Vec<f64>,
    b: f64,
    x_cut: f64,
    s: C,
    sum: C,
    used: usize,
}

impl DirectAccumulator {
    fn new(params: &FormParams, qmax: u64, s: C, z: &HalfSpacePoint) -> Result<Self> {
        z.check(params)?;
        if s.re <= params.n as f64 + 0.3 {
            return Err(Error::Divergent(s.re));
        }
        let (a1, aw, b) = height_form(params, z);
        let slope = (a1 * a1 + aw.iter().map(|t| t * t).sum::<f64>()).sqrt();
        // min over the real cone of the height at v_{n+2} = q is q(b - d·slope)
        let lowest = b - params.d as f64 * slope;
        Ok(DirectAccumulator {
            a1,
            aw,
            b,
            x_cut: qmax as f64 * lowest,
            s,
            sum: c(0.0),
            used: 0,
        })
    }

    fn add(&mut self, v1: f64, w: impl Iterator<Item = f64>, q: f64) {
        let mut r = self.a1 * v1 + self.b * q;
        for (wi, a) in w.zip(&self.aw) {
            r += wi * a;
        }
        if r >= self.x_cut {
            return;
        }
        let u = r / self.x_cut;
        let wgt = if u <= U0 { 1.0 } else { weight(u) };
        self.sum += (-self.s * r.ln()).exp() * wgt;
        self.used += 1;
    }

    fn finish(self, params: &FormParams) -> Result<DirectSum> {
        let nf = params.n as f64;
        let om = omega(params)?;
        let w = c(nf) - self.s;
        let corr = weight_mellin(w) * (w * self.x_cut.ln()).exp() * om;
        Ok(DirectSum {
            value: self.sum + corr,
            tail_correction: corr,
            tail_estimate: om * self.x_cut.powf(nf / 2.0 - self.s.re),
            cutoff: self.x_cut,
            points: self.used,
        })
    }
}

/// E(s, g) = Σ_{primitive v} (‖vg‖/‖e₀‖)^{-s} over the given points,
/// with a smooth cutoff at ‖vg‖/‖e₀‖ = X and the cut-off mass restored from
/// the residue at s = n. `qmax` must be the height the points were
/// enumerated to.
pub fn direct_from_points(
    params: &FormParams,
    pts: &PointSet,
    qmax: u64,
    s: C,
    z: &HalfSpacePoint,
) -> Result<DirectSum> {
    let mut acc = DirectAccumulator::new(params, qmax, s, z)?;
    for (p, q) in pts.iter() {
        acc.add(p[0] as f64, p[1..].iter().map(|&x| x as f64), q as f64);
    }
    acc.finish(params)
}

/// E(s, u_x a_y) from the primitive light-cone points up to height
/// `cfg.direct_height_bound`, streamed without storing them.
pub fn eisenstein_direct(params: &FormParams, s: C, z: &HalfSpacePoint, cfg: &TruncationConfig) -> Result<DirectSum> {
    let qmax = if cfg.direct_height_bound == 0 {
        default_height(params)
    } else {
        cfg.direct_height_bound
    };
    let mut acc = DirectAccumulator::new(params, qmax, s, z)?;
    for_each_point(params, qmax, |p, q| {
        acc.add(p[0] as f64, p[1..].iter().map(|&x| x as f64), q as f64)
    })?;
    acc.finish(params)
}

// ---------------------------------------------------------------------------
// Residues and volumes

/// ω_{Q_n} in closed form for 1 ≤ n ≤ 12.
pub fn omega_closed(n: usize) -> Option<f64> {
    let z = |k: f64| zeta(c(k)).unwrap().re;
    let l = |k: f64| dirichlet_l(c(k), &CharSpec::chi_m4()).unwrap().re;
    let v = match n {
        1 => 4.0 / PI,
        2 => 3.0 / l(2.0),
        3 => 60.0 / PI.powi(2),
        4 => 80.0 / (7.0 * z(3.0)),
        5 => 405.0 / PI.powi(3),
        6 => 63.0 / (4.0 * l(4.0)),
        7 => 28350.0 / (17.0 * PI.powi(4)),
        8 => 512.0 / (31.0 * z(5.0)),
        9 => 16065.0 / (4.0 * PI.powi(5)),
        10 => 165.0 / (16.0 * l(6.0)),
        11 => 20945925.0 / (2764.0 * PI.powi(6)),
        12 => 515840.0 / (87757.0 * z(7.0)),
        _ => return None,
    };
    Some(v)
}

/// Residue of Φ_{n,d} at s = n, numerically.
pub fn omega_from_phi(params: &FormParams) -> Result<f64> {
    let (res, _) = residue_circle(|w| phi_const_raw(params, w), c(params.n as f64), 1e-3)?;
    Ok(res.re)
}

/// ω_{Q_{n,d}} = ω_{Q_n} Π_{p|d} ε_n^{(p)}(n).
pub fn omega(params: &FormParams) -> Result<f64> {
    let n = params.n;
    let Some(base) = omega_closed(n) else {
        return omega_from_phi(params);
    };
    let mut out = base;
    for p in prime_divisors(params.d) {
        out *= epsp_const(n, p, c(n as f64))?.re;
    }
    Ok(out)
}

/// v_{P₁} = 2^{2-n}/n! as a reduced fraction (numerator, denominator).
pub fn cusp_volume_vp1(n: usize) -> (u128, u128) {
    let fact: u128 = (1..=n as u128).product();
    let (num, den) = if n <= 2 {
        (1u128 << (2 - n), fact)
    } else {
        (1u128, fact << (n - 2))
    };
    let g = gcd_u128(num, den);
    (num / g, den / g)
}

/// vol(Γ_{Q_n} \ H^{n+1}) in closed form for 1 ≤ n ≤ 12.
pub fn volume_closed(n: usize) -> Option<f64> {
    let z = |k: f64| zeta(c(k)).unwrap().re;
    let l = |k: f64| dirichlet_l(c(k), &CharSpec::chi_m4()).unwrap().re;
    let v = match n {
        1 => PI / 2.0,
        2 => l(2.0) / 6.0,
        3 => PI.powi(2) / 720.0,
        4 => 7.0 * z(3.0) / 7680.0,
        5 => PI.powi(3) / 388800.0,
        6 => l(4.0) / 181440.0,
        7 => 17.0 * PI.powi(4) / 4572288000.0,
        8 => 527.0 * z(5.0) / 22295347200.0,
        9 => PI.powi(5) / 164602368000.0,
        10 => l(6.0) / 5748019200.0,
        11 => 691.0 * PI.powi(6) / 31070342983680000.0,
        12 => 87757.0 * z(7.0) / 24485642108928000.0,
        _ => return None,
    };
    Some(v)
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd_u128(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// R_k(s) = Σ_{q ≥ 1} r_k(q²) q^{-s}

pub fn r_closed(k: usize, s: C) -> Result<C> {
    let one = c(1.0);
    let p2 = |a: f64, b: f64| crate::localzeta::ppow(2, a, b, s);
    let chi = CharSpec::chi_m4();
    match k {
        2 => Ok(zeta(s)?.powi(2) * dirichlet_l(s, &chi)? * 4.0 / ((one + p2(0.0, 1.0)) * zeta(s * 2.0)?)),
        3 => Ok((one - p2(1.0, 1.0)) * zeta(s)? * zeta(s - 1.0)? * 6.0 / dirichlet_l(s, &chi)?),
        4 => Ok((one - p2(2.0, 1.0)) * zeta(s - 1.0)? * zeta(s - 2.0)? * zeta(s)? * 8.0 / zeta(s * 2.0 - 2.0)?),
        6 => Ok(dirichlet_l(s - 2.0, &chi)? * zeta(s - 4.0)? * zeta(s)? * 12.0
            / ((one - p2(2.0, 1.0)) * zeta(s * 2.0 - 4.0)?)),
        8 => Ok((one + p2(1.0, 1.0) * 3.0 + p2(7.0, 2.0)) / (one + p2(3.0, 1.0))
            * zeta(s - 3.0)?
            * zeta(s - 6.0)?
            * zeta(s)?
            * 16.0
            / zeta(s * 2.0 - 6.0)?),
        _ => invalid(format!("no closed form for R_{k}")),
    }
}

/// r_k(q²) for 1 ≤ q ≤ qmax (index q), k ∈ {2,3,4,6,8}, by counting.
pub fn square_rep_counts(k: usize, qmax: usize) -> Result<Vec<f64>> {
    if ![2, 3, 4, 6, 8].contains(&k) {
        return invalid(format!("unsupported k = {k}"));
    }
    let lmax = qmax * qmax;
    let mut r2 = vec![0f64; lmax + 1];
    let mut a = 0usize;
    while a * a <= lmax {
        let mut b = 0usize;
        while a * a + b * b <= lmax {
            let w = if a == 0 { 1.0 } else { 2.0 } * if b == 0 { 1.0 } else { 2.0 };
            r2[a * a + b * b] += w;
            b += 1;
        }
        a += 1;
    }
    let mut out = vec![0f64; qmax + 1];
    match k {
        2 => {
            for q in 1..=qmax {
                out[q] = r2[q * q];
            }
        }
        3 => {
            for q in 1..=qmax {
                let n = q * q;
                out[q] = r2[n] + 2.0 * (1..=q).map(|a| r2[n - a * a]).sum::<f64>();
            }
        }
        _ => {
            let r4 = convolve_self(&r2);
            let sos2: Vec<(usize, f64)> = r2.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(j, &v)| (j, v)).collect();
            for q in 1..=qmax {
                let n = q * q;
                out[q] = match k {
                    4 => r4[n],
                    6 => sos2.iter().take_while(|(j, _)| *j <= n).map(|&(j, v)| v * r4[n - j]).sum(),
                    _ => {
                        let half: f64 = (0..(n + 1) / 2).map(|j| r4[j] * r4[n - j]).sum();
                        let mid = if n % 2 == 0 { r4[n / 2] * r4[n / 2] } else { 0.0 };
                        2.0 * half + mid
                    }
                };
            }
        }
    }
    Ok(out)
}

/// f * f truncated to the length of f, rounded to integers.
fn convolve_self(f: &[f64]) -> Vec<f64> {
    use rustfft::FftPlanner;
    let len = (2 * f.len()).next_power_of_two();
    let mut buf: Vec<C> = f.iter().map(|&v| c(v)).chain(std::iter::repeat(c(0.0))).take(len).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for v in buf.iter_mut() {
        *v = *v * *v;
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf.iter().take(f.len()).map(|v| (v.re / len as f64).round()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RSeries {
    pub value: C,
    /// Estimated Σ_{q > qmax}, already included in `value`.
    pub tail: C,
}

/// Σ_{q > Q} q^{-w} by Euler–Maclaurin.
fn power_tail(w: C, q: f64) -> C {
    let lq = q.ln();
    let p = |e: C| (e * lq).exp();
    p(c(1.0) - w) / (w - 1.0) - p(-w) * 0.5 + w * p(-w - 1.0) / 12.0
        - w * (w + 1.0) * (w + 2.0) * p(-w - 3.0) / 720.0
}

/// Σ_{q ≤ qmax} r_k(q²) q^{-s} plus a tail ρ Σ_{q>qmax} q^{k-2-s}, with the
/// mean ρ of r_k(q²)/q^{k-2} fitted on (qmax/2, qmax].
pub fn r_series(k: usize, s: C, qmax: usize) -> Result<RSeries> {
    let kf = k as f64;
    if s.re <= kf - 1.0 {
        return Err(Error::Divergent(s.re));
    }
    let counts = square_rep_counts(k, qmax)?;
    let term = |q: usize| counts[q] * (-s * (q as f64).ln()).exp();
    let head: C = (1..=qmax).map(term).sum();
    let tail = if k >= 3 {
        let lo = qmax / 2 + 1;
        let num: C = (lo..=qmax).map(term).sum();
        let den: C = (lo..=qmax).map(|q| ((c(kf - 2.0) - s) * (q as f64).ln()).exp()).sum();
        num / den * power_tail(s - kf + 2.0, qmax as f64)
    } else {
        c(0.0)
    };
    Ok(RSeries {
        value: head + tail,
        tail,
    })
}

// ---------------------------------------------------------------------------
// Functional equation and poles

/// |E(n-s, z) - Φ(n-s) E(s, z)| / (|E(s, z)| + 1), d = 1.
pub fn functional_eq_residual(params: &FormParams, s: C, z: &HalfSpacePoint, cfg: &TruncationConfig) -> Result<f64> {
    if params.d != 1 {
        return invalid("the functional equation is stated for d = 1");
    }
    let nf = params.n as f64;
    let e1 = eisenstein_fourier(params, s, z, cfg)?;
    let e2 = eisenstein_fourier(params, c(nf) - s, z, cfg)?;
    let phi = phi_const(params, c(nf) - s)?;
    Ok((e2 - phi * e1).norm() / (e1.norm() + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleReport {
    pub location: C,
    pub residue: C,
}

/// Residue of Φ_{n,d} at s0 (small circle around s0).
pub fn phi_residue(params: &FormParams, s0: C) -> Result<C> {
    Ok(residue_circle(|w| phi_const_raw(params, w), s0, 1e-3)?.0)
}

/// Poles of Φ_{n,d} on the real segment [lo, hi]: sign changes of Φ are
/// bisected, and any point (including the endpoints) whose residue exceeds
/// 1e-6 in modulus is reported.
pub fn pole_scan(params: &FormParams, lo: f64, hi: f64, cfg: &TruncationConfig) -> Result<Vec<PoleReport>> {
    if !(hi > lo) {
        return invalid("empty scan interval");
    }
    let f = |x: f64| phi_const_raw(params, c(x)).map(|v| v.re).unwrap_or(f64::NAN);
    let m = 997;
    let h = (hi - lo) / m as f64;
    // offset keeps the grid off rational points where removable
    // singularities of the displayed formula sit
    let grid: Vec<f64> = (0..m).map(|i| lo + (i as f64 + 0.5 + 0.0123 * ((i % 7) as f64 - 3.0)) * h).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut candidates = vec![lo, hi];
    for i in 0..m - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a.is_finite() && b.is_finite() && a.signum() != b.signum() {
            let (mut x0, mut x1) = (grid[i], grid[i + 1]);
            let s0 = a.signum();
            for _ in 0..80 {
                let mid = 0.5 * (x0 + x1);
                let v = f(mid);
                if !v.is_finite() {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if v.signum() == s0 {
                    x0 = mid;
                } else {
                    x1 = mid;
                }
            }
            candidates.push(0.5 * (x0 + x1));
        }
    }
    let mut out: Vec<PoleReport> = Vec::new();
    for x in candidates {
        let loc = snap(x, cfg.pole_guard.max(1e-12) * 1e4);
        let res = phi_residue(params, c(loc))?;
        if res.norm() > 1e-6 && !out.iter().any(|p| (p.location.re - loc).abs() < 1e-6) {
            out.push(PoleReport {
                location: c(loc),
                residue: res,
            });
        }
    }
    out.sort_by(|a, b| a.location.re.total_cmp(&b.location.re));
    Ok(out)
}

/// Round x to the nearest multiple of 1/2 if it lies within tol of one.
fn snap(x: f64, tol: f64) -> f64 {
    let r = (2.0 * x).round() / 2.0;
    if (x - r).abs() < tol {
        r
    } else {
        x
    }
}

/// A zero of ξ near `guess` by the secant method.
pub fn xi_zero(guess: C) -> Result<C> {
    let (mut a, mut b) = (guess, guess + C::new(0.0, 1e-3));
    let (mut fa, mut fb) = (xi(a)?, xi(b)?);
    for _ in 0..100 {
        if fb == fa {
            break;
        }
        let next = b - fb * (b - a) / (fb - fa);
        a = b;
        fa = fb;
        b = next;
        fb = xi(b)?;
        if (b - a).norm() < 1e-14 * b.norm() {
            return Ok(b);
        }
    }
    if fb.norm() < 1e-12 {
        Ok(b)
    } else {
        Err(Error::InvalidArgument(format!("secant did not converge near {guess}")))
    }
}

/// Pole report for Φ_{n,d} at a given point, if the residue is above 1e-6.
pub fn pole_at(params: &FormParams, s0: C) -> Result<Option<PoleReport>> {
    let res = phi_residue(params, s0)?;
    Ok((res.norm() > 1e-6).then_some(PoleReport {
        location: s0,
        residue: res,
    }))
}
