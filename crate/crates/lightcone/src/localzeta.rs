//! Local zeta factors Z_n^{(p)}, Z̃_n^{(p)}, 𝒵_n^{(2)} and the ε-factors.
//!
//! Every factor exists twice: as a finite Dirichlet polynomial read off the
//! exponential sums, and as the closed rational function in p^{-s}.

use crate::arith::{
    a_const, b_const, char_from_d, chi_m4, divisors, is_squarefree, kronecker, prime_divisors,
    sign_s, ModChar,
};
use crate::error::{invalid, Error, Result};
use crate::expsums::{local_data, norm2, phi_prime_power, s_sum, varphi_closed, DualVector};
use num_complex::Complex64;

type C = Complex64;

/// Distance to a denominator zero below which evaluation errors.
pub const POLE_GUARD: f64 = 1e-8;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// p^{a - b s}.
pub fn ppow(p: u64, a: f64, b: f64, s: C) -> C {
    ((c(a) - s * b) * (p as f64).ln()).exp()
}

fn guard(den: C, s: C) -> Result<C> {
    if den.norm() < POLE_GUARD {
        Err(Error::LocalPole { re: s.re, im: s.im })
    } else {
        Ok(den)
    }
}

fn div(num: C, den: C, s: C) -> Result<C> {
    Ok(num / guard(den, s)?)
}

/// (1 - q^e)/(1 - q) as a finite sum; for e < 0 this is -Σ_{e ≤ k < 0} q^k.
fn geom(q: C, e: i64) -> C {
    if e >= 0 {
        (0..e).map(|k| q.powi(k as i32)).sum()
    } else {
        -(e..0).map(|k| q.powi(k as i32)).sum::<C>()
    }
}

fn pm(e: i64) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_prime_odd(p: u64) -> Result<()> {
    if p % 2 == 0 || !crate::arith::is_prime(p) {
        return invalid(format!("{p} is not an odd prime"));
    }
    Ok(())
}

/// A local factor numerator(X) / Π (1 - c p^{a - b s}) with X = p^{-s}.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFactor {
    pub p: u64,
    pub numerator: Vec<C>,
    pub denominator_terms: Vec<(C, f64, f64)>,
}

impl LocalFactor {
    pub fn polynomial(p: u64, numerator: Vec<C>) -> Self {
        LocalFactor {
            p,
            numerator,
            denominator_terms: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.numerator.len().saturating_sub(1)
    }

    pub fn eval(&self, s: C) -> Result<C> {
        let x = ppow(self.p, 0.0, 1.0, s);
        let num = self.numerator.iter().rev().fold(c(0.0), |acc, &a| acc * x + a);
        let mut den = c(1.0);
        for &(k, a, b) in &self.denominator_terms {
            den *= guard(c(1.0) - k * ppow(self.p, a, b, s), s)?;
        }
        Ok(num / den)
    }

    /// Multiply the numerator by another polynomial in X.
    pub fn times_poly(mut self, q: &[C]) -> Self {
        let mut out = vec![c(0.0); self.numerator.len() + q.len() - 1];
        for (i, &a) in self.numerator.iter().enumerate() {
            for (j, &b) in q.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        self.numerator = out;
        self
    }
}

// ---------------------------------------------------------------------------
// Series path

/// Coefficients φ_n(p^k; m), k = 0..=α_p+1, of Z_n^{(p)} in X = χ(p)p^{-s}.
pub fn z_coeffs(n: usize, p: u64, m: &[i64]) -> Result<Vec<C>> {
    let Some(alpha) = local_data(m, p).alpha else {
        return Err(Error::InfiniteValuation);
    };
    Ok((0..=alpha + 1).map(|k| phi_prime_power(n, p, k, m)).collect())
}

/// Σ_k χ(p)^k φ_n(p^k; m) p^{-ks}: exact for m ≠ 0, summed to
/// convergence for m = 0 (needs Re s > n).
pub fn z_series(n: usize, p: u64, s: C, chi_p: C, m: &[i64]) -> Result<C> {
    let x = chi_p * ppow(p, 0.0, 1.0, s);
    if chi_p == c(0.0) {
        return Ok(c(1.0));
    }
    if norm2(m) != 0 {
        let cf = z_coeffs(n, p, m)?;
        return Ok(cf.iter().rev().fold(c(0.0), |acc, &a| acc * x + a));
    }
    const_series(n, p, s, |k| x.powi(k as i32) * phi_prime_power(n, p, k, m))
}

/// Σ_k χ(p)^{k+2} φ_n(p^{k+2}; m) p^{-(k+1)s}.
pub fn zt_series(n: usize, p: u64, s: C, chi_p: C, m: &[i64]) -> Result<C> {
    let x = chi_p * ppow(p, 0.0, 1.0, s);
    if norm2(m) != 0 {
        let cf = z_coeffs(n, p, m)?;
        return Ok(cf
            .iter()
            .enumerate()
            .skip(2)
            .map(|(k, &a)| a * chi_p * x.powi(k as i32 - 1))
            .sum());
    }
    const_series(n, p, s, |k| {
        chi_p * x.powi(k as i32 + 1) * phi_prime_power(n, p, k + 2, m)
    })
}

fn const_series(n: usize, p: u64, s: C, term: impl Fn(u32) -> C) -> Result<C> {
    if s.re <= n as f64 {
        return Err(Error::Divergent(s.re));
    }
    // the terms grow like p^{(n-1)k}; stop before that overflows
    let kmax = (900.0 / (n as f64 * (p as f64).log2())) as u32;
    let mut sum = c(0.0);
    let mut small = 0;
    for k in 0..=kmax {
        let t = term(k);
        sum += t;
        if k >= 4 && t.norm() <= 1e-17 * sum.norm().max(1e-300) {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Divergent(s.re))
}

// ---------------------------------------------------------------------------
// Closed forms at λ = 0

/// Z_n^{(p)}(s; 0).
pub fn z_const_closed(n: usize, p: u64, s: C) -> Result<C> {
    let pp = |a: f64, b: f64| ppow(p, a, b, s);
    let nf = n as f64;
    if p == 2 {
        let (an, bn) = (a_const(n as i64), b_const(n as i64));
        let num = c(1.0) - pp(nf, 2.0) + pp(nf - 2.0, 2.0) * an + pp(2.0 * nf - 3.0, 3.0) * bn;
        let den = (c(1.0) - pp(nf - 1.0, 1.0)) * (c(1.0) - pp(nf, 2.0));
        return div(num, den, s);
    }
    check_prime_odd(p)?;
    if n % 2 == 0 {
        let ch = (chi_m4(p as i64) as f64).powi(n as i32 / 2);
        let num = c(1.0) - pp(nf / 2.0 - 1.0, 1.0) * ch;
        let den = (c(1.0) - pp(nf - 1.0, 1.0)) * (c(1.0) - pp(nf / 2.0, 1.0) * ch);
        div(num, den, s)
    } else {
        let num = c(1.0) - pp(nf - 1.0, 2.0);
        let den = (c(1.0) - pp(nf, 2.0)) * (c(1.0) - pp(nf - 1.0, 1.0));
        div(num, den, s)
    }
}

/// φ̂_n(p; 0) + Z̃_n^{(p)}(s; 0).
pub fn zc_const_closed(n: usize, p: u64, s: C) -> Result<C> {
    let pp = |a: f64, b: f64| ppow(p, a, b, s);
    let nf = n as f64;
    let one = c(1.0);
    if p == 2 {
        let lead = 2f64.powi(n as i32 - 1);
        let d1 = one - pp(nf - 1.0, 1.0);
        let v = match n % 4 {
            0 => {
                let k = 1.0 - pm(n as i64 / 4);
                div(one - pp(nf / 2.0, 1.0) * k, d1 * (one - pp(nf / 2.0, 1.0)), s)?
            }
            2 => div(one, d1, s)?,
            r => {
                let e = if r == 1 { (n as i64 - 1) / 4 } else { (n as i64 + 1) / 4 };
                let num = one - pp(nf, 2.0) + pp((nf - 1.0) / 2.0, 1.0) * pm(e);
                div(num, d1 * (one - pp(nf, 2.0)), s)?
            }
        };
        return Ok(v * lead);
    }
    check_prime_odd(p)?;
    let pf = p as f64;
    if n % 2 == 0 {
        let ch = (chi_m4(p as i64) as f64).powi(n as i32 / 2);
        let num = c(pf.powi(n as i32 - 1)) + pp(nf, 1.0)
            - ch * pf.powf(nf / 2.0 - 1.0)
            - pp(2.0 * nf - 1.0, 2.0);
        let den = (one - pp(nf - 1.0, 1.0)) * (one - pp(nf / 2.0, 1.0) * ch);
        div(num, den, s)
    } else {
        let ch = (chi_m4(p as i64) as f64).powi((n as i32 + 1) / 2);
        let num = (one - pp((nf - 1.0) / 2.0, 1.0) * ch)
            * (pp(nf, 1.0) + pf.powi(n as i32 - 1) + ch * pf.powf((nf - 1.0) / 2.0)
                - pp(2.0 * nf - 1.0, 2.0));
        let den = (one - pp(nf, 2.0)) * (one - pp(nf - 1.0, 1.0));
        div(num, den, s)
    }
}

// ---------------------------------------------------------------------------
// Closed forms at λ ≠ 0

/// Z_n^{(p)}(s; χ, λ) for an odd prime p ∤ ‖2λ‖².
pub fn z_unramified(n: usize, p: u64, s: C, chi_p: C, lam: &DualVector) -> Result<C> {
    check_prime_odd(p)?;
    if lam.norm2 % p as i64 == 0 {
        return invalid(format!("{p} divides the norm"));
    }
    let nf = n as f64;
    if n % 2 == 0 {
        let ch = (chi_m4(p as i64) as f64).powi(n as i32 / 2);
        Ok(c(1.0) - chi_p * ch * ppow(p, nf / 2.0 - 1.0, 1.0, s))
    } else {
        let cd = kronecker(lam.disc(), p as i64) as f64;
        Ok(c(1.0) + chi_p * cd * ppow(p, (nf - 1.0) / 2.0, 1.0, s))
    }
}

/// Z_n^{(p)}(s; λ) for an odd prime p | ‖2λ‖², with χ(p) folded into X.
pub fn z_ramified_closed(n: usize, p: u64, s: C, chi_p: C, lam: &DualVector) -> Result<C> {
    check_prime_odd(p)?;
    let ld = lam.local(p);
    let alpha = ld.alpha.unwrap() as i64;
    let ell = ld.ell.unwrap() as i64;
    if alpha == 0 {
        return invalid(format!("{p} does not divide the norm"));
    }
    let pf = p as f64;
    let nf = n as f64;
    let y = chi_p * ppow(p, 0.0, 1.0, s);
    let one = c(1.0);
    let g1 = geom(y * pf.powi(n as i32 - 1), ell + 1);
    let g2 = geom((y * pf).inv(), ell + 1);
    // (p^{n/2} Y)^{α+1}
    let top = y.powi(alpha as i32 + 1) * pf.powf(nf / 2.0 * (alpha + 1) as f64);
    if n % 2 == 0 {
        let ch = (chi_m4(p as i64) as f64).powi(n as i32 / 2);
        let a = div(one - y * ch * pf.powf(nf / 2.0 - 1.0), one - y * ch * pf.powf(nf / 2.0), s)?;
        Ok(a * (g1 - top * ch.powi(alpha as i32 + 1) * g2))
    } else if alpha % 2 == 1 {
        let a = div(one - y * y * pf.powi(n as i32 - 1), one - y * y * pf.powi(n as i32), s)?;
        Ok(a * (g1 - top * g2))
    } else {
        let ch = char_from_d(lam.disc())?.eval(p as i64) as f64;
        let h = pf.powf((nf - 1.0) / 2.0);
        let a = div(one + y * ch * h, one - y * y * pf.powi(n as i32), s)?;
        let b = (one - y * ch * h) * g1 + top * ch / pf.sqrt() * (one - y * ch * h * pf) * g2;
        Ok(a * b)
    }
}

/// Z_n^{(2)}(s; λ), both parities of α₂.
pub fn z2_closed(n: usize, s: C, lam: &DualVector) -> Result<C> {
    let ld = lam.local(2);
    let alpha = ld.alpha.unwrap() as i64;
    let ell = ld.ell.unwrap() as i64;
    let t = ld.t;
    let ni = n as i64;
    let nf = n as f64;
    let one = c(1.0);
    let y = ppow(2, 0.0, 1.0, s);
    let q1 = y * 2f64.powi(n as i32 - 1);
    let qs = (y * 2.0).inv();
    let w = y * y * 2f64.powi(n as i32);
    let k = c(a_const(ni) / 4.0) + y * 2f64.powi(n as i32 - 3) * b_const(ni);
    let one_w = guard(one - w, s)?;
    let base = geom(q1, ell + 1) + if ld.delta { q1.powi(ell as i32 + 1) } else { c(0.0) };
    let hp = |e: i64| y.powi(e as i32) * 2f64.powf(nf / 2.0 * e as f64);
    if alpha % 2 == 1 {
        Ok(base + w * k * geom(q1, ell) / one_w
            - hp(alpha - 1)
                * geom(qs, ell)
                * (c(a_const(ni) / 4.0) - y * 2f64.powi(n as i32 - 3) * b_const(ni - 2 * t)
                    + k / one_w))
    } else {
        let dl = if alpha == 2 * ell { 1 } else { 0 };
        let mid = c(pm((t + 1) / 2) / 8.0 * a_const(ni + 2))
            + y * 2f64.powi(n as i32 - 3) * b_const(ni - t);
        Ok(base + w * k * geom(q1, ell - dl) / one_w + hp(alpha) * geom(qs, ell) * mid
            - hp(alpha) * geom(qs, ell - dl) * (y.inv() / 4.0 * b_const(ni) + k / one_w))
    }
}

/// 𝒵_n^{(2)}(s; λ) from its closed cases.
pub fn calz2_closed(n: usize, s: C, lam: &DualVector) -> Result<C> {
    let ld = lam.local(2);
    let alpha = ld.alpha.unwrap() as i64;
    let ell = ld.ell.unwrap() as i64;
    if ell == 0 {
        return Ok(c(-1.0));
    }
    let t = ld.t;
    let ni = n as i64;
    let nf = n as f64;
    let one = c(1.0);
    let y = ppow(2, 0.0, 1.0, s);
    let q1 = y * 2f64.powi(n as i32 - 1);
    let qs = (y * 2.0).inv();
    let hp = |e: i64| y.powi(e as i32) * 2f64.powf(nf / 2.0 * e as f64);
    let dl = if alpha == 2 * ell { 1 } else { 0 };
    let base = geom(q1, ell) + if ld.delta { q1.powi(ell as i32) } else { c(0.0) };
    let sn = sign_s(ni) as f64;
    match ni.rem_euclid(4) {
        2 => Ok(base + hp(alpha - 1) * geom(qs, ell) * pm((ni - 2 * t).div_euclid(4))),
        0 => {
            let sg = pm(ni / 4);
            let h = y * 2f64.powf(nf / 2.0);
            let dh = guard(one - h, s)?;
            Ok(base + h * geom(q1, ell - dl) * sg / dh
                - hp(alpha - 2) * 2.0 * sg * (one - y * 2f64.powf(nf / 2.0 - 1.0))
                    * geom(qs, ell - dl)
                    / dh)
        }
        _ => {
            let dw = guard(one - y * y * 2f64.powi(n as i32), s)?;
            let h = 2f64.powf((nf - 1.0) / 2.0);
            if alpha % 2 == 1 {
                Ok((one + y * sn * h * 2.0) * (one - y * sn * h) * geom(q1, ell) / dw
                    - hp(alpha - 2) * sn * 2f64.sqrt()
                        * (one - y * y * 2f64.powi(n as i32 - 1))
                        * geom(qs, ell)
                        / dw)
            } else {
                Ok(base + y * sn * h * geom(q1, ell - dl) / dw
                    + hp(alpha - 1)
                        * 2f64.powf(1.0 - nf / 2.0)
                        * geom(qs, ell)
                        * (y * 2f64.powi(n as i32 - 3) * b_const(ni - t)
                            - c(pm((ni + t) / 2) * sn * 2f64.powf((nf - 3.0) / 2.0)))
                    - hp(alpha - 1) * sn / 2f64.sqrt() * geom(qs, ell - dl) / dw)
            }
        }
    }
}

/// 𝒵_n^{(2)} = 2^{1-n+s}(Z_n^{(2)} - 1) + (-1)^{m₁} - 1, given Z_n^{(2)}.
pub fn calz2_relation(n: usize, s: C, z2: C, lam: &DualVector) -> C {
    ppow(2, 1.0 - n as f64, -1.0, s) * (z2 - 1.0) + lam.sign_m1() - 1.0
}

/// 𝒵_n^{(2)}(s; χ, λ) = (-1)^{m₁} + 2^{1-n} Z̃_n^{(2)}(s; χ, λ) as a polynomial in 2^{-s}.
pub fn calz2_factor(n: usize, chi2: C, lam: &DualVector) -> Result<LocalFactor> {
    let cf = z_coeffs(n, 2, &lam.m)?;
    let scale = 2f64.powi(1 - n as i32);
    let mut num = vec![c(lam.sign_m1())];
    for (k, &a) in cf.iter().enumerate().skip(2) {
        num.push(a * chi2.powi(k as i32) * scale);
    }
    Ok(LocalFactor::polynomial(2, num))
}

/// χ_D(2) for odd n, from the 2-adic data of λ.
pub fn chi_d_at_2(n: usize, lam: &DualVector) -> Result<i32> {
    if n % 2 == 0 {
        return invalid("χ_D is attached to odd n");
    }
    let ld = lam.local(2);
    let (alpha, t) = (ld.alpha.unwrap(), ld.t);
    let ni = n as i64;
    if alpha % 2 == 0 && (t - ni).rem_euclid(4) == 0 {
        Ok(pm((ni - t).div_euclid(4)) as i32 * sign_s(ni))
    } else {
        Ok(0)
    }
}

// ---------------------------------------------------------------------------
// ε-factors

/// The unramified factor U_p(s) that Z_n^{(p)} equals for p ∤ 2d‖2λ‖².
fn unramified(n: usize, p: u64, chi_d: &dyn Fn(u64) -> f64) -> LocalFactor {
    let nf = n as f64;
    let one = c(1.0);
    if n % 2 == 0 {
        let ch = if p == 2 {
            if n % 4 == 0 { 1.0 } else { 0.0 }
        } else {
            (chi_m4(p as i64) as f64).powi(n as i32 / 2)
        };
        // 1 - ch p^{n/2-1-s}
        let mut num = vec![one];
        if ch != 0.0 {
            num.push(c(-ch * (p as f64).powf(nf / 2.0 - 1.0)));
        }
        LocalFactor::polynomial(p, num)
    } else {
        let cd = chi_d(p);
        LocalFactor {
            p,
            numerator: vec![one, c(0.0), c(-(p as f64).powi(n as i32 - 1))],
            denominator_terms: vec![(c(cd), (nf - 1.0) / 2.0, 1.0)],
        }
    }
}

fn chi_d_fn(n: usize, lam: &DualVector) -> Result<impl Fn(u64) -> f64> {
    let spec = if n % 2 == 1 {
        Some(char_from_d(lam.disc())?)
    } else {
        None
    };
    Ok(move |p: u64| spec.as_ref().map_or(0.0, |ch| ch.eval(p as i64) as f64))
}

/// ε_n^{(p)}(s; λ) for d = 1 from the definitional polynomials.
pub fn eps_prime_series(n: usize, p: u64, s: C, lam: &DualVector) -> Result<C> {
    let chd = chi_d_fn(n, lam)?;
    let num = if p == 2 {
        calz2_factor(n, c(1.0), lam)?.eval(s)?
    } else {
        z_series(n, p, s, c(1.0), &lam.m)?
    };
    Ok(num / guard(unramified(n, p, &chd).eval(s)?, s)?)
}

/// ε_n^{(p)}(s; λ) for d = 1 from the closed forms.
pub fn eps_prime_closed(n: usize, p: u64, s: C, lam: &DualVector) -> Result<C> {
    let nf = n as f64;
    let one = c(1.0);
    if p == 2 {
        let z = calz2_closed(n, s, lam)?;
        return match n % 4 {
            0 => div(z, one - ppow(2, nf / 2.0 - 1.0, 1.0, s), s),
            2 => Ok(z),
            _ => {
                let cd = chi_d_at_2(n, lam)? as f64;
                div(
                    (one - ppow(2, (nf - 1.0) / 2.0, 1.0, s) * cd) * z,
                    one - ppow(2, nf - 1.0, 2.0, s),
                    s,
                )
            }
        };
    }
    let z = z_ramified_closed(n, p, s, c(1.0), lam)?;
    if n % 2 == 0 {
        let ch = (chi_m4(p as i64) as f64).powi(n as i32 / 2);
        div(z, one - ppow(p, nf / 2.0 - 1.0, 1.0, s) * ch, s)
    } else {
        let cd = char_from_d(lam.disc())?.eval(p as i64) as f64;
        div(
            (one - ppow(p, (nf - 1.0) / 2.0, 1.0, s) * cd) * z,
            one - ppow(p, nf - 1.0, 2.0, s),
            s,
        )
    }
}

fn bad_primes(n: usize, lam: &DualVector) -> Result<Vec<u64>> {
    if lam.n() != n {
        return invalid("dimension of λ differs from n");
    }
    let mut ps = prime_divisors(2 * lam.norm2 as u64);
    ps.dedup();
    Ok(ps)
}

/// ε_n(s; λ) for d = 1 as the product of the closed local factors.
pub fn eps_lambda_closed(n: usize, s: C, lam: &DualVector) -> Result<C> {
    let mut out = c(1.0);
    for p in bad_primes(n, lam)? {
        out *= eps_prime_closed(n, p, s, lam)?;
    }
    Ok(out)
}

/// ε_n(s; λ) for d = 1 as the product of the definitional local factors.
pub fn eps_lambda_series(n: usize, s: C, lam: &DualVector) -> Result<C> {
    let mut out = c(1.0);
    for p in bad_primes(n, lam)? {
        out *= eps_prime_series(n, p, s, lam)?;
    }
    Ok(out)
}

/// ε_{n,d}(s; λ): the Dirichlet series Σ_t 2^{1-n} φ_{n,d}(t; λ) t^{-s}
/// divided by its L-ratio.
///
/// For d = 1 this is the closed product (with the polynomial path at
/// removable singularities). For d > 1 the series has the Euler product
/// Π_{p ∤ 2d} Z_p · Π_{p | 2d} (φ̂_n(p; (2d/p)⁻¹m) + Z̃_p), which holds for the
/// corrected composite sums; every prime factor is then divided by U_p.
pub fn eps_lambda(n: usize, d: u64, s: C, lam: &DualVector) -> Result<C> {
    if d % 2 == 0 || !is_squarefree(d) {
        return invalid(format!("d = {d} must be odd and squarefree"));
    }
    if d == 1 {
        return match eps_lambda_closed(n, s, lam) {
            Err(Error::LocalPole { .. }) => eps_lambda_series(n, s, lam),
            r => r,
        };
    }
    let chd = chi_d_fn(n, lam)?;
    let mut primes = bad_primes(n, lam)?;
    primes.extend(prime_divisors(d));
    primes.sort_unstable();
    primes.dedup();
    let mut out = c(1.0);
    for p in primes {
        let u = guard(unramified(n, p, &chd).eval(s)?, s)?;
        let num = if p == 2 {
            calz2_factor(n, c(1.0), lam)?.eval(s)?
        } else if d % p == 0 {
            let other = (2 * d / p) as i64;
            let inv = crate::arith::inv_mod(other, p as i64).unwrap();
            let tm: Vec<i64> = lam.m.iter().map(|x| x * inv).collect();
            varphi_closed(n, p, &tm)? + zt_series(n, p, s, c(1.0), &lam.m)?
        } else {
            z_series(n, p, s, c(1.0), &lam.m)?
        };
        out *= num / u;
    }
    Ok(out)
}

/// The ε-factor ε_n(s; χ, λ) attached to a character χ mod d₁ | d in the
/// character-sum expansion: the local pieces at 2, at p | d/d₁ and at
/// p | ‖2λ‖², with the χ-twisted unramified factors divided out.
pub fn eps_lambda_char(n: usize, d: u64, s: C, lam: &DualVector, chi: &ModChar) -> Result<C> {
    let d1 = chi.modulus;
    if d % d1 != 0 || d % 2 == 0 || !is_squarefree(d) {
        return invalid("need d odd squarefree and d1 | d");
    }
    let chd = chi_d_fn(n, lam)?;
    let nf = n as f64;
    let one = c(1.0);
    // U_p^χ
    let unram = |p: u64, x: C| -> Result<C> {
        let y = x * ppow(p, 0.0, 1.0, s);
        let pf = p as f64;
        let v = if n % 4 == 0 {
            one - y * pf.powf(nf / 2.0 - 1.0)
        } else if n % 2 == 0 {
            one - y * chi_m4(p as i64) as f64 * pf.powf(nf / 2.0 - 1.0)
        } else {
            div(
                one - y * y * pf.powi(n as i32 - 1),
                one - y * chd(p) * pf.powf((nf - 1.0) / 2.0),
                s,
            )?
        };
        guard(v, s)
    };
    let mut primes = bad_primes(n, lam)?;
    primes.extend(prime_divisors(d));
    primes.sort_unstable();
    primes.dedup();
    let mut out = calz2_factor(n, chi.eval(2), lam)?.eval(s)?;
    out *= chi.eval((2 * d / d1) as i64).conj() * s_sum(d1, chi, &lam.m)?;
    for p in primes {
        let x = chi.eval(p as i64);
        if p == 2 {
            out /= unram(2, x)?;
        } else if d % p == 0 {
            if d1 % p != 0 {
                out *= zt_series(n, p, s, x, &lam.m)?;
            }
            out /= unram(p, x)?;
        } else {
            out *= z_series(n, p, s, x, &lam.m)? / unram(p, x)?;
        }
    }
    Ok(out)
}

/// ε_n^{(2)}(s) at λ = 0.
pub fn eps2_const(n: usize, s: C) -> Result<C> {
    let nf = n as f64;
    let one = c(1.0);
    let ni = n as i64;
    match ni % 4 {
        0 => div(
            ppow(2, -nf / 2.0 - 1.0, -1.0, s) - (1.0 - pm(ni / 4)) / 2.0,
            one - ppow(2, nf / 2.0 - 1.0, 1.0, s),
            s,
        ),
        2 => Ok(ppow(2, -nf / 2.0, -1.0, s)),
        _ => {
            let sn = sign_s(ni) as f64;
            div(
                ppow(2, -(nf + 1.0) / 2.0, -1.0, s) + sn,
                one + ppow(2, (nf - 1.0) / 2.0, 1.0, s) * sn,
                s,
            )
        }
    }
}

/// ε_n^{(p)}(s) at λ = 0 for an odd prime p | d.
pub fn epsp_const(n: usize, p: u64, s: C) -> Result<C> {
    check_prime_odd(p)?;
    let pf = p as f64;
    let nf = n as f64;
    let one = c(1.0);
    let pp = |a: f64, b: f64| ppow(p, a, b, s);
    if n % 2 == 0 {
        let ch = (chi_m4(p as i64) as f64).powi(n as i32 / 2);
        div(
            c(pf.powi(n as i32 - 1)) + pp(nf, 1.0) - ch * pf.powf(nf / 2.0 - 1.0) - pp(2.0 * nf - 1.0, 2.0),
            one - pp(nf / 2.0 - 1.0, 1.0) * ch,
            s,
        )
    } else {
        let ch = (chi_m4(p as i64) as f64).powi((n as i32 + 1) / 2);
        div(
            (one - pp((nf - 1.0) / 2.0, 1.0) * ch)
                * (pp(nf, 1.0) + pf.powi(n as i32 - 1) + ch * pf.powf((nf - 1.0) / 2.0)
                    - pp(2.0 * nf - 1.0, 2.0)),
            one - pp(nf - 1.0, 2.0),
            s,
        )
    }
}

/// ε_{n,d}(s) = d^{s-n} Π_{p | 2d} ε_n^{(p)}(s).
pub fn eps_const(n: usize, d: u64, s: C) -> Result<C> {
    if d % 2 == 0 || !is_squarefree(d) {
        return invalid(format!("d = {d} must be odd and squarefree"));
    }
    let mut out = eps2_const(n, s)? * ((s - n as f64) * (d as f64).ln()).exp();
    for p in prime_divisors(d) {
        out *= epsp_const(n, p, s)?;
    }
    Ok(out)
}

/// ε_{n,d}(s) rebuilt from the local zeta functions at λ = 0, i.e. the
/// ratio of the factors at p | 2d to their unramified counterparts.
pub fn eps_const_euler(n: usize, d: u64, s: C) -> Result<C> {
    if d % 2 == 0 || !is_squarefree(d) {
        return invalid(format!("d = {d} must be odd and squarefree"));
    }
    let nf = n as f64;
    let one = c(1.0);
    let zc2 = zc_const_closed(n, 2, s)?;
    let e2 = match n % 4 {
        0 => {
            let unr = div(
                one - ppow(2, nf / 2.0 - 1.0, 1.0, s),
                (one - ppow(2, nf - 1.0, 1.0, s)) * (one - ppow(2, nf / 2.0, 1.0, s)),
                s,
            )?;
            ppow(2, -1.5 * nf, -1.0, s) * zc2 / guard(unr, s)?
        }
        2 => ppow(2, 1.0 - 1.5 * nf, -1.0, s) * zc2 * (one - ppow(2, nf - 1.0, 1.0, s)),
        _ => {
            let unr = div(
                one - ppow(2, nf - 1.0, 2.0, s),
                (one - ppow(2, nf, 2.0, s)) * (one - ppow(2, nf - 1.0, 1.0, s)),
                s,
            )?;
            ppow(2, -(3.0 * nf - 1.0) / 2.0, -1.0, s) * zc2 / guard(unr, s)?
        }
    };
    let mut out = e2 * ((s - nf) * (d as f64).ln()).exp();
    for p in prime_divisors(d) {
        out *= zc_const_closed(n, p, s)? / guard(z_const_closed(n, p, s)?, s)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Functional equations, divisor form, bounds

/// ε_n(n-s; λ) - R(s) ε_n(s; λ) for d = 1, n ≢ 0 mod 8.
pub fn eps_functional_eq_residual(n: usize, s: C, lam: &DualVector) -> Result<C> {
    Ok(eps_lambda(n, 1, c(n as f64) - s, lam)? - eps_fe_factor(n, s, lam)? * eps_lambda(n, 1, s, lam)?)
}

/// The factor R(s) with ε_n(n-s; λ) = R(s) ε_n(s; λ).
pub fn eps_fe_factor(n: usize, s: C, lam: &DualVector) -> Result<C> {
    let nf = n as f64;
    let ni = n as i64;
    let one = c(1.0);
    let sn = sign_s(ni) as f64;
    let norm_pow = ((s - nf / 2.0) * (lam.norm2 as f64).ln()).exp();
    let r = match ni % 8 {
        0 => return invalid("no functional equation of this shape for n ≡ 0 mod 8"),
        4 => {
            ppow(2, nf, 2.0, s)
                * div(
                    one - ppow(2, nf / 2.0 - 1.0, 1.0, s),
                    one - ppow(2, -1.0 - nf / 2.0, -1.0, s),
                    s,
                )?
        }
        2 | 6 => ppow(2, nf / 2.0, 1.0, s),
        _ => {
            let q = char_from_d(lam.disc())?.q as f64;
            let qpow = ((c(nf / 2.0) - s) * q.ln()).exp();
            (one + ppow(2, (nf - 1.0) / 2.0, 1.0, s) * sn) * ppow(2, (nf + 1.0) / 2.0, 1.0, s) * qpow
                / guard(one + ppow(2, (nf + 1.0) / 2.0, 1.0, s) * sn, s)?
        }
    };
    Ok(r * sn * norm_pow)
}

/// The factor with ε_n^{(p)}(n-s; λ) = factor · ε_n^{(p)}(s; λ).
pub fn eps_prime_fe_factor(n: usize, p: u64, s: C, lam: &DualVector) -> Result<C> {
    let ld = lam.local(p);
    let alpha = ld.alpha.unwrap() as f64;
    let nf = n as f64;
    let ni = n as i64;
    let one = c(1.0);
    let sh = s - nf / 2.0;
    let pw = |p: u64, e: f64| (sh * e * (p as f64).ln()).exp();
    if p != 2 {
        if n % 2 == 0 {
            let ch = (chi_m4(p as i64) as f64).powi((n as i32 / 2) * alpha as i32);
            return Ok(pw(p, alpha) * ch);
        }
        let e = if ld.alpha.unwrap() % 2 == 1 { alpha - 1.0 } else { alpha };
        return Ok(pw(p, e));
    }
    let t = ld.t;
    let sn = sign_s(ni) as f64;
    match ni % 8 {
        4 => Ok(pw(2, alpha - 2.0)
            * div(
                one - ppow(2, nf / 2.0 - 1.0, 1.0, s),
                one - ppow(2, -nf / 2.0 - 1.0, -1.0, s),
                s,
            )?),
        2 | 6 => Ok(pw(2, alpha - 1.0) * pm((ni - 2 * t).div_euclid(4))),
        0 => invalid("no per-prime functional equation at 2 for n ≡ 0 mod 8"),
        _ => {
            let e = if ld.alpha.unwrap() % 2 == 1 {
                alpha - 4.0
            } else if (t - ni).rem_euclid(4) == 0 {
                alpha - 1.0
            } else {
                alpha - 3.0
            };
            Ok(pw(2, e)
                * sn
                * 2f64.sqrt()
                * div(
                    one + ppow(2, (nf - 1.0) / 2.0, 1.0, s) * sn,
                    one + ppow(2, (nf + 1.0) / 2.0, 1.0, s) * sn,
                    s,
                )?)
        }
    }
}

/// τ_w(m; χ) = Σ_{d | m} χ(d) d^w.
pub fn tau(w: C, m: u64, chi: impl Fn(u64) -> f64) -> C {
    divisors(m)
        .into_iter()
        .map(|d| ((d as f64).ln() * w).exp() * chi(d))
        .sum()
}

/// ε_n(s; λ) for even n and d = 1 as ε^{(2)} times a twisted divisor sum.
pub fn eps_divisor_form(n: usize, s: C, lam: &DualVector) -> Result<C> {
    if n % 2 == 1 {
        return invalid("the divisor form needs even n");
    }
    let ld = lam.local(2);
    let a = (lam.gcd.unsigned_abs()) >> ld.ell.unwrap();
    let b = (lam.norm2 as u64) >> ld.alpha.unwrap();
    let nf = n as f64;
    let chi = |d: u64| (chi_m4(d as i64) as f64).powi(n as i32 / 2);
    let mut sum = c(0.0);
    for d in divisors(a) {
        let w = c(nf / 2.0) - s;
        sum += ((c(nf - 1.0) - s) * (d as f64).ln()).exp() * tau(w, b / (d * d), chi);
    }
    Ok(eps_prime_closed(n, 2, s, lam)? * sum)
}

/// ε_2^{(2)}(s; λ): -1 when 2λ has an odd entry (so ℓ₂ = 0 and α₂ = 1),
/// τ_{1-s}(2^{α₂-1}) otherwise.
pub fn eps2_n2_divisor(s: C, lam: &DualVector) -> C {
    let ld = lam.local(2);
    if ld.ell.unwrap() == 0 {
        c(-1.0)
    } else {
        tau(c(1.0) - s, 1 << (ld.alpha.unwrap() - 1), |_| 1.0)
    }
}

/// (1+δ_{p,2})(α_p+1)(ℓ_p+1) p^{(n/2-1)ℓ_p}, the bound for |ε_n^{(p)}| on Re s = n/2.
pub fn critical_line_bound(n: usize, p: u64, lam: &DualVector) -> f64 {
    let ld = lam.local(p);
    let (alpha, ell) = (ld.alpha.unwrap() as f64, ld.ell.unwrap() as f64);
    let two = if p == 2 { 2.0 } else { 1.0 };
    two * (alpha + 1.0) * (ell + 1.0) * (p as f64).powf((n as f64 / 2.0 - 1.0) * ell)
}
