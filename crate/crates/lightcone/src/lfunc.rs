//! Γ, ζ, Hurwitz ζ, real Dirichlet L-functions, their completions, and K_ν.

use crate::arith::CharSpec;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

// B_{2j}/(2j)! for j = 1..=10
const BERN_OVER_FACT: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3_617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn nonpositive_integer(s: C) -> Option<f64> {
    if s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round() {
        Some(s.re)
    } else {
        None
    }
}

/// log sin(πs), stable for large |Im s|; the branch is irrelevant after exp.
fn ln_sin_pi(s: C) -> C {
    if s.im > 20.0 {
        // sin(πs) = (i/2) e^{-iπs} (1 - e^{2πis})
        let w = (C::i() * 2.0 * PI * s).exp();
        -C::i() * PI * s + C::new(0.5f64.ln(), PI / 2.0) + (c(1.0) - w).ln()
    } else if s.im < -20.0 {
        ln_sin_pi(s.conj()).conj()
    } else {
        (s * PI).sin().ln()
    }
}

/// log Γ(s) (some branch), Lanczos with reflection.
pub fn ln_gamma(s: C) -> Result<C> {
    if let Some(k) = nonpositive_integer(s) {
        return Err(Error::GammaPole(k));
    }
    if s.re < 0.5 {
        return Ok(c(PI.ln()) - ln_sin_pi(s) - ln_gamma(c(1.0) - s)?);
    }
    let z = s - 1.0;
    let mut a = c(LANCZOS[0]);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        a += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(c(0.5 * (2.0 * PI).ln()) + (z + 0.5) * t.ln() - t + a.ln())
}

pub fn gamma(s: C) -> Result<C> {
    Ok(ln_gamma(s)?.exp())
}

/// 1/Γ(s), entire; exactly 0 at the poles of Γ.
pub fn rgamma(s: C) -> C {
    match ln_gamma(s) {
        Ok(l) => (-l).exp(),
        Err(_) => c(0.0),
    }
}

fn em_terms(s: C) -> usize {
    (20.0f64).max(2.0 * s.im.abs()).max(s.norm()).ceil() as usize
}

/// Tail of the Euler–Maclaurin formula at the point x = N + a,
/// excluding the x^{1-s}/(s-1) term.
fn em_tail(s: C, x: f64) -> C {
    let lx = x.ln();
    let mut total = 0.5 * (-s * lx).exp();
    // s(s+1)...(s+2j-2) x^{-s-2j+1}, updated in place
    let mut rise = s;
    let mut pw = (-(s + 1.0) * lx).exp();
    for (j, &b) in BERN_OVER_FACT.iter().enumerate() {
        if j > 0 {
            let k = 2.0 * j as f64;
            rise = rise * (s + (k - 1.0)) * (s + k);
            pw /= x * x;
        }
        total += b * rise * pw;
    }
    total
}

/// Riemann ζ(s).
pub fn zeta(s: C) -> Result<C> {
    if s == c(1.0) {
        return Err(Error::ZetaPole);
    }
    if s.re < -1.0 {
        if s.im == 0.0 && s.re == s.re.round() && (s.re as i64) % 2 == 0 {
            return Ok(c(0.0));
        }
        let one_minus = c(1.0) - s;
        let l = s * 2f64.ln() + (s - 1.0) * PI.ln() + ln_sin_pi(s / 2.0) + ln_gamma(one_minus)?;
        return Ok(l.exp() * zeta(one_minus)?);
    }
    let n = em_terms(s);
    let mut sum = c(0.0);
    for k in 1..n {
        sum += (-s * (k as f64).ln()).exp();
    }
    let x = n as f64;
    Ok(sum + (-(s - 1.0) * x.ln()).exp() / (s - 1.0) + em_tail(s, x))
}

/// Hurwitz ζ(s, a) for 0 < a ≤ 1 (Euler–Maclaurin, Re s ≥ -1 region).
pub fn hurwitz_zeta(s: C, a: f64) -> Result<C> {
    if s == c(1.0) {
        return Err(Error::ZetaPole);
    }
    let n = em_terms(s);
    let mut sum = c(0.0);
    for k in 0..n {
        sum += (-s * (k as f64 + a).ln()).exp();
    }
    let x = n as f64 + a;
    Ok(sum + (-(s - 1.0) * x.ln()).exp() / (s - 1.0) + em_tail(s, x))
}

/// (x^{1-s} - 1)/(s - 1), stable near s = 1.
fn pow_minus_one_over(s: C, x: f64) -> C {
    let lx = x.ln();
    let w = (c(1.0) - s) * lx;
    if w.norm() < 1e-6 {
        -lx * (c(1.0) + w / 2.0 + w * w / 6.0)
    } else {
        (w.exp() - 1.0) / (s - 1.0)
    }
}

/// Σ_{k≥1} f(k) k^{-s} for a q-periodic f, via the Hurwitz decomposition
/// with the Euler–Maclaurin pieces summed jointly.
pub fn dirichlet_l_periodic(s: C, values: &[C]) -> Result<C> {
    let q = values.len();
    let total: C = values.iter().sum();
    let balanced = total.norm() < 1e-9;
    if !balanced && s == c(1.0) {
        return Err(Error::ZetaPole);
    }
    let qf = q as f64;
    let n = em_terms(s);
    let mut sum = c(0.0);
    for (r, &v) in values.iter().enumerate() {
        let a = if r == 0 { 1.0 } else { r as f64 / qf };
        if v == c(0.0) {
            continue;
        }
        let mut part = c(0.0);
        for k in 0..n {
            part += (-s * (k as f64 + a).ln()).exp();
        }
        let x = n as f64 + a;
        part += em_tail(s, x);
        part += if balanced {
            pow_minus_one_over(s, x)
        } else {
            (-(s - 1.0) * x.ln()).exp() / (s - 1.0)
        };
        sum += v * part;
    }
    Ok(sum * (-s * qf.ln()).exp())
}

/// L(s, χ_D).
pub fn dirichlet_l(s: C, chi: &CharSpec) -> Result<C> {
    if chi.is_principal() {
        return zeta(s);
    }
    if s.re < -1.0 {
        let a = chi.parity_a as f64;
        let lstar = lstar(c(1.0) - s, chi)?;
        let half = (s + a) / 2.0;
        let factor = (-half * (chi.q as f64 / PI).ln()).exp() * rgamma(half);
        return Ok(factor * lstar);
    }
    let values: Vec<C> = chi.values.iter().map(|&v| c(v as f64)).collect();
    dirichlet_l_periodic(s, &values)
}

/// ξ(s) = π^{-s/2} Γ(s/2) ζ(s).
pub fn xi(s: C) -> Result<C> {
    Ok((-s / 2.0 * PI.ln()).exp() * gamma(s / 2.0)? * zeta(s)?)
}

/// L*(s, χ) = (q/π)^{(s+a)/2} Γ((s+a)/2) L(s, χ).
pub fn lstar(s: C, chi: &CharSpec) -> Result<C> {
    if chi.is_principal() {
        return xi(s);
    }
    let half = (s + chi.parity_a as f64) / 2.0;
    Ok((half * (chi.q as f64 / PI).ln()).exp() * gamma(half)? * dirichlet_l(s, chi)?)
}

/// Modified Bessel function K_ν(x), x > 0.
///
/// Trapezoid rule for ½∫_R exp(-x cosh u + νu) du on the line
/// Im u = θ through the saddle point asinh(ν/x), kept below π/2 so the
/// integrand still decays. On the real axis the integrand would cancel
/// down to e^{-π|Im ν|/2}.
pub fn bessel_k(nu: C, x: f64) -> Result<C> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("bessel_k needs x > 0, got {x}")));
    }
    let nu = if nu.im < 0.0 { -nu } else { nu };
    let (sig, tau) = (nu.re, nu.im);
    let theta = (nu / x).asinh().im.clamp(0.0, PI / 2.0 - 3.0 / tau.max(6.0));
    let ct = theta.cos();
    let g = |t: f64| -x * ct * t.cosh() + sig * t;
    let tstar = (sig / (x * ct)).asinh();
    let gmax = g(tstar);
    let drop = 46.0;
    let find = |dir: f64| {
        let mut step = 1.0;
        let mut t = tstar;
        while g(t + dir * step) > gmax - drop {
            t += dir * step;
            step *= 2.0;
        }
        let (mut lo, mut hi) = (t, t + dir * step);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > gmax - drop {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let (a, b) = (find(-1.0), find(1.0));
    let f = |t: f64| {
        let u = C::new(t, theta);
        (-x * u.cosh() + nu * u).exp()
    };
    let mut m = 64usize;
    let mut h = (b - a) / m as f64;
    let mut sum: C = (0..=m)
        .map(|k| {
            let w = if k == 0 || k == m { 0.5 } else { 1.0 };
            f(a + k as f64 * h) * w
        })
        .sum();
    let mut prev = sum * h;
    for _ in 0..18 {
        let mid: C = (0..m).map(|k| f(a + (k as f64 + 0.5) * h)).sum();
        sum += mid;
        m *= 2;
        h /= 2.0;
        let cur = sum * h;
        let scale = cur.norm().max(1e-300);
        if (cur - prev).norm() <= 1e-13 * scale && m >= 256 {
            return Ok(cur * 0.5);
        }
        prev = cur;
    }
    Ok(prev * 0.5)
}

/// A value together with whether its argument lay outside the documented
/// accuracy region of the routine that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked {
    pub value: C,
    pub degraded: bool,
}

/// Γ(s); accurate to 1e-12 relative for |s| ≤ 50.
pub fn gamma_checked(s: C) -> Result<Checked> {
    Ok(Checked {
        value: gamma(s)?,
        degraded: s.norm() > 50.0,
    })
}

/// ζ(s); accurate to 1e-10 relative for Re s > -10, |Im s| ≤ 100.
pub fn zeta_checked(s: C) -> Result<Checked> {
    Ok(Checked {
        value: zeta(s)?,
        degraded: s.re <= -10.0 || s.im.abs() > 100.0,
    })
}

/// L(s, χ_D); same region as ζ.
pub fn dirichlet_l_checked(s: C, chi: &CharSpec) -> Result<Checked> {
    Ok(Checked {
        value: dirichlet_l(s, chi)?,
        degraded: s.re <= -10.0 || s.im.abs() > 100.0,
    })
}

/// K_ν(x); accurate to 1e-10 relative for x ≥ 0.05, |Im ν| ≤ 200.
pub fn bessel_k_checked(nu: C, x: f64) -> Result<Checked> {
    Ok(Checked {
        value: bessel_k(nu, x)?,
        degraded: x < 0.05 || nu.im.abs() > 200.0,
    })
}
