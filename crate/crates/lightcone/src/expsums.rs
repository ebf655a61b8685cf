//! Quadratic exponential sums φ_n, φ̂_n, the split sums F(k,i), the
//! composite sums φ_{n,d} and the character sums 𝒮(d₁,χ,m).

use crate::arith::{
    a_const, b_const, chi_m4, e_frac, gauss_sum_odd, gcd, gcd_slice, inv_mod, is_prime,
    is_squarefree, kronecker, prime_divisors, ModChar,
};
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;

type C = Complex64;

/// Work limit for the brute-force sums (elementary operations).
pub const BRUTE_BUDGET: f64 = 2e9;

/// p-adic data of a nonzero m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicData {
    pub p: u64,
    pub alpha_p: u32,
    pub ell_p: u32,
    pub t_p: i64,
}

/// p-adic data of any m; `None` entries stand for the zero vector (α = ℓ = ∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalData {
    pub alpha: Option<u32>,
    pub ell: Option<u32>,
    pub t: i64,
    pub delta: bool,
}

pub fn norm2(m: &[i64]) -> i64 {
    m.iter().map(|x| x * x).sum()
}

fn strip(mut x: i64, p: u64) -> (u32, i64) {
    let mut v = 0;
    while x % p as i64 == 0 {
        x /= p as i64;
        v += 1;
    }
    (v, x)
}

pub fn local_data(m: &[i64], p: u64) -> LocalData {
    let nn = norm2(m);
    if nn == 0 {
        return LocalData {
            alpha: None,
            ell: None,
            t: 0,
            delta: false,
        };
    }
    let (alpha, t) = strip(nn, p);
    let (ell, _) = strip(gcd_slice(m), p);
    let delta = p == 2 && m.iter().all(|&x| (x >> ell) & 1 == 1);
    LocalData {
        alpha: Some(alpha),
        ell: Some(ell),
        t,
        delta,
    }
}

/// λ ∈ Λ* \ {0}, stored as m = 2λ.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    pub m: Vec<i64>,
    pub norm2: i64,
    pub gcd: i64,
    pub delta_lambda: bool,
    pub padic: Vec<PadicData>,
}

impl DualVector {
    pub fn new(m: Vec<i64>) -> Result<Self> {
        if m.is_empty() {
            return invalid("empty vector");
        }
        if m.iter().all(|&x| x == 0) {
            return invalid("the zero vector is not a DualVector");
        }
        let par = m[0].rem_euclid(2);
        if m.iter().any(|x| x.rem_euclid(2) != par) {
            return invalid("entries of m = 2λ must share one parity");
        }
        let nn = norm2(&m);
        let n = m.len() as i64;
        if n % 2 == 1 {
            let disc = if (n - 1) / 2 % 2 == 0 { nn } else { -nn };
            if disc.rem_euclid(4) == 3 {
                return invalid("discriminant is 3 mod 4");
            }
        }
        let g = gcd_slice(&m);
        let mut primes = prime_divisors(2 * nn as u64);
        primes.dedup();
        let padic = primes
            .iter()
            .map(|&p| {
                let ld = local_data(&m, p);
                PadicData {
                    p,
                    alpha_p: ld.alpha.unwrap(),
                    ell_p: ld.ell.unwrap(),
                    t_p: ld.t,
                }
            })
            .collect();
        Ok(DualVector {
            delta_lambda: local_data(&m, 2).delta,
            m,
            norm2: nn,
            gcd: g,
            padic,
        })
    }

    pub fn from_lambda(lambda: &[f64]) -> Result<Self> {
        let m: Vec<i64> = lambda.iter().map(|x| (2.0 * x).round() as i64).collect();
        if lambda.iter().zip(&m).any(|(x, &k)| (2.0 * x - k as f64).abs() > 1e-9) {
            return invalid("λ must have half-integer entries");
        }
        Self::new(m)
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    /// ‖λ‖ = ‖m‖/2.
    pub fn lambda_norm(&self) -> f64 {
        (self.norm2 as f64).sqrt() / 2.0
    }

    pub fn local(&self, p: u64) -> LocalData {
        local_data(&self.m, p)
    }

    /// D = (-1)^{(n-1)/2} ‖m‖² (used for odd n).
    pub fn disc(&self) -> i64 {
        let n = self.n() as i64;
        if n % 2 == 0 || ((n - 1) / 2) % 2 == 0 {
            self.norm2
        } else {
            -self.norm2
        }
    }

    /// Parity of m₁, i.e. (-1)^{2λ₁} = (-1)^{m₁}.
    pub fn sign_m1(&self) -> f64 {
        if self.m[0] % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn ipow(p: u64, e: u32) -> i64 {
    (p as i64).pow(e)
}

fn check_budget(work: f64, what: &str) -> Result<()> {
    if work > BRUTE_BUDGET {
        Err(Error::Budget(format!("{what}: {work:.2e} operations")))
    } else {
        Ok(())
    }
}

/// Σ_{h ∈ (Z/N)^n, ‖h‖² ≡ c (N)} e(m·h/N).
///
/// Exact integer histogram of (‖h‖² mod N, m·h mod N) built one
/// coordinate at a time; the phases are applied once at the end.
pub fn quad_exp_sum(n: usize, modulus: u64, c: i64, m: &[i64]) -> Result<C> {
    if m.len() != n {
        return invalid("length of m differs from n");
    }
    let big_n = modulus as usize;
    if big_n == 0 {
        return invalid("modulus must be positive");
    }
    let nf = big_n as f64;
    check_budget(n as f64 * nf * nf * nf, "quadratic exponential sum")?;
    let mut cnt = vec![0u128; big_n * big_n];
    cnt[0] = 1;
    let sq: Vec<usize> = (0..big_n).map(|h| h * h % big_n).collect();
    for &mj in m {
        let mj = mj.rem_euclid(modulus as i64) as usize;
        let mut next = vec![0u128; big_n * big_n];
        for q in 0..big_n {
            for l in 0..big_n {
                let v = cnt[q * big_n + l];
                if v == 0 {
                    continue;
                }
                for h in 0..big_n {
                    let q2 = (q + sq[h]) % big_n;
                    let l2 = (l + mj * h) % big_n;
                    next[q2 * big_n + l2] += v;
                }
            }
        }
        cnt = next;
    }
    let target = c.rem_euclid(modulus as i64) as usize;
    Ok((0..big_n)
        .map(|l| e_frac(l as i64, modulus as i64) * cnt[target * big_n + l] as f64)
        .sum())
}

/// φ_n(t; m) by direct summation.
pub fn phi_brute(n: usize, t: u64, m: &[i64]) -> Result<C> {
    quad_exp_sum(n, t, 0, m)
}

/// φ̂_n(t; m) by direct summation.
pub fn varphi_brute(n: usize, t: u64, m: &[i64]) -> Result<C> {
    quad_exp_sum(n, t, -1, m)
}

/// F(k, i) straight from its defining double sum.
///
/// The inner sum over h ∈ (Z/p^k)^n factors over coordinates, so only
/// one-dimensional sums are formed.
pub fn f_brute(n: usize, p: u64, k: u32, i: u32, m: &[i64]) -> Result<C> {
    f_brute_scaled(n, p, k, i, m).map(|(v, _)| v)
}

/// F(k, i) by direct summation together with the magnitude of the
/// summed terms, p^{-k} Σ_b |∏_j G_j(b)|, which sets the rounding scale.
pub fn f_brute_scaled(n: usize, p: u64, k: u32, i: u32, m: &[i64]) -> Result<(C, f64)> {
    if i > k || !is_prime(p) || m.len() != n {
        return invalid("f_brute needs prime p, 0 <= i <= k and |m| = n");
    }
    let pk = ipow(p, k);
    let q = ipow(p, k - i);
    let pi = ipow(p, i);
    let mut distinct: Vec<i64> = m.iter().map(|x| x.rem_euclid(pk)).collect();
    distinct.sort_unstable();
    distinct.dedup();
    check_budget((q * pk) as f64 * distinct.len() as f64, "F(k,i)")?;
    let roots: Vec<C> = (0..pk).map(|r| e_frac(r, pk)).collect();
    let mut total = C::new(0.0, 0.0);
    let mut mass = 0.0;
    for b in 1..=q {
        if gcd(b, p as i64) != 1 {
            continue;
        }
        let g: Vec<C> = distinct
            .iter()
            .map(|&mj| {
                let v: C = (0..pk)
                    .map(|h| {
                        let ph = (b * pi % pk * (h * h % pk) + mj * h) % pk;
                        roots[ph as usize]
                    })
                    .sum();
                // a one-dimensional quadratic sum is 0 or has modulus >= 1
                if v.norm() < 1e-6 {
                    C::new(0.0, 0.0)
                } else {
                    v
                }
            })
            .collect();
        let mut prod = C::new(1.0, 0.0);
        for x in m {
            let idx = distinct.binary_search(&x.rem_euclid(pk)).unwrap();
            prod *= g[idx];
        }
        total += prod;
        mass += prod.norm();
    }
    Ok((total / pk as f64, mass / pk as f64))
}

fn totient_pow(p: u64, e: u32) -> f64 {
    if e == 0 {
        1.0
    } else {
        (p as f64).powi(e as i32 - 1) * (p - 1) as f64
    }
}

/// p^{e/2}.
fn half_pow(p: u64, e: i64) -> f64 {
    if e % 2 == 0 {
        (p as f64).powi((e / 2) as i32)
    } else {
        (p as f64).powf(e as f64 / 2.0)
    }
}

fn pm_one(e: i64) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// F(k, i) from the closed evaluations (odd p and p = 2).
pub fn f_closed(n: usize, p: u64, k: u32, i: u32, m: &[i64]) -> C {
    C::new(f_closed_real(n, p, k, i, m), 0.0)
}

fn f_closed_real(n: usize, p: u64, k: u32, i: u32, m: &[i64]) -> f64 {
    if i > k {
        return 0.0;
    }
    let ld = local_data(m, p);
    if let Some(ell) = ld.ell {
        if i > ell {
            return 0.0;
        }
    }
    let (n, k, i) = (n as i64, k as i64, i as i64);
    let alpha = ld.alpha.map(|a| a as i64);
    let ell = ld.ell.map(|a| a as i64);
    let kk = k - i;
    if p != 2 {
        let within = alpha.map_or(true, |a| k <= a - i);
        let edge = alpha.map_or(false, |a| k == a - i + 1);
        let chi = |e: i64| {
            if n % 2 == 0 {
                (chi_m4(p as i64) as f64).powi(((n * e / 2) % 2) as i32)
            } else {
                1.0
            }
        };
        if n % 2 == 0 || kk % 2 == 0 {
            if within {
                chi(kk) * half_pow(p, n * k + n * i - 2 * k) * totient_pow(p, kk as u32)
            } else if edge {
                -chi(kk) * half_pow(p, n * k + (n - 2) * i - 2)
            } else {
                0.0
            }
        } else if edge {
            let sgn = if ((n - 1) / 2) % 2 == 0 { ld.t } else { -ld.t };
            kronecker(sgn, p as i64) as f64 * half_pow(p, n * k + (n - 2) * i - 1)
        } else {
            0.0
        }
    } else {
        let two = |e: i64| half_pow(2, e);
        if let Some(ell) = ell {
            if i == ell {
                return if k == ell {
                    two(2 * (n - 1) * ell)
                } else if k == ell + 1 && ld.delta {
                    two(2 * (n - 1) * (ell + 1))
                } else {
                    0.0
                };
            }
        }
        let generic = || {
            if kk == 0 {
                two(2 * (n - 1) * k)
            } else if kk == 1 {
                0.0
            } else if kk % 2 == 0 {
                two(n * k + (n - 2) * i - 4) * a_const(n)
            } else {
                two(n * (k + 1) + (n - 2) * i - 6) * b_const(n)
            }
        };
        let Some(a) = alpha else {
            return generic();
        };
        let ell = ell.unwrap();
        let t = ld.t;
        if k <= a - i - 2 {
            generic()
        } else if k == a - i - 1 {
            if a == 2 * ell && i == ell - 1 {
                0.0
            } else if a % 2 == 0 {
                -two(n * (k + 1) + (n - 2) * i - 6) * b_const(n)
            } else {
                -two(n * k + (n - 2) * i - 4) * a_const(n)
            }
        } else if k == a - i {
            if a % 2 == 0 {
                two(n * k + (n - 2) * i - 6) * pm_one((t + 1) / 2) * a_const(n + 2)
            } else {
                two(n * (k + 1) + (n - 2) * i - 6) * b_const(n - 2 * t)
            }
        } else if k == a - i + 1 {
            if a % 2 == 0 {
                two(n * (k + 1) + (n - 2) * i - 6) * b_const(n - t)
            } else {
                0.0
            }
        } else {
            0.0
        }
    }
}

/// φ_n(p^k; m) = Σ_{i ≤ k} F(k, i).
pub fn phi_prime_power(n: usize, p: u64, k: u32, m: &[i64]) -> C {
    (0..=k).map(|i| f_closed(n, p, k, i, m)).sum()
}

/// φ_n(t; m) for any t ≥ 1 through multiplicativity.
pub fn phi_closed(n: usize, t: u64, m: &[i64]) -> C {
    crate::arith::factorize(t)
        .into_iter()
        .map(|(p, e)| phi_prime_power(n, p, e, m))
        .product()
}

/// φ̂_n(p; m) for an odd prime p via Gauss sums.
pub fn varphi_closed_prime(n: usize, p: u64, m: &[i64]) -> C {
    let pi = p as i64;
    let g = gauss_sum_odd(pi, 1).expect("p odd").powi(n as i32) / p as f64;
    let nn = norm2(m).rem_euclid(pi);
    let mut s = C::new(0.0, 0.0);
    for b in 1..pi {
        let inv = inv_mod(4 * b, pi).unwrap();
        let ch = (kronecker(b, pi) as f64).powi(n as i32);
        s += e_frac(b - inv * nn % pi, pi) * ch;
    }
    let mut out = g * s;
    if m.iter().all(|x| x % pi == 0) {
        out += (p as f64).powi(n as i32 - 1);
    }
    out
}

fn varphi_two(n: usize, m: &[i64]) -> C {
    let par = m[0].rem_euclid(2);
    if m.iter().all(|x| x.rem_euclid(2) == par) {
        return C::new(pm_one(par) * 2f64.powi(n as i32 - 1), 0.0);
    }
    // mixed parity: sum over h ∈ {0,1}^n with an odd number of ones
    let mut total = 0.0;
    for mask in 0u64..(1 << n) {
        if mask.count_ones() % 2 == 1 {
            let dot: i64 = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| m[j]).sum();
            total += pm_one(dot);
        }
    }
    C::new(total, 0.0)
}

/// φ̂_n(t; m) for squarefree t via twisted multiplicativity.
pub fn varphi_closed(n: usize, t: u64, m: &[i64]) -> Result<C> {
    if !is_squarefree(t) {
        return invalid("varphi_closed needs squarefree t");
    }
    let mut out = C::new(1.0, 0.0);
    for p in prime_divisors(t) {
        let rest = (t / p) as i64;
        let inv = inv_mod(rest, p as i64).unwrap();
        let mm: Vec<i64> = m.iter().map(|x| x * inv).collect();
        out *= if p == 2 {
            varphi_two(n, &mm)
        } else {
            varphi_closed_prime(n, p, &mm)
        };
    }
    Ok(out)
}

fn check_d(d: u64) -> Result<()> {
    if d % 2 == 0 || !is_squarefree(d) {
        return invalid(format!("d = {d} must be odd and squarefree"));
    }
    Ok(())
}

/// φ_{n,d}(t; λ) = φ_n(at; 2λ) φ̂_n(2d/a; ā·2λ) with a = gcd(t, 2d) and
/// ā the inverse of a modulo 2d/a.
///
/// Splitting h mod 2td by CRT twists the second factor by the inverse of
/// at; after h ↦ th that twist is ā, independent of t. Writing 2tλ there
/// instead is off whenever 2d/a has a prime p with t ≢ ±ā mod p.
pub fn phi_nd(n: usize, d: u64, t: u64, m: &[i64]) -> Result<C> {
    check_d(d)?;
    if t == 0 || m.len() != n {
        return invalid("phi_nd needs t >= 1 and |m| = n");
    }
    let a = gcd(t as i64, 2 * d as i64);
    let q = 2 * d as i64 / a;
    let abar = if q == 1 { 0 } else { inv_mod(a, q).unwrap() };
    let am: Vec<i64> = m.iter().map(|x| x * abar).collect();
    Ok(phi_closed(n, a as u64 * t, m) * varphi_closed(n, q as u64, &am)?)
}

/// φ_{n,d}(t; λ) as the sum over h mod 2td with ‖h‖² ≡ -t².
pub fn phi_nd_brute(n: usize, d: u64, t: u64, m: &[i64]) -> Result<C> {
    check_d(d)?;
    let modulus = 2 * t * d;
    quad_exp_sum(n, modulus, -((t * t) as i64), m)
}

/// 𝒮(d₁, χ, m) = Σ_{t ∈ (Z/d₁)^×} φ̂_n(d₁; tm) χ̄(t).
pub fn s_sum(d1: u64, chi: &ModChar, m: &[i64]) -> Result<C> {
    if chi.modulus != d1 {
        return invalid("character modulus differs from d1");
    }
    check_d(d1)?;
    let n = m.len();
    let mut total = C::new(0.0, 0.0);
    for t in 1..=d1 as i64 {
        if gcd(t, d1 as i64) != 1 {
            continue;
        }
        let tm: Vec<i64> = m.iter().map(|x| x * t).collect();
        total += varphi_closed(n, d1, &tm)? * chi.eval(t).conj();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn phi_examples() {
        assert!(close(phi_brute(2, 3, &[0, 0]).unwrap(), C::new(1.0, 0.0), 1e-12));
        assert!(close(phi_brute(1, 4, &[0]).unwrap(), C::new(2.0, 0.0), 1e-12));
        for n in 1..6 {
            let m = vec![3i64; n];
            let v = phi_brute(n, 2, &m).unwrap();
            assert!(close(v, C::new(2f64.powi(n as i32 - 1), 0.0), 1e-12));
            let v = varphi_brute(n, 2, &m).unwrap();
            assert!(close(v, C::new(-(2f64.powi(n as i32 - 1)), 0.0), 1e-12));
        }
        assert!(close(varphi_brute(2, 5, &[0, 0]).unwrap(), C::new(4.0, 0.0), 1e-12));
        assert!(close(varphi_brute(2, 1, &[7, 3]).unwrap(), C::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn varphi_prime_examples() {
        assert!(close(varphi_closed_prime(2, 5, &[0, 0]), C::new(4.0, 0.0), 1e-12));
        assert!(close(varphi_closed_prime(3, 3, &[0, 0, 0]), C::new(12.0, 0.0), 1e-12));
        let v = varphi_closed_prime(1, 3, &[1]);
        assert!(close(v, varphi_brute(1, 3, &[1]).unwrap(), 1e-12));
    }

    #[test]
    fn f_examples() {
        assert!(close(f_brute(2, 3, 1, 0, &[0, 0]).unwrap(), C::new(-2.0, 0.0), 1e-12));
        assert!(close(f_closed(2, 3, 1, 0, &[0, 0]), C::new(-2.0, 0.0), 1e-12));
        assert!(close(phi_prime_power(2, 3, 1, &[0, 0]), C::new(1.0, 0.0), 1e-12));
        assert!(close(phi_prime_power(2, 2, 1, &[0, 0]), C::new(2.0, 0.0), 1e-12));
        assert!(close(phi_prime_power(3, 5, 0, &[1, 1, 1]), C::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn phi_nd_examples() {
        for n in 1..4 {
            let m = vec![2i64; n];
            let v = phi_nd(n, 1, 1, &m).unwrap();
            assert!(close(v, C::new(2f64.powi(n as i32 - 1), 0.0), 1e-12));
            assert!(close(phi_nd_brute(n, 1, 1, &m).unwrap(), v, 1e-12));
        }
        assert!(close(phi_nd(2, 1, 3, &[0, 0]).unwrap(), C::new(2.0, 0.0), 1e-12));
        assert!(close(phi_nd_brute(2, 1, 3, &[0, 0]).unwrap(), C::new(2.0, 0.0), 1e-12));
        let v = phi_nd(2, 3, 1, &[0, 0]).unwrap();
        assert!(close(v, phi_nd_brute(2, 3, 1, &[0, 0]).unwrap(), 1e-12));
        assert!(phi_nd(2, 9, 1, &[0, 0]).is_err());
    }

    #[test]
    fn s_sum_examples() {
        let one = ModChar::principal(1).unwrap();
        assert!(close(s_sum(1, &one, &[1, 1]).unwrap(), C::new(1.0, 0.0), 1e-12));
        let chars = ModChar::all(3).unwrap();
        let nonprin = chars.iter().find(|c| !c.is_principal()).unwrap();
        // 3 | ‖m‖² = 9
        assert!(s_sum(3, nonprin, &[3, 0]).unwrap().norm() < 1e-10);
        let prin = &chars[0];
        let direct: C = (1..3)
            .map(|t| varphi_brute(2, 3, &[t, t]).unwrap())
            .sum();
        assert!(close(s_sum(3, prin, &[1, 1]).unwrap(), direct, 1e-12));
    }
}
