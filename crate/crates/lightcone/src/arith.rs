//! Integer and character arithmetic.

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest modulus accepted for an explicit character table.
pub const MAX_CHAR_MODULUS: u64 = 1 << 21;

/// Enumeration budget for `r_k`.
pub const RK_BUDGET: f64 = 1e8;

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// gcd of the absolute entries; 0 for the zero vector.
pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn is_square(n: i64) -> bool {
    n >= 0 && {
        let r = isqrt(n as u64);
        r * r == n as u64
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(m: i64, p: u64) -> Result<u32> {
    if m == 0 {
        return Err(Error::InfiniteValuation);
    }
    if p < 2 {
        return invalid("valuation needs p >= 2");
    }
    let mut m = m.unsigned_abs();
    let mut v = 0;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    Ok(v)
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Inverse of a modulo m, if gcd(a, m) = 1.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 == 1 || m == 1 {
        Some(s0.rem_euclid(m))
    } else {
        None
    }
}

/// e(k/n) = exp(2πi k/n), phase reduced exactly before conversion.
pub fn e_frac(k: i64, n: i64) -> Complex64 {
    let r = k.rem_euclid(n) as f64 / n as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

/// Kronecker symbol (a/n).
pub fn kronecker(a: i64, n: i64) -> i32 {
    const TAB: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut n = n;
    let mut k = 1;
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    if v % 2 == 1 {
        k = TAB[a.rem_euclid(8) as usize];
    }
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    // Jacobi symbol for odd n > 0.
    let mut a = a.rem_euclid(n);
    loop {
        if a == 0 {
            return if n == 1 { k } else { 0 };
        }
        let mut v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            k *= TAB[(n & 7) as usize];
        }
        if a & n & 2 != 0 {
            k = -k;
        }
        let r = a;
        a = n % r;
        n = r;
    }
}

pub fn chi_m4(k: i64) -> i32 {
    kronecker(-4, k)
}

/// The sign 𝔰_n.
pub fn sign_s(n: i64) -> i32 {
    if n % 4 == 0 {
        1
    } else if n % 4 == 2 {
        if ((n - 2) / 4) % 2 == 0 {
            1
        } else {
            -1
        }
    } else if ((n * n - 1) / 8) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A real primitive Dirichlet character χ_D.
#[derive(Debug, Clone, PartialEq)]
pub struct CharSpec {
    pub disc: i64,
    pub q: u64,
    pub parity_a: u8,
    pub values: Vec<i8>,
}

impl CharSpec {
    pub fn eval(&self, k: i64) -> i32 {
        self.values[k.rem_euclid(self.q as i64) as usize] as i32
    }

    pub fn is_principal(&self) -> bool {
        self.q == 1
    }

    /// The character χ_{-4}.
    pub fn chi_m4() -> CharSpec {
        char_from_d(-4).expect("-4 is a discriminant")
    }

    pub fn principal() -> CharSpec {
        char_from_d(1).expect("1 is a discriminant")
    }

    /// Checks that no proper divisor of q is a period on units.
    pub fn verify_primitive(&self) -> bool {
        let q = self.q;
        if q == 1 {
            return true;
        }
        prime_divisors(q).into_iter().all(|r| {
            let qq = q / r;
            (0..q).any(|j| {
                gcd(j as i64, q as i64) == 1 && j % qq == 1 % qq && self.values[j as usize] != 1
            })
        })
    }
}

/// Product of the primes dividing t to an odd power.
fn odd_squarefree_part(t: u64) -> u64 {
    factorize(t)
        .into_iter()
        .filter(|&(_, e)| e % 2 == 1)
        .map(|(p, _)| p)
        .product()
}

/// The primitive character inducing k ↦ (D/k).
pub fn char_from_d(disc: i64) -> Result<CharSpec> {
    if disc == 0 || disc.rem_euclid(4) == 3 {
        return Err(Error::NoCharacter(disc));
    }
    let abs = disc.unsigned_abs();
    let a2 = abs.trailing_zeros();
    let t2 = abs >> a2;
    let d0 = odd_squarefree_part(t2) as i64 * disc.signum();
    let (num, q) = if a2 % 2 == 1 {
        (8 * d0, 8 * d0.unsigned_abs())
    } else if d0.rem_euclid(4) == 1 {
        (d0, d0.unsigned_abs())
    } else {
        (4 * d0, 4 * d0.unsigned_abs())
    };
    if q > MAX_CHAR_MODULUS {
        return invalid(format!("character modulus {q} too large"));
    }
    let values: Vec<i8> = (0..q as i64).map(|j| kronecker(num, j) as i8).collect();
    let minus_one = values[((q as i64 - 1).rem_euclid(q as i64)) as usize];
    let ch = CharSpec {
        disc,
        q,
        parity_a: if q > 1 && minus_one == -1 { 1 } else { 0 },
        values,
    };
    debug_assert!(ch.verify_primitive());
    if !ch.verify_primitive() {
        return invalid(format!("character for D = {disc} not primitive"));
    }
    Ok(ch)
}

/// Quadratic Gauss sum 𝒢_a(b) for odd a.
pub fn gauss_sum_odd(a: i64, b: i64) -> Result<Complex64> {
    if a <= 0 || a % 2 == 0 || gcd(a, 2 * b) != 1 {
        return invalid("gauss_sum_odd needs odd a > 0 and gcd(a, 2b) = 1");
    }
    let eps = if a % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    Ok(eps * (a as f64).sqrt() * kronecker(b, a) as f64)
}

/// Quadratic Gauss sum 𝒢_{2^k}(b) for odd b.
pub fn gauss_sum_pow2(k: u32, b: i64) -> Result<Complex64> {
    if k == 0 || b % 2 == 0 {
        return invalid("gauss_sum_pow2 needs k >= 1 and odd b");
    }
    Ok(if k == 1 {
        Complex64::new(0.0, 0.0)
    } else if k % 2 == 0 {
        (Complex64::new(1.0, 0.0) + e_frac(b, 4)) * 2f64.powi(k as i32 / 2)
    } else {
        e_frac(b, 8) * 2f64.powi((k as i32 + 1) / 2)
    })
}

/// Direct sum Σ_{v mod a} e(b v²/a).
pub fn gauss_sum_direct(a: i64, b: i64) -> Complex64 {
    (0..a).map(|v| e_frac((b * v % a) * v, a)).sum()
}

/// b_k = Σ_{v ∈ (Z/8)^×} e(vk/8), for any integer k.
pub fn b_const(k: i64) -> f64 {
    [1i64, 3, 5, 7].iter().map(|&v| e_frac(v * k, 8).re).sum::<f64>().round()
}

/// a_k = (1+i)^k + (1-i)^k.
pub fn a_const(k: i64) -> f64 {
    if k < 0 {
        return 2.0 * 2f64.powf(k as f64 / 2.0) * (PI * k as f64 / 4.0).cos();
    }
    match k % 4 {
        0 => {
            let s = if (k / 4) % 2 == 0 { 1.0 } else { -1.0 };
            s * 2f64.powi((k / 2 + 1) as i32)
        }
        2 => 0.0,
        _ => sign_s(k) as f64 * 2f64.powi(((k + 1) / 2) as i32),
    }
}

/// The pair (a_k, b_k).
pub fn ab_const(k: i64) -> (Complex64, f64) {
    (Complex64::new(a_const(k), 0.0), b_const(k))
}

/// Number of representations of m as an ordered sum of k squares.
pub fn r_k(k: u32, m: u64) -> Result<u64> {
    if k == 0 {
        return invalid("r_k needs k >= 1");
    }
    let side = 2.0 * (m as f64).sqrt() + 1.0;
    if side.powi(k as i32 - 1) > RK_BUDGET {
        return Err(Error::Budget(format!("r_{k}({m})")));
    }
    fn rec(k: u32, m: u64) -> u64 {
        if k == 1 {
            return if m == 0 {
                1
            } else if is_square(m as i64) {
                2
            } else {
                0
            };
        }
        let r = isqrt(m);
        let mut total = rec(k - 1, m);
        for x in 1..=r {
            total += 2 * rec(k - 1, m - x * x);
        }
        total
    }
    Ok(rec(k, m))
}

/// A Dirichlet character modulo an odd squarefree d1, stored by its
/// exponent at a fixed primitive root of each prime factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ModChar {
    pub modulus: u64,
    primes: Vec<u64>,
    exps: Vec<u64>,
    // discrete-log tables, one per prime; entry 0 unused
    dlog: Vec<Vec<u64>>,
}

fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fs = prime_divisors(p - 1);
    (2..p)
        .find(|&g| fs.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .expect("primitive root exists")
}

impl ModChar {
    /// All φ(d1) characters modulo the odd squarefree d1.
    pub fn all(d1: u64) -> Result<Vec<ModChar>> {
        if d1 % 2 == 0 || !is_squarefree(d1) {
            return invalid("character modulus must be odd and squarefree");
        }
        let primes = prime_divisors(d1);
        let dlog: Vec<Vec<u64>> = primes
            .iter()
            .map(|&p| {
                let g = primitive_root(p);
                let mut t = vec![0u64; p as usize];
                let mut x = 1;
                for j in 0..p - 1 {
                    t[x as usize] = j;
                    x = x * g % p;
                }
                t
            })
            .collect();
        let mut out = vec![ModChar {
            modulus: d1,
            primes: primes.clone(),
            exps: vec![0; primes.len()],
            dlog: dlog.clone(),
        }];
        for (i, &p) in primes.iter().enumerate() {
            let mut next = Vec::new();
            for c in &out {
                for e in 0..p - 1 {
                    let mut c2 = c.clone();
                    c2.exps[i] = e;
                    next.push(c2);
                }
            }
            out = next;
        }
        Ok(out)
    }

    pub fn principal(d1: u64) -> Result<ModChar> {
        Ok(Self::all(d1)?.swap_remove(0))
    }

    pub fn eval(&self, k: i64) -> Complex64 {
        let mut phase = 0.0;
        for (i, &p) in self.primes.iter().enumerate() {
            let r = k.rem_euclid(p as i64) as usize;
            if r == 0 {
                return Complex64::new(0.0, 0.0);
            }
            phase += (self.exps[i] * self.dlog[i][r]) as f64 / (p - 1) as f64;
        }
        Complex64::from_polar(1.0, 2.0 * PI * phase.fract())
    }

    pub fn is_principal(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// χ² is principal.
    pub fn is_real(&self) -> bool {
        self.primes
            .iter()
            .zip(&self.exps)
            .all(|(&p, &e)| (2 * e) % (p - 1) == 0)
    }

    /// Value table over one period of the product of χ with a
    /// character of modulus q2 given by `other`.
    pub fn product_table(&self, q2: u64, other: impl Fn(i64) -> Complex64) -> Vec<Complex64> {
        let l = lcm(self.modulus, q2);
        (0..l as i64).map(|k| self.eval(k) * other(k)).collect()
    }

    pub fn table(&self) -> Vec<Complex64> {
        (0..self.modulus as i64).map(|k| self.eval(k)).collect()
    }

    /// χ restricted to the p-part, for p | modulus: whether it is trivial.
    pub fn is_trivial_at(&self, p: u64) -> bool {
        self.primes
            .iter()
            .position(|&q| q == p)
            .map_or(true, |i| self.exps[i] == 0)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a as i64, b as i64) as u64 * b
}
