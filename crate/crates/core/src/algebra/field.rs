//! Prime-field arithmetic.
//!
//! A [`FieldConfig`] fixes a word-sized prime `p` together with the
//! two-adicity of `p - 1` and a primitive `2^two_adicity`-th root of unity,
//! which is what the radix-2 number-theoretic transform needs. Elements are
//! held in Montgomery form internally; [`FieldConfig::to_u64`] recovers the
//! canonical residue in `[0, p)`.
//!
//! Graph instances pick their field through [`select_field`], which scans a
//! fixed table of verified NTT-friendly 62-bit primes. A fixed large prime
//! keeps runs reproducible and drives the per-query Schwartz–Zippel failure
//! probability below 2^-40 at any size this library is meant for.

use crate::counter;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Built-in NTT-friendly primes, ascending. Each is `k * 2^s + 1` with a
/// large power of two: 69 * 2^55 + 1 and 29 * 2^57 + 1.
pub const PRIME_TABLE: &[u64] = &[2_485_986_994_308_513_793, 4_179_340_454_199_820_289];

/// A field element in Montgomery form. Only meaningful together with the
/// `FieldConfig` that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fe(u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);

    #[inline(always)]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// A prime field Z_p with NTT support data.
#[derive(Debug, Clone)]
pub struct FieldConfig {
    p: u64,
    two_adicity: u32,
    /// Canonical residue of a primitive `2^two_adicity`-th root of unity.
    root: u64,
    // Montgomery constants for R = 2^64.
    r: u64,       // R mod p, the Montgomery form of 1
    r2: u64,      // R^2 mod p
    neg_inv: u64, // -p^{-1} mod 2^64
    bits: u32,    // bit length of p, for rejection sampling
}

impl PartialEq for FieldConfig {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}
impl Eq for FieldConfig {}

impl FieldConfig {
    /// Build the field Z_p. Rejects non-primes, even numbers, and primes of
    /// 63 bits or more (the reduction-free addition needs `2p < 2^64`).
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p % 2 == 0 || p >= (1 << 63) || !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        let two_adicity = (p - 1).trailing_zeros();
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        // Newton iteration for p^{-1} mod 2^64; p odd so p^2 = 1 mod 8.
        let mut inv = p;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        debug_assert_eq!(p.wrapping_mul(inv), 1);
        let bits = 64 - p.leading_zeros();
        let mut f = FieldConfig {
            p,
            two_adicity,
            root: 0,
            r,
            r2,
            neg_inv: inv.wrapping_neg(),
            bits,
        };
        f.root = f.find_two_adic_root();
        Ok(f)
    }

    /// Smallest quadratic non-residue raised to (p-1)/2^s: a primitive
    /// 2^two_adicity-th root of unity.
    fn find_two_adic_root(&self) -> u64 {
        let mut g = 2u64;
        loop {
            let e = self.from_u64(g);
            if self.pow(e, (self.p - 1) / 2) != self.one() {
                let root = self.pow(e, (self.p - 1) >> self.two_adicity);
                return self.to_u64(root);
            }
            g += 1;
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn two_adicity(&self) -> u32 {
        self.two_adicity
    }

    /// Canonical residue of the stored primitive `2^two_adicity`-th root.
    pub fn root(&self) -> u64 {
        self.root
    }

    #[inline(always)]
    fn mont_mul(&self, a: u64, b: u64) -> u64 {
        let t = a as u128 * b as u128;
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let t = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if t >= self.p {
            t - self.p
        } else {
            t
        }
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    #[inline]
    pub fn one(&self) -> Fe {
        Fe(self.r)
    }

    pub fn from_u64(&self, x: u64) -> Fe {
        Fe(self.mont_mul(x % self.p, self.r2))
    }

    pub fn from_i64(&self, x: i64) -> Fe {
        let r = x.rem_euclid(self.p as i64) as u64;
        self.from_u64(r)
    }

    pub fn to_u64(&self, a: Fe) -> u64 {
        self.mont_mul(a.0, 1)
    }

    #[inline(always)]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        counter::bump();
        let s = a.0 + b.0; // both < p < 2^63, no overflow
        Fe(if s >= self.p { s - self.p } else { s })
    }

    #[inline(always)]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        counter::bump();
        Fe(if a.0 >= b.0 {
            a.0 - b.0
        } else {
            a.0 + self.p - b.0
        })
    }

    #[inline(always)]
    pub fn neg(&self, a: Fe) -> Fe {
        counter::bump();
        Fe(if a.0 == 0 { 0 } else { self.p - a.0 })
    }

    #[inline(always)]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        counter::bump();
        Fe(self.mont_mul(a.0, b.0))
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat.
    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// A primitive `2^k`-th root of unity, in Montgomery form.
    pub fn root_of_unity(&self, k: u32) -> Result<Fe> {
        if k > self.two_adicity {
            return Err(Error::TransformTooLong {
                needed: 1usize << k.min(63),
                required: k,
                available: self.two_adicity,
            });
        }
        let base = self.from_u64(self.root);
        Ok(self.pow(base, 1u64 << (self.two_adicity - k)))
    }

    /// Uniform element, via rejection sampling on the top bits.
    pub fn random_element(&self, rng: &mut SplitMix64) -> Fe {
        loop {
            let x = rng.next_u64() >> (64 - self.bits);
            if x < self.p {
                return self.from_u64(x);
            }
        }
    }

    pub fn random_nonzero(&self, rng: &mut SplitMix64) -> Fe {
        loop {
            let x = self.random_element(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }
}

/// Choose a built-in prime for an `n`-node instance whose polynomials stay
/// below degree `degree_bound` per matrix entry. The field must satisfy
/// `p >= n^3` and provide transforms of length at least `2*degree_bound*n + 2`.
/// Deterministic: the first (smallest) table entry that fits wins.
pub fn select_field(n: usize, degree_bound: usize) -> Result<FieldConfig> {
    if n == 0 {
        return Err(Error::InvalidInput("select_field needs n >= 1".into()));
    }
    let need_points = 2u128 * degree_bound as u128 * n as u128 + 2;
    for &p in PRIME_TABLE {
        let f = FieldConfig::new(p).expect("table entries are verified primes");
        let big_enough = (p as u128) >= (n as u128).pow(3);
        let enough_roots = (1u128 << f.two_adicity()) >= need_points;
        if big_enough && enough_roots {
            return Ok(f);
        }
    }
    Err(Error::FieldCapacity { n, degree_bound })
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        a %= n;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
