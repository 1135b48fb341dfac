//! Truncated p-adic integers: residues in `Z/p^N` for an odd prime `p`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("prime must be an odd prime, got {0}")]
    NotOddPrime(u64),
    #[error("precision must be at least 1, got {0}")]
    PrecisionTooSmall(u32),
    #[error("p^N = {p}^{n} does not fit in 63 bits")]
    ModulusOverflow { p: u64, n: u32 },
    #[error("mixed coefficient rings: Z/{left} and Z/{right}")]
    RingMismatch { left: u64, right: u64 },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// p-adic valuation of a nonzero integer.
pub fn nu(m: i64, p: u64) -> u32 {
    assert!(m != 0, "valuation of 0 is infinite");
    let mut m = m.unsigned_abs();
    let mut k = 0;
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    k
}

/// The coefficient ring `Z/p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ring {
    prime: u64,
    precision: u32,
    modulus: u64,
}

impl Ring {
    pub fn new(prime: u64, precision: u32) -> Result<Self, PadicError> {
        if prime % 2 == 0 || !is_prime(prime) {
            return Err(PadicError::NotOddPrime(prime));
        }
        if precision < 1 {
            return Err(PadicError::PrecisionTooSmall(precision));
        }
        let mut modulus: u64 = 1;
        for _ in 0..precision {
            modulus = modulus
                .checked_mul(prime)
                .filter(|m| *m < (1 << 62))
                .ok_or(PadicError::ModulusOverflow { p: prime, n: precision })?;
        }
        Ok(Ring { prime, precision, modulus })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `p^k` as an element; zero once `k >= N`.
    pub fn p_pow(&self, k: u32) -> PAdicInt {
        if k >= self.precision {
            return self.zero();
        }
        PAdicInt { residue: self.prime.pow(k), ring: *self }
    }

    pub fn reduce(&self, n: i64) -> PAdicInt {
        let m = self.modulus as i128;
        let r = (n as i128).rem_euclid(m) as u64;
        PAdicInt { residue: r, ring: *self }
    }

    pub fn from_residue(&self, r: u64) -> PAdicInt {
        PAdicInt { residue: r % self.modulus, ring: *self }
    }

    pub fn zero(&self) -> PAdicInt {
        PAdicInt { residue: 0, ring: *self }
    }

    pub fn one(&self) -> PAdicInt {
        PAdicInt { residue: 1 % self.modulus, ring: *self }
    }

    /// The same prime at a different precision.
    pub fn with_precision(&self, precision: u32) -> Result<Ring, PadicError> {
        Ring::new(self.prime, precision)
    }

    pub fn check_same(&self, other: &Ring) -> Result<(), PadicError> {
        if self == other {
            Ok(())
        } else {
            Err(PadicError::RingMismatch { left: self.modulus, right: other.modulus })
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.prime, self.precision)
    }
}

/// Reduce a signed integer into `Z/p^N`.
pub fn padic_reduce(n: i64, p: u64, precision: u32) -> Result<PAdicInt, PadicError> {
    Ok(Ring::new(p, precision)?.reduce(n))
}

/// An element of `Z/p^N`, always stored as its canonical residue in `[0, p^N)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PAdicInt {
    residue: u64,
    ring: Ring,
}

impl PAdicInt {
    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self) -> i64 {
        let m = self.ring.modulus;
        if self.residue > m / 2 {
            self.residue as i64 - m as i64
        } else {
            self.residue as i64
        }
    }

    /// Largest `k <= N` with `p^k | residue`; zero reports `N`.
    pub fn valuation(&self) -> u32 {
        if self.residue == 0 {
            return self.ring.precision;
        }
        let mut r = self.residue;
        let mut k = 0;
        while r % self.ring.prime == 0 {
            r /= self.ring.prime;
            k += 1;
        }
        k
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_unit(&self) -> bool {
        self.residue % self.ring.prime != 0
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Option<PAdicInt> {
        if !self.is_unit() {
            return None;
        }
        let m = self.ring.modulus as i128;
        let (mut old_r, mut r) = (self.residue as i128, m);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        Some(PAdicInt { residue: old_s.rem_euclid(m) as u64, ring: self.ring })
    }

    /// `self / p^k`, defined when `valuation(self) >= k`. The quotient is only
    /// determined modulo `p^(N-k)`; the representative returned is the one
    /// obtained from the signed residue, so small integers divide like integers.
    pub fn div_p_pow(&self, k: u32) -> Option<PAdicInt> {
        if self.valuation() < k {
            return None;
        }
        let q = self.signed() / (self.ring.prime.pow(k) as i64);
        Some(self.ring.reduce(q))
    }

    /// Reduce into a ring of the same prime and lower precision.
    pub fn truncate(&self, ring: Ring) -> PAdicInt {
        debug_assert_eq!(ring.prime, self.ring.prime);
        ring.from_residue(self.residue)
    }

    pub fn pow(&self, mut e: u64) -> PAdicInt {
        let mut base = *self;
        let mut acc = self.ring.one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }
}

impl fmt::Debug for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.residue, self.ring.modulus)
    }
}

impl fmt::Display for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signed())
    }
}

impl Add for PAdicInt {
    type Output = PAdicInt;
    fn add(self, rhs: PAdicInt) -> PAdicInt {
        debug_assert_eq!(self.ring, rhs.ring);
        let m = self.ring.modulus;
        let s = self.residue + rhs.residue;
        PAdicInt { residue: if s >= m { s - m } else { s }, ring: self.ring }
    }
}

impl Sub for PAdicInt {
    type Output = PAdicInt;
    fn sub(self, rhs: PAdicInt) -> PAdicInt {
        self + (-rhs)
    }
}

impl Neg for PAdicInt {
    type Output = PAdicInt;
    fn neg(self) -> PAdicInt {
        let r = if self.residue == 0 { 0 } else { self.ring.modulus - self.residue };
        PAdicInt { residue: r, ring: self.ring }
    }
}

impl Mul for PAdicInt {
    type Output = PAdicInt;
    fn mul(self, rhs: PAdicInt) -> PAdicInt {
        debug_assert_eq!(self.ring, rhs.ring);
        let r = (self.residue as u128 * rhs.residue as u128) % self.ring.modulus as u128;
        PAdicInt { residue: r as u64, ring: self.ring }
    }
}

impl AddAssign for PAdicInt {
    fn add_assign(&mut self, rhs: PAdicInt) {
        *self = *self + rhs;
    }
}

impl SubAssign for PAdicInt {
    fn sub_assign(&mut self, rhs: PAdicInt) {
        *self = *self - rhs;
    }
}

impl MulAssign for PAdicInt {
    fn mul_assign(&mut self, rhs: PAdicInt) {
        *self = *self * rhs;
    }
}
