//! Fixed-precision arithmetic in Q_p and its unramified quadratic extension,
//! with explicit valuation bookkeeping and a branch-dependent logarithm.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Largest e with p^e < 2^63, so residues fit a u64 and products fit a u128.
pub fn max_rel_prec(p: u64) -> i32 {
    let mut e = 0i32;
    let mut acc = 1u128;
    while acc * (p as u128) < (1u128 << 63) {
        acc *= p as u128;
        e += 1;
    }
    e
}

fn pow_u64(p: u64, e: i32) -> u64 {
    debug_assert!(e >= 0);
    let mut acc = 1u64;
    for _ in 0..e {
        acc *= p;
    }
    acc
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mut b = (base % m) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Modular inverse of a mod m for a prime power m = p^e with p coprime to a.
fn mod_inv(a: u64, m: u64) -> u64 {
    // extended Euclid on i128
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        let r2 = r0 - q * r1;
        r0 = r1;
        r1 = r2;
        let s2 = s0 - q * s1;
        s0 = s1;
        s1 = s2;
    }
    debug_assert_eq!(r0, 1);
    (s0.rem_euclid(m as i128)) as u64
}

/// An element of Q_p known to a fixed absolute precision.
///
/// The element is p^val * unit with unit a unit modulo p^(abs - val); a zero
/// residue is recorded as unit = 0 with val = abs ("zero mod p^abs").
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicScalar {
    p: u64,
    val: i32,
    unit: u64,
    abs: i32,
}

impl PadicScalar {
    pub fn zero(p: u64, abs: i32) -> Self {
        PadicScalar { p, val: abs, unit: 0, abs }
    }

    pub fn from_unit(p: u64, val: i32, unit: u64, abs: i32) -> Result<Self> {
        let rel = abs - val;
        if rel < 0 || rel > max_rel_prec(p) {
            return Err(Error::PrecisionOverflow(p));
        }
        let m = pow_u64(p, rel);
        let u = if m == 1 { 0 } else { unit % m };
        Ok(Self::normalized(p, val, u, abs))
    }

    fn normalized(p: u64, val: i32, residue: u64, abs: i32) -> Self {
        // residue is mod p^(abs-val); strip p-powers so unit is a true unit
        if residue == 0 {
            return Self::zero(p, abs);
        }
        let mut v = val;
        let mut u = residue;
        while u % p == 0 {
            u /= p;
            v += 1;
        }
        let rel = abs - v;
        if rel <= 0 {
            return Self::zero(p, abs);
        }
        PadicScalar { p, val: v, unit: u % pow_u64(p, rel), abs }
    }

    pub fn from_i64(p: u64, x: i64, abs: i32) -> Self {
        Self::from_bigint(p, &BigInt::from(x), abs)
    }

    /// Exact small-integer constructor on the machine-word path.
    pub fn from_i128(p: u64, x: i128, abs: i32) -> Self {
        if x == 0 {
            return Self::zero(p, abs);
        }
        let mut v = 0i32;
        let mut n = x;
        while n % p as i128 == 0 {
            n /= p as i128;
            v += 1;
        }
        let rel = (abs - v).min(max_rel_prec(p));
        if rel <= 0 {
            return Self::zero(p, abs);
        }
        let m = pow_u64(p, rel) as i128;
        let u = n.rem_euclid(m) as u64;
        PadicScalar { p, val: v, unit: u, abs: v + rel }
    }

    pub fn from_bigint(p: u64, x: &BigInt, abs: i32) -> Self {
        if x.is_zero() {
            return Self::zero(p, abs);
        }
        let pb = BigInt::from(p);
        let mut v = 0i32;
        let mut n = x.clone();
        while (&n % &pb).is_zero() {
            n /= &pb;
            v += 1;
        }
        // exact input: clamp the declared precision to what a word can hold
        let rel = (abs - v).min(max_rel_prec(p));
        if rel <= 0 {
            return Self::zero(p, abs);
        }
        let m = BigInt::from(pow_u64(p, rel));
        let r = ((&n % &m) + &m) % &m;
        PadicScalar { p, val: v, unit: r.to_u64().unwrap(), abs: v + rel }
    }

    pub fn from_rational(p: u64, x: &BigRational, abs: i32) -> Self {
        if x.is_zero() {
            return Self::zero(p, abs);
        }
        let pb = BigInt::from(p);
        let mut num = x.numer().clone();
        let mut den = x.denom().clone();
        let mut v = 0i32;
        while (&num % &pb).is_zero() {
            num /= &pb;
            v += 1;
        }
        while (&den % &pb).is_zero() {
            den /= &pb;
            v -= 1;
        }
        let rel = (abs - v).min(max_rel_prec(p));
        if rel <= 0 {
            return Self::zero(p, abs);
        }
        let m = pow_u64(p, rel);
        let mb = BigInt::from(m);
        let nr = (((&num % &mb) + &mb) % &mb).to_u64().unwrap();
        let dr = (((&den % &mb) + &mb) % &mb).to_u64().unwrap();
        let u = (nr as u128 * mod_inv(dr, m) as u128 % m as u128) as u64;
        Self::normalized(p, v, u, v + rel)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// None when the element is indistinguishable from zero at working precision.
    pub fn valuation(&self) -> Option<i32> {
        if self.unit == 0 { None } else { Some(self.val) }
    }

    pub fn abs_prec(&self) -> i32 {
        self.abs
    }

    pub fn rel_prec(&self) -> i32 {
        self.abs - self.val
    }

    pub fn is_zero(&self) -> bool {
        self.unit == 0
    }

    pub fn unit_residue(&self) -> u64 {
        self.unit
    }

    /// The exact rational p^val * unit representing this residue class.
    pub fn canonical_rational(&self) -> BigRational {
        if self.unit == 0 {
            return BigRational::zero();
        }
        let u = BigInt::from(self.unit);
        if self.val >= 0 {
            BigRational::from(u * BigInt::from(pow_u64(self.p, self.val)))
        } else {
            BigRational::new(u, BigInt::from(pow_u64(self.p, -self.val)))
        }
    }

    pub fn with_abs_prec(&self, abs: i32) -> Self {
        if abs >= self.abs {
            // cannot gain precision; keep as is
            return *self;
        }
        if self.unit == 0 {
            return Self::zero(self.p, abs);
        }
        let rel = abs - self.val;
        if rel <= 0 {
            return Self::zero(self.p, abs);
        }
        PadicScalar { p: self.p, val: self.val, unit: self.unit % pow_u64(self.p, rel), abs }
    }

    pub fn neg(&self) -> Self {
        if self.unit == 0 {
            return *self;
        }
        let m = pow_u64(self.p, self.abs - self.val);
        PadicScalar { p: self.p, val: self.val, unit: m - self.unit, abs: self.abs }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        let abs = self.abs.min(other.abs);
        if self.unit == 0 {
            return other.with_abs_prec(abs);
        }
        if other.unit == 0 {
            return self.with_abs_prec(abs);
        }
        let v0 = self.val.min(other.val);
        let k = abs - v0;
        if k <= 0 {
            return Self::zero(self.p, abs);
        }
        assert!(k <= max_rel_prec(self.p), "precision overflow at p={}", self.p);
        let m = pow_u64(self.p, k);
        let shifted = |x: &PadicScalar| -> u128 {
            let sh = x.val - v0;
            if sh >= k {
                0
            } else {
                x.unit as u128 * pow_u64(self.p, sh) as u128 % m as u128
            }
        };
        let r = ((shifted(self) + shifted(other)) % m as u128) as u64;
        Self::normalized(self.p, v0, r, abs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        if self.unit == 0 || other.unit == 0 {
            // 0 (mod p^A) * p^v u is 0 (mod p^(A+v)); for two zeros, add valuations
            let va = if self.unit == 0 { self.abs } else { self.val };
            let vb = if other.unit == 0 { other.abs } else { other.val };
            return Self::zero(self.p, va.saturating_add(vb));
        }
        let rel = (self.abs - self.val).min(other.abs - other.val);
        let m = pow_u64(self.p, rel);
        let u = (self.unit as u128 * other.unit as u128 % m as u128) as u64;
        let val = self.val + other.val;
        Self::normalized(self.p, val, u, val + rel)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.unit == 0 {
            return Err(Error::DivisionByIndistinguishableZero);
        }
        let rel = self.abs - self.val;
        let m = pow_u64(self.p, rel);
        let u = mod_inv(self.unit, m);
        Ok(Self::normalized(self.p, -self.val, u, -self.val + rel))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn mul_pow_p(&self, k: i32) -> Self {
        if self.unit == 0 {
            return Self::zero(self.p, self.abs + k);
        }
        PadicScalar { p: self.p, val: self.val + k, unit: self.unit, abs: self.abs + k }
    }

    /// Base-p digits of the unit part, least significant first.
    pub fn digits(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut u = self.unit;
        for _ in 0..(self.abs - self.val).max(0) {
            out.push(u % self.p);
            u /= self.p;
        }
        out
    }

    /// Residue of the least nonnegative representative of unit mod p.
    pub fn unit_mod_p(&self) -> u64 {
        self.unit % self.p
    }

    /// Exact division by a small nonzero integer; only the valuation shifts.
    pub fn div_i64(&self, j: i64) -> Self {
        assert!(j != 0);
        let neg = j < 0;
        let mut j = j.unsigned_abs();
        let mut shift = 0i32;
        while j % self.p == 0 {
            j /= self.p;
            shift += 1;
        }
        if self.unit == 0 {
            return Self::zero(self.p, self.abs - shift);
        }
        let m = pow_u64(self.p, self.abs - self.val);
        let u = (self.unit as u128 * mod_inv(j % m, m) as u128 % m as u128) as u64;
        let out = PadicScalar { p: self.p, val: self.val - shift, unit: u, abs: self.abs - shift };
        if neg { out.neg() } else { out }
    }
}

impl Serialize for PadicScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PadicScalar", 5)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("ext_deg", &1u8)?;
        st.serialize_field("val", &self.val)?;
        st.serialize_field("digits", &self.digits())?;
        st.serialize_field("prec", &self.abs)?;
        st.end()
    }
}

/// Least positive quadratic non-residue mod an odd prime.
pub fn quad_nonresidue(p: u64) -> u64 {
    for r in 2..p {
        if mod_pow(r, (p - 1) / 2, p) == p - 1 {
            return r;
        }
    }
    unreachable!("no quadratic non-residue found; p must be an odd prime")
}

/// An element a + b*w of the unramified quadratic extension K_p, w^2 = r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadExtScalar {
    pub a: PadicScalar,
    pub b: PadicScalar,
    r: u64,
}

impl QuadExtScalar {
    pub fn new(a: PadicScalar, b: PadicScalar, r: u64) -> Self {
        debug_assert_eq!(a.prime(), b.prime());
        QuadExtScalar { a, b, r }
    }

    pub fn from_base(a: PadicScalar, r: u64) -> Self {
        let z = PadicScalar::zero(a.prime(), a.abs_prec());
        QuadExtScalar { a, b: z, r }
    }

    pub fn zero(p: u64, abs: i32, r: u64) -> Self {
        QuadExtScalar { a: PadicScalar::zero(p, abs), b: PadicScalar::zero(p, abs), r }
    }

    pub fn one(p: u64, abs: i32, r: u64) -> Self {
        QuadExtScalar { a: PadicScalar::from_i64(p, 1, abs), b: PadicScalar::zero(p, abs), r }
    }

    pub fn omega(p: u64, abs: i32, r: u64) -> Self {
        QuadExtScalar { a: PadicScalar::zero(p, abs), b: PadicScalar::from_i64(p, 1, abs), r }
    }

    pub fn prime(&self) -> u64 {
        self.a.prime()
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn valuation(&self) -> Option<i32> {
        match (self.a.valuation(), self.b.valuation()) {
            (None, None) => None,
            (Some(v), None) | (None, Some(v)) => Some(v),
            (Some(v), Some(w)) => Some(v.min(w)),
        }
    }

    pub fn abs_prec(&self) -> i32 {
        self.a.abs_prec().min(self.b.abs_prec())
    }

    pub fn with_abs_prec(&self, abs: i32) -> Self {
        QuadExtScalar { a: self.a.with_abs_prec(abs), b: self.b.with_abs_prec(abs), r: self.r }
    }

    pub fn add(&self, o: &Self) -> Self {
        QuadExtScalar { a: self.a.add(&o.a), b: self.b.add(&o.b), r: self.r }
    }

    pub fn sub(&self, o: &Self) -> Self {
        QuadExtScalar { a: self.a.sub(&o.a), b: self.b.sub(&o.b), r: self.r }
    }

    pub fn neg(&self) -> Self {
        QuadExtScalar { a: self.a.neg(), b: self.b.neg(), r: self.r }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prime();
        let rr = PadicScalar::from_i64(p, self.r as i64, self.a.abs_prec().max(o.a.abs_prec()));
        let a = self.a.mul(&o.a).add(&self.b.mul(&o.b).mul(&rr));
        let b = self.a.mul(&o.b).add(&self.b.mul(&o.a));
        QuadExtScalar { a, b, r: self.r }
    }

    pub fn mul_base(&self, s: &PadicScalar) -> Self {
        QuadExtScalar { a: self.a.mul(s), b: self.b.mul(s), r: self.r }
    }

    pub fn frobenius(&self) -> Self {
        QuadExtScalar { a: self.a, b: self.b.neg(), r: self.r }
    }

    /// a^2 - r b^2, an element of Q_p.
    pub fn norm(&self) -> PadicScalar {
        let p = self.prime();
        let rr = PadicScalar::from_i64(p, self.r as i64, self.a.abs_prec().max(self.b.abs_prec()));
        self.a.mul(&self.a).sub(&self.b.mul(&self.b).mul(&rr))
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        let ninv = n.inv()?;
        Ok(QuadExtScalar { a: self.a.mul(&ninv), b: self.b.neg().mul(&ninv), r: self.r })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn mul_pow_p(&self, k: i32) -> Self {
        QuadExtScalar { a: self.a.mul_pow_p(k), b: self.b.mul_pow_p(k), r: self.r }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let p = self.prime();
        let mut acc = Self::one(p, self.abs_prec() + 2, self.r);
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Teichmueller representative of a unit: the (p^2-1)-th root of unity
    /// congruent to self mod p.
    pub fn teichmuller(&self) -> Result<Self> {
        if self.valuation() != Some(0) {
            return Err(Error::ZeroArgument);
        }
        let p = self.prime();
        let mut z = *self;
        let iterations = self.abs_prec().max(1) as usize + 1;
        for _ in 0..iterations {
            z = z.pow(p * p);
        }
        Ok(z)
    }

    /// Distance |x - y| as a valuation: ord(x - y), None if indistinguishable.
    pub fn dist_val(&self, o: &Self) -> Option<i32> {
        self.sub(o).valuation()
    }
}

impl Serialize for QuadExtScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("QuadExtScalar", 6)?;
        let val = self.valuation().unwrap_or(self.abs_prec());
        st.serialize_field("p", &self.prime())?;
        st.serialize_field("ext_deg", &2u8)?;
        st.serialize_field("r", &self.r)?;
        st.serialize_field("val", &val)?;
        let digit_pair = |x: &PadicScalar| -> Vec<u64> {
            // digits relative to the common valuation
            let mut out = Vec::new();
            let mut u = x.unit_residue() as u128;
            if let Some(v) = x.valuation() {
                for _ in 0..(v - val) {
                    u *= self.prime() as u128;
                }
            }
            let mut u = u;
            for _ in 0..(x.abs_prec() - val).max(0) {
                out.push((u % self.prime() as u128) as u64);
                u /= self.prime() as u128;
            }
            out
        };
        st.serialize_field("digits", &[digit_pair(&self.a), digit_pair(&self.b)])?;
        st.serialize_field("prec", &self.abs_prec())?;
        st.end()
    }
}

/// A branch of the p-adic logarithm, fixed by the value assigned to log(p).
#[derive(Debug, Clone, Copy)]
pub struct LogBranch {
    pub log_p: QuadExtScalar,
}

impl LogBranch {
    /// Iwasawa branch: log(p) = 0.
    pub fn iwasawa(p: u64, abs: i32, r: u64) -> Self {
        LogBranch { log_p: QuadExtScalar::zero(p, abs, r) }
    }

    pub fn with_value(log_p: QuadExtScalar) -> Self {
        LogBranch { log_p }
    }
}

/// Number of series terms so every omitted term of log(1+z), z = 0 mod p,
/// has valuation above the working precision.
fn log_series_terms(p: u64, m: i32) -> i32 {
    let mut lg = 0i32;
    let mut acc = 1u64;
    while (acc as u128) < m.max(1) as u128 {
        acc = acc.saturating_mul(p);
        lg += 1;
    }
    m + lg + 2
}

/// log(1 + z) for z of positive valuation, by direct series summation.
pub fn log_one_plus(z: &QuadExtScalar) -> Result<QuadExtScalar> {
    let p = z.prime();
    match z.valuation() {
        None => return Ok(QuadExtScalar::zero(p, z.abs_prec(), z.r())),
        Some(v) if v <= 0 => return Err(Error::ZeroArgument),
        _ => {}
    }
    let m = z.abs_prec();
    let terms = log_series_terms(p, m);
    let mut acc = QuadExtScalar::zero(p, m, z.r());
    let mut zpow = *z;
    for j in 1..=terms {
        let term = QuadExtScalar::new(zpow.a.div_i64(j as i64), zpow.b.div_i64(j as i64), z.r());
        acc = if j % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
        zpow = zpow.mul(z);
        if zpow.valuation().is_none() {
            break;
        }
    }
    Ok(acc)
}

/// Branch-dependent p-adic logarithm: for x = p^v * zeta * u with zeta the
/// Teichmueller part and u = 1 mod p, returns v*log(p) + log(u).
pub fn padic_log(x: &QuadExtScalar, branch: &LogBranch) -> Result<QuadExtScalar> {
    let v = x.valuation().ok_or(Error::ZeroArgument)?;
    let unit = x.mul_pow_p(-v);
    let zeta = unit.teichmuller()?;
    let u1 = unit.div(&zeta)?;
    let z = u1.sub(&QuadExtScalar::one(x.prime(), u1.abs_prec(), x.r()));
    let log_u = log_one_plus(&z)?;
    let vlog = branch.log_p.mul_base(&PadicScalar::from_i64(x.prime(), v as i64, x.abs_prec()));
    Ok(log_u.add(&vlog))
}

/// Square root in K_p by Hensel lifting, with a deterministic sign choice:
/// rational roots take the representative in {1,...,(p-1)/2} mod p, roots in
/// K_p minus Q_p take a positive leading w-coefficient residue.
pub fn hensel_sqrt(a: &PadicScalar) -> Result<QuadExtScalar> {
    let p = a.prime();
    let r = quad_nonresidue(p);
    let v = match a.valuation() {
        None => return Ok(QuadExtScalar::zero(p, a.abs_prec() / 2, r)),
        Some(v) => v,
    };
    if v % 2 != 0 {
        return Err(Error::Config("odd valuation: no square root in the unramified extension".into()));
    }
    let u = a.mul_pow_p(-v);
    let rel = u.rel_prec();
    let um = u.unit_residue();
    let is_residue = mod_pow(um % p, (p - 1) / 2, p) == 1;
    let target = if is_residue {
        u
    } else {
        // u / r is a residue
        u.div(&PadicScalar::from_i64(p, r as i64, u.abs_prec()))?
    };
    // root mod p by brute force, then Newton lifting
    let t0 = {
        let tm = target.unit_residue() % p;
        (1..p).find(|c| c * c % p == tm).expect("quadratic residue must have a root mod p")
    };
    let m = pow_u64(p, rel);
    let mut c = t0 % m;
    // Newton: c <- (c + t/c)/2, doubling correct digits each step
    let tm_full = target.unit_residue();
    let inv2 = mod_inv(2 % m, m);
    let mut correct = 1i32;
    while correct < rel {
        let cinv = mod_inv(c, m);
        let q = (tm_full as u128 * cinv as u128 % m as u128) as u64;
        c = ((c as u128 + q as u128) % m as u128 * inv2 as u128 % m as u128) as u64;
        correct *= 2;
    }
    // canonical sign
    if c % p > (p - 1) / 2 {
        c = m - c;
    }
    let root_unit = PadicScalar::from_unit(p, 0, c, rel)?;
    let half_v = v / 2;
    if is_residue {
        Ok(QuadExtScalar::from_base(root_unit.mul_pow_p(half_v), r))
    } else {
        // sqrt(u) = sqrt(u/r) * w
        let b = root_unit.mul_pow_p(half_v);
        Ok(QuadExtScalar::new(PadicScalar::zero(p, b.abs_prec()), b, r))
    }
}
