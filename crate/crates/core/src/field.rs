//! Finite fields `F_{p^e}` with an explicit Frobenius.
//!
//! Elements are stored as a single `u32` index: the coordinates
//! `c_0 + c_1 u + ... + c_{e-1} u^{e-1}` in the basis of the modulus are packed
//! as `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`. For `e = 1` the index is the
//! residue itself. Extension fields use log/antilog tables built once at
//! construction, which caps the supported size at `p^e <= 2^20`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order accepted by [`Field::new`].
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

/// Description of a finite field: characteristic, degree and (for `e > 1`)
/// the defining polynomial, little-endian over the prime field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    #[serde(default = "one_u32")]
    pub e: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
}

fn one_u32() -> u32 {
    1
}

impl FieldSpec {
    pub fn prime(p: u64) -> Self {
        FieldSpec { p, e: 1, modulus: None }
    }

    pub fn extension(p: u64, modulus: Vec<u64>) -> Self {
        let e = modulus.len().saturating_sub(1) as u32;
        FieldSpec { p, e, modulus: Some(modulus) }
    }
}

/// An element of a [`Field`]. Only meaningful together with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(pub(crate) u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Packed index of the element (see module docs).
    pub fn index(self) -> u32 {
        self.0
    }
}

struct Inner {
    spec: FieldSpec,
    p: u32,
    e: u32,
    q: u32,
    // monic, little-endian, length e + 1 (empty for prime fields)
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// A finite field handle. Cheap to clone; all arithmetic goes through it.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(p={}, e={}", self.inner.p, self.inner.e)?;
        if self.inner.e > 1 {
            write!(f, ", modulus={:?}", self.inner.modulus)?;
        }
        write!(f, ")")
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.e == other.inner.e
                && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for Field {}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

// Remainder of `a` modulo `m` over F_p; `m` must have an invertible leading coefficient.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = mod_pow(m[dm] as u64, p as u64 - 2, p as u64) as u32;
    while r.len() > dm {
        let top = *r.last().unwrap();
        if top != 0 {
            let c = (top as u64 * lead_inv as u64 % p as u64) as u32;
            let shift = r.len() - 1 - dm;
            for (i, &mi) in m.iter().enumerate() {
                let sub = (c as u64 * mi as u64 % p as u64) as u32;
                let slot = &mut r[shift + i];
                *slot = (*slot + p - sub) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let e = m.len() - 1;
    for d in 1..=e / 2 {
        // every monic polynomial of degree d
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut t = idx;
            for _ in 0..d {
                g.push((t % p as u64) as u32);
                t /= p as u64;
            }
            g.push(1);
            if poly_rem(m, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Builds the field described by `spec`, checking that `p` is prime and
    /// that the modulus is irreducible (brute-force factor search).
    pub fn new(spec: FieldSpec) -> Result<Field> {
        let FieldSpec { p, e, ref modulus } = spec;
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if e == 0 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        let q = (p as u128).checked_pow(e).unwrap_or(u128::MAX);
        if q > MAX_FIELD_ORDER as u128 {
            return Err(Error::InvalidField(format!(
                "field order {p}^{e} exceeds the supported maximum {MAX_FIELD_ORDER}"
            )));
        }
        let q = q as u32;
        let p32 = p as u32;
        if e == 1 {
            if let Some(m) = modulus {
                if m.len() > 2 {
                    return Err(Error::InvalidField(
                        "a modulus of degree > 1 was given for a prime field".into(),
                    ));
                }
            }
            let spec = FieldSpec { p, e, modulus: None };
            return Ok(Field {
                inner: Arc::new(Inner { spec, p: p32, e, q, modulus: vec![], exp: vec![], log: vec![] }),
            });
        }
        let raw = modulus
            .as_ref()
            .ok_or_else(|| Error::InvalidField(format!("degree {e} extension needs a modulus")))?;
        if raw.len() != e as usize + 1 {
            return Err(Error::InvalidField(format!(
                "modulus has {} coefficients, expected {}",
                raw.len(),
                e + 1
            )));
        }
        let mut m: Vec<u32> = raw.iter().map(|&c| (c % p) as u32).collect();
        let lead = *m.last().unwrap();
        if lead == 0 {
            return Err(Error::InvalidField("modulus leading coefficient vanishes mod p".into()));
        }
        let inv = mod_pow(lead as u64, p - 2, p) as u32;
        for c in m.iter_mut() {
            *c = (*c as u64 * inv as u64 % p) as u32;
        }
        if !is_irreducible(&m, p32) {
            return Err(Error::InvalidField(format!("modulus {raw:?} is reducible over F_{p}")));
        }
        let mut inner = Inner {
            spec: FieldSpec { p, e, modulus: Some(m.iter().map(|&c| c as u64).collect()) },
            p: p32,
            e,
            q,
            modulus: m,
            exp: vec![],
            log: vec![],
        };
        inner.build_tables();
        Ok(Field { inner: Arc::new(inner) })
    }

    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Field> {
        Field::new(FieldSpec::prime(p))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.inner.spec
    }

    /// Characteristic.
    pub fn p(&self) -> u64 {
        self.inner.p as u64
    }

    /// Degree over the prime field.
    pub fn e(&self) -> u32 {
        self.inner.e
    }

    /// Number of elements.
    pub fn order(&self) -> u64 {
        self.inner.q as u64
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.inner.p as i64) as u32)
    }

    /// Element from its packed index; `None` if out of range.
    pub fn from_index(&self, idx: u32) -> Option<Fe> {
        (idx < self.inner.q).then_some(Fe(idx))
    }

    /// Element with the given coordinates (little-endian in the modulus basis).
    pub fn from_coords(&self, coords: &[u64]) -> Result<Fe> {
        if coords.len() > self.inner.e as usize {
            return Err(Error::InvalidInput(format!(
                "element has {} coordinates, field degree is {}",
                coords.len(),
                self.inner.e
            )));
        }
        let p = self.inner.p as u64;
        let mut idx = 0u64;
        for &c in coords.iter().rev() {
            if c >= p {
                return Err(Error::InvalidInput(format!("coordinate {c} not reduced mod {p}")));
            }
            idx = idx * p + c;
        }
        Ok(Fe(idx as u32))
    }

    /// Coordinates of `a`, always `e` of them.
    pub fn coords(&self, a: Fe) -> Vec<u64> {
        let p = self.inner.p;
        let mut t = a.0;
        (0..self.inner.e)
            .map(|_| {
                let c = t % p;
                t /= p;
                c as u64
            })
            .collect()
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.inner.q).map(Fe)
    }

    /// The class of `u` (the root of the modulus); for prime fields this is 0.
    pub fn generator_u(&self) -> Fe {
        if self.inner.e == 1 {
            Fe::ZERO
        } else {
            Fe(self.inner.p)
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let inner = &*self.inner;
        if inner.e == 1 {
            let s = a.0 + b.0;
            return Fe(if s >= inner.p { s - inner.p } else { s });
        }
        if inner.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        let p = inner.p;
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        for _ in 0..inner.e {
            let d = (x % p + y % p) % p;
            out += d * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let inner = &*self.inner;
        if a.0 == 0 || inner.p == 2 {
            return a;
        }
        if inner.e == 1 {
            return Fe(inner.p - a.0);
        }
        let p = inner.p;
        let (mut x, mut out, mut place) = (a.0, 0u32, 1u32);
        for _ in 0..inner.e {
            let d = (p - x % p) % p;
            out += d * place;
            x /= p;
            place *= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let inner = &*self.inner;
        if inner.e == 1 {
            return Fe(((a.0 as u64 * b.0 as u64) % inner.p as u64) as u32);
        }
        let n = inner.q - 1;
        let s = inner.log[a.0 as usize] + inner.log[b.0 as usize];
        Fe(inner.exp[(if s >= n { s - n } else { s }) as usize])
    }

    /// `a * b + c`
    #[inline]
    pub fn mul_add(&self, a: Fe, b: Fe, c: Fe) -> Fe {
        self.add(self.mul(a, b), c)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return None;
        }
        let inner = &*self.inner;
        if inner.e == 1 {
            return Some(Fe(mod_pow(a.0 as u64, inner.p as u64 - 2, inner.p as u64) as u32));
        }
        let n = inner.q - 1;
        let l = inner.log[a.0 as usize];
        Some(Fe(inner.exp[((n - l) % n) as usize]))
    }

    /// `a / b`; panics on division by zero.
    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b).expect("division by zero in finite field"))
    }

    pub fn pow(&self, a: Fe, mut k: u64) -> Fe {
        let mut acc = Fe::ONE;
        let mut b = a;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            k >>= 1;
        }
        acc
    }

    /// `a^{p^n}`; negative `n` applies the inverse Frobenius. Frobenius has
    /// order `e` on `F_{p^e}`, so only `n mod e` matters.
    pub fn frobenius(&self, a: Fe, n: i64) -> Fe {
        let e = self.inner.e as i64;
        let k = n.rem_euclid(e) as u32;
        if k == 0 {
            return a;
        }
        self.pow(a, (self.inner.p as u64).pow(k))
    }

    /// Human-readable rendering: the residue for prime fields, the coordinate
    /// list otherwise.
    pub fn render(&self, a: Fe) -> String {
        if self.inner.e == 1 {
            a.0.to_string()
        } else {
            format!("{:?}", self.coords(a))
        }
    }
}

impl Inner {
    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let p = self.p;
        let e = self.e as usize;
        let digits = |mut t: u32| -> Vec<u32> {
            (0..e)
                .map(|_| {
                    let c = t % p;
                    t /= p;
                    c
                })
                .collect()
        };
        let (da, db) = (digits(a), digits(b));
        let mut prod = vec![0u32; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
            }
        }
        let r = poly_rem(&prod, &self.modulus, p);
        let mut idx = 0u32;
        for &c in r.iter().rev() {
            idx = idx * p + c;
        }
        idx
    }

    fn build_tables(&mut self) {
        let n = (self.q - 1) as usize;
        for g in 2..self.q {
            let mut exp = Vec::with_capacity(n);
            let mut x = 1u32;
            let mut primitive = true;
            for k in 0..n {
                if k > 0 && x == 1 {
                    primitive = false;
                    break;
                }
                exp.push(x);
                x = self.slow_mul(x, g);
            }
            if primitive && x == 1 {
                let mut log = vec![0u32; self.q as usize];
                for (k, &v) in exp.iter().enumerate() {
                    log[v as usize] = k as u32;
                }
                self.exp = exp;
                self.log = log;
                return;
            }
        }
        unreachable!("multiplicative group of a finite field is cyclic");
    }
}
