//! Residue fields of places of P^1, realized as quotient rings F_q[t]/(pi).
//!
//! Elements are u64 codes: writing a residue class as sum a_i t^i with the
//! a_i in F_q, the code is sum code(a_i) * q^i. Since element codes of F_q
//! are themselves base-p digit vectors, the whole code is a base-p digit
//! string and addition is carry-free digit arithmetic, independent of pi.
//!
//! Multiplicative structure comes either from discrete-log tables (built at
//! construction for small fields; a pure accelerator, never a semantic
//! switch) or from polynomial arithmetic modulo pi. The place at infinity
//! gets the residue field F_q itself, via the uniformizer-side model the
//! caller supplies.

use crate::error::{Error, Result};
use crate::funcfield::{Place, Poly};
use crate::gf::{Fe, FieldSpec};

/// Table policy. `Auto` builds log/exp tables when the field is small enough
/// that exhaustive scans over it are routine; `Always` insists (and errors
/// above the hard table cap); `Never` keeps everything on polynomial
/// arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableMode {
    Auto,
    Always,
    Never,
}

/// Hard cap for log/exp tables.
pub const TABLE_CAP: u64 = 1 << 16;
/// Residue degree bound for the stack-array digit multiplication path
/// (p >= 5 and the order cap keep every real field below this).
const DIGIT_CAP: usize = 26;
/// Auto mode builds tables up to this order (the exhaustive-count regime).
pub const TABLE_AUTO: u64 = 10_000;

struct Tables {
    /// log[code] for code >= 1; log[0] is a sentinel.
    log: Vec<u32>,
    /// exp[i] = code of g^i, length n-1.
    exp: Vec<u32>,
}

/// The residue field k_v at a place, with arithmetic on u64 element codes.
pub struct ResidueField {
    base: FieldSpec,
    pi: Poly,
    d: usize,
    n: u64,
    tables: Option<Tables>,
    /// Digits of -pi (below the leading term) when the base is prime: the
    /// x^d reduction row for the allocation-free multiplication path.
    neg_pi_digits: Option<Vec<u64>>,
}

impl ResidueField {
    pub fn new(place: &Place) -> Result<ResidueField> {
        Self::with_tables(place, TableMode::Auto)
    }

    pub fn with_tables(place: &Place, mode: TableMode) -> Result<ResidueField> {
        let base = place.spec().clone();
        let pi = match place {
            Place::Finite(pi) => pi.clone(),
            Place::Infinity(_) => Poly::t(&base),
        };
        let d = pi.degree().expect("irreducible modulus is nonconstant");
        let order = base
            .q()
            .checked_pow(d as u32)
            .filter(|&n| n <= 1 << 62)
            .ok_or_else(|| {
                Error::resource(format!(
                    "residue field order {}^{d} too large",
                    base.q()
                ))
            })?;
        let neg_pi_digits = if base.q() == base.p() as u128 {
            let p = base.p();
            Some(
                (0..d)
                    .map(|i| (p - base.code(&pi.coeff(i)) as u64) % p)
                    .collect(),
            )
        } else {
            None
        };
        let mut rf = ResidueField {
            base,
            pi,
            d,
            n: order as u64,
            tables: None,
            neg_pi_digits,
        };
        let want = match mode {
            TableMode::Never => false,
            TableMode::Auto => rf.n <= TABLE_AUTO,
            TableMode::Always => {
                if rf.n > TABLE_CAP {
                    return Err(Error::resource(format!(
                        "log tables requested for field of order {} (cap {TABLE_CAP})",
                        rf.n
                    )));
                }
                true
            }
        };
        if want {
            rf.build_tables()?;
        }
        Ok(rf)
    }

    pub fn base(&self) -> &FieldSpec {
        &self.base
    }
    pub fn modulus(&self) -> &Poly {
        &self.pi
    }
    pub fn degree(&self) -> usize {
        self.d
    }
    /// Field order q^d.
    pub fn order(&self) -> u64 {
        self.n
    }
    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    pub fn zero(&self) -> u64 {
        0
    }
    pub fn one(&self) -> u64 {
        1
    }
    /// Code of the constant -1 (base-p digit p-1 in the lowest slot).
    pub fn neg_one(&self) -> u64 {
        self.base.p() - 1
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.n
    }

    /// Reduce a polynomial over F_q modulo pi into the residue field.
    pub fn from_poly(&self, f: &Poly) -> u64 {
        let r = f.rem(&self.pi).expect("nonzero modulus");
        let mut code = 0u64;
        let q = self.base.q() as u64;
        for i in (0..self.d).rev() {
            code = code * q + self.base.code(&r.coeff(i)) as u64;
        }
        code
    }

    pub fn to_poly(&self, code: u64) -> Poly {
        let q = self.base.q() as u64;
        let mut c = Vec::with_capacity(self.d);
        let mut rest = code;
        for _ in 0..self.d {
            c.push(
                self.base
                    .from_code((rest % q) as u128)
                    .expect("digit below q"),
            );
            rest /= q;
        }
        Poly::from_coeffs(&self.base, c)
    }

    /// Lift a base-field element (constant residue) into the field.
    pub fn from_base(&self, v: &Fe) -> u64 {
        self.base.code(v) as u64
    }

    // ---- additive structure: carry-free base-p digit arithmetic ------------

    pub fn add(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.n && b < self.n);
        let p = self.base.p();
        let mut out = 0u64;
        let mut mult = 1u64;
        let (mut x, mut y) = (a, b);
        while x > 0 || y > 0 {
            let s = (x % p + y % p) % p;
            out += s * mult;
            mult *= p;
            x /= p;
            y /= p;
        }
        out
    }

    pub fn neg(&self, a: u64) -> u64 {
        let p = self.base.p();
        let mut out = 0u64;
        let mut mult = 1u64;
        let mut x = a;
        while x > 0 {
            let d = x % p;
            if d != 0 {
                out += (p - d) * mult;
            }
            mult *= p;
            x /= p;
        }
        out
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    // ---- multiplicative structure -------------------------------------------

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        if let Some(t) = &self.tables {
            let i = t.log[a as usize] as u64 + t.log[b as usize] as u64;
            return t.exp[(i % (self.n - 1)) as usize] as u64;
        }
        if let Some(row) = &self.neg_pi_digits {
            if self.d <= DIGIT_CAP {
                return self.mul_digits(a, b, row);
            }
        }
        let prod = self.to_poly(a).mul(&self.to_poly(b));
        self.from_poly(&prod)
    }

    /// Schoolbook convolution on base-p digits followed by x^d reduction,
    /// entirely on the stack. Prime base only.
    fn mul_digits(&self, a: u64, b: u64, neg_pi: &[u64]) -> u64 {
        let p = self.base.p() as u128;
        let d = self.d;
        let mut ad = [0u64; DIGIT_CAP];
        let mut bd = [0u64; DIGIT_CAP];
        let (mut x, mut y) = (a, b);
        for i in 0..d {
            ad[i] = x % p as u64;
            bd[i] = y % p as u64;
            x /= p as u64;
            y /= p as u64;
        }
        let mut acc = [0u128; 2 * DIGIT_CAP];
        for i in 0..d {
            if ad[i] == 0 {
                continue;
            }
            for j in 0..d {
                acc[i + j] += ad[i] as u128 * bd[j] as u128;
            }
        }
        for i in (d..2 * d - 1).rev() {
            let c = acc[i] % p;
            if c != 0 {
                for (j, &npj) in neg_pi.iter().enumerate() {
                    acc[i - d + j] += c * npj as u128;
                }
            }
        }
        let mut code = 0u64;
        for i in (0..d).rev() {
            code = code * p as u64 + (acc[i] % p) as u64;
        }
        code
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::domain("inverse of zero residue"));
        }
        if let Some(t) = &self.tables {
            let i = (self.n - 1 - t.log[a as usize] as u64) % (self.n - 1);
            return Ok(t.exp[i as usize] as u64);
        }
        let r = self.pow(a, self.n as u128 - 2);
        debug_assert_eq!(self.mul(a, r), 1);
        Ok(r)
    }

    pub fn pow(&self, a: u64, mut e: u128) -> u64 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        if let Some(t) = &self.tables {
            let l = t.log[a as usize] as u128;
            let i = (l * (e % (self.n as u128 - 1))) % (self.n as u128 - 1);
            return t.exp[i as usize] as u64;
        }
        let mut acc = 1u64;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Quadratic character: 0 on zero, +1 on nonzero squares, -1 otherwise.
    pub fn chi(&self, a: u64) -> i32 {
        if a == 0 {
            return 0;
        }
        if let Some(t) = &self.tables {
            return if t.log[a as usize] % 2 == 0 { 1 } else { -1 };
        }
        let e = (self.n as u128 - 1) / 2;
        if self.pow(a, e) == 1 {
            1
        } else {
            -1
        }
    }

    /// Square root with the smaller code, when one exists.
    pub fn sqrt(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return Some(0);
        }
        if self.chi(a) < 0 {
            return None;
        }
        let r = if let Some(t) = &self.tables {
            let l = t.log[a as usize] as u64;
            debug_assert_eq!(l % 2, 0);
            t.exp[(l / 2) as usize] as u64
        } else {
            self.sqrt_tonelli(a)
        };
        let r2 = self.neg(r);
        Some(r.min(r2))
    }

    fn sqrt_tonelli(&self, a: u64) -> u64 {
        let n1 = self.n as u128 - 1;
        let e = n1.trailing_zeros();
        let m = n1 >> e;
        if e == 1 {
            return self.pow(a, (self.n as u128 + 1) >> 2);
        }
        let mut z = 2u64;
        while self.chi(z) >= 0 {
            z += 1;
        }
        let mut c = self.pow(z, m);
        let mut r = self.pow(a, (m + 1) >> 1);
        let mut t = self.pow(a, m);
        let mut mm = e;
        while t != 1 {
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(mm - i - 1) {
                b = self.mul(b, b);
            }
            r = self.mul(r, b);
            c = self.mul(b, b);
            t = self.mul(t, c);
            mm = i;
        }
        debug_assert_eq!(self.mul(r, r), a);
        r
    }

    fn build_tables(&mut self) -> Result<()> {
        let n1 = self.n - 1;
        let mut primes = vec![];
        let mut rest = n1;
        let mut p = 2u64;
        while p * p <= rest {
            if rest % p == 0 {
                primes.push(p);
                while rest % p == 0 {
                    rest /= p;
                }
            }
            p += 1;
        }
        if rest > 1 {
            primes.push(rest);
        }
        let mut g = 2u64;
        loop {
            if g >= self.n {
                return Err(Error::internal("no multiplicative generator found"));
            }
            if primes.iter().all(|&l| self.pow(g, (n1 / l) as u128) != 1) {
                break;
            }
            g += 1;
        }
        let mut exp = vec![0u32; n1 as usize];
        let mut log = vec![u32::MAX; self.n as usize];
        let mut cur = 1u64;
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = cur as u32;
            log[cur as usize] = i as u32;
            cur = self.mul(cur, g);
        }
        debug_assert_eq!(cur, 1, "generator order mismatch");
        self.tables = Some(Tables { log, exp });
        Ok(())
    }
}
