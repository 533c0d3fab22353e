//! The rational function field K = F_q(t) and the places of P^1.
//!
//! Polynomials are dense little-endian coefficient vectors over a fixed
//! [`FieldSpec`]. Places are monic irreducible polynomials plus the place at
//! infinity; they order by (degree, finite-before-infinite, coefficient code),
//! so the five degree-one places of P^1(F_5) come first, then infinity, then
//! the degree-two places, and so on.
//!
//! Valuations satisfy the product formula sum_v deg(v) * v(x) = 0, and the
//! height of x = n/d is max(deg n, deg d) for any reduced presentation. Both
//! facts are load-bearing downstream and are pinned by tests here.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldSpec};

/// Dense polynomial over F_q in the variable t. Coefficients little-endian,
/// always trimmed (no zero leading coefficient); the zero polynomial has an
/// empty coefficient vector.
#[derive(Clone)]
pub struct Poly {
    spec: FieldSpec,
    c: Vec<Fe>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.c == other.c
    }
}
impl Eq for Poly {}

impl Hash for Poly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.spec.p().hash(state);
        self.spec.k().hash(state);
        for fe in &self.c {
            self.spec.code(fe).hash(state);
        }
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Poly {
    pub fn zero(spec: &FieldSpec) -> Poly {
        Poly {
            spec: spec.clone(),
            c: vec![],
        }
    }

    pub fn one(spec: &FieldSpec) -> Poly {
        Poly::constant(spec, spec.one())
    }

    pub fn constant(spec: &FieldSpec, v: Fe) -> Poly {
        let mut p = Poly {
            spec: spec.clone(),
            c: vec![v],
        };
        p.trim();
        p
    }

    /// The monomial t.
    pub fn t(spec: &FieldSpec) -> Poly {
        Poly::from_coeffs(spec, vec![spec.zero(), spec.one()])
    }

    pub fn from_coeffs(spec: &FieldSpec, c: Vec<Fe>) -> Poly {
        let mut p = Poly {
            spec: spec.clone(),
            c,
        };
        p.trim();
        p
    }

    /// Coefficients given as canonical element codes.
    pub fn from_codes(spec: &FieldSpec, codes: &[u128]) -> Result<Poly> {
        let c = codes
            .iter()
            .map(|&code| spec.from_code(code))
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::from_coeffs(spec, c))
    }

    fn trim(&mut self) {
        while self
            .c
            .last()
            .map(|v| self.spec.is_zero(v))
            .unwrap_or(false)
        {
            self.c.pop();
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.spec.is_one(&self.c[0])
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    /// Degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree as i64 with deg(0) = -1 (handy in max/min arithmetic).
    pub fn deg_i64(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn leading(&self) -> Fe {
        self.c.last().cloned().unwrap_or_else(|| self.spec.zero())
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.c.get(i).cloned().unwrap_or_else(|| self.spec.zero())
    }

    pub fn is_monic(&self) -> bool {
        self.c
            .last()
            .map(|v| self.spec.is_one(v))
            .unwrap_or(false)
    }

    fn assert_same_field(&self, other: &Poly) {
        assert!(
            self.spec == other.spec,
            "polynomial operands over different fields"
        );
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.assert_same_field(other);
        let n = self.c.len().max(other.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.spec.add(&self.coeff(i), &other.coeff(i)));
        }
        Poly::from_coeffs(&self.spec, c)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.assert_same_field(other);
        let n = self.c.len().max(other.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.spec.sub(&self.coeff(i), &other.coeff(i)));
        }
        Poly::from_coeffs(&self.spec, c)
    }

    pub fn neg(&self) -> Poly {
        let c = self.c.iter().map(|v| self.spec.neg(v)).collect();
        Poly::from_coeffs(&self.spec, c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.assert_same_field(other);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.spec);
        }
        Poly::from_coeffs(&self.spec, mul_slices(&self.spec, &self.c, &other.c))
    }

    pub fn scale(&self, v: &Fe) -> Poly {
        let c = self.c.iter().map(|a| self.spec.mul(a, v)).collect();
        Poly::from_coeffs(&self.spec, c)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(&self.spec);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Euclidean division: (quotient, remainder) with deg r < deg d.
    pub fn divmod(&self, d: &Poly) -> Result<(Poly, Poly)> {
        self.assert_same_field(d);
        if d.is_zero() {
            return Err(Error::domain("polynomial division by zero"));
        }
        let dd = d.c.len() - 1;
        let lead_inv = self.spec.inv(&d.c[dd])?;
        let mut r = self.c.clone();
        let mut q = vec![self.spec.zero(); self.c.len().saturating_sub(dd)];
        while r.len() > dd {
            let top = r.last().unwrap().clone();
            let coef = self.spec.mul(&top, &lead_inv);
            let shift = r.len() - 1 - dd;
            if !self.spec.is_zero(&coef) {
                q[shift] = coef.clone();
                for (j, m) in d.c.iter().enumerate() {
                    let t = self.spec.mul(&coef, m);
                    r[shift + j] = self.spec.sub(&r[shift + j], &t);
                }
            }
            r.pop();
            while r.last().map(|v| self.spec.is_zero(v)).unwrap_or(false) {
                r.pop();
            }
        }
        Ok((
            Poly::from_coeffs(&self.spec, q),
            Poly::from_coeffs(&self.spec, r),
        ))
    }

    pub fn rem(&self, d: &Poly) -> Result<Poly> {
        Ok(self.divmod(d)?.1)
    }

    pub fn div_exact(&self, d: &Poly) -> Result<Poly> {
        let (q, r) = self.divmod(d)?;
        if !r.is_zero() {
            return Err(Error::internal("inexact polynomial division"));
        }
        Ok(q)
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Poly) -> Poly {
        self.assert_same_field(other);
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns (g, s, u) monic g with s*self + u*other = g.
    pub fn ext_gcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        self.assert_same_field(other);
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(&self.spec), Poly::zero(&self.spec));
        let (mut t0, mut t1) = (Poly::zero(&self.spec), Poly::one(&self.spec));
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1).expect("nonzero divisor");
            let snew = s0.sub(&q.mul(&s1));
            let tnew = t0.sub(&q.mul(&t1));
            (r0, r1) = (r1, r);
            (s0, s1) = (s1, snew);
            (t0, t1) = (t1, tnew);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let lead_inv = self.spec.inv(&r0.leading()).expect("nonzero leading");
        (
            r0.scale(&lead_inv),
            s0.scale(&lead_inv),
            t0.scale(&lead_inv),
        )
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Poly {
        if self.is_zero() || self.is_monic() {
            return self.clone();
        }
        let inv = self.spec.inv(&self.leading()).expect("nonzero leading");
        self.scale(&inv)
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero(&self.spec);
        }
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, v)| {
                let scalar = self.spec.from_u64(i as u64);
                self.spec.mul(v, &scalar)
            })
            .collect();
        Poly::from_coeffs(&self.spec, c)
    }

    pub fn eval(&self, x: &Fe) -> Fe {
        let mut acc = self.spec.zero();
        for v in self.c.iter().rev() {
            acc = self.spec.add(&self.spec.mul(&acc, x), v);
        }
        acc
    }

    /// Exact square root, if this polynomial is a perfect square.
    ///
    /// The top half of the root is forced coefficient by coefficient from the
    /// leading terms (char >= 3 so 2*lead is invertible); the candidate is
    /// then verified by squaring, which rejects non-squares whose top half
    /// happens to be consistent.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let d = self.c.len() - 1;
        if d % 2 != 0 {
            return None;
        }
        let m = d / 2;
        let spec = &self.spec;
        let top = spec.sqrt(&self.leading())?;
        let mut h = vec![spec.zero(); m + 1];
        let inv_2top = spec.inv(&spec.add(&top, &top)).ok()?;
        h[m] = top;
        for k in (0..m).rev() {
            // coefficient of x^(m+k) in h^2 is 2 h_m h_k plus known products
            let mut s = self.coeff(m + k);
            let mut i = k + 1;
            let mut j = m + k - i;
            while i < j {
                let prod = spec.mul(&h[i], &h[j]);
                s = spec.sub(&s, &spec.add(&prod, &prod));
                i += 1;
                j -= 1;
            }
            if i == j {
                let sq = spec.mul(&h[i], &h[i]);
                s = spec.sub(&s, &sq);
            }
            h[k] = spec.mul(&s, &inv_2top);
        }
        let root = Poly::from_coeffs(spec, h);
        if root.mul(&root) == *self {
            Some(root)
        } else {
            None
        }
    }

    /// Coefficient reversal to a fixed degree: returns u^D * f(1/u) as a
    /// polynomial in u. Requires D >= deg f.
    pub fn reversed(&self, cap: usize) -> Poly {
        assert!(cap as i64 >= self.deg_i64(), "reversal cap below degree");
        let mut c = vec![self.spec.zero(); cap + 1];
        for (i, v) in self.c.iter().enumerate() {
            c[cap - i] = v.clone();
        }
        Poly::from_coeffs(&self.spec, c)
    }

    /// Multiplicity of a monic irreducible divisor.
    pub fn multiplicity_of(&self, pi: &Poly) -> u32 {
        assert!(!self.is_zero(), "multiplicity in the zero polynomial");
        let mut m = 0;
        let mut f = self.clone();
        loop {
            let (q, r) = f.divmod(pi).expect("nonzero divisor");
            if !r.is_zero() {
                return m;
            }
            m += 1;
            f = q;
        }
    }

    /// Deterministic total order: degree first, then coefficient codes from
    /// the top down. Only meaningful within one field.
    pub fn cmp_canonical(&self, other: &Poly) -> Ordering {
        self.assert_same_field(other);
        match self.c.len().cmp(&other.c.len()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for i in (0..self.c.len()).rev() {
            let a = self.spec.code(&self.c[i]);
            let b = self.spec.code(&other.c[i]);
            match a.cmp(&b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// Substitute another polynomial for t.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero(&self.spec);
        for v in self.c.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(&self.spec, v.clone()));
        }
        acc
    }

    // ---- irreducibility and factorization ----------------------------------

    /// x^e mod self, with e a big integer (e.g. q^d).
    fn modpow_t(&self, e: &BigUint) -> Poly {
        let mut result = Poly::one(&self.spec);
        let mut base = Poly::t(&self.spec).rem(self).expect("nonzero modulus");
        let mut bits = e.clone();
        while !bits.is_zero() {
            if (&bits & BigUint::one()) == BigUint::one() {
                result = result.mul(&base).rem(self).expect("nonzero modulus");
            }
            base = base.mul(&base).rem(self).expect("nonzero modulus");
            bits >>= 1;
        }
        result
    }

    fn poly_modpow(&self, base: &Poly, e: &BigUint) -> Poly {
        let mut result = Poly::one(&self.spec);
        let mut b = base.rem(self).expect("nonzero modulus");
        let mut bits = e.clone();
        while !bits.is_zero() {
            if (&bits & BigUint::one()) == BigUint::one() {
                result = result.mul(&b).rem(self).expect("nonzero modulus");
            }
            b = b.mul(&b).rem(self).expect("nonzero modulus");
            bits >>= 1;
        }
        result
    }

    /// Rabin test over F_q.
    pub fn is_irreducible(&self) -> bool {
        let d = match self.degree() {
            None | Some(0) => return false,
            Some(d) => d,
        };
        if d == 1 {
            return true;
        }
        let f = self.monic();
        let q = BigUint::from(self.spec.q());
        let x = Poly::t(&self.spec).rem(&f).expect("nonzero modulus");
        let xqd = f.modpow_t(&q.pow(d as u32));
        if xqd != x {
            return false;
        }
        let mut primes = vec![];
        let mut n = d;
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                primes.push(p);
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        for l in primes {
            let xe = f.modpow_t(&q.pow((d / l) as u32));
            let g = f.gcd(&xe.sub(&x));
            if !g.is_one() {
                return false;
            }
        }
        true
    }

    /// Full factorization: returns the leading unit and the monic irreducible
    /// factors with multiplicities, sorted canonically.
    pub fn factor(&self) -> Result<(Fe, Vec<(Poly, u32)>)> {
        if self.is_zero() {
            return Err(Error::domain("factorization of the zero polynomial"));
        }
        let unit = self.leading();
        let f = self.monic();
        let mut out: Vec<(Poly, u32)> = vec![];
        for (part, mult) in squarefree_decomposition(&f) {
            for irred in factor_squarefree(&part) {
                out.push((irred, mult));
            }
        }
        out.sort_by(|a, b| a.0.cmp_canonical(&b.0));
        Ok((unit, out))
    }
}

const KARATSUBA_CUTOFF: usize = 32;

/// Coefficients of the product of two nonempty coefficient slices, length
/// la + lb - 1, untrimmed. Schoolbook below the cutoff, Karatsuba above.
fn mul_slices(spec: &FieldSpec, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    if a.len().min(b.len()) <= KARATSUBA_CUTOFF {
        let mut c = vec![spec.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if spec.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let prod = spec.mul(x, y);
                c[i + j] = spec.add(&c[i + j], &prod);
            }
        }
        return c;
    }
    let m = a.len().max(b.len()).div_ceil(2);
    let (a0, a1) = a.split_at(a.len().min(m));
    let (b0, b1) = b.split_at(b.len().min(m));
    let z0 = mul_slices(spec, a0, b0);
    let z2 = if a1.is_empty() || b1.is_empty() {
        vec![]
    } else {
        mul_slices(spec, a1, b1)
    };
    // z1 = (a0+a1)(b0+b1) - z0 - z2 = a0*b1 + a1*b0
    let asum = add_slices(spec, a0, a1);
    let bsum = add_slices(spec, b0, b1);
    let mut z1 = mul_slices(spec, &asum, &bsum);
    sub_from_slice(spec, &mut z1, &z0);
    sub_from_slice(spec, &mut z1, &z2);
    while z1.last().map(|v| spec.is_zero(v)).unwrap_or(false) {
        z1.pop();
    }
    let mut c = vec![spec.zero(); a.len() + b.len() - 1];
    for (i, v) in z0.iter().enumerate() {
        c[i] = spec.add(&c[i], v);
    }
    for (i, v) in z1.iter().enumerate() {
        c[m + i] = spec.add(&c[m + i], v);
    }
    for (i, v) in z2.iter().enumerate() {
        c[2 * m + i] = spec.add(&c[2 * m + i], v);
    }
    c
}

fn add_slices(spec: &FieldSpec, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    let n = a.len().max(b.len());
    let zero = spec.zero();
    (0..n)
        .map(|i| spec.add(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
        .collect()
}

fn sub_from_slice(spec: &FieldSpec, dst: &mut [Fe], src: &[Fe]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = spec.sub(d, s);
    }
}

/// p-th root of a polynomial whose derivative vanishes (all exponents
/// divisible by p); coefficient-wise q/p power inverts Frobenius on F_q.
fn pth_root(f: &Poly) -> Poly {
    let spec = f.spec().clone();
    let p = spec.p() as usize;
    let root_exp = spec.q() / spec.p() as u128;
    let mut c = vec![];
    for (i, v) in f.coeffs().iter().enumerate() {
        if i % p == 0 {
            c.push(spec.pow(v, root_exp));
        } else {
            debug_assert!(spec.is_zero(v), "derivative was nonzero after all");
        }
    }
    Poly::from_coeffs(&spec, c)
}

/// Squarefree decomposition of a monic polynomial, valid in characteristic p.
/// Returns pairwise-coprime squarefree monic parts with multiplicities.
fn squarefree_decomposition(f: &Poly) -> Vec<(Poly, u32)> {
    let spec = f.spec().clone();
    if f.is_constant() {
        return vec![];
    }
    let fp = f.derivative();
    if fp.is_zero() {
        let root = pth_root(f);
        return squarefree_decomposition(&root)
            .into_iter()
            .map(|(g, m)| (g, m * spec.p() as u32))
            .collect();
    }
    let mut out = vec![];
    let mut c = f.gcd(&fp);
    let mut w = f.div_exact(&c).expect("gcd divides");
    let mut i = 1u32;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.div_exact(&y).expect("gcd divides");
        if !fac.is_one() {
            out.push((fac, i));
        }
        c = c.div_exact(&y).expect("gcd divides");
        w = y;
        i += 1;
    }
    // What is left of c collects factors whose multiplicity is divisible by p.
    if !c.is_one() {
        let root = pth_root(&c);
        for (g, m) in squarefree_decomposition(&root) {
            out.push((g, m * spec.p() as u32));
        }
    }
    out
}

/// Distinct-degree then equal-degree factorization of a squarefree monic poly.
fn factor_squarefree(f: &Poly) -> Vec<Poly> {
    let spec = f.spec().clone();
    let q = BigUint::from(spec.q());
    let mut out = vec![];
    let mut rest = f.clone();
    let mut xq = Poly::t(&spec).rem(&rest).ok();
    let mut d = 0usize;
    while rest.deg_i64() > 0 {
        d += 1;
        if (rest.deg_i64() as usize) < 2 * d {
            out.push(rest.clone());
            break;
        }
        // advance x^{q^d} mod rest by one Frobenius step
        let cur = match &xq {
            Some(v) => rest.poly_modpow(v, &q),
            None => break,
        };
        xq = Some(cur.clone());
        let x = Poly::t(&spec).rem(&rest).expect("nonzero modulus");
        let g = rest.gcd(&cur.sub(&x));
        if !g.is_one() {
            split_equal_degree(&g, d, &mut out);
            rest = rest.div_exact(&g).expect("gcd divides");
            xq = xq.map(|v| v.rem(&rest).expect("nonzero modulus"));
            if rest.is_constant() {
                break;
            }
        }
    }
    out
}

/// Cantor-Zassenhaus splitting for a product of degree-d irreducibles.
/// Randomness is deterministic per input so runs are reproducible.
fn split_equal_degree(f: &Poly, d: usize, out: &mut Vec<Poly>) {
    let n = f.degree().unwrap_or(0);
    if n == d {
        out.push(f.monic());
        return;
    }
    let spec = f.spec().clone();
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    f.hash(&mut hasher);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f0f0 ^ Hasher::finish(&hasher));
    let e = (BigUint::from(spec.q()).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
    loop {
        let c: Vec<Fe> = (0..n)
            .map(|_| {
                let code = rng.gen_range(0..spec.q());
                spec.from_code(code).expect("code in range")
            })
            .collect();
        let a = Poly::from_coeffs(&spec, c);
        if a.is_constant() {
            continue;
        }
        let g1 = f.gcd(&a);
        if !g1.is_one() && g1.degree() != f.degree() {
            split_equal_degree(&g1, d, out);
            split_equal_degree(&f.div_exact(&g1).expect("gcd divides"), d, out);
            return;
        }
        let b = f.poly_modpow(&a, &e);
        let g = f.gcd(&b.sub(&Poly::one(&spec)));
        if !g.is_one() && g.degree() != f.degree() {
            split_equal_degree(&g, d, out);
            split_equal_degree(&f.div_exact(&g).expect("gcd divides"), d, out);
            return;
        }
    }
}

/// All monic irreducibles of a given degree, in canonical code order.
pub fn monic_irreducibles(spec: &FieldSpec, degree: usize) -> Result<Vec<Poly>> {
    if degree == 0 {
        return Err(Error::domain("no irreducibles of degree zero"));
    }
    let q = spec.q();
    let total = q.checked_pow(degree as u32).ok_or_else(|| {
        Error::resource(format!("too many polynomials of degree {degree} to scan"))
    })?;
    if total > 100_000_000 {
        return Err(Error::resource(format!(
            "enumerating {total} monic polynomials of degree {degree} is out of range"
        )));
    }
    let mut out = vec![];
    for code in 0..total {
        let mut c = Vec::with_capacity(degree + 1);
        let mut rest = code;
        for _ in 0..degree {
            c.push(spec.from_code(rest % q).expect("code in range"));
            rest /= q;
        }
        c.push(spec.one());
        let f = Poly::from_coeffs(spec, c);
        if f.is_irreducible() {
            out.push(f);
        }
    }
    Ok(out)
}

// ---- parsing and printing -----------------------------------------------------

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..self.c.len()).rev() {
            let code = self.spec.code(&self.c[i]);
            if code == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, code) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, c) => write!(f, "{c}*t")?,
                (e, 1) => write!(f, "t^{e}")?,
                (e, c) => write!(f, "{c}*t^{e}")?,
            }
        }
        Ok(())
    }
}

/// Parse either the comma form "c0,c1,...,cd" (codes, little-endian) or the
/// symbolic form "t^3+2*t+1". Symbolic coefficients are element codes.
pub fn parse_poly(spec: &FieldSpec, s: &str) -> Result<Poly> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::ingestion("empty polynomial literal"));
    }
    if s.contains(',') {
        let codes = s
            .split(',')
            .map(|tok| {
                tok.parse::<u128>()
                    .map_err(|_| Error::ingestion(format!("bad coefficient {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        for &c in &codes {
            if c >= spec.q() {
                return Err(Error::ingestion(format!(
                    "coefficient code {c} outside field of order {}",
                    spec.q()
                )));
            }
        }
        return Poly::from_codes(spec, &codes);
    }
    // symbolic form: split into signed terms
    let mut acc = Poly::zero(spec);
    let bytes = s.as_bytes();
    let mut i = 0usize;
    while i < bytes.len() {
        let mut sign = 1i64;
        while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            if bytes[i] == b'-' {
                sign = -sign;
            }
            i += 1;
        }
        let start = i;
        while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            i += 1;
        }
        let term = &s[start..i];
        if term.is_empty() {
            return Err(Error::ingestion(format!("dangling sign in {s:?}")));
        }
        let (coeff_str, exp) = match term.find('t') {
            None => (term, 0usize),
            Some(tpos) => {
                let coeff = term[..tpos].trim_end_matches('*');
                let after = &term[tpos + 1..];
                let exp = if after.is_empty() {
                    1
                } else if let Some(e) = after.strip_prefix('^') {
                    e.parse::<usize>()
                        .map_err(|_| Error::ingestion(format!("bad exponent in {term:?}")))?
                } else {
                    return Err(Error::ingestion(format!("malformed term {term:?}")));
                };
                (coeff, exp)
            }
        };
        let code: u128 = if coeff_str.is_empty() {
            1
        } else {
            coeff_str
                .parse()
                .map_err(|_| Error::ingestion(format!("bad coefficient in {term:?}")))?
        };
        if code >= spec.q() {
            return Err(Error::ingestion(format!(
                "coefficient code {code} outside field of order {}",
                spec.q()
            )));
        }
        let mut v = spec.from_code(code)?;
        if sign < 0 {
            v = spec.neg(&v);
        }
        let mut c = vec![spec.zero(); exp + 1];
        c[exp] = v;
        acc = acc.add(&Poly::from_coeffs(spec, c));
    }
    Ok(acc)
}

/// Rational function n/d over F_q(t), kept reduced with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl RatFunc {
    pub fn from_poly(p: Poly) -> RatFunc {
        let one = Poly::one(p.spec());
        RatFunc { num: p, den: one }
    }

    pub fn zero(spec: &FieldSpec) -> RatFunc {
        RatFunc::from_poly(Poly::zero(spec))
    }

    pub fn one(spec: &FieldSpec) -> RatFunc {
        RatFunc::from_poly(Poly::one(spec))
    }

    pub fn constant(spec: &FieldSpec, v: Fe) -> RatFunc {
        RatFunc::from_poly(Poly::constant(spec, v))
    }

    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::domain("rational function with zero denominator"));
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g)?, den.div_exact(&g)?)
        };
        let lead_inv = den.spec().inv(&den.leading())?;
        num = num.scale(&lead_inv);
        den = den.scale(&lead_inv);
        Ok(RatFunc { num, den })
    }

    pub fn spec(&self) -> &FieldSpec {
        self.num.spec()
    }
    pub fn num(&self) -> &Poly {
        &self.num
    }
    pub fn den(&self) -> &Poly {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("nonzero denominator")
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        if other.is_zero() {
            return Err(Error::domain("division by the zero function"));
        }
        RatFunc::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> Result<RatFunc> {
        RatFunc::one(self.spec()).div(self)
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        RatFunc::new(self.num.pow(e), self.den.pow(e)).expect("nonzero denominator")
    }

    pub fn scale(&self, v: &Fe) -> RatFunc {
        RatFunc::new(self.num.scale(v), self.den.clone()).expect("nonzero denominator")
    }

    /// Exact square root in F_q(t), if this function is a square. Numerator
    /// and denominator are coprime, so each must be a square on its own.
    pub fn sqrt(&self) -> Option<RatFunc> {
        let num = self.num.sqrt()?;
        let den = self.den.sqrt()?;
        // sqrt of a monic square is monic, so the invariants hold directly
        debug_assert!(den.is_monic());
        Some(RatFunc { num, den })
    }

    /// Valuation at a place; the zero function has valuation +infinity,
    /// reported as None.
    pub fn valuation(&self, at: &Place) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        match at {
            Place::Infinity(_) => Some(self.den.deg_i64() - self.num.deg_i64()),
            Place::Finite(pi) => {
                let vn = self.num.multiplicity_of(pi) as i64;
                let vd = self.den.multiplicity_of(pi) as i64;
                Some(vn - vd)
            }
        }
    }

    /// Height: max degree of the reduced presentation; h(0) = 0.
    pub fn height(&self) -> u64 {
        if self.is_zero() {
            return 0;
        }
        self.num.deg_i64().max(self.den.deg_i64()) as u64
    }

    /// The places where the function has nonzero valuation, plus infinity
    /// when relevant: the full support of div(x).
    pub fn support(&self) -> Vec<Place> {
        let mut out = vec![];
        if self.is_zero() {
            return out;
        }
        let spec = self.spec().clone();
        let (_, nf) = self.num.factor().expect("nonzero");
        let (_, df) = self.den.factor().expect("nonzero");
        let mut seen: Vec<Poly> = vec![];
        for (pi, _) in nf.into_iter().chain(df) {
            if !seen.contains(&pi) {
                seen.push(pi);
            }
        }
        for pi in seen {
            out.push(Place::finite(pi).expect("factor is irreducible"));
        }
        if self.num.deg_i64() != self.den.deg_i64() {
            out.push(Place::infinity(&spec));
        }
        out.sort();
        out
    }

    /// The image of x under t -> 1/t, as a function of the new variable.
    /// Turns behavior at infinity into behavior at the origin: the valuation
    /// of the result at (t) equals the valuation of x at infinity.
    pub fn invert_variable(&self) -> RatFunc {
        if self.is_zero() {
            return self.clone();
        }
        let dn = self.num.degree().expect("nonzero") ;
        let dd = self.den.degree().expect("nonzero");
        let rn = self.num.reversed(dn);
        let rd = self.den.reversed(dd);
        let spec = self.spec().clone();
        let (mut num, mut den) = (rn, rd);
        if dd >= dn {
            let mut shift = vec![spec.zero(); dd - dn + 1];
            shift[dd - dn] = spec.one();
            num = num.mul(&Poly::from_coeffs(&spec, shift));
        } else {
            let mut shift = vec![spec.zero(); dn - dd + 1];
            shift[dn - dd] = spec.one();
            den = den.mul(&Poly::from_coeffs(&spec, shift));
        }
        RatFunc::new(num, den).expect("nonzero denominator")
    }

    /// The principal divisor div(x).
    pub fn divisor(&self) -> Result<Divisor> {
        if self.is_zero() {
            return Err(Error::domain("divisor of the zero function"));
        }
        let mut d = Divisor::new();
        for v in self.support() {
            let n = self.valuation(&v).expect("nonzero function");
            d.add_to(&v, n);
        }
        Ok(d)
    }
}

/// Parse "num/den" or a plain polynomial.
pub fn parse_ratfunc(spec: &FieldSpec, s: &str) -> Result<RatFunc> {
    match s.find('/') {
        None => Ok(RatFunc::from_poly(parse_poly(spec, s)?)),
        Some(i) => {
            let num = parse_poly(spec, s[..i].trim_matches(['(', ')'].as_slice()))?;
            let den = parse_poly(spec, s[i + 1..].trim_matches(['(', ')'].as_slice()))?;
            RatFunc::new(num, den)
        }
    }
}

/// A place of P^1 over F_q: a monic irreducible polynomial or infinity.
#[derive(Clone, PartialEq, Eq)]
pub enum Place {
    Finite(Poly),
    Infinity(FieldSpec),
}

impl Place {
    pub fn finite(pi: Poly) -> Result<Place> {
        if !pi.is_monic() || !pi.is_irreducible() {
            return Err(Error::domain(format!(
                "{pi} is not a monic irreducible polynomial"
            )));
        }
        Ok(Place::Finite(pi))
    }

    pub fn infinity(spec: &FieldSpec) -> Place {
        Place::Infinity(spec.clone())
    }

    pub fn spec(&self) -> &FieldSpec {
        match self {
            Place::Finite(pi) => pi.spec(),
            Place::Infinity(s) => s,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(pi) => pi.degree().expect("irreducible is nonzero"),
            Place::Infinity(_) => 1,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Place::Infinity(_))
    }

    /// Order of the residue field, q^deg.
    pub fn residue_order(&self) -> u128 {
        self.spec()
            .q()
            .checked_pow(self.degree() as u32)
            .expect("residue field order fits in u128")
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Place {
    fn cmp(&self, other: &Self) -> Ordering {
        let key_a = (self.degree(), self.is_infinite());
        let key_b = (other.degree(), other.is_infinite());
        match key_a.cmp(&key_b) {
            Ordering::Equal => match (self, other) {
                (Place::Finite(a), Place::Finite(b)) => a.cmp_canonical(b),
                _ => Ordering::Equal,
            },
            ord => ord,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(pi) => write!(f, "({pi})"),
            Place::Infinity(_) => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A finite formal sum of places with integer multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Divisor {
    entries: BTreeMap<Place, i64>,
}

impl Divisor {
    pub fn new() -> Divisor {
        Divisor::default()
    }

    pub fn add_to(&mut self, place: &Place, n: i64) {
        if n == 0 {
            return;
        }
        let e = self.entries.entry(place.clone()).or_insert(0);
        *e += n;
        if *e == 0 {
            self.entries.remove(place);
        }
    }

    pub fn coefficient(&self, place: &Place) -> i64 {
        self.entries.get(place).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Place, i64)> {
        self.entries.iter().map(|(p, &n)| (p, n))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// deg D = sum n_v deg v.
    pub fn degree(&self) -> i64 {
        self.entries
            .iter()
            .map(|(p, &n)| n * p.degree() as i64)
            .sum()
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, n) in self.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if n == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{n}*{p}")?;
            }
        }
        Ok(())
    }
}
