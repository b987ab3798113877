//! Exact coefficient fields: GF(p), GF(p^e), internal tower extensions, and Q.
//!
//! All scalar values are kept in canonical form at all times, so `==` on
//! `Scalar` is semantic equality and encode/parse round-trips are stable.
//! Extension fields use an explicit polynomial modulus: the lexicographically
//! smallest monic irreducible of the required degree, ordering candidate
//! polynomials by their coefficient tuple (c_{e-1}, ..., c_1, c_0). This makes
//! the modulus a deterministic function of (p, e) alone.
//!
//! Tower fields (an extension built on top of an existing extension) exist so
//! that genericity draws never require factoring a modulus over a larger
//! field: the base field embeds as the constant polynomials, and elements
//! whose higher coefficients vanish retract back losslessly. Towers are an
//! internal representation only; they never appear in serialized tensors.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use std::fmt;
use std::sync::Arc;

/// Serializable description of a coefficient field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldSpec {
    /// GF(p), p prime.
    Prime { p: u64 },
    /// GF(p^e), e >= 2, with the canonical modulus for (p, e).
    Ext { p: u64, e: u32 },
    /// The rational numbers.
    Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError(pub String);

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "field error: {}", self.0)
    }
}

impl std::error::Error for FieldError {}

/// A field element. Canonical representatives only:
/// - `U`: integer in [0, p) for GF(p), or packed bit coefficients for GF(2^e);
/// - `P`: exactly e coefficients in [0, p), low degree first, for GF(p^e) with p odd;
/// - `T`: exactly deg coefficients over the tower's base field;
/// - `Q`: reduced rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    U(u64),
    P(Vec<u64>),
    T(Vec<Scalar>),
    Q(BigRational),
}

enum FieldInner {
    Prime { p: u64 },
    /// GF(2^e), elements packed as the low e bits of a u64. `modulus` has bit e set.
    Ext2 { e: u32, modulus: u64 },
    /// GF(p^e), p odd. `modulus` lists the e low coefficients; x^e is implied monic.
    ExtP { p: u64, e: u32, modulus: Vec<u64> },
    /// Degree-`deg` extension of `base`. `modulus` lists the deg low coefficients.
    Tower { base: Field, deg: u32, modulus: Vec<Scalar> },
    Rational,
}

/// A runtime field. Cheap to clone (shared inner), and safe to share across threads.
#[derive(Clone)]
pub struct Field {
    inner: Arc<FieldInner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.inner {
            FieldInner::Prime { p } => write!(f, "GF({p})"),
            FieldInner::Ext2 { e, .. } => write!(f, "GF(2^{e})"),
            FieldInner::ExtP { p, e, .. } => write!(f, "GF({p}^{e})"),
            FieldInner::Tower { base, deg, .. } => write!(f, "{:?}[deg {}]", base, deg),
            FieldInner::Rational => write!(f, "Q"),
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        match (&*self.inner, &*other.inner) {
            (FieldInner::Prime { p: a }, FieldInner::Prime { p: b }) => a == b,
            (FieldInner::Ext2 { e: a, .. }, FieldInner::Ext2 { e: b, .. }) => a == b,
            (
                FieldInner::ExtP { p: a, e: ea, .. },
                FieldInner::ExtP { p: b, e: eb, .. },
            ) => a == b && ea == eb,
            (
                FieldInner::Tower { base: ba, deg: da, .. },
                FieldInner::Tower { base: bb, deg: db, .. },
            ) => da == db && ba == bb,
            (FieldInner::Rational, FieldInner::Rational) => true,
            _ => false,
        }
    }
}
impl Eq for Field {}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    // Deterministic Miller-Rabin for u64 with the standard witness set.
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = modpow_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn modpow_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u64(acc, base, m);
        }
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Extended Euclid inverse in GF(p).
fn inv_mod_u64(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1, "inverse of a noninvertible element");
    (t0.rem_euclid(p as i128)) as u64
}

impl Field {
    pub fn new(spec: &FieldSpec) -> Result<Field, FieldError> {
        match *spec {
            FieldSpec::Prime { p } => {
                if !is_prime_u64(p) {
                    return Err(FieldError(format!("{p} is not prime")));
                }
                Ok(Field { inner: Arc::new(FieldInner::Prime { p }) })
            }
            FieldSpec::Ext { p, e } => {
                if !is_prime_u64(p) {
                    return Err(FieldError(format!("{p} is not prime")));
                }
                if e < 2 {
                    return Err(FieldError("extension degree must be at least 2".into()));
                }
                if p == 2 {
                    if e > 31 {
                        return Err(FieldError("GF(2^e) supported for e <= 31".into()));
                    }
                    let modulus = smallest_irreducible_gf2(e);
                    Ok(Field { inner: Arc::new(FieldInner::Ext2 { e, modulus }) })
                } else {
                    if (e as u64).checked_mul(p).is_none() || BigUint::from(p).pow(e).bits() > 120 {
                        return Err(FieldError("field size out of supported range".into()));
                    }
                    let modulus = smallest_irreducible_gfp(p, e);
                    Ok(Field { inner: Arc::new(FieldInner::ExtP { p, e, modulus }) })
                }
            }
            FieldSpec::Rational => Ok(Field { inner: Arc::new(FieldInner::Rational) }),
        }
    }

    pub fn rational() -> Field {
        Field::new(&FieldSpec::Rational).unwrap()
    }

    pub fn prime(p: u64) -> Result<Field, FieldError> {
        Field::new(&FieldSpec::Prime { p })
    }

    /// The public description of this field. Towers report as the extension
    /// GF(p^d) of their total degree d over the prime field.
    pub fn spec(&self) -> FieldSpec {
        match &*self.inner {
            FieldInner::Prime { p } => FieldSpec::Prime { p: *p },
            FieldInner::Ext2 { e, .. } => FieldSpec::Ext { p: 2, e: *e },
            FieldInner::ExtP { p, e, .. } => FieldSpec::Ext { p: *p, e: *e },
            FieldInner::Tower { base, deg, .. } => match base.spec() {
                FieldSpec::Prime { p } => FieldSpec::Ext { p, e: *deg },
                FieldSpec::Ext { p, e } => FieldSpec::Ext { p, e: e * *deg },
                FieldSpec::Rational => unreachable!("towers are built over finite fields"),
            },
            FieldInner::Rational => FieldSpec::Rational,
        }
    }

    pub fn characteristic(&self) -> u64 {
        match &*self.inner {
            FieldInner::Prime { p } => *p,
            FieldInner::Ext2 { .. } => 2,
            FieldInner::ExtP { p, .. } => *p,
            FieldInner::Tower { base, .. } => base.characteristic(),
            FieldInner::Rational => 0,
        }
    }

    /// Number of elements; None for the rationals.
    pub fn size(&self) -> Option<BigUint> {
        match &*self.inner {
            FieldInner::Prime { p } => Some(BigUint::from(*p)),
            FieldInner::Ext2 { e, .. } => Some(BigUint::from(2u64).pow(*e)),
            FieldInner::ExtP { p, e, .. } => Some(BigUint::from(*p).pow(*e)),
            FieldInner::Tower { base, deg, .. } => Some(base.size().unwrap().pow(*deg)),
            FieldInner::Rational => None,
        }
    }

    pub fn zero(&self) -> Scalar {
        match &*self.inner {
            FieldInner::Prime { .. } | FieldInner::Ext2 { .. } => Scalar::U(0),
            FieldInner::ExtP { e, .. } => Scalar::P(vec![0; *e as usize]),
            FieldInner::Tower { base, deg, .. } => {
                Scalar::T(vec![base.zero(); *deg as usize])
            }
            FieldInner::Rational => Scalar::Q(BigRational::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        match &*self.inner {
            FieldInner::Prime { .. } | FieldInner::Ext2 { .. } => Scalar::U(1),
            FieldInner::ExtP { e, .. } => {
                let mut c = vec![0; *e as usize];
                c[0] = 1;
                Scalar::P(c)
            }
            FieldInner::Tower { base, deg, .. } => {
                let mut c = vec![base.zero(); *deg as usize];
                c[0] = base.one();
                Scalar::T(c)
            }
            FieldInner::Rational => Scalar::Q(BigRational::one()),
        }
    }

    /// The image of the integer n under the unique ring map Z -> F.
    pub fn from_int(&self, n: i64) -> Scalar {
        match &*self.inner {
            FieldInner::Prime { p } => Scalar::U(n.rem_euclid(*p as i64) as u64),
            FieldInner::Ext2 { .. } => Scalar::U((n & 1) as u64),
            FieldInner::ExtP { p, e, .. } => {
                let mut c = vec![0; *e as usize];
                c[0] = n.rem_euclid(*p as i64) as u64;
                Scalar::P(c)
            }
            FieldInner::Tower { base, deg, .. } => {
                let mut c = vec![base.zero(); *deg as usize];
                c[0] = base.from_int(n);
                Scalar::T(c)
            }
            FieldInner::Rational => Scalar::Q(BigRational::from_integer(n.into())),
        }
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::U(x) => *x == 0,
            Scalar::P(c) => c.iter().all(|&x| x == 0),
            Scalar::T(c) => {
                let base = self.tower_base();
                c.iter().all(|x| base.is_zero(x))
            }
            Scalar::Q(q) => q.is_zero(),
        }
    }

    fn tower_base(&self) -> &Field {
        match &*self.inner {
            FieldInner::Tower { base, .. } => base,
            _ => panic!("tower element in a non-tower field"),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (&*self.inner, a, b) {
            (FieldInner::Prime { p }, Scalar::U(x), Scalar::U(y)) => Scalar::U((x + y) % p),
            (FieldInner::Ext2 { .. }, Scalar::U(x), Scalar::U(y)) => Scalar::U(x ^ y),
            (FieldInner::ExtP { p, .. }, Scalar::P(x), Scalar::P(y)) => {
                Scalar::P(x.iter().zip(y).map(|(u, v)| (u + v) % p).collect())
            }
            (FieldInner::Tower { base, .. }, Scalar::T(x), Scalar::T(y)) => {
                Scalar::T(x.iter().zip(y).map(|(u, v)| base.add(u, v)).collect())
            }
            (FieldInner::Rational, Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x + y),
            _ => panic!("scalar does not belong to this field"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (&*self.inner, a) {
            (FieldInner::Prime { p }, Scalar::U(x)) => Scalar::U((p - x) % p),
            (FieldInner::Ext2 { .. }, Scalar::U(x)) => Scalar::U(*x),
            (FieldInner::ExtP { p, .. }, Scalar::P(x)) => {
                Scalar::P(x.iter().map(|u| (p - u) % p).collect())
            }
            (FieldInner::Tower { base, .. }, Scalar::T(x)) => {
                Scalar::T(x.iter().map(|u| base.neg(u)).collect())
            }
            (FieldInner::Rational, Scalar::Q(x)) => Scalar::Q(-x),
            _ => panic!("scalar does not belong to this field"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (&*self.inner, a, b) {
            (FieldInner::Prime { p }, Scalar::U(x), Scalar::U(y)) => {
                Scalar::U(mulmod_u64(*x, *y, *p))
            }
            (FieldInner::Ext2 { e, modulus }, Scalar::U(x), Scalar::U(y)) => {
                Scalar::U(gf2_mul(*x, *y, *e, *modulus))
            }
            (FieldInner::ExtP { p, e, modulus }, Scalar::P(x), Scalar::P(y)) => {
                Scalar::P(gfp_mul(x, y, *p, *e, modulus))
            }
            (FieldInner::Tower { base, deg, modulus }, Scalar::T(x), Scalar::T(y)) => {
                Scalar::T(tower_mul(base, x, y, *deg, modulus))
            }
            (FieldInner::Rational, Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x * y),
            _ => panic!("scalar does not belong to this field"),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Scalar {
        assert!(!self.is_zero(a), "inverse of zero");
        match (&*self.inner, a) {
            (FieldInner::Prime { p }, Scalar::U(x)) => Scalar::U(inv_mod_u64(*x, *p)),
            (FieldInner::Ext2 { e, .. }, _) => {
                // a^(2^e - 2) by square and multiply.
                let exp = (1u64 << *e) - 2;
                self.pow_u64(a, exp)
            }
            (FieldInner::ExtP { p, e, .. }, _) => {
                let exp = pow_u128(*p as u128, *e) - 2;
                self.pow_u128(a, exp)
            }
            (FieldInner::Tower { base, deg, .. }, _) => {
                let s = base.size().unwrap();
                let exp = s.pow(*deg) - BigUint::from(2u32);
                self.pow_big(a, &exp)
            }
            (FieldInner::Rational, Scalar::Q(x)) => Scalar::Q(x.recip()),
            _ => panic!("scalar does not belong to this field"),
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.mul(a, &self.inv(b))
    }

    pub fn pow_u64(&self, a: &Scalar, exp: u64) -> Scalar {
        self.pow_u128(a, exp as u128)
    }

    fn pow_u128(&self, a: &Scalar, mut exp: u128) -> Scalar {
        let mut acc = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }

    fn pow_big(&self, a: &Scalar, exp: &BigUint) -> Scalar {
        let mut acc = self.one();
        let mut base = a.clone();
        let bits = exp.bits();
        for i in 0..bits {
            if exp.bit(i) {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
        }
        acc
    }

    /// Uniform element (finite fields), or an integer drawn from [0, 2^32) for Q.
    pub fn rand_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        match &*self.inner {
            FieldInner::Prime { p } => Scalar::U(rng.gen_range(0..*p)),
            FieldInner::Ext2 { e, .. } => Scalar::U(rng.gen::<u64>() & ((1u64 << *e) - 1)),
            FieldInner::ExtP { p, e, .. } => {
                Scalar::P((0..*e).map(|_| rng.gen_range(0..*p)).collect())
            }
            FieldInner::Tower { base, deg, .. } => {
                Scalar::T((0..*deg).map(|_| base.rand_elem(rng)).collect())
            }
            FieldInner::Rational => {
                Scalar::Q(BigRational::from_integer(u64::from(rng.gen::<u32>()).into()))
            }
        }
    }

    /// All elements, if the field is finite and has at most `cap` elements.
    pub fn enumerate_elements(&self, cap: u64) -> Option<Vec<Scalar>> {
        let size = self.size()?;
        if size > BigUint::from(cap) {
            return None;
        }
        let n: u64 = size.try_into().ok()?;
        match &*self.inner {
            FieldInner::Prime { .. } | FieldInner::Ext2 { .. } => {
                Some((0..n).map(Scalar::U).collect())
            }
            FieldInner::ExtP { p, e, .. } => Some(
                (0..n)
                    .map(|mut idx| {
                        let mut c = vec![0; *e as usize];
                        for slot in c.iter_mut() {
                            *slot = idx % p;
                            idx /= p;
                        }
                        Scalar::P(c)
                    })
                    .collect(),
            ),
            FieldInner::Tower { base, deg, .. } => {
                let b: u64 = base.size().unwrap().try_into().ok()?;
                let base_elems = base.enumerate_elements(b)?;
                Some(
                    (0..n)
                        .map(|mut idx| {
                            let mut c = Vec::with_capacity(*deg as usize);
                            for _ in 0..*deg {
                                c.push(base_elems[(idx % b) as usize].clone());
                                idx /= b;
                            }
                            Scalar::T(c)
                        })
                        .collect(),
                )
            }
            FieldInner::Rational => None,
        }
    }

    /// Smallest extension of this field with at least `min_size` elements,
    /// together with nothing to remember: the base embeds as constants.
    /// Rationals are already infinite and return self.
    pub fn extend_for_genericity(&self, min_size: u64) -> Field {
        match &*self.inner {
            FieldInner::Rational => self.clone(),
            _ => {
                let size = self.size().unwrap();
                if size >= BigUint::from(min_size) {
                    return self.clone();
                }
                match &*self.inner {
                    FieldInner::Prime { p } => {
                        let mut e = 2u32;
                        while BigUint::from(*p).pow(e) < BigUint::from(min_size) {
                            e += 1;
                        }
                        Field::new(&FieldSpec::Ext { p: *p, e }).unwrap()
                    }
                    _ => {
                        let mut deg = 2u32;
                        while size.pow(deg) < BigUint::from(min_size) {
                            deg += 1;
                        }
                        Field::tower_over(self, deg)
                    }
                }
            }
        }
    }

    /// Embed an element of `base` into this field, which must be an extension
    /// of `base` produced by `extend_for_genericity`. Constants embed as
    /// constants; the embedding is a field homomorphism fixing `base`.
    pub fn embed(&self, base: &Field, a: &Scalar) -> Scalar {
        if self == base {
            return a.clone();
        }
        match &*self.inner {
            FieldInner::Ext2 { .. } => match (&*base.inner, a) {
                // GF(2) -> GF(2^e): 0 and 1 are shared.
                (FieldInner::Prime { p: 2 }, Scalar::U(x)) => Scalar::U(*x),
                _ => panic!("unsupported embedding"),
            },
            FieldInner::ExtP { p, e, .. } => match (&*base.inner, a) {
                (FieldInner::Prime { p: bp }, Scalar::U(x)) if bp == p => {
                    let mut c = vec![0; *e as usize];
                    c[0] = *x;
                    Scalar::P(c)
                }
                _ => panic!("unsupported embedding"),
            },
            FieldInner::Tower { base: tb, deg, .. } => {
                assert!(tb == base, "tower embeds its own base only");
                let mut c = vec![tb.zero(); *deg as usize];
                c[0] = a.clone();
                Scalar::T(c)
            }
            _ => panic!("unsupported embedding"),
        }
    }

    /// Inverse of `embed`: succeeds exactly when the element lies in the image
    /// of `base`, i.e. all higher coefficients vanish.
    pub fn retract(&self, base: &Field, a: &Scalar) -> Option<Scalar> {
        if self == base {
            return Some(a.clone());
        }
        match (&*self.inner, a) {
            (FieldInner::Ext2 { .. }, Scalar::U(x)) => {
                match &*base.inner {
                    FieldInner::Prime { p: 2 } => (*x <= 1).then_some(Scalar::U(*x)),
                    _ => None,
                }
            }
            (FieldInner::ExtP { p, .. }, Scalar::P(c)) => match &*base.inner {
                FieldInner::Prime { p: bp } if bp == p => {
                    c[1..].iter().all(|&x| x == 0).then(|| Scalar::U(c[0]))
                }
                _ => None,
            },
            (FieldInner::Tower { base: tb, .. }, Scalar::T(c)) => {
                if tb != base {
                    return None;
                }
                c[1..].iter().all(|x| tb.is_zero(x)).then(|| c[0].clone())
            }
            _ => None,
        }
    }

    /// Build a degree-`deg` tower extension with the canonical modulus.
    pub fn tower_over(base: &Field, deg: u32) -> Field {
        assert!(deg >= 2);
        let modulus = smallest_irreducible_over(base, deg);
        Field {
            inner: Arc::new(FieldInner::Tower { base: base.clone(), deg, modulus }),
        }
    }

    /// Canonical string form. Extension elements print as polynomials in t
    /// with zero terms omitted; rationals print as num/den.
    pub fn encode(&self, a: &Scalar) -> String {
        match (&*self.inner, a) {
            (FieldInner::Prime { .. }, Scalar::U(x)) => x.to_string(),
            (FieldInner::Ext2 { e, .. }, Scalar::U(x)) => {
                let coeffs: Vec<u64> = (0..*e).map(|i| (x >> i) & 1).collect();
                encode_poly_terms(&coeffs)
            }
            (FieldInner::ExtP { .. }, Scalar::P(c)) => encode_poly_terms(c),
            (FieldInner::Rational, Scalar::Q(q)) => {
                format!("{}/{}", q.numer(), q.denom())
            }
            (FieldInner::Tower { .. }, _) => {
                panic!("tower elements are internal and are never serialized")
            }
            _ => panic!("scalar does not belong to this field"),
        }
    }

    /// Parse the canonical string forms (and a few lenient variants: bare
    /// integers for rationals, terms in any order for polynomials).
    pub fn parse(&self, s: &str) -> Result<Scalar, FieldError> {
        let s = s.trim();
        match &*self.inner {
            FieldInner::Prime { p } => {
                let v: i64 = s
                    .parse()
                    .map_err(|_| FieldError(format!("invalid GF({p}) element: {s:?}")))?;
                Ok(self.from_int(v))
            }
            FieldInner::Ext2 { e, .. } => {
                let coeffs = parse_poly_terms(s, 2, *e)?;
                let mut x = 0u64;
                for (i, &c) in coeffs.iter().enumerate() {
                    x |= c << i;
                }
                Ok(Scalar::U(x))
            }
            FieldInner::ExtP { p, e, .. } => Ok(Scalar::P(parse_poly_terms(s, *p, *e)?)),
            FieldInner::Tower { .. } => {
                Err(FieldError("tower elements cannot be parsed".into()))
            }
            FieldInner::Rational => {
                let (num, den) = match s.split_once('/') {
                    Some((n, d)) => (n.trim(), d.trim()),
                    None => (s, "1"),
                };
                let n: num_bigint::BigInt = num
                    .parse()
                    .map_err(|_| FieldError(format!("invalid rational: {s:?}")))?;
                let d: num_bigint::BigInt = den
                    .parse()
                    .map_err(|_| FieldError(format!("invalid rational: {s:?}")))?;
                if d.is_zero() {
                    return Err(FieldError("rational with zero denominator".into()));
                }
                Ok(Scalar::Q(BigRational::new(n, d)))
            }
        }
    }
}

fn pow_u128(base: u128, exp: u32) -> u128 {
    let mut acc = 1u128;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Carryless multiply then reduce by the degree-e modulus (bit e set).
fn gf2_mul(a: u64, b: u64, e: u32, modulus: u64) -> u64 {
    let mut prod = 0u64;
    let mut x = a;
    let mut y = b;
    while y != 0 {
        if y & 1 == 1 {
            prod ^= x;
        }
        x <<= 1;
        y >>= 1;
    }
    // prod has degree at most 2e-2 <= 62; fold down from the top.
    let mut deg = 63 - prod.leading_zeros().min(63);
    while prod != 0 && deg >= e {
        prod ^= modulus << (deg - e);
        deg = 63 - prod.leading_zeros().min(63);
    }
    prod
}

fn gfp_mul(a: &[u64], b: &[u64], p: u64, e: u32, modulus: &[u64]) -> Vec<u64> {
    let e = e as usize;
    let mut prod = vec![0u64; 2 * e - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mulmod_u64(x, y, p)) % p;
        }
    }
    // x^(e+k) = -modulus(x) * x^k; fold high coefficients down.
    for i in (e..2 * e - 1).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for (j, &m) in modulus.iter().enumerate() {
            let sub = mulmod_u64(c, m, p);
            let idx = i - e + j;
            prod[idx] = (prod[idx] + p - sub) % p;
        }
    }
    prod.truncate(e);
    prod
}

fn tower_mul(base: &Field, a: &[Scalar], b: &[Scalar], deg: u32, modulus: &[Scalar]) -> Vec<Scalar> {
    let d = deg as usize;
    let mut prod = vec![base.zero(); 2 * d - 1];
    for (i, x) in a.iter().enumerate() {
        if base.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = base.mul(x, y);
            prod[i + j] = base.add(&prod[i + j], &t);
        }
    }
    for i in (d..2 * d - 1).rev() {
        if base.is_zero(&prod[i]) {
            continue;
        }
        let c = prod[i].clone();
        prod[i] = base.zero();
        for (j, m) in modulus.iter().enumerate() {
            let sub = base.mul(&c, m);
            prod[i - d + j] = base.sub(&prod[i - d + j], &sub);
        }
    }
    prod.truncate(d);
    prod
}

fn encode_poly_terms(coeffs: &[u64]) -> String {
    let mut terms = Vec::new();
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        terms.push(match i {
            0 => c.to_string(),
            1 if c == 1 => "t".to_string(),
            1 => format!("{c}*t"),
            _ if c == 1 => format!("t^{i}"),
            _ => format!("{c}*t^{i}"),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

fn parse_poly_terms(s: &str, p: u64, e: u32) -> Result<Vec<u64>, FieldError> {
    let mut coeffs = vec![0u64; e as usize];
    let bad = || FieldError(format!("invalid GF({p}^{e}) element: {s:?}"));
    for term in s.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(bad());
        }
        let (coeff_str, power) = if let Some(rest) = term.strip_prefix("t^") {
            ("1", rest.parse::<u32>().map_err(|_| bad())?)
        } else if term == "t" {
            ("1", 1)
        } else if let Some((c, tail)) = term.split_once("*t^") {
            (c, tail.parse::<u32>().map_err(|_| bad())?)
        } else if let Some(c) = term.strip_suffix("*t") {
            (c, 1)
        } else {
            (term, 0)
        };
        let c: i64 = coeff_str.trim().parse().map_err(|_| bad())?;
        if power >= e {
            return Err(FieldError(format!(
                "term of degree {power} exceeds field degree {e}: {s:?}"
            )));
        }
        let c = c.rem_euclid(p as i64) as u64;
        coeffs[power as usize] = (coeffs[power as usize] + c) % p;
    }
    Ok(coeffs)
}

/// Lexicographically smallest irreducible monic of degree e over GF(2),
/// ordering candidates by (c_{e-1}, ..., c_0). Returned with bit e set.
fn smallest_irreducible_gf2(e: u32) -> u64 {
    for lowbits in 0..(1u64 << e) {
        // The loop index, read as a big-endian coefficient tuple, must be the
        // lex rank; for GF(2) the integer with c_{e-1} as its high bit is
        // exactly lowbits reinterpreted, so ascending integers match lex order.
        let candidate = (1u64 << e) | lowbits;
        if gf2_poly_irreducible(candidate, e) {
            return candidate;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over GF(2)")
}

fn gf2_poly_mulmod(a: u64, b: u64, g: u64, e: u32) -> u64 {
    let mut acc = 0u64;
    let mut x = a;
    let mut y = b;
    while y != 0 {
        if y & 1 == 1 {
            acc ^= x;
        }
        x <<= 1;
        if (x >> e) & 1 == 1 {
            x ^= g;
        }
        y >>= 1;
    }
    acc
}

fn gf2_poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let mut r = a;
        // Polynomial remainder of a by b.
        let db = 63 - b.leading_zeros();
        loop {
            if r == 0 {
                break;
            }
            let dr = 63 - r.leading_zeros();
            if dr < db {
                break;
            }
            r ^= b << (dr - db);
        }
        a = b;
        b = r;
    }
    a
}

/// Rabin's test: g of degree e over GF(2) is irreducible iff x^(2^e) = x mod g
/// and gcd(x^(2^(e/l)) - x, g) = 1 for every prime l dividing e.
fn gf2_poly_irreducible(g: u64, e: u32) -> bool {
    let frob = |j: u32| -> u64 {
        // x^(2^j) mod g by repeated squaring of x.
        let mut x = 2u64; // the polynomial "x"
        for _ in 0..j {
            x = gf2_poly_mulmod(x, x, g, e);
        }
        x
    };
    if frob(e) != 2 {
        return false;
    }
    let mut n = e;
    let mut primes = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            primes.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    for l in primes {
        let h = frob(e / l) ^ 2; // x^(2^(e/l)) - x
        if gf2_poly_gcd(g, h) != 1 {
            return false;
        }
    }
    true
}

/// Lexicographically smallest irreducible monic of degree e over GF(p), p odd.
/// Candidates are ordered by the coefficient tuple (c_{e-1}, ..., c_0).
fn smallest_irreducible_gfp(p: u64, e: u32) -> Vec<u64> {
    let base = Field::prime(p).unwrap();
    let modulus = smallest_irreducible_over(&base, e);
    modulus
        .into_iter()
        .map(|s| match s {
            Scalar::U(x) => x,
            _ => unreachable!(),
        })
        .collect()
}

/// Generic lex-smallest irreducible search over any finite field, candidates
/// ordered by (c_{deg-1}, ..., c_0) with base elements in enumeration order.
/// Returns the deg low coefficients; x^deg is implied monic.
fn smallest_irreducible_over(base: &Field, deg: u32) -> Vec<Scalar> {
    let s: u64 = base
        .size()
        .expect("irreducible search requires a finite base field")
        .try_into()
        .expect("base field too large for modulus search");
    let elems = base
        .enumerate_elements(s)
        .expect("base field too large for modulus search");
    let d = deg as usize;
    let total = s
        .checked_pow(deg)
        .expect("modulus search space too large");
    for mut idx in 0..total {
        // c_{deg-1} is the most significant digit of idx, so ascending idx
        // enumerates tuples (c_{deg-1}, ..., c_0) in lex order.
        let mut coeffs = vec![base.zero(); d];
        for slot in 0..d {
            coeffs[slot] = elems[(idx % s) as usize].clone();
            idx /= s;
        }
        if poly_irreducible_over(base, &coeffs, deg) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over finite fields")
}

/// Polynomial arithmetic mod (x^deg + g) over `base`, g = low coefficients.
fn polymod_mul(base: &Field, a: &[Scalar], b: &[Scalar], g: &[Scalar], deg: usize) -> Vec<Scalar> {
    let mut prod = vec![base.zero(); 2 * deg - 1];
    for (i, x) in a.iter().enumerate() {
        if base.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = base.mul(x, y);
            prod[i + j] = base.add(&prod[i + j], &t);
        }
    }
    for i in (deg..2 * deg - 1).rev() {
        if base.is_zero(&prod[i]) {
            continue;
        }
        let c = prod[i].clone();
        prod[i] = base.zero();
        for (j, m) in g.iter().enumerate() {
            let sub = base.mul(&c, m);
            prod[i - deg + j] = base.sub(&prod[i - deg + j], &sub);
        }
    }
    prod.truncate(deg);
    prod
}

fn poly_is_zero(base: &Field, a: &[Scalar]) -> bool {
    a.iter().all(|x| base.is_zero(x))
}

/// gcd of two polynomials over `base` given as coefficient vectors (not
/// reduced mod anything); leading zeros allowed.
fn poly_gcd(base: &Field, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let trim = |v: &[Scalar]| -> Vec<Scalar> {
        let mut v = v.to_vec();
        while v.len() > 0 && base.is_zero(v.last().unwrap()) {
            v.pop();
        }
        v
    };
    let mut a = trim(a);
    let mut b = trim(b);
    while !b.is_empty() {
        // a mod b
        let lead = base.inv(b.last().unwrap());
        while a.len() >= b.len() && !a.is_empty() {
            let factor = base.mul(a.last().unwrap(), &lead);
            if !base.is_zero(&factor) {
                let shift = a.len() - b.len();
                for (j, c) in b.iter().enumerate() {
                    let sub = base.mul(&factor, c);
                    a[shift + j] = base.sub(&a[shift + j], &sub);
                }
            }
            a = trim(&a);
            if a.len() < b.len() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
        b = trim(&b);
    }
    a
}

/// Rabin irreducibility over an arbitrary finite base field:
/// x^(s^deg) = x mod g, and gcd(x^(s^(deg/l)) - x, g) = 1 for prime l | deg.
fn poly_irreducible_over(base: &Field, g: &[Scalar], deg: u32) -> bool {
    let d = deg as usize;
    if d == 1 {
        return true;
    }
    let s = base.size().unwrap();
    // x^(s^j) mod (x^deg + g), computed by j rounds of raising to the s-th
    // power; each round is a square-and-multiply with exponent s.
    let pow_s = |a: &[Scalar]| -> Vec<Scalar> {
        let mut acc = {
            let mut one = vec![base.zero(); d];
            one[0] = base.one();
            one
        };
        let mut b = a.to_vec();
        let bits = s.bits();
        for i in 0..bits {
            if s.bit(i) {
                acc = polymod_mul(base, &acc, &b, g, d);
            }
            b = polymod_mul(base, &b, &b, g, d);
        }
        acc
    };
    let x_poly = {
        let mut x = vec![base.zero(); d];
        x[1] = base.one();
        x
    };
    let frob = |j: u32| -> Vec<Scalar> {
        let mut cur = x_poly.clone();
        for _ in 0..j {
            cur = pow_s(&cur);
        }
        cur
    };
    // x^(s^deg) must equal x.
    let top = frob(deg);
    let mut diff = top.clone();
    diff[1] = base.sub(&diff[1], &base.one());
    if !poly_is_zero(base, &diff) {
        return false;
    }
    let mut n = deg;
    let mut primes = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            primes.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    for l in primes {
        let mut h = frob(deg / l);
        h[1] = base.sub(&h[1], &base.one());
        let mut g_full: Vec<Scalar> = g.to_vec();
        g_full.push(base.one());
        let gcd = poly_gcd(base, &g_full, &h);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}
