//! Exact field arithmetic over Q, GF(p) and GF(p^k).
//!
//! A [`Field`] is a cheap handle (reference counted) to a field description;
//! every [`Elem`] carries its field so that the usual operators can be used
//! directly in formulae. Mixing elements of different fields is a programming
//! error and panics.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_EXTENSION_DEGREE: usize = 4;

/// Prime fields are limited so that products of residues fit in a `u64`.
const MAX_PRIME: u64 = 1 << 31;

/// Extension fields are searched exhaustively in a few places (irreducibility,
/// roots in characteristic 2), so the prime is kept small.
const MAX_EXTENSION_PRIME: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NonPrimeModulus(u64),
    #[error("modulus {0:?} is reducible over GF({1})")]
    ReducibleModulus(Vec<u64>, u64),
    #[error("malformed field description: {0}")]
    Malformed(String),
    #[error("zero raised to a negative power")]
    ZeroToNegativePower,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse {input:?} as an element of {field}: {reason}")]
    Parse {
        input: String,
        field: String,
        reason: String,
    },
    #[error("no quadratic extension available for {0}")]
    NoExtension(String),
}

/// Serializable description of a field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldSpec {
    Rational,
    Prime {
        p: u64,
    },
    /// `modulus` is the monic defining polynomial, low degree first
    /// (length `k + 1`).
    Extension {
        p: u64,
        k: usize,
        modulus: Vec<u64>,
    },
}

impl FieldSpec {
    /// Parses the command-line form `rational | prime:p | ext:p:k:c0,c1,...`.
    pub fn parse_flag(s: &str) -> Result<FieldSpec, FieldError> {
        let bad = || FieldError::Malformed(format!("unrecognised field {s:?}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        match parts.as_slice() {
            ["rational"] | ["Q"] | ["q"] => Ok(FieldSpec::Rational),
            ["prime", p] | ["gf", p] => Ok(FieldSpec::Prime { p: num(p)? }),
            ["ext", p, k, modulus] => Ok(FieldSpec::Extension {
                p: num(p)?,
                k: num(k)? as usize,
                modulus: modulus.split(',').map(num).collect::<Result<_, _>>()?,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "Q"),
            FieldSpec::Prime { p } => write!(f, "GF({p})"),
            FieldSpec::Extension { p, k, modulus } => {
                write!(f, "GF({p}^{k}) mod [")?;
                for (i, c) in modulus.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug)]
enum Kind {
    Rational,
    Prime { p: u64 },
    Extension { p: u64, k: usize, modulus: Vec<u64> },
}

#[derive(Debug)]
struct Inner {
    spec: FieldSpec,
    kind: Kind,
}

/// Handle to a field. Cloning is cheap.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Value {
    Rat(BigRational),
    Mod(u64),
    Poly([u64; MAX_EXTENSION_DEGREE]),
}

/// An element of a [`Field`], always in canonical form.
#[derive(Clone)]
pub struct Elem {
    field: Field,
    value: Value,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn mod_pow(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Evaluates a polynomial over GF(p) (low degree first) at `x`.
fn eval_mod(coeffs: &[u64], x: u64, p: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % p)
}

/// Remainder of `num` modulo the monic `den`, over GF(p).
fn rem_mod(num: &[u64], den: &[u64], p: u64) -> Vec<u64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (t, &c) in den.iter().enumerate() {
                r[shift + t] = (r[shift + t] + p - lead * c % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Irreducibility test for monic polynomials of degree 2..=4 by root and
/// quadratic-factor search.
fn is_irreducible(modulus: &[u64], p: u64) -> bool {
    let k = modulus.len() - 1;
    if (0..p).any(|x| eval_mod(modulus, x, p) == 0) {
        return false;
    }
    if k == 4 {
        for c0 in 0..p {
            for c1 in 0..p {
                let r = rem_mod(modulus, &[c0, c1, 1], p);
                if r.iter().all(|&c| c == 0) {
                    return false;
                }
            }
        }
    }
    true
}

/// First monic irreducible polynomial of degree `k` over GF(p) in
/// lexicographic order of the coefficient vector (low degree first).
fn find_irreducible(p: u64, k: usize) -> Vec<u64> {
    let total = p.pow(k as u32);
    for idx in 0..total {
        let mut coeffs = Vec::with_capacity(k + 1);
        let mut rest = idx;
        for _ in 0..k {
            coeffs.push(rest % p);
            rest /= p;
        }
        coeffs.push(1);
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

impl Field {
    /// Builds a field from its description, checking primality and
    /// irreducibility.
    pub fn new(spec: FieldSpec) -> Result<Field, FieldError> {
        let kind = match &spec {
            FieldSpec::Rational => Kind::Rational,
            FieldSpec::Prime { p } => {
                if !is_prime(*p) {
                    return Err(FieldError::NonPrimeModulus(*p));
                }
                if *p >= MAX_PRIME {
                    return Err(FieldError::Malformed(format!(
                        "prime {p} too large (limit {MAX_PRIME})"
                    )));
                }
                Kind::Prime { p: *p }
            }
            FieldSpec::Extension { p, k, modulus } => {
                if !is_prime(*p) {
                    return Err(FieldError::NonPrimeModulus(*p));
                }
                if *p >= MAX_EXTENSION_PRIME {
                    return Err(FieldError::Malformed(format!(
                        "extension prime {p} too large (limit {MAX_EXTENSION_PRIME})"
                    )));
                }
                if !(2..=MAX_EXTENSION_DEGREE).contains(k) {
                    return Err(FieldError::Malformed(format!(
                        "extension degree {k} outside 2..={MAX_EXTENSION_DEGREE}"
                    )));
                }
                if modulus.len() != k + 1 {
                    return Err(FieldError::Malformed(format!(
                        "modulus needs {} coefficients, got {}",
                        k + 1,
                        modulus.len()
                    )));
                }
                let reduced: Vec<u64> = modulus.iter().map(|c| c % p).collect();
                if reduced[*k] != 1 {
                    return Err(FieldError::Malformed("modulus must be monic".into()));
                }
                if !is_irreducible(&reduced, *p) {
                    return Err(FieldError::ReducibleModulus(modulus.clone(), *p));
                }
                Kind::Extension {
                    p: *p,
                    k: *k,
                    modulus: reduced,
                }
            }
        };
        Ok(Field(Arc::new(Inner { spec, kind })))
    }

    pub fn rational() -> Field {
        Field::new(FieldSpec::Rational).expect("Q is always valid")
    }

    pub fn prime(p: u64) -> Result<Field, FieldError> {
        Field::new(FieldSpec::Prime { p })
    }

    pub fn extension(p: u64, modulus: &[u64]) -> Result<Field, FieldError> {
        Field::new(FieldSpec::Extension {
            p,
            k: modulus.len().saturating_sub(1),
            modulus: modulus.to_vec(),
        })
    }

    /// GF(4) as GF(2)[w]/(w^2+w+1).
    pub fn gf4() -> Field {
        Field::extension(2, &[1, 1, 1]).expect("x^2+x+1 is irreducible over GF(2)")
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn characteristic(&self) -> u64 {
        match self.0.kind {
            Kind::Rational => 0,
            Kind::Prime { p } | Kind::Extension { p, .. } => p,
        }
    }

    /// Degree over the prime field (1 for Q and GF(p)).
    pub fn degree(&self) -> usize {
        match self.0.kind {
            Kind::Extension { k, .. } => k,
            _ => 1,
        }
    }

    /// Number of elements, `None` for Q.
    pub fn size(&self) -> Option<u128> {
        match self.0.kind {
            Kind::Rational => None,
            Kind::Prime { p } => Some(p as u128),
            Kind::Extension { p, k, .. } => Some((p as u128).pow(k as u32)),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.size().is_some()
    }

    fn wrap(&self, value: Value) -> Elem {
        Elem {
            field: self.clone(),
            value,
        }
    }

    pub fn zero(&self) -> Elem {
        self.from_i64(0)
    }

    pub fn one(&self) -> Elem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Elem {
        match self.0.kind {
            Kind::Rational => self.wrap(Value::Rat(BigRational::from_integer(n.into()))),
            Kind::Prime { p } => self.wrap(Value::Mod(n.rem_euclid(p as i64) as u64)),
            Kind::Extension { p, .. } => {
                let mut c = [0u64; MAX_EXTENSION_DEGREE];
                c[0] = n.rem_euclid(p as i64) as u64;
                self.wrap(Value::Poly(c))
            }
        }
    }

    pub fn from_ratio(&self, num: i64, den: i64) -> Elem {
        self.from_i64(num) / self.from_i64(den)
    }

    pub fn from_rational(&self, r: &BigRational) -> Result<Elem, FieldError> {
        match self.0.kind {
            Kind::Rational => Ok(self.wrap(Value::Rat(r.clone()))),
            Kind::Prime { p } | Kind::Extension { p, .. } => {
                let reduce = |b: &BigInt| {
                    let m = b.mod_floor(&BigInt::from(p));
                    self.from_i64(m.to_i64().expect("residue fits"))
                };
                let den = reduce(r.denom());
                if den.is_zero() {
                    return Err(FieldError::DivisionByZero);
                }
                Ok(reduce(r.numer()) / den)
            }
        }
    }

    /// The adjoined root `w` of the modulus (extension fields only).
    pub fn generator(&self) -> Option<Elem> {
        match self.0.kind {
            Kind::Extension { .. } => {
                let mut c = [0u64; MAX_EXTENSION_DEGREE];
                c[1] = 1;
                Some(self.wrap(Value::Poly(c)))
            }
            _ => None,
        }
    }

    /// Element with the given index in the fixed enumeration order
    /// (base-p digits of the index are the coefficients, low degree first).
    pub fn element(&self, index: u128) -> Option<Elem> {
        match self.0.kind {
            Kind::Rational => None,
            Kind::Prime { p } => (index < p as u128).then(|| self.wrap(Value::Mod(index as u64))),
            Kind::Extension { p, k, .. } => {
                if index >= (p as u128).pow(k as u32) {
                    return None;
                }
                let mut c = [0u64; MAX_EXTENSION_DEGREE];
                let mut rest = index;
                for slot in c.iter_mut().take(k) {
                    *slot = (rest % p as u128) as u64;
                    rest /= p as u128;
                }
                Some(self.wrap(Value::Poly(c)))
            }
        }
    }

    /// All elements of a finite field in enumeration order.
    pub fn elements(&self) -> Vec<Elem> {
        match self.size() {
            None => Vec::new(),
            Some(n) => (0..n).map(|i| self.element(i).unwrap()).collect(),
        }
    }

    /// Parses the text format: `a/b` or `a` over Q, `k` over GF(p),
    /// `c0+c1*w+c2*w^2...` over GF(p^k).
    pub fn parse(&self, s: &str) -> Result<Elem, FieldError> {
        let err = |reason: &str| FieldError::Parse {
            input: s.to_string(),
            field: self.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(err("empty"));
        }
        match self.0.kind {
            Kind::Rational => {
                let r = if let Some((n, d)) = t.split_once('/') {
                    let n = BigInt::from_str(n.trim()).map_err(|_| err("bad numerator"))?;
                    let d = BigInt::from_str(d.trim()).map_err(|_| err("bad denominator"))?;
                    if d.is_zero() {
                        return Err(err("zero denominator"));
                    }
                    BigRational::new(n, d)
                } else {
                    BigRational::from_integer(BigInt::from_str(t).map_err(|_| err("bad integer"))?)
                };
                Ok(self.wrap(Value::Rat(r)))
            }
            Kind::Prime { p } => {
                let n = BigInt::from_str(t).map_err(|_| err("bad integer"))?;
                let m = n.mod_floor(&BigInt::from(p)).to_u64().unwrap();
                Ok(self.wrap(Value::Mod(m)))
            }
            Kind::Extension { p, k, .. } => {
                let mut coeffs = [0u64; MAX_EXTENSION_DEGREE];
                let compact: String = t.chars().filter(|c| !c.is_whitespace()).collect();
                // split on '+' and on '-' (keeping the sign with the term)
                let mut terms = Vec::new();
                let mut cur = String::new();
                for ch in compact.chars() {
                    if (ch == '+' || ch == '-') && !cur.is_empty() && !cur.ends_with('^') {
                        terms.push(std::mem::take(&mut cur));
                    }
                    if ch != '+' {
                        cur.push(ch);
                    }
                }
                if !cur.is_empty() {
                    terms.push(cur);
                }
                for term in terms {
                    let (neg, body) = match term.strip_prefix('-') {
                        Some(b) => (true, b),
                        None => (false, term.as_str()),
                    };
                    let (coef, power) = if let Some(pos) = body.find('w') {
                        let c = &body[..pos];
                        let c = c.strip_suffix('*').unwrap_or(c);
                        let coef = if c.is_empty() {
                            1
                        } else {
                            c.parse::<u64>().map_err(|_| err("bad coefficient"))?
                        };
                        let rest = &body[pos + 1..];
                        let power = if rest.is_empty() {
                            1
                        } else {
                            rest.strip_prefix('^')
                                .ok_or_else(|| err("expected ^"))?
                                .parse::<usize>()
                                .map_err(|_| err("bad exponent"))?
                        };
                        (coef, power)
                    } else {
                        (body.parse::<u64>().map_err(|_| err("bad coefficient"))?, 0)
                    };
                    if power >= k {
                        return Err(err("exponent not below extension degree"));
                    }
                    let c = coef % p;
                    let c = if neg { (p - c) % p } else { c };
                    coeffs[power] = (coeffs[power] + c) % p;
                }
                Ok(self.wrap(Value::Poly(coeffs)))
            }
        }
    }

    /// Random element: uniform for finite fields, a small rational over Q.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        match self.size() {
            Some(n) => self.element(rng.gen_range(0..n)).unwrap(),
            None => {
                let num: i64 = rng.gen_range(-12..=12);
                let den: i64 = rng.gen_range(1..=5);
                self.from_ratio(num, den)
            }
        }
    }

    /// Random nonzero element.
    pub fn sample_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        loop {
            let e = self.sample(rng);
            if !e.is_zero() {
                return e;
            }
        }
    }

    /// Roots of `x^2 + b x + c` in this field, with multiplicity.
    /// An empty result means the polynomial is irreducible here.
    pub fn quadratic_roots(&self, b: &Elem, c: &Elem) -> Vec<Elem> {
        if self.characteristic() == 2 {
            // char-2 fields are at most GF(16) here
            let mut roots: Vec<Elem> = self
                .elements()
                .into_iter()
                .filter(|x| (x * x + b * x + c).is_zero())
                .collect();
            if roots.len() == 1 {
                roots.push(roots[0].clone());
            }
            return roots;
        }
        let two = self.from_i64(2);
        let disc = b * b - self.from_i64(4) * c;
        match self.sqrt(&disc) {
            Some(r) => vec![(-b + &r) / &two, (-b - &r) / &two],
            None => Vec::new(),
        }
    }

    /// A square root of `a` when one exists in this field (odd characteristic
    /// or Q).
    pub fn sqrt(&self, a: &Elem) -> Option<Elem> {
        if a.is_zero() {
            return Some(self.zero());
        }
        match &a.value {
            Value::Rat(r) => {
                if r.is_negative() {
                    return None;
                }
                let n = r.numer().sqrt();
                let d = r.denom().sqrt();
                if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                    Some(self.wrap(Value::Rat(BigRational::new(n, d))))
                } else {
                    None
                }
            }
            _ => self.tonelli_shanks(a),
        }
    }

    fn tonelli_shanks(&self, a: &Elem) -> Option<Elem> {
        let order = self.size()? - 1;
        if self.characteristic() == 2 {
            // squaring is a bijection: sqrt(a) = a^(size/2)
            return Some(a.pow_u128(order.div_ceil(2)));
        }
        if !a.pow_u128(order / 2).is_one() {
            return None;
        }
        let mut s = 0u32;
        let mut t = order;
        while t % 2 == 0 {
            t /= 2;
            s += 1;
        }
        let minus_one = -self.one();
        let z = self
            .elements_from(2)
            .find(|z| !z.is_zero() && z.pow_u128(order / 2) == minus_one)?;
        let mut m = s;
        let mut c = z.pow_u128(t);
        let mut x = a.pow_u128(t.div_ceil(2));
        let mut b = a.pow_u128(t);
        while !b.is_one() {
            let mut i = 0u32;
            let mut b2 = b.clone();
            while !b2.is_one() {
                b2 = &b2 * &b2;
                i += 1;
            }
            let mut g = c.clone();
            for _ in 0..(m - i - 1) {
                g = &g * &g;
            }
            x = &x * &g;
            c = &g * &g;
            b = &b * &c;
            m = i;
        }
        Some(x)
    }

    fn elements_from(&self, start: u128) -> impl Iterator<Item = Elem> + '_ {
        let n = self.size().unwrap_or(0);
        (start..n).map(move |i| self.element(i).unwrap())
    }

    /// The degree-2 extension of a finite field together with the embedding
    /// of this field into it. Fails over Q and when the result would exceed
    /// [`MAX_EXTENSION_DEGREE`].
    pub fn quadratic_extension(&self) -> Result<(Field, Embedding), FieldError> {
        let (p, k) = match &self.0.kind {
            Kind::Rational => return Err(FieldError::NoExtension(self.to_string())),
            Kind::Prime { p } => (*p, 1),
            Kind::Extension { p, k, .. } => (*p, *k),
        };
        if 2 * k > MAX_EXTENSION_DEGREE || p >= MAX_EXTENSION_PRIME {
            return Err(FieldError::NoExtension(self.to_string()));
        }
        let modulus = find_irreducible(p, 2 * k);
        let big = Field::new(FieldSpec::Extension {
            p,
            k: 2 * k,
            modulus,
        })?;
        let image = match &self.0.kind {
            Kind::Extension { modulus, .. } => {
                // root of our own (quadratic) modulus inside the big field
                debug_assert_eq!(modulus.len(), 3);
                let b = big.from_i64(modulus[1] as i64);
                let c = big.from_i64(modulus[0] as i64);
                let roots = big.quadratic_roots(&b, &c);
                Some(roots.into_iter().next().expect("quadratics split in the extension"))
            }
            _ => None,
        };
        Ok((
            big.clone(),
            Embedding {
                source: self.clone(),
                target: big,
                generator_image: image,
            },
        ))
    }
}

/// Field homomorphism from a finite field into one of its extensions.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: Field,
    target: Field,
    generator_image: Option<Elem>,
}

impl Embedding {
    pub fn identity(field: &Field) -> Embedding {
        Embedding {
            source: field.clone(),
            target: field.clone(),
            generator_image: field.generator(),
        }
    }

    pub fn source(&self) -> &Field {
        &self.source
    }

    pub fn target(&self) -> &Field {
        &self.target
    }

    pub fn apply(&self, x: &Elem) -> Elem {
        assert_eq!(x.field, self.source, "element outside embedding source");
        if self.source == self.target {
            return x.clone();
        }
        match &x.value {
            Value::Rat(r) => self.target.from_rational(r).expect("Q embeds into itself"),
            Value::Mod(m) => self.target.from_i64(*m as i64),
            Value::Poly(c) => {
                let w = self.generator_image.as_ref().expect("extension source has a generator");
                let mut acc = self.target.zero();
                for &coef in c.iter().rev() {
                    acc = acc * w + self.target.from_i64(coef as i64);
                }
                acc
            }
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Embedding) -> Embedding {
        assert_eq!(self.target, next.source);
        Embedding {
            source: self.source.clone(),
            target: next.target.clone(),
            generator_image: self.generator_image.as_ref().map(|g| next.apply(g)),
        }
    }
}

impl Elem {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Rat(r) => r.is_zero(),
            Value::Mod(m) => *m == 0,
            Value::Poly(c) => c.iter().all(|&x| x == 0),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Value::Rat(r) => r.is_one(),
            Value::Mod(m) => *m == 1,
            Value::Poly(c) => c[0] == 1 && c[1..].iter().all(|&x| x == 0),
        }
    }

    /// Index in the field's enumeration order (finite fields only).
    pub fn index(&self) -> Option<u128> {
        match (&self.value, &self.field.0.kind) {
            (Value::Mod(m), _) => Some(*m as u128),
            (Value::Poly(c), Kind::Extension { p, k, .. }) => Some(
                c[..*k]
                    .iter()
                    .rev()
                    .fold(0u128, |acc, &x| acc * (*p as u128) + x as u128),
            ),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.value {
            Value::Rat(r) => Some(r),
            _ => None,
        }
    }

    pub fn inv(&self) -> Result<Elem, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let value = match (&self.value, &self.field.0.kind) {
            (Value::Rat(r), _) => Value::Rat(r.recip()),
            (Value::Mod(m), Kind::Prime { p }) => Value::Mod(mod_pow(*m, p - 2, *p)),
            (Value::Poly(_), Kind::Extension { .. }) => {
                let order = self.field.size().unwrap() - 1;
                return Ok(self.pow_u128(order - 1));
            }
            _ => unreachable!("value does not match field kind"),
        };
        Ok(self.field.wrap(value))
    }

    /// `self^n`, with negative powers through the inverse.
    pub fn pow(&self, n: i64) -> Result<Elem, FieldError> {
        if n < 0 {
            if self.is_zero() {
                return Err(FieldError::ZeroToNegativePower);
            }
            Ok(self.inv()?.pow_u128(n.unsigned_abs() as u128))
        } else {
            Ok(self.pow_u128(n as u128))
        }
    }

    pub fn pow_u128(&self, mut e: u128) -> Elem {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn check_same(&self, other: &Elem) {
        assert!(
            self.field == other.field,
            "field mismatch: {} vs {}",
            self.field,
            other.field
        );
    }

    fn add_impl(&self, other: &Elem) -> Elem {
        self.check_same(other);
        let value = match (&self.value, &other.value, &self.field.0.kind) {
            (Value::Rat(a), Value::Rat(b), _) => Value::Rat(a + b),
            (Value::Mod(a), Value::Mod(b), Kind::Prime { p }) => Value::Mod((a + b) % p),
            (Value::Poly(a), Value::Poly(b), Kind::Extension { p, .. }) => {
                let mut c = [0u64; MAX_EXTENSION_DEGREE];
                for i in 0..MAX_EXTENSION_DEGREE {
                    c[i] = (a[i] + b[i]) % p;
                }
                Value::Poly(c)
            }
            _ => unreachable!("value does not match field kind"),
        };
        self.field.wrap(value)
    }

    fn neg_impl(&self) -> Elem {
        let value = match (&self.value, &self.field.0.kind) {
            (Value::Rat(a), _) => Value::Rat(-a),
            (Value::Mod(a), Kind::Prime { p }) => Value::Mod((p - a) % p),
            (Value::Poly(a), Kind::Extension { p, .. }) => {
                let mut c = [0u64; MAX_EXTENSION_DEGREE];
                for i in 0..MAX_EXTENSION_DEGREE {
                    c[i] = (p - a[i]) % p;
                }
                Value::Poly(c)
            }
            _ => unreachable!("value does not match field kind"),
        };
        self.field.wrap(value)
    }

    fn mul_impl(&self, other: &Elem) -> Elem {
        self.check_same(other);
        let value = match (&self.value, &other.value, &self.field.0.kind) {
            (Value::Rat(a), Value::Rat(b), _) => Value::Rat(a * b),
            (Value::Mod(a), Value::Mod(b), Kind::Prime { p }) => Value::Mod(a * b % p),
            (Value::Poly(a), Value::Poly(b), Kind::Extension { p, k, modulus }) => {
                let (p, k) = (*p, *k);
                let mut prod = [0u64; 2 * MAX_EXTENSION_DEGREE - 1];
                for i in 0..k {
                    if a[i] == 0 {
                        continue;
                    }
                    for j in 0..k {
                        prod[i + j] = (prod[i + j] + a[i] * b[j]) % p;
                    }
                }
                for deg in (k..=2 * k - 2).rev() {
                    let lead = prod[deg];
                    if lead == 0 {
                        continue;
                    }
                    for t in 0..k {
                        let idx = deg - k + t;
                        prod[idx] = (prod[idx] + p - lead * modulus[t] % p) % p;
                    }
                    prod[deg] = 0;
                }
                let mut c = [0u64; MAX_EXTENSION_DEGREE];
                c[..k].copy_from_slice(&prod[..k]);
                Value::Poly(c)
            }
            _ => unreachable!("value does not match field kind"),
        };
        self.field.wrap(value)
    }

    fn div_impl(&self, other: &Elem) -> Elem {
        let inv = other.inv().expect("division by zero field element");
        self.mul_impl(&inv)
    }
}

impl PartialEq for Elem {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.field == other.field
    }
}

impl Eq for Elem {}

impl Hash for Elem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.value.hash(state);
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Value::Mod(m) => write!(f, "{m}"),
            Value::Poly(c) => {
                let mut first = true;
                for (i, &coef) in c.iter().enumerate() {
                    if coef == 0 {
                        continue;
                    }
                    if !first {
                        write!(f, "+")?;
                    }
                    first = false;
                    match (i, coef) {
                        (0, _) => write!(f, "{coef}")?,
                        (1, 1) => write!(f, "w")?,
                        (1, _) => write!(f, "{coef}*w")?,
                        (_, 1) => write!(f, "w^{i}")?,
                        _ => write!(f, "{coef}*w^{i}")?,
                    }
                }
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $impl:ident) => {
        impl $trait<&Elem> for &Elem {
            type Output = Elem;
            fn $method(self, rhs: &Elem) -> Elem {
                self.$impl(rhs)
            }
        }
        impl $trait<Elem> for &Elem {
            type Output = Elem;
            fn $method(self, rhs: Elem) -> Elem {
                self.$impl(&rhs)
            }
        }
        impl $trait<&Elem> for Elem {
            type Output = Elem;
            fn $method(self, rhs: &Elem) -> Elem {
                self.$impl(rhs)
            }
        }
        impl $trait<Elem> for Elem {
            type Output = Elem;
            fn $method(self, rhs: Elem) -> Elem {
                self.$impl(&rhs)
            }
        }
    };
}

binop!(Add, add, add_impl);
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

impl Sub<&Elem> for &Elem {
    type Output = Elem;
    fn sub(self, rhs: &Elem) -> Elem {
        self.add_impl(&rhs.neg_impl())
    }
}
impl Sub<Elem> for &Elem {
    type Output = Elem;
    fn sub(self, rhs: Elem) -> Elem {
        self - &rhs
    }
}
impl Sub<&Elem> for Elem {
    type Output = Elem;
    fn sub(self, rhs: &Elem) -> Elem {
        &self - rhs
    }
}
impl Sub<Elem> for Elem {
    type Output = Elem;
    fn sub(self, rhs: Elem) -> Elem {
        &self - &rhs
    }
}

impl Neg for &Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        self.neg_impl()
    }
}
impl Neg for Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        self.neg_impl()
    }
}

/// Product of the items, `1` for an empty iterator.
pub fn product<I: IntoIterator<Item = Elem>>(field: &Field, items: I) -> Elem {
    items.into_iter().fold(field.one(), |acc, x| acc * x)
}

/// Sum of the items, `0` for an empty iterator.
pub fn sum<I: IntoIterator<Item = Elem>>(field: &Field, items: I) -> Elem {
    items.into_iter().fold(field.zero(), |acc, x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf5_basics() {
        let f = Field::prime(5).unwrap();
        assert_eq!(f.characteristic(), 5);
        assert_eq!(f.size(), Some(5));
        assert_eq!(f.from_i64(3) * f.from_i64(4), f.from_i64(2));
        assert_eq!(f.from_i64(3).pow(0).unwrap(), f.one());
        assert_eq!(f.from_i64(-1), f.from_i64(4));
    }

    #[test]
    fn gf4_basics() {
        let f = Field::gf4();
        assert_eq!(f.characteristic(), 2);
        assert_eq!(f.size(), Some(4));
        let w = f.generator().unwrap();
        assert_eq!(w.pow(3).unwrap(), f.one());
        assert_eq!(&w * &w, &w + f.one());
        assert_eq!(w.to_string(), "w");
        assert_eq!((&w + f.one()).to_string(), "1+w");
    }

    #[test]
    fn reducible_modulus_rejected() {
        assert!(matches!(
            Field::extension(2, &[1, 0, 1]),
            Err(FieldError::ReducibleModulus(..))
        ));
        assert!(matches!(Field::prime(6), Err(FieldError::NonPrimeModulus(6))));
        // x^4+x^3+x^2+x+1 over GF(2) is irreducible; x^4+x^2+1 = (x^2+x+1)^2 is not
        assert!(Field::extension(2, &[1, 1, 1, 1, 1]).is_ok());
        assert!(matches!(
            Field::extension(2, &[1, 0, 1, 0, 1]),
            Err(FieldError::ReducibleModulus(..))
        ));
    }

    #[test]
    fn rational_negative_power() {
        let q = Field::rational();
        assert_eq!(q.from_i64(2).pow(-3).unwrap(), q.from_ratio(1, 8));
        assert_eq!(q.zero().pow(-1), Err(FieldError::ZeroToNegativePower));
        assert_eq!(q.zero().pow(0).unwrap(), q.one());
    }

    #[test]
    fn parse_and_format() {
        let q = Field::rational();
        assert_eq!(q.parse("-6/4").unwrap().to_string(), "-3/2");
        assert_eq!(q.parse("7").unwrap(), q.from_i64(7));
        assert!(q.parse("1/0").is_err());
        let f = Field::gf4();
        assert_eq!(f.parse("1+1*w").unwrap(), f.parse("w+1").unwrap());
        assert_eq!(f.parse("0+0*w").unwrap(), f.zero());
        let g = Field::extension(3, &[1, 0, 1]).unwrap();
        assert_eq!(g.parse("2*w+1").unwrap().to_string(), "1+2*w");
        assert_eq!(g.parse("-w").unwrap().to_string(), "2*w");
        assert!(g.parse("w^2").is_err());
    }

    #[test]
    fn field_flag_parsing() {
        assert_eq!(FieldSpec::parse_flag("rational").unwrap(), FieldSpec::Rational);
        assert_eq!(FieldSpec::parse_flag("prime:7").unwrap(), FieldSpec::Prime { p: 7 });
        assert_eq!(
            FieldSpec::parse_flag("ext:2:2:1,1,1").unwrap(),
            FieldSpec::Extension {
                p: 2,
                k: 2,
                modulus: vec![1, 1, 1]
            }
        );
        assert!(FieldSpec::parse_flag("ext:2").is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec: FieldSpec =
            serde_json::from_str(r#"{"kind":"extension","p":2,"k":2,"modulus":[1,1,1]}"#).unwrap();
        assert_eq!(Field::new(spec).unwrap(), Field::gf4());
        let s = serde_json::to_string(&FieldSpec::Prime { p: 5 }).unwrap();
        assert_eq!(s, r#"{"kind":"prime","p":5}"#);
    }

    #[test]
    fn square_roots() {
        let q = Field::rational();
        assert_eq!(q.sqrt(&q.from_ratio(9, 4)), Some(q.from_ratio(3, 2)));
        assert_eq!(q.sqrt(&q.from_i64(2)), None);
        let f = Field::prime(13).unwrap();
        for x in f.elements() {
            let sq = &x * &x;
            let r = f.sqrt(&sq).unwrap();
            assert_eq!(&r * &r, sq);
        }
        assert_eq!(f.sqrt(&f.from_i64(2)), None);
    }

    #[test]
    fn quadratic_roots_and_extensions() {
        let q = Field::rational();
        let roots = q.quadratic_roots(&q.from_ratio(-5, 2), &q.one());
        assert_eq!(roots, vec![q.from_i64(2), q.from_ratio(1, 2)]);

        let f5 = Field::prime(5).unwrap();
        // x^2 + x + 1 has no root mod 5
        assert!(f5.quadratic_roots(&f5.one(), &f5.one()).is_empty());
        let (big, emb) = f5.quadratic_extension().unwrap();
        assert_eq!(big.size(), Some(25));
        let roots = big.quadratic_roots(&emb.apply(&f5.one()), &emb.apply(&f5.one()));
        assert_eq!(roots.len(), 2);
        let (bigger, emb2) = big.quadratic_extension().unwrap();
        assert_eq!(bigger.size(), Some(625));
        // embedding is a ring homomorphism
        for a in big.elements().iter().step_by(3) {
            for b in big.elements().iter().step_by(5) {
                assert_eq!(emb2.apply(&(a * b)), emb2.apply(a) * emb2.apply(b));
                assert_eq!(emb2.apply(&(a + b)), emb2.apply(a) + emb2.apply(b));
            }
        }
        let (gf16, e16) = Field::gf4().quadratic_extension().unwrap();
        assert_eq!(gf16.size(), Some(16));
        let w = Field::gf4().generator().unwrap();
        assert_eq!(e16.apply(&w).pow(3).unwrap(), gf16.one());
        assert!(gf16.quadratic_extension().is_err());
        assert!(q.quadratic_extension().is_err());
    }

    #[test]
    fn element_enumeration_is_indexed() {
        let f = Field::extension(3, &[1, 0, 1]).unwrap();
        let all = f.elements();
        assert_eq!(all.len(), 9);
        for (i, e) in all.iter().enumerate() {
            assert_eq!(e.index(), Some(i as u128));
        }
    }
}
