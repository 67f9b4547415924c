//! Terminating hypergeometric sums, ordinary (rFs) and basic (rφs).

use thiserror::Error;

use crate::field::Elem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergeomError {
    #[error("denominator factor vanishes at term {0} before the series terminates")]
    DenominatorPoleBeforeTermination(usize),
    #[error("series does not terminate within {0} terms")]
    NotTerminating(usize),
}

/// Parameters of a series `Σ_n Π(a)_n / Π(b)_n · z^n / n!` (ordinary, `base`
/// absent) or `Σ_n Π(a;q)_n / Π(b;q)_n · z^n / (q;q)_n` (basic, `base = q`).
///
/// Basic series are summed without the `(−1)^n q^{n(n−1)/2}` balancing
/// factor, which is trivial for the `r = s + 1` shapes used here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypergeomSpec {
    pub num: Vec<Elem>,
    pub den: Vec<Elem>,
    pub base: Option<Elem>,
    pub z: Elem,
}

impl HypergeomSpec {
    pub fn ordinary(num: Vec<Elem>, den: Vec<Elem>, z: Elem) -> Self {
        HypergeomSpec {
            num,
            den,
            base: None,
            z,
        }
    }

    pub fn basic(num: Vec<Elem>, den: Vec<Elem>, q: Elem, z: Elem) -> Self {
        HypergeomSpec {
            num,
            den,
            base: Some(q),
            z,
        }
    }
}

/// Sums the series up to and including term `max_index`. The sum stops as
/// soon as a numerator factor vanishes; a vanishing denominator factor
/// before that is an error, as is reaching a nonzero term past `max_index`.
pub fn hypergeom_sum(spec: &HypergeomSpec, max_index: usize) -> Result<Elem, HypergeomError> {
    let f = spec.z.field();
    let one = f.one();
    let mut total = one.clone();
    let mut term = one.clone();
    // q^{n-1} for basic series, n - 1 as a field element for ordinary ones
    let mut shift = match &spec.base {
        Some(_) => one.clone(),
        None => f.zero(),
    };
    for n in 1usize.. {
        let factor = |a: &Elem| match &spec.base {
            Some(_) => &one - a * &shift,
            None => a + &shift,
        };
        let nums: Vec<Elem> = spec.num.iter().map(factor).collect();
        if nums.iter().any(Elem::is_zero) {
            return Ok(total);
        }
        if n > max_index {
            return Err(HypergeomError::NotTerminating(max_index));
        }
        let mut den = spec.den.iter().map(factor).fold(one.clone(), |acc, x| acc * x);
        // (q;q)_n or n!
        den = den
            * match &spec.base {
                Some(q) => &one - &shift * q,
                None => &shift + &one,
            };
        let den_inv = den
            .inv()
            .map_err(|_| HypergeomError::DenominatorPoleBeforeTermination(n))?;
        term = term * nums.into_iter().fold(one.clone(), |acc, x| acc * x) * den_inv * &spec.z;
        total = total + &term;
        shift = match &spec.base {
            Some(q) => shift * q,
            None => shift + &one,
        };
    }
    unreachable!()
}
