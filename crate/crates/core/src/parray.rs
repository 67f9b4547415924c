//! Parameter arrays: the type, PA1-PA5 validation, the D4 action, bases and
//! the exhaustive enumerator over finite fields.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::field::{Elem, Field, FieldError, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParrayError {
    #[error("length mismatch: {what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("element of {0} found in an array over {1}")]
    FieldMismatch(String, String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("enumeration needs {needed} kernel calls, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("enumeration requires a finite field")]
    InfiniteField,
}

/// `(θ_i, θ*_i, i=0..d; φ_j, ϕ_j, j=1..d)` over a field.
///
/// `varphi` is the first split sequence, `phi` the second; both are stored
/// zero-based (`varphi[0]` is φ_1).
#[derive(Clone, PartialEq, Eq)]
pub struct ParameterArray {
    field: Field,
    theta: Vec<Elem>,
    theta_star: Vec<Elem>,
    varphi: Vec<Elem>,
    phi: Vec<Elem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterArrayJson {
    pub field: FieldSpec,
    pub d: usize,
    pub theta: Vec<String>,
    pub theta_star: Vec<String>,
    pub varphi: Vec<String>,
    pub phi: Vec<String>,
}

impl ParameterArray {
    pub fn new(
        field: &Field,
        theta: Vec<Elem>,
        theta_star: Vec<Elem>,
        varphi: Vec<Elem>,
        phi: Vec<Elem>,
    ) -> Result<Self, ParrayError> {
        if theta.is_empty() {
            return Err(ParrayError::LengthMismatch {
                what: "theta",
                got: 0,
                expected: 1,
            });
        }
        let d = theta.len() - 1;
        for (what, got, expected) in [
            ("theta_star", theta_star.len(), d + 1),
            ("varphi", varphi.len(), d),
            ("phi", phi.len(), d),
        ] {
            if got != expected {
                return Err(ParrayError::LengthMismatch {
                    what,
                    got,
                    expected,
                });
            }
        }
        for e in theta.iter().chain(&theta_star).chain(&varphi).chain(&phi) {
            if e.field() != field {
                return Err(ParrayError::FieldMismatch(
                    e.field().to_string(),
                    field.to_string(),
                ));
            }
        }
        Ok(ParameterArray {
            field: field.clone(),
            theta,
            theta_star,
            varphi,
            phi,
        })
    }

    /// Convenience constructor from small integers.
    pub fn from_ints(
        field: &Field,
        theta: &[i64],
        theta_star: &[i64],
        varphi: &[i64],
        phi: &[i64],
    ) -> Result<Self, ParrayError> {
        let conv = |xs: &[i64]| xs.iter().map(|&x| field.from_i64(x)).collect();
        Self::new(field, conv(theta), conv(theta_star), conv(varphi), conv(phi))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn d(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn theta(&self) -> &[Elem] {
        &self.theta
    }

    pub fn theta_star(&self) -> &[Elem] {
        &self.theta_star
    }

    /// First split sequence φ_1..φ_d (zero-based storage).
    pub fn varphi(&self) -> &[Elem] {
        &self.varphi
    }

    /// Second split sequence ϕ_1..ϕ_d (zero-based storage).
    pub fn phi(&self) -> &[Elem] {
        &self.phi
    }

    /// φ_i for `1 <= i <= d`.
    pub fn varphi_at(&self, i: usize) -> &Elem {
        &self.varphi[i - 1]
    }

    /// ϕ_i for `1 <= i <= d`.
    pub fn phi_at(&self, i: usize) -> &Elem {
        &self.phi[i - 1]
    }

    /// Maps every entry through `f`, e.g. a field embedding.
    pub fn map(&self, target: &Field, f: impl Fn(&Elem) -> Elem) -> ParameterArray {
        let m = |xs: &[Elem]| xs.iter().map(&f).collect::<Vec<_>>();
        ParameterArray {
            field: target.clone(),
            theta: m(&self.theta),
            theta_star: m(&self.theta_star),
            varphi: m(&self.varphi),
            phi: m(&self.phi),
        }
    }

    pub fn to_json(&self) -> ParameterArrayJson {
        let s = |xs: &[Elem]| xs.iter().map(Elem::to_string).collect();
        ParameterArrayJson {
            field: self.field.spec().clone(),
            d: self.d(),
            theta: s(&self.theta),
            theta_star: s(&self.theta_star),
            varphi: s(&self.varphi),
            phi: s(&self.phi),
        }
    }

    pub fn from_json(json: &ParameterArrayJson) -> Result<Self, ParrayError> {
        let field = Field::new(json.field.clone())?;
        let parse = |xs: &[String]| -> Result<Vec<Elem>, ParrayError> {
            xs.iter()
                .map(|s| field.parse(s).map_err(ParrayError::from))
                .collect()
        };
        let p = Self::new(
            &field,
            parse(&json.theta)?,
            parse(&json.theta_star)?,
            parse(&json.varphi)?,
            parse(&json.phi)?,
        )?;
        if p.d() != json.d {
            return Err(ParrayError::LengthMismatch {
                what: "theta",
                got: json.theta.len(),
                expected: json.d + 1,
            });
        }
        Ok(p)
    }
}

impl fmt::Debug for ParameterArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ParameterArray[{}; d={}; θ={:?}; θ*={:?}; φ={:?}; ϕ={:?}]",
            self.field,
            self.d(),
            self.theta,
            self.theta_star,
            self.varphi,
            self.phi
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    PA1,
    PA2,
    PA3,
    PA4,
    PA5,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::PA1,
        Condition::PA2,
        Condition::PA3,
        Condition::PA4,
        Condition::PA5,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub indices: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn passes(&self, c: Condition) -> bool {
        self.violations.iter().all(|v| v.condition != c)
    }

    fn push(&mut self, condition: Condition, indices: Vec<usize>, detail: String) {
        self.violations.push(Violation {
            condition,
            indices,
            detail,
        });
    }
}

/// Σ_{h=0}^{i-1} (θ_h − θ_{d−h}) / (θ_0 − θ_d), or `None` when θ_0 = θ_d.
fn pa_sum(theta: &[Elem], i: usize) -> Option<Elem> {
    let d = theta.len() - 1;
    let den = (&theta[0] - &theta[d]).inv().ok()?;
    Some((0..i).fold(theta[0].field().zero(), |acc, h| {
        acc + (&theta[h] - &theta[d - h]) * &den
    }))
}

/// The two ratios of PA5 at index `i`, `None` where a denominator vanishes.
fn pa5_ratios(seq: &[Elem], i: usize) -> Option<Elem> {
    let den = (&seq[i - 1] - &seq[i]).inv().ok()?;
    Some((&seq[i - 2] - &seq[i + 1]) * den)
}

/// Checks PA1-PA5 and reports every violation.
pub fn validate(p: &ParameterArray) -> ValidationReport {
    let mut report = ValidationReport::default();
    let d = p.d();
    let (th, ths) = (&p.theta, &p.theta_star);

    for i in 0..=d {
        for j in i + 1..=d {
            if th[i] == th[j] {
                report.push(Condition::PA1, vec![i, j], format!("θ_{i} = θ_{j} = {}", th[i]));
            }
            if ths[i] == ths[j] {
                report.push(Condition::PA1, vec![i, j], format!("θ*_{i} = θ*_{j} = {}", ths[i]));
            }
        }
    }
    for i in 1..=d {
        if p.varphi_at(i).is_zero() {
            report.push(Condition::PA2, vec![i], format!("φ_{i} = 0"));
        }
        if p.phi_at(i).is_zero() {
            report.push(Condition::PA2, vec![i], format!("ϕ_{i} = 0"));
        }
    }

    if d >= 1 {
        for i in 1..=d {
            let Some(s) = pa_sum(th, i) else {
                let msg = "θ_0 = θ_d, sum undefined".to_string();
                report.push(Condition::PA3, vec![i], msg.clone());
                report.push(Condition::PA4, vec![i], msg);
                break;
            };
            let dt = &ths[i] - &ths[0];
            let want_varphi = p.phi_at(1) * &s + &dt * (&th[i - 1] - &th[d]);
            if &want_varphi != p.varphi_at(i) {
                report.push(
                    Condition::PA3,
                    vec![i],
                    format!("φ_{i} = {} but PA3 gives {}", p.varphi_at(i), want_varphi),
                );
            }
            let want_phi = p.varphi_at(1) * &s + &dt * (&th[d - i + 1] - &th[0]);
            if &want_phi != p.phi_at(i) {
                report.push(
                    Condition::PA4,
                    vec![i],
                    format!("ϕ_{i} = {} but PA4 gives {}", p.phi_at(i), want_phi),
                );
            }
        }
    }

    if d >= 3 {
        let mut common: Option<Elem> = None;
        for i in 2..d {
            let (r, rs) = (pa5_ratios(th, i), pa5_ratios(ths, i));
            let (Some(r), Some(rs)) = (r, rs) else {
                report.push(Condition::PA5, vec![i], format!("ratio undefined at i = {i}"));
                continue;
            };
            if r != rs {
                report.push(
                    Condition::PA5,
                    vec![i],
                    format!("ratios differ at i = {i}: {r} vs {rs}"),
                );
            }
            match &common {
                None => common = Some(r),
                Some(c) if *c != r => report.push(
                    Condition::PA5,
                    vec![2, i],
                    format!("ratio depends on i: {c} at i = 2, {r} at i = {i}"),
                ),
                _ => {}
            }
        }
    }
    report
}

/// Generators of the D4 action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum D4Gen {
    Star,
    Down,
    DDown,
}

impl D4Gen {
    fn apply(self, p: &ParameterArray) -> ParameterArray {
        let d = p.d();
        let rev = |xs: &[Elem]| xs.iter().rev().cloned().collect::<Vec<_>>();
        let (theta, theta_star, varphi, phi) = match self {
            D4Gen::Star => (
                p.theta_star.clone(),
                p.theta.clone(),
                p.varphi.clone(),
                rev(&p.phi),
            ),
            D4Gen::Down => (
                p.theta.clone(),
                rev(&p.theta_star),
                rev(&p.phi),
                rev(&p.varphi),
            ),
            D4Gen::DDown => (
                rev(&p.theta),
                p.theta_star.clone(),
                p.phi.clone(),
                p.varphi.clone(),
            ),
        };
        debug_assert_eq!(theta.len(), d + 1);
        ParameterArray {
            field: p.field.clone(),
            theta,
            theta_star,
            varphi,
            phi,
        }
    }
}

/// The eight elements of D4 as reduced words.
pub const D4_WORDS: [&[D4Gen]; 8] = [
    &[],
    &[D4Gen::Star],
    &[D4Gen::Down],
    &[D4Gen::DDown],
    &[D4Gen::Down, D4Gen::DDown],
    &[D4Gen::Star, D4Gen::Down],
    &[D4Gen::Star, D4Gen::DDown],
    &[D4Gen::Star, D4Gen::Down, D4Gen::DDown],
];

/// Applies the word left to right.
pub fn d4_apply(p: &ParameterArray, word: &[D4Gen]) -> ParameterArray {
    word.iter().fold(p.clone(), |acc, g| g.apply(&acc))
}

/// The common PA5 ratio (β + 1) for `d >= 3`.
pub fn beta_plus_one(p: &ParameterArray) -> Option<Elem> {
    if p.d() < 3 {
        return None;
    }
    pa5_ratios(&p.theta, 2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseCandidates {
    /// Roots of `q^2 − βq + 1` in the field, with multiplicity.
    InField(Vec<Elem>),
    /// The quadratic `q^2 + b q + c` has no root in the field.
    QuadraticOnly { b: Elem, c: Elem },
    /// `d < 3`: every nonzero scalar is a base.
    AnyBase,
}

pub fn base_candidates(p: &ParameterArray) -> BaseCandidates {
    let Some(bp1) = beta_plus_one(p) else {
        return BaseCandidates::AnyBase;
    };
    let f = p.field();
    let b = f.one() - bp1; // -β
    let c = f.one();
    let roots = f.quadratic_roots(&b, &c);
    if roots.is_empty() {
        BaseCandidates::QuadraticOnly { b, c }
    } else {
        BaseCandidates::InField(roots)
    }
}

/// Completes θ, θ*, ϕ_1 to a parameter array using PA3 then PA4, returning
/// it only if the result satisfies every condition.
pub fn complete_from_theta(
    field: &Field,
    theta: &[Elem],
    theta_star: &[Elem],
    phi_1: &Elem,
) -> Option<ParameterArray> {
    let d = theta.len().checked_sub(1)?;
    if d == 0 || theta_star.len() != d + 1 {
        return None;
    }
    let sums: Vec<Elem> = (1..=d).map(|i| pa_sum(theta, i)).collect::<Option<_>>()?;
    let varphi: Vec<Elem> = (1..=d)
        .map(|i| phi_1 * &sums[i - 1] + (&theta_star[i] - &theta_star[0]) * (&theta[i - 1] - &theta[d]))
        .collect();
    let phi: Vec<Elem> = (1..=d)
        .map(|i| {
            &varphi[0] * &sums[i - 1]
                + (&theta_star[i] - &theta_star[0]) * (&theta[d - i + 1] - &theta[0])
        })
        .collect();
    if &phi[0] != phi_1 {
        return None;
    }
    let p = ParameterArray::new(field, theta.to_vec(), theta_star.to_vec(), varphi, phi).ok()?;
    validate(&p).ok().then_some(p)
}

/// All injective `len`-tuples of `items`, lexicographic in item order.
pub(crate) fn injective_tuples(items: &[Elem], len: usize) -> Vec<Vec<Elem>> {
    fn rec(items: &[Elem], len: usize, used: &mut Vec<bool>, cur: &mut Vec<Elem>, out: &mut Vec<Vec<Elem>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for (i, x) in items.iter().enumerate() {
            if used[i] {
                continue;
            }
            used[i] = true;
            cur.push(x.clone());
            rec(items, len, used, cur, out);
            cur.pop();
            used[i] = false;
        }
    }
    let mut out = Vec::new();
    if len <= items.len() {
        rec(items, len, &mut vec![false; items.len()], &mut Vec::new(), &mut out);
    }
    out
}

pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Exhaustive enumeration of parameter arrays over a finite field.
///
/// Free choices are injective θ, injective θ*, nonzero ϕ_1; everything else
/// follows from PA3/PA4. Output order is lexicographic in (θ, θ*, ϕ_1) using
/// the field's element order.
#[derive(Debug, Clone)]
pub struct Enumerator {
    field: Field,
    d: usize,
    budget: u128,
}

impl Enumerator {
    pub fn new(field: &Field, d: usize) -> Result<Self, ParrayError> {
        if !field.is_finite() {
            return Err(ParrayError::InfiniteField);
        }
        Ok(Enumerator {
            field: field.clone(),
            d,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// Number of calls to [`complete_from_theta`].
    pub fn kernel_calls(&self) -> u128 {
        let n = self.field.size().unwrap();
        let k = self.d as u128 + 1;
        if k > n {
            return 0;
        }
        let falling: u128 = (0..k).map(|i| n - i).product();
        falling * falling * (n - 1)
    }

    fn check_budget(&self) -> Result<(), ParrayError> {
        let needed = self.kernel_calls();
        if needed > self.budget {
            return Err(ParrayError::BudgetExceeded {
                needed,
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn tuples(&self) -> (Vec<Vec<Elem>>, Vec<Elem>) {
        let elems = self.field.elements();
        let nonzero = elems.iter().filter(|e| !e.is_zero()).cloned().collect();
        (injective_tuples(&elems, self.d + 1), nonzero)
    }

    /// The kernel call; for `d = 0` there is no ϕ_1 and each (θ, θ*) pair is
    /// yielded once, on the first nonzero choice.
    fn complete(&self, theta: &[Elem], theta_star: &[Elem], phi_1: &Elem) -> Option<ParameterArray> {
        if self.d == 0 {
            let first = self.field.element(1).expect("fields have a nonzero element");
            return (*phi_1 == first).then(|| {
                ParameterArray::new(&self.field, theta.to_vec(), theta_star.to_vec(), vec![], vec![])
                    .expect("lengths match")
            });
        }
        complete_from_theta(&self.field, theta, theta_star, phi_1)
    }

    fn shard(&self, theta: &[Elem], stars: &[Vec<Elem>], nonzero: &[Elem]) -> Vec<ParameterArray> {
        let mut out = Vec::new();
        for ts in stars {
            for phi1 in nonzero {
                if let Some(p) = self.complete(theta, ts, phi1) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Lazy sequential stream.
    pub fn iter(&self) -> Result<impl Iterator<Item = ParameterArray> + '_, ParrayError> {
        self.check_budget()?;
        let (tuples, nonzero) = self.tuples();
        let thetas = tuples.clone();
        Ok(thetas.into_iter().flat_map(move |th| {
            let tuples = tuples.clone();
            let nonzero = nonzero.clone();
            tuples.into_iter().flat_map(move |ts| {
                let th = th.clone();
                nonzero
                    .clone()
                    .into_iter()
                    .filter_map(move |phi1| self.complete(&th, &ts, &phi1))
            })
        }))
    }

    /// Sequential collection, one shard per θ tuple.
    pub fn collect_sequential(&self) -> Result<Vec<ParameterArray>, ParrayError> {
        self.check_budget()?;
        let (tuples, nonzero) = self.tuples();
        Ok(tuples
            .iter()
            .flat_map(|th| self.shard(th, &tuples, &nonzero))
            .collect())
    }

    /// Collection sharded by θ tuple; parallel when the `parallel` feature is
    /// enabled. Order matches [`Enumerator::iter`].
    pub fn collect(&self) -> Result<Vec<ParameterArray>, ParrayError> {
        self.check_budget()?;
        let (tuples, nonzero) = self.tuples();
        let shards = exec::map(&tuples, |th| self.shard(th, &tuples, &nonzero));
        Ok(shards.into_iter().flatten().collect())
    }
}

/// Convenience wrapper: every parameter array of diameter `d` over a finite
/// field, in canonical order.
pub fn enumerate_arrays(field: &Field, d: usize) -> Result<Vec<ParameterArray>, ParrayError> {
    Enumerator::new(field, d)?.collect()
}
