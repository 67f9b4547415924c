//! Constructive classification: find a family and parameters that
//! regenerate a given parameter array.
//!
//! The base `q` decides the case: `q ∉ {1, −1}` (I), `q = 1` in odd or zero
//! characteristic (II), `q = −1` (III), `q = 1` in characteristic 2 (IV).
//! Eigenvalue sequences are fitted to the case's closed form, the remaining
//! parameters are read off `φ_1`, and the result is accepted only when
//! [`generate`] reproduces the input entrywise. When a base or a pair
//! `r1, r2` is only available in a quadratic extension of a finite field,
//! classification continues there (up to total degree 4).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{generate, Family, FamilyParams};
use crate::field::{Elem, Embedding, Field};
use crate::matrix::SquareMatrix;
use crate::parray::{beta_plus_one, validate, ParameterArray};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("classification needs d >= 1")]
    ZeroDiameter,
    #[error("not a parameter array: {0}")]
    Invalid(String),
    #[error("witness parameters need a field extension: {0}")]
    NeedsFieldExtension(String),
    #[error("no case matched: {0}")]
    NoCaseMatched(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
            Case::IV => "IV",
        };
        f.write_str(s)
    }
}

/// Coefficients `(η, μ, h)` of a fitted eigenvalue sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fit {
    pub eta: Elem,
    pub mu: Elem,
    pub h: Elem,
}

/// Intermediate scalars of the construction, when the case defines them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Intermediates {
    pub theta_fit: Option<Fit>,
    pub theta_star_fit: Option<Fit>,
    pub tau: Option<Elem>,
}

#[derive(Debug, Clone)]
pub struct ClassifierWitness {
    pub case: Case,
    /// Family tag and parameters, living in the witness field.
    pub params: FamilyParams,
    pub base: Elem,
    pub intermediates: Intermediates,
    /// Embedding of the input field into the witness field.
    pub embedding: Embedding,
}

impl ClassifierWitness {
    pub fn family(&self) -> Family {
        self.params.family
    }

    pub fn field_of_witness(&self) -> &Field {
        self.embedding.target()
    }

    /// Regenerates the array from the witness parameters (in the witness
    /// field).
    pub fn regenerate(&self) -> ParameterArray {
        generate(&self.params, self.field_of_witness()).expect("witness parameters are admissible")
    }

    pub fn to_json(&self) -> WitnessJson {
        let mut parameters: BTreeMap<String, String> = self
            .params
            .named()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        parameters.insert("d".into(), self.params.d.to_string());
        let mut intermediates = BTreeMap::new();
        let i = &self.intermediates;
        for (prefix, fit) in [("", &i.theta_fit), ("star", &i.theta_star_fit)] {
            if let Some(fit) = fit {
                intermediates.insert(format!("eta{prefix}"), fit.eta.to_string());
                intermediates.insert(format!("mu{prefix}"), fit.mu.to_string());
                intermediates.insert(format!("h{prefix}"), fit.h.to_string());
            }
        }
        if let Some(t) = &i.tau {
            intermediates.insert("tau".into(), t.to_string());
        }
        WitnessJson {
            case: self.case,
            family: self.params.family,
            base: self.base.to_string(),
            parameters,
            intermediates,
            field_of_witness: self.field_of_witness().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub case: Case,
    pub family: Family,
    pub base: String,
    pub parameters: BTreeMap<String, String>,
    pub intermediates: BTreeMap<String, String>,
    pub field_of_witness: String,
}

/// Fits `θ` to the case's closed form and verifies it on every index:
/// `η + μq^i + hq^{−i}` (I), `η + (μ+h)i + hi²` (II) or
/// `η + μ(−1)^i + 2hi(−1)^i` (III). For `d = 1` the system is
/// underdetermined and the representative with `μ = 0` (I) or `h = 0` (II)
/// is returned.
pub fn fit_closed_form_theta(theta: &[Elem], q: &Elem, case: Case) -> Option<Fit> {
    let f = q.field();
    let d = theta.len().checked_sub(1)?;
    let one = f.one();
    let term = |fit: &Fit, i: usize| -> Option<Elem> {
        let ii = f.from_i64(i as i64);
        Some(match case {
            Case::I => &fit.eta + &fit.mu * q.pow(i as i64).ok()? + &fit.h * q.pow(-(i as i64)).ok()?,
            Case::II => &fit.eta + (&fit.mu + &fit.h) * &ii + &fit.h * &ii * &ii,
            Case::III => {
                let sign = if i.is_multiple_of(2) { one.clone() } else { -one.clone() };
                &fit.eta + &fit.mu * &sign + f.from_i64(2) * &fit.h * ii * sign
            }
            Case::IV => return None,
        })
    };
    let fit = match (case, d) {
        (_, 0) | (Case::IV, _) => return None,
        (Case::I, 1) => {
            let h = (&theta[1] - &theta[0]) * (q.inv().ok()? - &one).inv().ok()?;
            Fit {
                eta: &theta[0] - &h,
                mu: f.zero(),
                h,
            }
        }
        (Case::I, _) => {
            let m = SquareMatrix::from_fn(f, 3, |i, j| match j {
                0 => one.clone(),
                1 => q.pow(i as i64).expect("q nonzero"),
                _ => q.pow(-(i as i64)).expect("q nonzero"),
            });
            let x = m.solve(&theta[..3]).ok()?;
            Fit {
                eta: x[0].clone(),
                mu: x[1].clone(),
                h: x[2].clone(),
            }
        }
        (Case::II, 1) => Fit {
            eta: theta[0].clone(),
            mu: &theta[1] - &theta[0],
            h: f.zero(),
        },
        (Case::II, _) => {
            let half = f.from_i64(2).inv().ok()?;
            let h = ((&theta[2] - &theta[0]) - f.from_i64(2) * (&theta[1] - &theta[0])) * &half;
            Fit {
                eta: theta[0].clone(),
                mu: &theta[1] - &theta[0] - f.from_i64(2) * &h,
                h,
            }
        }
        (Case::III, 1) => return None,
        (Case::III, _) => {
            let half = f.from_i64(2).inv().ok()?;
            let h = (&theta[2] - &theta[0]) * f.from_i64(4).inv().ok()?;
            Fit {
                eta: (&theta[0] + &theta[1] + f.from_i64(2) * &h) * &half,
                mu: (&theta[0] - &theta[1] - f.from_i64(2) * &h) * &half,
                h,
            }
        }
    };
    for (i, t) in theta.iter().enumerate() {
        if term(&fit, i)? != *t {
            return None;
        }
    }
    Some(fit)
}

enum Attempt {
    Found(Box<ClassifierWitness>),
    NeedsExtension(String),
    Failed(String),
}

/// Classifies a parameter array. See the module documentation.
pub fn classify(p: &ParameterArray) -> Result<ClassifierWitness, ClassifyError> {
    if p.d() == 0 {
        return Err(ClassifyError::ZeroDiameter);
    }
    let report = validate(p);
    if !report.ok() {
        return Err(ClassifyError::Invalid(format!("{:?}", report.violations)));
    }
    classify_in(p, Embedding::identity(p.field()))
}

fn classify_in(orig: &ParameterArray, emb: Embedding) -> Result<ClassifierWitness, ClassifyError> {
    let field = emb.target().clone();
    let p = orig.map(&field, |x| emb.apply(x));
    let mut needs = Vec::new();
    let mut failures = Vec::new();
    for attempt in attempts(&p, &emb) {
        match attempt {
            Attempt::Found(w) => return Ok(*w),
            Attempt::NeedsExtension(why) => needs.push(why),
            Attempt::Failed(why) => failures.push(why),
        }
    }
    if !needs.is_empty() {
        return match field.quadratic_extension() {
            Ok((_, ext)) => classify_in(orig, emb.then(&ext)),
            Err(_) => Err(ClassifyError::NeedsFieldExtension(needs.join("; "))),
        };
    }
    Err(ClassifyError::NoCaseMatched(failures.join("; ")))
}

/// Runs the case dispatch lazily, stopping at the first witness.
fn attempts<'a>(p: &'a ParameterArray, emb: &'a Embedding) -> impl Iterator<Item = Attempt> + 'a {
    let f = p.field().clone();
    let d = p.d();
    let two = f.from_i64(2);
    let odd = f.characteristic() != 2;
    let mut plan: Vec<Box<dyn Fn() -> Attempt + 'a>> = Vec::new();
    if d >= 3 {
        let beta = beta_plus_one(p).expect("validated arrays have a base") - f.one();
        if beta == two && !odd {
            plan.push(Box::new(move || case_iv(p, emb)));
        } else if beta == two {
            plan.push(Box::new(move || case_ii(p, emb)));
        } else if beta == -two.clone() {
            plan.push(Box::new(move || case_iii(p, emb)));
        } else {
            let b = -beta;
            let roots = f.quadratic_roots(&b, &f.one());
            match roots.into_iter().next() {
                Some(q) => plan.push(Box::new(move || case_i(p, emb, &q))),
                None => plan.push(Box::new(move || {
                    Attempt::NeedsExtension(format!("base is a root of x^2 + ({b})x + 1"))
                })),
            }
        }
    } else {
        if d == 1 || odd {
            plan.push(Box::new(move || case_ii(p, emb)));
        }
        if d == 2 && odd {
            plan.push(Box::new(move || case_iii(p, emb)));
        }
        for q in small_bases(&f, d) {
            plan.push(Box::new(move || case_i(p, emb, &q)));
        }
        if f.is_finite() {
            plan.push(Box::new(|| Attempt::NeedsExtension("no in-field base fits".into())));
        }
    }
    plan.into_iter().map(|run| run())
}

/// Candidate bases `q ∉ {0, 1, −1}` with `q^i ≠ 1` for `i ≤ d`, in a fixed
/// order: all field elements for finite fields, small integers and their
/// inverses over Q.
fn small_bases(f: &Field, d: usize) -> Vec<Elem> {
    let pool: Vec<Elem> = if f.is_finite() {
        f.elements()
    } else {
        (2..=5)
            .flat_map(|n| [f.from_i64(n), f.from_ratio(1, n), f.from_i64(-n), f.from_ratio(-1, n)])
            .collect()
    };
    pool.into_iter()
        .filter(|q| !q.is_zero() && (1..=d as i64).all(|i| !q.pow(i).expect("q nonzero").is_one()))
        .filter(|q| !(q * q).is_one())
        .collect()
}

fn accept(
    p: &ParameterArray,
    emb: &Embedding,
    case: Case,
    base: Elem,
    fp: FamilyParams,
    intermediates: Intermediates,
) -> Attempt {
    match generate(&fp, p.field()) {
        Ok(regen) if regen == *p => Attempt::Found(Box::new(ClassifierWitness {
            case,
            params: fp,
            base,
            intermediates,
            embedding: emb.clone(),
        })),
        Ok(_) => Attempt::Failed(format!("case {case}: {} regeneration differs", fp.family)),
        Err(e) => Attempt::Failed(format!("case {case}: {}: {e}", fp.family)),
    }
}

fn params(
    family: Family,
    p: &ParameterArray,
    named: Vec<(&str, Elem)>,
) -> FamilyParams {
    let mut named = named;
    named.push(("theta0", p.theta()[0].clone()));
    named.push(("thetastar0", p.theta_star()[0].clone()));
    FamilyParams::new(family, p.d(), p.field(), &named).expect("complete parameter list")
}

/// Roots of `x^2 − sum·x + prod`, or a description of the missing extension.
fn split_pair(f: &Field, sum: &Elem, prod: &Elem) -> Result<(Elem, Elem), String> {
    let roots = f.quadratic_roots(&-sum.clone(), prod);
    match roots.as_slice() {
        [a, b] => Ok((a.clone(), b.clone())),
        _ => Err(format!("r1, r2 are roots of x^2 - ({sum})x + {prod}")),
    }
}

fn case_i(p: &ParameterArray, emb: &Embedding, q0: &Elem) -> Attempt {
    let mut last = Attempt::Failed(format!("case I: θ does not fit q = {q0}"));
    let qinv = q0.inv().expect("base nonzero");
    for q in [q0.clone(), qinv] {
        match case_i_with(p, emb, &q) {
            found @ Attempt::Found(_) => return found,
            other => last = other,
        }
    }
    last
}

fn case_i_with(p: &ParameterArray, emb: &Embedding, q: &Elem) -> Attempt {
    let f = p.field();
    let d = p.d() as i64;
    let one = f.one();
    let qp = |i: i64| q.pow(i).expect("q nonzero");
    let (Some(fit), Some(fit_s)) = (
        fit_closed_form_theta(p.theta(), q, Case::I),
        fit_closed_form_theta(p.theta_star(), q, Case::I),
    ) else {
        return Attempt::Failed(format!("case I: eigenvalues do not fit q = {q}"));
    };
    let phi1 = p.varphi_at(1).clone();
    let tau = &phi1 * ((q - &one) * (qp(d) - &one)).inv().expect("q^i != 1")
        + &fit.mu * &fit_s.mu
        + &fit.h * &fit_s.h * qp(-1 - d);
    // (1−q)(1−q^{−d}), the common factor of φ_1 in every q-family
    let c1 = (&one - q) * (&one - qp(-d));
    let nz = |x: &Elem| !x.is_zero();
    let (mu, h, mus, hs) = (&fit.mu, &fit.h, &fit_s.mu, &fit_s.h);
    let inter = Intermediates {
        theta_fit: Some(fit.clone()),
        theta_star_fit: Some(fit_s.clone()),
        tau: Some(tau.clone()),
    };
    let s_of = |mu: &Elem, h: &Elem| mu * (h * q).inv().expect("nonzero");
    // r from φ_1 = hh* q^{-1} c1 (1 − rq)
    let r_from_phi1 = || {
        let k = &phi1 * (h * hs * qp(-1) * &c1).inv().expect("nonzero");
        (&one - k) * q.inv().expect("q nonzero")
    };
    let fam_params = if nz(mu) && nz(mus) && nz(h) && nz(hs) {
        let s = s_of(mu, h);
        let ss = s_of(mus, hs);
        let prod = &s * &ss * qp(d + 1);
        let k = &phi1 * (h * hs * qp(-1) * &c1).inv().expect("nonzero");
        // 1 − (r1 + r2) q + r1 r2 q^2 = k
        let sum = (&one + &prod * q * q - k) * q.inv().expect("q nonzero");
        let (r1, r2) = match split_pair(f, &sum, &prod) {
            Ok(pair) => pair,
            Err(why) => return Attempt::NeedsExtension(format!("q-racah: {why}")),
        };
        params(
            Family::QRacah,
            p,
            vec![("q", q.clone()), ("h", h.clone()), ("hstar", hs.clone()), ("s", s), ("sstar", ss), ("r1", r1), ("r2", r2)],
        )
    } else if !nz(mu) && nz(mus) && nz(h) && nz(hs) {
        let ss = s_of(mus, hs);
        if nz(&tau) {
            params(
                Family::QHahn,
                p,
                vec![("q", q.clone()), ("h", h.clone()), ("hstar", hs.clone()), ("sstar", ss), ("r", r_from_phi1())],
            )
        } else {
            params(
                Family::QKrawtchouk,
                p,
                vec![("q", q.clone()), ("h", h.clone()), ("hstar", hs.clone()), ("sstar", ss)],
            )
        }
    } else if nz(mu) && !nz(mus) && nz(h) && nz(hs) {
        let s = s_of(mu, h);
        if nz(&tau) {
            params(
                Family::DualQHahn,
                p,
                vec![("q", q.clone()), ("h", h.clone()), ("hstar", hs.clone()), ("s", s), ("r", r_from_phi1())],
            )
        } else {
            params(
                Family::DualQKrawtchouk,
                p,
                vec![("q", q.clone()), ("h", h.clone()), ("hstar", hs.clone()), ("s", s)],
            )
        }
    } else if nz(mu) && !nz(mus) && !nz(h) && nz(hs) && nz(&tau) {
        // φ_1 = −r h* c1
        let r = -(&phi1 * (hs * &c1).inv().expect("nonzero"));
        params(
            Family::QuantumQKrawtchouk,
            p,
            vec![("q", q.clone()), ("hstar", hs.clone()), ("s", mu * q.inv().expect("q nonzero")), ("r", r)],
        )
    } else if !nz(mu) && !nz(mus) && nz(h) && nz(hs) && nz(&tau) {
        params(
            Family::AffineQKrawtchouk,
            p,
            vec![("q", q.clone()), ("h", h.clone()), ("hstar", hs.clone()), ("r", r_from_phi1())],
        )
    } else {
        return Attempt::Failed(format!("case I: no subcase for q = {q}"));
    };
    accept(p, emb, Case::I, q.clone(), fam_params, inter)
}

fn case_ii(p: &ParameterArray, emb: &Embedding) -> Attempt {
    let f = p.field();
    let one = f.one();
    let (Some(fit), Some(fit_s)) = (
        fit_closed_form_theta(p.theta(), &one, Case::II),
        fit_closed_form_theta(p.theta_star(), &one, Case::II),
    ) else {
        return Attempt::Failed("case II: eigenvalues are not quadratic in i".into());
    };
    let d = p.d() as i64;
    let dd = f.from_i64(d);
    let Ok(dinv) = dd.inv() else {
        return Attempt::Failed("case II: d vanishes in the field".into());
    };
    let phi1 = p.varphi_at(1).clone();
    let (mu, h, mus, hs) = (&fit.mu, &fit.h, &fit_s.mu, &fit_s.h);
    let tau = &phi1 * &dinv + mu * hs + h * mus + h * hs * f.from_i64(d + 2);
    let inter = Intermediates {
        theta_fit: Some(fit.clone()),
        theta_star_fit: Some(fit_s.clone()),
        tau: Some(tau),
    };
    let fp = match (h.is_zero(), hs.is_zero()) {
        (false, false) => {
            let s = mu * h.inv().expect("nonzero");
            let ss = mus * hs.inv().expect("nonzero");
            let sum = &s + &ss + f.from_i64(d + 1);
            // φ_1 = −d hh* (1 + r1)(1 + r2)
            let prod = -(&phi1 * (h * hs * &dd).inv().expect("nonzero")) - &one - &sum;
            let (r1, r2) = match split_pair(f, &sum, &prod) {
                Ok(pair) => pair,
                Err(why) => return Attempt::NeedsExtension(format!("racah: {why}")),
            };
            params(
                Family::Racah,
                p,
                vec![("h", h.clone()), ("hstar", hs.clone()), ("s", s), ("sstar", ss), ("r1", r1), ("r2", r2)],
            )
        }
        (true, false) => {
            let ss = mus * hs.inv().expect("nonzero");
            // φ_1 = −d h* s (1 + r)
            let r = -(&phi1 * (hs * mu * &dd).inv().expect("θ_1 != θ_0")) - &one;
            params(
                Family::Hahn,
                p,
                vec![("hstar", hs.clone()), ("s", mu.clone()), ("sstar", ss), ("r", r)],
            )
        }
        (false, true) => {
            let s = mu * h.inv().expect("nonzero");
            let r = -(&phi1 * (h * mus * &dd).inv().expect("θ*_1 != θ*_0")) - &one;
            params(
                Family::DualHahn,
                p,
                vec![("h", h.clone()), ("s", s), ("sstar", mus.clone()), ("r", r)],
            )
        }
        (true, true) => params(
            Family::Krawtchouk,
            p,
            vec![("r", -(&phi1 * &dinv)), ("s", mu.clone()), ("sstar", mus.clone())],
        ),
    };
    accept(p, emb, Case::II, one, fp, inter)
}

fn case_iii(p: &ParameterArray, emb: &Embedding) -> Attempt {
    let f = p.field();
    let one = f.one();
    let minus_one = -one.clone();
    let (Some(fit), Some(fit_s)) = (
        fit_closed_form_theta(p.theta(), &minus_one, Case::III),
        fit_closed_form_theta(p.theta_star(), &minus_one, Case::III),
    ) else {
        return Attempt::Failed("case III: eigenvalues do not alternate".into());
    };
    let (h, hs) = (&fit.h, &fit_s.h);
    if h.is_zero() || hs.is_zero() {
        return Attempt::Failed("case III: h or h* vanishes".into());
    }
    let d = p.d() as i64;
    let s = &one - &fit.mu * h.inv().expect("nonzero");
    let ss = &one - &fit_s.mu * hs.inv().expect("nonzero");
    let sum = -s.clone() - &ss + f.from_i64(d + 1);
    let phi1 = p.varphi_at(1).clone();
    let hh4 = f.from_i64(4) * h * hs;
    let (r1, r2) = if d % 2 == 1 {
        // 4hh*(1 + r1)(1 + r2) = −φ_1
        let prod = -(&phi1 * hh4.inv().expect("nonzero")) - &one - &sum;
        match split_pair(f, &sum, &prod) {
            Ok(pair) => pair,
            Err(why) => return Attempt::NeedsExtension(format!("bannai-ito: {why}")),
        }
    } else {
        let r2 = -one.clone() + &phi1 * (&hh4 * f.from_i64(d)).inv().expect("nonzero");
        (&sum - &r2, r2)
    };
    let inter = Intermediates {
        theta_fit: Some(fit.clone()),
        theta_star_fit: Some(fit_s.clone()),
        tau: None,
    };
    let fp = params(
        Family::BannaiIto,
        p,
        vec![("h", h.clone()), ("hstar", hs.clone()), ("s", s), ("sstar", ss), ("r1", r1), ("r2", r2)],
    );
    accept(p, emb, Case::III, minus_one, fp, inter)
}

fn case_iv(p: &ParameterArray, emb: &Embedding) -> Attempt {
    if p.d() != 3 {
        return Attempt::Failed(format!("case IV: d = {} but orphan arrays have d = 3", p.d()));
    }
    let hs_of = |t: &[Elem]| -> Option<(Elem, Elem)> {
        let h = &t[0] + &t[2];
        let s = (&t[0] + &t[3]) * h.inv().ok()?;
        Some((h, s))
    };
    let (Some((h, s)), Some((hs, ss))) = (hs_of(p.theta()), hs_of(p.theta_star())) else {
        return Attempt::Failed("case IV: θ_0 = θ_2".into());
    };
    let Ok(hh_inv) = (&h * &hs).inv() else {
        return Attempt::Failed("case IV: h h* = 0".into());
    };
    let r = p.varphi_at(1) * &hh_inv;
    let fp = params(
        Family::Orphan,
        p,
        vec![("h", h), ("hstar", hs), ("s", s), ("sstar", ss), ("r", r)],
    );
    let one = p.field().one();
    accept(p, emb, Case::IV, one, fp, Intermediates::default())
}
