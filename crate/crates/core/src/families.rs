//! The thirteen parameter-array families, their admissibility conditions,
//! closed-form evaluation tables and random admissible parameter draws.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::CheckReport;
use crate::field::{Elem, Field};
use crate::hypergeom::{hypergeom_sum, HypergeomSpec};
use crate::parray::ParameterArray;
use crate::polys::corresponding_polys;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{family} needs {needs}, field has characteristic {characteristic} (d = {d})")]
    CharacteristicMismatch {
        family: Family,
        needs: &'static str,
        characteristic: u64,
        d: usize,
    },
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("unknown parameter `{0}` for {1}")]
    UnknownParam(String, Family),
    #[error("parameter `{0}` is not an element of {1}")]
    FieldMismatch(&'static str, String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    QRacah,
    QHahn,
    DualQHahn,
    QuantumQKrawtchouk,
    QKrawtchouk,
    AffineQKrawtchouk,
    DualQKrawtchouk,
    Racah,
    Hahn,
    DualHahn,
    Krawtchouk,
    BannaiIto,
    Orphan,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::QRacah,
        Family::QHahn,
        Family::DualQHahn,
        Family::QuantumQKrawtchouk,
        Family::QKrawtchouk,
        Family::AffineQKrawtchouk,
        Family::DualQKrawtchouk,
        Family::Racah,
        Family::Hahn,
        Family::DualHahn,
        Family::Krawtchouk,
        Family::BannaiIto,
        Family::Orphan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::QRacah => "q-racah",
            Family::QHahn => "q-hahn",
            Family::DualQHahn => "dual-q-hahn",
            Family::QuantumQKrawtchouk => "quantum-q-krawtchouk",
            Family::QKrawtchouk => "q-krawtchouk",
            Family::AffineQKrawtchouk => "affine-q-krawtchouk",
            Family::DualQKrawtchouk => "dual-q-krawtchouk",
            Family::Racah => "racah",
            Family::Hahn => "hahn",
            Family::DualHahn => "dual-hahn",
            Family::Krawtchouk => "krawtchouk",
            Family::BannaiIto => "bannai-ito",
            Family::Orphan => "orphan",
        }
    }

    /// Family-specific parameter names (θ_0, θ*_0 are common to all).
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::QRacah => &["q", "h", "hstar", "s", "sstar", "r1", "r2"],
            Family::QHahn => &["q", "h", "hstar", "sstar", "r"],
            Family::DualQHahn => &["q", "h", "hstar", "s", "r"],
            Family::QuantumQKrawtchouk => &["q", "hstar", "r", "s"],
            Family::QKrawtchouk => &["q", "h", "hstar", "sstar"],
            Family::AffineQKrawtchouk => &["q", "h", "hstar", "r"],
            Family::DualQKrawtchouk => &["q", "h", "hstar", "s"],
            Family::Racah => &["h", "hstar", "s", "sstar", "r1", "r2"],
            Family::Hahn => &["hstar", "s", "sstar", "r"],
            Family::DualHahn => &["h", "s", "sstar", "r"],
            Family::Krawtchouk => &["r", "s", "sstar"],
            Family::BannaiIto => &["h", "hstar", "s", "sstar", "r1", "r2"],
            Family::Orphan => &["h", "hstar", "s", "sstar", "r"],
        }
    }

    pub fn is_q_family(self) -> bool {
        (self as usize) < 7
    }

    /// Families with a hypergeometric evaluation table.
    pub fn has_closed_form(self) -> bool {
        !matches!(self, Family::BannaiIto | Family::Orphan)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = FamilyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| FamilyError::UnknownFamily(s.to_string()))
    }
}

/// A family tag, diameter, θ_0, θ*_0 and the named family parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyParams {
    pub family: Family,
    pub d: usize,
    pub theta0: Elem,
    pub theta_star0: Elem,
    params: BTreeMap<&'static str, Elem>,
}

impl FamilyParams {
    /// Builds from `name → value`. `theta0`/`thetastar0` default to zero.
    /// For q-Racah, Racah and Bannai/Ito a missing `r2` is solved from the
    /// family's constraint on (r1, r2).
    pub fn from_named(
        family: Family,
        d: usize,
        field: &Field,
        named: &BTreeMap<String, Elem>,
    ) -> Result<Self, FamilyError> {
        let mut params = BTreeMap::new();
        let mut theta0 = field.zero();
        let mut theta_star0 = field.zero();
        for (k, v) in named {
            if v.field() != field {
                let key = ["theta0", "thetastar0"]
                    .into_iter()
                    .chain(family.param_names().iter().copied())
                    .find(|n| n == k)
                    .unwrap_or("parameter");
                return Err(FamilyError::FieldMismatch(key, field.to_string()));
            }
            match k.as_str() {
                "theta0" => theta0 = v.clone(),
                "thetastar0" => theta_star0 = v.clone(),
                other => {
                    let name = family
                        .param_names()
                        .iter()
                        .copied()
                        .find(|n| *n == other)
                        .ok_or_else(|| FamilyError::UnknownParam(other.to_string(), family))?;
                    params.insert(name, v.clone());
                }
            }
        }
        if !params.contains_key("r2") && params.contains_key("r1") {
            if let Some(r2) = solve_r2(family, d, field, &params) {
                params.insert("r2", r2);
            }
        }
        for name in family.param_names() {
            if !params.contains_key(name) {
                return Err(FamilyError::MissingParam(name));
            }
        }
        Ok(FamilyParams {
            family,
            d,
            theta0,
            theta_star0,
            params,
        })
    }

    /// Convenience constructor from `(name, value)` pairs.
    pub fn new(
        family: Family,
        d: usize,
        field: &Field,
        named: &[(&str, Elem)],
    ) -> Result<Self, FamilyError> {
        let map = named.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        Self::from_named(family, d, field, &map)
    }

    pub fn get(&self, name: &str) -> &Elem {
        &self.params[name]
    }

    pub fn field(&self) -> &Field {
        self.theta0.field()
    }

    /// All parameters including θ_0 and θ*_0, in a fixed order.
    pub fn named(&self) -> Vec<(&'static str, Elem)> {
        let mut out: Vec<(&'static str, Elem)> = self
            .family
            .param_names()
            .iter()
            .map(|n| (*n, self.params[n].clone()))
            .collect();
        out.push(("theta0", self.theta0.clone()));
        out.push(("thetastar0", self.theta_star0.clone()));
        out
    }

    /// The declared base: q, 1 or −1.
    pub fn base(&self) -> Elem {
        let f = self.field();
        match self.family {
            _ if self.family.is_q_family() => self.get("q").clone(),
            Family::BannaiIto => -f.one(),
            _ => f.one(),
        }
    }
}

fn solve_r2(
    family: Family,
    d: usize,
    field: &Field,
    p: &BTreeMap<&'static str, Elem>,
) -> Option<Elem> {
    let g = |n: &str| p.get(n).cloned();
    let dd = field.from_i64(d as i64);
    match family {
        Family::QRacah => {
            let q = g("q")?;
            let num = g("s")? * g("sstar")? * q.pow(d as i64 + 1).ok()?;
            Some(num * g("r1")?.inv().ok()?)
        }
        Family::Racah => Some(g("s")? + g("sstar")? + dd + field.one() - g("r1")?),
        Family::BannaiIto => Some(-g("s")? - g("sstar")? + dd + field.one() - g("r1")?),
        _ => None,
    }
}

struct Pre<'a> {
    field: &'a Field,
}

impl Pre<'_> {
    fn nonzero(&self, name: &str, x: &Elem) -> Result<(), FamilyError> {
        if x.is_zero() {
            return Err(FamilyError::PreconditionViolated(format!("{name} must be nonzero")));
        }
        Ok(())
    }

    fn ne(&self, what: impl FnOnce() -> String, x: &Elem, y: &Elem) -> Result<(), FamilyError> {
        if x == y {
            return Err(FamilyError::PreconditionViolated(what()));
        }
        Ok(())
    }

    fn ne_one(&self, what: impl FnOnce() -> String, x: &Elem) -> Result<(), FamilyError> {
        self.ne(what, x, &self.field.one())
    }

    fn int(&self, i: i64) -> Elem {
        self.field.from_i64(i)
    }
}

fn char_gate(fp: &FamilyParams) -> Result<(), FamilyError> {
    let p = fp.field().characteristic();
    let d = fp.d;
    let fail = |needs| {
        Err(FamilyError::CharacteristicMismatch {
            family: fp.family,
            needs,
            characteristic: p,
            d,
        })
    };
    match fp.family {
        Family::Racah | Family::Hahn | Family::DualHahn | Family::Krawtchouk => {
            if p != 0 && p as u128 <= d as u128 {
                return fail("characteristic 0 or a prime greater than d");
            }
        }
        Family::BannaiIto => {
            if p != 0 && (p == 2 || 2 * p as u128 <= d as u128) {
                return fail("characteristic 0 or an odd prime greater than d/2");
            }
        }
        Family::Orphan => {
            if p != 2 {
                return fail("characteristic 2");
            }
            if d != 3 {
                return Err(FamilyError::PreconditionViolated("orphan arrays have d = 3".into()));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Checks every admissibility condition of the family.
pub fn check_preconditions(fp: &FamilyParams) -> Result<(), FamilyError> {
    char_gate(fp)?;
    let f = fp.field();
    let pre = Pre { field: f };
    let d = fp.d as i64;
    let g = |n: &str| fp.get(n).clone();
    for (name, v) in fp.named() {
        if v.field() != f {
            return Err(FamilyError::FieldMismatch(name, f.to_string()));
        }
    }
    let must_nonzero: &[&str] = match fp.family {
        Family::QRacah => &["q", "h", "hstar", "s", "sstar", "r1", "r2"],
        Family::QHahn => &["q", "h", "hstar", "sstar", "r"],
        Family::DualQHahn => &["q", "h", "hstar", "s", "r"],
        Family::QuantumQKrawtchouk => &["q", "hstar", "r", "s"],
        Family::QKrawtchouk => &["q", "h", "hstar", "sstar"],
        Family::AffineQKrawtchouk => &["q", "h", "hstar", "r"],
        Family::DualQKrawtchouk => &["q", "h", "hstar", "s"],
        Family::Racah => &["h", "hstar"],
        Family::Hahn => &["hstar", "s"],
        Family::DualHahn => &["h", "sstar"],
        Family::Krawtchouk => &["r", "s", "sstar"],
        Family::BannaiIto => &["h", "hstar"],
        Family::Orphan => &["h", "hstar", "s", "sstar", "r"],
    };
    for n in must_nonzero {
        pre.nonzero(n, fp.get(n))?;
    }

    if fp.family.is_q_family() {
        let q = g("q");
        let qp = |i: i64| q.pow(i).expect("q nonzero");
        for i in 1..=d {
            pre.ne_one(|| format!("q^{i} = 1"), &qp(i))?;
        }
        let inv = |n: &str| fp.get(n).inv().expect("checked nonzero");
        match fp.family {
            Family::QRacah => {
                let want = g("s") * g("sstar") * qp(d + 1);
                if g("r1") * g("r2") != want {
                    return Err(FamilyError::PreconditionViolated(
                        "r1 r2 must equal s s* q^(d+1)".into(),
                    ));
                }
                for i in 1..=d {
                    pre.ne_one(|| format!("r1 q^{i} = 1"), &(g("r1") * qp(i)))?;
                    pre.ne_one(|| format!("r2 q^{i} = 1"), &(g("r2") * qp(i)))?;
                    pre.ne_one(|| format!("s* q^{i}/r1 = 1"), &(g("sstar") * qp(i) * inv("r1")))?;
                    pre.ne_one(|| format!("s* q^{i}/r2 = 1"), &(g("sstar") * qp(i) * inv("r2")))?;
                }
                for i in 2..=2 * d {
                    pre.ne_one(|| format!("s q^{i} = 1"), &(g("s") * qp(i)))?;
                    pre.ne_one(|| format!("s* q^{i} = 1"), &(g("sstar") * qp(i)))?;
                }
            }
            Family::QHahn => {
                for i in 1..=d {
                    pre.ne_one(|| format!("r q^{i} = 1"), &(g("r") * qp(i)))?;
                    pre.ne_one(|| format!("s* q^{i}/r = 1"), &(g("sstar") * qp(i) * inv("r")))?;
                }
                for i in 2..=2 * d {
                    pre.ne_one(|| format!("s* q^{i} = 1"), &(g("sstar") * qp(i)))?;
                }
            }
            Family::DualQHahn => {
                for i in 1..=d {
                    pre.ne_one(|| format!("r q^{i} = 1"), &(g("r") * qp(i)))?;
                    pre.ne_one(|| format!("s q^{i}/r = 1"), &(g("s") * qp(i) * inv("r")))?;
                }
                for i in 2..=2 * d {
                    pre.ne_one(|| format!("s q^{i} = 1"), &(g("s") * qp(i)))?;
                }
            }
            Family::QuantumQKrawtchouk => {
                for i in 1..=d {
                    pre.ne_one(|| format!("s q^{i}/r = 1"), &(g("s") * qp(i) * inv("r")))?;
                }
            }
            Family::QKrawtchouk => {
                for i in 2..=2 * d {
                    pre.ne_one(|| format!("s* q^{i} = 1"), &(g("sstar") * qp(i)))?;
                }
            }
            Family::AffineQKrawtchouk => {
                for i in 1..=d {
                    pre.ne_one(|| format!("r q^{i} = 1"), &(g("r") * qp(i)))?;
                }
            }
            Family::DualQKrawtchouk => {
                for i in 2..=2 * d {
                    pre.ne_one(|| format!("s q^{i} = 1"), &(g("s") * qp(i)))?;
                }
            }
            _ => unreachable!(),
        }
        return Ok(());
    }

    let neg = |i: i64| pre.int(-i);
    match fp.family {
        Family::Racah => {
            let want = g("s") + g("sstar") + pre.int(d + 1);
            if g("r1") + g("r2") != want {
                return Err(FamilyError::PreconditionViolated(
                    "r1 + r2 must equal s + s* + d + 1".into(),
                ));
            }
            for i in 1..=d {
                for (label, x) in [
                    ("r1", g("r1")),
                    ("r2", g("r2")),
                    ("s* - r1", g("sstar") - g("r1")),
                    ("s* - r2", g("sstar") - g("r2")),
                ] {
                    pre.ne(|| format!("{label} = -{i}"), &x, &neg(i))?;
                }
            }
            for i in 2..=2 * d {
                pre.ne(|| format!("s = -{i}"), &g("s"), &neg(i))?;
                pre.ne(|| format!("s* = -{i}"), &g("sstar"), &neg(i))?;
            }
        }
        Family::Hahn => {
            for i in 1..=d {
                pre.ne(|| format!("r = -{i}"), &g("r"), &neg(i))?;
                pre.ne(|| format!("s* - r = -{i}"), &(g("sstar") - g("r")), &neg(i))?;
            }
            for i in 2..=2 * d {
                pre.ne(|| format!("s* = -{i}"), &g("sstar"), &neg(i))?;
            }
        }
        Family::DualHahn => {
            for i in 1..=d {
                pre.ne(|| format!("r = -{i}"), &g("r"), &neg(i))?;
                pre.ne(|| format!("s - r = -{i}"), &(g("s") - g("r")), &neg(i))?;
            }
            for i in 2..=2 * d {
                pre.ne(|| format!("s = -{i}"), &g("s"), &neg(i))?;
            }
        }
        Family::Krawtchouk => {
            pre.ne(|| "r = s s*".into(), &g("r"), &(g("s") * g("sstar")))?;
        }
        Family::BannaiIto => {
            let want = -g("s") - g("sstar") + pre.int(d + 1);
            if g("r1") + g("r2") != want {
                return Err(FamilyError::PreconditionViolated(
                    "r1 + r2 must equal -s - s* + d + 1".into(),
                ));
            }
            for i in 1..=d {
                if (d - i) % 2 == 0 {
                    pre.ne(|| format!("r1 = -{i}"), &g("r1"), &neg(i))?;
                    pre.ne(|| format!("-s* - r1 = -{i}"), &(-g("sstar") - g("r1")), &neg(i))?;
                }
                if i % 2 == 1 {
                    pre.ne(|| format!("r2 = -{i}"), &g("r2"), &neg(i))?;
                    pre.ne(|| format!("-s* - r2 = -{i}"), &(-g("sstar") - g("r2")), &neg(i))?;
                }
                pre.ne(|| format!("s = {}", 2 * i), &g("s"), &pre.int(2 * i))?;
                pre.ne(|| format!("s* = {}", 2 * i), &g("sstar"), &pre.int(2 * i))?;
            }
        }
        Family::Orphan => {
            let (s, ss, r) = (g("s"), g("sstar"), g("r"));
            pre.ne_one(|| "s = 1".into(), &s)?;
            pre.ne_one(|| "s* = 1".into(), &ss)?;
            let one = f.one();
            pre.ne(|| "r = s + s*".into(), &r, &(&s + &ss))?;
            pre.ne(|| "r = s(1 + s*)".into(), &r, &(&s * (&one + &ss)))?;
            pre.ne(|| "r = s*(1 + s)".into(), &r, &(&ss * (&one + &s)))?;
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// Builds the parameter array from the family's explicit formulas after
/// checking every admissibility condition.
pub fn generate(fp: &FamilyParams, field: &Field) -> Result<ParameterArray, FamilyError> {
    if fp.field() != field {
        return Err(FamilyError::FieldMismatch("theta0", field.to_string()));
    }
    check_preconditions(fp)?;
    Ok(generate_unchecked(fp))
}

/// Evaluates the family formulas without checking admissibility. Panics if a
/// required inverse does not exist.
pub fn generate_unchecked(fp: &FamilyParams) -> ParameterArray {
    let f = fp.field();
    let d = fp.d as i64;
    let one = f.one();
    let int = |i: i64| f.from_i64(i);
    let g = |n: &str| fp.get(n).clone();
    let (t0, ts0) = (&fp.theta0, &fp.theta_star0);

    let (theta, theta_star, varphi, phi): (Vec<Elem>, Vec<Elem>, Vec<Elem>, Vec<Elem>) =
        if fp.family.is_q_family() {
            let q = g("q");
            let qp = |i: i64| q.pow(i).expect("q nonzero");
            // h(1−q^i)(1−s q^{i+1})q^{−i} and h(1−q^i)q^{−i}
            let racah_like = |h: &Elem, s: &Elem, i: i64| {
                h * (&one - qp(i)) * (&one - s * qp(i + 1)) * qp(-i)
            };
            let hahn_like = |h: &Elem, i: i64| h * (&one - qp(i)) * qp(-i);
            let common = |i: i64| (&one - qp(i)) * (&one - qp(i - d - 1));
            let fam = fp.family;
            let theta = (0..=d)
                .map(|i| {
                    t0 + match fam {
                        Family::QRacah | Family::DualQHahn | Family::DualQKrawtchouk => {
                            racah_like(&g("h"), &g("s"), i)
                        }
                        Family::QuantumQKrawtchouk => -(g("s") * &q * (&one - qp(i))),
                        _ => hahn_like(&g("h"), i),
                    }
                })
                .collect();
            let theta_star = (0..=d)
                .map(|i| {
                    ts0 + match fam {
                        Family::QRacah | Family::QHahn | Family::QKrawtchouk => {
                            racah_like(&g("hstar"), &g("sstar"), i)
                        }
                        _ => hahn_like(&g("hstar"), i),
                    }
                })
                .collect();
            let hh = |i: i64| {
                let scale = if fam == Family::QuantumQKrawtchouk {
                    g("hstar")
                } else {
                    g("h") * g("hstar")
                };
                scale * common(i)
            };
            let varphi = (1..=d)
                .map(|i| match fam {
                    Family::QRacah => {
                        hh(i) * qp(1 - 2 * i) * (&one - g("r1") * qp(i)) * (&one - g("r2") * qp(i))
                    }
                    Family::QHahn | Family::DualQHahn | Family::AffineQKrawtchouk => {
                        hh(i) * qp(1 - 2 * i) * (&one - g("r") * qp(i))
                    }
                    Family::QuantumQKrawtchouk => -(g("r") * hh(i) * qp(1 - i)),
                    Family::QKrawtchouk | Family::DualQKrawtchouk => hh(i) * qp(1 - 2 * i),
                    _ => unreachable!(),
                })
                .collect();
            let phi = (1..=d)
                .map(|i| match fam {
                    Family::QRacah => {
                        hh(i) * qp(1 - 2 * i)
                            * (g("r1") - g("sstar") * qp(i))
                            * (g("r2") - g("sstar") * qp(i))
                            * g("sstar").inv().expect("s* nonzero")
                    }
                    Family::QHahn => -(hh(i) * qp(1 - i) * (g("r") - g("sstar") * qp(i))),
                    Family::DualQHahn | Family::QuantumQKrawtchouk => {
                        hh(i) * qp(d + 2 - 2 * i) * (g("s") - g("r") * qp(i - d - 1))
                    }
                    Family::QKrawtchouk => hh(i) * g("sstar") * &q,
                    Family::AffineQKrawtchouk => -(hh(i) * g("r") * qp(1 - i)),
                    Family::DualQKrawtchouk => hh(i) * g("s") * qp(d + 2 - 2 * i),
                    _ => unreachable!(),
                })
                .collect();
            (theta, theta_star, varphi, phi)
        } else {
            match fp.family {
                Family::Racah | Family::Hahn | Family::DualHahn | Family::Krawtchouk => {
                    let quad = |h: &Elem, s: &Elem, i: i64| h * int(i) * (int(i + 1) + s);
                    let fam = fp.family;
                    let theta = (0..=d)
                        .map(|i| {
                            t0 + match fam {
                                Family::Racah | Family::DualHahn => quad(&g("h"), &g("s"), i),
                                _ => g("s") * int(i),
                            }
                        })
                        .collect();
                    let theta_star = (0..=d)
                        .map(|i| {
                            ts0 + match fam {
                                Family::Racah | Family::Hahn => quad(&g("hstar"), &g("sstar"), i),
                                _ => g("sstar") * int(i),
                            }
                        })
                        .collect();
                    let ii = |i: i64| int(i) * int(i - d - 1);
                    let varphi = (1..=d)
                        .map(|i| match fam {
                            Family::Racah => {
                                g("h") * g("hstar") * ii(i) * (int(i) + g("r1")) * (int(i) + g("r2"))
                            }
                            Family::Hahn => g("hstar") * g("s") * ii(i) * (int(i) + g("r")),
                            Family::DualHahn => g("h") * g("sstar") * ii(i) * (int(i) + g("r")),
                            _ => g("r") * ii(i),
                        })
                        .collect();
                    let phi = (1..=d)
                        .map(|i| match fam {
                            Family::Racah => {
                                g("h") * g("hstar")
                                    * ii(i)
                                    * (int(i) + g("sstar") - g("r1"))
                                    * (int(i) + g("sstar") - g("r2"))
                            }
                            Family::Hahn => {
                                -(g("hstar") * g("s") * ii(i) * (int(i) + g("sstar") - g("r")))
                            }
                            Family::DualHahn => {
                                g("h") * g("sstar") * ii(i) * (int(i) + g("r") - g("s") - int(d + 1))
                            }
                            _ => (g("r") - g("s") * g("sstar")) * ii(i),
                        })
                        .collect();
                    (theta, theta_star, varphi, phi)
                }
                Family::BannaiIto => {
                    let alt = |h: &Elem, s: &Elem, i: i64| {
                        let sign = if i % 2 == 0 { one.clone() } else { -one.clone() };
                        h * (s - &one + (&one - s + int(2 * i)) * sign)
                    };
                    let theta = (0..=d).map(|i| t0 + alt(&g("h"), &g("s"), i)).collect();
                    let theta_star = (0..=d).map(|i| ts0 + alt(&g("hstar"), &g("sstar"), i)).collect();
                    let hh4 = int(4) * g("h") * g("hstar");
                    let (r1, r2, ss) = (g("r1"), g("r2"), g("sstar"));
                    let varphi = (1..=d)
                        .map(|i| {
                            let x = match (i % 2 == 0, d % 2 == 0) {
                                (true, true) => int(i) * (int(i) + &r1),
                                (false, true) => int(i - d - 1) * (int(i) + &r2),
                                (true, false) => int(i) * int(i - d - 1),
                                (false, false) => (int(i) + &r1) * (int(i) + &r2),
                            };
                            -(&hh4 * x)
                        })
                        .collect();
                    let phi = (1..=d)
                        .map(|i| match (i % 2 == 0, d % 2 == 0) {
                            (true, true) => &hh4 * int(i) * (int(i) - &ss - &r1),
                            (false, true) => &hh4 * int(i - d - 1) * (int(i) - &ss - &r2),
                            (true, false) => -(&hh4 * int(i) * int(i - d - 1)),
                            (false, false) => -(&hh4 * (int(i) - &ss - &r1) * (int(i) - &ss - &r2)),
                        })
                        .collect();
                    (theta, theta_star, varphi, phi)
                }
                Family::Orphan => {
                    let gamma = [0, 1, 1, 0];
                    let (h, hs, s, ss, r) = (g("h"), g("hstar"), g("s"), g("sstar"), g("r"));
                    let theta = (0..=d)
                        .map(|i| t0 + &h * (&s * int(i) + int(gamma[i as usize])))
                        .collect();
                    let theta_star = (0..=d)
                        .map(|i| ts0 + &hs * (&ss * int(i) + int(gamma[i as usize])))
                        .collect();
                    let hh = &h * &hs;
                    let varphi = vec![&hh * &r, hh.clone(), &hh * (&r + &s + &ss)];
                    let phi = vec![
                        &hh * (&r + &s * (&one + &ss)),
                        hh.clone(),
                        &hh * (&r + &ss * (&one + &s)),
                    ];
                    (theta, theta_star, varphi, phi)
                }
                _ => unreachable!(),
            }
        };
    ParameterArray::new(f, theta, theta_star, varphi, phi).expect("lengths match by construction")
}

/// The hypergeometric series giving `f_i(θ_j)`, for families that have one.
pub fn closed_form_spec(fp: &FamilyParams, i: usize, j: usize) -> Option<HypergeomSpec> {
    let f = fp.field();
    let g = |n: &str| fp.get(n).clone();
    let (i, j, d) = (i as i64, j as i64, fp.d as i64);
    let int = |x: i64| f.from_i64(x);
    if fp.family.is_q_family() {
        let q = g("q");
        let qp = |n: i64| q.pow(n).expect("q nonzero");
        let (num, den, z) = match fp.family {
            Family::QRacah => (
                vec![qp(-i), g("sstar") * qp(i + 1), qp(-j), g("s") * qp(j + 1)],
                vec![g("r1") * &q, g("r2") * &q, qp(-d)],
                q.clone(),
            ),
            Family::QHahn => (
                vec![qp(-i), g("sstar") * qp(i + 1), qp(-j)],
                vec![g("r") * &q, qp(-d)],
                q.clone(),
            ),
            Family::DualQHahn => (
                vec![qp(-i), qp(-j), g("s") * qp(j + 1)],
                vec![g("r") * &q, qp(-d)],
                q.clone(),
            ),
            Family::QuantumQKrawtchouk => (
                vec![qp(-i), qp(-j)],
                vec![qp(-d)],
                g("s") * g("r").inv().ok()? * qp(j + 1),
            ),
            Family::QKrawtchouk => (
                vec![qp(-i), g("sstar") * qp(i + 1), qp(-j)],
                vec![f.zero(), qp(-d)],
                q.clone(),
            ),
            Family::AffineQKrawtchouk => (
                vec![qp(-i), f.zero(), qp(-j)],
                vec![g("r") * &q, qp(-d)],
                q.clone(),
            ),
            Family::DualQKrawtchouk => (
                vec![qp(-i), qp(-j), g("s") * qp(j + 1)],
                vec![f.zero(), qp(-d)],
                q.clone(),
            ),
            _ => unreachable!(),
        };
        return Some(HypergeomSpec::basic(num, den, q, z));
    }
    let one = f.one();
    let (num, den, z) = match fp.family {
        Family::Racah => (
            vec![int(-i), int(i + 1) + g("sstar"), int(-j), int(j + 1) + g("s")],
            vec![g("r1") + &one, g("r2") + &one, int(-d)],
            one.clone(),
        ),
        Family::Hahn => (
            vec![int(-i), int(i + 1) + g("sstar"), int(-j)],
            vec![g("r") + &one, int(-d)],
            one.clone(),
        ),
        Family::DualHahn => (
            vec![int(-i), int(-j), int(j + 1) + g("s")],
            vec![g("r") + &one, int(-d)],
            one.clone(),
        ),
        Family::Krawtchouk => (
            vec![int(-i), int(-j)],
            vec![int(-d)],
            g("s") * g("sstar") * g("r").inv().ok()?,
        ),
        _ => return None,
    };
    Some(HypergeomSpec::ordinary(num, den, z))
}

/// Compares `f_i(θ_j)` with the family's hypergeometric evaluation for all
/// `0 <= i, j <= d`.
pub fn verify_closed_form(p: &ParameterArray, fp: &FamilyParams) -> CheckReport {
    let mut r = CheckReport::new("closed-form");
    if !fp.family.has_closed_form() {
        r.fail(vec![], format!("{} has no hypergeometric evaluation", fp.family));
        return r;
    }
    let table = match corresponding_polys(p) {
        Ok(t) => t,
        Err(e) => {
            r.fail(vec![], format!("undefined: {e}"));
            return r;
        }
    };
    for i in 0..=p.d() {
        for j in 0..=p.d() {
            let spec = closed_form_spec(fp, i, j).expect("closed form exists");
            match hypergeom_sum(&spec, fp.d) {
                Ok(v) => {
                    let got = table.f[i].eval(&p.theta()[j]);
                    r.expect(got == v, vec![i, j], || {
                        format!("f_{i}(θ_{j}) = {got} but the series gives {v}")
                    });
                }
                Err(e) => r.fail(vec![i, j], e.to_string()),
            }
        }
    }
    r
}

/// Draws admissible parameters uniformly at random (retrying on violations).
/// Returns `None` if the family cannot live over this field at this
/// diameter, or no admissible draw was found within the attempt budget.
pub fn sample_params<R: Rng + ?Sized>(
    family: Family,
    field: &Field,
    d: usize,
    rng: &mut R,
) -> Option<FamilyParams> {
    const ATTEMPTS: usize = 400;
    for _ in 0..ATTEMPTS {
        let mut named: BTreeMap<String, Elem> = BTreeMap::new();
        for name in family.param_names() {
            if *name == "r2" {
                continue;
            }
            named.insert(name.to_string(), field.sample_nonzero(rng));
        }
        named.insert("theta0".into(), field.sample(rng));
        named.insert("thetastar0".into(), field.sample(rng));
        let fp = match FamilyParams::from_named(family, d, field, &named) {
            Ok(fp) => fp,
            Err(_) => continue,
        };
        match check_preconditions(&fp) {
            Ok(()) => return Some(fp),
            Err(FamilyError::CharacteristicMismatch { .. }) => return None,
            Err(_) => continue,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parray::{beta_plus_one, validate};
    use rand::SeedableRng;

    fn kraw2() -> FamilyParams {
        let f = Field::rational();
        FamilyParams::new(
            Family::Krawtchouk,
            2,
            &f,
            &[("s", f.one()), ("sstar", f.one()), ("r", f.from_i64(2))],
        )
        .unwrap()
    }

    #[test]
    fn krawtchouk_fixture() {
        let f = Field::rational();
        let p = generate(&kraw2(), &f).unwrap();
        let want = ParameterArray::from_ints(&f, &[0, 1, 2], &[0, 1, 2], &[-4, -4], &[-2, -2]).unwrap();
        assert_eq!(p, want);
        assert!(verify_closed_form(&p, &kraw2()).ok());
    }

    #[test]
    fn orphan_fixture() {
        let f = Field::gf4();
        let w = f.parse("w").unwrap();
        let fp = FamilyParams::new(
            Family::Orphan,
            3,
            &f,
            &[("h", f.one()), ("hstar", f.one()), ("s", w.clone()), ("sstar", w.clone()), ("r", w.clone())],
        )
        .unwrap();
        let p = generate(&fp, &f).unwrap();
        let e = |s: &str| f.parse(s).unwrap();
        assert_eq!(p.theta(), &[e("0"), e("1+w"), e("1"), e("w")]);
        assert_eq!(p.varphi(), &[e("w"), e("1"), e("w")]);
        assert_eq!(p.phi(), &[e("1+w"), e("1"), e("1+w")]);
        assert!(validate(&p).ok());
        assert_eq!(beta_plus_one(&p), Some(f.one()));
    }

    #[test]
    fn racah_needs_large_characteristic() {
        let f = Field::prime(5).unwrap();
        let fp = FamilyParams::new(
            Family::Racah,
            5,
            &f,
            &[("h", f.one()), ("hstar", f.one()), ("s", f.one()), ("sstar", f.one()), ("r1", f.one())],
        )
        .unwrap();
        assert!(matches!(generate(&fp, &f), Err(FamilyError::CharacteristicMismatch { .. })));
    }

    #[test]
    fn q_racah_base_and_constraint() {
        let f = Field::rational();
        let fp = FamilyParams::new(
            Family::QRacah,
            3,
            &f,
            &[
                ("q", f.from_i64(2)),
                ("h", f.one()),
                ("hstar", f.one()),
                ("s", f.one()),
                ("sstar", f.one()),
                ("r1", f.from_i64(3)),
            ],
        )
        .unwrap();
        assert_eq!(fp.get("r2"), &f.from_ratio(16, 3));
        let p = generate(&fp, &f).unwrap();
        assert!(validate(&p).ok());
        assert_eq!(beta_plus_one(&p), Some(f.from_ratio(7, 2)));
        assert!(verify_closed_form(&p, &fp).ok());

        let bad = FamilyParams::new(
            Family::QRacah,
            3,
            &f,
            &[
                ("q", f.from_i64(2)),
                ("h", f.one()),
                ("hstar", f.one()),
                ("s", f.one()),
                ("sstar", f.one()),
                ("r1", f.from_i64(3)),
                ("r2", f.from_i64(5)),
            ],
        )
        .unwrap();
        assert!(matches!(generate(&bad, &f), Err(FamilyError::PreconditionViolated(_))));
    }

    #[test]
    fn dual_q_krawtchouk_zero_denominator() {
        let f = Field::rational();
        let fp = FamilyParams::new(
            Family::DualQKrawtchouk,
            2,
            &f,
            &[("q", f.from_i64(2)), ("h", f.one()), ("hstar", f.one()), ("s", f.one())],
        )
        .unwrap();
        let p = generate(&fp, &f).unwrap();
        assert!(validate(&p).ok());
        assert!(verify_closed_form(&p, &fp).ok());
    }

    #[test]
    fn names_round_trip() {
        for fam in Family::ALL {
            assert_eq!(fam.name().parse::<Family>().unwrap(), fam);
            assert_eq!(serde_json::to_string(&fam).unwrap(), format!("\"{}\"", fam.name()));
        }
        assert!("q-rac".parse::<Family>().is_err());
    }

    #[test]
    fn unknown_and_missing_params() {
        let f = Field::rational();
        assert!(matches!(
            FamilyParams::new(Family::Krawtchouk, 2, &f, &[("s", f.one()), ("r", f.one())]),
            Err(FamilyError::MissingParam("sstar"))
        ));
        assert!(matches!(
            FamilyParams::new(Family::Krawtchouk, 2, &f, &[("q", f.one())]),
            Err(FamilyError::UnknownParam(..))
        ));
    }

    #[test]
    fn sampled_arrays_validate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f = Field::rational();
        for fam in Family::ALL {
            if fam == Family::Orphan {
                assert!(sample_params(fam, &f, 3, &mut rng).is_none());
                continue;
            }
            let fp = sample_params(fam, &f, 3, &mut rng).expect("admissible draw");
            let p = generate(&fp, &f).unwrap();
            assert!(validate(&p).ok(), "{fam}: {:?}", validate(&p));
            if fam.has_closed_form() {
                assert!(verify_closed_form(&p, &fp).ok(), "{fam}");
            }
        }
    }
}
