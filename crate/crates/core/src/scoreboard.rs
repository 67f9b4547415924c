//! The full identity scoreboard for one parameter array: twelve named
//! checks, always all run, in a fixed order.

use std::fmt;

use serde::Serialize;

use crate::check::{CheckReport, Failure};
use crate::exec;
use crate::field::Elem;
use crate::ortho::{verify_nu_sums, verify_orthogonality};
use crate::parray::{base_candidates, validate, BaseCandidates, ParameterArray};
use crate::polys::{duality_check, endpoint_values, verify_proportionality};
use crate::recur::{verify_alt_formulas, verify_difference, verify_three_term};
use crate::splitmat::{build, q_pochhammer, verify_conjugation, verify_leonard_conditions, verify_s_matrix};

pub const CHECK_NAMES: [&str; 12] = [
    "validate",
    "conjugation",
    "leonard-conditions",
    "proportionality",
    "endpoint-values",
    "duality",
    "orthogonality",
    "nu-sums",
    "three-term",
    "difference",
    "alternative-formulas",
    "s-matrix",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail { failures: Vec<Failure> },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Line {
    pub check: &'static str,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl Line {
    fn from_report(r: CheckReport) -> Line {
        let outcome = if r.ok() {
            Outcome::Pass
        } else {
            Outcome::Fail { failures: r.failures }
        };
        Line { check: r.check, outcome }
    }

    fn skipped(check: &'static str, reason: impl Into<String>) -> Line {
        Line {
            check,
            outcome: Outcome::Skipped { reason: reason.into() },
        }
    }

    pub fn failed(&self) -> bool {
        matches!(self.outcome, Outcome::Fail { .. })
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Pass => write!(f, "{}: pass", self.check),
            Outcome::Skipped { reason } => write!(f, "{}: skipped: {reason}", self.check),
            Outcome::Fail { failures } => {
                write!(f, "{}: FAIL ({} failures)", self.check, failures.len())?;
                for x in failures.iter().take(5) {
                    write!(f, "\n  at {:?}: {}", x.indices, x.detail)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scoreboard {
    pub lines: Vec<Line>,
}

impl Scoreboard {
    /// No line failed (skipped lines are allowed).
    pub fn ok(&self) -> bool {
        !self.lines.iter().any(Line::failed)
    }

    pub fn passed(&self) -> usize {
        self.lines.iter().filter(|l| l.outcome == Outcome::Pass).count()
    }
}

impl fmt::Display for Scoreboard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.lines.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// The base used for the S-matrix line, or the reason it is skipped.
/// For `d < 3` any nonzero scalar is a base; the first field element that is
/// not 0 or ±1 and keeps `(q;q)_d` nonzero is used.
pub fn s_matrix_base(p: &ParameterArray) -> Result<Elem, String> {
    let f = p.field();
    let usable = |q: &Elem| {
        !q.is_zero() && !q.is_one() && !(q + &f.one()).is_zero()
    };
    match base_candidates(p) {
        BaseCandidates::InField(roots) => {
            let q = roots[0].clone();
            if usable(&q) {
                Ok(q)
            } else {
                Err("base ±1".into())
            }
        }
        BaseCandidates::QuadraticOnly { .. } => Err("base not in field".into()),
        BaseCandidates::AnyBase => {
            let pool: Box<dyn Iterator<Item = Elem>> = if f.is_finite() {
                Box::new(f.elements().into_iter())
            } else {
                Box::new((2..).map(|n| f.from_i64(n)))
            };
            pool.take(1 << 16)
                .find(|q| usable(q) && !q_pochhammer(q, q, p.d()).is_zero())
                .ok_or_else(|| "no usable base in field".into())
        }
    }
}

/// Runs all twelve checks. Never stops early.
pub fn scoreboard(p: &ParameterArray) -> Scoreboard {
    let mut lines = Vec::with_capacity(12);
    let v = validate(p);
    lines.push(if v.ok() {
        Line {
            check: "validate",
            outcome: Outcome::Pass,
        }
    } else {
        Line {
            check: "validate",
            outcome: Outcome::Fail {
                failures: v
                    .violations
                    .iter()
                    .map(|x| Failure {
                        indices: x.indices.clone(),
                        detail: format!("{:?}: {}", x.condition, x.detail),
                    })
                    .collect(),
            },
        }
    });
    let split = build(p);
    lines.push(match &split {
        Ok(m) => Line::from_report(verify_conjugation(m)),
        Err(e) => Line::from_report(failed("conjugation", e.to_string())),
    });
    lines.push(Line::from_report(verify_leonard_conditions(p)));
    lines.push(Line::from_report(verify_proportionality(p).report));
    lines.push(Line::from_report(endpoint_values(p).report));
    lines.push(Line::from_report(duality_check(p)));
    lines.push(Line::from_report(verify_orthogonality(p)));
    lines.push(Line::from_report(verify_nu_sums(p)));
    lines.push(Line::from_report(verify_three_term(p)));
    lines.push(Line::from_report(verify_difference(p)));
    if p.d() == 0 {
        lines.push(Line::skipped("alternative-formulas", "d = 0"));
        lines.push(Line::skipped("s-matrix", "d = 0"));
    } else {
        lines.push(Line::from_report(verify_alt_formulas(p)));
        lines.push(match (s_matrix_base(p), &split) {
            (Ok(q), Ok(m)) => Line::from_report(verify_s_matrix(p, &m.g, &q)),
            (Err(reason), _) => Line::skipped("s-matrix", reason),
            (Ok(_), Err(e)) => Line::from_report(failed("s-matrix", e.to_string())),
        });
    }
    Scoreboard { lines }
}

fn failed(check: &'static str, detail: String) -> CheckReport {
    let mut r = CheckReport::new(check);
    r.fail(vec![], detail);
    r
}

/// Scoreboards for many arrays (parallel when the `parallel` feature is on).
pub fn scoreboard_batch(arrays: &[ParameterArray]) -> Vec<Scoreboard> {
    exec::map(arrays, scoreboard)
}

pub fn scoreboard_batch_sequential(arrays: &[ParameterArray]) -> Vec<Scoreboard> {
    exec::map_sequential(arrays, scoreboard)
}
