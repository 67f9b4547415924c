//! The polynomials f_i, f_i⇓, f*_i attached to a parameter array, their
//! evaluation tables and the identities relating them.

use std::fmt;

use crate::check::CheckReport;
use crate::field::{product, Elem, Field, FieldError};
use crate::matrix::SquareMatrix;
use crate::ortho;
use crate::parray::{d4_apply, D4Gen, ParameterArray};
use crate::splitmat;

/// Dense polynomial in λ, coefficients low degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    coeffs: Vec<Elem>,
}

impl Poly {
    pub fn new(field: &Field, mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last().is_some_and(Elem::is_zero) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn constant(c: Elem) -> Self {
        let f = c.field().clone();
        Self::new(&f, vec![c])
    }

    pub fn zero(field: &Field) -> Self {
        Self::new(field, vec![])
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Elem) -> Elem {
        self.coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, c| acc * x + c)
    }

    /// `self · (λ − root)`.
    pub fn mul_linear(&self, root: &Elem) -> Poly {
        let mut out = vec![self.field.zero(); self.coeffs.len() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k + 1] = &out[k + 1] + c;
            out[k] = &out[k] - c * root;
        }
        Poly::new(&self.field, out)
    }

    pub fn scale(&self, c: &Elem) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = self.field.zero();
        Poly::new(
            &self.field,
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&z) + other.coeffs.get(k).unwrap_or(&z))
                .collect(),
        )
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})*λ"),
                _ => format!("({c})*λ^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `Σ_{n≤i} Π_{h<n}(λ − x_h) Π_{h<n}(y_i − y_h) / (v_1⋯v_n)` for each i.
pub(crate) fn split_polys(
    field: &Field,
    x: &[Elem],
    y: &[Elem],
    v: &[Elem],
) -> Result<Vec<Poly>, FieldError> {
    let d = x.len() - 1;
    let mut basis = vec![Poly::constant(field.one())];
    for n in 1..=d {
        let next = basis[n - 1].mul_linear(&x[n - 1]);
        basis.push(next);
    }
    let v_inv: Vec<Elem> = v.iter().map(Elem::inv).collect::<Result<_, _>>()?;
    Ok((0..=d)
        .map(|i| {
            let mut coef = field.one();
            let mut poly = basis[0].clone();
            for n in 1..=i {
                coef = coef * (&y[i] - &y[n - 1]) * &v_inv[n - 1];
                poly = poly.add(&basis[n].scale(&coef));
            }
            poly
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyTable {
    pub f: Vec<Poly>,
    pub fdown: Vec<Poly>,
    pub fstar: Vec<Poly>,
    /// `P_ij = f_j(θ_i)`.
    pub p: SquareMatrix,
    /// `P⇓_ij = f⇓_j(θ_i)`.
    pub p_down: SquareMatrix,
}

fn eval_table(field: &Field, polys: &[Poly], points: &[Elem]) -> SquareMatrix {
    SquareMatrix::from_fn(field, points.len(), |i, j| polys[j].eval(&points[i]))
}

pub fn corresponding_polys(p: &ParameterArray) -> Result<PolyTable, FieldError> {
    let field = p.field();
    let th = p.theta();
    let th_rev: Vec<Elem> = th.iter().rev().cloned().collect();
    let f = split_polys(field, th, p.theta_star(), p.varphi())?;
    let fdown = split_polys(field, &th_rev, p.theta_star(), p.phi())?;
    let ps = d4_apply(p, &[D4Gen::Star]);
    let fstar = split_polys(field, ps.theta(), ps.theta_star(), ps.varphi())?;
    let pm = eval_table(field, &f, th);
    let p_down = eval_table(field, &fdown, th);
    Ok(PolyTable {
        f,
        fdown,
        fstar,
        p: pm,
        p_down,
    })
}

/// `α_i = (ϕ_1⋯ϕ_i)/(φ_1⋯φ_i)`.
pub fn alpha(p: &ParameterArray) -> Result<Vec<Elem>, FieldError> {
    let f = p.field();
    let mut out = vec![f.one()];
    for i in 1..=p.d() {
        let next = out[i - 1].clone() * p.phi_at(i) * p.varphi_at(i).inv()?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Proportionality {
    pub alphas: Vec<Elem>,
    pub report: CheckReport,
}

/// Checks `f_i = α_i f⇓_i` as polynomials, the degree of each f_i, the
/// factorizations of the two evaluation tables and that `P⁻¹P⇓` is diagonal
/// with entries `1/α_i`.
pub fn verify_proportionality(p: &ParameterArray) -> Proportionality {
    let mut report = CheckReport::new("proportionality");
    let (table, alphas) = match (corresponding_polys(p), alpha(p)) {
        (Ok(t), Ok(a)) => (t, a),
        (Err(e), _) | (_, Err(e)) => {
            report.fail(vec![], format!("undefined: {e}"));
            return Proportionality {
                alphas: vec![],
                report,
            };
        }
    };
    let field = p.field();
    for i in 0..=p.d() {
        report.expect(table.f[i].degree() == Some(i), vec![i], || {
            format!("deg f_{i} = {:?}", table.f[i].degree())
        });
        report.expect(table.fdown[i].degree() == Some(i), vec![i], || {
            format!("deg f⇓_{i} = {:?}", table.fdown[i].degree())
        });
        let scaled = table.fdown[i].scale(&alphas[i]);
        report.expect(table.f[i] == scaled, vec![i], || {
            format!("f_{i} = {} but α_{i} f⇓_{i} = {}", table.f[i], scaled)
        });
    }
    if let Ok(m) = splitmat::build(p) {
        let tst = m.t_star.transpose();
        match (m.d.inverse(), m.d_down.inverse()) {
            (Ok(d_inv), Ok(dd_inv)) => {
                report.expect(table.p == &(&m.t * &d_inv) * &tst, vec![], || {
                    "P != T D^-1 T*^t".into()
                });
                let rhs = &(&(&m.z * &m.t_down) * &dd_inv) * &tst;
                report.expect(table.p_down == rhs, vec![], || "P⇓ != Z T⇓ D⇓^-1 T*^t".into());
            }
            _ => report.fail(vec![], "D or D⇓ singular"),
        }
    }
    match table.p.inverse() {
        Ok(p_inv) => {
            let q = &p_inv * &table.p_down;
            let want: Result<Vec<Elem>, _> = alphas.iter().map(Elem::inv).collect();
            match want {
                Ok(w) => report.expect(q == SquareMatrix::diagonal(field, &w), vec![], || {
                    "P^-1 P⇓ != diag(1/α_i)".into()
                }),
                Err(_) => report.fail(vec![], "some α_i = 0"),
            }
        }
        Err(_) => report.fail(vec![], "P is singular"),
    }
    Proportionality { alphas, report }
}

#[derive(Debug, Clone)]
pub struct Endpoints {
    /// `f_i(θ_d)`.
    pub values: Vec<Elem>,
    pub report: CheckReport,
}

/// Evaluates `f_i(θ_d)` and checks it against α_i, together with the
/// companion formula for `k_i f_i(θ_d)`.
pub fn endpoint_values(p: &ParameterArray) -> Endpoints {
    let mut report = CheckReport::new("endpoint-values");
    let d = p.d();
    let table = match corresponding_polys(p) {
        Ok(t) => t,
        Err(e) => {
            report.fail(vec![], format!("undefined: {e}"));
            return Endpoints {
                values: vec![],
                report,
            };
        }
    };
    let values: Vec<Elem> = table.f.iter().map(|f| f.eval(&p.theta()[d])).collect();
    match (alpha(p), ortho::ortho_data(p)) {
        (Ok(alphas), Ok(od)) => {
            let field = p.field();
            let ts = p.theta_star();
            let top = product(field, (1..=d).map(|j| &ts[0] - &ts[j]));
            for i in 0..=d {
                report.expect(values[i] == alphas[i], vec![i], || {
                    format!("f_{i}(θ_d) = {} but ratio is {}", values[i], alphas[i])
                });
                let bottom = product(field, (0..=d).filter(|&j| j != i).map(|j| &ts[i] - &ts[j]));
                let lhs = &od.k[i] * &values[i] * &bottom;
                report.expect(lhs == top, vec![i], || {
                    format!("k_{i} f_{i}(θ_d) mismatch: {} vs {}", lhs, top)
                });
            }
        }
        (Err(e), _) | (_, Err(e)) => report.fail(vec![], format!("undefined: {e}")),
    }
    Endpoints { values, report }
}

/// Checks `f_i(θ_j) = f*_j(θ*_i)` for all i, j.
pub fn duality_check(p: &ParameterArray) -> CheckReport {
    let mut report = CheckReport::new("duality");
    let table = match corresponding_polys(p) {
        Ok(t) => t,
        Err(e) => {
            report.fail(vec![], format!("undefined: {e}"));
            return report;
        }
    };
    let (th, ts) = (p.theta(), p.theta_star());
    for i in 0..=p.d() {
        for j in 0..=p.d() {
            let lhs = table.f[i].eval(&th[j]);
            let rhs = table.fstar[j].eval(&ts[i]);
            report.expect(lhs == rhs, vec![i, j], || {
                format!("f_{i}(θ_{j}) = {lhs} but f*_{j}(θ*_{i}) = {rhs}")
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix_d1() -> ParameterArray {
        ParameterArray::from_ints(&Field::rational(), &[0, 1], &[0, 1], &[1], &[2]).unwrap()
    }

    fn fix_kraw2() -> ParameterArray {
        ParameterArray::from_ints(&Field::rational(), &[0, 1, 2], &[0, 1, 2], &[-4, -4], &[-2, -2])
            .unwrap()
    }

    #[test]
    fn poly_basics() {
        let f = Field::rational();
        let x = Poly::constant(f.one()).mul_linear(&f.from_i64(2)).mul_linear(&f.from_i64(-3));
        assert_eq!(x.degree(), Some(2));
        assert_eq!(x.eval(&f.from_i64(4)), f.from_i64(14));
        assert!(x.add(&x.scale(&f.from_i64(-1))).degree().is_none());
        assert_eq!(Poly::zero(&f).eval(&f.one()), f.zero());
    }

    #[test]
    fn fix_d1_polys() {
        let f = Field::rational();
        let t = corresponding_polys(&fix_d1()).unwrap();
        assert_eq!(t.f[0], Poly::constant(f.one()));
        assert_eq!(t.f[1], Poly::new(&f, vec![f.one(), f.one()]));
        assert_eq!(t.fdown[1], Poly::new(&f, vec![f.from_ratio(1, 2), f.from_ratio(1, 2)]));
        let pr = verify_proportionality(&fix_d1());
        assert!(pr.report.ok(), "{}", pr.report);
        assert_eq!(pr.alphas, vec![f.one(), f.from_i64(2)]);
        let ep = endpoint_values(&fix_d1());
        assert!(ep.report.ok(), "{}", ep.report);
        assert_eq!(ep.values, vec![f.one(), f.from_i64(2)]);
        assert!(duality_check(&fix_d1()).ok());
        assert_eq!(t.fstar[1].eval(&f.one()), f.from_i64(2));
    }

    #[test]
    fn kraw2_polys() {
        let f = Field::rational();
        let p = fix_kraw2();
        let t = corresponding_polys(&p).unwrap();
        assert_eq!(t.f[1], Poly::new(&f, vec![f.one(), f.from_ratio(-1, 4)]));
        assert_eq!(t.f[1].eval(&f.one()), f.from_ratio(3, 4));
        let ep = endpoint_values(&p);
        assert!(ep.report.ok());
        assert_eq!(ep.values[2], f.from_ratio(1, 4));
        assert!(verify_proportionality(&p).report.ok());
        assert!(duality_check(&p).ok());
        for poly in &t.f {
            assert!(poly.eval(&f.zero()).is_one());
        }
    }

    #[test]
    fn d0_polys() {
        let f = Field::prime(3).unwrap();
        let p = ParameterArray::from_ints(&f, &[2], &[1], &[], &[]).unwrap();
        let pr = verify_proportionality(&p);
        assert!(pr.report.ok());
        assert_eq!(pr.alphas, vec![f.one()]);
        assert!(endpoint_values(&p).report.ok());
        assert!(duality_check(&p).ok());
    }

    #[test]
    fn zero_split_is_reported_not_panicking() {
        let p = ParameterArray::from_ints(&Field::rational(), &[0, 1], &[0, 1], &[0], &[2]).unwrap();
        assert!(!verify_proportionality(&p).report.ok());
        assert!(!duality_check(&p).ok());
    }
}
