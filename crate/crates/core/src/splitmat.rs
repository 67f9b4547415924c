//! Split-form matrices of a parameter array, the transition matrix G, the
//! S-matrix, primitive idempotents and the Leonard-system conditions.

use thiserror::Error;

use crate::check::CheckReport;
use crate::field::{product, Elem, Field};
use crate::matrix::{MatrixError, SquareMatrix};
use crate::parray::ParameterArray;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("base q = {0} is not applicable (q must differ from 1 and -1)")]
    BaseNotApplicable(String),
    #[error("(q;q)_{0} vanishes for q = {1}")]
    TrinomialUndefined(usize, String),
    #[error("eigenvalues {0} and {1} coincide")]
    RepeatedEigenvalue(usize, usize),
    #[error("expected {expected} eigenvalues, got {got}")]
    EigenvalueCount { expected: usize, got: usize },
}

/// The matrices A, B, A*, B*, T, T*, T⇓, D, D⇓, H, H*, Z and G.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMatrixSet {
    pub a: SquareMatrix,
    pub b: SquareMatrix,
    pub a_star: SquareMatrix,
    pub b_star: SquareMatrix,
    pub t: SquareMatrix,
    pub t_star: SquareMatrix,
    pub t_down: SquareMatrix,
    pub d: SquareMatrix,
    pub d_down: SquareMatrix,
    pub h: SquareMatrix,
    pub h_star: SquareMatrix,
    pub z: SquareMatrix,
    pub g: SquareMatrix,
}

impl SplitMatrixSet {
    pub fn named(&self) -> [(&'static str, &SquareMatrix); 13] {
        [
            ("A", &self.a),
            ("B", &self.b),
            ("Astar", &self.a_star),
            ("Bstar", &self.b_star),
            ("T", &self.t),
            ("Tstar", &self.t_star),
            ("Tdown", &self.t_down),
            ("D", &self.d),
            ("Ddown", &self.d_down),
            ("H", &self.h),
            ("Hstar", &self.h_star),
            ("Z", &self.z),
            ("G", &self.g),
        ]
    }
}

/// Lower bidiagonal: `diag` on the diagonal, 1 below it.
pub fn lower_bidiagonal(field: &Field, diag: &[Elem]) -> SquareMatrix {
    SquareMatrix::from_fn(field, diag.len(), |i, j| {
        if i == j {
            diag[i].clone()
        } else if i == j + 1 {
            field.one()
        } else {
            field.zero()
        }
    })
}

/// Upper bidiagonal: `diag` on the diagonal, `sup[i-1]` at `(i-1, i)`.
pub fn upper_bidiagonal(field: &Field, diag: &[Elem], sup: &[Elem]) -> SquareMatrix {
    SquareMatrix::from_fn(field, diag.len(), |i, j| {
        if i == j {
            diag[i].clone()
        } else if j == i + 1 {
            sup[i].clone()
        } else {
            field.zero()
        }
    })
}

/// `M_ij = Π_{h<j} (x_i − y_h)` for `j <= i`, zero above the diagonal.
fn product_matrix(field: &Field, x: &[Elem], y: &[Elem]) -> SquareMatrix {
    SquareMatrix::from_fn(field, x.len(), |i, j| {
        if j > i {
            field.zero()
        } else {
            product(field, (0..j).map(|h| &x[i] - &y[h]))
        }
    })
}

fn prefix_products(field: &Field, xs: &[Elem]) -> Vec<Elem> {
    let mut out = vec![field.one()];
    for x in xs {
        let next = out.last().unwrap() * x;
        out.push(next);
    }
    out
}

pub fn build(p: &ParameterArray) -> Result<SplitMatrixSet, SplitError> {
    let f = p.field();
    let n = p.d() + 1;
    let th = p.theta();
    let ths = p.theta_star();
    let th_rev: Vec<Elem> = th.iter().rev().cloned().collect();

    let a = lower_bidiagonal(f, th);
    let b = lower_bidiagonal(f, &th_rev);
    let a_star = upper_bidiagonal(f, ths, p.varphi());
    let b_star = upper_bidiagonal(f, ths, p.phi());
    let t = product_matrix(f, th, th);
    let t_star = product_matrix(f, ths, ths);
    let t_down = product_matrix(f, &th_rev, &th_rev);
    let d = SquareMatrix::diagonal(f, &prefix_products(f, p.varphi()));
    let d_down = SquareMatrix::diagonal(f, &prefix_products(f, p.phi()));
    let h = SquareMatrix::diagonal(f, th);
    let h_star = SquareMatrix::diagonal(f, ths);
    let z = SquareMatrix::from_fn(f, n, |i, j| if i + j + 1 == n { f.one() } else { f.zero() });

    let g = &(&t.inverse()? * &z) * &t_down;
    let g00 = g.get(0, 0).inv().map_err(|_| MatrixError::Singular)?;
    let g = g.scale(&g00);

    Ok(SplitMatrixSet {
        a,
        b,
        a_star,
        b_star,
        t,
        t_star,
        t_down,
        d,
        d_down,
        h,
        h_star,
        z,
        g,
    })
}

fn matrix_diff(report: &mut CheckReport, name: &str, lhs: &SquareMatrix, rhs: &SquareMatrix) {
    for i in 0..lhs.n() {
        for j in 0..lhs.n() {
            if lhs.get(i, j) != rhs.get(i, j) {
                report.fail(
                    vec![i, j],
                    format!("{name}: entry ({i},{j}) is {} vs {}", lhs.get(i, j), rhs.get(i, j)),
                );
                return;
            }
        }
    }
}

/// Checks G⁻¹AG = B, G⁻¹A*G = B* and the auxiliary factorizations.
pub fn verify_conjugation(m: &SplitMatrixSet) -> CheckReport {
    let mut r = CheckReport::new("conjugation");
    let n = m.a.n();
    let f = m.a.field();
    let id = SquareMatrix::identity(f, n);
    let g_inv = match m.g.inverse() {
        Ok(x) => x,
        Err(_) => {
            r.fail(vec![], "G is singular");
            return r;
        }
    };
    matrix_diff(&mut r, "G^-1 A G = B", &(&(&g_inv * &m.a) * &m.g), &m.b);
    matrix_diff(&mut r, "G^-1 A* G = B*", &(&(&g_inv * &m.a_star) * &m.g), &m.b_star);
    matrix_diff(&mut r, "T A = H T", &(&m.t * &m.a), &(&m.h * &m.t));
    let zt = &m.z * &m.t_down;
    matrix_diff(&mut r, "Z T⇓ B = H Z T⇓", &(&zt * &m.b), &(&m.h * &zt));
    let tst = m.t_star.transpose();
    match m.d.inverse() {
        Ok(d_inv) => matrix_diff(
            &mut r,
            "D A* D^-1 T*^t = T*^t H*",
            &(&(&(&m.d * &m.a_star) * &d_inv) * &tst),
            &(&tst * &m.h_star),
        ),
        Err(_) => r.fail(vec![], "D is singular"),
    }
    matrix_diff(&mut r, "Z^2 = I", &(&m.z * &m.z), &id);
    r.expect(m.g.is_upper_triangular(), vec![], || "G is not upper triangular".into());
    r.expect(m.g.get(0, 0).is_one(), vec![0, 0], || "G_00 != 1".into());
    r
}

/// `(a;q)_n`.
pub fn q_pochhammer(a: &Elem, q: &Elem, n: usize) -> Elem {
    let f = a.field();
    let mut acc = f.one();
    let mut aq = a.clone();
    for _ in 0..n {
        acc = acc * (f.one() - &aq);
        aq = aq * q;
    }
    acc
}

/// The q-trinomial `[r,s,t]_q`.
pub fn trinomial(r: usize, s: usize, t: usize, q: &Elem) -> Result<Elem, SplitError> {
    let qq = |n: usize| q_pochhammer(q, q, n);
    let mut den = qq(r) * qq(s) * qq(t) * qq(r + s + t);
    if den.is_zero() {
        let bad = (1..=r + s + t).find(|&n| qq(n).is_zero()).unwrap_or(r + s + t);
        return Err(SplitError::TrinomialUndefined(bad, q.to_string()));
    }
    den = den.inv().expect("nonzero");
    Ok(qq(r + s) * qq(r + t) * qq(s + t) * den)
}

/// The upper triangular matrix S with
/// `S_ij = (θ_0−θ_d)…(θ_0−θ_{d−j+i+1}) [i, j−i, d−j]_q`.
pub fn s_matrix(p: &ParameterArray, q: &Elem) -> Result<SquareMatrix, SplitError> {
    let f = p.field();
    if q.is_one() || (q + &f.one()).is_zero() {
        return Err(SplitError::BaseNotApplicable(q.to_string()));
    }
    let d = p.d();
    let th = p.theta();
    let mut s = SquareMatrix::zeros(f, d + 1);
    for i in 0..=d {
        for j in i..=d {
            let pre = product(f, (d - j + i + 1..=d).map(|m| &th[0] - &th[m]));
            s.set(i, j, pre * trinomial(i, j - i, d - j, q)?);
        }
    }
    Ok(s)
}

/// Checks G = αS with α = 1/S_00.
pub fn verify_s_matrix(p: &ParameterArray, g: &SquareMatrix, q: &Elem) -> CheckReport {
    let mut r = CheckReport::new("s-matrix");
    match s_matrix(p, q) {
        Ok(s) => match s.get(0, 0).inv() {
            Ok(alpha) => matrix_diff(&mut r, "G = S/S_00", g, &s.scale(&alpha)),
            Err(_) => r.fail(vec![0, 0], "S_00 = 0"),
        },
        Err(e) => r.fail(vec![], e.to_string()),
    }
    r
}

/// `E_i = Π_{j≠i} (M − θ_j I)/(θ_i − θ_j)`.
pub fn primitive_idempotents(
    m: &SquareMatrix,
    eigenvalues: &[Elem],
) -> Result<Vec<SquareMatrix>, SplitError> {
    let n = m.n();
    if eigenvalues.len() != n {
        return Err(SplitError::EigenvalueCount {
            expected: n,
            got: eigenvalues.len(),
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            if eigenvalues[i] == eigenvalues[j] {
                return Err(SplitError::RepeatedEigenvalue(i, j));
            }
        }
    }
    let f = m.field();
    let id = SquareMatrix::identity(f, n);
    let shifted: Vec<SquareMatrix> = eigenvalues.iter().map(|t| m - &id.scale(t)).collect();
    Ok((0..n)
        .map(|i| {
            let mut e = id.clone();
            let mut den = f.one();
            for j in (0..n).filter(|&j| j != i) {
                e = &e * &shifted[j];
                den = den * (&eigenvalues[i] - &eigenvalues[j]);
            }
            e.scale(&den.inv().expect("distinct eigenvalues"))
        })
        .collect())
}

fn check_idempotent_system(
    r: &mut CheckReport,
    label: &str,
    m: &SquareMatrix,
    eigenvalues: &[Elem],
    es: &[SquareMatrix],
) {
    let f = m.field();
    let n = m.n();
    let id = SquareMatrix::identity(f, n);
    let zero = SquareMatrix::zeros(f, n);
    let mut total = zero.clone();
    for (i, e) in es.iter().enumerate() {
        r.expect((m * e) == e.scale(&eigenvalues[i]), vec![i], || {
            format!("{label}: M E_{i} != θ_{i} E_{i}")
        });
        r.expect(!e.is_zero(), vec![i], || format!("{label}: E_{i} = 0"));
        for (j, e2) in es.iter().enumerate() {
            let prod = e * e2;
            let want = if i == j { e } else { &zero };
            r.expect(&prod == want, vec![i, j], || {
                format!("{label}: E_{i} E_{j} != δ E_{i}")
            });
        }
        total = &total + e;
    }
    r.expect(total == id, vec![], || format!("{label}: Σ E_i != I"));
}

fn check_tridiagonal_action(
    r: &mut CheckReport,
    label: &str,
    es: &[SquareMatrix],
    x: &SquareMatrix,
) {
    let n = es.len();
    for i in 0..n {
        let left = &es[i] * x;
        for j in 0..n {
            let v = &left * &es[j];
            let gap = i.abs_diff(j);
            if gap > 1 {
                r.expect(v.is_zero(), vec![i, j], || {
                    format!("{label}: E_{i} X E_{j} != 0 with |i-j| > 1")
                });
            } else if gap == 1 {
                r.expect(!v.is_zero(), vec![i, j], || {
                    format!("{label}: E_{i} X E_{j} = 0 with |i-j| = 1")
                });
            }
        }
    }
}

/// Builds A, A* in split form and checks the five Leonard-system conditions.
pub fn verify_leonard_conditions(p: &ParameterArray) -> CheckReport {
    let mut r = CheckReport::new("leonard-conditions");
    let f = p.field();
    let a = lower_bidiagonal(f, p.theta());
    let a_star = upper_bidiagonal(f, p.theta_star(), p.varphi());
    let (es, es_star) = match (
        primitive_idempotents(&a, p.theta()),
        primitive_idempotents(&a_star, p.theta_star()),
    ) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => {
            r.fail(vec![], format!("not multiplicity-free: {e}"));
            return r;
        }
    };
    check_idempotent_system(&mut r, "A", &a, p.theta(), &es);
    check_idempotent_system(&mut r, "A*", &a_star, p.theta_star(), &es_star);
    check_tridiagonal_action(&mut r, "E*_i A E*_j", &es_star, &a);
    check_tridiagonal_action(&mut r, "E_i A* E_j", &es, &a_star);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::rational()
    }

    fn ints(f: &Field, rows: &[&[i64]]) -> SquareMatrix {
        SquareMatrix::from_fn(f, rows.len(), |i, j| f.from_i64(rows[i][j]))
    }

    fn fix_d1() -> ParameterArray {
        ParameterArray::from_ints(&q(), &[0, 1], &[0, 1], &[1], &[2]).unwrap()
    }

    fn fix_kraw2() -> ParameterArray {
        ParameterArray::from_ints(&q(), &[0, 1, 2], &[0, 1, 2], &[-4, -4], &[-2, -2]).unwrap()
    }

    fn fix_orphan() -> ParameterArray {
        let f = Field::gf4();
        let e = |xs: &[&str]| xs.iter().map(|s| f.parse(s).unwrap()).collect::<Vec<_>>();
        ParameterArray::new(
            &f,
            e(&["0", "1+w", "1", "w"]),
            e(&["0", "1+w", "1", "w"]),
            e(&["w", "1", "w"]),
            e(&["1+w", "1", "1+w"]),
        )
        .unwrap()
    }

    #[test]
    fn fix_d1_matrices() {
        let f = q();
        let m = build(&fix_d1()).unwrap();
        assert_eq!(m.a, ints(&f, &[&[0, 0], &[1, 1]]));
        assert_eq!(m.b, ints(&f, &[&[1, 0], &[1, 0]]));
        assert_eq!(m.a_star, ints(&f, &[&[0, 1], &[0, 1]]));
        assert_eq!(m.b_star, ints(&f, &[&[0, 2], &[0, 1]]));
        assert_eq!(m.t, ints(&f, &[&[1, 0], &[1, 1]]));
        assert_eq!(m.t_down, ints(&f, &[&[1, 0], &[1, -1]]));
        assert_eq!(m.z, ints(&f, &[&[0, 1], &[1, 0]]));
        // G^-1 A G = B forces G_01 = θ_0 − θ_1 once G_00 = 1
        assert_eq!(m.g, ints(&f, &[&[1, -1], &[0, 1]]));
        assert!(verify_conjugation(&m).ok());
    }

    #[test]
    fn d0_matrices() {
        let f = q();
        let p = ParameterArray::from_ints(&f, &[5], &[7], &[], &[]).unwrap();
        let m = build(&p).unwrap();
        assert_eq!(m.g, SquareMatrix::identity(&f, 1));
        assert!(verify_conjugation(&m).ok());
        assert!(verify_leonard_conditions(&p).ok());
    }

    #[test]
    fn invalid_array_fails_conjugation() {
        let p = ParameterArray::from_ints(&q(), &[0, 1], &[0, 1], &[1], &[3]).unwrap();
        assert!(!verify_conjugation(&build(&p).unwrap()).ok());
    }

    #[test]
    fn orphan_conjugation_and_conditions() {
        let p = fix_orphan();
        assert!(crate::parray::validate(&p).ok());
        assert!(verify_conjugation(&build(&p).unwrap()).ok());
        assert!(verify_leonard_conditions(&p).ok());
    }

    #[test]
    fn kraw2_conditions() {
        let r = verify_leonard_conditions(&fix_kraw2());
        assert!(r.ok(), "{r}");
        assert!(verify_conjugation(&build(&fix_kraw2()).unwrap()).ok());
    }

    #[test]
    fn idempotents_of_fix_d1() {
        let f = q();
        let p = fix_d1();
        let a = lower_bidiagonal(&f, p.theta());
        let es = primitive_idempotents(&a, p.theta()).unwrap();
        assert_eq!(es[0], ints(&f, &[&[1, 0], &[-1, 0]]));
        assert_eq!(es[1], ints(&f, &[&[0, 0], &[1, 1]]));
        assert!(verify_leonard_conditions(&p).ok());
    }

    #[test]
    fn idempotents_of_diagonal() {
        let f = Field::prime(7).unwrap();
        let ev: Vec<Elem> = [3, 1, 6].iter().map(|&x| f.from_i64(x)).collect();
        let es = primitive_idempotents(&SquareMatrix::diagonal(&f, &ev), &ev).unwrap();
        for (i, e) in es.iter().enumerate() {
            let mut unit = SquareMatrix::zeros(&f, 3);
            unit.set(i, i, f.one());
            assert_eq!(e, &unit);
        }
        let err = primitive_idempotents(&SquareMatrix::identity(&f, 2), &[f.one(), f.one()]);
        assert_eq!(err.unwrap_err(), SplitError::RepeatedEigenvalue(0, 1));
    }

    #[test]
    fn trinomial_values() {
        let f = q();
        let two = f.from_i64(2);
        for t in 0..4 {
            assert!(trinomial(0, 0, t, &two).unwrap().is_one());
            assert!(trinomial(0, t, 2, &two).unwrap().is_one());
        }
        // [1,1,1]_q = (q;q)_2^3 / ((q;q)_1^3 (q;q)_3) = (1+q)^2/(1+q+q^2)
        assert_eq!(trinomial(1, 1, 1, &two).unwrap(), f.from_ratio(9, 7));
        let f3 = Field::prime(3).unwrap();
        assert!(matches!(
            trinomial(1, 1, 0, &f3.from_i64(2)),
            Err(SplitError::TrinomialUndefined(2, _))
        ));
    }

    #[test]
    fn s_matrix_d1() {
        let f = q();
        let p = fix_d1();
        let m = build(&p).unwrap();
        let s = s_matrix(&p, &f.from_i64(2)).unwrap();
        assert_eq!(s, ints(&f, &[&[1, -1], &[0, 1]]));
        assert!(verify_s_matrix(&p, &m.g, &f.from_i64(2)).ok());
        assert!(matches!(s_matrix(&p, &f.one()), Err(SplitError::BaseNotApplicable(_))));
        assert!(matches!(s_matrix(&p, &f.from_i64(-1)), Err(SplitError::BaseNotApplicable(_))));
    }
}
