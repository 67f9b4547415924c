//! Three-term recurrence and difference-equation coefficients, and their
//! alternative closed forms.

use crate::check::CheckReport;
use crate::field::{product, Elem, FieldError};
use crate::ortho::ortho_data;
use crate::parray::{d4_apply, D4Gen, ParameterArray};
use crate::polys::corresponding_polys;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceCoeffs {
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
    pub c: Vec<Elem>,
    pub astar: Vec<Elem>,
    pub bstar: Vec<Elem>,
    pub cstar: Vec<Elem>,
}

type Abc = (Vec<Elem>, Vec<Elem>, Vec<Elem>);

/// a, b, c built from θ_0, the dual sequence and the split sequences.
fn abc(p: &ParameterArray) -> Result<Abc, FieldError> {
    let f = p.field();
    let d = p.d();
    let ts = p.theta_star();
    let mut b = Vec::with_capacity(d + 1);
    let mut c = Vec::with_capacity(d + 1);
    for i in 0..=d {
        if i < d {
            let num = product(f, (0..i).map(|h| &ts[i] - &ts[h]));
            let den = product(f, (0..=i).map(|h| &ts[i + 1] - &ts[h]));
            b.push(p.varphi_at(i + 1) * num * den.inv()?);
        } else {
            b.push(f.zero());
        }
        if i > 0 {
            let num = product(f, (i + 1..=d).map(|h| &ts[i] - &ts[h]));
            let den = product(f, (i..=d).map(|h| &ts[i - 1] - &ts[h]));
            c.push(p.phi_at(i) * num * den.inv()?);
        } else {
            c.push(f.zero());
        }
    }
    let a = (0..=d).map(|i| &p.theta()[0] - &c[i] - &b[i]).collect();
    Ok((a, b, c))
}

pub fn recurrence_coeffs(p: &ParameterArray) -> Result<RecurrenceCoeffs, FieldError> {
    let (a, b, c) = abc(p)?;
    let (astar, bstar, cstar) = abc(&d4_apply(p, &[D4Gen::Star]))?;
    Ok(RecurrenceCoeffs {
        a,
        b,
        c,
        astar,
        bstar,
        cstar,
    })
}

/// Checks `θ_j f_i(θ_j) = c_i f_{i−1}(θ_j) + a_i f_i(θ_j) + b_i f_{i+1}(θ_j)`,
/// the matrix form `C Pᵗ = Pᵗ H`, and the product formula for k_i.
pub fn verify_three_term(p: &ParameterArray) -> CheckReport {
    let mut r = CheckReport::new("three-term");
    let (table, rc, od) = match (corresponding_polys(p), recurrence_coeffs(p), ortho_data(p)) {
        (Ok(t), Ok(rc), Ok(od)) => (t, rc, od),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
            r.fail(vec![], format!("undefined: {e}"));
            return r;
        }
    };
    let f = p.field();
    let d = p.d();
    let th = p.theta();
    let pm = &table.p;
    for i in 0..=d {
        for j in 0..=d {
            let lhs = &th[j] * pm.get(j, i);
            let mut rhs = &rc.a[i] * pm.get(j, i);
            if i > 0 {
                rhs = rhs + &rc.c[i] * pm.get(j, i - 1);
            }
            if i < d {
                rhs = rhs + &rc.b[i] * pm.get(j, i + 1);
            }
            r.expect(lhs == rhs, vec![i, j], || {
                format!("θ_{j} f_{i}(θ_{j}) = {lhs} but recurrence gives {rhs}")
            });
        }
    }
    let cm = crate::matrix::SquareMatrix::from_fn(f, d + 1, |i, j| {
        if i == j {
            rc.a[i].clone()
        } else if j + 1 == i {
            rc.c[i].clone()
        } else if j == i + 1 {
            rc.b[i].clone()
        } else {
            f.zero()
        }
    });
    let pt = pm.transpose();
    let h = crate::matrix::SquareMatrix::diagonal(f, th);
    r.expect(&cm * &pt == &pt * &h, vec![], || "C P^t != P^t H".into());
    check_k_products(&mut r, &rc.b, &rc.c, &od.k, "k");
    for i in 0..d {
        r.expect(!rc.b[i].is_zero(), vec![i], || format!("b_{i} = 0"));
        r.expect(!rc.c[i + 1].is_zero(), vec![i + 1], || format!("c_{} = 0", i + 1));
    }
    r
}

fn check_k_products(r: &mut CheckReport, b: &[Elem], c: &[Elem], k: &[Elem], name: &str) {
    let f = b[0].field();
    let mut ratio = f.one();
    for i in 0..k.len() {
        if i > 0 {
            match c[i].inv() {
                Ok(ci) => ratio = ratio * &b[i - 1] * ci,
                Err(_) => {
                    r.fail(vec![i], format!("c_{i} = 0"));
                    return;
                }
            }
        }
        r.expect(ratio == k[i], vec![i], || {
            format!("{name}_{i} = {} but b/c product is {ratio}", k[i])
        });
    }
}

/// Checks `θ*_i f_i(θ_j) = c*_j f_i(θ_{j−1}) + a*_j f_i(θ_j) + b*_j f_i(θ_{j+1})`
/// and the product formula for k*_i.
pub fn verify_difference(p: &ParameterArray) -> CheckReport {
    let mut r = CheckReport::new("difference");
    let (table, rc, od) = match (corresponding_polys(p), recurrence_coeffs(p), ortho_data(p)) {
        (Ok(t), Ok(rc), Ok(od)) => (t, rc, od),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
            r.fail(vec![], format!("undefined: {e}"));
            return r;
        }
    };
    let d = p.d();
    let ts = p.theta_star();
    let pm = &table.p;
    for i in 0..=d {
        for j in 0..=d {
            let lhs = &ts[i] * pm.get(j, i);
            let mut rhs = &rc.astar[j] * pm.get(j, i);
            if j > 0 {
                rhs = rhs + &rc.cstar[j] * pm.get(j - 1, i);
            }
            if j < d {
                rhs = rhs + &rc.bstar[j] * pm.get(j + 1, i);
            }
            r.expect(lhs == rhs, vec![i, j], || {
                format!("θ*_{i} f_{i}(θ_{j}) = {lhs} but difference equation gives {rhs}")
            });
        }
    }
    check_k_products(&mut r, &rc.bstar, &rc.cstar, &od.kstar, "k*");
    r
}

fn alt_formulas_one(r: &mut CheckReport, p: &ParameterArray, label: &str) -> Result<(), FieldError> {
    let d = p.d();
    let (th, ts) = (p.theta(), p.theta_star());
    let (a, b, c) = abc(p)?;
    let vp = |i: usize| p.varphi_at(i);

    // a_i
    for i in 0..=d {
        let mut alt = th[i].clone();
        if i > 0 {
            alt = alt + vp(i) * (&ts[i] - &ts[i - 1]).inv()?;
        }
        if i < d {
            alt = alt + vp(i + 1) * (&ts[i] - &ts[i + 1]).inv()?;
        }
        r.expect(alt == a[i], vec![i], || format!("{label}: a_{i} = {} vs {alt}", a[i]));
    }

    // c_i(θ*_{i−1}−θ*_i) − b_i(θ*_i−θ*_{i+1}) = (θ_1−θ_0)(θ*_i−θ*_0) + φ_1
    for i in 0..=d {
        let mut lhs = p.field().zero();
        if i > 0 {
            lhs = lhs + &c[i] * (&ts[i - 1] - &ts[i]);
        }
        if i < d {
            lhs = lhs - &b[i] * (&ts[i] - &ts[i + 1]);
        }
        let rhs = (&th[1] - &th[0]) * (&ts[i] - &ts[0]) + vp(1);
        r.expect(lhs == rhs, vec![i], || {
            format!("{label}: c/b identity at {i}: {lhs} vs {rhs}")
        });
    }

    // f_i(θ_1) = 1 + (θ_1−θ_0)(θ*_i−θ*_0)/φ_1
    let table = corresponding_polys(p)?;
    let inv1 = vp(1).inv()?;
    for i in 0..=d {
        let want = p.field().one() + (&th[1] - &th[0]) * (&ts[i] - &ts[0]) * &inv1;
        let got = table.f[i].eval(&th[1]);
        r.expect(got == want, vec![i], || format!("{label}: f_{i}(θ_1) = {got} vs {want}"));
    }

    // b_i, c_i
    let b0 = vp(1) * (&ts[1] - &ts[0]).inv()?;
    r.expect(b0 == b[0], vec![0], || format!("{label}: b_0 = {} vs {b0}", b[0]));
    let cd = p.phi_at(d) * (&ts[d - 1] - &ts[d]).inv()?;
    r.expect(cd == c[d], vec![d], || format!("{label}: c_{d} = {} vs {cd}", c[d]));
    r.expect(b[d].is_zero() && c[0].is_zero(), vec![], || format!("{label}: b_d or c_0 nonzero"));
    for i in 1..d {
        let common = (&th[0] - &th[1]) * (&ts[0] - &ts[i]) + vp(1);
        let bi = ((&th[0] - &a[i]) * (&ts[i] - &ts[i - 1]) + &common)
            * (&ts[i + 1] - &ts[i - 1]).inv()?;
        let ci = ((&th[0] - &a[i]) * (&ts[i] - &ts[i + 1]) + &common)
            * (&ts[i - 1] - &ts[i + 1]).inv()?;
        r.expect(bi == b[i], vec![i], || format!("{label}: b_{i} = {} vs {bi}", b[i]));
        r.expect(ci == c[i], vec![i], || format!("{label}: c_{i} = {} vs {ci}", c[i]));
    }
    Ok(())
}

/// Recomputes a_i, b_i, c_i by the alternative formulas, for the array and
/// for its star image (which gives the starred coefficients).
///
/// Requires `d >= 1`.
pub fn verify_alt_formulas(p: &ParameterArray) -> CheckReport {
    let mut r = CheckReport::new("alternative-formulas");
    if p.d() == 0 {
        r.fail(vec![], "requires d >= 1");
        return r;
    }
    for (label, arr) in [("plain", p.clone()), ("star", d4_apply(p, &[D4Gen::Star]))] {
        if let Err(e) = alt_formulas_one(&mut r, &arr, label) {
            r.fail(vec![], format!("{label}: undefined: {e}"));
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn fix_d1() -> ParameterArray {
        ParameterArray::from_ints(&Field::rational(), &[0, 1], &[0, 1], &[1], &[2]).unwrap()
    }

    #[test]
    fn fix_d1_coefficients() {
        let f = Field::rational();
        let rc = recurrence_coeffs(&fix_d1()).unwrap();
        let v = |xs: &[i64]| xs.iter().map(|&x| f.from_i64(x)).collect::<Vec<_>>();
        assert_eq!(rc.b, v(&[1, 0]));
        assert_eq!(rc.c, v(&[0, -2]));
        assert_eq!(rc.a, v(&[-1, 2]));
        assert_eq!(rc.bstar, v(&[1, 0]));
        assert_eq!(rc.astar, v(&[-1, 2]));
        assert!(verify_three_term(&fix_d1()).ok());
        assert!(verify_difference(&fix_d1()).ok());
        let alt = verify_alt_formulas(&fix_d1());
        assert!(alt.ok(), "{alt}");
    }

    #[test]
    fn d0_coefficients() {
        let f = Field::rational();
        let p = ParameterArray::from_ints(&f, &[4], &[9], &[], &[]).unwrap();
        let rc = recurrence_coeffs(&p).unwrap();
        assert_eq!(rc.a, vec![f.from_i64(4)]);
        assert_eq!(rc.astar, vec![f.from_i64(9)]);
        assert!(verify_three_term(&p).ok());
        assert!(verify_difference(&p).ok());
        assert!(!verify_alt_formulas(&p).ok());
    }

    #[test]
    fn kraw2_all_checks() {
        let p = ParameterArray::from_ints(&Field::rational(), &[0, 1, 2], &[0, 1, 2], &[-4, -4], &[-2, -2])
            .unwrap();
        assert!(verify_three_term(&p).ok());
        assert!(verify_difference(&p).ok());
        assert!(verify_alt_formulas(&p).ok());
    }
}
