//! Weights k_i, k*_i, the normalization ν, and the orthogonality relations.

use crate::check::CheckReport;
use crate::field::{product, sum, Elem, FieldError};
use crate::parray::ParameterArray;
use crate::polys::corresponding_polys;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthoData {
    pub k: Vec<Elem>,
    pub kstar: Vec<Elem>,
    pub nu: Elem,
}

/// `Π_{j=1}^d (x_0 − x_j) / Π_{j≠i} (x_i − x_j)`.
fn lagrange_ratio(x: &[Elem], i: usize) -> Result<Elem, FieldError> {
    let f = x[0].field();
    let top = product(f, (1..x.len()).map(|j| &x[0] - &x[j]));
    let bottom = product(f, (0..x.len()).filter(|&j| j != i).map(|j| &x[i] - &x[j]));
    Ok(top * bottom.inv()?)
}

pub fn ortho_data(p: &ParameterArray) -> Result<OrthoData, FieldError> {
    let f = p.field();
    let d = p.d();
    let (th, ts) = (p.theta(), p.theta_star());
    let mut k = Vec::with_capacity(d + 1);
    let mut kstar = Vec::with_capacity(d + 1);
    let mut varphi_prod = f.one();
    let mut phi_prod = f.one();
    let mut phi_rev_prod = f.one();
    for i in 0..=d {
        if i > 0 {
            varphi_prod = varphi_prod * p.varphi_at(i);
            phi_prod = phi_prod * p.phi_at(i);
            phi_rev_prod = phi_rev_prod * p.phi_at(d - i + 1);
        }
        k.push(&varphi_prod * phi_prod.inv()? * lagrange_ratio(ts, i)?);
        kstar.push(&varphi_prod * phi_rev_prod.inv()? * lagrange_ratio(th, i)?);
    }
    let nu = product(f, (1..=d).map(|j| &th[0] - &th[j]))
        * product(f, (1..=d).map(|j| &ts[0] - &ts[j]))
        * phi_prod.inv()?;
    Ok(OrthoData { k, kstar, nu })
}

/// Checks both orthogonality relations for every pair (i, j).
pub fn verify_orthogonality(p: &ParameterArray) -> CheckReport {
    let mut r = CheckReport::new("orthogonality");
    let (table, od) = match (corresponding_polys(p), ortho_data(p)) {
        (Ok(t), Ok(o)) => (t, o),
        (Err(e), _) | (_, Err(e)) => {
            r.fail(vec![], format!("undefined: {e}"));
            return r;
        }
    };
    let f = p.field();
    let n = p.d() + 1;
    let pm = &table.p;
    for i in 0..n {
        for j in 0..n {
            let lhs = sum(f, (0..n).map(|s| pm.get(s, i) * pm.get(s, j) * &od.kstar[s]));
            let rhs = if i == j {
                match od.k[i].inv() {
                    Ok(x) => &od.nu * x,
                    Err(_) => {
                        r.fail(vec![i], format!("k_{i} = 0"));
                        continue;
                    }
                }
            } else {
                f.zero()
            };
            r.expect(lhs == rhs, vec![i, j], || {
                format!("Σ_r f_{i}(θ_r) f_{j}(θ_r) k*_r = {lhs}, expected {rhs}")
            });
            let lhs = sum(f, (0..n).map(|s| pm.get(i, s) * pm.get(j, s) * &od.k[s]));
            let rhs = if i == j {
                match od.kstar[i].inv() {
                    Ok(x) => &od.nu * x,
                    Err(_) => {
                        r.fail(vec![i], format!("k*_{i} = 0"));
                        continue;
                    }
                }
            } else {
                f.zero()
            };
            r.expect(lhs == rhs, vec![i, j], || {
                format!("Σ_r f_r(θ_{i}) f_r(θ_{j}) k_r = {lhs}, expected {rhs}")
            });
        }
    }
    r
}

/// Checks ν = Σ k_r = Σ k*_r and k_0 = k*_0 = 1.
pub fn verify_nu_sums(p: &ParameterArray) -> CheckReport {
    let mut r = CheckReport::new("nu-sums");
    let od = match ortho_data(p) {
        Ok(o) => o,
        Err(e) => {
            r.fail(vec![], format!("undefined: {e}"));
            return r;
        }
    };
    let f = p.field();
    let sk = sum(f, od.k.iter().cloned());
    let sks = sum(f, od.kstar.iter().cloned());
    r.expect(sk == od.nu, vec![], || format!("Σ k_r = {sk} but ν = {}", od.nu));
    r.expect(sks == od.nu, vec![], || format!("Σ k*_r = {sks} but ν = {}", od.nu));
    r.expect(od.k[0].is_one() && od.kstar[0].is_one(), vec![0], || "k_0 or k*_0 != 1".into());
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    #[test]
    fn fix_d1_weights() {
        let f = Field::rational();
        let p = ParameterArray::from_ints(&f, &[0, 1], &[0, 1], &[1], &[2]).unwrap();
        let od = ortho_data(&p).unwrap();
        assert_eq!(od.k, vec![f.one(), f.from_ratio(-1, 2)]);
        assert_eq!(od.kstar, vec![f.one(), f.from_ratio(-1, 2)]);
        assert_eq!(od.nu, f.from_ratio(1, 2));
        assert!(verify_orthogonality(&p).ok());
        assert!(verify_nu_sums(&p).ok());
    }

    #[test]
    fn d0_weights() {
        let f = Field::gf4();
        let p = ParameterArray::new(&f, vec![f.one()], vec![f.zero()], vec![], vec![]).unwrap();
        let od = ortho_data(&p).unwrap();
        assert!(od.k[0].is_one() && od.kstar[0].is_one() && od.nu.is_one());
        assert!(verify_orthogonality(&p).ok());
        assert!(verify_nu_sums(&p).ok());
    }

    #[test]
    fn kraw2_sums() {
        let f = Field::rational();
        let p = ParameterArray::from_ints(&f, &[0, 1, 2], &[0, 1, 2], &[-4, -4], &[-2, -2]).unwrap();
        let od = ortho_data(&p).unwrap();
        assert_eq!(od.nu, sum(&f, od.k.iter().cloned()));
        assert!(verify_orthogonality(&p).ok());
        assert!(verify_nu_sums(&p).ok());
    }

    #[test]
    fn invalid_array_breaks_orthogonality() {
        let f = Field::rational();
        let p = ParameterArray::from_ints(&f, &[0, 1], &[0, 1], &[1], &[3]).unwrap();
        assert!(!verify_orthogonality(&p).ok() || !verify_nu_sums(&p).ok());
    }
}
