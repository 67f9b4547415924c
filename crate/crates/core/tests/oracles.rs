//! Brute-force oracles written directly from the axioms, checked against the
//! library's validator and enumerator.

use std::collections::BTreeSet;

use leonard::parray::{enumerate_arrays, validate, Enumerator};
use leonard::{Elem, Field, ParameterArray};

/// PA1–PA5 straight from their definitions, with no shared code.
fn axioms_hold(t: &[Elem], ts: &[Elem], vp: &[Elem], ph: &[Elem]) -> bool {
    let d = t.len() - 1;
    let f = t[0].field();
    let distinct = |xs: &[Elem]| (0..xs.len()).all(|i| (0..i).all(|j| xs[i] != xs[j]));
    if !distinct(t) || !distinct(ts) {
        return false;
    }
    if vp.iter().chain(ph).any(Elem::is_zero) {
        return false;
    }
    if d == 0 {
        return true;
    }
    let denom = (&t[0] - &t[d]).inv().unwrap();
    for i in 1..=d {
        let mut s = f.zero();
        for h in 0..i {
            s = s + (&t[h] - &t[d - h]) * &denom;
        }
        let pa3 = &ph[0] * &s + (&ts[i] - &ts[0]) * (&t[i - 1] - &t[d]);
        let pa4 = &vp[0] * &s + (&ts[i] - &ts[0]) * (&t[d - i + 1] - &t[0]);
        if vp[i - 1] != pa3 || ph[i - 1] != pa4 {
            return false;
        }
    }
    let mut ratio: Option<Elem> = None;
    for i in 2..d {
        for xs in [t, ts] {
            let r = (&xs[i - 2] - &xs[i + 1]) / (&xs[i - 1] - &xs[i]);
            match &ratio {
                None => ratio = Some(r),
                Some(x) if *x == r => {}
                Some(_) => return false,
            }
        }
    }
    true
}

fn tuples(els: &[Elem], len: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                els.iter().map(move |e| {
                    let mut t = t.clone();
                    t.push(e.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn key(p: &ParameterArray) -> String {
    serde_json::to_string(&p.to_json()).unwrap()
}

fn full_space_check(f: &Field, d: usize) -> usize {
    let els = f.elements();
    let thetas = tuples(&els, d + 1);
    let splits = tuples(&els, d);
    let mut found = BTreeSet::new();
    for t in &thetas {
        for ts in &thetas {
            for vp in &splits {
                for ph in &splits {
                    let ok = axioms_hold(t, ts, vp, ph);
                    let p = ParameterArray::new(f, t.clone(), ts.clone(), vp.clone(), ph.clone()).unwrap();
                    assert_eq!(validate(&p).ok(), ok, "validator disagrees on {:?}", p.to_json());
                    if ok {
                        found.insert(key(&p));
                    }
                }
            }
        }
    }
    let listed: BTreeSet<String> = enumerate_arrays(f, d).unwrap().iter().map(key).collect();
    assert_eq!(listed, found, "enumeration over {f}, d = {d}");
    found.len()
}

#[test]
fn enumeration_matches_full_space_filter_gf3() {
    for d in 0..=2 {
        full_space_check(&Field::prime(3).unwrap(), d);
    }
}

#[test]
fn enumeration_matches_full_space_filter_gf4() {
    let f = Field::gf4();
    for d in 0..=2 {
        full_space_check(&f, d);
    }
}

#[test]
fn enumeration_matches_reduced_filter_gf5_d2() {
    // injective θ, θ* and nonzero φ, ϕ: every other point fails PA1 or PA2
    let f = Field::prime(5).unwrap();
    let els = f.elements();
    let nonzero: Vec<Elem> = els.iter().filter(|x| !x.is_zero()).cloned().collect();
    let inj: Vec<Vec<Elem>> = tuples(&els, 3)
        .into_iter()
        .filter(|t| t[0] != t[1] && t[0] != t[2] && t[1] != t[2])
        .collect();
    let splits = tuples(&nonzero, 2);
    let mut found = BTreeSet::new();
    for t in &inj {
        for ts in &inj {
            for vp in &splits {
                for ph in &splits {
                    if axioms_hold(t, ts, vp, ph) {
                        let p = ParameterArray::new(&f, t.clone(), ts.clone(), vp.clone(), ph.clone()).unwrap();
                        found.insert(key(&p));
                    }
                }
            }
        }
    }
    let listed: BTreeSet<String> = enumerate_arrays(&f, 2).unwrap().iter().map(key).collect();
    assert_eq!(listed, found);
}

#[test]
fn parallel_and_sequential_enumeration_agree() {
    let f = Field::prime(5).unwrap();
    let e = Enumerator::new(&f, 3).unwrap();
    assert_eq!(e.collect().unwrap(), e.collect_sequential().unwrap());
}

#[test]
fn no_gf4_array_of_diameter_four() {
    assert!(enumerate_arrays(&Field::gf4(), 4).unwrap().is_empty());
}
