//! The 2×2 Silver and Golden component codes and the 4×4 MIDO code.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactfield::{mido_field, mido_r_coords, rat, rat_frac, FieldElement, NumberField};
use crate::matrix::ExactMatrix;

/// a + b·i as an element of a field whose basis starts with {1, i, …}.
pub fn gaussian(field: &Arc<NumberField>, re: i64, im: i64) -> FieldElement {
    let mut coords = vec![0i64; field.degree()];
    coords[0] = re;
    coords[1] = im;
    FieldElement::from_ints(field, &coords).expect("degree matches")
}

fn check_gaussian(field: &Arc<NumberField>, x: &[FieldElement]) -> Result<()> {
    if x.len() != 4 {
        return Err(Error::Dimension(format!("expected 4 coefficients, got {}", x.len())));
    }
    for v in x {
        if v.field().name() != field.name() {
            return Err(Error::FieldMismatch(field.name().into(), v.field().name().into()));
        }
        let c = v.coords();
        if !v.is_integral() || c[2..].iter().any(|q| *q != rat(0)) {
            return Err(Error::InvalidInput(format!("{v} is not a Gaussian integer")));
        }
    }
    Ok(())
}

fn lin(terms: &[(&FieldElement, &FieldElement)]) -> FieldElement {
    let mut acc = FieldElement::zero(terms[0].0.field());
    for (a, b) in terms {
        acc = &acc + &(*a * *b);
    }
    acc
}

/// Silver code matrix over K_s for Gaussian-integer coefficients x1..x4.
pub fn silver_codeword(x: &[FieldElement]) -> Result<ExactMatrix> {
    let f = crate::exactfield::silver_field();
    check_gaussian(&f, x)?;
    let g = |a, b| gaussian(&f, a, b);
    let s7 = FieldElement::basis(&f, 2);
    let c = |v: &FieldElement| v.conj().expect("K_s has conj");
    let (x1, x2, x3, x4) = (&x[0], &x[1], &x[2], &x[3]);
    let (c1, c2, c3, c4) = (c(x1), c(x2), c(x3), c(x4));
    let entries = [
        lin(&[(x1, &s7), (&g(1, 1), x3), (&g(-1, 2), x4)]),
        lin(&[(&c2, &-&s7), (&g(-1, 2), &c3), (&g(-1, -1), &c4)]),
        lin(&[(x2, &s7), (&g(-1, -2), x3), (&g(-1, 1), x4)]),
        lin(&[(&c1, &s7), (&g(-1, 1), &c3), (&g(1, 2), &c4)]),
    ];
    // 1/√7 = √7/7
    let inv_s7 = s7.scale(&rat_frac(1, 7));
    let rows = vec![
        vec![&entries[0] * &inv_s7, &entries[1] * &inv_s7],
        vec![&entries[2] * &inv_s7, &entries[3] * &inv_s7],
    ];
    ExactMatrix::from_rows(rows)
}

/// Golden code matrix over K_g for Gaussian-integer coefficients x1..x4.
pub fn golden_codeword(x: &[FieldElement]) -> Result<ExactMatrix> {
    let f = crate::exactfield::golden_field();
    check_gaussian(&f, x)?;
    let half = rat_frac(1, 2);
    let omega = FieldElement::from_coords(&f, vec![half.clone(), rat(0), half, rat(0)])?;
    let i = FieldElement::basis(&f, 1);
    let one = FieldElement::one(&f);
    let nu = &(&one + &i) - &(&i * &omega);
    let s = |v: &FieldElement| v.apply_aut("sigma_g").expect("K_g has sigma_g");
    let (omega_s, nu_s) = (s(&omega), s(&nu));
    let (x1, x2, x3, x4) = (&x[0], &x[1], &x[2], &x[3]);
    let inv_s5 = FieldElement::basis(&f, 2).scale(&rat_frac(1, 5));
    let rows = vec![
        vec![
            &(&nu * &(x1 + &(x2 * &omega))) * &inv_s5,
            &(&nu * &(x3 + &(x4 * &omega))) * &inv_s5,
        ],
        vec![
            &(&(&i * &nu_s) * &(x3 + &(x4 * &omega_s))) * &inv_s5,
            &(&nu_s * &(x1 + &(x2 * &omega_s))) * &inv_s5,
        ],
    ];
    ExactMatrix::from_rows(rows)
}

/// x_j = l_{4j−3}(1−ζ) + l_{4j−2}(ζ−ζ²) + l_{4j−1}(ζ²−ζ³) + l_{4j}(ζ³−ζ⁴) in K_m(r).
fn mido_symbols(l: &[i64]) -> Vec<FieldElement> {
    let f = mido_field();
    let zeta = FieldElement::basis(&f, 1);
    let mut pow = vec![FieldElement::one(&f)];
    for k in 1..5 {
        pow.push(&pow[k - 1] * &zeta);
    }
    let basis: Vec<FieldElement> = (0..4).map(|k| &pow[k] - &pow[k + 1]).collect();
    (0..4)
        .map(|j| {
            let mut acc = FieldElement::zero(&f);
            for (t, b) in basis.iter().enumerate() {
                acc = &acc + &b.scale(&rat(l[4 * j + t]));
            }
            acc
        })
        .collect()
}

/// MIDO 4×4 codeword over K_m(r) for 16 integer coefficients.
pub fn mido_codeword(l: &[i64]) -> Result<ExactMatrix> {
    if l.len() != 16 {
        return Err(Error::Dimension(format!("expected 16 integers, got {}", l.len())));
    }
    let f = mido_field();
    let x = mido_symbols(l);
    let r = FieldElement::from_coords(&f, mido_r_coords())?;
    let r2 = &r * &r;
    let r3 = &r2 * &r;
    let c = |v: &FieldElement| v.conj().expect("conj registered");
    let s = |v: &FieldElement| v.apply_aut("sigma_m").expect("sigma_m registered");
    let (x1, x2, x3, x4) = (&x[0], &x[1], &x[2], &x[3]);
    let (s1, s2, s3, s4) = (s(x1), s(x2), s(x3), s(x4));
    let rows = vec![
        vec![x1.clone(), -&(&r2 * &c(x2)), -&(&r3 * &s4), -&(&r * &c(&s3))],
        vec![&r2 * x2, c(x1), &r * &s3, -&(&r3 * &c(&s4))],
        vec![&r * x3, -&(&r3 * &c(x4)), s1.clone(), -&(&r2 * &c(&s2))],
        vec![&r3 * x4, &r * &c(x3), &r2 * &s2, c(&s1)],
    ];
    ExactMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::{golden_field, silver_field};

    fn gs(field: &Arc<NumberField>, v: &[(i64, i64)]) -> Vec<FieldElement> {
        v.iter().map(|&(a, b)| gaussian(field, a, b)).collect()
    }

    #[test]
    fn silver_examples() {
        let f = silver_field();
        let x = silver_codeword(&gs(&f, &[(1, 0), (0, 0), (0, 0), (0, 0)])).unwrap();
        assert_eq!(x, ExactMatrix::identity(&f, 2));
        let x = silver_codeword(&gs(&f, &[(0, 0), (1, 0), (0, 0), (0, 0)])).unwrap();
        let e = |a| FieldElement::from_int(&f, a);
        assert_eq!(x, ExactMatrix::from_rows(vec![vec![e(0), e(-1)], vec![e(1), e(0)]]).unwrap());
        let x = silver_codeword(&gs(&f, &[(0, 0), (0, 0), (1, 0), (0, 0)])).unwrap();
        assert_eq!(x.det().unwrap(), e(-1));
        let z = x.to_complex();
        let s7 = 7f64.sqrt();
        assert!((z[(0, 0)].re - 1.0 / s7).abs() < 1e-15 && (z[(0, 0)].im - 1.0 / s7).abs() < 1e-15);
        assert!((z[(0, 1)].re + 1.0 / s7).abs() < 1e-15 && (z[(0, 1)].im - 2.0 / s7).abs() < 1e-15);
        assert!((z[(1, 1)].re + 1.0 / s7).abs() < 1e-15 && (z[(1, 1)].im - 1.0 / s7).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_gaussian_inputs() {
        let f = silver_field();
        let mut x = gs(&f, &[(1, 0), (0, 0), (0, 0), (0, 0)]);
        x[0] = FieldElement::basis(&f, 2);
        assert!(matches!(silver_codeword(&x), Err(Error::InvalidInput(_))));
        x[0] = FieldElement::from_rational(&f, rat_frac(1, 2));
        assert!(silver_codeword(&x).is_err());
        let g = gs(&golden_field(), &[(1, 0), (0, 0), (0, 0), (0, 0)]);
        assert!(matches!(silver_codeword(&g), Err(Error::FieldMismatch(..))));
        assert!(silver_codeword(&x[..3]).is_err());
    }

    #[test]
    fn golden_examples() {
        let f = golden_field();
        let x = golden_codeword(&gs(&f, &[(1, 0), (0, 0), (0, 0), (0, 0)])).unwrap();
        assert!(x.get(0, 1).is_zero() && x.get(1, 0).is_zero());
        // det = νσ(ν)/5 = (2+i)/5
        let d = x.det().unwrap();
        let want = FieldElement::from_coords(&f, vec![rat_frac(2, 5), rat_frac(1, 5), rat(0), rat(0)]).unwrap();
        assert_eq!(d, want);
        assert!((d.embed().norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);

        let zero = golden_codeword(&gs(&f, &[(0, 0); 4])).unwrap();
        assert!(zero.is_zero());

        let x = golden_codeword(&gs(&f, &[(0, 0), (0, 0), (1, 0), (0, 0)])).unwrap();
        assert!(x.get(0, 0).is_zero() && x.get(1, 1).is_zero());
        let d0 = golden_codeword(&gs(&f, &[(1, 0), (0, 0), (0, 0), (0, 0)])).unwrap();
        // antidiagonal: [[0, ν/√5], [iσ(ν)/√5, 0]]
        assert_eq!(x.get(0, 1), d0.get(0, 0));
        assert_eq!(x.get(1, 0), &(&gaussian(&f, 0, 1) * d0.get(1, 1)));
        assert!((x.det().unwrap().embed().norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mido_examples() {
        let f = mido_field();
        let mut l = [0i64; 16];
        l[0] = 1;
        let x = mido_codeword(&l).unwrap();
        let zeta = FieldElement::basis(&f, 1);
        let one = FieldElement::one(&f);
        let zp = |k: usize| zeta.pow_for_test(k);
        for (idx, k) in [1usize, 4, 3, 2].iter().enumerate() {
            assert_eq!(x.get(idx, idx), &(&one - &zp(*k)));
        }
        assert_eq!(x.det().unwrap(), FieldElement::from_int(&f, 5));
        assert!(mido_codeword(&[0; 16]).unwrap().is_zero());
        assert!(mido_codeword(&[0; 15]).is_err());

        let mut l = [0i64; 16];
        l[4] = 1;
        let x = mido_codeword(&l).unwrap();
        let support = [(1, 0), (0, 1), (3, 2), (2, 3)];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(x.get(i, j).is_zero(), !support.contains(&(i, j)), "({i},{j})");
            }
        }
        let r = FieldElement::from_coords(&f, mido_r_coords()).unwrap();
        let r2 = &r * &r;
        let x2 = &one - &zeta;
        assert_eq!(x.get(1, 0), &(&r2 * &x2));
        assert_eq!(x.get(0, 1), &-&(&r2 * &x2.conj().unwrap()));
        let sx2 = x2.apply_aut("sigma_m").unwrap();
        assert_eq!(x.get(3, 2), &(&r2 * &sx2));
        assert_eq!(x.get(2, 3), &-&(&r2 * &sx2.conj().unwrap()));
    }

    trait PowForTest {
        fn pow_for_test(&self, k: usize) -> FieldElement;
    }

    impl PowForTest for FieldElement {
        fn pow_for_test(&self, k: usize) -> FieldElement {
            let mut acc = FieldElement::one(self.field());
            for _ in 0..k {
                acc = &acc * self;
            }
            acc
        }
    }
}
