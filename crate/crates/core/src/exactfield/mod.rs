//! Exact arithmetic in the number fields hosting the codes.
//!
//! Fields are described by structure constants over a fixed Q-basis (see
//! [`NumberField`]); elements carry arbitrary-precision rational coordinates. A
//! single embedding into C is fixed per field and used only when leaving exact mode.

mod element;
mod field;
pub mod integral;
mod field_file;
mod towers;

pub use element::{fe_arith, ArithKind, FieldElement};
pub use field::{Automorphism, ComplexAction, NumberField, Rational};
pub use field_file::{load_field_file, parse_field_text};
pub use towers::{
    builtin_field, cyclotomic5_field, golden_field, mido_field, silver_field, GeneratorImages,
    TowerBuilder,
};

pub(crate) use field::{rat, rat_frac};
pub(crate) use towers::mido_r_coords;

use num_complex::Complex64;

use crate::error::Result;

/// Apply the named automorphism.
pub fn fe_apply_aut(a: &FieldElement, aut: &str) -> Result<FieldElement> {
    a.apply_aut(aut)
}

/// Numeric image under the field's fixed embedding.
pub fn fe_embed(a: &FieldElement) -> Complex64 {
    a.embed()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::error::Error;

    fn all_fields() -> Vec<Arc<NumberField>> {
        vec![silver_field(), golden_field(), cyclotomic5_field(), mido_field()]
    }

    #[test]
    fn builtin_fields_satisfy_invariants() {
        for f in all_fields() {
            f.validate().unwrap_or_else(|e| panic!("{e}"));
        }
    }

    #[test]
    fn basis_labels() {
        assert_eq!(silver_field().basis_labels(), ["1", "i", "√7", "i·√7"]);
        assert_eq!(golden_field().basis_labels(), ["1", "i", "√5", "i·√5"]);
        assert_eq!(cyclotomic5_field().basis_labels(), ["1", "ζ", "ζ^2", "ζ^3"]);
        assert_eq!(mido_field().degree(), 16);
    }

    #[test]
    fn golden_unit_and_sqrt5() {
        let f = golden_field();
        let one = FieldElement::one(&f);
        let x = FieldElement::from_ints(&f, &[3, -2, 5, 7]).unwrap();
        assert_eq!(fe_arith(&one, &x, ArithKind::Mul).unwrap(), x);
        let s5 = FieldElement::basis(&f, 2);
        assert_eq!(&s5 * &s5, FieldElement::from_int(&f, 5));
    }

    /// Independent oracle: multiply polynomials in ζ and reduce by ζ^5 = 1 then by
    /// 1 + ζ + ζ² + ζ³ + ζ⁴ = 0.
    fn cyclotomic_reduce(poly: &[i64]) -> [i64; 4] {
        let mut m5 = [0i64; 5];
        for (e, c) in poly.iter().enumerate() {
            m5[e % 5] += c;
        }
        [m5[0] - m5[4], m5[1] - m5[4], m5[2] - m5[4], m5[3] - m5[4]]
    }

    #[test]
    fn zeta_fifth_power_reduces_to_one() {
        let f = cyclotomic5_field();
        let zeta = FieldElement::basis(&f, 1);
        let z4 = &(&zeta * &zeta) * &(&zeta * &zeta);
        let oracle_z4 = cyclotomic_reduce(&[0, 0, 0, 0, 1]);
        assert_eq!(z4, FieldElement::from_ints(&f, &oracle_z4).unwrap());
        assert_eq!(&z4 * &zeta, FieldElement::one(&f));
        assert_eq!(cyclotomic_reduce(&[0, 0, 0, 0, 0, 1]), [1, 0, 0, 0]);
    }

    #[test]
    fn sigma_g_negates_sqrt5() {
        let f = golden_field();
        let s5 = FieldElement::basis(&f, 2);
        assert_eq!(fe_apply_aut(&s5, "sigma_g").unwrap(), -&s5);
    }

    #[test]
    fn sigma_m_twice_maps_zeta_to_zeta4() {
        let f = cyclotomic5_field();
        let zeta = FieldElement::basis(&f, 1);
        let twice = zeta.apply_aut_pow("sigma_m", 2).unwrap();
        // oracle: ζ ↦ ζ³ ↦ (ζ³)³ = ζ⁹
        let mut poly = vec![0i64; 10];
        poly[9] = 1;
        assert_eq!(twice, FieldElement::from_ints(&f, &cyclotomic_reduce(&poly)).unwrap());
        assert_eq!(f.automorphism_order("sigma_m", 8).unwrap(), Some(4));
    }

    #[test]
    fn automorphisms_fix_unit() {
        for f in all_fields() {
            for aut in f.automorphisms() {
                let one = FieldElement::one(&f);
                assert_eq!(one.apply_aut(&aut.name).unwrap(), one);
            }
        }
    }

    #[test]
    fn unknown_automorphism_is_an_error() {
        let x = FieldElement::one(&golden_field());
        assert!(matches!(x.apply_aut("nope"), Err(Error::UnknownAutomorphism(..))));
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let a = FieldElement::one(&golden_field());
        let b = FieldElement::one(&silver_field());
        assert!(matches!(fe_arith(&a, &b, ArithKind::Add), Err(Error::FieldMismatch(..))));
    }

    #[test]
    fn embeddings() {
        let f = golden_field();
        let omega = FieldElement::from_coords(
            &f,
            vec![rat_frac(1, 2), rat(0), rat_frac(1, 2), rat(0)],
        )
        .unwrap();
        assert!((fe_embed(&omega).re - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert_eq!(fe_embed(&FieldElement::zero(&f)), Complex64::new(0.0, 0.0));
        let zeta = FieldElement::basis(&cyclotomic5_field(), 1);
        let expected = Complex64::from_polar(1.0, 2.0 * PI / 5.0);
        assert!((fe_embed(&zeta) - expected).norm() < 1e-15);
        let s7 = FieldElement::basis(&silver_field(), 2);
        assert!((fe_embed(&s7).re - 7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mido_field_r_power_four() {
        let f = mido_field();
        let r = FieldElement::from_coords(&f, mido_r_coords()).unwrap();
        let r4 = &(&r * &r) * &(&r * &r);
        assert_eq!(r4, FieldElement::from_rational(&f, rat_frac(8, 9)));
        assert!((r.embed().re - (8f64 / 9.0).powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn inverse_roundtrip() {
        for f in all_fields() {
            let d = f.degree();
            let coords: Vec<i64> = (0..d as i64).map(|i| (i * 7 + 3) % 5 - 2).collect();
            let x = FieldElement::from_ints(&f, &coords).unwrap();
            let inv = x.inverse().expect("nonzero");
            assert_eq!(&x * &inv, FieldElement::one(&f));
        }
        assert!(FieldElement::zero(&golden_field()).inverse().is_none());
    }

    #[test]
    fn tau_involution_and_commutation() {
        // (field, τ, σ) pairs used by the iterated codes
        for (f, tau, sigma) in [
            (silver_field(), "sigma_s", "sigma_s"),
            (golden_field(), "sigma_g", "sigma_g"),
        ] {
            let t = &f.automorphism(tau).unwrap().matrix;
            let s = &f.automorphism(sigma).unwrap().matrix;
            let c = &f.automorphism("conj").unwrap().matrix;
            let d = f.degree();
            let id = field::mat_mul(t, t, d);
            for (i, row) in id.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    assert_eq!(*v, rat(i64::from(i == j)));
                }
            }
            assert_eq!(field::mat_mul(t, s, d), field::mat_mul(s, t, d));
            assert_eq!(field::mat_mul(t, c, d), field::mat_mul(c, t, d));
        }
    }

    #[test]
    fn display_is_readable() {
        let f = golden_field();
        let x = FieldElement::from_coords(&f, vec![rat(1), rat(-1), rat_frac(1, 2), rat(0)]).unwrap();
        assert_eq!(x.to_string(), "1 - i + 1/2·√5");
        assert_eq!(FieldElement::zero(&f).to_string(), "0");
    }

    fn elem(f: &Arc<NumberField>, v: &[i64]) -> FieldElement {
        FieldElement::from_ints(f, &v[..f.degree()]).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn automorphisms_are_multiplicative(
            x in proptest::collection::vec(-5i64..=5, 16),
            y in proptest::collection::vec(-5i64..=5, 16),
        ) {
            for f in all_fields() {
                let (a, b) = (elem(&f, &x), elem(&f, &y));
                let ab = &a * &b;
                for aut in f.automorphisms() {
                    let lhs = ab.apply_aut(&aut.name).unwrap();
                    let rhs = &a.apply_aut(&aut.name).unwrap() * &b.apply_aut(&aut.name).unwrap();
                    prop_assert_eq!(lhs, rhs);
                    if aut.complex_action == Some(ComplexAction::Conjugation) {
                        let img = a.apply_aut(&aut.name).unwrap().embed();
                        let want = a.embed().conj();
                        prop_assert!((img - want).norm() < 1e-12 * (1.0 + want.norm()));
                    }
                }
                let prod = ab.embed();
                let want = a.embed() * b.embed();
                prop_assert!((prod - want).norm() < 1e-9 * (1.0 + want.norm()));
            }
        }
    }
}
