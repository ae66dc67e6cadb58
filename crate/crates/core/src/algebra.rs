//! Structural maps: left-regular representation of a cyclic algebra, the
//! iteration map α_θ, the block-diagonal distribution map, and the reshaping of
//! block-diagonal codewords into NAF cooperation frames.

use std::sync::Arc;

use nalgebra::{DMatrix, Scalar};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactfield::{FieldElement, NumberField};
use crate::matrix::ExactMatrix;

/// Cyclic algebra (K/F, σ, γ) of degree n: ⊕ e^i K with e^n = γ and k·e = e·σ(k).
#[derive(Debug, Clone)]
pub struct CyclicAlgebraSpec {
    pub field: Arc<NumberField>,
    pub sigma: String,
    pub gamma: FieldElement,
    pub degree: usize,
}

impl CyclicAlgebraSpec {
    /// Checks σ^n = id on coordinates and σ(γ) = γ.
    pub fn new(field: &Arc<NumberField>, sigma: &str, gamma: FieldElement, degree: usize) -> Result<Self> {
        if !Arc::ptr_eq(gamma.field(), field) && gamma.field().name() != field.name() {
            return Err(Error::FieldMismatch(field.name().into(), gamma.field().name().into()));
        }
        let order = field.automorphism_order(sigma, degree)?;
        match order {
            Some(o) if degree.is_multiple_of(o) => {}
            _ => {
                return Err(Error::InvalidInput(format!(
                    "{sigma}^{degree} is not the identity on {}",
                    field.name()
                )))
            }
        }
        if gamma.apply_aut(sigma)? != gamma {
            return Err(Error::InvalidInput(format!("γ = {gamma} is not fixed by {sigma}")));
        }
        Ok(Self {
            field: field.clone(),
            sigma: sigma.to_string(),
            gamma,
            degree,
        })
    }

    fn check_coeffs(&self, c: &[FieldElement]) -> Result<()> {
        if c.len() != self.degree {
            return Err(Error::Dimension(format!(
                "{} coefficients for an algebra of degree {}",
                c.len(),
                self.degree
            )));
        }
        for x in c {
            if x.field().name() != self.field.name() {
                return Err(Error::FieldMismatch(self.field.name().into(), x.field().name().into()));
            }
        }
        Ok(())
    }

    /// Product of `Σ e^i c_i` and `Σ e^j d_j`, using e^n = γ and k·e^j = e^j·σ^j(k).
    pub fn mul(&self, c: &[FieldElement], d: &[FieldElement]) -> Result<Vec<FieldElement>> {
        self.check_coeffs(c)?;
        self.check_coeffs(d)?;
        let n = self.degree;
        let mut out = vec![FieldElement::zero(&self.field); n];
        for (i, ci) in c.iter().enumerate() {
            for (j, dj) in d.iter().enumerate() {
                let mut t = &ci.apply_aut_pow(&self.sigma, j)? * dj;
                if i + j >= n {
                    t = &t * &self.gamma;
                }
                out[(i + j) % n] = &out[(i + j) % n] + &t;
            }
        }
        Ok(out)
    }
}

/// Iteration parameters: an involution τ and θ ∈ F^×.
#[derive(Debug, Clone)]
pub struct IterationSpec {
    pub tau: String,
    pub theta: FieldElement,
}

impl IterationSpec {
    /// Checks τ² = id, τ(θ) = θ, τ commuting with complex conjugation and, when an
    /// algebra is given, τσ = στ and τ(γ) = γ. All checks are exact on coordinates.
    pub fn new(tau: &str, theta: FieldElement, alg: Option<&CyclicAlgebraSpec>) -> Result<Self> {
        let field = theta.field().clone();
        let t = field.automorphism(tau)?;
        let d = field.degree();
        let basis = |i| FieldElement::basis(&field, i);
        for i in 0..d {
            let b = basis(i);
            if b.apply_aut_pow(tau, 2)? != b {
                return Err(Error::InvalidInput(format!("{tau} is not an involution")));
            }
            if let Some(conj) = field.conjugation() {
                if b.apply_aut(tau)?.apply_aut(conj)? != b.apply_aut(conj)?.apply_aut(tau)? {
                    return Err(Error::InvalidInput(format!("{tau} does not commute with conjugation")));
                }
            }
            if let Some(alg) = alg {
                let s = &alg.sigma;
                if b.apply_aut(tau)?.apply_aut(s)? != b.apply_aut(s)?.apply_aut(tau)? {
                    return Err(Error::InvalidInput(format!("{tau} does not commute with {s}")));
                }
            }
        }
        if theta.is_zero() || theta.apply_aut(&t.name)? != theta {
            return Err(Error::InvalidInput(format!("θ = {theta} must be nonzero and fixed by {tau}")));
        }
        if let Some(alg) = alg {
            if alg.gamma.apply_aut(tau)? != alg.gamma {
                return Err(Error::InvalidInput(format!("γ is not fixed by {tau}")));
            }
        }
        Ok(Self {
            tau: tau.to_string(),
            theta,
        })
    }
}

/// Matrix of left multiplication by `Σ e^i c_i` over the maximal subfield:
/// entry (i, j) is σ^j(c_{(i−j) mod n}), times γ above the diagonal.
pub fn left_regular_rep(alg: &CyclicAlgebraSpec, coeffs: &[FieldElement]) -> Result<ExactMatrix> {
    alg.check_coeffs(coeffs)?;
    let n = alg.degree;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let c = &coeffs[(i + n - j) % n];
            let mut v = c.apply_aut_pow(&alg.sigma, j)?;
            if i < j {
                v = &alg.gamma * &v;
            }
            row.push(v);
        }
        rows.push(row);
    }
    ExactMatrix::from_rows(rows)
}

/// α_θ(X, Y) = [[X, θτ(Y)], [Y, τ(X)]] with τ applied entrywise.
pub fn iterate_alpha(x: &ExactMatrix, y: &ExactMatrix, it: &IterationSpec) -> Result<ExactMatrix> {
    if x.rows() != y.rows() || x.cols() != y.cols() || !x.is_square() {
        return Err(Error::Dimension(format!(
            "iterate_alpha needs equal square blocks, got {}x{} and {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let ty = y.map_aut(&it.tau)?.scale(&it.theta)?;
    let tx = x.map_aut(&it.tau)?;
    ExactMatrix::block2x2(x, &ty, y, &tx)
}

/// The map η in the distribution f_η^N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Eta {
    Identity,
    Automorphism(String),
}

impl Eta {
    pub fn parse(s: &str) -> Self {
        if s == "id" {
            Eta::Identity
        } else {
            Eta::Automorphism(s.to_string())
        }
    }
}

/// f_η^N(X) = diag(X, η(X), …, η^{N−1}(X)).
pub fn distribute(x: &ExactMatrix, copies: usize, eta: &Eta) -> Result<ExactMatrix> {
    if copies == 0 {
        return Err(Error::InvalidInput("distribute needs N >= 1".into()));
    }
    let blocks = match eta {
        Eta::Identity => vec![x.clone(); copies],
        Eta::Automorphism(name) => {
            let order = x.field().automorphism_order(name, copies)?;
            if !matches!(order, Some(o) if copies.is_multiple_of(o)) {
                return Err(Error::InvalidInput(format!("{name}^{copies} is not the identity")));
            }
            let mut blocks = Vec::with_capacity(copies);
            let mut cur = x.clone();
            for _ in 0..copies {
                let next = cur.map_aut(name)?;
                blocks.push(cur);
                cur = next;
            }
            blocks
        }
    };
    ExactMatrix::block_diag(&blocks)
}

/// Split a block-diagonal codeword with square blocks of size 2·n_s into the
/// per-frame transmit matrices C_i = [Ξ_i(top n_s rows) | Ξ_i(bottom n_s rows)],
/// each n_s × 4n_s.
pub fn reshape_to_naf_frames<T>(x: &DMatrix<T>, n_s: usize) -> Result<Vec<DMatrix<T>>>
where
    T: Scalar + Zero,
{
    let block = 2 * n_s;
    if n_s == 0 || x.nrows() != x.ncols() || !x.nrows().is_multiple_of(block) {
        return Err(Error::Dimension(format!(
            "{}x{} is not a stack of {block}x{block} blocks",
            x.nrows(),
            x.ncols()
        )));
    }
    let blocks = x.nrows() / block;
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if i / block != j / block && !x[(i, j)].is_zero() {
                return Err(Error::InvalidInput(format!(
                    "entry ({i}, {j}) lies off the block diagonal and is nonzero"
                )));
            }
        }
    }
    Ok((0..blocks)
        .map(|b| {
            let xi = x.view((b * block, b * block), (block, block));
            DMatrix::from_fn(n_s, 2 * block, |r, c| {
                if c < block {
                    xi[(r, c)].clone()
                } else {
                    xi[(n_s + r, c - block)].clone()
                }
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;
    use crate::exactfield::{golden_field, silver_field};

    fn silver_algebra() -> CyclicAlgebraSpec {
        let f = silver_field();
        CyclicAlgebraSpec::new(&f, "sigma_s", FieldElement::from_int(&f, -1), 2).unwrap()
    }

    fn golden_algebra() -> CyclicAlgebraSpec {
        let f = golden_field();
        CyclicAlgebraSpec::new(&f, "sigma_g", FieldElement::basis(&f, 1), 2).unwrap()
    }

    #[test]
    fn lambda_of_central_element_is_scalar() {
        let alg = golden_algebra();
        let f = &alg.field;
        // c0 = 2 + 3i lies in F_g = Q(i)
        let c0 = FieldElement::from_ints(f, &[2, 3, 0, 0]).unwrap();
        let m = left_regular_rep(&alg, &[c0.clone(), FieldElement::zero(f)]).unwrap();
        let want = ExactMatrix::identity(f, 2).scale(&c0).unwrap();
        assert_eq!(m, want);
    }

    #[test]
    fn lambda_of_e() {
        let alg = golden_algebra();
        let f = &alg.field;
        let m = left_regular_rep(&alg, &[FieldElement::zero(f), FieldElement::one(f)]).unwrap();
        assert_eq!(m.get(0, 0), &FieldElement::zero(f));
        assert_eq!(m.get(0, 1), &alg.gamma);
        assert_eq!(m.get(1, 0), &FieldElement::one(f));
        assert_eq!(m.get(1, 1), &FieldElement::zero(f));
    }

    #[test]
    fn lambda_matches_template() {
        let alg = silver_algebra();
        let f = &alg.field;
        let c0 = FieldElement::from_ints(f, &[1, 2, 3, 4]).unwrap();
        let c1 = FieldElement::from_ints(f, &[-1, 0, 2, -3]).unwrap();
        let m = left_regular_rep(&alg, &[c0.clone(), c1.clone()]).unwrap();
        assert_eq!(m.get(0, 0), &c0);
        assert_eq!(m.get(0, 1), &(&alg.gamma * &c1.apply_aut("sigma_s").unwrap()));
        assert_eq!(m.get(1, 0), &c1);
        assert_eq!(m.get(1, 1), &c0.apply_aut("sigma_s").unwrap());
    }

    #[test]
    fn lambda_rejects_wrong_arity_and_field() {
        let alg = silver_algebra();
        let one = FieldElement::one(&alg.field);
        assert!(left_regular_rep(&alg, std::slice::from_ref(&one)).is_err());
        let g = FieldElement::one(&golden_field());
        assert!(matches!(
            left_regular_rep(&alg, &[one, g]),
            Err(Error::FieldMismatch(..))
        ));
    }

    #[test]
    fn algebra_spec_checks_gamma_and_order() {
        let f = golden_field();
        // √5 is moved by σ_g
        assert!(CyclicAlgebraSpec::new(&f, "sigma_g", FieldElement::basis(&f, 2), 2).is_err());
        // conj has order 2, not dividing 3
        assert!(CyclicAlgebraSpec::new(&f, "conj", FieldElement::one(&f), 3).is_err());
    }

    #[test]
    fn iteration_spec_checks() {
        let alg = silver_algebra();
        let f = &alg.field;
        assert!(IterationSpec::new("sigma_s", FieldElement::from_int(f, -17), Some(&alg)).is_ok());
        // i is moved by τ = σ_s
        assert!(IterationSpec::new("sigma_s", FieldElement::basis(f, 1), Some(&alg)).is_err());
        assert!(IterationSpec::new("sigma_s", FieldElement::zero(f), Some(&alg)).is_err());
        // σ_m has order 4: not an involution
        let km = crate::exactfield::cyclotomic5_field();
        assert!(IterationSpec::new("sigma_m", FieldElement::one(&km), None).is_err());
    }

    fn small_matrix(f: &Arc<NumberField>, seed: &[i64]) -> ExactMatrix {
        let d = f.degree();
        ExactMatrix::from_fn(f, 2, 2, |i, j| {
            let coords: Vec<i64> = (0..d).map(|k| seed[(i * 2 + j) * d + k]).collect();
            FieldElement::from_ints(f, &coords).unwrap()
        })
    }

    #[test]
    fn alpha_of_identity_and_diagonal() {
        let alg = silver_algebra();
        let f = &alg.field;
        let it = IterationSpec::new("sigma_s", FieldElement::from_int(f, -17), Some(&alg)).unwrap();
        let i2 = ExactMatrix::identity(f, 2);
        let z2 = ExactMatrix::zeros(f, 2, 2);
        assert_eq!(iterate_alpha(&i2, &z2, &it).unwrap(), ExactMatrix::identity(f, 4));
        let x = small_matrix(f, &(0..16).map(|v| v % 5 - 2).collect::<Vec<_>>());
        let want = ExactMatrix::block_diag(&[x.clone(), x.map_aut("sigma_s").unwrap()]).unwrap();
        assert_eq!(iterate_alpha(&x, &z2, &it).unwrap(), want);
        let big = ExactMatrix::identity(f, 3);
        assert!(matches!(iterate_alpha(&i2, &big, &it), Err(Error::Dimension(_))));
    }

    #[test]
    fn distribute_examples() {
        let f = golden_field();
        let x = small_matrix(&f, &(0..16).map(|v| (v * 3) % 7 - 3).collect::<Vec<_>>());
        assert_eq!(distribute(&x, 1, &Eta::Identity).unwrap(), x);
        let d2 = distribute(&x, 2, &Eta::Identity).unwrap();
        assert_eq!(d2, ExactMatrix::block_diag(&[x.clone(), x.clone()]).unwrap());
        let dx = x.det().unwrap();
        assert_eq!(d2.det().unwrap(), &dx * &dx);
        // η = σ_g has order 2
        let tw = distribute(&x, 2, &Eta::Automorphism("sigma_g".into())).unwrap();
        assert_eq!(tw.submatrix(2, 2, 2, 2), x.map_aut("sigma_g").unwrap());
        assert!(distribute(&x, 3, &Eta::Automorphism("sigma_g".into())).is_err());
        assert!(distribute(&x, 0, &Eta::Identity).is_err());
    }

    #[test]
    fn distribute_scales_rank() {
        let f = golden_field();
        let e = |v: i64| FieldElement::from_int(&f, v);
        let x = ExactMatrix::from_rows(vec![vec![e(1), e(2)], vec![e(2), e(4)]]).unwrap();
        assert_eq!(x.rank(), 1);
        for n in 1..4 {
            assert_eq!(distribute(&x, n, &Eta::Identity).unwrap().rank(), n);
        }
    }

    #[test]
    fn reshape_single_block() {
        let x = DMatrix::from_row_slice(2, 2, &[1i64, 2, 3, 4]);
        let frames = reshape_to_naf_frames(&x, 1).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0], DMatrix::from_row_slice(1, 4, &[1i64, 2, 3, 4]));
    }

    #[test]
    fn reshape_two_blocks() {
        let mut x = DMatrix::<i64>::zeros(8, 8);
        for b in 0..2 {
            for i in 0..4 {
                for j in 0..4 {
                    x[(4 * b + i, 4 * b + j)] = (100 * b + 10 * i + j) as i64 + 1;
                }
            }
        }
        let frames = reshape_to_naf_frames(&x, 2).unwrap();
        assert_eq!(frames.len(), 2);
        for (b, c) in frames.iter().enumerate() {
            assert_eq!(c.shape(), (2, 8));
            let xi = x.view((4 * b, 4 * b), (4, 4));
            assert_eq!(c.view((0, 0), (2, 4)), xi.view((0, 0), (2, 4)));
            assert_eq!(c.view((0, 4), (2, 4)), xi.view((2, 0), (2, 4)));
        }
        // permutation of the block entries
        let mut a: Vec<i64> = frames.iter().flat_map(|c| c.iter().copied()).collect();
        let mut b: Vec<i64> = x.iter().copied().filter(|v| *v != 0).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn reshape_rejects_non_block_diagonal() {
        let mut x = DMatrix::<Complex64>::identity(4, 4);
        assert!(reshape_to_naf_frames(&x, 3).is_err());
        x[(0, 3)] = Complex64::new(1.0, 0.0);
        assert!(reshape_to_naf_frames(&x, 1).is_err());
        assert!(reshape_to_naf_frames(&x, 2).is_ok());
    }

    fn rand_elem(f: &Arc<NumberField>, v: &[i64]) -> FieldElement {
        FieldElement::from_ints(f, &v[..f.degree()]).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn lambda_is_multiplicative(v in proptest::collection::vec(-4i64..=4, 16)) {
            for alg in [silver_algebra(), golden_algebra()] {
                let f = alg.field.clone();
                let c = [rand_elem(&f, &v[0..4]), rand_elem(&f, &v[4..8])];
                let d = [rand_elem(&f, &v[8..12]), rand_elem(&f, &v[12..16])];
                let lc = left_regular_rep(&alg, &c).unwrap();
                let ld = left_regular_rep(&alg, &d).unwrap();
                let lcd = left_regular_rep(&alg, &alg.mul(&c, &d).unwrap()).unwrap();
                prop_assert_eq!(lc.try_mul(&ld).unwrap(), lcd);
                let sum: Vec<FieldElement> = c.iter().zip(&d).map(|(a, b)| a + b).collect();
                prop_assert_eq!(lc.try_add(&ld).unwrap(), left_regular_rep(&alg, &sum).unwrap());
            }
        }

        #[test]
        fn alpha_closure_and_additivity(v in proptest::collection::vec(-3i64..=3, 64)) {
            for (alg, theta) in [(silver_algebra(), -17), (silver_algebra(), -1), (golden_algebra(), 0)] {
                let f = alg.field.clone();
                let theta = if theta == 0 {
                    FieldElement::from_ints(&f, &[1, -1, 0, 0]).unwrap()
                } else {
                    FieldElement::from_int(&f, theta)
                };
                let it = IterationSpec::new(&alg.sigma, theta.clone(), Some(&alg)).unwrap();
                let mats: Vec<ExactMatrix> = (0..4)
                    .map(|q| left_regular_rep(&alg, &[rand_elem(&f, &v[q * 16..]), rand_elem(&f, &v[q * 16 + 4..])]).unwrap())
                    .collect();
                let (x, y, x2, y2) = (&mats[0], &mats[1], &mats[2], &mats[3]);
                let lhs = iterate_alpha(x, y, &it).unwrap().try_mul(&iterate_alpha(x2, y2, &it).unwrap()).unwrap();
                let a = x.try_mul(x2).unwrap()
                    .try_add(&y.map_aut(&it.tau).unwrap().scale(&theta).unwrap().try_mul(y2).unwrap()).unwrap();
                let b = y.try_mul(x2).unwrap().try_add(&x.map_aut(&it.tau).unwrap().try_mul(y2).unwrap()).unwrap();
                prop_assert_eq!(lhs, iterate_alpha(&a, &b, &it).unwrap());
                let sum = iterate_alpha(&x.try_add(x2).unwrap(), &y.try_add(y2).unwrap(), &it).unwrap();
                prop_assert_eq!(sum, iterate_alpha(x, y, &it).unwrap().try_add(&iterate_alpha(x2, y2, &it).unwrap()).unwrap());
                // det(α_θ(X, Y)) is fixed by τ
                let det = iterate_alpha(x, y, &it).unwrap().det().unwrap();
                prop_assert_eq!(det.apply_aut(&it.tau).unwrap(), det.clone());
                let num = iterate_alpha(x, y, &it).unwrap().map_aut(&it.tau).unwrap().to_complex().determinant();
                prop_assert!((num - det.embed()).norm() < 1e-9 * (1.0 + num.norm()));
            }
        }
    }
}
