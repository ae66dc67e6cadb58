//! Built-in fields and a builder that derives structure constants from a list of
//! generators, each given by its monic minimal polynomial.
//!
//! The basis is the set of monomials `g_0^a_0 · g_1^a_1 · …` with `0 ≤ a_t < deg(g_t)`,
//! indexed with the first generator varying fastest.

use std::f64::consts::PI;
use std::sync::{Arc, LazyLock};

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::field::{rat, rat_frac, Automorphism, ComplexAction, NumberField, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Generator {
    label: String,
    /// Monic minimal polynomial, coefficients from constant term upwards (leading 1 included).
    minpoly: Vec<Rational>,
    embedding: Complex64,
}

impl Generator {
    fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    /// Coordinates of `x^e` over `1, x, …, x^{d-1}`.
    fn power(&self, e: usize) -> Vec<Rational> {
        let d = self.degree();
        let mut v = vec![Rational::zero(); d];
        v[0] = Rational::one();
        for _ in 0..e {
            let top = v[d - 1].clone();
            for i in (1..d).rev() {
                v[i] = v[i - 1].clone() - &top * &self.minpoly[i];
            }
            v[0] = -(&top * &self.minpoly[0]);
        }
        v
    }
}

/// Automorphism specified by the images of the generators.
#[derive(Debug, Clone)]
pub struct GeneratorImages {
    pub name: String,
    /// One coordinate vector (in the full basis) per generator.
    pub images: Vec<Vec<Rational>>,
    pub complex_action: Option<ComplexAction>,
}

#[derive(Debug, Clone, Default)]
pub struct TowerBuilder {
    name: String,
    generators: Vec<Generator>,
    automorphisms: Vec<GeneratorImages>,
}

impl TowerBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn generator(mut self, label: &str, minpoly: Vec<Rational>, embedding: Complex64) -> Self {
        self.generators.push(Generator {
            label: label.to_string(),
            minpoly,
            embedding,
        });
        self
    }

    pub fn automorphism(mut self, aut: GeneratorImages) -> Self {
        self.automorphisms.push(aut);
        self
    }

    fn radices(&self) -> Vec<usize> {
        self.generators.iter().map(Generator::degree).collect()
    }

    pub fn degree(&self) -> usize {
        self.radices().iter().product()
    }

    fn exponents(&self, mut idx: usize) -> Vec<usize> {
        self.radices()
            .iter()
            .map(|&r| {
                let e = idx % r;
                idx /= r;
                e
            })
            .collect()
    }

    /// Index of the monomial with the given exponents (each below its generator's degree).
    pub fn index_of(&self, exps: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (e, r) in exps.iter().zip(self.radices()) {
            idx += e * stride;
            stride *= r;
        }
        idx
    }

    fn label(&self, idx: usize) -> String {
        let parts: Vec<String> = self
            .exponents(idx)
            .iter()
            .zip(&self.generators)
            .filter(|(e, _)| **e > 0)
            .map(|(e, g)| if *e == 1 { g.label.clone() } else { format!("{}^{e}", g.label) })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("·")
        }
    }

    pub fn build(self) -> Result<NumberField> {
        for g in &self.generators {
            if g.minpoly.len() < 2 || !g.minpoly.last().is_some_and(|c| c.is_one()) {
                return Err(Error::InvalidField(format!(
                    "{}: generator {} needs a monic polynomial of degree >= 1",
                    self.name, g.label
                )));
            }
        }
        let d = self.degree();
        let radices = self.radices();
        // reductions of g^e for e < 2·deg(g) - 1
        let powers: Vec<Vec<Vec<Rational>>> = self
            .generators
            .iter()
            .map(|g| (0..2 * g.degree() - 1).map(|e| g.power(e)).collect())
            .collect();

        let mut mul_table = vec![vec![vec![Rational::zero(); d]; d]; d];
        for i in 0..d {
            let ei = self.exponents(i);
            for j in 0..d {
                let ej = self.exponents(j);
                // tensor product of the per-generator reductions
                let mut acc: Vec<(Vec<usize>, Rational)> = vec![(Vec::new(), Rational::one())];
                for (t, _) in radices.iter().enumerate() {
                    let red = &powers[t][ei[t] + ej[t]];
                    let mut next = Vec::new();
                    for (exps, c) in &acc {
                        for (p, rc) in red.iter().enumerate() {
                            if rc.is_zero() {
                                continue;
                            }
                            let mut e = exps.clone();
                            e.push(p);
                            next.push((e, c * rc));
                        }
                    }
                    acc = next;
                }
                for (exps, c) in acc {
                    mul_table[i][j][self.index_of(&exps)] += c;
                }
            }
        }

        let embedding: Vec<Complex64> = (0..d)
            .map(|idx| {
                self.exponents(idx)
                    .iter()
                    .zip(&self.generators)
                    .fold(Complex64::new(1.0, 0.0), |acc, (e, g)| acc * g.embedding.powu(*e as u32))
            })
            .collect();
        let labels = (0..d).map(|i| self.label(i)).collect();

        // First build without automorphisms so products are available.
        let bare = NumberField::new(self.name.clone(), labels, mul_table, embedding, Vec::new())?;
        let mut auts = Vec::new();
        for spec in &self.automorphisms {
            if spec.images.len() != self.generators.len() {
                return Err(Error::InvalidField(format!(
                    "{}: automorphism {} gives {} generator images",
                    self.name,
                    spec.name,
                    spec.images.len()
                )));
            }
            let mut columns = Vec::with_capacity(d);
            for idx in 0..d {
                let mut v = super::field::unit_coords(d);
                for (e, img) in self.exponents(idx).iter().zip(&spec.images) {
                    for _ in 0..*e {
                        v = bare.mul_coords(&v, img);
                    }
                }
                columns.push(v);
            }
            let matrix = (0..d)
                .map(|r| (0..d).map(|c| columns[c][r].clone()).collect())
                .collect();
            auts.push(Automorphism {
                name: spec.name.clone(),
                matrix,
                complex_action: spec.complex_action,
            });
        }
        NumberField::new(
            bare.name().to_string(),
            bare.basis_labels().to_vec(),
            bare.mul_table().to_vec(),
            bare.embedding().to_vec(),
            auts,
        )
    }
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| rat(x)).collect()
}

fn unit_vec(d: usize, idx: usize, scale: Rational) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    v[idx] = scale;
    v
}

/// K_s = Q(i, √7) with basis {1, i, √7, i√7}.
///
/// `sigma_s` fixes √−7 = i√7 (i ↦ −i, √7 ↦ −√7); `conj` is complex conjugation;
/// `sqrt7_flip` is their product (√7 ↦ −√7, i fixed).
pub fn silver_field() -> Arc<NumberField> {
    static FIELD: LazyLock<Arc<NumberField>> = LazyLock::new(|| {
        let b = TowerBuilder::new("K_s")
            .generator("i", ints(&[1, 0, 1]), Complex64::new(0.0, 1.0))
            .generator("√7", ints(&[-7, 0, 1]), Complex64::new(7f64.sqrt(), 0.0));
        let d = b.degree();
        let (i, s7) = (b.index_of(&[1, 0]), b.index_of(&[0, 1]));
        let b = b
            .automorphism(GeneratorImages {
                name: "sigma_s".into(),
                images: vec![unit_vec(d, i, rat(-1)), unit_vec(d, s7, rat(-1))],
                complex_action: None,
            })
            .automorphism(GeneratorImages {
                name: "conj".into(),
                images: vec![unit_vec(d, i, rat(-1)), unit_vec(d, s7, rat(1))],
                complex_action: Some(ComplexAction::Conjugation),
            })
            .automorphism(GeneratorImages {
                name: "sqrt7_flip".into(),
                images: vec![unit_vec(d, i, rat(1)), unit_vec(d, s7, rat(-1))],
                complex_action: None,
            });
        Arc::new(b.build().expect("K_s is well-formed"))
    });
    FIELD.clone()
}

/// K_g = Q(i, √5) with basis {1, i, √5, i√5}; `sigma_g`: √5 ↦ −√5, `conj`: i ↦ −i.
pub fn golden_field() -> Arc<NumberField> {
    static FIELD: LazyLock<Arc<NumberField>> = LazyLock::new(|| {
        let b = TowerBuilder::new("K_g")
            .generator("i", ints(&[1, 0, 1]), Complex64::new(0.0, 1.0))
            .generator("√5", ints(&[-5, 0, 1]), Complex64::new(5f64.sqrt(), 0.0));
        let d = b.degree();
        let (i, s5) = (b.index_of(&[1, 0]), b.index_of(&[0, 1]));
        let b = b
            .automorphism(GeneratorImages {
                name: "sigma_g".into(),
                images: vec![unit_vec(d, i, rat(1)), unit_vec(d, s5, rat(-1))],
                complex_action: None,
            })
            .automorphism(GeneratorImages {
                name: "conj".into(),
                images: vec![unit_vec(d, i, rat(-1)), unit_vec(d, s5, rat(1))],
                complex_action: Some(ComplexAction::Conjugation),
            });
        Arc::new(b.build().expect("K_g is well-formed"))
    });
    FIELD.clone()
}

/// Coordinates of ζ^e in the power basis {1, ζ, ζ², ζ³} of Q(ζ_5), optionally
/// followed by a ρ-exponent block of the given stride.
fn zeta_power(e: usize, d: usize, offset: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    match e % 5 {
        4 => {
            for k in 0..4 {
                v[offset + k] = rat(-1);
            }
        }
        r => v[offset + r] = rat(1),
    }
    v
}

/// K_m = Q(ζ_5) with power basis {1, ζ, ζ², ζ³}; `sigma_m`: ζ ↦ ζ³, `conj`: ζ ↦ ζ⁴.
pub fn cyclotomic5_field() -> Arc<NumberField> {
    static FIELD: LazyLock<Arc<NumberField>> = LazyLock::new(|| {
        let zeta = Complex64::from_polar(1.0, 2.0 * PI / 5.0);
        let b = TowerBuilder::new("K_m")
            .generator("ζ", ints(&[1, 1, 1, 1, 1]), zeta)
            .automorphism(GeneratorImages {
                name: "sigma_m".into(),
                images: vec![zeta_power(3, 4, 0)],
                complex_action: None,
            })
            .automorphism(GeneratorImages {
                name: "conj".into(),
                images: vec![zeta_power(4, 4, 0)],
                complex_action: Some(ComplexAction::Conjugation),
            });
        Arc::new(b.build().expect("K_m is well-formed"))
    });
    FIELD.clone()
}

/// K_m(ρ) with ρ⁴ = 72, ρ = 3·(8/9)^{1/4} > 0. Degree 16, basis ζ^a ρ^b.
///
/// Hosts the MIDO_A4 codewords exactly: r = (8/9)^{1/4} = ρ/3. `sigma_m` and `conj`
/// act on ζ as in K_m and fix ρ.
pub fn mido_field() -> Arc<NumberField> {
    static FIELD: LazyLock<Arc<NumberField>> = LazyLock::new(|| {
        let zeta = Complex64::from_polar(1.0, 2.0 * PI / 5.0);
        let rho = Complex64::new(72f64.powf(0.25), 0.0);
        let b = TowerBuilder::new("K_m(r)")
            .generator("ζ", ints(&[1, 1, 1, 1, 1]), zeta)
            .generator("ρ", ints(&[-72, 0, 0, 0, 1]), rho);
        let d = b.degree();
        let rho_idx = b.index_of(&[0, 1]);
        let b = b
            .automorphism(GeneratorImages {
                name: "sigma_m".into(),
                images: vec![zeta_power(3, d, 0), unit_vec(d, rho_idx, rat(1))],
                complex_action: None,
            })
            .automorphism(GeneratorImages {
                name: "conj".into(),
                images: vec![zeta_power(4, d, 0), unit_vec(d, rho_idx, rat(1))],
                complex_action: Some(ComplexAction::Conjugation),
            });
        Arc::new(b.build().expect("K_m(r) is well-formed"))
    });
    FIELD.clone()
}

/// The scale r = (8/9)^{1/4} expressed in [`mido_field`] as ρ/3.
pub(crate) fn mido_r_coords() -> Vec<Rational> {
    let d = 16;
    unit_vec(d, 4, rat_frac(1, 3))
}

/// Look up a built-in field by name.
pub fn builtin_field(name: &str) -> Option<Arc<NumberField>> {
    match name {
        "K_s" | "silver" => Some(silver_field()),
        "K_g" | "golden" => Some(golden_field()),
        "K_m" | "cyclotomic5" => Some(cyclotomic5_field()),
        "K_m(r)" | "mido" => Some(mido_field()),
        _ => None,
    }
}
