//! TOML description of additional fields.
//!
//! ```toml
//! name = "Q(√2)"
//! degree = 2                      # optional, checked when present
//!
//! [[generators]]
//! label = "√2"
//! minpoly = [-2, 0, 1]            # monic, constant term first; integers or "p/q" strings
//! embedding = [1.4142135623730951, 0.0]
//!
//! [[automorphisms]]
//! name = "flip"
//! complex_action = "identity"     # optional: "identity" | "conjugation"
//! images = [[0, -1]]              # image of each generator, in the full basis
//! # matrix = [[1, 0], [0, -1]]    # alternatively the full coordinate matrix
//! ```

use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::Deserialize;

use super::field::{rat, Automorphism, ComplexAction, NumberField, Rational};
use super::towers::{GeneratorImages, TowerBuilder};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Int(i64),
    Text(String),
}

impl RationalRepr {
    fn parse(&self) -> Result<Rational> {
        match self {
            RationalRepr::Int(n) => Ok(rat(*n)),
            RationalRepr::Text(s) => parse_rational(s),
        }
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorDesc {
    label: String,
    minpoly: Vec<RationalRepr>,
    embedding: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomorphismDesc {
    name: String,
    #[serde(default)]
    complex_action: Option<ComplexAction>,
    #[serde(default)]
    images: Option<Vec<Vec<RationalRepr>>>,
    #[serde(default)]
    matrix: Option<Vec<Vec<RationalRepr>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDesc {
    name: String,
    #[serde(default)]
    degree: Option<usize>,
    generators: Vec<GeneratorDesc>,
    #[serde(default)]
    automorphisms: Vec<AutomorphismDesc>,
}

fn parse_vec(v: &[RationalRepr]) -> Result<Vec<Rational>> {
    v.iter().map(RationalRepr::parse).collect()
}

/// Parse and validate a field description.
pub fn parse_field_text(text: &str) -> Result<Arc<NumberField>> {
    let desc: FieldDesc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut builder = TowerBuilder::new(desc.name.clone());
    for g in &desc.generators {
        builder = builder.generator(
            &g.label,
            parse_vec(&g.minpoly)?,
            Complex64::new(g.embedding[0], g.embedding[1]),
        );
    }
    let degree = builder.degree();
    if let Some(d) = desc.degree {
        if d != degree {
            return Err(Error::InvalidField(format!(
                "{}: declared degree {d}, generators give {degree}",
                desc.name
            )));
        }
    }
    let mut explicit = Vec::new();
    for a in &desc.automorphisms {
        match (&a.images, &a.matrix) {
            (Some(images), None) => {
                builder = builder.automorphism(GeneratorImages {
                    name: a.name.clone(),
                    images: images.iter().map(|v| parse_vec(v)).collect::<Result<_>>()?,
                    complex_action: a.complex_action,
                });
            }
            (None, Some(m)) => explicit.push(Automorphism {
                name: a.name.clone(),
                matrix: m.iter().map(|r| parse_vec(r)).collect::<Result<_>>()?,
                complex_action: a.complex_action,
            }),
            _ => {
                return Err(Error::InvalidField(format!(
                    "automorphism {} needs exactly one of `images` or `matrix`",
                    a.name
                )))
            }
        }
    }
    let built = builder.build()?;
    let mut auts = built.automorphisms().to_vec();
    auts.extend(explicit);
    let field = NumberField::new(
        built.name().to_string(),
        built.basis_labels().to_vec(),
        built.mul_table().to_vec(),
        built.embedding().to_vec(),
        auts,
    )?;
    field.validate()?;
    Ok(Arc::new(field))
}

pub fn load_field_file(path: &Path) -> Result<Arc<NumberField>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_field_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::FieldElement;

    #[test]
    fn parses_quadratic_field() {
        let text = r#"
            name = "Q(sqrt2)"
            degree = 2
            [[generators]]
            label = "√2"
            minpoly = [-2, 0, 1]
            embedding = [1.4142135623730951, 0.0]
            [[automorphisms]]
            name = "flip"
            complex_action = "identity"
            images = [[0, -1]]
            [[automorphisms]]
            name = "flip_matrix"
            matrix = [[1, 0], [0, "-1"]]
        "#;
        let f = parse_field_text(text).unwrap();
        assert_eq!(f.degree(), 2);
        let s = FieldElement::basis(&f, 1);
        assert_eq!(&s * &s, FieldElement::from_int(&f, 2));
        assert_eq!(s.apply_aut("flip").unwrap(), -&s);
        assert_eq!(s.apply_aut("flip_matrix").unwrap(), -&s);
    }

    #[test]
    fn rejects_non_multiplicative_automorphism() {
        let text = r#"
            name = "bad"
            [[generators]]
            label = "√2"
            minpoly = [-2, 0, 1]
            embedding = [1.4142135623730951, 0.0]
            [[automorphisms]]
            name = "double"
            matrix = [[1, 0], [0, 2]]
        "#;
        assert!(matches!(parse_field_text(text), Err(Error::InvalidField(_))));
    }

    #[test]
    fn rejects_wrong_degree_and_bad_embedding() {
        let text = r#"
            name = "bad"
            degree = 3
            [[generators]]
            label = "√2"
            minpoly = [-2, 0, 1]
            embedding = [1.4142135623730951, 0.0]
        "#;
        assert!(parse_field_text(text).is_err());
        let text = r#"
            name = "bad"
            [[generators]]
            label = "√2"
            minpoly = [-2, 0, 1]
            embedding = [1.5, 0.0]
        "#;
        assert!(parse_field_text(text).is_err());
    }

    #[test]
    fn parses_rational_strings() {
        assert_eq!(parse_rational("-3/6").unwrap(), Rational::new((-1).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
