use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial in `(X₁, X₂)` with exact rational coefficients, keyed by the
/// exponent pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn monomial(p: u32, q: u32, coefficient: BigRational) -> Self {
        let mut poly = Polynomial::zero();
        poly.add_term(p, q, coefficient);
        poly
    }

    fn add_term(&mut self, p: u32, q: u32, coefficient: BigRational) {
        let entry = self.terms.entry((p, q)).or_insert_with(BigRational::zero);
        *entry += coefficient;
        if entry.is_zero() {
            self.terms.remove(&(p, q));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &BigRational)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn coefficient(&self, p: u32, q: u32) -> BigRational {
        self.terms.get(&(p, q)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(p, q)| p + q).max()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (&(p, q), c) in &other.terms {
            out.add_term(p, q, c.clone());
        }
        out
    }

    pub fn scale(&self, factor: &BigRational) -> Polynomial {
        let mut out = Polynomial::zero();
        for (&(p, q), c) in &self.terms {
            out.add_term(p, q, c * factor);
        }
        out
    }

    /// Product with `X₁^p X₂^q`.
    pub fn shift(&self, p: u32, q: u32) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(&(a, b), c)| ((a + p, b + q), c.clone())).collect(),
        }
    }

    /// `∂/∂X₁` (`axis = 0`) or `∂/∂X₂` (`axis = 1`).
    pub fn derivative(&self, axis: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (&(p, q), c) in &self.terms {
            let power = if axis == 0 { p } else { q };
            if power == 0 {
                continue;
            }
            let factor = BigRational::from_integer(BigInt::from(power));
            let (a, b) = if axis == 0 { (p - 1, q) } else { (p, q - 1) };
            out.add_term(a, b, c * factor);
        }
        out
    }

    pub fn to_f64(&self) -> PolynomialF64 {
        PolynomialF64 {
            terms: self
                .terms
                .iter()
                .map(|(&(p, q), c)| (p as i32, q as i32, c.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        }
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.to_f64().eval(x1, x2)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(p, q), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})·X1^{p}·X2^{q}")?;
        }
        Ok(())
    }
}

/// Floating-point copy of a [`Polynomial`] for fast evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialF64 {
    terms: Vec<(i32, i32, f64)>,
}

impl PolynomialF64 {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(p, q, c)| c * x1.powi(p) * x2.powi(q))
            .sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermSpec {
    powers: [u32; 2],
    value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaylorFieldSpec {
    k: u32,
    coefficients: Vec<TermSpec>,
}

/// Homogeneous degree-`k` field `b(X) = Σ_{|α|=k} c_α X^α` on `ℝ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorField {
    k: u32,
    b: Polynomial,
}

impl TaylorField {
    /// Builds the field from `((p, q), c)` pairs with `p + q = k`.
    /// Floating coefficients are converted exactly to rationals.
    pub fn new(k: u32, coefficients: &[((u32, u32), f64)]) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("Taylor order k must be positive"));
        }
        let mut b = Polynomial::zero();
        for &((p, q), c) in coefficients {
            if p + q != k {
                return Err(Error::param(format!(
                    "multi-index ({p}, {q}) does not have order {k}"
                )));
            }
            let exact = BigRational::from_float(c)
                .ok_or_else(|| Error::param(format!("coefficient {c} is not finite")))?;
            b.add_term(p, q, exact);
        }
        if b.is_zero() {
            return Err(Error::param("Taylor field needs a nonzero coefficient"));
        }
        Ok(TaylorField { k, b })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: TaylorFieldSpec = serde_json::from_str(text)?;
        let terms: Vec<_> = spec
            .coefficients
            .iter()
            .map(|t| ((t.powers[0], t.powers[1]), t.value))
            .collect();
        TaylorField::new(spec.k, &terms)
    }

    pub fn to_json(&self) -> String {
        let spec = TaylorFieldSpec {
            k: self.k,
            coefficients: self
                .b
                .terms()
                .map(|((p, q), c)| TermSpec {
                    powers: [p, q],
                    value: c.to_f64().unwrap_or(f64::NAN),
                })
                .collect(),
        };
        serde_json::to_string(&spec).expect("plain data serialises")
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn b(&self) -> &Polynomial {
        &self.b
    }
}

/// Vector potential `(A⁰₁, A⁰₂)` with polynomial components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    pub a1: Polynomial,
    pub a2: Polynomial,
    fast: [PolynomialF64; 2],
}

impl PolynomialPotential {
    pub fn new(a1: Polynomial, a2: Polynomial) -> Self {
        let fast = [a1.to_f64(), a2.to_f64()];
        PolynomialPotential { a1, a2, fast }
    }

    /// `∂₁A₂ − ∂₂A₁`, exactly.
    pub fn curl(&self) -> Polynomial {
        self.a2.derivative(0).add(&self.a1.derivative(1).scale(&-BigRational::from_integer(1.into())))
    }

    pub fn eval(&self, x1: f64, x2: f64) -> (f64, f64) {
        (self.fast[0].eval(x1, x2), self.fast[1].eval(x1, x2))
    }
}

/// Radial (Poincaré) gauge `A⁰ = (−X₂ b, X₁ b)/(k+2)`.
pub fn radial_gauge_potential(field: &TaylorField) -> PolynomialPotential {
    let factor = BigRational::new(1.into(), BigInt::from(field.k + 2));
    let scaled = field.b.scale(&factor);
    PolynomialPotential::new(
        scaled.shift(0, 1).scale(&-BigRational::from_integer(1.into())),
        scaled.shift(1, 0),
    )
}
