//! Manufactured solutions as exactly differentiable separable fields.
//!
//! A [`Univariate`] is a finite sum of atoms `c · xᵖ · e^{a x} · τ(b x)` with
//! `τ ∈ {1, sin, cos}`. That family is closed under differentiation and
//! multiplication, which is all the Laplacian powers of the catalog need.
//! A [`SeparableField`] is a sum of products `X(x) Y(y)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{FemError, Result};
use crate::mesh::Point;
use crate::multiplier::BcKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Trig {
    One,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Atom {
    coeff: f64,
    power: u32,
    rate: f64,
    trig: Trig,
    freq: f64,
}

type AtomKey = (u32, u64, Trig, u64);

impl Atom {
    fn key(&self) -> AtomKey {
        (self.power, self.rate.to_bits(), self.trig, self.freq.to_bits())
    }

    /// Rewrites `sin(-bx)`, `cos(-bx)`, `cos(0)` and `sin(0)` into canonical
    /// form; `None` when the atom vanishes.
    fn normalized(mut self) -> Option<Self> {
        if self.coeff == 0.0 {
            return None;
        }
        // -0.0 and 0.0 must share a key.
        self.rate += 0.0;
        self.freq += 0.0;
        match self.trig {
            Trig::One => self.freq = 0.0,
            Trig::Sin if self.freq == 0.0 => return None,
            Trig::Sin if self.freq < 0.0 => {
                self.freq = -self.freq;
                self.coeff = -self.coeff;
            }
            Trig::Cos if self.freq == 0.0 => self.trig = Trig::One,
            Trig::Cos if self.freq < 0.0 => self.freq = -self.freq,
            _ => {}
        }
        Some(self)
    }

    fn eval(&self, x: f64) -> f64 {
        let mut v = self.coeff * x.powi(self.power as i32);
        if self.rate != 0.0 {
            v *= (self.rate * x).exp();
        }
        match self.trig {
            Trig::One => v,
            Trig::Sin => v * (self.freq * x).sin(),
            Trig::Cos => v * (self.freq * x).cos(),
        }
    }

    fn derivative(&self) -> Vec<Atom> {
        let mut out = Vec::with_capacity(3);
        if self.power > 0 {
            out.push(Atom { coeff: self.coeff * self.power as f64, power: self.power - 1, ..*self });
        }
        if self.rate != 0.0 {
            out.push(Atom { coeff: self.coeff * self.rate, ..*self });
        }
        match self.trig {
            Trig::One => {}
            Trig::Sin => out.push(Atom { coeff: self.coeff * self.freq, trig: Trig::Cos, ..*self }),
            Trig::Cos => out.push(Atom { coeff: -self.coeff * self.freq, trig: Trig::Sin, ..*self }),
        }
        out
    }

    fn product(&self, other: &Atom) -> Vec<Atom> {
        let base = Atom {
            coeff: self.coeff * other.coeff,
            power: self.power + other.power,
            rate: self.rate + other.rate,
            trig: Trig::One,
            freq: 0.0,
        };
        let (b, d) = (self.freq, other.freq);
        let half = |trig, freq, sign: f64| Atom { coeff: 0.5 * sign * base.coeff, trig, freq, ..base };
        match (self.trig, other.trig) {
            (Trig::One, t) => vec![Atom { trig: t, freq: d, ..base }],
            (t, Trig::One) => vec![Atom { trig: t, freq: b, ..base }],
            (Trig::Sin, Trig::Sin) => vec![half(Trig::Cos, b - d, 1.0), half(Trig::Cos, b + d, -1.0)],
            (Trig::Cos, Trig::Cos) => vec![half(Trig::Cos, b - d, 1.0), half(Trig::Cos, b + d, 1.0)],
            (Trig::Sin, Trig::Cos) => vec![half(Trig::Sin, b + d, 1.0), half(Trig::Sin, b - d, 1.0)],
            (Trig::Cos, Trig::Sin) => vec![half(Trig::Sin, b + d, 1.0), half(Trig::Sin, d - b, 1.0)],
        }
    }
}

/// A univariate function in canonical sum-of-atoms form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Univariate {
    atoms: Vec<Atom>,
}

impl Univariate {
    fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        let mut merged: BTreeMap<AtomKey, Atom> = BTreeMap::new();
        for a in atoms.into_iter().filter_map(Atom::normalized) {
            merged
                .entry(a.key())
                .and_modify(|e| e.coeff += a.coeff)
                .or_insert(a);
        }
        Self { atoms: merged.into_values().filter(|a| a.coeff != 0.0).collect() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(&[c])
    }

    /// `Σ coeffs[i] xⁱ`.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::from_atoms(coeffs.iter().enumerate().map(|(p, &c)| Atom {
            coeff: c,
            power: p as u32,
            rate: 0.0,
            trig: Trig::One,
            freq: 0.0,
        }))
    }

    /// `xᵖ (1 − x)ᵖ`, the bubble used by the polynomial examples.
    pub fn bubble(p: u32) -> Self {
        let one_minus_x = Self::polynomial(&[1.0, -1.0]);
        let mut out = Self::polynomial(&[1.0]);
        for _ in 0..p {
            out = out.mul(&Self::polynomial(&[0.0, 1.0])).mul(&one_minus_x);
        }
        out
    }

    pub fn exp(rate: f64) -> Self {
        Self::from_atoms([Atom { coeff: 1.0, power: 0, rate, trig: Trig::One, freq: 0.0 }])
    }

    pub fn sin(freq: f64) -> Self {
        Self::from_atoms([Atom { coeff: 1.0, power: 0, rate: 0.0, trig: Trig::Sin, freq }])
    }

    pub fn cos(freq: f64) -> Self {
        Self::from_atoms([Atom { coeff: 1.0, power: 0, rate: 0.0, trig: Trig::Cos, freq }])
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.atoms.iter().map(|a| a.eval(x)).sum()
    }

    pub fn derivative(&self) -> Self {
        Self::from_atoms(self.atoms.iter().flat_map(Atom::derivative))
    }

    pub fn nth_derivative(&self, m: usize) -> Self {
        (0..m).fold(self.clone(), |d, _| d.derivative())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_atoms(self.atoms.iter().map(|a| Atom { coeff: a.coeff * s, ..*a }))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_atoms(self.atoms.iter().chain(&other.atoms).copied())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_atoms(self.atoms.iter().flat_map(|a| other.atoms.iter().flat_map(move |b| a.product(b))))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeparableField {
    terms: Vec<(Univariate, Univariate)>,
}

impl SeparableField {
    pub fn product(x: Univariate, y: Univariate) -> Self {
        Self { terms: vec![(x, y)] }
    }

    pub fn sum(terms: Vec<(Univariate, Univariate)>) -> Self {
        let mut f = Self { terms };
        f.terms.retain(|(x, y)| !x.is_zero() && !y.is_zero());
        f
    }

    pub fn terms(&self) -> &[(Univariate, Univariate)] {
        &self.terms
    }

    pub fn eval(&self, [x, y]: Point) -> f64 {
        self.terms.iter().map(|(fx, fy)| fx.eval(x) * fy.eval(y)).sum()
    }

    /// `∂ₓᵃ ∂ᵧᵇ` of the field.
    pub fn derivative(&self, a: usize, b: usize) -> Self {
        Self::sum(
            self.terms
                .iter()
                .map(|(fx, fy)| (fx.nth_derivative(a), fy.nth_derivative(b)))
                .collect(),
        )
    }

    pub fn gradient(&self) -> [SeparableField; 2] {
        [self.derivative(1, 0), self.derivative(0, 1)]
    }

    pub fn laplacian(&self) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for (fx, fy) in &self.terms {
            terms.push((fx.nth_derivative(2), fy.clone()));
            terms.push((fx.clone(), fy.nth_derivative(2)));
        }
        Self::sum(terms).compact()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::sum(self.terms.iter().map(|(x, y)| (x.scale(s), y.clone())).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::sum(self.terms.iter().chain(&other.terms).cloned().collect()).compact()
    }

    /// Merges terms sharing the same `y` factor.
    fn compact(self) -> Self {
        let mut out: Vec<(Univariate, Univariate)> = Vec::new();
        for (x, y) in self.terms {
            match out.iter_mut().find(|(_, oy)| *oy == y) {
                Some((ox, _)) => *ox = ox.add(&x),
                None => out.push((x, y)),
            }
        }
        Self::sum(out)
    }
}

/// `Δᵐ g` for `m ∈ {1, 2, 3}`.
pub fn laplacian_power(g: &SeparableField, m: usize) -> Result<SeparableField> {
    if !(1..=3).contains(&m) {
        return Err(FemError::LaplacianPower(m));
    }
    Ok((0..m).fold(g.clone(), |f, _| f.laplacian()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    Ss1,
    Ss2,
    Ss3,
    Cl1,
    Cl2,
}

impl ExampleId {
    pub const ALL: [ExampleId; 5] = [ExampleId::Ss1, ExampleId::Ss2, ExampleId::Ss3, ExampleId::Cl1, ExampleId::Cl2];

    pub fn bc(self) -> BcKind {
        match self {
            ExampleId::Ss1 | ExampleId::Ss2 | ExampleId::Ss3 => BcKind::SimplySupported,
            ExampleId::Cl1 | ExampleId::Cl2 => BcKind::Clamped,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleId::Ss1 => "ss1",
            ExampleId::Ss2 => "ss2",
            ExampleId::Ss3 => "ss3",
            ExampleId::Cl1 => "cl1",
            ExampleId::Cl2 => "cl2",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| FemError::UnknownExample(s.to_string()))
    }
}

/// Exact `u`, `φ = Δu`, `λ = Δ²u` and `f = −Δ³u`.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub id: ExampleId,
    pub bc: BcKind,
    pub description: &'static str,
    pub u: SeparableField,
    pub phi: SeparableField,
    pub lambda: SeparableField,
    pub f: SeparableField,
}

impl ManufacturedCase {
    pub fn from_solution(id: ExampleId, description: &'static str, u: SeparableField) -> Self {
        let phi = u.laplacian();
        let lambda = phi.laplacian();
        let f = lambda.laplacian().scale(-1.0);
        Self { id, bc: id.bc(), description, u, phi, lambda, f }
    }
}

pub fn catalog(id: ExampleId) -> ManufacturedCase {
    use std::f64::consts::PI;
    let b5 = Univariate::bubble(5);
    let b3 = Univariate::bubble(3);
    match id {
        ExampleId::Ss1 => ManufacturedCase::from_solution(
            id,
            "x^5(1-x)^5 y^5(1-y)^5",
            SeparableField::product(b5.clone(), b5),
        ),
        ExampleId::Ss2 => {
            let ex = Univariate::exp(1.0);
            ManufacturedCase::from_solution(
                id,
                "(e^y + e^x) x^5(1-x)^5 y^5(1-y)^5",
                SeparableField::sum(vec![(b5.clone(), ex.mul(&b5)), (ex.mul(&b5), b5)]),
            )
        }
        ExampleId::Ss3 => ManufacturedCase::from_solution(
            id,
            "sin(pi x) sin(pi y)",
            SeparableField::product(Univariate::sin(PI), Univariate::sin(PI)),
        ),
        ExampleId::Cl1 => ManufacturedCase::from_solution(
            id,
            "4096 x^3(1-x)^3 y^3(1-y)^3",
            SeparableField::product(b3.scale(4096.0), b3),
        ),
        ExampleId::Cl2 => {
            let p = b3.scale(4096.0);
            ManufacturedCase::from_solution(
                id,
                "4096 x^3(1-x)^3 y^3(1-y)^3 (2/5 e^x + cos y)",
                SeparableField::sum(vec![
                    (Univariate::exp(1.0).mul(&p).scale(0.4), b3.clone()),
                    (p, Univariate::cos(1.0).mul(&b3)),
                ]),
            )
        }
    }
}

/// Looks up a case by its textual id (`ss1`, …, `cl2`).
pub fn catalog_by_name(name: &str) -> Result<ManufacturedCase> {
    Ok(catalog(name.parse()?))
}
