use std::collections::BTreeMap;
use std::fmt;

use super::AlgebraError;

/// Merged terms whose coefficient magnitude falls below this are dropped.
pub const DROP_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    TxPower,
    Amplification,
    /// Auxiliary variable introduced by phase-I searches.
    Slack,
}

/// Optimization variable: a transmit power `p_j` or a sensor amplification `alpha_k`.
/// Indices are zero-based; they print one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId {
    pub kind: VarKind,
    pub index: usize,
}

impl VarId {
    pub fn power(index: usize) -> Self {
        Self {
            kind: VarKind::TxPower,
            index,
        }
    }

    pub fn amplification(index: usize) -> Self {
        Self {
            kind: VarKind::Amplification,
            index,
        }
    }

    pub fn slack(index: usize) -> Self {
        Self {
            kind: VarKind::Slack,
            index,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::TxPower => write!(f, "p{}", self.index + 1),
            VarKind::Amplification => write!(f, "a{}", self.index + 1),
            VarKind::Slack => write!(f, "s{}", self.index + 1),
        }
    }
}

/// Values for a set of variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment(BTreeMap<VarId, f64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, var: VarId, value: f64) -> Option<f64> {
        self.0.insert(var, value)
    }

    pub fn get(&self, var: VarId) -> Option<f64> {
        self.0.get(&var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.0.iter().map(|(v, x)| (*v, *x))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Values of `p_0 .. p_{n-1}`; missing entries read as 0.
    pub fn powers(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| self.get(VarId::power(j)).unwrap_or(0.0))
            .collect()
    }

    /// Values of `alpha_0 .. alpha_{k-1}`; missing entries read as 0.
    pub fn amplifications(&self, k: usize) -> Vec<f64> {
        (0..k)
            .map(|i| self.get(VarId::amplification(i)).unwrap_or(0.0))
            .collect()
    }

    pub fn from_parts(powers: &[f64], amplifications: &[f64]) -> Self {
        let mut out = Self::new();
        for (j, &p) in powers.iter().enumerate() {
            out.insert(VarId::power(j), p);
        }
        for (k, &a) in amplifications.iter().enumerate() {
            out.insert(VarId::amplification(k), a);
        }
        out
    }
}

impl FromIterator<(VarId, f64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

type Signature = Vec<(VarId, u64)>;

/// `c * prod x_v^{e_v}` with a signed, nonzero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    coefficient: f64,
    exponents: BTreeMap<VarId, f64>,
}

impl Monomial {
    pub fn constant(coefficient: f64) -> Self {
        Self {
            coefficient,
            exponents: BTreeMap::new(),
        }
    }

    pub fn var(var: VarId) -> Self {
        Self::constant(1.0).with(var, 1.0)
    }

    /// Multiplies in `var^exponent`.
    pub fn with(mut self, var: VarId, exponent: f64) -> Self {
        let e = self.exponents.entry(var).or_insert(0.0);
        *e += exponent;
        if *e == 0.0 {
            self.exponents.remove(&var);
        }
        self
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn exponents(&self) -> &BTreeMap<VarId, f64> {
        &self.exponents
    }

    pub fn exponent(&self, var: VarId) -> f64 {
        self.exponents.get(&var).copied().unwrap_or(0.0)
    }

    /// Sum of exponents over variables of one kind.
    pub fn degree(&self, kind: VarKind) -> f64 {
        self.exponents
            .iter()
            .filter(|(v, _)| v.kind == kind)
            .map(|(_, e)| e)
            .sum()
    }

    pub fn is_constant(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn evaluate(&self, point: &Assignment) -> Result<f64, AlgebraError> {
        let mut value = self.coefficient;
        for (&var, &e) in &self.exponents {
            let x = point.get(var).ok_or(AlgebraError::UnboundVariable(var))?;
            value *= x.powf(e);
        }
        Ok(value)
    }

    /// Natural log of the value at a positive point, `ln|c| + sum e_v ln x_v`.
    pub fn ln_abs_value(&self, point: &Assignment) -> Result<f64, AlgebraError> {
        let mut value = self.coefficient.abs().ln();
        for (&var, &e) in &self.exponents {
            let x = point.get(var).ok_or(AlgebraError::UnboundVariable(var))?;
            value += e * x.ln();
        }
        Ok(value)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coefficient: self.coefficient * factor,
            exponents: self.exponents.clone(),
        }
    }

    pub fn mul(&self, other: &Monomial) -> Self {
        let mut out = self.scale(other.coefficient);
        for (&v, &e) in &other.exponents {
            out = out.with(v, e);
        }
        out
    }

    pub fn powf(&self, exponent: f64) -> Self {
        Self {
            coefficient: self.coefficient.powf(exponent),
            exponents: self
                .exponents
                .iter()
                .map(|(v, e)| (*v, e * exponent))
                .filter(|(_, e)| *e != 0.0)
                .collect(),
        }
    }

    /// Folds every variable bound in `values` into the coefficient.
    pub fn substitute(&self, values: &Assignment) -> Self {
        let mut out = Monomial::constant(self.coefficient);
        for (&v, &e) in &self.exponents {
            match values.get(v) {
                Some(x) => out.coefficient *= x.powf(e),
                None => {
                    out.exponents.insert(v, e);
                }
            }
        }
        out
    }

    fn signature(&self) -> Signature {
        self.exponents
            .iter()
            .map(|(v, e)| (*v, e.to_bits()))
            .collect()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        for (v, e) in &self.exponents {
            if *e == 1.0 {
                write!(f, "·{v}")?;
            } else {
                write!(f, "·{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sum of monomials with arbitrary signs, merged on identical exponents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Signomial {
    terms: Vec<Monomial>,
}

impl Signomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Merges terms with identical exponent maps and drops near-zero results.
    /// Terms come out sorted by exponent signature.
    pub fn from_terms<I: IntoIterator<Item = Monomial>>(terms: I) -> Self {
        let mut merged: BTreeMap<Signature, Monomial> = BTreeMap::new();
        for term in terms {
            merged
                .entry(term.signature())
                .and_modify(|m| m.coefficient += term.coefficient)
                .or_insert(term);
        }
        Self {
            terms: merged
                .into_values()
                .filter(|m| m.coefficient.abs() >= DROP_THRESHOLD)
                .collect(),
        }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, point: &Assignment) -> Result<f64, AlgebraError> {
        self.terms.iter().map(|t| t.evaluate(point)).sum()
    }

    pub fn add(&self, other: &Signomial) -> Self {
        Self::from_terms(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn sub(&self, other: &Signomial) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Signomial) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .flat_map(|a| other.terms.iter().map(move |b| a.mul(b))),
        )
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| t.scale(factor)))
    }

    pub fn substitute(&self, values: &Assignment) -> Self {
        Self::from_terms(self.terms.iter().map(|t| t.substitute(values)))
    }

    /// Every variable that appears with a nonzero exponent.
    pub fn variables(&self) -> Vec<VarId> {
        let mut vars: Vec<VarId> = self
            .terms
            .iter()
            .flat_map(|t| t.exponents.keys().copied())
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }
}

impl From<Monomial> for Signomial {
    fn from(m: Monomial) -> Self {
        Self::from_terms([m])
    }
}

impl fmt::Display for Signomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, t) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Signomial whose coefficients are all strictly positive.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Posynomial(Signomial);

impl Posynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = Monomial>>(terms: I) -> Result<Self, AlgebraError> {
        Self::try_from(Signomial::from_terms(terms))
    }

    pub fn monomial(m: Monomial) -> Result<Self, AlgebraError> {
        Self::from_terms([m])
    }

    pub fn terms(&self) -> &[Monomial] {
        self.0.terms()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_signomial(&self) -> &Signomial {
        &self.0
    }

    pub fn evaluate(&self, point: &Assignment) -> Result<f64, AlgebraError> {
        self.0.evaluate(point)
    }

    pub fn add(&self, other: &Posynomial) -> Self {
        Self(self.0.add(&other.0))
    }

    pub fn mul(&self, other: &Posynomial) -> Self {
        Self(self.0.mul(&other.0))
    }

    /// # Panics
    ///
    /// If `factor` is not strictly positive.
    pub fn scale(&self, factor: f64) -> Self {
        assert!(factor > 0.0, "posynomials only scale by positive factors");
        Self(self.0.scale(factor))
    }

    pub fn substitute(&self, values: &Assignment) -> Self {
        Self(self.0.substitute(values))
    }

    /// Divides every term by a positive monomial.
    pub fn div_monomial(&self, m: &Monomial) -> Self {
        assert!(m.coefficient > 0.0);
        let inv = m.powf(-1.0);
        Self(Signomial::from_terms(
            self.terms().iter().map(|t| t.mul(&inv)),
        ))
    }

    pub fn variables(&self) -> Vec<VarId> {
        self.0.variables()
    }
}

impl TryFrom<Signomial> for Posynomial {
    type Error = AlgebraError;

    fn try_from(s: Signomial) -> Result<Self, Self::Error> {
        match s.terms.iter().find(|t| !(t.coefficient > 0.0)) {
            Some(t) => Err(AlgebraError::NonPositiveCoefficient(t.coefficient)),
            None => Ok(Self(s)),
        }
    }
}

impl fmt::Display for Posynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Splits `s` into `plus - minus` with both sides posynomials.
pub fn split_signomial(s: &Signomial) -> (Posynomial, Posynomial) {
    let (plus, minus): (Vec<_>, Vec<_>) =
        s.terms().iter().cloned().partition(|t| t.coefficient > 0.0);
    (
        Posynomial(Signomial { terms: plus }),
        Posynomial(Signomial {
            terms: minus.into_iter().map(|t| t.scale(-1.0)).collect(),
        }),
    )
}
