use super::{AlgebraError, Assignment, Monomial, Posynomial};

/// Monomial lower bound of a posynomial, tangent at the expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct Condensation {
    pub monomial: Monomial,
    /// Share of each term in the posynomial's value at the expansion point.
    pub weights: Vec<f64>,
}

/// Weighted AM-GM bound `sum_k mu_k >= prod_k (mu_k / c_k)^{c_k}` with
/// `c_k = mu_k(x0) / sum(x0)`.
///
/// The returned monomial never exceeds `sigma` at a positive point and agrees
/// with it at `point`.
pub fn condense(sigma: &Posynomial, point: &Assignment) -> Result<Condensation, AlgebraError> {
    if sigma.is_empty() {
        return Err(AlgebraError::EmptyPosynomial);
    }
    // Shares are computed from log-values so that large dynamic ranges between
    // terms do not underflow before normalization.
    let logs = sigma
        .terms()
        .iter()
        .map(|t| t.ln_abs_value(point))
        .collect::<Result<Vec<_>, _>>()?;
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = scaled.iter().sum();
    let weights: Vec<f64> = scaled.iter().map(|s| s / total).collect();

    let mut ln_coefficient = 0.0;
    let mut monomial = Monomial::constant(1.0);
    for (term, &c) in sigma.terms().iter().zip(&weights) {
        if c == 0.0 {
            continue;
        }
        ln_coefficient += c * (term.coefficient().ln() - c.ln());
        for (&v, &e) in term.exponents() {
            monomial = monomial.with(v, c * e);
        }
    }
    let monomial = monomial.scale(ln_coefficient.exp());
    Ok(Condensation { monomial, weights })
}
