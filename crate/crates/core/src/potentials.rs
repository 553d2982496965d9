//! Spherically symmetric interaction potentials with exact derivatives.
//!
//! Every model is a finite sum of power-law terms `c·r^p`, so derivatives of
//! any order come from the falling factorial `c·p(p−1)···(p−j+1)·r^(p−j)`.
//! The relativistically corrected potential `γ = V − V²/2η` gets its
//! derivatives from the Leibniz rule on `V²`.
//!
//! Units: `r` in GeV⁻¹ and `V` in GeV.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::ParticlePair;

/// Highest derivative order used anywhere in the expansion (the `r0⁸/720`
/// term of δ₆).
pub const MAX_DERIVATIVE_ORDER: usize = 6;

/// Values `f, f', …, f⁽⁶⁾` at one radius.
pub type DerivativeStack = [f64; MAX_DERIVATIVE_ORDER + 1];

/// One monomial `coefficient · r^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub power: f64,
}

impl PowerTerm {
    pub fn new(coefficient: f64, power: f64) -> Self {
        Self { coefficient, power }
    }

    fn derivative(&self, r: f64, order: usize) -> f64 {
        let mut factor = self.coefficient;
        for i in 0..order {
            factor *= self.power - i as f64;
        }
        if factor == 0.0 {
            return 0.0;
        }
        let exponent = self.power - order as f64;
        if exponent.fract() == 0.0 && exponent.abs() < 64.0 {
            factor * r.powi(exponent as i32)
        } else {
            factor * r.powf(exponent)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialModel {
    /// `V = −α/r`.
    Coulomb { alpha: f64 },
    /// `V = k r²/2`.
    Oscillator { k: f64 },
    /// `V = b r`.
    Linear { b: f64 },
    /// Cornell form `V = −α/r + b r`.
    CoulombPlusLinear { alpha: f64, b: f64 },
    /// Arbitrary finite sum of power-law terms.
    Custom { terms: Vec<PowerTerm> },
}

impl PotentialModel {
    pub fn coulomb(alpha: f64) -> Self {
        Self::Coulomb { alpha }
    }

    pub fn oscillator(k: f64) -> Self {
        Self::Oscillator { k }
    }

    pub fn linear(b: f64) -> Self {
        Self::Linear { b }
    }

    pub fn cornell(alpha: f64, b: f64) -> Self {
        Self::CoulombPlusLinear { alpha, b }
    }

    pub fn custom(terms: Vec<PowerTerm>) -> Self {
        Self::Custom { terms }
    }

    /// The model written as a sum of monomials.
    pub fn terms(&self) -> Vec<PowerTerm> {
        match self {
            Self::Coulomb { alpha } => vec![PowerTerm::new(-alpha, -1.0)],
            Self::Oscillator { k } => vec![PowerTerm::new(0.5 * k, 2.0)],
            Self::Linear { b } => vec![PowerTerm::new(*b, 1.0)],
            Self::CoulombPlusLinear { alpha, b } => {
                vec![PowerTerm::new(-alpha, -1.0), PowerTerm::new(*b, 1.0)]
            }
            Self::Custom { terms } => terms.clone(),
        }
    }

    pub fn evaluate(&self, r: f64) -> Result<f64> {
        self.derivative(r, 0)
    }

    pub fn derivative(&self, r: f64, order: usize) -> Result<f64> {
        check_radius(r)?;
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(self.derivative_unchecked(r, order))
    }

    pub(crate) fn derivative_unchecked(&self, r: f64, order: usize) -> f64 {
        match self {
            Self::Custom { terms } => terms.iter().map(|t| t.derivative(r, order)).sum(),
            other => other.terms().iter().map(|t| t.derivative(r, order)).sum(),
        }
    }

    /// `V, V', …, V⁽⁶⁾` at `r`.
    pub fn derivatives(&self, r: f64) -> Result<DerivativeStack> {
        check_radius(r)?;
        let mut stack = [0.0; MAX_DERIVATIVE_ORDER + 1];
        for (j, v) in stack.iter_mut().enumerate() {
            *v = self.derivative_unchecked(r, j);
        }
        Ok(stack)
    }

    /// j-th derivative of `γ = V − V²/2η`.
    pub fn gamma_derivative(&self, pair: &ParticlePair, r: f64, order: usize) -> Result<f64> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        let v = self.derivatives(r)?;
        Ok(gamma_from_stack(&v, pair.eta(), order))
    }

    /// `γ, γ', …, γ⁽⁶⁾` at `r`.
    pub fn gamma_derivatives(&self, pair: &ParticlePair, r: f64) -> Result<DerivativeStack> {
        let v = self.derivatives(r)?;
        let mut out = [0.0; MAX_DERIVATIVE_ORDER + 1];
        for (j, g) in out.iter_mut().enumerate() {
            *g = gamma_from_stack(&v, pair.eta(), j);
        }
        Ok(out)
    }

    /// Net coefficient of the `1/r` terms; `−α` for a Coulomb attraction.
    pub fn inverse_r_coefficient(&self) -> f64 {
        self.terms()
            .iter()
            .filter(|t| t.power == -1.0)
            .map(|t| t.coefficient)
            .sum()
    }

    /// Most singular power present with a non-zero coefficient.
    pub fn leading_singular_power(&self) -> Option<f64> {
        self.terms()
            .iter()
            .filter(|t| t.coefficient != 0.0 && t.power < 0.0)
            .map(|t| t.power)
            .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.min(p))))
    }

    /// Open interval of `r` on which `V'(r) > 0`, when it is known in closed
    /// form. Custom sums are sampled on a logarithmic grid over `[1e-3, 1e3]`
    /// and report the outermost increasing stretch that was seen.
    pub fn increasing_interval(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Coulomb { alpha } => (alpha > 0.0).then_some((0.0, f64::INFINITY)),
            Self::Oscillator { k } => (k > 0.0).then_some((0.0, f64::INFINITY)),
            Self::Linear { b } => (b > 0.0).then_some((0.0, f64::INFINITY)),
            Self::CoulombPlusLinear { alpha, b } => {
                // V' = α/r² + b
                if alpha >= 0.0 && b >= 0.0 && alpha + b > 0.0 {
                    Some((0.0, f64::INFINITY))
                } else if alpha < 0.0 && b > 0.0 {
                    Some(((-alpha / b).sqrt(), f64::INFINITY))
                } else if alpha > 0.0 && b < 0.0 {
                    Some((0.0, (alpha / -b).sqrt()))
                } else {
                    None
                }
            }
            Self::Custom { .. } => {
                let samples = 600;
                let (lo, hi) = (1e-3_f64, 1e3_f64);
                let ratio = (hi / lo).ln() / samples as f64;
                let mut best: Option<(f64, f64)> = None;
                let mut start: Option<f64> = None;
                for i in 0..=samples {
                    let r = lo * (ratio * i as f64).exp();
                    let up = self.derivative_unchecked(r, 1) > 0.0;
                    match (up, start) {
                        (true, None) => start = Some(r),
                        (false, Some(s)) => {
                            best = Some((s, r));
                            start = None;
                        }
                        _ => {}
                    }
                }
                if let Some(s) = start {
                    best = Some((s, f64::INFINITY));
                }
                best
            }
        }
    }
}

/// j-th derivative of `V − V²/2η` from the derivative stack of `V`.
///
/// With `eta = ∞` the quadratic piece is exactly zero, so the result is
/// bitwise equal to `v[order]`.
pub fn gamma_from_stack(v: &DerivativeStack, eta: f64, order: usize) -> f64 {
    let mut square = 0.0;
    let mut binom = 1.0;
    for k in 0..=order {
        square += binom * v[k] * v[order - k];
        binom = binom * (order - k) as f64 / (k + 1) as f64;
    }
    v[order] - square / (2.0 * eta)
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must be positive, got r = {r}")))
    }
}

impl fmt::Display for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Coulomb { alpha } => write!(f, "coulomb:alpha={alpha}"),
            Self::Oscillator { k } => write!(f, "oscillator:k={k}"),
            Self::Linear { b } => write!(f, "linear:b={b}"),
            Self::CoulombPlusLinear { alpha, b } => write!(f, "cornell:alpha={alpha},b={b}"),
            Self::Custom { terms } => {
                f.write_str("custom:")?;
                if terms.is_empty() {
                    return f.write_str("0");
                }
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{}*r^{}", t.coefficient, t.power)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for PotentialModel {
    type Err = Error;

    /// Parses `coulomb:alpha=…`, `oscillator:k=…`, `linear:b=…`,
    /// `cornell:alpha=…,b=…` and `custom:c1*r^p1+c2*r^p2+…`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| bad_spec(s, "expected `<kind>:<parameters>`"))?;
        let kind = kind.trim().to_ascii_lowercase();
        if kind == "custom" {
            return parse_custom(body).map(|terms| Self::Custom { terms });
        }
        let params = parse_params(s, body)?;
        let get = |name: &str| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| bad_spec(s, &format!("missing parameter `{name}`")))
        };
        let expect = |names: &[&str]| -> Result<()> {
            if let Some((k, _)) = params.iter().find(|(k, _)| !names.contains(&k.as_str())) {
                return Err(bad_spec(s, &format!("unknown parameter `{k}`")));
            }
            Ok(())
        };
        match kind.as_str() {
            "coulomb" => {
                expect(&["alpha"])?;
                Ok(Self::Coulomb {
                    alpha: get("alpha")?,
                })
            }
            "oscillator" => {
                expect(&["k"])?;
                Ok(Self::Oscillator { k: get("k")? })
            }
            "linear" => {
                expect(&["b"])?;
                Ok(Self::Linear { b: get("b")? })
            }
            "cornell" | "coulomb_plus_linear" => {
                expect(&["alpha", "b"])?;
                Ok(Self::CoulombPlusLinear {
                    alpha: get("alpha")?,
                    b: get("b")?,
                })
            }
            other => Err(bad_spec(s, &format!("unknown potential kind `{other}`"))),
        }
    }
}

fn bad_spec(spec: &str, why: &str) -> Error {
    Error::InvalidInput(format!("cannot parse potential `{spec}`: {why}"))
}

fn parse_number(spec: &str, text: &str) -> Result<f64> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|_| bad_spec(spec, &format!("`{}` is not a number", text.trim())))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad_spec(spec, "parameters must be finite"))
    }
}

fn parse_params(spec: &str, body: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for item in body.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| bad_spec(spec, &format!("expected `name=value`, got `{item}`")))?;
        let k = k.trim().to_ascii_lowercase();
        if out.iter().any(|(existing, _)| *existing == k) {
            return Err(bad_spec(spec, &format!("parameter `{k}` given twice")));
        }
        out.push((k, parse_number(spec, v)?));
    }
    Ok(out)
}

fn parse_custom(body: &str) -> Result<Vec<PowerTerm>> {
    let spec = format!("custom:{body}");
    let compact: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad_spec(&spec, "no terms"));
    }
    // Split at signs that start a new term: not the leading sign, and not a
    // sign belonging to an exponent (`e-3`, `^-1`) or a factor (`*-2`).
    let mut pieces = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for c in compact.chars() {
        let starts_term = (c == '+' || c == '-')
            && prev.is_some_and(|p| !matches!(p, 'e' | 'E' | '^' | '*' | '+' | '-'));
        if starts_term {
            pieces.push(std::mem::take(&mut current));
        }
        if !(starts_term && c == '+') {
            current.push(c);
        }
        prev = Some(c);
    }
    pieces.push(current);

    let mut terms = Vec::with_capacity(pieces.len());
    for piece in pieces {
        let piece = piece.strip_prefix('+').unwrap_or(&piece);
        if piece.is_empty() {
            return Err(bad_spec(&spec, "empty term"));
        }
        let (coef_text, r_part) = match piece.find('r') {
            Some(idx) => (&piece[..idx], Some(&piece[idx..])),
            None => (piece, None),
        };
        let coefficient = match coef_text.strip_suffix('*').unwrap_or(coef_text) {
            "" | "+" => 1.0,
            "-" => -1.0,
            text => parse_number(&spec, text)?,
        };
        let power = match r_part {
            None => 0.0,
            Some("r") => 1.0,
            Some(rest) => {
                let exp = rest
                    .strip_prefix("r^")
                    .ok_or_else(|| bad_spec(&spec, &format!("malformed term `{piece}`")))?;
                parse_number(&spec, exp.trim_start_matches('(').trim_end_matches(')'))?
            }
        };
        terms.push(PowerTerm::new(coefficient, power));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair() -> ParticlePair {
        ParticlePair::equal(1.45).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(PotentialModel::coulomb(0.25).evaluate(2.0).unwrap(), -0.125);
        assert_eq!(PotentialModel::linear(0.18).evaluate(1.0).unwrap(), 0.18);
        let v = PotentialModel::cornell(0.25, 0.18).evaluate(1.0).unwrap();
        assert!((v + 0.07).abs() < 1e-15);
    }

    #[test]
    fn non_positive_radius_is_a_domain_error() {
        let p = PotentialModel::linear(0.18);
        assert!(matches!(p.evaluate(0.0), Err(Error::Domain(_))));
        assert!(matches!(p.evaluate(-1.0), Err(Error::Domain(_))));
        assert!(matches!(p.derivative(f64::NAN, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_examples() {
        // V^(j) = −α(−1)^j j! r^(−j−1)
        let d2 = PotentialModel::coulomb(0.25).derivative(1.0, 2).unwrap();
        assert!((d2 + 0.5).abs() < 1e-15);
        assert_eq!(PotentialModel::linear(0.18).derivative(3.7, 3).unwrap(), 0.0);
        assert_eq!(PotentialModel::oscillator(1.0).derivative(3.0, 2).unwrap(), 1.0);
    }

    #[test]
    fn coulomb_derivative_closed_form() {
        let alpha = 0.25;
        let p = PotentialModel::coulomb(alpha);
        let mut fact = 1.0;
        for j in 0..=6 {
            if j > 0 {
                fact *= j as f64;
            }
            let r: f64 = 1.7;
            let expected = -alpha * (-1f64).powi(j as i32) * fact * r.powi(-(j as i32) - 1);
            let got = p.derivative(r, j).unwrap();
            assert!((got - expected).abs() <= 1e-14 * expected.abs(), "order {j}");
        }
    }

    #[test]
    fn order_seven_is_rejected() {
        let p = PotentialModel::coulomb(0.25);
        assert!(matches!(p.derivative(1.0, 7), Err(Error::UnsupportedOrder(7))));
        assert!(matches!(
            p.gamma_derivative(&pair(), 1.0, 7),
            Err(Error::UnsupportedOrder(7))
        ));
    }

    #[test]
    fn gamma_examples() {
        let g0 = PotentialModel::coulomb(0.25)
            .gamma_derivative(&pair(), 1.0, 0)
            .unwrap();
        assert!((g0 - (-0.25 - 0.0625 / 5.8)).abs() < 1e-15);
        assert!((g0 + 0.260_775_86).abs() < 1e-8);

        let b = 0.18;
        let g2 = PotentialModel::linear(b)
            .gamma_derivative(&pair(), 2.3, 2)
            .unwrap();
        assert!((g2 + b * b / pair().eta()).abs() < 1e-15);
    }

    #[test]
    fn gamma_nonrelativistic_is_bitwise_v() {
        let nr = pair().nonrelativistic();
        for p in [
            PotentialModel::coulomb(0.25),
            PotentialModel::cornell(0.25, 0.18),
            PotentialModel::oscillator(1.0),
        ] {
            for r in [0.3, 1.0, 4.5] {
                for j in 0..=6 {
                    let g = p.gamma_derivative(&nr, r, j).unwrap();
                    let v = p.derivative(r, j).unwrap();
                    assert_eq!(g.to_bits(), v.to_bits());
                }
            }
        }
    }

    #[test]
    fn oscillator_gamma_sixth_derivative_vanishes() {
        // (r⁴/4)⁽⁶⁾ = 0
        let g6 = PotentialModel::oscillator(1.0)
            .gamma_derivative(&pair(), 1.3, 6)
            .unwrap();
        assert_eq!(g6, 0.0);
        // (r⁴/4)'''' = 6 ⇒ γ'''' = −6/(2η)
        let g4 = PotentialModel::oscillator(1.0)
            .gamma_derivative(&pair(), 1.3, 4)
            .unwrap();
        assert!((g4 + 3.0 / pair().eta()).abs() < 1e-15);
    }

    #[test]
    fn monotonicity_domains() {
        assert_eq!(
            PotentialModel::coulomb(0.25).increasing_interval(),
            Some((0.0, f64::INFINITY))
        );
        assert_eq!(PotentialModel::coulomb(-0.25).increasing_interval(), None);
        let (lo, hi) = PotentialModel::cornell(-0.5, 0.5)
            .increasing_interval()
            .unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && hi.is_infinite());
        let (lo, hi) = PotentialModel::custom(vec![
            PowerTerm::new(-1.0, 1.0),
            PowerTerm::new(0.25, 2.0),
        ])
        .increasing_interval()
        .unwrap();
        assert!(lo > 1.9 && lo < 2.1 && hi.is_infinite());
    }

    #[test]
    fn parse_builtin_specs() {
        assert_eq!(
            "coulomb:alpha=0.25".parse::<PotentialModel>().unwrap(),
            PotentialModel::coulomb(0.25)
        );
        assert_eq!(
            "oscillator:k=1.0".parse::<PotentialModel>().unwrap(),
            PotentialModel::oscillator(1.0)
        );
        assert_eq!(
            "linear:b=0.18".parse::<PotentialModel>().unwrap(),
            PotentialModel::linear(0.18)
        );
        assert_eq!(
            "cornell:alpha=0.25,b=0.18".parse::<PotentialModel>().unwrap(),
            PotentialModel::cornell(0.25, 0.18)
        );
        assert_eq!(
            " cornell: b = 0.18 , alpha = 0.25 ".parse::<PotentialModel>().unwrap(),
            PotentialModel::cornell(0.25, 0.18)
        );
    }

    #[test]
    fn parse_custom_specs() {
        let p: PotentialModel = "custom:-0.25*r^-1+0.18*r^1".parse().unwrap();
        assert_eq!(
            p,
            PotentialModel::custom(vec![
                PowerTerm::new(-0.25, -1.0),
                PowerTerm::new(0.18, 1.0)
            ])
        );
        let p: PotentialModel = "custom: 2.5e-1*r^0.5 - r + 3".parse().unwrap();
        assert_eq!(
            p,
            PotentialModel::custom(vec![
                PowerTerm::new(0.25, 0.5),
                PowerTerm::new(-1.0, 1.0),
                PowerTerm::new(3.0, 0.0)
            ])
        );
    }

    #[test]
    fn malformed_specs_are_rejected() {
        for bad in [
            "",
            "coulomb",
            "coulomb:beta=1",
            "coulomb:alpha=x",
            "coulomb:alpha=0.1,alpha=0.2",
            "cornell:alpha=0.25",
            "yukawa:g=1",
            "custom:",
            "custom:2*q^2",
            "oscillator:k=inf",
        ] {
            let err = bad.parse::<PotentialModel>().unwrap_err();
            assert!(matches!(err, Error::InvalidInput(_)), "{bad}: {err}");
        }
    }

    #[test]
    fn display_round_trips() {
        for p in [
            PotentialModel::coulomb(0.25),
            PotentialModel::oscillator(1.0),
            PotentialModel::linear(0.18),
            PotentialModel::cornell(0.25, 0.18),
            PotentialModel::custom(vec![
                PowerTerm::new(-0.25, -1.0),
                PowerTerm::new(1e-3, 2.5),
            ]),
        ] {
            let text = p.to_string();
            assert_eq!(text.parse::<PotentialModel>().unwrap(), p, "{text}");
        }
    }

    fn five_point(f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
        (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h)) / (12.0 * h)
    }

    fn custom_mix() -> impl Strategy<Value = PotentialModel> {
        prop::collection::vec((-2.0f64..2.0, -1.5f64..3.0), 1..4).prop_map(|terms| {
            PotentialModel::custom(terms.into_iter().map(|(c, p)| PowerTerm::new(c, p)).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn derivatives_match_finite_differences(pot in custom_mix(), r in 0.3f64..8.0) {
            let h = 1e-3 * r;
            for j in 1..=6 {
                let analytic = pot.derivative(r, j).unwrap();
                let fd = five_point(|x| pot.derivative(x, j - 1).unwrap(), r, h);
                // Scale by the size of the individual terms so that cancellations
                // between them do not inflate the relative error.
                let scale: f64 = pot
                    .terms()
                    .iter()
                    .map(|t| PotentialModel::custom(vec![*t]).derivative(r, j).unwrap().abs())
                    .sum();
                prop_assume!(scale > 1e-12);
                prop_assert!((analytic - fd).abs() <= 1e-6 * scale, "j = {j}: {analytic} vs {fd}");
            }
        }


        #[test]
        fn gamma_leibniz_matches_direct_square(
            alpha in 0.05f64..1.0,
            b in 0.05f64..0.5,
            m in 0.5f64..5.0,
            r in 0.2f64..10.0,
        ) {
            let pair = ParticlePair::equal(m).unwrap();
            let pot = PotentialModel::cornell(alpha, b);
            // V² = α²/r² − 2αb + b²r².
            let square = PotentialModel::custom(vec![
                PowerTerm::new(alpha * alpha, -2.0),
                PowerTerm::new(-2.0 * alpha * b, 0.0),
                PowerTerm::new(b * b, 2.0),
            ]);
            for j in 0..=6 {
                let direct = pot.derivative(r, j).unwrap() - square.derivative(r, j).unwrap() / (2.0 * pair.eta());
                let leibniz = pot.gamma_derivative(&pair, r, j).unwrap();
                let scale = pot.derivative(r, j).unwrap().abs()
                    + square.derivative(r, j).unwrap().abs() / (2.0 * pair.eta());
                prop_assert!((direct - leibniz).abs() <= 1e-12 * scale, "j = {j}");
            }
        }

    }
}
