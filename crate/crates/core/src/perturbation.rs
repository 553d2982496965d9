//! Rayleigh–Schrödinger coefficients of the one-dimensional anharmonic
//! oscillator
//!
//! ```text
//! h(λ) = −(1/2μ) d²/dx² + ½μω²x² + Σ_{j=1..4} λʲ W_j(x)
//! ```
//!
//! in a truncated harmonic-oscillator basis. `W_j` is a short polynomial in
//! `x` whose powers share the parity of `j`.

use crate::error::{Error, Result};

/// Highest λ-order carried by the expansion.
pub const MAX_ORDER: usize = 4;

/// Highest power of `x` allowed in a perturbation.
pub const MAX_POWER: u32 = 6;

/// Smallest basis accepted above the target level.
pub const MIN_BASIS_MARGIN: usize = 20;

/// Default basis margin above the target level.
pub const DEFAULT_BASIS_MARGIN: usize = 40;

/// Square matrix stored densely, with all non-zeros within `bandwidth` of the
/// diagonal. Products only visit the band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    size: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(size: usize, bandwidth: usize) -> Self {
        Self {
            size,
            bandwidth,
            data: vec![0.0; size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, 0);
        for i in 0..size {
            m.data[i * size + i] = 1.0;
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.size + j] = value;
    }

    fn band(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.bandwidth)..(i + self.bandwidth + 1).min(self.size)
    }

    pub fn mul(&self, other: &BandedMatrix) -> BandedMatrix {
        assert_eq!(self.size, other.size, "matrix sizes differ");
        let bandwidth = self.bandwidth + other.bandwidth;
        let mut out = BandedMatrix::zeros(self.size, bandwidth);
        for i in 0..self.size {
            for k in self.band(i) {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in other.band(k) {
                    out.data[i * self.size + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Leading `size × size` block.
    pub fn truncated(&self, size: usize) -> BandedMatrix {
        let size = size.min(self.size);
        let mut out = BandedMatrix::zeros(size, self.bandwidth);
        for i in 0..size {
            for j in self.band(i).filter(|&j| j < size) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// `self += scale · other` (equal sizes).
    pub fn add_scaled(&mut self, other: &BandedMatrix, scale: f64) {
        assert_eq!(self.size, other.size, "matrix sizes differ");
        self.bandwidth = self.bandwidth.max(other.bandwidth);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.size)
            .map(|i| self.band(i).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

/// Coordinate operator in the oscillator eigenbasis of frequency `omega` and
/// mass `mu`: `⟨k|x|k+1⟩ = √((k+1)/(2μω))`.
pub fn position_matrix(mu: f64, omega: f64, basis_size: usize) -> Result<BandedMatrix> {
    let scale = mu * omega;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Domain(format!(
            "position matrix needs mu*omega > 0, got {scale}"
        )));
    }
    if basis_size < 2 {
        return Err(Error::InvalidInput(format!(
            "basis size must be at least 2, got {basis_size}"
        )));
    }
    let mut x = BandedMatrix::zeros(basis_size, 1);
    for k in 0..basis_size - 1 {
        let v = ((k + 1) as f64 / (2.0 * scale)).sqrt();
        x.set(k, k + 1, v);
        x.set(k + 1, k, v);
    }
    Ok(x)
}

/// Exact `x^p` on the first `basis_size` states. The product is formed in a
/// basis padded by `p`, so no truncation error leaks into the kept block.
pub fn position_power(mu: f64, omega: f64, basis_size: usize, power: u32) -> Result<BandedMatrix> {
    let padded = basis_size + power as usize;
    let x = position_matrix(mu, omega, padded)?;
    let mut acc = BandedMatrix::identity(padded);
    for _ in 0..power {
        acc = acc.mul(&x);
    }
    Ok(acc.truncated(basis_size))
}

/// Anharmonic problem for one oscillator level. `terms[j-1]` holds the
/// `(power, coefficient)` pairs multiplying `λʲ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnharmonicProblem {
    pub mu: f64,
    pub omega: f64,
    pub level: usize,
    terms: [Vec<(u32, f64)>; MAX_ORDER],
}

impl AnharmonicProblem {
    pub fn new(mu: f64, omega: f64, level: usize) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0 && omega.is_finite() && omega > 0.0) {
            return Err(Error::Domain(format!(
                "anharmonic problem needs mu > 0 and omega > 0, got mu = {mu}, omega = {omega}"
            )));
        }
        Ok(Self {
            mu,
            omega,
            level,
            terms: Default::default(),
        })
    }

    /// Adds `coefficient · x^power` at order `λ^order`.
    pub fn with_term(mut self, order: usize, power: u32, coefficient: f64) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidInput(format!(
                "lambda order must be 1..={MAX_ORDER}, got {order}"
            )));
        }
        if power == 0 || power > MAX_POWER || (power as usize) % 2 != order % 2 {
            return Err(Error::InvalidInput(format!(
                "x^{power} cannot appear at lambda order {order}"
            )));
        }
        if !coefficient.is_finite() {
            return Err(Error::InvalidInput(format!(
                "coefficient of x^{power} at order {order} is not finite"
            )));
        }
        self.terms[order - 1].push((power, coefficient));
        Ok(self)
    }

    /// Problem assembled from the expansion coefficients: `ε₁x + ε₃x³` at
    /// λ¹, `ε₂x² + ε₄x⁴` at λ², and (when given) `δ₁x + δ₃x³ + δ₅x⁵` at λ³
    /// and `δ₂x² + δ₄x⁴ + δ₆x⁶` at λ⁴.
    pub fn from_coefficients(
        mu: f64,
        omega: f64,
        level: usize,
        eps: [f64; 4],
        delta: Option<[f64; 6]>,
    ) -> Result<Self> {
        let mut p = Self::new(mu, omega, level)?
            .with_term(1, 1, eps[0])?
            .with_term(1, 3, eps[2])?
            .with_term(2, 2, eps[1])?
            .with_term(2, 4, eps[3])?;
        if let Some(d) = delta {
            p = p
                .with_term(3, 1, d[0])?
                .with_term(3, 3, d[2])?
                .with_term(3, 5, d[4])?
                .with_term(4, 2, d[1])?
                .with_term(4, 4, d[3])?
                .with_term(4, 6, d[5])?;
        }
        Ok(p)
    }

    pub fn terms(&self, order: usize) -> &[(u32, f64)] {
        &self.terms[order - 1]
    }

    fn perturbation(&self, order: usize, basis_size: usize) -> Result<BandedMatrix> {
        let mut w = BandedMatrix::zeros(basis_size, 0);
        for &(power, coefficient) in self.terms(order) {
            let xp = position_power(self.mu, self.omega, basis_size, power)?;
            w.add_scaled(&xp, coefficient);
        }
        Ok(w)
    }
}

/// Coefficients `c_k` of `E(λ) = E⁰ + Σ c_k λᵏ` for the target level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeriesCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// Non-degenerate Rayleigh–Schrödinger recursion through λ⁴ with
/// intermediate normalisation:
///
/// ```text
/// E_k = ⟨n| Σ_j W_j ψ_{k−j} ⟩
/// ψ_k = R [ Σ_j W_j ψ_{k−j} − Σ_{i=1..k−1} E_i ψ_{k−i} ],   R = Σ_{m≠n} |m⟩⟨m| / (E⁰_n − E⁰_m)
/// ```
pub fn rspt_coefficients(problem: &AnharmonicProblem, basis_size: usize) -> Result<SeriesCoefficients> {
    let n = problem.level;
    if basis_size < n + MIN_BASIS_MARGIN {
        return Err(Error::InvalidInput(format!(
            "basis size {basis_size} is below level + {MIN_BASIS_MARGIN} = {}",
            n + MIN_BASIS_MARGIN
        )));
    }
    let w = (1..=MAX_ORDER)
        .map(|order| problem.perturbation(order, basis_size))
        .collect::<Result<Vec<_>>>()?;

    // (k + 1/2)ω levels are never degenerate, so the resolvent is regular.
    let resolvent: Vec<f64> = (0..basis_size)
        .map(|k| {
            if k == n {
                0.0
            } else {
                1.0 / ((n as f64 - k as f64) * problem.omega)
            }
        })
        .collect();

    let mut psi: Vec<Vec<f64>> = Vec::with_capacity(MAX_ORDER + 1);
    let mut ground = vec![0.0; basis_size];
    ground[n] = 1.0;
    psi.push(ground);
    let mut energy = [0.0; MAX_ORDER + 1];

    for k in 1..=MAX_ORDER {
        let mut rhs = vec![0.0; basis_size];
        for j in 1..=k {
            let term = w[j - 1].mul_vec(&psi[k - j]);
            for (r, t) in rhs.iter_mut().zip(term) {
                *r += t;
            }
        }
        energy[k] = rhs[n];
        for i in 1..k {
            for (r, p) in rhs.iter_mut().zip(&psi[k - i]) {
                *r -= energy[i] * p;
            }
        }
        let next: Vec<f64> = rhs.iter().zip(&resolvent).map(|(r, g)| r * g).collect();
        psi.push(next);
    }

    Ok(SeriesCoefficients {
        c1: energy[1],
        c2: energy[2],
        c3: energy[3],
        c4: energy[4],
    })
}

/// [`rspt_coefficients`] at `basis_size` and at twice that size; fails when
/// `c2` or `c4` moves by more than `1e-9` relative.
pub fn rspt_coefficients_checked(
    problem: &AnharmonicProblem,
    basis_size: usize,
) -> Result<SeriesCoefficients> {
    let base = rspt_coefficients(problem, basis_size)?;
    let doubled = rspt_coefficients(problem, 2 * basis_size)?;
    let change = |a: f64, b: f64| {
        let scale = a.abs().max(b.abs());
        if scale < 1e-300 {
            0.0
        } else {
            (a - b).abs() / scale
        }
    };
    let worst = change(base.c2, doubled.c2).max(change(base.c4, doubled.c4));
    // Changes at the rounding level of tiny coefficients are not a basis issue.
    let floor = 1e-13 * (base.c2.abs() + base.c4.abs() + 1.0);
    let absolute = (base.c2 - doubled.c2).abs().max((base.c4 - doubled.c4).abs());
    if worst > 1e-9 && absolute > floor {
        return Err(Error::BasisNotConverged {
            basis: basis_size,
            doubled: 2 * basis_size,
            change: worst,
        });
    }
    Ok(base)
}

/// `(α₁, α₂) = (c2, c4)`, after checking that the odd orders vanish.
pub fn alpha_from_series(coeffs: &SeriesCoefficients) -> Result<(f64, f64)> {
    if coeffs.c1.abs() > 1e-10 || coeffs.c3.abs() > 1e-10 {
        return Err(Error::ParityViolation {
            c1: coeffs.c1,
            c3: coeffs.c3,
        });
    }
    Ok((coeffs.c2, coeffs.c4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn position_matrix_elements() {
        let x = position_matrix(0.5, 1.0, 8).unwrap();
        assert_eq!(x.get(0, 1), 1.0);
        assert_eq!(x.get(1, 0), 1.0);
        assert_eq!(x.get(0, 0), 0.0);
        assert!((x.get(3, 4) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn position_matrix_rejects_bad_input() {
        assert!(matches!(position_matrix(-1.0, 1.0, 4), Err(Error::Domain(_))));
        assert!(matches!(position_matrix(1.0, 0.0, 4), Err(Error::Domain(_))));
        assert!(position_matrix(1.0, 1.0, 1).is_err());
    }

    #[test]
    fn x_squared_and_x_fourth_diagonals() {
        let (mu, omega) = (0.655, 2.88);
        let s = 2.0 * mu * omega;
        let x2 = position_power(mu, omega, 12, 2).unwrap();
        let x4 = position_power(mu, omega, 12, 4).unwrap();
        assert_eq!(x2.bandwidth(), 2);
        assert_eq!(x4.bandwidth(), 4);
        for n in 0..12 {
            let nf = n as f64;
            assert!((x2.get(n, n) - (2.0 * nf + 1.0) / s).abs() < 1e-13);
            let expected = 3.0 * (1.0 + 2.0 * nf + 2.0 * nf * nf) / (s * s);
            assert!((x4.get(n, n) - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn parity_pattern_is_enforced() {
        let p = AnharmonicProblem::new(1.0, 1.0, 0).unwrap();
        assert!(p.clone().with_term(1, 2, 1.0).is_err());
        assert!(p.clone().with_term(2, 3, 1.0).is_err());
        assert!(p.clone().with_term(4, 8, 1.0).is_err());
        assert!(p.clone().with_term(5, 1, 1.0).is_err());
        assert!(p.clone().with_term(3, 5, f64::NAN).is_err());
        assert!(p.with_term(4, 6, 1.0).is_ok());
    }

    #[test]
    fn small_basis_is_rejected() {
        let p = AnharmonicProblem::new(1.0, 1.0, 3).unwrap();
        assert!(matches!(
            rspt_coefficients(&p, 22),
            Err(Error::InvalidInput(_))
        ));
        assert!(rspt_coefficients(&p, 23).is_ok());
    }

    #[test]
    fn displaced_oscillator_is_exact_at_second_order() {
        // h = h0 + λ ε x: E(λ) = E0 − λ²ε²/(2μω²) exactly.
        let (mu, omega, eps) = (0.7, 1.9, 0.35);
        for n in 0..4 {
            let p = AnharmonicProblem::new(mu, omega, n)
                .unwrap()
                .with_term(1, 1, eps)
                .unwrap();
            let c = rspt_coefficients(&p, n + 40).unwrap();
            let bar = eps / (2.0 * mu * omega).sqrt();
            assert!((c.c2 + bar * bar / omega).abs() < 1e-13);
            assert!(c.c4.abs() < 1e-13);
            assert_eq!(c.c1, 0.0);
            assert_eq!(c.c3, 0.0);
        }
    }

    #[test]
    fn quadratic_perturbation_matches_frequency_shift() {
        // h = h0 + λ² ε x²: E = (n+½)√(ω² + 2λ²ε/μ). Expanding the square root,
        // c2 = (n+½) ε/(μω) and c4 = −(n+½) ε²/(2μ²ω³).
        let (mu, omega, eps) = (0.655, 2.3, 0.4);
        for n in 0..5 {
            let p = AnharmonicProblem::new(mu, omega, n)
                .unwrap()
                .with_term(2, 2, eps)
                .unwrap();
            let c = rspt_coefficients(&p, n + 40).unwrap();
            let h = n as f64 + 0.5;
            let c2 = h * eps / (mu * omega);
            let c4 = -h * eps * eps / (2.0 * mu * mu * omega.powi(3));
            assert!((c.c2 - c2).abs() <= 1e-10 * c2.abs());
            assert!((c.c4 - c4).abs() <= 1e-10 * c4.abs());
        }
    }

    #[test]
    fn quartic_only_first_order() {
        let (mu, omega, eps4): (f64, f64, f64) = (1.1, 0.8, 0.05);
        let bar = eps4 / (2.0 * mu * omega).powi(2);
        for (n, factor) in [(0usize, 3.0), (1, 15.0), (2, 39.0)] {
            let p = AnharmonicProblem::new(mu, omega, n)
                .unwrap()
                .with_term(2, 4, eps4)
                .unwrap();
            let c = rspt_coefficients(&p, n + 40).unwrap();
            let (a1, _) = alpha_from_series(&c).unwrap();
            assert!((a1 - factor * bar).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn empty_problem_gives_zeros() {
        let p = AnharmonicProblem::new(1.0, 1.0, 2).unwrap();
        let c = rspt_coefficients_checked(&p, 42).unwrap();
        assert_eq!(alpha_from_series(&c).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn parity_violation_is_reported() {
        let c = SeriesCoefficients {
            c1: 1e-6,
            c2: 1.0,
            c3: 0.0,
            c4: 0.0,
        };
        assert!(matches!(
            alpha_from_series(&c),
            Err(Error::ParityViolation { .. })
        ));
    }

    #[test]
    fn fourth_order_cross_terms_against_dense_diagonalisation() {
        // Independent route: diagonalise h(λ) for several small λ and fit the
        // even polynomial E(λ) = E0 + c2 λ² + c4 λ⁴ + c6 λ⁶ by Richardson-style
        // elimination.
        let (mu, omega) = (0.6, 2.0);
        let p = AnharmonicProblem::from_coefficients(
            mu,
            omega,
            1,
            [0.3, -0.2, 0.15, 0.05],
            Some([0.1, 0.07, -0.04, 0.02, 0.01, 0.004]),
        )
        .unwrap();
        let c = rspt_coefficients(&p, 41).unwrap();

        let size = 60;
        let eig = |lambda: f64| -> f64 {
            let mut h = vec![vec![0.0; size]; size];
            for (i, row) in h.iter_mut().enumerate() {
                row[i] = (i as f64 + 0.5) * omega;
            }
            for order in 1..=4 {
                for &(power, coef) in p.terms(order) {
                    let xp = position_power(mu, omega, size, power).unwrap();
                    for (i, row) in h.iter_mut().enumerate() {
                        for (j, v) in row.iter_mut().enumerate() {
                            *v += lambda.powi(order as i32) * coef * xp.get(i, j);
                        }
                    }
                }
            }
            jacobi_eigenvalues(h)[1]
        };
        let e0 = 1.5 * omega;
        let hs = [0.02, 0.04, 0.06];
        let g: Vec<f64> = hs
            .iter()
            .map(|&l| (eig(l) + eig(-l)) / 2.0 - e0)
            .collect();
        // g(λ) = c2 λ² + c4 λ⁴ + c6 λ⁶ (+ O(λ⁸)); solve the 3×3 system.
        let a: Vec<[f64; 3]> = hs.iter().map(|&l| [l * l, l.powi(4), l.powi(6)]).collect();
        let sol = solve3(&a, &g);
        assert!((sol[0] - c.c2).abs() < 1e-6 * c.c2.abs(), "{} vs {}", sol[0], c.c2);
        assert!((sol[1] - c.c4).abs() < 1e-3 * c.c4.abs(), "{} vs {}", sol[1], c.c4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn odd_perturbations_lower_the_ground_state(
            e1 in -1.0f64..1.0,
            e3 in -1.0f64..1.0,
            d1 in -1.0f64..1.0,
            d5 in -1.0f64..1.0,
            omega in 0.3f64..4.0,
        ) {
            let p = AnharmonicProblem::from_coefficients(
                0.5 / omega,
                omega,
                0,
                [e1, 0.0, e3, 0.0],
                Some([d1, 0.0, 0.0, 0.0, d5, 0.0]),
            )
            .unwrap();
            let c = rspt_coefficients(&p, 40).unwrap();
            let (a1, _) = alpha_from_series(&c).unwrap();
            prop_assert!(a1 <= 0.0);
            prop_assert!(c.c1.abs() <= 1e-10 && c.c3.abs() <= 1e-10);
        }
    }

    fn solve3(a: &[[f64; 3]], b: &[f64]) -> [f64; 3] {
        let det = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let m = [a[0], a[1], a[2]];
        let d = det(m);
        let mut out = [0.0; 3];
        for (col, o) in out.iter_mut().enumerate() {
            let mut mc = m;
            for row in 0..3 {
                mc[row][col] = b[row];
            }
            *o = det(mc) / d;
        }
        out
    }

    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[p][q] * a[p][q];
                }
            }
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    }
}
