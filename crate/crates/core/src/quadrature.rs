//! Gauss-Legendre and Gauss-Lobatto-Legendre rules on `[-1, 1]`.
//!
//! Nodes come from Newton iteration on Legendre polynomials (or their
//! derivatives for the Lobatto interior nodes) started from Chebyshev
//! guesses. The rules are generic over [`Real`] so the same code produces
//! `f64` rules and double-double rules for the high-precision eigenvalue path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

const MAX_NEWTON_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    GaussLegendre,
    GaussLobatto,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::GaussLegendre => "Gauss-Legendre",
            RuleKind::GaussLobatto => "Gauss-Lobatto",
        }
    }

    /// Highest polynomial degree integrated exactly by an `m`-point rule.
    pub fn exactness(self, m: usize) -> usize {
        match self {
            RuleKind::GaussLegendre => 2 * m - 1,
            RuleKind::GaussLobatto => 2 * m - 3,
        }
    }

    /// Builds the `m`-point rule of this kind.
    pub fn rule<T: Real>(self, m: usize) -> Result<QuadratureRule<T>> {
        match self {
            RuleKind::GaussLegendre => gauss_legendre(m),
            RuleKind::GaussLobatto => gauss_lobatto(m),
        }
    }
}

/// An `m`-point rule on the reference interval `[-1, 1]`.
///
/// Nodes are strictly ascending and symmetric about zero, weights are
/// positive and symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T = f64> {
    kind: RuleKind,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn exactness(&self) -> usize {
        self.kind.exactness(self.len())
    }

    /// Nodes and weights affinely mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::from_f64(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (a + half * (x + T::one()), w * half))
    }

    /// `sum_i w_i' f(x_i')` over the rule mapped to `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        self.mapped(a, b).fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }
}

/// Legendre polynomial values `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair<T: Real>(n: usize, x: T) -> (T, T) {
    if n == 0 {
        return (T::one(), T::zero());
    }
    let mut prev = T::one();
    let mut cur = x;
    for k in 2..=n {
        let kk = T::from_usize(k);
        let next = (T::from_usize(2 * k - 1) * x * cur - T::from_usize(k - 1) * prev) / kk;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `P_n'(x)` for `|x| < 1`.
fn legendre_deriv<T: Real>(n: usize, x: T, pn: T, pn1: T) -> T {
    T::from_usize(n) * (x * pn - pn1) / (x * x - T::one())
}

/// Legendre polynomial `P_n(x)`.
pub fn legendre<T: Real>(n: usize, x: T) -> T {
    legendre_pair(n, x).0
}

fn newton<T: Real, F: Fn(T) -> T>(
    mut x: T,
    step: F,
    rule: &'static str,
    m: usize,
) -> Result<T> {
    let tol = T::from_f64(T::NEWTON_TOL);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let dx = step(x);
        x -= dx;
        if dx.abs() <= tol {
            // one more step polishes the last bits
            return Ok(x - step(x));
        }
    }
    Err(Error::QuadratureNonConvergence { rule, m })
}

/// Averages mirrored pairs so that nodes are exactly antisymmetric and
/// weights exactly symmetric.
fn symmetrize<T: Real>(nodes: &mut [T], weights: &mut [T]) {
    let m = nodes.len();
    let two = T::from_f64(2.0);
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = (nodes[j] - nodes[i]) / two;
        let w = (weights[i] + weights[j]) / two;
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = T::zero();
    }
}

/// The `m`-point Gauss-Legendre rule, exact through degree `2m - 1`.
pub fn gauss_legendre<T: Real>(m: usize) -> Result<QuadratureRule<T>> {
    const NAME: &str = "Gauss-Legendre";
    if m == 0 {
        return Err(Error::InvalidPointCount { rule: NAME, m });
    }
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in (0..m).rev() {
        // i-th root counted from the right; Chebyshev-like initial guess
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let x = newton(
            T::from_f64(guess),
            |x| {
                let (pn, pn1) = legendre_pair(m, x);
                pn / legendre_deriv(m, x, pn, pn1)
            },
            NAME,
            m,
        )?;
        let (pn, pn1) = legendre_pair(m, x);
        let dp = legendre_deriv(m, x, pn, pn1);
        nodes.push(x);
        weights.push(T::from_f64(2.0) / ((T::one() - x * x) * dp * dp));
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule {
        kind: RuleKind::GaussLegendre,
        nodes,
        weights,
    })
}

/// The `m`-point Gauss-Lobatto-Legendre rule (endpoints included), exact
/// through degree `2m - 3`.
pub fn gauss_lobatto<T: Real>(m: usize) -> Result<QuadratureRule<T>> {
    const NAME: &str = "Gauss-Lobatto";
    if m < 2 {
        return Err(Error::InvalidPointCount { rule: NAME, m });
    }
    let n = m - 1;
    let nn1 = T::from_usize(n * (n + 1));
    let mut nodes = Vec::with_capacity(m);
    nodes.push(-T::one());
    for i in 1..n {
        let guess = -(std::f64::consts::PI * i as f64 / n as f64).cos();
        // roots of P_n' by Newton with (P_n')' = (2x P_n' - n(n+1) P_n) / (1 - x^2)
        let x = newton(
            T::from_f64(guess),
            |x| {
                let (pn, pn1) = legendre_pair(n, x);
                let dp = legendre_deriv(n, x, pn, pn1);
                let ddp = (T::from_f64(2.0) * x * dp - nn1 * pn) / (T::one() - x * x);
                dp / ddp
            },
            NAME,
            m,
        )?;
        nodes.push(x);
    }
    nodes.push(T::one());
    let mut weights: Vec<T> = nodes
        .iter()
        .map(|&x| {
            let pn = legendre(n, x);
            T::from_f64(2.0) / (nn1 * pn * pn)
        })
        .collect();
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule {
        kind: RuleKind::GaussLobatto,
        nodes,
        weights,
    })
}

/// `sum_i w_i' f(x_i')` of `rule` mapped to `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(rule: &QuadratureRule, f: F, a: f64, b: f64) -> f64 {
    rule.integrate(f, a, b)
}

/// Weight `tau` on the Lobatto-integrated quantity and `1 - tau` on the
/// Gauss-integrated one. `tau` may lie outside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendSpec {
    pub tau: f64,
}

impl BlendSpec {
    pub fn new(tau: f64) -> Self {
        Self { tau }
    }

    pub fn combine(&self, lobatto: f64, gauss: f64) -> f64 {
        self.tau * lobatto + (1.0 - self.tau) * gauss
    }
}

/// `tau * I_GLL(f) + (1 - tau) * I_GL(f)` with `m` points in each rule.
pub fn blended_integrate<F: FnMut(f64) -> f64>(
    blend: BlendSpec,
    m: usize,
    mut f: F,
    a: f64,
    b: f64,
) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidPointCount {
            rule: "blended",
            m,
        });
    }
    let lobatto = gauss_lobatto::<f64>(m)?.integrate(&mut f, a, b);
    let gauss = gauss_legendre::<f64>(m)?.integrate(&mut f, a, b);
    Ok(blend.combine(lobatto, gauss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::DoubleDouble;
    use approx::assert_abs_diff_eq;

    fn moment(d: usize) -> f64 {
        if d % 2 == 1 {
            0.0
        } else {
            2.0 / (d as f64 + 1.0)
        }
    }

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre::<f64>(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert_eq!(r.weights(), &[2.0]);
    }

    #[test]
    fn two_and_three_point_gauss() {
        let r = gauss_legendre::<f64>(2).unwrap();
        assert_abs_diff_eq!(r.nodes()[0], -0.5773502691896257, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes()[1], 0.5773502691896257, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.integrate(|x| x * x, -1.0, 1.0), 2.0 / 3.0, epsilon = 1e-15);

        let r = gauss_legendre::<f64>(3).unwrap();
        let s = (0.6f64).sqrt();
        for (x, e) in r.nodes().iter().zip([-s, 0.0, s]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-15);
        }
        for (w, e) in r.weights().iter().zip([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn lobatto_small_rules() {
        let r = gauss_lobatto::<f64>(2).unwrap();
        assert_eq!(r.nodes(), &[-1.0, 1.0]);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);

        let r = gauss_lobatto::<f64>(3).unwrap();
        assert_eq!(r.nodes(), &[-1.0, 0.0, 1.0]);
        for (w, e) in r.weights().iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-15);
        }

        let r = gauss_lobatto::<f64>(4).unwrap();
        let s = 1.0 / 5f64.sqrt();
        for (x, e) in r.nodes().iter().zip([-1.0, -s, s, 1.0]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-15);
        }
        for (w, e) in r.weights().iter().zip([1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn invariants_and_exactness() {
        for kind in [RuleKind::GaussLegendre, RuleKind::GaussLobatto] {
            let lo = if kind == RuleKind::GaussLobatto { 2 } else { 1 };
            for m in lo..=12 {
                let r = kind.rule::<f64>(m).unwrap();
                assert_eq!(r.len(), m);
                let sum: f64 = r.weights().iter().sum();
                assert!((sum - 2.0).abs() < 1e-14, "{kind:?} m={m} weight sum {sum}");
                for i in 0..m {
                    assert!(r.weights()[i] > 0.0);
                    assert!((r.nodes()[i] + r.nodes()[m - 1 - i]).abs() < 1e-14);
                    assert!((r.weights()[i] - r.weights()[m - 1 - i]).abs() < 1e-14);
                    if i + 1 < m {
                        assert!(r.nodes()[i] < r.nodes()[i + 1]);
                    }
                }
                if kind == RuleKind::GaussLobatto {
                    assert_eq!(r.nodes()[0], -1.0);
                    assert_eq!(r.nodes()[m - 1], 1.0);
                } else {
                    for &x in r.nodes() {
                        assert!(legendre(m, x).abs() < 1e-14);
                    }
                }
                if m <= 10 {
                    for d in 0..=r.exactness() {
                        let got = r.integrate(|x| x.powi(d as i32), -1.0, 1.0);
                        assert!((got - moment(d)).abs() < 1e-12, "{kind:?} m={m} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn exactness_is_sharp() {
        for m in 2..=8 {
            let g = gauss_legendre::<f64>(m).unwrap();
            let d = 2 * m;
            assert!((g.integrate(|x| x.powi(d as i32), -1.0, 1.0) - moment(d)).abs() > 1e-6);
            let l = gauss_lobatto::<f64>(m).unwrap();
            let d = 2 * m - 2;
            assert!((l.integrate(|x| x.powi(d as i32), -1.0, 1.0) - moment(d)).abs() > 1e-6);
        }
    }

    #[test]
    fn integrate_examples() {
        let g2 = gauss_legendre::<f64>(2).unwrap();
        assert_abs_diff_eq!(integrate(&g2, |_| 1.0, 0.0, 1.0), 1.0, epsilon = 1e-15);
        let l3 = gauss_lobatto::<f64>(3).unwrap();
        // deliberate underintegration of x^4
        assert_abs_diff_eq!(integrate(&l3, |x| x.powi(4), -1.0, 1.0), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn blend_endpoints_and_interior() {
        let f = |x: f64| x.powi(4);
        let g = integrate(&gauss_legendre(3).unwrap(), f, -1.0, 1.0);
        let l = integrate(&gauss_lobatto(3).unwrap(), f, -1.0, 1.0);
        assert_eq!(blended_integrate(BlendSpec::new(0.0), 3, f, -1.0, 1.0).unwrap(), g);
        assert_eq!(blended_integrate(BlendSpec::new(1.0), 3, f, -1.0, 1.0).unwrap(), l);
        let b = blended_integrate(BlendSpec::new(2.0 / 3.0), 3, f, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(b, 26.0 / 45.0, epsilon = 1e-15);
        assert!(blended_integrate(BlendSpec::new(0.5), 1, f, -1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_point_counts() {
        assert!(gauss_legendre::<f64>(0).is_err());
        assert!(gauss_lobatto::<f64>(1).is_err());
    }

    #[test]
    fn double_double_rules_are_tighter() {
        let r = gauss_legendre::<DoubleDouble>(4).unwrap();
        for &x in r.nodes() {
            assert!(legendre(4, x).abs().to_f64() < 1e-28);
        }
        let sum = r.weights().iter().fold(DoubleDouble::zero(), |a, &w| a + w);
        assert!((sum - DoubleDouble::from_f64(2.0)).abs().to_f64() < 1e-29);
        let l = gauss_lobatto::<DoubleDouble>(5).unwrap();
        let x8 = l.integrate(|x| x * x * x * x * x * x, -DoubleDouble::one(), DoubleDouble::one());
        assert!((x8 - DoubleDouble::ratio(2, 7)).abs().to_f64() < 1e-29);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn odd_monomials_vanish(m in 2usize..=12, d in 0usize..20) {
                let d = 2 * d + 1;
                for kind in [RuleKind::GaussLegendre, RuleKind::GaussLobatto] {
                    let r = kind.rule::<f64>(m).unwrap();
                    prop_assert!(r.integrate(|x| x.powi(d as i32), -1.0, 1.0).abs() < 1e-14);
                }
            }

            #[test]
            fn affine_consistency(m in 2usize..=10, a in -3.0f64..3.0, len in 0.01f64..4.0, c in -2.0f64..2.0) {
                let b = a + len;
                let f = |x: f64| (c * x).sin() + x * x;
                for kind in [RuleKind::GaussLegendre, RuleKind::GaussLobatto] {
                    let r = kind.rule::<f64>(m).unwrap();
                    let direct = r.integrate(f, a, b);
                    let pulled = r.integrate(|t| f(a + (b - a) * (t + 1.0) / 2.0), -1.0, 1.0) * (b - a) / 2.0;
                    prop_assert!((direct - pulled).abs() < 1e-13);
                }
            }
        }
    }
}
