//! Complete elliptic integrals in the `+κ sin²φ` convention and the period function H(κ).
//!
//! ```text
//! F(κ) = ∫₀^{π/2} dφ / √(1 + κ sin²φ)
//! E(κ) = ∫₀^{π/2} √(1 + κ sin²φ) dφ
//! ```
//!
//! These are the classical K and E evaluated at the negative parameter
//! `m = -κ`; tables in the usual `1 - m sin²φ` convention can be used through
//! the map `κ ↔ -m`.
//!
//! The period function `H(κ) = 2F (E - (2+κ)F/3)` selects the zero-flux
//! periodic profiles of the planar problem: a mode with minimal period
//! `2π/k` exists exactly when `H(κ) = 2π²/(3k²)` has a root `κ ≥ 0`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{domain, Result};

/// Parameter κ ≥ 0 of the `+κ sin²φ` integrals.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return domain(format!("elliptic parameter must be finite, got {kappa}"));
        }
        if kappa < 0.0 {
            return domain(format!("elliptic parameter must be nonnegative, got {kappa}"));
        }
        Ok(Self(kappa))
    }

    pub fn kappa(self) -> f64 {
        self.0
    }
}

/// The pair (F, E) at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticValues {
    pub f: f64,
    pub e: f64,
}

impl EllipticValues {
    pub fn at(m: EllipticModulus) -> Self {
        let (f, e) = agm_pair(m.0);
        Self { f, e }
    }

    /// E/F, which lies in (1, 1 + κ/2) for κ > 0.
    pub fn ratio(&self) -> f64 {
        self.e / self.f
    }
}

const AGM_MAX_ITER: usize = 64;

/// F and E together from one AGM sweep.
///
/// `F = π / (2 AGM(1, √(1+κ)))` and `E = F (1 + κ/2 - Σ_{n≥1} 2^{n-1} c_n²)`
/// with `c_n = (a_{n-1} - b_{n-1}) / 2`.
fn agm_pair(kappa: f64) -> (f64, f64) {
    if kappa == 0.0 {
        return (PI / 2.0, PI / 2.0);
    }
    let mut a = 1.0f64;
    let mut b = (1.0 + kappa).sqrt();
    let mut sum = 0.0;
    let mut pow2 = 1.0;
    for _ in 0..AGM_MAX_ITER {
        let c = 0.5 * (a - b);
        sum += pow2 * c * c;
        pow2 *= 2.0;
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        a = an;
        b = bn;
        // c_{n+1} ≈ c_n² / 4a, so once c_n < 1e-9 a every later term is below roundoff
        if c.abs() < 1e-9 * a {
            break;
        }
    }
    let f = PI / (a + b);
    let e = f * (1.0 + 0.5 * kappa - sum);
    (f, e)
}

/// F(κ).
pub fn comp_f(m: EllipticModulus) -> f64 {
    agm_pair(m.0).0
}

/// E(κ).
pub fn comp_e(m: EllipticModulus) -> f64 {
    agm_pair(m.0).1
}

/// Below this κ the derivatives come from the Maclaurin series instead of
/// the `1/(2κ)` identities, which lose digits to cancellation.
const SERIES_CUTOFF: f64 = 1e-3;

/// Squared central binomial ratios `((2n-1)!! / (2n)!!)²`.
fn series_coeff(n: usize) -> f64 {
    let mut c = 1.0;
    for j in 1..=n {
        c *= (2 * j - 1) as f64 / (2 * j) as f64;
    }
    c * c
}

fn deriv_series(kappa: f64) -> (f64, f64) {
    // F = π/2 Σ c_n (-κ)^n,  E = π/2 (1 - Σ_{n≥1} c_n (-κ)^n / (2n-1))
    let mut df = 0.0;
    let mut de = 0.0;
    for n in (1..=12).rev() {
        let c = series_coeff(n);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = c * n as f64 * sign * kappa.powi(n as i32 - 1);
        df += term;
        de -= term / (2 * n - 1) as f64;
    }
    (0.5 * PI * df, 0.5 * PI * de)
}

/// dF/dκ = (E/(1+κ) - F) / (2κ); equals -π/8 at κ = 0.
pub fn deriv_f(m: EllipticModulus) -> f64 {
    let k = m.0;
    if k < SERIES_CUTOFF {
        return deriv_series(k).0;
    }
    let (f, e) = agm_pair(k);
    (e / (1.0 + k) - f) / (2.0 * k)
}

/// dE/dκ = (E - F) / (2κ); equals π/8 at κ = 0.
pub fn deriv_e(m: EllipticModulus) -> f64 {
    let k = m.0;
    if k < SERIES_CUTOFF {
        return deriv_series(k).1;
    }
    let (f, e) = agm_pair(k);
    (e - f) / (2.0 * k)
}

/// H(κ) = 2F (E - (2+κ)F/3). H(0) = π²/6, strictly decreasing for κ > 0.
pub fn period_h(m: EllipticModulus) -> f64 {
    let k = m.0;
    let (f, e) = agm_pair(k);
    2.0 * f * (e - (2.0 + k) * f / 3.0)
}

/// H'(κ) from the derivative identities.
pub fn period_h_deriv(m: EllipticModulus) -> f64 {
    let k = m.0;
    let (f, e) = agm_pair(k);
    let (df, de) = (deriv_f(m), deriv_e(m));
    2.0 * df * e + 2.0 * f * de - 2.0 / 3.0 * f * f - 4.0 / 3.0 * (2.0 + k) * f * df
}

/// H(0) = π²/6.
pub const H_AT_ZERO: f64 = PI * PI / 6.0;

/// Outcome of inverting H.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HRoot {
    Root(EllipticModulus),
    /// The target exceeds H(0); no κ ≥ 0 reaches it.
    NoSolution,
}

impl HRoot {
    pub fn kappa(&self) -> Option<f64> {
        match self {
            HRoot::Root(m) => Some(m.kappa()),
            HRoot::NoSolution => None,
        }
    }
}

/// Absolute tolerance on κ for [`solve_h`].
pub const SOLVE_H_TOL: f64 = 1e-12;

/// Solves H(κ) = target for the unique κ ≥ 0.
pub fn solve_h(target: f64) -> Result<HRoot> {
    if !(target.is_finite() && target > 0.0) {
        return domain(format!("H target must be positive and finite, got {target}"));
    }
    if target > H_AT_ZERO * (1.0 + 4.0 * f64::EPSILON) {
        return Ok(HRoot::NoSolution);
    }
    // H'(0) = 0, so targets within roundoff of H(0) can only be resolved as κ = 0.
    if target >= H_AT_ZERO * (1.0 - 4.0 * f64::EPSILON) {
        return Ok(HRoot::Root(EllipticModulus(0.0)));
    }
    let g = |k: f64| period_h(EllipticModulus(k)) - target;
    let mut lo = 0.0;
    let mut hi = 2.0 * kappa_zero_root();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo < SOLVE_H_TOL {
            x = 0.5 * (lo + hi);
            break;
        }
        let d = period_h_deriv(EllipticModulus(x));
        let newton = x - gx / d;
        if d < 0.0 && newton > lo && newton < hi {
            let step = (newton - x).abs();
            x = newton;
            if step < 1e-15 * x.max(1.0) {
                break;
            }
        } else {
            x = 0.5 * (lo + hi);
        }
    }
    Ok(HRoot::Root(EllipticModulus(x)))
}

/// The positive root κ∞ of H(κ) = 0; the limit of the mode parameters as k → ∞.
pub fn kappa_zero_root() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let h = |k: f64| period_h(EllipticModulus(k));
        let mut lo = 0.0;
        let mut hi = 1.0;
        while h(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        // bisection to adjacent floats, then one Newton polish
        while hi - lo > 2.0 * f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        x - h(x) / period_h_deriv(EllipticModulus(x))
    })
}

/// One row of the tabulation emitted by the CLI.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TableRow {
    pub kappa: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "dF")]
    pub df: f64,
    #[serde(rename = "dE")]
    pub de: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

/// Tabulates F, E, their derivatives and H on a linear or logarithmic grid.
pub fn table(kappa_min: f64, kappa_max: f64, points: usize, log_spaced: bool) -> Result<Vec<TableRow>> {
    if points == 0 {
        return domain("table needs at least one point");
    }
    if !(kappa_min >= 0.0 && kappa_max >= kappa_min && kappa_max.is_finite()) {
        return domain(format!("invalid κ range [{kappa_min}, {kappa_max}]"));
    }
    if log_spaced && kappa_min <= 0.0 {
        return domain("logarithmic table needs kappa_min > 0");
    }
    (0..points)
        .map(|i| {
            let t = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            let kappa = if log_spaced {
                (kappa_min.ln() + t * (kappa_max.ln() - kappa_min.ln())).exp()
            } else {
                kappa_min + t * (kappa_max - kappa_min)
            };
            let m = EllipticModulus::new(kappa)?;
            let v = EllipticValues::at(m);
            Ok(TableRow {
                kappa,
                f: v.f,
                e: v.e,
                df: deriv_f(m),
                de: deriv_e(m),
                h: period_h(m),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::composite_gauss;

    fn m(k: f64) -> EllipticModulus {
        EllipticModulus::new(k).unwrap()
    }

    /// Brute-force oracle: composite Gauss-Legendre on panels graded toward φ = 0,
    /// where the integrands concentrate for large κ.
    fn oracle(kappa: f64) -> (f64, f64) {
        let mut edges = vec![0.0];
        let mut x = PI / 2.0;
        let mut stack = vec![];
        while x > 1e-9 {
            stack.push(x);
            x *= 0.5;
        }
        stack.reverse();
        edges.extend(stack);
        let mut f = 0.0;
        let mut e = 0.0;
        for w in edges.windows(2) {
            f += composite_gauss(|p| 1.0 / (1.0 + kappa * p.sin().powi(2)).sqrt(), w[0], w[1], 4, 20);
            e += composite_gauss(|p| (1.0 + kappa * p.sin().powi(2)).sqrt(), w[0], w[1], 4, 20);
        }
        (f, e)
    }

    #[test]
    fn negative_or_nan_kappa_rejected() {
        assert!(EllipticModulus::new(-1e-3).is_err());
        assert!(EllipticModulus::new(f64::NAN).is_err());
        assert!(EllipticModulus::new(f64::INFINITY).is_err());
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(comp_f(m(0.0)), PI / 2.0);
        assert_eq!(comp_e(m(0.0)), PI / 2.0);
        assert!((period_h(m(0.0)) - PI * PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn matches_quadrature_oracle() {
        for k in [1e-6, 0.3, 1.0, 3.0, 17.0, 100.0, 1e3, 1e6] {
            let (fo, eo) = oracle(k);
            let v = EllipticValues::at(m(k));
            assert!((v.f - fo).abs() / fo < 1e-12, "F({k}): {} vs {}", v.f, fo);
            assert!((v.e - eo).abs() / eo < 1e-12, "E({k}): {} vs {}", v.e, eo);
        }
    }

    #[test]
    fn derivative_limits_at_zero() {
        assert!((deriv_e(m(0.0)) - PI / 8.0).abs() < 1e-15);
        assert!((deriv_f(m(0.0)) + PI / 8.0).abs() < 1e-15);
        assert!((deriv_e(m(1e-9)) - PI / 8.0).abs() < 1e-9);
        // series and closed forms agree across the switch
        let below = deriv_e(m(SERIES_CUTOFF * (1.0 - 1e-12)));
        let k = SERIES_CUTOFF * (1.0 + 1e-12);
        let (f, e) = agm_pair(k);
        assert!((below - (e - f) / (2.0 * k)).abs() < 1e-10);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for k in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let h = 1e-5 * k;
            let fd_f = (comp_f(m(k + h)) - comp_f(m(k - h))) / (2.0 * h);
            let fd_e = (comp_e(m(k + h)) - comp_e(m(k - h))) / (2.0 * h);
            assert!((deriv_f(m(k)) - fd_f).abs() / deriv_f(m(k)).abs() < 1e-8, "κ={k}");
            assert!((deriv_e(m(k)) - fd_e).abs() / deriv_e(m(k)).abs() < 1e-8, "κ={k}");
        }
    }

    #[test]
    fn h_is_negative_for_large_kappa() {
        assert!(period_h(m(1.0)) < period_h(m(0.0)));
        assert!(period_h(m(1e3)) < 0.0);
    }

    #[test]
    fn solve_h_edge_cases() {
        assert_eq!(solve_h(PI * PI / 6.0).unwrap().kappa(), Some(0.0));
        assert_eq!(solve_h(2.0 * PI * PI / 3.0).unwrap(), HRoot::NoSolution);
        assert!(solve_h(0.0).is_err());
        assert!(solve_h(-1.0).is_err());
        let target = 2.0 * PI * PI / 27.0;
        let k3 = solve_h(target).unwrap().kappa().unwrap();
        assert!(k3 > 0.0);
        assert!((period_h(m(k3)) - target).abs() < 1e-10);
    }

    #[test]
    fn solve_h_near_top_is_continuous() {
        // H ≈ π²/6 - cκ² near zero, so small deficits give κ ~ sqrt(deficit)
        let k = solve_h(H_AT_ZERO - 1e-8).unwrap().kappa().unwrap();
        assert!(k > 1e-5 && k < 1e-2, "{k}");
        assert!((period_h(m(k)) - (H_AT_ZERO - 1e-8)).abs() < 1e-13);
    }

    #[test]
    fn zero_root_brackets() {
        let r = kappa_zero_root();
        assert!(period_h(m(r)).abs() < 1e-10);
        assert!(period_h(m(0.5 * r)) > 0.0);
        assert!(period_h(m(2.0 * r)) < 0.0);
    }

    #[test]
    fn table_shape() {
        let t = table(0.0, 2.0, 5, false).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t[0].kappa, 0.0);
        assert_eq!(t[4].kappa, 2.0);
        assert!(table(0.0, 1.0, 3, true).is_err());
        assert!(table(1.0, 0.5, 3, false).is_err());
    }
}
