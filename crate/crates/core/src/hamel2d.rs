//! Zero-flux (-1)-homogeneous solutions in the plane.
//!
//! On the unit circle a (-1)-homogeneous field is `u = (f(θ) e_r + v(θ) e_θ)/r`,
//! `p = P(θ)/r²`. Besides the swirling constants (`f = 0`, `v` constant,
//! `P = -v²/2`) the zero-flux solutions have `v = 0` and `f` a 2π/k-periodic
//! solution of
//!
//! ```text
//! f'' = -4f - f² + b,      (f')² = 2E - 2V(f),      V(u) = u³/3 + 2u² - bu
//! ```
//!
//! whose energy polynomial `2E - 2V` has roots `e1 ≥ e2 ≥ e3` with
//! `e1 + e2 + e3 = -6`. The roots for mode `k` come from `H(κ) = 2π²/(3k²)`.
//!
//! Angles are measured from the `x2` axis: `x = r (sin θ, cos θ)`,
//! `e_r = (sin θ, cos θ)`, `e_θ = (cos θ, -sin θ)`.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::elliptic::{self, EllipticModulus, EllipticValues, HRoot};
use crate::error::{domain, Error, Result};
use crate::fd_oracle::HomogeneousField;
use crate::quad;

/// Roots `e1 ≥ e2 ≥ e3` of the energy polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootTriple {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

/// Allowed violation of `e1 + e2 + e3 = -6`.
pub const ROOT_SUM_TOL: f64 = 1e-10;

impl RootTriple {
    pub fn new(e1: f64, e2: f64, e3: f64) -> Result<Self> {
        if !(e1.is_finite() && e2.is_finite() && e3.is_finite()) {
            return domain("root triple must be finite");
        }
        if !(e1 >= e2 && e2 >= e3) {
            return domain(format!("roots must satisfy e1 ≥ e2 ≥ e3, got ({e1}, {e2}, {e3})"));
        }
        let sum = e1 + e2 + e3;
        if (sum + 6.0).abs() > ROOT_SUM_TOL * (1.0 + e1.abs() + e3.abs()) {
            return Err(Error::Consistency(format!("roots sum to {sum}, not -6")));
        }
        Ok(Self { e1, e2, e3 })
    }

    /// Triple with `e2 - e3 = δ`, `e1 - e2 = κδ` and sum -6.
    pub fn from_kappa_delta(kappa: f64, delta: f64) -> Result<Self> {
        if !(kappa >= 0.0 && delta >= 0.0 && kappa.is_finite() && delta.is_finite()) {
            return domain(format!("need κ ≥ 0 and δ ≥ 0, got κ = {kappa}, δ = {delta}"));
        }
        let e2 = (-6.0 - (kappa - 1.0) * delta) / 3.0;
        Self::new(e2 + kappa * delta, e2, e2 - delta)
    }

    pub fn delta(&self) -> f64 {
        self.e2 - self.e3
    }

    pub fn kappa(&self) -> f64 {
        let d = self.delta();
        if d > 0.0 {
            (self.e1 - self.e2) / d
        } else {
            f64::INFINITY
        }
    }

    /// Oscillation range `e1 - e2` of the profile.
    pub fn amplitude(&self) -> f64 {
        self.e1 - self.e2
    }

    pub fn is_degenerate(&self) -> bool {
        self.e1 == self.e2 || self.e2 == self.e3
    }
}

/// Constants `b` and `E` of the ODE for a root triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConstants {
    pub b: f64,
    pub energy: f64,
}

/// Matches `2E - 2V(u) = -(2/3)(u - e1)(u - e2)(u - e3)`.
pub fn derived_constants(roots: &RootTriple) -> Result<OdeConstants> {
    let RootTriple { e1, e2, e3 } = *roots;
    let sum = e1 + e2 + e3;
    // u² coefficient: -4 on the left, (2/3)(e1 + e2 + e3) on the right
    if (sum + 6.0).abs() > ROOT_SUM_TOL * (1.0 + e1.abs() + e3.abs()) {
        return Err(Error::Consistency(format!("roots sum to {sum}, not -6")));
    }
    Ok(OdeConstants {
        b: -(e1 * e2 + e1 * e3 + e2 * e3) / 3.0,
        energy: e1 * e2 * e3 / 3.0,
    })
}

/// `V(u) = u³/3 + 2u² - bu`.
pub fn potential(u: f64, b: f64) -> f64 {
    u * u * u / 3.0 + 2.0 * u * u - b * u
}

/// Roots and elliptic parameters of mode `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub k: u32,
    pub kappa: f64,
    pub delta: f64,
    pub roots: RootTriple,
    /// False for the κ = 0 triple (0, 0, -6), which is the linearized oscillation.
    pub nontrivial: bool,
}

/// Solves `H(κ) = 2π²/(3k²)` and builds the root triple.
/// `Ok(None)` means no κ ≥ 0 exists (k = 1).
pub fn roots_for_mode(k: i64) -> Result<Option<ModeSolution>> {
    if k <= 0 {
        return domain(format!("mode number must be positive, got {k}"));
    }
    let k = u32::try_from(k).map_err(|_| Error::Domain(format!("mode number {k} is too large")))?;
    let target = 2.0 * PI * PI / (3.0 * f64::from(k) * f64::from(k));
    let m = match elliptic::solve_h(target)? {
        HRoot::NoSolution => return Ok(None),
        HRoot::Root(m) => m,
    };
    let kappa = m.kappa();
    let EllipticValues { f, e } = EllipticValues::at(m);
    let delta = 2.0 * f / (e - (2.0 + kappa) / 3.0 * f);
    let roots = RootTriple::from_kappa_delta(kappa, delta)?;
    Ok(Some(ModeSolution {
        k,
        kappa,
        delta,
        roots,
        nontrivial: kappa > 0.0,
    }))
}

/// `6κF(κ)²k²/π²`, the closed-form oscillation range of mode `k`.
pub fn amplitude_formula(kappa: f64, k: u32) -> Result<f64> {
    let f = elliptic::comp_f(EllipticModulus::new(kappa)?);
    let kk = f64::from(k);
    Ok(6.0 * kappa * f * f * kk * kk / (PI * PI))
}

/// Limit of `(e1 - e2)/k²` as k → ∞: `6κ∞F(κ∞)²/π²` with `H(κ∞) = 0`.
pub fn amplitude_limit() -> f64 {
    let k = elliptic::kappa_zero_root();
    let f = elliptic::comp_f(EllipticModulus::new(k).expect("positive root"));
    6.0 * k * f * f / (PI * PI)
}

/// Direct quadratures of the half-period and flux integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootIntegrals {
    /// `∫_{e2}^{e1} du/√((e1-u)(u-e2)(u-e3))`
    pub t: f64,
    /// `∫_{e2}^{e1} u du/√((e1-u)(u-e2)(u-e3))`
    pub i: f64,
}

/// Evaluates both integrals with `u = e2 + (e1 - e2) sin²φ`, which removes the
/// endpoint singularities.
pub fn root_integrals(roots: &RootTriple) -> Result<RootIntegrals> {
    let RootTriple { e1, e2, e3 } = *roots;
    if !(e1 > e2 && e2 > e3) {
        return domain("root integrals need strictly ordered roots");
    }
    let u = |phi: f64| e2 + (e1 - e2) * phi.sin().powi(2);
    let t = quad::integrate(|phi| 2.0 / (u(phi) - e3).sqrt(), 0.0, 0.5 * PI, 1e-14, 1e-14)?;
    let i = quad::integrate(|phi| 2.0 * u(phi) / (u(phi) - e3).sqrt(), 0.0, 0.5 * PI, 1e-14, 1e-14)?;
    Ok(RootIntegrals {
        t: t.value,
        i: i.value,
    })
}

/// `√(2/3) π/k`, the value of the half-period integral for mode `k`.
pub fn period_integral_target(k: u32) -> f64 {
    (2.0f64 / 3.0).sqrt() * PI / f64::from(k)
}

// ---------------------------------------------------------------------------
// Gauss-Legendre collocation

const STAGES: usize = 4;

struct Tableau {
    a: [[f64; STAGES]; STAGES],
    b: [f64; STAGES],
    c: [f64; STAGES],
}

fn tableau() -> &'static Tableau {
    static T: OnceLock<Tableau> = OnceLock::new();
    T.get_or_init(|| {
        let (x, _) = quad::gauss_legendre(STAGES);
        let c: Vec<f64> = x.iter().map(|v| 0.5 * (v + 1.0)).collect();
        let lagrange = |j: usize, s: f64| -> f64 {
            (0..STAGES)
                .filter(|&m| m != j)
                .map(|m| (s - c[m]) / (c[j] - c[m]))
                .product()
        };
        // ∫_0^{upper} ℓ_j, exact with a 4-point rule since deg ℓ_j = 3
        let integral = |j: usize, upper: f64| quad::composite_gauss(|s| lagrange(j, s), 0.0, upper, 1, STAGES);
        let mut t = Tableau {
            a: [[0.0; STAGES]; STAGES],
            b: [0.0; STAGES],
            c: [0.0; STAGES],
        };
        for i in 0..STAGES {
            t.c[i] = c[i];
            t.b[i] = integral(i, 1.0);
            for j in 0..STAGES {
                t.a[i][j] = integral(j, c[i]);
            }
        }
        t
    })
}

/// State `[u, u', ∫u]` of the profile ODE.
type State = [f64; 3];

fn rhs(y: &State, b: f64) -> State {
    [y[1], -4.0 * y[0] - y[0] * y[0] + b, y[0]]
}

/// Increment of one Gauss-Legendre step of size `h` (order 8, symplectic).
fn gl_increment(y: &State, h: f64, b: f64) -> State {
    let t = tableau();
    let mut k = [rhs(y, b); STAGES];
    for _ in 0..60 {
        let mut next = k;
        let mut change: f64 = 0.0;
        for i in 0..STAGES {
            let mut yi = *y;
            for j in 0..STAGES {
                for c in 0..3 {
                    yi[c] += h * t.a[i][j] * k[j][c];
                }
            }
            next[i] = rhs(&yi, b);
            for c in 0..3 {
                change = change.max((next[i][c] - k[i][c]).abs());
            }
        }
        k = next;
        let scale = k.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        if change <= 1e-16 * scale {
            break;
        }
    }
    let mut inc = [0.0; 3];
    for j in 0..STAGES {
        for c in 0..3 {
            inc[c] += h * t.b[j] * k[j][c];
        }
    }
    inc
}

fn gl_step(y: &State, h: f64, b: f64) -> State {
    let d = gl_increment(y, h, b);
    [y[0] + d[0], y[1] + d[1], y[2] + d[2]]
}

/// Default number of steps per 2π.
pub const DEFAULT_PROFILE_STEPS: usize = 20_000;

/// Diagnostics from integrating a profile over one full turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileDiagnostics {
    /// First return time to the maximum.
    pub period: f64,
    /// `(1/2π) ∫ f`.
    pub mean: f64,
    /// `max |f'² + 2V(f) - 2E|` over all steps.
    pub energy_drift: f64,
    /// `energy_drift / max(2|E|, 1)`; the absolute value is bounded below by
    /// the roundoff in evaluating `V` at large amplitude.
    pub energy_drift_relative: f64,
    /// Sampled `max f - min f`.
    pub range: f64,
    /// `max |f(θ) - f(θ + 2π/k)|` over the samples.
    pub shift_defect: f64,
}

/// A mode-k profile sampled on `[0, 2π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamelProfile {
    pub k: u32,
    pub kappa: f64,
    pub delta: f64,
    pub roots: RootTriple,
    pub b_const: f64,
    pub energy_e: f64,
    /// The profile maximum sits at `theta0`.
    pub theta0: f64,
    /// `(θ, f, p)` at `n_steps + 1` equally spaced angles.
    pub samples: Vec<(f64, f64, f64)>,
    pub c_pressure: f64,
    pub diagnostics: ProfileDiagnostics,
    /// `f'` at the same angles as `samples`.
    #[serde(skip)]
    slopes: Vec<f64>,
}

/// Relative tolerance for period and mean checks during construction.
pub const PROFILE_TOL: f64 = 1e-8;

/// Integrates the profile ODE from `f(θ0) = e1`, `f'(θ0) = 0` over a full turn.
pub fn integrate_profile(roots: &RootTriple, k: u32, theta0: f64, n_steps: usize) -> Result<HamelProfile> {
    if k < 3 {
        return domain(format!("profile construction needs k ≥ 3, got {k}"));
    }
    if roots.is_degenerate() {
        return domain("profile construction needs a nondegenerate root triple");
    }
    if n_steps < 64 * k as usize {
        return domain(format!("{n_steps} steps are too few for mode {k}"));
    }
    if !theta0.is_finite() {
        return domain("phase must be finite");
    }
    let consts = derived_constants(roots)?;
    let b = consts.b;
    let h = 2.0 * PI / n_steps as f64;
    let energy_of = |y: &State| y[1] * y[1] + 2.0 * potential(y[0], b) - 2.0 * consts.energy;

    // base orbit with the maximum at s = 0, compensated summation of increments
    let mut ys: Vec<State> = Vec::with_capacity(n_steps + 1);
    let mut y: State = [roots.e1, 0.0, 0.0];
    let mut comp = [0.0; 3];
    let mut drift = energy_of(&y).abs();
    ys.push(y);
    for _ in 0..n_steps {
        let d = gl_increment(&y, h, b);
        for c in 0..3 {
            let dy = d[c] - comp[c];
            let t = y[c] + dy;
            comp[c] = (t - y[c]) - dy;
            y[c] = t;
        }
        drift = drift.max(energy_of(&y).abs());
        ys.push(y);
    }

    let period = first_return(&ys, h, b)?;
    let target = 2.0 * PI / f64::from(k);
    if (period - target).abs() > PROFILE_TOL * target {
        return Err(Error::Consistency(format!(
            "profile period {period} differs from 2π/{k} = {target}; the root triple is wrong"
        )));
    }
    let mean = ys[n_steps][2] / (2.0 * PI);
    let amplitude_scale = roots.amplitude().max(1.0);
    if mean.abs() > PROFILE_TOL * amplitude_scale {
        return Err(Error::Consistency(format!("profile mean {mean:e} is not zero")));
    }

    let c_pressure = -0.5 * b;
    let base = BaseOrbit {
        ys: Arc::new(ys),
        h,
        b,
    };
    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut slopes = Vec::with_capacity(n_steps + 1);
    let shift_steps = (theta0 / h).round();
    let aligned = (theta0 - shift_steps * h).abs() < 1e-14;
    for j in 0..=n_steps {
        let theta = j as f64 * h;
        let st = if aligned {
            let idx = (j as i64 - shift_steps as i64).rem_euclid(n_steps as i64) as usize;
            base.ys[idx]
        } else {
            base.state_at(theta - theta0)
        };
        samples.push((theta, st[0], 2.0 * st[0] + c_pressure));
        slopes.push(st[1]);
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.1), hi.max(s.1)));
    let shift = n_steps / k as usize;
    let shift_defect = if n_steps.is_multiple_of(k as usize) {
        (0..=n_steps - shift)
            .map(|j| (samples[j].1 - samples[j + shift].1).abs())
            .fold(0.0, f64::max)
    } else {
        (0..=n_steps)
            .map(|j| (samples[j].1 - base.state_at(samples[j].0 - theta0 + target)[0]).abs())
            .fold(0.0, f64::max)
    };
    Ok(HamelProfile {
        k,
        kappa: roots.kappa(),
        delta: roots.delta(),
        roots: *roots,
        b_const: b,
        energy_e: consts.energy,
        theta0,
        samples,
        c_pressure,
        diagnostics: ProfileDiagnostics {
            period,
            mean,
            energy_drift: drift,
            energy_drift_relative: drift / (2.0 * consts.energy.abs()).max(1.0),
            range: hi - lo,
            shift_defect,
        },
        slopes,
    })
}

/// Builds mode `k` from [`roots_for_mode`] and integrates it.
pub fn mode_profile(k: u32, theta0: f64, n_steps: usize) -> Result<HamelProfile> {
    match roots_for_mode(i64::from(k))? {
        None => Err(Error::Domain(format!("mode {k} has no solution: 2π²/(3k²) exceeds H(0) = π²/6"))),
        Some(m) if !m.nontrivial => Err(Error::Domain(format!(
            "mode {k} is the trivial κ = 0 oscillation (roots 0, 0, -6); no nonlinear profile exists"
        ))),
        Some(m) => integrate_profile(&m.roots, k, theta0, n_steps),
    }
}

struct BaseOrbit {
    ys: Arc<Vec<State>>,
    h: f64,
    b: f64,
}

impl BaseOrbit {
    /// State at orbit time `s`, reduced modulo 2π.
    fn state_at(&self, s: f64) -> State {
        let n = self.ys.len() - 1;
        let s = s.rem_euclid(2.0 * PI);
        let j = ((s / self.h).round() as usize).min(n);
        let ds = s - j as f64 * self.h;
        if ds == 0.0 {
            self.ys[j]
        } else {
            gl_step(&self.ys[j], ds, self.b)
        }
    }
}

/// Time of the first return to the maximum: the first `+ → -` sign change of
/// `u'` after the minimum, located inside its step by bisection.
fn first_return(ys: &[State], h: f64, b: f64) -> Result<f64> {
    let mut passed_min = false;
    for j in 1..ys.len() {
        let (a, c) = (ys[j - 1][1], ys[j][1]);
        if !passed_min {
            if a < 0.0 && c >= 0.0 {
                passed_min = true;
            }
            continue;
        }
        if a > 0.0 && c <= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if gl_step(&ys[j - 1], mid, b)[1] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok((j - 1) as f64 * h + 0.5 * (lo + hi));
        }
    }
    Err(Error::Consistency("profile does not return to its maximum within 2π".into()))
}

impl HamelProfile {
    /// Profile value and slope at any angle.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let n = self.samples.len() - 1;
        let h = 2.0 * PI / n as f64;
        let s = theta.rem_euclid(2.0 * PI);
        let j = ((s / h).round() as usize).min(n);
        let ds = s - self.samples[j].0;
        let y: State = [self.samples[j].1, self.slopes[j], 0.0];
        if ds == 0.0 {
            (y[0], y[1])
        } else {
            let z = gl_step(&y, ds, self.b_const);
            (z[0], z[1])
        }
    }

    pub fn pressure_at(&self, theta: f64) -> f64 {
        2.0 * self.eval(theta).0 + self.c_pressure
    }

    /// `(1/2π) ∫ f²` by the trapezoid rule on the samples.
    pub fn mean_square(&self) -> f64 {
        let n = self.samples.len() - 1;
        self.samples[..n].iter().map(|s| s.1 * s.1).sum::<f64>() / n as f64
    }

    /// `(1/2π) ∫ p` by the trapezoid rule on the samples.
    pub fn mean_pressure(&self) -> f64 {
        let n = self.samples.len() - 1;
        self.samples[..n].iter().map(|s| s.2).sum::<f64>() / n as f64
    }

    /// The (-1)-homogeneous planar field `u = f e_r / r`, `p = (2f + C)/r²`.
    pub fn field(&self) -> HomogeneousField {
        let me = Arc::new(self.clone());
        HomogeneousField::new(2, format!("hamel(k={})", self.k), move |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let theta = x[0].atan2(x[1]);
            let (f, _) = me.eval(theta);
            (vec![f * x[0] / r2, f * x[1] / r2], (2.0 * f + me.c_pressure) / r2)
        })
    }
}

/// `(θ, p)` pairs with `p = 2f + C`.
pub fn pressure_of_profile(profile: &HamelProfile) -> Vec<(f64, f64)> {
    profile.samples.iter().map(|s| (s.0, 2.0 * s.1 + profile.c_pressure)).collect()
}

/// Residuals of the circle system `(p - 2f)' = 0`, `-f'' + vf' - f² - v² - 2p = 0`, `v' = 0`
/// for a profile given with its derivatives.
pub fn circle_residual(f: f64, df: f64, d2f: f64, v: f64, dv: f64, p: f64, dp: f64) -> [f64; 3] {
    [dp - 2.0 * df, -d2f + v * df - f * f - v * v - 2.0 * p, dv]
}

/// Largest circle-system residual of a Hamel profile over its samples, with
/// `f''` taken from the ODE.
pub fn profile_circle_residual(profile: &HamelProfile) -> f64 {
    let b = profile.b_const;
    profile
        .samples
        .iter()
        .zip(&profile.slopes)
        .map(|(s, &df)| {
            let d2f = -4.0 * s.1 - s.1 * s.1 + b;
            let r = circle_residual(s.1, df, d2f, 0.0, 0.0, s.2, 2.0 * df);
            r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .fold(0.0, f64::max)
}

/// The swirling branch `f = 0`, `v` constant, `p = -v²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantBranch {
    pub v_const: f64,
    pub f_const: f64,
    pub p_const: f64,
}

pub fn constant_branch(v: f64) -> ConstantBranch {
    ConstantBranch {
        v_const: v,
        f_const: 0.0,
        p_const: -0.5 * v * v,
    }
}

impl ConstantBranch {
    pub fn circle_residual(&self) -> [f64; 3] {
        circle_residual(self.f_const, 0.0, 0.0, self.v_const, 0.0, self.p_const, 0.0)
    }

    /// `u = v e_θ / r`, `p = -v²/(2r²)`.
    pub fn field(&self) -> HomogeneousField {
        let v = self.v_const;
        let p = self.p_const;
        HomogeneousField::new(2, format!("swirl(v={v})"), move |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (vec![v * x[1] / r2, -v * x[0] / r2], p / r2)
        })
    }
}

fn check_index(name: &str, i: usize) -> Result<()> {
    if i > 1 {
        return domain(format!("index {name} = {i} must be 0 or 1"));
    }
    Ok(())
}

fn kron(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// `G_ijk = (1/4π) ∂_k (δ_ij log(1/|x|) + x_i x_j/|x|²)`, indices in {0, 1}.
pub fn stokes_green(i: usize, j: usize, k: usize, x: [f64; 2]) -> Result<f64> {
    check_index("i", i)?;
    check_index("j", j)?;
    check_index("k", k)?;
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 || !r2.is_finite() {
        return domain("the Green function is singular at the origin");
    }
    let term = -kron(i, j) * x[k] / r2 + (kron(i, k) * x[j] + kron(j, k) * x[i]) / r2
        - 2.0 * x[i] * x[j] * x[k] / (r2 * r2);
    Ok(term / (4.0 * PI))
}

/// Pressure paired with `G_·jk`: `(1/2π)(δ_jk/|x|² - 2 x_j x_k/|x|⁴)`.
pub fn stokes_green_pressure(j: usize, k: usize, x: [f64; 2]) -> Result<f64> {
    check_index("j", j)?;
    check_index("k", k)?;
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 || !r2.is_finite() {
        return domain("the Green pressure is singular at the origin");
    }
    Ok((kron(j, k) / r2 - 2.0 * x[j] * x[k] / (r2 * r2)) / (2.0 * PI))
}

/// The field `x ↦ (G_0jk, G_1jk)` with its pressure.
pub fn green_field(j: usize, k: usize) -> Result<HomogeneousField> {
    check_index("j", j)?;
    check_index("k", k)?;
    Ok(HomogeneousField::new(2, format!("green(j={j}, k={k})"), move |x: &[f64]| {
        let y = [x[0], x[1]];
        let u0 = stokes_green(0, j, k, y).expect("x ≠ 0");
        let u1 = stokes_green(1, j, k, y).expect("x ≠ 0");
        (vec![u0, u1], stokes_green_pressure(j, k, y).expect("x ≠ 0"))
    }))
}

/// Field `f(θ) e_r / r` for `f = cos 2θ / 4π`.
pub fn dipole_extension(x: [f64; 2]) -> Result<[f64; 2]> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 {
        return domain("the dipole extension is singular at the origin");
    }
    let theta = x[0].atan2(x[1]);
    let f = (2.0 * theta).cos() / (4.0 * PI);
    Ok([f * x[0] / r2, f * x[1] / r2])
}

/// Outcome of the k = 2 exclusion check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeVerdict {
    pub k: u32,
    pub kappa: Option<f64>,
    pub nontrivial: bool,
}

/// Confirms that `H(κ) = π²/6` only has κ = 0, so mode 2 is the linear
/// oscillation and admits no nonlinear deformation.
pub fn mode2_exclusion() -> Result<ModeVerdict> {
    let root = elliptic::solve_h(elliptic::H_AT_ZERO)?;
    let kappa = root.kappa();
    if kappa != Some(0.0) {
        return Err(Error::Consistency(format!("H(κ) = π²/6 solved by κ = {kappa:?}, expected 0")));
    }
    let m = roots_for_mode(2)?.ok_or_else(|| Error::Consistency("mode 2 reported no solution".into()))?;
    if m.nontrivial {
        return Err(Error::Consistency("mode 2 reported a nontrivial triple".into()));
    }
    Ok(ModeVerdict {
        k: 2,
        kappa,
        nontrivial: false,
    })
}

/// Verdict for any mode number.
pub fn mode_verdict(k: i64) -> Result<ModeVerdict> {
    let m = roots_for_mode(k)?;
    Ok(ModeVerdict {
        k: k as u32,
        kappa: m.map(|m| m.kappa),
        nontrivial: m.is_some_and(|m| m.nontrivial),
    })
}

/// One row of the amplitude convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub k: u32,
    pub kappa: f64,
    pub delta: f64,
    pub amplitude: f64,
    pub scaled: f64,
    pub limit: f64,
    pub relative_gap: f64,
}

/// `(e1 - e2)/k²` for `k = 3..=kmax` against its limit.
pub fn amplitude_table(kmax: u32) -> Result<Vec<AmplitudeRow>> {
    if kmax < 3 {
        return domain(format!("kmax must be at least 3, got {kmax}"));
    }
    let limit = amplitude_limit();
    (3..=kmax)
        .map(|k| {
            let m = roots_for_mode(i64::from(k))?.expect("k ≥ 3 has a root");
            let amp = m.roots.amplitude();
            let scaled = amp / f64::from(k * k);
            Ok(AmplitudeRow {
                k,
                kappa: m.kappa,
                delta: m.delta,
                amplitude: amp,
                scaled,
                limit,
                relative_gap: (scaled - limit).abs() / limit,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Sampled profiles on the circle

/// Trigonometric interpolant of `(f, p)` sampled at `θ_j = 2πj/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    pub thetas: Vec<f64>,
    pub f: Vec<f64>,
    pub p: Vec<f64>,
    fc: Vec<(f64, f64)>,
    pc: Vec<(f64, f64)>,
}

/// Uniform circle grid without the repeated endpoint.
pub fn circle_grid(points: usize) -> Vec<f64> {
    (0..points).map(|j| 2.0 * PI * j as f64 / points as f64).collect()
}

fn trig_coefficients(v: &[f64]) -> Vec<(f64, f64)> {
    let n = v.len();
    let table: Vec<(f64, f64)> = (0..n)
        .map(|r| {
            let (s, c) = (2.0 * PI * r as f64 / n as f64).sin_cos();
            (c, s)
        })
        .collect();
    let half = n / 2;
    let mut out: Vec<(f64, f64)> = (0..=half)
        .map(|k| {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, &x) in v.iter().enumerate() {
                let (c, s) = table[(k * j) % n];
                a += x * c;
                b += x * s;
            }
            let w = if k == 0 || (n.is_multiple_of(2) && k == half) { 1.0 } else { 2.0 };
            (w * a / n as f64, w * b / n as f64)
        })
        .collect();
    if n.is_multiple_of(2) {
        out[half].1 = 0.0;
    }
    let big = out.iter().fold(0.0f64, |m, c| m.max(c.0.abs()).max(c.1.abs()));
    for c in &mut out {
        if c.0.abs() < 4.0 * f64::EPSILON * big {
            c.0 = 0.0;
        }
        if c.1.abs() < 4.0 * f64::EPSILON * big {
            c.1 = 0.0;
        }
    }
    out
}

/// Value and first two derivatives of `Σ a_k cos kθ + b_k sin kθ`.
fn trig_eval(c: &[(f64, f64)], theta: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, &(a, b)) in c.iter().enumerate() {
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let kf = k as f64;
        let (s, co) = (kf * theta).sin_cos();
        out[0] += a * co + b * s;
        out[1] += kf * (b * co - a * s);
        out[2] -= kf * kf * (a * co + b * s);
    }
    out
}

impl PeriodicProfile {
    pub fn from_samples(f: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let n = f.len();
        if n < 8 {
            return domain("circle profile needs at least 8 samples");
        }
        if p.len() != n {
            return domain("f and p sample counts differ");
        }
        if f.iter().chain(&p).any(|v| !v.is_finite()) {
            return domain("circle profile contains non-finite samples");
        }
        let fc = trig_coefficients(&f);
        let pc = trig_coefficients(&p);
        Ok(Self {
            thetas: circle_grid(n),
            f,
            p,
            fc,
            pc,
        })
    }

    /// Samples a Hamel profile on `points` nodes.
    pub fn from_hamel(profile: &HamelProfile, points: usize) -> Result<Self> {
        let grid = circle_grid(points);
        let f: Vec<f64> = grid.iter().map(|&t| profile.eval(t).0).collect();
        let p = f.iter().map(|v| 2.0 * v + profile.c_pressure).collect();
        Self::from_samples(f, p)
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// `[f, f', f'', p, p']` at `theta`.
    pub fn jet(&self, theta: f64) -> [f64; 5] {
        let f = trig_eval(&self.fc, theta);
        let p = trig_eval(&self.pc, theta);
        [f[0], f[1], f[2], p[0], p[1]]
    }

    /// Largest circle-system residual (swirl-free) over the nodes, divided by
    /// `1 + max|f|²`.
    pub fn circle_residual_relative(&self) -> f64 {
        let scale = 1.0 + self.f.iter().fold(0.0f64, |m, v| m.max(v * v));
        self.thetas
            .iter()
            .map(|&t| {
                let [f, df, d2f, p, dp] = self.jet(t);
                circle_residual(f, df, d2f, 0.0, 0.0, p, dp)
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .fold(0.0, f64::max)
            / scale
    }

    /// Sampled zero-mean and periodicity data: `(mean of f, max coefficient beyond N/4)`.
    pub fn spectral_tail(&self) -> f64 {
        let big = self.fc.iter().fold(0.0f64, |m, c| m.max(c.0.hypot(c.1)));
        let q = self.fc.len() / 2;
        self.fc[q..].iter().fold(0.0f64, |m, c| m.max(c.0.hypot(c.1))) / big.max(f64::MIN_POSITIVE)
    }

    pub fn field(&self) -> HomogeneousField {
        let fc = self.fc.clone();
        let pc = self.pc.clone();
        HomogeneousField::new(2, format!("circle-profile(N={})", self.len()), move |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let theta = x[0].atan2(x[1]);
            let f = trig_eval(&fc, theta)[0];
            let p = trig_eval(&pc, theta)[0];
            (vec![f * x[0] / r2, f * x[1] / r2], p / r2)
        })
    }
}

// ---------------------------------------------------------------------------
// Classification sweep

/// Result of shooting one orbit of `u'' = -4u - u² + b` from a maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub b: f64,
    /// Starting maximum `u0`.
    pub u0: f64,
    pub period: f64,
    pub mean: f64,
}

/// Sweep coordinates: `q = √(4 + b)` and `σ > 0` placing the maximum at
/// `u0 = -2 + q + s q` with `s = 1 - e^(-σ)`, between the centre `-2 + q` and
/// the separatrix turning point `-2 + 2q`.
fn orbit_start(q: f64, sigma: f64) -> (f64, f64) {
    (q * q - 4.0, -2.0 + q - (-sigma).exp_m1() * q)
}

/// Largest `σ` on the sweep grid.
const SIGMA_MAX: f64 = 14.0;

/// Orbits longer than this are not followed by the sweep.
const MAX_SWEEP_PERIOD: f64 = 3.0 * PI;

fn add(y: &State, k: &State, h: f64) -> State {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

/// Half-orbit from the maximum to the next minimum with classical RK4 at
/// `per_period` steps per linearized period. `None` when the orbit is
/// unbounded or longer than the sweep follows.
fn shoot_rk4(q: f64, s: f64, per_period: usize) -> Option<Shot> {
    let (b, u0) = orbit_start(q, s);
    let omega = (2.0 * q).sqrt();
    let h = 2.0 * PI / (omega * per_period as f64);
    let f = |y: &State| rhs(y, b);
    let mut y: State = [u0, 0.0, 0.0];
    let mut t = 0.0;
    let mut started = false;
    while t < 0.5 * MAX_SWEEP_PERIOD {
        let k1 = f(&y);
        let k2 = f(&add(&y, &k1, 0.5 * h));
        let k3 = f(&add(&y, &k2, 0.5 * h));
        let k4 = f(&add(&y, &k3, h));
        let mut z = y;
        for c in 0..3 {
            z[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if !z[0].is_finite() {
            return None;
        }
        if z[1] < 0.0 {
            started = true;
        }
        if started && z[1] >= 0.0 {
            let w = y[1] / (y[1] - z[1]);
            let half = t + w * h;
            let integral = y[2] + w * (z[2] - y[2]);
            return Some(Shot {
                b,
                u0,
                period: 2.0 * half,
                mean: integral / half,
            });
        }
        y = z;
        t += h;
    }
    None
}

/// Half-orbit with the Gauss-Legendre scheme and a bisected crossing. The
/// returned period and mean are those of the full orbit.
pub fn shoot_precise(b: f64, u0: f64) -> Result<Shot> {
    if !(b > -4.0) {
        return domain(format!("b = {b} has no oscillating orbits"));
    }
    let q = (4.0 + b).sqrt();
    if !(u0 > -2.0 + q && u0 < -2.0 + 2.0 * q) {
        return domain(format!("u0 = {u0} does not start a bounded orbit for b = {b}"));
    }
    let omega = (2.0 * q).sqrt();
    let h = 2.0 * PI / (omega * 2000.0);
    let limit = 2.0 * MAX_SWEEP_PERIOD;
    let mut y: State = [u0, 0.0, 0.0];
    let mut t = 0.0;
    let mut started = false;
    while t < limit {
        let z = gl_step(&y, h, b);
        if z[1] < 0.0 {
            started = true;
        }
        if started && z[1] >= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if gl_step(&y, mid, b)[1] < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            let end = gl_step(&y, tau, b);
            let half = t + tau;
            return Ok(Shot {
                b,
                u0,
                period: 2.0 * half,
                mean: end[2] / half,
            });
        }
        y = z;
        t += h;
    }
    Err(Error::NoConvergence {
        what: format!("orbit from u0 = {u0} at b = {b} does not reach its minimum"),
        iterations: (limit / h) as usize,
        residual: y[1],
    })
}

/// Parameters of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_b: usize,
    pub n_s: usize,
    /// Upper end of the swept `b` range; the lower end is -4.
    pub b_max: f64,
    /// Acceptance tolerance on `|period - 2π/k|` and `|mean|` for refined roots.
    pub tol: f64,
    /// RK4 steps per linearized period in the coarse pass.
    pub steps_per_period: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_b: 200,
            n_s: 200,
            b_max: 15_000.0,
            tol: 1e-6,
            steps_per_period: 256,
        }
    }
}

/// How a refined zero-mean periodic orbit was identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepClass {
    /// Matches the catalog profile of its mode.
    Catalog,
    /// The rest state `u ≡ 0`.
    Trivial,
    /// Not explained by the catalog.
    Unexplained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSolution {
    pub k: u32,
    pub b: f64,
    pub u0: f64,
    pub amplitude: f64,
    pub period_error: f64,
    pub mean: f64,
    pub class: SweepClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub k: u32,
    pub b: f64,
    pub e1: f64,
    pub e2: f64,
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    /// Largest mode whose period `2π/k` is reachable in the swept range.
    pub k_max: u32,
    pub evaluated: usize,
    pub candidate_cells: usize,
    pub solutions: Vec<SweepSolution>,
    pub catalog: Vec<CatalogEntry>,
    /// Every refined solution is in the catalog or trivial, and every catalog
    /// entry inside the range was found.
    pub complete: bool,
}

impl SweepReport {
    pub fn unexplained(&self) -> usize {
        self.solutions.iter().filter(|s| s.class == SweepClass::Unexplained).count()
    }

    pub fn missing(&self) -> usize {
        self.catalog.iter().filter(|e| !e.found).count()
    }
}

/// Searches `(b, u0)` for zero-mean orbits of period `2π/k` and compares the
/// hits with the mode catalog.
pub fn classification_sweep(config: &SweepConfig) -> Result<SweepReport> {
    use rayon::prelude::*;

    if config.n_b < 4 || config.n_s < 4 || !(config.b_max > 0.0) || !(config.tol > 0.0) {
        return domain("sweep needs at least a 4x4 grid, positive b_max and tolerance");
    }
    if config.steps_per_period < 32 {
        return domain("sweep needs at least 32 steps per period");
    }
    let q_max = (4.0 + config.b_max).sqrt();
    let q_min = q_max / (4 * config.n_b) as f64;
    let qs: Vec<f64> = (0..=config.n_b)
        .map(|i| q_min + (q_max - q_min) * i as f64 / config.n_b as f64)
        .collect();
    let ss: Vec<f64> = (0..=config.n_s)
        .map(|j| SIGMA_MAX * (j as f64 + 0.5) / (config.n_s as f64 + 1.0))
        .collect();
    let k_max = (2.0 * q_max).sqrt().floor() as u32;

    let grid: Vec<Option<Shot>> = (0..qs.len() * ss.len())
        .into_par_iter()
        .map(|idx| shoot_rk4(qs[idx / ss.len()], ss[idx % ss.len()], config.steps_per_period))
        .collect();
    let at = |i: usize, j: usize| grid[i * ss.len() + j];

    let mut cells: Vec<(u32, usize, usize)> = Vec::new();
    for i in 0..config.n_b {
        for j in 0..config.n_s {
            let corners = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            let Some(c) = corners.iter().copied().collect::<Option<Vec<Shot>>>() else {
                continue;
            };
            if !changes_sign(c.iter().map(|s| s.mean)) {
                continue;
            }
            for k in 1..=k_max {
                let target = 2.0 * PI / f64::from(k);
                if changes_sign(c.iter().map(|s| s.period - target)) {
                    cells.push((k, i, j));
                }
            }
        }
    }

    let refined: Vec<Option<SweepSolution>> = cells
        .par_iter()
        .map(|&(k, i, j)| {
            let q = 0.5 * (qs[i] + qs[i + 1]);
            let s = 0.5 * (ss[j] + ss[j + 1]);
            refine_orbit(k, q, s, config.tol)
        })
        .collect();

    let mut catalog = Vec::new();
    for k in 3..=k_max {
        let Some(m) = roots_for_mode(i64::from(k))? else {
            continue;
        };
        let c = derived_constants(&m.roots)?;
        if c.b <= config.b_max {
            catalog.push(CatalogEntry {
                k,
                b: c.b,
                e1: m.roots.e1,
                e2: m.roots.e2,
                found: false,
            });
        }
    }

    let same = |k1: u32, b1: f64, u1: f64, k2: u32, b2: f64, u2: f64| {
        k1 == k2 && (b1 - b2).abs() < 1e-6 * (1.0 + b2.abs()) && (u1 - u2).abs() < 1e-6 * (1.0 + u2.abs())
    };
    let mut solutions: Vec<SweepSolution> = Vec::new();
    for mut sol in refined.into_iter().flatten() {
        let matched = catalog
            .iter_mut()
            .find(|e| same(sol.k, sol.b, sol.u0, e.k, e.b, e.e1));
        sol.class = match matched {
            Some(e) => {
                e.found = true;
                SweepClass::Catalog
            }
            // residuals are quadratic in the amplitude near the rest state
            None if sol.amplitude <= config.tol.sqrt() && sol.b.abs() <= config.tol.sqrt() => SweepClass::Trivial,
            None => SweepClass::Unexplained,
        };
        let duplicate = solutions.iter().any(|o| {
            same(sol.k, sol.b, sol.u0, o.k, o.b, o.u0)
                || (sol.class == SweepClass::Trivial && o.class == SweepClass::Trivial && o.k == sol.k)
        });
        if !duplicate {
            solutions.push(sol);
        }
    }
    solutions.sort_by(|a, b| a.k.cmp(&b.k).then(a.b.total_cmp(&b.b)));
    let complete = solutions.iter().all(|s| s.class != SweepClass::Unexplained) && catalog.iter().all(|e| e.found);
    Ok(SweepReport {
        config: *config,
        k_max,
        evaluated: grid.len(),
        candidate_cells: cells.len(),
        solutions,
        catalog,
        complete,
    })
}

fn changes_sign(values: impl Iterator<Item = f64>) -> bool {
    let (mut neg, mut pos) = (false, false);
    for v in values {
        neg |= v <= 0.0;
        pos |= v >= 0.0;
    }
    neg && pos
}

/// Newton in `(q, σ)` on `(period - 2π/k, mean)` using the precise shooter.
/// `None` when the iteration stalls away from both a root and the rest state.
fn refine_orbit(k: u32, q0: f64, s0: f64, tol: f64) -> Option<SweepSolution> {
    let target = 2.0 * PI / f64::from(k);
    let eval = |q: f64, s: f64| -> Option<[f64; 2]> {
        let (b, u0) = orbit_start(q, s);
        shoot_precise(b, u0).ok().map(|r| [r.period - target, r.mean])
    };
    let norm = |f: &[f64; 2]| f[0].abs().max(f[1].abs());
    let (mut q, mut s) = (q0, s0);
    let mut fx = eval(q, s)?;
    for _ in 0..60 {
        if norm(&fx) < 1e-3 * tol || s < 1e-9 {
            break;
        }
        let dq = 1e-7 * q.max(1.0);
        let ds = 1e-7 * s.max(1e-2);
        let fq = eval(q + dq, s)?;
        let fs = eval(q, s + ds)?;
        let j = [
            [(fq[0] - fx[0]) / dq, (fs[0] - fx[0]) / ds],
            [(fq[1] - fx[1]) / dq, (fs[1] - fx[1]) / ds],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let step_q = -(j[1][1] * fx[0] - j[0][1] * fx[1]) / det;
        let step_s = -(j[0][0] * fx[1] - j[1][0] * fx[0]) / det;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-6 {
            let (nq, ns) = (q + t * step_q, s + t * step_s);
            if nq > 0.0 && ns > 0.0 {
                if let Some(nf) = eval(nq, ns) {
                    if norm(&nf) < norm(&fx) {
                        q = nq;
                        s = ns;
                        fx = nf;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (b, u0) = orbit_start(q, s);
    let amplitude = u0 + 2.0 - q;
    let converged = fx[0].abs() < tol && fx[1].abs() < tol;
    let near_rest = amplitude < 1e-6 && b.abs() < 1e-6;
    if !converged && !near_rest {
        return None;
    }
    Some(SweepSolution {
        k,
        b,
        u0,
        amplitude,
        period_error: fx[0],
        mean: fx[1],
        class: SweepClass::Unexplained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_one_and_two() {
        assert!(roots_for_mode(1).unwrap().is_none());
        let m = roots_for_mode(2).unwrap().unwrap();
        assert!(!m.nontrivial);
        assert_eq!(m.kappa, 0.0);
        assert!(m.roots.e1.abs() < 1e-12 && m.roots.e2.abs() < 1e-12);
        assert!((m.roots.e3 + 6.0).abs() < 1e-12);
        assert!(roots_for_mode(0).is_err());
        assert!(roots_for_mode(-3).is_err());
        let v = mode2_exclusion().unwrap();
        assert_eq!(v.kappa, Some(0.0));
        assert!(!v.nontrivial);
    }

    #[test]
    fn mode_three_triple() {
        let m = roots_for_mode(3).unwrap().unwrap();
        let r = m.roots;
        assert!(m.nontrivial);
        assert!((r.e1 + r.e2 + r.e3 + 6.0).abs() < 1e-12);
        let q = root_integrals(&r).unwrap();
        assert!((q.t - period_integral_target(3)).abs() < 1e-8, "{q:?}");
        assert!(q.i.abs() < 1e-8);
        let c = derived_constants(&r).unwrap();
        for e in [r.e1, r.e2, r.e3] {
            assert!((potential(e, c.b) - c.energy).abs() < 1e-10 * (1.0 + c.energy.abs()));
        }
    }

    #[test]
    fn degenerate_constants() {
        let c = derived_constants(&RootTriple::new(0.0, 0.0, -6.0).unwrap()).unwrap();
        assert_eq!(c.b, 0.0);
        assert_eq!(c.energy, 0.0);
        assert!(RootTriple::new(1.0, 0.0, -6.0).is_err());
        assert!(RootTriple::new(-6.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tableau_is_consistent() {
        let t = tableau();
        assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..STAGES {
            let row: f64 = t.a[i].iter().sum();
            assert!((row - t.c[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn gl_step_integrates_harmonic_oscillator() {
        // b = 0 and small amplitude: u'' ≈ -4u
        let mut y: State = [1e-6, 0.0, 0.0];
        let n = 1000;
        let h = PI / n as f64;
        for _ in 0..n {
            y = gl_step(&y, h, 0.0);
        }
        assert!((y[0] - 1e-6).abs() < 1e-11);
    }

    #[test]
    fn mode_three_profile() {
        let p = mode_profile(3, 0.0, DEFAULT_PROFILE_STEPS).unwrap();
        let d = p.diagnostics;
        assert!((d.period - 2.0 * PI / 3.0).abs() < 1e-8);
        assert!(d.mean.abs() < 1e-8);
        assert!((d.range - p.roots.amplitude()).abs() < 1e-8);
        assert!(d.shift_defect < 1e-8);
        assert!(d.energy_drift_relative < 1e-13);
        let expect = amplitude_formula(p.kappa, 3).unwrap();
        assert!((p.roots.amplitude() - expect).abs() < 1e-8);
        assert!(profile_circle_residual(&p) < 1e-8);
        // ∫p = -½∫f² follows from integrating the ODE with zero mean
        assert!((p.mean_pressure() + 0.5 * p.mean_square()).abs() < 1e-8);
    }

    #[test]
    fn shifted_profile_moves_the_maximum() {
        let p = mode_profile(4, 0.3, 8000).unwrap();
        let (f, df) = p.eval(0.3);
        assert!((f - p.roots.e1).abs() < 1e-9);
        assert!(df.abs() < 1e-8);
        assert!(mode_profile(2, 0.0, 8000).is_err());
        assert!(mode_profile(1, 0.0, 8000).is_err());
    }

    #[test]
    fn green_function_matches_dipole() {
        for t in 0..12 {
            let th = 0.1 + t as f64 * 0.5;
            let x = [2.0 * th.sin(), 2.0 * th.cos()];
            let d = dipole_extension(x).unwrap();
            assert!((stokes_green(0, 0, 0, x).unwrap() - d[0]).abs() < 1e-14);
            assert!((stokes_green(1, 0, 0, x).unwrap() - d[1]).abs() < 1e-14);
        }
        assert!(stokes_green(0, 0, 0, [0.0, 0.0]).is_err());
        assert!(stokes_green(2, 0, 0, [1.0, 0.0]).is_err());
        let x = [0.3, -0.7];
        let y = [0.9, -2.1];
        let g = stokes_green(1, 0, 1, x).unwrap();
        assert!((stokes_green(1, 0, 1, y).unwrap() - g / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_branch_is_exact() {
        let c = constant_branch(1.0);
        assert_eq!(c.p_const, -0.5);
        assert_eq!(c.circle_residual(), [0.0, 0.0, 0.0]);
        let z = constant_branch(0.0);
        assert_eq!(z.p_const, 0.0);
    }

    #[test]
    fn amplitude_table_approaches_limit() {
        let t = amplitude_table(32).unwrap();
        assert!(t.windows(2).all(|w| w[1].relative_gap < w[0].relative_gap));
        // the gap closes like 1/k²
        for r in &t[5..] {
            let c = r.relative_gap * f64::from(r.k * r.k);
            assert!((2.0..2.6).contains(&c), "k={} c={c}", r.k);
        }
    }

    #[test]
    fn mode_three_field_solves_navier_stokes() {
        use crate::fd_oracle::{convergence_study, divergence_flux, sample_points, Check, DEFAULT_SEED, DEFAULT_STEPS};
        let prof = mode_profile(3, 0.0, DEFAULT_PROFILE_STEPS).unwrap();
        let field = prof.field();
        let pts = sample_points(2, 50, DEFAULT_SEED);
        let rec = convergence_study(Check::NavierStokes, &field, &pts, &DEFAULT_STEPS).unwrap();
        assert!(rec.passes(2.0, 0.3, 1e-7), "{rec:?}");
        assert!(divergence_flux(&field, 1.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn green_and_swirl_fields_pass_oracle() {
        use crate::fd_oracle::{convergence_study, sample_points, Check, DEFAULT_SEED, DEFAULT_STEPS};
        let pts = sample_points(2, 30, DEFAULT_SEED);
        for (j, k) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let f = green_field(j, k).unwrap();
            let rec = convergence_study(Check::Stokes, &f, &pts, &DEFAULT_STEPS).unwrap();
            assert!(rec.passes(2.0, 0.3, 1e-7), "G_{j}{k}: {rec:?}");
        }
        let swirl = constant_branch(2.0).field();
        let rec = convergence_study(Check::NavierStokes, &swirl, &pts, &DEFAULT_STEPS).unwrap();
        assert!(rec.passes(2.0, 0.3, 1e-7), "{rec:?}");
    }

    #[test]
    fn precise_shot_reproduces_catalog_period() {
        let m = roots_for_mode(4).unwrap().unwrap();
        let c = derived_constants(&m.roots).unwrap();
        let shot = shoot_precise(c.b, m.roots.e1).unwrap();
        assert!((shot.period - PI / 2.0).abs() < 1e-10);
        assert!(shot.mean.abs() < 1e-9);
        assert!(shoot_precise(-5.0, 0.0).is_err());
        assert!(shoot_precise(0.0, 5.0).is_err());
    }

    #[test]
    fn coarse_sweep_recovers_low_modes() {
        let cfg = SweepConfig {
            n_b: 60,
            n_s: 80,
            b_max: 700.0,
            ..SweepConfig::default()
        };
        let r = classification_sweep(&cfg).unwrap();
        assert_eq!(r.catalog.len(), 2);
        assert!(r.complete, "{r:?}");
        let ks: Vec<u32> = r.solutions.iter().filter(|s| s.class == SweepClass::Catalog).map(|s| s.k).collect();
        assert_eq!(ks, vec![3, 4]);
        assert_eq!(r.unexplained(), 0);
        assert_eq!(r.missing(), 0);
        assert!(classification_sweep(&SweepConfig { n_b: 2, ..cfg }).is_err());
    }
}
