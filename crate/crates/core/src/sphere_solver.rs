//! Axisymmetric, swirl-free steady Navier-Stokes on S^{n-1}.
//!
//! A (-1)-homogeneous field `u = (g(θ) e_θ + f(θ) e_r)/r`, `p = P(θ)/r²` solves
//! the equations on Rⁿ \ {0} exactly when the sphere profile `(g, f, P)` satisfies
//!
//! ```text
//! eq1 = -(g' + (n-2) cot θ g)' + g g' + (p - 2f)'
//! eq2 = -(f'' + (n-2) cot θ f') + g f' - f² - g² - 2p
//! eq3 = g' + (n-2) cot θ g + (n-2) f
//! ```
//!
//! Profiles live on a colatitude grid that excludes the poles. On the
//! half-shifted uniform grid `θ_j = (j + ½)π/N` derivatives are spectral
//! (sine series for the odd `g`, cosine series for the even `f`, `p`);
//! any other grid uses sixth-order finite differences with mirrored ghost
//! points.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fd_oracle::{self, HomogeneousField};
use crate::landau3d::{self, LandauParams};

/// Samples of `(g, f, p)` on a colatitude grid for ambient dimension `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereProfile {
    pub n: usize,
    pub thetas: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub p: Vec<f64>,
}

/// `θ_j = (j + ½)π/N`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|j| (j as f64 + 0.5) * PI / points as f64)
        .collect()
}

impl SphereProfile {
    pub fn new(n: usize, thetas: Vec<f64>, g: Vec<f64>, f: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return domain(format!("sphere profiles need n ≥ 3, got {n}"));
        }
        let m = thetas.len();
        if m < 4 {
            return domain("profile grid needs at least 4 points");
        }
        if g.len() != m || f.len() != m || p.len() != m {
            return domain("profile arrays differ in length from the grid");
        }
        if thetas.windows(2).any(|w| w[1] <= w[0]) || thetas[0] <= 0.0 || thetas[m - 1] >= PI {
            return domain("profile grid must be strictly increasing inside (0, π)");
        }
        if g.iter().chain(&f).chain(&p).any(|v| !v.is_finite()) {
            return domain("profile contains non-finite samples");
        }
        Ok(Self { n, thetas, g, f, p })
    }

    /// Profile with samples `h(θ) = (g, f, p)` on the uniform grid.
    pub fn from_fn(n: usize, points: usize, h: impl Fn(f64) -> (f64, f64, f64)) -> Result<Self> {
        let thetas = uniform_grid(points);
        let (mut g, mut f, mut p) = (Vec::new(), Vec::new(), Vec::new());
        for &t in &thetas {
            let (a, b, c) = h(t);
            g.push(a);
            f.push(b);
            p.push(c);
        }
        Self::new(n, thetas, g, f, p)
    }

    pub fn zero(n: usize, points: usize) -> Result<Self> {
        Self::from_fn(n, points, |_| (0.0, 0.0, 0.0))
    }

    /// The closed-form Landau profile (n = 3).
    pub fn landau(kappa: f64, points: usize) -> Result<Self> {
        let params = LandauParams::new(kappa)?;
        Self::from_fn(3, points, |t| {
            let s = landau3d::sphere_state(t, &params);
            (s.v_theta, s.f, s.p)
        })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let m = self.len();
        self.thetas
            .iter()
            .enumerate()
            .all(|(j, &t)| (t - (j as f64 + 0.5) * PI / m as f64).abs() <= 1e-13)
    }

    /// Largest absolute sample of g, f and p.
    pub fn sup_norm(&self) -> f64 {
        self.g
            .iter()
            .chain(&self.f)
            .chain(&self.p)
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn method(&self) -> DiffMethod {
        if self.is_uniform() {
            DiffMethod::Spectral
        } else {
            DiffMethod::FiniteDifference
        }
    }

    /// Interpolant through the samples, usable at any colatitude.
    pub fn interpolant(&self) -> ProfileInterpolant {
        ProfileInterpolant::new(self)
    }

    /// The (-1)-homogeneous Cartesian field on Rⁿ with axis `e_n`.
    pub fn cartesian_field(&self) -> HomogeneousField {
        let interp = self.interpolant();
        let n = self.n;
        HomogeneousField::new(n, format!("profile(n={n}, N={})", self.len()), move |x: &[f64]| {
            profile_to_cartesian(&interp, n, x)
        })
    }
}

fn profile_to_cartesian(interp: &ProfileInterpolant, n: usize, x: &[f64]) -> (Vec<f64>, f64) {
    let perp2: f64 = x[..n - 1].iter().map(|c| c * c).sum();
    let r = (perp2 + x[n - 1] * x[n - 1]).sqrt();
    let rho = perp2.sqrt();
    let theta = rho.atan2(x[n - 1]);
    let (g, f, p) = interp.values(theta);
    let (s, c) = (rho / r, x[n - 1] / r);
    let mut u = vec![0.0; n];
    // g e_θ = g (cos θ ŷ_⊥, -sin θ); g / sin θ stays finite at the axis
    let g_over_s = if s > 0.0 { g / s } else { 0.0 };
    for i in 0..n - 1 {
        let yi = x[i] / r;
        u[i] = (g_over_s * c * yi + f * yi) / r;
    }
    u[n - 1] = (-g * s + f * c) / r;
    (u, p / (r * r))
}

/// How θ-derivatives are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffMethod {
    Spectral,
    FiniteDifference,
}

/// Parity-aware differentiation matrices for one grid.
#[derive(Debug, Clone)]
pub struct Differentiator {
    pub method: DiffMethod,
    /// d/dθ of an even function (result is odd).
    pub d_even: DMatrix<f64>,
    /// d/dθ of an odd function (result is even).
    pub d_odd: DMatrix<f64>,
    /// d²/dθ² of an even function.
    pub d2_even: DMatrix<f64>,
    /// d²/dθ² of an odd function.
    pub d2_odd: DMatrix<f64>,
}

impl Differentiator {
    pub fn for_grid(thetas: &[f64], method: DiffMethod) -> Self {
        match method {
            DiffMethod::Spectral => Self::spectral(thetas.len()),
            DiffMethod::FiniteDifference => Self::stencil(thetas, FD_WIDTH),
        }
    }

    fn spectral(m: usize) -> Self {
        let mf = m as f64;
        // coefficient maps: a = Ce f (cosine modes 0..m-1), b = Co g (sine modes 1..m)
        let ce = DMatrix::from_fn(m, m, |k, j| {
            let w = if k == 0 { 1.0 / mf } else { 2.0 / mf };
            w * mode_trig(k, j, m).1
        });
        let co = DMatrix::from_fn(m, m, |k, j| {
            let w = if k + 1 == m { 1.0 / mf } else { 2.0 / mf };
            w * mode_trig(k + 1, j, m).0
        });
        let de_modes = DMatrix::from_fn(m, m, |i, k| -(k as f64) * mode_trig(k, i, m).0);
        let d2e_modes = DMatrix::from_fn(m, m, |i, k| -((k * k) as f64) * mode_trig(k, i, m).1);
        let do_modes = DMatrix::from_fn(m, m, |i, k| {
            let mode = (k + 1) as f64;
            mode * mode_trig(k + 1, i, m).1
        });
        let d2o_modes = DMatrix::from_fn(m, m, |i, k| {
            let mode = (k + 1) as f64;
            -mode * mode * mode_trig(k + 1, i, m).0
        });
        Self {
            method: DiffMethod::Spectral,
            d_even: de_modes * &ce,
            d_odd: do_modes * &co,
            d2_even: d2e_modes * ce,
            d2_odd: d2o_modes * co,
        }
    }

    fn stencil(thetas: &[f64], width: usize) -> Self {
        let m = thetas.len();
        // ghosts: θ ↦ -θ and θ ↦ 2π - θ carry the sample with sign ±1 by parity
        let mut ext: Vec<(f64, usize, bool)> = Vec::with_capacity(3 * m);
        for (j, &t) in thetas.iter().enumerate() {
            ext.push((t, j, false));
            ext.push((-t, j, true));
            ext.push((2.0 * PI - t, j, true));
        }
        ext.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut d_even = DMatrix::zeros(m, m);
        let mut d_odd = DMatrix::zeros(m, m);
        let mut d2_even = DMatrix::zeros(m, m);
        let mut d2_odd = DMatrix::zeros(m, m);
        for (i, &t) in thetas.iter().enumerate() {
            let pos = ext.iter().position(|e| e.0 == t && !e.2).expect("grid point present");
            let lo = pos.saturating_sub(width / 2).min(ext.len() - width);
            let nodes: Vec<f64> = ext[lo..lo + width].iter().map(|e| e.0).collect();
            let w = fornberg(t, &nodes, 2);
            for (k, e) in ext[lo..lo + width].iter().enumerate() {
                let sign = if e.2 { -1.0 } else { 1.0 };
                d_even[(i, e.1)] += w[1][k];
                d_odd[(i, e.1)] += sign * w[1][k];
                d2_even[(i, e.1)] += w[2][k];
                d2_odd[(i, e.1)] += sign * w[2][k];
            }
        }
        Self {
            method: DiffMethod::FiniteDifference,
            d_even,
            d_odd,
            d2_even,
            d2_odd,
        }
    }
}

const FD_WIDTH: usize = 7;

fn tail_ratio(c: &[f64]) -> f64 {
    let top = sup(c);
    if top == 0.0 {
        return 0.0;
    }
    let k = c.len();
    sup(&c[k - k / 8..]) / top
}

/// Zeroes the trailing coefficients that sit at roundoff level.
fn chop(c: &mut [f64]) {
    let tol = 4.0 * f64::EPSILON * sup(c);
    let keep = c.iter().rposition(|v| v.abs() > tol).map_or(0, |i| i + 1);
    c[keep..].iter_mut().for_each(|v| *v = 0.0);
}

/// `(sin kθ_j, cos kθ_j)` on the uniform grid of `m` points, with the angle
/// reduced exactly in integer arithmetic.
fn mode_trig(k: usize, j: usize, m: usize) -> (f64, f64) {
    let r = (k * (2 * j + 1)) % (4 * m);
    (PI * r as f64 / (2 * m) as f64).sin_cos()
}

/// Finite-difference weights for derivatives 0..=order at `z` (Fornberg's algorithm).
pub fn fornberg(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Continuous interpolant of a profile: trigonometric on the uniform grid,
/// local Lagrange with mirrored ghosts otherwise.
#[derive(Debug, Clone)]
pub struct ProfileInterpolant {
    kind: InterpKind,
}

#[derive(Debug, Clone)]
enum InterpKind {
    Trig {
        m: usize,
        /// sine coefficients of g, modes 1..=N
        gs: Vec<f64>,
        /// cosine coefficients of f and p, modes 0..N
        fc: Vec<f64>,
        pc: Vec<f64>,
        /// largest trailing-eighth coefficient relative to the largest one, before chopping
        tail: f64,
    },
    Local {
        nodes: Vec<(f64, f64, f64, f64)>,
    },
}

/// Values and derivatives of a profile at one colatitude.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfileJet {
    pub g: f64,
    pub dg: f64,
    pub d2g: f64,
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    pub p: f64,
    pub dp: f64,
}

impl From<landau3d::SphereJet> for ProfileJet {
    fn from(j: landau3d::SphereJet) -> Self {
        Self {
            g: j.g,
            dg: j.dg,
            d2g: j.d2g,
            f: j.f,
            df: j.df,
            d2f: j.d2f,
            p: j.p,
            dp: j.dp,
        }
    }
}

impl ProfileInterpolant {
    fn new(profile: &SphereProfile) -> Self {
        if profile.is_uniform() {
            let m = profile.len();
            let mf = m as f64;
            let mut gs: Vec<f64> = (1..=m)
                .map(|k| {
                    let w = if k == m { 1.0 / mf } else { 2.0 / mf };
                    w * (0..m).map(|j| profile.g[j] * mode_trig(k, j, m).0).sum::<f64>()
                })
                .collect();
            let cos_coeffs = |v: &[f64]| -> Vec<f64> {
                (0..m)
                    .map(|k| {
                        let w = if k == 0 { 1.0 / mf } else { 2.0 / mf };
                        w * (0..m).map(|j| v[j] * mode_trig(k, j, m).1).sum::<f64>()
                    })
                    .collect()
            };
            let mut fc = cos_coeffs(&profile.f);
            let mut pc = cos_coeffs(&profile.p);
            let tail = tail_ratio(&gs).max(tail_ratio(&fc)).max(tail_ratio(&pc));
            for c in [&mut gs, &mut fc, &mut pc] {
                chop(c);
            }
            Self {
                kind: InterpKind::Trig { m, gs, fc, pc, tail },
            }
        } else {
            let mut nodes = Vec::with_capacity(3 * profile.len());
            for j in 0..profile.len() {
                let (t, g, f, p) = (profile.thetas[j], profile.g[j], profile.f[j], profile.p[j]);
                nodes.push((t, g, f, p));
                nodes.push((-t, -g, f, p));
                nodes.push((2.0 * PI - t, -g, f, p));
            }
            nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
            Self {
                kind: InterpKind::Local { nodes },
            }
        }
    }

    /// Jet at grid node `j` of the uniform grid the interpolant was built on.
    fn node_jet(&self, j: usize) -> Option<ProfileJet> {
        let InterpKind::Trig { m, gs, fc, pc, .. } = &self.kind else {
            return None;
        };
        let mut out = ProfileJet::default();
        for (k, b) in gs.iter().enumerate().filter(|c| *c.1 != 0.0) {
            let mode = (k + 1) as f64;
            let (s, c) = mode_trig(k + 1, j, *m);
            out.g += b * s;
            out.dg += b * mode * c;
            out.d2g -= b * mode * mode * s;
        }
        for (k, (a, q)) in fc.iter().zip(pc).enumerate() {
            if *a == 0.0 && *q == 0.0 {
                continue;
            }
            let mode = k as f64;
            let (s, c) = mode_trig(k, j, *m);
            out.f += a * c;
            out.df -= a * mode * s;
            out.d2f -= a * mode * mode * c;
            out.p += q * c;
            out.dp -= q * mode * s;
        }
        Some(out)
    }

    /// Relative size of the unresolved spectral tail; zero for local interpolants.
    pub fn spectral_tail(&self) -> f64 {
        match &self.kind {
            InterpKind::Trig { tail, .. } => *tail,
            InterpKind::Local { .. } => 0.0,
        }
    }

    pub fn values(&self, theta: f64) -> (f64, f64, f64) {
        let j = self.jet(theta);
        (j.g, j.f, j.p)
    }

    pub fn jet(&self, theta: f64) -> ProfileJet {
        match &self.kind {
            InterpKind::Trig { gs, fc, pc, .. } => {
                let mut j = ProfileJet::default();
                for (k, b) in gs.iter().enumerate() {
                    let m = (k + 1) as f64;
                    let (s, c) = (m * theta).sin_cos();
                    j.g += b * s;
                    j.dg += b * m * c;
                    j.d2g -= b * m * m * s;
                }
                for (k, (a, q)) in fc.iter().zip(pc).enumerate() {
                    let m = k as f64;
                    let (s, c) = (m * theta).sin_cos();
                    j.f += a * c;
                    j.df -= a * m * s;
                    j.d2f -= a * m * m * c;
                    j.p += q * c;
                    j.dp -= q * m * s;
                }
                j
            }
            InterpKind::Local { nodes } => {
                let pos = nodes.partition_point(|n| n.0 < theta);
                let lo = pos.saturating_sub(FD_WIDTH / 2).min(nodes.len() - FD_WIDTH);
                let win = &nodes[lo..lo + FD_WIDTH];
                let xs: Vec<f64> = win.iter().map(|n| n.0).collect();
                let w = fornberg(theta, &xs, 2);
                let dot = |d: usize, sel: fn(&(f64, f64, f64, f64)) -> f64| -> f64 {
                    win.iter().zip(&w[d]).map(|(n, c)| c * sel(n)).sum()
                };
                ProfileJet {
                    g: dot(0, |n| n.1),
                    dg: dot(1, |n| n.1),
                    d2g: dot(2, |n| n.1),
                    f: dot(0, |n| n.2),
                    df: dot(1, |n| n.2),
                    d2f: dot(2, |n| n.2),
                    p: dot(0, |n| n.3),
                    dp: dot(1, |n| n.3),
                }
            }
        }
    }
}

/// The three equation residuals at one colatitude.
pub fn pointwise_residual(n: usize, theta: f64, j: &ProfileJet) -> [f64; 3] {
    let m = (n - 2) as f64;
    let (s, c) = theta.sin_cos();
    let cot = c / s;
    // (g' + m cot θ g)' = g'' + m (cot θ g' - g / sin²θ)
    let ddiv = j.d2g + m * (cot * j.dg - j.g / (s * s));
    let eq1 = -ddiv + j.g * j.dg + j.dp - 2.0 * j.df;
    let eq2 = -(j.d2f + m * cot * j.df) + j.g * j.df - j.f * j.f - j.g * j.g - 2.0 * j.p;
    let eq3 = j.dg + m * cot * j.g + m * j.f;
    [eq1, eq2, eq3]
}

/// Residual arrays on the profile grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFields {
    pub eq1: Vec<f64>,
    pub eq2: Vec<f64>,
    pub eq3: Vec<f64>,
}

struct Derivs {
    dg: DVector<f64>,
    d2g: DVector<f64>,
    df: DVector<f64>,
    d2f: DVector<f64>,
    dp: DVector<f64>,
}

fn derivatives(profile: &SphereProfile, d: &Differentiator) -> Derivs {
    let g = DVector::from_column_slice(&profile.g);
    let f = DVector::from_column_slice(&profile.f);
    let p = DVector::from_column_slice(&profile.p);
    Derivs {
        dg: &d.d_odd * &g,
        d2g: &d.d2_odd * &g,
        df: &d.d_even * &f,
        d2f: &d.d2_even * &f,
        dp: &d.d_even * &p,
    }
}

pub fn residual_fields_with(profile: &SphereProfile, d: &Differentiator) -> ResidualFields {
    let dv = derivatives(profile, d);
    let mut out = ResidualFields {
        eq1: Vec::with_capacity(profile.len()),
        eq2: Vec::with_capacity(profile.len()),
        eq3: Vec::with_capacity(profile.len()),
    };
    for (i, &t) in profile.thetas.iter().enumerate() {
        let jet = ProfileJet {
            g: profile.g[i],
            dg: dv.dg[i],
            d2g: dv.d2g[i],
            f: profile.f[i],
            df: dv.df[i],
            d2f: dv.d2f[i],
            p: profile.p[i],
            dp: dv.dp[i],
        };
        let [a, b, c] = pointwise_residual(profile.n, t, &jet);
        out.eq1.push(a);
        out.eq2.push(b);
        out.eq3.push(c);
    }
    out
}

/// Residuals using the profile's own derivative method. On the uniform grid the
/// spectral coefficients are chopped at roundoff level first.
pub fn residual_fields(profile: &SphereProfile) -> ResidualFields {
    if !profile.is_uniform() {
        let d = Differentiator::for_grid(&profile.thetas, DiffMethod::FiniteDifference);
        return residual_fields_with(profile, &d);
    }
    let interp = profile.interpolant();
    let mut out = ResidualFields {
        eq1: Vec::with_capacity(profile.len()),
        eq2: Vec::with_capacity(profile.len()),
        eq3: Vec::with_capacity(profile.len()),
    };
    for (i, &t) in profile.thetas.iter().enumerate() {
        let mut jet = interp.node_jet(i).expect("uniform grid has a spectral interpolant");
        jet.g = profile.g[i];
        jet.f = profile.f[i];
        jet.p = profile.p[i];
        let [a, b, c] = pointwise_residual(profile.n, t, &jet);
        out.eq1.push(a);
        out.eq2.push(b);
        out.eq3.push(c);
    }
    out
}

/// Sup-norms of the three residuals with grid metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub eq1_norm: f64,
    pub eq2_norm: f64,
    pub eq3_norm: f64,
    pub grid_size: usize,
    pub method: DiffMethod,
    /// Order of the finite-difference residual between the grid and its
    /// every-other-point subgrid; zero when both are at roundoff level.
    pub observed_order: f64,
    pub warnings: Vec<String>,
}

impl ResidualReport {
    pub fn max_norm(&self) -> f64 {
        self.eq1_norm.max(self.eq2_norm).max(self.eq3_norm)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

const MIN_RECOMMENDED_POINTS: usize = 16;

pub fn residual_axisym(profile: &SphereProfile) -> Result<ResidualReport> {
    let mut warnings = Vec::new();
    if profile.len() < MIN_RECOMMENDED_POINTS {
        warnings.push(format!(
            "grid of {} points is too coarse for the derivative order; results are indicative only",
            profile.len()
        ));
    }
    let r = residual_fields(profile);
    let worst = profile.interpolant().spectral_tail();
    if worst > 1e-8 {
        warnings.push(format!(
            "spectral tail {worst:.1e} relative to the largest mode: profile is under-resolved"
        ));
    }
    let observed_order = fd_order(profile, &mut warnings);
    Ok(ResidualReport {
        eq1_norm: sup(&r.eq1),
        eq2_norm: sup(&r.eq2),
        eq3_norm: sup(&r.eq3),
        grid_size: profile.len(),
        method: profile.method(),
        observed_order,
        warnings,
    })
}

fn fd_order(profile: &SphereProfile, warnings: &mut Vec<String>) -> f64 {
    let m = profile.len();
    if m < 2 * FD_WIDTH + 2 {
        warnings.push("grid too small to estimate the convergence order".into());
        return 0.0;
    }
    let fine_d = Differentiator::stencil(&profile.thetas, FD_WIDTH);
    let fine = residual_fields_with(profile, &fine_d);
    let pick = |v: &[f64]| v.iter().step_by(2).copied().collect::<Vec<_>>();
    let coarse_profile = SphereProfile {
        n: profile.n,
        thetas: pick(&profile.thetas),
        g: pick(&profile.g),
        f: pick(&profile.f),
        p: pick(&profile.p),
    };
    let coarse_d = Differentiator::stencil(&coarse_profile.thetas, FD_WIDTH);
    let coarse = residual_fields_with(&coarse_profile, &coarse_d);
    // compare on the common (even-indexed) points
    let common = |v: &[f64]| sup(&pick(v));
    let rf = common(&fine.eq1).max(common(&fine.eq2)).max(common(&fine.eq3));
    let rc = sup(&coarse.eq1).max(sup(&coarse.eq2)).max(sup(&coarse.eq3));
    if rf < 1e-12 * profile.sup_norm().max(1.0) || rc <= rf {
        warnings.push("finite-difference residual does not decrease under refinement; order not resolved".into());
        return 0.0;
    }
    (rc / rf).log2()
}

/// First and second derivatives of even samples: chopped cosine series on the
/// uniform grid, sixth-order differences otherwise.
pub fn even_derivatives(thetas: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = thetas.len();
    let uniform = thetas
        .iter()
        .enumerate()
        .all(|(j, &t)| (t - (j as f64 + 0.5) * PI / m as f64).abs() <= 1e-13);
    if uniform {
        let mf = m as f64;
        let mut a: Vec<f64> = (0..m)
            .map(|k| {
                let w = if k == 0 { 1.0 / mf } else { 2.0 / mf };
                w * (0..m).map(|j| v[j] * mode_trig(k, j, m).1).sum::<f64>()
            })
            .collect();
        chop(&mut a);
        let mut d1 = vec![0.0; m];
        let mut d2 = vec![0.0; m];
        for (k, ak) in a.iter().enumerate().filter(|c| *c.1 != 0.0) {
            let kf = k as f64;
            for j in 0..m {
                let (s, c) = mode_trig(k, j, m);
                d1[j] -= ak * kf * s;
                d2[j] -= ak * kf * kf * c;
            }
        }
        (d1, d2)
    } else {
        let d = Differentiator::stencil(thetas, FD_WIDTH);
        let x = DVector::from_column_slice(v);
        let d1 = &d.d_even * &x;
        let d2 = &d.d2_even * &x;
        (d1.iter().copied().collect(), d2.iter().copied().collect())
    }
}

/// Analytic `|ω|²` at r = 1 for a meridional field: `f'²/2`.
pub fn omega_sq_analytic(profile: &SphereProfile) -> Vec<f64> {
    let (df, _) = even_derivatives(&profile.thetas, &profile.f);
    df.iter().map(|v| 0.5 * v * v).collect()
}

/// `|ω|²` sampled from the Cartesian extension by finite differences at r = 1.
pub fn omega_sq_fd(profile: &SphereProfile, h: f64) -> Result<Vec<f64>> {
    let field = profile.cartesian_field();
    let n = profile.n;
    profile
        .thetas
        .iter()
        .map(|&t| {
            let mut x = vec![0.0; n];
            x[0] = t.sin();
            x[n - 1] = t.cos();
            fd_oracle::omega_sq_extrapolated(&field, &x, h)
        })
        .collect()
}

/// Point at colatitude `theta` on the unit sphere, off-axis direction spread
/// evenly over the first n-1 coordinates.
pub fn sphere_point(n: usize, theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let w = s / ((n - 1) as f64).sqrt();
    let mut x = vec![w; n];
    x[n - 1] = c;
    x
}

/// Cartesian Navier-Stokes residual of the profile's extension at r = 1,
/// by central differences with step `h`, projected to the three scalar
/// equations: the `e_θ` component, the `e_r` component minus twice the
/// divergence, and the divergence.
pub fn cartesian_residual_fields(profile: &SphereProfile, thetas: &[f64], h: f64) -> Result<ResidualFields> {
    let n = profile.n;
    let field = profile.cartesian_field();
    let points: Vec<Vec<f64>> = thetas.iter().map(|&t| sphere_point(n, t)).collect();
    let res = fd_oracle::ns_residual(&field, &points, h)?;
    let mut out = ResidualFields {
        eq1: Vec::with_capacity(thetas.len()),
        eq2: Vec::with_capacity(thetas.len()),
        eq3: Vec::with_capacity(thetas.len()),
    };
    for (x, r) in points.iter().zip(&res) {
        let theta = thetas[out.eq1.len()];
        let (s, c) = theta.sin_cos();
        // e_θ = (cos θ ŵ, -sin θ), e_r = x
        let w = 1.0 / ((n - 1) as f64).sqrt();
        let tangential: f64 = (0..n - 1).map(|i| r.momentum[i] * c * w).sum::<f64>() - r.momentum[n - 1] * s;
        let normal: f64 = x.iter().zip(&r.momentum).map(|(a, b)| a * b).sum();
        out.eq1.push(tangential);
        out.eq2.push(normal - 2.0 * r.divergence);
        out.eq3.push(r.divergence);
    }
    Ok(out)
}

/// Agreement between intrinsic and Cartesian finite-difference residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub h_values: Vec<f64>,
    /// Max pointwise difference over all three equations, per step.
    pub differences: Vec<f64>,
    pub observed_order: f64,
    /// Difference after Richardson extrapolation of the Cartesian residuals.
    pub extrapolated_difference: f64,
    /// Largest intrinsic residual, for scale.
    pub residual_scale: f64,
}

/// Compares `residual_fields` with [`cartesian_residual_fields`] at every
/// `stride`-th grid point over successively halved steps.
pub fn cross_derivation(profile: &SphereProfile, steps: &[f64], stride: usize) -> Result<CrossCheck> {
    if steps.len() < 2 || steps.windows(2).any(|w| (w[1] - 0.5 * w[0]).abs() > 1e-12 * w[0]) {
        return domain("cross-derivation needs at least two successively halved steps");
    }
    let stride = stride.max(1);
    let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
    let thetas = pick(&profile.thetas);
    let intrinsic = residual_fields(profile);
    let exact = [pick(&intrinsic.eq1), pick(&intrinsic.eq2), pick(&intrinsic.eq3)];
    let mut tableau: Vec<Vec<f64>> = Vec::new();
    let mut differences = Vec::new();
    for &h in steps {
        let c = cartesian_residual_fields(profile, &thetas, h)?;
        let flat: Vec<f64> = c.eq1.into_iter().chain(c.eq2).chain(c.eq3).collect();
        differences.push(max_diff(&flat, &exact));
        tableau.push(flat);
    }
    // eliminate h², h⁴, ... in turn
    let mut level = tableau;
    let mut power = 4.0;
    while level.len() > 1 {
        level = level
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (power * b - a) / (power - 1.0)).collect())
            .collect();
        power *= 4.0;
    }
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = differences.iter().map(|d| d.max(1e-300).ln()).collect();
    let observed_order = slope(&xs, &ys);
    Ok(CrossCheck {
        h_values: steps.to_vec(),
        differences,
        observed_order,
        extrapolated_difference: max_diff(&level[0], &exact),
        residual_scale: exact.iter().map(|v| sup(v)).fold(0.0, f64::max),
    })
}

fn max_diff(flat: &[f64], exact: &[Vec<f64>; 3]) -> f64 {
    flat.iter()
        .zip(exact.iter().flatten())
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Bernoulli quantity `H = (g² + f²)/2 + p` on the grid.
pub fn bernoulli_profile(profile: &SphereProfile) -> Vec<f64> {
    (0..profile.len())
        .map(|i| 0.5 * (profile.g[i].powi(2) + profile.f[i].powi(2)) + profile.p[i])
        .collect()
}

/// Default finite-difference step for sampling `|ω|²` at r = 1.
pub const OMEGA_FD_STEP: f64 = 2.5e-3;

/// `H` and `|ω|²` sampled on a profile grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliProfile {
    pub h: Vec<f64>,
    pub omega_sq: Vec<f64>,
}

impl BernoulliProfile {
    /// `|ω|²` from finite differences of the Cartesian extension.
    pub fn sampled(profile: &SphereProfile, step: f64) -> Result<Self> {
        Ok(Self {
            h: bernoulli_profile(profile),
            omega_sq: omega_sq_fd(profile, step)?,
        })
    }

    /// `|ω|² = f'²/2`.
    pub fn analytic(profile: &SphereProfile) -> Self {
        Self {
            h: bernoulli_profile(profile),
            omega_sq: omega_sq_analytic(profile),
        }
    }

    /// Largest value of `H` on the grid.
    pub fn max_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sup-norm of `-ΔH + (2n-8)H + g H' - 2fH + 2|ω|²`.
pub fn bernoulli_residual_with(profile: &SphereProfile, bp: &BernoulliProfile) -> Result<f64> {
    if bp.omega_sq.len() != profile.len() || bp.h.len() != profile.len() {
        return domain("Bernoulli samples do not match the profile grid");
    }
    let h = &bp.h;
    let (dh, d2h) = even_derivatives(&profile.thetas, h);
    let m = (profile.n - 2) as f64;
    let nn = profile.n as f64;
    let mut worst: f64 = 0.0;
    for i in 0..profile.len() {
        let cot = 1.0 / profile.thetas[i].tan();
        let lap = d2h[i] + m * cot * dh[i];
        let r = -lap + (2.0 * nn - 8.0) * h[i] + profile.g[i] * dh[i] - 2.0 * profile.f[i] * h[i]
            + 2.0 * bp.omega_sq[i];
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Bernoulli residual with `|ω|²` sampled by finite differences.
pub fn bernoulli_residual(profile: &SphereProfile) -> Result<f64> {
    bernoulli_residual_with(profile, &BernoulliProfile::sampled(profile, OMEGA_FD_STEP)?)
}

/// Bernoulli residual with `|ω|² = f'²/2`.
pub fn bernoulli_residual_analytic(profile: &SphereProfile) -> Result<f64> {
    bernoulli_residual_with(profile, &BernoulliProfile::analytic(profile))
}

/// Area of the unit sphere S^k.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// Weights `w_j` with `Σ w_j h(θ_j) ≈ ∫_{S^{n-1}} h dμ` for axisymmetric `h`.
pub fn sphere_weights(profile: &SphereProfile) -> Vec<f64> {
    let n = profile.n;
    let ring = sphere_area(n - 2);
    let m = profile.len();
    let t = &profile.thetas;
    if profile.is_uniform() {
        if n.is_multiple_of(2) {
            // sin^{n-2} is a trigonometric polynomial; the midpoint rule is exact
            t.iter()
                .map(|&th| ring * PI / m as f64 * th.sin().powi(n as i32 - 2))
                .collect()
        } else {
            // Fejér's first rule in x = cos θ against (1 - x²)^{(n-3)/2}
            t.iter()
                .map(|&th| {
                    let mut s = 0.0;
                    for k in 1..=m / 2 {
                        let kf = k as f64;
                        s += (2.0 * kf * th).cos() / (4.0 * kf * kf - 1.0);
                    }
                    let w = 2.0 / m as f64 * (1.0 - 2.0 * s);
                    ring * w * th.sin().powi(n as i32 - 3)
                })
                .collect()
        }
    } else {
        // trapezoid in θ with the end intervals closed at the poles
        (0..m)
            .map(|j| {
                let left = if j == 0 { t[0] } else { 0.5 * (t[j] - t[j - 1]) };
                let right = if j + 1 == m { PI - t[j] } else { 0.5 * (t[j + 1] - t[j]) };
                ring * (left + right) * t[j].sin().powi(n as i32 - 2)
            })
            .collect()
    }
}

/// `∫ (α|∇H|² H₊^{α-1} + (2n-8) H₊^{1+α} + |ω|² H₊^α) dμ` with `α = (n-4)/2`;
/// for n = 4 this is `∫ |ω|² dμ`.
pub fn positivity_functional(profile: &SphereProfile) -> Result<f64> {
    let n = profile.n;
    if n < 4 {
        return domain(format!("the Bernoulli functional is defined for n ≥ 4, got n = {n}"));
    }
    let w = sphere_weights(profile);
    let omega = omega_sq_analytic(profile);
    if n == 4 {
        return Ok(w.iter().zip(&omega).map(|(a, b)| a * b).sum());
    }
    let h = bernoulli_profile(profile);
    let (dh, _) = even_derivatives(&profile.thetas, &h);
    let alpha = (n as f64 - 4.0) / 2.0;
    let mut total = 0.0;
    for i in 0..profile.len() {
        if h[i] <= 0.0 {
            continue;
        }
        let hp = h[i];
        let integrand = alpha * dh[i] * dh[i] * hp.powf(alpha - 1.0)
            + (2.0 * n as f64 - 8.0) * hp.powf(1.0 + alpha)
            + omega[i] * hp.powf(alpha);
        total += w[i] * integrand;
    }
    Ok(total)
}

/// Result of fitting a Landau solution to a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauMatch {
    /// Fitted κ; negative values mean the jet points along -e_n.
    pub kappa: f64,
    /// Largest deviation of (g, f, p) from the fitted closed form.
    pub error: f64,
    pub degenerate: bool,
}

/// Least-squares fit of `A = coth κ` from `g (A - cos θ) = -2 sin θ`.
pub fn match_landau(profile: &SphereProfile) -> Result<LandauMatch> {
    if profile.n != 3 {
        return domain("Landau matching applies to n = 3 profiles");
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &t) in profile.thetas.iter().enumerate() {
        let g = profile.g[i];
        num += g * (g * t.cos() - 2.0 * t.sin());
        den += g * g;
    }
    let scale = profile.sup_norm();
    if den <= 1e-24 * profile.len() as f64 {
        return Ok(LandauMatch {
            kappa: 0.0,
            error: scale,
            degenerate: true,
        });
    }
    let a = num / den;
    if !(a.abs() > 1.0) {
        return Ok(LandauMatch {
            kappa: f64::NAN,
            error: f64::INFINITY,
            degenerate: true,
        });
    }
    let kappa = (1.0 / a).atanh();
    let params = LandauParams::new(kappa.abs())?;
    let mut error: f64 = 0.0;
    for (i, &t) in profile.thetas.iter().enumerate() {
        let (tt, sign) = if kappa > 0.0 { (t, 1.0) } else { (PI - t, -1.0) };
        let s = landau3d::sphere_state(tt, &params);
        error = error
            .max((profile.g[i] - sign * s.v_theta).abs())
            .max((profile.f[i] - s.f).abs())
            .max((profile.p[i] - s.p).abs());
    }
    Ok(LandauMatch {
        kappa,
        error,
        degenerate: false,
    })
}

/// Controls for [`newton_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Initial fraction of the Newton step tried by the line search, in (0, 1].
    pub damping: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Relative cutoff for singular values in the least-squares step.
    pub rcond: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            damping: 1.0,
            max_iterations: 200,
            tolerance: 1e-10,
            rcond: 1e-11,
        }
    }
}

/// Converged profile with iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub profile: SphereProfile,
    pub iterations: usize,
    pub residual: ResidualReport,
    pub condition: f64,
}

fn sawtooth(j: usize, m: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0 / m as f64
    } else {
        -1.0 / m as f64
    }
}

struct System<'a> {
    n: usize,
    thetas: &'a [f64],
    d: &'a Differentiator,
    weights: Vec<f64>,
}

impl System<'_> {
    fn c_of(&self, f: &[f64]) -> f64 {
        let area: f64 = self.weights.iter().sum();
        let s: f64 = self.weights.iter().zip(f).map(|(w, v)| w * v * v).sum();
        (self.n as f64 - 3.0) * s / (2.0 * area)
    }

    /// `[B - c(f); eq2; eq3; s·g]` with `B = -div v + g²/2 + p - 2f`. The last
    /// row removes the grid-scale sawtooth in g, which collocated
    /// differentiation cannot see.
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = self.thetas.len();
        let g = x.rows(0, m).into_owned();
        let f = x.rows(m, m).into_owned();
        let p = x.rows(2 * m, m).into_owned();
        let mm = (self.n - 2) as f64;
        let dg = &self.d.d_odd * &g;
        let df = &self.d.d_even * &f;
        let d2f = &self.d.d2_even * &f;
        let c = self.c_of(f.as_slice());
        let mut out = DVector::zeros(3 * m + 1);
        out[3 * m] = (0..m).map(|i| sawtooth(i, m) * g[i]).sum();
        for i in 0..m {
            let cot = 1.0 / self.thetas[i].tan();
            let div = dg[i] + mm * cot * g[i];
            out[i] = -div + 0.5 * g[i] * g[i] + p[i] - 2.0 * f[i] - c;
            out[m + i] = -(d2f[i] + mm * cot * df[i]) + g[i] * df[i] - f[i] * f[i] - g[i] * g[i] - 2.0 * p[i];
            out[2 * m + i] = div + mm * f[i];
        }
        out
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let m = self.thetas.len();
        let g = x.rows(0, m);
        let f = x.rows(m, m);
        let mm = (self.n - 2) as f64;
        let df = &self.d.d_even * f;
        let area: f64 = self.weights.iter().sum();
        let mut j = DMatrix::zeros(3 * m + 1, 3 * m);
        for k in 0..m {
            j[(3 * m, k)] = sawtooth(k, m);
        }
        for i in 0..m {
            let cot = 1.0 / self.thetas[i].tan();
            for k in 0..m {
                // B row
                j[(i, k)] = -self.d.d_odd[(i, k)];
                j[(i, m + k)] = -(self.n as f64 - 3.0) * self.weights[k] * f[k] / area;
                // eq2 row
                j[(m + i, m + k)] = -self.d.d2_even[(i, k)] - mm * cot * self.d.d_even[(i, k)]
                    + g[i] * self.d.d_even[(i, k)];
                // eq3 row
                j[(2 * m + i, k)] = self.d.d_odd[(i, k)];
            }
            j[(i, i)] += -mm * cot + g[i];
            j[(i, m + i)] += -2.0;
            j[(i, 2 * m + i)] += 1.0;
            j[(m + i, i)] += df[i] - 2.0 * g[i];
            j[(m + i, m + i)] += -2.0 * f[i];
            j[(m + i, 2 * m + i)] += -2.0;
            j[(2 * m + i, i)] += mm * cot;
            j[(2 * m + i, m + i)] += mm;
        }
        j
    }
}

fn pack(p: &SphereProfile) -> DVector<f64> {
    DVector::from_iterator(
        3 * p.len(),
        p.g.iter().chain(&p.f).chain(&p.p).copied(),
    )
}

fn unpack(template: &SphereProfile, x: &DVector<f64>) -> SphereProfile {
    let m = template.len();
    SphereProfile {
        n: template.n,
        thetas: template.thetas.clone(),
        g: x.rows(0, m).iter().copied().collect(),
        f: x.rows(m, m).iter().copied().collect(),
        p: x.rows(2 * m, m).iter().copied().collect(),
    }
}

/// Damped Newton on the discretized system with the default options.
pub fn newton_solve(n: usize, initial: &SphereProfile, damping: f64) -> Result<SphereProfile> {
    let opts = NewtonOptions {
        damping,
        ..NewtonOptions::default()
    };
    Ok(newton_solve_with(n, initial, &opts)?.profile)
}

/// Damped Newton with Armijo backtracking and minimum-norm least-squares steps.
///
/// The first block of equations replaces `eq1 = B'` by `B = c(f)`, where the
/// constant `c(f) = (n-3)∫f²/(2|S^{n-1}|)` follows from integrating `eq2` over
/// the sphere. Convergence requires all three sup-norms below the tolerance.
pub fn newton_solve_with(n: usize, initial: &SphereProfile, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    if !(3..=5).contains(&n) {
        return domain(format!("the sphere solver supports n ∈ {{3, 4, 5}}, got {n}"));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return domain(format!("damping must lie in (0, 1], got {}", opts.damping));
    }
    let mut start = initial.clone();
    start.n = n;
    let d = Differentiator::for_grid(&start.thetas, start.method());
    let sys = System {
        n,
        thetas: &start.thetas,
        d: &d,
        weights: sphere_weights(&start),
    };
    let true_residual = |x: &DVector<f64>| -> f64 {
        let r = residual_fields(&unpack(&start, x));
        sup(&r.eq1).max(sup(&r.eq2)).max(sup(&r.eq3))
    };
    let mut x = pack(&start);
    let mut fx = sys.eval(&x);
    let mut condition = 1.0;
    for it in 0..=opts.max_iterations {
        let res = true_residual(&x);
        if res < opts.tolerance {
            let profile = unpack(&start, &x);
            let residual = residual_axisym(&profile)?;
            return Ok(NewtonOutcome {
                profile,
                iterations: it,
                residual,
                condition,
            });
        }
        if it == opts.max_iterations || !res.is_finite() {
            break;
        }
        let jac = sys.jacobian(&x);
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let step = svd
            .solve(&(-&fx), opts.rcond * smax)
            .map_err(|e| Error::Consistency(format!("least-squares step failed: {e}")))?;
        let norm0 = fx.norm();
        let mut t = opts.damping;
        let mut accepted = false;
        while t > 1e-8 {
            let trial = &x + t * &step;
            let ft = sys.eval(&trial);
            if ft.norm() <= (1.0 - 1e-4 * t) * norm0 {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // the merit function is flat at roundoff; accept a full step if it does not hurt
            let trial = &x + &step;
            let ft = sys.eval(&trial);
            if ft.norm() <= norm0 * (1.0 + 1e-12) {
                x = trial;
                fx = ft;
            } else {
                return Err(Error::Diverged {
                    iterations: it,
                    residual: res,
                    condition,
                });
            }
        }
    }
    Err(Error::Diverged {
        iterations: opts.max_iterations,
        residual: true_residual(&x),
        condition,
    })
}

/// Smooth parity-respecting random profile scaled to the given sup-norm.
pub fn random_profile(n: usize, points: usize, seed: u64, amplitude: f64, modes: usize) -> Result<SphereProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeff = |_: usize| -> Vec<f64> {
        (0..modes)
            .map(|k| rng.gen_range(-1.0..1.0) / (1.0 + k as f64))
            .collect()
    };
    let (cg, cf, cp) = (coeff(0), coeff(1), coeff(2));
    let raw = SphereProfile::from_fn(n, points, |t| {
        let g: f64 = cg.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * t).sin()).sum();
        let f: f64 = cf.iter().enumerate().map(|(k, c)| c * (k as f64 * t).cos()).sum();
        let p: f64 = cp.iter().enumerate().map(|(k, c)| c * (k as f64 * t).cos()).sum();
        (g, f, p)
    })?;
    let scale = amplitude / raw.sup_norm().max(1e-300);
    Ok(SphereProfile {
        g: raw.g.iter().map(|v| v * scale).collect(),
        f: raw.f.iter().map(|v| v * scale).collect(),
        p: raw.p.iter().map(|v| v * scale).collect(),
        ..raw
    })
}

/// Adds a smooth relative perturbation of size `eps` to every component.
pub fn perturb(profile: &SphereProfile, eps: f64, seed: u64) -> Result<SphereProfile> {
    let noise = random_profile(profile.n, profile.len(), seed, 1.0, 4)?;
    let interp = SphereProfile {
        thetas: profile.thetas.clone(),
        ..noise
    };
    let scale = eps * profile.sup_norm();
    // the noise is sampled on the uniform grid; resample when the target grid differs
    let it = if profile.is_uniform() { None } else { Some(interp.interpolant()) };
    let mut out = profile.clone();
    for i in 0..profile.len() {
        let (g, f, p) = match &it {
            Some(ip) => ip.values(profile.thetas[i]),
            None => (interp.g[i], interp.f[i], interp.p[i]),
        };
        out.g[i] += scale * g;
        out.f[i] += scale * f;
        out.p[i] += scale * p;
    }
    Ok(out)
}
