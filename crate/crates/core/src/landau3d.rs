//! Landau's axisymmetric jets on R³ \ {0}.
//!
//! On the unit sphere the velocity splits as `u = v + f e_r` with a meridional
//! tangential part `v = ∂φ/∂θ e_θ` generated by the conformal potential
//!
//! ```text
//! φ(θ) = -2 log(cosh κ - sinh κ cos θ)
//! v_θ  = -2 sin θ / (coth κ - cos θ)
//! f    = 2 e^φ - 2
//! p    = f - v_θ² / 2
//! ```
//!
//! and the Cartesian field is its (-1)-homogeneous extension
//! `u(x) = (v(y) + f(y) y) / r`, `p(x) = p(y) / r²` with `y = x / r`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fd_oracle::HomogeneousField;
use crate::quad;

pub type Vec3 = [f64; 3];

/// One member of the Landau family: jet strength κ > 0 and symmetry axis.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LandauParams {
    kappa: f64,
    axis: Vec3,
}

impl LandauParams {
    /// Jet along +z.
    pub fn new(kappa: f64) -> Result<Self> {
        Self::with_axis(kappa, [0.0, 0.0, 1.0])
    }

    /// The axis is normalized; it must be nonzero.
    pub fn with_axis(kappa: f64, axis: Vec3) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return domain(format!("Landau parameter must be positive, got {kappa}"));
        }
        let norm = dot(axis, axis).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return domain("symmetry axis must be a nonzero finite vector");
        }
        let axis = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
        Ok(Self { kappa, axis })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    /// `A = coth κ`, the textbook parameter of the jet.
    pub fn coth(&self) -> f64 {
        1.0 / self.kappa.tanh()
    }
}

/// Point on S² in spherical coordinates about the symmetry axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint3 {
    pub theta: f64,
    pub psi: f64,
}

impl SpherePoint3 {
    pub fn new(theta: f64, psi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return domain(format!("colatitude {theta} outside [0, π]"));
        }
        if !(0.0..2.0 * PI).contains(&psi) {
            return domain(format!("azimuth {psi} outside [0, 2π)"));
        }
        Ok(Self { theta, psi })
    }
}

/// The Landau fields on S² at one colatitude.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SphereState {
    pub v_theta: f64,
    pub f: f64,
    pub p: f64,
    pub phi: f64,
}

/// φ(θ) = -2 log(cosh κ - sinh κ cos θ).
pub fn potential_phi(theta: f64, params: &LandauParams) -> f64 {
    let k = params.kappa;
    -2.0 * denominator(k, versines(theta)).ln()
}

/// `(1 - cos θ, 1 + cos θ)` without cancellation at either pole.
fn versines(theta: f64) -> (f64, f64) {
    let (sh, ch) = (0.5 * theta).sin_cos();
    (2.0 * sh * sh, 2.0 * ch * ch)
}

/// The same pair from a unit vector in the axis frame.
fn versines_of(y: Vec3) -> (f64, f64) {
    let sin2 = y[0] * y[0] + y[1] * y[1];
    if y[2] >= 0.0 {
        (sin2 / (1.0 + y[2]), 1.0 + y[2])
    } else {
        (1.0 - y[2], sin2 / (1.0 - y[2]))
    }
}

// cosh κ - sinh κ cos θ = e^{-κ}(1 + cos θ)/2 + e^{κ}(1 - cos θ)/2
fn denominator(kappa: f64, (one_minus_c, one_plus_c): (f64, f64)) -> f64 {
    0.5 * ((-kappa).exp() * one_plus_c + kappa.exp() * one_minus_c)
}

/// `coth κ - cos θ = (coth κ - 1) + (1 - cos θ)`
fn coth_gap(kappa: f64, one_minus_c: f64) -> f64 {
    2.0 / (2.0 * kappa).exp_m1() + one_minus_c
}

pub fn sphere_state(theta: f64, params: &LandauParams) -> SphereState {
    let vers = versines(theta);
    let phi = -2.0 * denominator(params.kappa, vers).ln();
    let v_theta = -2.0 * theta.sin() / coth_gap(params.kappa, vers.0);
    let f = 2.0 * phi.exp() - 2.0;
    SphereState {
        v_theta,
        f,
        p: f - 0.5 * v_theta * v_theta,
        phi,
    }
}

/// Values and θ-derivatives of (g = v_θ, f, p) from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereJet {
    pub g: f64,
    pub dg: f64,
    pub d2g: f64,
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    pub p: f64,
    pub dp: f64,
}

pub fn sphere_jet(theta: f64, params: &LandauParams) -> SphereJet {
    let kappa = params.kappa;
    let a = params.coth();
    let a1 = 2.0 / (2.0 * kappa).exp_m1();
    let (s, c) = theta.sin_cos();
    let vers = versines(theta);
    let sk = kappa.sinh();
    let d = coth_gap(kappa, vers.0);
    let g = -2.0 * s / d;
    // 1 - A cos θ and A² + A cos θ - 2, regrouped around A - 1 and 1 - cos θ
    let dg = 2.0 * (a * vers.0 - a1) / (d * d);
    let d2g = 2.0 * s * (a1 * (a + 2.0) - a * vers.0) / (d * d * d);
    let q = denominator(kappa, vers);
    let q2 = q * q;
    let f = 2.0 / q2 - 2.0;
    let df = -4.0 * sk * s / (q2 * q);
    let d2f = -4.0 * sk * (c * q - 3.0 * sk * s * s) / (q2 * q2);
    SphereJet {
        g,
        dg,
        d2g,
        f,
        df,
        d2f,
        p: f - 0.5 * g * g,
        dp: df - g * dg,
    }
}

/// θ-derivatives of φ: (φ', φ'').
pub fn phi_derivatives(theta: f64, params: &LandauParams) -> (f64, f64) {
    let jet = sphere_jet(theta, params);
    (jet.g, jet.dg)
}

/// Orthonormal frame (e1, e2, axis).
fn frame(axis: Vec3) -> [Vec3; 3] {
    let helper = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(cross(helper, axis));
    let e2 = cross(axis, e1);
    [e1, e2, axis]
}

/// Velocity and pressure of the (-1)-homogeneous extension at `x ≠ 0`.
pub fn eval_cartesian(x: Vec3, params: &LandauParams) -> Result<(Vec3, f64)> {
    let r = dot(x, x).sqrt();
    if !(r > 0.0 && r.is_finite()) {
        return domain("Landau field is undefined at the origin");
    }
    let fr = frame(params.axis);
    let y = [dot(x, fr[0]) / r, dot(x, fr[1]) / r, dot(x, fr[2]) / r];
    let c = y[2].clamp(-1.0, 1.0);
    let sin2 = y[0] * y[0] + y[1] * y[1];
    let vers = versines_of(y);
    let q = denominator(params.kappa, vers);
    let f = 2.0 / (q * q) - 2.0;
    // v_θ e_θ = -2/(A - cos θ) (cos θ y₁, cos θ y₂, -sin²θ), smooth through the poles
    let w = -2.0 / coth_gap(params.kappa, vers.0);
    let v_local = [w * c * y[0], w * c * y[1], -w * sin2];
    let g2 = w * w * sin2;
    let p = f - 0.5 * g2;
    let u_local = [
        (v_local[0] + f * y[0]) / r,
        (v_local[1] + f * y[1]) / r,
        (v_local[2] + f * y[2]) / r,
    ];
    let mut u = [0.0; 3];
    for (k, e) in fr.iter().enumerate() {
        for i in 0..3 {
            u[i] += u_local[k] * e[i];
        }
    }
    Ok((u, p / (r * r)))
}

/// The Cartesian Landau field as an oracle input.
pub fn landau_field(params: LandauParams) -> HomogeneousField {
    HomogeneousField::new(3, format!("landau(kappa={})", params.kappa), move |x: &[f64]| {
        let (u, p) = eval_cartesian([x[0], x[1], x[2]], &params).expect("nonzero point");
        (u.to_vec(), p)
    })
}

/// Stereographic projection from the north pole, `x ↦ (x₁ + i x₂)/(1 - x₃)`.
fn stereo_north(x: Vec3) -> Complex64 {
    Complex64::new(x[0], x[1]) / (1.0 - x[2])
}

/// Projection from the south pole, `x ↦ (x₁ - i x₂)/(1 + x₃)`; equals `1/z` of the north chart.
fn stereo_south(x: Vec3) -> Complex64 {
    Complex64::new(x[0], -x[1]) / (1.0 + x[2])
}

fn inverse_stereo_north(z: Complex64) -> Vec3 {
    let n2 = z.norm_sqr();
    [2.0 * z.re / (1.0 + n2), 2.0 * z.im / (1.0 + n2), (n2 - 1.0) / (n2 + 1.0)]
}

/// Conformal factor of the chart: the round metric is `ρ(z)² |dz|²`.
fn chart_density(z: Complex64) -> f64 {
    2.0 / (1.0 + z.norm_sqr())
}

/// Image of `x` under `h_λ = P⁻¹ ∘ (z ↦ λz) ∘ P`.
pub fn conformal_map(x: Vec3, lambda: f64) -> Vec3 {
    if x[2] > 0.0 {
        // north hemisphere: south chart, where the dilation reads w ↦ w/λ
        let w = stereo_south(x) / lambda;
        let n2 = w.norm_sqr();
        [2.0 * w.re / (1.0 + n2), -2.0 * w.im / (1.0 + n2), (1.0 - n2) / (1.0 + n2)]
    } else {
        inverse_stereo_north(stereo_north(x) * lambda)
    }
}

/// φ = log |h_λ'|², with `|h_λ'|` obtained from the chart densities:
/// `|h'(x)| = |M'(z)| ρ(M z) / ρ(z)`. The chart is chosen away from its pole.
pub fn phi_from_conformal(theta: f64, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return domain(format!("dilation factor must be positive, got {lambda}"));
    }
    let x = [theta.sin(), 0.0, theta.cos()];
    let stretch = if x[2] > 0.0 {
        let w = stereo_south(x);
        let dm = 1.0 / lambda;
        dm * chart_density(w * dm) / chart_density(w)
    } else {
        let z = stereo_north(x);
        lambda * chart_density(z * lambda) / chart_density(z)
    };
    Ok(2.0 * stretch.ln())
}

/// Landau parameter for a given dilation, λ = e^{-κ}.
pub fn kappa_of_lambda(lambda: f64) -> f64 {
    -lambda.ln()
}

/// The textbook parameter `c = coth κ - 1`.
pub fn batchelor_param(params: &LandauParams) -> f64 {
    // coth κ - 1 = 2 / (e^{2κ} - 1), accurate for large κ
    2.0 / (2.0 * params.kappa).exp_m1()
}

/// The other textbook parameter, `A = coth κ`.
pub fn landau_lifshitz_param(params: &LandauParams) -> f64 {
    params.coth()
}

/// Momentum-flux integrand `-∂_r u + u u_r + p n` at a point of the sphere of radius r.
fn flux_density(x: Vec3, r: f64, params: &LandauParams) -> Vec3 {
    let (u, p) = eval_cartesian(x, params).expect("nonzero point");
    let n = [x[0] / r, x[1] / r, x[2] / r];
    let ur = dot(u, n);
    // (-1)-homogeneity: ∂_r u = -u / r
    [
        u[0] / r + u[0] * ur + p * n[0],
        u[1] / r + u[1] * ur + p * n[1],
        u[2] / r + u[2] * ur + p * n[2],
    ]
}

/// Fixed-resolution flux `∮_{|x|=r} (-∂_r u + u u_r + p n) dS`, Gauss-Legendre in
/// cos θ times the trapezoid rule in ψ, about the world z-axis.
pub fn force_flux(params: &LandauParams, radius: f64, n_theta: usize, n_psi: usize) -> Result<Vec3> {
    if !(radius > 0.0 && radius.is_finite()) {
        return domain(format!("flux radius must be positive, got {radius}"));
    }
    let (nodes, weights) = quad::gauss_legendre(n_theta);
    let dpsi = 2.0 * PI / n_psi as f64;
    let mut b = [0.0; 3];
    for (ct, wt) in nodes.iter().zip(&weights) {
        let st = (1.0 - ct * ct).sqrt();
        let mut ring = [0.0; 3];
        for j in 0..n_psi {
            let (sp, cp) = (j as f64 * dpsi).sin_cos();
            let x = [radius * st * cp, radius * st * sp, radius * ct];
            let t = flux_density(x, radius, params);
            for i in 0..3 {
                ring[i] += t[i];
            }
        }
        for i in 0..3 {
            b[i] += wt * dpsi * radius * radius * ring[i];
        }
    }
    Ok(b)
}

/// Diagnostics of the converged net-force quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceQuadrature {
    pub b: Vec3,
    pub n_theta: usize,
    pub n_psi: usize,
    /// Change between the last two refinement levels.
    pub last_change: f64,
}

pub const NET_FORCE_TOL: f64 = 1e-10;

/// Point-source strength `b` in `-Δu + div(u⊗u) + ∇p = b δ`, from the momentum
/// flux through a sphere of the given radius, refined until successive
/// resolutions agree to `tol` (relative to max(|b|, 1)).
pub fn net_force_at(params: &LandauParams, radius: f64, tol: f64) -> Result<ForceQuadrature> {
    let mut n_theta = 32;
    let mut n_psi = 32;
    let mut prev = force_flux(params, radius, n_theta, n_psi)?;
    for _ in 0..7 {
        n_theta *= 2;
        n_psi *= 2;
        let b = force_flux(params, radius, n_theta, n_psi)?;
        let change = norm(sub(b, prev));
        if change <= tol * norm(b).max(1.0) {
            return Ok(ForceQuadrature {
                b,
                n_theta,
                n_psi,
                last_change: change,
            });
        }
        prev = b;
    }
    Err(Error::NoConvergence {
        what: format!(
            "net force quadrature for kappa={} (resolution {n_theta}x{n_psi})",
            params.kappa
        ),
        iterations: 7,
        residual: norm(prev),
    })
}

/// `b(κ)` at radius 1.
pub fn net_force(params: &LandauParams) -> Result<Vec3> {
    Ok(net_force_at(params, 1.0, NET_FORCE_TOL)?.b)
}

/// Axial component of `b` with the azimuthal integral done analytically:
/// `2π ∫₀^π (u_z (1 + f) + p cos θ) sin θ dθ` in the axis frame.
pub fn net_force_axial(kappa: f64) -> Result<f64> {
    let params = LandauParams::new(kappa)?;
    let q = quad::integrate(
        |theta| {
            let st = sphere_state(theta, &params);
            let (s, c) = theta.sin_cos();
            let uz = st.f * c - st.v_theta * s;
            (uz * (1.0 + st.f) + st.p * c) * s
        },
        0.0,
        PI,
        1e-13,
        1e-13,
    )?;
    Ok(2.0 * PI * q.value)
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn landau(k: f64) -> LandauParams {
        LandauParams::new(k).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LandauParams::new(0.0).is_err());
        assert!(LandauParams::new(-1.0).is_err());
        assert!(LandauParams::with_axis(1.0, [0.0; 3]).is_err());
        assert!(eval_cartesian([0.0; 3], &landau(1.0)).is_err());
        assert!(SpherePoint3::new(4.0, 0.0).is_err());
        assert!(SpherePoint3::new(1.0, 2.0 * PI).is_err());
        assert!(phi_from_conformal(1.0, 0.0).is_err());
    }

    #[test]
    fn potential_closed_values() {
        let p = landau(1.0);
        assert_relative_eq!(potential_phi(0.0, &p), 2.0, epsilon = 1e-14);
        assert_relative_eq!(potential_phi(PI / 2.0, &p), -2.0 * 1f64.cosh().ln(), epsilon = 1e-14);
        assert!(potential_phi(1.3, &landau(1e-12)).abs() < 1e-11);
    }

    #[test]
    fn state_at_equator() {
        let s = sphere_state(PI / 2.0, &landau(1.0));
        let coth = 1.0 / 1f64.tanh();
        assert_relative_eq!(s.v_theta, -2.0 / coth, epsilon = 1e-14);
        assert_relative_eq!(s.f, 2.0 / 1f64.cosh().powi(2) - 2.0, epsilon = 1e-14);
        assert_eq!(sphere_state(0.0, &landau(1.0)).v_theta, 0.0);
        assert!(sphere_state(PI, &landau(1.0)).v_theta.abs() < 1e-15);
    }

    #[test]
    fn state_invariants() {
        for k in [0.3, 1.0, 2.5] {
            let p = landau(k);
            for i in 0..50 {
                let t = PI * i as f64 / 49.0;
                let s = sphere_state(t, &p);
                assert!((s.f - (2.0 * s.phi.exp() - 2.0)).abs() < 1e-12);
                assert!((0.5 * s.v_theta * s.v_theta + s.p - s.f).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_component_integrates_to_zero() {
        for k in [0.5, 1.0, 2.0] {
            let p = landau(k);
            let q = quad::integrate(|t| sphere_state(t, &p).f * t.sin(), 0.0, PI, 1e-13, 0.0).unwrap();
            assert!(q.value.abs() < 1e-11, "κ={k}: {}", q.value);
        }
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let p = landau(1.3);
        let h = 1e-5;
        for t in [0.2, 1.0, 2.5] {
            let j = sphere_jet(t, &p);
            let jp = sphere_jet(t + h, &p);
            let jm = sphere_jet(t - h, &p);
            assert!((j.dg - (jp.g - jm.g) / (2.0 * h)).abs() < 1e-8);
            assert!((j.d2g - (jp.dg - jm.dg) / (2.0 * h)).abs() < 1e-7);
            assert!((j.df - (jp.f - jm.f) / (2.0 * h)).abs() < 1e-7);
            assert!((j.d2f - (jp.df - jm.df) / (2.0 * h)).abs() < 1e-6);
            assert!((j.dp - (jp.p - jm.p) / (2.0 * h)).abs() < 1e-7);
        }
    }

    #[test]
    fn liouville_equation_holds() {
        // -Δφ + 2 = 2 e^φ with Δφ = φ'' + cot θ φ'
        for k in [0.5, 1.0, 2.0] {
            let p = landau(k);
            for i in 1..100 {
                let t = PI * i as f64 / 100.0;
                let (d1, d2) = phi_derivatives(t, &p);
                let lap = d2 + t.cos() / t.sin() * d1;
                let lhs = -lap + 2.0;
                let rhs = 2.0 * potential_phi(t, &p).exp();
                assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0), "κ={k} θ={t}");
            }
        }
    }

    #[test]
    fn cartesian_homogeneity_and_axis() {
        let p = LandauParams::with_axis(0.8, [1.0, -2.0, 0.5]).unwrap();
        let x = [0.3, 0.7, -0.4];
        let (u1, p1) = eval_cartesian(x, &p).unwrap();
        let (u2, p2) = eval_cartesian([2.0 * x[0], 2.0 * x[1], 2.0 * x[2]], &p).unwrap();
        for i in 0..3 {
            assert!((u2[i] - u1[i] / 2.0).abs() < 1e-12 * norm(u1));
        }
        assert!((p2 - p1 / 4.0).abs() < 1e-12 * p1.abs());
        let a = p.axis();
        let (ua, _) = eval_cartesian([2.0 * a[0], 2.0 * a[1], 2.0 * a[2]], &p).unwrap();
        assert!(norm(cross(ua, a)) < 1e-13 * norm(ua));
    }

    #[test]
    fn cartesian_matches_sphere_state() {
        let p = landau(1.2);
        let (t, psi) = (0.9f64, 2.1f64);
        let x = [t.sin() * psi.cos(), t.sin() * psi.sin(), t.cos()];
        let (u, pr) = eval_cartesian(x, &p).unwrap();
        let s = sphere_state(t, &p);
        let e_theta = [t.cos() * psi.cos(), t.cos() * psi.sin(), -t.sin()];
        assert_relative_eq!(dot(u, x), s.f, epsilon = 1e-13);
        assert_relative_eq!(dot(u, e_theta), s.v_theta, epsilon = 1e-13);
        assert_relative_eq!(pr, s.p, epsilon = 1e-13);
    }

    #[test]
    fn conformal_potential_matches_closed_form() {
        for k in [0.5f64, 2.0] {
            let lambda = (-k).exp();
            for i in 0..=100 {
                let t = PI * i as f64 / 100.0;
                let a = phi_from_conformal(t, lambda).unwrap();
                let b = potential_phi(t, &landau(k));
                assert!((a - b).abs() < 1e-10, "κ={k} θ={t}: {a} vs {b}");
            }
        }
        assert!(phi_from_conformal(0.7, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn conformal_inversion_mirrors() {
        let lambda = 0.3;
        for t in [0.1, 0.8, 1.9, 3.0] {
            let a = phi_from_conformal(t, lambda).unwrap();
            let b = phi_from_conformal(PI - t, 1.0 / lambda).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn conformal_map_dilates_along_meridians() {
        // h_λ moves points toward the south pole when λ < 1 and keeps them on S²
        let x = [0.6, 0.0, 0.8];
        let y = conformal_map(x, 0.5);
        assert!((norm(y) - 1.0).abs() < 1e-14);
        assert!(y[2] < x[2]);
        let back = conformal_map(y, 2.0);
        for i in 0..3 {
            assert!((back[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn textbook_parameters() {
        let p = landau(1.0);
        assert_relative_eq!(landau_lifshitz_param(&p), 1.0 / 1f64.tanh(), epsilon = 1e-15);
        assert_relative_eq!(batchelor_param(&p), 1.0 / 1f64.tanh() - 1.0, epsilon = 1e-14);
        assert!(batchelor_param(&landau(40.0)) < 1e-30);
    }

    #[test]
    fn net_force_along_axis() {
        let p = LandauParams::with_axis(1.0, [0.2, 0.3, -0.9]).unwrap();
        let b = net_force(&p).unwrap();
        let along = dot(b, p.axis());
        let transverse = norm(sub(b, [along * p.axis()[0], along * p.axis()[1], along * p.axis()[2]]));
        assert!(transverse < 1e-10 * along.abs());
        assert!(along.abs() > 0.0);
        let axial = net_force_axial(1.0).unwrap();
        assert!((axial - along).abs() < 1e-9 * axial.abs(), "{axial} vs {along}");
    }

    #[test]
    fn net_force_vanishes_with_kappa() {
        let small = net_force_axial(1e-4).unwrap().abs();
        let smaller = net_force_axial(1e-6).unwrap().abs();
        assert!(smaller < small && smaller < 1e-3);
    }
}
