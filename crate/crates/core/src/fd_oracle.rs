//! Cartesian finite-difference verification of (-1)-homogeneous fields.
//!
//! Every check here works on the raw field `x ↦ (u(x), p(x))` with central
//! second-order stencils, so it is independent of the intrinsic sphere
//! reductions used elsewhere in the crate.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::quad;

pub type FieldEval = dyn Fn(&[f64]) -> (Vec<f64>, f64) + Send + Sync;

/// A velocity/pressure pair on Rⁿ \ {0}.
#[derive(Clone)]
pub struct HomogeneousField {
    n: usize,
    label: String,
    eval: Arc<FieldEval>,
}

impl std::fmt::Debug for HomogeneousField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HomogeneousField")
            .field("n", &self.n)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl HomogeneousField {
    pub fn new<F>(n: usize, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> (Vec<f64>, f64) + Send + Sync + 'static,
    {
        Self {
            n,
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(n, "zero", move |_| (vec![0.0; n], 0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        if x.len() != self.n {
            return domain(format!("point has dimension {}, field has {}", x.len(), self.n));
        }
        if x.iter().all(|&c| c == 0.0) {
            return domain(format!("field '{}' evaluated at the origin", self.label));
        }
        Ok((self.eval)(x))
    }

    /// Largest relative violation of `u(λx) = u(x)/λ`, `p(λx) = p(x)/λ²` for λ ∈ {2, 1/3}.
    pub fn homogeneity_defect(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in points {
            let (u, p) = self.eval(x)?;
            let scale = u.iter().fold(p.abs().sqrt(), |m, c| m.max(c.abs())).max(1e-300);
            for lambda in [2.0, 1.0 / 3.0] {
                let y: Vec<f64> = x.iter().map(|c| lambda * c).collect();
                let (uy, py) = self.eval(&y)?;
                for (a, b) in uy.iter().zip(&u) {
                    worst = worst.max((lambda * a - b).abs() / scale);
                }
                worst = worst.max((lambda * lambda * py - p).abs() / (scale * scale));
            }
        }
        Ok(worst)
    }
}

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Smallest admissible distance from the origin.
pub const MIN_RADIUS: f64 = 0.5;

/// `count` points with 1 ≤ |x| ≤ 2, uniformly distributed in direction.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(0.1..=1.0).contains(&r) {
            continue;
        }
        let radius = rng.gen_range(1.0..2.0);
        out.push(v.iter().map(|c| radius * c / r).collect());
    }
    out
}

/// Residual of `−Δu + u·∇u + ∇p` (momentum) and `div u` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResidual {
    pub momentum: Vec<f64>,
    pub divergence: f64,
}

impl PointResidual {
    pub fn sup_norm(&self) -> f64 {
        self.momentum
            .iter()
            .fold(self.divergence.abs(), |m, c| m.max(c.abs()))
    }
}

/// Central-difference jet of a field at one point.
struct Jet {
    u: Vec<f64>,
    /// `du[i][j] = ∂_j u_i`
    du: Vec<Vec<f64>>,
    lap: Vec<f64>,
    dp: Vec<f64>,
    h_center: f64,
    dh: Vec<f64>,
    lap_h: f64,
}

fn check_stencil(x: &[f64], h: f64) -> Result<()> {
    let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(h > 0.0 && h.is_finite()) {
        return domain(format!("finite-difference step must be positive, got {h}"));
    }
    if r < MIN_RADIUS || h > 0.1 * r {
        return domain(format!(
            "stencil at radius {r} with step {h} comes too close to the origin"
        ));
    }
    Ok(())
}

fn jet(field: &HomogeneousField, x: &[f64], h: f64) -> Result<Jet> {
    check_stencil(x, h)?;
    let n = field.n;
    let (u, p) = field.eval(x)?;
    let bern = |u: &[f64], p: f64| 0.5 * u.iter().map(|c| c * c).sum::<f64>() + p;
    let h0 = bern(&u, p);
    let mut du = vec![vec![0.0; n]; n];
    let mut lap = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut dh = vec![0.0; n];
    let mut lap_h = 0.0;
    let mut y = x.to_vec();
    for j in 0..n {
        y[j] = x[j] + h;
        let (up, pp) = field.eval(&y)?;
        y[j] = x[j] - h;
        let (um, pm) = field.eval(&y)?;
        y[j] = x[j];
        for i in 0..n {
            du[i][j] = (up[i] - um[i]) / (2.0 * h);
            lap[i] += (up[i] - 2.0 * u[i] + um[i]) / (h * h);
        }
        dp[j] = (pp - pm) / (2.0 * h);
        let (hp, hm) = (bern(&up, pp), bern(&um, pm));
        dh[j] = (hp - hm) / (2.0 * h);
        lap_h += (hp - 2.0 * h0 + hm) / (h * h);
    }
    Ok(Jet {
        u,
        du,
        lap,
        dp,
        h_center: h0,
        dh,
        lap_h,
    })
}

fn residual_from_jet(j: &Jet, advect: bool) -> PointResidual {
    let n = j.u.len();
    let mut momentum = vec![0.0; n];
    for i in 0..n {
        let adv: f64 = if advect {
            (0..n).map(|k| j.u[k] * j.du[i][k]).sum()
        } else {
            0.0
        };
        momentum[i] = -j.lap[i] + adv + j.dp[i];
    }
    PointResidual {
        momentum,
        divergence: (0..n).map(|i| j.du[i][i]).sum(),
    }
}

/// `|ω|² = Σ ω_ij²` with `ω_ij = (∂_j u_i − ∂_i u_j)/2`.
fn omega_sq_from(du: &[Vec<f64>]) -> f64 {
    let n = du.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = 0.5 * (du[i][j] - du[j][i]);
            s += w * w;
        }
    }
    s
}

/// Steady Navier-Stokes residual at each point.
pub fn ns_residual(field: &HomogeneousField, points: &[Vec<f64>], h: f64) -> Result<Vec<PointResidual>> {
    points
        .par_iter()
        .map(|x| Ok(residual_from_jet(&jet(field, x, h)?, true)))
        .collect()
}

/// Stokes residual `−ΔU + ∇P`, `div U` at each point.
pub fn stokes_residual(field: &HomogeneousField, points: &[Vec<f64>], h: f64) -> Result<Vec<PointResidual>> {
    points
        .par_iter()
        .map(|x| Ok(residual_from_jet(&jet(field, x, h)?, false)))
        .collect()
}

/// `(−ΔH + u·∇H) − (−2|ω|²)` with `H = |u|²/2 + p`, per point.
pub fn bernoulli_identity(field: &HomogeneousField, points: &[Vec<f64>], h: f64) -> Result<Vec<f64>> {
    points
        .par_iter()
        .map(|x| {
            let j = jet(field, x, h)?;
            let lhs = -j.lap_h + j.u.iter().zip(&j.dh).map(|(a, b)| a * b).sum::<f64>();
            Ok(lhs + 2.0 * omega_sq_from(&j.du))
        })
        .collect()
}

/// `|ω|²` at one point from central differences.
pub fn omega_sq(field: &HomogeneousField, x: &[f64], h: f64) -> Result<f64> {
    Ok(omega_sq_from(&jet(field, x, h)?.du))
}

/// `|ω|²` with one Richardson step over `h` and `h/2`.
pub fn omega_sq_extrapolated(field: &HomogeneousField, x: &[f64], h: f64) -> Result<f64> {
    let coarse = omega_sq(field, x, h)?;
    let fine = omega_sq(field, x, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Least-squares factor `c` in `−ΔH + u·∇H = −c |ω|²` over the sample points.
/// A steady solution gives `c = 2` for the normalization used here.
pub fn omega_factor(field: &HomogeneousField, points: &[Vec<f64>], h: f64) -> Result<f64> {
    let pairs: Vec<(f64, f64)> = points
        .par_iter()
        .map(|x| {
            let j = jet(field, x, h)?;
            let lhs = -j.lap_h + j.u.iter().zip(&j.dh).map(|(a, b)| a * b).sum::<f64>();
            Ok((lhs, omega_sq_from(&j.du)))
        })
        .collect::<Result<_>>()?;
    let num: f64 = pairs.iter().map(|(l, w)| -l * w).sum();
    let den: f64 = pairs.iter().map(|(_, w)| w * w).sum();
    if den == 0.0 {
        return Ok(f64::NAN);
    }
    Ok(num / den)
}

/// Bernoulli quantity `H = |u|²/2 + p` at a point.
pub fn bernoulli_value(field: &HomogeneousField, x: &[f64], h: f64) -> Result<f64> {
    Ok(jet(field, x, h)?.h_center)
}

/// Which equation a convergence study measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    NavierStokes,
    Stokes,
    Bernoulli,
}

/// Residual sup-norms along a step-size schedule.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceRecord {
    pub check: Check,
    pub h_values: Vec<f64>,
    pub residual_norms: Vec<f64>,
    /// Least-squares slope of log(norm) against log(h).
    pub observed_order: f64,
    /// Sup-norm of the Richardson-extrapolated residual.
    pub extrapolated_norm: f64,
    /// True when every norm is exactly zero, in which case the order is not defined.
    pub exact: bool,
}

impl ConvergenceRecord {
    pub fn passes(&self, order: f64, order_tol: f64, max_residual: f64) -> bool {
        self.exact
            || ((self.observed_order - order).abs() <= order_tol && self.extrapolated_norm < max_residual)
    }
}

fn residual_components(check: Check, field: &HomogeneousField, points: &[Vec<f64>], h: f64) -> Result<Vec<Vec<f64>>> {
    let flatten = |r: Vec<PointResidual>| {
        r.into_iter()
            .map(|p| {
                let mut v = p.momentum;
                v.push(p.divergence);
                v
            })
            .collect()
    };
    Ok(match check {
        Check::NavierStokes => flatten(ns_residual(field, points, h)?),
        Check::Stokes => flatten(stokes_residual(field, points, h)?),
        Check::Bernoulli => bernoulli_identity(field, points, h)?
            .into_iter()
            .map(|v| vec![v])
            .collect(),
    })
}

fn sup(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().fold(0.0, |m: f64, c| m.max(c.abs()))
}

/// Runs `check` at each step of `steps` (strictly decreasing, successive ratio 2)
/// and extrapolates the point residuals with a full Richardson tableau in h².
pub fn convergence_study(
    check: Check,
    field: &HomogeneousField,
    points: &[Vec<f64>],
    steps: &[f64],
) -> Result<ConvergenceRecord> {
    if steps.len() < 2 || steps.windows(2).any(|w| w[1] >= w[0]) {
        return domain("step schedule needs at least two strictly decreasing values");
    }
    let levels: Vec<Vec<Vec<f64>>> = steps
        .iter()
        .map(|&h| residual_components(check, field, points, h))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = levels.iter().map(|l| sup(l)).collect();
    let exact = norms.iter().all(|&v| v == 0.0);
    let observed_order = if exact { 0.0 } else { log_slope(steps, &norms) };

    let mut table = levels;
    let mut power = 2;
    while table.len() > 1 {
        let next: Vec<Vec<Vec<f64>>> = table
            .windows(2)
            .zip(steps.windows(2))
            .map(|(pair, hs)| {
                let ratio = (hs[0] / hs[1]).powi(power);
                pair[0]
                    .iter()
                    .zip(&pair[1])
                    .map(|(c, f)| c.iter().zip(f).map(|(c, f)| (ratio * f - c) / (ratio - 1.0)).collect())
                    .collect()
            })
            .collect();
        table = next;
        power += 2;
    }
    Ok(ConvergenceRecord {
        check,
        h_values: steps.to_vec(),
        residual_norms: norms,
        observed_order,
        extrapolated_norm: sup(&table[0]),
        exact,
    })
}

fn log_slope(h: &[f64], v: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = v.iter().map(|y| y.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `∮_{|x| = radius} u·n dS` for n ∈ {2, 3}, refined until two resolutions agree.
pub fn divergence_flux(field: &HomogeneousField, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return domain(format!("flux radius must be positive, got {radius}"));
    }
    let normal_flux = |x: &[f64]| -> Result<f64> {
        let (u, _) = field.eval(x)?;
        Ok(u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / radius)
    };
    let at = |m: usize| -> Result<f64> {
        match field.n {
            2 => {
                let dt = 2.0 * PI / m as f64;
                let mut s = 0.0;
                for i in 0..m {
                    let (st, ct) = (i as f64 * dt).sin_cos();
                    s += normal_flux(&[radius * st, radius * ct])?;
                }
                Ok(s * dt * radius)
            }
            3 => {
                let (nodes, weights) = quad::gauss_legendre(m / 2);
                let dpsi = 2.0 * PI / m as f64;
                let mut s = 0.0;
                for (c, w) in nodes.iter().zip(&weights) {
                    let st = (1.0 - c * c).sqrt();
                    for j in 0..m {
                        let (sp, cp) = (j as f64 * dpsi).sin_cos();
                        s += w * dpsi * normal_flux(&[radius * st * cp, radius * st * sp, radius * c])?;
                    }
                }
                Ok(s * radius * radius)
            }
            d => domain(format!("flux quadrature is implemented for n = 2, 3, not {d}")),
        }
    };
    let mut m = 64;
    let mut prev = at(m)?;
    loop {
        m *= 2;
        let next = at(m)?;
        let scale = next.abs().max(1.0);
        if (next - prev).abs() <= 1e-13 * scale || m >= 4096 {
            return Ok(next);
        }
        prev = next;
    }
}

/// Uniform grid on a latitude band of S² in (θ, ψ) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandGrid {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta: usize,
    pub n_psi: usize,
}

impl BandGrid {
    pub fn new(theta_min: f64, theta_max: f64, n_theta: usize, n_psi: usize) -> Result<Self> {
        if !(0.0 < theta_min && theta_min < theta_max && theta_max < PI) {
            return domain("band must satisfy 0 < theta_min < theta_max < π");
        }
        if n_theta < 5 || n_psi < 4 {
            return domain("band grid needs at least 5 latitudes and 4 longitudes");
        }
        Ok(Self {
            theta_min,
            theta_max,
            n_theta,
            n_psi,
        })
    }

    pub fn dtheta(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.n_theta - 1) as f64
    }

    pub fn dpsi(&self) -> f64 {
        2.0 * PI / self.n_psi as f64
    }
}

/// Sup-norm of `curl(∇_v v) − div(ω v)` over the interior of a band grid.
///
/// `v(θ, ψ)` returns the orthonormal components `(v_θ, v_ψ)`. Every derivative
/// is a central difference in (θ, ψ) with the round metric `dθ² + sin²θ dψ²`.
pub fn vorticity_identity_2d<V>(v: V, grid: &BandGrid) -> Result<f64>
where
    V: Fn(f64, f64) -> (f64, f64),
{
    if grid.theta_min < 0.05 || grid.theta_max > PI - 0.05 {
        return domain("vorticity identity grid is too close to a pole");
    }
    let (nt, np) = (grid.n_theta, grid.n_psi);
    let (dt, dp) = (grid.dtheta(), grid.dpsi());
    let theta = |i: usize| grid.theta_min + i as f64 * dt;
    let wrap = |j: isize| ((j % np as isize + np as isize) % np as isize) as usize;
    let mut a = vec![vec![0.0; np]; nt];
    let mut b = vec![vec![0.0; np]; nt];
    for i in 0..nt {
        for j in 0..np {
            let (x, y) = v(theta(i), j as f64 * dp);
            a[i][j] = x;
            b[i][j] = y;
        }
    }
    let d_t = |m: &Vec<Vec<f64>>, i: usize, j: usize| (m[i + 1][j] - m[i - 1][j]) / (2.0 * dt);
    let d_p = |m: &Vec<Vec<f64>>, i: usize, j: usize| {
        (m[i][wrap(j as isize + 1)] - m[i][wrap(j as isize - 1)]) / (2.0 * dp)
    };

    // first layer: ω, the covariant acceleration as a 1-form, and ω v
    let mut omega = vec![vec![0.0; np]; nt];
    let mut w_t = vec![vec![0.0; np]; nt];
    let mut w_p = vec![vec![0.0; np]; nt];
    let mut bs = vec![vec![0.0; np]; nt];
    let mut binv = vec![vec![0.0; np]; nt];
    for i in 0..nt {
        let s = theta(i).sin();
        for j in 0..np {
            bs[i][j] = b[i][j] * s;
            binv[i][j] = b[i][j] / s;
        }
    }
    for i in 1..nt - 1 {
        let (s, c) = theta(i).sin_cos();
        for j in 0..np {
            let (va, vb) = (a[i][j], b[i][j]);
            omega[i][j] = (d_t(&bs, i, j) - d_p(&a, i, j)) / s;
            // contravariant components v^θ = a, v^ψ = b / sin θ
            let acc_t = va * d_t(&a, i, j) + (vb / s) * d_p(&a, i, j) - s * c * (vb / s) * (vb / s);
            let acc_p = va * d_t(&binv, i, j) + (vb / s) * d_p(&binv, i, j) + 2.0 * (c / s) * va * (vb / s);
            w_t[i][j] = acc_t;
            w_p[i][j] = s * s * acc_p;
        }
    }
    let mut flux_t = vec![vec![0.0; np]; nt];
    let mut flux_p = vec![vec![0.0; np]; nt];
    for i in 1..nt - 1 {
        let s = theta(i).sin();
        for j in 0..np {
            flux_t[i][j] = s * a[i][j] * omega[i][j];
            flux_p[i][j] = b[i][j] * omega[i][j];
        }
    }
    let mut worst: f64 = 0.0;
    for i in 2..nt - 2 {
        let s = theta(i).sin();
        for j in 0..np {
            let curl = (d_t(&w_p, i, j) - d_p(&w_t, i, j)) / s;
            let div = (d_t(&flux_t, i, j) + d_p(&flux_p, i, j)) / s;
            worst = worst.max((curl - div).abs());
        }
    }
    Ok(worst)
}

/// The identity residual on a sequence of grids refined by 2 in each direction,
/// returned as a convergence record of the band-grid spacing.
pub fn vorticity_identity_study<V>(v: V, theta_min: f64, theta_max: f64, base: usize, levels: usize) -> Result<ConvergenceRecord>
where
    V: Fn(f64, f64) -> (f64, f64),
{
    let mut hs = Vec::new();
    let mut norms = Vec::new();
    for l in 0..levels {
        let m = base << l;
        let grid = BandGrid::new(theta_min, theta_max, m + 1, 2 * m)?;
        hs.push(grid.dtheta());
        norms.push(vorticity_identity_2d(&v, &grid)?);
    }
    let exact = norms.iter().all(|&v| v < 1e-14);
    Ok(ConvergenceRecord {
        check: Check::NavierStokes,
        observed_order: if exact { 0.0 } else { log_slope(&hs, &norms) },
        extrapolated_norm: *norms.last().expect("at least one level"),
        h_values: hs,
        residual_norms: norms,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Point vortex `u = x^⊥/r²`, `p = −1/(2r²)`.
    fn vortex() -> HomogeneousField {
        HomogeneousField::new(2, "vortex", |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (vec![-x[1] / r2, x[0] / r2], -0.5 / r2)
        })
    }

    #[test]
    fn points_lie_in_shell() {
        let pts = sample_points(3, 100, 7);
        assert_eq!(pts.len(), 100);
        for p in &pts {
            let r = p.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((1.0..=2.0).contains(&r));
        }
        assert_eq!(pts, sample_points(3, 100, 7));
    }

    #[test]
    fn zero_field_is_exact() {
        let f = HomogeneousField::zero(3);
        let pts = sample_points(3, 10, 1);
        let rec = convergence_study(Check::NavierStokes, &f, &pts, &DEFAULT_STEPS).unwrap();
        assert!(rec.exact);
        assert_eq!(rec.extrapolated_norm, 0.0);
        assert!(bernoulli_identity(&f, &pts, 1e-2).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn point_vortex_solves_navier_stokes() {
        let f = vortex();
        let pts = sample_points(2, 30, 3);
        let rec = convergence_study(Check::NavierStokes, &f, &pts, &DEFAULT_STEPS).unwrap();
        assert!((rec.observed_order - 2.0).abs() < 0.3, "{rec:?}");
        assert!(rec.extrapolated_norm < 1e-8, "{rec:?}");
        assert!(f.homogeneity_defect(&pts).unwrap() < 1e-14);
    }

    #[test]
    fn vortex_flux_vanishes_and_source_flux_is_two_pi() {
        assert!(divergence_flux(&vortex(), 1.0).unwrap().abs() < 1e-13);
        let source = HomogeneousField::new(2, "source", |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (vec![x[0] / r2, x[1] / r2], 0.0)
        });
        for r in [1.0, 2.5] {
            assert!((divergence_flux(&source, r).unwrap() - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn stencil_near_origin_is_rejected() {
        let f = vortex();
        assert!(ns_residual(&f, &[vec![0.3, 0.0]], 1e-3).is_err());
        assert!(ns_residual(&f, &[vec![1.0, 0.0]], 0.5).is_err());
        assert!(f.eval(&[0.0, 0.0]).is_err());
        assert!(f.eval(&[1.0]).is_err());
    }

    #[test]
    fn non_solution_keeps_a_residual() {
        let f = HomogeneousField::new(2, "shear", |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (vec![x[1] * x[1] / (r2 * r2.sqrt()), 0.0], 0.0)
        });
        let pts = sample_points(2, 10, 5);
        let rec = convergence_study(Check::NavierStokes, &f, &pts, &DEFAULT_STEPS).unwrap();
        assert!(rec.extrapolated_norm > 1e-2);
    }

    #[test]
    fn gradient_field_has_no_vorticity_defect() {
        // v = ∇cos θ = −sin θ e_θ
        let grid = BandGrid::new(0.3, PI - 0.3, 41, 40).unwrap();
        let r = vorticity_identity_2d(|t: f64, _| (-t.sin(), 0.0), &grid).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn rotation_field_satisfies_identity() {
        let rec = vorticity_identity_study(|t: f64, _| (0.0, t.sin()), 0.3, PI - 0.3, 20, 3).unwrap();
        assert!(rec.exact || (rec.observed_order - 2.0).abs() < 0.3, "{rec:?}");
    }

    #[test]
    fn band_limited_field_converges_at_second_order() {
        let v = |t: f64, p: f64| {
            let (s, c) = t.sin_cos();
            (
                0.7 * (2.0 * p).cos() * c + 0.3 * s * p.sin(),
                0.4 * (p + t).sin() + 0.2 * c * c * (3.0 * p).cos(),
            )
        };
        let rec = vorticity_identity_study(v, 0.4, PI - 0.4, 128, 3).unwrap();
        assert!((rec.observed_order - 2.0).abs() < 0.3, "{rec:?}");
        assert!(vorticity_identity_2d(v, &BandGrid::new(0.01, 1.0, 10, 10).unwrap()).is_err());
    }
}
