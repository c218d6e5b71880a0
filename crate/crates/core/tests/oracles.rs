//! Derived quantities checked against oracles written out here from scratch:
//! trapezoid sums of periodic integrands, RK4 orbits and fourth-order
//! finite differences.

use std::f64::consts::PI;

use homoflow::elliptic::{self, EllipticModulus, EllipticValues};
use homoflow::hamel2d::{self, RootTriple};
use homoflow::landau3d::{eval_cartesian, LandauParams};

/// `∫₀^{π/2} g(sin²φ) dφ` by the trapezoid rule over one full period, which
/// converges geometrically for analytic π-periodic integrands.
fn quarter_period(g: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = PI / n as f64;
    0.5 * h * (0..n).map(|j| g((j as f64 * h).sin().powi(2))).sum::<f64>()
}

fn oracle_fe(kappa: f64) -> (f64, f64) {
    let n = 1 << 14;
    (
        quarter_period(|s| 1.0 / (1.0 + kappa * s).sqrt(), n),
        quarter_period(|s| (1.0 + kappa * s).sqrt(), n),
    )
}

#[test]
fn agm_matches_trapezoid_quadrature() {
    for kappa in [0.0, 1e-6, 0.3, 1.0, 7.5, 42.0, 999.0] {
        let v = EllipticValues::at(EllipticModulus::new(kappa).unwrap());
        let (f, e) = oracle_fe(kappa);
        assert!((v.f - f).abs() < 1e-13 * f, "F({kappa}): {} vs {f}", v.f);
        assert!((v.e - e).abs() < 1e-13 * e, "E({kappa}): {} vs {e}", v.e);
    }
}

#[test]
fn mode_roots_close_the_period_integral() {
    for k in 3..=12u32 {
        let m = hamel2d::roots_for_mode(i64::from(k)).unwrap().unwrap();
        let RootTriple { e1, e2, e3 } = m.roots;
        assert!((e1 + e2 + e3 + 6.0).abs() < 1e-11);
        // u = e2 + (e1 - e2) s turns the half-period integral into 2∫ dφ/√(u - e3)
        let t = quarter_period(|s| 2.0 / (e2 + (e1 - e2) * s - e3).sqrt(), 4096);
        let target = (2.0f64 / 3.0).sqrt() * PI / f64::from(k);
        assert!((t - target).abs() < 1e-12 * target, "k = {k}: {t} vs {target}");
        let i = quarter_period(|s| 2.0 * (e2 + (e1 - e2) * s) / (e2 + (e1 - e2) * s - e3).sqrt(), 4096);
        assert!(i.abs() < 1e-10 * (1.0 + e1), "k = {k}: flux integral {i}");
    }
}

fn rk4_orbit(b: f64, u0: f64, span: f64, steps: usize) -> (f64, f64, f64) {
    let rhs = |y: [f64; 2]| [y[1], b - y[0] * y[0] - 4.0 * y[0]];
    let h = span / steps as f64;
    let mut y = [u0, 0.0];
    let mut lo = u0;
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        lo = lo.min(y[0]);
    }
    (y[0], y[1], lo)
}

#[test]
fn mode_orbits_close_after_one_period() {
    for k in [3u32, 5, 8] {
        let m = hamel2d::roots_for_mode(i64::from(k)).unwrap().unwrap();
        let consts = hamel2d::derived_constants(&m.roots).unwrap();
        let (u, du, lo) = rk4_orbit(consts.b, m.roots.e1, 2.0 * PI / f64::from(k), 200_000);
        let scale = m.roots.amplitude();
        assert!((u - m.roots.e1).abs() < 1e-8 * scale, "k = {k}: u = {u}");
        assert!(du.abs() < 1e-7 * scale * f64::from(k), "k = {k}: u' = {du}");
        assert!((lo - m.roots.e2).abs() < 1e-6 * scale, "k = {k}: min {lo}");
    }
}

#[test]
fn profile_amplitude_matches_closed_form() {
    for k in 3..=10u32 {
        let m = hamel2d::roots_for_mode(i64::from(k)).unwrap().unwrap();
        let (f, _) = oracle_fe(m.kappa);
        let closed = 6.0 * m.kappa * f * f * f64::from(k * k) / (PI * PI);
        assert!((m.roots.amplitude() - closed).abs() < 1e-10 * closed, "k = {k}");
    }
}

#[test]
fn period_function_vanishes_at_its_root() {
    let k = elliptic::kappa_zero_root();
    let (f, e) = oracle_fe(k);
    assert!((2.0 * f * (e - (2.0 + k) / 3.0 * f)).abs() < 1e-13);
    let (f0, e0) = oracle_fe(0.0);
    assert!((2.0 * f0 * (e0 - 2.0 / 3.0 * f0) - PI * PI / 6.0).abs() < 1e-15);
}

fn classical_landau(x: [f64; 3], a: f64) -> [f64; 3] {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let c = x[2] / r;
    let s = (1.0 - c * c).sqrt();
    let ur = 2.0 / r * ((a * a - 1.0) / (a - c).powi(2) - 1.0);
    let ut = -2.0 * s / (r * (a - c));
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let (cp, sp) = (x[0] / rho, x[1] / rho);
    [
        ur * s * cp + ut * c * cp,
        ur * s * sp + ut * c * sp,
        ur * c - ut * s,
    ]
}

#[test]
fn velocity_matches_classical_jet() {
    for kappa in [0.2, 1.0, 3.0] {
        let params = LandauParams::new(kappa).unwrap();
        let a = 1.0 / kappa.tanh();
        for x in [[0.3, -0.4, 0.9], [1.0, 0.2, -0.5], [-0.7, 0.7, 0.1]] {
            let (u, _) = eval_cartesian(x, &params).unwrap();
            let want = classical_landau(x, a);
            for i in 0..3 {
                assert!((u[i] - want[i]).abs() < 1e-12 * (1.0 + want[i].abs()), "κ = {kappa}, x = {x:?}");
            }
        }
    }
}

/// `u·∇u + ∇p − Δu` and `∇·u` by fourth-order central differences.
fn ns_defect4(eval: impl Fn([f64; 3]) -> ([f64; 3], f64), x: [f64; 3], h: f64) -> f64 {
    let (u0, _) = eval(x);
    let shift = |j: usize, d: f64| {
        let mut y = x;
        y[j] += d;
        eval(y)
    };
    let mut grad = [[0.0; 3]; 3];
    let mut lap = [0.0; 3];
    let mut dp = [0.0; 3];
    let mut div = 0.0;
    for j in 0..3 {
        let (u2p, p2p) = shift(j, 2.0 * h);
        let (u1p, p1p) = shift(j, h);
        let (u1m, p1m) = shift(j, -h);
        let (u2m, p2m) = shift(j, -2.0 * h);
        for i in 0..3 {
            grad[i][j] = (-u2p[i] + 8.0 * u1p[i] - 8.0 * u1m[i] + u2m[i]) / (12.0 * h);
            lap[i] += (-u2p[i] + 16.0 * u1p[i] - 30.0 * u0[i] + 16.0 * u1m[i] - u2m[i]) / (12.0 * h * h);
        }
        dp[j] = (-p2p + 8.0 * p1p - 8.0 * p1m + p2m) / (12.0 * h);
        div += grad[j][j];
    }
    let mut worst = div.abs();
    for i in 0..3 {
        let adv: f64 = (0..3).map(|k| u0[k] * grad[i][k]).sum();
        worst = worst.max((adv + dp[i] - lap[i]).abs());
    }
    worst
}

#[test]
fn pressure_closes_the_momentum_equation() {
    let params = LandauParams::new(0.8).unwrap();
    let eval = |x: [f64; 3]| eval_cartesian(x, &params).unwrap();
    for x in [[0.3, -0.4, 0.9], [1.0, 0.2, -0.5], [-0.7, 0.7, 0.1]] {
        let d = ns_defect4(eval, x, 1e-3);
        assert!(d < 1e-7, "x = {x:?}: {d}");
    }
    // the pressure is pinned: flipping its sign breaks the balance
    let flipped = |x: [f64; 3]| {
        let (u, p) = eval_cartesian(x, &params).unwrap();
        (u, -p)
    };
    assert!(ns_defect4(flipped, [0.3, -0.4, 0.9], 1e-3) > 1e-2);
}

#[test]
fn green_function_satisfies_stokes() {
    // G_{·j k} as velocity with its pressure must solve -Δu + ∇p = 0, ∇·u = 0
    for (j, k) in [(0, 0), (0, 1), (1, 1)] {
        let u = |x: [f64; 2]| {
            [
                hamel2d::stokes_green(0, j, k, x).unwrap(),
                hamel2d::stokes_green(1, j, k, x).unwrap(),
            ]
        };
        let p = |x: [f64; 2]| hamel2d::stokes_green_pressure(j, k, x).unwrap();
        let x = [0.6, -0.9];
        let h = 1e-3;
        let at = |dx: f64, dy: f64| [x[0] + dx, x[1] + dy];
        let d1 = |f: &dyn Fn([f64; 2]) -> f64, ax: usize| {
            let e = |s: f64| if ax == 0 { at(s, 0.0) } else { at(0.0, s) };
            (-f(e(2.0 * h)) + 8.0 * f(e(h)) - 8.0 * f(e(-h)) + f(e(-2.0 * h))) / (12.0 * h)
        };
        let d2 = |f: &dyn Fn([f64; 2]) -> f64, ax: usize| {
            let e = |s: f64| if ax == 0 { at(s, 0.0) } else { at(0.0, s) };
            (-f(e(2.0 * h)) + 16.0 * f(e(h)) - 30.0 * f(x) + 16.0 * f(e(-h)) - f(e(-2.0 * h))) / (12.0 * h * h)
        };
        let u1 = |y: [f64; 2]| u(y)[0];
        let u2 = |y: [f64; 2]| u(y)[1];
        let div = d1(&u1, 0) + d1(&u2, 1);
        let m1 = -(d2(&u1, 0) + d2(&u1, 1)) + d1(&p, 0);
        let m2 = -(d2(&u2, 0) + d2(&u2, 1)) + d1(&p, 1);
        for (name, v) in [("div", div), ("m1", m1), ("m2", m2)] {
            assert!(v.abs() < 1e-8, "G·{j}{k} {name} = {v}");
        }
    }
}
