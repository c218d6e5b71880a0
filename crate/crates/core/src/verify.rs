//! Finite-difference verification reports for constructed fields and saved files.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::{self, EllipticModulus, EllipticValues};
use crate::error::{domain, Error, Result};
use crate::fd_oracle::{self, Check, HomogeneousField};
use crate::hamel2d::{circle_grid, PeriodicProfile};
use crate::io::{Document, SolutionKind, Table};
use crate::sphere_solver::{residual_axisym, SphereProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub steps: Vec<f64>,
    pub points: usize,
    pub seed: u64,
    pub order: f64,
    pub order_tol: f64,
    /// Bound on the extrapolated residual, relative to `max(1, scale)`.
    pub tolerance: f64,
    /// Bound on the intrinsic residual of sampled profiles, relative likewise.
    pub intrinsic_tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            steps: fd_oracle::DEFAULT_STEPS.to_vec(),
            points: 50,
            seed: fd_oracle::DEFAULT_SEED,
            order: 2.0,
            order_tol: 0.3,
            tolerance: 1e-7,
            intrinsic_tolerance: 1e-8,
        }
    }
}

impl VerifyOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.intrinsic_tolerance > 0.0 && self.order_tol > 0.0) {
            return domain("tolerances must be positive");
        }
        if self.points == 0 {
            return domain("verification needs at least one sample point");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub field: String,
    pub check: String,
    pub h: Vec<f64>,
    pub norms: Vec<f64>,
    /// `None` when every residual vanished exactly or no step schedule applies.
    pub order: Option<f64>,
    pub extrapolated: f64,
    /// Largest `|u|²|x|² + |p||x|²` over the sample points.
    pub scale: f64,
    pub intrinsic: Option<f64>,
    pub tolerance: f64,
    pub seed: u64,
    pub points: usize,
    pub pass: bool,
}

fn field_scale(field: &HomogeneousField, points: &[Vec<f64>]) -> Result<f64> {
    let mut s: f64 = 0.0;
    for x in points {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let (u, p) = field.eval(x)?;
        let u2: f64 = u.iter().map(|c| c * c).sum();
        s = s.max(u2 * r2 + p.abs() * r2);
    }
    Ok(s)
}

/// Runs the convergence study of `check` on `field`.
pub fn verify_field(name: &str, field: &HomogeneousField, check: Check, opts: &VerifyOptions) -> Result<VerifyReport> {
    opts.validate()?;
    let pts = fd_oracle::sample_points(field.dim(), opts.points, opts.seed);
    let rec = fd_oracle::convergence_study(check, field, &pts, &opts.steps)?;
    let scale = field_scale(field, &pts)?;
    let bound = opts.tolerance * scale.max(1.0);
    // residuals already below the bound at every step carry no order information
    let pass = rec.passes(opts.order, opts.order_tol, bound) || rec.residual_norms.iter().all(|&n| n < bound);
    Ok(VerifyReport {
        field: name.to_string(),
        check: format!("{check:?}").to_lowercase(),
        h: rec.h_values,
        norms: rec.residual_norms,
        order: (!rec.exact).then_some(rec.observed_order),
        extrapolated: rec.extrapolated_norm,
        scale,
        intrinsic: None,
        tolerance: opts.tolerance,
        seed: opts.seed,
        points: opts.points,
        pass,
    })
}

fn with_intrinsic(mut r: VerifyReport, intrinsic: f64, bound: f64) -> VerifyReport {
    r.pass &= intrinsic <= bound;
    r.intrinsic = Some(intrinsic);
    r
}

/// Sphere profile: intrinsic spectral residual plus the Cartesian FD study.
pub fn verify_sphere_profile(name: &str, profile: &SphereProfile, opts: &VerifyOptions) -> Result<VerifyReport> {
    let intrinsic = residual_axisym(profile)?.max_norm();
    let bound = opts.intrinsic_tolerance * profile.sup_norm().powi(2).max(1.0);
    let r = verify_field(name, &profile.cartesian_field(), Check::NavierStokes, opts)?;
    Ok(with_intrinsic(r, intrinsic, bound))
}

/// Circle profile: intrinsic residual of the circle system plus the planar FD study.
pub fn verify_circle_profile(name: &str, profile: &PeriodicProfile, opts: &VerifyOptions) -> Result<VerifyReport> {
    let intrinsic = profile.circle_residual_relative();
    let r = verify_field(name, &profile.field(), Check::NavierStokes, opts)?;
    Ok(with_intrinsic(r, intrinsic, opts.intrinsic_tolerance))
}

fn circle_profile_from(grid: &[f64], f: &[f64], p: &[f64]) -> Result<PeriodicProfile> {
    let expected = circle_grid(grid.len());
    if grid.iter().zip(&expected).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b)) {
        return Err(Error::Format("circle profiles must be sampled at θ_j = 2πj/N".into()));
    }
    PeriodicProfile::from_samples(f.to_vec(), p.to_vec())
}

/// Relative disagreement of a saved elliptic table with a fresh evaluation,
/// together with the internal identity `H = 2F(E - (2+κ)F/3)`.
pub fn elliptic_table_defect(t: &Table) -> Result<f64> {
    let col = |n: &str| t.column(n).ok_or_else(|| Error::Format(format!("missing column {n}")));
    let (k, f, e, df, de, h) = (col("kappa")?, col("F")?, col("E")?, col("dF")?, col("dE")?, col("H")?);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..t.rows() {
        let m = EllipticModulus::new(k[i])?;
        let v = EllipticValues::at(m);
        let identity = 2.0 * f[i] * (e[i] - (2.0 + k[i]) / 3.0 * f[i]);
        worst = worst
            .max(rel(f[i], v.f))
            .max(rel(e[i], v.e))
            .max(rel(df[i], elliptic::deriv_f(m)))
            .max(rel(de[i], elliptic::deriv_e(m)))
            .max(rel(h[i], elliptic::period_h(m)))
            .max(rel(h[i], identity));
    }
    Ok(worst)
}

/// Re-verifies any file written by the tool.
pub fn verify_document(doc: &Document, opts: &VerifyOptions) -> Result<VerifyReport> {
    opts.validate()?;
    match doc {
        Document::Profile(p) => verify_sphere_profile("profile-file", &p.profile()?, opts),
        Document::Solution(s) => match s.kind {
            SolutionKind::Landau | SolutionKind::Profile => {
                verify_sphere_profile("profile-file", &s.sphere_profile()?, opts)
            }
            SolutionKind::Hamel => {
                let prof = circle_profile_from(&s.grid, s.field("f")?, s.field("p")?)?;
                verify_circle_profile("profile-file", &prof, opts)
            }
        },
        Document::Table(t) => {
            if t.has_columns(&["kappa", "F", "E", "dF", "dE", "H"]) {
                let defect = elliptic_table_defect(t)?;
                return Ok(VerifyReport {
                    field: "profile-file".into(),
                    check: "elliptic-table".into(),
                    h: Vec::new(),
                    norms: vec![defect],
                    order: None,
                    extrapolated: defect,
                    scale: 1.0,
                    intrinsic: Some(defect),
                    tolerance: opts.intrinsic_tolerance,
                    seed: opts.seed,
                    points: t.rows(),
                    pass: defect <= opts.intrinsic_tolerance,
                });
            }
            let theta = t
                .column("theta")
                .ok_or_else(|| Error::Format("table has no theta column".into()))?;
            let col = |n: &str| t.column(n).ok_or_else(|| Error::Format(format!("missing column {n}")));
            if t.has_columns(&["v", "f", "p"]) || t.has_columns(&["g", "f", "p"]) {
                let g = t.column("v").or_else(|| t.column("g")).expect("checked");
                let prof = SphereProfile::new(3, theta.to_vec(), g.to_vec(), col("f")?.to_vec(), col("p")?.to_vec())?;
                return verify_sphere_profile("profile-file", &prof, opts);
            }
            if t.has_columns(&["f", "p"]) {
                if theta.last().is_some_and(|&t| t >= 2.0 * PI) {
                    return Err(Error::Format("circle tables must not repeat θ = 2π".into()));
                }
                let prof = circle_profile_from(theta, col("f")?, col("p")?)?;
                return verify_circle_profile("profile-file", &prof, opts);
            }
            Err(Error::Format(format!(
                "unrecognised table columns {:?}",
                t.headers
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamel2d::{mode_profile, DEFAULT_PROFILE_STEPS};
    use crate::landau3d::{landau_field, LandauParams};

    #[test]
    fn landau_field_passes() {
        let f = landau_field(LandauParams::new(1.0).unwrap());
        let r = verify_field("landau", &f, Check::NavierStokes, &VerifyOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.order.unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn roundoff_level_field_passes() {
        let f = HomogeneousField::new(2, "tiny", |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (vec![1e-15 * x[1].sin() / r2, 0.0], 0.0)
        });
        let r = verify_field("tiny", &f, Check::NavierStokes, &VerifyOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn wrong_field_fails() {
        // Landau velocity with the pressure of the opposite jet
        let params = LandauParams::new(1.0).unwrap();
        let good = landau_field(params);
        let bad = HomogeneousField::new(3, "broken", move |x: &[f64]| {
            let (u, p) = good.eval(x).unwrap();
            (u, 1.5 * p)
        });
        let r = verify_field("broken", &bad, Check::NavierStokes, &VerifyOptions::default()).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn documents_reverify() {
        let prof = SphereProfile::landau(1.0, 128).unwrap();
        let doc = Document::Profile(crate::io::ProfileFile::from_profile(&prof, None, None));
        assert!(verify_document(&doc, &VerifyOptions::default()).unwrap().pass);

        let h = mode_profile(3, 0.0, DEFAULT_PROFILE_STEPS).unwrap();
        let pp = PeriodicProfile::from_hamel(&h, 256).unwrap();
        let mut t = Table::new(&["theta", "f", "p"]);
        for i in 0..pp.len() {
            t.push(&[pp.thetas[i], pp.f[i], pp.p[i]]);
        }
        let r = verify_document(&Document::Table(t.clone()), &VerifyOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        t.columns[2][5] += 1e-3;
        assert!(!verify_document(&Document::Table(t), &VerifyOptions::default()).unwrap().pass);

        let rows = elliptic::table(0.0, 10.0, 5, false).unwrap();
        let mut t = Table::new(&["kappa", "F", "E", "dF", "dE", "H"]);
        for r in rows {
            t.push(&[r.kappa, r.f, r.e, r.df, r.de, r.h]);
        }
        assert!(verify_document(&Document::Table(t), &VerifyOptions::default()).unwrap().pass);
    }
}
