use serde::{Deserialize, Serialize};

use super::levy::{JumpIntensity, LevyModel};
use super::norm;
use crate::error::{param, Error, Result};

/// Potential family tag (used in configuration files).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialFamily {
    Power,
    PowerLog,
    Log,
    LogLog,
    Borderline,
    Constant,
    Exp,
}

/// Radial, continuous, locally bounded potential `V(x) = offset + f(|x|)`.
///
/// With `V ≥ 0` continuous the Kato condition on bounded sets is automatic, so
/// no Kato-class test is performed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    /// `c|x|^p`
    Power { c: f64, p: f64, offset: f64 },
    /// `c|x|^p log^q(e+|x|)`
    PowerLog { c: f64, p: f64, q: f64, offset: f64 },
    /// `κ log(1+|x|)`
    Log { kappa: f64, offset: f64 },
    /// `κ log(1+log(1+|x|))`
    LogLog { kappa: f64, offset: f64 },
    /// `|log ν(x)|/t₀` for `|x| ≥ R`, the constant `|log ν(R)|/t₀` inside.
    Borderline { model: Box<LevyModel>, t0: f64, radius: f64, offset: f64 },
    Constant { c: f64 },
    /// `c e^{κ|x|}`
    Exp { c: f64, kappa: f64, offset: f64 },
}

impl Potential {
    pub fn power(c: f64, p: f64) -> Self {
        Potential::Power { c, p, offset: 0.0 }
    }

    pub fn power_log(c: f64, p: f64, q: f64) -> Self {
        Potential::PowerLog { c, p, q, offset: 0.0 }
    }

    pub fn log(kappa: f64) -> Self {
        Potential::Log { kappa, offset: 0.0 }
    }

    pub fn log_log(kappa: f64) -> Self {
        Potential::LogLog { kappa, offset: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Potential::Constant { c }
    }

    pub fn exp(c: f64, kappa: f64) -> Self {
        Potential::Exp { c, kappa, offset: 0.0 }
    }

    pub fn family(&self) -> PotentialFamily {
        match self {
            Potential::Power { .. } => PotentialFamily::Power,
            Potential::PowerLog { .. } => PotentialFamily::PowerLog,
            Potential::Log { .. } => PotentialFamily::Log,
            Potential::LogLog { .. } => PotentialFamily::LogLog,
            Potential::Borderline { .. } => PotentialFamily::Borderline,
            Potential::Constant { .. } => PotentialFamily::Constant,
            Potential::Exp { .. } => PotentialFamily::Exp,
        }
    }

    pub fn is_confining(&self) -> bool {
        match self {
            Potential::Constant { .. } => false,
            Potential::Power { c, p, .. } | Potential::PowerLog { c, p, .. } => *c > 0.0 && *p > 0.0,
            Potential::Log { kappa, .. } | Potential::LogLog { kappa, .. } => *kappa > 0.0,
            Potential::Exp { c, kappa, .. } => *c > 0.0 && *kappa > 0.0,
            Potential::Borderline { .. } => true,
        }
    }

    /// Returns the same potential with `offset` added.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Potential::Power { offset, .. }
            | Potential::PowerLog { offset, .. }
            | Potential::Log { offset, .. }
            | Potential::LogLog { offset, .. }
            | Potential::Borderline { offset, .. }
            | Potential::Exp { offset, .. } => *offset += shift,
            Potential::Constant { c } => *c += shift,
        }
        out
    }

    /// Multiplies the non-constant part and the offset by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Potential::Power { c, offset, .. } | Potential::PowerLog { c, offset, .. } | Potential::Exp { c, offset, .. } => {
                *c *= factor;
                *offset *= factor;
            }
            Potential::Log { kappa, offset } | Potential::LogLog { kappa, offset } => {
                *kappa *= factor;
                *offset *= factor;
            }
            Potential::Borderline { t0, offset, .. } => {
                *t0 /= factor;
                *offset *= factor;
            }
            Potential::Constant { c } => *c *= factor,
        }
        out
    }

    /// `V` at radius `r = |x|`.
    pub fn radial(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            Potential::Power { c, p, offset } => offset + c * r.powf(*p),
            Potential::PowerLog { c, p, q, offset } => offset + c * r.powf(*p) * (std::f64::consts::E + r).ln().powf(*q),
            Potential::Log { kappa, offset } => offset + kappa * r.ln_1p(),
            Potential::LogLog { kappa, offset } => offset + kappa * r.ln_1p().ln_1p(),
            Potential::Borderline { model, t0, radius, offset } => {
                let r_eff = r.max(*radius);
                offset + model.nu_radial(r_eff).ln().abs() / t0
            }
            Potential::Constant { c } => *c,
            Potential::Exp { c, kappa, offset } => offset + c * (kappa * r).exp(),
        }
    }

    /// `V(x)` at a point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.radial(norm(x))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Potential::Power { c, p, offset } => c.is_finite() && *p >= 0.0 && offset.is_finite(),
            Potential::PowerLog { c, p, q, offset } => c.is_finite() && *p >= 0.0 && q.is_finite() && offset.is_finite(),
            Potential::Log { kappa, offset } | Potential::LogLog { kappa, offset } => kappa.is_finite() && offset.is_finite(),
            Potential::Borderline { model, t0, radius, offset } => {
                model.validate()?;
                *t0 > 0.0 && *radius > 0.0 && offset.is_finite()
            }
            Potential::Constant { c } => c.is_finite(),
            Potential::Exp { c, kappa, offset } => c.is_finite() && kappa.is_finite() && offset.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(param(format!("invalid potential parameters: {self:?}")))
        }
    }

    /// Builds a potential from its configuration record. Borderline potentials
    /// need the process, hence `model`.
    pub fn from_spec(spec: &PotentialSpec, model: &LevyModel) -> Result<Self> {
        let c = spec.c.unwrap_or(1.0);
        let offset = spec.offset.unwrap_or(0.0);
        let kappa = spec.kappa.unwrap_or(1.0);
        let v = match spec.family {
            PotentialFamily::Power => Potential::Power { c, p: spec.p.unwrap_or(2.0), offset },
            PotentialFamily::PowerLog => Potential::PowerLog { c, p: spec.p.unwrap_or(2.0), q: spec.q.unwrap_or(1.0), offset },
            PotentialFamily::Log => Potential::Log { kappa, offset },
            PotentialFamily::LogLog => Potential::LogLog { kappa, offset },
            PotentialFamily::Constant => Potential::Constant { c },
            PotentialFamily::Exp => Potential::Exp { c, kappa, offset },
            PotentialFamily::Borderline => {
                let t0 = spec.t0.ok_or_else(|| param("borderline potential needs t0"))?;
                let radius = spec.radius.ok_or_else(|| param("borderline potential needs R"))?;
                borderline_potential(model, t0, radius)?.shifted(offset)
            }
        };
        v.validate()?;
        Ok(v)
    }

    pub fn to_spec(&self) -> PotentialSpec {
        let mut s = PotentialSpec { family: self.family(), ..PotentialSpec::default() };
        match self {
            Potential::Power { c, p, offset } => {
                s.c = Some(*c);
                s.p = Some(*p);
                s.offset = Some(*offset);
            }
            Potential::PowerLog { c, p, q, offset } => {
                s.c = Some(*c);
                s.p = Some(*p);
                s.q = Some(*q);
                s.offset = Some(*offset);
            }
            Potential::Log { kappa, offset } | Potential::LogLog { kappa, offset } => {
                s.kappa = Some(*kappa);
                s.offset = Some(*offset);
            }
            Potential::Borderline { t0, radius, offset, .. } => {
                s.t0 = Some(*t0);
                s.radius = Some(*radius);
                s.offset = Some(*offset);
            }
            Potential::Constant { c } => s.c = Some(*c),
            Potential::Exp { c, kappa, offset } => {
                s.c = Some(*c);
                s.kappa = Some(*kappa);
                s.offset = Some(*offset);
            }
        }
        s
    }
}

/// Flat configuration record for a potential (`[potential]` section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub family: PotentialFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self { family: PotentialFamily::Power, c: None, p: None, q: None, kappa: None, t0: None, radius: None, offset: None }
    }
}

/// `V(x)`.
pub fn evaluate_potential(v: &Potential, x: &[f64]) -> f64 {
    v.eval(x)
}

/// The potential with `t₀V = |log ν|` outside `B(0,R)`, continued by its
/// boundary value inside.
pub fn borderline_potential(model: &LevyModel, t0: f64, radius: f64) -> Result<Potential> {
    model.validate()?;
    if !(t0 > 0.0) {
        return Err(param("t0 must be positive"));
    }
    if !(radius > 0.0) {
        return Err(param("R must be positive"));
    }
    let nu_r = model.nu_radial(radius);
    if !(nu_r < 1.0) {
        return Err(Error::Parameter(format!("R = {radius} too small: ν = {nu_r} ≥ 1 on |x| = R")));
    }
    Ok(Potential::Borderline { model: Box::new(model.clone()), t0, radius, offset: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn power_value() {
        assert_eq!(Potential::power(1.0, 2.0).eval(&[3.0]), 9.0);
        assert_eq!(Potential::power(1.0, 2.0).eval(&[-3.0]), 9.0);
    }

    #[test]
    fn borderline_stable_value() {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let v = borderline_potential(&m, 1.0, 2.0).unwrap();
        let expected = -(0.0625 / PI).ln();
        assert!((v.eval(&[4.0]) - expected).abs() < 1e-13);
        assert!((v.eval(&[4.0]) - (16.0 * PI).ln()).abs() < 1e-12);
        // continuity at R and constant inside
        let inside = v.eval(&[2.0 - 1e-12]);
        let outside = v.eval(&[2.0 + 1e-12]);
        assert!((inside - outside).abs() < 1e-10);
        assert_eq!(v.eval(&[0.0]), v.eval(&[1.0]));
    }

    #[test]
    fn borderline_rejects_small_radius() {
        let m = LevyModel::stable(1.0, 1).unwrap();
        // ν(0.5) = 4/π > 1
        assert!(matches!(borderline_potential(&m, 1.0, 0.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn borderline_monotone() {
        let m = LevyModel::relativistic(1.0, 1.0, 1).unwrap();
        let v = borderline_potential(&m, 2.0, 3.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..200 {
            let r = i as f64 * 0.25;
            let val = v.radial(r);
            assert!(val >= prev - 1e-12);
            prev = val;
        }
    }

    #[test]
    fn spec_round_trip() {
        let m = LevyModel::stable(1.0, 1).unwrap();
        for v in [Potential::power_log(2.0, 1.5, 0.5), Potential::log_log(3.0), borderline_potential(&m, 1.0, 2.0).unwrap()] {
            let back = Potential::from_spec(&v.to_spec(), &m).unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn scaling_multiplies_values() {
        let m = LevyModel::stable(1.0, 1).unwrap();
        for v in [Potential::power(1.0, 2.0), Potential::log_log(1.0), borderline_potential(&m, 1.0, 2.0).unwrap()] {
            let s = v.scaled(3.0);
            for &r in &[0.5, 3.0, 40.0] {
                assert!((s.radial(r) - 3.0 * v.radial(r)).abs() < 1e-12 * v.radial(r).abs().max(1.0));
            }
        }
    }
}
