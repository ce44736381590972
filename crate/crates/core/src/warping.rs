//! Closed-form geometry of the warped product `I ×_h Sⁿ` with metric
//! `g = dt² + h(t)² ds²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form profile of a warping function. Each variant evaluates `h`,
/// `h'` and `h''` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// `h ≡ 1`, the Riemannian product `ℝ × Sⁿ`.
    Product,
    /// `h = sin t`, the round sphere `S^{n+1}`.
    Sphere,
    /// `h = sinh t`, hyperbolic space.
    Hyperbolic,
    /// `h = t`, Euclidean space.
    Euclidean,
    /// `h = cosh t`.
    Cosh,
    /// `h = Σ c_k t^k`.
    Polynomial(Vec<f64>),
    /// `h = a_0 + Σ_{k≥1} (a_k cos kt + b_k sin kt)`; `cos[0]` is the constant
    /// term and `sin[0]` is ignored.
    Trigonometric { cos: Vec<f64>, sin: Vec<f64> },
}

impl Profile {
    /// Look up a built-in profile by registry name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "product" => Some(Profile::Product),
            "sphere" => Some(Profile::Sphere),
            "hyperbolic" => Some(Profile::Hyperbolic),
            "euclidean" => Some(Profile::Euclidean),
            "cosh" => Some(Profile::Cosh),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Product => "product",
            Profile::Sphere => "sphere",
            Profile::Hyperbolic => "hyperbolic",
            Profile::Euclidean => "euclidean",
            Profile::Cosh => "cosh",
            Profile::Polynomial(_) => "polynomial",
            Profile::Trigonometric { .. } => "trigonometric",
        }
    }

    /// Textual form accepted by [`Profile::from_spec`]: a registry name,
    /// `polynomial:c0,c1,...` or `trig:a0,a1,...;b0,b1,...`.
    pub fn to_spec(&self) -> String {
        fn join(v: &[f64]) -> String {
            v.iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(",")
        }
        match self {
            Profile::Polynomial(c) => format!("polynomial:{}", join(c)),
            Profile::Trigonometric { cos, sin } => format!("trig:{};{}", join(cos), join(sin)),
            other => other.name().to_string(),
        }
    }

    pub fn from_spec(spec: &str) -> Result<Self> {
        fn list(s: &str) -> Result<Vec<f64>> {
            s.split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad coefficient '{x}': {e}"))))
                .collect()
        }
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("polynomial:") {
            let c = list(rest)?;
            if c.is_empty() {
                return Err(Error::Parse("empty polynomial coefficient list".into()));
            }
            return Ok(Profile::Polynomial(c));
        }
        if let Some(rest) = spec.strip_prefix("trig:") {
            let (a, b) = rest.split_once(';').unwrap_or((rest, ""));
            let cos = list(a)?;
            if cos.is_empty() {
                return Err(Error::Parse("empty trigonometric coefficient list".into()));
            }
            return Ok(Profile::Trigonometric { cos, sin: list(b)? });
        }
        Profile::by_name(spec).ok_or_else(|| Error::Parse(format!("unknown warping function '{spec}'")))
    }

    /// Default compact interval used when a configuration names a built-in
    /// profile without an explicit interval.
    pub fn default_interval(&self) -> (f64, f64) {
        use std::f64::consts::PI;
        match self {
            Profile::Product | Profile::Cosh => (-2.0, 2.0),
            Profile::Sphere => (0.1, PI - 0.1),
            Profile::Hyperbolic | Profile::Euclidean => (0.1, 3.0),
            Profile::Polynomial(_) | Profile::Trigonometric { .. } => (-1.0, 1.0),
        }
    }

    /// Returns `(h, h', h'')` at `t`.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Profile::Product => (1.0, 0.0, 0.0),
            Profile::Sphere => (t.sin(), t.cos(), -t.sin()),
            Profile::Hyperbolic => (t.sinh(), t.cosh(), t.sinh()),
            Profile::Euclidean => (t, 1.0, 0.0),
            Profile::Cosh => (t.cosh(), t.sinh(), t.cosh()),
            Profile::Polynomial(c) => {
                // Horner for the value and both derivatives at once.
                let (mut p, mut dp, mut d2p) = (0.0, 0.0, 0.0);
                for &a in c.iter().rev() {
                    d2p = d2p * t + 2.0 * dp;
                    dp = dp * t + p;
                    p = p * t + a;
                }
                (p, dp, d2p)
            }
            Profile::Trigonometric { cos, sin } => {
                let mut h = cos.first().copied().unwrap_or(0.0);
                let (mut dh, mut d2h) = (0.0, 0.0);
                let terms = cos.len().max(sin.len());
                for k in 1..terms {
                    let a = cos.get(k).copied().unwrap_or(0.0);
                    let b = sin.get(k).copied().unwrap_or(0.0);
                    let kf = k as f64;
                    let (s, c) = (kf * t).sin_cos();
                    h += a * c + b * s;
                    dh += kf * (-a * s + b * c);
                    d2h += -kf * kf * (a * c + b * s);
                }
                (h, dh, d2h)
            }
        }
    }
}

/// Status of the admissibility condition `h''/h + (1 − h'²)/h² > 0` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionStatus {
    Strict,
    /// `h h'' − h'² + 1 = 0` to round-off: the space-form case.
    Boundary,
    Violated,
}

/// A warping function together with its compact interval and the dimension
/// `n` of the sphere factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpingFunction {
    pub profile: Profile,
    pub interval: (f64, f64),
    pub dim: usize,
}

/// Curvature of the ambient metric at a point `(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientCurvature {
    /// `Ric(∂t, ∂t)`.
    pub ricci_tt: f64,
    /// `Ric(v, v)` for a unit `v` tangent to the sphere factor.
    pub ricci_tangential: f64,
    /// Scalar curvature `R`.
    pub scalar: f64,
}

/// Extrinsic data of the slice `{t} × Sⁿ` with unit normal `∂t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceData {
    pub sigma_sq: f64,
    pub mean_curv: f64,
    pub ricci_normal: f64,
}

const POSITIVITY_SAMPLES: usize = 1024;
const BOUNDARY_TOL: f64 = 1e-12;

impl WarpingFunction {
    pub fn new(profile: Profile, interval: (f64, f64), dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("sphere factor dimension must be at least 2 (got {dim})")));
        }
        let (a, b) = interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
        }
        let w = Self { profile, interval, dim };
        for i in 0..=POSITIVITY_SAMPLES {
            let t = a + (b - a) * i as f64 / POSITIVITY_SAMPLES as f64;
            let (h, _, _) = w.profile.jet(t);
            if !(h > 0.0) {
                return Err(Error::Domain(format!(
                    "warping function {} is not positive at t = {t} (h = {h})",
                    w.profile.name()
                )));
            }
        }
        Ok(w)
    }

    /// Built-in profile with its default interval.
    pub fn named(name: &str, dim: usize) -> Result<Self> {
        let profile =
            Profile::by_name(name).ok_or_else(|| Error::Domain(format!("unknown warping function '{name}'")))?;
        let interval = profile.default_interval();
        Self::new(profile, interval, dim)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.interval.0 && t <= self.interval.1
    }

    fn check(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !self.contains(t) {
            return Err(Error::Domain(format!(
                "t = {t} outside warping interval [{}, {}]",
                self.interval.0, self.interval.1
            )));
        }
        Ok(self.profile.jet(t))
    }

    /// `(h, h', h'')` at `t`.
    pub fn jet(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check(t)
    }

    /// `h''/h + (1 − h'²)/h²`.
    pub fn convexity_condition(&self, t: f64) -> Result<f64> {
        let (h, dh, d2h) = self.check(t)?;
        Ok(d2h / h + (1.0 - dh * dh) / (h * h))
    }

    /// `h h'' − h'² + 1`, which vanishes identically on space forms.
    pub fn space_form_defect(&self, t: f64) -> Result<f64> {
        let (h, dh, d2h) = self.check(t)?;
        Ok(h * d2h - dh * dh + 1.0)
    }

    pub fn condition_status(&self, t: f64) -> Result<ConditionStatus> {
        let (h, dh, d2h) = self.check(t)?;
        let defect = h * d2h - dh * dh + 1.0;
        let scale = (h * d2h).abs() + dh * dh + 1.0;
        Ok(if defect.abs() <= BOUNDARY_TOL * scale {
            ConditionStatus::Boundary
        } else if defect > 0.0 {
            ConditionStatus::Strict
        } else {
            ConditionStatus::Violated
        })
    }

    pub fn ambient_ricci(&self, t: f64) -> Result<AmbientCurvature> {
        let (h, dh, d2h) = self.check(t)?;
        let n = self.dim as f64;
        let a = d2h / h;
        let b = (1.0 - dh * dh) / (h * h);
        Ok(AmbientCurvature {
            ricci_tt: -n * a,
            ricci_tangential: -(a - (n - 1.0) * b),
            scalar: -n * (2.0 * a - (n - 1.0) * b),
        })
    }

    /// `Ric(v, v)` for a unit vector `v` with `⟨v, ∂t⟩ = cos_angle`.
    pub fn ricci_direction(&self, t: f64, cos_angle: f64) -> Result<f64> {
        if !(cos_angle.abs() <= 1.0) {
            return Err(Error::Domain(format!("|cos_angle| = {} exceeds 1", cos_angle.abs())));
        }
        let c = self.ambient_ricci(t)?;
        let c2 = cos_angle * cos_angle;
        Ok(c2 * c.ricci_tt + (1.0 - c2) * c.ricci_tangential)
    }

    pub fn slice_data(&self, t: f64) -> Result<SliceData> {
        let (h, dh, d2h) = self.check(t)?;
        let n = self.dim as f64;
        let k = dh / h;
        Ok(SliceData { sigma_sq: n * k * k, mean_curv: k, ricci_normal: -n * d2h / h })
    }

    /// Second eigenvalue of the slice Jacobi operator, `n · condition(t)`.
    pub fn slice_lambda2(&self, t: f64) -> Result<f64> {
        Ok(self.dim as f64 * self.convexity_condition(t)?)
    }

    /// Eigenvalue of the slice Jacobi operator on degree-`k` spherical
    /// harmonics: `k(k+n−1)/h² − n(h'/h)² + n h''/h`.
    pub fn slice_harmonic_eigenvalue(&self, t: f64, k: usize) -> Result<f64> {
        let (h, dh, d2h) = self.check(t)?;
        let n = self.dim as f64;
        let kf = k as f64;
        Ok(kf * (kf + n - 1.0) / (h * h) - n * (dh / h).powi(2) + n * d2h / h)
    }

    /// The `count` smallest slice eigenvalues, repeated by multiplicity.
    pub fn slice_spectrum(&self, t: f64, count: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(count);
        let mut k = 0;
        while out.len() < count {
            let lam = self.slice_harmonic_eigenvalue(t, k)?;
            let mult = harmonic_multiplicity(self.dim, k);
            out.extend(std::iter::repeat_n(lam, mult.min(count - out.len())));
            k += 1;
        }
        Ok(out)
    }
}

/// Dimension of the space of degree-`k` spherical harmonics on `Sⁿ`.
pub fn harmonic_multiplicity(n: usize, k: usize) -> usize {
    fn binom(a: usize, b: usize) -> usize {
        if b > a {
            return 0;
        }
        let b = b.min(a - b);
        (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
    }
    let top = binom(n + k, n);
    let low = if k >= 2 { binom(n + k - 2, n) } else { 0 };
    top - low
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_trig_jets_match_finite_differences() {
        let profiles = [
            Profile::Polynomial(vec![1.5, 0.2, -0.3, 0.05]),
            Profile::Trigonometric { cos: vec![2.0, 0.3, -0.1], sin: vec![0.0, 0.25, 0.05] },
            Profile::Cosh,
            Profile::Sphere,
        ];
        let eps = 1e-4;
        for p in &profiles {
            for &t in &[-0.7, 0.1, 0.9] {
                let (h, dh, d2h) = p.jet(t);
                let (hp, _, _) = p.jet(t + eps);
                let (hm, _, _) = p.jet(t - eps);
                assert!(((hp - hm) / (2.0 * eps) - dh).abs() < 1e-7, "{p:?}");
                assert!(((hp - 2.0 * h + hm) / (eps * eps) - d2h).abs() < 1e-5, "{p:?}");
            }
        }
    }

    #[test]
    fn profile_spec_roundtrip() {
        for p in [
            Profile::Cosh,
            Profile::Polynomial(vec![2.0, 0.5, -0.25]),
            Profile::Trigonometric { cos: vec![2.0, 0.1], sin: vec![0.0, 0.3] },
        ] {
            assert_eq!(Profile::from_spec(&p.to_spec()).unwrap(), p);
        }
        assert!(Profile::from_spec("polynomial:").is_err());
        assert!(Profile::from_spec("bogus").is_err());
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(WarpingFunction::new(Profile::Product, (0.0, 1.0), 1).is_err());
        assert!(WarpingFunction::new(Profile::Euclidean, (-1.0, 1.0), 2).is_err());
        assert!(WarpingFunction::new(Profile::Product, (1.0, 0.0), 2).is_err());
        assert!(WarpingFunction::named("schwarzschild", 2).is_err());
    }

    #[test]
    fn domain_errors_outside_interval() {
        let w = WarpingFunction::new(Profile::Product, (0.0, 1.0), 2).unwrap();
        assert!(matches!(w.convexity_condition(1.5), Err(Error::Domain(_))));
        assert!(matches!(w.ambient_ricci(-0.1), Err(Error::Domain(_))));
        assert!(matches!(w.ricci_direction(0.5, 1.01), Err(Error::Domain(_))));
    }

    #[test]
    fn condition_examples() {
        let product = WarpingFunction::named("product", 2).unwrap();
        assert_eq!(product.convexity_condition(0.3).unwrap(), 1.0);
        let sphere = WarpingFunction::named("sphere", 2).unwrap();
        assert!(sphere.convexity_condition(PI / 4.0).unwrap().abs() < 1e-15);
        assert_eq!(sphere.condition_status(PI / 4.0).unwrap(), ConditionStatus::Boundary);
        let cosh = WarpingFunction::named("cosh", 2).unwrap();
        assert_eq!(cosh.convexity_condition(0.0).unwrap(), 2.0);
        assert_eq!(cosh.condition_status(0.5).unwrap(), ConditionStatus::Strict);
    }

    #[test]
    fn slice_examples() {
        let product = WarpingFunction::named("product", 2).unwrap();
        let d = product.slice_data(0.0).unwrap();
        assert_eq!((d.sigma_sq, d.mean_curv, d.ricci_normal), (0.0, 0.0, 0.0));
        assert_eq!(product.slice_lambda2(0.7).unwrap(), 2.0);

        let sphere = WarpingFunction::named("sphere", 3).unwrap();
        assert!((sphere.slice_data(PI / 4.0).unwrap().sigma_sq - 3.0).abs() < 1e-14);
        assert!(sphere.slice_lambda2(1.1).unwrap().abs() < 1e-14);

        let cosh = WarpingFunction::named("cosh", 2).unwrap();
        let d = cosh.slice_data(0.0).unwrap();
        assert_eq!((d.sigma_sq, d.mean_curv, d.ricci_normal), (0.0, 0.0, -2.0));
        assert_eq!(cosh.slice_lambda2(0.0).unwrap(), 4.0);
    }

    #[test]
    fn slice_spectrum_multiplicities() {
        assert_eq!(harmonic_multiplicity(2, 0), 1);
        assert_eq!(harmonic_multiplicity(2, 1), 3);
        assert_eq!(harmonic_multiplicity(2, 2), 5);
        assert_eq!(harmonic_multiplicity(3, 2), 9);
        let product = WarpingFunction::named("product", 2).unwrap();
        assert_eq!(product.slice_spectrum(0.0, 4).unwrap(), vec![0.0, 2.0, 2.0, 2.0]);
        assert_eq!(product.slice_spectrum(0.0, 5).unwrap()[4], 6.0);
    }
}
