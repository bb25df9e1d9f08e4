//! Kernel catalog: Helmholtz, modified-Helmholtz and convection-diffusion
//! distance functions, the dimension-dependent exponential notation and the
//! closed trigonometric/hyperbolic forms for n = 2..5.
//!
//! Regular and growing families are shapes normalized to 1 at the origin.
//! Singular and complex families are true Green's functions, so that the
//! flux through a small sphere tends to -1. [`paper_prefactor`] maps each
//! library value to the printed normalization.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::{self, BesselOrder, SpecfunError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel is singular at r = {0}")]
    Singular(f64),
    #[error("invalid kernel specification: {0}")]
    InvalidSpec(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Incoming,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModifiedBranch {
    Decaying,
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimExpMode {
    Decay,
    Growth,
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "mode")]
pub enum KernelFamily {
    HelmholtzRegular,
    HelmholtzRegularDeriv,
    HelmholtzSingular,
    HelmholtzCosine,
    HelmholtzOutgoing,
    HelmholtzIncoming,
    PsiComposite,
    ModifiedDecaying,
    ModifiedGrowing,
    ConvDiffFundamental,
    ConvDiffGeneral,
    ConvDiffRapid,
    DimExp(DimExpMode),
}

impl KernelFamily {
    pub fn is_singular(self) -> bool {
        matches!(
            self,
            KernelFamily::HelmholtzSingular
                | KernelFamily::HelmholtzOutgoing
                | KernelFamily::HelmholtzIncoming
                | KernelFamily::ModifiedDecaying
                | KernelFamily::ConvDiffFundamental
                | KernelFamily::DimExp(DimExpMode::Decay)
                | KernelFamily::DimExp(DimExpMode::Oscillatory)
        )
    }

    pub fn is_complex(self) -> bool {
        matches!(
            self,
            KernelFamily::HelmholtzOutgoing
                | KernelFamily::HelmholtzIncoming
                | KernelFamily::PsiComposite
                | KernelFamily::DimExp(DimExpMode::Oscillatory)
        )
    }

    pub fn is_anisotropic(self) -> bool {
        matches!(
            self,
            KernelFamily::ConvDiffFundamental | KernelFamily::ConvDiffGeneral | KernelFamily::ConvDiffRapid
        )
    }

    pub fn uses_convection(self) -> bool {
        self.is_anisotropic()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvectionParams {
    pub velocity: Vec<f64>,
    pub diffusivity: f64,
    #[serde(default)]
    pub reaction: f64,
}

impl ConvectionParams {
    pub fn new(velocity: Vec<f64>, diffusivity: f64, reaction: f64) -> Result<Self> {
        let p = ConvectionParams { velocity, diffusivity, reaction };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusivity > 0.0) || !self.diffusivity.is_finite() {
            return Err(KernelError::InvalidSpec("diffusivity must be positive".into()));
        }
        if !(self.reaction >= 0.0) || !self.reaction.is_finite() {
            return Err(KernelError::InvalidSpec("reaction must be non-negative".into()));
        }
        if self.velocity.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::InvalidSpec("velocity must be finite".into()));
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        self.velocity.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `rho = sqrt((|v|/2D)^2 + k/D)`.
    pub fn rho(&self) -> f64 {
        let a = self.speed() / (2.0 * self.diffusivity);
        (a * a + self.reaction / self.diffusivity).sqrt()
    }

    /// Exponent of the drift factor `exp(-v.d/2D)`.
    pub fn drift_exponent(&self, d: &[f64]) -> f64 {
        -dot(&self.velocity, d) / (2.0 * self.diffusivity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub dimension: usize,
    #[serde(default)]
    pub scale: f64,
    #[serde(default)]
    pub convection: Option<ConvectionParams>,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, dimension: usize, scale: f64) -> Result<Self> {
        let s = KernelSpec { family, dimension, scale, convection: None };
        s.validate()?;
        Ok(s)
    }

    pub fn convdiff(family: KernelFamily, dimension: usize, convection: ConvectionParams) -> Result<Self> {
        let s = KernelSpec { family, dimension, scale: convection.rho(), convection: Some(convection) };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.dimension) {
            return Err(KernelError::InvalidSpec(format!("dimension {} outside 1..=5", self.dimension)));
        }
        match (&self.convection, self.family.uses_convection()) {
            (Some(c), true) => {
                c.validate()?;
                if c.velocity.len() != self.dimension {
                    return Err(KernelError::InvalidSpec("velocity length must equal the dimension".into()));
                }
                if !(c.rho() > 0.0) {
                    return Err(KernelError::InvalidSpec("convection parameters give rho = 0".into()));
                }
            }
            (None, false) => {
                if !self.scale.is_finite() || self.scale < 0.0 {
                    return Err(KernelError::InvalidSpec("scale must be finite and >= 0".into()));
                }
                if self.scale == 0.0 && self.family != KernelFamily::HelmholtzRegular {
                    return Err(KernelError::InvalidSpec("scale 0 is only allowed for the regular Helmholtz kernel".into()));
                }
            }
            (None, true) => return Err(KernelError::InvalidSpec("convection parameters required".into())),
            (Some(_), false) => {
                return Err(KernelError::InvalidSpec("convection parameters given for an isotropic family".into()))
            }
        }
        Ok(())
    }

    /// Effective scale; for convection-diffusion families this is rho.
    pub fn effective_scale(&self) -> f64 {
        match &self.convection {
            Some(c) => c.rho(),
            None => self.scale,
        }
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        let mut s = self.clone();
        s.scale = scale;
        s
    }

    /// Kernel value at displacement `d = x - x_k`.
    pub fn eval(&self, d: &[f64]) -> Result<Complex64> {
        let r = norm(d);
        if let Some(c) = &self.convection {
            return convdiff_kernel(self.family, self.dimension, c, d).map(Complex64::from);
        }
        self.eval_radial(r)
    }

    /// Value of an isotropic kernel at distance r.
    pub fn eval_radial(&self, r: f64) -> Result<Complex64> {
        let n = self.dimension;
        let s = self.scale;
        let re = |v: Result<f64>| v.map(Complex64::from);
        match self.family {
            KernelFamily::HelmholtzRegular => re(helmholtz_regular(n, s, r)),
            KernelFamily::HelmholtzRegularDeriv => re(helmholtz_regular_deriv(n, s, r)),
            KernelFamily::HelmholtzSingular => re(helmholtz_singular(n, s, r)),
            KernelFamily::HelmholtzCosine => re(helmholtz_cosine(n, s, r)),
            KernelFamily::HelmholtzIncoming => helmholtz_complex(n, s, r, Orientation::Incoming),
            KernelFamily::HelmholtzOutgoing => helmholtz_complex(n, s, r, Orientation::Outgoing),
            KernelFamily::PsiComposite => psi_composite(n, s, r),
            KernelFamily::ModifiedDecaying => re(modified_helmholtz(n, s, r, ModifiedBranch::Decaying)),
            KernelFamily::ModifiedGrowing => re(modified_helmholtz(n, s, r, ModifiedBranch::Growing)),
            KernelFamily::DimExp(mode) => dimension_exp(n, s, r, mode),
            f => Err(KernelError::InvalidSpec(format!("{f:?} needs a displacement"))),
        }
    }

    /// Radial derivative of an isotropic kernel.
    pub fn radial_derivative(&self, r: f64) -> Result<Complex64> {
        let n = self.dimension;
        let s = self.scale;
        match self.family {
            KernelFamily::HelmholtzRegular => Ok(Complex64::from(s * regular_shape_prime(n, s * r))),
            KernelFamily::HelmholtzRegularDeriv => {
                // d/dz [-(z/n) Phi_{n+2}] = -(1/n) Phi_{n+2} + (z^2/(n(n+2))) Phi_{n+4}
                let z = s * r;
                let v = -regular_shape(n + 2, z) / n as f64
                    + z * z / ((n * (n + 2)) as f64) * regular_shape(n + 4, z);
                Ok(Complex64::from(s * v))
            }
            KernelFamily::HelmholtzSingular => Ok(Complex64::from(incoming_prime(n, s, r)?.re)),
            KernelFamily::HelmholtzCosine => Ok(Complex64::from(incoming_prime(n, s, r)?.im)),
            KernelFamily::HelmholtzIncoming | KernelFamily::DimExp(DimExpMode::Oscillatory) => incoming_prime(n, s, r),
            KernelFamily::HelmholtzOutgoing => Ok(incoming_prime(n, s, r)?.conj()),
            KernelFamily::PsiComposite => {
                let z = s * r;
                let d1 = KernelSpec { family: KernelFamily::HelmholtzRegularDeriv, ..self.clone() }.radial_derivative(r)?;
                Ok(d1 - Complex64::i() * s * regular_shape_prime(n, z))
            }
            KernelFamily::ModifiedDecaying | KernelFamily::DimExp(DimExpMode::Decay) => {
                Ok(Complex64::from(decaying_prime(n, s, r)?))
            }
            KernelFamily::ModifiedGrowing | KernelFamily::DimExp(DimExpMode::Growth) => {
                Ok(Complex64::from(s * growing_shape_prime(n, s * r)))
            }
            f => Err(KernelError::InvalidSpec(format!("{f:?} has no radial derivative"))),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(d: &[f64]) -> f64 {
    d.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn gamma_half_int(m: usize) -> f64 {
    // Gamma(m/2) for m = 1..=9
    let sp = PI.sqrt();
    match m {
        1 => sp,
        2 => 1.0,
        3 => 0.5 * sp,
        4 => 1.0,
        5 => 0.75 * sp,
        6 => 2.0,
        7 => 1.875 * sp,
        8 => 6.0,
        9 => 6.5625 * sp,
        _ => unreachable!("Gamma(m/2) only tabulated for small m"),
    }
}

/// `S_n(1) = 2 pi^{n/2} / Gamma(n/2)`.
pub fn unit_sphere_surface(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_int(n)
}

fn check_dim(n: usize) -> Result<()> {
    if (1..=5).contains(&n) {
        Ok(())
    } else {
        Err(KernelError::InvalidSpec(format!("dimension {n} outside 1..=5")))
    }
}

fn check_scale(s: f64, allow_zero: bool) -> Result<()> {
    if !s.is_finite() || s < 0.0 || (!allow_zero && s == 0.0) {
        Err(KernelError::InvalidSpec(format!("invalid scale {s}")))
    } else {
        Ok(())
    }
}

fn check_r(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        Err(KernelError::InvalidSpec(format!("invalid distance {r}")))
    } else {
        Ok(())
    }
}

/// `Phi_m(z) = Gamma(m/2) (z/2)^{1-m/2} J_{m/2-1}(z)` for m = 1..=9.
pub(crate) fn regular_shape(m: usize, z: f64) -> f64 {
    if z < 3.0 {
        let half = m as f64 / 2.0;
        let q = -0.25 * z * z;
        let mut t = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            let kf = k as f64;
            t *= q / (kf * (kf - 1.0 + half));
            sum += t;
            if t.abs() < 1e-18 {
                break;
            }
        }
        return sum;
    }
    let (s, c) = z.sin_cos();
    match m {
        1 => c,
        2 => specfun::j0(z),
        3 => s / z,
        4 => 2.0 * specfun::j1(z) / z,
        5 => 3.0 * (s / z - c) / (z * z),
        6 => 8.0 * (2.0 * specfun::j1(z) / z - specfun::j0(z)) / (z * z),
        7 => 15.0 * ((3.0 / (z * z) - 1.0) * s / z - 3.0 * c / (z * z)) / (z * z),
        8 => {
            let j2 = 2.0 * specfun::j1(z) / z - specfun::j0(z);
            let j3 = 4.0 * j2 / z - specfun::j1(z);
            48.0 * j3 / (z * z * z)
        }
        9 => {
            let j2 = (3.0 / (z * z) - 1.0) * s / z - 3.0 * c / (z * z);
            let j1 = s / (z * z) - c / z;
            let j3 = 5.0 * j2 / z - j1;
            105.0 * j3 / (z * z * z)
        }
        _ => unreachable!(),
    }
}

/// `Phi_m'(z) = -(z/m) Phi_{m+2}(z)`.
pub(crate) fn regular_shape_prime(m: usize, z: f64) -> f64 {
    -(z / m as f64) * regular_shape(m + 2, z)
}

/// Second derivative; needs `m + 4 <= 9`.
pub(crate) fn regular_shape_second(m: usize, z: f64) -> f64 {
    let mf = m as f64;
    -regular_shape(m + 2, z) / mf + z * z / (mf * (mf + 2.0)) * regular_shape(m + 4, z)
}

/// Growing shape: `e^z` for m = 1, `Gamma(m/2)(z/2)^{1-m/2} I_{m/2-1}(z)` otherwise,
/// returned as `exp(-z)` times the value.
pub(crate) fn growing_shape_scaled(m: usize, z: f64) -> f64 {
    if m == 1 {
        return 1.0;
    }
    if z < 8.0 {
        let half = m as f64 / 2.0;
        let q = 0.25 * z * z;
        let mut t = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            t *= q / (kf * (kf - 1.0 + half));
            sum += t;
            if t < 1e-18 * sum {
                break;
            }
        }
        return sum * (-z).exp();
    }
    let e2 = (-2.0 * z).exp();
    let sh = 0.5 * (1.0 - e2);
    let ch = 0.5 * (1.0 + e2);
    let i0 = specfun::i_scaled(BesselOrder::Zero, z);
    let i1 = specfun::i_scaled(BesselOrder::One, z);
    match m {
        2 => i0,
        3 => sh / z,
        4 => 2.0 * i1 / z,
        5 => 3.0 * (ch - sh / z) / (z * z),
        6 => 8.0 * (i0 - 2.0 * i1 / z) / (z * z),
        7 => 15.0 * ((3.0 / (z * z) + 1.0) * sh / z - 3.0 * ch / (z * z)) / (z * z),
        8 => {
            let i2 = i0 - 2.0 * i1 / z;
            let i3 = i1 - 4.0 * i2 / z;
            48.0 * i3 / (z * z * z)
        }
        9 => {
            let i1s = ch / z - sh / (z * z);
            let i2s = (3.0 / (z * z) + 1.0) * sh / z - 3.0 * ch / (z * z);
            let i3s = i1s - 5.0 * i2s / z;
            105.0 * i3s / (z * z * z)
        }
        _ => unreachable!(),
    }
}

pub(crate) fn growing_shape(m: usize, z: f64) -> f64 {
    if m == 1 {
        z.exp()
    } else {
        growing_shape_scaled(m, z) * z.exp()
    }
}

pub(crate) fn growing_shape_prime(m: usize, z: f64) -> f64 {
    if m == 1 {
        z.exp()
    } else {
        (z / m as f64) * growing_shape(m + 2, z)
    }
}

/// Normalized regular kernel `Phi_n(lambda r)`, equal to 1 at the origin.
pub fn helmholtz_regular(n: usize, lambda: f64, r: f64) -> Result<f64> {
    check_dim(n)?;
    check_scale(lambda, true)?;
    check_r(r)?;
    Ok(regular_shape(n, lambda * r))
}

/// Derivative of the normalized regular kernel with respect to its argument.
pub fn helmholtz_regular_deriv(n: usize, lambda: f64, r: f64) -> Result<f64> {
    check_dim(n)?;
    check_scale(lambda, false)?;
    check_r(r)?;
    Ok(regular_shape_prime(n, lambda * r))
}

/// Incoming Green's function `g_n = (i/4)(lambda/(2 pi r))^nu H^(1)_nu(lambda r)`.
fn incoming(n: usize, lambda: f64, r: f64) -> Complex64 {
    let z = lambda * r;
    let i = Complex64::i();
    let phase = Complex64::from_polar(1.0, z);
    match n {
        1 => i * phase / (2.0 * lambda),
        2 => i * 0.25 * Complex64::new(specfun::j0(z), specfun::y0(z)),
        3 => phase / (4.0 * PI * r),
        4 => i * 0.25 * lambda / (2.0 * PI * r) * Complex64::new(specfun::j1(z), specfun::y1(z)),
        5 => phase * Complex64::new(1.0, -z) / (8.0 * PI * PI * r * r * r),
        _ => unreachable!(),
    }
}

fn incoming_prime(n: usize, lambda: f64, r: f64) -> Result<Complex64> {
    check_dim(n)?;
    check_scale(lambda, false)?;
    if !(r > 0.0) {
        return Err(KernelError::Singular(r));
    }
    let z = lambda * r;
    let i = Complex64::i();
    let phase = Complex64::from_polar(1.0, z);
    Ok(match n {
        1 => -phase / 2.0,
        2 => -i * 0.25 * lambda * Complex64::new(specfun::j1(z), specfun::y1(z)),
        3 => phase * Complex64::new(-1.0, z) / (4.0 * PI * r * r),
        4 => {
            let (j0, j1, y0, y1) = (specfun::j0(z), specfun::j1(z), specfun::y0(z), specfun::y1(z));
            let h2 = Complex64::new(2.0 * j1 / z - j0, 2.0 * y1 / z - y0);
            -i * 0.25 * lambda / (2.0 * PI) * lambda / r * h2
        }
        5 => phase * Complex64::new(z * z - 3.0, 3.0 * z) / (8.0 * PI * PI * r.powi(4)),
        _ => unreachable!(),
    })
}

/// Singular real kernel, the real part of the incoming Green's function
/// (a second-kind Bessel profile for n >= 2).
pub fn helmholtz_singular(n: usize, lambda: f64, r: f64) -> Result<f64> {
    check_dim(n)?;
    check_scale(lambda, false)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(KernelError::Singular(r));
    }
    Ok(incoming(n, lambda, r).re)
}

/// Cosine-type kernel, the imaginary part of the incoming Green's function.
pub fn helmholtz_cosine(n: usize, lambda: f64, r: f64) -> Result<f64> {
    check_dim(n)?;
    check_scale(lambda, false)?;
    check_r(r)?;
    if r == 0.0 {
        // limit of Im g_n: (1/4)(lambda^2/(4 pi))^nu / Gamma(nu+1), and 1/(2 lambda) for n = 1
        return Ok(match n {
            1 => 1.0 / (2.0 * lambda),
            _ => {
                let nu = n as f64 / 2.0 - 1.0;
                0.25 * (lambda * lambda / (4.0 * PI)).powf(nu) / gamma_half_int(n)
            }
        });
    }
    Ok(incoming(n, lambda, r).im)
}

pub fn helmholtz_complex(n: usize, lambda: f64, r: f64, orientation: Orientation) -> Result<Complex64> {
    check_dim(n)?;
    check_scale(lambda, false)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(KernelError::Singular(r));
    }
    let g = incoming(n, lambda, r);
    Ok(match orientation {
        Orientation::Incoming => g,
        Orientation::Outgoing => g.conj(),
    })
}

/// `psi_n = Phi_n' - i Phi_n`.
pub fn psi_composite(n: usize, lambda: f64, r: f64) -> Result<Complex64> {
    let d = helmholtz_regular_deriv(n, lambda, r)?;
    let v = helmholtz_regular(n, lambda, r)?;
    Ok(Complex64::new(d, -v))
}

/// Decaying kernel as `(mantissa, exponent)` with value `mantissa * exp(exponent)`.
fn decaying_parts(n: usize, mu: f64, r: f64) -> (f64, f64) {
    let z = mu * r;
    match n {
        1 => (1.0 / (2.0 * mu), -z),
        2 => (specfun::k_scaled(BesselOrder::Zero, z) / (2.0 * PI), -z),
        3 => (1.0 / (4.0 * PI * r), -z),
        4 => (mu / r * specfun::k_scaled(BesselOrder::One, z) / (4.0 * PI * PI), -z),
        5 => ((1.0 + z) / (8.0 * PI * PI * r * r * r), -z),
        _ => unreachable!(),
    }
}

fn decaying_prime(n: usize, mu: f64, r: f64) -> Result<f64> {
    check_dim(n)?;
    check_scale(mu, false)?;
    if !(r > 0.0) {
        return Err(KernelError::Singular(r));
    }
    let z = mu * r;
    let e = (-z).exp();
    Ok(match n {
        1 => -0.5 * e,
        2 => -mu * specfun::k_scaled(BesselOrder::One, z) * e / (2.0 * PI),
        3 => -(1.0 + z) * e / (4.0 * PI * r * r),
        4 => {
            let k0 = specfun::k_scaled(BesselOrder::Zero, z);
            let k1 = specfun::k_scaled(BesselOrder::One, z);
            -(mu * mu / r) * (k0 + 2.0 * k1 / z) * e / (4.0 * PI * PI)
        }
        5 => -(z * z + 3.0 * z + 3.0) * e / (8.0 * PI * PI * r.powi(4)),
        _ => unreachable!(),
    })
}

/// Modified-Helmholtz kernels: the decaying Green's function `w_n` or the
/// growing shape normalized to 1 at the origin.
pub fn modified_helmholtz(n: usize, mu: f64, r: f64, branch: ModifiedBranch) -> Result<f64> {
    check_dim(n)?;
    check_scale(mu, false)?;
    check_r(r)?;
    match branch {
        ModifiedBranch::Decaying => {
            if r == 0.0 && n >= 2 {
                return Err(KernelError::Singular(r));
            }
            let (m, e) = decaying_parts(n, mu, r);
            Ok(m * e.exp())
        }
        ModifiedBranch::Growing => Ok(growing_shape(n, mu * r)),
    }
}

/// Convection-diffusion kernels `exp(-v.d/2D)` times a radial factor in rho.
pub fn convdiff_kernel(family: KernelFamily, n: usize, c: &ConvectionParams, d: &[f64]) -> Result<f64> {
    check_dim(n)?;
    c.validate()?;
    if d.len() != c.velocity.len() {
        return Err(KernelError::InvalidSpec("displacement and velocity lengths differ".into()));
    }
    let rho = c.rho();
    if !(rho > 0.0) {
        return Err(KernelError::InvalidSpec("rho must be positive".into()));
    }
    let r = norm(d);
    let drift = c.drift_exponent(d);
    let z = rho * r;
    match family {
        KernelFamily::ConvDiffFundamental => {
            if r == 0.0 {
                return Err(KernelError::Singular(r));
            }
            let (m, e) = decaying_parts(n, rho, r);
            Ok(m * (e + drift).exp())
        }
        KernelFamily::ConvDiffGeneral => {
            if n == 1 {
                Ok((drift + z).exp())
            } else {
                Ok(growing_shape_scaled(n, z) * (drift + z).exp())
            }
        }
        KernelFamily::ConvDiffRapid => {
            if n == 1 {
                Ok((drift - z).exp())
            } else {
                Ok(growing_shape_scaled(n, z) * (drift - z).exp())
            }
        }
        f => Err(KernelError::InvalidSpec(format!("{f:?} is not a convection-diffusion family"))),
    }
}

/// Dimension-dependent exponential: decay, growth and oscillatory modes
/// coincide with the decaying, growing and incoming families.
pub fn dimension_exp(n: usize, lambda: f64, x: f64, mode: DimExpMode) -> Result<Complex64> {
    match mode {
        DimExpMode::Decay => modified_helmholtz(n, lambda, x, ModifiedBranch::Decaying).map(Complex64::from),
        DimExpMode::Growth => modified_helmholtz(n, lambda, x, ModifiedBranch::Growing).map(Complex64::from),
        DimExpMode::Oscillatory => helmholtz_complex(n, lambda, x, Orientation::Incoming),
    }
}

/// `H^(1)_nu(z) = J_nu(z) + i Y_nu(z)`.
pub fn hankel_first(order: BesselOrder, z: f64) -> Result<Complex64> {
    Ok(Complex64::new(
        specfun::bessel_first_kind(order, z)?,
        specfun::bessel_second_kind(order, z)?,
    ))
}

/// `K_nu(w)` at complex argument for half orders, from the closed forms.
pub fn modified_bessel_second_complex(order: BesselOrder, w: Complex64) -> Result<Complex64> {
    let base = (Complex64::from(PI / 2.0) / w).sqrt() * (-w).exp();
    match order {
        BesselOrder::Half => Ok(base),
        BesselOrder::ThreeHalves => Ok(base * (1.0 + 1.0 / w)),
        o => Err(KernelError::Unsupported(format!("complex K of order {}", o.value()))),
    }
}

/// Hankel function rebuilt from K: `H^(1)_nu(z) = (2/(i pi)) exp(-i nu pi/2) K_nu(-i z)`.
pub fn hankel_first_via_k(order: BesselOrder, z: f64) -> Result<Complex64> {
    let k = modified_bessel_second_complex(order, Complex64::new(0.0, -z))?;
    let rot = Complex64::from_polar(1.0, -order.value() * PI / 2.0);
    Ok(Complex64::new(0.0, -2.0 / PI) * rot * k)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClosedFamily {
    Helmholtz { lambda: f64 },
    Modified { mu: f64 },
    ConvDiff(ConvectionParams),
}

/// Closed forms with two free constants for n = 2..5. `d` is the
/// displacement; only its length matters for the isotropic families.
pub fn closed_form(n: usize, family: &ClosedFamily, a1: f64, a2: f64, d: &[f64]) -> Result<f64> {
    if !(2..=5).contains(&n) {
        return Err(KernelError::InvalidSpec(format!("closed forms exist for n = 2..5, got {n}")));
    }
    let r = norm(d);
    if r == 0.0 && !(n == 2 && a2 == 0.0) {
        return Err(KernelError::Singular(r));
    }
    match family {
        ClosedFamily::Helmholtz { lambda } => {
            let z = lambda * r;
            let (s, c) = z.sin_cos();
            Ok(match n {
                2 => a1 * specfun::j0(z) + if a2 != 0.0 { a2 * specfun::y0(z) } else { 0.0 },
                3 => (a1 * c + a2 * s) / r,
                4 => (a1 * specfun::j1(z) + a2 * specfun::y1(z)) / r,
                _ => (a1 * (z * c - s) + a2 * (z * s + c)) / (r * r * r),
            })
        }
        ClosedFamily::Modified { mu } => {
            let z = mu * r;
            Ok(match n {
                2 => a1 * specfun::i0(z) + if a2 != 0.0 { a2 * specfun::k0(z) } else { 0.0 },
                3 => (a1 * z.sinh() + a2 * (-z).exp()) / r,
                4 => (a1 * specfun::i1(z) + a2 * specfun::k1(z)) / r,
                _ => (a1 * (z * z.cosh() - z.sinh()) + a2 * (z * (-z).exp() + (-z).exp())) / (r * r * r),
            })
        }
        ClosedFamily::ConvDiff(c) => {
            c.validate()?;
            if d.len() != c.velocity.len() {
                return Err(KernelError::InvalidSpec("displacement and velocity lengths differ".into()));
            }
            let z = c.rho() * r;
            let drift = c.drift_exponent(d).exp();
            let radial = match n {
                2 => a1 * specfun::i0(z) + if a2 != 0.0 { a2 * specfun::k0(z) } else { 0.0 },
                3 => (a1 * z.cosh() + a2 * z.sinh()) / r,
                4 => (a1 * specfun::i1(z) + a2 * specfun::k1(z)) / r,
                _ => (a1 * (z * z.cosh() - z.sinh()) + a2 * (z * (-z).exp() + (-z).exp())) / (r * r * r),
            };
            Ok(drift * radial)
        }
    }
}

/// Multiplier taking a library value to the printed normalization:
/// `printed = paper_prefactor(..) * library`.
pub fn paper_prefactor(family: KernelFamily, n: usize, scale: f64) -> Result<Complex64> {
    check_dim(n)?;
    check_scale(scale, false)?;
    let s32 = scale.powf(1.5);
    let nu = n as f64 / 2.0 - 1.0;
    let shape = |s: f64| -> f64 {
        // printed (s^{n-1/2}/(2 pi)) (2 pi s r)^{-nu} Bessel vs Gamma(n/2)(z/2)^{-nu} Bessel
        s.powf(n as f64 - 0.5) / (2.0 * PI) * (4.0 * PI).powf(-nu) / gamma_half_int(n)
    };
    let re = Complex64::from;
    Ok(match family {
        KernelFamily::HelmholtzRegular | KernelFamily::HelmholtzRegularDeriv | KernelFamily::PsiComposite => {
            if n == 1 {
                re(1.0 / (2.0 * scale.sqrt()))
            } else {
                re(scale.powf(n as f64 - 0.5) / 4.0 * (4.0 * PI).powf(-nu) / gamma_half_int(n))
            }
        }
        KernelFamily::HelmholtzIncoming => {
            if n == 1 {
                Complex64::new(0.0, -s32)
            } else {
                re(s32)
            }
        }
        KernelFamily::HelmholtzOutgoing => re(s32),
        KernelFamily::HelmholtzCosine => re(if n == 1 { s32 } else { 2.0 / PI * s32 }),
        KernelFamily::HelmholtzSingular => re(if n == 1 { -s32 / PI } else { -2.0 / PI * s32 }),
        KernelFamily::ModifiedDecaying | KernelFamily::ConvDiffFundamental => re(s32),
        KernelFamily::ModifiedGrowing | KernelFamily::ConvDiffGeneral | KernelFamily::ConvDiffRapid => {
            re(if n == 1 { scale.sqrt() / 2.0 } else { shape(scale) })
        }
        KernelFamily::DimExp(DimExpMode::Decay) => re(if n == 1 { s32 / PI } else { s32 }),
        KernelFamily::DimExp(DimExpMode::Growth) => {
            re(if n == 1 { scale.sqrt() / (2.0 * PI) } else { shape(scale) })
        }
        KernelFamily::DimExp(DimExpMode::Oscillatory) => {
            if n == 1 {
                Complex64::new(0.0, -s32 / PI)
            } else {
                re(s32)
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub limit: f64,
    pub residual: f64,
    pub is_fundamental: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Extrapolated limit of `r^{n-1} S_n(1) dk/dr` as r -> 0, using the real
/// part for complex kernels and the isotropic factor for convection kernels.
pub fn divergence_check(spec: &KernelSpec) -> Result<DivergenceReport> {
    spec.validate()?;
    let n = spec.dimension;
    let radial = match spec.family {
        KernelFamily::ConvDiffFundamental => KernelSpec {
            family: KernelFamily::ModifiedDecaying,
            dimension: n,
            scale: spec.effective_scale(),
            convection: None,
        },
        KernelFamily::ConvDiffGeneral | KernelFamily::ConvDiffRapid => KernelSpec {
            family: KernelFamily::ModifiedGrowing,
            dimension: n,
            scale: spec.effective_scale(),
            convection: None,
        },
        _ => spec.clone(),
    };
    if !spec.family.is_singular() {
        return Ok(DivergenceReport { limit: 0.0, residual: 1.0, is_fundamental: false, samples: Vec::new() });
    }
    let sn = unit_sphere_surface(n);
    let radii = [1e-2, 1e-3, 1e-4, 1e-5];
    let mut samples = Vec::with_capacity(radii.len());
    for &r in &radii {
        let d = radial.radial_derivative(r)?.re;
        samples.push((r, r.powi(n as i32 - 1) * sn * d));
    }
    // Richardson with ratio 10, leading correction O(r^2).
    let mut level: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let mut factor = 100.0;
    while level.len() > 1 {
        level = level.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 10.0;
    }
    let limit = level[0];
    Ok(DivergenceReport { limit, residual: (limit + 1.0).abs(), is_fundamental: true, samples })
}

/// `|r (dh/dr + i lambda h)|` for the outgoing kernel.
pub fn sommerfeld_residual(n: usize, lambda: f64, r: f64) -> Result<f64> {
    let h = helmholtz_complex(n, lambda, r, Orientation::Outgoing)?;
    let dh = incoming_prime(n, lambda, r)?.conj();
    Ok((r * (dh + Complex64::i() * lambda * h)).norm())
}
