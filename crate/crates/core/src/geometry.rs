//! Anisotropic geometry: boxes, slabs, cylinders, the anisotropic metric,
//! the backward parabolic distance and the parabolic scaling map.
//!
//! The basic object is the open box whose half-width along axis `k` is
//! `r^{alpha_max/alpha_k}`. These boxes play the role of metric balls for
//! the direction-dependent scaling, and all space-time domains used by the
//! experiments are products of an open time interval with such a box.

use crate::{Error, Result};

/// The direction-dependent differentiability orders together with their
/// derived scaling quantities.
///
/// `beta` is the sum of inverse orders and `kappa = 1 + 1/beta` is the
/// gain exponent of one iteration step; both are bounded in terms of the
/// dimension and the admissibility floor `alpha0` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector {
    alphas: Vec<f64>,
    alpha0: f64,
    alpha_max: f64,
    beta: f64,
    kappa: f64,
}

impl ExponentVector {
    /// Builds an exponent vector, checking `alpha0 <= alpha_k < 2` and
    /// `alpha0 in (0,2)`.
    pub fn new(alphas: &[f64], alpha0: f64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::param("alphas", "must not be empty"));
        }
        if !(alpha0 > 0.0 && alpha0 < 2.0) {
            return Err(Error::param("alpha0", format!("{alpha0} not in (0,2)")));
        }
        for (k, &a) in alphas.iter().enumerate() {
            if !(a >= alpha0 && a < 2.0) {
                return Err(Error::param(
                    "alphas",
                    format!("alpha_{} = {a} not in [{alpha0}, 2)", k + 1),
                ));
            }
        }
        let alpha_max = alphas.iter().cloned().fold(f64::MIN, f64::max);
        let beta: f64 = alphas.iter().map(|a| 1.0 / a).sum();
        let d = alphas.len() as f64;
        debug_assert!(beta >= d / 2.0 - 1e-12 && beta <= d / alpha0 + 1e-12);
        Ok(ExponentVector {
            alphas: alphas.to_vec(),
            alpha0,
            alpha_max,
            beta,
            kappa: 1.0 + 1.0 / beta,
        })
    }

    /// Isotropic vector with all orders equal to `alpha`.
    pub fn isotropic(d: usize, alpha: f64) -> Result<Self> {
        Self::new(&vec![alpha; d], alpha)
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alpha(&self, axis: usize) -> f64 {
        self.alphas[axis]
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Half-width along `axis` of the box of radius `r`.
    pub fn half_width(&self, axis: usize, r: f64) -> f64 {
        r.powf(self.alpha_max / self.alphas[axis])
    }
}

/// Open anisotropic box: the ball of radius `r` for the scaling metric.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisoBox {
    center: Vec<f64>,
    radius: f64,
    exponents: ExponentVector,
}

/// Builds the box of radius `r` centered at `x0`.
pub fn aniso_box(x0: &[f64], r: f64, ev: &ExponentVector) -> Result<AnisoBox> {
    if x0.len() != ev.dim() {
        return Err(Error::param(
            "x0",
            format!("dimension {} != {}", x0.len(), ev.dim()),
        ));
    }
    if !(r > 0.0) {
        return Err(Error::param("r", format!("{r} must be positive")));
    }
    Ok(AnisoBox {
        center: x0.to_vec(),
        radius: r,
        exponents: ev.clone(),
    })
}

impl AnisoBox {
    /// Box of radius `r` centered at the origin.
    pub fn centered(r: f64, ev: &ExponentVector) -> Result<Self> {
        aniso_box(&vec![0.0; ev.dim()], r, ev)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn exponents(&self) -> &ExponentVector {
        &self.exponents
    }

    /// Half-width along `axis`.
    pub fn half_width(&self, axis: usize) -> f64 {
        self.exponents.half_width(axis, self.radius)
    }

    /// Open-interval side along `axis`.
    pub fn side(&self, axis: usize) -> (f64, f64) {
        let w = self.half_width(axis);
        (self.center[axis] - w, self.center[axis] + w)
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| 2.0 * self.half_width(k)).product()
    }

    /// Strict (open-set) membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        (0..self.dim()).all(|k| (x[k] - self.center[k]).abs() < self.half_width(k))
    }
}

/// One slab `E_r^k`: the set of points within the axis-`k` half-width of
/// the center. The intersection of the slabs over all axes is the box.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub axis: usize,
    pub center_coord: f64,
    pub half_width: f64,
}

/// Builds the slab along `axis` (zero-based) for radius `r` at `x0`.
pub fn slab(x0: &[f64], r: f64, axis: usize, ev: &ExponentVector) -> Result<Slab> {
    if axis >= ev.dim() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: ev.dim(),
        });
    }
    if !(r > 0.0) {
        return Err(Error::param("r", format!("{r} must be positive")));
    }
    Ok(Slab {
        axis,
        center_coord: x0[axis],
        half_width: ev.half_width(axis, r),
    })
}

impl Slab {
    /// Strict membership: `|x_k - c_k| < r^{alpha_max/alpha_k}`.
    pub fn contains(&self, x: &[f64]) -> bool {
        (x[self.axis] - self.center_coord).abs() < self.half_width
    }
}

/// The anisotropic metric `sup_k |x_k - y_k|^{alpha_k/alpha_max}`.
///
/// Boxes are its balls: `x` lies in the radius-`r` box around `y` exactly
/// when the metric is `< r`.
pub fn aniso_metric(x: &[f64], y: &[f64], ev: &ExponentVector) -> f64 {
    debug_assert_eq!(x.len(), ev.dim());
    debug_assert_eq!(y.len(), ev.dim());
    (0..ev.dim())
        .map(|k| (x[k] - y[k]).abs().powf(ev.alpha(k) / ev.alpha_max()))
        .fold(0.0, f64::max)
}

/// Backward parabolic distance of the space-time point `(t, x)` from the
/// origin: finite only for `t in (-2, 0]`, infinite otherwise.
pub fn parabolic_distance(t: f64, x: &[f64], ev: &ExponentVector) -> f64 {
    if !(t > -2.0 && t <= 0.0) {
        return f64::INFINITY;
    }
    let time_part = 0.5 * (-t).powf(1.0 / ev.alpha_max());
    let space_part = aniso_metric(x, &vec![0.0; ev.dim()], ev) / 3.0;
    time_part.max(space_part)
}

/// Tags for the standard space-time domains of the regularity estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CylinderTag {
    Generic,
    /// Forward unit-scale cylinder `(0, r^{alpha_max}) x M_r`.
    ForwardQ,
    /// Backward unit-scale cylinder `(-r^{alpha_max}, 0) x M_r`.
    BackwardQ,
    /// Late observation window of the Harnack inequality.
    HarnackLate,
    /// Early observation window of the Harnack inequality.
    HarnackEarly,
    /// Late window used by the oscillation-decay argument.
    OscLate,
    /// Early window used by the oscillation-decay argument.
    OscEarly,
    /// Shrinking backward neighborhood matched to the parabolic distance.
    OscHat,
    /// Backward domain `(-2 r^{alpha_max}, 0) x M_{2r}`.
    OscDomain,
}

/// Open time interval times an anisotropic box.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub time_interval: (f64, f64),
    pub space: AnisoBox,
    pub tag: CylinderTag,
}

impl Cylinder {
    pub fn new(time_interval: (f64, f64), space: AnisoBox, tag: CylinderTag) -> Self {
        Cylinder {
            time_interval,
            space,
            tag,
        }
    }

    /// Centered cylinder `(t0 - r^{alpha_max}, t0 + r^{alpha_max}) x M_r(x0)`.
    pub fn around(t0: f64, x0: &[f64], r: f64, ev: &ExponentVector) -> Result<Self> {
        let h = r.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (t0 - h, t0 + h),
            aniso_box(x0, r, ev)?,
            CylinderTag::Generic,
        ))
    }

    /// Forward cylinder `(0, r^{alpha_max}) x M_r`.
    pub fn forward(r: f64, ev: &ExponentVector) -> Result<Self> {
        let h = r.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (0.0, h),
            AnisoBox::centered(r, ev)?,
            CylinderTag::ForwardQ,
        ))
    }

    /// Backward cylinder `(-r^{alpha_max}, 0) x M_r`.
    pub fn backward(r: f64, ev: &ExponentVector) -> Result<Self> {
        let h = r.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (-h, 0.0),
            AnisoBox::centered(r, ev)?,
            CylinderTag::BackwardQ,
        ))
    }

    /// Late Harnack window `(1 - 2^{-alpha_max}, 1) x M_{1/2}`.
    pub fn harnack_late(ev: &ExponentVector) -> Result<Self> {
        let h = 0.5f64.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (1.0 - h, 1.0),
            AnisoBox::centered(0.5, ev)?,
            CylinderTag::HarnackLate,
        ))
    }

    /// Early Harnack window `(-1, -1 + 2^{-alpha_max}) x M_{1/2}`.
    pub fn harnack_early(ev: &ExponentVector) -> Result<Self> {
        let h = 0.5f64.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (-1.0, -1.0 + h),
            AnisoBox::centered(0.5, ev)?,
            CylinderTag::HarnackEarly,
        ))
    }

    /// Early oscillation window `(-2, -2 + 2^{-alpha_max}) x M_{1/2}`.
    pub fn osc_early(ev: &ExponentVector) -> Result<Self> {
        let h = 0.5f64.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (-2.0, -2.0 + h),
            AnisoBox::centered(0.5, ev)?,
            CylinderTag::OscEarly,
        ))
    }

    /// Late oscillation window `(-2^{-alpha_max}, 0) x M_{1/2}`.
    pub fn osc_late(ev: &ExponentVector) -> Result<Self> {
        let h = 0.5f64.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (-h, 0.0),
            AnisoBox::centered(0.5, ev)?,
            CylinderTag::OscLate,
        ))
    }

    /// Shrinking neighborhood `(t0 - 2 r^{alpha_max}, t0) x M_{3r}(x0)`.
    pub fn osc_hat(t0: f64, x0: &[f64], r: f64, ev: &ExponentVector) -> Result<Self> {
        let h = 2.0 * r.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (t0 - h, t0),
            aniso_box(x0, 3.0 * r, ev)?,
            CylinderTag::OscHat,
        ))
    }

    /// Backward domain `(-2 r^{alpha_max}, 0) x M_{2r}`.
    pub fn osc_domain(r: f64, ev: &ExponentVector) -> Result<Self> {
        let h = 2.0 * r.powf(ev.alpha_max());
        Ok(Cylinder::new(
            (-h, 0.0),
            AnisoBox::centered(2.0 * r, ev)?,
            CylinderTag::OscDomain,
        ))
    }

    pub fn contains(&self, t: f64, x: &[f64]) -> bool {
        t > self.time_interval.0 && t < self.time_interval.1 && self.space.contains(x)
    }

    /// Space-time volume.
    pub fn volume(&self) -> f64 {
        (self.time_interval.1 - self.time_interval.0) * self.space.volume()
    }
}

/// The full tagged set of standard cylinders at scale `r` (the windows with
/// fixed definitions ignore `r`).
pub fn standard_cylinders(ev: &ExponentVector, r: f64) -> Result<Vec<Cylinder>> {
    Ok(vec![
        Cylinder::forward(r, ev)?,
        Cylinder::backward(r, ev)?,
        Cylinder::harnack_late(ev)?,
        Cylinder::harnack_early(ev)?,
        Cylinder::osc_late(ev)?,
        Cylinder::osc_early(ev)?,
        Cylinder::osc_hat(0.0, &vec![0.0; ev.dim()], r, ev)?,
        Cylinder::osc_domain(r, ev)?,
    ])
}

/// Affine parabolic rescaling `(t, x) -> (r^{alpha_max} t + tau,
/// (r^{alpha_max/alpha_k} x_k + xi_k)_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingMap {
    pub tau: f64,
    pub xi: Vec<f64>,
    pub r: f64,
    pub exponents: ExponentVector,
}

impl ScalingMap {
    pub fn new(tau: f64, xi: &[f64], r: f64, ev: &ExponentVector) -> Result<Self> {
        if xi.len() != ev.dim() {
            return Err(Error::param(
                "xi",
                format!("dimension {} != {}", xi.len(), ev.dim()),
            ));
        }
        if !(r > 0.0) {
            return Err(Error::param("r", format!("{r} must be positive")));
        }
        Ok(ScalingMap {
            tau,
            xi: xi.to_vec(),
            r,
            exponents: ev.clone(),
        })
    }

    pub fn forward(&self, t: f64, x: &[f64]) -> (f64, Vec<f64>) {
        let ev = &self.exponents;
        let t_new = self.r.powf(ev.alpha_max()) * t + self.tau;
        let x_new = (0..ev.dim())
            .map(|k| self.r.powf(ev.alpha_max() / ev.alpha(k)) * x[k] + self.xi[k])
            .collect();
        (t_new, x_new)
    }

    pub fn inverse(&self, t: f64, x: &[f64]) -> (f64, Vec<f64>) {
        let ev = &self.exponents;
        let t_new = (t - self.tau) / self.r.powf(ev.alpha_max());
        let x_new = (0..ev.dim())
            .map(|k| (x[k] - self.xi[k]) / self.r.powf(ev.alpha_max() / ev.alpha(k)))
            .collect();
        (t_new, x_new)
    }
}
