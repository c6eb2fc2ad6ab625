//! Concrete jump-measure families and their admissibility diagnostics.
//!
//! Four families are provided: the axis-supported reference family, a
//! split-stable family on `R^3` (planar 2-d stable jumps plus independent
//! 1-d stable jumps), an axis-supported family with two exponents per axis,
//! and an absolutely continuous kernel supported on a region pinched along
//! the coordinate axes ("cusp" kernel). Singular families are represented
//! structurally; every integral against them reduces to one-dimensional
//! integrals with known power-law tails.

use crate::geometry::ExponentVector;
use crate::quad;
use crate::{Error, Result};

/// Bounded symmetric coefficient `a(t, x, y)` with values in `[1/2, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientField {
    /// `a = 1` (default).
    One,
    /// A constant in `[1/2, 1]`.
    Constant(f64),
    /// `a(t, x, y) = 3/4 + cos(t)/4`, the stock time-dependent choice.
    TimeCosine,
}

impl CoefficientField {
    pub fn constant(c: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&c) {
            return Err(Error::param("coefficient", format!("{c} not in [1/2,1]")));
        }
        Ok(CoefficientField::Constant(c))
    }

    pub fn eval(&self, t: f64, _x: &[f64], _y: &[f64]) -> f64 {
        match self {
            CoefficientField::One => 1.0,
            CoefficientField::Constant(c) => *c,
            CoefficientField::TimeCosine => 0.75 + 0.25 * t.cos(),
        }
    }

    /// Upper bound of the range, used by truncation estimates.
    pub fn upper_bound(&self) -> f64 {
        match self {
            CoefficientField::One => 1.0,
            CoefficientField::Constant(c) => *c,
            CoefficientField::TimeCosine => 1.0,
        }
    }
}

/// Derived parameters of the cusp kernel for a pair of exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspParams {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Order of the radial singularity.
    pub gamma: f64,
    /// Pinching exponents of the admissible region along the two axes.
    pub b1: f64,
    pub b2: f64,
    /// Normalization constant, equal to `2 - alpha_max`.
    pub normalization: f64,
}

/// Computes the cusp-kernel parameters for exponents in `[alpha0, 2)`.
pub fn cusp_params(alpha1: f64, alpha2: f64, alpha0: f64) -> Result<CuspParams> {
    for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
        if !(a >= alpha0 && a < 2.0) {
            return Err(Error::param(name, format!("{a} not in [{alpha0}, 2)")));
        }
    }
    let gamma = ((alpha1 - alpha2).abs() + alpha1 * alpha2) / alpha1.min(alpha2);
    let b1 = 1.0 / (1.0 + gamma - alpha1);
    let b2 = 1.0 / (1.0 + gamma - alpha2);
    let normalization = 1.0 - gamma + 1.0 / b1.max(b2);
    let p = CuspParams {
        alpha1,
        alpha2,
        gamma,
        b1,
        b2,
        normalization,
    };
    debug_assert!(p.b1 > 0.0 && p.b1 <= 1.0 + 1e-12);
    debug_assert!(p.b2 > 0.0 && p.b2 <= 1.0 + 1e-12);
    Ok(p)
}

/// Membership in the admissible region of the cusp kernel.
pub fn in_gamma(z: &[f64; 2], params: &CuspParams) -> bool {
    let z1 = z[0].abs();
    let z2 = z[1].abs();
    z2 <= z1.powf(1.0 / params.b1) || z1 <= z2.powf(1.0 / params.b2)
}

/// Pointwise value of the cusp kernel; rejects the singular point `z = 0`.
pub fn cusp_kernel(z: &[f64; 2], params: &CuspParams) -> Result<f64> {
    if z[0] == 0.0 && z[1] == 0.0 {
        return Err(Error::SingularPoint);
    }
    if !in_gamma(z, params) {
        return Ok(0.0);
    }
    let norm_sq = z[0] * z[0] + z[1] * z[1];
    Ok(params.normalization * norm_sq.powf(-(2.0 + params.gamma) / 2.0))
}

/// The measure family, without the coefficient modulation.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureFamily {
    /// Reference family: per-axis densities `(2-alpha_k)|h|^{-1-alpha_k}`.
    Axes,
    /// On `R^3`: isotropic 2-d stable jumps in the first two coordinates
    /// plus independent 1-d stable jumps in the third.
    ProductStable { alpha: f64, beta: f64 },
    /// Per-axis densities with two exponents, `beta_k <= alpha_k`.
    DoubleExponent { betas: Vec<f64> },
    /// Absolutely continuous kernel on the pinched region in `R^2`.
    Cusp(CuspParams),
}

/// A jump-measure family together with its exponent vector and bounded
/// coefficient field.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpMeasure {
    family: MeasureFamily,
    exponents: ExponentVector,
    coefficient: CoefficientField,
}

impl JumpMeasure {
    pub fn axes(ev: &ExponentVector) -> Self {
        JumpMeasure {
            family: MeasureFamily::Axes,
            exponents: ev.clone(),
            coefficient: CoefficientField::One,
        }
    }

    /// Split-stable family on `R^3`; the exponent vector is `(alpha, alpha, beta)`.
    pub fn product_stable(alpha: f64, beta: f64, alpha0: f64) -> Result<Self> {
        let ev = ExponentVector::new(&[alpha, alpha, beta], alpha0)?;
        Ok(JumpMeasure {
            family: MeasureFamily::ProductStable { alpha, beta },
            exponents: ev,
            coefficient: CoefficientField::One,
        })
    }

    /// Per-axis double-exponent family; requires `beta_k <= alpha_k`.
    pub fn double_exponent(alphas: &[f64], betas: &[f64], alpha0: f64) -> Result<Self> {
        if alphas.len() != betas.len() {
            return Err(Error::param("betas", "length mismatch with alphas"));
        }
        for (k, (&a, &b)) in alphas.iter().zip(betas).enumerate() {
            if !(b >= alpha0 && b < 2.0) {
                return Err(Error::param(
                    "betas",
                    format!("beta_{} = {b} not in [{alpha0}, 2)", k + 1),
                ));
            }
            if b > a {
                return Err(Error::param(
                    "betas",
                    format!("beta_{} = {b} exceeds alpha_{} = {a}", k + 1, k + 1),
                ));
            }
        }
        let ev = ExponentVector::new(alphas, alpha0)?;
        Ok(JumpMeasure {
            family: MeasureFamily::DoubleExponent {
                betas: betas.to_vec(),
            },
            exponents: ev,
            coefficient: CoefficientField::One,
        })
    }

    /// Cusp family on `R^2` for the given exponent pair.
    pub fn cusp(alpha1: f64, alpha2: f64, alpha0: f64) -> Result<Self> {
        let params = cusp_params(alpha1, alpha2, alpha0)?;
        let ev = ExponentVector::new(&[alpha1, alpha2], alpha0)?;
        Ok(JumpMeasure {
            family: MeasureFamily::Cusp(params),
            exponents: ev,
            coefficient: CoefficientField::One,
        })
    }

    pub fn with_coefficient(mut self, coefficient: CoefficientField) -> Self {
        self.coefficient = coefficient;
        self
    }

    pub fn family(&self) -> &MeasureFamily {
        &self.family
    }

    pub fn exponents(&self) -> &ExponentVector {
        &self.exponents
    }

    pub fn coefficient(&self) -> &CoefficientField {
        &self.coefficient
    }

    pub fn dim(&self) -> usize {
        self.exponents.dim()
    }

    /// True if the measure is supported on axis lines only.
    pub fn is_axis_supported(&self) -> bool {
        matches!(
            self.family,
            MeasureFamily::Axes | MeasureFamily::DoubleExponent { .. }
        )
    }
}

/// Structured density value of a (partially) singular measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue {
    /// Absolutely continuous kernel value.
    Full(f64),
    /// One-dimensional density along the axis line through `x`.
    Axis { axis: usize, value: f64 },
    /// Two-dimensional density on the plane of the first two axes.
    Plane(f64),
    /// The pair carries no mass.
    Zero,
}

impl DensityValue {
    pub fn scalar(&self) -> f64 {
        match self {
            DensityValue::Full(v) | DensityValue::Plane(v) => *v,
            DensityValue::Axis { value, .. } => *value,
            DensityValue::Zero => 0.0,
        }
    }
}

/// Evaluates the density of `mu_t(x, dy)` at `(t, x, y)`, `x != y`.
pub fn eval_density(mu: &JumpMeasure, t: f64, x: &[f64], y: &[f64]) -> Result<DensityValue> {
    if x == y {
        return Err(Error::SingularPoint);
    }
    let a = mu.coefficient().eval(t, x, y);
    let ev = mu.exponents();
    let diff_axes: Vec<usize> = (0..x.len()).filter(|&k| x[k] != y[k]).collect();
    match mu.family() {
        MeasureFamily::Axes => {
            if diff_axes.len() != 1 {
                return Ok(DensityValue::Zero);
            }
            let k = diff_axes[0];
            let h = (x[k] - y[k]).abs();
            let alpha = ev.alpha(k);
            Ok(DensityValue::Axis {
                axis: k,
                value: a * (2.0 - alpha) * h.powf(-1.0 - alpha),
            })
        }
        MeasureFamily::DoubleExponent { betas } => {
            if diff_axes.len() != 1 {
                return Ok(DensityValue::Zero);
            }
            let k = diff_axes[0];
            let h = (x[k] - y[k]).abs();
            let alpha = ev.alpha(k);
            let beta = betas[k];
            let value =
                a * ((2.0 - alpha) * h.powf(-1.0 - alpha) + (2.0 - beta) * h.powf(-1.0 - beta));
            Ok(DensityValue::Axis { axis: k, value })
        }
        MeasureFamily::ProductStable { alpha, beta } => {
            if x[2] == y[2] {
                let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                Ok(DensityValue::Plane(
                    a * (2.0 - alpha) * r2.powf(-(2.0 + alpha) / 2.0),
                ))
            } else if diff_axes == [2] {
                let h = (x[2] - y[2]).abs();
                Ok(DensityValue::Axis {
                    axis: 2,
                    value: a * (2.0 - beta) * h.powf(-1.0 - beta),
                })
            } else {
                Ok(DensityValue::Zero)
            }
        }
        MeasureFamily::Cusp(params) => {
            let z = [x[0] - y[0], x[1] - y[1]];
            Ok(DensityValue::Full(a * cusp_kernel(&z, params)?))
        }
    }
}

/// Exact complement mass of the radius-`rho` box for the reference family:
/// `2 sum_k (2-alpha_k)/alpha_k * rho^{-alpha_max}`.
pub fn axes_tail_exact(ev: &ExponentVector, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::param("rho", format!("{rho} must be positive")));
    }
    let s: f64 = ev.alphas().iter().map(|&a| (2.0 - a) / a).sum();
    Ok(2.0 * s * rho.powf(-ev.alpha_max()))
}

/// Which complement region a tail mass refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRegion {
    /// Complement of the slab along the given axis.
    SlabComplement(usize),
    /// Complement of the full box.
    BoxComplement,
}

/// A numerically computed tail mass with its accumulated error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMass {
    pub value: f64,
    pub error: f64,
}

const TAIL_TOL: f64 = 1e-10;
const TAIL_REMAINDER_REL: f64 = 1e-9;

/// Quadrature of `coeff * integral of h^{-1-alpha}` over `[w, infinity)`,
/// truncated where the analytic remainder drops below `1e-9` of the mass.
fn power_tail_quad(w: f64, alpha: f64, coeff: f64) -> TailMass {
    debug_assert!(w > 0.0);
    // (w/R)^alpha <= eps  <=>  R >= w * eps^{-1/alpha}
    let r_cut = w * TAIL_REMAINDER_REL.powf(-1.0 / alpha);
    // Octave splitting keeps the adaptive recursion shallow over the many
    // decades between w and the cut radius.
    let mut octaves = Vec::new();
    let mut p = w;
    while p < r_cut {
        octaves.push(p);
        p *= 2.0;
    }
    let q = quad::integrate_split(
        |h| h.powf(-1.0 - alpha),
        w,
        r_cut,
        &octaves,
        TAIL_TOL * w.powf(-alpha) / alpha,
    );
    let remainder = r_cut.powf(-alpha) / alpha;
    TailMass {
        value: coeff * q.value,
        error: coeff * (q.error + remainder),
    }
}

/// Integral of `cos^g` over `[lo, hi]`, for the polar reduction of planar
/// power kernels.
fn cos_power_integral(g: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    quad::integrate(|t| t.cos().powf(g), lo, hi, 1e-12).value
}

/// Tail mass `mu(x0, complement)` computed numerically. The coefficient
/// field is not applied (tail behavior concerns the base measure); the
/// reported error adds quadrature estimates and truncation remainders.
pub fn tail_mass(mu: &JumpMeasure, _x0: &[f64], rho: f64, region: TailRegion) -> Result<TailMass> {
    if !(rho > 0.0) {
        return Err(Error::param("rho", format!("{rho} must be positive")));
    }
    let ev = mu.exponents();
    let d = ev.dim();
    if let TailRegion::SlabComplement(k) = region {
        if k >= d {
            return Err(Error::AxisOutOfRange { axis: k, dim: d });
        }
    }
    let width = |k: usize| ev.half_width(k, rho);
    match mu.family() {
        MeasureFamily::Axes => {
            let axis_mass = |k: usize| -> TailMass {
                let alpha = ev.alpha(k);
                power_tail_quad(width(k), alpha, 2.0 * (2.0 - alpha))
            };
            Ok(sum_over_region(region, d, axis_mass))
        }
        MeasureFamily::DoubleExponent { betas } => {
            let axis_mass = |k: usize| -> TailMass {
                let alpha = ev.alpha(k);
                let beta = betas[k];
                let a = power_tail_quad(width(k), alpha, 2.0 * (2.0 - alpha));
                let b = power_tail_quad(width(k), beta, 2.0 * (2.0 - beta));
                TailMass {
                    value: a.value + b.value,
                    error: a.error + b.error,
                }
            };
            Ok(sum_over_region(region, d, axis_mass))
        }
        MeasureFamily::ProductStable { alpha, beta } => {
            product_stable_tail(*alpha, *beta, ev, rho, region)
        }
        MeasureFamily::Cusp(params) => cusp_tail(params, ev, rho, region),
    }
}

fn sum_over_region(
    region: TailRegion,
    d: usize,
    axis_mass: impl Fn(usize) -> TailMass,
) -> TailMass {
    match region {
        TailRegion::SlabComplement(k) => axis_mass(k),
        TailRegion::BoxComplement => {
            let mut total = TailMass {
                value: 0.0,
                error: 0.0,
            };
            for k in 0..d {
                let m = axis_mass(k);
                total.value += m.value;
                total.error += m.error;
            }
            total
        }
    }
}

/// Tail masses of the split-stable family via polar reduction of the
/// planar part and the 1-d power tail of the axis part.
fn product_stable_tail(
    alpha: f64,
    beta: f64,
    ev: &ExponentVector,
    rho: f64,
    region: TailRegion,
) -> Result<TailMass> {
    let w_plane = ev.half_width(0, rho);
    let w_axis = ev.half_width(2, rho);
    let i_full = cos_power_integral(alpha, 0.0, std::f64::consts::FRAC_PI_2);
    let half_plane =
        |w: f64| -> TailMass { power_tail_quad(w, alpha, 4.0 * (2.0 - alpha) * i_full) };
    let axis_part = || -> TailMass { power_tail_quad(w_axis, beta, 2.0 * (2.0 - beta)) };
    match region {
        TailRegion::SlabComplement(0) | TailRegion::SlabComplement(1) => Ok(half_plane(w_plane)),
        TailRegion::SlabComplement(_) => Ok(axis_part()),
        TailRegion::BoxComplement => {
            // {|h1| >= w} plus {|h1| < w, |h2| >= w} plus the singular axis.
            let a = half_plane(w_plane);
            let strip = quad::integrate(
                |h1: f64| {
                    let theta = (w_plane / h1.max(1e-300)).atan();
                    h1.powf(-1.0 - alpha)
                        * cos_power_integral(alpha, theta, std::f64::consts::FRAC_PI_2)
                },
                1e-12,
                w_plane,
                1e-10,
            );
            // Head below the tiny positive offset, bounded crudely by the
            // full angular integral there.
            let head_bound = 1e-12 * 4.0 * (2.0 - alpha) * i_full * w_plane.powf(-1.0 - alpha);
            let b_val = 4.0 * (2.0 - alpha) * strip.value;
            let c = axis_part();
            Ok(TailMass {
                value: a.value + b_val + c.value,
                error: a.error + 4.0 * (2.0 - alpha) * strip.error + head_bound + c.error,
            })
        }
    }
}

/// Angular section of the admissible cusp region at abscissa `h > 0`:
/// ordinates in `[0, near_cap]` or `[far_start, inf)`; `near_cap` infinite
/// means the full half-line.
fn cusp_section(h: f64, inv_b: f64, b_other: f64) -> (f64, f64) {
    if h >= 1.0 {
        (f64::INFINITY, 0.0)
    } else {
        (h.powf(inv_b), h.powf(b_other))
    }
}

fn cusp_tail(
    params: &CuspParams,
    ev: &ExponentVector,
    rho: f64,
    region: TailRegion,
) -> Result<TailMass> {
    let gamma = params.gamma;
    let c = params.normalization;
    let i_full = cos_power_integral(gamma, 0.0, std::f64::consts::FRAC_PI_2);
    // Inner integral over the section at fixed abscissa h, restricted to
    // ordinates above h2_min, reduced to angular integrals of cos^gamma.
    let section_integral = |h: f64, inv_b: f64, b_other: f64, h2_min: f64| -> f64 {
        let (near_cap, far_start) = cusp_section(h, inv_b, b_other);
        let mut total = 0.0;
        if near_cap.is_infinite() {
            let lo = (h2_min / h).atan();
            total += cos_power_integral(gamma, lo, std::f64::consts::FRAC_PI_2);
        } else {
            if near_cap > h2_min {
                let lo = (h2_min / h).atan();
                let hi = (near_cap / h).atan();
                total += cos_power_integral(gamma, lo, hi);
            }
            let start = far_start.max(h2_min);
            let lo = (start / h).atan();
            total += cos_power_integral(gamma, lo, std::f64::consts::FRAC_PI_2);
        }
        h.powf(-1.0 - gamma) * total
    };
    let slab_mass = |k: usize| -> TailMass {
        let w = ev.half_width(k, rho);
        let (inv_b, b_other) = if k == 0 {
            (1.0 / params.b1, params.b2)
        } else {
            (1.0 / params.b2, params.b1)
        };
        let r_cut = w.max(1.0) * TAIL_REMAINDER_REL.powf(-1.0 / gamma);
        let mut octaves = Vec::new();
        let mut p = w;
        while p < r_cut {
            octaves.push(p);
            p *= 2.0;
        }
        octaves.push(1.0);
        let q = quad::integrate_split(
            |h| section_integral(h, inv_b, b_other, 0.0),
            w,
            r_cut,
            &octaves,
            TAIL_TOL,
        );
        // Beyond the cut radius the section is full, so the remainder is the
        // exact full-angle power tail.
        let remainder = i_full * r_cut.powf(-gamma) / gamma;
        TailMass {
            value: 4.0 * c * q.value,
            error: 4.0 * c * (q.error + remainder),
        }
    };
    match region {
        TailRegion::SlabComplement(k) => Ok(slab_mass(k)),
        TailRegion::BoxComplement => {
            // {|h1| >= w1} plus {|h1| < w1, |h2| >= w2}.
            let a = slab_mass(0);
            let w1 = ev.half_width(0, rho);
            let w2 = ev.half_width(1, rho);
            let strip = quad::integrate_split(
                |h| section_integral(h, 1.0 / params.b1, params.b2, w2),
                1e-12,
                w1,
                &[w1.min(1.0)],
                TAIL_TOL,
            );
            let head_bound = 1e-12 * w2.powf(-2.0 - gamma) * 2.0;
            Ok(TailMass {
                value: a.value + 4.0 * c * strip.value,
                error: a.error + 4.0 * c * strip.error + head_bound,
            })
        }
    }
}

/// Result of the higher-moment admissibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    /// Whether the measured supremum is at most `lambda`.
    pub holds: bool,
    /// Measured supremum over the sample grid of centers.
    pub supremum: f64,
    /// Accumulated quadrature/truncation error bound at the maximizing center.
    pub error: f64,
    /// Set when the integral diverges for the requested moment.
    pub divergent: bool,
    pub lambda: f64,
}

/// Smallest power-law decay rate of the measure at infinity.
fn min_tail_index(mu: &JumpMeasure) -> f64 {
    match mu.family() {
        MeasureFamily::Axes => mu
            .exponents()
            .alphas()
            .iter()
            .cloned()
            .fold(f64::MAX, f64::min),
        MeasureFamily::DoubleExponent { betas } => betas.iter().cloned().fold(f64::MAX, f64::min),
        MeasureFamily::ProductStable { alpha, beta } => alpha.min(*beta),
        MeasureFamily::Cusp(p) => p.gamma,
    }
}

/// Checks the moment bound: the supremum over centers `x` in the radius-2
/// box of the integral of `|y|^{1/lambda}` against `mu(x, dy)` outside the
/// radius-3 box, compared with `lambda`.
pub fn moment_condition(mu: &JumpMeasure, lambda: f64) -> Result<MomentReport> {
    if !(lambda >= 1.0) {
        return Err(Error::param("lambda", format!("{lambda} must be >= 1")));
    }
    let moment = 1.0 / lambda;
    if moment >= min_tail_index(mu) {
        return Ok(MomentReport {
            holds: false,
            supremum: f64::INFINITY,
            error: 0.0,
            divergent: true,
            lambda,
        });
    }
    let ev = mu.exponents();
    let d = ev.dim();
    // Deterministic grid of centers in the radius-2 box (5 points per axis).
    let mut centers: Vec<Vec<f64>> = vec![vec![]];
    for k in 0..d {
        let w = ev.half_width(k, 2.0) * 0.999;
        let mut next = Vec::new();
        for c in &centers {
            for i in 0..5 {
                let coord = -w + 2.0 * w * (i as f64) / 4.0;
                let mut v = c.clone();
                v.push(coord);
                next.push(v);
            }
        }
        centers = next;
    }
    let mut supremum = f64::MIN;
    let mut err_at_max = 0.0;
    for x in &centers {
        let (v, e) = moment_integral_at(mu, x, moment)?;
        if v > supremum {
            supremum = v;
            err_at_max = e;
        }
    }
    Ok(MomentReport {
        holds: supremum <= lambda,
        supremum,
        error: err_at_max,
        divergent: false,
        lambda,
    })
}

/// The integral of `|y|^m mu(x, dy)` over the complement of the radius-3 box.
fn moment_integral_at(mu: &JumpMeasure, x: &[f64], m: f64) -> Result<(f64, f64)> {
    let ev = mu.exponents();
    match mu.family() {
        MeasureFamily::Axes => Ok(axis_moment_sum(ev, x, m, |k, h| {
            (2.0 - ev.alpha(k)) * h.powf(-1.0 - ev.alpha(k))
        })),
        MeasureFamily::DoubleExponent { betas } => Ok(axis_moment_sum(ev, x, m, |k, h| {
            (2.0 - ev.alpha(k)) * h.powf(-1.0 - ev.alpha(k))
                + (2.0 - betas[k]) * h.powf(-1.0 - betas[k])
        })),
        MeasureFamily::ProductStable { alpha, beta } => {
            let w1 = ev.half_width(0, 3.0);
            let w2 = ev.half_width(1, 3.0);
            let w3 = ev.half_width(2, 3.0);
            let x3sq = x[2] * x[2];
            let planar_kernel = |h: &[f64; 2]| -> f64 {
                let r2 = h[0] * h[0] + h[1] * h[1];
                (2.0 - alpha) * r2.powf(-(2.0 + alpha) / 2.0)
            };
            let weight = |h: &[f64; 2]| -> f64 {
                ((x[0] + h[0]).powi(2) + (x[1] + h[1]).powi(2) + x3sq)
                    .sqrt()
                    .powf(m)
            };
            let (pv, pe) = planar_moment(
                &[x[0], x[1]],
                &[w1, w2],
                *alpha,
                m,
                &planar_kernel,
                &weight,
                &|_| true,
            );
            let base = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let (av, ae) = line_moment(x[2], w3, m, base, *beta, |h| {
                (2.0 - beta) * h.powf(-1.0 - beta)
            });
            Ok((pv + av, pe + ae))
        }
        MeasureFamily::Cusp(params) => {
            let w1 = ev.half_width(0, 3.0);
            let w2 = ev.half_width(1, 3.0);
            let kernel = |h: &[f64; 2]| -> f64 {
                params.normalization
                    * (h[0] * h[0] + h[1] * h[1]).powf(-(2.0 + params.gamma) / 2.0)
            };
            let weight = |h: &[f64; 2]| -> f64 {
                ((x[0] + h[0]).powi(2) + (x[1] + h[1]).powi(2)).sqrt().powf(m)
            };
            let member = |h: &[f64; 2]| in_gamma(h, params);
            let (v, e) = planar_moment(
                &[x[0], x[1]],
                &[w1, w2],
                params.gamma,
                m,
                &kernel,
                &weight,
                &member,
            );
            Ok((v, e))
        }
    }
}

/// Sum over axes of 1-d moment integrals for axis-supported families.
fn axis_moment_sum(
    ev: &ExponentVector,
    x: &[f64],
    m: f64,
    density: impl Fn(usize, f64) -> f64,
) -> (f64, f64) {
    let d = ev.dim();
    let mut total = 0.0;
    let mut err = 0.0;
    for k in 0..d {
        let w = ev.half_width(k, 3.0);
        let base: f64 = (0..d)
            .filter(|&j| j != k)
            .map(|j| x[j] * x[j])
            .sum::<f64>()
            .sqrt();
        // Decay rate of the axis density at infinity, probed numerically.
        let alpha_tail = (density(k, 2.0) / density(k, 4.0)).log2() - 1.0;
        let (v, e) = line_moment(x[k], w, m, base, alpha_tail, |h| density(k, h));
        total += v;
        err += e;
    }
    (total, err)
}

/// Moment integral along one line: the coordinate `c ± h` must leave
/// `[-w, w]`, the weight is `(base^2 + (c ± h)^2)^{m/2}`, against a 1-d
/// density with tail decay `h^{-1-alpha_tail}`.
fn line_moment(
    c: f64,
    w: f64,
    m: f64,
    base: f64,
    alpha_tail: f64,
    density: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let mut total = 0.0;
    let mut err = 0.0;
    for (lo, sign) in [(w - c, 1.0), (w + c, -1.0)] {
        debug_assert!(lo > 0.0);
        let f = |h: f64| -> f64 {
            let coord = c + sign * h;
            (base * base + coord * coord).sqrt().powf(m) * density(h)
        };
        let decay = alpha_tail - m;
        let r_cut = lo.max(1.0) * TAIL_REMAINDER_REL.powf(-1.0 / decay);
        let mut octaves = Vec::new();
        let mut p = lo;
        while p < r_cut {
            octaves.push(p);
            p *= 2.0;
        }
        let q = quad::integrate_split(f, lo, r_cut, &octaves, TAIL_TOL);
        let factor = (1.0 + (base + c.abs()) / r_cut).powf(m);
        let tail_density = density(r_cut) * r_cut.powf(1.0 + alpha_tail);
        let remainder = factor * tail_density * r_cut.powf(m - alpha_tail) / decay;
        total += q.value;
        err += q.error + remainder;
    }
    (total, err)
}

/// Planar moment integral over the complement of the rectangle
/// `[-w1,w1] x [-w2,w2]` around the origin of `y = x + h`, with an optional
/// membership cut on `h`.
pub(crate) fn planar_moment(
    x: &[f64; 2],
    w: &[f64; 2],
    gamma_tail: f64,
    m: f64,
    kernel: &dyn Fn(&[f64; 2]) -> f64,
    weight: &dyn Fn(&[f64; 2]) -> f64,
    member: &dyn Fn(&[f64; 2]) -> bool,
) -> (f64, f64) {
    let decay = gamma_tail - m;
    let base = w[0].max(w[1]).max(1.0) + x[0].abs() + x[1].abs();
    let s_cut = base * 1e-6f64.powf(-1.0 / decay);
    // Geometric breakpoints keep the adaptive recursion shallow across the
    // many octaves between the rectangle and the cut radius.
    let octaves = |faces: [f64; 2]| -> Vec<f64> {
        let mut pts = vec![faces[0], faces[1], 0.0, -1.0, 1.0];
        let mut p = 1.0f64.min(w[0]).min(w[1]);
        while p < s_cut {
            pts.push(p);
            pts.push(-p);
            p *= 2.0;
        }
        pts
    };
    let inner_pts = octaves([-w[1] - x[1], w[1] - x[1]]);
    let inner = |h1: f64| -> f64 {
        let escaped1 = x[0] + h1 >= w[0] || x[0] + h1 <= -w[0];
        let f = |h2: f64| -> f64 {
            let h = [h1, h2];
            if !member(&h) {
                return 0.0;
            }
            let escaped = escaped1 || x[1] + h2 >= w[1] || x[1] + h2 <= -w[1];
            if !escaped {
                return 0.0;
            }
            weight(&h) * kernel(&h)
        };
        quad::integrate_split(f, -s_cut, s_cut, &inner_pts, 1e-8).value
    };
    let outer_pts = octaves([-w[0] - x[0], w[0] - x[0]]);
    let outer = quad::integrate_split(inner, -s_cut, s_cut, &outer_pts, 1e-6);
    let polar_remainder = {
        let factor = (1.0 + (x[0].abs() + x[1].abs()) / s_cut).powf(m);
        let kernel_scale = kernel(&[s_cut, 0.0]) * s_cut.powf(2.0 + gamma_tail);
        2.0 * std::f64::consts::PI * factor * kernel_scale * s_cut.powf(m - gamma_tail) / decay
    };
    (outer.value, outer.error + polar_remainder)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn ev_iso(d: usize, alpha: f64) -> ExponentVector {
        ExponentVector::isotropic(d, alpha).unwrap()
    }

    #[test]
    fn exact_tail_formula_values() {
        let ev = ev_iso(2, 1.0);
        assert_relative_eq!(axes_tail_exact(&ev, 1.0).unwrap(), 4.0);
        assert_relative_eq!(axes_tail_exact(&ev, 2.0).unwrap(), 2.0);
        assert!(axes_tail_exact(&ev, 0.0).is_err());
    }

    #[test]
    fn exact_tail_vanishes_as_orders_approach_two() {
        let mut prev = f64::MAX;
        for alpha in [1.0, 1.5, 1.9, 1.99, 1.999] {
            let ev = ev_iso(2, alpha);
            let v = axes_tail_exact(&ev, 1.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn numeric_axes_tail_matches_closed_form() {
        for alphas in [vec![1.0, 1.0], vec![0.6, 1.7], vec![1.2, 0.9, 1.8]] {
            let ev = ExponentVector::new(&alphas, 0.5).unwrap();
            let mu = JumpMeasure::axes(&ev);
            for rho in [0.25, 1.0, 2.0] {
                let exact = axes_tail_exact(&ev, rho).unwrap();
                let num =
                    tail_mass(&mu, &vec![0.0; ev.dim()], rho, TailRegion::BoxComplement).unwrap();
                assert_relative_eq!(num.value, exact, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn tail_mass_decays_at_infinity() {
        let ev = ev_iso(2, 1.0);
        let mu = JumpMeasure::axes(&ev);
        let big = tail_mass(&mu, &[0.0, 0.0], 64.0, TailRegion::BoxComplement).unwrap();
        assert!(big.value < 0.1);
        let huge = tail_mass(&mu, &[0.0, 0.0], 1024.0, TailRegion::BoxComplement).unwrap();
        assert!(huge.value < big.value);
    }

    #[test]
    fn slab_tail_ratio_bounded_uniformly_in_alpha() {
        // The ratio against (2-alpha_k) rho^{-alpha_max} stays bounded as the
        // order approaches 2, including at 1.99.
        for alpha in [1.0, 1.5, 1.99] {
            let ev = ev_iso(2, alpha);
            let mu = JumpMeasure::axes(&ev);
            let mut rho = 2.0f64.powi(-6);
            while rho <= 2.0 {
                let mass = tail_mass(&mu, &[0.0, 0.0], rho, TailRegion::SlabComplement(0))
                    .unwrap()
                    .value;
                let ratio = mass / ((2.0 - alpha) * rho.powf(-ev.alpha_max()));
                assert!(
                    ratio <= 2.0 / alpha + 1e-6,
                    "alpha={alpha} rho={rho} ratio={ratio}"
                );
                rho *= 2.0;
            }
        }
    }

    #[test]
    fn double_exponent_tail_is_sum_of_two_powers() {
        let mu = JumpMeasure::double_exponent(&[1.5, 1.2], &[0.8, 1.2], 0.5).unwrap();
        let m = tail_mass(&mu, &[0.0, 0.0], 1.0, TailRegion::SlabComplement(0)).unwrap();
        // At rho = 1 the half-widths are 1; closed form per exponent.
        let expect = 2.0 * (2.0 - 1.5) / 1.5 + 2.0 * (2.0 - 0.8) / 0.8;
        assert_relative_eq!(m.value, expect, max_relative = 1e-6);
    }

    #[test]
    fn double_exponent_requires_beta_below_alpha() {
        assert!(JumpMeasure::double_exponent(&[1.0, 1.0], &[1.2, 0.9], 0.5).is_err());
        assert!(JumpMeasure::double_exponent(&[1.0, 1.0], &[0.9, 0.9], 0.5).is_ok());
    }

    #[test]
    fn product_stable_slab_tails_match_hand_integration() {
        // Axis part: 2(2-beta)/beta * w^{-beta} with w = rho^{alpha_max/beta}.
        let (alpha, beta) = (1.0, 1.5);
        let mu = JumpMeasure::product_stable(alpha, beta, 0.5).unwrap();
        let rho: f64 = 0.8;
        let ev = mu.exponents().clone();
        let m3 = tail_mass(&mu, &[0.0; 3], rho, TailRegion::SlabComplement(2)).unwrap();
        let w3 = ev.half_width(2, rho);
        assert_relative_eq!(
            m3.value,
            2.0 * (2.0 - beta) / beta * w3.powf(-beta),
            max_relative = 1e-6
        );
        // Planar part: 4(2-alpha) I_alpha / alpha * w^{-alpha}.
        let m1 = tail_mass(&mu, &[0.0; 3], rho, TailRegion::SlabComplement(0)).unwrap();
        let i_alpha = quad::integrate(
            |t: f64| t.cos().powf(alpha),
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-12,
        )
        .value;
        let w1 = ev.half_width(0, rho);
        assert_relative_eq!(
            m1.value,
            4.0 * (2.0 - alpha) * i_alpha / alpha * w1.powf(-alpha),
            max_relative = 1e-5
        );
    }

    #[test]
    fn cusp_parameter_values_from_figure() {
        let p = cusp_params(0.1, 1.9, 0.1).unwrap();
        assert_relative_eq!(p.gamma, 19.9, max_relative = 1e-12);
        let p = cusp_params(1.97, 1.48, 0.5).unwrap();
        assert_relative_eq!(p.gamma, 3.4056 / 1.48, max_relative = 1e-12);
        assert!((p.gamma - 2.30).abs() < 0.01);
    }

    #[test]
    fn cusp_isotropic_degenerates_to_radial_kernel() {
        for alpha in [0.5, 1.0, 1.7] {
            let p = cusp_params(alpha, alpha, 0.5).unwrap();
            assert_relative_eq!(p.gamma, alpha, max_relative = 1e-12);
            assert_relative_eq!(p.b1, 1.0, max_relative = 1e-12);
            assert_relative_eq!(p.b2, 1.0, max_relative = 1e-12);
            // No cut-off anywhere.
            let mut rng = crate::rng::substream(41, 0);
            for _ in 0..1000 {
                let z = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                assert!(in_gamma(&z, &p));
            }
        }
    }

    #[test]
    fn cusp_normalization_identity() {
        let mut rng = crate::rng::substream(43, 0);
        for _ in 0..10_000 {
            let a1 = rng.random_range(0.3..1.999f64);
            let a2 = rng.random_range(0.3..1.999f64);
            let p = cusp_params(a1, a2, 0.3).unwrap();
            assert_relative_eq!(
                p.normalization,
                2.0 - a1.max(a2),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
            assert!(p.gamma >= a1.max(a2) - 1e-12);
            assert!(p.gamma <= 1.0 + 2.0 / 0.3 + 1e-12);
            assert!(p.b1 * (-1.0 - p.gamma) >= -1.0 - a2 - 1e-12);
            assert!(p.b2 * (-1.0 - p.gamma) >= -1.0 - a1 - 1e-12);
        }
    }

    #[test]
    fn cusp_params_rejects_out_of_range() {
        assert!(cusp_params(2.0, 1.0, 0.5).is_err());
        assert!(cusp_params(1.0, 0.3, 0.5).is_err());
    }

    #[test]
    fn gamma_region_membership() {
        let p = cusp_params(0.5, 1.5, 0.5).unwrap();
        // Outside the unit square: always admissible.
        let mut rng = crate::rng::substream(47, 0);
        for _ in 0..5000 {
            let z = [rng.random_range(1.0..4.0), rng.random_range(-4.0..4.0)];
            assert!(in_gamma(&z, &p));
            assert!(in_gamma(&[z[1], z[0]], &p));
        }
        // Points on an axis are admissible.
        assert!(in_gamma(&[0.5, 0.0], &p));
        assert!(in_gamma(&[0.0, 0.5], &p));
        // Symmetry under sign flips.
        for _ in 0..5000 {
            let z = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let m = in_gamma(&z, &p);
            assert_eq!(m, in_gamma(&[-z[0], z[1]], &p));
            assert_eq!(m, in_gamma(&[z[0], -z[1]], &p));
            assert_eq!(m, in_gamma(&[-z[0], -z[1]], &p));
        }
        // The diagonal near the origin is cut off for distinct exponents.
        assert!(!in_gamma(&[0.4, 0.4], &p));
    }

    #[test]
    fn cusp_kernel_values() {
        let p = cusp_params(1.0, 1.0, 0.5).unwrap();
        // Isotropic specialization: value |z|^{-3} with unit constant.
        let z = [0.3, -0.4];
        assert_relative_eq!(
            cusp_kernel(&z, &p).unwrap(),
            0.5f64.powf(-3.0),
            max_relative = 1e-12
        );
        assert!(cusp_kernel(&[0.0, 0.0], &p).is_err());
        // Homogeneity: doubling |z| scales by 2^{-2-gamma}.
        let p2 = cusp_params(0.8, 1.6, 0.5).unwrap();
        let z = [0.2, 0.01];
        let v1 = cusp_kernel(&z, &p2).unwrap();
        let v2 = cusp_kernel(&[0.4, 0.02], &p2).unwrap();
        assert!(v1 > 0.0);
        assert_relative_eq!(v2 / v1, 2f64.powf(-2.0 - p2.gamma), max_relative = 1e-12);
        // Outside the admissible region the kernel vanishes.
        assert_eq!(
            cusp_kernel(&[0.4, 0.4], &cusp_params(0.5, 1.5, 0.5).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn cusp_tail_bounded_by_robust_constant() {
        // Mass of the escaped slab stays below c (2 - alpha_max) r^{-alpha_max}
        // with c finite; towards small radii the constant stabilizes.
        let mu = JumpMeasure::cusp(0.5, 1.5, 0.5).unwrap();
        let ev = mu.exponents().clone();
        let ratio = |r: f64| {
            let m = tail_mass(&mu, &[0.0, 0.0], r, TailRegion::SlabComplement(0)).unwrap();
            assert!(m.value.is_finite() && m.value > 0.0);
            m.value / ((2.0 - ev.alpha_max()) * r.powf(-ev.alpha_max()))
        };
        for r in [0.25, 0.5, 1.0] {
            assert!(ratio(r) < 60.0, "r={r}");
        }
        let fine = ratio(1.0 / 16.0);
        let coarse = ratio(0.25);
        assert!(fine / coarse < 2.0 && coarse / fine < 2.0, "{fine} vs {coarse}");
    }

    #[test]
    fn cusp_tail_monotone_and_vanishing() {
        let mu = JumpMeasure::cusp(1.0, 1.5, 0.5).unwrap();
        let m1 = tail_mass(&mu, &[0.0, 0.0], 1.0, TailRegion::BoxComplement).unwrap();
        let m2 = tail_mass(&mu, &[0.0, 0.0], 4.0, TailRegion::BoxComplement).unwrap();
        assert!(m2.value < m1.value);
        assert!(m2.value > 0.0);
    }

    #[test]
    fn isotropic_cusp_tail_matches_radial_integration() {
        // For alpha1 = alpha2 = 1 the kernel is |z|^{-3} and the slab tail
        // has the closed polar form 4 I_1 / 1 * w^{-1}.
        let mu = JumpMeasure::cusp(1.0, 1.0, 0.5).unwrap();
        let m = tail_mass(&mu, &[0.0, 0.0], 2.0, TailRegion::SlabComplement(0)).unwrap();
        let i1 = quad::integrate(|t: f64| t.cos(), 0.0, std::f64::consts::FRAC_PI_2, 1e-13).value;
        assert_relative_eq!(m.value, 4.0 * i1 / 2.0, max_relative = 1e-5);
    }

    #[test]
    fn moment_condition_axes_finite_and_divergent() {
        let ev = ev_iso(2, 1.0);
        let mu = JumpMeasure::axes(&ev);
        let rep = moment_condition(&mu, 4.0).unwrap();
        assert!(!rep.divergent);
        assert!(rep.supremum.is_finite());
        assert!(rep.holds, "sup {} vs 4", rep.supremum);
        // lambda = 1 with alpha <= 1: non-integrable.
        let rep = moment_condition(&mu, 1.0).unwrap();
        assert!(rep.divergent);
        assert!(!rep.holds);
        assert!(moment_condition(&mu, 0.5).is_err());
    }

    #[test]
    fn moment_condition_axes_matches_line_oracle_at_origin() {
        // At the center x = 0 the axis integral has the closed form
        // 2 (2-a) int_w^inf h^m h^{-1-a} dh per axis (|y| = |h| on the line).
        let ev = ev_iso(2, 1.5);
        let mu = JumpMeasure::axes(&ev);
        let lambda = 4.0;
        let m = 1.0 / lambda;
        let w = 3.0f64;
        let per_axis = 2.0 * (2.0 - 1.5) * w.powf(m - 1.5) / (1.5 - m);
        let (v, e) = super::moment_integral_at(&mu, &[0.0, 0.0], m).unwrap();
        assert_relative_eq!(v, 2.0 * per_axis, max_relative = 1e-5);
        assert!(e < 1e-3 * v.max(1.0));
    }

    #[test]
    fn moment_condition_cusp_finite_for_large_lambda() {
        let mu = JumpMeasure::cusp(1.0, 1.5, 0.5).unwrap();
        let rep = moment_condition(&mu, 6.0).unwrap();
        assert!(!rep.divergent);
        assert!(rep.supremum.is_finite());
        assert!(rep.supremum > 0.0);
    }

    #[test]
    fn density_values_axes() {
        let ev = ev_iso(2, 1.0);
        let mu = JumpMeasure::axes(&ev);
        let v = eval_density(&mu, 0.0, &[0.0, 0.0], &[0.5, 0.0]).unwrap();
        match v {
            DensityValue::Axis { axis, value } => {
                assert_eq!(axis, 0);
                assert_relative_eq!(value, 0.5f64.powf(-2.0), max_relative = 1e-12);
            }
            _ => panic!("expected axis density, got {v:?}"),
        }
        // Off-axis pairs carry no mass.
        assert_eq!(
            eval_density(&mu, 0.0, &[0.0, 0.0], &[0.5, 0.5]).unwrap(),
            DensityValue::Zero
        );
        assert!(eval_density(&mu, 0.0, &[0.1, 0.2], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn density_scales_with_coefficient() {
        let ev = ev_iso(2, 1.0);
        let mu =
            JumpMeasure::axes(&ev).with_coefficient(CoefficientField::constant(0.5).unwrap());
        let v = eval_density(&mu, 0.0, &[0.0, 0.0], &[0.5, 0.0]).unwrap();
        assert_relative_eq!(v.scalar(), 0.5 * 4.0, max_relative = 1e-12);
        assert!(CoefficientField::constant(0.3).is_err());
    }

    #[test]
    fn double_exponent_equal_orders_doubles_axes_density() {
        let ev = ev_iso(2, 1.3);
        let axes = JumpMeasure::axes(&ev);
        let double = JumpMeasure::double_exponent(&[1.3, 1.3], &[1.3, 1.3], 0.5).unwrap();
        let x = [0.0, 0.0];
        let y = [0.0, 0.7];
        let v1 = eval_density(&axes, 0.0, &x, &y).unwrap().scalar();
        let v2 = eval_density(&double, 0.0, &x, &y).unwrap().scalar();
        assert_relative_eq!(v2, 2.0 * v1, max_relative = 1e-12);
    }

    #[test]
    fn stock_coefficient_stays_in_range_and_symmetric() {
        let c = CoefficientField::TimeCosine;
        for t in [-3.0, -1.0, 0.0, 0.5, 2.0, 7.0] {
            let v = c.eval(t, &[0.1], &[0.4]);
            assert!((0.5..=1.0).contains(&v));
            assert_eq!(v, c.eval(t, &[0.4], &[0.1]));
        }
    }

    #[test]
    fn product_stable_density_dispatch() {
        let mu = JumpMeasure::product_stable(1.0, 1.5, 0.5).unwrap();
        let x = [0.0, 0.0, 0.0];
        // Planar pair.
        let v = eval_density(&mu, 0.0, &x, &[0.3, 0.4, 0.0]).unwrap();
        match v {
            DensityValue::Plane(p) => {
                assert_relative_eq!(p, 0.5f64.powf(-3.0), max_relative = 1e-12)
            }
            _ => panic!("expected planar density"),
        }
        // Axis pair.
        let v = eval_density(&mu, 0.0, &x, &[0.0, 0.0, 2.0]).unwrap();
        match v {
            DensityValue::Axis { axis, value } => {
                assert_eq!(axis, 2);
                assert_relative_eq!(value, 0.5 * 2f64.powf(-2.5), max_relative = 1e-12);
            }
            _ => panic!("expected axis density"),
        }
        // Mixed displacement carries no mass.
        assert_eq!(
            eval_density(&mu, 0.0, &x, &[0.1, 0.0, 0.1]).unwrap(),
            DensityValue::Zero
        );
    }
}
