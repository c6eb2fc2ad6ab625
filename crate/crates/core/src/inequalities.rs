//! Scalar algebraic inequalities behind the iteration scheme, the
//! iteration schedules themselves, the abstract measure-theoretic
//! bootstrap checker, and the decay-exponent algebra.

use crate::geometry::ExponentVector;
use crate::{Error, Result};
use rayon::prelude::*;

/// Relative slack for the proved scalar inequalities.
pub const SCALAR_SLACK_REL: f64 = 1e-12;

/// Piecewise amplification factor `max(4, (6q - 5)/2)` for `q > 1`.
pub fn theta(q: f64) -> f64 {
    4.0f64.max((6.0 * q - 5.0) / 2.0)
}

/// `zeta(q) = 4q/(1-q)` for `q in (0, 1)`.
pub fn zeta(q: f64) -> f64 {
    4.0 * q / (1.0 - q)
}

/// `(x / tau)^e` with the convention that division by `tau = 0` yields 0
/// (legitimate because the exponents used here are negative).
fn ratio_pow(x: f64, tau: f64, e: f64) -> f64 {
    if tau == 0.0 {
        0.0
    } else {
        (x / tau).powf(e)
    }
}

/// Outcome of one scalar inequality evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IneqCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `lhs - rhs` (nonnegative when the inequality holds sharply).
    pub slack: f64,
}

fn check_with_slack(lhs: f64, rhs: f64) -> IneqCheck {
    let tol = SCALAR_SLACK_REL * lhs.abs().max(rhs.abs());
    IneqCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - tol,
        slack: lhs - rhs,
    }
}

/// The negative-exponent inequality: for `q > 1`, `a, b > 0`,
/// `tau_1, tau_2 >= 0`,
/// `(b-a)(tau_1^{q+1} a^{-q} - tau_2^{q+1} b^{-q})` dominates the weighted
/// square of the power differences minus the amplified cut-off variation.
pub fn check_inequality_neg_exponent(
    a: f64,
    b: f64,
    tau1: f64,
    tau2: f64,
    q: f64,
) -> Result<IneqCheck> {
    if !(q > 1.0) {
        return Err(Error::param("q", format!("{q} must exceed 1")));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::param("a", "a and b must be positive"));
    }
    if tau1 < 0.0 || tau2 < 0.0 {
        return Err(Error::param("tau1", "cut-off values must be nonnegative"));
    }
    let lhs = (b - a) * (tau1.powf(q + 1.0) * a.powf(-q) - tau2.powf(q + 1.0) * b.powf(-q));
    let half = (1.0 - q) / 2.0;
    let diff = ratio_pow(b, tau2, half) - ratio_pow(a, tau1, half);
    let rhs = (tau1 * tau2) / (q - 1.0) * diff * diff
        - theta(q)
            * (tau2 - tau1)
            * (tau2 - tau1)
            * (ratio_pow(b, tau2, 1.0 - q) + ratio_pow(a, tau1, 1.0 - q));
    Ok(check_with_slack(lhs, rhs))
}

/// The small-positive-exponent inequality: for `q in (0, 1)`,
/// `(b-a)(tau_1^2 a^{-q} - tau_2^2 b^{-q})` dominates
/// `zeta/6` times the squared difference of `tau b^{(1-q)/2}` minus
/// `(zeta + 9/q)` times the cut-off variation.
pub fn check_inequality_pos_exponent(
    a: f64,
    b: f64,
    tau1: f64,
    tau2: f64,
    q: f64,
) -> Result<IneqCheck> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("q", format!("{q} not in (0,1)")));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::param("a", "a and b must be positive"));
    }
    if tau1 < 0.0 || tau2 < 0.0 {
        return Err(Error::param("tau1", "cut-off values must be nonnegative"));
    }
    let lhs = (b - a) * (tau1 * tau1 * a.powf(-q) - tau2 * tau2 * b.powf(-q));
    let half = (1.0 - q) / 2.0;
    let zeta1 = zeta(q) / 6.0;
    let zeta2 = zeta(q) + 9.0 / q;
    let diff = tau2 * b.powf(half) - tau1 * a.powf(half);
    let rhs = zeta1 * diff * diff
        - zeta2 * (tau2 - tau1) * (tau2 - tau1) * (b.powf(1.0 - q) + a.powf(1.0 - q));
    Ok(check_with_slack(lhs, rhs))
}

/// Result of a randomized sweep over one of the scalar inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub samples: usize,
    pub violations: usize,
    /// Most negative slack seen, relative to the dominant side.
    pub worst_relative_slack: f64,
}

/// Randomized sweep of the negative-exponent inequality (`neg = true`) or
/// the positive-exponent one, with per-batch substreams.
pub fn sweep_inequality(neg: bool, samples: usize, seed: u64) -> SweepReport {
    use rand::Rng;
    let batch = 65_536usize;
    let results: Vec<(usize, f64)> = (0..samples.div_ceil(batch))
        .into_par_iter()
        .map(|bi| {
            let mut rng = crate::rng::substream(seed, 0x9e1 + bi as u64);
            let lo = bi * batch;
            let hi = ((bi + 1) * batch).min(samples);
            let mut violations = 0usize;
            let mut worst = f64::INFINITY;
            for _ in lo..hi {
                let a = rng.random_range(0.0f64..10.0).max(1e-12);
                let b = rng.random_range(0.0f64..10.0).max(1e-12);
                let tau1 = rng.random_range(0.0f64..1.0);
                let tau2 = rng.random_range(0.0f64..1.0);
                let check = if neg {
                    let q = rng.random_range(1.0f64..10.0).max(1.0 + 1e-9);
                    check_inequality_neg_exponent(a, b, tau1, tau2, q).unwrap()
                } else {
                    let q = rng.random_range(0.0f64..1.0).clamp(1e-9, 1.0 - 1e-9);
                    check_inequality_pos_exponent(a, b, tau1, tau2, q).unwrap()
                };
                let scale = check.lhs.abs().max(check.rhs.abs()).max(1e-300);
                let rel = check.slack / scale;
                worst = worst.min(rel);
                if !check.holds {
                    violations += 1;
                }
            }
            (violations, worst)
        })
        .collect();
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for (v, w) in results {
        violations += v;
        worst = worst.min(w);
    }
    SweepReport {
        samples,
        violations,
        worst_relative_slack: worst,
    }
}

/// Shrinking-radius, growing-exponent schedule of the lower-bound
/// iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MoserScheduleNeg {
    ev: ExponentVector,
    r: f64,
    big_r: f64,
    p: f64,
}

impl MoserScheduleNeg {
    pub fn new(ev: &ExponentVector, r: f64, big_r: f64, p: f64) -> Result<Self> {
        if !(0.5 <= r && r < big_r && big_r <= 1.0) {
            return Err(Error::param("r", format!("need 1/2 <= {r} < {big_r} <= 1")));
        }
        if !(p > 0.0) {
            return Err(Error::param("p", "must be positive"));
        }
        Ok(MoserScheduleNeg {
            ev: ev.clone(),
            r,
            big_r,
            p,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.ev.kappa()
    }

    /// Radii `r_j = r + (R - r)/2^j`, strictly decreasing to `r`.
    pub fn radius(&self, j: u32) -> f64 {
        self.r + (self.big_r - self.r) / 2f64.powi(j as i32)
    }

    /// Exponents `p_j = p kappa^j`, increasing without bound.
    pub fn exponent(&self, j: u32) -> f64 {
        self.p * self.kappa().powi(j as i32)
    }

    /// Radius gap `r_j - r_{j+1} = (R - r) / 2^{j+1}` in closed form
    /// (the subtracted representation cancels catastrophically at depth).
    pub fn radius_gap(&self, j: u32) -> f64 {
        (self.big_r - self.r) / 2f64.powi(j as i32 + 1)
    }

    /// Amplification `A_j = c (p kappa^j + 1)^2 (r_j - r_{j+1})^{-alpha_max}`.
    pub fn amplification(&self, j: u32, c: f64) -> f64 {
        c * (self.exponent(j) + 1.0).powi(2) * self.radius_gap(j).powf(-self.ev.alpha_max())
    }

    pub fn gap(&self) -> f64 {
        self.big_r - self.r
    }

    pub fn exponents(&self) -> &ExponentVector {
        &self.ev
    }
}

/// Convergent infinite product of the iteration amplifications.
#[derive(Debug, Clone, PartialEq)]
pub struct MoserProductReport {
    /// `prod_j A_j^{1/kappa^j}` up to the truncation depth.
    pub product: f64,
    /// Smallest constant with `product <= c3 (R-r)^{-(d a_max/a_0 + a_max)}`.
    pub c3: f64,
    /// Terms taken before the analytic tail bound fell below tolerance.
    pub truncation_depth: u32,
    /// Analytic bound on the dropped log-mass.
    pub tail_bound: f64,
}

/// Evaluates the amplification product to convergence and the implied
/// power-law constant.
pub fn moser_product_bound(schedule: &MoserScheduleNeg, c: f64) -> Result<MoserProductReport> {
    if !(c > 0.0) {
        return Err(Error::param("c", "must be positive"));
    }
    let kappa = schedule.kappa();
    // Per-step growth bound: A_{j+1}/A_j <= kappa^2 2^{alpha_max}.
    let growth = 2.0 * kappa.ln() + schedule.ev.alpha_max() * 2.0f64.ln();
    let mut log_sum = 0.0f64;
    let mut j = 0u32;
    let tail_bound = loop {
        let a_j = schedule.amplification(j, c);
        let term = a_j.ln() / kappa.powi(j as i32);
        log_sum += term;
        // Geometric tail: log A stays below log A_j + growth (m - j).
        let tail = (a_j.ln().abs() / (kappa - 1.0) + growth * kappa / ((kappa - 1.0) * (kappa - 1.0)))
            / kappa.powi(j as i32);
        if tail < 1e-13 || j > 10_000 {
            break tail;
        }
        j += 1;
    };
    let ev = &schedule.ev;
    let exponent = ev.dim() as f64 * ev.alpha_max() / ev.alpha0() + ev.alpha_max();
    let product = log_sum.exp();
    Ok(MoserProductReport {
        product,
        c3: product * schedule.gap().powf(exponent),
        truncation_depth: j,
        tail_bound,
    })
}

/// The power-law bound `c3 (R - r)^{-(d a_max/a_0 + a_max)}`.
pub fn moser_bound_value(ev: &ExponentVector, gap: f64, c3: f64) -> f64 {
    let exponent = ev.dim() as f64 * ev.alpha_max() / ev.alpha0() + ev.alpha_max();
    c3 * gap.powf(-exponent)
}

/// Finite schedule of the small-positive-moment iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MoserSchedulePos {
    ev: ExponentVector,
    p: f64,
    n: u32,
}

impl MoserSchedulePos {
    /// Requires `p in (0, 1/kappa)`; derives the depth `n` with
    /// `kappa^{-n} <= p < kappa^{-(n-1)}`.
    pub fn new(ev: &ExponentVector, p: f64) -> Result<Self> {
        let kappa = ev.kappa();
        if !(p > 0.0 && p < 1.0 / kappa) {
            return Err(Error::param("p", format!("{p} not in (0, 1/kappa)")));
        }
        let mut n = ((1.0 / p).ln() / kappa.ln()).ceil() as u32;
        // Float-edge adjustment.
        while kappa.powi(-(n as i32)) > p {
            n += 1;
        }
        while n > 1 && kappa.powi(-(n as i32 - 1)) <= p {
            n -= 1;
        }
        Ok(MoserSchedulePos { ev: ev.clone(), p, n })
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.ev.kappa()
    }

    /// `p_j = kappa^{-j}`.
    pub fn exponent(&self, j: u32) -> f64 {
        self.kappa().powi(-(j as i32))
    }
}

/// The two exponent sums of the finite schedule with their exact identity
/// and bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSums {
    /// `sum_{j=1..n} kappa^j`.
    pub sum_kappa: f64,
    /// `sum_{j=1..n} (n - j + 1) kappa^j`.
    pub sum_weighted: f64,
    /// `(beta + 1)(1/p_n - 1)`, equal to `sum_kappa` exactly.
    pub identity_value: f64,
    /// `kappa^3/(kappa-1)^3 (1/p_n - 1)`, dominating `sum_weighted`.
    pub bound_value: f64,
    pub identity_holds: bool,
    pub bound_holds: bool,
}

pub fn moser_exponent_sums(schedule: &MoserSchedulePos) -> ExponentSums {
    let kappa = schedule.kappa();
    let n = schedule.depth();
    let mut sum_kappa = 0.0;
    let mut sum_weighted = 0.0;
    for j in 1..=n {
        let kj = kappa.powi(j as i32);
        sum_kappa += kj;
        sum_weighted += (n - j + 1) as f64 * kj;
    }
    let inv_pn = kappa.powi(n as i32);
    let identity_value = (schedule.ev.beta() + 1.0) * (inv_pn - 1.0);
    let bound_value = kappa.powi(3) / (kappa - 1.0).powi(3) * (inv_pn - 1.0);
    ExponentSums {
        sum_kappa,
        sum_weighted,
        identity_value,
        bound_value,
        identity_holds: (sum_kappa - identity_value).abs()
            <= 1e-12 * sum_kappa.abs().max(identity_value.abs()),
        bound_holds: sum_weighted <= bound_value * (1.0 + 1e-12),
    }
}

/// Target exponent of the abstract bootstrap conclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BgExponent {
    Finite(f64),
    /// Supremum norm.
    Sup,
}

/// Parameters of the abstract bootstrap lemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgParams {
    pub m: f64,
    pub c0: f64,
    pub theta: f64,
    pub eta: f64,
    pub p0: BgExponent,
}

/// Report of the numerical bootstrap verification.
#[derive(Debug, Clone, PartialEq)]
pub struct BgReport {
    pub hypothesis1_ok: bool,
    /// Levels `s` at which the log-superlevel bound failed.
    pub h1_violations: Vec<f64>,
    pub hypothesis2_ok: bool,
    /// Count of `(r, R, p)` triples violating the reverse-Hoelder chain.
    pub h2_violations: usize,
    /// Smallest constant for which the conclusion display holds as stated.
    pub conclusion_constant: f64,
    /// Conclusion constant after dividing out the level shift implied by
    /// the superlevel profile; invariant under scaling of `w`.
    pub normalized_constant: f64,
    /// The level shift used for the normalized constant.
    pub level_shift: f64,
}

/// Numerically verifies the bootstrap hypotheses and conclusion for `w` on
/// the nested family `U(r) = (1 - r^{alpha_max}, 1) x M_r`, `theta <= r <= 1`.
pub fn bombieri_giusti_check(
    w: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    ev: &ExponentVector,
    resolution: &[usize],
    time_steps: usize,
    params: &BgParams,
) -> Result<BgReport> {
    if !(params.theta >= 0.5 && params.theta <= 1.0) {
        return Err(Error::param("theta", "must lie in [1/2, 1]"));
    }
    if !(params.eta > 0.0 && params.eta < 1.0) {
        return Err(Error::param("eta", "must lie in (0, 1)"));
    }
    if let BgExponent::Finite(p0) = params.p0 {
        if !(p0 > 0.0) {
            return Err(Error::param("p0", "must be positive"));
        }
    }
    let unit = crate::geometry::AnisoBox::centered(1.0, ev)?;
    let template = crate::energy::GridFunction::zeros(&unit, resolution)?;
    let vol = template.cell_volume();
    let alpha_max = ev.alpha_max();
    // Sample the slab (0, 1) x M_1.
    let mut samples: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let mut idx = vec![0usize; ev.dim()];
    for i in 0..time_steps {
        let t = (i as f64 + 0.5) / time_steps as f64;
        for flat in 0..template.len() {
            template.unflatten(flat, &mut idx);
            let x = template.center_of(&idx);
            let value = w(t, &x);
            if !(value > 0.0) {
                return Err(Error::param("w", format!("must be positive, got {value}")));
            }
            samples.push((t, x, value));
        }
    }
    let dv = vol / time_steps as f64;
    let u1_volume = unit.volume(); // time extent 1 x |M_1|
    let member = |r: f64, t: f64, x: &[f64]| -> bool {
        t > 1.0 - r.powf(alpha_max) && crate::geometry::aniso_metric(x, &vec![0.0; ev.dim()], ev) < r
    };
    // Hypothesis 1 on a logarithmic level grid.
    let mut h1_violations = Vec::new();
    let mut s = 1e-2f64;
    while s <= 1e3 {
        let measure: f64 = samples
            .iter()
            .filter(|(_, _, v)| v.ln() > s)
            .map(|_| dv)
            .sum();
        if measure > params.c0 / s * u1_volume * (1.0 + 1e-9) {
            h1_violations.push(s);
        }
        s *= 10f64.powf(0.2);
    }
    // Hypothesis 2 on a triangular (r, R) grid with log-spaced moments.
    let grid = 16usize;
    let radii: Vec<f64> = (0..grid)
        .map(|i| params.theta + (1.0 - params.theta) * i as f64 / (grid - 1) as f64)
        .collect();
    let p_top = match params.p0 {
        BgExponent::Sup => 1.0,
        BgExponent::Finite(p0) => (params.eta * p0).min(1.0),
    };
    let moments: Vec<f64> = (0..8)
        .map(|i| p_top * 0.9 * 10f64.powf(-(7 - i) as f64 * 0.25))
        .collect();
    // Per-radius integrals and suprema.
    let lp_at = |r: f64, p: f64| -> f64 {
        samples
            .iter()
            .filter(|(t, x, _)| member(r, *t, x))
            .map(|(_, _, v)| v.powf(p) * dv)
            .sum::<f64>()
            .powf(1.0 / p)
    };
    let sup_at = |r: f64| -> f64 {
        samples
            .iter()
            .filter(|(t, x, _)| member(r, *t, x))
            .map(|(_, _, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let lhs_of = |r: f64| -> f64 {
        match params.p0 {
            BgExponent::Sup => sup_at(r),
            BgExponent::Finite(p0) => lp_at(r, p0),
        }
    };
    let mut h2_violations = 0usize;
    for (i, &r) in radii.iter().enumerate() {
        let lhs = lhs_of(r);
        for &big_r in &radii[i + 1..] {
            for &p in &moments {
                let inv_p0 = match params.p0 {
                    BgExponent::Sup => 0.0,
                    BgExponent::Finite(p0) => 1.0 / p0,
                };
                let factor = (params.c0 / ((big_r - r).powf(params.m) * u1_volume))
                    .powf(1.0 / p - inv_p0);
                let rhs = factor * lp_at(big_r, p);
                if !(rhs.is_finite()) || lhs > rhs * (1.0 + 1e-9) {
                    h2_violations += 1;
                }
            }
        }
    }
    // Conclusion constant, raw and shift-normalized.
    let inv_p0 = match params.p0 {
        BgExponent::Sup => 0.0,
        BgExponent::Finite(p0) => 1.0 / p0,
    };
    let conclusion_constant = lhs_of(params.theta) / u1_volume.powf(inv_p0);
    // Smallest shift a with F(z) <= c0 / (z - a) for all levels z: the
    // supremum of z - c0 / F(z) over levels with positive measure.
    let mut logs: Vec<f64> = samples.iter().map(|(_, _, v)| v.ln()).collect();
    logs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total = logs.len() as f64;
    let mut level_shift = f64::NEG_INFINITY;
    for (rank, z) in logs.iter().enumerate() {
        // Fraction strictly above level z.
        let fraction = (total - rank as f64 - 1.0) / total;
        if fraction > 0.0 {
            level_shift = level_shift.max(z - params.c0 / fraction);
        } else {
            level_shift = level_shift.max(*z);
        }
    }
    Ok(BgReport {
        hypothesis1_ok: h1_violations.is_empty(),
        h1_violations,
        hypothesis2_ok: h2_violations == 0,
        h2_violations,
        conclusion_constant,
        normalized_constant: conclusion_constant / level_shift.exp(),
        level_shift,
    })
}

/// Decay exponent from the contraction factor: `min(gamma0,
/// log(2/(2-delta))/log 6)`, nudged below the float boundary so the
/// defining inequality `1 - delta/2 < 6^{-gamma}` holds strictly.
pub fn holder_exponent(delta: f64, gamma0: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0 + 1e-15) || !(gamma0 > 0.0 && gamma0 < 1.0) {
        return Err(Error::param(
            "delta",
            format!("delta {delta} not in (0,1] or gamma0 {gamma0} not in (0,1)"),
        ));
    }
    let branch = (2.0 / (2.0 - delta)).ln() / 6.0f64.ln();
    let mut gamma = gamma0.min(branch);
    while gamma > 0.0 && 1.0 - delta / 2.0 >= 6.0f64.powf(-gamma) {
        gamma *= 1.0 - 1e-14;
    }
    Ok(gamma)
}
