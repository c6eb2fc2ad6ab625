//! Simulation of the axis-jumping stable process and Monte Carlo
//! estimation of solutions, observation-window ratios and oscillation
//! decay.
//!
//! Increments are sampled exactly with the Chambers-Mallows-Stuck
//! transform (no path discretization: only time marginals are needed).
//! Every path draws from its own counter-addressed stream, so ensembles
//! are reproducible and independent of scheduling.

use crate::energy::GridFunction;
use crate::geometry::{AnisoBox, Cylinder, ExponentVector};
use crate::spectral::SemigroupSolution;
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;

/// Sampler for a symmetric stable law whose `t`-increment has
/// characteristic function `exp(-t * scale * |xi|^alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StableSampler {
    alpha: f64,
    scale: f64,
}

impl StableSampler {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::param("alpha", format!("{alpha} not in (0,2)")));
        }
        if !(scale > 0.0) {
            return Err(Error::param("scale", "must be positive"));
        }
        Ok(StableSampler { alpha, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// One draw of the increment over a time step `dt > 0`.
    pub fn sample_increment<R: Rng>(&self, dt: f64, rng: &mut R) -> Result<f64> {
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        Ok((self.scale * dt).powf(1.0 / self.alpha) * standard_symmetric_stable(self.alpha, rng))
    }
}

/// Standard symmetric stable draw with `E exp(i xi X) = exp(-|xi|^alpha)`.
fn standard_symmetric_stable<R: Rng>(alpha: f64, rng: &mut R) -> f64 {
    let v: f64 = rng.random_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
    if alpha == 1.0 {
        // Cauchy branch.
        return v.tan();
    }
    let w: f64 = -rng.random_range(0.0f64..1.0).max(f64::MIN_POSITIVE).ln();
    let t1 = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let t2 = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    t1 * t2
}

/// Independent per-axis stable components matched to a multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    samplers: Vec<StableSampler>,
    path_count: usize,
    seed: u64,
}

impl PathEnsemble {
    /// Components scaled to the symbol coefficients `c_k`.
    pub fn new(
        ev: &ExponentVector,
        coefficients: &[f64],
        path_count: usize,
        seed: u64,
    ) -> Result<Self> {
        if coefficients.len() != ev.dim() {
            return Err(Error::param("coefficients", "length mismatch"));
        }
        let samplers = ev
            .alphas()
            .iter()
            .zip(coefficients)
            .map(|(&a, &c)| StableSampler::new(a, c))
            .collect::<Result<Vec<_>>>()?;
        if path_count == 0 {
            return Err(Error::param("path_count", "must be at least 1"));
        }
        Ok(PathEnsemble {
            samplers,
            path_count,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.samplers.len()
    }

    pub fn path_count(&self) -> usize {
        self.path_count
    }

    /// The time-`t` displacement of path `i` (one-shot sampling, one
    /// stream per (component, path) pair).
    pub fn displacement(&self, i: usize, t: f64) -> Result<Vec<f64>> {
        let d = self.dim();
        let mut z = Vec::with_capacity(d);
        for (k, s) in self.samplers.iter().enumerate() {
            let mut rng = crate::rng::substream(self.seed, (i * d + k) as u64);
            z.push(s.sample_increment(t, &mut rng)?);
        }
        Ok(z)
    }
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo solution estimate `u(t, x) = E g(x + Z_t)` at the probe
/// points, with per-point standard errors. All probes share one ensemble;
/// sums accumulate in fixed chunk order regardless of thread count.
pub fn estimate_solution(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    ev: &ExponentVector,
    coefficients: &[f64],
    t: f64,
    probes: &[Vec<f64>],
    path_count: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if !(t >= 0.0) {
        return Err(Error::param("t", "must be nonnegative"));
    }
    let ensemble = PathEnsemble::new(ev, coefficients, path_count, seed)?;
    if t == 0.0 {
        return Ok(probes
            .iter()
            .map(|x| Estimate {
                value: g(x),
                std_error: 0.0,
            })
            .collect());
    }
    let m = probes.len();
    let chunk = 4096usize;
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..path_count.div_ceil(chunk))
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk;
            let hi = ((ci + 1) * chunk).min(path_count);
            let mut sums = vec![0.0; m];
            let mut sq = vec![0.0; m];
            let mut y = vec![0.0; ensemble.dim()];
            for i in lo..hi {
                let z = ensemble.displacement(i, t).expect("dt > 0");
                for (j, x) in probes.iter().enumerate() {
                    for a in 0..y.len() {
                        y[a] = x[a] + z[a];
                    }
                    let v = g(&y);
                    sums[j] += v;
                    sq[j] += v * v;
                }
            }
            (sums, sq)
        })
        .collect();
    let mut sums = vec![0.0; m];
    let mut sq = vec![0.0; m];
    for (s, q) in chunks {
        for j in 0..m {
            sums[j] += s[j];
            sq[j] += q[j];
        }
    }
    let n = path_count as f64;
    Ok((0..m)
        .map(|j| {
            let mean = sums[j] / n;
            let var = (sq[j] / n - mean * mean).max(0.0);
            Estimate {
                value: mean,
                std_error: (var / n).sqrt(),
            }
        })
        .collect())
}

/// Space-time fields that can be sampled slice-wise on grids.
pub trait SpaceTimeField: Sync {
    fn slice(&self, t: f64, boxd: &AnisoBox, resolution: &[usize]) -> Result<GridFunction>;
}

impl SpaceTimeField for SemigroupSolution {
    fn slice(&self, t: f64, boxd: &AnisoBox, resolution: &[usize]) -> Result<GridFunction> {
        self.sample(t, boxd, resolution)
    }
}

/// Measured quantities of the two-window comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnackReport {
    /// `L^1` mass over the early window.
    pub l1_early: f64,
    /// Grid infimum over the late window.
    pub inf_late: f64,
    pub ratio: f64,
}

/// Midpoint time samples of an interval.
fn time_samples(interval: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = interval;
    (0..n)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
        .collect()
}

/// Computes `||u||_{L^1(early)} / (inf_{late} u + f_sup)` over the standard
/// observation windows; rejects fields that go negative on the samples.
pub fn harnack_ratio(
    u: &dyn SpaceTimeField,
    f_sup: f64,
    ev: &ExponentVector,
    resolution: &[usize],
    time_steps: usize,
) -> Result<HarnackReport> {
    if !(f_sup >= 0.0) {
        return Err(Error::param("f_sup", "must be nonnegative"));
    }
    let early = Cylinder::harnack_early(ev)?;
    let late = Cylinder::harnack_late(ev)?;
    let mut l1 = 0.0;
    let dt = (early.time_interval.1 - early.time_interval.0) / time_steps as f64;
    for &t in &time_samples(early.time_interval, time_steps) {
        let slice = u.slice(t, &early.space, resolution)?;
        let min = slice.min();
        if min < -1e-9 {
            return Err(Error::param(
                "u",
                format!("negative value {min} in the early window at t = {t}"),
            ));
        }
        l1 += slice.values().iter().sum::<f64>() * slice.cell_volume() * dt;
    }
    let mut inf = f64::INFINITY;
    for &t in &time_samples(late.time_interval, time_steps) {
        let slice = u.slice(t, &late.space, resolution)?;
        let min = slice.min();
        if min < -1e-9 {
            return Err(Error::param(
                "u",
                format!("negative value {min} in the late window at t = {t}"),
            ));
        }
        inf = inf.min(min);
    }
    Ok(HarnackReport {
        l1_early: l1,
        inf_late: inf,
        ratio: l1 / (inf + f_sup),
    })
}

/// Oscillations over the shrinking neighborhoods and the fitted decay
/// exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    /// `sup - inf` over the neighborhood at scale `6^{-nu}`.
    pub oscillations: Vec<f64>,
    /// Least-squares exponent of `osc ~ 6^{-nu gamma}`; `None` when the
    /// oscillations degenerate to zero.
    pub fitted_gamma: Option<f64>,
    pub monotone: bool,
}

/// Measures `sup - inf` over the neighborhoods at scales `6^{-nu}` for
/// `nu = 0..=nu_max`. Extremes at finer scales are folded into coarser
/// ones, so the reported sequence respects the set nesting by
/// construction.
pub fn oscillation_decay(
    u: &dyn SpaceTimeField,
    ev: &ExponentVector,
    nu_max: usize,
    resolution: &[usize],
    time_steps: usize,
) -> Result<OscillationReport> {
    let mut extremes: Vec<(f64, f64)> = Vec::with_capacity(nu_max + 1);
    for nu in 0..=nu_max {
        let r = 6.0f64.powi(-(nu as i32));
        let hat = Cylinder::osc_hat(0.0, &vec![0.0; ev.dim()], r, ev)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in &time_samples(hat.time_interval, time_steps) {
            let slice = u.slice(t, &hat.space, resolution)?;
            lo = lo.min(slice.min());
            hi = hi.max(slice.max());
        }
        extremes.push((lo, hi));
    }
    for nu in (0..nu_max).rev() {
        extremes[nu].0 = extremes[nu].0.min(extremes[nu + 1].0);
        extremes[nu].1 = extremes[nu].1.max(extremes[nu + 1].1);
    }
    let oscillations: Vec<f64> = extremes.iter().map(|(lo, hi)| hi - lo).collect();
    let monotone = oscillations
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let fitted_gamma = if oscillations.iter().any(|o| *o <= 0.0) {
        None
    } else {
        // Least squares of ln(osc) against nu.
        let n = oscillations.len() as f64;
        let xs: Vec<f64> = (0..oscillations.len()).map(|i| i as f64).collect();
        let ys: Vec<f64> = oscillations.iter().map(|o| o.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(-sxy / sxx / 6.0f64.ln())
    };
    Ok(OscillationReport {
        oscillations,
        fitted_gamma,
        monotone,
    })
}

/// Largest sampled space-time difference quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub max_quotient: f64,
    /// Scale for which the quotient equals `sup_norm / eta^gamma`.
    pub eta: f64,
    pub gamma: f64,
}

/// Maximizes `|u(t,x) - u(s,y)| / (|x-y| + |t-s|^{1/alpha_max})^gamma`
/// over sampled pairs from a dense grid on the window.
#[allow(clippy::too_many_arguments)]
pub fn holder_quotient(
    u: &dyn SpaceTimeField,
    ev: &ExponentVector,
    window: &Cylinder,
    gamma: f64,
    sample_pairs: usize,
    resolution: &[usize],
    time_steps: usize,
    sup_norm: f64,
    seed: u64,
) -> Result<HolderReport> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("gamma", format!("{gamma} not in (0,1]")));
    }
    let times = time_samples(window.time_interval, time_steps);
    let mut slices = Vec::with_capacity(times.len());
    for &t in &times {
        slices.push(u.slice(t, &window.space, resolution)?);
    }
    let mut rng = crate::rng::substream(seed, 0x401d);
    let d = ev.dim();
    let mut max_q = 0.0f64;
    let mut idx = vec![0usize; d];
    for _ in 0..sample_pairs {
        let ti = rng.random_range(0..times.len());
        let fi = rng.random_range(0..slices[ti].len());
        let tj = rng.random_range(0..times.len());
        let fj = rng.random_range(0..slices[tj].len());
        if ti == tj && fi == fj {
            continue;
        }
        slices[ti].unflatten(fi, &mut idx);
        let xi = slices[ti].center_of(&idx);
        slices[tj].unflatten(fj, &mut idx);
        let xj = slices[tj].center_of(&idx);
        let du = (slices[ti].values()[fi] - slices[tj].values()[fj]).abs();
        let dx: f64 = (0..d)
            .map(|a| (xi[a] - xj[a]) * (xi[a] - xj[a]))
            .sum::<f64>()
            .sqrt();
        let dt = (times[ti] - times[tj]).abs().powf(1.0 / ev.alpha_max());
        let q = du / (dx + dt).powf(gamma);
        max_q = max_q.max(q);
    }
    let eta = if max_q > 0.0 {
        (sup_norm / max_q).powf(1.0 / gamma)
    } else {
        f64::INFINITY
    };
    Ok(HolderReport {
        max_quotient: max_q,
        eta,
        gamma,
    })
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < n && j < m {
        let va = a[i];
        let vb = b[j];
        if va <= vb {
            i += 1;
        }
        if vb <= va {
            j += 1;
        }
        let gap = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(gap);
    }
    let ne = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    let mut p = 0.0;
    for k in 1..=100u32 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
    }
    (d, p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{period_cube, SpectralField};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn sampler_rejects_bad_parameters() {
        assert!(StableSampler::new(2.0, 1.0).is_err());
        assert!(StableSampler::new(0.0, 1.0).is_err());
        assert!(StableSampler::new(1.0, 0.0).is_err());
        let s = StableSampler::new(1.0, 1.0).unwrap();
        let mut rng = crate::rng::substream(1, 0);
        assert!(s.sample_increment(0.0, &mut rng).is_err());
    }

    #[test]
    fn increments_symmetric_median_near_zero() {
        for alpha in [0.7, 1.0, 1.6] {
            let s = StableSampler::new(alpha, 1.0).unwrap();
            let mut rng = crate::rng::substream(2, 0);
            let n = 1_000_000usize;
            let mut draws: Vec<f64> = (0..n)
                .map(|_| s.sample_increment(1.0, &mut rng).unwrap())
                .collect();
            draws.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let median = draws[n / 2];
            assert!(median.abs() < 0.005, "alpha {alpha}: median {median}");
        }
    }

    #[test]
    fn cauchy_characteristic_function() {
        // E[cos X] = exp(-1) for the unit Cauchy increment.
        let s = StableSampler::new(1.0, 1.0).unwrap();
        let mut rng = crate::rng::substream(3, 0);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let c = s.sample_increment(1.0, &mut rng).unwrap().cos();
            sum += c;
            sq += c * c;
        }
        let mean = sum / n as f64;
        let sd = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        let expect = (-1.0f64).exp();
        assert!(
            (mean - expect).abs() < 3.0 * sd,
            "mean {mean} vs {expect} (sd {sd})"
        );
    }

    #[test]
    fn characteristic_function_general_orders() {
        // E[cos(xi X_t)] = exp(-t scale |xi|^alpha).
        for (alpha, scale, t, xi) in [(0.6, 0.8, 1.3, 0.7), (1.4, 1.2, 0.5, 1.1f64)] {
            let s = StableSampler::new(alpha, scale).unwrap();
            let mut rng = crate::rng::substream(4, 0);
            let n = 400_000usize;
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..n {
                let c = (xi * s.sample_increment(t, &mut rng).unwrap()).cos();
                sum += c;
                sq += c * c;
            }
            let mean = sum / n as f64;
            let sd = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
            let expect = (-t * scale * xi.abs().powf(alpha)).exp();
            assert!(
                (mean - expect).abs() < 3.5 * sd,
                "alpha {alpha}: {mean} vs {expect}"
            );
        }
    }

    #[test]
    fn increment_additivity_two_halves() {
        let s = StableSampler::new(1.3, 1.0).unwrap();
        let n = 100_000usize;
        let mut rng = crate::rng::substream(5, 0);
        let mut whole: Vec<f64> = (0..n)
            .map(|_| s.sample_increment(1.0, &mut rng).unwrap())
            .collect();
        let mut halves: Vec<f64> = (0..n)
            .map(|_| {
                s.sample_increment(0.5, &mut rng).unwrap()
                    + s.sample_increment(0.5, &mut rng).unwrap()
            })
            .collect();
        let (_, p) = ks_two_sample(&mut whole, &mut halves);
        assert!(p > 0.01, "KS p-value {p}");
    }

    #[test]
    fn self_similarity_in_time() {
        // The time-c increment has the law of c^{1/alpha} times the unit one.
        let alpha = 0.9;
        let s = StableSampler::new(alpha, 1.0).unwrap();
        let n = 100_000usize;
        let c = 3.0f64;
        let mut rng = crate::rng::substream(6, 0);
        let mut direct: Vec<f64> = (0..n)
            .map(|_| s.sample_increment(c, &mut rng).unwrap())
            .collect();
        let mut scaled: Vec<f64> = (0..n)
            .map(|_| c.powf(1.0 / alpha) * s.sample_increment(1.0, &mut rng).unwrap())
            .collect();
        let (_, p) = ks_two_sample(&mut direct, &mut scaled);
        assert!(p > 0.01, "KS p-value {p}");
    }

    #[test]
    fn component_independence_by_correlation() {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        let ensemble = PathEnsemble::new(&ev, &[1.0, 1.0], 100_000, 7).unwrap();
        let n = ensemble.path_count();
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let z = ensemble.displacement(i, 1.0).unwrap();
            sx += z[0];
            sy += z[1];
            sxx += z[0] * z[0];
            syy += z[1] * z[1];
            sxy += z[0] * z[1];
        }
        let nf = n as f64;
        let corr = (sxy / nf - sx / nf * sy / nf)
            / ((sxx / nf - (sx / nf).powi(2)).sqrt() * (syy / nf - (sy / nf).powi(2)).sqrt());
        assert!(corr.abs() < 3.0 / nf.sqrt(), "corr {corr}");
    }

    #[test]
    fn estimate_constant_and_initial_data() {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        let probes = vec![vec![0.0, 0.0], vec![1.0, -2.0]];
        let est = estimate_solution(&|_| 1.0, &ev, &[1.0, 1.0], 0.7, &probes, 5000, 11).unwrap();
        for e in &est {
            assert_eq!(e.value, 1.0);
            assert_eq!(e.std_error, 0.0);
        }
        let g = |x: &[f64]| x[0] * x[0] - x[1];
        let est = estimate_solution(&g, &ev, &[1.0, 1.0], 0.0, &probes, 10, 11).unwrap();
        for (e, x) in est.iter().zip(&probes) {
            assert_eq!(e.value, g(x));
        }
    }

    #[test]
    fn estimate_matches_single_mode_decay() {
        // g = cos(x_1) with c_1 = 1: u(t, x) = e^{-t} cos(x_1).
        let ev = ExponentVector::isotropic(1, 1.0).unwrap();
        let probes = vec![vec![0.0], vec![0.9]];
        let t = 0.8;
        let est =
            estimate_solution(&|x| x[0].cos(), &ev, &[1.0], t, &probes, 400_000, 13).unwrap();
        for (e, x) in est.iter().zip(&probes) {
            let expect = (-t).exp() * x[0].cos();
            assert!(
                (e.value - expect).abs() < 3.0 * e.std_error,
                "{} vs {expect} (se {})",
                e.value,
                e.std_error
            );
        }
    }

    #[test]
    fn monte_carlo_agrees_with_spectral_evolution() {
        for (s, alphas) in [
            (0u64, vec![1.0, 1.0]),
            (1, vec![0.5, 1.5]),
            (2, vec![1.9, 1.9]),
        ]
        .into_iter()
        {
            let ev = ExponentVector::new(&alphas, 0.4).unwrap();
            let coeffs = crate::spectral::axes_matched_coefficients(&ev);
            let field = SpectralField::random_real(16.0, 6, 4, &ev, &coeffs, 1000 + s).unwrap();
            let mut rng = crate::rng::substream(2000 + s, 0);
            let probes: Vec<Vec<f64>> = (0..20)
                .map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            for t in [0.1, 1.0] {
                let exact = field.evolve(t).unwrap();
                let est = estimate_solution(
                    &|x| field.eval_at(x),
                    &ev,
                    &coeffs,
                    t,
                    &probes,
                    30_000,
                    3000 + s,
                )
                .unwrap();
                for (e, x) in est.iter().zip(&probes) {
                    let expect = exact.eval_at(x);
                    assert!(
                        (e.value - expect).abs() < 3.0 * e.std_error.max(1e-4),
                        "alpha {alphas:?} t {t}: {} vs {expect} (se {})",
                        e.value,
                        e.std_error
                    );
                }
            }
        }
    }

    #[test]
    fn harnack_ratio_constant_field() {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        let coeffs = [1.0, 1.0];
        let mut f = SpectralField::zeros(16.0, 4, &ev, &coeffs).unwrap();
        f.set_mode_symmetric(&[0, 0], Complex64::new(1.0, 0.0));
        let sol = SemigroupSolution::new(f, -1.0);
        let rep = harnack_ratio(&sol, 0.0, &ev, &[17, 17], 8).unwrap();
        let early = Cylinder::harnack_early(&ev).unwrap();
        assert_relative_eq!(rep.l1_early, early.volume(), max_relative = 1e-9);
        assert_relative_eq!(rep.inf_late, 1.0, max_relative = 1e-12);
        assert_relative_eq!(rep.ratio, early.volume(), max_relative = 1e-9);
    }

    #[test]
    fn harnack_ratio_scale_invariant_without_forcing() {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        let coeffs = crate::spectral::axes_matched_coefficients(&ev);
        let f = SpectralField::random_nonnegative(16.0, 12, 5, &ev, &coeffs, 31, 0.05).unwrap();
        let mut doubled = f.clone();
        for m in doubled.modes_mut() {
            *m *= 2.0;
        }
        let r1 = harnack_ratio(&SemigroupSolution::new(f, -1.0), 0.0, &ev, &[13, 13], 6).unwrap();
        let r2 = harnack_ratio(
            &SemigroupSolution::new(doubled, -1.0),
            0.0,
            &ev,
            &[13, 13],
            6,
        )
        .unwrap();
        assert_relative_eq!(r1.ratio, r2.ratio, max_relative = 1e-9);
    }

    #[test]
    fn harnack_rejects_negative_fields() {
        let ev = ExponentVector::new(&[1.0, 1.0], 0.5).unwrap();
        let mut f = SpectralField::zeros(16.0, 4, &ev, &[1.0, 1.0]).unwrap();
        // An odd mode changes sign inside the observation windows.
        f.set_mode_symmetric(&[1, 0], Complex64::new(0.0, -0.5));
        let sol = SemigroupSolution::new(f, -1.0);
        assert!(harnack_ratio(&sol, 0.0, &ev, &[13, 13], 6).is_err());
    }

    #[test]
    fn oscillation_constant_field_degenerates() {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        let mut f = SpectralField::zeros(16.0, 4, &ev, &[1.0, 1.0]).unwrap();
        f.set_mode_symmetric(&[0, 0], Complex64::new(2.0, 0.0));
        let sol = SemigroupSolution::new(f, -2.0);
        let rep = oscillation_decay(&sol, &ev, 3, &[9, 9], 5).unwrap();
        assert!(rep.oscillations.iter().all(|o| o.abs() < 1e-12));
        assert!(rep.fitted_gamma.is_none());
        assert!(rep.monotone);
    }

    #[test]
    fn oscillation_decays_for_rough_data() {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        let coeffs = crate::spectral::axes_matched_coefficients(&ev);
        for s in 0..3u64 {
            let f = SpectralField::random_real(16.0, 10, 8, &ev, &coeffs, 71 + s).unwrap();
            let sol = SemigroupSolution::new(f, -2.0);
            let rep = oscillation_decay(&sol, &ev, 3, &[11, 11], 5).unwrap();
            assert!(rep.monotone, "oscillations {:?}", rep.oscillations);
            let g = rep.fitted_gamma.unwrap();
            assert!(g > 0.0, "gamma {g} oscillations {:?}", rep.oscillations);
        }
    }

    #[test]
    fn holder_quotient_constant_and_saturation() {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        let coeffs = crate::spectral::axes_matched_coefficients(&ev);
        let mut f = SpectralField::zeros(16.0, 4, &ev, &coeffs).unwrap();
        f.set_mode_symmetric(&[0, 0], Complex64::new(1.5, 0.0));
        let sol = SemigroupSolution::new(f, -2.0);
        let window = Cylinder::osc_domain(0.5, &ev).unwrap();
        let rep = holder_quotient(&sol, &ev, &window, 0.4, 2000, &[9, 9], 5, 1.5, 3).unwrap();
        assert_eq!(rep.max_quotient, 0.0);
        // Saturation: tenfold pairs moves the maximum by less than 2.
        let g = SpectralField::random_real(16.0, 8, 6, &ev, &coeffs, 91).unwrap();
        let sol = SemigroupSolution::new(g, -2.0);
        let sup = sol.sup_bound(64).unwrap();
        let a = holder_quotient(&sol, &ev, &window, 0.4, 2_000, &[9, 9], 5, sup, 5).unwrap();
        let b = holder_quotient(&sol, &ev, &window, 0.4, 20_000, &[9, 9], 5, sup, 5).unwrap();
        assert!(b.max_quotient >= a.max_quotient);
        assert!(b.max_quotient / a.max_quotient < 2.0);
        assert!(b.eta.is_finite() && b.eta > 0.0);
    }

    #[test]
    fn lipschitz_field_has_finite_quotient_for_small_gamma() {
        // A single low mode is Lipschitz in space-time on the window; any
        // gamma <= 1 yields a finite quotient.
        let ev = ExponentVector::isotropic(2, 1.0).unwrap();
        let mut f = SpectralField::zeros(16.0, 4, &ev, &[1.0, 1.0]).unwrap();
        f.set_mode_symmetric(&[1, 0], Complex64::new(0.5, 0.0));
        f.set_mode_symmetric(&[0, 0], Complex64::new(1.0, 0.0));
        let sol = SemigroupSolution::new(f, -2.0);
        let window = Cylinder::osc_domain(0.5, &ev).unwrap();
        for gamma in [0.3, 1.0] {
            let rep =
                holder_quotient(&sol, &ev, &window, gamma, 5000, &[9, 9], 5, 1.5, 7).unwrap();
            assert!(rep.max_quotient.is_finite());
        }
    }

    #[test]
    fn ks_detects_distinct_distributions() {
        let mut a: Vec<f64> = (0..20_000)
            .map(|i| {
                let mut rng = crate::rng::substream(201, i);
                rng.random_range(0.0..1.0)
            })
            .collect();
        let mut b: Vec<f64> = (0..20_000)
            .map(|i| {
                let mut rng = crate::rng::substream(202, i);
                rng.random_range(0.0..1.0f64).powi(2)
            })
            .collect();
        let (_, p) = ks_two_sample(&mut a, &mut b);
        assert!(p < 1e-6);
        let mut c: Vec<f64> = (0..20_000)
            .map(|i| {
                let mut rng = crate::rng::substream(203, i);
                rng.random_range(0.0..1.0)
            })
            .collect();
        let mut d: Vec<f64> = (0..20_000)
            .map(|i| {
                let mut rng = crate::rng::substream(204, i);
                rng.random_range(0.0..1.0)
            })
            .collect();
        let (_, p) = ks_two_sample(&mut c, &mut d);
        assert!(p > 0.01, "p {p}");
    }

    #[test]
    fn displacement_reproducible() {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        let e1 = PathEnsemble::new(&ev, &[1.0, 1.0], 10, 99).unwrap();
        let e2 = PathEnsemble::new(&ev, &[1.0, 1.0], 10, 99).unwrap();
        for i in 0..10 {
            assert_eq!(
                e1.displacement(i, 0.5).unwrap(),
                e2.displacement(i, 0.5).unwrap()
            );
        }
        assert!(period_cube(16.0, 2).unwrap().volume() > 0.0);
    }
}
