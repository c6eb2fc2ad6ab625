//! Discrete Dirichlet forms on tensor grids.
//!
//! Axis-supported measures reduce to sums over cell pairs aligned on one
//! axis; the per-pair weight is the exact integral of the 1-d kernel over
//! the partner cell seen from the cell center, so no quadrature error
//! enters through the singular directions. Absolutely continuous kernels
//! use midpoint kernel values per cell pair, with a 2x2 subdivision for
//! pairs within one cell of each other; same-cell pairs are skipped.

use super::grid::GridFunction;
use crate::geometry::ExponentVector;
use crate::kernels::{cusp_kernel, CuspParams, JumpMeasure, MeasureFamily};
use crate::{Error, Result};
use rayon::prelude::*;

/// Exact integral of `(2-alpha)|s|^{-1-alpha}` over the interval at
/// distances `[a, b]` from the evaluation point, `0 < a < b`.
fn axis_cell_integral(a: f64, b: f64, alpha: f64) -> f64 {
    (2.0 - alpha) / alpha * (a.powf(-alpha) - b.powf(-alpha))
}

/// Per-axis tables of pair weights by index offset.
#[derive(Debug, Clone)]
struct AxisWeights {
    /// `weights[k][m-1]` is the kernel integral for offset `m` on axis `k`.
    weights: Vec<Vec<f64>>,
}

fn axis_weights_for(
    ev: &ExponentVector,
    betas: Option<&[f64]>,
    grid: &GridFunction,
) -> AxisWeights {
    let d = grid.dim();
    let mut weights = Vec::with_capacity(d);
    for k in 0..d {
        let h = grid.cell_width(k);
        let n = grid.resolution()[k];
        let alpha = ev.alpha(k);
        let mut per_axis = Vec::with_capacity(n.saturating_sub(1));
        for m in 1..n {
            let dist = m as f64 * h;
            let mut w = axis_cell_integral(dist - 0.5 * h, dist + 0.5 * h, alpha);
            if let Some(bs) = betas {
                w += axis_cell_integral(dist - 0.5 * h, dist + 0.5 * h, bs[k]);
            }
            per_axis.push(w);
        }
        weights.push(per_axis);
    }
    AxisWeights { weights }
}

/// Dense table of kernel values by index offset for planar kernels.
#[derive(Debug, Clone)]
struct OffsetTable {
    n1: usize,
    n2: usize,
    /// Row-major over offsets `(d1 + n1 - 1, d2 + n2 - 1)`.
    values: Vec<f64>,
}

impl OffsetTable {
    #[inline]
    fn get(&self, d1: isize, d2: isize) -> f64 {
        let i1 = (d1 + self.n1 as isize - 1) as usize;
        let i2 = (d2 + self.n2 as isize - 1) as usize;
        self.values[i2 * (2 * self.n1 - 1) + i1]
    }
}

/// Planar kernel with optional region structure: `member` tests region
/// membership and `section_breaks` returns the ordinates (absolute values)
/// where the region boundary crosses a vertical line, used as quadrature
/// breakpoints.
struct PlanarKernel<'a> {
    kernel: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    member: Option<&'a (dyn Fn(f64, f64) -> bool + Sync)>,
    section_breaks: Option<&'a (dyn Fn(f64) -> (f64, f64) + Sync)>,
}

/// Exact pair weight seen from the cell center: the kernel integrated over
/// the partner cell, divided by its area (the planar analogue of the axis
/// form's exact per-cell 1-d integrals). Finite for every nonzero offset
/// because the partner cell stays half a cell away from the singularity.
fn center_cell_integral(spec: &PlanarKernel, d1: isize, d2: isize, h1: f64, h2: f64) -> f64 {
    let c1 = d1 as f64 * h1;
    let c2 = d2 as f64 * h2;
    let (lo1, hi1) = (c1 - 0.5 * h1, c1 + 0.5 * h1);
    let (lo2, hi2) = (c2 - 0.5 * h2, c2 + 0.5 * h2);
    // Tolerances scale with the largest kernel magnitude seen across the
    // cell probes (entries span many orders of magnitude).
    let mut probe = 0.0f64;
    let mut look = |z1: f64, z2: f64| probe = probe.max((spec.kernel)(z1, z2).abs());
    for s1 in [-0.5, 0.0, 0.5] {
        for s2 in [-0.5, 0.0, 0.5] {
            look(c1 + s1 * h1, c2 + s2 * h2);
        }
    }
    if lo2 < 0.0 && hi2 > 0.0 {
        look(c1, 0.0);
    }
    if lo1 < 0.0 && hi1 > 0.0 {
        look(0.0, c2);
    }
    if probe == 0.0 {
        probe = 1.0;
    }
    let inner = |z1: f64| -> f64 {
        let mut breaks = vec![0.0];
        if let Some(sb) = spec.section_breaks {
            let (a, b) = sb(z1);
            breaks.extend_from_slice(&[a, -a, b, -b]);
        }
        crate::quad::integrate_split(
            |z2| (spec.kernel)(z1, z2),
            lo2,
            hi2,
            &breaks,
            1e-8 * probe * h2,
        )
        .value
    };
    let mut breaks = vec![0.0];
    // Hint the abscissas where the region boundary crosses the cell edges.
    if spec.section_breaks.is_some() {
        for e in [lo2.abs(), hi2.abs()] {
            let (a, b) = section_inverse_hints(spec, e);
            breaks.extend_from_slice(&[a, -a, b, -b]);
        }
    }
    crate::quad::integrate_split(inner, lo1, hi1, &breaks, 1e-7 * probe * h1 * h2).value
        / (h1 * h2)
}

/// Abscissas where the section ordinates reach the level `e` (found by
/// bisection on the monotone section bounds).
fn section_inverse_hints(spec: &PlanarKernel, e: f64) -> (f64, f64) {
    let sb = spec.section_breaks.expect("hints need sections");
    let invert = |pick: fn((f64, f64)) -> f64| -> f64 {
        let (mut lo, mut hi) = (1e-9f64, 1e9f64);
        for _ in 0..80 {
            let mid = (lo * hi).sqrt();
            if pick(sb(mid)) < e {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    (invert(|s| s.0), invert(|s| s.1))
}

/// True if region membership differs across the offset cell (corners and
/// center probed; the region boundaries are monotone within quadrants).
fn mixed_membership(spec: &PlanarKernel, d1: isize, d2: isize, h1: f64, h2: f64) -> bool {
    let member = match spec.member {
        Some(m) => m,
        None => return false,
    };
    let c1 = d1 as f64 * h1;
    let c2 = d2 as f64 * h2;
    let first = member(c1, c2);
    for s1 in [-0.5, 0.5] {
        for s2 in [-0.5, 0.5] {
            if member(c1 + s1 * h1, c2 + s2 * h2) != first {
                return true;
            }
        }
    }
    false
}

fn offset_table(n1: usize, n2: usize, h1: f64, h2: f64, spec: &PlanarKernel) -> OffsetTable {
    let w1 = 2 * n1 - 1;
    let w2 = 2 * n2 - 1;
    let entries: Vec<f64> = (0..w1 * w2)
        .into_par_iter()
        .map(|flat| {
            let i1 = flat % w1;
            let i2 = flat / w1;
            let d1 = i1 as isize - (n1 as isize - 1);
            let d2 = i2 as isize - (n2 as isize - 1);
            if d1 == 0 && d2 == 0 {
                return 0.0;
            }
            let near = d1.abs() <= 6 && d2.abs() <= 6;
            if near || mixed_membership(spec, d1, d2, h1, h2) {
                center_cell_integral(spec, d1, d2, h1, h2)
            } else {
                (spec.kernel)(d1 as f64 * h1, d2 as f64 * h2)
            }
        })
        .collect();
    OffsetTable {
        n1,
        n2,
        values: entries,
    }
}

#[derive(Debug, Clone)]
enum FormKind {
    /// Axis-aligned pair sums (reference and double-exponent families).
    Axis(AxisWeights),
    /// Planar table on the first two axes plus 1-d weights on the third.
    Split {
        table: OffsetTable,
        axis_weights: Vec<f64>,
        /// Planar cell area of the first two axes.
        area: f64,
    },
    /// Full planar table (cusp kernel), dimension 2.
    Planar(OffsetTable),
}

/// A discrete energy form bound to a measure family and a grid geometry.
///
/// Building the form precomputes all pair weights; evaluations are then
/// cheap and deterministic (sequential reductions in index order, with
/// parallelism only across independent rows).
#[derive(Debug, Clone)]
pub struct EnergyForm {
    kind: FormKind,
    resolution: Vec<usize>,
    cell_volume: f64,
    coefficient: crate::kernels::CoefficientField,
}

impl EnergyForm {
    pub fn new(mu: &JumpMeasure, template: &GridFunction) -> Result<Self> {
        if template.dim() != mu.dim() {
            return Err(Error::GridMismatch(format!(
                "grid dimension {} != measure dimension {}",
                template.dim(),
                mu.dim()
            )));
        }
        let ev = mu.exponents();
        let kind = match mu.family() {
            MeasureFamily::Axes => FormKind::Axis(axis_weights_for(ev, None, template)),
            MeasureFamily::DoubleExponent { betas } => {
                FormKind::Axis(axis_weights_for(ev, Some(betas), template))
            }
            MeasureFamily::Cusp(params) => {
                let p: CuspParams = params.clone();
                let kernel = move |z1: f64, z2: f64| -> f64 {
                    cusp_kernel(&[z1, z2], &p).unwrap_or(0.0)
                };
                let member = |z1: f64, z2: f64| -> bool {
                    crate::kernels::in_gamma(&[z1, z2], params)
                };
                let inv_b1 = 1.0 / params.b1;
                let b2 = params.b2;
                let section = move |z1: f64| -> (f64, f64) {
                    (z1.abs().powf(inv_b1), z1.abs().powf(b2))
                };
                FormKind::Planar(offset_table(
                    template.resolution()[0],
                    template.resolution()[1],
                    template.cell_width(0),
                    template.cell_width(1),
                    &PlanarKernel {
                        kernel: &kernel,
                        member: Some(&member),
                        section_breaks: Some(&section),
                    },
                ))
            }
            MeasureFamily::ProductStable { alpha, beta } => {
                let a = *alpha;
                let kernel = move |z1: f64, z2: f64| -> f64 {
                    (2.0 - a) * (z1 * z1 + z2 * z2).powf(-(2.0 + a) / 2.0)
                };
                let table = offset_table(
                    template.resolution()[0],
                    template.resolution()[1],
                    template.cell_width(0),
                    template.cell_width(1),
                    &PlanarKernel {
                        kernel: &kernel,
                        member: None,
                        section_breaks: None,
                    },
                );
                // Third axis carries the 1-d stable weights.
                let h3 = template.cell_width(2);
                let n3 = template.resolution()[2];
                let mut per_axis = Vec::with_capacity(n3 - 1);
                for m in 1..n3 {
                    let dist = m as f64 * h3;
                    per_axis.push(axis_cell_integral(dist - 0.5 * h3, dist + 0.5 * h3, *beta));
                }
                FormKind::Split {
                    table,
                    axis_weights: per_axis,
                    area: template.cell_width(0) * template.cell_width(1),
                }
            }
        };
        Ok(EnergyForm {
            kind,
            resolution: template.resolution().to_vec(),
            cell_volume: template.cell_volume(),
            coefficient: mu.coefficient().clone(),
        })
    }

    fn check_grid(&self, u: &GridFunction) -> Result<()> {
        if u.resolution() != self.resolution.as_slice() {
            return Err(Error::GridMismatch(format!(
                "expected resolution {:?}, got {:?}",
                self.resolution,
                u.resolution()
            )));
        }
        Ok(())
    }

    /// Spatially constant coefficient factor at time `t` (all provided
    /// coefficient fields are constant in space).
    pub fn coefficient_at(&self, t: f64) -> f64 {
        self.coefficient.eval(t, &[], &[])
    }

    /// Gradient of the quadratic form with respect to the cell values,
    /// available for axis-supported families.
    pub fn energy_gradient(&self, u: &GridFunction, t: f64, out: &mut [f64]) -> Result<()> {
        self.check_grid(u)?;
        let w = match &self.kind {
            FormKind::Axis(w) => w,
            _ => {
                return Err(Error::param(
                    "mu",
                    "energy gradient implemented for axis-supported families only",
                ))
            }
        };
        out.iter_mut().for_each(|v| *v = 0.0);
        let vals = u.values();
        for k in 0..u.dim() {
            let weights = &w.weights[k];
            let n_axis = u.resolution()[k];
            for_each_line(u.resolution(), k, |base, stride| {
                for i in 0..n_axis {
                    let vi = vals[base + i * stride];
                    for j in (i + 1)..n_axis {
                        let wj = weights[j - i - 1];
                        let diff = vi - vals[base + j * stride];
                        out[base + i * stride] += wj * diff;
                        out[base + j * stride] -= wj * diff;
                    }
                }
            });
        }
        let scale = 4.0 * self.cell_volume * self.coefficient_at(t);
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(())
    }

    /// The quadratic form `E(u, u)` at time `t`.
    pub fn quadratic(&self, u: &GridFunction, t: f64) -> Result<f64> {
        self.check_grid(u)?;
        let raw = match &self.kind {
            FormKind::Axis(w) => axis_quadratic(u, w, self.cell_volume),
            FormKind::Planar(table) => planar_quadratic(u, table, self.cell_volume),
            FormKind::Split {
                table,
                axis_weights,
                area,
            } => {
                split_planar_quadratic(u, table, self.cell_volume, *area)
                    + axis_quadratic_one(u, 2, axis_weights, self.cell_volume)
            }
        };
        Ok(self.coefficient_at(t) * raw)
    }

    /// The bilinear form `E(u, v)` at time `t`.
    pub fn bilinear(&self, u: &GridFunction, v: &GridFunction, t: f64) -> Result<f64> {
        self.check_grid(u)?;
        self.check_grid(v)?;
        Ok(self.coefficient_at(t) * self.pair_sum(&|i, j| (u.values()[i] - u.values()[j]) * (v.values()[i] - v.values()[j])))
    }

    /// Sum over ordered interacting cell pairs `(i, j)`, `i != j`, of
    /// `f(i, j)` times the pair kernel weight (volume factors included, the
    /// coefficient excluded). `f` is evaluated once per unordered pair and
    /// must be symmetric.
    pub fn pair_sum(&self, f: &(dyn Fn(usize, usize) -> f64 + Sync)) -> f64 {
        match &self.kind {
            FormKind::Axis(w) => {
                let mut total = 0.0;
                for k in 0..self.resolution.len() {
                    total += axis_pair_sum(&self.resolution, k, &w.weights[k], self.cell_volume, f);
                }
                total
            }
            FormKind::Planar(table) => planar_pair_sum(&self.resolution, table, self.cell_volume, f),
            FormKind::Split {
                table,
                axis_weights,
                area,
            } => {
                split_pair_sum(&self.resolution, table, self.cell_volume, *area, f)
                    + axis_pair_sum(&self.resolution, 2, axis_weights, self.cell_volume, f)
            }
        }
    }
}

/// Iterate lines along `axis` of a tensor grid, calling `g` with the flat
/// base index and stride of each line.
pub(crate) fn for_each_line(resolution: &[usize], axis: usize, mut g: impl FnMut(usize, usize)) {
    let d = resolution.len();
    let stride: usize = resolution[..axis].iter().product();
    let n_axis = resolution[axis];
    let total: usize = resolution.iter().product();
    let lines = total / n_axis;
    // Enumerate all cells whose index along `axis` is zero.
    let mut idx = vec![0usize; d];
    for _ in 0..lines {
        // Compute flat index of the line base.
        let mut flat = 0usize;
        for k in (0..d).rev() {
            flat = flat * resolution[k] + idx[k];
        }
        g(flat, stride);
        // Advance the transverse multi-index (skipping `axis`).
        for k in 0..d {
            if k == axis {
                continue;
            }
            idx[k] += 1;
            if idx[k] < resolution[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn axis_quadratic(u: &GridFunction, w: &AxisWeights, cell_volume: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..u.dim() {
        total += axis_quadratic_one(u, k, &w.weights[k], cell_volume);
    }
    total
}

fn axis_quadratic_one(u: &GridFunction, axis: usize, weights: &[f64], cell_volume: f64) -> f64 {
    let vals = u.values();
    let n_axis = u.resolution()[axis];
    let mut line_total = 0.0;
    for_each_line(u.resolution(), axis, |base, stride| {
        let mut acc = 0.0;
        for i in 0..n_axis {
            let vi = vals[base + i * stride];
            for j in (i + 1)..n_axis {
                let diff = vi - vals[base + j * stride];
                acc += diff * diff * weights[j - i - 1];
            }
        }
        line_total += acc;
    });
    // Ordered pairs double the (i < j) sum; the outer midpoint rule carries
    // one cell volume.
    2.0 * cell_volume * line_total
}

fn axis_pair_sum(
    resolution: &[usize],
    axis: usize,
    weights: &[f64],
    cell_volume: f64,
    f: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    let n_axis = resolution[axis];
    let mut total = 0.0;
    for_each_line(resolution, axis, |base, stride| {
        for i in 0..n_axis {
            for j in (i + 1)..n_axis {
                total += f(base + i * stride, base + j * stride) * weights[j - i - 1];
            }
        }
    });
    2.0 * cell_volume * total
}

fn planar_quadratic(u: &GridFunction, table: &OffsetTable, cell_volume: f64) -> f64 {
    let n1 = u.resolution()[0];
    let n2 = u.resolution()[1];
    let vals = u.values();
    let w1 = 2 * n1 - 1;
    // Parallel over target rows; each row reduces sequentially and rows are
    // summed in index order.
    let row_sums: Vec<f64> = (0..n2)
        .into_par_iter()
        .map(|i2| {
            let mut acc = 0.0;
            for j2 in 0..n2 {
                let trow = (j2 + n2 - 1 - i2) * w1;
                let urow = i2 * n1;
                let vrow = j2 * n1;
                for i1 in 0..n1 {
                    let ui = vals[urow + i1];
                    let tbase = trow + n1 - 1 - i1;
                    let vs = &vals[vrow..vrow + n1];
                    let ts = &table.values[tbase..tbase + n1];
                    let mut row_acc = 0.0;
                    for (vj, tv) in vs.iter().zip(ts) {
                        let diff = ui - vj;
                        row_acc += diff * diff * tv;
                    }
                    acc += row_acc;
                }
            }
            acc
        })
        .collect();
    // Each unordered pair is visited twice in the full double loop.
    cell_volume * cell_volume * row_sums.iter().sum::<f64>()
}

fn planar_pair_sum(
    resolution: &[usize],
    table: &OffsetTable,
    cell_volume: f64,
    f: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    let n1 = resolution[0];
    let n2 = resolution[1];
    let mut total = 0.0;
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let i = i2 * n1 + i1;
            for j2 in 0..n2 {
                for j1 in 0..n1 {
                    let j = j2 * n1 + j1;
                    if j <= i {
                        continue;
                    }
                    let w = table.get(i1 as isize - j1 as isize, i2 as isize - j2 as isize);
                    total += 2.0 * f(i, j) * w;
                }
            }
        }
    }
    cell_volume * cell_volume * total
}

/// Planar pairs of the split family: same third index, table weight on the
/// first two axes. The inner 1-d integral over the plane is 2-d, so the
/// midpoint rule carries cell areas; the transverse direction contributes
/// its width through the outer cell volume.
fn split_planar_quadratic(
    u: &GridFunction,
    table: &OffsetTable,
    cell_volume: f64,
    area: f64,
) -> f64 {
    let n1 = u.resolution()[0];
    let n2 = u.resolution()[1];
    let n3 = u.resolution()[2];
    let vals = u.values();
    let plane = n1 * n2;
    let mut total = 0.0;
    for i3 in 0..n3 {
        let base = i3 * plane;
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                let ui = vals[base + i2 * n1 + i1];
                for j2 in 0..n2 {
                    for j1 in 0..n1 {
                        if j1 == i1 && j2 == i2 {
                            continue;
                        }
                        let diff = ui - vals[base + j2 * n1 + j1];
                        total += diff
                            * diff
                            * table.get(i1 as isize - j1 as isize, i2 as isize - j2 as isize);
                    }
                }
            }
        }
    }
    cell_volume * area * total
}

fn split_pair_sum(
    resolution: &[usize],
    table: &OffsetTable,
    cell_volume: f64,
    area: f64,
    f: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    let n1 = resolution[0];
    let n2 = resolution[1];
    let n3 = resolution[2];
    let plane = n1 * n2;
    let mut total = 0.0;
    for i3 in 0..n3 {
        let base = i3 * plane;
        for a in 0..plane {
            for b in (a + 1)..plane {
                let (i1, i2) = (a % n1, a / n1);
                let (j1, j2) = (b % n1, b / n1);
                let w = table.get(i1 as isize - j1 as isize, i2 as isize - j2 as isize);
                total += 2.0 * f(base + a, base + b) * w;
            }
        }
    }
    total * cell_volume * area
}

/// One-shot quadratic energy of `u` for the reference family.
pub fn energy_axes(u: &GridFunction, ev: &ExponentVector) -> Result<f64> {
    let mu = JumpMeasure::axes(ev);
    EnergyForm::new(&mu, u)?.quadratic(u, 0.0)
}

/// Sub-cell completion of the reference-family energy: the same-cell
/// contribution reconstructed from per-cell slopes (centered differences,
/// one-sided at the boundary). The exact kernel moment of a linear profile
/// over one cell is `2 s^2 h^{3-alpha}/(3-alpha)` per axis, which restores
/// the below-grid energy mass that dominates as an order approaches 2 and
/// scales exactly like the pair sum under the parabolic rescaling.
pub fn subcell_energy_axes(u: &GridFunction, ev: &ExponentVector) -> Result<f64> {
    if u.dim() != ev.dim() {
        return Err(Error::GridMismatch("grid/exponent dimension".into()));
    }
    let vals = u.values();
    let mut total = 0.0;
    for k in 0..u.dim() {
        let h = u.cell_width(k);
        let alpha = ev.alpha(k);
        let n_axis = u.resolution()[k];
        let trans = u.cell_volume() / h;
        let moment = 2.0 * h.powf(3.0 - alpha) / (3.0 - alpha);
        let mut axis_sum = 0.0;
        for_each_line(u.resolution(), k, |base, stride| {
            for i in 0..n_axis {
                let (a, b, span) = if i == 0 {
                    (i, i + 1, h)
                } else if i + 1 == n_axis {
                    (i - 1, i, h)
                } else {
                    (i - 1, i + 1, 2.0 * h)
                };
                let slope = (vals[base + b * stride] - vals[base + a * stride]) / span;
                axis_sum += slope * slope;
            }
        });
        total += axis_sum * moment * trans;
    }
    Ok(total)
}

/// One-shot quadratic energy of `u` for a general family at time `t`.
pub fn energy_general(u: &GridFunction, mu: &JumpMeasure, t: f64) -> Result<f64> {
    EnergyForm::new(mu, u)?.quadratic(u, t)
}

/// Extremal ratios of a comparability experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparabilityReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    /// Samples whose reference energy vanished (skipped).
    pub skipped: usize,
}

/// Ratio `E^mu / E^axes` over random nonconstant grid functions: half
/// smooth random Fourier data, half random piecewise-constant blocks.
pub fn comparability_ratio(
    mu: &JumpMeasure,
    omega: &crate::geometry::AnisoBox,
    resolution: &[usize],
    sample_count: usize,
    seed: u64,
) -> Result<ComparabilityReport> {
    if sample_count == 0 {
        return Err(Error::param("sample_count", "must be at least 1"));
    }
    let template = GridFunction::zeros(omega, resolution)?;
    let general = EnergyForm::new(mu, &template)?;
    let axes_mu = JumpMeasure::axes(mu.exponents());
    let axes = EnergyForm::new(&axes_mu, &template)?;
    let results: Vec<Option<f64>> = (0..sample_count)
        .into_par_iter()
        .map(|s| {
            let u = random_test_function(omega, resolution, seed, s as u64).ok()?;
            let denom = axes.quadratic(&u, 0.0).ok()?;
            if denom <= 0.0 {
                return None;
            }
            let numer = general.quadratic(&u, 0.0).ok()?;
            Some(numer / denom)
        })
        .collect();
    let mut ratios = Vec::new();
    let mut skipped = 0usize;
    for r in results {
        match r {
            Some(v) => ratios.push(v),
            None => skipped += 1,
        }
    }
    if ratios.is_empty() {
        return Err(Error::Degenerate("all samples had zero reference energy".into()));
    }
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparabilityReport {
        min_ratio,
        max_ratio,
        ratios,
        skipped,
    })
}

/// Deterministic random test function: even samples are band-limited
/// Fourier data, odd samples are piecewise-constant blocks.
pub fn random_test_function(
    omega: &crate::geometry::AnisoBox,
    resolution: &[usize],
    seed: u64,
    sample: u64,
) -> Result<GridFunction> {
    use rand::Rng;
    let mut rng = crate::rng::substream(seed, 0x632980 + sample);
    let d = omega.dim();
    if sample.is_multiple_of(2) {
        let modes = 6usize;
        let mut freqs = Vec::new();
        for _ in 0..modes {
            let k: Vec<f64> = (0..d).map(|_| rng.random_range(0..5) as f64).collect();
            let amp: f64 = rng.random_range(-1.0..1.0);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            freqs.push((k, amp, phase));
        }
        let spans: Vec<(f64, f64)> = (0..d).map(|k| omega.side(k)).collect();
        GridFunction::from_fn(omega, resolution, move |x| {
            freqs
                .iter()
                .map(|(k, amp, phase)| {
                    let arg: f64 = (0..d)
                        .map(|j| {
                            let (lo, hi) = spans[j];
                            std::f64::consts::TAU * k[j] * (x[j] - lo) / (hi - lo)
                        })
                        .sum();
                    amp * (arg + phase).cos()
                })
                .sum()
        })
    } else {
        let blocks = 4usize;
        let mut levels = vec![0.0; blocks.pow(d as u32)];
        for v in levels.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let spans: Vec<(f64, f64)> = (0..d).map(|k| omega.side(k)).collect();
        GridFunction::from_fn(omega, resolution, move |x| {
            let mut idx = 0usize;
            for j in (0..d).rev() {
                let (lo, hi) = spans[j];
                let cell = (((x[j] - lo) / (hi - lo) * blocks as f64) as usize).min(blocks - 1);
                idx = idx * blocks + cell;
            }
            levels[idx]
        })
    }
}
