//! Cell-centered tensor grids over anisotropic boxes.
//!
//! A [`GridFunction`] stores one value per cell of a uniform tensor grid.
//! Values outside the box are supplied by an extension rule; the explicit
//! variant reads from a larger host field (used for periodic solutions
//! sampled on a sub-box of their period).

use crate::geometry::AnisoBox;
use crate::{Error, Result};
use std::io::{BufRead, Write};

/// Rule supplying values outside the grid box.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ExteriorExtension {
    /// Zero outside the box.
    #[default]
    Zero,
    /// Wrap the box contents periodically.
    Periodic,
    /// Read from a larger host grid (nearest cell).
    Explicit(Box<GridFunction>),
}

/// Values of a function on the cells of a tensor grid over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    boxd: AnisoBox,
    resolution: Vec<usize>,
    values: Vec<f64>,
    exterior: ExteriorExtension,
}

impl GridFunction {
    /// Allocates a zero function with the given per-axis cell counts.
    pub fn zeros(boxd: &AnisoBox, resolution: &[usize]) -> Result<Self> {
        if resolution.len() != boxd.dim() {
            return Err(Error::GridMismatch(format!(
                "resolution has {} axes, box has {}",
                resolution.len(),
                boxd.dim()
            )));
        }
        if resolution.iter().any(|&n| n < 2) {
            return Err(Error::param("resolution", "needs at least 2 cells per axis"));
        }
        let n: usize = resolution.iter().product();
        Ok(GridFunction {
            boxd: boxd.clone(),
            resolution: resolution.to_vec(),
            values: vec![0.0; n],
            exterior: ExteriorExtension::Zero,
        })
    }

    /// Fills a grid by evaluating `f` at cell centers.
    pub fn from_fn(
        boxd: &AnisoBox,
        resolution: &[usize],
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self> {
        let mut g = Self::zeros(boxd, resolution)?;
        let mut idx = vec![0usize; g.dim()];
        for flat in 0..g.len() {
            g.unflatten(flat, &mut idx);
            let x = g.center_of(&idx);
            g.values[flat] = f(&x);
        }
        Ok(g)
    }

    pub fn with_exterior(mut self, exterior: ExteriorExtension) -> Self {
        self.exterior = exterior;
        self
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn box_domain(&self) -> &AnisoBox {
        &self.boxd
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn exterior(&self) -> &ExteriorExtension {
        &self.exterior
    }

    /// Cell width along `axis`.
    pub fn cell_width(&self, axis: usize) -> f64 {
        2.0 * self.boxd.half_width(axis) / self.resolution[axis] as f64
    }

    /// Volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.cell_width(k)).product()
    }

    /// Center coordinate of cell `i` along `axis`.
    pub fn center_coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, _) = self.boxd.side(axis);
        lo + (i as f64 + 0.5) * self.cell_width(axis)
    }

    /// Center of the cell with the given multi-index.
    pub fn center_of(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| self.center_coord(k, i))
            .collect()
    }

    /// Row-major flattening, first axis fastest.
    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for k in (0..self.dim()).rev() {
            flat = flat * self.resolution[k] + idx[k];
        }
        flat
    }

    pub fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for (i, n) in idx.iter_mut().zip(&self.resolution) {
            *i = flat % n;
            flat /= n;
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let flat = self.flatten(idx);
        self.values[flat] = v;
    }

    /// Cell index of a point in the closed box (clamped to valid cells).
    fn clamped_index(&self, k: usize, coord: f64) -> usize {
        let (lo, _) = self.boxd.side(k);
        let i = ((coord - lo) / self.cell_width(k)).floor() as isize;
        (i.max(0) as usize).min(self.resolution[k] - 1)
    }

    /// Value at an arbitrary point: the containing cell inside the box, the
    /// extension rule outside.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        if self.boxd.contains(x) {
            let idx: Vec<usize> = (0..self.dim()).map(|k| self.clamped_index(k, x[k])).collect();
            return self.get(&idx);
        }
        match &self.exterior {
            ExteriorExtension::Zero => 0.0,
            ExteriorExtension::Periodic => {
                let idx: Vec<usize> = (0..self.dim())
                    .map(|k| {
                        let (lo, hi) = self.boxd.side(k);
                        let wrapped = (x[k] - lo).rem_euclid(hi - lo) + lo;
                        self.clamped_index(k, wrapped)
                    })
                    .collect();
                self.get(&idx)
            }
            ExteriorExtension::Explicit(host) => host.value_at(x),
        }
    }

    /// Mean value over the box.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// `L^p` norm over the box (midpoint quadrature).
    pub fn lp_norm(&self, p: f64) -> f64 {
        let vol = self.cell_volume();
        (self
            .values
            .iter()
            .map(|v| v.abs().powf(p))
            .sum::<f64>()
            * vol)
            .powf(1.0 / p)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes the versioned CSV format: a schema comment, one header row
    /// with the grid geometry, then one value per line, first axis fastest.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# aniso-grid csv v1; column order: x1 fastest")?;
        write!(w, "dim={}", self.dim())?;
        write!(
            w,
            ",resolution={}",
            self.resolution
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join("/")
        )?;
        write!(
            w,
            ",center={}",
            self.boxd
                .center()
                .iter()
                .map(|c| format!("{c:.17e}"))
                .collect::<Vec<_>>()
                .join("/")
        )?;
        write!(w, ",radius={:.17e}", self.boxd.radius())?;
        write!(
            w,
            ",alphas={}",
            self.boxd
                .exponents()
                .alphas()
                .iter()
                .map(|a| format!("{a:.17e}"))
                .collect::<Vec<_>>()
                .join("/")
        )?;
        writeln!(w, ",alpha0={:.17e}", self.boxd.exponents().alpha0())?;
        for v in &self.values {
            writeln!(w, "{v:.17e}")?;
        }
        Ok(())
    }

    /// Reads the CSV format written by [`GridFunction::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let parse_err = |what: &str| Error::GridMismatch(format!("csv parse: {what}"));
        let mut header = String::new();
        for line in lines.by_ref() {
            let line = line.map_err(|e| parse_err(&e.to_string()))?;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            header = line;
            break;
        }
        let mut dim = 0usize;
        let mut resolution = Vec::new();
        let mut center = Vec::new();
        let mut radius = 0.0f64;
        let mut alphas = Vec::new();
        let mut alpha0 = 0.0f64;
        for field in header.split(',') {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| parse_err("missing '='"))?;
            match key {
                "dim" => dim = val.parse().map_err(|_| parse_err("dim"))?,
                "resolution" => {
                    resolution = val
                        .split('/')
                        .map(|s| s.parse().map_err(|_| parse_err("resolution")))
                        .collect::<Result<_>>()?
                }
                "center" => {
                    center = val
                        .split('/')
                        .map(|s| s.parse().map_err(|_| parse_err("center")))
                        .collect::<Result<_>>()?
                }
                "radius" => radius = val.parse().map_err(|_| parse_err("radius"))?,
                "alphas" => {
                    alphas = val
                        .split('/')
                        .map(|s| s.parse().map_err(|_| parse_err("alphas")))
                        .collect::<Result<_>>()?
                }
                "alpha0" => alpha0 = val.parse().map_err(|_| parse_err("alpha0"))?,
                _ => return Err(parse_err(&format!("unknown key {key}"))),
            }
        }
        if dim == 0 || resolution.len() != dim || center.len() != dim || alphas.len() != dim {
            return Err(parse_err("inconsistent header"));
        }
        let ev = crate::geometry::ExponentVector::new(&alphas, alpha0)?;
        let boxd = crate::geometry::aniso_box(&center, radius, &ev)?;
        let mut g = GridFunction::zeros(&boxd, &resolution)?;
        let mut count = 0usize;
        for line in lines {
            let line = line.map_err(|e| parse_err(&e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            if count >= g.len() {
                return Err(parse_err("too many values"));
            }
            g.values[count] = line.trim().parse().map_err(|_| parse_err("value"))?;
            count += 1;
        }
        if count != g.len() {
            return Err(parse_err("too few values"));
        }
        Ok(g)
    }
}

/// A function sampled at a list of times, one spatial grid per time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGridFunction {
    pub times: Vec<f64>,
    pub slices: Vec<GridFunction>,
}

impl TimeGridFunction {
    pub fn new(times: Vec<f64>, slices: Vec<GridFunction>) -> Result<Self> {
        if times.len() != slices.len() || times.len() < 2 {
            return Err(Error::GridMismatch(
                "need at least two matching time slices".into(),
            ));
        }
        Ok(TimeGridFunction { times, slices })
    }

    /// Time derivative at slice `i` by centered differences, one-sided at
    /// the endpoints.
    pub fn time_derivative(&self, i: usize) -> Vec<f64> {
        let n = self.times.len();
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        let dt = self.times[b] - self.times[a];
        self.slices[b]
            .values()
            .iter()
            .zip(self.slices[a].values())
            .map(|(vb, va)| (vb - va) / dt)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{aniso_box, AnisoBox, ExponentVector};
    use approx::assert_relative_eq;

    fn test_box() -> AnisoBox {
        let ev = ExponentVector::new(&[1.0, 1.5], 0.5).unwrap();
        aniso_box(&[0.25, -0.5], 0.75, &ev).unwrap()
    }

    #[test]
    fn centers_and_volumes() {
        let b = test_box();
        let g = GridFunction::zeros(&b, &[4, 3]).unwrap();
        let (lo, hi) = b.side(0);
        assert_relative_eq!(g.center_coord(0, 0), lo + (hi - lo) / 8.0);
        assert_relative_eq!(
            g.cell_volume() * 12.0,
            b.volume(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn from_fn_evaluates_at_centers() {
        let b = test_box();
        let g = GridFunction::from_fn(&b, &[5, 5], |x| x[0] + 2.0 * x[1]).unwrap();
        let idx = [2usize, 3usize];
        let c = g.center_of(&idx);
        assert_relative_eq!(g.get(&idx), c[0] + 2.0 * c[1], max_relative = 1e-12);
    }

    #[test]
    fn flatten_first_axis_fastest() {
        let b = test_box();
        let g = GridFunction::zeros(&b, &[4, 3]).unwrap();
        assert_eq!(g.flatten(&[0, 0]), 0);
        assert_eq!(g.flatten(&[1, 0]), 1);
        assert_eq!(g.flatten(&[0, 1]), 4);
        let mut idx = [0usize; 2];
        g.unflatten(7, &mut idx);
        assert_eq!(idx, [3, 1]);
    }

    #[test]
    fn exterior_rules() {
        let b = test_box();
        let g = GridFunction::from_fn(&b, &[4, 4], |x| x[0]).unwrap();
        let outside = [10.0, 0.0];
        assert_eq!(g.value_at(&outside), 0.0);
        let gp = g.clone().with_exterior(ExteriorExtension::Periodic);
        let (lo, hi) = b.side(0);
        let span = hi - lo;
        let inside = [0.3, -0.5];
        let shifted = [0.3 + span, -0.5];
        assert_relative_eq!(gp.value_at(&shifted), gp.value_at(&inside));
        // Explicit host: read values from a larger field.
        let ev = b.exponents().clone();
        let host_box = aniso_box(b.center(), 3.0, &ev).unwrap();
        let host = GridFunction::from_fn(&host_box, &[64, 64], |x| x[1]).unwrap();
        let ge = g.with_exterior(ExteriorExtension::Explicit(Box::new(host)));
        let far = [b.center()[0] + 2.0, b.center()[1]];
        assert_relative_eq!(ge.value_at(&far), b.center()[1], epsilon = 0.1);
    }

    #[test]
    fn csv_round_trip() {
        let b = test_box();
        let g = GridFunction::from_fn(&b, &[6, 5], |x| (x[0] * 3.1).sin() * x[1]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let g2 = GridFunction::read_csv(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(g.resolution(), g2.resolution());
        assert_eq!(g.values(), g2.values());
        assert_relative_eq!(g.box_domain().radius(), g2.box_domain().radius());
    }

    #[test]
    fn rejects_degenerate_resolution() {
        let b = test_box();
        assert!(GridFunction::zeros(&b, &[1, 4]).is_err());
        assert!(GridFunction::zeros(&b, &[4]).is_err());
    }

    #[test]
    fn time_derivative_centered_and_one_sided() {
        let b = test_box();
        let times = vec![0.0, 0.1, 0.2];
        let slices: Vec<GridFunction> = times
            .iter()
            .map(|&t| GridFunction::from_fn(&b, &[3, 3], |_| t * t).unwrap())
            .collect();
        let u = TimeGridFunction::new(times, slices).unwrap();
        // d/dt t^2 = 2t; centered at t = 0.1 exact.
        assert_relative_eq!(u.time_derivative(1)[0], 0.2, max_relative = 1e-10);
        // One-sided at the ends.
        assert_relative_eq!(u.time_derivative(0)[0], 0.1, max_relative = 1e-10);
        assert_relative_eq!(u.time_derivative(2)[0], 0.3, max_relative = 1e-10);
    }
}
