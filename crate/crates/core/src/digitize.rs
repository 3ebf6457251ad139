//! From 2-D points to a marked grid.
//!
//! The plane is cut into `n × n` square cells of side `l` starting at the grid origin. Points in
//! each cell are rasterized at resolution `r`, the raster's cubical complex gives β₀ and β₁, and
//! the cell is marked when the chosen β_k is nonzero.
//!
//! Row `i` of the grid holds points with `y` in `[y₀ + i·l, y₀ + (i+1)·l)`, so row 1 is the strip
//! of lowest `y`. Column `j` is the analogous strip in `x`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DigitizeError;
use crate::grid::Configuration;
use crate::homology::{build_complex, betti, BettiRecord, MicroRaster};

pub const DEFAULT_RESOLUTION: usize = 16;
pub const DEFAULT_BETTI_INDEX: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<(), DigitizeError> {
        match self.points.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
            Some(index) => Err(DigitizeError::NonFinite { index }),
            None => Ok(()),
        }
    }

    /// `(min, max)` corners, or `None` for an empty cloud.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y)))
        }))
    }
}

impl FromIterator<Point> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        Self { points: iter.into_iter().collect() }
    }
}

/// Grid geometry: grid number, cell side and lower-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub l: f64,
    pub origin: (f64, f64),
}

impl GridSpec {
    pub fn new(n: usize, l: f64, origin: (f64, f64)) -> Result<Self, DigitizeError> {
        let spec = Self { n, l, origin };
        spec.validate()?;
        Ok(spec)
    }

    /// Fits the grid to the cloud's bounding box: origin at the lower-left corner and
    /// `l = extent / n`, stretched by one part in 10⁹ so points on the far edges stay inside
    /// the half-open cells. An empty or single-point cloud gets `l = 1`.
    pub fn fit(cloud: &PointCloud, n: usize) -> Result<Self, DigitizeError> {
        if n == 0 {
            return Err(DigitizeError::Spec("grid number must be at least 1".into()));
        }
        cloud.validate()?;
        let Some((lo, hi)) = cloud.bounding_box() else {
            return Self::new(n, 1.0, (0.0, 0.0));
        };
        let extent = (hi.x - lo.x).max(hi.y - lo.y);
        let l = if extent > 0.0 { extent / n as f64 * (1.0 + 1e-9) } else { 1.0 };
        Self::new(n, l, (lo.x, lo.y))
    }

    pub fn validate(&self) -> Result<(), DigitizeError> {
        if self.n == 0 {
            return Err(DigitizeError::Spec("grid number must be at least 1".into()));
        }
        if !(self.l.is_finite() && self.l > 0.0) {
            return Err(DigitizeError::Spec(format!("cell side must be positive and finite, got {}", self.l)));
        }
        if !(self.origin.0.is_finite() && self.origin.1.is_finite()) {
            return Err(DigitizeError::Spec("origin must be finite".into()));
        }
        Ok(())
    }

    /// 0-based `(row, col)` of the cell holding `p`, if any.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let row = ((p.y - self.origin.1) / self.l).floor();
        let col = ((p.x - self.origin.0) / self.l).floor();
        let n = self.n as f64;
        (row >= 0.0 && col >= 0.0 && row < n && col < n).then_some((row as usize, col as usize))
    }

    pub fn cell_bounds(&self, row: usize, col: usize) -> CellBounds {
        CellBounds {
            x0: self.origin.0 + col as f64 * self.l,
            y0: self.origin.1 + row as f64 * self.l,
            side: self.l,
        }
    }
}

/// Lower-left corner and side of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBounds {
    pub x0: f64,
    pub y0: f64,
    pub side: f64,
}

/// Points grouped per cell (row-major) plus the number falling outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    pub n: usize,
    pub cells: Vec<Vec<Point>>,
    pub dropped: usize,
}

impl Binning {
    pub fn cell(&self, row: usize, col: usize) -> &[Point] {
        &self.cells[row * self.n + col]
    }
}

pub fn bin_points(cloud: &PointCloud, spec: &GridSpec) -> Binning {
    let mut cells = vec![Vec::new(); spec.n * spec.n];
    let mut dropped = 0;
    for &p in &cloud.points {
        match spec.cell_of(p) {
            Some((row, col)) => cells[row * spec.n + col].push(p),
            None => dropped += 1,
        }
    }
    Binning { n: spec.n, cells, dropped }
}

/// Subdivides the cell into `r × r` pixels and sets each pixel holding at least one point.
/// Points outside the cell are ignored; points that land on the far edge through rounding are
/// kept in the last pixel.
pub fn rasterize_cell(points: &[Point], bounds: CellBounds, r: usize) -> Result<MicroRaster, DigitizeError> {
    if r == 0 {
        return Err(DigitizeError::Resolution);
    }
    let mut raster = MicroRaster::empty(r);
    let scale = r as f64 / bounds.side;
    for p in points {
        let fy = ((p.y - bounds.y0) * scale).floor();
        let fx = ((p.x - bounds.x0) * scale).floor();
        if fy < 0.0 || fx < 0.0 || fy > r as f64 || fx > r as f64 {
            continue;
        }
        let row = (fy as usize).min(r - 1);
        let col = (fx as usize).min(r - 1);
        raster.set(row, col, true);
    }
    Ok(raster)
}

/// Grid geometry, β-marking and per-cell Betti numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedGrid {
    pub spec: GridSpec,
    pub k: usize,
    pub config: Configuration,
    /// Row-major, `n²` entries.
    pub betti: Vec<BettiRecord>,
    pub dropped_points: usize,
}

impl MarkedGrid {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn betti_at(&self, row: usize, col: usize) -> BettiRecord {
        self.betti[row * self.spec.n + col]
    }

    /// Wraps a bare configuration (unit cells at the origin, no Betti data beyond the marks).
    pub fn from_configuration(config: Configuration, k: usize) -> Self {
        let n = config.n();
        let betti = config
            .cells()
            .iter()
            .map(|&c| {
                let v = usize::from(c);
                if k == 0 {
                    BettiRecord { beta0: v, beta1: 0 }
                } else {
                    BettiRecord { beta0: v, beta1: v }
                }
            })
            .collect();
        Self { spec: GridSpec { n, l: 1.0, origin: (0.0, 0.0) }, k, config, betti, dropped_points: 0 }
    }
}

/// Bins, rasterizes and marks every cell. Cells are processed in parallel; the output does not
/// depend on scheduling.
pub fn generate_grid_diagram(
    cloud: &PointCloud,
    spec: &GridSpec,
    r: usize,
    k: usize,
) -> Result<MarkedGrid, DigitizeError> {
    spec.validate()?;
    cloud.validate()?;
    if r == 0 {
        return Err(DigitizeError::Resolution);
    }
    if k > 1 {
        return Err(DigitizeError::BettiIndex(k));
    }
    let binning = bin_points(cloud, spec);
    let n = spec.n;
    let betti: Vec<BettiRecord> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (row, col) = (idx / n, idx % n);
            let points = binning.cell(row, col);
            if points.is_empty() {
                return Ok(BettiRecord::default());
            }
            let raster = rasterize_cell(points, spec.cell_bounds(row, col), r)?;
            Ok(betti(&build_complex(&raster)))
        })
        .collect::<Result<_, DigitizeError>>()?;
    let marks = betti.iter().map(|b| b.get(k).unwrap_or(0) != 0).collect();
    let config = Configuration::from_cells(n, marks).expect("n² marks");
    Ok(MarkedGrid { spec: *spec, k, config, betti, dropped_points: binning.dropped })
}

#[derive(Serialize, Deserialize)]
struct MarkedGridRepr {
    n: usize,
    l: f64,
    origin: [f64; 2],
    #[serde(default = "default_k")]
    k: usize,
    cells: Vec<Vec<u8>>,
    betti0: Vec<Vec<usize>>,
    betti1: Vec<Vec<usize>>,
    dropped_points: usize,
}

fn default_k() -> usize {
    DEFAULT_BETTI_INDEX
}

impl Serialize for MarkedGrid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let n = self.n();
        let matrix = |f: &dyn Fn(&BettiRecord) -> usize| -> Vec<Vec<usize>> {
            self.betti.chunks(n.max(1)).take(n).map(|row| row.iter().map(f).collect()).collect()
        };
        MarkedGridRepr {
            n,
            l: self.spec.l,
            origin: [self.spec.origin.0, self.spec.origin.1],
            k: self.k,
            cells: self.config.rows().into_iter().map(|r| r.into_iter().map(u8::from).collect()).collect(),
            betti0: matrix(&|b| b.beta0),
            betti1: matrix(&|b| b.beta1),
            dropped_points: self.dropped_points,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MarkedGrid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = MarkedGridRepr::deserialize(deserializer)?;
        let spec = GridSpec::new(repr.n, repr.l, (repr.origin[0], repr.origin[1])).map_err(D::Error::custom)?;
        let n = repr.n;
        let square = |m: &Vec<Vec<usize>>| m.len() == n && m.iter().all(|row| row.len() == n);
        if !square(&repr.betti0) || !square(&repr.betti1) {
            return Err(D::Error::custom("betti matrices must be n × n"));
        }
        let config: Configuration = serde_json::from_value(serde_json::json!({ "n": n, "cells": repr.cells }))
            .map_err(D::Error::custom)?;
        let betti: Vec<BettiRecord> = repr
            .betti0
            .iter()
            .flatten()
            .zip(repr.betti1.iter().flatten())
            .map(|(&beta0, &beta1)| BettiRecord { beta0, beta1 })
            .collect();
        if repr.k > 1 {
            return Err(D::Error::custom(DigitizeError::BettiIndex(repr.k)));
        }
        let consistent = config.cells().iter().zip(&betti).all(|(&c, b)| c == (b.get(repr.k).unwrap_or(0) != 0));
        if !consistent {
            return Err(D::Error::custom("cells disagree with the betti markings"));
        }
        Ok(MarkedGrid { spec, k: repr.k, config, betti, dropped_points: repr.dropped_points })
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::homology::betti_oracle;

    fn ring(cx: f64, cy: f64, radius: f64, count: usize) -> Vec<Point> {
        (0..count)
            .map(|i| {
                let t = TAU * i as f64 / count as f64;
                Point::new(cx + radius * t.cos(), cy + radius * t.sin())
            })
            .collect()
    }

    #[test]
    fn boundary_point_goes_to_higher_cell() {
        let spec = GridSpec::new(2, 1.0, (0.0, 0.0)).unwrap();
        let b = bin_points(&PointCloud::new(vec![Point::new(1.0, 0.5)]), &spec);
        assert_eq!(b.cell(0, 1).len(), 1);
        assert_eq!(b.cell(0, 0).len(), 0);
        let far = bin_points(&PointCloud::new(vec![Point::new(2.0, 0.5), Point::new(-0.1, 0.5)]), &spec);
        assert_eq!(far.dropped, 2);
    }

    #[test]
    fn one_point_per_centre() {
        let spec = GridSpec::new(2, 1.0, (0.0, 0.0)).unwrap();
        let cloud: PointCloud = [(0.5, 0.5), (1.5, 0.5), (0.5, 1.5), (1.5, 1.5)]
            .into_iter()
            .map(|(x, y)| Point::new(x, y))
            .collect();
        let b = bin_points(&cloud, &spec);
        assert!(b.cells.iter().all(|c| c.len() == 1));
        assert_eq!(b.dropped, 0);
        let empty = bin_points(&PointCloud::default(), &spec);
        assert!(empty.cells.iter().all(Vec::is_empty));
    }

    #[test]
    fn rasterize_basic() {
        let bounds = CellBounds { x0: 0.0, y0: 0.0, side: 1.0 };
        assert_eq!(rasterize_cell(&[], bounds, 4).unwrap().filled(), 0);
        let one = rasterize_cell(&[Point::new(0.3, 0.6)], bounds, 4).unwrap();
        assert_eq!(one.filled(), 1);
        assert!(one.get(2, 1));
        assert_eq!(rasterize_cell(&[], bounds, 0), Err(DigitizeError::Resolution));
    }

    #[test]
    fn dense_ring_registers_a_hole() {
        let bounds = CellBounds { x0: 0.0, y0: 0.0, side: 1.0 };
        let raster = rasterize_cell(&ring(0.5, 0.5, 0.3, 200), bounds, DEFAULT_RESOLUTION).unwrap();
        let c = build_complex(&raster);
        assert_eq!(betti_oracle(&c, 1), 1);
        assert_eq!(betti_oracle(&c, 0), 1);
    }

    #[test]
    fn four_rings_mark_every_cell() {
        let spec = GridSpec::new(2, 1.0, (0.0, 0.0)).unwrap();
        let mut pts = Vec::new();
        for (cx, cy) in [(0.5, 0.5), (1.5, 0.5), (0.5, 1.5), (1.5, 1.5)] {
            pts.extend(ring(cx, cy, 0.3, 200));
        }
        let grid = generate_grid_diagram(&PointCloud::new(pts), &spec, DEFAULT_RESOLUTION, 1).unwrap();
        assert_eq!(grid.config.occupied(), 4);
        assert!(grid.betti.iter().all(|b| b.beta1 == 1));
    }

    #[test]
    fn empty_cloud_marks_nothing() {
        let spec = GridSpec::new(3, 1.0, (0.0, 0.0)).unwrap();
        for k in [0, 1] {
            let grid = generate_grid_diagram(&PointCloud::default(), &spec, 8, k).unwrap();
            assert_eq!(grid.config, Configuration::empty(3));
        }
    }

    #[test]
    fn uniform_dense_cloud_has_no_holes() {
        let spec = GridSpec::new(2, 1.0, (0.0, 0.0)).unwrap();
        let r = 8;
        let grid = generate_grid_diagram(&PointCloud::new(grid_points(r)), &spec, r, 1).unwrap();
        assert_eq!(grid.config.occupied(), 0);
        assert!(grid.betti.iter().all(|b| *b == BettiRecord { beta0: 1, beta1: 0 }));
        let k0 = generate_grid_diagram(&PointCloud::new(grid_points(r)), &spec, r, 0).unwrap();
        assert_eq!(k0.config.occupied(), 4);
    }

    /// One point at the centre of every pixel of a 2×2 grid of unit cells.
    fn grid_points(r: usize) -> Vec<Point> {
        let side = 2 * r;
        (0..side * side)
            .map(|k| Point::new(((k % side) as f64 + 0.5) / r as f64, ((k / side) as f64 + 0.5) / r as f64))
            .collect()
    }

    #[test]
    fn parameter_errors() {
        assert!(GridSpec::new(0, 1.0, (0.0, 0.0)).is_err());
        assert!(GridSpec::new(2, 0.0, (0.0, 0.0)).is_err());
        assert!(GridSpec::new(2, f64::NAN, (0.0, 0.0)).is_err());
        let spec = GridSpec::new(2, 1.0, (0.0, 0.0)).unwrap();
        let cloud = PointCloud::new(vec![Point::new(f64::INFINITY, 0.0)]);
        assert_eq!(generate_grid_diagram(&cloud, &spec, 4, 1), Err(DigitizeError::NonFinite { index: 0 }));
        assert_eq!(generate_grid_diagram(&PointCloud::default(), &spec, 4, 2), Err(DigitizeError::BettiIndex(2)));
    }

    #[test]
    fn auto_fit_covers_extremes() {
        let cloud = PointCloud::new(vec![Point::new(-1.0, 2.0), Point::new(3.0, 2.5), Point::new(0.0, 4.0)]);
        let spec = GridSpec::fit(&cloud, 4).unwrap();
        assert_eq!(spec.origin, (-1.0, 2.0));
        assert_eq!(bin_points(&cloud, &spec).dropped, 0);
        let lone = GridSpec::fit(&PointCloud::default(), 3).unwrap();
        assert_eq!(lone.l, 1.0);
    }

    #[test]
    fn json_shape() {
        let spec = GridSpec::new(2, 1.0, (0.0, 0.0)).unwrap();
        let grid = generate_grid_diagram(&PointCloud::new(ring(0.5, 0.5, 0.3, 200)), &spec, 16, 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&grid).unwrap();
        assert_eq!(v["cells"], serde_json::json!([[1, 0], [0, 0]]));
        assert_eq!(v["betti1"], serde_json::json!([[1, 0], [0, 0]]));
        assert_eq!(v["dropped_points"], 0);
        assert_eq!(v["origin"], serde_json::json!([0.0, 0.0]));
        let back: MarkedGrid = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(back, grid);
        let mut bad = v;
        bad["cells"] = serde_json::json!([[0, 0], [0, 0]]);
        assert!(serde_json::from_value::<MarkedGrid>(bad).is_err());
    }
}
