//! Betti numbers of binary rasters through closed cubical complexes.
//!
//! Every filled pixel is a closed unit square. Squares sharing an edge or a corner share those
//! cells, so the complex is the union of the squares in the plane. Two routes compute β₀ and β₁:
//! union-find on the 1-skeleton plus the Euler characteristic ([`betti0`], [`betti1`]), and the
//! boundary-matrix ranks over GF(2) ([`betti_oracle`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gf2::BitMatrix;

/// An `r × r` binary raster; row 0 is the first line of the text form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MicroRaster {
    r: usize,
    pixels: Vec<bool>,
}

impl MicroRaster {
    pub fn empty(r: usize) -> Self {
        Self { r, pixels: vec![false; r * r] }
    }

    pub fn full(r: usize) -> Self {
        Self { r, pixels: vec![true; r * r] }
    }

    /// Returns `None` unless `pixels.len() == r²`.
    pub fn from_pixels(r: usize, pixels: Vec<bool>) -> Option<Self> {
        (pixels.len() == r * r).then_some(Self { r, pixels })
    }

    /// Raster whose pixel `k` (row-major) is bit `k` of `bits`. Requires `r² ≤ 64`.
    pub fn from_bits(r: usize, bits: u64) -> Self {
        assert!(r * r <= 64, "raster too large for a bit mask");
        Self { r, pixels: (0..r * r).map(|k| (bits >> k) & 1 == 1).collect() }
    }

    pub fn resolution(&self) -> usize {
        self.r
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.pixels[row * self.r + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.pixels[row * self.r + col] = value;
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn filled(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }
}

impl fmt::Debug for MicroRaster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MicroRaster({}x{})", self.r, self.r)?;
        write!(f, "{self}")
    }
}

/// Text form: one line per row of `'0'`/`'1'` characters.
impl fmt::Display for MicroRaster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in 0..self.r {
            for col in 0..self.r {
                f.write_str(if self.get(row, col) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterParseError(pub String);

impl fmt::Display for RasterParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad raster text: {}", self.0)
    }
}

impl std::error::Error for RasterParseError {}

impl FromStr for MicroRaster {
    type Err = RasterParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lines: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let r = lines.len();
        let mut pixels = Vec::with_capacity(r * r);
        for (i, line) in lines.iter().enumerate() {
            if line.chars().count() != r {
                return Err(RasterParseError(format!("line {} has {} pixels, expected {r}", i + 1, line.len())));
            }
            for ch in line.chars() {
                pixels.push(match ch {
                    '0' => false,
                    '1' => true,
                    other => return Err(RasterParseError(format!("unexpected character {other:?}"))),
                });
            }
        }
        Ok(Self { r, pixels })
    }
}

/// Vertices, edges and square faces of the union of filled pixels. Edges store their two
/// vertex ids; faces store their four edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CubicalComplex {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 4]>,
}

impl CubicalComplex {
    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 4]] {
        &self.faces
    }

    pub fn is_empty(&self) -> bool {
        self.vertices == 0
    }

    /// χ = V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }
}

/// Betti numbers of one complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BettiRecord {
    pub beta0: usize,
    pub beta1: usize,
}

impl BettiRecord {
    /// β₀ for `k = 0`, β₁ for `k = 1`.
    pub fn get(&self, k: usize) -> Option<usize> {
        match k {
            0 => Some(self.beta0),
            1 => Some(self.beta1),
            _ => None,
        }
    }
}

/// Builds the cubical complex of `raster`, identifying cells shared by adjacent pixels.
pub fn build_complex(raster: &MicroRaster) -> CubicalComplex {
    let r = raster.resolution();
    let side = r + 1;
    let mut vertex_id = vec![usize::MAX; side * side];
    // horizontal edge (i, j)-(i, j+1) lives at i * r + j; vertical (i, j)-(i+1, j) at i * side + j
    let mut h_edge = vec![usize::MAX; side * r];
    let mut v_edge = vec![usize::MAX; r * side];
    let mut complex = CubicalComplex::default();

    let mut vertex = |i: usize, j: usize, complex: &mut CubicalComplex| {
        let slot = &mut vertex_id[i * side + j];
        if *slot == usize::MAX {
            *slot = complex.vertices;
            complex.vertices += 1;
        }
        *slot
    };

    for row in 0..r {
        for col in 0..r {
            if !raster.get(row, col) {
                continue;
            }
            let tl = vertex(row, col, &mut complex);
            let tr = vertex(row, col + 1, &mut complex);
            let bl = vertex(row + 1, col, &mut complex);
            let br = vertex(row + 1, col + 1, &mut complex);
            let edge = |slot: &mut usize, ends: [usize; 2], complex: &mut CubicalComplex| {
                if *slot == usize::MAX {
                    *slot = complex.edges.len();
                    complex.edges.push(ends);
                }
                *slot
            };
            let top = edge(&mut h_edge[row * r + col], [tl, tr], &mut complex);
            let bottom = edge(&mut h_edge[(row + 1) * r + col], [bl, br], &mut complex);
            let left = edge(&mut v_edge[row * side + col], [tl, bl], &mut complex);
            let right = edge(&mut v_edge[row * side + col + 1], [tr, br], &mut complex);
            complex.faces.push([top, right, bottom, left]);
        }
    }
    complex
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n], sets: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        self.sets -= 1;
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
    }
}

/// Connected components of the 1-skeleton.
pub fn betti0(complex: &CubicalComplex) -> usize {
    let mut sets = DisjointSet::new(complex.vertex_count());
    for &[a, b] in complex.edges() {
        sets.union(a, b);
    }
    sets.sets
}

/// Independent loops, from β₁ = β₀ − χ.
pub fn betti1(complex: &CubicalComplex) -> usize {
    let b1 = betti0(complex) as i64 - complex.euler_characteristic();
    debug_assert!(b1 >= 0);
    b1 as usize
}

/// Fast-path Betti numbers of a complex.
pub fn betti(complex: &CubicalComplex) -> BettiRecord {
    let beta0 = betti0(complex);
    let beta1 = (beta0 as i64 - complex.euler_characteristic()) as usize;
    BettiRecord { beta0, beta1 }
}

/// Fast-path Betti numbers of a raster.
pub fn raster_betti(raster: &MicroRaster) -> BettiRecord {
    betti(&build_complex(raster))
}

/// ∂₁ as a matrix with one row per edge and one column per vertex.
pub fn edge_boundary(complex: &CubicalComplex) -> BitMatrix {
    let mut m = BitMatrix::zeros(complex.edge_count(), complex.vertex_count());
    for (e, &[a, b]) in complex.edges().iter().enumerate() {
        m.toggle(e, a);
        m.toggle(e, b);
    }
    m
}

/// ∂₂ as a matrix with one row per face and one column per edge.
pub fn face_boundary(complex: &CubicalComplex) -> BitMatrix {
    let mut m = BitMatrix::zeros(complex.face_count(), complex.edge_count());
    for (f, face) in complex.faces().iter().enumerate() {
        for &e in face {
            m.toggle(f, e);
        }
    }
    m
}

/// β_k = dim ker ∂_k − rank ∂_{k+1} over GF(2), for `k ∈ {0, 1}`. Panics for any other `k`.
pub fn betti_oracle(complex: &CubicalComplex, k: usize) -> usize {
    let rank1 = edge_boundary(complex).rank();
    match k {
        // ∂₀ = 0, so ker ∂₀ is every vertex
        0 => complex.vertex_count() - rank1,
        1 => {
            let rank2 = face_boundary(complex).rank();
            complex.edge_count() - rank1 - rank2
        }
        _ => panic!("betti_oracle supports k = 0 or 1, got {k}"),
    }
}
