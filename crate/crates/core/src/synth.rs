//! Seeded synthetic point clouds: Gaussian, Gamma, Gaussian mixtures and ring scenes, with
//! optional isotropic Gaussian noise added last.

use std::f64::consts::TAU;

use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::digitize::{Point, PointCloud};
use crate::error::SynthError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceKind {
    Gaussian { mean: [f64; 2], cov: [[f64; 2]; 2] },
    Gamma { shape: [f64; 2], scale: [f64; 2] },
    Mixture { components: Vec<MixtureComponent> },
    /// Points spread evenly over the rings (round robin) at uniform random angles.
    RingScene { rings: Vec<Ring> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: SourceKind,
    pub count: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Lower-triangular factor of a symmetric positive-definite 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cholesky2 {
    l11: f64,
    l21: f64,
    l22: f64,
}

impl Cholesky2 {
    fn new(cov: [[f64; 2]; 2]) -> Result<Self, SynthError> {
        let [[a, b], [c, d]] = cov;
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(SynthError::Params("covariance entries must be finite".into()));
        }
        if (b - c).abs() > 1e-12 * (1.0 + b.abs().max(c.abs())) {
            return Err(SynthError::Params(format!("covariance is not symmetric ({b} vs {c})")));
        }
        if a <= 0.0 {
            return Err(SynthError::Params("covariance is not positive definite".into()));
        }
        let l11 = a.sqrt();
        let l21 = b / l11;
        let rest = d - l21 * l21;
        if rest <= 0.0 {
            return Err(SynthError::Params("covariance is not positive definite".into()));
        }
        Ok(Self { l11, l21, l22: rest.sqrt() })
    }

    fn transform(&self, mean: [f64; 2], z: (f64, f64)) -> Point {
        Point::new(mean[0] + self.l11 * z.0, mean[1] + self.l21 * z.0 + self.l22 * z.1)
    }
}

fn std_normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    (StandardNormal.sample(rng), StandardNormal.sample(rng))
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(SynthError::Params("noise_sigma must be a finite value ≥ 0".into()));
        }
        match &self.kind {
            SourceKind::Gaussian { cov, mean } => {
                finite(mean)?;
                Cholesky2::new(*cov).map(|_| ())
            }
            SourceKind::Gamma { shape, scale } => {
                if shape.iter().chain(scale).all(|v| v.is_finite() && *v > 0.0) {
                    Ok(())
                } else {
                    Err(SynthError::Params("gamma shape and scale must be positive".into()))
                }
            }
            SourceKind::Mixture { components } => {
                if components.is_empty() {
                    return Err(SynthError::Params("mixture needs at least one component".into()));
                }
                for c in components {
                    if !(c.weight.is_finite() && c.weight > 0.0) {
                        return Err(SynthError::Params("mixture weights must be positive".into()));
                    }
                    finite(&c.mean)?;
                    Cholesky2::new(c.cov)?;
                }
                Ok(())
            }
            SourceKind::RingScene { rings } => {
                if rings.is_empty() && self.count > 0 {
                    return Err(SynthError::Params("ring scene needs at least one ring".into()));
                }
                for r in rings {
                    finite(&r.center)?;
                    if !(r.radius.is_finite() && r.radius >= 0.0) {
                        return Err(SynthError::Params("ring radius must be ≥ 0".into()));
                    }
                }
                Ok(())
            }
        }
    }
}

fn finite(v: &[f64; 2]) -> Result<(), SynthError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(SynthError::Params("coordinates must be finite".into()))
    }
}

fn sample_base(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Point>, SynthError> {
    spec.validate()?;
    let n = spec.count;
    let points = match &spec.kind {
        SourceKind::Gaussian { mean, cov } => {
            let chol = Cholesky2::new(*cov)?;
            (0..n).map(|_| chol.transform(*mean, std_normal_pair(rng))).collect()
        }
        SourceKind::Gamma { shape, scale } => {
            let gx = Gamma::new(shape[0], scale[0]).map_err(|e| SynthError::Params(e.to_string()))?;
            let gy = Gamma::new(shape[1], scale[1]).map_err(|e| SynthError::Params(e.to_string()))?;
            (0..n).map(|_| Point::new(gx.sample(rng), gy.sample(rng))).collect()
        }
        SourceKind::Mixture { components } => {
            let chols = components.iter().map(|c| Cholesky2::new(c.cov)).collect::<Result<Vec<_>, _>>()?;
            let pick = WeightedIndex::new(components.iter().map(|c| c.weight))
                .map_err(|e| SynthError::Params(e.to_string()))?;
            (0..n)
                .map(|_| {
                    let i = pick.sample(rng);
                    chols[i].transform(components[i].mean, std_normal_pair(rng))
                })
                .collect()
        }
        SourceKind::RingScene { rings } => (0..n)
            .map(|i| {
                let ring = &rings[i % rings.len()];
                let t = rng.gen_range(0.0..TAU);
                Point::new(ring.center[0] + ring.radius * t.cos(), ring.center[1] + ring.radius * t.sin())
            })
            .collect(),
    };
    Ok(points)
}

fn add_noise(points: &mut [Point], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma > 0.0 {
        for p in points {
            let (dx, dy) = std_normal_pair(rng);
            p.x += sigma * dx;
            p.y += sigma * dy;
        }
    }
}

/// Draws `spec.count` points. The same spec always yields the same cloud.
pub fn generate(spec: &GeneratorSpec) -> Result<PointCloud, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = sample_base(spec, &mut rng)?;
    add_noise(&mut points, spec.noise_sigma, &mut rng);
    Ok(PointCloud::new(points))
}

/// Mirror line for [`mirror_scene`]: `Vertical(a)` is the line `x = a`, `Horizontal(b)` is
/// `y = b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MirrorAxis {
    Vertical(f64),
    Horizontal(f64),
}

impl MirrorAxis {
    pub fn reflect(&self, p: Point) -> Point {
        match *self {
            MirrorAxis::Vertical(a) => Point::new(2.0 * a - p.x, p.y),
            MirrorAxis::Horizontal(b) => Point::new(p.x, 2.0 * b - p.y),
        }
    }

    /// Moves `p` into the half-plane on the positive side of the line.
    fn fold(&self, p: Point) -> Point {
        match *self {
            MirrorAxis::Vertical(a) if p.x < a => self.reflect(p),
            MirrorAxis::Horizontal(b) if p.y < b => self.reflect(p),
            _ => p,
        }
    }
}

pub fn reflect(cloud: &PointCloud, axis: MirrorAxis) -> PointCloud {
    cloud.points.iter().map(|&p| axis.reflect(p)).collect()
}

/// Folds the noise-free base sample into one half-plane, appends the mirror image of every
/// point, and only then adds the base spec's noise. With `noise_sigma = 0` the scene is
/// exactly symmetric about the axis and has `2 · count` points.
pub fn mirror_scene(base: &GeneratorSpec, axis: MirrorAxis) -> Result<PointCloud, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed);
    let half: Vec<Point> = sample_base(base, &mut rng)?.into_iter().map(|p| axis.fold(p)).collect();
    let mut points: Vec<Point> = half.iter().copied().chain(half.iter().map(|&p| axis.reflect(p))).collect();
    add_noise(&mut points, base.noise_sigma, &mut rng);
    Ok(PointCloud::new(points))
}
