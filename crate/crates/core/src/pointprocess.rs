//! Homogeneous Poisson point processes on boxes and tori.
//!
//! Two samplers are provided. [`sample_poisson`] draws one independent
//! pattern per seed. [`CoupledSampler`] realizes the monotone coupling of
//! finite Poisson processes across intensities: a fixed sequence of i.i.d.
//! uniform points `X_1, X_2, ...` together with an independent unit-rate
//! counting process `N`, so that the pattern at intensity `λ` is
//! `{X_1, ..., X_{N(λ·|region|)}}` and patterns are nested in `λ`.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, STREAM_A, STREAM_B};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Box,
    Torus,
}

/// The cube `[0, side)^dim`, either with the Euclidean metric (box) or
/// with wraparound (torus).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub side: f64,
    pub dim: usize,
}

impl Region {
    pub fn new(kind: RegionKind, side: f64, dim: usize) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::param(format!("region side must be positive, got {side}")));
        }
        if dim == 0 {
            return Err(Error::param("region dimension must be at least 1"));
        }
        Ok(Region { kind, side, dim })
    }

    pub fn unit_square() -> Self {
        Region { kind: RegionKind::Box, side: 1.0, dim: 2 }
    }

    pub fn square(side: f64) -> Result<Self> {
        Region::new(RegionKind::Box, side, 2)
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    /// Largest possible distance between two points of the region.
    pub fn diameter(&self) -> f64 {
        let per_axis = match self.kind {
            RegionKind::Box => self.side,
            RegionKind::Torus => self.side / 2.0,
        };
        per_axis * (self.dim as f64).sqrt()
    }

    /// Squared distance in the region's metric.
    #[inline]
    pub fn dist2(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            RegionKind::Box => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            RegionKind::Torus => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = (x - y).abs();
                    let d = d.min(self.side - d);
                    d * d
                })
                .sum(),
        }
    }

    pub fn same_as(&self, other: &Region) -> bool {
        self.kind == other.kind && self.side == other.side && self.dim == other.dim
    }
}

/// A finite point set in a region, with the parameters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct PointPattern {
    region: Region,
    coords: Vec<f64>,
    intensity: f64,
    seed: u64,
}

impl PointPattern {
    /// Builds a pattern from explicit points; every coordinate must lie in `[0, side)`.
    pub fn from_points<P: AsRef<[f64]>>(region: Region, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * region.dim);
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != region.dim {
                return Err(Error::param(format!(
                    "point {i} has {} coordinates, region has dimension {}",
                    p.len(),
                    region.dim
                )));
            }
            if let Some(x) = p.iter().find(|&&x| !(0.0..region.side).contains(&x)) {
                return Err(Error::param(format!("point {i} coordinate {x} outside [0, {})", region.side)));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointPattern { region, coords, intensity: 0.0, seed: 0 })
    }

    pub fn empty(region: Region) -> Self {
        PointPattern { region, coords: Vec::new(), intensity: 0.0, seed: 0 }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.region.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.region.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.region.dim;
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.region.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Returns the first `n` points as a new pattern.
    pub fn prefix(&self, n: usize) -> PointPattern {
        let n = n.min(self.len());
        PointPattern {
            region: self.region,
            coords: self.coords[..n * self.region.dim].to_vec(),
            intensity: self.intensity,
            seed: self.seed,
        }
    }

    /// Scales coordinates and region side by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<PointPattern> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::param(format!("scale factor must be positive, got {factor}")));
        }
        let side = self.region.side * factor;
        let coords = self
            .coords
            .iter()
            .map(|&x| {
                let y = x * factor;
                if y < side {
                    y
                } else {
                    side.next_down()
                }
            })
            .collect();
        Ok(PointPattern {
            region: Region { side, ..self.region },
            coords,
            intensity: self.intensity / factor.powi(self.region.dim as i32),
            seed: self.seed,
        })
    }

    /// Writes one row per point: `index,x1,...,xd`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|k| format!("x{k}")).collect();
        writeln!(out, "index,{}", header.join(","))?;
        for (i, p) in self.points().enumerate() {
            write!(out, "{i}")?;
            for x in p {
                write!(out, ",{}", crate::harness::fmt_real(*x))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[inline]
fn uniform_coord(rng: &mut ChaCha8Rng, side: f64) -> f64 {
    let x = rng.random::<f64>() * side;
    if x < side {
        x
    } else {
        side.next_down()
    }
}

fn check_intensity(intensity: f64) -> Result<()> {
    if intensity >= 0.0 && intensity.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("intensity must be finite and nonnegative, got {intensity}")))
    }
}

/// Samples a homogeneous Poisson process of the given intensity on `region`.
///
/// The point count is Poisson(`intensity · side^dim`) and points are
/// i.i.d. uniform. The result is a deterministic function of `seed`.
pub fn sample_poisson(region: Region, intensity: f64, seed: u64) -> Result<PointPattern> {
    check_intensity(intensity)?;
    let mut rng = rng_from_seed(seed);
    let mean = intensity * region.volume();
    let count = if mean > 0.0 {
        let dist = Poisson::new(mean).map_err(|e| Error::param(format!("poisson mean {mean}: {e}")))?;
        dist.sample(&mut rng) as usize
    } else {
        0
    };
    let coords = (0..count * region.dim).map(|_| uniform_coord(&mut rng, region.side)).collect();
    Ok(PointPattern { region, coords, intensity, seed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stream {
    A,
    B,
}

impl Stream {
    fn label(self) -> u64 {
        match self {
            Stream::A => STREAM_A,
            Stream::B => STREAM_B,
        }
    }
}

const MIN_CHUNK: usize = 64;

/// Lazily extended coupling of Poisson processes across all intensities.
///
/// Uniform points and arrival times come from two separate streams, so the
/// k-th point and the k-th arrival do not depend on how far either cache
/// has been extended. Caches double in size when they run out.
#[derive(Clone, Debug)]
pub struct CoupledSampler {
    region: Region,
    seed: u64,
    stream: Stream,
    point_rng: ChaCha8Rng,
    time_rng: ChaCha8Rng,
    coords: Vec<f64>,
    arrivals: Vec<f64>,
}

impl CoupledSampler {
    pub fn new(region: Region, seed: u64, stream: Stream) -> Self {
        let label = stream.label();
        CoupledSampler {
            region,
            seed,
            stream,
            point_rng: rng_from_seed(derive_seed(seed, &[label, 0])),
            time_rng: rng_from_seed(derive_seed(seed, &[label, 1])),
            coords: Vec::new(),
            arrivals: Vec::new(),
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn stream(&self) -> Stream {
        self.stream
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn extend_arrivals(&mut self, mass: f64) {
        while self.arrivals.last().is_none_or(|&t| t <= mass) {
            let extra = self.arrivals.len().max(MIN_CHUNK);
            let mut t = self.arrivals.last().copied().unwrap_or(0.0);
            self.arrivals.reserve(extra);
            for _ in 0..extra {
                let gap: f64 = Exp1.sample(&mut self.time_rng);
                t += gap;
                self.arrivals.push(t);
            }
        }
    }

    fn extend_points(&mut self, count: usize) {
        let have = self.coords.len() / self.region.dim;
        if have >= count {
            return;
        }
        let target = count.max(2 * have).max(MIN_CHUNK);
        let side = self.region.side;
        self.coords.reserve((target - have) * self.region.dim);
        for _ in 0..(target - have) * self.region.dim {
            let x = uniform_coord(&mut self.point_rng, side);
            self.coords.push(x);
        }
    }

    /// Number of points `N(intensity · volume)` in the prefix for `intensity`.
    pub fn prefix_len(&mut self, intensity: f64) -> Result<usize> {
        check_intensity(intensity)?;
        let mass = intensity * self.region.volume();
        if mass == 0.0 {
            return Ok(0);
        }
        self.extend_arrivals(mass);
        Ok(self.arrivals.partition_point(|&t| t <= mass))
    }

    /// Returns `{X_1, ..., X_{N(intensity·volume)}}`.
    pub fn coupled_prefix(&mut self, intensity: f64) -> Result<PointPattern> {
        let n = self.prefix_len(intensity)?;
        self.extend_points(n);
        Ok(PointPattern {
            region: self.region,
            coords: self.coords[..n * self.region.dim].to_vec(),
            intensity,
            seed: self.seed,
        })
    }
}
