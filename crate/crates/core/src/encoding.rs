//! Polygon-vertex sampling of images, amplitude encoding, and the cyclic
//! rotation representation on the orbital register.
//!
//! Polygon `r` (of `2^{n_rad}`) has radius `r_max·(r+1)/2^{n_rad}`; vertex `k`
//! (of `2^{n_orb}`) sits at angle `2πk/2^{n_orb}` counterclockwise from the
//! `+x` axis. Image rows grow downward, so a vertex is at
//! `(cx + ρ cos φ, cy − ρ sin φ)`. Amplitude index is `r·2^{n_orb} + k`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::StateVector;

/// Row-major grayscale raster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("empty image".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::dim(width * height, pixels.len()));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("image pixels"));
        }
        Ok(ImageGrid {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        ImageGrid::new(width, height, vec![value; width * height])
    }

    /// Evaluates `f(x, y)` at every pixel centre.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x as f64, y as f64));
            }
        }
        ImageGrid::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.width as f64 - 1.0) / 2.0, (self.height as f64 - 1.0) / 2.0)
    }

    /// Averages non-overlapping `factor × factor` blocks.
    pub fn downsample(&self, factor: usize) -> Result<ImageGrid> {
        if factor == 0 || !self.width.is_multiple_of(factor) || !self.height.is_multiple_of(factor) {
            return Err(Error::InvalidArgument(format!(
                "cannot pool {}x{} by {factor}",
                self.width, self.height
            )));
        }
        let (w, h) = (self.width / factor, self.height / factor);
        let norm = (factor * factor) as f64;
        ImageGrid::from_fn(w, h, |x, y| {
            let (x0, y0) = (x as usize * factor, y as usize * factor);
            let mut s = 0.0;
            for dy in 0..factor {
                for dx in 0..factor {
                    s += self.get(x0 + dx, y0 + dy);
                }
            }
            s / norm
        })
    }

    /// Binary PGM (P5) preview scaled so the largest pixel maps to 255.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let max = self.pixels.iter().cloned().fold(0.0, f64::max);
        let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
        let mut bytes = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        bytes.extend(
            self.pixels
                .iter()
                .map(|&p| (p.max(0.0) * scale).round().min(255.0) as u8),
        );
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))
    }
}

/// Bilinear interpolation at continuous coordinates `(x, y)`.
pub fn bilinear_sample(image: &ImageGrid, x: f64, y: f64) -> Result<f64> {
    let (w, h) = (image.width as f64, image.height as f64);
    // allow round-off just outside the grid
    const SLACK: f64 = 1e-9;
    if !(x >= -SLACK && x <= w - 1.0 + SLACK && y >= -SLACK && y <= h - 1.0 + SLACK) {
        return Err(Error::InvalidArgument(format!(
            "coordinate ({x}, {y}) outside {}x{} image",
            image.width, image.height
        )));
    }
    let x = x.clamp(0.0, w - 1.0);
    let y = y.clamp(0.0, h - 1.0);
    let x0 = (x.floor() as usize).min(image.width.saturating_sub(2));
    let y0 = (y.floor() as usize).min(image.height.saturating_sub(2));
    let x1 = (x0 + 1).min(image.width - 1);
    let y1 = (y0 + 1).min(image.height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    Ok(image.get(x0, y0) * (1.0 - fx) * (1.0 - fy)
        + image.get(x1, y0) * fx * (1.0 - fy)
        + image.get(x0, y1) * (1.0 - fx) * fy
        + image.get(x1, y1) * fx * fy)
}

/// Vertices of `2^{n_rad}` concentric regular `2^{n_orb}`-gons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarSampling {
    pub n_rad: usize,
    pub n_orb: usize,
    pub center: (f64, f64),
    pub r_max: f64,
    /// `(x, y)` for index `r·2^{n_orb} + k`.
    pub vertices: Vec<(f64, f64)>,
}

impl PolarSampling {
    pub fn n_qubits(&self) -> usize {
        self.n_rad + self.n_orb
    }

    pub fn n_polygons(&self) -> usize {
        1 << self.n_rad
    }

    pub fn n_angles(&self) -> usize {
        1 << self.n_orb
    }

    pub fn radius(&self, r: usize) -> f64 {
        self.r_max * (r + 1) as f64 / self.n_polygons() as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_angles() as f64
    }

    fn point(&self, radius: f64, angle: f64) -> (f64, f64) {
        (
            self.center.0 + radius * angle.cos(),
            self.center.1 - radius * angle.sin(),
        )
    }
}

pub fn build_sampling(n_rad: usize, n_orb: usize, width: usize, height: usize) -> Result<PolarSampling> {
    if n_rad == 0 || n_orb == 0 || n_rad + n_orb > 24 {
        return Err(Error::InvalidArgument(format!(
            "unsupported registers n_rad={n_rad}, n_orb={n_orb}"
        )));
    }
    if width < 2 || height < 2 {
        return Err(Error::InvalidArgument(format!(
            "degenerate image {width}x{height}"
        )));
    }
    let r_max = width.min(height) as f64 / 2.0 - 1.0;
    if r_max <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "image {width}x{height} too small for polygon sampling"
        )));
    }
    let mut s = PolarSampling {
        n_rad,
        n_orb,
        center: ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
        r_max,
        vertices: Vec::with_capacity(1 << (n_rad + n_orb)),
    };
    for r in 0..s.n_polygons() {
        for k in 0..s.n_angles() {
            let v = s.point(s.radius(r), s.angle(k));
            s.vertices.push(v);
        }
    }
    Ok(s)
}

/// Image values at the sampling vertices after rotating the image by `angle`
/// about the sampling centre, i.e. `I(Rot(−angle)·v)` for each vertex `v`.
pub fn sample_rotated(image: &ImageGrid, sampling: &PolarSampling, angle: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sampling.vertices.len());
    for r in 0..sampling.n_polygons() {
        for k in 0..sampling.n_angles() {
            let (x, y) = sampling.point(sampling.radius(r), sampling.angle(k) - angle);
            out.push(bilinear_sample(image, x, y)?);
        }
    }
    Ok(out)
}

pub fn sample(image: &ImageGrid, sampling: &PolarSampling) -> Result<Vec<f64>> {
    sampling
        .vertices
        .iter()
        .map(|&(x, y)| bilinear_sample(image, x, y))
        .collect()
}

/// Unit-norm state whose amplitudes are the given samples.
pub fn encode_samples(samples: &[f64]) -> Result<StateVector> {
    let norm = samples.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::NonFinite("samples"));
    }
    if norm == 0.0 {
        return Err(Error::Encoding("sampled vector is identically zero".into()));
    }
    StateVector::from_amplitudes(
        samples
            .iter()
            .map(|v| Complex64::new(v / norm, 0.0))
            .collect(),
    )
}

/// Polygon-sampled amplitude encoding `Σ x_{r,k} |r,k⟩ / ‖x‖`.
pub fn encode(image: &ImageGrid, sampling: &PolarSampling) -> Result<StateVector> {
    encode_samples(&sample(image, sampling)?)
}

/// Encoding of the image rotated by exactly `angle`, obtained by resampling at
/// rotated vertex coordinates instead of rotating the raster.
pub fn encode_rotated(image: &ImageGrid, sampling: &PolarSampling, angle: f64) -> Result<StateVector> {
    encode_samples(&sample_rotated(image, sampling, angle)?)
}

/// `R(g) = I_rad ⊗ S^g`: amplitude at `(r, k)` moves to `(r, (k + g) mod 2^{n_orb})`.
pub fn rotation_rep(state: &StateVector, n_orb: usize, g: usize) -> Result<StateVector> {
    if n_orb == 0 || n_orb > state.n_qubits() {
        return Err(Error::InvalidArgument(format!(
            "orbital register of {n_orb} qubits does not fit {} qubits",
            state.n_qubits()
        )));
    }
    let m = 1usize << n_orb;
    if g >= m {
        return Err(Error::IndexOutOfRange { index: g, limit: m });
    }
    let src = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for (i, a) in src.iter().enumerate() {
        let (r, k) = (i / m, i % m);
        out[r * m + (k + g) % m] = *a;
    }
    StateVector::from_amplitudes(out)
}

/// `(I_rad ⊗ QFT†_orb)` applied to the encoded state.
pub fn equivariant_prepare(image: &ImageGrid, sampling: &PolarSampling) -> Result<StateVector> {
    let mut s = encode(image, sampling)?;
    s.apply_qft(sampling.n_rad, sampling.n_orb, true)?;
    Ok(s)
}

/// Renders samples back onto a pixel grid, each pixel taking the value of the
/// polar-nearest vertex; pixels beyond the outer polygon are zero.
pub fn reconstruct_image(
    samples: &[f64],
    sampling: &PolarSampling,
    width: usize,
    height: usize,
) -> Result<ImageGrid> {
    if samples.len() != sampling.vertices.len() {
        return Err(Error::dim(sampling.vertices.len(), samples.len()));
    }
    let n_r = sampling.n_polygons();
    let n_k = sampling.n_angles();
    let step = sampling.r_max / n_r as f64;
    let (cx, cy) = sampling.center;
    ImageGrid::from_fn(width, height, |x, y| {
        let dx = x - cx;
        let dy = cy - y;
        let rho = dx.hypot(dy);
        if rho > sampling.r_max + step / 2.0 {
            return 0.0;
        }
        let r = ((rho / step).round() as isize - 1).clamp(0, n_r as isize - 1) as usize;
        let phi = dy.atan2(dx).rem_euclid(2.0 * PI);
        let k = (phi / (2.0 * PI) * n_k as f64).round() as usize % n_k;
        samples[r * n_k + k]
    })
}

/// Real parts of the amplitudes, in vertex order.
pub fn state_samples(state: &StateVector) -> Vec<f64> {
    state.amplitudes().iter().map(|a| a.re).collect()
}
