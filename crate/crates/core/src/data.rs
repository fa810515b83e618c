//! Synthetic rotation-invariant image datasets and their on-disk format.
//!
//! Class `c` is a Gaussian ring at radius `c/(C+1)·r_max` whose intensity is
//! modulated by `(1 + cos(c·(θ − α)))/2`, so the label depends only on the
//! radial profile while the rotation `α` is a nuisance variable.
//!
//! Layout of a dataset directory:
//!
//! * `manifest.json`: [`DatasetManifest`]
//! * `images.f32`: little-endian `f32` pixels, row-major, images concatenated
//! * `labels.csv`: `index,label` with a header row
//!
//! The first `n_train` images form the training split, the rest validation.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::{bilinear_sample, ImageGrid};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const IMAGES_FILE: &str = "images.f32";
pub const LABELS_FILE: &str = "labels.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub width: usize,
    pub height: usize,
    pub noise_sigma: f64,
    /// Images per class across both splits.
    pub samples_per_class: usize,
    /// Of those, how many go to the validation split.
    pub val_per_class: usize,
    pub seed: u64,
    pub ring_width_frac: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_classes: 4,
            width: 32,
            height: 32,
            noise_sigma: 0.05,
            samples_per_class: 160,
            val_per_class: 32,
            seed: 0,
            ring_width_frac: 0.1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.n_classes));
        }
        if self.width < 8 || self.height < 8 {
            return bad(format!("image {}x{} smaller than 8x8", self.width, self.height));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if !(self.ring_width_frac > 0.0 && self.ring_width_frac < 0.5) {
            return bad(format!("ring_width_frac must lie in (0, 0.5), got {}", self.ring_width_frac));
        }
        if self.samples_per_class == 0 || self.val_per_class > self.samples_per_class {
            return bad(format!(
                "bad split: {} per class with {} for validation",
                self.samples_per_class, self.val_per_class
            ));
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.n_classes * self.samples_per_class
    }

    pub fn n_val(&self) -> usize {
        self.n_classes * self.val_per_class
    }

    pub fn n_train(&self) -> usize {
        self.count() - self.n_val()
    }

    /// Largest radius used by the renderer (matches the polygon sampler).
    pub fn r_max(&self) -> f64 {
        self.width.min(self.height) as f64 / 2.0 - 1.0
    }

    /// Class of image `index`: classes cycle within each split.
    pub fn label_of(&self, index: usize) -> usize {
        let local = if index < self.n_train() {
            index
        } else {
            index - self.n_train()
        };
        local % self.n_classes + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub spec: SyntheticSpec,
    pub count: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub labels: Vec<usize>,
    /// Rotation angle applied to each image, radians.
    pub rotations: Vec<f64>,
    pub images_file: String,
    pub labels_file: String,
    pub images_sha256: String,
    pub labels_sha256: String,
}

/// Deterministic stream for image `index` of a dataset seeded with `seed`.
pub fn image_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn noiseless_pixel(c: usize, spec: &SyntheticSpec, angle: f64, x: f64, y: f64, cx: f64, cy: f64) -> f64 {
    let r_max = spec.r_max();
    let ring = c as f64 / (spec.n_classes as f64 + 1.0) * r_max;
    let sigma = spec.ring_width_frac * r_max;
    let (dx, dy) = (x - cx, cy - y);
    let rho = dx.hypot(dy);
    let theta = dy.atan2(dx);
    let radial = (-(rho - ring).powi(2) / (2.0 * sigma * sigma)).exp();
    radial * 0.5 * (1.0 + (c as f64 * (theta - angle)).cos())
}

/// Renders class `c` (1-based) rotated counter-clockwise by `angle`, adds
/// pixel noise drawn from `rng` and clips to `[0, 1]`.
pub fn generate_class_image<R: Rng + ?Sized>(
    c: usize,
    spec: &SyntheticSpec,
    angle: f64,
    rng: &mut R,
) -> Result<ImageGrid> {
    spec.validate()?;
    if c == 0 || c > spec.n_classes {
        return Err(Error::IndexOutOfRange {
            index: c,
            limit: spec.n_classes,
        });
    }
    let (cx, cy) = ((spec.width as f64 - 1.0) / 2.0, (spec.height as f64 - 1.0) / 2.0);
    let normal = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut pixels = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let mut v = noiseless_pixel(c, spec, angle, x as f64, y as f64, cx, cy);
            if spec.noise_sigma > 0.0 {
                v += normal.sample(rng);
            }
            pixels.push(v.clamp(0.0, 1.0));
        }
    }
    ImageGrid::new(spec.width, spec.height, pixels)
}

/// Raster rotation by `angle` (counter-clockwise) about the image centre with
/// bilinear resampling; pixels whose source lies outside are zero.
pub fn rotate_raster(image: &ImageGrid, angle: f64) -> Result<ImageGrid> {
    let (cx, cy) = image.center();
    let (s, c) = angle.sin_cos();
    let (w, h) = (image.width() as f64, image.height() as f64);
    let mut pixels = Vec::with_capacity(image.pixels().len());
    for y in 0..image.height() {
        for x in 0..image.width() {
            let (dx, dy) = (x as f64 - cx, cy - y as f64);
            // inverse rotation in the y-up frame
            let (sx, sy) = (c * dx + s * dy, -s * dx + c * dy);
            let (px, py) = (cx + sx, cy - sy);
            let inside = px >= 0.0 && px <= w - 1.0 && py >= 0.0 && py <= h - 1.0;
            pixels.push(if inside { bilinear_sample(image, px, py)? } else { 0.0 });
        }
    }
    ImageGrid::new(image.width(), image.height(), pixels)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Renders the whole dataset and writes it to `out_dir`.
pub fn generate_dataset(spec: &SyntheticSpec, out_dir: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    let count = spec.count();
    let rendered: Vec<(f64, ImageGrid)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = image_rng(spec.seed, i as u64);
            let angle = rng.random::<f64>() * TAU;
            let img = generate_class_image(spec.label_of(i), spec, angle, &mut rng)?;
            Ok((angle, img))
        })
        .collect::<Result<_>>()?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut image_bytes = Vec::with_capacity(count * spec.width * spec.height * 4);
    for (_, img) in &rendered {
        for &p in img.pixels() {
            image_bytes.extend_from_slice(&(p as f32).to_le_bytes());
        }
    }
    let labels: Vec<usize> = (0..count).map(|i| spec.label_of(i)).collect();
    let mut label_text = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        label_text.push_str(&format!("{i},{l}\n"));
    }
    write_file(&out_dir.join(IMAGES_FILE), &image_bytes)?;
    write_file(&out_dir.join(LABELS_FILE), label_text.as_bytes())?;

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        spec: spec.clone(),
        count,
        n_train: spec.n_train(),
        n_val: spec.n_val(),
        labels,
        rotations: rendered.iter().map(|(a, _)| *a).collect(),
        images_file: IMAGES_FILE.into(),
        labels_file: LABELS_FILE.into(),
        images_sha256: sha256_hex(&image_bytes),
        labels_sha256: sha256_hex(label_text.as_bytes()),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    write_file(&out_dir.join(MANIFEST_FILE), json.as_bytes())?;
    Ok(manifest)
}

/// A loaded dataset, images in stored order.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub images: Vec<ImageGrid>,
    pub labels: Vec<usize>,
}

/// Borrowed view of one split.
#[derive(Clone, Copy, Debug)]
pub struct Split<'a> {
    pub images: &'a [ImageGrid],
    pub labels: &'a [usize],
}

impl<'a> Split<'a> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a ImageGrid, usize)> + 'a {
        self.images.iter().zip(self.labels.iter().copied())
    }
}

impl Dataset {
    pub fn n_classes(&self) -> usize {
        self.manifest.spec.n_classes
    }

    pub fn train(&self) -> Split<'_> {
        let n = self.manifest.n_train;
        Split {
            images: &self.images[..n],
            labels: &self.labels[..n],
        }
    }

    pub fn val(&self) -> Split<'_> {
        let n = self.manifest.n_train;
        Split {
            images: &self.images[n..],
            labels: &self.labels[n..],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ImageGrid, usize)> {
        self.images.iter().zip(self.labels.iter().copied())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn parse_labels(text: &str, count: usize) -> Result<Vec<usize>> {
    let mut labels = Vec::with_capacity(count);
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let parse = |msg: &str| Error::Parse {
            line: lineno + 1,
            msg: msg.into(),
        };
        let (idx, lab) = line.split_once(',').ok_or_else(|| parse("expected index,label"))?;
        let idx: usize = idx.trim().parse().map_err(|_| parse("bad index"))?;
        if idx != labels.len() {
            return Err(parse("indices must be consecutive from 0"));
        }
        labels.push(lab.trim().parse().map_err(|_| parse("bad label"))?);
    }
    Ok(labels)
}

/// Reads and verifies a dataset directory.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let mpath = dir.join(MANIFEST_FILE);
    let manifest: DatasetManifest = serde_json::from_slice(&read_file(&mpath)?)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: FORMAT_VERSION,
            found: manifest.format_version,
        });
    }
    let spec = &manifest.spec;
    spec.validate()?;
    if manifest.count != spec.count() || manifest.n_train + manifest.n_val != manifest.count {
        return Err(Error::InvalidArgument("manifest counts are inconsistent".into()));
    }

    let ipath: PathBuf = dir.join(&manifest.images_file);
    let bytes = read_file(&ipath)?;
    let per_image = spec.width * spec.height;
    let expected = (manifest.count * per_image * 4) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::Truncated {
            path: ipath,
            expected,
            found: bytes.len() as u64,
        });
    }
    if sha256_hex(&bytes) != manifest.images_sha256 {
        return Err(Error::Checksum(ipath));
    }

    let lpath = dir.join(&manifest.labels_file);
    let label_bytes = read_file(&lpath)?;
    if sha256_hex(&label_bytes) != manifest.labels_sha256 {
        return Err(Error::Checksum(lpath));
    }
    let text = String::from_utf8(label_bytes).map_err(|_| Error::Parse {
        line: 0,
        msg: "labels file is not UTF-8".into(),
    })?;
    let labels = parse_labels(&text, manifest.count)?;
    if labels.len() != manifest.count {
        return Err(Error::Truncated {
            path: lpath,
            expected: manifest.count as u64,
            found: labels.len() as u64,
        });
    }
    for &l in &labels {
        if l == 0 || l > spec.n_classes {
            return Err(Error::IndexOutOfRange {
                index: l,
                limit: spec.n_classes,
            });
        }
    }
    if labels != manifest.labels {
        return Err(Error::InvalidArgument("labels file disagrees with manifest".into()));
    }

    let pixels: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let images = pixels
        .chunks_exact(per_image)
        .map(|p| ImageGrid::new(spec.width, spec.height, p.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        manifest,
        images,
        labels,
    })
}
