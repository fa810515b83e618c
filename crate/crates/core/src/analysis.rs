//! Trainability experiments: gradient-variance scans, Monte-Carlo loss
//! moments and the closed-form variance tables.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate_class_image, image_rng, SyntheticSpec};
use crate::encoding::{build_sampling, encode};
use crate::error::{Error, Result};
use crate::model::{init_params, loss, Model, ModelConfig};
use crate::pauli::{
    ideal_bases, predicted_moments, purity, Pauli, PauliSum,
};
use crate::sim::{parameter_shift_component, StateVector};

/// Fitted log2-variance slope per qubit above which a scan counts as flat.
pub const FLAT_SLOPE: f64 = -0.1;
/// Slope below which a scan counts as exponentially decaying.
pub const DECAY_SLOPE: f64 = -0.3;

/// How the radial register size follows the total qubit count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AssignmentRule {
    FixedNrad(usize),
    /// `n_rad = ⌊ratio·n⌋`.
    Proportional(f64),
    /// `n_rad = round(c·log2 n)`.
    Log(f64),
}

impl AssignmentRule {
    pub fn n_rad(&self, n: usize) -> usize {
        match *self {
            AssignmentRule::FixedNrad(k) => k,
            AssignmentRule::Proportional(r) => (r * n as f64 + 1e-9).floor() as usize,
            AssignmentRule::Log(c) => (c * (n as f64).log2()).round() as usize,
        }
    }

    /// Parses `fixed:K`, `prop:R` or `log:C`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad assignment rule '{text}'"));
        let (kind, val) = text.split_once(':').ok_or_else(bad)?;
        match kind {
            "fixed" => Ok(AssignmentRule::FixedNrad(val.parse().map_err(|_| bad())?)),
            "prop" => Ok(AssignmentRule::Proportional(val.parse().map_err(|_| bad())?)),
            "log" => Ok(AssignmentRule::Log(val.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Input state fed to every sampled model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InputRule {
    /// Encoded class-1 synthetic image (32×32, default noise) drawn from
    /// stream 0 of the scan seed.
    #[default]
    Image,
    Zero,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BPScanConfig {
    pub qubits: Vec<usize>,
    pub rule: AssignmentRule,
    pub layers: usize,
    pub samples: usize,
    #[serde(default)]
    pub input: InputRule,
    pub seed: u64,
}

impl BPScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::InvalidArgument("empty qubit range".into()));
        }
        if self.samples < 2 {
            return Err(Error::Insufficient(format!(
                "variance needs at least 2 samples, got {}",
                self.samples
            )));
        }
        if self.layers == 0 {
            return Err(Error::InvalidArgument("layers must be >= 1".into()));
        }
        for &n in &self.qubits {
            let k = self.rule.n_rad(n);
            if k == 0 || k >= n {
                return Err(Error::InvalidArgument(format!(
                    "rule gives n_rad={k} for n={n}; need 1 <= n_rad < n"
                )));
            }
        }
        Ok(())
    }
}

/// Raw encoded input for a scan at `(n_rad, n_orb)`.
pub fn scan_input(rule: InputRule, n_rad: usize, n_orb: usize, seed: u64) -> Result<StateVector> {
    let n = n_rad + n_orb;
    match rule {
        InputRule::Zero => Ok(StateVector::zero(n)),
        InputRule::Uniform => Ok(StateVector::uniform(n)),
        InputRule::Image => {
            let spec = SyntheticSpec {
                seed,
                ..SyntheticSpec::default()
            };
            let img = generate_class_image(1, &spec, 0.0, &mut image_rng(seed, 0))?;
            encode(&img, &build_sampling(n_rad, n_orb, spec.width, spec.height)?)
        }
    }
}

/// The state entering the trainable layers (`QFT†` on the orbital register).
pub fn trainable_frame(input: &StateVector, n_rad: usize, n_orb: usize) -> Result<StateVector> {
    if input.n_qubits() != n_rad + n_orb {
        return Err(Error::dim(n_rad + n_orb, input.n_qubits()));
    }
    let mut s = input.clone();
    s.apply_qft(n_rad, n_orb, true)?;
    Ok(s)
}

/// Sample mean and variance with their standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub samples: usize,
}

/// Unbiased variance; its standard error uses the fourth central moment.
pub fn sample_moments(values: &[f64]) -> Result<MomentEstimate> {
    let m = values.len();
    if m < 2 {
        return Err(Error::Insufficient(format!(
            "variance needs at least 2 samples, got {m}"
        )));
    }
    let mf = m as f64;
    let mean = values.iter().sum::<f64>() / mf;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / mf;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / mf;
    let variance = m2 * mf / (mf - 1.0);
    Ok(MomentEstimate {
        mean,
        mean_se: (variance / mf).sqrt(),
        variance,
        variance_se: ((m4 - m2 * m2).max(0.0) / mf).sqrt(),
        samples: m,
    })
}

fn sample_rng(seed: u64, n: usize, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(sample as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub n: usize,
    pub n_rad: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    /// Closed-form loss variance at this size, for scale.
    pub predicted_loss_variance: Option<f64>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub rows: Vec<VarianceRow>,
    /// Least-squares slope of log2(variance) against n.
    pub slope: Option<f64>,
}

impl VarianceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "n,n_rad,mean,mean_se,variance,variance_se,predicted_loss_variance,samples\n",
        );
        for r in &self.rows {
            let pred = r
                .predicted_loss_variance
                .map(|p| format!("{p:.16e}"))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                r.n, r.n_rad, r.mean, r.mean_se, r.variance, r.variance_se, pred, r.samples
            );
        }
        s
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dim(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::Insufficient("a slope needs at least 2 points".into()));
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all x values coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Predicted-variance cap: the ideal bases have `4^n_rad` elements each.
const PREDICT_MAX_NRAD: usize = 6;

/// Variance of `∂ℓ/∂θ_mid` over uniformly random parameters, for each size
/// in the scan. `θ_mid` is slot `⌊P/2⌋` and `ℓ = −⟨Z_1⟩`.
pub fn gradient_variance_scan(config: &BPScanConfig) -> Result<VarianceReport> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.qubits.len());
    for &n in &config.qubits {
        let n_rad = config.rule.n_rad(n);
        let n_orb = n - n_rad;
        let model = Model::new(ModelConfig::equivariant(n_rad, n_orb, config.layers, 1))?;
        let input = scan_input(config.input, n_rad, n_orb, config.seed)?;
        let obs = PauliSum::single(n, 0, Pauli::Z)?.scale((-1.0).into());
        let mid = model.n_params() / 2;
        let grads = (0..config.samples)
            .into_par_iter()
            .map(|s| {
                let params = init_params(model.n_params(), &mut sample_rng(config.seed, n, s));
                parameter_shift_component(&model.circuit, &input, &params, &obs, mid)
            })
            .collect::<Result<Vec<_>>>()?;
        let est = sample_moments(&grads)?;
        let predicted_loss_variance = if n_rad <= PREDICT_MAX_NRAD {
            let rho = trainable_frame(&input, n_rad, n_orb)?;
            Some(predicted_moments(&rho, 1, n_rad, n_orb)?.variance)
        } else {
            None
        };
        rows.push(VarianceRow {
            n,
            n_rad,
            mean: est.mean,
            mean_se: est.mean_se,
            variance: est.variance,
            variance_se: est.variance_se,
            predicted_loss_variance,
            samples: config.samples,
        });
    }
    let slope = if rows.len() >= 2 && rows.iter().all(|r| r.variance > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.variance.log2()).collect();
        Some(fit_slope(&x, &y)?)
    } else {
        None
    };
    Ok(VarianceReport { rows, slope })
}

/// Monte-Carlo moments of `ℓ_θ(input, Z_y)` over uniform `θ`. Sample `s`
/// draws its parameters from stream `s` of `seed`.
pub fn estimate_loss_moments(
    model: &Model,
    input: &StateVector,
    y: usize,
    samples: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    estimate_loss_moments_with(model, input, y, samples, |s| {
        init_params(model.n_params(), &mut sample_rng(seed, 0, s))
    })
}

/// As [`estimate_loss_moments`] with a caller-supplied parameter draw.
pub fn estimate_loss_moments_with<F>(
    model: &Model,
    input: &StateVector,
    y: usize,
    samples: usize,
    draw: F,
) -> Result<MomentEstimate>
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    if samples < 2 {
        return Err(Error::Insufficient(format!(
            "variance needs at least 2 samples, got {samples}"
        )));
    }
    model.check_label(y)?;
    let values = (0..samples)
        .into_par_iter()
        .map(|s| loss(&model.circuit, input, &draw(s), y))
        .collect::<Result<Vec<_>>>()?;
    sample_moments(&values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaRow {
    pub input: String,
    pub n: usize,
    pub n_rad: usize,
    /// Purity of the input on the semisimple part.
    pub purity: f64,
    pub predicted_mean: f64,
    pub predicted_variance: f64,
    /// `n_rad ≤ n/2`, where the purity bound leaves room for a
    /// non-vanishing variance.
    pub admissible: bool,
}

/// Closed-form purity and loss moments (class 1) for each named input. The
/// inputs are raw encoded states; the Fourier block is applied here.
pub fn variance_formula_report(
    n_rad: usize,
    n_orb: usize,
    inputs: &[(String, StateVector)],
) -> Result<Vec<FormulaRow>> {
    let n = n_rad + n_orb;
    let (plus, minus) = ideal_bases(n_rad, n_orb)?;
    let mut rows = Vec::with_capacity(inputs.len());
    for (name, state) in inputs {
        let rho = trainable_frame(state, n_rad, n_orb)?;
        let p = purity(&rho, &plus)? + purity(&rho, &minus)?;
        let m = predicted_moments(&rho, 1, n_rad, n_orb)?;
        rows.push(FormulaRow {
            input: name.clone(),
            n,
            n_rad,
            purity: p,
            predicted_mean: m.mean,
            predicted_variance: m.variance,
            admissible: 2 * n_rad <= n,
        });
    }
    Ok(rows)
}

/// Predicted variance across sizes for one input family, with its fitted
/// log2 slope and whether that slope signals an exponential decay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaScan {
    pub rows: Vec<FormulaRow>,
    pub slope: Option<f64>,
    pub barren_plateau: bool,
}

pub fn formula_scan(
    qubits: &[usize],
    rule: AssignmentRule,
    input: InputRule,
    seed: u64,
) -> Result<FormulaScan> {
    let mut rows = Vec::new();
    for &n in qubits {
        let n_rad = rule.n_rad(n);
        if n_rad == 0 || n_rad >= n {
            return Err(Error::InvalidArgument(format!("rule gives n_rad={n_rad} for n={n}")));
        }
        let state = scan_input(input, n_rad, n - n_rad, seed)?;
        rows.extend(variance_formula_report(
            n_rad,
            n - n_rad,
            &[(format!("{input:?}").to_lowercase(), state)],
        )?);
    }
    let slope = if rows.len() >= 2 && rows.iter().all(|r| r.predicted_variance > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.predicted_variance.log2()).collect();
        Some(fit_slope(&x, &y)?)
    } else {
        None
    };
    let barren_plateau = match slope {
        Some(s) => s < DECAY_SLOPE,
        None => rows.iter().any(|r| r.predicted_variance <= 0.0),
    };
    Ok(FormulaScan {
        rows,
        slope,
        barren_plateau,
    })
}

pub fn formula_csv(rows: &[FormulaRow]) -> String {
    let mut s = String::from("input,n,n_rad,purity,predicted_mean,predicted_variance,admissible\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.16e},{:.16e},{:.16e},{}",
            r.input, r.n, r.n_rad, r.purity, r.predicted_mean, r.predicted_variance, r.admissible
        );
    }
    s
}

/// Slack on the `2^{-n}` rate when checking a fitted purity decay.
pub const PURITY_RATE_TOL: f64 = 0.05;

/// True when `log2 P` falls no faster than `−n` across the `(n, P)` points.
pub fn bound_check_purity(points: &[(usize, f64)]) -> Result<bool> {
    if points.len() < 3 {
        return Err(Error::Insufficient(format!(
            "purity bound check needs at least 3 sizes, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(_, p)| p <= 0.0) {
        return Ok(false);
    }
    let x: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let y: Vec<f64> = points.iter().map(|&(_, p)| p.log2()).collect();
    Ok(fit_slope(&x, &y)? >= -1.0 - PURITY_RATE_TOL)
}
