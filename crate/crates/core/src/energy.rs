//! Region data costs and boundary/pair costs, including both curvature
//! weight schemes and the border special cases.

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::raster::{GrayImage, RgbImage, Seed, SeedMask};
use crate::scalar::{fl, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// theta^p
    AnglePower,
    /// min{l1, l2} * (theta / min{l1, l2})^p
    Bruckstein,
}

#[derive(Clone, Copy, Debug)]
pub struct EnergyParams<F: Scalar = f64> {
    /// Length weight, >= 0.
    pub nu: F,
    /// Curvature weight, >= 0.
    pub lambda: F,
    /// Curvature exponent, > 0.
    pub p: F,
    pub weight_mode: WeightMode,
}

impl<F: Scalar> EnergyParams<F> {
    pub fn new(nu: F, lambda: F, p: F, weight_mode: WeightMode) -> Result<Self> {
        if nu < F::zero() || lambda < F::zero() || p <= F::zero() {
            return Err(Error::Model(format!(
                "invalid energy parameters: nu={nu}, lambda={lambda}, p={p}"
            )));
        }
        Ok(EnergyParams { nu, lambda, p, weight_mode })
    }
}

/// Per-face data cost c_R plus the dropped constant term of the energy,
/// carried so relative gaps can include it.
#[derive(Clone, Debug)]
pub struct DataCost<F: Scalar = f64> {
    pub per_face: Vec<F>,
    pub constant_offset: F,
}

/// Face area as a scalar (pixel units).
pub fn face_area_f<F: Scalar>(complex: &CellComplex, f: usize) -> F {
    let a = complex.faces[f].area;
    fl::<F>(*a.numer() as f64 / *a.denom() as f64)
}

/// Minimal and maximal image intensity, the default means of the
/// unsupervised two-phase model.
pub fn unsupervised_means<F: Scalar>(image: &GrayImage) -> Result<(F, F)> {
    let min = image.data.iter().copied().min().ok_or(Error::EmptyImage)?;
    let max = image.data.iter().copied().max().unwrap();
    Ok((fl(min as f64), fl(max as f64)))
}

/// Piecewise-constant two-phase data cost:
/// c_R^f = [(I - mu1)^2 - (I - mu0)^2] * area(f), offset Sum (I - mu0)^2.
pub fn data_cost_unsupervised<F: Scalar>(
    image: &GrayImage,
    mu0: F,
    mu1: F,
    complex: &CellComplex,
) -> Result<DataCost<F>> {
    if image.data.is_empty() {
        return Err(Error::EmptyImage);
    }
    if image.width != complex.width || image.height != complex.height {
        return Err(Error::InvalidDimensions(format!(
            "image {}x{} does not match complex {}x{}",
            image.width, image.height, complex.width, complex.height
        )));
    }
    let per_face = (0..complex.faces.len())
        .map(|f| {
            let (px, py) = complex.faces[f].pixel;
            let i = fl::<F>(image.get(px, py) as f64);
            ((i - mu1) * (i - mu1) - (i - mu0) * (i - mu0)) * face_area_f(complex, f)
        })
        .collect();
    let constant_offset = image
        .data
        .iter()
        .map(|&v| {
            let i = fl::<F>(v as f64);
            (i - mu0) * (i - mu0)
        })
        .sum();
    Ok(DataCost { per_face, constant_offset })
}

const PROB_FLOOR: f64 = 1e-8;

/// Histogram-based data cost for interactive segmentation: smoothed
/// normalized color histograms over the seed pixels give p_F and p_B;
/// foreground costs -log p_F, background -log p_B.
pub fn data_cost_histogram<F: Scalar>(
    image: &RgbImage,
    seeds: &SeedMask,
    bins: usize,
    smoothing: f64,
    complex: &CellComplex,
) -> Result<DataCost<F>> {
    if image.width != complex.width || image.height != complex.height {
        return Err(Error::InvalidDimensions("image does not match complex".into()));
    }
    if seeds.width != image.width || seeds.height != image.height {
        return Err(Error::Seeds("seed mask does not match image".into()));
    }
    if bins == 0 || bins > 256 {
        return Err(Error::Seeds(format!("bin count {bins} out of range")));
    }
    let bin_of = |c: u8| (c as usize * bins) / 256;
    let idx_of = |px: [u8; 3]| (bin_of(px[0]) * bins + bin_of(px[1])) * bins + bin_of(px[2]);

    let mut hist_fg = vec![0.0f64; bins * bins * bins];
    let mut hist_bg = vec![0.0f64; bins * bins * bins];
    let (mut n_fg, mut n_bg) = (0usize, 0usize);
    for y in 0..image.height {
        for x in 0..image.width {
            match seeds.get(x, y) {
                Seed::Foreground => {
                    hist_fg[idx_of(image.get(x, y))] += 1.0;
                    n_fg += 1;
                }
                Seed::Background => {
                    hist_bg[idx_of(image.get(x, y))] += 1.0;
                    n_bg += 1;
                }
                Seed::None => {}
            }
        }
    }
    if n_fg == 0 || n_bg == 0 {
        return Err(Error::Seeds("need at least one foreground and one background seed".into()));
    }
    for hist in [&mut hist_fg, &mut hist_bg] {
        if smoothing > 0.0 {
            smooth_histogram(hist, bins, smoothing);
        }
        let total: f64 = hist.iter().sum();
        for v in hist.iter_mut() {
            *v = (*v / total).max(PROB_FLOOR);
        }
    }

    let per_face = (0..complex.faces.len())
        .map(|f| {
            let (px, py) = complex.faces[f].pixel;
            let i = idx_of(image.get(px, py));
            fl::<F>(-hist_fg[i].ln() + hist_bg[i].ln()) * face_area_f(complex, f)
        })
        .collect();
    let constant_offset = image
        .data
        .iter()
        .map(|&px| fl::<F>(-hist_bg[idx_of(px)].ln()))
        .sum();
    Ok(DataCost { per_face, constant_offset })
}

/// Separable truncated-Gaussian smoothing over the three bin axes.
fn smooth_histogram(hist: &mut [f64], bins: usize, sigma: f64) {
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k as f64) * (k as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.iter().map(|v| v / ksum).collect();
    let strides = [bins * bins, bins, 1];
    for axis in 0..3 {
        let stride = strides[axis];
        let mut out = vec![0.0f64; hist.len()];
        for (i, &v) in hist.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let pos = (i / stride) % bins;
            for (ki, &kv) in kernel.iter().enumerate() {
                let off = ki as isize - radius;
                let p = pos as isize + off;
                if p < 0 || p >= bins as isize {
                    continue;
                }
                out[(i as isize + off * stride as isize) as usize] += v * kv;
            }
        }
        hist.copy_from_slice(&out);
    }
}

/// Absolute exterior (turning) angle between two adjacent oriented lines,
/// in [0, pi].
pub fn turning_angle<F: Scalar>(complex: &CellComplex, l1: usize, l2: usize) -> F {
    let d1 = complex.lines[l1].direction;
    let d2 = complex.lines[l2].direction;
    fl(angle_between(d1, d2))
}

pub(crate) fn angle_between(d1: [f64; 2], d2: [f64; 2]) -> f64 {
    let cross = d1[0] * d2[1] - d1[1] * d2[0];
    let dot = d1[0] * d2[0] + d1[1] * d2[1];
    cross.abs().atan2(dot)
}

/// Curvature weight w(l1, l2) for a turning angle `theta`, before the
/// lambda factor and corner zeroing.
pub(crate) fn curvature_weight<F: Scalar>(
    theta: F,
    len1: F,
    len2: F,
    p: F,
    mode: WeightMode,
) -> F {
    match mode {
        WeightMode::AnglePower => theta.powf(p),
        WeightMode::Bruckstein => {
            let m = len1.min(len2);
            m * (theta / m).powf(p)
        }
    }
}

/// Length and curvature parts of the cost of a line pair. The length of a
/// segment on the domain border counts as 0, and the curvature weight is 0
/// when the shared node is a domain corner.
pub fn pair_cost_parts<F: Scalar>(
    complex: &CellComplex,
    pair: usize,
    params: &EnergyParams<F>,
) -> (F, F) {
    let p = &complex.pairs[pair];
    let (e1, e2) = (p.first / 2, p.second / 2);
    let len1 = fl::<F>(complex.edges[e1].length);
    let len2 = fl::<F>(complex.edges[e2].length);
    let eff1 = if complex.edges[e1].on_border { F::zero() } else { len1 };
    let eff2 = if complex.edges[e2].on_border { F::zero() } else { len2 };
    let length_part = params.nu * fl::<F>(0.5) * (eff1 + eff2);
    let curvature_part = if complex.is_domain_corner(p.node) {
        F::zero()
    } else {
        let theta = turning_angle(complex, p.first, p.second);
        params.lambda * curvature_weight(theta, len1, len2, params.p, params.weight_mode)
    };
    (length_part, curvature_part)
}

/// Total cost of a line pair: lambda * w(l1, l2) + nu * (l'(l1) + l'(l2)) / 2.
pub fn pair_cost<F: Scalar>(complex: &CellComplex, pair: usize, params: &EnergyParams<F>) -> F {
    let (len, curv) = pair_cost_parts(complex, pair, params);
    len + curv
}

/// Costs of all pairs, in pair order.
pub fn pair_costs<F: Scalar>(complex: &CellComplex, params: &EnergyParams<F>) -> Vec<F> {
    (0..complex.pairs.len())
        .map(|p| pair_cost(complex, p, params))
        .collect()
}

/// Length cost nu * l(e) of an oriented line; used by the length-only model.
pub fn length_cost<F: Scalar>(complex: &CellComplex, line: usize, nu: F) -> F {
    nu * fl::<F>(complex.edges[line / 2].length)
}
