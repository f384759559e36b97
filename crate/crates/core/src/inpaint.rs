//! Curvature-regularized inpainting: damaged 4-connected components are
//! extracted together with a retained one-pixel band, level-line directions
//! are estimated from a masked-normalized structure tensor, and each
//! component is filled by the boundary-cost program over its sub-complex.

use crate::complex::{build_complex, CellComplex, Connectivity};
use crate::energy::{angle_between, curvature_weight, pair_cost_parts, pair_costs, EnergyParams};
use crate::error::{Error, Result};
use crate::model::{build_inpaint_model, FaceRole};
use crate::raster::GrayImage;
use crate::scalar::{fl, Scalar};
use crate::simplex::{SimplexSolver, SolveStatus};
use std::collections::BTreeSet;

/// A 4-connected set of damaged pixels plus its retained surroundings.
#[derive(Clone, Debug)]
pub struct DamagedComponent {
    /// Damaged pixels, in raster order.
    pub pixels: Vec<(usize, usize)>,
    /// Retained 4-neighbors of the damaged set (the one-pixel band).
    pub band: Vec<(usize, usize)>,
    /// Minimal intensity along the band.
    pub lower: u8,
    /// Maximal intensity along the band.
    pub upper: u8,
}

/// Splits the damaged set (nonzero mask pixels) into 4-connected components.
pub fn damaged_components(
    image: &GrayImage,
    mask: &GrayImage,
) -> Result<Vec<DamagedComponent>> {
    if mask.width != image.width || mask.height != image.height {
        return Err(Error::InvalidDimensions(format!(
            "mask {}x{} does not match image {}x{}",
            mask.width, mask.height, image.width, image.height
        )));
    }
    let (w, h) = (image.width, image.height);
    let damaged = |x: usize, y: usize| mask.get(x, y) != 0;
    let mut seen = vec![false; w * h];
    let mut components = Vec::new();
    for start_y in 0..h {
        for start_x in 0..w {
            if !damaged(start_x, start_y) || seen[start_y * w + start_x] {
                continue;
            }
            let mut pixels = Vec::new();
            let mut queue = std::collections::VecDeque::new();
            seen[start_y * w + start_x] = true;
            queue.push_back((start_x, start_y));
            while let Some((x, y)) = queue.pop_front() {
                pixels.push((x, y));
                for (nx, ny) in neighbors4(x, y, w, h) {
                    if damaged(nx, ny) && !seen[ny * w + nx] {
                        seen[ny * w + nx] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            pixels.sort_by_key(|&(x, y)| (y, x));
            let mut band = BTreeSet::new();
            for &(x, y) in &pixels {
                for (nx, ny) in neighbors4(x, y, w, h) {
                    if !damaged(nx, ny) {
                        band.insert((ny, nx));
                    }
                }
            }
            let band: Vec<(usize, usize)> = band.into_iter().map(|(y, x)| (x, y)).collect();
            let lower = band.iter().map(|&(x, y)| image.get(x, y)).min().unwrap_or(0);
            let upper = band.iter().map(|&(x, y)| image.get(x, y)).max().unwrap_or(0);
            components.push(DamagedComponent { pixels, band, lower, upper });
        }
    }
    Ok(components)
}

fn neighbors4(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)]
        .into_iter()
        .filter_map(move |(dx, dy)| {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            (nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64)
                .then(|| (nx as usize, ny as usize))
        })
}

/// Per-pixel level-line tangent estimates on the retained domain.
#[derive(Clone, Debug)]
pub struct CoherenceField {
    pub width: usize,
    pub height: usize,
    pub sigma: f64,
    pub rho: f64,
    /// Unit minor eigenvector of the structure tensor per retained pixel;
    /// `None` on damaged pixels and where the tensor is isotropic.
    pub direction: Vec<Option<[f64; 2]>>,
}

impl CoherenceField {
    pub fn get(&self, x: usize, y: usize) -> Option<[f64; 2]> {
        self.direction[y * self.width + x]
    }
}

/// Truncated (3 standard deviations) normalized Gaussian kernel.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

/// Separable convolution with zero padding outside the image; masked
/// normalization is done by the caller by also blurring the mask weight.
fn blur(field: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let radius = (kernel.len() / 2) as i64;
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sx = x as i64 + k as i64 - radius;
                if sx >= 0 && sx < w as i64 {
                    acc += kv * field[y * w + sx as usize];
                }
            }
            rows[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sy = y as i64 + k as i64 - radius;
                if sy >= 0 && sy < h as i64 {
                    acc += kv * rows[sy as usize * w + x];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

const ISOTROPY_TOL: f64 = 1e-12;

/// Estimates level-line tangents: masked-normalized Gaussian smoothing of
/// the image, central-difference gradients on the retained domain, the
/// masked-normalized structure tensor smoothed at scale `rho`, and per
/// retained pixel the unit eigenvector of the smaller eigenvalue, with its
/// sign turned toward the damaged set.
pub fn coherence_directions(
    image: &GrayImage,
    mask: &GrayImage,
    sigma: f64,
    rho: f64,
) -> Result<CoherenceField> {
    if mask.width != image.width || mask.height != image.height {
        return Err(Error::InvalidDimensions("mask does not match image".into()));
    }
    if sigma <= 0.0 || rho <= 0.0 {
        return Err(Error::Inpaint(format!(
            "smoothing scales must be positive, got sigma={sigma}, rho={rho}"
        )));
    }
    let (w, h) = (image.width, image.height);
    let weight: Vec<f64> = mask.data.iter().map(|&m| (m == 0) as u8 as f64).collect();
    let weighted: Vec<f64> = image
        .data
        .iter()
        .zip(&weight)
        .map(|(&i, &wv)| i as f64 * wv)
        .collect();
    let ks = gaussian_kernel(sigma);
    let num = blur(&weighted, w, h, &ks);
    let den = blur(&weight, w, h, &ks);
    let smoothed: Vec<Option<f64>> = num
        .iter()
        .zip(&den)
        .map(|(&n, &d)| (d > ISOTROPY_TOL).then(|| n / d))
        .collect();

    // Central-difference gradient on the retained domain, degrading to
    // one-sided differences next to damaged pixels and the image border.
    let retained = |x: i64, y: i64| {
        x >= 0 && y >= 0 && x < w as i64 && y < h as i64 && weight[y as usize * w + x as usize] > 0.0
    };
    let value = |x: i64, y: i64| smoothed[y as usize * w + x as usize].expect("retained pixel");
    let diff = |x: i64, y: i64, dx: i64, dy: i64| -> f64 {
        let plus = retained(x + dx, y + dy);
        let minus = retained(x - dx, y - dy);
        match (plus, minus) {
            (true, true) => (value(x + dx, y + dy) - value(x - dx, y - dy)) / 2.0,
            (true, false) => value(x + dx, y + dy) - value(x, y),
            (false, true) => value(x, y) - value(x - dx, y - dy),
            (false, false) => 0.0,
        }
    };
    let (mut jxx, mut jxy, mut jyy) = (vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !retained(x, y) {
                continue;
            }
            let gx = diff(x, y, 1, 0);
            let gy = diff(x, y, 0, 1);
            let i = y as usize * w + x as usize;
            jxx[i] = gx * gx;
            jxy[i] = gx * gy;
            jyy[i] = gy * gy;
        }
    }
    let tensor_masked = |t: &[f64]| -> Vec<f64> {
        t.iter().zip(&weight).map(|(&v, &wv)| v * wv).collect()
    };
    let kr = gaussian_kernel(rho);
    let sxx = blur(&tensor_masked(&jxx), w, h, &kr);
    let sxy = blur(&tensor_masked(&jxy), w, h, &kr);
    let syy = blur(&tensor_masked(&jyy), w, h, &kr);
    let dr = blur(&weight, w, h, &kr);

    let mut direction = vec![None; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if weight[i] == 0.0 || dr[i] <= ISOTROPY_TOL {
                continue;
            }
            let (a, b, c) = (sxx[i] / dr[i], sxy[i] / dr[i], syy[i] / dr[i]);
            let split = ((a - c).powi(2) + 4.0 * b * b).sqrt();
            let lambda_min = (a + c - split) / 2.0;
            assert!(lambda_min >= -1e-9, "structure tensor not PSD: {lambda_min}");
            if split <= ISOTROPY_TOL {
                continue; // isotropic, no preferred direction
            }
            let v1 = [b, lambda_min - a];
            let v2 = [lambda_min - c, b];
            let n1 = v1[0] * v1[0] + v1[1] * v1[1];
            let n2 = v2[0] * v2[0] + v2[1] * v2[1];
            let v = if n1 >= n2 { v1 } else { v2 };
            let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
            let mut d = [v[0] / norm, v[1] / norm];
            // Orient toward the damaged region (arbitrary-but-fixed
            // canonical sign when no damaged pixel is adjacent).
            let (mut tx, mut ty) = (0.0f64, 0.0f64);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx >= 0
                        && ny >= 0
                        && nx < w as i64
                        && ny < h as i64
                        && weight[ny as usize * w + nx as usize] == 0.0
                    {
                        tx += dx as f64;
                        ty += dy as f64;
                    }
                }
            }
            let toward = d[0] * tx + d[1] * ty;
            if toward < 0.0 || (toward == 0.0 && (d[0] < 0.0 || (d[0] == 0.0 && d[1] < 0.0))) {
                d = [-d[0], -d[1]];
            }
            direction[i] = Some(d);
        }
    }
    Ok(CoherenceField { width: w, height: h, sigma, rho, direction })
}

/// Per-face roles of one component: damaged faces free, band faces fixed to
/// the intensity shifted by the component minimum, everything else excluded.
fn component_roles<F: Scalar>(
    image: &GrayImage,
    component: &DamagedComponent,
    complex: &CellComplex,
) -> Vec<FaceRole<F>> {
    let damaged: BTreeSet<(usize, usize)> = component.pixels.iter().copied().collect();
    let band: BTreeSet<(usize, usize)> = component.band.iter().copied().collect();
    (0..complex.faces.len())
        .map(|f| {
            let px = complex.faces[f].pixel;
            if damaged.contains(&px) {
                FaceRole::Free
            } else if band.contains(&px) {
                FaceRole::Fixed(fl::<F>(
                    (image.get(px.0, px.1) - component.lower) as f64,
                ))
            } else {
                FaceRole::Excluded
            }
        })
        .collect()
}

/// True iff every modeled face incident to the edge is a fixed band face.
fn edge_in_band<F: Scalar>(complex: &CellComplex, roles: &[FaceRole<F>], e: usize) -> bool {
    let mut any_fixed = false;
    for &f in complex.edges[e].faces.iter().flatten() {
        match roles[f] {
            FaceRole::Free => return false,
            FaceRole::Fixed(_) => any_fixed = true,
            FaceRole::Excluded => {}
        }
    }
    any_fixed
}

/// Pair costs with the coherence override: for pairs meeting at a node of
/// the damage interface whose first segment lies in the band, the turning
/// angle is measured between the estimated level-line direction and the
/// second segment, so prolonging the estimate costs no curvature.
pub fn coherence_pair_costs<F: Scalar>(
    complex: &CellComplex,
    roles: &[FaceRole<F>],
    params: &EnergyParams<F>,
    coherence: &CoherenceField,
) -> Vec<F> {
    let mut costs = pair_costs(complex, params);
    let nv = complex.vertices.len();
    let mut touches_free = vec![false; nv];
    let mut touches_fixed = vec![false; nv];
    for (f, role) in roles.iter().enumerate() {
        let flags: &mut [bool] = match role {
            FaceRole::Free => &mut touches_free,
            FaceRole::Fixed(_) => &mut touches_fixed,
            FaceRole::Excluded => continue,
        };
        for &v in &complex.faces[f].polygon {
            flags[v] = true;
        }
    }
    for (p, pair) in complex.pairs.iter().enumerate() {
        let node = pair.node;
        if !touches_free[node] || !touches_fixed[node] || complex.is_domain_corner(node) {
            continue;
        }
        let e1 = pair.first / 2;
        if !edge_in_band(complex, roles, e1) {
            continue;
        }
        let Some(&band_face) = complex.edges[e1]
            .faces
            .iter()
            .flatten()
            .find(|&&f| matches!(roles[f], FaceRole::Fixed(_)))
        else {
            continue;
        };
        let (px, py) = complex.faces[band_face].pixel;
        let Some(dir) = coherence.get(px, py) else { continue };
        let theta = angle_between(dir, complex.lines[pair.second].direction);
        let len1 = fl::<F>(complex.edges[e1].length);
        let len2 = fl::<F>(complex.edges[pair.second / 2].length);
        let (length_part, _) = pair_cost_parts(complex, p, params);
        costs[p] = length_part
            + params.lambda
                * curvature_weight(fl(theta), len1, len2, params.p, params.weight_mode);
    }
    costs
}

/// Fill of one component: intensities for its free faces plus solve metrics.
#[derive(Clone, Debug)]
pub struct ComponentFill<F: Scalar = f64> {
    /// Per complex face: the filled intensity for the component's damaged
    /// faces, `None` elsewhere. Already un-shifted to image units.
    pub face_values: Vec<Option<F>>,
    /// Objective of the rounded fill's boundary re-solve.
    pub energy: F,
    /// Relaxation optimum (lower bound on any integral fill).
    pub lower_bound: F,
    /// Free region variables away from integral values in the relaxation.
    pub fractional_count: usize,
    pub lp_iterations: u64,
}

/// Fills one damaged component: assembles the boundary-cost program over
/// the damaged-plus-band sub-complex with coherence-overridden pair costs,
/// solves the relaxation, rounds the free intensities to integers and
/// re-solves the boundaries for the reported energy.
pub fn inpaint_component<F: Scalar>(
    image: &GrayImage,
    component: &DamagedComponent,
    complex: &CellComplex,
    params: &EnergyParams<F>,
    coherence: &CoherenceField,
    iteration_cap: u64,
) -> Result<ComponentFill<F>> {
    if component.band.is_empty() {
        return Err(Error::Inpaint(
            "damaged component has no retained neighbors; fill is underdetermined".into(),
        ));
    }
    let roles = component_roles::<F>(image, component, complex);
    let range = fl::<F>((component.upper - component.lower) as f64);
    let costs = coherence_pair_costs(complex, &roles, params, coherence);
    let (model, var_map) = build_inpaint_model(complex, &roles, range, &costs)?;
    let mut solver = SimplexSolver::new(&model)?;
    solver.iteration_cap = iteration_cap;
    let relaxed = solver.solve()?;
    match relaxed.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(Error::Inpaint("infeasible component model".into())),
        SolveStatus::Unbounded => return Err(Error::Solver("unbounded inpainting model".into())),
        SolveStatus::IterationLimit => return Err(Error::IterationLimit(relaxed.iterations)),
    }
    let lower_bound = relaxed.objective;
    let shift = fl::<F>(component.lower as f64);
    let mut face_values = vec![None; complex.faces.len()];
    let mut fractional_count = 0;
    for (f, role) in roles.iter().enumerate() {
        if *role != FaceRole::Free {
            continue;
        }
        let var = var_map.region_var(f);
        let v = relaxed.x[var];
        let rounded = fl::<F>(v.to_f64_lossy().round()).max(F::zero()).min(range);
        if (v - rounded).abs() > fl(1e-6) {
            fractional_count += 1;
        }
        solver.set_var_bounds(var, rounded, rounded);
        face_values[f] = Some(rounded + shift);
    }
    let resolved = solver.solve()?;
    if resolved.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!(
            "boundary re-solve ended {:?}",
            resolved.status
        )));
    }
    Ok(ComponentFill {
        face_values,
        energy: resolved.objective,
        lower_bound,
        fractional_count,
        lp_iterations: resolved.iterations,
    })
}

/// Merges component fills back into the image: each damaged pixel becomes
/// the area-weighted mean of its face intensities (rounded), retained
/// pixels are unchanged.
pub fn assemble_output<F: Scalar>(
    image: &GrayImage,
    mask: &GrayImage,
    complex: &CellComplex,
    fills: &[ComponentFill<F>],
) -> Result<GrayImage> {
    let (w, h) = (image.width, image.height);
    let mut acc = vec![0.0f64; w * h];
    let mut covered = vec![0.0f64; w * h];
    for fill in fills {
        for (f, value) in fill.face_values.iter().enumerate() {
            if let Some(v) = value {
                let (px, py) = complex.faces[f].pixel;
                let face = &complex.faces[f];
                let area = *face.area.numer() as f64 / *face.area.denom() as f64;
                acc[py * w + px] += area * v.to_f64_lossy();
                covered[py * w + px] += area;
            }
        }
    }
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) == 0 {
                continue;
            }
            if covered[y * w + x] < 1.0 - 1e-9 {
                return Err(Error::Inpaint(format!(
                    "damaged pixel ({x}, {y}) not covered by any fill"
                )));
            }
            out.set(x, y, acc[y * w + x].round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct InpaintOptions<F: Scalar = f64> {
    pub params: EnergyParams<F>,
    /// Gradient pre-smoothing scale.
    pub sigma: f64,
    /// Structure-tensor smoothing scale.
    pub rho: f64,
    pub iteration_cap: u64,
}

impl<F: Scalar> InpaintOptions<F> {
    pub fn new(params: EnergyParams<F>) -> Self {
        InpaintOptions { params, sigma: 1.5, rho: 4.0, iteration_cap: 10_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct InpaintResult<F: Scalar = f64> {
    pub image: GrayImage,
    pub components: Vec<DamagedComponent>,
    pub fills: Vec<ComponentFill<F>>,
}

/// Whole-image inpainting: component extraction, coherence estimation and
/// an independent solve per component, merged back into one image.
pub fn inpaint<F: Scalar>(
    image: &GrayImage,
    mask: &GrayImage,
    connectivity: Connectivity,
    opts: &InpaintOptions<F>,
) -> Result<InpaintResult<F>> {
    let components = damaged_components(image, mask)?;
    if components.is_empty() {
        return Ok(InpaintResult {
            image: image.clone(),
            components,
            fills: Vec::new(),
        });
    }
    let complex = build_complex(image.width, image.height, connectivity)?;
    let coherence = coherence_directions(image, mask, opts.sigma, opts.rho)?;
    let fills = components
        .iter()
        .map(|comp| {
            inpaint_component(
                image,
                comp,
                &complex,
                &opts.params,
                &coherence,
                opts.iteration_cap,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let out = assemble_output(image, mask, &complex, &fills)?;
    Ok(InpaintResult { image: out, components, fills })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::WeightMode;

    fn mask_of(w: usize, h: usize, damaged: &[(usize, usize)]) -> GrayImage {
        let mut m = GrayImage::new(w, h);
        for &(x, y) in damaged {
            m.set(x, y, 255);
        }
        m
    }

    fn params(nu: f64, lambda: f64) -> EnergyParams {
        EnergyParams::new(nu, lambda, 2.0, WeightMode::AnglePower).unwrap()
    }

    #[test]
    fn single_pixel_component_and_band() {
        let img = GrayImage::from_fn(3, 3, |x, y| (10 * (x + 3 * y)) as u8);
        let mask = mask_of(3, 3, &[(1, 1)]);
        let comps = damaged_components(&img, &mask).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].pixels, vec![(1, 1)]);
        assert_eq!(comps[0].band, vec![(1, 0), (0, 1), (2, 1), (1, 2)]);
        assert_eq!(comps[0].lower, 10);
        assert_eq!(comps[0].upper, 70);
    }

    #[test]
    fn diagonal_pixels_are_separate_components() {
        let img = GrayImage::new(3, 3);
        let mask = mask_of(3, 3, &[(0, 0), (1, 1)]);
        let comps = damaged_components(&img, &mask).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].pixels, vec![(0, 0)]);
        assert_eq!(comps[1].pixels, vec![(1, 1)]);
    }

    #[test]
    fn empty_mask_yields_no_components() {
        let img = GrayImage::new(2, 2);
        let mask = GrayImage::new(2, 2);
        assert!(damaged_components(&img, &mask).unwrap().is_empty());
    }

    #[test]
    fn ring_damage_band_includes_the_hole() {
        // A ring of damaged pixels around (2, 2): one component whose band
        // contains both the enclosed pixel and outside pixels.
        let damaged: Vec<(usize, usize)> = (1..4)
            .flat_map(|x| (1..4).map(move |y| (x, y)))
            .filter(|&p| p != (2, 2))
            .collect();
        let img = GrayImage::from_fn(5, 5, |x, y| (x * 40 + y) as u8);
        let mask = mask_of(5, 5, &damaged);
        let comps = damaged_components(&img, &mask).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].pixels.len(), 8);
        assert!(comps[0].band.contains(&(2, 2)), "inner boundary missing");
        assert!(comps[0].band.contains(&(0, 1)), "outer boundary missing");
        // Flood-fill oracle: every band pixel is retained and 4-adjacent to
        // a damaged pixel.
        for &(x, y) in &comps[0].band {
            assert_eq!(mask.get(x, y), 0);
            assert!(neighbors4(x, y, 5, 5).any(|(nx, ny)| mask.get(nx, ny) != 0));
        }
    }

    #[test]
    fn ramp_coherence_is_perpendicular_to_the_gradient() {
        // On an undamaged ramp the gradient is horizontal everywhere, so the
        // level-line direction is exactly vertical. (Near a damaged pixel the
        // masked smoothing bends the level lines of a ramp; perpendicularity
        // to machine precision only holds away from damage.)
        let img = GrayImage::from_fn(9, 9, |x, _| (20 * x) as u8);
        let mask = GrayImage::new(9, 9);
        let field = coherence_directions(&img, &mask, 1.5, 4.0).unwrap();
        for y in 0..9 {
            for x in 0..9 {
                let d = field.get(x, y).expect("retained pixels are defined");
                assert!(d[0].abs() < 1e-6, "({x},{y}): {d:?}");
                assert!((d[1].abs() - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn constant_image_is_isotropic() {
        let img = GrayImage::from_fn(6, 6, |_, _| 99);
        let mask = mask_of(6, 6, &[(3, 3)]);
        let field = coherence_directions(&img, &mask, 1.5, 4.0).unwrap();
        assert!(field.direction.iter().all(Option::is_none));
    }

    #[test]
    fn stripe_directions_follow_the_stripes() {
        // Stripes constant along (1, 1): level lines at 45 degrees. The
        // stripe period must comfortably exceed the smoothing scale or the
        // pattern is averaged away.
        let img = GrayImage::from_fn(20, 20, |x, y| {
            if (x as i64 - y as i64).rem_euclid(8) < 4 { 30 } else { 220 }
        });
        let mask = mask_of(20, 20, &[(10, 10), (10, 9)]);
        let field = coherence_directions(&img, &mask, 1.5, 4.0).unwrap();
        let diag = std::f64::consts::FRAC_1_SQRT_2;
        let cos2deg = (2.0f64).to_radians().cos();
        let mut checked = 0;
        for y in 5..15 {
            for x in 5..15 {
                let Some(d) = field.get(x, y) else { continue };
                let align = (d[0] * diag + d[1] * diag).abs();
                assert!(align > cos2deg, "({x},{y}): {d:?}");
                checked += 1;
            }
        }
        assert!(checked > 30);
        assert!(field.get(10, 10).is_none(), "damaged pixel must be undefined");
    }

    #[test]
    fn invalid_scales_are_rejected() {
        let img = GrayImage::new(2, 2);
        let mask = GrayImage::new(2, 2);
        assert!(coherence_directions(&img, &mask, 0.0, 4.0).is_err());
        assert!(coherence_directions(&img, &mask, 1.5, -1.0).is_err());
    }

    #[test]
    fn coherence_equal_to_geometry_is_neutral() {
        // Overriding with the first segment's own direction reproduces the
        // plain geometric pair cost.
        let img = GrayImage::from_fn(4, 4, |x, _| (x * 50) as u8);
        let mask = mask_of(4, 4, &[(1, 1), (2, 1)]);
        let complex = build_complex(4, 4, Connectivity::Conn8).unwrap();
        let comps = damaged_components(&img, &mask).unwrap();
        let roles = component_roles::<f64>(&img, &comps[0], &complex);
        let prm = params(1.0, 3.0);
        let plain = pair_costs(&complex, &prm);
        let mut field = CoherenceField {
            width: 4,
            height: 4,
            sigma: 1.5,
            rho: 4.0,
            direction: vec![None; 16],
        };
        let mut overridden = 0;
        for (p, pair) in complex.pairs.iter().enumerate() {
            let e1 = pair.first / 2;
            if !edge_in_band(&complex, &roles, e1) {
                continue;
            }
            let Some(&bf) = complex.edges[e1]
                .faces
                .iter()
                .flatten()
                .find(|&&f| matches!(roles[f], FaceRole::Fixed(_)))
            else {
                continue;
            };
            let (px, py) = complex.faces[bf].pixel;
            field.direction[py * 4 + px] = Some(complex.lines[pair.first].direction);
            let costs = coherence_pair_costs(&complex, &roles, &prm, &field);
            field.direction[py * 4 + px] = None;
            if (costs[p] - plain[p]).abs() < 1e-12 {
                continue;
            }
            overridden += 1;
            panic!("pair {p} changed cost under matching coherence");
        }
        assert_eq!(overridden, 0);
    }

    #[test]
    fn constant_surroundings_fill_constant() {
        let img = GrayImage::from_fn(6, 6, |_, _| 77);
        let mask = mask_of(6, 6, &[(2, 2), (3, 2), (2, 3), (3, 3)]);
        let opts = InpaintOptions::new(params(1.0, 2.0));
        let res: InpaintResult = inpaint(&img, &mask, Connectivity::Conn8, &opts).unwrap();
        assert_eq!(res.image.data, img.data);
        assert_eq!(res.components.len(), 1);
    }

    #[test]
    fn straight_edge_is_continued() {
        // A vertical two-tone edge runs through a 4x4 damaged block; the
        // fill must continue it straight and stay within the band's range.
        let img = GrayImage::from_fn(8, 8, |x, _| if x < 4 { 0 } else { 200 });
        let damaged: Vec<(usize, usize)> = (2..6)
            .flat_map(|x| (2..6).map(move |y| (x, y)))
            .collect();
        let mask = mask_of(8, 8, &damaged);
        let opts = InpaintOptions::new(params(1.0, 10.0));
        let res: InpaintResult = inpaint(&img, &mask, Connectivity::Conn8, &opts).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let want = if x < 4 { 0 } else { 200 };
                assert_eq!(res.image.get(x, y), want, "pixel ({x}, {y})");
            }
        }
        let comp = &res.components[0];
        assert_eq!((comp.lower, comp.upper), (0, 200));
        for v in res.fills[0].face_values.iter().flatten() {
            assert!((0.0..=200.0).contains(v));
        }
        assert!(res.fills[0].energy >= res.fills[0].lower_bound - 1e-6);
    }

    #[test]
    fn fully_damaged_image_is_underdetermined() {
        let img = GrayImage::new(2, 2);
        let mask = mask_of(2, 2, &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        let opts = InpaintOptions::new(params(1.0, 1.0));
        let err = inpaint::<f64>(&img, &mask, Connectivity::Conn8, &opts).unwrap_err();
        assert!(matches!(err, Error::Inpaint(_)), "{err}");
    }

    #[test]
    fn assemble_averages_face_areas() {
        let img = GrayImage::from_fn(2, 1, |x, _| (x * 9) as u8);
        let mask = mask_of(2, 1, &[(0, 0)]);
        let complex = build_complex(2, 1, Connectivity::Conn8).unwrap();
        // Quarter-area faces of pixel (0, 0) at 0, 0, 255, 255 average to
        // 127.5, rounded to 128; the retained pixel is untouched.
        let mut face_values = vec![None; complex.faces.len()];
        let mut set = 0;
        for f in 0..complex.faces.len() {
            if complex.faces[f].pixel == (0, 0) {
                face_values[f] = Some(if set < 2 { 0.0 } else { 255.0 });
                set += 1;
            }
        }
        let fill = ComponentFill {
            face_values,
            energy: 0.0,
            lower_bound: 0.0,
            fractional_count: 0,
            lp_iterations: 0,
        };
        let out = assemble_output(&img, &mask, &complex, &[fill]).unwrap();
        assert_eq!(out.get(0, 0), 128);
        assert_eq!(out.get(1, 0), 9);
    }

    #[test]
    fn uncovered_damaged_pixel_is_an_error() {
        let img = GrayImage::new(2, 1);
        let mask = mask_of(2, 1, &[(0, 0)]);
        let complex = build_complex(2, 1, Connectivity::Conn8).unwrap();
        let fill: ComponentFill = ComponentFill {
            face_values: vec![None; complex.faces.len()],
            energy: 0.0,
            lower_bound: 0.0,
            fractional_count: 0,
            lp_iterations: 0,
        };
        assert!(assemble_output(&img, &mask, &complex, &[fill]).is_err());
    }
}
