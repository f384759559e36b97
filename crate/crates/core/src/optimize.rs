//! The segmentation pipeline: LP relaxation of the curvature model with
//! lazily separated crossing-prevention cuts, thresholding of the region
//! variables, and a warm-started boundary re-solve that prices the final
//! contour exactly.

use crate::complex::CellComplex;
use crate::energy::{pair_cost_parts, pair_costs, DataCost, EnergyParams};
use crate::error::{Error, Result};
use crate::mincut::segment_length_mincut;
use crate::model::{
    build_curvature_model_with_costs, crossing_row, fix_seeds, VariableMap,
};
use crate::raster::{GrayImage, SeedMask};
use crate::scalar::{fl, Scalar};
use crate::simplex::{LpSolution, SimplexSolver, SolveStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingPolicy {
    /// No crossing prevention (boundaries may touch themselves).
    Off,
    /// Separate violated crossing rows as cutting planes.
    Lazy,
    /// All crossing rows up front.
    Eager,
}

#[derive(Clone, Debug)]
pub struct SegmentOptions<F: Scalar = f64> {
    pub params: EnergyParams<F>,
    pub crossings: CrossingPolicy,
    /// Region variables at or above this relaxation value become foreground.
    pub threshold: F,
    pub max_crossing_passes: usize,
    pub iteration_cap: u64,
}

impl<F: Scalar> SegmentOptions<F> {
    pub fn new(params: EnergyParams<F>) -> Self {
        SegmentOptions {
            params,
            crossings: CrossingPolicy::Lazy,
            threshold: fl(0.5),
            max_crossing_passes: 25,
            iteration_cap: 10_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SegmentationResult<F: Scalar = f64> {
    /// Thresholded per-face labels (0 background, 1 foreground).
    pub labels: Vec<u8>,
    /// Region-variable values of the final relaxation, in face order.
    pub relaxation: Vec<F>,
    /// Objective of the integral labeling with its optimal boundary
    /// (constant data offset excluded).
    pub energy: F,
    /// Relaxation optimum: a lower bound on any integral labeling.
    pub lower_bound: F,
    /// (energy - lower_bound) / |energy + offset|.
    pub relative_gap: F,
    /// Region variables away from both 0 and 1 in the relaxation.
    pub fractional_count: usize,
    /// Cutting-plane rounds that added at least one crossing row.
    pub crossing_passes: usize,
    pub lp_iterations: u64,
    pub data_energy: F,
    pub length_energy: F,
    pub curvature_energy: F,
}

/// Solves, then repeatedly separates violated crossing rows until none are
/// violated or the pass budget is exhausted. Returns the last solution and
/// the number of passes that added cuts.
fn solve_with_crossing_cuts<F: Scalar>(
    solver: &mut SimplexSolver<F>,
    complex: &CellComplex,
    var_map: &VariableMap,
    added: &mut [bool],
    lazy: bool,
    max_passes: usize,
) -> Result<(LpSolution<F>, usize)> {
    let mut solution = solver.solve()?;
    if !lazy {
        return Ok((solution, 0));
    }
    let tol = F::feas_tol();
    let mut passes = 0;
    loop {
        if solution.status != SolveStatus::Optimal {
            return Ok((solution, passes));
        }
        let mut violated = Vec::new();
        for (k, &(p, q)) in complex.crossings.iter().enumerate() {
            if added[k] {
                continue;
            }
            let v = solution.x[var_map.boundary_var(p)] + solution.x[var_map.boundary_var(q)];
            if v > F::one() + tol {
                violated.push((k, p, q));
            }
        }
        if violated.is_empty() {
            return Ok((solution, passes));
        }
        if passes >= max_passes {
            return Err(Error::PassLimit(max_passes));
        }
        for (k, p, q) in violated {
            solver.append_row(&crossing_row(var_map, p, q, F::one()));
            added[k] = true;
        }
        passes += 1;
        solution = solver.solve()?;
    }
}

/// Full curvature segmentation: relaxation, thresholding and boundary
/// re-solve. Seeded pixels are fixed before the first solve.
pub fn segment<F: Scalar>(
    complex: &CellComplex,
    data_cost: &DataCost<F>,
    seeds: Option<&SeedMask>,
    opts: &SegmentOptions<F>,
) -> Result<SegmentationResult<F>> {
    if opts.threshold < F::zero() || opts.threshold > F::one() {
        return Err(Error::Model("threshold outside [0, 1]".into()));
    }
    let costs = pair_costs(complex, &opts.params);
    let eager = opts.crossings == CrossingPolicy::Eager;
    let (mut model, var_map) =
        build_curvature_model_with_costs(complex, data_cost, &costs, eager);
    if let Some(mask) = seeds {
        fix_seeds(&mut model, &var_map, complex, mask)?;
    }
    let mut solver = SimplexSolver::new(&model)?;
    solver.iteration_cap = opts.iteration_cap;
    // Crash basis: the length-only optimum comes cheap from max-flow and is
    // usually close to the curvature optimum.
    if let Ok((warm, _)) = segment_length_mincut(complex, data_cost, opts.params.nu) {
        let ups: Vec<usize> = (0..complex.faces.len())
            .filter(|&f| warm[f] == 1)
            .map(|f| var_map.region_var(f))
            .collect();
        solver.warm_start_at_upper(&ups);
    }
    let mut added = vec![eager; complex.crossings.len()];
    let lazy = opts.crossings == CrossingPolicy::Lazy;
    let (relaxed, crossing_passes) = solve_with_crossing_cuts(
        &mut solver,
        complex,
        &var_map,
        &mut added,
        lazy,
        opts.max_crossing_passes,
    )?;
    match relaxed.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(Error::Model("infeasible model (seeds?)".into())),
        SolveStatus::Unbounded => return Err(Error::Solver("unbounded relaxation".into())),
        SolveStatus::IterationLimit => return Err(Error::IterationLimit(relaxed.iterations)),
    }
    let lower_bound = relaxed.objective;
    let relaxation: Vec<F> = (0..complex.faces.len())
        .map(|f| relaxed.x[var_map.region_var(f)])
        .collect();
    let frac_tol = fl::<F>(1e-6);
    let fractional_count = relaxation
        .iter()
        .filter(|&&v| v > frac_tol && v < F::one() - frac_tol)
        .count();
    let labels: Vec<u8> = relaxation
        .iter()
        .map(|&v| (v >= opts.threshold) as u8)
        .collect();

    // Boundary re-solve: fix the labels and rule out every pair that is not
    // on the forced jump set, then warm-start.
    for f in 0..complex.faces.len() {
        let v = fl::<F>(labels[f] as f64);
        solver.set_var_bounds(var_map.region_var(f), v, v);
    }
    let forced_line: Vec<Option<usize>> = (0..complex.edges.len())
        .map(|e| {
            let jump: i32 = complex.edges[e]
                .faces
                .iter()
                .flatten()
                .map(|&f| complex.incidence_region(e, f) as i32 * labels[f] as i32)
                .sum();
            match jump {
                1 => Some(2 * e),
                -1 => Some(2 * e + 1),
                _ => None,
            }
        })
        .collect();
    for p in 0..complex.pairs.len() {
        let pair = &complex.pairs[p];
        let on_forced = forced_line[pair.first / 2] == Some(pair.first)
            && forced_line[pair.second / 2] == Some(pair.second);
        if !on_forced {
            solver.set_var_bounds(var_map.boundary_var(p), F::zero(), F::zero());
        }
    }
    let (resolved, extra_passes) = solve_with_crossing_cuts(
        &mut solver,
        complex,
        &var_map,
        &mut added,
        lazy,
        opts.max_crossing_passes.saturating_sub(crossing_passes),
    )?;
    if resolved.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!(
            "boundary re-solve ended {:?}",
            resolved.status
        )));
    }
    let energy = resolved.objective;
    let denom = (energy + data_cost.constant_offset).abs().max(fl(1e-12));
    let relative_gap = ((energy - lower_bound) / denom).max(F::zero());

    let data_energy = (0..complex.faces.len())
        .map(|f| data_cost.per_face[f] * fl::<F>(labels[f] as f64))
        .sum();
    let mut length_energy = F::zero();
    let mut curvature_energy = F::zero();
    for p in 0..complex.pairs.len() {
        let w = resolved.x[var_map.boundary_var(p)];
        if w != F::zero() {
            let (len, curv) = pair_cost_parts(complex, p, &opts.params);
            length_energy = length_energy + w * len;
            curvature_energy = curvature_energy + w * curv;
        }
    }
    Ok(SegmentationResult {
        labels,
        relaxation,
        energy,
        lower_bound,
        relative_gap,
        fractional_count,
        crossing_passes: crossing_passes + extra_passes,
        lp_iterations: resolved.iterations,
        data_energy,
        length_energy,
        curvature_energy,
    })
}

/// Renders per-face labels back to pixels: each pixel's gray value is the
/// area fraction of its foreground faces scaled to 0..=255.
pub fn labels_to_image(complex: &CellComplex, labels: &[u8]) -> GrayImage {
    let mut acc = vec![0.0f64; complex.width * complex.height];
    for (f, face) in complex.faces.iter().enumerate() {
        if labels[f] == 1 {
            let (px, py) = face.pixel;
            let area = *face.area.numer() as f64 / *face.area.denom() as f64;
            acc[py * complex.width + px] += area;
        }
    }
    GrayImage {
        width: complex.width,
        height: complex.height,
        data: acc
            .iter()
            .map(|&a| (a.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect(),
    }
}
