//! Solver-agnostic sparse linear models and the assembly of the three
//! programs: length segmentation, curvature segmentation and inpainting.

use crate::complex::CellComplex;
use crate::energy::{pair_costs, DataCost, EnergyParams};
use crate::error::{Error, Result};
use crate::raster::{Seed, SeedMask};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
}

#[derive(Clone, Debug)]
pub struct Row<F: Scalar = f64> {
    pub coeffs: Vec<(usize, F)>,
    pub relation: Relation,
    pub rhs: F,
}

impl<F: Scalar> Row<F> {
    pub fn eval(&self, x: &[F]) -> F {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Signed violation of the row at `x` (positive means violated).
    pub fn violation(&self, x: &[F]) -> F {
        let v = self.eval(&x[..]) - self.rhs;
        match self.relation {
            Relation::Eq => v.abs(),
            Relation::Le => v.max(F::zero()),
        }
    }
}

/// A sparse linear program: minimize `objective . x` subject to the rows,
/// per-variable bounds and (advisory) integrality tags.
#[derive(Clone, Debug, Default)]
pub struct LinearModel<F: Scalar = f64> {
    pub objective: Vec<F>,
    pub rows: Vec<Row<F>>,
    pub bounds: Vec<(F, F)>,
    pub integral: Vec<bool>,
    pub var_names: Vec<String>,
    pub row_names: Vec<String>,
}

impl<F: Scalar> LinearModel<F> {
    pub fn new() -> Self {
        LinearModel {
            objective: Vec::new(),
            rows: Vec::new(),
            bounds: Vec::new(),
            integral: Vec::new(),
            var_names: Vec::new(),
            row_names: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        obj: F,
        lower: F,
        upper: F,
        integral: bool,
    ) -> usize {
        let id = self.objective.len();
        self.objective.push(obj);
        self.bounds.push((lower, upper));
        self.integral.push(integral);
        self.var_names.push(name.into());
        id
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        relation: Relation,
        coeffs: Vec<(usize, F)>,
        rhs: F,
    ) -> usize {
        let id = self.rows.len();
        self.rows.push(Row { coeffs, relation, rhs });
        self.row_names.push(name.into());
        id
    }

    /// Fixes a variable by collapsing its bounds.
    pub fn fix_var(&mut self, var: usize, value: F) {
        self.bounds[var] = (value, value);
    }

    pub fn objective_value(&self, x: &[F]) -> F {
        self.objective.iter().zip(x).map(|(&c, &v)| c * v).sum()
    }

    pub fn max_row_violation(&self, x: &[F]) -> F {
        self.rows
            .iter()
            .map(|r| r.violation(x))
            .fold(F::zero(), F::max)
    }

    pub fn max_bound_violation(&self, x: &[F]) -> F {
        self.bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(F::zero()))
            .fold(F::zero(), F::max)
    }

    /// Checks the structural invariants: rows reference declared variables,
    /// bounds are ordered, the objective is finite.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(Error::Model(format!("row {i} references variable {j} >= {n}")));
                }
                if !a.is_finite() {
                    return Err(Error::Model(format!("row {i} has non-finite coefficient")));
                }
            }
            if !row.rhs.is_finite() {
                return Err(Error::Model(format!("row {i} has non-finite rhs")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo > hi {
                return Err(Error::Model(format!("variable {j} has lower > upper bound")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Model("non-finite objective coefficient".into()));
        }
        Ok(())
    }
}

/// Which entities the boundary variables of a model index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryVars {
    /// One variable per oriented line (length model).
    Lines,
    /// One variable per line pair (curvature and inpainting models).
    Pairs,
}

/// Bijection between complex entities and model variable ids.
#[derive(Clone, Debug)]
pub struct VariableMap {
    /// Face index -> region variable id (None if the face is not modeled).
    pub region: Vec<Option<usize>>,
    /// Line or pair index -> boundary variable id.
    pub boundary: Vec<Option<usize>>,
    pub kind: BoundaryVars,
}

impl VariableMap {
    pub fn region_var(&self, f: usize) -> usize {
        self.region[f].expect("face not in model")
    }

    pub fn boundary_var(&self, i: usize) -> usize {
        self.boundary[i].expect("boundary entity not in model")
    }
}

/// Length-regularized segmentation: variables y_R per face and y_B per
/// oriented line, one surface-continuation equality per edge.
pub fn build_length_model<F: Scalar>(
    complex: &CellComplex,
    data_cost: &DataCost<F>,
    nu: F,
) -> (LinearModel<F>, VariableMap) {
    let mut model = LinearModel::new();
    let one = F::one();
    let region: Vec<Option<usize>> = (0..complex.faces.len())
        .map(|f| Some(model.add_var(format!("yR_{f}"), data_cost.per_face[f], F::zero(), one, true)))
        .collect();
    let boundary: Vec<Option<usize>> = (0..complex.lines.len())
        .map(|l| {
            let cost = nu * crate::scalar::fl::<F>(complex.edges[l / 2].length);
            Some(model.add_var(format!("yB_{l}"), cost, F::zero(), one, true))
        })
        .collect();
    for e in 0..complex.edges.len() {
        let mut coeffs = Vec::new();
        for f in complex.edges[e].faces.iter().flatten() {
            let m = complex.incidence_region(e, *f);
            coeffs.push((region[*f].unwrap(), scalar_of::<F>(m)));
        }
        // = sum_l m_e^l y_B^l, moved to the left-hand side.
        coeffs.push((boundary[2 * e].unwrap(), -one));
        coeffs.push((boundary[2 * e + 1].unwrap(), one));
        model.add_row(format!("SC{e}"), Relation::Eq, coeffs, F::zero());
    }
    (model, VariableMap { region, boundary, kind: BoundaryVars::Lines })
}

fn scalar_of<F: Scalar>(m: i8) -> F {
    match m {
        1 => F::one(),
        -1 => -F::one(),
        _ => F::zero(),
    }
}

/// Curvature-regularized segmentation over line pairs, with surface
/// continuation, boundary continuation and boundary consistency rows, and
/// optionally all crossing-prevention rows up front.
pub fn build_curvature_model<F: Scalar>(
    complex: &CellComplex,
    data_cost: &DataCost<F>,
    params: &EnergyParams<F>,
    include_crossings: bool,
) -> (LinearModel<F>, VariableMap) {
    let costs = pair_costs(complex, params);
    build_curvature_model_with_costs(complex, data_cost, &costs, include_crossings)
}

/// Same as [`build_curvature_model`] but with explicit per-pair costs, the
/// hook used by inpainting's coherence-direction overrides.
pub fn build_curvature_model_with_costs<F: Scalar>(
    complex: &CellComplex,
    data_cost: &DataCost<F>,
    pair_cost: &[F],
    include_crossings: bool,
) -> (LinearModel<F>, VariableMap) {
    let mut model = LinearModel::new();
    let one = F::one();
    let region: Vec<Option<usize>> = (0..complex.faces.len())
        .map(|f| Some(model.add_var(format!("yR_{f}"), data_cost.per_face[f], F::zero(), one, true)))
        .collect();
    let boundary: Vec<Option<usize>> = (0..complex.pairs.len())
        .map(|p| Some(model.add_var(format!("yB_{p}"), pair_cost[p], F::zero(), one, true)))
        .collect();
    let var_map = VariableMap { region, boundary, kind: BoundaryVars::Pairs };
    add_boundary_rows(
        complex,
        &mut model,
        &var_map,
        one,
        |_| true,
        |_| true,
    );
    if include_crossings {
        for (k, &(p, q)) in complex.crossings.iter().enumerate() {
            let row = crossing_row(&var_map, p, q, one);
            model.add_row(format!("XP{k}"), row.relation, row.coeffs, row.rhs);
        }
    }
    (model, var_map)
}

/// The crossing-prevention row y_p + y_q <= rhs.
pub fn crossing_row<F: Scalar>(var_map: &VariableMap, p: usize, q: usize, rhs: F) -> Row<F> {
    Row {
        coeffs: vec![
            (var_map.boundary_var(p), F::one()),
            (var_map.boundary_var(q), F::one()),
        ],
        relation: Relation::Le,
        rhs,
    }
}

/// Emits the three shared constraint families over a face/edge subset:
/// (a) per-edge surface continuation, (b) per-line boundary continuation,
/// (c) per-edge boundary consistency with right-hand side `cap`.
fn add_boundary_rows<F: Scalar>(
    complex: &CellComplex,
    model: &mut LinearModel<F>,
    var_map: &VariableMap,
    cap: F,
    face_in: impl Fn(usize) -> bool,
    edge_in: impl Fn(usize) -> bool,
) {
    let one = F::one();
    let pair_in = |p: usize| {
        let pair = &complex.pairs[p];
        edge_in(pair.first / 2) && edge_in(pair.second / 2)
    };
    // (a) surface continuation
    for e in 0..complex.edges.len() {
        if !edge_in(e) {
            continue;
        }
        let mut coeffs = Vec::new();
        for f in complex.edges[e].faces.iter().flatten() {
            if face_in(*f) {
                coeffs.push((var_map.region_var(*f), scalar_of::<F>(complex.incidence_region(e, *f))));
            }
        }
        for l in [2 * e, 2 * e + 1] {
            let sign = scalar_of::<F>(complex.incidence_line(e, l));
            for &p in &complex.pairs_by_first[l] {
                if pair_in(p) {
                    coeffs.push((var_map.boundary_var(p), -sign));
                }
            }
        }
        model.add_row(format!("SC{e}"), Relation::Eq, coeffs, F::zero());
    }
    // (b) boundary continuation: predecessors minus successors of each line.
    for l in 0..complex.lines.len() {
        if !edge_in(l / 2) || !complex.lines[l].allowed {
            continue;
        }
        let mut coeffs = Vec::new();
        for &p in &complex.pairs_by_second[l] {
            if pair_in(p) {
                coeffs.push((var_map.boundary_var(p), one));
            }
        }
        for &p in &complex.pairs_by_first[l] {
            if pair_in(p) {
                coeffs.push((var_map.boundary_var(p), -one));
            }
        }
        if !coeffs.is_empty() {
            model.add_row(format!("BC{l}"), Relation::Eq, coeffs, F::zero());
        }
    }
    // (c) boundary consistency: pairs ending in e's negative orientation
    // plus pairs starting in its positive orientation.
    for e in 0..complex.edges.len() {
        if !edge_in(e) {
            continue;
        }
        let mut coeffs = Vec::new();
        for &p in &complex.pairs_by_second[2 * e + 1] {
            if pair_in(p) {
                coeffs.push((var_map.boundary_var(p), one));
            }
        }
        for &p in &complex.pairs_by_first[2 * e] {
            if pair_in(p) {
                coeffs.push((var_map.boundary_var(p), one));
            }
        }
        if !coeffs.is_empty() {
            model.add_row(format!("CS{e}"), Relation::Le, coeffs, cap);
        }
    }
}

/// Role of a face in an inpainting model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceRole<F: Scalar = f64> {
    /// Damaged: free intensity in [0, range].
    Free,
    /// Retained band: intensity fixed to the (shifted) image value.
    Fixed(F),
    /// Outside the component's sub-domain.
    Excluded,
}

/// Inpainting program over the sub-complex of damaged plus band faces.
/// Intensities are pre-shifted so the component's minimum is 0 and `range`
/// is I_u - I_l. Crossing rows are always included. The objective is the
/// boundary cost only.
pub fn build_inpaint_model<F: Scalar>(
    complex: &CellComplex,
    roles: &[FaceRole<F>],
    range: F,
    pair_cost: &[F],
) -> Result<(LinearModel<F>, VariableMap)> {
    assert_eq!(roles.len(), complex.faces.len());
    if range < F::zero() {
        return Err(Error::Inpaint("negative intensity range".into()));
    }
    let mut model = LinearModel::new();
    let mut region = vec![None; complex.faces.len()];
    for (f, role) in roles.iter().enumerate() {
        match role {
            FaceRole::Free => {
                region[f] = Some(model.add_var(format!("yR_{f}"), F::zero(), F::zero(), range, true));
            }
            FaceRole::Fixed(v) => {
                if *v < F::zero() || *v > range {
                    return Err(Error::Inpaint(format!(
                        "fixed face {f} value {v} outside [0, {range}]"
                    )));
                }
                region[f] = Some(model.add_var(format!("yR_{f}"), F::zero(), *v, *v, true));
            }
            FaceRole::Excluded => {}
        }
    }
    let included: Vec<bool> = region.iter().map(Option::is_some).collect();
    let face_in = move |f: usize| included[f];
    let edge_in = {
        let face_in = face_in.clone();
        move |e: usize| {
            complex.edges[e]
                .faces
                .iter()
                .flatten()
                .any(|&f| face_in(f))
        }
    };
    let mut boundary = vec![None; complex.pairs.len()];
    for p in 0..complex.pairs.len() {
        let pair = &complex.pairs[p];
        if edge_in(pair.first / 2) && edge_in(pair.second / 2) {
            boundary[p] =
                Some(model.add_var(format!("yB_{p}"), pair_cost[p], F::zero(), range, true));
        }
    }
    let var_map = VariableMap { region, boundary, kind: BoundaryVars::Pairs };
    add_boundary_rows(complex, &mut model, &var_map, range, face_in, edge_in);
    // Level lines cannot cross: always include crossing prevention.
    let mut k = 0;
    for &(p, q) in &complex.crossings {
        if var_map.boundary[p].is_some() && var_map.boundary[q].is_some() {
            let row = crossing_row(&var_map, p, q, range);
            model.add_row(format!("XP{k}"), row.relation, row.coeffs, row.rhs);
            k += 1;
        }
    }
    Ok((model, var_map))
}

/// Fixes region variables according to a seed mask: foreground-seeded pixels
/// to 1, background-seeded pixels to 0.
pub fn fix_seeds<F: Scalar>(
    model: &mut LinearModel<F>,
    var_map: &VariableMap,
    complex: &CellComplex,
    seeds: &SeedMask,
) -> Result<()> {
    if seeds.width != complex.width || seeds.height != complex.height {
        return Err(Error::Seeds("seed mask does not match complex".into()));
    }
    for f in 0..complex.faces.len() {
        let (px, py) = complex.faces[f].pixel;
        match seeds.get(px, py) {
            Seed::Foreground => model.fix_var(var_map.region_var(f), F::one()),
            Seed::Background => model.fix_var(var_map.region_var(f), F::zero()),
            Seed::None => {}
        }
    }
    Ok(())
}

/// Constructs the boundary completion of an integral labeling: the active
/// line on every jump edge (foreground on the left) plus an arbitrary valid
/// pairing at each node. Returns per-pair activations; the result satisfies
/// the surface/boundary continuation and consistency rows.
pub fn labeling_completion(complex: &CellComplex, labels: &[u8]) -> Vec<u8> {
    let mut active_lines = Vec::new();
    for e in 0..complex.edges.len() {
        let jump: i32 = complex.edges[e]
            .faces
            .iter()
            .flatten()
            .map(|&f| complex.incidence_region(e, f) as i32 * labels[f] as i32)
            .sum();
        match jump {
            0 => {}
            1 => active_lines.push(2 * e),
            -1 => active_lines.push(2 * e + 1),
            _ => unreachable!("binary labels"),
        }
    }
    let mut incoming: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    let mut outgoing: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    for &l in &active_lines {
        incoming.entry(complex.line_head(l)).or_default().push(l);
        outgoing.entry(complex.line_tail(l)).or_default().push(l);
    }
    let mut pair_active = vec![0u8; complex.pairs.len()];
    for (node, ins) in &incoming {
        let outs = &outgoing[node];
        assert_eq!(ins.len(), outs.len(), "unbalanced boundary at node {node}");
        for (i, &l1) in ins.iter().enumerate() {
            let l2 = outs[i];
            let p = complex
                .find_pair(l1, l2)
                .expect("completion pair must exist");
            pair_active[p] = 1;
        }
    }
    pair_active
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, Connectivity};
    use crate::energy::WeightMode;

    fn zero_cost(complex: &CellComplex) -> DataCost {
        DataCost { per_face: vec![0.0; complex.faces.len()], constant_offset: 0.0 }
    }

    #[test]
    fn length_model_shape() {
        let c = build_complex(2, 2, Connectivity::Conn8).unwrap();
        let dc = zero_cost(&c);
        let (m, vm) = build_length_model(&c, &dc, 1.0);
        assert_eq!(m.num_vars(), c.faces.len() + c.lines.len());
        assert_eq!(m.num_rows(), c.edges.len());
        m.validate().unwrap();
        assert_eq!(vm.kind, BoundaryVars::Lines);
    }

    #[test]
    fn length_model_shared_edge_row() {
        // For an interior edge with faces A, B the row is
        // y_A - y_B - y_pos + y_neg = 0 (up to a global sign).
        let c = build_complex(2, 1, Connectivity::Conn8).unwrap();
        let dc = zero_cost(&c);
        let (m, vm) = build_length_model(&c, &dc, 1.0);
        let e = (0..c.edges.len()).find(|&e| !c.edges[e].on_border).unwrap();
        let row = &m.rows[e];
        let (a, b) = (c.edges[e].faces[0].unwrap(), c.edges[e].faces[1].unwrap());
        let coeff = |v: usize| {
            row.coeffs
                .iter()
                .find(|&&(j, _)| j == v)
                .map(|&(_, a)| a)
                .unwrap_or(0.0)
        };
        assert_eq!(coeff(vm.region_var(a)), 1.0);
        assert_eq!(coeff(vm.region_var(b)), -1.0);
        assert_eq!(coeff(vm.boundary_var(2 * e)), -1.0);
        assert_eq!(coeff(vm.boundary_var(2 * e + 1)), 1.0);
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn curvature_model_coefficients_are_unit() {
        let c = build_complex(2, 2, Connectivity::Conn8).unwrap();
        let dc = zero_cost(&c);
        let prm = EnergyParams::new(1.0, 1.0, 2.0, WeightMode::AnglePower).unwrap();
        let (m, _) = build_curvature_model(&c, &dc, &prm, true);
        m.validate().unwrap();
        for row in &m.rows {
            for &(_, a) in &row.coeffs {
                assert!(a == 1.0 || a == -1.0, "coefficient {a} not in {{-1, +1}}");
            }
        }
    }

    #[test]
    fn all_background_is_feasible_at_zero() {
        let c = build_complex(2, 2, Connectivity::Conn8).unwrap();
        let dc = zero_cost(&c);
        let prm = EnergyParams::new(1.0, 1.0, 2.0, WeightMode::AnglePower).unwrap();
        let (m, _) = build_curvature_model(&c, &dc, &prm, true);
        let x = vec![0.0; m.num_vars()];
        assert_eq!(m.max_row_violation(&x), 0.0);
        assert_eq!(m.objective_value(&x), 0.0);
    }

    #[test]
    fn completion_of_random_labelings_is_feasible() {
        // Any integral region labeling extends to a feasible point of the
        // curvature model without crossing rows.
        let c = build_complex(3, 3, Connectivity::Conn8).unwrap();
        let dc = zero_cost(&c);
        let prm = EnergyParams::new(1.0, 1.0, 2.0, WeightMode::AnglePower).unwrap();
        let (m, vm) = build_curvature_model(&c, &dc, &prm, false);
        let mut state = 0x2545f4914f6cdd1du64;
        for _ in 0..40 {
            let labels: Vec<u8> = (0..c.faces.len())
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    (state & 1) as u8
                })
                .collect();
            let pair_active = labeling_completion(&c, &labels);
            let mut x = vec![0.0; m.num_vars()];
            for f in 0..c.faces.len() {
                x[vm.region_var(f)] = labels[f] as f64;
            }
            for p in 0..c.pairs.len() {
                x[vm.boundary_var(p)] = pair_active[p] as f64;
            }
            assert_eq!(m.max_row_violation(&x), 0.0, "labels {labels:?}");
        }
    }

    #[test]
    fn touching_rhombus_consistency_gadget() {
        // Two foreground triangles sharing an interior edge form a rhombus.
        // Splitting its boundary into the two triangle loops activates both
        // orientations of the shared edge: feasible for surface and boundary
        // continuation, excluded by the consistency rows.
        let c = build_complex(2, 1, Connectivity::Conn8).unwrap();
        let shared = (0..c.edges.len())
            .find(|&e| {
                !c.edges[e].on_border && {
                    let [a, b] = c.edges[e].endpoints;
                    c.vertices[a].x == c.vertices[b].x
                }
            })
            .unwrap();
        let (fa, fb) = (c.edges[shared].faces[0].unwrap(), c.edges[shared].faces[1].unwrap());
        let mut labels = vec![0u8; c.faces.len()];
        labels[fa] = 1;
        labels[fb] = 1;

        let dc = zero_cost(&c);
        let prm = EnergyParams::new(0.0, 1.0, 2.0, WeightMode::AnglePower).unwrap();
        let (m, vm) = build_curvature_model(&c, &dc, &prm, false);

        // Invalid configuration (a): each triangle traversed as its own loop,
        // using the shared edge in both orientations.
        let mut x = vec![0.0; m.num_vars()];
        for f in 0..c.faces.len() {
            x[vm.region_var(f)] = labels[f] as f64;
        }
        for &f in &[fa, fb] {
            let lines = c.face_boundary_lines(f);
            for i in 0..lines.len() {
                let p = c.find_pair(lines[i], lines[(i + 1) % lines.len()]).unwrap();
                x[vm.boundary_var(p)] = 1.0;
            }
        }
        let violated: Vec<usize> = (0..m.num_rows())
            .filter(|&r| m.rows[r].violation(&x) > 1e-12)
            .collect();
        assert!(!violated.is_empty(), "configuration (a) must break consistency");
        for &r in &violated {
            assert!(m.row_names[r].starts_with("CS"), "unexpected violated row {}", m.row_names[r]);
        }

        // Valid configuration (b): the rhombus outline.
        let pair_active = labeling_completion(&c, &labels);
        let mut y = vec![0.0; m.num_vars()];
        for f in 0..c.faces.len() {
            y[vm.region_var(f)] = labels[f] as f64;
        }
        for p in 0..c.pairs.len() {
            y[vm.boundary_var(p)] = pair_active[p] as f64;
        }
        assert_eq!(m.max_row_violation(&y), 0.0);
    }

    #[test]
    fn seed_fixing_sets_bounds() {
        let c = build_complex(2, 1, Connectivity::Conn8).unwrap();
        let dc = zero_cost(&c);
        let (mut m, vm) = build_length_model(&c, &dc, 1.0);
        let unchanged = m.bounds.clone();
        let none = SeedMask {
            width: 2,
            height: 1,
            labels: vec![Seed::None, Seed::None],
        };
        fix_seeds(&mut m, &vm, &c, &none).unwrap();
        assert_eq!(m.bounds, unchanged);
        let seeds = SeedMask {
            width: 2,
            height: 1,
            labels: vec![Seed::Foreground, Seed::Background],
        };
        fix_seeds(&mut m, &vm, &c, &seeds).unwrap();
        for f in 0..c.faces.len() {
            let want = if c.faces[f].pixel.0 == 0 { (1.0, 1.0) } else { (0.0, 0.0) };
            assert_eq!(m.bounds[vm.region_var(f)], want);
        }
    }

    #[test]
    fn inpaint_model_flat_range_forces_zero() {
        let c = build_complex(2, 2, Connectivity::Conn8).unwrap();
        let roles: Vec<FaceRole> = (0..c.faces.len())
            .map(|f| if c.faces[f].pixel == (0, 0) { FaceRole::Free } else { FaceRole::Fixed(0.0) })
            .collect();
        let costs = vec![1.0; c.pairs.len()];
        let (m, _) = build_inpaint_model(&c, &roles, 0.0, &costs).unwrap();
        m.validate().unwrap();
        for &(lo, hi) in &m.bounds {
            assert_eq!((lo, hi), (0.0, 0.0));
        }
    }

    #[test]
    fn inpaint_model_rejects_out_of_range_fixed_value() {
        let c = build_complex(1, 1, Connectivity::Conn8).unwrap();
        let roles = vec![
            FaceRole::Fixed(7.0),
            FaceRole::Free,
            FaceRole::Free,
            FaceRole::Free,
        ];
        let costs = vec![0.0; c.pairs.len()];
        assert!(build_inpaint_model(&c, &roles, 5.0, &costs).is_err());
    }
}
