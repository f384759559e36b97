//! The planar cell complex obtained by subdividing each pixel into basic
//! regions, together with all incidence structure the linear models need.
//!
//! An 8-connectivity splits each pixel by its two diagonals into 4 triangles.
//! A 16-connectivity additionally inserts the eight knight-direction chords
//! (corner to opposite-side midpoint), giving 32 basic regions per pixel. All
//! coordinates are scaled integers (scale 2 resp. 60) so that every
//! subdivision vertex, including chord/chord intersections, is exact.

use crate::error::{Error, Result};
use crate::geom::{cmp_angle, on_segment, segment_intersection, signed_area2, Point};
use num_rational::Ratio;
use std::collections::HashMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Connectivity {
    Conn8,
    Conn16,
}

impl Connectivity {
    /// Integer scale factor applied to pixel coordinates so that all
    /// subdivision vertices are exact lattice points.
    pub fn scale(self) -> i64 {
        match self {
            Connectivity::Conn8 => 2,
            Connectivity::Conn16 => 60,
        }
    }

    pub fn faces_per_pixel(self) -> usize {
        match self {
            Connectivity::Conn8 => 4,
            Connectivity::Conn16 => 32,
        }
    }
}

/// A basic region: a convex polygon inside a single pixel.
#[derive(Clone, Debug)]
pub struct Face {
    /// Vertex-index ring in counter-clockwise order.
    pub polygon: Vec<usize>,
    /// Owning pixel.
    pub pixel: (usize, usize),
    /// Exact area in pixel units.
    pub area: Ratio<i64>,
}

/// A boundary segment separating at most two faces.
#[derive(Clone, Debug)]
pub struct Edge {
    /// Endpoint vertex indices; `endpoints[0]` is lexicographically smaller
    /// (by coordinates), and the positive orientation runs `[0] -> [1]`.
    pub endpoints: [usize; 2],
    /// Euclidean length in pixel units.
    pub length: f64,
    /// True iff the edge lies on the domain border (exactly one face).
    pub on_border: bool,
    /// True iff the edge touches one of the four domain corners.
    pub at_corner: bool,
    /// `faces[0]`: the face traversing this edge positively; `faces[1]`:
    /// negatively. Interior edges have both, border edges exactly one.
    pub faces: [Option<usize>; 2],
}

/// One of the two orientations of an edge. Line `2 e` is the positive
/// orientation of edge `e`, line `2 e + 1` the negative one.
#[derive(Clone, Debug)]
pub struct OrientedLine {
    pub edge: usize,
    /// +1 for the positive orientation, -1 for the negative one.
    pub sign: i8,
    /// Unit direction of traversal.
    pub direction: [f64; 2],
    /// Border edges keep only the orientation consistent with the foreground
    /// lying inside the domain; the other orientation is excluded from all
    /// pair enumeration.
    pub allowed: bool,
}

/// An ordered pair of oriented lines meeting at `node`: the carrier of
/// discrete curvature cost. The line traversed earlier is listed first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinePair {
    pub first: usize,
    pub second: usize,
    pub node: usize,
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    pub width: usize,
    pub height: usize,
    pub connectivity: Connectivity,
    /// Coordinate scale: vertex coordinates are pixel coordinates times this.
    pub scale: i64,
    pub vertices: Vec<Point>,
    pub faces: Vec<Face>,
    pub edges: Vec<Edge>,
    pub lines: Vec<OrientedLine>,
    pub pairs: Vec<LinePair>,
    /// Unordered pairs of transversally crossing line pairs (by pair index).
    pub crossings: Vec<(usize, usize)>,
    /// For each line, the pairs that list it first / second.
    pub pairs_by_first: Vec<Vec<usize>>,
    pub pairs_by_second: Vec<Vec<usize>>,
    /// Incident edges per vertex, sorted counter-clockwise by direction.
    pub vertex_edges: Vec<Vec<usize>>,
}

impl CellComplex {
    /// Tail vertex of an oriented line.
    pub fn line_tail(&self, l: usize) -> usize {
        let e = &self.edges[l / 2];
        if l % 2 == 0 {
            e.endpoints[0]
        } else {
            e.endpoints[1]
        }
    }

    /// Head vertex of an oriented line.
    pub fn line_head(&self, l: usize) -> usize {
        let e = &self.edges[l / 2];
        if l % 2 == 0 {
            e.endpoints[1]
        } else {
            e.endpoints[0]
        }
    }

    /// The opposite orientation of a line.
    pub fn reverse_line(&self, l: usize) -> usize {
        l ^ 1
    }

    /// Incidence of region `f` to boundary segment `e`: +1 / -1 if the
    /// counter-clockwise traversal of `f` uses `e` in its positive / negative
    /// orientation, 0 if `e` is not on the boundary of `f`.
    pub fn incidence_region(&self, e: usize, f: usize) -> i8 {
        let edge = &self.edges[e];
        if edge.faces[0] == Some(f) {
            1
        } else if edge.faces[1] == Some(f) {
            -1
        } else {
            0
        }
    }

    /// Incidence of oriented line `l` to boundary segment `e`.
    pub fn incidence_line(&self, e: usize, l: usize) -> i8 {
        if l / 2 != e {
            0
        } else {
            self.lines[l].sign
        }
    }

    /// Incidence of line pair `p` to boundary segment `e`; only the first
    /// line of the pair matters.
    pub fn incidence_pair(&self, e: usize, p: usize) -> i8 {
        self.incidence_line(e, self.pairs[p].first)
    }

    /// True iff vertex `v` is one of the four domain corners.
    pub fn is_domain_corner(&self, v: usize) -> bool {
        let p = self.vertices[v];
        let w = self.width as i64 * self.scale;
        let h = self.height as i64 * self.scale;
        (p.x == 0 || p.x == w) && (p.y == 0 || p.y == h)
    }

    /// True iff vertex `v` lies on the domain border.
    pub fn on_domain_border(&self, v: usize) -> bool {
        let p = self.vertices[v];
        let w = self.width as i64 * self.scale;
        let h = self.height as i64 * self.scale;
        p.x == 0 || p.x == w || p.y == 0 || p.y == h
    }

    /// The edge joining two vertices, if any.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.vertex_edges[u]
            .iter()
            .copied()
            .find(|&e| self.edges[e].endpoints.contains(&v))
    }

    /// Index of the pair (l1, l2), if it was enumerated.
    pub fn find_pair(&self, l1: usize, l2: usize) -> Option<usize> {
        self.pairs_by_first[l1]
            .iter()
            .copied()
            .find(|&p| self.pairs[p].second == l2)
    }

    /// The oriented lines traversing the counter-clockwise boundary ring of
    /// face `f`, in traversal order.
    pub fn face_boundary_lines(&self, f: usize) -> Vec<usize> {
        let ring = &self.faces[f].polygon;
        let mut lines = Vec::with_capacity(ring.len());
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            let e = self.edge_between(a, b).expect("ring edge exists");
            let l = if self.edges[e].endpoints == [a, b] { 2 * e } else { 2 * e + 1 };
            lines.push(l);
        }
        lines
    }

    /// Plain-text dump of the mesh (vertices, faces, edges with incidences)
    /// for golden-file tests.
    pub fn dump_mesh(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let conn = match self.connectivity {
            Connectivity::Conn8 => 8,
            Connectivity::Conn16 => 16,
        };
        writeln!(
            out,
            "mesh {}x{} conn{} scale {}",
            self.width, self.height, conn, self.scale
        )
        .unwrap();
        writeln!(out, "vertices {}", self.vertices.len()).unwrap();
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(out, "v {} {} {}", i, p.x, p.y).unwrap();
        }
        writeln!(out, "faces {}", self.faces.len()).unwrap();
        for (i, f) in self.faces.iter().enumerate() {
            let ring: Vec<String> = f.polygon.iter().map(|v| v.to_string()).collect();
            writeln!(
                out,
                "f {} px {} {} area {}/{} ring {}",
                i,
                f.pixel.0,
                f.pixel.1,
                f.area.numer(),
                f.area.denom(),
                ring.join(" ")
            )
            .unwrap();
        }
        writeln!(out, "edges {}", self.edges.len()).unwrap();
        for (i, e) in self.edges.iter().enumerate() {
            let side = |s: Option<usize>| s.map(|f| f.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "e {} {} {} border {} corner {} pos {} neg {}",
                i,
                e.endpoints[0],
                e.endpoints[1],
                e.on_border as u8,
                e.at_corner as u8,
                side(e.faces[0]),
                side(e.faces[1])
            )
            .unwrap();
        }
        out
    }
}

/// Builds the cell complex for a `width` x `height` image.
pub fn build_complex(width: usize, height: usize, connectivity: Connectivity) -> Result<CellComplex> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions(format!(
            "image must be at least 1x1, got {width}x{height}"
        )));
    }
    let face_count = width
        .checked_mul(height)
        .and_then(|px| px.checked_mul(connectivity.faces_per_pixel()))
        .ok_or_else(|| Error::InvalidDimensions("face count overflows".into()))?;
    if face_count > u32::MAX as usize / 4 {
        return Err(Error::InvalidDimensions(format!(
            "face count {face_count} exceeds index range"
        )));
    }

    let s = connectivity.scale();
    let mut builder = Builder::new(width, height, connectivity);
    for py in 0..height {
        for px in 0..width {
            let segs = pixel_segments(px as i64 * s, py as i64 * s, s, connectivity);
            builder.add_pixel(px, py, &segs);
        }
    }
    builder.finish()
}

/// Subdivision segments of one pixel, in global scaled coordinates.
fn pixel_segments(ox: i64, oy: i64, s: i64, conn: Connectivity) -> Vec<(Point, Point)> {
    let p = |x: i64, y: i64| Point::new(ox + x, oy + y);
    let mut segs = vec![
        // border
        (p(0, 0), p(s, 0)),
        (p(s, 0), p(s, s)),
        (p(s, s), p(0, s)),
        (p(0, s), p(0, 0)),
        // diagonals
        (p(0, 0), p(s, s)),
        (p(s, 0), p(0, s)),
    ];
    if conn == Connectivity::Conn16 {
        let h = s / 2;
        segs.extend_from_slice(&[
            (p(0, 0), p(s, h)),
            (p(0, 0), p(h, s)),
            (p(s, 0), p(0, h)),
            (p(s, 0), p(h, s)),
            (p(s, s), p(0, h)),
            (p(s, s), p(h, 0)),
            (p(0, s), p(s, h)),
            (p(0, s), p(h, 0)),
        ]);
    }
    segs
}

struct Builder {
    width: usize,
    height: usize,
    connectivity: Connectivity,
    scale: i64,
    vertices: Vec<Point>,
    vertex_ids: HashMap<Point, usize>,
    faces: Vec<Face>,
    edges: Vec<Edge>,
    edge_ids: HashMap<(usize, usize), usize>,
}

impl Builder {
    fn new(width: usize, height: usize, connectivity: Connectivity) -> Self {
        Builder {
            width,
            height,
            connectivity,
            scale: connectivity.scale(),
            vertices: Vec::new(),
            vertex_ids: HashMap::new(),
            faces: Vec::new(),
            edges: Vec::new(),
            edge_ids: HashMap::new(),
        }
    }

    fn vertex_id(&mut self, p: Point) -> usize {
        if let Some(&id) = self.vertex_ids.get(&p) {
            return id;
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.vertex_ids.insert(p, id);
        id
    }

    /// Builds the local arrangement of one pixel and registers its faces.
    fn add_pixel(&mut self, px: usize, py: usize, segs: &[(Point, Point)]) {
        // All arrangement vertices: segment endpoints plus pairwise
        // intersections. Sorted for determinism.
        let mut pts: Vec<Point> = Vec::new();
        for &(a, b) in segs {
            pts.push(a);
            pts.push(b);
        }
        for i in 0..segs.len() {
            for j in i + 1..segs.len() {
                if let Some(p) =
                    segment_intersection(segs[i].0, segs[i].1, segs[j].0, segs[j].1)
                {
                    pts.push(p);
                }
            }
        }
        pts.sort();
        pts.dedup();

        // Split each segment at the vertices lying on it.
        let mut adj: HashMap<Point, Vec<Point>> = HashMap::new();
        for &(a, b) in segs {
            let mut on: Vec<Point> = pts.iter().copied().filter(|&p| on_segment(a, b, p)).collect();
            on.sort_by_key(|p| {
                ((p.x - a.x) as i128 * (b.x - a.x) as i128)
                    + ((p.y - a.y) as i128 * (b.y - a.y) as i128)
            });
            for w in on.windows(2) {
                adj.entry(w[0]).or_default().push(w[1]);
                adj.entry(w[1]).or_default().push(w[0]);
            }
        }
        for (p, nbrs) in adj.iter_mut() {
            nbrs.sort();
            nbrs.dedup();
            let p = *p;
            nbrs.sort_by(|&u, &v| cmp_angle((u.x - p.x, u.y - p.y), (v.x - p.x, v.y - p.y)));
        }

        // Trace faces counter-clockwise (interior on the left): the successor
        // of half-edge (u, v) leaves v along the clockwise-next neighbor
        // after u.
        let mut visited: std::collections::HashSet<(Point, Point)> = Default::default();
        let mut local_faces: Vec<Vec<Point>> = Vec::new();
        for &start_u in &pts {
            let Some(nbrs) = adj.get(&start_u) else { continue };
            for &start_v in nbrs {
                if visited.contains(&(start_u, start_v)) {
                    continue;
                }
                let mut ring = Vec::new();
                let (mut u, mut v) = (start_u, start_v);
                loop {
                    visited.insert((u, v));
                    ring.push(u);
                    let nv = &adj[&v];
                    let i = nv.iter().position(|&w| w == u).expect("adjacency symmetric");
                    let w = nv[(i + nv.len() - 1) % nv.len()];
                    u = v;
                    v = w;
                    if (u, v) == (start_u, start_v) {
                        break;
                    }
                }
                if signed_area2(&ring) > 0 {
                    local_faces.push(ring);
                }
            }
        }
        debug_assert_eq!(local_faces.len(), self.connectivity.faces_per_pixel());

        for ring in local_faces {
            self.add_face(px, py, &ring);
        }
    }

    fn add_face(&mut self, px: usize, py: usize, ring: &[Point]) {
        let area2 = signed_area2(ring);
        assert!(area2 > 0, "degenerate or clockwise face");
        let polygon: Vec<usize> = ring.iter().map(|&p| self.vertex_id(p)).collect();
        let fid = self.faces.len();
        self.faces.push(Face {
            polygon: polygon.clone(),
            pixel: (px, py),
            area: Ratio::new(area2 as i64, 2 * self.scale * self.scale),
        });
        for i in 0..polygon.len() {
            let a = polygon[i];
            let b = polygon[(i + 1) % polygon.len()];
            let (lo, hi) = if self.vertices[a] < self.vertices[b] {
                (a, b)
            } else {
                (b, a)
            };
            let eid = *self.edge_ids.entry((lo, hi)).or_insert_with(|| {
                let id = self.edges.len();
                self.edges.push(Edge {
                    endpoints: [lo, hi],
                    length: 0.0,
                    on_border: false,
                    at_corner: false,
                    faces: [None, None],
                });
                id
            });
            // Positive orientation is lexicographically-smaller -> larger.
            let side = if (a, b) == (lo, hi) { 0 } else { 1 };
            let prev = self.edges[eid].faces[side].replace(fid);
            assert!(prev.is_none(), "edge side registered twice");
        }
    }

    fn finish(mut self) -> Result<CellComplex> {
        let s = self.scale;
        let w = self.width as i64 * s;
        let h = self.height as i64 * s;
        let corner = |p: Point| (p.x == 0 || p.x == w) && (p.y == 0 || p.y == h);
        let on_rect = |p: Point| p.x == 0 || p.x == w || p.y == 0 || p.y == h;

        for e in self.edges.iter_mut() {
            let p0 = self.vertices[e.endpoints[0]];
            let p1 = self.vertices[e.endpoints[1]];
            let dx = (p1.x - p0.x) as f64;
            let dy = (p1.y - p0.y) as f64;
            e.length = (dx * dx + dy * dy).sqrt() / s as f64;
            let nfaces = e.faces.iter().filter(|f| f.is_some()).count();
            e.on_border = nfaces == 1;
            if e.on_border {
                assert!(
                    on_rect(p0) && on_rect(p1),
                    "single-face edge not on the domain border"
                );
            } else {
                assert_eq!(nfaces, 2, "edge without incident faces");
            }
            e.at_corner = corner(p0) || corner(p1);
        }

        // Oriented lines: two per edge, border pruning for disallowed side.
        let mut lines = Vec::with_capacity(self.edges.len() * 2);
        for e in &self.edges {
            let p0 = self.vertices[e.endpoints[0]];
            let p1 = self.vertices[e.endpoints[1]];
            let len = ((p1.x - p0.x) as f64).hypot((p1.y - p0.y) as f64);
            let dir = [(p1.x - p0.x) as f64 / len, (p1.y - p0.y) as f64 / len];
            // On the border, keep only the orientation whose incident face
            // traverses it (foreground inside the domain).
            let (pos_ok, neg_ok) = if e.on_border {
                (e.faces[0].is_some(), e.faces[1].is_some())
            } else {
                (true, true)
            };
            lines.push(OrientedLine {
                edge: lines.len() / 2,
                sign: 1,
                direction: dir,
                allowed: pos_ok,
            });
            lines.push(OrientedLine {
                edge: lines.len() / 2,
                sign: -1,
                direction: [-dir[0], -dir[1]],
                allowed: neg_ok,
            });
        }

        // Incident edges per vertex, sorted counter-clockwise.
        let mut vertex_edges: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (eid, e) in self.edges.iter().enumerate() {
            vertex_edges[e.endpoints[0]].push(eid);
            vertex_edges[e.endpoints[1]].push(eid);
        }
        for (v, incident) in vertex_edges.iter_mut().enumerate() {
            let pv = self.vertices[v];
            let away = |eid: usize, edges: &[Edge], verts: &[Point]| -> (i64, i64) {
                let e = &edges[eid];
                let other = if e.endpoints[0] == v {
                    e.endpoints[1]
                } else {
                    e.endpoints[0]
                };
                (verts[other].x - pv.x, verts[other].y - pv.y)
            };
            incident.sort_by(|&a, &b| {
                cmp_angle(
                    away(a, &self.edges, &self.vertices),
                    away(b, &self.edges, &self.vertices),
                )
            });
        }

        let complex = CellComplex {
            width: self.width,
            height: self.height,
            connectivity: self.connectivity,
            scale: self.scale,
            vertices: std::mem::take(&mut self.vertices),
            faces: std::mem::take(&mut self.faces),
            edges: std::mem::take(&mut self.edges),
            lines,
            pairs: Vec::new(),
            crossings: Vec::new(),
            pairs_by_first: Vec::new(),
            pairs_by_second: Vec::new(),
            vertex_edges,
        };
        let complex = enumerate_pairs(complex);
        Ok(crossing_pairs(complex))
    }
}

/// Enumerates all traversable line pairs: ordered pairs (l1, l2) with
/// head(l1) = tail(l2), excluding immediate reversals and, on border edges,
/// the pruned orientations.
fn enumerate_pairs(mut complex: CellComplex) -> CellComplex {
    let nv = complex.vertices.len();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for l in 0..complex.lines.len() {
        if !complex.lines[l].allowed {
            continue;
        }
        incoming[complex.line_head(l)].push(l);
        outgoing[complex.line_tail(l)].push(l);
    }
    let mut pairs = Vec::new();
    for v in 0..nv {
        for &l1 in &incoming[v] {
            for &l2 in &outgoing[v] {
                if l2 == complex.reverse_line(l1) {
                    continue;
                }
                pairs.push(LinePair { first: l1, second: l2, node: v });
            }
        }
    }
    let mut by_first = vec![Vec::new(); complex.lines.len()];
    let mut by_second = vec![Vec::new(); complex.lines.len()];
    for (i, p) in pairs.iter().enumerate() {
        by_first[p.first].push(i);
        by_second[p.second].push(i);
    }
    complex.pairs = pairs;
    complex.pairs_by_first = by_first;
    complex.pairs_by_second = by_second;
    complex
}

/// Detects all unordered pairs of line pairs that cross transversally at
/// their shared node: with the incident edges sorted cyclically by angle,
/// (a -> b) and (c -> d) cross iff {c, d} separates {a, b} in the cyclic
/// order. Pairs sharing an edge never cross.
fn crossing_pairs(mut complex: CellComplex) -> CellComplex {
    let mut by_node: Vec<Vec<usize>> = vec![Vec::new(); complex.vertices.len()];
    for (i, p) in complex.pairs.iter().enumerate() {
        by_node[p.node].push(i);
    }
    let mut crossings = Vec::new();
    for (v, node_pairs) in by_node.iter().enumerate() {
        if node_pairs.len() < 2 {
            continue;
        }
        let slots = &complex.vertex_edges[v];
        let pos: HashMap<usize, usize> =
            slots.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let d = slots.len();
        // Cyclic-open-interval membership: is x strictly between a and b
        // going counter-clockwise?
        let between = |a: usize, b: usize, x: usize| -> bool {
            if a < b {
                x > a && x < b
            } else {
                x > a || x < b
            }
        };
        for (i, &pi) in node_pairs.iter().enumerate() {
            let (a, b) = pair_slots(&complex, pi, &pos);
            for &pj in node_pairs.iter().skip(i + 1) {
                let (c, cd) = pair_slots(&complex, pj, &pos);
                if a == c || a == cd || b == c || b == cd {
                    continue;
                }
                debug_assert!(a < d && b < d && c < d && cd < d);
                if between(a, b, c) != between(a, b, cd) {
                    crossings.push((pi, pj));
                }
            }
        }
    }
    complex.crossings = crossings;
    complex
}

fn pair_slots(complex: &CellComplex, p: usize, pos: &HashMap<usize, usize>) -> (usize, usize) {
    let pair = &complex.pairs[p];
    (pos[&(pair.first / 2)], pos[&(pair.second / 2)])
}
