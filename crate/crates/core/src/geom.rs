//! Exact planar geometry on scaled integer coordinates.
//!
//! All cell-complex vertices live on an integer grid (pixel coordinates
//! multiplied by the connectivity's scale factor), so every predicate here is
//! exact. Intermediate products use `i128` to rule out overflow.

use std::cmp::Ordering;

/// A point in scaled integer coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
}

/// Cross product (b - a) x (c - a).
pub fn orient(a: Point, b: Point, c: Point) -> i128 {
    let abx = (b.x - a.x) as i128;
    let aby = (b.y - a.y) as i128;
    let acx = (c.x - a.x) as i128;
    let acy = (c.y - a.y) as i128;
    abx * acy - aby * acx
}

pub fn cross(u: (i64, i64), v: (i64, i64)) -> i128 {
    u.0 as i128 * v.1 as i128 - u.1 as i128 * v.0 as i128
}

pub fn dot(u: (i64, i64), v: (i64, i64)) -> i128 {
    u.0 as i128 * v.0 as i128 + u.1 as i128 * v.1 as i128
}

/// True if `p` lies on the closed segment `a`-`b`.
pub fn on_segment(a: Point, b: Point, p: Point) -> bool {
    if orient(a, b, p) != 0 {
        return false;
    }
    let d = dot((p.x - a.x, p.y - a.y), (b.x - a.x, b.y - a.y));
    let len2 = dot((b.x - a.x, b.y - a.y), (b.x - a.x, b.y - a.y));
    d >= 0 && d <= len2
}

/// Intersection point of segments `a`-`b` and `c`-`d`, if they cross at a
/// single point with integer coordinates. Returns `None` for parallel
/// segments and for intersections outside either segment. Panics if the
/// intersection point is not on the integer grid (the pixel subdivisions are
/// chosen so that this never happens).
pub fn segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let r = (b.x - a.x, b.y - a.y);
    let s = (d.x - c.x, d.y - c.y);
    let den = cross(r, s);
    if den == 0 {
        return None;
    }
    let ac = (c.x - a.x, c.y - a.y);
    let t_num = cross(ac, s);
    let u_num = cross(ac, r);
    // t = t_num/den, u = u_num/den must both lie in [0, 1].
    let in_range = |num: i128, den: i128| -> bool {
        if den > 0 {
            num >= 0 && num <= den
        } else {
            num <= 0 && num >= den
        }
    };
    if !in_range(t_num, den) || !in_range(u_num, den) {
        return None;
    }
    let px = a.x as i128 * den + t_num * r.0 as i128;
    let py = a.y as i128 * den + t_num * r.1 as i128;
    assert!(
        px % den == 0 && py % den == 0,
        "non-integer intersection at scale; segments ({a:?},{b:?}) x ({c:?},{d:?})"
    );
    Some(Point::new((px / den) as i64, (py / den) as i64))
}

/// Orders direction vectors counter-clockwise starting from the positive
/// x-axis, exactly (no floating point).
pub fn cmp_angle(u: (i64, i64), v: (i64, i64)) -> Ordering {
    debug_assert!(u != (0, 0) && v != (0, 0));
    let half = |w: (i64, i64)| -> u8 {
        // 0: angle in [0, pi), 1: angle in [pi, 2 pi)
        if w.1 > 0 || (w.1 == 0 && w.0 > 0) {
            0
        } else {
            1
        }
    };
    let (hu, hv) = (half(u), half(v));
    if hu != hv {
        return hu.cmp(&hv);
    }
    // Same half-plane: u before v iff u x v > 0.
    let c = cross(u, v);
    if c > 0 {
        Ordering::Less
    } else if c < 0 {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

/// Twice the signed area of a polygon given by its vertex ring.
pub fn signed_area2(ring: &[Point]) -> i128 {
    let mut acc: i128 = 0;
    for i in 0..ring.len() {
        let p = ring[i];
        let q = ring[(i + 1) % ring.len()];
        acc += p.x as i128 * q.y as i128 - q.x as i128 * p.y as i128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_of_unit_diagonals() {
        // Scale-2 pixel: diagonals meet at the integer center.
        let p = segment_intersection(
            Point::new(0, 0),
            Point::new(2, 2),
            Point::new(2, 0),
            Point::new(0, 2),
        );
        assert_eq!(p, Some(Point::new(1, 1)));
    }

    #[test]
    fn no_intersection_for_parallel() {
        assert_eq!(
            segment_intersection(
                Point::new(0, 0),
                Point::new(2, 0),
                Point::new(0, 1),
                Point::new(2, 1),
            ),
            None
        );
    }

    #[test]
    fn angle_ordering_is_counter_clockwise() {
        let dirs = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
        for w in dirs.windows(2) {
            assert_eq!(cmp_angle(w[0], w[1]), Ordering::Less, "{:?} < {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn area_of_ccw_square() {
        let ring = [
            Point::new(0, 0),
            Point::new(2, 0),
            Point::new(2, 2),
            Point::new(0, 2),
        ];
        assert_eq!(signed_area2(&ring), 8);
    }
}
