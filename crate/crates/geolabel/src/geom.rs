//! Exact planar primitives: orientation, closed-segment intersection,
//! point-in-polygon, polygon simplicity.

use crate::rat::{sign, Pt, Q};
use num::Zero;

/// Sign of the signed area of triangle (a, b, c): +1 for counterclockwise.
pub fn orient(a: &Pt, b: &Pt, c: &Pt) -> i32 {
    let v = (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x);
    sign(&v)
}

fn on_segment(a: &Pt, b: &Pt, p: &Pt) -> bool {
    // assumes a, b, p collinear
    let min_x = if a.x <= b.x { &a.x } else { &b.x };
    let max_x = if a.x <= b.x { &b.x } else { &a.x };
    let min_y = if a.y <= b.y { &a.y } else { &b.y };
    let max_y = if a.y <= b.y { &b.y } else { &a.y };
    *min_x <= p.x && p.x <= *max_x && *min_y <= p.y && p.y <= *max_y
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: &Pt, b: &Pt, c: &Pt, d: &Pt) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// Proper crossing: the open interiors of the two segments meet in one point.
pub fn segments_cross_properly(a: &Pt, b: &Pt, c: &Pt, d: &Pt) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Point location in a closed simple polygon: Inside / Boundary / Outside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loc {
    Inside,
    Boundary,
    Outside,
}

/// Even-odd crossing-count test with exact handling of vertices on the ray.
pub fn point_in_polygon(poly: &[Pt], p: &Pt) -> Loc {
    let n = poly.len();
    let mut crossings = 0usize;
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        // boundary?
        if orient(a, b, p) == 0 && on_segment(a, b, p) {
            return Loc::Boundary;
        }
        // count edge crossings of the horizontal ray from p to +infinity,
        // counting an edge if it spans p.y as a half-open interval [min, max)
        let (lo, hi) = if a.y <= b.y { (a, b) } else { (b, a) };
        if lo.y <= p.y && p.y < hi.y {
            // edge crosses the horizontal line through p; on which side?
            let o = orient(lo, hi, p);
            if o < 0 {
                crossings += 1;
            }
        }
    }
    if crossings % 2 == 1 {
        Loc::Inside
    } else {
        Loc::Outside
    }
}

/// Pairwise edge test: no two non-adjacent edges intersect, adjacent edges
/// meet only at the shared vertex, and no zero-length edges.
pub fn polygon_is_simple(poly: &[Pt]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if poly[i] == poly[(i + 1) % n] {
            return false;
        }
    }
    for i in 0..n {
        let (a, b) = (&poly[i], &poly[(i + 1) % n]);
        for j in i + 1..n {
            let (c, d) = (&poly[j], &poly[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // shared endpoint only
                if segments_cross_properly(a, b, c, d) {
                    return false;
                }
                // collinear overlap of adjacent edges
                if orient(a, b, c) == 0 && orient(a, b, d) == 0 {
                    return false;
                }
            } else if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Midpoint of two points.
pub fn midpoint(a: &Pt, b: &Pt) -> Pt {
    let two = crate::rat::q(2);
    Pt::new((&a.x + &b.x) / &two, (&a.y + &b.y) / &two)
}

/// y-coordinate of the line through (a, b) at abscissa `x`; requires a.x != b.x.
pub fn line_y_at(a: &Pt, b: &Pt, x: &Q) -> Q {
    assert!(a.x != b.x);
    &a.y + (&b.y - &a.y) * (x - &a.x) / (&b.x - &a.x)
}

/// Whether polygon vertices are in counterclockwise order (positive area).
pub fn polygon_is_ccw(poly: &[Pt]) -> bool {
    let n = poly.len();
    let mut twice_area = Q::zero();
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        twice_area += &a.x * &b.y - &b.x * &a.y;
    }
    sign(&twice_area) > 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;

    fn p(x: i64, y: i64) -> Pt {
        Pt::new(q(x), q(y))
    }

    #[test]
    fn orientation_signs() {
        assert_eq!(orient(&p(0, 0), &p(1, 0), &p(0, 1)), 1);
        assert_eq!(orient(&p(0, 0), &p(1, 0), &p(0, -1)), -1);
        assert_eq!(orient(&p(0, 0), &p(1, 0), &p(2, 0)), 0);
    }

    #[test]
    fn closed_segment_touching() {
        // touching at an endpoint counts
        assert!(segments_intersect(&p(0, 0), &p(2, 0), &p(2, 0), &p(3, 3)));
        // crossing
        assert!(segments_intersect(&p(0, 0), &p(2, 2), &p(0, 2), &p(2, 0)));
        assert!(segments_cross_properly(&p(0, 0), &p(2, 2), &p(0, 2), &p(2, 0)));
        // disjoint
        assert!(!segments_intersect(&p(0, 0), &p(1, 0), &p(0, 1), &p(1, 1)));
        // collinear overlap
        assert!(segments_intersect(&p(0, 0), &p(3, 0), &p(1, 0), &p(4, 0)));
        assert!(!segments_cross_properly(&p(0, 0), &p(3, 0), &p(1, 0), &p(4, 0)));
    }

    #[test]
    fn polygon_containment() {
        let square = vec![p(0, 0), p(4, 0), p(4, 4), p(0, 4)];
        assert_eq!(point_in_polygon(&square, &p(2, 2)), Loc::Inside);
        assert_eq!(point_in_polygon(&square, &p(4, 2)), Loc::Boundary);
        assert_eq!(point_in_polygon(&square, &p(5, 2)), Loc::Outside);
        assert_eq!(point_in_polygon(&square, &p(0, 0)), Loc::Boundary);
        assert!(polygon_is_simple(&square));
        assert!(polygon_is_ccw(&square));
    }

    #[test]
    fn non_simple_polygon_detected() {
        let bowtie = vec![p(0, 0), p(2, 2), p(2, 0), p(0, 2)];
        assert!(!polygon_is_simple(&bowtie));
    }
}
