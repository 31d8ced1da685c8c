//! Two-phase primal/dual partition trees over planar point/range instances,
//! emitting exact biclique decompositions. The point side uses kd-median
//! partitions; the range side uses verified random cuttings whose cells are
//! sign-constrained regions refined by axis-aligned splits.

use crate::biclique::BicliqueDecomposition;
use crate::error::{Error, Result};
use crate::predicate::{Poly, PredicateSpec};
use crate::rat::{q, sign, Pt, Q};
use crate::univariate::{multi_gap_samples, Poly1};
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

// ---------------------------------------------------------------------------
// Ranges

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// s* = {x : f(x, s) >= 0}
    PrimalS,
    /// p* = {y : f(p, y) >= 0}
    DualP,
}

#[derive(Clone, Debug)]
pub enum RangeKind {
    /// {x : |x - center|^2 <= r2}
    Disk { center: Pt, r2: Q, r: Option<Q> },
    /// {x : a x + b y + c >= 0}
    Halfplane { a: Q, b: Q, c: Q },
}

#[derive(Clone, Debug)]
pub struct Range {
    pub kind: RangeKind,
    pub owner: usize,
    pub orientation: Orientation,
}

impl Range {
    pub fn contains_point(&self, p: &Pt) -> bool {
        match &self.kind {
            RangeKind::Disk { center, r2, .. } => p.dist2(center) <= *r2,
            RangeKind::Halfplane { a, b, c } => a * &p.x + b * &p.y + c >= Q::zero(),
        }
    }
}

fn rat_sqrt(v: &Q) -> Option<Q> {
    if v < &Q::zero() {
        return None;
    }
    let sn = v.numer().sqrt();
    let sd = v.denom().sqrt();
    if &(&sn * &sn) == v.numer() && &(&sd * &sd) == v.denom() {
        Some(Q::new(sn, sd))
    } else {
        None
    }
}

/// Index of the unique polynomial with nonzero coefficients; also checks
/// that phi is equivalent to "f_k >= 0".
fn effective_poly(spec: &PredicateSpec) -> Result<usize> {
    spec.validate()?;
    let nonzero: Vec<usize> = spec
        .polys
        .iter()
        .enumerate()
        .filter(|(_, p)| p.terms.iter().any(|(c, _)| !c.is_zero()))
        .map(|(i, _)| i)
        .collect();
    if nonzero.len() != 1 {
        return Err(Error::Config(
            "partition tree requires exactly one effective polynomial".into(),
        ));
    }
    let k = nonzero[0];
    for s in [-1i32, 0, 1] {
        let mut signs = vec![0i32; spec.t];
        signs[k] = s;
        if spec.phi.eval(&signs) != (s >= 0) {
            return Err(Error::Config(
                "predicate is not of the form f >= 0 on its effective polynomial".into(),
            ));
        }
    }
    Ok(k)
}

/// Restricts `poly` to the free role by fixing the other role's coordinates;
/// returns (qxx, qxy, qyy, lx, ly, c0) of the resulting bivariate quadratic.
fn quad_parts(poly: &Poly, fixed: &Pt, fix_left: bool, d_left: usize) -> Result<[Q; 6]> {
    let fixed_coords = [fixed.x.clone(), fixed.y.clone()];
    let mut out = [
        Q::zero(),
        Q::zero(),
        Q::zero(),
        Q::zero(),
        Q::zero(),
        Q::zero(),
    ];
    for (c, e) in &poly.terms {
        if c.is_zero() {
            continue;
        }
        let (fix_range, free_range) = if fix_left {
            (0..d_left, d_left..e.len())
        } else {
            (d_left..e.len(), 0..d_left)
        };
        let mut coef = c.clone();
        for (slot, i) in fix_range.enumerate() {
            for _ in 0..e[i] {
                coef = &coef * &fixed_coords[slot];
            }
        }
        let free: Vec<u32> = free_range.map(|i| e[i]).collect();
        let slot = match (free[0], free[1]) {
            (2, 0) => 0,
            (1, 1) => 1,
            (0, 2) => 2,
            (1, 0) => 3,
            (0, 1) => 4,
            (0, 0) => 5,
            _ => {
                return Err(Error::Config(
                    "range polynomial has degree above two in the free role".into(),
                ))
            }
        };
        out[slot] = &out[slot] + &coef;
    }
    Ok(out)
}

fn range_from_parts(parts: [Q; 6], owner: usize, orientation: Orientation) -> Result<Range> {
    let [qxx, qxy, qyy, lx, ly, c0] = parts;
    if qxx.is_zero() && qxy.is_zero() && qyy.is_zero() {
        if lx.is_zero() && ly.is_zero() {
            return Err(Error::Config("degenerate (constant) range".into()));
        }
        return Ok(Range {
            kind: RangeKind::Halfplane {
                a: lx,
                b: ly,
                c: c0,
            },
            owner,
            orientation,
        });
    }
    if !qxy.is_zero() || qxx != qyy {
        return Err(Error::Config(
            "range is neither a disk nor a halfplane".into(),
        ));
    }
    if sign(&qxx) > 0 {
        return Err(Error::Config("disk-complement ranges unsupported".into()));
    }
    // f = s (x^2 + y^2) + lx x + ly y + c0 with s < 0
    let s = qxx;
    let two_s = &s + &s;
    let cx = -(&lx / &two_s);
    let cy = -(&ly / &two_s);
    let r2 = &(&cx * &cx) + &(&cy * &cy) - &(&c0 / &s);
    if sign(&r2) <= 0 {
        return Err(Error::Config("empty disk range".into()));
    }
    let r = rat_sqrt(&r2);
    Ok(Range {
        kind: RangeKind::Disk {
            center: Pt::new(cx, cy),
            r2,
            r,
        },
        owner,
        orientation,
    })
}

/// Dual range p* of a left-role point.
pub fn dual_range(spec: &PredicateSpec, p: &Pt, owner: usize) -> Result<Range> {
    let k = effective_poly(spec)?;
    let parts = quad_parts(&spec.polys[k], p, true, spec.d_left)?;
    range_from_parts(parts, owner, Orientation::DualP)
}

/// Primal range s* of a right-role point.
pub fn primal_range(spec: &PredicateSpec, s: &Pt, owner: usize) -> Result<Range> {
    let k = effective_poly(spec)?;
    let parts = quad_parts(&spec.polys[k], s, false, spec.d_left)?;
    range_from_parts(parts, owner, Orientation::PrimalS)
}

// ---------------------------------------------------------------------------
// Cells

/// A cell is the open region: box interior, intersected with strict sign
/// constraints on lines (a x + b y + c) and circles (r^2 - |x - c|^2).
#[derive(Clone, Debug)]
pub struct Cell {
    pub xlo: Option<Q>,
    pub xhi: Option<Q>,
    pub ylo: Option<Q>,
    pub yhi: Option<Q>,
    pub lins: Vec<(Q, Q, Q, i32)>,
    /// (center, r^2, r, required sign); +1 is the inside of the disk.
    pub circs: Vec<(Pt, Q, Q, i32)>,
    pub witness: Option<Pt>,
    pub depth: usize,
}

impl Cell {
    pub fn plane() -> Cell {
        Cell {
            xlo: None,
            xhi: None,
            ylo: None,
            yhi: None,
            lins: Vec::new(),
            circs: Vec::new(),
            witness: Some(Pt::new(Q::zero(), Q::zero())),
            depth: 0,
        }
    }

    pub fn is_box_only(&self) -> bool {
        self.lins.is_empty() && self.circs.is_empty()
    }

    pub fn box_mid(&self) -> Pt {
        let mid1 = |lo: &Option<Q>, hi: &Option<Q>| match (lo, hi) {
            (Some(a), Some(b)) => (a + b) / q(2),
            (Some(a), None) => a + q(1),
            (None, Some(b)) => b - q(1),
            (None, None) => Q::zero(),
        };
        Pt::new(mid1(&self.xlo, &self.xhi), mid1(&self.ylo, &self.yhi))
    }

    /// Membership in the open region.
    pub fn strict_contains(&self, p: &Pt) -> bool {
        if let Some(v) = &self.xlo {
            if &p.x <= v {
                return false;
            }
        }
        if let Some(v) = &self.xhi {
            if &p.x >= v {
                return false;
            }
        }
        if let Some(v) = &self.ylo {
            if &p.y <= v {
                return false;
            }
        }
        if let Some(v) = &self.yhi {
            if &p.y >= v {
                return false;
            }
        }
        for (a, b, c, s) in &self.lins {
            if sign(&(a * &p.x + b * &p.y + c)) != *s {
                return false;
            }
        }
        for (center, r2, _, s) in &self.circs {
            if sign(&(r2 - &p.dist2(center))) != *s {
                return false;
            }
        }
        true
    }

    pub fn describe(&self) -> String {
        let f = |v: &Option<Q>| v.as_ref().map_or("*".into(), |x| x.to_string());
        format!(
            "box[{},{}]x[{},{}] lins={} circs={}",
            f(&self.xlo),
            f(&self.xhi),
            f(&self.ylo),
            f(&self.yhi),
            self.lins.len(),
            self.circs.len()
        )
    }
}

// ---------------------------------------------------------------------------
// Exact curve/cell predicates

#[derive(Clone, Debug)]
enum Curve {
    /// (x, y) = (x0 + dx t, y0 + dy t)
    Line { x0: Q, dx: Q, y0: Q, dy: Q },
    /// Rational parametrization of a circle with rational radius; the point
    /// (cx - r, cy) is the t = infinity limit and is handled separately.
    Circle { c: Pt, r: Q },
}

fn curve_point(curve: &Curve, t: &Q) -> Pt {
    match curve {
        Curve::Line { x0, dx, y0, dy } => Pt::new(x0 + &(dx * t), y0 + &(dy * t)),
        Curve::Circle { c, r } => {
            let w = Q::one() + t * t;
            let x = &c.x + &(r * &(Q::one() - t * t) / &w);
            let y = &c.y + &(r * &(q(2) * t) / &w);
            Pt::new(x, y)
        }
    }
}

fn pfrom(cs: Vec<Q>) -> Poly1 {
    Poly1::new(cs)
}

fn padd(a: &Poly1, b: &Poly1) -> Poly1 {
    let n = a.0.len().max(b.0.len());
    let mut out = vec![Q::zero(); n];
    for (i, c) in a.0.iter().enumerate() {
        out[i] = &out[i] + c;
    }
    for (i, c) in b.0.iter().enumerate() {
        out[i] = &out[i] + c;
    }
    Poly1::new(out)
}

fn pscale(a: &Poly1, c: &Q) -> Poly1 {
    Poly1::new(a.0.iter().map(|x| x * c).collect())
}

fn psub(a: &Poly1, b: &Poly1) -> Poly1 {
    padd(a, &pscale(b, &q(-1)))
}

/// Which of the cell's own bounding entities to skip (used when walking on
/// that entity's curve).
#[derive(Clone, Copy, PartialEq, Eq)]
enum Skip {
    None,
    Wall(u8), // 0 xlo, 1 xhi, 2 ylo, 3 yhi
    Lin(usize),
    Circ(usize),
}

/// The cell's strict conditions restricted to a curve, as numerator
/// polynomials in the parameter with required signs.
fn conditions_on(cell: &Cell, curve: &Curve, skip: Skip) -> Vec<(Poly1, i32)> {
    let mut out = Vec::new();
    match curve {
        Curve::Line { x0, dx, y0, dy } => {
            let walls: [(u8, &Option<Q>, &Q, &Q, bool); 4] = [
                (0, &cell.xlo, x0, dx, true),
                (1, &cell.xhi, x0, dx, false),
                (2, &cell.ylo, y0, dy, true),
                (3, &cell.yhi, y0, dy, false),
            ];
            for (id, bound, c0, d, is_lo) in walls {
                if skip == Skip::Wall(id) {
                    continue;
                }
                if let Some(v) = bound {
                    // lo: coord - v > 0; hi: v - coord > 0
                    let p = if is_lo {
                        pfrom(vec![c0 - v, d.clone()])
                    } else {
                        pfrom(vec![v - c0, -d.clone()])
                    };
                    out.push((p, 1));
                }
            }
            for (i, (a, b, c, s)) in cell.lins.iter().enumerate() {
                if skip == Skip::Lin(i) {
                    continue;
                }
                let p = pfrom(vec![a * x0 + &(b * y0) + c, a * dx + &(b * dy)]);
                out.push((p, *s));
            }
            for (i, (cc, rr2, _, s)) in cell.circs.iter().enumerate() {
                if skip == Skip::Circ(i) {
                    continue;
                }
                let ex = x0 - &cc.x;
                let ey = y0 - &cc.y;
                // rr2 - (ex + dx t)^2 - (ey + dy t)^2
                let p = pfrom(vec![
                    rr2 - &(&(&ex * &ex) + &(&ey * &ey)),
                    q(-2) * (&ex * dx + &ey * dy),
                    -(dx * dx + dy * dy),
                ]);
                out.push((p, *s));
            }
        }
        Curve::Circle { c, r } => {
            let w = pfrom(vec![Q::one(), Q::zero(), Q::one()]);
            let xnum = pfrom(vec![&c.x + r, Q::zero(), &c.x - r]);
            let ynum = pfrom(vec![c.y.clone(), q(2) * r, c.y.clone()]);
            let walls: [(u8, &Option<Q>, bool, &Poly1); 4] = [
                (0, &cell.xlo, true, &xnum),
                (1, &cell.xhi, false, &xnum),
                (2, &cell.ylo, true, &ynum),
                (3, &cell.yhi, false, &ynum),
            ];
            for (id, bound, is_lo, num) in walls {
                if skip == Skip::Wall(id) {
                    continue;
                }
                if let Some(v) = bound {
                    let p = if is_lo {
                        psub(num, &pscale(&w, v))
                    } else {
                        psub(&pscale(&w, v), num)
                    };
                    out.push((p, 1));
                }
            }
            for (i, (a, b, cc, s)) in cell.lins.iter().enumerate() {
                if skip == Skip::Lin(i) {
                    continue;
                }
                let p = padd(&padd(&pscale(&xnum, a), &pscale(&ynum, b)), &pscale(&w, cc));
                out.push((p, *s));
            }
            for (i, (cc, rr2, _, s)) in cell.circs.iter().enumerate() {
                if skip == Skip::Circ(i) {
                    continue;
                }
                let ex = psub(&xnum, &pscale(&w, &cc.x));
                let ey = psub(&ynum, &pscale(&w, &cc.y));
                let p = psub(
                    &pscale(&w.mul(&w), rr2),
                    &padd(&ex.mul(&ex), &ey.mul(&ey)),
                );
                out.push((p, *s));
            }
        }
    }
    out
}

/// A parameter value satisfying all strict conditions, if one exists.
fn feasible_sample(conds: &[(Poly1, i32)]) -> Result<Option<Q>> {
    let mut nontriv: Vec<&(Poly1, i32)> = Vec::new();
    for cond in conds {
        let (p, s) = cond;
        if p.is_zero() {
            return Ok(None);
        }
        if p.0.len() == 1 {
            if sign(&p.0[0]) != *s {
                return Ok(None);
            }
            continue;
        }
        nontriv.push(cond);
    }
    if nontriv.is_empty() {
        return Ok(Some(Q::zero()));
    }
    // all-linear fast path: intersect the solution intervals
    if nontriv.iter().all(|(p, _)| p.0.len() == 2) {
        let mut lo: Option<Q> = None;
        let mut hi: Option<Q> = None;
        for (p, s) in &nontriv {
            let b = &p.0[0];
            let a = &p.0[1];
            let root = -(b / a);
            // sign(b + a t) == s on one side of the root
            if sign(a) == *s {
                if lo.as_ref().map_or(true, |v| root > *v) {
                    lo = Some(root);
                }
            } else if hi.as_ref().map_or(true, |v| root < *v) {
                hi = Some(root);
            }
        }
        let t = match (&lo, &hi) {
            (Some(a), Some(b)) => {
                if a >= b {
                    return Ok(None);
                }
                (a + b) / q(2)
            }
            (Some(a), None) => a + q(1),
            (None, Some(b)) => b - q(1),
            (None, None) => Q::zero(),
        };
        return Ok(Some(t));
    }
    let polys: Vec<&Poly1> = nontriv.iter().map(|(p, _)| p).collect();
    for t in multi_gap_samples(&polys)? {
        if nontriv.iter().all(|(p, s)| sign(&p.eval(&t)) == *s) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

fn boundary_curve(kind: &RangeKind) -> Result<Curve> {
    Ok(match kind {
        RangeKind::Halfplane { a, b, c } => {
            if !b.is_zero() {
                Curve::Line {
                    x0: Q::zero(),
                    dx: Q::one(),
                    y0: -(c / b),
                    dy: -(a / b),
                }
            } else if !a.is_zero() {
                Curve::Line {
                    x0: -(c / a),
                    dx: Q::zero(),
                    y0: Q::zero(),
                    dy: Q::one(),
                }
            } else {
                return Err(Error::Config("halfplane with zero normal".into()));
            }
        }
        RangeKind::Disk { center, r2, r } => {
            let r = r
                .clone()
                .ok_or_else(|| Error::Config("disk range with irrational radius".into()))?;
            let _ = r2;
            Curve::Circle {
                c: center.clone(),
                r,
            }
        }
    })
}

/// Extended-value helpers over a possibly unbounded box: squared distance
/// from a point to the closed box, and to its farthest point (None = inf).
fn box_dist2_bounds(cell: &Cell, center: &Pt) -> (Q, Option<Q>) {
    let per_axis = |v: &Q, lo: &Option<Q>, hi: &Option<Q>| -> (Q, Option<Q>) {
        let near = match (lo, hi) {
            (Some(a), _) if v < a => a - v,
            (_, Some(b)) if v > b => v - b,
            _ => Q::zero(),
        };
        let far = match (lo, hi) {
            (Some(a), Some(b)) => {
                let d1 = (v - a).abs();
                let d2 = (v - b).abs();
                Some(if d1 > d2 { d1 } else { d2 })
            }
            _ => None,
        };
        (near, far)
    };
    use num::Signed;
    let (nx, fx) = per_axis(&center.x, &cell.xlo, &cell.xhi);
    let (ny, fy) = per_axis(&center.y, &cell.ylo, &cell.yhi);
    let near2 = &(&nx * &nx) + &(&ny * &ny);
    let far2 = match (fx, fy) {
        (Some(a), Some(b)) => Some(&(&a * &a) + &(&b * &b)),
        _ => None,
    };
    (near2, far2)
}

/// Range of a linear form over the closed (possibly unbounded) box, as
/// extended values (None = unbounded on that end).
fn linear_box_range(cell: &Cell, a: &Q, b: &Q, c: &Q) -> (Option<Q>, Option<Q>) {
    let term = |coef: &Q, lo: &Option<Q>, hi: &Option<Q>| -> (Option<Q>, Option<Q>) {
        match sign(coef) {
            0 => (Some(Q::zero()), Some(Q::zero())),
            1 => (
                lo.as_ref().map(|v| coef * v),
                hi.as_ref().map(|v| coef * v),
            ),
            _ => (
                hi.as_ref().map(|v| coef * v),
                lo.as_ref().map(|v| coef * v),
            ),
        }
    };
    let (xl, xh) = term(a, &cell.xlo, &cell.xhi);
    let (yl, yh) = term(b, &cell.ylo, &cell.yhi);
    let add = |u: Option<Q>, v: Option<Q>| match (u, v) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    (add(xl, yl).map(|v| v + c), add(xh, yh).map(|v| v + c))
}

/// Does the range's boundary meet the open cell region? Exact.
pub fn boundary_meets(kind: &RangeKind, cell: &Cell) -> Result<bool> {
    if cell.is_box_only() {
        return Ok(match kind {
            RangeKind::Halfplane { a, b, c } => {
                let (lo, hi) = linear_box_range(cell, a, b, c);
                lo.map_or(true, |v| sign(&v) < 0) && hi.map_or(true, |v| sign(&v) > 0)
            }
            RangeKind::Disk { center, r2, .. } => {
                let (near2, far2) = box_dist2_bounds(cell, center);
                near2 < *r2 && far2.map_or(true, |f| f > *r2)
            }
        });
    }
    let curve = boundary_curve(kind)?;
    let conds = conditions_on(cell, &curve, Skip::None);
    if feasible_sample(&conds)?.is_some() {
        return Ok(true);
    }
    if let Curve::Circle { c, r } = &curve {
        let special = Pt::new(&c.x - r, c.y.clone());
        if cell.strict_contains(&special) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Disjoint,
    Crosses,
    Contains,
}

/// Region-based classification of a range against an open cell.
pub fn classify(range: &Range, cell: &Cell) -> Result<Class> {
    if boundary_meets(&range.kind, cell)? {
        return Ok(Class::Crosses);
    }
    match &cell.witness {
        None => Ok(Class::Disjoint),
        Some(w) => Ok(if range.contains_point(w) {
            Class::Contains
        } else {
            Class::Disjoint
        }),
    }
}

/// Nudges a curve point into the open cell along `dir`.
fn displace(cell: &Cell, p: &Pt, dir: (Q, Q)) -> Option<Pt> {
    if dir.0.is_zero() && dir.1.is_zero() {
        return None;
    }
    let mut step = Q::one();
    for _ in 0..300 {
        let cand = Pt::new(&p.x + &(&dir.0 * &step), &p.y + &(&dir.1 * &step));
        if cell.strict_contains(&cand) {
            return Some(cand);
        }
        step = step / q(2);
    }
    None
}

/// A rational point in the open cell, or None if the cell is empty. Walks
/// each bounding entity's curve and nudges inward.
pub fn find_witness(cell: &Cell) -> Result<Option<Pt>> {
    if cell.is_box_only() {
        return Ok(Some(cell.box_mid()));
    }
    // box walls
    let walls: [(u8, Option<Q>, bool, bool); 4] = [
        (0, cell.xlo.clone(), true, true),
        (1, cell.xhi.clone(), true, false),
        (2, cell.ylo.clone(), false, true),
        (3, cell.yhi.clone(), false, false),
    ];
    for (id, bound, vertical, is_lo) in walls {
        let Some(v) = bound else { continue };
        let curve = if vertical {
            Curve::Line {
                x0: v.clone(),
                dx: Q::zero(),
                y0: Q::zero(),
                dy: Q::one(),
            }
        } else {
            Curve::Line {
                x0: Q::zero(),
                dx: Q::one(),
                y0: v.clone(),
                dy: Q::zero(),
            }
        };
        let conds = conditions_on(cell, &curve, Skip::Wall(id));
        if let Some(t) = feasible_sample(&conds)? {
            let p = curve_point(&curve, &t);
            let s = if is_lo { q(1) } else { q(-1) };
            let dir = if vertical {
                (s, Q::zero())
            } else {
                (Q::zero(), s)
            };
            if let Some(w) = displace(cell, &p, dir) {
                return Ok(Some(w));
            }
        }
    }
    for (i, (a, b, c, sgn)) in cell.lins.iter().enumerate() {
        let curve = boundary_curve(&RangeKind::Halfplane {
            a: a.clone(),
            b: b.clone(),
            c: c.clone(),
        })?;
        let conds = conditions_on(cell, &curve, Skip::Lin(i));
        if let Some(t) = feasible_sample(&conds)? {
            let p = curve_point(&curve, &t);
            let s = q(*sgn as i64);
            if let Some(w) = displace(cell, &p, (a * &s, b * &s)) {
                return Ok(Some(w));
            }
        }
    }
    for (i, (center, _, r, sgn)) in cell.circs.iter().enumerate() {
        let curve = Curve::Circle {
            c: center.clone(),
            r: r.clone(),
        };
        let conds = conditions_on(cell, &curve, Skip::Circ(i));
        let mut candidates: Vec<Pt> = Vec::new();
        if let Some(t) = feasible_sample(&conds)? {
            candidates.push(curve_point(&curve, &t));
        }
        candidates.push(Pt::new(&center.x - r, center.y.clone()));
        for p in candidates {
            let dir = if *sgn > 0 {
                (&center.x - &p.x, &center.y - &p.y)
            } else {
                (&p.x - &center.x, &p.y - &center.y)
            };
            if let Some(w) = displace(cell, &p, dir) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Range partitioning (verified cutting)

struct Work {
    cell: Cell,
    crossing: Vec<usize>,
    pts: Vec<usize>,
}

fn range_sign(range: &Range, p: &Pt) -> i32 {
    if range.contains_point(p) {
        1
    } else {
        -1
    }
}

/// Builds a plane partition whose every cell is crossed by at most
/// floor(|active|/d) of the active ranges; distributes the given points.
#[allow(clippy::type_complexity)]
fn range_partition_with(
    ranges: &[Range],
    active: &[usize],
    d_param: usize,
    seed: u64,
    pts: &[Pt],
    pt_ids: &[usize],
) -> Result<Vec<(Cell, Vec<usize>, Vec<usize>)>> {
    if d_param < 2 {
        return Err(Error::arg("cutting parameter D must be at least 2"));
    }
    let m = active.len();
    let mut last_err = String::new();
    for attempt in 0..32u64 {
        match range_partition_attempt(ranges, active, d_param, seed.wrapping_add(attempt), pts, pt_ids)
        {
            Ok(cells) => {
                // hard post-condition sweep
                for (cell, crossing, _) in &cells {
                    debug_assert!(crossing.len() * d_param <= m, "{}", cell.describe());
                    if crossing.len() * d_param > m {
                        return Err(Error::Partition(
                            "crossing bound violated after refinement".into(),
                        ));
                    }
                }
                return Ok(cells);
            }
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::Partition(format!(
        "retry budget exhausted over {m} ranges with D={d_param}: {last_err}"
    )))
}

#[allow(clippy::type_complexity)]
fn range_partition_attempt(
    ranges: &[Range],
    active: &[usize],
    d_param: usize,
    seed: u64,
    pts: &[Pt],
    pt_ids: &[usize],
) -> Result<Vec<(Cell, Vec<usize>, Vec<usize>)>> {
    let m = active.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let s_count = ((8.0 * d_param as f64 * ((d_param + 1) as f64).ln()).ceil() as usize).min(m);
    // partial Fisher-Yates sample without replacement
    let mut pool: Vec<usize> = active.to_vec();
    for i in 0..s_count {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let sampled: Vec<usize> = pool[..s_count].to_vec();

    let root = Work {
        cell: Cell::plane(),
        crossing: active.to_vec(),
        pts: pt_ids.to_vec(),
    };
    let mut stack = vec![root];
    let mut done: Vec<Work> = Vec::new();
    let mut ops = 0usize;
    while let Some(wc) = stack.pop() {
        if wc.crossing.len() * d_param <= m {
            done.push(wc);
            continue;
        }
        ops += 1;
        if ops > 100_000 {
            return Err(Error::Partition("refinement budget exhausted".into()));
        }
        if std::env::var("GEOLABEL_TRACE").is_ok() && ops % 100 == 0 {
            eprintln!(
                "op {ops}: stack={} done={} crossing={} circs={} lins={} cell={}",
                stack.len(),
                done.len(),
                wc.crossing.len(),
                wc.cell.circs.len(),
                wc.cell.lins.len(),
                wc.cell.describe()
            );
        }
        let in_crossing: std::collections::HashSet<usize> = wc.crossing.iter().copied().collect();
        let ss: Vec<usize> = sampled
            .iter()
            .copied()
            .filter(|k| in_crossing.contains(k))
            .collect();
        if ss.is_empty() {
            return Err(Error::Partition(
                "no sampled boundary crosses an over-crossed cell".into(),
            ));
        }
        // prefer splitting by a sampled line
        let line = ss
            .iter()
            .find(|&&k| matches!(ranges[k].kind, RangeKind::Halfplane { .. }))
            .copied();
        let children = if let Some(k) = line {
            sign_split(ranges, &wc, k, pts)?
        } else if ss.len() <= 2 {
            sign_split(ranges, &wc, ss[0], pts)?
        } else {
            // keep cells box-shaped while candidate coordinates from the
            // sampled circles remain; afterwards carve by boundary sign
            match box_split(ranges, &wc, &ss, pts)? {
                Some(kids) => kids,
                None => sign_split(ranges, &wc, ss[0], pts)?,
            }
        };
        for child in children {
            stack.push(child);
        }
    }
    Ok(done
        .into_iter()
        .map(|w| (w.cell, w.crossing, w.pts))
        .collect())
}

fn refilter_crossing(ranges: &[Range], crossing: &[usize], cell: &Cell) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for &k in crossing {
        if boundary_meets(&ranges[k].kind, cell)? {
            out.push(k);
        }
    }
    Ok(out)
}

fn sign_split(ranges: &[Range], wc: &Work, k: usize, pts: &[Pt]) -> Result<Vec<Work>> {
    let range = &ranges[k];
    let curve = boundary_curve(&range.kind)?;
    let parent_witness_sign = wc.cell.witness.as_ref().map(|w| range_sign(range, w));
    let mut out = Vec::new();
    for sgn in [1i32, -1] {
        let mut cell = wc.cell.clone();
        cell.depth += 1;
        match &range.kind {
            RangeKind::Halfplane { a, b, c } => {
                cell.lins.push((a.clone(), b.clone(), c.clone(), sgn))
            }
            RangeKind::Disk { center, r2, r } => {
                let r = r
                    .clone()
                    .ok_or_else(|| Error::Config("disk range with irrational radius".into()))?;
                cell.circs.push((center.clone(), r2.clone(), r, sgn));
            }
        }
        // witness: inherit when the parent's lies on this side, else derive
        // from a boundary point of the splitter inside the parent cell
        cell.witness = if parent_witness_sign == Some(sgn)
            && wc
                .cell
                .witness
                .as_ref()
                .map_or(false, |w| cell.strict_contains(w))
        {
            wc.cell.witness.clone()
        } else {
            let conds = conditions_on(&wc.cell, &curve, Skip::None);
            let mut w = None;
            let mut candidates: Vec<Pt> = Vec::new();
            if let Some(t) = feasible_sample(&conds)? {
                candidates.push(curve_point(&curve, &t));
            }
            if let Curve::Circle { c, r } = &curve {
                let special = Pt::new(&c.x - r, c.y.clone());
                if wc.cell.strict_contains(&special) {
                    candidates.push(special);
                }
            }
            for p in candidates {
                let dir = match &range.kind {
                    RangeKind::Halfplane { a, b, .. } => {
                        let s = q(sgn as i64);
                        (a * &s, b * &s)
                    }
                    RangeKind::Disk { center, .. } => {
                        if sgn > 0 {
                            (&center.x - &p.x, &center.y - &p.y)
                        } else {
                            (&p.x - &center.x, &p.y - &center.y)
                        }
                    }
                };
                if let Some(found) = displace(&cell, &p, dir) {
                    w = Some(found);
                    break;
                }
            }
            w
        };
        let cpts: Vec<usize> = wc
            .pts
            .iter()
            .copied()
            .filter(|&i| {
                let s = range_sign(range, &pts[i]);
                s == sgn || (s == 0 && sgn == 1)
            })
            .collect();
        if cell.witness.is_none() && cpts.is_empty() {
            continue; // provably empty side
        }
        let crossing = refilter_crossing(ranges, &wc.crossing, &cell)?;
        out.push(Work {
            cell,
            crossing,
            pts: cpts,
        });
    }
    Ok(out)
}

fn box_split(ranges: &[Range], wc: &Work, ss: &[usize], pts: &[Pt]) -> Result<Option<Vec<Work>>> {
    // candidate coordinates drawn from the sampled circles' extents
    let mut split: Option<(bool, Q)> = None;
    for try_axis in 0..2 {
        let vertical = (wc.cell.depth + try_axis) % 2 == 0;
        let (lo, hi) = if vertical {
            (&wc.cell.xlo, &wc.cell.xhi)
        } else {
            (&wc.cell.ylo, &wc.cell.yhi)
        };
        let mut cands: Vec<Q> = Vec::new();
        for &k in ss {
            if let RangeKind::Disk { center, r, .. } = &ranges[k].kind {
                let c = if vertical { &center.x } else { &center.y };
                cands.push(c.clone());
                if let Some(r) = r {
                    cands.push(c - r);
                    cands.push(c + r);
                }
            }
        }
        cands.retain(|v| {
            lo.as_ref().map_or(true, |b| v > b) && hi.as_ref().map_or(true, |b| v < b)
        });
        if cands.is_empty() {
            continue;
        }
        cands.sort();
        split = Some((vertical, cands[cands.len() / 2].clone()));
        break;
    }
    if let Some((vertical, v)) = split {
        let mut out = Vec::new();
        for is_lo_side in [true, false] {
            let mut cell = wc.cell.clone();
            cell.depth += 1;
            if vertical {
                if is_lo_side {
                    cell.xhi = Some(v.clone());
                } else {
                    cell.xlo = Some(v.clone());
                }
            } else if is_lo_side {
                cell.yhi = Some(v.clone());
            } else {
                cell.ylo = Some(v.clone());
            }
            cell.witness = match &wc.cell.witness {
                Some(w) if cell.strict_contains(w) => Some(w.clone()),
                _ => {
                    if cell.is_box_only() {
                        Some(cell.box_mid())
                    } else {
                        find_witness(&cell)?
                    }
                }
            };
            let cpts: Vec<usize> = wc
                .pts
                .iter()
                .copied()
                .filter(|&i| {
                    let coord = if vertical { &pts[i].x } else { &pts[i].y };
                    if is_lo_side {
                        coord <= &v
                    } else {
                        coord > &v
                    }
                })
                .collect();
            if cell.witness.is_none() && cpts.is_empty() {
                continue;
            }
            let crossing = refilter_crossing(ranges, &wc.crossing, &cell)?;
            out.push(Work {
                cell,
                crossing,
                pts: cpts,
            });
        }
        return Ok(Some(out));
    }
    Ok(None)
}

/// Verified random cutting: every returned cell is crossed by at most
/// |ranges|/D of the input range boundaries.
pub fn range_partition(ranges: &[Range], d_param: usize, seed: u64) -> Result<Vec<Cell>> {
    let active: Vec<usize> = (0..ranges.len()).collect();
    let cells = range_partition_with(ranges, &active, d_param, seed, &[], &[])?;
    Ok(cells.into_iter().map(|(c, _, _)| c).collect())
}

// ---------------------------------------------------------------------------
// Point partitioning (kd-median)

/// kd-median partition into exactly r cells (r a power of 4); returns
/// (box cell, member point indices) pairs.
pub fn point_partition(pts: &[Pt], r: usize) -> Result<Vec<(Cell, Vec<usize>)>> {
    if r < 4 || !r.is_power_of_two() || r.trailing_zeros() % 2 != 0 {
        return Err(Error::arg("r must be a power of 4, at least 4"));
    }
    if r > pts.len() {
        return Err(Error::arg("r exceeds the point count"));
    }
    let levels = r.trailing_zeros() as usize; // log2 r
    let mut cells = Vec::new();
    let ids: Vec<usize> = (0..pts.len()).collect();
    kd_split(pts, ids, Cell::plane(), 0, levels, &mut cells);
    Ok(cells)
}

fn kd_split(
    pts: &[Pt],
    mut ids: Vec<usize>,
    cell: Cell,
    depth: usize,
    levels: usize,
    out: &mut Vec<(Cell, Vec<usize>)>,
) {
    if depth == levels {
        out.push((cell, ids));
        return;
    }
    let vertical = depth % 2 == 0;
    ids.sort_by(|&a, &b| {
        let (ca, cb) = if vertical {
            (&pts[a].x, &pts[b].x)
        } else {
            (&pts[a].y, &pts[b].y)
        };
        ca.cmp(cb).then(a.cmp(&b))
    });
    let k = ids.len();
    let left_n = (k + 1) / 2;
    let right = ids.split_off(left_n);
    let wall = {
        let last = *ids.last().expect("median split of a non-empty set");
        if vertical {
            pts[last].x.clone()
        } else {
            pts[last].y.clone()
        }
    };
    let mut lcell = cell.clone();
    let mut rcell = cell;
    if vertical {
        lcell.xhi = Some(wall.clone());
        rcell.xlo = Some(wall);
    } else {
        lcell.yhi = Some(wall.clone());
        rcell.ylo = Some(wall);
    }
    lcell.depth += 1;
    rcell.depth += 1;
    lcell.witness = Some(lcell.box_mid());
    rcell.witness = Some(rcell.box_mid());
    kd_split(pts, ids, lcell, depth + 1, levels, out);
    kd_split(pts, right, rcell, depth + 1, levels, out);
}

/// Number of cells whose closed box is met by the axis-parallel line at `v`.
pub fn axis_line_crossings(cells: &[(Cell, Vec<usize>)], vertical: bool, v: &Q) -> usize {
    cells
        .iter()
        .filter(|(c, _)| {
            let (lo, hi) = if vertical {
                (&c.xlo, &c.xhi)
            } else {
                (&c.ylo, &c.yhi)
            };
            lo.as_ref().map_or(true, |b| v > b) && hi.as_ref().map_or(true, |b| v < b)
        })
        .count()
}

// ---------------------------------------------------------------------------
// Two-phase tree

#[derive(Clone, Debug)]
pub struct BuildConfig {
    pub d: usize,
    pub r: usize,
    /// Threshold exponent as a fraction (numerator, denominator).
    pub n_exp: (u32, u32),
    pub leaf_point_cap: usize,
    pub seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            d: 4,
            r: 16,
            n_exp: (2, 3),
            leaf_point_cap: 4,
            seed: 0,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config("D must be at least 2".into()));
        }
        if self.r < 4 || !self.r.is_power_of_two() || self.r.trailing_zeros() % 2 != 0 {
            return Err(Error::Config("r must be a power of 4, at least 4".into()));
        }
        if self.n_exp.0 == 0 || self.n_exp.1 == 0 || self.n_exp.0 >= self.n_exp.1 {
            return Err(Error::Config("threshold exponent must be in (0, 1)".into()));
        }
        if self.leaf_point_cap == 0 {
            return Err(Error::Config("leaf point cap must be positive".into()));
        }
        Ok(())
    }
}

/// Smallest N >= 1 with N^den >= p_count^num, i.e. ceil(p_count^(num/den)).
pub fn phase1_threshold(p_count: usize, n_exp: (u32, u32)) -> usize {
    if p_count <= 1 {
        return 1;
    }
    let (num, den) = n_exp;
    let target = (p_count as u128).pow(num);
    let mut n: u128 = 1;
    while n.pow(den) < target {
        n += 1;
    }
    n as usize
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub phase: u8,
    pub depth: usize,
    pub cell: Cell,
    /// S ids in phase 1, P ids in phase 2.
    pub point_ids: Vec<usize>,
    /// Owner side: P ids in phase 1, S ids in phase 2.
    pub crossing_range_ids: Vec<usize>,
    pub containing_range_ids: Vec<usize>,
    pub children: Vec<TreeNode>,
}

struct Builder<'a> {
    p: &'a [Pt],
    s: &'a [Pt],
    spec: &'a PredicateSpec,
    poly_idx: usize,
    cfg: &'a BuildConfig,
    dual_ranges: Vec<Range>,
    threshold: usize,
    dec: BicliqueDecomposition,
    salt: u64,
}

impl<'a> Builder<'a> {
    fn next_seed(&mut self) -> u64 {
        self.salt = self.salt.wrapping_add(1);
        self.cfg
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(self.salt)
    }

    fn incident(&self, p_id: usize, s_id: usize) -> Result<bool> {
        let u = [self.p[p_id].x.clone(), self.p[p_id].y.clone()];
        let v = [self.s[s_id].x.clone(), self.s[s_id].y.clone()];
        Ok(self.spec.eval_sign(self.poly_idx + 1, &u, &v)? >= 0)
    }

    fn emit(&mut self, p_side: Vec<usize>, s_side: Vec<usize>) {
        if p_side.is_empty() || s_side.is_empty() {
            return;
        }
        let np = self.p.len();
        let right: Vec<usize> = s_side.into_iter().map(|s| np + s).collect();
        self.dec.push(p_side, right);
    }

    fn build1(
        &mut self,
        cell: Cell,
        active: Vec<usize>,
        containing: Vec<usize>,
        s_ids: Vec<usize>,
        depth: usize,
    ) -> Result<TreeNode> {
        if active.len() <= self.threshold || s_ids.is_empty() {
            return self.build2_root(cell, active, containing, s_ids, depth);
        }
        let seed = self.next_seed();
        let parts = range_partition_with(
            &self.dual_ranges,
            &active,
            self.cfg.d,
            seed,
            self.s,
            &s_ids,
        )?;
        let mut children = Vec::new();
        for (ccell, crossing, cpts) in parts {
            if cpts.is_empty() {
                continue;
            }
            let crossing_set: std::collections::HashSet<usize> =
                crossing.iter().copied().collect();
            let mut contained_here = Vec::new();
            if ccell.is_box_only() {
                // connected region: one witness decides each resolved range
                let mut owners = Vec::new();
                let w = ccell.witness.clone();
                for &k in &active {
                    if crossing_set.contains(&k) {
                        continue;
                    }
                    if let Some(w) = &w {
                        if self.dual_ranges[k].contains_point(w) {
                            owners.push(self.dual_ranges[k].owner);
                            contained_here.push(k);
                        }
                    }
                }
                self.emit(owners, cpts.clone());
            } else {
                // possibly disconnected region: group the cell's points by
                // their exact side of each resolved range
                for &k in &active {
                    if crossing_set.contains(&k) {
                        continue;
                    }
                    let pos: Vec<usize> = cpts
                        .iter()
                        .copied()
                        .filter(|&sid| self.dual_ranges[k].contains_point(&self.s[sid]))
                        .collect();
                    if !pos.is_empty() {
                        contained_here.push(k);
                        self.emit(vec![self.dual_ranges[k].owner], pos);
                    }
                }
            }
            children.push(self.build1(ccell, crossing, contained_here, cpts, depth + 1)?);
        }
        Ok(TreeNode {
            phase: 1,
            depth,
            cell,
            point_ids: s_ids,
            crossing_range_ids: active,
            containing_range_ids: containing,
            children,
        })
    }

    fn build2_root(
        &mut self,
        cell: Cell,
        surviving: Vec<usize>,
        containing: Vec<usize>,
        s_ids: Vec<usize>,
        depth: usize,
    ) -> Result<TreeNode> {
        let mut p_ids: Vec<usize> = surviving
            .iter()
            .map(|&k| self.dual_ranges[k].owner)
            .collect();
        p_ids.sort_unstable();
        let mut s_ranges = std::collections::HashMap::new();
        for &sid in &s_ids {
            s_ranges.insert(sid, primal_range(self.spec, &self.s[sid], sid)?);
        }
        let child = self.build2(Cell::plane(), p_ids, s_ids.clone(), Vec::new(), depth + 1, &s_ranges)?;
        Ok(TreeNode {
            phase: 1,
            depth,
            cell,
            point_ids: s_ids,
            crossing_range_ids: surviving,
            containing_range_ids: containing,
            children: vec![child],
        })
    }

    fn build2(
        &mut self,
        cell: Cell,
        p_ids: Vec<usize>,
        s_active: Vec<usize>,
        containing: Vec<usize>,
        depth: usize,
        s_ranges: &std::collections::HashMap<usize, Range>,
    ) -> Result<TreeNode> {
        if p_ids.len() <= self.cfg.leaf_point_cap || p_ids.len() < 4 {
            // explicit encoding of the remaining incidences
            for &pid in &p_ids {
                for &sid in &s_active {
                    if self.incident(pid, sid)? {
                        self.emit(vec![pid], vec![sid]);
                    }
                }
            }
            return Ok(TreeNode {
                phase: 2,
                depth,
                cell,
                point_ids: p_ids,
                crossing_range_ids: s_active,
                containing_range_ids: containing,
                children: Vec::new(),
            });
        }
        let mut r_eff = 4usize;
        while r_eff * 4 <= self.cfg.r.min(p_ids.len()) {
            r_eff *= 4;
        }
        let coords: Vec<Pt> = p_ids.iter().map(|&i| self.p[i].clone()).collect();
        let cells = point_partition(&coords, r_eff)?;
        let mut children = Vec::new();
        for (ccell, local) in cells {
            if local.is_empty() {
                continue;
            }
            let cp: Vec<usize> = local.iter().map(|&l| p_ids[l]).collect();
            let wpt = &self.p[cp[0]];
            let mut kept = Vec::new();
            let mut contained_here = Vec::new();
            for &sid in &s_active {
                let range = &s_ranges[&sid];
                match classify_closed_box(range, &ccell, wpt) {
                    Class::Crosses => kept.push(sid),
                    Class::Contains => {
                        contained_here.push(sid);
                        self.emit(cp.clone(), vec![sid]);
                    }
                    Class::Disjoint => {}
                }
            }
            children.push(self.build2(ccell, cp, kept, contained_here, depth + 1, s_ranges)?);
        }
        Ok(TreeNode {
            phase: 2,
            depth,
            cell,
            point_ids: p_ids,
            crossing_range_ids: s_active,
            containing_range_ids: containing,
            children,
        })
    }
}

/// Classification against the closed box of a kd cell; `wpt` is a point of
/// the cell used to orient the non-crossing cases.
fn classify_closed_box(range: &Range, cell: &Cell, wpt: &Pt) -> Class {
    let crosses = match &range.kind {
        RangeKind::Halfplane { a, b, c } => {
            let (lo, hi) = linear_box_range(cell, a, b, c);
            lo.map_or(true, |v| sign(&v) <= 0) && hi.map_or(true, |v| sign(&v) >= 0)
        }
        RangeKind::Disk { center, r2, .. } => {
            let (near2, far2) = box_dist2_bounds(cell, center);
            near2 <= *r2 && far2.map_or(true, |f| f >= *r2)
        }
    };
    if crosses {
        Class::Crosses
    } else if range.contains_point(wpt) {
        Class::Contains
    } else {
        Class::Disjoint
    }
}

/// Builds the two-phase tree for the bipartite incidence instance (P, S)
/// under a single-polynomial planar predicate. The returned decomposition is
/// over |P| + |S| vertices: P ids first, then S ids offset by |P|.
pub fn build_two_phase_tree(
    p: &[Pt],
    s: &[Pt],
    spec: &PredicateSpec,
    cfg: &BuildConfig,
) -> Result<(TreeNode, BicliqueDecomposition)> {
    cfg.validate()?;
    if spec.d_left != 2 || spec.d_right != 2 {
        return Err(Error::Config("partition tree requires planar roles".into()));
    }
    let poly_idx = effective_poly(spec)?;
    let dual_ranges: Vec<Range> = p
        .iter()
        .enumerate()
        .map(|(i, pt)| dual_range(spec, pt, i))
        .collect::<Result<_>>()?;
    let mut builder = Builder {
        p,
        s,
        spec,
        poly_idx,
        cfg,
        dual_ranges,
        threshold: phase1_threshold(p.len(), cfg.n_exp),
        dec: BicliqueDecomposition::new(p.len() + s.len(), "two_phase_tree"),
        salt: 0,
    };
    let active: Vec<usize> = (0..p.len()).collect();
    let s_ids: Vec<usize> = (0..s.len()).collect();
    let root = builder.build1(Cell::plane(), active, Vec::new(), s_ids, 0)?;
    Ok((root, builder.dec))
}

#[derive(Clone, Debug)]
pub struct NuStats {
    pub nu_p: Vec<usize>,
    pub nu_s: Vec<usize>,
    pub max_nu_p: usize,
    pub max_nu_s: usize,
    pub depth: usize,
    pub node_count: usize,
}

pub fn tree_nu_stats(tree: &TreeNode, dec: &BicliqueDecomposition, n_p: usize) -> NuStats {
    let met = crate::biclique::metrics(dec);
    let (nu_p, nu_s) = met.nu.split_at(n_p.min(met.nu.len()));
    fn walk(n: &TreeNode, depth: usize, count: &mut usize, max_depth: &mut usize) {
        *count += 1;
        *max_depth = (*max_depth).max(depth);
        for c in &n.children {
            walk(c, depth + 1, count, max_depth);
        }
    }
    let mut count = 0;
    let mut depth = 0;
    walk(tree, 0, &mut count, &mut depth);
    NuStats {
        nu_p: nu_p.to_vec(),
        nu_s: nu_s.to_vec(),
        max_nu_p: nu_p.iter().copied().max().unwrap_or(0),
        max_nu_s: nu_s.iter().copied().max().unwrap_or(0),
        depth,
        node_count: count,
    }
}

/// Debug dump of the tree structure with per-node counts.
pub fn tree_dump(node: &TreeNode) -> serde_json::Value {
    serde_json::json!({
        "phase": node.phase,
        "depth": node.depth,
        "cell": node.cell.describe(),
        "points": node.point_ids.len(),
        "crossing": node.crossing_range_ids.len(),
        "containing": node.containing_range_ids.len(),
        "children": node.children.iter().map(tree_dump).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biclique::validate_decomposition;
    use crate::matrix::AdjacencyMatrix;
    use crate::predicate::{point_line_spec, unit_disk_spec};
    use crate::rat::qr;

    fn disk(cx: i64, cy: i64, r: i64, owner: usize) -> Range {
        Range {
            kind: RangeKind::Disk {
                center: Pt::new(q(cx), q(cy)),
                r2: q(r * r),
                r: Some(q(r)),
            },
            owner,
            orientation: Orientation::DualP,
        }
    }

    fn unit_box() -> Cell {
        let mut c = Cell::plane();
        c.xlo = Some(q(0));
        c.xhi = Some(q(1));
        c.ylo = Some(q(0));
        c.yhi = Some(q(1));
        c.witness = Some(Pt::new(qr(1, 2), qr(1, 2)));
        c
    }

    #[test]
    fn classify_disk_against_box() {
        let cell = unit_box();
        // huge disk containing the box
        assert_eq!(classify(&disk(0, 0, 100, 0), &cell).unwrap(), Class::Contains);
        // small disk centered in the box: boundary inside the region
        let small = Range {
            kind: RangeKind::Disk {
                center: Pt::new(qr(1, 2), qr(1, 2)),
                r2: qr(1, 100),
                r: None,
            },
            owner: 0,
            orientation: Orientation::DualP,
        };
        assert_eq!(classify(&small, &cell).unwrap(), Class::Crosses);
        // far-away disk
        assert_eq!(classify(&disk(50, 50, 2, 0), &cell).unwrap(), Class::Disjoint);
    }

    #[test]
    fn classify_with_sign_constraints() {
        // cell = inside of a radius-10 circle; a radius-1 circle at the
        // center crosses it, the defining boundary does not
        let mut cell = Cell::plane();
        cell.circs.push((Pt::new(q(0), q(0)), q(100), q(10), 1));
        cell.witness = Some(Pt::new(q(0), q(0)));
        assert_eq!(classify(&disk(0, 0, 1, 0), &cell).unwrap(), Class::Crosses);
        assert_eq!(classify(&disk(0, 0, 10, 0), &cell).unwrap(), Class::Contains);
        assert_eq!(classify(&disk(100, 0, 10, 0), &cell).unwrap(), Class::Disjoint);
    }

    #[test]
    fn single_range_cutting_reaches_zero_crossing() {
        let ranges = vec![disk(0, 0, 2, 0)];
        let cells = range_partition(&ranges, 2, 7).unwrap();
        // bound is floor(1/2) = 0
        for cell in &cells {
            assert!(!boundary_meets(&ranges[0].kind, cell).unwrap());
        }
    }

    #[test]
    fn random_disks_cutting_verified() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let ranges: Vec<Range> = (0..40)
            .map(|i| disk(rng.gen_range(0..40), rng.gen_range(0..40), 2, i))
            .collect();
        for d in [2usize, 4] {
            let cells = range_partition(&ranges, d, 11).unwrap();
            for cell in &cells {
                let crossing = ranges
                    .iter()
                    .filter(|r| boundary_meets(&r.kind, cell).unwrap())
                    .count();
                assert!(crossing * d <= ranges.len());
            }
        }
    }

    #[test]
    fn clustered_identical_disks_cutting() {
        // near-coincident boundaries, distinct centers
        let ranges: Vec<Range> = (0..12)
            .map(|i| Range {
                kind: RangeKind::Disk {
                    center: Pt::new(qr(i as i64, 64), qr(i as i64, 61)),
                    r2: q(4),
                    r: Some(q(2)),
                },
                owner: i,
                orientation: Orientation::DualP,
            })
            .collect();
        let cells = range_partition(&ranges, 4, 5).unwrap();
        for cell in &cells {
            let crossing = ranges
                .iter()
                .filter(|r| boundary_meets(&r.kind, cell).unwrap())
                .count();
            assert!(crossing * 4 <= ranges.len());
        }
    }

    #[test]
    fn line_ranges_cutting_verified() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let ranges: Vec<Range> = (0..30)
            .map(|i| Range {
                kind: RangeKind::Halfplane {
                    a: q(rng.gen_range(-5..=5)),
                    b: q(rng.gen_range(1..=5)),
                    c: q(rng.gen_range(-20..=20)),
                },
                owner: i,
                orientation: Orientation::DualP,
            })
            .collect();
        let cells = range_partition(&ranges, 2, 1).unwrap();
        for cell in &cells {
            let crossing = ranges
                .iter()
                .filter(|r| boundary_meets(&r.kind, cell).unwrap())
                .count();
            assert!(crossing * 2 <= ranges.len());
        }
    }

    #[test]
    fn grid_point_partition() {
        let pts: Vec<Pt> = (0..16)
            .map(|i| Pt::new(q(i % 4), q(i / 4)))
            .collect();
        let cells = point_partition(&pts, 4).unwrap();
        assert_eq!(cells.len(), 4);
        for (_, ids) in &cells {
            assert_eq!(ids.len(), 4);
        }
    }

    #[test]
    fn point_partition_counts_and_line_crossings() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let pts: Vec<Pt> = (0..100)
            .map(|_| Pt::new(qr(rng.gen_range(0..100_000), 7), qr(rng.gen_range(0..100_000), 13)))
            .collect();
        let cells = point_partition(&pts, 16).unwrap();
        assert_eq!(cells.len(), 16);
        let total: usize = cells.iter().map(|(_, ids)| ids.len()).sum();
        assert_eq!(total, 100);
        for (_, ids) in &cells {
            assert!(ids.len() <= 100usize.div_ceil(16) + 2);
        }
        for _ in 0..100 {
            let v = qr(rng.gen_range(0..100_000), 7);
            assert!(axis_line_crossings(&cells, true, &v) <= 8);
            assert!(axis_line_crossings(&cells, false, &v) <= 8);
        }
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(phase1_threshold(1000, (2, 3)), 100);
        assert_eq!(phase1_threshold(8, (2, 3)), 4);
        assert_eq!(phase1_threshold(1, (2, 3)), 1);
    }

    fn incidence_matrix(p: &[Pt], s: &[Pt], spec: &PredicateSpec) -> AdjacencyMatrix {
        let k = effective_poly(spec).unwrap();
        let mut m = AdjacencyMatrix::new(p.len() + s.len());
        for (i, pp) in p.iter().enumerate() {
            for (j, ss) in s.iter().enumerate() {
                let u = [pp.x.clone(), pp.y.clone()];
                let v = [ss.x.clone(), ss.y.clone()];
                if spec.eval_sign(k + 1, &u, &v).unwrap() >= 0 {
                    m.set(i, p.len() + j, true);
                }
            }
        }
        m
    }

    #[test]
    fn empty_incidence_gives_empty_dec() {
        let p = vec![Pt::new(q(0), q(0)), Pt::new(q(1), q(0))];
        let s = vec![Pt::new(q(100), q(100)), Pt::new(q(101), q(100))];
        let spec = unit_disk_spec();
        let (_, dec) = build_two_phase_tree(&p, &s, &spec, &BuildConfig::default()).unwrap();
        assert!(dec.bicliques.is_empty());
    }

    #[test]
    fn single_pair_tree() {
        let p = vec![Pt::new(q(0), q(0))];
        let s = vec![Pt::new(q(1), q(0))];
        let spec = unit_disk_spec();
        let (tree, dec) = build_two_phase_tree(&p, &s, &spec, &BuildConfig::default()).unwrap();
        let m = incidence_matrix(&p, &s, &spec);
        assert!(validate_decomposition(&dec, &m).unwrap().ok);
        let stats = tree_nu_stats(&tree, &dec, 1);
        assert_eq!(stats.max_nu_p, 1);
        assert_eq!(stats.max_nu_s, 1);
    }

    fn random_pts(n: usize, extent: i64, seed: u64) -> Vec<Pt> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Pt::new(
                    qr(rng.gen_range(0..extent * 64), 64),
                    qr(rng.gen_range(0..extent * 64), 64),
                )
            })
            .collect()
    }

    #[test]
    fn unit_disk_tree_validates() {
        let spec = unit_disk_spec();
        for (dd, rr) in [(2usize, 4usize), (4, 16)] {
            let p = random_pts(48, 24, 100 + dd as u64);
            let s = random_pts(48, 24, 200 + rr as u64);
            let cfg = BuildConfig {
                d: dd,
                r: rr,
                seed: 5,
                ..BuildConfig::default()
            };
            let (_, dec) = build_two_phase_tree(&p, &s, &spec, &cfg).unwrap();
            let m = incidence_matrix(&p, &s, &spec);
            let rep = validate_decomposition(&dec, &m).unwrap();
            assert!(rep.ok, "D={dd} r={rr}: {:?}", (rep.missing_edges.len(), rep.double_covered.len(), rep.covered_nonedges.len()));
        }
    }

    #[test]
    fn point_line_tree_validates() {
        let spec = point_line_spec();
        // left role: line parameters (m, q); right role: planar points
        let p = random_pts(40, 8, 31);
        let s = random_pts(40, 8, 32);
        let cfg = BuildConfig {
            seed: 2,
            ..BuildConfig::default()
        };
        let (_, dec) = build_two_phase_tree(&p, &s, &spec, &cfg).unwrap();
        let m = incidence_matrix(&p, &s, &spec);
        assert!(validate_decomposition(&dec, &m).unwrap().ok);
    }

    #[test]
    fn role_swap_also_validates() {
        let spec = unit_disk_spec();
        let p = random_pts(32, 16, 77);
        let s = random_pts(32, 16, 78);
        let cfg = BuildConfig::default();
        let (_, dec) = build_two_phase_tree(&s, &p, &spec, &cfg).unwrap();
        let m = incidence_matrix(&s, &p, &spec);
        assert!(validate_decomposition(&dec, &m).unwrap().ok);
    }

    #[test]
    fn dual_range_of_unit_disk_is_radius_two() {
        let spec = unit_disk_spec();
        let r = dual_range(&spec, &Pt::new(q(3), q(5)), 0).unwrap();
        match r.kind {
            RangeKind::Disk { center, r2, r } => {
                assert_eq!(center, Pt::new(q(3), q(5)));
                assert_eq!(r2, q(4));
                assert_eq!(r, Some(q(2)));
            }
            _ => panic!("expected a disk"),
        }
    }

    #[test]
    fn primal_range_of_point_line_is_halfplane() {
        let spec = point_line_spec();
        // s = (x, y) = (2, 3): {(m, q) : 3 - 2m - q >= 0}
        let r = primal_range(&spec, &Pt::new(q(2), q(3)), 0).unwrap();
        match r.kind {
            RangeKind::Halfplane { a, b, c } => {
                assert_eq!((a, b, c), (q(-2), q(-1), q(3)));
            }
            _ => panic!("expected a halfplane"),
        }
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = BuildConfig {
            r: 8,
            ..BuildConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(point_partition(&[], 4).is_err());
        assert!(point_partition(&random_pts(20, 10, 1), 8).is_err());
    }
}
