//! Semialgebraic predicate specifications: t polynomials in the coordinates
//! of two points, combined by a boolean expression over their sign atoms.

use crate::error::{Error, Result};
use crate::rat::{sign, Q};
use num::Zero;
use serde::{Deserialize, Serialize};

/// A polynomial as a coefficient table over monomials in the variables
/// (x_1..x_dL, y_1..y_dR). Each entry is (coefficient, exponent vector).
#[derive(Clone, Debug)]
pub struct Poly {
    pub terms: Vec<(Q, Vec<u32>)>,
}

impl Poly {
    pub fn eval(&self, u: &[Q], v: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (c, exps) in &self.terms {
            let mut term = c.clone();
            for (k, &e) in exps.iter().enumerate() {
                let var = if k < u.len() { &u[k] } else { &v[k - u.len()] };
                for _ in 0..e {
                    term *= var;
                }
            }
            acc += term;
        }
        acc
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(_, e)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomKind {
    Lt, // f_i < 0
    Eq, // f_i = 0
    Le, // f_i <= 0
}

/// Boolean expression over the 3t sign atoms of the polynomials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Phi {
    Const(bool),
    /// `poly` is a 1-based polynomial index.
    Atom { poly: usize, kind: AtomKind },
    Not(Box<Phi>),
    And(Vec<Phi>),
    Or(Vec<Phi>),
}

impl Phi {
    pub fn eval(&self, signs: &[i32]) -> bool {
        match self {
            Phi::Const(b) => *b,
            Phi::Atom { poly, kind } => {
                let s = signs[*poly - 1];
                match kind {
                    AtomKind::Lt => s < 0,
                    AtomKind::Eq => s == 0,
                    AtomKind::Le => s <= 0,
                }
            }
            Phi::Not(p) => !p.eval(signs),
            Phi::And(ps) => ps.iter().all(|p| p.eval(signs)),
            Phi::Or(ps) => ps.iter().any(|p| p.eval(signs)),
        }
    }

    pub fn max_atom(&self) -> usize {
        match self {
            Phi::Const(_) => 0,
            Phi::Atom { poly, .. } => *poly,
            Phi::Not(p) => p.max_atom(),
            Phi::And(ps) | Phi::Or(ps) => ps.iter().map(|p| p.max_atom()).max().unwrap_or(0),
        }
    }

    /// f_i >= 0
    pub fn ge(poly: usize) -> Phi {
        Phi::Not(Box::new(Phi::Atom {
            poly,
            kind: AtomKind::Lt,
        }))
    }

    /// f_i > 0
    pub fn gt(poly: usize) -> Phi {
        Phi::Not(Box::new(Phi::Atom {
            poly,
            kind: AtomKind::Le,
        }))
    }

    pub fn lt(poly: usize) -> Phi {
        Phi::Atom {
            poly,
            kind: AtomKind::Lt,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PredicateSpec {
    pub t: usize,
    pub polys: Vec<Poly>,
    pub phi: Phi,
    pub d_left: usize,
    pub d_right: usize,
}

impl PredicateSpec {
    pub fn validate(&self) -> Result<()> {
        if self.polys.len() != self.t {
            return Err(Error::arg("polynomial count does not match t"));
        }
        for p in &self.polys {
            if p.total_degree() as usize > self.t {
                return Err(Error::arg("polynomial degree exceeds t"));
            }
            for (_, e) in &p.terms {
                if e.len() != self.d_left + self.d_right {
                    return Err(Error::arg("exponent vector has wrong arity"));
                }
            }
        }
        if self.phi.max_atom() > self.t {
            return Err(Error::arg("phi references an atom index beyond t"));
        }
        Ok(())
    }

    /// Exact sign of f_i(u, v); `i` is 1-based.
    pub fn eval_sign(&self, i: usize, u: &[Q], v: &[Q]) -> Result<i32> {
        if i < 1 || i > self.t {
            return Err(Error::arg(format!("polynomial index {i} out of [1, t]")));
        }
        if u.len() != self.d_left || v.len() != self.d_right {
            return Err(Error::arg("point dimension mismatch"));
        }
        Ok(sign(&self.polys[i - 1].eval(u, v)))
    }

    /// Truth value of the full predicate on (u, v).
    pub fn eval(&self, u: &[Q], v: &[Q]) -> Result<bool> {
        let mut signs = Vec::with_capacity(self.t);
        for i in 1..=self.t {
            signs.push(self.eval_sign(i, u, v)?);
        }
        Ok(self.phi.eval(&signs))
    }
}

fn exps(pairs: &[(usize, u32)], arity: usize) -> Vec<u32> {
    let mut e = vec![0u32; arity];
    for &(i, k) in pairs {
        e[i] = k;
    }
    e
}

/// f(p, s) = 4 - (p1 - s1)^2 - (p2 - s2)^2; adjacency is f >= 0.
pub fn unit_disk_spec() -> PredicateSpec {
    use crate::rat::q;
    let a = 4; // arity
    let terms = vec![
        (q(4), exps(&[], a)),
        (q(-1), exps(&[(0, 2)], a)),
        (q(2), exps(&[(0, 1), (2, 1)], a)),
        (q(-1), exps(&[(2, 2)], a)),
        (q(-1), exps(&[(1, 2)], a)),
        (q(2), exps(&[(1, 1), (3, 1)], a)),
        (q(-1), exps(&[(3, 2)], a)),
    ];
    PredicateSpec {
        t: 2,
        polys: vec![
            Poly { terms },
            Poly {
                terms: vec![(q(0), exps(&[], a))],
            },
        ],
        phi: Phi::ge(1),
        d_left: 2,
        d_right: 2,
    }
}

/// Orientation polynomial orient(a, b, c) expanded over the 6 coordinates
/// given by index triples (ax, ay, bx, by, cx, cy) into an arity-`arity`
/// exponent space.
fn orient_poly(ix: [usize; 6], arity: usize) -> Poly {
    use crate::rat::q;
    let [ax, ay, bx, by, cx, cy] = ix;
    // (bx-ax)(cy-ay) - (by-ay)(cx-ax)
    let mut terms: Vec<(Q, Vec<u32>)> = Vec::new();
    let mut add = |c: i64, vars: &[usize]| {
        let pairs: Vec<(usize, u32)> = {
            let mut m = std::collections::BTreeMap::new();
            for &v in vars {
                *m.entry(v).or_insert(0u32) += 1;
            }
            m.into_iter().collect()
        };
        terms.push((q(c), exps(&pairs, arity)));
    };
    add(1, &[bx, cy]);
    add(-1, &[bx, ay]);
    add(-1, &[ax, cy]);
    add(1, &[ax, ay]);
    add(-1, &[by, cx]);
    add(1, &[by, ax]);
    add(1, &[ay, cx]);
    add(-1, &[ay, ax]);
    Poly { terms }
}

/// Segment intersection as a boolean combination of four orientation
/// polynomials over the 8 coordinates of two segments (left segment
/// endpoints a=(x0,x1), b=(x2,x3); right segment endpoints c, d).
/// Adjacency = proper crossing: opposite orientations on both segments.
pub fn segment_intersection_spec() -> PredicateSpec {
    let a = 8;
    // left vars 0..4 = (ax, ay, bx, by); right vars 4..8 = (cx, cy, dx, dy)
    let f1 = orient_poly([0, 1, 2, 3, 4, 5], a); // orient(a, b, c)
    let f2 = orient_poly([0, 1, 2, 3, 6, 7], a); // orient(a, b, d)
    let f3 = orient_poly([4, 5, 6, 7, 0, 1], a); // orient(c, d, a)
    let f4 = orient_poly([4, 5, 6, 7, 2, 3], a); // orient(c, d, b)
    let opposite = |i: usize, j: usize| {
        Phi::Or(vec![
            Phi::And(vec![Phi::lt(i), Phi::gt(j)]),
            Phi::And(vec![Phi::gt(i), Phi::lt(j)]),
        ])
    };
    PredicateSpec {
        t: 4,
        polys: vec![f1, f2, f3, f4],
        phi: Phi::And(vec![opposite(1, 2), opposite(3, 4)]),
        d_left: 4,
        d_right: 4,
    }
}

/// f(p, l) = l1*p1 + l2*p2 + l3 with the halfplane given by coefficients
/// (l1, l2, l3); adjacency is f >= 0.
pub fn point_halfplane_spec() -> PredicateSpec {
    use crate::rat::q;
    let a = 5;
    let terms = vec![
        (q(1), exps(&[(0, 1), (2, 1)], a)),
        (q(1), exps(&[(1, 1), (3, 1)], a)),
        (q(1), exps(&[(4, 1)], a)),
    ];
    PredicateSpec {
        t: 2,
        polys: vec![
            Poly { terms },
            Poly {
                terms: vec![(q(0), exps(&[], a))],
            },
        ],
        phi: Phi::ge(1),
        d_left: 2,
        d_right: 3,
    }
}

/// f((m, q), (x, y)) = y - m x - q over line parameters (left role) and a
/// planar point (right role); adjacency is f >= 0 (point on or above the
/// line). Padded to t = 2 so the degree-2 cross term m*x is admissible.
pub fn point_line_spec() -> PredicateSpec {
    use crate::rat::q;
    let a = 4; // vars: 0 = m, 1 = q, 2 = x, 3 = y
    let terms = vec![
        (q(1), exps(&[(3, 1)], a)),
        (q(-1), exps(&[(0, 1), (2, 1)], a)),
        (q(-1), exps(&[(1, 1)], a)),
    ];
    PredicateSpec {
        t: 2,
        polys: vec![
            Poly { terms },
            Poly {
                terms: vec![(q(0), exps(&[], a))],
            },
        ],
        phi: Phi::ge(1),
        d_left: 2,
        d_right: 2,
    }
}
