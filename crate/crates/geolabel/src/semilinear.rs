//! Semilinear predicates in strict-DNF form, their rank-based labelings,
//! and the dominance / boxicity schemes they reduce to.

use crate::bits::{ceil_log2, Bits};
use crate::error::{Error, Result};
use crate::labeling::{Label, LabelSet, SchemeDescriptor};
use crate::predicate::Poly;
use crate::rat::{de_vec, ser_vec, QSer, Q};
use num::Zero;
use serde::{Deserialize, Serialize};

/// A linear form c_1 z_1 + ... + c_m z_m + c_0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm {
    pub coeffs: Vec<Q>,
    pub constant: Q,
}

impl LinearForm {
    pub fn zero(arity: usize) -> Self {
        LinearForm {
            coeffs: vec![Q::zero(); arity],
            constant: Q::zero(),
        }
    }

    pub fn eval(&self, z: &[Q]) -> Q {
        assert_eq!(z.len(), self.coeffs.len(), "linear form arity mismatch");
        let mut acc = self.constant.clone();
        for (c, v) in self.coeffs.iter().zip(z) {
            acc += c * v;
        }
        acc
    }
}

/// One literal g(x) + h(y) < 0 of a DNF clause.
#[derive(Clone, Debug)]
pub struct Literal {
    pub g: LinearForm,
    pub h: LinearForm,
}

/// k clauses of l strict literals each; edge iff some clause holds
/// (in either argument order when `symmetric` is false).
#[derive(Clone, Debug)]
pub struct DnfPredicate {
    pub k: usize,
    pub l: usize,
    pub clauses: Vec<Vec<Literal>>,
    pub symmetric: bool,
}

impl DnfPredicate {
    pub fn validate(&self) -> Result<()> {
        if self.clauses.len() != self.k {
            return Err(Error::arg("clause count does not match k"));
        }
        for c in &self.clauses {
            if c.len() != self.l {
                return Err(Error::arg("literal count does not match l"));
            }
        }
        Ok(())
    }

    /// DNF(u, v): some clause has all literals strictly negative.
    pub fn holds(&self, u: &[Q], v: &[Q]) -> bool {
        self.clauses.iter().any(|clause| {
            clause
                .iter()
                .all(|lit| lit.g.eval(u) + lit.h.eval(v) < Q::zero())
        })
    }

    /// Undirected adjacency under the symmetry convention.
    pub fn adjacent(&self, u: &[Q], v: &[Q]) -> bool {
        if self.symmetric {
            self.holds(u, v)
        } else {
            self.holds(u, v) || self.holds(v, u)
        }
    }

    pub fn dim(&self) -> usize {
        self.clauses
            .first()
            .and_then(|c| c.first())
            .map(|l| l.g.coeffs.len())
            .unwrap_or(0)
    }
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Serialize, Deserialize)]
struct LiteralSer {
    g: Vec<QSer>,
    h: Vec<QSer>,
}

#[derive(Serialize, Deserialize)]
struct DnfSer {
    k: usize,
    l: usize,
    clauses: Vec<Vec<LiteralSer>>,
    symmetric: bool,
}

impl Serialize for DnfPredicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|lit| {
                        // constant rides as the last g coefficient slot? No:
                        // serialize as coeffs + trailing constant entry.
                        let mut g = lit.g.coeffs.clone();
                        g.push(lit.g.constant.clone());
                        let mut h = lit.h.coeffs.clone();
                        h.push(lit.h.constant.clone());
                        LiteralSer {
                            g: ser_vec(&g),
                            h: ser_vec(&h),
                        }
                    })
                    .collect()
            })
            .collect();
        DnfSer {
            k: self.k,
            l: self.l,
            clauses,
            symmetric: self.symmetric,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DnfPredicate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DnfSer::deserialize(d)?;
        let clauses = raw
            .clauses
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .map(|lit| {
                        let mut g = de_vec(lit.g);
                        let gc = g.pop().unwrap_or_else(Q::zero);
                        let mut h = de_vec(lit.h);
                        let hc = h.pop().unwrap_or_else(Q::zero);
                        Literal {
                            g: LinearForm {
                                coeffs: g,
                                constant: gc,
                            },
                            h: LinearForm {
                                coeffs: h,
                                constant: hc,
                            },
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(DnfPredicate {
            k: raw.k,
            l: raw.l,
            clauses,
            symmetric: raw.symmetric,
        })
    }
}

// ---------------------------------------------------------------------------
// split_linear

/// Splits a linear polynomial f(x, y) into (g, h) with g(x) + h(y) = f;
/// the constant term goes to g. Errors on monomials mixing x and y.
pub fn split_linear(f: &Poly, d_left: usize, d_right: usize) -> Result<(LinearForm, LinearForm)> {
    let mut g = LinearForm::zero(d_left);
    let mut h = LinearForm::zero(d_right);
    for (c, exps) in &f.terms {
        if exps.len() != d_left + d_right {
            return Err(Error::arg("exponent arity mismatch"));
        }
        let left_deg: u32 = exps[..d_left].iter().sum();
        let right_deg: u32 = exps[d_left..].iter().sum();
        if left_deg + right_deg > 1 {
            return Err(Error::NotSemilinear(format!(
                "term of degree {} (cross or higher-order)",
                left_deg + right_deg
            )));
        }
        if left_deg == 1 {
            let i = exps[..d_left].iter().position(|&e| e == 1).unwrap();
            g.coeffs[i] += c;
        } else if right_deg == 1 {
            let i = exps[d_left..].iter().position(|&e| e == 1).unwrap();
            h.coeffs[i] += c;
        } else {
            g.constant += c;
        }
    }
    Ok((g, h))
}

// ---------------------------------------------------------------------------
// Presets

/// Interval overlap: [a, b] and [c, d] intersect iff a < d and c < b.
pub fn preset_interval() -> DnfPredicate {
    // vertex = (a, b); literals: x1 - y2 < 0 and y1 - x2 < 0
    let lit = |gc: [i64; 2], hc: [i64; 2]| Literal {
        g: LinearForm {
            coeffs: vec![crate::rat::q(gc[0]), crate::rat::q(gc[1])],
            constant: Q::zero(),
        },
        h: LinearForm {
            coeffs: vec![crate::rat::q(hc[0]), crate::rat::q(hc[1])],
            constant: Q::zero(),
        },
    };
    DnfPredicate {
        k: 1,
        l: 2,
        clauses: vec![vec![lit([1, 0], [0, -1]), lit([0, -1], [1, 0])]],
        symmetric: true,
    }
}

/// Permutation graph: chords between two parallel lines cross iff the
/// endpoint orders disagree. Vertex = (p, q).
pub fn preset_permutation() -> DnfPredicate {
    let lit = |gc: [i64; 2], hc: [i64; 2]| Literal {
        g: LinearForm {
            coeffs: vec![crate::rat::q(gc[0]), crate::rat::q(gc[1])],
            constant: Q::zero(),
        },
        h: LinearForm {
            coeffs: vec![crate::rat::q(hc[0]), crate::rat::q(hc[1])],
            constant: Q::zero(),
        },
    };
    DnfPredicate {
        k: 2,
        l: 2,
        clauses: vec![
            // p_u < p_v and q_v < q_u
            vec![lit([1, 0], [-1, 0]), lit([0, -1], [0, 1])],
            // p_v < p_u and q_u < q_v
            vec![lit([-1, 0], [1, 0]), lit([0, 1], [0, -1])],
        ],
        symmetric: true,
    }
}

/// Boxicity-d overlap with strict comparisons. Vertex = (lo_1..lo_d, hi_1..hi_d).
pub fn preset_boxicity(d: usize) -> DnfPredicate {
    let mut clause = Vec::new();
    for axis in 0..d {
        for (gi, hi) in [(axis, d + axis), (d + axis, axis)] {
            // lo_u(axis) - hi_v(axis) < 0  /  -hi_u(axis) + lo_v(axis) < 0
            let mut g = LinearForm::zero(2 * d);
            let mut h = LinearForm::zero(2 * d);
            if gi < d {
                g.coeffs[gi] = crate::rat::q(1);
                h.coeffs[hi] = crate::rat::q(-1);
            } else {
                g.coeffs[gi] = crate::rat::q(-1);
                h.coeffs[hi] = crate::rat::q(1);
            }
            clause.push(Literal { g, h });
        }
    }
    let l = clause.len();
    DnfPredicate {
        k: 1,
        l,
        clauses: vec![clause],
        symmetric: true,
    }
}

/// Circle graph: chords with endpoint positions s < t on the circle cross
/// iff s_u < s_v < t_u < t_v (or the mirrored order). Vertex = (s, t).
pub fn preset_circle() -> DnfPredicate {
    let lit = |gc: [i64; 2], hc: [i64; 2]| Literal {
        g: LinearForm {
            coeffs: vec![crate::rat::q(gc[0]), crate::rat::q(gc[1])],
            constant: Q::zero(),
        },
        h: LinearForm {
            coeffs: vec![crate::rat::q(hc[0]), crate::rat::q(hc[1])],
            constant: Q::zero(),
        },
    };
    DnfPredicate {
        k: 1,
        l: 3,
        // s_u < s_v, s_v < t_u, t_u < t_v  (one order; the other comes from
        // the asymmetric-OR convention)
        clauses: vec![vec![
            lit([1, 0], [-1, 0]),
            lit([0, -1], [1, 0]),
            lit([0, 1], [0, -1]),
        ]],
        symmetric: false,
    }
}

pub fn preset_by_name(name: &str, dim: usize) -> Result<DnfPredicate> {
    match name {
        "interval" => Ok(preset_interval()),
        "permutation" => Ok(preset_permutation()),
        "boxicity" => Ok(preset_boxicity(dim)),
        "circle" => Ok(preset_circle()),
        other => Err(Error::arg(format!("unknown DNF preset '{other}'"))),
    }
}

// ---------------------------------------------------------------------------
// Rank machinery

/// Dense position of each derived value on one axis, with the strict tie
/// rule: at equal values the h-side (role 0) ranks before the g-side
/// (role 1), so that g < -h decodes false on ties.
/// Items are (value, role, vertex). Returns positions in [0, len).
fn rank_positions(items: &mut Vec<(Q, u8, usize)>) -> Vec<(usize, u8, u64)> {
    items.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    items
        .iter()
        .enumerate()
        .map(|(pos, (_, role, vertex))| (*vertex, *role, pos as u64))
        .collect()
}

/// Bipartite dominance labels (Lemma-comp style): per vertex a side bit and
/// one rank per axis; edge iff sides differ and every left rank is strictly
/// below the right rank.
pub fn dominance_labels(left_pts: &[Vec<Q>], right_pts: &[Vec<Q>], l: usize) -> Result<LabelSet> {
    for p in left_pts.iter().chain(right_pts) {
        if p.len() != l {
            return Err(Error::arg("point dimension mismatch"));
        }
    }
    let n = left_pts.len() + right_pts.len();
    let rank_bits = ceil_log2(2 * n.max(1));
    let id_bits = ceil_log2(n.max(2));
    // ranks per axis over all n values; left values play the g role
    // (strict-false on ties), right values the h role.
    let mut ranks = vec![vec![0u64; n]; l];
    for axis in 0..l {
        let mut items: Vec<(Q, u8, usize)> = Vec::with_capacity(n);
        for (i, p) in left_pts.iter().enumerate() {
            items.push((p[axis].clone(), 1, i));
        }
        for (j, p) in right_pts.iter().enumerate() {
            items.push((p[axis].clone(), 0, left_pts.len() + j));
        }
        for (vertex, _, pos) in rank_positions(&mut items) {
            ranks[axis][vertex] = pos;
        }
    }
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        let mut b = Bits::new();
        b.push_uint(v as u64, id_bits);
        b.push(v >= left_pts.len()); // side bit: 1 = right
        for axis in 0..l {
            b.push_uint(ranks[axis][v], rank_bits);
        }
        labels.push(Label { bits: b });
    }
    Ok(LabelSet::new(
        SchemeDescriptor::Dominance {
            n,
            l,
            rank_bits,
            id_bits,
        },
        labels,
    ))
}

/// Semilinear labels: per clause and axis, the g-rank and h-rank of the
/// vertex's derived values among all 2n derived values of that axis.
pub fn semilinear_labels(vertices: &[Vec<Q>], dnf: &DnfPredicate) -> Result<LabelSet> {
    dnf.validate()?;
    let n = vertices.len();
    let dim = dnf.dim();
    for p in vertices {
        if p.len() != dim {
            return Err(Error::arg("vertex dimension mismatch"));
        }
    }
    let rank_bits = ceil_log2(2 * n.max(1));
    let id_bits = ceil_log2(n.max(2));
    // axis (i, j): values g_{i,j}(v) with role g, and -h_{i,j}(v) with role h.
    let mut g_ranks = vec![vec![0u64; n]; dnf.k * dnf.l];
    let mut h_ranks = vec![vec![0u64; n]; dnf.k * dnf.l];
    for i in 0..dnf.k {
        for j in 0..dnf.l {
            let lit = &dnf.clauses[i][j];
            let axis = i * dnf.l + j;
            let mut items: Vec<(Q, u8, usize)> = Vec::with_capacity(2 * n);
            for (v, p) in vertices.iter().enumerate() {
                items.push((lit.g.eval(p), 1, v));
                items.push((-lit.h.eval(p), 0, v));
            }
            items.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            for (pos, (_, role, v)) in items.iter().enumerate() {
                if *role == 1 {
                    g_ranks[axis][*v] = pos as u64;
                } else {
                    h_ranks[axis][*v] = pos as u64;
                }
            }
        }
    }
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        let mut b = Bits::new();
        b.push_uint(v as u64, id_bits);
        for axis in 0..dnf.k * dnf.l {
            b.push_uint(g_ranks[axis][v], rank_bits);
            b.push_uint(h_ranks[axis][v], rank_bits);
        }
        labels.push(Label { bits: b });
    }
    Ok(LabelSet::new(
        SchemeDescriptor::Semilinear {
            n,
            k: dnf.k,
            l: dnf.l,
            rank_bits,
            id_bits,
            symmetric: dnf.symmetric,
        },
        labels,
    ))
}

/// Boxicity labels: per axis the ranks of the low and high corners among
/// all 2n endpoints of that axis; intersection via rank comparisons.
pub fn boxicity_labels(boxes: &[Vec<(Q, Q)>]) -> Result<LabelSet> {
    let n = boxes.len();
    let d = boxes.first().map(|b| b.len()).unwrap_or(0);
    for b in boxes {
        if b.len() != d {
            return Err(Error::arg("box dimension mismatch"));
        }
        for (lo, hi) in b {
            if lo >= hi {
                return Err(Error::arg("degenerate box (min >= max)"));
            }
        }
    }
    let rank_bits = ceil_log2(2 * n.max(1));
    let id_bits = ceil_log2(n.max(2));
    let mut lo_ranks = vec![vec![0u64; n]; d];
    let mut hi_ranks = vec![vec![0u64; n]; d];
    for axis in 0..d {
        // ties broken low-before-high, then by id
        let mut items: Vec<(Q, u8, usize)> = Vec::with_capacity(2 * n);
        for (v, b) in boxes.iter().enumerate() {
            items.push((b[axis].0.clone(), 0, v));
            items.push((b[axis].1.clone(), 1, v));
        }
        items.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (pos, (_, role, v)) in items.iter().enumerate() {
            if *role == 0 {
                lo_ranks[axis][*v] = pos as u64;
            } else {
                hi_ranks[axis][*v] = pos as u64;
            }
        }
    }
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        let mut b = Bits::new();
        b.push_uint(v as u64, id_bits);
        for axis in 0..d {
            b.push_uint(lo_ranks[axis][v], rank_bits);
            b.push_uint(hi_ranks[axis][v], rank_bits);
        }
        labels.push(Label { bits: b });
    }
    Ok(LabelSet::new(
        SchemeDescriptor::Boxicity {
            n,
            d,
            rank_bits,
            id_bits,
        },
        labels,
    ))
}
