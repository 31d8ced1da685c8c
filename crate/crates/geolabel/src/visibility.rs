//! Visibility-style labelings: hereditary segment trees for bichromatic
//! segment crossings, capped graphs via recursive cross realizations, and
//! simple-polygon visibility through balanced chord decompositions.

use crate::bits::{ceil_log2, width_for, Bits};
use crate::error::{Error, Result};
use crate::geom::{
    line_y_at, midpoint, orient, point_in_polygon, polygon_is_ccw, polygon_is_simple,
    segments_cross_properly, segments_intersect, Loc,
};
use crate::instance::polygon_visible;
use crate::labeling::{switch_encode, Label, LabelSet, SchemeDescriptor};
use crate::matrix::AdjacencyMatrix;
use crate::rat::{Pt, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;

// ---------------------------------------------------------------------------
// Bichromatic segments and the hereditary segment tree

/// Red and blue segment sets; vertices 0..red.len() are red, the rest blue.
/// Valid inputs have pairwise distinct endpoint abscissas and no two
/// same-color segments meeting in their relative interiors.
#[derive(Clone, Debug)]
pub struct BichromaticSegments {
    pub red: Vec<(Pt, Pt)>,
    pub blue: Vec<(Pt, Pt)>,
}

impl BichromaticSegments {
    pub fn n(&self) -> usize {
        self.red.len() + self.blue.len()
    }

    pub fn is_blue(&self, v: usize) -> bool {
        v >= self.red.len()
    }

    pub fn segment(&self, v: usize) -> &(Pt, Pt) {
        if v < self.red.len() {
            &self.red[v]
        } else {
            &self.blue[v - self.red.len()]
        }
    }

    pub fn from_instance(inst: &crate::instance::Instance) -> Result<BichromaticSegments> {
        match &inst.payload {
            crate::instance::Payload::Bichromatic { red, blue } => Ok(BichromaticSegments {
                red: red.clone(),
                blue: blue.clone(),
            }),
            _ => Err(Error::arg("instance is not a bichromatic segment set")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::arg("empty segment set"));
        }
        let mut xs: Vec<&Q> = Vec::with_capacity(2 * n);
        for v in 0..n {
            let (a, b) = self.segment(v);
            xs.push(&a.x);
            xs.push(&b.x);
        }
        let mut sorted = xs.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("endpoint abscissas are not pairwise distinct"));
        }
        for color in [&self.red, &self.blue] {
            for i in 0..color.len() {
                for j in i + 1..color.len() {
                    let (a, b) = (&color[i].0, &color[i].1);
                    let (c, d) = (&color[j].0, &color[j].1);
                    if segments_cross_properly(a, b, c, d) {
                        return Err(Error::arg("same-color segments cross"));
                    }
                    // collinear overlap also meets in relative interiors
                    if orient(a, b, c) == 0
                        && orient(a, b, d) == 0
                        && segments_intersect(a, b, c, d)
                    {
                        return Err(Error::arg("same-color segments overlap"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One stored segment at a tree node. Long entries carry (own rank among
/// same-color longs, other-color longs strictly below at the left wall, same
/// at the right wall); short entries carry the other-color longs strictly
/// below each endpoint clipped to the slab (third slot unused).
#[derive(Clone, Debug)]
pub struct HstStored {
    pub seg: usize,
    pub long: bool,
    pub ranks: [u64; 3],
}

/// A tree node with a bounded slab; unbounded slabs store nothing because no
/// bounded segment can span them.
#[derive(Clone, Debug)]
pub struct HstNode {
    pub id: usize,
    pub xlo: Q,
    pub xhi: Q,
    pub stored: Vec<HstStored>,
}

#[derive(Clone, Debug)]
pub struct HstStructure {
    pub n: usize,
    /// node id space size
    pub node_count: usize,
    pub nodes: Vec<HstNode>,
}

struct SegX {
    a: Pt, // a.x < b.x
    b: Pt,
    blue: bool,
}

fn seg_y_at(s: &SegX, x: &Q) -> Q {
    line_y_at(&s.a, &s.b, x)
}

/// Builds the hereditary segment tree: a balanced tree over the 2n + 1
/// elementary gaps between the sorted endpoint abscissas, so every abscissa
/// has a full root-to-leaf slab path.
pub fn build_hst(segs: &BichromaticSegments) -> Result<HstStructure> {
    segs.validate()?;
    let n = segs.n();
    let infos: Vec<SegX> = (0..n)
        .map(|v| {
            let (p, q) = segs.segment(v);
            let (a, b) = if p.x < q.x { (p, q) } else { (q, p) };
            SegX {
                a: a.clone(),
                b: b.clone(),
                blue: segs.is_blue(v),
            }
        })
        .collect();
    let mut keys: Vec<Q> = infos
        .iter()
        .flat_map(|s| [s.a.x.clone(), s.b.x.clone()])
        .collect();
    keys.sort();
    let gap_count = keys.len() + 1;

    // collect bounded-slab nodes with their parent slabs; a node over gap
    // range [a, b) owns the open slab (key[a-1], key[b-1]) with infinite
    // sentinels at the outer ends
    struct RawNode {
        id: usize,
        xlo: Q,
        xhi: Q,
        plo: Option<Q>,
        phi: Option<Q>,
    }
    let slab_of = |a: usize, b: usize| -> (Option<Q>, Option<Q>) {
        let lo = if a == 0 { None } else { Some(keys[a - 1].clone()) };
        let hi = if b > keys.len() {
            None
        } else {
            Some(keys[b - 1].clone())
        };
        (lo, hi)
    };
    let mut raw: Vec<RawNode> = Vec::new();
    let mut node_count = 0usize;
    let mut stack: Vec<(usize, usize, Option<Q>, Option<Q>)> = vec![(0, gap_count, None, None)];
    while let Some((a, b, plo, phi)) = stack.pop() {
        let id = node_count;
        node_count += 1;
        let (blo, bhi) = slab_of(a, b);
        if let (Some(l), Some(h)) = (&blo, &bhi) {
            raw.push(RawNode {
                id,
                xlo: l.clone(),
                xhi: h.clone(),
                plo: plo.clone(),
                phi: phi.clone(),
            });
        }
        if b - a >= 2 {
            let mid = a + (b - a) / 2;
            stack.push((a, mid, blo.clone(), bhi.clone()));
            stack.push((mid, b, blo, bhi));
        }
    }

    let strictly_inside = |x: &Q, lo: &Option<Q>, hi: &Option<Q>| -> bool {
        lo.as_ref().map_or(true, |l| l < x) && hi.as_ref().map_or(true, |h| x < h)
    };

    let mut nodes = Vec::with_capacity(raw.len());
    for rn in raw {
        let (xlo, xhi) = (&rn.xlo, &rn.xhi);
        let mut shorts: Vec<usize> = Vec::new();
        let mut longs: Vec<usize> = Vec::new();
        for (v, s) in infos.iter().enumerate() {
            let short = (xlo < &s.a.x && &s.a.x < xhi) || (xlo < &s.b.x && &s.b.x < xhi);
            if short {
                shorts.push(v);
            } else if &s.a.x <= xlo && xhi <= &s.b.x {
                // long iff the parent slab still strictly contains an endpoint
                let parent_has = strictly_inside(&s.a.x, &rn.plo, &rn.phi)
                    || strictly_inside(&s.b.x, &rn.plo, &rn.phi);
                if parent_has {
                    longs.push(v);
                }
            }
        }
        if shorts.is_empty() && longs.is_empty() {
            continue;
        }
        // vertical order of the longs per color at the slab midpoint
        let xm = (xlo + xhi) / crate::rat::q(2);
        let mut ordered: Vec<(usize, Q)> = longs
            .iter()
            .map(|&v| (v, seg_y_at(&infos[v], &xm)))
            .collect();
        ordered.sort_by(|a, b| a.1.cmp(&b.1));
        for w in ordered.windows(2) {
            if w[0].1 == w[1].1 && infos[w[0].0].blue == infos[w[1].0].blue {
                return Err(Error::arg("same-color long segments meet inside a slab"));
            }
        }
        let mut rank_of: HashMap<usize, u64> = HashMap::new();
        let mut next = [0u64; 2];
        for (v, _) in &ordered {
            let c = infos[*v].blue as usize;
            rank_of.insert(*v, next[c]);
            next[c] += 1;
        }
        let rho = |x: &Q, y: &Q, other_blue: bool| -> u64 {
            longs
                .iter()
                .filter(|&&v| infos[v].blue == other_blue && seg_y_at(&infos[v], x) < *y)
                .count() as u64
        };
        let mut stored = Vec::with_capacity(shorts.len() + longs.len());
        for &v in &longs {
            let s = &infos[v];
            let other = !s.blue;
            let yl = seg_y_at(s, xlo);
            let yh = seg_y_at(s, xhi);
            stored.push(HstStored {
                seg: v,
                long: true,
                ranks: [rank_of[&v], rho(xlo, &yl, other), rho(xhi, &yh, other)],
            });
        }
        for &v in &shorts {
            let s = &infos[v];
            let other = !s.blue;
            let clip = |p: &Pt| -> (Q, Q) {
                if &p.x < xlo {
                    (xlo.clone(), seg_y_at(s, xlo))
                } else if &p.x > xhi {
                    (xhi.clone(), seg_y_at(s, xhi))
                } else {
                    (p.x.clone(), p.y.clone())
                }
            };
            let (xa, ya) = clip(&s.a);
            let (xb, yb) = clip(&s.b);
            stored.push(HstStored {
                seg: v,
                long: false,
                ranks: [rho(&xa, &ya, other), rho(&xb, &yb, other), 0],
            });
        }
        nodes.push(HstNode {
            id: rn.id,
            xlo: rn.xlo,
            xhi: rn.xhi,
            stored,
        });
    }
    Ok(HstStructure {
        n,
        node_count,
        nodes,
    })
}

/// Labels from the hereditary segment tree; per-segment node lists are
/// guaranteed not to exceed 4 ceil(log2(2n)) entries.
pub fn hst_labels(segs: &BichromaticSegments) -> Result<LabelSet> {
    let st = build_hst(segs)?;
    let n = st.n;
    let id_bits = width_for(n);
    let node_bits = width_for(st.node_count);
    let rank_bits = width_for(n + 1);
    let mut per_seg: Vec<Vec<(usize, &HstStored)>> = vec![Vec::new(); n];
    for node in &st.nodes {
        for e in &node.stored {
            per_seg[e.seg].push((node.id, e));
        }
    }
    let bound = 4 * ceil_log2(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (v, entries) in per_seg.iter_mut().enumerate() {
        entries.sort_by_key(|(id, _)| *id);
        assert!(
            entries.len() <= bound,
            "segment {v} stored at {} nodes, bound {bound}",
            entries.len()
        );
        let mut bits = Bits::new();
        bits.push_uint(v as u64, id_bits);
        bits.push(segs.is_blue(v));
        bits.push_gamma(entries.len() as u64 + 1);
        for (id, e) in entries.iter() {
            bits.push_uint(*id as u64, node_bits);
            bits.push(e.long);
            let cnt = if e.long { 3 } else { 2 };
            for r in e.ranks.iter().take(cnt) {
                bits.push_uint(*r, rank_bits);
            }
        }
        labels.push(Label { bits });
    }
    Ok(LabelSet::new(
        SchemeDescriptor::Hst {
            n,
            id_bits,
            node_bits,
            rank_bits,
        },
        labels,
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct HstObsReport {
    pub max_nodes_per_segment: usize,
    pub node_bound: usize,
    /// every segment stored at no more nodes than the bound
    pub obs1_ok: bool,
    /// every crossing red-blue pair shares a node where at least one is
    /// long; the wall ranks settle the case where both are
    pub obs2_ok: bool,
}

/// Checks the two structural observations behind the scheme on a concrete
/// instance.
pub fn hst_observation_report(segs: &BichromaticSegments) -> Result<HstObsReport> {
    let st = build_hst(segs)?;
    let n = st.n;
    let mut counts = vec![0usize; n];
    // per crossing pair, whether some common node has exactly one long
    let mut one_long: HashMap<(usize, usize), bool> = HashMap::new();
    for r in 0..segs.red.len() {
        for b in segs.red.len()..n {
            let (p, q) = segs.segment(r);
            let (s, t) = segs.segment(b);
            if segments_intersect(p, q, s, t) {
                one_long.insert((r, b), false);
            }
        }
    }
    for node in &st.nodes {
        for e in &node.stored {
            counts[e.seg] += 1;
        }
        for i in 0..node.stored.len() {
            for j in i + 1..node.stored.len() {
                let (a, b) = (&node.stored[i], &node.stored[j]);
                if !a.long && !b.long {
                    continue;
                }
                let key = if a.seg < b.seg {
                    (a.seg, b.seg)
                } else {
                    (b.seg, a.seg)
                };
                if let Some(flag) = one_long.get_mut(&key) {
                    *flag = true;
                }
            }
        }
    }
    let bound = 4 * ceil_log2(2 * n);
    let max = counts.iter().copied().max().unwrap_or(0);
    Ok(HstObsReport {
        max_nodes_per_segment: max,
        node_bound: bound,
        obs1_ok: max <= bound,
        obs2_ok: one_long.values().all(|&v| v),
    })
}

// ---------------------------------------------------------------------------
// Capped graphs

fn check_order(order: &[usize], n: usize, full: bool) -> Result<()> {
    if full && order.len() != n {
        return Err(Error::arg("order length mismatch"));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::arg("order is not a sequence of distinct vertices"));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Searches for a violation of the capped condition: positions i<j<k<l with
/// edges (i,k) and (j,l) but no edge (i,l). Exhaustive up to 128 vertices,
/// sampled (10^6 tuples, fixed seed) above. Returns the witness vertex ids.
pub fn capped_check(
    m: &AdjacencyMatrix,
    order: &[usize],
) -> Result<Option<(usize, usize, usize, usize)>> {
    m.validate()?;
    check_order(order, m.n, true)?;
    let n = m.n;
    if n <= 128 {
        for pi in 0..n {
            for pl in pi + 3..n {
                if m.get(order[pi], order[pl]) {
                    continue;
                }
                let min_j = (pi + 1..pl).find(|&j| m.get(order[j], order[pl]));
                let max_k = (pi + 1..pl).rev().find(|&k| m.get(order[pi], order[k]));
                if let (Some(j), Some(k)) = (min_j, max_k) {
                    if j < k {
                        return Ok(Some((order[pi], order[j], order[k], order[pl])));
                    }
                }
            }
        }
        return Ok(None);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(0x6361_7070_6564);
    for _ in 0..1_000_000 {
        let mut t = [0usize; 4];
        for slot in t.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        t.sort_unstable();
        if t[0] == t[1] || t[1] == t[2] || t[2] == t[3] {
            continue;
        }
        let [i, j, k, l] = t;
        if m.get(order[i], order[k]) && m.get(order[j], order[l]) && !m.get(order[i], order[l]) {
            return Ok(Some((order[i], order[j], order[k], order[l])));
        }
    }
    Ok(None)
}

/// Dominance realization of the cross edges at a split: left position i
/// stores its least cross-neighbor position, right position j its greatest.
#[derive(Clone, Debug)]
pub struct CrossRealization {
    pub split: usize,
    /// per left position, min cross-neighbor position (relative to `order`)
    pub min_n: Vec<Option<usize>>,
    /// per right position, max cross-neighbor position
    pub max_n: Vec<Option<usize>>,
}

/// Computes the cross realization for the split `order[..l] | order[l..]` and
/// verifies it reproduces every cross edge exactly; a mismatch means the
/// matrix is not capped across this split.
pub fn capped_cross_realization(
    m: &AdjacencyMatrix,
    order: &[usize],
    l: usize,
) -> Result<CrossRealization> {
    check_order(order, m.n, false)?;
    let len = order.len();
    if l == 0 || l >= len {
        return Err(Error::arg("split must leave both sides nonempty"));
    }
    let min_n: Vec<Option<usize>> = (0..l)
        .map(|i| (l..len).find(|&j| m.get(order[i], order[j])))
        .collect();
    let max_n: Vec<Option<usize>> = (l..len)
        .map(|j| (0..l).rev().find(|&i| m.get(order[i], order[j])))
        .collect();
    for i in 0..l {
        for j in l..len {
            let edge = m.get(order[i], order[j]);
            let decoded = match (min_n[i], max_n[j - l]) {
                (Some(mn), Some(mx)) => mn <= j && i <= mx,
                _ => false,
            };
            if edge != decoded {
                return Err(Error::Realization(format!(
                    "cross edge ({}, {}) not reproduced by the realization",
                    order[i], order[j]
                )));
            }
        }
    }
    Ok(CrossRealization { split: l, min_n, max_n })
}

/// Labels for a capped graph: the vertex position plus, per halving level of
/// its position interval, the verified cross-realization value.
pub fn capped_labels(m: &AdjacencyMatrix, order: &[usize]) -> Result<LabelSet> {
    m.validate()?;
    check_order(order, m.n, true)?;
    let n = m.n;
    let mut pos_of = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos_of[v] = p;
    }
    let mut values: Vec<Vec<Option<usize>>> = vec![Vec::new(); n];
    let mut stack = vec![(0usize, n)];
    while let Some((lo, hi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let mid = lo + (hi - lo) / 2;
        let cr = capped_cross_realization(m, &order[lo..hi], mid - lo)?;
        for p in lo..mid {
            values[order[p]].push(cr.min_n[p - lo].map(|j| j + lo));
        }
        for p in mid..hi {
            values[order[p]].push(cr.max_n[p - mid].map(|i| i + lo));
        }
        // deeper levels must be appended after this one, left side first
        stack.push((mid, hi));
        stack.push((lo, mid));
    }
    let id_bits = width_for(n);
    let val_bits = width_for(n);
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        debug_assert_eq!(
            values[v].len(),
            crate::labeling::capped_path_len(n, pos_of[v])
        );
        let mut bits = Bits::new();
        bits.push_uint(pos_of[v] as u64, id_bits);
        for val in &values[v] {
            bits.push(val.is_some());
            bits.push_uint(val.unwrap_or(0) as u64, val_bits);
        }
        labels.push(Label { bits });
    }
    Ok(LabelSet::new(
        SchemeDescriptor::Capped {
            n,
            id_bits,
            val_bits,
        },
        labels,
    ))
}

// ---------------------------------------------------------------------------
// Balanced chords and polygon visibility labels

fn between_collinear(a: &Pt, b: &Pt, p: &Pt) -> bool {
    let (xlo, xhi) = if a.x <= b.x { (&a.x, &b.x) } else { (&b.x, &a.x) };
    let (ylo, yhi) = if a.y <= b.y { (&a.y, &b.y) } else { (&b.y, &a.y) };
    xlo <= &p.x && &p.x <= xhi && ylo <= &p.y && &p.y <= yhi
}

fn is_diagonal(poly: &[Pt], i: usize, j: usize) -> bool {
    let n = poly.len();
    let (a, b) = (&poly[i], &poly[j]);
    for k in 0..n {
        if k == i || k == j {
            continue;
        }
        if orient(a, b, &poly[k]) == 0 && between_collinear(a, b, &poly[k]) {
            return false;
        }
    }
    for k in 0..n {
        let k2 = (k + 1) % n;
        if k == i || k == j || k2 == i || k2 == j {
            continue;
        }
        if segments_intersect(a, b, &poly[k], &poly[k2]) {
            return false;
        }
    }
    point_in_polygon(poly, &midpoint(a, b)) == Loc::Inside
}

fn tri_contains(a: &Pt, b: &Pt, c: &Pt, p: &Pt) -> bool {
    orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0
}

/// Ear-clipping triangulation; triangles are index triples in CCW order.
fn triangulate_ears(poly: &[Pt]) -> Option<Vec<[usize; 3]>> {
    let n = poly.len();
    let mut idx: Vec<usize> = if polygon_is_ccw(poly) {
        (0..n).collect()
    } else {
        (0..n).rev().collect()
    };
    let mut tris = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            if orient(&poly[ia], &poly[ib], &poly[ic]) <= 0 {
                continue;
            }
            let blocked = idx.iter().any(|&o| {
                o != ia && o != ib && o != ic
                    && tri_contains(&poly[ia], &poly[ib], &poly[ic], &poly[o])
            });
            if !blocked {
                tris.push([ia, ib, ic]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return None;
        }
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Some(tris)
}

fn chord_parts(n: usize, i: usize, j: usize) -> (usize, usize) {
    let inner = j - i + 1;
    (inner, n - (j - i) + 1)
}

fn centroid_chord(poly: &[Pt]) -> Option<(usize, usize)> {
    let n = poly.len();
    let tris = triangulate_ears(poly)?;
    let t = tris.len();
    // dual tree: triangles adjacent when they share a diagonal
    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (ti, tri) in tris.iter().enumerate() {
        for e in 0..3 {
            let (u, v) = (tri[e], tri[(e + 1) % 3]);
            let key = (u.min(v), u.max(v));
            edge_tris.entry(key).or_default().push(ti);
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); t];
    for ts in edge_tris.values() {
        if ts.len() == 2 {
            adj[ts[0]].push(ts[1]);
            adj[ts[1]].push(ts[0]);
        }
    }
    // subtree sizes rooted at 0, then the centroid by minimum max-component
    let mut parent = vec![usize::MAX; t];
    let mut dfs_order = Vec::with_capacity(t);
    let mut stack = vec![0usize];
    let mut seen = vec![false; t];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        dfs_order.push(v);
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                stack.push(w);
            }
        }
    }
    let mut size = vec![1usize; t];
    for &v in dfs_order.iter().rev() {
        if parent[v] != usize::MAX {
            size[parent[v]] += size[v];
        }
    }
    let mut centroid = 0;
    let mut best = usize::MAX;
    for v in 0..t {
        let mut worst = t - size[v];
        for &w in &adj[v] {
            if parent[w] == v {
                worst = worst.max(size[w]);
            }
        }
        if worst < best {
            best = worst;
            centroid = v;
        }
    }
    // best diagonal of the centroid triangle by balance
    let tri = tris[centroid];
    let mut pick: Option<(usize, usize, usize)> = None;
    for e in 0..3 {
        let (u, v) = (tri[e], tri[(e + 1) % 3]);
        let (i, j) = (u.min(v), u.max(v));
        if j == i + 1 || (i == 0 && j == n - 1) {
            continue; // polygon edge
        }
        let (p1, p2) = chord_parts(n, i, j);
        let small = p1.min(p2);
        if pick.map_or(true, |(_, _, s)| small > s) {
            pick = Some((i, j, small));
        }
    }
    pick.map(|(i, j, _)| (i, j))
}

/// A chord (i, j), i < j, splitting the polygon into two simple parts of
/// at most ceil(2n/3) + 1 vertices each. Found from the centroid triangle of
/// the triangulation dual tree, with an exhaustive diagonal scan as fallback.
pub fn balanced_chord(poly: &[Pt]) -> Result<(usize, usize)> {
    let n = poly.len();
    if n < 4 {
        return Err(Error::arg("balanced_chord needs at least four vertices"));
    }
    if !polygon_is_simple(poly) {
        return Err(Error::arg("polygon is not simple"));
    }
    let bound = (2 * n + 2) / 3 + 1;
    if let Some((i, j)) = centroid_chord(poly) {
        let (p1, p2) = chord_parts(n, i, j);
        if p1 <= bound && p2 <= bound {
            return Ok((i, j));
        }
    }
    // exhaustive fallback: most balanced valid diagonal
    let mut cands: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (p1, p2) = chord_parts(n, i, j);
            cands.push((p1.min(p2), i, j));
        }
    }
    cands.sort_by(|a, b| b.0.cmp(&a.0));
    for (small, i, j) in cands {
        let big = n + 2 - small;
        if small > bound || big > bound {
            continue;
        }
        if is_diagonal(poly, i, j) {
            return Ok((i, j));
        }
    }
    Err(Error::Partition(
        "no balanced diagonal found; polygon is degenerate".into(),
    ))
}

/// How the per-split cross-visibility matrices are encoded.
#[derive(Clone, Debug)]
pub enum CrossEncoder {
    /// switch-compressed rows of the cross matrix in boundary order
    SwitchRows,
    /// hereditary segment tree over externally supplied dual segments,
    /// one bichromatic instance per split in recursion order
    HstWithSuppliedDuals(Vec<BichromaticSegments>),
}

struct PolyVertexLabel {
    path: Vec<bool>,
    levels: Vec<(usize, Bits)>,
    leaf_pos: u64,
    leaf_row: [bool; 4],
}

fn polygon_rec(
    poly: &[Pt],
    sub: &[usize],
    active: &[usize],
    out: &mut [PolyVertexLabel],
) -> Result<()> {
    let pos_in_sub: HashMap<usize, usize> =
        sub.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let subpts: Vec<Pt> = sub.iter().map(|&v| poly[v].clone()).collect();
    if active.len() <= 4 {
        let mut members = active.to_vec();
        members.sort_unstable();
        for (pi, &u) in members.iter().enumerate() {
            let l = &mut out[u];
            l.leaf_pos = pi as u64;
            for (pj, &v) in members.iter().enumerate() {
                l.leaf_row[pj] =
                    pi != pj && polygon_visible(&subpts, pos_in_sub[&u], pos_in_sub[&v]);
            }
        }
        return Ok(());
    }
    let (ci, cj) = balanced_chord(&subpts)?;
    let side1: Vec<usize> = sub[ci..=cj].to_vec();
    let side2: Vec<usize> = sub[cj..]
        .iter()
        .chain(sub[..=ci].iter())
        .copied()
        .collect();
    let endpoints_to_side1 = side1.len() <= side2.len();
    let in_side1 = |v: usize| -> bool {
        let p = pos_in_sub[&v];
        if p == ci || p == cj {
            endpoints_to_side1
        } else {
            ci < p && p < cj
        }
    };
    let mut participants = active.to_vec();
    participants.sort_unstable();
    let n_level = participants.len();
    let mut m = AdjacencyMatrix::new(n_level);
    for a in 0..n_level {
        for b in a + 1..n_level {
            let (u, v) = (participants[a], participants[b]);
            if in_side1(u) != in_side1(v)
                && polygon_visible(&subpts, pos_in_sub[&u], pos_in_sub[&v])
            {
                m.set(a, b, true);
            }
        }
    }
    let order: Vec<usize> = (0..n_level).collect();
    let ls = switch_encode(&m, &order)?;
    for (k, &u) in participants.iter().enumerate() {
        out[u].path.push(!in_side1(u));
        out[u].levels.push((n_level, ls.labels[k].bits.clone()));
    }
    let active1: Vec<usize> = participants.iter().copied().filter(|&v| in_side1(v)).collect();
    let active2: Vec<usize> = participants
        .iter()
        .copied()
        .filter(|&v| !in_side1(v))
        .collect();
    if !active1.is_empty() {
        polygon_rec(poly, &side1, &active1, out)?;
    }
    if !active2.is_empty() {
        polygon_rec(poly, &side2, &active2, out)?;
    }
    Ok(())
}

/// Visibility labels for a simple polygon via recursive balanced chords:
/// vertices record their side per split plus a cross-matrix sublabel, and a
/// final leaf row over at most four vertices.
pub fn polygon_labels(poly: &[Pt], encoder: &CrossEncoder) -> Result<LabelSet> {
    let n = poly.len();
    if n < 3 {
        return Err(Error::arg("polygon needs at least three vertices"));
    }
    if !polygon_is_simple(poly) {
        return Err(Error::arg("polygon is not simple"));
    }
    if let CrossEncoder::HstWithSuppliedDuals(duals) = encoder {
        for d in duals {
            d.validate()?;
        }
        return Err(Error::Config(
            "hst cross encoding needs dual-segment sublabels the polygon wire \
             format does not carry; use the switch-row encoder"
                .into(),
        ));
    }
    let mut out: Vec<PolyVertexLabel> = (0..n)
        .map(|_| PolyVertexLabel {
            path: Vec::new(),
            levels: Vec::new(),
            leaf_pos: 0,
            leaf_row: [false; 4],
        })
        .collect();
    let sub: Vec<usize> = (0..n).collect();
    polygon_rec(poly, &sub, &sub, &mut out)?;
    let id_bits = width_for(n);
    let mut labels = Vec::with_capacity(n);
    for (v, l) in out.iter().enumerate() {
        let mut bits = Bits::new();
        bits.push_uint(v as u64, id_bits);
        bits.push_gamma(l.path.len() as u64 + 1);
        for &b in &l.path {
            bits.push(b);
        }
        for (n_level, sub_bits) in &l.levels {
            bits.push_gamma(*n_level as u64);
            bits.extend(sub_bits);
        }
        bits.push_uint(l.leaf_pos, 2);
        for &b in &l.leaf_row {
            bits.push(b);
        }
        labels.push(Label { bits });
    }
    Ok(LabelSet::new(SchemeDescriptor::Polygon { n, id_bits }, labels))
}

// ---------------------------------------------------------------------------
