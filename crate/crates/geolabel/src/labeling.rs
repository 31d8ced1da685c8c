//! Bit-exact labels and stateless decoding: adjacency is a function of two
//! labels and a SchemeDescriptor, nothing else.

use crate::biclique::BicliqueDecomposition;
use crate::bits::{width_for, BitReader, Bits};
use crate::error::{Error, Result};
use crate::matrix::AdjacencyMatrix;
use crate::predicate::{Phi, PredicateSpec};
use crate::rat::{Pt, Q};
use num::{BigInt, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{BufRead, Write};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub bits: Bits,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct LabelStats {
    pub max_bits: usize,
    pub total_bits: usize,
}

/// Everything the decoder may consult besides the two labels.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SchemeDescriptor {
    /// [id][gamma(nu+1)][(biclique id, side bit) ascending]
    BicliqueList { n: usize, b_count: usize },
    /// Ordered relation over vertex copies: [id][gamma(c1+1)][first-argument
    /// biclique ids ascending][gamma(c2+1)][second-argument ids ascending]
    RelationBicliques { n: usize, b_count: usize },
    Dominance {
        n: usize,
        l: usize,
        rank_bits: usize,
        id_bits: usize,
    },
    Semilinear {
        n: usize,
        k: usize,
        l: usize,
        rank_bits: usize,
        id_bits: usize,
        symmetric: bool,
    },
    Boxicity {
        n: usize,
        d: usize,
        rank_bits: usize,
        id_bits: usize,
    },
    /// [column][first bit][gamma(switches+1)][switch positions ascending]
    SwitchRows { n: usize },
    /// [id][2t x (gamma(len+1) + sublabel)]; sublabel i stores polynomial
    /// ceil(i/2) with even i in id order, odd i in reversed order.
    ComposedPhi {
        n: usize,
        t: usize,
        phi: Phi,
        subs: Vec<SchemeDescriptor>,
    },
    /// [id][color][gamma(cnt+1)][(node, role, ranks) ascending by node];
    /// long entries carry (own rank, left rho, right rho), short entries
    /// the two endpoint rhos.
    Hst {
        n: usize,
        id_bits: usize,
        node_bits: usize,
        rank_bits: usize,
    },
    /// [position][per halving level: present bit + neighbor extreme]
    Capped {
        n: usize,
        id_bits: usize,
        val_bits: usize,
    },
    /// [id][gamma(depth+1)][path bits][per level: gamma(n_level) + switch-row
    /// sublabel][leaf: own position (2 bits) + 4 row bits]
    Polygon { n: usize, id_bits: usize },
}

#[derive(Clone, Debug)]
pub struct LabelSet {
    pub descriptor: SchemeDescriptor,
    pub labels: Vec<Label>,
    pub stats: LabelStats,
}

impl LabelSet {
    pub fn new(descriptor: SchemeDescriptor, labels: Vec<Label>) -> Self {
        let stats = LabelStats {
            max_bits: labels.iter().map(|l| l.bits.len()).max().unwrap_or(0),
            total_bits: labels.iter().map(|l| l.bits.len()).sum(),
        };
        LabelSet {
            descriptor,
            labels,
            stats,
        }
    }

    /// Dump format: descriptor JSON on the first line, then one `len:hex`
    /// line per vertex.
    pub fn write_dump(&self, w: &mut impl Write) -> Result<()> {
        let header = serde_json::to_string(&self.descriptor)?;
        writeln!(w, "{header}")?;
        for l in &self.labels {
            writeln!(w, "{}", l.bits.dump())?;
        }
        Ok(())
    }

    pub fn read_dump(r: impl BufRead) -> Result<LabelSet> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Decode("empty label dump".into()))??;
        let descriptor: SchemeDescriptor = serde_json::from_str(&header)?;
        let mut labels = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            labels.push(Label {
                bits: Bits::parse_dump(line.trim())?,
            });
        }
        Ok(LabelSet::new(descriptor, labels))
    }
}

// ---------------------------------------------------------------------------
// Biclique-list encoding

/// Labels a vertex by the list of bicliques it belongs to plus a side bit.
pub fn encode_from_bicliques(dec: &BicliqueDecomposition) -> Result<LabelSet> {
    dec.check_well_formed()?;
    let n = dec.n;
    let b_count = dec.bicliques.len();
    let id_bits = width_for(n);
    let bic_bits = width_for(b_count);
    let mut memberships: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for b in &dec.bicliques {
        for &v in &b.left {
            memberships[v].push((b.id, false));
        }
        for &v in &b.right {
            memberships[v].push((b.id, true));
        }
    }
    let mut labels = Vec::with_capacity(n);
    for (v, mut list) in memberships.into_iter().enumerate() {
        list.sort_unstable();
        let mut bits = Bits::new();
        bits.push_uint(v as u64, id_bits);
        bits.push_gamma(list.len() as u64 + 1);
        for (id, side) in list {
            bits.push_uint(id as u64, bic_bits);
            bits.push(side);
        }
        labels.push(Label { bits });
    }
    Ok(LabelSet::new(
        SchemeDescriptor::BicliqueList { n, b_count },
        labels,
    ))
}

/// Relation variant: the decomposition lives on 2n vertex copies,
/// first-argument copies 0..n and second-argument copies n..2n; vertex v's
/// label lists its memberships in both roles.
pub fn encode_relation_bicliques(dec: &BicliqueDecomposition) -> Result<LabelSet> {
    dec.check_well_formed()?;
    if dec.n % 2 != 0 {
        return Err(Error::arg("relation decomposition must span 2n copies"));
    }
    let n = dec.n / 2;
    let b_count = dec.bicliques.len();
    let bic_bits = width_for(b_count);
    let id_bits = width_for(n);
    let mut first: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut second: Vec<Vec<usize>> = vec![Vec::new(); n];
    for b in &dec.bicliques {
        for &v in &b.left {
            if v >= n {
                return Err(Error::arg("left side must hold first-argument copies"));
            }
            first[v].push(b.id);
        }
        for &v in &b.right {
            if v < n {
                return Err(Error::arg("right side must hold second-argument copies"));
            }
            second[v - n].push(b.id);
        }
    }
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        first[v].sort_unstable();
        second[v].sort_unstable();
        let mut bits = Bits::new();
        bits.push_uint(v as u64, id_bits);
        for list in [&first[v], &second[v]] {
            bits.push_gamma(list.len() as u64 + 1);
            for &id in list {
                bits.push_uint(id as u64, bic_bits);
            }
        }
        labels.push(Label { bits });
    }
    Ok(LabelSet::new(
        SchemeDescriptor::RelationBicliques { n, b_count },
        labels,
    ))
}

// ---------------------------------------------------------------------------
// Bipartization hierarchy

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartitePiece {
    pub level: usize,
    /// Half-open vertex-id ranges.
    pub left: (usize, usize),
    pub right: (usize, usize),
}

/// Balanced recursive halving of [0, n): every unordered pair falls in
/// exactly one piece (its split level), every vertex in <= ceil(log2 n).
pub fn bipartize(n: usize) -> Result<Vec<BipartitePiece>> {
    if n < 2 {
        return Err(Error::arg("bipartize needs n >= 2"));
    }
    let mut pieces = Vec::new();
    fn split(lo: usize, hi: usize, level: usize, out: &mut Vec<BipartitePiece>) {
        if hi - lo < 2 {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        out.push(BipartitePiece {
            level,
            left: (lo, mid),
            right: (mid, hi),
        });
        split(lo, mid, level + 1, out);
        split(mid, hi, level + 1, out);
    }
    split(0, n, 0, &mut pieces);
    Ok(pieces)
}

// ---------------------------------------------------------------------------
// Phi composition

/// Concatenates 2t per-polynomial sublabel sets (each polynomial encoded in
/// both argument orders) so the decoder can recover the t signs and apply phi.
pub fn compose_predicate_labels(
    spec: &PredicateSpec,
    sublabelsets: Vec<LabelSet>,
) -> Result<LabelSet> {
    if sublabelsets.len() != 2 * spec.t {
        return Err(Error::arg(format!(
            "expected {} sublabel sets, got {}",
            2 * spec.t,
            sublabelsets.len()
        )));
    }
    let n = sublabelsets
        .first()
        .map(|s| s.labels.len())
        .ok_or_else(|| Error::arg("no sublabel sets"))?;
    for s in &sublabelsets {
        if s.labels.len() != n {
            return Err(Error::arg("sublabel sets disagree on vertex count"));
        }
    }
    let id_bits = width_for(n);
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        let mut bits = Bits::new();
        bits.push_uint(v as u64, id_bits);
        for s in &sublabelsets {
            let sub = &s.labels[v].bits;
            bits.push_gamma(sub.len() as u64 + 1);
            bits.extend(sub);
        }
        labels.push(Label { bits });
    }
    Ok(LabelSet::new(
        SchemeDescriptor::ComposedPhi {
            n,
            t: spec.t,
            phi: spec.phi.clone(),
            subs: sublabelsets
                .into_iter()
                .map(|s| s.descriptor)
                .collect(),
        },
        labels,
    ))
}

// ---------------------------------------------------------------------------
// Switch-row baseline (§1.5)

/// Encodes each row of `m`, permuted by `order`, as its first bit plus the
/// ascending positions where consecutive bits differ.
pub fn switch_encode(m: &AdjacencyMatrix, order: &[usize]) -> Result<LabelSet> {
    let n = m.n;
    if order.len() != n {
        return Err(Error::arg("order length mismatch"));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::arg("order is not a permutation"));
        }
        seen[v] = true;
    }
    let mut pos = vec![0usize; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let col_bits = width_for(n);
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        let row: Vec<bool> = order.iter().map(|&u| m.get(v, u)).collect();
        let mut bits = Bits::new();
        bits.push_uint(pos[v] as u64, col_bits);
        bits.push(row[0]);
        let switches: Vec<usize> = (1..n).filter(|&j| row[j] != row[j - 1]).collect();
        bits.push_gamma(switches.len() as u64 + 1);
        for p in switches {
            bits.push_uint(p as u64, col_bits);
        }
        labels.push(Label { bits });
    }
    Ok(LabelSet::new(SchemeDescriptor::SwitchRows { n }, labels))
}

// ---------------------------------------------------------------------------
// Space-filling-curve order (§1.5 heuristic stand-in)

const HILBERT_ORDER: u32 = 16;

fn hilbert_index(mut x: u32, mut y: u32) -> u64 {
    let mut rx: u32;
    let mut ry: u32;
    let mut d: u64 = 0;
    let mut s: u32 = 1 << (HILBERT_ORDER - 1);
    while s > 0 {
        rx = if x & s > 0 { 1 } else { 0 };
        ry = if y & s > 0 { 1 } else { 0 };
        d += (s as u64) * (s as u64) * ((3 * rx) ^ ry) as u64;
        // rotate quadrant
        if ry == 0 {
            if rx == 1 {
                x = s.wrapping_sub(1).wrapping_sub(x);
                y = s.wrapping_sub(1).wrapping_sub(y);
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

fn grid_coord(v: &Q, min: &Q, extent: &Q) -> u32 {
    if extent.is_zero() {
        return 0;
    }
    let scaled = (v - min) * Q::from(BigInt::from(1u64 << HILBERT_ORDER)) / extent;
    let f = scaled.floor().to_integer();
    let max = BigInt::from((1u64 << HILBERT_ORDER) - 1);
    let clamped = if f < BigInt::zero() {
        BigInt::zero()
    } else if f > max {
        max
    } else {
        f
    };
    clamped.to_u32().unwrap()
}

/// Visits points along an order-16 Hilbert curve over their bounding box;
/// ties broken by vertex id.
pub fn sfc_order(points: &[Pt]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let min_x = points.iter().map(|p| &p.x).min().unwrap().clone();
    let max_x = points.iter().map(|p| &p.x).max().unwrap().clone();
    let min_y = points.iter().map(|p| &p.y).min().unwrap().clone();
    let max_y = points.iter().map(|p| &p.y).max().unwrap().clone();
    let ex = &max_x - &min_x;
    let ey = &max_y - &min_y;
    let mut keyed: Vec<(u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let gx = grid_coord(&p.x, &min_x, &ex);
            let gy = grid_coord(&p.y, &min_y, &ey);
            (hilbert_index(gx, gy), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

// ---------------------------------------------------------------------------
// Shatter-function estimate (§1.5)

/// Max distinct row projections over `trials` random `mm`-column subsets;
/// a lower bound on the shatter function g(mm).
pub fn shatter_estimate(
    m: &AdjacencyMatrix,
    mm: usize,
    trials: usize,
    seed: u64,
) -> Result<usize> {
    if mm > m.n {
        return Err(Error::arg("sample size exceeds vertex count"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best = 0usize;
    for _ in 0..trials.max(1) {
        let mut cols: Vec<usize> = (0..m.n).collect();
        for i in 0..mm {
            let j = rng.gen_range(i..m.n);
            cols.swap(i, j);
        }
        let cols = &cols[..mm];
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        for u in 0..m.n {
            let mut proj = vec![0u64; (mm + 63) / 64];
            for (k, &c) in cols.iter().enumerate() {
                if m.get(u, c) {
                    proj[k / 64] |= 1 << (k % 64);
                }
            }
            seen.insert(proj);
        }
        best = best.max(seen.len());
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Decoding

struct BicliqueListLabel {
    id: u64,
    entries: Vec<(u64, bool)>,
}

fn parse_biclique_list(label: &Label, n: usize, b_count: usize) -> Result<BicliqueListLabel> {
    let mut r = BitReader::new(&label.bits);
    let id = r.read_uint(width_for(n))?;
    let count = r.read_gamma()? - 1;
    let bic_bits = width_for(b_count);
    let mut entries = Vec::with_capacity(count as usize);
    let mut prev: Option<u64> = None;
    for _ in 0..count {
        let bic = r.read_uint(bic_bits)?;
        let side = r.read_bit()?;
        if prev.map_or(false, |p| p >= bic) {
            return Err(Error::Decode("biclique ids not strictly ascending".into()));
        }
        prev = Some(bic);
        entries.push((bic, side));
    }
    r.finish()?;
    Ok(BicliqueListLabel { id, entries })
}

fn decode_biclique_list(a: &Label, b: &Label, n: usize, b_count: usize) -> Result<bool> {
    let la = parse_biclique_list(a, n, b_count)?;
    let lb = parse_biclique_list(b, n, b_count)?;
    if la.id == lb.id {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    let (mut i, mut j) = (0, 0);
    while i < la.entries.len() && j < lb.entries.len() {
        let (ba, sa) = la.entries[i];
        let (bb, sb) = lb.entries[j];
        if ba == bb {
            if sa != sb {
                return Ok(true);
            }
            i += 1;
            j += 1;
        } else if ba < bb {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(false)
}

struct RelationLabel {
    #[allow(dead_code)]
    id: u64,
    first: Vec<u64>,
    second: Vec<u64>,
}

fn parse_relation(label: &Label, n: usize, b_count: usize) -> Result<RelationLabel> {
    let mut r = BitReader::new(&label.bits);
    let id = r.read_uint(width_for(n))?;
    let bic_bits = width_for(b_count);
    let mut lists = [Vec::new(), Vec::new()];
    for list in lists.iter_mut() {
        let count = r.read_gamma()? - 1;
        let mut prev: Option<u64> = None;
        for _ in 0..count {
            let bic = r.read_uint(bic_bits)?;
            if prev.map_or(false, |p| p >= bic) {
                return Err(Error::Decode("biclique ids not strictly ascending".into()));
            }
            prev = Some(bic);
            list.push(bic);
        }
    }
    r.finish()?;
    let [first, second] = lists;
    Ok(RelationLabel { id, first, second })
}

fn sorted_intersects(a: &[u64], b: &[u64]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => return true,
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    false
}

/// Relation semantics: R(a, b) with `a` in the first-argument role.
fn decode_relation(a: &Label, b: &Label, n: usize, b_count: usize) -> Result<bool> {
    let la = parse_relation(a, n, b_count)?;
    let lb = parse_relation(b, n, b_count)?;
    Ok(sorted_intersects(&la.first, &lb.second))
}

struct RankLabel {
    id: u64,
    side: bool,
    ranks: Vec<u64>,
}

fn parse_ranks(
    label: &Label,
    id_bits: usize,
    rank_bits: usize,
    count: usize,
    has_side: bool,
) -> Result<RankLabel> {
    let mut r = BitReader::new(&label.bits);
    let id = r.read_uint(id_bits)?;
    let side = if has_side { r.read_bit()? } else { false };
    let mut ranks = Vec::with_capacity(count);
    for _ in 0..count {
        ranks.push(r.read_uint(rank_bits)?);
    }
    r.finish()?;
    Ok(RankLabel { id, side, ranks })
}

fn decode_dominance(
    a: &Label,
    b: &Label,
    l: usize,
    rank_bits: usize,
    id_bits: usize,
) -> Result<bool> {
    let la = parse_ranks(a, id_bits, rank_bits, l, true)?;
    let lb = parse_ranks(b, id_bits, rank_bits, l, true)?;
    if la.id == lb.id {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    if la.side == lb.side {
        return Ok(false);
    }
    // side bit 1 marks the right role; edge iff left strictly below right
    let (left, right) = if la.side { (&lb, &la) } else { (&la, &lb) };
    Ok((0..l).all(|j| left.ranks[j] < right.ranks[j]))
}

fn decode_semilinear(
    a: &Label,
    b: &Label,
    k: usize,
    l: usize,
    rank_bits: usize,
    id_bits: usize,
    symmetric: bool,
) -> Result<bool> {
    let la = parse_ranks(a, id_bits, rank_bits, 2 * k * l, false)?;
    let lb = parse_ranks(b, id_bits, rank_bits, 2 * k * l, false)?;
    if la.id == lb.id {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    // ranks laid out as (g, h) pairs per axis; literal g(u) < -h(v) holds
    // iff u's g-rank precedes v's h-rank
    let holds = |u: &RankLabel, v: &RankLabel| {
        (0..k).any(|i| (0..l).all(|j| u.ranks[2 * (i * l + j)] < v.ranks[2 * (i * l + j) + 1]))
    };
    Ok(if symmetric {
        holds(&la, &lb)
    } else {
        holds(&la, &lb) || holds(&lb, &la)
    })
}

fn decode_boxicity(
    a: &Label,
    b: &Label,
    d: usize,
    rank_bits: usize,
    id_bits: usize,
) -> Result<bool> {
    let la = parse_ranks(a, id_bits, rank_bits, 2 * d, false)?;
    let lb = parse_ranks(b, id_bits, rank_bits, 2 * d, false)?;
    if la.id == lb.id {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    // low corners rank before equal high corners, so lo <= hi decodes as
    // a strict rank comparison
    Ok((0..d).all(|j| {
        la.ranks[2 * j] < lb.ranks[2 * j + 1] && lb.ranks[2 * j] < la.ranks[2 * j + 1]
    }))
}

struct SwitchLabel {
    col: u64,
    first: bool,
    switches: Vec<u64>,
}

fn parse_switch(r: &mut BitReader, n: usize) -> Result<SwitchLabel> {
    let col_bits = width_for(n);
    let col = r.read_uint(col_bits)?;
    let first = r.read_bit()?;
    let count = r.read_gamma()? - 1;
    let mut switches = Vec::with_capacity(count as usize);
    let mut prev: Option<u64> = None;
    for _ in 0..count {
        let p = r.read_uint(col_bits)?;
        if p == 0 || p as usize >= n || prev.map_or(false, |q| q >= p) {
            return Err(Error::Decode("bad switch position".into()));
        }
        prev = Some(p);
        switches.push(p);
    }
    Ok(SwitchLabel {
        col,
        first,
        switches,
    })
}

fn switch_row_bit(l: &SwitchLabel, col: u64) -> bool {
    let flips = l.switches.iter().filter(|&&p| p <= col).count();
    l.first ^ (flips % 2 == 1)
}

fn decode_switch_rows(a: &Label, b: &Label, n: usize) -> Result<bool> {
    let mut ra = BitReader::new(&a.bits);
    let la = parse_switch(&mut ra, n)?;
    ra.finish()?;
    let mut rb = BitReader::new(&b.bits);
    let lb = parse_switch(&mut rb, n)?;
    rb.finish()?;
    if la.col == lb.col {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    Ok(switch_row_bit(&la, lb.col))
}

struct ComposedLabel {
    id: u64,
    subs: Vec<Label>,
}

fn parse_composed(label: &Label, n: usize, t: usize) -> Result<ComposedLabel> {
    let mut r = BitReader::new(&label.bits);
    let id = r.read_uint(width_for(n))?;
    let mut subs = Vec::with_capacity(2 * t);
    for _ in 0..2 * t {
        let len = (r.read_gamma()? - 1) as usize;
        let mut bits = Bits::new();
        for _ in 0..len {
            bits.push(r.read_bit()?);
        }
        subs.push(Label { bits });
    }
    r.finish()?;
    Ok(ComposedLabel { id, subs })
}

fn decode_composed(
    a: &Label,
    b: &Label,
    n: usize,
    t: usize,
    phi: &Phi,
    subs: &[SchemeDescriptor],
) -> Result<bool> {
    if subs.len() != 2 * t {
        return Err(Error::Decode("sub-descriptor count mismatch".into()));
    }
    let la = parse_composed(a, n, t)?;
    let lb = parse_composed(b, n, t)?;
    if la.id == lb.id {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    // sublabel 2i decodes f_{i+1}(x, y) >= 0 with the lower id first;
    // sublabel 2i+1 the reversed argument order
    let (lo, hi, queried_forward) = if la.id < lb.id {
        (&la, &lb, true)
    } else {
        (&lb, &la, false)
    };
    let mut signs = Vec::with_capacity(t);
    for i in 0..t {
        let slot = if queried_forward { 2 * i } else { 2 * i + 1 };
        let ge = decode_adjacent(&subs[slot], &lo.subs[slot], &hi.subs[slot])?;
        signs.push(if ge { 1 } else { -1 });
    }
    Ok(phi.eval(&signs))
}

struct HstEntry {
    node: u64,
    long: bool,
    /// long: (own rank, rho at left wall, rho at right wall); short: the two
    /// endpoint rhos (third slot unused).
    ranks: [u64; 3],
}

struct HstLabel {
    id: u64,
    color: bool,
    entries: Vec<HstEntry>,
}

fn parse_hst(label: &Label, id_bits: usize, node_bits: usize, rank_bits: usize) -> Result<HstLabel> {
    let mut r = BitReader::new(&label.bits);
    let id = r.read_uint(id_bits)?;
    let color = r.read_bit()?;
    let count = r.read_gamma()? - 1;
    let mut entries = Vec::with_capacity(count as usize);
    let mut prev: Option<u64> = None;
    for _ in 0..count {
        let node = r.read_uint(node_bits)?;
        if prev.map_or(false, |p| p >= node) {
            return Err(Error::Decode("node ids not strictly ascending".into()));
        }
        prev = Some(node);
        let long = r.read_bit()?;
        let mut ranks = [0u64; 3];
        let cnt = if long { 3 } else { 2 };
        for slot in ranks.iter_mut().take(cnt) {
            *slot = r.read_uint(rank_bits)?;
        }
        entries.push(HstEntry { node, long, ranks });
    }
    r.finish()?;
    Ok(HstLabel { id, color, entries })
}

fn straddles(lo: u64, hi: u64, rank: u64) -> bool {
    lo.min(hi) <= rank && rank < lo.max(hi)
}

fn decode_hst(
    a: &Label,
    b: &Label,
    id_bits: usize,
    node_bits: usize,
    rank_bits: usize,
) -> Result<bool> {
    let la = parse_hst(a, id_bits, node_bits, rank_bits)?;
    let lb = parse_hst(b, id_bits, node_bits, rank_bits)?;
    if la.id == lb.id {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    if la.color == lb.color {
        return Ok(false);
    }
    let (mut i, mut j) = (0, 0);
    while i < la.entries.len() && j < lb.entries.len() {
        let ea = &la.entries[i];
        let eb = &lb.entries[j];
        if ea.node == eb.node {
            let hit = match (ea.long, eb.long) {
                (true, false) => straddles(eb.ranks[0], eb.ranks[1], ea.ranks[0]),
                (false, true) => straddles(ea.ranks[0], ea.ranks[1], eb.ranks[0]),
                // both long: red stores rhos against the blue order
                (true, true) => {
                    let (red, blue) = if la.color { (eb, ea) } else { (ea, eb) };
                    straddles(red.ranks[1], red.ranks[2], blue.ranks[0])
                }
                (false, false) => false,
            };
            if hit {
                return Ok(true);
            }
            i += 1;
            j += 1;
        } else if ea.node < eb.node {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(false)
}

/// Depth of `pos`'s leaf in the deterministic halving tree of [0, n).
pub fn capped_path_len(n: usize, pos: usize) -> usize {
    let (mut lo, mut hi) = (0usize, n);
    let mut depth = 0;
    while hi - lo >= 2 {
        let mid = lo + (hi - lo) / 2;
        if pos < mid {
            hi = mid;
        } else {
            lo = mid;
        }
        depth += 1;
    }
    depth
}

struct CappedLabel {
    pos: u64,
    /// per level: Some(extreme cross-neighbor position) or None sentinel
    values: Vec<Option<u64>>,
}

fn parse_capped(label: &Label, n: usize, id_bits: usize, val_bits: usize) -> Result<CappedLabel> {
    let mut r = BitReader::new(&label.bits);
    let pos = r.read_uint(id_bits)?;
    if pos as usize >= n {
        return Err(Error::Decode("position out of range".into()));
    }
    let levels = capped_path_len(n, pos as usize);
    let mut values = Vec::with_capacity(levels);
    for _ in 0..levels {
        let present = r.read_bit()?;
        let v = r.read_uint(val_bits)?;
        values.push(if present { Some(v) } else { None });
    }
    r.finish()?;
    Ok(CappedLabel { pos, values })
}

fn decode_capped(a: &Label, b: &Label, n: usize, id_bits: usize, val_bits: usize) -> Result<bool> {
    let la = parse_capped(a, n, id_bits, val_bits)?;
    let lb = parse_capped(b, n, id_bits, val_bits)?;
    if la.pos == lb.pos {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    let (i, j) = if la.pos < lb.pos {
        (&la, &lb)
    } else {
        (&lb, &la)
    };
    // walk to the level separating the two positions
    let (mut lo, mut hi) = (0u64, n as u64);
    let mut level = 0usize;
    loop {
        let mid = lo + (hi - lo) / 2;
        if i.pos < mid && j.pos >= mid {
            // i on the left, j on the right: edge iff minN(i) <= j and
            // i <= maxN(j) over this split's cross edges
            let min_n = i.values[level];
            let max_n = j.values[level];
            return Ok(match (min_n, max_n) {
                (Some(mn), Some(mx)) => mn <= j.pos && i.pos <= mx,
                _ => false,
            });
        }
        if j.pos < mid {
            hi = mid;
        } else {
            lo = mid;
        }
        level += 1;
    }
}

struct PolygonLevel {
    n_level: usize,
    switch: SwitchLabel,
}

struct PolygonLabel {
    id: u64,
    path: Vec<bool>,
    levels: Vec<PolygonLevel>,
    leaf_pos: u64,
    leaf_row: [bool; 4],
}

fn parse_polygon(label: &Label, id_bits: usize) -> Result<PolygonLabel> {
    let mut r = BitReader::new(&label.bits);
    let id = r.read_uint(id_bits)?;
    let depth = (r.read_gamma()? - 1) as usize;
    let mut path = Vec::with_capacity(depth);
    for _ in 0..depth {
        path.push(r.read_bit()?);
    }
    let mut levels = Vec::with_capacity(depth);
    for _ in 0..depth {
        let n_level = r.read_gamma()? as usize;
        let switch = parse_switch(&mut r, n_level)?;
        levels.push(PolygonLevel { n_level, switch });
    }
    let leaf_pos = r.read_uint(2)?;
    let mut leaf_row = [false; 4];
    for slot in leaf_row.iter_mut() {
        *slot = r.read_bit()?;
    }
    r.finish()?;
    Ok(PolygonLabel {
        id,
        path,
        levels,
        leaf_pos,
        leaf_row,
    })
}

fn decode_polygon(a: &Label, b: &Label, id_bits: usize) -> Result<bool> {
    let la = parse_polygon(a, id_bits)?;
    let lb = parse_polygon(b, id_bits)?;
    if la.id == lb.id {
        return Err(Error::arg("decode on equal vertex ids"));
    }
    let common = la.path.len().min(lb.path.len());
    for d in 0..common {
        if la.path[d] != lb.path[d] {
            let (va, vb) = (&la.levels[d], &lb.levels[d]);
            if va.n_level != vb.n_level {
                return Err(Error::Decode("split sizes disagree".into()));
            }
            return Ok(switch_row_bit(&va.switch, vb.switch.col));
        }
    }
    if la.path.len() != lb.path.len() {
        return Err(Error::Decode("prefix paths of unequal depth".into()));
    }
    // same leaf subpolygon of at most four vertices
    Ok(la.leaf_row[lb.leaf_pos as usize])
}

/// The decoder: adjacency from two labels and the descriptor alone.
pub fn decode_adjacent(desc: &SchemeDescriptor, a: &Label, b: &Label) -> Result<bool> {
    match desc {
        SchemeDescriptor::BicliqueList { n, b_count } => decode_biclique_list(a, b, *n, *b_count),
        SchemeDescriptor::RelationBicliques { n, b_count } => decode_relation(a, b, *n, *b_count),
        SchemeDescriptor::Dominance {
            l,
            rank_bits,
            id_bits,
            ..
        } => decode_dominance(a, b, *l, *rank_bits, *id_bits),
        SchemeDescriptor::Semilinear {
            k,
            l,
            rank_bits,
            id_bits,
            symmetric,
            ..
        } => decode_semilinear(a, b, *k, *l, *rank_bits, *id_bits, *symmetric),
        SchemeDescriptor::Boxicity {
            d,
            rank_bits,
            id_bits,
            ..
        } => decode_boxicity(a, b, *d, *rank_bits, *id_bits),
        SchemeDescriptor::SwitchRows { n } => decode_switch_rows(a, b, *n),
        SchemeDescriptor::ComposedPhi { n, t, phi, subs } => {
            decode_composed(a, b, *n, *t, phi, subs)
        }
        SchemeDescriptor::Hst {
            id_bits,
            node_bits,
            rank_bits,
            ..
        } => decode_hst(a, b, *id_bits, *node_bits, *rank_bits),
        SchemeDescriptor::Capped {
            n,
            id_bits,
            val_bits,
        } => decode_capped(a, b, *n, *id_bits, *val_bits),
        SchemeDescriptor::Polygon { id_bits, .. } => decode_polygon(a, b, *id_bits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biclique::star_decomposition;
    use crate::rat::q;

    fn matrix_of(n: usize, edges: &[(usize, usize)]) -> AdjacencyMatrix {
        let mut m = AdjacencyMatrix::new(n);
        for &(u, v) in edges {
            m.set(u, v, true);
        }
        m
    }

    fn decode_all(ls: &LabelSet, n: usize) -> Vec<Vec<bool>> {
        (0..n)
            .map(|u| {
                (0..n)
                    .map(|v| {
                        if u == v {
                            false
                        } else {
                            decode_adjacent(&ls.descriptor, &ls.labels[u], &ls.labels[v]).unwrap()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn biclique_list_roundtrip_k2() {
        let m = matrix_of(2, &[(0, 1)]);
        let dec = star_decomposition(&m);
        let ls = encode_from_bicliques(&dec).unwrap();
        assert!(decode_adjacent(&ls.descriptor, &ls.labels[0], &ls.labels[1]).unwrap());
        // opposite side bits in the single shared biclique
        assert!(decode_adjacent(&ls.descriptor, &ls.labels[1], &ls.labels[0]).unwrap());
        assert!(decode_adjacent(&ls.descriptor, &ls.labels[0], &ls.labels[0]).is_err());
    }

    #[test]
    fn isolated_vertex_label_is_id_plus_empty_count() {
        let m = matrix_of(3, &[(0, 1)]);
        let dec = star_decomposition(&m);
        let ls = encode_from_bicliques(&dec).unwrap();
        // id: 2 bits, gamma(1) = 1 bit, no entries
        assert_eq!(ls.labels[2].bits.len(), 3);
        assert!(!decode_adjacent(&ls.descriptor, &ls.labels[2], &ls.labels[0]).unwrap());
    }

    #[test]
    fn shared_biclique_same_side_is_nonedge() {
        // {0,1} x {2}: vertices 0 and 1 share biclique 0 on the same side
        let mut dec = BicliqueDecomposition::new(3, "test");
        dec.push(vec![0, 1], vec![2]);
        let ls = encode_from_bicliques(&dec).unwrap();
        assert!(!decode_adjacent(&ls.descriptor, &ls.labels[0], &ls.labels[1]).unwrap());
        assert!(decode_adjacent(&ls.descriptor, &ls.labels[0], &ls.labels[2]).unwrap());
    }

    #[test]
    fn biclique_roundtrip_matches_matrix() {
        let m = matrix_of(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (2, 5), (0, 5)]);
        let ls = encode_from_bicliques(&star_decomposition(&m)).unwrap();
        let grid = decode_all(&ls, 6);
        for u in 0..6 {
            for v in 0..6 {
                if u != v {
                    assert_eq!(grid[u][v], m.get(u, v), "pair ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn bipartize_examples() {
        assert_eq!(
            bipartize(2).unwrap(),
            vec![BipartitePiece {
                level: 0,
                left: (0, 1),
                right: (1, 2)
            }]
        );
        let p4 = bipartize(4).unwrap();
        assert_eq!(p4.len(), 3);
        assert_eq!(p4[0].left, (0, 2));
        assert_eq!(p4[0].right, (2, 4));
        // vertex 0 appears in 2 pieces
        let count0 = p4
            .iter()
            .filter(|p| (p.left.0..p.left.1).contains(&0) || (p.right.0..p.right.1).contains(&0))
            .count();
        assert_eq!(count0, 2);
        // n=8: every vertex in exactly 3 pieces
        let p8 = bipartize(8).unwrap();
        for v in 0..8 {
            let c = p8
                .iter()
                .filter(|p| {
                    (p.left.0..p.left.1).contains(&v) || (p.right.0..p.right.1).contains(&v)
                })
                .count();
            assert_eq!(c, 3);
        }
    }

    #[test]
    fn bipartize_partitions_pairs() {
        for n in 2..=40 {
            let pieces = bipartize(n).unwrap();
            let logn = width_for(n);
            let mut per_vertex = vec![0usize; n];
            let mut pair_count = vec![vec![0usize; n]; n];
            for p in &pieces {
                for v in p.left.0..p.left.1 {
                    per_vertex[v] += 1;
                }
                for v in p.right.0..p.right.1 {
                    per_vertex[v] += 1;
                }
                for u in p.left.0..p.left.1 {
                    for v in p.right.0..p.right.1 {
                        pair_count[u][v] += 1;
                    }
                }
            }
            for v in 0..n {
                assert!(per_vertex[v] <= logn, "n={n} v={v}");
            }
            for u in 0..n {
                for v in u + 1..n {
                    assert_eq!(pair_count[u][v], 1, "n={n} pair ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn switch_encode_roundtrip() {
        let m = matrix_of(7, &[(0, 1), (0, 2), (1, 2), (3, 4), (2, 5), (0, 5), (5, 6)]);
        for order in [
            vec![0, 1, 2, 3, 4, 5, 6],
            vec![6, 5, 4, 3, 2, 1, 0],
            vec![3, 0, 6, 2, 5, 1, 4],
        ] {
            let ls = switch_encode(&m, &order).unwrap();
            let grid = decode_all(&ls, 7);
            for u in 0..7 {
                for v in 0..7 {
                    if u != v {
                        assert_eq!(grid[u][v], m.get(u, v));
                    }
                }
            }
        }
    }

    #[test]
    fn complete_graph_has_at_most_two_switches_per_row() {
        let n = 9;
        let mut m = AdjacencyMatrix::new(n);
        for u in 0..n {
            for v in u + 1..n {
                m.set(u, v, true);
            }
        }
        let order: Vec<usize> = (0..n).collect();
        let ls = switch_encode(&m, &order).unwrap();
        for l in &ls.labels {
            let mut r = BitReader::new(&l.bits);
            let sw = parse_switch(&mut r, n).unwrap();
            r.finish().unwrap();
            assert!(sw.switches.len() <= 2);
        }
        // empty graph: zero switches
        let ls = switch_encode(&AdjacencyMatrix::new(n), &order).unwrap();
        for l in &ls.labels {
            let mut r = BitReader::new(&l.bits);
            let sw = parse_switch(&mut r, n).unwrap();
            r.finish().unwrap();
            assert!(sw.switches.is_empty());
        }
    }

    #[test]
    fn sfc_order_basics() {
        let one = vec![Pt::new(q(3), q(5))];
        assert_eq!(sfc_order(&one), vec![0]);
        // 4 corners: deterministic canonical order of the hilbert curve
        let corners = vec![
            Pt::new(q(0), q(0)),
            Pt::new(q(10), q(0)),
            Pt::new(q(10), q(10)),
            Pt::new(q(0), q(10)),
        ];
        let ord = sfc_order(&corners);
        assert_eq!(ord, vec![0, 3, 2, 1]);
        assert_eq!(sfc_order(&corners), ord);
    }

    #[test]
    fn shatter_bounds() {
        // empty graph: single all-zero projection
        let m = AdjacencyMatrix::new(16);
        assert_eq!(shatter_estimate(&m, 4, 5, 1).unwrap(), 1);
        // complete graph: at most mm+1 patterns (zero at own column)
        let n = 16;
        let mut k = AdjacencyMatrix::new(n);
        for u in 0..n {
            for v in u + 1..n {
                k.set(u, v, true);
            }
        }
        let mm = 6;
        let est = shatter_estimate(&k, mm, 8, 7).unwrap();
        assert!(est <= mm + 1);
        assert!(shatter_estimate(&k, n + 1, 1, 0).is_err());
    }

    #[test]
    fn composed_constant_false() {
        let spec = crate::predicate::unit_disk_spec();
        let mut fake = spec.clone();
        fake.phi = Phi::Const(false);
        // sublabels: arbitrary valid relation labels
        let mut dec = BicliqueDecomposition::new(4, "test");
        dec.push(vec![0], vec![3]);
        let sub = encode_relation_bicliques(&dec).unwrap();
        let subs = vec![sub.clone(), sub.clone(), sub.clone(), sub.clone()];
        let ls = compose_predicate_labels(&fake, subs).unwrap();
        assert!(!decode_adjacent(&ls.descriptor, &ls.labels[0], &ls.labels[1]).unwrap());
    }

    #[test]
    fn relation_decode_is_ordered() {
        // relation R = {(0, 1)} on 2 vertices: copies 0..2 first, 2..4 second
        let mut dec = BicliqueDecomposition::new(4, "test");
        dec.push(vec![0], vec![3]);
        let ls = encode_relation_bicliques(&dec).unwrap();
        assert!(decode_adjacent(&ls.descriptor, &ls.labels[0], &ls.labels[1]).unwrap());
        assert!(!decode_adjacent(&ls.descriptor, &ls.labels[1], &ls.labels[0]).unwrap());
    }

    #[test]
    fn dump_roundtrip() {
        let m = matrix_of(3, &[(0, 1), (1, 2)]);
        let ls = encode_from_bicliques(&star_decomposition(&m)).unwrap();
        let mut buf = Vec::new();
        ls.write_dump(&mut buf).unwrap();
        let back = LabelSet::read_dump(&buf[..]).unwrap();
        assert_eq!(back.labels, ls.labels);
        assert_eq!(back.stats.max_bits, ls.stats.max_bits);
        assert!(decode_adjacent(&back.descriptor, &back.labels[0], &back.labels[1]).unwrap());
    }

    #[test]
    fn flipped_bit_changes_decode_or_errors() {
        let m = matrix_of(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let ls = encode_from_bicliques(&star_decomposition(&m)).unwrap();
        let mut corrupt = ls.labels[1].clone();
        corrupt.bits.flip(0);
        // id change or parse failure must be observable
        let r = decode_adjacent(&ls.descriptor, &corrupt, &ls.labels[2]);
        match r {
            Err(_) => {}
            Ok(bit) => {
                // if it parsed, the altered id yields some decode; just make
                // sure the unflipped label still decodes correctly
                let orig =
                    decode_adjacent(&ls.descriptor, &ls.labels[1], &ls.labels[2]).unwrap();
                assert_eq!(orig, m.get(1, 2));
                let _ = bit;
            }
        }
    }
}
