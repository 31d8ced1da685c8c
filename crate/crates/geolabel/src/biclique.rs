//! Biclique edge decompositions: representation, exact validation against a
//! ground-truth matrix, and the size/balance metrics.

use crate::error::{Error, Result};
use crate::matrix::AdjacencyMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Biclique {
    pub id: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Biclique {
    pub fn new(id: usize, mut left: Vec<usize>, mut right: Vec<usize>) -> Self {
        left.sort_unstable();
        right.sort_unstable();
        Biclique { id, left, right }
    }
}

#[derive(Clone, Debug)]
pub struct BicliqueDecomposition {
    pub n: usize,
    pub bicliques: Vec<Biclique>,
    pub provenance: String,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub ok: bool,
    pub missing_edges: Vec<(usize, usize)>,
    pub double_covered: Vec<(usize, usize)>,
    pub covered_nonedges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct Metrics {
    /// Sum over bicliques of |left| + |right|.
    pub size: usize,
    pub count: usize,
    /// Per-vertex biclique membership counts.
    pub nu: Vec<usize>,
    pub nu_max: usize,
}

impl BicliqueDecomposition {
    pub fn new(n: usize, provenance: impl Into<String>) -> Self {
        BicliqueDecomposition {
            n,
            bicliques: Vec::new(),
            provenance: provenance.into(),
        }
    }

    pub fn push(&mut self, left: Vec<usize>, right: Vec<usize>) {
        let id = self.bicliques.len();
        self.bicliques.push(Biclique::new(id, left, right));
    }

    pub fn check_well_formed(&self) -> Result<()> {
        for b in &self.bicliques {
            if b.left.is_empty() || b.right.is_empty() {
                return Err(Error::arg("biclique with an empty side"));
            }
            let mut all: Vec<usize> = b.left.iter().chain(&b.right).copied().collect();
            all.sort_unstable();
            if all.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::arg("biclique sides overlap"));
            }
            if all.last().map_or(false, |&v| v >= self.n) {
                return Err(Error::arg("vertex id out of range"));
            }
        }
        Ok(())
    }

    /// Total edges covered, with multiplicity.
    pub fn covered_pairs(&self) -> usize {
        self.bicliques
            .iter()
            .map(|b| b.left.len() * b.right.len())
            .sum()
    }
}

/// Checks the edge-partition property exactly: every edge covered exactly
/// once, no non-edge covered.
pub fn validate_decomposition(
    dec: &BicliqueDecomposition,
    m: &AdjacencyMatrix,
) -> Result<ValidationReport> {
    if dec.n != m.n {
        return Err(Error::arg("decomposition and matrix sizes differ"));
    }
    dec.check_well_formed()?;
    let n = dec.n;
    let mut cover = vec![0u8; n * n];
    for b in &dec.bicliques {
        for &u in &b.left {
            for &v in &b.right {
                let (a, c) = if u < v { (u, v) } else { (v, u) };
                let slot = &mut cover[a * n + c];
                *slot = slot.saturating_add(1);
            }
        }
    }
    let mut missing = Vec::new();
    let mut double = Vec::new();
    let mut nonedges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let c = cover[u * n + v];
            let edge = m.get(u, v);
            if edge && c == 0 {
                missing.push((u, v));
            } else if edge && c > 1 {
                double.push((u, v));
            } else if !edge && c > 0 {
                nonedges.push((u, v));
            }
        }
    }
    Ok(ValidationReport {
        ok: missing.is_empty() && double.is_empty() && nonedges.is_empty(),
        missing_edges: missing,
        double_covered: double,
        covered_nonedges: nonedges,
    })
}

pub fn metrics(dec: &BicliqueDecomposition) -> Metrics {
    let mut nu = vec![0usize; dec.n];
    let mut size = 0usize;
    for b in &dec.bicliques {
        size += b.left.len() + b.right.len();
        for &v in b.left.iter().chain(&b.right) {
            nu[v] += 1;
        }
    }
    Metrics {
        size,
        count: dec.bicliques.len(),
        nu_max: nu.iter().copied().max().unwrap_or(0),
        nu,
    }
}

/// Canonicalizes a decomposition by merging bicliques that share one side:
/// first bicliques with an identical left side (their right sides must be
/// disjoint in an edge partition, so the union covers the same edges
/// exactly once), then, on the result, bicliques with an identical right
/// side. Merge order follows first appearance, so the output is
/// deterministic. Edge coverage is unchanged; every vertex's membership
/// count can only drop.
pub fn coalesce(dec: &BicliqueDecomposition) -> BicliqueDecomposition {
    fn merge(
        items: Vec<(Vec<usize>, Vec<usize>)>,
        by_left: bool,
    ) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut order: Vec<Vec<usize>> = Vec::new();
        let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (left, right) in items {
            let (key, val) = if by_left { (left, right) } else { (right, left) };
            match groups.entry(key) {
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    e.get_mut().extend(val);
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    order.push(e.key().clone());
                    e.insert(val);
                }
            }
        }
        order
            .into_iter()
            .map(|key| {
                let mut val = groups.remove(&key).unwrap();
                val.sort_unstable();
                if by_left {
                    (key, val)
                } else {
                    (val, key)
                }
            })
            .collect()
    }
    let mut merged: Vec<(Vec<usize>, Vec<usize>)> = dec
        .bicliques
        .iter()
        .map(|b| (b.left.clone(), b.right.clone()))
        .collect();
    // iterate to a fixpoint: a right-side merge can expose new shared lefts
    loop {
        let before = merged.len();
        merged = merge(merge(merged, true), false);
        if merged.len() == before {
            break;
        }
    }
    let mut out = BicliqueDecomposition::new(dec.n, format!("{} (coalesced)", dec.provenance));
    for (left, right) in merged {
        out.push(left, right);
    }
    out
}

/// Baseline: one star per vertex over its higher-id neighbors.
pub fn star_decomposition(m: &AdjacencyMatrix) -> BicliqueDecomposition {
    let mut dec = BicliqueDecomposition::new(m.n, "star");
    for u in 0..m.n {
        let higher: Vec<usize> = (u + 1..m.n).filter(|&v| m.get(u, v)).collect();
        if !higher.is_empty() {
            dec.push(vec![u], higher);
        }
    }
    dec
}

// ---------------------------------------------------------------------------
// JSON form: {"n": int, "bicliques": [{"left": [...], "right": [...]}], "provenance": str}

#[derive(Serialize, Deserialize)]
struct BicliqueSer {
    left: Vec<usize>,
    right: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionSer {
    n: usize,
    bicliques: Vec<BicliqueSer>,
    provenance: String,
}

impl Serialize for BicliqueDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DecompositionSer {
            n: self.n,
            bicliques: self
                .bicliques
                .iter()
                .map(|b| BicliqueSer {
                    left: b.left.clone(),
                    right: b.right.clone(),
                })
                .collect(),
            provenance: self.provenance.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BicliqueDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DecompositionSer::deserialize(d)?;
        let mut dec = BicliqueDecomposition::new(raw.n, raw.provenance);
        for b in raw.bicliques {
            dec.push(b.left, b.right);
        }
        Ok(dec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_of(n: usize, edges: &[(usize, usize)]) -> AdjacencyMatrix {
        let mut m = AdjacencyMatrix::new(n);
        for &(u, v) in edges {
            m.set(u, v, true);
        }
        m
    }

    #[test]
    fn single_edge_ok() {
        let m = matrix_of(2, &[(0, 1)]);
        let mut dec = BicliqueDecomposition::new(2, "test");
        dec.push(vec![0], vec![1]);
        assert!(validate_decomposition(&dec, &m).unwrap().ok);
    }

    #[test]
    fn triangle_decomposition_ok() {
        let m = matrix_of(3, &[(0, 1), (0, 2), (1, 2)]);
        let mut dec = BicliqueDecomposition::new(3, "test");
        dec.push(vec![0], vec![1, 2]);
        dec.push(vec![1], vec![2]);
        let rep = validate_decomposition(&dec, &m).unwrap();
        assert!(rep.ok);
        let met = metrics(&dec);
        assert_eq!(met.size, 5);
        assert_eq!(met.count, 2);
    }

    #[test]
    fn covered_nonedge_detected() {
        let m = matrix_of(3, &[(0, 2)]);
        let mut dec = BicliqueDecomposition::new(3, "test");
        dec.push(vec![0, 1], vec![2]);
        let rep = validate_decomposition(&dec, &m).unwrap();
        assert!(!rep.ok);
        assert_eq!(rep.covered_nonedges, vec![(1, 2)]);
    }

    #[test]
    fn star_of_k3_and_path() {
        let k3 = matrix_of(3, &[(0, 1), (0, 2), (1, 2)]);
        let dec = star_decomposition(&k3);
        assert!(validate_decomposition(&dec, &k3).unwrap().ok);
        assert_eq!(metrics(&dec).size, 5);

        let path = matrix_of(3, &[(0, 1), (1, 2)]);
        let dec = star_decomposition(&path);
        assert!(validate_decomposition(&dec, &path).unwrap().ok);
        assert_eq!(metrics(&dec).nu, vec![1, 2, 1]);
    }

    #[test]
    fn empty_graph_star_is_empty() {
        let m = AdjacencyMatrix::new(4);
        let dec = star_decomposition(&m);
        assert!(dec.bicliques.is_empty());
        assert!(validate_decomposition(&dec, &m).unwrap().ok);
    }

    #[test]
    fn single_biclique_metrics() {
        let mut dec = BicliqueDecomposition::new(2, "test");
        dec.push(vec![0], vec![1]);
        let met = metrics(&dec);
        assert_eq!((met.size, met.count, met.nu_max), (2, 1, 1));
    }

    #[test]
    fn coalesce_merges_shared_sides_and_keeps_the_cover() {
        // Per-pair emissions with a shared owner collapse into one star;
        // distinct owners stay apart; a shared right side merges lefts.
        let m = matrix_of(5, &[(0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]);
        let mut dec = BicliqueDecomposition::new(5, "test");
        dec.push(vec![0], vec![2]);
        dec.push(vec![0], vec![3]);
        dec.push(vec![1], vec![4]);
        dec.push(vec![2], vec![4]);
        dec.push(vec![3], vec![4]);
        let out = coalesce(&dec);
        assert!(validate_decomposition(&out, &m).unwrap().ok);
        // ({0},{2,3}) survives the left pass; the right pass fuses the
        // three singleton-right bicliques into ({1,2,3},{4}).
        assert_eq!(out.bicliques.len(), 2);
        let met = metrics(&out);
        assert!(met.nu_max <= metrics(&dec).nu_max);
        assert_eq!(out.bicliques[0].left, vec![0]);
        assert_eq!(out.bicliques[0].right, vec![2, 3]);
        assert_eq!(out.bicliques[1].left, vec![1, 2, 3]);
        assert_eq!(out.bicliques[1].right, vec![4]);
    }

    #[test]
    fn coalesce_is_deterministic_and_order_preserving() {
        let mut dec = BicliqueDecomposition::new(6, "test");
        dec.push(vec![4], vec![5]);
        dec.push(vec![0, 1], vec![2]);
        dec.push(vec![0, 1], vec![3]);
        let a = coalesce(&dec);
        let b = coalesce(&dec);
        assert_eq!(a.bicliques, b.bicliques);
        assert_eq!(a.bicliques[0].left, vec![4]);
        assert_eq!(a.bicliques[1].left, vec![0, 1]);
        assert_eq!(a.bicliques[1].right, vec![2, 3]);
    }

    #[test]
    fn size_mismatch_rejected() {
        let m = AdjacencyMatrix::new(3);
        let dec = BicliqueDecomposition::new(2, "test");
        assert!(validate_decomposition(&dec, &m).is_err());
    }
}
