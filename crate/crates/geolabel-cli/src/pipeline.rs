//! Scheme dispatch: builds a label set for an instance, picking the encoder
//! that matches the family, and reports decomposition metrics where they
//! exist.

use geolabel::biclique::{coalesce, metrics, star_decomposition, BicliqueDecomposition};
use geolabel::error::{Error, Result};
use geolabel::instance::{adjacency_matrix, representative_points, Family, Instance, Payload};
use geolabel::labeling::{
    bipartize, compose_predicate_labels, encode_from_bicliques, encode_relation_bicliques,
    sfc_order, switch_encode, LabelSet,
};
use geolabel::partition_tree::{build_two_phase_tree, BuildConfig};
use geolabel::predicate::{
    point_line_spec, segment_intersection_spec, unit_disk_spec, Phi, Poly, PredicateSpec,
};
use geolabel::rat::{q, sign, Pt};
use geolabel::semilinear::{boxicity_labels, semilinear_labels};
use geolabel::visibility::{capped_labels, hst_labels, polygon_labels, BichromaticSegments, CrossEncoder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    PartitionTree,
    Composed,
    Semilinear,
    Hst,
    Capped,
    PolygonLabels,
    Star,
    SwitchRows,
}

pub const ALL_SCHEMES: [Scheme; 8] = [
    Scheme::PartitionTree,
    Scheme::Composed,
    Scheme::Semilinear,
    Scheme::Hst,
    Scheme::Capped,
    Scheme::PolygonLabels,
    Scheme::Star,
    Scheme::SwitchRows,
];

impl Scheme {
    pub fn tag(&self) -> &'static str {
        match self {
            Scheme::PartitionTree => "partition_tree",
            Scheme::Composed => "composed",
            Scheme::Semilinear => "semilinear",
            Scheme::Hst => "hst",
            Scheme::Capped => "capped",
            Scheme::PolygonLabels => "polygon_labels",
            Scheme::Star => "star",
            Scheme::SwitchRows => "switch_rows",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Scheme> {
        ALL_SCHEMES
            .iter()
            .copied()
            .find(|s| s.tag() == tag)
            .ok_or_else(|| Error::arg(format!("unknown scheme '{tag}'")))
    }
}

/// Dedicated (non-baseline) scheme for each family.
pub fn dedicated_scheme(family: Family) -> Option<Scheme> {
    match family {
        Family::UnitDisk => Some(Scheme::PartitionTree),
        Family::SegmentIntersection => Some(Scheme::Composed),
        Family::SemilinearDnf | Family::Boxicity => Some(Scheme::Semilinear),
        Family::BichromaticSegments => Some(Scheme::Hst),
        Family::TerrainVisibility | Family::CappedAbstract => Some(Scheme::Capped),
        Family::PolygonVisibility => Some(Scheme::PolygonLabels),
        Family::Disk | Family::PointHalfplane => None,
    }
}

pub fn compatible_schemes(family: Family) -> Vec<Scheme> {
    let mut out = Vec::new();
    if let Some(s) = dedicated_scheme(family) {
        out.push(s);
    }
    out.push(Scheme::Star);
    out.push(Scheme::SwitchRows);
    out
}

pub fn valid_pairs_help() -> String {
    let families = [
        Family::UnitDisk,
        Family::Disk,
        Family::PointHalfplane,
        Family::SegmentIntersection,
        Family::SemilinearDnf,
        Family::Boxicity,
        Family::PolygonVisibility,
        Family::TerrainVisibility,
        Family::CappedAbstract,
        Family::BichromaticSegments,
    ];
    families
        .iter()
        .map(|f| {
            let schemes: Vec<&str> = compatible_schemes(*f).iter().map(|s| s.tag()).collect();
            format!("{}: {}", f.tag(), schemes.join(", "))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Partition-tree parameters, defaulted to the library's build defaults.
#[derive(Clone, Copy, Debug)]
pub struct SchemeParams {
    pub d: usize,
    pub r: usize,
    pub n_exp: (u32, u32),
    pub leaf_point_cap: usize,
}

impl Default for SchemeParams {
    fn default() -> Self {
        let c = BuildConfig::default();
        SchemeParams {
            d: c.d,
            r: c.r,
            n_exp: c.n_exp,
            leaf_point_cap: c.leaf_point_cap,
        }
    }
}

impl SchemeParams {
    fn build_config(&self, seed: u64) -> BuildConfig {
        BuildConfig {
            d: self.d,
            r: self.r,
            n_exp: self.n_exp,
            leaf_point_cap: self.leaf_point_cap,
            seed,
        }
    }
}

#[derive(Debug)]
pub struct BuildOutput {
    pub labels: LabelSet,
    /// 0 when the scheme has no biclique decomposition.
    pub nu_max: usize,
    pub decomposition_size: usize,
}

/// Merged biclique decomposition for a unit-disk instance: every bipartition
/// piece gets its own two-phase partition tree; piece-local ids are remapped
/// into the global id space and the bicliques concatenated. Every unordered
/// pair lies in exactly one piece, so the merge partitions the edge set.
pub fn unit_disk_decomposition(
    inst: &Instance,
    params: &SchemeParams,
) -> Result<BicliqueDecomposition> {
    let pts = match &inst.payload {
        Payload::Points(p) => p,
        _ => return Err(Error::arg("partition_tree needs a unit_disk instance")),
    };
    let spec = unit_disk_spec();
    let mut dec = BicliqueDecomposition::new(inst.n, "bipartized two-phase trees");
    for (k, piece) in bipartize(inst.n)?.iter().enumerate() {
        let p_slice = &pts[piece.left.0..piece.left.1];
        let s_slice = &pts[piece.right.0..piece.right.1];
        let cfg = params.build_config(inst.seed.wrapping_add(1 + k as u64));
        let (_tree, pdec) = build_two_phase_tree(p_slice, s_slice, &spec, &cfg)?;
        let np = p_slice.len();
        let remap = |v: usize| {
            if v < np {
                piece.left.0 + v
            } else {
                piece.right.0 + (v - np)
            }
        };
        for b in &pdec.bicliques {
            dec.push(
                b.left.iter().map(|&v| remap(v)).collect(),
                b.right.iter().map(|&v| remap(v)).collect(),
            );
        }
    }
    // Leaf-level emissions arrive one pair at a time; canonicalizing fuses
    // every group with a shared side back into a single biclique.
    let dec = coalesce(&dec);
    dec.check_well_formed()?;
    Ok(dec)
}

/// f((m, q), (x, y)) = m x + q - y >= 0: the point on or below the line.
/// Mirror of point_line_spec for segments stored with descending x, where
/// the orientation sign is the negation of the above-the-line sign.
fn point_line_below_spec() -> PredicateSpec {
    let zeros = || vec![0u32; 4];
    let mut mx = zeros();
    mx[0] = 1;
    mx[2] = 1;
    let mut qq = zeros();
    qq[1] = 1;
    let mut y = zeros();
    y[3] = 1;
    PredicateSpec {
        t: 2,
        polys: vec![
            Poly {
                terms: vec![(q(1), mx), (q(1), qq), (q(-1), y)],
            },
            Poly {
                terms: vec![(q(0), zeros())],
            },
        ],
        phi: Phi::ge(1),
        d_left: 2,
        d_right: 2,
    }
}

/// For orientation polynomial f_{i+1}: which argument supplies the segment
/// (line) and which endpoint of the other argument is the query point.
/// f1 = orient(a_0, b_0, c_1), f2 = orient(a_0, b_0, d_1),
/// f3 = orient(c_1, d_1, a_0), f4 = orient(c_1, d_1, b_0).
const ORIENT_ROLES: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Relation decomposition over 2n vertex copies for one composition slot.
/// Slot 2i covers ordered pairs (u, v) with f_{i+1}(u, v) >= 0; slot 2i+1
/// covers f_{i+1}(v, u) >= 0, matching the composed decoder's slot order.
pub fn segment_relation_decomposition(
    segs: &[(Pt, Pt)],
    slot: usize,
    seed: u64,
    params: &SchemeParams,
) -> Result<BicliqueDecomposition> {
    let n = segs.len();
    let poly = slot / 2;
    let reversed = slot % 2 == 1;
    let (poly_line_arg, ep) = ORIENT_ROLES[poly];
    // Which relation argument carries the line after accounting for the
    // reversed evaluation order of odd slots.
    let line_arg = if reversed { 1 - poly_line_arg } else { poly_line_arg };

    // orient(a, b, c) = (b.x - a.x) * (c.y - m c.x - q) for the line
    // y = m x + q through a and b; the leading factor's sign splits the
    // segments into an above-the-line group and a below-the-line group.
    let mut plus: Vec<(usize, Pt)> = Vec::new();
    let mut minus: Vec<(usize, Pt)> = Vec::new();
    for (w, (a, b)) in segs.iter().enumerate() {
        let dx = &b.x - &a.x;
        if sign(&dx) == 0 {
            return Err(Error::arg("vertical or degenerate segment"));
        }
        let m = (&b.y - &a.y) / &dx;
        let qq = &a.y - &(&m * &a.x);
        let line = Pt::new(m, qq);
        if sign(&dx) > 0 {
            plus.push((w, line));
        } else {
            minus.push((w, line));
        }
    }
    let points: Vec<Pt> = segs
        .iter()
        .map(|s| if ep == 0 { s.0.clone() } else { s.1.clone() })
        .collect();

    let mut dec = BicliqueDecomposition::new(2 * n, "segment orientation relation");
    for (gi, (group, spec)) in [(plus, point_line_spec()), (minus, point_line_below_spec())]
        .into_iter()
        .enumerate()
    {
        if group.is_empty() {
            continue;
        }
        let p: Vec<Pt> = group.iter().map(|(_, l)| l.clone()).collect();
        let cfg = params.build_config(
            seed.wrapping_add(0x100 * (slot as u64 + 1) + gi as u64),
        );
        let (_tree, pdec) = build_two_phase_tree(&p, &points, &spec, &cfg)?;
        let np = p.len();
        for b in &pdec.bicliques {
            let line_ids: Vec<usize> = b.left.iter().map(|&v| group[v].0).collect();
            let point_ids: Vec<usize> = b.right.iter().map(|&v| v - np).collect();
            let (first, second) = if line_arg == 0 {
                (line_ids, point_ids)
            } else {
                (point_ids, line_ids)
            };
            dec.push(first, second.into_iter().map(|v| v + n).collect());
        }
    }
    let dec = coalesce(&dec);
    dec.check_well_formed()?;
    Ok(dec)
}

fn composed_segment_labels(inst: &Instance, params: &SchemeParams) -> Result<BuildOutput> {
    let segs = match &inst.payload {
        Payload::Segments(s) => s,
        _ => return Err(Error::arg("composed needs a segment_intersection instance")),
    };
    let spec = segment_intersection_spec();
    let mut subsets = Vec::with_capacity(2 * spec.t);
    let mut nu_max = 0;
    let mut size = 0;
    for slot in 0..2 * spec.t {
        let dec = segment_relation_decomposition(segs, slot, inst.seed, params)?;
        let met = metrics(&dec);
        nu_max = nu_max.max(met.nu_max);
        size += met.size;
        subsets.push(encode_relation_bicliques(&dec)?);
    }
    let labels = compose_predicate_labels(&spec, subsets)?;
    Ok(BuildOutput {
        labels,
        nu_max,
        decomposition_size: size,
    })
}

pub fn build_labels(inst: &Instance, scheme: Scheme, params: &SchemeParams) -> Result<BuildOutput> {
    if !compatible_schemes(inst.family).contains(&scheme) {
        return Err(Error::arg(format!(
            "scheme '{}' is not valid for family '{}'; valid pairs — {}",
            scheme.tag(),
            inst.family.tag(),
            valid_pairs_help()
        )));
    }
    let plain = |labels: LabelSet| BuildOutput {
        labels,
        nu_max: 0,
        decomposition_size: 0,
    };
    Ok(match scheme {
        Scheme::PartitionTree => {
            let dec = unit_disk_decomposition(inst, params)?;
            let met = metrics(&dec);
            BuildOutput {
                labels: encode_from_bicliques(&dec)?,
                nu_max: met.nu_max,
                decomposition_size: met.size,
            }
        }
        Scheme::Composed => composed_segment_labels(inst, params)?,
        Scheme::Semilinear => match &inst.payload {
            Payload::Semilinear { dnf, points } => plain(semilinear_labels(points, dnf)?),
            Payload::Boxes(boxes) => plain(boxicity_labels(boxes)?),
            _ => return Err(Error::arg("semilinear needs a dnf or boxicity instance")),
        },
        Scheme::Hst => {
            let segs = BichromaticSegments::from_instance(inst)?;
            plain(hst_labels(&segs)?)
        }
        Scheme::Capped => match &inst.payload {
            Payload::Terrain(_) => {
                let m = adjacency_matrix(inst)?;
                let order: Vec<usize> = (0..inst.n).collect();
                plain(capped_labels(&m, &order)?)
            }
            Payload::Capped { matrix, order } => plain(capped_labels(matrix, order)?),
            _ => return Err(Error::arg("capped needs a terrain or capped instance")),
        },
        Scheme::PolygonLabels => match &inst.payload {
            Payload::Polygon(poly) => plain(polygon_labels(poly, &CrossEncoder::SwitchRows)?),
            _ => return Err(Error::arg("polygon_labels needs a polygon instance")),
        },
        Scheme::Star => {
            let m = adjacency_matrix(inst)?;
            let dec = star_decomposition(&m);
            let met = metrics(&dec);
            BuildOutput {
                labels: encode_from_bicliques(&dec)?,
                nu_max: met.nu_max,
                decomposition_size: met.size,
            }
        }
        Scheme::SwitchRows => {
            let m = adjacency_matrix(inst)?;
            let order = sfc_order(&representative_points(inst));
            plain(switch_encode(&m, &order)?)
        }
    })
}
