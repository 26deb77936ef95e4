//! Recursive crosstwirl trees and lattice architecture planning.
//!
//! A recursive crosstwirl builds a large design from small ones: leaves
//! carry full twirls of contiguous qudit blocks, and every internal node
//! stitches its children together with a crosstwirl on a few qudits taken
//! from each child near their shared corner. On a D-dimensional hypercube
//! this specializes to the D-ary lattice crosstwirl tree, whose depth and
//! communication budgets have closed forms.
//!
//! Qudit ids are row-major over the hypercube grid; crosstwirl qudit
//! selection is deterministic (nearest to the shared corner, lowest id
//! first), so plans and budgets reproduce bit-identically.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::convert::compose_errors;
use crate::logdomain::ln_factorial;
use crate::{Error, Result};

/// Capacity guard: total qudits in a materialized plan.
pub const MAX_PLAN_QUDITS: u64 = 1 << 24;

/// An axis-aligned hypercube of qudits on the grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuditBox {
    /// Low corner, one coordinate per dimension.
    pub lo: Vec<u64>,
    /// Side length in qudits.
    pub side: u64,
}

impl QuditBox {
    pub fn num_qudits(&self, d: usize) -> u64 {
        self.side.pow(d as u32)
    }

    fn contains(&self, coord: &[u64]) -> bool {
        coord.iter().zip(&self.lo).all(|(&c, &l)| c >= l && c < l + self.side)
    }
}

/// Row-major qudit id of a grid coordinate.
pub fn coord_to_id(coord: &[u64], grid_side: u64) -> u64 {
    coord.iter().fold(0, |acc, &c| acc * grid_side + c)
}

/// Inverse of [`coord_to_id`].
pub fn id_to_coord(mut id: u64, grid_side: u64, d: usize) -> Vec<u64> {
    let mut out = vec![0u64; d];
    for i in (0..d).rev() {
        out[i] = id % grid_side;
        id /= grid_side;
    }
    out
}

/// One node of a recursive crosstwirl tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeNode {
    /// Path from the root (child indices), empty for the root.
    pub path: Vec<u32>,
    /// Subsystem of this node.
    pub subsystem: QuditBox,
    /// Child edges; empty marks a leaf. Edge i carries the crosstwirl
    /// qudit set S_i selected inside child i.
    pub children: Vec<ChildEdge>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChildEdge {
    /// Qudit ids contributed by this child to the parent's crosstwirl.
    pub s_set: Vec<u64>,
    pub child: TreeNode,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode)) {
        f(self);
        for e in &self.children {
            e.child.visit(f);
        }
    }
}

/// A recursive crosstwirl tree over a D-dimensional hypercube grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrosstwirlTree {
    pub d_dim: usize,
    pub grid_side: u64,
    pub m_total: u64,
    /// Crosstwirl width per child.
    pub ell: u64,
    pub root: TreeNode,
}

impl CrosstwirlTree {
    pub fn depth(&self) -> usize {
        let mut depth = 0;
        self.root.visit(&mut |n| depth = depth.max(n.path.len()));
        depth
    }

    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |n| {
            if n.is_leaf() {
                out.push(n);
            }
        });
        out
    }

    fn non_leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |n| {
            if !n.is_leaf() {
                out.push(n);
            }
        });
        out
    }

    /// Nodes at the given layer (path length).
    pub fn layer(&self, j: usize) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |n| {
            if n.path.len() == j {
                out.push(n);
            }
        });
        out
    }

    /// All crosstwirl qudit-ID unions, one per non-leaf node, with paths.
    pub fn crosstwirl_sets(&self) -> Vec<(Vec<u32>, Vec<u64>)> {
        self.non_leaves()
            .into_iter()
            .map(|n| {
                let mut ids: Vec<u64> =
                    n.children.iter().flat_map(|e| e.s_set.iter().copied()).collect();
                ids.sort_unstable();
                (n.path.clone(), ids)
            })
            .collect()
    }
}

fn integer_log2(v: u64) -> Option<u32> {
    (v.is_power_of_two()).then(|| v.trailing_zeros())
}

/// Enumerates qudit ids in a box (row-major order).
fn box_ids(b: &QuditBox, grid_side: u64, d: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(b.num_qudits(d) as usize);
    let mut coord = b.lo.clone();
    loop {
        out.push(coord_to_id(&coord, grid_side));
        // odometer increment within the box
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            coord[i] += 1;
            if coord[i] < b.lo[i] + b.side {
                break;
            }
            coord[i] = b.lo[i];
        }
    }
}

/// Selects the `ell` unused qudits of `child` nearest to `corner`
/// (Chebyshev distance, ties by id). Enumerating a small corner sub-box
/// suffices: the candidates must lie within Chebyshev radius r of the
/// corner once (r+1)^D ≥ ell + |used ∩ sub-box|, and growing the radius
/// until the box holds enough unused qudits is cheap.
fn select_corner_set(
    child: &QuditBox,
    corner: &[u64],
    ell: u64,
    grid_side: u64,
    d: usize,
    used: &HashSet<u64>,
) -> Vec<u64> {
    let mut radius = (ell as f64).powf(1.0 / d as f64).ceil() as u64 + 1;
    loop {
        radius = radius.min(child.side);
        // sub-box of side `radius` anchored at the child corner nearest `corner`
        let lo: Vec<u64> = (0..d)
            .map(|t| {
                if corner[t] <= child.lo[t] {
                    child.lo[t]
                } else {
                    (child.lo[t] + child.side).saturating_sub(radius).max(child.lo[t])
                }
            })
            .collect();
        let sub = QuditBox { lo, side: radius };
        let mut cands: Vec<(u64, u64)> = box_ids(&sub, grid_side, d)
            .into_iter()
            .filter(|id| !used.contains(id))
            .map(|id| {
                let c = id_to_coord(id, grid_side, d);
                let dist = c
                    .iter()
                    .zip(corner)
                    .map(|(&x, &y)| x.abs_diff(y))
                    .max()
                    .unwrap_or(0);
                (dist, id)
            })
            .collect();
        if (cands.len() as u64) < ell && radius < child.side {
            radius *= 2;
            continue;
        }
        cands.sort_unstable();
        cands.truncate(ell as usize);
        assert!(
            cands.len() as u64 == ell,
            "child too small to supply {ell} crosstwirl qudits"
        );
        return cands.into_iter().map(|(_, id)| id).collect();
    }
}

/// Builds the complete 2^D-ary lattice crosstwirl tree.
///
/// Leaf side is 2^s with s = ⌈(1/D)·log2(8ℓ)⌉, making every leaf hold
/// between 8ℓ and 2^(D+3)ℓ qudits. When the whole system is below
/// 2^(D+3)·ℓ qudits a single-node tree is returned (one full twirl).
pub fn build_dlct(m_total: u64, d_dim: usize, ell: u64, q: u64) -> Result<CrosstwirlTree> {
    if q < 2 {
        return Err(Error::Domain("q must be >= 2".into()));
    }
    if d_dim == 0 || ell == 0 {
        return Err(Error::Domain("need D >= 1 and ell >= 1".into()));
    }
    if m_total > MAX_PLAN_QUDITS {
        return Err(Error::Capacity(format!("M_total {m_total} exceeds plan cap {MAX_PLAN_QUDITS}")));
    }
    let dx = integer_log2(m_total)
        .ok_or_else(|| Error::Domain(format!("M_total = {m_total} is not a power of 2^D")))?;
    if dx as usize % d_dim != 0 {
        return Err(Error::Domain(format!(
            "M_total = 2^{dx} is not a power of 2^D for D = {d_dim}"
        )));
    }
    let x = dx as u64 / d_dim as u64;
    let grid_side = 1u64 << x;

    let root_box = QuditBox { lo: vec![0; d_dim], side: grid_side };
    // below threshold: one full twirl
    let threshold = (1u64 << (d_dim + 3)) * ell;
    if m_total < threshold {
        return Ok(CrosstwirlTree {
            d_dim,
            grid_side,
            m_total,
            ell,
            root: TreeNode { path: vec![], subsystem: root_box, children: vec![] },
        });
    }
    // s = ⌈(1/D)·log2(8ℓ)⌉ via integers: smallest s with 2^(D·s) ≥ 8ℓ
    let mut s = 0u64;
    while (1u64 << (d_dim as u64 * s)) < 8 * ell {
        s += 1;
    }
    let s = s.min(x);

    // build the complete tree of boxes
    fn split(node_box: &QuditBox, d: usize, leaf_side: u64, path: Vec<u32>) -> TreeNode {
        if node_box.side <= leaf_side {
            return TreeNode { path, subsystem: node_box.clone(), children: vec![] };
        }
        let half = node_box.side / 2;
        let mut children = Vec::with_capacity(1 << d);
        for i in 0..(1u32 << d) {
            let lo: Vec<u64> = (0..d)
                .map(|t| node_box.lo[t] + if (i >> t) & 1 == 1 { half } else { 0 })
                .collect();
            let mut cpath = path.clone();
            cpath.push(i);
            children.push(ChildEdge {
                s_set: vec![],
                child: split(&QuditBox { lo, side: half }, d, leaf_side, cpath),
            });
        }
        TreeNode { path, subsystem: node_box.clone(), children }
    }
    let mut root = split(&root_box, d_dim, 1 << s, vec![]);

    // assign crosstwirl sets bottom-up (deepest layers first), matching
    // the temporal order of the protocol; a global used-set keeps every
    // crosstwirl on fresh qudits
    let mut used: HashSet<u64> = HashSet::new();
    let depth = {
        let mut d0 = 0;
        root.visit(&mut |n| d0 = d0.max(n.path.len()));
        d0
    };
    for layer in (0..depth).rev() {
        // collect mutable references layer by layer via explicit walk
        fn assign_layer(
            node: &mut TreeNode,
            layer: usize,
            ell: u64,
            grid_side: u64,
            d: usize,
            used: &mut HashSet<u64>,
        ) {
            if node.path.len() == layer && !node.is_leaf() {
                let half = node.subsystem.side / 2;
                let center: Vec<u64> = node.subsystem.lo.iter().map(|&l| l + half).collect();
                for e in &mut node.children {
                    // the child corner adjacent to the shared center
                    let corner: Vec<u64> = (0..d)
                        .map(|t| {
                            if e.child.subsystem.lo[t] < center[t] {
                                center[t] - 1
                            } else {
                                center[t]
                            }
                        })
                        .collect();
                    let s_set =
                        select_corner_set(&e.child.subsystem, &corner, ell, grid_side, d, used);
                    used.extend(s_set.iter().copied());
                    e.s_set = s_set;
                }
                return;
            }
            for e in &mut node.children {
                assign_layer(&mut e.child, layer, ell, grid_side, d, used);
            }
        }
        assign_layer(&mut root, layer, ell, grid_side, d_dim, &mut used);
    }

    Ok(CrosstwirlTree { d_dim, grid_side, m_total, ell, root })
}

/// Result of the parallelizability check: either all crosstwirl sets are
/// pairwise disjoint, or a witness of the first overlap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParallelCertificate {
    pub parallelizable: bool,
    /// (qudit id, first owner path, second owner path) on failure.
    pub overlap: Option<(u64, Vec<u32>, Vec<u32>)>,
}

pub fn is_parallelizable(tree: &CrosstwirlTree) -> ParallelCertificate {
    let mut owner: HashMap<u64, Vec<u32>> = HashMap::new();
    for (path, ids) in tree.crosstwirl_sets() {
        for id in ids {
            if let Some(prev) = owner.get(&id) {
                return ParallelCertificate {
                    parallelizable: false,
                    overlap: Some((id, prev.clone(), path)),
                };
            }
            owner.insert(id, path.clone());
        }
    }
    ParallelCertificate { parallelizable: true, overlap: None }
}

/// Largest number of distinct crosstwirls any single leaf participates in.
pub fn max_crosstwirls_per_leaf(tree: &CrosstwirlTree) -> usize {
    let sets = tree.crosstwirl_sets();
    tree.leaves()
        .iter()
        .map(|leaf| {
            sets.iter()
                .filter(|(_, ids)| {
                    ids.iter().any(|&id| {
                        leaf.subsystem.contains(&id_to_coord(id, tree.grid_side, tree.d_dim))
                    })
                })
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// Depth function handle d(r, q, K, δ): circuit depth of the underlying
/// design scheme on r qudits of local dimension q with relative error δ.
pub type DepthFn<'a> = &'a dyn Fn(u64, u64, u64, f64) -> f64;

/// Placeholder depth handle r·K·⌈log2(1/δ)⌉. This shape is a stand-in for
/// an externally supplied design scheme, not a statement about any
/// particular construction.
pub fn placeholder_depth_fn(r: u64, _q: u64, k: u64, delta: f64) -> f64 {
    r as f64 * k as f64 * (1.0 / delta).log2().ceil().max(1.0)
}

/// Total depth of the recursive crosstwirl under a per-node depth handle.
/// Parallelizable trees pay one leaf round plus one crosstwirl round;
/// otherwise each layer is sequential.
pub fn depth_budget(
    tree: &CrosstwirlTree,
    q: u64,
    k: u64,
    delta: f64,
    depth_fn: DepthFn,
) -> f64 {
    let node_size = |n: &TreeNode| -> u64 {
        if n.is_leaf() {
            n.subsystem.num_qudits(tree.d_dim)
        } else {
            n.children.iter().map(|e| e.s_set.len() as u64).sum()
        }
    };
    if is_parallelizable(tree).parallelizable {
        let leaf_max = tree
            .leaves()
            .iter()
            .map(|n| depth_fn(node_size(n), q, k, delta))
            .fold(0.0f64, f64::max);
        let cross_max = tree
            .non_leaves()
            .iter()
            .map(|n| depth_fn(node_size(n), q, k, delta))
            .fold(0.0f64, f64::max);
        leaf_max + cross_max
    } else {
        (0..=tree.depth())
            .map(|j| {
                tree.layer(j)
                    .iter()
                    .map(|n| depth_fn(node_size(n), q, k, delta))
                    .fold(0.0f64, f64::max)
            })
            .sum()
    }
}

/// A contiguous region of the lattice with its boundary size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Region {
    pub qudits: Vec<u64>,
    pub boundary_count: u64,
}

impl Region {
    /// Validates contiguity (lattice-neighbor connectivity) and counts the
    /// boundary: qudits of S adjacent to a qudit outside S.
    pub fn new(mut qudits: Vec<u64>, grid_side: u64, d: usize) -> Result<Region> {
        qudits.sort_unstable();
        qudits.dedup();
        if qudits.iter().any(|&id| id >= grid_side.pow(d as u32)) {
            return Err(Error::Domain("region qudit id outside the lattice".into()));
        }
        let set: HashSet<u64> = qudits.iter().copied().collect();
        if qudits.is_empty() {
            return Ok(Region { qudits, boundary_count: 0 });
        }
        let neighbors = |id: u64| -> Vec<u64> {
            let coord = id_to_coord(id, grid_side, d);
            let mut out = Vec::with_capacity(2 * d);
            for t in 0..d {
                if coord[t] > 0 {
                    let mut c = coord.clone();
                    c[t] -= 1;
                    out.push(coord_to_id(&c, grid_side));
                }
                if coord[t] + 1 < grid_side {
                    let mut c = coord.clone();
                    c[t] += 1;
                    out.push(coord_to_id(&c, grid_side));
                }
            }
            out
        };
        // BFS connectivity
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([qudits[0]]);
        seen.insert(qudits[0]);
        while let Some(id) = queue.pop_front() {
            for nb in neighbors(id) {
                if set.contains(&nb) && seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        if seen.len() != qudits.len() {
            return Err(Error::Domain("region is not contiguous on the lattice".into()));
        }
        let boundary_count = qudits
            .iter()
            .filter(|&&id| neighbors(id).iter().any(|nb| !set.contains(nb)))
            .count() as u64;
        Ok(Region { qudits, boundary_count })
    }
}

/// A planned lattice crosstwirl with its error and resource accounting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticePlan {
    pub d_dim: usize,
    pub m_total: u64,
    pub q: u64,
    pub k: u64,
    pub eps: f64,
    /// Crosstwirl width from ℓ = ⌈log_q(150·M·K!^(2^D)·K·2^(D/2)/ε)⌉.
    pub ell: u64,
    /// Logarithmic leaf side length.
    pub s: u64,
    pub leaf_count: u64,
    pub leaf_qudits: u64,
    /// Per-constituent relative error ε/(10P) (the value that makes the
    /// composed-error check close).
    pub delta: f64,
    /// The ε/(5M) variant appearing in the depth argument of the source
    /// statement; emitted for comparison, not used in the error check.
    pub delta_statement: f64,
    /// Per-crosstwirl relative error implied by the chosen ℓ.
    pub crosstwirl_eps: f64,
    /// (1+δ)^(2P-1)·(1+ε_ct)^(P-1) - 1; guaranteed ≤ ε.
    pub composed_error: f64,
    pub parallelizable: bool,
    pub depth_budget: f64,
    /// True when the system was too small and a single full twirl is the
    /// whole plan.
    pub single_twirl_fallback: bool,
    pub warnings: Vec<String>,
    pub tree: CrosstwirlTree,
}

/// Plans a parallelizable D-LCT achieving relative error ε.
pub fn plan_lattice(
    m_total: u64,
    d_dim: usize,
    k: u64,
    q: u64,
    eps: f64,
    depth_fn: Option<DepthFn>,
) -> Result<LatticePlan> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must be in (0,1), got {eps}")));
    }
    if k == 0 {
        return Err(Error::Domain("K must be >= 1".into()));
    }
    let lnq = (q as f64).ln();
    // ℓ = ⌈log_q(150·M·K!^(2^D)·K·2^(D/2)/ε)⌉, evaluated in log domain
    let ln_arg = 150f64.ln()
        + (m_total as f64).ln()
        + (1u64 << d_dim) as f64 * ln_factorial(k)
        + (k as f64).ln()
        + d_dim as f64 / 2.0 * 2f64.ln()
        - eps.ln();
    let ell = (ln_arg / lnq).ceil().max(1.0) as u64;

    let mut warnings = vec![
        "ell uses the logarithmic form log_q(150 M K!^(2^D) K 2^(D/2) / eps); the headline \
         statement omits the log"
            .to_string(),
        "per-crosstwirl error uses the K!^(2^D) constant of the planning bound; the standalone \
         relative-error theorem for a 2^D-party crosstwirl carries K!^(2·2^D)"
            .to_string(),
    ];

    let threshold = (1u64 << (d_dim + 3)) * ell;
    let single = m_total < threshold;
    if single {
        warnings.push(format!(
            "system of {m_total} qudits is below 2^(D+3)·ell = {threshold}; planning a single \
             full twirl"
        ));
    }
    let tree = build_dlct(m_total, d_dim, ell, q)?;
    let leaves = tree.leaves();
    let p_count = leaves.len() as u64;
    let leaf_qudits = leaves[0].subsystem.num_qudits(d_dim);
    let s = integer_log2(leaves[0].subsystem.side).expect("leaf side is a power of two") as u64;

    let delta = if single { eps } else { eps / (10.0 * p_count as f64) };
    let delta_statement = eps / (5.0 * m_total as f64);

    // actual per-crosstwirl error at the chosen ℓ
    let crosstwirl_eps = (25f64.ln()
        + (1u64 << d_dim) as f64 * ln_factorial(k)
        + (k as f64).ln()
        + d_dim as f64 / 2.0 * 2f64.ln()
        - ell as f64 * lnq)
        .exp();
    if !single {
        let budget = eps / (6.0 * p_count as f64);
        if crosstwirl_eps > budget * (1.0 + 1e-12) {
            return Err(Error::Inconsistency(format!(
                "chosen ell = {ell} leaves per-crosstwirl error {crosstwirl_eps} above budget \
                 {budget}"
            )));
        }
    }

    let composed_error = if single {
        delta
    } else {
        let mut parts = vec![delta; (2 * p_count - 1) as usize];
        parts.extend(vec![crosstwirl_eps; (p_count - 1) as usize]);
        compose_errors(&parts, 0.0)?
    };
    if composed_error > eps * (1.0 + 1e-12) {
        return Err(Error::Inconsistency(format!(
            "composed error {composed_error} exceeds budget {eps}"
        )));
    }

    let cert = is_parallelizable(&tree);
    if !cert.parallelizable {
        return Err(Error::Inconsistency(format!(
            "constructed D-LCT is not parallelizable: {:?}",
            cert.overlap
        )));
    }

    let default_fn = placeholder_depth_fn;
    let df: DepthFn = depth_fn.unwrap_or(&default_fn);
    // two rounds of the constituent scheme on the worst-case leaf size
    let depth = 2.0 * df((1u64 << (d_dim + 3)) * ell, q, k, delta);
    if depth_fn.is_none() {
        warnings.push(
            "depth budget uses the built-in placeholder depth handle r·K·ceil(log2(1/delta)), \
             not a concrete scheme"
                .to_string(),
        );
    }

    Ok(LatticePlan {
        d_dim,
        m_total,
        q,
        k,
        eps,
        ell,
        s,
        leaf_count: p_count,
        leaf_qudits,
        delta,
        delta_statement,
        crosstwirl_eps,
        composed_error,
        parallelizable: true,
        depth_budget: depth,
        single_twirl_fallback: single,
        warnings,
        tree,
    })
}

/// Quantum-communication budget (in qubits/ebits) between a contiguous
/// region and its complement for a lattice plan:
/// ⌈#(∂S)/(2^(D+1)ℓ)^((D-1)/D)⌉·(2^(D+1)+1)·ℓ·log2(q).
pub fn comm_budget(plan: &LatticePlan, region: &Region) -> f64 {
    let d = plan.d_dim as f64;
    let ell = plan.ell as f64;
    if region.boundary_count == 0 {
        return 0.0;
    }
    let denom = ((2f64.powf(d + 1.0)) * ell).powf((d - 1.0) / d);
    let blocks = (region.boundary_count as f64 / denom).ceil();
    blocks * (2f64.powf(d + 1.0) + 1.0) * ell * (plan.q as f64).log2()
}

/// General-tree communication accounting: boundary-leaf dimensions plus
/// 2ℓ·log2(q) per crosstwirl whose qudits straddle the region boundary.
pub fn comm_budget_general(tree: &CrosstwirlTree, region: &Region, q: u64) -> f64 {
    let set: HashSet<u64> = region.qudits.iter().copied().collect();
    let log2q = (q as f64).log2();
    let mut total = 0.0;
    for leaf in tree.leaves() {
        let ids = box_ids(&leaf.subsystem, tree.grid_side, tree.d_dim);
        let inside = ids.iter().filter(|id| set.contains(id)).count();
        if inside > 0 && inside < ids.len() {
            total += ids.len() as f64 * log2q;
        }
    }
    for (_, ids) in tree.crosstwirl_sets() {
        let inside = ids.iter().filter(|id| set.contains(id)).count();
        if inside > 0 && inside < ids.len() {
            total += 2.0 * tree.ell as f64 * log2q;
        }
    }
    total
}

/// CSV layer schedule: one row per node, layer by layer.
pub fn plan_schedule_csv(plan: &LatticePlan) -> String {
    let mut out = String::from("layer,path,kind,num_qudits,s_set_ids\n");
    for j in 0..=plan.tree.depth() {
        for node in plan.tree.layer(j) {
            let kind = if node.is_leaf() { "leaf_twirl" } else { "crosstwirl" };
            let nq = node.subsystem.num_qudits(plan.d_dim);
            let sset = node
                .children
                .iter()
                .flat_map(|e| e.s_set.iter().map(|id| id.to_string()))
                .collect::<Vec<_>>()
                .join(";");
            let path =
                node.path.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(".");
            out.push_str(&format!("{j},{path},{kind},{nq},{sset}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dlct_examples() {
        // D=1, M=1024, ell=22 → s=8, leaf 256, P=4, depth 2
        let t = build_dlct(1024, 1, 22, 2).unwrap();
        assert_eq!(t.depth(), 2);
        let leaves = t.leaves();
        assert_eq!(leaves.len(), 4);
        assert_eq!(leaves[0].subsystem.num_qudits(1), 256);

        // D=2, M=256, ell=2 → s=2, leaf 16 qudits, P=16, depth 2
        let t = build_dlct(256, 2, 2, 2).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.leaves().len(), 16);
        assert_eq!(t.leaves()[0].subsystem.num_qudits(2), 16);
    }

    #[test]
    fn dlct_below_threshold_single_leaf() {
        // M < 2^(D+3)·ell → depth 0
        let t = build_dlct(64, 1, 22, 2).unwrap();
        assert_eq!(t.depth(), 0);
        assert!(t.root.is_leaf());
    }

    #[test]
    fn dlct_rejects_bad_sizes() {
        assert!(matches!(build_dlct(1000, 1, 4, 2), Err(Error::Domain(_))));
        // 2^5 is not a power of 2^2
        assert!(matches!(build_dlct(32, 2, 1, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn tree_partitions_qudits() {
        let t = build_dlct(256, 2, 2, 2).unwrap();
        let mut seen = HashSet::new();
        for leaf in t.leaves() {
            for id in box_ids(&leaf.subsystem, t.grid_side, t.d_dim) {
                assert!(seen.insert(id), "qudit {id} in two leaves");
            }
        }
        assert_eq!(seen.len(), 256);
    }

    #[test]
    fn dlct_is_parallelizable_and_s_sets_sit_in_children() {
        for (m, d, ell) in [(1024u64, 1usize, 22u64), (256, 2, 2), (4096, 2, 3), (512, 1, 8)] {
            let t = build_dlct(m, d, ell, 2).unwrap();
            assert!(is_parallelizable(&t).parallelizable, "M={m} D={d} ell={ell}");
            // S-set sizes and containment
            fn check(node: &TreeNode, t: &CrosstwirlTree) {
                for e in &node.children {
                    assert_eq!(e.s_set.len() as u64, t.ell);
                    for &id in &e.s_set {
                        let c = id_to_coord(id, t.grid_side, t.d_dim);
                        assert!(e.child.subsystem.contains(&c));
                    }
                    check(&e.child, t);
                }
            }
            check(&t.root, &t);
            assert!(max_crosstwirls_per_leaf(&t) <= 2, "M={m} D={d} ell={ell}");
        }
    }

    #[test]
    fn adversarial_overlap_is_detected() {
        let mut t = build_dlct(1024, 1, 22, 2).unwrap();
        // corrupt: make one child reuse a qudit from a sibling's set
        let stolen = t.root.children[0].s_set[0];
        t.root.children[1].s_set[0] = stolen;
        let cert = is_parallelizable(&t);
        assert!(!cert.parallelizable);
        assert_eq!(cert.overlap.unwrap().0, stolen);
    }

    #[test]
    fn plan_example_d1() {
        // D=1, M=1024, K=2, q=2, ε=0.5 → ℓ=22, P=4, leaf=256
        let plan = plan_lattice(1024, 1, 2, 2, 0.5, None).unwrap();
        assert_eq!(plan.ell, 22);
        assert_eq!(plan.leaf_count, 4);
        assert_eq!(plan.leaf_qudits, 256);
        assert!(plan.parallelizable);
        assert!(plan.composed_error <= 0.5);
        assert!(!plan.single_twirl_fallback);
        assert!((plan.delta - 0.5 / 40.0).abs() < 1e-15);
    }

    #[test]
    fn plan_k1_formula() {
        // K=1 → ℓ = ⌈log_q(150·M·2^(D/2)/ε)⌉
        let plan = plan_lattice(1024, 1, 1, 2, 0.25, None).unwrap();
        let expect = ((150.0 * 1024.0 * 2f64.sqrt() / 0.25).log2()).ceil() as u64;
        assert_eq!(plan.ell, expect);
    }

    #[test]
    fn plan_monotonicity() {
        let e1 = plan_lattice(1024, 1, 2, 2, 0.5, None).unwrap().ell;
        let e2 = plan_lattice(1024, 1, 2, 2, 0.1, None).unwrap().ell;
        assert!(e2 >= e1, "ell must not shrink as eps tightens");
        let e3 = plan_lattice(4096, 1, 2, 2, 0.5, None).unwrap().ell;
        assert!(e3 >= e1, "ell must not shrink as M grows");
        let e4 = plan_lattice(1024, 1, 3, 2, 0.5, None).unwrap().ell;
        assert!(e4 >= e1, "ell must not shrink as K grows");
    }

    #[test]
    fn comm_budget_d1_closed_form() {
        let plan = plan_lattice(1024, 1, 2, 2, 0.5, None).unwrap();
        // interior interval: boundary = 2 → 10·ℓ·log2(q)
        let region = Region::new((100..200).collect(), plan.tree.grid_side, 1).unwrap();
        assert_eq!(region.boundary_count, 2);
        let budget = comm_budget(&plan, &region);
        assert!((budget - 10.0 * plan.ell as f64).abs() < 1e-9);
        // whole lattice: empty boundary → 0
        let all = Region::new((0..1024).collect(), plan.tree.grid_side, 1).unwrap();
        assert_eq!(all.boundary_count, 0);
        assert_eq!(comm_budget(&plan, &all), 0.0);
    }

    #[test]
    fn comm_budget_d2_example() {
        // D=2, ℓ=2, q=2, #∂S=16 → ⌈16/(2³·2)^½⌉·9·2 = 72
        let t = build_dlct(256, 2, 2, 2).unwrap();
        let plan = LatticePlan {
            d_dim: 2,
            m_total: 256,
            q: 2,
            k: 1,
            eps: 0.5,
            ell: 2,
            s: 2,
            leaf_count: 16,
            leaf_qudits: 16,
            delta: 0.1,
            delta_statement: 0.1,
            crosstwirl_eps: 0.0,
            composed_error: 0.0,
            parallelizable: true,
            depth_budget: 0.0,
            single_twirl_fallback: false,
            warnings: vec![],
            tree: t,
        };
        // 5x5 square interior block: boundary = 16
        let mut ids = Vec::new();
        for x in 3..8u64 {
            for y in 3..8u64 {
                ids.push(coord_to_id(&[x, y], 16));
            }
        }
        let region = Region::new(ids, 16, 2).unwrap();
        assert_eq!(region.boundary_count, 16);
        let budget = comm_budget(&plan, &region);
        assert!((budget - 72.0).abs() < 1e-9, "got {budget}");
    }

    #[test]
    fn region_contiguity_enforced() {
        assert!(Region::new(vec![0, 5], 16, 1).is_err());
        assert!(Region::new(vec![0, 1, 2], 16, 1).is_ok());
        // 2D: L-shape is contiguous
        let ids = vec![
            coord_to_id(&[0, 0], 4),
            coord_to_id(&[0, 1], 4),
            coord_to_id(&[1, 0], 4),
        ];
        assert!(Region::new(ids, 4, 2).is_ok());
    }

    #[test]
    fn depth_budget_forms() {
        // depth-0 tree: just the leaf cost
        let t = build_dlct(64, 1, 22, 2).unwrap();
        let constant = |_r: u64, _q: u64, _k: u64, _d: f64| 7.0;
        assert_eq!(depth_budget(&t, 2, 2, 0.1, &constant), 7.0);

        // parallelizable D-LCT with constant depth: 2c
        let t = build_dlct(1024, 1, 8, 2).unwrap();
        assert_eq!(depth_budget(&t, 2, 2, 0.1, &constant), 14.0);

        // non-parallelizable 3-layer tree with constant depth: 3c
        let mut t3 = build_dlct(1024, 1, 22, 2).unwrap();
        assert_eq!(t3.depth(), 2);
        let stolen = t3.root.children[0].s_set[0];
        // force an overlap to defeat parallelization
        t3.root.children[0].child.children[0].s_set[0] = stolen;
        assert!(!is_parallelizable(&t3).parallelizable);
        assert_eq!(depth_budget(&t3, 2, 2, 0.1, &constant), 21.0);
    }

    #[test]
    fn schedule_csv_has_all_nodes() {
        let plan = plan_lattice(1024, 1, 2, 2, 0.5, None).unwrap();
        let csv = plan_schedule_csv(&plan);
        // 1 root + 2 + 4 leaves = 7 nodes + header
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,,crosstwirl,1024,"));
    }
}
