use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;
use crate::spatial::SegmentIndex;

use super::{GraphEdge, Network1D};

/// Parameters of the synthetic branching-tree generator.
#[derive(Debug, Clone)]
pub struct TreeParams<T> {
    /// Number of segment generations along the longest path.
    pub depth: usize,
    /// Probability that a growing tip splits into two.
    pub branch_prob: f64,
    pub length_min: T,
    pub length_max: T,
    pub radius: T,
    pub seed: u64,
    pub root: Vec3<T>,
    /// Overall growth direction.
    pub direction: Vec3<T>,
    /// Maximum deviation (radians) of a child direction from its parent.
    pub spread: T,
    /// Pull of every new direction toward `direction`.
    pub drift: T,
    /// Nodes other than the root must stay inside this box (shrunk by `min_separation`).
    pub bounds: (Vec3<T>, Vec3<T>),
    /// Minimum distance between non-adjacent segments.
    pub min_separation: T,
    pub n_e: usize,
    /// Potential prescribed at the root.
    pub root_value: T,
    /// Attempts per child before the tip is left as a leaf.
    pub max_retries: usize,
    /// Total rejected proposals tolerated before giving up.
    pub rejection_budget: usize,
}

impl<T: Real> TreeParams<T> {
    /// Tree growing down from the centre of the top face of the unit cube.
    pub fn unit_cube(depth: usize, seed: u64) -> Self {
        TreeParams {
            depth,
            branch_prob: 0.5,
            length_min: T::lit(0.02),
            length_max: T::lit(0.04),
            radius: T::lit(2e-3),
            seed,
            root: Vec3::new(T::lit(0.5), T::lit(0.5), T::one()),
            direction: Vec3::new(T::zero(), T::zero(), -T::one()),
            spread: T::lit(0.7),
            drift: T::lit(0.3),
            bounds: (Vec3::zero(), Vec3::new(T::one(), T::one(), T::one())),
            min_separation: T::lit(2e-3),
            n_e: 1,
            root_value: T::one(),
            max_retries: 8,
            rejection_budget: 1_000_000,
        }
    }
}

/// Grows a random tree generation by generation. The root is a Dirichlet node
/// and every leaf a Neumann tip. Deterministic for a fixed seed.
pub fn generate_random_tree<T: Real>(p: &TreeParams<T>) -> Result<Network1D<T>> {
    if p.depth == 0 {
        return Err(Error::InvalidParameter(
            "tree depth must be at least 1".into(),
        ));
    }
    if !(p.length_min > T::zero()) || p.length_max < p.length_min {
        return Err(Error::InvalidParameter(format!(
            "invalid segment length range [{}, {}]",
            p.length_min, p.length_max
        )));
    }
    if !(0.0..=1.0).contains(&p.branch_prob) {
        return Err(Error::InvalidParameter(format!(
            "branch probability {} outside [0, 1]",
            p.branch_prob
        )));
    }
    let global = p.direction.normalized();
    if !global.norm().is_finite() || global.norm() == T::zero() {
        return Err(Error::InvalidParameter("growth direction is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (lo, hi) = p.bounds;
    let m = Vec3::new(p.min_separation, p.min_separation, p.min_separation);
    let (inner_lo, inner_hi) = (lo + m, hi - m);
    let mut index = SegmentIndex::new(lo, hi, p.length_max.max(p.min_separation));

    let mut nodes = vec![p.root];
    let mut seg_nodes: Vec<(usize, usize)> = Vec::new();
    let mut rejections = 0usize;

    let mut propose = |rng: &mut ChaCha8Rng,
                       nodes: &mut Vec<Vec3<T>>,
                       seg_nodes: &mut Vec<(usize, usize)>,
                       index: &mut SegmentIndex<T>,
                       from: usize,
                       dir: Vec3<T>,
                       phase: f64|
     -> Result<Option<(usize, Vec3<T>)>> {
        let start = nodes[from];
        let (e1, e2) = dir.orthonormal_frame();
        for _ in 0..p.max_retries {
            let phi = T::lit(phase + rng.gen_range(-0.5..0.5) * std::f64::consts::PI);
            let theta = p.spread * T::lit(rng.gen::<f64>());
            let side = e1.scale(phi.cos()) + e2.scale(phi.sin());
            let d = (dir.scale(theta.cos()) + side.scale(theta.sin()) + global.scale(p.drift))
                .normalized();
            let len = p.length_min + (p.length_max - p.length_min) * T::lit(rng.gen::<f64>());
            let end = start + d.scale(len);
            let inside = (0..3).all(|k| end[k] >= inner_lo[k] && end[k] <= inner_hi[k]);
            let clear = inside
                && index
                    .segments_near_segment(&start, &end, p.min_separation)
                    .into_iter()
                    .all(|s| seg_nodes[s].0 == from || seg_nodes[s].1 == from);
            if clear {
                let id = nodes.len();
                nodes.push(end);
                seg_nodes.push((from, id));
                index.insert(start, end);
                return Ok(Some((id, d)));
            }
            rejections += 1;
            if rejections > p.rejection_budget {
                return Err(Error::Generation(format!(
                    "rejection budget of {} proposals exhausted after {} segments; try a smaller depth",
                    p.rejection_budget,
                    seg_nodes.len()
                )));
            }
        }
        Ok(None)
    };

    let first = propose(
        &mut rng,
        &mut nodes,
        &mut seg_nodes,
        &mut index,
        0,
        global,
        0.0,
    )?
    .ok_or_else(|| Error::Generation("could not place the root segment".into()))?;
    let mut frontier = vec![first];
    for _ in 1..p.depth {
        let mut next = Vec::new();
        for &(node, dir) in &frontier {
            let split = rng.gen::<f64>() < p.branch_prob;
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let children: &[f64] = if split {
                &[0.0, std::f64::consts::PI]
            } else {
                &[0.0]
            };
            for &off in children {
                if let Some(c) = propose(
                    &mut rng,
                    &mut nodes,
                    &mut seg_nodes,
                    &mut index,
                    node,
                    dir,
                    phase + off,
                )? {
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let edges = seg_nodes
        .iter()
        .map(|&(a, b)| GraphEdge {
            a,
            b,
            radius: p.radius,
            n_e: p.n_e,
        })
        .collect();
    let mut dirichlet = BTreeMap::new();
    dirichlet.insert(0, p.root_value);
    log::info!(
        "generated tree with {} nodes and {} segments ({} rejected proposals)",
        nodes.len(),
        seg_nodes.len(),
        rejections
    );
    Network1D::new(nodes, edges, dirichlet)
}
