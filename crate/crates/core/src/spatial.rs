//! Exact k-nearest-neighbor queries over point sets.
//!
//! A kd-tree with median splits carries the estimator-facing contract:
//! results are exactly those of a brute-force scan, with equidistant
//! neighbors broken by lowest point index. Above [`KD_TREE_MAX_DIM`]
//! dimensions the tree degrades to linear scans anyway, so the index
//! switches to brute force automatically. The brute-force path is also
//! exported as the test oracle.

use crate::numerics::Matrix;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// kd-trees stop paying off beyond this dimension.
pub const KD_TREE_MAX_DIM: usize = 15;

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable nearest-neighbor index over the rows of a sample matrix.
#[derive(Debug)]
pub struct NeighborIndex<'a, S: Scalar> {
    points: &'a Matrix<S>,
    // Point ids, partitioned by the tree; empty when brute force is used.
    order: Vec<u32>,
    nodes: Vec<Node>,
    brute_force: bool,
}

/// Candidate ordering: distance first, lowest index wins ties.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cand {
    dist2: f64,
    id: usize,
}

impl Eq for Cand {}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn dist2<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    let mut acc = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.to_f64_lossy()
}

impl<'a, S: Scalar> NeighborIndex<'a, S> {
    /// Build an index over all rows of `points`.
    pub fn build(points: &'a Matrix<S>) -> Result<Self> {
        let n = points.rows();
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: n });
        }
        if !points.all_finite() {
            return Err(Error::NonFinite("points passed to NeighborIndex::build".into()));
        }
        let d = points.cols();
        if d > KD_TREE_MAX_DIM {
            return Ok(NeighborIndex {
                points,
                order: Vec::new(),
                nodes: Vec::new(),
                brute_force: true,
            });
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::new();
        build_node(points, &mut order, 0, n, &mut nodes);
        Ok(NeighborIndex {
            points,
            order,
            nodes,
            brute_force: false,
        })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    /// The k nearest neighbors of point `query_id`, excluding the point
    /// itself. Returns `(point_id, euclidean_distance)` pairs with
    /// non-decreasing distances; exact, ties broken by lowest id.
    pub fn knn_excluding_self(&self, query_id: usize, k: usize) -> Result<Vec<(usize, f64)>> {
        let n = self.points.rows();
        if query_id >= n {
            return Err(Error::DimensionMismatch(format!(
                "query id {query_id} out of range for {n} points"
            )));
        }
        if k == 0 || k >= n {
            return Err(Error::Domain(format!(
                "k must satisfy 1 <= k <= N-1, got k={k}, N={n}"
            )));
        }
        let query = self.points.row(query_id);
        let mut heap: std::collections::BinaryHeap<Cand> =
            std::collections::BinaryHeap::with_capacity(k + 1);

        if self.brute_force {
            for id in 0..n {
                if id == query_id {
                    continue;
                }
                push_candidate(&mut heap, k, Cand {
                    dist2: dist2(query, self.points.row(id)),
                    id,
                });
            }
        } else {
            self.search(0, query, query_id, k, &mut heap);
        }

        let mut out: Vec<Cand> = heap.into_vec();
        out.sort();
        Ok(out
            .into_iter()
            .map(|c| (c.id, c.dist2.sqrt()))
            .collect())
    }

    fn search(
        &self,
        node: usize,
        query: &[S],
        exclude: usize,
        k: usize,
        heap: &mut std::collections::BinaryHeap<Cand>,
    ) {
        match &self.nodes[node] {
            Node::Leaf { start, end } => {
                for &id in &self.order[*start..*end] {
                    let id = id as usize;
                    if id == exclude {
                        continue;
                    }
                    push_candidate(heap, k, Cand {
                        dist2: dist2(query, self.points.row(id)),
                        id,
                    });
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let q = query[*dim].to_f64_lossy();
                let (near, far) = if q <= *value {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(near, query, exclude, k, heap);
                let plane = q - *value;
                let worst = heap.peek().map(|c| c.dist2).unwrap_or(f64::INFINITY);
                if heap.len() < k || plane * plane <= worst {
                    self.search(far, query, exclude, k, heap);
                }
            }
        }
    }
}

fn push_candidate(heap: &mut std::collections::BinaryHeap<Cand>, k: usize, cand: Cand) {
    if heap.len() < k {
        heap.push(cand);
    } else if let Some(&worst) = heap.peek() {
        if cand < worst {
            heap.pop();
            heap.push(cand);
        }
    }
}

fn build_node<S: Scalar>(
    points: &Matrix<S>,
    order: &mut [u32],
    offset: usize,
    _n_total: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let count = order.len();
    let node_id = nodes.len();
    if count <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + count,
        });
        return node_id;
    }
    // Split along the dimension with the largest spread.
    let d = points.cols();
    let mut best_dim = 0;
    let mut best_spread = -1.0;
    for dim in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &id in order.iter() {
            let v = points.get(id as usize, dim).to_f64_lossy();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > best_spread {
            best_spread = hi - lo;
            best_dim = dim;
        }
    }
    if best_spread <= 0.0 {
        // All points identical along every axis: keep as one leaf.
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + count,
        });
        return node_id;
    }
    let mid = count / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points
            .get(a as usize, best_dim)
            .to_f64_lossy()
            .total_cmp(&points.get(b as usize, best_dim).to_f64_lossy())
            .then(a.cmp(&b))
    });
    let split_value = points.get(order[mid] as usize, best_dim).to_f64_lossy();

    nodes.push(Node::Split {
        dim: best_dim,
        value: split_value,
        left: 0,
        right: 0,
    });
    let (left_slice, right_slice) = order.split_at_mut(mid);
    let left = build_node(points, left_slice, offset, _n_total, nodes);
    let right = build_node(points, right_slice, offset + mid, _n_total, nodes);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut nodes[node_id]
    {
        *l = left;
        *r = right;
    }
    node_id
}

/// Brute-force O(N) scan; the exactness oracle for the kd-tree.
pub fn brute_force_knn<S: Scalar>(
    points: &Matrix<S>,
    query_id: usize,
    k: usize,
) -> Result<Vec<(usize, f64)>> {
    let n = points.rows();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!(
            "k must satisfy 1 <= k <= N-1, got k={k}, N={n}"
        )));
    }
    let query = points.row(query_id);
    let mut all: Vec<Cand> = (0..n)
        .filter(|&id| id != query_id)
        .map(|id| Cand {
            dist2: dist2(query, points.row(id)),
            id,
        })
        .collect();
    all.sort();
    all.truncate(k);
    Ok(all.into_iter().map(|c| (c.id, c.dist2.sqrt())).collect())
}
