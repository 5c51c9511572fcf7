use std::collections::BinaryHeap;

use super::{sq_dist, SampleSet};

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: Box<Node>, right: Box<Node> },
}

/// Exact k-d tree over a borrowed [`SampleSet`].
///
/// Candidate distances are computed with the same routine as the brute-force
/// scan, so kth-neighbour distances match it bit for bit.
#[derive(Debug)]
pub struct KdTree<'a> {
    set: &'a SampleSet,
    index: Vec<usize>,
    root: Node,
}

#[derive(PartialEq)]
struct Entry(f64);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl<'a> KdTree<'a> {
    pub fn new(set: &'a SampleSet) -> Self {
        let mut index: Vec<usize> = (0..set.len()).collect();
        let root = build(set, &mut index, 0);
        Self { set, index, root }
    }

    /// Squared distance from `query` to its kth nearest point, skipping the
    /// point with index `exclude`. Returns infinity if fewer than `k`
    /// eligible points exist.
    pub fn kth_sq_distance(&self, query: &[f64], k: usize, exclude: Option<usize>) -> f64 {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(&self.root, query, k, exclude, &mut heap);
        if heap.len() < k {
            return f64::INFINITY;
        }
        heap.peek().map_or(f64::INFINITY, |e| e.0)
    }

    fn search(&self, node: &Node, q: &[f64], k: usize, exclude: Option<usize>, heap: &mut BinaryHeap<Entry>) {
        match node {
            Node::Leaf { start, end } => {
                for &i in &self.index[*start..*end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let d = sq_dist(q, self.set.row(i));
                    if heap.len() < k {
                        heap.push(Entry(d));
                    } else if d < heap.peek().map_or(f64::INFINITY, |e| e.0) {
                        heap.pop();
                        heap.push(Entry(d));
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[*axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, exclude, heap);
                let bound = heap.peek().map_or(f64::INFINITY, |e| e.0);
                // `<=` so equal-distance points beyond the plane are still seen.
                if heap.len() < k || diff * diff <= bound {
                    self.search(far, q, k, exclude, heap);
                }
            }
        }
    }
}

fn build(set: &SampleSet, index: &mut [usize], offset: usize) -> Node {
    if index.len() <= LEAF_SIZE {
        return Node::Leaf { start: offset, end: offset + index.len() };
    }
    let d = set.dim();
    let mut axis = 0;
    let mut widest = f64::NEG_INFINITY;
    for a in 0..d {
        let (lo, hi) = index.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            let v = set.row(i)[a];
            (lo.min(v), hi.max(v))
        });
        if hi - lo > widest {
            widest = hi - lo;
            axis = a;
        }
    }
    if widest <= 0.0 {
        return Node::Leaf { start: offset, end: offset + index.len() };
    }
    let mid = index.len() / 2;
    index.select_nth_unstable_by(mid, |&a, &b| set.row(a)[axis].total_cmp(&set.row(b)[axis]));
    let value = set.row(index[mid])[axis];
    let (l, r) = index.split_at_mut(mid);
    let left = build(set, l, offset);
    let right = build(set, r, offset + mid);
    Node::Split { axis, value, left: Box::new(left), right: Box::new(right) }
}
