//! Nearest-neighbour distances between point sets.

use craft_core::geometry::Vec3;

/// Sets smaller than this are searched exhaustively.
pub const BRUTE_FORCE_BELOW: usize = 2000;

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, below: usize, above: usize },
}

/// Static k-d tree over a point set. Splits at the median of the widest
/// axis; points equal to the split value may sit on either side.
pub struct KdTree {
    points: Vec<Vec3>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> KdTree {
        let mut tree = KdTree {
            points: points.to_vec(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &mut self.points[start..end];
        let (mut lo, mut hi) = (slice[0], slice[0]);
        for p in slice.iter() {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let axis = (hi - lo).imax();
        if hi[axis] == lo[axis] {
            // Every point coincides.
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
        let value = slice[mid][axis];
        self.nodes.push(Node::Leaf { start, end });
        let below = self.build(start, start + mid);
        let above = self.build(start + mid, end);
        self.nodes[id] = Node::Split { axis, value, below, above };
        id
    }

    /// Squared distance from `q` to the nearest point.
    pub fn nearest_squared(&self, q: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        if !self.nodes.is_empty() {
            self.search(0, q, &mut best);
        }
        best
    }

    fn search(&self, node: usize, q: &Vec3, best: &mut f64) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for p in &self.points[start..end] {
                    *best = best.min((p - q).norm_squared());
                }
            }
            Node::Split { axis, value, below, above } => {
                let d = q[axis] - value;
                let (near, far) = if d < 0.0 { (below, above) } else { (above, below) };
                self.search(near, q, best);
                if d * d <= *best {
                    self.search(far, q, best);
                }
            }
        }
    }
}

pub enum NearestIndex {
    Brute(Vec<Vec3>),
    Tree(KdTree),
}

impl NearestIndex {
    pub fn new(points: &[Vec3]) -> NearestIndex {
        if points.len() < BRUTE_FORCE_BELOW {
            NearestIndex::brute(points)
        } else {
            NearestIndex::tree(points)
        }
    }

    pub fn brute(points: &[Vec3]) -> NearestIndex {
        NearestIndex::Brute(points.to_vec())
    }

    pub fn tree(points: &[Vec3]) -> NearestIndex {
        NearestIndex::Tree(KdTree::new(points))
    }

    /// Distance from `q` to the nearest indexed point.
    pub fn nearest(&self, q: &Vec3) -> f64 {
        match self {
            NearestIndex::Brute(pts) => pts
                .iter()
                .map(|p| (p - q).norm_squared())
                .fold(f64::INFINITY, f64::min)
                .sqrt(),
            NearestIndex::Tree(t) => t.nearest_squared(q).sqrt(),
        }
    }

    pub fn distances(&self, queries: &[Vec3]) -> Vec<f64> {
        queries.iter().map(|q| self.nearest(q)).collect()
    }
}

/// For each point of `a`, the distance to its nearest point in `b`.
pub fn directed_distances(a: &[Vec3], b: &[Vec3]) -> Vec<f64> {
    NearestIndex::new(b).distances(a)
}

fn mean(d: &[f64]) -> f64 {
    d.iter().sum::<f64>() / d.len() as f64
}

pub fn chamfer(a: &[Vec3], b: &[Vec3]) -> f64 {
    0.5 * (mean(&directed_distances(a, b)) + mean(&directed_distances(b, a)))
}

pub fn hausdorff(a: &[Vec3], b: &[Vec3]) -> f64 {
    let m = |d: Vec<f64>| d.into_iter().fold(0.0, f64::max);
    m(directed_distances(a, b)).max(m(directed_distances(b, a)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FScore {
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

impl FScore {
    /// From directed distances a→b and b→a.
    pub fn from_distances(ab: &[f64], ba: &[f64], threshold: f64) -> FScore {
        let frac = |d: &[f64]| d.iter().filter(|&&x| x <= threshold).count() as f64 / d.len() as f64;
        let (p, r) = (frac(ab), frac(ba));
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        FScore {
            precision: p,
            recall: r,
            fscore: f,
        }
    }
}

pub fn fscore(a: &[Vec3], b: &[Vec3], threshold: f64) -> FScore {
    FScore::from_distances(&directed_distances(a, b), &directed_distances(b, a), threshold)
}
