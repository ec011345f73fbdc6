//! Static k-d tree over points in R^4 for nearest-neighbour lookup.
//!
//! Built once by recursive median splits on the axis of widest spread and
//! stored as an implicit balanced tree in a flat array. Points that share a
//! coordinate value are common in the base net (many words differ only by a
//! diagonal factor), so splits never assume distinct keys.

#[derive(Clone, Debug)]
pub struct KdTree {
    /// Points in tree order.
    points: Vec<[f64; 4]>,
    /// Payload index of each point in tree order.
    ids: Vec<usize>,
    /// Split axis of the node stored at the same position.
    axes: Vec<u8>,
}

impl KdTree {
    pub fn build(points: &[[f64; 4]]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut axes = vec![0u8; points.len()];
        build_rec(points, &mut order, &mut axes, 0);
        KdTree {
            points: order.iter().map(|&i| points[i]).collect(),
            ids: order,
            axes,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index (into the build slice) and Euclidean distance of the closest point.
    pub fn nearest(&self, q: &[f64; 4]) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, self.points.len(), q, &mut best);
        Some((self.ids[best.0], best.1.sqrt()))
    }

    fn search(&self, lo: usize, hi: usize, q: &[f64; 4], best: &mut (usize, f64)) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = &self.points[mid];
        let d2 = dist2(p, q);
        // Ties go to the earlier-built (shorter) entry for determinism.
        if d2 < best.1 || (d2 == best.1 && self.ids[mid] < self.ids.get(best.0).copied().unwrap_or(usize::MAX)) {
            *best = (mid, d2);
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, q, best);
        if diff * diff <= best.1 {
            self.search(far.0, far.1, q, best);
        }
    }
}

fn dist2(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn build_rec(points: &[[f64; 4]], order: &mut [usize], axes: &mut [u8], offset: usize) {
    let n = order.len();
    if n == 0 {
        return;
    }
    let axis = (0..4)
        .map(|a| {
            let (mn, mx) = order.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), &i| {
                (mn.min(points[i][a]), mx.max(points[i][a]))
            });
            (a, mx - mn)
        })
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&i, &j| {
        points[i][axis]
            .total_cmp(&points[j][axis])
            .then(i.cmp(&j))
    });
    axes[offset + mid] = axis as u8;
    let (left, rest) = order.split_at_mut(mid);
    build_rec(points, left, axes, offset);
    build_rec(points, &mut rest[1..], axes, offset + mid + 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut pts: Vec<[f64; 4]> = (0..2000)
            .map(|_| [rng.random(), rng.random(), rng.random(), rng.random()])
            .collect();
        // Many shared coordinates.
        for p in pts.iter_mut().take(500) {
            p[0] = 0.5;
            p[1] = 0.25;
        }
        let tree = KdTree::build(&pts);
        for _ in 0..300 {
            let q = [rng.random(), rng.random(), rng.random(), rng.random()];
            let (i, d) = tree.nearest(&q).unwrap();
            let brute = pts
                .iter()
                .map(|p| dist2(p, &q))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            assert!((d - brute).abs() < 1e-15);
            assert!((dist2(&pts[i], &q).sqrt() - d).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_tree() {
        assert!(KdTree::build(&[]).nearest(&[0.0; 4]).is_none());
    }
}
