//! Order-0 approximation net: every distinct SU(2) element reachable by a
//! word of at most `ℓ0` gates, keyed by its shortest word.
//!
//! Words are spelled in the emitted alphabet `{H, T, S, Z, T†, S†}` and every
//! letter counts once. All of these lie in the group generated by `H` and `T`,
//! but counting `S = T·T` as one letter is what makes a length-16 net dense
//! enough to start the recursion.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::kdtree::KdTree;
use super::su2::Quat;
use super::word::{SkGate, Word};

pub const DEFAULT_BASE_LENGTH: usize = 24;
pub const DEFAULT_PREFIX_LENGTH: usize = 8;
const GENERATORS: [SkGate; 6] = [
    SkGate::H,
    SkGate::T,
    SkGate::S,
    SkGate::Z,
    SkGate::Sdg,
    SkGate::Tdg,
];

pub const NET_FILE_HEADER: &str = "# isingqpe base net v1";

#[derive(Clone, Debug)]
pub struct BaseNet {
    base_length: usize,
    prefix_length: usize,
    quats: Vec<Quat>,
    words: Vec<Word>,
    /// Entries with words of at most `prefix_length` gates, identity excluded.
    prefixes: Vec<usize>,
    tree: KdTree,
}

fn key(q: &Quat) -> [i64; 4] {
    let c = q.canonical();
    c.as_array().map(|v| (v * 1e9).round() as i64)
}

impl BaseNet {
    /// Breadth-first enumeration, so the first word to reach an element is a
    /// shortest one. The iteration order is fixed, which makes the net (and
    /// every compiled word) deterministic.
    pub fn build(base_length: usize) -> Result<BaseNet> {
        Self::build_with_prefix(base_length, DEFAULT_PREFIX_LENGTH)
    }

    /// Net whose lookup also tries two-factor products `A·B`, with `A` drawn
    /// from the words of at most `prefix_length` gates.
    pub fn build_with_prefix(base_length: usize, prefix_length: usize) -> Result<BaseNet> {
        if base_length == 0 || base_length > 30 {
            return Err(Error::Config(format!(
                "base word length {base_length} outside 1..=30"
            )));
        }
        let mut seen: HashSet<[i64; 4]> = HashSet::new();
        let mut quats = vec![Quat::IDENTITY];
        let mut raw: Vec<Vec<SkGate>> = vec![Vec::new()];
        seen.insert(key(&Quat::IDENTITY));
        let mut frontier: Vec<usize> = vec![0];
        for _ in 0..base_length {
            let mut next = Vec::new();
            for &i in &frontier {
                for g in GENERATORS {
                    let q = g.quat() * quats[i];
                    if seen.insert(key(&q)) {
                        let mut w = raw[i].clone();
                        w.push(g);
                        quats.push(q);
                        raw.push(w);
                        next.push(quats.len() - 1);
                    }
                }
            }
            frontier = next;
        }
        let words = raw.into_iter().map(|w| Word(w).simplify()).collect();
        Ok(Self::from_parts(base_length, prefix_length, quats, words))
    }

    fn from_parts(
        base_length: usize,
        prefix_length: usize,
        quats: Vec<Quat>,
        words: Vec<Word>,
    ) -> BaseNet {
        // Both signs go in the tree so a lookup is one query on the raw
        // target. Querying a canonical point against canonical-only storage
        // would need a second query for `−c`, and that query sits far from
        // every stored point, where k-d pruning fails.
        let pts: Vec<[f64; 4]> = quats
            .iter()
            .flat_map(|q| [q.as_array(), (-*q).as_array()])
            .collect();
        let prefixes = words
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_empty() && w.len() <= prefix_length)
            .map(|(i, _)| i)
            .collect();
        BaseNet {
            base_length,
            prefix_length,
            tree: KdTree::build(&pts),
            quats,
            words,
            prefixes,
        }
    }

    pub fn prefix_length(&self) -> usize {
        self.prefix_length
    }

    pub fn base_length(&self) -> usize {
        self.base_length
    }

    pub fn len(&self) -> usize {
        self.quats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quats.is_empty()
    }

    /// Closest single entry to `target` in projective distance.
    pub fn nearest_entry(&self, target: &Quat) -> (usize, f64) {
        let (i, _) = self.tree.nearest(&target.as_array()).expect("net is never empty");
        let i = i / 2;
        (i, self.quats[i].distance(target))
    }

    /// Best order-0 approximation: the nearest entry, or the best product
    /// `A·B` with `A` a short prefix and `B` the entry nearest to `A†·target`.
    pub fn nearest(&self, target: &Quat) -> (Quat, Word, f64) {
        let (i, d) = self.nearest_entry(target);
        let mut best = (None, i, d);
        for &a in &self.prefixes {
            let qa = self.quats[a];
            let (b, _) = self.nearest_entry(&(qa.inverse() * *target));
            let d = (qa * self.quats[b]).distance(target);
            if d < best.2 {
                best = (Some(a), b, d);
            }
        }
        match best {
            (None, i, d) => (self.quats[i], self.words[i].clone(), d),
            (Some(a), b, d) => {
                // Operator A·B acts with B first.
                let mut w = self.words[b].clone();
                w.extend(&self.words[a]);
                (self.quats[a] * self.quats[b], w.simplify(), d)
            }
        }
    }

    /// Largest order-0 error over a fixed probe set; a proxy for the net's
    /// covering radius.
    pub fn probe_radius(&self, probes: usize) -> f64 {
        let golden = 0.618_033_988_749_895_f64;
        (0..probes)
            .map(|i| {
                let t = (i as f64 + 0.5) / probes as f64;
                let axis_z = 1.0 - 2.0 * t;
                let r = (1.0 - axis_z * axis_z).sqrt();
                let phi = std::f64::consts::TAU * golden * i as f64;
                let angle = std::f64::consts::PI * ((i as f64 * golden).fract());
                let q = Quat::rotation([r * phi.cos(), r * phi.sin(), axis_z], angle);
                self.nearest(&q).2
            })
            .fold(0.0, f64::max)
    }

    /// Text cache: header, base length, then one word per line.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{NET_FILE_HEADER}\nbase_length {}\nprefix_length {}\n",
            self.base_length, self.prefix_length
        );
        for w in &self.words {
            writeln!(s, "{w}").unwrap();
        }
        s
    }

    /// Rebuilds a net from its text cache, recomputing and checking products.
    pub fn from_text(text: &str) -> Result<BaseNet> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(NET_FILE_HEADER) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected `{NET_FILE_HEADER}`"),
            });
        }
        let base_length = lines
            .next()
            .and_then(|l| l.strip_prefix("base_length "))
            .and_then(|v| v.trim().parse().ok())
            .ok_or(Error::Parse {
                line: 2,
                message: "expected `base_length <n>`".into(),
            })?;
        let prefix_length = lines
            .next()
            .and_then(|l| l.strip_prefix("prefix_length "))
            .and_then(|v| v.trim().parse().ok())
            .ok_or(Error::Parse {
                line: 3,
                message: "expected `prefix_length <n>`".into(),
            })?;
        let mut quats = Vec::new();
        let mut words = Vec::new();
        for (i, l) in lines.enumerate() {
            let w = Word::parse(l).map_err(|e| Error::Parse {
                line: i + 4,
                message: e.to_string(),
            })?;
            quats.push(w.quat());
            words.push(w);
        }
        if quats.is_empty() {
            return Err(Error::Parse {
                line: 4,
                message: "net has no entries".into(),
            });
        }
        Ok(Self::from_parts(base_length, prefix_length, quats, words))
    }

    /// Largest deviation between a stored element and its word's product.
    pub fn consistency_defect(&self) -> f64 {
        self.quats
            .iter()
            .zip(&self.words)
            .map(|(q, w)| q.distance(&w.quat()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_net_contents() {
        let net = BaseNet::build(1).unwrap();
        // identity plus the six letters, all distinct up to phase
        assert_eq!(net.len(), 7);
        let net = BaseNet::build(2).unwrap();
        // Diagonal pairs only reach the eight powers of T, and H·H collapses,
        // so the new elements are the 5 × 2 mixed words H·d and d·H.
        assert_eq!(net.len(), 7 + 2 + 10);
        assert!(net.consistency_defect() < 1e-12);
    }

    #[test]
    fn nearest_finds_exact_members() {
        let net = BaseNet::build(8).unwrap();
        let target = SkGate::H.quat() * SkGate::T.quat() * SkGate::H.quat();
        let (_, w, d) = net.nearest(&target);
        assert!(d < 1e-12);
        assert!(w.len() <= 3);
        let (_, _, d) = net.nearest(&(-target));
        assert!(d < 1e-12);
    }

    #[test]
    fn text_cache_round_trip() {
        let net = BaseNet::build(6).unwrap();
        let back = BaseNet::from_text(&net.to_text()).unwrap();
        assert_eq!(back.len(), net.len());
        assert!(back.consistency_defect() < 1e-12);
        assert!(BaseNet::from_text("nope").is_err());
    }

    #[test]
    fn base_length_limits() {
        assert!(BaseNet::build(0).is_err());
        assert!(BaseNet::build(31).is_err());
    }
}
