//! Hierarchical bag of binary words.
//!
//! Training recursively clusters descriptors with a k-majority variant of
//! k-means: assignment is by Hamming distance, the center update is the
//! bitwise majority vote of the members (ties toward 0). Leaves become
//! words weighted by inverse document frequency; transform descends the
//! tree greedily and produces an L1-normalized tf-idf vector.

mod io;

pub use io::VocabIoError;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::BinaryDescriptor;

#[derive(Debug, Error, PartialEq)]
pub enum VocabError {
    #[error("need at least {required} descriptors to train branching^depth = {branching}^{depth} words, got {got}")]
    TooFewDescriptors {
        got: usize,
        required: usize,
        branching: u32,
        depth: u32,
    },
    #[error("invalid vocabulary shape: branching {branching}, depth {depth}")]
    InvalidShape { branching: u32, depth: u32 },
    #[error("clustering produced an empty cluster that re-seeding could not fill")]
    EmptyCluster,
    #[error("vector is not L1-normalized (norm {0})")]
    NotNormalized(f64),
}

/// Sparse, L1-normalized word-weight vector. Entries are sorted by word id
/// and strictly positive.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BowVector {
    entries: Vec<(u32, f64)>,
}

impl BowVector {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a vector from raw (word, weight) pairs: duplicates are merged,
    /// non-positive weights dropped, and the result L1-normalized.
    pub fn from_weights(mut weights: Vec<(u32, f64)>) -> Self {
        weights.sort_by_key(|&(w, _)| w);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(weights.len());
        for (word, weight) in weights {
            if weight <= 0.0 {
                continue;
            }
            match entries.last_mut() {
                Some((last, acc)) if *last == word => *acc += weight,
                _ => entries.push((word, weight)),
            }
        }
        let norm: f64 = entries.iter().map(|&(_, w)| w).sum();
        if norm > 0.0 {
            for (_, w) in entries.iter_mut() {
                *w /= norm;
            }
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn weight(&self, word: u32) -> Option<f64> {
        self.entries
            .binary_search_by_key(&word, |&(w, _)| w)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }
}

/// L1 similarity `s = 1 - 0.5 * sum |a_w - b_w|`, in [0, 1].
///
/// Empty vectors score 0 against anything; non-empty inputs must be
/// L1-normalized within 1e-6.
pub fn score(a: &BowVector, b: &BowVector) -> Result<f64, VocabError> {
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    for v in [a, b] {
        let norm = v.l1_norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(VocabError::NotNormalized(norm));
        }
    }
    let mut total = 0.0;
    let mut ia = 0;
    let mut ib = 0;
    let ea = a.entries();
    let eb = b.entries();
    while ia < ea.len() && ib < eb.len() {
        match ea[ia].0.cmp(&eb[ib].0) {
            std::cmp::Ordering::Less => {
                total += ea[ia].1;
                ia += 1;
            }
            std::cmp::Ordering::Greater => {
                total += eb[ib].1;
                ib += 1;
            }
            std::cmp::Ordering::Equal => {
                total += (ea[ia].1 - eb[ib].1).abs();
                ia += 1;
                ib += 1;
            }
        }
    }
    total += ea[ia..].iter().map(|&(_, w)| w).sum::<f64>();
    total += eb[ib..].iter().map(|&(_, w)| w).sum::<f64>();
    Ok((1.0 - 0.5 * total).clamp(0.0, 1.0))
}

/// Overlap form of the same similarity: for L1-normalized vectors,
/// `sum_w min(a_w, b_w)` equals `1 - 0.5 * sum |a_w - b_w|`. The inverted
/// index accumulates this form, so the database and any per-pair scorer
/// walking words in ascending order produce bit-identical sums.
pub fn score_overlap(a: &BowVector, b: &BowVector) -> f64 {
    let mut total = 0.0;
    let mut ia = 0;
    let mut ib = 0;
    let ea = a.entries();
    let eb = b.entries();
    while ia < ea.len() && ib < eb.len() {
        match ea[ia].0.cmp(&eb[ib].0) {
            std::cmp::Ordering::Less => ia += 1,
            std::cmp::Ordering::Greater => ib += 1,
            std::cmp::Ordering::Equal => {
                total += ea[ia].1.min(eb[ib].1);
                ia += 1;
                ib += 1;
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Node {
    pub centroid: BinaryDescriptor,
    pub children: Vec<u32>,
    /// Word id when this node is a leaf.
    pub word: Option<u32>,
}

/// A trained vocabulary tree. Nodes are stored in breadth-first order with
/// the root at index 0; every leaf sits at depth exactly `depth` and word
/// ids are dense in breadth-first leaf order.
#[derive(Clone, Debug, PartialEq)]
pub struct VocabularyTree {
    branching: u32,
    depth: u32,
    nodes: Vec<Node>,
    idf: Vec<f64>,
}

impl VocabularyTree {
    pub fn branching(&self) -> u32 {
        self.branching
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn word_count(&self) -> u32 {
        self.idf.len() as u32
    }

    pub fn idf(&self, word: u32) -> f64 {
        self.idf[word as usize]
    }

    pub(crate) fn parts(&self) -> (u32, u32, &[Node], &[f64]) {
        (self.branching, self.depth, &self.nodes, &self.idf)
    }

    pub(crate) fn from_parts(
        branching: u32,
        depth: u32,
        nodes: Vec<Node>,
        idf: Vec<f64>,
    ) -> Self {
        Self {
            branching,
            depth,
            nodes,
            idf,
        }
    }

    /// Trains a vocabulary by recursive k-majority clustering.
    ///
    /// Requires at least `branching^depth` descriptors. For a fixed seed the
    /// result is bit-for-bit reproducible.
    pub fn train(
        descriptors: &[BinaryDescriptor],
        branching: u32,
        depth: u32,
        seed: u64,
    ) -> Result<Self, VocabError> {
        if branching < 2 || depth < 1 {
            return Err(VocabError::InvalidShape { branching, depth });
        }
        let required = (branching as usize)
            .checked_pow(depth)
            .unwrap_or(usize::MAX);
        if descriptors.len() < required {
            return Err(VocabError::TooFewDescriptors {
                got: descriptors.len(),
                required,
                branching,
                depth,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // Arena built depth-first, then relabeled breadth-first below.
        struct Builder<'a> {
            descriptors: &'a [BinaryDescriptor],
            branching: u32,
            depth: u32,
            nodes: Vec<Node>,
            /// Training members per leaf node, for idf counting.
            leaf_members: Vec<(usize, usize)>, // (node index, member count)
        }

        impl Builder<'_> {
            fn grow(
                &mut self,
                node: usize,
                members: Vec<usize>,
                level: u32,
                rng: &mut ChaCha8Rng,
            ) -> Result<(), VocabError> {
                if level == self.depth {
                    self.leaf_members.push((node, members.len()));
                    return Ok(());
                }
                let clusters = k_majority(self.descriptors, &members, self.branching, rng)?;
                for (centroid, cluster) in clusters {
                    let child = self.nodes.len();
                    self.nodes.push(Node {
                        centroid,
                        children: Vec::new(),
                        word: None,
                    });
                    self.nodes[node].children.push(child as u32);
                    self.grow(child, cluster, level + 1, rng)?;
                }
                Ok(())
            }
        }

        let mut builder = Builder {
            descriptors,
            branching,
            depth,
            nodes: vec![Node {
                centroid: BinaryDescriptor::zero(),
                children: Vec::new(),
                word: None,
            }],
            leaf_members: Vec::new(),
        };
        let all: Vec<usize> = (0..descriptors.len()).collect();
        builder.grow(0, all, 0, &mut rng)?;

        // Relabel nodes in breadth-first order; word ids follow BFS leaf
        // order so the serialized form reconstructs them implicitly.
        let order = bfs_order(&builder.nodes);
        let mut position = vec![0usize; builder.nodes.len()];
        for (new_idx, &old_idx) in order.iter().enumerate() {
            position[old_idx] = new_idx;
        }
        let mut nodes: Vec<Node> = order
            .iter()
            .map(|&old| Node {
                centroid: builder.nodes[old].centroid,
                children: builder.nodes[old]
                    .children
                    .iter()
                    .map(|&c| position[c as usize] as u32)
                    .collect(),
                word: None,
            })
            .collect();
        let mut member_counts = Vec::new();
        let mut leaf_count_by_new: Vec<Option<usize>> = vec![None; nodes.len()];
        for &(old_node, count) in &builder.leaf_members {
            leaf_count_by_new[position[old_node]] = Some(count);
        }
        let mut next_word = 0u32;
        for (idx, node) in nodes.iter_mut().enumerate() {
            if node.children.is_empty() {
                node.word = Some(next_word);
                member_counts.push(leaf_count_by_new[idx].unwrap_or(0));
                next_word += 1;
            }
        }

        let total = descriptors.len() as f64;
        let idf = member_counts
            .iter()
            .map(|&n_w| {
                if n_w == 0 {
                    0.0
                } else {
                    (total / n_w as f64).ln()
                }
            })
            .collect();

        Ok(Self {
            branching,
            depth,
            nodes,
            idf,
        })
    }

    /// Greedy descent: at each level pick the child centroid with minimum
    /// Hamming distance (ties toward the first child).
    pub fn quantize(&self, descriptor: &BinaryDescriptor) -> u32 {
        let mut node = &self.nodes[0];
        while !node.children.is_empty() {
            let mut best_child = node.children[0];
            let mut best_dist = u32::MAX;
            for &child in &node.children {
                let d = descriptor.hamming(&self.nodes[child as usize].centroid);
                if d < best_dist {
                    best_dist = d;
                    best_child = child;
                }
            }
            node = &self.nodes[best_child as usize];
        }
        node.word.expect("leaf node carries a word id")
    }

    /// tf-idf transform of a descriptor set into an L1-normalized vector.
    /// Order of the input descriptors does not matter.
    pub fn transform(&self, descriptors: &[BinaryDescriptor]) -> BowVector {
        if descriptors.is_empty() {
            return BowVector::empty();
        }
        let mut tf: Vec<u32> = vec![0; self.idf.len()];
        for d in descriptors {
            tf[self.quantize(d) as usize] += 1;
        }
        let weights: Vec<(u32, f64)> = tf
            .iter()
            .enumerate()
            .filter(|&(_, &count)| count > 0)
            .map(|(word, &count)| (word as u32, count as f64 * self.idf[word]))
            .collect();
        BowVector::from_weights(weights)
    }
}

fn bfs_order(nodes: &[Node]) -> Vec<usize> {
    let mut order = Vec::with_capacity(nodes.len());
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(0usize);
    while let Some(idx) = queue.pop_front() {
        order.push(idx);
        for &c in &nodes[idx].children {
            queue.push_back(c as usize);
        }
    }
    order
}

/// Bitwise majority vote; a bit is set only when strictly more than half of
/// the members have it set, so ties break toward 0.
fn majority_vote(descriptors: &[BinaryDescriptor], members: &[usize]) -> BinaryDescriptor {
    let mut counts = [0u32; 256];
    for &m in members {
        let d = &descriptors[m];
        for word in 0..4 {
            let mut bits = d.0[word];
            while bits != 0 {
                let bit = bits.trailing_zeros();
                counts[word * 64 + bit as usize] += 1;
                bits &= bits - 1;
            }
        }
    }
    let half = members.len() as u32;
    let mut out = BinaryDescriptor::zero();
    for (bit, &count) in counts.iter().enumerate() {
        if 2 * count > half {
            out.set_bit(bit as u32);
        }
    }
    out
}

/// One level of k-majority clustering. Returns (centroid, members) per
/// cluster; at most `k` clusters, fewer when the members hold fewer
/// distinct values. Empty clusters are re-seeded with the member farthest
/// from its center; if `k` consecutive re-seeds fail the error surfaces.
fn k_majority(
    descriptors: &[BinaryDescriptor],
    members: &[usize],
    k: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(BinaryDescriptor, Vec<usize>)>, VocabError> {
    let mut distinct: Vec<BinaryDescriptor> = Vec::new();
    for &m in members {
        if !distinct.contains(&descriptors[m]) {
            distinct.push(descriptors[m]);
            if distinct.len() > k as usize {
                break;
            }
        }
    }
    let k_eff = (k as usize).min(distinct.len()).max(1);
    if k_eff == 1 {
        return Ok(vec![(
            majority_vote(descriptors, members),
            members.to_vec(),
        )]);
    }

    // Seed with k distinct member values.
    let mut pool = distinct;
    pool.shuffle(rng);
    let mut centers: Vec<BinaryDescriptor> = pool.into_iter().take(k_eff).collect();

    let mut assignment: Vec<usize> = vec![0; members.len()];
    for _round in 0..64 {
        let mut changed = false;
        for (slot, &m) in members.iter().enumerate() {
            let mut best = 0usize;
            let mut best_dist = u32::MAX;
            for (ci, center) in centers.iter().enumerate() {
                let d = descriptors[m].hamming(center);
                if d < best_dist {
                    best_dist = d;
                    best = ci;
                }
            }
            if assignment[slot] != best {
                assignment[slot] = best;
                changed = true;
            }
        }

        // Re-seed empty clusters from the member farthest to its center.
        let mut reseeds = 0u32;
        loop {
            let mut sizes = vec![0usize; k_eff];
            for &a in &assignment {
                sizes[a] += 1;
            }
            let Some(empty) = sizes.iter().position(|&s| s == 0) else {
                break;
            };
            if reseeds >= k {
                return Err(VocabError::EmptyCluster);
            }
            reseeds += 1;
            let mut farthest = None;
            let mut farthest_dist = 0u32;
            for (slot, &m) in members.iter().enumerate() {
                if sizes[assignment[slot]] <= 1 {
                    continue;
                }
                let d = descriptors[m].hamming(&centers[assignment[slot]]);
                if farthest.is_none() || d > farthest_dist {
                    farthest = Some(slot);
                    farthest_dist = d;
                }
            }
            let Some(slot) = farthest else {
                return Err(VocabError::EmptyCluster);
            };
            centers[empty] = descriptors[members[slot]];
            assignment[slot] = empty;
            changed = true;
        }

        let mut new_centers = centers.clone();
        for (ci, center) in new_centers.iter_mut().enumerate() {
            let cluster: Vec<usize> = members
                .iter()
                .enumerate()
                .filter(|&(slot, _)| assignment[slot] == ci)
                .map(|(_, &m)| m)
                .collect();
            if !cluster.is_empty() {
                *center = majority_vote(descriptors, &cluster);
            }
        }
        let centers_changed = new_centers != centers;
        centers = new_centers;
        if !changed && !centers_changed {
            break;
        }
    }

    let mut clusters: Vec<(BinaryDescriptor, Vec<usize>)> = centers
        .iter()
        .map(|&c| (c, Vec::new()))
        .collect();
    for (slot, &m) in members.iter().enumerate() {
        clusters[assignment[slot]].1.push(m);
    }
    clusters.retain(|(_, c)| !c.is_empty());
    Ok(clusters)
}
