//! Retrieval and filtering over past frames: an inverted-index database of
//! BoW vectors, similarity normalization against the previous frame, island
//! grouping, the temporal consistency gate and final candidate selection.

use std::collections::HashMap;

use thiserror::Error;

use crate::config::PipelineConfig;
use crate::frame::FrameId;
use crate::vocab::BowVector;

/// Queries abstain when the previous-frame similarity drops below this:
/// dividing by a near-zero normalizer would let feature-poor frames promote
/// arbitrary candidates.
pub const NORMALIZER_EPSILON: f64 = 0.005;

#[derive(Debug, Error, PartialEq)]
pub enum DatabaseError {
    #[error("frame {new} not after latest stored frame {latest}")]
    OutOfOrderFrame { new: u64, latest: u64 },
    #[error("island has no members")]
    EmptyIsland,
}

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("no previous frame stored; the normalizer is undefined")]
    NoPreviousFrame,
    #[error("previous-frame similarity {0} below epsilon; query abstains")]
    DegenerateNormalizer(f64),
}

/// One scored loop candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub frame: FrameId,
    /// Raw BoW similarity s.
    pub score: f64,
    /// Normalized similarity eta = s / s_prev.
    pub normalized: f64,
}

/// A time-contiguous group of candidates scored by the sum of member etas.
#[derive(Clone, Debug, PartialEq)]
pub struct Island {
    pub members: Vec<Candidate>,
    /// Sum of member normalized scores (H).
    pub score: f64,
}

impl Island {
    /// [first, last] member timestamps.
    pub fn interval(&self) -> (f64, f64) {
        (
            self.members.first().map_or(0.0, |c| c.frame.timestamp),
            self.members.last().map_or(0.0, |c| c.frame.timestamp),
        )
    }
}

/// Outcome of one query, kept for the temporal consistency gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryRecord {
    pub query: FrameId,
    /// Interval of the island that won the H ranking, when any candidate
    /// survived the eta threshold.
    pub winning_island: Option<(f64, f64)>,
}

/// Diagnostics accompanying a query's candidate list.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QueryStats {
    /// Frames outside the exclusion window with non-zero similarity.
    pub considered: usize,
    /// Scored frames discarded because eta fell below the threshold.
    pub below_threshold: usize,
}

/// Result of the full retrieval-and-filtering chain for one query.
#[derive(Clone, Debug, PartialEq)]
pub enum Retrieval {
    /// A candidate survived every retrieval gate.
    Match {
        candidate: Candidate,
        island_score: f64,
        island_interval: (f64, f64),
    },
    /// Nothing to score: empty database, exclusion window, degenerate
    /// normalizer, or no overlapping words.
    NoCandidates { considered: usize },
    /// Candidates were scored but all fell below the eta threshold.
    BelowThreshold { below: usize },
    /// The winning island failed the temporal consistency check.
    Inconsistent { history_len: usize },
}

struct StoredFrame {
    id: FrameId,
    vector: BowVector,
}

/// Inverted-index database over the BoW vectors of processed frames.
///
/// Single writer: `add` and `retrieve` advance internal state; read-only
/// scoring may run concurrently between mutations.
#[derive(Default)]
pub struct LoopDatabase {
    postings: HashMap<u32, Vec<(usize, f64)>>,
    frames: Vec<StoredFrame>,
    history: Vec<QueryRecord>,
}

impl LoopDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn latest(&self) -> Option<&FrameId> {
        self.frames.last().map(|f| &f.id)
    }

    /// Query records in query order, one per retrieval.
    pub fn records(&self) -> &[QueryRecord] {
        &self.history
    }

    pub fn vector(&self, index: u64) -> Option<&BowVector> {
        self.frames
            .binary_search_by_key(&index, |f| f.id.index)
            .ok()
            .map(|pos| &self.frames[pos].vector)
    }

    /// Stores a frame. Ids and timestamps must be strictly increasing.
    pub fn add(&mut self, id: FrameId, vector: BowVector) -> Result<(), DatabaseError> {
        if let Some(last) = self.frames.last() {
            if id.index <= last.id.index || id.timestamp <= last.id.timestamp {
                return Err(DatabaseError::OutOfOrderFrame {
                    new: id.index,
                    latest: last.id.index,
                });
            }
        }
        let position = self.frames.len();
        for &(word, weight) in vector.entries() {
            self.postings.entry(word).or_default().push((position, weight));
        }
        self.frames.push(StoredFrame { id, vector });
        Ok(())
    }

    /// Scores the query against all stored frames outside the exclusion
    /// window, normalizes by the similarity to the latest stored frame, and
    /// returns candidates with eta >= threshold sorted by eta descending
    /// (ties toward the earlier timestamp).
    pub fn query(
        &self,
        query: &BowVector,
        timestamp: f64,
        cfg: &PipelineConfig,
    ) -> Result<(Vec<Candidate>, QueryStats), QueryError> {
        let previous = self.frames.last().ok_or(QueryError::NoPreviousFrame)?;
        let s_prev = crate::vocab::score_overlap(query, &previous.vector);
        if s_prev < NORMALIZER_EPSILON {
            return Err(QueryError::DegenerateNormalizer(s_prev));
        }

        // Accumulate overlap scores via the postings lists. Query words are
        // visited in ascending order, so per-frame additions happen in the
        // same order as a sorted merge over the pair of vectors.
        let mut scores = vec![0.0f64; self.frames.len()];
        for &(word, query_weight) in query.entries() {
            if let Some(postings) = self.postings.get(&word) {
                for &(position, weight) in postings {
                    scores[position] += query_weight.min(weight);
                }
            }
        }

        let cutoff = timestamp - cfg.temporal_exclusion;
        let mut stats = QueryStats::default();
        let mut candidates = Vec::new();
        for (position, frame) in self.frames.iter().enumerate() {
            if frame.id.timestamp > cutoff {
                continue;
            }
            let s = scores[position];
            if s <= 0.0 {
                continue;
            }
            stats.considered += 1;
            let normalized = s / s_prev;
            if normalized < cfg.norm_score_threshold {
                stats.below_threshold += 1;
                continue;
            }
            candidates.push(Candidate {
                frame: frame.id,
                score: s,
                normalized,
            });
        }
        candidates.sort_by(|a, b| {
            b.normalized
                .partial_cmp(&a.normalized)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(
                    a.frame
                        .timestamp
                        .partial_cmp(&b.frame.timestamp)
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
        });
        Ok((candidates, stats))
    }

    /// Full retrieval chain: query, island grouping, H ranking, temporal
    /// consistency and candidate selection. Appends one [`QueryRecord`]
    /// regardless of outcome, so consistency can warm up across rejected
    /// queries.
    pub fn retrieve(
        &mut self,
        query: &BowVector,
        query_id: FrameId,
        cfg: &PipelineConfig,
    ) -> Retrieval {
        let (outcome, winning) = self.retrieve_inner(query, query_id.timestamp, cfg);
        self.history.push(QueryRecord {
            query: query_id,
            winning_island: winning,
        });
        outcome
    }

    fn retrieve_inner(
        &self,
        query: &BowVector,
        timestamp: f64,
        cfg: &PipelineConfig,
    ) -> (Retrieval, Option<(f64, f64)>) {
        let (candidates, stats) = match self.query(query, timestamp, cfg) {
            Ok(result) => result,
            Err(_) => return (Retrieval::NoCandidates { considered: 0 }, None),
        };
        if candidates.is_empty() {
            let outcome = if stats.below_threshold > 0 {
                Retrieval::BelowThreshold {
                    below: stats.below_threshold,
                }
            } else {
                Retrieval::NoCandidates {
                    considered: stats.considered,
                }
            };
            return (outcome, None);
        }

        let islands = group_islands(candidates, cfg.island_max_gap);
        let best = islands
            .iter()
            .max_by(|a, b| {
                a.score
                    .partial_cmp(&b.score)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(
                        // Ties toward the earlier island.
                        b.interval()
                            .0
                            .partial_cmp(&a.interval().0)
                            .unwrap_or(std::cmp::Ordering::Equal),
                    )
            })
            .expect("non-empty candidate list groups into at least one island");
        let interval = best.interval();

        if !temporal_consistency(
            &self.history,
            best,
            cfg.consistency_length,
            cfg.island_max_gap,
        ) {
            return (
                Retrieval::Inconsistent {
                    history_len: self.history.len(),
                },
                Some(interval),
            );
        }

        let candidate = *select_candidate(best).expect("winning island is non-empty");
        (
            Retrieval::Match {
                candidate,
                island_score: best.score,
                island_interval: interval,
            },
            Some(interval),
        )
    }
}

/// Greedy island construction: candidates sorted by timestamp, islands
/// closed when the gap to the next candidate exceeds `island_max_gap`.
pub fn group_islands(mut candidates: Vec<Candidate>, island_max_gap: f64) -> Vec<Island> {
    candidates.sort_by(|a, b| {
        a.frame
            .timestamp
            .partial_cmp(&b.frame.timestamp)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut islands: Vec<Island> = Vec::new();
    for candidate in candidates {
        let start_new = match islands.last() {
            Some(island) => {
                let last_ts = island
                    .members
                    .last()
                    .map_or(f64::NEG_INFINITY, |c| c.frame.timestamp);
                candidate.frame.timestamp - last_ts > island_max_gap
            }
            None => true,
        };
        if start_new {
            islands.push(Island {
                members: vec![candidate],
                score: candidate.normalized,
            });
        } else {
            let island = islands.last_mut().unwrap();
            island.members.push(candidate);
            island.score += candidate.normalized;
        }
    }
    islands
}

/// True when each of the `k` most recent query records holds a winning
/// island whose interval overlaps (or lies within `gap` of) the current
/// island's interval. Fewer than `k` records available means false: the
/// gate warms up strictly.
pub fn temporal_consistency(
    history: &[QueryRecord],
    island: &Island,
    k: usize,
    gap: f64,
) -> bool {
    if k == 0 {
        return true;
    }
    if history.len() < k {
        return false;
    }
    let (start, end) = island.interval();
    history[history.len() - k..].iter().all(|record| {
        record
            .winning_island
            .is_some_and(|(s, e)| s <= end + gap && start <= e + gap)
    })
}

/// The island member with maximum eta; ties break toward the earliest
/// timestamp.
pub fn select_candidate(island: &Island) -> Result<&Candidate, DatabaseError> {
    island
        .members
        .iter()
        .max_by(|a, b| {
            a.normalized
                .partial_cmp(&b.normalized)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(
                    b.frame
                        .timestamp
                        .partial_cmp(&a.frame.timestamp)
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
        })
        .ok_or(DatabaseError::EmptyIsland)
}
