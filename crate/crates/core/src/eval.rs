//! Ranking-based retrieval evaluation: R@K, mAP, rSum, and
//! similarity-distribution histograms.

use crate::error::{Error, Result};
use crate::metric::SimilarityMatrix;
use crate::Real;

/// Per-query sets of relevant gallery indices. Supports many-to-one
/// mappings (e.g. five captions per image).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    relevant: Vec<Vec<u32>>,
    gallery_size: usize,
}

impl GroundTruth {
    pub fn new(relevant: Vec<Vec<u32>>, gallery_size: usize) -> Result<Self> {
        for (q, set) in relevant.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::Config(format!("query {q} has no relevant items")));
            }
            for &g in set {
                if g as usize >= gallery_size {
                    return Err(Error::Config(format!(
                        "query {q}: relevant index {g} out of gallery bounds {gallery_size}"
                    )));
                }
            }
        }
        Ok(GroundTruth {
            relevant,
            gallery_size,
        })
    }

    /// 1:1 diagonal ground truth for `n` query/gallery pairs.
    pub fn diagonal(n: usize) -> Self {
        GroundTruth {
            relevant: (0..n as u32).map(|i| vec![i]).collect(),
            gallery_size: n,
        }
    }

    pub fn queries(&self) -> usize {
        self.relevant.len()
    }

    pub fn gallery_size(&self) -> usize {
        self.gallery_size
    }

    pub fn relevant(&self, q: usize) -> &[u32] {
        &self.relevant[q]
    }

    pub fn is_relevant(&self, q: usize, g: usize) -> bool {
        self.relevant[q].contains(&(g as u32))
    }

    /// Swap query and gallery roles: entry `g` of the result lists every
    /// original query that considered `g` relevant.
    pub fn invert(&self) -> Result<GroundTruth> {
        let mut inv: Vec<Vec<u32>> = vec![Vec::new(); self.gallery_size];
        for (q, set) in self.relevant.iter().enumerate() {
            for &g in set {
                inv[g as usize].push(q as u32);
            }
        }
        GroundTruth::new(inv, self.relevant.len())
    }
}

/// Descending-score ranking per query; ties broken by ascending gallery
/// index so rankings are deterministic.
pub fn rank_gallery<T: Real>(s: &SimilarityMatrix<T>) -> Vec<Vec<u32>> {
    (0..s.queries())
        .map(|q| {
            let row = s.row(q);
            let mut order: Vec<u32> = (0..s.gallery() as u32).collect();
            order.sort_by(|&a, &b| {
                row[b as usize]
                    .partial_cmp(&row[a as usize])
                    .expect("finite scores")
                    .then(a.cmp(&b))
            });
            order
        })
        .collect()
}

/// Percentage of queries with any relevant item in the top `k`.
/// `k` larger than the gallery is treated as the full gallery.
pub fn recall_at_k(rankings: &[Vec<u32>], gt: &GroundTruth, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Config("recall K must be >= 1".into()));
    }
    if rankings.len() != gt.queries() {
        return Err(Error::DimensionMismatch {
            context: "recall rankings",
            expected: gt.queries(),
            got: rankings.len(),
        });
    }
    let mut hits = 0usize;
    for (q, ranking) in rankings.iter().enumerate() {
        let k = k.min(ranking.len());
        if ranking[..k].iter().any(|&g| gt.is_relevant(q, g as usize)) {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / rankings.len() as f64)
}

/// Macro-averaged mean average precision, as a percentage.
pub fn mean_average_precision(rankings: &[Vec<u32>], gt: &GroundTruth) -> Result<f64> {
    if rankings.len() != gt.queries() {
        return Err(Error::DimensionMismatch {
            context: "mAP rankings",
            expected: gt.queries(),
            got: rankings.len(),
        });
    }
    let mut total = 0.0f64;
    for (q, ranking) in rankings.iter().enumerate() {
        let relevant_count = gt.relevant(q).len();
        let mut hits = 0usize;
        let mut ap = 0.0f64;
        for (rank0, &g) in ranking.iter().enumerate() {
            if gt.is_relevant(q, g as usize) {
                hits += 1;
                ap += hits as f64 / (rank0 + 1) as f64;
            }
        }
        total += ap / relevant_count as f64;
    }
    Ok(100.0 * total / rankings.len() as f64)
}

/// Retrieval quality for one query→gallery direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionReport {
    pub r1: f64,
    pub r5: f64,
    pub r10: f64,
    pub map: f64,
}

impl DirectionReport {
    pub fn from_rankings(rankings: &[Vec<u32>], gt: &GroundTruth) -> Result<Self> {
        Ok(DirectionReport {
            r1: recall_at_k(rankings, gt, 1)?,
            r5: recall_at_k(rankings, gt, 5)?,
            r10: recall_at_k(rankings, gt, 10)?,
            map: mean_average_precision(rankings, gt)?,
        })
    }
}

/// Both retrieval directions plus their recall sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalReport {
    /// Rows as queries (x→y).
    pub forward: DirectionReport,
    /// Columns as queries (y→x).
    pub backward: DirectionReport,
    pub rsum: f64,
}

/// Sum of all six R@K components.
pub fn rsum(forward: &DirectionReport, backward: &DirectionReport) -> f64 {
    forward.r1 + forward.r5 + forward.r10 + backward.r1 + backward.r5 + backward.r10
}

/// Evaluate both directions of a score grid. `gt` maps row-queries to
/// relevant columns; the reverse direction uses the inverted mapping.
pub fn evaluate_retrieval<T: Real>(
    s: &SimilarityMatrix<T>,
    gt: &GroundTruth,
) -> Result<RetrievalReport> {
    if gt.queries() != s.queries() {
        return Err(Error::DimensionMismatch {
            context: "retrieval ground-truth queries",
            expected: s.queries(),
            got: gt.queries(),
        });
    }
    if gt.gallery_size() != s.gallery() {
        return Err(Error::DimensionMismatch {
            context: "retrieval ground-truth gallery",
            expected: s.gallery(),
            got: gt.gallery_size(),
        });
    }
    let forward = DirectionReport::from_rankings(&rank_gallery(s), gt)?;
    let transposed = s.transposed();
    let backward = DirectionReport::from_rankings(&rank_gallery(&transposed), &gt.invert()?)?;
    Ok(RetrievalReport {
        forward,
        backward,
        rsum: rsum(&forward, &backward),
    })
}

/// Equal-width histograms of positive-pair and negative-pair scores over
/// `[min, max]` of the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityHistogram {
    pub bin_centers: Vec<f64>,
    pub positive_counts: Vec<u64>,
    pub negative_counts: Vec<u64>,
    pub lo: f64,
    pub hi: f64,
}

pub fn similarity_histogram<T: Real>(
    s: &SimilarityMatrix<T>,
    gt: &GroundTruth,
    bins: usize,
) -> Result<SimilarityHistogram> {
    if bins < 2 {
        return Err(Error::Config(format!("need at least 2 bins, got {bins}")));
    }
    if gt.queries() != s.queries() || gt.gallery_size() != s.gallery() {
        return Err(Error::DimensionMismatch {
            context: "histogram ground truth",
            expected: s.queries(),
            got: gt.queries(),
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in s.scores() {
        let v = v.to_f64().unwrap();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    // Degenerate all-equal grid: collapse to a unit-width span.
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut positive_counts = vec![0u64; bins];
    let mut negative_counts = vec![0u64; bins];
    for q in 0..s.queries() {
        for g in 0..s.gallery() {
            let v = s.get(q, g).to_f64().unwrap();
            let mut bin = ((v - lo) / width) as usize;
            if bin >= bins {
                bin = bins - 1;
            }
            if gt.is_relevant(q, g) {
                positive_counts[bin] += 1;
            } else {
                negative_counts[bin] += 1;
            }
        }
    }
    let bin_centers = (0..bins).map(|b| lo + width * (b as f64 + 0.5)).collect();
    Ok(SimilarityHistogram {
        bin_centers,
        positive_counts,
        negative_counts,
        lo,
        hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sm(q: usize, g: usize, v: Vec<f64>) -> SimilarityMatrix<f64> {
        SimilarityMatrix::new(q, g, v).unwrap()
    }

    #[test]
    fn rank_single_query() {
        let s = sm(1, 3, vec![0.1, 0.9, 0.5]);
        assert_eq!(rank_gallery(&s), vec![vec![1, 2, 0]]);
    }

    #[test]
    fn rank_ties_break_by_index() {
        let s = sm(1, 4, vec![0.5, 0.5, 0.5, 0.5]);
        assert_eq!(rank_gallery(&s), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn rank_matches_brute_force_sort() {
        let mut rng = crate::rng::Pcg32::new(61);
        let vals: Vec<f64> = (0..35).map(|_| rng.next_gaussian()).collect();
        let s = sm(5, 7, vals.clone());
        let rankings = rank_gallery(&s);
        for q in 0..5 {
            let mut pairs: Vec<(usize, f64)> = (0..7).map(|g| (g, vals[q * 7 + g])).collect();
            pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let expected: Vec<u32> = pairs.iter().map(|&(g, _)| g as u32).collect();
            assert_eq!(rankings[q], expected);
        }
    }

    #[test]
    fn recall_perfect_ranking() {
        let s = sm(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let gt = GroundTruth::diagonal(3);
        let rankings = rank_gallery(&s);
        assert_eq!(recall_at_k(&rankings, &gt, 1).unwrap(), 100.0);
    }

    #[test]
    fn recall_rank_three_item() {
        // Relevant item always lands at rank 3.
        let s = sm(
            2,
            5,
            vec![
                0.9, 0.8, 0.5, 0.1, 0.0, //
                0.9, 0.8, 0.5, 0.1, 0.0,
            ],
        );
        let gt = GroundTruth::new(vec![vec![2], vec![2]], 5).unwrap();
        let rankings = rank_gallery(&s);
        assert_eq!(recall_at_k(&rankings, &gt, 1).unwrap(), 0.0);
        assert_eq!(recall_at_k(&rankings, &gt, 5).unwrap(), 100.0);
    }

    #[test]
    fn recall_counting_case() {
        // 10 queries, gallery of 6; exactly 6 queries have their relevant
        // item inside the top 5.
        let mut vals = Vec::new();
        for q in 0..10 {
            let mut row = vec![0.0f64; 6];
            for (g, item) in row.iter_mut().enumerate() {
                *item = -(g as f64);
            }
            // Queries 0..6 place the hit at rank 3; the rest push it to 6.
            if q < 6 {
                row[2] = 0.5;
            } else {
                row[5] = -10.0;
            }
            vals.extend(row);
        }
        let gt = GroundTruth::new(
            (0..10)
                .map(|q| if q < 6 { vec![2] } else { vec![5] })
                .collect(),
            6,
        )
        .unwrap();
        let rankings = rank_gallery(&sm(10, 6, vals));
        assert_eq!(recall_at_k(&rankings, &gt, 5).unwrap(), 60.0);
    }

    #[test]
    fn recall_k_beyond_gallery_clamps() {
        let s = sm(1, 3, vec![0.3, 0.2, 0.1]);
        let gt = GroundTruth::new(vec![vec![2]], 3).unwrap();
        let rankings = rank_gallery(&s);
        assert_eq!(recall_at_k(&rankings, &gt, 10).unwrap(), 100.0);
    }

    #[test]
    fn map_all_relevant_first() {
        let s = sm(
            2,
            4,
            vec![
                0.9, 0.1, 0.0, 0.0, //
                0.1, 0.9, 0.0, 0.0,
            ],
        );
        let gt = GroundTruth::new(vec![vec![0], vec![1]], 4).unwrap();
        let rankings = rank_gallery(&s);
        assert_eq!(mean_average_precision(&rankings, &gt).unwrap(), 100.0);
    }

    #[test]
    fn map_single_relevant_rank_two() {
        let s = sm(1, 4, vec![0.5, 0.9, 0.1, 0.0]);
        let gt = GroundTruth::new(vec![vec![0]], 4).unwrap();
        let rankings = rank_gallery(&s);
        assert_eq!(mean_average_precision(&rankings, &gt).unwrap(), 50.0);
    }

    #[test]
    fn map_two_relevant_ranks_one_and_three() {
        let s = sm(1, 4, vec![0.9, 0.5, 0.7, 0.0]);
        let gt = GroundTruth::new(vec![vec![0, 1]], 4).unwrap();
        let rankings = rank_gallery(&s);
        let expected = 100.0 * (1.0 + 2.0 / 3.0) / 2.0;
        let got = mean_average_precision(&rankings, &gt).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn rsum_arithmetic() {
        let f = DirectionReport {
            r1: 60.0,
            r5: 80.0,
            r10: 90.0,
            map: 0.0,
        };
        let b = DirectionReport {
            r1: 40.0,
            r5: 70.0,
            r10: 85.0,
            map: 0.0,
        };
        assert_eq!(rsum(&f, &b), 425.0);
        let full = DirectionReport {
            r1: 100.0,
            r5: 100.0,
            r10: 100.0,
            map: 100.0,
        };
        assert_eq!(rsum(&full, &full), 600.0);
    }

    #[test]
    fn report_monotone_in_k() {
        let mut rng = crate::rng::Pcg32::new(63);
        let vals: Vec<f64> = (0..400).map(|_| rng.next_gaussian()).collect();
        let s = sm(20, 20, vals);
        let gt = GroundTruth::diagonal(20);
        let report = evaluate_retrieval(&s, &gt).unwrap();
        assert!(report.forward.r1 <= report.forward.r5);
        assert!(report.forward.r5 <= report.forward.r10);
        assert!(report.backward.r1 <= report.backward.r5);
        assert!(report.backward.r5 <= report.backward.r10);
        assert_eq!(report.rsum, rsum(&report.forward, &report.backward));
    }

    #[test]
    fn inverted_ground_truth_many_to_one() {
        // Two images, each owning two captions.
        let gt = GroundTruth::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let inv = gt.invert().unwrap();
        assert_eq!(inv.relevant(0), &[0]);
        assert_eq!(inv.relevant(1), &[0]);
        assert_eq!(inv.relevant(2), &[1]);
        assert_eq!(inv.relevant(3), &[1]);
    }

    #[test]
    fn histogram_identity_matrix_split() {
        let s = sm(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let gt = GroundTruth::diagonal(3);
        let h = similarity_histogram(&s, &gt, 4).unwrap();
        assert_eq!(h.positive_counts, vec![0, 0, 0, 3]);
        assert_eq!(h.negative_counts, vec![6, 0, 0, 0]);
    }

    #[test]
    fn histogram_hand_counted_two_by_two() {
        let s = sm(2, 2, vec![0.8, 0.2, 0.4, 0.6]);
        let gt = GroundTruth::diagonal(2);
        // Span [0.2, 0.8], two bins split at 0.5: positives 0.8, 0.6 both
        // land high; negatives 0.2, 0.4 both land low.
        let h = similarity_histogram(&s, &gt, 2).unwrap();
        assert_eq!(h.positive_counts, vec![0, 2]);
        assert_eq!(h.negative_counts, vec![2, 0]);
    }

    #[test]
    fn histogram_conserves_pair_count() {
        let mut rng = crate::rng::Pcg32::new(64);
        let vals: Vec<f64> = (0..56).map(|_| rng.next_gaussian()).collect();
        let s = sm(7, 8, vals);
        let gt = GroundTruth::new((0..7).map(|q| vec![q as u32]).collect(), 8).unwrap();
        let h = similarity_histogram(&s, &gt, 5).unwrap();
        let total: u64 = h
            .positive_counts
            .iter()
            .chain(h.negative_counts.iter())
            .sum();
        assert_eq!(total, 56);
        let positives: u64 = h.positive_counts.iter().sum();
        assert_eq!(positives, 7);
    }
}
