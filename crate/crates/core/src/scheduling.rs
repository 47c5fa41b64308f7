//! Landmark selection policies.
//!
//! [`select_alg1`] ranks candidates by how much a measurement is guaranteed
//! to shrink the bounded determinant, using only the observer's own block
//! and its cross-covariances ([`PolicyInput`]). The log-determinant greedy
//! and exhaustive selectors need the whole joint belief and serve as
//! baselines.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::belief::JointBelief;
use crate::bounds::correlation_trace;
use crate::error::{Error, Result};
use crate::fusion::{self, ekf_update};
use crate::linalg::{self, Mat2};
use crate::params::SensorParams;
use crate::sensing::{predicted_measurement, RelativeMeasurement};

/// Added to the observer block before it is inverted for scoring.
pub const SCORE_REGULARIZATION: f64 = 1e-12;

/// Largest candidate set the exhaustive selector accepts.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Everything one observer knows locally when choosing landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyInput {
    observer: usize,
    own_covariance: Mat2,
    /// `(j, P_ij)` sorted by `j`.
    cross: Vec<(usize, Mat2)>,
    max_picks: usize,
    noise_bound: f64,
}

impl PolicyInput {
    /// `cross` may be in any order; duplicate ids and the observer itself
    /// are rejected.
    pub fn new(
        observer: usize,
        own_covariance: Mat2,
        mut cross: Vec<(usize, Mat2)>,
        max_picks: usize,
        noise_bound: f64,
    ) -> Result<Self> {
        if !(noise_bound > 0.0) {
            return Err(Error::InvalidParams("noise bound must be positive"));
        }
        cross.sort_by_key(|c| c.0);
        for w in cross.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidScenario(alloc::format!("candidate {} listed twice", w[0].0)));
            }
        }
        if cross.iter().any(|c| c.0 == observer) {
            return Err(Error::SelfMeasurement(observer));
        }
        Ok(Self { observer, own_covariance, cross, max_picks, noise_bound })
    }

    /// Copy the observer's local blocks out of a joint belief.
    pub fn from_belief(
        belief: &JointBelief,
        observer: usize,
        candidates: &[usize],
        max_picks: usize,
        noise_bound: f64,
    ) -> Result<Self> {
        let own = belief.block(observer, observer)?;
        let cross = candidates
            .iter()
            .map(|&j| Ok((j, belief.block(observer, j)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(observer, own, cross, max_picks, noise_bound)
    }

    pub fn observer(&self) -> usize {
        self.observer
    }

    pub fn max_picks(&self) -> usize {
        self.max_picks
    }

    pub fn noise_bound(&self) -> f64 {
        self.noise_bound
    }

    pub fn own_covariance(&self) -> &Mat2 {
        &self.own_covariance
    }

    /// Candidate ids in ascending order.
    pub fn candidates(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.cross.iter().map(|c| c.0)
    }

    pub fn cross_covariance(&self, j: usize) -> Option<&Mat2> {
        self.cross.binary_search_by_key(&j, |c| c.0).ok().map(|k| &self.cross[k].1)
    }

    fn own_inverse(&self) -> Mat2 {
        linalg::adjugate_inverse(&(self.own_covariance + Mat2::identity() * SCORE_REGULARIZATION))
    }
}

/// `tr(P_ii + P_ij' P_ii^-1 P_ij - P_ij - P_ij') / r_c`; `None` if `j` is
/// not a candidate.
pub fn score_landmark(input: &PolicyInput, j: usize) -> Option<f64> {
    let p_ij = input.cross_covariance(j)?;
    Some(correlation_trace(&input.own_covariance, p_ij, &input.own_inverse()) / input.noise_bound)
}

/// Scores of all candidates, ascending by id.
pub fn landmark_scores(input: &PolicyInput) -> Vec<(usize, f64)> {
    let inv = input.own_inverse();
    input
        .cross
        .iter()
        .map(|(j, p_ij)| (*j, correlation_trace(&input.own_covariance, p_ij, &inv) / input.noise_bound))
        .collect()
}

/// The `max_picks` highest-scoring candidates, best first, ties to the
/// lower id. Returns every candidate (ascending) when there are no more
/// than `max_picks`.
pub fn select_alg1(input: &PolicyInput) -> Vec<usize> {
    if input.max_picks >= input.cross.len() {
        return input.candidates().collect();
    }
    rank_top(landmark_scores(input), input.max_picks)
}

/// Top `q` entries by score, ties to the lower id.
pub fn rank_top(mut scored: Vec<(usize, f64)>, q: usize) -> Vec<usize> {
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    scored.into_iter().take(q).map(|s| s.0).collect()
}

/// Uniform random subsets held for a number of ticks per observer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSelector {
    period_ticks: u64,
    held: BTreeMap<usize, (u64, Vec<usize>)>,
}

impl RandomSelector {
    pub fn new(period_ticks: u64) -> Self {
        Self { period_ticks: period_ticks.max(1), held: BTreeMap::new() }
    }

    pub fn period_ticks(&self) -> u64 {
        self.period_ticks
    }

    /// Draws a fresh subset at the start of each period; within a period
    /// the held subset is intersected with the current candidates.
    pub fn select<R: Rng + ?Sized>(&mut self, input: &PolicyInput, tick: u64, rng: &mut R) -> Vec<usize> {
        let candidates: Vec<usize> = input.candidates().collect();
        if input.max_picks >= candidates.len() {
            return candidates;
        }
        let epoch = tick / self.period_ticks;
        if let Some((drawn, ids)) = self.held.get(&input.observer) {
            if *drawn == epoch {
                return ids.iter().copied().filter(|j| candidates.binary_search(j).is_ok()).collect();
            }
        }
        let mut ids: Vec<usize> = rand::seq::index::sample(rng, candidates.len(), input.max_picks)
            .into_iter()
            .map(|k| candidates[k])
            .collect();
        ids.sort_unstable();
        self.held.insert(input.observer, (epoch, ids.clone()));
        ids
    }
}

/// The measurements `observer` expects to receive from `targets`, with
/// zero innovation.
pub fn predicted_measurements(
    belief: &JointBelief,
    observer: usize,
    targets: &[usize],
    heading: f64,
) -> Result<Vec<RelativeMeasurement>> {
    let xa = belief.estimate(observer)?;
    let k = belief.timestep();
    targets
        .iter()
        .map(|&j| {
            if j == observer {
                return Err(Error::SelfMeasurement(j));
            }
            Ok(predicted_measurement(observer, j, k, &xa, &belief.estimate(j)?, heading))
        })
        .collect()
}

/// Posterior log-determinant after `observer` measures `targets`, processed
/// in canonical order with predicted readings. `headings` is indexed by
/// robot.
pub fn evaluate_selection(
    belief: &JointBelief,
    observer: usize,
    targets: &[usize],
    headings: &[f64],
    params: &SensorParams,
) -> Result<f64> {
    if targets.is_empty() {
        return Ok(belief.log_det());
    }
    let mut ms = predicted_measurements(belief, observer, targets, heading_of(headings, observer)?)?;
    fusion::canonical_order(&mut ms);
    let mut post = belief.clone();
    for m in &ms {
        ekf_update(&mut post, m, headings, params)?;
    }
    Ok(post.log_det())
}

fn heading_of(headings: &[f64], i: usize) -> Result<f64> {
    headings.get(i).copied().ok_or(Error::RobotOutOfRange { index: i, n_robots: headings.len() })
}

/// Result of the log-determinant greedy selector.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySelection {
    /// In pick order.
    pub selected: Vec<usize>,
    /// Joint log-determinant after each pick.
    pub log_dets: Vec<f64>,
}

/// Repeatedly adds the candidate whose simulated update leaves the smallest
/// joint log-determinant, ties to the lower id, until `q` picks are made.
pub fn select_logdet_greedy(
    belief: &JointBelief,
    observer: usize,
    candidates: &[usize],
    q: usize,
    headings: &[f64],
    params: &SensorParams,
) -> Result<GreedySelection> {
    let heading = heading_of(headings, observer)?;
    let mut remaining: Vec<usize> = candidates.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    let mut current = belief.clone();
    let mut out = GreedySelection { selected: Vec::new(), log_dets: Vec::new() };
    while out.selected.len() < q && !remaining.is_empty() {
        let mut best: Option<(usize, f64, JointBelief)> = None;
        for (k, &j) in remaining.iter().enumerate() {
            let m = predicted_measurements(&current, observer, &[j], heading)?[0];
            let mut trial = current.clone();
            ekf_update(&mut trial, &m, headings, params)?;
            let ld = trial.log_det();
            if best.as_ref().is_none_or(|b| ld < b.1) {
                best = Some((k, ld, trial));
            }
        }
        let (k, ld, post) = best.expect("remaining is non-empty");
        out.selected.push(remaining.remove(k));
        out.log_dets.push(ld);
        current = post;
    }
    Ok(out)
}

/// Best subset of at most `q` candidates by [`evaluate_selection`].
/// Subsets are visited in lexicographic order and only a strictly better
/// one replaces the incumbent.
pub fn select_exhaustive(
    belief: &JointBelief,
    observer: usize,
    candidates: &[usize],
    q: usize,
    headings: &[f64],
    params: &SensorParams,
) -> Result<(Vec<usize>, f64)> {
    let mut ids: Vec<usize> = candidates.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::TooManyCandidates { size: ids.len(), limit: EXHAUSTIVE_LIMIT });
    }
    let mut subsets: Vec<Vec<usize>> = (0u32..1 << ids.len())
        .filter(|mask| mask.count_ones() as usize <= q)
        .map(|mask| (0..ids.len()).filter(|b| mask & (1 << b) != 0).map(|b| ids[b]).collect())
        .collect();
    subsets.sort();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for s in subsets {
        let ld = evaluate_selection(belief, observer, &s, headings, params)?;
        if best.as_ref().is_none_or(|b| ld < b.1) {
            best = Some((s, ld));
        }
    }
    Ok(best.expect("the empty subset is always visited"))
}

/// Named selection policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    Alg1,
    Random,
    LogdetGreedy,
    TakeAll,
    BruteForce,
}

impl Policy {
    pub const ALL: [Policy; 5] =
        [Policy::Alg1, Policy::Random, Policy::LogdetGreedy, Policy::TakeAll, Policy::BruteForce];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Alg1 => "alg1",
            Policy::Random => "random",
            Policy::LogdetGreedy => "logdet-greedy",
            Policy::TakeAll => "take-all",
            Policy::BruteForce => "brute-force",
        }
    }

    /// Whether the policy reads covariance blocks the observer does not own.
    pub fn needs_joint_belief(self) -> bool {
        matches!(self, Policy::LogdetGreedy | Policy::BruteForce)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPolicy(pub alloc::string::String);

impl fmt::Display for UnknownPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown policy `{}` (expected alg1, random, logdet-greedy, take-all or brute-force)", self.0)
    }
}

impl core::error::Error for UnknownPolicy {}

impl FromStr for Policy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownPolicy(s.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_belief, rng};
    use alloc::vec;

    fn input_with_scores(scores: &[(usize, f64)], q: usize) -> PolicyInput {
        // P_ii = I, P_ij = c I gives J = 2 (1 - c)^2
        let cross =
            scores.iter().map(|&(j, s)| (j, Mat2::identity() * (1.0 - libm::sqrt(s / 2.0)))).collect();
        PolicyInput::new(0, Mat2::identity(), cross, q, 1.0).unwrap()
    }

    #[test]
    fn score_zero_cross_covariance() {
        let input =
            PolicyInput::new(0, Mat2::identity() * 0.01, vec![(1, Mat2::zeros())], 1, 1.0).unwrap();
        assert!((score_landmark(&input, 1).unwrap() - 0.02).abs() < 1e-9 * 0.02);
        assert_eq!(score_landmark(&input, 2), None);
    }

    #[test]
    fn score_fully_correlated() {
        let p = Mat2::new(0.3, 0.1, 0.1, 0.2);
        let input = PolicyInput::new(0, p, vec![(1, p)], 1, 1.0).unwrap();
        let s = score_landmark(&input, 1).unwrap();
        assert!(s.abs() < 1e-12, "{s}");
    }

    #[test]
    fn score_matches_term_by_term() {
        let mut g = rng(3);
        for _ in 0..500 {
            let b = random_belief(&mut g, 3);
            let r = 0.5 + g.random::<f64>();
            let input = PolicyInput::from_belief(&b, 0, &[1, 2], 1, r).unwrap();
            for j in [1, 2] {
                let pii = b.block(0, 0).unwrap();
                let pij = b.block(0, j).unwrap();
                let pji = b.block(j, 0).unwrap();
                let (a, bb, c, d) = (pii[(0, 0)] + 1e-12, pii[(0, 1)], pii[(1, 0)], pii[(1, 1)] + 1e-12);
                let det = a * d - bb * c;
                let inv = [[d / det, -bb / det], [-c / det, a / det]];
                let mut quad = 0.0;
                for r_ in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            quad += pji[(r_, k)] * inv[k][l] * pij[(l, r_)];
                        }
                    }
                }
                let expect = (pii[(0, 0)] + pii[(1, 1)] + quad - pij[(0, 0)] - pij[(1, 1)]
                    - pji[(0, 0)]
                    - pji[(1, 1)])
                    / r;
                let got = score_landmark(&input, j).unwrap();
                assert!((got - expect).abs() <= 1e-10 + 1e-9 * expect.abs(), "{got} {expect}");
                assert!(got >= -1e-12);
            }
        }
    }

    #[test]
    fn score_regularizes_singular_block() {
        let input = PolicyInput::new(0, Mat2::zeros(), vec![(1, Mat2::zeros())], 1, 1.0).unwrap();
        let s = score_landmark(&input, 1).unwrap();
        assert!(s.is_finite() && s.abs() < 1e-9);
    }

    #[test]
    fn alg1_examples() {
        let input = input_with_scores(&[(2, 5.0), (4, 3.0), (7, 7.0)], 2);
        assert_eq!(select_alg1(&input), vec![7, 2]);

        let input = input_with_scores(&[(2, 5.0), (4, 3.0)], 3);
        assert_eq!(select_alg1(&input), vec![2, 4]);

        let input = input_with_scores(&[(4, 1.0), (2, 1.0)], 1);
        assert_eq!(select_alg1(&input), vec![2]);

        let input = input_with_scores(&[], 2);
        assert!(select_alg1(&input).is_empty());
    }

    #[test]
    fn alg1_with_all_picks_is_take_all() {
        let mut g = rng(4);
        let b = random_belief(&mut g, 5);
        let input = PolicyInput::from_belief(&b, 2, &[4, 0, 1, 3], 4, 1.0).unwrap();
        assert_eq!(select_alg1(&input), vec![0, 1, 3, 4]);
    }

    #[test]
    fn input_rejects_bad_candidates() {
        let mut g = rng(4);
        let b = random_belief(&mut g, 3);
        assert!(PolicyInput::from_belief(&b, 0, &[0, 1], 1, 1.0).is_err());
        assert!(PolicyInput::from_belief(&b, 0, &[1, 1], 1, 1.0).is_err());
        assert!(PolicyInput::from_belief(&b, 0, &[5], 1, 1.0).is_err());
        assert!(PolicyInput::from_belief(&b, 0, &[1], 1, 0.0).is_err());
    }

    #[test]
    fn alg1_ignores_non_local_blocks() {
        let mut g = rng(12);
        for _ in 0..100 {
            let n = 3 + g.random_range(0..4);
            let b = random_belief(&mut g, n);
            let cands: Vec<usize> = (1..n).collect();
            let before = select_alg1(&PolicyInput::from_belief(&b, 0, &cands, 1, 1.1).unwrap());
            let mut cov = b.covariance().clone();
            for i in 1..n {
                for j in 1..n {
                    let blk = linalg::block(&cov, i, j) * (1.0 + g.random::<f64>());
                    linalg::set_block(&mut cov, i, j, &blk);
                }
            }
            let other = JointBelief::from_parts(b.estimates().to_vec(), cov);
            // the perturbation may break PSD; from_parts only checks symmetry
            let other = match other {
                Ok(o) => o,
                Err(_) => continue,
            };
            let after = select_alg1(&PolicyInput::from_belief(&other, 0, &cands, 1, 1.1).unwrap());
            assert_eq!(before, after);
        }
    }

    #[test]
    fn random_selector_holds_and_redraws() {
        let input = input_with_scores(&[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)], 2);
        let mut sel = RandomSelector::new(10);
        let mut g = rng(1);
        let first = sel.select(&input, 0, &mut g);
        assert_eq!(first.len(), 2);
        for t in 1..10 {
            assert_eq!(sel.select(&input, t, &mut g), first);
        }
        // held ids that leave the candidate set are dropped
        let smaller = input_with_scores(&[(first[0], 1.0), (9, 1.0), (8, 1.0)], 2);
        assert_eq!(sel.select(&smaller, 5, &mut g), vec![first[0]]);

        // next period draws again
        let next = sel.select(&input, 10, &mut g);
        assert_eq!(next.len(), 2);
    }

    #[test]
    fn random_selector_returns_all_when_q_covers() {
        let input = input_with_scores(&[(1, 1.0), (2, 1.0)], 2);
        assert_eq!(RandomSelector::new(1).select(&input, 0, &mut rng(0)), vec![1, 2]);
    }

    #[test]
    fn random_selector_is_deterministic() {
        let input = input_with_scores(&[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0), (5, 1.0)], 2);
        let run = || {
            let mut sel = RandomSelector::new(3);
            let mut g = rng(77);
            (0..60).map(|t| sel.select(&input, t, &mut g)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn random_selector_uniform() {
        let input = input_with_scores(&[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)], 1);
        let mut sel = RandomSelector::new(1);
        let mut g = rng(2024);
        let mut counts = [0usize; 5];
        let draws = 10_000;
        for t in 0..draws {
            counts[sel.select(&input, t, &mut g)[0]] += 1;
        }
        for c in &counts[1..] {
            let f = *c as f64 / draws as f64;
            assert!((f - 0.25).abs() <= 0.02, "{counts:?}");
        }
    }

    fn random_scene(g: &mut rand_chacha::ChaCha8Rng, n: usize) -> (JointBelief, Vec<f64>) {
        let b = random_belief(g, n);
        let h = (0..n).map(|_| g.random::<f64>() * core::f64::consts::TAU).collect();
        (b, h)
    }

    #[test]
    fn greedy_single_pick_equals_exhaustive() {
        let p = SensorParams::default();
        let mut g = rng(21);
        for _ in 0..50 {
            let (b, h) = random_scene(&mut g, 4);
            let gr = select_logdet_greedy(&b, 0, &[1, 2, 3], 1, &h, &p).unwrap();
            let (ex, ld) = select_exhaustive(&b, 0, &[1, 2, 3], 1, &h, &p).unwrap();
            assert_eq!(gr.selected, ex);
            assert!((gr.log_dets[0] - ld).abs() < 1e-9);
        }
    }

    #[test]
    fn greedy_is_monotone_and_reproducible() {
        let p = SensorParams::default();
        let mut g = rng(22);
        for _ in 0..30 {
            let (b, h) = random_scene(&mut g, 6);
            let sel = select_logdet_greedy(&b, 2, &[0, 1, 3, 4, 5], 3, &h, &p).unwrap();
            assert_eq!(sel.selected.len(), 3);
            let mut prev = b.log_det();
            for ld in &sel.log_dets {
                assert!(*ld <= prev + 1e-9);
                prev = *ld;
            }
            assert_eq!(sel, select_logdet_greedy(&b, 2, &[5, 4, 3, 1, 0], 3, &h, &p).unwrap());
        }
    }

    #[test]
    fn greedy_leaves_belief_untouched() {
        let p = SensorParams::default();
        let (b, h) = random_scene(&mut rng(9), 4);
        let copy = b.clone();
        let _ = select_logdet_greedy(&b, 0, &[1, 2, 3], 2, &h, &p).unwrap();
        let _ = select_exhaustive(&b, 0, &[1, 2, 3], 2, &h, &p).unwrap();
        assert_eq!(b, copy);
    }

    #[test]
    fn exhaustive_examples() {
        let p = SensorParams::default();
        let mut g = rng(23);
        let (b, h) = random_scene(&mut g, 4);
        assert_eq!(select_exhaustive(&b, 0, &[3], 1, &h, &p).unwrap().0, vec![3]);
        assert_eq!(select_exhaustive(&b, 0, &[1, 2, 3], 3, &h, &p).unwrap().0, vec![1, 2, 3]);
        let (none, ld) = select_exhaustive(&b, 0, &[1, 2, 3], 0, &h, &p).unwrap();
        assert!(none.is_empty() && ld == b.log_det());

        let (big, h) = random_scene(&mut g, 10);
        let err = select_exhaustive(&big, 0, &(1..10).collect::<Vec<_>>(), 2, &h, &p);
        assert_eq!(err, Err(Error::TooManyCandidates { size: 9, limit: 8 }));
    }

    #[test]
    fn exhaustive_dominates_other_selectors() {
        let p = SensorParams::default();
        let r = p.noise_bound();
        let mut g = rng(24);
        for t in 0..60 {
            let (b, h) = random_scene(&mut g, 4);
            let q = 1 + t % 2;
            let c = [1, 2, 3];
            let (_, best) = select_exhaustive(&b, 0, &c, q, &h, &p).unwrap();
            let a = select_alg1(&PolicyInput::from_belief(&b, 0, &c, q, r).unwrap());
            let gr = select_logdet_greedy(&b, 0, &c, q, &h, &p).unwrap().selected;
            assert!(best <= evaluate_selection(&b, 0, &a, &h, &p).unwrap());
            assert!(best <= evaluate_selection(&b, 0, &gr, &h, &p).unwrap());
        }
    }

    #[test]
    fn alg1_beats_random_on_average() {
        let p = SensorParams::default();
        let r = p.noise_bound();
        let mut g = rng(25);
        let (mut a_sum, mut r_sum) = (0.0, 0.0);
        let trials = 200;
        for t in 0..trials {
            let (b, h) = random_scene(&mut g, 5);
            let c = [1, 2, 3, 4];
            let input = PolicyInput::from_belief(&b, 0, &c, 1, r).unwrap();
            let a = select_alg1(&input);
            let rnd = RandomSelector::new(1).select(&input, t, &mut g);
            a_sum += evaluate_selection(&b, 0, &a, &h, &p).unwrap();
            r_sum += evaluate_selection(&b, 0, &rnd, &h, &p).unwrap();
        }
        assert!(a_sum <= r_sum, "{a_sum} {r_sum}");
    }

    #[test]
    fn predicted_measurements_have_zero_innovation() {
        let mut b = random_belief(&mut rng(3), 3);
        b.set_timestep(4);
        let ms = predicted_measurements(&b, 1, &[0, 2], 0.7).unwrap();
        for m in &ms {
            let lin = crate::sensing::innovation_and_jacobians(
                m,
                &b.estimates()[1],
                &b.estimates()[m.target],
                0.7,
            );
            assert!(lin.innovation.norm() < 1e-12);
            assert_eq!(m.timestep, 4);
        }
        assert!(predicted_measurements(&b, 1, &[1], 0.0).is_err());
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!("greedy".parse::<Policy>().is_err());
        assert!(Policy::BruteForce.needs_joint_belief() && !Policy::Alg1.needs_joint_belief());
    }
}
