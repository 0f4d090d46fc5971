//! Code construction: reliability vectors, frozen masks, the universal
//! partial order of bit-channels and Bhattacharyya-parameter bounds.
//!
//! Bit-channel `i` is identified with its `n`-bit binary expansion
//! `b_{n-1} .. b_0`; the synthetic channel is obtained by applying the
//! polarizing transform bit by bit starting from `b_{n-1}` (a `0` bit
//! selects the degraded branch, a `1` bit the upgraded branch).

use std::collections::VecDeque;
use std::io::Read;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, PolarError, Result};

/// Largest supported tree depth.
pub const MAX_DEPTH: u32 = 20;

/// Rank of every bit-channel: `ranks[i] == 0` is the most reliable channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilityVector {
    n: u32,
    ranks: Vec<u32>,
}

impl ReliabilityVector {
    /// Validates `ranks` as a permutation of `0..N` with `N = 2^n`, `1 <= n <= 20`.
    pub fn new(ranks: Vec<u32>) -> Result<Self> {
        let len = ranks.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << MAX_DEPTH {
            return domain(format!("reliability vector length {len} is not a power of two in [2, 2^20]"));
        }
        let mut seen = vec![false; len];
        for (i, &r) in ranks.iter().enumerate() {
            let r = r as usize;
            if r >= len {
                return domain(format!("rank {r} at index {i} is out of range"));
            }
            if std::mem::replace(&mut seen[r], true) {
                return domain(format!("rank {r} appears more than once"));
            }
        }
        Ok(Self { n: len.trailing_zeros(), ranks })
    }

    /// Builds the vector from bit indices listed from most to least reliable.
    pub fn from_index_order(order: &[u32]) -> Result<Self> {
        let mut ranks = vec![u32::MAX; order.len()];
        for (rank, &idx) in order.iter().enumerate() {
            match ranks.get_mut(idx as usize) {
                Some(slot) if *slot == u32::MAX => *slot = rank as u32,
                Some(_) => return domain(format!("bit index {idx} appears more than once")),
                None => return domain(format!("bit index {idx} is out of range")),
            }
        }
        Self::new(ranks)
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn rank(&self, i: usize) -> u32 {
        self.ranks[i]
    }

    /// Bit indices sorted from most to least reliable.
    pub fn index_order(&self) -> Vec<u32> {
        let mut order = vec![0u32; self.ranks.len()];
        for (i, &r) in self.ranks.iter().enumerate() {
            order[r as usize] = i as u32;
        }
        order
    }
}

/// Information/frozen classification, `true` marks an information bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenMask {
    bits: Vec<bool>,
}

impl FrozenMask {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_info(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of information bits.
    pub fn info_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn info_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
    }
}

/// Bhattacharyya parameter of every bit-channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhattacharyyaProfile {
    pub z: Vec<f64>,
}

/// `s_i = 1` iff `v_i < K`.
pub fn frozen_mask(v: &ReliabilityVector, k: usize) -> Result<FrozenMask> {
    if k > v.len() {
        return domain(format!("K = {k} exceeds N = {}", v.len()));
    }
    Ok(FrozenMask { bits: v.ranks.iter().map(|&r| (r as usize) < k).collect() })
}

/// Ranks by ascending score, equal scores broken by ascending index.
pub fn ranks_from_scores(scores: &[f64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut ranks = vec![0u32; scores.len()];
    for (rank, idx) in order.into_iter().enumerate() {
        ranks[idx] = rank as u32;
    }
    ranks
}

/// Bhattacharyya parameters of the BEC(`epsilon`) bit-channels, and the
/// reliability vector they induce.
///
/// The recursion runs on the pair `(ln z, ln(1 - z))` so that neither very
/// good nor very bad channels collapse onto 0 or 1 and tie artificially;
/// ranking uses the log-odds `ln z - ln(1 - z)`.
pub fn bec_construct(n: u32, epsilon: f64) -> Result<(BhattacharyyaProfile, ReliabilityVector)> {
    if !(1..=MAX_DEPTH).contains(&n) {
        return domain(format!("tree depth {n} outside [1, {MAX_DEPTH}]"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("erasure probability {epsilon} outside (0, 1)"));
    }
    let len = 1usize << n;
    let (lz0, ly0) = (epsilon.ln(), (-epsilon).ln_1p());
    let mut z = Vec::with_capacity(len);
    let mut log_odds = Vec::with_capacity(len);
    for i in 0..len {
        let (mut lz, mut ly) = (lz0, ly0);
        for bit in (0..n).rev() {
            if (i >> bit) & 1 == 0 {
                // z' = 2z - z^2, i.e. 1 - z' = (1 - z)^2
                lz += ly.exp().ln_1p();
                ly *= 2.0;
            } else {
                // z' = z^2
                ly += lz.exp().ln_1p();
                lz *= 2.0;
            }
        }
        z.push(lz.exp());
        log_odds.push(lz - ly);
    }
    let ranks = ranks_from_scores(&log_odds);
    Ok((BhattacharyyaProfile { z }, ReliabilityVector { n, ranks }))
}

/// Outcome of a universal partial order query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degradation {
    /// `W_i` is stochastically degraded with respect to `W_j`.
    Degraded,
    /// The partial order does not decide the pair in this direction.
    NotImplied,
}

/// Transitive closure of the addition and left-swap cover relations.
#[derive(Debug)]
pub struct PartialOrder {
    n: u32,
    /// Row `i` holds the set of `j` reachable from `i` (exclusive of `i`).
    closure: Option<Vec<Vec<u64>>>,
}

/// Depth up to which the full reachability matrix is materialized.
pub const CLOSURE_CACHE_DEPTH: u32 = 10;

impl PartialOrder {
    pub fn new(n: u32) -> Self {
        let closure = (n <= CLOSURE_CACHE_DEPTH).then(|| {
            let len = 1usize << n;
            (0..len)
                .map(|i| {
                    let mut row = vec![0u64; len.div_ceil(64)];
                    for j in reachable_from(i, n) {
                        row[j / 64] |= 1 << (j % 64);
                    }
                    row
                })
                .collect()
        });
        Self { n, closure }
    }

    /// Shared instance for small depths; larger depths get a fresh uncached order.
    pub fn shared(n: u32) -> Arc<PartialOrder> {
        static CACHE: [OnceLock<Arc<PartialOrder>>; CLOSURE_CACHE_DEPTH as usize + 1] =
            [const { OnceLock::new() }; CLOSURE_CACHE_DEPTH as usize + 1];
        match CACHE.get(n as usize) {
            Some(cell) => cell.get_or_init(|| Arc::new(PartialOrder::new(n))).clone(),
            None => Arc::new(PartialOrder::new(n)),
        }
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn compare(&self, i: usize, j: usize) -> Degradation {
        let reachable = match &self.closure {
            Some(rows) => (rows[i][j / 64] >> (j % 64)) & 1 == 1,
            None => i != j && reachable_from(i, self.n).contains(&j),
        };
        if reachable {
            Degradation::Degraded
        } else {
            Degradation::NotImplied
        }
    }
}

/// Breadth-first search over the cover relations starting at `i`.
fn reachable_from(i: usize, n: u32) -> Vec<usize> {
    let len = 1usize << n;
    let mut seen = vec![false; len];
    let mut out = Vec::new();
    let mut queue = VecDeque::from([i]);
    seen[i] = true;
    while let Some(x) = queue.pop_front() {
        let mut push = |y: usize| {
            if !seen[y] {
                seen[y] = true;
                out.push(y);
                queue.push_back(y);
            }
        };
        for k in 0..n {
            if (x >> k) & 1 == 0 {
                // addition: set bit k
                push(x | (1 << k));
                // left swap: move a 1 from a lower position l up to k
                for l in 0..k {
                    if (x >> l) & 1 == 1 {
                        push((x | (1 << k)) & !(1 << l));
                    }
                }
            }
        }
    }
    out
}

/// Whether `W_i` is degraded with respect to `W_j` under the universal
/// partial order (addition and left-swap properties, transitively closed).
pub fn partial_order_degraded(i: usize, j: usize, n: u32) -> Result<Degradation> {
    if !(1..=MAX_DEPTH).contains(&n) {
        return domain(format!("tree depth {n} outside [1, {MAX_DEPTH}]"));
    }
    let len = 1usize << n;
    if i >= len || j >= len {
        return domain(format!("bit-channel index out of range for N = {len}"));
    }
    Ok(PartialOrder::shared(n).compare(i, j))
}

/// Smallest value of `sqrt-bound - power-bound` over a grid on `[0, 1]`,
/// comparing `(2z - z^2)^4` with `z^2 sqrt(2 - z^4) sqrt(2 - z^4 (2 - z^4))`.
///
/// A non-negative result (up to rounding) certifies that the channel with
/// binary suffix `011` is never worse than the one with suffix `100`.
pub fn verify_z_bound_inequality(grid_step: f64) -> f64 {
    let steps = (1.0 / grid_step).ceil() as usize;
    (0..=steps)
        .map(|s| ((s as f64) * grid_step).min(1.0))
        .map(z_bound_margin)
        .fold(f64::INFINITY, f64::min)
}

/// `rhs - lhs` of the bound at a single point.
pub fn z_bound_margin(z: f64) -> f64 {
    let lhs = (2.0 * z - z * z).powi(4);
    let z4 = z.powi(4);
    let rhs = z * z * (2.0 - z4).sqrt() * (2.0 - z4 * (2.0 - z4)).sqrt();
    rhs - lhs
}

/// Line layout of a reliability file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvLayout {
    /// Entry `i` is the rank of bit-channel `i`.
    RankByIndex,
    /// Entry `r` is the bit-channel with rank `r`.
    IndexByRank,
}

/// Reads a reliability vector.
///
/// An optional first line `#layout=rank-by-index` or `#layout=index-by-rank`
/// selects the layout (default: rank-by-index). Entries are integers, one per
/// line or comma separated; blank lines are skipped and CRLF is accepted.
pub fn load_reliability_csv<R: Read>(mut source: R) -> Result<ReliabilityVector> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| PolarError::Format { line: 0, message: e.to_string() })?;

    let mut layout = CsvLayout::RankByIndex;
    let mut values: Vec<(u32, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if let Some(comment) = line.strip_prefix('#') {
            match comment.trim().strip_prefix("layout=").map(str::trim) {
                Some("rank-by-index") => layout = CsvLayout::RankByIndex,
                Some("index-by-rank") => layout = CsvLayout::IndexByRank,
                Some(other) => {
                    return Err(PolarError::Format { line: lineno, message: format!("unknown layout `{other}`") })
                }
                None => {}
            }
            continue;
        }
        for field in line.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            let value = field.parse::<u32>().map_err(|e| PolarError::Format {
                line: lineno,
                message: format!("`{field}` is not a non-negative integer: {e}"),
            })?;
            values.push((value, lineno));
        }
    }

    let len = values.len();
    if len < 2 || !len.is_power_of_two() || len > 1 << MAX_DEPTH {
        return Err(PolarError::Format {
            line: values.last().map_or(0, |v| v.1),
            message: format!("{len} entries is not a power of two in [2, 2^20]"),
        });
    }
    let mut first_seen = vec![0usize; len];
    for &(value, line) in &values {
        let slot = first_seen.get_mut(value as usize).ok_or_else(|| PolarError::Format {
            line,
            message: format!("value {value} out of range for N = {len}"),
        })?;
        if *slot != 0 {
            return Err(PolarError::Format {
                line,
                message: format!("value {value} repeats the entry on line {}", *slot),
            });
        }
        *slot = line;
    }
    let raw: Vec<u32> = values.into_iter().map(|(v, _)| v).collect();
    let vector = match layout {
        CsvLayout::RankByIndex => ReliabilityVector::new(raw),
        CsvLayout::IndexByRank => ReliabilityVector::from_index_order(&raw),
    };
    vector.map_err(|e| PolarError::Format { line: 0, message: e.to_string() })
}

/// A polar code `P(N, K)` defined by a reliability vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarCode {
    reliability: Arc<ReliabilityVector>,
    k: usize,
    mask: FrozenMask,
    bit_reversed: bool,
}

impl PolarCode {
    /// Code with generator `B_N F^{⊗n}` (bit-reversed transmit order).
    pub fn new(reliability: Arc<ReliabilityVector>, k: usize) -> Result<Self> {
        let mask = frozen_mask(&reliability, k)?;
        Ok(Self { reliability, k, mask, bit_reversed: true })
    }

    /// Same code with or without the bit-reversal permutation in the generator.
    pub fn with_bit_reversal(mut self, bit_reversed: bool) -> Self {
        self.bit_reversed = bit_reversed;
        self
    }

    /// BEC-constructed code.
    pub fn bec(n: u32, k: usize, epsilon: f64) -> Result<Self> {
        let (_, v) = bec_construct(n, epsilon)?;
        Self::new(Arc::new(v), k)
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn depth(&self) -> u32 {
        self.reliability.depth()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.len() as f64
    }

    pub fn reliability(&self) -> &ReliabilityVector {
        &self.reliability
    }

    pub fn shared_reliability(&self) -> Arc<ReliabilityVector> {
        self.reliability.clone()
    }

    pub fn mask(&self) -> &FrozenMask {
        &self.mask
    }

    pub fn bit_reversed(&self) -> bool {
        self.bit_reversed
    }

    /// Same reliability vector at a different rate.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Ok(Self::new(self.reliability.clone(), k)?.with_bit_reversal(self.bit_reversed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> ReliabilityVector {
        ReliabilityVector::new(vec![7, 6, 5, 3, 4, 2, 1, 0]).unwrap()
    }

    #[test]
    fn bec_small_depths() {
        let (p, v) = bec_construct(1, 0.5).unwrap();
        assert_eq!(p.z, vec![0.75, 0.25]);
        assert_eq!(v.ranks(), &[1, 0]);

        let (p, v) = bec_construct(2, 0.5).unwrap();
        for (got, want) in p.z.iter().zip([0.9375, 0.5625, 0.4375, 0.0625]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(v.ranks(), &[3, 2, 1, 0]);

        let (_, v) = bec_construct(3, 0.5).unwrap();
        assert_eq!(v, fig1());
    }

    #[test]
    fn bec_rejects_bad_arguments() {
        assert!(bec_construct(3, 0.0).is_err());
        assert!(bec_construct(3, 1.0).is_err());
        assert!(bec_construct(0, 0.5).is_err());
        assert!(bec_construct(21, 0.5).is_err());
    }

    #[test]
    fn bec_extreme_erasure_keeps_distinct_order() {
        // ε^(2^10) underflows in the linear domain; ranks must still follow
        // the partial order rather than the index tie-break.
        let (_, v) = bec_construct(10, 0.1).unwrap();
        assert_eq!(v.rank(1023), 0);
        assert_eq!(v.rank(0), 1023);
        assert!(v.rank(1022) > v.rank(1023));
    }

    #[test]
    fn masks_from_fig1_vector() {
        let v = fig1();
        let m4 = frozen_mask(&v, 4).unwrap();
        assert_eq!(m4.bits(), &[false, false, false, true, false, true, true, true]);
        let m5 = frozen_mask(&v, 5).unwrap();
        assert_eq!(m5.bits(), &[false, false, false, true, true, true, true, true]);
        assert_eq!(frozen_mask(&v, 0).unwrap().info_count(), 0);
        assert!(frozen_mask(&v, 9).is_err());
    }

    #[test]
    fn partial_order_examples() {
        assert_eq!(partial_order_degraded(0, 7, 3).unwrap(), Degradation::Degraded);
        assert_eq!(partial_order_degraded(5, 6, 3).unwrap(), Degradation::Degraded);
        assert_eq!(partial_order_degraded(3, 4, 3).unwrap(), Degradation::NotImplied);
        assert_eq!(partial_order_degraded(4, 3, 3).unwrap(), Degradation::NotImplied);
        assert_eq!(partial_order_degraded(2, 2, 3).unwrap(), Degradation::NotImplied);
        assert!(partial_order_degraded(8, 0, 3).is_err());
    }

    #[test]
    fn uncached_depth_matches_bfs() {
        let po = PartialOrder::new(11);
        assert!(po.closure.is_none());
        assert_eq!(po.compare(0, 2047), Degradation::Degraded);
        assert_eq!(po.compare(0b011, 0b100), Degradation::NotImplied);
    }

    #[test]
    fn z_bound_endpoints() {
        assert_eq!(z_bound_margin(0.0), 0.0);
        assert!(z_bound_margin(1.0).abs() < 1e-15);
        assert!(verify_z_bound_inequality(1e-4) >= -1e-12);
    }

    #[test]
    fn csv_layouts() {
        let v = load_reliability_csv("#layout=rank-by-index\n3\n2\n1\n0\n".as_bytes()).unwrap();
        assert_eq!(v.ranks(), &[3, 2, 1, 0]);
        let v = load_reliability_csv("#layout=index-by-rank\r\n3\r\n2\r\n1\r\n0\r\n".as_bytes()).unwrap();
        assert_eq!(v.ranks(), &[3, 2, 1, 0]);
        let v = load_reliability_csv("#layout=index-by-rank\n7,6,5,3\n4,2,1,0\n".as_bytes()).unwrap();
        assert_eq!(v.ranks(), &[7, 6, 5, 3, 4, 2, 1, 0]);
    }

    #[test]
    fn csv_errors_name_the_line() {
        match load_reliability_csv("0\n0\n1\n2".as_bytes()) {
            Err(PolarError::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match load_reliability_csv("0\n1\nx\n2".as_bytes()) {
            Err(PolarError::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load_reliability_csv("0\n1\n2".as_bytes()), Err(PolarError::Format { .. })));
        assert!(matches!(load_reliability_csv("0\n1\n2\n4".as_bytes()), Err(PolarError::Format { line: 4, .. })));
    }
}
