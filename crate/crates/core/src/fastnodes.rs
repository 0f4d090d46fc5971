//! Special nodes: on-line identification from `(v, K)`, direct node
//! decoders for SC and SCL, operation lists and their storage cost, and the
//! fast decoders built on them.
//!
//! A node of size `T = 2^t` covers the leaves `offset..offset + T`; its frozen
//! pattern is `s_i = [v_{offset+i} < K]`. Identification reads at most six
//! ranks of the slice, while [`identify_fullscan`] inspects the whole
//! pattern and serves as the reference.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::construction::{frozen_mask, PolarCode, ReliabilityVector};
use crate::encoder::polar_transform_in_place;
use crate::error::{domain, PolarError, Result};
use crate::list::{select_survivors, Candidate, ListDecoder, LpsclConfig};
use crate::llr::{FloatDomain, LlrDomain};
use crate::sc::{combine_in_place, finish_codeword, tree_order, ScOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeClass {
    Rate0,
    Rate1,
    Rep,
    Spc,
    TypeI,
    TypeII,
    TypeIII,
    TypeIV,
    TypeV,
    Generic,
}

impl NodeClass {
    /// Every special class, basic ones first.
    pub const SPECIAL: [NodeClass; 9] = [
        NodeClass::Rate0,
        NodeClass::Rate1,
        NodeClass::Rep,
        NodeClass::Spc,
        NodeClass::TypeI,
        NodeClass::TypeII,
        NodeClass::TypeIII,
        NodeClass::TypeIV,
        NodeClass::TypeV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeClass::Rate0 => "RATE0",
            NodeClass::Rate1 => "RATE1",
            NodeClass::Rep => "REP",
            NodeClass::Spc => "SPC",
            NodeClass::TypeI => "TYPEI",
            NodeClass::TypeII => "TYPEII",
            NodeClass::TypeIII => "TYPEIII",
            NodeClass::TypeIV => "TYPEIV",
            NodeClass::TypeV => "TYPEV",
            NodeClass::Generic => "GENERIC",
        }
    }

    pub fn is_extended(self) -> bool {
        matches!(self, NodeClass::TypeI | NodeClass::TypeII | NodeClass::TypeIII | NodeClass::TypeIV | NodeClass::TypeV)
    }

    /// Smallest node size at which the class is recognised.
    ///
    /// SPC starts at 4 because at `T = 2` its pattern coincides with Rep;
    /// Type-III starts at 8 because at `T = 4` it coincides with Type-I.
    /// Type-V is admitted at 8, where the check on `s_{T-9}` has no index.
    pub fn min_size(self) -> usize {
        match self {
            NodeClass::Rate0 | NodeClass::Rate1 | NodeClass::Rep => 2,
            NodeClass::Spc | NodeClass::TypeI => 4,
            NodeClass::TypeII | NodeClass::TypeIII | NodeClass::TypeIV | NodeClass::TypeV => 8,
            NodeClass::Generic => usize::MAX,
        }
    }

    /// Time steps spent by the SC node decoder.
    pub fn sc_phases(self) -> usize {
        match self {
            NodeClass::Spc | NodeClass::TypeIII | NodeClass::TypeIV => 2,
            NodeClass::Generic => 0,
            _ => 1,
        }
    }

    /// Time steps spent by the list node decoder.
    pub fn list_phases(self) -> usize {
        match self {
            NodeClass::Rate0 => 1,
            NodeClass::Rep => 2,
            NodeClass::Rate1 => 3,
            NodeClass::Spc => 4,
            _ => 0,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NodeClass {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        NodeClass::SPECIAL
            .into_iter()
            .chain([NodeClass::Generic])
            .find(|c| c.name() == upper)
            .ok_or_else(|| PolarError::Domain(format!("unknown node class {s:?}")))
    }
}

fn valid_size(len: usize) -> bool {
    len >= 2 && len.is_power_of_two()
}

/// Matches a frozen pattern (`true` = information) against the literal
/// special-node patterns.
pub fn identify_fullscan(s: &[bool]) -> NodeClass {
    let t = s.len();
    if !valid_size(t) {
        return NodeClass::Generic;
    }
    // zeros followed by the given tail
    let shape = |tail: &[bool]| tail.len() <= t && s[t - tail.len()..] == *tail && s[..t - tail.len()].iter().all(|&b| !b);
    // given head followed by ones
    let head = |h: &[bool]| h.len() <= t && s[..h.len()] == *h && s[h.len()..].iter().all(|&b| b);
    let (o, z) = (true, false);
    let fits = |c: NodeClass| t >= c.min_size();

    if s.iter().all(|&b| !b) {
        NodeClass::Rate0
    } else if s.iter().all(|&b| b) {
        NodeClass::Rate1
    } else if shape(&[o]) {
        NodeClass::Rep
    } else if fits(NodeClass::Spc) && head(&[z]) {
        NodeClass::Spc
    } else if fits(NodeClass::TypeI) && shape(&[o, o]) {
        NodeClass::TypeI
    } else if fits(NodeClass::TypeII) && shape(&[o, o, o]) {
        NodeClass::TypeII
    } else if fits(NodeClass::TypeIII) && head(&[z, z]) {
        NodeClass::TypeIII
    } else if fits(NodeClass::TypeIV) && head(&[z, z, z]) {
        NodeClass::TypeIV
    } else if fits(NodeClass::TypeV) && shape(&[o, z, o, o, o]) {
        NodeClass::TypeV
    } else {
        NodeClass::Generic
    }
}

/// Which special-class predicates fire for a rank slice, in
/// [`NodeClass::SPECIAL`] order. On vectors that respect the channel
/// ordering at most one fires.
pub fn firing_predicates(v_t: &[u32], k: usize) -> [bool; 9] {
    let t = v_t.len();
    let mut out = [false; 9];
    if !valid_size(t) {
        return out;
    }
    let s = |i: usize| (v_t[i] as usize) < k;
    let last = |j: usize| s(t - j);
    out[NodeClass::Rate0.index()] = !last(1);
    out[NodeClass::Rate1.index()] = s(0);
    out[NodeClass::Rep.index()] = last(1) && !last(2);
    out[NodeClass::Spc.index()] = t >= 4 && !s(0) && s(1);
    out[NodeClass::TypeI.index()] = t >= 4 && last(1) && last(2) && !last(3);
    out[NodeClass::TypeII.index()] = t >= 8 && last(1) && last(2) && last(3) && !last(5);
    out[NodeClass::TypeIII.index()] = t >= 8 && !s(0) && !s(1) && s(2);
    out[NodeClass::TypeIV.index()] = t >= 8 && !s(0) && !s(1) && !s(2) && s(4);
    out[NodeClass::TypeV.index()] =
        t >= 8 && last(1) && last(2) && last(3) && !last(4) && last(5) && (t < 16 || !last(9));
    out
}

/// Rate-0 / Rate-1 / Rep / SPC identification from four ranks.
pub fn identify_basic(v_t: &[u32], k: usize) -> NodeClass {
    let fired = firing_predicates(v_t, k);
    NodeClass::SPECIAL[..4].iter().copied().find(|c| fired[c.index()]).unwrap_or(NodeClass::Generic)
}

/// Identification including the Type-I..V nodes.
pub fn identify_extended(v_t: &[u32], k: usize) -> NodeClass {
    let fired = firing_predicates(v_t, k);
    NodeClass::SPECIAL[4..]
        .iter()
        .chain(NodeClass::SPECIAL[..4].iter())
        .copied()
        .find(|c| fired[c.index()])
        .unwrap_or(NodeClass::Generic)
}

/// Largest node size decoded directly, per class; `0` disables a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeLimits {
    max_size: [usize; 9],
}

impl NodeLimits {
    /// No special nodes at all.
    pub fn none() -> Self {
        Self { max_size: [0; 9] }
    }

    /// Every class, any size.
    pub fn unlimited() -> Self {
        Self { max_size: [usize::MAX; 9] }
    }

    /// Rate-0, Rate-1, Rep and SPC, any size.
    pub fn basic_unlimited() -> Self {
        Self::unlimited().basic_only()
    }

    /// Hardware setting: Rate-0 and Rep up to 16, Rate-1 and SPC up to 64.
    pub fn hardware() -> Self {
        Self::none()
            .with(NodeClass::Rate0, 16)
            .with(NodeClass::Rep, 16)
            .with(NodeClass::Rate1, 64)
            .with(NodeClass::Spc, 64)
    }

    pub fn with(mut self, class: NodeClass, max_size: usize) -> Self {
        if class != NodeClass::Generic {
            self.max_size[class.index()] = max_size;
        }
        self
    }

    pub fn max_size(&self, class: NodeClass) -> usize {
        if class == NodeClass::Generic {
            0
        } else {
            self.max_size[class.index()]
        }
    }

    pub fn validate(&self) -> Result<()> {
        for class in NodeClass::SPECIAL {
            let m = self.max_size(class);
            if m == 0 || m == usize::MAX {
                continue;
            }
            if !m.is_power_of_two() || m < class.min_size() {
                return Err(PolarError::Config(format!(
                    "{class} size limit {m} must be a power of two of at least {}",
                    class.min_size()
                )));
            }
        }
        Ok(())
    }

    pub fn allows(&self, class: NodeClass, size: usize) -> bool {
        class != NodeClass::Generic && size >= class.min_size() && size <= self.max_size(class)
    }

    pub fn has_extended(&self) -> bool {
        NodeClass::SPECIAL[4..].iter().any(|&c| self.max_size(c) > 0)
    }

    /// Drops the Type-I..V classes.
    pub fn basic_only(mut self) -> Self {
        for c in &NodeClass::SPECIAL[4..] {
            self.max_size[c.index()] = 0;
        }
        self
    }

    /// Limits every class to nodes of at most `cap` leaves.
    pub fn capped(mut self, cap: usize) -> Self {
        for m in &mut self.max_size {
            *m = (*m).min(cap);
        }
        self
    }

    /// Class used for a node, or `Generic` when it must be traversed.
    pub fn classify(&self, v_t: &[u32], k: usize, extended: bool) -> NodeClass {
        let class = if extended { identify_extended(v_t, k) } else { identify_basic(v_t, k) };
        if self.allows(class, v_t.len()) {
            class
        } else {
            NodeClass::Generic
        }
    }
}

impl Default for NodeLimits {
    fn default() -> Self {
        Self::hardware()
    }
}

fn contract(class: NodeClass, what: &str) -> PolarError {
    PolarError::Contract(format!("{class} node cannot be decoded {what}"))
}

/// Tree-order sum `Σ α_i`, matching what SC accumulates through G updates
/// with all-zero partial sums.
fn tree_sum<D: LlrDomain>(d: &D, alpha: &[D::Llr]) -> D::Llr {
    let mut buf = alpha.to_vec();
    let mut len = buf.len();
    while len > 1 {
        len /= 2;
        for j in 0..len {
            buf[j] = d.add(buf[j], buf[j + len]);
        }
    }
    buf[0]
}

/// Hard decisions over `idx` with the given parity enforced by flipping the
/// least reliable position.
fn spc_decode<D: LlrDomain>(d: &D, alpha: &[D::Llr], idx: impl Iterator<Item = usize> + Clone, parity: u8, out: &mut [u8]) {
    let mut acc = 0u8;
    let mut weakest: Option<usize> = None;
    for i in idx {
        out[i] = d.hard(alpha[i]);
        acc ^= out[i];
        if weakest.is_none_or(|w| d.cmp_magnitude(alpha[i], alpha[w]).is_lt()) {
            weakest = Some(i);
        }
    }
    if acc != parity {
        if let Some(w) = weakest {
            out[w] ^= 1;
        }
    }
}

fn ml_info_positions(class: NodeClass, size: usize) -> Option<Vec<usize>> {
    let tail: &[usize] = match class {
        NodeClass::TypeI => &[2, 1],
        NodeClass::TypeII => &[3, 2, 1],
        NodeClass::TypeV => &[5, 3, 2, 1],
        _ => return None,
    };
    Some(tail.iter().map(|j| size - j).collect())
}

/// Codewords of a Type-I, Type-II or Type-V node of size `size`, in node
/// (tree) order.
pub fn ml_candidates(class: NodeClass, size: usize) -> Result<Vec<Vec<u8>>> {
    if size < class.min_size() || !size.is_power_of_two() {
        return domain(format!("{class} node of size {size}"));
    }
    let info = ml_info_positions(class, size).ok_or_else(|| contract(class, "by enumeration"))?;
    Ok((0..1usize << info.len())
        .map(|combo| {
            let mut u = vec![0u8; size];
            for (b, &p) in info.iter().enumerate() {
                u[p] = ((combo >> b) & 1) as u8;
            }
            polar_transform_in_place(&mut u);
            u
        })
        .collect())
}

/// Disagreement score `Σ_{c_i ≠ HD(α_i)} |α_i|`.
pub fn ml_score<D: LlrDomain>(d: &D, alpha: &[D::Llr], word: &[u8]) -> D::Metric {
    alpha
        .iter()
        .zip(word)
        .filter(|(a, &c)| d.hard(**a) != c)
        .fold(D::Metric::default(), |m, (a, _)| d.metric_add(m, d.penalty(*a)))
}

/// SC node decoder writing the node's hard decisions into `out`.
pub fn decode_node_sc_with<D: LlrDomain>(d: &D, class: NodeClass, alpha: &[D::Llr], out: &mut [u8]) -> Result<()> {
    let size = alpha.len();
    if out.len() != size {
        return domain(format!("output length {} for a node of size {size}", out.len()));
    }
    if class == NodeClass::Generic {
        return Err(contract(class, "directly"));
    }
    if !valid_size(size) || size < class.min_size() {
        return Err(contract(class, &format!("at size {size}")));
    }
    match class {
        NodeClass::Rate0 => out.fill(0),
        NodeClass::Rate1 => {
            for (o, &a) in out.iter_mut().zip(alpha) {
                *o = d.hard(a);
            }
        }
        NodeClass::Rep => out.fill(d.hard(tree_sum(d, alpha))),
        NodeClass::Spc => spc_decode(d, alpha, 0..size, 0, out),
        NodeClass::TypeIII => {
            for r in 0..2 {
                spc_decode(d, alpha, (r..size).step_by(2), 0, out);
            }
        }
        NodeClass::TypeIV => {
            // parities of the four interleaved sub-codes form a repetition code
            let parity_llr: Vec<D::Llr> = (0..4)
                .map(|r| (r + 4..size).step_by(4).fold(alpha[r], |acc, i| d.f(acc, alpha[i])))
                .collect();
            let p = d.hard(tree_sum(d, &parity_llr));
            for r in 0..4 {
                spc_decode(d, alpha, (r..size).step_by(4), p, out);
            }
        }
        NodeClass::TypeI | NodeClass::TypeII | NodeClass::TypeV => {
            let mut best: Option<(D::Metric, Vec<u8>)> = None;
            for word in ml_candidates(class, size)? {
                let score = ml_score(d, alpha, &word);
                if best.as_ref().is_none_or(|(b, _)| d.cmp_metric(score, *b).is_lt()) {
                    best = Some((score, word));
                }
            }
            out.copy_from_slice(&best.expect("candidate set is non-empty").1);
        }
        NodeClass::Generic => unreachable!(),
    }
    Ok(())
}

/// Float-mode SC node decoder.
pub fn decode_node_sc(class: NodeClass, alpha: &[f64]) -> Result<Vec<u8>> {
    let mut out = vec![0; alpha.len()];
    decode_node_sc_with(&FloatDomain::min_sum(), class, alpha, &mut out)?;
    Ok(out)
}

/// One path entering a node under list decoding.
#[derive(Debug, Clone, Copy)]
pub struct NodeInput<'a, D: LlrDomain> {
    pub pm: D::Metric,
    pub alpha: &'a [D::Llr],
}

/// A path leaving a node: which input path it extends, its metric and the
/// node's hard decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSurvivor<M> {
    pub parent: usize,
    pub pm: M,
    pub beta: Vec<u8>,
}

struct Split<M> {
    origin: usize,
    base: M,
    flips: u8,
    beta: Vec<u8>,
}

/// Keeps the `l` best of `cands` (built over `states`, with `(base, flips)`
/// per state and bit value in `next`) and applies the chosen bit at `pos(origin)`.
fn prune_splits<M: Copy>(
    states: Vec<Split<M>>,
    mut cands: Vec<Candidate<M>>,
    next: &[[(M, u8); 2]],
    l: usize,
    pos: impl Fn(usize) -> usize,
    cmp: impl Fn(M, M) -> std::cmp::Ordering,
) -> Vec<Split<M>> {
    select_survivors(&mut cands, l, cmp);
    cands
        .into_iter()
        .map(|c| {
            let src = &states[c.parent];
            let (base, flips) = next[c.parent][usize::from(c.bit)];
            let mut beta = src.beta.clone();
            beta[pos(src.origin)] = c.bit;
            Split { origin: src.origin, base, flips, beta }
        })
        .collect()
}

/// List node decoder for Rate-0, Rate-1, Rep and SPC nodes. Survivors are
/// ordered by `(pm, parent, bit)` like the leaf sorter.
pub fn decode_node_scl_with<D: LlrDomain>(
    d: &D,
    class: NodeClass,
    paths: &[NodeInput<'_, D>],
    l: usize,
) -> Result<Vec<NodeSurvivor<D::Metric>>> {
    if l == 0 {
        return domain("list size must be positive");
    }
    let size = paths.first().map_or(0, |p| p.alpha.len());
    if paths.iter().any(|p| p.alpha.len() != size) || !valid_size(size) || size < class.min_size() {
        return Err(contract(class, &format!("at size {size}")));
    }
    let cmp = |a: D::Metric, b: D::Metric| d.cmp_metric(a, b);
    let hd = |alpha: &[D::Llr]| alpha.iter().map(|&a| d.hard(a)).collect::<Vec<u8>>();
    match class {
        NodeClass::Rate0 => Ok(paths
            .iter()
            .enumerate()
            .map(|(i, p)| NodeSurvivor { parent: i, pm: ml_score(d, p.alpha, &vec![0; size]), beta: vec![0; size] })
            .map(|mut s| {
                s.pm = d.metric_add(paths[s.parent].pm, s.pm);
                s
            })
            .collect()),
        NodeClass::Rep => {
            let mut cands = Vec::with_capacity(2 * paths.len());
            for (i, p) in paths.iter().enumerate() {
                for bit in 0..2u8 {
                    let pm = d.metric_add(p.pm, ml_score(d, p.alpha, &vec![bit; size]));
                    cands.push(Candidate { parent: i, bit, pm });
                }
            }
            select_survivors(&mut cands, l, cmp);
            Ok(cands.into_iter().map(|c| NodeSurvivor { parent: c.parent, pm: c.pm, beta: vec![c.bit; size] }).collect())
        }
        NodeClass::Rate1 | NodeClass::Spc => {
            let spc = class == NodeClass::Spc;
            // per input path: positions by ascending reliability, ties by index
            let orders: Vec<Vec<usize>> = paths
                .iter()
                .map(|p| {
                    let mut o: Vec<usize> = (0..size).collect();
                    o.sort_by(|&a, &b| d.cmp_magnitude(p.alpha[a], p.alpha[b]).then(a.cmp(&b)));
                    o
                })
                .collect();
            let skip = usize::from(spc);
            let splits = if spc { l.min(size - 1) } else { (l - 1).min(size) };
            let parity_of = |i: usize, flips: u8| {
                let beta = hd(paths[i].alpha);
                beta.iter().fold(0u8, |a, b| a ^ b) ^ flips
            };
            let gamma: Vec<u8> = (0..paths.len()).map(|i| parity_of(i, 0)).collect();
            let weakest_penalty = |i: usize| d.penalty(paths[i].alpha[orders[i][0]]);
            let metric = |i: usize, base: D::Metric, flips: u8| {
                if spc && (gamma[i] ^ flips) == 1 {
                    d.metric_add(base, weakest_penalty(i))
                } else {
                    base
                }
            };
            let mut states: Vec<Split<D::Metric>> = paths
                .iter()
                .enumerate()
                .map(|(i, p)| Split { origin: i, base: p.pm, flips: 0, beta: hd(p.alpha) })
                .collect();
            for j in 0..splits {
                let pos_of = |origin: usize| orders[origin][j + skip];
                let mut cands = Vec::with_capacity(2 * states.len());
                let mut next = Vec::with_capacity(states.len());
                for (si, st) in states.iter().enumerate() {
                    let p = pos_of(st.origin);
                    let a = paths[st.origin].alpha[p];
                    let keep = d.hard(a);
                    let mut by_bit = [(st.base, st.flips); 2];
                    by_bit[usize::from(keep ^ 1)] = (d.metric_add(st.base, d.penalty(a)), st.flips ^ 1);
                    for bit in 0..2u8 {
                        let (base, flips) = by_bit[usize::from(bit)];
                        cands.push(Candidate { parent: si, bit, pm: metric(st.origin, base, flips) });
                    }
                    next.push(by_bit);
                }
                states = prune_splits(states, cands, &next, l, pos_of, cmp);
            }
            Ok(states
                .into_iter()
                .map(|mut st| {
                    if spc {
                        let w = orders[st.origin][0];
                        st.beta[w] ^= gamma[st.origin] ^ st.flips;
                    }
                    NodeSurvivor { parent: st.origin, pm: metric(st.origin, st.base, st.flips), beta: st.beta }
                })
                .collect())
        }
        _ => Err(contract(class, "under list decoding")),
    }
}

/// Float-mode list node decoder over `(pm, α)` pairs.
pub fn decode_node_scl(class: NodeClass, paths: &[(f64, Vec<f64>)], l: usize) -> Result<Vec<NodeSurvivor<f64>>> {
    let inputs: Vec<NodeInput<'_, FloatDomain>> =
        paths.iter().map(|(pm, a)| NodeInput { pm: *pm, alpha: a.as_slice() }).collect();
    decode_node_scl_with(&FloatDomain::min_sum(), class, &inputs, l)
}

/// Entry of an operation list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    F,
    G,
    Node(NodeClass),
}

/// `kind` at stage `stage`: F/G produce the `2^stage` LLRs of a child node,
/// a node operation decodes a node of size `2^stage`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Operation {
    pub kind: OpKind,
    pub stage: u32,
}

impl Operation {
    pub fn node(class: NodeClass, stage: u32) -> Self {
        Self { kind: OpKind::Node(class), stage }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OpKind::F => write!(f, "F {}", self.stage),
            OpKind::G => write!(f, "G {}", self.stage),
            OpKind::Node(c) => write!(f, "{c} {}", self.stage),
        }
    }
}

impl FromStr for Operation {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let (Some(kind), Some(stage), None) = (parts.next(), parts.next(), parts.next()) else {
            return domain(format!("expected `KIND stage`, got {s:?}"));
        };
        let stage: u32 = stage.parse().map_err(|_| PolarError::Domain(format!("bad stage {stage:?}")))?;
        let kind = match kind.to_ascii_uppercase().as_str() {
            "F" => OpKind::F,
            "G" => OpKind::G,
            other => match other.parse::<NodeClass>()? {
                NodeClass::Generic => return domain("GENERIC is not an operation"),
                c => OpKind::Node(c),
            },
        };
        Ok(Self { kind, stage })
    }
}

/// Decoding schedule of one `(v, K)` pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OperationList {
    pub ops: Vec<Operation>,
}

impl OperationList {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// One `KIND stage` line per operation.
    pub fn serialize(&self) -> String {
        self.ops.iter().map(|op| format!("{op}\n")).collect()
    }

    /// Parses the line format of [`OperationList::serialize`]; blank lines
    /// and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            ops.push(line.parse().map_err(|e: PolarError| PolarError::Format { line: i + 1, message: e.to_string() })?);
        }
        Ok(Self { ops })
    }
}

fn emit_ops(code: &PolarCode, limits: &NodeLimits, extended: bool, t: u32, offset: usize, out: &mut Vec<Operation>) {
    let size = 1usize << t;
    if t > 0 {
        let class = limits.classify(&code.reliability().ranks()[offset..offset + size], code.k(), extended);
        if class != NodeClass::Generic {
            out.push(Operation::node(class, t));
            return;
        }
    } else {
        return;
    }
    out.push(Operation { kind: OpKind::F, stage: t - 1 });
    emit_ops(code, limits, extended, t - 1, offset, out);
    out.push(Operation { kind: OpKind::G, stage: t - 1 });
    emit_ops(code, limits, extended, t - 1, offset + size / 2, out);
}

/// Operation list a memory-based fast decoder would store for `code`.
pub fn generate_operation_list(code: &PolarCode, limits: &NodeLimits, extended: bool) -> OperationList {
    let mut ops = Vec::new();
    emit_ops(code, limits, extended, code.depth(), 0, &mut ops);
    OperationList { ops }
}

/// Storage needed to hold operation lists for a set of rates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootprintReport {
    /// `(K, entries, bits)` per requested rate.
    pub per_k: Vec<(usize, usize, u64)>,
    pub total_entries: u64,
    /// Entries that decode a special node; the rest are F/G steps.
    pub node_entries: u64,
    pub total_bits: u64,
    /// On-line identification only stores `v`: `N ceil(log2 N)` bits.
    pub proposed_bits: u64,
}

pub fn memory_footprint(
    v: &ReliabilityVector,
    ks: impl IntoIterator<Item = usize>,
    limits: &NodeLimits,
    extended: bool,
    bits_per_entry: u32,
) -> Result<FootprintReport> {
    let shared = std::sync::Arc::new(v.clone());
    let mut per_k = Vec::new();
    let mut node_entries = 0u64;
    for k in ks {
        let code = PolarCode::new(shared.clone(), k)?;
        let ops = generate_operation_list(&code, limits, extended);
        node_entries += ops.ops.iter().filter(|op| matches!(op.kind, OpKind::Node(_))).count() as u64;
        per_k.push((k, ops.len(), ops.len() as u64 * u64::from(bits_per_entry)));
    }
    let total_entries = per_k.iter().map(|p| p.1 as u64).sum();
    let total_bits = per_k.iter().map(|p| p.2).sum();
    Ok(FootprintReport { per_k, total_entries, node_entries, total_bits, proposed_bits: v.len() as u64 * u64::from(v.depth()) })
}

/// SC decoder that classifies nodes on line and decodes special ones directly.
#[derive(Debug)]
pub struct FastScDecoder<D: LlrDomain> {
    domain: D,
    code: PolarCode,
    limits: NodeLimits,
    extended: bool,
    alpha: Vec<Vec<D::Llr>>,
    beta: Vec<u8>,
    steps: usize,
    trace: Vec<Operation>,
}

impl<D: LlrDomain> FastScDecoder<D> {
    pub fn new(domain: D, code: PolarCode, limits: NodeLimits, extended: bool) -> Result<Self> {
        limits.validate()?;
        let n = code.depth();
        let alpha = (0..=n).map(|t| vec![D::Llr::default(); 1 << t]).collect();
        Ok(Self { domain, beta: vec![0; code.len()], code, limits, extended, alpha, steps: 0, trace: Vec::new() })
    }

    pub fn code(&self) -> &PolarCode {
        &self.code
    }

    /// Operations executed during the last decode.
    pub fn trace(&self) -> &[Operation] {
        &self.trace
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<ScOutput> {
        let len = self.code.len();
        if channel_llrs.len() != len {
            return domain(format!("expected {len} channel LLRs, got {}", channel_llrs.len()));
        }
        let n = self.code.depth();
        for (dst, &x) in self.alpha[n as usize].iter_mut().zip(tree_order(&self.code, channel_llrs).iter()) {
            *dst = self.domain.from_channel(x);
        }
        self.steps = 0;
        self.trace.clear();
        self.visit(n, 0)?;
        let (u_hat, x_hat) = finish_codeword(&self.code, &self.beta);
        Ok(ScOutput { u_hat, x_hat, steps: self.steps })
    }

    fn visit(&mut self, t: u32, offset: usize) -> Result<()> {
        let size = 1usize << t;
        let tu = t as usize;
        if t == 0 {
            let info = self.code.mask().is_info(offset);
            self.beta[offset] = if info { self.domain.hard(self.alpha[0][0]) } else { 0 };
            return Ok(());
        }
        let v_t = &self.code.reliability().ranks()[offset..offset + size];
        let class = self.limits.classify(v_t, self.code.k(), self.extended);
        if class != NodeClass::Generic {
            decode_node_sc_with(&self.domain, class, &self.alpha[tu], &mut self.beta[offset..offset + size])?;
            self.steps += class.sc_phases();
            self.trace.push(Operation::node(class, t));
            return Ok(());
        }
        let half = size / 2;
        {
            let (lower, upper) = self.alpha.split_at_mut(tu);
            let (parent, child) = (&upper[0], &mut lower[tu - 1]);
            for j in 0..half {
                child[j] = self.domain.f(parent[j], parent[j + half]);
            }
        }
        self.steps += 1;
        self.trace.push(Operation { kind: OpKind::F, stage: t - 1 });
        self.visit(t - 1, offset)?;
        {
            let (lower, upper) = self.alpha.split_at_mut(tu);
            let (parent, child) = (&upper[0], &mut lower[tu - 1]);
            let left = &self.beta[offset..offset + half];
            for j in 0..half {
                child[j] = self.domain.g(parent[j], parent[j + half], left[j]);
            }
        }
        self.steps += 1;
        self.trace.push(Operation { kind: OpKind::G, stage: t - 1 });
        self.visit(t - 1, offset + half)?;
        combine_in_place(&mut self.beta[offset..offset + size]);
        Ok(())
    }
}

/// Decoder family for [`fast_decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FastMode {
    Sc,
    List(LpsclConfig),
}

/// Float-mode fast decode; the output contract is that of `sc_decode` or
/// `lpscl_decode` respectively.
pub fn fast_decode(
    channel_llrs: &[f64],
    code: &PolarCode,
    limits: &NodeLimits,
    mode: &FastMode,
    extended: bool,
) -> Result<ScOutput> {
    let d = FloatDomain::min_sum();
    match mode {
        FastMode::Sc => FastScDecoder::new(d, code.clone(), *limits, extended)?.decode(channel_llrs),
        FastMode::List(cfg) => {
            if extended {
                return Err(PolarError::Config("Type-I..V nodes are only available with SC decoding".into()));
            }
            let out = ListDecoder::fast(d, code.clone(), cfg.clone(), *limits)?.decode(channel_llrs)?;
            Ok(ScOutput { u_hat: out.u_hat, x_hat: out.x_hat, steps: out.steps })
        }
    }
}

/// A node whose on-line class disagrees with its full pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub k: usize,
    pub stage: u32,
    pub offset: usize,
    pub identified: NodeClass,
    pub fullscan: NodeClass,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IdentificationReport {
    /// Node queries checked (one per identifier, node and `K`).
    pub checked: u64,
    /// Queries where more than one predicate fired.
    pub ambiguous: u64,
    pub mismatches: Vec<Mismatch>,
}

impl IdentificationReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.ambiguous == 0
    }
}

/// Cross-checks on-line identification against the full pattern for every
/// node of every size and every `K` in `ks`. Mismatches are reported, never
/// corrected.
pub fn verify_identification(v: &ReliabilityVector, ks: impl IntoIterator<Item = usize>) -> Result<IdentificationReport> {
    let len = v.len();
    let mut report = IdentificationReport::default();
    for k in ks {
        let mask = frozen_mask(v, k)?;
        let s = mask.bits();
        for stage in 1..=v.depth() {
            let size = 1usize << stage;
            for offset in (0..len).step_by(size) {
                let v_t = &v.ranks()[offset..offset + size];
                let full = identify_fullscan(&s[offset..offset + size]);
                if firing_predicates(v_t, k).iter().filter(|&&f| f).count() > 1 {
                    report.ambiguous += 1;
                }
                for found in [identify_basic(v_t, k), identify_extended(v_t, k)] {
                    report.checked += 1;
                    if found != NodeClass::Generic && found != full {
                        report.mismatches.push(Mismatch { k, stage, offset, identified: found, fullscan: full });
                    }
                }
            }
        }
    }
    Ok(report)
}
