//! Successive-cancellation list decoding: path metrics, the 2L -> L sorter,
//! and layered partitioned SCL (LPSCL).
//!
//! A single tree-walking engine serves plain SCL, LPSCL and their fast
//! variants; the fast variants replace subtree traversal at special nodes
//! with the node decoders of [`crate::fastnodes`].
//!
//! Path state lives behind reference-counted per-stage buffers, so copying a
//! path on a split only bumps counters; a buffer is duplicated the first
//! time a shared copy is written. This is observationally identical to
//! copying every survivor's memories eagerly.

use std::cmp::Ordering;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::construction::PolarCode;
use crate::error::{domain, PolarError, Result};
use crate::fastnodes::{self, NodeClass, NodeInput, NodeLimits};
use crate::llr::{FloatDomain, LlrDomain};
use crate::sc::{combine_in_place, finish_codeword, tree_order};

/// LLR-based path metric update: add `|alpha|` when `u` disagrees with the
/// hard decision of `alpha`.
pub fn pm_update(pm: f64, alpha: f64, u: u8) -> f64 {
    let d = FloatDomain::min_sum();
    metric_step(&d, pm, alpha, u)
}

#[inline]
pub(crate) fn metric_step<D: LlrDomain>(d: &D, pm: D::Metric, alpha: D::Llr, u: u8) -> D::Metric {
    if u != d.hard(alpha) {
        d.metric_add(pm, d.penalty(alpha))
    } else {
        pm
    }
}

/// A forked path: `parent` is the index of the path it extends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<M> {
    pub parent: usize,
    pub bit: u8,
    pub pm: M,
}

/// Keeps the `l` candidates of smallest metric, ordered by
/// `(pm, parent, bit)`.
pub fn select_survivors<M: Copy>(
    candidates: &mut Vec<Candidate<M>>,
    l: usize,
    cmp: impl Fn(M, M) -> Ordering,
) {
    candidates.sort_by(|a, b| cmp(a.pm, b.pm).then(a.parent.cmp(&b.parent)).then(a.bit.cmp(&b.bit)));
    candidates.truncate(l);
}

/// Float-metric sorter over `2L` candidates.
pub fn fork_and_prune(candidates: &[Candidate<f64>], l: usize) -> Vec<Candidate<f64>> {
    let mut out = candidates.to_vec();
    select_survivors(&mut out, l, |a: f64, b: f64| a.total_cmp(&b));
    out
}

/// List sizes of a layered partitioned decoder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpsclConfig {
    /// List size in the bottom stages.
    pub l_max: usize,
    /// Partitioning factor `P`.
    pub partitions: usize,
    /// `L_t` for the top `log2 P` stages, starting at the root stage `n`.
    pub top_lists: Vec<usize>,
}

impl LpsclConfig {
    /// Plain SCL with list size `l`.
    pub fn scl(l: usize) -> Self {
        Self { l_max: l, partitions: 1, top_lists: Vec::new() }
    }

    /// `N = 1024` reference setting: `P = 4`, `L_max = 4`, `L_10 = L_9 = 2`.
    pub fn reference() -> Self {
        Self { l_max: 4, partitions: 4, top_lists: vec![2, 2] }
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        let err = |m: String| Err(PolarError::Config(m));
        if self.l_max == 0 || !self.l_max.is_power_of_two() {
            return err(format!("L_max = {} is not a power of two", self.l_max));
        }
        if self.partitions == 0 || !self.partitions.is_power_of_two() {
            return err(format!("P = {} is not a power of two", self.partitions));
        }
        let layers = self.partitions.trailing_zeros();
        if layers > n {
            return err(format!("P = {} exceeds N = {}", self.partitions, 1usize << n));
        }
        if self.top_lists.len() != layers as usize {
            return err(format!("{} top-stage list sizes given, log2 P = {layers}", self.top_lists.len()));
        }
        if self.top_lists.iter().any(|&l| l == 0 || l > self.l_max) {
            return err(format!("top-stage list sizes {:?} must lie in [1, L_max]", self.top_lists));
        }
        if self.top_lists.windows(2).any(|w| w[0] > w[1]) {
            return err(format!("top-stage list sizes {:?} must not grow towards the root", self.top_lists));
        }
        Ok(())
    }

    /// Leaves per partition.
    pub fn partition_len(&self, len: usize) -> usize {
        len / self.partitions
    }

    /// List size enforced when leaving a partition that ends just before leaf `i`.
    fn boundary_list(&self, i: usize, n: u32) -> usize {
        let stage = i.trailing_zeros() + 1;
        self.top_lists[(n - stage) as usize]
    }
}

/// Result of a list decode.
#[derive(Debug, Clone, PartialEq)]
pub struct ListOutput<M> {
    pub u_hat: Vec<u8>,
    pub x_hat: Vec<u8>,
    /// Metric of the selected path.
    pub pm: M,
    /// Metrics of all surviving paths, in list order.
    pub final_pms: Vec<M>,
    pub steps: usize,
}

struct Path<D: LlrDomain> {
    /// `alpha[t]`: LLRs of the current stage-`t` node; `alpha[n]` is the channel.
    alpha: Vec<Rc<Vec<D::Llr>>>,
    /// Hard decisions, written in place per node (length `N`).
    beta: Rc<Vec<u8>>,
    pm: D::Metric,
}

impl<D: LlrDomain> Clone for Path<D> {
    fn clone(&self) -> Self {
        Self { alpha: self.alpha.clone(), beta: self.beta.clone(), pm: self.pm }
    }
}

/// Buffer that may be overwritten completely; shared contents are not copied.
fn fresh<T: Clone + Default>(rc: &mut Rc<Vec<T>>) -> &mut Vec<T> {
    if Rc::get_mut(rc).is_none() {
        *rc = Rc::new(vec![T::default(); rc.len()]);
    }
    Rc::get_mut(rc).expect("buffer was just made unique")
}

/// SCL / LPSCL engine, optionally with special-node shortcuts.
pub struct ListDecoder<D: LlrDomain> {
    domain: D,
    code: PolarCode,
    cfg: LpsclConfig,
    fast: Option<NodeLimits>,
    paths: Vec<Path<D>>,
    steps: usize,
    scratch: Vec<Candidate<D::Metric>>,
}

impl<D: LlrDomain> ListDecoder<D> {
    /// Conventional decoder: every leaf is visited.
    pub fn new(domain: D, code: PolarCode, cfg: LpsclConfig) -> Result<Self> {
        cfg.validate(code.depth())?;
        Ok(Self { domain, code, cfg, fast: None, paths: Vec::new(), steps: 0, scratch: Vec::new() })
    }

    /// Fast decoder: Rate-0, Rate-1, Rep and SPC nodes are identified on line
    /// from `(v, K)` and decoded without descending. Type-I..V limits are
    /// ignored, and node sizes are capped at the partition length so that no
    /// node straddles a partition boundary.
    pub fn fast(domain: D, code: PolarCode, cfg: LpsclConfig, limits: NodeLimits) -> Result<Self> {
        limits.validate()?;
        let mut dec = Self::new(domain, code, cfg)?;
        let cap = dec.cfg.partition_len(dec.code.len());
        dec.fast = Some(limits.basic_only().capped(cap));
        Ok(dec)
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn code(&self) -> &PolarCode {
        &self.code
    }

    pub fn config(&self) -> &LpsclConfig {
        &self.cfg
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<ListOutput<D::Metric>> {
        let len = self.code.len();
        if channel_llrs.len() != len {
            return domain(format!("expected {len} channel LLRs, got {}", channel_llrs.len()));
        }
        let n = self.code.depth() as usize;
        let root: Vec<D::Llr> =
            tree_order(&self.code, channel_llrs).iter().map(|&x| self.domain.from_channel(x)).collect();
        let mut alpha: Vec<Rc<Vec<D::Llr>>> = (0..n).map(|t| Rc::new(vec![D::Llr::default(); 1 << t])).collect();
        alpha.push(Rc::new(root));
        self.paths.clear();
        self.paths.push(Path { alpha, beta: Rc::new(vec![0; len]), pm: D::Metric::default() });
        self.steps = 0;

        self.visit(n as u32, 0);

        let best = (0..self.paths.len())
            .min_by(|&a, &b| self.domain.cmp_metric(self.paths[a].pm, self.paths[b].pm).then(a.cmp(&b)))
            .expect("at least one path survives");
        let (u_hat, x_hat) = finish_codeword(&self.code, &self.paths[best].beta);
        Ok(ListOutput {
            u_hat,
            x_hat,
            pm: self.paths[best].pm,
            final_pms: self.paths.iter().map(|p| p.pm).collect(),
            steps: self.steps,
        })
    }

    fn visit(&mut self, t: u32, offset: usize) {
        let size = 1usize << t;
        if let Some(limits) = &self.fast {
            if t > 0 {
                let v_t = &self.code.reliability().ranks()[offset..offset + size];
                let class = limits.classify(v_t, self.code.k(), false);
                if class != NodeClass::Generic {
                    self.special_node(class, t, offset);
                    self.after_unit(offset + size);
                    return;
                }
            }
        }
        if t == 0 {
            self.leaf(offset);
            self.after_unit(offset + 1);
            return;
        }

        let (tu, tc) = (t as usize, t as usize - 1);
        let half = size / 2;
        let d = &self.domain;
        for p in &mut self.paths {
            let parent = Rc::clone(&p.alpha[tu]);
            let child = fresh(&mut p.alpha[tc]);
            for j in 0..half {
                child[j] = d.f(parent[j], parent[j + half]);
            }
        }
        self.steps += 1;
        self.visit(t - 1, offset);

        let d = &self.domain;
        for p in &mut self.paths {
            let parent = Rc::clone(&p.alpha[tu]);
            let left = &p.beta[offset..offset + half];
            let child = Rc::get_mut(&mut p.alpha[tc]);
            let child = match child {
                Some(c) => c,
                None => fresh(&mut p.alpha[tc]),
            };
            for j in 0..half {
                child[j] = d.g(parent[j], parent[j + half], left[j]);
            }
        }
        self.steps += 1;
        self.visit(t - 1, offset + half);

        for p in &mut self.paths {
            combine_in_place(&mut Rc::make_mut(&mut p.beta)[offset..offset + size]);
        }
    }

    fn leaf(&mut self, i: usize) {
        let d = &self.domain;
        if !self.code.mask().is_info(i) {
            for p in &mut self.paths {
                p.pm = metric_step(d, p.pm, p.alpha[0][0], 0);
                if p.beta[i] != 0 {
                    Rc::make_mut(&mut p.beta)[i] = 0;
                }
            }
            return;
        }
        self.scratch.clear();
        for (idx, p) in self.paths.iter().enumerate() {
            let a = p.alpha[0][0];
            for bit in 0..2u8 {
                self.scratch.push(Candidate { parent: idx, bit, pm: metric_step(d, p.pm, a, bit) });
            }
        }
        select_survivors(&mut self.scratch, self.cfg.l_max, |a, b| d.cmp_metric(a, b));
        self.steps += 1;
        let old = std::mem::take(&mut self.paths);
        self.paths = self
            .scratch
            .iter()
            .map(|c| {
                let mut p = old[c.parent].clone();
                p.pm = c.pm;
                if p.beta[i] != c.bit {
                    Rc::make_mut(&mut p.beta)[i] = c.bit;
                }
                p
            })
            .collect();
    }

    fn special_node(&mut self, class: NodeClass, t: u32, offset: usize) {
        let size = 1usize << t;
        let inputs: Vec<NodeInput<'_, D>> =
            self.paths.iter().map(|p| NodeInput { pm: p.pm, alpha: &p.alpha[t as usize][..] }).collect();
        let survivors = fastnodes::decode_node_scl_with(&self.domain, class, &inputs, self.cfg.l_max)
            .expect("classified node satisfies the list decoder contract");
        drop(inputs);
        self.steps += class.list_phases();
        let old = std::mem::take(&mut self.paths);
        self.paths = survivors
            .into_iter()
            .map(|s| {
                let mut p = old[s.parent].clone();
                p.pm = s.pm;
                Rc::make_mut(&mut p.beta)[offset..offset + size].copy_from_slice(&s.beta);
                p
            })
            .collect();
    }

    /// Partition-boundary pruning once the leaves before `next` are decided.
    fn after_unit(&mut self, next: usize) {
        let len = self.code.len();
        if self.cfg.partitions <= 1 || next >= len || !next.is_multiple_of(self.cfg.partition_len(len)) {
            return;
        }
        let keep = self.cfg.boundary_list(next, self.code.depth());
        let d = &self.domain;
        let mut order: Vec<usize> = (0..self.paths.len()).collect();
        order.sort_by(|&a, &b| d.cmp_metric(self.paths[a].pm, self.paths[b].pm).then(a.cmp(&b)));
        order.truncate(keep);
        let old = std::mem::take(&mut self.paths);
        let mut slots: Vec<Option<Path<D>>> = old.into_iter().map(Some).collect();
        self.paths = order.into_iter().map(|i| slots[i].take().expect("indices are distinct")).collect();
        self.steps += 1;
    }
}

/// Float-mode SCL decode returning `u_hat`.
pub fn scl_decode(channel_llrs: &[f64], code: &PolarCode, l: usize) -> Result<ListOutput<f64>> {
    ListDecoder::new(FloatDomain::min_sum(), code.clone(), LpsclConfig::scl(l))?.decode(channel_llrs)
}

/// Float-mode LPSCL decode.
pub fn lpscl_decode(channel_llrs: &[f64], code: &PolarCode, cfg: &LpsclConfig) -> Result<ListOutput<f64>> {
    ListDecoder::new(FloatDomain::min_sum(), code.clone(), cfg.clone())?.decode(channel_llrs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pm_update_examples() {
        assert_eq!(pm_update(0.0, 3.0, 0), 0.0);
        assert_eq!(pm_update(0.0, 3.0, 1), 3.0);
        assert_eq!(pm_update(2.0, -1.5, 0), 3.5);
        assert_eq!(pm_update(2.0, 0.0, 0), 2.0);
    }

    #[test]
    fn sorter_keeps_smallest() {
        let c = |parent, bit, pm| Candidate { parent, bit, pm };
        let out = fork_and_prune(&[c(0, 0, 0.0), c(0, 1, 5.0), c(1, 0, 2.0), c(1, 1, 7.0)], 2);
        assert_eq!(out.iter().map(|c| c.pm).collect::<Vec<_>>(), vec![0.0, 2.0]);

        let tied = [c(1, 1, 1.0), c(0, 1, 1.0), c(1, 0, 1.0), c(0, 0, 1.0)];
        let out = fork_and_prune(&tied, 2);
        assert_eq!(out, vec![c(0, 0, 1.0), c(0, 1, 1.0)]);
        assert_eq!(fork_and_prune(&tied, 2), out);
    }

    #[test]
    fn config_validation() {
        assert!(LpsclConfig::reference().validate(10).is_ok());
        assert!(LpsclConfig::scl(4).validate(3).is_ok());
        assert!(LpsclConfig::scl(3).validate(3).is_err());
        let bad = LpsclConfig { l_max: 4, partitions: 4, top_lists: vec![2] };
        assert!(bad.validate(10).is_err());
        let grow = LpsclConfig { l_max: 4, partitions: 4, top_lists: vec![4, 2] };
        assert!(grow.validate(10).is_err());
        let big = LpsclConfig { l_max: 4, partitions: 4, top_lists: vec![2, 8] };
        assert!(big.validate(10).is_err());
        let deep = LpsclConfig { l_max: 2, partitions: 16, top_lists: vec![1; 4] };
        assert!(deep.validate(3).is_err());
    }

    #[test]
    fn boundary_list_indexing() {
        let cfg = LpsclConfig { l_max: 8, partitions: 4, top_lists: vec![2, 4] };
        // N = 1024: leaves 256 and 768 close stage-9 subtrees, 512 closes stage 10
        assert_eq!(cfg.boundary_list(256, 10), 4);
        assert_eq!(cfg.boundary_list(512, 10), 2);
        assert_eq!(cfg.boundary_list(768, 10), 4);
    }
}
