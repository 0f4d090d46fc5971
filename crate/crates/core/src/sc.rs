//! Successive-cancellation kernel: F/G/β updates, the F/G schedule and the
//! baseline SC decoder.

use std::fmt;

use crate::construction::PolarCode;
use crate::encoder::{bit_reversal_permute, polar_transform_in_place};
use crate::error::{domain, Result};
use crate::llr::{min_sum, FloatDomain, LlrDomain};

/// Min-sum F update on reals.
pub fn f_op(a: f64, b: f64) -> f64 {
    min_sum(a, b)
}

/// G update on reals.
pub fn g_op(a: f64, b: f64, c: u8) -> f64 {
    if c == 0 {
        b + a
    } else {
        b - a
    }
}

/// Merges the hard decisions of two sibling nodes into their parent.
pub fn combine_beta(beta_l: &[u8], beta_r: &[u8]) -> Result<Vec<u8>> {
    if beta_l.len() != beta_r.len() {
        return domain(format!("sibling lengths differ: {} vs {}", beta_l.len(), beta_r.len()));
    }
    let mut out: Vec<u8> = beta_l.iter().zip(beta_r).map(|(l, r)| l ^ r).collect();
    out.extend_from_slice(beta_r);
    Ok(out)
}

/// In-place parent β: `beta[..T] ^= beta[T..]` for a node of length `2T`.
#[inline]
pub(crate) fn combine_in_place(beta: &mut [u8]) {
    let (lo, hi) = beta.split_at_mut(beta.len() / 2);
    for (l, r) in lo.iter_mut().zip(hi.iter()) {
        *l ^= *r;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FgKind {
    F,
    G,
}

/// One F or G operation producing the `2^stage` LLRs of a child node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScheduleEntry {
    pub kind: FgKind,
    pub stage: u32,
}

impl fmt::Display for ScheduleEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            FgKind::F => "F",
            FgKind::G => "G",
        };
        write!(f, "{k}{}", self.stage)
    }
}

/// F/G operations of an SC decoder of depth `n`, leaf by leaf.
///
/// Leaf `i` needs the stages `t <= M`, where `M` is the position of the
/// lowest set bit of `i` (`n - 1` for leaf 0); higher stages are reused.
pub fn schedule_fg(n: u32) -> Vec<ScheduleEntry> {
    let len = 1usize << n;
    let mut out = Vec::with_capacity(2 * len - 2);
    for i in 0..len {
        let top = if i == 0 { n - 1 } else { i.trailing_zeros() };
        for t in (0..=top).rev() {
            let kind = if (i >> t) & 1 == 1 { FgKind::G } else { FgKind::F };
            out.push(ScheduleEntry { kind, stage: t });
        }
    }
    out
}

/// Result of an SC-family decode.
#[derive(Debug, Clone, PartialEq)]
pub struct ScOutput {
    /// Estimated input vector, frozen positions included.
    pub u_hat: Vec<u8>,
    /// Estimated codeword in transmit order.
    pub x_hat: Vec<u8>,
    /// Decoder time steps spent on the frame.
    pub steps: usize,
}

/// Extracts the information bits of `u`.
pub fn info_bits(code: &PolarCode, u: &[u8]) -> Vec<u8> {
    code.mask().info_positions().map(|i| u[i]).collect()
}

/// Maps channel LLRs (transmit order) onto the decoder's natural tree order.
pub(crate) fn tree_order<T: Clone>(code: &PolarCode, llrs: &[T]) -> Vec<T> {
    if code.bit_reversed() {
        bit_reversal_permute(llrs).expect("code length is a power of two")
    } else {
        llrs.to_vec()
    }
}

/// Turns the root β (tree order) into `(u_hat, x_hat)`.
pub(crate) fn finish_codeword(code: &PolarCode, root_beta: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut u = root_beta.to_vec();
    // F^{⊗n} is its own inverse over GF(2)
    polar_transform_in_place(&mut u);
    (u, tree_order(code, root_beta))
}

/// Schedule-driven SC decoder with per-stage LLR buffers.
#[derive(Debug)]
pub struct ScDecoder<D: LlrDomain> {
    domain: D,
    code: PolarCode,
    schedule: Vec<ScheduleEntry>,
    /// `alpha[t]` holds the `2^t` LLRs of the current node at stage `t`.
    alpha: Vec<Vec<D::Llr>>,
    beta: Vec<u8>,
}

impl<D: LlrDomain> ScDecoder<D> {
    pub fn new(domain: D, code: PolarCode) -> Self {
        let n = code.depth();
        let alpha = (0..=n).map(|t| vec![D::Llr::default(); 1 << t]).collect();
        Self { domain, schedule: schedule_fg(n), beta: vec![0; code.len()], alpha, code }
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn code(&self) -> &PolarCode {
        &self.code
    }

    /// Decodes one frame of channel LLRs given in transmit order.
    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<ScOutput> {
        let len = self.code.len();
        if channel_llrs.len() != len {
            return domain(format!("expected {len} channel LLRs, got {}", channel_llrs.len()));
        }
        let n = self.code.depth() as usize;
        for (dst, &x) in self.alpha[n].iter_mut().zip(tree_order(&self.code, channel_llrs).iter()) {
            *dst = self.domain.from_channel(x);
        }

        let mut leaf = 0usize;
        for entry in &self.schedule {
            let t = entry.stage as usize;
            let half = 1usize << t;
            let (lower, upper) = self.alpha.split_at_mut(t + 1);
            let parent = &upper[0];
            let child = &mut lower[t];
            match entry.kind {
                FgKind::F => {
                    for j in 0..half {
                        child[j] = self.domain.f(parent[j], parent[j + half]);
                    }
                }
                FgKind::G => {
                    let base = leaf & !((2 * half) - 1);
                    let left = &self.beta[base..base + half];
                    for j in 0..half {
                        child[j] = self.domain.g(parent[j], parent[j + half], left[j]);
                    }
                }
            }
            if t == 0 {
                let bit = if self.code.mask().is_info(leaf) { self.domain.hard(self.alpha[0][0]) } else { 0 };
                self.beta[leaf] = bit;
                // fold every completed right child into its parent
                let mut s = 0;
                while s < n && (leaf >> s) & 1 == 1 {
                    let size = 2usize << s;
                    let base = leaf & !(size - 1);
                    combine_in_place(&mut self.beta[base..base + size]);
                    s += 1;
                }
                leaf += 1;
            }
        }
        let (u_hat, x_hat) = finish_codeword(&self.code, &self.beta);
        Ok(ScOutput { u_hat, x_hat, steps: self.schedule.len() })
    }
}

/// Float-mode SC decode.
pub fn sc_decode(channel_llrs: &[f64], code: &PolarCode) -> Result<ScOutput> {
    ScDecoder::new(FloatDomain::min_sum(), code.clone()).decode(channel_llrs)
}
