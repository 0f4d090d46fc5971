//! LLR arithmetic back ends: IEEE doubles for reference runs and saturating
//! sign-magnitude fixed point that models the hardware datapath.
//!
//! Decoders are generic over [`LlrDomain`] so that both back ends run the
//! exact same control flow.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt::Debug;

use crate::channel::QuantizationSpec;

/// Arithmetic used by the decoding kernels.
pub trait LlrDomain {
    type Llr: Copy + PartialEq + Debug + Default;
    type Metric: Copy + PartialEq + Debug + Default;

    /// Converts a real channel LLR into the working representation.
    #[allow(clippy::wrong_self_convention)]
    fn from_channel(&self, x: f64) -> Self::Llr;
    fn to_f64(&self, a: Self::Llr) -> f64;

    /// Min-sum check-node update `sgn(a) sgn(b) min(|a|, |b|)`.
    fn f(&self, a: Self::Llr, b: Self::Llr) -> Self::Llr;
    /// Variable-node update `b + (1 - 2c) a`.
    fn g(&self, a: Self::Llr, b: Self::Llr, c: u8) -> Self::Llr;
    fn add(&self, a: Self::Llr, b: Self::Llr) -> Self::Llr;
    /// Hard decision: `1` iff the LLR is negative.
    fn hard(&self, a: Self::Llr) -> u8;
    /// Orders two LLRs by magnitude.
    fn cmp_magnitude(&self, a: Self::Llr, b: Self::Llr) -> Ordering;

    /// `|a|` as a path-metric increment.
    fn penalty(&self, a: Self::Llr) -> Self::Metric;
    fn metric_add(&self, m: Self::Metric, d: Self::Metric) -> Self::Metric;
    fn cmp_metric(&self, a: Self::Metric, b: Self::Metric) -> Ordering;
    fn metric_to_f64(&self, m: Self::Metric) -> f64;

    /// Whether any operation saturated since the last reset.
    fn saturated(&self) -> bool {
        false
    }
    fn reset_saturation(&self) {}
}

/// Double-precision arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct FloatDomain {
    /// Use the exact box-plus `2 atanh(tanh(a/2) tanh(b/2))` instead of min-sum.
    pub exact_f: bool,
}

impl FloatDomain {
    pub fn min_sum() -> Self {
        Self { exact_f: false }
    }

    pub fn exact() -> Self {
        Self { exact_f: true }
    }
}

#[inline]
pub(crate) fn min_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

impl LlrDomain for FloatDomain {
    type Llr = f64;
    type Metric = f64;

    #[inline]
    fn from_channel(&self, x: f64) -> f64 {
        x
    }

    #[inline]
    fn to_f64(&self, a: f64) -> f64 {
        a
    }

    #[inline]
    fn f(&self, a: f64, b: f64) -> f64 {
        if self.exact_f {
            // 2 atanh(tanh(a/2) tanh(b/2)) as min-sum plus two correction terms
            let corr = (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
            min_sum(a, b) + corr
        } else {
            min_sum(a, b)
        }
    }

    #[inline]
    fn g(&self, a: f64, b: f64, c: u8) -> f64 {
        if c == 0 {
            b + a
        } else {
            b - a
        }
    }

    #[inline]
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }

    #[inline]
    fn hard(&self, a: f64) -> u8 {
        u8::from(a < 0.0)
    }

    #[inline]
    fn cmp_magnitude(&self, a: f64, b: f64) -> Ordering {
        a.abs().total_cmp(&b.abs())
    }

    #[inline]
    fn penalty(&self, a: f64) -> f64 {
        a.abs()
    }

    #[inline]
    fn metric_add(&self, m: f64, d: f64) -> f64 {
        m + d
    }

    #[inline]
    fn cmp_metric(&self, a: f64, b: f64) -> Ordering {
        a.total_cmp(&b)
    }

    #[inline]
    fn metric_to_f64(&self, m: f64) -> f64 {
        m
    }
}

/// Saturating fixed point; LLRs are integers in units of `2^-frac_bits`.
#[derive(Debug, Clone)]
pub struct FixedDomain {
    spec: QuantizationSpec,
    channel_max: i32,
    internal_max: i32,
    metric_max: i32,
    saturated: Cell<bool>,
}

impl FixedDomain {
    pub fn new(spec: QuantizationSpec) -> Self {
        Self {
            channel_max: spec.channel_max_raw(),
            internal_max: spec.internal_max_raw(),
            metric_max: spec.metric_max_raw(),
            spec,
            saturated: Cell::new(false),
        }
    }

    pub fn spec(&self) -> &QuantizationSpec {
        &self.spec
    }

    #[inline]
    fn clamp_llr(&self, v: i32) -> i32 {
        if v.abs() > self.internal_max {
            self.saturated.set(true);
            v.signum() * self.internal_max
        } else {
            v
        }
    }
}

impl LlrDomain for FixedDomain {
    type Llr = i32;
    type Metric = i32;

    fn from_channel(&self, x: f64) -> i32 {
        let scaled = (x.abs() * f64::from(1u32 << self.spec.frac_bits)).round();
        let mag = if scaled > f64::from(self.channel_max) { self.channel_max } else { scaled as i32 };
        if x < 0.0 {
            -mag
        } else {
            mag
        }
    }

    fn to_f64(&self, a: i32) -> f64 {
        f64::from(a) / f64::from(1u32 << self.spec.frac_bits)
    }

    #[inline]
    fn f(&self, a: i32, b: i32) -> i32 {
        let m = a.abs().min(b.abs());
        if (a < 0) != (b < 0) {
            -m
        } else {
            m
        }
    }

    #[inline]
    fn g(&self, a: i32, b: i32, c: u8) -> i32 {
        self.clamp_llr(if c == 0 { b + a } else { b - a })
    }

    #[inline]
    fn add(&self, a: i32, b: i32) -> i32 {
        self.clamp_llr(a + b)
    }

    #[inline]
    fn hard(&self, a: i32) -> u8 {
        u8::from(a < 0)
    }

    #[inline]
    fn cmp_magnitude(&self, a: i32, b: i32) -> Ordering {
        a.abs().cmp(&b.abs())
    }

    #[inline]
    fn penalty(&self, a: i32) -> i32 {
        a.abs()
    }

    #[inline]
    fn metric_add(&self, m: i32, d: i32) -> i32 {
        let s = m + d;
        if s > self.metric_max {
            self.saturated.set(true);
            self.metric_max
        } else {
            s
        }
    }

    #[inline]
    fn cmp_metric(&self, a: i32, b: i32) -> Ordering {
        a.cmp(&b)
    }

    fn metric_to_f64(&self, m: i32) -> f64 {
        self.to_f64(m)
    }

    fn saturated(&self) -> bool {
        self.saturated.get()
    }

    fn reset_saturation(&self) {
        self.saturated.set(false);
    }
}
