//! Rate-flexible polar codes: construction from a reliability vector,
//! encoding, SC / SCL / layered partitioned SCL decoding, on-line special
//! node identification with fast node decoders, and a Monte-Carlo harness.
//!
//! Every decoder is driven only by the reliability vector `v` and the number
//! of information bits `K`; nothing is precomputed per rate.

pub mod channel;
pub mod construction;
pub mod encoder;
pub mod error;
pub mod fastnodes;
pub mod list;
pub mod llr;
pub mod sc;
pub mod sim;

pub use channel::{frame_rng, quantize, transmit, AwgnChannel, LlrWidth, QuantMode, QuantizationSpec};
pub use construction::{
    bec_construct, frozen_mask, load_reliability_csv, partial_order_degraded, verify_z_bound_inequality,
    Degradation, FrozenMask, PartialOrder, PolarCode, ReliabilityVector,
};
pub use encoder::{bit_reversal_permute, encode, generator_matrix, polar_transform_in_place};
pub use error::{PolarError, Result};
pub use fastnodes::{
    IdentificationReport,
    decode_node_sc, decode_node_scl, fast_decode, generate_operation_list, identify_basic, identify_extended,
    identify_fullscan, memory_footprint, verify_identification, FastMode, FastScDecoder, NodeClass, NodeLimits,
    OpKind, Operation, OperationList,
};
pub use list::{fork_and_prune, lpscl_decode, pm_update, scl_decode, Candidate, ListDecoder, ListOutput, LpsclConfig};
pub use llr::{FixedDomain, FloatDomain, LlrDomain};
pub use sc::{combine_beta, info_bits, sc_decode, schedule_fg, ScDecoder, ScOutput};
pub use sim::{
    emit_results, hw_estimate, parse_results_csv, parse_results_json, run_monte_carlo, ConstructionSource,
    DecoderKind, HwEstimate, HwParams, OutputFormat, PointResult, RateSet, SimConfig, SimResult,
};
