//! Transformer primitives with explicit weights.

pub mod blocks;
pub mod gadgets;
pub mod net;
pub mod positions;
pub mod sparse;

pub use blocks::{causal_attention, mlp_apply, softmax, Affine, AttentionBlock, Head, Layer, Mlp, MlpBlock};
pub use gadgets::{build_composition_mlp, build_interp_mlp_1d, build_interp_mlp_nd, build_threshold_mlp};
pub use net::{net_evaluate, Decoded, Decoder, Metrics, NetPlan, TransformerNet};
pub use positions::{circle_positions, max_offdiag_inner, rotation, softmax_onehot_l1};
pub use sparse::SparseMat;
