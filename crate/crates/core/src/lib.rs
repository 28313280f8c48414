//! LDPC syndrome source coding of image bitplanes, with a GRU classifier
//! that learns directly on the syndromes.
//!
//! The pipeline has two encoding setups. Setup 1 decomposes raw pixels into
//! bitplanes and compresses each plane to a length-M syndrome `s = Hx mod 2`
//! with a sparse parity-check matrix H. Setup 2 first runs a JPEG-style
//! front end (8x8 DCT, quality-factor-scaled quantization, optional
//! sub-block truncation) and codes the bitplanes of the quantized
//! coefficients instead. Either way, the receiver never decodes: a
//! single-layer GRU consumes one syndrome per timestep and classifies.
//!
//! Modules:
//! - [`datasets`]: MNIST/Fashion-MNIST IDX and CIFAR-10 binary ingestion,
//!   color conversion, zero-padding to 32x32
//! - [`bitplanes`]: bitplane decomposition and sign/magnitude plane stacks
//! - [`ldpc`]: PEG code construction, syndrome encoding, alist I/O
//! - [`transform`]: blockwise DCT, quantization, truncation
//! - [`gru`]: the classifier, BPTT training, Adam, checkpoints
//! - [`metrics`]: approximate entropy, the D_f chaos ratio, rate gain
//! - [`encode`]: dataset-level encoding (Setup 1 / Setup 2 / uncoded)
//! - [`tensor`]: the binary tensor container used for encoded datasets

pub mod bitplanes;
pub mod datasets;
pub mod encode;
pub mod gru;
pub mod ldpc;
pub mod metrics;
pub mod tensor;
pub mod transform;
