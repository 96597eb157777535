//! Lattice-quantized parameter codes for k-nomial families.
//!
//! The library builds codes that store a quantized estimate of the parameter
//! of a k-nomial distribution instead of the full empirical type, decodes the
//! stored index back into a distribution on n-sample space, and measures the
//! reconstruction error exactly on the space of types. Alongside the codes it
//! provides the converse-side machinery used to certify that the achieved
//! memory sizes are essentially optimal: the Clarke-Barron expansion of the
//! mutual information between sample and parameter, the mixture decomposition
//! of relative entropy, a local-asymptotic-normality checker, and a packing
//! witness that lower-bounds the variational error of undersized codes.
//!
//! Modules:
//! - [`families`]: k-nomial exponential families (pmf, relative entropy,
//!   Fisher information, maximum-likelihood estimation, natural/moment
//!   parameter duality).
//! - [`typespace`]: exact enumeration of n-types and exchangeable
//!   distributions represented on type space, with exact relative entropy
//!   and variational distance.
//! - [`lattice`]: the quantization grids, nearest-point maps under the
//!   Euclidean and Fisher metrics, and quantization-cell partitions.
//! - [`codec`]: blind and visible encoders, point and cell-mixture decoders,
//!   and average-error evaluation by quadrature over a prior.
//! - [`asymptotics`]: quantized Gaussians, the Clarke-Barron formula, the
//!   mixture (Pythagorean) decomposition, LAN residuals, and packing
//!   witnesses.
//! - [`quad`], [`numerics`]: Gauss-Legendre rules and stable accumulation
//!   helpers shared by everything above.

pub mod asymptotics;
pub mod codec;
pub mod error;
pub mod families;
pub mod lattice;
pub mod numerics;
pub mod quad;
pub mod typespace;

pub use codec::{Code, CodeSpec, Criterion, Decoder, Encoder, ErrorReport, Mode, Prior, PriorKind};
pub use error::{Error, Result};
pub use families::{Family, FisherMatrix, ParamPoint};
pub use lattice::{CellPartition, Lattice, Metric};
pub use typespace::{ExchDist, TypeIndex, TypeSpace};
