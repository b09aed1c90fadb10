//! Far-field channel matrices from explicit element positions and the
//! constructive synthesis of finite distributed arrays.

mod partition;
mod scene;
mod synthesis;

pub use partition::{equal_area_partition, Cell};
pub use scene::{
    channel_matrices, exact_channel_matrix, lemma1_check, reduced_channel_matrix,
    singular_values, ChannelMatrixPair, FarFieldScene, MIN_RANGE_RATIO,
};
pub use synthesis::{
    achieved_efficiency, finite_array_gram, off_diagonal_norm, stream_powers, synthesize_array,
    ArrayDesign, ArrayElement, ArrayExport,
};
