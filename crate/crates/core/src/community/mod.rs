//! Distance-based clustering of latent positions and partition comparison.

mod assignment;
mod hclust;
mod partition;

pub use assignment::max_weight_assignment;
pub use hclust::{cut_dendrogram, cut_dendrogram_at_height, hclust_complete, Dendrogram, Merge};
pub use partition::{match_labels, rand_index, LabelMatch, Partition};
