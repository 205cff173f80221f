//! Online semantic feature map: pixel feature fusion, top-down projection,
//! attention-weighted blending, occupancy and frontiers.

mod embed;
mod frontier;
mod map;
mod pixel;
mod project;
pub mod snapshot;

pub use embed::{embed_category, hash_vector, EmbeddingTable, UnknownCategory, MAX_PAIR_COSINE};
pub use frontier::{boundary_mask, centroid, components, extract_frontiers, sample_tokens, Frontier, FrontierParams};
pub use map::{DiscoveredObject, FeatureMap, InvalidWeight, Occupancy};
pub use pixel::{pixel_features, visible_categories, PixelFeatures};
pub use project::{pixel_cell, project, FrameContribution, Sighting};

use crate::config::Config;

impl FrontierParams {
    pub fn from_config(config: &Config) -> Self {
        FrontierParams {
            threshold: config.frontier_threshold,
            tokens: config.frontier_tokens,
            token_radius: config.token_radius,
            band: config.frontier_band,
        }
    }
}
