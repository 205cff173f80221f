use super::embed::EmbeddingTable;
use crate::geom::{cosine, normalize};
use crate::scene::Category;
use crate::sim::Observation;
use std::collections::BTreeMap;

/// Per-pixel fused features of one frame, row-major with `dim` floats per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelFeatures {
    pub width: usize,
    pub height: usize,
    pub dim: usize,
    pub data: Vec<f32>,
    /// Normalized area-weighted mean of the visible instance embeddings; zero for an empty view.
    pub global: Vec<f32>,
    /// Fusion weight of the global feature for each visible instance.
    pub alphas: BTreeMap<u32, f32>,
}

impl PixelFeatures {
    pub fn pixel(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Global/local feature fusion: every pixel of instance `k` gets
/// `normalize(a_k * g + (1 - a_k) * e_k)`, where `a_k` is a softmax over instances of
/// their similarity to the global feature `g`.
pub fn pixel_features(obs: &Observation, table: &EmbeddingTable, temperature: f64) -> PixelFeatures {
    let dim = table.dim();
    let areas = obs.instance_areas();
    let mut global = vec![0.0f32; dim];
    for &(_, cat, n) in &areas {
        for (g, e) in global.iter_mut().zip(table.get(cat)) {
            *g += n as f32 * e;
        }
    }
    normalize(&mut global);

    let sims: Vec<f64> = areas.iter().map(|&(_, c, _)| cosine(table.get(c), &global) as f64 / temperature).collect();
    let top = sims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = sims.iter().map(|s| (s - top).exp()).collect();
    let z: f64 = exps.iter().sum();

    let mut fused: BTreeMap<u32, Vec<f32>> = BTreeMap::new();
    let mut alphas = BTreeMap::new();
    for (k, &(inst, cat, _)) in areas.iter().enumerate() {
        let a = (exps[k] / z) as f32;
        let mut v: Vec<f32> = global.iter().zip(table.get(cat)).map(|(g, e)| a * g + (1.0 - a) * e).collect();
        normalize(&mut v);
        alphas.insert(inst, a);
        fused.insert(inst, v);
    }

    let n = obs.width * obs.height;
    let mut data = vec![0.0f32; n * dim];
    for i in 0..n {
        if let Some(v) = fused.get(&obs.instance[i]) {
            data[i * dim..(i + 1) * dim].copy_from_slice(v);
        }
    }
    PixelFeatures { width: obs.width, height: obs.height, dim, data, global, alphas }
}

/// Categories visible in the frame, by pixel count.
pub fn visible_categories(obs: &Observation) -> BTreeMap<Category, usize> {
    let mut out = BTreeMap::new();
    for (_, c, n) in obs.instance_areas() {
        *out.entry(c).or_insert(0) += n;
    }
    out
}
