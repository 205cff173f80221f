//! Deterministic stand-in for a vision-language encoder.
//!
//! Each category gets a hashed base direction plus a shared component for the room
//! it usually appears in, so co-occurring objects are mildly similar.

use crate::geom::{cosine, dot, normalize};
use crate::scene::Category;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Weight of the room component relative to the per-category direction.
pub const ROOM_WEIGHT: f32 = 0.6;
/// No two category embeddings may be more similar than this.
pub const MAX_PAIR_COSINE: f32 = 0.6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

/// Pseudo-random vector in `[-1, 1]^dim` derived from SHA-256 of `text`.
pub fn hash_vector(text: &str, dim: usize) -> Vec<f32> {
    let mut out = Vec::with_capacity(dim);
    let mut block = 0u32;
    while out.len() < dim {
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        h.update(block.to_le_bytes());
        let digest = h.finalize();
        for chunk in digest.chunks_exact(4) {
            if out.len() == dim {
                break;
            }
            let u = u32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            out.push((u as f64 / u32::MAX as f64 * 2.0 - 1.0) as f32);
        }
        block += 1;
    }
    out
}

/// Unit embeddings for every category except background, indexed by category id.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: Vec<Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        for salt in 0..64u32 {
            let table = Self::build(dim, salt);
            if table.max_pair_cosine() < MAX_PAIR_COSINE {
                return table;
            }
        }
        panic!("no embedding salt keeps pairwise cosines below {MAX_PAIR_COSINE} at dim {dim}");
    }

    fn build(dim: usize, salt: u32) -> Self {
        let mut vectors = vec![vec![0.0; dim]];
        let mut basis: Vec<Vec<f32>> = Vec::new();
        for c in Category::all() {
            let mut v = hash_vector(&format!("category:{}:{salt}", c.name()), dim);
            // orthogonalize while the dimension allows it
            if basis.len() < dim {
                for b in &basis {
                    let p = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
                }
                normalize(&mut v);
                basis.push(v.clone());
            } else {
                normalize(&mut v);
            }
            if let Some(room) = c.info().room {
                let mut r = hash_vector(&format!("room:{}:{salt}", room.as_str()), dim);
                normalize(&mut r);
                v.iter_mut().zip(&r).for_each(|(x, y)| *x += ROOM_WEIGHT * y);
            }
            normalize(&mut v);
            vectors.push(v);
        }
        EmbeddingTable { dim, vectors }
    }

    /// Shared table for `dim`, built once per process.
    pub fn shared(dim: usize) -> Arc<EmbeddingTable> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<EmbeddingTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("embedding cache poisoned");
        guard.entry(dim).or_insert_with(|| Arc::new(EmbeddingTable::new(dim))).clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Embedding of a category; the zero vector for background.
    pub fn get(&self, c: Category) -> &[f32] {
        &self.vectors[c.id() as usize]
    }

    pub fn by_name(&self, name: &str) -> Result<&[f32], UnknownCategory> {
        match Category::from_name(name) {
            Some(c) if c != Category::BACKGROUND => Ok(self.get(c)),
            _ => Err(UnknownCategory(name.to_string())),
        }
    }

    pub fn max_pair_cosine(&self) -> f32 {
        let mut worst: f32 = 0.0;
        for i in 1..self.vectors.len() {
            for j in i + 1..self.vectors.len() {
                worst = worst.max(cosine(&self.vectors[i], &self.vectors[j]).abs());
            }
        }
        worst
    }

    /// Category whose embedding is most similar to `v` (walls included).
    pub fn decode(&self, v: &[f32]) -> Category {
        Category::all()
            .max_by(|a, b| {
                cosine(v, self.get(*a))
                    .partial_cmp(&cosine(v, self.get(*b)))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.cmp(a))
            })
            .expect("taxonomy is nonempty")
    }
}

/// Embedding of a single category at the given dimension.
pub fn embed_category(c: Category, dim: usize) -> Vec<f32> {
    EmbeddingTable::shared(dim).get(c).to_vec()
}
