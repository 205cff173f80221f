//! Task relevance of a frame: similarity of its global feature to three prompts
//! (demanded objects present, absent, nothing at all).

use crate::featmap::{hash_vector, EmbeddingTable};
use crate::geom::{cosine, normalize};
use crate::scene::Category;

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTriplet {
    pub positive: Vec<f32>,
    pub negative: Vec<f32>,
    pub none: Vec<f32>,
}

fn marker(name: &str, dim: usize) -> Vec<f32> {
    let mut v = hash_vector(name, dim);
    normalize(&mut v);
    v
}

pub fn build_prompts(demanded: &[Category], table: &EmbeddingTable) -> PromptTriplet {
    let dim = table.dim();
    let none = marker("prompt:nothing", dim);
    let negation = marker("prompt:negation", dim);
    let mut positive = vec![0.0f32; dim];
    for &c in demanded {
        for (p, e) in positive.iter_mut().zip(table.get(c)) {
            *p += e;
        }
    }
    normalize(&mut positive);
    if demanded.is_empty() || positive.iter().all(|&x| x == 0.0) {
        positive = none.clone();
    }
    let mut negative: Vec<f32> = positive.iter().zip(&negation).map(|(p, n)| n - p).collect();
    normalize(&mut negative);
    PromptTriplet { positive, negative, none }
}

/// Probability of the positive prompt under a softmax of cosine similarities over `tau`.
pub fn relevance(global: &[f32], prompts: &PromptTriplet, tau: f64) -> f64 {
    let s = [
        cosine(global, &prompts.positive) as f64 / tau,
        cosine(global, &prompts.negative) as f64 / tau,
        cosine(global, &prompts.none) as f64 / tau,
    ];
    let top = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e = s.map(|x| (x - top).exp());
    e[0] / (e[0] + e[1] + e[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> std::sync::Arc<EmbeddingTable> {
        EmbeddingTable::shared(64)
    }

    #[test]
    fn degenerate_and_single_prompts() {
        let t = table();
        let p = build_prompts(&[], &t);
        assert_eq!(p.positive, p.none);
        let tomato = Category::named("Tomato");
        let p = build_prompts(&[tomato], &t);
        assert!(cosine(&p.positive, t.get(tomato)) > 1.0 - 1e-6);
        assert_ne!(p.positive, p.negative);
    }

    #[test]
    fn mean_prompt_leans_to_each_member() {
        let t = table();
        let cats: Vec<Category> = Category::objects().collect();
        for &a in &cats {
            for &b in &cats {
                if a != b {
                    let p = build_prompts(&[a, b], &t);
                    assert!(cosine(&p.positive, t.get(a)) > 0.0 && cosine(&p.positive, t.get(b)) > 0.0);
                }
            }
        }
    }

    #[test]
    fn scores() {
        let t = table();
        let tomato = Category::named("Tomato");
        let p = build_prompts(&[tomato], &t);
        assert_eq!(relevance(&vec![0.0; 64], &p, 0.1), 1.0 / 3.0);
        assert!(relevance(t.get(tomato), &p, 0.1) > 0.9);
        for c in Category::all() {
            let w = relevance(t.get(c), &p, 0.1);
            assert!(w > 0.0 && w < 1.0);
        }
    }
}
