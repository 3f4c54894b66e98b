use crate::error::{input, Result};
use serde::{Deserialize, Serialize};

/// A function on `0..n` stored as its image vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transformation {
    image: Vec<usize>,
}

impl Transformation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if let Some(&x) = image.iter().find(|&&x| x >= n) {
            return input(format!("image entry {x} out of range for ground set of size {n}"));
        }
        Ok(Transformation { image })
    }

    pub(crate) fn new_unchecked(image: Vec<usize>) -> Self {
        Transformation { image }
    }

    pub fn identity(n: usize) -> Self {
        Transformation { image: (0..n).collect() }
    }

    pub fn constant(n: usize, c: usize) -> Self {
        Transformation { image: vec![c; n] }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn into_image(self) -> Vec<usize> {
        self.image
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, q: usize) -> usize {
        self.image[q]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.image.len()];
        for &x in &self.image {
            if seen[x] {
                return false;
            }
            seen[x] = true;
        }
        true
    }

    pub fn constant_value(&self) -> Option<usize> {
        let first = *self.image.first()?;
        self.image.iter().all(|&x| x == first).then_some(first)
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_permutation() {
            return None;
        }
        let mut inv = vec![0; self.image.len()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x] = i;
        }
        Some(Transformation { image: inv })
    }
}

/// `f ∘ g`, i.e. apply `g` first: `result[i] = f[g[i]]`.
pub fn compose(f: &Transformation, g: &Transformation) -> Result<Transformation> {
    if f.len() != g.len() {
        return input(format!("size mismatch: {} vs {}", f.len(), g.len()));
    }
    Ok(compose_unchecked(f, g))
}

pub(crate) fn compose_unchecked(f: &Transformation, g: &Transformation) -> Transformation {
    Transformation { image: g.image.iter().map(|&x| f.image[x]).collect() }
}
