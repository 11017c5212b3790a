use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contrastive::{EmbeddingSet, Modality};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissimilarityMetric {
    /// Mean squared difference of the entries.
    #[default]
    Mse,
    Euclidean,
}

impl DissimilarityMetric {
    pub fn name(self) -> &'static str {
        match self {
            DissimilarityMetric::Mse => "mse",
            DissimilarityMetric::Euclidean => "euclidean",
        }
    }

    fn between(self, a: &[f64], b: &[f64]) -> f64 {
        let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        match self {
            DissimilarityMetric::Mse => ss / a.len() as f64,
            DissimilarityMetric::Euclidean => ss.sqrt(),
        }
    }
}

impl fmt::Display for DissimilarityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DissimilarityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(DissimilarityMetric::Mse),
            "euclidean" | "l2" => Ok(DissimilarityMetric::Euclidean),
            _ => Err(Error::Config(format!(
                "unknown dissimilarity metric '{s}' (expected mse or euclidean)"
            ))),
        }
    }
}

/// Symmetric, zero-diagonal, non-negative `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix(Matrix);

impl DissimilarityMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        let (r, c) = m.shape();
        if r != c || r == 0 {
            return Err(Error::shape(
                "DissimilarityMatrix",
                "non-empty square matrix",
                format!("{r}x{c}"),
            ));
        }
        for i in 0..r {
            if m[(i, i)] != 0.0 {
                return Err(Error::Domain(format!(
                    "diagonal entry {i} is {} (must be 0)",
                    m[(i, i)]
                )));
            }
            for j in 0..i {
                let v = m[(i, j)];
                if !(v.is_finite() && v >= 0.0) || v != m[(j, i)] {
                    return Err(Error::Domain(format!(
                        "entries ({i},{j}) must be finite, non-negative and symmetric"
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix(m))
    }

    /// Pairwise dissimilarities between the rows of `items`.
    pub fn from_rows(items: &Matrix, metric: DissimilarityMetric) -> Result<Self> {
        let n = items.rows();
        if n == 0 || items.cols() == 0 {
            return Err(Error::Contract("no items to compare".into()));
        }
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let v = metric.between(items.row(i), items.row(j));
                m.as_mut_slice()[i * n + j] = v;
                m.as_mut_slice()[j * n + i] = v;
            }
        }
        DissimilarityMatrix::new(m)
    }

    pub fn len(&self) -> usize {
        self.0.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.rows() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Where a pooled item came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemLabel {
    pub modality: Modality,
    pub pair_id: usize,
}

/// Dissimilarities over both modalities pooled: items `0..n` are modality
/// A, items `n..2n` modality B, and item `i` pairs with item `n + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledDissimilarity {
    pub matrix: DissimilarityMatrix,
    pub labels: Vec<ItemLabel>,
}

fn pool(a: &Matrix, b: &Matrix, metric: DissimilarityMetric) -> Result<PooledDissimilarity> {
    if a.cols() != b.cols() {
        return Err(Error::shape("pooled dissimilarity", a.cols(), b.cols()));
    }
    if a.rows() != b.rows() {
        return Err(Error::Contract(format!(
            "paired sets need equal item counts ({} vs {})",
            a.rows(),
            b.rows()
        )));
    }
    let mut rows: Vec<Vec<f64>> = a.row_iter().map(<[f64]>::to_vec).collect();
    rows.extend(b.row_iter().map(<[f64]>::to_vec));
    let matrix = DissimilarityMatrix::from_rows(&Matrix::from_rows(&rows)?, metric)?;
    let labels = [Modality::A, Modality::B]
        .iter()
        .flat_map(|&modality| (0..a.rows()).map(move |pair_id| ItemLabel { modality, pair_id }))
        .collect();
    Ok(PooledDissimilarity { matrix, labels })
}

/// Pools two paired embedding sets (either argument order).
pub fn pooled_embedding_dissimilarity(
    set_a: &EmbeddingSet,
    set_b: &EmbeddingSet,
    metric: DissimilarityMetric,
) -> Result<PooledDissimilarity> {
    set_a.check_paired(set_b)?;
    let (a, b) = if set_a.modality() == Modality::A {
        (set_a, set_b)
    } else {
        (set_b, set_a)
    };
    pool(a.data(), b.data(), metric)
}

/// Pools two paired image lists, comparing flattened pixels.
pub fn pooled_image_dissimilarity(
    a: &[Image],
    b: &[Image],
    metric: DissimilarityMetric,
) -> Result<PooledDissimilarity> {
    let flatten = |imgs: &[Image]| -> Result<Matrix> {
        let first = imgs
            .first()
            .ok_or_else(|| Error::Contract("no images to compare".into()))?;
        let mut rows = Vec::with_capacity(imgs.len());
        for img in imgs {
            img.check_same_size(first, "pooled_image_dissimilarity")?;
            rows.push(img.data().to_vec());
        }
        Matrix::from_rows(&rows)
    };
    pool(&flatten(a)?, &flatten(b)?, metric)
}
