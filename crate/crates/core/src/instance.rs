//! Problem instances and the squared-dissimilarity matrix Δ built from
//! them. Anchors occupy indices `0..n`, the source
//! index `n`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::edm::squared_distances;
use crate::error::{Error, Result};
use crate::sym::SymMatrix;

/// Measurement noise on the anchor–source ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Noise {
    /// `δ = ‖xⱼ − x‖ + ε`, `ε ~ N(0, std²)`.
    Gaussian { std: f64 },
    /// `δ = ‖xⱼ − x‖(1 + ε)`, `ε ~ U(−eta, eta)`.
    MultiplicativeUniform { eta: f64 },
}

impl Noise {
    pub fn validate(&self) -> Result<()> {
        let v = self.level();
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise level must be finite and nonnegative, got {v}"
            )));
        }
        Ok(())
    }

    /// σ or η.
    pub fn level(&self) -> f64 {
        match *self {
            Noise::Gaussian { std } => std,
            Noise::MultiplicativeUniform { eta } => eta,
        }
    }

    /// Draws one noisy range from an exact range.
    pub fn perturb<R: Rng + ?Sized>(&self, exact: f64, rng: &mut R) -> f64 {
        match *self {
            Noise::Gaussian { std } if std > 0.0 => {
                exact + Normal::new(0.0, std).expect("validated std").sample(rng)
            }
            Noise::MultiplicativeUniform { eta } if eta > 0.0 => {
                let eps = Uniform::new(-eta, eta).expect("validated eta").sample(rng);
                exact * (1.0 + eps)
            }
            _ => exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    r: usize,
    anchors: DMatrix<f64>,
    true_source: Option<DVector<f64>>,
    delta: SymMatrix,
}

fn check_anchor_count(n: usize, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be >= 1".into()));
    }
    if n < r + 1 {
        return Err(Error::TooFewAnchors {
            needed: r + 1,
            got: n,
            r,
        });
    }
    Ok(())
}

impl Instance {
    /// Builds Δ from exact anchor distances and measured ranges. Negative
    /// ranges are clamped to zero before squaring.
    pub fn from_distances(
        anchors: DMatrix<f64>,
        distances: &[f64],
        r: usize,
        true_source: Option<DVector<f64>>,
    ) -> Result<Self> {
        let n = anchors.nrows();
        check_anchor_count(n, r)?;
        if anchors.ncols() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: anchors.ncols(),
            });
        }
        if distances.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: distances.len(),
            });
        }
        if let Some(s) = &true_source {
            if s.len() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    got: s.len(),
                });
            }
        }
        if distances.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("non-finite range".into()));
        }
        let squared: Vec<f64> = distances.iter().map(|d| d.max(0.0).powi(2)).collect();
        Ok(Self::assemble(anchors, &squared, r, true_source))
    }

    fn assemble(
        anchors: DMatrix<f64>,
        squared_ranges: &[f64],
        r: usize,
        true_source: Option<DVector<f64>>,
    ) -> Self {
        let n = anchors.nrows();
        let anchor_block = squared_distances(&anchors);
        let mut delta = DMatrix::zeros(n + 1, n + 1);
        delta
            .view_mut((0, 0), (n, n))
            .copy_from(anchor_block.as_matrix());
        for (j, &d2) in squared_ranges.iter().enumerate() {
            delta[(j, n)] = d2;
            delta[(n, j)] = d2;
        }
        Instance {
            r,
            anchors,
            true_source,
            delta: SymMatrix::symmetrized(delta),
        }
    }

    /// Draws noisy ranges from a known source position.
    pub fn from_source<R: Rng + ?Sized>(
        anchors: DMatrix<f64>,
        source: DVector<f64>,
        r: usize,
        noise: &Noise,
        rng: &mut R,
    ) -> Result<Self> {
        noise.validate()?;
        if source.len() != anchors.ncols() {
            return Err(Error::DimensionMismatch {
                expected: anchors.ncols(),
                got: source.len(),
            });
        }
        if noise.level() == 0.0 {
            check_anchor_count(anchors.nrows(), r)?;
            if anchors.ncols() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    got: anchors.ncols(),
                });
            }
            let squared: Vec<f64> = (0..anchors.nrows())
                .map(|j| (anchors.row(j).transpose() - &source).norm_squared())
                .collect();
            return Ok(Self::assemble(anchors, &squared, r, Some(source)));
        }
        let distances: Vec<f64> = (0..anchors.nrows())
            .map(|j| {
                let exact = (anchors.row(j).transpose() - &source).norm();
                noise.perturb(exact, rng)
            })
            .collect();
        Self::from_distances(anchors, &distances, r, Some(source))
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of anchors.
    pub fn n(&self) -> usize {
        self.anchors.nrows()
    }

    /// One anchor per row.
    pub fn anchors(&self) -> &DMatrix<f64> {
        &self.anchors
    }

    pub fn true_source(&self) -> Option<&DVector<f64>> {
        self.true_source.as_ref()
    }

    pub fn delta(&self) -> &SymMatrix {
        &self.delta
    }

    /// Measured ranges δⱼ (square roots of the source column of Δ).
    pub fn ranges(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|j| self.delta.get(j, n).sqrt()).collect()
    }

    /// The noise-free extended EDM, when the true source is known.
    pub fn true_edm(&self) -> Option<SymMatrix> {
        let s = self.true_source.as_ref()?;
        Some(squared_distances(&stack_source(&self.anchors, s)))
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            r: self.r,
            anchors: rows_of(&self.anchors),
            true_source: self.true_source.as_ref().map(|s| s.iter().copied().collect()),
            delta: Some(self.delta.to_rows()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<InstanceFile>(s)?.into_instance()
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Appends `source` as the last row of `anchors`.
pub fn stack_source(anchors: &DMatrix<f64>, source: &DVector<f64>) -> DMatrix<f64> {
    let n = anchors.nrows();
    let mut p = anchors.clone().resize_vertically(n + 1, 0.0);
    p.row_mut(n).copy_from(&source.transpose());
    p
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn points_from_rows(rows: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]))
}

/// On-disk JSON form. `delta` may be omitted for anchor-only inputs, in
/// which case it cannot be turned into an [`Instance`] but still serves the
/// exposing-vector computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub r: usize,
    pub anchors: Vec<Vec<f64>>,
    #[serde(default)]
    pub true_source: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<Vec<f64>>>,
}

impl InstanceFile {
    pub fn anchor_matrix(&self) -> Result<DMatrix<f64>> {
        points_from_rows(&self.anchors, self.r)
    }

    pub fn into_instance(self) -> Result<Instance> {
        let anchors = self.anchor_matrix()?;
        let n = anchors.nrows();
        check_anchor_count(n, self.r)?;
        let true_source = self.true_source.map(DVector::from_vec);
        let Some(rows) = self.delta else {
            return Err(Error::InvalidArgument("instance has no `delta` matrix".into()));
        };
        let delta = SymMatrix::from_rows(&rows)?;
        if delta.dim() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                got: delta.dim(),
            });
        }
        let scale = delta.as_matrix().amax().max(1.0);
        for i in 0..=n {
            if delta.get(i, i).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!("delta[{i}][{i}] is not zero")));
            }
            if delta.get(i, n) < 0.0 {
                return Err(Error::InvalidArgument(format!("delta[{i}][{n}] is negative")));
            }
        }
        let exact = squared_distances(&anchors);
        for i in 0..n {
            for j in 0..n {
                if (delta.get(i, j) - exact.get(i, j)).abs() > 1e-9 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "delta[{i}][{j}] does not match the anchor distance"
                    )));
                }
            }
        }
        let distances: Vec<f64> = (0..n).map(|j| delta.get(j, n).sqrt()).collect();
        Instance::from_distances(anchors, &distances, self.r, true_source)
    }
}
