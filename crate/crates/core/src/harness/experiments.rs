use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Noise};

/// Name of the per-trial generator, recorded in bench metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9) seeded with splitmix64(splitmix64(splitmix64(seed) ^ experiment) ^ trial)";

/// Noisy ranges published for the five-anchor example.
pub const E1_PUBLISHED_RANGES: [f64; 5] = [8.0051, 13.0112, 9.1138, 7.7924, 8.0210];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::E1,
        ExperimentId::E2,
        ExperimentId::E3,
        ExperimentId::E4,
        ExperimentId::E5,
        ExperimentId::E6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::E1 => "e1",
            ExperimentId::E2 => "e2",
            ExperimentId::E3 => "e3",
            ExperimentId::E4 => "e4",
            ExperimentId::E5 => "e5",
            ExperimentId::E6 => "e6",
        }
    }

    /// Embedding dimension.
    pub fn r(self) -> usize {
        match self {
            ExperimentId::E5 | ExperimentId::E6 => 3,
            _ => 2,
        }
    }

    fn code(self) -> u64 {
        self as u64 + 1
    }

    /// Anchor count when the experiment fixes it.
    pub fn fixed_n(self) -> Option<usize> {
        match self {
            ExperimentId::E1 | ExperimentId::E2 | ExperimentId::E6 => Some(5),
            _ => None,
        }
    }

    fn default_n(self) -> usize {
        match self {
            ExperimentId::E4 | ExperimentId::E5 => 10,
            _ => 5,
        }
    }

    fn default_noise(self) -> Noise {
        match self {
            ExperimentId::E1 => Noise::Gaussian { std: 0.1f64.sqrt() },
            ExperimentId::E2 => Noise::Gaussian { std: 90.0 },
            ExperimentId::E3 => Noise::Gaussian { std: 0.1 },
            ExperimentId::E4 => Noise::Gaussian { std: 20f64.sqrt() },
            ExperimentId::E5 => Noise::MultiplicativeUniform { eta: 0.2 },
            ExperimentId::E6 => Noise::Gaussian { std: 0.1 },
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub n: usize,
    pub noise: Noise,
    pub trials: usize,
    pub seed: u64,
    /// e6 only: put the source inside the anchor hull at the origin.
    #[serde(default)]
    pub inside_hull: bool,
    /// e1 only: use the published noisy ranges instead of drawing noise.
    #[serde(default)]
    pub replay: bool,
}

impl ExperimentSpec {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentSpec {
            id,
            n: id.default_n(),
            noise: id.default_noise(),
            trials: if id == ExperimentId::E1 { 1 } else { 100 },
            seed: 0,
            inside_hull: false,
            replay: false,
        }
    }

    pub fn r(&self) -> usize {
        self.id.r()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        self.noise.validate()?;
        if let Some(n) = self.id.fixed_n() {
            if self.n != n {
                return Err(Error::InvalidArgument(format!(
                    "{} has a fixed anchor set of size {n}",
                    self.id
                )));
            }
        }
        if self.n < self.r() + 1 {
            return Err(Error::TooFewAnchors {
                needed: self.r() + 1,
                got: self.n,
                r: self.r(),
            });
        }
        if self.replay && self.id != ExperimentId::E1 {
            return Err(Error::InvalidArgument("replay is only defined for e1".into()));
        }
        if self.inside_hull && self.id != ExperimentId::E6 {
            return Err(Error::InvalidArgument("inside_hull is only defined for e6".into()));
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one trial. `salt` separates consumers within a
/// trial (instance generation vs. oracle restarts).
pub fn trial_rng(seed: u64, id: ExperimentId, trial: usize, salt: u64) -> ChaCha8Rng {
    let s = splitmix64(splitmix64(splitmix64(seed) ^ id.code()) ^ trial as u64);
    ChaCha8Rng::seed_from_u64(splitmix64(s ^ salt))
}

fn e1_anchors() -> DMatrix<f64> {
    DMatrix::from_row_slice(5, 2, &[6., 4., 0., -10., 5., -3., 1., -4., 3., -3.])
}

fn e2_anchors() -> DMatrix<f64> {
    let s = 3000.0 * 3f64.sqrt();
    DMatrix::from_row_slice(
        5,
        2,
        &[0., 0., s, 3000., 0., 6000., -s, 3000., -s, -3000.],
    )
}

fn e6_anchors() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        5,
        3,
        &[1., 0., 0., 0., 2., 0., -2., -1., 0., 0., 0., 2., 0., 0., -1.],
    )
}

fn uniform_points<R: Rng>(rng: &mut R, n: usize, r: usize, half: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, r, |_, _| rng.random_range(-half..=half))
}

/// Deterministic instance for `(spec, trial)`.
pub fn generate(spec: &ExperimentSpec, trial: usize) -> Result<Instance> {
    spec.validate()?;
    let mut rng = trial_rng(spec.seed, spec.id, trial, 0);
    let r = spec.r();
    let (anchors, source) = match spec.id {
        ExperimentId::E1 => (e1_anchors(), DVector::from_vec(vec![-2.0, 3.0])),
        ExperimentId::E2 => (e2_anchors(), DVector::from_vec(vec![1000.0, 2000.0])),
        ExperimentId::E3 => {
            let p = uniform_points(&mut rng, spec.n + 1, r, 10.0);
            split_last(p)
        }
        ExperimentId::E4 => {
            let p = uniform_points(&mut rng, spec.n + 1, r, 1000.0);
            split_last(p)
        }
        ExperimentId::E5 => {
            let p = uniform_points(&mut rng, spec.n + 1, r, 10.0);
            split_last(p)
        }
        ExperimentId::E6 => {
            let s = if spec.inside_hull {
                vec![0.0, 0.0, 0.0]
            } else {
                vec![-1.0, 1.0, 1.0]
            };
            (e6_anchors(), DVector::from_vec(s))
        }
    };
    if spec.replay {
        return Instance::from_distances(anchors, &E1_PUBLISHED_RANGES, r, Some(source));
    }
    Instance::from_source(anchors, source, r, &spec.noise, &mut rng)
}

fn split_last(p: DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = p.nrows() - 1;
    let source = p.row(n).transpose();
    (p.rows(0, n).into_owned(), source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edm::squared_distances;

    #[test]
    fn e1_replay_uses_published_ranges() {
        let spec = ExperimentSpec {
            replay: true,
            ..ExperimentSpec::new(ExperimentId::E1)
        };
        let inst = generate(&spec, 0).unwrap();
        let ranges = inst.ranges();
        for (a, b) in ranges.iter().zip(E1_PUBLISHED_RANGES) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(inst.anchors(), &e1_anchors());
    }

    #[test]
    fn e6_outside_source() {
        let inst = generate(&ExperimentSpec::new(ExperimentId::E6), 0).unwrap();
        assert_eq!(inst.true_source().unwrap().as_slice(), &[-1.0, 1.0, 1.0]);
        assert_eq!(inst.r(), 3);
        let inside = ExperimentSpec {
            inside_hull: true,
            ..ExperimentSpec::new(ExperimentId::E6)
        };
        assert_eq!(generate(&inside, 0).unwrap().true_source().unwrap().norm(), 0.0);
    }

    #[test]
    fn e3_without_noise_is_exact() {
        let spec = ExperimentSpec {
            noise: Noise::Gaussian { std: 0.0 },
            ..ExperimentSpec::new(ExperimentId::E3)
        };
        let inst = generate(&spec, 7).unwrap();
        let exact = inst.true_edm().unwrap();
        assert!((exact.as_matrix() - inst.delta().as_matrix()).amax() < 1e-9);
    }

    #[test]
    fn anchor_block_is_noise_free() {
        for id in ExperimentId::ALL {
            let inst = generate(&ExperimentSpec::new(id), 3).unwrap();
            let exact = squared_distances(inst.anchors());
            let n = inst.n();
            let block = inst.delta().as_matrix().view((0, 0), (n, n)).into_owned();
            assert_eq!(block, exact.into_matrix(), "{id}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = ExperimentSpec::new(ExperimentId::E4);
        assert_eq!(generate(&spec, 5).unwrap(), generate(&spec, 5).unwrap());
        assert_ne!(generate(&spec, 5).unwrap(), generate(&spec, 6).unwrap());
        let other = ExperimentSpec { seed: 1, ..spec.clone() };
        assert_ne!(generate(&spec, 5).unwrap(), generate(&other, 5).unwrap());
    }

    #[test]
    fn unknown_and_invalid_specs() {
        assert!(matches!("e9".parse::<ExperimentId>(), Err(Error::UnknownExperiment(_))));
        assert_eq!("E4".parse::<ExperimentId>().unwrap(), ExperimentId::E4);
        let bad = ExperimentSpec { trials: 0, ..ExperimentSpec::new(ExperimentId::E3) };
        assert!(generate(&bad, 0).is_err());
        let bad = ExperimentSpec { n: 7, ..ExperimentSpec::new(ExperimentId::E2) };
        assert!(generate(&bad, 0).is_err());
        let bad = ExperimentSpec { replay: true, ..ExperimentSpec::new(ExperimentId::E3) };
        assert!(generate(&bad, 0).is_err());
    }
}
