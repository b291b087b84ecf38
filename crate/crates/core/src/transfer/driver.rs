use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the base point moves: i.i.d. choices, an irrational rotation read
/// through a partition, or a deterministic cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DriverKind {
    Iid {
        weights: Vec<f64>,
    },
    Rotation {
        theta: f64,
        /// Left endpoints of the partition cells, ascending from 0.
        cells: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    Periodic {
        cycle: Vec<usize>,
    },
}

/// Ergodic driver selecting one of `fibers` (map indices) at every time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Driver {
    #[serde(flatten)]
    pub kind: DriverKind,
    pub fibers: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl Driver {
    pub fn constant(fiber: usize) -> Self {
        Driver { kind: DriverKind::Periodic { cycle: vec![0] }, fibers: vec![fiber], seed: 0 }
    }

    pub fn iid(weights: Vec<f64>, fibers: Vec<usize>, seed: u64) -> Self {
        Driver { kind: DriverKind::Iid { weights }, fibers, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.fibers.len();
        if k == 0 {
            return Err(Error::Config("driver needs at least one fiber".into()));
        }
        match &self.kind {
            DriverKind::Iid { weights } => {
                if weights.len() != k || weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(Error::Config("iid weights must be nonnegative, one per fiber".into()));
                }
                let s: f64 = weights.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!("iid weights sum to {s}, not 1")));
                }
            }
            DriverKind::Rotation { theta, cells, offset } => {
                if cells.len() != k || cells.first() != Some(&0.0) {
                    return Err(Error::Config("rotation cells must start at 0, one per fiber".into()));
                }
                if cells.windows(2).any(|w| !(w[0] < w[1])) || cells.iter().any(|c| !(*c < 1.0)) {
                    return Err(Error::Config("rotation cells must increase strictly inside [0,1)".into()));
                }
                if !theta.is_finite() || !offset.is_finite() {
                    return Err(Error::Config("rotation angle and offset must be finite".into()));
                }
            }
            DriverKind::Periodic { cycle } => {
                if cycle.is_empty() || cycle.iter().any(|&c| c >= k) {
                    return Err(Error::Config("periodic cycle must be nonempty with valid positions".into()));
                }
            }
        }
        Ok(())
    }

    /// Fiber (map index) at absolute time `t`; independent of any window.
    pub fn fiber_at(&self, t: i64) -> usize {
        let pos = match &self.kind {
            DriverKind::Iid { weights } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(t as u64);
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                pick
            }
            DriverKind::Rotation { theta, cells, offset } => {
                let x = (offset + t as f64 * theta).rem_euclid(1.0);
                cells.iter().rposition(|&c| c <= x).unwrap_or(0)
            }
            DriverKind::Periodic { cycle } => cycle[t.rem_euclid(cycle.len() as i64) as usize],
        };
        self.fibers[pos]
    }
}

/// Realised two-sided fiber sequence on the window `[-backward, forward]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocyclePath {
    start: i64,
    indices: Vec<usize>,
    driver: Driver,
}

impl CocyclePath {
    pub fn sample(driver: &Driver, backward: usize, forward: usize) -> Result<Self> {
        driver.validate()?;
        let start = -(backward as i64);
        let indices = (start..=forward as i64).map(|t| driver.fiber_at(t)).collect();
        Ok(Self { start, indices, driver: driver.clone() })
    }

    pub fn window(&self) -> (i64, i64) {
        (self.start, self.start + self.indices.len() as i64 - 1)
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    pub fn contains(&self, t: i64) -> bool {
        let (lo, hi) = self.window();
        lo <= t && t <= hi
    }

    pub fn index(&self, t: i64) -> Result<usize> {
        let (lo, hi) = self.window();
        if t < lo || t > hi {
            return Err(Error::WindowViolation { t, lo, hi });
        }
        Ok(self.indices[(t - lo) as usize])
    }
}
