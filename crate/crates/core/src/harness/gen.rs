use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RsncError};
use crate::model::{DestinationState, PacketId, Scenario};

/// Random scenario parameters. Link limits and deadlines are uniform reals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub n: usize,
    pub m: usize,
    pub rmin: f64,
    pub rmax: f64,
    pub tmin: f64,
    pub tmax: f64,
    #[serde(default = "default_packet_size")]
    pub packet_size: f64,
    #[serde(default = "default_has_density")]
    pub has_density: f64,
    #[serde(default = "default_wants_density")]
    pub wants_density: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Chosen so whole-process runs are loaded enough to separate the schedulers
/// while one broadcast at the slowest probed rate still meets some deadlines.
pub const DEFAULT_PACKET_SIZE: f64 = 350.0;

fn default_packet_size() -> f64 {
    DEFAULT_PACKET_SIZE
}

fn default_has_density() -> f64 {
    0.5
}

fn default_wants_density() -> f64 {
    0.3
}

fn default_alpha() -> f64 {
    1.0
}

impl GenConfig {
    pub fn new(n: usize, m: usize, rates: (f64, f64), deadlines: (f64, f64)) -> Self {
        GenConfig {
            n,
            m,
            rmin: rates.0,
            rmax: rates.1,
            tmin: deadlines.0,
            tmax: deadlines.1,
            packet_size: default_packet_size(),
            has_density: default_has_density(),
            wants_density: default_wants_density(),
            alpha: default_alpha(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(RsncError::InvalidConfig(msg.into()));
        if !(self.rmin > 0.0 && self.rmin <= self.rmax && self.rmax.is_finite()) {
            return fail("need 0 < rmin <= rmax");
        }
        if !(self.tmin > 0.0 && self.tmin <= self.tmax && self.tmax.is_finite()) {
            return fail("need 0 < tmin <= tmax");
        }
        if !(self.packet_size > 0.0 && self.packet_size.is_finite()) {
            return fail("packet_size must be positive");
        }
        let density_ok = |d: f64| d > 0.0 && d <= 1.0;
        if !density_ok(self.has_density) || !density_ok(self.wants_density) {
            return fail("densities must lie in (0, 1]");
        }
        if !(self.alpha > 0.0) {
            return fail("alpha must be positive");
        }
        Ok(())
    }
}

/// Deterministic in `config.seed`. Each packet joins a destination's wanted
/// set with `wants_density`, otherwise its overheard set with `has_density`.
pub fn generate_scenario(config: &GenConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut destinations = Vec::with_capacity(config.m);
    for _ in 0..config.m {
        let mut dest = DestinationState::new(rng.gen_range(config.rmin..=config.rmax));
        for j in 0..config.n {
            if rng.gen_bool(config.wants_density) {
                let deadline = rng.gen_range(config.tmin..=config.tmax);
                dest.wants.insert(PacketId(j));
                dest.deadlines.insert(PacketId(j), deadline);
            } else if rng.gen_bool(config.has_density) {
                dest.has.insert(PacketId(j));
            }
        }
        destinations.push(dest);
    }
    Scenario::with_benefits(config.packet_size, vec![config.alpha; config.n], destinations)
}
