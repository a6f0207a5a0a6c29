use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Independent random streams, one per (replication, day, role).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Context,
    Demand,
    Features,
    Perturbations,
    Activations,
    /// Payment draws of the global-experimentation baseline.
    Exploration,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::Context => 1,
            Role::Demand => 2,
            Role::Features => 3,
            Role::Perturbations => 4,
            Role::Activations => 5,
            Role::Exploration => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DaySeeds {
    pub spec: SeedSpec,
    pub rep: u64,
    pub day: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master: u64) -> Self {
        SeedSpec { master }
    }

    pub fn day(&self, rep: u64, day: u64) -> DaySeeds {
        DaySeeds {
            spec: *self,
            rep,
            day,
        }
    }

    /// 256-bit seed from chained SplitMix64 over the key.
    pub fn stream(&self, rep: u64, day: u64, role: Role) -> ChaCha8Rng {
        let mut h = splitmix(self.master);
        for k in [rep, day, role.tag()] {
            h = splitmix(h ^ k);
        }
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_mut(8) {
            h = splitmix(h);
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

impl DaySeeds {
    pub fn stream(&self, role: Role) -> ChaCha8Rng {
        self.spec.stream(self.rep, self.day, role)
    }
}
