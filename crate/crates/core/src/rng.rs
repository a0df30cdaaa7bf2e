use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Independent generator for one path: ChaCha8 keyed by the master seed with
/// the path index as stream id, so a path's draws do not depend on which
/// thread simulates it or on how many paths are run.
pub struct PathRng {
    inner: ChaCha8Rng,
}

impl PathRng {
    pub fn new(seed: u64, path_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(path_index);
        PathRng { inner }
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// One step's standard normals, in the fixed order `(stock, drift, variance)`.
    pub fn triplet(&mut self) -> [f64; 3] {
        [self.normal(), self.normal(), self.normal()]
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}
