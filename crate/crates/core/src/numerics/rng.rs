use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::{index, SliceRandom};
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seedable, platform-independent random stream.
///
/// Streams are derived from one global seed plus a name, so that each
/// consumer (initialization, seeding, splits, k-means) draws from its own
/// sequence and adding draws in one place never shifts another.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn seed_from(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Named sub-stream of `seed`.
    pub fn substream(seed: u64, name: &str) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(fnv1a(name.as_bytes()));
        Self { inner }
    }

    /// Named, indexed sub-stream, e.g. one per repetition.
    pub fn substream_indexed(seed: u64, name: &str, index: u64) -> Self {
        let mut bytes = name.as_bytes().to_vec();
        bytes.push(0);
        bytes.extend_from_slice(&index.to_le_bytes());
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(fnv1a(&bytes));
        Self { inner }
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    /// `amount` distinct elements of `pool`, in draw order.
    pub fn sample<T: Copy>(&mut self, pool: &[T], amount: usize) -> Vec<T> {
        index::sample(&mut self.inner, pool.len(), amount.min(pool.len())).into_iter().map(|i| pool[i]).collect()
    }

    /// Index drawn with probability proportional to `weights`; `None` if
    /// no weight is positive.
    pub fn weighted_index(&mut self, weights: &[f64]) -> Option<usize> {
        WeightedIndex::new(weights).ok().map(|d| d.sample(&mut self.inner))
    }

    /// Up to `amount` distinct indices drawn without replacement with
    /// probability proportional to `weights`; zero-weight indices are never
    /// drawn.
    pub fn weighted_sample(&mut self, weights: &[f64], amount: usize) -> Vec<usize> {
        let positive = weights.iter().filter(|&&w| w > 0.0).count();
        match index::sample_weighted(&mut self.inner, weights.len(), |i| weights[i], amount.min(positive)) {
            Ok(picked) => picked.into_iter().collect(),
            Err(_) => Vec::new(),
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
