//! Deterministic seed derivation: one root seed fans out into independent
//! streams per subspace and per pipeline stage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `root` with each element of `path` in order.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(root), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stage tags for [`derive_seed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Tomography = 1,
    Reconstruction = 2,
    BellCurve = 3,
    Chsh = 4,
}

/// Stream seed for one subspace and stage.
pub fn subspace_seed(root: u64, ell1: i32, ell2: i32, stage: Stage) -> u64 {
    derive_seed(root, &[ell1 as i64 as u64, ell2 as i64 as u64, stage as u64])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
