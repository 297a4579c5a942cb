use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used by every sampler and simulator in the crate.
pub type MsmRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> MsmRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed for stream `index` of a master seed (splitmix64).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
