//! Counter-addressed normal streams.
//!
//! Every `(seed, channel, grid, path, step)` tuple selects its own ChaCha8
//! key, stream and block position, so a draw never depends on how many paths
//! or steps were generated before it or by which worker.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Channel {
    Increments,
    LevyArea,
    Perturbation,
}

impl Channel {
    fn tag(self) -> u64 {
        match self {
            Channel::Increments => 0x1a2b_3c4d_5e6f_7081,
            Channel::LevyArea => 0x9e37_79b9_7f4a_7c15,
            Channel::Perturbation => 0xc2b2_ae3d_27d4_eb4f,
        }
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator positioned at the start of the block owned by `step`.
pub(crate) fn step_rng(seed: u64, channel: Channel, grid_steps: usize, path: u64, step: usize) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(channel.tag() ^ splitmix64(grid_steps as u64)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(path);
    rng.set_word_pos((step as u128) << 40);
    rng
}

pub(crate) fn fill_normals(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}
