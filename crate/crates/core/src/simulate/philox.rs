//! Philox4x32-10 counter-based generator.
//!
//! Every path owns the stream `counter = (block, path_id)`, `key = seed`, so a
//! path's draws depend only on `(seed, path_id)` and never on scheduling.

use rand_core::{impls, RngCore};

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32-10 block.
pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(W0);
            key[1] = key[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, ctr[0]);
        let (hi1, lo1) = mulhilo(M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

#[derive(Debug, Clone)]
pub struct PathRng {
    key: [u32; 2],
    path: u64,
    block: u64,
    buf: [u32; 4],
    idx: usize,
}

impl PathRng {
    pub fn new(seed: u64, path: u64) -> Self {
        PathRng {
            key: [seed as u32, (seed >> 32) as u32],
            path,
            block: 0,
            buf: [0; 4],
            idx: 4,
        }
    }

    fn refill(&mut self) {
        let ctr = [
            self.block as u32,
            (self.block >> 32) as u32,
            self.path as u32,
            (self.path >> 32) as u32,
        ];
        self.buf = philox4x32_10(ctr, self.key);
        self.block += 1;
        self.idx = 0;
    }
}

impl RngCore for PathRng {
    fn next_u32(&mut self) -> u32 {
        if self.idx == 4 {
            self.refill();
        }
        let v = self.buf[self.idx];
        self.idx += 1;
        v
    }

    fn next_u64(&mut self) -> u64 {
        impls::next_u64_via_u32(self)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}
