use super::GsmError;

/// 64-bit Galois LFSR, taps x⁶⁴ + x⁶³ + x⁶¹ + x⁶⁰ + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lfsr(u64);

const TAPS: u64 = 0xD800_0000_0000_0000;

impl Lfsr {
    /// A zero seed would lock the register, so it is replaced by all ones.
    pub fn new(seed: u64) -> Self {
        Lfsr(if seed == 0 { u64::MAX } else { seed })
    }

    pub fn next_bit(&mut self) -> u8 {
        let out = (self.0 & 1) as u8;
        self.0 >>= 1;
        if out == 1 {
            self.0 ^= TAPS;
        }
        out
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `len` keystream bits for one burst.
pub fn keystream(key: u64, frame: u64, burst: u64, len: usize) -> Vec<u8> {
    let seed = splitmix64(key ^ splitmix64(frame.wrapping_mul(8).wrapping_add(burst)));
    let mut r = Lfsr::new(seed);
    (0..len).map(|_| r.next_bit()).collect()
}

/// XOR of `burst` with the head of `ks`; its own inverse.
pub fn cipher(burst: &[u8], ks: &[u8]) -> Result<Vec<u8>, GsmError> {
    if ks.len() < burst.len() {
        return Err(GsmError::ShortKeystream {
            need: burst.len(),
            have: ks.len(),
        });
    }
    Ok(burst.iter().zip(ks).map(|(b, k)| b ^ k).collect())
}
