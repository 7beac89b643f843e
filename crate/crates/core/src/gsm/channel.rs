use super::{check_len, GsmError, CODED_BITS, SPEECH_BITS};

/// Bit budget of one coded frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    /// Speech bits covered by the parity check.
    pub class1a: usize,
    pub parity: usize,
    pub class1b: usize,
    pub tail: usize,
    /// Speech bits sent uncoded after the convolutional section.
    pub class2: usize,
}

pub const LAYOUT: Layout = Layout {
    class1a: 50,
    parity: 3,
    class1b: 132,
    tail: 4,
    class2: 78,
};

impl Layout {
    /// Bits entering the convolutional encoder.
    pub const fn protected(&self) -> usize {
        self.class1a + self.parity + self.class1b + self.tail
    }

    pub const fn coded(&self) -> usize {
        2 * self.protected() + self.class2
    }
}

const _: () = assert!(LAYOUT.coded() == CODED_BITS);
const _: () = assert!(LAYOUT.class1a + LAYOUT.class1b + LAYOUT.class2 == SPEECH_BITS);

/// Remainder of `bits · D³` modulo `D³ + D + 1`, highest degree first.
pub fn crc3(bits: &[u8]) -> [u8; 3] {
    let mut r = 0u8;
    for &b in bits {
        let top = ((r >> 2) & 1) ^ b;
        r = (r << 1) & 0b111;
        if top == 1 {
            r ^= 0b011;
        }
    }
    [(r >> 2) & 1, (r >> 1) & 1, r & 1]
}

/// Rate-1/2 encoder with G0 = 1 + D³ + D⁴ and G1 = 1 + D + D³ + D⁴; the
/// two outputs of each input bit are adjacent.
pub fn conv_encode(bits: &[u8]) -> Vec<u8> {
    let mut reg = 0u8; // bit k holds u[t-1-k]
    let mut out = Vec::with_capacity(2 * bits.len());
    for &u in bits {
        let (o0, o1) = outputs(reg, u);
        out.extend([o0, o1]);
        reg = ((reg << 1) | u) & 0xF;
    }
    out
}

fn outputs(reg: u8, u: u8) -> (u8, u8) {
    let d = |k: u8| (reg >> (k - 1)) & 1;
    (u ^ d(3) ^ d(4), u ^ d(1) ^ d(3) ^ d(4))
}

/// Hard-decision Viterbi decoding over the 16-state trellis, ending in the
/// zero state. Returns the input bits and the Hamming distance of the
/// chosen path to the received sequence.
pub fn viterbi(coded: &[u8]) -> (Vec<u8>, u32) {
    let steps = coded.len() / 2;
    let inf = u32::MAX / 2;
    let mut metric = [inf; 16];
    metric[0] = 0;
    let mut back: Vec<[(u8, u8); 16]> = Vec::with_capacity(steps);
    for t in 0..steps {
        let (r0, r1) = (coded[2 * t], coded[2 * t + 1]);
        let mut next = [inf; 16];
        let mut from = [(0u8, 0u8); 16];
        for reg in 0..16u8 {
            if metric[reg as usize] >= inf {
                continue;
            }
            for u in 0..2u8 {
                let (o0, o1) = outputs(reg, u);
                let m = metric[reg as usize] + (o0 ^ r0) as u32 + (o1 ^ r1) as u32;
                let n = (((reg << 1) | u) & 0xF) as usize;
                if m < next[n] {
                    next[n] = m;
                    from[n] = (reg, u);
                }
            }
        }
        metric = next;
        back.push(from);
    }
    let mut s = 0u8;
    let mut bits = vec![0u8; steps];
    for t in (0..steps).rev() {
        let (prev, u) = back[t][s as usize];
        bits[t] = u;
        s = prev;
    }
    (bits, metric[0])
}

/// Speech block plus the number of channel bit errors corrected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub block: Vec<u8>,
    pub errors: u32,
}

pub fn channel_encode(block: &[u8]) -> Result<Vec<u8>, GsmError> {
    check_len(block, SPEECH_BITS)?;
    let l = LAYOUT;
    let (c1a, rest) = block.split_at(l.class1a);
    let (c1b, c2) = rest.split_at(l.class1b);
    let mut protected = Vec::with_capacity(l.protected());
    protected.extend_from_slice(c1a);
    protected.extend_from_slice(&crc3(c1a));
    protected.extend_from_slice(c1b);
    protected.extend(std::iter::repeat_n(0, l.tail));
    let mut frame = conv_encode(&protected);
    frame.extend_from_slice(c2);
    Ok(frame)
}

/// Corrects the convolutional section and checks parity. The uncoded
/// class-2 bits are passed through as received.
pub fn channel_decode(frame: &[u8]) -> Result<Decoded, GsmError> {
    check_len(frame, CODED_BITS)?;
    let l = LAYOUT;
    let (conv, c2) = frame.split_at(2 * l.protected());
    let (bits, errors) = viterbi(conv);
    let c1a = &bits[..l.class1a];
    let parity = &bits[l.class1a..l.class1a + l.parity];
    if crc3(c1a) != parity {
        return Err(GsmError::UncorrectableFrame);
    }
    let start_1b = l.class1a + l.parity;
    let mut block = Vec::with_capacity(SPEECH_BITS);
    block.extend_from_slice(c1a);
    block.extend_from_slice(&bits[start_1b..start_1b + l.class1b]);
    block.extend_from_slice(c2);
    Ok(Decoded { block, errors })
}
