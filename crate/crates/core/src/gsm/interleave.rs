use super::{check_len, GsmError, BURSTS, BURST_BITS, CODED_BITS};

/// Bit `k` goes to burst `k % 8`, position `k / 8`; bursts are laid out one
/// after another.
pub fn interleave(frame: &[u8]) -> Result<Vec<Vec<u8>>, GsmError> {
    check_len(frame, CODED_BITS)?;
    let mut bursts = vec![vec![0u8; BURST_BITS]; BURSTS];
    for (k, &b) in frame.iter().enumerate() {
        bursts[k % BURSTS][k / BURSTS] = b;
    }
    Ok(bursts)
}

pub fn deinterleave(bursts: &[Vec<u8>]) -> Result<Vec<u8>, GsmError> {
    if bursts.len() != BURSTS || bursts.iter().any(|b| b.len() != BURST_BITS) {
        return Err(GsmError::WrongBurstCount(bursts.len()));
    }
    Ok((0..CODED_BITS).map(|k| bursts[k % BURSTS][k / BURSTS]).collect())
}
