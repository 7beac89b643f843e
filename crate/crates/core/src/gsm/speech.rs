use super::{check_len, push_bits, read_bits, GsmError, FRAME_SAMPLES, SPEECH_BITS};

const SUBFRAMES: usize = 4;
const PAIRS: usize = FRAME_SAMPLES / SUBFRAMES / 2;
const SHIFT_BITS: u32 = 5;
const LEVEL_BITS: u32 = 3;

/// Framing codec. Each 40-sample subframe becomes a 5-bit shift `e` and 20
/// three-bit levels, one per sample pair: `q = ((a + b) >> 1) >> e`, with the
/// smallest `e` that keeps every `q` in `-4..=3`. Decoding repeats `q << e`
/// for both samples of the pair.
pub fn speech_encode(pcm: &[i16]) -> Result<Vec<u8>, GsmError> {
    check_len(pcm, FRAME_SAMPLES)?;
    let mut out = Vec::with_capacity(SPEECH_BITS);
    for sub in pcm.chunks(FRAME_SAMPLES / SUBFRAMES) {
        let means: Vec<i32> = sub.chunks(2).map(|p| (p[0] as i32 + p[1] as i32) >> 1).collect();
        let e = (0..16)
            .find(|e| means.iter().all(|m| (-4..=3).contains(&(m >> e))))
            .unwrap();
        push_bits(&mut out, e, SHIFT_BITS);
        for m in means {
            push_bits(&mut out, ((m >> e) & 0b111) as u32, LEVEL_BITS);
        }
    }
    Ok(out)
}

pub fn speech_decode(bits: &[u8]) -> Result<Vec<i16>, GsmError> {
    check_len(bits, SPEECH_BITS)?;
    let per_sub = SHIFT_BITS as usize + PAIRS * LEVEL_BITS as usize;
    let mut pcm = Vec::with_capacity(FRAME_SAMPLES);
    for sub in bits.chunks(per_sub) {
        let e = read_bits(&sub[..SHIFT_BITS as usize]).min(15);
        for lv in sub[SHIFT_BITS as usize..].chunks(LEVEL_BITS as usize) {
            let raw = read_bits(lv) as i32;
            let q = if raw >= 4 { raw - 8 } else { raw };
            let s = (q << e).clamp(i16::MIN as i32, i16::MAX as i32) as i16;
            pcm.extend([s, s]);
        }
    }
    Ok(pcm)
}
