use std::f64::consts::{LN_2, PI};

use super::GsmError;

/// Complex baseband sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Iq {
    pub i: f64,
    pub q: f64,
}

impl Iq {
    pub fn norm(&self) -> f64 {
        self.i.hypot(self.q)
    }
}

/// Modulator settings. `guard` zero bits are added before and after the
/// payload so that the Gaussian pulses of the outer payload bits are
/// complete; the demodulator drops them again.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gmsk {
    pub bt: f64,
    pub sps: usize,
    /// Pulse span in bit periods.
    pub span: usize,
    pub guard: usize,
}

impl Default for Gmsk {
    fn default() -> Self {
        Gmsk {
            bt: 0.3,
            sps: 8,
            span: 4,
            guard: 2,
        }
    }
}

fn tail_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

impl Gmsk {
    pub fn samples_for(&self, bits: usize) -> usize {
        (bits + 2 * self.guard) * self.sps
    }

    /// Frequency pulse sampled at the midpoints of `span * sps` sub-intervals,
    /// scaled so it integrates to 1/2 (a π/2 phase turn per bit).
    fn pulse(&self) -> Vec<f64> {
        let alpha = 2.0 * PI * self.bt / LN_2.sqrt();
        let n = self.span * self.sps;
        let raw: Vec<f64> = (0..n)
            .map(|m| {
                let t = (m as f64 + 0.5) / self.sps as f64 - self.span as f64 / 2.0;
                tail_q(alpha * (t - 0.5)) - tail_q(alpha * (t + 0.5))
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|g| 0.5 * g / total).collect()
    }

    fn check(&self) -> Result<(), GsmError> {
        if self.sps < 4 {
            Err(GsmError::BadOversampling(self.sps))
        } else {
            Ok(())
        }
    }

    /// Phase at the start of every sample period.
    fn phases(&self, bits: &[u8]) -> Vec<f64> {
        let g = self.pulse();
        let sps = self.sps;
        let nb = bits.len() + 2 * self.guard;
        let total = nb * sps;
        // pulse of bit j starts half a span before the bit centre
        let lead = (self.span * sps).saturating_sub(sps) / 2;
        let mut dphi = vec![0.0; total + 2 * lead + g.len()];
        for j in 0..nb {
            let a = if j >= self.guard && j < self.guard + bits.len() && bits[j - self.guard] == 1 {
                1.0
            } else {
                -1.0
            };
            let start = j * sps;
            for (m, gm) in g.iter().enumerate() {
                dphi[start + m] += PI * a * gm;
            }
        }
        // index `n + lead` of `dphi` covers output sample `n`
        let mut phase = Vec::with_capacity(total + 1);
        let mut acc: f64 = dphi[..lead].iter().sum();
        for n in 0..=total {
            phase.push(acc);
            acc += dphi[n + lead];
        }
        phase
    }

    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Iq>, GsmError> {
        self.check()?;
        if bits.is_empty() {
            return Err(GsmError::Empty);
        }
        let ph = self.phases(bits);
        Ok(ph[..ph.len() - 1]
            .iter()
            .map(|p| Iq { i: p.cos(), q: p.sin() })
            .collect())
    }

    /// Differential detection: the sign of the phase turn across each bit
    /// period of the payload.
    pub fn demodulate(&self, samples: &[Iq]) -> Result<Vec<u8>, GsmError> {
        self.check()?;
        let sps = self.sps;
        let nb = samples.len() / sps;
        if nb <= 2 * self.guard || !samples.len().is_multiple_of(sps) {
            return Err(GsmError::Empty);
        }
        Ok((self.guard..nb - self.guard)
            .map(|k| {
                let a = samples[k * sps];
                let b = samples[(k + 1) * sps];
                // imaginary part of b · conj(a)
                let cross = b.q * a.i - b.i * a.q;
                (cross > 0.0) as u8
            })
            .collect())
    }
}

pub fn gmsk_modulate(bits: &[u8]) -> Result<Vec<Iq>, GsmError> {
    Gmsk::default().modulate(bits)
}

pub fn gmsk_demodulate(samples: &[Iq]) -> Result<Vec<u8>, GsmError> {
    Gmsk::default().demodulate(samples)
}

pub fn iq_to_bytes(samples: &[Iq]) -> Vec<u8> {
    samples
        .iter()
        .flat_map(|s| {
            let mut b = [0u8; 8];
            b[..4].copy_from_slice(&(s.i as f32).to_le_bytes());
            b[4..].copy_from_slice(&(s.q as f32).to_le_bytes());
            b
        })
        .collect()
}

pub fn iq_from_bytes(bytes: &[u8]) -> Vec<Iq> {
    let f = |b: &[u8]| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64;
    bytes
        .chunks_exact(8)
        .map(|c| Iq {
            i: f(&c[..4]),
            q: f(&c[4..]),
        })
        .collect()
}
