use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    Bpsk,
    Qpsk,
    Qam16,
}

/// Unit-energy constellation. The bit label of a symbol is its index.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    bits_per_symbol: u32,
}

/// Gray levels for two bits: 00 → −3, 01 → −1, 11 → +1, 10 → +3.
fn gray_pam4(bits: usize) -> f64 {
    match bits & 3 {
        0b00 => -3.0,
        0b01 => -1.0,
        0b11 => 1.0,
        _ => 3.0,
    }
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        let (points, bits_per_symbol) = match kind {
            ConstellationKind::Bpsk => (vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], 1),
            ConstellationKind::Qpsk => {
                let pts = (0..4)
                    .map(|i| {
                        let re = if i & 2 == 0 { 1.0 } else { -1.0 };
                        let im = if i & 1 == 0 { 1.0 } else { -1.0 };
                        Complex64::new(re, im) * FRAC_1_SQRT_2
                    })
                    .collect();
                (pts, 2)
            }
            ConstellationKind::Qam16 => {
                let norm = 1.0 / 10f64.sqrt();
                let pts = (0..16)
                    .map(|i| Complex64::new(gray_pam4(i >> 2), gray_pam4(i)) * norm)
                    .collect();
                (pts, 4)
            }
        };
        Self {
            kind,
            points,
            bits_per_symbol,
        }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn bit_errors(&self, a: usize, b: usize) -> u32 {
        ((a ^ b) as u32).count_ones()
    }
}
