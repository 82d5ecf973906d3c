//! Signed radix-2 encoding of real variables over qubit groups.
//!
//! Each variable gets two groups of bits, one per sign, over a shared
//! exponent range: `v = Σ_l 2^l q⁺_l − Σ_l 2^l q⁻_l` for
//! `l ∈ [low_exp, high_exp]`. Bits are laid out variable by variable, plus
//! group first, ascending exponent within each group.

use thiserror::Error;

use crate::linalg::Vector;

/// Integer-valued magnitudes must stay exactly representable in f64.
const MAX_SPAN: usize = 53;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("encoding needs at least one variable")]
    ZeroVars,
    #[error("invalid exponent range [{low}, {high}]")]
    InvalidRange { low: i32, high: i32 },
    #[error("bit {index} is {value}, expected 0 or 1")]
    InvalidBit { index: usize, value: u8 },
    #[error("assignment has {got} bits, encoding expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value {value} of variable {var_index} is not representable")]
    NotRepresentable { var_index: usize, value: f64 },
}

/// Uniform per-variable exponent range for the radix-2 representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadixEncoding {
    num_vars: usize,
    low_exp: i32,
    high_exp: i32,
}

impl RadixEncoding {
    pub fn new(num_vars: usize, low_exp: i32, high_exp: i32) -> Result<Self, EncodingError> {
        if num_vars == 0 {
            return Err(EncodingError::ZeroVars);
        }
        if low_exp > high_exp
            || low_exp < -512
            || high_exp > 512
            || (high_exp - low_exp) as usize + 1 > MAX_SPAN
        {
            return Err(EncodingError::InvalidRange {
                low: low_exp,
                high: high_exp,
            });
        }
        Ok(Self {
            num_vars,
            low_exp,
            high_exp,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn low_exp(&self) -> i32 {
        self.low_exp
    }

    pub fn high_exp(&self) -> i32 {
        self.high_exp
    }

    /// Count of exponents per sign group.
    pub fn span(&self) -> usize {
        (self.high_exp - self.low_exp) as usize + 1
    }

    pub fn qubits_per_var(&self) -> usize {
        2 * self.span()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_vars * self.qubits_per_var()
    }

    pub fn var_of(&self, qubit: usize) -> usize {
        qubit / self.qubits_per_var()
    }

    /// Signed weight of each position within one variable's group:
    /// `+2^low .. +2^high` then `-2^low .. -2^high`.
    pub fn weights_per_var(&self) -> Vec<f64> {
        let span = self.span();
        let mut w = Vec::with_capacity(2 * span);
        for l in 0..span {
            w.push(2f64.powi(self.low_exp + l as i32));
        }
        for l in 0..span {
            w.push(-(2f64.powi(self.low_exp + l as i32)));
        }
        w
    }

    /// Real value of each variable under the assignment.
    pub fn decode(&self, q: &QubitAssignment) -> Result<Vector, EncodingError> {
        if q.len() != self.num_qubits() {
            return Err(EncodingError::LengthMismatch {
                expected: self.num_qubits(),
                got: q.len(),
            });
        }
        let w = self.weights_per_var();
        let per = self.qubits_per_var();
        let values = (0..self.num_vars)
            .map(|v| {
                (0..per)
                    .map(|p| w[p] * f64::from(q.bits()[v * per + p]))
                    .sum()
            })
            .collect();
        Vector::new(values).map_err(|_| EncodingError::LengthMismatch {
            expected: self.num_qubits(),
            got: q.len(),
        })
    }

    /// The unique one-sided assignment representing `v`: per variable, only
    /// the group matching the sign of `v_i` carries the binary expansion of
    /// `|v_i| / 2^low_exp`.
    pub fn canonical_encode(&self, v: &Vector) -> Result<QubitAssignment, EncodingError> {
        if v.dim() != self.num_vars {
            return Err(EncodingError::LengthMismatch {
                expected: self.num_vars,
                got: v.dim(),
            });
        }
        let span = self.span();
        let per = self.qubits_per_var();
        let max_mag = (1u64 << span) - 1;
        let mut bits = vec![0u8; self.num_qubits()];
        for i in 0..self.num_vars {
            let value = v[i];
            if value == 0.0 {
                continue;
            }
            let scaled = value.abs() * 2f64.powi(-self.low_exp);
            let rounded = scaled.round();
            if (scaled - rounded).abs() > 1e-9 || rounded > max_mag as f64 {
                return Err(EncodingError::NotRepresentable {
                    var_index: i,
                    value,
                });
            }
            let mag = rounded as u64;
            let group = if value > 0.0 { 0 } else { span };
            for l in 0..span {
                bits[i * per + group + l] = ((mag >> l) & 1) as u8;
            }
        }
        QubitAssignment::new(bits)
    }

    /// Every per-variable bit pattern `(p, n)` with `decode = value`,
    /// including two-sided ones, in lexicographic bit order.
    pub fn enumerate_representations(&self, value: f64) -> Vec<Vec<u8>> {
        let span = self.span();
        let max_mag = (1u64 << span) - 1;
        let scaled = value * 2f64.powi(-self.low_exp);
        let mut patterns = Vec::new();
        for plus in 0..=max_mag {
            let minus = plus as f64 - scaled;
            let rounded = minus.round();
            if (minus - rounded).abs() > 1e-9 || rounded < 0.0 || rounded > max_mag as f64 {
                continue;
            }
            let minus = rounded as u64;
            let mut bits = Vec::with_capacity(2 * span);
            for l in 0..span {
                bits.push(((plus >> l) & 1) as u8);
            }
            for l in 0..span {
                bits.push(((minus >> l) & 1) as u8);
            }
            patterns.push(bits);
        }
        patterns.sort();
        patterns
    }
}

/// A full assignment of the encoding's qubits, each bit 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitAssignment {
    bits: Vec<u8>,
}

impl QubitAssignment {
    pub fn new(bits: Vec<u8>) -> Result<Self, EncodingError> {
        for (index, &value) in bits.iter().enumerate() {
            if value > 1 {
                return Err(EncodingError::InvalidBit { index, value });
            }
        }
        Ok(Self { bits })
    }

    /// Bit `i` of the assignment is bit `i` of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        assert!(n <= 64);
        Self {
            bits: (0..n).map(|i| ((mask >> i) & 1) as u8).collect(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl std::ops::Index<usize> for QubitAssignment {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.bits[i]
    }
}

impl std::fmt::Display for QubitAssignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    fn encoding_and_representable() -> impl Strategy<Value = (RadixEncoding, Vec<f64>)> {
        (1usize..=3, -2i32..=1, 0i32..=3).prop_flat_map(|(nv, low, extra)| {
            let high = low + extra;
            let enc = RadixEncoding::new(nv, low, high).unwrap();
            let span = enc.span() as u32;
            let values = proptest::collection::vec(
                (0u64..(1 << span), proptest::bool::ANY),
                nv,
            )
            .prop_map(move |entries| {
                entries
                    .iter()
                    .map(|&(mag, neg)| {
                        let v = mag as f64 * 2f64.powi(low);
                        if neg {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect::<Vec<f64>>()
            });
            (Just(enc), values)
        })
    }

    proptest! {
        #[test]
        fn decode_inverts_canonical_encode((enc, values) in encoding_and_representable()) {
            let v = Vector::new(values.clone()).unwrap();
            let q = enc.canonical_encode(&v).unwrap();
            let back = enc.decode(&q).unwrap();
            for i in 0..values.len() {
                prop_assert!((back[i] - values[i]).abs() < 1e-12);
            }
        }
    }
}
