//! Polar encoding `x = u B_N F^{⊗n}` and the bit-reversal permutation.

use crate::error::{domain, Result};

/// Reverses the low `n` bits of `i`.
#[inline]
pub fn reverse_bits(i: usize, n: u32) -> usize {
    if n == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - n)
    }
}

/// `out[i] = input[rev_n(i)]`.
pub fn bit_reversal_permute<T: Clone>(input: &[T]) -> Result<Vec<T>> {
    if !input.len().is_power_of_two() {
        return domain(format!("length {} is not a power of two", input.len()));
    }
    let n = input.len().trailing_zeros();
    Ok((0..input.len()).map(|i| input[reverse_bits(i, n)].clone()).collect())
}

/// In-place `x = x F^{⊗n}` over GF(2); the slice length must be a power of two.
///
/// Uses the same pairing as the decoder: at every level the first half of
/// a block absorbs the second half by XOR.
pub fn polar_transform_in_place(x: &mut [u8]) {
    let len = x.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Encodes `u` (entries in `{0, 1}`), bit-reversing it first when requested.
pub fn encode(u: &[u8], with_bit_reversal: bool) -> Result<Vec<u8>> {
    if u.is_empty() || !u.len().is_power_of_two() {
        return domain(format!("message length {} is not a power of two", u.len()));
    }
    let mut x = if with_bit_reversal { bit_reversal_permute(u)? } else { u.to_vec() };
    polar_transform_in_place(&mut x);
    Ok(x)
}

/// Dense generator matrix `G` (row `i` is the codeword of the unit vector
/// `e_i`), intended as a test oracle for small `N`.
pub fn generator_matrix(n: u32, with_bit_reversal: bool) -> Vec<Vec<u8>> {
    let len = 1usize << n;
    // F^{⊗n}[r][c] = 1 iff the bits of c are a subset of the bits of r.
    let kron = |r: usize, c: usize| u8::from(c & !r == 0);
    (0..len)
        .map(|row| {
            let src = if with_bit_reversal { reverse_bits(row, n) } else { row };
            (0..len).map(|col| kron(src, col)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_reversal_examples() {
        assert_eq!(bit_reversal_permute(&['a', 'b', 'c', 'd']).unwrap(), vec!['a', 'c', 'b', 'd']);
        assert_eq!(bit_reversal_permute(&['a', 'b']).unwrap(), vec!['a', 'b']);
        let v: Vec<u32> = (0..8).collect();
        assert_eq!(bit_reversal_permute(&v).unwrap(), vec![0, 4, 2, 6, 1, 5, 3, 7]);
        assert!(bit_reversal_permute(&[1, 2, 3]).is_err());
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode(&[0, 1], true).unwrap(), vec![1, 1]);
        assert_eq!(encode(&[0, 0], true).unwrap(), vec![0, 0]);
        assert_eq!(encode(&[0, 0, 0, 1], true).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(encode(&[0, 0, 0, 1], false).unwrap(), vec![1, 1, 1, 1]);
        assert!(encode(&[0, 1, 1], true).is_err());
    }

    #[test]
    fn generator_is_lower_triangular_without_reversal() {
        let g = generator_matrix(3, false);
        for (r, row) in g.iter().enumerate() {
            assert_eq!(row[r], 1);
            assert!(row[r + 1..].iter().all(|&b| b == 0));
        }
        assert!(g[7].iter().all(|&b| b == 1));
    }
}
