//! Two-qubit encoding of the four conventional ply states.

/// Ply index → 2-bit code: 0 ↔ 00, 1 ↔ 01, 2 ↔ 11, 3 ↔ 10.
///
/// Bit 0 of a code is qubit `2n` of site `n`, bit 1 is qubit `2n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlyEncoding;

const CODES: [usize; 4] = [0b00, 0b01, 0b11, 0b10];
const PLIES: [usize; 4] = [0, 1, 3, 2];

impl PlyEncoding {
    pub const SITE_DIM: usize = 4;
    pub const QUBITS_PER_SITE: usize = 2;

    pub fn encode(ply: usize) -> usize {
        CODES[ply]
    }

    pub fn decode(code: usize) -> usize {
        PLIES[code]
    }

    /// Amplitude index of a stack, site `n` occupying bits `2n` and `2n + 1`.
    pub fn index_of(stack: &[usize]) -> usize {
        stack.iter().rev().fold(0, |acc, &s| (acc << 2) | Self::encode(s))
    }

    pub fn stack_of(index: usize, plies: usize) -> Vec<usize> {
        (0..plies).map(|n| Self::decode((index >> (2 * n)) & 3)).collect()
    }

    /// 2-bit string of a ply state, most significant bit first.
    pub fn bits(ply: usize) -> String {
        format!("{:02b}", Self::encode(ply))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_gray_property() {
        for s in 0..4 {
            assert_eq!(PlyEncoding::decode(PlyEncoding::encode(s)), s);
        }
        for s in 0..3 {
            let diff = PlyEncoding::encode(s) ^ PlyEncoding::encode(s + 1);
            assert_eq!(diff.count_ones(), 1);
        }
        let strings: Vec<_> = (0..4).map(PlyEncoding::bits).collect();
        assert_eq!(strings, ["00", "01", "11", "10"]);
    }

    #[test]
    fn stack_index_bijection() {
        for idx in 0..256 {
            let st = PlyEncoding::stack_of(idx, 4);
            assert_eq!(PlyEncoding::index_of(&st), idx);
        }
    }
}
