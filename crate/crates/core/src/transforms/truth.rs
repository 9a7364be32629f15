//! 256-bit truth tables over up to eight variables.

use std::ops::{BitAnd, BitOr, BitXor, Not};

pub(crate) const MAX_VARS: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub(crate) struct Tt(pub [u64; 4]);

const SMALL: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

impl Tt {
    pub const ZERO: Tt = Tt([0; 4]);
    pub const ONES: Tt = Tt([!0; 4]);

    pub fn var(v: usize) -> Tt {
        match v {
            0..=5 => Tt([SMALL[v]; 4]),
            6 => Tt([0, !0, 0, !0]),
            7 => Tt([0, 0, !0, !0]),
            _ => panic!("variable {v} out of range"),
        }
    }

    /// Cofactor with `v` fixed to `val`, still expressed over all variables.
    pub fn cofactor(self, v: usize, val: bool) -> Tt {
        let w = self.0;
        match v {
            0..=5 => {
                let s = 1u32 << v;
                let m = SMALL[v];
                Tt(w.map(|x| {
                    if val {
                        (x & m) | ((x & m) >> s)
                    } else {
                        (x & !m) | ((x & !m) << s)
                    }
                }))
            }
            6 => {
                if val {
                    Tt([w[1], w[1], w[3], w[3]])
                } else {
                    Tt([w[0], w[0], w[2], w[2]])
                }
            }
            7 => {
                if val {
                    Tt([w[2], w[3], w[2], w[3]])
                } else {
                    Tt([w[0], w[1], w[0], w[1]])
                }
            }
            _ => panic!("variable {v} out of range"),
        }
    }

    pub fn depends_on(self, v: usize) -> bool {
        self.cofactor(v, false) != self.cofactor(v, true)
    }

    pub fn count_ones(self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
}

impl Not for Tt {
    type Output = Tt;
    fn not(self) -> Tt {
        Tt(self.0.map(|w| !w))
    }
}

impl BitAnd for Tt {
    type Output = Tt;
    fn bitand(self, o: Tt) -> Tt {
        Tt([0, 1, 2, 3].map(|i| self.0[i] & o.0[i]))
    }
}

impl BitOr for Tt {
    type Output = Tt;
    fn bitor(self, o: Tt) -> Tt {
        Tt([0, 1, 2, 3].map(|i| self.0[i] | o.0[i]))
    }
}

impl BitXor for Tt {
    type Output = Tt;
    fn bitxor(self, o: Tt) -> Tt {
        Tt([0, 1, 2, 3].map(|i| self.0[i] ^ o.0[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bit `k` of the table is the value at assignment `k`.
    fn eval(t: Tt, k: usize) -> bool {
        t.0[k / 64] >> (k % 64) & 1 == 1
    }

    #[test]
    fn variables_match_assignment_bits() {
        for v in 0..MAX_VARS {
            let t = Tt::var(v);
            for k in 0..256 {
                assert_eq!(eval(t, k), (k >> v) & 1 == 1, "var {v} row {k}");
            }
        }
    }

    #[test]
    fn cofactors_by_enumeration() {
        let f = (Tt::var(0) & Tt::var(6)) ^ (Tt::var(7) | !Tt::var(3));
        for v in 0..MAX_VARS {
            for val in [false, true] {
                let c = f.cofactor(v, val);
                for k in 0..256 {
                    let fixed = if val { k | (1 << v) } else { k & !(1 << v) };
                    assert_eq!(eval(c, k), eval(f, fixed));
                }
            }
        }
        assert!(f.depends_on(0) && f.depends_on(6) && f.depends_on(7) && f.depends_on(3));
        assert!(!f.depends_on(1) && !f.depends_on(5));
    }
}
