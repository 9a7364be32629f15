use std::fmt;
use std::ops::Not;

/// An edge into the graph: a node index plus a complement flag.
///
/// Encoded as `2 * node + complemented`, the same packing AIGER uses, so
/// two literals are equal exactly when both fields are equal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Lit(u32);

impl Lit {
    /// Constant false (node 0, regular).
    pub const FALSE: Lit = Lit(0);
    /// Constant true (node 0, complemented).
    pub const TRUE: Lit = Lit(1);

    #[inline]
    pub const fn new(node: u32, complemented: bool) -> Lit {
        Lit((node << 1) | complemented as u32)
    }

    #[inline]
    pub const fn from_raw(raw: u32) -> Lit {
        Lit(raw)
    }

    #[inline]
    pub const fn raw(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn node(self) -> u32 {
        self.0 >> 1
    }

    #[inline]
    pub const fn index(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub const fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    /// The same node without the complement.
    #[inline]
    pub const fn regular(self) -> Lit {
        Lit(self.0 & !1)
    }

    /// Complement iff `c` is set.
    #[inline]
    pub const fn xor(self, c: bool) -> Lit {
        Lit(self.0 ^ c as u32)
    }

    #[inline]
    pub const fn is_const(self) -> bool {
        self.0 < 2
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!n{}", self.node())
        } else {
            write!(f, "n{}", self.node())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing() {
        let l = Lit::new(5, true);
        assert_eq!(l.raw(), 11);
        assert_eq!(l.node(), 5);
        assert!(l.is_complemented());
        assert_eq!(!l, Lit::new(5, false));
        assert_eq!(!!l, l);
        assert_eq!(l.regular(), Lit::new(5, false));
        assert_eq!(!Lit::FALSE, Lit::TRUE);
        assert!(Lit::TRUE.is_const());
        assert!(!Lit::new(1, false).is_const());
    }
}
