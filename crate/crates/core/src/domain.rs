//! Computational domains for reconstruction values: signed integers for the
//! decoder, reals for checking optimality properties.

use std::cmp::Ordering;
use std::fmt::Debug;

pub trait Domain: Copy + Debug + PartialEq + PartialOrd {
    const ZERO: Self;

    fn add(self, other: Self) -> Self;

    fn signum(self) -> i32;

    fn abs(self) -> Self;

    fn neg(self) -> Self;

    /// Whether two accumulated values denote the same alphabet element.
    fn same(self, other: Self) -> bool;

    fn to_f64(self) -> f64;

    fn total_cmp(&self, other: &Self) -> Ordering;

    /// `a ⋄ b = sgn(a) sgn(b) (|a| + |b|)`.
    fn diamond(self, other: Self) -> Self {
        let mag = self.abs().add(other.abs());
        match self.signum() * other.signum() {
            1 => mag,
            -1 => mag.neg(),
            _ => Self::ZERO,
        }
    }
}

impl Domain for i32 {
    const ZERO: Self = 0;

    fn add(self, other: Self) -> Self {
        self + other
    }

    fn signum(self) -> i32 {
        i32::signum(self)
    }

    fn abs(self) -> Self {
        i32::abs(self)
    }

    fn neg(self) -> Self {
        -self
    }

    fn same(self, other: Self) -> bool {
        self == other
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Domain for f64 {
    const ZERO: Self = 0.0;

    fn add(self, other: Self) -> Self {
        self + other
    }

    fn signum(self) -> i32 {
        if self > 0.0 {
            1
        } else if self < 0.0 {
            -1
        } else {
            0
        }
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn neg(self) -> Self {
        -self
    }

    fn same(self, other: Self) -> bool {
        (self - other).abs() <= 1e-12 * self.abs().max(other.abs()).max(1.0)
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

pub fn diamond(a: i32, b: i32) -> i32 {
    Domain::diamond(a, b)
}

/// The check-node order: `a ≻ b` iff `sgn(a) > sgn(b)`, or the signs agree
/// and `a < b`. Returns `Less` when `a ≻ b`.
pub fn succ_cmp<T: Domain>(a: &T, b: &T) -> Ordering {
    b.signum().cmp(&a.signum()).then_with(|| a.total_cmp(b))
}

/// `a ≻ b`.
pub fn succ<T: Domain>(a: T, b: T) -> bool {
    succ_cmp(&a, &b) == Ordering::Less
}

/// Sorts `(value, p0, p1)` entries by `order` and sums the masses of entries
/// denoting the same value.
pub(crate) fn sort_merge<T: Domain>(
    mut entries: Vec<(T, f64, f64)>,
    order: impl Fn(&T, &T) -> Ordering,
) -> Vec<(T, f64, f64)> {
    entries.sort_by(|a, b| order(&a.0, &b.0));
    let mut out: Vec<(T, f64, f64)> = Vec::with_capacity(entries.len());
    for (v, a, b) in entries {
        match out.last_mut() {
            Some(last) if last.0.same(v) && last.0.signum() == v.signum() => {
                last.1 += a;
                last.2 += b;
            }
            _ => out.push((v, a, b)),
        }
    }
    out
}
