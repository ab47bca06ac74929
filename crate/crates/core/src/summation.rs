//! Error-free running summation.
//!
//! Both accumulators represent the running total exactly and round once on
//! read, so the result does not depend on the order of additions and two sums
//! over adjacent spans merge into exactly the single-pass result.
//!
//! `ExactSum` keeps non-overlapping partials (Shewchuk's expansion arithmetic,
//! as in Python's `math.fsum`); it is compact but its cost grows with the
//! number of partials. `FixedSum` is a fixed-point superaccumulator spanning
//! the whole `f64` range with constant cost per addition, meant for per-step
//! use in long integrations.

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactSum {
    partials: Vec<f64>,
    // Sum of non-finite inputs; once set the result is this value.
    special: Option<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        if !value.is_finite() {
            self.special = Some(self.special.unwrap_or(0.0) + value);
            return;
        }
        let big = f64::MAX / 4.0;
        if value.abs() > big || self.partials.last().is_some_and(|p| p.abs() > big) {
            // Near overflow: the exact total may not be representable.
            let naive: f64 = self.partials.iter().sum::<f64>() + value;
            if !naive.is_finite() {
                self.special = Some(self.special.unwrap_or(0.0) + naive);
                self.partials.clear();
                return;
            }
        }
        let mut x = value;
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// Adds every partial of `other`; the result is the exact sum of both.
    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
        if let Some(s) = other.special {
            self.special = Some(self.special.unwrap_or(0.0) + s);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty() && self.special.is_none()
    }

    /// Correctly rounded value of the exact sum.
    pub fn value(&self) -> f64 {
        if let Some(s) = self.special {
            return s;
        }
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Round-half-even correction when the remaining partials push past a tie.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl Extend<f64> for ExactSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::new();
        s.extend(iter);
        s
    }
}

/// Correctly rounded sum of a slice.
pub fn exact_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<ExactSum>().value()
}

const DIGIT_BITS: u32 = 32;
const DIGIT_MASK: u128 = (1 << DIGIT_BITS) - 1;
/// Bit 0 of digit 0 has weight 2^-1074; 70 digits reach past 2^1100.
const N_DIGITS: usize = 70;
const EXP_OFFSET: i64 = 1074;
/// Digits absorb up to 2^31 unnormalised additions of 32-bit chunks.
const NORMALIZE_EVERY: u32 = 1 << 30;

/// Exact sum held as signed base-2^32 digits.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSum {
    digits: Box<[i64; N_DIGITS]>,
    pending: u32,
    special: Option<f64>,
}

impl Default for FixedSum {
    fn default() -> Self {
        Self {
            digits: Box::new([0; N_DIGITS]),
            pending: 0,
            special: None,
        }
    }
}

impl FixedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let bits = value.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        if biased == 0x7ff {
            self.special = Some(self.special.unwrap_or(0.0) + value);
            return;
        }
        let frac = bits & ((1 << 52) - 1);
        if biased == 0 && frac == 0 {
            return;
        }
        let (mantissa, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1 << 52), biased - 1075)
        };
        let pos = (exp + EXP_OFFSET) as usize;
        let (idx, shift) = (pos / DIGIT_BITS as usize, pos % DIGIT_BITS as usize);
        let wide = (mantissa as u128) << shift;
        let chunks = [
            (wide & DIGIT_MASK) as i64,
            ((wide >> DIGIT_BITS) & DIGIT_MASK) as i64,
            (wide >> (2 * DIGIT_BITS)) as i64,
        ];
        let d = &mut self.digits[idx..idx + 3];
        if bits >> 63 == 0 {
            for (slot, c) in d.iter_mut().zip(chunks) {
                *slot += c;
            }
        } else {
            for (slot, c) in d.iter_mut().zip(chunks) {
                *slot -= c;
            }
        }
        self.pending += 1;
        if self.pending >= NORMALIZE_EVERY {
            self.normalize();
        }
    }

    /// Propagates carries so every digit but the top one lies in `[0, 2^32)`.
    fn normalize(&mut self) {
        let mut carry = 0i64;
        for d in self.digits.iter_mut().take(N_DIGITS - 1) {
            let v = *d + carry;
            carry = v >> DIGIT_BITS;
            *d = v - (carry << DIGIT_BITS);
        }
        self.digits[N_DIGITS - 1] += carry;
        self.pending = 0;
    }

    pub fn merge(&mut self, other: &FixedSum) {
        self.normalize();
        let mut o = other.clone();
        o.normalize();
        for (a, b) in self.digits.iter_mut().zip(o.digits.iter()) {
            *a += b;
        }
        self.normalize();
        if let Some(s) = other.special {
            self.special = Some(self.special.unwrap_or(0.0) + s);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.special.is_none() && self.digits.iter().all(|&d| d == 0)
    }

    /// Correctly rounded value.
    pub fn value(&self) -> f64 {
        if let Some(s) = self.special {
            return s;
        }
        let mut n = self.clone();
        n.normalize();
        let negative = n.digits[N_DIGITS - 1] < 0;
        if negative {
            for d in n.digits.iter_mut() {
                *d = -*d;
            }
            n.normalize();
        }
        // Each digit times its weight is exact; ExactSum rounds the total once.
        let mut acc = ExactSum::new();
        for (i, &d) in n.digits.iter().enumerate().rev() {
            if d != 0 {
                acc.add(d as f64 * pow2(i as i64 * DIGIT_BITS as i64 - EXP_OFFSET));
            }
        }
        let v = acc.value();
        if negative {
            -v
        } else {
            v
        }
    }
}

/// `2^p` for `p ≥ -1074`; infinite above the `f64` range.
fn pow2(p: i64) -> f64 {
    if p > 1023 {
        f64::INFINITY
    } else if p >= -1022 {
        f64::from_bits(((p + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (p + 1074))
    }
}
