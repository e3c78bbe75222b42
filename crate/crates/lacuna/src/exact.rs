//! Exactly rounded f64 summation.
//!
//! `ExactSum` accumulates addends into a wide fixed-point register (a
//! Kulisch-style accumulator) covering the full double exponent range, so
//! the running sum is exact in integer arithmetic and `value()` rounds
//! once, to nearest with ties to even. Consequences relied on elsewhere:
//!
//! - the result is independent of addend order, so parallel chunking and
//!   permuted enumerations cannot change a single bit;
//! - negating every addend negates the result exactly;
//! - a multiset whose members cancel pairwise sums to exactly +0.0.

/// Bits per limb. Limb `q` holds bit positions `[32q, 32q+32)` counted in
/// units of 2^-1074 (the smallest positive double).
const LIMB_BITS: i64 = 32;
/// Covers magnitudes up to the largest double plus carry headroom.
const LIMBS: usize = 68;
/// Adds between carry normalizations; keeps limbs far from i64 overflow.
const NORMALIZE_EVERY: u32 = 1 << 30;

#[derive(Clone)]
pub struct ExactSum {
    limbs: [i64; LIMBS],
    pending: u32,
}

impl Default for ExactSum {
    fn default() -> Self {
        ExactSum {
            limbs: [0; LIMBS],
            pending: 0,
        }
    }
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum::default()
    }

    /// Adds one finite double, exactly.
    pub fn add(&mut self, x: f64) {
        assert!(x.is_finite(), "ExactSum::add({x}) on non-finite input");
        if x == 0.0 {
            return;
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let e_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        // value = mant * 2^(pos - 1074)
        let (mant, pos) = if e_field == 0 {
            (frac, 0)
        } else {
            (frac | (1u64 << 52), e_field - 1)
        };
        let q = (pos / LIMB_BITS) as usize;
        let r = pos % LIMB_BITS;
        let sh = (mant as u128) << r; // at most 84 bits
        let s = [
            (sh & 0xffff_ffff) as i64,
            ((sh >> 32) & 0xffff_ffff) as i64,
            (sh >> 64) as i64,
        ];
        for (i, &si) in s.iter().enumerate() {
            if neg {
                self.limbs[q + i] -= si;
            } else {
                self.limbs[q + i] += si;
            }
        }
        self.pending += 1;
        if self.pending >= NORMALIZE_EVERY {
            self.carry_normalize();
        }
    }

    fn carry_normalize(&mut self) {
        let mut carry: i64 = 0;
        for l in self.limbs.iter_mut() {
            let v = *l + carry;
            let rem = v.rem_euclid(1 << LIMB_BITS);
            carry = (v - rem) >> LIMB_BITS;
            *l = rem;
        }
        debug_assert!(carry == 0 || carry == -1);
        // a trailing -1 means the total is negative; fold it into the top
        // limb so the representation stays sign-magnitude-free
        *self.limbs.last_mut().unwrap() += carry << LIMB_BITS;
        self.pending = 0;
    }

    /// Magnitude limbs (all in [0, 2^32)) and the overall sign.
    fn magnitude(&self) -> ([u32; LIMBS], bool) {
        let mut work = self.limbs;
        for negate in [false, true] {
            if negate {
                work = self.limbs;
                for l in work.iter_mut() {
                    *l = -*l;
                }
            }
            let mut out = [0u32; LIMBS];
            let mut carry: i128 = 0;
            for (i, &l) in work.iter().enumerate() {
                let v = l as i128 + carry;
                let rem = v.rem_euclid(1 << LIMB_BITS);
                carry = (v - rem) >> LIMB_BITS;
                out[i] = rem as u32;
            }
            if carry == 0 {
                return (out, negate);
            }
            debug_assert_eq!(carry, -1, "accumulator magnitude out of range");
        }
        unreachable!("negation of a negative total is positive");
    }

    /// The exact total, rounded once to the nearest double (ties to even).
    pub fn value(&self) -> f64 {
        let (mag, neg) = self.magnitude();
        let sign_bit = if neg { 1u64 << 63 } else { 0 };
        let top = match (0..LIMBS).rev().find(|&i| mag[i] != 0) {
            Some(i) => i,
            None => return 0.0,
        };
        // highest set bit, in 2^-1074 units
        let p = top as i64 * LIMB_BITS + (31 - mag[top].leading_zeros() as i64);
        if p <= 52 {
            // the whole number fits below the first normal binade and maps
            // onto the encoding verbatim
            let n = (mag[1] as u64) << 32 | mag[0] as u64;
            return f64::from_bits(sign_bit | n);
        }
        let bit = |i: i64| -> u64 {
            if i < 0 {
                0
            } else {
                ((mag[(i / LIMB_BITS) as usize] >> (i % LIMB_BITS)) & 1) as u64
            }
        };
        let mut mant: u64 = 0;
        for i in (p - 52..=p).rev() {
            mant = mant << 1 | bit(i);
        }
        let round = bit(p - 53) == 1;
        let sticky = {
            let cut = p - 53; // strictly below this bit
            let mut any = false;
            let q = (cut / LIMB_BITS) as usize;
            let r = cut % LIMB_BITS;
            if r > 0 && mag[q] & ((1u32 << r) - 1) != 0 {
                any = true;
            }
            any || mag[..q].iter().any(|&l| l != 0)
        };
        let mut p = p;
        if round && (sticky || mant & 1 == 1) {
            mant += 1;
            if mant == 1 << 53 {
                mant >>= 1;
                p += 1;
            }
        }
        let e = p - 1074; // value = mant * 2^(e - 52), mant in [2^52, 2^53)
        if e > 1023 {
            return if neg { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        f64::from_bits(sign_bit | ((e + 1023) as u64) << 52 | (mant & ((1u64 << 52) - 1)))
    }
}

/// Convenience: exactly rounded sum of a slice.
pub fn exact_sum(values: &[f64]) -> f64 {
    let mut acc = ExactSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}
