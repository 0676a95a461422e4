//! Arithmetic over the binary extension fields GF(2^m) for m in {1, 4, 8, 16}.
//!
//! All coding operations run over one of these fields. Elements are stored as
//! `u16` bit patterns (coefficients of polynomials over GF(2)), so a value is
//! valid exactly when it is below the field size `q = 2^m`. Addition is XOR.
//! Multiplication uses log/antilog tables for m <= 8 and carry-less
//! multiplication followed by polynomial reduction for m = 16, where tables
//! would no longer fit comfortably in cache.
//!
//! GF(2) is included deliberately: the 1 - 1/q factors that drive the coding
//! theorems are at their worst case there, and several tests exercise exactly
//! that regime.

use rand::Rng;
use thiserror::Error;

/// A field element's bit pattern. Only values below the owning
/// [`FieldSpec::q`] are meaningful.
pub type FieldElement = u16;

/// Reduction polynomials, indexed by m. Degree-m terms included.
const POLY_M1: u32 = 0x3; // x + 1
const POLY_M4: u32 = 0x13; // x^4 + x + 1
const POLY_M8: u32 = 0x11D; // x^8 + x^4 + x^3 + x^2 + 1
const POLY_M16: u32 = 0x1100B; // x^16 + x^12 + x^3 + x + 1

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GaloisError {
    #[error("unsupported field exponent m={0}; supported: 1, 4, 8, 16")]
    UnsupportedExponent(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// One of the supported fields GF(2^m), with multiplication tables when m <= 8.
///
/// Construction is cheap enough to do once per experiment; the spec is
/// immutable afterwards and freely shareable across threads.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    m: u32,
    q: u32,
    primitive_poly: u32,
    /// exp[i] = alpha^i for i in [0, 2(q-1)); doubled so mul can index
    /// log[a] + log[b] without a modulo. Empty for m = 16.
    exp: Vec<u16>,
    /// log[a] = discrete log of a base alpha, for a in [1, q). log[0] unused.
    log: Vec<u16>,
}

impl FieldSpec {
    /// Builds the field GF(2^m). Only m in {1, 4, 8, 16} is supported.
    pub fn new(m: u32) -> Result<Self, GaloisError> {
        let primitive_poly = match m {
            1 => POLY_M1,
            4 => POLY_M4,
            8 => POLY_M8,
            16 => POLY_M16,
            other => return Err(GaloisError::UnsupportedExponent(other)),
        };
        let q = 1u32 << m;
        let mut spec = FieldSpec {
            m,
            q,
            primitive_poly,
            exp: Vec::new(),
            log: Vec::new(),
        };
        if m <= 8 {
            spec.build_tables();
        }
        Ok(spec)
    }

    fn build_tables(&mut self) {
        let order = (self.q - 1) as usize;
        let mut exp = vec![0u16; 2 * order.max(1)];
        let mut log = vec![0u16; self.q as usize];
        // alpha = x generates the multiplicative group for m > 1 with the
        // polynomials above; for GF(2) the group is trivial and alpha = 1.
        let alpha: u16 = if self.m == 1 { 1 } else { 2 };
        let mut acc: u16 = 1;
        for i in 0..order {
            exp[i] = acc;
            exp[i + order] = acc;
            log[acc as usize] = i as u16;
            acc = self.mul_no_tables(acc, alpha);
        }
        // The generator's cycle must close after q - 1 steps.
        debug_assert_eq!(acc, 1);
        self.exp = exp;
        self.log = log;
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field size q = 2^m.
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// Field addition: carry-less XOR. Its own inverse (characteristic 2).
    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a ^ b
    }

    /// Field multiplication modulo the fixed reduction polynomial.
    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.m <= 8 {
            if a == 0 || b == 0 {
                return 0;
            }
            let order = (self.q - 1) as usize;
            debug_assert!((a as u32) < self.q && (b as u32) < self.q);
            let idx = self.log[a as usize] as usize + self.log[b as usize] as usize;
            debug_assert!(idx < 2 * order);
            self.exp[idx]
        } else {
            self.mul_no_tables(a, b)
        }
    }

    /// Shift-and-xor carry-less multiply plus reduction; works for any m.
    fn mul_no_tables(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let wide = clmul16(a, b);
        reduce(wide, self.primitive_poly, self.m)
    }

    /// Multiplicative inverse. Errors on zero.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GaloisError> {
        if a == 0 {
            return Err(GaloisError::ZeroInverse);
        }
        if self.m <= 8 {
            let order = (self.q - 1) as usize;
            let idx = order - self.log[a as usize] as usize;
            Ok(self.exp[idx])
        } else {
            // a^(q-2) by square and multiply; only used for m = 16 where the
            // call sites (pivot normalization) are rare.
            Ok(self.pow(a, (self.q - 2) as u64))
        }
    }

    /// a raised to a non-negative integer power.
    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc: FieldElement = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Uniform draw over [0, q).
    #[inline]
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        rng.random_range(0..self.q) as FieldElement
    }

    /// In-place fused row operation y <- y + c * x, the hot kernel behind both
    /// encoding and Gaussian elimination. Slices must have equal length.
    pub fn axpy(&self, c: FieldElement, x: &[FieldElement], y: &mut [FieldElement]) {
        assert_eq!(x.len(), y.len());
        if c == 0 {
            return;
        }
        if c == 1 {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi ^= *xi;
            }
            return;
        }
        if self.m <= 8 {
            let lc = self.log[c as usize] as usize;
            for (yi, xi) in y.iter_mut().zip(x) {
                if *xi != 0 {
                    *yi ^= self.exp[lc + self.log[*xi as usize] as usize];
                }
            }
            return;
        }
        // m = 16: windowed multiplication. Four 16-entry tables cover the four
        // nibbles of x, so each element costs four lookups instead of a full
        // carry-less multiply.
        let tables = self.window_tables_16(c);
        for (yi, xi) in y.iter_mut().zip(x) {
            let v = *xi as usize;
            if v != 0 {
                *yi ^= tables[0][v & 0xF]
                    ^ tables[1][(v >> 4) & 0xF]
                    ^ tables[2][(v >> 8) & 0xF]
                    ^ tables[3][v >> 12];
            }
        }
    }

    /// Nibble product tables for m=16: tables[s][n] = c * (n << 4s). Built by
    /// repeated multiplication by x plus XOR combinations, so constructing
    /// all 60 nonzero entries costs about as much as two general products.
    fn window_tables_16(&self, c: FieldElement) -> [[u16; 16]; 4] {
        let poly = self.primitive_poly;
        let xtime = |v: u32| {
            let r = v << 1;
            if r & (1 << 16) != 0 { r ^ poly } else { r }
        };
        let mut tables = [[0u16; 16]; 4];
        let mut base = c as u32;
        for s in 0..4 {
            let t = &mut tables[s];
            t[1] = base as u16;
            t[2] = xtime(base) as u16;
            t[4] = xtime(t[2] as u32) as u16;
            t[8] = xtime(t[4] as u32) as u16;
            for n in [3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15] {
                let low = n & (n - 1);
                t[n] = t[n - low] ^ t[low];
            }
            base = xtime(xtime(xtime(xtime(base))));
        }
        tables
    }

    /// Scales a row in place by c.
    pub fn scale(&self, c: FieldElement, row: &mut [FieldElement]) {
        if c == 1 {
            return;
        }
        for v in row.iter_mut() {
            *v = self.mul(c, *v);
        }
    }
}

/// Carry-less product of two 16-bit polynomials over GF(2); at most 31 bits.
#[inline]
fn clmul16(a: u16, b: u16) -> u32 {
    let a = a as u32;
    let mut b = b as u32;
    let mut r = 0u32;
    while b != 0 {
        let i = b.trailing_zeros();
        r ^= a << i;
        b &= b - 1;
    }
    r
}

/// Reduces a (2m-2)-degree polynomial modulo `poly` (degree m).
#[inline]
fn reduce(mut x: u32, poly: u32, m: u32) -> u16 {
    let mut bit = 2 * m - 2;
    while bit >= m {
        if x & (1 << bit) != 0 {
            x ^= poly << (bit - m);
        }
        bit -= 1;
    }
    x as u16
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_fields() -> Vec<FieldSpec> {
        [1, 4, 8, 16].iter().map(|&m| FieldSpec::new(m).unwrap()).collect()
    }

    #[test]
    fn rejects_unsupported_exponent() {
        for m in [0, 2, 3, 5, 7, 9, 12, 32] {
            assert_eq!(FieldSpec::new(m).unwrap_err(), GaloisError::UnsupportedExponent(m));
        }
    }

    #[test]
    fn add_is_xor_and_self_inverse() {
        for f in all_fields() {
            let probe: Vec<u16> = match f.m() {
                1 => vec![0, 1],
                4 => (0..16).collect(),
                _ => vec![0, 1, 2, 0x53, (f.q() - 1) as u16],
            };
            for &a in &probe {
                for &b in &probe {
                    assert_eq!(f.add(a, b), a ^ b);
                    assert_eq!(f.add(f.add(a, b), b), a);
                    assert_eq!(f.add(a, a), 0);
                }
            }
        }
    }

    #[test]
    fn gf16_known_products() {
        let f = FieldSpec::new(4).unwrap();
        assert_eq!(f.add(0x9, 0x5), 0xC);
        assert_eq!(f.mul(0x8, 0x2), 0x3);
        assert_eq!(f.mul(0x9, 0xB), 0xC);
        assert_eq!(f.mul(0xF, 0xF), 0xA);
    }

    #[test]
    fn gf16_known_inverses() {
        // Full inverse table for x^4 + x + 1, cross-checked externally.
        let table: [(u16, u16); 15] = [
            (1, 1),
            (2, 9),
            (3, 0xE),
            (4, 0xD),
            (5, 0xB),
            (6, 7),
            (7, 6),
            (8, 0xF),
            (9, 2),
            (0xA, 0xC),
            (0xB, 5),
            (0xC, 0xA),
            (0xD, 4),
            (0xE, 3),
            (0xF, 8),
        ];
        let f = FieldSpec::new(4).unwrap();
        for (a, ia) in table {
            assert_eq!(f.inv(a).unwrap(), ia, "inv({a:#x})");
            assert_eq!(f.mul(a, ia), 1);
        }
    }

    #[test]
    fn gf256_known_products() {
        let f = FieldSpec::new(8).unwrap();
        assert_eq!(f.mul(0x80, 0x02), 0x1D);
        assert_eq!(f.mul(0x53, 0xCA), 0x8F);
        assert_eq!(f.mul(0xFF, 0xFF), 0xE2);
    }

    #[test]
    fn gf65536_known_products() {
        let f = FieldSpec::new(16).unwrap();
        assert_eq!(f.mul(0x8000, 0x0002), 0x100B);
        assert_eq!(f.mul(0x1234, 0x5678), 0x6324);
        assert_eq!(f.mul(0xFFFF, 0xFFFF), 0x733);
    }

    #[test]
    fn zero_has_no_inverse() {
        for f in all_fields() {
            assert_eq!(f.inv(0).unwrap_err(), GaloisError::ZeroInverse);
        }
    }

    fn check_axioms(f: &FieldSpec, triples: &[(u16, u16, u16)]) {
        for &(a, b, c) in triples {
            // commutativity
            assert_eq!(f.mul(a, b), f.mul(b, a));
            assert_eq!(f.add(a, b), f.add(b, a));
            // associativity
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            // distributivity
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            // identities
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.mul(a, 0), 0);
            assert_eq!(f.add(a, 0), a);
            // inverses
            if a != 0 {
                let ia = f.inv(a).unwrap();
                assert_eq!(f.mul(a, ia), 1);
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small_fields() {
        for m in [1u32, 4] {
            let f = FieldSpec::new(m).unwrap();
            let q = f.q() as u16;
            let mut triples = Vec::new();
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        triples.push((a, b, c));
                    }
                }
            }
            check_axioms(&f, &triples);
        }
    }

    #[test]
    fn field_axioms_random_large_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1D);
        for m in [8u32, 16] {
            let f = FieldSpec::new(m).unwrap();
            let triples: Vec<_> = (0..10_000)
                .map(|_| {
                    (
                        f.random_element(&mut rng),
                        f.random_element(&mut rng),
                        f.random_element(&mut rng),
                    )
                })
                .collect();
            check_axioms(&f, &triples);
        }
    }

    #[test]
    fn inverses_exhaustive_gf16_gf256() {
        for m in [4u32, 8] {
            let f = FieldSpec::new(m).unwrap();
            for a in 1..f.q() as u16 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }

    #[test]
    fn table_mul_matches_clmul_reference() {
        // The two multiplication routes must agree wherever both exist.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [1u32, 4, 8] {
            let f = FieldSpec::new(m).unwrap();
            for _ in 0..5_000 {
                let a = f.random_element(&mut rng);
                let b = f.random_element(&mut rng);
                assert_eq!(f.mul(a, b), f.mul_no_tables(a, b));
            }
        }
    }

    #[test]
    fn random_element_gf2_balanced() {
        let f = FieldSpec::new(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let ones: u64 = (0..n).map(|_| f.random_element(&mut rng) as u64).sum();
        let frac = ones as f64 / n as f64;
        // 3 sigma for a fair coin at n = 1e5.
        let tol = 3.0 * (0.25f64 / n as f64).sqrt();
        assert!((frac - 0.5).abs() <= tol, "frac {frac} outside {tol}");
    }

    #[test]
    fn random_element_gf256_uniform_chi_square() {
        let f = FieldSpec::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 100_000usize;
        let mut counts = [0u64; 256];
        for _ in 0..n {
            counts[f.random_element(&mut rng) as usize] += 1;
        }
        let expected = n as f64 / 256.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // chi-square critical value, 255 degrees of freedom, alpha = 0.01.
        assert!(stat < 310.45738821990585, "chi-square statistic {stat}");
    }

    #[test]
    fn random_element_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for f in all_fields() {
            for _ in 0..1_000 {
                assert!((f.random_element(&mut rng) as u32) < f.q());
            }
        }
    }

    #[test]
    fn axpy_matches_elementwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for f in all_fields() {
            for _ in 0..50 {
                let c = f.random_element(&mut rng);
                let x: Vec<u16> = (0..67).map(|_| f.random_element(&mut rng)).collect();
                let y0: Vec<u16> = (0..67).map(|_| f.random_element(&mut rng)).collect();
                let mut y = y0.clone();
                f.axpy(c, &x, &mut y);
                for i in 0..x.len() {
                    assert_eq!(y[i], f.add(y0[i], f.mul(c, x[i])));
                }
            }
        }
    }

    #[test]
    fn scale_matches_elementwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for f in all_fields() {
            let c = f.random_element(&mut rng);
            let row0: Vec<u16> = (0..33).map(|_| f.random_element(&mut rng)).collect();
            let mut row = row0.clone();
            f.scale(c, &mut row);
            for i in 0..row.len() {
                assert_eq!(row[i], f.mul(c, row0[i]));
            }
        }
    }
}
