//! Windowed F_p linear algebra.
//!
//! Monomial coefficient subrings (F_p-spans of T-monomials whose exponents
//! form a monoid) are not valuation rings, so the chain-ring engine in
//! `linalg` does not apply. Over a finite exponent window [lo, hi) a module
//! vector becomes a plain F_p vector indexed by (coordinate, exponent), and
//! span/membership/kernel questions reduce to Gaussian elimination with
//! certificate tracking. Callers are responsible for choosing `hi` far enough
//! above their data that truncation at the window top cannot flip an answer
//! (and for re-running with a wider window when they need a cross-check).

use crate::error::{Error, Result};
use crate::linalg::Col;
use crate::ring::mod_inv;

/// Hard ceiling on window dimensions; anything larger is a sign the caller
/// should give up rather than grind.
pub const DIM_BUDGET: usize = 4096;

#[derive(Clone, Copy, Debug)]
pub struct Window {
    pub ncoords: usize,
    /// Inclusive lower bound on scaled exponents.
    pub lo: i64,
    /// Exclusive upper bound.
    pub hi: i64,
}

impl Window {
    pub fn new(ncoords: usize, lo: i64, hi: i64) -> Result<Window> {
        if lo >= hi || ncoords == 0 {
            return Err(Error::Invalid(format!("degenerate window {}x[{}, {})", ncoords, lo, hi)));
        }
        let w = Window { ncoords, lo, hi };
        if w.dim() > DIM_BUDGET {
            return Err(Error::BudgetExceeded {
                budget: DIM_BUDGET,
                msg: format!("window dimension {} ({} coords x [{}, {}))", w.dim(), ncoords, lo, hi),
            });
        }
        Ok(w)
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn dim(&self) -> usize {
        self.ncoords * self.width()
    }

    pub fn idx(&self, coord: usize, e: i64) -> Option<usize> {
        (e >= self.lo && e < self.hi).then(|| coord * self.width() + (e - self.lo) as usize)
    }

    /// Dense image of a polynomial column; terms at or above `hi` fall away
    /// (window truncation), terms below `lo` are a caller bug.
    pub fn col_to_fp(&self, col: &Col) -> Vec<u32> {
        let mut v = vec![0u32; self.dim()];
        for (coord, s) in col.iter().enumerate() {
            for &(e, c) in &s.terms {
                debug_assert!(e >= self.lo, "term below the window floor");
                if let Some(i) = self.idx(coord, e) {
                    v[i] = c;
                }
            }
        }
        v
    }
}

/// Row-echelon F_p span with dependency certificates.
///
/// Each inserted vector carries a tag (a vector over some fixed index set,
/// usually "the inputs inserted so far"). When an insert reduces to zero the
/// accumulated tag is returned: it is an exact linear dependency with unit
/// coefficient on the new vector, so collecting these over a spanning
/// sequence yields a generating set of the kernel.
pub struct FpSpan {
    p: u32,
    dim: usize,
    rows: Vec<(usize, Vec<u32>, Vec<u32>)>,
}

impl FpSpan {
    pub fn new(p: u32, dim: usize) -> FpSpan {
        FpSpan { p, dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [u32], tag: &mut [u32]) {
        let p = self.p;
        // Rows are in insertion order and each has zeros at all earlier
        // pivots, so a single forward pass clears every pivot for good.
        for (piv, row, rtag) in &self.rows {
            let c = v[*piv] % p;
            if c == 0 {
                continue;
            }
            let m = p - c;
            for (x, r) in v.iter_mut().zip(row) {
                *x = (*x + m * r) % p;
            }
            for (x, r) in tag.iter_mut().zip(rtag) {
                *x = (*x + m * r) % p;
            }
        }
    }

    /// Insert a vector; `Some(tag)` means it was dependent and the tag is the
    /// dependency certificate.
    pub fn insert(&mut self, mut v: Vec<u32>, mut tag: Vec<u32>) -> Option<Vec<u32>> {
        debug_assert_eq!(v.len(), self.dim);
        for x in v.iter_mut() {
            *x %= self.p;
        }
        self.reduce(&mut v, &mut tag);
        match v.iter().position(|&x| x != 0) {
            None => Some(tag),
            Some(piv) => {
                let inv = mod_inv(v[piv], self.p);
                for x in v.iter_mut() {
                    *x = (*x * inv) % self.p;
                }
                for x in tag.iter_mut() {
                    *x = (*x * inv) % self.p;
                }
                self.rows.push((piv, v, tag));
                None
            }
        }
    }

    /// Membership test; the certificate expresses the query over the tags of
    /// the vectors already inserted (query coefficient normalized away).
    pub fn contains(&self, v: &[u32], ntags: usize) -> Option<Vec<u32>> {
        let mut v = v.to_vec();
        for x in v.iter_mut() {
            *x %= self.p;
        }
        let mut tag = vec![0u32; ntags];
        self.reduce(&mut v, &mut tag);
        if v.iter().all(|&x| x == 0) {
            // v − Σ c·rows = 0 with tag = −Σ c·row_tags, so negate.
            for x in tag.iter_mut() {
                *x = (self.p - *x) % self.p;
            }
            Some(tag)
        } else {
            None
        }
    }

    pub fn contains_quick(&self, v: &[u32]) -> bool {
        self.contains(v, 0).is_some()
    }
}

/// Scaled exponents of the monoid generated by `gens` (with 0), up to `hi`.
pub fn monoid_exponents(gens: &[i64], hi: i64) -> Result<Vec<i64>> {
    if gens.iter().any(|&g| g <= 0) {
        return Err(Error::Invalid("monomial subring generators must have positive exponent".into()));
    }
    let n = hi.max(1) as usize;
    let mut reach = vec![false; n];
    reach[0] = true;
    for e in 0..n {
        if !reach[e] {
            continue;
        }
        for &g in gens {
            let t = e + g as usize;
            if t < n {
                reach[t] = true;
            }
        }
    }
    Ok((0..hi).filter(|&e| reach[e as usize]).collect())
}
