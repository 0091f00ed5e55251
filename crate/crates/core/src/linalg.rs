//! Exact linear algebra over the truncated valuation ring.
//!
//! Everything here works in R = F_p[x]/(x^cut) where x = T^(1/p^level), so a
//! term exponent is the ring exponent scaled by p^level. R is a chain ring:
//! any element factors as c·x^v·(unit), so divisibility is decided by the
//! valuation v and Gaussian elimination needs no fraction-free tricks. All
//! arithmetic is exact in R; `cut` is chosen generously above the precision
//! window so that answers about the untruncated ring are reliable whenever
//! the reported data sits well below it (some callers cross-check by
//! re-running with a doubled cut where it matters).
//!
//! R is not a domain, so column reduction pivots on the globally smallest
//! valuation rather than scanning rows in order. That keeps every reduced
//! column's minimal valuation equal to its pivot valuation, which is exactly
//! what makes the greedy membership test (`Reduced::solve`) complete: the
//! only freedom in a pivot coefficient is an annihilator multiple x^{cut−v},
//! and against a column with no valuation below v it cannot change the
//! combination before the cut.
//!
//! The `lossy` flag on a polynomial is provenance only — it marks values
//! derived from ring elements that were themselves truncated — and is never
//! set by the (exact) operations in this module.

use crate::error::{Error, Result};
use crate::ring::mod_inv;

#[derive(Clone, Copy, Debug)]
pub struct Ctx {
    pub p: u32,
    /// Root depth: exponents are integers scaled by p^level.
    pub level: u32,
    /// Exclusive upper bound on scaled exponents (the x^cut truncation).
    pub cut: i64,
}

impl Ctx {
    pub fn grid_den(&self) -> i64 {
        let mut d: i64 = 1;
        for _ in 0..self.level {
            d *= i64::from(self.p);
        }
        d
    }

    /// A cut comfortably above everything the data and the gauge searches can
    /// reach: max data exponent plus four precision windows.
    pub fn for_data(p: u32, level: u32, precision: u32, cols: &[Col]) -> Ctx {
        let mut den: i64 = 1;
        for _ in 0..level {
            den *= i64::from(p);
        }
        let data_max = cols
            .iter()
            .flatten()
            .flat_map(|s| s.terms.last())
            .map(|&(e, _)| e)
            .max()
            .unwrap_or(0)
            .max(0);
        let window = i64::from(precision) * den;
        Ctx { p, level, cut: data_max + 4 * window + 8 }
    }

    pub fn doubled(&self) -> Ctx {
        Ctx { cut: self.cut * 2, ..*self }
    }
}

/// Sparse polynomial over scaled exponents; terms ascending, coefficients in
/// 1..p.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SPoly {
    pub terms: Vec<(i64, u32)>,
    pub lossy: bool,
}

fn merge_terms(p: u32, mut terms: Vec<(i64, u32)>) -> Vec<(i64, u32)> {
    terms.sort_by_key(|&(e, _)| e);
    let mut out: Vec<(i64, u32)> = Vec::with_capacity(terms.len());
    for (e, c) in terms {
        let c = c % p;
        if c == 0 {
            continue;
        }
        match out.last_mut() {
            Some((le, lc)) if *le == e => {
                *lc = (*lc + c) % p;
                if *lc == 0 {
                    out.pop();
                }
            }
            _ => out.push((e, c)),
        }
    }
    out
}

impl SPoly {
    pub fn zero() -> SPoly {
        SPoly::default()
    }

    pub fn monomial(e: i64, c: u32, p: u32) -> SPoly {
        let c = c % p;
        if c == 0 {
            SPoly::zero()
        } else {
            SPoly { terms: vec![(e, c)], lossy: false }
        }
    }

    pub fn one() -> SPoly {
        SPoly { terms: vec![(0, 1)], lossy: false }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn val(&self) -> Option<i64> {
        self.terms.first().map(|&(e, _)| e)
    }

    pub fn add(&self, other: &SPoly, p: u32) -> SPoly {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        SPoly { terms: merge_terms(p, terms), lossy: self.lossy || other.lossy }
    }

    pub fn neg(&self, p: u32) -> SPoly {
        SPoly {
            terms: self.terms.iter().map(|&(e, c)| (e, (p - c) % p)).collect(),
            lossy: self.lossy,
        }
    }

    pub fn sub(&self, other: &SPoly, p: u32) -> SPoly {
        self.add(&other.neg(p), p)
    }

    pub fn scale(&self, c: u32, p: u32) -> SPoly {
        let c = c % p;
        SPoly {
            terms: merge_terms(p, self.terms.iter().map(|&(e, k)| (e, k * c)).collect()),
            lossy: self.lossy,
        }
    }

    pub fn mul(&self, other: &SPoly, ctx: &Ctx) -> SPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(ea, ca) in &self.terms {
            for &(eb, cb) in &other.terms {
                let e = ea + eb;
                if e < ctx.cut {
                    terms.push((e, ca * cb));
                }
            }
        }
        SPoly { terms: merge_terms(ctx.p, terms), lossy: self.lossy || other.lossy }
    }

    /// Multiply by x^d (d may be negative); reduction in R drops ≥ cut.
    pub fn shift(&self, d: i64, ctx: &Ctx) -> SPoly {
        SPoly {
            terms: self
                .terms
                .iter()
                .map(|&(e, c)| (e + d, c))
                .filter(|&(e, _)| e < ctx.cut)
                .collect(),
            lossy: self.lossy,
        }
    }

    /// Exact quotient self/div in R. Requires val(self) ≥ val(div); in a chain
    /// ring that guarantees the division completes with zero remainder.
    pub fn exact_div(&self, div: &SPoly, ctx: &Ctx) -> SPoly {
        let &(dv, dc) = div.terms.first().expect("division by zero polynomial");
        let dinv = mod_inv(dc, ctx.p);
        let mut rem = self.terms.clone();
        let mut q: Vec<(i64, u32)> = Vec::new();
        while let Some(&(e, c)) = rem.first() {
            debug_assert!(e >= dv, "chain-ring division saw a low remainder term");
            let qe = e - dv;
            let qc = (c * dinv) % ctx.p;
            q.push((qe, qc));
            // rem -= (qe, qc) · div, truncating at the cut.
            let mut sub: Vec<(i64, u32)> = Vec::with_capacity(div.terms.len());
            for &(de, dcf) in &div.terms {
                let e2 = qe + de;
                if e2 < ctx.cut {
                    sub.push((e2, (qc * dcf) % ctx.p * (ctx.p - 1) % ctx.p));
                }
            }
            rem.extend_from_slice(&sub);
            rem = merge_terms(ctx.p, rem);
        }
        // Quotient exponents came out in strictly increasing order.
        SPoly { terms: q, lossy: self.lossy || div.lossy }
    }
}

/// A column vector of polynomials.
pub type Col = Vec<SPoly>;

pub fn col_is_zero(c: &Col) -> bool {
    c.iter().all(|s| s.is_zero())
}

pub fn col_is_lossy(c: &Col) -> bool {
    c.iter().any(|s| s.lossy)
}

fn col_sub_scaled(target: &mut Col, q: &SPoly, src: &Col, ctx: &Ctx) {
    // An exactly-zero operand contributes nothing, taint included; a lossy
    // zero has an unknown tail, so it must go through `mul` to taint the
    // result.
    if q.is_zero() && !q.lossy {
        return;
    }
    for (t, s) in target.iter_mut().zip(src) {
        if s.is_zero() && !s.lossy {
            continue;
        }
        *t = t.sub(&q.mul(s, ctx), ctx.p);
    }
}

fn col_mul_scalar(target: &mut Col, w: &SPoly, ctx: &Ctx) {
    for t in target.iter_mut() {
        if !t.is_zero() {
            *t = t.mul(w, ctx);
        }
    }
}

/// Canonical column form of a generator matrix over the chain ring.
///
/// Pivots are chosen by globally minimal valuation, so each pivot entry is
/// exactly x^v and v is also the minimal valuation in its whole column. That
/// invariant is what makes the greedy `solve` complete: a solution's pivot
/// coefficients are determined only modulo ann(x^{v_i}) = x^{cut−v_i}·R, and
/// any such ambiguity multiplied into a column whose entries all have
/// valuation ≥ v_i lands at or beyond the cut, where it vanishes. Entries at
/// a pivot row in every other column are reduced below that pivot's
/// valuation.
pub struct Reduced {
    pub ctx: Ctx,
    pub nrows: usize,
    pub cols: Vec<Col>,
    /// (row, scaled valuation) per reduced column, in elimination order
    /// (valuations ascending). Columns processed later are exactly zero at
    /// all earlier pivot rows.
    pub pivots: Vec<(usize, i64)>,
    /// Expression of each reduced column over the original columns.
    pub combos: Option<Vec<Vec<SPoly>>>,
    /// Combinations of the original columns that vanish (a generating set of
    /// the syzygy module); populated when tracking.
    pub syzygies: Vec<Vec<SPoly>>,
    /// Columns that vanished but carried truncation provenance: their
    /// dependence cannot be certified.
    pub ambiguous_zero: usize,
    pub lossy: bool,
}

pub fn reduce_columns(ctx: &Ctx, cols: Vec<Col>, track: bool) -> Reduced {
    let nrows = cols.first().map(|c| c.len()).unwrap_or(0);
    let ncols = cols.len();
    let lossy = cols.iter().any(|c| col_is_lossy(c));
    let mut work: Vec<(Col, Vec<SPoly>)> = cols
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            let mut tag = Vec::new();
            if track {
                tag = vec![SPoly::zero(); ncols];
                tag[j] = SPoly::one();
            }
            (c, tag)
        })
        .collect();
    let mut done: Vec<(Col, Vec<SPoly>, usize, i64)> = Vec::new();
    let mut syzygies = Vec::new();
    let mut ambiguous_zero = 0;

    loop {
        // Pivot on the globally smallest valuation among the remaining
        // columns; ties prefer the lowest row, then input order. Work columns
        // are exactly zero at already-pivoted rows, so the winner always sits
        // at a fresh row, and every entry of the winning column has valuation
        // ≥ v — the completeness invariant for `solve`.
        let mut best: Option<(i64, usize, usize)> = None;
        for (j, (col, _)) in work.iter().enumerate() {
            for (row, e) in col.iter().enumerate() {
                if let Some(v) = e.val() {
                    if best.map_or(true, |b| (v, row, j) < b) {
                        best = Some((v, row, j));
                    }
                }
            }
        }
        let Some((v, row, jstar)) = best else { break };
        let (mut pcol, mut ptag) = work.remove(jstar);
        // Normalize the pivot entry to exactly x^v.
        let w = SPoly::monomial(v, 1, ctx.p).exact_div(&pcol[row], ctx);
        col_mul_scalar(&mut pcol, &w, ctx);
        if track {
            col_mul_scalar(&mut ptag, &w, ctx);
        }
        pcol[row] = SPoly::monomial(v, 1, ctx.p); // exact by construction
        // Eliminate this row from the not-yet-pivoted columns (their entries
        // have valuation ≥ v, so the quotient is a plain shift).
        for (col, tag) in work.iter_mut() {
            if !col[row].is_zero() {
                let q = col[row].shift(-v, ctx);
                col_sub_scaled(col, &q, &pcol, ctx);
                col[row] = SPoly::zero();
                if track {
                    for (t, s) in tag.iter_mut().zip(&ptag) {
                        *t = t.sub(&q.mul(s, ctx), ctx.p);
                    }
                }
            }
        }
        // Canonically reduce this row in the already-finished columns: keep
        // only exponents below v there. The subtraction touches other rows
        // only with terms of valuation ≥ v, which cannot dip below an
        // earlier pivot's (smaller) valuation, so their invariants hold.
        for (col, tag, prow, _) in done.iter_mut() {
            let high: Vec<(i64, u32)> =
                col[row].terms.iter().copied().filter(|&(e, _)| e >= v).collect();
            if !high.is_empty() {
                let q = SPoly { terms: high, lossy: col[row].lossy }.shift(-v, ctx);
                col_sub_scaled(col, &q, &pcol, ctx);
                if track {
                    for (t, s) in tag.iter_mut().zip(&ptag) {
                        *t = t.sub(&q.mul(s, ctx), ctx.p);
                    }
                }
                debug_assert!(col[*prow].val().is_some(), "pivot at row {} disturbed", prow);
            }
        }
        done.push((pcol, ptag, row, v));
    }

    for (col, tag) in work {
        debug_assert!(col_is_zero(&col));
        if col_is_lossy(&col) || tag.iter().any(|t| t.lossy) {
            ambiguous_zero += 1;
        } else if track {
            syzygies.push(tag);
        }
    }

    let mut cols_out = Vec::with_capacity(done.len());
    let mut pivots = Vec::with_capacity(done.len());
    let mut combos = track.then(Vec::new);
    for (col, tag, row, v) in done {
        cols_out.push(col);
        pivots.push((row, v));
        if let Some(cs) = combos.as_mut() {
            cs.push(tag);
        }
    }

    Reduced { ctx: *ctx, nrows, cols: cols_out, pivots, combos, syzygies, ambiguous_zero, lossy }
}

#[derive(Debug)]
pub enum Solve {
    /// Coefficients over the *reduced* columns.
    Member(Vec<SPoly>),
    /// Smallest scaled valuation among residual terms.
    NotMember { residual_val: i64 },
}

impl Reduced {
    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    pub fn solve(&self, x: &Col) -> Solve {
        let ctx = &self.ctx;
        let mut x = x.clone();
        let mut coeffs = vec![SPoly::zero(); self.cols.len()];
        for (i, &(row, v)) in self.pivots.iter().enumerate() {
            // Only the part at or above the pivot valuation is divisible;
            // anything below stays in the residual. Any other choice of pivot
            // coefficient differs by a multiple of ann(x^v) = x^{cut−v}·R,
            // and every entry of column i has valuation ≥ v, so the
            // alternatives change the combination only at or beyond the cut:
            // a nonzero residual is conclusive.
            let high = SPoly {
                terms: x[row].terms.iter().copied().filter(|&(e, _)| e >= v).collect(),
                lossy: x[row].lossy,
            };
            if high.is_zero() {
                continue;
            }
            let q = high.shift(-v, ctx);
            col_sub_scaled(&mut x, &q, &self.cols[i], ctx);
            coeffs[i] = q;
        }
        match x.iter().filter_map(|s| s.val()).min() {
            None => Solve::Member(coeffs),
            Some(rv) => Solve::NotMember { residual_val: rv },
        }
    }

    pub fn is_member(&self, x: &Col) -> bool {
        matches!(self.solve(x), Solve::Member(_))
    }

    /// Canonical remainder of x modulo the span. At each pivot row the part
    /// of the entry at or above the pivot valuation is eliminated; canonical
    /// forms keep every column reduced at the other pivot rows, so a single
    /// pass yields the unique reduced representative, and the map x ↦
    /// remainder is F_p-linear.
    pub fn reduce_vector(&self, x: &Col) -> Col {
        let ctx = &self.ctx;
        let mut x = x.clone();
        for (i, &(row, v)) in self.pivots.iter().enumerate() {
            let high = SPoly {
                terms: x[row].terms.iter().copied().filter(|&(e, _)| e >= v).collect(),
                lossy: x[row].lossy,
            };
            if high.is_zero() {
                continue;
            }
            let q = high.shift(-v, ctx);
            col_sub_scaled(&mut x, &q, &self.cols[i], ctx);
        }
        x
    }

    /// Membership coefficients over the original generators (requires
    /// tracking).
    pub fn solve_original(&self, x: &Col) -> Result<Option<Vec<SPoly>>> {
        let combos = self
            .combos
            .as_ref()
            .ok_or_else(|| Error::Invalid("solve_original needs tracked reduction".into()))?;
        match self.solve(x) {
            Solve::NotMember { .. } => Ok(None),
            Solve::Member(cs) => {
                let n = combos.first().map(|c| c.len()).unwrap_or(0);
                let mut out = vec![SPoly::zero(); n];
                for (q, combo) in cs.iter().zip(combos) {
                    if q.is_zero() {
                        continue;
                    }
                    for (o, c) in out.iter_mut().zip(combo) {
                        if !c.is_zero() {
                            *o = o.add(&q.mul(c, &self.ctx), self.ctx.p);
                        }
                    }
                }
                Ok(Some(out))
            }
        }
    }

    /// Structural span equality: canonical forms are unique, so comparing
    /// pivot data and columns decides it.
    pub fn same_span(&self, other: &Reduced) -> bool {
        self.pivots == other.pivots && self.cols == other.cols
    }
}

/// Generators of the syzygy module of the given columns.
pub fn kernel(ctx: &Ctx, cols: &[Col]) -> Result<Vec<Vec<SPoly>>> {
    let red = reduce_columns(ctx, cols.to_vec(), true);
    if red.ambiguous_zero > 0 {
        return Err(Error::PrecisionLoss(
            "kernel: a truncated column vanished; dependence cannot be certified".into(),
        ));
    }
    Ok(red.syzygies)
}

/// Intersection of two spans (Zassenhaus: syzygies of the stacked matrix).
pub fn intersect(ctx: &Ctx, a: &[Col], b: &[Col]) -> Result<Vec<Col>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let mut stacked: Vec<Col> = a.to_vec();
    for col in b {
        stacked.push(col.iter().map(|s| s.neg(ctx.p)).collect());
    }
    let syz = kernel(ctx, &stacked)?;
    let na = a.len();
    let nrows = a[0].len();
    let mut gens = Vec::new();
    for s in syz {
        let mut g: Col = vec![SPoly::zero(); nrows];
        for (alpha, col) in s[..na].iter().zip(a) {
            if alpha.is_zero() {
                continue;
            }
            for (gi, ci) in g.iter_mut().zip(col) {
                if !ci.is_zero() {
                    *gi = gi.add(&alpha.mul(ci, ctx), ctx.p);
                }
            }
        }
        if !col_is_zero(&g) {
            gens.push(g);
        }
    }
    Ok(gens)
}

/// Diagonalization over the chain ring (valuation Smith form).
///
/// Returns the diagonal valuations (ascending — the divisibility chain is
/// automatic here) and, when tracked, the basis-change matrix B with
/// ORIGINAL = B · DIAGONAL: the cokernel of the original column span is
/// ⊕ R/x^{d_i} on the classes of B's columns, plus a free part on the
/// columns beyond the rank.
pub struct SmithOutcome {
    pub divisors: Vec<i64>,
    pub nrows: usize,
    /// n×n basis columns; `divisors.len()` of them carry torsion classes.
    pub basis: Option<Vec<Col>>,
    pub lossy: bool,
}

impl SmithOutcome {
    pub fn free_rank(&self) -> usize {
        self.nrows - self.divisors.len()
    }
}

pub fn smith_valuations(ctx: &Ctx, cols: &[Col], track_basis: bool) -> SmithOutcome {
    let nrows = cols.first().map(|c| c.len()).unwrap_or(0);
    let lossy = cols.iter().any(|c| col_is_lossy(c));
    let mut m: Vec<Col> = cols.to_vec();
    // B starts as the identity; row ops on M are mirrored as column ops on B
    // keeping ORIGINAL = B·M.
    let mut basis: Option<Vec<Col>> = track_basis.then(|| {
        (0..nrows)
            .map(|i| {
                let mut c = vec![SPoly::zero(); nrows];
                c[i] = SPoly::one();
                c
            })
            .collect()
    });
    let mut divisors = Vec::new();
    let mut s = 0usize;
    while s < nrows.min(m.len()) {
        // Global minimal valuation in the trailing submatrix.
        let mut best: Option<(i64, usize, usize)> = None;
        for (c, col) in m.iter().enumerate().skip(s) {
            for (r, e) in col.iter().enumerate().skip(s) {
                if let Some(v) = e.val() {
                    if best.map_or(true, |(bv, br, bc)| (v, r, c) < (bv, br, bc)) {
                        best = Some((v, r, c));
                    }
                }
            }
        }
        let Some((v, r, c)) = best else { break };
        // Move the pivot to (s, s).
        m.swap(s, c);
        if r != s {
            for col in m.iter_mut() {
                col.swap(s, r);
            }
            if let Some(b) = basis.as_mut() {
                b.swap(s, r);
            }
        }
        // Normalize the pivot row so the pivot is exactly x^v: row_s *= w.
        // Then B's column s picks up the inverse factor w^{-1}.
        let w = SPoly::monomial(v, 1, ctx.p).exact_div(&m[s][s], ctx);
        let winv = m[s][s].shift(-v, ctx);
        for col in m.iter_mut().skip(s) {
            if !col[s].is_zero() {
                col[s] = col[s].mul(&w, ctx);
            }
        }
        if let Some(b) = basis.as_mut() {
            col_mul_scalar(&mut b[s], &winv, ctx);
        }
        m[s][s] = SPoly::monomial(v, 1, ctx.p);
        // Clear the pivot column below: row_r -= q·row_s mirrors as
        // B col_s += q·B col_r.
        for r2 in (s + 1)..nrows {
            let e = m[s][r2].clone();
            if e.is_zero() {
                continue;
            }
            let q = e.shift(-v, ctx);
            for col in m.iter_mut().skip(s) {
                let upd = q.mul(&col[s], ctx);
                if !upd.is_zero() || upd.lossy {
                    col[r2] = col[r2].sub(&upd, ctx.p);
                }
            }
            if let Some(b) = basis.as_mut() {
                let add = {
                    let bc = &b[r2];
                    bc.iter().map(|x| q.mul(x, ctx)).collect::<Vec<_>>()
                };
                for (t, a) in b[s].iter_mut().zip(add) {
                    *t = t.add(&a, ctx.p);
                }
            }
        }
        // Clear the pivot row to the right with column ops (no tracking).
        for c2 in (s + 1)..m.len() {
            let e = m[c2][s].clone();
            if e.is_zero() {
                continue;
            }
            let q = e.shift(-v, ctx);
            let pivot_col = m[s].clone();
            for (t, pc) in m[c2].iter_mut().zip(&pivot_col) {
                let upd = q.mul(pc, ctx);
                if !upd.is_zero() || upd.lossy {
                    *t = t.sub(&upd, ctx.p);
                }
            }
        }
        divisors.push(v);
        s += 1;
    }
    SmithOutcome { divisors, nrows, basis, lossy }
}
