//! Bit-packed matrices over GF(2), 64 columns per word.

use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

#[inline]
fn words_for(cols: usize) -> usize {
    cols.div_ceil(64)
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        let tail = cols % 64;
        let mask = if tail == 0 { !0u64 } else { (1u64 << tail) - 1 };
        for r in 0..rows {
            let row = m.row_mut(r);
            for w in row.iter_mut() {
                *w = rng.gen();
            }
            if let Some(last) = row.last_mut() {
                *last &= mask;
            }
        }
        m
    }

    /// Uniform sample from GL_n(2).
    ///
    /// The target law is that of drawing rows one at a time and redrawing
    /// any row that lies in the span of the rows before it. All but the last
    /// few rows are drawn in one go and checked with a single blocked
    /// elimination; they are independent with probability above
    /// `1 - 2^-TAIL`, and otherwise the whole sample is redone row by row.
    /// Either branch yields the uniform law on independent row prefixes, so
    /// the result is exactly uniform.
    pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        const TAIL: usize = 10;
        let mut m = Self::random(n, n, rng);
        let head = n.saturating_sub(TAIL);
        if head > 0 {
            let mut ech = Self::zeros(head, n);
            ech.data.copy_from_slice(&m.data[..head * m.stride]);
            if ech.rank_in_place() == head {
                // Row echelon form: each row's leading bit is its pivot.
                let pivots = (0..head).map(|r| ech.leading_bit(r).expect("nonzero row")).collect();
                m.extend_invertible(head, ech.data, pivots, rng);
                return m;
            }
        }
        m.extend_invertible(0, Vec::new(), Vec::new(), rng);
        m
    }

    fn leading_bit(&self, r: usize) -> Option<usize> {
        let row = self.row(r);
        let wi = row.iter().position(|&w| w != 0)?;
        Some(wi * 64 + row[wi].trailing_zeros() as usize)
    }

    /// Redraws rows `start..` one at a time until each is independent of
    /// the rows above it. `basis` holds an echelon copy of rows `..start`,
    /// each entry zero at the pivots of all earlier entries.
    fn extend_invertible<R: Rng + ?Sized>(
        &mut self,
        start: usize,
        mut basis: Vec<u64>,
        mut pivots: Vec<usize>,
        rng: &mut R,
    ) {
        let (n, stride) = (self.rows, self.stride);
        let tail = self.cols % 64;
        let mask = if tail == 0 { !0u64 } else { (1u64 << tail) - 1 };
        let mut v = vec![0u64; stride];
        let mut r = start;
        while r < n {
            for w in v.iter_mut() {
                *w = rng.gen();
            }
            if let Some(last) = v.last_mut() {
                *last &= mask;
            }
            self.row_mut(r).copy_from_slice(&v);
            for (b, &p) in basis.chunks_exact(stride).zip(&pivots) {
                let w0 = p / 64;
                if (v[w0] >> (p % 64)) & 1 == 1 {
                    for (d, s) in v[w0..].iter_mut().zip(&b[w0..]) {
                        *d ^= s;
                    }
                }
            }
            let Some(wi) = v.iter().position(|&w| w != 0) else {
                continue;
            };
            pivots.push(wi * 64 + v[wi].trailing_zeros() as usize);
            basis.extend_from_slice(&v);
            r += 1;
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.stride + c / 64];
        let bit = 1u64 << (c % 64);
        if v {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / 64] ^= 1u64 << (c % 64);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// In-place `self += other` (entrywise XOR).
    pub fn xor_assign(&mut self, other: &BitMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
    }

    /// Adds the identity along the main diagonal.
    pub fn add_identity(&mut self) {
        for i in 0..self.rows.min(self.cols) {
            self.flip(i, i);
        }
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        let stride = out.stride;
        for i in 0..self.rows {
            let dst = &mut out.data[i * stride..(i + 1) * stride];
            for (wi, &w) in self.row(i).iter().enumerate() {
                let mut bits = w;
                while bits != 0 {
                    let k = wi * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for (d, s) in dst.iter_mut().zip(other.row(k)) {
                        *d ^= s;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for (wi, &w) in self.row(r).iter().enumerate() {
                let mut bits = w;
                while bits != 0 {
                    let c = wi * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Rank by word-parallel Gaussian elimination on a scratch copy.
    pub fn rank(&self) -> usize {
        self.clone().rank_in_place()
    }

    /// Rank, destroying the contents.
    ///
    /// Columns are processed in aligned blocks of eight. Pivots inside a
    /// block are found by lazily reducing candidate rows, brought to reduced
    /// form among themselves, and then every remaining row is cleared with a
    /// single XOR from a table of all pivot-row combinations (the "method of
    /// four Russians").
    pub fn rank_in_place(&mut self) -> usize {
        const K: usize = 8;
        let (rows, cols, stride) = (self.rows, self.cols, self.stride);
        let mut rank = 0;
        let mut table = vec![0u64; (1 << K) * stride];
        let mut c0 = 0;
        while c0 < cols && rank < rows {
            let wi = c0 / 64;
            let shift = c0 % 64;
            let width = K.min(cols - c0);
            let span = stride - wi;
            // pivot column offsets (within block) in discovery order
            let mut piv_cols: [usize; K] = [0; K];
            let mut np = 0;
            for j in 0..width {
                let bit = 1u64 << (shift + j);
                let mut found = None;
                for r in rank + np..rows {
                    self.reduce_row(r, rank, &piv_cols[..np], wi, shift);
                    if self.data[r * stride + wi] & bit != 0 {
                        found = Some(r);
                        break;
                    }
                }
                if let Some(r) = found {
                    let dst = rank + np;
                    if r != dst {
                        for k in wi..stride {
                            self.data.swap(r * stride + k, dst * stride + k);
                        }
                    }
                    piv_cols[np] = j;
                    np += 1;
                }
            }
            if np == 0 {
                c0 += width;
                continue;
            }
            // back-substitute so each pivot row is zero in the other pivot columns
            for i in (0..np).rev() {
                let bit = 1u64 << (shift + piv_cols[i]);
                for i2 in 0..i {
                    if self.data[(rank + i2) * stride + wi] & bit != 0 {
                        let (a, b) = self.data.split_at_mut((rank + i) * stride);
                        let src = &b[wi..stride];
                        for (d, s) in a[(rank + i2) * stride + wi..(rank + i2 + 1) * stride].iter_mut().zip(src) {
                            *d ^= s;
                        }
                    }
                }
            }
            // table over subsets of the pivot mask, indexed by the block bits
            let mut mask = 0usize;
            for &j in &piv_cols[..np] {
                mask |= 1 << j;
            }
            table[..span].fill(0);
            for sub in 1..(1usize << width) {
                if sub & !mask != 0 {
                    continue;
                }
                let low = sub.trailing_zeros() as usize;
                let prev = sub & (sub - 1);
                let pi = piv_cols[..np].iter().position(|&j| j == low).unwrap();
                let prow = &self.data[(rank + pi) * stride + wi..(rank + pi + 1) * stride];
                let (lo, hi) = table.split_at_mut(sub * span);
                let src = &lo[prev * span..(prev + 1) * span];
                for ((d, a), b) in hi[..span].iter_mut().zip(src).zip(prow) {
                    *d = a ^ b;
                }
            }
            let bmask = (mask as u64) << shift;
            for row in self.data[(rank + np) * stride..rows * stride].chunks_exact_mut(stride) {
                let row = &mut row[wi..];
                let idx = ((row[0] & bmask) >> shift) as usize;
                if idx != 0 {
                    for (d, s) in row.iter_mut().zip(&table[idx * span..(idx + 1) * span]) {
                        *d ^= s;
                    }
                }
            }
            rank += np;
            c0 += width;
        }
        rank
    }

    /// Clears row `r` at the block's pivot columns found so far.
    #[inline]
    fn reduce_row(&mut self, r: usize, rank: usize, piv_cols: &[usize], wi: usize, shift: usize) {
        let stride = self.stride;
        for (i, &j) in piv_cols.iter().enumerate() {
            if self.data[r * stride + wi] >> (shift + j) & 1 == 1 {
                let p = rank + i;
                debug_assert!(p < r);
                let (a, b) = self.data.split_at_mut(r * stride);
                for (d, s) in b[wi..stride].iter_mut().zip(&a[p * stride + wi..(p + 1) * stride]) {
                    *d ^= s;
                }
            }
        }
    }

    /// Plain one-column-at-a-time elimination; kept as an independent check
    /// on [`BitMatrix::rank_in_place`].
    pub fn rank_naive(&self) -> usize {
        let mut m = self.clone();
        let (rows, cols, stride) = (m.rows, m.cols, m.stride);
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let wi = c / 64;
            let bit = 1u64 << (c % 64);
            let Some(piv) = (rank..rows).find(|&r| m.data[r * stride + wi] & bit != 0) else {
                continue;
            };
            if piv != rank {
                for k in wi..stride {
                    m.data.swap(piv * stride + k, rank * stride + k);
                }
            }
            let (head, tail) = m.data.split_at_mut((rank + 1) * stride);
            let prow = &head[rank * stride + wi..(rank + 1) * stride];
            for row in tail.chunks_exact_mut(stride) {
                if row[wi] & bit != 0 {
                    for (d, s) in row[wi..].iter_mut().zip(prow) {
                        *d ^= s;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = BitMatrix::identity(n);
        let stride = a.stride;
        for c in 0..n {
            let wi = c / 64;
            let bit = 1u64 << (c % 64);
            let piv = (c..n).find(|&r| a.data[r * stride + wi] & bit != 0)?;
            if piv != c {
                for k in 0..stride {
                    a.data.swap(piv * stride + k, c * stride + k);
                    inv.data.swap(piv * stride + k, c * stride + k);
                }
            }
            let prow: Vec<u64> = a.row(c).to_vec();
            let pinv: Vec<u64> = inv.row(c).to_vec();
            for r in 0..n {
                if r != c && a.data[r * stride + wi] & bit != 0 {
                    for (d, s) in a.row_mut(r).iter_mut().zip(&prow) {
                        *d ^= s;
                    }
                    for (d, s) in inv.row_mut(r).iter_mut().zip(&pinv) {
                        *d ^= s;
                    }
                }
            }
        }
        Some(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_zero_rank() {
        assert_eq!(BitMatrix::identity(130).rank(), 130);
        assert_eq!(BitMatrix::zeros(70, 90).rank(), 0);
    }

    #[test]
    fn equal_rows_rank_one() {
        let mut m = BitMatrix::zeros(2, 2);
        for r in 0..2 {
            for c in 0..2 {
                m.set(r, c, true);
            }
        }
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn table_rank_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in 0..3000 {
            let rows = 1 + t % 83;
            let cols = 1 + (t * 13) % 157;
            let mut m = BitMatrix::random(rows, cols, &mut rng);
            // sparsify some matrices and add dependent rows
            if t % 2 == 0 {
                let s = BitMatrix::random(rows, cols, &mut rng);
                let u = BitMatrix::random(rows, cols, &mut rng);
                for (d, (a, b)) in m.data.iter_mut().zip(s.data.iter().zip(&u.data)) {
                    *d &= a & b;
                }
            }
            if rows > 3 && t % 3 == 0 {
                let a = m.row(0).to_vec();
                let b = m.row(1).to_vec();
                for (k, w) in m.row_mut(rows - 1).iter_mut().enumerate() {
                    *w = a[k] ^ b[k];
                }
            }
            assert_eq!(m.rank(), m.rank_naive(), "rows={rows} cols={cols}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut found = 0;
        while found < 20 {
            let m = BitMatrix::random(97, 97, &mut rng);
            if let Some(inv) = m.inverse() {
                assert_eq!(m.mul(&inv), BitMatrix::identity(97));
                found += 1;
            } else {
                assert!(m.rank() < 97);
            }
        }
    }

    #[test]
    fn transpose_preserves_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut m = BitMatrix::random(40, 150, &mut rng);
            for r in 20..40 {
                let src = m.row(r - 20).to_vec();
                m.row_mut(r).copy_from_slice(&src);
            }
            assert_eq!(m.rank(), m.transpose().rank());
            assert!(m.rank() <= 20);
        }
    }

    #[test]
    fn invertible_sampler_covers_gl3_evenly() {
        // |GL_3(2)| = 168; every element should appear about equally often.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = std::collections::HashMap::new();
        let draws = 168 * 200;
        for _ in 0..draws {
            let m = BitMatrix::random_invertible(3, &mut rng);
            assert_eq!(m.rank(), 3);
            *counts.entry(m.data.clone()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 168);
        let expect = draws as f64 / 168.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        // 167 degrees of freedom; the 0.999 quantile is about 229.
        assert!(chi2 < 229.0, "chi-square {chi2}");
    }

    #[test]
    fn invertible_sampler_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [1, 63, 64, 65, 130] {
            let m = BitMatrix::random_invertible(n, &mut rng);
            assert_eq!(m.rank_naive(), n);
        }
    }

    #[test]
    fn elimination_leaves_row_echelon_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (r, c) in [(100, 200), (200, 100), (130, 130), (7, 300)] {
            let mut m = BitMatrix::random(r, c, &mut rng);
            let rank = m.rank_in_place();
            let leads: Vec<usize> = (0..rank).map(|i| m.leading_bit(i).unwrap()).collect();
            assert!(leads.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn invertible_sampler_entries_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let trials = 4000;
        let mut ones = [0u32; 2];
        for _ in 0..trials {
            let m = BitMatrix::random_invertible(20, &mut rng);
            ones[0] += m.get(0, 0) as u32;
            ones[1] += m.get(19, 19) as u32;
        }
        // An entry of a uniform invertible matrix is 1 with probability
        // 2^19 / (2^20 - 1), just above one half; allow four standard errors.
        for c in ones {
            assert!((c as f64 / trials as f64 - 0.5).abs() < 4.0 * (0.25 / trials as f64).sqrt());
        }
    }
}
