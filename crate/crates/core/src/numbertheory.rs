//! Arithmetic kernel: the multiplicative functions phi_k, the zeta-ratio
//! identity they satisfy, the unimodular column decomposition M = N*A with
//! its counting formula, lattice covolumes and saturation, and the
//! polynomial pairing bijections p_2 / p_n.

use crate::error::{Error, Result};

/// Trial-division factorization, smallest primes first. Inputs are desk
/// scale (<= 1e9), so no fancy sieving is needed here.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn checked_pow_u128(base: u128, exp: u32) -> Result<u128> {
    base.checked_pow(exp).ok_or(Error::IntegerOverflow)
}

/// phi_k(n): the number of k-tuples (n_1..n_k) in {0..n-1}^k with
/// gcd(n, n_1, ..., n_k) = 1. Multiplicative, with
/// phi_k(p^e) = p^{ek} - p^{(e-1)k} for k >= 1; phi_0 is identically 1;
/// phi_1 is the Euler totient.
pub fn phi_k(k: u32, n: u64) -> Result<u128> {
    if n == 0 {
        return Err(Error::PhiZero);
    }
    if k == 0 {
        return Ok(1);
    }
    let mut out: u128 = 1;
    for (p, e) in factorize(n) {
        let hi = checked_pow_u128(p as u128, e * k)?;
        let lo = checked_pow_u128(p as u128, (e - 1) * k)?;
        out = out.checked_mul(hi - lo).ok_or(Error::IntegerOverflow)?;
    }
    Ok(out)
}

/// Direct enumeration oracle for phi_k. Guarded by the enumerated work
/// n^k <= 1e8 (the gcd chain short-circuits once it reaches 1).
pub fn phi_k_bruteforce(k: u32, n: u64) -> Result<u128> {
    if n == 0 {
        return Err(Error::PhiZero);
    }
    if k == 0 {
        // empty-tuple convention: gcd over no coordinates is n itself only
        // formally; phi_0 is defined to be identically 1
        return Ok(1);
    }
    let work = (n as f64).powi(k as i32);
    if work > 1e8 {
        return Err(Error::BruteForceTooLarge(work));
    }
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    // odometer over {0..n-1}^k
    let mut tuple = vec![0u64; k as usize];
    let mut count = 0u128;
    loop {
        let mut g = n;
        for &t in &tuple {
            g = gcd(g, t);
            if g == 1 {
                break;
            }
        }
        if g == 1 {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == tuple.len() {
                return Ok(count);
            }
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// Riemann zeta on the real axis, s > 1: direct series to K terms with an
/// Euler-Maclaurin tail correction; absolute error below 1e-12 for s >= 2.
pub fn zeta(s: f64) -> f64 {
    debug_assert!(s > 1.0);
    const K: f64 = 1000.0;
    let mut sum = 0.0;
    let mut n = K - 1.0;
    while n >= 1.0 {
        sum += n.powf(-s);
        n -= 1.0;
    }
    let tail = K.powf(1.0 - s) / (s - 1.0) + 0.5 * K.powf(-s) + s * K.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * K.powf(-s - 3.0) / 720.0;
    sum + tail
}

/// Result of probing the identity sum_n phi_k(n)/n^d = zeta(d-k)/zeta(d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaRatioCheck {
    /// Partial sum over n <= cutoff.
    pub partial_sum: f64,
    /// zeta(d-k)/zeta(d) for k >= 1; for k = 0 the series is zeta(d) itself.
    pub target: f64,
    /// Bound on the dropped tail, sum_{n>cutoff} n^{k-d}.
    pub gap_bound: f64,
}

/// Evaluate the partial sum of phi_k(n)/n^d up to `cutoff`, its limit, and
/// a tail bound; errs if the partial sum misses the limit by more than the
/// bound. Requires d - k >= 2 so the series converges comfortably.
pub fn zeta_ratio_check(k: u32, d: u32, cutoff: u64) -> Result<ZetaRatioCheck> {
    if d < k + 2 {
        return Err(Error::ZetaRange { k, d });
    }
    let target = if k == 0 {
        zeta(d as f64)
    } else {
        zeta((d - k) as f64) / zeta(d as f64)
    };

    // smallest-prime-factor sieve so phi_k is multiplicative on the fly
    let len = cutoff as usize + 1;
    let mut spf: Vec<u32> = vec![0; len];
    for i in 2..len {
        if spf[i] == 0 {
            let mut j = i;
            while j < len {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }

    let mut partial = 0.0f64;
    for n in 1..=cutoff {
        let phi = if k == 0 {
            1.0
        } else {
            let mut rem = n as usize;
            let mut val = 1.0f64;
            while rem > 1 {
                let p = spf[rem] as u64;
                let mut e = 0u32;
                while rem % p as usize == 0 {
                    rem /= p as usize;
                    e += 1;
                }
                let pk = (p as f64).powi(k as i32);
                val *= pk.powi(e as i32) - pk.powi(e as i32 - 1);
            }
            val
        };
        partial += phi / (n as f64).powi(d as i32);
    }

    let c = cutoff as f64;
    let ex = k as f64 - d as f64; // < -1
    let gap_bound = c.powf(ex + 1.0) / (-ex - 1.0) + c.powf(ex);

    let check = ZetaRatioCheck {
        partial_sum: partial,
        target,
        gap_bound,
    };
    if (partial - target).abs() > gap_bound {
        return Err(Error::ZetaGapExceeded {
            partial,
            target,
            gap_bound,
        });
    }
    Ok(check)
}

/// Dense integer matrix, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntegerMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if rows * cols != data.len() || rows == 0 || cols == 0 {
            return Err(Error::BadMatrix(format!(
                "{rows}x{cols} with {} entries",
                data.len()
            )));
        }
        Ok(IntegerMatrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntegerMatrix { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, other: &IntegerMatrix) -> Result<IntegerMatrix> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch(self.cols, other.rows));
        }
        let mut out = vec![0i64; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        IntegerMatrix::new(self.rows, other.cols, out)
    }

    /// Exact determinant by Bareiss elimination in i128.
    pub fn det(&self) -> Result<i128> {
        if self.rows != self.cols {
            return Err(Error::BadMatrix("det of non-square".into()));
        }
        let n = self.rows;
        let mut m: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if m[k * n + k] == 0 {
                let swap = (k + 1..n).find(|&i| m[i * n + k] != 0);
                match swap {
                    Some(i) => {
                        for j in 0..n {
                            m.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = m[i * n + j]
                        .checked_mul(m[k * n + k])
                        .and_then(|x| {
                            m[i * n + k]
                                .checked_mul(m[k * n + j])
                                .and_then(|y| x.checked_sub(y))
                        })
                        .ok_or(Error::IntegerOverflow)?;
                    m[i * n + j] = v / prev;
                }
                m[i * n + k] = 0;
            }
            prev = m[k * n + k];
        }
        Ok(sign * m[(n - 1) * n + (n - 1)])
    }

    /// Gram determinant det(B^T B), exact.
    pub fn gram_det(&self) -> Result<i128> {
        let r = self.cols;
        let mut gram = vec![0i64; r * r];
        for a in 0..r {
            for b in 0..r {
                let mut s: i128 = 0;
                for i in 0..self.rows {
                    s += self.get(i, a) as i128 * self.get(i, b) as i128;
                }
                gram[a * r + b] = i64::try_from(s).map_err(|_| Error::IntegerOverflow)?;
            }
        }
        IntegerMatrix::new(r, r, gram)?.det()
    }
}

/// The unimodular column decomposition of an integer matrix with
/// independent columns: column j of the input equals t_j * (Nmat * A)_j,
/// where t_j is the column gcd, Nmat is in SL(d, Z), and A is the canonical
/// upper-triangular factor (positive diagonal, per-column entries coprime,
/// above-diagonal entries reduced modulo the diagonal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermiteFactor {
    pub t: Vec<u64>,
    pub a: IntegerMatrix,
    pub nmat: IntegerMatrix,
}

impl HermiteFactor {
    /// Recompute t_j * (Nmat * A)_j for all j; equals the decomposed input.
    pub fn reconstruct(&self, d: usize) -> Result<IntegerMatrix> {
        let r = self.a.cols();
        let mut padded = vec![0i64; d * r];
        for i in 0..self.a.rows() {
            for j in 0..r {
                padded[i * r + j] = self.a.get(i, j);
            }
        }
        let prod = self.nmat.mul(&IntegerMatrix::new(d, r, padded)?)?;
        let mut out = vec![0i64; d * r];
        for j in 0..r {
            for i in 0..d {
                out[i * r + j] = prod.get(i, j) * self.t[j] as i64;
            }
        }
        IntegerMatrix::new(d, r, out)
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Decompose m (d x r, r < d, columns independent over Q) as in
/// [`HermiteFactor`]. The factor A is canonical; Nmat has determinant +1.
pub fn hermite_column_decompose(m: &IntegerMatrix) -> Result<HermiteFactor> {
    let (d, r) = (m.rows(), m.cols());
    if r >= d {
        return Err(Error::TooManyColumns { r, d });
    }

    // strip column gcds
    let mut t = Vec::with_capacity(r);
    let mut cur: Vec<i128> = Vec::with_capacity(d * r);
    for i in 0..d {
        for j in 0..r {
            cur.push(m.get(i, j) as i128);
        }
    }
    for j in 0..r {
        let mut g: i128 = 0;
        for i in 0..d {
            g = ext_gcd(g, cur[i * r + j]).0;
        }
        if g == 0 {
            return Err(Error::RankDeficient);
        }
        for i in 0..d {
            cur[i * r + j] /= g;
        }
        t.push(g as u64);
    }

    // row-reduce cur to upper-triangular A while carrying V with
    // invariant: original primitive matrix == V * cur, det(V) = det_sign
    let mut v: Vec<i128> = vec![0; d * d];
    for i in 0..d {
        v[i * d + i] = 1;
    }
    let mut det_sign = 1i128;

    let at = |c: &Vec<i128>, i: usize, j: usize| c[i * r + j];
    for j in 0..r {
        // eliminate below the pivot with 2x2 unimodular row blocks
        for k in j + 1..d {
            let (a, b) = (at(&cur, j, j), at(&cur, k, j));
            if b == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(a, b);
            let (aj, bj) = (a / g, b / g);
            for col in 0..r {
                let rj = cur[j * r + col];
                let rk = cur[k * r + col];
                cur[j * r + col] = x * rj + y * rk;
                cur[k * r + col] = -bj * rj + aj * rk;
            }
            for row in 0..d {
                let cj = v[row * d + j];
                let ck = v[row * d + k];
                v[row * d + j] = aj * cj + bj * ck;
                v[row * d + k] = -y * cj + x * ck;
            }
        }
        if at(&cur, j, j) == 0 {
            return Err(Error::RankDeficient);
        }
        // positive pivot
        if at(&cur, j, j) < 0 {
            for col in 0..r {
                cur[j * r + col] = -cur[j * r + col];
            }
            for row in 0..d {
                v[row * d + j] = -v[row * d + j];
            }
            det_sign = -det_sign;
        }
        // reduce entries above the pivot into [0, pivot)
        let pivot = at(&cur, j, j);
        for i in 0..j {
            let q = at(&cur, i, j).div_euclid(pivot);
            if q != 0 {
                for col in 0..r {
                    cur[i * r + col] -= q * cur[j * r + col];
                }
                for row in 0..d {
                    v[row * d + j] += q * v[row * d + i];
                }
            }
        }
    }

    // force det(V) = +1; negating the last column of V multiplies only the
    // zero rows of the padded A (r < d), so the product is unchanged
    if det_sign < 0 {
        for row in 0..d {
            v[row * d + (d - 1)] = -v[row * d + (d - 1)];
        }
    }

    let mut a_data = Vec::with_capacity(r * r);
    for i in 0..r {
        for j in 0..r {
            let val = cur[i * r + j];
            a_data.push(i64::try_from(val).map_err(|_| Error::IntegerOverflow)?);
        }
    }
    let mut n_data = Vec::with_capacity(d * d);
    for x in v {
        n_data.push(i64::try_from(x).map_err(|_| Error::IntegerOverflow)?);
    }
    Ok(HermiteFactor {
        t,
        a: IntegerMatrix::new(r, r, a_data)?,
        nmat: IntegerMatrix::new(d, d, n_data)?,
    })
}

/// Number of canonical factors A with the given positive diagonal:
/// prod_j phi_{j-1}(a_jj). The first diagonal entry must be 1.
pub fn count_reduced_matrices(diag: &[u64]) -> Result<u128> {
    if diag.is_empty() || diag[0] != 1 {
        return Err(Error::BadMatrix(format!(
            "diagonal must start with 1, got {diag:?}"
        )));
    }
    let mut out: u128 = 1;
    for (j, &a) in diag.iter().enumerate() {
        out = out
            .checked_mul(phi_k(j as u32, a)?)
            .ok_or(Error::IntegerOverflow)?;
    }
    Ok(out)
}

/// Covolume of the lattice spanned by the integer columns: sqrt(det(B^T B)).
pub fn lattice_covolume(basis: &IntegerMatrix) -> Result<f64> {
    let g = basis.gram_det()?;
    if g == 0 {
        return Err(Error::RankDeficient);
    }
    Ok((g as f64).sqrt())
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// True iff the integer span of the columns equals all integer points of
/// their rational span, i.e. the gcd of the maximal minors is 1.
pub fn is_saturated(basis: &IntegerMatrix) -> Result<bool> {
    let (d, r) = (basis.rows(), basis.cols());
    if r > d {
        return Err(Error::TooManyColumns { r, d });
    }
    let mut g: i128 = 0;
    for rows in combinations(d, r) {
        let mut sub = Vec::with_capacity(r * r);
        for &i in &rows {
            for j in 0..r {
                sub.push(basis.get(i, j));
            }
        }
        let det = IntegerMatrix::new(r, r, sub)?.det()?;
        g = ext_gcd(g, det).0;
        if g == 1 {
            return Ok(true);
        }
    }
    if g == 0 {
        return Err(Error::RankDeficient);
    }
    Ok(g == 1)
}

/// The polynomial pairing bijection N0 x N0 -> N0:
/// (x, y) -> C(x+y+2, 2) - (y+1).
pub fn pairing_p2(x: u64, y: u64) -> u64 {
    let s = x as u128 + y as u128;
    let tri = (s + 2) * (s + 1) / 2;
    (tri - (y as u128 + 1)) as u64
}

/// Inverse of [`pairing_p2`].
pub fn pairing_p2_inv(z: u64) -> (u64, u64) {
    let z = z as u128;
    // s is the unique integer with T(s) <= z < T(s+1), T(k) = k(k+1)/2
    let mut s = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0).floor() as u128;
    while s * (s + 1) / 2 > z {
        s -= 1;
    }
    while (s + 1) * (s + 2) / 2 <= z {
        s += 1;
    }
    let y = (s + 1) * (s + 2) / 2 - 1 - z;
    let x = s - y;
    (x as u64, y as u64)
}

/// Left fold of p_2: a polynomial bijection N0^n -> N0.
pub fn pairing_pn(tuple: &[u64]) -> Result<u64> {
    match tuple {
        [] => Err(Error::EmptyQuery),
        [first, rest @ ..] => {
            let mut acc = *first;
            for &x in rest {
                acc = pairing_p2(acc, x);
            }
            Ok(acc)
        }
    }
}

/// Inverse of [`pairing_pn`] for a known tuple length.
pub fn pairing_pn_inv(mut z: u64, n: usize) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::EmptyQuery);
    }
    let mut out = vec![0u64; n];
    for i in (1..n).rev() {
        let (head, x) = pairing_p2_inv(z);
        out[i] = x;
        z = head;
    }
    out[0] = z;
    Ok(out)
}
