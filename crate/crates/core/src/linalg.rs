//! Small dense kernels: LU determinant with partial pivoting and a pivoted
//! Pfaffian for complex antisymmetric matrices.

use num_complex::Complex64;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Square<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Square<T> {
    pub fn zeros(n: usize) -> Self {
        Square {
            n,
            data: vec![T::default(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Square { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let n = self.n;
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * n);
        head[lo * n..lo * n + n].swap_with_slice(&mut tail[..n]);
    }
}

/// Determinant via LU factorization with partial pivoting. Consumes the
/// matrix as scratch space.
pub fn lu_determinant(mut m: Square<f64>) -> f64 {
    let n = m.n;
    let mut det = 1.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| m.get(a, col).abs().total_cmp(&m.get(b, col).abs()))
            .unwrap();
        let pivot = m.get(pivot_row, col);
        if pivot == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            m.swap_rows(pivot_row, col);
            det = -det;
        }
        det *= pivot;
        let (upper, lower) = m.data.split_at_mut((col + 1) * n);
        let pivot_tail = &upper[col * n + col + 1..col * n + n];
        for row in lower.chunks_exact_mut(n) {
            let factor = row[col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for (x, &p) in row[col + 1..].iter_mut().zip(pivot_tail) {
                *x -= factor * p;
            }
        }
    }
    det
}

/// Pfaffian of a complex antisymmetric matrix by Parlett–Reid elimination
/// with pivoting. Only the strict upper triangle is trusted; the lower
/// triangle is rebuilt from it.
pub fn pfaffian(mut a: Square<Complex64>) -> Complex64 {
    let n = a.n;
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    for i in 0..n {
        a.set(i, i, Complex64::default());
        for j in i + 1..n {
            let v = a.get(i, j);
            a.set(j, i, -v);
        }
    }
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let kp = (k + 1..n)
            .max_by(|&x, &y| a.get(k, x).norm().total_cmp(&a.get(k, y).norm()))
            .unwrap();
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            for r in 0..n {
                let idx1 = r * n + k + 1;
                let idx2 = r * n + kp;
                a.data.swap(idx1, idx2);
            }
            pf = -pf;
        }
        let piv = a.get(k, k + 1);
        if piv.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| a.get(k, j) / piv).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|j| a.get(j, k + 1)).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    let v = a.get(i, j) + tau[ii] * col[jj] - col[ii] * tau[jj];
                    a.set(i, j, v);
                }
            }
        }
        k += 2;
    }
    pf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Laplace expansion along the first row; exponential, tiny n only.
    fn cofactor_det(m: &[Vec<f64>]) -> f64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        (0..n)
            .map(|c| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != c)
                            .map(|(_, v)| *v)
                            .collect()
                    })
                    .collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][c] * cofactor_det(&minor)
            })
            .sum()
    }

    /// Sum over perfect matchings; exponential, tiny n only.
    fn matching_pfaffian(a: &[Vec<Complex64>], idx: &[usize]) -> Complex64 {
        if idx.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        let first = idx[0];
        let mut acc = Complex64::new(0.0, 0.0);
        for (pos, &other) in idx.iter().enumerate().skip(1) {
            let rest: Vec<usize> = idx
                .iter()
                .enumerate()
                .filter(|(p, _)| *p != 0 && *p != pos)
                .map(|(_, &v)| v)
                .collect();
            let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * a[first][other] * matching_pfaffian(a, &rest);
        }
        acc
    }

    #[test]
    fn lu_matches_cofactor_on_random_small_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            for _ in 0..50 {
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect();
                let m = Square::from_fn(n, |i, j| rows[i][j]);
                let lu = lu_determinant(m);
                assert!((lu - cofactor_det(&rows)).abs() < 1e-12, "n = {n}");
            }
        }
    }

    #[test]
    fn singular_and_empty() {
        assert_eq!(lu_determinant(Square::zeros(3)), 0.0);
        assert_eq!(lu_determinant(Square::zeros(0)), 1.0);
        let m = Square::from_fn(2, |i, j| [[0.0, 1.0], [1.0, 0.0]][i][j]);
        assert_eq!(lu_determinant(m), -1.0);
    }

    #[test]
    fn pfaffian_matches_matching_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4, 6, 8] {
            for _ in 0..20 {
                let mut a = vec![vec![Complex64::default(); n]; n];
                for i in 0..n {
                    for j in i + 1..n {
                        let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        a[i][j] = v;
                        a[j][i] = -v;
                    }
                }
                let idx: Vec<usize> = (0..n).collect();
                let brute = matching_pfaffian(&a, &idx);
                let fast = pfaffian(Square::from_fn(n, |i, j| a[i][j]));
                assert!((brute - fast).norm() < 1e-12, "n = {n}");
                // Pf² = det for real parts as a cross-check.
                if n <= 6 {
                    let re: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|c| c.re).collect()).collect();
                    let pf_re = pfaffian(Square::from_fn(n, |i, j| Complex64::new(re[i][j], 0.0)));
                    assert!((pf_re.re * pf_re.re - cofactor_det(&re)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pfaffian_odd_is_zero() {
        assert_eq!(pfaffian(Square::zeros(3)), Complex64::new(0.0, 0.0));
    }
}
