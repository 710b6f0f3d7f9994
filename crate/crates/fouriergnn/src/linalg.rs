//! Dense row-major matrix kernels shared by the forward and backward passes.

use num_complex::Complex64;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_re_im(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Self {
        debug_assert_eq!(re.len(), rows * cols);
        debug_assert_eq!(im.len(), rows * cols);
        CMat {
            rows,
            cols,
            data: re
                .iter()
                .zip(im.iter())
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    /// Conjugate transpose.
    pub fn conj_t(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }
}

/// out = a (m x k) * b (k x n), complex, accumulating row-major.
pub fn cmm(a: &[Complex64], m: usize, k: usize, b: &[Complex64], n: usize, out: &mut [Complex64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    out.fill(Complex64::new(0.0, 0.0));
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow.iter()) {
                *o += av * bv;
            }
        }
    }
}

/// out += a^H (m x k)^H * g (m x n)  =>  (k x n). Parameter gradient kernel.
pub fn cmm_conj_t_left_acc(
    a: &[Complex64],
    m: usize,
    k: usize,
    g: &[Complex64],
    n: usize,
    out: &mut [Complex64],
) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(g.len(), m * n);
    debug_assert_eq!(out.len(), k * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let grow = &g[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            let conj_a = av.conj();
            let orow = &mut out[p * n..(p + 1) * n];
            for (o, &gv) in orow.iter_mut().zip(grow.iter()) {
                *o += conj_a * gv;
            }
        }
    }
}

/// out = a (m x n) * b (n x p), real.
pub fn rmm(a: &[f64], m: usize, n: usize, b: &[f64], p: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * n);
    debug_assert_eq!(b.len(), n * p);
    debug_assert_eq!(out.len(), m * p);
    out.fill(0.0);
    for i in 0..m {
        let arow = &a[i * n..(i + 1) * n];
        let orow = &mut out[i * p..(i + 1) * p];
        for (q, &av) in arow.iter().enumerate() {
            let brow = &b[q * p..(q + 1) * p];
            for (o, &bv) in orow.iter_mut().zip(brow.iter()) {
                *o += av * bv;
            }
        }
    }
}

/// out += a^T (m x n)^T * g (m x p)  =>  (n x p).
pub fn rmm_t_left_acc(a: &[f64], m: usize, n: usize, g: &[f64], p: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * n);
    debug_assert_eq!(g.len(), m * p);
    debug_assert_eq!(out.len(), n * p);
    for i in 0..m {
        let arow = &a[i * n..(i + 1) * n];
        let grow = &g[i * p..(i + 1) * p];
        for (q, &av) in arow.iter().enumerate() {
            let orow = &mut out[q * p..(q + 1) * p];
            for (o, &gv) in orow.iter_mut().zip(grow.iter()) {
                *o += av * gv;
            }
        }
    }
}

/// out = g (m x p) * b^T (n x p)^T  =>  (m x n).
pub fn rmm_t_right(g: &[f64], m: usize, p: usize, b: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(g.len(), m * p);
    debug_assert_eq!(b.len(), n * p);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let grow = &g[i * p..(i + 1) * p];
        let orow = &mut out[i * n..(i + 1) * n];
        for (j, o) in orow.iter_mut().enumerate() {
            let brow = &b[j * p..(j + 1) * p];
            let mut acc = 0.0;
            for (&gv, &bv) in grow.iter().zip(brow.iter()) {
                acc += gv * bv;
            }
            *o = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random_cmat(rows: usize, cols: usize, seed: u64) -> CMat {
        let mut rng = Rng::new(seed);
        CMat {
            rows,
            cols,
            data: (0..rows * cols)
                .map(|_| Complex64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)))
                .collect(),
        }
    }

    #[test]
    fn cmm_matches_scalar_loops() {
        let a = random_cmat(3, 4, 1);
        let b = random_cmat(4, 2, 2);
        let mut out = vec![Complex64::new(0.0, 0.0); 6];
        cmm(&a.data, 3, 4, &b.data, 2, &mut out);
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..4 {
                    acc += a.at(i, p) * b.at(p, j);
                }
                assert!((out[i * 2 + j] - acc).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conj_t_left_matches_definition() {
        let a = random_cmat(5, 3, 3);
        let g = random_cmat(5, 2, 4);
        let mut out = vec![Complex64::new(0.0, 0.0); 6];
        cmm_conj_t_left_acc(&a.data, 5, 3, &g.data, 2, &mut out);
        for p in 0..3 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..5 {
                    acc += a.at(i, p).conj() * g.at(i, j);
                }
                assert!((out[p * 2 + j] - acc).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn real_kernels_match_loops() {
        let mut rng = Rng::new(9);
        let a: Vec<f64> = (0..6).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..12).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let mut out = vec![0.0; 8];
        rmm(&a, 2, 3, &b, 4, &mut out);
        for i in 0..2 {
            for j in 0..4 {
                let mut acc = 0.0;
                for p in 0..3 {
                    acc += a[i * 3 + p] * b[p * 4 + j];
                }
                assert!((out[i * 4 + j] - acc).abs() < 1e-12);
            }
        }

        let mut tl = vec![0.0; 12];
        rmm_t_left_acc(&a, 2, 3, &out, 4, &mut tl);
        for p in 0..3 {
            for j in 0..4 {
                let mut acc = 0.0;
                for i in 0..2 {
                    acc += a[i * 3 + p] * out[i * 4 + j];
                }
                assert!((tl[p * 4 + j] - acc).abs() < 1e-12);
            }
        }

        let mut tr = vec![0.0; 6];
        rmm_t_right(&out, 2, 4, &b, 3, &mut tr);
        for i in 0..2 {
            for j in 0..3 {
                let mut acc = 0.0;
                for p in 0..4 {
                    acc += out[i * 4 + p] * b[j * 4 + p];
                }
                assert!((tr[i * 3 + j] - acc).abs() < 1e-12);
            }
        }
    }
}
