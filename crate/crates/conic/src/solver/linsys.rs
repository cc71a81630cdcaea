//! Dense LDLᵀ for the quasi-definite reduced KKT matrix
//! `[[H + δI, Aᵀ], [A, −δI]]`.

/// Row-major symmetric matrix; only the lower triangle is read.
#[derive(Debug, Clone)]
pub struct DenseSym {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseSym {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn clear(&mut self) {
        self.data.fill(0.0);
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.data[r * self.n + c] += v;
    }
}

#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    /// Unit lower factor, row-major, strictly-lower part used.
    l: Vec<f64>,
    d: Vec<f64>,
    /// Number of pivots that needed dynamic regularization.
    #[cfg_attr(not(test), allow(dead_code))]
    pub bumped: usize,
}

impl Ldl {
    /// Factors `m` in place order. `signs[i]` is the expected pivot sign;
    /// pivots with the wrong sign or tiny magnitude are replaced by
    /// `signs[i]·delta`.
    pub fn factor(m: &DenseSym, signs: &[f64], eps: f64, delta: f64) -> Option<Self> {
        let n = m.n;
        let mut l = m.data.clone();
        let mut d = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut bumped = 0;
        for j in 0..n {
            let row_j = j * n;
            for k in 0..j {
                v[k] = l[row_j + k] * d[k];
            }
            let mut dj = l[row_j + j] - dot(&l[row_j..row_j + j], &v[..j]);
            if !dj.is_finite() {
                return None;
            }
            if signs[j] * dj < eps {
                dj = signs[j] * delta;
                bumped += 1;
            }
            d[j] = dj;
            let tail = &mut l[(j + 1) * n..];
            for i in j + 1..n {
                let row_i = (i - j - 1) * n;
                let s = tail[row_i + j] - dot(&tail[row_i..row_i + j], &v[..j]);
                tail[row_i + j] = s / dj;
            }
        }
        Some(Self { n, l, d, bumped })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            b[i] -= dot(row, &b[..i]);
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let bi = b[i];
            if bi != 0.0 {
                let row = &self.l[i * n..i * n + i];
                for (bk, lik) in b[..i].iter_mut().zip(row) {
                    *bk -= lik * bi;
                }
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize the hot loop.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_quasidefinite_system() {
        // [[4, 1, 1], [1, 3, 0], [1, 0, -2]]
        let mut m = DenseSym::zeros(3);
        m.add(0, 0, 4.0);
        m.add(1, 0, 1.0);
        m.add(1, 1, 3.0);
        m.add(2, 0, 1.0);
        m.add(2, 2, -2.0);
        let f = Ldl::factor(&m, &[1.0, 1.0, -1.0], 1e-14, 1e-8).unwrap();
        assert_eq!(f.bumped, 0);
        let x = [1.0, -2.0, 0.5];
        let mut b = vec![
            4.0 * x[0] + x[1] + x[2],
            x[0] + 3.0 * x[1],
            x[0] - 2.0 * x[2],
        ];
        f.solve(&mut b);
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn bumps_wrong_sign_pivot() {
        let mut m = DenseSym::zeros(2);
        m.add(0, 0, 0.0);
        m.add(1, 1, 1.0);
        let f = Ldl::factor(&m, &[1.0, 1.0], 1e-14, 1e-8).unwrap();
        assert_eq!(f.bumped, 1);
    }
}
