use crate::error::{invalid, Result};

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return invalid(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            ));
        }
        Ok(Self { diag, off })
    }

    pub fn constant(n: usize, d: f64, o: f64) -> Self {
        assert!(n > 0);
        Self {
            diag: vec![d; n],
            off: vec![o; n - 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        if n == 1 {
            out[0] = self.diag[0] * x[0];
            return;
        }
        out[0] = self.diag[0] * x[0] + self.off[0] * x[1];
        for i in 1..n - 1 {
            out[i] = self.off[i - 1] * x[i - 1] + self.diag[i] * x[i] + self.off[i] * x[i + 1];
        }
        out[n - 1] = self.off[n - 2] * x[n - 2] + self.diag[n - 1] * x[n - 1];
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.mul_vec(x, &mut out);
        out
    }

    /// `x^T B y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        let mut s = 0.0;
        for i in 0..n {
            s += self.diag[i] * x[i] * y[i];
        }
        for i in 0..n - 1 {
            s += self.off[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
        }
        s
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            diag: self.diag.iter().zip(&other.diag).map(|(x, y)| a * x + b * y).collect(),
            off: self.off.iter().zip(&other.off).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    /// `L D L^T` factorization; fails unless the matrix is positive definite.
    pub fn factor(&self) -> Result<TridiagonalFactor> {
        let n = self.dim();
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        d.push(self.diag[0]);
        for i in 0..n - 1 {
            if !(d[i] > 0.0) {
                return invalid(format!("matrix is not positive definite (pivot {i} = {})", d[i]));
            }
            let li = self.off[i] / d[i];
            l.push(li);
            d.push(self.diag[i + 1] - li * self.off[i]);
        }
        if !(d[n - 1] > 0.0) {
            return invalid(format!("matrix is not positive definite (pivot {} = {})", n - 1, d[n - 1]));
        }
        Ok(TridiagonalFactor { d, l })
    }
}

#[derive(Clone, Debug)]
pub struct TridiagonalFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        for i in 1..n {
            b[i] -= self.l[i - 1] * b[i - 1];
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.l[i] * b[i + 1];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
