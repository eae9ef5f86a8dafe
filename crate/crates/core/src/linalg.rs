//! Dense linear algebra used by the simulators and the modal analysis:
//! a row-major matrix, LU with partial pivoting and a nonsymmetric
//! eigensolver returning right and left eigenvectors.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn set_column(&mut self, j: usize, col: &[f64]) {
        for (i, v) in col.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_mat(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `P·A = L·U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    norm_1: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        if !a.is_finite() {
            return Err(Error::Dimension("LU input has non-finite entries".into()));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = f64::EPSILON * n as f64 * a.norm_inf().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny {
                return Err(Error::SingularMatrix { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / piv;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            norm_1: a.norm_1(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A·x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        self.substitute(&mut x);
        x
    }

    /// Solves `A·x = b` overwriting `b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let permuted: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        self.substitute(b);
    }

    fn substitute(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
    }

    /// 1-norm condition number `‖A‖₁·‖A⁻¹‖₁`, formed from the explicit
    /// inverse (the matrices here are at most a few dozen rows).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let mut inv_norm = 0.0_f64;
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            inv_norm = inv_norm.max(col.iter().map(|v| v.abs()).sum());
        }
        self.norm_1 * inv_norm
    }
}

/// Solves `A·x = b` and returns `x` with the 1-norm condition estimate.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    if b.len() != a.rows {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    let lu = Lu::factor(a)?;
    let x = lu.solve(b);
    Ok((x, lu.condition_estimate()))
}

/// Eigenvalues with right and left eigenvectors of a real square matrix.
///
/// `right[i]` satisfies `A·v = λ_i·v` and `left[i]` satisfies `wᵀ·A = λ_i·wᵀ`,
/// scaled so that `‖v‖₂ = 1` and `wᵀ·v = 1`. Pairs are sorted by real part
/// descending, then by `|Im λ|`, with positive imaginary part first.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    pub right: Vec<Vec<C64>>,
    pub left: Vec<Vec<C64>>,
    /// `|wᵀ·v| / (‖w‖·‖v‖)` before normalization; small values mean the
    /// mode is (nearly) defective.
    pub biorthogonality: Vec<f64>,
}

pub const MAX_EIG_DIM: usize = 64;

pub fn eig_dense(a: &Matrix) -> Result<EigenDecomposition> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::Dimension("eigensolver needs a square matrix".into()));
    }
    if n > MAX_EIG_DIM {
        return Err(Error::Dimension(format!("eigensolver limited to n <= {MAX_EIG_DIM}")));
    }
    if !a.is_finite() {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let m = DMatrix::from_row_slice(n, n, &a.data);
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    let mut values: Vec<C64> = schur.complex_eigenvalues().iter().copied().collect();
    pair_conjugates(&mut values);
    values.sort_by(|x, y| {
        y.re.partial_cmp(&x.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.abs().partial_cmp(&y.im.abs()).unwrap_or(std::cmp::Ordering::Equal))
            .then(y.im.partial_cmp(&x.im).unwrap_or(std::cmp::Ordering::Equal))
    });

    let scale = a.norm_inf().max(1.0);
    let at = a.transpose();
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut biorthogonality = Vec::with_capacity(n);
    for &lambda in &values {
        let v = inverse_iteration(a, lambda, scale)?;
        let mut w = inverse_iteration(&at, lambda, scale)?;
        let dot: C64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        biorthogonality.push(dot.norm() / (norm2(&w) * norm2(&v)));
        if dot.norm() > 0.0 {
            let inv = dot.inv();
            w.iter_mut().for_each(|x| *x *= inv);
        }
        right.push(v);
        left.push(w);
    }
    Ok(EigenDecomposition {
        values,
        right,
        left,
        biorthogonality,
    })
}

/// Makes complex eigenvalues exact conjugate pairs.
fn pair_conjugates(values: &mut [C64]) {
    let n = values.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || values[i].im == 0.0 {
            continue;
        }
        let target = values[i].conj();
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                (values[a] - target)
                    .norm()
                    .partial_cmp(&(values[b] - target).norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(j) = partner {
            let re = 0.5 * (values[i].re + values[j].re);
            let im = 0.5 * (values[i].im.abs() + values[j].im.abs());
            values[i] = C64::new(re, im);
            values[j] = C64::new(re, -im);
            used[i] = true;
            used[j] = true;
        }
    }
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvector for `lambda` by shifted inverse iteration in complex
/// arithmetic.
fn inverse_iteration(a: &Matrix, lambda: C64, scale: f64) -> Result<Vec<C64>> {
    let n = a.rows;
    let shift = lambda + C64::new(scale * 1e-11, scale * 1e-11);
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = C64::new(a[(i, j)], 0.0);
        }
        m[i * n + i] -= shift;
    }
    let lu = ComplexLu::factor(m, n);
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.1 * i as f64, 0.05 * (i % 3) as f64))
        .collect();
    for _ in 0..3 {
        lu.solve_in_place(&mut v);
        let nv = norm2(&v);
        if !nv.is_finite() || nv == 0.0 {
            return Err(Error::Eigen(format!("inverse iteration failed for {lambda}")));
        }
        // Fix the phase on the largest component for reproducibility.
        let (imax, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |b, (i, x)| if x.norm() > b.1 { (i, x.norm()) } else { b });
        let phase = v[imax].conj() / v[imax].norm();
        v.iter_mut().for_each(|x| *x *= phase / nv);
    }
    Ok(v)
}

struct ComplexLu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    fn factor(mut lu: Vec<C64>, n: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| {
                    lu[a * n + k]
                        .norm()
                        .partial_cmp(&lu[b * n + k].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(k);
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let mut piv = lu[k * n + k];
            if piv.norm() == 0.0 {
                // Exactly singular shift: nudge so inverse iteration still
                // returns the null vector direction.
                piv = C64::new(f64::EPSILON, 0.0);
                lu[k * n + k] = piv;
            }
            for i in k + 1..n {
                let l = lu[i * n + k] / piv;
                lu[i * n + k] = l;
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= l * u;
                }
            }
        }
        Self { n, lu, perm }
    }

    fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[i * n + j] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[i * n + j] * x[j];
                x[i] -= t;
            }
            x[i] /= self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
    }
}
