//! Interval vectors and matrices.

use std::ops::{Deref, DerefMut, Index, IndexMut};

use super::{Interval, IntervalError};

#[derive(Clone, Debug, PartialEq, Default)]
pub struct IVector(pub Vec<Interval>);

impl IVector {
    pub fn zeros(n: usize) -> Self {
        IVector(vec![Interval::ZERO; n])
    }

    pub fn from_points(x: &[f64]) -> Self {
        IVector(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mid).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.0.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn hull(&self, other: &IVector) -> IVector {
        assert_eq!(self.len(), other.len());
        IVector(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }

    pub fn intersect(&self, other: &IVector) -> Option<IVector> {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a.intersect(b)).collect::<Option<Vec<_>>>().map(IVector)
    }

    pub fn add(&self, other: &IVector) -> IVector {
        assert_eq!(self.len(), other.len());
        IVector(self.0.iter().zip(&other.0).map(|(a, b)| *a + *b).collect())
    }

    pub fn sub(&self, other: &IVector) -> IVector {
        assert_eq!(self.len(), other.len());
        IVector(self.0.iter().zip(&other.0).map(|(a, b)| *a - *b).collect())
    }

    pub fn scale(&self, c: Interval) -> IVector {
        IVector(self.0.iter().map(|a| *a * c).collect())
    }

    pub fn inflate(&self, r: f64) -> IVector {
        IVector(self.0.iter().map(|a| a.inflate(r)).collect())
    }

    /// Componentwise closed inclusion `other ⊆ self`.
    pub fn encloses(&self, other: &IVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.encloses(b))
    }

    pub fn interior_encloses(&self, other: &IVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.interior_encloses(b))
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.len() == x.len() && self.0.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(Interval::to_hex).collect::<Vec<_>>().join(" ")
    }

    pub fn from_hex(s: &str) -> Result<IVector, IntervalError> {
        s.split_whitespace().map(Interval::from_hex).collect::<Result<Vec<_>, _>>().map(IVector)
    }
}

impl Deref for IVector {
    type Target = Vec<Interval>;
    fn deref(&self) -> &Vec<Interval> {
        &self.0
    }
}

impl DerefMut for IVector {
    fn deref_mut(&mut self) -> &mut Vec<Interval> {
        &mut self.0
    }
}

impl From<Vec<Interval>> for IVector {
    fn from(v: Vec<Interval>) -> Self {
        IVector(v)
    }
}

impl FromIterator<Interval> for IVector {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IVector(iter.into_iter().collect())
    }
}

/// Row-major interval matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct IMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMatrix { rows, cols, data: vec![Interval::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Interval>) -> Self {
        assert_eq!(data.len(), rows * cols);
        IMatrix { rows, cols, data }
    }

    pub fn from_f64(rows: usize, cols: usize, data: &[f64]) -> Self {
        IMatrix::from_vec(rows, cols, data.iter().map(|&x| Interval::point(x)).collect())
    }

    pub fn from_columns(cols: &[IVector]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        let mut m = IMatrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Interval] {
        &self.data
    }

    pub fn column(&self, j: usize) -> IVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[Interval] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mid(&self) -> Vec<f64> {
        self.data.iter().map(Interval::mid).collect()
    }

    pub fn mid_matrix(&self) -> IMatrix {
        IMatrix::from_f64(self.rows, self.cols, &self.mid())
    }

    pub fn transpose(&self) -> IMatrix {
        let mut t = IMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn max_width(&self) -> f64 {
        self.data.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn add(&self, o: &IMatrix) -> IMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        IMatrix::from_vec(self.rows, self.cols, self.data.iter().zip(&o.data).map(|(a, b)| *a + *b).collect())
    }

    pub fn sub(&self, o: &IMatrix) -> IMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        IMatrix::from_vec(self.rows, self.cols, self.data.iter().zip(&o.data).map(|(a, b)| *a - *b).collect())
    }

    pub fn scale(&self, c: Interval) -> IMatrix {
        IMatrix::from_vec(self.rows, self.cols, self.data.iter().map(|a| *a * c).collect())
    }

    /// Matrix-vector product; panics on dimension mismatch.
    pub fn mul_vec(&self, x: &[Interval]) -> IVector {
        assert_eq!(self.cols, x.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Interval::ZERO;
                for (a, b) in self.row(i).iter().zip(x) {
                    acc += *a * *b;
                }
                acc
            })
            .collect()
    }

    pub fn matvec(&self, x: &IVector) -> Result<IVector, IntervalError> {
        if self.cols != x.len() {
            return Err(IntervalError::Dimension(format!("{}x{} matrix times {}-vector", self.rows, self.cols, x.len())));
        }
        Ok(self.mul_vec(x))
    }

    /// Matrix product; panics on dimension mismatch.
    pub fn mul(&self, o: &IMatrix) -> IMatrix {
        assert_eq!(self.cols, o.rows, "matrix product dimension mismatch");
        let mut out = IMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Interval::ZERO {
                    continue;
                }
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += a * o.data[k * o.cols + j];
                }
            }
        }
        out
    }

    /// Enclosure of the determinant by interval elimination.
    pub fn det(&self) -> Result<Interval, IntervalError> {
        if self.rows != self.cols {
            return Err(IntervalError::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 2 {
            return Ok(self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)]);
        }
        let mut a = self.clone();
        let mut det = Interval::ONE;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[(x, k)].mig().total_cmp(&a[(y, k)].mig())).unwrap();
            if a[(p, k)].contains_zero() {
                // cannot pivot safely; fall back to a crude bound
                return Ok(self.det_expansion());
            }
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let piv = a[(k, k)];
            det = det * piv;
            for i in k + 1..n {
                let f = a[(i, k)].div(&piv)?;
                for j in k..n {
                    let v = a[(i, j)] - f * a[(k, j)];
                    a[(i, j)] = v;
                }
            }
        }
        Ok(det)
    }

    fn det_expansion(&self) -> Interval {
        let n = self.rows;
        if n == 1 {
            return self[(0, 0)];
        }
        let mut acc = Interval::ZERO;
        for j in 0..n {
            let minor: Vec<Interval> = (1..n)
                .flat_map(|i| (0..n).filter(move |&c| c != j).map(move |c| (i, c)))
                .map(|(i, c)| self[(i, c)])
                .collect();
            let m = IMatrix::from_vec(n - 1, n - 1, minor).det_expansion();
            let term = self[(0, j)] * m;
            acc = if j % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Enclosure of the inverses of all matrices in `self` (interval Gauss-Jordan).
    pub fn inverse(&self) -> Result<IMatrix, IntervalError> {
        if self.rows != self.cols {
            return Err(IntervalError::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = IMatrix::identity(n);
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[(x, k)].mig().total_cmp(&a[(y, k)].mig())).unwrap();
            if a[(p, k)].contains_zero() {
                return Err(IntervalError::Singular);
            }
            a.swap_rows(p, k);
            inv.swap_rows(p, k);
            let piv = a[(k, k)];
            for j in 0..n {
                a[(k, j)] = a[(k, j)].div(&piv)?;
                inv[(k, j)] = inv[(k, j)].div(&piv)?;
            }
            a[(k, k)] = Interval::ONE;
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f == Interval::ZERO {
                    continue;
                }
                for j in 0..n {
                    a[(i, j)] = a[(i, j)] - f * a[(k, j)];
                    inv[(i, j)] = inv[(i, j)] - f * inv[(k, j)];
                }
                a[(i, k)] = Interval::ZERO;
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for IMatrix {
    type Output = Interval;
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

/// `A·X + b`.
pub fn affine_image(a: &IMatrix, b: &IVector, x: &IVector) -> Result<IVector, IntervalError> {
    let ax = a.matvec(x)?;
    if ax.len() != b.len() {
        return Err(IntervalError::Dimension(format!("offset has length {}, expected {}", b.len(), ax.len())));
    }
    Ok(ax.add(b))
}

/// Inverse of `y = A·x + b`, as `(A⁻¹, -A⁻¹·b)`.
pub fn invert_affine(a: &IMatrix, b: &IVector) -> Result<(IMatrix, IVector), IntervalError> {
    if a.det()?.contains_zero() {
        return Err(IntervalError::Singular);
    }
    let inv = a.inverse()?;
    let off = -inv.matvec(b)?;
    Ok((inv, off))
}

impl std::ops::Neg for IVector {
    type Output = IVector;
    fn neg(self) -> IVector {
        IVector(self.0.into_iter().map(|x| -x).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_matrix_determinant() {
        let c = super::super::parse_decimal("0.000656767").unwrap();
        let m = IMatrix::from_vec(2, 2, vec![-Interval::ONE, c, -c, -Interval::ONE]);
        let d = m.det().unwrap();
        assert!(d.contains(1.000_000_431_342_892_3), "{d:?}");
        assert!(!d.contains_zero());
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = IMatrix::from_f64(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(invert_affine(&m, &IVector::zeros(2)).is_err());
    }

    #[test]
    fn inverse_of_three_by_three() {
        let m = IMatrix::from_f64(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                assert!(prod[(i, j)].contains(if i == j { 1.0 } else { 0.0 }));
                assert!(prod[(i, j)].width() < 1e-14);
            }
        }
    }

    #[test]
    fn affine_dimension_mismatch() {
        let a = IMatrix::identity(2);
        assert!(affine_image(&a, &IVector::zeros(2), &IVector::zeros(3)).is_err());
    }
}
