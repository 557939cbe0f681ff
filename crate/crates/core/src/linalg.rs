//! Dense complex linear algebra for few-qubit systems: states, operators,
//! tensor algebra, partial trace, a Hermitian eigensolver and Haar sampling.
//!
//! Subsystem ordering convention: index 0 is the leftmost tensor factor, so
//! for a two-qubit basis state |ab⟩ the qubit `a` is subsystem 0 and the
//! flattened index is `2a + b`.

use num_complex::Complex;

use crate::error::{QicError, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// The four Bell states, in fixed ordinal order 0..3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellIndex {
    PsiMinus = 0,
    PsiPlus = 1,
    PhiPlus = 2,
    PhiMinus = 3,
}

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [
        BellIndex::PsiMinus,
        BellIndex::PsiPlus,
        BellIndex::PhiPlus,
        BellIndex::PhiMinus,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Builds a matrix from rows of `(re, im)` pairs; panics on ragged input.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Self {
        let nr = rows.len();
        let nc = rows[0].len();
        Self::from_fn(nr, nc, |r, c| {
            assert_eq!(rows[r].len(), nc, "ragged row");
            Complex::new(T::from_f64(rows[r][c].0), T::from_f64(rows[r][c].1))
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scaled_re(&self, s: T) -> Self {
        self.scaled(Complex::new(s, T::zero()))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex<T> {
        assert_eq!(self.rows, self.cols, "trace of non-square matrix");
        (0..self.rows)
            .map(|i| self.get(i, i))
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Kronecker product, `self` as the left (most significant) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        out.set(
                            r1 * other.rows + r2,
                            c1 * other.cols + c2,
                            a * other.get(r2, c2),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let mut worst = T::zero();
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Eigenvalues of a Hermitian matrix, descending, by cyclic Jacobi
    /// rotations. Errors if the input is not Hermitian within tolerance.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<T>> {
        let defect = self.hermitian_defect();
        if defect > T::validation_tol() {
            return Err(QicError::NotHermitian(defect.as_f64()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(vec![]);
        }
        if n == 1 {
            return Ok(vec![self.get(0, 0).re]);
        }

        let mut a = self.clone();
        // Symmetrize once so rotations act on an exactly Hermitian matrix.
        for r in 0..n {
            for c in (r + 1)..n {
                let avg = (a.get(r, c) + a.get(c, r).conj()).scale(T::from_f64(0.5));
                a.set(r, c, avg);
                a.set(c, r, avg.conj());
            }
            let d = a.get(r, r);
            a.set(r, r, Complex::new(d.re, T::zero()));
        }

        let scale = a.frobenius_norm().max(T::one());
        let target = T::epsilon() * T::from_f64(32.0) * scale;
        for _sweep in 0..64 {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a.get(p, q).norm_sqr();
                }
            }
            if (off + off).sqrt() <= target {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, p, q);
                }
            }
        }

        let mut eigs: Vec<T> = (0..n).map(|i| a.get(i, i).re).collect();
        eigs.sort_by(|x, y| y.partial_cmp(x).expect("NaN eigenvalue"));
        Ok(eigs)
    }
}

/// One two-sided Jacobi rotation zeroing the (p, q) entry of a Hermitian
/// matrix in place.
fn jacobi_rotate<T: Scalar>(a: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a.get(p, q);
    let mag = apq.norm();
    if mag <= T::min_positive_value() * T::from_f64(16.0) {
        return;
    }
    let phase = apq.unscale(mag);
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (mag + mag);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    let n = a.rows();
    // Column update: A <- A R with R_pp = c, R_pq = s e^{i phi},
    // R_qp = -s e^{-i phi}, R_qq = c.
    let s_phase = phase.scale(s);
    for i in 0..n {
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        a.set(i, p, aip.scale(c) - aiq * s_phase.conj());
        a.set(i, q, aip * s_phase + aiq.scale(c));
    }
    // Row update: A <- R^dagger A.
    for j in 0..n {
        let apj = a.get(p, j);
        let aqj = a.get(q, j);
        a.set(p, j, apj.scale(c) - aqj * s_phase);
        a.set(q, j, apj * s_phase.conj() + aqj.scale(c));
    }
    // Clean the rotated entries against roundoff.
    let dp = a.get(p, p);
    let dq = a.get(q, q);
    a.set(p, p, Complex::new(dp.re, T::zero()));
    a.set(q, q, Complex::new(dq.re, T::zero()));
    a.set(p, q, Complex::new(T::zero(), T::zero()));
    a.set(q, p, Complex::new(T::zero(), T::zero()));
}

/// Haar-random unitary: complex Gaussian matrix orthonormalized by modified
/// Gram-Schmidt. MGS produces the QR factorization whose triangular factor
/// has a positive real diagonal, which is exactly the phase convention that
/// makes the result Haar-distributed.
pub fn haar_random_unitary<T: Scalar>(dim: usize, rng: &mut RngStream) -> ComplexMatrix<T> {
    assert!(dim >= 1, "haar_random_unitary requires dim >= 1");
    let mut cols: Vec<Vec<Complex<T>>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.complex_normal()).collect())
        .collect();
    for j in 0..dim {
        // Two orthogonalization passes keep the columns orthonormal to
        // machine precision.
        for _ in 0..2 {
            for i in 0..j {
                let proj = inner(&cols[i], &cols[j]);
                let (ci, cj) = split_pair(&mut cols, i, j);
                for (a, b) in ci.iter().zip(cj.iter_mut()) {
                    *b -= a * proj;
                }
            }
        }
        let norm = norm(&cols[j]);
        for v in cols[j].iter_mut() {
            *v = v.unscale(norm);
        }
    }
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            u.set(i, j, *v);
        }
    }
    u
}

fn inner<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v)
}

fn norm<T: Scalar>(a: &[Complex<T>]) -> T {
    a.iter()
        .map(|x| x.norm_sqr())
        .fold(T::zero(), |acc, v| acc + v)
        .sqrt()
}

fn split_pair<T>(v: &mut [Vec<Complex<T>>], i: usize, j: usize) -> (&[Complex<T>], &mut [Complex<T>]) {
    assert!(i < j);
    let (lo, hi) = v.split_at_mut(j);
    (&lo[i], &mut hi[0])
}

/// Unit vector on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        let dev = (norm - T::one()).abs();
        if dev > T::validation_tol() {
            return Err(QicError::NotUnitVector(dev.as_f64()));
        }
        Ok(Self { x, y, z })
    }

    /// Normalizes an arbitrary non-zero vector onto the sphere.
    pub fn normalized(x: T, y: T, z: T) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if norm <= T::from_f64(1e-12) {
            return Err(QicError::InvalidParameter(
                "cannot normalize near-zero Bloch vector".into(),
            ));
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn antipode(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Haar-uniform point on the sphere.
    pub fn random(rng: &mut RngStream) -> Self {
        loop {
            let x: T = rng.standard_normal();
            let y: T = rng.standard_normal();
            let z: T = rng.standard_normal();
            if let Ok(v) = Self::normalized(x, y, z) {
                return v;
            }
        }
    }

    pub fn plus_x() -> Self {
        Self {
            x: T::one(),
            y: T::zero(),
            z: T::zero(),
        }
    }

    pub fn plus_y() -> Self {
        Self {
            x: T::zero(),
            y: T::one(),
            z: T::zero(),
        }
    }

    pub fn plus_z() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
            z: T::one(),
        }
    }
}

/// Qubit state aligned with a Bloch vector: |0⟩ maps to +z.
pub fn bloch_to_state<T: Scalar>(r: &BlochVector<T>) -> PureState<T> {
    let one = T::one();
    let z = r.z.min(one).max(-one);
    let theta = z.acos();
    let phi = r.y.atan2(r.x);
    let half = T::from_f64(0.5);
    let c = (theta * half).cos();
    let s = (theta * half).sin();
    let amp0 = Complex::new(c, T::zero());
    let amp1 = Complex::new(phi.cos() * s, phi.sin() * s);
    PureState::new_unchecked(vec![amp0, amp1], vec![2])
}

/// Pure state vector over an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    amps: Vec<Complex<T>>,
    dims: Vec<usize>,
}

impl<T: Scalar> PureState<T> {
    pub fn new(amps: Vec<Complex<T>>, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != amps.len() || dims.is_empty() {
            return Err(QicError::DimensionMismatch(format!(
                "dims product {} vs amplitude count {}",
                total,
                amps.len()
            )));
        }
        let norm2: T = amps.iter().map(|a| a.norm_sqr()).sum();
        let dev = (norm2.sqrt() - T::one()).abs();
        if dev > T::validation_tol() {
            return Err(QicError::NotNormalized(dev.as_f64()));
        }
        Ok(Self { amps, dims })
    }

    pub(crate) fn new_unchecked(amps: Vec<Complex<T>>, dims: Vec<usize>) -> Self {
        Self { amps, dims }
    }

    /// Computational basis state |index⟩ on the given subsystem dims.
    pub fn basis(dims: &[usize], index: usize) -> Self {
        let total: usize = dims.iter().product();
        assert!(index < total);
        let mut amps = vec![Complex::new(T::zero(), T::zero()); total];
        amps[index] = Complex::new(T::one(), T::zero());
        Self {
            amps,
            dims: dims.to_vec(),
        }
    }

    pub fn qubit0() -> Self {
        Self::basis(&[2], 0)
    }

    pub fn qubit1() -> Self {
        Self::basis(&[2], 1)
    }

    /// One of the four Bell states on two qubits.
    pub fn bell(which: BellIndex) -> Self {
        let h = T::from_f64(std::f64::consts::FRAC_1_SQRT_2);
        let zero = Complex::new(T::zero(), T::zero());
        let p = Complex::new(h, T::zero());
        let m = Complex::new(-h, T::zero());
        let amps = match which {
            BellIndex::PsiMinus => vec![zero, p, m, zero],
            BellIndex::PsiPlus => vec![zero, p, p, zero],
            BellIndex::PhiPlus => vec![p, zero, zero, p],
            BellIndex::PhiMinus => vec![p, zero, zero, m],
        };
        Self {
            amps,
            dims: vec![2, 2],
        }
    }

    /// Haar-random pure state on the given dims.
    pub fn haar_random(dims: &[usize], rng: &mut RngStream) -> Self {
        let total: usize = dims.iter().product();
        let mut amps: Vec<Complex<T>> = (0..total).map(|_| rng.complex_normal()).collect();
        let norm2: T = amps.iter().map(|a| a.norm_sqr()).sum();
        let norm = norm2.sqrt();
        for a in amps.iter_mut() {
            *a = a.unscale(norm);
        }
        Self {
            amps,
            dims: dims.to_vec(),
        }
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Tensor product; `self` becomes the leading subsystems.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amps, dims }
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v)
    }

    pub fn to_density(&self) -> DensityOperator<T> {
        let n = self.dim();
        let mut mat = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                mat.set(r, c, self.amps[r] * self.amps[c].conj());
            }
        }
        DensityOperator {
            mat,
            dims: self.dims.clone(),
        }
    }

    /// Applies a unitary to one subsystem.
    pub fn apply_unitary(&self, u: &ComplexMatrix<T>, target: usize) -> Result<Self> {
        let dims = &self.dims;
        if target >= dims.len() {
            return Err(QicError::IndexOutOfRange {
                index: target,
                count: dims.len(),
            });
        }
        let d = dims[target];
        if u.rows() != d || u.cols() != d {
            return Err(QicError::DimensionMismatch(format!(
                "unitary is {}x{}, subsystem dim {}",
                u.rows(),
                u.cols(),
                d
            )));
        }
        let stride: usize = dims[target + 1..].iter().product();
        let block = d * stride;
        let mut out = self.amps.clone();
        for base in 0..self.amps.len() / block {
            for off in 0..stride {
                let idx = |t: usize| base * block + t * stride + off;
                let mut new_vals = vec![Complex::new(T::zero(), T::zero()); d];
                for (r, nv) in new_vals.iter_mut().enumerate() {
                    for c in 0..d {
                        *nv += u.get(r, c) * self.amps[idx(c)];
                    }
                }
                for (t, nv) in new_vals.into_iter().enumerate() {
                    out[idx(t)] = nv;
                }
            }
        }
        Ok(Self {
            amps: out,
            dims: dims.clone(),
        })
    }
}

/// Density operator with a subsystem dimension list.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T> {
    mat: ComplexMatrix<T>,
    dims: Vec<usize>,
}

impl<T: Scalar> DensityOperator<T> {
    /// Validates Hermiticity, unit trace and positivity before wrapping.
    pub fn new(mat: ComplexMatrix<T>, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if mat.rows() != total || mat.cols() != total || dims.is_empty() {
            return Err(QicError::DimensionMismatch(format!(
                "matrix {}x{} vs dims product {}",
                mat.rows(),
                mat.cols(),
                total
            )));
        }
        let defect = mat.hermitian_defect();
        if defect > T::validation_tol() {
            return Err(QicError::NotHermitian(defect.as_f64()));
        }
        let tr = mat.trace();
        let tr_dev = ((tr.re - T::one()).abs() + tr.im.abs()).as_f64();
        if tr_dev > T::validation_tol().as_f64() {
            return Err(QicError::NotUnitTrace(tr_dev));
        }
        let eigs = mat.hermitian_eigenvalues()?;
        if let Some(min) = eigs.last() {
            if *min < -T::psd_tol() {
                return Err(QicError::NotPositive((*min).as_f64()));
            }
        }
        Ok(Self { mat, dims })
    }

    /// Wraps without validation; for internal paths whose output is valid by
    /// construction.
    pub(crate) fn new_unchecked(mat: ComplexMatrix<T>, dims: Vec<usize>) -> Self {
        Self { mat, dims }
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let total: usize = dims.iter().product();
        let mat = ComplexMatrix::identity(total).scaled_re(T::one() / T::from_f64(total as f64));
        Self {
            mat,
            dims: dims.to_vec(),
        }
    }

    /// Random full-support mixed state: partial trace of a Haar-random pure
    /// state on the doubled system. The reduced matrix is contracted
    /// directly from the amplitudes, never materializing the doubled-system
    /// operator.
    pub fn random_mixed(dims: &[usize], rng: &mut RngStream) -> Self {
        let total: usize = dims.iter().product();
        let doubled = PureState::<T>::haar_random(&[total, total], rng);
        let amps = doubled.amplitudes();
        let mut mat = ComplexMatrix::zeros(total, total);
        for r in 0..total {
            for c in 0..total {
                let mut acc = Complex::new(T::zero(), T::zero());
                for e in 0..total {
                    acc += amps[r * total + e] * amps[c * total + e].conj();
                }
                mat.set(r, c, acc);
            }
        }
        Self {
            mat,
            dims: dims.to_vec(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Reinterprets the subsystem structure without touching entries; the
    /// new dims must have the same product.
    pub fn regroup(&self, dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim() {
            return Err(QicError::DimensionMismatch(format!(
                "regroup product {} vs dimension {}",
                total,
                self.dim()
            )));
        }
        Ok(Self {
            mat: self.mat.clone(),
            dims: dims.to_vec(),
        })
    }

    /// Tensor product; `self` becomes the leading subsystems.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            mat: self.mat.kron(&other.mat),
            dims,
        }
    }

    /// Traces out every subsystem not listed in `keep`; kept subsystems stay
    /// in their original order. An empty `keep` yields the 1x1 matrix [Tr rho].
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        for &k in keep {
            if k >= n {
                return Err(QicError::IndexOutOfRange { index: k, count: n });
            }
        }
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let traced: Vec<usize> = (0..n).filter(|i| !sorted.contains(i)).collect();

        let strides = strides(&self.dims);
        let kept_offsets = axis_offsets(&self.dims, &strides, &sorted);
        let traced_offsets = axis_offsets(&self.dims, &strides, &traced);

        let kept_dim: usize = sorted.iter().map(|&i| self.dims[i]).product();
        let mut mat = ComplexMatrix::zeros(kept_dim, kept_dim);
        for (r, r_off) in kept_offsets.iter().enumerate() {
            for (c, c_off) in kept_offsets.iter().enumerate() {
                let mut acc = Complex::new(T::zero(), T::zero());
                for t_off in &traced_offsets {
                    acc += self.mat.get(r_off + t_off, c_off + t_off);
                }
                mat.set(r, c, acc);
            }
        }
        let dims: Vec<usize> = if sorted.is_empty() {
            vec![1]
        } else {
            sorted.iter().map(|&i| self.dims[i]).collect()
        };
        Ok(Self { mat, dims })
    }

    /// ⟨psi|rho|psi⟩ as a real number.
    pub fn pure_fidelity(&self, psi: &PureState<T>) -> Result<T> {
        if psi.dim() != self.dim() {
            return Err(QicError::DimensionMismatch(format!(
                "state dim {} vs operator dim {}",
                psi.dim(),
                self.dim()
            )));
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                acc += psi.amplitudes()[r].conj() * self.mat.get(r, c) * psi.amplitudes()[c];
            }
        }
        Ok(acc.re)
    }

    /// Conjugates by an operator embedded on one subsystem:
    /// rho -> (I ⊗ K ⊗ I) rho (I ⊗ K ⊗ I)†. `op` may be rectangular, in
    /// which case the target subsystem changes dimension.
    pub fn conjugate_embedded(&self, op: &ComplexMatrix<T>, target: usize) -> Result<Self> {
        let full = embed_operator(op, &self.dims, target)?;
        let mat = full.matmul(&self.mat).matmul(&full.adjoint());
        let mut dims = self.dims.clone();
        dims[target] = op.rows();
        Ok(Self { mat, dims })
    }

    /// Sum of conjugations (used by Kraus channel application).
    pub(crate) fn kraus_apply(&self, kraus: &[ComplexMatrix<T>], target: usize) -> Result<Self> {
        let mut acc: Option<Self> = None;
        for k in kraus {
            let term = self.conjugate_embedded(k, target)?;
            acc = Some(match acc {
                None => term,
                Some(prev) => Self {
                    mat: prev.mat.add(&term.mat),
                    dims: term.dims,
                },
            });
        }
        acc.ok_or_else(|| QicError::InvalidParameter("empty Kraus list".into()))
    }
}

/// Row-major strides for a dims list.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flattened offsets of all coordinate combinations over a subset of axes.
fn axis_offsets(dims: &[usize], strides: &[usize], axes: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for &ax in axes {
        let mut next = Vec::with_capacity(offsets.len() * dims[ax]);
        for off in &offsets {
            for v in 0..dims[ax] {
                next.push(off + v * strides[ax]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Embeds an operator acting on one subsystem into the full space, i.e.
/// I ⊗ op ⊗ I with identity on all other factors. Rectangular ops change the
/// target subsystem dimension.
pub fn embed_operator<T: Scalar>(
    op: &ComplexMatrix<T>,
    dims: &[usize],
    target: usize,
) -> Result<ComplexMatrix<T>> {
    if target >= dims.len() {
        return Err(QicError::IndexOutOfRange {
            index: target,
            count: dims.len(),
        });
    }
    if op.cols() != dims[target] {
        return Err(QicError::DimensionMismatch(format!(
            "operator expects input dim {}, subsystem has {}",
            op.cols(),
            dims[target]
        )));
    }
    let left: usize = dims[..target].iter().product();
    let right: usize = dims[target + 1..].iter().product();
    let rows = left * op.rows() * right;
    let cols = left * op.cols() * right;
    let mut full = ComplexMatrix::zeros(rows, cols);
    for l in 0..left {
        for r_t in 0..op.rows() {
            for c_t in 0..op.cols() {
                let v = op.get(r_t, c_t);
                if v.norm_sqr() == T::zero() {
                    continue;
                }
                for rgt in 0..right {
                    let r = (l * op.rows() + r_t) * right + rgt;
                    let c = (l * op.cols() + c_t) * right + rgt;
                    full.set(r, c, v);
                }
            }
        }
    }
    Ok(full)
}

/// Embeds a two-subsystem operator on (i, j) with identity elsewhere.
/// `op` is indexed with subsystem `i` as its leading factor.
pub fn embed_two_site_operator<T: Scalar>(
    op: &ComplexMatrix<T>,
    dims: &[usize],
    sites: (usize, usize),
) -> Result<ComplexMatrix<T>> {
    let (i, j) = sites;
    let n = dims.len();
    if i >= n || j >= n || i == j {
        return Err(QicError::IndexOutOfRange {
            index: i.max(j),
            count: n,
        });
    }
    let di = dims[i];
    let dj = dims[j];
    if op.rows() != di * dj || op.cols() != di * dj {
        return Err(QicError::DimensionMismatch(format!(
            "two-site operator is {}x{}, expected {}",
            op.rows(),
            op.cols(),
            di * dj
        )));
    }
    let total: usize = dims.iter().product();
    let strides = strides(dims);
    let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    let other_offsets = axis_offsets(dims, &strides, &others);
    let mut full = ComplexMatrix::zeros(total, total);
    for ri in 0..di {
        for rj in 0..dj {
            for ci in 0..di {
                for cj in 0..dj {
                    let v = op.get(ri * dj + rj, ci * dj + cj);
                    if v.norm_sqr() == T::zero() {
                        continue;
                    }
                    let r_base = ri * strides[i] + rj * strides[j];
                    let c_base = ci * strides[i] + cj * strides[j];
                    for off in &other_offsets {
                        full.set(r_base + off, c_base + off, v);
                    }
                }
            }
        }
    }
    Ok(full)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn tensor_of_basis_states() {
        // |0> ⊗ |1> = |01> with amplitudes (0, 1, 0, 0)
        let s = PureState::<f64>::qubit0().tensor(&PureState::qubit1());
        assert_eq!(s.dims(), &[2, 2]);
        let a = s.amplitudes();
        assert_eq!(a[1].re, 1.0);
        assert!(a[0].norm() + a[2].norm() + a[3].norm() < 1e-15);
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let half = DensityOperator::<f64>::maximally_mixed(&[2]);
        let prod = half.tensor(&half);
        assert_eq!(prod.dims(), &[2, 2]);
        let expect = DensityOperator::<f64>::maximally_mixed(&[2, 2]);
        assert!(prod.matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }

    #[test]
    fn tensor_of_singlets_has_unit_norm() {
        let s = PureState::<f64>::bell(BellIndex::PsiMinus);
        let double = s.tensor(&s);
        assert_eq!(double.dim(), 16);
        let norm2: f64 = double.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_marginals_are_maximally_mixed() {
        let rho = PureState::<f64>::bell(BellIndex::PsiMinus).to_density();
        for keep in [[0usize], [1usize]] {
            let marg = rho.partial_trace(&keep).unwrap();
            let expect = DensityOperator::<f64>::maximally_mixed(&[2]);
            assert!(marg.matrix().max_abs_diff(expect.matrix()) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut rng = RngStream::new(11);
        let rho = DensityOperator::<f64>::random_mixed(&[2], &mut rng);
        let sigma = DensityOperator::<f64>::random_mixed(&[3], &mut rng);
        let prod = rho.tensor(&sigma);
        let back = prod.partial_trace(&[0]).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        let back2 = prod.partial_trace(&[1]).unwrap();
        assert!(back2.matrix().max_abs_diff(sigma.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_empty_keep_is_full_trace() {
        let rho = PureState::<f64>::bell(BellIndex::PhiPlus).to_density();
        let t = rho.partial_trace(&[]).unwrap();
        assert_eq!(t.dim(), 1);
        assert!((t.matrix().get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = DensityOperator::<f64>::maximally_mixed(&[2, 2]);
        assert!(matches!(
            rho.partial_trace(&[2]),
            Err(QicError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn eigenvalues_of_maximally_mixed() {
        let rho = DensityOperator::<f64>::maximally_mixed(&[2, 2]);
        let eigs = rho.matrix().hermitian_eigenvalues().unwrap();
        for e in eigs {
            assert!((e - 0.25).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvalues_of_rank_one_projector() {
        let rho = PureState::<f64>::bell(BellIndex::PsiMinus).to_density();
        let eigs = rho.matrix().hermitian_eigenvalues().unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        for e in &eigs[1..] {
            assert!(e.abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_sum_matches_trace_on_random_hermitian() {
        let mut rng = RngStream::new(5);
        for trial in 0..25 {
            let n = 2 + (trial % 7);
            let mut m = M::zeros(n, n);
            for r in 0..n {
                for cidx in 0..n {
                    m.set(r, cidx, rng.complex_normal());
                }
            }
            let h = m.add(&m.adjoint()).scaled_re(0.5);
            let eigs = h.hermitian_eigenvalues().unwrap();
            let sum: f64 = eigs.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-10 * (1.0 + h.frobenius_norm()));
            // Descending order.
            for w in eigs.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eigenvalues_match_closed_form_for_two_by_two() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = M::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) | (1, 1) => Complex::new(1.0, 0.0),
            (0, 1) => Complex::new(0.0, 1.0),
            _ => Complex::new(0.0, -1.0),
        });
        let eigs = m.hermitian_eigenvalues().unwrap();
        assert!((eigs[0] - 2.0).abs() < 1e-13);
        assert!(eigs[1].abs() < 1e-13);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = M::identity(2);
        m.set(0, 1, c(0.5, 0.0));
        assert!(matches!(
            m.hermitian_eigenvalues(),
            Err(QicError::NotHermitian(_))
        ));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = RngStream::new(17);
        for dim in [1usize, 2, 3, 5, 8] {
            let u = haar_random_unitary::<f64>(dim, &mut rng);
            let prod = u.adjoint().matmul(&u);
            assert!(prod.max_abs_diff(&M::identity(dim)) < 1e-12, "dim {dim}");
        }
    }

    #[test]
    fn haar_unitary_dim_one_is_unit_modulus() {
        let mut rng = RngStream::new(23);
        let u = haar_random_unitary::<f64>(1, &mut rng);
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_unitary_is_reproducible() {
        let a = haar_random_unitary::<f64>(2, &mut RngStream::new(99));
        let b = haar_random_unitary::<f64>(2, &mut RngStream::new(99));
        assert_eq!(a, b);
    }

    #[test]
    fn bloch_poles_map_to_computational_basis() {
        let up = bloch_to_state(&BlochVector::<f64>::plus_z());
        assert!((up.amplitudes()[0].re - 1.0).abs() < 1e-12);
        let down = bloch_to_state(&BlochVector::<f64>::plus_z().antipode());
        assert!((down.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
        assert!(down.amplitudes()[0].norm() < 1e-12);
    }

    #[test]
    fn bloch_plus_x_is_equal_superposition() {
        let s = bloch_to_state(&BlochVector::<f64>::plus_x());
        let target = PureState::<f64>::new(
            vec![c(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2],
            vec![2],
        )
        .unwrap();
        assert!((s.inner(&target).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_expectation_recovers_vector() {
        let mut rng = RngStream::new(31);
        for _ in 0..50 {
            let r = BlochVector::<f64>::random(&mut rng);
            let s = bloch_to_state(&r);
            let a0 = s.amplitudes()[0];
            let a1 = s.amplitudes()[1];
            let x = 2.0 * (a0.conj() * a1).re;
            let y = 2.0 * (a0.conj() * a1).im;
            let z = a0.norm_sqr() - a1.norm_sqr();
            assert!((x - r.x).abs() < 1e-12);
            assert!((y - r.y).abs() < 1e-12);
            assert!((z - r.z).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_fidelity_examples() {
        let singlet = PureState::<f64>::bell(BellIndex::PsiMinus);
        let rho = singlet.to_density();
        assert!((rho.pure_fidelity(&singlet).unwrap() - 1.0).abs() < 1e-12);

        let mixed = DensityOperator::<f64>::maximally_mixed(&[2, 2]);
        assert!((mixed.pure_fidelity(&singlet).unwrap() - 0.25).abs() < 1e-12);

        // (I/2) ⊗ |0><0| against the singlet: value 1/4; this is the naive
        // strategy's k >= m branch.
        let half = DensityOperator::<f64>::maximally_mixed(&[2]);
        let zero = PureState::<f64>::qubit0().to_density();
        let rho = half.tensor(&zero);
        assert!((rho.pure_fidelity(&singlet).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn pure_fidelity_rejects_dimension_mismatch() {
        let rho = DensityOperator::<f64>::maximally_mixed(&[2]);
        let singlet = PureState::<f64>::bell(BellIndex::PsiMinus);
        assert!(rho.pure_fidelity(&singlet).is_err());
    }

    #[test]
    fn density_validation_rejects_bad_inputs() {
        // Non-unit trace.
        let m = M::identity(2);
        assert!(matches!(
            DensityOperator::new(m, vec![2]),
            Err(QicError::NotUnitTrace(_))
        ));
        // Negative eigenvalue.
        let mut m = M::zeros(2, 2);
        m.set(0, 0, c(1.5, 0.0));
        m.set(1, 1, c(-0.5, 0.0));
        assert!(matches!(
            DensityOperator::new(m, vec![2]),
            Err(QicError::NotPositive(_))
        ));
    }

    #[test]
    fn apply_unitary_on_pure_state_subsystem() {
        // X on the second qubit of |Psi-> gives |Phi-> up to phase.
        let x = M::from_rows(&[
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![(1.0, 0.0), (0.0, 0.0)],
        ]);
        let s = PureState::<f64>::bell(BellIndex::PsiMinus)
            .apply_unitary(&x, 1)
            .unwrap();
        let target = PureState::<f64>::bell(BellIndex::PhiMinus);
        assert!((s.inner(&target).norm() - 1.0).abs() < 1e-12);
    }
}
