//! Matrix-level types for online PCA: instances, generalized density
//! matrices, the covariance accumulator, and the symmetric eigensolver that
//! every matrix update routes through.

use nalgebra::{DMatrix, DVector};

use crate::capped_simplex::{sample_mset, WeightVector};
use crate::error::{invalid, Error, Result};
use crate::Rng;

const SYMMETRY_TOLERANCE: f64 = 1e-8;
const UNIT_TOLERANCE: f64 = 1e-10;
const SPECTRUM_TOLERANCE: f64 = 1e-9;
const ORTHONORMAL_TOLERANCE: f64 = 1e-8;

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: DVector<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: DMatrix<f64>,
}

impl Eigh {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Symmetric eigendecomposition.
///
/// Eigenvalues are sorted ascending and each eigenvector is signed so its
/// largest-magnitude entry (first on ties) is positive.
pub fn eigh(a: &DMatrix<f64>) -> Result<Eigh> {
    if !a.is_square() || a.nrows() == 0 {
        return invalid(format!("eigh needs a non-empty square matrix, got {}x{}", a.nrows(), a.ncols()));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return invalid("eigh input has non-finite entries");
    }
    let asym = max_abs(&(a - a.transpose()));
    if asym > SYMMETRY_TOLERANCE {
        return invalid(format!("matrix is not symmetric (max |A - A^T| = {asym:e})"));
    }
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let decomposition = sym
        .try_symmetric_eigen(f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| {
            Error::NumericFailure(format!(
                "symmetric eigensolver did not converge (n = {n}, max |A| = {:e})",
                max_abs(a)
            ))
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        decomposition.eigenvalues[i]
            .partial_cmp(&decomposition.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| decomposition.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = decomposition.eigenvectors.column(src).into_owned();
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok(Eigh { values, vectors })
}

/// A loss matrix revealed to the learner.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    /// The dyad `x xᵀ` of a unit vector (trace one).
    SparseDyad(DVector<f64>),
    /// A symmetric PSD matrix with spectrum in `[0, 1]`.
    DensePsd(DMatrix<f64>),
}

impl Instance {
    pub fn sparse(x: DVector<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite dyad vector");
        }
        let norm = x.norm();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return invalid(format!("dyad vector has norm {norm}, expected 1"));
        }
        Ok(Instance::SparseDyad(x))
    }

    /// Validates symmetry and the spectrum with one eigendecomposition.
    pub fn dense(x: DMatrix<f64>) -> Result<Self> {
        let spectrum = eigh(&x)?;
        let lo = spectrum.values[0];
        let hi = spectrum.values[spectrum.values.len() - 1];
        if lo < -SPECTRUM_TOLERANCE || hi > 1.0 + SPECTRUM_TOLERANCE {
            return invalid(format!("dense instance spectrum [{lo}, {hi}] not inside [0, 1]"));
        }
        Ok(Instance::DensePsd((&x + x.transpose()) * 0.5))
    }

    /// The diagonal instance with loss vector `loss` on the standard basis.
    ///
    /// A standard basis vector becomes a sparse dyad, anything else in
    /// `[0, 1]^n` a dense diagonal matrix.
    pub fn from_loss_vector(loss: &[f64]) -> Result<Self> {
        Self::rotated_loss(None, loss)
    }

    /// `Q diag(loss) Qᵀ` for an orthogonal `Q` (identity when `None`).
    pub fn rotated_loss(rotation: Option<&DMatrix<f64>>, loss: &[f64]) -> Result<Self> {
        let n = loss.len();
        if n == 0 {
            return invalid("empty loss vector");
        }
        if loss.iter().any(|l| !l.is_finite() || *l < 0.0 || *l > 1.0) {
            return invalid("loss entries must lie in [0, 1]");
        }
        if let Some(q) = rotation {
            if q.nrows() != n || q.ncols() != n {
                return invalid("rotation dimension does not match the loss vector");
            }
        }
        let nonzero: Vec<usize> = (0..n).filter(|&i| loss[i] != 0.0).collect();
        if nonzero.len() == 1 && loss[nonzero[0]] == 1.0 {
            let i = nonzero[0];
            let x = match rotation {
                Some(q) => q.column(i).into_owned(),
                None => {
                    let mut e = DVector::zeros(n);
                    e[i] = 1.0;
                    e
                }
            };
            return Ok(Instance::SparseDyad(x));
        }
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(loss));
        Ok(Instance::DensePsd(match rotation {
            Some(q) => {
                let x = q * d * q.transpose();
                (&x + x.transpose()) * 0.5
            }
            None => d,
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Instance::SparseDyad(x) => x.len(),
            Instance::DensePsd(x) => x.nrows(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Instance::SparseDyad(_))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        match self {
            Instance::SparseDyad(x) => x * x.transpose(),
            Instance::DensePsd(x) => x.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Instance::SparseDyad(x) => x.norm_squared(),
            Instance::DensePsd(x) => x.trace(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            Instance::SparseDyad(x) => x.norm_squared(),
            Instance::DensePsd(x) => x.norm(),
        }
    }

    /// `uᵀ X u`.
    pub fn quadratic_form(&self, u: &DVector<f64>) -> f64 {
        match self {
            Instance::SparseDyad(x) => {
                let d = x.dot(u);
                d * d
            }
            Instance::DensePsd(x) => u.dot(&(x * u)),
        }
    }

    /// Adds `scale · X` to `target` in place.
    pub fn add_scaled_to(&self, target: &mut DMatrix<f64>, scale: f64) {
        match self {
            Instance::SparseDyad(x) => target.ger(scale, x, x, 1.0),
            Instance::DensePsd(x) => *target += x * scale,
        }
    }
}

/// Symmetric matrix with spectrum in `[0, 1]` and integer trace: a mixture
/// of projection matrices of that rank.
#[derive(Debug, Clone, PartialEq)]
pub struct GenDensityMatrix {
    basis: DMatrix<f64>,
    eigenvalues: WeightVector,
}

impl GenDensityMatrix {
    pub fn new(basis: DMatrix<f64>, eigenvalues: WeightVector) -> Result<Self> {
        let n = eigenvalues.len();
        if basis.nrows() != n || basis.ncols() != n {
            return invalid("basis dimension does not match eigenvalues");
        }
        let gram = basis.transpose() * &basis - DMatrix::<f64>::identity(n, n);
        let err = max_abs(&gram);
        if err > ORTHONORMAL_TOLERANCE {
            return invalid(format!("basis is not orthonormal (max |UᵀU - I| = {err:e})"));
        }
        Ok(Self { basis, eigenvalues })
    }

    /// `(trace / n) I`.
    pub fn uniform(n: usize, trace: usize) -> Result<Self> {
        Ok(Self {
            basis: DMatrix::identity(n, n),
            eigenvalues: WeightVector::uniform(n, trace)?,
        })
    }

    /// `diag(w)`.
    pub fn from_diagonal(w: WeightVector) -> Self {
        let n = w.len();
        Self { basis: DMatrix::identity(n, n), eigenvalues: w }
    }

    /// Validates a symmetric matrix as a member of `𝒲_trace`.
    pub fn from_matrix(a: &DMatrix<f64>, trace: usize) -> Result<Self> {
        let e = eigh(a)?;
        let w = WeightVector::new(e.values.iter().copied().collect(), trace)?;
        Ok(Self { basis: e.vectors, eigenvalues: w })
    }

    pub(crate) fn from_parts_unchecked(basis: DMatrix<f64>, eigenvalues: WeightVector) -> Self {
        Self { basis, eigenvalues }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &WeightVector {
        &self.eigenvalues
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn trace(&self) -> usize {
        self.eigenvalues.m()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        self.spectral_map(|x| x)
    }

    /// `U f(Λ) Uᵀ`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.n();
        let mut scaled = self.basis.clone();
        for (j, &lambda) in self.eigenvalues.as_slice().iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        let out = scaled * self.basis.transpose();
        debug_assert_eq!(out.nrows(), n);
        (&out + out.transpose()) * 0.5
    }

    /// Diagonal of `Qᵀ W Q`: the weight each column of `Q` carries.
    pub fn weights_in_basis(&self, rotation: Option<&DMatrix<f64>>) -> Vec<f64> {
        let coords = match rotation {
            Some(q) => q.transpose() * &self.basis,
            None => self.basis.clone(),
        };
        let lambda = self.eigenvalues.as_slice();
        (0..self.n())
            .map(|i| {
                coords
                    .row(i)
                    .iter()
                    .zip(lambda)
                    .map(|(c, l)| c * c * l)
                    .sum()
            })
            .collect()
    }
}

/// Running sum `C = Σ_t X_t` of the revealed instances.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceAccumulator {
    c: DMatrix<f64>,
}

impl CovarianceAccumulator {
    pub fn new(n: usize) -> Self {
        Self { c: DMatrix::zeros(n, n) }
    }

    pub fn from_matrix(c: DMatrix<f64>) -> Result<Self> {
        let e = eigh(&c)?;
        if e.values[0] < -1e-8 {
            return invalid(format!("accumulator is not PSD (smallest eigenvalue {})", e.values[0]));
        }
        Ok(Self { c })
    }

    pub fn add(&mut self, x: &Instance) -> Result<()> {
        if x.dim() != self.c.nrows() {
            return invalid("instance dimension does not match the accumulator");
        }
        x.add_scaled_to(&mut self.c, 1.0);
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }
}

fn is_projection(p: &DMatrix<f64>) -> bool {
    p.is_square()
        && max_abs(&(p - p.transpose())) <= SYMMETRY_TOLERANCE
        && max_abs(&(p * p - p)) <= SYMMETRY_TOLERANCE
}

/// Compression loss `tr((I - P) x xᵀ) = ‖x - P x‖²` of projecting `x`.
pub fn compression_loss(p: &DMatrix<f64>, x: &DVector<f64>) -> Result<f64> {
    if p.nrows() != x.len() {
        return invalid("projection and point have different dimensions");
    }
    if !is_projection(p) {
        return invalid("P is not a symmetric idempotent matrix");
    }
    let norm = x.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return invalid(format!("point has norm {norm}, expected 1"));
    }
    let gain = x.dot(&(p * x));
    Ok((x.norm_squared() - gain).max(0.0))
}

/// `tr(W X)`: expected loss (or gain) of the mixture `W` on `X`.
pub fn expected_loss(w: &GenDensityMatrix, x: &Instance) -> Result<f64> {
    if w.n() != x.dim() {
        return invalid(format!("density matrix is {0}x{0}, instance is {1}x{1}", w.n(), x.dim()));
    }
    let total: f64 = w
        .eigenvalues()
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, l)| **l != 0.0)
        .map(|(j, l)| l * x.quadratic_form(&w.basis().column(j).into_owned()))
        .sum();
    Ok(total.max(0.0))
}

/// Loss of the best rank-k subspace in hindsight: the sum of the `n - k`
/// smallest eigenvalues of `C`.
pub fn comparator_loss(c: &CovarianceAccumulator, k: usize) -> Result<f64> {
    let n = c.n();
    if k < 1 || k >= n {
        return invalid(format!("k = {k} must lie in [1, {})", n));
    }
    let e = eigh(c.matrix())?;
    Ok(e.values.iter().take(n - k).sum::<f64>().max(0.0))
}

/// Draws a projection matrix from the mixture `W`: an eigen-subset is
/// chosen by [`sample_mset`] on the spectrum and its eigenvectors spanned.
pub fn sample_projection(w: &GenDensityMatrix, rng: &mut Rng) -> Result<DMatrix<f64>> {
    let total: f64 = w.eigenvalues().as_slice().iter().sum();
    if (total - total.round()).abs() > 1e-6 {
        return invalid(format!("trace {total} is not integral"));
    }
    let set = sample_mset(w.eigenvalues(), rng)?;
    let n = w.n();
    let mut p = DMatrix::zeros(n, n);
    for i in set {
        let u = w.basis().column(i).into_owned();
        p.ger(1.0, &u, &u, 1.0);
    }
    Ok(p)
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal(n: usize, rng: &mut Rng) -> DMatrix<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn identity(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn eigh_diagonal_sorted() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let d = eigh(&a).unwrap();
        assert_eq!(d.values.as_slice(), &[1.0, 2.0, 3.0]);
        let expected = DMatrix::from_row_slice(3, 3, &[0., 0., 1., 1., 0., 0., 0., 1., 0.]);
        assert_abs_diff_eq!(d.vectors, expected, epsilon = 1e-14);
    }

    #[test]
    fn eigh_degenerate_identity() {
        let d = eigh(&identity(4)).unwrap();
        for v in d.values.iter() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-14);
        }
        assert!(max_abs(&(d.reconstruct() - identity(4))) < 1e-12);
    }

    #[test]
    fn eigh_rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(eigh(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn eigh_random_reconstruction_and_sign() {
        let mut rng = crate::seeded_rng(5, 0);
        for _ in 0..20 {
            let g = DMatrix::from_fn(5, 5, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
            let a = &g + g.transpose();
            let d = eigh(&a).unwrap();
            let scale = max_abs(&a).max(1.0);
            assert!(max_abs(&(d.reconstruct() - &a)) <= 1e-8 * scale);
            assert!(max_abs(&(d.vectors.transpose() * &d.vectors - identity(5))) <= 1e-10);
            for w in d.values.as_slice().windows(2) {
                assert!(w[0] <= w[1]);
            }
            for col in d.vectors.column_iter() {
                let pivot = col.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
                assert!(pivot > 0.0);
            }
        }
    }

    #[test]
    fn compression_loss_examples() {
        let x = DVector::from_vec(vec![0.6, 0.8, 0.0]);
        assert_abs_diff_eq!(compression_loss(&identity(3), &x).unwrap(), 0.0, epsilon = 1e-15);
        let p = e(3, 0) * e(3, 0).transpose();
        assert_abs_diff_eq!(compression_loss(&p, &e(3, 1)).unwrap(), 1.0, epsilon = 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = DVector::from_vec(vec![h, h, 0.0]);
        assert_abs_diff_eq!(compression_loss(&p, &x).unwrap(), 0.5, epsilon = 1e-15);
        let residual = &x - &p * &x;
        assert_abs_diff_eq!(compression_loss(&p, &x).unwrap(), residual.norm_squared(), epsilon = 1e-10);
    }

    #[test]
    fn compression_loss_rejects_non_projection() {
        let p = identity(2) * 0.5;
        assert!(compression_loss(&p, &e(2, 0)).is_err());
        assert!(compression_loss(&identity(2), &DVector::from_vec(vec![1.0, 1.0])).is_err());
    }

    #[test]
    fn expected_loss_examples() {
        let w = GenDensityMatrix::uniform(4, 3).unwrap();
        let x = Instance::sparse(DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(expected_loss(&w, &x).unwrap(), 0.75, epsilon = 1e-14);

        let w = GenDensityMatrix::from_diagonal(WeightVector::new(vec![1.0, 0.0], 1).unwrap());
        let x = Instance::from_loss_vector(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(expected_loss(&w, &x).unwrap(), 1.0, epsilon = 1e-15);

        let w = GenDensityMatrix::from_diagonal(WeightVector::new(vec![0.5, 0.5, 1.0], 2).unwrap());
        let x = Instance::from_loss_vector(&[0.2, 0.2, 0.2]).unwrap();
        let direct = expected_loss(&w, &x).unwrap();
        let elementwise = w.to_matrix().component_mul(&x.to_matrix()).sum();
        assert_abs_diff_eq!(direct, 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(direct, elementwise, epsilon = 1e-14);

        let x = Instance::from_loss_vector(&[0.2, 0.2]).unwrap();
        assert!(expected_loss(&w, &x).is_err());
    }

    #[test]
    fn comparator_loss_examples() {
        let c = |d: &[f64]| {
            CovarianceAccumulator::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(d))).unwrap()
        };
        assert_abs_diff_eq!(comparator_loss(&c(&[3.0, 2.0, 1.0]), 2).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(comparator_loss(&CovarianceAccumulator::new(3), 1).unwrap(), 0.0);
        let acc = c(&[0.3, 1.7, 0.4, 0.9]);
        let loss = comparator_loss(&acc, 2).unwrap();
        assert_abs_diff_eq!(loss, 0.7, epsilon = 1e-14);
        // Brute force over axis-aligned 2-subsets left out of the subspace.
        let d = [0.3, 1.7, 0.4, 0.9];
        let mut best = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                best = best.min(d[i] + d[j]);
            }
        }
        assert_abs_diff_eq!(loss, best, epsilon = 1e-14);
        assert!(comparator_loss(&acc, 0).is_err());
        assert!(comparator_loss(&acc, 4).is_err());
    }

    #[test]
    fn loss_gain_complementarity_and_comparator_floor() {
        let mut rng = crate::seeded_rng(9, 0);
        let n = 5;
        let mut acc = CovarianceAccumulator::new(n);
        let mut xs = Vec::new();
        for _ in 0..30 {
            let v = DVector::from_fn(n, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0)).normalize();
            let x = Instance::sparse(v.clone()).unwrap();
            acc.add(&x).unwrap();
            xs.push(x);
            let q = random_orthogonal(n, &mut rng);
            let mut p = DMatrix::zeros(n, n);
            for j in 0..2 {
                let u = q.column(j).into_owned();
                p.ger(1.0, &u, &u, 1.0);
            }
            let loss = compression_loss(&p, &v).unwrap();
            let gain = (&p * v.clone() * v.transpose()).trace();
            assert_abs_diff_eq!(loss + gain, 1.0, epsilon = 1e-10);
        }
        let k = 2;
        let best = comparator_loss(&acc, k).unwrap();
        for _ in 0..100 {
            let q = random_orthogonal(n, &mut rng);
            let raw: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
            let lambda = crate::capped_simplex::euclidean_project(&raw, n - k).unwrap();
            let w = GenDensityMatrix::new(q, lambda).unwrap();
            let total: f64 = xs.iter().map(|x| expected_loss(&w, x).unwrap()).sum();
            assert!(best <= total + 1e-9);
        }
    }

    #[test]
    fn sample_projection_of_projection_is_itself() {
        let mut rng = crate::seeded_rng(1, 0);
        let q = random_orthogonal(4, &mut rng);
        let w = GenDensityMatrix::new(q, WeightVector::new(vec![0.0, 1.0, 1.0, 0.0], 2).unwrap()).unwrap();
        let p = sample_projection(&w, &mut rng).unwrap();
        assert!(max_abs(&(p - w.to_matrix())) < 1e-12);
    }

    #[test]
    fn sample_projection_half_identity_frequency() {
        let mut rng = crate::seeded_rng(2, 0);
        let w = GenDensityMatrix::uniform(2, 1).unwrap();
        let draws = 100_000;
        let mut first = 0usize;
        for _ in 0..draws {
            let p = sample_projection(&w, &mut rng).unwrap();
            if p[(0, 0)] > 0.5 {
                first += 1;
            }
        }
        let freq = first as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 3.0 * (0.25 / draws as f64).sqrt());
    }

    #[test]
    fn sample_projection_mean_and_shape() {
        let mut rng = crate::seeded_rng(4, 0);
        let w = GenDensityMatrix::from_diagonal(WeightVector::new(vec![1.0, 0.5, 0.5], 2).unwrap());
        let draws = 100_000;
        let target = w.to_matrix();
        let mut mean = DMatrix::zeros(3, 3);
        for _ in 0..draws {
            let p = sample_projection(&w, &mut rng).unwrap();
            assert!(max_abs(&(&p * &p - &p)) < 1e-8);
            assert_abs_diff_eq!(p.trace(), 2.0, epsilon = 1e-8);
            mean += p;
        }
        mean /= draws as f64;
        for (m, t) in mean.iter().zip(target.iter()) {
            let sigma = (t * (1.0 - t) / draws as f64).sqrt();
            assert!((m - t).abs() <= 3.0 * sigma + 1e-12);
        }
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::sparse(DVector::from_vec(vec![1.0, 1.0])).is_err());
        assert!(Instance::dense(DMatrix::identity(3, 3) * 2.0).is_err());
        assert!(Instance::dense(DMatrix::identity(3, 3)).is_ok());
        assert!(Instance::from_loss_vector(&[0.0, 1.0]).unwrap().is_sparse());
        assert!(!Instance::from_loss_vector(&[1.0, 1.0]).unwrap().is_sparse());
        assert!(Instance::from_loss_vector(&[1.5, 0.0]).is_err());
    }

    #[test]
    fn weights_in_rotated_basis() {
        let mut rng = crate::seeded_rng(8, 0);
        let q = random_orthogonal(3, &mut rng);
        let lambda = WeightVector::new(vec![0.2, 0.9, 0.9], 2).unwrap();
        let w = GenDensityMatrix::new(q.clone(), lambda.clone()).unwrap();
        let back = w.weights_in_basis(Some(&q));
        for (a, b) in back.iter().zip(lambda.as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
