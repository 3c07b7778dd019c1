use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest supported dimension: three coordinates for each of two sources.
pub const MAX_DIM: usize = 6;

const SYMMETRY_TOL: f64 = 1e-12;

/// Small dense symmetric matrix with a parameter label per row/column.
///
/// Holds Fisher-information matrices and error-matrix bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    labels: Vec<String>,
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds from row-major entries. Entries must be symmetric to 1e-12
    /// relative to the largest magnitude; the stored matrix is exactly
    /// symmetrized.
    pub fn new<S: Into<String>>(labels: Vec<S>, rows: &[Vec<f64>]) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        check_dim(n)?;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!(
                "{n} labels but entries are not {n}x{n}"
            )));
        }
        let data = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(labels, data)
    }

    pub fn from_matrix(labels: Vec<String>, data: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        check_dim(n)?;
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "{n} labels but matrix is {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix has non-finite entries".into(),
            ));
        }
        let scale = data.amax().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (data[(i, j)] - data[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i},{j}): {} vs {}",
                        data[(i, j)],
                        data[(j, i)]
                    )));
                }
            }
        }
        let sym = (&data + data.transpose()) * 0.5;
        Ok(SymMatrix { labels, data: sym })
    }

    pub fn diagonal<S: Into<String>>(labels: Vec<S>, diag: &[f64]) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != diag.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels, {} diagonal entries",
                labels.len(),
                diag.len()
            )));
        }
        let n = diag.len();
        Self::from_matrix(
            labels,
            DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }),
        )
    }

    pub fn zeros<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        Self::from_matrix(labels, DMatrix::zeros(n, n))
    }

    pub fn identity<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        Self::from_matrix(labels, DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn get_by_label(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.data[(i, j)])
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)]).collect()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.data[(i, j)]).collect())
            .collect()
    }

    /// Multiplies every entry by `factor` (e.g. the number of repeated trials).
    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            labels: self.labels.clone(),
            data: &self.data * factor,
        }
    }

    /// Entrywise sum; labels must agree.
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.labels != other.labels {
            return Err(Error::ShapeMismatch(format!(
                "labels {:?} vs {:?}",
                self.labels, other.labels
            )));
        }
        Ok(SymMatrix {
            labels: self.labels.clone(),
            data: &self.data + &other.data,
        })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.data.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Largest absolute entry, used as the scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.data.amax()
    }

    /// Loewner order `self − other ⪰ −tol·scale`.
    pub fn dominates(&self, other: &SymMatrix, tol: f64) -> Result<bool> {
        let diff = SymMatrix {
            labels: self.labels.clone(),
            data: &self.data - &other.data,
        };
        if self.labels != other.labels {
            return Err(Error::ShapeMismatch("labels differ".into()));
        }
        let scale = self.scale().max(other.scale());
        Ok(diff.min_eigenvalue() >= -tol * scale)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::ShapeMismatch(format!(
            "dimension must be in 1..={MAX_DIM}, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Inverse of a symmetric positive-definite matrix, labels preserved.
///
/// Fails with [`Error::Singular`] carrying the smallest eigenvalue when the
/// matrix is singular (relative to its largest eigenvalue) or indefinite.
pub fn sym_invert(m: &SymMatrix) -> Result<SymMatrix> {
    let ev = m.eigenvalues();
    let min = ev[0];
    let max = ev[ev.len() - 1];
    if max <= 0.0 || min <= max * 1e-14 {
        return Err(Error::Singular {
            min_eigenvalue: min,
        });
    }
    let chol = m.data.clone().cholesky().ok_or(Error::Singular {
        min_eigenvalue: min,
    })?;
    let inv = chol.inverse();
    let inv = (&inv + inv.transpose()) * 0.5;
    Ok(SymMatrix {
        labels: m.labels.clone(),
        data: inv,
    })
}

/// `jacᵀ · m · jac` where `jac[(μ, a)] = ∂X_μ/∂θ_a`: the Fisher information
/// with respect to new parameters θ given the one for X.
///
/// `jac` has one row per row of `m` and one column per entry of
/// `new_labels`.
pub fn congruence_transform<S: Into<String>>(
    m: &SymMatrix,
    jac: &DMatrix<f64>,
    new_labels: Vec<S>,
) -> Result<SymMatrix> {
    let new_labels: Vec<String> = new_labels.into_iter().map(Into::into).collect();
    if jac.nrows() != m.dim() {
        return Err(Error::ShapeMismatch(format!(
            "jacobian has {} rows, matrix dimension is {}",
            jac.nrows(),
            m.dim()
        )));
    }
    if jac.ncols() != new_labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "jacobian has {} columns but {} new labels",
            jac.ncols(),
            new_labels.len()
        )));
    }
    let out = jac.transpose() * &m.data * jac;
    let out = (&out + out.transpose()) * 0.5;
    SymMatrix::from_matrix(new_labels, out)
}
