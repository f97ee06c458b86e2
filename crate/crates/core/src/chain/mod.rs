//! Exact analytics for the associated Markov chain of a geometry.
//!
//! The associated chain jumps from `i` to `j` at rate `nu_ij`; because the
//! rate matrix is symmetric the chain is reversible with uniform stationary
//! distribution, and everything here reduces to dense symmetric linear
//! algebra: the generator and its eigendecomposition, transition kernels
//! `p(t) = exp(tN)`, the spectral gap, Dirichlet forms and configuration
//! functionals, the log-Sobolev constant (small `n`, by direct
//! minimization), and exact hitting and meeting times via linear systems.
//!
//! All functions are pure; every result is a deterministic function of the
//! geometry (the log-Sobolev optimizer uses an internally pinned seed).

mod logsobolev;

pub use logsobolev::{log_sobolev, MAX_LOG_SOBOLEV_AGENTS};
#[cfg(test)]
pub(crate) use logsobolev::minimize_ratio;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::Geometry;

/// Largest agent count for dense kernel and hitting-time computations.
pub const MAX_DENSE_AGENTS: usize = 2000;

/// Largest agent count for meeting-time systems (quadratically many pair
/// states).
pub const MAX_MEETING_AGENTS: usize = 60;

/// Generator `N` of the associated chain: `N_ij = nu_ij` off the diagonal
/// and `N_ii = -sum_j nu_ij`, so rows sum to zero and the matrix is
/// symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    n: usize,
    matrix: DMatrix<f64>,
}

impl Generator {
    pub fn new(g: &Geometry) -> Self {
        let n = g.n();
        let mut matrix = DMatrix::zeros(n, n);
        for e in g.edges() {
            matrix[(e.a, e.b)] = e.rate;
            matrix[(e.b, e.a)] = e.rate;
        }
        for i in 0..n {
            matrix[(i, i)] = -g.row_sum(i);
        }
        Generator { n, matrix }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Jump rate `nu_ij` (off-diagonal entry).
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Generator of the time-rescaled chain (`Half` gives the rates
    /// `nu_ij / 2` used by duality arguments).
    pub fn at_speed(&self, speed: Speed) -> Generator {
        match speed {
            Speed::Full => self.clone(),
            Speed::Half => Generator {
                n: self.n,
                matrix: &self.matrix * 0.5,
            },
        }
    }

    /// Orthogonal eigendecomposition, eigenvalues sorted descending with the
    /// leading one pinned to exactly zero.
    pub fn spectral(&self) -> Result<Spectral> {
        let eig = nalgebra::SymmetricEigen::try_new(self.matrix.clone(), 1e-13, 100_000)
            .ok_or_else(|| Error::numeric("symmetric eigendecomposition did not converge"))?;
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        if eigenvalues[0].abs() > 1e-9 {
            return Err(Error::numeric(format!(
                "leading eigenvalue {} is not zero; generator malformed",
                eigenvalues[0]
            )));
        }
        eigenvalues[0] = 0.0;
        let mut vectors = DMatrix::zeros(self.n, self.n);
        for (col, &k) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(k));
        }
        Ok(Spectral { eigenvalues, vectors })
    }
}

/// Which time scale the walkers use in product-chain computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Speed {
    /// Rates `nu_ij` per walker.
    Full,
    /// Rates `nu_ij / 2` per walker.
    Half,
}

/// Sorted eigendecomposition of a generator.
pub struct Spectral {
    /// Eigenvalues in descending order: `0 = lambda_1 > lambda_2 >= ...` for
    /// a connected geometry.
    pub eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Spectral {
    /// Spectral gap `lambda = -(second-largest eigenvalue)`.
    pub fn gap(&self) -> f64 {
        -self.eigenvalues[1]
    }

    /// Transition kernel `p(t) = exp(tN)` via the eigendecomposition.
    /// Entries are clipped to `[0, 1]`; anything outside `[-1e-12, 1+1e-12]`
    /// signals a numeric failure.
    pub fn kernel(&self, t: f64) -> Result<DMatrix<f64>> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("kernel time must be >= 0, got {t}")));
        }
        let n = self.eigenvalues.len();
        let weights = DVector::from_iterator(n, self.eigenvalues.iter().map(|l| (l * t).exp()));
        let mut kernel = &self.vectors * DMatrix::from_diagonal(&weights) * self.vectors.transpose();
        for p in kernel.iter_mut() {
            if *p < -1e-12 || *p > 1.0 + 1e-12 {
                return Err(Error::numeric(format!("kernel entry {p} outside [0, 1]")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        Ok(kernel)
    }

    /// Deviation matrix `D = integral of (p(t) - uniform) dt`, i.e.
    /// `sum_{k >= 2} (-1/lambda_k) u_k u_k^T`.
    pub fn deviation_matrix(&self) -> DMatrix<f64> {
        let n = self.eigenvalues.len();
        let weights = DVector::from_iterator(
            n,
            self.eigenvalues.iter().map(|&l| if l < 0.0 { -1.0 / l } else { 0.0 }),
        );
        &self.vectors * DMatrix::from_diagonal(&weights) * self.vectors.transpose()
    }
}

/// Spectral gap of the associated chain.
pub fn spectral_gap(gen: &Generator) -> Result<f64> {
    Ok(gen.spectral()?.gap())
}

/// Transition kernel `p(t)`; dense, capped at `n <= 2000`.
pub fn transition_kernel(gen: &Generator, t: f64) -> Result<DMatrix<f64>> {
    if gen.n() > MAX_DENSE_AGENTS {
        return Err(Error::unsupported(format!(
            "dense kernel needs n <= {MAX_DENSE_AGENTS}, got {}",
            gen.n()
        )));
    }
    gen.spectral()?.kernel(t)
}

/// Dirichlet form `E(f, f) = (1/2) n^-1 sum_i sum_{j != i} (f_i - f_j)^2 nu_ij`,
/// evaluated as a sum over unordered pairs.
pub fn dirichlet_form(gen: &Generator, f: &[f64]) -> f64 {
    assert_eq!(f.len(), gen.n(), "configuration length mismatch");
    let mut sum = 0.0;
    for i in 0..gen.n() {
        for j in (i + 1)..gen.n() {
            let rate = gen.matrix[(i, j)];
            if rate > 0.0 {
                let diff = f[i] - f[j];
                sum += rate * diff * diff;
            }
        }
    }
    sum / gen.n() as f64
}

/// Mean under the uniform distribution.
pub fn mean(f: &[f64]) -> f64 {
    f.iter().sum::<f64>() / f.len() as f64
}

/// `||f||_2^2 = n^-1 sum f_i^2`, returned as the norm (square root).
pub fn l2_norm(f: &[f64]) -> f64 {
    (f.iter().map(|x| x * x).sum::<f64>() / f.len() as f64).sqrt()
}

/// Variance under the uniform distribution: `||f||_2^2 - mean^2`.
pub fn variance(f: &[f64]) -> f64 {
    let m = mean(f);
    let sq = f.iter().map(|x| x * x).sum::<f64>() / f.len() as f64;
    (sq - m * m).max(0.0)
}

/// Entropy `-sum_i x_i log x_i` of a probability configuration (entries
/// `>= 0` summing to 1 within 1e-9; tiny negative roundoff up to 1e-12 is
/// treated as zero).
pub fn entropy(x: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    let mut ent = 0.0;
    for &p in x {
        if p < -1e-12 {
            return Err(Error::invalid(format!("entropy needs nonnegative entries, got {p}")));
        }
        let p = p.max(0.0);
        sum += p;
        if p > 0.0 {
            ent -= p * p.ln();
        }
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("entropy needs entries summing to 1, got {sum}")));
    }
    Ok(ent)
}

/// Exact expected hitting times `E_i T_j` of the associated chain, by
/// solving the linear system with the target row and column removed.
pub fn hitting_times(gen: &Generator) -> Result<DMatrix<f64>> {
    let n = gen.n();
    if n > MAX_DENSE_AGENTS {
        return Err(Error::unsupported(format!(
            "hitting times need n <= {MAX_DENSE_AGENTS}, got {n}"
        )));
    }
    let mut times = DMatrix::zeros(n, n);
    for target in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&i| i != target).collect();
        let mut sub = DMatrix::zeros(n - 1, n - 1);
        for (r, &i) in keep.iter().enumerate() {
            for (c, &j) in keep.iter().enumerate() {
                sub[(r, c)] = gen.matrix[(i, j)];
            }
        }
        if target == 0 {
            warn_if_ill_conditioned(&sub);
        }
        let rhs = DVector::from_element(n - 1, -1.0);
        let sol = sub
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::invalid("hitting-time system is singular"))?;
        for (r, &i) in keep.iter().enumerate() {
            times[(i, target)] = sol[r];
        }
    }
    Ok(times)
}

/// `tau* = max_{i,j} E_i T_j`.
pub fn tau_star(gen: &Generator) -> Result<f64> {
    let times = hitting_times(gen)?;
    Ok(times.iter().fold(0.0f64, |acc, &t| acc.max(t)))
}

/// Exact expected meeting times of two independent copies of the chain, one
/// row/column per agent pair, both walkers moving at the requested speed.
/// The pair state space is quadratic, so this is capped at `n <= 60`.
pub fn meeting_times(gen: &Generator, speed: Speed) -> Result<DMatrix<f64>> {
    let n = gen.n();
    if n > MAX_MEETING_AGENTS {
        return Err(Error::unsupported(format!(
            "meeting times need n <= {MAX_MEETING_AGENTS}, got {n}"
        )));
    }
    let factor = match speed {
        Speed::Full => 1.0,
        Speed::Half => 0.5,
    };
    // Unordered pair states {a < b}; meetings on the diagonal are absorbing,
    // so transitions into it only contribute to the diagonal outflow.
    let mut index = vec![vec![usize::MAX; n]; n];
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            index[a][b] = pairs.len();
            index[b][a] = pairs.len();
            pairs.push((a, b));
        }
    }
    let p = pairs.len();
    let mut q = DMatrix::zeros(p, p);
    for (row, &(a, b)) in pairs.iter().enumerate() {
        let mut outflow = 0.0;
        for (walker, other) in [(a, b), (b, a)] {
            for c in 0..n {
                if c == walker {
                    continue;
                }
                let rate = factor * gen.matrix[(walker, c)];
                if rate == 0.0 {
                    continue;
                }
                outflow += rate;
                if c != other {
                    q[(row, index[c][other])] += rate;
                }
            }
        }
        q[(row, row)] = -outflow;
    }
    let rhs = DVector::from_element(p, -1.0);
    let sol = q
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::invalid("meeting-time system is singular"))?;
    let mut times = DMatrix::zeros(n, n);
    for (row, &(a, b)) in pairs.iter().enumerate() {
        times[(a, b)] = sol[row];
        times[(b, a)] = sol[row];
    }
    Ok(times)
}

/// Mean absorption time of the Kingman coalescent started from `m` lineages
/// with pair-merge rate 1: `2 (1 - 1/m)`.
pub fn kingman_mean(m: u64) -> f64 {
    assert!(m >= 1, "kingman_mean needs m >= 1");
    2.0 * (1.0 - 1.0 / m as f64)
}

/// Renders a matrix as CSV, row-major, 17 significant digits per entry.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.16e}", m[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Logs a warning when the (representative) restricted system is badly
/// conditioned; only evaluated at sizes where a full SVD is cheap.
fn warn_if_ill_conditioned(sub: &DMatrix<f64>) {
    if sub.nrows() > 200 {
        return;
    }
    let sv = sub.clone().singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min <= 0.0 || max / min > 1e12 {
        log::warn!(
            "hitting-time system condition number {:.3e} exceeds 1e12; results may lose accuracy",
            if min > 0.0 { max / min } else { f64::INFINITY }
        );
    }
}
