use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::OnceLock;

use super::Cir;
use crate::error::{Error, Result};
use crate::wiener::OperatorGram;

/// Parity-decimated convolution matrix mapping the symbols that reach one
/// observation window onto the `K` noise-free field samples.
///
/// Row `i` holds the reversed impulse response shifted right by `i`; of the
/// `K + M − 1` columns only those landing on even offsets from the (even)
/// estimation instant survive.
#[derive(Debug, Clone)]
pub struct ConvOperator {
    psi: DMatrix<Complex64>,
    /// Pre-decimation column index of every retained column.
    kept_cols: Vec<usize>,
    m_taps: usize,
    m_prime: usize,
    k_prime: usize,
    n_os: usize,
    gram: OnceLock<OperatorGram>,
}

impl ConvOperator {
    /// Wraps an explicit `K × N′` matrix whose estimated symbol sits in column `target_col`.
    ///
    /// Used for small synthetic channels; `kept_cols` are reported as `2·j`.
    pub fn from_matrix(psi: DMatrix<Complex64>, target_col: usize) -> Result<Self> {
        if psi.nrows() == 0 || psi.ncols() == 0 {
            return Err(Error::invalid("psi", "operator must be non-empty"));
        }
        if target_col >= psi.ncols() {
            return Err(Error::invalid(
                "target_col",
                format!("{target_col} outside {} columns", psi.ncols()),
            ));
        }
        let n_prime = psi.ncols();
        Ok(Self {
            kept_cols: (0..n_prime).map(|j| 2 * j).collect(),
            m_taps: 2 * target_col + 1,
            m_prime: target_col,
            k_prime: n_prime - 1 - target_col,
            n_os: 2,
            psi,
            gram: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.psi
    }

    /// Observations per estimate.
    pub fn k(&self) -> usize {
        self.psi.nrows()
    }

    pub fn n_prime(&self) -> usize {
        self.psi.ncols()
    }

    pub fn m_prime(&self) -> usize {
        self.m_prime
    }

    pub fn k_prime(&self) -> usize {
        self.k_prime
    }

    pub fn cir_len(&self) -> usize {
        self.m_taps
    }

    pub fn n_os(&self) -> usize {
        self.n_os
    }

    /// Column multiplying the estimated symbol.
    pub fn target_col(&self) -> usize {
        self.m_prime
    }

    pub fn kept_cols(&self) -> &[usize] {
        &self.kept_cols
    }

    /// Constellation-independent products of `Ψ`, computed on first use.
    pub fn gram(&self) -> &OperatorGram {
        self.gram.get_or_init(|| OperatorGram::new(&self.psi, self.target_col()))
    }

    /// Noise-free intensities `|Ψ·s|²`.
    pub fn intensities(&self, symbols: &[f64]) -> Result<Vec<f64>> {
        if symbols.len() != self.n_prime() {
            return Err(Error::DimensionMismatch {
                expected: self.n_prime(),
                actual: symbols.len(),
            });
        }
        let s = DVector::from_iterator(symbols.len(), symbols.iter().map(|&x| Complex64::new(x, 0.0)));
        Ok((&self.psi * s).iter().map(|x| x.norm_sqr()).collect())
    }
}

/// Builds the `K × N′` operator from a sampled impulse response.
pub fn build_conv_operator(cir: &Cir, k: usize, n_os: usize) -> Result<ConvOperator> {
    if n_os != 2 {
        return Err(Error::invalid(
            "n_os",
            format!("only N_os = 2 yields white sampled noise, got {n_os}"),
        ));
    }
    if cir.is_empty() {
        return Err(Error::invalid("cir", "impulse response is empty"));
    }
    if k == 0 {
        return Err(Error::invalid("k", "need at least one observation"));
    }
    let m = cir.len();
    let n = k + m - 1;
    let parity = (m - 1) % n_os;
    let kept_cols: Vec<usize> = (0..n).filter(|j| j % n_os == parity).collect();
    let m_prime = (m - 1) / n_os;
    let k_prime = (k - 1) / n_os;
    debug_assert_eq!(kept_cols.len(), m_prime + k_prime + 1);
    // Ψ′[i, j] = ψ[M − 1 + i − j] for j in [i, i + M − 1]
    let psi = DMatrix::from_fn(k, kept_cols.len(), |i, c| {
        let j = kept_cols[c];
        let lag = (m - 1 + i) as isize - j as isize;
        if (0..m as isize).contains(&lag) {
            cir.taps[lag as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(ConvOperator {
        psi,
        kept_cols,
        m_taps: m,
        m_prime,
        k_prime,
        n_os,
        gram: OnceLock::new(),
    })
}

/// One observation window `u = |Ψ·s|² + η` with seeded white Gaussian noise.
pub fn forward_simulate(
    op: &ConvOperator,
    symbols: &[f64],
    sigma_eta2: f64,
    rng_seed: u64,
) -> Result<Vec<f64>> {
    if !(sigma_eta2 >= 0.0) {
        return Err(Error::invalid("sigma_eta2", "noise variance must be >= 0"));
    }
    if symbols.iter().any(|&s| s < 0.0) {
        return Err(Error::Domain("intensity modulation needs nonnegative symbols".into()));
    }
    let mut u = op.intensities(symbols)?;
    if sigma_eta2 > 0.0 {
        let sd = sigma_eta2.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for x in &mut u {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x += sd * z;
        }
    }
    Ok(u)
}
