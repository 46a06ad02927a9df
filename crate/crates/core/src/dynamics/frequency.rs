use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::DynamicsError;
use crate::lg::StateSpaceModel;

/// Complex gains of a model over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub freqs_hz: Vec<f64>,
    /// One `outputs x inputs` gain matrix per frequency.
    pub gains: Vec<DMatrix<Complex64>>,
}

impl FrequencyResponse {
    /// Gain sequence for one output/input pair.
    pub fn channel(&self, output: usize, input: usize) -> Vec<Complex64> {
        self.gains.iter().map(|g| g[(output, input)]).collect()
    }

    pub fn magnitude(&self, output: usize, input: usize) -> Vec<f64> {
        self.gains.iter().map(|g| g[(output, input)].norm()).collect()
    }

    /// Phase in radians.
    pub fn phase(&self, output: usize, input: usize) -> Vec<f64> {
        self.gains.iter().map(|g| g[(output, input)].arg()).collect()
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k == n - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Evaluates `C (jwI - A)^-1 B + D + jw F` repeatedly for one model.
///
/// `A` is reduced once to upper Hessenberg form `H = Q^T A Q`, which makes
/// each evaluation an O(n^2) solve instead of a fresh O(n^3) factorization.
pub struct TransferEvaluator<'a> {
    ss: &'a StateSpaceModel,
    h: DMatrix<f64>,
    qtb: DMatrix<f64>,
    cq: DMatrix<f64>,
    scale: f64,
}

/// Relative pivot size treated as an exact singularity.
const SINGULAR_RTOL: f64 = 1e-13;

impl<'a> TransferEvaluator<'a> {
    pub fn new(ss: &'a StateSpaceModel) -> Self {
        let n = ss.state_count();
        let (q, h) = if n == 0 {
            (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
        } else {
            ss.a.clone().hessenberg().unpack()
        };
        let qtb = q.transpose() * &ss.b;
        let cq = &ss.c * &q;
        let scale = h.amax();
        Self { ss, h, qtb, cq, scale }
    }

    /// Gain matrix at angular frequency `omega` (rad/s). `omega = 0` is allowed.
    pub fn at_omega(&self, omega: f64) -> Option<DMatrix<Complex64>> {
        let s = Complex64::new(0.0, omega);
        let n = self.h.nrows();
        let (p, m) = (self.ss.output_count(), self.ss.input_count());

        let mut gain = self.ss.d.map(|v| Complex64::new(v, 0.0)) + self.ss.f.map(|v| s * v);
        if n == 0 {
            return Some(gain);
        }

        // Row-major copy of sI - H.
        let mut mat: Vec<Complex64> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
                mat.push(diag - self.h[(i, j)]);
            }
        }
        let mut rhs: Vec<Complex64> = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                rhs.push(Complex64::new(self.qtb[(i, j)], 0.0));
            }
        }

        let tol = SINGULAR_RTOL * (self.scale + omega.abs()).max(f64::MIN_POSITIVE);
        // Gaussian elimination; only the subdiagonal needs clearing.
        for k in 0..n {
            if k + 1 < n && mat[(k + 1) * n + k].norm() > mat[k * n + k].norm() {
                for j in k..n {
                    mat.swap(k * n + j, (k + 1) * n + j);
                }
                for j in 0..m {
                    rhs.swap(k * m + j, (k + 1) * m + j);
                }
            }
            let pivot = mat[k * n + k];
            if pivot.norm().is_nan() || pivot.norm() <= tol {
                return None;
            }
            if k + 1 < n {
                let factor = mat[(k + 1) * n + k] / pivot;
                if factor != Complex64::new(0.0, 0.0) {
                    for j in k..n {
                        let v = mat[k * n + j];
                        mat[(k + 1) * n + j] -= factor * v;
                    }
                    for j in 0..m {
                        let v = rhs[k * m + j];
                        rhs[(k + 1) * m + j] -= factor * v;
                    }
                }
            }
        }
        for k in (0..n).rev() {
            for j in 0..m {
                let mut acc = rhs[k * m + j];
                for c in k + 1..n {
                    acc -= mat[k * n + c] * rhs[c * m + j];
                }
                rhs[k * m + j] = acc / mat[k * n + k];
            }
        }

        for o in 0..p {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.cq[(o, k)] * rhs[k * m + j];
                }
                gain[(o, j)] += acc;
            }
        }
        Some(gain)
    }
}

/// Complex gain `C (jwI - A)^-1 B + D + jw F` at each frequency (Hz).
pub fn frequency_response(ss: &StateSpaceModel, freqs_hz: &[f64]) -> Result<FrequencyResponse, DynamicsError> {
    let increasing = freqs_hz.windows(2).all(|w| w[0] < w[1]);
    if !increasing || freqs_hz.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(DynamicsError::InvalidGrid);
    }
    let eval = TransferEvaluator::new(ss);
    let gains = freqs_hz
        .iter()
        .enumerate()
        .map(|(index, &f)| {
            eval.at_omega(2.0 * PI * f)
                .ok_or(DynamicsError::SingularAtFrequency { index, freq_hz: f })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FrequencyResponse {
        freqs_hz: freqs_hz.to_vec(),
        gains,
    })
}
