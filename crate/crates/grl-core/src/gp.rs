//! Gaussian-process informativeness: mutual information between noisy
//! observations along a trajectory and the latent field,
//! `F(X) = 1/2 * logdet(I + noise^-1 * K_XX)`.
//!
//! Repeated states are genuine repeated measurements: they keep adding
//! (diminishing) information, so F depends on visit counts, not just on the
//! set of visited states.

use crate::error::{Error, Result};
use crate::gmdp::{GroundElement, GroundSet};
use crate::rewards::{GlobalReward, RewardKind};
use serde::{Deserialize, Serialize};

/// Matern smoothness, restricted to the closed-form half-integer orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaternNu {
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "3/2")]
    ThreeHalves,
    #[serde(rename = "5/2")]
    FiveHalves,
}

/// Stationary Matern field observed under i.i.d. Gaussian noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    pub nu: MaternNu,
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl Default for GpParams {
    fn default() -> Self {
        GpParams {
            nu: MaternNu::FiveHalves,
            length_scale: 2.0,
            signal_variance: 1.0,
            noise_variance: 0.1,
        }
    }
}

impl GpParams {
    fn validate(&self) -> Result<()> {
        if !(self.length_scale > 0.0) || !self.length_scale.is_finite() {
            return Err(Error::InvalidReward("length scale must be positive".into()));
        }
        if !(self.signal_variance > 0.0) || !self.signal_variance.is_finite() {
            return Err(Error::InvalidReward("signal variance must be positive".into()));
        }
        if !(self.noise_variance > 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::InvalidReward("noise variance must be positive".into()));
        }
        Ok(())
    }

    fn kernel_value(&self, d: f64) -> f64 {
        let r = d / self.length_scale;
        let shape = match self.nu {
            MaternNu::Half => (-r).exp(),
            MaternNu::ThreeHalves => {
                let z = 3f64.sqrt() * r;
                (1.0 + z) * (-z).exp()
            }
            MaternNu::FiveHalves => {
                let z = 5f64.sqrt() * r;
                (1.0 + z + z * z / 3.0) * (-z).exp()
            }
        };
        self.signal_variance * shape
    }
}

/// Planar coordinates of every grid state, row-major with row 0 at the
/// bottom (matching the grid process layout).
pub fn grid_points(width: usize, height: usize) -> Vec<(f64, f64)> {
    let mut points = Vec::with_capacity(width * height);
    for row in 0..height {
        for col in 0..width {
            points.push((col as f64, row as f64));
        }
    }
    points
}

/// Dense Matern Gram matrix over the given points, row-major.
pub fn matern_kernel(params: &GpParams, points: &[(f64, f64)]) -> Vec<f64> {
    let n = points.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            let v = params.kernel_value((dx * dx + dy * dy).sqrt());
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Mutual-information reward backed by a fixed per-state Gram matrix.
pub struct MutualInformationReward {
    kernel: Vec<f64>,
    num_states: usize,
    noise_variance: f64,
}

pub fn mutual_information_reward(
    params: &GpParams,
    points: &[(f64, f64)],
) -> Result<MutualInformationReward> {
    params.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidReward("no observation points".into()));
    }
    Ok(MutualInformationReward {
        kernel: matern_kernel(params, points),
        num_states: points.len(),
        noise_variance: params.noise_variance,
    })
}

impl MutualInformationReward {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn kernel_entry(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.num_states + j]
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

impl GlobalReward for MutualInformationReward {
    /// Repeated states are compressed: with visit counts D over distinct
    /// states, `logdet(I_n + noise^-1 K_XX) = logdet(I_d + noise^-1 *
    /// D^1/2 K~ D^1/2)` by the Weinstein-Aronszajn identity.
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        if x.is_empty() {
            return 0.0;
        }
        let mut counts = vec![0u32; self.num_states];
        for e in x {
            counts[e.state] += 1;
        }
        let distinct: Vec<usize> = (0..self.num_states).filter(|&s| counts[s] > 0).collect();
        let d = distinct.len();
        let mut a = vec![0.0; d * d];
        for (i, &si) in distinct.iter().enumerate() {
            let wi = (counts[si] as f64).sqrt();
            for (j, &sj) in distinct.iter().enumerate() {
                let wj = (counts[sj] as f64).sqrt();
                a[i * d + j] = wi * wj * self.kernel_entry(si, sj) / self.noise_variance;
            }
            a[i * d + i] += 1.0;
        }
        // I + PSD is comfortably positive definite; failure is a real bug.
        let l = cholesky_with_jitter(a, d).expect("information matrix must be positive definite");
        (0..d).map(|i| l[i * d + i].ln()).sum()
    }

    fn kind(&self) -> RewardKind {
        RewardKind::Submodular
    }

    /// Exact chain-rule marginals via posterior-variance downdates: after
    /// observing state s, `Sigma <- Sigma - Sigma[:,s] Sigma[s,:] /
    /// (Sigma[s,s] + noise)`, and each step contributes
    /// `1/2 ln(1 + Sigma[s,s] / noise)`. O(S^2) per element.
    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        let n = self.num_states;
        let mut sigma = self.kernel.clone();
        let mut out = Vec::with_capacity(chain.len());
        let mut col = vec![0.0; n];
        for e in chain {
            let s = e.state;
            let var = sigma[s * n + s];
            out.push(0.5 * (1.0 + var / self.noise_variance).ln());
            let denom = var + self.noise_variance;
            for i in 0..n {
                col[i] = sigma[i * n + s];
            }
            for i in 0..n {
                let ci = col[i] / denom;
                if ci == 0.0 {
                    continue;
                }
                let row = i * n;
                for j in 0..n {
                    sigma[row + j] -= ci * col[j];
                }
            }
        }
        out
    }

    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        ground
            .elements()
            .map(|e| {
                0.5 * (1.0 + self.kernel_entry(e.state, e.state) / self.noise_variance).ln()
            })
            .collect()
    }

    /// `F(v | V - v) = -1/2 ln(1 - noise^-1 (M^-1 K)_ss)` with
    /// `M = I + noise^-1 H K`: dropping one of H copies of state s is a
    /// rank-one update of the compressed information matrix.
    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        let n = self.num_states;
        let h = ground.horizon as f64;
        let scale = h / self.noise_variance;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = scale * self.kernel_entry(i, j);
            }
            m[i * n + i] += 1.0;
        }
        let l = cholesky_with_jitter(m, n).expect("information matrix must be positive definite");
        // Solve M Z = K column by column; we only need diag(Z).
        let mut per_state = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for s in 0..n {
            for i in 0..n {
                rhs[i] = self.kernel_entry(i, s);
            }
            solve_cholesky_in_place(&l, n, &mut rhs);
            per_state[s] = -0.5 * (1.0 - rhs[s] / self.noise_variance).ln();
        }
        ground.elements().map(|e| per_state[e.state]).collect()
    }
}

/// In-place lower Cholesky with escalating jitter (1e-10 to 1e-6, tenfold
/// steps) on the diagonal; the jitter restarts from the original matrix.
fn cholesky_with_jitter(a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    let mut jitter = 0.0;
    loop {
        let mut work = a.clone();
        if jitter > 0.0 {
            for i in 0..n {
                work[i * n + i] += jitter;
            }
        }
        if cholesky_in_place(&mut work, n) {
            return Ok(work);
        }
        jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 };
        if jitter > 1e-6 {
            return Err(Error::Numerical(
                "Cholesky failed even with 1e-6 jitter".into(),
            ));
        }
    }
}

/// Standard lower-triangular Cholesky; returns false on a non-positive pivot.
fn cholesky_in_place(a: &mut [f64], n: usize) -> bool {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                a[i * n + i] = sum.sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
        for j in (i + 1)..n {
            a[i * n + j] = 0.0;
        }
    }
    true
}

/// Solve `L L^T x = b` in place given the lower factor.
fn solve_cholesky_in_place(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * b[k];
        }
        b[i] = sum / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * b[k];
        }
        b[i] = sum / l[i * n + i];
    }
}
