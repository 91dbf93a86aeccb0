//! Eigenvalue and singular-value analysis of chains: relaxation time,
//! spectral gap, and the second singular value σ₁ on L²(π).
//!
//! Reversible kernels are symmetrized as `D^{1/2} P D^{-1/2}` (D = diag π)
//! and eigensolved densely up to [`DENSE_EIG_CAP`] states. Beyond that, power
//! iteration with deflation recovers only the two extreme eigenvalues, which
//! is all the relaxation time needs. `t_rel = +∞` is a first-class value
//! (reported whenever some nontrivial |λ| reaches 1), never an error.

use serde::Serialize;

use crate::linalg::{dominant_eigenpair, growth_rate, jacobi_eigen, DenseMatrix};
use crate::{Error, MarkovChain, Result};

/// Dense eigensolve cap; larger chains use the power-iteration path.
pub const DENSE_EIG_CAP: usize = 2048;

const JACOBI_TOL: f64 = 1e-10;
const UNIT_EIG_TOL: f64 = 1e-9;

/// Serialize extended reals: +∞ becomes the string `"inf"`.
pub(crate) mod extended {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    /// Full spectrum sorted descending (dense reversible path only).
    pub eigenvalues: Option<Vec<f64>>,
    /// max(|λ₁|, |λ_{N−1}|) for reversible chains; a nontrivial spectral
    /// radius estimate otherwise.
    pub lambda_star: f64,
    /// Second largest singular value of P on L²(π).
    pub sigma1: f64,
    /// max over nontrivial λ of 1/(1−|λ|); +∞ when some nontrivial |λ| = 1.
    #[serde(serialize_with = "extended::serialize")]
    pub t_rel: f64,
    /// 1 − λ₁.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMode {
    /// Full spectrum for reversible chains, extremes otherwise.
    Auto,
    /// Demand the full spectrum; errors on non-reversible chains.
    FullSpectrum,
}

/// The π-symmetrized kernel `D^{1/2} P D^{-1/2}` as a dense matrix.
pub(crate) fn symmetrized_dense(chain: &MarkovChain) -> DenseMatrix {
    let n = chain.n_states();
    let d: Vec<f64> = chain.stationary().iter().map(|&p| p.sqrt()).collect();
    let mut m = DenseMatrix::zeros(n);
    for x in 0..n {
        chain.kernel().for_each_in_row(x, |y, p| {
            *m.at_mut(x, y) += d[x] * p / d[y];
        });
    }
    m
}

fn t_rel_from(lambda_star: f64) -> f64 {
    if lambda_star >= 1.0 - UNIT_EIG_TOL {
        f64::INFINITY
    } else {
        1.0 / (1.0 - lambda_star)
    }
}

/// Apply the symmetrized kernel without materializing it.
fn apply_symmetrized(chain: &MarkovChain, sqrt_pi: &[f64], v: &[f64]) -> Vec<f64> {
    // S x = D^{1/2} P D^{-1/2} x: scale, apply P on the right, scale back.
    let scaled: Vec<f64> = v.iter().zip(sqrt_pi).map(|(x, d)| x / d).collect();
    let image = chain.kernel().apply_right(&scaled);
    image.into_iter().zip(sqrt_pi).map(|(x, d)| x * d).collect()
}

pub fn analyze(chain: &MarkovChain) -> Result<SpectralSummary> {
    analyze_with_mode(chain, SpectrumMode::Auto)
}

pub fn analyze_with_mode(chain: &MarkovChain, mode: SpectrumMode) -> Result<SpectralSummary> {
    let n = chain.n_states();
    if chain.reversible() {
        if n <= DENSE_EIG_CAP {
            let sym = symmetrized_dense(chain);
            let eig = jacobi_eigen(&sym, JACOBI_TOL, 128)?;
            let values = eig.values;
            let lambda_star = values[1..]
                .iter()
                .map(|l| l.abs())
                .fold(0.0, f64::max)
                .min(1.0);
            let gap = 1.0 - values.get(1).copied().unwrap_or(1.0);
            Ok(SpectralSummary {
                lambda_star,
                sigma1: lambda_star,
                t_rel: t_rel_from(lambda_star),
                gap,
                eigenvalues: Some(values),
            })
        } else {
            let sqrt_pi: Vec<f64> = chain.stationary().iter().map(|&p| p.sqrt()).collect();
            // (S+I)/2 has spectrum (1+λ)/2 in [0,1]; deflating √π leaves λ₁ on top.
            let (mu_top, _) = dominant_eigenpair(
                n,
                |v| {
                    let mut w = apply_symmetrized(chain, &sqrt_pi, v);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi = 0.5 * (*wi + vi);
                    }
                    w
                },
                &[sqrt_pi.clone()],
                1e-12,
                200_000,
            )?;
            let lambda_1 = (2.0 * mu_top - 1.0).clamp(-1.0, 1.0);
            // (I−S)/2 has spectrum (1−λ)/2; its top recovers λ_{N−1}.
            let (mu_bot, _) = dominant_eigenpair(
                n,
                |v| {
                    let w = apply_symmetrized(chain, &sqrt_pi, v);
                    v.iter().zip(w).map(|(vi, wi)| 0.5 * (vi - wi)).collect()
                },
                &[],
                1e-12,
                200_000,
            )?;
            let lambda_min = (1.0 - 2.0 * mu_bot).clamp(-1.0, 1.0);
            let lambda_star = lambda_1.abs().max(lambda_min.abs());
            Ok(SpectralSummary {
                eigenvalues: None,
                lambda_star,
                sigma1: lambda_star,
                t_rel: t_rel_from(lambda_star),
                gap: 1.0 - lambda_1,
            })
        }
    } else {
        if mode == SpectrumMode::FullSpectrum {
            return Err(Error::UnsupportedMode(
                "full spectrum requires a reversible chain".into(),
            ));
        }
        let sigma1 = second_singular_value(chain)?;
        // Nontrivial spectral radius via the growth rate of (P − E) applied
        // in L²(π) coordinates; exact enough for reporting t_rel.
        let sqrt_pi: Vec<f64> = chain.stationary().iter().map(|&p| p.sqrt()).collect();
        let radius = if sigma1 <= 1e-12 {
            0.0
        } else {
            growth_rate(n, |v| apply_centered(chain, &sqrt_pi, v), 4096).min(sigma1)
        };
        Ok(SpectralSummary {
            eigenvalues: None,
            lambda_star: radius,
            sigma1,
            t_rel: t_rel_from(radius),
            gap: 1.0 - radius,
        })
    }
}

/// Apply `M − u uᵀ` where `M` is the symmetrized kernel and `u = √π`: the
/// nontrivial part of the chain in L²(π) coordinates.
fn apply_centered(chain: &MarkovChain, sqrt_pi: &[f64], v: &[f64]) -> Vec<f64> {
    let mut w = apply_symmetrized(chain, sqrt_pi, v);
    let dot: f64 = sqrt_pi.iter().zip(v).map(|(a, b)| a * b).sum();
    for (wi, u) in w.iter_mut().zip(sqrt_pi) {
        *wi -= dot * u;
    }
    w
}

/// Second largest singular value of P: the operator norm of (P − E) on
/// L²(π), where E projects onto constants. Computed through the Gram
/// operator of the centered symmetrized kernel, independently of the
/// eigenvalue path.
pub fn second_singular_value(chain: &MarkovChain) -> Result<f64> {
    let n = chain.n_states();
    let sqrt_pi: Vec<f64> = chain.stationary().iter().map(|&p| p.sqrt()).collect();
    if n <= DENSE_EIG_CAP {
        let m = symmetrized_dense(chain);
        let mut centered = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                *centered.at_mut(i, j) = m.at(i, j) - sqrt_pi[i] * sqrt_pi[j];
            }
        }
        let mut gram = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += centered.at(k, i) * centered.at(k, j);
                }
                *gram.at_mut(i, j) = s;
                *gram.at_mut(j, i) = s;
            }
        }
        let eig = jacobi_eigen(&gram, JACOBI_TOL, 128)?;
        Ok(eig.values[0].max(0.0).sqrt())
    } else {
        let (top, _) = dominant_eigenpair(
            n,
            |v| {
                let w = apply_centered(chain, &sqrt_pi, v);
                // Adjoint of the centered operator in these coordinates is its
                // transpose: apply via the reversed kernel.
                apply_centered_transpose(chain, &sqrt_pi, &w)
            },
            &[],
            1e-12,
            200_000,
        )?;
        Ok(top.max(0.0).sqrt())
    }
}

fn apply_centered_transpose(chain: &MarkovChain, sqrt_pi: &[f64], v: &[f64]) -> Vec<f64> {
    // (D^{1/2} P D^{-1/2})ᵀ x = D^{-1/2} Pᵀ D^{1/2} x.
    let scaled: Vec<f64> = v.iter().zip(sqrt_pi).map(|(x, d)| x * d).collect();
    let image = chain.kernel().apply_left(&scaled);
    let mut w: Vec<f64> = image.into_iter().zip(sqrt_pi).map(|(x, d)| x / d).collect();
    let dot: f64 = sqrt_pi.iter().zip(v).map(|(a, b)| a * b).sum();
    for (wi, u) in w.iter_mut().zip(sqrt_pi) {
        *wi -= dot * u;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{build_complete, build_cycle, build_hypercube, chain};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn complete_graph_spectrum() {
        // P = (J − I)/3 on 4 states: eigenvalues {1, −1/3, −1/3, −1/3}.
        let chain = build_complete(4, false).unwrap();
        let s = analyze(&chain).unwrap();
        let eig = s.eigenvalues.as_ref().unwrap();
        assert_close(eig[0], 1.0, 1e-9);
        for &l in &eig[1..] {
            assert_close(l, -1.0 / 3.0, 1e-10);
        }
        assert_close(s.t_rel, 1.5, 1e-10);
        assert_close(s.gap, 4.0 / 3.0, 1e-10);
    }

    #[test]
    fn cycle_spectra_match_closed_forms() {
        // cos(2πk/4) = {1, 0, −1, 0}: bipartite, t_rel = ∞.
        let c4 = build_cycle(4, 0.0).unwrap();
        let s = analyze(&c4).unwrap();
        let eig = s.eigenvalues.as_ref().unwrap();
        let want = [1.0, 0.0, 0.0, -1.0];
        for (g, w) in eig.iter().zip(want) {
            assert_close(*g, w, 1e-10);
        }
        assert!(s.t_rel.is_infinite());

        // Lazy shift (1+cos)/2 = {1, 1/2, 1/2, 0}: t_rel = 2.
        let lazy = build_cycle(4, 0.5).unwrap();
        let s = analyze(&lazy).unwrap();
        let eig = s.eigenvalues.as_ref().unwrap();
        let want = [1.0, 0.5, 0.5, 0.0];
        for (g, w) in eig.iter().zip(want) {
            assert_close(*g, w, 1e-10);
        }
        assert_close(s.t_rel, 2.0, 1e-9);
    }

    #[test]
    fn lazy_hypercube_gap_is_one_over_dim() {
        for dim in 1..=6 {
            let h = build_hypercube(dim, 0.5).unwrap();
            let s = analyze(&h).unwrap();
            assert_close(s.gap, 1.0 / dim as f64, 1e-9);
            assert_close(s.t_rel, dim as f64, 1e-6);
        }
    }

    #[test]
    fn second_singular_examples() {
        let k = build_complete(4, true).unwrap();
        assert!(second_singular_value(&k).unwrap() < 1e-9);

        let c4 = build_cycle(4, 0.0).unwrap();
        assert_close(second_singular_value(&c4).unwrap(), 1.0, 1e-9);

        let two = chain::from_dense_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert_close(second_singular_value(&two).unwrap(), 0.7, 1e-9);
    }

    #[test]
    fn sigma1_equals_lambda_star_for_reversible() {
        for spec in [
            build_cycle(6, 0.5).unwrap(),
            build_hypercube(4, 0.25).unwrap(),
            build_complete(5, false).unwrap(),
        ] {
            let s = analyze(&spec).unwrap();
            let svd = second_singular_value(&spec).unwrap();
            assert_close(s.sigma1, svd, 1e-9);
            assert!(s.t_rel >= 1.0 / s.gap - 1e-9);
        }
    }

    #[test]
    fn symmetrization_reconstructs_kernel() {
        let chain = chain::from_dense_rows(vec![
            vec![0.5, 0.3, 0.2],
            vec![0.1, 0.6, 0.3],
            vec![0.2, 0.45, 0.35],
        ])
        .unwrap();
        if !chain.reversible() {
            // Reconstruction only applies to the symmetrized path.
            return;
        }
        let sym = symmetrized_dense(&chain);
        let eig = jacobi_eigen(&sym, 1e-12, 128).unwrap();
        let n = 3;
        let d: Vec<f64> = chain.stationary().iter().map(|&p| p.sqrt()).collect();
        for x in 0..n {
            for y in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += eig.vectors.at(x, k) * eig.values[k] * eig.vectors.at(y, k);
                }
                let p = s * d[y] / d[x];
                assert_close(p, chain.entry(x, y), 1e-8);
            }
        }
    }

    #[test]
    fn deterministic_dense_path() {
        let chain = build_cycle(9, 0.25).unwrap();
        let a = analyze(&chain).unwrap();
        let b = analyze(&chain).unwrap();
        let ea = a.eigenvalues.unwrap();
        let eb = b.eigenvalues.unwrap();
        for (x, y) in ea.iter().zip(&eb) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(a.t_rel.to_bits(), b.t_rel.to_bits());
    }

    #[test]
    fn full_spectrum_mode_rejects_non_reversible() {
        // Directed 3-cycle with a touch of laziness stays irreducible and
        // aperiodic but is not reversible.
        let rows = vec![
            vec![0.2, 0.8, 0.0],
            vec![0.0, 0.2, 0.8],
            vec![0.8, 0.0, 0.2],
        ];
        let chain = chain::from_dense_rows(rows).unwrap();
        assert!(!chain.reversible());
        assert!(matches!(
            analyze_with_mode(&chain, SpectrumMode::FullSpectrum),
            Err(Error::UnsupportedMode(_))
        ));
        let s = analyze(&chain).unwrap();
        assert!(s.eigenvalues.is_none());
        assert!(s.sigma1 > 0.0 && s.sigma1 <= 1.0 + 1e-9);
        // |0.2 + 0.8 ω| for ω a primitive cube root of unity.
        let expect = (0.2f64 * 0.2 + 0.8 * 0.8 + 2.0 * 0.2 * 0.8 * (-0.5)).sqrt();
        assert_close(s.lambda_star, expect, 1e-3);
    }

    #[test]
    fn power_path_matches_dense_on_mid_size() {
        // Compare the two routes on a chain comfortably inside both.
        let chain = build_hypercube(7, 0.5).unwrap();
        let dense = analyze(&chain).unwrap();
        let sqrt_pi: Vec<f64> = chain.stationary().iter().map(|&p| p.sqrt()).collect();
        let (mu_top, _) = dominant_eigenpair(
            chain.n_states(),
            |v| {
                let mut w = apply_symmetrized(&chain, &sqrt_pi, v);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi = 0.5 * (*wi + vi);
                }
                w
            },
            &[sqrt_pi.clone()],
            1e-12,
            200_000,
        )
        .unwrap();
        assert_close(2.0 * mu_top - 1.0, dense.eigenvalues.unwrap()[1], 1e-8);
    }
}
