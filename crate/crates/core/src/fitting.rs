// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Least-squares fits: ground-state density from coupling-off
//! absorption, and the cubic (Kerr-type) nonlinearity coefficient.
//!
//! The nonlinear fit is a small damped Gauss-Newton
//! (Levenberg-Marquardt) with an analytic Jacobian; two parameters and a
//! few hundred residuals never warrant more machinery than that.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::pair::AtomParams;
use crate::units;
use crate::Result;

/// Damped Gauss-Newton controls.
#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative decrease of the squared residual falls
    /// below this.
    pub ftol: f64,
    /// Stop when the step is this small relative to the parameters.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            ftol: 1e-14,
            xtol: 1e-14,
        }
    }
}

/// Fit result: parameters, covariance, and residual diagnostics.
#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// sigma^2 (J^T J)^-1 with sigma^2 = rss / (m - n).
    pub covariance: Vec<Vec<f64>>,
    pub rss: f64,
    pub iterations: usize,
}

/// Minimize |r(x)|^2 for residuals `r` with Jacobian `jac` (row i is
/// d r_i / d x). Damping grows until a step decreases the residual, so
/// the objective is monotone over accepted iterations.
#[allow(clippy::needless_range_loop)]
pub fn levenberg_marquardt(
    residuals: impl Fn(&[f64]) -> Vec<f64>,
    jacobian: impl Fn(&[f64]) -> Vec<Vec<f64>>,
    x0: &[f64],
    opts: &LmOptions,
) -> Result<LmFit> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residuals(&x);
    let m = r.len();
    if m < n {
        return Err(Error::FitFailed {
            reason: String::from("fewer residuals than parameters"),
        });
    }
    let mut rss: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut iterations = 0;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        let jac = jacobian(&x);
        // Normal equations J^T J and J^T r.
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..n {
                jtr[a] += row[a] * ri;
                for b in a..n {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }
        if jtj.iter().enumerate().any(|(a, row)| row[a] <= 0.0) {
            return Err(Error::FitFailed {
                reason: String::from("rank-deficient Jacobian (flat model direction)"),
            });
        }

        let mut stepped = false;
        for _ in 0..20 {
            let mut damped = jtj.clone();
            for a in 0..n {
                damped[a][a] += lambda * jtj[a][a];
            }
            let Some(delta) = solve_small(&damped, &jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi - di).collect();
            let trial_r = residuals(&trial);
            let trial_rss: f64 = trial_r.iter().map(|v| v * v).sum();
            if trial_rss.is_finite() && trial_rss <= rss {
                let step_small = delta
                    .iter()
                    .zip(&x)
                    .all(|(d, xi)| d.abs() <= opts.xtol * (xi.abs() + opts.xtol));
                let f_small = rss - trial_rss <= opts.ftol * rss.max(f64::MIN_POSITIVE);
                x = trial;
                r = trial_r;
                rss = trial_rss;
                lambda = (lambda / 3.0).max(1e-12);
                stepped = true;
                if step_small || f_small {
                    return finish(x, r, rss, iterations, &jacobian);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !stepped {
            // No decrease found at any damping: converged or stuck.
            return finish(x, r, rss, iterations, &jacobian);
        }
    }
    finish(x, r, rss, iterations, &jacobian)
}

#[allow(clippy::needless_range_loop)]
fn finish(
    x: Vec<f64>,
    r: Vec<f64>,
    rss: f64,
    iterations: usize,
    jacobian: &impl Fn(&[f64]) -> Vec<Vec<f64>>,
) -> Result<LmFit> {
    let n = x.len();
    let m = r.len();
    let jac = jacobian(&x);
    let mut jtj = vec![vec![0.0; n]; n];
    for row in &jac {
        for a in 0..n {
            for b in a..n {
                jtj[a][b] += row[a] * row[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            jtj[a][b] = jtj[b][a];
        }
    }
    let sigma_sq = if m > n { rss / (m - n) as f64 } else { 0.0 };
    let inv = invert_small(&jtj).ok_or_else(|| Error::FitFailed {
        reason: String::from("singular normal equations at the optimum"),
    })?;
    let covariance = inv
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * sigma_sq).collect())
        .collect();
    Ok(LmFit {
        params: x,
        covariance,
        rss,
        iterations,
    })
}

/// Gaussian elimination for the tiny symmetric systems above.
#[allow(clippy::needless_range_loop)]
fn solve_small(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut best = col;
        for row in (col + 1)..n {
            if m[row][col].abs() > m[best][col].abs() {
                best = row;
            }
        }
        if m[best][col] == 0.0 {
            return None;
        }
        m.swap(col, best);
        x.swap(col, best);
        let pivot = m[col][col];
        for row in (col + 1)..n {
            let f = m[row][col] / pivot;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                let sub = f * m[col][k];
                m[row][k] -= sub;
            }
            x[row] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for k in (i + 1)..n {
            acc -= m[i][k] * x[k];
        }
        x[i] = acc / m[i][i];
    }
    Some(x)
}

fn invert_small(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve_small(a, &e)?);
    }
    // cols[j][i] = inv[i][j]
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// Density-fit result: weighted least squares of the weak-probe
/// Beer-Lambert Lorentzian.
#[derive(Debug, Clone)]
pub struct DensityFit {
    pub density_m3: f64,
    pub center_mhz: f64,
    pub sigma_density_m3: f64,
    pub sigma_center_mhz: f64,
    pub residual_rms: f64,
    pub iterations: usize,
}

/// Fit T(delta) = exp(-N sigma0 l / (1 + 4 (delta - delta0)^2 / Ge^2))
/// to a coupling-off transmission spectrum, returning the density and
/// line-center offset with 1-sigma uncertainties from the Jacobian.
pub fn fit_density(
    deltas_mhz: &[f64],
    transmissions: &[f64],
    atom: &AtomParams,
    path_length_m: f64,
) -> Result<DensityFit> {
    if deltas_mhz.len() != transmissions.len() {
        return Err(Error::DimensionMismatch {
            expected: deltas_mhz.len(),
            found: transmissions.len(),
        });
    }
    if deltas_mhz.len() < 4 {
        return Err(Error::invalid("spectrum", "need at least 4 points"));
    }
    let span = deltas_mhz.iter().cloned().fold(f64::MIN, f64::max)
        - deltas_mhz.iter().cloned().fold(f64::MAX, f64::min);
    if span < 4.0 * atom.gamma_e_mhz {
        return Err(Error::invalid(
            "spectrum",
            alloc::format!(
                "span {span:.2} MHz covers fewer than 4 linewidths ({:.2} MHz)",
                4.0 * atom.gamma_e_mhz
            ),
        ));
    }
    if transmissions.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::invalid("transmission", "values must be in (0, 1]"));
    }
    let t_max = transmissions.iter().cloned().fold(f64::MIN, f64::max);
    let t_low = transmissions.iter().cloned().fold(f64::MAX, f64::min);
    if t_max - t_low < 0.01 {
        return Err(Error::FitFailed {
            reason: String::from("degenerate data: no absorption feature above 1% contrast"),
        });
    }
    let sigma0_l = units::resonant_cross_section(atom.lambda_p_m) * path_length_m;
    let gamma = atom.gamma_e_mhz;

    // Parameters: peak optical depth and line center.
    let (min_idx, t_min) = transmissions
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite transmission"))
        .expect("non-empty");
    let od0 = -libm::log(t_min.max(1e-12));
    let x0 = [od0.max(1e-6), deltas_mhz[min_idx]];

    let model = |p: &[f64], delta: f64| -> f64 {
        let d = delta - p[1];
        libm::exp(-p[0] / (1.0 + 4.0 * d * d / (gamma * gamma)))
    };
    let residuals = |p: &[f64]| -> Vec<f64> {
        deltas_mhz
            .iter()
            .zip(transmissions)
            .map(|(&delta, &t)| model(p, delta) - t)
            .collect()
    };
    let jacobian = |p: &[f64]| -> Vec<Vec<f64>> {
        deltas_mhz
            .iter()
            .map(|&delta| {
                let d = delta - p[1];
                let lorentz = 1.0 / (1.0 + 4.0 * d * d / (gamma * gamma));
                let t = libm::exp(-p[0] * lorentz);
                let dt_dod = -lorentz * t;
                // d lorentz / d center = +8 d / Ge^2 * lorentz^2
                let dt_dcenter = -p[0] * t * 8.0 * d / (gamma * gamma) * lorentz * lorentz;
                vec![dt_dod, dt_dcenter]
            })
            .collect()
    };

    let fit = levenberg_marquardt(residuals, jacobian, &x0, &LmOptions::default())?;
    let density = fit.params[0] / sigma0_l;
    let m = deltas_mhz.len();
    Ok(DensityFit {
        density_m3: density,
        center_mhz: fit.params[1],
        sigma_density_m3: libm::sqrt(fit.covariance[0][0].max(0.0)) / sigma0_l,
        sigma_center_mhz: libm::sqrt(fit.covariance[1][1].max(0.0)),
        residual_rms: libm::sqrt(fit.rss / m as f64),
        iterations: fit.iterations,
    })
}

/// Convention for quoting the cubic coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KerrConvention {
    /// chi3 is the direct coefficient of E^2 in chi_I.
    #[default]
    DirectCoefficient,
    /// chi_I = chi1 + (3/4) chi3 E^2 (degenerate-Kerr convention).
    ThreeQuarters,
}

/// Cubic-nonlinearity fit chi_I(E) = chi1 + c E^2 on points below the
/// field cutoff.
#[derive(Debug, Clone)]
pub struct Chi3Fit {
    pub chi1_im: f64,
    /// Imaginary third-order coefficient, m^2/V^2, under `convention`.
    pub chi3_im: f64,
    pub convention: KerrConvention,
    pub cutoff_field_v_m: f64,
    pub residual_rms: f64,
    pub points_used: usize,
}

/// Linear least squares of chi_I against E^2, restricted to fields at or
/// below `cutoff_field_v_m`.
pub fn fit_chi3(
    points: &[(f64, f64)],
    cutoff_field_v_m: f64,
    convention: KerrConvention,
) -> Result<Chi3Fit> {
    if !cutoff_field_v_m.is_finite() || cutoff_field_v_m <= 0.0 {
        return Err(Error::invalid("cutoff_field_v_m", "must be > 0"));
    }
    let selected: Vec<(f64, f64)> = points
        .iter()
        .filter(|(field, _)| *field <= cutoff_field_v_m)
        .map(|&(field, chi)| (field * field, chi))
        .collect();
    if selected.len() < 3 {
        return Err(Error::invalid(
            "points",
            alloc::format!("need >= 3 points below the cutoff, found {}", selected.len()),
        ));
    }
    let m = selected.len() as f64;
    let mean_u: f64 = selected.iter().map(|(u, _)| u).sum::<f64>() / m;
    let mean_y: f64 = selected.iter().map(|(_, y)| y).sum::<f64>() / m;
    let var_u: f64 = selected.iter().map(|(u, _)| (u - mean_u) * (u - mean_u)).sum();
    if var_u <= 0.0 {
        return Err(Error::FitFailed {
            reason: String::from("all selected points share one field value"),
        });
    }
    let cov_uy: f64 = selected
        .iter()
        .map(|(u, y)| (u - mean_u) * (y - mean_y))
        .sum();
    let slope = cov_uy / var_u;
    let intercept = mean_y - slope * mean_u;
    let rss: f64 = selected
        .iter()
        .map(|(u, y)| {
            let r = intercept + slope * u - y;
            r * r
        })
        .sum();
    let chi3_im = match convention {
        KerrConvention::DirectCoefficient => slope,
        KerrConvention::ThreeQuarters => 4.0 / 3.0 * slope,
    };
    Ok(Chi3Fit {
        chi1_im: intercept,
        chi3_im,
        convention,
        cutoff_field_v_m,
        residual_rms: libm::sqrt(rss / m),
        points_used: selected.len(),
    })
}
