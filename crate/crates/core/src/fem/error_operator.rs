use crate::error::{invalid, Result};
use crate::fem::FemOperators;
use crate::spectral::{EigenBasis, SpectralVector};

/// Index `j` with `t` in `[t_{j-1}, t_j)`; `t = 0` maps to 1.
fn step_index(t: f64, k: f64) -> usize {
    (t / k * (1.0 + 1e-12)).floor() as usize + 1
}

/// `F_{k,h}(t) x = S_{k,h}(t) P_h x - E(t) x` with the piecewise-constant
/// discrete semigroup `S_{k,h}(t) = (I + k A_h)^{-j}` on `[t_{j-1}, t_j)`.
/// The discrete part is lifted exactly onto the basis modes.
pub fn error_operator(
    ops: &FemOperators,
    basis: &EigenBasis,
    k: f64,
    t: f64,
    x: &SpectralVector,
) -> Result<SpectralVector> {
    if !(t >= 0.0) || !(k > 0.0) {
        return invalid(format!("need t >= 0 and k > 0, got t = {t}, k = {k}"));
    }
    let j = step_index(t, k);
    let factor = ops.euler_factor(k)?;
    let mut u = ops.project_spectral(x).into_values();
    let mut tmp = vec![0.0; u.len()];
    for _ in 0..j {
        ops.mass().mul_vec(&u, &mut tmp);
        factor.solve_in_place(&mut tmp);
        std::mem::swap(&mut u, &mut tmp);
    }
    let mut out = ops.lift_values(&u, basis.n_modes());
    let exact = basis.apply_semigroup(&x.resized(basis.n_modes()), t)?;
    out.axpy(-1.0, &exact);
    Ok(out)
}

/// `(int_0^T ||F_{k,h}(s) x||^2 ds)^{1/2}`, integrated in closed form on
/// every step interval.
pub fn error_operator_time_l2(
    ops: &FemOperators,
    basis: &EigenBasis,
    k: f64,
    horizon: f64,
    x: &SpectralVector,
) -> Result<f64> {
    if !(horizon > 0.0) || !(k > 0.0) {
        return invalid(format!("need T > 0 and k > 0, got T = {horizon}, k = {k}"));
    }
    let n_modes = x.len().min(basis.n_modes());
    let lambdas = &basis.eigenvalues()[..n_modes];
    let xs = &x.coefficients()[..n_modes];
    let factor = ops.euler_factor(k)?;
    let mut u = ops.project_spectral(x).into_values();
    let mut tmp = vec![0.0; u.len()];
    let n_steps = (horizon / k * (1.0 - 1e-12)).ceil() as usize;

    // int_a^b exp(-c s) ds
    let decay_integral = |c: f64, a: f64, b: f64| -> f64 {
        if c == 0.0 {
            b - a
        } else {
            -(-c * a).exp() * (-c * (b - a)).exp_m1() / c
        }
    };

    let mut total = 0.0;
    for j in 1..=n_steps {
        ops.mass().mul_vec(&u, &mut tmp);
        factor.solve_in_place(&mut tmp);
        std::mem::swap(&mut u, &mut tmp);
        let a = (j - 1) as f64 * k;
        let b = (j as f64 * k).min(horizon);
        let uu = ops.h_norm_values(&u).powi(2);
        let lifted = ops.lift_values(&u, n_modes);
        let mut cross = 0.0;
        let mut exact = 0.0;
        for m in 0..n_modes {
            cross += lifted.coefficients()[m] * xs[m] * decay_integral(lambdas[m], a, b);
            exact += xs[m] * xs[m] * decay_integral(2.0 * lambdas[m], a, b);
        }
        total += uu * (b - a) - 2.0 * cross + exact;
    }
    Ok(total.max(0.0).sqrt())
}
