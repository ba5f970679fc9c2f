//! Torus average of the quartic nonlinearity: quadrature against the closed
//! forms, and the Hessian determinants that make the kernel solve regular.

use std::f64::consts::PI;

use commuting_tori::models::beam::{beam_averaged_form, beam_combination, build_beam, omega_beam, BeamConfig, BEAM_TORUS_MODES};
use commuting_tori::models::nlw::{build_nlw, nlw_averaged_constant, nlw_averaged_form, NlwConfig};
use commuting_tori::solver::averaged_nonlinearity;
use commuting_tori::TruncationParams;
use nalgebra::{DMatrix, DVector};

fn main() -> commuting_tori::Result<()> {
    let m = 0.3;
    let trunc = TruncationParams { r: 2, j_min: 1, j_max: 8, k_max: 8, s: 1.0, sigma: 0.0, tau: 1.0, gamma: 1e-2 };
    let nlw = build_nlw(&NlwConfig { m, mu: 0.0, trunc })?;
    let c = nlw_averaged_constant(m);
    println!("NLW m = {m}: c = {c:.12e}");
    for a in [[1.0, 0.5], [0.2, 2.0]] {
        let avg = averaged_nonlinearity(&nlw, &a, &[0.3, 1.9], 64)?;
        let h = avg.hess_matrix();
        println!(
            "  a = {a:?}: quadrature {:.12e}, closed form {:.12e}, hessian/c = [{:.6} {:.6}; {:.6} {:.6}], det/c^2 = {:.6}",
            avg.value,
            nlw_averaged_form(a[0], a[1], m),
            h[(0, 0)] / c,
            h[(0, 1)] / c,
            h[(1, 0)] / c,
            h[(1, 1)] / c,
            h.determinant() / (c * c)
        );
    }

    let trunc = TruncationParams { r: 3, j_min: 1, j_max: 6, k_max: 8, s: 1.0, sigma: 0.0, tau: 1.0, gamma: 1e-3 };
    for m in [0.0, 0.5, 1.7] {
        let beam = build_beam(&BeamConfig { m, mu: 0.0, trunc: trunc.clone() })?;
        let a = [0.4, 0.9, 1.3];
        let avg = averaged_nonlinearity(&beam, &a, &[0.0; 3], 64)?;
        let w = DMatrix::from_diagonal(&DVector::from_iterator(3, BEAM_TORUS_MODES.iter().map(|&j| omega_beam(j, m))));
        let (_, d) = beam_combination(m)?;
        let det = (&w * avg.hess_matrix() * &w * (8.0 * PI * d)).determinant();
        println!(
            "beam m = {m}: quadrature {:.12e}, closed form {:.12e}, rescaled det {det:.10}",
            avg.value,
            beam_averaged_form(a, m)?
        );
    }
    Ok(())
}
