use super::SchemeConfig;
use crate::error::Result;
use crate::exp_action::ExpEvaluator;

/// One stabilized ETD-RK2 step from `(u, t)`.
///
/// With `L_k = L - kappa I` and `g(u) = f(u) + kappa u`:
/// `a = e^{tau L_k} u + tau phi_1(tau L_k) g(u)`, then
/// `u_next = a + tau phi_2(tau L_k) (g(a) - g(u))`.
pub fn etd_rk2_step(ev: &ExpEvaluator, cfg: &SchemeConfig, u: &[f64], t: f64, kappa: f64) -> Result<Vec<f64>> {
    let tau = cfg.tau;
    let g = |v: &[f64], s: f64| -> Vec<f64> {
        let (f, _) = cfg.mode.source(v, s);
        f.iter().zip(v).map(|(fi, vi)| fi + kappa * vi).collect()
    };
    let gu = g(u, t);
    let gu_scaled: Vec<f64> = gu.iter().map(|x| tau * x).collect();
    let a = ev.phi_combination(tau, kappa, &[(0, u), (1, &gu_scaled)])?;
    let ga = g(&a, t + tau);
    let diff: Vec<f64> = ga.iter().zip(&gu).map(|(x, y)| tau * (x - y)).collect();
    let corr = ev.phi_combination(tau, kappa, &[(2, &diff)])?;
    Ok(a.iter().zip(&corr).map(|(x, y)| x + y).collect())
}
