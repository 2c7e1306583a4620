//! Coupled lattice site fields: marginal frequencies and the implication check.

use abperc::bounds::q_coupling;
use abperc::latticecoupling::{binomial_two_sided_p, sample_coupled_fields};

fn main() -> abperc::Result<()> {
    let (p_lambda, p_nu) = (0.6, 0.3);
    let f = sample_coupled_fields(&[200, 200], 1.0, 2.0, p_lambda, p_nu, 9)?;
    let c = f.interior_counts();
    let q = q_coupling(p_nu, p_lambda, f.delta())?;
    let freq = |k: u64| k as f64 / c.sites as f64;
    println!("Delta = {}, interior sites = {}", f.delta(), c.sites);
    println!("T: {:.4} vs {p_lambda}  p = {:.3}", freq(c.t_ones), binomial_two_sided_p(c.t_ones, c.sites, p_lambda));
    println!("V: {:.4} vs {p_nu}  p = {:.3}", freq(c.v_ones), binomial_two_sided_p(c.v_ones, c.sites, p_nu));
    println!("W: {:.4} vs {q:.4}  p = {:.3}", freq(c.w_ones), binomial_two_sided_p(c.w_ones, c.sites, q));
    println!("implication violations: {}", f.implication_violations());
    Ok(())
}
