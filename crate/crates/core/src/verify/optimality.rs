use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Case, SuiteReport};
use crate::error::Result;
use crate::fem::{robin_principal_eigenvalue, BoundaryFunction, FemSpace};
use crate::optimizer::{default_tol, optimize};

/// Perturbation amplitudes relative to the size of `sigma_mu`.
const AMPLITUDES: [f64; 3] = [0.05, 0.3, 1.0];

/// Samples `sigma = sigma_mu + eta` with `int eta = 0` and checks
/// `lambda(sigma) <= Lambda_mu` for each sample. Amplitudes cycle through
/// three levels; `eta` is uniform per boundary node before projection.
pub fn run_optimality_suite(
    space: &FemSpace<f64>,
    mu: f64,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<SuiteReport> {
    if samples == 0 {
        return Err(crate::Error::InvalidInput("optimality suite needs at least one sample".into()));
    }
    let tol = tol.unwrap_or_else(|| default_tol(mu));
    let opt = optimize(space, mu, tol)?;
    let s = opt.s_mu;
    let slack = 50.0 * tol;
    let mut cases = vec![
        Case::at_most("|F(s_mu) - mu|", opt.f_residual, 0.0, tol),
        Case::at_most("|int sigma_mu - mu|", opt.sigma_integral_error, 0.0, 1e-8 * (1.0 + mu.abs())),
    ];
    if s != 0.0 {
        let gap = (opt.independent_lambda - s).abs() / s.abs();
        cases.push(Case::at_most("|lambda(sigma_mu) - s_mu| / |s_mu|", gap, 0.0, 1e-2));
    } else {
        cases.push(Case::at_most("|lambda(sigma_mu) - s_mu|", opt.independent_lambda.abs(), 0.0, slack));
    }

    let sigma = &opt.sigma_mu;
    let w = sigma.weights();
    let total_w: f64 = w.iter().sum();
    let scale = sigma.values().iter().fold(mu.abs() / space.perimeter(), |a, v| a.max(v.abs())).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [f64::NEG_INFINITY; 3];
    let mut counts = [0usize; 3];
    let mut violations = 0usize;
    let mut strict = 0usize;
    for k in 0..samples {
        let level = k % AMPLITUDES.len();
        let mut eta: Vec<f64> = (0..sigma.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = eta.iter().zip(w).map(|(e, w)| e * w).sum::<f64>() / total_w;
        let amp = AMPLITUDES[level] * scale;
        for e in &mut eta {
            *e = amp * (*e - mean);
        }
        let trial = sigma.axpby(1.0, &sigma.with_values(eta)?, 1.0)?;
        let margin = robin_principal_eigenvalue(space, &trial)?.eigenvalue - s;
        worst[level] = worst[level].max(margin);
        counts[level] += 1;
        if margin > slack {
            violations += 1;
        }
        if margin < -slack {
            strict += 1;
        }
    }
    for (level, &amp) in AMPLITUDES.iter().enumerate() {
        if counts[level] > 0 {
            cases.push(Case::at_most(
                format!("worst lambda(sigma) - Lambda_mu, amplitude {amp} ({} samples)", counts[level]),
                worst[level],
                0.0,
                slack,
            ));
        }
    }
    cases.push(Case::absolute("samples with lambda(sigma) > Lambda_mu + 50 tol", violations as f64, 0.0, 0.0));
    cases.push(Case::absolute(
        "fraction of samples strictly below Lambda_mu",
        strict as f64 / samples as f64,
        1.0,
        0.0,
    ));

    if mu != 0.0 {
        let conc = concentrated_on_first_edge(space, mu)?;
        let lambda = robin_principal_eigenvalue(space, &conc)?.eigenvalue;
        cases.push(Case::with_flag(
            "eigenvalue with sigma concentrated on one boundary edge (must be < Lambda_mu)",
            lambda,
            s,
            0.0,
            lambda < s,
        ));
    }
    Ok(SuiteReport::new(format!("optimality:mu={mu}"), cases))
}

/// `sigma` supported on the two end nodes of the first boundary edge with
/// `int sigma = mu`.
fn concentrated_on_first_edge(space: &FemSpace<f64>, mu: f64) -> Result<BoundaryFunction<f64>> {
    let mesh = space.mesh();
    let edge = &mesh.boundary_edges()[0];
    let nodes = mesh.boundary_nodes();
    let wts = space.boundary_weights();
    let (a, b) = (edge.nodes[0], edge.nodes[1]);
    let value = mu / (wts[a] + wts[b]);
    let vals = nodes.iter().map(|&g| if g == a || g == b { value } else { 0.0 }).collect();
    BoundaryFunction::new(space, vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble;
    use crate::geometry::{generate_mesh, Domain};

    fn coarse_disk() -> FemSpace<f64> {
        assemble(generate_mesh(&Domain::disk(1.0), 0.1, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn passes_and_is_deterministic() {
        let sp = coarse_disk();
        let a = run_optimality_suite(&sp, -5.0, 9, 3, None).unwrap();
        assert!(a.pass, "{}", a.to_table());
        let b = run_optimality_suite(&sp, -5.0, 9, 3, None).unwrap();
        assert_eq!(a, b);
        let c = run_optimality_suite(&sp, -5.0, 9, 4, None).unwrap();
        assert_ne!(a.cases[3].measured, c.cases[3].measured);
    }

    #[test]
    fn zero_constraint() {
        let r = run_optimality_suite(&coarse_disk(), 0.0, 6, 1, None).unwrap();
        assert!(r.pass, "{}", r.to_table());
        assert!(r.cases.iter().all(|c| !c.description.contains("concentrated")));
    }

    #[test]
    fn needs_samples() {
        assert!(run_optimality_suite(&coarse_disk(), -1.0, 0, 1, None).is_err());
    }
}
