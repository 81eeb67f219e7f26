// The synthetic SE experiment: data from a tempered-stable-warped GP on
// (0, 0.5), fitted with MH-within-Gibbs over 100 intervals and 50 sweeps.
//
// ```bash
// cargo run --release --example ngp_regression
// ```

use ngp::datagen::{generate, GenSpec, WarpSpec};
use ngp::gp::{log_conditional_likelihood, log_marginal_likelihood, RegressionData};
use ngp::sampler::{chain_rng, run_mh_gibbs, SamplerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GenSpec::se_experiment(11);
    let ds = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let WarpSpec::Levy(levy) = spec.warp else { unreachable!() };
    let data = RegressionData::new(ds.x.clone(), ds.y.clone(), spec.noise_std.powi(2))?;

    let cfg = SamplerConfig::default();
    let mix = run_mh_gibbs(&data, &ds.x, &spec.domains, &spec.kernel, &levy, &cfg, &mut chain_rng(11, 0))?;

    let gp = log_marginal_likelihood(&data, &spec.kernel)?;
    let truth = log_conditional_likelihood(&data, ds.true_path.as_ref().unwrap(), &spec.kernel)?;
    println!("acceptance rate          {:.3}", mix.acceptance_rate);
    println!("avg log cond. likelihood {:.2} ± {:.2}", mix.avg_log_cond_lik, mix.std_log_cond_lik);
    println!("GP log marginal          {gp:.2}");
    println!("under the true warp      {truth:.2}");

    let sd = mix.posterior_std();
    for i in (0..ds.x.nrows()).step_by(20) {
        println!(
            "  x = {:.4}  y = {:+.3}  mean = {:+.3}  sd = {:.3}",
            ds.x[(i, 0)], ds.y[i], mix.aggregate_mean[i], sd[i]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("ngp_regression");
}
