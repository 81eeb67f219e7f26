// Two input dimensions, each warped by its own gamma subordinator. Gibbs
// sweeps cycle through the dimensions.
//
// ```bash
// cargo run --release --example multidim_gamma
// ```

use ngp::datagen::{generate, GenSpec, InputLayout, WarpSpec};
use ngp::gp::{log_marginal_likelihood, RegressionData};
use ngp::kernels::KernelSpec;
use ngp::levy::{Interval, LevyMeasureSpec};
use ngp::sampler::{chain_rng, run_mh_gibbs, InitStrategy, SamplerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let unit = Interval::new(0.0, 1.0)?;
    let levy = LevyMeasureSpec::gamma(4.0, 4.0, 500)?;
    let spec = GenSpec {
        domains: vec![unit, unit],
        n_points: 225,
        n_observed: 120,
        kernel: KernelSpec::squared_exponential(0.25, 1.0)?,
        warp: WarpSpec::Levy(levy),
        noise_std: 0.1,
        layout: InputLayout::Grid,
        seed: 5,
    };
    let ds = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let data = RegressionData::new(ds.observed_x(), ds.observed_y(), 0.01)?;
    let cfg = SamplerConfig {
        n_sweeps: 20,
        n_intervals: 20,
        init: InitStrategy::IdentityMap,
        ..Default::default()
    };
    let mix = run_mh_gibbs(&data, &ds.held_out_x(), &spec.domains, &spec.kernel, &levy, &cfg, &mut chain_rng(5, 0))?;
    let gp = log_marginal_likelihood(&data, &spec.kernel)?;
    println!(
        "2-D gamma warp: acceptance {:.3}, avg log cond. lik. {:.2} ± {:.2}, GP {gp:.2}",
        mix.acceptance_rate, mix.avg_log_cond_lik, mix.std_log_cond_lik
    );
    let last = mix.paths.last().unwrap();
    for d in 0..2 {
        println!("  dim {d}: {} jumps, W(1) = {:.3}", last.jump_set(d).len(), last.evaluate(1.0, d)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("multidim_gamma");
}
