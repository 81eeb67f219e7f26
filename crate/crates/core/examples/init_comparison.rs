// Log conditional likelihood per sweep for a chain started from the
// identity map and one started from a coarse 5-interval run.
//
// ```bash
// cargo run --release --example init_comparison
// ```

use ngp::datagen::{generate, GenSpec, WarpSpec};
use ngp::gp::RegressionData;
use ngp::sampler::{chain_rng, init_coarse, init_identity, run_chain, GpTarget, SamplerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GenSpec::se_experiment(13);
    let ds = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let WarpSpec::Levy(levy) = spec.warp else { unreachable!() };
    let data = RegressionData::new(ds.x.clone(), ds.y.clone(), 0.01)?;
    let target = GpTarget {
        y: &data.y,
        noise_variance: data.noise_variance,
        kernel: spec.kernel,
    };
    let cfg = SamplerConfig {
        n_sweeps: 20,
        burn_in_fraction: 0.0,
        ..Default::default()
    };
    let mut rng = chain_rng(13, 0);
    let coarse = init_coarse(&data, &spec.domains, &spec.kernel, &levy, &cfg, &mut rng)?;
    let identity = init_identity(&spec.domains, cfg.n_intervals)?;
    let from_identity = run_chain(&data.x, &target, &levy, &cfg, &identity, &mut chain_rng(13, 1))?;
    let from_coarse = run_chain(&data.x, &target, &levy, &cfg, &coarse, &mut chain_rng(13, 2))?;
    println!("sweep  identity  coarse");
    for (a, b) in from_identity.samples.iter().zip(&from_coarse.samples).step_by(2) {
        println!("{:5}  {:8.2}  {:6.2}", a.0, a.2, b.2);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("init_comparison");
}
