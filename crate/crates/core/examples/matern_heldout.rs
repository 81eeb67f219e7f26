// Matérn-5/2 data on (0, 1): 500 grid points, 100 observed, coverage of the
// ±3 sd predictive band on the other 400.
//
// ```bash
// cargo run --release --example matern_heldout
// ```

use ngp::datagen::{generate, GenSpec, WarpSpec};
use ngp::gp::RegressionData;
use ngp::sampler::{chain_rng, run_mh_gibbs, SamplerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GenSpec::matern_experiment(21);
    let ds = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let WarpSpec::Levy(levy) = spec.warp else { unreachable!() };
    let noise = spec.noise_std.powi(2);
    let data = RegressionData::new(ds.observed_x(), ds.observed_y(), noise)?;

    let mix = run_mh_gibbs(
        &data,
        &ds.held_out_x(),
        &spec.domains,
        &spec.kernel,
        &levy,
        &SamplerConfig::default(),
        &mut chain_rng(21, 0),
    )?;
    let sd = mix.predictive_std(noise);
    let y = ds.held_out_y();
    let inside = (0..y.len())
        .filter(|&i| (y[i] - mix.aggregate_mean[i]).abs() <= 3.0 * sd[i])
        .count();
    println!(
        "{inside}/{} held-out points inside the ±3 sd band; acceptance {:.3}",
        y.len(),
        mix.acceptance_rate
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("matern_heldout");
}
