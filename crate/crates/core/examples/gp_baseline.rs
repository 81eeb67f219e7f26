// Plain GP regression on unwarped inputs: log marginal likelihood and a
// grid search over the length scale.
//
// ```bash
// cargo run --example gp_baseline
// ```

use ngp::datagen::{generate, GenSpec, WarpSpec};
use ngp::gp::{grid_search_length_scale, log_grid, log_marginal_likelihood, posterior_on_coords, RegressionData};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GenSpec {
        warp: WarpSpec::Identity,
        n_points: 200,
        n_observed: 60,
        ..GenSpec::se_experiment(3)
    };
    let ds = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let data = RegressionData::new(ds.observed_x(), ds.observed_y(), spec.noise_std.powi(2))?;

    let ll = log_marginal_likelihood(&data, &spec.kernel)?;
    let grid = log_grid(0.01, 1.0, 40)?;
    let (l_opt, ll_opt) = grid_search_length_scale(&data, &spec.kernel, &grid)?;
    println!("log marginal at l = 0.1: {ll:.2}; best l = {l_opt:.4} with {ll_opt:.2}");

    let post = posterior_on_coords(&data.x, &data.y, data.noise_variance, &ds.held_out_x(), &spec.kernel)?;
    let truth = ds.held_out_y();
    let rmse = ((&post.test_mean - &truth).norm_squared() / truth.len() as f64).sqrt();
    println!("held-out RMSE {rmse:.4} over {} points", truth.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("gp_baseline");
}
