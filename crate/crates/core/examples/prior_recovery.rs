// With a constant likelihood every proposal is accepted, so the chain must
// reproduce the prior. Compares W(1) from the chain with direct draws.
//
// ```bash
// cargo run --release --example prior_recovery
// ```

use nalgebra::DMatrix;
use ngp::levy::{Interval, JumpSet, LevyMeasureSpec, simulate_interval};
use ngp::sampler::{init_identity, run_chain, FlatTarget, InitStrategy, SamplerConfig};
use ngp::stats::ks_two_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Interval::new(0.0, 1.0)?;
    let levy = LevyMeasureSpec::gamma(3.0, 3.0, 1000)?;
    let cfg = SamplerConfig {
        n_sweeps: 600,
        n_intervals: 8,
        burn_in_fraction: 0.1,
        init: InitStrategy::IdentityMap,
        ..Default::default()
    };
    let x = DMatrix::from_column_slice(2, 1, &[0.25, 0.75]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let out = run_chain(&x, &FlatTarget, &levy, &cfg, &init_identity(&[domain], 8)?, &mut rng)?;
    let chain: Vec<f64> = out.samples.iter().map(|(_, p, _)| p.jump_set(0).total()).collect();
    let direct: Vec<f64> = (0..chain.len())
        .map(|_| simulate_interval(&levy, domain, &mut rng).and_then(|j| JumpSet::new(domain, j)).map(|s| s.total()))
        .collect::<Result<_, _>>()?;
    let ks = ks_two_sample(&chain, &direct)?;
    println!(
        "acceptance {:.3}; KS D = {:.4}, p = {:.3} over {} samples",
        out.acceptance_rate(),
        ks.statistic,
        ks.p_value,
        chain.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("prior_recovery");
}
