// Draw tempered stable and gamma subordinator paths and inspect them.
//
// ```bash
// cargo run --example simulate_subordinator
// ```

use ngp::levy::{normalize_scale, Interval, LevyFamily, LevyMeasureSpec, SubordinatorPath};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Interval::new(0.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let ts = LevyMeasureSpec::normalized_tempered_stable(0.8, 5.0, 1000)?;
    println!(
        "tempered stable: C = {:.6} (= {:.6}), mean rate {:.3}, variance rate {:.3}",
        ts.scale,
        normalize_scale(0.8, 5.0, LevyFamily::TemperedStable)?,
        ts.mean_rate(),
        ts.variance_rate()
    );
    let path = SubordinatorPath::simulate(&ts, &[domain], &mut rng)?;
    println!("  {} jumps, W(1) = {:.4}", path.jump_set(0).len(), path.evaluate(1.0, 0)?);
    for x in [0.1, 0.25, 0.5, 0.75, 1.0] {
        println!("  W({x:.2}) = {:.4}", path.evaluate(x, 0)?);
    }

    let gamma = LevyMeasureSpec::gamma(5.0, 5.0, 1000)?;
    let totals: Vec<f64> = (0..2000)
        .map(|_| SubordinatorPath::simulate(&gamma, &[domain], &mut rng).map(|p| p.jump_set(0).total()))
        .collect::<Result<_, _>>()?;
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (totals.len() - 1) as f64;
    println!("gamma(C=5, β=5): W(1) mean {mean:.4} (expect 1), variance {var:.4} (expect 0.2)");
    if (mean - 1.0).abs() > 0.05 {
        return Err("gamma subordinator mean far from 1".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("simulate_subordinator");
}
