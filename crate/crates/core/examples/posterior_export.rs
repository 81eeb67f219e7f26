// File-based pipeline: generate a dataset, fit it into a results bundle,
// then predict on a fresh grid from the stored subordinator samples.
//
// ```bash
// cargo run --release --example posterior_export
// ```

use ngp::commands::{cmd_fit, cmd_gen, predict_from_bundle};
use ngp::config::RunConfig;
use ngp::io::{write_posterior, BAND_WIDTH};
use nalgebra::DMatrix;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let cfg = RunConfig::load(None, &["seed=4".into(), "sampler.n_sweeps=20".into()])?;
    let data = cmd_gen(&cfg, dir.path())?;
    let bundle = dir.path().join("fit");
    let fit = cmd_fit(&cfg, &data.dataset, &bundle)?;
    println!("acceptance rate {:.3} over {} samples", fit.summary.acceptance_rate, fit.summary.n_samples);

    let mut files: Vec<String> = std::fs::read_dir(&bundle)?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    files.sort();
    println!("bundle: {}", files.join(", "));

    let grid = DMatrix::from_fn(200, 1, |i, _| 0.5 * i as f64 / 199.0);
    let table = predict_from_bundle(&bundle, &grid)?;
    let out = dir.path().join("grid.csv");
    write_posterior(&out, &table)?;
    let widest = table.predictive_std.max();
    println!("200-point grid written; widest ±{BAND_WIDTH} sd band half-width {:.3}", BAND_WIDTH * widest);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("posterior_export");
}
