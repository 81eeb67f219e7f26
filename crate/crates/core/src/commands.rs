//! The operations behind each CLI subcommand, usable from library code.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BundlePaths, LevyChoice, RunConfig};
use crate::datagen::{generate, GenSpec};
use crate::error::{Error, Result};
use crate::gp::{
    grid_search_length_scale, log_conditional_likelihood, log_grid, posterior, posterior_on_coords,
    RegressionData,
};
use crate::io::{self, DataTable, PosteriorTable, SampleKey};
use crate::levy::{Interval, SubordinatorPath};
use crate::sampler::{run_chains, MixtureAccumulator, MixturePosterior};

/// Sidecar written next to a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Ground-truth path file, relative to the dataset's directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_path: Option<String>,
    pub spec: GenSpec,
}

#[derive(Debug, Clone)]
pub struct GenOutputs {
    pub dataset: PathBuf,
    pub meta: PathBuf,
    pub true_path: Option<PathBuf>,
}

/// `<stem>.meta.toml` beside `data`.
pub fn meta_path(data: &Path) -> PathBuf {
    let stem = data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    data.with_file_name(format!("{stem}.meta.toml"))
}

fn require_dir(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        ))
    }
}

/// Generate a dataset into `out_dir`: `dataset.csv`, `dataset.meta.toml` and,
/// for warped data, `true_path.csv`.
pub fn cmd_gen(cfg: &RunConfig, out_dir: &Path) -> Result<GenOutputs> {
    require_dir(out_dir)?;
    let spec = cfg.gen_spec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ds = generate(&spec, &mut rng)?;
    let dataset = out_dir.join("dataset.csv");
    io::write_dataset(
        &dataset,
        &DataTable {
            x: ds.x.clone(),
            y: ds.y.clone(),
            observed: ds.observed.clone(),
        },
    )?;
    let true_path = match &ds.true_path {
        Some(p) => {
            let file = out_dir.join("true_path.csv");
            io::write_path_samples(&file, [(0, 0, p)])?;
            Some(file)
        }
        None => None,
    };
    let meta = meta_path(&dataset);
    io::write_toml(
        &meta,
        &DatasetMeta {
            true_path: true_path.as_ref().map(|_| "true_path.csv".to_string()),
            spec,
        },
    )?;
    Ok(GenOutputs {
        dataset,
        meta,
        true_path,
    })
}

/// Rows of `x` outside `domains`, reported as a domain error.
pub fn check_in_domain(x: &DMatrix<f64>, domains: &[Interval]) -> Result<()> {
    if x.ncols() != domains.len() {
        return Err(Error::param(format!(
            "inputs have {} columns but the domain has {} dimensions",
            x.ncols(),
            domains.len()
        )));
    }
    let bad: Vec<usize> = (0..x.nrows())
        .filter(|&i| (0..x.ncols()).any(|k| !domains[k].contains(x[(i, k)])))
        .collect();
    if bad.is_empty() {
        return Ok(());
    }
    const SHOWN: usize = 20;
    let mut list = bad.iter().take(SHOWN).map(|i| i.to_string()).collect::<Vec<_>>().join(", ");
    if bad.len() > SHOWN {
        list.push_str(&format!(" and {} more", bad.len() - SHOWN));
    }
    let bounds = domains
        .iter()
        .map(|d| format!("[{}, {}]", d.lb, d.ub))
        .collect::<Vec<_>>()
        .join(" x ");
    Err(Error::Domain(format!(
        "{} row(s) outside the trained domain {bounds}: rows {list}",
        bad.len()
    )))
}

fn bounding_box(x: &DMatrix<f64>) -> Result<Vec<Interval>> {
    (0..x.ncols())
        .map(|k| {
            let col = x.column(k);
            Interval::new(col.min(), col.max()).map_err(|_| {
                Error::Config(format!("column x_{k} is constant; set `domain` explicitly"))
            })
        })
        .collect()
}

/// Domain for fitting: the config, else the dataset sidecar, else the data's
/// bounding box.
fn resolve_domains(cfg: &RunConfig, data_path: &Path, x: &DMatrix<f64>) -> Result<Vec<Interval>> {
    if let Some(d) = cfg.domains()? {
        return Ok(d);
    }
    let meta = meta_path(data_path);
    if meta.exists() {
        let m: DatasetMeta = io::read_toml(&meta)?;
        return Ok(m.spec.domains);
    }
    bounding_box(x)
}

fn true_path_for(data_path: &Path, domains: &[Interval]) -> Result<Option<SubordinatorPath>> {
    let meta = meta_path(data_path);
    if !meta.exists() {
        return Ok(None);
    }
    let m: DatasetMeta = io::read_toml(&meta)?;
    let Some(rel) = m.true_path else { return Ok(None) };
    let file = data_path.parent().unwrap_or(Path::new(".")).join(rel);
    let mut paths = io::read_path_samples(&file, domains, Some(&[(0, 0)]))?;
    Ok(paths.pop().map(|p| p.path))
}

/// Machine-readable fit results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub n_train: usize,
    pub n_chains: usize,
    pub n_samples: usize,
    pub acceptance_rate: f64,
    pub accepted: usize,
    pub proposals: usize,
    pub avg_log_cond_lik: f64,
    pub std_log_cond_lik: f64,
    /// Plain GP at the configured length scale.
    pub gp_log_marginal: f64,
    pub gp_opt_length_scale: f64,
    pub gp_opt_log_marginal: f64,
    pub true_path_log_lik: Option<f64>,
    pub samples: Vec<SampleKey>,
}

pub struct FitOutputs {
    pub summary: FitSummary,
    pub posterior: MixturePosterior,
    pub table: PosteriorTable,
}

fn gp_table(
    train: &RegressionData,
    x: &DMatrix<f64>,
    kernel: &crate::kernels::KernelSpec,
) -> Result<PosteriorTable> {
    let p = posterior_on_coords(&train.x, &train.y, train.noise_variance, x, kernel)?;
    let var = p.test_cov.diagonal();
    Ok(PosteriorTable {
        x: x.clone(),
        mean: p.test_mean,
        posterior_std: var.map(|v| v.max(0.0).sqrt()),
        predictive_std: var.map(|v| (v.max(0.0) + train.noise_variance).sqrt()),
    })
}

fn mixture_table(x: &DMatrix<f64>, mean: DVector<f64>, cov: &DMatrix<f64>, noise: f64) -> PosteriorTable {
    let var = cov.diagonal();
    PosteriorTable {
        x: x.clone(),
        mean,
        posterior_std: var.map(|v| v.max(0.0).sqrt()),
        predictive_std: var.map(|v| (v.max(0.0) + noise).sqrt()),
    }
}

/// Fit the NGP and both GP baselines to the observed rows of `data_path`
/// and write the results bundle into `out_dir`.
pub fn cmd_fit(cfg: &RunConfig, data_path: &Path, out_dir: &Path) -> Result<FitOutputs> {
    let table = io::read_dataset(data_path)?;
    let domains = resolve_domains(cfg, data_path, &table.x)?;
    check_in_domain(&table.x, &domains)?;
    let kernel = cfg.kernel.spec()?;
    let levy = cfg.levy.required_spec()?;
    let (tx, ty) = table.observed();
    if tx.nrows() == 0 {
        return Err(Error::param(format!("{}: no observed rows to fit", data_path.display())));
    }
    let train = RegressionData::new(tx, ty, cfg.noise_variance)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let bundle = BundlePaths::new(out_dir);

    let result = fit_into(cfg, &bundle, &table, &train, &domains, &kernel, &levy, data_path);
    if let Err(e) = &result {
        let marker = out_dir.join("FAILED");
        // best effort; the original error is what matters
        let _ = std::fs::write(marker, format!("{e}\n"));
    }
    result
}

#[allow(clippy::too_many_arguments)]
fn fit_into(
    cfg: &RunConfig,
    bundle: &BundlePaths,
    table: &DataTable,
    train: &RegressionData,
    domains: &[Interval],
    kernel: &crate::kernels::KernelSpec,
    levy: &crate::levy::LevyMeasureSpec,
    data_path: &Path,
) -> Result<FitOutputs> {
    let mut effective = cfg.clone();
    effective.domain = Some(domains.iter().map(|d| [d.lb, d.ub]).collect());
    if effective.levy.family != LevyChoice::Identity {
        effective.levy.scale = Some(levy.scale);
    }
    effective.save(&bundle.config())?;
    io::write_dataset(
        &bundle.train(),
        &DataTable {
            x: train.x.clone(),
            y: train.y.clone(),
            observed: vec![true; train.len()],
        },
    )?;

    let mix = run_chains(train, &table.x, domains, kernel, levy, &cfg.sampler, cfg.chains)?;
    let out = mixture_table(&table.x, mix.aggregate_mean.clone(), &mix.aggregate_cov, cfg.noise_variance);
    io::write_posterior(&bundle.posterior(), &out)?;

    let fixed = gp_table(train, &table.x, kernel)?;
    io::write_posterior(&bundle.baseline_fixed(), &fixed)?;
    let gp_log_marginal = crate::gp::log_marginal_likelihood(train, kernel)?;
    let grid = log_grid(cfg.baseline.grid_min, cfg.baseline.grid_max, cfg.baseline.grid_points)?;
    let (l_opt, ll_opt) = grid_search_length_scale(train, kernel, &grid)?;
    let opt = gp_table(train, &table.x, &kernel.with_length_scale(l_opt)?)?;
    io::write_posterior(&bundle.baseline_opt(), &opt)?;

    let keys: Vec<SampleKey> = mix
        .samples
        .iter()
        .map(|s| {
            let r = s.path_ref.expect("sampler tags every sample");
            SampleKey {
                chain: r.chain,
                sweep: r.sweep,
            }
        })
        .collect();
    io::write_path_samples(
        &bundle.samples(),
        keys.iter().zip(&mix.paths).map(|(k, p)| (k.chain, k.sweep, p)),
    )?;
    io::write_trace(&bundle.trace(), &mix.traces)?;

    let true_path_log_lik = match true_path_for(data_path, domains)? {
        Some(p) => Some(log_conditional_likelihood(train, &p, kernel)?),
        None => None,
    };
    let summary = FitSummary {
        n_train: train.len(),
        n_chains: cfg.chains,
        n_samples: mix.n_samples(),
        acceptance_rate: mix.acceptance_rate,
        accepted: mix.accepted,
        proposals: mix.proposals,
        avg_log_cond_lik: mix.avg_log_cond_lik,
        std_log_cond_lik: mix.std_log_cond_lik,
        gp_log_marginal,
        gp_opt_length_scale: l_opt,
        gp_opt_log_marginal: ll_opt,
        true_path_log_lik,
        samples: keys,
    };
    io::write_json(&bundle.summary(), &summary)?;
    Ok(FitOutputs {
        summary,
        posterior: mix,
        table: out,
    })
}

/// Mixture posterior at `points` from the subordinator samples stored in a
/// fit bundle.
pub fn predict_from_bundle(bundle_dir: &Path, points: &DMatrix<f64>) -> Result<PosteriorTable> {
    let bundle = BundlePaths::new(bundle_dir);
    let cfg: RunConfig = io::read_toml(&bundle.config())?;
    let domains = cfg
        .domains()?
        .ok_or_else(|| Error::format(bundle.config(), "bundle config has no domain"))?;
    check_in_domain(points, &domains)?;
    let kernel = cfg.kernel.spec()?;
    let table = io::read_dataset(&bundle.train())?;
    let train = RegressionData::new(table.x, table.y, cfg.noise_variance)?;
    let summary: FitSummary = io::read_json(&bundle.summary())?;
    let keys: Vec<(usize, usize)> = summary.samples.iter().map(|k| (k.chain, k.sweep)).collect();
    let paths = io::read_path_samples(&bundle.samples(), &domains, Some(&keys))?;
    let samples = paths
        .par_iter()
        .map(|s| {
            posterior(&train, points, &s.path, &kernel)
                .map_err(|e| e.context(format!("sample (chain {}, sweep {})", s.chain, s.sweep)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, cov) = if summary.n_chains > 1 {
        crate::sampler::mixture_moments(&samples)?
    } else {
        let mut acc = MixtureAccumulator::new(points.nrows());
        for s in &samples {
            acc.push(s)?;
        }
        acc.finish()?
    };
    Ok(mixture_table(points, mean, &cov, cfg.noise_variance))
}

pub fn cmd_predict(bundle_dir: &Path, points_path: &Path, out: &Path) -> Result<PosteriorTable> {
    let cfg: RunConfig = io::read_toml(&BundlePaths::new(bundle_dir).config())?;
    let dims = cfg.domain.as_ref().map_or(1, |d| d.len());
    let points = io::read_points(points_path, dims)?;
    let table = predict_from_bundle(bundle_dir, &points)?;
    io::write_posterior(out, &table)?;
    Ok(table)
}

/// Draw `n_paths` prior paths and write their jumps; optionally also write
/// `W` on an evenly spaced grid as `path,dim,x,w`.
pub fn cmd_simulate(
    cfg: &RunConfig,
    n_paths: usize,
    out: &Path,
    grid: Option<(usize, &Path)>,
) -> Result<Vec<SubordinatorPath>> {
    let levy = cfg.levy.required_spec()?;
    let domains = cfg.domains_or_default()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let paths = (0..n_paths)
        .map(|_| SubordinatorPath::simulate(&levy, &domains, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    io::write_path_samples(out, paths.iter().enumerate().map(|(k, p)| (0, k, p)))?;
    if let Some((n, file)) = grid {
        if n < 2 {
            return Err(Error::param("grid needs at least two points"));
        }
        let mut w = csv::Writer::from_path(file).map_err(|e| Error::format(file, e))?;
        let io_err = |e: csv::Error| Error::format(file, e);
        w.write_record(["path", "dim", "x", "w"]).map_err(io_err)?;
        for (k, p) in paths.iter().enumerate() {
            for (dim, d) in domains.iter().enumerate() {
                for i in 0..n {
                    let x = if i == n - 1 { d.ub } else { d.lb + d.length() * i as f64 / (n - 1) as f64 };
                    let v = p.evaluate(x, dim)?;
                    w.write_record(&[k.to_string(), dim.to_string(), x.to_string(), v.to_string()])
                        .map_err(io_err)?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(file, e))?;
    }
    Ok(paths)
}

/// Min-max scale every `x_` column of a CSV to [0, 1]; other columns are
/// copied unchanged. Returns the original `(min, max)` per input column.
pub fn cmd_normalize(input: &Path, out: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(input).map_err(|e| Error::format(input, e))?;
    let headers = r.headers().map_err(|e| Error::format(input, e))?.clone();
    let rows = r
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::format(input, e))?;
    let xcols: Vec<usize> = (0..headers.len()).filter(|&i| headers[i].starts_with("x_")).collect();
    if xcols.is_empty() {
        return Err(Error::format(input, "no x_ columns to normalize"));
    }
    let mut values = vec![Vec::with_capacity(rows.len()); xcols.len()];
    for (row, rec) in rows.iter().enumerate() {
        for (j, &c) in xcols.iter().enumerate() {
            let v: f64 = rec[c].trim().parse().map_err(|_| {
                Error::format(input, format!("row {row}, column {}: cannot parse {:?}", &headers[c], &rec[c]))
            })?;
            values[j].push(v);
        }
    }
    let ranges: Vec<(f64, f64)> = values
        .iter()
        .map(|v| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();
    let mut w = csv::Writer::from_path(out).map_err(|e| Error::format(out, e))?;
    w.write_record(&headers).map_err(|e| Error::format(out, e))?;
    for (row, rec) in rows.iter().enumerate() {
        let mut fields: Vec<String> = rec.iter().map(str::to_string).collect();
        for (j, &c) in xcols.iter().enumerate() {
            let (lo, hi) = ranges[j];
            let v = values[j][row];
            fields[c] = if hi > lo { ((v - lo) / (hi - lo)).to_string() } else { "0".to_string() };
        }
        w.write_record(&fields).map_err(|e| Error::format(out, e))?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok(ranges)
}
