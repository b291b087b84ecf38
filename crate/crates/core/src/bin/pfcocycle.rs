use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use pf_cocycle::harness::{self, exit_code, ExperimentConfig, OutputDir, Timing};
use pf_cocycle::transfer::{assemble, cache::write_matrix};
use pf_cocycle::{Error, Result};

#[derive(Parser)]
#[command(name = "pfcocycle", version, about = "Lyapunov spectra and Oseledets splittings of random circle-map transfer operators")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output`, then `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    /// Spectrum, splittings and certificate of the configured cocycle.
    Reference,
    /// Perturb every fiber map over the configured eps list.
    SweepPerturb,
    /// Compare Fejér orders against the highest one.
    SweepFejer,
    /// Lasota–Yorke fit of fiber matrices and path products.
    CheckLy,
    /// Certificate only; exits with 4 when it fails.
    CheckHyperbolic,
    /// Write the fiber matrices to PFM1 cache files.
    Assemble,
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config <file> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let dir = cli.out.clone().or_else(|| cfg.output.clone().map(PathBuf::from)).unwrap_or_else(|| "out".into());
    let out = OutputDir::create(dir)?;
    let clock = Instant::now();
    let ms = |c: &Instant| c.elapsed().as_secs_f64() * 1e3;
    match cli.verb {
        Verb::Reference => {
            let reference = harness::run_reference(&cfg)?;
            let mut report = reference.report("reference");
            for (i, states) in reference.analysis.splittings.iter().enumerate() {
                for (a, s) in states.iter().enumerate() {
                    let name = format!("reference_d{}_t{}.sub1", s.dim(), s.t);
                    report.splittings[i][a].basis_file = Some(out.subspace(&name, &s.fast)?);
                }
            }
            out.json("reference", &report)?;
            out.timing(&Timing::new("reference", ms(&clock), &[]))?;
            println!("top exponent {:.6e}, certificate {}", report.spectrum.top(), verdict(report.certificate.pass));
        }
        Verb::SweepPerturb => {
            let eps = cfg.sweep.eps.clone();
            let sweep = harness::sweep_perturbation(&cfg, &eps)?;
            let n_gamma = sweep.records.first().map_or(0, |r| r.gamma_diff.len());
            out.json("sweep-perturb", &sweep)?;
            out.csv("sweep-perturb", &sweep.records, n_gamma, sweep.reference.dims.len())?;
            out.timing(&Timing::new("sweep-perturb", ms(&clock), &sweep.records))?;
            let s = &sweep.summary;
            println!("spearman gamma {:.3}, proj {:.3}, lipschitz band {:.3}", s.spearman_gamma, s.spearman_proj, s.lipschitz_band);
        }
        Verb::SweepFejer => {
            let orders = cfg.sweep.orders.clone();
            let n_ref = cfg.sweep.n_ref.or(orders.last().copied()).ok_or_else(|| Error::Config("sweep.orders is empty".into()))?;
            let sweep = harness::sweep_fejer(&cfg, &orders, n_ref)?;
            let n_gamma = sweep.records.first().map_or(0, |r| r.gamma_diff.len());
            out.json("sweep-fejer", &sweep)?;
            out.csv("sweep-fejer", &sweep.records, n_gamma, sweep.reference.dims.len())?;
            out.timing(&Timing::new("sweep-fejer", ms(&clock), &sweep.records))?;
            println!("self-convergence decreasing: {}", sweep.summary.cauchy_decreasing);
        }
        Verb::CheckLy => {
            let report = harness::check_ly(&cfg)?;
            out.json("check-ly", &report)?;
            out.timing(&Timing::new("check-ly", ms(&clock), &[]))?;
            for l in &report.lines {
                println!("{}: {} (C1 = {}, C2 = {:.4})", l.label, verdict(l.pass), l.c1, l.c2);
            }
        }
        Verb::CheckHyperbolic => {
            let report = harness::check_hyperbolic(&cfg)?;
            out.json("check-hyperbolic", &report)?;
            out.timing(&Timing::new("check-hyperbolic", ms(&clock), &[]))?;
            let c = &report.certificate;
            println!("theta {:.4}, C {:.4}, eta {:.4}, min gap {:.4}: {}", c.theta, c.c, c.eta, c.min_gap, verdict(c.pass));
            if !c.pass {
                return Err(Error::CertificateFailed);
            }
        }
        Verb::Assemble => {
            for (i, m) in cfg.maps.iter().enumerate() {
                let mut a = assemble(m, cfg.order, cfg.quadrature)?;
                if cfg.fejer {
                    a = a.fejer_weighted()?;
                }
                let name = format!("map{i}_n{}.pfm1", cfg.order);
                let mut f = std::io::BufWriter::new(std::fs::File::create(out.path(&name))?);
                write_matrix(&mut f, &a)?;
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
