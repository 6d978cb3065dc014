//! Command line harness: verification suites, constant pinning, and
//! CSV dumps of the underlying special functions.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hmh::harness::{self, RunConfig, Suite};
use hmh::numerics::MultiIndex;
use hmh::special::TwistedParameter;
use hmh::C64;

#[derive(Parser)]
#[command(
    name = "hmh",
    version,
    about = "Numerical verification of harmonic-analysis identities on Heisenberg motion groups"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and report pass/fail per identity.
    Verify {
        /// orthonormality | heat | bergman | gutzmer | poisson |
        /// plancherel | paley_wiener | all
        suite: String,
        /// JSON config file (default: $HMH_CONFIG if set, else built-ins)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Write the machine-readable report here
        #[arg(long)]
        json: Option<PathBuf>,
        /// Override the λ-interval (two values: a b with 0 < a < b)
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        lambda: Option<Vec<f64>>,
        /// Override the truncation degree M
        #[arg(long)]
        trunc: Option<usize>,
        /// Record wall times in the JSON output (breaks byte-for-byte
        /// reproducibility across runs, so off by default)
        #[arg(long)]
        timings: bool,
    },
    /// Re-run the constant-pinning oracles and write the golden file.
    PinConstants {
        /// Output path (default: golden.json in the working directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump function values on a grid as CSV for plotting.
    Dump {
        /// heat-kernel | special-hermite | laguerre | bergman-weight | k-heat-kernel
        object: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<PathBuf>) -> hmh::Result<RunConfig> {
    let path = path.or_else(|| std::env::var_os("HMH_CONFIG").map(PathBuf::from));
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| hmh::Error::Io(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text)
        }
        None => Ok(RunConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> hmh::Result<bool> {
    match cli.cmd {
        Command::Verify {
            suite,
            config,
            seed,
            json,
            lambda,
            trunc,
            timings,
        } => {
            let mut cfg = load_config(config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(l) = lambda {
                cfg.lambda_min = l[0];
                cfg.lambda_max = l[1];
            }
            if let Some(m) = trunc {
                cfg.m_trunc = m;
            }
            cfg.validate()?;
            let suite = Suite::parse(&suite)?;
            let result = harness::run_suite(&cfg, suite)?;
            for check in &result.checks {
                let status = if check.report.passed { "PASS" } else { "FAIL" };
                println!(
                    "[{status}] {:<42} rel_err={:.3e}  ({} ms)",
                    check.report.identity, check.report.rel_err, check.wall_ms
                );
            }
            println!(
                "suite `{}`: {} ({} checks)",
                result.suite,
                if result.overall_pass { "PASS" } else { "FAIL" },
                result.checks.len()
            );
            if let Some(path) = json {
                std::fs::write(&path, result.to_json(timings))?;
                println!("report written to {}", path.display());
            }
            Ok(result.overall_pass)
        }
        Command::PinConstants { out } => {
            let measured = harness::measure_golden()?;
            let text = serde_json::to_string_pretty(&measured)? + "\n";
            let path = out.unwrap_or_else(|| PathBuf::from("golden.json"));
            std::fs::write(&path, &text)?;
            print!("{text}");
            println!("golden constants written to {}", path.display());
            // loud comparison against the frozen file
            let frozen = hmh::golden::GoldenConstants::frozen()?;
            frozen.assert_no_drift(&measured)?;
            println!("no drift against the frozen constants");
            Ok(true)
        }
        Command::Dump { object, config, out } => {
            let cfg = load_config(config)?;
            let csv = dump_csv(&object, &cfg)?;
            match out {
                Some(path) => std::fs::write(&path, csv)?,
                None => print!("{csv}"),
            }
            Ok(true)
        }
    }
}

fn dump_csv(object: &str, cfg: &RunConfig) -> hmh::Result<String> {
    let lambda = TwistedParameter::new(0.5 * (cfg.lambda_min + cfg.lambda_max))?;
    let grid: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
    let mut s = String::new();
    match object {
        "heat-kernel" => {
            s.push_str("x,u,p_t\n");
            for &x in &grid {
                for &u in &grid {
                    let v = hmh::twisted::heat_kernel_twisted(
                        cfg.t,
                        lambda,
                        &[C64::new(x, 0.0)],
                        &[C64::new(u, 0.0)],
                    )?;
                    s.push_str(&format!("{x:.3},{u:.3},{:.12e}\n", v.re));
                }
            }
        }
        "special-hermite" => {
            s.push_str("x,u,re,im\n");
            let alpha = MultiIndex::new(vec![1]);
            let beta = MultiIndex::new(vec![0]);
            for &x in &grid {
                for &u in &grid {
                    let v = hmh::special::special_hermite_closed(
                        &alpha,
                        &beta,
                        lambda,
                        &[C64::new(x, 0.0)],
                        &[C64::new(u, 0.0)],
                    )?;
                    s.push_str(&format!("{x:.3},{u:.3},{:.12e},{:.12e}\n", v.re, v.im));
                }
            }
        }
        "laguerre" => {
            s.push_str("x,m,L_m\n");
            for m in 0..=6usize {
                for &x in &grid {
                    if x < 0.0 {
                        continue;
                    }
                    let v = hmh::special::laguerre_real(m, 0, x)?;
                    s.push_str(&format!("{x:.3},{m},{v:.12e}\n"));
                }
            }
        }
        "bergman-weight" => {
            s.push_str("y,v,log_weight\n");
            let w = hmh::twisted::BergmanWeight::new(cfg.t, lambda)?;
            for &y in &grid {
                for &v in &grid {
                    let lw = w.log_value(&[0.0], &[y], &[0.0], &[v]);
                    s.push_str(&format!("{y:.3},{v:.3},{lw:.12e}\n"));
                }
            }
        }
        "k-heat-kernel" => {
            s.push_str("theta,q_t\n");
            for i in 0..=128 {
                let th = 2.0 * std::f64::consts::PI * i as f64 / 128.0;
                let v = hmh::groups::heat_kernel_k(
                    cfg.t,
                    &hmh::groups::TorusElement::new(vec![th]),
                    &[0.0],
                )?;
                s.push_str(&format!("{th:.5},{:.12e}\n", v.re));
            }
        }
        other => {
            return Err(hmh::Error::Domain(format!(
                "unknown dump object `{other}`; expected heat-kernel, special-hermite, laguerre, bergman-weight, or k-heat-kernel"
            )))
        }
    }
    Ok(s)
}
