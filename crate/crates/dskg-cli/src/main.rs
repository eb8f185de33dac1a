//! `dskg` - experiment runner for the Klein-Gordon spectral laboratory.
//!
//! Subcommands:
//!   dskg run <config>       run one experiment from a config file
//!   dskg sweep <config>     run the homogeneous mixed-norm experiment over
//!                           an exponent grid
//!   dskg oracle-suite [dir] run the solver cross-validation battery
//!
//! Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 config error.
//! `DSKG_THREADS` caps the worker count.

mod config;
mod output;

use config::{ExperimentConfig, ExperimentKind};
use dskg_core::harness::experiments::{
    dispersive_decay_report, energy_growth_report, obstruction_scan, oracle_suite_report,
    strichartz_ratio_homog, strichartz_ratio_inhomog, DispersiveConfig, EnsembleConfig,
    ObstructionConfig,
};
use dskg_core::harness::{EstimateReport, ExponentTriple, SeriesPoint, Exponent};
use dskg_core::semilinear::smallness_experiment;
use output::{RunReport, SweepRow};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("DSKG_THREADS") {
        if let Ok(count) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(count.max(1))
                .build_global();
        }
    }
    let args: Vec<String> = std::env::args().collect();
    match args.get(1).map(String::as_str) {
        Some("run") => match args.get(2) {
            Some(path) => run_config(path, false),
            None => usage(),
        },
        Some("sweep") => match args.get(2) {
            Some(path) => run_config(path, true),
            None => usage(),
        },
        Some("oracle-suite") => {
            let dir = args
                .get(2)
                .cloned()
                .unwrap_or_else(|| "out-oracle-suite".to_string());
            run_oracle_suite(&dir)
        }
        _ => usage(),
    }
}

fn usage() -> ExitCode {
    eprintln!("usage: dskg run <config> | dskg sweep <config> | dskg oracle-suite [output_dir]");
    ExitCode::from(2)
}

fn timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

fn run_config(path: &str, sweep: bool) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: cannot read `{path}`: {e}");
            return ExitCode::from(2);
        }
    };
    let cfg = match config::load(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if sweep {
        return run_sweep(&cfg);
    }
    let started = std::time::Instant::now();
    let result = dispatch(&cfg);
    match result {
        Ok((reports, series, mut log)) => {
            let pass = reports.iter().all(|r| r.pass);
            log.push(format!(
                "experiment {} finished in {:.2}s: {}",
                cfg.kind.name(),
                started.elapsed().as_secs_f64(),
                if pass { "all verdicts pass" } else { "some verdicts FAILED" }
            ));
            let run = RunReport {
                experiment: cfg.kind.name().to_string(),
                pass,
                reports,
                timestamp: timestamp(),
            };
            match output::write_outputs(&cfg.output_dir, &run, &series, &log) {
                Ok(dir) => {
                    println!(
                        "{}: {} (report at {}/report.json)",
                        cfg.kind.name(),
                        if pass { "PASS" } else { "FAIL" },
                        dir.display()
                    );
                    if pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("cannot write outputs: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(msg) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}

type RunOutput = (Vec<EstimateReport>, Vec<SeriesPoint>, Vec<String>);

fn dispatch(cfg: &ExperimentConfig) -> Result<RunOutput, String> {
    let ens = EnsembleConfig::new(cfg.seed, cfg.ensemble);
    let mut log = vec![format!("experiment: {}", cfg.kind.name())];
    match cfg.kind {
        ExperimentKind::Energy => {
            let alpha = cfg.alpha.ok_or("energy experiment needs alpha")?;
            let (rep, series) =
                energy_growth_report(&alpha, &cfg.params, &ens, cfg.horizon, 0.05)
                    .map_err(|e| e.to_string())?;
            log.push(format!(
                "fitted rate {:.4} vs target {:.4} (+{})",
                rep.fitted_rate, rep.target_rate, rep.tolerance
            ));
            Ok((vec![rep], series, log))
        }
        ExperimentKind::Dispersive => {
            let dcfg = DispersiveConfig {
                r: cfg.r,
                window: cfg.window,
                which: cfg.which,
                tolerance: cfg.tolerance,
                ..Default::default()
            };
            let (rep, series) =
                dispersive_decay_report(&cfg.params, &dcfg).map_err(|e| e.to_string())?;
            log.push(format!(
                "slope {:.4} vs target {:.4} (r2 {})",
                rep.fitted_rate,
                rep.target_rate,
                rep.metadata.get("r2").cloned().unwrap_or_default()
            ));
            Ok((vec![rep], series, log))
        }
        ExperimentKind::StrichartzHomog => {
            let alpha = cfg.alpha.ok_or("strichartz-homog needs alpha")?;
            let triple = cfg
                .exponents
                .first()
                .ok_or("strichartz-homog needs p and q")?;
            if !triple.admissible {
                return Err(format!(
                    "exponents rejected: {}",
                    triple.rejection.clone().unwrap_or_default()
                ));
            }
            let (rep, series) = strichartz_ratio_homog(
                triple,
                &alpha,
                &cfg.params,
                &cfg.t0_list,
                cfg.horizon,
                &ens,
            )
            .map_err(|e| e.to_string())?;
            log.push(format!("spread {:.4}", rep.fitted_rate));
            Ok((vec![rep], series, log))
        }
        ExperimentKind::StrichartzInhomog => {
            let alpha = cfg.alpha.ok_or("strichartz-inhomog needs alpha")?;
            let triple = cfg
                .exponents
                .first()
                .ok_or("strichartz-inhomog needs p and q")?;
            if !triple.admissible {
                return Err(format!(
                    "exponents rejected: {}",
                    triple.rejection.clone().unwrap_or_default()
                ));
            }
            let (rep, series) = strichartz_ratio_inhomog(
                triple,
                &alpha,
                &cfg.params,
                cfg.params.t0,
                &cfg.horizons,
                &ens,
            )
            .map_err(|e| e.to_string())?;
            log.push(format!(
                "growth {}",
                rep.metadata.get("growth").cloned().unwrap_or_default()
            ));
            Ok((vec![rep], series, log))
        }
        ExperimentKind::Obstruction => {
            let ocfg = ObstructionConfig {
                r: cfg.r,
                t_range: cfg.t_range,
                ..Default::default()
            };
            let (rep, series) = obstruction_scan(&cfg.params, &ocfg).map_err(|e| e.to_string())?;
            log.push(format!(
                "tail slope {:.4}, crossover lag {}",
                rep.fitted_rate,
                rep.metadata.get("crossover_lag").cloned().unwrap_or_default()
            ));
            Ok((vec![rep], series, log))
        }
        ExperimentKind::Semilinear => {
            let (rep, series) =
                smallness_experiment(&cfg.eps_ladder, cfg.horizon, &cfg.params, cfg.seed)
                    .map_err(|e| e.to_string())?;
            log.push(format!(
                "ladder {}",
                rep.metadata.get("ladder").cloned().unwrap_or_default()
            ));
            Ok((vec![rep], series, log))
        }
        ExperimentKind::OracleSuite => {
            let (rep, series) =
                oracle_suite_report(cfg.params.n, cfg.seed).map_err(|e| e.to_string())?;
            log.push(format!(
                "worst solver-vs-oracle deviation {}",
                rep.metadata
                    .get("worst_solver_vs_oracle")
                    .cloned()
                    .unwrap_or_default()
            ));
            Ok((vec![rep], series, log))
        }
    }
}

fn run_oracle_suite(dir: &str) -> ExitCode {
    match oracle_suite_report(3, 1) {
        Ok((rep, series)) => {
            let pass = rep.pass;
            let log = vec![format!(
                "oracle-suite: worst deviation {}",
                rep.metadata
                    .get("worst_solver_vs_oracle")
                    .cloned()
                    .unwrap_or_default()
            )];
            let run = RunReport {
                experiment: "oracle-suite".to_string(),
                pass,
                reports: vec![rep],
                timestamp: timestamp(),
            };
            if let Err(e) = output::write_outputs(dir, &run, &series, &log) {
                eprintln!("cannot write outputs: {e}");
                return ExitCode::from(1);
            }
            println!("oracle-suite: {}", if pass { "PASS" } else { "FAIL" });
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("oracle-suite error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run_sweep(cfg: &ExperimentConfig) -> ExitCode {
    let alpha = match cfg.alpha {
        Some(a) => a,
        None => {
            eprintln!("config error: sweep needs alpha");
            return ExitCode::from(2);
        }
    };
    let eps = match cfg.sweep_eps {
        Exponent::Finite(r) => r,
        Exponent::Infinity => {
            eprintln!("config error: sweep eps must be finite");
            return ExitCode::from(2);
        }
    };
    let ens = EnsembleConfig::new(cfg.seed, cfg.ensemble);
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    let mut log = vec!["sweep over exponent grid".to_string()];
    for p in &cfg.sweep_p {
        for q in &cfg.sweep_q {
            let triple = ExponentTriple::derive(*p, *q, eps, cfg.params.n);
            if !triple.admissible {
                let reason = triple.rejection.clone().unwrap_or_default();
                log.push(format!("rejected (p, q) = ({p}, {q}): {reason}"));
                rejected.push(format!("({p},{q}): {reason}"));
                continue;
            }
            match strichartz_ratio_homog(
                &triple,
                &alpha,
                &cfg.params,
                &cfg.t0_list,
                cfg.horizon,
                &ens,
            ) {
                Ok((rep, _)) => {
                    rows.push(SweepRow {
                        p: triple.p.to_string(),
                        q: triple.q.to_string(),
                        s: format!("{}", triple.s),
                        eps: format!("{}", triple.eps),
                        t0: cfg.t0_list[0],
                        horizon: cfg.horizon,
                        constant: rep.measured_constant,
                        spread: rep.fitted_rate,
                        pass: rep.pass,
                    });
                }
                Err(e) => {
                    eprintln!("sweep cell (p, q) = ({p}, {q}) failed: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    }
    if rows.is_empty() {
        log.push("warning: empty admissible set".to_string());
    }
    if let Err(e) = output::write_sweep(&cfg.output_dir, &rows) {
        eprintln!("cannot write sweep table: {e}");
        return ExitCode::from(1);
    }
    // schema self-check: the written table must parse back row for row
    match std::fs::read_to_string(std::path::Path::new(&cfg.output_dir).join("sweep.csv")) {
        Ok(body) => {
            let parsed: Result<Vec<_>, _> = body
                .lines()
                .skip(1)
                .filter(|l| !l.is_empty())
                .map(SweepRow::parse)
                .collect();
            match parsed {
                Ok(back) if back.len() == rows.len() => {
                    log.push(format!("schema check: {} rows round-trip", back.len()));
                }
                Ok(back) => {
                    eprintln!("sweep table round-trip lost rows: {} vs {}", back.len(), rows.len());
                    return ExitCode::from(1);
                }
                Err(e) => {
                    eprintln!("sweep table failed to parse back: {e}");
                    return ExitCode::from(1);
                }
            }
        }
        Err(e) => {
            eprintln!("cannot re-read sweep table: {e}");
            return ExitCode::from(1);
        }
    }
    let mut summary = EstimateReport::new("sweep");
    summary.samples = rows.len();
    summary.pass = true;
    summary.meta("rejected", rejected.join("; "));
    summary.meta("rows", rows.len());
    let run = RunReport {
        experiment: "sweep".to_string(),
        pass: true,
        reports: vec![summary],
        timestamp: timestamp(),
    };
    let series: Vec<SeriesPoint> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| SeriesPoint::new(format!("sweep-constant-p{}-q{}", r.p, r.q), i as f64, r.constant))
        .collect();
    if let Err(e) = output::write_outputs(&cfg.output_dir, &run, &series, &log) {
        eprintln!("cannot write outputs: {e}");
        return ExitCode::from(1);
    }
    println!("sweep: {} admissible rows written", rows.len());
    ExitCode::SUCCESS
}
