use std::io::Write;
use std::path::{Path, PathBuf};

use cpcsc::io::{read_dict, read_image, write_codes, write_dict, write_image, write_trace_file};
use cpcsc::operators::NormSettings;
use cpcsc::pipeline::{denoise, evaluate, Method};
use cpcsc::solvers::{cdl_cp, csc_atv_cp, csc_cp, IterationTrace, SolverConfig};
use cpcsc::Image;
use serde::Serialize;

use crate::args::{Cli, Command, CscArgs, DenoiseArgs, DictInfoArgs, EvalArgs, SolverArgs, TrainArgs};
use crate::config::ConfigFile;
use crate::CliError;

const DEFAULT_LAMBDA: f64 = 0.05;
const DEFAULT_ITERS: usize = 500;
const DEFAULT_M: usize = 16;
const DEFAULT_FILTER_SIZE: usize = 8;
const DEFAULT_OUTER_ITERS: usize = 150;

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn require<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

fn nonneg(v: f64, flag: &str) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{flag} must be a nonnegative number, got {v}")))
    }
}

fn count(v: usize, flag: &str) -> Result<usize, CliError> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{flag} must be at least 1")))
    }
}

/// Numerical settings common to every solver command, after defaults.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SolverSettings {
    rel_tol: f64,
    norm_tol: f64,
    norm_max_iters: usize,
    step_scale: f64,
}

impl SolverSettings {
    fn resolve(a: &SolverArgs) -> Result<Self, CliError> {
        let defaults = SolverConfig::default();
        let step_scale = a.step_scale.unwrap_or(defaults.step_scale);
        if !(step_scale > 0.0 && step_scale.is_finite()) {
            return Err(CliError::Usage(format!("--step-scale must be positive, got {step_scale}")));
        }
        Ok(Self {
            rel_tol: nonneg(a.rel_tol.unwrap_or(defaults.rel_tol), "rel-tol")?,
            norm_tol: nonneg(a.norm_tol.unwrap_or(defaults.norm.tol), "norm-tol")?,
            norm_max_iters: count(a.norm_max_iters.unwrap_or(defaults.norm.max_iters), "norm-max-iters")?,
            step_scale,
        })
    }

    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            rel_tol: self.rel_tol,
            norm: NormSettings {
                tol: self.norm_tol,
                max_iters: self.norm_max_iters,
                seed,
                ..NormSettings::default()
            },
            seed,
            step_scale: self.step_scale,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct CscSettings {
    image: Option<PathBuf>,
    dict: Option<PathBuf>,
    lambda: f64,
    iters: usize,
    beta1: Option<f64>,
    beta2: Option<f64>,
    trace: Option<PathBuf>,
    out_codes: Option<PathBuf>,
    #[serde(flatten)]
    solver: SolverSettings,
}

impl CscSettings {
    fn resolve(a: CscArgs) -> Result<Self, CliError> {
        Ok(Self {
            lambda: nonneg(a.lambda.unwrap_or(DEFAULT_LAMBDA), "lambda")?,
            iters: count(a.iters.unwrap_or(DEFAULT_ITERS), "iters")?,
            beta1: a.beta1.map(|b| nonneg(b, "beta1")).transpose()?,
            beta2: a.beta2.map(|b| nonneg(b, "beta2")).transpose()?,
            solver: SolverSettings::resolve(&a.solver)?,
            image: a.image,
            dict: a.dict,
            trace: a.trace,
            out_codes: a.out_codes,
        })
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct DenoiseSettings {
    image: Option<PathBuf>,
    dict: Option<PathBuf>,
    method: String,
    lambda: f64,
    beta1: f64,
    beta2: f64,
    iters: usize,
    #[serde(rename = "ref")]
    reference: Option<PathBuf>,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
    #[serde(flatten)]
    solver: SolverSettings,
}

impl DenoiseSettings {
    fn resolve(a: DenoiseArgs) -> Result<Self, CliError> {
        let method = a.method.unwrap_or_else(|| "csc".to_string());
        method
            .parse::<Method>()
            .map_err(|_| CliError::Usage(format!("--method must be csc or csc_atv, got \"{method}\"")))?;
        Ok(Self {
            method,
            lambda: nonneg(a.lambda.unwrap_or(DEFAULT_LAMBDA), "lambda")?,
            beta1: nonneg(a.beta1.unwrap_or(0.0), "beta1")?,
            beta2: nonneg(a.beta2.unwrap_or(0.0), "beta2")?,
            iters: count(a.iters.unwrap_or(DEFAULT_ITERS), "iters")?,
            solver: SolverSettings::resolve(&a.solver)?,
            image: a.image,
            dict: a.dict,
            reference: a.reference,
            out: a.out,
            trace: a.trace,
        })
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct TrainSettings {
    images: Option<String>,
    m: usize,
    filter_size: usize,
    lambda: f64,
    outer_iters: usize,
    inner_csc: usize,
    inner_dict: usize,
    cold_start: bool,
    out_dict: Option<PathBuf>,
    trace: Option<PathBuf>,
    #[serde(flatten)]
    solver: SolverSettings,
}

impl TrainSettings {
    fn resolve(a: TrainArgs) -> Result<Self, CliError> {
        let defaults = SolverConfig::default();
        Ok(Self {
            m: count(a.m.unwrap_or(DEFAULT_M), "m")?,
            filter_size: count(a.filter_size.unwrap_or(DEFAULT_FILTER_SIZE), "filter-size")?,
            lambda: nonneg(a.lambda.unwrap_or(DEFAULT_LAMBDA), "lambda")?,
            outer_iters: count(a.outer_iters.unwrap_or(DEFAULT_OUTER_ITERS), "outer-iters")?,
            inner_csc: count(a.inner_csc.unwrap_or(defaults.inner_csc_iters), "inner-csc")?,
            inner_dict: count(a.inner_dict.unwrap_or(defaults.inner_dict_iters), "inner-dict")?,
            cold_start: a.cold_start,
            solver: SolverSettings::resolve(&a.solver)?,
            images: a.images,
            out_dict: a.out_dict,
            trace: a.trace,
        })
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Settings {
    Csc(CscSettings),
    Denoise(DenoiseSettings),
    Train(TrainSettings),
    Eval(EvalArgs),
    DictInfo(DictInfoArgs),
}

#[derive(Debug, Serialize)]
struct Effective<'a> {
    command: &'a str,
    seed: u64,
    quiet: bool,
    #[serde(flatten)]
    settings: &'a Settings,
}

struct Context<'a> {
    seed: u64,
    quiet: bool,
    out: &'a mut dyn Write,
}

impl Context<'_> {
    fn say(&mut self, line: std::fmt::Arguments<'_>) -> Result<(), CliError> {
        if !self.quiet {
            writeln!(self.out, "{line}").map_err(io_err)?;
        }
        Ok(())
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => file.seed()?.unwrap_or(0),
    };
    let quiet = cli.quiet || file.quiet()?;
    let name = cli.command.name();
    let settings = match cli.command {
        Command::Csc(a) => Settings::Csc(CscSettings::resolve(file.overlay(&a)?)?),
        Command::Denoise(a) => Settings::Denoise(DenoiseSettings::resolve(file.overlay(&a)?)?),
        Command::Train(a) => Settings::Train(TrainSettings::resolve(file.overlay(&a)?)?),
        Command::Eval(a) => Settings::Eval(file.overlay(&a)?),
        Command::DictInfo(a) => Settings::DictInfo(file.overlay(&a)?),
    };
    if cli.print_config {
        let effective = Effective { command: name, seed, quiet, settings: &settings };
        let text = serde_json::to_string_pretty(&effective).expect("settings serialize");
        writeln!(out, "{text}").map_err(io_err)?;
        return Ok(());
    }
    let mut ctx = Context { seed, quiet, out };
    match settings {
        Settings::Csc(s) => run_csc(&s, &mut ctx),
        Settings::Denoise(s) => run_denoise(&s, &mut ctx),
        Settings::Train(s) => run_train(&s, &mut ctx),
        Settings::Eval(s) => run_eval(&s, &mut ctx),
        Settings::DictInfo(s) => run_dict_info(&s, &mut ctx),
    }
}

fn write_trace(trace: &IterationTrace, path: &Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => Ok(write_trace_file(&trace.records, p)?),
        None => Ok(()),
    }
}

fn run_csc(s: &CscSettings, ctx: &mut Context<'_>) -> Result<(), CliError> {
    let image = read_image(require(&s.image, "image")?)?;
    let bank = read_dict(require(&s.dict, "dict")?)?;
    let cfg = SolverConfig {
        iter_n: s.iters,
        lambda: s.lambda,
        beta1: s.beta1.unwrap_or(0.0),
        beta2: s.beta2.unwrap_or(0.0),
        ..s.solver.config(ctx.seed)
    };
    let tv = s.beta1.is_some() || s.beta2.is_some();
    let (codes, trace) = if tv {
        csc_atv_cp(&bank, &image, &cfg)?
    } else {
        csc_cp(&bank, &image, &cfg)?
    };
    write_trace(&trace, &s.trace)?;
    if let Some(p) = &s.out_codes {
        write_codes(&codes, p)?;
    }
    let last = trace.last().expect("trace holds the starting point");
    let nonzero = codes.as_slice().iter().filter(|v| **v != 0.0).count();
    ctx.say(format_args!(
        "iters={} objective={:.6e} data={:.6e} l1={:.6e} nonzero={}/{}",
        last.iter,
        last.objective,
        last.data_term,
        last.l1_term,
        nonzero,
        codes.as_slice().len()
    ))
}

fn run_denoise(s: &DenoiseSettings, ctx: &mut Context<'_>) -> Result<(), CliError> {
    let image = read_image(require(&s.image, "image")?)?;
    let bank = read_dict(require(&s.dict, "dict")?)?;
    let reference = s.reference.as_ref().map(read_image).transpose()?;
    let method: Method = s.method.parse().expect("validated when resolving");
    let cfg = SolverConfig {
        iter_n: s.iters,
        lambda: s.lambda,
        beta1: s.beta1,
        beta2: s.beta2,
        ..s.solver.config(ctx.seed)
    };
    let result = denoise(&image, &bank, method, &cfg, reference.as_ref())?;
    write_trace(&result.trace, &s.trace)?;
    if let Some(p) = &s.out {
        write_image(&result.restored, p)?;
    }
    match &reference {
        Some(r) => {
            let before = evaluate(&image, r)?;
            let after = evaluate(&result.restored, r)?;
            ctx.say(format_args!(
                "input psnr={:.4} ssim={:.6}\nrestored psnr={:.4} ssim={:.6}",
                before.psnr_db, before.ssim, after.psnr_db, after.ssim
            ))
        }
        None => ctx.say(format_args!(
            "iters={} objective={:.6e}",
            result.trace.last().map_or(0, |r| r.iter),
            result.trace.last().map_or(f64::NAN, |r| r.objective)
        )),
    }
}

fn training_files(list: &str) -> Result<Vec<PathBuf>, CliError> {
    let path = Path::new(list);
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut found = Vec::new();
        for entry in std::fs::read_dir(path).map_err(io_err)? {
            let p = entry.map_err(io_err)?.path();
            if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
                found.push(p);
            }
        }
        found.sort();
        found
    } else {
        list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect()
    };
    if files.is_empty() {
        return Err(CliError::Usage(format!("--images \"{list}\" names no PGM files")));
    }
    Ok(files)
}

fn run_train(s: &TrainSettings, ctx: &mut Context<'_>) -> Result<(), CliError> {
    let files = training_files(&require(&s.images, "images")?)?;
    let images = files.iter().map(read_image).collect::<cpcsc::Result<Vec<Image>>>()?;
    let cfg = SolverConfig {
        iter_n: s.outer_iters,
        lambda: s.lambda,
        inner_csc_iters: s.inner_csc,
        inner_dict_iters: s.inner_dict,
        warm_start: !s.cold_start,
        ..s.solver.config(ctx.seed)
    };
    let result = cdl_cp(&images, s.m, s.filter_size, &cfg)?;
    write_trace(&result.trace, &s.trace)?;
    if let Some(p) = &s.out_dict {
        write_dict(&result.bank, p)?;
    }
    let first = result.trace.first().map_or(f64::NAN, |r| r.objective);
    let last = result.trace.last().map_or(f64::NAN, |r| r.objective);
    ctx.say(format_args!(
        "images={} outer={} objective={:.6e} -> {:.6e} resets={}",
        images.len(),
        s.outer_iters,
        first,
        last,
        result.trace.reset_count()
    ))
}

fn run_eval(s: &EvalArgs, ctx: &mut Context<'_>) -> Result<(), CliError> {
    let a = read_image(require(&s.a, "a")?)?;
    let b = read_image(require(&s.b, "b")?)?;
    let report = evaluate(&a, &b)?;
    writeln!(ctx.out, "psnr={:.4} ssim={:.6}", report.psnr_db, report.ssim).map_err(io_err)
}

fn run_dict_info(s: &DictInfoArgs, ctx: &mut Context<'_>) -> Result<(), CliError> {
    let bank = read_dict(require(&s.dict, "dict")?)?;
    writeln!(ctx.out, "m={} r={}", bank.m_count(), bank.filter_size()).map_err(io_err)?;
    for (k, n) in bank.atom_norms().iter().enumerate() {
        writeln!(ctx.out, "atom {k} norm={n:.6}").map_err(io_err)?;
    }
    Ok(())
}
