//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use defect_cert::scalar::Checked;
use defect_cert::signal::{generate_sequence_with, window_sums_with};
use defect_cert::synth::{self, CaseStudyFixture, CASE_C};
use defect_cert::{
    certify_witness, certify_witness_modular, io, pipeline, prony::prony_reconstruct_with, search_witness,
    CertifyConfig, Decision, PrimeField, RankCertificate, RationalParams, WindowData,
};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Mode, Settings};
use crate::inputs::{self, Numeral};
use crate::schema::{self, Shape};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 2;

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn print(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(settings: &Settings, text: &str) -> Result<()> {
    match &settings.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => print(text),
    }
}

fn checked_json<T: Serialize>(value: &T, shape: &Shape) -> Result<Value> {
    let v = serde_json::to_value(value)?;
    checked(v, shape)
}

fn checked(v: Value, shape: &Shape) -> Result<Value> {
    schema::validate(&v, shape).map_err(|e| anyhow::anyhow!("output failed schema check: {e}"))?;
    Ok(v)
}

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn case_fixture(label: &str) -> Option<CaseStudyFixture> {
    match label {
        "case-a" => Some(synth::case_a_fixture()),
        "case-b" => Some(synth::case_b_fixture()),
        _ => None,
    }
}

// ---------------------------------------------------------------- windows

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct WindowsRequest {
    pub params: Option<PathBuf>,
    pub pi: Option<Vec<String>>,
    pub sequence: Option<PathBuf>,
    pub preset: Option<String>,
    pub w: Option<usize>,
    pub k: Option<usize>,
    pub format: Option<Format>,
}

/// Window sums rendered as strings so that exact and residue values survive
/// any JSON reader.
struct Sums {
    w: usize,
    values: Vec<String>,
    integer: bool,
}

impl Sums {
    fn from_data<T: ToString>(data: &WindowData<T>, integer: bool) -> Self {
        Sums { w: data.block_length(), values: data.sums().iter().map(T::to_string).collect(), integer }
    }

    fn json(&self) -> Result<Value> {
        let sums: Vec<Value> = if self.integer {
            self.values.iter().map(|s| Value::String(s.clone())).collect()
        } else {
            self.values
                .iter()
                .map(|s| Ok(json!(s.parse::<f64>()?)))
                .collect::<Result<_>>()?
        };
        checked(json!({"W": self.w, "K": self.values.len(), "sums": sums}), &schema::windows(self.integer))
    }

    fn csv(&self) -> String {
        let mut out = String::from("k,S_k\n");
        for (k, s) in self.values.iter().enumerate() {
            out.push_str(&format!("{k},{s}\n"));
        }
        out
    }
}

fn integer_windows(params: &RationalParams<i128>, w: usize, k: usize, mode: Mode, prime: u64) -> Result<Sums> {
    let n_max = (w * k).max(params.degree() + 1) - 1;
    match mode {
        Mode::Modular => {
            let field = PrimeField::new(prime)?;
            let reduced = params.map(|&v| field.reduce(v));
            let y = generate_sequence_with(&field, &reduced, n_max)?;
            Ok(Sums::from_data(&window_sums_with(&field, &y, w, k)?, true))
        }
        _ => {
            let ctx = Checked::<i128>::default();
            let y = generate_sequence_with(&ctx, params, n_max)
                .context("exact evaluation failed; --mode modular computes residues instead")?;
            Ok(Sums::from_data(&window_sums_with(&ctx, &y, w, k)?, true))
        }
    }
}

pub fn windows(settings: &Settings, req: WindowsRequest) -> Result<u8> {
    let sources = [req.params.is_some(), req.pi.is_some(), req.sequence.is_some(), req.preset.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        bail!("give exactly one of --params, --pi, --sequence or --preset");
    }
    let w = settings.w(req.w);
    let k = settings.k(req.k);
    let sums = if let Some(label) = &req.preset {
        let fx = case_fixture(label).with_context(|| format!("unknown preset {label:?} (case-a, case-b)"))?;
        info!("preset {label}: d={}, W={}", fx.d, fx.block_length);
        Sums::from_data(&WindowData::new(fx.block_length, fx.true_windows.clone())?, false)
    } else if let Some(path) = &req.sequence {
        let w = w.context("--sequence needs the block length --W")?;
        let text = inputs::read(path)?;
        match settings.mode_or(Mode::Float) {
            Mode::Float => {
                let y: Vec<f64> = io::sequence_from_csv(&text)?;
                let k = k.unwrap_or(y.len() / w);
                Sums::from_data(&defect_cert::window_sums(&y, w, k)?, false)
            }
            Mode::Exact => {
                let y: Vec<i128> = io::sequence_from_csv(&text)?;
                let k = k.unwrap_or(y.len() / w);
                Sums::from_data(&defect_cert::window_sums(&y, w, k)?, true)
            }
            Mode::Modular => {
                let field = PrimeField::new(settings.prime)?;
                let y: Vec<i128> = io::sequence_from_csv(&text)?;
                let y: Vec<u64> = y.iter().map(|&v| field.reduce(v)).collect();
                let k = k.unwrap_or(y.len() / w);
                Sums::from_data(&window_sums_with(&field, &y, w, k)?, true)
            }
        }
    } else {
        let pi: Vec<Numeral> = match (&req.params, &req.pi) {
            (Some(path), _) => inputs::params_file(path)?,
            (_, Some(list)) => inputs::pi_list(list),
            _ => unreachable!(),
        };
        let w = w.context("parameter input needs the block length --W")?;
        match settings.mode_or(Mode::Exact) {
            Mode::Float => {
                let params = inputs::real_params(&pi)?;
                let k = k.unwrap_or(2 * params.degree() + 1);
                let y = defect_cert::generate_sequence(&params, (w * k).max(params.degree() + 1) - 1)?;
                Sums::from_data(&defect_cert::window_sums(&y, w, k)?, false)
            }
            mode => {
                let params = inputs::integer_params(&pi)
                    .context("exact and modular modes need integer parameters; use --mode float")?;
                let k = k.unwrap_or(2 * params.degree() + 1);
                integer_windows(&params, w, k, mode, settings.prime)?
            }
        }
    };
    let csv_out = settings.out.as_deref().and_then(Path::extension).is_some_and(|e| e == "csv");
    let text = match req.format.unwrap_or(if csv_out { Format::Csv } else { Format::Json }) {
        Format::Json => pretty(&sums.json()?)?,
        Format::Csv => sums.csv(),
    };
    emit(settings, &text)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- witness

pub struct WitnessRequest {
    pub d: Option<usize>,
    pub w: Option<usize>,
    pub pi: Option<Vec<String>>,
    pub params: Option<PathBuf>,
    pub search: bool,
    pub bound: i64,
    pub max_trials: usize,
}

pub const EXIT_SINGULAR: u8 = 1;
pub const EXIT_NOT_FOUND: u8 = 3;

fn emit_certificate(settings: &Settings, cert: &RankCertificate) -> Result<u8> {
    info!("det mod {} = {} (exact: {})", cert.prime(), cert.det_residue(), cert.exact());
    emit(settings, &pretty(&checked_json(cert, &schema::certificate())?)?)?;
    Ok(if cert.nonzero() { EXIT_OK } else { EXIT_SINGULAR })
}

pub fn witness(settings: &Settings, req: WitnessRequest) -> Result<u8> {
    let w = settings.w(req.w).context("witness needs the block length --W")?;
    let mode = settings.mode_or(Mode::Exact);
    if mode == Mode::Float {
        bail!("witness certificates are exact or modular; --mode float is not supported here");
    }
    if req.search {
        if req.pi.is_some() || req.params.is_some() {
            bail!("--search draws its own parameters; drop --pi/--params");
        }
        let d = settings.d(req.d)?;
        info!("searching d={d}, W={w}, bound={}, seed={}", req.bound, settings.seed);
        return match search_witness(d, w, req.bound, settings.prime, settings.seed, req.max_trials)? {
            Some(cert) => emit_certificate(settings, &cert),
            None => {
                eprintln!("no nonsingular witness in {} trials", req.max_trials);
                Ok(EXIT_NOT_FOUND)
            }
        };
    }
    let pi = match (&req.params, &req.pi) {
        (Some(_), Some(_)) => bail!("give either --params or --pi, not both"),
        (Some(path), None) => inputs::params_file(path)?,
        (None, Some(list)) => inputs::pi_list(list),
        (None, None) => bail!("give --pi, --params or --search"),
    };
    let params = inputs::integer_params(&pi)?;
    if let Ok(d) = settings.d(req.d) {
        if d != params.degree() {
            bail!("--d {d} does not match the parameter vector of degree {}", params.degree());
        }
    }
    let cert = match mode {
        Mode::Modular => certify_witness_modular(&params, w, settings.prime)?,
        _ => certify_witness(&params, w, settings.prime)?,
    };
    emit_certificate(settings, &cert)
}

// ---------------------------------------------------------------- reconstruct / certify

pub const EXIT_DEGENERATE: u8 = 1;

pub fn reconstruct(settings: &Settings, input: Option<PathBuf>, d: Option<usize>, w: Option<usize>) -> Result<u8> {
    let windows = inputs::windows_file(&settings.input(input)?, settings.w(w))?;
    let d = settings.d(d)?;
    let model = prony_reconstruct_with(windows.sums(), d, &settings.config.prony()?)?;
    info!("reconstructed d={d}: flags {:?}", model.flags);
    emit(settings, &pretty(&checked_json(&model, &schema::model())?)?)?;
    Ok(if model.is_degenerate() { EXIT_DEGENERATE } else { EXIT_OK })
}

pub struct CertifyRequest {
    pub input: Option<PathBuf>,
    pub d: Option<usize>,
    pub w: Option<usize>,
    pub noise_eps: Option<f64>,
    pub eps0: Option<f64>,
}

pub fn certify(settings: &Settings, req: CertifyRequest) -> Result<u8> {
    let windows = inputs::windows_file(&settings.input(req.input)?, settings.w(req.w))?;
    let d = settings.d(req.d)?;
    let noise_eps = req.noise_eps.or(settings.config.noise_eps).unwrap_or(0.0);
    let mut cfg = CertifyConfig { prony: settings.config.prony()?, ..CertifyConfig::default() };
    if let Some(eps0) = req.eps0.or(settings.config.eps0) {
        cfg.eps0 = eps0;
    }
    let report = pipeline(&windows, d, noise_eps, &cfg)?;
    info!("decision {} (flags {:?})", report.decision.name(), report.flags);
    emit(settings, &pretty(&checked_json(&report, &schema::report())?)?)?;
    Ok(match report.decision {
        Decision::Zero => 0,
        Decision::Nonzero => 1,
        Decision::Inconclusive => 3,
    })
}

// ---------------------------------------------------------------- synth

pub struct SynthRequest {
    pub label: String,
    pub w: Option<usize>,
    pub k: Option<usize>,
    pub d: Option<usize>,
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn float_windows_csv(w: usize, sums: &[f64]) -> Result<String> {
    Ok(io::windows_to_csv(&WindowData::new(w, sums.to_vec())?)?)
}

pub fn synth(settings: &Settings, req: SynthRequest) -> Result<u8> {
    let dir = settings.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let label = req.label.as_str();
    let written = match label {
        "case-a" | "case-b" => {
            let fx = case_fixture(label).expect("label checked");
            let json = pretty(&checked_json(&fx, &schema::fixture())?)?;
            vec![
                write_file(&dir, &format!("{label}_true.csv"), &float_windows_csv(fx.block_length, &fx.true_windows)?)?,
                write_file(
                    &dir,
                    &format!("{label}_observed.csv"),
                    &float_windows_csv(fx.block_length, &fx.observed_windows)?,
                )?,
                write_file(&dir, &format!("{label}.json"), &json)?,
            ]
        }
        "case-c" => {
            let v = checked(json!({"label": label, "d": CASE_C.d, "W": CASE_C.block_length}), &schema::preset())?;
            vec![write_file(&dir, "case-c.json", &pretty(&v)?)?]
        }
        "collision" => {
            let w = settings.w(req.w).unwrap_or(8);
            let k = settings.k(req.k).unwrap_or(11);
            let d = req.d.or(settings.config.d).unwrap_or(3);
            let base = synth::case_a_fixture().mixture;
            let pair = synth::collision_pair(&base, d, w, k)?;
            let windows = defect_cert::window_sums(&pair.y_in, w, k + 1)?;
            let meta = checked(
                json!({
                    "W": w, "K": k + 1, "d": d, "N": pair.last_observed,
                    "bumps": pair.bump_indices(), "windows": windows.sums(),
                }),
                &schema::collision(),
            )?;
            vec![
                write_file(&dir, "collision_in.csv", &io::sequence_to_csv(&pair.y_in)?)?,
                write_file(&dir, "collision_out.csv", &io::sequence_to_csv(&pair.y_out)?)?,
                write_file(&dir, "collision.json", &pretty(&meta)?)?,
            ]
        }
        other => bail!("unknown synth label {other:?} (case-a, case-b, case-c, collision)"),
    };
    let listing: String = written.iter().map(|p| format!("{}\n", p.display())).collect();
    print(&listing)?;
    Ok(EXIT_OK)
}
