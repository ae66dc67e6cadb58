//! Command-line front end of the `stcode` binary.
//!
//! Every subcommand reads optional defaults from a TOML file (`--config`),
//! where a table named after the subcommand holds keys spelled like the long
//! flags with underscores. Flags given on the command line win.
//!
//! Exit codes: 0 success, 1 other failure, 2 bad flags or input, 3 budget
//! exceeded, 4 I/O failure. Failures print one JSON line on stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::codes::{build_lattice, build_normalized, diversity_check, CodeName, Convention};
use crate::error::{Error, Result};
use crate::mldecode::{complexity_profile_ordered, fd_analyze, mask_grid, profiles_csv, CERTIFYING_TOL};
use crate::relaychannel::{NafConfig, RelayGain};
use crate::simharness::{atomic_write, run_ber_sweep, run_det_report, sweep_csv, ChannelMode, ConventionPolicy, SimConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "stcode", version, about = "Distributed iterated space-time codes: construction, analysis and simulation")]
pub struct Cli {
    /// TOML file with per-subcommand defaults
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: STCODE_THREADS, else all cores)
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a code lattice and print its parameters
    BuildCode(BuildCodeArgs),
    /// Determinant statistics over all codewords
    DetStats(DetStatsArgs),
    /// Rank and minimum determinant over all codeword differences
    DiversityCheck(DiversityArgs),
    /// Zero structure of the R factor and the decoding exponent
    FdAnalyze(FdArgs),
    /// Sphere-decoder node counts versus SNR
    Complexity(ComplexityArgs),
    /// BLER/BER sweep
    Simulate(SimulateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BuildCode(_) => "build-code",
            Command::DetStats(_) => "det-stats",
            Command::DiversityCheck(_) => "diversity-check",
            Command::FdAnalyze(_) => "fd-analyze",
            Command::Complexity(_) => "complexity",
            Command::Simulate(_) => "simulate",
        }
    }
}

fn parse_code(s: &str) -> std::result::Result<CodeName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlphabetArgs {
    /// Named alphabet: pm1 = {±1}, pam4 = {±1, ±3}
    #[arg(long, value_name = "NAME")]
    pub alphabet: Option<String>,
    /// Explicit alphabet as a comma-separated list, e.g. "-1,1"
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub alphabet_set: Option<String>,
}

impl AlphabetArgs {
    pub fn resolve(&self) -> Result<Vec<i64>> {
        if let Some(list) = &self.alphabet_set {
            return parse_list(list);
        }
        match self.alphabet.as_deref().unwrap_or("pm1") {
            "pm1" => Ok(vec![-1, 1]),
            "pam4" => Ok(vec![-3, -1, 1, 3]),
            other => Err(Error::InvalidInput(format!("unknown alphabet `{other}` (use pm1, pam4 or --alphabet-set)"))),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<i64>> {
    let v: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad alphabet entry `{t}`"))))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::InvalidInput("empty alphabet".into()));
    }
    Ok(v)
}

/// `start:step:stop` (inclusive), a comma list, or a single value.
pub fn parse_snr(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad SNR value `{t}`")));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, d, b) = (num(start)?, num(step)?, num(stop)?);
            if !(d > 0.0) || b < a {
                return Err(Error::Parse(format!("SNR range `{s}` needs step > 0 and stop ≥ start")));
            }
            let count = ((b - a) / d + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(Error::Parse(format!("SNR range `{s}` has too many points")));
            }
            Ok((0..count).map(|i| a + d * i as f64).collect())
        }
        [single] => single.split(',').map(num).collect(),
        _ => Err(Error::Parse(format!("SNR `{s}` is not start:step:stop"))),
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BuildCodeArgs {
    /// silver_-17, silver_-1, golden or mido_a4
    #[arg(long, value_parser = parse_code)]
    pub code: Option<CodeName>,
    /// Print every basis matrix with exact entries
    #[arg(long)]
    pub dump_basis: bool,
    /// Rescale to unit volume first
    #[arg(long)]
    pub normalized: bool,
    /// Write the JSON here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetStatsArgs {
    /// silver_-17, silver_-1, golden or mido_a4
    #[arg(long, value_parser = parse_code)]
    pub code: Option<CodeName>,
    #[command(flatten)]
    #[serde(flatten)]
    pub alphabet: AlphabetArgs,
    /// auto, abs_det or abs_det_squared
    #[arg(long)]
    pub convention: Option<String>,
    /// Output prefix; writes PREFIX.json and PREFIX_hist.csv
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiversityArgs {
    /// silver_-17, silver_-1, golden or mido_a4
    #[arg(long, value_parser = parse_code)]
    pub code: Option<CodeName>,
    #[command(flatten)]
    #[serde(flatten)]
    pub alphabet: AlphabetArgs,
    /// Output prefix; writes PREFIX.json
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdArgs {
    /// silver_-17, silver_-1, golden or mido_a4
    #[arg(long, value_parser = parse_code)]
    pub code: Option<CodeName>,
    /// Random channels (default 100)
    #[arg(long)]
    pub trials: Option<usize>,
    /// Relative zero threshold (default 1e-9)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Master seed (default 1)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output prefix; writes PREFIX.json
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplexityArgs {
    /// silver_-17, silver_-1, golden or mido_a4
    #[arg(long, value_parser = parse_code)]
    pub code: Option<CodeName>,
    #[command(flatten)]
    #[serde(flatten)]
    pub alphabet: AlphabetArgs,
    /// Channels per SNR point (default 1000)
    #[arg(long)]
    pub channels: Option<usize>,
    /// Master seed (default 1)
    #[arg(long)]
    pub seed: Option<u64>,
    /// SNR in dB: start:step:stop, list or single value (default 30)
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<String>,
    /// Decode in the order found by fd-analyze instead of the basis order
    #[arg(long)]
    pub fd_order: bool,
    /// Output prefix; writes PREFIX.json and PREFIX.csv
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateArgs {
    /// silver_-17, silver_-1, golden or mido_a4
    #[arg(long, value_parser = parse_code)]
    pub code: Option<CodeName>,
    /// quasi_static or naf
    #[arg(long)]
    pub mode: Option<String>,
    /// SNR in dB: start:step:stop, list or single value
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<String>,
    /// Trial cap per SNR point (default 10000)
    #[arg(long)]
    pub trials: Option<u64>,
    /// Stop a point at this many block errors (default 200)
    #[arg(long)]
    pub max_errors: Option<u64>,
    /// Master seed (default 1)
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub alphabet: AlphabetArgs,
    /// Receive antennas in quasi_static mode (default 1)
    #[arg(long)]
    pub receive_antennas: Option<usize>,
    /// NAF: number of relays
    #[arg(long)]
    pub relays: Option<usize>,
    /// NAF: source antennas
    #[arg(long)]
    pub n_s: Option<usize>,
    /// NAF: antennas per relay
    #[arg(long)]
    pub n_r: Option<usize>,
    /// NAF: destination antennas
    #[arg(long)]
    pub n_d: Option<usize>,
    /// NAF: source gain in the listening phase
    #[arg(long)]
    pub gamma_1: Option<f64>,
    /// NAF: source gain in the relaying phase
    #[arg(long)]
    pub gamma_2: Option<f64>,
    /// NAF: relay transmit gain
    #[arg(long)]
    pub gamma_r: Option<f64>,
    /// NAF: source-to-relay gain
    #[arg(long)]
    pub gamma_r_prime: Option<f64>,
    /// NAF: "normalized" or a fixed amplification factor
    #[arg(long)]
    pub relay_gain: Option<String>,
    /// Output prefix; writes PREFIX.json and PREFIX.csv
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn to_config(&self) -> Result<SimConfig> {
        let d = SimConfig::default();
        let mode = match self.mode.as_deref().unwrap_or("quasi_static") {
            "quasi_static" => ChannelMode::QuasiStatic,
            "naf" => ChannelMode::Naf,
            m => return Err(Error::InvalidInput(format!("unknown mode `{m}` (quasi_static or naf)"))),
        };
        let nd = NafConfig::default();
        let relay_gain = match self.relay_gain.as_deref() {
            None | Some("normalized") => RelayGain::Normalized,
            Some(v) => RelayGain::Fixed(v.parse().map_err(|_| Error::Parse(format!("bad relay gain `{v}`")))?),
        };
        Ok(SimConfig {
            code: required_code(self.code)?,
            mode,
            snr_db: parse_snr(self.snr.as_deref().ok_or_else(|| Error::InvalidInput("missing --snr".into()))?)?,
            trials: self.trials.unwrap_or(d.trials),
            max_block_errors: self.max_errors.unwrap_or(d.max_block_errors),
            master_seed: self.seed.unwrap_or(d.master_seed),
            alphabet: self.alphabet.resolve()?,
            receive_antennas: self.receive_antennas.unwrap_or(d.receive_antennas),
            naf: NafConfig {
                relays: self.relays.unwrap_or(nd.relays),
                n_s: self.n_s.unwrap_or(nd.n_s),
                n_r: self.n_r.unwrap_or(nd.n_r),
                n_d: self.n_d.unwrap_or(nd.n_d),
                gamma_1: self.gamma_1,
                gamma_2: self.gamma_2,
                gamma_r: self.gamma_r,
                gamma_r_prime: self.gamma_r_prime,
                relay_gain,
                ..nd
            },
            output: self.out.clone(),
        })
    }
}

fn required_code(c: Option<CodeName>) -> Result<CodeName> {
    c.ok_or_else(|| Error::InvalidInput("missing --code".into()))
}

/// Overlay the flags that were given onto the file's table for this subcommand.
fn merge_with_file<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Value>) -> Result<T> {
    let mut base = match file {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(Error::Parse("config section must be a table".into())),
        None => return serde_json::from_value(serde_json::to_value(flags).map_err(json_err)?).map_err(json_err),
    };
    if let Value::Object(given) = serde_json::to_value(flags).map_err(json_err)? {
        for (k, v) in given {
            // absent options serialize as null and unset switches as false
            if !v.is_null() && v != Value::Bool(false) {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Error::Parse(format!("config: {e}")))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn load_config(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {}", path.display(), e.message())))?;
    let value = serde_json::to_value(table).map_err(json_err)?;
    const SECTIONS: [&str; 7] = ["threads", "build-code", "det-stats", "diversity-check", "fd-analyze", "complexity", "simulate"];
    if let Value::Object(m) = &value {
        if let Some(k) = m.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(Error::Parse(format!("{}: unknown section `{k}`", path.display())));
        }
    }
    Ok(value)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Io { .. } => EXIT_IO,
        Error::InvalidInput(_) | Error::Parse(_) | Error::UnknownCode(_) | Error::Dimension(_) => EXIT_USAGE,
        _ => 1,
    }
}

fn error_line(kind: &str, message: &str, code: i32) -> String {
    json!({ "error": kind, "message": message, "exit_code": code }).to_string()
}

struct Run {
    argv: Vec<String>,
    command: &'static str,
}

impl Run {
    fn metadata(&self, config: &impl Serialize, seed: Option<u64>) -> Value {
        json!({
            "tool": "stcode",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "argv": self.argv,
            "seed": seed,
            "config": config,
        })
    }

    fn csv_header(&self, config: &impl Serialize) -> String {
        format!(
            "# stcode {} {}\n# config {}\n",
            env!("CARGO_PKG_VERSION"),
            self.argv.join(" "),
            serde_json::to_string(config).unwrap_or_default()
        )
    }
}

fn with_ext(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(json_err)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

fn default_prefix(out: &Option<PathBuf>, stem: &str, code: CodeName) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from(format!("{stem}_{code}")))
}

fn build_code(run: &Run, a: &BuildCodeArgs) -> Result<()> {
    let name = required_code(a.code)?;
    let code = if a.normalized { build_normalized(name)? } else { build_lattice(name)? };
    let mut payload = json!({
        "metadata": run.metadata(a, None),
        "code": code.name,
        "field": code.field().name(),
        "n": code.n(),
        "k": code.k(),
        "block_structure": code.block_structure(),
        "scale": code.scale,
        "volume": code.volume()?,
        "alphabet": code.alphabet,
        "units": code.units,
    });
    if a.dump_basis {
        let basis: Vec<Vec<Vec<String>>> = code
            .basis()?
            .iter()
            .map(|m| (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect()).collect())
            .collect();
        payload["basis"] = json!(basis);
    }
    match &a.out {
        Some(p) => {
            write_json(p, &payload)?;
            println!("wrote {}", p.display());
        }
        None => println!("{}", serde_json::to_string_pretty(&payload).map_err(json_err)?),
    }
    Ok(())
}

fn det_stats(run: &Run, a: &DetStatsArgs) -> Result<()> {
    let name = required_code(a.code)?;
    let alphabet = a.alphabet.resolve()?;
    let policy = match a.convention.as_deref().unwrap_or("auto") {
        "auto" => ConventionPolicy::Auto,
        c => ConventionPolicy::Fixed(Convention::parse(c)?),
    };
    let report = if alphabet == [-1, 1] {
        run_det_report(name, policy)?
    } else {
        let conv = match policy {
            ConventionPolicy::Auto => crate::codes::locked_convention()?,
            ConventionPolicy::Fixed(c) => c,
        };
        let code = build_normalized(name)?.with_alphabet(alphabet)?;
        let stats = crate::codes::det_statistics(&code, conv)?;
        let histogram_csv = crate::codes::histogram_csv(&stats);
        crate::simharness::DetReport { stats, histogram_csv }
    };
    let prefix = default_prefix(&a.out, "det", name);
    let (jp, cp) = (with_ext(&prefix, ".json"), with_ext(&prefix, "_hist.csv"));
    write_json(&jp, &json!({ "metadata": run.metadata(a, None), "stats": report.stats }))?;
    atomic_write(&cp, format!("{}{}", run.csv_header(a), report.histogram_csv).as_bytes())?;
    let s = &report.stats;
    println!(
        "{name}: min {:.6e} max {:.6e} mean {:.6e} over {} codewords ({})",
        s.min,
        s.max,
        s.mean,
        s.codewords,
        s.convention.as_str()
    );
    println!("wrote {} {}", jp.display(), cp.display());
    Ok(())
}

fn diversity(run: &Run, a: &DiversityArgs) -> Result<()> {
    let name = required_code(a.code)?;
    let code = build_normalized(name)?;
    let report = diversity_check(&code, &a.alphabet.resolve()?)?;
    let prefix = default_prefix(&a.out, "diversity", name);
    let jp = with_ext(&prefix, ".json");
    write_json(&jp, &json!({ "metadata": run.metadata(a, None), "report": report }))?;
    println!(
        "{name}: min rank {} of {}, min |det| {}, fully diverse: {}",
        report.min_rank,
        report.n,
        report.min_abs_det_nonzero_diff.map_or("n/a".into(), |v| format!("{v:.6e}")),
        report.fully_diverse
    );
    println!("wrote {}", jp.display());
    Ok(())
}

fn fd(run: &Run, a: &FdArgs) -> Result<()> {
    let name = required_code(a.code)?;
    let seed = a.seed.unwrap_or(1);
    let code = build_normalized(name)?;
    let rep = fd_analyze(&code, a.trials.unwrap_or(100), a.tol.unwrap_or(CERTIFYING_TOL), seed)?;
    let prefix = default_prefix(&a.out, "fd", name);
    let jp = with_ext(&prefix, ".json");
    let grid = mask_grid(&rep.zero_mask);
    write_json(&jp, &json!({ "metadata": run.metadata(a, Some(seed)), "report": rep, "grid": grid.lines().collect::<Vec<_>>() }))?;
    println!("order {:?}", rep.order);
    print!("{grid}");
    println!(
        "{name}: k = {}, k' = {} (exact HR search {}), fast-decodable: {}",
        rep.k, rep.complexity_exponent, rep.hr_exponent, rep.fast_decodable
    );
    println!("wrote {}", jp.display());
    Ok(())
}

fn complexity(run: &Run, a: &ComplexityArgs) -> Result<()> {
    let name = required_code(a.code)?;
    let seed = a.seed.unwrap_or(1);
    let code = build_normalized(name)?;
    let alphabet = a.alphabet.resolve()?;
    let snrs = parse_snr(a.snr.as_deref().unwrap_or("30"))?;
    let order = if a.fd_order {
        Some(fd_analyze(&code, 10, CERTIFYING_TOL, seed)?.order)
    } else {
        None
    };
    let profiles = snrs
        .iter()
        .map(|&s| complexity_profile_ordered(&code, &alphabet, a.channels.unwrap_or(1000), seed, s, order.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let prefix = default_prefix(&a.out, "complexity", name);
    let (jp, cp) = (with_ext(&prefix, ".json"), with_ext(&prefix, ".csv"));
    write_json(&jp, &json!({ "metadata": run.metadata(a, Some(seed)), "profiles": profiles }))?;
    let csv = profiles_csv(&profiles);
    atomic_write(&cp, format!("{}{}", run.csv_header(a), csv).as_bytes())?;
    print!("{csv}");
    println!("wrote {} {}", jp.display(), cp.display());
    Ok(())
}

fn simulate(run: &Run, a: &SimulateArgs) -> Result<()> {
    let cfg = a.to_config()?;
    let result = run_ber_sweep(&cfg)?;
    let prefix = default_prefix(&a.out, "sim", cfg.code);
    let (jp, cp) = (with_ext(&prefix, ".json"), with_ext(&prefix, ".csv"));
    write_json(&jp, &json!({ "metadata": run.metadata(a, Some(cfg.master_seed)), "result": result }))?;
    let csv = sweep_csv(&result);
    atomic_write(&cp, format!("{}{}", run.csv_header(a), csv).as_bytes())?;
    for p in &result.points {
        println!(
            "{} dB: bler {:.3e} ber {:.3e} ({} trials, {} block errors)",
            p.snr_db, p.bler, p.ber, p.trials, p.block_errors
        );
    }
    println!("wrote {} {}", jp.display(), cp.display());
    Ok(())
}

fn configure_threads(flag: Option<usize>, file: Option<&Value>) -> Result<()> {
    let from_env = || std::env::var("STCODE_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    let from_file = file.and_then(|v| v.get("threads")).and_then(Value::as_u64).map(|v| v as usize);
    if let Some(n) = flag.or_else(from_env).or(from_file) {
        if n == 0 {
            return Err(Error::InvalidInput("threads must be positive".into()));
        }
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(cli: Cli, argv: Vec<String>) -> Result<()> {
    let file = cli.config.as_deref().map(load_config).transpose()?;
    configure_threads(cli.threads, file.as_ref())?;
    let run = Run {
        argv,
        command: cli.command.name(),
    };
    let section = file.as_ref().and_then(|f| f.get(run.command));
    match &cli.command {
        Command::BuildCode(a) => build_code(&run, &merge_with_file(a, section)?),
        Command::DetStats(a) => det_stats(&run, &merge_with_file(a, section)?),
        Command::DiversityCheck(a) => diversity(&run, &merge_with_file(a, section)?),
        Command::FdAnalyze(a) => fd(&run, &merge_with_file(a, section)?),
        Command::Complexity(a) => complexity(&run, &merge_with_file(a, section)?),
        Command::Simulate(a) => simulate(&run, &merge_with_file(a, section)?),
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return EXIT_USAGE;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first, EXIT_USAGE));
            return EXIT_USAGE;
        }
    };
    match dispatch(cli, argv) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}", error_line(e.kind(), &e.to_string().replace('\n', " "), code));
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_syntax() {
        assert_eq!(parse_snr("0:2:6").unwrap(), vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(parse_snr("0:0.5:1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_snr("-3").unwrap(), vec![-3.0]);
        assert_eq!(parse_snr("1,5").unwrap(), vec![1.0, 5.0]);
        assert!(parse_snr("0:0:3").is_err());
        assert!(parse_snr("5:1:0").is_err());
        assert!(parse_snr("a").is_err());
    }

    #[test]
    fn alphabets() {
        assert_eq!(AlphabetArgs::default().resolve().unwrap(), vec![-1, 1]);
        let a = AlphabetArgs {
            alphabet: Some("pam4".into()),
            alphabet_set: None,
        };
        assert_eq!(a.resolve().unwrap(), vec![-3, -1, 1, 3]);
        let a = AlphabetArgs {
            alphabet: None,
            alphabet_set: Some("-2, 0,2".into()),
        };
        assert_eq!(a.resolve().unwrap(), vec![-2, 0, 2]);
        assert!(AlphabetArgs { alphabet: Some("qam".into()), alphabet_set: None }.resolve().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = json!({ "code": "golden", "trials": 5, "seed": 3, "alphabet": "pam4" });
        let flags = SimulateArgs {
            trials: Some(9),
            ..Default::default()
        };
        let merged = merge_with_file(&flags, Some(&file)).unwrap();
        assert_eq!(merged.code, Some(CodeName::Golden));
        assert_eq!(merged.trials, Some(9));
        assert_eq!(merged.seed, Some(3));
        assert_eq!(merged.alphabet.alphabet.as_deref(), Some("pam4"));
        let bad = json!({ "colour": 1 });
        assert!(merge_with_file(&flags, Some(&bad)).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Budget { needed: 2, budget: 1 }), EXIT_BUDGET);
        assert_eq!(exit_code(&Error::UnknownCode("x".into())), EXIT_USAGE);
        let io = Error::Io {
            path: "p".into(),
            source: std::io::Error::other("x"),
        };
        assert_eq!(exit_code(&io), EXIT_IO);
        let line = error_line("budget", "too big", 3);
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["exit_code"], 3);
        assert!(!line.contains('\n'));
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
