//! Command-line front end. [`run`] is the whole program minus process exit.

use crate::corpus;
use crate::encoder::encode_block;
use crate::eval::apply_tf;
use crate::ext::ExtInt;
use crate::isa::{parse_block, Block, Interp, LslModes, Reg};
use crate::octdom::Octagon;
use crate::oracle::{check_tf, OracleError};
use crate::sat::{Backend, Session};
use crate::synth::{feasible_modes, synthesize, Strategy, SynthConfig, SynthError, DEFAULT_MODE_CAP};
use crate::template::Pattern;
use crate::tf::{parse_pattern, Domain, TransferFunction};
use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Path of an external DIMACS solver used instead of the built-in one.
pub const SOLVER_ENV: &str = "WRAPSYNTH_SOLVER";

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSOUND: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "wrapsynth", version, about = "Transfer functions for wrapping bit-vector blocks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Debug, Clone)]
struct BlockOpts {
    /// Assembly file, or `@name` for a bundled example.
    block: String,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long, conflicts_with = "unsigned")]
    signed: bool,
    #[arg(long)]
    unsigned: bool,
    /// Give LSL the four signed modes instead of carry-out ones.
    #[arg(long)]
    lsl_signed: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List the feasible mode vectors.
    Modes {
        #[command(flatten)]
        block: BlockOpts,
        /// Stop once this many vectors are found.
        #[arg(long, default_value_t = DEFAULT_MODE_CAP)]
        mode_cap: usize,
    },
    /// Synthesize a transfer function.
    Synth {
        #[command(flatten)]
        block: BlockOpts,
        #[arg(long, default_value = "octagon")]
        domain: String,
        #[arg(long, default_value = "ladder")]
        strategy: String,
        /// Products of registers, e.g. `R0*R2,R1*R1`.
        #[arg(long)]
        monomials: Option<String>,
        /// Only these mode vectors, e.g. `PP,PN`.
        #[arg(long)]
        modes: Option<String>,
        #[arg(long)]
        drop_redundant: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Append SAT-call counts per phase.
        #[arg(long)]
        stats: bool,
        /// Conflict budget per SAT query.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_MODE_CAP)]
        mode_cap: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply a transfer function to an abstract state.
    Apply {
        tf: PathBuf,
        /// `expr <= c` constraints and `lo <= R0 <= hi` ranges, comma
        /// separated; `top` or `bottom` also work.
        #[arg(allow_hyphen_values = true)]
        state: String,
    },
    /// Check a transfer function against brute force.
    Verify {
        #[command(flatten)]
        block: BlockOpts,
        tf: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Write the block's CNF encoding as DIMACS.
    Dimacs {
        #[command(flatten)]
        block: BlockOpts,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Failure {
        let code = if e.is_resource_limit() { EXIT_LIMIT } else { EXIT_USAGE };
        Failure { code, msg: e.to_string() }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Failure {
        let code = if matches!(e, OracleError::Budget(_)) { EXIT_LIMIT } else { EXIT_USAGE };
        Failure { code, msg: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_block(o: &BlockOpts) -> Result<Block, Failure> {
    let mut b = match o.block.strip_prefix('@') {
        Some(name) => corpus::block(name).ok_or_else(|| {
            usage(format!("no bundled block {name:?}; try one of {}", corpus::names().collect::<Vec<_>>().join(", ")))
        })?,
        None => {
            let p = Path::new(&o.block);
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("block");
            parse_block(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?.with_name(name)
        }
    };
    if let Some(w) = o.width {
        if !(crate::isa::MIN_WIDTH..=crate::isa::MAX_WIDTH).contains(&w) {
            return Err(usage(format!("width {w} out of range")));
        }
        b = b.with_width(w);
    }
    if o.signed {
        b = b.with_interp(Interp::Signed);
    }
    if o.unsigned {
        b = b.with_interp(Interp::Unsigned);
    }
    if o.lsl_signed {
        b = b.with_lsl_modes(LslModes::Signed);
    }
    Ok(b)
}

fn backend() -> Backend {
    match std::env::var_os(SOLVER_ENV) {
        Some(p) if !p.is_empty() => Backend::External(PathBuf::from(p)),
        _ => Backend::Internal,
    }
}

fn load_tf(path: &Path) -> Result<TransferFunction, Failure> {
    let text = read(path)?;
    let parsed = if text.trim_start().starts_with('{') {
        TransferFunction::from_json(&text)
    } else {
        TransferFunction::from_text(&text)
    };
    parsed.map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_reg_list(s: &str) -> Result<Vec<Vec<Reg>>, Failure> {
    s.split(',')
        .filter(|m| !m.trim().is_empty())
        .map(|m| {
            m.split('*')
                .map(|f| {
                    let f = f.trim();
                    f.strip_prefix(['R', 'r'])
                        .and_then(|n| n.parse::<Reg>().ok())
                        .ok_or_else(|| usage(format!("bad monomial factor {f:?}")))
                })
                .collect()
        })
        .collect()
}

/// Parses a state expression over the registers of `tf`.
pub fn parse_state(s: &str, registers: &[Reg]) -> Result<Octagon, String> {
    let n = registers.len();
    let names: Vec<String> = registers.iter().map(|r| format!("r{r}")).collect();
    match s.trim().to_ascii_lowercase().as_str() {
        "bottom" => return Ok(Octagon::bottom(n)),
        "top" | "" => return Ok(Octagon::top(n)),
        _ => {}
    }
    let mut o = Octagon::top(n);
    for part in s.split(',') {
        let part = part.trim().to_ascii_lowercase();
        let sides: Vec<&str> = part.split("<=").map(str::trim).collect();
        let int = |t: &str| t.parse::<num_bigint::BigInt>().map_err(|_| format!("bad constant {t:?}"));
        let pat = |t: &str| parse_pattern(t, &names).ok_or_else(|| format!("bad expression {t:?}"));
        match sides.as_slice() {
            [lhs, rhs] => {
                let p = pat(lhs)?;
                check_octagonal(&p, &part)?;
                o.add(&p, &ExtInt::Fin(int(rhs)?));
            }
            [lo, mid, hi] => {
                let p = pat(mid)?;
                check_octagonal(&p, &part)?;
                o.add(&p, &ExtInt::Fin(int(hi)?));
                o.add(&p.negate(), &ExtInt::Fin(-int(lo)?));
            }
            _ => return Err(format!("expected `expr <= c` or `lo <= expr <= hi`, found {part:?}")),
        }
    }
    Ok(o.close())
}

fn check_octagonal(p: &Pattern, part: &str) -> Result<(), String> {
    if p.is_octagonal() {
        Ok(())
    } else {
        Err(format!("{part:?} is not an octagonal constraint"))
    }
}

/// Text rendering of an output state: intervals per register, then the
/// relational constraints.
pub fn render_state(o: &Octagon, registers: &[Reg]) -> String {
    if o.is_bottom() {
        return "BOTTOM\n".into();
    }
    let names: Vec<String> = registers.iter().map(|r| format!("r{r}")).collect();
    let mut s = String::new();
    for (k, name) in names.iter().enumerate() {
        let (lo, hi) = o.interval(k);
        s += &format!("{name} in [{lo}, {hi}]\n");
    }
    for c in o.constraints().into_iter().filter(|c| !c.pattern.is_unary()) {
        s += &format!("{} <= {}\n", c.pattern.display_with(&names), c.bound);
    }
    s
}

fn exec(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| usage(e.to_string());
    match cli.cmd {
        Cmd::Modes { block, mode_cap } => {
            let b = load_block(&block)?;
            let enc = encode_block(&b).map_err(|e| usage(e.to_string()))?;
            let mut session = Session::with_backend(&enc.builder.cnf, backend());
            let modes = feasible_modes(&enc, &mut session, mode_cap)?;
            for m in &modes {
                writeln!(out, "{m}").map_err(io)?;
            }
            if b.multimodal().is_empty() {
                writeln!(out, "{} (empty)", modes.len()).map_err(io)?;
            } else {
                writeln!(out, "{}", modes.len()).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Cmd::Synth { block, domain, strategy, monomials, modes, drop_redundant, format, stats, budget, mode_cap, output } => {
            let b = load_block(&block)?;
            let domain = match domain.as_str() {
                "interval" => Domain::Interval,
                "octagon" => Domain::Octagon,
                d => return Err(usage(format!("unknown domain {d:?}"))),
            };
            let strategy: Strategy = strategy.parse().map_err(usage)?;
            let cfg = SynthConfig {
                domain,
                strategy,
                monomials: monomials.as_deref().map(parse_reg_list).transpose()?.unwrap_or_default(),
                drop_redundant,
                backend: backend(),
                conflict_budget: budget,
                mode_cap,
                only_modes: modes.map(|m| m.split(',').map(|s| s.trim().to_string()).collect()),
                ..SynthConfig::default()
            };
            let s = synthesize(&b, &cfg)?;
            let mut text = match format {
                Format::Text => s.tf.to_text(),
                Format::Json => s.tf.to_json(),
            };
            if stats {
                match format {
                    Format::Text => {
                        text += &format!("# mode-calls {}\n", s.stats.mode_calls);
                        for p in &s.stats.pairs {
                            text += &format!(
                                "# pair {} guard-calls {} affine-calls {} update-calls {}\n",
                                p.modes, p.guard_calls, p.affine_calls, p.update_calls
                            );
                        }
                        text += &format!("# guard-calls {} total-calls {}\n", s.stats.guard_calls(), s.stats.total_calls());
                    }
                    Format::Json => {
                        let mut v: serde_json::Value = serde_json::from_str(&text).expect("own output");
                        v["stats"] = serde_json::to_value(&s.stats).expect("serializable");
                        text = serde_json::to_string_pretty(&v).expect("serializable") + "\n";
                    }
                }
            }
            match output {
                Some(p) => std::fs::write(&p, text).map_err(|e| usage(format!("{}: {e}", p.display())))?,
                None => out.write_all(text.as_bytes()).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Cmd::Apply { tf, state } => {
            let tf = load_tf(&tf)?;
            let input = parse_state(&state, &tf.registers).map_err(usage)?;
            let result = apply_tf(&tf, &input);
            out.write_all(render_state(&result, &tf.registers).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Cmd::Verify { block, tf, samples, seed, json } => {
            let tf_value = load_tf(&tf)?;
            let mut b = load_block(&block)?;
            // Width and interpretation default to the function's own.
            if block.width.is_none() {
                b = b.with_width(tf_value.width);
            }
            if !block.signed && !block.unsigned {
                b = b.with_interp(tf_value.interpretation);
            }
            if !block.lsl_signed {
                b = b.with_lsl_modes(tf_value.lsl_modes);
            }
            let report = check_tf(&tf_value, &b, samples, seed)?;
            if json {
                out.write_all(report.to_json().as_bytes()).map_err(io)?;
            } else {
                writeln!(out, "{report}").map_err(io)?;
            }
            Ok(if report.is_clean() { EXIT_OK } else { EXIT_UNSOUND })
        }
        Cmd::Dimacs { block } => {
            let b = load_block(&block)?;
            let enc = encode_block(&b).map_err(|e| usage(e.to_string()))?;
            out.write_all(crate::sat::dimacs::export_dimacs(&enc.builder.cnf).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match exec(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}
