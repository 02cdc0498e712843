//! `uag`: batch front end. One command per process, files in, one document out.
//!
//! Exit codes: 0 success, 1 false or refuted, 2 inconclusive or exhausted,
//! 3 input or resource error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use uag_core::equivalence::{
    auto_equivalent_search, geom_equivalent, Caps, EquivalenceCertificate,
};
use uag_core::free::DEFAULT_CAP;
use uag_core::geometry::{PointSpace, DEFAULT_POINT_CAP};
use uag_core::io::{self, FreeDump, LatticeDump};
use uag_core::suite::{builtin_groups, run_suite, SuiteGroup};
use uag_core::verbal::{check_op2, verify_derived_operations, FreeScope, Op2Outcome};
use uag_core::{Error, FiniteAlgebra, VarietySpec};

#[derive(Parser)]
#[command(
    name = "uag",
    version,
    about = "Universal algebraic geometry over finite algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the free algebra W(k) of the variety.
    Free(Common),
    /// Closed-congruence lattice of one algebra on W(k).
    Lattice(Common),
    /// Check a word system (Op1, Op2, derived = verbal).
    CheckWords(Common),
    /// Compare closed-congruence lattices of --h1 and --h2 up to --nmax.
    GeomEq(Common),
    /// Search for a word system making --h1 and --h2* geometrically equivalent.
    AutoEq(Common),
    /// Run the verification suite on the built-in corpus or on --variety/--algebras.
    Verify(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Args)]
struct Common {
    /// Algebra file whose algebras generate the variety.
    #[arg(long, value_name = "FILE")]
    variety: Option<PathBuf>,
    /// Further algebras over the same signature.
    #[arg(long, value_name = "FILE")]
    algebras: Option<PathBuf>,
    /// Word system file.
    #[arg(long, value_name = "FILE")]
    words: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = 2, value_parser = clap::value_parser!(u64).range(0..))]
    nmax: u64,
    #[arg(long, value_name = "D", default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    /// Free-algebra size cap.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    cap: u64,
    /// Point-space size cap.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_POINT_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    point_cap: u64,
    /// Word systems tried by auto-eq.
    #[arg(long, value_name = "N", default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    candidates: u64,
    /// Rank of the free algebra for free and lattice.
    #[arg(long, value_name = "K", default_value_t = 2)]
    rank: usize,
    /// Algebra for lattice (name in --algebras or --variety, or `trivial`).
    #[arg(long, value_name = "NAME")]
    algebra: Option<String>,
    #[arg(long, value_name = "NAME")]
    h1: Option<String>,
    #[arg(long, value_name = "NAME")]
    h2: Option<String>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl Common {
    fn caps(&self) -> Caps {
        Caps {
            free: self.cap as usize,
            points: self.point_cap as usize,
            candidates: self.candidates as usize,
        }
    }

    fn variety(&self) -> anyhow::Result<VarietySpec> {
        let path = self
            .variety
            .as_ref()
            .ok_or_else(|| anyhow!("--variety is required"))?;
        Ok(io::parse_variety(&read(path)?)?)
    }

    fn algebras(&self, v: &VarietySpec) -> anyhow::Result<Vec<FiniteAlgebra>> {
        match &self.algebras {
            Some(path) => Ok(io::parse_algebras(&read(path)?, v)?),
            None => Ok(Vec::new()),
        }
    }

    fn find(
        &self,
        v: &VarietySpec,
        name: Option<&str>,
        flag: &str,
    ) -> anyhow::Result<FiniteAlgebra> {
        let name = name.ok_or_else(|| anyhow!("{flag} is required"))?;
        let extra = self.algebras(v)?;
        if let Some(a) = extra
            .iter()
            .chain(v.generators())
            .find(|a| a.name() == name)
        {
            return Ok(a.clone());
        }
        if name == "trivial" {
            return Ok(FiniteAlgebra::trivial(v.signature().clone()));
        }
        bail!("no algebra named `{name}`")
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Text to write and the exit code.
type Outcome = (String, u8);

fn no_dot(c: &Common) -> anyhow::Result<()> {
    if c.format == Format::Dot {
        bail!("--format dot is only available for lattice");
    }
    Ok(())
}

fn cmd_free(c: &Common) -> anyhow::Result<Outcome> {
    no_dot(c)?;
    let v = c.variety()?;
    let b = v.free(c.rank, c.cap as usize)?;
    let dump = FreeDump::new(&b);
    let text = match c.format {
        Format::Text => {
            let mut s = format!("W({}) has {} elements\n", dump.rank, dump.size);
            for e in &dump.elements {
                let _ = writeln!(s, "  {}: {}", e.index, e.witness);
            }
            s
        }
        _ => io::to_json(&dump)?,
    };
    Ok((text, 0))
}

fn cmd_lattice(c: &Common) -> anyhow::Result<Outcome> {
    let v = c.variety()?;
    let h = c.find(&v, c.algebra.as_deref(), "--algebra")?;
    let b = v.free(c.rank, c.cap as usize)?;
    let l = PointSpace::new(b.clone(), &h, c.point_cap as usize)?.closed_lattice();
    let dump = LatticeDump::new(&b, &l);
    let text = match c.format {
        Format::Json => io::to_json(&dump)?,
        Format::Dot => dump.to_dot(),
        Format::Text => dump.to_text(),
    };
    Ok((text, 0))
}

fn cmd_check_words(c: &Common) -> anyhow::Result<Outcome> {
    no_dot(c)?;
    let v = c.variety()?;
    let path = c
        .words
        .as_ref()
        .ok_or_else(|| anyhow!("--words is required"))?;
    let ws = io::parse_words(&read(path)?, v.signature())?;
    let words = io::words_json(&ws)["words"].clone();
    let n_max = c.nmax as usize;
    let (report, code) = if let Some(op) = ws.op1_violation() {
        let symbol = v.signature().name(op);
        (
            json!({"passed": false, "words": words, "stage": "op1", "symbol": symbol}),
            1,
        )
    } else {
        let outcome = FreeScope::new(&v, n_max, c.cap as usize)
            .and_then(|scope| check_op2(&ws, &Arc::new(scope)));
        match outcome {
            Ok(Op2Outcome::Pass(s)) => match verify_derived_operations(&ws, &s)? {
                None => (
                    json!({"passed": true, "words": words, "op2_verified_up_to": n_max}),
                    0,
                ),
                Some((rank, symbol)) => (
                    json!({"passed": false, "words": words, "stage": "derived", "rank": rank, "symbol": symbol}),
                    1,
                ),
            },
            Ok(Op2Outcome::Fail {
                rank,
                stage,
                detail,
            }) => (
                json!({"passed": false, "words": words, "stage": stage.to_string(), "rank": rank, "detail": detail}),
                1,
            ),
            Err(e @ Error::CapExceeded { .. }) => (
                json!({"passed": null, "words": words, "inconclusive": e.to_string()}),
                2,
            ),
            Err(e) => return Err(e.into()),
        }
    };
    let text = match c.format {
        Format::Text => match code {
            0 => format!("pass: Op1 and Op2 hold up to rank {n_max}\n"),
            1 => format!(
                "fail: stage {}{}\n",
                report["stage"].as_str().unwrap_or("?"),
                report
                    .get("rank")
                    .map(|r| format!(" at rank {r}"))
                    .unwrap_or_default()
            ),
            _ => format!(
                "inconclusive: {}\n",
                report["inconclusive"].as_str().unwrap_or("")
            ),
        },
        _ => io::to_json(&report)?,
    };
    Ok((text, code))
}

fn certificate_text(cert: &EquivalenceCertificate) -> String {
    let mut s = format!("{} vs {}: {:?}\n", cert.h1, cert.h2, cert.verdict);
    if let Some(w) = &cert.word_system {
        for (k, v) in w {
            let _ = writeln!(s, "  {k} := {v}");
        }
    }
    for e in &cert.evidence {
        let _ = writeln!(
            s,
            "  rank {}: {} vs {} closed congruences",
            e.rank, e.sizes[0], e.sizes[1]
        );
    }
    if let Some(w) = &cert.witness {
        let blocks: Vec<String> = w
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.join(", ")))
            .collect();
        let _ = writeln!(
            s,
            "  witness at rank {}: {} is {}-closed, not {}-closed",
            w.rank,
            blocks.join(" | "),
            w.closed_for,
            w.not_closed_for
        );
    }
    s
}

fn cmd_equivalence(c: &Common, search: bool) -> anyhow::Result<Outcome> {
    no_dot(c)?;
    let v = c.variety()?;
    let h1 = c.find(&v, c.h1.as_deref(), "--h1")?;
    let h2 = c.find(&v, c.h2.as_deref(), "--h2")?;
    let n_max = c.nmax as usize;
    let cert = if search {
        auto_equivalent_search(&h1, &h2, &v, c.depth as usize, n_max, c.caps())?
    } else {
        geom_equivalent(&h1, &h2, &v, n_max, &c.caps())?
    };
    let text = match c.format {
        Format::Text => certificate_text(&cert),
        _ => io::to_json(&cert)?,
    };
    Ok((text, cert.exit_code() as u8))
}

fn cmd_verify(c: &Common) -> anyhow::Result<Outcome> {
    no_dot(c)?;
    let groups = match &c.variety {
        None => builtin_groups()?,
        Some(_) => {
            let v = c.variety()?;
            let corpus = match &c.algebras {
                Some(_) => c.algebras(&v)?,
                None => v.generators().to_vec(),
            };
            vec![SuiteGroup {
                name: "custom".into(),
                variety: v,
                corpus,
                n_max: c.nmax as usize,
                depth_max: c.depth as usize,
                hom_rank: c.nmax as usize,
                caps: c.caps(),
            }]
        }
    };
    let report = run_suite(&groups)?;
    let text = match c.format {
        Format::Text => report.to_text(),
        _ => io::to_json(&report)?,
    };
    Ok((text, if report.passed { 0 } else { 1 }))
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Free(c) => cmd_free(c),
        Command::Lattice(c) => cmd_lattice(c),
        Command::CheckWords(c) => cmd_check_words(c),
        Command::GeomEq(c) => cmd_equivalence(c, false),
        Command::AutoEq(c) => cmd_equivalence(c, true),
        Command::Verify(c) => cmd_verify(c),
    }
}

fn out_path(cli: &Cli) -> Option<&Path> {
    let c = match &cli.command {
        Command::Free(c)
        | Command::Lattice(c)
        | Command::CheckWords(c)
        | Command::GeomEq(c)
        | Command::AutoEq(c)
        | Command::Verify(c) => c,
    };
    c.out.as_deref()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(text, code)| {
        match out_path(&cli) {
            Some(path) => std::fs::write(path, &text)
                .with_context(|| format!("cannot write {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
