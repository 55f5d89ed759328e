//! `polyban`: exact rational polyhedral Banach spaces from the command line.
//!
//! Exit codes: 0 on success, 1 on a domain error (its name is printed on
//! stderr), 2 on a usage error.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polyban_core::amalgam::amalgamate;
use polyban_core::correction::eps_pushout;
use polyban_core::exactgeom::rational::{fmt_rat_full, fmt_vec};
use polyban_core::exactgeom::DimCapGuard;
use polyban_core::fraisse::{back_and_forth, build_generic, embed_universal, truncation_chain, verify_state, TaskStatus};
use polyban_core::maps::{check_chain, check_eps_isometry, check_isometry, op_norm, rationalize_arrow};
use polyban_core::spaces::monotone_violation;
use polyban_core::{
    emit_bundle, verify_bundle, Bundle, CertDoc, Error, FraisseConfig, FraisseState, RoundTrip,
};

use io::{load_ball, load_map, load_space, load_state, output, rat_arg, read_bundle, usage, vec_arg, CliError, CliResult};

#[derive(Parser)]
#[command(name = "polyban", version, about = "Exact rational polyhedral Banach spaces")]
struct Cli {
    /// Ambient dimension cap for polytope conversion.
    #[arg(long, global = true, default_value_t = 8)]
    max_dim: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect and transform spaces (gallery ids or space bundles).
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Operator norms, isometry checks and rationalization of maps.
    #[command(subcommand)]
    Map(MapCmd),
    /// Projection chains.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Amalgamate X and Y over their common initial segment of dimension N.
    Amalgamate {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Dimension of the common segment.
        #[arg(long, conflicts_with = "z")]
        n: Option<usize>,
        /// The common space itself.
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correction pushout of an ε-isometry.
    PushoutEps {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build, resume and check generic sequences.
    #[command(subcommand)]
    Fraisse(FraisseCmd),
    /// Embed the truncation chain of a space into a built sequence.
    Embed {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        steps: Option<usize>,
        /// Trace bundle (it embeds the extended state).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-stage back-and-forth between two built sequences.
    Backforth {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        stage: usize,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certificates.
    #[command(subcommand)]
    Cert(CertCmd),
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Check that a space is a rational ball in monotone position.
    Validate { space: String },
    /// Print a space as a bundle.
    Show {
        space: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact norm of a vector.
    Norm {
        #[arg(long)]
        space: String,
        /// Comma-separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// The first K coordinates.
    Truncate {
        #[arg(long)]
        space: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MapArgs {
    /// Map bundle path, `id`, `zero`, `incl`, or rows like "1,0;0,1".
    #[arg(long, allow_hyphen_values = true)]
    map: String,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
}

#[derive(Subcommand)]
enum MapCmd {
    /// Exact operator norm.
    Opnorm {
        #[command(flatten)]
        map: MapArgs,
    },
    /// Certify an isometric embedding.
    CheckIsometry {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify an ε-isometry.
    CheckEps {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Round entries to bounded denominators within an error budget.
    Rationalize {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        denom: u64,
        #[arg(long)]
        budget: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ChainCmd {
    /// Check a chain bundle against its ambient ball.
    Check { chain: PathBuf },
}

#[derive(Subcommand)]
enum FraisseCmd {
    /// Run a fresh generic sequence for a number of steps.
    Build {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        denom0: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Continue a saved build; overwrites the state unless --out is given.
    Resume {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize stages and tasks of a saved state.
    Status {
        #[arg(long)]
        state: PathBuf,
    },
    /// Re-verify every satisfied task of a saved state.
    Check {
        #[arg(long)]
        state: PathBuf,
    },
}

#[derive(Subcommand)]
enum CertCmd {
    /// Re-check every certificate in a bundle.
    Verify { bundle: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let _cap = DimCapGuard::new(cli.max_dim);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Space(c) => space(c),
        Cmd::Map(c) => map(c),
        Cmd::Chain(ChainCmd::Check { chain }) => match read_bundle(&chain)? {
            Bundle::Chain { ambient, chain } => {
                check_chain(&chain, &ambient)?;
                println!("ok: chain of {} projections from rank {}", chain.len(), chain.start_rank);
                Ok(())
            }
            other => usage(format!("expected a chain bundle, found {}", other.kind())),
        },
        Cmd::Amalgamate { x, y, n, z, out } => {
            let (x, y) = (load_space(&x)?, load_space(&y)?);
            let n = match (n, z) {
                (Some(n), None) => n,
                (None, Some(z)) => {
                    let z = load_space(&z)?;
                    if z.dim() > x.dim() || x.truncate(z.dim())? != z {
                        return Err(Error::ZMismatch("Z is not the initial segment of X".into()).into());
                    }
                    z.dim()
                }
                _ => return usage("give exactly one of --n and --z"),
            };
            let p = amalgamate(n, &x, &y)?;
            eprintln!("dim W = {} = {} + {} - {}", p.w.dim(), x.dim(), y.dim(), n);
            output(out.as_deref(), &emit_bundle(&Bundle::Pushout(p)))
        }
        Cmd::PushoutEps { map, eps, out } => {
            let f = load_map(&map.map, map.from.as_deref(), map.to.as_deref())?;
            let r = eps_pushout(&f, &rat_arg(&eps)?)?;
            output(out.as_deref(), &emit_bundle(&Bundle::Correction(r)))
        }
        Cmd::Fraisse(c) => fraisse(c, cli.max_dim),
        Cmd::Embed { state, target, steps, out } => {
            let st = load_state(&state)?;
            let _cap = DimCapGuard::new(st.config.max_dim);
            let x = load_space(&target)?;
            let chain = truncation_chain(&x)?;
            let n = steps.unwrap_or(x.dim());
            if n > x.dim() {
                return usage(format!("--steps {n} exceeds the target dimension {}", x.dim()));
            }
            let (trace, ext) = embed_universal(&st, &chain, n)?;
            eprintln!(
                "embedded {} steps into stage {} (dim {}), final eps {}",
                n,
                trace.ks[n],
                ext.stage(trace.ks[n])?.dim(),
                fmt_rat_full(&trace.final_eps)
            );
            output(out.as_deref(), &emit_bundle(&Bundle::Trace { state: ext, trace }))
        }
        Cmd::Backforth { a, b, stage, eps, out } => {
            let (sa, sb) = (load_state(&a)?, load_state(&b)?);
            let _cap = DimCapGuard::new(sa.config.max_dim.max(sb.config.max_dim));
            let eps = rat_arg(&eps)?;
            let r = back_and_forth(&sa, &sb, stage, &eps)?;
            eprintln!(
                "u: A_{stage} -> B_{}, v: B_{} -> A_{}, deviation {}",
                r.m_b,
                r.m_b,
                r.m_a,
                fmt_rat_full(&r.deviation)
            );
            output(out.as_deref(), &emit_bundle(&Bundle::Cert(CertDoc::RoundTrip(RoundTrip::from(&r)))))
        }
        Cmd::Cert(CertCmd::Verify { bundle }) => {
            let b = read_bundle(&bundle)?;
            verify_bundle(&b)?;
            println!("ok: {} bundle verified", b.kind());
            Ok(())
        }
    }
}

fn space(c: SpaceCmd) -> CliResult<()> {
    match c {
        SpaceCmd::Validate { space } => {
            let ball = load_ball(&space)?;
            if let Some((k, v)) = monotone_violation(&ball) {
                return Err(Error::NotMonotone { k, vertex: fmt_vec(&v) }.into());
            }
            println!(
                "ok: monotone rational ball, dim {}, {} vertex pairs, {} facet pairs",
                ball.dim(),
                ball.vertices().len(),
                ball.functionals().len()
            );
            Ok(())
        }
        SpaceCmd::Show { space, out } => output(out.as_deref(), &emit_bundle(&Bundle::Space(load_ball(&space)?))),
        SpaceCmd::Norm { space, x } => {
            let ball = load_ball(&space)?;
            println!("{}", fmt_rat_full(&ball.gauge(&vec_arg(&x)?)?));
            Ok(())
        }
        SpaceCmd::Truncate { space, k, out } => {
            let t = load_space(&space)?.truncate(k)?;
            output(out.as_deref(), &emit_bundle(&Bundle::Space(t.into_ball())))
        }
    }
}

fn map(c: MapCmd) -> CliResult<()> {
    let load = |m: &MapArgs| load_map(&m.map, m.from.as_deref(), m.to.as_deref());
    match c {
        MapCmd::Opnorm { map } => {
            println!("{}", fmt_rat_full(&op_norm(&load(&map)?)));
            Ok(())
        }
        MapCmd::CheckIsometry { map, out } => {
            let t = load(&map)?;
            let cert = check_isometry(&t)?;
            eprintln!("ok: isometry");
            match out {
                Some(p) => io::write_atomic(&p, &emit_bundle(&Bundle::Cert(CertDoc::Isometry { map: t, cert }))),
                None => Ok(()),
            }
        }
        MapCmd::CheckEps { map, eps, out } => {
            let t = load(&map)?;
            let cert = check_eps_isometry(&t, &rat_arg(&eps)?)?;
            eprintln!("ok: {}-isometry", fmt_rat_full(&cert.eps));
            match out {
                Some(p) => io::write_atomic(&p, &emit_bundle(&Bundle::Cert(CertDoc::EpsIsometry { map: t, cert }))),
                None => Ok(()),
            }
        }
        MapCmd::Rationalize { map, denom, budget, out } => {
            let t = load(&map)?;
            let r = rationalize_arrow(&t, denom, &rat_arg(&budget)?)?;
            output(out.as_deref(), &emit_bundle(&Bundle::Map(r)))
        }
    }
}

fn status_line(st: &FraisseState) -> String {
    let (mut sat, mut def, mut pend) = (0, 0, 0);
    for t in &st.tasks {
        match t.status {
            TaskStatus::Satisfied { .. } => sat += 1,
            TaskStatus::Deferred(_) => def += 1,
            TaskStatus::Pending => pend += 1,
        }
    }
    let dims: Vec<String> = st.stages.iter().map(|s| s.dim().to_string()).collect();
    format!(
        "seed {} steps {} cursor {}\nstages {} dims [{}]\ntasks {} satisfied {} deferred {} pending {}",
        st.config.seed,
        st.steps,
        st.cursor,
        st.stages.len(),
        dims.join(","),
        st.tasks.len(),
        sat,
        def,
        pend
    )
}

fn fraisse(c: FraisseCmd, max_dim: usize) -> CliResult<()> {
    match c {
        FraisseCmd::Build { seed, steps, denom0, out } => {
            if denom0 == 0 {
                return usage("--denom0 must be positive");
            }
            let mut config = FraisseConfig::new(seed);
            config.max_dim = max_dim;
            config.denom0 = denom0;
            let st = build_generic(config, steps)?;
            eprintln!("{}", status_line(&st));
            io::write_atomic(&out, &emit_bundle(&Bundle::State(st)))
        }
        FraisseCmd::Resume { state, steps, out } => {
            let mut st = load_state(&state)?;
            let _cap = DimCapGuard::new(st.config.max_dim);
            st.run(steps)?;
            eprintln!("{}", status_line(&st));
            io::write_atomic(out.as_ref().unwrap_or(&state), &emit_bundle(&Bundle::State(st)))
        }
        FraisseCmd::Status { state } => {
            println!("{}", status_line(&load_state(&state)?));
            Ok(())
        }
        FraisseCmd::Check { state } => {
            let st = load_state(&state)?;
            let _cap = DimCapGuard::new(st.config.max_dim);
            verify_state(&st)?;
            let sat = st.tasks.iter().filter(|t| matches!(t.status, TaskStatus::Satisfied { .. })).count();
            println!("ok: {sat} satisfied tasks re-verified");
            Ok(())
        }
    }
}
