//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::barrier::BarrierPoint;
use crate::bounds::{cyclic_ruled_out, zero_one_ruled_out};
use crate::cone::ConeDescriptor;
use crate::encoding::{encode, reconstruct, EncodeParams, EncodedPolytope, RhoVariant};
use crate::error::{Error, Result};
use crate::io::{
    emit, parse, parse_factorization, read_text, write_atomic, CertificateDoc, FactorizationDoc, MapsDoc, PairsDoc,
    RunManifest,
};
use crate::net::{net_cardinality_bound_log2, NetMode, NetSpec};
use crate::pipeline::{factorize, instance_params, run_instance, PipelineOptions};
use crate::polytope::{cyclic_instance, zero_one_ground_set, zero_one_instance, PolytopeInstance};
use crate::recovery::{counterexample_search, recover_linear_maps};
use crate::scaling::{nt_scaling_point, nt_scaling_point_iterative, normalize_factorization, SolverOptions};

#[derive(Parser, Debug)]
#[command(name = "conescale", version, about = "Scaling, encoding and counting tools for conic factorizations")]
struct Cli {
    /// Seed for randomized fallbacks (echoed into manifests).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write a run manifest to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize a factorization and certify the norm bound.
    Normalize(NormalizeArgs),
    /// Nesterov–Todd scaling point of an interior pair.
    NtScale(NtScaleArgs),
    /// Recover the linear maps behind paired sets and their images.
    RecoverMaps(RecoverArgs),
    /// Certify the half second-order cone counterexample.
    Counterexample(CounterexampleArgs),
    /// Lattice net parameters, rounding and enumeration.
    Net(NetArgs),
    /// Compact encoding of a labelled factorization.
    Encode(EncodeArgs),
    /// Reconstruct a point set from an encoding.
    Reconstruct(ReconstructArgs),
    /// Generate a polytope instance.
    #[command(subcommand)]
    Polytope(PolytopeCmd),
    /// Evaluate a counting bound.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Run instance → factorization → encoding → reconstruction.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    /// Cone descriptor; must match the factorization's cone.
    #[arg(long)]
    cone: Option<String>,
    #[arg(long)]
    factorization: PathBuf,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    kkt_tol: f64,
    #[arg(long)]
    blockwise: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the normalized factorization.
    #[arg(long)]
    normalized_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NtScaleArgs {
    /// Cone descriptor: a file or inline JSON.
    #[arg(long)]
    cone: String,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    /// Use Newton's method on every block.
    #[arg(long)]
    iterative: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    #[arg(long = "M", default_value_t = 10.0)]
    m: f64,
    #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-10.0, 10.0])]
    beta_range: Vec<f64>,
    #[arg(long, default_value_t = 4001)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NetArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    eps: f64,
    /// List every lattice point of the net.
    #[arg(long)]
    enumerate: bool,
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
    /// Round this comma-separated point onto the net.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RhoArg {
    #[value(name = "d+1")]
    DPlusOne,
    #[value(name = "n+1")]
    NPlusOne,
}

impl From<RhoArg> for RhoVariant {
    fn from(r: RhoArg) -> Self {
        match r {
            RhoArg::DPlusOne => RhoVariant::DPlusOne,
            RhoArg::NPlusOne => RhoVariant::NPlusOne,
        }
    }
}

#[derive(Args, Debug)]
struct EncodeArgs {
    /// Labelled factorization.
    #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
    factorization: Option<PathBuf>,
    /// Polytope instance; its slack factorization is used.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Bound on ‖f‖_∞ (taken from the instance when omitted).
    #[arg(long = "M")]
    m: Option<f64>,
    /// Normalization constant (√ϑ when omitted).
    #[arg(long)]
    fc: Option<f64>,
    /// Bound on ‖v‖_∞.
    #[arg(long)]
    v_bound: Option<f64>,
    #[arg(long, value_enum, default_value = "d+1")]
    rho_variant: RhoArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    encoded: PathBuf,
    /// JSON list of integer candidate points.
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum PolytopeCmd {
    ZeroOne {
        #[arg(long)]
        d: usize,
        /// Point indices `0,1,3`, a bitmask `0b1011`/`0xb`, or `all`.
        #[arg(long)]
        subset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Cyclic {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        subset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum BoundCmd {
    ZeroOne {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        fc: f64,
        #[arg(long, value_enum, default_value = "d+1")]
        rho_variant: RhoArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Cyclic {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        fc: f64,
        #[arg(long, value_enum, default_value = "d+1")]
        rho_variant: RhoArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConeChoice {
    /// Orthant of the slack factorization, normalized when possible.
    OrthantAuto,
}

#[derive(Subcommand, Debug)]
enum PipelineCmd {
    ZeroOne {
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// `all`, or one subset as for `polytope zero-one`.
        #[arg(long, default_value = "all")]
        subset: String,
        #[arg(long, value_enum, default_value = "orthant-auto")]
        cone: ConeChoice,
        #[arg(long)]
        fc: Option<f64>,
        #[arg(long, value_enum, default_value = "d+1")]
        rho_variant: RhoArg,
        #[arg(long, default_value = "pipeline-out")]
        out_dir: PathBuf,
    },
}

/// Run context: records input and output hashes for the manifest.
struct Ctx {
    manifest: RunManifest,
    manifest_path: Option<PathBuf>,
    start: Instant,
}

impl Ctx {
    fn read(&mut self, name: &str, path: &Path) -> Result<String> {
        let text = read_text(path)?;
        self.manifest.input(name, text.as_bytes());
        Ok(text)
    }

    /// Writes `doc` to `out` atomically, or to stdout.
    fn emit<T: Serialize>(&mut self, name: &str, out: Option<&Path>, doc: &T) -> Result<()> {
        let text = emit(doc);
        self.manifest.output(name, text.as_bytes());
        match out {
            Some(p) => write_atomic(p, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn finish(mut self) -> Result<()> {
        self.manifest.wall_time_s = self.start.elapsed().as_secs_f64();
        if let Some(p) = &self.manifest_path {
            write_atomic(p, emit(&self.manifest).as_bytes())?;
        }
        Ok(())
    }
}

fn parse_vector(s: &str) -> Result<DVector<f64>> {
    let xs: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::schema("vector", format!("{t:?}: {e}"))))
        .collect::<Result<_>>()?;
    Ok(DVector::from_vec(xs))
}

fn load_cone(ctx: &mut Ctx, arg: &str) -> Result<ConeDescriptor> {
    if arg.trim_start().starts_with('{') {
        ctx.manifest.input("cone", arg.as_bytes());
        parse(arg)
    } else {
        let text = ctx.read("cone", Path::new(arg))?;
        parse(&text)
    }
}

/// Parses `all`, a bitmask (`0b…`, `0x…`) or a comma-separated index list.
pub fn parse_subset(s: &str, ground: usize) -> Result<Vec<usize>> {
    let s = s.trim();
    let from_mask = |mask: u128| -> Result<Vec<usize>> {
        if ground < 128 && mask >> ground != 0 {
            return Err(Error::precondition(format!("bitmask has bits beyond {ground} points")));
        }
        Ok((0..ground.min(128)).filter(|i| mask >> i & 1 == 1).collect())
    };
    let bad = |e: std::num::ParseIntError| Error::precondition(format!("subset {s:?}: {e}"));
    if s == "all" {
        return Ok((0..ground).collect());
    }
    if let Some(b) = s.strip_prefix("0b") {
        return from_mask(u128::from_str_radix(b, 2).map_err(bad)?);
    }
    if let Some(h) = s.strip_prefix("0x") {
        return from_mask(u128::from_str_radix(h, 16).map_err(bad)?);
    }
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut idx: Vec<usize> = s.split(',').map(|t| t.trim().parse::<usize>().map_err(bad)).collect::<Result<_>>()?;
    idx.sort_unstable();
    idx.dedup();
    if let Some(&k) = idx.iter().find(|&&k| k >= ground) {
        return Err(Error::precondition(format!("subset index {k} beyond {ground} points")));
    }
    Ok(idx)
}

fn solver_json(o: &SolverOptions) -> serde_json::Value {
    serde_json::to_value(o).expect("options serialize")
}

fn cmd_normalize(ctx: &mut Ctx, a: NormalizeArgs) -> Result<()> {
    let opts = SolverOptions {
        tol: a.tol,
        kkt_tol: a.kkt_tol,
        blockwise: a.blockwise,
        ..SolverOptions::default()
    };
    ctx.manifest.options = json!({ "solver": solver_json(&opts) });
    let text = ctx.read("factorization", &a.factorization)?;
    let fac = parse_factorization(&text)?;
    if let Some(c) = &a.cone {
        if load_cone(ctx, c)? != fac.cone {
            return Err(Error::schema("cone", "the factorization uses a different cone"));
        }
    }
    let (scaled, cert) = normalize_factorization(&fac, &opts)?;
    let doc = CertificateDoc::from_certificate(&cert);
    ctx.emit("certificate", a.out.as_deref(), &doc)?;
    if let Some(p) = &a.normalized_out {
        ctx.emit("normalized", Some(p), &FactorizationDoc::from_factorization(&scaled))?;
    }
    if !doc.holds {
        return Err(Error::Numerical("certificate bounds do not hold".into()));
    }
    Ok(())
}

fn cmd_nt_scale(ctx: &mut Ctx, a: NtScaleArgs) -> Result<()> {
    let cone = load_cone(ctx, &a.cone)?;
    let (x, y) = (parse_vector(&a.a)?, parse_vector(&a.b)?);
    ctx.manifest.options = json!({ "a": a.a, "b": a.b, "iterative": a.iterative });
    let w = if a.iterative {
        nt_scaling_point_iterative(&cone, &x, &y)?
    } else {
        nt_scaling_point(&cone, &x, &y)?
    };
    let r = (BarrierPoint::new(&cone, &w)?.hessian_apply(&x) - &y).norm() / y.norm();
    let doc = json!({ "w": w.as_slice(), "relative_residual": r, "method": if a.iterative { "newton" } else { "closed-form" } });
    ctx.emit("scaling_point", a.out.as_deref(), &doc)
}

fn cmd_recover(ctx: &mut Ctx, a: RecoverArgs) -> Result<()> {
    let text = ctx.read("pairs", &a.pairs)?;
    let doc: PairsDoc = parse(&text)?;
    let [x, xi, y, yi] = doc.sets();
    let maps = recover_linear_maps(&x, &xi, &y, &yi)?;
    ctx.emit("maps", a.out.as_deref(), &MapsDoc::from_maps(&maps))
}

fn cmd_counterexample(ctx: &mut Ctx, a: CounterexampleArgs) -> Result<()> {
    ctx.manifest.options = json!({ "M": a.m, "beta_range": a.beta_range, "grid": a.grid });
    let rec = counterexample_search(a.m, (a.beta_range[0], a.beta_range[1]), a.grid)?;
    ctx.emit("record", a.out.as_deref(), &rec)?;
    if !rec.certified {
        return Err(Error::Numerical("counterexample not certified on the grid".into()));
    }
    Ok(())
}

fn cmd_net(ctx: &mut Ctx, a: NetArgs) -> Result<()> {
    let mode = if a.enumerate { NetMode::Enumerated } else { NetMode::ImplicitLattice };
    ctx.manifest.options = json!({ "n": a.n, "rho": a.rho, "eps": a.eps, "mode": mode, "cap": a.cap });
    let spec = NetSpec::new(a.n, a.rho, a.eps, mode)?;
    let bound_log2 = net_cardinality_bound_log2(a.n, a.rho, a.eps).ok();
    let mut doc = json!({
        "n": a.n,
        "rho": a.rho,
        "eps": a.eps,
        "mode": mode,
        "spacing": spec.spacing(),
        "cardinality_bound_log2": bound_log2,
        "cardinality_bound": bound_log2.map(f64::exp2),
    });
    if a.enumerate {
        let pts = spec.enumerate(a.cap)?;
        doc["size"] = json!(pts.len());
        doc["points"] = json!(pts);
    }
    if let Some(p) = &a.point {
        let u = parse_vector(p)?;
        let idx = spec.round_index(&u)?;
        let r = spec.point(&idx);
        doc["rounded_index"] = json!(idx);
        doc["rounded"] = json!(r.as_slice());
        doc["distance"] = json!((&u - &r).norm());
    }
    ctx.emit("net", a.out.as_deref(), &doc)
}

fn cmd_encode(ctx: &mut Ctx, a: EncodeArgs, seed: u64) -> Result<()> {
    let variant: RhoVariant = a.rho_variant.into();
    let solver = SolverOptions::default();
    let (fac, mut params, path) = if let Some(p) = &a.instance {
        let text = ctx.read("instance", p)?;
        let inst: PolytopeInstance = parse(&text)?;
        let (path, fac, _) = factorize(&inst, &solver)?;
        let opts = PipelineOptions { solver: solver.clone(), rho_variant: variant, f_c: a.fc };
        let params = instance_params(&inst, &fac, &opts)?;
        (fac, params, Some(path))
    } else {
        let p = a.factorization.as_ref().expect("clap requires one input");
        let text = ctx.read("factorization", p)?;
        let fac = parse_factorization(&text)?;
        let m = a.m.ok_or_else(|| Error::precondition("--M is required with --factorization"))?;
        let f_c = a.fc.unwrap_or_else(|| (crate::barrier::theta(&fac.cone).unwrap_or(fac.cone.dim()) as f64).sqrt());
        (fac, EncodeParams::new(m, f_c), None)
    };
    if let Some(m) = a.m {
        params.m = m;
    }
    if let Some(v) = a.v_bound {
        params.v_bound = v;
    }
    params.rho_variant = variant;
    ctx.manifest.options = json!({ "params": params, "factorization_path": path, "solver": solver_json(&solver), "seed": seed });
    let enc = encode(&fac, &params)?;
    ctx.emit("encoded", a.out.as_deref(), &enc)
}

fn cmd_reconstruct(ctx: &mut Ctx, a: ReconstructArgs) -> Result<()> {
    let enc: EncodedPolytope = parse(&ctx.read("encoded", &a.encoded)?)?;
    let cands: Vec<Vec<i64>> = parse(&ctx.read("candidates", &a.candidates)?)?;
    let rec = reconstruct(&enc, &cands)?;
    ctx.manifest.options = json!({ "threshold": rec.tol });
    ctx.emit("reconstruction", a.out.as_deref(), &rec)?;
    if rec.indeterminate() {
        let worst = rec.candidates.iter().map(|c| c.max_violation).fold(0.0, f64::max);
        return Err(Error::Indeterminate { violation: worst });
    }
    Ok(())
}

fn cmd_polytope(ctx: &mut Ctx, c: PolytopeCmd) -> Result<()> {
    let (inst, out) = match c {
        PolytopeCmd::ZeroOne { d, subset, out } => {
            ctx.manifest.options = json!({ "family": "zero-one", "d": d, "subset": subset });
            let ground = zero_one_ground_set(d)?.len();
            (zero_one_instance(d, &parse_subset(&subset, ground)?)?, out)
        }
        PolytopeCmd::Cyclic { d, t, subset, out } => {
            ctx.manifest.options = json!({ "family": "cyclic", "d": d, "t": t, "subset": subset });
            let ground = usize::try_from(t).ok().and_then(|t| t.checked_add(1)).ok_or_else(|| Error::CapExceeded("t too large".into()))?;
            let ks: Vec<u64> = parse_subset(&subset, ground)?.into_iter().map(|k| k as u64).collect();
            (cyclic_instance(d, t, &ks)?, out)
        }
    };
    ctx.emit("instance", out.as_deref(), &inst)
}

fn cmd_bound(ctx: &mut Ctx, c: BoundCmd) -> Result<()> {
    let (report, out) = match c {
        BoundCmd::ZeroOne { d, n, fc, rho_variant, out } => {
            let v: RhoVariant = rho_variant.into();
            ctx.manifest.options = json!({ "family": "zero-one", "d": d, "n": n, "fc": fc, "rho_variant": v });
            (zero_one_ruled_out(d, n, fc, v)?, out)
        }
        BoundCmd::Cyclic { d, t, n, fc, rho_variant, out } => {
            let v: RhoVariant = rho_variant.into();
            ctx.manifest.options = json!({ "family": "cyclic", "d": d, "t": t, "n": n, "fc": fc, "rho_variant": v });
            (cyclic_ruled_out(d, t, n, fc, v)?, out)
        }
    };
    ctx.emit("report", out.as_deref(), &report)
}

#[derive(Serialize)]
struct PipelineEntry {
    subset: Vec<usize>,
    points: Vec<Vec<i64>>,
    path: crate::pipeline::FactorizationPath,
    exact: bool,
    accepted: Vec<Vec<i64>>,
    encoding_sha256: String,
}

fn cmd_pipeline(ctx: &mut Ctx, c: PipelineCmd, seed: u64) -> Result<()> {
    let PipelineCmd::ZeroOne { d, subset, cone: _, fc, rho_variant, out_dir } = c;
    let opts = PipelineOptions { solver: SolverOptions::default(), rho_variant: rho_variant.into(), f_c: fc };
    let options = json!({ "family": "zero-one", "d": d, "subset": subset, "cone": "orthant-auto", "pipeline": opts, "seed": seed });
    ctx.manifest.options = options.clone();
    let ground = zero_one_ground_set(d)?.len();
    let subsets: Vec<Vec<usize>> = if subset == "all" {
        if ground > 16 {
            return Err(Error::CapExceeded(format!("2^{ground} subsets")));
        }
        (0u64..1 << ground).map(|m| (0..ground).filter(|i| m >> i & 1 == 1).collect()).collect()
    } else {
        vec![parse_subset(&subset, ground)?]
    };
    let width = ground.div_ceil(4).max(1);
    let entries: Vec<PipelineEntry> = subsets
        .par_iter()
        .map(|s| -> Result<PipelineEntry> {
            let start = Instant::now();
            let inst = zero_one_instance(d, s)?;
            let run = run_instance(&inst, &opts)?;
            let mask: u64 = s.iter().map(|i| 1u64 << i).sum();
            let dir = out_dir.join(format!("subset-{mask:0width$x}"));
            let mut m = RunManifest::new("pipeline zero-one", json!({ "subset": s, "shared": options }));
            let mut put = |name: &str, text: String| -> Result<String> {
                m.output(name, text.as_bytes());
                write_atomic(&dir.join(format!("{name}.json")), text.as_bytes())?;
                Ok(crate::io::sha256_hex(text.as_bytes()))
            };
            put("instance", emit(&inst))?;
            put("factorization", emit(&FactorizationDoc::from_factorization(&run.factorization)))?;
            if let Some(c) = &run.certificate {
                put("certificate", emit(&CertificateDoc::from_certificate(c)))?;
            }
            let enc_hash = put("encoded", emit(&run.encoded))?;
            put("reconstruction", emit(&run.reconstruction))?;
            m.options["path"] = json!(run.path);
            m.wall_time_s = start.elapsed().as_secs_f64();
            write_atomic(&dir.join("manifest.json"), emit(&m).as_bytes())?;
            Ok(PipelineEntry {
                subset: s.clone(),
                points: inst.v.clone(),
                path: run.path,
                exact: run.exact,
                accepted: run.reconstruction.accepted,
                encoding_sha256: enc_hash,
            })
        })
        .collect::<Result<_>>()?;
    let mut keys: Vec<&str> = entries.iter().map(|e| e.encoding_sha256.as_str()).collect();
    keys.sort_unstable();
    keys.dedup();
    let all_exact = entries.iter().all(|e| e.exact);
    let summary = json!({
        "d": d,
        "instances": entries.len(),
        "distinct_encodings": keys.len(),
        "all_exact": all_exact,
        "entries": entries,
    });
    let text = emit(&summary);
    write_atomic(&out_dir.join("summary.json"), text.as_bytes())?;
    ctx.manifest.output("summary", text.as_bytes());
    print!("{text}");
    if !all_exact {
        return Err(Error::Numerical("some reconstructions differ from V".into()));
    }
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var("CONESCALE_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool already exists, which keeps its size.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let name = match &cli.command {
        Command::Normalize(_) => "normalize",
        Command::NtScale(_) => "nt-scale",
        Command::RecoverMaps(_) => "recover-maps",
        Command::Counterexample(_) => "counterexample",
        Command::Net(_) => "net",
        Command::Encode(_) => "encode",
        Command::Reconstruct(_) => "reconstruct",
        Command::Polytope(_) => "polytope",
        Command::Bound(_) => "bound",
        Command::Pipeline(_) => "pipeline",
    };
    let mut ctx = Ctx {
        manifest: RunManifest::new(name, json!({})),
        manifest_path: cli.manifest.clone(),
        start: Instant::now(),
    };
    let seed = cli.seed;
    let result = match cli.command {
        Command::Normalize(a) => cmd_normalize(&mut ctx, a),
        Command::NtScale(a) => cmd_nt_scale(&mut ctx, a),
        Command::RecoverMaps(a) => cmd_recover(&mut ctx, a),
        Command::Counterexample(a) => cmd_counterexample(&mut ctx, a),
        Command::Net(a) => cmd_net(&mut ctx, a),
        Command::Encode(a) => cmd_encode(&mut ctx, a, seed),
        Command::Reconstruct(a) => cmd_reconstruct(&mut ctx, a),
        Command::Polytope(c) => cmd_polytope(&mut ctx, c),
        Command::Bound(c) => cmd_bound(&mut ctx, c),
        Command::Pipeline(c) => cmd_pipeline(&mut ctx, c, seed),
    };
    if let serde_json::Value::Object(o) = &mut ctx.manifest.options {
        o.insert("seed".into(), json!(seed));
    }
    ctx.finish()?;
    result
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_threads();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_syntax() {
        assert_eq!(parse_subset("0,1,3", 4).unwrap(), vec![0, 1, 3]);
        assert_eq!(parse_subset("0b1011", 4).unwrap(), vec![0, 1, 3]);
        assert_eq!(parse_subset("0xb", 4).unwrap(), vec![0, 1, 3]);
        assert_eq!(parse_subset("all", 3).unwrap(), vec![0, 1, 2]);
        assert!(parse_subset("", 4).unwrap().is_empty());
        assert!(parse_subset("4", 4).is_err());
        assert!(parse_subset("0b10000", 4).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
