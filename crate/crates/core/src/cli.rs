//! The `woven` command line.
//!
//! Every command prints one JSON report with the keys `command`, `inputs`,
//! `result`, `seed` and `timing` on standard output and a short summary on
//! standard error. Exit codes: 0 affirmative, 1 negative, 2 usage or parse
//! error, 3 enumeration cap exceeded.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::certificates::{
    cert_admissible, cert_approx_dual_weaving, cert_canonical_dual_woven, cert_dual_weaving, cert_equal_norm_parseval,
    cert_invertible_operator, cert_perturbation, cert_two_operator, cert_two_operator_canonical,
    paulsen_distance_bound, paulsen_threshold, Certificate, PerturbationMode, RieszPartOperator,
};
use crate::duality::{
    alternate_dual_family, approximate_dual_defect, approximate_dual_family, canonical_dual, dual_residual,
    excess_and_kernel, frame_operator_inverse, riesz_decompose, BesselSequence,
};
use crate::error::{FrameError, Result};
use crate::frame::Frame;
use crate::generators::{example_family, harmonic_frame, random_frame};
use crate::io;
use crate::linalg::{self, CMatrix, Complex64};
use crate::sweep::soundness_sweep;
use crate::weaving::{
    min_partition_distance, subspace_distance, weakly_woven, woven_oracle_with_cap, DEFAULT_ENUMERATION_CAP,
};

pub const EXIT_AFFIRMATIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

/// Environment variable overriding the enumeration cap.
pub const CAP_ENV: &str = "FW_CAP";

#[derive(Parser, Debug)]
#[command(name = "woven", version, about = "Frames, duals and woven families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Write a generated frame file.
    #[command(subcommand)]
    Gen(GenKind),
    /// Optimal frame bounds.
    Bounds { file: PathBuf },
    /// Frame, Riesz, tight, Parseval and near-equal-norm classification.
    Classify { file: PathBuf },
    /// Canonical, alternate or approximate duals.
    Dual(DualArgs),
    /// Excess, synthesis kernel and a Riesz/redundant split.
    Excess { file: PathBuf },
    /// Decide wovenness by enumerating every weaving.
    WeaveOracle {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Distance between spans, or the smallest distance over all partitions.
    Distance {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long)]
        min_partition: bool,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Evaluate a sufficient condition for wovenness.
    Certify(CertifyArgs),
    /// Cross-check every certificate kind against the oracle on random instances.
    SoundnessSweep {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Include every instance in the report.
        #[arg(long)]
        cases: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Truncated example frame with its null Bessel companion.
    Example {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the companion sequence U.
        #[arg(long)]
        u_out: Option<PathBuf>,
    },
    /// Random frame with prescribed optimal bounds.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1.0)]
        lower: f64,
        #[arg(long, default_value_t = 1.0)]
        upper: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equal-norm Parseval frame from rows of the DFT matrix.
    Harmonic {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct DualArgs {
    file: PathBuf,
    /// Null Bessel sequence U for the alternate duals S^-1 phi + alpha U.
    #[arg(long, conflicts_with = "approx", requires = "alpha")]
    alternate: Option<PathBuf>,
    /// Approximate duals T* S^-1 phi + alpha theta* delta.
    #[arg(long, requires = "alpha")]
    approx: bool,
    #[arg(long)]
    alpha: Option<f64>,
    /// T = t_scale * identity.
    #[arg(long, conflicts_with = "t")]
    t_scale: Option<f64>,
    /// T from a matrix file.
    #[arg(long)]
    t: Option<PathBuf>,
    /// theta is the analysis operator of this sequence (default: zero).
    #[arg(long)]
    theta: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Invertible,
    Dual,
    ApproxDual,
    Canonical,
    TwoOp,
    Admissible,
    Perturb,
    Paulsen,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// phi, then psi where the kind needs a second frame.
    files: Vec<PathBuf>,
    /// Operator matrix file for T.
    #[arg(long)]
    t: Option<PathBuf>,
    /// T = t_scale * identity.
    #[arg(long, conflicts_with = "t")]
    t_scale: Option<f64>,
    /// Operator matrix file applied to phi.
    #[arg(long)]
    t1: Option<PathBuf>,
    /// Operator matrix file applied to psi.
    #[arg(long)]
    t2: Option<PathBuf>,
    /// T = exp(i phase) * identity.
    #[arg(long, conflicts_with_all = ["t", "t_scale"])]
    phase: Option<f64>,
    /// Bessel sequence file with null synthesis against phi.
    #[arg(long)]
    u: Option<PathBuf>,
    /// Bessel sequence file whose analysis operator is theta.
    #[arg(long)]
    theta: Option<PathBuf>,
    /// Family parameter, or the Paulsen fraction of the lower bound.
    #[arg(long)]
    alpha: Option<f64>,
    /// Use the Riesz part's own frame operator in the small-redundancy test.
    #[arg(long)]
    riesz_part: bool,
    /// `auto` or a number; a number switches to probe mode.
    #[arg(long, default_value = "auto")]
    mu: String,
    /// Coefficient of the phi term in the probed bound.
    #[arg(long, default_value_t = 0.0)]
    lambda1: f64,
    /// Coefficient of the psi term in the probed bound.
    #[arg(long, default_value_t = 0.0)]
    lambda2: f64,
    /// Random unit vectors tried in probe mode.
    #[arg(long, default_value_t = 1000)]
    probes: usize,
    /// Seed for the probe vectors.
    #[arg(long)]
    seed: Option<u64>,
    /// Nearly equal-norm Parseval parameter of phi.
    #[arg(long)]
    eps: Option<f64>,
    /// Threshold only: ambient dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Threshold only: number of vectors.
    #[arg(long)]
    size: Option<usize>,
    /// Threshold only: lower frame bound of phi.
    #[arg(long)]
    lower: Option<f64>,
    /// Also run the oracle on the certified pair.
    #[arg(long)]
    check: bool,
    /// Enumeration cap; overrides FW_CAP.
    #[arg(long)]
    cap: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Inputs {
    pub files: Vec<InputFile>,
    /// Hash of the arguments and every input file.
    pub digest: String,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub inputs: Inputs,
    pub result: Value,
    pub seed: Option<u64>,
    pub timing: Timing,
}

impl Report {
    /// The report without timing, for comparisons.
    pub fn stable_json(&self) -> String {
        serde_json::to_string(&json!({
            "command": self.command,
            "inputs": self.inputs,
            "result": self.result,
            "seed": self.seed,
        }))
        .expect("report serializes")
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Report>,
    pub stdout: String,
    pub stderr: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct Ctx {
    files: Vec<InputFile>,
    cap: u64,
    seed: Option<u64>,
    summary: Vec<String>,
}

impl Ctx {
    fn text(&mut self, path: &Path) -> Result<String> {
        let text = io::read_text(path)?;
        self.files.push(InputFile {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(text.as_bytes())),
        });
        Ok(text)
    }

    fn frame(&mut self, path: &Path) -> Result<Frame> {
        let text = self.text(path)?;
        io::parse_frame(&text).map_err(|e| with_path(e, path))
    }

    fn bessel(&mut self, path: &Path) -> Result<BesselSequence> {
        let text = self.text(path)?;
        io::parse_bessel(&text).map_err(|e| with_path(e, path))
    }

    fn matrix(&mut self, path: &Path) -> Result<CMatrix> {
        let text = self.text(path)?;
        io::parse_matrix(&text).map_err(|e| with_path(e, path))
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

fn with_path(e: FrameError, path: &Path) -> FrameError {
    match e {
        FrameError::Parse(m) => FrameError::Parse(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Finite numbers as JSON numbers, infinities as the strings `"inf"`/`"-inf"`, NaN as null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn frame_json(frame: &Frame) -> Value {
    serde_json::from_str(&io::frame_to_string(frame)).expect("frame files are valid JSON")
}

fn bessel_json(seq: &BesselSequence) -> Value {
    serde_json::from_str(&io::bessel_to_string(seq)).expect("frame files are valid JSON")
}

fn certificate_json(cert: &Certificate) -> Value {
    let margins: Vec<Value> = cert
        .margins
        .iter()
        .map(|m| {
            json!({
                "inequality": m.inequality,
                "lhs": num(m.lhs),
                "rhs": num(m.rhs),
                "slack": num(m.slack()),
                "satisfied": m.satisfied(),
            })
        })
        .collect();
    let diagnostics: Map<String, Value> = cert.diagnostics.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    json!({
        "kind": cert.kind,
        "holds": cert.holds,
        "margins": margins,
        "implied_lower": cert.implied_lower.map(num),
        "message": cert.message,
        "diagnostics": diagnostics,
        "falsification_only": cert.falsification_only,
    })
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_AFFIRMATIVE
    } else {
        EXIT_NEGATIVE
    }
}

fn exit_code(e: &FrameError) -> i32 {
    match e {
        FrameError::EnumerationTooLarge { .. } => EXIT_CAP,
        FrameError::Parse(_)
        | FrameError::DimensionMismatch { .. }
        | FrameError::NonFiniteEntry { .. }
        | FrameError::EmptyFamily
        | FrameError::ShapeMismatch(_)
        | FrameError::InvalidArgument(_)
        | FrameError::InvalidAlpha(_)
        | FrameError::InfeasibleShape(_)
        | FrameError::SpecInconsistent(_) => EXIT_USAGE,
        _ => EXIT_NEGATIVE,
    }
}

fn error_name(e: &FrameError) -> &'static str {
    match e {
        FrameError::DimensionMismatch { .. } => "DimensionMismatch",
        FrameError::NonFiniteEntry { .. } => "NonFiniteEntry",
        FrameError::EmptyFamily => "EmptyFamily",
        FrameError::NotAFrame { .. } => "NotAFrame",
        FrameError::ZeroExcess => "ZeroExcess",
        FrameError::HypothesisFailed(_) => "HypothesisFailed",
        FrameError::ZeroDirection => "ZeroDirection",
        FrameError::ShapeMismatch(_) => "ShapeMismatch",
        FrameError::EnumerationTooLarge { .. } => "EnumerationTooLarge",
        FrameError::NotRieszBasis(_) => "NotRieszBasis",
        FrameError::SingularOperator(_) => "SingularOperator",
        FrameError::DirectionNotNull(_) => "DirectionNotNull",
        FrameError::ThetaNotNull(_) => "ThetaNotNull",
        FrameError::NotWovenInput => "NotWovenInput",
        FrameError::SpecInconsistent(_) => "SpecInconsistent",
        FrameError::InvalidAlpha(_) => "InvalidAlpha",
        FrameError::InfeasibleShape(_) => "InfeasibleShape",
        FrameError::InvalidArgument(_) => "InvalidArgument",
        FrameError::Parse(_) => "ParseError",
    }
}

fn require<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.ok_or_else(|| FrameError::InvalidArgument(format!("{kind} needs {flag}")))
}

fn frames_arg(ctx: &mut Ctx, files: &[PathBuf], count: usize, kind: &str) -> Result<Vec<Frame>> {
    if files.len() != count {
        return Err(FrameError::InvalidArgument(format!(
            "{kind} takes {count} frame file(s), got {}",
            files.len()
        )));
    }
    files.iter().map(|p| ctx.frame(p)).collect()
}

fn operator_arg(
    ctx: &mut Ctx,
    file: Option<&PathBuf>,
    scale: Option<f64>,
    phase: Option<f64>,
    dim: usize,
) -> Result<Option<CMatrix>> {
    if let Some(path) = file {
        return ctx.matrix(path).map(Some);
    }
    if let Some(s) = scale {
        return Ok(Some(linalg::identity(dim).scale(s)));
    }
    Ok(phase.map(|p| linalg::identity(dim) * Complex64::from_polar(1.0, p)))
}

fn theta_arg(ctx: &mut Ctx, file: Option<&PathBuf>, phi: &Frame) -> Result<CMatrix> {
    match file {
        Some(path) => Ok(ctx.bessel(path)?.analysis()),
        None => Ok(CMatrix::zeros(phi.len(), phi.dim())),
    }
}

fn write_or_embed(out: Option<&PathBuf>, text: String, value: Value) -> Result<Value> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| FrameError::InvalidArgument(format!("{}: {e}", path.display())))?;
            Ok(json!(path.display().to_string()))
        }
        None => Ok(value),
    }
}

fn gen(ctx: &mut Ctx, kind: &GenKind) -> Result<(i32, Value)> {
    match kind {
        GenKind::Example { dim, out, u_out } => {
            if *dim == 0 {
                return Err(FrameError::InvalidArgument("--dim must be positive".into()));
            }
            let (phi, u) = example_family(*dim);
            ctx.say(format!("example frame: dim {}, {} vectors", phi.dim(), phi.len()));
            Ok((
                EXIT_AFFIRMATIVE,
                json!({
                    "frame": write_or_embed(out.as_ref(), io::frame_to_string(&phi), frame_json(&phi))?,
                    "u": write_or_embed(u_out.as_ref(), io::bessel_to_string(&u), bessel_json(&u))?,
                }),
            ))
        }
        GenKind::Random {
            dim,
            size,
            lower,
            upper,
            seed,
            out,
        } => {
            ctx.seed = Some(*seed);
            let phi = random_frame(*dim, *size, (*lower, *upper), *seed)?;
            ctx.say(format!(
                "random frame: dim {dim}, {size} vectors, bounds ({lower}, {upper})"
            ));
            Ok((
                EXIT_AFFIRMATIVE,
                json!({ "frame": write_or_embed(out.as_ref(), io::frame_to_string(&phi), frame_json(&phi))? }),
            ))
        }
        GenKind::Harmonic { dim, size, out } => {
            let phi = harmonic_frame(*dim, *size)?;
            ctx.say(format!("harmonic frame: dim {dim}, {size} vectors"));
            Ok((
                EXIT_AFFIRMATIVE,
                json!({ "frame": write_or_embed(out.as_ref(), io::frame_to_string(&phi), frame_json(&phi))? }),
            ))
        }
    }
}

fn bounds(ctx: &mut Ctx, file: &Path) -> Result<(i32, Value)> {
    let phi = ctx.frame(file)?;
    let b = phi.optimal_bounds();
    let is_frame = phi.is_frame();
    ctx.say(format!(
        "lower = {:.12e}, upper = {:.12e}, frame: {is_frame}",
        b.lower, b.upper
    ));
    Ok((
        verdict(is_frame),
        json!({ "lower": b.lower, "upper": b.upper, "optimal": b.optimal, "is_frame": is_frame }),
    ))
}

fn classify(ctx: &mut Ctx, file: &Path) -> Result<(i32, Value)> {
    let phi = ctx.frame(file)?;
    let class = phi.classify();
    ctx.say(format!(
        "frame: {}, riesz basis: {}, parseval: {}, tight constant: {:?}",
        class.is_frame, class.is_riesz_basis, class.is_parseval, class.tight_constant
    ));
    Ok((
        verdict(class.is_frame),
        serde_json::to_value(&class).expect("classification serializes"),
    ))
}

fn dual(ctx: &mut Ctx, args: &DualArgs) -> Result<(i32, Value)> {
    let phi = ctx.frame(&args.file)?;
    if let Some(u_path) = &args.alternate {
        let u = ctx.bessel(u_path)?;
        let alpha = require(args.alpha, "--alpha", "--alternate")?;
        let family = alternate_dual_family(&phi, &u)?;
        let member = family.member(alpha);
        let residual = dual_residual(&phi, &member)?;
        let cert = cert_dual_weaving(&phi, &u, alpha)?;
        let in_range = alpha > 0.0 && alpha < family.epsilon_star;
        let is_dual = residual <= phi.tol();
        ctx.say(format!(
            "epsilon* = {:.12e}, alpha = {alpha}, dual residual = {residual:.3e}",
            family.epsilon_star
        ));
        return Ok((
            verdict(in_range && is_dual),
            json!({
                "mode": "alternate",
                "alpha": alpha,
                "epsilon_star": num(family.epsilon_star),
                "alpha_in_range": in_range,
                "dual_residual": residual,
                "is_dual": is_dual,
                "certificate": certificate_json(&cert),
                "dual": frame_json(&member),
            }),
        ));
    }
    if args.approx {
        let alpha = require(args.alpha, "--alpha", "--approx")?;
        let t = operator_arg(ctx, args.t.as_ref(), args.t_scale, None, phi.dim())?
            .unwrap_or_else(|| linalg::identity(phi.dim()));
        let theta = theta_arg(ctx, args.theta.as_ref(), &phi)?;
        let family = approximate_dual_family(&phi, &t, &theta)?;
        let member = family.member(alpha);
        let defect = approximate_dual_defect(&phi, &member)?;
        let cert = cert_approx_dual_weaving(&phi, &t, &theta, alpha)?;
        let in_range = alpha >= 0.0 && alpha < family.epsilon_star;
        ctx.say(format!(
            "epsilon* = {:.12e}, alpha = {alpha}, |I - T_psi T_phi*| = {defect:.6e}",
            family.epsilon_star
        ));
        return Ok((
            verdict(in_range && defect < 1.0),
            json!({
                "mode": "approximate",
                "alpha": alpha,
                "epsilon_star": num(family.epsilon_star),
                "alpha_in_range": in_range,
                "approximate_dual_defect": defect,
                "is_approximate_dual": defect < 1.0,
                "certificate": certificate_json(&cert),
                "dual": frame_json(&member),
            }),
        ));
    }
    let psi = canonical_dual(&phi)?;
    let residual = dual_residual(&phi, &psi)?;
    ctx.say(format!("canonical dual, residual {residual:.3e}"));
    Ok((
        verdict(residual <= phi.tol()),
        json!({ "mode": "canonical", "dual_residual": residual, "is_dual": residual <= phi.tol(), "dual": frame_json(&psi) }),
    ))
}

fn excess(ctx: &mut Ctx, file: &Path) -> Result<(i32, Value)> {
    let phi = ctx.frame(file)?;
    let ex = excess_and_kernel(&phi);
    let kernel: Vec<Value> = ex
        .kernel_vectors()
        .iter()
        .map(|v| json!(v.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>()))
        .collect();
    let split = if phi.is_frame() {
        let s = riesz_decompose(&phi)?;
        json!({ "riesz_indices": one_based(&s.riesz_indices), "redundant_indices": one_based(&s.redundant_indices) })
    } else {
        Value::Null
    };
    ctx.say(format!("excess = {}", ex.excess));
    Ok((
        EXIT_AFFIRMATIVE,
        json!({ "excess": ex.excess, "kernel_basis": kernel, "split": split }),
    ))
}

fn weave_oracle(ctx: &mut Ctx, files: &[PathBuf]) -> Result<(i32, Value)> {
    let frames: Vec<Frame> = files.iter().map(|p| ctx.frame(p)).collect::<Result<_>>()?;
    let tol = frames[0].tol();
    let report = woven_oracle_with_cap(&frames, tol, ctx.cap)?;
    let spanning = weakly_woven(&frames, tol, ctx.cap)?;
    ctx.say(format!(
        "woven: {}, universal bounds ({:.12e}, {:.12e}), worst assignment {:?}",
        report.is_woven,
        report.universal_lower,
        report.universal_upper,
        report.worst_assignment.one_based()
    ));
    Ok((
        verdict(report.is_woven),
        json!({
            "is_woven": report.is_woven,
            "universal_lower": report.universal_lower,
            "universal_upper": report.universal_upper,
            "worst_assignment": report.worst_assignment.one_based(),
            "assignments_checked": report.assignments_checked,
            "all_weavings_span": spanning.all_span,
        }),
    ))
}

fn distance(ctx: &mut Ctx, file1: &Path, file2: &Path, min_partition: bool) -> Result<(i32, Value)> {
    let phi = ctx.frame(file1)?;
    let psi = ctx.frame(file2)?;
    if min_partition {
        let d = min_partition_distance(&phi, &psi, ctx.cap)?;
        let positive = d.min_d > phi.tol().sqrt();
        ctx.say(format!(
            "min over partitions d = {:.6e} at J = {:?}",
            d.min_d,
            one_based(&d.argmin)
        ));
        return Ok((
            verdict(positive),
            json!({
                "min_d": num(d.min_d),
                "argmin_j": one_based(&d.argmin),
                "assignment": d.assignment.one_based(),
                "partitions_checked": d.partitions_checked,
            }),
        ));
    }
    let d = subspace_distance(phi.synthesis(), psi.synthesis(), phi.tol())?;
    ctx.say(format!("d = {:.6e}", d.d));
    Ok((
        verdict(d.d > phi.tol().sqrt()),
        json!({ "d_w1_of_w2": num(d.d_w1_of_w2), "d_w2_of_w1": num(d.d_w2_of_w1), "d": num(d.d) }),
    ))
}

fn certify(ctx: &mut Ctx, args: &CertifyArgs) -> Result<(i32, Value)> {
    let kind_name = format!("{:?}", args.kind);
    let (cert, pair): (Certificate, Option<[Frame; 2]>) = match args.kind {
        Kind::Invertible => {
            let phi = frames_arg(ctx, &args.files, 1, "invertible")?.remove(0);
            let t = operator_arg(ctx, args.t.as_ref(), args.t_scale, args.phase, phi.dim())?;
            let t = require(t, "--t, --t-scale or --phase", "invertible")?;
            let cert = cert_invertible_operator(&phi, &t)?;
            let image = phi.apply_operator(&t)?;
            (cert, Some([phi, image]))
        }
        Kind::Dual => {
            let phi = frames_arg(ctx, &args.files, 1, "dual")?.remove(0);
            let u = ctx.bessel(require(args.u.as_ref(), "--u", "dual")?)?;
            let alpha = require(args.alpha, "--alpha", "dual")?;
            let cert = cert_dual_weaving(&phi, &u, alpha)?;
            let psi = Frame::from_synthesis(canonical_dual(&phi)?.synthesis() + u.matrix().scale(alpha), phi.tol())?;
            (cert, Some([phi, psi]))
        }
        Kind::ApproxDual => {
            let phi = frames_arg(ctx, &args.files, 1, "approx-dual")?.remove(0);
            let t = operator_arg(ctx, args.t.as_ref(), args.t_scale, args.phase, phi.dim())?
                .unwrap_or_else(|| linalg::identity(phi.dim()));
            let theta = theta_arg(ctx, args.theta.as_ref(), &phi)?;
            let alpha = require(args.alpha, "--alpha", "approx-dual")?;
            let cert = cert_approx_dual_weaving(&phi, &t, &theta, alpha)?;
            let s_inv = frame_operator_inverse(&phi)?;
            let psi = Frame::from_synthesis(
                t.adjoint() * s_inv * phi.synthesis() + theta.adjoint().scale(alpha),
                phi.tol(),
            )?;
            (cert, Some([phi, psi]))
        }
        Kind::Canonical => {
            let phi = frames_arg(ctx, &args.files, 1, "canonical")?.remove(0);
            let reading = if args.riesz_part {
                RieszPartOperator::RieszPart
            } else {
                RieszPartOperator::FullFrame
            };
            let cert = cert_canonical_dual_woven(&phi, reading, ctx.cap)?;
            let dual = canonical_dual(&phi)?;
            (cert, Some([phi, dual]))
        }
        Kind::TwoOp => {
            let mut frames = frames_arg(ctx, &args.files, 2, "two-op")?;
            let psi = frames.remove(1);
            let phi = frames.remove(0);
            match (&args.t1, &args.t2) {
                (Some(p1), Some(p2)) => {
                    let t1 = ctx.matrix(p1)?;
                    let t2 = ctx.matrix(p2)?;
                    let cert = cert_two_operator(&phi, &psi, &t1, &t2, ctx.cap)?;
                    let pair = [phi.apply_operator(&t1)?, psi.apply_operator(&t2)?];
                    (cert, Some(pair))
                }
                (None, None) => {
                    let cert = cert_two_operator_canonical(&phi, &psi, ctx.cap)?;
                    let pair = [canonical_dual(&phi)?, canonical_dual(&psi)?];
                    (cert, Some(pair))
                }
                _ => {
                    return Err(FrameError::InvalidArgument(
                        "two-op takes both --t1 and --t2 or neither".into(),
                    ))
                }
            }
        }
        Kind::Admissible => {
            let phi = frames_arg(ctx, &args.files, 1, "admissible")?.remove(0);
            let t = operator_arg(ctx, args.t.as_ref(), args.t_scale, args.phase, phi.dim())?;
            let t = require(t, "--t, --t-scale or --phase", "admissible")?;
            let cert = cert_admissible(&phi, &t, None)?;
            let image = phi.apply_operator(&t)?;
            (cert, Some([phi, image]))
        }
        Kind::Perturb => {
            let mut frames = frames_arg(ctx, &args.files, 2, "perturb")?;
            let psi = frames.remove(1);
            let phi = frames.remove(0);
            let mode = if args.mu == "auto" {
                PerturbationMode::ExactMu
            } else {
                let mu: f64 = args.mu.parse().map_err(|_| {
                    FrameError::InvalidArgument(format!("--mu: expected `auto` or a number, got {}", args.mu))
                })?;
                let seed = args.seed.unwrap_or(0);
                ctx.seed = Some(seed);
                PerturbationMode::Probe {
                    lambda1: args.lambda1,
                    lambda2: args.lambda2,
                    mu,
                    probes: args.probes,
                    seed,
                }
            };
            let cert = cert_perturbation(&phi, &psi, mode)?;
            (cert, Some([phi, psi]))
        }
        Kind::Paulsen => {
            let alpha = require(args.alpha, "--alpha", "paulsen")?;
            if args.files.is_empty() {
                let dim = require(args.dim, "--dim or frame files", "paulsen")?;
                let size = require(args.size, "--size", "paulsen")?;
                let lower = require(args.lower, "--lower", "paulsen")?;
                let eps = paulsen_threshold(dim, size, lower, alpha)?;
                ctx.say(format!("threshold eps = {eps:.12e}"));
                let mut result = json!({ "threshold": eps, "dim": dim, "size": size, "lower": lower, "alpha": alpha });
                if let Some(e) = args.eps {
                    result["eps"] = json!(e);
                    result["eps_below_threshold"] = json!(e > 0.0 && e < eps);
                    result["distance_bound"] = json!(paulsen_distance_bound(dim, size, e));
                    return Ok((verdict(e > 0.0 && e < eps), result));
                }
                return Ok((EXIT_AFFIRMATIVE, result));
            }
            let mut frames = frames_arg(ctx, &args.files, 2, "paulsen")?;
            let psi = frames.remove(1);
            let phi = frames.remove(0);
            let eps = require(args.eps, "--eps", "paulsen")?;
            let cert = cert_equal_norm_parseval(&phi, &psi, eps, alpha)?;
            (cert, Some([phi, psi]))
        }
    };
    ctx.say(format!("{kind_name}: holds = {}, {}", cert.holds, cert.message));
    let mut result = json!({ "certificate": certificate_json(&cert) });
    if args.check {
        if let Some(pair) = pair {
            let oracle = woven_oracle_with_cap(&pair, pair[0].tol(), ctx.cap)?;
            let consistent =
                !cert.holds || (oracle.is_woven && oracle.universal_lower >= cert.implied_lower.unwrap_or(0.0) - 1e-8);
            ctx.say(format!(
                "oracle: woven = {}, universal lower = {:.12e}",
                oracle.is_woven, oracle.universal_lower
            ));
            result["oracle"] = json!({
                "is_woven": oracle.is_woven,
                "universal_lower": oracle.universal_lower,
                "universal_upper": oracle.universal_upper,
                "worst_assignment": oracle.worst_assignment.one_based(),
                "consistent": consistent,
            });
        }
    }
    Ok((verdict(cert.holds), result))
}

fn sweep(ctx: &mut Ctx, seed: u64, trials: usize, cases: bool) -> Result<(i32, Value)> {
    ctx.seed = Some(seed);
    let report = soundness_sweep(seed, trials)?;
    ctx.say(format!(
        "{} instances, {} violations, {} upper-bound violations, {} skipped",
        report.cases.len(),
        report.violations,
        report.upper_violations,
        report.skipped
    ));
    let mut value = serde_json::to_value(&report).expect("sweep report serializes");
    if !cases {
        if let Value::Object(map) = &mut value {
            map.remove("cases");
        }
    }
    Ok((verdict(report.sound()), value))
}

fn dispatch(ctx: &mut Ctx, command: &Command) -> Result<(i32, Value)> {
    match command {
        Command::Gen(kind) => gen(ctx, kind),
        Command::Bounds { file } => bounds(ctx, file),
        Command::Classify { file } => classify(ctx, file),
        Command::Dual(args) => dual(ctx, args),
        Command::Excess { file } => excess(ctx, file),
        Command::WeaveOracle { files, cap } => {
            if let Some(cap) = cap {
                ctx.cap = *cap;
            }
            weave_oracle(ctx, files)
        }
        Command::Distance {
            file1,
            file2,
            min_partition,
            cap,
        } => {
            if let Some(cap) = cap {
                ctx.cap = *cap;
            }
            distance(ctx, file1, file2, *min_partition)
        }
        Command::Certify(args) => {
            if let Some(cap) = args.cap {
                ctx.cap = cap;
            }
            certify(ctx, args)
        }
        Command::SoundnessSweep { seed, trials, cases } => sweep(ctx, *seed, *trials, *cases),
    }
}

fn env_cap() -> std::result::Result<u64, String> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{CAP_ENV} must be a nonnegative integer, got {v:?}")),
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
    }
}

/// Parses `argv` (program name first), runs the command and renders its output.
pub fn run_command<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let start = Instant::now();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_AFFIRMATIVE };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code,
                    report: None,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code,
                    report: None,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let cap = match env_cap() {
        Ok(cap) => cap,
        Err(msg) => {
            return Outcome {
                code: EXIT_USAGE,
                report: None,
                stdout: String::new(),
                stderr: format!("error: {msg}\n"),
            }
        }
    };
    let mut ctx = Ctx {
        files: Vec::new(),
        cap,
        seed: None,
        summary: Vec::new(),
    };
    let outcome = dispatch(&mut ctx, &cli.command);
    let (code, result) = match outcome {
        Ok(ok) => ok,
        Err(e) => {
            let code = exit_code(&e);
            if code == EXIT_USAGE {
                return Outcome {
                    code,
                    report: None,
                    stdout: String::new(),
                    stderr: format!("error: {e}\n"),
                };
            }
            ctx.say(format!("error: {e}"));
            (
                code,
                json!({ "error": { "kind": error_name(&e), "message": e.to_string() } }),
            )
        }
    };
    let command: Vec<String> = argv.iter().skip(1).cloned().collect();
    let mut hasher = Sha256::new();
    for arg in &command {
        hasher.update(arg.as_bytes());
        hasher.update([0u8]);
    }
    for f in &ctx.files {
        hasher.update(f.sha256.as_bytes());
    }
    let report = Report {
        command,
        inputs: Inputs {
            files: ctx.files,
            digest: hex(&hasher.finalize()),
        },
        result,
        seed: ctx.seed,
        timing: Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    };
    let mut stdout = serde_json::to_string_pretty(&report).expect("report serializes");
    stdout.push('\n');
    let mut stderr = ctx.summary.join("\n");
    stderr.push('\n');
    Outcome {
        code,
        report: Some(report),
        stdout,
        stderr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> String {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    #[test]
    fn bounds_of_basis() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(
            dir.path(),
            "b.json",
            r#"{"dim":2,"field":"real","vectors":[[1,0],[0,1]]}"#,
        );
        let out = run_command(["woven", "bounds", &f]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let r = out.report.unwrap();
        assert_eq!(r.result["lower"], json!(1.0));
        assert_eq!(r.inputs.files.len(), 1);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_command(["woven", "frobnicate"]).code, EXIT_USAGE);
        assert_eq!(
            run_command(["woven", "bounds", "/nonexistent/file.json"]).code,
            EXIT_USAGE
        );
        assert_eq!(run_command(["woven", "--help"]).code, 0);
    }

    #[test]
    fn infinity_is_a_string() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(1.5), json!(1.5));
    }
}
