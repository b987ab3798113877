//! Command line front end. Every subcommand reads JSON, computes one
//! invariant, and prints a versioned JSON report with certificates inline;
//! identical inputs and seeds produce byte-identical output. Exit codes:
//! 0 computed, 2 invalid input, 3 failed verification.

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

use strata::compress::{basis_shift, compress_semistable, power_extract, CompressError};
use strata::edge::{
    acr, commutative_rank, gauge_point, ncrk, value_lower_bound, zeta_edge, EdgeParam,
};
use strata::field::{Field, FieldSpec};
use strata::lab::{
    graph_tensor, monomial_dominance_gap, multilinear_cr, tpq_numbers, WeightedGraph,
};
use strata::quiver::{Rep, Stability};
use strata::report::{
    cr_method_json, envelope, error_envelope, extraction_from_json, extraction_json, mat_json,
    parse_ratio, ratio_string, real_json, render, slope_string, subspace_json, DEFAULT_SEED,
};
use strata::support::{
    is_balanced, neighborhood, ratio_to_f64, weighted_entropy_2d, weighted_entropy_general,
    Balance, Distribution, SupportSet, ENTROPY_CERT_TOL,
};
use strata::tensor::{
    field_spec_to_json, parse_field_arg, verify_restriction, Tensor, MAX_DENSE_ENTRIES,
};

/// Exact tensor invariants: pencil filtrations, edge functionals, support
/// combinatorics, and compression certificates.
#[derive(Parser)]
#[command(name = "strata", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Filtration of the mode pencil, with subspace certificates.
    Hn {
        file: PathBuf,
        /// Pencil mode, 1-based.
        #[arg(long, default_value_t = 3)]
        mode: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Reinterpret the input over this field (gf:P, gf:P^E, rational).
        #[arg(long)]
        field: Option<String>,
    },
    /// Edge functional at an exact weight.
    Zeta {
        file: PathBuf,
        /// Weight as an exact fraction, e.g. 1/2.
        #[arg(long)]
        rho: String,
        #[arg(long, default_value_t = 3)]
        mode: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        field: Option<String>,
    },
    /// Minimum of the edge functional over the weight.
    Acr {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        field: Option<String>,
    },
    /// Slope semistability of the mode pencil, with a witness when unstable.
    Semistable {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        mode: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        field: Option<String>,
    },
    /// Uniform-marginal test for a two-mode support.
    Balance { file: PathBuf },
    /// Weighted entropy of a two-mode support: exact versus iterative.
    Entropy {
        file: PathBuf,
        #[arg(long, default_value = "1/2")]
        rho: String,
    },
    /// Compress a semistable tensor (--p), or extract and certify a
    /// matrix multiplication from a tensor power (--power).
    Compress {
        file: PathBuf,
        /// Number of staircase blocks to keep.
        #[arg(long)]
        p: Option<usize>,
        /// Tensor power to extract from.
        #[arg(long)]
        power: Option<usize>,
        #[arg(long, default_value = "1/2")]
        rho: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        field: Option<String>,
    },
    /// Staircase basis shift with its change-of-basis certificate.
    Shift {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        field: Option<String>,
    },
    /// Re-check an extraction certificate against a tensor.
    Verify {
        extraction: PathBuf,
        tensor: PathBuf,
        #[arg(long, default_value = "1/2")]
        rho: String,
        #[arg(long)]
        field: Option<String>,
    },
    /// Named experiments: tpq P Q, gap N, cycle N13 N23 N24 N14.
    Lab {
        op: String,
        args: Vec<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        field: Option<String>,
    },
    /// Flattening rank per mode.
    Gauge {
        file: PathBuf,
        #[arg(long)]
        field: Option<String>,
    },
    /// Commutative and noncommutative pencil ranks with the sandwich check.
    Cr {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        mode: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        field: Option<String>,
    },
}

impl Cmd {
    fn verb(&self) -> &'static str {
        match self {
            Cmd::Hn { .. } => "hn",
            Cmd::Zeta { .. } => "zeta",
            Cmd::Acr { .. } => "acr",
            Cmd::Semistable { .. } => "semistable",
            Cmd::Balance { .. } => "balance",
            Cmd::Entropy { .. } => "entropy",
            Cmd::Compress { .. } => "compress",
            Cmd::Shift { .. } => "shift",
            Cmd::Verify { .. } => "verify",
            Cmd::Lab { .. } => "lab",
            Cmd::Gauge { .. } => "gauge",
            Cmd::Cr { .. } => "cr",
        }
    }
}

struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn invalid(m: impl Into<String>) -> Fail {
        Fail { code: 2, message: m.into() }
    }

    fn rejected(m: impl Into<String>) -> Fail {
        Fail { code: 3, message: m.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verb = cli.cmd.verb();
    match run(cli.cmd) {
        Ok(report) => {
            print!("{}", render(&report));
            ExitCode::SUCCESS
        }
        Err(f) => {
            print!("{}", render(&error_envelope(verb, &f.message)));
            ExitCode::from(f.code)
        }
    }
}

fn read_json(path: &PathBuf) -> Result<Value, Fail> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Fail::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Fail::invalid(format!("{} is not valid JSON: {e}", path.display())))
}

fn spec_str(spec: &FieldSpec) -> String {
    field_spec_to_json(spec).to_string()
}

fn embeddable(src: &FieldSpec, dst: &FieldSpec) -> bool {
    match (src, dst) {
        (a, b) if a == b => true,
        (FieldSpec::Prime { p }, FieldSpec::Ext { p: q, .. }) => p == q,
        _ => false,
    }
}

fn load_tensor(path: &PathBuf, field: &Option<String>) -> Result<Tensor, Fail> {
    let v = read_json(path)?;
    let t = Tensor::from_json(&v)
        .map_err(|e| Fail::invalid(format!("{}: {}", path.display(), e.0)))?;
    match field {
        None => Ok(t),
        Some(s) => {
            let spec = parse_field_arg(s).map_err(|e| Fail::invalid(e.0))?;
            let src = t.field().spec();
            if src == spec {
                return Ok(t);
            }
            if !embeddable(&src, &spec) {
                return Err(Fail::invalid(format!(
                    "cannot reinterpret {} data over {}",
                    spec_str(&src),
                    spec_str(&spec)
                )));
            }
            let big = Field::new(&spec).map_err(|e| Fail::invalid(e.0))?;
            Ok(t.base_change(&big))
        }
    }
}

fn need_order3(t: &Tensor) -> Result<(), Fail> {
    if t.order() != 3 {
        return Err(Fail::invalid(format!("expected a 3-mode tensor, got {} modes", t.order())));
    }
    Ok(())
}

fn need_mode3(mode: usize) -> Result<(), Fail> {
    if !(1..=3).contains(&mode) {
        return Err(Fail::invalid(format!("mode {mode} is not one of 1, 2, 3")));
    }
    Ok(())
}

fn parse_unit_ratio(s: &str) -> Result<BigRational, Fail> {
    let r = parse_ratio(s).map_err(|e| Fail::invalid(e.0))?;
    if r < BigRational::zero() || r > BigRational::one() {
        return Err(Fail::invalid(format!("weight {s} is outside [0, 1]")));
    }
    Ok(r)
}

fn compress_fail(e: CompressError) -> Fail {
    match e {
        CompressError::Unstable { .. } => Fail::invalid(e.to_string()),
        CompressError::Failed(m) => Fail::rejected(m),
    }
}

fn distribution_json(d: &Distribution) -> Value {
    let entries: Vec<Value> = d
        .points
        .iter()
        .zip(&d.weights)
        .map(|(p, w)| {
            json!({
                "point": p.iter().map(|&i| i + 1).collect::<Vec<usize>>(),
                "weight": ratio_string(w),
            })
        })
        .collect();
    Value::Array(entries)
}

/// base^exp while it stays under the dense-entry cap.
fn upow(base: usize, exp: usize) -> Option<u128> {
    if base <= 1 {
        return Some(base as u128);
    }
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128)?;
        if acc > MAX_DENSE_ENTRIES as u128 {
            return None;
        }
    }
    Some(acc)
}

fn fixed_args<const K: usize>(op: &str, args: &[u64]) -> Result<[u64; K], Fail> {
    if args.len() != K {
        return Err(Fail::invalid(format!(
            "lab {op} takes {K} integer argument(s), got {}",
            args.len()
        )));
    }
    let mut out = [0u64; K];
    out.copy_from_slice(args);
    Ok(out)
}

fn run(cmd: Cmd) -> Result<Value, Fail> {
    match cmd {
        Cmd::Hn { file, mode, seed, field } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            need_mode3(mode)?;
            let t = load_tensor(&file, &field)?;
            need_order3(&t)?;
            let rep = Rep::from_tensor_mode(&t, mode - 1);
            let hn = rep.hn_filtration(seed).map_err(|e| Fail::rejected(e.0))?;
            hn.verify(&rep, seed).map_err(|e| Fail::rejected(e.0))?;
            let steps: Vec<Value> = hn
                .steps
                .iter()
                .map(|s| json!({ "u": subspace_json(&s.u), "v": subspace_json(&s.v) }))
                .collect();
            Ok(envelope(
                "hn",
                json!({ "mode": mode, "seed": seed }),
                json!({
                    "dim_data": hn.dim_data(),
                    "slopes": hn.slopes().iter().map(slope_string).collect::<Vec<_>>(),
                    "concise": hn.is_concise(),
                    "steps": steps,
                }),
            ))
        }
        Cmd::Zeta { file, rho, mode, seed, field } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let rho_q = parse_unit_ratio(&rho)?;
            let t = load_tensor(&file, &field)?;
            let param =
                EdgeParam::new(mode, rho_q.clone()).map_err(|e| Fail::invalid(e.0))?;
            let fv = zeta_edge(&t, &param, seed).map_err(|e| Fail::invalid(e.0))?;
            Ok(envelope(
                "zeta",
                json!({ "mode": mode, "rho": ratio_string(&rho_q), "seed": seed }),
                json!({ "value": real_json(&fv.value), "blocks": fv.exact_form }),
            ))
        }
        Cmd::Acr { file, seed, field } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let t = load_tensor(&file, &field)?;
            let av = acr(&t, seed).map_err(|e| Fail::invalid(e.0))?;
            Ok(envelope(
                "acr",
                json!({ "seed": seed }),
                json!({
                    "value": real_json(&av.value),
                    "argmin_rho": real_json(&av.argmin_rho),
                    "blocks": av.exact_form,
                }),
            ))
        }
        Cmd::Semistable { file, mode, seed, field } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            need_mode3(mode)?;
            let t = load_tensor(&file, &field)?;
            need_order3(&t)?;
            let rep = Rep::from_tensor_mode(&t, mode - 1);
            let result = match rep.is_semistable(seed).map_err(|e| Fail::rejected(e.0))? {
                Stability::Semistable => json!({ "semistable": true }),
                Stability::Unstable { witness, deficiency } => json!({
                    "semistable": false,
                    "deficiency": deficiency,
                    "witness": subspace_json(&witness),
                }),
            };
            Ok(envelope("semistable", json!({ "mode": mode, "seed": seed }), result))
        }
        Cmd::Balance { file } => {
            let v = read_json(&file)?;
            let phi = SupportSet::from_json(&v)
                .map_err(|e| Fail::invalid(format!("{}: {}", file.display(), e.0)))?;
            let result = match is_balanced(&phi).map_err(|e| Fail::invalid(e.0))? {
                Balance::Balanced { distribution } => {
                    json!({ "balanced": true, "distribution": distribution_json(&distribution) })
                }
                Balance::Unbalanced { violator } => {
                    let hood: Vec<usize> =
                        neighborhood(&phi, &violator).iter().map(|&k| k + 1).collect();
                    let rows: Vec<usize> = violator.iter().map(|&j| j + 1).collect();
                    json!({ "balanced": false, "violator": rows, "neighborhood": hood })
                }
            };
            Ok(envelope("balance", json!({}), result))
        }
        Cmd::Entropy { file, rho } => {
            let v = read_json(&file)?;
            let phi = SupportSet::from_json(&v)
                .map_err(|e| Fail::invalid(format!("{}: {}", file.display(), e.0)))?;
            let rho_q = parse_unit_ratio(&rho)?;
            let exact = weighted_entropy_2d(&phi, &rho_q).map_err(|e| Fail::invalid(e.0))?;
            let rho_f = ratio_to_f64(&rho_q);
            let general = weighted_entropy_general(&phi, &[rho_f, 1.0 - rho_f])
                .map_err(|e| Fail::invalid(e.0))?;
            let diff = (exact.value_bits.to_f64() - general.value_bits).abs();
            let agree = general.converged && diff <= ENTROPY_CERT_TOL;
            Ok(envelope(
                "entropy",
                json!({ "rho": ratio_string(&rho_q) }),
                json!({
                    "exact": {
                        "bits": real_json(&exact.value_bits),
                        "functional": real_json(&exact.functional),
                        "blocks": exact.decomposition.ratios(),
                    },
                    "iterative": {
                        "bits": general.value_bits,
                        "certificate_gap": general.certificate_gap,
                        "iterations": general.iterations,
                        "converged": general.converged,
                    },
                    "difference": diff,
                    "agree": agree,
                }),
            ))
        }
        Cmd::Compress { file, p, power, rho, seed, field } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let t = load_tensor(&file, &field)?;
            need_order3(&t)?;
            if t.is_zero() {
                return Err(Fail::invalid("cannot compress the zero tensor"));
            }
            match (p, power) {
                (Some(_), Some(_)) => {
                    Err(Fail::invalid("--p and --power are mutually exclusive"))
                }
                (None, None) => {
                    Err(Fail::invalid("pass --p P to compress or --power N to extract"))
                }
                (Some(p), None) => {
                    if p == 0 {
                        return Err(Fail::invalid("--p must be at least 1"));
                    }
                    let c = compress_semistable(&t, p, seed).map_err(compress_fail)?;
                    let target = Tensor::matrix_mult(&c.field, c.target.0, c.target.1, c.target.2)
                        .map_err(|e| Fail::rejected(e.0))?;
                    let tb = t.base_change(&c.field);
                    match verify_restriction(&tb, &target, &c.triple) {
                        Ok(true) => {}
                        Ok(false) => {
                            return Err(Fail::rejected("compression maps failed re-verification"))
                        }
                        Err(e) => return Err(Fail::rejected(e.0)),
                    }
                    let (a, b) = {
                        let d = t.dims();
                        (d[0].min(d[1]), d[0].max(d[1]))
                    };
                    let floor = ((b - (p - 1) * a) * a).div_ceil(a + b);
                    let maps: Vec<Value> =
                        c.triple.maps.iter().map(|m| mat_json(&c.field, m)).collect();
                    Ok(envelope(
                        "compress",
                        json!({ "p": p, "seed": seed }),
                        json!({
                            "lambda": c.lambda_p,
                            "floor": floor,
                            "meets_floor": c.lambda_p >= floor,
                            "target": [c.target.0, c.target.1, c.target.2],
                            "field": field_spec_to_json(&c.field.spec()),
                            "maps": maps,
                            "verified": true,
                        }),
                    ))
                }
                (None, Some(n)) => {
                    if n == 0 {
                        return Err(Fail::invalid("--power must be at least 1"));
                    }
                    let rho_q = parse_unit_ratio(&rho)?;
                    let px = power_extract(&t, &rho_q, n, seed).map_err(compress_fail)?;
                    Ok(envelope(
                        "compress",
                        json!({ "power": n, "rho": ratio_string(&rho_q), "seed": seed }),
                        json!({
                            "block": [px.block.0, px.block.1],
                            "bound": real_json(&px.bound),
                            "extraction": extraction_json(&px.field, &px.extraction),
                        }),
                    ))
                }
            }
        }
        Cmd::Shift { file, seed, field } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let t = load_tensor(&file, &field)?;
            need_order3(&t)?;
            if t.is_zero() {
                return Err(Fail::invalid("cannot shift the zero tensor"));
            }
            let s = basis_shift(&t, seed).map_err(compress_fail)?;
            let f = s.tprime.field().clone();
            Ok(envelope(
                "shift",
                json!({ "seed": seed }),
                json!({
                    "lambdas": s.lambdas,
                    "field": field_spec_to_json(&f.spec()),
                    "a": mat_json(&f, &s.a),
                    "b": mat_json(&f, &s.b),
                    "l": mat_json(&f, &s.l),
                    "shifted": s.tprime.to_json(),
                }),
            ))
        }
        Cmd::Verify { extraction, tensor, rho, field } => {
            let ev = read_json(&extraction)?;
            let (ext_field, ext) = extraction_from_json(&ev)
                .map_err(|e| Fail::invalid(format!("{}: {}", extraction.display(), e.0)))?;
            let t = load_tensor(&tensor, &field)?;
            need_order3(&t)?;
            let rho_q = parse_unit_ratio(&rho)?;
            let spec = ext_field.spec();
            let src = t.field().spec();
            if src != spec && !embeddable(&src, &spec) {
                return Err(Fail::rejected(format!(
                    "certificate field {} does not extend the tensor's field {}",
                    spec_str(&spec),
                    spec_str(&src)
                )));
            }
            let tb = if src == spec { t } else { t.base_change(&ext_field) };
            let target_cols =
                [ext.e.checked_mul(ext.h), ext.h.checked_mul(ext.l), ext.l.checked_mul(ext.e)];
            for k in 0..3 {
                let m = &ext.triple.maps[k];
                match (upow(tb.dims()[k], ext.power), target_cols[k]) {
                    (Some(r), Some(c)) if m.rows() as u128 == r && m.cols() == c => {}
                    _ => {
                        return Err(Fail::rejected(format!(
                            "map {} has the wrong shape for the claimed power and target",
                            k + 1
                        )))
                    }
                }
            }
            let bound = value_lower_bound(&tb, &rho_q, &ext).map_err(|e| Fail::rejected(e.0))?;
            Ok(envelope(
                "verify",
                json!({ "rho": ratio_string(&rho_q) }),
                json!({
                    "verified": true,
                    "power": ext.power,
                    "target": [ext.e, ext.h, ext.l],
                    "bound": real_json(&bound),
                }),
            ))
        }
        Cmd::Lab { op, args, seed, field } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            match op.as_str() {
                "tpq" => {
                    let [p, q] = fixed_args("tpq", &args)?;
                    if p == 0 || q == 0 {
                        return Err(Fail::invalid("tpq sizes must be at least 1"));
                    }
                    let r = tpq_numbers(p as usize, q as usize, seed)
                        .map_err(|e| Fail::rejected(e.0))?;
                    Ok(envelope(
                        "lab",
                        json!({ "op": "tpq", "p": p, "q": q, "seed": seed }),
                        json!({
                            "acr12": real_json(&r.acr12),
                            "acr34": real_json(&r.acr34),
                            "separated": r.separated,
                        }),
                    ))
                }
                "gap" => {
                    let [n] = fixed_args("gap", &args)?;
                    let r = monomial_dominance_gap(n as usize)
                        .map_err(|e| Fail::invalid(e.0))?;
                    Ok(envelope(
                        "lab",
                        json!({ "n": n, "op": "gap" }),
                        json!({
                            "power_value": r.power_value.to_string(),
                            "best_k": r.best_k,
                            "best_term": r.best_term.to_string(),
                            "within_exponential_bound": r.within_exponential_bound,
                            "strict_gap": r.strict_gap,
                        }),
                    ))
                }
                "cycle" => {
                    let [n13, n23, n24, n14] = fixed_args("cycle", &args)?;
                    if [n13, n23, n24, n14].contains(&0) {
                        return Err(Fail::invalid("cycle weights must be at least 1"));
                    }
                    let spec = match &field {
                        Some(s) => parse_field_arg(s).map_err(|e| Fail::invalid(e.0))?,
                        None => FieldSpec::Prime { p: 1009 },
                    };
                    let f = Field::new(&spec).map_err(|e| Fail::invalid(e.0))?;
                    let g = WeightedGraph::four_cycle(
                        n13 as usize,
                        n23 as usize,
                        n24 as usize,
                        n14 as usize,
                    );
                    let t = graph_tensor(&f, &g).map_err(|e| Fail::invalid(e.0))?;
                    let flow = multilinear_cr(&t, 1, 2, seed).map_err(|e| Fail::rejected(e.0))?;
                    let predicted =
                        (n13.min(n23) as usize) * (n14.min(n24) as usize);
                    Ok(envelope(
                        "lab",
                        json!({
                            "field": field_spec_to_json(&spec),
                            "op": "cycle",
                            "seed": seed,
                            "weights": [n13, n23, n24, n14],
                        }),
                        json!({
                            "dims": t.dims(),
                            "flow": flow.value,
                            "method": cr_method_json(&flow.method),
                            "predicted": predicted,
                            "matches": flow.value == predicted,
                        }),
                    ))
                }
                other => Err(Fail::invalid(format!(
                    "unknown lab operation {other:?}; expected tpq, gap, or cycle"
                ))),
            }
        }
        Cmd::Gauge { file, field } => {
            let t = load_tensor(&file, &field)?;
            let ranks: Vec<usize> = (1..=t.order()).map(|m| gauge_point(&t, m)).collect();
            Ok(envelope("gauge", json!({}), json!({ "dims": t.dims(), "ranks": ranks })))
        }
        Cmd::Cr { file, mode, seed, field } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            need_mode3(mode)?;
            let t = load_tensor(&file, &field)?;
            need_order3(&t)?;
            let cr = commutative_rank(&t, mode, seed).map_err(|e| Fail::rejected(e.0))?;
            let rep = Rep::from_tensor_mode(&t, mode - 1);
            let ncr = ncrk(&rep, seed).map_err(|e| Fail::rejected(e.0))?;
            let sandwich = cr.value <= ncr && ncr <= 2 * cr.value;
            Ok(envelope(
                "cr",
                json!({ "mode": mode, "seed": seed }),
                json!({
                    "cr": cr.value,
                    "ncr": ncr,
                    "sandwich": sandwich,
                    "method": cr_method_json(&cr.method),
                }),
            ))
        }
    }
}
