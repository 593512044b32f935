//! Command-line interface for the exact q-series toolkit.
//!
//! Exit codes: 0 = success / identity verified / derivable, 1 = identity
//! falsified or not in the relation span, 2 = usage error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qmzv_core::brackets::{
    bracket_via_conjugation, eval_bracket, expand_partition_relation, expand_shuffle,
    expand_stuffle, verify_bracket_identity, BiIndex, BracketSide,
};
use qmzv_core::formal::{
    corollary_i_vector, corollary_ii_vector, qdsh_consistency, symbol_basis, theorem41_vector,
    welldefined_check, FormalSymbol, FormalVec, NamedIdentity, RelationSet, Space, SpanResult,
};
use qmzv_core::qseries::Agreement;
use qmzv_core::rational::format_rat;
use qmzv_core::realize::{
    verify_betadsh, verify_eisenstein, verify_lemma, verify_realization_images, RealizationTable,
};
use qmzv_core::analytic;

#[derive(Parser)]
#[command(
    name = "qmzv",
    version,
    about = "Exact bi-indexed q-series, their double-shuffle algebra, and quasi-modular identities",
    after_help = "EXAMPLES:\n  \
        qmzv bracket --k 2 --d 0 --order 6 --json\n  \
        qmzv verify shuffle --k1 2 --d1 0 --k2 3 --d2 0 --order 60\n  \
        qmzv verify betadsh --degree 12\n  \
        qmzv formal relations --weight 4 --json\n  \
        qmzv formal derive --weight 4 --target ramanujan2\n  \
        qmzv realize --k 8 --d 0 --order 20\n  \
        qmzv limits --k 2 --tolerance 1e-3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit machine-readable JSON
    #[arg(long, global = true)]
    json: bool,
    /// Write the report to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate g(k1,..,kr; d1,..,dr) as exact rational q-coefficients
    Bracket {
        /// Upper index tuple, comma separated (entries >= 1)
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u32>,
        /// Lower index tuple, comma separated (defaults to all zeros)
        #[arg(long, value_delimiter = ',')]
        d: Option<Vec<u32>>,
        /// q-order N (series known modulo q^{N+1})
        #[arg(long, default_value_t = 40)]
        order: usize,
    },
    /// Check identities coefficientwise; failures name the first discrepancy
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Formal double zeta / double Eisenstein space queries
    #[command(subcommand)]
    Formal(FormalCmd),
    /// Realize a formal symbol or a named identity as a q-series
    Realize {
        /// Upper index tuple (depth 1 -> G(k;d), depth 2 -> G or P)
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<u32>>,
        /// Lower index tuple (defaults to zeros)
        #[arg(long, value_delimiter = ',')]
        d: Option<Vec<u32>>,
        /// Interpret a depth-2 index as the product symbol P
        #[arg(long)]
        product: bool,
        /// Realize a named identity vector instead (must produce 0)
        #[arg(long, value_enum)]
        target: Option<TargetArg>,
        /// Theorem parameters when --target theorem41
        #[arg(long)]
        k1: Option<u32>,
        #[arg(long)]
        k2: Option<u32>,
        /// Weight when --target cor1 / cor2
        #[arg(long)]
        weight: Option<u32>,
        /// Generating degree bound (raised automatically if the symbol
        /// needs more)
        #[arg(long, default_value_t = 8)]
        degree: usize,
        /// q-order
        #[arg(long, default_value_t = 40)]
        order: usize,
    },
    /// Check q->1 limits of (1-q)^w g against the nested-sum zeta oracle
    Limits {
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        d: Option<Vec<u32>>,
        /// Absolute tolerance on the extrapolated limit
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Stuffle expansion of g(k1;d1) g(k2;d2) against the literal product
    Stuffle(ProductArgs),
    /// Shuffle expansion of g(k1;d1) g(k2;d2) against the literal product
    Shuffle(ProductArgs),
    /// Closed-form partition relation (depth <= 2) against direct evaluation
    Partition(IndexArgs),
    /// Young-diagram conjugation oracle against direct evaluation (any depth)
    Conjugation(IndexArgs),
    /// Stuffle/partition/shuffle relations of the generating series g1, g2
    Lemma {
        #[arg(long, default_value_t = 6)]
        degree: usize,
        #[arg(long, default_value_t = 20)]
        order: usize,
    },
    /// Double-shuffle equations of the Bernoulli realization (exact polynomials)
    Betadsh {
        #[arg(long, default_value_t = 12)]
        degree: usize,
    },
    /// Double-shuffle equations of the Eisenstein realization
    Eisenstein {
        #[arg(long, default_value_t = 8)]
        degree: usize,
        #[arg(long, default_value_t = 30)]
        order: usize,
    },
    /// Realization images: E1-coefficient(k,d) vs derivatives of Gtilde
    Images {
        #[arg(long, default_value_t = 9)]
        kmax: u32,
        #[arg(long, default_value_t = 8)]
        dmax: u32,
        #[arg(long, default_value_t = 40)]
        order: usize,
    },
}

#[derive(Args)]
struct ProductArgs {
    #[arg(long)]
    k1: u32,
    #[arg(long, default_value_t = 0)]
    d1: u32,
    #[arg(long)]
    k2: u32,
    #[arg(long, default_value_t = 0)]
    d2: u32,
    #[arg(long, default_value_t = 40)]
    order: usize,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<u32>>,
    #[arg(long, default_value_t = 40)]
    order: usize,
}

#[derive(Subcommand)]
enum FormalCmd {
    /// List the canonical symbol basis of a weight
    Basis {
        #[arg(long)]
        weight: u32,
        #[arg(long, value_enum, default_value_t = SpaceArg::De)]
        space: SpaceArg,
    },
    /// Defining relations of a weight, echelonized, with rank
    Relations {
        #[arg(long)]
        weight: u32,
    },
    /// Span membership with an explicit rational certificate
    Derive {
        #[arg(long, value_enum)]
        target: TargetArg,
        /// Weight for cor1/cor2 targets
        #[arg(long)]
        weight: Option<u32>,
        /// Parameters for the theorem41 target
        #[arg(long)]
        k1: Option<u32>,
        #[arg(long)]
        k2: Option<u32>,
    },
    /// Well-definedness of the double zeta -> double Eisenstein map
    Welldefined {
        #[arg(long)]
        weight: u32,
    },
    /// Generating-series relation extraction vs directly generated relations
    Qdsh {
        #[arg(long)]
        weight: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    /// Double Eisenstein symbols G(k;d), G(..;..), P(..;..)
    De,
    /// Double zeta symbols Z, Z(..), P(..)
    Dz,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Theorem41,
    Cor1,
    Cor2,
    Ramanujan2,
    Ramanujan4,
    Ramanujan6,
    G8,
    G10,
}

impl TargetArg {
    fn name(self) -> &'static str {
        match self {
            TargetArg::Theorem41 => "theorem41",
            TargetArg::Cor1 => "cor1",
            TargetArg::Cor2 => "cor2",
            TargetArg::Ramanujan2 => "ramanujan2",
            TargetArg::Ramanujan4 => "ramanujan4",
            TargetArg::Ramanujan6 => "ramanujan6",
            TargetArg::G8 => "g8",
            TargetArg::G10 => "g10",
        }
    }

    /// Resolves the target to a formal vector.
    fn vector(self, weight: Option<u32>, k1: Option<u32>, k2: Option<u32>) -> Result<FormalVec> {
        Ok(match self {
            TargetArg::Theorem41 => {
                let (k1, k2) = match (k1, k2) {
                    (Some(a), Some(b)) => (a, b),
                    _ => bail!("--target theorem41 needs --k1 and --k2"),
                };
                theorem41_vector(k1, k2)?
            }
            TargetArg::Cor1 => {
                corollary_i_vector(weight.context("--target cor1 needs --weight")?)?
            }
            TargetArg::Cor2 => {
                corollary_ii_vector(weight.context("--target cor2 needs --weight")?)?
            }
            TargetArg::Ramanujan2 => NamedIdentity::Ramanujan2.vector(),
            TargetArg::Ramanujan4 => NamedIdentity::Ramanujan4.vector(),
            TargetArg::Ramanujan6 => NamedIdentity::Ramanujan6.vector(),
            TargetArg::G8 => NamedIdentity::G8.vector(),
            TargetArg::G10 => NamedIdentity::G10.vector(),
        })
    }
}

/// Rendered output plus the process exit code.
struct Outcome {
    text: String,
    json: Value,
    code: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_mode = cli.json;
    let out_path = cli.out.clone();
    match run(cli) {
        Ok(outcome) => {
            let body = if json_mode {
                format!("{}\n", serde_json::to_string_pretty(&outcome.json).unwrap())
            } else {
                outcome.text
            };
            if let Some(path) = out_path {
                let written = std::fs::File::create(&path)
                    .and_then(|mut f| f.write_all(body.as_bytes()));
                if let Err(e) = written {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", body);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn parse_index(k: Vec<u32>, d: Option<Vec<u32>>) -> Result<BiIndex> {
    let d = d.unwrap_or_else(|| vec![0; k.len()]);
    BiIndex::new(k, d).context("invalid bi-index")
}

fn agreement_json(a: &Agreement) -> Value {
    match &a.first_discrepancy {
        None => json!({"verified": true, "order": a.order}),
        Some((n, lhs, rhs)) => json!({
            "verified": false,
            "order": a.order,
            "first_discrepancy": {"power": n, "lhs": format_rat(lhs), "rhs": format_rat(rhs)},
        }),
    }
}

fn agreement_text(what: &str, a: &Agreement) -> String {
    match &a.first_discrepancy {
        None => format!("{}: verified to q-order {}\n", what, a.order),
        Some((n, lhs, rhs)) => format!(
            "{}: FALSIFIED at q^{} (lhs = {}, rhs = {})\n",
            what,
            n,
            format_rat(lhs),
            format_rat(rhs)
        ),
    }
}

fn verdict(ok: bool) -> u8 {
    u8::from(!ok)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Bracket { k, d, order } => {
            let idx = parse_index(k, d)?;
            let series = eval_bracket(&idx, order);
            Ok(Outcome {
                text: format!("{} = {}\n", idx, series),
                json: json!({
                    "command": "bracket",
                    "config": {"k": idx.k(), "d": idx.d(), "order": order},
                    "series": series.to_json(),
                }),
                code: 0,
            })
        }

        Command::Verify(v) => run_verify(v),
        Command::Formal(f) => run_formal(f),

        Command::Realize { k, d, product, target, k1, k2, weight, degree, order } => {
            let (label, vector) = match (target, k) {
                (Some(t), None) => {
                    let v = t.vector(weight, k1, k2)?;
                    (format!("target {}", t.name()), v)
                }
                (None, Some(k)) => {
                    let idx = parse_index(k, d)?;
                    let sym = match (idx.depth(), product) {
                        (1, false) => FormalSymbol::G1 { k: idx.k()[0], d: idx.d()[0] },
                        (2, false) => FormalSymbol::G2 {
                            k1: idx.k()[0],
                            k2: idx.k()[1],
                            d1: idx.d()[0],
                            d2: idx.d()[1],
                        },
                        (2, true) => FormalSymbol::P {
                            k1: idx.k()[0],
                            k2: idx.k()[1],
                            d1: idx.d()[0],
                            d2: idx.d()[1],
                        },
                        (1, true) => bail!("--product needs a depth-2 index"),
                        _ => bail!("realization tables cover depth 1 and 2 only"),
                    };
                    (sym.to_string(), FormalVec::from_terms([(sym, qmzv_core::rat_int(1))]))
                }
                _ => bail!("give either --k (a symbol) or --target (an identity)"),
            };
            // generating degree the vector's symbols actually occupy
            let needed = vector
                .iter()
                .map(|(s, _)| (s.weight() - depth_of(s)) as usize)
                .max()
                .unwrap_or(0);
            let bound = degree.max(needed);
            let table = RealizationTable::build(bound, order);
            let series = table.realize(&vector)?;
            Ok(Outcome {
                text: format!("{} realizes to {}\n", label, series),
                json: json!({
                    "command": "realize",
                    "config": {"target": label, "degree": bound, "order": order},
                    "vector": vector.to_json(),
                    "series": series.to_json(),
                }),
                code: 0,
            })
        }

        Command::Limits { k, d, tolerance } => {
            let idx = parse_index(k, d)?;
            let report = analytic::limit_check(&idx, tolerance)?;
            let text = format!(
                "{}: extrapolated {} vs zeta {} (abs error {:.3e}, tolerance {:.1e}) -> {}\n",
                idx,
                report.extrapolated,
                report.reference,
                report.abs_error,
                report.tolerance,
                if report.pass() { "pass" } else { "FAIL" }
            );
            let code = verdict(report.pass());
            Ok(Outcome {
                text,
                json: json!({
                    "command": "limits",
                    "config": {"k": idx.k(), "d": idx.d(), "tolerance": tolerance},
                    "report": report.to_json(),
                }),
                code,
            })
        }
    }
}

fn depth_of(s: &FormalSymbol) -> u32 {
    match s {
        FormalSymbol::G1 { .. } | FormalSymbol::Z { .. } => 1,
        _ => 2,
    }
}

fn run_verify(cmd: VerifyCmd) -> Result<Outcome> {
    match cmd {
        VerifyCmd::Stuffle(a) => {
            let combo = expand_stuffle(a.k1, a.d1, a.k2, a.d2);
            let ag = verify_bracket_identity(
                &BracketSide::Product(BiIndex::single(a.k1, a.d1), BiIndex::single(a.k2, a.d2)),
                &combo,
                a.order,
            );
            product_outcome("stuffle", &a, combo.to_json(), ag)
        }
        VerifyCmd::Shuffle(a) => {
            let combo = expand_shuffle(a.k1, a.d1, a.k2, a.d2);
            let ag = verify_bracket_identity(
                &BracketSide::Product(BiIndex::single(a.k1, a.d1), BiIndex::single(a.k2, a.d2)),
                &combo,
                a.order,
            );
            product_outcome("shuffle", &a, combo.to_json(), ag)
        }
        VerifyCmd::Partition(a) => {
            let idx = parse_index(a.k, a.d)?;
            let combo = expand_partition_relation(&idx)?;
            let lhs = eval_bracket(&idx, a.order);
            let ag = lhs.agreement(&combo.eval(a.order));
            Ok(Outcome {
                text: agreement_text(&format!("partition relation for {}", idx), &ag),
                json: json!({
                    "command": "verify.partition",
                    "config": {"k": idx.k(), "d": idx.d(), "order": a.order},
                    "expansion": combo.to_json(),
                    "result": agreement_json(&ag),
                }),
                code: verdict(ag.ok()),
            })
        }
        VerifyCmd::Conjugation(a) => {
            let idx = parse_index(a.k, a.d)?;
            let ag = eval_bracket(&idx, a.order).agreement(&bracket_via_conjugation(&idx, a.order));
            Ok(Outcome {
                text: agreement_text(&format!("conjugation oracle for {}", idx), &ag),
                json: json!({
                    "command": "verify.conjugation",
                    "config": {"k": idx.k(), "d": idx.d(), "order": a.order},
                    "result": agreement_json(&ag),
                }),
                code: verdict(ag.ok()),
            })
        }
        VerifyCmd::Lemma { degree, order } => {
            let report = verify_lemma(degree, order);
            let ok = report.ok();
            Ok(Outcome {
                text: format!(
                    "generating-series relations to degree {}, q-order {}: {}\n",
                    degree,
                    order,
                    if ok { "verified" } else { "FALSIFIED" }
                ),
                json: json!({
                    "command": "verify.lemma",
                    "config": {"degree": degree, "order": order},
                    "result": report.to_json(),
                }),
                code: verdict(ok),
            })
        }
        VerifyCmd::Betadsh { degree } => {
            let report = verify_betadsh(degree);
            let ok = report.ok();
            Ok(Outcome {
                text: format!(
                    "Bernoulli realization double shuffle to degree {}: {}\n",
                    degree,
                    if ok { "verified" } else { "FALSIFIED" }
                ),
                json: json!({
                    "command": "verify.betadsh",
                    "config": {"degree": degree},
                    "result": report.to_json(),
                }),
                code: verdict(ok),
            })
        }
        VerifyCmd::Eisenstein { degree, order } => {
            let report = verify_eisenstein(degree, order);
            let ok = report.ok();
            Ok(Outcome {
                text: format!(
                    "Eisenstein realization double shuffle to degree {}, q-order {}: {}\n",
                    degree,
                    order,
                    if ok { "verified" } else { "FALSIFIED" }
                ),
                json: json!({
                    "command": "verify.eisenstein",
                    "config": {"degree": degree, "order": order},
                    "result": report.to_json(),
                }),
                code: verdict(ok),
            })
        }
        VerifyCmd::Images { kmax, dmax, order } => {
            let report = verify_realization_images(kmax, dmax, order);
            let ok = report.ok();
            Ok(Outcome {
                text: format!(
                    "realization images for k <= {}, d <= {}, q-order {}: {} ({} cases)\n",
                    kmax,
                    dmax,
                    order,
                    if ok { "verified" } else { "FALSIFIED" },
                    report.cases.len()
                ),
                json: json!({
                    "command": "verify.images",
                    "config": {"kmax": kmax, "dmax": dmax, "order": order},
                    "result": report.to_json(),
                }),
                code: verdict(ok),
            })
        }
    }
}

fn product_outcome(kind: &str, a: &ProductArgs, combo: Value, ag: Agreement) -> Result<Outcome> {
    Ok(Outcome {
        text: agreement_text(
            &format!("{} g({};{}) g({};{})", kind, a.k1, a.d1, a.k2, a.d2),
            &ag,
        ),
        json: json!({
            "command": format!("verify.{}", kind),
            "config": {"k1": a.k1, "d1": a.d1, "k2": a.k2, "d2": a.d2, "order": a.order},
            "expansion": combo,
            "result": agreement_json(&ag),
        }),
        code: verdict(ag.ok()),
    })
}

fn run_formal(cmd: FormalCmd) -> Result<Outcome> {
    match cmd {
        FormalCmd::Basis { weight, space } => {
            let basis = symbol_basis(
                weight,
                match space {
                    SpaceArg::De => Space::DoubleEisenstein,
                    SpaceArg::Dz => Space::DoubleZeta,
                },
            );
            let mut text = format!("weight {} basis ({} symbols):\n", weight, basis.len());
            for s in &basis {
                text.push_str(&format!("  {}\n", s));
            }
            Ok(Outcome {
                text,
                json: json!({
                    "command": "formal.basis",
                    "config": {
                        "weight": weight,
                        "space": match space { SpaceArg::De => "de", SpaceArg::Dz => "dz" },
                    },
                    "symbols": basis.iter().map(FormalSymbol::to_json).collect::<Vec<_>>(),
                }),
                code: 0,
            })
        }
        FormalCmd::Relations { weight } => {
            let set = RelationSet::build(weight);
            Ok(Outcome {
                text: format!(
                    "weight {}: {} symbols, {} generators, rank {}, quotient dimension {}\n",
                    weight,
                    set.basis().len(),
                    set.generators().len(),
                    set.rank(),
                    set.quotient_dimension()
                ),
                json: json!({
                    "command": "formal.relations",
                    "config": {"weight": weight},
                    "relations": set.to_json(),
                }),
                code: 0,
            })
        }
        FormalCmd::Derive { target, weight, k1, k2 } => {
            let vector = target.vector(weight, k1, k2)?;
            let w = match vector.weight() {
                Some(w) => w,
                None => {
                    // zero vector, e.g. cor2 at weight 6: trivially derived
                    return Ok(Outcome {
                        text: format!(
                            "target {} is the zero vector; trivially derived\n",
                            target.name()
                        ),
                        json: json!({
                            "command": "formal.derive",
                            "config": {"target": target.name()},
                            "result": {"derived": true, "certificate": []},
                        }),
                        code: 0,
                    });
                }
            };
            let set = RelationSet::build(w);
            let result = set.in_span(&vector)?;
            let derived = result.contains();
            let text = match &result {
                SpanResult::Contains { certificate } => format!(
                    "derived: {} = 0 in the weight-{} double Eisenstein space ({} relation(s) used)\n",
                    vector,
                    w,
                    certificate.len()
                ),
                SpanResult::NotContained { residue } => {
                    format!("NOT derivable at weight {}; residue: {}\n", w, residue)
                }
            };
            Ok(Outcome {
                text,
                json: json!({
                    "command": "formal.derive",
                    "config": {"target": target.name(), "weight": w},
                    "result": set.certificate_json(&vector, &result),
                }),
                code: verdict(derived),
            })
        }
        FormalCmd::Welldefined { weight } => {
            let set = RelationSet::build(weight);
            let report = welldefined_check(weight, &set)?;
            let ok = report.ok();
            Ok(Outcome {
                text: format!(
                    "double zeta -> double Eisenstein map at weight {}: {} ({} relations checked)\n",
                    weight,
                    if ok { "well-defined" } else { "NOT well-defined" },
                    report.cases.len()
                ),
                json: json!({
                    "command": "formal.welldefined",
                    "config": {"weight": weight},
                    "result": report.to_json(),
                }),
                code: verdict(ok),
            })
        }
        FormalCmd::Qdsh { weight } => {
            let set = RelationSet::build(weight);
            let report = qdsh_consistency(weight, &set)?;
            let ok = report.ok();
            Ok(Outcome {
                text: format!(
                    "generating-series relations at weight {}: {} (ranks {}/{}/{})\n",
                    weight,
                    if ok { "spans match" } else { "SPANS DIFFER" },
                    report.rank_extracted,
                    report.rank_relations,
                    report.rank_union
                ),
                json: json!({
                    "command": "formal.qdsh",
                    "config": {"weight": weight},
                    "result": report.to_json(),
                }),
                code: verdict(ok),
            })
        }
    }
}
