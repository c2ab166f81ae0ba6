mod expr;

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use expr::parse_expression;
use virasoro_core::cohomology::{preset, CohRing, CurveData};
use virasoro_core::correspondence::{c_bullet, c_bullet_heisenberg, gw_predict, intertwine_check_with};
use virasoro_core::exactmath::QRational;
use virasoro_core::gw_algebra::Conventions;
use virasoro_core::hilbert_surface::composition_check;
use virasoro_core::pt_algebra::{apply_virasoro, bracket_normalize, GenBasis, PtElement, PtVirasoro};
use virasoro_core::series_data::{
    apply_errata, bundled_table, evaluate_bracket, functional_symmetry_scan, load_table, p3_deg1_errata,
    verify_virasoro_relation, virasoro_sweep, SeriesTable,
};
use virasoro_core::vertex::vertex_verify;

#[derive(Parser)]
#[command(name = "virasoro", about = "Exact Virasoro constraints and GW/PT descendent correspondence checks")]
struct Cli {
    /// Ring preset (p3, p2, p1xp1, p2xp1, p1xp1xp1) or a JSON ring file.
    #[arg(long, global = true, default_value = "p3")]
    ring: String,
    /// Series table (JSON lines); the bundled P3 degree-1 table when omitted.
    #[arg(long, global = true)]
    table: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Basis {
    Ch,
    Tch,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Op {
    L,
    Lcal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Conv {
    Literal,
    Vacuum,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expand an element in the ch or tch basis.
    Expand {
        expr: String,
        #[arg(long, value_enum, default_value_t = Basis::Ch)]
        basis: Basis,
    },
    /// Apply L_k^PT or the calligraphic operator to an element.
    VirasoroApply {
        #[arg(short, allow_hyphen_values = true)]
        k: i64,
        expr: String,
        #[arg(long, value_enum, default_value_t = Op::Lcal)]
        op: Op,
        /// Apply the bracket rules for the line class (P3 only).
        #[arg(long)]
        normalize: bool,
    },
    /// The GW/PT transformation C• of a PT element.
    Correspond {
        expr: String,
        /// Print in Heisenberg generators instead of tau.
        #[arg(long)]
        heisenberg: bool,
    },
    /// Check C• L_k^PT = (iu)^{-k} Ltilde_k^GW C• on an element.
    Intertwine {
        #[arg(short, allow_hyphen_values = true)]
        k: i64,
        expr: String,
        #[arg(long, value_enum, default_value_t = Conv::Literal)]
        conventions: Conv,
    },
    /// Degree-1 bracket of a P3 element, by table lookup.
    Bracket { expr: String },
    /// Verify Virasoro relations against the table.
    Verify {
        /// Sweep all covered (k, D) with k in -1..=kmax.
        #[arg(long)]
        all: bool,
        #[arg(short, allow_hyphen_values = true)]
        k: Option<i64>,
        expr: Option<String>,
        #[arg(long, default_value_t = 2)]
        kmax: i64,
        /// Apply the recorded table corrections first.
        #[arg(long)]
        errata: bool,
    },
    /// Compare the vertex-operator residues with the C° formulas.
    VertexVerify {
        #[arg(long, default_value_t = 6)]
        k1: u32,
        #[arg(long, default_value_t = 6)]
        k2: u32,
        #[arg(long, default_value_t = 3)]
        k3: u32,
    },
    /// Check the surface operator against the PT operator on S x P1.
    HilbertCheck {
        #[arg(long, default_value = "p1xp1")]
        surface: String,
        #[arg(long, default_value_t = 3)]
        kmax: i64,
        #[arg(long, default_value_t = 2)]
        max_size: usize,
        #[arg(long, default_value_t = 8)]
        max_index: u32,
    },
    /// Predicted GW side of a stationary PT element in degree 1 on P3.
    GwPredict { expr: String },
}

type AnyErr = Box<dyn std::error::Error>;

struct Outcome {
    ok: bool,
    text: String,
    json: Value,
}

fn load_ring(name: &str) -> Result<Arc<CohRing>, AnyErr> {
    if let Ok(r) = preset(name) {
        return Ok(r);
    }
    let text = std::fs::read_to_string(name).map_err(|e| format!("ring `{name}`: {e}"))?;
    Ok(CohRing::from_json(&text)?)
}

fn load_series(path: &Option<String>) -> Result<SeriesTable, AnyErr> {
    Ok(match path {
        Some(p) => load_table(p)?,
        None => bundled_table()?,
    })
}

fn line(ring: &Arc<CohRing>) -> Result<CurveData, AnyErr> {
    if ring.name() != "P3" {
        return Err(format!("brackets need the P3 ring, not {}", ring.name()).into());
    }
    Ok(CurveData::p3_line(ring)?)
}

fn pt(text: &str, ring: &Arc<CohRing>) -> Result<PtElement, AnyErr> {
    Ok(parse_expression(text, ring)?.to_pt(ring)?)
}

fn qrat(q: &QRational) -> String {
    q.fmt_in("q")
}

fn run(cli: &Cli) -> Result<Outcome, AnyErr> {
    let ring = load_ring(&cli.ring)?;
    Ok(match &cli.cmd {
        Cmd::Expand { expr, basis } => {
            let parsed = parse_expression(expr, &ring)?;
            let s = if parsed.is_gw() {
                parsed.to_gw(&ring)?.to_string()
            } else {
                let d = parsed.to_pt(&ring)?;
                match basis {
                    Basis::Ch => d.to_string(),
                    Basis::Tch => d.to_basis(GenBasis::Tch).to_string(),
                }
            };
            Outcome { ok: true, text: s.clone(), json: json!({ "result": s }) }
        }
        Cmd::VirasoroApply { k, expr, op, normalize } => {
            let d = pt(expr, &ring)?;
            let which = match op {
                Op::L => PtVirasoro::L,
                Op::Lcal => PtVirasoro::Lcal,
            };
            let mut out = apply_virasoro(*k, &d, which)?;
            if *normalize {
                out = bracket_normalize(&out, &line(&ring)?);
            }
            let s = out.to_string();
            Outcome { ok: true, text: s.clone(), json: json!({ "k": k, "result": s }) }
        }
        Cmd::Correspond { expr, heisenberg } => {
            let d = pt(expr, &ring)?;
            let s = if *heisenberg { c_bullet_heisenberg(&d)?.to_string() } else { c_bullet(&d)?.to_string() };
            Outcome { ok: true, text: s.clone(), json: json!({ "result": s }) }
        }
        Cmd::Intertwine { k, expr, conventions } => {
            let d = pt(expr, &ring)?;
            let conv = match conventions {
                Conv::Literal => Conventions::LITERAL,
                Conv::Vacuum => Conventions::VACUUM,
            };
            let rep = intertwine_check_with(*k, &d, conv)?;
            let text = if rep.ok {
                format!("ok: k={k} D={d}")
            } else {
                format!("FAIL: k={k} D={d}\n  lhs: {}\n  rhs: {}\n  difference: {}", rep.lhs, rep.rhs, rep.difference)
            };
            let json = json!({
                "k": k, "d": d.to_string(), "ok": rep.ok,
                "lhs": rep.lhs.to_string(), "rhs": rep.rhs.to_string(), "difference": rep.difference.to_string(),
            });
            Outcome { ok: rep.ok, text, json }
        }
        Cmd::Bracket { expr } => {
            let d = pt(expr, &ring)?;
            let v = evaluate_bracket(&d, &load_series(&cli.table)?, &line(&ring)?)?;
            Outcome { ok: true, text: qrat(&v), json: json!({ "d": d.to_string(), "value": qrat(&v) }) }
        }
        Cmd::Verify { all, k, expr, kmax, errata } => {
            let beta = line(&ring)?;
            let mut table = load_series(&cli.table)?;
            if *errata {
                table = apply_errata(&table, &p3_deg1_errata());
            }
            match (all, k, expr) {
                (true, _, _) => verify_all(&ring, &table, &beta, *kmax)?,
                (false, Some(k), Some(e)) => {
                    let d = pt(e, &ring)?;
                    let v = verify_virasoro_relation(*k, &d, &table, &beta)?;
                    let ok = v.is_zero();
                    let text = format!("{}: <L_{k}({d})> = {}", if ok { "ok" } else { "FAIL" }, qrat(&v));
                    Outcome { ok, text, json: json!({ "k": k, "d": d.to_string(), "value": qrat(&v), "ok": ok }) }
                }
                _ => return Err("verify needs --all or both -k and an expression".into()),
            }
        }
        Cmd::VertexVerify { k1, k2, k3 } => {
            let rep = vertex_verify(*k1, *k2, *k3)?;
            let ok = rep.ok();
            let mut text = format!(
                "{}: one-point {} two-point {} three-point {} (r^1 vanishes: {}, r^2 t<=0 vanishes: {})",
                if ok { "ok" } else { "FAIL" },
                rep.one_point_checked,
                rep.two_point_checked,
                rep.three_point_checked,
                rep.r1_vanishes,
                rep.r2_low_t_vanishes
            );
            for m in &rep.mismatches {
                text.push_str(&format!("\n  {m}"));
            }
            let json = json!({
                "ok": ok,
                "one_point": rep.one_point_checked,
                "two_point": rep.two_point_checked,
                "three_point": rep.three_point_checked,
                "r1_vanishes": rep.r1_vanishes,
                "r2_low_t_vanishes": rep.r2_low_t_vanishes,
                "mismatches": rep.mismatches.iter().map(|m| json!({
                    "family": m.family, "index": m.index,
                    "computed": m.computed.to_string(), "expected": m.expected.to_string(),
                })).collect::<Vec<_>>(),
            });
            Outcome { ok, text, json }
        }
        Cmd::HilbertCheck { surface, kmax, max_size, max_index } => {
            let s = load_ring(surface)?;
            let mut ok = true;
            let mut lines = Vec::new();
            let mut recs = Vec::new();
            for k in -1..=*kmax {
                let rep = composition_check(k, &s, *max_size, *max_index)?;
                ok &= rep.ok();
                lines.push(format!(
                    "{}: k={k} surface={} monomials={}",
                    if rep.ok() { "ok" } else { "FAIL" },
                    rep.surface,
                    rep.checked
                ));
                lines.extend(rep.mismatches.iter().map(|m| format!("  {m}")));
                recs.push(json!({
                    "k": k, "surface": rep.surface, "checked": rep.checked, "ok": rep.ok(),
                    "mismatches": rep.mismatches.iter().map(|m| json!({
                        "input": m.input.to_string(), "pt_side": m.pt_side.to_string(),
                        "surface_side": m.surface_side.to_string(),
                    })).collect::<Vec<_>>(),
                }));
            }
            Outcome { ok, text: lines.join("\n"), json: json!({ "ok": ok, "levels": recs }) }
        }
        Cmd::GwPredict { expr } => {
            let d = pt(expr, &ring)?;
            let table = load_series(&cli.table)?;
            let p = gw_predict(&d, &line(&ring)?, Some(&table))?;
            let json = json!({
                "d": d.to_string(),
                "q_exponent": p.q_exponent.to_string(),
                "pt_series": p.pt_series.as_ref().map(qrat),
                "pt_note": p.pt_note,
                "gw": p.gw.to_string(),
            });
            Outcome { ok: true, text: p.to_string(), json }
        }
    })
}

fn verify_all(ring: &Arc<CohRing>, table: &SeriesTable, beta: &CurveData, kmax: i64) -> Result<Outcome, AnyErr> {
    let ks: Vec<i64> = (-1..=kmax).collect();
    let rep = virasoro_sweep(ring, table, beta, &ks)?;
    let sym = functional_symmetry_scan(table);
    let asym: Vec<String> = sym.iter().filter(|(_, p)| p.is_none()).map(|(k, _)| k.to_string()).collect();
    let fails = rep.failures();
    let ok = fails.is_empty() && asym.is_empty();
    let mut text = format!(
        "{}: {} relations ({} nontrivial, {} uncovered), {} nonzero; {} rows, {} without q -> 1/q symmetry",
        if ok { "ok" } else { "FAIL" },
        rep.results.len(),
        rep.nontrivial(),
        rep.uncovered,
        fails.len(),
        sym.len(),
        asym.len()
    );
    for f in &fails {
        text.push_str(&format!("\n  k={} D={}: {}", f.k, f.d, qrat(&f.value)));
    }
    for a in &asym {
        text.push_str(&format!("\n  no symmetry: {a}"));
    }
    let json = json!({
        "ok": ok,
        "relations": rep.results.len(),
        "nontrivial": rep.nontrivial(),
        "uncovered": rep.uncovered,
        "failures": fails.iter().map(|f| json!({ "k": f.k, "d": f.d.to_string(), "value": qrat(&f.value) })).collect::<Vec<_>>(),
        "rows": sym.len(),
        "asymmetric_rows": asym,
    });
    Ok(Outcome { ok, text, json })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            match cli.format {
                Format::Text => println!("{}", o.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&o.json).expect("serializable")),
            }
            if o.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            match cli.format {
                Format::Text => eprintln!("error: {e}"),
                Format::Json => println!("{}", json!({ "ok": false, "error": e.to_string() })),
            }
            ExitCode::from(2)
        }
    }
}
