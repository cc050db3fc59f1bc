use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use lorentz_core::gallery::{parse_item, standard_items, GalleryItem};
use lorentz_core::lab::checks::poincare_ratio;
use lorentz_core::lab::suites::item_p;
use lorentz_core::lab::{format_number, run_suite, summarize, to_csv, to_jsonl, witness_strict_inclusion, Suite, Verdict};
use lorentz_core::norms::{classify_convergence, quasinorm, starstar_norm, Convergence};
use lorentz_core::rearrangement::Profile;
use lorentz_core::{Exponent, ExponentPair, LabError, NormValue};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Axis, Format, Functional, RunConfig};
use crate::CliError;

/// Rendered output and whether every check passed.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Outcome {
        Outcome { text, passed: true }
    }
}

/// `12`-decimal number or `INFINITE(REASON)`.
pub fn show(v: NormValue) -> String {
    match v {
        NormValue::Finite(x) => format_number(x),
        NormValue::Infinite(r) => format!("INFINITE({r})"),
    }
}

fn show_exponent(q: Exponent) -> String {
    match q {
        Exponent::Finite(v) => format_number(v),
        Exponent::Infinity => "inf".into(),
    }
}

/// A functional's value: a norm, or a ratio that is undefined when the
/// gradient norm is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    Norm(NormValue),
    Ratio(Option<f64>),
}

impl Evaluation {
    pub fn render(self) -> String {
        match self {
            Evaluation::Norm(v) => show(v),
            Evaluation::Ratio(Some(x)) => format_number(x),
            Evaluation::Ratio(None) => "UNDEFINED".into(),
        }
    }
}

fn profile_for(item: &GalleryItem, functional: Functional) -> Result<Profile, CliError> {
    let prof = match functional {
        Functional::Gradient => item.gradient_profile()?,
        _ => item.function_profile()?,
    };
    prof.ok_or_else(|| LabError::Unsupported(format!("{} has no exact rearrangement", item.id())).into())
}

pub fn evaluate(item: &GalleryItem, pq: &ExponentPair, functional: Functional, cfg: &RunConfig) -> Result<Evaluation, CliError> {
    Ok(match functional {
        Functional::Quasinorm | Functional::Gradient => {
            Evaluation::Norm(quasinorm(&profile_for(item, functional)?, pq, &cfg.quad)?)
        }
        Functional::Starstar => Evaluation::Norm(starstar_norm(&profile_for(item, functional)?, pq, &cfg.quad)?),
        Functional::PoincareRatio => Evaluation::Ratio(poincare_ratio(item, pq, &cfg.quad)?),
    })
}

/// `FINITE`/`INFINITE` from the analytic test, `-` where it does not apply.
fn expected(item: &GalleryItem, pq: &ExponentPair, functional: Functional) -> Result<String, CliError> {
    if functional == Functional::PoincareRatio {
        return Ok("-".into());
    }
    Ok(match classify_convergence(&profile_for(item, functional)?, pq) {
        Ok(Convergence::FiniteExpected) => "FINITE".into(),
        Ok(Convergence::InfiniteExpected(_)) => "INFINITE".into(),
        Err(LabError::Unsupported(_)) => "-".into(),
        Err(e) => return Err(e.into()),
    })
}

fn timestamp(no_timestamp: bool) -> Option<u64> {
    if no_timestamp {
        return None;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

fn document(cfg: &RunConfig, stamp: Option<u64>, body: Value) -> Result<String, CliError> {
    let mut doc = json!({ "config": cfg });
    if let Some(t) = stamp {
        doc["generated_at"] = json!(t);
    }
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| LabError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in std::iter::once(headers).chain(rows.iter().map(|r| r.as_slice())) {
        out.push_str(&line.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn table(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for line in std::iter::once(headers).chain(rows.iter().map(|r| r.as_slice())) {
        let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn records(headers: &[String], rows: &[Vec<String>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| Value::Object(headers.iter().cloned().zip(r.iter().map(|c| json!(c))).collect()))
            .collect(),
    )
}

pub fn norm(cfg: &RunConfig, id: &str, p: f64, q: Exponent, functional: Functional, no_ts: bool) -> Result<Outcome, CliError> {
    let item = parse_item(id)?;
    let pq = ExponentPair::new(p, q)?;
    let value = evaluate(&item, &pq, functional, cfg)?;
    Ok(Outcome::ok(match cfg.format {
        Format::Pretty => format!("{}\n", value.render()),
        Format::Csv => csv(
            &["item", "functional", "p", "q", "value"].map(String::from),
            &[vec![item.id(), functional_name(functional), format_number(p), show_exponent(q), value.render()]],
        ),
        Format::Json => document(
            cfg,
            timestamp(no_ts),
            json!({ "item": item.id(), "functional": functional, "value": value.render() }),
        )?,
    }))
}

fn functional_name(f: Functional) -> String {
    serde_json::to_value(f).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

pub fn witness(cfg: &RunConfig, p: f64, q1: f64, q2: Exponent, n: usize, r: f64, no_ts: bool) -> Result<Outcome, CliError> {
    if Exponent::from(q1) >= q2 {
        return Err(CliError::Usage(format!("need q1 < q2, got q1={q1}, q2={q2}")));
    }
    let b = witness_strict_inclusion(p, q1, q2, n, r, &cfg.quad)?;
    let closed = b.closed_form_q2.map_or("-".to_string(), show);
    let q1s = format_number(q1);
    let q2s = show_exponent(q2);
    let rows = vec![
        vec![b.function_id.clone(), q1s.clone(), show(b.function_q1)],
        vec![b.function_id.clone(), q2s.clone(), show(b.function_q2)],
        vec![b.gradient_id.clone(), q1s, show(b.gradient_q1)],
        vec![b.gradient_id.clone(), q2s, show(b.gradient_q2)],
    ];
    let headers = ["item", "q", "norm"].map(String::from);
    let text = match cfg.format {
        Format::Pretty => {
            let mut s = format!("alpha = {}\n", format_number(b.alpha));
            s.push_str(&table(&headers, &rows));
            s.push_str(&format!("closed form at q2 = {closed}\n"));
            let growth: Vec<String> = b.head_integrals.windows(2).map(|w| format_number(w[1] / w[0])).collect();
            s.push_str(&format!("head growth at q1 = [{}]\n", growth.join(", ")));
            s.push_str(&format!("split = {}\n", if b.splits() { "PASS" } else { "FAIL" }));
            s
        }
        Format::Csv => csv(&headers, &rows),
        Format::Json => document(
            cfg,
            timestamp(no_ts),
            json!({ "witness": b, "closed_form_q2": closed, "split": b.splits() }),
        )?,
    };
    Ok(Outcome { text, passed: b.splits() })
}

pub fn verify(cfg: &RunConfig, suite: Suite, out_dir: &Path, no_ts: bool) -> Result<Outcome, CliError> {
    let reports = run_suite(suite, cfg.seed, &cfg.quad)?;
    let summary = summarize(&reports);
    fs::create_dir_all(out_dir)?;
    let jsonl = out_dir.join(format!("{}.jsonl", suite.name()));
    let csv_path = out_dir.join(format!("{}.csv", suite.name()));
    fs::write(&jsonl, to_jsonl(&reports)?)?;
    fs::write(&csv_path, to_csv(&reports))?;
    let stamp = timestamp(no_ts);
    let failures: Vec<_> = reports.iter().filter(|r| r.verdict == Verdict::Fail).collect();
    let text = match cfg.format {
        Format::Pretty => {
            let mut s = format!("suite {} seed {}\n", suite.name(), cfg.seed);
            if let Some(t) = stamp {
                s.push_str(&format!("generated_at {t}\n"));
            }
            s.push_str(&format!("PASS {}  FAIL {}  SKIPPED {}\n", summary.pass, summary.fail, summary.skipped));
            for r in &failures {
                s.push_str(&format!(
                    "FAIL {} {} lhs={} rhs={}\n",
                    r.check_id,
                    r.params_string(),
                    format_number(r.lhs),
                    format_number(r.rhs)
                ));
            }
            s.push_str(&format!("wrote {} and {}\n", jsonl.display(), csv_path.display()));
            s
        }
        Format::Csv => to_csv(&reports),
        Format::Json => document(
            cfg,
            stamp,
            json!({
                "suite": suite.name(),
                "summary": summary,
                "failures": failures,
                "files": { "jsonl": jsonl, "csv": csv_path },
            }),
        )?,
    };
    Ok(Outcome { text, passed: summary.fail == 0 })
}

/// Id template and default parameters of a bare family name.
fn family_template(family: &str) -> Option<(&'static str, &'static [(&'static str, &'static str)])> {
    Some(match family {
        "u_slice" => ("u_slice(r={r},alpha={alpha},p={p},n={n})", &[("r", "1"), ("alpha", "1"), ("p", "2"), ("n", "1")]),
        "u_radial" => ("u_radial(r={r},alpha={alpha},n={n},p={p})", &[("r", "1"), ("alpha", "1"), ("n", "2"), ("p", "2")]),
        "v" => ("v(r={r},alpha={alpha},n={n},p={p})", &[("r", "1"), ("alpha", "1"), ("n", "2"), ("p", "3")]),
        "power_singularity" => ("power_singularity(r={r},n={n},p={p})", &[("r", "1"), ("n", "2"), ("p", "2")]),
        "up" => ("up(n={n},p={p},r={r})", &[("n", "2"), ("p", "4"), ("r", "1")]),
        _ => return None,
    })
}

fn placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(i) = rest.find('{') {
        let Some(j) = rest[i..].find('}') else { break };
        out.push(rest[i + 1..i + j].to_string());
        rest = &rest[i + j + 1..];
    }
    out
}

/// Cartesian product of the axes, first axis slowest.
fn grid_points(axes: &[Axis]) -> Vec<Vec<&str>> {
    let mut points: Vec<Vec<&str>> = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|pt| {
                axis.values.iter().map(move |v| {
                    let mut next = pt.clone();
                    next.push(v.as_str());
                    next
                })
            })
            .collect();
    }
    points
}

pub fn sweep(cfg: &RunConfig, family: &str, axes: &[Axis], functional: Functional, no_ts: bool) -> Result<Outcome, CliError> {
    let (template, defaults) = match family_template(family) {
        Some((t, d)) => (t.to_string(), d.to_vec()),
        None if family.contains('(') => (family.to_string(), Vec::new()),
        None => return Err(CliError::Usage(format!("unknown family {family:?}"))),
    };
    let keys = placeholders(&template);
    let mut seen = Vec::new();
    for a in axes {
        if seen.contains(&a.key) {
            return Err(CliError::Usage(format!("grid key {} given twice", a.key)));
        }
        if a.key != "q" && a.key != "p" && !keys.contains(&a.key) {
            return Err(CliError::Usage(format!("grid key {} matches no parameter", a.key)));
        }
        seen.push(a.key.clone());
    }
    for k in &keys {
        if !seen.contains(k) && !defaults.iter().any(|(d, _)| d == k) {
            return Err(CliError::Usage(format!("no value for {{{k}}}")));
        }
    }
    let shown: Vec<bool> = axes.iter().map(|a| a.key != "p" && a.key != "q").collect();
    let mut headers: Vec<String> = axes.iter().zip(&shown).filter(|(_, s)| **s).map(|(a, _)| a.key.clone()).collect();
    headers.extend(["item", "p", "q", "value", "expected"].map(String::from));
    let mut rows = Vec::new();
    for point in grid_points(axes) {
        let mut values: BTreeMap<&str, &str> = defaults.iter().copied().collect();
        for (a, v) in axes.iter().zip(&point) {
            values.insert(a.key.as_str(), v);
        }
        let mut id = template.clone();
        for k in &keys {
            id = id.replace(&format!("{{{k}}}"), values[k.as_str()]);
        }
        let item = parse_item(&id)?;
        let p = match values.get("p") {
            Some(v) => v.parse::<f64>().map_err(|_| CliError::Usage(format!("bad p {v:?}")))?,
            None => item_p(&item).ok_or_else(|| CliError::Usage(format!("set p for {id}")))?,
        };
        let q: Exponent = values.get("q").copied().unwrap_or("inf").parse()?;
        let pq = ExponentPair::new(p, q)?;
        let mut row: Vec<String> = point.iter().zip(&shown).filter(|(_, s)| **s).map(|(v, _)| v.to_string()).collect();
        row.push(item.id());
        row.push(format_number(p));
        row.push(show_exponent(q));
        row.push(evaluate(&item, &pq, functional, cfg)?.render());
        row.push(expected(&item, &pq, functional)?);
        rows.push(row);
    }
    Ok(Outcome::ok(match cfg.format {
        Format::Pretty => table(&headers, &rows),
        Format::Csv => csv(&headers, &rows),
        Format::Json => document(cfg, timestamp(no_ts), json!({ "rows": records(&headers, &rows) }))?,
    }))
}

#[derive(Serialize)]
struct GalleryRow {
    id: String,
    n: usize,
    measure: f64,
    p: f64,
    norm_p_inf: String,
    gradient_norm_p_inf: String,
}

pub fn gallery(cfg: &RunConfig, no_ts: bool) -> Result<Outcome, CliError> {
    let headers = ["id", "n", "measure", "p", "norm(p,inf)", "gradient_norm(p,inf)"].map(String::from);
    let mut rows = Vec::new();
    for item in standard_items()? {
        let p = item_p(&item).ok_or_else(|| LabError::Internal(format!("{} has no exponent", item.id())))?;
        let pq = ExponentPair::new(p, Exponent::Infinity)?;
        let closed = |v: Option<NormValue>| v.map_or("-".to_string(), show);
        rows.push(GalleryRow {
            id: item.id(),
            n: item.dim(),
            measure: item.measure(),
            p,
            norm_p_inf: closed(item.closed_form_norm(&pq)),
            gradient_norm_p_inf: closed(item.closed_form_gradient_norm(&pq)),
        });
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.id.clone(),
                r.n.to_string(),
                format_number(r.measure),
                format_number(r.p),
                r.norm_p_inf.clone(),
                r.gradient_norm_p_inf.clone(),
            ]
        })
        .collect();
    Ok(Outcome::ok(match cfg.format {
        Format::Pretty => table(&headers, &cells),
        Format::Csv => csv(&headers, &cells),
        Format::Json => document(cfg, timestamp(no_ts), json!({ "items": rows }))?,
    }))
}
