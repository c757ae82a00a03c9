use std::f64::consts::PI;

use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use torus_spec::bounds::{
    conformal_sandwich, laplace_dirac_gap_bound, limit_closed_form, limit_quotient, limit_test_function,
    positivity_upper_bound, potential_mean_bound, rayleigh_upper_dirac, rayleigh_upper_laplace, TestFunction,
};
use torus_spec::metric::{ConformalMetric, MetricSpec};
use torus_spec::spectral::{dirac_l0_closed_form, spinor_square_expansion, SLProblem};
use torus_spec::trigcalc::TrigPoly;
use torus_spec::variations::{
    corollary_residual, first_variation, fourth_variation_dirac_with, is_c3_free, second_variation_branches,
    FourthVariationFormula, VariationReport,
};
use torus_spec::{Error, FOUR_PI_SQ};

use crate::args::{Common, ERange, Family, Format};
use crate::output::{cell, num, opt_cell, opt_num, SCHEMA};
use crate::solve::{mode_json, Branches, Solved, Solver};
use crate::CliError;

const PI2: f64 = PI * PI;

/// A rendered command result.
pub enum Output {
    Json(Value),
    Csv { header: Vec<&'static str>, rows: Vec<Vec<String>> },
}

fn parse_metric(s: &str, grid: usize) -> Result<(MetricSpec, ConformalMetric), CliError> {
    let spec: MetricSpec = s.parse()?;
    let m = spec.build(grid)?;
    Ok((spec, m))
}

fn header(command: &str, common: &Common) -> Map<String, Value> {
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(SCHEMA));
    doc.insert("command".into(), json!(command));
    doc.insert("grid".into(), json!(common.grid));
    doc.insert("truncation".into(), json!(common.trunc.to_string()));
    doc
}

fn solver(common: &Common) -> Solver {
    Solver { truncation: common.trunc }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// flat, cos:N:E, expfam:E or fourier:[a0,a1,b1,...].
    #[arg(long, allow_hyphen_values = true)]
    pub metric: String,
    /// Laplace weights k to list.
    #[arg(long = "laplace-k", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0, 1])]
    pub laplace_k: Vec<i32>,
    /// Dirac weights l to list.
    #[arg(long = "dirac-l", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1, -1])]
    pub dirac_l: Vec<i32>,
    /// Eigenvalues per weight.
    #[arg(long, default_value_t = 4)]
    pub count: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn spectrum(a: &SpectrumArgs) -> Result<Output, CliError> {
    let (spec, m) = parse_metric(&a.metric, a.common.grid)?;
    let s = solver(&a.common);
    let mut csv = Vec::new();
    let mut row = |op: &str, index: i32, n: usize, value: f64, residual: Option<f64>, flagged: bool, trunc: Option<usize>| {
        csv.push(vec![
            op.to_string(),
            index.to_string(),
            n.to_string(),
            cell(value),
            opt_cell(residual),
            flagged.to_string(),
            trunc.map_or_else(String::new, |t| t.to_string()),
        ]);
    };

    let mut laplace = Vec::new();
    for &k in &a.laplace_k {
        let (modes, n) = s.solve(SLProblem::laplace(&m, k, 32), a.count)?;
        for (i, x) in modes.iter().enumerate() {
            row("laplace", k, i, x.value, Some(x.residual), !x.residual_ok(), Some(n));
        }
        let list: Vec<Value> = modes.iter().map(|x| mode_json(x, n)).collect();
        laplace.push(json!({ "k": k, "eigenvalues": list }));
    }

    let closed: Vec<f64> = (1..=a.count as u32).map(|n| dirac_l0_closed_form(&m, n)).collect();
    for (i, &v) in closed.iter().enumerate() {
        row("dirac_l0_closed_form", 0, i + 1, v, None, false, None);
    }
    let mut dirac_l = Vec::new();
    for &l in &a.dirac_l {
        match s.solve(SLProblem::dirac(&m, l, 32), a.count) {
            Ok((modes, n)) => {
                for (i, x) in modes.iter().enumerate() {
                    row("dirac", l, i, x.value, Some(x.residual), !x.residual_ok(), Some(n));
                }
                let list: Vec<Value> = modes.iter().map(|x| mode_json(x, n)).collect();
                dirac_l.push(json!({ "l": l, "eigenvalues": list }));
            }
            Err(err @ Error::DegenerateMetric(_)) => {
                dirac_l.push(json!({ "l": l, "unavailable": err.to_string() }));
            }
            Err(err) => return Err(err.into()),
        }
    }

    let lap0 = s.lowest_positive(SLProblem::laplace(&m, 0, 32), 2)?;
    let lap1 = s.lowest(SLProblem::laplace(&m, 1, 32))?;
    let (first_lap, first_k) = if lap1.value() < lap0.value() { (lap1.value(), 1) } else { (lap0.value(), 0) };
    let mut first_dir = (closed[0], 0);
    if !m.is_degenerate() {
        for l in [1, -1] {
            let v = s.lowest(SLProblem::dirac(&m, l, 32))?.value();
            if v < first_dir.0 {
                first_dir = (v, l);
            }
        }
    }

    if a.common.format == Some(Format::Csv) {
        return Ok(Output::Csv {
            header: vec!["operator", "index", "n", "value", "residual", "flagged", "truncation"],
            rows: csv,
        });
    }
    let mut doc = header("spectrum", &a.common);
    doc.insert("metric".into(), json!(spec.to_string()));
    doc.insert("volume".into(), num(m.volume()));
    doc.insert("symmetric".into(), json!(m.is_symmetric()));
    doc.insert("degenerate".into(), json!(m.is_degenerate()));
    doc.insert("laplace".into(), json!(laplace));
    doc.insert(
        "dirac".into(),
        json!({ "l0_closed_form": closed.iter().map(|&v| num(v)).collect::<Vec<_>>(), "l": dirac_l }),
    );
    doc.insert(
        "first_positive".into(),
        json!({
            "laplace": { "value": num(first_lap), "k": first_k },
            "dirac": { "value": num(first_dir.0), "l": first_dir.1 },
        }),
    );
    if m.is_symmetric() {
        let b = Branches::compute(&m, &s, true)?;
        doc.insert("spectral_functions".into(), branches_json(&b));
    }
    Ok(Output::Json(Value::Object(doc)))
}

fn branches_json(b: &Branches) -> Value {
    json!({
        "mu1": b.mu1.to_json(),
        "mu2": b.mu2.to_json(),
        "mu3": b.mu3.to_json(),
        "lam1sq": num(b.lam_l0),
        "lam2sq": b.lam2sq.as_ref().map_or(Value::Null, Solved::to_json),
        "lam3sq": b.lam3sq.as_ref().map_or(Value::Null, Solved::to_json),
    })
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// cos:N or expfam.
    #[arg(long)]
    pub family: Option<String>,
    /// First-order direction of h⁴ (e.g. cos:2, fourier:[0,0.5]).
    #[arg(long = "H")]
    pub h: Option<String>,
    /// Second-order direction of h⁴.
    #[arg(long = "G")]
    pub g: Option<String>,
    /// start:stop:steps, endpoints included.
    #[arg(long = "E-range", allow_hyphen_values = true)]
    pub e_range: Option<ERange>,
    /// Explicit comma-separated E values.
    #[arg(long = "E", value_delimiter = ',', allow_hyphen_values = true)]
    pub e: Vec<f64>,
    /// Skip the Dirac problems.
    #[arg(long)]
    pub laplace_only: bool,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub common: Common,
}

const SWEEP_COLUMNS: [&str; 17] = [
    "E",
    "status",
    "mu1",
    "mu2",
    "mu3",
    "lam_l0",
    "lam2sq",
    "lam3sq",
    "sandwich_lower",
    "sandwich_upper",
    "rayleigh_laplace",
    "rayleigh_dirac",
    "gap_bound",
    "positivity_bound",
    "potential_mean",
    "max_rel_residual",
    "flagged",
];

struct SweepRow {
    e: f64,
    status: String,
    values: [Option<f64>; 14],
    flagged: bool,
}

fn sweep_row(family: &Family, e: f64, a: &SweepArgs) -> SweepRow {
    let fail = |status: String| SweepRow { e, status, values: [None; 14], flagged: false };
    let m = match family.metric(e, a.common.grid) {
        Ok(m) => m,
        Err(err) => return fail(format!("error: {err}")),
    };
    let b = match Branches::compute(&m, &solver(&a.common), !a.laplace_only) {
        Ok(b) => b,
        Err(err) => return fail(format!("error: {err}")),
    };
    let (lo, hi) = conformal_sandwich(&m);
    let s = TrigPoly::sin_mode(1, 1.0);
    let rl = rayleigh_upper_laplace(&m, &s).ok();
    let (rd, gap, pm) = if a.laplace_only {
        (None, None, None)
    } else {
        (
            rayleigh_upper_dirac(&m, TestFunction::Poly(&s)).ok(),
            m.is_symmetric().then(|| laplace_dirac_gap_bound(&m, &b.mu1.mode).ok()).flatten(),
            potential_mean_bound(&m, 1).ok(),
        )
    };
    let pos = if a.laplace_only { None } else { positivity_upper_bound(&m, 1, &limit_test_function(1)).ok() };
    let status = if m.is_degenerate() { "degenerate" } else { "ok" };
    SweepRow {
        e,
        status: status.into(),
        values: [
            Some(b.mu1.value()),
            Some(b.mu2.value()),
            Some(b.mu3.value()),
            Some(b.lam_l0),
            b.lam2sq.as_ref().map(Solved::value),
            b.lam3sq.as_ref().map(Solved::value),
            Some(lo),
            Some(hi).filter(|v| v.is_finite()),
            rl,
            rd,
            gap,
            pos,
            pm,
            Some(b.max_relative_residual()),
        ],
        flagged: b.flagged(),
    }
}

pub fn sweep(a: &SweepArgs) -> Result<Output, CliError> {
    let family = Family::parse(a.family.as_deref(), a.h.as_deref(), a.g.as_deref())?;
    let mut es = a.e.clone();
    if let Some(r) = &a.e_range {
        es.extend(r.values());
    }
    if es.is_empty() {
        return Err(CliError::Input("sweep needs --E or --E-range".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| es.par_iter().map(|&e| sweep_row(&family, e, a)).collect());

    if a.common.format == Some(Format::Json) {
        let list: Vec<Value> = rows
            .iter()
            .map(|r| {
                let mut o = Map::new();
                o.insert("E".into(), num(r.e));
                o.insert("status".into(), json!(r.status));
                for (name, v) in SWEEP_COLUMNS[2..16].iter().zip(r.values) {
                    o.insert((*name).into(), opt_num(v));
                }
                o.insert("flagged".into(), json!(r.flagged));
                Value::Object(o)
            })
            .collect();
        let mut doc = header("sweep", &a.common);
        doc.insert("family".into(), json!(family.label()));
        doc.insert("rows".into(), json!(list));
        return Ok(Output::Json(Value::Object(doc)));
    }
    let rows = rows
        .into_iter()
        .map(|r| {
            let mut out = vec![cell(r.e), r.status];
            out.extend(r.values.iter().map(|&v| opt_cell(v)));
            out.push(r.flagged.to_string());
            out
        })
        .collect();
    Ok(Output::Csv { header: SWEEP_COLUMNS.to_vec(), rows })
}

#[derive(Debug, Clone, Args)]
pub struct VariationsArgs {
    /// cos:N, as an alternative to --H.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long = "H")]
    pub h: Option<String>,
    #[arg(long = "G")]
    pub g: Option<String>,
    /// Orders to report: 1, 2 and/or 4.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2])]
    pub order: Vec<u32>,
    #[command(flatten)]
    pub common: Common,
}

const BRANCHES: [&str; 5] = ["mu1", "mu2", "mu3", "lam1sq", "lam23sq"];

fn values(r: &VariationReport) -> [Option<f64>; 5] {
    [r.mu1, r.mu2, r.mu3, r.lam1sq, r.lam23sq]
}

fn value_json(v: f64) -> Value {
    json!({ "value": num(v), "over_pi2": num(v / PI2) })
}

pub fn variations(a: &VariationsArgs) -> Result<Output, CliError> {
    let (h, g) = match Family::parse(a.family.as_deref(), a.h.as_deref(), a.g.as_deref())? {
        Family::Poly { h, g, .. } => (h, g),
        Family::Exp => return Err(CliError::Input("variations need a polynomial family (--H, --G)".into())),
    };
    let mut reports = Vec::new();
    let mut csv = Vec::new();
    for &order in &a.order {
        match order {
            1 | 2 => {
                let r = if order == 1 { first_variation(&h) } else { second_variation_branches(&h, &g) };
                let r = r.map_err(CliError::hypothesis)?;
                let failing: Vec<&str> =
                    r.hypotheses.iter().filter(|x| !x.holds).map(|x| x.name.as_str()).collect();
                if values(&r).iter().all(Option::is_none) {
                    return Err(CliError::Hypothesis(format!("no branch applies: {}", failing.join("; "))));
                }
                let mut vals = Map::new();
                for (name, v) in BRANCHES.iter().zip(values(&r)) {
                    let (entry, status) = match v {
                        Some(v) => (value_json(v), "ok".to_string()),
                        None => {
                            let why = format!("withheld: {}", failing.join("; "));
                            (json!({ "withheld": why }), why)
                        }
                    };
                    csv.push(vec![order.to_string(), name.to_string(), opt_cell(v), opt_cell(v.map(|x| x / PI2)), status]);
                    vals.insert((*name).into(), entry);
                }
                let hyps: Vec<Value> = r
                    .hypotheses
                    .iter()
                    .map(|x| json!({ "name": x.name, "residual": num(x.residual), "holds": x.holds }))
                    .collect();
                let mut rep = json!({ "order": order, "values": vals, "hypotheses": hyps });
                if order == 2 {
                    rep["corollary_residual"] = opt_num(corollary_residual(&r, &h));
                }
                reports.push(rep);
            }
            4 => {
                if g.max_coeff() != 0.0 {
                    return Err(CliError::Input("the fourth variation is defined for G = 0".into()));
                }
                let printed = fourth_variation_dirac_with(&h, FourthVariationFormula::AsPrinted)
                    .map_err(CliError::hypothesis)?;
                let series = fourth_variation_dirac_with(&h, FourthVariationFormula::Perturbative)
                    .map_err(CliError::hypothesis)?;
                csv.push(vec!["4".into(), "lam3sq".into(), cell(printed), cell(printed / PI2), "as_printed".into()]);
                csv.push(vec!["4".into(), "lam3sq".into(), cell(series), cell(series / PI2), "perturbative".into()]);
                reports.push(json!({
                    "order": 4,
                    "branch": "lam3sq",
                    "value": value_json(printed),
                    "as_printed": value_json(printed),
                    "perturbative": value_json(series),
                    "c3_free": is_c3_free(&h),
                }));
            }
            _ => return Err(CliError::Input(format!("unsupported order {order}; expected 1, 2 or 4"))),
        }
    }
    if a.common.format == Some(Format::Csv) {
        return Ok(Output::Csv { header: vec!["order", "branch", "value", "value_over_pi2", "status"], rows: csv });
    }
    let mut doc = header("variations", &a.common);
    doc.insert("H".into(), json!(h.to_flat()));
    doc.insert("G".into(), json!(g.to_flat()));
    doc.insert("reports".into(), json!(reports));
    Ok(Output::Json(Value::Object(doc)))
}

#[derive(Debug, Clone, Args)]
pub struct SpinorArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub metric: String,
    /// Dirac weight, nonzero.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub l: i32,
    /// Harmonics in the expansion.
    #[arg(long, default_value_t = 8)]
    pub terms: usize,
    /// Also emit MS(t) at this many equispaced points.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

pub fn spinor(a: &SpinorArgs) -> Result<Output, CliError> {
    if a.l == 0 {
        return Err(CliError::Input("spinor needs l ≠ 0".into()));
    }
    let (spec, m) = parse_metric(&a.metric, a.common.grid)?;
    let sol = solver(&a.common).lowest(SLProblem::dirac(&m, a.l, 32))?;
    let exp = spinor_square_expansion(&sol.mode, &m, a.terms)?;
    if a.common.format == Some(Format::Csv) {
        let mut rows = vec![vec!["0".into(), cell(exp.mean()), cell(0.0)]];
        rows.extend((1..=a.terms).map(|n| vec![n.to_string(), cell(exp.cos_coeff(n)), cell(exp.sin_coeff(n))]));
        return Ok(Output::Csv { header: vec!["n", "cos", "sin"], rows });
    }
    let mut doc = header("spinor", &a.common);
    doc.insert("metric".into(), json!(spec.to_string()));
    doc.insert("l".into(), json!(a.l));
    doc.insert("eigenvalue".into(), sol.to_json());
    doc.insert("positive".into(), json!(sol.mode.positive));
    doc.insert(
        "expansion".into(),
        json!({
            "a0": num(exp.mean()),
            "cos": (1..=a.terms).map(|n| num(exp.cos_coeff(n))).collect::<Vec<_>>(),
            "sin": (1..=a.terms).map(|n| num(exp.sin_coeff(n))).collect::<Vec<_>>(),
        }),
    );
    if let Some(k) = a.samples {
        if k == 0 || m.grid() % k != 0 {
            return Err(CliError::Input(format!("--samples must divide the grid size {}", m.grid())));
        }
        let stride = m.grid() / k;
        let pts: Vec<Value> = (0..k)
            .map(|j| {
                let t = j as f64 / k as f64;
                let h = m.h4().values()[j * stride].powf(0.25);
                let series = exp.eval(t).max(0.0);
                json!({ "t": num(t), "h": num(h), "ms": num(h * series.sqrt()) })
            })
            .collect();
        doc.insert("samples".into(), json!(pts));
    }
    Ok(Output::Json(Value::Object(doc)))
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub metric: Option<String>,
    /// Degenerate-limit bound for these Dirac weights.
    #[arg(long = "limit-l", value_delimiter = ',', allow_hyphen_values = true)]
    pub limit_l: Vec<i32>,
    #[command(flatten)]
    pub common: Common,
}

struct BoundRow {
    kind: &'static str,
    value: f64,
    /// Name of the bounded eigenvalue, its value, and whether the bound is an upper one.
    target: &'static str,
    solved: f64,
    upper: bool,
}

impl BoundRow {
    fn holds(&self) -> bool {
        if self.upper {
            self.value >= self.solved - 1e-8
        } else {
            self.value <= self.solved + 1e-8
        }
    }
}

fn metric_bounds(m: &ConformalMetric, b: &Branches) -> Vec<BoundRow> {
    let (lap, dir) = (b.laplace_min(), b.dirac_min());
    let mut out = Vec::new();
    let mut push = |kind, value: f64, target, solved, upper| {
        if value.is_finite() {
            out.push(BoundRow { kind, value, target, solved, upper });
        }
    };
    let (lo, hi) = conformal_sandwich(m);
    push("sandwich_lower", lo, "mu1", lap, false);
    push("sandwich_lower", lo, "lam1sq", dir, false);
    push("sandwich_upper", hi, "mu1", lap, true);
    push("sandwich_upper", hi, "lam1sq", dir, true);
    let s = TrigPoly::sin_mode(1, 1.0);
    if m.is_symmetric() {
        if let Ok(v) = rayleigh_upper_laplace(m, &s) {
            push("rayleigh_laplace", v, "mu1_odd", b.mu1.value(), true);
        }
    }
    if let Ok(v) = rayleigh_upper_dirac(m, TestFunction::Poly(&s)) {
        push("rayleigh_dirac", v, "lam1sq", dir, true);
    }
    if m.is_symmetric() {
        if let Ok(v) = laplace_dirac_gap_bound(m, &b.mu1.mode) {
            push("laplace_dirac_gap", v, "lam1sq", dir, true);
        }
    }
    for (l, target, lam) in [(1, "lam3sq", &b.lam3sq), (-1, "lam2sq", &b.lam2sq)] {
        let Some(lam) = lam else { continue };
        if let Ok(v) = positivity_upper_bound(m, l, &limit_test_function(l)) {
            push(if l == 1 { "positivity_l1" } else { "positivity_l-1" }, v, target, lam.value(), true);
        }
        if let Ok(v) = potential_mean_bound(m, l) {
            push(if l == 1 { "potential_mean_l1" } else { "potential_mean_l-1" }, v, target, lam.value(), true);
        }
    }
    out
}

pub fn bounds(a: &BoundsArgs) -> Result<Output, CliError> {
    if a.metric.is_none() && a.limit_l.is_empty() {
        return Err(CliError::Input("bounds needs --metric and/or --limit-l".into()));
    }
    let mut doc = header("bounds", &a.common);
    let mut csv = Vec::new();
    if let Some(ms) = &a.metric {
        let (spec, m) = parse_metric(ms, a.common.grid)?;
        let b = Branches::compute(&m, &solver(&a.common), true)?;
        let rows = metric_bounds(&m, &b);
        for r in &rows {
            csv.push(vec![r.kind.into(), cell(r.value), r.target.into(), cell(r.solved), r.holds().to_string()]);
        }
        doc.insert("metric".into(), json!(spec.to_string()));
        doc.insert("solved".into(), branches_json(&b));
        doc.insert(
            "bounds".into(),
            json!(rows
                .iter()
                .map(|r| json!({
                    "kind": r.kind,
                    "value": num(r.value),
                    "target": r.target,
                    "solved": num(r.solved),
                    "upper": r.upper,
                    "holds": r.holds(),
                }))
                .collect::<Vec<_>>()),
        );
    }
    let mut limits = Vec::new();
    for &l in &a.limit_l {
        let q = limit_quotient(l, &limit_test_function(l))?;
        let closed = limit_closed_form(l);
        let flat = FOUR_PI_SQ * (l * l) as f64;
        csv.push(vec![format!("limit_l{l}"), cell(q), "flat_value".into(), cell(flat), (closed < flat).to_string()]);
        limits.push(json!({
            "l": l,
            "quotient": num(q),
            "closed_form": num(closed),
            "over_pi2": num(closed / PI2),
            "flat_value": num(flat),
            "below_flat": closed < flat,
        }));
    }
    if !limits.is_empty() {
        doc.insert("limit".into(), json!(limits));
    }
    if a.common.format == Some(Format::Csv) {
        return Ok(Output::Csv { header: vec!["kind", "value", "target", "solved", "holds"], rows: csv });
    }
    Ok(Output::Json(Value::Object(doc)))
}
