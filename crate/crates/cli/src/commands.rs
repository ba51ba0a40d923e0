use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use factorineq::catalog::{self, CatalogError, CheckOptions, EntryReport, ENTRIES, MANIFEST_VERSION};
use factorineq::coeff::{derive_weights, scan_grid, scan_nonnegativity, CoeffSystem, ScanReport, WeightSet};
use factorineq::exprlang::{compile_str, ParamMap};
use factorineq::jets::{Interval, MapRef};
use factorineq::lucas::TCoeffTable;
use factorineq::par::Execution;
use factorineq::specials::{self, SpecialError};
use factorineq::sturm::{self, Positivity, Start, SturmError, SturmProblem};
use factorineq::verify::{test_corpus, verify_corpus, CorpusReport};
use serde_json::json;

use crate::config::{self, constant, parse_pair, parse_params, SpecConfig, Tolerances};
use crate::report::{Record, Report};
use crate::{CatalogCmd, Cli, CliError, CoeffFormat, Command};

/// Largest `n` accepted by `coeffs`; entries stay far below `i128` overflow.
const MAX_TRIANGLE: u32 = 120;

pub(crate) fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let exec: Execution = cli.exec.into();
    match &cli.command {
        Command::Coeffs { max_n, format } => coeffs(cli, out, *max_n, *format),
        Command::Derive { config, grid, out: path } => derive(cli, out, exec, config, *grid, path.as_deref()),
        Command::Verify { config, corpus, seed, out: path } => {
            verify(cli, out, exec, config, *corpus, *seed, path.as_deref())
        }
        Command::Construct { p, g, domain, sigma, ic, params, grid, tol, out: path } => {
            let args = ConstructArgs { p, g, domain, sigma: sigma.as_deref(), ic: ic.as_deref(), params, grid: *grid, tol: *tol };
            construct(cli, out, &args, path.as_deref())
        }
        Command::HiCheck { big_p, r, c, critical, params } => hi_check(cli, out, big_p, r, c.as_deref(), *critical, params),
        Command::Zeros { bessel, g } => zeros(cli, out, bessel.as_deref(), g.as_deref()),
        Command::Catalog { action } => match action {
            CatalogCmd::List => catalog_list(cli, out),
            CatalogCmd::Show { id, params } => catalog_show(cli, out, id, params),
            CatalogCmd::Verify { id, params, corpus, seed, out: path } => {
                catalog_verify(cli, out, exec, id, params, *corpus, *seed, path.as_deref())
            }
        },
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("cannot write {}: {e}", path.display()))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| io_err(path, e))
}

fn put(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

/// Print the report (JSON or text with a header) and return its verdict.
fn emit(cli: &Cli, out: &mut dyn Write, report: &Report, header: &str) -> Result<bool, CliError> {
    if cli.json {
        put(out, &report.to_json())?;
    } else {
        put(out, header)?;
        put(out, &report.to_text())?;
    }
    Ok(report.passed())
}

fn sturm_err(e: SturmError) -> CliError {
    match e {
        SturmError::BadInterval { .. } | SturmError::BadInitialData { .. } | SturmError::Parameters(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Math(other.to_string()),
    }
}

fn special_err(e: SpecialError) -> CliError {
    match e {
        SpecialError::ArgumentRange { .. } | SpecialError::OrderRange { .. } | SpecialError::Parameters(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Math(other.to_string()),
    }
}

fn catalog_err(e: CatalogError) -> CliError {
    match e {
        CatalogError::UnknownEntry(_)
        | CatalogError::UnknownParam { .. }
        | CatalogError::BadParam { .. }
        | CatalogError::Expr(_) => CliError::Usage(e.to_string()),
        CatalogError::Special(s) => special_err(s),
        other => CliError::Math(other.to_string()),
    }
}

/// Shortest round-trip form, switching to exponent notation for very small or large values.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_interval(d: Interval) -> String {
    d.to_string()
}

fn scan_records(report: &mut Report, prefix: &str, n: usize, scan: &ScanReport) {
    for s in &scan.weights {
        let name = format!("{prefix}c_{{{n},{}}} >= 0", s.m);
        let detail = if s.nonnegative {
            format!("min {:.6e} at x = {}", s.min, s.argmin)
        } else {
            format!("negative weight: c_{{{n},{}}}({}) = {:.6e}", s.m, s.argmin, s.min)
        };
        report.push(Record::new(name, s.nonnegative, detail).at(s.argmin, s.min));
    }
    if let Some(f) = scan.failures.first() {
        let detail = format!("{} evaluation failure(s), first at x = {}: {}", scan.failures.len(), f.x, f.message);
        report.push(Record::new(format!("{prefix}weights evaluable"), false, detail).at(f.x, f64::NAN));
    }
}

fn corpus_records(report: &mut Report, prefix: &str, corpus: &CorpusReport) {
    let identity = corpus.reports.iter().all(|r| r.verdicts.identity);
    let inequality = corpus.reports.iter().all(|r| r.verdicts.inequality && r.verdicts.residual_nonnegative);
    report.push(Record::new(
        format!("{prefix}identity on corpus"),
        identity && corpus.failures.is_empty(),
        format!("{} functions, max gap/(1+residual) = {:.3e}", corpus.reports.len(), corpus.max_gap_ratio),
    ));
    report.push(Record::new(
        format!("{prefix}inequality on corpus"),
        inequality,
        format!("min margin = {:.6e}", corpus.min_margin),
    ));
    for f in &corpus.failures {
        report.push(Record::new(format!("{prefix}corpus evaluation"), false, f.clone()));
    }
}

fn coeffs(cli: &Cli, out: &mut dyn Write, max_n: u32, format: CoeffFormat) -> Result<bool, CliError> {
    if max_n > MAX_TRIANGLE {
        return Err(CliError::Usage(format!("--max-n must be at most {MAX_TRIANGLE}")));
    }
    let table = TCoeffTable::build(max_n);
    let mut report = Report::new("coeffs", config::config_hash(&json!({ "max_n": max_n })), None);
    let rows: Vec<Vec<String>> = table.rows().iter().map(|r| r.iter().map(i128::to_string).collect()).collect();
    report.set("max_n", max_n);
    // i128 entries are emitted as decimal strings so no JSON reader loses precision
    report.set("rows", &rows);
    let mismatch = table.first_mismatch();
    report.push(Record::new(
        "recursion matches closed form",
        mismatch.is_none(),
        match mismatch {
            None => format!("all {} rows agree", max_n + 1),
            Some((n, k)) => format!("first disagreement at t_{{{n},{k}}}"),
        },
    ));
    if cli.json || format == CoeffFormat::Json {
        put(out, &report.to_json())?;
        return Ok(report.passed());
    }
    let width = (max_n as usize) / 2 + 1;
    let mut text = String::new();
    match format {
        CoeffFormat::Csv => {
            text.push('n');
            for k in 0..width {
                text.push_str(&format!(",k{k}"));
            }
            text.push('\n');
            for (n, row) in rows.iter().enumerate() {
                text.push_str(&n.to_string());
                for k in 0..width {
                    text.push(',');
                    if let Some(v) = row.get(k) {
                        text.push_str(v);
                    }
                }
                text.push('\n');
            }
        }
        _ => {
            let cell = rows.iter().flatten().map(String::len).max().unwrap_or(1).max(2);
            let nw = max_n.to_string().len().max(1);
            text.push_str(&format!("{:>nw$} |", "n"));
            for k in 0..width {
                text.push_str(&format!(" {:>cell$}", format!("k{k}")));
            }
            text.push('\n');
            for (n, row) in rows.iter().enumerate() {
                text.push_str(&format!("{n:>nw$} |"));
                for v in row {
                    text.push_str(&format!(" {v:>cell$}"));
                }
                text.push('\n');
            }
        }
    }
    put(out, &text)?;
    if let Some((n, k)) = mismatch {
        put(out, &format!("recursion and closed form disagree at t_{{{n},{k}}}\n"))?;
    }
    Ok(report.passed())
}

fn load(path: &Path) -> Result<(SpecConfig, Tolerances, WeightSet), CliError> {
    let cfg = SpecConfig::load(path)?;
    let tol = cfg.tolerances()?;
    let w = derive_weights(&cfg.system()?);
    Ok((cfg, tol, w))
}

fn derive(
    cli: &Cli,
    out: &mut dyn Write,
    exec: Execution,
    path: &Path,
    grid: Option<usize>,
    csv: Option<&Path>,
) -> Result<bool, CliError> {
    let (cfg, tol, w) = load(path)?;
    let points = grid.unwrap_or(tol.scan.points);
    if points < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let hash = config::config_hash(&json!({ "config": cfg, "tolerances": tol, "grid": points }));
    let mut report = Report::new("derive", hash, None);
    let n = w.n();
    let xs = scan_grid(w.domain(), points, tol.scan.margin, w.breakpoints());
    let mut table = String::from("x,lhs");
    for m in 0..n {
        table.push_str(&format!(",c_{n}_{m}"));
    }
    table.push('\n');
    let mut skipped = 0usize;
    for &x in &xs {
        match w.eval_all(x, 0) {
            Ok(v) => {
                table.push_str(&format!("{},{}", num(x), num(v.lhs.value())));
                for c in &v.c {
                    table.push_str(&format!(",{}", num(c.value())));
                }
                table.push('\n');
            }
            Err(_) => skipped += 1,
        }
    }
    let scan = scan_nonnegativity(&w, &tol.scan_spec(exec));
    scan_records(&mut report, "", n, &scan);
    report.set("instance", &cfg);
    report.set("settings", tol);
    report.set("grid_points", xs.len());
    report.set("skipped_points", skipped);
    report.set("scan", &scan);
    let header = format!("derive: n = {n} on {}, {} grid points\n", fmt_interval(w.domain()), xs.len());
    match csv {
        Some(p) => write_file(p, &table)?,
        None if !cli.json => put(out, &table)?,
        None => {}
    }
    emit(cli, out, &report, &header)
}

fn verify(
    cli: &Cli,
    out: &mut dyn Write,
    exec: Execution,
    path: &Path,
    corpus: Option<usize>,
    seed: Option<u64>,
    json_out: Option<&Path>,
) -> Result<bool, CliError> {
    let (cfg, mut tol, w) = load(path)?;
    if let Some(c) = corpus {
        if c == 0 {
            return Err(CliError::Usage("--corpus must be at least 1".into()));
        }
        tol.verify.corpus = c;
    }
    if let Some(s) = seed {
        tol.verify.seed = s;
    }
    let hash = config::config_hash(&json!({ "config": cfg, "tolerances": tol }));
    let mut report = Report::new("verify", hash, Some(tol.verify.seed));
    let fs = test_corpus(w.domain(), tol.verify.seed, tol.verify.corpus);
    let corpus = verify_corpus(&w, &fs, &tol.verify_options(exec));
    let scan = scan_nonnegativity(&w, &tol.scan_spec(exec));
    scan_records(&mut report, "", w.n(), &scan);
    corpus_records(&mut report, "", &corpus);
    let per_function: Vec<_> = corpus
        .reports
        .iter()
        .map(|r| {
            json!({
                "support": [r.support.0, r.support.1],
                "lhs": r.lhs,
                "rhs": r.rhs,
                "residual": r.residual,
                "gap": r.gap,
                "margin": r.margin,
                "verdicts": r.verdicts,
            })
        })
        .collect();
    report.set("instance", &cfg);
    report.set("settings", tol);
    report.set("corpus_seed", tol.verify.seed);
    report.set("per_function", per_function);
    report.set("scan", &scan);
    report.set("verdict", report.summary.verdict);
    if let Some(p) = json_out {
        write_file(p, &report.to_json())?;
    }
    let header = format!(
        "verify: n = {} on {}, corpus {} (seed {})\n",
        w.n(),
        fmt_interval(w.domain()),
        tol.verify.corpus,
        tol.verify.seed
    );
    emit(cli, out, &report, &header)
}

struct ConstructArgs<'a> {
    p: &'a str,
    g: &'a str,
    domain: &'a str,
    sigma: Option<&'a str>,
    ic: Option<&'a str>,
    params: &'a [String],
    grid: usize,
    tol: f64,
}

fn construct(cli: &Cli, out: &mut dyn Write, args: &ConstructArgs, csv: Option<&Path>) -> Result<bool, CliError> {
    let params = parse_params(args.params)?;
    let (a, b) = parse_pair(args.domain, "--domain")?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(CliError::Usage(format!("--domain needs finite a < b, got {a}, {b}")));
    }
    if args.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let d = Interval::new(a, b);
    let compile = |src: &str, what: &str| -> Result<MapRef, CliError> {
        compile_str(src, &params, d, &[])
            .map(|c| Arc::new(c) as MapRef)
            .map_err(|e| CliError::Usage(format!("{what} = {src}: {e}")))
    };
    let p = compile(args.p, "p")?;
    let g = compile(args.g, "g")?;
    let a1 = compile(&format!("sqrt({})", args.p), "sqrt(p)")?;
    let x0 = a + sturm::default_offset(a, b);
    let start = match (args.sigma, args.ic) {
        (Some(s), _) => Start::Exponent(constant(s, &params)?),
        (None, Some(ic)) => {
            let (u0, v0) = parse_pair(ic, "--ic")?;
            let px = p.value(x0).map_err(|e| CliError::Usage(format!("p at the start point: {e}")))?;
            Start::Values { u: u0, du: v0 / px }
        }
        (None, None) => Start::Regular,
    };
    let hash = config::config_hash(&json!({
        "p": args.p, "g": args.g, "domain": [a, b], "start": start, "params": params, "grid": args.grid, "tol": args.tol,
    }));
    let mut report = Report::new("construct", hash, None);
    report.set("p", args.p);
    report.set("g", args.g);
    report.set("domain", [a, b]);
    report.set("start", start);
    let prob = SturmProblem::new(p.clone(), g.clone(), a, b, start).map_err(sturm_err)?;
    let sol = sturm::solve_sturm(&prob).map_err(sturm_err)?;
    report.set("positivity", sol.verdict);
    let header = format!("construct: -(p u')' = g u on {}\n", fmt_interval(d));
    if let Positivity::SignChange { at } = sol.verdict {
        report.push(
            Record::new("positive solution", false, format!("u changes sign at x = {at}; no a_0 on the whole interval"))
                .at(at, 0.0),
        );
        return emit(cli, out, &report, &header);
    }
    let kind = match sol.verdict {
        Positivity::BoundaryZero => "u > 0 inside, vanishing at the right end",
        _ => "u > 0 on the interval",
    };
    report.push(Record::new("positive solution", true, kind));
    let a0 = sturm::construct_a0(a1.clone(), &sol).map_err(sturm_err)?;
    let (lo, hi) = sol.working_interval();
    let work = Interval::new(lo, hi);
    let sys = CoeffSystem::new(work, vec![a0.clone(), a1.clone()]).map_err(|e| CliError::Math(e.to_string()))?;
    let w = derive_weights(&sys);
    let xs = scan_grid(work, args.grid, 1e-4, w.breakpoints());
    let mut table = String::from("x,u,du,a0,a1,weight,g,rel_err\n");
    let (mut worst, mut worst_x) = (0.0f64, f64::NAN);
    for &x in &xs {
        let row = (|| -> Result<[f64; 7], CliError> {
            let m = |e: &dyn std::fmt::Display| CliError::Math(format!("at x = {x}: {e}"));
            let (u, v) = sol.state_at(x).map_err(|e| m(&e))?;
            let px = p.value(x).map_err(|e| m(&e))?;
            let a0x = a0.value(x).map_err(|e| m(&e))?;
            let a1x = a1.value(x).map_err(|e| m(&e))?;
            let c = w.values(x).map_err(|e| m(&e))?[0];
            let gx = g.value(x).map_err(|e| m(&e))?;
            Ok([u, v / px, a0x, a1x, c, gx, (c - gx).abs() / gx.abs().max(1.0)])
        })()?;
        if !(row[6] <= worst) {
            worst = row[6];
            worst_x = x;
        }
        table.push_str(&num(x));
        for v in row {
            table.push(',');
            table.push_str(&num(v));
        }
        table.push('\n');
    }
    report.push(
        Record::new(
            "weight of (a_0, a_1) reproduces g",
            worst <= args.tol,
            format!("max |c - g|/max(1, |g|) = {worst:.3e} at x = {worst_x} (tol {:.0e})", args.tol),
        )
        .at(worst_x, worst),
    );
    report.set("working_interval", [lo, hi]);
    report.set("max_rel_err", worst);
    match csv {
        Some(path) => write_file(path, &table)?,
        None if !cli.json => put(out, &table)?,
        None => {}
    }
    emit(cli, out, &report, &header)
}

fn hi_check(
    cli: &Cli,
    out: &mut dyn Write,
    big_p: &str,
    r: &str,
    c: Option<&str>,
    critical: bool,
    params: &[String],
) -> Result<bool, CliError> {
    let params = parse_params(params)?;
    let r = constant(r, &params)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(CliError::Usage(format!("--R must be positive and finite, got {r}")));
    }
    // the solver evaluates P at R itself, so R must lie inside the compile domain
    let d = Interval::new(0.0, r * (1.0 + 1e-9));
    let pmap: MapRef = Arc::new(compile_str(big_p, &params, d, &[]).map_err(|e| CliError::Usage(format!("P = {big_p}: {e}")))?);
    let c = c.map(|s| constant(s, &params)).transpose()?;
    let hash = config::config_hash(&json!({ "P": big_p, "R": r, "c": c, "critical": critical, "params": params }));
    let mut report = Report::new("hi-check", hash, None);
    report.set("P", big_p);
    report.set("R", r);
    let header = format!("hi-check: -(r y')' = c r P y on (0, {r}), P = {big_p}\n");
    if critical {
        let cstar = sturm::critical_c(|c| sturm::hi_potential_check(pmap.clone(), c, r), 1.0).map_err(sturm_err)?;
        report.set("critical_c", cstar);
        report.push(Record::new("critical constant", true, format!("c* = {cstar}")));
        return emit(cli, out, &report, &header);
    }
    let c = c.expect("clap requires --c without --critical");
    let rep = sturm::hi_potential_check(pmap, c, r).map_err(sturm_err)?;
    report.set("c", c);
    report.set("positivity", rep.verdict);
    let rec = match rep.verdict {
        Positivity::Positive => Record::new("positive solution", true, format!("c = {c}: y > 0 on (0, R]")),
        Positivity::BoundaryZero => {
            Record::new("positive solution", true, format!("c = {c}: y > 0 on (0, R), y(R) = 0 (critical)"))
        }
        Positivity::SignChange { at } => {
            Record::new("positive solution", false, format!("c = {c}: y changes sign at r = {at}")).at(at, 0.0)
        }
    };
    report.push(rec);
    emit(cli, out, &report, &header)
}

fn split_constants(src: &str, count: usize, flag: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = src.split(',').collect();
    if parts.len() != count {
        return Err(CliError::Usage(format!("{flag} expects {count} comma-separated values, got `{src}`")));
    }
    parts.iter().map(|s| constant(s, &ParamMap::new())).collect()
}

fn zeros(cli: &Cli, out: &mut dyn Write, bessel: Option<&str>, g: Option<&str>) -> Result<bool, CliError> {
    let hash = config::config_hash(&json!({ "bessel": bessel, "g": g }));
    let mut report = Report::new("zeros", hash, None);
    let mut lines = String::new();
    let mut values = Vec::new();
    if let Some(src) = bessel {
        let v = split_constants(src, 2, "--bessel")?;
        let (nu, k) = (v[0], v[1]);
        if !(k >= 1.0 && k.fract() == 0.0 && k <= u32::MAX as f64) {
            return Err(CliError::Usage(format!("--bessel: k must be a positive integer, got {k}")));
        }
        let z = specials::bessel_zero(nu, k as u32).map_err(special_err)?;
        lines.push_str(&format!("j_{{{nu},{k}}} = {z}\n"));
        values.push(json!({ "kind": "bessel_j", "nu": nu, "k": k as u32, "value": z }));
        report.push(Record::new(format!("j_{{{nu},{k}}}"), true, format!("{z}")));
    }
    if let Some(src) = g {
        let v = split_constants(src, 3, "--g")?;
        let z = specials::g_zero(v[0], v[1], v[2]).map_err(special_err)?;
        lines.push_str(&format!("lambda_{{{},{},{}}} = {z}\n", v[0], v[1], v[2]));
        values.push(json!({ "kind": "g", "gamma": v[0], "mu": v[1], "nu": v[2], "value": z }));
        report.push(Record::new(format!("G zero ({},{},{})", v[0], v[1], v[2]), true, format!("{z}")));
    }
    report.set("zeros", values);
    if cli.json {
        put(out, &report.to_json())?;
    } else {
        put(out, &lines)?;
    }
    Ok(true)
}

fn catalog_list(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let mut report = Report::new("catalog list", config::config_hash(&MANIFEST_VERSION), None);
    report.set("manifest_version", MANIFEST_VERSION);
    report.set("entries", ENTRIES);
    if cli.json {
        put(out, &report.to_json())?;
        return Ok(true);
    }
    let w = ENTRIES.iter().map(|e| e.id.len()).max().unwrap_or(0);
    let dw = ENTRIES.iter().map(|e| e.domain.len()).max().unwrap_or(0);
    let mut text = String::new();
    for e in &ENTRIES {
        text.push_str(&format!("{:<w$}  n={}  {:<dw$}  {}\n", e.id, e.order, e.domain, e.title));
    }
    put(out, &text)?;
    Ok(true)
}

fn catalog_show(cli: &Cli, out: &mut dyn Write, id: &str, params: &[String]) -> Result<bool, CliError> {
    let info = catalog::entry_info(id).map_err(catalog_err)?;
    let overrides = parse_params(params)?;
    let inst = catalog::instantiate(id, &overrides).map_err(catalog_err)?;
    let hash = config::config_hash(&json!({ "id": id, "params": inst.params, "manifest": MANIFEST_VERSION }));
    let mut report = Report::new("catalog show", hash, None);
    let expected: Vec<String> = inst.expected.iter().map(ToString::to_string).collect();
    report.set("entry", info);
    report.set("params", &inst.params);
    report.set("derived", &inst.derived);
    report.set("coefficients", &inst.sources);
    report.set("expected_weights", &expected);
    report.set("admissible", inst.admissible);
    if cli.json {
        put(out, &report.to_json())?;
        return Ok(true);
    }
    let mut text = format!("{} ({})\n  order n = {}, domain {}\n", info.id, info.title, info.order, info.domain);
    text.push_str("  parameters:\n");
    for p in info.params {
        let value = inst.params.get(p.name).or_else(|| inst.derived.get(p.name));
        let shown = value.map_or("-".to_string(), |v| v.to_string());
        text.push_str(&format!("    {:<8} = {:<22} {}\n", p.name, shown, p.doc));
    }
    for (k, v) in &inst.derived {
        if !info.params.iter().any(|p| p.name == k) {
            text.push_str(&format!("    {k:<8} = {v:<22} (derived)\n"));
        }
    }
    text.push_str("  coefficients:\n");
    for (k, s) in inst.sources.iter().enumerate() {
        text.push_str(&format!("    a_{k} = {s}\n"));
    }
    text.push_str("  expected weights:\n");
    for (m, e) in expected.iter().enumerate() {
        text.push_str(&format!("    c_{{{},{m}}} = {e}\n", info.order));
    }
    text.push_str(&format!(
        "  admissible when {}: {}\n",
        info.admissible,
        if inst.admissible { "yes" } else { "no" }
    ));
    put(out, &text)?;
    Ok(true)
}

fn entry_records(report: &mut Report, rep: &EntryReport, prefix: &str, n: usize) {
    scan_records(report, prefix, n, &rep.scan);
    for c in &rep.closed_form {
        report.push(
            Record::new(
                format!("{prefix}c_{{{n},{}}} closed form", c.m),
                c.passed,
                format!("max rel err {:.3e} at x = {}", c.max_rel_err, c.worst_x),
            )
            .at(c.worst_x, c.max_rel_err),
        );
    }
    corpus_records(report, prefix, &rep.corpus);
}

#[allow(clippy::too_many_arguments)]
fn catalog_verify(
    cli: &Cli,
    out: &mut dyn Write,
    exec: Execution,
    id: &str,
    params: &[String],
    corpus: Option<usize>,
    seed: u64,
    json_out: Option<&Path>,
) -> Result<bool, CliError> {
    let overrides = parse_params(params)?;
    let mut tol = Tolerances { scan: Default::default(), verify: Default::default() };
    tol.apply_env()?;
    let mut opts = CheckOptions { seed, exec, ..CheckOptions::default() };
    opts.corpus = corpus.unwrap_or(opts.corpus);
    if opts.corpus == 0 {
        return Err(CliError::Usage("--corpus must be at least 1".into()));
    }
    opts.scan = tol.scan_spec(exec);
    opts.verify = tol.verify_options(exec);
    let settings = json!({
        "corpus": opts.corpus,
        "scan": tol.scan,
        "verify": { "gap_tol": tol.verify.gap_tol, "residual_tol": tol.verify.residual_tol, "quad_tol": tol.verify.quad_tol },
        "closed_form": { "points": opts.closed_form_points, "tol": opts.closed_form_tol },
        "manifest_version": MANIFEST_VERSION,
    });
    let (reports, header) = if id == "all" {
        if !overrides.is_empty() {
            return Err(CliError::Usage("--param cannot be combined with `catalog verify all`".into()));
        }
        let reps = catalog::check_all(&opts).into_iter().collect::<Result<Vec<_>, _>>().map_err(catalog_err)?;
        (reps, format!("catalog verify: {} entries at defaults, corpus {} (seed {seed})\n", ENTRIES.len(), opts.corpus))
    } else {
        let inst = catalog::instantiate(id, &overrides).map_err(catalog_err)?;
        let header = format!(
            "catalog verify: {id} with {}, corpus {} (seed {seed})\n",
            fmt_params(&inst.params),
            opts.corpus
        );
        (vec![catalog::check_instance(&inst, &opts)], header)
    };
    let hash = config::config_hash(&json!({
        "id": id,
        "params": reports.iter().map(|r| &r.params).collect::<Vec<_>>(),
        "seed": seed,
        "settings": settings,
    }));
    let mut report = Report::new("catalog verify", hash, Some(seed));
    report.set("settings", settings);
    let multi = reports.len() > 1;
    for rep in &reports {
        let n = catalog::entry_info(&rep.id).map(|e| e.order).unwrap_or(0);
        let prefix = if multi { format!("{}: ", rep.id) } else { String::new() };
        entry_records(&mut report, rep, &prefix, n);
    }
    report.set("entries", &reports);
    if let Some(p) = json_out {
        write_file(p, &report.to_json())?;
    }
    emit(cli, out, &report, &header)
}

fn fmt_params(p: &ParamMap) -> String {
    if p.is_empty() {
        return "no parameters".into();
    }
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}
