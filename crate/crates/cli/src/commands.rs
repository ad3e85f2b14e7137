use std::fmt::{self, Write as _};
use std::path::Path;

use ngon_core::algebra::{
    operation_table, sweep_right_loop, verify_right_loop, CoordinateFrame, LoopReport, Operation,
};
use ngon_core::constructions::{coset_geometry, dihedral_ngon, projective_plane, symplectic_quadrangle};
use ngon_core::format::{load, parse_group_file, write_polygon};
use ngon_core::projmaps::{connecting_projectivity, projectivity_group};
use ngon_core::schubert::{
    check_separation, coordinatize, decompose, default_ngon, separate, OrdinaryNgon, SchubertDecomposition,
};
use ngon_core::verify::{check_opposite_lemma, infer_gon, infer_orders, structure_id, verify_generalized_ngon, Verdict};
use ngon_core::{Error, Flag, IncidenceStructure, VertexRef};
use serde_json::{json, Value};

use crate::{AlgebraArgs, BuildArgs, Cli, Command, InputArgs, ProjArgs, SchubertArgs, VerifyArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(Error::Argument(_) | Error::Parse { .. } | Error::Io(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// A finished report: text and JSON renderings plus whether the verdict was positive.
struct Report {
    text: String,
    json: Value,
    positive: bool,
}

pub fn run(cli: &Cli) -> Result<u8> {
    let report = match &cli.command {
        Command::Build(args) => return build(cli, args),
        Command::Verify(args) => verify(args)?,
        Command::Schubert(args) => schubert(args)?,
        Command::Algebra(args) => algebra(args)?,
        Command::Proj(args) => proj(args)?,
        Command::Info(args) => info(args)?,
    };
    let body = if cli.json {
        let mut s = serde_json::to_string_pretty(&report.json).expect("reports serialize");
        s.push('\n');
        s
    } else {
        report.text
    };
    emit(cli.output.as_deref(), &body)?;
    Ok(if report.positive { 0 } else { 1 })
}

fn emit(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(CliError::Io),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn build(cli: &Cli, args: &BuildArgs) -> Result<u8> {
    let (s, name) = if let Some(q) = args.plane {
        (projective_plane(q)?.with_gon_claim(Some(3)), format!("PG(2,{q})"))
    } else if let Some(q) = args.quadrangle {
        (symplectic_quadrangle(q)?.with_gon_claim(Some(4)), format!("W({q})"))
    } else if let Some(n) = args.dihedral {
        (dihedral_ngon(n)?, format!("thin {n}-gon"))
    } else if let Some(path) = &args.coset {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let file = parse_group_file(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let s = coset_geometry(&file.group, &file.a, &file.b)?;
        let claim = infer_gon(&s);
        (s.with_gon_claim(claim), format!("coset geometry of order {}", file.group.order()))
    } else {
        return Err(CliError::Usage("build needs one of --plane, --quadrangle, --dihedral, --coset".into()));
    };
    let Some(out) = &cli.output else {
        print!("{}", write_polygon(&s));
        return Ok(0);
    };
    std::fs::write(out, write_polygon(&s)).map_err(CliError::Io)?;
    let summary = json!({
        "geometry": name,
        "structure_id": structure_id(&s),
        "points": s.point_count(),
        "lines": s.line_count(),
        "flags": s.flag_count(),
        "gon": s.gon_claim(),
        "output": out.display().to_string(),
    });
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    } else {
        eprintln!(
            "wrote {name}: {} points, {} lines, {} flags to {}",
            s.point_count(),
            s.line_count(),
            s.flag_count(),
            out.display()
        );
    }
    Ok(0)
}

fn read_geometry(path: &Path) -> Result<IncidenceStructure> {
    load(path).map_err(|e| match e {
        Error::Io(_) | Error::Parse { .. } => CliError::Usage(format!("{}: {e}", path.display())),
        other => CliError::Core(other),
    })
}

/// `--gon`, else the file's claim, else girth/diameter inference.
fn resolve_gon(s: &IncidenceStructure, gon: Option<usize>) -> Result<usize> {
    gon.or(s.gon_claim())
        .or_else(|| infer_gon(s))
        .ok_or_else(|| CliError::Usage("cannot determine n: pass --gon".into()))
}

fn load_input(args: &InputArgs) -> Result<(IncidenceStructure, usize)> {
    let s = read_geometry(&args.input)?;
    let n = resolve_gon(&s, args.gon)?;
    Ok((s, n))
}

fn parse_vertex(s: &IncidenceStructure, text: &str) -> Result<VertexRef> {
    let v: VertexRef = text.parse()?;
    s.check_vertex(v)?;
    Ok(v)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn verify(args: &VerifyArgs) -> Result<Report> {
    let s = read_geometry(&args.input.input)?;
    let n = if args.infer {
        infer_gon(&s).ok_or_else(|| CliError::Usage("girth is not twice the diameter; no n to infer".into()))?
    } else {
        resolve_gon(&s, args.input.gon)?
    };
    let report = verify_generalized_ngon(&s, n)?;
    let mut positive = report.verdict == Verdict::GeneralizedNGon;

    let mut text = String::new();
    let _ = writeln!(text, "structure   {}", report.structure_id);
    let _ = writeln!(text, "counts      {} points, {} lines, {} flags", s.point_count(), s.line_count(), s.flag_count());
    let _ = writeln!(text, "n           {n}");
    let _ = writeln!(text, "girth       {}", report.girth);
    let _ = writeln!(text, "diameter    {}", report.diameter);
    let _ = writeln!(text, "thick       {}", report.thick);
    let _ = writeln!(text, "no short    {}", report.no_short_gons);
    let _ = writeln!(text, "pairs       {}", report.pairs_on_ngons);
    let _ = writeln!(text, "graph test  {}", report.graph_criterion);
    let _ = writeln!(text, "verdict     {:?}", report.verdict);
    for w in &report.witnesses {
        let _ = writeln!(text, "witness     {}: {}", w.rule, join(&w.vertices));
    }

    let mut json = serde_json::to_value(&report).expect("json");
    if args.opposite_lemma {
        let lemma = if report.verdict == Verdict::GeneralizedNGon {
            let check = check_opposite_lemma(&s, n)?;
            positive &= check.passed();
            match check.witness() {
                None => json!({"holds": true}),
                Some((x, y)) => json!({"holds": false, "pair": [x, y]}),
            }
        } else {
            json!({"holds": null, "note": "skipped: not a generalized n-gon"})
        };
        let line = match (&lemma["holds"], &lemma["pair"]) {
            (Value::Bool(true), _) => "holds".to_string(),
            (Value::Bool(false), pair) => format!("fails at {pair}"),
            _ => "skipped".to_string(),
        };
        let _ = writeln!(text, "lemma       {line}");
        json["opposite_lemma"] = lemma;
    }
    Ok(Report { text, json, positive })
}

fn base_flag(s: &IncidenceStructure, flag: &Option<Vec<usize>>) -> Result<Flag> {
    match flag.as_deref() {
        Some([p, l]) => {
            let f = Flag::new(*p, *l);
            if s.is_flag(f) {
                Ok(f)
            } else {
                Err(CliError::Usage(format!("{f} is not a flag")))
            }
        }
        Some(_) => Err(CliError::Usage("--flag takes a point and a line index".into())),
        None => s.flags().first().copied().ok_or_else(|| CliError::Usage("structure has no flags".into())),
    }
}

fn cell_rows(dec: &SchubertDecomposition) -> Vec<(String, usize)> {
    dec.cells().into_iter().map(|(label, members)| (label.to_string(), members.len())).collect()
}

fn schubert(args: &SchubertArgs) -> Result<Report> {
    let (s, n) = load_input(&args.input)?;
    let base = base_flag(&s, &args.flag)?;
    let dec = decompose(&s, base, n)?;
    let sizes = dec.sizes();
    let mut positive = true;

    let mut text = String::new();
    let _ = writeln!(text, "base flag {base}, n = {n}");
    let _ = writeln!(text, "points  {}", join(&sizes.points));
    let _ = writeln!(text, "lines   {}", join(&sizes.lines));
    let _ = writeln!(text, "flags   {}", join(&sizes.flags));
    let _ = writeln!(text);
    for (label, size) in cell_rows(&dec) {
        let _ = writeln!(text, "{label:<10} {size:>6}");
    }

    let cells: Vec<Value> = dec
        .cells()
        .into_iter()
        .map(|(label, members)| json!({"label": label.to_string(), "size": members.len(), "members": members}))
        .collect();
    let mut json = json!({
        "base": base,
        "n": n,
        "sizes": sizes,
        "cells": cells,
    });

    if args.coordinatize {
        let ngon = default_ngon(&s, base, n)?;
        let c = coordinatize(&s, &ngon)?;
        let _ = writeln!(text, "\ncoordinates relative to {}", c.ngon);
        for chart in &c.charts {
            let factors: Vec<String> = chart.factors.iter().map(|f| format!("V_{}-{}", f.anchor, f.excluded)).collect();
            let _ = writeln!(text, "{:<10} {}", chart.label.to_string(), factors.join(" x "));
            for (element, coords) in &chart.entries {
                let _ = writeln!(text, "  {element:<10} ({})", join(coords));
            }
        }
        json["coordinatization"] = serde_json::to_value(&c).expect("json");
    }

    if args.separate {
        let mut rows = Vec::new();
        let _ = writeln!(text, "\nseparations");
        for &q in &dec.big_point_cell().members {
            for k in 0..n - 1 {
                let (row, line) = match separate(&s, &dec, q, k) {
                    Ok(sep) => {
                        let ok = check_separation(&s, &dec, q, k, &sep);
                        positive &= ok;
                        let line = format!("  q={q} k={k}: u={} v={} z={} {}", sep.u, sep.v, sep.z, if ok { "ok" } else { "FAILED" });
                        (json!({"q": q, "k": k, "separation": sep, "verified": ok}), line)
                    }
                    Err(e) => {
                        positive = false;
                        (json!({"q": q, "k": k, "error": e.to_string()}), format!("  q={q} k={k}: {e}"))
                    }
                };
                let _ = writeln!(text, "{line}");
                rows.push(row);
            }
        }
        json["separations"] = Value::Array(rows);
    }
    Ok(Report { text, json, positive })
}

fn choose_frame(s: &IncidenceStructure, n: usize, args: &AlgebraArgs) -> Result<CoordinateFrame> {
    let ngon = if args.frame.len() == 1 && args.frame[0] == "auto" {
        let base = *s.flags().first().ok_or_else(|| CliError::Usage("structure has no flags".into()))?;
        default_ngon(s, base, n)?
    } else {
        let vs = args.frame.iter().map(|t| parse_vertex(s, t)).collect::<Result<Vec<_>>>()?;
        let ngon = OrdinaryNgon::new(s, vs)?;
        if ngon.n() != n {
            return Err(CliError::Usage(format!("--frame lists a {}-gon but n = {n}", ngon.n())));
        }
        ngon
    };
    let frames = CoordinateFrame::sweep(s, &ngon)?;
    let one_l = args.one_l.as_deref().map(|t| parse_vertex(s, t)).transpose()?;
    let e = args.e.as_deref().map(|t| parse_vertex(s, t)).transpose()?;
    if let (Some(one_l), Some(e)) = (one_l, e) {
        return Ok(CoordinateFrame::new(s, ngon, one_l, e)?);
    }
    frames
        .into_iter()
        .find(|f| one_l.is_none_or(|v| f.one_l == v) && e.is_none_or(|v| f.e == v))
        .ok_or_else(|| CliError::Usage(format!("no admissible 1_L and e on {ngon}")))
}

fn loop_lines(text: &mut String, r: &LoopReport) {
    let status = if r.passed() { "right loop" } else { "VIOLATED" };
    let _ = writeln!(
        text,
        "1_L={} e={}: {} checks, {} violations, {status}",
        r.frame.one_l,
        r.frame.e,
        r.checks,
        r.violations.len()
    );
    for v in r.violations.iter().take(10) {
        let _ = writeln!(text, "  {} at ({}): {}", v.axiom, join(&v.operands), v.detail);
    }
}

fn algebra(args: &AlgebraArgs) -> Result<Report> {
    let (s, n) = load_input(&args.input)?;
    let frame = choose_frame(&s, n, args)?;
    let reports = if args.sweep { sweep_right_loop(&s, &frame.ngon)? } else { vec![verify_right_loop(&s, &frame)] };
    let positive = reports.iter().all(LoopReport::passed);

    let mut text = String::new();
    let _ = writeln!(text, "n-gon   {}", frame.ngon);
    let _ = writeln!(text, "0_K={} inf_K={} 0_L={} inf_L={}", frame.zero_k(), frame.infinity_k(), frame.zero_l(), frame.infinity_l());
    let _ = writeln!(text, "K = {{{}}}", join(&frame.k_set(&s)));
    let _ = writeln!(text, "L = {{{}}}", join(&frame.l_set(&s)));
    for r in &reports {
        loop_lines(&mut text, r);
    }
    let mut json = json!({
        "frame": frame,
        "zero_k": frame.zero_k(),
        "infinity_k": frame.infinity_k(),
        "zero_l": frame.zero_l(),
        "infinity_l": frame.infinity_l(),
        "k": frame.k_set(&s),
        "l": frame.l_set(&s),
        "reports": reports,
    });
    if args.tables {
        let tables: Vec<_> = [Operation::Multiply, Operation::Divide, Operation::Add, Operation::Subtract]
            .into_iter()
            .map(|op| operation_table(&s, &frame, op))
            .collect();
        for t in &tables {
            let _ = write!(text, "\n{}", t.to_csv());
        }
        json["tables"] = serde_json::to_value(&tables).expect("json");
    }
    Ok(Report { text, json, positive })
}

fn proj(args: &ProjArgs) -> Result<Report> {
    let (s, n) = load_input(&args.input)?;
    let x = parse_vertex(&s, &args.at)?;
    let mut text = String::new();
    let mut json = json!({"at": x, "n": n});
    if let Some(to) = &args.to {
        let y = parse_vertex(&s, to)?;
        let p = connecting_projectivity(&s, x, y, n)?;
        let _ = writeln!(text, "projectivity {p}");
        for (a, b) in p.pairs() {
            let _ = writeln!(text, "  {a} -> {b}");
        }
        json["projectivity"] = serde_json::to_value(&p).expect("json");
    }
    if args.group || args.to.is_none() {
        let g = projectivity_group(&s, x, n, args.cap)?;
        let _ = writeln!(text, "group of projectivities at {x}");
        let _ = writeln!(text, "  acting on   {{{}}}", join(&g.carrier));
        let _ = writeln!(text, "  order       {}", g.order);
        let _ = writeln!(text, "  generators  {}", g.generators.len());
        let _ = writeln!(text, "  transitive  {}-fold", g.transitivity);
        match g.sharply {
            Some(k) => {
                let _ = writeln!(text, "  sharply     {k}-transitive");
            }
            None => {
                let _ = writeln!(text, "  sharply     no");
            }
        }
        json["group"] = serde_json::to_value(&g).expect("json");
    }
    Ok(Report { text, json, positive: true })
}

fn info(args: &InputArgs) -> Result<Report> {
    let s = read_geometry(&args.input)?;
    let n = args.gon.or(s.gon_claim()).or_else(|| infer_gon(&s));
    let orders = infer_orders(&s, n);
    let json = json!({
        "structure_id": structure_id(&s),
        "points": s.point_count(),
        "lines": s.line_count(),
        "flags": s.flag_count(),
        "gon_claim": s.gon_claim(),
        "inferred_gon": infer_gon(&s),
        "girth": s.girth(),
        "diameter": s.diameter(),
        "thick": s.is_thick().passed(),
        "orders": orders,
    });
    let mut text = String::new();
    let _ = writeln!(text, "structure  {}", structure_id(&s));
    let _ = writeln!(text, "counts     {} points, {} lines, {} flags", s.point_count(), s.line_count(), s.flag_count());
    let _ = writeln!(text, "girth      {}", s.girth());
    let _ = writeln!(text, "diameter   {}", s.diameter());
    let _ = writeln!(text, "thick      {}", s.is_thick().passed());
    let claim = s.gon_claim().map_or("none".to_string(), |c| c.to_string());
    let inferred = infer_gon(&s).map_or("none".to_string(), |c| c.to_string());
    let _ = writeln!(text, "n          claimed {claim}, inferred {inferred}");
    let _ = writeln!(text, "orders     {}", serde_json::to_string(&orders).expect("json"));
    Ok(Report { text, json, positive: true })
}
