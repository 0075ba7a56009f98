//! Text and JSON renderings of command results. JSON indices are 1-based.

use serde_json::{json, Value};

use thetamirror::broken_lines::BrokenLine;
use thetamirror::cone_complex::{AffineChart, ConeComplex};
use thetamirror::scattering2d::{Atlas, Completion, ConsistencyReport, WallStructure};
use thetamirror::theta_algebra::{point_label, GradedEntry, MultTable, Relation, Violation};
use thetamirror::trop_types::{ModuliCone, TropicalType, VertexBalance};
use thetamirror::trunc_ring::{Exponent, Mono};
use thetamirror::{io, CandidateSet, LatticeVector, MissingInvariant, Pair, Result, ThetaElement, TruncatedSeries};
use thetamirror::{LaurentElement, Q};

pub struct Report {
    text: String,
    json: Value,
}

impl Report {
    pub fn text(self) -> String {
        self.text
    }

    pub fn json(self) -> String {
        let mut out = serde_json::Map::new();
        out.insert("schema_version".into(), Value::from(io::SCHEMA_VERSION));
        if let Value::Object(m) = self.json {
            out.extend(m);
        }
        serde_json::to_string_pretty(&Value::Object(out)).expect("serializable") + "\n"
    }
}

fn one_based(c: &thetamirror::BasisCone) -> Vec<usize> {
    c.indices().iter().map(|i| i + 1).collect()
}

fn series_json(s: &TruncatedSeries) -> Value {
    Value::Array(s.terms().map(|(b, c)| json!({"beta": b.0, "c": c.to_string()})).collect())
}

fn theta_json(e: &ThetaElement) -> Value {
    let mut terms = Vec::new();
    for (r, s) in e.terms() {
        for (b, c) in s.terms() {
            terms.push(json!({"r": r.0, "beta": b.0, "c": c.to_string()}));
        }
    }
    Value::Array(terms)
}

fn laurent_json(f: &LaurentElement) -> Value {
    Value::Array(f.terms().map(|(k, c)| json!({"m": k.m, "beta": k.beta, "c": c.to_string()})).collect())
}

pub fn missing_json(ms: &[MissingInvariant]) -> String {
    let list: Vec<Value> = ms.iter().map(|m| json!({"p": m.p.0, "q": m.q.0, "r": m.r.0, "beta": m.beta.0})).collect();
    Report { text: String::new(), json: json!({"missing": list}) }.json()
}

fn complex_lines(name: &str, c: &ConeComplex) -> String {
    let cones: Vec<String> = c.cones().map(|k| k.to_string()).collect();
    format!("{name}: {} cones, dim {}\n  {}\n", c.len(), c.dim(), cones.join(" "))
}

pub fn tropicalize(pair: &Pair, maximal: bool, connected: bool) -> Report {
    let t = &pair.trop;
    let mut text = format!("pair: {}\n", pair.descriptor.name);
    text += &complex_lines("Trop(X)", &t.full);
    if t.cy_sub != t.full {
        text += &complex_lines("B", &t.cy_sub);
    }
    text += &format!("maximal: {maximal}\nconnected: {connected}\n");
    let mut kinks = Vec::new();
    for rho in t.cy_sub.codim_one_cones() {
        if let Some(k) = pair.descriptor.stratum_class(&rho) {
            text += &format!("kink {rho}: {}\n", k.display_with(pair.class_names()));
            kinks.push(json!({"rho": one_based(&rho), "class": k.0}));
        }
    }
    if let Some(cf) = &t.central_fiber {
        text += &format!("central fiber: {cf:?}\n");
    }
    let cones = |c: &ConeComplex| -> Vec<Vec<usize>> { c.cones().map(one_based).collect() };
    let json = json!({
        "name": pair.descriptor.name,
        "cones": cones(&t.full),
        "b_cones": cones(&t.cy_sub),
        "dim": t.cy_sub.dim(),
        "maximal": maximal,
        "connected": connected,
        "kinks": kinks,
    });
    Report { text, json }
}

pub fn points(pts: &[LatticeVector], degs: Option<&[i64]>) -> Report {
    let mut text = String::new();
    let mut list = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        match degs {
            Some(d) => {
                text += &format!("{p}  deg {}\n", d[i]);
                list.push(json!({"point": p.0, "degree": d[i]}));
            }
            None => {
                text += &format!("{p}\n");
                list.push(json!({"point": p.0}));
            }
        }
    }
    Report { text, json: json!({"points": list}) }
}

pub fn transport(charts: &[AffineChart]) -> Report {
    let mut text = String::new();
    let mut list = Vec::new();
    for c in charts {
        text += &format!(
            "rho {}: {} -> {}, D*_{} |-> {}, matrix {:?}, det {}\n",
            c.rho,
            c.sigma1,
            c.sigma2,
            c.u1 + 1,
            c.u2,
            c.transport,
            c.determinant()
        );
        list.push(json!({
            "rho": one_based(&c.rho),
            "sigma1": one_based(&c.sigma1),
            "sigma2": one_based(&c.sigma2),
            "u1": c.u1 + 1,
            "u2": c.u2.0,
            "matrix": c.transport,
            "det": c.determinant(),
        }));
    }
    Report { text, json: json!({"charts": list}) }
}

pub fn candidates(c: &CandidateSet, names: &[String]) -> Report {
    let mut text = format!("candidates for theta_{} * theta_{}:\n", point_label(&c.p), point_label(&c.q));
    let mut list = Vec::new();
    for e in &c.entries {
        let forced = if e.forced_by_constants { "  (constant maps, N = 1)" } else { "" };
        text += &format!("  r = {}  beta = {}{forced}\n", e.r, e.beta.display_with(names));
        list.push(json!({"r": e.r.0, "beta": e.beta.0, "forced": e.forced_by_constants}));
    }
    if c.entries.is_empty() {
        text += "  none\n";
    }
    for k in &c.kernel_classes {
        text += &format!("note: {} meets every component trivially\n", k.display_with(names));
    }
    let kernel: Vec<&Vec<i64>> = c.kernel_classes.iter().map(|k| &k.0).collect();
    Report { text, json: json!({"p": c.p.0, "q": c.q.0, "candidates": list, "kernel_classes": kernel}) }
}

pub fn mult(t: &MultTable, rels: &[Relation], names: &[String]) -> Report {
    let mut text = String::new();
    for (i, p) in t.points.iter().enumerate() {
        for (j, q) in t.points.iter().enumerate().skip(i) {
            text += &format!("theta_{} * theta_{} = {}\n", point_label(p), point_label(q), t.entries[i][j].render(names));
        }
    }
    if !rels.is_empty() {
        text += "relations:\n";
        for r in rels {
            text += &format!("  {}\n", r.render(names));
        }
    }
    let mut products = Vec::new();
    for (i, p) in t.points.iter().enumerate() {
        for (j, q) in t.points.iter().enumerate().skip(i) {
            products.push(json!({"p": p.0, "q": q.0, "product": theta_json(&t.entries[i][j])}));
        }
    }
    let relations: Vec<String> = rels.iter().map(|r| r.render(names)).collect();
    let pts: Vec<&Vec<i64>> = t.points.iter().map(|p| &p.0).collect();
    Report { text, json: json!({"points": pts, "products": products, "relations": relations}) }
}

pub fn graded(entries: &[GradedEntry], names: &[String]) -> Report {
    let mut text = String::new();
    let mut list = Vec::new();
    let mut current = -1;
    for e in entries {
        let d = e.d1 + e.d2;
        if d != current {
            text += &format!("degree {d}:\n");
            current = d;
        }
        text += &format!("  theta_{} * theta_{} = {}\n", point_label(&e.p), point_label(&e.q), e.product.render(names));
        list.push(json!({"degree": d, "p": e.p.0, "q": e.q.0, "product": theta_json(&e.product)}));
    }
    Report { text, json: json!({"graded": list}) }
}

pub fn violations(v: &[Violation], names: &[String]) -> Report {
    let mut text = format!("{} violations\n", v.len());
    let mut list = Vec::new();
    for x in v {
        text += &format!(
            "  (theta_{} theta_{}) theta_{} vs theta_{} (theta_{} theta_{}) at t^{{{}}} theta_{}: {} != {}\n",
            point_label(&x.p1),
            point_label(&x.p2),
            point_label(&x.p3),
            point_label(&x.p1),
            point_label(&x.p2),
            point_label(&x.p3),
            x.beta.display_with(names),
            point_label(&x.r),
            x.lhs,
            x.rhs
        );
        list.push(json!({
            "p1": x.p1.0, "p2": x.p2.0, "p3": x.p3.0, "r": x.r.0, "beta": x.beta.0,
            "lhs": x.lhs.to_string(), "rhs": x.rhs.to_string(),
        }));
    }
    Report { text, json: json!({"violations": list}) }
}

pub fn completion(c: &Completion, names: &[String]) -> Report {
    let mut text = format!("{} rays added\n", c.added.len());
    for w in &c.added {
        text += &format!("  ray {:?}: {}\n", w.direction, w.function.render(names));
    }
    Report { text, json: json!({}) }
}

pub fn consistency(r: &ConsistencyReport, names: &[String]) -> Report {
    let mut text = format!("consistent: {}\n", r.consistent);
    let mut loops = Vec::new();
    for l in &r.loops {
        for (e, d) in ["z^(1,0)", "z^(0,1)"].iter().zip(&l.defects) {
            if !d.is_zero() {
                text += &format!("  loop defect on {e}: {}\n", d.render(names));
            }
        }
        loops.push(json!({"defects": [laurent_json(&l.defects[0]), laurent_json(&l.defects[1])]}));
    }
    let mut rays = Vec::new();
    for d in &r.rays {
        text += &format!("  ray {} theta_{}: {}\n", d.ray + 1, point_label(&d.p), d.defect.render(names));
        rays.push(json!({"ray": d.ray + 1, "p": d.p.0, "defect": laurent_json(&d.defect)}));
    }
    let mut json = json!({"consistent": r.consistent, "loops": loops, "ray_defects": rays});
    if let Some((lin, betas)) = &r.kink_monodromy {
        text += &format!("kink monodromy: {lin:?}, classes {:?}\n", betas);
        json["kink_monodromy"] = json!({"linear": lin, "classes": betas});
    }
    Report { text, json }
}

pub fn broken_lines(s: &WallStructure, lines: &[BrokenLine], theta: &LaurentElement) -> Result<Report> {
    let atlas = Atlas::new(s)?;
    let mut text = format!("{} broken lines\n", lines.len());
    let mut list = Vec::new();
    for l in lines {
        let (c, beta, m) = l.monomial(&atlas);
        let mono = Mono::new(beta.clone(), m.clone()).render(&s.class_names);
        let shown = if c == Q::from_integer(1.into()) { mono.clone() } else { format!("{c}*{mono}") };
        text += &format!("  {}  ({} bends, {} crossings)\n", if shown.is_empty() { "1".into() } else { shown }, l.num_bends(), l.crossings.len());
        let bps: Vec<Vec<String>> = l.breakpoints.iter().map(|b| b.iter().map(|x| x.to_string()).collect()).collect();
        list.push(json!({"c": c.to_string(), "beta": beta, "m": m, "bends": l.num_bends(), "breakpoints": bps}));
    }
    text += &format!("theta = {}\n", theta.render(&s.class_names));
    Ok(Report { text, json: json!({"lines": list, "theta": laurent_json(theta)}) })
}

pub fn theta_product(prod: &[(LatticeVector, TruncatedSeries)], names: &[String]) -> Report {
    let e = ThetaElement::from_terms(prod.first().map_or(0, |(_, s)| s.unit_exponent().rank()), prod.iter().cloned());
    let text = format!("{}\n", e.render(names));
    let terms: Vec<Value> = prod.iter().map(|(r, s)| json!({"r": r.0, "coefficient": series_json(s)})).collect();
    Report { text, json: json!({"product": terms}) }
}

pub fn trop(t: &TropicalType, cone: &ModuliCone, bal: Option<&[VertexBalance]>) -> Report {
    let mut text = format!("type: {}\nmoduli cone: dim {}, {} rays\n", t.name, cone.dim, cone.rays.len());
    text += &format!("  variables: {}\n", cone.variables.join(" "));
    for r in &cone.rays {
        text += &format!("  ray {r:?}\n");
    }
    text += &format!("integral curves: {}\n", cone.has_integral_curve());
    let mut json = json!({
        "name": t.name,
        "dim": cone.dim,
        "variables": cone.variables,
        "rays": cone.rays,
        "integral": cone.has_integral_curve(),
    });
    if let Some(b) = bal {
        let mut list = Vec::new();
        for v in b {
            text += &format!("vertex {}: sum {:?} {}\n", v.vertex + 1, v.sum, if v.balanced { "balanced" } else { "unbalanced" });
            list.push(json!({"vertex": v.vertex + 1, "sum": v.sum, "balanced": v.balanced}));
        }
        json["balancing"] = Value::Array(list);
    }
    Report { text, json }
}
