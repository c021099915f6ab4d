use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use comcat_core::com::{validate_com, Com};
use comcat_core::composite::{is_composite, CompositeCom, TensorRegistry};
use comcat_core::conditioning::{remote_evaluate, remote_evaluate_dual, Bipartite};
use comcat_core::io::{self, BUILTIN_SCHEME};
use comcat_core::models::{self, AnyCom, AnyStructure, MackeyTriple};
use comcat_core::protocols::{
    check_theory_compact_closed, find_teleportation, teleportation_from_isomorphism_state, verify_teleportation,
    TeleportationCertificate,
};
use comcat_core::scalar::from_json;
use comcat_core::selfdual::{
    check_symmetric_self_duality, check_weak_self_duality, dagger_compactness_verdict, is_strongly_self_dual, symmetry_equivalence_report,
    verify_structure, DaggerVerdict, DualityStructure,
};
use comcat_core::{settings, Field, Q};

use crate::report::{sha256_hex, InputRecord, Report, Verdict};
use crate::{Cli, Command, Kind, ModelCmd};

pub struct Outcome {
    pub report: Report,
    /// Object written by `--output` for producing commands.
    pub product: Option<Value>,
}

struct Input {
    value: Value,
    record: InputRecord,
}

fn load(arg: &str) -> Result<Input> {
    if arg.starts_with(BUILTIN_SCHEME) {
        return Ok(Input { value: Value::String(arg.to_string()), record: InputRecord { name: arg.into(), sha256: sha256_hex(arg.as_bytes()) } });
    }
    let bytes = std::fs::read(arg).with_context(|| format!("reading {arg}"))?;
    let value = serde_json::from_slice(&bytes).with_context(|| format!("parsing {arg}"))?;
    Ok(Input { value, record: InputRecord { name: arg.into(), sha256: sha256_hex(&bytes) } })
}

struct Ctx {
    inputs: Vec<InputRecord>,
}

impl Ctx {
    fn load(&mut self, arg: &str) -> Result<Value> {
        let i = load(arg)?;
        self.inputs.push(i.record);
        Ok(i.value)
    }

    fn model(&mut self, arg: &str) -> Result<AnyCom> {
        let v = self.load(arg)?;
        Ok(io::any_com_from_json(&v)?)
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let mut ctx = Ctx { inputs: Vec::new() };
    let (name, verdict, result, product) = match &cli.command {
        Command::Validate { model } => with_name("validate", validate(&mut ctx, model)?),
        Command::Tensor { kind, a, b } => with_name("tensor", tensor(&mut ctx, *kind, a, b)?),
        Command::RemoteEval { f, omega, alpha, dual } => with_name("remote-eval", remote_eval(&mut ctx, f, omega, alpha, *dual)?),
        Command::Teleport { a, b, composite, candidate } => {
            with_name("teleport", teleport(&mut ctx, a, b, *composite, candidate.as_deref())?)
        }
        Command::CompactCheck { theory } => with_name("compact-check", compact_check(&mut ctx, theory)?),
        Command::Wsd { model, symmetric, structure } => with_name("wsd", wsd(&mut ctx, model, *symmetric, structure.as_deref())?),
        Command::Dagger { theories } => with_name("dagger", dagger(&mut ctx, theories)?),
        Command::Model { which } => with_name("model", model_cmd(&mut ctx, which)?),
    };
    let report = Report {
        command: name.to_string(),
        seed: settings::seed(),
        tolerance: settings::tolerance(),
        inputs: ctx.inputs,
        verdict,
        result,
    };
    Ok(Outcome { report, product })
}

type Produced = (Verdict, Value, Option<Value>);

fn with_name(name: &'static str, p: Produced) -> (&'static str, Verdict, Value, Option<Value>) {
    (name, p.0, p.1, p.2)
}

fn validate(ctx: &mut Ctx, arg: &str) -> Result<Produced> {
    let v = ctx.load(arg)?;
    if v.is_string() {
        let com = io::any_com_from_json(&v)?;
        return Ok((Verdict::Verified, json!({ "label": com.label(), "dim": com.dim(), "violations": [] }), None));
    }
    fn check<F: Field>(v: &Value) -> Result<Produced> {
        let cand = io::com_candidate_from_json::<F>(v)?;
        Ok(match validate_com(cand) {
            Ok(c) => (
                Verdict::Verified,
                json!({ "label": c.label(), "dim": c.dim(), "saturated": c.is_saturated(), "violations": [] }),
                None,
            ),
            Err(violations) => (Verdict::Refuted, json!({ "violations": violations }), None),
        })
    }
    if io::mentions_psd(&v) {
        check::<f64>(&v)
    } else {
        check::<Q>(&v)
    }
}

fn compose<F: Field>(kind: Kind, a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>> {
    Ok(TensorRegistry::<F>::builtin().compose(kind.name(), a, b)?)
}

fn tensor(ctx: &mut Ctx, kind: Kind, a: &str, b: &str) -> Result<Produced> {
    let (a, b) = (ctx.model(a)?, ctx.model(b)?);
    fn go<F: Field>(kind: Kind, a: &Com<F>, b: &Com<F>) -> Result<Produced> {
        let ab = compose(kind, a, b)?;
        let check = is_composite(ab.com(), a, b);
        let com = io::com_to_json(ab.com());
        let result = json!({ "kind": ab.kind().to_string(), "composite": com, "check": check });
        Ok((Verdict::from_bool(check.is_composite), result, Some(com)))
    }
    match (&a, &b) {
        (AnyCom::Exact(x), AnyCom::Exact(y)) => go(kind, x, y),
        _ => go(kind, &a.to_float(), &b.to_float()),
    }
}

fn remote_eval(ctx: &mut Ctx, f: &str, omega: &str, alpha: &str, dual: bool) -> Result<Produced> {
    let f: Bipartite<Q> = io::bipartite_from_json(&ctx.load(f)?)?;
    let omega: Bipartite<Q> = io::bipartite_from_json(&ctx.load(omega)?)?;
    let alpha: Vec<Q> = io::vector_from_json(&ctx.load(alpha)?)?;
    let r = if dual { remote_evaluate_dual(&f, &omega, &alpha) } else { remote_evaluate(&f, &omega, &alpha) };
    Ok(match r {
        Ok(r) => (
            Verdict::Verified,
            json!({ "result": io::vector_to_json(&r.result), "direct": io::vector_to_json(&r.direct), "residual": r.residual }),
            None,
        ),
        Err(comcat_core::ComError::RemoteEvalMismatch(res)) => (Verdict::Refuted, json!({ "residual": res }), None),
        Err(e) => return Err(e.into()),
    })
}

pub fn certificate_json<F: Field>(c: &TeleportationCertificate<F>) -> Value {
    json!({
        "omega": io::bipartite_to_json(&c.omega),
        "r_hat": io::matrix_to_json(&c.r_hat),
        "c": c.c.as_json(),
        "f": io::bipartite_to_json(&c.f),
        "residual": c.residual,
    })
}

fn teleport(ctx: &mut Ctx, a: &str, b: &str, kind: Kind, candidate: Option<&str>) -> Result<Produced> {
    let (a, b) = (ctx.model(a)?, ctx.model(b)?);
    let candidate = candidate.map(|c| ctx.load(c)).transpose()?;
    match (&a, &b, &candidate) {
        (AnyCom::Exact(x), AnyCom::Exact(y), None) => {
            let ab = compose(kind, x, y)?;
            let ba = compose(kind, y, x)?;
            match find_teleportation(x, y, &ab, &ba)? {
                Some(cert) => {
                    let rep = verify_teleportation(&cert, x, y, ab.com(), ba.com())?;
                    let result = json!({ "composite": kind.name(), "certificate": certificate_json(&cert), "verification": rep });
                    Ok((Verdict::from_bool(rep.passed), result, None))
                }
                None => Ok((
                    Verdict::Refuted,
                    json!({
                        "composite": kind.name(),
                        "certificate": null,
                        "exhausted": "normalized extreme rays of the B⊗A state cone and their sums",
                    }),
                    None,
                )),
            }
        }
        _ => {
            let (x, y) = (a.to_float(), b.to_float());
            let ab = compose(kind, &x, &y)?;
            let ba = compose(kind, &y, &x)?;
            let cert = float_candidate(&x, &y, ab.com(), candidate.as_ref())?;
            let rep = verify_teleportation(&cert, &x, &y, ab.com(), ba.com())?;
            let result = json!({ "composite": kind.name(), "certificate": certificate_json(&cert), "verification": rep });
            Ok((Verdict::from_bool(rep.passed), result, None))
        }
    }
}

/// A supplied `{"omega", "c"?}` candidate, or the maximally entangled state
/// when both systems are the same quantum system.
fn float_candidate(a: &Com<f64>, b: &Com<f64>, ab: &Com<f64>, candidate: Option<&Value>) -> Result<TeleportationCertificate<f64>> {
    let omega = match candidate {
        Some(v) => io::bipartite_from_json(v.get("omega").ok_or_else(|| anyhow!("candidate needs an \"omega\" field"))?)?,
        None => {
            let d = quantum_dim(a).filter(|d| Some(*d) == quantum_dim(b)).ok_or_else(|| {
                anyhow!("no search for psd models; supply --candidate with an isomorphism state")
            })?;
            models::maximally_entangled_structure(d)?.gamma
        }
    };
    let base = teleportation_from_isomorphism_state(omega, ab)?;
    match candidate.and_then(|v| v.get("c")) {
        Some(c) => Ok(TeleportationCertificate::new(base.omega, base.r_hat, from_json(c)?)),
        None => Ok(base),
    }
}

fn quantum_dim(c: &Com<f64>) -> Option<usize> {
    c.state_cone().as_psd().filter(|p| p.basis().is_standard()).map(|p| p.hilbert_dim())
}

struct Theory {
    objects: Vec<AnyCom>,
    kind: Kind,
    /// Per-pair overrides keyed by object labels.
    pairs: Vec<(String, String, PairRule)>,
}

enum PairRule {
    Kind(Kind),
    Custom(AnyCom),
}

fn parse_kind(v: Option<&Value>) -> Result<Kind> {
    match v.and_then(Value::as_str).unwrap_or("max") {
        "min" => Ok(Kind::Min),
        "max" => Ok(Kind::Max),
        "spatial" => Ok(Kind::Spatial),
        other => bail!("unknown composite kind {other:?}"),
    }
}

/// A model URI, a structure URI (its model), `{"com", "structure"?}` or an inline COM.
fn theory_object(o: &Value) -> Result<AnyCom> {
    if let Some(uri) = o.as_str() {
        return Ok(match io::resolve_builtin_model(uri) {
            Ok(c) => c,
            Err(_) => io::resolve_builtin_structure(uri)?.0,
        });
    }
    Ok(io::any_com_from_json(o.get("com").unwrap_or(o))?)
}

/// `{"objects": [...], "composite"?: kind, "composites"?: [{"a", "b", "kind" | "com"}]}`.
/// A `"com"` is an inline COM or a path to one.
fn theory_from(ctx: &mut Ctx, arg: &str) -> Result<Theory> {
    let v = ctx.load(arg)?;
    let objects = v
        .get("objects")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("theory needs an \"objects\" array"))?
        .iter()
        .map(theory_object)
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for e in v.get("composites").and_then(Value::as_array).into_iter().flatten() {
        let label = |k: &str| -> Result<String> {
            let l = e.get(k).and_then(Value::as_str).ok_or_else(|| anyhow!("composite entry needs \"{k}\""))?;
            if !objects.iter().any(|o| o.label() == l) {
                bail!("composite entry refers to unknown object {l:?}");
            }
            Ok(l.to_string())
        };
        let (a, b) = (label("a")?, label("b")?);
        let rule = match e.get("com") {
            Some(Value::String(path)) => PairRule::Custom(ctx.model(path)?),
            Some(inline) => PairRule::Custom(io::any_com_from_json(inline)?),
            None => PairRule::Kind(parse_kind(Some(e.get("kind").ok_or_else(|| anyhow!("composite entry needs \"kind\" or \"com\""))?))?),
        };
        pairs.push((a, b, rule));
    }
    Ok(Theory { objects, kind: parse_kind(v.get("composite"))?, pairs })
}

fn compact_check(ctx: &mut Ctx, arg: &str) -> Result<Produced> {
    let theory = theory_from(ctx, arg)?;
    fn go<F: Field>(objects: &[Com<F>], theory: &Theory) -> Result<Produced> {
        // custom composites are validated up front
        let mut custom: Vec<(&str, &str, CompositeCom<F>)> = Vec::new();
        for (a, b, rule) in &theory.pairs {
            if let PairRule::Custom(c) = rule {
                let find = |l: &str| objects.iter().find(|o| o.label() == l).expect("labels checked on load");
                let ab = CompositeCom::custom(c.to_field::<F>()?, find(a), find(b)).map_err(|v| {
                    let msgs: Vec<String> = v.iter().map(|x| x.message.clone()).collect();
                    anyhow!("composite for ({a}, {b}) is invalid: {}", msgs.join("; "))
                })?;
                custom.push((a, b, ab));
            }
        }
        let composite = |a: &Com<F>, b: &Com<F>| -> comcat_core::Result<CompositeCom<F>> {
            if let Some((_, _, ab)) = custom.iter().find(|(x, y, _)| *x == a.label() && *y == b.label()) {
                return Ok(ab.clone());
            }
            let kind = theory
                .pairs
                .iter()
                .find_map(|(x, y, r)| match r {
                    PairRule::Kind(k) if x == a.label() && y == b.label() => Some(*k),
                    _ => None,
                })
                .unwrap_or(theory.kind);
            compose(kind, a, b).map_err(|e| match e.downcast() {
                Ok(c) => c,
                Err(e) => comcat_core::ComError::Inconsistent(e.to_string()),
            })
        };
        let verdicts = check_theory_compact_closed(objects, &composite)?;
        let all = !verdicts.is_empty() && verdicts.iter().all(|v| v.certified.is_some());
        let objs: Vec<Value> = verdicts
            .iter()
            .map(|v| {
                json!({
                    "object": v.object,
                    "partner": v.certified.as_ref().map(|c| c.0.clone()),
                    "there": v.certified.as_ref().map(|c| certificate_json(&c.1)),
                    "back": v.certified.as_ref().map(|c| certificate_json(&c.2)),
                    "exhausted": v.exhausted.iter().map(|(p, why)| json!({ "partner": p, "reason": why })).collect::<Vec<_>>(),
                })
            })
            .collect();
        Ok((Verdict::from_bool(all), json!({ "composite": theory.kind.name(), "compact_closed": all, "objects": objs }), None))
    }
    let exact = theory.objects.iter().all(|o| o.as_exact().is_some())
        && theory.pairs.iter().all(|(_, _, r)| !matches!(r, PairRule::Custom(AnyCom::Float(_))));
    if exact {
        let objs = theory.objects.iter().map(AnyCom::to_field::<Q>).collect::<comcat_core::Result<Vec<_>>>()?;
        go(&objs, &theory)
    } else {
        let floats: Vec<Com<f64>> = theory.objects.iter().map(AnyCom::to_float).collect();
        go(&floats, &theory)
    }
}

fn structure_report<F: Field>(a: &Com<F>, d: &DualityStructure<F>) -> Result<(bool, Value)> {
    let check = verify_structure(d, a)?;
    let eqv = symmetry_equivalence_report(d)?;
    let mut v = io::structure_to_json(d);
    v["tau"] = io::matrix_to_json(&d.tau());
    v["verification"] = serde_json::to_value(&check)?;
    v["symmetry_equivalence"] = serde_json::to_value(&eqv)?;
    Ok((check.passed, v))
}

fn wsd(ctx: &mut Ctx, model: &str, symmetric: bool, structure: Option<&str>) -> Result<Produced> {
    let a = ctx.model(model)?;
    let supplied = match structure.map(|s| ctx.load(s)).transpose()? {
        Some(Value::String(uri)) => Some(match io::resolve_builtin_structure(&uri)?.1 {
            AnyStructure::Exact(d) => io::structure_to_json(&d),
            AnyStructure::Float(d) => io::structure_to_json(&d),
        }),
        other => other,
    };
    fn go<F: Field>(a: &Com<F>, symmetric: bool, supplied: Option<&Value>) -> Result<Produced> {
        let found = match supplied {
            Some(v) => Some(io::structure_from_json::<F>(v)?),
            None if symmetric => check_symmetric_self_duality(a)?,
            None => check_weak_self_duality(a)?,
        };
        let strong = is_strongly_self_dual(a)?;
        let Some(d) = found else {
            let kind = if symmetric { "symmetric" } else { "weak" };
            return Ok((
                Verdict::Refuted,
                json!({ "object": a.label(), "structure": null, "exhausted": format!("all {kind} ray matchings"), "strong_self_duality": strong }),
                None,
            ));
        };
        let (mut ok, report) = structure_report(a, &d)?;
        if symmetric {
            ok &= d.g().is_symmetric() && d.f_matrix().is_symmetric();
        }
        Ok((Verdict::from_bool(ok), json!({ "object": a.label(), "structure": report, "strong_self_duality": strong }), None))
    }
    match &a {
        AnyCom::Exact(c) => go(c, symmetric, supplied.as_ref()),
        AnyCom::Float(c) => {
            if supplied.is_none() {
                return Err(comcat_core::ComError::UnsupportedKind("wsd search").into());
            }
            go(c, symmetric, supplied.as_ref())
        }
    }
}

fn dagger(ctx: &mut Ctx, args: &[String]) -> Result<Produced> {
    let mut exact: Vec<(Com<Q>, DualityStructure<Q>)> = Vec::new();
    let mut float: Vec<(Com<f64>, DualityStructure<f64>)> = Vec::new();
    let mut push = |com: AnyCom, s: AnyStructure| -> Result<()> {
        match (com, s) {
            (AnyCom::Exact(c), AnyStructure::Exact(s)) => exact.push((c, s)),
            (AnyCom::Float(c), AnyStructure::Float(s)) => float.push((c, s)),
            (c, s) => float.push((c.to_float(), to_float_structure(s))),
        }
        Ok(())
    };
    for arg in args {
        let v = ctx.load(arg)?;
        if let Some(uri) = v.as_str() {
            let (c, s) = io::resolve_builtin_structure(uri)?;
            push(c, s)?;
            continue;
        }
        let entries = v.get("objects").and_then(Value::as_array).ok_or_else(|| anyhow!("theory needs an \"objects\" array"))?;
        let map = v.get("structures").and_then(Value::as_object);
        let mut seen = Vec::new();
        for e in entries {
            let (com, sv) = match (e.as_str(), e.get("com")) {
                (Some(uri), _) => {
                    let model = io::resolve_builtin_model(uri).ok();
                    match model.and_then(|c| map.and_then(|m| m.get(c.label())).map(|sv| (c, sv))) {
                        Some(found) => found,
                        None => {
                            let (c, s) = io::resolve_builtin_structure(uri)?;
                            seen.push(c.label().to_string());
                            push(c, s)?;
                            continue;
                        }
                    }
                }
                (None, Some(inline)) => {
                    let com = io::any_com_from_json(inline)?;
                    let sv = e.get("structure").or_else(|| map.and_then(|m| m.get(com.label())));
                    (com, sv.ok_or_else(|| anyhow!("object entry needs \"structure\""))?)
                }
                (None, None) => {
                    let com = io::any_com_from_json(e)?;
                    let sv = map.and_then(|m| m.get(com.label())).ok_or_else(|| anyhow!("no structure given for {:?}", com.label()))?;
                    (com, sv)
                }
            };
            let s = match (sv.as_str(), &com) {
                (Some(uri), _) => io::resolve_builtin_structure(uri)?.1,
                (None, AnyCom::Exact(_)) => AnyStructure::Exact(io::structure_from_json(sv)?),
                (None, AnyCom::Float(_)) => AnyStructure::Float(io::structure_from_json(sv)?),
            };
            seen.push(com.label().to_string());
            push(com, s)?;
        }
        if let Some(unknown) = map.into_iter().flat_map(|m| m.keys()).find(|k| !seen.contains(k)) {
            bail!("structure given for unknown object {unknown:?}");
        }
    }
    let mut parts: Vec<DaggerVerdict> = Vec::new();
    if !exact.is_empty() {
        parts.push(dagger_compactness_verdict(&exact)?);
    }
    if !float.is_empty() {
        parts.push(dagger_compactness_verdict(&float)?);
    }
    let all = !parts.is_empty() && parts.iter().all(|p| p.dagger_compact);
    let objects: Vec<Value> = parts.iter().flat_map(|p| p.objects.iter().map(|o| serde_json::to_value(o).expect("serializable"))).collect();
    let strong: Vec<Value> = exact
        .iter()
        .map(|(c, _)| is_strongly_self_dual(c).map(|s| json!({ "object": c.label(), "strong": s })))
        .chain(float.iter().map(|(c, _)| is_strongly_self_dual(c).map(|s| json!({ "object": c.label(), "strong": s }))))
        .collect::<comcat_core::Result<_>>()?;
    let result = json!({
        "verdict": if all { "dagger-compact" } else { "not-dagger-compact" },
        "dagger_compact": all,
        "objects": objects,
        "strong_self_duality": strong,
    });
    Ok((Verdict::from_bool(all), result, None))
}

fn to_float_structure(s: AnyStructure) -> DualityStructure<f64> {
    match s {
        AnyStructure::Float(s) => s,
        AnyStructure::Exact(s) => DualityStructure::from_matrices(s.label.clone(), &s.g().map(Field::to_f64), &s.f_matrix().map(Field::to_f64)),
    }
}

fn model_cmd(ctx: &mut Ctx, which: &ModelCmd) -> Result<Produced> {
    let com = match which {
        ModelCmd::Classical { n } => AnyCom::Exact(models::classical(*n)?),
        ModelCmd::Quantum { d } => AnyCom::Float(models::quantum(*d)?),
        ModelCmd::Gbit => AnyCom::Exact(models::gbit()),
        ModelCmd::Pentagon => AnyCom::Exact(models::pentagon()),
        ModelCmd::Trivial => AnyCom::Exact(models::trivial()),
        ModelCmd::Mackey { triple } => {
            let v = ctx.load(triple)?;
            let t = triple_from(&v)?;
            let m = models::from_mackey(&t)?;
            let com = io::com_to_json(&m.com);
            let result = json!({
                "model": com,
                "merged_states": m.merged_states,
                "state_coords": m.state_coords.iter().map(|x| io::vector_to_json(x)).collect::<Vec<_>>(),
                "outcome_functionals": m.outcome_functionals.iter().map(|x| io::vector_to_json(x)).collect::<Vec<_>>(),
            });
            return Ok((Verdict::Verified, result, Some(com)));
        }
    };
    let v = io::any_com_to_json(&com);
    Ok((Verdict::Verified, json!({ "model": v }), Some(v)))
}

fn triple_from(v: &Value) -> Result<MackeyTriple> {
    if let Some(uri) = v.as_str() {
        let name = uri.strip_prefix(BUILTIN_SCHEME).unwrap_or(uri);
        if name == "pauli-fragment" {
            return Ok(MackeyTriple::pauli_fragment());
        }
        if let Some(n) = name.strip_prefix("classical").and_then(|n| n.parse().ok()) {
            return Ok(MackeyTriple::classical(n));
        }
        bail!("unknown builtin triple {uri:?}");
    }
    let strings = |key: &str| -> Result<Vec<String>> {
        serde_json::from_value(v.get(key).cloned().ok_or_else(|| anyhow!("triple needs {key:?}"))?).with_context(|| format!("field {key:?}"))
    };
    let table = v
        .get("table")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("triple needs a \"table\""))?
        .iter()
        .map(|row| Ok(io::vector_from_json::<Q>(row)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(MackeyTriple { outcomes: strings("outcomes")?, states: strings("states")?, table })
}
