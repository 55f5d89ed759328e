//! JSON bundles: every artifact the library produces, in a canonical,
//! exact, self-contained form.
//!
//! A bundle is `{"format_version": 1, "kind": <kind>, "payload": {...}}`.
//! Keys are sorted, rationals are strings `"p/q"` (or `"p"` when `q = 1`),
//! matrices are arrays of rows, and balls store one vertex and one
//! functional per `±` pair under `"symmetric": true`.

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::amalgam::{verify_pushout, PushoutResult};
use crate::correction::{verify_correction, CorrectionResult};
use crate::error::{Error, Result};
use crate::exactgeom::polytope::WitnessTerm;
use crate::exactgeom::rational::{fmt_rat, parse_rat};
use crate::exactgeom::{Rat, RatMat, RatVec, SymPolytope};
use crate::fraisse::backforth::BackAndForth;
use crate::fraisse::embed::{verify_trace, EmbeddingTrace, StepSummary};
use crate::fraisse::enumerate::Budget;
use crate::fraisse::state::{verify_state, ArrowTask, FraisseConfig, FraisseState, TaskOrigin, TaskStatus};
use crate::maps::{
    check_chain, op_norm, EpsIsometryCert, InitialArrow, IsometryCert, LinMap, ProjectionChain,
};
use crate::spaces::MonotoneSpace;

pub const FORMAT_VERSION: u64 = 1;

/// A finite round trip `v∘u ≈ incl` between stages of two sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrip {
    pub eps: Rat,
    pub deviation: Rat,
    pub u: InitialArrow,
    pub v: InitialArrow,
    pub u_cert: EpsIsometryCert,
    pub v_cert: EpsIsometryCert,
}

impl From<&BackAndForth> for RoundTrip {
    fn from(r: &BackAndForth) -> Self {
        RoundTrip {
            eps: r.u_cert.eps.clone(),
            deviation: r.deviation.clone(),
            u: r.u.clone(),
            v: r.v.clone(),
            u_cert: r.u_cert.clone(),
            v_cert: r.v_cert.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertDoc {
    Isometry { map: LinMap, cert: IsometryCert },
    EpsIsometry { map: LinMap, cert: EpsIsometryCert },
    Arrow(InitialArrow),
    RoundTrip(RoundTrip),
}

#[derive(Debug, Clone)]
pub enum Bundle {
    Space(SymPolytope),
    Map(LinMap),
    Chain { ambient: SymPolytope, chain: ProjectionChain },
    Pushout(PushoutResult),
    Correction(CorrectionResult),
    State(FraisseState),
    Trace { state: FraisseState, trace: EmbeddingTrace },
    Cert(CertDoc),
}

impl Bundle {
    pub fn kind(&self) -> &'static str {
        match self {
            Bundle::Space(_) => "space",
            Bundle::Map(_) => "map",
            Bundle::Chain { .. } => "chain",
            Bundle::Pushout(_) => "pushout",
            Bundle::Correction(_) => "correction",
            Bundle::State(_) => "state",
            Bundle::Trace { .. } => "trace",
            Bundle::Cert(_) => "cert",
        }
    }
}

// ---------------------------------------------------------------- emit

fn e_rat(r: &Rat) -> Value {
    Value::String(fmt_rat(r))
}

fn e_vec(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(e_rat).collect())
}

fn e_mat(m: &RatMat) -> Value {
    Value::Array((0..m.rows()).map(|r| e_vec(m.row(r))).collect())
}

fn e_ball(b: &SymPolytope) -> Value {
    json!({
        "dim": b.dim(),
        "symmetric": true,
        "vertices": b.vertices().iter().map(|v| e_vec(v)).collect::<Vec<_>>(),
        "functionals": b.functionals().iter().map(|v| e_vec(v)).collect::<Vec<_>>(),
    })
}

fn e_map(t: &LinMap) -> Value {
    json!({ "domain": e_ball(t.domain()), "codomain": e_ball(t.codomain()), "matrix": e_mat(t.matrix()) })
}

fn e_chain(c: &ProjectionChain) -> Value {
    json!({ "start_rank": c.start_rank, "projections": c.projections.iter().map(e_mat).collect::<Vec<_>>() })
}

fn e_witness(w: &[Vec<WitnessTerm>]) -> Value {
    Value::Array(
        w.iter()
            .map(|terms| {
                Value::Array(
                    terms
                        .iter()
                        .map(|t| json!({ "coef": e_rat(&t.coef), "vertex": t.vertex, "negated": t.negated }))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn e_iso(c: &IsometryCert) -> Value {
    json!({ "upper": e_witness(&c.upper), "lower": e_witness(&c.lower) })
}

fn e_eps(c: &EpsIsometryCert) -> Value {
    json!({ "eps": e_rat(&c.eps), "upper": e_witness(&c.upper), "lower": e_witness(&c.lower) })
}

fn e_arrow(a: &InitialArrow) -> Value {
    json!({ "map": e_map(&a.map), "chain": e_chain(&a.chain), "cert": e_iso(&a.cert) })
}

fn e_opt_chain(c: &Option<ProjectionChain>) -> Value {
    c.as_ref().map(e_chain).unwrap_or(Value::Null)
}

fn e_state(s: &FraisseState) -> Value {
    let c = &s.config;
    let tasks: Vec<Value> = s
        .tasks
        .iter()
        .map(|t| {
            let origin = match &t.origin {
                TaskOrigin::Scheduled { position, arrow } => {
                    json!({ "kind": "scheduled", "position": position, "arrow": arrow })
                }
                TaskOrigin::External => json!({ "kind": "external" }),
            };
            let status = match &t.status {
                TaskStatus::Pending => json!({ "kind": "pending" }),
                TaskStatus::Satisfied { m, g, chain } => {
                    json!({ "kind": "satisfied", "m": m, "g": e_mat(g), "chain": e_chain(chain) })
                }
                TaskStatus::Deferred(reason) => json!({ "kind": "deferred", "reason": reason }),
            };
            json!({
                "n": t.n,
                "origin": origin,
                "z": e_ball(&t.z),
                "f": e_mat(&t.f),
                "f_chain": e_chain(&t.f_chain),
                "status": status,
            })
        })
        .collect();
    json!({
        "config": {
            "seed": c.seed,
            "max_dim": c.max_dim,
            "denom0": c.denom0,
            "budget": {
                "max_dim": c.budget.max_dim,
                "max_denominator": c.budget.max_denominator,
                "max_generators": c.budget.max_generators,
            },
        },
        "stages": s.stages.iter().map(|x| e_ball(x.ball())).collect::<Vec<_>>(),
        "tasks": tasks,
        "cursor": s.cursor,
        "steps": s.steps,
    })
}

fn e_payload(b: &Bundle) -> Value {
    match b {
        Bundle::Space(s) => e_ball(s),
        Bundle::Map(t) => e_map(t),
        Bundle::Chain { ambient, chain } => {
            json!({ "ambient": e_ball(ambient), "start_rank": chain.start_rank,
                    "projections": chain.projections.iter().map(e_mat).collect::<Vec<_>>() })
        }
        Bundle::Pushout(p) => json!({
            "n": p.n,
            "x": e_ball(p.x.ball()),
            "y": e_ball(p.y.ball()),
            "w": e_ball(p.w.ball()),
            "ix": e_mat(p.ix.matrix()),
            "jy": e_mat(p.jy.matrix()),
            "ix_cert": e_iso(&p.ix_cert),
            "jy_cert": e_iso(&p.jy_cert),
            "chain_x": e_chain(&p.chain_x),
            "chain_y": e_chain(&p.chain_y),
        }),
        Bundle::Correction(r) => json!({
            "f": e_map(&r.f),
            "eps": e_rat(&r.eps),
            "xy": e_ball(&r.xy),
            "i0": e_mat(r.i0.matrix()),
            "j0": e_mat(r.j0.matrix()),
            "i0_cert": e_iso(&r.i0_cert),
            "j0_cert": e_iso(&r.j0_cert),
            "chain_x": e_opt_chain(&r.chain_x),
            "chain_y": e_opt_chain(&r.chain_y),
        }),
        Bundle::State(s) => e_state(s),
        Bundle::Trace { state, trace } => json!({
            "state": e_state(state),
            "targets": trace.targets.iter().map(|x| e_ball(x.ball())).collect::<Vec<_>>(),
            "ks": trace.ks,
            "maps": trace.maps.iter().map(|a| json!({
                "matrix": e_mat(a.map.matrix()),
                "chain": e_chain(&a.chain),
                "cert": e_iso(&a.cert),
            })).collect::<Vec<_>>(),
            "steps": trace.steps.iter().map(|s| json!({
                "margin": e_rat(&s.margin),
                "closeness": e_rat(&s.closeness),
                "deviation": e_rat(&s.deviation),
            })).collect::<Vec<_>>(),
            "final_eps": e_rat(&trace.final_eps),
            "final_cert": e_eps(&trace.final_cert),
        }),
        Bundle::Cert(CertDoc::Isometry { map, cert }) => {
            json!({ "claim": "isometry", "map": e_map(map), "cert": e_iso(cert) })
        }
        Bundle::Cert(CertDoc::EpsIsometry { map, cert }) => {
            json!({ "claim": "eps_isometry", "map": e_map(map), "cert": e_eps(cert) })
        }
        Bundle::Cert(CertDoc::Arrow(a)) => json!({ "claim": "initial_arrow", "arrow": e_arrow(a) }),
        Bundle::Cert(CertDoc::RoundTrip(r)) => json!({
            "claim": "round_trip",
            "eps": e_rat(&r.eps),
            "deviation": e_rat(&r.deviation),
            "u": e_arrow(&r.u),
            "v": e_arrow(&r.v),
            "u_cert": e_eps(&r.u_cert),
            "v_cert": e_eps(&r.v_cert),
        }),
    }
}

/// Canonical text of a bundle, newline terminated.
pub fn emit_bundle(b: &Bundle) -> String {
    let doc = json!({ "format_version": FORMAT_VERSION, "kind": b.kind(), "payload": e_payload(b) });
    let mut s = serde_json::to_string_pretty(&doc).expect("values serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- parse

struct Dec<'a> {
    text: &'a str,
}

type Obj = Map<String, Value>;

impl<'a> Dec<'a> {
    /// Best-effort line of the first occurrence of `needle`, else 1.
    fn line_of(&self, needle: &str) -> usize {
        match self.text.find(needle) {
            Some(i) => self.text[..i].matches('\n').count() + 1,
            None => 1,
        }
    }

    fn err(&self, needle: &str, reason: impl Into<String>) -> Error {
        Error::ParseError { line: self.line_of(needle), reason: reason.into() }
    }

    fn obj<'v>(&self, v: &'v Value, what: &str) -> Result<&'v Obj> {
        v.as_object().ok_or_else(|| self.err(&format!("\"{what}\""), format!("{what}: expected an object")))
    }

    fn field<'v>(&self, o: &'v Obj, key: &str) -> Result<&'v Value> {
        o.get(key).ok_or_else(|| self.err("", format!("missing field \"{key}\"")))
    }

    fn uint(&self, o: &Obj, key: &str) -> Result<u64> {
        self.field(o, key)?
            .as_u64()
            .ok_or_else(|| self.err(&format!("\"{key}\""), format!("{key}: expected a natural number")))
    }

    fn index(&self, o: &Obj, key: &str) -> Result<usize> {
        usize::try_from(self.uint(o, key)?).map_err(|_| self.err(&format!("\"{key}\""), format!("{key}: too large")))
    }

    fn boolean(&self, o: &Obj, key: &str) -> Result<bool> {
        self.field(o, key)?
            .as_bool()
            .ok_or_else(|| self.err(&format!("\"{key}\""), format!("{key}: expected a boolean")))
    }

    fn string<'v>(&self, o: &'v Obj, key: &str) -> Result<&'v str> {
        self.field(o, key)?
            .as_str()
            .ok_or_else(|| self.err(&format!("\"{key}\""), format!("{key}: expected a string")))
    }

    fn array<'v>(&self, v: &'v Value, what: &str) -> Result<&'v Vec<Value>> {
        v.as_array().ok_or_else(|| self.err(&format!("\"{what}\""), format!("{what}: expected an array")))
    }

    fn rat(&self, v: &Value) -> Result<Rat> {
        match v {
            Value::String(s) => parse_rat(s).map_err(|_| self.err(&format!("\"{s}\""), format!("invalid rational \"{s}\""))),
            Value::Number(n) => {
                let s = n.to_string();
                parse_rat(&s).map_err(|_| self.err(&s, format!("invalid rational {s}")))
            }
            _ => Err(self.err("", "expected a rational string")),
        }
    }

    fn rat_field(&self, o: &Obj, key: &str) -> Result<Rat> {
        self.rat(self.field(o, key)?)
    }

    fn vec(&self, v: &Value, len: usize, what: &str) -> Result<RatVec> {
        let a = self.array(v, what)?;
        if a.len() != len {
            return Err(self.err(&format!("\"{what}\""), format!("{what}: expected {len} entries, found {}", a.len())));
        }
        a.iter().map(|x| self.rat(x)).collect()
    }

    fn mat(&self, v: &Value, rows: usize, cols: usize, what: &str) -> Result<RatMat> {
        let a = self.array(v, what)?;
        if a.len() != rows {
            return Err(self.err(&format!("\"{what}\""), format!("{what}: expected {rows} rows, found {}", a.len())));
        }
        let rs = a.iter().map(|r| self.vec(r, cols, what)).collect::<Result<Vec<_>>>()?;
        RatMat::from_row_vecs(cols, &rs)
    }

    fn mat_field(&self, o: &Obj, key: &str, rows: usize, cols: usize) -> Result<RatMat> {
        self.mat(self.field(o, key)?, rows, cols, key)
    }

    fn ball(&self, v: &Value, what: &str) -> Result<SymPolytope> {
        let o = self.obj(v, what)?;
        let dim = self.index(o, "dim")?;
        if !self.boolean(o, "symmetric")? {
            return Err(self.err("\"symmetric\"", format!("{what}: only symmetric storage is supported")));
        }
        let verts = self
            .array(self.field(o, "vertices")?, "vertices")?
            .iter()
            .map(|x| self.vec(x, dim, "vertices"))
            .collect::<Result<Vec<_>>>()?;
        let ball = SymPolytope::from_vertices(dim, &verts)
            .map_err(|e| self.err("\"vertices\"", format!("{what}: {e}")))?;
        if let Some(fv) = o.get("functionals") {
            let fs = self
                .array(fv, "functionals")?
                .iter()
                .map(|x| self.vec(x, dim, "functionals"))
                .collect::<Result<Vec<_>>>()?;
            let given = SymPolytope::from_functionals(dim, &fs)
                .map_err(|e| self.err("\"functionals\"", format!("{what}: {e}")))?;
            if given != ball {
                return Err(self.err("\"functionals\"", format!("{what}: functionals do not describe the vertex hull")));
            }
        }
        Ok(ball)
    }

    fn ball_field(&self, o: &Obj, key: &str) -> Result<SymPolytope> {
        self.ball(self.field(o, key)?, key)
    }

    fn space_field(&self, o: &Obj, key: &str) -> Result<MonotoneSpace> {
        MonotoneSpace::new(self.ball_field(o, key)?).map_err(|e| self.err(&format!("\"{key}\""), format!("{key}: {e}")))
    }

    fn map(&self, v: &Value, what: &str) -> Result<LinMap> {
        let o = self.obj(v, what)?;
        let dom = self.ball_field(o, "domain")?;
        let cod = self.ball_field(o, "codomain")?;
        let m = self.mat_field(o, "matrix", cod.dim(), dom.dim())?;
        LinMap::new(dom, cod, m)
    }

    fn chain(&self, v: &Value, ambient: usize, what: &str) -> Result<ProjectionChain> {
        let o = self.obj(v, what)?;
        self.chain_obj(o, ambient)
    }

    fn chain_obj(&self, o: &Obj, ambient: usize) -> Result<ProjectionChain> {
        let start = self.index(o, "start_rank")?;
        let ps = self
            .array(self.field(o, "projections")?, "projections")?
            .iter()
            .map(|p| self.mat(p, ambient, ambient, "projections"))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectionChain::new(start, ps))
    }

    fn witness(&self, v: &Value, what: &str) -> Result<Vec<Vec<WitnessTerm>>> {
        self.array(v, what)?
            .iter()
            .map(|terms| {
                self.array(terms, what)?
                    .iter()
                    .map(|t| {
                        let o = self.obj(t, what)?;
                        Ok(WitnessTerm {
                            coef: self.rat_field(o, "coef")?,
                            vertex: self.index(o, "vertex")?,
                            negated: self.boolean(o, "negated")?,
                        })
                    })
                    .collect()
            })
            .collect()
    }

    fn iso(&self, v: &Value, what: &str) -> Result<IsometryCert> {
        let o = self.obj(v, what)?;
        Ok(IsometryCert {
            upper: self.witness(self.field(o, "upper")?, "upper")?,
            lower: self.witness(self.field(o, "lower")?, "lower")?,
        })
    }

    fn eps_cert(&self, v: &Value, what: &str) -> Result<EpsIsometryCert> {
        let o = self.obj(v, what)?;
        Ok(EpsIsometryCert {
            eps: self.rat_field(o, "eps")?,
            upper: self.witness(self.field(o, "upper")?, "upper")?,
            lower: self.witness(self.field(o, "lower")?, "lower")?,
        })
    }

    /// Arrow without running the certificate checks.
    fn arrow(&self, v: &Value, what: &str) -> Result<InitialArrow> {
        let o = self.obj(v, what)?;
        let map = self.map(self.field(o, "map")?, "map")?;
        let chain = self.chain(self.field(o, "chain")?, map.codomain().dim(), "chain")?;
        let cert = self.iso(self.field(o, "cert")?, "cert")?;
        Ok(InitialArrow { map, chain, cert })
    }

    fn state(&self, v: &Value) -> Result<FraisseState> {
        let o = self.obj(v, "state")?;
        let c = self.obj(self.field(o, "config")?, "config")?;
        let b = self.obj(self.field(c, "budget")?, "budget")?;
        let budget = Budget::new(
            self.index(b, "max_dim")?,
            self.uint(b, "max_denominator")?,
            self.index(b, "max_generators")?,
        )
        .map_err(|e| self.err("\"budget\"", e.to_string()))?;
        let config = FraisseConfig {
            seed: self.uint(c, "seed")?,
            max_dim: self.index(c, "max_dim")?,
            denom0: self.uint(c, "denom0")?,
            budget,
        };
        let stages = self
            .array(self.field(o, "stages")?, "stages")?
            .iter()
            .map(|s| {
                let ball = self.ball(s, "stages")?;
                MonotoneSpace::new(ball).map_err(|e| self.err("\"stages\"", format!("stages: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if stages.is_empty() {
            return Err(self.err("\"stages\"", "stages: a state has at least one stage"));
        }
        let dim_of = |i: usize| -> Result<usize> {
            stages
                .get(i)
                .map(|s| s.dim())
                .ok_or_else(|| self.err("\"tasks\"", format!("tasks: stage {i} does not exist")))
        };
        let mut tasks = Vec::new();
        for t in self.array(self.field(o, "tasks")?, "tasks")? {
            let t = self.obj(t, "tasks")?;
            let n = self.index(t, "n")?;
            let z = self.ball_field(t, "z")?;
            let f = self.mat_field(t, "f", z.dim(), dim_of(n)?)?;
            let f_chain = self.chain(self.field(t, "f_chain")?, z.dim(), "f_chain")?;
            let og = self.obj(self.field(t, "origin")?, "origin")?;
            let origin = match self.string(og, "kind")? {
                "scheduled" => TaskOrigin::Scheduled { position: self.uint(og, "position")?, arrow: self.index(og, "arrow")? },
                "external" => TaskOrigin::External,
                k => return Err(self.err(&format!("\"{k}\""), format!("unknown task origin \"{k}\""))),
            };
            let st = self.obj(self.field(t, "status")?, "status")?;
            let status = match self.string(st, "kind")? {
                "pending" => TaskStatus::Pending,
                "deferred" => TaskStatus::Deferred(self.string(st, "reason")?.to_string()),
                "satisfied" => {
                    let m = self.index(st, "m")?;
                    let dm = dim_of(m)?;
                    TaskStatus::Satisfied {
                        m,
                        g: self.mat_field(st, "g", dm, z.dim())?,
                        chain: self.chain(self.field(st, "chain")?, dm, "chain")?,
                    }
                }
                k => return Err(self.err(&format!("\"{k}\""), format!("unknown task status \"{k}\""))),
            };
            tasks.push(ArrowTask { n, origin, z, f, f_chain, status });
        }
        Ok(FraisseState::from_parts(config, stages, tasks, self.uint(o, "cursor")?, self.index(o, "steps")?))
    }

    fn payload(&self, kind: &str, v: &Value) -> Result<Bundle> {
        let o = self.obj(v, "payload")?;
        Ok(match kind {
            "space" => Bundle::Space(self.ball(v, "payload")?),
            "map" => Bundle::Map(self.map(v, "payload")?),
            "chain" => {
                let ambient = self.ball_field(o, "ambient")?;
                let chain = self.chain_obj(o, ambient.dim())?;
                Bundle::Chain { ambient, chain }
            }
            "pushout" => {
                let (x, y, w) = (self.space_field(o, "x")?, self.space_field(o, "y")?, self.space_field(o, "w")?);
                let ix = LinMap::new(x.ball().clone(), w.ball().clone(), self.mat_field(o, "ix", w.dim(), x.dim())?)?;
                let jy = LinMap::new(y.ball().clone(), w.ball().clone(), self.mat_field(o, "jy", w.dim(), y.dim())?)?;
                Bundle::Pushout(PushoutResult {
                    n: self.index(o, "n")?,
                    ix_cert: self.iso(self.field(o, "ix_cert")?, "ix_cert")?,
                    jy_cert: self.iso(self.field(o, "jy_cert")?, "jy_cert")?,
                    chain_x: self.chain(self.field(o, "chain_x")?, w.dim(), "chain_x")?,
                    chain_y: self.chain(self.field(o, "chain_y")?, w.dim(), "chain_y")?,
                    x,
                    y,
                    w,
                    ix,
                    jy,
                })
            }
            "correction" => {
                let f = self.map(self.field(o, "f")?, "f")?;
                let xy = self.ball_field(o, "xy")?;
                let d = xy.dim();
                let i0 = LinMap::new(f.domain().clone(), xy.clone(), self.mat_field(o, "i0", d, f.domain().dim())?)?;
                let j0 = LinMap::new(f.codomain().clone(), xy.clone(), self.mat_field(o, "j0", d, f.codomain().dim())?)?;
                let opt = |key: &str| -> Result<Option<ProjectionChain>> {
                    match self.field(o, key)? {
                        Value::Null => Ok(None),
                        v => self.chain(v, d, key).map(Some),
                    }
                };
                Bundle::Correction(CorrectionResult {
                    eps: self.rat_field(o, "eps")?,
                    i0_cert: self.iso(self.field(o, "i0_cert")?, "i0_cert")?,
                    j0_cert: self.iso(self.field(o, "j0_cert")?, "j0_cert")?,
                    chain_x: opt("chain_x")?,
                    chain_y: opt("chain_y")?,
                    f,
                    xy,
                    i0,
                    j0,
                })
            }
            "state" => Bundle::State(self.state(v)?),
            "trace" => {
                let state = self.state(self.field(o, "state")?)?;
                let targets = self
                    .array(self.field(o, "targets")?, "targets")?
                    .iter()
                    .map(|t| {
                        MonotoneSpace::new(self.ball(t, "targets")?)
                            .map_err(|e| self.err("\"targets\"", format!("targets: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let ks = self
                    .array(self.field(o, "ks")?, "ks")?
                    .iter()
                    .map(|k| k.as_u64().map(|k| k as usize).ok_or_else(|| self.err("\"ks\"", "ks: expected naturals")))
                    .collect::<Result<Vec<_>>>()?;
                let raw = self.array(self.field(o, "maps")?, "maps")?;
                if raw.len() != targets.len() || ks.len() != targets.len() {
                    return Err(self.err("\"maps\"", "trace: targets, ks and maps differ in length"));
                }
                let mut maps = Vec::new();
                for ((m, x), k) in raw.iter().zip(&targets).zip(&ks) {
                    let mo = self.obj(m, "maps")?;
                    let y = state.stage(*k).map_err(|_| self.err("\"ks\"", format!("ks: stage {k} does not exist")))?;
                    let map = LinMap::new(x.ball().clone(), y.ball().clone(), self.mat_field(mo, "matrix", y.dim(), x.dim())?)?;
                    maps.push(InitialArrow {
                        chain: self.chain(self.field(mo, "chain")?, y.dim(), "chain")?,
                        cert: self.iso(self.field(mo, "cert")?, "cert")?,
                        map,
                    });
                }
                let steps = self
                    .array(self.field(o, "steps")?, "steps")?
                    .iter()
                    .map(|s| {
                        let so = self.obj(s, "steps")?;
                        Ok(StepSummary {
                            margin: self.rat_field(so, "margin")?,
                            closeness: self.rat_field(so, "closeness")?,
                            deviation: self.rat_field(so, "deviation")?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let trace = EmbeddingTrace {
                    targets,
                    maps,
                    ks,
                    steps,
                    final_eps: self.rat_field(o, "final_eps")?,
                    final_cert: self.eps_cert(self.field(o, "final_cert")?, "final_cert")?,
                };
                Bundle::Trace { state, trace }
            }
            "cert" => Bundle::Cert(match self.string(o, "claim")? {
                "isometry" => CertDoc::Isometry {
                    map: self.map(self.field(o, "map")?, "map")?,
                    cert: self.iso(self.field(o, "cert")?, "cert")?,
                },
                "eps_isometry" => CertDoc::EpsIsometry {
                    map: self.map(self.field(o, "map")?, "map")?,
                    cert: self.eps_cert(self.field(o, "cert")?, "cert")?,
                },
                "initial_arrow" => CertDoc::Arrow(self.arrow(self.field(o, "arrow")?, "arrow")?),
                "round_trip" => CertDoc::RoundTrip(RoundTrip {
                    eps: self.rat_field(o, "eps")?,
                    deviation: self.rat_field(o, "deviation")?,
                    u: self.arrow(self.field(o, "u")?, "u")?,
                    v: self.arrow(self.field(o, "v")?, "v")?,
                    u_cert: self.eps_cert(self.field(o, "u_cert")?, "u_cert")?,
                    v_cert: self.eps_cert(self.field(o, "v_cert")?, "v_cert")?,
                }),
                c => return Err(self.err(&format!("\"{c}\""), format!("unknown certificate claim \"{c}\""))),
            }),
            k => return Err(self.err(&format!("\"{k}\""), format!("unknown bundle kind \"{k}\""))),
        })
    }
}

/// Parses a bundle. Structural problems are `ParseError`s; the contained
/// certificates are not checked here (see [`verify_bundle`]).
pub fn parse_bundle(text: &str) -> Result<Bundle> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::ParseError { line: e.line().max(1), reason: e.to_string() })?;
    let d = Dec { text };
    let o = d.obj(&doc, "bundle")?;
    let version = d.uint(o, "format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let kind = d.string(o, "kind")?;
    d.payload(kind, d.field(o, "payload")?)
}

// ---------------------------------------------------------------- verify

fn named(name: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Certificate(s) => Error::Certificate(format!("{name}: {s}")),
        e => Error::Certificate(format!("{name}: {e}")),
    }
}

/// Re-checks every certificate a bundle carries, from its content alone.
/// Failures name the certificate that did not verify.
pub fn verify_bundle(b: &Bundle) -> Result<()> {
    match b {
        Bundle::Space(_) | Bundle::Map(_) => Ok(()),
        Bundle::Chain { ambient, chain } => check_chain(chain, ambient).map_err(named("chain")),
        Bundle::Pushout(p) => {
            p.ix_cert.verify(&p.ix).map_err(named("ix_cert"))?;
            p.jy_cert.verify(&p.jy).map_err(named("jy_cert"))?;
            verify_pushout(p).map_err(named("pushout"))
        }
        Bundle::Correction(r) => {
            r.i0_cert.verify(&r.i0).map_err(named("i0_cert"))?;
            r.j0_cert.verify(&r.j0).map_err(named("j0_cert"))?;
            verify_correction(r).map_err(named("correction"))
        }
        Bundle::State(s) => verify_state(s).map_err(named("state")),
        Bundle::Trace { state, trace } => {
            verify_state(state).map_err(named("state"))?;
            verify_trace(trace, state).map_err(named("trace"))
        }
        Bundle::Cert(CertDoc::Isometry { map, cert }) => cert.verify(map).map_err(named("isometry")),
        Bundle::Cert(CertDoc::EpsIsometry { map, cert }) => cert.verify(map).map_err(named("eps_isometry")),
        Bundle::Cert(CertDoc::Arrow(a)) => a.verify().map_err(named("initial_arrow")),
        Bundle::Cert(CertDoc::RoundTrip(r)) => {
            r.u.verify().map_err(named("u"))?;
            r.v.verify().map_err(named("v"))?;
            if r.u_cert.eps != r.eps || r.v_cert.eps != r.eps {
                return Err(Error::Certificate("round_trip: certificate ε differs from the claim".into()));
            }
            r.u_cert.verify(&r.u.map).map_err(named("u_cert"))?;
            r.v_cert.verify(&r.v.map).map_err(named("v_cert"))?;
            let vu = r.v.map.compose(&r.u.map).map_err(named("round_trip"))?;
            let incl = RatMat::inclusion(vu.codomain().dim(), vu.domain().dim());
            if vu.domain().dim() > 0 {
                let stage = SymPolytope::from_vertices(vu.domain().dim(), vu.domain().vertices())?;
                let head = MonotoneSpace::new(vu.codomain().clone())
                    .and_then(|s| s.truncate(vu.domain().dim()))
                    .map_err(named("round_trip"))?;
                if *head.ball() != stage {
                    return Err(Error::Certificate("round_trip: u's domain is not an initial stage of v's codomain".into()));
                }
            }
            let dev = op_norm(&vu.with_matrix(vu.matrix().sub(&incl)?)?);
            if dev != r.deviation || dev > r.eps || r.eps < Rat::zero() {
                return Err(Error::Certificate(format!(
                    "round_trip: deviation {} against claimed {} and ε {}",
                    fmt_rat(&dev),
                    fmt_rat(&r.deviation),
                    fmt_rat(&r.eps)
                )));
            }
            Ok(())
        }
    }
}
