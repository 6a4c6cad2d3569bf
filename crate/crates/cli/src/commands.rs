//! Subcommand implementations and artifact writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use fraclab_core::acceptance::{perturb, run_criterion};
use fraclab_core::capacity::{capacity, CapacitySet};
use fraclab_core::duality::{build_conjugate, integrate_conjugate, verify_solution_via_conjugate, Tolerances};
use fraclab_core::energy::total_energy;
use fraclab_core::experiments::{
    convergence_against, make_sequence, quasistatic_evolve, reference_solution, ConvergenceTable, LoadProgram,
    UNILATERAL_TOL,
};
use fraclab_core::mesh::CrackedMesh;
use fraclab_core::solver::{solve_elastic, FieldSolution, SolveOptions, EL_TOL};
use fraclab_core::{svg, BoundaryKind, Crack, Domain, Point};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, EvolveConfig, SolveConfig, StabilityConfig};
use crate::{CliError, Command};

pub struct Context {
    pub seed: u64,
    pub threads: usize,
}

pub fn dispatch(cmd: &Command, ctx: &Context) -> Result<i32, CliError> {
    match cmd {
        Command::Solve { config, out } => solve(config, out, ctx),
        Command::Conjugate { solution, out, noise } => {
            let out = out.clone().unwrap_or_else(|| solution.join("conjugate"));
            conjugate(solution, &out, *noise, ctx)
        }
        Command::Capacity { set, r, n, container, sides, out } => {
            capacity_cmd(set, *r, *n, container, *sides, out, ctx)
        }
        Command::Stability { config, out } => stability(config, out, ctx),
        Command::Evolve { config, out } => evolve(config, out, ctx),
        Command::Selftest { only, out } => selftest(only, out.as_deref(), ctx),
    }
}

/// Collects output files and timings for the manifest.
struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
    timings: BTreeMap<String, f64>,
    clock: Instant,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), timings: BTreeMap::new(), clock: Instant::now() })
    }

    fn lap(&mut self, name: &str) {
        let t = self.clock.elapsed().as_secs_f64() * 1e3;
        self.timings.insert(name.to_string(), t);
        self.clock = Instant::now();
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(format!("{}: {e}", parent.display())))?;
        }
        std::fs::write(&path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(v).map_err(CliError::io)?;
        self.write(name, &(text + "\n"))
    }

    fn manifest(&mut self, command: &str, ctx: &Context, config: Value, results: Value) -> Result<(), CliError> {
        self.files.push("manifest.json".into());
        let m = json!({
            "tool": "fraclab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": ctx.seed,
            "threads": ctx.threads,
            "config": config,
            "tolerances": {
                "el_residual": EL_TOL,
                "unilateral": UNILATERAL_TOL,
                "conjugate": Tolerances::default(),
            },
            "results": results,
            "outputs": self.files,
            "timings_ms": self.timings,
        });
        let text = serde_json::to_string_pretty(&m).map_err(CliError::io)? + "\n";
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
    }
}

fn to_value(v: &impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(CliError::io)
}

fn nodes_csv(mesh: &CrackedMesh, values: &[f64]) -> String {
    let mut s = String::from("node_id,x,y,u\n");
    for (i, (n, v)) in mesh.nodes().iter().zip(values).enumerate() {
        let _ = writeln!(s, "{i},{},{},{v}", n.x.x, n.x.y);
    }
    s
}

fn gradients_csv(u: &FieldSolution) -> String {
    let mut s = String::from("triangle_id,cx,cy,gx,gy\n");
    for (i, (t, g)) in u.mesh().triangles().iter().zip(u.gradients()).enumerate() {
        let _ = writeln!(s, "{i},{},{},{},{}", t.centroid.x, t.centroid.y, g[0], g[1]);
    }
    s
}

fn solve(config: &Path, out: &Path, ctx: &Context) -> Result<i32, CliError> {
    let cfg: SolveConfig = config::load(config)?;
    let dom = cfg.domain.build()?;
    let mut art = Artifacts::new(out)?;
    let mesh = Arc::new(CrackedMesh::build(&dom, &cfg.crack, cfg.solve.resolution)?);
    let opts = SolveOptions {
        tol: cfg.solve.tol,
        max_iterations: cfg.solve.max_iterations,
        time: cfg.solve.time,
        initial: None,
    };
    let u = solve_elastic(mesh, &cfg.density, &cfg.solve.datum, &opts)?;
    let energy = total_energy(&u, &cfg.crack, &cfg.density)?;
    art.lap("solve");
    art.write("nodes.csv", &nodes_csv(u.mesh(), u.values()))?;
    art.write("gradients.csv", &gradients_csv(&u))?;
    art.write("solution.svg", &svg::solution_heatmap(&u))?;
    art.lap("write");
    let d = u.diagnostics();
    let results = json!({
        "resolution": cfg.solve.resolution,
        "nodes": u.mesh().nodes().len(),
        "triangles": u.mesh().triangles().len(),
        "components": u.mesh().component_count(),
        "residual": d.residual,
        "iterations": d.iterations,
        "energy": energy,
    });
    art.manifest("solve", ctx, to_value(&cfg)?, results)?;
    println!("{}", json!({ "residual": d.residual, "iterations": d.iterations, "energy": energy }));
    Ok(0)
}

/// Rebuilds the solution stored by `solve` in `dir`.
fn load_solution(dir: &Path) -> Result<(SolveConfig, FieldSolution), CliError> {
    let manifest = dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest).map_err(|e| CliError::io(format!("{}: {e}", manifest.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::schema(format!("{}: {e}", manifest.display())))?;
    if v.get("command").and_then(Value::as_str) != Some("solve") {
        return Err(CliError::schema(format!("{} was not written by `solve`", manifest.display())));
    }
    let cfg: SolveConfig = config::load(&manifest)?;
    let nodes = dir.join("nodes.csv");
    let text = std::fs::read_to_string(&nodes).map_err(|e| CliError::io(format!("{}: {e}", nodes.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().skip(1).enumerate() {
        let u = line
            .rsplit(',')
            .next()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| CliError::schema(format!("{}: bad row {}", nodes.display(), i + 2)))?;
        values.push(u);
    }
    let dom = cfg.domain.build()?;
    let mesh = Arc::new(CrackedMesh::build(&dom, &cfg.crack, cfg.solve.resolution)?);
    let u = FieldSolution::from_values(mesh, &cfg.density, &cfg.solve.datum, cfg.solve.time, values)?;
    Ok((cfg, u))
}

fn conjugate(solution: &Path, out: &Path, noise: f64, ctx: &Context) -> Result<i32, CliError> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(CliError::schema("--noise must be a nonnegative number"));
    }
    let (cfg, u) = load_solution(solution)?;
    let u = if noise > 0.0 { perturb(&u, noise, ctx.seed)? } else { u };
    let mut art = Artifacts::new(out)?;
    let v = if noise > 0.0 { integrate_conjugate(&u)? } else { build_conjugate(&u)? };
    let verdict = verify_solution_via_conjugate(&u, &v)?;
    art.lap("conjugate");
    let mut csv = String::from("edge_id,triangle_id,x,y,v\n");
    for (e, t, val) in v.midpoint_values() {
        let m = u.mesh().edge_midpoint(e);
        let _ = writeln!(csv, "{e},{t},{},{},{val}", m.x, m.y);
    }
    art.write("conjugate.csv", &csv)?;
    let components: Vec<Value> = v
        .components()
        .iter()
        .map(|c| {
            json!({
                "crack_edges": c.crack_edges,
                "neumann_edges": c.neumann_edges,
                "oscillation": c.oscillation,
                "relative_oscillation": c.oscillation / v.sup_norm().max(f64::MIN_POSITIVE),
            })
        })
        .collect();
    let report = json!({
        "verdict": verdict,
        "sup_norm": v.sup_norm(),
        "flux_norm": v.flux_norm(),
        "interior_vertices": v.circulation().len(),
        "components": components,
    });
    art.json("report.json", &report)?;
    art.write("conjugate.svg", &svg::conjugate_contours(&v))?;
    art.lap("write");
    let inputs = json!({ "solution": solution.display().to_string(), "noise": noise, "solve": cfg });
    art.manifest("conjugate", ctx, inputs, to_value(&verdict)?)?;
    println!("{}", serde_json::to_string(&verdict).map_err(CliError::io)?);
    Ok(0)
}

fn numbers(arg: &str, count: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = arg
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::schema(format!("expected {count} numbers in `{arg}`")))?;
    if v.len() != count {
        return Err(CliError::schema(format!("expected {count} numbers in `{arg}`")));
    }
    Ok(v)
}

pub fn parse_set(arg: &str, sides: usize) -> Result<CapacitySet, CliError> {
    let (kind, rest) = arg.split_once(':').ok_or_else(|| CliError::schema(format!("bad set `{arg}`")))?;
    Ok(match kind {
        "point" => {
            let v = numbers(rest, 2)?;
            CapacitySet::point(Point::new(v[0], v[1]))
        }
        "segment" => {
            let v = numbers(rest, 4)?;
            CapacitySet::Crack { crack: Crack::segment(Point::new(v[0], v[1]), Point::new(v[2], v[3])) }
        }
        "disk" => {
            let v = numbers(rest, 3)?;
            if !(v[2] > 0.0) {
                return Err(CliError::schema("disk radius must be positive"));
            }
            CapacitySet::disk(Point::new(v[0], v[1]), v[2], sides)
        }
        _ => return Err(CliError::schema(format!("unknown set kind `{kind}`"))),
    })
}

pub fn parse_container(arg: &str, sides: usize) -> Result<Domain, CliError> {
    let (kind, rest) = arg.split_once(':').ok_or_else(|| CliError::schema(format!("bad container `{arg}`")))?;
    match kind {
        "disk" => {
            let v = numbers(rest, 3)?;
            Ok(Domain::regular_polygon(Point::new(v[0], v[1]), v[2], sides, BoundaryKind::Dirichlet)?)
        }
        "rect" => {
            let v = numbers(rest, 4)?;
            Ok(Domain::rectangle(v[0], v[1], v[2], v[3], [BoundaryKind::Dirichlet; 4])?)
        }
        _ => Err(CliError::schema(format!("unknown container kind `{kind}`"))),
    }
}

fn capacity_cmd(set: &str, r: f64, n: usize, container: &str, sides: usize, out: &Path, ctx: &Context) -> Result<i32, CliError> {
    if sides < 3 {
        return Err(CliError::schema("--sides must be at least 3"));
    }
    let e = parse_set(set, sides)?;
    let b = parse_container(container, sides)?;
    let mut art = Artifacts::new(out)?;
    let c = capacity(&e, &b, r, n)?;
    art.lap("capacity");
    art.write("potential.csv", &nodes_csv(&c.mesh, &c.potential))?;
    art.write("potential.svg", &svg::nodal_heatmap(&c.mesh, &c.potential))?;
    art.lap("write");
    let inputs = json!({ "set": e, "set_arg": set, "container": b, "container_arg": container, "r": r, "n": n, "sides": sides });
    let results = json!({ "capacity": c.value, "iterations": c.iterations, "residual": c.residual });
    art.manifest("capacity", ctx, inputs, results.clone())?;
    println!("{results}");
    Ok(0)
}

fn table_csv(t: &ConvergenceTable) -> String {
    let mut s = String::from(
        "h,n_h,d_H,H1,components,added_length,bulk,grad_error,relative_error,energy_total,residual,iterations,failure\n",
    );
    for r in &t.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.h,
            r.resolution,
            r.hausdorff,
            r.length,
            r.components,
            r.added_length,
            r.bulk,
            r.error,
            r.relative_error,
            r.total,
            r.residual,
            r.iterations,
            r.failure.as_deref().unwrap_or("").replace([',', '\n'], ";")
        );
    }
    s
}

fn stability(config: &Path, out: &Path, ctx: &Context) -> Result<i32, CliError> {
    let cfg: StabilityConfig = config::load(config)?;
    let dom = cfg.domain.build()?;
    let raw = make_sequence(cfg.sequence.kind, &dom, &cfg.sequence.limit, &cfg.sequence.params)?;
    let primary = match cfg.stability.join {
        Some(f) => raw.joined(f, &dom.neumann_part())?,
        None => raw.clone(),
    };
    let mut art = Artifacts::new(out)?;
    let d = &cfg.density;
    let g = &cfg.stability.datum;
    let reference = reference_solution(&primary, g, d, cfg.stability.convergence.reference_resolution)?;
    art.lap("reference");
    let exponent = cfg.stability.convergence.exponent;
    let table = convergence_against(&primary, g, d, &reference, exponent)?;
    let raw_table = match cfg.stability.join {
        Some(_) => Some(convergence_against(&raw, g, d, &reference, exponent)?),
        None => None,
    };
    art.lap("sequence");
    art.write("table.csv", &table_csv(&table))?;
    let series = |t: &ConvergenceTable| t.rows.iter().map(|r| (r.h as f64, r.relative_error)).collect::<Vec<_>>();
    let label = if cfg.stability.join.is_some() { "joined" } else { "relative error" };
    let mut plot = vec![(label.to_string(), series(&table))];
    if let Some(rt) = &raw_table {
        art.write("raw_table.csv", &table_csv(rt))?;
        plot.push(("raw".to_string(), series(rt)));
    }
    let title = format!("relative L^{} gradient error", table.exponent);
    art.write("error_decay.svg", &svg::line_plot(&title, "h", &plot, true))?;
    let members: Vec<Crack> = primary.members.iter().map(|m| m.crack.clone()).collect();
    art.write("sequence.svg", &svg::domain_overlay(&dom, &members))?;
    art.lap("write");
    let results = json!({ "table": table, "raw_table": raw_table });
    art.manifest("stability", ctx, to_value(&cfg)?, results)?;
    let last = table.rows.last().map(|r| r.relative_error);
    println!("{}", json!({ "rows": table.rows.len(), "final_relative_error": last }));
    Ok(0)
}

fn evolve(config: &Path, out: &Path, ctx: &Context) -> Result<i32, CliError> {
    let cfg: EvolveConfig = config::load(config)?;
    let dom = cfg.domain.build()?;
    let load = LoadProgram::new(cfg.evolve.datum.clone(), cfg.evolve.times.times())?;
    let mut art = Artifacts::new(out)?;
    let state = quasistatic_evolve(&dom, &cfg.density, &load, &cfg.evolve.dictionary, &cfg.evolve.options)?;
    art.lap("evolve");
    let mut csv = String::from("step,time,bulk,surface,total,gap,components,added\n");
    for (i, s) in state.steps.iter().enumerate() {
        let added = s.added.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";");
        let _ = writeln!(
            csv,
            "{i},{},{},{},{},{},{},{added}",
            s.time,
            s.energy.bulk,
            s.energy.surface,
            s.energy.total,
            s.gap,
            s.crack.component_count()
        );
        let step = json!({
            "step": i,
            "time": s.time,
            "crack": s.crack,
            "energy": s.energy,
            "added": s.added,
            "substep_energies": s.substep_energies,
            "gap": s.gap,
            "residual": s.solution.diagnostics().residual,
            "iterations": s.solution.diagnostics().iterations,
        });
        art.json(&format!("steps/step_{i:03}.json"), &step)?;
    }
    art.write("energies.csv", &csv)?;
    let history: Vec<(f64, Crack)> = state.steps.iter().map(|s| (s.time, s.crack.clone())).collect();
    art.write("history.svg", &svg::crack_history(&dom, &history))?;
    art.lap("write");
    let results = json!({
        "steps": state.steps.len(),
        "irreversible": state.is_irreversible(),
        "first_growth": state.first_growth(&cfg.evolve.options.initial_crack),
        "aborted": state.aborted,
    });
    art.manifest("evolve", ctx, to_value(&cfg)?, results.clone())?;
    println!("{results}");
    match state.aborted {
        Some(msg) => Err(CliError { kind: crate::ErrorKind::Solver, message: msg }),
        None => Ok(0),
    }
}

fn selftest(only: &[u8], out: Option<&Path>, ctx: &Context) -> Result<i32, CliError> {
    let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=10).contains(&i)) {
        return Err(CliError::schema(format!("no criterion {bad}")));
    }
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, ctx.seed);
        println!("{r}");
        results.push(r);
    }
    if let Some(dir) = out {
        let mut art = Artifacts::new(dir)?;
        art.json("selftest.json", &results)?;
        art.manifest("selftest", ctx, json!({ "criteria": results.iter().map(|r| r.id).collect::<Vec<_>>() }), to_value(&results)?)?;
    }
    Ok(if results.iter().all(|r| r.pass) { 0 } else { 1 })
}
