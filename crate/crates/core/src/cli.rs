//! The `cophy` command line.
//!
//! Exit codes: 0 success, 1 the input is invalid or the request cannot be
//! met (not planar, not time-consistent, oracle limit), 2 usage errors and
//! unreadable files.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::generate::{
    complete_tree, gen_random_family, gen_sewing_tree, gen_ttcm_reduction, random_bijection,
    rng_from_seed, ttcm_min_crossings, RandomSpec,
};
use crate::io::{
    emit_json, emit_svg, parse_instance_with, CophyInstance, LayoutDocument, ParseOptions, SvgStyle,
};
use crate::layout::{check_layout, run_algorithm, Algorithm, LayoutOptions};
use crate::oracle::{brute_force_min_crossings, OracleLimits};
use crate::planar::is_planar_instance;
use crate::reconcile::{event_summary, CostVector, Reconciliation};
use crate::tree::parse_newick;

#[derive(Parser, Debug)]
#[command(
    name = "cophy",
    version,
    about = "Validate and draw host-parasite reconciliations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// Instance file (`#HOST`, `#PARASITE`, `#LEAFMAP`, `#GAMMA name`).
    file: PathBuf,
    /// Use the named mapping from the file.
    #[arg(long, conflicts_with = "lca")]
    gamma: Option<String>,
    /// Use the lca mapping of the leaf map.
    #[arg(long)]
    lca: bool,
    /// Name unlabeled internal nodes instead of rejecting the file.
    #[arg(long)]
    auto_label: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum AlgoArg {
    Planar,
    Shs,
    Smp,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Planar => Algorithm::Planar,
            AlgoArg::Shs => Algorithm::Shs,
            AlgoArg::Smp => Algorithm::Smp,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every mapping (or the selected one) against the validity conditions.
    Validate(Input),
    /// Event labels and losses of a mapping.
    Events {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        json: bool,
    },
    /// Decide time consistency and print an order of the parasite nodes.
    Timecheck(Input),
    /// Decide whether the instance admits a crossing-free drawing.
    Planar {
        file: PathBuf,
        #[arg(long)]
        auto_label: bool,
    },
    /// Draw a mapping.
    Layout {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "shs")]
        algo: AlgoArg,
        /// One level per longest-path layer instead of one per node.
        #[arg(long)]
        compact_y: bool,
        /// Run the host-switch heuristic even on planar instances.
        #[arg(long)]
        no_planar_shortcut: bool,
        /// Write the drawing as SVG
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the layout document as JSON
        #[arg(long)]
        json: Option<PathBuf>,
        /// `plain`, `default` or a JSON style file; defaults to $COPHY_STYLE.
        #[arg(long)]
        style: Option<String>,
        /// Record wall-clock time in the JSON output.
        #[arg(long)]
        timing: bool,
    },
    /// Exhaustive minimum crossing count for small instances.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = OracleLimits::default().max_states)]
        max_states: u64,
        /// Write the best layout found as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Generate instances.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Crossing statistics over every mapping of each file.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "shs")]
        algo: AlgoArg,
        #[arg(long)]
        compact_y: bool,
        /// Also write one JSON document per mapping into this directory.
        #[arg(long)]
        json_dir: Option<PathBuf>,
        #[arg(long)]
        auto_label: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Random trees, leaf map and mappings with host switches.
    Random {
        #[arg(long, default_value_t = 8)]
        host_leaves: usize,
        #[arg(long, default_value_t = 8)]
        parasite_leaves: usize,
        #[arg(long, default_value_t = 0.2)]
        switch_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of mappings over the same trees.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Drawing instance built from a random tanglegram of two complete trees.
    Ttcm {
        #[arg(long, default_value_t = 1)]
        height: u32,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// A single sewing tree on the host `(a,b)r;`.
    Sewing {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Failure with its exit code.
struct Fail(i32, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn invalid(msg: impl ToString) -> Fail {
    Fail(1, msg.to_string())
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Fail> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn load(file: &Path, auto_label: bool) -> Result<CophyInstance, Fail> {
    let text = read(file)?;
    parse_instance_with(
        &text,
        ParseOptions {
            auto_label_internal: auto_label,
        },
    )
    .map_err(|e| invalid(format!("{}: {e}", file.display())))
}

/// The mappings an [`Input`] selects, with their names.
fn selected(input: &Input) -> Result<Vec<(String, Reconciliation)>, Fail> {
    let inst = load(&input.file, input.auto_label)?;
    if input.lca {
        return Ok(vec![(
            "lca".into(),
            inst.lca_reconciliation().map_err(invalid)?,
        )]);
    }
    if let Some(name) = &input.gamma {
        let i = inst
            .gamma_index(name)
            .ok_or_else(|| usage(format!("no mapping named `{name}`")))?;
        return Ok(vec![(
            name.clone(),
            inst.reconciliation(i).map_err(invalid)?,
        )]);
    }
    if inst.gammas.is_empty() {
        return Err(usage(
            "the file has no #GAMMA section; pass --lca to use the lca mapping",
        ));
    }
    (0..inst.gammas.len())
        .map(|i| {
            Ok((
                inst.gammas[i].name.clone(),
                inst.reconciliation(i).map_err(invalid)?,
            ))
        })
        .collect()
}

fn single(input: &Input) -> Result<(String, Reconciliation), Fail> {
    let mut all = selected(input)?;
    if all.len() > 1 {
        return Err(usage(format!(
            "the file holds {} mappings; choose one with --gamma NAME",
            all.len()
        )));
    }
    Ok(all.remove(0))
}

fn w(out: &mut dyn Write, s: String) -> Result<(), Fail> {
    out.write_all(s.as_bytes())
        .map_err(|e| usage(format!("cannot write output: {e}")))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Fail> {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("cannot write output: {e}"))),
    }
}

pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(()) => 0,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn run(cmd: Command, out: &mut dyn Write) -> Result<(), Fail> {
    match cmd {
        Command::Validate(input) => {
            let mut bad = 0;
            for (name, rec) in selected(&input)? {
                let report = rec.validate();
                if report.is_valid() {
                    w(out, format!("{name}: valid\n"))?;
                } else {
                    bad += 1;
                    w(out, format!("{name}: invalid: {report}\n"))?;
                }
            }
            if bad > 0 {
                return Err(invalid(format!("{bad} invalid mapping(s)")));
            }
        }
        Command::Events { input, json } => {
            let (name, rec) = single(&input)?;
            rec.ensure_valid().map_err(invalid)?;
            let report = rec.classify_events().map_err(invalid)?;
            let summary = event_summary(&rec, &report);
            let cost = report.cost(&CostVector::default());
            if json {
                let p = rec.parasite();
                let nodes: std::collections::BTreeMap<String, _> = report
                    .events
                    .iter()
                    .map(|(v, k)| (p.label(*v).to_string(), *k))
                    .collect();
                let v = serde_json::json!({
                    "gamma": name,
                    "counts": summary,
                    "cost": cost,
                    "events": nodes,
                });
                w(
                    out,
                    format!("{}\n", serde_json::to_string_pretty(&v).expect("json")),
                )?;
            } else {
                w(out, format!("mapping {name}\n"))?;
                for (k, n) in &summary {
                    w(out, format!("{k:>13} {n}\n"))?;
                }
                w(out, format!("{:>13} {cost}\n", "cost"))?;
            }
        }
        Command::Timecheck(input) => {
            let (name, rec) = single(&input)?;
            rec.ensure_valid().map_err(invalid)?;
            match rec.check_time_consistency() {
                Some(order) => {
                    let p = rec.parasite();
                    let labels: Vec<&str> = order.order.iter().map(|&v| p.label(v)).collect();
                    w(
                        out,
                        format!("{name}: time-consistent\norder: {}\n", labels.join(" ")),
                    )?;
                }
                None => {
                    w(out, format!("{name}: not time-consistent\n"))?;
                    return Err(invalid("the time constraints are cyclic"));
                }
            }
        }
        Command::Planar { file, auto_label } => {
            let inst = load(&file, auto_label)?;
            let planar =
                is_planar_instance(&inst.host, &inst.parasite, &inst.phi).map_err(invalid)?;
            w(
                out,
                format!("{}\n", if planar { "planar" } else { "not planar" }),
            )?;
        }
        Command::Layout {
            input,
            algo,
            compact_y,
            no_planar_shortcut,
            svg,
            json,
            style,
            timing,
        } => {
            let (name, rec) = single(&input)?;
            let opts = LayoutOptions {
                compact_y,
                planar_shortcut: !no_planar_shortcut,
            };
            let algo: Algorithm = algo.into();
            let start = Instant::now();
            let layout = run_algorithm(algo, &rec, opts).map_err(invalid)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let report = check_layout(&layout, &rec);
            if !report.is_valid() {
                return Err(invalid(format!(
                    "internal error: layout fails its checks: {:?}",
                    report.violations
                )));
            }
            let mut doc = LayoutDocument::new(&rec, &name, algo, opts, layout).map_err(invalid)?;
            if timing {
                doc.elapsed_ms = Some((ms * 1e3).round() / 1e3);
            }
            if let Some(p) = &svg {
                let style = match &style {
                    Some(s) => SvgStyle::named_or_file(s),
                    None => SvgStyle::from_env(),
                }
                .map_err(|e| usage(e.to_string()))?;
                write_file(p, &emit_svg(&doc, &style))?;
            }
            if json.is_some() || svg.is_none() {
                emit(out, json.as_deref(), &emit_json(&doc))?;
            }
            if json.is_some() || svg.is_some() {
                w(out, format!("{name}: {} crossing(s)\n", doc.crossing_count))?;
            }
        }
        Command::Oracle {
            input,
            max_states,
            json,
        } => {
            let (name, rec) = single(&input)?;
            let limits = OracleLimits {
                max_states,
                ..OracleLimits::default()
            };
            let res = brute_force_min_crossings(&rec, limits).map_err(invalid)?;
            w(
                out,
                format!(
                    "{name}: minimum {} crossing(s) over {} states\n",
                    res.min_crossings, res.states
                ),
            )?;
            if let Some(p) = json {
                let doc = LayoutDocument::new(
                    &rec,
                    &name,
                    Algorithm::Shs,
                    LayoutOptions::default(),
                    res.layout,
                )
                .map_err(invalid)?;
                let mut v = serde_json::to_value(&doc).expect("json");
                v["algorithm"] = serde_json::Value::String("oracle".into());
                let mut text = serde_json::to_string_pretty(&v).expect("json");
                text.push('\n');
                write_file(&p, &text)?;
            }
        }
        Command::Gen { kind } => gen(kind, out)?,
        Command::Stats {
            files,
            algo,
            compact_y,
            json_dir,
            auto_label,
        } => stats(
            &files,
            algo.into(),
            compact_y,
            json_dir.as_deref(),
            auto_label,
            out,
        )?,
    }
    Ok(())
}

fn gen(kind: GenKind, out: &mut dyn Write) -> Result<(), Fail> {
    match kind {
        GenKind::Random {
            host_leaves,
            parasite_leaves,
            switch_rate,
            seed,
            count,
            output,
        } => {
            if count == 0 {
                return Err(usage("--count must be positive"));
            }
            let spec = RandomSpec {
                host_leaves,
                parasite_leaves,
                switch_rate,
                seed,
            };
            let fam = gen_random_family(spec, count).map_err(|e| usage(e.to_string()))?;
            let mut inst = CophyInstance::from_reconciliation(&fam[0], "g0");
            for (i, r) in fam.iter().enumerate().skip(1) {
                inst.gammas.push(crate::io::NamedGamma {
                    name: format!("g{i}"),
                    gamma: r.gamma_vec().to_vec(),
                });
            }
            emit(out, output.as_deref(), &inst.to_text())?;
        }
        GenKind::Ttcm {
            height,
            k,
            seed,
            output,
        } => {
            if height > 4 {
                return Err(usage("--height above 4 builds enormous sewing trees"));
            }
            let t1 = complete_tree(height, "l", "i").map_err(|e| usage(e.to_string()))?;
            let t2 = complete_tree(height, "m", "j").map_err(|e| usage(e.to_string()))?;
            let psi = random_bijection(&t1, &t2, &mut rng_from_seed(seed));
            let inst = gen_ttcm_reduction(&t1, &t2, &psi, k).map_err(|e| usage(e.to_string()))?;
            let text = CophyInstance::from_reconciliation(&inst.rec, "reduction").to_text();
            let p1: Vec<String> = psi
                .iter()
                .map(|&(a, b)| format!("{}-{}", t1.label(a), t2.label(b)))
                .collect();
            let header = format!(
                "// tangles: {}; tanglegram minimum {}; k' = {}\n",
                p1.join(" "),
                ttcm_min_crossings(&t1, &t2, &psi),
                inst.k_prime
            );
            match output {
                Some(p) => {
                    write_file(&p, &text)?;
                    out.write_all(header.as_bytes())
                        .map_err(|e| usage(e.to_string()))?;
                }
                None => emit(out, None, &text)?,
            }
        }
        GenKind::Sewing { m, output } => {
            let host = std::sync::Arc::new(parse_newick("(a,b)r;").expect("fixed tree"));
            let (a, b) = (host.node("a").expect("a"), host.node("b").expect("b"));
            let s = gen_sewing_tree(&host, m, a, b, "").map_err(|e| usage(e.to_string()))?;
            let rec = s
                .to_reconciliation(host)
                .map_err(|e| usage(e.to_string()))?;
            let text = CophyInstance::from_reconciliation(&rec, "sewing").to_text();
            emit(out, output.as_deref(), &text)?;
        }
    }
    Ok(())
}

/// One row of the statistics table.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsRow {
    pub instance: String,
    pub reconciliations: usize,
    pub max: usize,
    pub min: usize,
    pub avg: f64,
    pub avg_ms: f64,
}

pub fn stats_header() -> &'static str {
    "instance\t#rec\tmax\tmin\tavg\tavg_ms"
}

impl StatsRow {
    /// Aggregates `(crossings, ms)` pairs; the order of `samples` does not
    /// affect the result beyond floating-point summation, which is done
    /// over the sorted samples.
    pub fn from_samples(instance: &str, samples: &[(usize, f64)]) -> Self {
        let mut s = samples.to_vec();
        s.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let n = s.len().max(1) as f64;
        StatsRow {
            instance: instance.to_string(),
            reconciliations: s.len(),
            max: s.iter().map(|x| x.0).max().unwrap_or(0),
            min: s.iter().map(|x| x.0).min().unwrap_or(0),
            avg: s.iter().map(|x| x.0 as f64).sum::<f64>() / n,
            avg_ms: s.iter().map(|x| x.1).sum::<f64>() / n,
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{:.2}\t{:.3}",
            self.instance, self.reconciliations, self.max, self.min, self.avg, self.avg_ms
        )
    }
}

fn stats(
    files: &[PathBuf],
    algo: Algorithm,
    compact_y: bool,
    json_dir: Option<&Path>,
    auto_label: bool,
    out: &mut dyn Write,
) -> Result<(), Fail> {
    let opts = LayoutOptions {
        compact_y,
        ..LayoutOptions::default()
    };
    if let Some(d) = json_dir {
        std::fs::create_dir_all(d)
            .map_err(|e| usage(format!("cannot create {}: {e}", d.display())))?;
    }
    let mut lines = vec![stats_header().to_string()];
    for file in files {
        let inst = load(file, auto_label)?;
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "instance".into());
        let recs: Vec<(String, Reconciliation)> = if inst.gammas.is_empty() {
            vec![("lca".into(), inst.lca_reconciliation().map_err(invalid)?)]
        } else {
            (0..inst.gammas.len())
                .map(|i| {
                    Ok((
                        inst.gammas[i].name.clone(),
                        inst.reconciliation(i).map_err(invalid)?,
                    ))
                })
                .collect::<Result<_, Fail>>()?
        };
        let results: Vec<Result<(String, LayoutDocument), String>> = recs
            .par_iter()
            .map(|(name, rec)| {
                let start = Instant::now();
                let layout = run_algorithm(algo, rec, opts).map_err(|e| format!("{name}: {e}"))?;
                let ms = start.elapsed().as_secs_f64() * 1e3;
                let mut doc = LayoutDocument::new(rec, name, algo, opts, layout)
                    .map_err(|e| format!("{name}: {e}"))?;
                doc.elapsed_ms = Some(ms);
                Ok((name.clone(), doc))
            })
            .collect();
        let mut samples = Vec::new();
        let mut skipped = Vec::new();
        for r in results {
            match r {
                Ok((name, doc)) => {
                    if let Some(d) = json_dir {
                        write_file(&d.join(format!("{stem}.{name}.json")), &emit_json(&doc))?;
                    }
                    samples.push((doc.crossing_count, doc.elapsed_ms.unwrap_or(0.0)));
                }
                Err(e) => skipped.push(e),
            }
        }
        lines.push(StatsRow::from_samples(&stem, &samples).to_line());
        for s in skipped {
            lines.push(format!("# skipped {s}"));
        }
    }
    let mut text = lines.join("\n");
    text.push('\n');
    emit(out, None, &text)
}
