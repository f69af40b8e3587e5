//! Command-line surface: runs the library pipelines and emits
//! machine-readable artifacts (JSON scalar reports, CSV curves, JSON-lines
//! traces).
//!
//! Exit codes: 0 success, 2 partial result (truncated tower, straddle or
//! tower-exhausted trace), 1 error (an error JSON is printed).

use clap::{Parser, Subcommand};
use henon_renorm::approach::{
    closest_approach, double_sequence, rate_report, PlanarSet, Square, Terminal, TraceOptions,
};
use henon_renorm::henon::MapSpec;
use henon_renorm::regions::{compute_k, verify_region_geometry};
use henon_renorm::renorm::{build_tower, RenormTower};
use henon_renorm::unimodal::{identity_report, solve_feigenbaum};
use serde::Deserialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "henon-renorm",
    about = "Period-doubling renormalization toolkit for Henon-like maps",
    version
)]
struct Cli {
    /// Optional JSON config with default values for the flags
    /// (precedence: flags > config > built-in defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Feigenbaum functional equation and write feigenbaum.json.
    Feigenbaum {
        /// Chebyshev degree of g.
        #[arg(long)]
        degree: Option<usize>,
        /// Solver residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Build the renormalization tower and write tower.json.
    Tower {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Write the five partition-manifold CSVs of one tower level.
    Partition {
        #[arg(long)]
        map: PathBuf,
        /// Tower level of the partition.
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Good/bad-region boundary and geometry checks; writes regions.json.
    Regions {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Closest-approach trace of a rectangle; writes trace.jsonl.
    Approach {
        #[arg(long)]
        map: PathBuf,
        /// Rectangle "x1,x2,y1,y2".
        #[arg(long = "J", allow_hyphen_values = true)]
        j: String,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        /// Also write per-step boundary polylines as CSV.
        #[arg(long, default_value_t = false)]
        dump_sets: bool,
    },
    /// Double sequence from a square; writes rows.json.
    Double {
        #[arg(long)]
        map: PathBuf,
        /// Square "x1,x2,y1,y2" (must be square).
        #[arg(long = "J", allow_hyphen_values = true)]
        j: String,
        #[arg(long)]
        max_rows: Option<usize>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
    },
}

/// Config-file defaults, overridden by flags.
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    depth: Option<usize>,
    b: Option<f64>,
    max_steps: Option<usize>,
    max_rows: Option<usize>,
    tol: Option<f64>,
    degree: Option<usize>,
    out: Option<PathBuf>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, String> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| format!("config {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", p.display()))
        }
    }
}

fn load_map(path: &Path) -> Result<henon_renorm::henon::HenonMap, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("map {}: {e}", path.display()))?;
    let spec = MapSpec::from_json(&text).map_err(|e| e.to_string())?;
    spec.build().map_err(|e| e.to_string())
}

fn parse_rect(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("--J: {e}"))?;
    if parts.len() != 4 {
        return Err(format!(
            "--J needs x1,x2,y1,y2 (got {} values)",
            parts.len()
        ));
    }
    if parts[0] >= parts[1] || parts[2] >= parts[3] {
        return Err("--J: need x1 < x2 and y1 < y2".into());
    }
    Ok([parts[0], parts[1], parts[2], parts[3]])
}

fn check_rect_in_domain(map: &henon_renorm::henon::HenonMap, r: [f64; 4]) -> Result<(), String> {
    if r[0] < map.ih.lo || r[1] > map.ih.hi || r[2] < map.iv.lo || r[3] > map.iv.hi {
        return Err(format!(
            "rectangle {:?} outside the map domain [{}, {}] x [{}, {}]",
            r, map.ih.lo, map.ih.hi, map.iv.lo, map.iv.hi
        ));
    }
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, format!("{:#}\n", value)).map_err(|e| format!("{}: {e}", path.display()))
}

fn build_tower_checked(map_path: &Path, depth: usize) -> Result<RenormTower, String> {
    let map = load_map(map_path)?;
    build_tower(map, depth).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            let err = json!({"error": msg});
            eprintln!("{err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let cfg = load_config(&cli.config)?;
    let out = cli.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));

    match cli.command {
        Command::Feigenbaum { degree, tol } => {
            let requested = degree.or(cfg.degree).unwrap_or(80);
            let mut tol = tol.or(cfg.tol).unwrap_or(1e-12);
            let mut warning: Option<String> = None;
            let degree_eff = if requested < 20 {
                // Low degrees cannot certify resolution; solve at the
                // minimum admissible degree with a truncation-limited
                // tolerance.
                tol = tol.max(1e-9);
                warning = Some(format!(
                    "degree {requested} under-resolves g (trailing coefficients large); solved at 20, tol {tol:.0e}"
                ));
                20
            } else {
                requested
            };
            let sol = solve_feigenbaum(degree_eff, tol).map_err(|e| e.to_string())?;
            let rep = identity_report(&sol).map_err(|e| e.to_string())?;
            let tail = sol.g.f.tail_ratio();
            if warning.is_none() && tail > 1e-10 {
                warning = Some(format!(
                    "trailing coefficients large: tail ratio {tail:.2e}"
                ));
            }
            if let Some(w) = &warning {
                eprintln!("warning: {w}");
            }
            let doc = json!({
                "lambda": sol.lambda,
                "residual": sol.residual,
                "degree": degree_eff,
                "tol": tol,
                "identity_checks": {
                    "slope_b2": rep.slope_b2,
                    "slope_fixed_points": rep.slope_fixed_points,
                    "evenness": rep.evenness,
                    "rescaling_trick": rep.rescaling_trick,
                    "min_expansion": rep.min_expansion,
                },
                "warning": warning,
            });
            write_json(&out, "feigenbaum.json", &doc)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tower { map, depth } => {
            let depth = depth.or(cfg.depth).unwrap_or(8);
            let tower = build_tower_checked(&map, depth)?;
            let g = solve_feigenbaum(80, 1e-12).ok();
            let report = tower.report(g.as_ref());
            let doc = serde_json::to_value(&report).map_err(|e| e.to_string())?;
            write_json(&out, "tower.json", &doc)?;
            if tower.depth_built() < depth {
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Partition { map, level, depth } => {
            let depth = depth.or(cfg.depth).unwrap_or(level.max(1));
            let tower = build_tower_checked(&map, depth.max(level))?;
            if level >= tower.levels.len() {
                return Err(format!(
                    "level {level} not built (tower stopped: {:?})",
                    tower.stop_reason
                ));
            }
            std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            let p = &tower.level(level).partition;
            for (tag, g) in [
                ("W0_-1", &p.w0_m1),
                ("W1_0", &p.w1_0),
                ("W0_0", &p.w0_0),
                ("W2_0", &p.w2_0),
                ("W2_-1", &p.w2_m1),
            ] {
                let path = out.join(format!("partition_l{level}_{tag}.csv"));
                std::fs::write(&path, g.to_csv()).map_err(|e| e.to_string())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Regions {
            map,
            level,
            b,
            depth,
        } => {
            let b = b.or(cfg.b).unwrap_or(10.0);
            let depth = depth.or(cfg.depth).unwrap_or(8);
            let tower = build_tower_checked(&map, depth)?;
            let kb = compute_k(&tower, level, b).map_err(|e| e.to_string())?;
            let geom = verify_region_geometry(&tower, level, &kb).map_err(|e| e.to_string())?;
            let doc = json!({
                "n": level,
                "b": b,
                "K": kb.k,
                "eps_norm": kb.eps_norm,
                "witnesses": kb.witnesses,
                "geometry_checks": geom,
            });
            write_json(&out, "regions.json", &doc)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Approach {
            map,
            j,
            max_steps,
            b,
            depth,
            dump_sets,
        } => {
            let rect = parse_rect(&j)?;
            let depth = depth.or(cfg.depth).unwrap_or(8);
            let henon_map = load_map(&map)?;
            check_rect_in_domain(&henon_map, rect)?;
            let tower = build_tower(henon_map, depth).map_err(|e| e.to_string())?;
            let opts = TraceOptions {
                max_steps: max_steps.or(cfg.max_steps).unwrap_or(64),
                b: b.or(cfg.b).unwrap_or(10.0),
                r_param: None,
            };
            let j0 = PlanarSet::rect(rect[0], rect[1], rect[2], rect[3]);
            let trace = closest_approach(&tower, j0, opts).map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            let mut lines = String::new();
            for step in &trace.steps {
                lines.push_str(&serde_json::to_string(step).map_err(|e| e.to_string())?);
                lines.push('\n');
            }
            lines.push_str(
                &serde_json::to_string(&json!({"terminal": trace.terminal}))
                    .map_err(|e| e.to_string())?,
            );
            lines.push('\n');
            std::fs::write(out.join("trace.jsonl"), lines).map_err(|e| e.to_string())?;
            if dump_sets {
                for (i, set) in trace.sets.iter().enumerate() {
                    let path = out.join(format!("trace_set_{i:03}.csv"));
                    std::fs::write(&path, set.boundary_csv()).map_err(|e| e.to_string())?;
                }
            }
            match trace.terminal {
                Terminal::MaxSteps => Ok(ExitCode::SUCCESS),
                _ => Ok(ExitCode::from(2)),
            }
        }
        Command::Double {
            map,
            j,
            max_rows,
            b,
            depth,
        } => {
            let rect = parse_rect(&j)?;
            let side_x = rect[1] - rect[0];
            let side_y = rect[3] - rect[2];
            if (side_x - side_y).abs() > 1e-12 * side_x.max(side_y) {
                return Err(format!("--J must be a square (sides {side_x} vs {side_y})"));
            }
            let depth = depth.or(cfg.depth).unwrap_or(8);
            let henon_map = load_map(&map)?;
            check_rect_in_domain(&henon_map, rect)?;
            let tower = build_tower(henon_map, depth).map_err(|e| e.to_string())?;
            let opts = TraceOptions {
                max_steps: cfg.max_steps.unwrap_or(64),
                b: b.or(cfg.b).unwrap_or(10.0),
                r_param: None,
            };
            let square = Square {
                cx: 0.5 * (rect[0] + rect[1]),
                cy: 0.5 * (rect[2] + rect[3]),
                side: side_x,
            };
            let rows =
                double_sequence(&tower, square, max_rows.or(cfg.max_rows).unwrap_or(8), opts)
                    .map_err(|e| e.to_string())?;
            let rates = rate_report(&rows);
            let doc = json!({
                "rows": rows,
                "rate_report": rates,
            });
            write_json(&out, "rows.json", &doc)?;
            let straddled = rows
                .last()
                .and_then(|r| r.terminal.as_ref())
                .map(|t| {
                    matches!(
                        t,
                        Terminal::Straddle { .. } | Terminal::TowerExhausted { .. }
                    )
                })
                .unwrap_or(false);
            if straddled {
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}
