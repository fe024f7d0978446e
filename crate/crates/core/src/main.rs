use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bilip::corpus::{write_instance, CorpusSpec};
use bilip::graph::{ahlfors_constant, GraphPoint, MetricGraph, SourceDistances};
use bilip::io::{self, PointRepr, WalkFile};
use bilip::lifting::{fiber_transport, lift_path, LiftError};
use bilip::map::{max_multiplicity_in_ball, multiplicity, GraphMap};
use bilip::theorem::{verify_theorem_with, TheoremConfig, Verdict};

const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "bilip", version, about = "Verify locally bilipschitz maps between metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MapFiles {
    /// Domain graph JSON.
    domain: PathBuf,
    /// Codomain graph JSON.
    codomain: PathBuf,
    /// Map JSON.
    map: PathBuf,
}

impl MapFiles {
    fn load(&self) -> Result<GraphMap, String> {
        let dom = io::load_graph(&self.domain).map_err(|e| e.to_string())?;
        let cod = io::load_graph(&self.codomain).map_err(|e| e.to_string())?;
        io::load_map(&self.map, dom, cod).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full theorem pipeline and emit a report.
    Check {
        #[command(flatten)]
        files: MapFiles,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Locality scale; defaults to half the shortest codomain edge over the largest stretch.
        #[arg(long)]
        r0: Option<f64>,
        /// Net spacing for the local constant; defaults to r0/16.
        #[arg(long)]
        mesh: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift a codomain walk to the domain.
    Lift {
        #[command(flatten)]
        files: MapFiles,
        /// Codomain walk JSON.
        walk: PathBuf,
        /// Start point in the domain, e.g. '{"v": "x3"}'.
        #[arg(long)]
        start: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transport the fiber over z1 to the fiber over z2.
    Fiber {
        #[command(flatten)]
        files: MapFiles,
        #[arg(long)]
        z1: String,
        #[arg(long)]
        z2: String,
        /// Connecting codomain walk JSON; defaults to a geodesic.
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fiber size at a point, or the largest fiber count inside a domain ball.
    Multiplicity {
        #[command(flatten)]
        files: MapFiles,
        /// Codomain point.
        #[arg(long, conflicts_with_all = ["center", "radius"], required_unless_present = "center")]
        point: Option<String>,
        /// Domain ball centre.
        #[arg(long, requires = "radius")]
        center: Option<String>,
        #[arg(long, requires = "center")]
        radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ahlfors regularity constant of a graph at vertices and edge midpoints.
    Ahlfors {
        graph: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Comma separated radii.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        /// Upper bound every radius must respect.
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a corpus instance.
    Gen {
        #[command(subcommand)]
        generator: Generator,
    },
}

#[derive(Subcommand)]
enum Generator {
    TreePerturbed {
        #[arg(long)]
        n: usize,
        #[arg(long = "l-max")]
        l_max: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    CycleCover {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    Mcsimpleminded {
        #[arg(long = "tunnel-len")]
        tunnel_len: f64,
        #[arg(long)]
        circumference: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), String> {
    let text = io::to_json(value);
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn positive(name: &str, x: f64) -> Result<f64, String> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("--{name} must be positive and finite, got {x}"))
    }
}

fn point(flag: &str, text: &str, g: &MetricGraph) -> Result<GraphPoint, String> {
    io::parse_point(&format!("--{flag}"), text, g).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct LiftOutput {
    #[serde(flatten)]
    walk: WalkFile,
    escaped: bool,
}

#[derive(Serialize)]
struct FiberOutput {
    z1: PointRepr,
    z2: PointRepr,
    path_length: f64,
    pairs: Vec<(PointRepr, PointRepr)>,
    max_displacement: f64,
}

#[derive(Serialize)]
struct PointMultiplicity {
    point: PointRepr,
    count: usize,
    preimages: Vec<PointRepr>,
}

#[derive(Serialize)]
struct BallMultiplicityOutput {
    center: PointRepr,
    radius: f64,
    count: usize,
    witness: PointRepr,
    preimages: Vec<PointRepr>,
}

#[derive(Serialize)]
struct AhlforsOutput {
    q: f64,
    radii: Vec<f64>,
    samples: usize,
    #[serde(rename = "C")]
    constant: f64,
    worst_center: PointRepr,
    worst_radius: f64,
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Check { files, q, r0, mesh, out } => {
            let m = files.load()?;
            positive("q", q)?;
            let r0 = positive("r0", r0.unwrap_or_else(|| m.default_r0()))?;
            let mut cfg = TheoremConfig::new(q, r0);
            if let Some(mesh) = mesh {
                cfg.mesh = Some(positive("mesh", mesh)?);
            }
            let report = verify_theorem_with(&m, &cfg).map_err(|e| e.to_string())?;
            emit(&report, out.as_deref())?;
            Ok(match report.verdict {
                Verdict::Certified { .. } => 0,
                Verdict::HypothesisFailure { .. } => 1,
                Verdict::Refuted { .. } => 2,
            })
        }
        Command::Lift { files, walk, start, out } => {
            let m = files.load()?;
            let alpha = io::load_walk(&walk, m.codomain()).map_err(|e| e.to_string())?;
            let x0 = point("start", &start, m.domain())?;
            match lift_path(&m, &alpha, &x0) {
                Ok(beta) => {
                    emit(&LiftOutput { walk: WalkFile::of(m.domain(), &beta), escaped: false }, out.as_deref())?;
                    Ok(0)
                }
                Err(LiftError::EscapedDomain { partial, boundary, remaining }) => {
                    emit(&LiftOutput { walk: WalkFile::of(m.domain(), &partial), escaped: true }, out.as_deref())?;
                    eprintln!("lift escaped through boundary vertex `{boundary}` with {remaining} left");
                    Ok(1)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Fiber { files, z1, z2, path, out } => {
            let m = files.load()?;
            let cod = m.codomain();
            let (z1, z2) = (point("z1", &z1, cod)?, point("z2", &z2, cod)?);
            let walk = match path {
                Some(p) => io::load_walk(&p, cod).map_err(|e| e.to_string())?,
                None => SourceDistances::new(cod, z1).map_err(|e| e.to_string())?.geodesic_to(cod, &z2),
            };
            let t = fiber_transport(&m, &z1, &z2, &walk).map_err(|e| e.to_string())?;
            let dom = m.domain();
            let max_displacement = t
                .pairs
                .iter()
                .map(|(a, b)| bilip::graph::distance(dom, a, b).expect("points on domain"))
                .fold(0.0, f64::max);
            emit(
                &FiberOutput {
                    z1: PointRepr::of(cod, &z1),
                    z2: PointRepr::of(cod, &z2),
                    path_length: walk.length(cod),
                    pairs: t.pairs.iter().map(|(a, b)| (PointRepr::of(dom, a), PointRepr::of(dom, b))).collect(),
                    max_displacement,
                },
                out.as_deref(),
            )?;
            Ok(0)
        }
        Command::Multiplicity { files, point: y, center, radius, out } => {
            let m = files.load()?;
            let (dom, cod) = (m.domain(), m.codomain());
            if let Some(y) = y {
                let y = point("point", &y, cod)?;
                let f = multiplicity(&m, &y).map_err(|e| e.to_string())?;
                emit(
                    &PointMultiplicity {
                        point: PointRepr::of(cod, &y),
                        count: f.len(),
                        preimages: f.preimages.iter().map(|p| PointRepr::of(dom, p)).collect(),
                    },
                    out.as_deref(),
                )?;
            } else {
                let c = point("center", center.as_deref().unwrap_or_default(), dom)?;
                let r = positive("radius", radius.unwrap_or_default())?;
                let b = max_multiplicity_in_ball(&m, &c, r).map_err(|e| e.to_string())?;
                emit(
                    &BallMultiplicityOutput {
                        center: PointRepr::of(dom, &c),
                        radius: r,
                        count: b.count,
                        witness: PointRepr::of(cod, &b.witness),
                        preimages: b.preimages.iter().map(|p| PointRepr::of(dom, p)).collect(),
                    },
                    out.as_deref(),
                )?;
            }
            Ok(0)
        }
        Command::Ahlfors { graph, q, radii, r0, out } => {
            let g = io::load_graph(&graph).map_err(|e| e.to_string())?;
            positive("q", q)?;
            for r in &radii {
                positive("radii", *r)?;
            }
            if let Some(r0) = r0 {
                positive("r0", r0)?;
                if let Some(r) = radii.iter().find(|r| **r > r0) {
                    return Err(format!("radius {r} exceeds --r0 {r0}"));
                }
            }
            let samples: Vec<GraphPoint> = g
                .vertex_ids()
                .map(GraphPoint::Vertex)
                .chain(g.edge_ids().map(|e| GraphPoint::on_edge(&g, e, 0.5)))
                .collect();
            let est = ahlfors_constant(&g, q, &radii, &samples).map_err(|e| e.to_string())?;
            emit(
                &AhlforsOutput {
                    q,
                    samples: samples.len(),
                    constant: est.constant,
                    worst_center: PointRepr::of(&g, &samples[est.worst_center]),
                    worst_radius: est.worst_radius,
                    radii,
                },
                out.as_deref(),
            )?;
            Ok(0)
        }
        Command::Gen { generator } => {
            let (spec, out) = match generator {
                Generator::TreePerturbed { n, l_max, seed, out } => {
                    (CorpusSpec::TreePerturbed { n, l_max, seed }, out)
                }
                Generator::CycleCover { k, n, out } => (CorpusSpec::CycleCover { k, n }, out),
                Generator::Mcsimpleminded { tunnel_len, circumference, out } => {
                    (CorpusSpec::Mcsimpleminded { tunnel_len, circumference }, out)
                }
            };
            let inst = spec.generate().map_err(|e| e.to_string())?;
            write_instance(&inst, &out).map_err(|e| format!("{}: {e}", out.display()))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
