//! JSON interchange for graphs, maps, walks and points.
//!
//! Graph: `{"vertices": [..], "edges": [{"id", "a", "b", "len"}], "boundary": [..]}`.
//! Map: `{"vertex_map": {v: v'}, "edge_map": {e: ["e7", "~e3"]}}`, `~` marking
//! a reversed traversal.
//! Walk: `{"start": point, "segments": [["e3", "+", 0.0, 1.0]]}`.
//! Point: `{"v": id}` or `{"e": id, "t": x}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Dir, GraphError, GraphPoint, MetricGraph, Step};
use crate::map::{GraphMap, MapError};
use crate::walk::{Segment, Walk};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}\n    {context}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String, context: String },
    #[error("{path}{}: {message}", location.as_ref().map(|(l, _)| format!(":{l}")).unwrap_or_default())]
    Invalid { path: PathBuf, message: String, location: Option<(usize, String)> },
}

impl InputError {
    fn invalid(path: &Path, text: &str, needle: Option<&str>, message: String) -> Self {
        let location = needle.and_then(|n| find_line(text, n));
        let message = match &location {
            Some((_, ctx)) => format!("{message}\n    {ctx}"),
            None => message,
        };
        InputError::Invalid { path: path.to_path_buf(), message, location }
    }
}

fn find_line(text: &str, needle: &str) -> Option<(usize, String)> {
    text.lines()
        .enumerate()
        .find(|(_, l)| l.contains(needle))
        .map(|(i, l)| (i + 1, l.trim().to_string()))
}

fn parse_json<'a, T: Deserialize<'a>>(path: &Path, text: &'a str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        let context = text.lines().nth(line.saturating_sub(1)).unwrap_or("").trim().to_string();
        InputError::Parse { path: path.to_path_buf(), line, column, message: e.to_string(), context }
    })
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_path_buf(), source })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: String,
    pub a: String,
    pub b: String,
    pub len: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub boundary: Vec<String>,
}

impl GraphFile {
    pub fn of(g: &MetricGraph) -> Self {
        GraphFile {
            vertices: g.vertex_names().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id.clone(),
                    a: g.vertex_name(e.a).to_string(),
                    b: g.vertex_name(e.b).to_string(),
                    len: e.len,
                })
                .collect(),
            boundary: g.boundary_vertices().map(|v| g.vertex_name(v).to_string()).collect(),
        }
    }

    pub fn build(&self) -> Result<MetricGraph, GraphError> {
        let mut b = MetricGraph::builder().vertices(self.vertices.iter().cloned());
        for e in &self.edges {
            b = b.edge_with_id(e.id.clone(), e.a.clone(), e.b.clone(), e.len);
        }
        for v in &self.boundary {
            b = b.boundary(v.clone());
        }
        b.build()
    }
}

pub fn parse_graph(path: &Path, text: &str) -> Result<MetricGraph, InputError> {
    let file: GraphFile = parse_json(path, text)?;
    file.build().map_err(|e| {
        let needle = match &e {
            GraphError::InvalidLength { edge, .. } | GraphError::UnknownVertex { edge, .. } => {
                Some(format!("\"{edge}\""))
            }
            GraphError::DuplicateVertex(v) | GraphError::UnknownBoundaryVertex(v) => {
                Some(format!("\"{v}\""))
            }
            GraphError::DuplicateEdge(id) => Some(format!("\"{id}\"")),
            _ => None,
        };
        let field = match &e {
            GraphError::InvalidLength { .. } => "edges[].len",
            GraphError::UnknownVertex { .. } => "edges[].a/b",
            GraphError::DuplicateEdge(_) => "edges[].id",
            GraphError::UnknownBoundaryVertex(_) => "boundary",
            GraphError::Disconnected(_) => "edges",
            _ => "vertices",
        };
        InputError::invalid(path, text, needle.as_deref(), format!("field `{field}`: {e}"))
    })
}

pub fn load_graph(path: &Path) -> Result<MetricGraph, InputError> {
    parse_graph(path, &read(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub vertex_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, Vec<String>>,
}

fn step_name(g: &MetricGraph, s: Step) -> String {
    match s.dir {
        Dir::Fwd => g.edge(s.edge).id.clone(),
        Dir::Rev => format!("~{}", g.edge(s.edge).id),
    }
}

impl MapFile {
    pub fn of(m: &GraphMap) -> Self {
        let (dom, cod) = (m.domain(), m.codomain());
        MapFile {
            vertex_map: dom
                .vertex_ids()
                .map(|v| (dom.vertex_name(v).to_string(), cod.vertex_name(m.vertex_image(v)).to_string()))
                .collect(),
            edge_map: dom
                .edge_ids()
                .map(|e| {
                    let steps = m.edge_image(e).steps().iter().map(|s| step_name(cod, *s)).collect();
                    (dom.edge(e).id.clone(), steps)
                })
                .collect(),
        }
    }
}

pub fn parse_map(
    path: &Path,
    text: &str,
    domain: MetricGraph,
    codomain: MetricGraph,
) -> Result<GraphMap, InputError> {
    let file: MapFile = parse_json(path, text)?;
    let bad = |needle: &str, message: String| InputError::invalid(path, text, Some(needle), message);
    let mut vertex_map = Vec::with_capacity(domain.vertex_count());
    for v in domain.vertex_ids() {
        let name = domain.vertex_name(v);
        let target = file.vertex_map.get(name).ok_or_else(|| {
            InputError::invalid(path, text, Some("vertex_map"), format!("field `vertex_map` is missing domain vertex `{name}`"))
        })?;
        let w = codomain.vertex_by_name(target).ok_or_else(|| {
            bad(&format!("\"{name}\""), format!("field `vertex_map.{name}`: unknown codomain vertex `{target}`"))
        })?;
        vertex_map.push(w);
    }
    if let Some(extra) = file.vertex_map.keys().find(|k| domain.vertex_by_name(k).is_none()) {
        return Err(bad(&format!("\"{extra}\""), format!("field `vertex_map`: unknown domain vertex `{extra}`")));
    }
    let mut edge_map = Vec::with_capacity(domain.edge_count());
    for e in domain.edge_ids() {
        let id = &domain.edge(e).id;
        let walk = file.edge_map.get(id).ok_or_else(|| {
            InputError::invalid(path, text, Some("edge_map"), format!("field `edge_map` is missing domain edge `{id}`"))
        })?;
        let mut steps = Vec::with_capacity(walk.len());
        for name in walk {
            let (dir, bare) = match name.strip_prefix('~') {
                Some(rest) => (Dir::Rev, rest),
                None => (Dir::Fwd, name.as_str()),
            };
            let c = codomain.edge_by_name(bare).ok_or_else(|| {
                bad(&format!("\"{id}\""), format!("field `edge_map.{id}`: unknown codomain edge `{bare}`"))
            })?;
            steps.push(Step::new(c, dir));
        }
        edge_map.push(steps);
    }
    if let Some(extra) = file.edge_map.keys().find(|k| domain.edge_by_name(k).is_none()) {
        return Err(bad(&format!("\"{extra}\""), format!("field `edge_map`: unknown domain edge `{extra}`")));
    }
    GraphMap::new(domain, codomain, vertex_map, edge_map).map_err(|e: MapError| {
        InputError::invalid(path, text, None, e.to_string())
    })
}

pub fn load_map(
    path: &Path,
    domain: MetricGraph,
    codomain: MetricGraph,
) -> Result<GraphMap, InputError> {
    parse_map(path, &read(path)?, domain, codomain)
}

/// Serialized point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRepr {
    Vertex { v: String },
    Interior { e: String, t: f64 },
}

impl PointRepr {
    pub fn of(g: &MetricGraph, p: &GraphPoint) -> Self {
        match *p {
            GraphPoint::Vertex(v) => PointRepr::Vertex { v: g.vertex_name(v).to_string() },
            GraphPoint::Interior { edge, t } => PointRepr::Interior { e: g.edge(edge).id.clone(), t },
        }
    }

    pub fn resolve(&self, g: &MetricGraph) -> Result<GraphPoint, String> {
        match self {
            PointRepr::Vertex { v } => {
                g.vertex_by_name(v).map(GraphPoint::Vertex).ok_or_else(|| format!("unknown vertex `{v}`"))
            }
            PointRepr::Interior { e, t } => {
                let edge = g.edge_by_name(e).ok_or_else(|| format!("unknown edge `{e}`"))?;
                if !(0.0..=1.0).contains(t) {
                    return Err(format!("field `t` = {t} must lie in [0, 1]"));
                }
                Ok(GraphPoint::on_edge(g, edge, *t))
            }
        }
    }
}

/// Parses a point given inline, e.g. on the command line.
pub fn parse_point(source: &str, text: &str, g: &MetricGraph) -> Result<GraphPoint, InputError> {
    let path = Path::new(source);
    let repr: PointRepr = parse_json(path, text)?;
    repr.resolve(g).map_err(|m| InputError::invalid(path, text, None, m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkFile {
    pub start: PointRepr,
    pub segments: Vec<(String, String, f64, f64)>,
}

impl WalkFile {
    pub fn of(g: &MetricGraph, w: &Walk) -> Self {
        WalkFile {
            start: PointRepr::of(g, &w.start()),
            segments: w
                .segments()
                .iter()
                .map(|s| {
                    let dir = match s.dir() {
                        Dir::Fwd => "+",
                        Dir::Rev => "-",
                    };
                    (g.edge(s.edge).id.clone(), dir.to_string(), s.from, s.to)
                })
                .collect(),
        }
    }
}

pub fn parse_walk(path: &Path, text: &str, g: &MetricGraph) -> Result<Walk, InputError> {
    let file: WalkFile = parse_json(path, text)?;
    let start = file
        .start
        .resolve(g)
        .map_err(|m| InputError::invalid(path, text, Some("start"), format!("field `start`: {m}")))?;
    let mut segments = Vec::with_capacity(file.segments.len());
    for (i, (id, dir, from, to)) in file.segments.iter().enumerate() {
        let here = |m: String| InputError::invalid(path, text, Some(&format!("\"{id}\"")), format!("field `segments[{i}]`: {m}"));
        let edge = g.edge_by_name(id).ok_or_else(|| here(format!("unknown edge `{id}`")))?;
        let ok = match dir.as_str() {
            "+" => from < to,
            "-" => from > to,
            _ => return Err(here(format!("direction `{dir}` must be \"+\" or \"-\""))),
        };
        if !ok {
            return Err(here(format!("parameters {from} -> {to} disagree with direction `{dir}`")));
        }
        segments.push(Segment::new(edge, *from, *to));
    }
    let walk = Walk::new(start, segments);
    walk.validate(g).map_err(|e| InputError::invalid(path, text, None, e.to_string()))?;
    Ok(walk)
}

pub fn load_walk(path: &Path, g: &MetricGraph) -> Result<Walk, InputError> {
    parse_walk(path, &read(path)?, g)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRAPH: &str = r#"{
  "vertices": ["a", "b", "c"],
  "edges": [
    {"id": "e0", "a": "a", "b": "b", "len": 1.5},
    {"id": "e1", "a": "b", "b": "c", "len": 2.0}
  ],
  "boundary": ["c"]
}"#;

    fn p() -> &'static Path {
        Path::new("g.json")
    }

    #[test]
    fn graph_round_trip() {
        let g = parse_graph(p(), GRAPH).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.is_boundary(g.vertex_by_name("c").unwrap()));
        let again = parse_graph(p(), &to_json(&GraphFile::of(&g))).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn graph_errors_name_the_field() {
        let neg = GRAPH.replace("1.5", "-1");
        let err = parse_graph(p(), &neg).unwrap_err().to_string();
        assert!(err.contains("g.json:4"), "{err}");
        assert!(err.contains("e0"), "{err}");

        let unknown = GRAPH.replace("\"len\": 2.0", "\"len\": 2.0, \"weight\": 1");
        let err = parse_graph(p(), &unknown).unwrap_err().to_string();
        assert!(err.contains("unknown field `weight`"), "{err}");
        assert!(err.contains("g.json:5"), "{err}");

        let missing = GRAPH.replace(", \"len\": 2.0", "");
        let err = parse_graph(p(), &missing).unwrap_err().to_string();
        assert!(err.contains("missing field `len`"), "{err}");
    }

    #[test]
    fn map_and_walk_round_trip() {
        let g = parse_graph(p(), GRAPH).unwrap();
        let m = GraphMap::identity(&g);
        let text = to_json(&MapFile::of(&m));
        let back = parse_map(Path::new("m.json"), &text, g.clone(), g.clone()).unwrap();
        assert_eq!(MapFile::of(&back), MapFile::of(&m));

        let w = Walk::new(
            GraphPoint::on_edge(&g, crate::graph::EdgeId(0), 0.25),
            vec![Segment::new(crate::graph::EdgeId(0), 0.25, 1.0), Segment::new(crate::graph::EdgeId(1), 0.0, 0.5)],
        );
        let text = to_json(&WalkFile::of(&g, &w));
        assert_eq!(parse_walk(Path::new("w.json"), &text, &g).unwrap(), w);
    }

    #[test]
    fn map_errors() {
        let g = parse_graph(p(), GRAPH).unwrap();
        let text = r#"{"vertex_map": {"a": "a", "b": "b", "c": "c"}, "edge_map": {"e0": ["e9"], "e1": ["e1"]}}"#;
        let err = parse_map(Path::new("m.json"), text, g.clone(), g.clone()).unwrap_err().to_string();
        assert!(err.contains("edge_map.e0") && err.contains("e9"), "{err}");
        let text = r#"{"vertex_map": {"a": "a", "b": "b"}, "edge_map": {"e0": ["e0"], "e1": ["e1"]}}"#;
        let err = parse_map(Path::new("m.json"), text, g.clone(), g).unwrap_err().to_string();
        assert!(err.contains("missing domain vertex `c`"), "{err}");
    }

    #[test]
    fn points() {
        let g = parse_graph(p(), GRAPH).unwrap();
        assert_eq!(parse_point("--start", r#"{"v": "b"}"#, &g).unwrap(), GraphPoint::Vertex(crate::graph::VertexId(1)));
        assert_eq!(
            parse_point("--start", r#"{"e": "e1", "t": 1.0}"#, &g).unwrap(),
            GraphPoint::Vertex(crate::graph::VertexId(2))
        );
        assert!(parse_point("--start", r#"{"v": "zz"}"#, &g).is_err());
    }
}
