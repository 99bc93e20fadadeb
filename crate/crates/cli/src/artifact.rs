use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::Format;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run metadata carried by every artifact.
#[derive(Clone, Debug)]
pub struct Meta {
    pub seed: u64,
    pub method: String,
    pub extra: Vec<(String, String)>,
}

impl Meta {
    pub fn new(seed: u64, method: impl Into<String>) -> Meta {
        Meta { seed, method: method.into(), extra: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Meta {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    fn line(&self) -> String {
        let mut parts = vec![
            format!("seed={}", self.seed),
            format!("version={VERSION}"),
            format!("method={}", self.method),
        ];
        parts.extend(self.extra.iter().map(|(k, v)| format!("{k}={v}")));
        format!("# {}\n", parts.join(", "))
    }

    fn object(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("seed".into(), json!(self.seed));
        m.insert("version".into(), json!(VERSION));
        m.insert("method".into(), json!(self.method));
        for (k, v) in &self.extra {
            m.insert(k.clone(), json!(v));
        }
        m
    }
}

#[derive(Clone, Debug)]
pub enum Body {
    Table { columns: Vec<&'static str>, rows: Vec<Vec<String>> },
    Json(Value),
}

#[derive(Clone, Debug)]
pub struct Artifact {
    pub body: Body,
    pub meta: Meta,
    pub format: Format,
}

impl Artifact {
    pub fn render(&self) -> Result<Vec<u8>, String> {
        match (&self.body, self.format) {
            (Body::Table { columns, rows }, Format::Csv) => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(columns).map_err(|e| e.to_string())?;
                for r in rows {
                    w.write_record(r).map_err(|e| e.to_string())?;
                }
                let mut out = w.into_inner().map_err(|e| e.to_string())?;
                out.extend_from_slice(self.meta.line().as_bytes());
                Ok(out)
            }
            (Body::Table { columns, rows }, Format::Json) => {
                let mut m = self.meta.object();
                m.insert("columns".into(), json!(columns));
                m.insert("rows".into(), json!(rows));
                pretty(&Value::Object(m))
            }
            (Body::Json(v), Format::Json) => {
                let mut m = self.meta.object();
                match v {
                    Value::Object(o) => m.extend(o.clone()),
                    other => {
                        m.insert("result".into(), other.clone());
                    }
                }
                pretty(&Value::Object(m))
            }
            (Body::Json(_), Format::Csv) => Err("this subcommand only produces JSON".into()),
        }
    }
}

fn pretty(v: &Value) -> Result<Vec<u8>, String> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| e.to_string())?;
    out.push(b'\n');
    Ok(out)
}

/// Renders the artifact and writes it to `out` through a temporary file in
/// the same directory, or to stdout.
pub fn write(artifact: &Artifact, out: Option<&Path>) -> Result<(), String> {
    let bytes = artifact.render()?;
    match out {
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            tmp.write_all(&bytes).map_err(|e| e.to_string())?;
            tmp.persist(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(())
        }
    }
}
