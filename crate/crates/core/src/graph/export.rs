//! Text edge-list export. The byte stream is the input to cache keys, so the
//! layout must not change without bumping [`FORMAT_VERSION`].
//!
//! ```text
//! esperanto-graph 1
//! n 24
//! r 4
//! action left-translation
//! generators sl2-elementary
//! modulus 3
//! fingerprint 3f1c…
//! loops one-incidence-per-generator
//! edges
//! 0 0 1        (source, generator index, target)
//! …
//! ```

use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{GraphMeta, RegularMultigraph};
use crate::LOOP_CONVENTION;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExportError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

impl RegularMultigraph {
    pub fn to_export(&self) -> String {
        let mut out = String::with_capacity(64 + self.n * self.degree * 12);
        let m = &self.meta;
        let _ = writeln!(out, "esperanto-graph {FORMAT_VERSION}");
        let _ = writeln!(out, "n {}", self.n);
        let _ = writeln!(out, "r {}", self.degree);
        let _ = writeln!(out, "action {}", m.action);
        let _ = writeln!(out, "generators {}", m.generators);
        let _ = writeln!(out, "modulus {}", m.modulus);
        let _ = writeln!(out, "fingerprint {}", m.fingerprint);
        let _ = writeln!(out, "loops {LOOP_CONVENTION}");
        out.push_str("edges\n");
        for x in 0..self.n {
            for (j, &y) in self.neighbors(x).iter().enumerate() {
                let _ = writeln!(out, "{x} {j} {y}");
            }
        }
        out
    }

    /// SHA-256 of [`RegularMultigraph::to_export`], hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_export().as_bytes()))
    }

    /// Parses an export. Vertex labels are not part of the format and come
    /// back as vertex indices.
    pub fn from_export(text: &str) -> Result<Self, ExportError> {
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<String, ExportError> {
            let (i, line) = lines.next().ok_or(ExportError::Malformed {
                line: 0,
                reason: format!("missing `{key}`"),
            })?;
            let rest = line.strip_prefix(key).and_then(|r| r.strip_prefix(' '));
            rest.map(str::to_string).ok_or(ExportError::Malformed {
                line: i + 1,
                reason: format!("expected `{key} …`"),
            })
        };
        let bad = |line: usize, reason: &str| ExportError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let version = header("esperanto-graph")?;
        if version != FORMAT_VERSION.to_string() {
            return Err(bad(1, "unsupported format version"));
        }
        let n: usize = header("n")?.parse().map_err(|_| bad(2, "bad n"))?;
        let degree: usize = header("r")?.parse().map_err(|_| bad(3, "bad r"))?;
        let action = header("action")?;
        let generators = header("generators")?;
        let modulus: u32 = header("modulus")?
            .parse()
            .map_err(|_| bad(6, "bad modulus"))?;
        let fingerprint = header("fingerprint")?;
        let loops = header("loops")?;
        if loops != LOOP_CONVENTION {
            return Err(bad(8, "unknown loop convention"));
        }
        match lines.next() {
            Some((_, "edges")) => {}
            _ => return Err(bad(9, "expected `edges`")),
        }
        let mut targets = vec![u32::MAX; n * degree];
        let mut seen = 0usize;
        for (i, line) in lines {
            let nums: Vec<usize> = line
                .split(' ')
                .map(|t| t.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(i + 1, "non-numeric edge"))?;
            let [x, j, y] = nums[..] else {
                return Err(bad(i + 1, "edge needs three fields"));
            };
            if x >= n || j >= degree || y >= n {
                return Err(bad(i + 1, "edge out of range"));
            }
            targets[x * degree + j] = y as u32;
            seen += 1;
        }
        if seen != n * degree || targets.contains(&u32::MAX) {
            return Err(bad(0, "edge list incomplete"));
        }
        let vertex_transitive = action == "left-translation" || action == "cyclic-translation";
        let meta = GraphMeta {
            action,
            generators,
            modulus,
            fingerprint,
            vertex_transitive,
        };
        let labels = (0..n as u32).map(|i| vec![i]).collect();
        Ok(RegularMultigraph::assemble(degree, targets, labels, meta))
    }
}
