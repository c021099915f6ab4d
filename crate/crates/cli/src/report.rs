//! Schema-versioned JSON reports.
//!
//! Everything that must be reproducible lives in `body`; `body_sha256` is the
//! hash of its compact serialization. Wall-clock data goes in `meta`, outside
//! the hash.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: &str = "comcat.report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Property holds or the requested object was produced.
    Verified,
    /// Property fails; the body carries a witness.
    Refuted,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Refuted => "refuted",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::Refuted => 1,
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Verified
        } else {
            Verdict::Refuted
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One input to a command: a path (hashed by content) or a builtin URI
/// (hashed by name).
#[derive(Clone, Debug)]
pub struct InputRecord {
    pub name: String,
    pub sha256: String,
}

pub struct Report {
    pub command: String,
    pub seed: u64,
    pub tolerance: f64,
    pub inputs: Vec<InputRecord>,
    pub verdict: Verdict,
    pub result: Value,
}

impl Report {
    pub fn body(&self) -> Value {
        let inputs: Vec<Value> = self.inputs.iter().map(|i| json!({ "name": i.name, "sha256": i.sha256 })).collect();
        json!({
            "command": self.command,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "inputs": inputs,
            "verdict": self.verdict.as_str(),
            "result": self.result,
        })
    }

    pub fn to_json(&self, runtime_ms: u128) -> Value {
        let body = self.body();
        let hash = sha256_hex(body.to_string().as_bytes());
        let mut m = Map::new();
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("body".into(), body);
        m.insert("body_sha256".into(), json!(hash));
        m.insert("meta".into(), json!({ "runtime_ms": runtime_ms as u64 }));
        Value::Object(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_runtime() {
        let r = Report {
            command: "validate".into(),
            seed: 1,
            tolerance: 1e-9,
            inputs: vec![],
            verdict: Verdict::Verified,
            result: json!({"ok": true}),
        };
        let (a, b) = (r.to_json(3), r.to_json(900));
        assert_eq!(a["body_sha256"], b["body_sha256"]);
        assert_ne!(a["meta"], b["meta"]);
        assert_eq!(a["body_sha256"].as_str().unwrap().len(), 64);
    }
}
