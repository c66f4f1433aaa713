use serde_json::{Map, Value};

/// Output of one subcommand: text lines, JSON fields and the verdict.
#[derive(Debug, Clone)]
pub struct Report {
    pub holds: bool,
    pub command: &'static str,
    pub lines: Vec<String>,
    pub fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report { holds: true, command, lines: Vec::new(), fields: Map::new() }
    }

    pub fn fail(&mut self) -> &mut Self {
        self.holds = false;
        self
    }

    /// A `key: value` line and the same string field.
    pub fn kv(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let v = value.to_string();
        self.lines.push(format!("{key}: {v}"));
        self.fields.insert(key.to_string(), Value::String(v));
        self
    }

    pub fn line(&mut self, text: impl Into<String>) -> &mut Self {
        self.lines.push(text.into());
        self
    }

    pub fn data(&mut self, key: &str, value: Value) -> &mut Self {
        self.fields.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), Value::String(self.command.into()));
        out.insert("status".into(), Value::String(if self.holds { "ok" } else { "fail" }.into()));
        out.extend(self.fields.clone());
        Value::Object(out)
    }
}
