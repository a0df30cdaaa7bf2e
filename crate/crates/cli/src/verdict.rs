use std::io::Write;
use std::path::Path;

/// Outcome of a check, written as `key = value` lines after the metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    pub fields: Vec<(String, String)>,
}

impl Verdict {
    pub fn new(check: impl Into<String>, pass: bool) -> Self {
        Verdict {
            check: check.into(),
            pass,
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn label(&self) -> &'static str {
        if self.pass {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn write(&self, w: &mut impl Write, meta: &rmerton::export::Meta) -> std::io::Result<()> {
        meta.write(w)?;
        writeln!(w, "check = {}", self.check)?;
        writeln!(w, "verdict = {}", self.label())?;
        for (k, v) in &self.fields {
            writeln!(w, "{k} = {v}")?;
        }
        Ok(())
    }

    /// Reads back a verdict file; metadata lines are skipped.
    pub fn read(path: &Path) -> std::io::Result<Verdict> {
        let text = std::fs::read_to_string(path)?;
        let mut v = Verdict::new("", false);
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let Some((k, val)) = line.split_once(" = ") else {
                continue;
            };
            match k {
                "check" => v.check = val.to_string(),
                "verdict" => v.pass = val == "pass",
                _ => v.fields.push((k.to_string(), val.to_string())),
            }
        }
        Ok(v)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}
