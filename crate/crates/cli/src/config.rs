//! Plain-text configuration: `[section]` headers followed by `key = value`
//! lines. See `docs/config-format.md` for the grammar.

use std::fmt::Write as _;
use std::path::PathBuf;

use twophase_core::scenarios::Section;

use crate::CliError;

/// Parses a configuration document into sections, in file order.
pub fn parse(text: &str) -> Result<Vec<Section>, CliError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)))
                .ok_or_else(|| CliError::Config(format!("line {lineno}: malformed section header `{line}`")))?;
            if sections.iter().any(|s| s.name == name) {
                return Err(CliError::Config(format!("line {lineno}: duplicate section [{name}]")));
            }
            sections.push(Section::new(name));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {lineno}: expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)) {
            return Err(CliError::Config(format!("line {lineno}: invalid key `{key}`")));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| CliError::Config(format!("line {lineno}: `{key}` appears before any section header")))?;
        if section.lookup(key).is_some() {
            return Err(CliError::Config(format!(
                "line {lineno}: duplicate key `{key}` in [{}]",
                section.name
            )));
        }
        section.entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(sections)
}

/// Renders sections so that [`parse`] reproduces them.
pub fn render(sections: &[Section]) -> String {
    let mut out = String::new();
    for (i, s) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{}]", s.name);
        for (k, v) in &s.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    out
}

/// What to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Scenario(String),
    File(PathBuf),
}

/// One batch run: target, output directory and overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target: Target,
    pub out: PathBuf,
    /// Nodes along the longest spatial axis.
    pub grid: Option<usize>,
    pub dt: Option<f64>,
    pub checks: Option<Vec<String>>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(target: Target, out: impl Into<PathBuf>) -> Self {
        Self {
            target,
            out: out.into(),
            grid: None,
            dt: None,
            checks: None,
            tol: None,
            seed: None,
        }
    }

    /// Fills unset fields from a `[run]` section. Unknown keys are errors.
    pub fn merge_run_section(&mut self, run: &Section) -> Result<(), CliError> {
        let bad = |k: &str, v: &str| CliError::Config(format!("[run] `{k}` = `{v}` is invalid"));
        for (k, v) in &run.entries {
            match k.as_str() {
                "scenario" => {
                    if matches!(self.target, Target::File(_)) {
                        self.target = Target::Scenario(v.clone());
                    }
                }
                "out" => {
                    if self.out.as_os_str().is_empty() {
                        self.out = PathBuf::from(v);
                    }
                }
                "grid" => {
                    let n = v.parse().map_err(|_| bad(k, v))?;
                    self.grid.get_or_insert(n);
                }
                "dt" => {
                    let d = v.parse().map_err(|_| bad(k, v))?;
                    self.dt.get_or_insert(d);
                }
                "tol" => {
                    let t = v.parse().map_err(|_| bad(k, v))?;
                    self.tol.get_or_insert(t);
                }
                "seed" => {
                    let s = v.parse().map_err(|_| bad(k, v))?;
                    self.seed.get_or_insert(s);
                }
                "checks" => {
                    if self.checks.is_none() {
                        self.checks = Some(split_list(v));
                    }
                }
                other => return Err(CliError::Config(format!("unrecognized key `{other}` in [run]"))),
            }
        }
        Ok(())
    }
}

/// Splits a comma list, dropping empty items.
pub fn split_list(v: &str) -> Vec<String> {
    v.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let doc = "# header\n[run]\nscenario = h-exact\n\n[grid]\nlower = -1, -1\n  h=0.5  \n";
        let s = parse(doc).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].lookup("scenario"), Some("h-exact"));
        assert_eq!(s[1].lookup("lower"), Some("-1, -1"));
        assert_eq!(s[1].lookup("h"), Some("0.5"));
    }

    #[test]
    fn rejects_malformed_documents() {
        for doc in [
            "key = 1\n",
            "[run\n",
            "[]\n",
            "[run]\nno equals sign\n",
            "[run]\na = 1\na = 2\n",
            "[run]\n[run]\n",
            "[run]\n = 3\n",
        ] {
            assert!(parse(doc).is_err(), "{doc:?}");
        }
    }

    #[test]
    fn render_round_trips() {
        let secs = vec![
            Section::new("run").with("scenario", "h-exact").with("grid", 33),
            Section::new("check.residual").with("tol", 1e-8),
        ];
        assert_eq!(parse(&render(&secs)).unwrap(), secs);
    }

    #[test]
    fn run_section_merge() {
        let mut cfg = RunConfig::new(Target::File("x.cfg".into()), "");
        cfg.tol = Some(1.0);
        let run = Section::new("run")
            .with("scenario", "h-exact")
            .with("out", "res")
            .with("tol", "2")
            .with("checks", "residual, exact-error");
        cfg.merge_run_section(&run).unwrap();
        assert_eq!(cfg.target, Target::Scenario("h-exact".into()));
        assert_eq!(cfg.out, PathBuf::from("res"));
        assert_eq!(cfg.tol, Some(1.0));
        assert_eq!(cfg.checks.as_deref().unwrap(), ["residual", "exact-error"]);
        assert!(cfg.merge_run_section(&Section::new("run").with("colour", "red")).is_err());
        assert!(cfg.merge_run_section(&Section::new("run").with("grid", "many")).is_err());
    }
}
