//! `key = value` configuration files.
//!
//! ```text
//! // comments start with // or #
//! maxr = 2
//! maxn = 5
//! aux = x.*, flag.get
//! cells = bool*, flag:T
//! cellInit = F
//! stepLimit = 100000
//! stateLimit = 5000000
//! ```
//!
//! An empty `aux` or `cells` value means the empty set; `cells` left out
//! means the default binding of every `bool<digits>` focus. A cell pattern
//! may carry its own initial value (`:T`/`:F`), otherwise `cellInit`
//! applies.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pglb_core::params::{AuxSet, CellBinding, FocusPattern};
use pglb_core::{Program, ToolParams};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "PGLBLAB_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    pub maxr: Option<u32>,
    pub maxn: Option<u32>,
    pub aux: Option<AuxSet>,
    pub cells: Option<Vec<(FocusPattern, Option<bool>)>>,
    pub cell_init: Option<bool>,
    pub step_limit: Option<u64>,
    pub state_limit: Option<usize>,
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "T" | "true" | "1" => Some(true),
        "F" | "false" | "0" => Some(false),
        _ => None,
    }
}

fn positive<T: std::str::FromStr + PartialOrd + From<u8>>(key: &str, v: &str) -> Result<T> {
    match v.parse::<T>() {
        Ok(n) if n >= T::from(1) => Ok(n),
        _ => bail!("{key} must be a positive integer, got {v:?}"),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split("//").next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected `key = value`", i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            c.set(key, value).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(c)
    }

    /// Sets one key; also used for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "maxr" => self.maxr = Some(positive(key, value)?),
            "maxn" => self.maxn = Some(positive(key, value)?),
            "aux" => self.aux = Some(AuxSet::parse_list(value)?),
            "cells" => {
                let patterns = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|item| {
                        let (pattern, init) = match item.rsplit_once(':') {
                            Some((p, v)) => (
                                p.trim(),
                                Some(
                                    parse_bool(v.trim())
                                        .with_context(|| format!("bad cell initial value in {item:?}"))?,
                                ),
                            ),
                            None => (item, None),
                        };
                        Ok((FocusPattern::parse(pattern)?, init))
                    })
                    .collect::<Result<_>>()?;
                self.cells = Some(patterns);
            }
            "cellInit" => {
                self.cell_init =
                    Some(parse_bool(value).with_context(|| format!("cellInit must be T or F, got {value:?}"))?)
            }
            "stepLimit" => self.step_limit = Some(positive(key, value)?),
            "stateLimit" => self.state_limit = Some(positive(key, value)?),
            _ => bail!("unknown key {key:?}"),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// The explicit path if given, else `$PGLBLAB_CONFIG`, else nothing.
    pub fn discover(explicit: Option<&Path>) -> Result<Self> {
        let path = explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        match path {
            Some(p) => Self::load(&p),
            None => Ok(Config::default()),
        }
    }

    /// Values of `other` win.
    pub fn merge(mut self, other: Config) -> Self {
        self.maxr = other.maxr.or(self.maxr);
        self.maxn = other.maxn.or(self.maxn);
        self.aux = other.aux.or(self.aux);
        self.cells = other.cells.or(self.cells);
        self.cell_init = other.cell_init.or(self.cell_init);
        self.step_limit = other.step_limit.or(self.step_limit);
        self.state_limit = other.state_limit.or(self.state_limit);
        self
    }

    /// Tool parameters; `maxr`/`maxn` not set here are taken from the
    /// largest register index and literal in `programs`.
    pub fn tool_params(&self, programs: &[&Program]) -> ToolParams {
        let (r, n) = programs
            .iter()
            .map(|p| p.register_extent())
            .fold((1, 1), |(r, n), (pr, pn)| (r.max(pr), n.max(pn)));
        let mut params = ToolParams::new(self.maxr.unwrap_or(r), self.maxn.unwrap_or(n));
        if let Some(aux) = &self.aux {
            params.aux = aux.clone();
        }
        let init = self.cell_init.unwrap_or(false);
        match &self.cells {
            Some(patterns) => {
                params.cells = patterns
                    .iter()
                    .map(|(p, own)| CellBinding {
                        pattern: p.clone(),
                        init: own.unwrap_or(init),
                    })
                    .collect()
            }
            None => params.cells.iter_mut().for_each(|c| c.init = init),
        }
        if let Some(s) = self.step_limit {
            params.step_limit = s;
        }
        if let Some(s) = self.state_limit {
            params.state_limit = s;
        }
        params
    }

    /// Config text reproducing `params` exactly.
    pub fn render_params(params: &ToolParams) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "maxr = {}", params.maxr);
        let _ = writeln!(out, "maxn = {}", params.maxn);
        let _ = writeln!(out, "aux = {}", params.aux);
        let cells: Vec<String> = params
            .cells
            .iter()
            .map(|c| format!("{}:{}", c.pattern.as_str(), if c.init { "T" } else { "F" }))
            .collect();
        let _ = writeln!(out, "cells = {}", cells.join(", "));
        let _ = writeln!(out, "stepLimit = {}", params.step_limit);
        let _ = writeln!(out, "stateLimit = {}", params.state_limit);
        out
    }
}
