//! Machine and tool parameters shared by every pass.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::isa::BasicInstruction;

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;
pub const DEFAULT_STATE_LIMIT: usize = 5_000_000;

/// Pattern over basic instructions: exact focus, method glob where `*`
/// matches any run of characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AuxPattern {
    focus: String,
    method: String,
}

impl AuxPattern {
    pub fn parse(text: &str) -> Result<Self, ParamsError> {
        let (focus, method) = text
            .trim()
            .split_once('.')
            .ok_or_else(|| ParamsError::BadPattern(text.to_string()))?;
        let focus_ok = focus.starts_with(|c: char| c.is_ascii_lowercase())
            && focus.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit());
        let method_ok = !method.is_empty()
            && method
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == ':' || c == '*');
        if !focus_ok || !method_ok {
            return Err(ParamsError::BadPattern(text.to_string()));
        }
        Ok(AuxPattern {
            focus: focus.to_string(),
            method: method.to_string(),
        })
    }

    pub fn matches(&self, b: &BasicInstruction) -> bool {
        self.focus == b.focus() && glob(self.method.as_bytes(), b.method().as_bytes())
    }
}

impl fmt::Display for AuxPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.focus, self.method)
    }
}

fn glob(pattern: &[u8], text: &[u8]) -> bool {
    match pattern.split_first() {
        None => text.is_empty(),
        Some((b'*', rest)) => (0..=text.len()).any(|i| glob(rest, &text[i..])),
        Some((c, rest)) => text.first() == Some(c) && glob(rest, &text[1..]),
    }
}

/// The auxiliary basic instructions, as a union of patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuxSet {
    patterns: Vec<AuxPattern>,
}

impl AuxSet {
    pub fn empty() -> Self {
        AuxSet::default()
    }

    /// Parses a comma separated list such as `x.*, y.get`.
    pub fn parse_list(text: &str) -> Result<Self, ParamsError> {
        let patterns = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(AuxPattern::parse)
            .collect::<Result<_, _>>()?;
        Ok(AuxSet { patterns })
    }

    pub fn push(&mut self, pattern: AuxPattern) {
        if !self.patterns.contains(&pattern) {
            self.patterns.push(pattern);
        }
    }

    pub fn contains(&self, b: &BasicInstruction) -> bool {
        self.patterns.iter().any(|p| p.matches(b))
    }

    pub fn patterns(&self) -> &[AuxPattern] {
        &self.patterns
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

impl fmt::Display for AuxSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.patterns.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Focus name pattern; `*` matches a non-empty run of decimal digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FocusPattern(String);

impl FocusPattern {
    pub fn parse(text: &str) -> Result<Self, ParamsError> {
        let text = text.trim();
        let ok = text.starts_with(|c: char| c.is_ascii_lowercase())
            && text
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '*');
        if ok {
            Ok(FocusPattern(text.to_string()))
        } else {
            Err(ParamsError::BadPattern(text.to_string()))
        }
    }

    pub fn matches(&self, focus: &str) -> bool {
        fn go(p: &[u8], t: &[u8]) -> bool {
            match p.split_first() {
                None => t.is_empty(),
                Some((b'*', rest)) => {
                    let digits = t.iter().take_while(|c| c.is_ascii_digit()).count();
                    (1..=digits).any(|n| go(rest, &t[n..]))
                }
                Some((c, rest)) => t.first() == Some(c) && go(rest, &t[1..]),
            }
        }
        go(self.0.as_bytes(), focus.as_bytes())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Foci matching `pattern` are Boolean cells starting with contents `init`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellBinding {
    pub pattern: FocusPattern,
    pub init: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolParams {
    /// Number of registers.
    pub maxr: u32,
    /// Largest value a register can hold.
    pub maxn: u32,
    pub aux: AuxSet,
    /// First matching binding wins; unmatched foci are answered by the oracle.
    pub cells: Vec<CellBinding>,
    pub step_limit: u64,
    pub state_limit: usize,
}

impl ToolParams {
    /// Defaults: no aux instructions, `bool<digits>` foci bound to cells
    /// initialised to false.
    pub fn new(maxr: u32, maxn: u32) -> Self {
        ToolParams {
            maxr,
            maxn,
            aux: AuxSet::empty(),
            cells: vec![CellBinding {
                pattern: FocusPattern("bool*".to_string()),
                init: false,
            }],
            step_limit: DEFAULT_STEP_LIMIT,
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }

    pub fn with_aux(mut self, aux: AuxSet) -> Self {
        self.aux = aux;
        self
    }

    pub fn without_cells(mut self) -> Self {
        self.cells.clear();
        self
    }

    pub fn is_aux(&self, b: &BasicInstruction) -> bool {
        self.aux.contains(b)
    }

    /// Initial contents if `focus` is bound to a Boolean cell.
    pub fn cell_init(&self, focus: &str) -> Option<bool> {
        self.cells.iter().find(|c| c.pattern.matches(focus)).map(|c| c.init)
    }

    pub fn check(&self) -> Result<(), ParamsError> {
        if self.maxr == 0 {
            return Err(ParamsError::ZeroBound("maxr"));
        }
        if self.maxn == 0 {
            return Err(ParamsError::ZeroBound("maxn"));
        }
        if self.step_limit == 0 {
            return Err(ParamsError::ZeroBound("step_limit"));
        }
        if self.state_limit == 0 {
            return Err(ParamsError::ZeroBound("state_limit"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("bad pattern {0:?}")]
    BadPattern(String),
    #[error("{0} must be at least 1")]
    ZeroBound(&'static str),
}
