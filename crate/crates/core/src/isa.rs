//! Instruction data model, concrete text syntax and static validation.
//!
//! Program text is a `;`-separated list of instructions:
//!
//! ```text
//! !            termination
//! #l  \#l      direct forward / backward jump
//! set:i:n      set register i to n
//! i#i  i\#i    indirect forward / backward jump through register i
//! f.m          plain basic instruction
//! +f.m  -f.m   positive / negative test
//! ```
//!
//! Whitespace is free around instructions and `//` starts a line comment.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::params::ToolParams;

/// A request `focus.method` to a service.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasicInstruction {
    focus: String,
    method: String,
}

impl BasicInstruction {
    /// Builds a basic instruction, checking both identifier shapes.
    pub fn new(focus: &str, method: &str) -> Result<Self, ParseError> {
        let text = alloc::format!("{focus}.{method}");
        let mut cursor = Cursor::new(&text);
        let basic = cursor.basic()?;
        if !cursor.at_end() {
            return Err(cursor.error(ParseErrorKind::UnexpectedCharacter));
        }
        Ok(basic)
    }

    pub fn focus(&self) -> &str {
        &self.focus
    }

    pub fn method(&self) -> &str {
        &self.method
    }
}

impl fmt::Display for BasicInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.focus, self.method)
    }
}

impl FromStr for BasicInstruction {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cursor = Cursor::new(s);
        let basic = cursor.basic()?;
        if !cursor.at_end() {
            return Err(cursor.error(ParseErrorKind::UnexpectedCharacter));
        }
        Ok(basic)
    }
}

/// One primitive instruction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instruction {
    Plain(BasicInstruction),
    PosTest(BasicInstruction),
    NegTest(BasicInstruction),
    FwdJump(u32),
    BwdJump(u32),
    /// `set:reg:value`; `value` is never 0.
    RegSet {
        reg: u32,
        value: u32,
    },
    IndFwdJump(u32),
    IndBwdJump(u32),
    Halt,
}

impl Instruction {
    /// The basic instruction carried by plain and test instructions.
    pub fn basic(&self) -> Option<&BasicInstruction> {
        match self {
            Instruction::Plain(b) | Instruction::PosTest(b) | Instruction::NegTest(b) => Some(b),
            _ => None,
        }
    }

    /// True for register set and indirect jump instructions.
    pub fn uses_registers(&self) -> bool {
        matches!(
            self,
            Instruction::RegSet { .. } | Instruction::IndFwdJump(_) | Instruction::IndBwdJump(_)
        )
    }

    pub fn is_direct_jump(&self) -> bool {
        matches!(self, Instruction::FwdJump(_) | Instruction::BwdJump(_))
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Plain(b) => write!(f, "{b}"),
            Instruction::PosTest(b) => write!(f, "+{b}"),
            Instruction::NegTest(b) => write!(f, "-{b}"),
            Instruction::FwdJump(l) => write!(f, "#{l}"),
            Instruction::BwdJump(l) => write!(f, "\\#{l}"),
            Instruction::RegSet { reg, value } => write!(f, "set:{reg}:{value}"),
            Instruction::IndFwdJump(i) => write!(f, "i#{i}"),
            Instruction::IndBwdJump(i) => write!(f, "i\\#{i}"),
            Instruction::Halt => f.write_str("!"),
        }
    }
}

/// A non-empty instruction sequence. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    instructions: Vec<Instruction>,
}

impl Program {
    /// Returns `None` for an empty sequence.
    pub fn new(instructions: Vec<Instruction>) -> Option<Self> {
        if instructions.is_empty() {
            None
        } else {
            Some(Program { instructions })
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    /// Always false; kept for the `len`/`is_empty` pairing.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Instruction at 1-based `position`.
    pub fn get(&self, position: usize) -> Option<&Instruction> {
        position.checked_sub(1).and_then(|i| self.instructions.get(i))
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn into_instructions(self) -> Vec<Instruction> {
        self.instructions
    }

    /// `(position, instruction)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Instruction)> {
        self.instructions.iter().enumerate().map(|(i, u)| (i + 1, u))
    }

    /// True iff the program has no register instructions.
    pub fn is_pglb(&self) -> bool {
        !self.instructions.iter().any(Instruction::uses_registers)
    }

    /// Largest register index and largest register literal mentioned.
    pub fn register_extent(&self) -> (u32, u32) {
        let mut maxr = 0;
        let mut maxn = 0;
        for u in &self.instructions {
            match *u {
                Instruction::RegSet { reg, value } => {
                    maxr = maxr.max(reg);
                    maxn = maxn.max(value);
                }
                Instruction::IndFwdJump(reg) | Instruction::IndBwdJump(reg) => maxr = maxr.max(reg),
                _ => {}
            }
        }
        (maxr, maxn)
    }

    /// Renders canonical text: instructions joined by `" ; "`.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, u) in self.instructions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ; ")?;
            }
            write!(f, "{u}")?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}

/// A single instruction; separators are rejected.
impl FromStr for Instruction {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cursor = Cursor::new(s);
        cursor.skip_trivia();
        if cursor.at_end() {
            return Err(cursor.error(ParseErrorKind::Empty));
        }
        let u = cursor.instruction()?;
        cursor.skip_trivia();
        if !cursor.at_end() {
            return Err(cursor.error(ParseErrorKind::UnexpectedCharacter));
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedCharacter,
    UnexpectedEnd,
    ExpectedSeparator,
    ReservedFocus,
    NumberTooLarge,
    ZeroRegisterIndex,
    ZeroRegisterValue,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Empty => "program is empty",
            ParseErrorKind::UnexpectedCharacter => "unexpected character",
            ParseErrorKind::UnexpectedEnd => "unexpected end of input",
            ParseErrorKind::ExpectedSeparator => "expected ';' between instructions",
            ParseErrorKind::ReservedFocus => "focus name 'set' is reserved",
            ParseErrorKind::NumberTooLarge => "number does not fit in 32 bits",
            ParseErrorKind::ZeroRegisterIndex => "register index must be at least 1",
            ParseErrorKind::ZeroRegisterValue => "register value must be at least 1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind} at {token:?}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub kind: ParseErrorKind,
}

/// Parses program text.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut cursor = Cursor::new(text);
    let mut instructions = Vec::new();
    cursor.skip_trivia();
    if cursor.at_end() {
        return Err(cursor.error(ParseErrorKind::Empty));
    }
    loop {
        instructions.push(cursor.instruction()?);
        cursor.skip_trivia();
        if cursor.at_end() {
            break;
        }
        if !cursor.eat(';') {
            return Err(cursor.error(ParseErrorKind::ExpectedSeparator));
        }
        cursor.skip_trivia();
        if cursor.at_end() {
            return Err(cursor.error(ParseErrorKind::UnexpectedEnd));
        }
    }
    Ok(Program { instructions })
}

/// Canonical rendering; `parse_program(&render_program(p)) == Ok(p)`.
pub fn render_program(p: &Program) -> String {
    p.render()
}

struct Cursor<'a> {
    text: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            text,
            offset: 0,
            line: 1,
            column: 1,
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn at_end(&self) -> bool {
        self.offset >= self.text.len()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            for _ in s.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.rest().starts_with("//") => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let token: String = self
            .rest()
            .chars()
            .take_while(|c| !c.is_whitespace() && *c != ';')
            .take(24)
            .collect();
        ParseError {
            line: self.line,
            column: self.column,
            token,
            kind,
        }
    }

    fn error_at(&self, line: usize, column: usize, token: &str, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line,
            column,
            token: token.to_string(),
            kind,
        }
    }

    fn nat(&mut self) -> Result<u32, ParseError> {
        let (line, column, start) = (self.line, self.column, self.offset);
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        let digits = &self.text[start..self.offset];
        if digits.is_empty() {
            return Err(if self.at_end() {
                self.error(ParseErrorKind::UnexpectedEnd)
            } else {
                self.error(ParseErrorKind::UnexpectedCharacter)
            });
        }
        digits
            .parse()
            .map_err(|_| self.error_at(line, column, digits, ParseErrorKind::NumberTooLarge))
    }

    fn register_index(&mut self) -> Result<u32, ParseError> {
        let (line, column) = (self.line, self.column);
        let reg = self.nat()?;
        if reg == 0 {
            return Err(self.error_at(line, column, "0", ParseErrorKind::ZeroRegisterIndex));
        }
        Ok(reg)
    }

    fn focus_name(&mut self) -> Result<&'a str, ParseError> {
        let start = self.offset;
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {
                self.bump();
            }
            None => return Err(self.error(ParseErrorKind::UnexpectedEnd)),
            _ => return Err(self.error(ParseErrorKind::UnexpectedCharacter)),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit()) {
            self.bump();
        }
        Ok(&self.text[start..self.offset])
    }

    fn method_name(&mut self) -> Result<&'a str, ParseError> {
        let start = self.offset;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {
                self.bump();
            }
            None => return Err(self.error(ParseErrorKind::UnexpectedEnd)),
            _ => return Err(self.error(ParseErrorKind::UnexpectedCharacter)),
        }
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_alphanumeric() => {
                    self.bump();
                }
                Some(':') => {
                    let after = self.rest()[1..].chars().next();
                    if !matches!(after, Some(c) if c.is_ascii_alphanumeric()) {
                        self.bump();
                        return Err(if self.at_end() {
                            self.error(ParseErrorKind::UnexpectedEnd)
                        } else {
                            self.error(ParseErrorKind::UnexpectedCharacter)
                        });
                    }
                    self.bump();
                }
                _ => break,
            }
        }
        Ok(&self.text[start..self.offset])
    }

    fn basic(&mut self) -> Result<BasicInstruction, ParseError> {
        let (line, column) = (self.line, self.column);
        let focus = self.focus_name()?;
        if focus == "set" {
            return Err(self.error_at(line, column, focus, ParseErrorKind::ReservedFocus));
        }
        self.basic_after_focus(focus)
    }

    fn basic_after_focus(&mut self, focus: &str) -> Result<BasicInstruction, ParseError> {
        if !self.eat('.') {
            return Err(if self.at_end() {
                self.error(ParseErrorKind::UnexpectedEnd)
            } else {
                self.error(ParseErrorKind::UnexpectedCharacter)
            });
        }
        let method = self.method_name()?;
        Ok(BasicInstruction {
            focus: focus.to_string(),
            method: method.to_string(),
        })
    }

    fn instruction(&mut self) -> Result<Instruction, ParseError> {
        let (line, column) = (self.line, self.column);
        let u = match self.peek() {
            Some('!') => {
                self.bump();
                Instruction::Halt
            }
            Some('#') => {
                self.bump();
                Instruction::FwdJump(self.nat()?)
            }
            Some('\\') => {
                if !self.eat_str("\\#") {
                    return Err(self.error(ParseErrorKind::UnexpectedCharacter));
                }
                Instruction::BwdJump(self.nat()?)
            }
            Some('+') => {
                self.bump();
                Instruction::PosTest(self.basic()?)
            }
            Some('-') => {
                self.bump();
                Instruction::NegTest(self.basic()?)
            }
            Some(c) if c.is_ascii_lowercase() => {
                if self.eat_str("i#") {
                    Instruction::IndFwdJump(self.register_index()?)
                } else if self.eat_str("i\\#") {
                    Instruction::IndBwdJump(self.register_index()?)
                } else {
                    let focus = self.focus_name()?;
                    if focus == "set" {
                        if self.eat(':') {
                            let reg = self.register_index()?;
                            if !self.eat(':') {
                                return Err(self.error(ParseErrorKind::UnexpectedCharacter));
                            }
                            let (vline, vcolumn) = (self.line, self.column);
                            let value = self.nat()?;
                            if value == 0 {
                                return Err(self.error_at(vline, vcolumn, "0", ParseErrorKind::ZeroRegisterValue));
                            }
                            Instruction::RegSet { reg, value }
                        } else {
                            return Err(self.error_at(line, column, focus, ParseErrorKind::ReservedFocus));
                        }
                    } else {
                        Instruction::Plain(self.basic_after_focus(focus)?)
                    }
                }
            }
            None => return Err(self.error(ParseErrorKind::UnexpectedEnd)),
            _ => return Err(self.error(ParseErrorKind::UnexpectedCharacter)),
        };
        // An instruction must be followed by trivia, ';' or the end.
        match self.peek() {
            None | Some(';') => {}
            Some(c) if c.is_whitespace() || self.rest().starts_with("//") => {}
            Some(_) => return Err(self.error(ParseErrorKind::ExpectedSeparator)),
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    RegisterOutOfRange { reg: u32, maxr: u32 },
    ValueOutOfRange { value: u32, maxn: u32 },
}

/// A static range violation at a 1-based position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagnostic {
    pub position: usize,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DiagnosticKind::RegisterOutOfRange { reg, maxr } => {
                write!(f, "position {}: register index {reg} > maxr ({maxr})", self.position)
            }
            DiagnosticKind::ValueOutOfRange { value, maxn } => {
                write!(f, "position {}: register value {value} > maxn ({maxn})", self.position)
            }
        }
    }
}

/// Checks register indices against `maxr` and literals against `maxn`.
pub fn validate(p: &Program, params: &ToolParams) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (position, u) in p.iter() {
        let (reg, value) = match *u {
            Instruction::RegSet { reg, value } => (reg, Some(value)),
            Instruction::IndFwdJump(reg) | Instruction::IndBwdJump(reg) => (reg, None),
            _ => continue,
        };
        if reg > params.maxr {
            out.push(Diagnostic {
                position,
                kind: DiagnosticKind::RegisterOutOfRange { reg, maxr: params.maxr },
            });
        }
        if let Some(value) = value {
            if value > params.maxn {
                out.push(Diagnostic {
                    position,
                    kind: DiagnosticKind::ValueOutOfRange {
                        value,
                        maxn: params.maxn,
                    },
                });
            }
        }
    }
    out
}

/// True iff `p` contains no register set or indirect jump instruction.
pub fn is_pglb(p: &Program) -> bool {
    p.is_pglb()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn b(s: &str) -> BasicInstruction {
        s.parse().unwrap()
    }

    #[test]
    fn single_instruction() {
        assert_eq!("i\\#2".parse::<Instruction>().unwrap(), Instruction::IndBwdJump(2));
        assert_eq!(" -f.m ".parse::<Instruction>().unwrap().to_string(), "-f.m");
        assert!("! ; !".parse::<Instruction>().is_err());
        assert!("".parse::<Instruction>().is_err());
    }

    #[test]
    fn parses_plain_and_halt() {
        let p = parse_program("bool1.get ; !").unwrap();
        assert_eq!(
            p.instructions(),
            &[Instruction::Plain(b("bool1.get")), Instruction::Halt]
        );
    }

    #[test]
    fn parses_every_kind() {
        let p = parse_program("+f.m ; #2 ; \\#1 ; set:1:3 ; i#1 ; i\\#2 ; !").unwrap();
        assert_eq!(
            p.instructions(),
            &[
                Instruction::PosTest(b("f.m")),
                Instruction::FwdJump(2),
                Instruction::BwdJump(1),
                Instruction::RegSet { reg: 1, value: 3 },
                Instruction::IndFwdJump(1),
                Instruction::IndBwdJump(2),
                Instruction::Halt,
            ]
        );
        let q = parse_program("-x.set:T").unwrap();
        assert_eq!(q.instructions(), &[Instruction::NegTest(b("x.set:T"))]);
    }

    #[test]
    fn reserved_focus() {
        let err = parse_program("set.m ; !").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ReservedFocus);
        assert_eq!((err.line, err.column), (1, 1));
        assert_eq!(err.token, "set");
        assert!(parse_program("settings.m ; !").is_ok());
        assert!(parse_program("+set.m").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_program("!\n  #x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ExpectedSeparator);
        assert_eq!((err.line, err.column), (2, 3));

        let err = parse_program("! ; #x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedCharacter);
        assert_eq!((err.line, err.column), (1, 6));
        assert_eq!(err.token, "x");

        assert_eq!(parse_program("").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(parse_program("  // only\n").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(parse_program("! ;").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(parse_program("f.m:").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(
            parse_program("set:0:1").unwrap_err().kind,
            ParseErrorKind::ZeroRegisterIndex
        );
        assert_eq!(
            parse_program("set:1:0").unwrap_err().kind,
            ParseErrorKind::ZeroRegisterValue
        );
        assert_eq!(
            parse_program("i#0").unwrap_err().kind,
            ParseErrorKind::ZeroRegisterIndex
        );
        assert_eq!(
            parse_program("#99999999999").unwrap_err().kind,
            ParseErrorKind::NumberTooLarge
        );
        assert!(parse_program("F.m").is_err());
        assert!(parse_program("f.1m").is_err());
        assert!(parse_program("f.m !").is_err());
        assert!(parse_program("f .m").is_err());
    }

    #[test]
    fn comments_and_whitespace() {
        let p = parse_program("// header\n  #1 ;// skip\n\t!  // end").unwrap();
        assert_eq!(p.instructions(), &[Instruction::FwdJump(1), Instruction::Halt]);
    }

    #[test]
    fn renders_canonically() {
        let halt = Program::new(vec![Instruction::Halt]).unwrap();
        assert_eq!(render_program(&halt), "!");
        let p = Program::new(vec![Instruction::FwdJump(0), Instruction::Halt]).unwrap();
        assert_eq!(render_program(&p), "#0 ; !");
        let text = "+f.m ; #2 ; \\#1 ; set:1:3 ; i#1 ; i\\#2 ; -g.set:F ; h.get ; !";
        assert_eq!(parse_program(text).unwrap().render(), text);
    }

    #[test]
    fn validate_ranges() {
        let params = ToolParams::new(1, 3);
        assert!(validate(&parse_program("set:1:3 ; !").unwrap(), &params).is_empty());

        let d = validate(&parse_program("set:2:1 ; !").unwrap(), &params);
        assert_eq!(
            d,
            vec![Diagnostic {
                position: 1,
                kind: DiagnosticKind::RegisterOutOfRange { reg: 2, maxr: 1 }
            }]
        );

        let d = validate(&parse_program("i#3 ; !").unwrap(), &ToolParams::new(2, 3));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].position, 1);

        let d = validate(&parse_program("! ; set:5:9 ; i\\#4").unwrap(), &ToolParams::new(2, 3));
        assert_eq!(d.len(), 3);
        assert_eq!(d.iter().map(|d| d.position).collect::<Vec<_>>(), vec![2, 2, 3]);
    }

    #[test]
    fn pglb_detection() {
        assert!(is_pglb(&parse_program("#1 ; !").unwrap()));
        assert!(!is_pglb(&parse_program("set:1:1 ; !").unwrap()));
        assert!(!is_pglb(&parse_program("i\\#1 ; !").unwrap()));
    }

    #[test]
    fn basic_instruction_constructor() {
        assert!(BasicInstruction::new("bool1", "set:T").is_ok());
        assert!(BasicInstruction::new("set", "m").is_err());
        assert!(BasicInstruction::new("Bad", "m").is_err());
        assert!(BasicInstruction::new("f", "m:").is_err());
    }
}
