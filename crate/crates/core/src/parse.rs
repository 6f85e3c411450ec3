//! Recursive-descent parser for the line-oriented `.bpn` plate-model DSL.
//!
//! ```text
//! file   := 'model' IDENT NL stmt*
//! stmt   := index | var | def | edge
//! index  := 'index' IDENT ('in' IDENT)? STRING? 'nonempty'?
//! var    := 'var' IDENT ':' DOMAIN dims? KIND onehot?
//! def    := 'def' IDENT ':' DOMAIN dims? '=' EXPR ('uses' IDENT (',' IDENT)*)? onehot?
//! edge   := 'edge' IDENT '->' IDENT
//! dims   := '[' IDENT (',' IDENT)* ']'
//! onehot := 'onehot' 'over' IDENT
//! ```
//!
//! One statement per line, `#` starts a comment. The `def` expression is kept
//! as opaque text.

use std::collections::HashMap;

use crate::ast::{
    Domain, Edge, IndexSet, Location, NameRef, PlateModel, Transform, VarKind, Variable,
};
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Colon,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Colon => "`:`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    /// Byte offset into the (comment-stripped) line.
    col: u32,
}

/// Strips a trailing `#` comment, ignoring `#` inside string literals.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn col_of(line: &str, byte: usize) -> u32 {
    line[..byte].chars().count() as u32 + 1
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(line: &str, line_no: u32) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        let col = col_of(line, start);
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                if !is_ident_char(c) {
                    break;
                }
                end = i + c.len_utf8();
                chars.next();
            }
            Tok::Ident(line[start..end].to_string())
        } else if c == '"' {
            chars.next();
            let mut text = String::new();
            let mut closed = false;
            for (_, c) in chars.by_ref() {
                if c == '"' {
                    closed = true;
                    break;
                }
                text.push(c);
            }
            if !closed {
                return Err(ParseError::Syntax {
                    loc: Location::new(line_no, col),
                    found: "unterminated string".into(),
                    expected: vec!["closing `\"`".into()],
                });
            }
            Tok::Str(text)
        } else {
            chars.next();
            match c {
                ':' => Tok::Colon,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                '-' if matches!(chars.peek(), Some((_, '>'))) => {
                    chars.next();
                    Tok::Arrow
                }
                other => {
                    return Err(ParseError::Syntax {
                        loc: Location::new(line_no, col),
                        found: format!("character `{other}`"),
                        expected: vec!["a token".into()],
                    })
                }
            }
        };
        tokens.push(Token { tok, col });
    }
    Ok(tokens)
}

/// Cursor over the tokens of one line.
struct LineParser<'a> {
    line: &'a str,
    line_no: u32,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn new(line: &'a str, line_no: u32) -> Result<Self, ParseError> {
        Ok(Self {
            line,
            line_no,
            tokens: lex(line, line_no)?,
            pos: 0,
        })
    }

    fn loc(&self) -> Location {
        match self.tokens.get(self.pos) {
            Some(t) => Location::new(self.line_no, t.col),
            None => Location::new(self.line_no, self.line.trim_end().chars().count() as u32 + 1),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of line".to_string(),
        };
        Err(ParseError::Syntax {
            loc: self.loc(),
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn ident(&mut self, what: &str) -> Result<NameRef, ParseError> {
        let loc = self.loc();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let name = s.clone();
                self.pos += 1;
                Ok(NameRef::at(name, loc))
            }
            _ => self.fail(&[what]),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.peek_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&[&format!("`{kw}`")])
        }
    }

    fn punct(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&[&tok.describe()])
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end(&self, expected: &[&str]) -> Result<(), ParseError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            let mut all: Vec<&str> = expected.to_vec();
            all.push("end of line");
            self.fail(&all)
        }
    }

    fn domain(&mut self) -> Result<Domain, ParseError> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if let Some(d) = Domain::from_keyword(s) {
                self.pos += 1;
                return Ok(d);
            }
        }
        self.fail(&["`real`", "`bit`", "`int`"])
    }

    fn dims(&mut self) -> Result<Vec<NameRef>, ParseError> {
        let mut dims = Vec::new();
        if !self.eat(&Tok::LBracket) {
            return Ok(dims);
        }
        loop {
            dims.push(self.ident("index set name")?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            if self.eat(&Tok::RBracket) {
                return Ok(dims);
            }
            return self.fail(&["`,`", "`]`"]);
        }
    }

    fn onehot(&mut self) -> Result<Option<NameRef>, ParseError> {
        if !self.peek_keyword("onehot") {
            return Ok(None);
        }
        self.pos += 1;
        self.keyword("over")?;
        Ok(Some(self.ident("index set name")?))
    }
}

/// Parses a `.bpn` source into a [`PlateModel`].
///
/// Structural checks beyond syntax and name uniqueness are left to
/// [`crate::validate::validate`].
pub fn parse(text: &str) -> Result<PlateModel, ParseError> {
    let mut model: Option<PlateModel> = None;
    let mut declared: HashMap<String, Location> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        // A `def` expression is opaque text; blank it out before lexing.
        let mut def_expr = None;
        let masked;
        let mut lexed = line;
        if line.split_whitespace().next() == Some("def") {
            if let Some(eq) = line.find('=') {
                let (expr, tail_start) = split_expression(line, eq + 1);
                def_expr = Some((expr.to_string(), eq + 1));
                masked = line
                    .char_indices()
                    .map(|(i, c)| if i > eq && i < tail_start { ' ' } else { c })
                    .collect::<String>();
                lexed = &masked;
            }
        }
        let mut p = LineParser::new(lexed, line_no)?;
        let head_loc = p.loc();

        let Some(pm) = model.as_mut() else {
            p.keyword("model")?;
            let name = p.ident("model name")?;
            p.end(&[])?;
            model = Some(PlateModel::new(name.name));
            continue;
        };

        let head = match p.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return p.fail(&["`index`", "`var`", "`def`", "`edge`"]),
        };
        p.pos += 1;

        let mut declare = |name: &NameRef| -> Result<(), ParseError> {
            if let Some(first) = declared.get(&name.name) {
                return Err(ParseError::DuplicateName {
                    name: name.name.clone(),
                    loc: name.loc,
                    first: *first,
                });
            }
            declared.insert(name.name.clone(), name.loc);
            Ok(())
        };

        match head.as_str() {
            "index" => {
                let name = p.ident("index set name")?;
                declare(&name)?;
                let mut parent = None;
                if p.peek_keyword("in") {
                    p.pos += 1;
                    parent = Some(p.ident("parent index set name")?);
                }
                let mut label = String::new();
                if let Some(Tok::Str(s)) = p.peek() {
                    label = s.clone();
                    p.pos += 1;
                }
                let mut nonempty = false;
                if p.peek_keyword("nonempty") {
                    p.pos += 1;
                    nonempty = true;
                }
                let mut expected = Vec::new();
                if parent.is_none() && label.is_empty() && !nonempty {
                    expected.push("`in`");
                }
                if label.is_empty() && !nonempty {
                    expected.push("string");
                }
                if !nonempty {
                    expected.push("`nonempty`");
                }
                p.end(&expected)?;
                pm.index_sets.push(IndexSet {
                    name: name.name,
                    label,
                    parent,
                    nonempty,
                    loc: head_loc,
                });
            }
            "var" => {
                let name = p.ident("variable name")?;
                declare(&name)?;
                p.punct(Tok::Colon)?;
                let domain = p.domain()?;
                let dims = p.dims()?;
                let kind = match p.peek() {
                    Some(Tok::Ident(s)) => match VarKind::from_keyword(s) {
                        Some(VarKind::Deterministic) | None => None,
                        k => k,
                    },
                    _ => None,
                };
                let Some(kind) = kind else {
                    let mut exp = vec!["`observed`", "`hidden`", "`hyper`"];
                    if dims.is_empty() {
                        exp.insert(0, "`[`");
                    }
                    return p.fail(&exp);
                };
                p.pos += 1;
                let onehot_over = p.onehot()?;
                p.end(&["`onehot`"])?;
                pm.variables.push(Variable {
                    name: name.name,
                    kind,
                    domain,
                    dims,
                    onehot_over,
                    transform: None,
                    loc: head_loc,
                });
            }
            "def" => {
                let name = p.ident("variable name")?;
                declare(&name)?;
                p.punct(Tok::Colon)?;
                let domain = p.domain()?;
                let dims = p.dims()?;
                if p.peek() != Some(&Tok::Eq) {
                    let mut exp = vec!["`=`"];
                    if dims.is_empty() {
                        exp.insert(0, "`[`");
                    }
                    return p.fail(&exp);
                }
                let (expr, eq_end) = def_expr.clone().unwrap_or_default();
                p.pos += 1;
                if expr.is_empty() {
                    return Err(ParseError::Syntax {
                        loc: Location::new(line_no, col_of(line, eq_end) + 1),
                        found: "end of expression".into(),
                        expected: vec!["expression".into()],
                    });
                }
                let tail = &mut p;
                let mut uses = Vec::new();
                if tail.peek_keyword("uses") {
                    tail.pos += 1;
                    loop {
                        uses.push(tail.ident("variable name")?);
                        if !tail.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                let onehot_over = tail.onehot()?;
                tail.end(&["`onehot`"])?;
                pm.variables.push(Variable {
                    name: name.name,
                    kind: VarKind::Deterministic,
                    domain,
                    dims,
                    onehot_over,
                    transform: Some(Transform {
                        expr: expr.to_string(),
                        uses,
                    }),
                    loc: head_loc,
                });
            }
            "edge" => {
                let src = p.ident("variable name")?;
                p.punct(Tok::Arrow)?;
                let dst = p.ident("variable name")?;
                p.end(&[])?;
                pm.edges.push(Edge {
                    src,
                    dst,
                    loc: head_loc,
                });
            }
            _ => {
                p.pos -= 1;
                return p.fail(&["`index`", "`var`", "`def`", "`edge`"]);
            }
        }
    }

    model.ok_or_else(|| ParseError::Syntax {
        loc: Location::new(text.lines().count() as u32 + 1, 1),
        found: "end of file".into(),
        expected: vec!["`model`".into()],
    })
}

/// Finds the opaque expression following `=` at byte `from`.
///
/// The expression ends at the last standalone `uses` keyword, or else at the
/// last `onehot over` clause, or at end of line. Returns the trimmed
/// expression and the byte offset where the tail clauses start.
fn split_expression(line: &str, from: usize) -> (&str, usize) {
    let rest = &line[from..];
    let words: Vec<(usize, &str)> = word_offsets(rest);
    let mut end = rest.len();
    if let Some(&(i, _)) = words.iter().rev().find(|(_, w)| *w == "uses") {
        end = i;
    } else if let Some(pos) = words
        .windows(2)
        .rposition(|w| w[0].1 == "onehot" && w[1].1 == "over")
    {
        end = words[pos].0;
    }
    (rest[..end].trim(), from + end)
}

fn word_offsets(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (start, is_ident_char(c)) {
            (None, true) => start = Some(i),
            (Some(st), false) => {
                out.push((st, &s[st..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push((st, &s[st..]));
    }
    // Only words standing on their own count as keywords.
    out.retain(|&(i, w)| {
        let before = s[..i].chars().next_back();
        let after = s[i + w.len()..].chars().next();
        before.is_none_or(|c| c.is_whitespace()) && after.is_none_or(|c| c.is_whitespace())
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model() {
        let pm = parse("model Empty\n").unwrap();
        assert_eq!(pm.name, "Empty");
        assert!(pm.index_sets.is_empty());
        assert!(pm.variables.is_empty());
        assert!(pm.edges.is_empty());
    }

    #[test]
    fn vector_model() {
        let src = "model Vector\nindex N \"Objects\"\nvar alpha : real hyper\nvar x : real[N] hidden\nedge alpha -> x\n";
        let pm = parse(src).unwrap();
        assert_eq!(pm.index_sets.len(), 1);
        assert_eq!(pm.variables.len(), 2);
        assert_eq!(pm.edges.len(), 1);
        let x = pm.variable("x").unwrap();
        assert_eq!(x.dims, vec![NameRef::at("N", Location::new(4, 14))]);
        assert_eq!(x.loc, Location::new(4, 1));
    }

    #[test]
    fn comments_and_compact_colon() {
        let src = "# header\nmodel M # trailing\nindex K \"Top#ics\"\nvar a: real[K] hidden # c\n";
        let pm = parse(src).unwrap();
        assert_eq!(pm.index_sets[0].label, "Top#ics");
        assert_eq!(pm.variables[0].name, "a");
    }

    #[test]
    fn index_options() {
        let pm = parse("model M\nindex N\nindex M in N \"Tokens\" nonempty\n").unwrap();
        let m = pm.index_set("M").unwrap();
        assert_eq!(m.parent.as_ref().unwrap().name, "N");
        assert_eq!(m.label, "Tokens");
        assert!(m.nonempty);
        assert_eq!(pm.index_set("N").unwrap().label, "");
    }

    #[test]
    fn onehot_clause() {
        let pm = parse("model M\nindex K\nvar z : bit[K] hidden onehot over K\n").unwrap();
        assert_eq!(pm.variables[0].onehot_over.as_ref().unwrap().name, "K");
    }

    #[test]
    fn def_with_expression_and_uses() {
        let src = "model P\nindex K\nvar x : real observed\ndef xp : real[K] = x ^ k uses x\ndef mu : real = sum(w[k] * xp[k]) uses xp, w\nvar w : real[K] hidden\n";
        let pm = parse(src).unwrap();
        let xp = pm.variable("xp").unwrap();
        assert_eq!(xp.kind, VarKind::Deterministic);
        let t = xp.transform.as_ref().unwrap();
        assert_eq!(t.expr, "x ^ k");
        assert_eq!(t.uses[0].name, "x");
        let mu = pm.variable("mu").unwrap().transform.as_ref().unwrap();
        assert_eq!(mu.expr, "sum(w[k] * xp[k])");
        assert_eq!(mu.uses.len(), 2);
    }

    #[test]
    fn def_without_uses() {
        let pm = parse("model P\ndef c : int = 42\n").unwrap();
        let t = pm.variables[0].transform.as_ref().unwrap();
        assert_eq!(t.expr, "42");
        assert!(t.uses.is_empty());
    }

    #[test]
    fn def_with_onehot_no_uses() {
        let pm = parse("model P\nindex K\nindex N\ndef c : bit[N, K] = argmax(s) onehot over K\n").unwrap();
        let v = &pm.variables[0];
        assert_eq!(v.transform.as_ref().unwrap().expr, "argmax(s)");
        assert_eq!(v.onehot_over.as_ref().unwrap().name, "K");
    }

    #[test]
    fn empty_expression_is_error() {
        let err = parse("model P\ndef c : int =   uses x\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn missing_model_header() {
        let err = parse("index N\n").unwrap_err();
        match err {
            ParseError::Syntax { loc, expected, .. } => {
                assert_eq!(loc, Location::new(1, 1));
                assert_eq!(expected, vec!["`model`"]);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("").is_err());
        assert!(parse("# only a comment\n").is_err());
    }

    #[test]
    fn syntax_error_reports_location_and_expected() {
        let err = parse("model M\nindex N\nvar x : real[N hidden\n").unwrap_err();
        match err {
            ParseError::Syntax {
                loc,
                found,
                expected,
            } => {
                assert_eq!(loc, Location::new(3, 16));
                assert_eq!(found, "`hidden`");
                assert_eq!(expected, vec!["`,`", "`]`"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_statement_keyword() {
        let err = parse("model M\nplate N\n").unwrap_err();
        assert_eq!(err.location(), Location::new(2, 1));
        assert_eq!(err.code(), "SYNTAX");
    }

    #[test]
    fn var_needs_kind() {
        let err = parse("model M\nvar x : real\n").unwrap_err();
        assert!(err.message().contains("`hidden`"), "{}", err.message());
        // deterministic kind is spelled with `def`
        assert!(parse("model M\nvar x : real deterministic\n").is_err());
    }

    #[test]
    fn stray_character() {
        let err = parse("model M\nindex N $\n").unwrap_err();
        assert_eq!(err.location(), Location::new(2, 9));
    }

    #[test]
    fn unterminated_label() {
        assert!(parse("model M\nindex N \"Docs\n").is_err());
    }

    #[test]
    fn duplicate_name_across_kinds() {
        let err = parse("model M\nindex N\nvar N : real hidden\n").unwrap_err();
        match err {
            ParseError::DuplicateName { name, loc, first } => {
                assert_eq!(name, "N");
                assert_eq!(loc, Location::new(3, 5));
                assert_eq!(first, Location::new(2, 7));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn edge_syntax() {
        let pm = parse("model M\nvar a : real hyper\nvar b : real hidden\nedge a -> b\n").unwrap();
        assert_eq!(pm.edges[0].src.name, "a");
        assert_eq!(pm.edges[0].dst.name, "b");
        assert!(parse("model M\nedge a > b\n").is_err());
        assert!(parse("model M\nedge a -> b c\n").is_err());
    }

    #[test]
    fn canonical_source_round_trip() {
        let src = "model LDA\n\nindex N \"Documents\"\nindex M in N \"Tokens\" nonempty\nindex K \"Topics\"\n\nvar z : bit[M, K] hidden onehot over K\ndef y : real = f(z) uses z\n\nedge z -> y\n";
        let pm = parse(src).unwrap();
        assert_eq!(pm.to_source(), src);
    }
}
