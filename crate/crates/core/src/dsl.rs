//! Text format for causal diagrams, a small subset of dagitty syntax:
//!
//! ```text
//! dag {
//!   U [latent]
//!   WC0 [exposure]
//!   IC1 [outcome]
//!   U -> WC0 [beta=0.2828]
//!   WC0 -> IC1; IC0 -> IC1
//! }
//! ```
//!
//! Node attributes are `latent`, `deterministic`, `exposure` and `outcome`;
//! edges accept a single `beta=<float>` attribute. Whitespace is insignificant
//! and `;` may separate statements. Nodes named only in edges are observed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::dag::{Dag, DagError, Node, NodeKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown attribute `{attr}` at line {line}, column {column}")]
    UnknownAttribute {
        attr: String,
        line: usize,
        column: usize,
    },
    #[error("node `{0}` is both latent and deterministic")]
    ConflictingKind(String),
    #[error(transparent)]
    Graph(#[from] DagError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Arrow,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |pos: Pos, message: String| ParseError::Syntax {
        line: pos.line,
        column: pos.column,
        message,
    };

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '=' => Tok::Eq,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Arrow
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < chars.len()
                    && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_')
                {
                    i += 1;
                }
                Tok::Ident(chars[start..=i].iter().collect())
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                while i + 1 < chars.len() {
                    let n = chars[i + 1];
                    let exp_sign = (n == '-' || n == '+') && matches!(chars[i], 'e' | 'E');
                    if n.is_ascii_digit() || n == '.' || n == 'e' || n == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let lexeme: String = chars[start..=i].iter().collect();
                let value = lexeme
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| syntax(pos, format!("invalid number `{lexeme}`")))?;
                Tok::Number(value)
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        };
        i += 1;
        col += i - start;
        out.push((tok, pos));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let p = self.pos();
        ParseError::Syntax {
            line: p.line,
            column: p.column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }
}

#[derive(Default)]
struct NodeDecl {
    explicit: bool,
    node: Option<Node>,
}

/// Parses DSL text into a validated [`Dag`]; `beta=` values land on the edges.
pub fn parse_dag(text: &str) -> Result<Dag, ParseError> {
    let toks = tokenize(text)?;
    let end = {
        let line = text.lines().count().max(1);
        let column = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Pos { line, column }
    };
    let mut p = Parser { toks, at: 0, end };

    match p.ident("`dag`")?.as_str() {
        "dag" => {}
        _ => {
            p.at -= 1;
            return Err(p.error("expected `dag`"));
        }
    }
    p.expect(Tok::LBrace, "`{`")?;

    let mut order: Vec<String> = Vec::new();
    let mut decls: BTreeMap<String, NodeDecl> = BTreeMap::new();
    let mut edges: Vec<(String, String, Option<f64>)> = Vec::new();

    let touch = |name: &str, order: &mut Vec<String>, decls: &mut BTreeMap<String, NodeDecl>| {
        if !decls.contains_key(name) {
            order.push(name.to_string());
            decls.insert(
                name.to_string(),
                NodeDecl {
                    explicit: false,
                    node: Some(Node::new(name, NodeKind::Observed)),
                },
            );
        }
    };

    loop {
        match p.peek() {
            Some(Tok::RBrace) => {
                p.at += 1;
                break;
            }
            Some(Tok::Semi) => {
                p.at += 1;
            }
            Some(Tok::Ident(_)) => {
                let name = p.ident("identifier")?;
                if p.peek() == Some(&Tok::Arrow) {
                    p.at += 1;
                    let child = p.ident("identifier after `->`")?;
                    let beta = if p.peek() == Some(&Tok::LBracket) {
                        p.at += 1;
                        let attr_pos = p.pos();
                        let attr = p.ident("`beta`")?;
                        if attr != "beta" {
                            return Err(ParseError::UnknownAttribute {
                                attr,
                                line: attr_pos.line,
                                column: attr_pos.column,
                            });
                        }
                        p.expect(Tok::Eq, "`=`")?;
                        let v = match p.next() {
                            Some(Tok::Number(v)) => v,
                            _ => {
                                p.at -= 1;
                                return Err(p.error("expected number"));
                            }
                        };
                        p.expect(Tok::RBracket, "`]`")?;
                        Some(v)
                    } else {
                        None
                    };
                    touch(&name, &mut order, &mut decls);
                    touch(&child, &mut order, &mut decls);
                    edges.push((name, child, beta));
                } else {
                    touch(&name, &mut order, &mut decls);
                    let decl = decls.get_mut(&name).expect("inserted above");
                    if decl.explicit {
                        return Err(DagError::DuplicateNode(name).into());
                    }
                    decl.explicit = true;
                    let node = decl.node.as_mut().expect("present");
                    if p.peek() == Some(&Tok::LBracket) {
                        p.at += 1;
                        let (mut latent, mut deterministic) = (false, false);
                        loop {
                            let attr_pos = p.pos();
                            let attr = p.ident("attribute")?;
                            match attr.as_str() {
                                "latent" => latent = true,
                                "deterministic" => deterministic = true,
                                "exposure" => node.exposure = true,
                                "outcome" => node.outcome = true,
                                _ => {
                                    return Err(ParseError::UnknownAttribute {
                                        attr,
                                        line: attr_pos.line,
                                        column: attr_pos.column,
                                    })
                                }
                            }
                            match p.next() {
                                Some(Tok::Comma) => continue,
                                Some(Tok::RBracket) => break,
                                _ => {
                                    p.at -= 1;
                                    return Err(p.error("expected `,` or `]`"));
                                }
                            }
                        }
                        node.kind = match (latent, deterministic) {
                            (true, true) => return Err(ParseError::ConflictingKind(name)),
                            (true, false) => NodeKind::Latent,
                            (false, true) => NodeKind::Deterministic,
                            (false, false) => NodeKind::Observed,
                        };
                    }
                }
            }
            Some(_) => return Err(p.error("expected node or edge declaration")),
            None => return Err(p.error("expected `}`")),
        }
    }
    if p.peek().is_some() {
        return Err(p.error("unexpected input after closing `}`"));
    }

    let mut builder = Dag::builder();
    for name in &order {
        let node = decls
            .get_mut(name)
            .and_then(|d| d.node.take())
            .expect("declared");
        builder.push_node(node);
    }
    for (from, to, beta) in &edges {
        builder.push_edge(from, to, *beta);
    }
    Ok(builder.build()?)
}

/// Renders a [`Dag`] so that `parse_dag(&print_dag(d)) == d`.
pub fn print_dag(dag: &Dag) -> String {
    if dag.is_empty() {
        return "dag { }".to_string();
    }
    let mut out = String::from("dag {\n");
    for node in dag.nodes() {
        let mut attrs: Vec<&str> = Vec::new();
        match node.kind {
            NodeKind::Observed => {}
            NodeKind::Latent => attrs.push("latent"),
            NodeKind::Deterministic => attrs.push("deterministic"),
        }
        if node.exposure {
            attrs.push("exposure");
        }
        if node.outcome {
            attrs.push("outcome");
        }
        if attrs.is_empty() {
            let _ = writeln!(out, "  {}", node.name);
        } else {
            let _ = writeln!(out, "  {} [{}]", node.name, attrs.join(","));
        }
    }
    for e in dag.edges() {
        let _ = write!(out, "  {} -> {}", dag.name(e.from), dag.name(e.to));
        if let Some(b) = e.beta {
            // `{:?}` keeps a decimal point and round-trips exactly.
            let _ = write!(out, " [beta={b:?}]");
        }
        out.push('\n');
    }
    out.push('}');
    out
}
