use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{PatternError, RegexNode};
use crate::automaton::{SymbolId, EPSILON_TOKENS};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token<'a> {
    Literal(&'a str),
    Epsilon,
    Bar,
    Star,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token<'_>)>, PatternError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        let single = match c {
            '|' => Some(Token::Bar),
            '*' => Some(Token::Star),
            '(' => Some(Token::Open),
            ')' => Some(Token::Close),
            '.' => {
                return Err(PatternError::Syntax {
                    offset: start,
                    message: "`.` is not supported".to_string(),
                })
            }
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push((start, tok));
            chars.next();
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut end = start;
        while let Some(&(i, c)) = chars.peek() {
            if c.is_whitespace() || matches!(c, '|' | '*' | '(' | ')' | '.') {
                break;
            }
            end = i + c.len_utf8();
            chars.next();
        }
        let word = &text[start..end];
        let tok = if EPSILON_TOKENS.contains(&word) {
            Token::Epsilon
        } else {
            Token::Literal(word)
        };
        tokens.push((start, tok));
    }
    Ok(tokens)
}

struct Parser<'a, 'b> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    end: usize,
    symbols: &'b BTreeMap<&'b str, SymbolId>,
}

impl<'a> Parser<'a, '_> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, message: impl Into<String>) -> PatternError {
        PatternError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn alternation(&mut self) -> Result<RegexNode, PatternError> {
        let mut node = self.concatenation()?;
        while self.peek() == Some(&Token::Bar) {
            self.pos += 1;
            let rhs = self.concatenation()?;
            node = RegexNode::alt(node, rhs);
        }
        Ok(node)
    }

    fn concatenation(&mut self) -> Result<RegexNode, PatternError> {
        let mut node: Option<RegexNode> = None;
        while matches!(self.peek(), Some(Token::Literal(_) | Token::Epsilon | Token::Open)) {
            let rhs = self.repetition()?;
            node = Some(match node {
                None => rhs,
                Some(lhs) => RegexNode::concat(lhs, rhs),
            });
        }
        node.ok_or_else(|| match self.peek() {
            None => self.error("expected an expression"),
            Some(t) => self.error(format!("unexpected {}", describe(t))),
        })
    }

    fn repetition(&mut self) -> Result<RegexNode, PatternError> {
        let mut node = self.atom()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            node = RegexNode::star(node);
        }
        Ok(node)
    }

    fn atom(&mut self) -> Result<RegexNode, PatternError> {
        let Some((_, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(self.error("expected an expression"));
        };
        self.pos += 1;
        match tok {
            Token::Literal(name) => self
                .symbols
                .get(name)
                .copied()
                .map(RegexNode::Literal)
                .ok_or_else(|| PatternError::UnknownSymbol(name.to_string())),
            Token::Epsilon => Ok(RegexNode::Empty),
            Token::Open => {
                let inner = self.alternation()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            other => {
                self.pos -= 1;
                Err(self.error(format!("unexpected {}", describe(&other))))
            }
        }
    }
}

fn describe(tok: &Token<'_>) -> &'static str {
    match tok {
        Token::Literal(_) => "template ID",
        Token::Epsilon => "`eps`",
        Token::Bar => "`|`",
        Token::Star => "`*`",
        Token::Open => "`(`",
        Token::Close => "`)`",
    }
}

/// Parses a pattern expression. `symbols[i]` names `SymbolId(i)`; every
/// literal must be one of them.
pub fn parse_pattern<S: AsRef<str>>(text: &str, symbols: &[S]) -> Result<RegexNode, PatternError> {
    let index: BTreeMap<&str, SymbolId> = symbols
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_ref(), SymbolId(i as u32)))
        .collect();
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        end: text.len(),
        symbols: &index,
    };
    let node = parser.alternation()?;
    if let Some(tok) = parser.peek() {
        return Err(parser.error(format!("unexpected {}", describe(tok))));
    }
    Ok(node)
}

/// Renders `ast` back to pattern syntax with the minimum parentheses needed
/// for [`parse_pattern`] to rebuild the same tree.
pub fn render<S: AsRef<str>>(ast: &RegexNode, symbols: &[S]) -> String {
    let mut out = String::new();
    write_alt(ast, symbols, &mut out);
    out
}

fn write_alt<S: AsRef<str>>(node: &RegexNode, symbols: &[S], out: &mut String) {
    match node {
        RegexNode::Alt(l, r) => {
            write_alt(l, symbols, out);
            out.push_str(" | ");
            if matches!(**r, RegexNode::Alt(..)) {
                write_group(r, symbols, out);
            } else {
                write_concat(r, symbols, out);
            }
        }
        _ => write_concat(node, symbols, out),
    }
}

fn write_concat<S: AsRef<str>>(node: &RegexNode, symbols: &[S], out: &mut String) {
    match node {
        RegexNode::Concat(l, r) => {
            write_concat(l, symbols, out);
            out.push(' ');
            if matches!(**r, RegexNode::Concat(..)) {
                write_group(r, symbols, out);
            } else {
                write_star(r, symbols, out);
            }
        }
        RegexNode::Alt(..) => write_group(node, symbols, out),
        _ => write_star(node, symbols, out),
    }
}

fn write_star<S: AsRef<str>>(node: &RegexNode, symbols: &[S], out: &mut String) {
    match node {
        RegexNode::Empty => out.push_str("eps"),
        RegexNode::Literal(s) => out.push_str(symbols[s.index()].as_ref()),
        RegexNode::Star(inner) => {
            if matches!(**inner, RegexNode::Empty | RegexNode::Literal(_) | RegexNode::Star(_)) {
                write_star(inner, symbols, out);
            } else {
                write_group(inner, symbols, out);
            }
            out.push('*');
        }
        _ => write_group(node, symbols, out),
    }
}

fn write_group<S: AsRef<str>>(node: &RegexNode, symbols: &[S], out: &mut String) {
    out.push('(');
    write_alt(node, symbols, out);
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use RegexNode as R;

    const XYZ: [&str; 3] = ["x", "y", "z"];

    #[test]
    fn concat_with_alternation() {
        assert_eq!(
            parse_pattern("x ( y | z )", &XYZ).unwrap(),
            R::concat(R::literal(0), R::alt(R::literal(1), R::literal(2)))
        );
        assert_eq!(parse_pattern("x(y|z)", &XYZ), parse_pattern("x ( y | z )", &XYZ));
    }

    #[test]
    fn star_binds_tighter_than_concat() {
        assert_eq!(
            parse_pattern("x* ( y | z )", &XYZ).unwrap(),
            R::concat(R::star(R::literal(0)), R::alt(R::literal(1), R::literal(2)))
        );
    }

    #[test]
    fn left_associative() {
        assert_eq!(
            parse_pattern("x y z", &XYZ).unwrap(),
            R::concat(R::concat(R::literal(0), R::literal(1)), R::literal(2))
        );
        assert_eq!(
            parse_pattern("x | y | z", &XYZ).unwrap(),
            R::alt(R::alt(R::literal(0), R::literal(1)), R::literal(2))
        );
    }

    #[test]
    fn unknown_symbol() {
        assert_eq!(
            parse_pattern("x ( y | w )", &XYZ),
            Err(PatternError::UnknownSymbol("w".into()))
        );
    }

    #[test]
    fn multi_character_ids_and_epsilon() {
        let syms = ["t1", "t17"];
        assert_eq!(
            parse_pattern("t17 (eps | t1)*", &syms).unwrap(),
            R::concat(R::literal(1), R::star(R::alt(R::Empty, R::literal(0))))
        );
        assert_eq!(parse_pattern("ε", &syms).unwrap(), R::Empty);
    }

    #[test]
    fn syntax_errors() {
        for (text, offset) in [
            ("", 0),
            ("x |", 3),
            ("(x", 2),
            ("x)", 1),
            ("*x", 0),
            ("x . y", 2),
            ("()", 1),
        ] {
            match parse_pattern(text, &XYZ) {
                Err(PatternError::Syntax { offset: o, .. }) => assert_eq!(o, offset, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn render_round_trips() {
        for text in [
            "x ( y | z )",
            "x* ( y | z )",
            "((y*z)*x)*y",
            "x (y z)",
            "x | (y | z)",
            "(eps)* x",
            "(x y)* | z**",
        ] {
            let ast = parse_pattern(text, &XYZ).unwrap();
            let shown = render(&ast, &XYZ);
            assert_eq!(parse_pattern(&shown, &XYZ).unwrap(), ast, "{text} -> {shown}");
        }
    }
}
