use crate::program::{DiagKind, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Name, plus the id of a printed fresh name (`w#12`).
    Ident(String, u64),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub start: Pos,
    pub end: Pos,
}

// Longest first.
const SYMBOLS: &[&str] = &[
    "\\/", "|-", "::", "<:", "<=", ">=", "==", "!=", "<", ">", "=", "!", ":", ",", ".", "*", "&",
    "(", ")", "{", "}", ";", "+", "-",
];

pub fn span(file: &str, start: Pos, end: Pos) -> SourceSpan {
    SourceSpan {
        file: file.to_string(),
        start_line: start.line,
        start_col: start.col,
        end_line: end.line,
        end_col: end.col,
    }
}

pub fn lex(text: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let start = Pos { line, col };
            advance(&mut i, &mut line, &mut col, 2);
            let mut closed = false;
            while i < chars.len() {
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col, 2);
                    closed = true;
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
            if !closed {
                diags.push(
                    Diagnostic::new(DiagKind::Lexical, "unterminated block comment")
                        .at(Some(span(file, start, Pos { line, col }))),
                );
            }
            continue;
        }
        let start = Pos { line, col };
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            let name: String = chars[i..j].iter().collect();
            let mut id = 0u64;
            let mut k = j;
            if k < chars.len() && chars[k] == '#' && chars.get(k + 1).is_some_and(|d| d.is_ascii_digit()) {
                k += 1;
                let ds = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let digits: String = chars[ds..k].iter().collect();
                id = digits.parse().unwrap_or(0);
            }
            let n = k - i;
            advance(&mut i, &mut line, &mut col, n);
            toks.push(Token {
                tok: Tok::Ident(name, id),
                start,
                end: Pos { line, col },
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            let end = Pos { line, col };
            match digits.parse::<i64>() {
                Ok(k) => toks.push(Token {
                    tok: Tok::Int(k),
                    start,
                    end,
                }),
                Err(_) => diags.push(
                    Diagnostic::new(DiagKind::Lexical, format!("integer literal `{}` is too large", digits))
                        .at(Some(span(file, start, end))),
                ),
            }
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            advance(&mut i, &mut line, &mut col, sym.chars().count());
            toks.push(Token {
                tok: Tok::Sym(sym),
                start,
                end: Pos { line, col },
            });
            continue;
        }
        advance(&mut i, &mut line, &mut col, 1);
        diags.push(
            Diagnostic::new(DiagKind::Lexical, format!("unexpected character `{}`", c))
                .at(Some(span(file, start, Pos { line, col }))),
        );
    }
    let end = Pos { line, col };
    toks.push(Token {
        tok: Tok::Eof,
        start: end,
        end,
    });
    (toks, diags)
}
