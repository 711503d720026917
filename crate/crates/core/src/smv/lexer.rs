use super::ast::Pos;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Module,
    Var,
    Assign,
    Case,
    Esac,
    True,
    False,
    Boolean,
    LtlSpec,
    Colon,
    Semi,
    Becomes,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Bang,
    Amp,
    Pipe,
    Equals,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::Module => "MODULE",
            Tok::Var => "VAR",
            Tok::Assign => "ASSIGN",
            Tok::Case => "case",
            Tok::Esac => "esac",
            Tok::True => "TRUE",
            Tok::False => "FALSE",
            Tok::Boolean => "boolean",
            Tok::LtlSpec => "LTLSPEC",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Becomes => ":=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Equals => "=",
            Tok::Eof => "<eof>",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Words with a fixed meaning in models. `init`/`next` and the temporal
/// operators are ordinary identifiers to the lexer; the parsers give them
/// meaning by context.
fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "MODULE" => Tok::Module,
        "VAR" => Tok::Var,
        "ASSIGN" => Tok::Assign,
        "case" => Tok::Case,
        "esac" => Tok::Esac,
        "TRUE" => Tok::True,
        "FALSE" => Tok::False,
        "boolean" => Tok::Boolean,
        "LTLSPEC" => Tok::LtlSpec,
        _ => return None,
    })
}

/// Identifiers that can never name a variable or enum literal.
pub const RESERVED_WORDS: &[&str] = &[
    "MODULE", "VAR", "ASSIGN", "case", "esac", "TRUE", "FALSE", "boolean", "LTLSPEC", "init",
    "next", "X", "F", "G", "U",
];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED_WORDS.contains(&s)
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut last = Pos::new(1, 1);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                last = Pos::new(line, col);
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos::new(line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' {
            bump!();
            if chars.peek() == Some(&'-') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
                continue;
            }
            return Err(ParseError::new(pos, "unexpected character `-`"));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let tok = keyword(&word).unwrap_or(Tok::Ident(word));
            out.push(Token { tok, pos });
            continue;
        }
        bump!();
        let tok = match c {
            ':' => {
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::Becomes
                } else {
                    Tok::Colon
                }
            }
            ';' => Tok::Semi,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '=' => Tok::Equals,
            other => {
                return Err(ParseError::new(
                    pos,
                    format!("unexpected character `{}`", other.escape_default()),
                ))
            }
        };
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: last,
    });
    Ok(out)
}
