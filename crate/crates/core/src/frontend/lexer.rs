use super::ast::Pos;
use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    // keywords
    Class,
    Public,
    Void,
    KwInt,
    Cin,
    Cout,
    If,
    Else,
    While,
    Return,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Colon,
    Dot,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Shl,
    Shr,
    Amp,
    Hash,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    fn spelling(&self) -> &'static str {
        match self {
            Tok::Class => "class",
            Tok::Public => "public",
            Tok::Void => "void",
            Tok::KwInt => "int",
            Tok::Cin => "cin",
            Tok::Cout => "cout",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Return => "return",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Shl => "<<",
            Tok::Shr => ">>",
            Tok::Amp => "&",
            Tok::Hash => "#",
            Tok::Ident(_) | Tok::Int(_) | Tok::Str(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut lexer = Lexer {
        chars: src.chars().collect(),
        idx: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        lexer.skip_trivia()?;
        let pos = lexer.pos();
        let Some(c) = lexer.peek() else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let word = lexer.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
            keyword(&word).unwrap_or(Tok::Ident(word))
        } else if c.is_ascii_digit() {
            let digits = lexer.take_while(|c| c.is_ascii_digit());
            let value = digits.parse::<i64>().map_err(|_| FrontendError::Lex {
                pos,
                msg: format!("integer literal `{digits}` out of range"),
            })?;
            Tok::Int(value)
        } else if c == '"' {
            lexer.bump();
            let mut text = String::new();
            loop {
                match lexer.bump() {
                    Some('"') => break,
                    Some('\n') | None => {
                        return Err(FrontendError::Lex {
                            pos,
                            msg: "unterminated string literal".to_string(),
                        })
                    }
                    Some(ch) => text.push(ch),
                }
            }
            Tok::Str(text)
        } else {
            lexer.bump();
            let next = lexer.peek();
            let mut two = |t: Tok| {
                lexer.bump();
                t
            };
            match (c, next) {
                ('<', Some('=')) => two(Tok::Le),
                ('>', Some('=')) => two(Tok::Ge),
                ('=', Some('=')) => two(Tok::EqEq),
                ('!', Some('=')) => two(Tok::Ne),
                ('<', Some('<')) => two(Tok::Shl),
                ('>', Some('>')) => two(Tok::Shr),
                ('{', _) => Tok::LBrace,
                ('}', _) => Tok::RBrace,
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                (';', _) => Tok::Semi,
                (',', _) => Tok::Comma,
                (':', _) => Tok::Colon,
                ('.', _) => Tok::Dot,
                ('=', _) => Tok::Assign,
                ('+', _) => Tok::Plus,
                ('-', _) => Tok::Minus,
                ('*', _) => Tok::Star,
                ('/', _) => Tok::Slash,
                ('<', _) => Tok::Lt,
                ('>', _) => Tok::Gt,
                ('&', _) => Tok::Amp,
                ('#', _) => Tok::Hash,
                _ => {
                    return Err(FrontendError::Lex {
                        pos,
                        msg: format!("unexpected character {c:?}"),
                    })
                }
            }
        };
        out.push(Token { tok, pos });
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "class" => Tok::Class,
        "public" => Tok::Public,
        "void" => Tok::Void,
        "int" => Tok::KwInt,
        "cin" => Tok::Cin,
        "cout" => Tok::Cout,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "return" => Tok::Return,
        _ => return None,
    })
}

struct Lexer {
    chars: Vec<char>,
    idx: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.idx + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn skip_trivia(&mut self) -> Result<(), FrontendError> {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                (Some('/'), Some('*')) => {
                    let pos = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(FrontendError::Lex {
                                    pos,
                                    msg: "unterminated block comment".to_string(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }
}
