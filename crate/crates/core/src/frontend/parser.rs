//! Recursive-descent parser. Produces an unchecked [`Program`] whose
//! statements are numbered; name resolution and typing happen in
//! [`super::check`].

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;

pub fn parse_unchecked(src: &str) -> Result<Program, FrontendError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, idx: 0 };
    let mut program = p.program()?;
    number_statements(&mut program)?;
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.idx].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.idx + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.idx].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.idx].tok.clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(FrontendError::Syntax {
            pos: self.pos(),
            msg: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(what)
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => self.error("identifier"),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut classes = Vec::new();
        while *self.peek() == Tok::Class {
            classes.push(self.class_def()?);
        }
        let main_pos = self.pos();
        self.expect(Tok::Void, "`class` or `void main`")?;
        match self.peek() {
            Tok::Ident(name) if name == "main" => {
                self.bump();
            }
            _ => return self.error("`main`"),
        }
        self.expect(Tok::LParen, "`(`")?;
        self.expect(Tok::RParen, "`)`")?;
        let main = self.block()?;
        if *self.peek() != Tok::Eof {
            return self.error("end of input");
        }
        Ok(Program {
            classes,
            main,
            main_pos,
            stmt_count: 0,
        })
    }

    fn class_def(&mut self) -> PResult<ClassDef> {
        let pos = self.pos();
        self.expect(Tok::Class, "`class`")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut members = Vec::new();
        while *self.peek() == Tok::KwInt {
            self.bump();
            loop {
                members.push((self.pos(), self.ident()?));
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::Semi, "`;`")?;
        }
        self.expect(Tok::Public, "`public`")?;
        self.expect(Tok::Colon, "`:`")?;
        let mut methods = Vec::new();
        while *self.peek() != Tok::RBrace {
            methods.push(self.method_def()?);
        }
        self.bump();
        self.expect(Tok::Semi, "`;` after class body")?;

        let mut seen = Vec::new();
        for (mpos, m) in &members {
            if seen.contains(&m) {
                return Err(FrontendError::Duplicate {
                    pos: *mpos,
                    what: format!("member `{m}` in class `{name}`"),
                });
            }
            seen.push(m);
        }
        Ok(ClassDef {
            name,
            members: members.into_iter().map(|(_, m)| m).collect(),
            methods,
            pos,
        })
    }

    fn type_tag(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            Tok::KwInt => {
                self.bump();
                Ok(Type::Int)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Type::Class(name))
            }
            _ => self.error("type"),
        }
    }

    fn method_def(&mut self) -> PResult<MethodDef> {
        let pos = self.pos();
        let ret = match self.peek().clone() {
            Tok::Void => {
                self.bump();
                ReturnType::Void
            }
            Tok::KwInt => {
                self.bump();
                ReturnType::Int
            }
            Tok::Ident(name) => {
                self.bump();
                ReturnType::Class(name)
            }
            _ => return self.error("method return type or `}`"),
        };
        let name = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut formals = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let ty = self.type_tag()?;
                let by_ref = if *self.peek() == Tok::Amp {
                    self.bump();
                    true
                } else {
                    false
                };
                let fname = self.ident()?;
                formals.push(Formal {
                    name: fname,
                    ty,
                    by_ref,
                });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let body = self.block()?;
        let signature = Signature {
            name: name.clone(),
            params: formals.iter().map(|f| f.ty.clone()).collect(),
        };
        Ok(MethodDef {
            name,
            signature,
            formals,
            ret,
            body,
            pos,
        })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut body = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.error("`}`");
            }
            body.push(self.stmt()?);
        }
        self.bump();
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        let label = if *self.peek() == Tok::Hash {
            self.bump();
            let n = match self.bump() {
                Tok::Int(n) => n,
                _ => {
                    return Err(FrontendError::Syntax {
                        pos,
                        msg: "expected statement number after `#`".to_string(),
                    })
                }
            };
            self.expect(Tok::Colon, "`:` after statement label")?;
            if n < 1 || n > u32::MAX as i64 {
                return Err(FrontendError::Label {
                    pos,
                    msg: format!("statement label {n} out of range"),
                });
            }
            Some(n as StmtId)
        } else {
            None
        };
        let kind = self.stmt_kind()?;
        if label.is_some() && matches!(kind, StmtKind::VarDecl { .. }) {
            return Err(FrontendError::Label {
                pos,
                msg: "declarations cannot carry a statement label".to_string(),
            });
        }
        Ok(Stmt {
            id: label,
            pos,
            kind,
        })
    }

    fn stmt_kind(&mut self) -> PResult<StmtKind> {
        match self.peek().clone() {
            Tok::Cin => {
                self.bump();
                self.expect(Tok::Shr, "`>>`")?;
                let target = self.lvalue()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(StmtKind::Input { target })
            }
            Tok::Cout => {
                self.bump();
                self.expect(Tok::Shl, "`<<`")?;
                let value = if let Tok::Str(s) = self.peek().clone() {
                    self.bump();
                    Expr::Str(s)
                } else {
                    self.expr()?
                };
                self.expect(Tok::Semi, "`;`")?;
                Ok(StmtKind::Output { value })
            }
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let then_body = self.block()?;
                let else_body = if *self.peek() == Tok::Else {
                    self.bump();
                    self.block()?
                } else {
                    Vec::new()
                };
                Ok(StmtKind::If {
                    cond,
                    then_body,
                    else_body,
                })
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.block()?;
                Ok(StmtKind::While { cond, body })
            }
            Tok::Return => {
                self.bump();
                let value = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi, "`;`")?;
                Ok(StmtKind::Return { value })
            }
            Tok::KwInt => {
                self.bump();
                let names = self.name_list()?;
                Ok(StmtKind::VarDecl {
                    ty: Type::Int,
                    names,
                })
            }
            Tok::Ident(first) => {
                if let Tok::Ident(_) = self.peek_at(1) {
                    self.bump();
                    let names = self.name_list()?;
                    return Ok(StmtKind::VarDecl {
                        ty: Type::Class(first),
                        names,
                    });
                }
                if self.at_call() {
                    return self.call(None);
                }
                let target = self.lvalue()?;
                self.expect(Tok::Assign, "`=`")?;
                if self.at_call() {
                    return self.call(Some(target));
                }
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(StmtKind::Assign { target, value })
            }
            _ => self.error("statement"),
        }
    }

    fn at_call(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_))
            && *self.peek_at(1) == Tok::Dot
            && matches!(self.peek_at(2), Tok::Ident(_))
            && *self.peek_at(3) == Tok::LParen
    }

    fn call(&mut self, target: Option<LValue>) -> PResult<StmtKind> {
        let receiver = self.ident()?;
        self.expect(Tok::Dot, "`.`")?;
        let method = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(StmtKind::Call {
            target,
            receiver,
            method,
            args,
            info: None,
        })
    }

    fn name_list(&mut self) -> PResult<Vec<String>> {
        let mut names = vec![self.ident()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            names.push(self.ident()?);
        }
        self.expect(Tok::Semi, "`;`")?;
        Ok(names)
    }

    fn lvalue(&mut self) -> PResult<LValue> {
        let base = self.ident()?;
        if *self.peek() == Tok::Dot {
            self.bump();
            let member = self.ident()?;
            Ok(LValue::member(base, member))
        } else {
            Ok(LValue::var(base))
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Lt => BinOp::Lt,
            Tok::Gt => BinOp::Gt,
            Tok::Le => BinOp::Le,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.lvalue()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Str(_) => Err(FrontendError::Syntax {
                pos: self.pos(),
                msg: "string literals are only allowed as a `cout` operand".to_string(),
            }),
            _ => self.error("expression"),
        }
    }
}

/// Assigns statement ids. Explicit labels are kept; unlabeled executable
/// statements take the smallest unused ids in textual order. The result
/// must be a bijection onto `1..=n`.
fn number_statements(program: &mut Program) -> Result<(), FrontendError> {
    let mut labeled: BTreeMap<StmtId, Pos> = BTreeMap::new();
    let mut total = 0u32;
    program.walk(|_, s| {
        if s.is_executable() {
            total += 1;
        }
    });
    let mut collision = None;
    program.walk(|_, s| {
        if let Some(id) = s.id {
            if let Some(first) = labeled.insert(id, s.pos) {
                collision.get_or_insert((id, s.pos, first));
            }
        }
    });
    if let Some((id, pos, first)) = collision {
        return Err(FrontendError::Label {
            pos,
            msg: format!("statement label {id} already used at {first}"),
        });
    }
    if let Some((&id, &pos)) = labeled.iter().find(|(&id, _)| id > total) {
        return Err(FrontendError::Label {
            pos,
            msg: format!(
                "statement label {id} leaves a gap: the program has {total} executable statements"
            ),
        });
    }

    let mut free = (1..=total).filter(|id| !labeled.contains_key(id));
    let mut assign = |body: &mut Vec<Stmt>| fill_ids(body, &mut free);
    for class in &mut program.classes {
        for method in &mut class.methods {
            assign(&mut method.body);
        }
    }
    assign(&mut program.main);
    program.stmt_count = total;
    Ok(())
}

fn fill_ids(body: &mut [Stmt], free: &mut dyn Iterator<Item = StmtId>) {
    for s in body {
        if s.is_executable() && s.id.is_none() {
            s.id = free.next();
        }
        match &mut s.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                fill_ids(then_body, free);
                fill_ids(else_body, free);
            }
            StmtKind::While { body, .. } => fill_ids(body, free),
            _ => {}
        }
    }
}
