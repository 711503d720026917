use super::ast::{Domain, Expr, ExprKind, LtlFormula, LtlSpec, Pos, SmvModel, Value, VarDecl};
use super::lexer::{tokenize, Tok, Token, RESERVED_WORDS};
use super::{semantics, ParseError};

struct Parser {
    toks: Vec<Token>,
    idx: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Self {
            toks: tokenize(text)?,
            idx: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.idx].pos
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, context: &str) -> Result<Pos, ParseError> {
        if self.peek() == &tok {
            Ok(self.advance().pos)
        } else {
            Err(self.unexpected(&format!("{} {}", tok.describe(), context)))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(
            self.pos(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.advance().pos;
                Ok((name, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn declared_name(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        let (name, pos) = self.ident(what)?;
        if RESERVED_WORDS.contains(&name.as_str()) {
            return Err(ParseError::new(
                pos,
                format!("reserved word `{name}` cannot be used as a {what}"),
            ));
        }
        Ok((name, pos))
    }

    // ---- models ----

    fn model(&mut self) -> Result<SmvModel, ParseError> {
        self.expect(Tok::Module, "at start of model")?;
        let (name, pos) = self.ident("module name")?;
        if name != "main" {
            return Err(ParseError::new(
                pos,
                format!("only `MODULE main` is supported, found `MODULE {name}`"),
            ));
        }
        let mut model = SmvModel::default();
        loop {
            match self.peek() {
                Tok::Var => {
                    self.advance();
                    if !matches!(self.peek(), Tok::Ident(_)) {
                        return Err(self.unexpected("a variable declaration after VAR"));
                    }
                    while matches!(self.peek(), Tok::Ident(_)) {
                        model.vars.push(self.var_decl()?);
                    }
                }
                Tok::Assign => {
                    self.advance();
                    while matches!(self.peek(), Tok::Ident(_)) {
                        self.assignment(&mut model)?;
                    }
                }
                Tok::LtlSpec => {
                    let pos = self.advance().pos;
                    let formula = self.ltl_or()?;
                    self.eat(&Tok::Semi);
                    model.ltlspecs.push(LtlSpec { formula, pos });
                }
                Tok::Eof => break,
                Tok::Module => {
                    return Err(ParseError::new(
                        self.pos(),
                        "only a single `MODULE main` is supported",
                    ))
                }
                _ => return Err(self.unexpected("VAR, ASSIGN, LTLSPEC or end of input")),
            }
        }
        Ok(model)
    }

    fn var_decl(&mut self) -> Result<VarDecl, ParseError> {
        let (name, pos) = self.declared_name("variable name")?;
        self.expect(Tok::Colon, "after variable name")?;
        let domain = match self.peek() {
            Tok::Boolean => {
                self.advance();
                Domain::Bool
            }
            Tok::LBrace => {
                self.advance();
                let mut lits = vec![self.declared_name("enum literal")?];
                while self.eat(&Tok::Comma) {
                    lits.push(self.declared_name("enum literal")?);
                }
                self.expect(Tok::RBrace, "to close enum domain")?;
                for (i, (lit, lpos)) in lits.iter().enumerate() {
                    if lits[..i].iter().any(|(l, _)| l == lit) {
                        return Err(ParseError::new(
                            *lpos,
                            format!("duplicate enum literal {lit} in domain of {name}"),
                        ));
                    }
                }
                Domain::Enum(lits.into_iter().map(|(l, _)| l).collect())
            }
            _ => return Err(self.unexpected("`boolean` or `{` for variable domain")),
        };
        self.expect(Tok::Semi, "after variable declaration")?;
        Ok(VarDecl { name, domain, pos })
    }

    fn assignment(&mut self, model: &mut SmvModel) -> Result<(), ParseError> {
        let (which, pos) = self.ident("`init` or `next`")?;
        let is_init = match which.as_str() {
            "init" => true,
            "next" => false,
            _ => {
                return Err(ParseError::new(
                    pos,
                    format!("expected `init` or `next`, found identifier `{which}`"),
                ))
            }
        };
        self.expect(Tok::LParen, &format!("after `{which}`"))?;
        let (var, vpos) = self.ident("variable name")?;
        self.expect(Tok::RParen, "after assigned variable")?;
        self.expect(Tok::Becomes, "in assignment")?;
        let value = self.expr()?;
        self.expect(Tok::Semi, "after assignment")?;
        let slot = if is_init {
            &mut model.inits
        } else {
            &mut model.nexts
        };
        if slot.contains_key(&var) {
            return Err(ParseError::new(
                vpos,
                format!("duplicate {which} assignment for {var}"),
            ));
        }
        slot.insert(var, value);
        Ok(())
    }

    // ---- propositional expressions ----

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == &Tok::Pipe {
            let pos = self.advance().pos;
            let rhs = self.and_expr()?;
            lhs = Expr::new(ExprKind::Or(Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.eq_expr()?;
        while self.peek() == &Tok::Amp {
            let pos = self.advance().pos;
            let rhs = self.eq_expr()?;
            lhs = Expr::new(ExprKind::And(Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    fn eq_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.unary_expr()?;
        if self.peek() == &Tok::Equals {
            let pos = self.advance().pos;
            let rhs = self.unary_expr()?;
            if self.peek() == &Tok::Equals {
                return Err(ParseError::new(
                    self.pos(),
                    "chained `=` comparisons need parentheses",
                ));
            }
            return Ok(Expr::new(ExprKind::Eq(Box::new(lhs), Box::new(rhs)), pos));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Bang {
            let pos = self.advance().pos;
            let inner = self.unary_expr()?;
            return Ok(Expr::new(ExprKind::Not(Box::new(inner)), pos));
        }
        self.primary_expr()
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(Expr::new(ExprKind::Const(Value::Bool(true)), pos))
            }
            Tok::False => {
                self.advance();
                Ok(Expr::new(ExprKind::Const(Value::Bool(false)), pos))
            }
            Tok::Ident(name) => {
                self.advance();
                Ok(Expr::new(ExprKind::VarRef(name), pos))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen, "to close parenthesis")?;
                Ok(e)
            }
            Tok::Case => {
                self.advance();
                let mut branches = Vec::new();
                while self.peek() != &Tok::Esac {
                    if self.peek() == &Tok::Eof {
                        return Err(self.unexpected("`esac`"));
                    }
                    let guard = self.expr()?;
                    self.expect(Tok::Colon, "after case guard")?;
                    let value = self.expr()?;
                    self.expect(Tok::Semi, "after case branch")?;
                    branches.push((guard, value));
                }
                if branches.is_empty() {
                    return Err(ParseError::new(pos, "case expression needs at least one branch"));
                }
                self.advance();
                Ok(Expr::new(ExprKind::Case(branches), pos))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    // ---- LTL ----

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn ltl_or(&mut self) -> Result<LtlFormula, ParseError> {
        let mut lhs = self.ltl_and()?;
        while self.eat(&Tok::Pipe) {
            lhs = LtlFormula::or(lhs, self.ltl_and()?);
        }
        Ok(lhs)
    }

    fn ltl_and(&mut self) -> Result<LtlFormula, ParseError> {
        let mut lhs = self.ltl_until()?;
        while self.eat(&Tok::Amp) {
            lhs = LtlFormula::and(lhs, self.ltl_until()?);
        }
        Ok(lhs)
    }

    fn ltl_until(&mut self) -> Result<LtlFormula, ParseError> {
        let lhs = self.ltl_unary()?;
        if self.is_word("U") {
            self.advance();
            let rhs = self.ltl_until()?;
            return Ok(LtlFormula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ltl_unary(&mut self) -> Result<LtlFormula, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(LtlFormula::not(self.ltl_unary()?));
        }
        for (word, build) in [
            ("X", LtlFormula::next as fn(LtlFormula) -> LtlFormula),
            ("F", LtlFormula::finally),
            ("G", LtlFormula::globally),
        ] {
            if self.is_word(word) {
                self.advance();
                return Ok(build(self.ltl_unary()?));
            }
        }
        self.ltl_primary()
    }

    fn ltl_primary(&mut self) -> Result<LtlFormula, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let f = self.ltl_or()?;
                self.expect(Tok::RParen, "to close parenthesis")?;
                Ok(f)
            }
            Tok::Ident(ref w) if RESERVED_WORDS.contains(&w.as_str()) => Err(ParseError::new(
                pos,
                format!("`{w}` is an operator and needs an operand"),
            )),
            Tok::True | Tok::False | Tok::Ident(_) => {
                let lhs = self.atom_operand()?;
                if self.peek() == &Tok::Equals {
                    let eq_pos = self.advance().pos;
                    let rhs = self.atom_operand()?;
                    return Ok(LtlFormula::Atom(Expr::new(
                        ExprKind::Eq(Box::new(lhs), Box::new(rhs)),
                        eq_pos,
                    )));
                }
                Ok(LtlFormula::Atom(lhs))
            }
            _ => Err(self.unexpected("a temporal formula")),
        }
    }

    fn atom_operand(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(Expr::new(ExprKind::Const(Value::Bool(true)), pos))
            }
            Tok::False => {
                self.advance();
                Ok(Expr::new(ExprKind::Const(Value::Bool(false)), pos))
            }
            Tok::Ident(name) if !RESERVED_WORDS.contains(&name.as_str()) => {
                self.advance();
                Ok(Expr::new(ExprKind::VarRef(name), pos))
            }
            _ => Err(self.unexpected("an identifier or boolean constant")),
        }
    }
}

/// Parses and validates a model. Identifiers naming enum literals are
/// resolved to constants; LTLSPEC atoms are resolved against the
/// declarations.
pub fn parse_model(text: &str) -> Result<SmvModel, ParseError> {
    let mut p = Parser::new(text)?;
    let raw = p.model()?;
    let model = semantics::resolve_model(raw)?;
    semantics::validate(&model)?;
    Ok(model)
}

/// Parses a standalone LTL formula. A leading `LTLSPEC` keyword and a
/// trailing `;` are tolerated. Identifiers stay unresolved; see
/// [`resolve_ltl`](super::resolve_ltl).
pub fn parse_ltl(text: &str) -> Result<LtlFormula, ParseError> {
    let mut p = Parser::new(text)?;
    p.eat(&Tok::LtlSpec);
    let f = p.ltl_or()?;
    p.eat(&Tok::Semi);
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("end of formula"));
    }
    Ok(f)
}

/// Parses one or more `LTLSPEC` items, as found after a model block.
pub fn parse_ltlspecs(text: &str) -> Result<Vec<LtlFormula>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while p.peek() == &Tok::LtlSpec {
        p.advance();
        out.push(p.ltl_or()?);
        p.eat(&Tok::Semi);
    }
    if out.is_empty() {
        return Err(p.unexpected("`LTLSPEC`"));
    }
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("`LTLSPEC` or end of input"));
    }
    Ok(out)
}
