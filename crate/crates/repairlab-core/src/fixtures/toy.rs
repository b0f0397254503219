//! A minimal line-oriented expression language used by the fixture
//! benchmark.
//!
//! Programs are short integer/boolean functions:
//!
//! ```text
//! # sign function
//! input x
//! if x >= 0 return 1
//! return 0 - 1
//! ```
//!
//! Statements are one per line: `input <names...>` (at most once,
//! first), `let <name> = <expr>`, `if <expr> return <expr>`, and
//! `return <expr>`. `#` starts a comment. Test files hold one case per
//! line, `inputs... -> expected`, and cases are numbered `t1..tn`.

use std::fmt;

/// A syntax error, with the 1-based source line it occurred on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Operators, including the mutation-relevant relational/logical/unary
/// groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    And,
    Or,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
}

impl OpKind {
    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::Lt => "<",
            OpKind::Le => "<=",
            OpKind::Gt => ">",
            OpKind::Ge => ">=",
            OpKind::EqEq => "==",
            OpKind::Ne => "!=",
            OpKind::And => "&&",
            OpKind::Or => "||",
            OpKind::Not => "!",
            OpKind::Plus => "+",
            OpKind::Minus => "-",
            OpKind::Star => "*",
            OpKind::Slash => "/",
            OpKind::Percent => "%",
        }
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            OpKind::Lt | OpKind::Le | OpKind::Gt | OpKind::Ge | OpKind::EqEq | OpKind::Ne
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, OpKind::And | OpKind::Or)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Int(i64),
    Ident(String),
    KwInput,
    KwLet,
    KwIf,
    KwReturn,
    True,
    False,
    Assign,
    LParen,
    RParen,
    Op(OpKind),
    Newline,
}

/// A token with its byte span in the original source, so mutations can
/// splice replacements textually.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

/// Tokenizes a program, dropping comments and collapsing blank lines.
pub fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;

    let mut push = |kind: TokenKind, start: usize, end: usize, line: usize, column: usize| {
        tokens.push(Token {
            kind,
            start,
            end,
            line,
            column,
        });
    };

    while i < bytes.len() {
        let c = bytes[i];
        let column = i - line_start + 1;
        match c {
            b'\n' => {
                push(TokenKind::Newline, i, i + 1, line, column);
                i += 1;
                line += 1;
                line_start = i;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &source[start..i];
                let value = text.parse::<i64>().map_err(|_| ParseError {
                    line,
                    message: format!("integer literal {text:?} out of range"),
                })?;
                push(TokenKind::Int(value), start, i, line, column);
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let kind = match &source[start..i] {
                    "input" => TokenKind::KwInput,
                    "let" => TokenKind::KwLet,
                    "if" => TokenKind::KwIf,
                    "return" => TokenKind::KwReturn,
                    "true" => TokenKind::True,
                    "false" => TokenKind::False,
                    word => TokenKind::Ident(word.to_string()),
                };
                push(kind, start, i, line, column);
            }
            b'(' => {
                push(TokenKind::LParen, i, i + 1, line, column);
                i += 1;
            }
            b')' => {
                push(TokenKind::RParen, i, i + 1, line, column);
                i += 1;
            }
            _ => {
                let two = if i + 1 < bytes.len() {
                    &source[i..i + 2]
                } else {
                    ""
                };
                let (kind, width) = match two {
                    "<=" => (TokenKind::Op(OpKind::Le), 2),
                    ">=" => (TokenKind::Op(OpKind::Ge), 2),
                    "==" => (TokenKind::Op(OpKind::EqEq), 2),
                    "!=" => (TokenKind::Op(OpKind::Ne), 2),
                    "&&" => (TokenKind::Op(OpKind::And), 2),
                    "||" => (TokenKind::Op(OpKind::Or), 2),
                    _ => match c {
                        b'<' => (TokenKind::Op(OpKind::Lt), 1),
                        b'>' => (TokenKind::Op(OpKind::Gt), 1),
                        b'!' => (TokenKind::Op(OpKind::Not), 1),
                        b'=' => (TokenKind::Assign, 1),
                        b'+' => (TokenKind::Op(OpKind::Plus), 1),
                        b'-' => (TokenKind::Op(OpKind::Minus), 1),
                        b'*' => (TokenKind::Op(OpKind::Star), 1),
                        b'/' => (TokenKind::Op(OpKind::Slash), 1),
                        b'%' => (TokenKind::Op(OpKind::Percent), 1),
                        other => {
                            return Err(ParseError {
                                line,
                                message: format!(
                                    "unexpected character {:?}",
                                    char::from(other)
                                ),
                            });
                        }
                    },
                };
                push(kind, i, i + width, line, column);
                i += width;
            }
        }
    }
    Ok(tokens)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Unary {
        op: OpKind,
        expr: Box<Expr>,
    },
    Binary {
        op: OpKind,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Let {
        name: String,
        expr: Expr,
        line: usize,
    },
    IfReturn {
        cond: Expr,
        value: Expr,
        line: usize,
    },
    Return {
        expr: Expr,
        line: usize,
    },
}

/// A parsed program: the declared input names and the statement list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub inputs: Vec<String>,
    pub stmts: Vec<Stmt>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn current_line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.line)
            .unwrap_or(1)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.current_line(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<TokenKind> {
        let kind = self.tokens.get(self.pos).map(|t| t.kind.clone());
        if kind.is_some() {
            self.pos += 1;
        }
        kind
    }

    fn eat_op(&mut self, ops: &[OpKind]) -> Option<OpKind> {
        if let Some(TokenKind::Op(op)) = self.peek() {
            if ops.contains(op) {
                let op = *op;
                self.pos += 1;
                return Some(op);
            }
        }
        None
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Some(TokenKind::Newline)) {
            self.pos += 1;
        }
    }

    fn end_of_line(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None | Some(TokenKind::Newline) => {
                self.skip_newlines();
                Ok(())
            }
            Some(other) => Err(self.error(format!("unexpected trailing {other:?}"))),
        }
    }

    fn expect_ident(&mut self, role: &str) -> Result<String, ParseError> {
        match self.bump() {
            Some(TokenKind::Ident(name)) => Ok(name),
            other => Err(ParseError {
                line: self.tokens.get(self.pos.saturating_sub(1)).map(|t| t.line).unwrap_or(1),
                message: format!("expected {role} name, found {other:?}"),
            }),
        }
    }

    fn parse_program(&mut self) -> Result<Program, ParseError> {
        let mut inputs = Vec::new();
        let mut stmts = Vec::new();
        self.skip_newlines();
        let mut first = true;
        while self.peek().is_some() {
            let line = self.current_line();
            match self.peek() {
                Some(TokenKind::KwInput) => {
                    if !first {
                        return Err(self.error("input declaration must be the first statement"));
                    }
                    self.pos += 1;
                    while matches!(self.peek(), Some(TokenKind::Ident(_))) {
                        if let Some(TokenKind::Ident(name)) = self.bump() {
                            inputs.push(name);
                        }
                    }
                    if inputs.is_empty() {
                        return Err(self.error("input declaration names no variables"));
                    }
                    self.end_of_line()?;
                }
                Some(TokenKind::KwLet) => {
                    self.pos += 1;
                    let name = self.expect_ident("variable")?;
                    match self.bump() {
                        Some(TokenKind::Assign) => {}
                        other => {
                            return Err(ParseError {
                                line,
                                message: format!("expected '=' after let name, found {other:?}"),
                            })
                        }
                    }
                    let expr = self.parse_expr()?;
                    self.end_of_line()?;
                    stmts.push(Stmt::Let { name, expr, line });
                }
                Some(TokenKind::KwIf) => {
                    self.pos += 1;
                    let cond = self.parse_expr()?;
                    match self.bump() {
                        Some(TokenKind::KwReturn) => {}
                        other => {
                            return Err(ParseError {
                                line,
                                message: format!(
                                    "expected 'return' after if condition, found {other:?}"
                                ),
                            })
                        }
                    }
                    let value = self.parse_expr()?;
                    self.end_of_line()?;
                    stmts.push(Stmt::IfReturn { cond, value, line });
                }
                Some(TokenKind::KwReturn) => {
                    self.pos += 1;
                    let expr = self.parse_expr()?;
                    self.end_of_line()?;
                    stmts.push(Stmt::Return { expr, line });
                }
                Some(other) => {
                    return Err(self.error(format!("expected a statement, found {other:?}")));
                }
                None => break,
            }
            first = false;
        }
        if stmts.is_empty() {
            return Err(ParseError {
                line: 1,
                message: "program has no statements".to_string(),
            });
        }
        Ok(Program { inputs, stmts })
    }

    // Precedence, loosest first: || < && < comparison < +- < */% < unary.
    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_and()?;
        while let Some(op) = self.eat_op(&[OpKind::Or]) {
            let rhs = self.parse_and()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_comparison()?;
        while let Some(op) = self.eat_op(&[OpKind::And]) {
            let rhs = self.parse_comparison()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_additive()?;
        // Comparisons do not chain: `a < b < c` is a syntax error.
        if let Some(op) = self.eat_op(&[
            OpKind::Lt,
            OpKind::Le,
            OpKind::Gt,
            OpKind::Ge,
            OpKind::EqEq,
            OpKind::Ne,
        ]) {
            let rhs = self.parse_additive()?;
            return Ok(Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            });
        }
        Ok(lhs)
    }

    fn parse_additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_multiplicative()?;
        while let Some(op) = self.eat_op(&[OpKind::Plus, OpKind::Minus]) {
            let rhs = self.parse_multiplicative()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        while let Some(op) = self.eat_op(&[OpKind::Star, OpKind::Slash, OpKind::Percent]) {
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(op) = self.eat_op(&[OpKind::Not, OpKind::Minus]) {
            let expr = self.parse_unary()?;
            return Ok(Expr::Unary {
                op,
                expr: Box::new(expr),
            });
        }
        self.parse_atom()
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let line = self.current_line();
        match self.bump() {
            Some(TokenKind::Int(v)) => Ok(Expr::Int(v)),
            Some(TokenKind::True) => Ok(Expr::Bool(true)),
            Some(TokenKind::False) => Ok(Expr::Bool(false)),
            Some(TokenKind::Ident(name)) => Ok(Expr::Var(name)),
            Some(TokenKind::LParen) => {
                let expr = self.parse_expr()?;
                match self.bump() {
                    Some(TokenKind::RParen) => Ok(expr),
                    other => Err(ParseError {
                        line,
                        message: format!("expected ')', found {other:?}"),
                    }),
                }
            }
            other => Err(ParseError {
                line,
                message: format!("expected an expression, found {other:?}"),
            }),
        }
    }
}

/// Parses a program from source text.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let tokens = lex(source)?;
    Parser { tokens, pos: 0 }.parse_program()
}

/// Runtime values: 64-bit integers and booleans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuntimeError {
    WrongArity { expected: usize, got: usize },
    Undefined(String),
    TypeMismatch(String),
    DivisionByZero,
    Overflow,
    NoReturn,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeError::WrongArity { expected, got } => {
                write!(f, "program takes {expected} inputs, got {got}")
            }
            RuntimeError::Undefined(name) => write!(f, "undefined variable {name}"),
            RuntimeError::TypeMismatch(detail) => write!(f, "type mismatch: {detail}"),
            RuntimeError::DivisionByZero => write!(f, "division by zero"),
            RuntimeError::Overflow => write!(f, "integer overflow"),
            RuntimeError::NoReturn => write!(f, "program fell through without returning"),
        }
    }
}

impl std::error::Error for RuntimeError {}

fn int_of(v: Value, op: OpKind) -> Result<i64, RuntimeError> {
    match v {
        Value::Int(i) => Ok(i),
        Value::Bool(_) => Err(RuntimeError::TypeMismatch(format!(
            "operator {} needs integers",
            op.symbol()
        ))),
    }
}

fn bool_of(v: Value, op: OpKind) -> Result<bool, RuntimeError> {
    match v {
        Value::Bool(b) => Ok(b),
        Value::Int(_) => Err(RuntimeError::TypeMismatch(format!(
            "operator {} needs booleans",
            op.symbol()
        ))),
    }
}

fn eval_expr(
    expr: &Expr,
    env: &std::collections::BTreeMap<String, Value>,
) -> Result<Value, RuntimeError> {
    match expr {
        Expr::Int(v) => Ok(Value::Int(*v)),
        Expr::Bool(v) => Ok(Value::Bool(*v)),
        Expr::Var(name) => env
            .get(name)
            .copied()
            .ok_or_else(|| RuntimeError::Undefined(name.clone())),
        Expr::Unary { op, expr } => {
            let value = eval_expr(expr, env)?;
            match op {
                OpKind::Not => Ok(Value::Bool(!bool_of(value, *op)?)),
                OpKind::Minus => int_of(value, *op)?
                    .checked_neg()
                    .map(Value::Int)
                    .ok_or(RuntimeError::Overflow),
                other => Err(RuntimeError::TypeMismatch(format!(
                    "{} is not a unary operator",
                    other.symbol()
                ))),
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let l = eval_expr(lhs, env)?;
            let r = eval_expr(rhs, env)?;
            match op {
                OpKind::Plus | OpKind::Minus | OpKind::Star | OpKind::Slash | OpKind::Percent => {
                    let (a, b) = (int_of(l, *op)?, int_of(r, *op)?);
                    let result = match op {
                        OpKind::Plus => a.checked_add(b).ok_or(RuntimeError::Overflow)?,
                        OpKind::Minus => a.checked_sub(b).ok_or(RuntimeError::Overflow)?,
                        OpKind::Star => a.checked_mul(b).ok_or(RuntimeError::Overflow)?,
                        OpKind::Slash => {
                            if b == 0 {
                                return Err(RuntimeError::DivisionByZero);
                            }
                            a.checked_div(b).ok_or(RuntimeError::Overflow)?
                        }
                        OpKind::Percent => {
                            if b == 0 {
                                return Err(RuntimeError::DivisionByZero);
                            }
                            a.checked_rem(b).ok_or(RuntimeError::Overflow)?
                        }
                        _ => unreachable!(),
                    };
                    Ok(Value::Int(result))
                }
                OpKind::Lt | OpKind::Le | OpKind::Gt | OpKind::Ge => {
                    let (a, b) = (int_of(l, *op)?, int_of(r, *op)?);
                    Ok(Value::Bool(match op {
                        OpKind::Lt => a < b,
                        OpKind::Le => a <= b,
                        OpKind::Gt => a > b,
                        OpKind::Ge => a >= b,
                        _ => unreachable!(),
                    }))
                }
                OpKind::EqEq | OpKind::Ne => match (l, r) {
                    (Value::Int(a), Value::Int(b)) => {
                        Ok(Value::Bool((a == b) == (*op == OpKind::EqEq)))
                    }
                    (Value::Bool(a), Value::Bool(b)) => {
                        Ok(Value::Bool((a == b) == (*op == OpKind::EqEq)))
                    }
                    _ => Err(RuntimeError::TypeMismatch(format!(
                        "operator {} needs operands of one type",
                        op.symbol()
                    ))),
                },
                OpKind::And | OpKind::Or => {
                    let (a, b) = (bool_of(l, *op)?, bool_of(r, *op)?);
                    Ok(Value::Bool(if *op == OpKind::And { a && b } else { a || b }))
                }
                OpKind::Not => Err(RuntimeError::TypeMismatch(
                    "! is not a binary operator".to_string(),
                )),
            }
        }
    }
}

/// Runs a program on one input vector.
pub fn evaluate(program: &Program, inputs: &[Value]) -> Result<Value, RuntimeError> {
    if inputs.len() != program.inputs.len() {
        return Err(RuntimeError::WrongArity {
            expected: program.inputs.len(),
            got: inputs.len(),
        });
    }
    let mut env = std::collections::BTreeMap::new();
    for (name, value) in program.inputs.iter().zip(inputs) {
        env.insert(name.clone(), *value);
    }
    for stmt in &program.stmts {
        match stmt {
            Stmt::Let { name, expr, .. } => {
                let value = eval_expr(expr, &env)?;
                env.insert(name.clone(), value);
            }
            Stmt::IfReturn { cond, value, .. } => {
                match eval_expr(cond, &env)? {
                    Value::Bool(true) => return eval_expr(value, &env),
                    Value::Bool(false) => {}
                    Value::Int(_) => {
                        return Err(RuntimeError::TypeMismatch(
                            "if condition must be boolean".to_string(),
                        ))
                    }
                }
            }
            Stmt::Return { expr, .. } => return eval_expr(expr, &env),
        }
    }
    Err(RuntimeError::NoReturn)
}

/// One test case: input values, the expected result, and its id
/// (`t1`-based on file order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub inputs: Vec<Value>,
    pub expected: Value,
    pub line: usize,
}

fn parse_value(word: &str, line: usize) -> Result<Value, ParseError> {
    match word {
        "true" => Ok(Value::Bool(true)),
        "false" => Ok(Value::Bool(false)),
        other => other.parse::<i64>().map(Value::Int).map_err(|_| ParseError {
            line,
            message: format!("expected an integer or boolean, found {other:?}"),
        }),
    }
}

/// Parses a test file: one `inputs... -> expected` case per line,
/// `#` comments and blank lines skipped.
pub fn parse_tests(text: &str) -> Result<Vec<TestCase>, ParseError> {
    let mut cases = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (input_part, expected_part) = line.split_once("->").ok_or_else(|| ParseError {
            line: line_no,
            message: "test case needs the form `inputs... -> expected`".to_string(),
        })?;
        let inputs = input_part
            .split_whitespace()
            .map(|w| parse_value(w, line_no))
            .collect::<Result<Vec<_>, _>>()?;
        let expected_words: Vec<&str> = expected_part.split_whitespace().collect();
        if expected_words.len() != 1 {
            return Err(ParseError {
                line: line_no,
                message: "expected exactly one value after ->".to_string(),
            });
        }
        let expected = parse_value(expected_words[0], line_no)?;
        cases.push(TestCase {
            id: format!("t{}", cases.len() + 1),
            inputs,
            expected,
            line: line_no,
        });
    }
    Ok(cases)
}

/// The verdict for one executed test case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestResult {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs every test; runtime errors fail the test rather than aborting
/// the run.
pub fn run_tests(program: &Program, tests: &[TestCase]) -> Vec<TestResult> {
    tests
        .iter()
        .map(|case| match evaluate(program, &case.inputs) {
            Ok(actual) if actual == case.expected => TestResult {
                id: case.id.clone(),
                passed: true,
                detail: format!("got {actual}"),
            },
            Ok(actual) => TestResult {
                id: case.id.clone(),
                passed: false,
                detail: format!("expected {}, got {actual}", case.expected),
            },
            Err(err) => TestResult {
                id: case.id.clone(),
                passed: false,
                detail: format!("runtime error: {err}"),
            },
        })
        .collect()
}

/// Parses source and tests, then runs the suite.
pub fn run_suite(source: &str, tests_text: &str) -> Result<Vec<TestResult>, ParseError> {
    let program = parse_program(source)?;
    let tests = parse_tests(tests_text)?;
    Ok(run_tests(&program, &tests))
}
