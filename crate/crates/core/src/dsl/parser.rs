use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::DslError;

/// Parses des-file source into a document.
pub fn parse_document(source: &str) -> Result<DesDocument, DslError> {
    let tokens = tokenize(source)?;
    let end = end_span(source);
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        end,
    };
    p.document()
}

fn end_span(source: &str) -> SourceSpan {
    let lines: Vec<&str> = source.split('\n').collect();
    let last = lines.last().copied().unwrap_or("");
    SourceSpan::new(lines.len() as u32, last.chars().count() as u32 + 1, 1)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: SourceSpan,
}

const SELECTION_WORDS: [&str; 5] = ["fillrect", "rect", "line", "randline", "filter"];
const VALUE_PREFIXES: [&str; 7] = [
    "monster",
    "object",
    "TERRAIN",
    "terrain",
    "selection",
    "coord",
    "trap",
];

type PResult<T> = Result<T, DslError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn span(&self) -> SourceSpan {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or(self.end)
    }

    fn prev_span(&self) -> SourceSpan {
        if self.pos == 0 {
            self.span()
        } else {
            self.toks[self.pos - 1].span
        }
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn found(&self) -> String {
        self.peek()
            .map(|t| t.describe())
            .unwrap_or_else(|| "end of input".into())
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        Err(DslError::Parse {
            span: self.span(),
            expected: expected.into(),
            found: self.found(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(tok.describe())
        }
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word)
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if self.is_ident(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("string literal"),
        }
    }

    fn char_lit(&mut self) -> PResult<char> {
        match self.peek() {
            Some(Tok::Char(c)) => {
                let c = *c;
                self.pos += 1;
                Ok(c)
            }
            _ => self.error("char literal"),
        }
    }

    fn int_lit(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.error("integer"),
        }
    }

    fn skip_newlines(&mut self) {
        while self.eat(&Tok::Newline) {}
    }

    fn end_of_statement(&mut self) -> PResult<()> {
        match self.peek() {
            None | Some(Tok::RBrace) => Ok(()),
            Some(Tok::Newline) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error("end of line"),
        }
    }

    fn document(&mut self) -> PResult<DesDocument> {
        let mut levels: Vec<LevelDecl> = Vec::new();
        self.skip_newlines();
        while self.peek().is_some() {
            if self.is_ident("MAZE") || self.is_ident("LEVEL") {
                let header_span = self.span();
                let kind = self.header()?;
                if levels.iter().any(|l| l.kind.name() == kind.name()) {
                    return Err(DslError::Parse {
                        span: header_span,
                        expected: "unique level name".into(),
                        found: format!("duplicate {:?}", kind.name()),
                    });
                }
                levels.push(LevelDecl {
                    kind,
                    implicit: false,
                    commands: Vec::new(),
                });
            } else {
                if levels.is_empty() {
                    levels.push(LevelDecl {
                        kind: LevelKind::Maze {
                            name: IMPLICIT_LEVEL.into(),
                            fill: IMPLICIT_FILL,
                        },
                        implicit: true,
                        commands: Vec::new(),
                    });
                }
                let stmt = self.statement()?;
                levels.last_mut().expect("level exists").commands.push(stmt);
            }
            self.skip_newlines();
        }
        if levels.is_empty() {
            return self.error("a level");
        }
        for level in &levels {
            check_map_rules(level)?;
        }
        Ok(DesDocument { levels })
    }

    fn header(&mut self) -> PResult<LevelKind> {
        if self.eat_ident("MAZE") {
            self.expect(Tok::Colon)?;
            let name = self.string()?;
            let fill = if self.eat(&Tok::Comma) {
                self.char_lit()?
            } else {
                ' '
            };
            self.end_of_statement()?;
            Ok(LevelKind::Maze { name, fill })
        } else {
            self.bump();
            self.expect(Tok::Colon)?;
            let name = self.string()?;
            self.end_of_statement()?;
            Ok(LevelKind::Room { name })
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        self.skip_newlines();
        while !self.eat(&Tok::RBrace) {
            if self.peek().is_none() {
                return self.error("`}`");
            }
            body.push(self.statement()?);
            self.skip_newlines();
        }
        Ok(body)
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let cmd = self.command()?;
        let last = self.prev_span();
        let span = if last.line == start.line && last.column >= start.column {
            SourceSpan::new(start.line, start.column, last.column + last.length - start.column)
        } else {
            start
        };
        self.end_of_statement()?;
        Ok(Stmt { span, cmd })
    }

    fn command(&mut self) -> PResult<Command> {
        match self.peek().cloned() {
            Some(Tok::VarSigil(name)) => {
                self.pos += 1;
                self.expect(Tok::Assign)?;
                let value = self.value()?;
                Ok(Command::Assign { name, value })
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let percent = self.int_lit()?;
                self.expect(Tok::Percent)?;
                self.expect(Tok::RBracket)?;
                let inner = self.statement_inline()?;
                Ok(Command::Prob {
                    percent,
                    inner: Box::new(inner),
                })
            }
            Some(Tok::Ident(word)) => {
                let span = self.span();
                self.pos += 1;
                self.keyword_command(&word, span)
            }
            _ => self.error("a command"),
        }
    }

    /// A statement that shares its line with a prefix such as `[10%]`.
    fn statement_inline(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let cmd = self.command()?;
        let last = self.prev_span();
        let len = if last.line == start.line {
            last.column + last.length - start.column
        } else {
            1
        };
        Ok(Stmt {
            span: SourceSpan::new(start.line, start.column, len),
            cmd,
        })
    }

    fn keyword_command(&mut self, word: &str, span: SourceSpan) -> PResult<Command> {
        let needs_colon = !matches!(word, "MAP" | "RANDOM_CORRIDORS" | "LOOP" | "IF");
        let known = matches!(
            word,
            "MAP"
                | "GEOMETRY"
                | "REGION"
                | "TERRAIN"
                | "REPLACE_TERRAIN"
                | "MAZEWALK"
                | "RANDOM_CORRIDORS"
                | "ROOM"
                | "SUBROOM"
                | "ROOMDOOR"
                | "DOOR"
                | "MONSTER"
                | "OBJECT"
                | "TRAP"
                | "STAIR"
                | "SINK"
                | "FOUNTAIN"
                | "ALTAR"
                | "BRANCH"
                | "LOOP"
                | "IF"
                | "SHUFFLE"
        );
        if !known {
            return Err(DslError::UnknownCommand {
                span,
                name: word.to_string(),
            });
        }
        if needs_colon {
            self.expect(Tok::Colon)?;
        }
        Ok(match word {
            "MAP" => {
                let rows = match self.bump() {
                    Some(Token {
                        tok: Tok::MapRows(rows),
                        ..
                    }) => rows,
                    _ => return Err(DslError::UnterminatedMap { span }),
                };
                if !self.eat_ident("ENDMAP") {
                    return Err(DslError::UnterminatedMap { span });
                }
                Command::Map { rows }
            }
            "GEOMETRY" => {
                let h = self.halign()?;
                self.expect(Tok::Comma)?;
                let v = self.valign()?;
                Command::Geometry { h, v }
            }
            "REGION" => {
                let rect = self.rect_lit()?;
                self.expect(Tok::Comma)?;
                let lit = self.lit_flag()?;
                self.expect(Tok::Comma)?;
                let rtype = self.string()?;
                Command::Region { rect, lit, rtype }
            }
            "TERRAIN" => {
                let target = self.target()?;
                self.expect(Tok::Comma)?;
                let value = match self.peek() {
                    Some(Tok::VarSigil(_)) => TerrainValue::Var(self.var_access()?),
                    _ => TerrainValue::Char(self.char_lit()?),
                };
                Command::Terrain { target, value }
            }
            "REPLACE_TERRAIN" => {
                let rect = self.rect_lit()?;
                self.expect(Tok::Comma)?;
                let from = self.char_lit()?;
                self.expect(Tok::Comma)?;
                let to = self.char_lit()?;
                self.expect(Tok::Comma)?;
                let percent = self.int_expr()?;
                self.expect(Tok::Percent)?;
                Command::ReplaceTerrain {
                    rect,
                    from,
                    to,
                    percent,
                }
            }
            "MAZEWALK" => {
                let at = self.coord()?;
                self.expect(Tok::Comma)?;
                let dir = self.wall()?.ok_or_else(|| self.err_here("compass direction"))?;
                Command::Mazewalk { at, dir }
            }
            "RANDOM_CORRIDORS" => Command::RandomCorridors,
            "ROOM" => {
                let rtype = self.string()?;
                self.expect(Tok::Comma)?;
                let lit = self.lit_flag()?;
                self.expect(Tok::Comma)?;
                let pos = self.opt_pair()?;
                self.expect(Tok::Comma)?;
                let align = if self.eat_ident("random") {
                    None
                } else {
                    self.expect(Tok::LParen)?;
                    let h = self.halign()?;
                    self.expect(Tok::Comma)?;
                    let v = self.valign()?;
                    self.expect(Tok::RParen)?;
                    Some((h, v))
                };
                self.expect(Tok::Comma)?;
                let size = self.opt_pair()?;
                let body = self.block()?;
                Command::Room {
                    rtype,
                    lit,
                    pos,
                    align,
                    size,
                    body,
                }
            }
            "SUBROOM" => {
                let rtype = self.string()?;
                self.expect(Tok::Comma)?;
                let lit = self.lit_flag()?;
                self.expect(Tok::Comma)?;
                let pos = self.opt_pair()?;
                self.expect(Tok::Comma)?;
                let size = self.opt_pair()?;
                let body = self.block()?;
                Command::Subroom {
                    rtype,
                    lit,
                    pos,
                    size,
                    body,
                }
            }
            "ROOMDOOR" => {
                let secret = match self.ident("true or false")?.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => {
                        self.pos -= 1;
                        return self.error("true or false");
                    }
                };
                self.expect(Tok::Comma)?;
                let state = self.door_state()?;
                self.expect(Tok::Comma)?;
                let wall = self.wall()?;
                self.expect(Tok::Comma)?;
                let pos = if self.eat_ident("random") {
                    None
                } else {
                    Some(self.int_lit()?)
                };
                Command::RoomDoor {
                    secret,
                    state,
                    wall,
                    pos,
                }
            }
            "DOOR" => {
                let state = self.door_state()?;
                self.expect(Tok::Comma)?;
                let at = self.coord()?;
                Command::Door { state, at }
            }
            "MONSTER" => {
                let spec = self.entity_spec()?;
                self.expect(Tok::Comma)?;
                let at = self.coord()?;
                let mut args = Vec::new();
                while self.eat(&Tok::Comma) {
                    match self.peek().cloned() {
                        Some(Tok::Ident(s)) | Some(Tok::Str(s)) => {
                            self.pos += 1;
                            args.push(s)
                        }
                        _ => return self.error("monster attribute"),
                    }
                }
                Command::Monster { spec, at, args }
            }
            "OBJECT" => {
                let spec = self.entity_spec()?;
                self.expect(Tok::Comma)?;
                let at = self.coord()?;
                let mut extras = Vec::new();
                while self.eat(&Tok::Comma) {
                    if self.eat_ident("montype") {
                        self.expect(Tok::Colon)?;
                        extras.push(ObjectExtra::Montype(self.atom()?));
                    } else if matches!(self.peek(), Some(Tok::Int(_)) | Some(Tok::Minus)) {
                        extras.push(ObjectExtra::Quantity(self.int_lit()?));
                    } else {
                        extras.push(ObjectExtra::Flag(self.ident("object attribute")?));
                    }
                }
                Command::Object { spec, at, extras }
            }
            "TRAP" => {
                let name = if self.eat_ident("random") {
                    None
                } else {
                    Some(self.string()?)
                };
                self.expect(Tok::Comma)?;
                let at = self.coord()?;
                Command::Trap { name, at }
            }
            "STAIR" => {
                let at = self.coord()?;
                self.expect(Tok::Comma)?;
                let up = match self.ident("up or down")?.as_str() {
                    "up" => true,
                    "down" => false,
                    _ => {
                        self.pos -= 1;
                        return self.error("up or down");
                    }
                };
                Command::Stair { at, up }
            }
            "SINK" => Command::Sink { at: self.coord()? },
            "FOUNTAIN" => Command::Fountain { at: self.coord()? },
            "ALTAR" => {
                let at = self.coord()?;
                self.expect(Tok::Comma)?;
                let align = self.ident("altar alignment")?;
                self.expect(Tok::Comma)?;
                let atype = self.ident("altar type")?;
                Command::Altar { at, align, atype }
            }
            "BRANCH" => {
                let r1 = self.rect_lit()?;
                self.expect(Tok::Comma)?;
                let r2 = self.rect_lit()?;
                Command::Branch { r1, r2 }
            }
            "LOOP" => {
                self.expect(Tok::LBracket)?;
                let count = self.int_expr()?;
                self.expect(Tok::RBracket)?;
                let body = self.block()?;
                Command::Loop { count, body }
            }
            "IF" => {
                self.expect(Tok::LBracket)?;
                let lhs = self.int_expr()?;
                let cond = if self.eat(&Tok::Percent) {
                    CondExpr::Percent(lhs)
                } else {
                    let op = match self.peek() {
                        Some(Tok::Lt) => CmpOp::Lt,
                        Some(Tok::Le) => CmpOp::Le,
                        Some(Tok::Gt) => CmpOp::Gt,
                        Some(Tok::Ge) => CmpOp::Ge,
                        Some(Tok::EqEq) => CmpOp::Eq,
                        Some(Tok::Ne) => CmpOp::Ne,
                        _ => return self.error("`%` or comparison operator"),
                    };
                    self.pos += 1;
                    let rhs = self.int_expr()?;
                    CondExpr::Compare { lhs, op, rhs }
                };
                self.expect(Tok::RBracket)?;
                let then_body = self.block()?;
                let save = self.pos;
                self.skip_newlines();
                let else_body = if self.eat_ident("ELSE") {
                    Some(self.block()?)
                } else {
                    self.pos = save;
                    None
                };
                Command::If {
                    cond,
                    then_body,
                    else_body,
                }
            }
            "SHUFFLE" => match self.peek().cloned() {
                Some(Tok::VarSigil(name)) => {
                    self.pos += 1;
                    Command::Shuffle { name }
                }
                _ => return self.error("variable"),
            },
            _ => unreachable!("known keyword list covers all arms"),
        })
    }

    fn err_here(&self, expected: &str) -> DslError {
        DslError::Parse {
            span: self.span(),
            expected: expected.into(),
            found: self.found(),
        }
    }

    fn halign(&mut self) -> PResult<HAlign> {
        let s = self.ident("horizontal alignment")?;
        Ok(match s.as_str() {
            "left" => HAlign::Left,
            "center" => HAlign::Center,
            "right" => HAlign::Right,
            _ => {
                self.pos -= 1;
                return self.error("left, center or right");
            }
        })
    }

    fn valign(&mut self) -> PResult<VAlign> {
        let s = self.ident("vertical alignment")?;
        Ok(match s.as_str() {
            "top" => VAlign::Top,
            "center" => VAlign::Center,
            "bottom" => VAlign::Bottom,
            _ => {
                self.pos -= 1;
                return self.error("top, center or bottom");
            }
        })
    }

    fn lit_flag(&mut self) -> PResult<LitFlag> {
        let s = self.ident("lit, unlit or random")?;
        Ok(match s.as_str() {
            "lit" => LitFlag::Lit,
            "unlit" => LitFlag::Unlit,
            "random" => LitFlag::Random,
            _ => {
                self.pos -= 1;
                return self.error("lit, unlit or random");
            }
        })
    }

    fn door_state(&mut self) -> PResult<DoorState> {
        let s = self.ident("door state")?;
        Ok(match s.as_str() {
            "open" => DoorState::Open,
            "closed" => DoorState::Closed,
            "locked" => DoorState::Locked,
            "nodoor" => DoorState::NoDoor,
            "broken" => DoorState::Broken,
            "random" => DoorState::Random,
            _ => {
                self.pos -= 1;
                return self.error("door state");
            }
        })
    }

    /// A compass wall or `random` (None).
    fn wall(&mut self) -> PResult<Option<Wall>> {
        let s = self.ident("direction")?;
        Ok(Some(match s.as_str() {
            "north" => Wall::North,
            "south" => Wall::South,
            "east" => Wall::East,
            "west" => Wall::West,
            "random" => return Ok(None),
            _ => {
                self.pos -= 1;
                return self.error("north, south, east, west or random");
            }
        }))
    }

    fn pair_lit(&mut self) -> PResult<(i64, i64)> {
        self.expect(Tok::LParen)?;
        let x = self.int_lit()?;
        self.expect(Tok::Comma)?;
        let y = self.int_lit()?;
        self.expect(Tok::RParen)?;
        Ok((x, y))
    }

    fn opt_pair(&mut self) -> PResult<Option<(i64, i64)>> {
        if self.eat_ident("random") {
            Ok(None)
        } else {
            Ok(Some(self.pair_lit()?))
        }
    }

    fn rect_lit(&mut self) -> PResult<RectLit> {
        let span = self.span();
        self.expect(Tok::LParen)?;
        let x1 = self.int_lit()?;
        self.expect(Tok::Comma)?;
        let y1 = self.int_lit()?;
        self.expect(Tok::Comma)?;
        let x2 = self.int_lit()?;
        self.expect(Tok::Comma)?;
        let y2 = self.int_lit()?;
        self.expect(Tok::RParen)?;
        if x1 > x2 || y1 > y2 || x1 < 0 || y1 < 0 {
            return Err(DslError::Parse {
                span,
                expected: "rectangle with 0 <= x1 <= x2 and 0 <= y1 <= y2".into(),
                found: format!("({x1},{y1},{x2},{y2})"),
            });
        }
        Ok(RectLit { x1, y1, x2, y2 })
    }

    fn var_access(&mut self) -> PResult<VarAccess> {
        let name = match self.peek().cloned() {
            Some(Tok::VarSigil(n)) => {
                self.pos += 1;
                n
            }
            _ => return self.error("variable"),
        };
        let index = if self.eat(&Tok::LBracket) {
            let e = self.int_expr()?;
            self.expect(Tok::RBracket)?;
            Some(Box::new(e))
        } else {
            None
        };
        Ok(VarAccess { name, index })
    }

    fn atom(&mut self) -> PResult<Atom> {
        match self.peek().cloned() {
            Some(Tok::Char(c)) => {
                self.pos += 1;
                Ok(Atom::Char(c))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Atom::Str(s))
            }
            Some(Tok::VarSigil(_)) => Ok(Atom::Var(self.var_access()?)),
            _ => self.error("char, string or variable"),
        }
    }

    fn entity_spec(&mut self) -> PResult<EntitySpec> {
        if self.eat_ident("random") {
            return Ok(EntitySpec::Random);
        }
        if self.eat(&Tok::LParen) {
            let class = self.atom()?;
            self.expect(Tok::Comma)?;
            let name = self.atom()?;
            self.expect(Tok::RParen)?;
            return Ok(EntitySpec::ClassName(class, name));
        }
        match self.atom()? {
            Atom::Str(s) => Ok(EntitySpec::Name(Atom::Str(s))),
            other => Ok(EntitySpec::Class(other)),
        }
    }

    fn coord(&mut self) -> PResult<CoordExpr> {
        let span = self.span();
        match self.peek() {
            Some(Tok::LParen) => {
                let (x, y) = self.pair_lit()?;
                if x < 0 || y < 0 {
                    return Err(DslError::Parse {
                        span,
                        expected: "non-negative coordinate".into(),
                        found: format!("({x},{y})"),
                    });
                }
                Ok(CoordExpr::Absolute { x, y })
            }
            Some(Tok::VarSigil(_)) => Ok(CoordExpr::Var(self.var_access()?)),
            Some(Tok::Ident(s)) if s == "random" => {
                self.pos += 1;
                Ok(CoordExpr::Random)
            }
            Some(Tok::Ident(s)) if s == "rndcoord" => {
                self.pos += 1;
                Ok(CoordExpr::RndCoord(Box::new(self.selection()?)))
            }
            _ => self.error("coordinate"),
        }
    }

    fn target(&mut self) -> PResult<Target> {
        match self.peek() {
            Some(Tok::Ident(s)) if SELECTION_WORDS.contains(&s.as_str()) => {
                Ok(Target::Selection(self.selection()?))
            }
            Some(Tok::VarSigil(_)) => Ok(Target::Selection(self.selection()?)),
            _ => Ok(Target::Coord(self.coord()?)),
        }
    }

    fn selection(&mut self) -> PResult<SelectionExpr> {
        let first = self.selection_atom()?;
        if self.peek() != Some(&Tok::Pipe) {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Pipe) {
            parts.push(self.selection_atom()?);
        }
        Ok(SelectionExpr::Union(parts))
    }

    fn selection_atom(&mut self) -> PResult<SelectionExpr> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.selection()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::VarSigil(_)) => Ok(SelectionExpr::Var(self.var_access()?)),
            Some(Tok::Ident(word)) => {
                self.pos += 1;
                match word.as_str() {
                    "fillrect" => Ok(SelectionExpr::FillRect(self.rect_lit()?)),
                    "rect" => Ok(SelectionExpr::Rect(self.rect_lit()?)),
                    "line" => {
                        let p1 = self.pair_lit()?;
                        self.expect(Tok::Comma)?;
                        let p2 = self.pair_lit()?;
                        Ok(SelectionExpr::Line(p1, p2))
                    }
                    "randline" => {
                        let p1 = self.pair_lit()?;
                        self.expect(Tok::Comma)?;
                        let p2 = self.pair_lit()?;
                        self.expect(Tok::Comma)?;
                        let span = self.span();
                        let roughness = self.int_lit()?;
                        if roughness < 0 {
                            return Err(DslError::Parse {
                                span,
                                expected: "non-negative roughness".into(),
                                found: roughness.to_string(),
                            });
                        }
                        Ok(SelectionExpr::RandLine { p1, p2, roughness })
                    }
                    "filter" => {
                        let paren = self.eat(&Tok::LParen);
                        let percent = self.int_lit()?;
                        self.expect(Tok::Percent)?;
                        self.expect(Tok::Comma)?;
                        let inner = if paren {
                            let s = self.selection()?;
                            self.expect(Tok::RParen)?;
                            s
                        } else {
                            self.selection_atom()?
                        };
                        Ok(SelectionExpr::Filter {
                            percent,
                            inner: Box::new(inner),
                        })
                    }
                    _ => {
                        self.pos -= 1;
                        self.error("selection")
                    }
                }
            }
            _ => self.error("selection"),
        }
    }

    fn int_expr(&mut self) -> PResult<IntExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => ArithOp::Add,
                Some(Tok::Minus) => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = IntExpr::Arith {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> PResult<IntExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => ArithOp::Mul,
                Some(Tok::Slash) => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = IntExpr::Arith {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary(&mut self) -> PResult<IntExpr> {
        if self.eat(&Tok::Minus) {
            return Ok(match self.unary()? {
                IntExpr::Literal(v) => IntExpr::Literal(-v),
                e => IntExpr::Arith {
                    op: ArithOp::Sub,
                    lhs: Box::new(IntExpr::Literal(0)),
                    rhs: Box::new(e),
                },
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<IntExpr> {
        let span = self.span();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(IntExpr::Literal(v))
            }
            Some(Tok::Dice(n, m)) => {
                if n == 0 || m == 0 {
                    return Err(DslError::Parse {
                        span,
                        expected: "dice with N >= 1 and M >= 1".into(),
                        found: format!("{n}d{m}"),
                    });
                }
                self.pos += 1;
                Ok(IntExpr::Dice { n, m })
            }
            Some(Tok::VarSigil(_)) => Ok(IntExpr::Var(self.var_access()?)),
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.int_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.error("integer expression"),
        }
    }

    fn value(&mut self) -> PResult<ValueExpr> {
        match self.peek().cloned() {
            Some(Tok::Ident(word))
                if VALUE_PREFIXES.contains(&word.as_str()) && self.peek_at(1) == Some(&Tok::Colon) =>
            {
                self.pos += 2;
                let value = self.value()?;
                Ok(ValueExpr::Typed {
                    prefix: word,
                    value: Box::new(value),
                })
            }
            Some(Tok::Ident(word)) if word == "random" || word == "rndcoord" => {
                Ok(ValueExpr::Coord(self.coord()?))
            }
            Some(Tok::Ident(word)) if SELECTION_WORDS.contains(&word.as_str()) => {
                Ok(ValueExpr::Selection(self.selection()?))
            }
            Some(Tok::LBrace) => {
                self.pos += 1;
                let mut items = Vec::new();
                self.skip_newlines();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        items.push(self.value()?);
                        self.skip_newlines();
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                        self.skip_newlines();
                    }
                }
                Ok(ValueExpr::Array(items))
            }
            Some(Tok::Char(c)) => {
                self.pos += 1;
                Ok(ValueExpr::Char(c))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(ValueExpr::Str(s))
            }
            Some(Tok::LParen)
                if matches!(self.peek_at(1), Some(Tok::Int(_)))
                    && self.peek_at(2) == Some(&Tok::Comma) =>
            {
                Ok(ValueExpr::Coord(self.coord()?))
            }
            Some(Tok::VarSigil(_)) if self.var_then_pipe() => {
                Ok(ValueExpr::Selection(self.selection()?))
            }
            _ => match self.int_expr()? {
                IntExpr::Var(v) => Ok(ValueExpr::Var(v)),
                e => Ok(ValueExpr::Int(e)),
            },
        }
    }

    /// True when a variable access at the cursor is followed by `|`.
    fn var_then_pipe(&mut self) -> bool {
        let save = self.pos;
        let ok = self.var_access().is_ok() && self.peek() == Some(&Tok::Pipe);
        self.pos = save;
        ok
    }
}

fn check_map_rules(level: &LevelDecl) -> PResult<()> {
    let mut maps = Vec::new();
    walk_stmts(&level.commands, &mut |s| {
        if matches!(s.cmd, Command::Map { .. }) {
            maps.push(s.span);
        }
    });
    match level.kind {
        LevelKind::Room { .. } if !maps.is_empty() => Err(DslError::Parse {
            span: maps[0],
            expected: "room commands (MAP is not allowed in a LEVEL)".into(),
            found: "`MAP`".into(),
        }),
        LevelKind::Maze { .. } if maps.len() > 1 => Err(DslError::Parse {
            span: maps[1],
            expected: "at most one MAP per level".into(),
            found: "second `MAP`".into(),
        }),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(stmts: &[Stmt]) -> Vec<&'static str> {
        stmts.iter().map(|s| s.cmd.keyword()).collect()
    }

    #[test]
    fn minimal_map() {
        let doc = parse_document("MAZE:\"m\",' '\nMAP\n..\nENDMAP\n").unwrap();
        let l = &doc.levels[0];
        assert_eq!(
            l.commands[0].cmd,
            Command::Map {
                rows: vec!["..".into()]
            }
        );
    }

    #[test]
    fn unterminated_map() {
        let err = parse_document("MAZE:\"m\",' '\nMAP\n..\n").unwrap_err();
        assert!(matches!(err, DslError::UnterminatedMap { .. }));
    }

    #[test]
    fn unknown_command() {
        let err = parse_document("ENGRAVING: (1,1), \"x\"").unwrap_err();
        match err {
            DslError::UnknownCommand { span, name } => {
                assert_eq!(name, "ENGRAVING");
                assert_eq!((span.line, span.column), (1, 1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dice_binds_tighter_than_minus() {
        let doc = parse_document("$i = 1d4 - 1").unwrap();
        assert_eq!(
            doc.levels[0].commands[0].cmd,
            Command::Assign {
                name: "i".into(),
                value: ValueExpr::Int(IntExpr::Arith {
                    op: ArithOp::Sub,
                    lhs: Box::new(IntExpr::Dice { n: 1, m: 4 }),
                    rhs: Box::new(IntExpr::Literal(1)),
                })
            }
        );
    }

    #[test]
    fn if_else_forms() {
        let src = "IF[50%] {\nMONSTER: 'F', (1,1)\n} ELSE {\n# note\nOBJECT: '%', (1,1)\n}\nIF[$v < 15] {\nMONSTER: 'F', (1,1)\n}\n";
        let doc = parse_document(src).unwrap();
        let cmds = &doc.levels[0].commands;
        assert_eq!(kinds(cmds), vec!["IF", "IF"]);
        match &cmds[0].cmd {
            Command::If {
                cond: CondExpr::Percent(IntExpr::Literal(50)),
                then_body,
                else_body: Some(e),
            } => {
                assert_eq!(kinds(then_body), vec!["MONSTER"]);
                assert_eq!(kinds(e), vec!["OBJECT"]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            &cmds[1].cmd,
            Command::If {
                cond: CondExpr::Compare { op: CmpOp::Lt, .. },
                else_body: None,
                ..
            }
        ));
    }

    #[test]
    fn array_index_entity() {
        let src = "$mon_letters = { 'A', 'L', 'V', 'H' }\n$mon_names = { \"Archon\", \"arch-lich\", \"vampire lord\", \"minotaur\" }\n$mon_index = 1d4 - 1\nMONSTER:($mon_letters[$mon_index],$mon_names[$mon_index]),(10,18)\n";
        let doc = parse_document(src).unwrap();
        let cmds = &doc.levels[0].commands;
        assert_eq!(kinds(cmds), vec!["=", "=", "=", "MONSTER"]);
        assert!(matches!(
            &cmds[3].cmd,
            Command::Monster {
                spec: EntitySpec::ClassName(Atom::Var(_), Atom::Var(_)),
                at: CoordExpr::Absolute { x: 10, y: 18 },
                ..
            }
        ));
    }

    #[test]
    fn selection_forms() {
        let src = "$s = selection: fillrect (5,5,8,8)\n$c = rndcoord $s\nTERRAIN: filter 50%, fillrect (0,0,3,3) | line (0,0),(3,3), 'T'\n";
        let doc = parse_document(src).unwrap();
        let cmds = &doc.levels[0].commands;
        assert!(matches!(
            &cmds[0].cmd,
            Command::Assign { value: ValueExpr::Typed { prefix, .. }, .. } if prefix == "selection"
        ));
        assert!(matches!(
            &cmds[1].cmd,
            Command::Assign {
                value: ValueExpr::Coord(CoordExpr::RndCoord(_)),
                ..
            }
        ));
        assert!(matches!(
            &cmds[2].cmd,
            Command::Terrain {
                target: Target::Selection(SelectionExpr::Union(_)),
                value: TerrainValue::Char('T')
            }
        ));
    }

    #[test]
    fn prob_prefix() {
        let doc = parse_document("[10%] OBJECT:'$',random,100").unwrap();
        match &doc.levels[0].commands[0].cmd {
            Command::Prob { percent: 10, inner } => match &inner.cmd {
                Command::Object { extras, .. } => {
                    assert_eq!(extras, &vec![ObjectExtra::Quantity(100)])
                }
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn map_forbidden_in_room_level() {
        let err = parse_document("LEVEL:\"x\"\nMAP\n.\nENDMAP\n").unwrap_err();
        assert!(matches!(err, DslError::Parse { .. }));
    }

    #[test]
    fn two_maps_rejected() {
        let err = parse_document("MAZE:\"x\",' '\nMAP\n.\nENDMAP\nMAP\n.\nENDMAP\n").unwrap_err();
        assert!(matches!(err, DslError::Parse { .. }));
    }

    #[test]
    fn duplicate_level_names_rejected() {
        let err = parse_document("MAZE:\"x\",' '\nMAZE:\"x\",' '\n").unwrap_err();
        assert!(matches!(err, DslError::Parse { .. }));
    }

    #[test]
    fn empty_document_rejected() {
        assert!(parse_document("").is_err());
        assert!(parse_document("# just a comment\n").is_err());
    }

    #[test]
    fn parse_error_reports_expected_and_found() {
        let err = parse_document("STAIR: (1,1), sideways").unwrap_err();
        match err {
            DslError::Parse {
                span,
                expected,
                found,
            } => {
                assert_eq!(span.column, 15);
                assert_eq!(expected, "up or down");
                assert_eq!(found, "`sideways`");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_dice_rejected() {
        assert!(parse_document("$x = 0d6").is_err());
    }

    #[test]
    fn inverted_rect_rejected() {
        assert!(parse_document("REGION:(5,0,1,1),lit,\"ordinary\"").is_err());
    }
}
