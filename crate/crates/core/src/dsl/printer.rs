//! Canonical source text for a syntax tree.

use std::fmt::Write;

use super::ast::*;

pub fn print_document(doc: &DesDocument) -> String {
    let mut out = String::new();
    for (i, level) in doc.levels.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if !level.implicit {
            match &level.kind {
                LevelKind::Maze { name, fill } => {
                    let _ = writeln!(out, "MAZE: {}, {}", quote(name), char_lit(*fill));
                }
                LevelKind::Room { name } => {
                    let _ = writeln!(out, "LEVEL: {}", quote(name));
                }
            }
        }
        print_block(&level.commands, 0, &mut out);
    }
    out
}

fn print_block(stmts: &[Stmt], depth: usize, out: &mut String) {
    for s in stmts {
        print_stmt(&s.cmd, depth, out);
        out.push('\n');
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_body(body: &[Stmt], depth: usize, out: &mut String) {
    out.push_str(" {\n");
    print_block(body, depth + 1, out);
    indent(depth, out);
    out.push('}');
}

fn print_stmt(cmd: &Command, depth: usize, out: &mut String) {
    if !matches!(cmd, Command::Map { .. }) {
        indent(depth, out);
    }
    print_cmd(cmd, depth, out);
}

fn print_cmd(cmd: &Command, depth: usize, out: &mut String) {
    match cmd {
        Command::Map { rows } => {
            out.push_str("MAP\n");
            for r in rows {
                out.push_str(r);
                out.push('\n');
            }
            out.push_str("ENDMAP");
        }
        Command::Geometry { h, v } => {
            let _ = write!(out, "GEOMETRY: {}, {}", halign(*h), valign(*v));
        }
        Command::Region { rect, lit, rtype } => {
            let _ = write!(
                out,
                "REGION: {}, {}, {}",
                rect_lit(rect),
                lit_flag(*lit),
                quote(rtype)
            );
        }
        Command::Terrain { target, value } => {
            let t = match target {
                Target::Coord(c) => coord(c),
                Target::Selection(s) => selection(s),
            };
            let v = match value {
                TerrainValue::Char(c) => char_lit(*c),
                TerrainValue::Var(v) => var(v),
            };
            let _ = write!(out, "TERRAIN: {t}, {v}");
        }
        Command::ReplaceTerrain {
            rect,
            from,
            to,
            percent,
        } => {
            let _ = write!(
                out,
                "REPLACE_TERRAIN: {}, {}, {}, {}%",
                rect_lit(rect),
                char_lit(*from),
                char_lit(*to),
                int_expr(percent)
            );
        }
        Command::Mazewalk { at, dir } => {
            let _ = write!(out, "MAZEWALK: {}, {}", coord(at), wall(Some(*dir)));
        }
        Command::RandomCorridors => out.push_str("RANDOM_CORRIDORS"),
        Command::Room {
            rtype,
            lit,
            pos,
            align,
            size,
            body,
        } => {
            let a = match align {
                Some((h, v)) => format!("({}, {})", halign(*h), valign(*v)),
                None => "random".into(),
            };
            let _ = write!(
                out,
                "ROOM: {}, {}, {}, {}, {}",
                quote(rtype),
                lit_flag(*lit),
                opt_pair(*pos),
                a,
                opt_pair(*size)
            );
            print_body(body, depth, out);
        }
        Command::Subroom {
            rtype,
            lit,
            pos,
            size,
            body,
        } => {
            let _ = write!(
                out,
                "SUBROOM: {}, {}, {}, {}",
                quote(rtype),
                lit_flag(*lit),
                opt_pair(*pos),
                opt_pair(*size)
            );
            print_body(body, depth, out);
        }
        Command::RoomDoor {
            secret,
            state,
            wall: w,
            pos,
        } => {
            let p = pos.map(|p| p.to_string()).unwrap_or_else(|| "random".into());
            let _ = write!(
                out,
                "ROOMDOOR: {}, {}, {}, {}",
                secret,
                door_state(*state),
                wall(*w),
                p
            );
        }
        Command::Door { state, at } => {
            let _ = write!(out, "DOOR: {}, {}", door_state(*state), coord(at));
        }
        Command::Monster { spec, at, args } => {
            let _ = write!(out, "MONSTER: {}, {}", entity(spec), coord(at));
            for a in args {
                let _ = write!(out, ", {}", word_or_quote(a));
            }
        }
        Command::Object { spec, at, extras } => {
            let _ = write!(out, "OBJECT: {}, {}", entity(spec), coord(at));
            for e in extras {
                match e {
                    ObjectExtra::Montype(a) => {
                        let _ = write!(out, ", montype:{}", atom(a));
                    }
                    ObjectExtra::Quantity(q) => {
                        let _ = write!(out, ", {q}");
                    }
                    ObjectExtra::Flag(f) => {
                        let _ = write!(out, ", {f}");
                    }
                }
            }
        }
        Command::Trap { name, at } => {
            let n = name.as_deref().map(quote).unwrap_or_else(|| "random".into());
            let _ = write!(out, "TRAP: {}, {}", n, coord(at));
        }
        Command::Stair { at, up } => {
            let _ = write!(
                out,
                "STAIR: {}, {}",
                coord(at),
                if *up { "up" } else { "down" }
            );
        }
        Command::Sink { at } => {
            let _ = write!(out, "SINK: {}", coord(at));
        }
        Command::Fountain { at } => {
            let _ = write!(out, "FOUNTAIN: {}", coord(at));
        }
        Command::Altar { at, align, atype } => {
            let _ = write!(out, "ALTAR: {}, {}, {}", coord(at), align, atype);
        }
        Command::Branch { r1, r2 } => {
            let _ = write!(out, "BRANCH: {}, {}", rect_lit(r1), rect_lit(r2));
        }
        Command::Loop { count, body } => {
            let _ = write!(out, "LOOP [{}]", int_expr(count));
            print_body(body, depth, out);
        }
        Command::If {
            cond,
            then_body,
            else_body,
        } => {
            let c = match cond {
                CondExpr::Percent(p) => format!("{}%", int_expr(p)),
                CondExpr::Compare { lhs, op, rhs } => {
                    format!("{} {} {}", int_expr(lhs), cmp_op(*op), int_expr(rhs))
                }
            };
            let _ = write!(out, "IF [{c}]");
            print_body(then_body, depth, out);
            if let Some(e) = else_body {
                out.push_str(" ELSE");
                print_body(e, depth, out);
            }
        }
        Command::Assign { name, value } => {
            let _ = write!(out, "${} = {}", name, value_expr(value));
        }
        Command::Shuffle { name } => {
            let _ = write!(out, "SHUFFLE: ${name}");
        }
        Command::Prob { percent, inner } => {
            let _ = write!(out, "[{percent}%] ");
            print_cmd(&inner.cmd, depth, out);
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

fn char_lit(c: char) -> String {
    format!("'{c}'")
}

fn word_or_quote(s: &str) -> String {
    let is_word = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if is_word {
        s.to_string()
    } else {
        quote(s)
    }
}

fn rect_lit(r: &RectLit) -> String {
    format!("({},{},{},{})", r.x1, r.y1, r.x2, r.y2)
}

fn pair((x, y): (i64, i64)) -> String {
    format!("({x},{y})")
}

fn opt_pair(p: Option<(i64, i64)>) -> String {
    p.map(pair).unwrap_or_else(|| "random".into())
}

fn halign(h: HAlign) -> &'static str {
    match h {
        HAlign::Left => "left",
        HAlign::Center => "center",
        HAlign::Right => "right",
    }
}

fn valign(v: VAlign) -> &'static str {
    match v {
        VAlign::Top => "top",
        VAlign::Center => "center",
        VAlign::Bottom => "bottom",
    }
}

fn lit_flag(l: LitFlag) -> &'static str {
    match l {
        LitFlag::Lit => "lit",
        LitFlag::Unlit => "unlit",
        LitFlag::Random => "random",
    }
}

fn wall(w: Option<Wall>) -> &'static str {
    match w {
        Some(Wall::North) => "north",
        Some(Wall::South) => "south",
        Some(Wall::East) => "east",
        Some(Wall::West) => "west",
        None => "random",
    }
}

fn door_state(d: DoorState) -> &'static str {
    match d {
        DoorState::Open => "open",
        DoorState::Closed => "closed",
        DoorState::Locked => "locked",
        DoorState::NoDoor => "nodoor",
        DoorState::Broken => "broken",
        DoorState::Random => "random",
    }
}

fn cmp_op(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Gt => ">",
        CmpOp::Ge => ">=",
        CmpOp::Eq => "==",
        CmpOp::Ne => "!=",
    }
}

fn var(v: &VarAccess) -> String {
    match &v.index {
        Some(i) => format!("${}[{}]", v.name, int_expr(i)),
        None => format!("${}", v.name),
    }
}

fn atom(a: &Atom) -> String {
    match a {
        Atom::Char(c) => char_lit(*c),
        Atom::Str(s) => quote(s),
        Atom::Var(v) => var(v),
    }
}

fn entity(e: &EntitySpec) -> String {
    match e {
        EntitySpec::Random => "random".into(),
        EntitySpec::Class(a) | EntitySpec::Name(a) => atom(a),
        EntitySpec::ClassName(c, n) => format!("({}, {})", atom(c), atom(n)),
    }
}

fn coord(c: &CoordExpr) -> String {
    match c {
        CoordExpr::Absolute { x, y } => pair((*x, *y)),
        CoordExpr::Random => "random".into(),
        CoordExpr::RndCoord(s) => format!("rndcoord {}", selection(s)),
        CoordExpr::Var(v) => var(v),
    }
}

fn selection(s: &SelectionExpr) -> String {
    match s {
        SelectionExpr::FillRect(r) => format!("fillrect {}", rect_lit(r)),
        SelectionExpr::Rect(r) => format!("rect {}", rect_lit(r)),
        SelectionExpr::Line(a, b) => format!("line {},{}", pair(*a), pair(*b)),
        SelectionExpr::RandLine { p1, p2, roughness } => {
            format!("randline {},{}, {}", pair(*p1), pair(*p2), roughness)
        }
        SelectionExpr::Filter { percent, inner } => {
            format!("filter {}%, {}", percent, selection_atom(inner))
        }
        SelectionExpr::Union(parts) => parts
            .iter()
            .map(selection_atom)
            .collect::<Vec<_>>()
            .join(" | "),
        SelectionExpr::Var(v) => var(v),
    }
}

fn selection_atom(s: &SelectionExpr) -> String {
    match s {
        SelectionExpr::Union(_) | SelectionExpr::Filter { .. } => format!("({})", selection(s)),
        _ => selection(s),
    }
}

fn int_expr(e: &IntExpr) -> String {
    int_prec(e, 0)
}

fn int_prec(e: &IntExpr, min: u8) -> String {
    match e {
        IntExpr::Literal(v) if *v < 0 => format!("({v})"),
        IntExpr::Literal(v) => v.to_string(),
        IntExpr::Dice { n, m } => format!("{n}d{m}"),
        IntExpr::Var(v) => var(v),
        IntExpr::Arith { op, lhs, rhs } => {
            let (p, sym) = match op {
                ArithOp::Add => (1, "+"),
                ArithOp::Sub => (1, "-"),
                ArithOp::Mul => (2, "*"),
                ArithOp::Div => (2, "/"),
            };
            let s = format!("{} {} {}", int_prec(lhs, p), sym, int_prec(rhs, p + 1));
            if p < min {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

fn value_expr(v: &ValueExpr) -> String {
    match v {
        ValueExpr::Int(e) => int_expr(e),
        ValueExpr::Char(c) => char_lit(*c),
        ValueExpr::Str(s) => quote(s),
        ValueExpr::Coord(c) => coord(c),
        ValueExpr::Selection(s) => selection(s),
        ValueExpr::Array(items) => format!(
            "{{ {} }}",
            items.iter().map(value_expr).collect::<Vec<_>>().join(", ")
        ),
        ValueExpr::Var(v) => var(v),
        ValueExpr::Typed { prefix, value } => format!("{}: {}", prefix, value_expr(value)),
    }
}
