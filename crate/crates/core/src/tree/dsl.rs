//! Line-oriented text format for staged trees.
//!
//! ```text
//! # comment
//! stage c : t1 t2 ;
//! vertex r stage c children a l3 ;
//! vertex a stage c children l1 l2 ;
//! vertex l1 leaf ;
//! root r ;
//! ```

use std::collections::HashMap;
use std::fmt::Write;

use super::{Node, Stage, StagedTree, TreeError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Colon,
    Semi,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

fn lex(src: &str) -> Result<Vec<Token>, TreeError> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c == ':' {
                out.push(Token { tok: Tok::Colon, line: li + 1, col });
                i += 1;
            } else if c == ';' {
                out.push(Token { tok: Tok::Semi, line: li + 1, col });
                i += 1;
            } else if is_ident_char(c) {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: li + 1, col });
            } else {
                return Err(TreeError::Syntax { line: li + 1, col, msg: format!("unexpected character `{c}`") });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.col))
    }

    fn err(&self, msg: impl Into<String>) -> TreeError {
        let (line, col) = self.here();
        TreeError::Syntax { line, col, msg: msg.into() }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize), TreeError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), line, col }) => {
                let r = (s.clone(), *line, *col);
                self.pos += 1;
                Ok(r)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), TreeError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), .. }) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`"))),
        }
    }

    fn punct(&mut self, p: Tok, shown: &str) -> Result<(), TreeError> {
        match self.peek() {
            Some(t) if t.tok == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{shown}`"))),
        }
    }

    /// Identifiers up to the next `;`, which is consumed.
    fn idents_until_semi(&mut self, what: &str) -> Result<Vec<(String, usize, usize)>, TreeError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Some(Token { tok: Tok::Semi, .. }) => {
                    self.pos += 1;
                    break;
                }
                Some(Token { tok: Tok::Ident(_), .. }) => out.push(self.ident(what)?),
                _ => return Err(self.err(format!("expected {what} or `;`"))),
            }
        }
        if out.is_empty() {
            return Err(self.err(format!("expected at least one {what}")));
        }
        Ok(out)
    }
}

enum Decl {
    Leaf,
    Internal { stage: (String, usize, usize), children: Vec<(String, usize, usize)> },
}

/// Parses and validates a tree.
pub fn parse_tree(src: &str) -> Result<StagedTree, TreeError> {
    let toks = lex(src)?;
    let nlines = src.lines().count().max(1);
    let end = (nlines, src.lines().last().map_or(0, |l| l.chars().count()) + 1);
    if toks.is_empty() {
        return Err(TreeError::Syntax { line: 1, col: 1, msg: "empty input".into() });
    }
    let mut p = Parser { toks, pos: 0, end };
    let mut stages: Vec<Stage> = Vec::new();
    let mut stage_pos: HashMap<String, usize> = HashMap::new();
    let mut vertices: Vec<(String, Decl)> = Vec::new();
    let mut vertex_pos: HashMap<String, usize> = HashMap::new();
    let mut root: Option<(String, usize, usize)> = None;

    while p.peek().is_some() {
        let (kw, line, col) = p.ident("a declaration")?;
        match kw.as_str() {
            "stage" => {
                let (id, l, c) = p.ident("stage id")?;
                p.punct(Tok::Colon, ":")?;
                let labels = p.idents_until_semi("label")?;
                if stage_pos.contains_key(&id) {
                    return Err(TreeError::At { line: l, col: c, msg: format!("duplicate stage `{id}`") });
                }
                stage_pos.insert(id.clone(), stages.len());
                stages.push(Stage::new(id, labels.into_iter().map(|x| x.0)));
            }
            "vertex" => {
                let (id, l, c) = p.ident("vertex id")?;
                let decl = match p.peek() {
                    Some(Token { tok: Tok::Ident(s), .. }) if s == "leaf" => {
                        p.pos += 1;
                        p.punct(Tok::Semi, ";")?;
                        Decl::Leaf
                    }
                    _ => {
                        p.keyword("stage")?;
                        let stage = p.ident("stage id")?;
                        p.keyword("children")?;
                        let children = p.idents_until_semi("vertex id")?;
                        Decl::Internal { stage, children }
                    }
                };
                if vertex_pos.contains_key(&id) {
                    return Err(TreeError::At { line: l, col: c, msg: format!("duplicate vertex `{id}`") });
                }
                vertex_pos.insert(id.clone(), vertices.len());
                vertices.push((id, decl));
            }
            "root" => {
                let r = p.ident("vertex id")?;
                p.punct(Tok::Semi, ";")?;
                if root.is_some() {
                    return Err(TreeError::At { line: r.1, col: r.2, msg: "more than one root declared".into() });
                }
                root = Some(r);
            }
            _ => {
                return Err(TreeError::Syntax {
                    line,
                    col,
                    msg: format!("unknown declaration `{kw}`; expected `stage`, `vertex` or `root`"),
                })
            }
        }
    }

    let (root_id, rl, rc) = root.ok_or(TreeError::NoRoot)?;
    let Some(&root_idx) = vertex_pos.get(&root_id) else {
        return Err(TreeError::At { line: rl, col: rc, msg: format!("undefined vertex `{root_id}`") });
    };
    // references and parent counts
    let mut parents = vec![0usize; vertices.len()];
    for (_, d) in &vertices {
        if let Decl::Internal { stage, children } = d {
            if !stage_pos.contains_key(&stage.0) {
                return Err(TreeError::At {
                    line: stage.1,
                    col: stage.2,
                    msg: format!("undefined stage `{}`", stage.0),
                });
            }
            for (c, l, col) in children {
                match vertex_pos.get(c) {
                    Some(&i) => parents[i] += 1,
                    None => {
                        return Err(TreeError::At { line: *l, col: *col, msg: format!("undefined vertex `{c}`") })
                    }
                }
            }
        }
    }
    if let Some(i) = parents.iter().position(|&k| k > 1) {
        return Err(TreeError::MultipleParents(vertices[i].0.clone()));
    }

    let mut on_stack = vec![false; vertices.len()];
    let mut seen = vec![false; vertices.len()];
    fn build(
        i: usize,
        vertices: &[(String, Decl)],
        vertex_pos: &HashMap<String, usize>,
        stage_pos: &HashMap<String, usize>,
        on_stack: &mut [bool],
        seen: &mut [bool],
    ) -> Result<Node, TreeError> {
        if on_stack[i] {
            return Err(TreeError::Cycle(vertices[i].0.clone()));
        }
        on_stack[i] = true;
        seen[i] = true;
        let (name, decl) = &vertices[i];
        let node = match decl {
            Decl::Leaf => Node::leaf().named(name.clone()),
            Decl::Internal { stage, children } => {
                let mut cs = Vec::new();
                for (c, _, _) in children {
                    cs.push(build(vertex_pos[c], vertices, vertex_pos, stage_pos, on_stack, seen)?);
                }
                Node::internal(stage_pos[&stage.0], cs).named(name.clone())
            }
        };
        on_stack[i] = false;
        Ok(node)
    }
    let node = build(root_idx, &vertices, &vertex_pos, &stage_pos, &mut on_stack, &mut seen)?;
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(TreeError::Unreachable(vertices[i].0.clone()));
    }
    StagedTree::build(stages, node)
}

/// Canonical text: stages sorted by id, the root, then vertices depth-first.
pub fn serialize_tree(t: &StagedTree) -> String {
    let mut out = String::new();
    for s in t.stages() {
        writeln!(out, "stage {} : {} ;", s.id, s.labels.join(" ")).unwrap();
    }
    writeln!(out, "root {} ;", t.name(t.root())).unwrap();
    for v in 0..t.vertex_count() {
        match t.stage_of(v) {
            None => writeln!(out, "vertex {} leaf ;", t.name(v)).unwrap(),
            Some(c) => {
                let kids: Vec<&str> = t.children(v).iter().map(|&k| t.name(k)).collect();
                writeln!(out, "vertex {} stage {} children {} ;", t.name(v), t.stage(c).id, kids.join(" "))
                    .unwrap()
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const COIN: &str = "# biased coin\nstage c : t1 t2 ;\nvertex r stage c children a l3 ;\nvertex a stage c children l1 l2 ;\nvertex l1 leaf ;\nvertex l2 leaf ;\nvertex l3 leaf ;\nroot r ;\n";

    #[test]
    fn parses_and_round_trips() {
        let t = parse_tree(COIN).unwrap();
        assert_eq!(t.n_leaves(), 3);
        assert_eq!(t.depth(), 2);
        let s = serialize_tree(&t);
        let t2 = parse_tree(&s).unwrap();
        assert_eq!(t, t2);
        assert_eq!(serialize_tree(&t2), s);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_tree("stage c : a b ;\nvertex r stage c children x y\n").unwrap_err();
        assert!(matches!(e, TreeError::Syntax { line: 2, .. }), "{e}");
        let e = parse_tree("stage c : a b ;\n  vertex r $").unwrap_err();
        assert_eq!(e, TreeError::Syntax { line: 2, col: 12, msg: "unexpected character `$`".into() });
        assert!(matches!(parse_tree(""), Err(TreeError::Syntax { line: 1, col: 1, .. })));
    }

    #[test]
    fn semantic_errors() {
        let dup = "stage a : x y ;\nstage b : y w ;\nvertex r stage a children l1 l2 ;\nvertex l1 leaf ;\nvertex l2 leaf ;\nroot r ;";
        assert!(matches!(parse_tree(dup), Err(TreeError::DuplicateLabel { .. })));
        let leaf_root = "stage a : x ;\nvertex r leaf ;\nroot r ;";
        assert_eq!(parse_tree(leaf_root), Err(TreeError::RootIsLeaf));
        let cyc = "stage a : x ;\nvertex r stage a children s ;\nvertex s stage a children r ;\nroot r ;";
        assert!(matches!(parse_tree(cyc), Err(TreeError::MultipleParents(_)) | Err(TreeError::Cycle(_))));
        let unreach = "stage a : x ;\nvertex r stage a children l ;\nvertex l leaf ;\nvertex m leaf ;\nroot r ;";
        assert_eq!(parse_tree(unreach), Err(TreeError::Unreachable("m".into())));
        let undef = "stage a : x ;\nvertex r stage b children l ;\nvertex l leaf ;\nroot r ;";
        assert!(matches!(parse_tree(undef), Err(TreeError::At { line: 2, col: 16, .. })));
        let arity = "stage a : x y ;\nvertex r stage a children l ;\nvertex l leaf ;\nroot r ;";
        assert!(matches!(parse_tree(arity), Err(TreeError::Arity { .. })));
        let z = "stage a : z y ;\nvertex r stage a children l m ;\nvertex l leaf ;\nvertex m leaf ;\nroot r ;";
        assert!(matches!(parse_tree(z), Err(TreeError::ReservedLabel { .. })));
    }
}
