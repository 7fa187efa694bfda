//! DOT export checked by a small recursive-descent parser for the Graphviz
//! language (graph/digraph, node, edge and attribute statements).

mod common;

use advx::autodiff::Matrix;
use advx::evaluation::export_dot;
use advx::graph::{apply_mask, topk_edges, Graph, WeightMatrix};
use common::{random_edges, rng};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Sym(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match cs.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('\\') => {
                        s.push(*cs.get(i + 1).ok_or("dangling escape")?);
                        i += 2;
                    }
                    Some('"') => break,
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(Tok::Id(s));
        } else if c == '-' && matches!(cs.get(i + 1), Some('-') | Some('>')) {
            out.push(Tok::Sym(if cs[i + 1] == '-' { "--" } else { "->" }));
            i += 2;
        } else if let Some(sym) = ["{", "}", "[", "]", "=", ";", ","].iter().find(|s| s.starts_with(c)) {
            out.push(Tok::Sym(sym));
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_' || cs[i] == '.') {
                i += 1;
            }
            i += usize::from(i == start);
            let word: String = cs[start..i].iter().collect();
            let numeral = word.parse::<f64>().is_ok();
            let ident = word.chars().next().is_some_and(|f| f.is_ascii_alphabetic() || f == '_')
                && word.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
            if !(numeral || ident) {
                return Err(format!("bad identifier `{word}`"));
            }
            out.push(Tok::Id(word));
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

type EdgeStmt = (String, String, Vec<(String, String)>);

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    edge_op: &'static str,
    /// (tail, head, attributes) of every edge statement.
    edges: Vec<EdgeStmt>,
    nodes: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn sym(&mut self, s: &str) -> Result<(), String> {
        match self.toks.get(self.pos) {
            Some(Tok::Sym(t)) if *t == s => {
                self.pos += 1;
                Ok(())
            }
            other => Err(format!("expected `{s}`, found {other:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.toks.get(self.pos) {
            Some(Tok::Id(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            other => Err(format!("expected identifier, found {other:?}")),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn graph(&mut self) -> Result<(), String> {
        let mut kw = self.id()?;
        if kw == "strict" {
            kw = self.id()?;
        }
        self.edge_op = match kw.as_str() {
            "graph" => "--",
            "digraph" => "->",
            _ => return Err(format!("expected graph or digraph, found `{kw}`")),
        };
        if !self.is_sym("{") {
            self.id()?;
        }
        self.sym("{")?;
        while !self.is_sym("}") {
            self.stmt()?;
            if self.is_sym(";") {
                self.pos += 1;
            }
        }
        self.sym("}")?;
        if self.pos != self.toks.len() {
            return Err("trailing tokens after graph".into());
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<(), String> {
        let first = self.id()?;
        if matches!(first.as_str(), "graph" | "node" | "edge") {
            self.attr_list()?;
            return Ok(());
        }
        if self.is_sym("=") {
            self.pos += 1;
            self.id()?;
            return Ok(());
        }
        if self.is_sym("--") || self.is_sym("->") {
            let mut tail = first;
            while self.is_sym("--") || self.is_sym("->") {
                let op = self.edge_op;
                self.sym(op)?;
                let head = self.id()?;
                self.edges.push((tail, head.clone(), Vec::new()));
                tail = head;
            }
            if self.is_sym("[") {
                let attrs = self.attr_list()?;
                self.edges.last_mut().unwrap().2 = attrs;
            }
            return Ok(());
        }
        if self.is_sym("[") {
            self.attr_list()?;
        }
        self.nodes.push(first);
        Ok(())
    }

    fn attr_list(&mut self) -> Result<Vec<(String, String)>, String> {
        let mut attrs = Vec::new();
        loop {
            self.sym("[")?;
            while !self.is_sym("]") {
                let k = self.id()?;
                self.sym("=")?;
                attrs.push((k, self.id()?));
                if self.is_sym(",") || self.is_sym(";") {
                    self.pos += 1;
                }
            }
            self.sym("]")?;
            if !self.is_sym("[") {
                return Ok(attrs);
            }
        }
    }
}

fn parse(src: &str) -> Result<Parser, String> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        edge_op: "--",
        edges: Vec::new(),
        nodes: Vec::new(),
    };
    p.graph()?;
    Ok(p)
}

fn bold_edges(p: &Parser) -> Vec<(usize, usize)> {
    let num = |s: &str| s.trim_start_matches('n').parse::<usize>().unwrap();
    p.edges
        .iter()
        .filter(|e| e.2.iter().any(|(k, v)| k == "style" && v == "bold"))
        .map(|e| (num(&e.0), num(&e.1)))
        .collect()
}

#[test]
fn validator_rejects_malformed_documents() {
    assert!(parse("graph g { a -- b; }").is_ok());
    assert!(parse("digraph { a -> b [color=red] }").is_ok());
    assert!(parse("graph g { a -- b; ").is_err());
    assert!(parse("graph g { a -> b }").is_err());
    assert!(parse("graph g { a [color=] }").is_err());
    assert!(parse("graph g { \"open }").is_err());
    assert!(parse("tree g { }").is_err());
}

fn random_case(seed: u64) -> (Graph<f64>, WeightMatrix<f64>, Vec<usize>) {
    let mut r = rng(seed);
    let n = r.gen_range(2..15);
    let g = Graph::new(n, random_edges(&mut r, n, 0.35), Matrix::filled(n, 1, 1.0)).unwrap();
    let w: Vec<f64> = (0..g.edge_count()).map(|_| r.gen_range(0.0..1.0)).collect();
    let preds = (0..n).map(|_| r.gen_range(0..4)).collect();
    (g.clone(), WeightMatrix::from_edge_weights(&g, &w).unwrap(), preds)
}

#[test]
fn exports_parse_and_bold_exactly_the_explanation() {
    for seed in 0..100 {
        let (g, w, preds) = random_case(seed);
        let k = 1 + seed as usize % 8;
        let target = Some(seed as usize % g.node_count());
        let exp = topk_edges(&apply_mask(&g, &w).unwrap(), k).unwrap().with_target(target);
        let dot = export_dot(&g, &exp, &preds, None).unwrap();
        let p = parse(&dot).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{dot}"));
        assert_eq!(bold_edges(&p), exp.edge_set(), "seed {seed}");
        assert_eq!(p.edges.len(), g.edge_count());
        let expect: Vec<String> = (0..g.node_count()).map(|v| format!("n{v}")).collect();
        assert_eq!(p.nodes, expect, "nodes in ascending order");
        assert_eq!(export_dot(&g, &exp, &preds, None).unwrap(), dot);
    }
}

#[test]
fn six_edge_explanation_has_six_bold_edges() {
    let edges: Vec<(usize, usize)> = (0..9).map(|i| (i, (i + 1) % 9)).chain([(0, 4), (2, 6)]).collect();
    let g = Graph::new(9, edges, Matrix::filled(9, 1, 1.0)).unwrap();
    let w: Vec<f64> = (0..g.edge_count()).map(|i| i as f64 / 20.0).collect();
    let exp = topk_edges(&apply_mask(&g, &WeightMatrix::from_edge_weights(&g, &w).unwrap()).unwrap(), 6).unwrap();
    let dot = export_dot(&g, &exp, &[0; 9], None).unwrap();
    assert_eq!(bold_edges(&parse(&dot).unwrap()).len(), 6);
}

#[test]
fn empty_explanation_draws_every_edge_thin() {
    let (g, _, preds) = random_case(3);
    let exp = apply_mask(&g, &WeightMatrix::zeros(g.node_count())).unwrap();
    let dot = export_dot(&g, &exp, &preds, None).unwrap();
    let p = parse(&dot).unwrap();
    assert!(bold_edges(&p).is_empty());
    assert_eq!(p.edges.len(), g.edge_count());
}

#[test]
fn global_labels_rename_nodes() {
    let g = Graph::new(3, [(0, 1), (1, 2)], Matrix::filled(3, 1, 1.0)).unwrap();
    let w = WeightMatrix::from_edge_weights(&g, &[1.0, 0.5]).unwrap();
    let exp = topk_edges(&apply_mask(&g, &w).unwrap(), 1).unwrap().with_target(Some(1));
    let dot = export_dot(&g, &exp, &[0, 1, 0], Some(&[10, 42, 77])).unwrap();
    let p = parse(&dot).unwrap();
    assert_eq!(p.nodes, ["n10", "n42", "n77"]);
    assert_eq!(bold_edges(&p), [(10, 42)]);
}
