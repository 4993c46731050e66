//! Pipeline language.
//!
//! ```text
//! expr   := wterm ('^' wterm)*          choice
//! wterm  := term (':' num)?             optional branch weight
//! term   := factor ('|' factor)*        cascade
//! factor := IDENT '(' [arg {',' arg}] ')' | 'identity' ['(' ')'] | '(' expr ')'
//! arg    := IDENT '=' dist
//! dist   := 'U(' num ',' num ')' | 'B(' num ')' | 'C(' num {',' num} ')' | num
//! ```
//!
//! Note the operator assignment: `^` builds a **choice**, `|` builds a
//! **cascade** (sequential composition), even though `|` reads like "or".
//! `|` binds tighter than `^`, so `a() | b() ^ c()` is a choice between the
//! cascade `a() | b()` and `c()`. A weight follows the branch it belongs to:
//! `hflip():3 ^ identity:1`. When any branch of a choice carries a weight,
//! unweighted branches count as weight 1. `#` comments run to end of line.

mod lexer;
mod parser;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{AugNode, DistSpec};
use crate::rng::derive;

/// Maximum nesting of parenthesized groups.
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{col}: unknown operation '{name}'")]
    UnknownOp { line: usize, col: usize, name: String },
    #[error("{line}:{col}: '{op}' has no argument '{name}'")]
    UnknownArg {
        line: usize,
        col: usize,
        op: String,
        name: String,
    },
    #[error("{line}:{col}: argument '{name}' given twice")]
    DuplicateArg { line: usize, col: usize, name: String },
    #[error("{line}:{col}: argument '{name}' of '{op}': {message}")]
    OutOfBounds {
        line: usize,
        col: usize,
        op: String,
        name: String,
        message: String,
    },
    #[error("{line}:{col}: invalid distribution: {message}")]
    InvalidDist {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: groups nested deeper than {limit}")]
    TooDeep { line: usize, col: usize, limit: usize },
}

impl DslError {
    pub fn line_col(&self) -> (usize, usize) {
        match self {
            DslError::Syntax { line, col, .. }
            | DslError::UnknownOp { line, col, .. }
            | DslError::UnknownArg { line, col, .. }
            | DslError::DuplicateArg { line, col, .. }
            | DslError::OutOfBounds { line, col, .. }
            | DslError::InvalidDist { line, col, .. }
            | DslError::TooDeep { line, col, .. } => (*line, *col),
        }
    }

    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            DslError::Syntax { .. } => "syntax",
            DslError::UnknownOp { .. } => "unknown_op",
            DslError::UnknownArg { .. } => "unknown_arg",
            DslError::DuplicateArg { .. } => "duplicate_arg",
            DslError::OutOfBounds { .. } => "out_of_bounds",
            DslError::InvalidDist { .. } => "invalid_dist",
            DslError::TooDeep { .. } => "too_deep",
        }
    }
}

/// Parsed pipeline. Groups are not kept as nodes: `(a() | b()) | c()` is a
/// cascade whose first child is a cascade.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Choice(Vec<Branch>),
    Cascade(Vec<Expr>),
    Leaf {
        name: String,
        args: BTreeMap<String, DistSpec>,
    },
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub expr: Expr,
    pub weight: Option<f64>,
}

/// Parses and validates against the op catalog; omitted arguments take
/// their defaults.
pub fn parse(src: &str) -> Result<Expr, DslError> {
    parser::Parser::new(src, true)?.program()
}

/// Syntax only: any identifier is accepted as an op name and arguments are
/// kept exactly as written.
pub fn parse_unchecked(src: &str) -> Result<Expr, DslError> {
    parser::Parser::new(src, false)?.program()
}

/// As [`parse`], but for raw bytes; invalid UTF-8 is reported as a
/// positioned syntax error.
pub fn parse_bytes(src: &[u8]) -> Result<Expr, DslError> {
    match std::str::from_utf8(src) {
        Ok(s) => parse(s),
        Err(e) => {
            let valid = std::str::from_utf8(&src[..e.valid_up_to()]).unwrap_or_default();
            let line = 1 + valid.matches('\n').count();
            let col = 1 + valid.rsplit('\n').next().unwrap_or("").chars().count();
            Err(DslError::Syntax {
                line,
                col,
                expected: vec!["UTF-8 text".into()],
                found: format!("byte 0x{:02x}", src[e.valid_up_to()]),
            })
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Branch,
    Cascade,
}

/// Canonical single-line text. Parentheses appear only where needed to keep
/// the tree shape.
pub fn format(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(expr, Ctx::Top, &mut out);
    out
}

fn write_expr(e: &Expr, ctx: Ctx, out: &mut String) {
    match e {
        Expr::Identity => out.push_str("identity"),
        Expr::Leaf { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, (k, d)) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(k);
                out.push('=');
                out.push_str(&format_dist(d));
            }
            out.push(')');
        }
        Expr::Cascade(parts) => {
            let paren = ctx == Ctx::Cascade;
            if paren {
                out.push('(');
            }
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_expr(p, Ctx::Cascade, out);
            }
            if paren {
                out.push(')');
            }
        }
        Expr::Choice(branches) => {
            let paren = ctx != Ctx::Top;
            if paren {
                out.push('(');
            }
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ^ ");
                }
                write_expr(&b.expr, Ctx::Branch, out);
                if let Some(w) = b.weight {
                    out.push_str(&format!(":{w}"));
                }
            }
            if paren {
                out.push(')');
            }
        }
    }
}

pub fn format_dist(d: &DistSpec) -> String {
    match d {
        DistSpec::Uniform { lo, hi } => format!("U({lo}, {hi})"),
        DistSpec::Bernoulli { p } => format!("B({p})"),
        DistSpec::Categorical { weights } => {
            let w: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
            format!("C({})", w.join(", "))
        }
        DistSpec::Constant { value } => value.to_string(),
    }
}

/// Builds a graph. The root takes `seed`; child `i` of a node seeded `s`
/// takes `derive([s, i])`. Expects a validated tree (see [`parse`]).
pub fn compile(expr: &Expr, seed: u64) -> AugNode {
    let child_seed = |i: usize| derive(&[seed, i as u64]);
    match expr {
        Expr::Identity => AugNode::identity(seed),
        Expr::Leaf { name, args } => AugNode::leaf(name, args.clone(), seed),
        Expr::Cascade(parts) => AugNode::cascade(
            parts
                .iter()
                .enumerate()
                .map(|(i, p)| compile(p, child_seed(i)))
                .collect(),
            seed,
        ),
        Expr::Choice(branches) => {
            let children = branches
                .iter()
                .enumerate()
                .map(|(i, b)| compile(&b.expr, child_seed(i)))
                .collect();
            AugNode::weighted_choice(children, normalized_weights(branches), seed)
        }
    }
}

fn normalized_weights(branches: &[Branch]) -> Vec<f64> {
    let n = branches.len();
    if branches.iter().all(|b| b.weight.is_none()) {
        return vec![1.0 / n as f64; n];
    }
    let raw: Vec<f64> = branches.iter().map(|b| b.weight.unwrap_or(1.0)).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return vec![1.0 / n as f64; n];
    }
    raw.iter().map(|w| w / total).collect()
}

/// Parse, then compile.
pub fn build(src: &str, seed: u64) -> Result<AugNode, DslError> {
    Ok(compile(&parse(src)?, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{serialize, NodeKind};
    use proptest::prelude::*;

    fn leaf(n: &str) -> Expr {
        Expr::Leaf {
            name: n.into(),
            args: BTreeMap::new(),
        }
    }

    fn br(e: Expr) -> Branch {
        Branch { expr: e, weight: None }
    }

    #[test]
    fn precedence() {
        let e = parse_unchecked("a()|b()^c()").unwrap();
        assert_eq!(
            e,
            Expr::Choice(vec![br(Expr::Cascade(vec![leaf("a"), leaf("b")])), br(leaf("c"))])
        );
        assert_eq!(e, parse_unchecked("(a()|b())^c()").unwrap());
    }

    #[test]
    fn random_flip() {
        let e = parse("vflip() ^ hflip() ^ (vflip() | hflip()) ^ identity").unwrap();
        match &e {
            Expr::Choice(b) => {
                assert_eq!(b.len(), 4);
                assert!(matches!(&b[2].expr, Expr::Cascade(c) if c.len() == 2));
                assert_eq!(b[3].expr, Expr::Identity);
            }
            _ => panic!("{e:?}"),
        }
    }

    #[test]
    fn plasma_cascade_with_args() {
        let src = "plasma_brightness(strength=U(0,0.5)) | plasma_warp(strength=U(0,12)) | linear_color(a=U(0.8,1.2), b=U(-0.1,0.1))";
        let e = parse(src).unwrap();
        match &e {
            Expr::Cascade(p) => {
                assert_eq!(p.len(), 3);
                match &p[1] {
                    Expr::Leaf { args, .. } => {
                        assert_eq!(args["strength"], DistSpec::uniform(0.0, 12.0));
                        assert!(args.contains_key("roughness"));
                    }
                    _ => unreachable!(),
                }
            }
            _ => panic!(),
        }
        assert_eq!(parse(&format(&e)).unwrap(), e);
    }

    #[test]
    fn weights() {
        let g = build("hflip():3 ^ identity:1", 5).unwrap();
        match g.kind {
            NodeKind::Choice { weights, .. } => assert_eq!(weights, vec![0.75, 0.25]),
            _ => panic!(),
        }
        let g = build("hflip() ^ vflip() ^ identity ^ identity()", 5).unwrap();
        match g.kind {
            NodeKind::Choice { weights, .. } => assert_eq!(weights, vec![0.25; 4]),
            _ => panic!(),
        }
        let g = build("hflip():2 ^ identity", 5).unwrap();
        match g.kind {
            NodeKind::Choice { weights, .. } => assert_eq!(weights, vec![2.0 / 3.0, 1.0 / 3.0]),
            _ => panic!(),
        }
    }

    #[test]
    fn compile_is_deterministic() {
        let e = parse("plasma_warp() | (hflip() ^ identity)").unwrap();
        assert_eq!(serialize(&compile(&e, 9)), serialize(&compile(&e, 9)));
        assert_ne!(serialize(&compile(&e, 9)), serialize(&compile(&e, 10)));
    }

    #[test]
    fn formatting() {
        assert_eq!(format(&Expr::Identity), "identity");
        let e = parse_unchecked("(a() ^ b()) | c() ^ (d() | e()) | f()").unwrap();
        assert_eq!(format(&e), "(a() ^ b()) | c() ^ (d() | e()) | f()");
        let nested = parse_unchecked("(a() | b()) | c()").unwrap();
        assert_eq!(format(&nested), "(a() | b()) | c()");
        let nested = parse_unchecked("a() ^ (b() ^ c())").unwrap();
        assert_eq!(format(&nested), "a() ^ (b() ^ c())");
        let args = parse_unchecked("x(q=C(1,2,3), p=B(0.5), r=-2)").unwrap();
        assert_eq!(format(&args), "x(p=B(0.5), q=C(1, 2, 3), r=-2)");
    }

    fn class_of(src: &str) -> (&'static str, (usize, usize)) {
        let e = parse(src).unwrap_err();
        (e.class(), e.line_col())
    }

    #[test]
    fn error_classes() {
        assert_eq!(class_of("hflip() ^ warp9()"), ("unknown_op", (1, 11)));
        assert_eq!(class_of("hflip(bogus=1)"), ("unknown_arg", (1, 7)));
        assert_eq!(class_of("plasma_warp(\n  strength=U(0,99))"), ("out_of_bounds", (2, 3)));
        assert_eq!(class_of("plasma_warp(strength=U(3,1))"), ("invalid_dist", (1, 22)));
        assert_eq!(class_of("plasma_warp(strength=U(1))"), ("invalid_dist", (1, 22)));
        assert_eq!(class_of("hflip() ^"), ("syntax", (1, 10)));
        assert_eq!(class_of("hflip() vflip()"), ("syntax", (1, 9)));
        assert_eq!(class_of("gaussian_noise(sigma=0.1, sigma=0.2)"), ("duplicate_arg", (1, 27)));
        assert_eq!(class_of(""), ("syntax", (1, 1)));
        assert_eq!(class_of("hflip():-1 ^ identity"), ("invalid_dist", (1, 9)));
    }

    #[test]
    fn syntax_error_lists_expected() {
        match parse("hflip(").unwrap_err() {
            DslError::Syntax { expected, found, .. } => {
                assert!(expected.contains(&"argument name".to_string()));
                assert_eq!(found, "end of input");
            }
            e => panic!("{e}"),
        }
        let msg = parse("(hflip()").unwrap_err().to_string();
        assert!(msg.starts_with("1:9:"), "{msg}");
    }

    #[test]
    fn depth_limit() {
        let ok = format!("{}identity{}", "(".repeat(MAX_DEPTH), ")".repeat(MAX_DEPTH));
        assert_eq!(parse(&ok).unwrap(), Expr::Identity);
        let deep = format!("{}identity{}", "(".repeat(10_000), ")".repeat(10_000));
        assert_eq!(parse(&deep).unwrap_err().class(), "too_deep");
    }

    #[test]
    fn invalid_utf8() {
        let e = parse_bytes(b"hflip()\n ^ \xff").unwrap_err();
        assert_eq!(e.line_col(), (2, 4));
    }

    fn arb_num() -> impl Strategy<Value = f64> {
        prop_oneof![
            (-1000i32..1000).prop_map(|v| v as f64 / 8.0),
            -1e6f64..1e6,
            Just(0.0),
            Just(1e-9),
        ]
    }

    fn arb_dist() -> impl Strategy<Value = DistSpec> {
        prop_oneof![
            (arb_num(), arb_num()).prop_map(|(a, b)| DistSpec::uniform(a.min(b), a.max(b))),
            (0.0f64..=1.0).prop_map(|p| DistSpec::Bernoulli { p }),
            prop::collection::vec(0.0f64..10.0, 1..4)
                .prop_filter("positive", |w| w.iter().sum::<f64>() > 0.0)
                .prop_map(|weights| DistSpec::Categorical { weights }),
            arb_num().prop_map(DistSpec::constant),
        ]
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            Just(Expr::Identity),
            (
                "[a-z][a-z0-9_]{0,6}".prop_filter("keyword", |s| s != "identity"),
                prop::collection::btree_map("[a-z_][a-z]{0,4}", arb_dist(), 0..3),
            )
                .prop_map(|(name, args)| Expr::Leaf { name, args }),
        ];
        leaf.prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Cascade),
                prop::collection::vec(
                    (inner, prop::option::of(0.0f64..5.0))
                        .prop_map(|(expr, weight)| Branch { expr, weight }),
                    1..4
                )
                .prop_filter("single unweighted branch is not a choice", |b| {
                    b.len() > 1 || b[0].weight.is_some()
                })
                .prop_map(Expr::Choice),
            ]
        })
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(e in arb_expr()) {
            let text = format(&e);
            let back = parse_unchecked(&text).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(format(&back), text);
        }

        #[test]
        fn parser_is_total(s in "[a-z()=,^|:0-9.U BC#\\n\\-]{0,64}") {
            let _ = parse(&s);
            let _ = parse_unchecked(&s);
        }

        #[test]
        fn precedence_law(a in "[a-z]{1,4}", b in "[a-z]{1,4}", c in "[a-z]{1,4}") {
            let flat = parse_unchecked(&format!("{a}()|{b}()^{c}()")).unwrap();
            let grouped = parse_unchecked(&format!("({a}()|{b}())^{c}()")).unwrap();
            prop_assert_eq!(flat, grouped);
        }
    }
}
