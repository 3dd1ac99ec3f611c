use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Hierarchy, HierarchyBuilder, Node, NodeId};
use crate::error::{Error, Result};

const META: &[char] = &['(', ')', ',', ';', ':'];

fn check_names<S: AsRef<str>>(h: &Hierarchy, names: &[S]) -> Result<()> {
    if names.len() != h.n_classes() {
        return Err(Error::InvalidArgument(format!(
            "{} names for {} classes",
            names.len(),
            h.n_classes()
        )));
    }
    for n in names {
        let n = n.as_ref();
        if n.is_empty() || n.contains(META) || n.contains(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "class name {:?} cannot be written as a newick label",
                n
            )));
        }
    }
    Ok(())
}

/// Newick string with class names as leaf labels, e.g. `((A,B),C);`.
pub fn to_newick<S: AsRef<str>>(h: &Hierarchy, names: &[S]) -> Result<String> {
    check_names(h, names)?;
    let mut out = String::new();
    write_node(h, h.root(), names, &mut out);
    out.push(';');
    Ok(out)
}

fn write_node<S: AsRef<str>>(h: &Hierarchy, id: NodeId, names: &[S], out: &mut String) {
    match h.node(id) {
        Node::Leaf { class } => out.push_str(names[class].as_ref()),
        Node::Internal { left, right } => {
            out.push('(');
            write_node(h, left, names, out);
            out.push(',');
            write_node(h, right, names, out);
            out.push(')');
        }
    }
}

/// Parses a binary Newick tree whose leaf labels are exactly `names`.
/// Branch lengths and internal labels are accepted and ignored.
pub fn from_newick<S: AsRef<str>>(s: &str, names: &[S]) -> Result<Hierarchy> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
        names,
        b: HierarchyBuilder::new(),
        seen: alloc::vec![false; names.len()],
    };
    let root = p.node()?;
    p.skip_ws();
    p.expect(b';')?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing characters after ';'"));
    }
    if let Some(c) = p.seen.iter().position(|s| !s) {
        return Err(Error::InvalidHierarchy(format!(
            "class {:?} does not appear in the tree",
            names[c].as_ref()
        )));
    }
    p.b.finish(root)
}

struct Parser<'a, S> {
    src: &'a [u8],
    pos: usize,
    names: &'a [S],
    b: HierarchyBuilder,
    seen: Vec<bool>,
}

impl<'a, S: AsRef<str>> Parser<'a, S> {
    fn err(&self, message: &str) -> Error {
        Error::Newick {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn label(&mut self) -> &'a str {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| !b"(),;:".contains(&c) && !c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        let src: &'a [u8] = self.src;
        core::str::from_utf8(&src[start..self.pos]).unwrap_or("")
    }

    fn branch_length(&mut self) {
        self.skip_ws();
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            self.label();
        }
    }

    fn node(&mut self) -> Result<NodeId> {
        self.skip_ws();
        let id = if self.peek() == Some(b'(') {
            self.pos += 1;
            let left = self.node()?;
            self.skip_ws();
            self.expect(b',')?;
            let right = self.node()?;
            self.skip_ws();
            if self.peek() == Some(b',') {
                return Err(self.err("only binary nodes are supported"));
            }
            self.expect(b')')?;
            self.label();
            self.b.join(left, right)
        } else {
            let start = self.pos;
            let name = self.label();
            if name.is_empty() {
                return Err(self.err("expected a leaf label or '('"));
            }
            let Some(class) = self.names.iter().position(|n| n.as_ref() == name) else {
                return Err(Error::Newick {
                    offset: start,
                    message: format!("unknown class {:?}", name),
                });
            };
            if self.seen[class] {
                return Err(Error::Newick {
                    offset: start,
                    message: format!("class {:?} appears twice", name),
                });
            }
            self.seen[class] = true;
            self.b.leaf(class)
        };
        self.branch_length();
        Ok(id)
    }
}
