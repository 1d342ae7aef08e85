//! Ordered labeled trees and their bracket-notation text form.
//!
//! A tree is written as `{label child1 child2 ...}`, e.g. `{a{b}{c}}` is a
//! root `a` with ordered children `b` and `c`. Child order is significant
//! everywhere in this crate. Labels are arbitrary strings that contain no
//! braces and no line breaks; surrounding whitespace is trimmed.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// An ordered tree of string labels.
///
/// Immutable after construction; every operation on it is pure.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    label: String,
    children: Vec<LabeledTree>,
}

impl LabeledTree {
    /// Builds a node, validating and trimming the label.
    pub fn new(label: impl Into<String>, children: Vec<LabeledTree>) -> Result<Self> {
        let raw = label.into();
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(Error::InvalidLabel(raw));
        }
        if trimmed.contains(['{', '}', '\n', '\r']) {
            return Err(Error::InvalidLabel(raw));
        }
        Ok(LabeledTree {
            label: trimmed.to_string(),
            children,
        })
    }

    /// Builds a childless node.
    pub fn leaf(label: impl Into<String>) -> Result<Self> {
        Self::new(label, Vec::new())
    }

    /// Constructs a node from a label that is already known to be valid.
    pub(crate) fn new_unchecked(label: impl Into<String>, children: Vec<LabeledTree>) -> Self {
        LabeledTree {
            label: label.into(),
            children,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn children(&self) -> &[LabeledTree] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of nodes, root included. Always >= 1.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(LabeledTree::size).sum::<usize>()
    }

    /// True if any node carries `label`.
    pub fn contains_label(&self, label: &str) -> bool {
        self.label == label || self.children.iter().any(|c| c.contains_label(label))
    }
}

impl fmt::Debug for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_tree(self))
    }
}

/// Serializes a tree to canonical bracket notation (no whitespace).
pub fn serialize_tree(tree: &LabeledTree) -> String {
    let mut out = String::new();
    write_node(tree, &mut out);
    out
}

fn write_node(tree: &LabeledTree, out: &mut String) {
    out.push('{');
    out.push_str(&tree.label);
    for child in &tree.children {
        write_node(child, out);
    }
    out.push('}');
}

/// Parses bracket notation into a tree.
///
/// Whitespace between tokens is permitted; the canonical form emitted by
/// [`serialize_tree`] contains none. Errors carry the byte offset of the
/// offending character.
pub fn parse_tree(text: &str) -> Result<LabeledTree> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;

    // Stack of partially-built nodes: (label, children so far).
    let mut stack: Vec<(String, Vec<LabeledTree>)> = Vec::new();
    let mut root: Option<LabeledTree> = None;

    while pos < bytes.len() {
        match bytes[pos] {
            b'{' => {
                if root.is_some() {
                    return Err(parse_err(pos, "trailing content after tree"));
                }
                pos += 1;
                let start = pos;
                while pos < bytes.len() && bytes[pos] != b'{' && bytes[pos] != b'}' {
                    pos += 1;
                }
                let label = text[start..pos].trim();
                if label.is_empty() {
                    return Err(parse_err(start, "empty label"));
                }
                stack.push((label.to_string(), Vec::new()));
            }
            b'}' => {
                let Some((label, children)) = stack.pop() else {
                    return Err(parse_err(pos, "unmatched '}'"));
                };
                pos += 1;
                let node = LabeledTree::new(label, children)?;
                if let Some((_, siblings)) = stack.last_mut() {
                    siblings.push(node);
                } else {
                    root = Some(node);
                }
            }
            c if c.is_ascii_whitespace() => pos += 1,
            _ => {
                let what = if root.is_some() {
                    "trailing content after tree"
                } else {
                    "expected '{'"
                };
                return Err(parse_err(pos, what));
            }
        }
    }

    if !stack.is_empty() {
        return Err(parse_err(bytes.len(), "unbalanced braces: missing '}'"));
    }
    root.ok_or_else(|| parse_err(0, "empty input"))
}

fn parse_err(offset: usize, message: &str) -> Error {
    Error::TreeParse {
        offset,
        message: message.to_string(),
    }
}

/// Reads a `.trees` file: one bracket-notation tree per non-empty line.
pub fn read_trees<R: BufRead>(reader: R) -> Result<Vec<LabeledTree>> {
    let mut trees = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        trees.push(parse_tree(&line)?);
    }
    Ok(trees)
}

/// Writes trees in `.trees` format, one canonical line per tree.
pub fn write_trees<W: Write>(mut writer: W, trees: &[LabeledTree]) -> Result<()> {
    for tree in trees {
        writeln!(writer, "{}", serialize_tree(tree))?;
    }
    Ok(())
}
