//! Indented text outline of a tree, revisions listed inline under their node.

use super::{NodeId, TaskStatus, TaskTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutlineStyle {
    /// `|------ ` connectors.
    Ascii,
    /// Box-drawing connectors.
    #[default]
    Unicode,
}

impl OutlineStyle {
    fn branch(self) -> &'static str {
        match self {
            OutlineStyle::Ascii => "|------ ",
            OutlineStyle::Unicode => "├── ",
        }
    }

    fn last_branch(self) -> &'static str {
        match self {
            OutlineStyle::Ascii => "|------ ",
            OutlineStyle::Unicode => "└── ",
        }
    }

    fn rail(self) -> &'static str {
        match self {
            OutlineStyle::Ascii => "|   ",
            OutlineStyle::Unicode => "│   ",
        }
    }

    fn blank(self) -> &'static str {
        match self {
            OutlineStyle::Ascii => "|   ",
            OutlineStyle::Unicode => "    ",
        }
    }
}

/// Renders the tree one line per node and per revision.
///
/// ```text
/// Fill Form
/// |------ Name
/// |   |------ Initial: John Doe
/// |   |------ Correction: John Smith
/// |------ Email
/// ```
///
/// Nodes whose status is failed or invalidated get a bracketed suffix.
pub fn render_outline(tree: &TaskTree, style: OutlineStyle) -> String {
    let mut out = String::new();
    let root = &tree.nodes[&tree.root()];
    out.push_str(&label(tree, tree.root()));
    out.push('\n');
    write_body(tree, root.id, "", style, &mut out);
    out
}

fn label(tree: &TaskTree, id: NodeId) -> String {
    let node = &tree.nodes[&id];
    match node.status {
        TaskStatus::Failed | TaskStatus::Invalidated => format!("{} [{}]", node.action, node.status),
        _ => node.action.clone(),
    }
}

fn write_body(tree: &TaskTree, id: NodeId, prefix: &str, style: OutlineStyle, out: &mut String) {
    let node = &tree.nodes[&id];
    let total = node.revisions.len() + node.children.len();
    let mut index = 0;
    for rev in &node.revisions {
        index += 1;
        let connector = if index == total { style.last_branch() } else { style.branch() };
        out.push_str(prefix);
        out.push_str(connector);
        out.push_str(rev.kind.label());
        out.push_str(": ");
        out.push_str(&rev.text.replace('\n', " "));
        out.push('\n');
    }
    for child in &node.children {
        index += 1;
        let last = index == total;
        let connector = if last { style.last_branch() } else { style.branch() };
        out.push_str(prefix);
        out.push_str(connector);
        out.push_str(&label(tree, *child));
        out.push('\n');
        let nested = format!("{prefix}{}", if last { style.blank() } else { style.rail() });
        write_body(tree, *child, &nested, style, out);
    }
}
