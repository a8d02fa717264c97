//! JSON document form of a [`TaskTree`].
//!
//! Layout, with key order fixed and absent optionals written as `null`:
//!
//! ```text
//! {"schema_version":"1","root":id,"current":id,"next_round":int,
//!  "nodes":{id:{"id","action","input","output","status","parent",
//!               "children":[..],"dependencies":[{"to","kind"}],
//!               "revisions":[{"round","kind","text","reply"}],
//!               "retry_count","error"}}}
//! ```
//!
//! Output is pretty-printed with two-space indentation, nodes in ascending
//! numeric id order, and a trailing newline.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{NodeId, TaskNode, TaskTree};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize)]
struct DocumentRef<'a> {
    schema_version: &'static str,
    root: NodeId,
    current: NodeId,
    next_round: u64,
    nodes: NodesRef<'a>,
}

struct NodesRef<'a>(&'a BTreeMap<NodeId, TaskNode>);

impl Serialize for NodesRef<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (id, node) in self.0 {
            map.serialize_entry(id, node)?;
        }
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    schema_version: String,
    root: NodeId,
    current: NodeId,
    next_round: u64,
    nodes: UniqueNodes,
}

struct UniqueNodes(BTreeMap<NodeId, TaskNode>);

impl<'de> Deserialize<'de> for UniqueNodes {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct NodesVisitor;

        impl<'de> Visitor<'de> for NodesVisitor {
            type Value = UniqueNodes;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from node id to node")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut nodes = BTreeMap::new();
                while let Some((id, node)) = access.next_entry::<NodeId, TaskNode>()? {
                    if nodes.insert(id, node).is_some() {
                        return Err(serde::de::Error::custom(format!("duplicate node id {id}")));
                    }
                }
                Ok(UniqueNodes(nodes))
            }
        }

        deserializer.deserialize_map(NodesVisitor)
    }
}

impl TaskTree {
    /// Canonical document text.
    pub fn to_json(&self) -> String {
        let doc = DocumentRef {
            schema_version: SCHEMA_VERSION,
            root: self.root,
            current: self.current,
            next_round: self.next_round,
            nodes: NodesRef(&self.nodes),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("tree documents always serialize");
        out.push('\n');
        out
    }

    /// Parses and validates a tree document.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let doc: Document = serde_path_to_error::deserialize(&mut de).map_err(|err| {
            let path = err.path().to_string();
            Error::schema(path, err.inner().to_string())
        })?;
        de.end()
            .map_err(|err| Error::schema(".", err.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::schema(
                "schema_version",
                format!("unsupported version `{}`", doc.schema_version),
            ));
        }
        TaskTree::from_parts(doc.root, doc.current, doc.nodes.0, doc.next_round)
    }
}
