//! A small reactive behavior-tree engine.
//!
//! Trees are described by [`BehaviorNode`] (serializable, so they can be
//! loaded from JSON) and compiled against a [`LeafRegistry`] into a
//! [`CompiledNode`] before use. Name resolution happens at compile time, so a
//! tick can never fail on an unknown leaf. Composite nodes keep no memory
//! between ticks: every tick starts again from the root.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BtStatus {
    Running,
    Success,
    Failure,
}

/// Declarative tree description.
///
/// JSON form: `{"fallback": [{"sequence": [{"condition": "robot_visible"},
/// {"action": "look_at_robot"}]}, {"action": "regular_nav"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BehaviorNode {
    Sequence(Vec<BehaviorNode>),
    Fallback(Vec<BehaviorNode>),
    Inverter(Box<BehaviorNode>),
    Condition(String),
    Action(String),
}

impl BehaviorNode {
    pub fn sequence(children: Vec<BehaviorNode>) -> Self {
        BehaviorNode::Sequence(children)
    }

    pub fn fallback(children: Vec<BehaviorNode>) -> Self {
        BehaviorNode::Fallback(children)
    }

    pub fn inverter(child: BehaviorNode) -> Self {
        BehaviorNode::Inverter(Box::new(child))
    }

    pub fn condition(name: &str) -> Self {
        BehaviorNode::Condition(name.to_string())
    }

    pub fn action(name: &str) -> Self {
        BehaviorNode::Action(name.to_string())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { origin: "behavior tree".into(), message: e.to_string() })
    }
}

pub type ConditionFn<B> = Arc<dyn Fn(&B) -> bool + Send + Sync>;
pub type ActionFn<B> = Arc<dyn Fn(&mut B) -> BtStatus + Send + Sync>;

/// Named condition and action leaves for blackboard type `B`.
pub struct LeafRegistry<B> {
    conditions: BTreeMap<String, ConditionFn<B>>,
    actions: BTreeMap<String, ActionFn<B>>,
}

impl<B> Default for LeafRegistry<B> {
    fn default() -> Self {
        LeafRegistry { conditions: BTreeMap::new(), actions: BTreeMap::new() }
    }
}

impl<B> Clone for LeafRegistry<B> {
    fn clone(&self) -> Self {
        LeafRegistry { conditions: self.conditions.clone(), actions: self.actions.clone() }
    }
}

impl<B> LeafRegistry<B> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn condition(&mut self, name: &str, f: impl Fn(&B) -> bool + Send + Sync + 'static) -> &mut Self {
        self.conditions.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn action(&mut self, name: &str, f: impl Fn(&mut B) -> BtStatus + Send + Sync + 'static) -> &mut Self {
        self.actions.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn condition_names(&self) -> impl Iterator<Item = &str> {
        self.conditions.keys().map(String::as_str)
    }

    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        self.actions.keys().map(String::as_str)
    }

    pub fn compile(&self, node: &BehaviorNode) -> Result<CompiledNode<B>> {
        Ok(match node {
            BehaviorNode::Sequence(children) | BehaviorNode::Fallback(children) => {
                if children.is_empty() {
                    return Err(Error::invalid("behavior tree", "sequence and fallback nodes need at least one child"));
                }
                let compiled = children.iter().map(|c| self.compile(c)).collect::<Result<Vec<_>>>()?;
                if matches!(node, BehaviorNode::Sequence(_)) {
                    CompiledNode::Sequence(compiled)
                } else {
                    CompiledNode::Fallback(compiled)
                }
            }
            BehaviorNode::Inverter(child) => CompiledNode::Inverter(Box::new(self.compile(child)?)),
            BehaviorNode::Condition(name) => match self.conditions.get(name) {
                Some(f) => CompiledNode::Condition(f.clone()),
                None => {
                    return Err(Error::Unknown {
                        what: "condition",
                        name: name.clone(),
                        valid: self.conditions.keys().cloned().collect(),
                    })
                }
            },
            BehaviorNode::Action(name) => match self.actions.get(name) {
                Some(f) => CompiledNode::Action(f.clone()),
                None => {
                    return Err(Error::Unknown {
                        what: "action",
                        name: name.clone(),
                        valid: self.actions.keys().cloned().collect(),
                    })
                }
            },
        })
    }
}

/// A tree with resolved leaves, ready to tick.
pub enum CompiledNode<B> {
    Sequence(Vec<CompiledNode<B>>),
    Fallback(Vec<CompiledNode<B>>),
    Inverter(Box<CompiledNode<B>>),
    Condition(ConditionFn<B>),
    Action(ActionFn<B>),
}

impl<B> Clone for CompiledNode<B> {
    fn clone(&self) -> Self {
        match self {
            CompiledNode::Sequence(c) => CompiledNode::Sequence(c.clone()),
            CompiledNode::Fallback(c) => CompiledNode::Fallback(c.clone()),
            CompiledNode::Inverter(c) => CompiledNode::Inverter(c.clone()),
            CompiledNode::Condition(f) => CompiledNode::Condition(f.clone()),
            CompiledNode::Action(f) => CompiledNode::Action(f.clone()),
        }
    }
}

impl<B> fmt::Debug for CompiledNode<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompiledNode::Sequence(c) => f.debug_tuple("Sequence").field(c).finish(),
            CompiledNode::Fallback(c) => f.debug_tuple("Fallback").field(c).finish(),
            CompiledNode::Inverter(c) => f.debug_tuple("Inverter").field(c).finish(),
            CompiledNode::Condition(_) => f.write_str("Condition"),
            CompiledNode::Action(_) => f.write_str("Action"),
        }
    }
}

impl<B> CompiledNode<B> {
    pub fn tick(&self, bb: &mut B) -> BtStatus {
        match self {
            CompiledNode::Sequence(children) => {
                for child in children {
                    match child.tick(bb) {
                        BtStatus::Success => continue,
                        other => return other,
                    }
                }
                BtStatus::Success
            }
            CompiledNode::Fallback(children) => {
                for child in children {
                    match child.tick(bb) {
                        BtStatus::Failure => continue,
                        other => return other,
                    }
                }
                BtStatus::Failure
            }
            CompiledNode::Inverter(child) => match child.tick(bb) {
                BtStatus::Success => BtStatus::Failure,
                BtStatus::Failure => BtStatus::Success,
                BtStatus::Running => BtStatus::Running,
            },
            CompiledNode::Condition(f) => {
                if f(bb) {
                    BtStatus::Success
                } else {
                    BtStatus::Failure
                }
            }
            CompiledNode::Action(f) => f(bb),
        }
    }
}
