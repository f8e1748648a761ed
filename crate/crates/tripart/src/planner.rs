//! Query planning: group same-subject patterns, score nodes from the
//! per-predicate statistics, and order them into a join tree.
//!
//! Scoring encodes three rules as one total order (lower score = higher
//! priority = evaluated earlier):
//!   - a pattern with a constant object scores 1, the strongest constraint;
//!   - a pattern with a constant subject scores the predicate's average
//!     fan-out `max(1, T_p / D_p)`;
//!   - an unconstrained pattern scores its predicate's triple count `T_p`.
//!
//! A property-table node sums its member scores and is multiplied by 0.1
//! when any member carries a constant object.
//!
//! The tree is a left-deep chain: nodes are picked in ascending score order
//! among those sharing a variable with what is already placed, so the final
//! (root) node is a maximal-score node whenever connectivity allows.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::sparql::{BgpQuery, PatternTerm, TriplePattern, Variable};
use crate::stats::Stats;
use crate::term::{Dictionary, Term, TermId};

/// Which layouts the planner may use.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// Same-subject groups become property-table nodes; the rest use VP.
    Mixed,
    /// Every pattern becomes its own VP node.
    VpOnly,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Strategy::Mixed => "mixed",
            Strategy::VpOnly => "vp",
        })
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Pt,
    Vp,
}

/// One sub-query: a single pattern answered from a VP table, or a group of
/// same-subject patterns answered from the property table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub kind: NodeKind,
    pub patterns: Vec<TriplePattern>,
}

impl NodeSpec {
    /// All variables occurring in the node's patterns.
    pub fn out_vars(&self) -> BTreeSet<Variable> {
        self.patterns
            .iter()
            .flat_map(|p| p.variables().cloned())
            .collect()
    }

    pub fn has_constant_object(&self) -> bool {
        self.patterns.iter().any(|p| p.has_constant_object())
    }

    /// Deterministic rendering, also used by explain output.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self.patterns.iter().map(|p| p.to_string()).collect();
        parts.join(" . ")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    /// The predicate has no data; the whole query answer is empty.
    #[error("predicate without data: <{0}>")]
    UnknownPredicate(String),
}

/// A node of the join tree. `children` holds at most one subtree here
/// because construction is left-deep, but the shape is kept general.
#[derive(Debug, Clone)]
pub struct JoinNode {
    pub spec: NodeSpec,
    pub score: f64,
    /// Variables shared with the subtree below; the join keys.
    pub join_vars: Vec<Variable>,
    /// True when no variable is shared and the join degrades to a
    /// cartesian product.
    pub cartesian: bool,
    pub children: Vec<JoinNode>,
}

/// The plan: leaves are evaluated first, the root last.
#[derive(Debug, Clone)]
pub struct JoinTree {
    pub root: JoinNode,
}

impl JoinTree {
    /// Nodes in evaluation order: deepest leaf first, root last.
    pub fn evaluation_order(&self) -> Vec<&JoinNode> {
        let mut chain = Vec::new();
        let mut node = &self.root;
        loop {
            chain.push(node);
            match node.children.first() {
                Some(child) => node = child,
                None => break,
            }
        }
        chain.reverse();
        chain
    }

    pub fn node_count(&self) -> usize {
        self.evaluation_order().len()
    }

    /// Joins executed when evaluating this tree.
    pub fn join_count(&self) -> usize {
        self.node_count() - 1
    }
}

/// Split the query's patterns into plan nodes.
///
/// Under [`Strategy::Mixed`], maximal groups of two or more patterns with an
/// identical subject expression (same variable or same constant) become PT
/// nodes; singleton groups become VP nodes. Under [`Strategy::VpOnly`] every
/// pattern is its own VP node. Node order follows first occurrence.
pub fn group_patterns(query: &BgpQuery, strategy: Strategy) -> Vec<NodeSpec> {
    match strategy {
        Strategy::VpOnly => query
            .patterns
            .iter()
            .map(|p| NodeSpec {
                kind: NodeKind::Vp,
                patterns: vec![p.clone()],
            })
            .collect(),
        Strategy::Mixed => {
            let mut groups: Vec<(PatternTerm, Vec<TriplePattern>)> = Vec::new();
            for p in &query.patterns {
                match groups.iter_mut().find(|(subj, _)| subj == &p.subject) {
                    Some((_, members)) => members.push(p.clone()),
                    None => groups.push((p.subject.clone(), vec![p.clone()])),
                }
            }
            groups
                .into_iter()
                .map(|(_, patterns)| NodeSpec {
                    kind: if patterns.len() >= 2 {
                        NodeKind::Pt
                    } else {
                        NodeKind::Vp
                    },
                    patterns,
                })
                .collect()
        }
    }
}

fn predicate_stats(
    predicate: &Term,
    dict: &Dictionary,
    stats: &Stats,
) -> Result<(TermId, crate::stats::PredicateStats), PlanError> {
    let iri = match predicate {
        Term::Iri(iri) => iri.clone(),
        other => other.to_string(),
    };
    let id = dict
        .lookup(predicate)
        .ok_or_else(|| PlanError::UnknownPredicate(iri.clone()))?;
    let ps = stats.get(id).ok_or(PlanError::UnknownPredicate(iri))?;
    Ok((id, ps))
}

/// Base score of one pattern, ignoring the object position: constant
/// subjects cost the average fan-out, otherwise the full triple count.
fn pattern_base_score(
    pattern: &TriplePattern,
    dict: &Dictionary,
    stats: &Stats,
) -> Result<f64, PlanError> {
    let (_, ps) = predicate_stats(&pattern.predicate, dict, stats)?;
    Ok(if pattern.subject.is_const() {
        ps.fan_out()
    } else {
        ps.triple_count as f64
    })
}

/// Priority score of a node; lower runs earlier.
pub fn score_node(spec: &NodeSpec, dict: &Dictionary, stats: &Stats) -> Result<f64, PlanError> {
    match spec.kind {
        NodeKind::Vp => {
            let pattern = &spec.patterns[0];
            if pattern.has_constant_object() {
                // still surface UnknownPredicate for predicates with no data
                predicate_stats(&pattern.predicate, dict, stats)?;
                Ok(1.0)
            } else {
                pattern_base_score(pattern, dict, stats)
            }
        }
        NodeKind::Pt => {
            let mut sum = 0.0;
            for p in &spec.patterns {
                sum += pattern_base_score(p, dict, stats)?;
            }
            Ok(if spec.has_constant_object() {
                sum * 0.1
            } else {
                sum
            })
        }
    }
}

/// Secondary ordering for equal scores: smallest predicate id, then the
/// rendered pattern text. Keeps plans reproducible.
fn tie_key(spec: &NodeSpec, dict: &Dictionary) -> (u32, String) {
    let min_pred = spec
        .patterns
        .iter()
        .filter_map(|p| dict.lookup(&p.predicate))
        .map(|id| id.0)
        .min()
        .unwrap_or(u32::MAX);
    (min_pred, spec.render())
}

/// Order nodes into a left-deep chain.
///
/// The first node is the lowest-scored one; each step then picks the
/// lowest-scored remaining node that shares a variable with what is already
/// placed. Only when nothing connects does it fall back to the lowest-scored
/// remaining node, flagging that join as cartesian.
pub fn build_join_tree(
    nodes: Vec<NodeSpec>,
    dict: &Dictionary,
    stats: &Stats,
) -> Result<JoinTree, PlanError> {
    assert!(!nodes.is_empty(), "cannot plan an empty node list");

    struct Entry {
        spec: NodeSpec,
        score: f64,
        tie: (u32, String),
        vars: BTreeSet<Variable>,
    }
    let mut remaining: Vec<Entry> = nodes
        .into_iter()
        .map(|spec| {
            let score = score_node(&spec, dict, stats)?;
            let tie = tie_key(&spec, dict);
            let vars = spec.out_vars();
            Ok(Entry {
                spec,
                score,
                tie,
                vars,
            })
        })
        .collect::<Result<_, PlanError>>()?;

    let min_entry = |candidates: &[usize], remaining: &[Entry]| -> usize {
        *candidates
            .iter()
            .min_by(|&&a, &&b| {
                remaining[a]
                    .score
                    .total_cmp(&remaining[b].score)
                    .then_with(|| remaining[a].tie.cmp(&remaining[b].tie))
            })
            .unwrap()
    };

    let all: Vec<usize> = (0..remaining.len()).collect();
    let first = min_entry(&all, &remaining);
    let mut placed_vars: BTreeSet<Variable> = remaining[first].vars.clone();
    let mut chain: Vec<(NodeSpec, f64, Vec<Variable>, bool)> = Vec::new();
    let entry = remaining.swap_remove(first);
    chain.push((entry.spec, entry.score, Vec::new(), false));

    while !remaining.is_empty() {
        let connected: Vec<usize> = (0..remaining.len())
            .filter(|&i| !remaining[i].vars.is_disjoint(&placed_vars))
            .collect();
        let (idx, cartesian) = if connected.is_empty() {
            let all: Vec<usize> = (0..remaining.len()).collect();
            (min_entry(&all, &remaining), true)
        } else {
            (min_entry(&connected, &remaining), false)
        };
        let entry = remaining.swap_remove(idx);
        let join_vars: Vec<Variable> = entry.vars.intersection(&placed_vars).cloned().collect();
        placed_vars.extend(entry.vars.iter().cloned());
        chain.push((entry.spec, entry.score, join_vars, cartesian));
    }

    // fold the evaluation chain into a left-deep tree, last node on top
    let mut tree: Option<JoinNode> = None;
    for (spec, score, join_vars, cartesian) in chain {
        let node = JoinNode {
            spec,
            score,
            join_vars,
            cartesian,
            children: tree.take().into_iter().collect(),
        };
        tree = Some(node);
    }
    Ok(JoinTree {
        root: tree.unwrap(),
    })
}

/// Plan a query under the given strategy.
pub fn plan_query(
    query: &BgpQuery,
    dict: &Dictionary,
    stats: &Stats,
    strategy: Strategy,
) -> Result<JoinTree, PlanError> {
    build_join_tree(group_patterns(query, strategy), dict, stats)
}

/// Deterministic indented rendering of a join tree. The root is printed
/// first; each line below it is the input joined into the line above, so the
/// last line is evaluated first.
pub fn explain(tree: &JoinTree) -> String {
    let mut out = String::new();
    let mut depth = 0usize;
    let mut node = Some(&tree.root);
    while let Some(n) = node {
        let kind = match n.spec.kind {
            NodeKind::Pt => "PT",
            NodeKind::Vp => "VP",
        };
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{kind} score={}", n.score));
        if !n.join_vars.is_empty() {
            let names: Vec<String> = n.join_vars.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(" join=[{}]", names.join(",")));
        }
        if n.cartesian {
            out.push_str(" CARTESIAN");
        }
        out.push_str(&format!(" {{{}}}\n", n.spec.render()));
        depth += 1;
        node = n.children.first();
    }
    out
}
