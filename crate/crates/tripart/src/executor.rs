//! Bottom-up evaluation of join trees: VP scans, property-table selects with
//! NULL filtering and list flattening, hash joins, projection.
//!
//! Results are bags (multisets) of solution mappings; `DISTINCT` deduplicates
//! after projection. Property-table partitions are evaluated in parallel and
//! concatenated in partition-index order, so output is deterministic.

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::planner::{self, JoinNode, JoinTree, NodeKind, NodeSpec, PlanError, Strategy};
use crate::sparql::{BgpQuery, PatternTerm, TriplePattern, Variable};
use crate::storage::{PropertyTable, VpTable};
use crate::term::{Dictionary, TermId};

/// A bag of solution rows over a fixed variable schema, stored row-major in
/// one flat buffer. Zero-arity tables (every position constant) still track
/// their row count: multiplicity matters under bag semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingTable {
    schema: Vec<Variable>,
    data: Vec<TermId>,
    rows: usize,
}

impl BindingTable {
    pub fn new(schema: Vec<Variable>) -> BindingTable {
        debug_assert!(
            (1..schema.len()).all(|i| !schema[..i].contains(&schema[i])),
            "duplicate variable in schema"
        );
        BindingTable {
            schema,
            data: Vec::new(),
            rows: 0,
        }
    }

    pub fn schema(&self) -> &[Variable] {
        &self.schema
    }

    pub fn arity(&self) -> usize {
        self.schema.len()
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[TermId] {
        let arity = self.arity();
        &self.data[i * arity..(i + 1) * arity]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[TermId]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn push_row(&mut self, row: &[TermId]) {
        debug_assert_eq!(row.len(), self.arity());
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn column_of(&self, var: &Variable) -> Option<usize> {
        self.schema.iter().position(|v| v == var)
    }

    /// Row multiset, for order-insensitive comparisons.
    pub fn bag(&self) -> HashMap<Vec<TermId>, usize> {
        let mut bag = HashMap::new();
        for row in self.rows() {
            *bag.entry(row.to_vec()).or_insert(0) += 1;
        }
        bag
    }

    fn append_rows(&mut self, data: Vec<TermId>, rows: usize) {
        debug_assert_eq!(data.len(), rows * self.arity());
        self.data.extend(data);
        self.rows += rows;
    }
}

/// Evaluate one triple pattern against its VP table.
///
/// Constants filter, variables bind; a repeated variable (`?x <p> ?x`) keeps
/// only rows with subject = object. When both positions are distinct
/// variables the schema lists the subject variable first.
pub fn eval_vp_node(pattern: &TriplePattern, vp: &VpTable, dict: &Dictionary) -> BindingTable {
    match (&pattern.subject, &pattern.object) {
        (PatternTerm::Var(s), PatternTerm::Var(o)) if s == o => {
            let mut out = BindingTable::new(vec![s.clone()]);
            for &(sub, obj) in &vp.rows {
                if sub == obj {
                    out.push_row(&[sub]);
                }
            }
            out
        }
        (PatternTerm::Var(s), PatternTerm::Var(o)) => {
            let mut out = BindingTable::new(vec![s.clone(), o.clone()]);
            for &(sub, obj) in &vp.rows {
                out.push_row(&[sub, obj]);
            }
            out
        }
        (PatternTerm::Const(s), PatternTerm::Var(o)) => {
            let mut out = BindingTable::new(vec![o.clone()]);
            if let Some(sid) = dict.lookup(s) {
                for &(_, obj) in vp.rows_for_subject(sid) {
                    out.push_row(&[obj]);
                }
            }
            out
        }
        (PatternTerm::Var(s), PatternTerm::Const(o)) => {
            let mut out = BindingTable::new(vec![s.clone()]);
            if let Some(oid) = dict.lookup(o) {
                for &(sub, obj) in &vp.rows {
                    if obj == oid {
                        out.push_row(&[sub]);
                    }
                }
            }
            out
        }
        (PatternTerm::Const(s), PatternTerm::Const(o)) => {
            let mut out = BindingTable::new(Vec::new());
            if let (Some(sid), Some(oid)) = (dict.lookup(s), dict.lookup(o)) {
                for &(_, obj) in vp.rows_for_subject(sid) {
                    if obj == oid {
                        out.push_row(&[]);
                    }
                }
            }
            out
        }
    }
}

/// How one PT-group pattern constrains its column during the row scan.
enum ObjectCheck {
    /// Object is a constant with this id; `None` if the term has no id,
    /// which can never match.
    Const(Option<TermId>),
    /// Object is a variable bound at this slot of the output schema.
    Var(usize),
}

/// Evaluate a same-subject pattern group against the property table.
///
/// A row qualifies when every required cell is non-NULL and constants match;
/// multi-valued cells contribute their cross product (flattening). Repeated
/// variables across patterns enforce value equality.
pub fn eval_pt_node(spec: &NodeSpec, pt: &PropertyTable, dict: &Dictionary) -> BindingTable {
    // output schema: variables in first-occurrence order across patterns
    let mut schema: Vec<Variable> = Vec::new();
    for p in &spec.patterns {
        for v in p.variables() {
            if !schema.contains(v) {
                schema.push(v.clone());
            }
        }
    }
    let mut out = BindingTable::new(schema.clone());

    // resolve the shared subject expression
    let subject = &spec.patterns[0].subject;
    let subject_slot = subject
        .as_var()
        .map(|v| schema.iter().position(|s| s == v).unwrap());
    let subject_const = match subject {
        PatternTerm::Var(_) => None,
        PatternTerm::Const(t) => match dict.lookup(t) {
            Some(id) => Some((id, crate::storage::partition_of(t, pt.partition_count()))),
            None => return out, // constant subject never interned: no rows
        },
    };

    // per-pattern column index and object constraint
    let mut plans = Vec::with_capacity(spec.patterns.len());
    for p in &spec.patterns {
        let Some(pid) = dict.lookup(&p.predicate) else {
            return out;
        };
        let Some(col) = pt.column_index(pid) else {
            return out;
        };
        let check = match &p.object {
            PatternTerm::Var(v) => ObjectCheck::Var(schema.iter().position(|s| s == v).unwrap()),
            PatternTerm::Const(t) => ObjectCheck::Const(dict.lookup(t)),
        };
        plans.push((col, check));
    }

    let arity = schema.len();
    let parts: Vec<(Vec<TermId>, usize)> = pt
        .partitions
        .par_iter()
        .map(|part| {
            let mut data = Vec::new();
            let mut rows = 0usize;

            // candidate rows in this partition
            let candidates: Vec<usize> = match subject_const {
                Some((sid, owner)) => {
                    if part.partition_index == owner {
                        part.row_of(sid).into_iter().collect()
                    } else {
                        Vec::new()
                    }
                }
                None => (0..part.row_count()).collect(),
            };
            if candidates.is_empty() {
                return (data, rows);
            }

            let columns: Vec<_> = plans
                .iter()
                .map(|(col, _)| part.decode_column(*col).expect("column validated at build"))
                .collect();

            let mut env: Vec<Option<TermId>> = vec![None; arity];
            for row in candidates {
                if let Some(slot) = subject_slot {
                    env[slot] = Some(part.subjects[row]);
                }
                expand_row(&plans, &columns, row, 0, &mut env, &mut data, &mut rows);
                if let Some(slot) = subject_slot {
                    env[slot] = None;
                }
            }
            (data, rows)
        })
        .collect();

    for (data, rows) in parts {
        out.append_rows(data, rows);
    }
    out
}

/// Depth-first expansion of one property-table row: pattern by pattern, try
/// every value of the pattern's cell, checking constants and already-bound
/// variables, and emit a result row once all patterns are satisfied.
fn expand_row(
    plans: &[(usize, ObjectCheck)],
    columns: &[Vec<crate::storage::Cell>],
    row: usize,
    depth: usize,
    env: &mut Vec<Option<TermId>>,
    data: &mut Vec<TermId>,
    rows: &mut usize,
) {
    if depth == plans.len() {
        data.extend(env.iter().map(|v| v.expect("all schema vars bound")));
        *rows += 1;
        return;
    }
    let Some(cell) = &columns[depth][row] else {
        return; // NULL: this subject has no triple for the predicate
    };
    match &plans[depth].1 {
        ObjectCheck::Const(None) => {}
        ObjectCheck::Const(Some(id)) => {
            // each matching occurrence counts once (bag semantics)
            for &v in cell.as_slice() {
                if v == *id {
                    expand_row(plans, columns, row, depth + 1, env, data, rows);
                }
            }
        }
        ObjectCheck::Var(slot) => match env[*slot] {
            Some(bound) => {
                for &v in cell.as_slice() {
                    if v == bound {
                        expand_row(plans, columns, row, depth + 1, env, data, rows);
                    }
                }
            }
            None => {
                for &v in cell.as_slice() {
                    env[*slot] = Some(v);
                    expand_row(plans, columns, row, depth + 1, env, data, rows);
                }
                env[*slot] = None;
            }
        },
    }
}

/// Bag-semantics natural join. Join keys are the schema intersection; with
/// no shared variable this is the cartesian product. The output schema is
/// the left schema followed by right-only variables; the smaller input is
/// the hash build side.
pub fn hash_join(left: &BindingTable, right: &BindingTable) -> BindingTable {
    let join_pairs: Vec<(usize, usize)> = left
        .schema()
        .iter()
        .enumerate()
        .filter_map(|(li, v)| right.column_of(v).map(|ri| (li, ri)))
        .collect();
    let right_extra: Vec<usize> = (0..right.arity())
        .filter(|ri| !join_pairs.iter().any(|(_, r)| r == ri))
        .collect();

    let mut schema = left.schema().to_vec();
    for &ri in &right_extra {
        schema.push(right.schema()[ri].clone());
    }
    let mut out = BindingTable::new(schema);

    if join_pairs.is_empty() {
        for lrow in left.rows() {
            for rrow in right.rows() {
                let mut row = lrow.to_vec();
                row.extend(right_extra.iter().map(|&ri| rrow[ri]));
                out.push_row(&row);
            }
        }
        return out;
    }

    let mut row_buf: Vec<TermId> = Vec::with_capacity(out.arity());
    if left.len() <= right.len() {
        // build on left, probe right
        let mut index: HashMap<Vec<TermId>, Vec<usize>> = HashMap::new();
        for (i, lrow) in left.rows().enumerate() {
            let key: Vec<TermId> = join_pairs.iter().map(|&(li, _)| lrow[li]).collect();
            index.entry(key).or_default().push(i);
        }
        let mut key = Vec::with_capacity(join_pairs.len());
        for rrow in right.rows() {
            key.clear();
            key.extend(join_pairs.iter().map(|&(_, ri)| rrow[ri]));
            if let Some(matches) = index.get(&key) {
                for &li in matches {
                    row_buf.clear();
                    row_buf.extend_from_slice(left.row(li));
                    row_buf.extend(right_extra.iter().map(|&ri| rrow[ri]));
                    out.push_row(&row_buf);
                }
            }
        }
    } else {
        // build on right, probe left
        let mut index: HashMap<Vec<TermId>, Vec<usize>> = HashMap::new();
        for (i, rrow) in right.rows().enumerate() {
            let key: Vec<TermId> = join_pairs.iter().map(|&(_, ri)| rrow[ri]).collect();
            index.entry(key).or_default().push(i);
        }
        let mut key = Vec::with_capacity(join_pairs.len());
        for lrow in left.rows() {
            key.clear();
            key.extend(join_pairs.iter().map(|&(li, _)| lrow[li]));
            if let Some(matches) = index.get(&key) {
                for &ri_row in matches {
                    let rrow = right.row(ri_row);
                    row_buf.clear();
                    row_buf.extend_from_slice(lrow);
                    row_buf.extend(right_extra.iter().map(|&ri| rrow[ri]));
                    out.push_row(&row_buf);
                }
            }
        }
    }
    out
}

fn eval_node(node: &JoinNode, dataset: &Dataset) -> BindingTable {
    match node.spec.kind {
        NodeKind::Pt => eval_pt_node(&node.spec, &dataset.pt, &dataset.dict),
        NodeKind::Vp => {
            let pattern = &node.spec.patterns[0];
            let table = dataset
                .dict
                .lookup(&pattern.predicate)
                .and_then(|pid| dataset.vp.get(&pid));
            match table {
                Some(vp) => eval_vp_node(pattern, vp, &dataset.dict),
                None => {
                    // planner rejects unknown predicates before this point
                    let mut schema = Vec::new();
                    for v in pattern.variables() {
                        if !schema.contains(v) {
                            schema.push(v.clone());
                        }
                    }
                    BindingTable::new(schema)
                }
            }
        }
    }
}

fn project(table: BindingTable, vars: &[Variable], distinct: bool) -> BindingTable {
    let indices: Vec<usize> = vars
        .iter()
        .map(|v| {
            table
                .column_of(v)
                .expect("projected variable missing from result")
        })
        .collect();
    let mut out = BindingTable::new(vars.to_vec());
    let mut seen = std::collections::HashSet::new();
    let mut buf = Vec::with_capacity(indices.len());
    for row in table.rows() {
        buf.clear();
        buf.extend(indices.iter().map(|&i| row[i]));
        if distinct && !seen.insert(buf.clone()) {
            continue;
        }
        out.push_row(&buf);
    }
    out
}

/// Evaluate a planned tree bottom-up, folding intermediate results with
/// [`hash_join`], then apply projection (and `DISTINCT`) last. Returns the
/// result and the number of joins executed.
pub fn execute(tree: &JoinTree, query: &BgpQuery, dataset: &Dataset) -> (BindingTable, usize) {
    let order = tree.evaluation_order();
    let mut acc = eval_node(order[0], dataset);
    let mut joins = 0;
    for node in &order[1..] {
        let right = eval_node(node, dataset);
        acc = hash_join(&acc, &right);
        joins += 1;
    }
    (
        project(acc, &query.projected_variables(), query.distinct),
        joins,
    )
}

/// A query answer plus execution details.
#[derive(Debug)]
pub struct QueryOutput {
    pub table: BindingTable,
    /// Joins executed (0 when the plan collapsed to a single node or the
    /// query short-circuited).
    pub joins: usize,
    /// The plan, when one was built.
    pub tree: Option<JoinTree>,
    /// Set when a predicate had no data and the answer is empty by rule.
    pub unknown_predicate: Option<String>,
}

/// Plan and execute in one step. A predicate without data is not an error:
/// the result is an empty table over the query's projection schema.
pub fn run_query(dataset: &Dataset, query: &BgpQuery, strategy: Strategy) -> QueryOutput {
    match planner::plan_query(query, &dataset.dict, &dataset.stats, strategy) {
        Ok(tree) => {
            let (table, joins) = execute(&tree, query, dataset);
            QueryOutput {
                table,
                joins,
                tree: Some(tree),
                unknown_predicate: None,
            }
        }
        Err(PlanError::UnknownPredicate(iri)) => QueryOutput {
            table: BindingTable::new(query.projected_variables()),
            joins: 0,
            tree: None,
            unknown_predicate: Some(iri),
        },
    }
}

/// Write results as TSV: a header of variable names, then one row per
/// solution with terms in N-Triples form. `limit` truncates the row count.
pub fn write_tsv<W: Write>(
    table: &BindingTable,
    dict: &Dictionary,
    limit: Option<usize>,
    w: &mut W,
) -> io::Result<()> {
    let header: Vec<String> = table.schema().iter().map(|v| v.to_string()).collect();
    writeln!(w, "{}", header.join("\t"))?;
    let max = limit.unwrap_or(usize::MAX);
    for row in table.rows().take(max) {
        let cells: Vec<String> = row.iter().map(|&id| dict.resolve(id).to_string()).collect();
        writeln!(w, "{}", cells.join("\t"))?;
    }
    Ok(())
}
