//! Brute-force reference evaluator.
//!
//! Enumerates every assignment of triples to patterns consistent with the
//! constants and shared variables — no statistics, no indexes, no planner.
//! Deliberately simple enough to audit by eye; it is the ground truth the
//! engine is tested against, so it must not share the engine's execution
//! path. Projection and DISTINCT are reimplemented here for the same reason.

use crate::executor::BindingTable;
use crate::sparql::{BgpQuery, PatternTerm, Variable};
use crate::term::{Dictionary, TermId, Triple};

/// Evaluate `query` over the raw triple list under bag semantics.
pub fn nested_loop_eval(query: &BgpQuery, triples: &[Triple], dict: &Dictionary) -> BindingTable {
    let vars = query.variables();

    // constants translated up front; a constant without an id never matches
    enum Slot {
        Var(usize),
        Const(Option<TermId>),
    }
    let slot = |pt: &PatternTerm, vars: &[Variable]| match pt {
        PatternTerm::Var(v) => Slot::Var(vars.iter().position(|x| x == v).unwrap()),
        PatternTerm::Const(t) => Slot::Const(dict.lookup(t)),
    };
    let patterns: Vec<(Slot, Option<TermId>, Slot)> = query
        .patterns
        .iter()
        .map(|p| {
            (
                slot(&p.subject, &vars),
                dict.lookup(&p.predicate),
                slot(&p.object, &vars),
            )
        })
        .collect();

    fn matches(slot: &Slot, actual: TermId, env: &mut [Option<TermId>]) -> Option<usize> {
        // returns the slot index if this call bound it (for unbinding)
        match slot {
            Slot::Const(Some(id)) => (*id == actual).then_some(usize::MAX),
            Slot::Const(None) => None,
            Slot::Var(i) => match env[*i] {
                Some(bound) => (bound == actual).then_some(usize::MAX),
                None => {
                    env[*i] = Some(actual);
                    Some(*i)
                }
            },
        }
    }

    fn recurse(
        patterns: &[(Slot, Option<TermId>, Slot)],
        triples: &[Triple],
        depth: usize,
        env: &mut Vec<Option<TermId>>,
        solutions: &mut Vec<TermId>,
        count: &mut usize,
    ) {
        if depth == patterns.len() {
            solutions.extend(env.iter().map(|v| v.expect("all vars bound")));
            *count += 1;
            return;
        }
        let (subj, pred, obj) = &patterns[depth];
        let Some(pred) = pred else { return };
        for t in triples {
            if t.predicate != *pred {
                continue;
            }
            let Some(s_bound) = matches(subj, t.subject, env) else {
                continue;
            };
            if let Some(o_bound) = matches(obj, t.object, env) {
                recurse(patterns, triples, depth + 1, env, solutions, count);
                if o_bound != usize::MAX {
                    env[o_bound] = None;
                }
            }
            if s_bound != usize::MAX {
                env[s_bound] = None;
            }
        }
    }

    let mut env = vec![None; vars.len()];
    let mut solutions = Vec::new();
    let mut count = 0usize;
    recurse(&patterns, triples, 0, &mut env, &mut solutions, &mut count);

    // project onto the query's output columns, applying DISTINCT if asked
    let projected = query.projected_variables();
    let indices: Vec<usize> = projected
        .iter()
        .map(|v| vars.iter().position(|x| x == v).unwrap())
        .collect();
    let mut out = BindingTable::new(projected);
    let mut seen = std::collections::HashSet::new();
    let mut buf = Vec::with_capacity(indices.len());
    for i in 0..count {
        let row = &solutions[i * vars.len()..(i + 1) * vars.len()];
        buf.clear();
        buf.extend(indices.iter().map(|&j| row[j]));
        if query.distinct && !seen.insert(buf.clone()) {
            continue;
        }
        out.push_row(&buf);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntriples::parse_ntriples_str;
    use crate::rng::SplitMix64;
    use crate::sparql::parse_query;

    fn fixture() -> (Vec<Triple>, Dictionary) {
        parse_ntriples_str(
            "<http://ex/a> <http://ex/p> <http://ex/b> .\n\
             <http://ex/b> <http://ex/p> <http://ex/c> .\n\
             <http://ex/c> <http://ex/p> <http://ex/a> .\n\
             <http://ex/a> <http://ex/q> \"v\" .\n",
        )
        .unwrap()
    }

    #[test]
    fn single_pattern_counts_matching_triples() {
        let (triples, dict) = fixture();
        let q = parse_query("SELECT * WHERE { ?x <http://ex/p> ?y }").unwrap();
        let out = nested_loop_eval(&q, &triples, &dict);
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn unsatisfiable_constant_yields_empty() {
        let (triples, dict) = fixture();
        let q = parse_query("SELECT * WHERE { ?x <http://ex/p> \"nope\" }").unwrap();
        assert!(nested_loop_eval(&q, &triples, &dict).is_empty());
    }

    #[test]
    fn shared_variables_bind_consistently() {
        let (triples, dict) = fixture();
        // chain a->b->c
        let q =
            parse_query("SELECT * WHERE { ?x <http://ex/p> ?y . ?y <http://ex/p> ?z }").unwrap();
        let out = nested_loop_eval(&q, &triples, &dict);
        assert_eq!(out.len(), 3); // the cycle gives three 2-hop paths
    }

    #[test]
    fn pattern_order_invariance() {
        let (triples, dict) = fixture();
        let a =
            parse_query("SELECT * WHERE { ?x <http://ex/p> ?y . ?x <http://ex/q> ?v }").unwrap();
        let b =
            parse_query("SELECT * WHERE { ?x <http://ex/q> ?v . ?x <http://ex/p> ?y }").unwrap();
        // same projection order for both, so bags must match exactly
        let a = nested_loop_eval(
            &parse_query(&format!(
                "SELECT ?x ?y ?v WHERE {{ {} . {} }}",
                a.patterns[0], a.patterns[1]
            ))
            .unwrap(),
            &triples,
            &dict,
        );
        let b = nested_loop_eval(
            &parse_query(&format!(
                "SELECT ?x ?y ?v WHERE {{ {} . {} }}",
                b.patterns[0], b.patterns[1]
            ))
            .unwrap(),
            &triples,
            &dict,
        );
        assert_eq!(a.bag(), b.bag());
    }

    #[test]
    fn adding_triples_never_removes_solutions() {
        let (mut triples, mut dict) = fixture();
        let q = parse_query("SELECT * WHERE { ?x <http://ex/p> ?y }").unwrap();
        let before = nested_loop_eval(&q, &triples, &dict);
        let s = dict.intern(crate::term::Term::iri("http://ex/new"));
        let p = dict.lookup(&crate::term::Term::iri("http://ex/p")).unwrap();
        triples.push(Triple::new(s, p, s));
        let after = nested_loop_eval(&q, &triples, &dict);
        for (row, n) in before.bag() {
            assert!(after.bag().get(&row).copied().unwrap_or(0) >= n);
        }
    }

    #[test]
    fn duplicate_triples_count_twice() {
        let (mut triples, dict) = fixture();
        triples.push(triples[0]);
        let q = parse_query("SELECT * WHERE { ?x <http://ex/p> ?y }").unwrap();
        let out = nested_loop_eval(&q, &triples, &dict);
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn distinct_applies_after_projection() {
        let (triples, dict) = fixture();
        let q = parse_query("SELECT DISTINCT ?p WHERE { ?p <http://ex/p> ?y }").unwrap();
        // without distinct: 3 rows; subjects a,b,c are distinct anyway
        assert_eq!(nested_loop_eval(&q, &triples, &dict).len(), 3);
        let q =
            parse_query("SELECT DISTINCT ?y WHERE { ?x <http://ex/q> ?y . ?z <http://ex/p> ?w }")
                .unwrap();
        // "v" repeated for each (z,w) combination collapses to one
        assert_eq!(nested_loop_eval(&q, &triples, &dict).len(), 1);
    }

    #[test]
    fn self_consistent_under_pattern_permutation_on_random_data() {
        let mut rng = SplitMix64::new(23);
        let mut dict = Dictionary::new();
        let entities: Vec<TermId> = (0..30)
            .map(|i| dict.intern(crate::term::Term::iri(format!("http://ex/e{i}"))))
            .collect();
        let preds: Vec<TermId> = (0..4)
            .map(|i| dict.intern(crate::term::Term::iri(format!("http://ex/p{i}"))))
            .collect();
        let triples: Vec<Triple> = (0..300)
            .map(|_| {
                Triple::new(
                    entities[rng.below(30)],
                    preds[rng.below(4)],
                    entities[rng.below(30)],
                )
            })
            .collect();
        let q1 = parse_query(
            "SELECT ?a ?b ?c WHERE { ?a <http://ex/p0> ?b . ?b <http://ex/p1> ?c . ?a <http://ex/p2> ?c }",
        )
        .unwrap();
        let q2 = parse_query(
            "SELECT ?a ?b ?c WHERE { ?a <http://ex/p2> ?c . ?a <http://ex/p0> ?b . ?b <http://ex/p1> ?c }",
        )
        .unwrap();
        let r1 = nested_loop_eval(&q1, &triples, &dict);
        let r2 = nested_loop_eval(&q2, &triples, &dict);
        assert_eq!(r1.bag(), r2.bag());
    }
}
